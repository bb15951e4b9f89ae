/// A log-Boltzmann profile `W` on the real line, with derivatives.
pub trait Profile: Sync {
    fn eval(&self, x: f64) -> f64;
    /// `(W, W', W'')` at `x`.
    fn eval_d2(&self, x: f64) -> (f64, f64, f64);
}

impl<P: Profile + ?Sized> Profile for &P {
    fn eval(&self, x: f64) -> f64 {
        (**self).eval(x)
    }
    fn eval_d2(&self, x: f64) -> (f64, f64, f64) {
        (**self).eval_d2(x)
    }
}

/// Pointwise sum of two profiles, i.e. the product of Boltzmann factors.
pub struct SumProfile<A, B>(pub A, pub B);

impl<A: Profile, B: Profile> Profile for SumProfile<A, B> {
    fn eval(&self, x: f64) -> f64 {
        self.0.eval(x) + self.1.eval(x)
    }
    fn eval_d2(&self, x: f64) -> (f64, f64, f64) {
        let (a, a1, a2) = self.0.eval_d2(x);
        let (b, b1, b2) = self.1.eval_d2(x);
        (a + b, a1 + b1, a2 + b2)
    }
}

/// Analytic profile from closures; handy for tests and bare potentials.
pub struct FnProfile<F, G>(pub F, pub G);

impl<F, G> Profile for FnProfile<F, G>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> (f64, f64, f64) + Sync,
{
    fn eval(&self, x: f64) -> f64 {
        (self.0)(x)
    }
    fn eval_d2(&self, x: f64) -> (f64, f64, f64) {
        (self.1)(x)
    }
}

/// Cubic through the values at local offsets -1, 0, 1, 2, as `(a, b, c, d)`
/// in `a + b u + c u² + d u³`.
#[inline]
pub(crate) fn lagrange4(fm: f64, f0: f64, f1: f64, f2: f64) -> (f64, f64, f64, f64) {
    let b = -fm / 3.0 - f0 / 2.0 + f1 - f2 / 6.0;
    let c = fm / 2.0 - f0 + f1 / 2.0;
    let d = (f2 - fm) / 6.0 + (f0 - f1) / 2.0;
    (f0, b, c, d)
}
