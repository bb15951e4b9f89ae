//! The unstable scaling field at the ε = 0.1 fixed point: the wave amplitude
//! of a few directions, and z along one RG step.

use hrg::dynamics::{
    continue_in_epsilon, scaling_field_z, wave_amplitude, LimitOptions, ReducedMap,
};
use hrg::func::{wick_monomial, GridSpec, SampledEvenFunction};
use hrg::map::{Backend, RGParams};

fn main() -> hrg::Result<()> {
    let grid = GridSpec::default();
    let map = ReducedMap::new(RGParams::bms(0.1)?, Backend::Nested, grid);
    let fp = continue_in_epsilon(&[0.1], &map, 1e-10)?.remove(0);
    let opts = LimitOptions::default();
    println!("lambda1 = {:.8}", fp.leading_eigenvalue());

    for k in [2, 4, 6] {
        let w = SampledEvenFunction::from_fn(grid, |x| wick_monomial(k, x))?.normalized();
        let psi = wave_amplitude(&fp.potential, &w, &map, &fp, &opts)?;
        println!("Psi(V*, :phi^{k}:) = {:>12.6}  (settled after {} steps)", psi.value, psi.n);
    }

    let v = SampledEvenFunction::from_fn(grid, |x| {
        fp.potential.evaluate(x) + 1e-9 * wick_monomial(2, x)
    })?
    .normalized();
    let mut x = map.coords(&v);
    for step in 0..4 {
        let z = scaling_field_z(&map.reconstruct(&x)?, &map, &fp, &opts)?;
        println!("step {step}: z = {:.6e}", z.value);
        x = map.apply(&x)?;
    }
    Ok(())
}
