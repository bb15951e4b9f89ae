//! One RG step on a few potentials, with both backends on a coarse grid.

use hrg::func::{wick_monomial, GridSpec, SampledEvenFunction};
use hrg::map::{rg_step, Backend, RGParams};

fn main() -> hrg::Result<()> {
    let params = RGParams::bms(0.1)?;
    let grid = GridSpec::default().with_points(257);
    let mc = Backend::MonteCarlo {
        n_samples: 200_000,
        seed: 3,
    };
    let cases: [(&str, &dyn Fn(f64) -> f64); 3] = [
        ("0.1 phi^2", &|x| 0.1 * x * x),
        ("0.02 phi^4", &|x| 0.02 * x.powi(4)),
        ("0.05 :phi^4: - 0.1 :phi^2:", &|x| 0.05 * wick_monomial(4, x) - 0.1 * wick_monomial(2, x)),
    ];
    for (name, f) in cases {
        let v = SampledEvenFunction::from_fn(grid, f)?.normalized();
        let a = rg_step(&v, &params, Backend::Nested)?;
        let b = rg_step(&v, &params, mc)?;
        println!("{name}: delta_b nested {:.8}, monte carlo {:.8}", a.delta_b, b.delta_b);
        for x in [0.5, 1.0, 2.0] {
            println!("  V'({x}) = {:.8} / {:.8}", a.v.evaluate(x), b.v.evaluate(x));
        }
    }
    Ok(())
}
