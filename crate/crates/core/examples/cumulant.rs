//! Cumulants of the smeared field over one block, for the Gaussian bulk and
//! for the critical ε = 0.1 bulk.

use hrg::dynamics::{continue_in_epsilon, ReducedMap};
use hrg::func::{GridSpec, SampledEvenFunction};
use hrg::map::{Backend, RGParams};
use hrg::observables::{cumulants, gaussian_field_variance, TestFunctionSpec};

fn main() -> hrg::Result<()> {
    let grid = GridSpec::default();
    let params = RGParams::bms(0.1)?;
    let depth = 8;
    let spec = TestFunctionSpec::field(0.1, 1);

    let gaussian = vec![SampledEvenFunction::zero(grid); depth];
    let c = cumulants(&spec, &gaussian, &params, 0, Backend::Nested, 0.1)?;
    println!("gaussian bulk:  {:?}", c.orders);
    println!("  exact variance {:.10}", gaussian_field_variance(&params, 1, depth));

    let map = ReducedMap::new(params, Backend::Nested, grid);
    let fp = continue_in_epsilon(&[0.1], &map, 1e-10)?.remove(0);
    let critical = vec![fp.potential.normalized(); depth];
    let c = cumulants(&spec, &critical, &params, 0, Backend::Nested, 0.1)?;
    println!("critical bulk:  {:?}", c.orders);
    Ok(())
}
