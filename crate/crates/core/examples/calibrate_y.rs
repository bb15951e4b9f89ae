//! Calibrates the subtraction constant of the squared field at the ε = 0.1
//! fixed point and sums the resulting series.

use hrg::dynamics::{continue_in_epsilon, kappa_from_spectrum, ReducedMap};
use hrg::func::GridSpec;
use hrg::map::{Backend, RGParams};
use hrg::observables::{calibrate_y, cumulant_generating, TestFunctionSpec, YCalibrationOptions};

fn main() -> hrg::Result<()> {
    let params = RGParams::bms(0.1)?;
    let map = ReducedMap::new(params, Backend::Nested, GridSpec::default());
    let fp = continue_in_epsilon(&[0.1], &map, 1e-10)?.remove(0);
    let kappa = kappa_from_spectrum(&fp, &params)?;
    let opts = YCalibrationOptions::default();
    let bulk = vec![fp.potential.normalized(); opts.n_max + 12];

    let cal = calibrate_y(&bulk, &params, kappa, Backend::Nested, &opts)?;
    println!("kappa = {kappa:.6}, Y = {:.6e} (rms residual {:.1e})", cal.y, cal.rms_residual);

    let spec = TestFunctionSpec::square(0.05, 0, kappa, cal.y);
    let series = cumulant_generating(&spec, &bulk, &params, 4, Backend::Nested)?;
    for t in &series.terms {
        println!("q = {:>3}  term {:>12.4e}  partial {:>12.6e}", t.q, t.delta_b_diff, t.partial_sum);
    }
    println!("S = {:.8e}", series.value);
    Ok(())
}
