//! Flows the bare potential `g:φ⁴: + μ:φ²:` on either side of the critical
//! mass and prints the quadratic and quartic Wick couplings per step.

use hrg::dynamics::{bare_potential, flow};
use hrg::func::GridSpec;
use hrg::map::{Backend, RGParams};

fn main() -> hrg::Result<()> {
    let params = RGParams::bms(0.1)?;
    let grid = GridSpec::default();
    for mu in [0.24, 0.2517816, 0.26] {
        let v0 = bare_potential(grid, 0.2, mu)?;
        let f = flow(&v0, &params, Backend::Nested, 20, 2)?;
        println!("mu = {mu}");
        for r in &f.records {
            println!(
                "  {:>2}  c2 = {:>12.5e}  c4 = {:>12.5e}",
                r.step,
                r.couplings.get(2),
                r.couplings.get(4)
            );
        }
        if let Some(why) = &f.stop_reason {
            println!("  stopped: {why}");
        }
    }
    Ok(())
}
