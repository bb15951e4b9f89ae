//! Follows the nontrivial fixed point from ε = 0.05 to ε = 0.3 and prints
//! its quartic coupling, leading eigenvalues and anomalous dimension.

use hrg::dynamics::{continue_in_epsilon, kappa_from_spectrum, ReducedMap};
use hrg::func::GridSpec;
use hrg::map::{Backend, RGParams};

fn main() -> hrg::Result<()> {
    let map = ReducedMap::new(RGParams::bms(0.1)?, Backend::Nested, GridSpec::default());
    let eps = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];
    println!("{:>5} {:>10} {:>10} {:>10} {:>9} {:>9}", "eps", "c4", "lambda1", "lambda2", "kappa", "residual");
    for fp in continue_in_epsilon(&eps, &map, 1e-10)? {
        let kappa = kappa_from_spectrum(&fp, &RGParams::bms(fp.epsilon)?)?;
        println!(
            "{:>5} {:>10.6} {:>10.6} {:>10.6} {:>9.5} {:>9.1e}",
            fp.epsilon,
            fp.couplings.get(4),
            fp.eigenvalues[0],
            fp.eigenvalues[1],
            kappa,
            fp.residual
        );
    }
    Ok(())
}
