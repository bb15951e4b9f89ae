//! Metropolis sampling of the tree field with a quartic single-site
//! potential at its critical mass, ε = 0.2.

use hrg::dynamics::{bare_potential, critical_mu, ShootingOptions};
use hrg::func::GridSpec;
use hrg::map::{Backend, RGParams};
use hrg::tree::{mcmc_perturbed_field, McmcOptions};

fn main() -> hrg::Result<()> {
    let params = RGParams::bms(0.2)?;
    let grid = GridSpec::default();
    let g = 0.2;
    let mu = critical_mu(g, &params, Backend::Nested, grid, 1e-8, &ShootingOptions::default())?.mu_c;
    let v = bare_potential(grid, g, mu)?;
    let opts = McmcOptions {
        depth: 4,
        sweeps: 1000,
        ..McmcOptions::default()
    };
    let r = mcmc_perturbed_field(&params, &v, &opts)?;
    println!("mu_c = {mu:.8}, acceptance per layer {:.3?}", r.acceptance);
    for l in &r.table.levels {
        println!(
            "level {} cov(phi) {:>11.4e} +- {:.1e}   cov(phi^2) {:>11.4e} +- {:.1e}",
            l.level, l.cov_phi, l.cov_phi_stderr, l.cov_phi2, l.cov_phi2_stderr
        );
    }
    Ok(())
}
