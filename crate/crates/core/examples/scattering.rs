//! Scattering closed forms: complexity compression, entanglement from complexity, purity.
//!
//! cargo run --example scattering

use igac::catalog::formulas::{
    purity, rho_from_complexity, rho_qm, scattering_igc_closed, scattering_igc_ratio, scattering_ige_closed,
    ScatteringParams,
};

fn main() -> igac::Result<()> {
    let params = ScatteringParams {
        k0: 1.0,
        sigma_k0: 0.0,
        r0: 1.0,
        l: 1.0,
        a_s: 1.0 / 1600.0,
    };
    let rho = rho_qm(&params)?;
    println!("rho_QM = {rho}");

    let (tau, lambda) = (10.0, 1.0);
    let c_u = scattering_igc_closed(tau, 0.0, lambda)?;
    let c_c = scattering_igc_closed(tau, rho, lambda)?;
    println!("IGC at tau={tau}: uncorrelated {c_u:.6}, correlated {c_c:.6}, ratio {:.6}", c_c / c_u);
    println!("closed-form ratio {:.6}", scattering_igc_ratio(rho)?);
    println!("IGE: {:.6} -> {:.6}", scattering_ige_closed(tau, 0.0, lambda)?, scattering_ige_closed(tau, rho, lambda)?);
    println!("rho recovered from the two complexities: {:.15}", rho_from_complexity(c_u, c_c)?);

    // k0 L = 1 is outside the small-parameter regime, so the flag comes back false
    let p = purity(rho, &params)?;
    println!("purity {:.7} (inside the perturbative regime: {})", p.value, p.perturbative);
    Ok(())
}
