//! How far each update rule moves the sampling distribution, measured in
//! KL, as a probability approaches the clamp boundary.

use satr::bernoulli::{kl_exact, kl_quadratic, ProbVector};
use satr::optim::{apply_update, ec_step, ec_tr_step, satr_step, SatrConfig, TrConfig};
use satr::shaping::NaturalGradient;

fn main() -> satr::Result<()> {
    let eta = 0.15;
    let g = NaturalGradient::from_vec(vec![0.2, -0.05], 256);
    println!("rho_0      step     KL_quadratic   KL_exact");
    for r in [0.5, 1e-1, 1e-2, 1e-3] {
        let rho = ProbVector::new(vec![r, 0.5], 1e-3)?;
        let steps = [
            ("ec", ec_step(&rho, &g, eta)?),
            ("satr", satr_step(&rho, &g, SatrConfig { eta })?),
            ("ec_tr", ec_tr_step(&rho, &g, TrConfig::default())?.delta),
        ];
        for (name, delta) in steps {
            let next = apply_update(&rho, &delta)?;
            println!(
                "{r:<10} {name:<8} {:<14.4e} {:.4e}",
                kl_quadratic(&rho, &delta)?,
                kl_exact(&rho, &next)?
            );
        }
    }
    println!("\nSATR budget eta^2/2 |g|^2 = {:.4e}", eta * eta / 2.0 * g.energy);
    Ok(())
}
