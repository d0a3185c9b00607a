//! Two neutrons scatter in turn off a polarized spin sample; prints the
//! concurrence of the neutron pair along an interaction-time scan and the
//! entanglement at the optimal field and time.

use spinlab::entmeas::{concurrence, eof_from_concurrence, log_negativity};
use spinlab::optimize::linspace;
use spinlab::scatter::{landmarks, run_protocol, ScatterConfig};

fn main() -> spinlab::Result<()> {
    let n = 10;
    let lm = landmarks(&ScatterConfig::new(n))?;
    println!("N = {n}: optimal field {:.4}, optimal time {:.4}", lm.b_star, lm.tau_star);

    let at_field = ScatterConfig::new(n).field(lm.b_star);
    println!("{:>8} {:>12}", "tau", "concurrence");
    for tau in linspace(0.0, 2.0 * landmarks(&at_field)?.t_phi, 21) {
        let rho = run_protocol(&at_field.tau(tau))?.1;
        println!("{tau:>8.3} {:>12.6}", concurrence(&rho)?);
    }

    let rho = run_protocol(&at_field.tau(lm.tau_star))?.1;
    let c = concurrence(&rho)?;
    println!(
        "optimum: C = {c:.6}, EoF = {:.4} ebit, log-negativity = {:.4}",
        eof_from_concurrence(c)?,
        log_negativity(&rho, 1)?
    );
    Ok(())
}
