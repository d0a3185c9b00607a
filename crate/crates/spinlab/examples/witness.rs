//! Builds an entanglement witness for the optimal two-neutron state and
//! splits it into local spin measurements.

use spinlab::entmeas::{decomposition_for, witness_expectation, witness_from_state};
use spinlab::scatter::{landmarks, run_protocol, ScatterConfig};

fn main() -> spinlab::Result<()> {
    let n = 10;
    let lm = landmarks(&ScatterConfig::new(n))?;
    let rho = run_protocol(&ScatterConfig::new(n).field(lm.b_star).tau(lm.tau_star))?.1;
    let w = witness_from_state(&rho)?;
    println!("witness value on the state: {:.4}", witness_expectation(&w, &rho, true)?);
    let d = decomposition_for(&w)?;
    println!("{} local settings:", d.settings_count);
    for term in &d.terms {
        println!("  {:+.4} x {:?} projector {}", term.coefficient, term.setting, term.label);
    }
    Ok(())
}
