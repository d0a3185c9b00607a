//! Monte Carlo sensitivity of four-spin transfer to random placement errors.

use spinlab::chains::robustness_mc;

fn main() -> spinlab::Result<()> {
    let seed = 0;
    println!("{:>8} {:>10} {:>12} {:>12}", "p", "max |D|/L", "F < 2/3", "F < 0.8");
    for p in [0.0, 0.015, 0.03, 0.06, 0.09] {
        let classical = robustness_mc(1.0, p, 1000, 2.0 / 3.0, seed)?;
        let strict = robustness_mc(1.0, p, 1000, 0.8, seed)?;
        println!("{p:>8.3} {:>10.3} {:>12.3} {:>12.3}", p / 3.0, classical.failure_rate, strict.failure_rate);
    }
    Ok(())
}
