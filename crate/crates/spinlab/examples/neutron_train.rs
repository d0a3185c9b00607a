//! A train of neutrons scattered off the same sample: pair concurrences
//! between neutrons `m` and `n`, and the average over the first `t`.

use spinlab::multiscatter::{average_pair_concurrence, pair_concurrence, pair_table};
use spinlab::scatter::ScatterConfig;

fn main() -> spinlab::Result<()> {
    let n_spins = 10;
    let cfg = ScatterConfig::new(n_spins).field(1.0 - 1.0 / n_spins as f64).tau(1.2);
    let table = pair_table(&cfg, 6)?;
    println!("pair concurrences among six neutrons (N = {n_spins}, optimal field):");
    for m in 1..=5 {
        let row: Vec<String> = (m + 1..=6).map(|n| format!("{:.4}", table.get(m, n).unwrap_or(0.0))).collect();
        println!("  m = {m}: {}", row.join(" "));
    }
    println!("C(2,4) = {:.6}, C(1,5) = {:.6}", pair_concurrence(&cfg, 2, 4)?, pair_concurrence(&cfg, 1, 5)?);
    for t in 2..=8 {
        println!("mean over the first {t}: {:.5}", average_pair_concurrence(&cfg, t)?);
    }
    Ok(())
}
