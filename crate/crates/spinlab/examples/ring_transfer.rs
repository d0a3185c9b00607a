//! Transfer to the antipodal site of a dipolar ring, comparing even and odd
//! rings at a fixed time budget.

use spinlab::chains::{average_fidelity, ring_transfer_sites, ChainSpec, TransferChannel};

fn main() -> spinlab::Result<()> {
    let budget = 1000.0;
    println!("{:>3} {:>8} {:>10} {:>10}", "N", "target", "F_max", "t*");
    for n in 6..=14 {
        let spec = ChainSpec::dipolar_ring(n)?;
        let (s, r) = ring_transfer_sites(n);
        let (t, f) = TransferChannel::closed_ring(&spec, s, r)?.max_abs(0.0, budget);
        println!("{n:>3} {r:>8} {:>10.5} {t:>10.2}", average_fidelity(f));
    }
    Ok(())
}
