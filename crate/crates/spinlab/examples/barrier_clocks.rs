//! A spin-polarized wave packet crosses a region of magnetic field; compares
//! the precession angle read at a detector with the one implied by the
//! crossing time.

use spinlab::barrier::{arrival_distribution, clock_comparison, BarrierConfig};

fn main() -> spinlab::Result<()> {
    for (w, b, x_out) in [(2.0, 0.05, 16.0), (3.0, 0.02, 19.0)] {
        let cfg = BarrierConfig::new().width(w).field(b);
        let arrival = arrival_distribution(&cfg, x_out)?;
        let clocks = clock_comparison(&cfg, x_out)?;
        println!("width {w}, field {b}, detector at x = {x_out}");
        println!("  arrival peak t = {:.2}, half-maximum window [{:.2}, {:.2}]", arrival.peak_time, clocks.window.0, clocks.window.1);
        println!(
            "  crossing time {:.3}; expected angle {:.3} vs measured [{:.3}, {:.3}] -> consistent: {}",
            clocks.t_b, clocks.expected_phi, clocks.measured_phi_range.0, clocks.measured_phi_range.1, clocks.consistent
        );
    }
    Ok(())
}
