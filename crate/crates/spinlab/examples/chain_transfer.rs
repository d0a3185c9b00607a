//! End-to-end state transfer through open dipolar and Heisenberg chains:
//! best fidelity, the bound-state transfer time and the two-level estimate.

use spinlab::chains::{
    bound_state_analysis, heisenberg_crossing_time, max_fidelity, optimize_four_spin, two_level_model, ChainSpec,
};

fn main() -> spinlab::Result<()> {
    println!("{:>3} {:>12} {:>8} {:>10} {:>10}", "N", "t0", "t0*", "model t0*", "F_max");
    let model = two_level_model(4, 14)?;
    // The two-level model describes long chains only.
    for n in [3usize, 4, 6, 10, 14, 20] {
        let spec = ChainSpec::dipolar_open(n)?;
        let bound = bound_state_analysis(&spec)?;
        let best = max_fidelity(&spec, 1, n, 3.0 * bound.t0)?;
        let predicted = if n >= 14 {
            format!("{:.4}", model.predicted_t0_star((n - 1) as f64))
        } else {
            "-".to_string()
        };
        println!("{n:>3} {:>12.2} {:>8.4} {predicted:>10} {:>10.5}", bound.t0, bound.t0_star, best.f_max);
    }
    let opt = optimize_four_spin()?;
    println!("best symmetric four-spin gaps: {:.3}, {:.3}, {:.3} -> t0* = {:.4}", opt.r12, opt.r23, opt.r12, opt.t0_star);

    let n = 27;
    let spec = ChainSpec::heisenberg_open(n, 0.5)?;
    let best = max_fidelity(&spec, 1, n, 40.0)?;
    println!(
        "Heisenberg N = {n}, J = 1/2: crossing time {:.1}, best F = {:.4} at t = {:.2}",
        heisenberg_crossing_time(n, 0.5),
        best.f_max,
        best.t_star
    );
    Ok(())
}
