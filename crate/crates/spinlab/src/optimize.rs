//! Derivative-free maximization: a uniform coarse grid followed by
//! golden-section refinement of the bracketing cell.
//!
//! Objectives in this crate often carry kinks from `max(0, .)` clamps, so
//! no derivative information is used anywhere.

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    /// Location of the maximum.
    pub x: f64,
    /// Objective value at `x`.
    pub value: f64,
}

/// Result of a two-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum2 {
    /// First coordinate of the maximum.
    pub x: f64,
    /// Second coordinate of the maximum.
    pub y: f64,
    /// Objective value at `(x, y)`.
    pub value: f64,
}

/// Default number of coarse grid points per axis.
pub const GRID_POINTS: usize = 512;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping when the
/// bracket is narrower than `tol`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Maximum {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // The bracket ends were sampled too; keep whichever is best.
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold(Maximum { x, value: fx }, |best, (x, v)| {
            if v > best.value {
                Maximum { x, value: v }
            } else {
                best
            }
        })
}

/// Uniform grid of `points` samples covering `[lo, hi]` inclusively.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (points - 1) as f64;
            (0..points).map(|i| lo + h * i as f64).collect()
        }
    }
}

/// Grid scan over `[lo, hi]` with `points` samples, then golden-section
/// refinement inside the cells adjacent to the best sample.
pub fn maximize_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize, tol: f64) -> Maximum {
    let grid = linspace(lo, hi, points.max(3));
    let (best, _) = grid
        .iter()
        .map(|&x| f(x))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let refined = golden_max(&f, a, b, tol);
    let at_grid = Maximum {
        x: grid[best],
        value: f(grid[best]),
    };
    if refined.value >= at_grid.value {
        refined
    } else {
        at_grid
    }
}

/// Grid scan over a rectangle, then alternating golden-section refinement
/// along each coordinate inside the best grid cell.
pub fn maximize_2d(
    f: impl Fn(f64, f64) -> f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    points: usize,
    tol: f64,
) -> Maximum2 {
    let points = points.max(3);
    let xs = linspace(x_range.0, x_range.1, points);
    let ys = linspace(y_range.0, y_range.1, points);
    let mut best = Maximum2 {
        x: xs[0],
        y: ys[0],
        value: f64::NEG_INFINITY,
    };
    let mut bi = (0, 0);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let v = f(x, y);
            if v > best.value {
                best = Maximum2 { x, y, value: v };
                bi = (i, j);
            }
        }
    }
    let xa = xs[bi.0.saturating_sub(1)];
    let xb = xs[(bi.0 + 1).min(points - 1)];
    let ya = ys[bi.1.saturating_sub(1)];
    let yb = ys[(bi.1 + 1).min(points - 1)];
    for _ in 0..40 {
        let mx = golden_max(|x| f(x, best.y), xa, xb, tol);
        let my = golden_max(|y| f(mx.x, y), ya, yb, tol);
        let moved = (mx.x - best.x).abs() + (my.x - best.y).abs();
        if my.value >= best.value {
            best = Maximum2 {
                x: mx.x,
                y: my.x,
                value: my.value,
            };
        }
        if moved < tol {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_max(|x| -(x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((m.x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn grid_then_golden_picks_global_peak() {
        // Two peaks; the higher one sits near x = 4.
        let f = |x: f64| (-(x - 1.0).powi(2)).exp() + 1.5 * (-(x - 4.0).powi(2)).exp();
        let m = maximize_1d(f, 0.0, 6.0, GRID_POINTS, 1e-10);
        assert!((m.x - 4.0).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn kinked_objective() {
        let f = |x: f64| (1.0 - (x - 0.123_456).abs()).max(0.0);
        let m = maximize_1d(f, -3.0, 3.0, 64, 1e-12);
        assert!((m.x - 0.123_456).abs() < 1e-9);
    }

    #[test]
    fn two_dimensional_peak() {
        let f = |x: f64, y: f64| -((x - 0.7).powi(2) + 2.0 * (y + 0.2).powi(2));
        let m = maximize_2d(f, (-1.0, 1.0), (-1.0, 1.0), 64, 1e-10);
        assert!((m.x - 0.7).abs() < 1e-7 && (m.y + 0.2).abs() < 1e-7, "{m:?}");
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 20.0, 2000);
        assert_eq!(g.len(), 2000);
        assert_eq!(g[0], 0.0);
        assert!((g[1999] - 20.0).abs() < 1e-12);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }
}
