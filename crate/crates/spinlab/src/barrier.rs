//! A spin-1/2 Gaussian wavepacket crossing a region of uniform field.
//!
//! The field `B_z` along `z` fills `0 <= x <= L`. Inside it the two spin
//! components see opposite potentials `+-B_z`, so with unit mass their wave
//! numbers are `q_up = sqrt(k^2 - 2 B_z)` and `q_down = sqrt(k^2 + 2 B_z)`.
//! Each plane-wave mode `k_m = 2 pi m / big_l` is replaced by the stationary
//! stationary scattering state of the same energy `k^2 / 2`, and the packet
//! is the Gaussian superposition of these modes.
//!
//! The spin starts along `+x`. While the packet crosses the field the spin
//! precesses about `z` at rate `2 B_z`, so comparing the azimuth measured
//! after the barrier with `2 B_z t_B`, where `t_B` is the crossing time
//! estimated from the mean internal wave number, compares a spin clock with
//! a space clock.

use crate::error::{Error, Result};
use crate::optimize::{golden_max, linspace};
use crate::qcore::{c64, C64};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Geometry and packet parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierConfig {
    /// Length of the periodic box fixing the mode spacing.
    pub big_l: f64,
    /// Extent of the field region, which starts at `x = 0`.
    pub l: f64,
    pub b_z: f64,
    /// Central wave number.
    pub k0: f64,
    /// Initial packet center.
    pub x0: f64,
    /// Packet width.
    pub w: f64,
    /// Number of modes kept around the central one (odd).
    pub n_modes: usize,
}

impl BarrierConfig {
    /// Box 40, field region 10, `x0 = -8`, `k0 = pi / 4`, unit width, no
    /// field, 257 modes.
    pub fn new() -> Self {
        BarrierConfig {
            big_l: 40.0,
            l: 10.0,
            b_z: 0.0,
            k0: 10.0 * PI / 40.0,
            x0: -8.0,
            w: 1.0,
            n_modes: 257,
        }
    }

    /// Sets the field.
    pub fn field(mut self, b_z: f64) -> Self {
        self.b_z = b_z;
        self
    }

    /// Sets the packet width.
    pub fn width(mut self, w: f64) -> Self {
        self.w = w;
        self
    }

    /// Sets the number of modes.
    pub fn modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self
    }

    /// Checks the geometric invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0) || !(self.big_l > 2.0 * self.l) {
            return Err(Error::config("big_l", "the box must be much longer than the field region"));
        }
        if !(self.w > 0.0) || !(self.k0 > 0.0) || !(self.b_z >= 0.0) {
            return Err(Error::config("w", "width, k0 and b_z must be positive"));
        }
        if self.n_modes.is_multiple_of(2) {
            return Err(Error::config("n_modes", "must be odd"));
        }
        Ok(())
    }

    /// Index of the mode closest to `k0`.
    pub fn central_mode(&self) -> i64 {
        (self.k0 * self.big_l / (2.0 * PI)).round() as i64
    }
}

impl Default for BarrierConfig {
    fn default() -> Self {
        Self::new()
    }
}

/// Coefficients of one spin component of a scattering state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinCoefficients {
    /// Wave number inside the field region (principal branch).
    pub q: C64,
    /// Reflected amplitude to the left of the region.
    pub r: C64,
    /// Forward amplitude inside the region.
    pub t: C64,
    /// Backward amplitude inside the region.
    pub r_prime: C64,
    /// Transmitted amplitude to the right of the region.
    pub t_prime: C64,
}

impl SpinCoefficients {
    fn new(k: f64, q: C64, l: f64) -> Self {
        let i = c64(0.0, 1.0);
        let kc = c64(k, 0.0);
        let eq = (i * q * l).exp();
        let ek = (i * kc * l).exp();
        let den = (kc + q).powi(2) / eq - (kc - q).powi(2) * eq;
        let t_prime = 4.0 * kc * q / ek / den;
        let t = t_prime * ek / eq * (q + kc) / (2.0 * q);
        let r_prime = t_prime * ek * eq * (q - kc) / (2.0 * q);
        SpinCoefficients {
            q,
            r: t + r_prime - 1.0,
            t,
            r_prime,
            t_prime,
        }
    }

    /// Spatial wavefunction of this component at `x`.
    pub fn value(&self, k: f64, l: f64, x: f64) -> C64 {
        let i = c64(0.0, 1.0);
        if x < 0.0 {
            (i * k * x).exp() + self.r * (-i * k * x).exp()
        } else if x <= l {
            self.t * (i * self.q * x).exp() + self.r_prime * (-i * self.q * x).exp()
        } else {
            self.t_prime * (i * k * x).exp()
        }
    }

    /// Spatial derivative of the wavefunction, taking the region on the
    /// given side of a boundary.
    fn slope(&self, k: f64, region: usize, x: f64) -> C64 {
        let i = c64(0.0, 1.0);
        match region {
            1 => i * k * ((i * k * x).exp() - self.r * (-i * k * x).exp()),
            2 => i * self.q * (self.t * (i * self.q * x).exp() - self.r_prime * (-i * self.q * x).exp()),
            _ => i * k * self.t_prime * (i * k * x).exp(),
        }
    }

    fn region_value(&self, k: f64, region: usize, x: f64) -> C64 {
        let i = c64(0.0, 1.0);
        match region {
            1 => (i * k * x).exp() + self.r * (-i * k * x).exp(),
            2 => self.t * (i * self.q * x).exp() + self.r_prime * (-i * self.q * x).exp(),
            _ => self.t_prime * (i * k * x).exp(),
        }
    }

    /// `|R|^2 + |T'|^2 - 1`.
    pub fn flux_defect(&self) -> f64 {
        self.r.norm_sqr() + self.t_prime.norm_sqr() - 1.0
    }

    /// Largest mismatch of value and slope across the two boundaries.
    pub fn continuity_defect(&self, k: f64, l: f64) -> f64 {
        [
            (self.region_value(k, 1, 0.0) - self.region_value(k, 2, 0.0)).norm(),
            (self.slope(k, 1, 0.0) - self.slope(k, 2, 0.0)).norm(),
            (self.region_value(k, 2, l) - self.region_value(k, 3, l)).norm(),
            (self.slope(k, 2, l) - self.slope(k, 3, l)).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Scattering coefficients of both spin components for one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub k: f64,
    pub up: SpinCoefficients,
    pub down: SpinCoefficients,
}

/// Coefficients for wave number `k > 0`, field `b_z` and region extent `l`.
pub fn mode_coefficients(k: f64, b_z: f64, l: f64) -> Result<ModeCoefficients> {
    if !(k > 0.0) {
        return Err(Error::OutOfRange {
            value: k,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let q_up = c64(k * k - 2.0 * b_z, 0.0).sqrt();
    let q_down = c64(k * k + 2.0 * b_z, 0.0).sqrt();
    Ok(ModeCoefficients {
        k,
        up: SpinCoefficients::new(k, q_up, l),
        down: SpinCoefficients::new(k, q_down, l),
    })
}

/// The packet as a list of weighted scattering modes.
///
/// A mode with `k > 0` is the state incident from the left, a mode with
/// `k < 0` its mirror image about the centre of the field region (incident
/// from the right). The `k = 0` mode is the constant plane wave without
/// field and vanishes with field, where both scattering states at zero
/// energy are fully reflected with a node at the boundary.
#[derive(Debug, Clone)]
pub struct Wavepacket {
    cfg: BarrierConfig,
    modes: Vec<(f64, Option<ModeCoefficients>, C64)>,
}

impl Wavepacket {
    /// Builds the modes `k_m = 2 pi m / big_l` centred on `k0`.
    pub fn new(cfg: &BarrierConfig) -> Result<Self> {
        cfg.validate()?;
        let m0 = cfg.central_mode();
        let half = (cfg.n_modes / 2) as i64;
        let norm = (PI / (2.0 * cfg.w * cfg.w)).powf(-0.25) * std::f64::consts::FRAC_1_SQRT_2;
        let mut modes = Vec::with_capacity(cfg.n_modes);
        for m in m0 - half..=m0 + half {
            let k = 2.0 * PI * m as f64 / cfg.big_l;
            let dk = k - cfg.k0;
            let weight = c64(0.0, -dk * cfg.x0).exp() * (norm * (-dk * dk * cfg.w * cfg.w).exp());
            if m == 0 {
                if cfg.b_z == 0.0 {
                    modes.push((0.0, None, weight));
                }
            } else {
                modes.push((k, Some(mode_coefficients(k.abs(), cfg.b_z, cfg.l)?), weight));
            }
        }
        Ok(Wavepacket { cfg: *cfg, modes })
    }

    fn spatial(&self, k: f64, mc: &Option<ModeCoefficients>, x: f64) -> [C64; 2] {
        let l = self.cfg.l;
        match mc {
            None => [c64(1.0, 0.0); 2],
            Some(mc) if k > 0.0 => [mc.up.value(k, l, x), mc.down.value(k, l, x)],
            Some(mc) => {
                let g = c64(0.0, -mc.k * l).exp();
                [g * mc.up.value(mc.k, l, l - x), g * mc.down.value(mc.k, l, l - x)]
            }
        }
    }

    /// Spinor `(psi_up, psi_down)` at `(x, t)`.
    pub fn amplitude(&self, x: f64, t: f64) -> [C64; 2] {
        self.modes.iter().fold([c64(0.0, 0.0); 2], |acc, (k, mc, wgt)| {
            let a = wgt * c64(0.0, -0.5 * k * k * t).exp();
            let [u, d] = self.spatial(*k, mc, x);
            [acc[0] + a * u, acc[1] + a * d]
        })
    }

    /// Spinor at fixed `x` for many times, reusing the spatial factors.
    pub fn time_series(&self, x: f64, times: &[f64]) -> Vec<[C64; 2]> {
        let spatial: Vec<(f64, C64, C64)> = self
            .modes
            .iter()
            .map(|(k, mc, wgt)| {
                let [u, d] = self.spatial(*k, mc, x);
                (*k, wgt * u, wgt * d)
            })
            .collect();
        times
            .par_iter()
            .map(|&t| {
                spatial.iter().fold([c64(0.0, 0.0); 2], |acc, &(k, u, d)| {
                    let e = c64(0.0, -0.5 * k * k * t).exp();
                    [acc[0] + e * u, acc[1] + e * d]
                })
            })
            .collect()
    }

    /// Un-normalized density `|psi_up|^2 + |psi_down|^2` at `(x, t)`.
    pub fn density(&self, x: f64, t: f64) -> f64 {
        let [u, d] = self.amplitude(x, t);
        u.norm_sqr() + d.norm_sqr()
    }

    /// Number of modes actually kept.
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }
}

/// Spinor of the packet at `(x, t)`.
pub fn wavepacket(cfg: &BarrierConfig, x: f64, t: f64) -> Result<[C64; 2]> {
    Ok(Wavepacket::new(cfg)?.amplitude(x, t))
}

/// Density at a fixed position sampled on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalTrace {
    pub times: Vec<f64>,
    pub density: Vec<f64>,
    /// Time of the largest density, refined between grid points.
    pub peak_time: f64,
    pub peak_density: f64,
}

/// Number of samples in arrival traces.
pub const ARRIVAL_POINTS: usize = 1201;

/// Arrival trace at `x_out` over `[0, 1.5 (x_out - x0) / k0]`.
pub fn arrival_distribution(cfg: &BarrierConfig, x_out: f64) -> Result<ArrivalTrace> {
    if !(x_out > cfg.l) {
        return Err(Error::config("x_out", "must lie beyond the field region"));
    }
    let packet = Wavepacket::new(cfg)?;
    let t_end = 1.5 * (x_out - cfg.x0) / cfg.k0;
    let times = linspace(0.0, t_end, ARRIVAL_POINTS);
    let density: Vec<f64> = packet
        .time_series(x_out, &times)
        .iter()
        .map(|[u, d]| u.norm_sqr() + d.norm_sqr())
        .collect();
    let best = (0..density.len())
        .max_by(|&a, &b| density[a].total_cmp(&density[b]))
        .expect("non-empty grid");
    let lo = times[best.saturating_sub(1)];
    let hi = times[(best + 1).min(times.len() - 1)];
    let peak = golden_max(|t| packet.density(x_out, t), lo, hi, 1e-9);
    Ok(ArrivalTrace {
        times,
        density,
        peak_time: peak.x,
        peak_density: peak.value,
    })
}

/// Expectation values of the Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinVector {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl SpinVector {
    /// Length of the Bloch vector.
    pub fn magnitude(&self) -> f64 {
        (self.sx * self.sx + self.sy * self.sy + self.sz * self.sz).sqrt()
    }

    /// Azimuth about `z`.
    pub fn azimuth(&self) -> f64 {
        self.sy.atan2(self.sx)
    }

    fn from_spinor([u, d]: [C64; 2]) -> Self {
        let n = u.norm_sqr() + d.norm_sqr();
        let cross = u.conj() * d;
        SpinVector {
            sx: 2.0 * cross.re / n,
            sy: 2.0 * cross.im / n,
            sz: (u.norm_sqr() - d.norm_sqr()) / n,
        }
    }
}

/// Normalized spin expectations at `(x_out, t)`.
pub fn spin_expectations(cfg: &BarrierConfig, x_out: f64, t: f64) -> Result<SpinVector> {
    Ok(SpinVector::from_spinor(wavepacket(cfg, x_out, t)?))
}

/// Spin expectations of the density-weighted mixture over a set of times.
pub fn mixed_spin(cfg: &BarrierConfig, x_out: f64, times: &[f64]) -> Result<SpinVector> {
    let series = Wavepacket::new(cfg)?.time_series(x_out, times);
    let (mut uu, mut dd, mut ud) = (0.0, 0.0, c64(0.0, 0.0));
    for [u, d] in series {
        uu += u.norm_sqr();
        dd += d.norm_sqr();
        ud += u.conj() * d;
    }
    let n = uu + dd;
    Ok(SpinVector {
        sx: 2.0 * ud.re / n,
        sy: 2.0 * ud.im / n,
        sz: (uu - dd) / n,
    })
}

/// Space-clock versus spin-clock comparison at one detector position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockComparison {
    /// Crossing time `L / v_bar` with `v_bar = (q_up + q_down) / 2` at `k0`.
    pub t_b: f64,
    /// Precession `2 B_z t_B` expected from the space clock.
    pub expected_phi: f64,
    /// Range of measured azimuths over the arrival peak.
    pub measured_phi_range: (f64, f64),
    /// Whether `expected_phi` lies in the measured range.
    pub consistent: bool,
    /// Arrival peak time.
    pub peak_time: f64,
    /// Times bounding the contiguous half-maximum region of the peak.
    pub window: (f64, f64),
}

/// Compares the precession expected from the crossing time with the
/// azimuths measured where the arrival density is at least half its peak.
pub fn clock_comparison(cfg: &BarrierConfig, x_out: f64) -> Result<ClockComparison> {
    let k0_sq = cfg.k0 * cfg.k0;
    if !(k0_sq > 2.0 * cfg.b_z) {
        return Err(Error::EvanescentRegime {
            k0_sq,
            two_b: 2.0 * cfg.b_z,
        });
    }
    let v_bar = 0.5 * ((k0_sq - 2.0 * cfg.b_z).sqrt() + (k0_sq + 2.0 * cfg.b_z).sqrt());
    let t_b = cfg.l / v_bar;
    let expected_phi = 2.0 * cfg.b_z * t_b;
    let trace = arrival_distribution(cfg, x_out)?;
    let best = (0..trace.density.len())
        .max_by(|&a, &b| trace.density[a].total_cmp(&trace.density[b]))
        .expect("non-empty grid");
    let half = 0.5 * trace.density[best];
    let mut lo = best;
    while lo > 0 && trace.density[lo - 1] >= half {
        lo -= 1;
    }
    let mut hi = best;
    while hi + 1 < trace.density.len() && trace.density[hi + 1] >= half {
        hi += 1;
    }
    let packet = Wavepacket::new(cfg)?;
    let phis: Vec<f64> = packet
        .time_series(x_out, &trace.times[lo..=hi])
        .into_iter()
        .map(|s| SpinVector::from_spinor(s).azimuth())
        .collect();
    let min = phis.iter().copied().fold(f64::INFINITY, f64::min);
    let max = phis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12;
    Ok(ClockComparison {
        t_b,
        expected_phi,
        measured_phi_range: (min, max),
        consistent: expected_phi >= min - slack && expected_phi <= max + slack,
        peak_time: trace.peak_time,
        window: (trace.times[lo], trace.times[hi]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn packet_setup(w: f64, b: f64) -> BarrierConfig {
        BarrierConfig::new().width(w).field(b)
    }

    #[test]
    fn no_field_means_no_barrier() {
        let m = mode_coefficients(0.7, 0.0, 10.0).unwrap();
        for s in [m.up, m.down] {
            assert!(s.r.norm() < 1e-14);
            assert!((s.t_prime.norm() - 1.0).abs() < 1e-14);
            assert!((s.q - c64(0.7, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn internal_wave_number() {
        let m = mode_coefficients(1.0, 0.375, 10.0).unwrap();
        assert!((m.up.q - c64(0.5, 0.0)).norm() < 1e-15);
        assert!((m.down.q - c64(1.75f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn flux_and_continuity_across_spectrum() {
        let cfg = packet_setup(2.0, 0.05);
        for i in 1..=600 {
            let k = 3.0 * cfg.k0 * i as f64 / 600.0;
            let m = mode_coefficients(k, cfg.b_z, cfg.l).unwrap();
            for s in [m.up, m.down] {
                assert!(s.flux_defect().abs() < 1e-10, "k = {k}");
                assert!(s.continuity_defect(k, cfg.l) < 1e-10, "k = {k}");
            }
        }
    }

    #[test]
    fn evanescent_component_conserves_flux() {
        let m = mode_coefficients(0.2, 0.05, 10.0).unwrap();
        assert!(m.up.q.re.abs() < 1e-15 && m.up.q.im > 0.0);
        assert!(m.up.flux_defect().abs() < 1e-10);
        assert!(m.up.t_prime.norm() < 0.5);
    }

    #[test]
    fn rejects_non_positive_k() {
        assert!(mode_coefficients(0.0, 0.1, 10.0).is_err());
    }

    #[test]
    fn initial_peak_at_x0() {
        let cfg = packet_setup(2.0, 0.0);
        let p = Wavepacket::new(&cfg).unwrap();
        let at = p.density(cfg.x0, 0.0);
        for i in 0..200 {
            let x = -20.0 + 0.2 * i as f64;
            assert!(p.density(x, 0.0) <= at + 1e-12);
        }
    }

    #[test]
    fn free_packet_moves_at_group_velocity() {
        let cfg = packet_setup(2.0, 0.0);
        let p = Wavepacket::new(&cfg).unwrap();
        let times = [0.0, 4.0, 8.0, 12.0, 16.0];
        let centers: Vec<f64> = times
            .iter()
            .map(|&t| golden_max(|x| p.density(x, t), cfg.x0 - 5.0, cfg.x0 + 20.0, 1e-9).x)
            .collect();
        let n = times.len() as f64;
        let mt = times.iter().sum::<f64>() / n;
        let mx = centers.iter().sum::<f64>() / n;
        let slope = times.iter().zip(&centers).map(|(t, x)| (t - mt) * (x - mx)).sum::<f64>()
            / times.iter().map(|t| (t - mt).powi(2)).sum::<f64>();
        assert!((slope / cfg.k0 - 1.0).abs() < 0.02, "slope {slope}");
    }

    fn box_norm(p: &Wavepacket, t: f64) -> f64 {
        let xs = linspace(-20.0, 20.0, 4001);
        let h = xs[1] - xs[0];
        let f: Vec<f64> = xs.iter().map(|&x| p.density(x, t)).collect();
        h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[f.len() - 1]))
    }

    #[test]
    fn box_norm_is_conserved_without_field() {
        let p = Wavepacket::new(&packet_setup(2.0, 0.0)).unwrap();
        let n0 = box_norm(&p, 0.0);
        for t in [5.0, 10.0, 20.0, 30.0] {
            assert!(((box_norm(&p, t) - n0) / n0).abs() < 1e-6);
        }
    }

    #[test]
    fn box_norm_drift_with_field_is_small() {
        // Left-incident scattering states are not orthogonal on a finite
        // box once the field is on, so the norm drifts slightly.
        let p = Wavepacket::new(&packet_setup(2.0, 0.05)).unwrap();
        let n0 = box_norm(&p, 0.0);
        for t in [5.0, 10.0, 20.0, 30.0] {
            assert!(((box_norm(&p, t) - n0) / n0).abs() < 1e-2);
        }
    }

    #[test]
    fn spin_starts_along_x() {
        // The packet must sit far from the field region and its momentum
        // spread must stay clear of the low-k modes, whose two spin
        // components scatter very differently.
        let cfg = BarrierConfig {
            big_l: 600.0,
            x0: -100.0,
            n_modes: 1025,
            ..packet_setup(8.0, 0.05)
        };
        let s = spin_expectations(&cfg, cfg.x0, 0.0).unwrap();
        assert!((s.sx - 1.0).abs() < 1e-6 && s.sy.abs() < 1e-6 && s.sz.abs() < 1e-6, "{s:?}");
    }

    #[test]
    fn no_field_no_torque() {
        let cfg = packet_setup(2.0, 0.0);
        for &(x, t) in &[(16.0, 20.0), (5.0, 10.0), (-3.0, 2.0)] {
            let s = spin_expectations(&cfg, x, t).unwrap();
            assert!((s.sx - 1.0).abs() < 1e-10 && s.sy.abs() < 1e-10 && s.sz.abs() < 1e-10);
        }
    }

    #[test]
    fn mixture_over_window_is_not_pure() {
        let cfg = packet_setup(2.0, 0.05);
        let c = clock_comparison(&cfg, 16.0).unwrap();
        let times = linspace(c.window.0, c.window.1, 200);
        let s = mixed_spin(&cfg, 16.0, &times).unwrap();
        assert!(s.magnitude() < 1.0 - 1e-3 && s.magnitude() <= 1.0 + 1e-10);
    }

    #[test]
    fn ballistic_arrival_without_field() {
        let cfg = packet_setup(2.0, 0.0);
        let tr = arrival_distribution(&cfg, 16.0).unwrap();
        let ballistic = (16.0 - cfg.x0) / cfg.k0;
        assert!((tr.peak_time / ballistic - 1.0).abs() < 0.15, "{}", tr.peak_time);
    }

    #[test]
    fn clocks_agree_for_both_parameter_sets() {
        for &(w, b, x) in &[(2.0, 0.05, 16.0), (3.0, 0.02, 19.0)] {
            let c = clock_comparison(&packet_setup(w, b), x).unwrap();
            assert!(c.consistent, "{c:?}");
        }
    }

    #[test]
    fn zero_field_clock_limit() {
        let c = clock_comparison(&packet_setup(2.0, 0.0), 16.0).unwrap();
        assert_eq!(c.expected_phi, 0.0);
        assert!(c.measured_phi_range.1 - c.measured_phi_range.0 < 1e-10);
        assert!(c.consistent);
    }

    #[test]
    fn evanescent_central_momentum_is_rejected() {
        let cfg = packet_setup(2.0, 0.5);
        assert!(matches!(clock_comparison(&cfg, 16.0), Err(Error::EvanescentRegime { .. })));
    }

    #[test]
    fn mode_count_converged() {
        let cfg = packet_setup(2.0, 0.05);
        let a = wavepacket(&cfg, 16.0, 25.0).unwrap();
        let b = wavepacket(&cfg.modes(513), 16.0, 25.0).unwrap();
        assert!((a[0] - b[0]).norm() + (a[1] - b[1]).norm() < 1e-8);
    }
}
