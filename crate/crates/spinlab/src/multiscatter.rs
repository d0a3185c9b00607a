//! Many neutrons scattered in sequence off the same sample.
//!
//! With the sample prepared with one flipped spin (initial `A`) and every
//! neutron polarized up, the excitation hops from the sample onto the
//! neutrons one scattering at a time. The state after `k` scatterings lives
//! on `k + 1` sites: the sample and neutrons `1..=k`, indexed by arrival
//! order. Each scattering multiplies the sample amplitude by `P` and hands a
//! fraction `Q` of it to the neutron that just crossed, so any neutron pair
//! `(m, n)` ends up in a single-excitation mixed state whose concurrence is
//! `2 |Q|^2 |P|^(m + n - 2)`.
//!
//! With a fully polarized sample (initial `B`) the neutrons arrive in the
//! product state `alpha |0> + beta |1>` and the number of excitations grows
//! with every scattering, so no such pattern exists. That case is handled by
//! [`multi_flip_state`], a direct propagation over `2^k` neutron
//! configurations times the symmetric sample levels it can reach.

use crate::entmeas::concurrence;
use crate::error::{Error, Result};
use crate::optimize::linspace;
use crate::qcore::{c64, phase, re, CMatrix, CVector, DensityMatrix, C64};
use crate::scatter::{derived_params, diagonal, require_a, Initial, ScatterConfig};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Largest number of neutrons [`multi_flip_state`] will propagate.
pub const MAX_ORACLE_NEUTRONS: usize = 12;

/// Coefficients of one scattering event for initial `A`.
///
/// `p` is the amplitude left on the sample, `q` the amplitude handed to the
/// scattering neutron and `s` the phase rate of a configuration whose flip
/// sits on a neutron that is not currently interacting. `r` is the
/// alternative closed form quoted for the second-neutron amplitude; it
/// coincides with `q * p` only where `|c| = |d|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PQRCoefficients {
    pub p: C64,
    pub q: C64,
    pub r: C64,
    pub s: f64,
}

/// Scattering coefficients for `cfg`, in the frame that removes the lower
/// eigenvalue of the active single-excitation block.
pub fn pqr(cfg: &ScatterConfig) -> Result<PQRCoefficients> {
    require_a(cfg)?;
    cfg.validate()?;
    let dp = derived_params(cfg);
    let (c, d) = (dp.c, dp.d);
    let e2 = phase(2.0 * dp.phi * cfg.tau);
    let e4 = phase(4.0 * dp.phi * cfg.tau);
    Ok(PQRCoefficients {
        p: re(c * c) + re(d * d) * e2,
        q: re(c * d) * (re(1.0) - e2),
        r: re(c * c * c * d) * (re(1.0) - e4),
        s: dp.y,
    })
}

/// Single-excitation state after `k` scatterings of initial `A`.
///
/// `amplitudes[0]` belongs to the sample and `amplitudes[i]` to neutron `i`.
/// The phase frame removes the lower active-block eigenvalue during each
/// scattering and the sample's one-flip energy during free evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiState {
    pub k: usize,
    pub amplitudes: CVector,
}

impl MultiState {
    /// Euclidean norm of the amplitudes.
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Two-neutron reduction with factor order `(m, n)`.
    pub fn pair_reduction(&self, m: usize, n: usize) -> Result<DensityMatrix> {
        check_pair(m, n, self.k)?;
        let (am, an) = (self.amplitudes[m], self.amplitudes[n]);
        let mut rho = CMatrix::zeros(4, 4);
        rho[(0, 0)] = re(1.0 - am.norm_sqr() - an.norm_sqr());
        rho[(1, 1)] = re(an.norm_sqr());
        rho[(2, 2)] = re(am.norm_sqr());
        rho[(2, 1)] = am * an.conj();
        rho[(1, 2)] = an * am.conj();
        DensityMatrix::new(rho, vec![2, 2])
    }

    /// The state written on `k + 1` qubits: neutron `k` is the leftmost
    /// factor, neutron 1 the second to last and the sample the last.
    pub fn to_register(&self) -> CVector {
        let mut v = CVector::zeros(1 << (self.k + 1));
        v[1] = self.amplitudes[0];
        for i in 1..=self.k {
            v[1 << i] = self.amplitudes[i];
        }
        v
    }
}

fn check_pair(m: usize, n: usize, k: usize) -> Result<()> {
    if m < 1 || m >= n || n > k {
        return Err(Error::IndexOutOfRange(format!(
            "pair ({m}, {n}) needs 1 <= m < n <= {k}"
        )));
    }
    Ok(())
}

/// `exp(-i H t)` for the real symmetric block `[[a, v], [v, b]]`.
fn two_level_propagator(a: f64, b: f64, v: f64, t: f64) -> [[C64; 2]; 2] {
    let mean = 0.5 * (a + b);
    let delta = 0.5 * (a - b);
    let omega = delta.hypot(v);
    let (sn, cs) = (omega * t).sin_cos();
    let g = phase(mean * t);
    let (sd, sv) = if omega > 0.0 {
        (sn * delta / omega, sn * v / omega)
    } else {
        (0.0, 0.0)
    };
    [
        [g * c64(cs, -sd), g * c64(0.0, -sv)],
        [g * c64(0.0, -sv), g * c64(cs, sd)],
    ]
}

fn coupling(cfg: &ScatterConfig, level: usize) -> f64 {
    let n = cfg.n as f64;
    let l = level as f64;
    2.0 * cfg.lambda / n * (l * (n - l + 1.0)).sqrt()
}

/// Propagates initial `A` through `k` scatterings, with free evolution for
/// `tau_f_prime` between consecutive ones.
pub fn state_after_k(cfg: &ScatterConfig, k: usize) -> Result<MultiState> {
    require_a(cfg)?;
    cfg.validate()?;
    if k < 1 {
        return Err(Error::IndexOutOfRange("k must be at least 1".into()));
    }
    let a = diagonal(cfg, 0, 1);
    let b = diagonal(cfg, 1, 0);
    let v = coupling(cfg, 1);
    let lower = 0.5 * (a + b) - (0.5 * (a - b)).hypot(v);
    let u = two_level_propagator(a - lower, b - lower, v, cfg.tau);
    let idle = phase((diagonal(cfg, 0, 0) - lower) * cfg.tau);
    let free = phase(2.0 * cfg.b_z * cfg.tau_f_prime);
    let mut amps = CVector::zeros(k + 1);
    amps[0] = re(1.0);
    for i in 1..=k {
        if i > 1 {
            for x in amps.iter_mut().skip(1) {
                *x *= free;
            }
        }
        for x in amps.iter_mut().skip(1).take(i - 1) {
            *x *= idle;
        }
        let s = amps[0];
        amps[0] = u[0][0] * s;
        amps[i] = u[1][0] * s;
    }
    Ok(MultiState { k, amplitudes: amps })
}

/// Amplitudes predicted by the recursive pattern: `P^k` on the sample and
/// `Q P^(i-1)` on neutron `i`, times the phase `exp(-i (k - i) (s tau + 2 B tau_f'))`.
pub fn pattern_amplitudes(cfg: &ScatterConfig, k: usize) -> Result<CVector> {
    let c = pqr(cfg)?;
    let step = c.s * cfg.tau + 2.0 * cfg.b_z * cfg.tau_f_prime;
    let mut v = CVector::zeros(k + 1);
    v[0] = c.p.powu(k as u32);
    for i in 1..=k {
        v[i] = c.q * c.p.powu(i as u32 - 1) * phase((k - i) as f64 * step);
    }
    Ok(v)
}

/// Closed-form concurrence of neutrons `m < n` for initial `A`:
/// `2 |Q|^2 |P|^(m + n - 2)`.
pub fn pair_concurrence(cfg: &ScatterConfig, m: usize, n: usize) -> Result<f64> {
    check_pair(m, n, usize::MAX)?;
    let c = pqr(cfg)?;
    Ok(2.0 * c.q.norm_sqr() * c.p.norm().powi((m + n - 2) as i32))
}

/// Zero-field pair concurrence,
/// `8 N (N+1)^(-zeta) sin^2(theta) (N^2 + 1 + 2 N cos 2 theta)^((zeta - 2)/2)`
/// with `theta = (1 + 1/N) lambda tau` and `zeta = m + n`.
pub fn pair_concurrence_zero_field(n_spins: usize, lambda: f64, tau: f64, m: usize, n: usize) -> f64 {
    let nf = n_spins as f64;
    let zeta = (m + n) as f64;
    let th = (1.0 + 1.0 / nf) * lambda * tau;
    let base = (nf * nf + 1.0 + 2.0 * nf * (2.0 * th).cos()).max(0.0);
    8.0 * nf * (nf + 1.0).powf(-zeta) * th.sin().powi(2) * base.powf(0.5 * (zeta - 2.0))
}

/// Pair concurrence at the optimal field, `2 sin^2(u) |cos u|^(m + n - 2)`
/// with `u = 2 lambda tau / sqrt N`.
pub fn pair_concurrence_optimal_field(n_spins: usize, lambda: f64, tau: f64, m: usize, n: usize) -> f64 {
    let u = 2.0 * lambda * tau / (n_spins as f64).sqrt();
    2.0 * u.sin().powi(2) * u.cos().abs().powi((m + n - 2) as i32)
}

/// Largest pair concurrence reachable in the double-peak regime,
/// `4 sqrt((zeta - 2)^(zeta - 2) / zeta^zeta)`.
pub fn peak_inside(zeta: usize) -> f64 {
    let z = zeta as f64;
    4.0 * (0.5 * ((z - 2.0) * (z - 2.0).ln() - z * z.ln())).exp()
}

/// Zero-field pair peak at `T_phi / 2` in the single-peak regime,
/// `8 N (N - 1)^(zeta - 2) / (N + 1)^zeta`.
pub fn zero_field_peak_single(n_spins: usize, zeta: usize) -> f64 {
    let nf = n_spins as f64;
    let z = zeta as f64;
    8.0 * nf * (nf - 1.0).powf(z - 2.0) / (nf + 1.0).powf(z)
}

/// Interaction time of the pair peak at the optimal field,
/// `(sqrt N / 4 lambda) acos((zeta - 4) / zeta)`.
pub fn optimal_field_tau(n_spins: usize, lambda: f64, zeta: usize) -> f64 {
    let z = zeta as f64;
    (n_spins as f64).sqrt() / (4.0 * lambda) * ((z - 4.0) / z).acos()
}

/// Zero-field time of the first pair peak in the double-peak regime:
/// `cos(2 theta) = (N (zeta - 2) - N^2 - 1) / (N zeta)` with
/// `theta = (1 + 1/N) lambda tau`. `None` in the single-peak regime.
pub fn tau0_zero_field(n_spins: usize, lambda: f64, zeta: usize) -> Option<f64> {
    let nf = n_spins as f64;
    let z = zeta as f64;
    let u = (nf * (z - 2.0) - nf * nf - 1.0) / (nf * z);
    (u >= -1.0).then(|| nf / (2.0 * lambda * (nf + 1.0)) * u.acos())
}

/// The arcsecant expression for the same time as it is usually quoted,
/// `(N / (2 lambda (N + 1))) asec(N zeta / (1 + N^2 - N (zeta - 2)))`.
/// It returns `T_phi / 2 - tau0`, the mirror image of the true peak.
pub fn tau0_zero_field_asec(n_spins: usize, lambda: f64, zeta: usize) -> Option<f64> {
    let nf = n_spins as f64;
    let z = zeta as f64;
    let x = nf * z / (1.0 + nf * nf - nf * (z - 2.0));
    (x.abs() >= 1.0).then(|| nf / (2.0 * lambda * (nf + 1.0)) * (1.0 / x).acos())
}

/// Shape of the pair concurrence over one period in `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakRegime {
    /// A single maximum at `T_phi / 2`.
    SinglePeak,
    /// Two symmetric maxima either side of `T_phi / 2`.
    DoublePeak,
}

/// Peak structure of the pair `(m, n)` at one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaLandmarks {
    /// `m + n`.
    pub zeta: usize,
    /// Threshold separating the two regimes at this field.
    pub zeta_b: f64,
    pub regime: PeakRegime,
    /// Largest pair concurrence over `tau`.
    pub c_peak: f64,
    /// First interaction time at which `c_peak` is reached.
    pub tau_peak: f64,
    /// Lower edge of the field interval with double peaks for this `zeta`.
    pub b_minus: f64,
    /// Upper edge of that interval.
    pub b_plus: f64,
}

/// Regime, peak value and peak time of `C_{m,n}` for initial `A`.
pub fn zeta_landmarks(n_spins: usize, lambda: f64, b_z: f64, m: usize, n: usize) -> Result<ZetaLandmarks> {
    check_pair(m, n, usize::MAX)?;
    let cfg = ScatterConfig::new(n_spins).lambda(lambda).field(b_z);
    cfg.validate()?;
    let dp = derived_params(&cfg);
    let nf = n_spins as f64;
    let l = lambda;
    let zeta = m + n;
    let z = zeta as f64;
    let zeta_b = 1.0 + 1.0 / (2.0 * nf) + (2.0 * b_z + nf * (b_z - l).powi(2) / l) / (2.0 * l);
    let root = (2.0 * (z - 2.0) / nf).sqrt();
    let (c2, d2) = (dp.c * dp.c, dp.d * dp.d);
    let (regime, c_peak, tau_peak) = if z < zeta_b {
        let c = 8.0 * c2 * d2 * (c2 - d2).abs().powf(z - 2.0);
        (PeakRegime::SinglePeak, c, PI / (2.0 * dp.phi))
    } else {
        let v2 = dp.varphi * dp.varphi;
        let cross = 4.0 * nf * l * l * v2;
        let a = 16.0 * l.powi(4) + nf * nf * v2 * v2;
        let u = (-(a - cross * (z - 2.0)) / (cross * z)).clamp(-1.0, 1.0);
        (PeakRegime::DoublePeak, peak_inside(zeta), u.acos() / (2.0 * dp.phi))
    };
    Ok(ZetaLandmarks {
        zeta,
        zeta_b,
        regime,
        c_peak,
        tau_peak,
        b_minus: l * (1.0 - 1.0 / nf - root),
        b_plus: l * (1.0 - 1.0 / nf + root),
    })
}

/// Neutrons and sample after `k` scatterings, for either initial state.
///
/// Amplitudes are stored as `amps[config * levels + level]`: bit `j - 1` of
/// `config` is set when neutron `j` is down, and `level` counts flipped
/// sample spins in the symmetric sector.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiFlipState {
    pub k: usize,
    pub levels: usize,
    pub amps: Vec<C64>,
}

impl MultiFlipState {
    /// Two-neutron reduction with factor order `(m, n)`.
    pub fn pair_reduction(&self, m: usize, n: usize) -> Result<DensityMatrix> {
        check_pair(m, n, self.k)?;
        let (bm, bn) = (1usize << (m - 1), 1usize << (n - 1));
        let mut rho = CMatrix::zeros(4, 4);
        for rest in (0..1usize << self.k).filter(|c| c & (bm | bn) == 0) {
            let configs = [rest, rest | bn, rest | bm, rest | bm | bn];
            for level in 0..self.levels {
                let v: [C64; 4] = configs.map(|c| self.amps[c * self.levels + level]);
                for a in 0..4 {
                    for b in 0..4 {
                        rho[(a, b)] += v[a] * v[b].conj();
                    }
                }
            }
        }
        DensityMatrix::new(rho, vec![2, 2])
    }

    /// Euclidean norm of the amplitudes.
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Sequential propagation of `k` neutrons through the sample, for either
/// initial state. Each scattering couples `(neutron j down, level l - 1)`
/// to `(neutron j up, level l)` in closed 2x2 blocks; the sample evolves
/// freely for `tau_f_prime` between scatterings.
pub fn multi_flip_state(cfg: &ScatterConfig, k: usize) -> Result<MultiFlipState> {
    cfg.validate()?;
    if k > MAX_ORACLE_NEUTRONS {
        return Err(Error::TooLarge(format!(
            "{k} neutrons exceed the limit of {MAX_ORACLE_NEUTRONS}"
        )));
    }
    if k < 1 {
        return Err(Error::IndexOutOfRange("k must be at least 1".into()));
    }
    let excitations = match cfg.initial {
        Initial::A => 1,
        Initial::B => k,
    };
    let levels = excitations.min(cfg.n) + 1;
    let mut amps = vec![c64(0.0, 0.0); (1 << k) * levels];
    match cfg.initial {
        Initial::A => amps[1] = re(1.0),
        Initial::B => {
            for (config, chunk) in amps.chunks_mut(levels).enumerate() {
                let down = config.count_ones() as i32;
                chunk[0] = cfg.alpha.powi(k as i32 - down) * cfg.beta.powi(down);
            }
        }
    }
    let free: Vec<C64> = (0..levels)
        .map(|l| phase(cfg.b_z * (cfg.n as f64 - 2.0 * l as f64) * cfg.tau_f_prime))
        .collect();
    let blocks: Vec<[[C64; 2]; 2]> = (1..levels)
        .map(|l| {
            two_level_propagator(
                diagonal(cfg, 0, l),
                diagonal(cfg, 1, l - 1),
                coupling(cfg, l),
                cfg.tau,
            )
        })
        .collect();
    let up_ground = phase(diagonal(cfg, 0, 0) * cfg.tau);
    let down_top = phase(diagonal(cfg, 1, levels - 1) * cfg.tau);
    for j in 0..k {
        if j > 0 {
            for chunk in amps.chunks_mut(levels) {
                for (a, f) in chunk.iter_mut().zip(&free) {
                    *a *= f;
                }
            }
        }
        let bit = 1usize << j;
        for up in (0..1usize << k).filter(|c| c & bit == 0) {
            let (iu, id) = (up * levels, (up | bit) * levels);
            amps[iu] *= up_ground;
            amps[id + levels - 1] *= down_top;
            for l in 1..levels {
                let u = &blocks[l - 1];
                let (x, y) = (amps[iu + l], amps[id + l - 1]);
                amps[iu + l] = u[0][0] * x + u[0][1] * y;
                amps[id + l - 1] = u[1][0] * x + u[1][1] * y;
            }
        }
    }
    Ok(MultiFlipState { k, levels, amps })
}

/// Concurrence of neutrons `m < n` after `k` scatterings of initial `B`.
pub fn polarized_oracle(cfg: &ScatterConfig, k: usize, m: usize, n: usize) -> Result<f64> {
    if cfg.initial != Initial::B {
        return Err(Error::WrongInitialState { required: "B" });
    }
    check_pair(m, n, k)?;
    concurrence(&multi_flip_state(cfg, k)?.pair_reduction(m, n)?)
}

/// Pair concurrences `C_{m,n}` for all `1 <= m < n <= k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairConcurrenceTable {
    pub entries: BTreeMap<(usize, usize), f64>,
    pub config: ScatterConfig,
    pub k: usize,
}

impl PairConcurrenceTable {
    /// `C_{m,n}`, with the arguments in either order.
    pub fn get(&self, m: usize, n: usize) -> Option<f64> {
        self.entries.get(&(m.min(n), m.max(n))).copied()
    }

    /// Mean over all stored pairs.
    pub fn mean(&self) -> f64 {
        self.entries.values().sum::<f64>() / self.entries.len() as f64
    }
}

fn pairs(k: usize) -> Vec<(usize, usize)> {
    (1..=k)
        .flat_map(|m| (m + 1..=k).map(move |n| (m, n)))
        .collect()
}

/// Pair reductions for all pairs in `[1, k]`, closed form for initial `A`
/// and the multi-flip propagation for initial `B`.
fn pair_reductions(cfg: &ScatterConfig, k: usize) -> Result<Vec<((usize, usize), DensityMatrix)>> {
    match cfg.initial {
        Initial::A => {
            let st = state_after_k(cfg, k)?;
            pairs(k)
                .into_iter()
                .map(|(m, n)| Ok(((m, n), st.pair_reduction(m, n)?)))
                .collect()
        }
        Initial::B => {
            let st = multi_flip_state(cfg, k)?;
            pairs(k)
                .into_par_iter()
                .map(|(m, n)| Ok(((m, n), st.pair_reduction(m, n)?)))
                .collect()
        }
    }
}

/// Fills the concurrence table for every pair among the first `k` neutrons.
pub fn pair_table(cfg: &ScatterConfig, k: usize) -> Result<PairConcurrenceTable> {
    if k < 2 {
        return Err(Error::IndexOutOfRange("a table needs k >= 2".into()));
    }
    let entries = pair_reductions(cfg, k)?
        .into_par_iter()
        .map(|(key, rho)| Ok((key, concurrence(&rho)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(PairConcurrenceTable {
        entries,
        config: *cfg,
        k,
    })
}

/// Mean of the pair concurrences over all pairs in `[1, t]`.
pub fn average_pair_concurrence(cfg: &ScatterConfig, t: usize) -> Result<f64> {
    Ok(pair_table(cfg, t)?.mean())
}

/// Concurrence of the pair state averaged over all pairs in `[1, t]`.
pub fn average_state_concurrence(cfg: &ScatterConfig, t: usize) -> Result<f64> {
    if t < 2 {
        return Err(Error::IndexOutOfRange("an average needs t >= 2".into()));
    }
    let reductions = pair_reductions(cfg, t)?;
    let count = reductions.len() as f64;
    let sum = reductions
        .iter()
        .fold(CMatrix::zeros(4, 4), |acc, (_, rho)| acc + rho.matrix());
    concurrence(&DensityMatrix::new(sum / re(count), vec![2, 2])?)
}

/// Least-squares fit of `y = a / sqrt(x) + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseSqrtFit {
    pub a: f64,
    pub b: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// Fits `y = a / sqrt(x) + b` to the given samples.
pub fn fit_inverse_sqrt(xs: &[f64], ys: &[f64]) -> Result<InverseSqrtFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 || xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::WrongRegime("need two or more positive abscissae".into()));
    }
    let u: Vec<f64> = xs.iter().map(|x| 1.0 / x.sqrt()).collect();
    let n = u.len() as f64;
    let (mu, my) = (u.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let suu: f64 = u.iter().map(|v| (v - mu).powi(2)).sum();
    let suy: f64 = u.iter().zip(ys).map(|(v, y)| (v - mu) * (y - my)).sum();
    let a = suy / suu;
    let b = my - a * mu;
    let rms = (u.iter().zip(ys).map(|(v, y)| (a * v + b - y).powi(2)).sum::<f64>() / n).sqrt();
    Ok(InverseSqrtFit { a, b, rms })
}

/// Samples of `C_{m,n}` (closed form, initial `A`) on a uniform `tau` grid.
pub fn pair_concurrence_trace(
    cfg: &ScatterConfig,
    m: usize,
    n: usize,
    tau_max: f64,
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    linspace(0.0, tau_max, points)
        .into_iter()
        .map(|tau| Ok((tau, pair_concurrence(&cfg.tau(tau), m, n)?)))
        .collect()
}
