//! Quantum state transfer through spin chains and rings.
//!
//! Everything lives in the single-excitation sector: site `j` (1-based)
//! stands for the fully polarized chain with one flipped spin at `j`, so an
//! `N`-spin chain is an `N x N` Hamiltonian. A qubit encoded at the sender is
//! read out at the receiver with the Bloch-sphere averaged fidelity
//! `|f|/3 + |f|^2/6 + 1/2`, where `f(t) = <r| exp(-iHt) |s>`.
//!
//! Two couplings are supported. Heisenberg chains couple nearest neighbours
//! with exchange `J` (hopping `-J`, one unit of `J` per broken bond on the
//! diagonal). Dipolar chains couple every pair with `epsilon / r^3`, where
//! `r` is the separation in units of the lattice spacing; open chains carry
//! the site-dependent on-site energy measured from the polarized ground
//! state, rings use the minimum-image separation and a constant (omitted)
//! on-site energy. A uniform field `B` adds `2B` to every level.
//!
//! Long dipolar chains transfer through the beating of two nearly
//! degenerate states bound to the chain ends; [`bound_state_analysis`] and
//! [`two_level_model`] quantify that splitting.

use crate::error::{Error, Result};
use crate::optimize::{golden_max, maximize_1d};
use crate::qcore::{hermitian_eigendecomposition, phase, re, CMatrix, CVector, Eigen, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Boundary conditions of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Open chain with two ends.
    Open,
    /// Closed chain with periodic boundary conditions.
    Ring,
}

/// Spin-spin interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Nearest-neighbour exchange of strength `j`.
    Heisenberg { j: f64 },
    /// Long-range dipolar coupling with nearest-neighbour strength `epsilon`.
    Dipolar { epsilon: f64 },
}

/// A chain: geometry, site positions (units of the lattice spacing) and
/// coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub geometry: Geometry,
    pub positions: Vec<f64>,
    pub coupling: Coupling,
    /// Uniform field along the quantization axis.
    pub field: f64,
}

impl ChainSpec {
    /// Uniform chain of `n` sites at positions `0, 1, ..., n - 1`.
    pub fn uniform(geometry: Geometry, n: usize, coupling: Coupling) -> Result<Self> {
        Self::with_positions(geometry, (0..n).map(|j| j as f64).collect(), coupling)
    }

    /// Chain with explicit site positions.
    pub fn with_positions(geometry: Geometry, positions: Vec<f64>, coupling: Coupling) -> Result<Self> {
        let spec = ChainSpec {
            geometry,
            positions,
            coupling,
            field: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Uniform open Heisenberg chain.
    pub fn heisenberg_open(n: usize, j: f64) -> Result<Self> {
        Self::uniform(Geometry::Open, n, Coupling::Heisenberg { j })
    }

    /// Uniform Heisenberg ring.
    pub fn heisenberg_ring(n: usize, j: f64) -> Result<Self> {
        Self::uniform(Geometry::Ring, n, Coupling::Heisenberg { j })
    }

    /// Uniform open dipolar chain with unit coupling.
    pub fn dipolar_open(n: usize) -> Result<Self> {
        Self::uniform(Geometry::Open, n, Coupling::Dipolar { epsilon: 1.0 })
    }

    /// Uniform dipolar ring with unit coupling.
    pub fn dipolar_ring(n: usize) -> Result<Self> {
        Self::uniform(Geometry::Ring, n, Coupling::Dipolar { epsilon: 1.0 })
    }

    /// Sets the uniform field.
    pub fn with_field(mut self, field: f64) -> Self {
        self.field = field;
        self
    }

    /// Number of sites.
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Distance between the first and last site.
    pub fn span(&self) -> f64 {
        self.positions[self.n() - 1] - self.positions[0]
    }

    /// Common nearest-neighbour spacing, if the sites are evenly spaced.
    pub fn spacing(&self) -> Option<f64> {
        let gaps: Vec<f64> = self.positions.windows(2).map(|w| w[1] - w[0]).collect();
        let first = gaps[0];
        gaps.iter()
            .all(|g| (g - first).abs() <= 1e-12 * first.abs().max(1.0))
            .then_some(first)
    }

    /// True when reflecting the chain about its centre maps it onto itself.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.n();
        let (lo, hi) = (self.positions[0], self.positions[n - 1]);
        (0..n).all(|j| ((self.positions[j] - lo) - (hi - self.positions[n - 1 - j])).abs() <= 1e-12 * (hi - lo).max(1.0))
    }

    /// Checks the geometric invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n < 2 {
            return Err(Error::InvalidGeometry(format!("a chain needs at least 2 sites, got {n}")));
        }
        if self.positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGeometry("positions must be finite".into()));
        }
        if self.positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGeometry("positions must be strictly increasing".into()));
        }
        let strength = match self.coupling {
            Coupling::Heisenberg { j } => j,
            Coupling::Dipolar { epsilon } => epsilon,
        };
        if !strength.is_finite() || !self.field.is_finite() {
            return Err(Error::InvalidGeometry("coupling and field must be finite".into()));
        }
        if self.geometry == Geometry::Ring {
            if self.spacing().is_none() {
                return Err(Error::InvalidGeometry("a ring requires uniform spacing".into()));
            }
            if matches!(self.coupling, Coupling::Heisenberg { .. }) && n < 3 {
                return Err(Error::InvalidGeometry("a Heisenberg ring needs at least 3 sites".into()));
            }
        }
        Ok(())
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n() {
            return Err(Error::IndexOutOfRange(format!("site {site} outside 1..={}", self.n())));
        }
        Ok(())
    }
}

/// Energies and eigenmodes of a single-excitation Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub energies: Vec<f64>,
    /// Mode `m` is column `m`; row `j` is the amplitude on site `j + 1`.
    pub modes: CMatrix,
}

impl SpectralData {
    /// Largest `|H v - E v|` over all modes.
    pub fn max_residual(&self, h: &CMatrix) -> f64 {
        let hv = h * &self.modes;
        (0..self.energies.len())
            .map(|m| (hv.column(m) - self.modes.column(m) * re(self.energies[m])).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|V^dagger V - 1|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.energies.len();
        let g = self.modes.ad_mul(&self.modes);
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - re(target)).norm());
            }
        }
        worst
    }

    fn from_eigen(e: Eigen) -> Self {
        SpectralData {
            energies: e.values,
            modes: e.vectors,
        }
    }
}

/// Ground-state energy `-sum 1/r^3` over all pairs, in units of `epsilon`.
fn dipolar_ground(positions: &[f64]) -> f64 {
    let mut total = 0.0;
    for a in 0..positions.len() {
        for b in a + 1..positions.len() {
            total -= (positions[b] - positions[a]).abs().powi(-3);
        }
    }
    total
}

/// Open dipolar Hamiltonian for arbitrary (distinct) positions.
fn dipolar_open_matrix(positions: &[f64], epsilon: f64, field: f64) -> CMatrix {
    let n = positions.len();
    let ground = dipolar_ground(positions);
    let mut h = CMatrix::zeros(n, n);
    for a in 0..n {
        let mut onsite = ground;
        for b in 0..n {
            if a != b {
                let coupling = (positions[a] - positions[b]).abs().powi(-3);
                h[(a, b)] = re(epsilon * coupling);
                onsite += 2.0 * coupling;
            }
        }
        h[(a, a)] = re(epsilon * onsite + 2.0 * field);
    }
    h
}

/// Minimum-image separation of sites `a` and `b` on an `n`-site ring.
fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// Single-excitation Hamiltonian of the chain.
///
/// Heisenberg: hopping `-J` between neighbours and `J` per broken bond on
/// the diagonal (open chains; the ring diagonal is the constant `2J` per
/// site and is dropped). Dipolar open: `epsilon / r^3` off the diagonal and
/// the on-site energy relative to the polarized ground state. Dipolar ring:
/// minimum-image couplings with each unordered pair counted once.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<CMatrix> {
    spec.validate()?;
    let n = spec.n();
    let two_b = 2.0 * spec.field;
    let h = match (spec.geometry, spec.coupling) {
        (Geometry::Open, Coupling::Dipolar { epsilon }) => dipolar_open_matrix(&spec.positions, epsilon, spec.field),
        (Geometry::Open, Coupling::Heisenberg { j }) => {
            let mut h = CMatrix::zeros(n, n);
            for a in 0..n {
                let bonds = if n == 1 {
                    0.0
                } else if a == 0 || a == n - 1 {
                    1.0
                } else {
                    2.0
                };
                h[(a, a)] = re(two_b + j * bonds);
                if a + 1 < n {
                    h[(a, a + 1)] = re(-j);
                    h[(a + 1, a)] = re(-j);
                }
            }
            h
        }
        (Geometry::Ring, coupling) => {
            let spacing = spec.spacing().unwrap_or(1.0);
            let mut h = CMatrix::zeros(n, n);
            for a in 0..n {
                h[(a, a)] = re(two_b);
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let d = ring_distance(a, b, n);
                    h[(a, b)] = match coupling {
                        Coupling::Heisenberg { j } if d == 1 => re(-j),
                        Coupling::Heisenberg { .. } => re(0.0),
                        Coupling::Dipolar { epsilon } => re(epsilon / (d as f64 * spacing).powi(3)),
                    };
                }
            }
            h
        }
    };
    Ok(h)
}

/// Numerical diagonalization of [`build_hamiltonian`], energies ascending.
pub fn numeric_spectra(spec: &ChainSpec) -> Result<SpectralData> {
    Ok(SpectralData::from_eigen(hermitian_eigendecomposition(&build_hamiltonian(spec)?)?))
}

/// Energy of the fully polarized dipolar ring, in units of `epsilon`, with
/// each antipodal pair of an even ring counted once.
pub fn ring_ground_energy(n: usize) -> f64 {
    let nf = n as f64;
    if n.is_multiple_of(2) {
        -nf * (1..n / 2).map(|j| (j as f64).powi(-3)).sum::<f64>() - (2.0 / nf).powi(2)
    } else {
        -nf * (1..=(n - 1) / 2).map(|j| (j as f64).powi(-3)).sum::<f64>()
    }
}

/// Analytic spectrum of the chain.
///
/// Heisenberg open chains give cosine standing waves with
/// `E_m = 2B + 2J (1 - cos(pi (m - 1) / N))`, `m = 1..N`. Rings give Bloch
/// waves `exp(2 pi i n (j - 1) / N) / sqrt(N)`, `n = 0..N-1`, with
/// `E_n = 2B - 2J cos(2 pi n / N)` (Heisenberg) or
/// `E_n = 2B + 2 epsilon sum_{j=1}^{floor(N/2)} cos(2 pi n j / N) / j^3`
/// (dipolar). For even dipolar rings that sum weights the antipodal
/// coupling twice, so it differs from [`numeric_spectra`] by
/// `(-1)^n epsilon / (N/2)^3`. Energies are listed in label order.
pub fn closed_spectra(spec: &ChainSpec) -> Result<SpectralData> {
    spec.validate()?;
    let n = spec.n();
    let nf = n as f64;
    let two_b = 2.0 * spec.field;
    match (spec.geometry, spec.coupling) {
        (Geometry::Open, Coupling::Dipolar { .. }) => Err(Error::NoClosedForm("an open dipolar chain".into())),
        (Geometry::Open, Coupling::Heisenberg { j }) => {
            let mut modes = CMatrix::zeros(n, n);
            let mut energies = Vec::with_capacity(n);
            for m in 0..n {
                let a = if m == 0 { nf.recip().sqrt() } else { (2.0 / nf).sqrt() };
                for site in 0..n {
                    let arg = PI / (2.0 * nf) * m as f64 * (2 * site + 1) as f64;
                    modes[(site, m)] = re(a * arg.cos());
                }
                energies.push(two_b + 2.0 * j * (1.0 - (PI * m as f64 / nf).cos()));
            }
            Ok(SpectralData { energies, modes })
        }
        (Geometry::Ring, coupling) => {
            let spacing = spec.spacing().unwrap_or(1.0);
            let mut modes = CMatrix::zeros(n, n);
            let mut energies = Vec::with_capacity(n);
            for label in 0..n {
                let k = 2.0 * PI * label as f64 / nf;
                for site in 0..n {
                    modes[(site, label)] = phase(-k * site as f64) / re(nf.sqrt());
                }
                let e = match coupling {
                    Coupling::Heisenberg { j } => -2.0 * j * k.cos(),
                    Coupling::Dipolar { epsilon } => {
                        2.0 * epsilon
                            * (1..=n / 2)
                                .map(|d| (k * d as f64).cos() / (d as f64 * spacing).powi(3))
                                .sum::<f64>()
                    }
                };
                energies.push(two_b + e);
            }
            Ok(SpectralData { energies, modes })
        }
    }
}

/// Transfer amplitude `f(t) = sum_m w_m exp(-i E_m t)` between a sender and
/// a receiver vector, with `w_m = <r|m><m|s>`.
#[derive(Debug, Clone)]
pub struct TransferChannel {
    pub energies: Vec<f64>,
    pub weights: Vec<C64>,
}

impl TransferChannel {
    /// Channel between two normalized vectors under the given spectrum.
    pub fn from_vectors(spectrum: &SpectralData, sender: &CVector, receiver: &CVector) -> Self {
        let from_sender = spectrum.modes.ad_mul(sender);
        let from_receiver = spectrum.modes.ad_mul(receiver);
        let weights = from_sender
            .iter()
            .zip(from_receiver.iter())
            .map(|(ms, mr)| mr.conj() * ms)
            .collect();
        TransferChannel {
            energies: spectrum.energies.clone(),
            weights,
        }
    }

    /// Channel between sites `s` and `r` (1-based), optionally encoding the
    /// qubit over `encoded_k` sites at each end.
    ///
    /// With `k > 1` the sender occupies `k` consecutive sites starting at
    /// `s` and stepping towards `r`, the receiver `k` sites starting at `r`
    /// and stepping towards `s`. Both carry the same coefficients: the
    /// lowest eigenmode's amplitudes on the sender sites, renormalized.
    pub fn between(spec: &ChainSpec, s: usize, r: usize, encoded_k: Option<usize>) -> Result<Self> {
        spec.check_site(s)?;
        spec.check_site(r)?;
        let spectrum = numeric_spectra(spec)?;
        let n = spec.n();
        let k = encoded_k.unwrap_or(1);
        if k == 0 {
            return Err(Error::IndexOutOfRange("encoded_k must be at least 1".into()));
        }
        let towards = |from: usize, to: usize, i: usize| -> Option<usize> {
            if to >= from {
                from.checked_add(i).filter(|&x| x <= n)
            } else {
                from.checked_sub(i).filter(|&x| x >= 1)
            }
        };
        let mut sender = CVector::zeros(n);
        let mut receiver = CVector::zeros(n);
        let mut coeffs = Vec::with_capacity(k);
        for i in 0..k {
            let (Some(ss), Some(rr)) = (towards(s, r, i), towards(r, s, i)) else {
                return Err(Error::IndexOutOfRange(format!("encoding over {k} sites leaves the chain")));
            };
            let c = if k == 1 { re(1.0) } else { spectrum.modes[(ss - 1, 0)] };
            coeffs.push((ss, rr, c));
        }
        let norm = coeffs.iter().map(|(_, _, c)| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("the reference mode vanishes on the sender sites".into()));
        }
        for (ss, rr, c) in coeffs {
            sender[ss - 1] += c / re(norm);
            receiver[rr - 1] += c / re(norm);
        }
        Ok(Self::from_vectors(&spectrum, &sender, &receiver))
    }

    /// Channel between ring sites `s` and `r` built from the closed-form
    /// ring spectrum of [`closed_spectra`] instead of diagonalization.
    pub fn closed_ring(spec: &ChainSpec, s: usize, r: usize) -> Result<Self> {
        if spec.geometry != Geometry::Ring {
            return Err(Error::WrongGeometry("the closed-form channel needs a ring".into()));
        }
        spec.check_site(s)?;
        spec.check_site(r)?;
        let spectrum = closed_spectra(spec)?;
        let mut sender = CVector::zeros(spec.n());
        let mut receiver = CVector::zeros(spec.n());
        sender[s - 1] = re(1.0);
        receiver[r - 1] = re(1.0);
        Ok(Self::from_vectors(&spectrum, &sender, &receiver))
    }

    /// `f(t)`.
    pub fn amplitude(&self, t: f64) -> C64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| w * phase(e * t))
            .sum()
    }

    /// Shortest beat period `2 pi / max |E_i - E_j|`.
    pub fn fastest_beat(&self) -> f64 {
        let lo = self.energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            2.0 * PI / (hi - lo)
        } else {
            f64::INFINITY
        }
    }

    /// Index and value of the largest `|f|` on the grid `t0 + i dt`,
    /// `i = 0..steps`, using phase recurrences re-anchored every block.
    fn scan_block(&self, t0: f64, dt: f64, steps: usize) -> (usize, f64) {
        const RESYNC: usize = 2048;
        let step: Vec<C64> = self.energies.iter().map(|&e| phase(e * dt)).collect();
        let mut best = (0, f64::NEG_INFINITY);
        let mut i = 0;
        while i < steps {
            let t = t0 + i as f64 * dt;
            let mut terms: Vec<C64> = self
                .energies
                .iter()
                .zip(&self.weights)
                .map(|(&e, &w)| w * phase(e * t))
                .collect();
            let end = (i + RESYNC).min(steps);
            for idx in i..end {
                let value = terms.iter().sum::<C64>().norm();
                if value > best.1 {
                    best = (idx, value);
                }
                for (z, u) in terms.iter_mut().zip(&step) {
                    *z *= u;
                }
            }
            i = end;
        }
        best
    }

    /// Largest `|f|` on `[t_lo, t_hi]`: a grid with step at most
    /// `fastest_beat / 50`, then golden-section refinement of the best cell.
    pub fn max_abs(&self, t_lo: f64, t_hi: f64) -> (f64, f64) {
        let beat = self.fastest_beat();
        let span = t_hi - t_lo;
        if !beat.is_finite() || span <= 0.0 {
            return (t_lo, self.amplitude(t_lo).norm());
        }
        let steps = ((span / (beat / 50.0)).ceil() as usize).max(2);
        let dt = span / steps as f64;
        let total = steps + 1;
        let chunk = 1 << 16;
        let (best_idx, _) = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let start = c * chunk;
                let len = chunk.min(total - start);
                let (i, v) = self.scan_block(t_lo + start as f64 * dt, dt, len);
                (start + i, v)
            })
            .reduce(|| (0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
        let t_best = t_lo + best_idx as f64 * dt;
        let a = (t_best - dt).max(t_lo);
        let b = (t_best + dt).min(t_hi);
        let tol = 1e-8 * t_best.abs().max(1.0);
        let refined = golden_max(|t| self.amplitude(t).norm(), a, b, tol);
        let at_grid = self.amplitude(t_best).norm();
        if refined.value >= at_grid {
            (refined.x, refined.value)
        } else {
            (t_best, at_grid)
        }
    }
}

/// Bloch-sphere averaged fidelity for a transfer amplitude of modulus
/// `f_abs`.
pub fn average_fidelity(f_abs: f64) -> f64 {
    f_abs / 3.0 + f_abs * f_abs / 6.0 + 0.5
}

/// `<r| exp(-iHt) |s>` for sites `s` and `r` (1-based).
pub fn propagator(spec: &ChainSpec, s: usize, r: usize, t: f64) -> Result<C64> {
    Ok(TransferChannel::between(spec, s, r, None)?.amplitude(t))
}

/// Closed-form ring propagator `(1/N) sum_n exp(2 pi i n (r - s) / N)
/// exp(-i E_n t)` with the energies of [`closed_spectra`].
pub fn ring_propagator_closed(spec: &ChainSpec, s: usize, r: usize, t: f64) -> Result<C64> {
    if spec.geometry != Geometry::Ring {
        return Err(Error::WrongGeometry("the closed-form propagator needs a ring".into()));
    }
    spec.check_site(s)?;
    spec.check_site(r)?;
    let spectrum = closed_spectra(spec)?;
    let nf = spec.n() as f64;
    let shift = r as f64 - s as f64;
    let sum: C64 = spectrum
        .energies
        .iter()
        .enumerate()
        .map(|(label, &e)| phase(-2.0 * PI * label as f64 * shift / nf) * phase(e * t))
        .sum();
    Ok(sum / re(nf))
}

/// Sender and receiver of a ring transfer: site 1 and the site farthest
/// from it.
pub fn ring_transfer_sites(n: usize) -> (usize, usize) {
    (1, 1 + n / 2)
}

/// Fidelity sampled on a time grid.
#[derive(Debug, Clone)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub f_abs: Vec<f64>,
    /// Largest sampled fidelity.
    pub f_max: f64,
    /// Grid time of `f_max`.
    pub t_at_max: f64,
}

impl FidelityTrace {
    fn from_channel(channel: &TransferChannel, times: &[f64]) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::config("t_grid", "the time grid is empty"));
        }
        let f_abs: Vec<f64> = times.iter().map(|&t| channel.amplitude(t).norm()).collect();
        let fidelity: Vec<f64> = f_abs.iter().map(|&f| average_fidelity(f)).collect();
        let (i_max, f_max) = fidelity
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &f)| if f > acc.1 { (i, f) } else { acc });
        Ok(FidelityTrace {
            times: times.to_vec(),
            fidelity,
            f_abs,
            f_max,
            t_at_max: times[i_max],
        })
    }
}

/// Fidelity of transfer from `s` to `r` on the grid `t_grid`.
pub fn fidelity_trace(spec: &ChainSpec, s: usize, r: usize, t_grid: &[f64], encoded_k: Option<usize>) -> Result<FidelityTrace> {
    let channel = TransferChannel::between(spec, s, r, encoded_k)?;
    FidelityTrace::from_channel(&channel, t_grid)
}

/// Best fidelity reachable within a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxFidelity {
    pub f_max: f64,
    pub t_star: f64,
}

/// Maximum of the fidelity from `s` to `r` over `[0, t_cutoff]`.
pub fn max_fidelity(spec: &ChainSpec, s: usize, r: usize, t_cutoff: f64) -> Result<MaxFidelity> {
    if !(t_cutoff > 0.0) {
        return Err(Error::OutOfRange {
            value: t_cutoff,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    let (t_star, f_abs) = TransferChannel::between(spec, s, r, None)?.max_abs(0.0, t_cutoff);
    Ok(MaxFidelity {
        f_max: average_fidelity(f_abs),
        t_star,
    })
}

/// Time `(N - 1) / 2J` for the fastest spin wave to cross a uniform
/// Heisenberg chain.
pub fn heisenberg_crossing_time(n: usize, j: f64) -> f64 {
    (n as f64 - 1.0) / (2.0 * j)
}

/// Splitting of the two lowest levels of an open dipolar chain and the
/// transfer times it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundStates {
    /// `E_2 - E_1`.
    pub delta_lambda: f64,
    /// Beat period `2 pi / delta_lambda`.
    pub period: f64,
    /// First transfer time `pi / delta_lambda`.
    pub t0: f64,
    /// `t0 / L^3` with `L` the span of the chain.
    pub t0_star: f64,
}

/// Bound-state splitting of an open dipolar chain.
pub fn bound_state_analysis(spec: &ChainSpec) -> Result<BoundStates> {
    if spec.geometry != Geometry::Open || !matches!(spec.coupling, Coupling::Dipolar { .. }) {
        return Err(Error::WrongGeometry("bound states need an open dipolar chain".into()));
    }
    let spectrum = numeric_spectra(spec)?;
    let delta_lambda = spectrum.energies[1] - spectrum.energies[0];
    let t0 = PI / delta_lambda;
    Ok(BoundStates {
        delta_lambda,
        period: 2.0 * t0,
        t0,
        t0_star: t0 / spec.span().powi(3),
    })
}

/// Time and fidelity of the best end-to-end transfer within the first beat
/// period `2 pi / delta_lambda`.
pub fn first_peak(spec: &ChainSpec) -> Result<MaxFidelity> {
    let bound = bound_state_analysis(spec)?;
    let channel = TransferChannel::between(spec, 1, spec.n(), None)?;
    let (t_star, f_abs) = channel.max_abs(0.0, bound.period);
    Ok(MaxFidelity {
        f_max: average_fidelity(f_abs),
        t_star,
    })
}

/// Mirror-symmetric four-spin placement of least `t0*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourSpinOptimum {
    /// Outer gaps `r12 = r34` as a fraction of the span.
    pub r12: f64,
    /// Middle gap `r23` as a fraction of the span.
    pub r23: f64,
    pub t0_star: f64,
}

/// Positions `0, x, 1 - x, 1` of a unit-span symmetric four-spin chain.
pub fn symmetric_four(x: f64) -> Vec<f64> {
    vec![0.0, x, 1.0 - x, 1.0]
}

/// Minimizes `t0*` over symmetric four-spin placements.
pub fn optimize_four_spin() -> Result<FourSpinOptimum> {
    let objective = |x: f64| {
        ChainSpec::with_positions(Geometry::Open, symmetric_four(x), Coupling::Dipolar { epsilon: 1.0 })
            .and_then(|spec| bound_state_analysis(&spec))
            .map(|b| -b.t0_star)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let best = maximize_1d(objective, 0.05, 0.49, 441, 1e-10);
    if !best.value.is_finite() {
        return Err(Error::WrongRegime("no valid four-spin placement".into()));
    }
    Ok(FourSpinOptimum {
        r12: best.x,
        r23: 1.0 - 2.0 * best.x,
        t0_star: -best.value,
    })
}

/// Two-level description of the bound states of a long uniform chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelModel {
    /// Lowest-mode amplitudes of the leading `i x i` block.
    pub a_coeffs: Vec<f64>,
    /// `sum_{m,n} a_n a_m`.
    pub q: f64,
    /// `sum_{m,n} 3 a_n a_m (m + n - 2)`.
    pub r: f64,
}

impl TwoLevelModel {
    /// Predicted splitting `2 (Q / L^3 + R / L^4)` for a chain of span `l`
    /// (lattice and energy units set to one).
    pub fn predicted_splitting(&self, l: f64) -> f64 {
        2.0 * (self.q / l.powi(3) + self.r / l.powi(4))
    }

    /// Predicted `t0* = pi / (delta_lambda L^3)`.
    pub fn predicted_t0_star(&self, l: f64) -> f64 {
        PI / self.predicted_splitting(l).abs() / l.powi(3)
    }
}

/// Builds the two-level model from the leading `i x i` block of an
/// `n_sub`-spin uniform dipolar chain.
pub fn two_level_model(i: usize, n_sub: usize) -> Result<TwoLevelModel> {
    if i == 0 || 2 * i > n_sub {
        return Err(Error::InvalidPartition(format!("need 1 <= i <= n_sub / 2, got i = {i}, n_sub = {n_sub}")));
    }
    let full = build_hamiltonian(&ChainSpec::dipolar_open(n_sub)?)?;
    let block = full.view((0, 0), (i, i)).into_owned();
    let eig = hermitian_eigendecomposition(&block)?;
    let column = eig.vectors.column(0);
    let pivot = column.iter().cloned().fold(re(0.0), |acc, z| if z.norm() > acc.norm() { z } else { acc });
    let unphase = pivot.conj() / re(pivot.norm());
    let a_coeffs: Vec<f64> = column.iter().map(|z| (z * unphase).re).collect();
    let mut q = 0.0;
    let mut r = 0.0;
    for (m, am) in a_coeffs.iter().enumerate() {
        for (n, an) in a_coeffs.iter().enumerate() {
            q += an * am;
            r += 3.0 * an * am * (m + n) as f64;
        }
    }
    Ok(TwoLevelModel { a_coeffs, q, r })
}

/// Positions of an `n`-spin chain with `i` leading and `f` trailing unit
/// gaps and all remaining gaps equal to `delta`.
pub fn nonuniform_positions(n: usize, i: usize, f: usize, delta: f64) -> Result<Vec<f64>> {
    if n < 2 || i + f >= n {
        return Err(Error::InvalidPartition(format!("i + f = {} must be below n = {n}", i + f)));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidPartition(format!("delta = {delta} must be positive")));
    }
    let gaps = n - 1;
    let mut positions = Vec::with_capacity(n);
    let mut x = 0.0;
    positions.push(x);
    for g in 0..gaps {
        x += if g < i || g >= gaps - f { 1.0 } else { delta };
        positions.push(x);
    }
    Ok(positions)
}

/// Outcome of a robustness Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Robustness {
    pub failure_rate: f64,
    pub failures: usize,
    pub iterations: usize,
    /// Measurement time used for every sample.
    pub t0: f64,
}

/// Fraction of randomly displaced four-spin chains whose end-to-end
/// fidelity at the unperturbed transfer time falls below `threshold`.
///
/// The chain spans `l`; each spin moves by an independent uniform
/// displacement in `[-p l / 3, p l / 3]`. Iteration `i` draws from a
/// ChaCha8 stream seeded with `seed` on stream `i`, so the result does not
/// depend on scheduling.
pub fn robustness_mc(l: f64, p: f64, iterations: usize, threshold: f64, seed: u64) -> Result<Robustness> {
    if !(l > 0.0) {
        return Err(Error::OutOfRange {
            value: l,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { value: p, min: 0.0, max: 1.0 });
    }
    let t0_star = bound_state_analysis(&ChainSpec::dipolar_open(4)?)?.t0_star;
    let t0 = l.powi(3) * t0_star;
    let spread = p * l / 3.0;
    let base: Vec<f64> = (0..4).map(|j| l * j as f64 / 3.0).collect();
    let failures = (0..iterations)
        .into_par_iter()
        .map(|it| -> Result<bool> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(it as u64);
            let positions: Vec<f64> = base
                .iter()
                .map(|&x| if spread > 0.0 { x + rng.gen_range(-spread..=spread) } else { x })
                .collect();
            let h = dipolar_open_matrix(&positions, 1.0, 0.0);
            let eig = hermitian_eigendecomposition(&h)?;
            let mut s = CVector::zeros(4);
            s[0] = re(1.0);
            let f = eig.evolve(t0, &s)[3].norm();
            Ok(average_fidelity(f) < threshold)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&fail| fail)
        .count();
    Ok(Robustness {
        failure_rate: if iterations == 0 { 0.0 } else { failures as f64 / iterations as f64 },
        failures,
        iterations,
        t0,
    })
}

/// Least-squares slope of `ln t0` against `ln (N - 1)` for uniform open
/// dipolar chains with `N` in `n_range`.
pub fn transfer_time_exponent(n_range: std::ops::RangeInclusive<usize>) -> Result<f64> {
    let points = n_range
        .map(|n| Ok(((n as f64 - 1.0).ln(), bound_state_analysis(&ChainSpec::dipolar_open(n)?)?.t0.ln())))
        .collect::<Result<Vec<_>>>()?;
    let count = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / count;
    let my = points.iter().map(|p| p.1).sum::<f64>() / count;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
