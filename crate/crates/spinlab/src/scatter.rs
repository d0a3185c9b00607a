//! Two neutrons scattered in sequence off a spin sample at zero momentum
//! transfer.
//!
//! The sample enters only through its total spin, so with at most two spin
//! flips in play the dynamics close on an eight-dimensional basis labelled
//! `|1>..|8>`. Each label is a triple `(n2, n1, k)`: the flip state of the
//! second and first neutron (0 = up, 1 = down) and the number `k` of flipped
//! sample spins, held in the symmetric Dicke state of that excitation:
//!
//! | label | (n2, n1, k) | label | (n2, n1, k) |
//! |-------|-------------|-------|-------------|
//! | `|1>` | (0, 0, 0)   | `|5>` | (0, 1, 1)   |
//! | `|2>` | (0, 0, 1)   | `|6>` | (1, 0, 0)   |
//! | `|3>` | (0, 0, 2)   | `|7>` | (1, 0, 1)   |
//! | `|4>` | (0, 1, 0)   | `|8>` | (1, 1, 0)   |
//!
//! The protocol has four phases: the first neutron interacts for `tau`, the
//! sample evolves freely for `tau_f_prime`, the second neutron interacts for
//! `tau`, and both neutrons leave. Energies are in units where `hbar = 1`,
//! and any dimensionless prefactor of the dipolar coupling is absorbed into
//! `lambda`.

use crate::entmeas::concurrence;
use crate::error::{Error, Result};
use crate::qcore::{
    c64, hermitian_eigendecomposition, re, reduce_pure, CMatrix, CVector, DensityMatrix, Eigen,
    C64,
};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Form of the neutron-sample spin coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coupling {
    /// Heisenberg-like coupling `s . S`, with a diagonal `s_z S_z` part.
    Isotropic,
    /// Planar coupling `s_x S_x + s_y S_y` with no diagonal part.
    XY,
}

/// Sample preparation before the first neutron arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Initial {
    /// One magnon in the sample, both neutrons up: the state `|2>`.
    A,
    /// Fully polarized sample, each neutron in `alpha|0> + beta|1>`.
    B,
}

/// Knobs of the two-neutron protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterConfig {
    /// Number of sample spins, at least 2.
    pub n: usize,
    /// Neutron-sample coupling strength, positive.
    pub lambda: f64,
    /// Field on the sample along z (energy units), non-negative.
    pub b_z: f64,
    /// Interaction time of each neutron. For a neutron crossing a sample of
    /// thickness `D` at speed `v` this is the free-flight time `D / v`.
    pub tau: f64,
    /// Free evolution time between the two scattering events.
    pub tau_f_prime: f64,
    /// Amplitude of spin up in each neutron's initial state.
    pub alpha: C64,
    /// Amplitude of spin down in each neutron's initial state.
    pub beta: C64,
    /// Coupling form.
    pub coupling: Coupling,
    /// Sample preparation.
    pub initial: Initial,
}

impl ScatterConfig {
    /// Isotropic coupling, `lambda = 1`, zero field and times, initial `A`,
    /// neutrons polarized up.
    pub fn new(n: usize) -> Self {
        ScatterConfig {
            n,
            lambda: 1.0,
            b_z: 0.0,
            tau: 0.0,
            tau_f_prime: 0.0,
            alpha: re(1.0),
            beta: re(0.0),
            coupling: Coupling::Isotropic,
            initial: Initial::A,
        }
    }

    /// Sets `lambda`.
    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Sets the field.
    pub fn field(mut self, b_z: f64) -> Self {
        self.b_z = b_z;
        self
    }

    /// Sets the interaction time.
    pub fn tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    /// Sets the free evolution time between scatterings.
    pub fn tau_f_prime(mut self, tau_f_prime: f64) -> Self {
        self.tau_f_prime = tau_f_prime;
        self
    }

    /// Sets the neutron polarization amplitudes.
    pub fn polarization(mut self, alpha: C64, beta: C64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    /// Sets the coupling form.
    pub fn coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    /// Sets the sample preparation.
    pub fn initial(mut self, initial: Initial) -> Self {
        self.initial = initial;
        self
    }

    /// Checks the documented invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("n", "at least two sample spins are required"));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::config("lambda", "must be positive"));
        }
        if !(self.b_z >= 0.0) {
            return Err(Error::config("b_z", "must be non-negative"));
        }
        if !(self.tau >= 0.0) || !(self.tau_f_prime >= 0.0) {
            return Err(Error::config("tau", "times must be non-negative"));
        }
        let norm = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (norm - 1.0).abs() > crate::qcore::TOL.norm {
            return Err(Error::NotNormalized(norm));
        }
        Ok(())
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }
}

/// Flip configuration `(n2, n1, k)` of each Bloch label, in label order.
pub const BLOCH_LABELS: [(usize, usize, usize); 8] = [
    (0, 0, 0),
    (0, 0, 1),
    (0, 0, 2),
    (0, 1, 0),
    (0, 1, 1),
    (1, 0, 0),
    (1, 0, 1),
    (1, 1, 0),
];

fn bloch_index(n2: usize, n1: usize, k: usize) -> Option<usize> {
    BLOCH_LABELS.iter().position(|&l| l == (n2, n1, k))
}

/// Amplitudes over the Bloch basis `|1>..|8>`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochState {
    amps: CVector,
}

impl BlochState {
    /// Wraps eight amplitudes, checking normalization.
    pub fn new(amps: CVector) -> Result<Self> {
        if amps.len() != 8 {
            return Err(Error::DimensionMismatch {
                expected: 8,
                found: amps.len(),
            });
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > crate::qcore::TOL.norm {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(BlochState { amps })
    }

    /// The protocol's starting state for `cfg`.
    pub fn initial(cfg: &ScatterConfig) -> Self {
        let mut amps = CVector::zeros(8);
        match cfg.initial {
            Initial::A => amps[1] = re(1.0),
            Initial::B => {
                let (a, b) = (cfg.alpha, cfg.beta);
                amps[0] = a * a;
                amps[3] = a * b;
                amps[5] = a * b;
                amps[7] = b * b;
            }
        }
        BlochState { amps }
    }

    /// Amplitude of basis state `|label>`, `label` in `1..=8`.
    pub fn amplitude(&self, label: usize) -> C64 {
        self.amps[label - 1]
    }

    /// All eight amplitudes.
    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// Rotates the global phase so the first nonzero amplitude is real and
    /// positive.
    pub fn canonical_phase(mut self) -> Self {
        if let Some(z) = self.amps.iter().find(|z| z.norm() > 1e-14).copied() {
            let ph = z.conj() / z.norm();
            self.amps.iter_mut().for_each(|a| *a *= ph);
        }
        self
    }

    /// Embeds the state in the product space `neutron2 x neutron1 x sample`
    /// with the sample truncated to Dicke levels `k = 0, 1, 2`.
    fn product_amplitudes(&self) -> CVector {
        let mut v = CVector::zeros(12);
        for (i, &(n2, n1, k)) in BLOCH_LABELS.iter().enumerate() {
            v[(n2 * 2 + n1) * 3 + k] = self.amps[i];
        }
        v
    }

    /// Reduced state of the two neutrons, factors ordered
    /// `(second neutron, first neutron)`.
    pub fn neutron_reduction(&self) -> DensityMatrix {
        reduce_pure(&self.product_amplitudes(), &[2, 2, 3], &[0, 1]).expect("fixed dimensions")
    }

    /// Reduced state of the first neutron and the sample, with the sample
    /// restricted to its `k = 0, 1` levels and treated as a qubit. The
    /// result is renormalized over that subspace.
    pub fn first_neutron_sample_qubit(&self) -> Result<DensityMatrix> {
        let mut v = CVector::zeros(4);
        let mut outside = 0.0;
        for (i, &(n2, n1, k)) in BLOCH_LABELS.iter().enumerate() {
            if n2 == 0 && k < 2 {
                v[n1 * 2 + k] = self.amps[i];
            } else {
                outside += self.amps[i].norm_sqr();
            }
        }
        if outside > 1e-10 {
            return Err(Error::WrongRegime(format!(
                "weight {outside:e} outside the first-neutron/sample-qubit subspace"
            )));
        }
        let n = v.norm();
        DensityMatrix::from_pure(&(v / re(n)), vec![2, 2])
    }
}

/// Closed-form eigen-quantities of the effective Hamiltonian blocks.
///
/// `phi` is half the splitting of the `(|2>, |4>)` block and `(c, d)` are
/// its eigenvector components; `gamma` and `(f, g)` play the same role for
/// the `(|3>, |5>)` block. `big_lambda`, `x`, `y`, `w`, `z` are the phase
/// rates entering the protocol's state coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Half splitting of the single-excitation block.
    pub phi: f64,
    /// Auxiliary quantity of the isotropic single-excitation eigenvector
    /// (zero for the XY coupling).
    pub varphi: f64,
    /// `|2>` component of the single-excitation eigenvector.
    pub c: f64,
    /// `|4>` component of the single-excitation eigenvector.
    pub d: f64,
    /// Half splitting of the double-excitation block.
    pub gamma: f64,
    /// Auxiliary quantity of the isotropic double-excitation eigenvector
    /// (zero for the XY coupling).
    pub vartheta: f64,
    /// `|3>` component of the double-excitation eigenvector.
    pub f: f64,
    /// `|5>` component of the double-excitation eigenvector.
    pub g: f64,
    /// Reference energy of the state coefficients.
    pub big_lambda: f64,
    /// Phase rate `x`.
    pub x: f64,
    /// Phase rate `y`.
    pub y: f64,
    /// Phase rate `w`.
    pub w: f64,
    /// Phase rate `z`.
    pub z: f64,
}

/// Closed-form derived parameters for `cfg`.
///
/// Isotropic coupling: `(c, d)` is the lower eigenvector of the `(|2>, |4>)`
/// block and `(f, g)` the lower eigenvector of the `(|3>, |5>)` block.
/// `big_lambda` is that lower single-excitation energy for initial `A` and
/// the energy of `|1>` for initial `B`; `y` and `z` are the gaps from `|1>`
/// down to the two lower eigenvalues, `x` and `w` the gaps down to the upper
/// ones.
///
/// XY coupling: `(c, d)` is the lower and `(f, g)` the upper eigenvector;
/// `y` is the gap from `|1>` to the lower single-excitation energy, and
/// `w`, `z` are the double-excitation energies measured from it.
pub fn derived_params(cfg: &ScatterConfig) -> DerivedParams {
    let n = cfg.nf();
    let l = cfg.lambda;
    let b = cfg.b_z;
    match cfg.coupling {
        Coupling::Isotropic => {
            let lp = l * (1.0 + 1.0 / n);
            let phi = (b * b - 2.0 * b * (1.0 - 1.0 / n) * l + lp * lp).sqrt();
            let varphi = l * (1.0 / n - 1.0) + b + phi;
            let den = (4.0 * l * l + n * varphi * varphi).sqrt();
            let c = -n.sqrt() * varphi / den;
            let d = 2.0 * l / den;
            let gamma = (b * b - 2.0 * b * (1.0 - 3.0 / n) * l + lp * lp).sqrt();
            let vartheta = l * (3.0 / n - 1.0) + b + gamma;
            let den2 = (8.0 * l * l * (n - 1.0) + n * n * vartheta * vartheta).sqrt();
            let f = -vartheta * n / den2;
            let g = 2.0 * l * (2.0 * (n - 1.0)).sqrt() / den2;
            let (big_lambda, x) = match cfg.initial {
                Initial::A => (-l / n + b * (n - 1.0) - phi, b + lp + phi),
                Initial::B => (l + b * n, b + lp - phi),
            };
            DerivedParams {
                phi,
                varphi,
                c,
                d,
                gamma,
                vartheta,
                f,
                g,
                big_lambda,
                x,
                y: lp + b + phi,
                w: 3.0 * b + lp - gamma,
                z: 3.0 * b + lp + gamma,
            }
        }
        Coupling::XY => {
            let phi = (b * b + 4.0 * l * l / n).sqrt();
            let gamma = (b * b + 8.0 * l * l * (n - 1.0) / (n * n)).sqrt();
            DerivedParams {
                phi,
                varphi: 0.0,
                c: (0.5 + b / (2.0 * phi)).sqrt(),
                d: -(0.5 - b / (2.0 * phi)).max(0.0).sqrt(),
                gamma,
                vartheta: 0.0,
                f: (0.5 - b / (2.0 * gamma)).max(0.0).sqrt(),
                g: (0.5 + b / (2.0 * gamma)).sqrt(),
                big_lambda: b * (n - 1.0) - phi,
                x: b + phi,
                y: b + phi,
                w: -2.0 * b + gamma + phi,
                z: -2.0 * b - gamma + phi,
            }
        }
    }
}

/// Energy of `(active spin flipped?, k)` in the interaction Hamiltonian.
pub(crate) fn diagonal(cfg: &ScatterConfig, flipped: usize, k: usize) -> f64 {
    let n = cfg.nf();
    let sz = (n - 2.0 * k as f64) * 1.0;
    let field = cfg.b_z * sz;
    match cfg.coupling {
        Coupling::Isotropic => {
            let s = if flipped == 0 { 1.0 } else { -1.0 };
            field + cfg.lambda / n * s * sz
        }
        Coupling::XY => field,
    }
}

/// Effective Hamiltonian while `neutron` (1 or 2) crosses the sample,
/// written in the Bloch basis.
///
/// Diagonal: `B (N - 2k)` plus, for the isotropic coupling,
/// `(lambda / N) s_z (N - 2k)` where `s_z = +-1` is the active neutron's
/// spin. Off-diagonal: the active neutron flipping back up while one more
/// sample spin flips down, with amplitude `(2 lambda / N) sqrt((k+1)(N-k))`.
pub fn effective_hamiltonian(cfg: &ScatterConfig, neutron: usize) -> Result<CMatrix> {
    if neutron != 1 && neutron != 2 {
        return Err(Error::IndexOutOfRange(format!("neutron {neutron} is not 1 or 2")));
    }
    let n = cfg.nf();
    let mut h = CMatrix::zeros(8, 8);
    for (i, &(n2, n1, k)) in BLOCH_LABELS.iter().enumerate() {
        let (active, other) = if neutron == 1 { (n1, n2) } else { (n2, n1) };
        h[(i, i)] = re(diagonal(cfg, active, k));
        if active == 1 {
            let target = if neutron == 1 {
                bloch_index(other, 0, k + 1)
            } else {
                bloch_index(0, other, k + 1)
            };
            if let Some(j) = target {
                let kf = k as f64;
                let v = 2.0 * cfg.lambda / n * ((kf + 1.0) * (n - kf)).sqrt();
                h[(i, j)] = re(v);
                h[(j, i)] = re(v);
            }
        }
    }
    Ok(h)
}

/// Free sample Hamiltonian between the scatterings: the field term only.
/// Exchange within the sample is a constant on the symmetric states used
/// here and is dropped.
pub fn free_hamiltonian(cfg: &ScatterConfig) -> CMatrix {
    let n = cfg.nf();
    CMatrix::from_diagonal(&CVector::from_iterator(
        8,
        BLOCH_LABELS
            .iter()
            .map(|&(_, _, k)| re(cfg.b_z * (n - 2.0 * k as f64))),
    ))
}

/// Eigen-decompositions of the three protocol Hamiltonians for one
/// configuration, so that time sweeps avoid repeated diagonalization.
#[derive(Debug, Clone)]
pub struct Protocol {
    cfg: ScatterConfig,
    h1: Eigen,
    h2: Eigen,
    free: Vec<f64>,
}

impl Protocol {
    /// Diagonalizes the Hamiltonians for `cfg` (its times are ignored).
    pub fn new(cfg: &ScatterConfig) -> Result<Self> {
        cfg.validate()?;
        let h1 = hermitian_eigendecomposition(&effective_hamiltonian(cfg, 1)?)?;
        let h2 = hermitian_eigendecomposition(&effective_hamiltonian(cfg, 2)?)?;
        let free = free_hamiltonian(cfg).diagonal().iter().map(|z| z.re).collect();
        Ok(Protocol {
            cfg: *cfg,
            h1,
            h2,
            free,
        })
    }

    /// State after the first scattering and the free evolution.
    pub fn after_first(&self, tau: f64, tau_f_prime: f64) -> BlochState {
        let mut v = self.h1.evolve(tau, BlochState::initial(&self.cfg).amplitudes());
        for (a, &e) in v.iter_mut().zip(&self.free) {
            *a *= crate::qcore::phase(e * tau_f_prime);
        }
        BlochState { amps: v }
    }

    /// Final state after both scatterings.
    pub fn final_state(&self, tau: f64, tau_f_prime: f64) -> BlochState {
        let mid = self.after_first(tau, tau_f_prime);
        BlochState {
            amps: self.h2.evolve(tau, &mid.amps),
        }
    }

    /// Concurrence of the two neutrons at the end of the protocol.
    pub fn concurrence(&self, tau: f64, tau_f_prime: f64) -> f64 {
        concurrence(&self.final_state(tau, tau_f_prime).neutron_reduction())
            .expect("two-qubit reduction")
    }
}

/// Runs the four phases and returns the final state (canonical phase) and
/// the two-neutron reduction.
pub fn run_protocol(cfg: &ScatterConfig) -> Result<(BlochState, DensityMatrix)> {
    let p = Protocol::new(cfg)?;
    let fin = p.final_state(cfg.tau, cfg.tau_f_prime).canonical_phase();
    let rho = fin.neutron_reduction();
    Ok((fin, rho))
}

/// State after the first neutron has scattered and the sample has evolved
/// freely, with the global phase in canonical form.
pub fn after_first_scatter(cfg: &ScatterConfig) -> Result<BlochState> {
    Ok(Protocol::new(cfg)?
        .after_first(cfg.tau, cfg.tau_f_prime)
        .canonical_phase())
}

pub(crate) fn require_a(cfg: &ScatterConfig) -> Result<()> {
    if cfg.initial != Initial::A {
        return Err(Error::WrongInitialState { required: "A" });
    }
    Ok(())
}

/// Closed-form two-neutron concurrence for initial state `A`.
pub fn concurrence_closed_form(cfg: &ScatterConfig) -> Result<f64> {
    require_a(cfg)?;
    let p = derived_params(cfg);
    let n = cfg.nf();
    let l = cfg.lambda;
    let s2 = (p.phi * cfg.tau).sin().powi(2);
    let value = match cfg.coupling {
        Coupling::Isotropic => {
            let a = (p.phi * p.varphi - 2.0 * l * l / n).max(0.0);
            let b = (p.phi * p.phi - 4.0 * l * l / n * s2).max(0.0);
            8.0 * 2f64.sqrt() * l * l * s2 / (n * p.phi.powi(3) * p.varphi) * (a * b).sqrt()
        }
        Coupling::XY => {
            let c2 = (p.phi * cfg.tau).cos().powi(2);
            8.0 * l * l * s2 / (n * p.phi.powi(3))
                * (cfg.b_z * cfg.b_z + 4.0 * l * l / n * c2).sqrt()
        }
    };
    Ok(value)
}

/// Zero-field concurrence for initial `A` and the isotropic coupling.
pub fn concurrence_zero_field(n: usize, lambda: f64, tau: f64) -> f64 {
    let nf = n as f64;
    let th = lambda * (1.0 + 1.0 / nf) * tau;
    8.0 * nf * th.sin().powi(2) * (nf * nf + 1.0 + 2.0 * nf * (2.0 * th).cos()).sqrt()
        / (nf + 1.0).powi(3)
}

/// Concurrence at the optimal field: `2 sin^2(u) |cos(u)|`, `u = 2 lambda tau / sqrt N`.
pub fn concurrence_optimal_field(n: usize, lambda: f64, tau: f64) -> f64 {
    let u = 2.0 * lambda * tau / (n as f64).sqrt();
    2.0 * u.sin().powi(2) * u.cos().abs()
}

/// Zero-field peak concurrence `8 N (N - 1) / (N + 1)^3`.
pub fn zero_field_peak(n: usize) -> f64 {
    let nf = n as f64;
    8.0 * nf * (nf - 1.0) / (nf + 1.0).powi(3)
}

/// Peak concurrence reachable inside the double-peak field interval.
pub const C_INSIDE: f64 = 0.769_800_358_919_501;

/// Landmark fields, times and peak values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landmarks {
    /// Field at which the single-excitation eigenvectors are equal-weight.
    pub b_star: f64,
    /// Interaction time of the global concurrence maximum at `b_star`.
    pub tau_star: f64,
    /// Oscillation period `pi / phi` at the configured field.
    pub t_phi: f64,
    /// Lower edge of the double-peak interval (isotropic only).
    pub b_minus: Option<f64>,
    /// Upper edge of the double-peak interval (isotropic only).
    pub b_plus: Option<f64>,
    /// Peak concurrence at the configured field when it lies outside the
    /// double-peak regime.
    pub c_outside: f64,
    /// Peak concurrence inside the double-peak regime, `4 / (3 sqrt 3)`.
    pub c_inside: f64,
    /// Field above which the double-peak structure disappears (XY only).
    pub b_threshold_xy: Option<f64>,
    /// Optimal interaction time at the configured field, when the field lies
    /// inside the double-peak regime.
    pub tau_b: Option<f64>,
}

impl Landmarks {
    /// Peak concurrence over `tau` at the configured field.
    pub fn peak(&self) -> f64 {
        if self.tau_b.is_some() {
            self.c_inside
        } else {
            self.c_outside
        }
    }
}

/// Field above which the isotropic peak concurrence falls below its
/// zero-field value: `2 lambda (1 - 1/N)`.
pub fn limiting_field(n: usize, lambda: f64) -> f64 {
    2.0 * lambda * (1.0 - 1.0 / n as f64)
}

/// Landmarks for initial state `A`.
pub fn landmarks(cfg: &ScatterConfig) -> Result<Landmarks> {
    require_a(cfg)?;
    let n = cfg.nf();
    let l = cfg.lambda;
    let b = cfg.b_z;
    let p = derived_params(cfg);
    let tau_star = n.sqrt() / (4.0 * l) * (-1.0f64 / 3.0).acos();
    let t_phi = PI / p.phi;
    Ok(match cfg.coupling {
        Coupling::Isotropic => {
            let root = (2.0 / n).sqrt();
            let b_minus = l * (1.0 - 1.0 / n - root);
            let b_plus = l * (1.0 - 1.0 / n + root);
            let c_outside = 8.0 * 2f64.sqrt() * l * l * (p.varphi - p.phi).abs()
                * (p.phi * p.varphi - 2.0 * l * l / n).max(0.0).sqrt()
                / (n * p.phi.powi(3) * p.varphi);
            let arg = p.phi * n.sqrt() / (l * 6f64.sqrt());
            let inside = b >= b_minus && b <= b_plus && arg <= 1.0;
            Landmarks {
                b_star: l * (1.0 - 1.0 / n),
                tau_star,
                t_phi,
                b_minus: Some(b_minus),
                b_plus: Some(b_plus),
                c_outside,
                c_inside: C_INSIDE,
                b_threshold_xy: None,
                tau_b: inside.then(|| arg.asin() / p.phi),
            }
        }
        Coupling::XY => {
            let b_t = 2f64.sqrt() * l / n.sqrt();
            let arg = -(n * b * b + l * l) / (3.0 * l * l);
            Landmarks {
                b_star: 0.0,
                tau_star,
                t_phi,
                b_minus: None,
                b_plus: None,
                c_outside: 8.0 * b * l * l / (n * p.phi.powi(3)),
                c_inside: C_INSIDE,
                b_threshold_xy: Some(b_t),
                tau_b: (b <= b_t && arg >= -1.0).then(|| arg.acos() / (2.0 * p.phi)),
            }
        }
    })
}

/// Closed-form concurrence between the first neutron and the sample, in
/// zero field, once the first neutron has left.
pub fn c1_neutron_sample(cfg: &ScatterConfig) -> Result<f64> {
    require_a(cfg)?;
    if cfg.b_z != 0.0 {
        return Err(Error::WrongRegime(format!(
            "closed form holds only in zero field, got b_z = {}",
            cfg.b_z
        )));
    }
    let n = cfg.nf();
    let th = cfg.lambda * (1.0 + 1.0 / n) * cfg.tau;
    Ok(4.0 * n.sqrt() * th.sin().abs()
        * (n * n + 1.0 + 2.0 * n * (2.0 * th).cos()).max(0.0).sqrt()
        / (n + 1.0).powi(2))
}

/// Numerical counterpart of [`c1_neutron_sample`]: concurrence of the
/// first-neutron/sample-qubit reduction after the first scattering.
pub fn c1_neutron_sample_numeric(cfg: &ScatterConfig) -> Result<f64> {
    require_a(cfg)?;
    let st = after_first_scatter(cfg)?;
    concurrence(&st.first_neutron_sample_qubit()?)
}

/// Atom-pair concurrence in the cavity scheme, in the printed form
/// `2 (cos^2 L |sin(sqrt2 L) sin L| - sin^2 L |cos(sqrt2 L) cos L|)`,
/// `L = Lambda tau`, clamped at zero.
pub fn haroche_concurrence(big_lambda: f64, tau: f64) -> f64 {
    let t = big_lambda * tau;
    let r = 2f64.sqrt() * t;
    (2.0 * (t.cos().powi(2) * (r.sin() * t.sin()).abs()
        - t.sin().powi(2) * (r.cos() * t.cos()).abs()))
    .max(0.0)
}

/// Atom-pair concurrence obtained by solving the cavity scheme directly:
/// `2 max(0, |c| s^2 |cos(sqrt2 L)| - c^2 |s| |sin(sqrt2 L)|)` with
/// `c = cos L`, `s = sin L`.
pub fn haroche_concurrence_derived(big_lambda: f64, tau: f64) -> f64 {
    let t = big_lambda * tau;
    let r = 2f64.sqrt() * t;
    let (c, s) = (t.cos(), t.sin());
    (2.0 * (c.abs() * s * s * r.cos().abs() - c * c * s.abs() * r.sin().abs())).max(0.0)
}

/// Brute-force cavity scheme: two excited atoms cross an empty cavity one
/// after the other, each coupled for time `tau` with strength `big_lambda`
/// through `Lambda (a sigma+ + a^dagger sigma-)`. Returns the atom-pair
/// concurrence.
pub fn haroche_cavity_simulation(big_lambda: f64, tau: f64) -> Result<f64> {
    // Factors: atom 1 (0 = excited), atom 2, cavity photons 0..=2.
    const PH: usize = 3;
    let dim = 2 * 2 * PH;
    let idx = |a1: usize, a2: usize, n: usize| (a1 * 2 + a2) * PH + n;
    let build = |which: usize| {
        let mut h = CMatrix::zeros(dim, dim);
        for a_other in 0..2 {
            for n in 0..PH - 1 {
                // excited atom with n photons <-> ground atom with n+1.
                let (i, j) = if which == 1 {
                    (idx(0, a_other, n), idx(1, a_other, n + 1))
                } else {
                    (idx(a_other, 0, n), idx(a_other, 1, n + 1))
                };
                let v = big_lambda * ((n + 1) as f64).sqrt();
                h[(i, j)] = re(v);
                h[(j, i)] = re(v);
            }
        }
        h
    };
    let mut psi = CVector::zeros(dim);
    psi[idx(0, 0, 0)] = re(1.0);
    let psi = hermitian_eigendecomposition(&build(1))?.evolve(tau, &psi);
    let psi = hermitian_eigendecomposition(&build(2))?.evolve(tau, &psi);
    concurrence(&reduce_pure(&psi, &[2, 2, PH], &[0, 1])?)
}

/// Feasibility numbers in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiQuantities {
    /// Coupling energy at one lattice constant, joules.
    pub lambda_si: f64,
    /// Optimal field `lambda / (g_e mu_B)`, tesla.
    pub b_star_t: f64,
    /// Optimal interaction time `hbar sqrt(N) / (4 lambda)`, seconds.
    pub tau_star_s: f64,
    /// Order-of-magnitude field `1e-32 (a0 / m)^-3`, tesla.
    pub b_star_rough_t: f64,
    /// Order-of-magnitude time `1e20 (a0 / m)^3 sqrt(N)`, seconds.
    pub tau_star_rough_s: f64,
}

/// CODATA 2018 constants used by [`si_quantities`].
pub mod constants {
    /// Nuclear magneton, J/T.
    pub const MU_N: f64 = 5.050_783_746_1e-27;
    /// Bohr magneton, J/T.
    pub const MU_B: f64 = 9.274_010_078_3e-24;
    /// Vacuum permeability, N/A^2.
    pub const MU_0: f64 = 1.256_637_062_12e-6;
    /// Electron g-factor magnitude.
    pub const G_E: f64 = 2.002_319_304_36;
    /// Neutron g-factor magnitude.
    pub const G_N: f64 = 3.826_085_45;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
}

/// Coupling energy, optimal field and optimal time for lattice constant
/// `a0` (metres) and `n` sample spins, in the large-`n` limit.
pub fn si_quantities(a0: f64, n: f64) -> Result<SiQuantities> {
    use constants::*;
    if !(a0 > 0.0) {
        return Err(Error::config("a0", "lattice constant must be positive"));
    }
    let lambda_si = G_N * MU_N * MU_0 * G_E * MU_B / a0.powi(3);
    Ok(SiQuantities {
        lambda_si,
        b_star_t: lambda_si / (G_E * MU_B),
        tau_star_s: HBAR * n.sqrt() / (4.0 * lambda_si),
        b_star_rough_t: 1e-32 * a0.powi(-3),
        tau_star_rough_s: 1e20 * a0.powi(3) * n.sqrt(),
    })
}

/// Largest sample size accepted by [`full_basis_oracle`].
pub const ORACLE_MAX_N: usize = 14;

/// Basis of `N + 2` spins (second neutron, first neutron, sample sites)
/// with at most two flipped spins, stored as bitmasks (bit set = down).
struct FlipBasis {
    states: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl FlipBasis {
    fn new(spins: usize) -> Self {
        let mut states = vec![0u64];
        for i in 0..spins {
            states.push(1 << i);
        }
        for i in 0..spins {
            for j in i + 1..spins {
                states.push((1 << i) | (1 << j));
            }
        }
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        FlipBasis { states, index }
    }

    fn dim(&self) -> usize {
        self.states.len()
    }
}

/// Bit positions: 0 = second neutron, 1 = first neutron, 2.. = sample.
const NEUTRON2: usize = 0;
const NEUTRON1: usize = 1;

fn sz(state: u64, bit: usize) -> f64 {
    if state >> bit & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Adds `coef * (sz_a sz_b)` on the diagonal and `2 coef` flip-flop terms
/// (the latter only) between spins `a` and `b`.
fn add_pair(h: &mut CMatrix, basis: &FlipBasis, a: usize, b: usize, zz: f64, flip: f64) {
    for (i, &s) in basis.states.iter().enumerate() {
        h[(i, i)] += re(zz * sz(s, a) * sz(s, b));
        if (s >> a & 1) != (s >> b & 1) {
            let t = s ^ (1 << a) ^ (1 << b);
            if let Some(&j) = basis.index.get(&t) {
                h[(i, j)] += re(flip);
            }
        }
    }
}

/// Protocol in the site basis of `N` sample spins and both neutrons with at
/// most two spin flips, dimension `N^2/2 + 5N/2 + 4`. The neutron interacts
/// with every sample spin through `(lambda/N) [s_z S_z + 2 (s+ S- + s- S+)]`
/// (flip-flop part only for the XY coupling). A nearest-neighbour exchange
/// `j_ring` on the sample ring is included in every phase. Returns the
/// two-neutron reduction, factors ordered `(second, first)`.
pub fn full_basis_oracle(cfg: &ScatterConfig, j_ring: f64) -> Result<DensityMatrix> {
    cfg.validate()?;
    if cfg.n > ORACLE_MAX_N {
        return Err(Error::TooLarge(format!(
            "oracle accepts N <= {ORACLE_MAX_N}, got {}",
            cfg.n
        )));
    }
    let n = cfg.n;
    let basis = FlipBasis::new(n + 2);
    let dim = basis.dim();
    let sample = |j: usize| 2 + j;

    let mut h0 = CMatrix::zeros(dim, dim);
    for (i, &s) in basis.states.iter().enumerate() {
        let field: f64 = (0..n).map(|j| sz(s, sample(j))).sum();
        h0[(i, i)] = re(cfg.b_z * field);
    }
    if j_ring != 0.0 {
        let bonds: Vec<(usize, usize)> = if n == 2 {
            vec![(0, 1)]
        } else {
            (0..n).map(|j| (j, (j + 1) % n)).collect()
        };
        for (a, b) in bonds {
            add_pair(&mut h0, &basis, sample(a), sample(b), j_ring, 2.0 * j_ring);
        }
    }
    let coupling = |bit: usize| {
        let mut h = h0.clone();
        let zz = match cfg.coupling {
            Coupling::Isotropic => cfg.lambda / n as f64,
            Coupling::XY => 0.0,
        };
        for j in 0..n {
            add_pair(&mut h, &basis, bit, sample(j), zz, 2.0 * cfg.lambda / n as f64);
        }
        h
    };
    let h1 = coupling(NEUTRON1);
    let h2 = coupling(NEUTRON2);

    let mut psi = CVector::zeros(dim);
    match cfg.initial {
        Initial::A => {
            let amp = re(1.0 / (n as f64).sqrt());
            for j in 0..n {
                psi[basis.index[&(1u64 << sample(j))]] = amp;
            }
        }
        Initial::B => {
            let (a, b) = (cfg.alpha, cfg.beta);
            psi[basis.index[&0]] = a * a;
            psi[basis.index[&(1 << NEUTRON1)]] = a * b;
            psi[basis.index[&(1 << NEUTRON2)]] = a * b;
            psi[basis.index[&((1 << NEUTRON1) | (1 << NEUTRON2))]] = b * b;
        }
    }
    let psi = hermitian_eigendecomposition(&h1)?.evolve(cfg.tau, &psi);
    let psi = hermitian_eigendecomposition(&h0)?.evolve(cfg.tau_f_prime, &psi);
    let psi = hermitian_eigendecomposition(&h2)?.evolve(cfg.tau, &psi);

    // Group amplitudes by the sample configuration and trace it out.
    let mut by_sample: HashMap<u64, [C64; 4]> = HashMap::new();
    for (i, &s) in basis.states.iter().enumerate() {
        let neutrons = ((s >> NEUTRON2 & 1) * 2 + (s >> NEUTRON1 & 1)) as usize;
        by_sample.entry(s >> 2).or_insert([c64(0.0, 0.0); 4])[neutrons] = psi[i];
    }
    let mut rho = CMatrix::zeros(4, 4);
    for amps in by_sample.values() {
        for a in 0..4 {
            for b in 0..4 {
                rho[(a, b)] += amps[a] * amps[b].conj();
            }
        }
    }
    Ok(DensityMatrix::from_trusted(rho, vec![2, 2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entmeas::{log_negativity, witness_from_state};
    use crate::optimize::{linspace, maximize_1d, GRID_POINTS};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c_num(cfg: &ScatterConfig) -> f64 {
        concurrence(&run_protocol(cfg).unwrap().1).unwrap()
    }

    fn random_cfg(rng: &mut ChaCha8Rng) -> ScatterConfig {
        let n = rng.gen_range(2..40);
        let th = rng.gen::<f64>() * PI;
        let ph = rng.gen::<f64>() * 2.0 * PI;
        ScatterConfig::new(n)
            .lambda(0.5 + rng.gen::<f64>())
            .field(2.0 * rng.gen::<f64>())
            .tau(5.0 * rng.gen::<f64>())
            .tau_f_prime(5.0 * rng.gen::<f64>())
            .polarization(re((th / 2.0).cos()), c64(ph.cos(), ph.sin()) * (th / 2.0).sin())
            .coupling(if rng.gen() { Coupling::Isotropic } else { Coupling::XY })
            .initial(if rng.gen() { Initial::A } else { Initial::B })
    }

    #[test]
    fn hamiltonian_elements() {
        let cfg = ScatterConfig::new(4);
        let h = effective_hamiltonian(&cfg, 1).unwrap();
        assert!((h[(1, 3)].re - 1.0).abs() < 1e-15);
        let cfg = ScatterConfig::new(10).field(0.9);
        let h = effective_hamiltonian(&cfg, 1).unwrap();
        assert!((h[(1, 1)].re - h[(3, 3)].re).abs() < 1e-12);
        let cfg = ScatterConfig::new(7).field(0.3).lambda(1.3).coupling(Coupling::XY);
        for nn in [1, 2] {
            let h = effective_hamiltonian(&cfg, nn).unwrap();
            for (i, &(_, _, k)) in BLOCH_LABELS.iter().enumerate() {
                assert!((h[(i, i)].re - 0.3 * (7.0 - 2.0 * k as f64)).abs() < 1e-12);
            }
        }
        assert!(effective_hamiltonian(&cfg, 3).is_err());
    }

    #[test]
    fn second_neutron_hamiltonian_mirrors_the_first() {
        let cfg = ScatterConfig::new(9).field(0.4);
        let h1 = effective_hamiltonian(&cfg, 1).unwrap();
        let h2 = effective_hamiltonian(&cfg, 2).unwrap();
        // Swapping the neutron labels maps one onto the other.
        let swap: Vec<usize> = BLOCH_LABELS
            .iter()
            .map(|&(a, b, k)| bloch_index(b, a, k).unwrap())
            .collect();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(h1[(i, j)], h2[(swap[i], swap[j])]);
            }
        }
    }

    #[test]
    fn zero_field_splitting() {
        let cfg = ScatterConfig::new(10);
        let h = effective_hamiltonian(&cfg, 1).unwrap();
        let mut block = CMatrix::zeros(2, 2);
        for (a, i) in [1usize, 3].iter().enumerate() {
            for (b, j) in [1usize, 3].iter().enumerate() {
                block[(a, b)] = h[(*i, *j)];
            }
        }
        let e = hermitian_eigendecomposition(&block).unwrap().values;
        assert!((e[1] - e[0] - 2.0 * 1.1).abs() < 1e-12);
    }

    fn block(h: &CMatrix, i: usize, j: usize) -> CMatrix {
        CMatrix::from_fn(2, 2, |a, b| h[([i, j][a], [i, j][b])])
    }

    #[test]
    fn derived_params_diagonalize_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let cfg = random_cfg(&mut rng);
            let p = derived_params(&cfg);
            assert!((p.c * p.c + p.d * p.d - 1.0).abs() < 1e-10);
            assert!((p.f * p.f + p.g * p.g - 1.0).abs() < 1e-10);
            let h = effective_hamiltonian(&cfg, 1).unwrap();
            let e1 = h[(0, 0)].re;
            let b1 = block(&h, 1, 3);
            let b2 = block(&h, 2, 4);
            let eig1 = hermitian_eigendecomposition(&b1).unwrap().values;
            let eig2 = hermitian_eigendecomposition(&b2).unwrap().values;
            assert!(((eig1[1] - eig1[0]) / 2.0 - p.phi).abs() < 1e-10);
            assert!(((eig2[1] - eig2[0]) / 2.0 - p.gamma).abs() < 1e-10);
            let v = CVector::from_vec(vec![re(p.c), re(p.d)]);
            let u = CVector::from_vec(vec![re(p.f), re(p.g)]);
            let lower_single = eig1[0];
            assert!((&b1 * &v - &v * re(lower_single)).norm() < 1e-10);
            match cfg.coupling {
                Coupling::Isotropic => {
                    assert!((&b2 * &u - &u * re(eig2[0])).norm() < 1e-10);
                    assert!((e1 - lower_single - p.y).abs() < 1e-10);
                    assert!((e1 - eig2[1] - p.w).abs() < 1e-10);
                    assert!((e1 - eig2[0] - p.z).abs() < 1e-10);
                    match cfg.initial {
                        Initial::A => {
                            assert!((p.big_lambda - lower_single).abs() < 1e-10);
                            assert!((e1 - eig1[1] + 2.0 * p.phi - p.x).abs() < 1e-10);
                        }
                        Initial::B => {
                            assert!((p.big_lambda - e1).abs() < 1e-10);
                            assert!((e1 - eig1[1] - p.x).abs() < 1e-10);
                        }
                    }
                }
                Coupling::XY => {
                    assert!((&b2 * &u - &u * re(eig2[1])).norm() < 1e-10);
                    assert!((p.big_lambda - lower_single).abs() < 1e-10);
                    assert!((e1 - lower_single - p.y).abs() < 1e-10);
                    assert!((eig2[1] - lower_single - p.w).abs() < 1e-10);
                    assert!((eig2[0] - lower_single - p.z).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn equal_weights_at_the_optimal_field() {
        for n in [2, 5, 10, 50, 1000] {
            let b = 1.0 - 1.0 / n as f64;
            let p = derived_params(&ScatterConfig::new(n).field(b));
            let h = std::f64::consts::FRAC_1_SQRT_2;
            assert!((p.c.abs() - h).abs() < 1e-10 && (p.d.abs() - h).abs() < 1e-10);
            assert!((p.c + p.d).abs() < 1e-10);
        }
        let p = derived_params(&ScatterConfig::new(6).coupling(Coupling::XY));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p.c - h).abs() < 1e-12 && (p.d + h).abs() < 1e-12);
    }

    #[test]
    fn thermodynamic_limit_of_phi() {
        let p = derived_params(&ScatterConfig::new(1_000_000).field(2.0));
        assert!((p.phi - 1.0).abs() / 1.0 < 1e-5);
    }

    #[test]
    fn closed_form_matches_protocol() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..300 {
            let cfg = random_cfg(&mut rng).initial(Initial::A);
            let d = (concurrence_closed_form(&cfg).unwrap() - c_num(&cfg)).abs();
            assert!(d < 1e-9, "{cfg:?} {d}");
        }
        assert!(matches!(
            concurrence_closed_form(&ScatterConfig::new(4).initial(Initial::B)),
            Err(Error::WrongInitialState { .. })
        ));
    }

    #[test]
    fn special_forms_of_the_closed_form() {
        for n in [4usize, 10, 20] {
            let nf = n as f64;
            for &tau in &linspace(0.0, 10.0, 101) {
                let c0 = concurrence_closed_form(&ScatterConfig::new(n).tau(tau)).unwrap();
                assert!((c0 - concurrence_zero_field(n, 1.0, tau)).abs() < 1e-12);
                let copt = concurrence_closed_form(&ScatterConfig::new(n).field(1.0 - 1.0 / nf).tau(tau))
                    .unwrap();
                assert!((copt - concurrence_optimal_field(n, 1.0, tau)).abs() < 1e-12);
                let cxy = concurrence_closed_form(&ScatterConfig::new(n).tau(tau).coupling(Coupling::XY))
                    .unwrap();
                assert!((cxy - concurrence_optimal_field(n, 1.0, tau)).abs() < 1e-12);
            }
        }
        let t = PI / (2.0 * 1.25);
        let c = concurrence_closed_form(&ScatterConfig::new(4).tau(t)).unwrap();
        assert!((c - 0.768).abs() < 1e-12 && (zero_field_peak(4) - 0.768).abs() < 1e-15);
    }

    #[test]
    fn initial_a_stays_put_without_interaction() {
        let (fin, rho) = run_protocol(&ScatterConfig::new(5).field(0.3)).unwrap();
        assert!((fin.amplitude(2).re - 1.0).abs() < 1e-12);
        assert!(concurrence(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn polarized_up_neutrons_are_an_eigenstate() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let cfg = random_cfg(&mut rng)
                .initial(Initial::B)
                .polarization(re(1.0), re(0.0));
            assert!(c_num(&cfg) < 1e-12);
            let (fin, _) = run_protocol(&cfg).unwrap();
            assert!((fin.amplitude(1).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn optimal_point_value_and_eof() {
        for n in [5usize, 10, 50] {
            let cfg0 = ScatterConfig::new(n);
            let lm = landmarks(&cfg0).unwrap();
            let cfg = cfg0.field(lm.b_star).tau(lm.tau_star);
            let c = c_num(&cfg);
            assert!((c - 4.0 / (3.0 * 3f64.sqrt())).abs() < 1e-6);
            let e = crate::entmeas::eof_from_concurrence(c).unwrap();
            assert!((e - 0.68).abs() < 0.01);
        }
        let lm = landmarks(&ScatterConfig::new(10)).unwrap();
        assert!((lm.b_star - 0.9).abs() < 1e-15);
        assert!((lm.tau_star - 1.511).abs() < 1e-3);
        let xy = landmarks(&ScatterConfig::new(8).coupling(Coupling::XY)).unwrap();
        assert!((xy.b_threshold_xy.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn landmark_peaks_match_grid_maximization() {
        for n in [6usize, 10, 25] {
            for coupling in [Coupling::Isotropic, Coupling::XY] {
                for &b in &linspace(0.0, 2.5, 26) {
                    let cfg = ScatterConfig::new(n).field(b).coupling(coupling);
                    let lm = landmarks(&cfg).unwrap();
                    let f = |t: f64| concurrence_closed_form(&cfg.tau(t)).unwrap();
                    let m = maximize_1d(f, 0.0, lm.t_phi, GRID_POINTS, 1e-10);
                    assert!((m.value - lm.peak()).abs() < 1e-6, "{n} {b} {coupling:?} {m:?} {lm:?}");
                    if let Some(tb) = lm.tau_b {
                        assert!((f(tb) - C_INSIDE).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn field_beyond_the_limit_loses_to_zero_field() {
        for n in [5usize, 10, 40] {
            let lim = limiting_field(n, 1.0);
            let peak = |b: f64| landmarks(&ScatterConfig::new(n).field(b)).unwrap().peak();
            assert!((peak(lim) - zero_field_peak(n)).abs() < 1e-9);
            assert!(peak(lim * 0.99) > zero_field_peak(n));
            assert!(peak(lim * 1.01) < zero_field_peak(n));
        }
    }

    #[test]
    fn tau_f_prime_independence_of_concurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let grid = linspace(0.0, 10.0, 41);
        for _ in 0..200 {
            let cfg = random_cfg(&mut rng);
            let p = Protocol::new(&cfg).unwrap();
            let c0 = p.concurrence(cfg.tau, 0.0);
            for &tf in &grid {
                assert!((p.concurrence(cfg.tau, tf) - c0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn negativity_varies_with_free_time() {
        let cfg = ScatterConfig::new(10)
            .field(0.35)
            .tau(3.0)
            .initial(Initial::B)
            .polarization(re(1.0 / 6f64.sqrt()), re((5.0f64 / 6.0).sqrt()));
        let p = Protocol::new(&cfg).unwrap();
        let grid = linspace(0.0, 20.0, 200);
        let (mut cmin, mut cmax, mut nmin, mut nmax) = (1.0f64, 0.0f64, 9.0f64, 0.0f64);
        for &tf in &grid {
            let rho = p.final_state(cfg.tau, tf).neutron_reduction();
            let c = concurrence(&rho).unwrap();
            let en = log_negativity(&rho, 1).unwrap();
            cmin = cmin.min(c);
            cmax = cmax.max(c);
            nmin = nmin.min(en);
            nmax = nmax.max(en);
        }
        assert!(cmax - cmin < 1e-9);
        assert!(nmax - nmin > 1e-3, "{nmin} {nmax}");
    }

    #[test]
    fn periodicity_in_tau() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let cfg = random_cfg(&mut rng).initial(Initial::A);
            let t = PI / derived_params(&cfg).phi;
            let p = Protocol::new(&cfg).unwrap();
            let d = (p.concurrence(cfg.tau, cfg.tau_f_prime)
                - p.concurrence(cfg.tau + t, cfg.tau_f_prime))
            .abs();
            assert!(d < 1e-9);
        }
    }

    #[test]
    fn neutron_reduction_structure_for_initial_a() {
        let cfg = ScatterConfig::new(10).field(0.9).tau(1.511).tau_f_prime(0.7);
        let rho = run_protocol(&cfg).unwrap().1;
        let m = rho.matrix();
        // Only populations and the |01><10| coherence survive.
        for i in 0..4 {
            for j in 0..4 {
                let allowed = i == j || (i, j) == (1, 2) || (i, j) == (2, 1);
                if !allowed {
                    assert!(m[(i, j)].norm() < 1e-12);
                }
            }
        }
        assert!(m[(3, 3)].norm() < 1e-12);
        let pt = crate::qcore::partial_transpose(&rho, 0).unwrap();
        let e = hermitian_eigendecomposition(&pt).unwrap().values;
        assert!(e[0] < -1e-3 && e[1] > -1e-12);
    }

    #[test]
    fn witness_of_the_optimal_state() {
        let n = 10;
        let lm = landmarks(&ScatterConfig::new(n)).unwrap();
        let cfg = ScatterConfig::new(n).field(lm.b_star).tau(lm.tau_star);
        let rho = run_protocol(&cfg).unwrap().1;
        let w = witness_from_state(&rho).unwrap();
        assert!(w.source_eigenvalue < -0.1);
        let (a, b) = (w.vector[0].norm(), w.vector[3].norm());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a - h).abs() < 0.06 && (b - h).abs() < 0.06, "{a} {b}");
    }

    #[test]
    fn first_neutron_and_sample() {
        for n in [2usize, 3, 7, 15] {
            for &tau in &linspace(0.0, 6.0, 61) {
                let cfg = ScatterConfig::new(n).tau(tau).tau_f_prime(0.4);
                let c = c1_neutron_sample(&cfg).unwrap();
                assert!((c - c1_neutron_sample_numeric(&cfg).unwrap()).abs() < 1e-9);
            }
        }
        let t = PI / (2.0 * 1.5);
        let c = c1_neutron_sample(&ScatterConfig::new(2).tau(t)).unwrap();
        assert!((c - 4.0 * 2f64.sqrt() / 9.0).abs() < 1e-12);
        assert!(c1_neutron_sample(&ScatterConfig::new(2).field(0.1)).is_err());
        for n in [6usize, 10, 30] {
            let nf = n as f64;
            let t = PI / (2.0 * (1.0 + 1.0 / nf));
            let c = c1_neutron_sample(&ScatterConfig::new(n).tau(t)).unwrap();
            assert!((c - 4.0 * nf.sqrt() * (nf - 1.0) / (nf + 1.0).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn cavity_scheme() {
        assert_eq!(haroche_concurrence(1.0, 0.0), 0.0);
        let grid = linspace(0.0, 4.0 * PI, 20001);
        let peak = grid
            .iter()
            .map(|&t| (haroche_concurrence(1.0, t), t))
            .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
        assert!((peak.0 - 0.77).abs() < 0.01, "{peak:?}");
        assert!((peak.1 / PI - 3.0).abs() < 0.25, "{peak:?}");
        for &t in grid.iter().step_by(50) {
            let sim = haroche_cavity_simulation(1.0, t).unwrap();
            assert!((sim - haroche_concurrence_derived(1.0, t)).abs() < 1e-9, "{t}");
        }
    }

    #[test]
    fn si_numbers() {
        let q = si_quantities(1e-10, 1e23).unwrap();
        assert!((q.b_star_t.log10() + 2.0).abs() < 1.0);
        assert!((q.tau_star_s.log10() - 2.0).abs() < 1.0);
        assert!((q.b_star_rough_t.log10() + 2.0).abs() < 1e-9);
        assert!((q.tau_star_rough_s.log10() - 1.5).abs() < 1e-9);
        let q2 = si_quantities(2e-10, 1e23).unwrap();
        assert!((q.lambda_si / q2.lambda_si - 8.0).abs() < 1e-9);
        assert!(si_quantities(0.0, 1.0).is_err());
    }

    #[test]
    fn oracle_dimension_and_identity() {
        assert_eq!(FlipBasis::new(14 + 2).dim(), 14 * 14 / 2 + 5 * 14 / 2 + 4);
        let rho = full_basis_oracle(&ScatterConfig::new(3), 0.0).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(matches!(
            full_basis_oracle(&ScatterConfig::new(15), 0.0),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn oracle_agrees_with_bloch_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for n in [4usize, 6] {
            for _ in 0..10 {
                let cfg = random_cfg(&mut rng);
                let cfg = ScatterConfig { n, ..cfg };
                let a = full_basis_oracle(&cfg, 0.0).unwrap();
                let b = run_protocol(&cfg).unwrap().1;
                assert!((a.matrix() - b.matrix()).camax() < 1e-9, "{cfg:?}");
            }
        }
    }

    #[test]
    fn sample_exchange_is_irrelevant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let cfg = ScatterConfig {
                n: 5,
                b_z: 0.0,
                ..random_cfg(&mut rng)
            };
            let c0 = concurrence(&full_basis_oracle(&cfg, 0.0).unwrap()).unwrap();
            for j in [-1.3, 0.4, 2.0] {
                let cj = concurrence(&full_basis_oracle(&cfg, j).unwrap()).unwrap();
                assert!((cj - c0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn polarized_sample_flipped_neutrons_zero_field() {
        let cfg = ScatterConfig::new(10)
            .initial(Initial::B)
            .polarization(re(0.0), re(1.0));
        let p = Protocol::new(&cfg).unwrap();
        let worst = linspace(0.0, 20.0, 2001)
            .iter()
            .map(|&t| p.concurrence(t, 0.0))
            .fold(0.0, f64::max);
        assert!(worst <= 1e-9, "max concurrence {worst}");
    }
}
