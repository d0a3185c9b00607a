//! Entanglement measures and witnesses for two-qubit reductions.
//!
//! All logarithms are base two, so every entropy and negativity is reported
//! in ebits. Matrix square roots go through the spectral decomposition with
//! negative round-off eigenvalues clamped to zero.

use crate::error::{Error, Result};
use crate::qcore::{
    c64, hermitian_eigendecomposition, identity, kron, partial_transpose, pauli_x, pauli_y,
    pauli_z, re, CMatrix, CVector, DensityMatrix, C64, TOL,
};

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 || rho.subsystem_dims() != [2, 2] {
        return Err(Error::InvalidDensityMatrix(format!(
            "expected a two-qubit state, got factor dimensions {:?}",
            rho.subsystem_dims()
        )));
    }
    Ok(())
}

/// Eigenvalues of a density matrix below this bound are treated as exact
/// zeros before square roots are taken. Round-off of order `1e-16` would
/// otherwise surface as `1e-8` errors in the concurrence.
const ZERO_EIGENVALUE: f64 = 1e-14;

/// Wootters concurrence of a two-qubit density matrix.
///
/// The values `lambda_i` are the singular values of
/// `Xi^T (sigma_y x sigma_y) Xi`, where the columns of `Xi` are the
/// eigenvectors of `rho` scaled by the square roots of their eigenvalues.
/// They coincide with the eigenvalues of `sqrt(sqrt(rho) rho~ sqrt(rho))`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let eig = hermitian_eigendecomposition(rho.matrix())?;
    let mut xi = eig.vectors.clone();
    for (k, &p) in eig.values.iter().enumerate() {
        let w = if p > ZERO_EIGENVALUE { p.sqrt() } else { 0.0 };
        for z in xi.column_mut(k).iter_mut() {
            *z *= w;
        }
    }
    let yy = kron(&pauli_y(), &pauli_y());
    let tau = xi.transpose() * yy * &xi;
    let mut l: Vec<f64> = tau.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// Binary entropy `h(x)` in bits with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation of a two-qubit state with concurrence `c`.
pub fn eof_from_concurrence(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::OutOfRange {
            value: c,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok(binary_entropy(0.5 * (1.0 - (1.0 - c * c).max(0.0).sqrt())))
}

/// Logarithmic negativity `log2 ||rho^{T_k}||_1` for the partial transpose
/// on factor `subsystem`.
pub fn log_negativity(rho: &DensityMatrix, subsystem: usize) -> Result<f64> {
    let pt = partial_transpose(rho, subsystem)?;
    let eig = hermitian_eigendecomposition(&crate::qcore::hermitian_part(&pt))?;
    let trace_norm: f64 = eig.values.iter().map(|e| e.abs()).sum();
    Ok(trace_norm.log2().max(0.0))
}

/// Von Neumann entropy `-Tr[rho log2 rho]`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eig = hermitian_eigendecomposition(rho.matrix())?;
    Ok(eig
        .values
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0))
}

/// Rank-one witness `|e><e|` built from the most negative eigenvector of a
/// partially transposed state.
#[derive(Debug, Clone)]
pub struct WitnessOperator {
    /// The projector `|e><e|`.
    pub matrix: CMatrix,
    /// The eigenvector `|e>` with its first nonzero amplitude real-positive.
    pub vector: CVector,
    /// The negative eigenvalue of the partial transpose it came from.
    pub source_eigenvalue: f64,
}

fn canonical(mut v: CVector) -> CVector {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let ph = z.conj() / z.norm();
        v.iter_mut().for_each(|a| *a *= ph);
    }
    v
}

fn lex_key(v: &CVector) -> Vec<(f64, f64)> {
    v.iter().map(|z| (z.re, z.im)).collect()
}

/// Builds the witness for `rho_n` from the partial transpose on the first
/// qubit.
///
/// Degenerate most-negative eigenvalues are resolved by choosing, among the
/// returned eigenvectors put in canonical phase, the lexicographically
/// largest.
pub fn witness_from_state(rho_n: &DensityMatrix) -> Result<WitnessOperator> {
    require_two_qubits(rho_n)?;
    let pt = partial_transpose(rho_n, 0)?;
    let eig = hermitian_eigendecomposition(&crate::qcore::hermitian_part(&pt))?;
    let low = eig.values[0];
    if low >= -TOL.norm {
        return Err(Error::NoNegativeEigenvalue);
    }
    let vector = (0..eig.dim())
        .take_while(|&k| eig.values[k] - low < TOL.norm)
        .map(|k| canonical(eig.vectors.column(k).into_owned()))
        .max_by(|a, b| {
            lex_key(a)
                .partial_cmp(&lex_key(b))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("at least one eigenvector");
    Ok(WitnessOperator {
        matrix: &vector * vector.adjoint(),
        vector,
        source_eigenvalue: low,
    })
}

/// `Tr[W^{T_A} rho]` when `transpose_first` is set, otherwise `Tr[W rho]`.
pub fn witness_expectation(
    w: &WitnessOperator,
    rho: &DensityMatrix,
    transpose_first: bool,
) -> Result<f64> {
    if rho.dim() != w.matrix.nrows() {
        return Err(Error::DimensionMismatch {
            expected: w.matrix.nrows(),
            found: rho.dim(),
        });
    }
    let op = if transpose_first {
        let as_state = DensityMatrix::from_trusted(w.matrix.clone(), vec![2, 2]);
        partial_transpose(&as_state, 0)?
    } else {
        w.matrix.clone()
    };
    Ok((op * rho.matrix()).trace().re)
}

/// Local measurement setting shared by both detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Setting {
    /// Spin component along x.
    X,
    /// Spin component along y.
    Y,
    /// Spin component along z.
    Z,
}

/// One weighted product projector of a witness decomposition.
#[derive(Debug, Clone)]
pub struct WitnessTerm {
    /// Real weight of the projector.
    pub coefficient: f64,
    /// Measurement setting used for this term.
    pub setting: Setting,
    /// Outcome label, e.g. `"y+y-"`.
    pub label: &'static str,
    /// The 4x4 product projector.
    pub projector: CMatrix,
}

/// Expansion of the measured witness observable into product projectors.
#[derive(Debug, Clone)]
pub struct WitnessDecomposition {
    /// Terms with nonzero weight.
    pub terms: Vec<WitnessTerm>,
    /// Number of distinct local settings among the terms.
    pub settings_count: usize,
}

impl WitnessDecomposition {
    /// Sum of the weighted projectors.
    pub fn reconstruct(&self) -> CMatrix {
        self.terms
            .iter()
            .fold(CMatrix::zeros(4, 4), |acc, t| acc + &t.projector * re(t.coefficient))
    }

    /// Expectation value of the reconstructed observable on `rho`.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        (self.reconstruct() * rho.matrix()).trace().re
    }
}

/// Single-qubit projector `(I + sign n.sigma) / 2`.
fn spin_projector(n: [f64; 3], sign: f64) -> CMatrix {
    let ns = pauli_x() * re(n[0]) + pauli_y() * re(n[1]) + pauli_z() * re(n[2]);
    (identity(2) + ns * re(sign)) * re(0.5)
}

/// Decomposes the observable measured for a target `a|00> + b|11>` into six
/// product projectors over three settings (z, x, y).
///
/// The sum equals `(|e><e|)^{T_A}`, the operator whose expectation on a
/// state `rho` equals `Tr[|e><e| rho^{T_A}]`. Zero-weight terms are dropped.
pub fn witness_decomposition(a: f64, b: f64) -> Result<WitnessDecomposition> {
    witness_decomposition_phased(a, b, 0.0)
}

/// Variant of [`witness_decomposition`] for the target
/// `a|00> + b e^{i theta}|11>`: the second detector's x and y axes are
/// rotated by `theta` about z.
pub fn witness_decomposition_phased(a: f64, b: f64, theta: f64) -> Result<WitnessDecomposition> {
    let n2 = a * a + b * b;
    if (n2 - 1.0).abs() > TOL.norm {
        return Err(Error::NotNormalized(n2));
    }
    let z = [0.0, 0.0, 1.0];
    let x = [1.0, 0.0, 0.0];
    let y = [0.0, 1.0, 0.0];
    let (c, s) = (theta.cos(), theta.sin());
    let xr = [c, s, 0.0];
    let yr = [-s, c, 0.0];
    let prod = |na: [f64; 3], sa: f64, nb: [f64; 3], sb: f64| {
        kron(&spin_projector(na, sa), &spin_projector(nb, sb))
    };
    let ab = a * b;
    let raw = [
        (a * a, Setting::Z, "z+z+", prod(z, 1.0, z, 1.0)),
        (b * b, Setting::Z, "z-z-", prod(z, -1.0, z, -1.0)),
        (ab, Setting::X, "x+x+", prod(x, 1.0, xr, 1.0)),
        (ab, Setting::X, "x-x-", prod(x, -1.0, xr, -1.0)),
        (-ab, Setting::Y, "y+y-", prod(y, 1.0, yr, -1.0)),
        (-ab, Setting::Y, "y-y+", prod(y, -1.0, yr, 1.0)),
    ];
    let terms: Vec<WitnessTerm> = raw
        .into_iter()
        .filter(|(w, ..)| *w != 0.0)
        .map(|(coefficient, setting, label, projector)| WitnessTerm {
            coefficient,
            setting,
            label,
            projector,
        })
        .collect();
    let mut settings: Vec<Setting> = terms.iter().map(|t| t.setting).collect();
    settings.sort();
    settings.dedup();
    Ok(WitnessDecomposition {
        settings_count: settings.len(),
        terms,
    })
}

/// Decomposition matching a witness whose vector lies in span{|00>, |11>}.
pub fn decomposition_for(w: &WitnessOperator) -> Result<WitnessDecomposition> {
    let v = &w.vector;
    let off = v[1].norm().max(v[2].norm());
    if off > 1e-8 {
        return Err(Error::WrongRegime(format!(
            "witness vector has weight {off:e} outside span{{|00>, |11>}}"
        )));
    }
    let (a, b) = (v[0].norm(), v[3].norm());
    let norm = (a * a + b * b).sqrt();
    let theta = (v[3] * v[0].conj()).arg();
    witness_decomposition_phased(a / norm, b / norm, theta)
}

/// Two-qubit matrix `p|00><00| + q|01><01| + s|10><10| + r|01><10| + h.c.`
/// with the `|11><11|` corner set to `1 - p - q - s`.
pub fn single_excitation_block(p: f64, q: f64, s: f64, r: C64) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = re(p);
    m[(1, 1)] = re(q);
    m[(2, 2)] = re(s);
    m[(3, 3)] = re(1.0 - p - q - s);
    m[(1, 2)] = r;
    m[(2, 1)] = r.conj();
    m
}

/// Bell state `(|00> + |11>)/sqrt 2` as a density matrix.
pub fn bell_phi_plus() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = CVector::from_vec(vec![re(h), c64(0.0, 0.0), c64(0.0, 0.0), re(h)]);
    DensityMatrix::from_pure(&v, vec![2, 2]).expect("normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pure(rng: &mut ChaCha8Rng, n: usize) -> CVector {
        let v = CVector::from_fn(n, |_, _| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let nv = v.norm();
        v / re(nv)
    }

    fn random_mixed(rng: &mut ChaCha8Rng) -> DensityMatrix {
        let g = CMatrix::from_fn(4, 4, |_, _| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let m = &g * g.adjoint();
        let tr = m.trace();
        DensityMatrix::new(m / tr, vec![2, 2]).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng) -> CMatrix {
        let h = crate::qcore::tests::random_hermitian(rng, 2);
        hermitian_eigendecomposition(&h).unwrap().propagator(1.0)
    }

    fn product_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
        let a = random_pure(rng, 2);
        let b = random_pure(rng, 2);
        let v = a.kronecker(&b);
        DensityMatrix::from_pure(&v, vec![2, 2]).unwrap()
    }

    #[test]
    fn concurrence_textbook_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = product_state(&mut rng);
            assert!(concurrence(&p).unwrap() < 1e-7);
        }
        assert!((concurrence(&bell_phi_plus()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn concurrence_of_the_optimal_neutron_state() {
        // |mu|^2 = 1/9 on |00>, |nu|^2 = 2/3 and |xi|^2 = 2/9 on the single
        // flips, coherence between them of modulus |nu xi|.
        let nu = (2.0f64 / 3.0).sqrt();
        let xi = (2.0f64 / 9.0).sqrt();
        let m = single_excitation_block(1.0 / 9.0, 2.0 / 3.0, 2.0 / 9.0, re(nu * xi));
        let rho = DensityMatrix::new(m, vec![2, 2]).unwrap();
        let c = concurrence(&rho).unwrap();
        assert!((nu * xi - 0.385).abs() < 1e-3);
        assert!((c - 0.77).abs() < 1e-2, "{c}");
    }

    #[test]
    fn block_form_concurrence_is_twice_the_coherence() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let w: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            // The |11><11| corner must vanish for the block law to hold.
            let sum: f64 = w.iter().sum::<f64>();
            let (p, q, s) = (w[0] / sum, w[1] / sum, w[2] / sum);
            let r = (q * s).sqrt() * rng.gen::<f64>();
            let ph = rng.gen::<f64>() * 6.0;
            let m = single_excitation_block(p, q, s, c64(r * ph.cos(), r * ph.sin()));
            let rho = DensityMatrix::new(m, vec![2, 2]).unwrap();
            assert!((concurrence(&rho).unwrap() - 2.0 * r).abs() < 1e-8);
        }
    }

    #[test]
    fn concurrence_invariant_under_local_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let rho = random_mixed(&mut rng);
            let u = kron(&random_unitary(&mut rng), &random_unitary(&mut rng));
            let rot = DensityMatrix::new(&u * rho.matrix() * u.adjoint(), vec![2, 2]).unwrap();
            let d = (concurrence(&rho).unwrap() - concurrence(&rot).unwrap()).abs();
            assert!(d < 1e-8, "{d}");
        }
    }

    #[test]
    fn concurrence_positive_iff_npt() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            // Mix a random pure state with noise so both sides of the
            // boundary are sampled.
            let psi = random_pure(&mut rng, 4);
            let mix = rng.gen::<f64>();
            let m = &psi * psi.adjoint() * re(mix) + identity(4) * re((1.0 - mix) / 4.0);
            let rho = DensityMatrix::new(m, vec![2, 2]).unwrap();
            let c = concurrence(&rho).unwrap();
            let low = hermitian_eigendecomposition(&partial_transpose(&rho, 0).unwrap())
                .unwrap()
                .values[0];
            if c > 1e-6 {
                assert!(low < 0.0);
            }
            if low < -1e-6 {
                assert!(c > 0.0);
            }
        }
    }

    #[test]
    fn eof_values_and_monotonicity() {
        assert_eq!(eof_from_concurrence(0.0).unwrap(), 0.0);
        assert!((eof_from_concurrence(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((eof_from_concurrence(0.77).unwrap() - 0.68).abs() < 0.01);
        assert!(eof_from_concurrence(1.2).is_err());
        let mut last = -1.0;
        for i in 0..=1000 {
            let e = eof_from_concurrence(i as f64 / 1000.0).unwrap();
            assert!(e >= last);
            last = e;
        }
    }

    #[test]
    fn negativity_and_entropy_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = product_state(&mut rng);
        assert!(log_negativity(&p, 1).unwrap() < 1e-9);
        assert!((log_negativity(&bell_phi_plus(), 1).unwrap() - 1.0).abs() < 1e-9);
        assert!(von_neumann_entropy(&p).unwrap() < 1e-9);
        let half = DensityMatrix::new(identity(2) * re(0.5), vec![2]).unwrap();
        assert!((von_neumann_entropy(&half).unwrap() - 1.0).abs() < 1e-12);
        let red = crate::qcore::partial_trace(&bell_phi_plus(), &[0]).unwrap();
        assert!((von_neumann_entropy(&red).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_witness() {
        let w = witness_from_state(&bell_phi_plus()).unwrap();
        assert!((w.source_eigenvalue + 0.5).abs() < 1e-12);
        // Rank-one projector.
        assert!((w.matrix.trace().re - 1.0).abs() < 1e-10);
        assert!((&w.matrix * &w.matrix - &w.matrix).norm() < 1e-10);
        // Eigenvector lies in the singlet direction.
        assert!(w.vector[0].norm() < 1e-12 && w.vector[3].norm() < 1e-12);
        assert!((w.vector[1].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let val = witness_expectation(&w, &bell_phi_plus(), true).unwrap();
        assert!((val + 0.5).abs() < 1e-12);
    }

    #[test]
    fn separable_mixtures_have_no_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let k = rng.gen_range(1..5);
            let mut m = CMatrix::zeros(4, 4);
            let mut total = 0.0;
            for _ in 0..k {
                let w = rng.gen::<f64>();
                total += w;
                m += product_state(&mut rng).matrix() * re(w);
            }
            let rho = DensityMatrix::new(m / re(total), vec![2, 2]).unwrap();
            assert!(matches!(witness_from_state(&rho), Err(Error::NoNegativeEigenvalue)));
        }
    }

    #[test]
    fn witness_nonnegative_on_product_states() {
        let w = witness_from_state(&bell_phi_plus()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let p = product_state(&mut rng);
            assert!(witness_expectation(&w, &p, true).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn decomposition_reconstructs_measured_observable() {
        let z = witness_decomposition(1.0, 0.0).unwrap();
        assert_eq!(z.terms.len(), 1);
        assert_eq!(z.settings_count, 1);
        assert_eq!(z.terms[0].setting, Setting::Z);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let d = witness_decomposition(h, h).unwrap();
        assert_eq!(d.settings_count, 3);
        let e = CVector::from_vec(vec![re(h), re(0.0), re(0.0), re(h)]);
        let proj = DensityMatrix::from_trusted(&e * e.adjoint(), vec![2, 2]);
        let target = partial_transpose(&proj, 0).unwrap();
        assert!((d.reconstruct() - target).norm() < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let t = rng.gen::<f64>() * std::f64::consts::TAU;
            let theta = rng.gen::<f64>() * std::f64::consts::TAU;
            let (a, b) = (t.cos(), t.sin());
            let e = CVector::from_vec(vec![re(a), re(0.0), re(0.0), c64(b * theta.cos(), b * theta.sin())]);
            let proj = DensityMatrix::from_trusted(&e * e.adjoint(), vec![2, 2]);
            let target = partial_transpose(&proj, 0).unwrap();
            let d = witness_decomposition_phased(a, b, theta).unwrap();
            assert!((d.reconstruct() - target).norm() < 1e-10);
        }
        assert!(matches!(witness_decomposition(0.5, 0.5), Err(Error::NotNormalized(_))));
    }
}
