//! Dense complex linear algebra and quantum-state primitives.
//!
//! Every other module builds on the containers defined here. Matrices are
//! `nalgebra` dense complex matrices; the Hermitian eigensolver is
//! `nalgebra`'s, wrapped so that eigenvalues come back in ascending order
//! together with the input checks the rest of the crate relies on.
//!
//! Tensor products follow one global ordering convention: the leftmost
//! factor is the most significant. A multi-index `(i_0, i_1, ..., i_{k-1})`
//! over factor dimensions `(d_0, ..., d_{k-1})` maps to the flat index
//! `i_0 * d_1 * ... * d_{k-1} + ... + i_{k-1}`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = DVector<C64>;

/// Numerical tolerances shared by the library and its tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximum entrywise `|M - M^dagger|` accepted for Hermitian input.
    pub hermiticity: f64,
    /// Maximum deviation of a norm or trace from one.
    pub norm: f64,
    /// Relative eigen-residual bound, multiplied by the operator norm.
    pub spectral_residual: f64,
}

/// The single tolerance record used across the crate.
pub const TOL: Tolerances = Tolerances {
    hermiticity: 1e-12,
    norm: 1e-10,
    spectral_residual: 1e-10,
};

/// Shorthand for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Real complex number.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `exp(-i x)`.
#[inline]
pub fn phase(x: f64) -> C64 {
    C64::new(x.cos(), -x.sin())
}

/// Identity matrix of dimension `n`.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Pauli x matrix.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])
}

/// Pauli y matrix.
pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[re(0.0), c64(0.0, -1.0), c64(0.0, 1.0), re(0.0)])
}

/// Pauli z matrix. Index 0 is spin up (`sigma_z = +1`).
pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)])
}

/// Tensor product `a ⊗ b` with `a` as the most significant factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entrywise deviation from Hermiticity, `max |M - M^dagger|`.
/// Non-square input reports infinity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Returns `(M + M^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * re(0.5)
}

/// Spectral (largest singular value) norm bound via the Frobenius norm.
fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: CMatrix,
}

impl Eigen {
    /// Dimension of the decomposed operator.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Applies `exp(-i H t)` to `v`.
    pub fn evolve(&self, t: f64, v: &CVector) -> CVector {
        let coeffs = self.vectors.ad_mul(v);
        let scaled = CVector::from_iterator(
            self.dim(),
            coeffs
                .iter()
                .zip(&self.values)
                .map(|(c, &e)| c * phase(e * t)),
        );
        &self.vectors * scaled
    }

    /// The full propagator `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.spectral_map(|e| phase(e * t))
    }

    /// `V f(D) V^dagger` for a scalar function of the eigenvalues.
    pub fn spectral_map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &e) in self.values.iter().enumerate() {
            let fk = f(e);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Largest residual `|H v_k - lambda_k v_k|` over all eigenpairs.
    pub fn max_residual(&self, h: &CMatrix) -> f64 {
        let hv = h * &self.vectors;
        let mut worst = 0.0_f64;
        for k in 0..self.dim() {
            let r = hv.column(k) - self.vectors.column(k) * re(self.values[k]);
            worst = worst.max(r.norm());
        }
        worst
    }
}

/// Hermitian eigen-decomposition with eigenvalues sorted ascending.
///
/// Fails with [`Error::NonHermitianInput`] when `max |h - h^dagger|` exceeds
/// [`TOL`]`.hermiticity`.
pub fn hermitian_eigendecomposition(h: &CMatrix) -> Result<Eigen> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    let defect = hermiticity_defect(h);
    if defect > TOL.hermiticity * frobenius(h).max(1.0) {
        return Err(Error::NonHermitianInput { deviation: defect });
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let hp = hermitian_part(h);
    let eig = hp.clone().symmetric_eigen();
    let mut vectors = eig.eigenvectors;
    // The QR-based solver can return eigenvectors with residuals far above
    // round-off; Jacobi sweeps on the nearly diagonal `V^dagger H V` bring
    // them back to machine precision.
    let mut a = vectors.adjoint() * &hp * &vectors;
    jacobi_polish(&mut a, &mut vectors);
    let diag: Vec<f64> = (0..n).map(|k| a[(k, k)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let values = order.iter().map(|&k| diag[k]).collect();
    let mut sorted = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    Ok(Eigen {
        values,
        vectors: sorted,
    })
}

/// Cyclic complex Jacobi rotations applied to the Hermitian matrix `a`
/// until its off-diagonal part is negligible. Every rotation is also
/// applied to the columns of `v`.
fn jacobi_polish(a: &mut CMatrix, v: &mut CMatrix) {
    let n = a.nrows();
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 || mag < 1e-18 * scale {
                    continue;
                }
                // Phase the q-th basis vector so the (p, q) entry is real.
                let ph = apq.conj() / mag;
                for k in 0..n {
                    a[(k, q)] *= ph;
                    v[(k, q)] *= ph;
                }
                for k in 0..n {
                    a[(q, k)] *= ph.conj();
                }
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * c - akq * s;
                    a[(k, q)] = akp * s + akq * c;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * c - vkq * s;
                    v[(k, q)] = vkp * s + vkq * c;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * c - aqk * s;
                    a[(q, k)] = apk * s + aqk * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }
}

/// Normalized pure state with optional basis labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
    labels: Vec<String>,
}

impl StateVector {
    /// Wraps already-normalized amplitudes; rejects norms off by more than
    /// [`TOL`]`.norm`.
    pub fn new(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if amps.is_empty() || (norm - 1.0).abs() > TOL.norm {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(StateVector {
            amps,
            labels: Vec::new(),
        })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if amps.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(StateVector {
            amps: amps / re(norm),
            labels: Vec::new(),
        })
    }

    /// Basis vector `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange(format!("basis index {index} >= {dim}")));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = re(1.0);
        Ok(StateVector {
            amps,
            labels: Vec::new(),
        })
    }

    /// Attaches one label per basis vector.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    /// Amplitudes in the computational basis.
    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// Basis labels, empty when none were attached.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Euclidean norm of the amplitudes.
    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Rotates the global phase so the first nonzero amplitude is real and
    /// positive.
    pub fn canonical_phase(mut self) -> Self {
        if let Some(first) = self.amps.iter().find(|z| z.norm() > 1e-14) {
            let rot = first.conj() / first.norm();
            self.amps.iter_mut().for_each(|z| *z *= rot);
        }
        self
    }

    /// The projector `|psi><psi|` with the given factor dimensions.
    pub fn density(&self, subsystem_dims: &[usize]) -> Result<DensityMatrix> {
        let m = &self.amps * self.amps.adjoint();
        DensityMatrix::new(m, subsystem_dims.to_vec())
    }

    pub(crate) fn from_raw(amps: CVector, labels: Vec<String>) -> Self {
        StateVector { amps, labels }
    }
}

/// Returns `exp(-i h t) psi`, computed through the eigen-decomposition of `h`.
pub fn evolve_state(h: &CMatrix, t: f64, psi: &StateVector) -> Result<StateVector> {
    if h.nrows() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: psi.dim(),
        });
    }
    let eig = hermitian_eigendecomposition(h)?;
    let out = eig.evolve(t, psi.amplitudes());
    Ok(StateVector::from_raw(out, psi.labels.clone()))
}

/// Density matrix with a declared tensor-factor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity before wrapping `mat`.
    pub fn new(mat: CMatrix, subsystem_dims: Vec<usize>) -> Result<Self> {
        check_dims(mat.nrows(), mat.ncols(), &subsystem_dims)?;
        let defect = hermiticity_defect(&mat);
        if defect > TOL.hermiticity {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL.norm || tr.im.abs() > TOL.norm {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        let eig = hermitian_eigendecomposition(&mat)?;
        if let Some(&low) = eig.values.first() {
            if low < -TOL.norm {
                return Err(Error::InvalidDensityMatrix(format!(
                    "negative eigenvalue {low:e}"
                )));
            }
        }
        Ok(DensityMatrix {
            mat: hermitian_part(&mat),
            dims: subsystem_dims,
        })
    }

    /// Projector onto a pure state given as raw (normalized) amplitudes.
    pub fn from_pure(amps: &CVector, subsystem_dims: Vec<usize>) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > TOL.norm {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        check_dims(amps.len(), amps.len(), &subsystem_dims)?;
        Ok(DensityMatrix {
            mat: amps * amps.adjoint(),
            dims: subsystem_dims,
        })
    }

    /// Wraps a matrix known to be a valid state, only symmetrizing round-off.
    pub(crate) fn from_trusted(mat: CMatrix, dims: Vec<usize>) -> Self {
        DensityMatrix {
            mat: hermitian_part(&mat),
            dims,
        }
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Declared tensor factor dimensions.
    pub fn subsystem_dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total dimension.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigendecomposition(&self.mat)
            .map(|e| e.values)
            .unwrap_or_default()
    }
}

fn check_dims(rows: usize, cols: usize, dims: &[usize]) -> Result<()> {
    if rows != cols {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: cols,
        });
    }
    let prod: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || prod != rows {
        return Err(Error::BadSubsystemSpec(format!(
            "factor dimensions {dims:?} do not multiply to {rows}"
        )));
    }
    Ok(())
}

/// Splits a flat index into its digits over `dims`.
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

/// Maps every flat index to `(kept_index, traced_index)`.
fn split_table(dims: &[usize], keep: &[usize]) -> Vec<(usize, usize)> {
    let n: usize = dims.iter().product();
    let mut d = vec![0; dims.len()];
    (0..n)
        .map(|i| {
            digits(i, dims, &mut d);
            let mut kept = 0;
            let mut traced = 0;
            for (k, &dk) in dims.iter().enumerate() {
                if keep.contains(&k) {
                    kept = kept * dk + d[k];
                } else {
                    traced = traced * dk + d[k];
                }
            }
            (kept, traced)
        })
        .collect()
}

fn validate_keep(dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || sorted.iter().any(|&k| k >= dims.len()) || sorted.is_empty()
    {
        return Err(Error::BadSubsystemSpec(format!(
            "cannot keep {keep:?} out of {} factors",
            dims.len()
        )));
    }
    Ok(sorted)
}

/// Traces out every factor not listed in `keep`. The kept factors retain
/// their original relative order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.subsystem_dims();
    let keep = validate_keep(dims, keep)?;
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let nk: usize = kept_dims.iter().product();
    let nt = rho.dim() / nk;
    let table = split_table(dims, &keep);
    let mut full = vec![0usize; nk * nt];
    for (i, &(a, t)) in table.iter().enumerate() {
        full[a * nt + t] = i;
    }
    let m = rho.matrix();
    let out = CMatrix::from_fn(nk, nk, |a, b| {
        (0..nt)
            .map(|t| m[(full[a * nt + t], full[b * nt + t])])
            .sum()
    });
    Ok(DensityMatrix::from_trusted(out, kept_dims))
}

/// Reduced density matrix of a pure state without forming the full
/// projector. `amps` must be normalized.
pub fn reduce_pure(amps: &CVector, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    check_dims(amps.len(), amps.len(), dims)?;
    let keep = validate_keep(dims, keep)?;
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let nk: usize = kept_dims.iter().product();
    let nt = amps.len() / nk;
    let mut block = CMatrix::zeros(nk, nt);
    for (i, (a, t)) in split_table(dims, &keep).into_iter().enumerate() {
        block[(a, t)] = amps[i];
    }
    let out = &block * block.adjoint();
    Ok(DensityMatrix::from_trusted(out, kept_dims))
}

/// Transposes the indices of one tensor factor.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: usize) -> Result<CMatrix> {
    let dims = rho.subsystem_dims();
    if dims.len() < 2 || subsystem >= dims.len() {
        return Err(Error::BadSubsystemSpec(format!(
            "cannot transpose factor {subsystem} of {dims:?}"
        )));
    }
    let n = rho.dim();
    let stride: usize = dims[subsystem + 1..].iter().product();
    let d = dims[subsystem];
    let digit = |i: usize| (i / stride) % d;
    let m = rho.matrix();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let di = digit(i);
        for j in 0..n {
            let dj = digit(j);
            let i2 = i - di * stride + dj * stride;
            let j2 = j - dj * stride + di * stride;
            out[(i2, j2)] = m[(i, j)];
        }
    }
    Ok(out)
}
