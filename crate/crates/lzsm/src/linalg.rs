//! Fixed-size complex linear algebra for the three-level model: 3x3 matrices,
//! 9-component vectorized states and 9x9 superoperators.
//!
//! Density matrices are vectorized row-major,
//! `(rho_11, rho_12, rho_13, rho_21, rho_22, rho_23, rho_31, rho_32, rho_33)`,
//! and every superoperator in the crate uses that ordering.

use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use thiserror::Error;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Hermiticity tolerance accepted by [`DensityMatrix::new`] (max-norm).
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Unit-trace tolerance accepted by [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-8;
/// Hermiticity tolerance accepted by [`hermitian_eigenvalues3`].
pub const EIG_HERMITICITY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |M - M^dag| = {defect:.3e} exceeds {tol:.1e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("matrix trace {trace:.12} deviates from 1 by more than {tol:.1e}")]
    NotUnitTrace { trace: f64, tol: f64 },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
}

/// A 3x3 complex matrix, the raw storage for Hamiltonians, density matrices
/// and jump operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3(pub [[Complex64; 3]; 3]);

impl Matrix3 {
    pub fn zeros() -> Self {
        Matrix3([[C_ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = C_ONE;
        }
        m
    }

    /// Builds the matrix from real entries, row by row.
    pub fn from_real(rows: [[f64; 3]; 3]) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = Complex64::new(rows[i][j], 0.0);
            }
        }
        m
    }

    /// Outer product `|ket><bra|` of two real 3-vectors.
    pub fn outer(ket: [f64; 3], bra: [f64; 3]) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = Complex64::new(ket[i] * bra[j], 0.0);
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        m
    }

    /// Largest entry magnitude (max norm).
    pub fn max_abs(&self) -> f64 {
        let mut w = 0.0f64;
        for row in &self.0 {
            for e in row {
                w = w.max(e.norm());
            }
        }
        w
    }

    /// Max-norm of `M - M^dag`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut w = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                w = w.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        w
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|e| e.re.is_finite() && e.im.is_finite())
    }

    /// Real parts of the diagonal.
    pub fn diagonal_re(&self) -> [f64; 3] {
        [self.0[0][0].re, self.0[1][1].re, self.0[2][2].re]
    }
}

impl Add for Matrix3 {
    type Output = Matrix3;
    fn add(self, rhs: Matrix3) -> Matrix3 {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += rhs.0[i][j];
            }
        }
        m
    }
}

impl Sub for Matrix3 {
    type Output = Matrix3;
    fn sub(self, rhs: Matrix3) -> Matrix3 {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] -= rhs.0[i][j];
            }
        }
        m
    }
}

impl Neg for Matrix3 {
    type Output = Matrix3;
    fn neg(self) -> Matrix3 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for Matrix3 {
    type Output = Matrix3;
    fn mul(self, rhs: Matrix3) -> Matrix3 {
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            for k in 0..3 {
                let a = self.0[i][k];
                if a == C_ZERO {
                    continue;
                }
                for j in 0..3 {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

/// A validated physical state: Hermitian within [`HERMITICITY_TOL`] and unit
/// trace within [`TRACE_TOL`]. Positivity is monitored during evolution, not
/// enforced here; the non-secular generator may transiently violate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix3);

impl DensityMatrix {
    pub fn new(m: Matrix3) -> Result<Self, LinalgError> {
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let defect = m.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(LinalgError::NotHermitian {
                defect,
                tol: HERMITICITY_TOL,
            });
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(LinalgError::NotUnitTrace {
                trace: tr.re,
                tol: TRACE_TOL,
            });
        }
        Ok(DensityMatrix(m))
    }

    /// `|k><k|` for a bare basis state, `k` in `0..3`.
    pub fn pure(k: usize) -> Self {
        assert!(k < 3, "basis index out of range");
        let mut m = Matrix3::zeros();
        m.0[k][k] = C_ONE;
        DensityMatrix(m)
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix3 {
        self.0
    }
}

/// Row-major vectorization of a 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector9(pub [Complex64; 9]);

impl StateVector9 {
    pub fn zeros() -> Self {
        StateVector9([C_ZERO; 9])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<usize> for StateVector9 {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// `vec(rho)` in the fixed row-major component ordering.
pub fn vectorize(rho: &DensityMatrix) -> StateVector9 {
    vectorize_matrix(rho.matrix())
}

/// Row-major vectorization of an arbitrary 3x3 matrix.
pub fn vectorize_matrix(m: &Matrix3) -> StateVector9 {
    let mut v = [C_ZERO; 9];
    for i in 0..3 {
        for j in 0..3 {
            v[3 * i + j] = m.0[i][j];
        }
    }
    StateVector9(v)
}

/// Inverse of [`vectorize`]; bit-exact reshuffle.
pub fn devectorize(v: &StateVector9) -> Matrix3 {
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] = v.0[3 * i + j];
        }
    }
    m
}

/// A 9x9 generator acting on vectorized states: `d vec(rho)/dt = L vec(rho)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superoperator9(pub [[Complex64; 9]; 9]);

impl Superoperator9 {
    pub fn zeros() -> Self {
        Superoperator9([[C_ZERO; 9]; 9])
    }

    pub fn identity() -> Self {
        let mut s = Self::zeros();
        for i in 0..9 {
            s.0[i][i] = C_ONE;
        }
        s
    }

    pub fn apply(&self, v: &StateVector9) -> StateVector9 {
        let mut out = [C_ZERO; 9];
        for (i, row) in self.0.iter().enumerate() {
            let mut acc = C_ZERO;
            for (e, x) in row.iter().zip(v.0.iter()) {
                acc += e * x;
            }
            out[i] = acc;
        }
        StateVector9(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        let mut w = 0.0f64;
        for row in &self.0 {
            for e in row {
                w = w.max(e.norm());
            }
        }
        w
    }

    /// Largest magnitude over columns of the trace-row combination
    /// `L[(1,1),:] + L[(2,2),:] + L[(3,3),:]`. Vanishes (relative to the
    /// generator scale) for any trace-annihilating generator.
    pub fn trace_row_defect(&self) -> f64 {
        let mut w = 0.0f64;
        for col in 0..9 {
            let s = self.0[0][col] + self.0[4][col] + self.0[8][col];
            w = w.max(s.norm());
        }
        w
    }
}

impl Add for Superoperator9 {
    type Output = Superoperator9;
    fn add(self, rhs: Superoperator9) -> Superoperator9 {
        let mut m = self;
        for i in 0..9 {
            for j in 0..9 {
                m.0[i][j] += rhs.0[i][j];
            }
        }
        m
    }
}

impl Sub for Superoperator9 {
    type Output = Superoperator9;
    fn sub(self, rhs: Superoperator9) -> Superoperator9 {
        let mut m = self;
        for i in 0..9 {
            for j in 0..9 {
                m.0[i][j] -= rhs.0[i][j];
            }
        }
        m
    }
}

impl Mul for Superoperator9 {
    type Output = Superoperator9;
    fn mul(self, rhs: Superoperator9) -> Superoperator9 {
        let mut m = Superoperator9::zeros();
        for i in 0..9 {
            for k in 0..9 {
                let a = self.0[i][k];
                if a == C_ZERO {
                    continue;
                }
                for j in 0..9 {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl IndexMut<(usize, usize)> for Superoperator9 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Index<(usize, usize)> for Superoperator9 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

/// Superoperator for the map `X -> A X B` in the row-major ordering:
/// `S[(3i+j),(3k+l)] = A[i][k] * B[l][j]`.
pub fn sandwich_superop(a: &Matrix3, b: &Matrix3) -> Superoperator9 {
    let mut s = Superoperator9::zeros();
    add_sandwich(&mut s, a, b, C_ONE);
    s
}

/// Accumulates `coeff * (X -> A X B)` into `target`. Skips zero entries of
/// `A`; the jump operators are rank-1 so this is the assembly hot path.
pub(crate) fn add_sandwich(
    target: &mut Superoperator9,
    a: &Matrix3,
    b: &Matrix3,
    coeff: Complex64,
) {
    for i in 0..3 {
        for k in 0..3 {
            let aik = a.0[i][k];
            if aik == C_ZERO {
                continue;
            }
            let caik = coeff * aik;
            for l in 0..3 {
                for j in 0..3 {
                    let blj = b.0[l][j];
                    if blj == C_ZERO {
                        continue;
                    }
                    target.0[3 * i + j][3 * k + l] += caik * blj;
                }
            }
        }
    }
}

/// Eigenvalues of a Hermitian 3x3 matrix, ascending. The input is
/// symmetrized internally; inputs with a Hermiticity defect beyond
/// [`EIG_HERMITICITY_TOL`] (relative to the matrix scale) are rejected.
///
/// Closed-form solution of the characteristic cubic, polished with two
/// Newton steps to reach ~1e-10 relative accuracy.
pub fn hermitian_eigenvalues3(m: &Matrix3) -> Result<[f64; 3], LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let scale = m.max_abs().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > EIG_HERMITICITY_TOL * scale {
        return Err(LinalgError::NotHermitian {
            defect,
            tol: EIG_HERMITICITY_TOL * scale,
        });
    }
    // Symmetrize; the Hermitian part has real eigenvalues.
    let mut h = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            h.0[i][j] = (m.0[i][j] + m.0[j][i].conj()) * 0.5;
        }
    }

    let q = h.trace().re / 3.0;
    // B = H - q I, traceless.
    let mut b = h;
    for i in 0..3 {
        b.0[i][i] -= Complex64::new(q, 0.0);
    }
    let p2: f64 = b.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>() / 6.0;
    if p2 <= f64::EPSILON * scale * scale * 1e-3 {
        return Ok([q, q, q]);
    }
    let p = p2.sqrt();
    let det_b = det3(&b).re;
    let r = (det_b / (2.0 * p * p * p)).clamp(-1.0, 1.0);
    let theta = r.acos() / 3.0;
    let mut eig = [
        q + 2.0 * p * (theta + 2.0 * std::f64::consts::FRAC_PI_3 * 2.0).cos(),
        q + 2.0 * p * (theta + 2.0 * std::f64::consts::FRAC_PI_3).cos(),
        q + 2.0 * p * theta.cos(),
    ];

    // Newton polish on the characteristic polynomial
    // chi(x) = -x^3 + c2 x^2 - c1 x + c0.
    let c2 = h.trace().re;
    let h2 = h * h;
    let c1 = 0.5 * (c2 * c2 - h2.trace().re);
    let c0 = det3(&h).re;
    for e in eig.iter_mut() {
        for _ in 0..2 {
            let x = *e;
            let chi = -x * x * x + c2 * x * x - c1 * x + c0;
            let dchi = -3.0 * x * x + 2.0 * c2 * x - c1;
            if dchi.abs() > f64::EPSILON * scale * scale {
                let step = chi / dchi;
                if step.abs() <= 1e-3 * scale.max(x.abs()) {
                    *e = x - step;
                }
            }
        }
    }
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(eig)
}

fn det3(m: &Matrix3) -> Complex64 {
    let a = &m.0;
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}
