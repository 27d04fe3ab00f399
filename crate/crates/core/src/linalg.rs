//! Small dense complex linear algebra.
//!
//! Everything here is sized at compile time. Propagators of the lambda
//! system are `Matrix<3>`, the two-level design models use `Matrix<2>`.
//! Because dimensions live in the type, composing mismatched matrices is
//! rejected by the compiler instead of at runtime.

#![allow(clippy::needless_range_loop)]

use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::LinalgError;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Default tolerance for complex equality assertions.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Tolerance on the norm of states passed to [`fidelity`].
pub const NORM_TOL: f64 = 1e-6;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub(crate) fn cis(phase: f64) -> C64 {
    C64::new(libm::cos(phase), libm::sin(phase))
}

/// Dense `N x N` complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix<const N: usize> {
    #[cfg_attr(feature = "serde", serde(with = "serde_rows"))]
    rows: [[C64; N]; N],
}

pub type Mat2 = Matrix<2>;
pub type Mat3 = Matrix<3>;

impl<const N: usize> Matrix<N> {
    pub const fn zeros() -> Self {
        Self { rows: [[ZERO; N]; N] }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.rows[i][i] = ONE;
        }
        m
    }

    pub const fn from_rows(rows: [[C64; N]; N]) -> Self {
        Self { rows }
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.rows[i][j] = C64::new(rows[i][j], 0.0);
            }
        }
        m
    }

    pub fn diagonal(d: [C64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.rows[i][i] = d[i];
        }
        m
    }

    pub fn rows(&self) -> &[[C64; N]; N] {
        &self.rows
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.rows[i][j] = self.rows[j][i].conj();
            }
        }
        m
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut m = *self;
        for row in m.rows.iter_mut() {
            for x in row.iter_mut() {
                *x *= k;
            }
        }
        m
    }

    pub fn scale_re(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.rows[i][i]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.rows.iter().flat_map(|r| r.iter()).fold(0.0, |acc, x| f64::max(acc, x.norm()))
    }

    /// Max-entry distance between two matrices.
    pub fn max_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        (0..N).map(|j| (0..N).map(|i| self.rows[i][j].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flat_map(|r| r.iter()).all(|x| x.re.is_finite() && x.im.is_finite())
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `max |U^dagger U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        (self.dagger() * *self).max_diff(&Self::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() < tol
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn apply(&self, v: &State<N>) -> State<N> {
        let mut out = [ZERO; N];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..N {
                *o += self.rows[i][j] * v.amps[j];
            }
        }
        State { amps: out }
    }

    /// Column `j` as a state vector.
    pub fn column(&self, j: usize) -> State<N> {
        let mut amps = [ZERO; N];
        for (i, a) in amps.iter_mut().enumerate() {
            *a = self.rows[i][j];
        }
        State { amps }
    }

    /// Builds a matrix whose columns are the given states.
    pub fn from_columns(cols: [State<N>; N]) -> Self {
        let mut m = Self::zeros();
        for (j, c) in cols.iter().enumerate() {
            for i in 0..N {
                m.rows[i][j] = c.amps[i];
            }
        }
        m
    }

    /// Solves `self * X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self, LinalgError> {
        let mut a = self.rows;
        let mut b = rhs.rows;
        for col in 0..N {
            let piv = (col..N).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm())).unwrap_or(col);
            if a[piv][col].norm() < 1e-300 {
                return Err(LinalgError::Singular);
            }
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..N {
                let f = a[row][col] / a[col][col];
                for k in col..N {
                    let t = a[col][k];
                    a[row][k] -= f * t;
                }
                for k in 0..N {
                    let t = b[col][k];
                    b[row][k] -= f * t;
                }
            }
        }
        let mut x = [[ZERO; N]; N];
        for k in 0..N {
            for row in (0..N).rev() {
                let mut acc = b[row][k];
                for j in row + 1..N {
                    acc -= a[row][j] * x[j][k];
                }
                x[row][k] = acc / a[row][row];
            }
        }
        Ok(Self { rows: x })
    }
}

impl Mat2 {
    pub fn det(&self) -> C64 {
        let r = &self.rows;
        r[0][0] * r[1][1] - r[0][1] * r[1][0]
    }

    pub fn pauli_x() -> Self {
        Self::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_y() -> Self {
        Self::from_rows([[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, -1.0]])
    }
}

impl Mat3 {
    pub fn det(&self) -> C64 {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Lower-right 2x2 block (rows/columns 1 and 2).
    pub fn lower_block(&self) -> Mat2 {
        let r = &self.rows;
        Mat2::from_rows([[r[1][1], r[1][2]], [r[2][1], r[2][2]]])
    }

    /// Upper-left 2x2 block (rows/columns 0 and 1).
    pub fn upper_block(&self) -> Mat2 {
        let r = &self.rows;
        Mat2::from_rows([[r[0][0], r[0][1]], [r[1][0], r[1][1]]])
    }
}

impl<const N: usize> Default for Matrix<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Index<(usize, usize)> for Matrix<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.rows[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Matrix<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.rows[i][j]
    }
}

impl<const N: usize> Mul for Matrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.rows[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    m.rows[i][j] += a * rhs.rows[k][j];
                }
            }
        }
        m
    }
}

impl<const N: usize> Add for Matrix<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.rows[i][j] += rhs.rows[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Matrix<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.rows[i][j] -= rhs.rows[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Neg for Matrix<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

/// Pure state with `N` complex amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct State<const N: usize> {
    #[cfg_attr(feature = "serde", serde(with = "serde_amps"))]
    amps: [C64; N],
}

pub type State2 = State<2>;
pub type State3 = State<3>;

impl<const N: usize> State<N> {
    pub const fn new(amps: [C64; N]) -> Self {
        Self { amps }
    }

    /// Computational basis vector `|k>`.
    pub fn basis(k: usize) -> Self {
        let mut amps = [ZERO; N];
        amps[k] = ONE;
        Self { amps }
    }

    pub fn from_real(v: [f64; N]) -> Self {
        let mut amps = [ZERO; N];
        for (a, x) in amps.iter_mut().zip(v) {
            *a = C64::new(x, 0.0);
        }
        Self { amps }
    }

    pub fn amps(&self) -> &[C64; N] {
        &self.amps
    }

    pub fn amp(&self, k: usize) -> C64 {
        self.amps[k]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        let mut amps = self.amps;
        for a in amps.iter_mut() {
            *a /= n;
        }
        Self { amps }
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Populations `|c_k|^2`.
    pub fn populations(&self) -> [f64; N] {
        let mut p = [0.0; N];
        for (pk, a) in p.iter_mut().zip(self.amps.iter()) {
            *pk = a.norm_sqr();
        }
        p
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

/// Squared overlap `|<target|actual>|^2`.
///
/// Both states must be normalized to within [`NORM_TOL`].
pub fn fidelity<const N: usize>(target: &State<N>, actual: &State<N>) -> Result<f64, LinalgError> {
    for s in [target, actual] {
        let n = s.norm();
        if n.is_nan() || libm::fabs(n - 1.0) > NORM_TOL {
            return Err(LinalgError::NormError { norm: n });
        }
    }
    Ok(target.inner(actual).norm_sqr().clamp(0.0, 1.0))
}

/// Product `later * earlier`, i.e. `earlier` acts first.
pub fn compose<const N: usize>(later: &Matrix<N>, earlier: &Matrix<N>) -> Matrix<N> {
    *later * *earlier
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
///
/// Returns eigenvalues in ascending order and a unitary whose columns are the
/// matching eigenvectors.
pub fn eigh<const N: usize>(h: &Matrix<N>) -> ([f64; N], Matrix<N>) {
    let mut a = *h;
    let mut v = Matrix::<N>::identity();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..N {
            for q in p + 1..N {
                off += a.rows[p][q].norm_sqr();
            }
        }
        if libm::sqrt(off) <= 1e-17 * scale {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a.rows[p][q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let ph = apq / mag;
                let app = a.rows[p][p].re;
                let aqq = a.rows[q][q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 { 1.0 / (tau + libm::sqrt(1.0 + tau * tau)) } else { -1.0 / (-tau + libm::sqrt(1.0 + tau * tau)) };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // G = D P with D = diag(.., conj(ph) at q, ..)
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = ph.conj() * -s;
                let gqq = ph.conj() * c;
                // A <- A G (columns p, q)
                for k in 0..N {
                    let akp = a.rows[k][p];
                    let akq = a.rows[k][q];
                    a.rows[k][p] = akp * gpp + akq * gqp;
                    a.rows[k][q] = akp * gpq + akq * gqq;
                }
                // A <- G^dagger A (rows p, q)
                for k in 0..N {
                    let apk = a.rows[p][k];
                    let aqk = a.rows[q][k];
                    a.rows[p][k] = gpp.conj() * apk + gqp.conj() * aqk;
                    a.rows[q][k] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a.rows[p][q] = ZERO;
                a.rows[q][p] = ZERO;
                for k in 0..N {
                    let vkp = v.rows[k][p];
                    let vkq = v.rows[k][q];
                    v.rows[k][p] = vkp * gpp + vkq * gqp;
                    v.rows[k][q] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }
    let mut vals = [0.0; N];
    for (i, x) in vals.iter_mut().enumerate() {
        *x = a.rows[i][i].re;
    }
    // insertion sort keeps columns paired with values
    for i in 1..N {
        let mut j = i;
        while j > 0 && vals[j - 1] > vals[j] {
            vals.swap(j - 1, j);
            for k in 0..N {
                v.rows[k].swap(j - 1, j);
            }
            j -= 1;
        }
    }
    (vals, v)
}

/// `exp(-i A t)`.
///
/// Hermitian generators go through [`eigh`], which keeps the result unitary
/// to roundoff. Anything else falls back to scaling-and-squaring with a
/// diagonal Pade approximant.
pub fn mat_exp<const N: usize>(a: &Matrix<N>, t: f64) -> Result<Matrix<N>, LinalgError> {
    if !a.is_finite() || !t.is_finite() {
        return Err(LinalgError::InvalidMatrix);
    }
    let tol = 1e-13 * a.max_abs().max(1.0);
    if a.is_hermitian(tol) {
        Ok(exp_hermitian(a, t))
    } else {
        expm_pade(&a.scale(C64::new(0.0, -t)))
    }
}

/// `exp(-i H t)` for Hermitian `H`, without validation.
pub fn exp_hermitian<const N: usize>(h: &Matrix<N>, t: f64) -> Matrix<N> {
    let (vals, v) = eigh(h);
    let mut d = [ZERO; N];
    for (dk, &lam) in d.iter_mut().zip(vals.iter()) {
        *dk = cis(-lam * t);
    }
    // V diag(d) V^dagger
    let mut out = Matrix::<N>::zeros();
    for i in 0..N {
        for j in 0..N {
            let mut acc = ZERO;
            for k in 0..N {
                acc += v.rows[i][k] * d[k] * v.rows[j][k].conj();
            }
            out.rows[i][j] = acc;
        }
    }
    out
}

/// General `exp(M)` by scaling and squaring with a degree-8 Pade approximant.
pub fn expm_pade<const N: usize>(m: &Matrix<N>) -> Result<Matrix<N>, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::InvalidMatrix);
    }
    const Q: usize = 8;
    let norm = m.norm1();
    let mut s = 0u32;
    if norm > 0.5 {
        s = (libm::ceil(libm::log2(norm / 0.5)) as u32).min(1000);
    }
    let x = m.scale_re(libm::pow(2.0, -(s as f64)));
    let mut c = 1.0;
    let mut num = Matrix::<N>::identity();
    let mut den = Matrix::<N>::identity();
    let mut xk = Matrix::<N>::identity();
    for k in 1..=Q {
        c *= (Q - k + 1) as f64 / (k * (2 * Q - k + 1)) as f64;
        xk = xk * x;
        num = num + xk.scale_re(c);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        den = den + xk.scale_re(sign * c);
    }
    let mut e = den.solve(&num)?;
    for _ in 0..s {
        e = e * e;
    }
    Ok(e)
}

/// Unit vector on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlochAxis {
    nx: f64,
    ny: f64,
    nz: f64,
}

impl BlochAxis {
    /// Accepts components whose squared norm is within `1e-12` of one.
    pub fn new(nx: f64, ny: f64, nz: f64) -> Result<Self, LinalgError> {
        let n2 = nx * nx + ny * ny + nz * nz;
        if !n2.is_finite() || libm::fabs(n2 - 1.0) > 1e-12 {
            return Err(LinalgError::AxisNotNormalized { norm_sqr: n2 });
        }
        Ok(Self { nx, ny, nz })
    }

    /// Normalizes an arbitrary nonzero direction.
    pub fn from_direction(nx: f64, ny: f64, nz: f64) -> Result<Self, LinalgError> {
        let n = libm::sqrt(nx * nx + ny * ny + nz * nz);
        if !(n > 0.0 && n.is_finite()) {
            return Err(LinalgError::AxisNotNormalized { norm_sqr: n * n });
        }
        Ok(Self { nx: nx / n, ny: ny / n, nz: nz / n })
    }

    pub fn x() -> Self {
        Self { nx: 1.0, ny: 0.0, nz: 0.0 }
    }

    pub fn z() -> Self {
        Self { nx: 0.0, ny: 0.0, nz: 1.0 }
    }

    /// Rotation axis of a dark/bright phase gate in the `{g, f}` plane.
    ///
    /// For mixing angle `phi` and relative phase `theta_sp` the gate
    /// `|d><d| + e^{i Phi}|b><b|` equals `e^{i Phi/2}` times
    /// [`bloch_rotation`] about this axis by `Phi/2`. The polar angle is
    /// `2 phi` since the ground-space populations of the bright state are
    /// `sin^2 phi` and `cos^2 phi`.
    pub fn from_mixing(phi: f64, theta_sp: f64) -> Self {
        let s2 = libm::sin(2.0 * phi);
        Self { nx: -s2 * libm::cos(theta_sp), ny: s2 * libm::sin(theta_sp), nz: libm::cos(2.0 * phi) }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.nx, self.ny, self.nz]
    }

    /// `n . sigma`.
    pub fn sigma(&self) -> Mat2 {
        Mat2::pauli_x().scale_re(self.nx) + Mat2::pauli_y().scale_re(self.ny) + Mat2::pauli_z().scale_re(self.nz)
    }
}

/// `cos(angle) I - i sin(angle) (n . sigma)`, i.e. `exp(-i angle n.sigma)`.
///
/// The determinant is exactly one; no global phase is attached.
pub fn bloch_rotation(axis: &BlochAxis, angle: f64) -> Mat2 {
    let c = libm::cos(angle);
    let s = libm::sin(angle);
    Mat2::identity().scale_re(c) + axis.sigma().scale(C64::new(0.0, -s))
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    use core::f64::consts::{PI, TAU};
    let mut y = libm::fmod(x, TAU);
    if y <= -PI {
        y += TAU;
    } else if y > PI {
        y -= TAU;
    }
    y
}

#[cfg(feature = "serde")]
mod serde_rows {
    use super::C64;
    use alloc::vec::Vec;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(rows: &[[C64; N]; N], s: S) -> Result<S::Ok, S::Error> {
        let flat: Vec<[f64; 2]> = rows.iter().flat_map(|r| r.iter().map(|c| [c.re, c.im])).collect();
        flat.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[[C64; N]; N], D::Error> {
        let flat: Vec<[f64; 2]> = Vec::deserialize(d)?;
        if flat.len() != N * N {
            return Err(serde::de::Error::invalid_length(flat.len(), &"N*N entries"));
        }
        let mut rows = [[C64::new(0.0, 0.0); N]; N];
        for (k, [re, im]) in flat.into_iter().enumerate() {
            rows[k / N][k % N] = C64::new(re, im);
        }
        Ok(rows)
    }
}

#[cfg(feature = "serde")]
mod serde_amps {
    use super::C64;
    use alloc::vec::Vec;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(amps: &[C64; N], s: S) -> Result<S::Ok, S::Error> {
        let flat: Vec<[f64; 2]> = amps.iter().map(|c| [c.re, c.im]).collect();
        flat.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[C64; N], D::Error> {
        let flat: Vec<[f64; 2]> = Vec::deserialize(d)?;
        if flat.len() != N {
            return Err(serde::de::Error::invalid_length(flat.len(), &"N amplitudes"));
        }
        let mut amps = [C64::new(0.0, 0.0); N];
        for (a, [re, im]) in amps.iter_mut().zip(flat) {
            *a = C64::new(re, im);
        }
        Ok(amps)
    }
}
