//! Order-4 symmetric tensor algebra in 2D.
//!
//! Symmetric 2x2 matrices are represented by their three independent
//! components. Order-4 tensors with major/minor symmetry act on them through
//! a 3x3 matrix expressed in the orthonormal basis
//! `(E11, E22, (E12 + E21)/sqrt(2))` of symmetric matrices. In this basis the
//! identity tensor is the 3x3 identity, the dilatation tensor `I (x) I` is
//! `[[1,1,0],[1,1,0],[0,0,0]]` and the three anisotropic directions are the
//! axis projections `diag(1,0,0)`, `diag(0,1,0)`, `diag(0,0,1)`. The scaling
//! by `1/sqrt(2)` on the shear component makes the double-dot product of
//! matrices equal to the Euclidean product of their coordinate vectors.

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Symmetric 2x2 matrix stored as `(a11, a22, a12)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat2<T> {
    pub a11: T,
    pub a22: T,
    pub a12: T,
}

impl<T: Scalar> SymMat2<T> {
    pub fn new(a11: T, a22: T, a12: T) -> Self {
        Self { a11, a22, a12 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Identity matrix.
    pub fn identity() -> Self {
        Self::new(T::one(), T::one(), T::zero())
    }

    pub fn trace(&self) -> T {
        self.a11 + self.a22
    }

    /// Coordinates in the orthonormal Voigt basis.
    #[inline]
    pub fn to_voigt(&self) -> [T; 3] {
        [self.a11, self.a22, cast::<T>(std::f64::consts::SQRT_2) * self.a12]
    }

    #[inline]
    pub fn from_voigt(v: [T; 3]) -> Self {
        Self::new(v[0], v[1], v[2] / cast::<T>(std::f64::consts::SQRT_2))
    }

    /// Frobenius norm, counting the off-diagonal twice.
    pub fn norm(&self) -> T {
        (self.a11 * self.a11 + self.a22 * self.a22 + (self.a12 * self.a12 + self.a12 * self.a12))
            .sqrt()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.a11 + other.a11, self.a22 + other.a22, self.a12 + other.a12)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.a11 - other.a11, self.a22 - other.a22, self.a12 - other.a12)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.a11 * s, self.a22 * s, self.a12 * s)
    }

    /// Matrix-vector product `A g`.
    pub fn mul_vec(&self, g: [T; 2]) -> [T; 2] {
        [
            self.a11 * g[0] + self.a12 * g[1],
            self.a12 * g[0] + self.a22 * g[1],
        ]
    }
}

/// Full double-dot product `A : B = sum_ij A_ij B_ij`.
pub fn frob_dd<T: Scalar>(a: &SymMat2<T>, b: &SymMat2<T>) -> T {
    a.a11 * b.a11 + a.a22 * b.a22 + (a.a12 * b.a12 + a.a12 * b.a12)
}

/// The canonical tensors used by the coefficient models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalKind {
    /// Identity on symmetric matrices.
    Ident,
    /// Dilatation tensor `I (x) I`, i.e. `A -> tr(A) I`.
    Dilat,
    /// Projection on the `A11` block.
    C1,
    /// Projection on the `A22` block.
    C2,
    /// Projection on the symmetrized off-diagonal block.
    C3,
}

/// Order-4 tensor with major symmetry, as a symmetric 3x3 Voigt matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor4Sym<T> {
    /// Row-major 3x3 matrix in the orthonormal Voigt basis.
    pub v: [[T; 3]; 3],
}

impl<T: Scalar> Tensor4Sym<T> {
    pub fn from_voigt(v: [[T; 3]; 3]) -> Self {
        Self { v }
    }

    pub fn zero() -> Self {
        Self { v: [[T::zero(); 3]; 3] }
    }

    /// Applies the tensor to a symmetric matrix: `T : A`.
    pub fn apply(&self, a: &SymMat2<T>) -> SymMat2<T> {
        let x = a.to_voigt();
        let mut y = [T::zero(); 3];
        for i in 0..3 {
            y[i] = self.v[i][0] * x[0] + self.v[i][1] * x[1] + self.v[i][2] * x[2];
        }
        SymMat2::from_voigt(y)
    }

    /// Voigt transpose (adjoint with respect to the double-dot product).
    pub fn transpose(&self) -> Self {
        let mut v = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                v[i][j] = self.v[j][i];
            }
        }
        Self { v }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut v = self.v;
        for i in 0..3 {
            for j in 0..3 {
                v[i][j] += other.v[i][j];
            }
        }
        Self { v }
    }

    pub fn scale(&self, s: T) -> Self {
        let mut v = self.v;
        for row in v.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        Self { v }
    }

    /// Operator norm bound: Frobenius norm of the Voigt matrix.
    pub fn norm_bound(&self) -> T {
        let mut s = T::zero();
        for row in &self.v {
            for &x in row {
                s += x * x;
            }
        }
        s.sqrt()
    }

    /// Checks positive definiteness on symmetric matrices (ellipticity)
    /// by a Cholesky factorization of the Voigt matrix.
    pub fn is_elliptic(&self) -> bool {
        let mut m = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.v[i][j];
            }
        }
        for k in 0..3 {
            if m[k][k] <= T::zero() {
                return false;
            }
            let d = m[k][k].sqrt();
            for i in k..3 {
                m[i][k] = m[i][k] / d;
            }
            for i in (k + 1)..3 {
                for j in (k + 1)..=i {
                    let upd = m[i][k] * m[j][k];
                    m[i][j] = m[i][j] - upd;
                }
            }
        }
        true
    }
}

/// Returns one of the canonical tensors in exact Voigt form.
pub fn canonical<T: Scalar>(kind: CanonicalKind) -> Tensor4Sym<T> {
    let o = T::zero();
    let l = T::one();
    let v = match kind {
        CanonicalKind::Ident => [[l, o, o], [o, l, o], [o, o, l]],
        CanonicalKind::Dilat => [[l, l, o], [l, l, o], [o, o, o]],
        CanonicalKind::C1 => [[l, o, o], [o, o, o], [o, o, o]],
        CanonicalKind::C2 => [[o, o, o], [o, l, o], [o, o, o]],
        CanonicalKind::C3 => [[o, o, o], [o, o, o], [o, o, l]],
    };
    Tensor4Sym::from_voigt(v)
}

/// Lame coefficient pair for isotropic media.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoParams<T> {
    pub mu: T,
    pub lambda: T,
}

impl<T: Scalar> IsoParams<T> {
    pub fn new(mu: T, lambda: T) -> Self {
        Self { mu, lambda }
    }
}

/// Builds the isotropic tensor `2 mu Ident + lambda Dilat`.
///
/// Rejects `mu <= 0` (the shear part carries the ellipticity).
pub fn make_isotropic<T: Scalar>(p: IsoParams<T>) -> Result<Tensor4Sym<T>> {
    if p.mu <= T::zero() {
        return Err(Error::InvalidArgument(format!(
            "isotropic tensor needs mu > 0, got {}",
            p.mu
        )));
    }
    let two = cast::<T>(2.0);
    Ok(canonical::<T>(CanonicalKind::Ident)
        .scale(two * p.mu)
        .add(&canonical::<T>(CanonicalKind::Dilat).scale(p.lambda)))
}

/// Model tensors for the three coefficient decompositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientModel {
    /// `C = mu Ident`, one unknown field.
    Shear,
    /// `C = 2 mu Ident + lambda Dilat`, two unknown fields.
    Lame,
    /// `C = mu1 C1 + mu2 C2 + mu3 C3`, three unknown fields.
    Aniso,
}

impl CoefficientModel {
    /// The known constant directions multiplying each unknown field.
    pub fn tensors<T: Scalar>(&self) -> Vec<Tensor4Sym<T>> {
        match self {
            CoefficientModel::Shear => vec![canonical(CanonicalKind::Ident)],
            CoefficientModel::Lame => vec![
                canonical::<T>(CanonicalKind::Ident).scale(cast::<T>(2.0)),
                canonical(CanonicalKind::Dilat),
            ],
            CoefficientModel::Aniso => vec![
                canonical(CanonicalKind::C1),
                canonical(CanonicalKind::C2),
                canonical(CanonicalKind::C3),
            ],
        }
    }

    /// Number of unknown coefficient fields.
    pub fn num_coefficients(&self) -> usize {
        match self {
            CoefficientModel::Shear => 1,
            CoefficientModel::Lame => 2,
            CoefficientModel::Aniso => 3,
        }
    }

    pub fn coefficient_names(&self) -> Vec<&'static str> {
        match self {
            CoefficientModel::Shear => vec!["mu"],
            CoefficientModel::Lame => vec!["mu", "lambda"],
            CoefficientModel::Aniso => vec!["mu1", "mu2", "mu3"],
        }
    }

    /// Combines per-triangle coefficient values into the full tensor.
    pub fn combine<T: Scalar>(&self, coeffs: &[T]) -> Tensor4Sym<T> {
        let dirs = self.tensors::<T>();
        assert_eq!(dirs.len(), coeffs.len());
        let mut out = Tensor4Sym::zero();
        for (dir, &c) in dirs.iter().zip(coeffs) {
            out = out.add(&dir.scale(c));
        }
        out
    }
}

impl std::str::FromStr for CoefficientModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shear" => Ok(CoefficientModel::Shear),
            "lame" => Ok(CoefficientModel::Lame),
            "aniso" => Ok(CoefficientModel::Aniso),
            other => Err(Error::Config(format!(
                "unknown model '{other}' (expected shear, lame or aniso)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn a142() -> SymMat2<f64> {
        SymMat2::new(1.0, 4.0, 2.0)
    }

    #[test]
    fn identity_acts_as_identity() {
        let t = canonical::<f64>(CanonicalKind::Ident);
        let b = t.apply(&a142());
        assert_abs_diff_eq!(b.a11, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.a22, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.a12, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn dilatation_is_trace_projector() {
        let t = canonical::<f64>(CanonicalKind::Dilat);
        let b = t.apply(&a142());
        assert_abs_diff_eq!(b.a11, 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.a22, 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.a12, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn axis_projections() {
        let b1 = canonical::<f64>(CanonicalKind::C1).apply(&a142());
        assert_eq!((b1.a11, b1.a22, b1.a12), (1.0, 0.0, 0.0));
        let b2 = canonical::<f64>(CanonicalKind::C2).apply(&a142());
        assert_eq!((b2.a11, b2.a22, b2.a12), (0.0, 4.0, 0.0));
        let b3 = canonical::<f64>(CanonicalKind::C3).apply(&a142());
        assert_abs_diff_eq!(b3.a11, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b3.a22, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b3.a12, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn projections_sum_to_identity() {
        let a = SymMat2::new(0.3, -1.7, 0.9);
        let sum = canonical::<f64>(CanonicalKind::C1)
            .apply(&a)
            .add(&canonical::<f64>(CanonicalKind::C2).apply(&a))
            .add(&canonical::<f64>(CanonicalKind::C3).apply(&a));
        assert_abs_diff_eq!(sum.a11, a.a11, epsilon = 1e-15);
        assert_abs_diff_eq!(sum.a22, a.a22, epsilon = 1e-15);
        assert_abs_diff_eq!(sum.a12, a.a12, epsilon = 1e-15);
    }

    #[test]
    fn isotropic_voigt_forms() {
        let t = make_isotropic(IsoParams::new(1.0, 0.0)).unwrap();
        assert_eq!(t.v, [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]]);
        let t = make_isotropic(IsoParams::new(1.0, 1.0)).unwrap();
        assert_eq!(t.v, [[3.0, 1.0, 0.0], [1.0, 3.0, 0.0], [0.0, 0.0, 2.0]]);
    }

    #[test]
    fn isotropic_hand_evaluation() {
        // 2 mu A + lambda tr(A) I with mu=2, lambda=3 on A=(1,0,0).
        let t = make_isotropic(IsoParams::new(2.0, 3.0)).unwrap();
        let b = t.apply(&SymMat2::new(1.0, 0.0, 0.0));
        assert_abs_diff_eq!(b.a11, 7.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.a22, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.a12, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn isotropic_rejects_nonpositive_mu() {
        assert!(make_isotropic(IsoParams::new(0.0, 1.0)).is_err());
        assert!(make_isotropic(IsoParams::new(-1.0, 1.0)).is_err());
    }

    #[test]
    fn frob_dd_counts_off_diagonal_twice() {
        let e = SymMat2::new(1.0, 1.0, 0.0);
        assert_eq!(frob_dd(&e, &e), 2.0);
        let s = SymMat2::new(0.0, 0.0, 1.0);
        assert_eq!(frob_dd(&s, &s), 2.0);
        let a = SymMat2::new(1.0, 2.0, 3.0);
        let b = SymMat2::new(4.0, 5.0, 6.0);
        assert_eq!(frob_dd(&a, &b), 50.0);
    }

    #[test]
    fn ellipticity_check() {
        assert!(make_isotropic(IsoParams::new(1.0, 0.5)).unwrap().is_elliptic());
        // Each projection alone is only semidefinite.
        assert!(!canonical::<f64>(CanonicalKind::C1).is_elliptic());
        // Anisotropic combination with positive weights is definite.
        let c = CoefficientModel::Aniso.combine(&[1.0, 2.0, 3.0]);
        assert!(c.is_elliptic());
    }

    #[test]
    fn canonical_tensors_are_self_adjoint() {
        for kind in [
            CanonicalKind::Ident,
            CanonicalKind::Dilat,
            CanonicalKind::C1,
            CanonicalKind::C2,
            CanonicalKind::C3,
        ] {
            let t = canonical::<f64>(kind);
            assert_eq!(t.v, t.transpose().v);
        }
    }

    #[test]
    fn works_in_f32() {
        let t = make_isotropic(IsoParams::new(2.0f32, 3.0f32)).unwrap();
        let b = t.apply(&SymMat2::new(1.0f32, 0.0, 0.0));
        assert!((b.a11 - 7.0).abs() < 1e-5);
    }
}
