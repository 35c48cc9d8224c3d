//! Exact rational matrices and their vector action.
//!
//! Sizes are measured in the L1 operator norm (maximum absolute column sum),
//! which is exactly submultiplicative over the rationals. That makes matrix
//! displacement genuinely subadditive, with no slack term, and keeps every
//! comparison in the big-rational domain until a logarithm is required.
//!
//! Products and vector actions detect all-integral operands and run on plain
//! `BigInt`. Rational arithmetic reduces after every operation, and the gcd
//! pass is quadratic in the bit length of the numerators, which grow linearly
//! along an orbit; the integral path keeps long orbits linear per step.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cocycle::CocycleTarget;
use crate::error::{Error, Result};
use crate::numeric::{bigrational_to_f64, ln_bigrational};

/// Integer as a canonical rational; denominator one needs no reduction.
fn int_ratio(n: BigInt) -> BigRational {
    BigRational::new_raw(n, BigInt::one())
}

fn all_integral(entries: &[BigRational]) -> bool {
    entries.iter().all(|e| e.denom().is_one())
}

/// Dense square matrix over the rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    d: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn new(d: usize, entries: Vec<BigRational>) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("matrix dimension must be positive"));
        }
        if entries.len() != d * d {
            return Err(Error::input(format!(
                "expected {} entries for a {d}x{d} matrix, got {}",
                d * d,
                entries.len()
            )));
        }
        Ok(RationalMatrix { d, entries })
    }

    pub fn from_rows(rows: &[Vec<BigRational>]) -> Result<Self> {
        let d = rows.len();
        for row in rows {
            if row.len() != d {
                return Err(Error::input("matrix rows must form a square"));
            }
        }
        Ok(RationalMatrix { d, entries: rows.concat() })
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let conv: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
            .collect();
        RationalMatrix::from_rows(&conv)
    }

    pub fn identity(d: usize) -> Self {
        let mut entries = vec![BigRational::zero(); d * d];
        for i in 0..d {
            entries[i * d + i] = BigRational::one();
        }
        RationalMatrix { d, entries }
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.d + j]
    }

    pub fn rows(&self) -> Vec<Vec<BigRational>> {
        (0..self.d).map(|i| (0..self.d).map(|j| self.entry(i, j).clone()).collect()).collect()
    }

    /// Exact matrix product `self * other`.
    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.d, other.d, "dimension mismatch");
        let d = self.d;
        if all_integral(&self.entries) && all_integral(&other.entries) {
            let mut acc = vec![BigInt::zero(); d * d];
            for i in 0..d {
                for l in 0..d {
                    let a = self.entry(i, l).numer();
                    if a.is_zero() {
                        continue;
                    }
                    for j in 0..d {
                        let b = other.entry(l, j).numer();
                        if !b.is_zero() {
                            acc[i * d + j] += a * b;
                        }
                    }
                }
            }
            return RationalMatrix { d, entries: acc.into_iter().map(int_ratio).collect() };
        }
        let mut entries = vec![BigRational::zero(); d * d];
        for i in 0..d {
            for l in 0..d {
                let a = self.entry(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = other.entry(l, j);
                    if !b.is_zero() {
                        entries[i * d + j] += a * b;
                    }
                }
            }
        }
        RationalMatrix { d, entries }
    }

    pub fn mul_vector(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.d, v.len(), "dimension mismatch");
        if all_integral(&self.entries) && all_integral(v) {
            return (0..self.d)
                .map(|i| {
                    let mut acc = BigInt::zero();
                    for (j, x) in v.iter().enumerate() {
                        let a = self.entry(i, j).numer();
                        if !a.is_zero() && !x.numer().is_zero() {
                            acc += a * x.numer();
                        }
                    }
                    int_ratio(acc)
                })
                .collect();
        }
        (0..self.d)
            .map(|i| {
                let mut acc = BigRational::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.entry(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Exact determinant by fraction-free-ish Gaussian elimination.
    pub fn determinant(&self) -> BigRational {
        let d = self.d;
        let mut m = self.entries.clone();
        let mut det = BigRational::one();
        for col in 0..d {
            let pivot = (col..d).find(|&r| !m[r * d + col].is_zero());
            let Some(pivot) = pivot else {
                return BigRational::zero();
            };
            if pivot != col {
                for j in 0..d {
                    m.swap(col * d + j, pivot * d + j);
                }
                det = -det;
            }
            let pv = m[col * d + col].clone();
            det *= &pv;
            for r in col + 1..d {
                let factor = &m[r * d + col] / &pv;
                if factor.is_zero() {
                    continue;
                }
                for j in col..d {
                    let sub = &factor * &m[col * d + j];
                    m[r * d + j] -= sub;
                }
            }
        }
        det
    }

    /// Exact inverse; the determinant is checked first so the error message
    /// can distinguish singular input from arithmetic bugs.
    pub fn inverse(&self) -> Result<RationalMatrix> {
        let d = self.d;
        if self.determinant().is_zero() {
            return Err(Error::input("matrix is singular"));
        }
        // Gauss-Jordan on [self | I].
        let mut left = self.entries.clone();
        let mut right = RationalMatrix::identity(d).entries;
        for col in 0..d {
            let pivot = (col..d).find(|&r| !left[r * d + col].is_zero()).expect("nonsingular");
            if pivot != col {
                for j in 0..d {
                    left.swap(col * d + j, pivot * d + j);
                    right.swap(col * d + j, pivot * d + j);
                }
            }
            let pv = left[col * d + col].clone();
            for j in 0..d {
                left[col * d + j] /= &pv;
                right[col * d + j] /= &pv;
            }
            for r in 0..d {
                if r != col && !left[r * d + col].is_zero() {
                    let factor = left[r * d + col].clone();
                    for j in 0..d {
                        let l = &factor * &left[col * d + j];
                        left[r * d + j] -= l;
                        let rr = &factor * &right[col * d + j];
                        right[r * d + j] -= rr;
                    }
                }
            }
        }
        Ok(RationalMatrix { d, entries: right })
    }

    /// Maximum absolute column sum, exact.
    pub fn l1_operator_norm(&self) -> BigRational {
        let d = self.d;
        if all_integral(&self.entries) {
            let col = |j: usize| {
                (0..d).map(|i| self.entry(i, j).numer().abs()).fold(BigInt::zero(), |a, b| a + b)
            };
            return int_ratio((0..d).map(col).max().expect("d >= 1"));
        }
        (0..d)
            .map(|j| (0..d).map(|i| self.entry(i, j).abs()).fold(BigRational::zero(), |a, b| a + b))
            .max()
            .expect("d >= 1")
    }

    /// Log of the L1 operator norm.
    pub fn displacement_norm(&self) -> f64 {
        ln_bigrational(&self.l1_operator_norm())
    }

    pub fn trace(&self) -> BigRational {
        (0..self.d).map(|i| self.entry(i, i).clone()).fold(BigRational::zero(), |a, b| a + b)
    }
}

/// Outcome of a spectral radius computation. `exact` marks the closed-form
/// 2x2 route; the iterative route reports convergence instead.
#[derive(Clone, Copy, Debug)]
pub struct SpectralRadius {
    pub value: f64,
    pub exact: bool,
    pub converged: bool,
}

/// Spectral radius. For 2x2 the characteristic polynomial gives the exact
/// answer, complex pairs included. Larger matrices fall back to power
/// iteration on the entrywise absolute value, which upper-bounds the true
/// radius and matches it for nonnegative matrices; the result is flagged.
pub fn spectral_radius(a: &RationalMatrix, max_iter: usize, tol: f64) -> Result<SpectralRadius> {
    if a.dimension() == 2 {
        return Ok(SpectralRadius { value: spectral_radius_2x2(a), exact: true, converged: true });
    }
    let d = a.dimension();
    let abs_entries: Vec<f64> = a.entries.iter().map(|e| bigrational_to_f64(&e.abs())).collect();
    let mut v = vec![1.0f64; d];
    let mut prev = 0.0f64;
    let mut converged = false;
    let mut rho = 0.0f64;
    for _ in 0..max_iter {
        let mut next = vec![0.0f64; d];
        for i in 0..d {
            // A damping identity term stabilizes periodic structure.
            let mut acc = v[i];
            for j in 0..d {
                acc += abs_entries[i * d + j] * v[j];
            }
            next[i] = acc;
        }
        let norm: f64 = next.iter().map(|x| x.abs()).sum();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::input("power iteration degenerated"));
        }
        for x in next.iter_mut() {
            *x /= norm;
        }
        rho = norm - 1.0;
        v = next;
        if (rho - prev).abs() < tol * rho.abs().max(1.0) {
            converged = true;
            break;
        }
        prev = rho;
    }
    Ok(SpectralRadius { value: rho.max(0.0), exact: false, converged })
}

/// Largest root magnitude of `x^2 - t x + det`, handled exactly by case.
fn spectral_radius_2x2(a: &RationalMatrix) -> f64 {
    let t = a.trace();
    let det = a.entry(0, 0) * a.entry(1, 1) - a.entry(0, 1) * a.entry(1, 0);
    let disc = &t * &t - BigRational::from_integer(4.into()) * &det;
    if disc.is_negative() {
        // Complex pair of modulus sqrt(det).
        return bigrational_to_f64(&det).sqrt();
    }
    let tf = bigrational_to_f64(&t).abs();
    let df = bigrational_to_f64(&disc).sqrt();
    let root = (tf + df) / 2.0;
    // max(|l1|, |l2|) with l1 l2 = det: when the larger-magnitude root by the
    // +sqrt branch underestimates (negative det), compare against |det|/root.
    let other = if root > 0.0 { (bigrational_to_f64(&det).abs()) / root } else { 0.0 };
    root.max(other)
}

/// Log of the exact 2x2 spectral radius, precise for large traces where
/// squaring would overflow.
pub fn log_spectral_radius_2x2(a: &RationalMatrix) -> f64 {
    debug_assert_eq!(a.dimension(), 2);
    let t = a.trace();
    let det = a.entry(0, 0) * a.entry(1, 1) - a.entry(0, 1) * a.entry(1, 0);
    let disc = &t * &t - BigRational::from_integer(4.into()) * &det;
    if disc.is_negative() {
        let dv = ln_bigrational(&det);
        return dv / 2.0;
    }
    if t.is_zero() {
        // Roots are +-sqrt(-det) (disc = -4 det >= 0 means det <= 0 here).
        return ln_bigrational(&det.abs()) / 2.0;
    }
    // |lambda_max| = (|t|/2) (1 + sqrt(1 - 4 det / t^2)); the ratio is safe in
    // floating point even when t is huge, because it lives near [0, 1].
    let ratio = bigrational_to_f64(&(BigRational::from_integer(4.into()) * &det / (&t * &t)));
    let ln_half_t = ln_bigrational(&(t.abs() / BigRational::from_integer(2.into())));
    let factor = 1.0 + (1.0 - ratio).max(0.0).sqrt();
    let candidate = ln_half_t + factor.ln();
    // For det < 0 the other root can be larger in magnitude.
    let other_factor = ((1.0 - ratio).max(0.0).sqrt() - 1.0).abs();
    if other_factor > factor {
        ln_half_t + other_factor.ln()
    } else {
        candidate
    }
}

/// Nonzero rational vector a matrix target acts on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixCurve(Vec<BigRational>);

impl MatrixCurve {
    pub fn new(coords: Vec<BigRational>) -> Result<Self> {
        if coords.is_empty() || coords.iter().all(|c| c.is_zero()) {
            return Err(Error::input("curve vector must be nonzero"));
        }
        Ok(MatrixCurve(coords))
    }

    pub fn basis(d: usize, j: usize) -> Self {
        let mut coords = vec![BigRational::zero(); d];
        coords[j] = BigRational::one();
        MatrixCurve(coords)
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.0
    }

    /// L1 norm, exact.
    pub fn size(&self) -> BigRational {
        if all_integral(&self.0) {
            return int_ratio(
                self.0.iter().map(|c| c.numer().abs()).fold(BigInt::zero(), |a, b| a + b),
            );
        }
        self.0.iter().map(|c| c.abs()).fold(BigRational::zero(), |a, b| a + b)
    }
}

/// Named invertible generators acting on rational vectors.
#[derive(Clone, Debug)]
pub struct MatrixTarget {
    d: usize,
    generators: BTreeMap<String, RationalMatrix>,
}

impl MatrixTarget {
    pub fn new(d: usize, generators: BTreeMap<String, RationalMatrix>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::input("matrix target needs at least one generator"));
        }
        for (name, g) in &generators {
            if g.dimension() != d {
                return Err(Error::input(format!(
                    "generator {name} has dimension {}, expected {d}",
                    g.dimension()
                )));
            }
            if g.determinant().is_zero() {
                return Err(Error::input(format!("generator {name} is singular")));
            }
        }
        Ok(MatrixTarget { d, generators })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }
}

impl CocycleTarget for MatrixTarget {
    type Element = RationalMatrix;
    type Curve = MatrixCurve;

    fn identity(&self) -> RationalMatrix {
        RationalMatrix::identity(self.d)
    }

    fn compose(&self, a: &RationalMatrix, b: &RationalMatrix) -> RationalMatrix {
        a.mul(b)
    }

    fn inverse(&self, a: &RationalMatrix) -> Result<RationalMatrix> {
        a.inverse()
    }

    fn act(&self, g: &RationalMatrix, c: &MatrixCurve) -> MatrixCurve {
        MatrixCurve(g.mul_vector(c.coords()))
    }

    fn curve_size(&self, c: &MatrixCurve) -> Result<BigRational> {
        let s = c.size();
        if s.is_zero() {
            return Err(Error::invariant("matrix curve collapsed to zero"));
        }
        Ok(s)
    }

    fn generator(&self, name: &str) -> Option<&RationalMatrix> {
        self.generators.get(name)
    }

    fn generator_names(&self) -> Vec<String> {
        self.generators.keys().cloned().collect()
    }

    fn default_marking_curves(&self) -> Vec<MatrixCurve> {
        (0..self.d).map(|j| MatrixCurve::basis(self.d, j)).collect()
    }

    /// L1 operator-norm displacement over the basis marking is exactly
    /// submultiplicative.
    fn subadditivity_slack(&self) -> f64 {
        0.0
    }

    fn exact_translation_length(&self, g: &RationalMatrix) -> Option<f64> {
        (self.d == 2).then(|| log_spectral_radius_2x2(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shear() -> RationalMatrix {
        RationalMatrix::from_int_rows(&[vec![1, 1], vec![0, 1]]).unwrap()
    }

    fn lower() -> RationalMatrix {
        RationalMatrix::from_int_rows(&[vec![1, 0], vec![1, 1]]).unwrap()
    }

    #[test]
    fn product_matches_hand_computation() {
        let ab = shear().mul(&lower());
        assert_eq!(ab, RationalMatrix::from_int_rows(&[vec![2, 1], vec![1, 1]]).unwrap());
    }

    #[test]
    fn inverse_of_unimodular_matrix() {
        let m = RationalMatrix::from_int_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(inv, RationalMatrix::from_int_rows(&[vec![1, -1], vec![-1, 2]]).unwrap());
        assert_eq!(m.mul(&inv), RationalMatrix::identity(2));
        let singular = RationalMatrix::from_int_rows(&[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn determinants() {
        assert_eq!(shear().determinant(), BigRational::one());
        let m = RationalMatrix::from_int_rows(&[vec![3, 1], vec![1, 1]]).unwrap();
        assert_eq!(m.determinant(), BigRational::from_integer(2.into()));
        let z = RationalMatrix::from_int_rows(&[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(z.determinant().is_zero());
    }

    #[test]
    fn curve_size_is_l1() {
        let c = MatrixCurve::new(vec![
            BigRational::new(BigInt::from(3), BigInt::from(2)),
            BigRational::new(BigInt::from(-1), BigInt::from(2)),
        ])
        .unwrap();
        assert_eq!(c.size(), BigRational::from_integer(2.into()));
        assert!(MatrixCurve::new(vec![BigRational::zero()]).is_err());
    }

    #[test]
    fn displacement_norm_is_max_column_log() {
        let m = RationalMatrix::from_int_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        assert!((m.displacement_norm() - 3.0f64.ln()).abs() < 1e-14);
        assert_eq!(RationalMatrix::identity(3).displacement_norm(), 0.0);
    }

    #[test]
    fn norm_is_exactly_submultiplicative() {
        let a = RationalMatrix::from_int_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        let b = shear();
        let lhs = a.mul(&b).l1_operator_norm();
        let rhs = a.l1_operator_norm() * b.l1_operator_norm();
        assert!(lhs <= rhs);
    }

    #[test]
    fn spectral_radius_exact_cases() {
        let id = RationalMatrix::identity(2);
        let r = spectral_radius(&id, 1000, 1e-12).unwrap();
        assert!(r.exact);
        assert_eq!(r.value, 1.0);

        let m = RationalMatrix::from_int_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        let rho = spectral_radius(&m, 1000, 1e-12).unwrap();
        let expected = (3.0 + 5.0f64.sqrt()) / 2.0;
        assert!((rho.value - expected).abs() < 1e-12);

        // Rotation by a quarter turn: complex eigenvalues of modulus one.
        let rot = RationalMatrix::from_int_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        let r = spectral_radius(&rot, 1000, 1e-12).unwrap();
        assert_eq!(r.value, 1.0);

        let shear_rho = spectral_radius(&shear(), 1000, 1e-12).unwrap();
        assert_eq!(shear_rho.value, 1.0);
    }

    #[test]
    fn log_spectral_radius_matches_direct_value() {
        for m in [
            RationalMatrix::from_int_rows(&[vec![2, 1], vec![1, 1]]).unwrap(),
            shear(),
            lower(),
            RationalMatrix::from_int_rows(&[vec![0, 1], vec![-1, 0]]).unwrap(),
            RationalMatrix::from_int_rows(&[vec![3, 2], vec![4, 3]]).unwrap(),
            RationalMatrix::from_int_rows(&[vec![0, 2], vec![3, 0]]).unwrap(),
            RationalMatrix::from_int_rows(&[vec![-2, -1], vec![-1, -1]]).unwrap(),
        ] {
            let direct = spectral_radius(&m, 10, 1e-12).unwrap().value;
            let viaf = log_spectral_radius_2x2(&m).exp();
            assert!(
                (direct - viaf).abs() < 1e-10 * direct.max(1.0),
                "mismatch for {m:?}: {direct} vs {viaf}"
            );
        }
    }

    #[test]
    fn iterative_radius_for_larger_nonnegative_matrix() {
        let m = RationalMatrix::from_int_rows(&[
            vec![2, 1, 0],
            vec![1, 1, 0],
            vec![0, 0, 1],
        ])
        .unwrap();
        let r = spectral_radius(&m, 100_000, 1e-13).unwrap();
        assert!(!r.exact);
        assert!(r.converged);
        let expected = (3.0 + 5.0f64.sqrt()) / 2.0;
        assert!((r.value - expected).abs() < 1e-9);
    }

    #[test]
    fn target_rejects_bad_generators() {
        let mut gens = BTreeMap::new();
        gens.insert("A".to_string(), RationalMatrix::from_int_rows(&[vec![1, 2], vec![2, 4]]).unwrap());
        assert!(MatrixTarget::new(2, gens).is_err());
        assert!(MatrixTarget::new(2, BTreeMap::new()).is_err());
        let mut wrong_dim = BTreeMap::new();
        wrong_dim.insert("A".to_string(), RationalMatrix::identity(3));
        assert!(MatrixTarget::new(2, wrong_dim).is_err());
    }
}
