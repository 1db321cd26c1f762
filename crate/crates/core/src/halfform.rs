//! Canonical sections `Θ_s = dz_{s,1} ∧ … ∧ dz_{s,m}` of the adapted complex
//! structures, the hermitian metric `h_s(α, α) ℰ = i^{m²} α ∧ ᾱ`, and the
//! half-form weight `h_{κ_s}(θ_s, θ_s) = √h_s(Θ_s, Θ_s)`.
//!
//! Forms are stored by their coefficients in the coordinate order
//! `(q_1, v_1, …, q_m, v_m)`, which is also the positive orientation.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg};

use num_complex::Complex64;

use crate::affine::{AffineElement, UpperHalfPlanePoint};
use crate::error::{Error, Result};
use crate::phasespace::action_jacobian;

/// Largest `m` handled by the permutation-sum evaluator.
pub const MAX_BRUTE_FORCE_DIM: usize = 3;

/// A constant-coefficient `m`-form written as a wedge of one-forms.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSection {
    m: usize,
    one_forms: Vec<Vec<Complex64>>,
}

impl CanonicalSection {
    /// `Θ_s`, built from `dz_{s,j} = dq_j + s dv_j`.
    pub fn new(s: UpperHalfPlanePoint, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::UnsupportedDimension { m, reason: "need m ≥ 1".into() });
        }
        let s = s.to_complex();
        let one_forms = (0..m)
            .map(|j| {
                let mut row = vec![Complex64::new(0.0, 0.0); 2 * m];
                row[2 * j] = 1.0.into();
                row[2 * j + 1] = s;
                row
            })
            .collect();
        Ok(Self { m, one_forms })
    }

    /// `Θ = Θ_i`.
    pub fn standard(m: usize) -> Result<Self> {
        Self::new(UpperHalfPlanePoint::i(), m)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn one_forms(&self) -> &[Vec<Complex64>] {
        &self.one_forms
    }

    /// Pullback along `A_σ`, one factor at a time.
    pub fn pullback(&self, sigma: &AffineElement) -> Self {
        let jac = action_jacobian(sigma, self.m);
        let n = 2 * self.m;
        let one_forms = self
            .one_forms
            .iter()
            .map(|row| (0..n).map(|j| (0..n).map(|k| row[k] * jac[(k, j)]).sum()).collect())
            .collect();
        Self { m: self.m, one_forms }
    }

    pub fn conj(&self) -> Self {
        Self {
            m: self.m,
            one_forms: self.one_forms.iter().map(|r| r.iter().map(|c| c.conj()).collect()).collect(),
        }
    }

    /// Coefficient of `i^{m²} Θ ∧ Θ̄` against `dq_1 ∧ dv_1 ∧ … ∧ dq_m ∧ dv_m`,
    /// evaluated in floating point.
    pub fn metric_density(&self) -> Result<Complex64> {
        check_dimension(self.m)?;
        let mut rows = self.one_forms.clone();
        rows.extend(self.conj().one_forms);
        let zero = Complex64::new(0.0, 0.0);
        Ok(i_power(self.m * self.m) * top_coefficient(&rows, zero, Complex64::new(1.0, 0.0)))
    }
}

fn check_dimension(m: usize) -> Result<()> {
    if m == 0 || m > MAX_BRUTE_FORCE_DIM {
        return Err(Error::UnsupportedDimension {
            m,
            reason: format!("brute-force wedge evaluation covers 1 ≤ m ≤ {MAX_BRUTE_FORCE_DIM}"),
        });
    }
    Ok(())
}

fn i_power(k: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ][k % 4]
}

/// Coefficient of `α_1 ∧ … ∧ α_n` against the wedge of the coordinate basis,
/// expanded as a signed sum over all permutations.
pub fn top_coefficient<T>(rows: &[Vec<T>], zero: T, one: T) -> T
where
    T: Clone + Add<Output = T> + Mul<Output = T> + Neg<Output = T>,
{
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "need n one-forms in n dimensions");
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = zero;
    let term = |perm: &[usize], even: bool| {
        let product = perm.iter().enumerate().fold(one.clone(), |acc, (k, &p)| acc * rows[k][p].clone());
        if even { product } else { -product }
    };
    // Heap's algorithm: each swap flips the parity.
    let mut even = true;
    let mut counters = vec![0usize; n];
    total = total + term(&perm, even);
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            let j = if i % 2 == 0 { 0 } else { counters[i] };
            perm.swap(j, i);
            even = !even;
            total = total + term(&perm, even);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    total
}

/// Polynomial in `a = Re s`, `b = Im s` with Gaussian-integer coefficients,
/// keyed by the exponents `(deg_a, deg_b)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SPolynomial(BTreeMap<(u32, u32), (i64, i64)>);

impl SPolynomial {
    pub fn constant(re: i64, im: i64) -> Self {
        Self(BTreeMap::new()).plus((0, 0), (re, im))
    }

    /// `s` or `s̄`.
    pub fn s(conjugate: bool) -> Self {
        let sign = if conjugate { -1 } else { 1 };
        Self::constant(0, 0).plus((1, 0), (1, 0)).plus((0, 1), (0, sign))
    }

    fn plus(mut self, key: (u32, u32), c: (i64, i64)) -> Self {
        let e = self.0.entry(key).or_insert((0, 0));
        e.0 += c.0;
        e.1 += c.1;
        if *e == (0, 0) {
            self.0.remove(&key);
        }
        self
    }

    /// Nonzero monomials `((deg_a, deg_b), (re, im))`.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &(i64, i64))> {
        self.0.iter()
    }

    pub fn depends_on_re(&self) -> bool {
        self.0.keys().any(|(da, _)| *da > 0)
    }

    pub fn is_real(&self) -> bool {
        self.0.values().all(|c| c.1 == 0)
    }

    pub fn eval(&self, s: UpperHalfPlanePoint) -> Complex64 {
        self.0
            .iter()
            .map(|(&(da, db), &(re, im))| {
                Complex64::new(re as f64, im as f64) * s.re().powi(da as i32) * s.im().powi(db as i32)
            })
            .sum()
    }
}

impl Add for SPolynomial {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        rhs.0.into_iter().fold(self, |acc, (k, c)| acc.plus(k, c))
    }
}

impl Neg for SPolynomial {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.into_iter().map(|(k, (re, im))| (k, (-re, -im))).collect())
    }
}

impl Mul for SPolynomial {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::default();
        for (&(a1, b1), &(r1, i1)) in &self.0 {
            for (&(a2, b2), &(r2, i2)) in &rhs.0 {
                out = out.plus((a1 + a2, b1 + b2), (r1 * r2 - i1 * i2, r1 * i2 + i1 * r2));
            }
        }
        out
    }
}

/// `i^{m²} Θ_s ∧ Θ̄_s` expanded symbolically in `(Re s, Im s)`.
pub fn density_polynomial(m: usize) -> Result<SPolynomial> {
    check_dimension(m)?;
    let entry = |j: usize, col: usize, conjugate: bool| {
        if col == 2 * j {
            SPolynomial::constant(1, 0)
        } else if col == 2 * j + 1 {
            SPolynomial::s(conjugate)
        } else {
            SPolynomial::default()
        }
    };
    let rows: Vec<Vec<SPolynomial>> = [false, true]
        .into_iter()
        .flat_map(|conj| (0..m).map(move |j| (0..2 * m).map(|col| entry(j, col, conj)).collect()))
        .collect();
    let top = top_coefficient(&rows, SPolynomial::default(), SPolynomial::constant(1, 0));
    let phase = match (m * m) % 4 {
        0 => SPolynomial::constant(1, 0),
        1 => SPolynomial::constant(0, 1),
        2 => SPolynomial::constant(-1, 0),
        _ => SPolynomial::constant(0, -1),
    };
    Ok(phase * top)
}

/// `h_s(Θ_s, Θ_s)` from the brute-force wedge expansion; fails unless the
/// expansion is real and the value positive.
pub fn wedge_density(s: UpperHalfPlanePoint, m: usize) -> Result<f64> {
    let poly = density_polynomial(m)?;
    let value = poly.eval(s);
    if !poly.is_real() || !(value.re > 0.0) {
        return Err(Error::NonFinite(format!("wedge density {value} is not real positive")));
    }
    Ok(value.re)
}

/// `(2 Im s)^m`.
pub fn closed_form_density(s: UpperHalfPlanePoint, m: usize) -> f64 {
    (2.0 * s.im()).powi(m as i32)
}

/// `|h_s(Θ_s, Θ_s) − (Im s)^m h(Θ, Θ)|`, both sides brute force.
pub fn prop32_residual(s: UpperHalfPlanePoint, m: usize) -> Result<f64> {
    let lhs = wedge_density(s, m)?;
    let rhs = s.im().powi(m as i32) * wedge_density(UpperHalfPlanePoint::i(), m)?;
    Ok((lhs - rhs).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfFormWeight {
    pub s: UpperHalfPlanePoint,
    pub m: usize,
    pub value: f64,
}

/// `(2 Im s)^{m/2}`, valid in every dimension.
pub fn halfform_weight(s: UpperHalfPlanePoint, m: usize) -> HalfFormWeight {
    HalfFormWeight {
        s,
        m,
        value: (2.0 * s.im()).powf(m as f64 / 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn s(re: f64, im: f64) -> UpperHalfPlanePoint {
        UpperHalfPlanePoint::new(re, im).unwrap()
    }

    #[test]
    fn one_dimensional_values() {
        assert_eq!(wedge_density(UpperHalfPlanePoint::i(), 1).unwrap(), 2.0);
        assert_eq!(wedge_density(s(0.0, 2.0), 1).unwrap(), 4.0);
        assert_relative_eq!(wedge_density(s(-3.7, 0.6), 1).unwrap(), 1.2, max_relative = 1e-15);
    }

    #[test]
    fn prop32_examples() {
        assert_eq!(prop32_residual(UpperHalfPlanePoint::i(), 2).unwrap(), 0.0);
        assert_eq!(prop32_residual(s(0.0, 3.0), 1).unwrap(), 0.0);
        assert!(prop32_residual(s(1.0, 0.5), 2).unwrap() < 1e-15);
    }

    #[test]
    fn weights() {
        assert_relative_eq!(halfform_weight(UpperHalfPlanePoint::i(), 1).value, 2f64.sqrt());
        assert_eq!(halfform_weight(s(0.0, 2.0), 2).value, 4.0);
        let sp = s(0.3, 0.7);
        for m in 1..=3 {
            let w = halfform_weight(sp, m).value;
            assert_relative_eq!(w * w, wedge_density(sp, m).unwrap(), max_relative = 1e-14);
        }
    }

    #[test]
    fn dimension_limits() {
        assert!(matches!(wedge_density(UpperHalfPlanePoint::i(), 4), Err(Error::UnsupportedDimension { .. })));
        assert!(CanonicalSection::new(UpperHalfPlanePoint::i(), 0).is_err());
        assert_eq!(closed_form_density(s(0.0, 1.5), 5), 243.0);
    }

    #[test]
    fn permutation_sum_is_determinant() {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let rows: Vec<Vec<Complex64>> = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]]
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        assert_eq!(top_coefficient(&rows, zero, one), Complex64::new(18.0, 0.0));
        let swapped = vec![rows[1].clone(), rows[0].clone(), rows[2].clone()];
        assert_eq!(top_coefficient(&swapped, zero, one), Complex64::new(-18.0, 0.0));
    }

    #[test]
    fn symbolic_expansion_drops_real_part() {
        for m in 1..=3 {
            let poly = density_polynomial(m).unwrap();
            assert!(poly.is_real() && !poly.depends_on_re());
            let terms: Vec<_> = poly.terms().collect();
            assert_eq!(terms, vec![(&(0, m as u32), &(1 << m, 0))]);
        }
    }

    #[test]
    fn float_and_symbolic_paths_agree() {
        let sp = s(0.4, 1.3);
        for m in 1..=3 {
            let float = CanonicalSection::new(sp, m).unwrap().metric_density().unwrap();
            assert_relative_eq!(float.re, wedge_density(sp, m).unwrap(), max_relative = 1e-13);
            assert!(float.im.abs() < 1e-13);
        }
    }

    #[test]
    fn sections_are_pullbacks_of_the_standard_one() {
        let sp = s(-1.3, 2.4);
        for m in 1..=3 {
            let pulled = CanonicalSection::standard(m).unwrap().pullback(&AffineElement::sigma_s(sp));
            let direct = CanonicalSection::new(sp, m).unwrap();
            for (a, b) in pulled.one_forms().iter().flatten().zip(direct.one_forms().iter().flatten()) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn prop32_random(re in -5.0..5.0f64, im in 0.1..10.0f64, m in 1usize..=3) {
            let sp = s(re, im);
            let closed = closed_form_density(sp, m);
            let brute = wedge_density(sp, m).unwrap();
            prop_assert!((brute - closed).abs() <= 1e-12 * closed);
            prop_assert!(prop32_residual(sp, m).unwrap() <= 1e-12 * closed);
        }

        #[test]
        fn independent_of_real_part(re in -5.0..5.0f64, im in 0.1..10.0f64, m in 1usize..=3) {
            let a = wedge_density(s(re, im), m).unwrap();
            let b = wedge_density(s(0.0, im), m).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
    }
}
