//! The trivial prequantum line bundle `E = N × C` with frame `ϑ(x) = (x, 1)`
//! and connection `∇_ζ (f ϑ) = (ζ f + i a(ζ) f) ϑ`, where `da = −ω`.
//!
//! Forms carry integer polynomial coefficients so that `da + ω = 0` and the
//! curvature identity can be checked without rounding. Variables are indexed
//! `q_j ↦ j`, `v_j ↦ m + j`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::l2space::GridFunction;

/// Polynomial in `(q_1, …, q_m, v_1, …, v_m)` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    vars: usize,
    terms: BTreeMap<Vec<u32>, i64>,
}

impl Polynomial {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: i64) -> Self {
        Self::zero(vars).plus(vec![0; vars], c)
    }

    /// `c · x_var`.
    pub fn variable(vars: usize, var: usize, c: i64) -> Self {
        let mut exps = vec![0; vars];
        exps[var] = 1;
        Self::zero(vars).plus(exps, c)
    }

    fn plus(mut self, exps: Vec<u32>, c: i64) -> Self {
        let e = self.terms.entry(exps.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&exps);
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        other.terms.iter().fold(self.clone(), |acc, (e, c)| acc.plus(e.clone(), *c))
    }

    pub fn neg(&self) -> Self {
        Self {
            vars: self.vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.vars);
        for (exps, c) in &self.terms {
            if exps[var] > 0 {
                let mut e = exps.clone();
                e[var] -= 1;
                out = out.plus(e, c * exps[var] as i64);
            }
        }
        out
    }

    /// Largest absolute coefficient.
    pub fn max_coefficient(&self) -> i64 {
        self.terms.values().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, q: &[f64], v: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(exps, c)| {
                let mono: f64 = exps
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| if k < q.len() { q[k] } else { v[k - q.len()] }.powi(p as i32))
                    .product();
                *c as f64 * mono
            })
            .sum()
    }
}

/// `Σ_k c_k dx_k` over the `2m` coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneForm {
    m: usize,
    coefficients: Vec<Polynomial>,
}

/// `Σ_{k<l} c_{kl} dx_k ∧ dx_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoForm {
    m: usize,
    coefficients: BTreeMap<(usize, usize), Polynomial>,
}

impl OneForm {
    pub fn new(m: usize, coefficients: Vec<Polynomial>) -> Result<Self> {
        if coefficients.len() != 2 * m || coefficients.iter().any(|c| c.vars != 2 * m) {
            return Err(Error::InvalidArgument(format!("a one-form on a {}-manifold needs {} coefficients", 2 * m, 2 * m)));
        }
        Ok(Self { m, coefficients })
    }

    pub fn coefficient(&self, var: usize) -> &Polynomial {
        &self.coefficients[var]
    }

    /// Exterior derivative.
    pub fn d(&self) -> TwoForm {
        let mut out = TwoForm::zero(self.m);
        for (l, c) in self.coefficients.iter().enumerate() {
            for k in 0..2 * self.m {
                // ∂_k c dx_k ∧ dx_l
                out.add_term(k, l, &c.derivative(k));
            }
        }
        out
    }
}

impl TwoForm {
    pub fn zero(m: usize) -> Self {
        Self { m, coefficients: BTreeMap::new() }
    }

    fn add_term(&mut self, k: usize, l: usize, c: &Polynomial) {
        if k == l || c.is_zero() {
            return;
        }
        let (key, c) = if k < l { ((k, l), c.clone()) } else { ((l, k), c.neg()) };
        let entry = self.coefficients.entry(key).or_insert_with(|| Polynomial::zero(2 * self.m));
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.coefficients.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(k, l), c) in &other.coefficients {
            out.add_term(k, l, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn max_coefficient(&self) -> i64 {
        self.coefficients.values().map(Polynomial::max_coefficient).max().unwrap_or(0)
    }

    /// `ω(∂_k, ∂_l)` as a polynomial.
    pub fn pair(&self, k: usize, l: usize) -> Polynomial {
        let zero = Polynomial::zero(2 * self.m);
        if k < l {
            self.coefficients.get(&(k, l)).cloned().unwrap_or(zero)
        } else if k > l {
            self.coefficients.get(&(l, k)).map(Polynomial::neg).unwrap_or(zero)
        } else {
            zero
        }
    }
}

/// `ω = Σ_j dv_j ∧ dq_j`.
pub fn symplectic_form(m: usize) -> TwoForm {
    let mut omega = TwoForm::zero(m);
    for j in 0..m {
        omega.add_term(m + j, j, &Polynomial::constant(2 * m, 1));
    }
    omega
}

/// Coordinate direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Q(usize),
    V(usize),
}

impl Coordinate {
    fn var(self, m: usize) -> usize {
        match self {
            Coordinate::Q(j) => j,
            Coordinate::V(j) => m + j,
        }
    }
}

/// The potential one-form `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionPotential {
    form: OneForm,
}

impl ConnectionPotential {
    /// `a = −Σ_j v_j dq_j`.
    pub fn standard(m: usize) -> Self {
        let mut coefficients = vec![Polynomial::zero(2 * m); 2 * m];
        for (j, c) in coefficients.iter_mut().enumerate().take(m) {
            *c = Polynomial::variable(2 * m, m + j, -1);
        }
        Self { form: OneForm { m, coefficients } }
    }

    pub fn new(form: OneForm) -> Self {
        Self { form }
    }

    pub fn m(&self) -> usize {
        self.form.m
    }

    pub fn form(&self) -> &OneForm {
        &self.form
    }

    /// `da + ω`, zero exactly when `a` is a potential for `−ω`.
    pub fn potential_defect(&self) -> TwoForm {
        self.form.d().add(&symplectic_form(self.form.m))
    }

    /// Curvature of `∇` on coordinate fields, `R(∂_x, ∂_y) = i (∂_x a(∂_y) − ∂_y a(∂_x))`,
    /// returned as the real polynomial multiplying `i`.
    pub fn curvature(&self, x: Coordinate, y: Coordinate) -> Polynomial {
        let m = self.form.m;
        let (kx, ky) = (x.var(m), y.var(m));
        self.form.coefficients[ky]
            .derivative(kx)
            .add(&self.form.coefficients[kx].derivative(ky).neg())
    }

    /// Largest coefficient of `R(∂_x, ∂_y) + i ω(∂_x, ∂_y)` over all pairs of
    /// coordinate fields, divided by `i`. Zero means curvature `−iω` exactly.
    pub fn symbolic_curvature_residual(&self) -> i64 {
        let m = self.form.m;
        let omega = symplectic_form(m);
        let coords: Vec<Coordinate> = (0..m).map(Coordinate::Q).chain((0..m).map(Coordinate::V)).collect();
        let mut worst = 0;
        for &x in &coords {
            for &y in &coords {
                let r = self.curvature(x, y).add(&omega.pair(x.var(m), y.var(m)));
                worst = worst.max(r.max_coefficient());
            }
        }
        worst
    }

    fn eval(&self, dir: Coordinate, q: &[f64], v: &[f64]) -> f64 {
        self.form.coefficients[dir.var(self.form.m)].eval(q, v)
    }
}

/// One term `c · v^p · ∂_dir` of a vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTerm {
    pub coeff: f64,
    pub v_powers: Vec<u32>,
    pub direction: Coordinate,
}

/// Vector field with coefficients polynomial in `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    m: usize,
    terms: Vec<FieldTerm>,
}

impl VectorField {
    pub fn new(m: usize, terms: Vec<FieldTerm>) -> Result<Self> {
        for t in &terms {
            let j = match t.direction {
                Coordinate::Q(j) | Coordinate::V(j) => j,
            };
            if j >= m || t.v_powers.len() != m || !t.coeff.is_finite() {
                return Err(Error::InvalidArgument(format!("bad vector field term {t:?} for m = {m}")));
            }
        }
        Ok(Self { m, terms })
    }

    pub fn coordinate(m: usize, direction: Coordinate) -> Result<Self> {
        Self::new(m, vec![FieldTerm { coeff: 1.0, v_powers: vec![0; m], direction }])
    }

    fn weighted(m: usize, make: fn(usize) -> Coordinate) -> Self {
        let terms = (0..m)
            .map(|j| {
                let mut v_powers = vec![0; m];
                v_powers[j] = 1;
                FieldTerm { coeff: 1.0, v_powers, direction: make(j) }
            })
            .collect();
        Self { m, terms }
    }

    /// `𝒳 = Σ v_j ∂/∂q_j`.
    pub fn geodesic(m: usize) -> Self {
        Self::weighted(m, Coordinate::Q)
    }

    /// `𝒴 = Σ v_j ∂/∂v_j`.
    pub fn euler(m: usize) -> Self {
        Self::weighted(m, Coordinate::V)
    }

    pub fn terms(&self) -> &[FieldTerm] {
        &self.terms
    }

    /// `ζ f` on the grid: spectral in `q`, fourth-order differences in `v`.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        let mut out = GridFunction::zero(f.spec());
        for t in &self.terms {
            let d = match t.direction {
                Coordinate::Q(j) => f.d_q(j),
                Coordinate::V(j) => f.d_v(j),
            };
            let weighted = d.multiply(|_, v| Complex64::new(t.coeff * monomial(v, &t.v_powers), 0.0));
            out = out.add_scaled(1.0.into(), &weighted)?;
        }
        Ok(out)
    }

    /// `a(ζ)` at a point.
    pub fn contract(&self, a: &ConnectionPotential, q: &[f64], v: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * monomial(v, &t.v_powers) * a.eval(t.direction, q, v))
            .sum()
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if f.spec().m() != self.m {
            return Err(Error::BackendMismatch(format!(
                "vector field on m = {} applied to a grid with m = {}",
                self.m,
                f.spec().m()
            )));
        }
        Ok(())
    }
}

fn monomial(v: &[f64], powers: &[u32]) -> f64 {
    v.iter().zip(powers).map(|(x, &p)| x.powi(p as i32)).product()
}

/// `∇_ζ f = ζ f + i a(ζ) f`; requires `f` to vanish near the window edges.
pub fn covariant_derivative(a: &ConnectionPotential, zeta: &VectorField, f: &GridFunction) -> Result<GridFunction> {
    f.ensure_decayed()?;
    covariant_derivative_unchecked(a, zeta, f)
}

/// As [`covariant_derivative`] without the edge check; values within two
/// cells of the window edge use lower-order stencils.
pub fn covariant_derivative_unchecked(
    a: &ConnectionPotential,
    zeta: &VectorField,
    f: &GridFunction,
) -> Result<GridFunction> {
    if a.m() != zeta.m {
        return Err(Error::BackendMismatch("potential and vector field dimensions differ".into()));
    }
    let derivative = zeta.apply(f)?;
    let potential = f.multiply(|q, v| Complex64::new(0.0, zeta.contract(a, q, v)));
    derivative.add_scaled(1.0.into(), &potential)
}

/// `max ‖R(∂_x, ∂_y) f + i ω(∂_x, ∂_y) f‖ / ‖f‖` over pairs of coordinate
/// fields, with `R = [∇_x, ∇_y]` computed on the grid.
pub fn curvature_residual(a: &ConnectionPotential, f: &GridFunction) -> Result<f64> {
    let m = f.spec().m();
    if a.m() != m {
        return Err(Error::BackendMismatch("potential and grid dimensions differ".into()));
    }
    let norm = f.norm()?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    let omega = symplectic_form(m);
    let coords: Vec<Coordinate> = (0..m).map(Coordinate::Q).chain((0..m).map(Coordinate::V)).collect();
    let mut worst: f64 = 0.0;
    for (ix, &x) in coords.iter().enumerate() {
        for &y in &coords[ix + 1..] {
            let zx = VectorField::coordinate(m, x)?;
            let zy = VectorField::coordinate(m, y)?;
            let xy = covariant_derivative(a, &zx, &covariant_derivative(a, &zy, f)?)?;
            let yx = covariant_derivative(a, &zy, &covariant_derivative(a, &zx, f)?)?;
            let w = omega.pair(x.var(m), y.var(m)).eval(&vec![0.0; m], &vec![0.0; m]);
            let residual = xy.sub(&yx)?.add_scaled(Complex64::new(0.0, w), f)?;
            worst = worst.max(residual.norm()? / norm);
        }
    }
    Ok(worst)
}
