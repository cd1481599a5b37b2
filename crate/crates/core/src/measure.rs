//! Finite atomic probability spaces and functions sampled on their atoms.
//!
//! Integrals against a [`DiscreteMeasure`] are finite weighted sums. Uniform
//! midpoint grids integrate every trigonometric polynomial whose frequencies
//! stay strictly below the grid size exactly (up to rounding), and product
//! spaces realize finitely supported i.i.d. variables without sampling error.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SprError};

/// Largest product space built unless the caller raises the cap.
pub const DEFAULT_ATOM_CAP: usize = 1_000_000;

const WEIGHT_SUM_TOL: f64 = 1e-14;

/// One point of a finitely supported complex distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub value: Complex64,
    pub prob: f64,
}

impl SupportPoint {
    pub fn new(value: Complex64, prob: f64) -> Self {
        Self { value, prob }
    }

    pub fn real(value: f64, prob: f64) -> Self {
        Self::new(Complex64::new(value, 0.0), prob)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    /// Midpoints `(k + 1/2)/n` of `[0, 1]`.
    IntervalGrid { n: usize },
    /// Product midpoint grid on `[0, 1]²`; atom `j * n + k` is `(x_j, y_k)`.
    SquareGrid { n: usize },
    /// All `m`-tuples over `support`, first coordinate most significant.
    ProductSpace { support: Vec<SupportPoint>, m: usize },
}

impl MeasureKind {
    pub fn tag(&self) -> &'static str {
        match self {
            MeasureKind::IntervalGrid { .. } => "interval-grid",
            MeasureKind::SquareGrid { .. } => "square-grid",
            MeasureKind::ProductSpace { .. } => "product-space",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    kind: MeasureKind,
    weights: Vec<f64>,
}

impl PartialEq for DiscreteMeasure {
    fn eq(&self, other: &Self) -> bool {
        // weights are a function of the kind
        self.kind == other.kind
    }
}

impl DiscreteMeasure {
    pub fn interval_grid(n: usize) -> Result<Arc<Self>> {
        if n < 2 {
            return invalid(format!("interval grid needs n >= 2, got {n}"));
        }
        Ok(Arc::new(Self {
            kind: MeasureKind::IntervalGrid { n },
            weights: vec![1.0 / n as f64; n],
        }))
    }

    pub fn square_grid(n: usize) -> Result<Arc<Self>> {
        if n < 2 {
            return invalid(format!("square grid needs n >= 2, got {n}"));
        }
        let atoms = n
            .checked_mul(n)
            .ok_or_else(|| SprError::ResourceLimit(format!("square grid {n}x{n} overflows")))?;
        Ok(Arc::new(Self {
            kind: MeasureKind::SquareGrid { n },
            weights: vec![1.0 / atoms as f64; atoms],
        }))
    }

    pub fn product_space(support: Vec<SupportPoint>, m: usize) -> Result<Arc<Self>> {
        Self::product_space_with_cap(support, m, DEFAULT_ATOM_CAP)
    }

    pub fn product_space_with_cap(
        support: Vec<SupportPoint>,
        m: usize,
        cap: usize,
    ) -> Result<Arc<Self>> {
        validate_distribution(&support)?;
        if m == 0 {
            return invalid("product space needs m >= 1");
        }
        let mut atoms: usize = 1;
        for _ in 0..m {
            atoms = atoms
                .checked_mul(support.len())
                .filter(|&a| a <= cap)
                .ok_or_else(|| {
                    SprError::ResourceLimit(format!(
                        "{}^{m} atoms exceeds the cap of {cap}",
                        support.len()
                    ))
                })?;
        }
        let k = support.len();
        let mut weights = vec![1.0; atoms];
        for (idx, w) in weights.iter_mut().enumerate() {
            let mut rest = idx;
            for _ in 0..m {
                *w *= support[rest % k].prob;
                rest /= k;
            }
        }
        Ok(Arc::new(Self {
            kind: MeasureKind::ProductSpace { support, m },
            weights,
        }))
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Grid size `n` for the two grid kinds.
    pub fn grid_n(&self) -> Option<usize> {
        match self.kind {
            MeasureKind::IntervalGrid { n } | MeasureKind::SquareGrid { n } => Some(n),
            MeasureKind::ProductSpace { .. } => None,
        }
    }

    /// Coordinates of atom `idx` on the square grid.
    pub fn square_point(&self, idx: usize) -> Option<(f64, f64)> {
        match self.kind {
            MeasureKind::SquareGrid { n } => Some((midpoint(idx / n, n), midpoint(idx % n, n))),
            _ => None,
        }
    }

    /// Support indices of the tuple at atom `idx` (product spaces only).
    pub fn product_digits(&self, idx: usize) -> Option<Vec<usize>> {
        match &self.kind {
            MeasureKind::ProductSpace { support, m } => {
                let k = support.len();
                let mut digits = vec![0; *m];
                let mut rest = idx;
                for slot in digits.iter_mut().rev() {
                    *slot = rest % k;
                    rest /= k;
                }
                Some(digits)
            }
            _ => None,
        }
    }

    /// Samples `f(x)` at the midpoints of an interval grid.
    pub fn sample_interval(
        self: &Arc<Self>,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<SampledFunction> {
        match self.kind {
            MeasureKind::IntervalGrid { n } => {
                let values = (0..n).map(|k| f(midpoint(k, n))).collect();
                SampledFunction::new(self.clone(), values)
            }
            _ => invalid("sample_interval requires an interval grid"),
        }
    }

    /// Samples `f(x, y)` on a square grid.
    pub fn sample_square(
        self: &Arc<Self>,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<SampledFunction> {
        match self.kind {
            MeasureKind::SquareGrid { n } => {
                let mut values = Vec::with_capacity(n * n);
                for j in 0..n {
                    let x = midpoint(j, n);
                    for k in 0..n {
                        values.push(f(x, midpoint(k, n)));
                    }
                }
                SampledFunction::new(self.clone(), values)
            }
            _ => invalid("sample_square requires a square grid"),
        }
    }

    /// The `j`-th coordinate variable of a product space (0-indexed).
    pub fn coordinate(self: &Arc<Self>, j: usize) -> Result<SampledFunction> {
        match &self.kind {
            MeasureKind::ProductSpace { support, m } => {
                if j >= *m {
                    return invalid(format!("coordinate {j} out of range for m = {m}"));
                }
                let k = support.len();
                let stride = k.pow((*m - 1 - j) as u32);
                let values = (0..self.len())
                    .map(|idx| support[(idx / stride) % k].value)
                    .collect();
                SampledFunction::new(self.clone(), values)
            }
            _ => invalid("coordinate requires a product space"),
        }
    }
}

fn midpoint(k: usize, n: usize) -> f64 {
    (k as f64 + 0.5) / n as f64
}

pub(crate) fn validate_distribution(support: &[SupportPoint]) -> Result<()> {
    if support.is_empty() {
        return invalid("empty support");
    }
    if let Some(p) = support.iter().find(|p| !(p.prob > 0.0) || !p.prob.is_finite()) {
        return invalid(format!("support probability {} is not positive", p.prob));
    }
    if support.iter().any(|p| !p.value.re.is_finite() || !p.value.im.is_finite()) {
        return invalid("support values must be finite");
    }
    let total: f64 = support.iter().map(|p| p.prob).sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return invalid(format!("support probabilities sum to {total}, not 1"));
    }
    Ok(())
}

/// Pairwise summation; keeps rounding error logarithmic in the atom count.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 128;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

pub(crate) fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    const BLOCK: usize = 128;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
    }
}

/// Complex values of a function on the atoms of a measure.
#[derive(Clone, Debug)]
pub struct SampledFunction {
    values: Vec<Complex64>,
    measure: Arc<DiscreteMeasure>,
}

impl PartialEq for SampledFunction {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && same_measure(&self.measure, &other.measure)
    }
}

fn same_measure(a: &Arc<DiscreteMeasure>, b: &Arc<DiscreteMeasure>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl SampledFunction {
    pub fn new(measure: Arc<DiscreteMeasure>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != measure.len() {
            return invalid(format!(
                "{} values for a measure with {} atoms",
                values.len(),
                measure.len()
            ));
        }
        Ok(Self { values, measure })
    }

    pub fn from_real(measure: Arc<DiscreteMeasure>, values: &[f64]) -> Result<Self> {
        Self::new(measure, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(measure: Arc<DiscreteMeasure>) -> Self {
        let n = measure.len();
        Self { values: vec![Complex64::new(0.0, 0.0); n], measure }
    }

    pub fn constant(measure: Arc<DiscreteMeasure>, c: Complex64) -> Self {
        let n = measure.len();
        Self { values: vec![c; n], measure }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn measure(&self) -> &Arc<DiscreteMeasure> {
        &self.measure
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ensure_same_measure(&self, other: &Self) -> Result<()> {
        if same_measure(&self.measure, &other.measure) {
            Ok(())
        } else {
            invalid(format!(
                "functions live on different measures ({} vs {})",
                self.measure.kind.tag(),
                other.measure.kind.tag()
            ))
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            measure: self.measure.clone(),
        }
    }

    pub fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.ensure_same_measure(other)?;
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            measure: self.measure.clone(),
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    /// Pointwise `|f|`, stored with zero imaginary part.
    pub fn modulus(&self) -> Self {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    /// Pointwise `|f|²`.
    pub fn modulus_sq(&self) -> Self {
        self.map(|v| Complex64::new(v.norm_sqr(), 0.0))
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Pointwise `f · conj(g)`.
    pub fn mul_conj(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b.conj())
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.im.abs() <= tol)
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        inner(self, other)
    }

    pub fn norm_p(&self, p: f64) -> Result<f64> {
        norm_p(self, p)
    }

    pub fn norm2(&self) -> f64 {
        norm_p(self, 2.0).expect("p = 2 is valid")
    }
}

impl Add for &SampledFunction {
    type Output = SampledFunction;
    fn add(self, rhs: Self) -> SampledFunction {
        self.zip_with(rhs, |a, b| a + b).expect("operands share a measure")
    }
}

impl Sub for &SampledFunction {
    type Output = SampledFunction;
    fn sub(self, rhs: Self) -> SampledFunction {
        self.zip_with(rhs, |a, b| a - b).expect("operands share a measure")
    }
}

impl Mul for &SampledFunction {
    type Output = SampledFunction;
    fn mul(self, rhs: Self) -> SampledFunction {
        self.zip_with(rhs, |a, b| a * b).expect("operands share a measure")
    }
}

/// `⟨f, g⟩ = Σ f · conj(g) · weight`, linear in `f` and conjugate-linear in `g`.
pub fn inner(f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    f.ensure_same_measure(g)?;
    let terms: Vec<Complex64> = f
        .values
        .iter()
        .zip(&g.values)
        .zip(&f.measure.weights)
        .map(|((&a, &b), &w)| a * b.conj() * w)
        .collect();
    Ok(pairwise_sum_c(&terms))
}

/// `L^p` norm for `p ∈ [1, ∞]`; pass `f64::INFINITY` for the sup norm.
pub fn norm_p(f: &SampledFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(norm_p_of_moduli(f.values.iter().map(|v| v.norm()), &f.measure.weights, p))
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        invalid(format!("exponent p must lie in [1, inf], got {p}"))
    } else {
        Ok(())
    }
}

/// `L^p` norm of per-atom moduli; `p` must already be validated.
pub(crate) fn norm_p_of_moduli(
    moduli: impl Iterator<Item = f64>,
    weights: &[f64],
    p: f64,
) -> f64 {
    if p.is_infinite() {
        return moduli.fold(0.0, f64::max);
    }
    let terms: Vec<f64> = moduli
        .zip(weights)
        .map(|(m, &w)| w * pow_p(m, p))
        .collect();
    pairwise_sum(&terms).powf(1.0 / p)
}

pub(crate) fn pow_p(m: f64, p: f64) -> f64 {
    if p == 2.0 {
        m * m
    } else if p == 4.0 {
        let s = m * m;
        s * s
    } else if p == 6.0 {
        let s = m * m;
        s * s * s
    } else {
        m.powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn interval_grid_atoms_and_weights() {
        let m = DiscreteMeasure::interval_grid(4).unwrap();
        let x = m.sample_interval(|x| c(x, 0.0)).unwrap();
        let xs: Vec<f64> = x.values().iter().map(|v| v.re).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert!(m.weights().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn grids_reject_small_n() {
        assert!(matches!(DiscreteMeasure::interval_grid(1), Err(SprError::InvalidArgument(_))));
        assert!(matches!(DiscreteMeasure::square_grid(0), Err(SprError::InvalidArgument(_))));
    }

    #[test]
    fn characters_are_orthonormal_on_midpoint_grid() {
        let m = DiscreteMeasure::interval_grid(1024).unwrap();
        let e1 = m.sample_interval(|x| Complex64::from_polar(1.0, 2.0 * PI * x)).unwrap();
        let e2 = m.sample_interval(|x| Complex64::from_polar(1.0, 4.0 * PI * x)).unwrap();
        assert!((inner(&e1, &e1).unwrap() - 1.0).norm() < 1e-14);
        assert!(inner(&e1, &e2).unwrap().norm() < 1e-14);
    }

    #[test]
    fn square_grid_sine_factors() {
        let m = DiscreteMeasure::square_grid(2).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.weights().iter().all(|&w| w == 0.25));

        let m = DiscreteMeasure::square_grid(256).unwrap();
        let f = m.sample_square(|_, y| c(SQRT_2 * (2.0 * PI * y).sin(), 0.0)).unwrap();
        assert!((f.norm2() - 1.0).abs() < 1e-12);
        let f = m
            .sample_square(|x, y| Complex64::from_polar(SQRT_2 * (2.0 * PI * y).sin(), 2.0 * PI * x))
            .unwrap();
        let g = m
            .sample_square(|x, y| Complex64::from_polar(SQRT_2 * (4.0 * PI * y).sin(), 2.0 * PI * x))
            .unwrap();
        assert!(inner(&f, &g).unwrap().norm() < 1e-12);
    }

    #[test]
    fn fair_coin_product() {
        let s = vec![SupportPoint::real(1.0, 0.5), SupportPoint::real(-1.0, 0.5)];
        let m = DiscreteMeasure::product_space(s, 3).unwrap();
        assert_eq!(m.len(), 8);
        assert!(m.weights().iter().all(|&w| w == 0.125));
        assert_eq!(m.product_digits(5).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn ternary_coordinate_moments() {
        let a = (1.5f64).sqrt();
        let s = vec![
            SupportPoint::real(-a, 1.0 / 3.0),
            SupportPoint::real(0.0, 1.0 / 3.0),
            SupportPoint::real(a, 1.0 / 3.0),
        ];
        let m = DiscreteMeasure::product_space(s, 2).unwrap();
        let r1 = m.coordinate(0).unwrap();
        let one = SampledFunction::constant(m.clone(), c(1.0, 0.0));
        assert!(inner(&r1, &one).unwrap().norm() < 1e-15);
        assert!((r1.norm2() - 1.0).abs() < 1e-15);
        assert!((r1.norm_p(4.0).unwrap().powi(4) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn cube_root_support_moments() {
        let a = (1.5f64).sqrt();
        let mut s = vec![SupportPoint::real(0.0, 1.0 / 3.0)];
        for k in 0..3 {
            s.push(SupportPoint::new(Complex64::from_polar(a, 2.0 * PI * k as f64 / 3.0), 2.0 / 9.0));
        }
        let m = DiscreteMeasure::product_space(s, 2).unwrap();
        let r = m.coordinate(1).unwrap();
        let one = SampledFunction::constant(m.clone(), c(1.0, 0.0));
        assert!(inner(&r, &one).unwrap().norm() < 1e-15);
        assert!(inner(&(&r * &r), &one).unwrap().norm() < 1e-15);
        assert!((r.norm2() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_space_errors() {
        let s = vec![SupportPoint::real(1.0, 0.5), SupportPoint::real(-1.0, 0.5)];
        assert!(matches!(
            DiscreteMeasure::product_space_with_cap(s.clone(), 21, 1 << 20),
            Err(SprError::ResourceLimit(_))
        ));
        let bad = vec![SupportPoint::real(1.0, 0.5), SupportPoint::real(-1.0, 0.4)];
        assert!(matches!(DiscreteMeasure::product_space(bad, 2), Err(SprError::InvalidArgument(_))));
        let neg = vec![SupportPoint::real(1.0, 1.5), SupportPoint::real(-1.0, -0.5)];
        assert!(matches!(DiscreteMeasure::product_space(neg, 2), Err(SprError::InvalidArgument(_))));
    }

    #[test]
    fn inner_product_basics() {
        let m = DiscreteMeasure::interval_grid(16).unwrap();
        let one = SampledFunction::constant(m.clone(), c(1.0, 0.0));
        assert!((inner(&one, &one).unwrap() - 1.0).norm() < 1e-15);
        let g = m.sample_interval(|x| Complex64::from_polar(1.0, 2.0 * PI * x)).unwrap();
        let ig = g.scale(c(0.0, 1.0));
        assert!((inner(&ig, &g).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert!((inner(&g, &ig).unwrap() - c(0.0, -1.0)).norm() < 1e-15);

        let other = DiscreteMeasure::interval_grid(8).unwrap();
        let h = SampledFunction::constant(other, c(1.0, 0.0));
        assert!(inner(&one, &h).is_err());
    }

    #[test]
    fn norms() {
        let m = DiscreteMeasure::interval_grid(1024).unwrap();
        let one = SampledFunction::constant(m.clone(), c(1.0, 0.0));
        for p in [1.0, 2.0, 3.5, 4.0, f64::INFINITY] {
            assert!((one.norm_p(p).unwrap() - 1.0).abs() < 1e-14);
        }
        let r = m.sample_interval(|x| c(SQRT_2 * (2.0 * PI * x).sin(), 0.0)).unwrap();
        assert!((r.norm_p(4.0).unwrap() - 1.5f64.powf(0.25)).abs() < 1e-10);
        assert!(matches!(r.norm_p(0.5), Err(SprError::InvalidArgument(_))));
        let scaled = r.scale(c(0.0, -3.0));
        assert!((scaled.norm_p(4.0).unwrap() - 3.0 * r.norm_p(4.0).unwrap()).abs() < 1e-14);
    }
}
