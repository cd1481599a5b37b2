//! Orthonormal families `{r_j}`, their associated functions `s_j = |r_j|² − 1`,
//! and the expansion of `|f|²` for `f = Σ a_k r_k`.
//!
//! Constructors reject grids that are too coarse for the frequencies involved:
//! every product of up to four basis elements must stay strictly inside the
//! band the midpoint rule integrates exactly.

use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SprError};
use crate::measure::{inner, validate_distribution, DiscreteMeasure, SampledFunction, SupportPoint};

const ORTHONORMAL_TOL: f64 = 1e-10;
const MOMENT_TOL: f64 = 1e-12;
/// `‖|P|² − 1‖₂` at or below this counts as constant modulus.
const CONSTANT_MODULUS_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Finite coefficient vector `a = (a_k)` representing `Σ a_k r_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefVec(pub Vec<Complex64>);

impl CoefVec {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self(entries)
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    /// Standard unit vector `e_k` (0-indexed).
    pub fn unit(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Scaled to unit `ℓ²` norm; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scale(Complex64::new(1.0 / n, 0.0))
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|&x| x * c).collect())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|x| x.conj()).collect())
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|x| x.im == 0.0)
    }

    /// `ℓ²` inner product `Σ a_k conj(b_k)`.
    pub fn dot(&self, other: &Self) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    /// Max entrywise distance, padding the shorter vector with zeros.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.len().max(other.len());
        let zero = Complex64::new(0.0, 0.0);
        (0..n)
            .map(|k| {
                let a = self.0.get(k).copied().unwrap_or(zero);
                let b = other.0.get(k).copied().unwrap_or(zero);
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// How a basis was built; enough to rebuild it exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// `r_n(x) = √2 sin(2π baseⁿ x)`, `n = 1..m`.
    LacunarySine { base: u64, m: usize, grid: usize },
    /// `r_n(x) = P(Aⁿ x)` with `P(x) = Σ_k α_k e^{2πikx}`; `alpha` holds the
    /// normalized coefficients as `[re, im]` pairs.
    LacunaryPoly { alpha: Vec<[f64; 2]>, a: u64, m: usize, grid: usize },
    /// `r_ν(x, y) = √2 sin(2πνy) e^{2πi n_ν x}` on the unit square.
    Rudin2d { sequence: Vec<u64>, m: usize, grid: usize },
    /// Coordinate variables of an i.i.d. product space; support as
    /// `[re, im, prob]` triples.
    Iid { support: Vec<[f64; 3]>, m: usize, checked: bool },
    /// Characters `e^{2πinx}`, `n ∈ Λ`.
    Exponential { sequence: Vec<i64>, grid: usize },
    Custom { label: String },
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::LacunarySine { .. } => "lacunary-sine",
            Provenance::LacunaryPoly { .. } => "lacunary-poly",
            Provenance::Rudin2d { .. } => "rudin-2d",
            Provenance::Iid { .. } => "iid",
            Provenance::Exponential { .. } => "exponential",
            Provenance::Custom { .. } => "custom",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrthoBasis {
    measure: Arc<DiscreteMeasure>,
    elements: Vec<SampledFunction>,
    s_elements: Vec<SampledFunction>,
    s_norms_sq: Vec<f64>,
    field: Field,
    provenance: Provenance,
    complexified: bool,
    notes: Vec<String>,
    pair_norms_sq: OnceLock<Vec<f64>>,
}

impl OrthoBasis {
    fn assemble(
        measure: Arc<DiscreteMeasure>,
        elements: Vec<SampledFunction>,
        field: Field,
        provenance: Provenance,
        notes: Vec<String>,
    ) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let s_elements: Vec<SampledFunction> = elements
            .iter()
            .map(|r| r.map(|v| Complex64::new(v.norm_sqr(), 0.0) - one))
            .collect();
        let s_norms_sq = s_elements.iter().map(|s| s.norm2().powi(2)).collect();
        Self {
            measure,
            elements,
            s_elements,
            s_norms_sq,
            field,
            provenance,
            complexified: false,
            notes,
            pair_norms_sq: OnceLock::new(),
        }
    }

    /// Wraps caller-supplied elements; they must be orthonormal within `1e-10`.
    pub fn from_elements(
        elements: Vec<SampledFunction>,
        field: Field,
        label: impl Into<String>,
    ) -> Result<Self> {
        let first = elements.first().ok_or_else(|| SprError::InvalidArgument("no elements".into()))?;
        let measure = first.measure().clone();
        for e in &elements {
            e.ensure_same_measure(first)?;
            if field == Field::Real && !e.is_real(0.0) {
                return invalid("real-field basis with complex-valued element");
            }
        }
        let basis = Self::assemble(measure, elements, field, Provenance::Custom { label: label.into() }, vec![]);
        basis.require_orthonormal()?;
        Ok(basis)
    }

    pub fn lacunary_sine(m: usize, base: u64, grid_n: usize) -> Result<Self> {
        if m == 0 {
            return invalid("lacunary sine basis needs m >= 1");
        }
        if base < 2 {
            return invalid(format!("base must be >= 2, got {base}"));
        }
        let top = checked_pow(base, m)?;
        let required = top.checked_mul(4).ok_or_else(overflow)?;
        require_grid(grid_n, required)?;
        let measure = DiscreteMeasure::interval_grid(grid_n)?;
        let elements = (1..=m)
            .map(|n| {
                let freq = base.pow(n as u32) as i128;
                let values = (0..grid_n)
                    .map(|k| Complex64::new(SQRT_2 * grid_angle(freq, k, grid_n).sin(), 0.0))
                    .collect();
                SampledFunction::new(measure.clone(), values)
            })
            .collect::<Result<Vec<_>>>()?;
        let basis = Self::assemble(
            measure,
            elements,
            Field::Real,
            Provenance::LacunarySine { base, m, grid: grid_n },
            vec![],
        );
        basis.require_orthonormal()?;
        Ok(basis)
    }

    pub fn lacunary_poly(alpha: &[Complex64], a: u64, m: usize, grid_n: usize) -> Result<Self> {
        let n = alpha.len();
        if n == 0 || m == 0 {
            return invalid("lacunary polynomial basis needs nonempty alpha and m >= 1");
        }
        if a <= 2 * n as u64 {
            return invalid(format!("need A > 2N, got A = {a}, N = {n}"));
        }
        let mass: f64 = alpha.iter().map(|c| c.norm_sqr()).sum();
        if !(mass > 0.0) || !mass.is_finite() {
            return invalid("alpha must have positive finite l2 mass");
        }
        let mut notes = vec![];
        let alpha: Vec<Complex64> = if (mass - 1.0).abs() > MOMENT_TOL {
            notes.push(format!("alpha rescaled by 1/sqrt({mass}) to unit l2 norm"));
            alpha.iter().map(|c| c / mass.sqrt()).collect()
        } else {
            alpha.to_vec()
        };

        // |P|² − 1 has frequencies below N, so a grid of 4N + 4 points is exact
        let probe_n = 4 * n + 4;
        let probe = DiscreteMeasure::interval_grid(probe_n)?;
        let p_probe = SampledFunction::new(
            probe.clone(),
            (0..probe_n).map(|k| eval_poly(&alpha, 1, k, probe_n)).collect(),
        )?;
        let defect = p_probe.modulus_sq().map(|v| v - 1.0).norm2();
        if defect <= CONSTANT_MODULUS_TOL {
            return Err(SprError::DegenerateBasis(format!(
                "|P| is constant (||  |P|^2 - 1 ||_2 = {defect:.3e}); phase retrieval is impossible"
            )));
        }

        let top = checked_pow(a, m)?;
        let required = top
            .checked_mul(2 * n as u128)
            .ok_or_else(overflow)?;
        require_grid(grid_n, required)?;
        let measure = DiscreteMeasure::interval_grid(grid_n)?;
        let elements = (1..=m)
            .map(|j| {
                let scale = a.pow(j as u32) as i128;
                let values = (0..grid_n).map(|k| eval_poly(&alpha, scale, k, grid_n)).collect();
                SampledFunction::new(measure.clone(), values)
            })
            .collect::<Result<Vec<_>>>()?;
        let basis = Self::assemble(
            measure,
            elements,
            Field::Complex,
            Provenance::LacunaryPoly {
                alpha: alpha.iter().map(|c| [c.re, c.im]).collect(),
                a,
                m,
                grid: grid_n,
            },
            notes,
        );
        basis.require_orthonormal()?;
        Ok(basis)
    }

    pub fn rudin_2d(seq: &[u64], m: usize, grid_n: usize) -> Result<Self> {
        if m == 0 {
            return invalid("rudin basis needs m >= 1");
        }
        if seq.len() < m {
            return invalid(format!("sequence has {} terms, need {m}", seq.len()));
        }
        let seq = &seq[..m];
        if seq[0] == 0 || seq.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("rudin sequence must be strictly increasing positive integers");
        }
        // x-frequencies of products reach 2 n_M, y-frequencies reach 4M
        let required = 2 * (seq[m - 1] as u128).max(2 * m as u128);
        require_grid(grid_n, required)?;
        let measure = DiscreteMeasure::square_grid(grid_n)?;
        let elements = seq
            .iter()
            .enumerate()
            .map(|(idx, &n_nu)| {
                let nu = (idx + 1) as i128;
                let amp: Vec<f64> = (0..grid_n)
                    .map(|k| SQRT_2 * grid_angle(nu, k, grid_n).sin())
                    .collect();
                let phase: Vec<Complex64> = (0..grid_n)
                    .map(|j| Complex64::from_polar(1.0, grid_angle(n_nu as i128, j, grid_n)))
                    .collect();
                let mut values = Vec::with_capacity(grid_n * grid_n);
                for ph in &phase {
                    values.extend(amp.iter().map(|&s| ph * s));
                }
                SampledFunction::new(measure.clone(), values)
            })
            .collect::<Result<Vec<_>>>()?;
        let basis = Self::assemble(
            measure,
            elements,
            Field::Complex,
            Provenance::Rudin2d { sequence: seq.to_vec(), m, grid: grid_n },
            vec![],
        );
        basis.require_orthonormal()?;
        Ok(basis)
    }

    /// Coordinate functions of an i.i.d. product space, after checking
    /// `E r = 0`, `E|r|² = 1`, `E r² = 0` (complex support) and that `|r|` is
    /// not almost surely 1.
    pub fn iid(support: &[SupportPoint], m: usize) -> Result<Self> {
        validate_distribution(support)?;
        let mean: Complex64 = support.iter().map(|p| p.value * p.prob).sum();
        let second_abs: f64 = support.iter().map(|p| p.value.norm_sqr() * p.prob).sum();
        let second: Complex64 = support.iter().map(|p| p.value * p.value * p.prob).sum();
        if mean.norm() > MOMENT_TOL {
            return invalid(format!("E r = {mean} is not zero"));
        }
        if (second_abs - 1.0).abs() > MOMENT_TOL {
            return invalid(format!("E|r|^2 = {second_abs} is not one"));
        }
        if infer_field(support) == Field::Complex && second.norm() > MOMENT_TOL {
            return invalid(format!("E r^2 = {second} is not zero for a complex support"));
        }
        if support.iter().all(|p| (p.value.norm() - 1.0).abs() <= MOMENT_TOL) {
            return Err(SprError::DegenerateBasis(
                "|r| = 1 almost surely (Rademacher-type support): the associated functions s_j vanish"
                    .into(),
            ));
        }
        Self::iid_unchecked(support, m).map(|mut b| {
            if let Provenance::Iid { checked, .. } = &mut b.provenance {
                *checked = true;
            }
            b
        })
    }

    /// Product-space coordinates without the moment checks (for counterexamples).
    pub fn iid_unchecked(support: &[SupportPoint], m: usize) -> Result<Self> {
        let measure = DiscreteMeasure::product_space(support.to_vec(), m)?;
        let elements = (0..m).map(|j| measure.coordinate(j)).collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(
            measure,
            elements,
            infer_field(support),
            Provenance::Iid {
                support: support.iter().map(|p| [p.value.re, p.value.im, p.prob]).collect(),
                m,
                checked: false,
            },
            vec![],
        ))
    }

    /// Characters `e^{2πinx}`, `n ∈ Λ`. Every element has modulus one, so the
    /// span never has phase retrieval once `|Λ| ≥ 2`.
    pub fn exponential(seq: &[i64], grid_n: usize) -> Result<Self> {
        if seq.is_empty() {
            return invalid("exponential basis needs a nonempty frequency set");
        }
        let mut sorted = seq.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid("exponential frequencies must be distinct");
        }
        let max_abs = seq.iter().map(|n| n.unsigned_abs() as u128).max().unwrap_or(0);
        let span = (sorted[sorted.len() - 1] as i128 - sorted[0] as i128) as u128;
        require_grid(grid_n, 2 * max_abs.max(span))?;
        let measure = DiscreteMeasure::interval_grid(grid_n)?;
        let elements = seq
            .iter()
            .map(|&n| {
                let values = (0..grid_n)
                    .map(|k| Complex64::from_polar(1.0, grid_angle(n as i128, k, grid_n)))
                    .collect();
                SampledFunction::new(measure.clone(), values)
            })
            .collect::<Result<Vec<_>>>()?;
        let basis = Self::assemble(
            measure,
            elements,
            Field::Complex,
            Provenance::Exponential { sequence: seq.to_vec(), grid: grid_n },
            vec![],
        );
        basis.require_orthonormal()?;
        Ok(basis)
    }

    /// Rebuilds a basis from its provenance record.
    pub fn from_provenance(p: &Provenance) -> Result<Self> {
        match p {
            Provenance::LacunarySine { base, m, grid } => Self::lacunary_sine(*m, *base, *grid),
            Provenance::LacunaryPoly { alpha, a, m, grid } => {
                let alpha: Vec<Complex64> = alpha.iter().map(|c| Complex64::new(c[0], c[1])).collect();
                Self::lacunary_poly(&alpha, *a, *m, *grid)
            }
            Provenance::Rudin2d { sequence, m, grid } => Self::rudin_2d(sequence, *m, *grid),
            Provenance::Iid { support, m, checked } => {
                let support: Vec<SupportPoint> = support
                    .iter()
                    .map(|t| SupportPoint::new(Complex64::new(t[0], t[1]), t[2]))
                    .collect();
                if *checked {
                    Self::iid(&support, *m)
                } else {
                    Self::iid_unchecked(&support, *m)
                }
            }
            Provenance::Exponential { sequence, grid } => Self::exponential(sequence, *grid),
            Provenance::Custom { label } => {
                invalid(format!("custom basis '{label}' cannot be rebuilt from provenance"))
            }
        }
    }

    /// The same functions viewed as spanning a complex subspace.
    pub fn complexified(&self) -> Self {
        let mut b = self.clone();
        b.field = Field::Complex;
        b.complexified = self.field == Field::Real || self.complexified;
        b
    }

    pub fn measure(&self) -> &Arc<DiscreteMeasure> {
        &self.measure
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_complexified(&self) -> bool {
        self.complexified
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Families whose elements all have constant modulus can never have phase
    /// retrieval on spans of two or more elements.
    pub fn is_flagged_non_spr(&self) -> bool {
        matches!(self.provenance, Provenance::Exponential { .. }) || self.complexified
    }

    pub fn elements(&self) -> &[SampledFunction] {
        &self.elements
    }

    pub fn element(&self, j: usize) -> &SampledFunction {
        &self.elements[j]
    }

    pub fn s_elements(&self) -> &[SampledFunction] {
        &self.s_elements
    }

    /// `‖s_j‖₂²` by quadrature.
    pub fn s_norm_sq(&self, j: usize) -> f64 {
        self.s_norms_sq[j]
    }

    pub fn s_norms_sq(&self) -> &[f64] {
        &self.s_norms_sq
    }

    /// `r_i · conj(r_j)`.
    pub fn product(&self, i: usize, j: usize) -> SampledFunction {
        self.elements[i].mul_conj(&self.elements[j]).expect("basis elements share a measure")
    }

    /// `‖r_i conj(r_j)‖₂²`, cached for all pairs on first use.
    pub fn pair_norm_sq(&self, i: usize, j: usize) -> f64 {
        let m = self.len();
        let table = self.pair_norms_sq.get_or_init(|| {
            let mut t = vec![0.0; m * m];
            for a in 0..m {
                for b in a..m {
                    let v = self.product(a, b).norm2().powi(2);
                    t[a * m + b] = v;
                    t[b * m + a] = v;
                }
            }
            t
        });
        table[i * m + j]
    }

    /// Largest `|⟨r_i, r_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            for j in i..self.len() {
                let g = inner(&self.elements[i], &self.elements[j]).expect("shared measure");
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    fn require_orthonormal(&self) -> Result<()> {
        let d = self.orthonormality_defect();
        if d > ORTHONORMAL_TOL {
            invalid(format!("family is not orthonormal: defect {d:.3e}"))
        } else {
            Ok(())
        }
    }

    fn check_coefficients(&self, a: &CoefVec) -> Result<()> {
        if a.len() > self.len() {
            return invalid(format!(
                "{} coefficients for a basis of {} elements",
                a.len(),
                self.len()
            ));
        }
        if self.field == Field::Real && !a.is_real() {
            return invalid("complex coefficients on a real-field basis (use complexified())");
        }
        Ok(())
    }

    /// `f = Σ a_k r_k`; missing trailing coefficients are zero.
    pub fn synthesize(&self, a: &CoefVec) -> Result<SampledFunction> {
        self.check_coefficients(a)?;
        let mut values = vec![Complex64::new(0.0, 0.0); self.measure.len()];
        for (coef, r) in a.entries().iter().zip(&self.elements) {
            if *coef == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (v, &x) in values.iter_mut().zip(r.values()) {
                *v += coef * x;
            }
        }
        SampledFunction::new(self.measure.clone(), values)
    }

    /// Symbolic coefficients of `|f|²` in the family `{1, s_k, r_i conj(r_j)}`.
    pub fn expand_modulus_squared(&self, a: &CoefVec) -> Result<ModulusSquaredExpansion> {
        self.check_coefficients(a)?;
        Ok(ModulusSquaredExpansion::from_coefficients(a, self.field))
    }
}

/// One off-diagonal coefficient `a_i conj(a_j)` (0-indexed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonal {
    pub i: usize,
    pub j: usize,
    pub value: Complex64,
}

/// `|f|² = Σ_{i≠j} a_i conj(a_j) r_i conj(r_j) + Σ_k |a_k|² s_k + ‖f‖₂²·1`.
///
/// For the real field only pairs `i < j` are stored; the product `r_i r_j`
/// then appears in `|f|²` with coefficient `2 a_i a_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusSquaredExpansion {
    pub field: Field,
    pub constant_term: f64,
    pub diag: Vec<f64>,
    pub offdiag: Vec<OffDiagonal>,
}

impl ModulusSquaredExpansion {
    pub fn from_coefficients(a: &CoefVec, field: Field) -> Self {
        let e = a.entries();
        let diag: Vec<f64> = e.iter().map(|c| c.norm_sqr()).collect();
        let mut offdiag = vec![];
        for i in 0..e.len() {
            for j in 0..e.len() {
                let keep = match field {
                    Field::Complex => i != j,
                    Field::Real => i < j,
                };
                if keep {
                    offdiag.push(OffDiagonal { i, j, value: e[i] * e[j].conj() });
                }
            }
        }
        Self { field, constant_term: diag.iter().sum(), diag, offdiag }
    }

    /// Coefficient `a_i conj(a_j)`; symmetric lookups fold for the real field.
    pub fn offdiag(&self, i: usize, j: usize) -> Option<Complex64> {
        if i == j {
            return None;
        }
        let key = match self.field {
            Field::Real if i > j => (j, i),
            _ => (i, j),
        };
        self.offdiag.iter().find(|t| (t.i, t.j) == key).map(|t| t.value)
    }

    fn fold_factor(&self) -> f64 {
        match self.field {
            Field::Complex => 1.0,
            Field::Real => 2.0,
        }
    }

    /// Pointwise evaluation of the expansion on the basis's measure.
    pub fn sampled(&self, basis: &OrthoBasis) -> Result<SampledFunction> {
        if self.diag.len() > basis.len() {
            return invalid("expansion longer than the basis");
        }
        let mut values = vec![Complex64::new(self.constant_term, 0.0); basis.measure().len()];
        for (d, s) in self.diag.iter().zip(basis.s_elements()) {
            for (v, &x) in values.iter_mut().zip(s.values()) {
                *v += x * d;
            }
        }
        let fold = self.fold_factor();
        for t in &self.offdiag {
            let (ri, rj) = (basis.element(t.i).values(), basis.element(t.j).values());
            for ((v, &x), &y) in values.iter_mut().zip(ri).zip(rj) {
                *v += t.value * x * y.conj() * fold;
            }
        }
        SampledFunction::new(basis.measure().clone(), values)
    }

    /// `‖|f|²‖₂²` from the coefficients, using orthogonality of the family.
    pub fn l2_norm_sq(&self, basis: &OrthoBasis) -> f64 {
        let fold = self.fold_factor();
        self.constant_term.powi(2)
            + self
                .diag
                .iter()
                .enumerate()
                .map(|(k, d)| d * d * basis.s_norm_sq(k))
                .sum::<f64>()
            + self
                .offdiag
                .iter()
                .map(|t| fold * fold * t.value.norm_sqr() * basis.pair_norm_sq(t.i, t.j))
                .sum::<f64>()
    }
}

fn infer_field(support: &[SupportPoint]) -> Field {
    if support.iter().all(|p| p.value.im == 0.0) {
        Field::Real
    } else {
        Field::Complex
    }
}

/// `2π · freq · x_k` on the midpoint grid, reduced exactly modulo `2π`.
pub(crate) fn grid_angle(freq: i128, k: usize, n: usize) -> f64 {
    let two_n = 2 * n as i128;
    let num = (freq * (2 * k as i128 + 1)).rem_euclid(two_n);
    PI * num as f64 / n as f64
}

fn eval_poly(alpha: &[Complex64], scale: i128, k: usize, n: usize) -> Complex64 {
    alpha
        .iter()
        .enumerate()
        .map(|(idx, c)| c * Complex64::from_polar(1.0, grid_angle(scale * (idx as i128 + 1), k, n)))
        .sum()
}

fn checked_pow(base: u64, exp: usize) -> Result<u128> {
    (base as u128).checked_pow(exp as u32).ok_or_else(overflow)
}

fn overflow() -> SprError {
    SprError::ResourceLimit("frequency overflow".into())
}

fn require_grid(grid_n: usize, bound: u128) -> Result<()> {
    if (grid_n as u128) <= bound {
        invalid(format!("grid too coarse: need grid_n > {bound} (minimum {}), got {grid_n}", bound + 1))
    } else {
        Ok(())
    }
}
