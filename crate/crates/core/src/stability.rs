//! Empirical stability constants, Hölder exponents and the identity suite
//! behind the `|f|² − |g|²` lower bound.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{CoefVec, Field, OrthoBasis, Provenance};
use crate::error::{invalid, Result, SprError};
use crate::hypotheses::{check_moments, embedding_constant};
use crate::measure::{check_exponent, inner, SampledFunction};
use crate::phase::min_phase_dist;
use crate::rng::{random_unit, trial_rng};
use crate::sidon::least_squares_slope;

/// Denominator at or below this fraction of `‖f‖_p + ‖g‖_p` counts as zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
/// Numerator above this fraction of `‖f‖_p + ‖g‖_p` with a vanishing
/// denominator is a violation.
pub const VIOLATION_NUMERATOR: f64 = 1e-8;
/// Both sides below this absolute value: the pair carries no information.
pub const ABSOLUTE_FLOOR: f64 = 1e-12;
pub const HILL_STEP: f64 = 0.5;
pub const HILL_FLOOR: f64 = 1e-4;
pub const MIN_DECADES: f64 = 4.0;
/// At most this many violating pairs are stored in a report.
pub const MAX_RECORDED_VIOLATIONS: usize = 64;
const ADVERSARIAL_STREAM: u64 = 0xA5A5_A5A5_A5A5_A5A5;
const HOLDER_STREAM: u64 = 0x5A5A_5A5A_5A5A_5A5A;

/// `f = r e^{iθ} g + h` with `h ⟂ g`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDecomposition {
    pub r: f64,
    pub theta: f64,
    pub h: SampledFunction,
}

pub fn phase_decompose(f: &SampledFunction, g: &SampledFunction) -> Result<PhaseDecomposition> {
    let gg = g.norm2().powi(2);
    if gg == 0.0 {
        return invalid("cannot decompose against the zero function");
    }
    let c = inner(f, g)? / gg;
    let h = f.zip_with(g, |x, y| x - c * y)?;
    let theta = if c.norm() == 0.0 { 0.0 } else { crate::phase::wrap_angle(c.arg()) };
    Ok(PhaseDecomposition { r: c.norm(), theta, h })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SprOutcome {
    Ratio { value: f64, numerator: f64, denominator: f64 },
    /// `|f| = |g|` numerically while `f` stays away from every `z g`.
    Violation { numerator: f64, denominator: f64 },
    /// Both sides vanish.
    Skip,
}

impl SprOutcome {
    /// Ratio value; `0` for skipped pairs and `∞` for violations.
    pub fn value(&self) -> f64 {
        match self {
            SprOutcome::Ratio { value, .. } => *value,
            SprOutcome::Violation { .. } => f64::INFINITY,
            SprOutcome::Skip => 0.0,
        }
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, SprOutcome::Violation { .. })
    }
}

/// `min_z ‖f − z g‖_p / ‖|f| − |g|‖_p` for `f = Σ a_j r_j`, `g = Σ b_j r_j`.
pub fn spr_ratio(basis: &OrthoBasis, a: &CoefVec, b: &CoefVec, p: f64) -> Result<SprOutcome> {
    let f = basis.synthesize(a)?;
    let g = basis.synthesize(b)?;
    ratio_of(&f, &g, p, basis.field())
}

pub fn ratio_of(f: &SampledFunction, g: &SampledFunction, p: f64, field: Field) -> Result<SprOutcome> {
    let scale = f.norm_p(p)? + g.norm_p(p)?;
    let numerator = min_phase_dist(f, g, p, field)?.distance;
    let denominator = (&f.modulus() - &g.modulus()).norm_p(p)?;
    if numerator <= ABSOLUTE_FLOOR && denominator <= ABSOLUTE_FLOOR {
        return Ok(SprOutcome::Skip);
    }
    if denominator <= DENOMINATOR_FLOOR * scale {
        return Ok(if numerator > VIOLATION_NUMERATOR * scale {
            SprOutcome::Violation { numerator, denominator }
        } else {
            SprOutcome::Skip
        });
    }
    Ok(SprOutcome::Ratio { value: numerator / denominator, numerator, denominator })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub a: CoefVec,
    pub b: CoefVec,
    pub numerator: f64,
    pub denominator: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub p: f64,
    pub sup_ratio: f64,
    pub argmax_pair: Option<(CoefVec, CoefVec)>,
    pub trials: usize,
    pub pairs_evaluated: usize,
    pub skipped: usize,
    pub gamma_fit: Option<f64>,
    pub violation_count: usize,
    pub violations: Vec<ViolationRecord>,
    /// `4 C² δ^{-1/2}` at `p = 4`, with `C` the empirical embedding constant.
    pub theoretical_bound: Option<f64>,
    pub bound_label: Option<String>,
    pub non_spr: bool,
}

/// Pairs that are not random: nearly aligned, conjugate and disjoint-support.
pub fn structured_probes(m: usize, field: Field) -> Vec<(CoefVec, CoefVec)> {
    let mut probes = Vec::new();
    let flat = CoefVec::from_real(&vec![1.0; m]).normalized();
    for k in 0..m {
        for eps in [1e-3, 1e-6] {
            let mut f = flat.clone();
            f.0[k] += eps;
            probes.push((f, flat.clone()));
        }
    }
    if field == Field::Complex {
        let alternating = CoefVec::new(
            (0..m)
                .map(|k| if k % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) })
                .collect(),
        )
        .normalized();
        probes.push((alternating.clone(), alternating.conj()));
    }
    for i in 0..m.min(16) {
        for j in i + 1..m.min(16) {
            probes.push((CoefVec::unit(m, i), CoefVec::unit(m, j)));
        }
    }
    probes
}

fn random_pair(seed: u64, trial: usize, m: usize, field: Field) -> (CoefVec, CoefVec) {
    let mut rng = trial_rng(seed, trial as u64);
    let a = random_unit(&mut rng, m, field);
    let b = random_unit(&mut rng, m, field);
    (a, b)
}

/// Bound `4 C² δ^{-1/2}` on the `L⁴` ratio, when `δ > 0`.
pub fn empirical_bound(basis: &OrthoBasis, seed: u64) -> Result<Option<f64>> {
    let delta = check_moments(basis)?.delta;
    if delta <= crate::hypotheses::DEFAULT_DELTA_THRESHOLD {
        return Ok(None);
    }
    let c = embedding_constant(basis, 4.0, 256, seed)?.constant;
    Ok(Some(4.0 * c * c / delta.sqrt()))
}

fn summarize(
    p: f64,
    trials: usize,
    pairs: Vec<(CoefVec, CoefVec)>,
    outcomes: Vec<SprOutcome>,
) -> StabilityReport {
    let mut sup_ratio = 0.0;
    let mut argmax = None;
    let mut skipped = 0;
    let mut violations = Vec::new();
    let mut violation_count = 0;
    for (idx, outcome) in outcomes.iter().enumerate() {
        match *outcome {
            SprOutcome::Ratio { value, .. } => {
                if value > sup_ratio || argmax.is_none() {
                    sup_ratio = value;
                    argmax = Some(idx);
                }
            }
            SprOutcome::Violation { numerator, denominator } => {
                violation_count += 1;
                if violations.len() < MAX_RECORDED_VIOLATIONS {
                    violations.push(ViolationRecord {
                        a: pairs[idx].0.clone(),
                        b: pairs[idx].1.clone(),
                        numerator,
                        denominator,
                    });
                }
            }
            SprOutcome::Skip => skipped += 1,
        }
    }
    StabilityReport {
        p,
        sup_ratio,
        argmax_pair: argmax.map(|i| pairs[i].clone()),
        trials,
        pairs_evaluated: outcomes.len(),
        skipped,
        gamma_fit: None,
        violation_count,
        violations,
        theoretical_bound: None,
        bound_label: None,
        non_spr: violation_count > 0,
    }
}

pub fn monte_carlo_spr(basis: &OrthoBasis, trials: usize, p: f64, seed: u64) -> Result<StabilityReport> {
    check_exponent(p)?;
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let (m, field) = (basis.len(), basis.field());
    let mut pairs = structured_probes(m, field);
    pairs.extend((0..trials).map(|t| random_pair(seed, t, m, field)));
    let outcomes: Vec<SprOutcome> = pairs
        .par_iter()
        .map(|(a, b)| spr_ratio(basis, a, b, p))
        .collect::<Result<_>>()?;
    let mut report = summarize(p, trials, pairs, outcomes);
    if p == 4.0 {
        report.theoretical_bound = empirical_bound(basis, seed)?;
        report.bound_label = report.theoretical_bound.map(|_| "empirical-C bound".to_string());
    }
    Ok(report)
}

fn perturbation(rng: &mut ChaCha8Rng, field: Field) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = match field {
        Field::Complex => StandardNormal.sample(rng),
        Field::Real => 0.0,
    };
    Complex64::new(re, im)
}

/// Coordinate-wise hill climb of the ratio from `(a, b)`: each proposal
/// multiplies one coefficient by `1 + step·ξ`; a full sweep without
/// improvement halves the step, which stops at the floor.
fn climb(
    basis: &OrthoBasis,
    start: (CoefVec, CoefVec),
    start_value: f64,
    steps: usize,
    p: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(CoefVec, CoefVec, f64, Vec<ViolationRecord>)> {
    let field = basis.field();
    let m = basis.len();
    let (mut a, mut b) = start;
    let mut best = start_value;
    let mut step = HILL_STEP;
    let mut improved_in_sweep = false;
    let mut violations = Vec::new();
    for s in 0..steps {
        let coord = s % (2 * m);
        if coord == 0 && s > 0 {
            if !improved_in_sweep {
                step /= 2.0;
                if step < HILL_FLOOR {
                    break;
                }
            }
            improved_in_sweep = false;
        }
        let (mut a2, mut b2) = (a.clone(), b.clone());
        let scale = (a.norm().max(b.norm()) / (m as f64).sqrt()) * 1e-3;
        let target = if coord < m { &mut a2.0[coord] } else { &mut b2.0[coord - m] };
        let xi = perturbation(rng, field);
        let base = if target.norm() > scale { *target } else { Complex64::new(scale, 0.0) };
        *target += step * xi * base.norm();
        let norm = a2.norm().max(b2.norm());
        if norm == 0.0 {
            continue;
        }
        let inv = Complex64::new(1.0 / norm, 0.0);
        let (a2, b2) = (a2.scale(inv), b2.scale(inv));
        match spr_ratio(basis, &a2, &b2, p)? {
            SprOutcome::Ratio { value, .. } if value > best => {
                best = value;
                a = a2;
                b = b2;
                improved_in_sweep = true;
            }
            SprOutcome::Violation { numerator, denominator }
                if violations.len() < MAX_RECORDED_VIOLATIONS => {
                    violations.push(ViolationRecord { a: a2, b: b2, numerator, denominator });
                }
            _ => {}
        }
    }
    Ok((a, b, best, violations))
}

/// Hill climbs starting from the random pairs of `baseline` (same seed
/// streams) and from its argmax; never reports less than `baseline`.
pub fn adversarial_from(
    basis: &OrthoBasis,
    baseline: &StabilityReport,
    restarts: usize,
    steps: usize,
    seed: u64,
) -> Result<StabilityReport> {
    if restarts == 0 || steps == 0 {
        return invalid("restarts and steps must be at least 1");
    }
    let p = baseline.p;
    let (m, field) = (basis.len(), basis.field());
    let mut starts: Vec<(CoefVec, CoefVec)> = Vec::with_capacity(restarts + 1);
    if let Some(pair) = &baseline.argmax_pair {
        starts.push(pair.clone());
    }
    starts.extend((0..restarts).map(|t| random_pair(seed, t, m, field)));
    let climbed: Vec<(CoefVec, CoefVec, f64, Vec<ViolationRecord>)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(r, start)| {
            let v = spr_ratio(basis, &start.0, &start.1, p)?;
            let value = match v {
                SprOutcome::Ratio { value, .. } => value,
                _ => 0.0,
            };
            let mut rng = trial_rng(seed ^ ADVERSARIAL_STREAM, r as u64);
            climb(basis, start, value, steps, p, &mut rng)
        })
        .collect::<Result<_>>()?;

    let mut report = baseline.clone();
    for (a, b, value, violations) in climbed {
        if value > report.sup_ratio {
            report.sup_ratio = value;
            report.argmax_pair = Some((a, b));
        }
        report.violation_count += violations.len();
        for v in violations {
            if report.violations.len() < MAX_RECORDED_VIOLATIONS {
                report.violations.push(v);
            }
        }
    }
    report.non_spr = report.violation_count > 0;
    Ok(report)
}

pub fn adversarial_spr(
    basis: &OrthoBasis,
    restarts: usize,
    steps: usize,
    p: f64,
    seed: u64,
) -> Result<StabilityReport> {
    let baseline = monte_carlo_spr(basis, restarts.max(1), p, seed)?;
    adversarial_from(basis, &baseline, restarts, steps, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub p: f64,
    pub gamma: f64,
    /// `(log ‖|f|−|g|‖_p, log min_z ‖f − z g‖_p)` per pair.
    pub points: Vec<(f64, f64)>,
    pub decades: f64,
}

/// Slope of `log numerator` against `log denominator` along `f = g + t δ`
/// with `t` log-spaced over five decades.
pub fn holder_fit(basis: &OrthoBasis, trials: usize, p: f64, seed: u64) -> Result<HolderFit> {
    check_exponent(p)?;
    if trials < 10 {
        return invalid("holder fit needs at least 10 trials");
    }
    let (m, field) = (basis.len(), basis.field());
    let mut rng = trial_rng(seed ^ HOLDER_STREAM, 0);
    let b = random_unit(&mut rng, m, field);
    let dir = random_unit(&mut rng, m, field);
    let g = basis.synthesize(&b)?;
    let d = basis.synthesize(&dir)?;
    let points: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let t = 10f64.powf(-6.0 + 5.0 * i as f64 / (trials - 1) as f64);
            let f = g.zip_with(&d, |x, y| x + t * y)?;
            ratio_of(&f, &g, p, field)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter_map(|o| match o {
            SprOutcome::Ratio { numerator, denominator, .. } if numerator > 0.0 => {
                Some((denominator.ln(), numerator.ln()))
            }
            _ => None,
        })
        .collect();
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let decades = if points.is_empty() { 0.0 } else { (hi - lo) / std::f64::consts::LN_10 };
    if decades < MIN_DECADES {
        return Err(SprError::InsufficientSpread(format!(
            "denominators span {decades:.2} decades; at least {MIN_DECADES} required"
        )));
    }
    let gamma = least_squares_slope(&points)
        .ok_or_else(|| SprError::InsufficientSpread("degenerate fit".into()))?;
    Ok(HolderFit { p, gamma, points, decades })
}

/// Root `θ` of `1/4 = θ/2 + (1 − θ)/q`, by bisection on `[0, 1]`.
pub fn corollary_theta(q: f64) -> Result<f64> {
    if !(q > 4.0) {
        return invalid(format!("interpolation exponent needs q > 4, got {q}"));
    }
    let residual = |theta: f64| theta / 2.0 + (1.0 - theta) / q - 0.25;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (residual(lo) <= 0.0) == (residual(mid) <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `γ = (q − 4)/(2q − 4)`.
pub fn example6_gamma(q: f64) -> Result<f64> {
    if !(q > 4.0) {
        return invalid(format!("exponent formula needs q > 4, got {q}"));
    }
    Ok((q - 4.0) / (2.0 * q - 4.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideBySide {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl SideBySide {
    fn new(lhs: f64, rhs: f64, scale: f64) -> Self {
        let denom = lhs.abs().max(rhs.abs()).max(scale);
        let residual = if denom == 0.0 { 0.0 } else { (lhs - rhs).abs() / denom };
        Self { lhs, rhs, residual }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub delta: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// Pythagoras for `|f|² − |g|²` in the orthogonal family.
    pub expansion: SideBySide,
    /// `Σ_{i≠j} |a_i ā_j − b_i b̄_j|²` against `‖f‖⁴ + ‖g‖⁴ − 2|⟨f,g⟩|² − Σ(|a_k|² − |b_k|²)²`.
    pub algebraic: SideBySide,
    pub inequality: Option<InequalityCheck>,
    /// Exponential families only.
    pub fourier: Option<SideBySide>,
}

/// Relative scale below which residual denominators are not allowed to fall.
const IDENTITY_SCALE_REL: f64 = 1e-12;

pub fn lemma_identity_suite(
    basis: &OrthoBasis,
    a: &CoefVec,
    b: &CoefVec,
    delta: Option<f64>,
) -> Result<IdentityResiduals> {
    let m = basis.len();
    let f = basis.synthesize(a)?;
    let g = basis.synthesize(b)?;
    let pad = |c: &CoefVec| -> Vec<Complex64> {
        let mut v = c.0.clone();
        v.resize(m, Complex64::new(0.0, 0.0));
        v
    };
    let (av, bv) = (pad(a), pad(b));
    let ff = f.norm2().powi(2);
    let gg = g.norm2().powi(2);
    let fg = inner(&f, &g)?.norm_sqr();
    let scale = IDENTITY_SCALE_REL * (ff + gg).powi(2);

    let diff_sq = (&f.modulus_sq() - &g.modulus_sq()).norm2().powi(2);
    let diag: Vec<f64> = (0..m).map(|k| av[k].norm_sqr() - bv[k].norm_sqr()).collect();
    let diag_term: f64 = (0..m).map(|k| diag[k].powi(2) * basis.s_norm_sq(k)).sum();
    let an = CoefVec::new(av.clone()).norm().powi(2);
    let bn = CoefVec::new(bv.clone()).norm().powi(2);
    let mut off_term = 0.0;
    let mut off_plain = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let d = (av[i] * av[j].conj() - bv[i] * bv[j].conj()).norm_sqr();
            off_plain += d;
            match basis.field() {
                Field::Complex => off_term += d * basis.pair_norm_sq(i, j),
                // r_i r_j = r_j r_i: the (i, j) and (j, i) terms coincide
                Field::Real if i < j => off_term += 4.0 * d * basis.pair_norm_sq(i, j),
                Field::Real => {}
            }
        }
    }
    let expansion =
        SideBySide::new(diff_sq, diag_term + (an - bn).powi(2) + off_term, scale);
    let diag_sq: f64 = diag.iter().map(|d| d * d).sum();
    let algebraic = SideBySide::new(off_plain, ff * ff + gg * gg - 2.0 * fg - diag_sq, scale);

    let inequality = delta.map(|delta| {
        let rhs = delta * (ff * gg - fg) + (ff - gg).powi(2);
        InequalityCheck { lhs: diff_sq, rhs, delta, holds: diff_sq >= rhs - scale }
    });

    let fourier = match basis.provenance() {
        Provenance::Exponential { .. } => {
            let hat_diff: f64 = basis
                .elements()
                .iter()
                .map(|r| Ok(inner(&f, r)?.norm_sqr() - inner(&g, r)?.norm_sqr()))
                .collect::<Result<Vec<f64>>>()?
                .iter()
                .map(|d| d * d)
                .sum();
            Some(SideBySide::new(
                (ff - gg).powi(2) + (ff * ff + gg * gg - 2.0 * fg),
                diff_sq + hat_diff,
                scale,
            ))
        }
        _ => None,
    };
    Ok(IdentityResiduals { expansion, algebraic, inequality, fourier })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    /// `‖f − z g‖₂²` after normalizing to `‖f‖₂ ≤ ‖g‖₂ = 1`.
    pub lhs: f64,
    /// `16 C² δ⁻¹ ‖|f| − |g|‖₄²` under the same normalization.
    pub rhs: f64,
    pub margin: f64,
    pub anomaly: bool,
}

/// Compares both sides of `‖f − z g‖₂² ≤ 16 C² δ⁻¹ ‖|f| − |g|‖₄²`.
pub fn proposition_bound_check(
    basis: &OrthoBasis,
    a: &CoefVec,
    b: &CoefVec,
    constant: f64,
    delta: f64,
) -> Result<BoundComparison> {
    if !(delta > 0.0) {
        return invalid("bound check needs a positive moment gap");
    }
    let mut f = basis.synthesize(a)?;
    let mut g = basis.synthesize(b)?;
    if f.norm2() > g.norm2() {
        std::mem::swap(&mut f, &mut g);
    }
    let gn = g.norm2();
    if gn == 0.0 {
        return Ok(BoundComparison { lhs: 0.0, rhs: 0.0, margin: 0.0, anomaly: false });
    }
    let inv = Complex64::new(1.0 / gn, 0.0);
    let (f, g) = (f.scale(inv), g.scale(inv));
    let lhs = min_phase_dist(&f, &g, 2.0, basis.field())?.distance.powi(2);
    let den = (&f.modulus() - &g.modulus()).norm_p(4.0)?;
    let rhs = 16.0 * constant * constant / delta * den * den;
    let margin = rhs - lhs;
    Ok(BoundComparison { lhs, rhs, margin, anomaly: margin < -1e-12 })
}

/// Uniform random draw used by property tests and the CLI for pair sampling.
pub fn random_pair_for(seed: u64, trial: usize, basis: &OrthoBasis) -> (CoefVec, CoefVec) {
    random_pair(seed, trial, basis.len(), basis.field())
}
