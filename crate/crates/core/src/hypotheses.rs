//! Checks of the structural hypotheses on an orthonormal family:
//!
//! * orthogonality of `{1, s_i, r_j conj(r_k)}` (`j ≠ k`, or `j < k` for real
//!   families),
//! * a uniform `L⁴` bound on the `r_j`,
//! * a moment gap `δ > 0` with `‖s_i‖₂² ≥ δ` and `‖r_j conj(r_k)‖₂² ≥ δ`,
//!
//! plus empirical embedding constants `sup ‖f‖_p / ‖f‖₂` over the span.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{CoefVec, Field, OrthoBasis};
use crate::error::{invalid, Result};
use crate::measure::{check_exponent, inner, SampledFunction};
use crate::rng::{random_unit, trial_rng};

pub const DEFAULT_ORTHOGONALITY_TOL: f64 = 1e-8;
pub const DEFAULT_DELTA_THRESHOLD: f64 = 1e-6;
/// Beyond this many member pairs the orthogonality scan is subsampled.
pub const MAX_FULL_PAIRS: usize = 200_000;
/// Beyond this many elements the `(i, j)` moment scan is subsampled.
pub const MAX_FULL_MOMENT_SCAN: usize = 64;

/// Member of the family `{1, s_i, r_j conj(r_k)}`; indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "member", rename_all = "kebab-case")]
pub enum FamilyMember {
    One,
    S { i: usize },
    Product { j: usize, k: usize },
}

impl std::fmt::Display for FamilyMember {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyMember::One => write!(f, "1"),
            FamilyMember::S { i } => write!(f, "s_{i}"),
            FamilyMember::Product { j, k } => write!(f, "r_{j} conj(r_{k})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityWitness {
    pub first: FamilyMember,
    pub second: FamilyMember,
    pub value: Complex64,
    pub modulus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityCheck {
    /// `"H1"` for complex families, `"H1B"` for real ones.
    pub variant: String,
    pub max_violation: f64,
    pub witness: Option<OrthogonalityWitness>,
    pub tol: f64,
    pub passed: bool,
    pub pairs_checked: usize,
    pub subsampled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub sup_l4: f64,
    /// 1-based index attaining `sup_l4`.
    pub sup_l4_index: usize,
    pub min_s_norm_sq: f64,
    pub min_pair_norm_sq: Option<f64>,
    pub delta: f64,
    pub delta_witness: FamilyMember,
    /// `max_j |‖s_j‖₂² − (‖r_j‖₄⁴ − 1)|`.
    pub s_norm_identity_gap: f64,
    pub subsampled: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SprHypothesesSatisfied,
    /// Some `s_j` vanishes: `|r_j|` is constant.
    Degenerate,
    FailedWithWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstWitnesses {
    pub h1: Option<OrthogonalityWitness>,
    pub h2: usize,
    pub h3: FamilyMember,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub field: Field,
    pub h1_max_violation: f64,
    pub h2_sup_l4: f64,
    pub h3_delta: f64,
    pub passed: HypothesisFlags,
    pub worst_witnesses: WorstWitnesses,
    pub verdict: Verdict,
    pub orthogonality: OrthogonalityCheck,
    pub moments: MomentCheck,
}

fn family(basis: &OrthoBasis) -> Vec<(FamilyMember, SampledFunction)> {
    let m = basis.len();
    let mut out = vec![(
        FamilyMember::One,
        SampledFunction::constant(basis.measure().clone(), Complex64::new(1.0, 0.0)),
    )];
    for (i, s) in basis.s_elements().iter().enumerate() {
        out.push((FamilyMember::S { i: i + 1 }, s.clone()));
    }
    for j in 0..m {
        for k in 0..m {
            let keep = match basis.field() {
                Field::Complex => j != k,
                Field::Real => j < k,
            };
            if keep {
                out.push((FamilyMember::Product { j: j + 1, k: k + 1 }, basis.product(j, k)));
            }
        }
    }
    out
}

/// Largest `|⟨u, v⟩|` over distinct members `u, v` of the family.
pub fn check_orthogonality(basis: &OrthoBasis, tol: f64) -> Result<OrthogonalityCheck> {
    if basis.is_empty() {
        return invalid("empty basis");
    }
    let members = family(basis);
    let n = members.len();
    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let subsampled = pairs.len() > MAX_FULL_PAIRS;
    if subsampled {
        let stride = pairs.len().div_ceil(MAX_FULL_PAIRS);
        pairs = pairs.into_iter().step_by(stride).collect();
    }
    let worst = pairs
        .par_iter()
        .map(|&(a, b)| {
            let v = inner(&members[a].1, &members[b].1).expect("family shares a measure");
            (v.norm(), a, b, v)
        })
        .reduce_with(|x, y| if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) { y } else { x });
    let (max_violation, witness) = match worst {
        Some((modulus, a, b, value)) => (
            modulus,
            Some(OrthogonalityWitness { first: members[a].0, second: members[b].0, value, modulus }),
        ),
        None => (0.0, None),
    };
    Ok(OrthogonalityCheck {
        variant: match basis.field() {
            Field::Complex => "H1".into(),
            Field::Real => "H1B".into(),
        },
        max_violation,
        witness,
        tol,
        passed: max_violation <= tol,
        pairs_checked: pairs.len(),
        subsampled,
    })
}

/// `sup_j ‖r_j‖₄` and `δ = min(min_j ‖s_j‖₂², min_{i≠j} ‖r_i conj(r_j)‖₂²)`.
pub fn check_moments(basis: &OrthoBasis) -> Result<MomentCheck> {
    if basis.is_empty() {
        return invalid("empty basis");
    }
    let m = basis.len();
    let l4: Vec<f64> = basis
        .elements()
        .iter()
        .map(|r| r.norm_p(4.0))
        .collect::<Result<_>>()?;
    let (sup_idx, sup_l4) = l4
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let gap = (0..m)
        .map(|j| (basis.s_norm_sq(j) - (l4[j].powi(4) - 1.0)).abs())
        .fold(0.0, f64::max);
    let (s_idx, min_s) = basis
        .s_norms_sq()
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });

    let subsampled = m > MAX_FULL_MOMENT_SCAN;
    let pairs: Vec<(usize, usize)> = if subsampled {
        (0..m).map(|i| (i, (i + 1) % m)).collect()
    } else {
        (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).collect()
    };
    let min_pair = pairs
        .iter()
        .map(|&(i, j)| (basis.pair_norm_sq(i, j), i, j))
        .fold(None::<(f64, usize, usize)>, |acc, x| match acc {
            Some(a) if a.0 <= x.0 => Some(a),
            _ => Some(x),
        });

    let (delta, delta_witness) = match min_pair {
        Some((v, i, j)) if v < min_s => (v, FamilyMember::Product { j: i + 1, k: j + 1 }),
        _ => (min_s, FamilyMember::S { i: s_idx + 1 }),
    };
    Ok(MomentCheck {
        sup_l4,
        sup_l4_index: sup_idx + 1,
        min_s_norm_sq: min_s,
        min_pair_norm_sq: min_pair.map(|p| p.0),
        delta,
        delta_witness,
        s_norm_identity_gap: gap,
        subsampled,
    })
}

pub fn full_report(basis: &OrthoBasis) -> Result<HypothesisReport> {
    full_report_with(basis, DEFAULT_ORTHOGONALITY_TOL, DEFAULT_DELTA_THRESHOLD)
}

pub fn full_report_with(
    basis: &OrthoBasis,
    orthogonality_tol: f64,
    delta_threshold: f64,
) -> Result<HypothesisReport> {
    let orthogonality = check_orthogonality(basis, orthogonality_tol)?;
    let moments = check_moments(basis)?;
    let passed = HypothesisFlags {
        h1: orthogonality.passed,
        h2: moments.sup_l4.is_finite(),
        h3: moments.delta > delta_threshold,
    };
    let verdict = if passed.h1 && passed.h2 && passed.h3 {
        Verdict::SprHypothesesSatisfied
    } else if passed.h1 && moments.min_s_norm_sq <= delta_threshold {
        Verdict::Degenerate
    } else {
        Verdict::FailedWithWitness
    };
    Ok(HypothesisReport {
        field: basis.field(),
        h1_max_violation: orthogonality.max_violation,
        h2_sup_l4: moments.sup_l4,
        h3_delta: moments.delta,
        passed,
        worst_witnesses: WorstWitnesses {
            h1: orthogonality.witness,
            h2: moments.sup_l4_index,
            h3: moments.delta_witness,
        },
        verdict,
        orthogonality,
        moments,
    })
}

/// Empirical sup of `‖f‖_p / ‖f‖₂` over the span; a lower bound for the true
/// embedding constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEstimate {
    pub p: f64,
    pub constant: f64,
    pub trials: usize,
    pub argmax_coeffs: CoefVec,
    pub label: String,
}

/// Deterministic probes: every unit vector, the flat vector and (for
/// `M ≤ 64`) every normalized pair `(e_i + e_j)/√2`.
pub fn deterministic_probes(m: usize) -> Vec<CoefVec> {
    let mut probes: Vec<CoefVec> = (0..m).map(|k| CoefVec::unit(m, k)).collect();
    probes.push(CoefVec::from_real(&vec![1.0; m]).normalized());
    if m <= MAX_FULL_MOMENT_SCAN {
        for i in 0..m {
            for j in i + 1..m {
                let mut v = CoefVec::zeros(m);
                v.0[i] = Complex64::new(1.0, 0.0);
                v.0[j] = Complex64::new(1.0, 0.0);
                probes.push(v.normalized());
            }
        }
    }
    probes
}

pub fn embedding_ratio(basis: &OrthoBasis, a: &CoefVec, p: f64) -> Result<f64> {
    let f = basis.synthesize(a)?;
    let l2 = f.norm2();
    if l2 == 0.0 {
        return Ok(0.0);
    }
    Ok(f.norm_p(p)? / l2)
}

pub fn embedding_constant(
    basis: &OrthoBasis,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<EmbeddingEstimate> {
    check_exponent(p)?;
    if basis.is_empty() {
        return invalid("empty basis");
    }
    let m = basis.len();
    let mut candidates = deterministic_probes(m);
    candidates.extend((0..trials).map(|t| random_unit(&mut trial_rng(seed, t as u64), m, basis.field())));
    let ratios: Vec<f64> = candidates
        .par_iter()
        .map(|a| embedding_ratio(basis, a, p))
        .collect::<Result<_>>()?;
    let (best, constant) = ratios
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
    Ok(EmbeddingEstimate {
        p,
        constant,
        trials,
        argmax_coeffs: candidates[best].clone(),
        label: "empirical sup".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SupportPoint;

    fn ternary() -> Vec<SupportPoint> {
        let a = 1.5f64.sqrt();
        vec![
            SupportPoint::real(-a, 1.0 / 3.0),
            SupportPoint::real(0.0, 1.0 / 3.0),
            SupportPoint::real(a, 1.0 / 3.0),
        ]
    }

    #[test]
    fn base4_passes_h1b() {
        let b = OrthoBasis::lacunary_sine(4, 4, 1200).unwrap();
        let c = check_orthogonality(&b, DEFAULT_ORTHOGONALITY_TOL).unwrap();
        assert_eq!(c.variant, "H1B");
        assert!(c.max_violation < 1e-10, "{}", c.max_violation);
        assert!(c.passed);
    }

    #[test]
    fn base3_fails_with_half_overlap() {
        let b = OrthoBasis::lacunary_sine(3, 3, 256).unwrap();
        let c = check_orthogonality(&b, DEFAULT_ORTHOGONALITY_TOL).unwrap();
        assert!(!c.passed);
        assert!((c.max_violation - 0.5).abs() < 1e-10);
        let w = c.witness.unwrap();
        assert!(matches!(w.first, FamilyMember::S { .. }));
        assert!(matches!(w.second, FamilyMember::Product { .. }));
    }

    #[test]
    fn single_element_checks_only_constant_and_s() {
        let b = OrthoBasis::lacunary_sine(1, 4, 64).unwrap();
        let c = check_orthogonality(&b, DEFAULT_ORTHOGONALITY_TOL).unwrap();
        assert_eq!(c.pairs_checked, 1);
        assert!(c.passed);
    }

    #[test]
    fn moments_and_delta() {
        let b = OrthoBasis::lacunary_sine(3, 4, 512).unwrap();
        let m = check_moments(&b).unwrap();
        assert!((m.delta - 0.5).abs() < 1e-10);
        assert!((m.sup_l4 - 1.5f64.powf(0.25)).abs() < 1e-10);
        assert!(m.s_norm_identity_gap < 1e-10);

        let t = OrthoBasis::iid(&ternary(), 3).unwrap();
        assert!((check_moments(&t).unwrap().delta - 0.5).abs() < 1e-12);

        let e = OrthoBasis::exponential(&[1, 2], 8).unwrap();
        let r = full_report(&e).unwrap();
        assert!(r.h3_delta < 1e-20);
        assert!(!r.passed.h3);
        assert_eq!(r.verdict, Verdict::Degenerate);
    }

    #[test]
    fn full_report_verdicts() {
        let b = OrthoBasis::lacunary_sine(4, 4, 1100).unwrap();
        assert_eq!(full_report(&b).unwrap().verdict, Verdict::SprHypothesesSatisfied);

        let rad = OrthoBasis::iid_unchecked(
            &[SupportPoint::real(1.0, 0.5), SupportPoint::real(-1.0, 0.5)],
            3,
        )
        .unwrap();
        let r = full_report(&rad).unwrap();
        assert_eq!(r.h3_delta, 0.0);
        assert_ne!(r.verdict, Verdict::SprHypothesesSatisfied);

        let bad = OrthoBasis::rudin_2d(&[1, 2, 3], 3, 16).unwrap();
        let r = full_report(&bad).unwrap();
        assert_eq!(r.verdict, Verdict::FailedWithWitness);
        assert!(r.worst_witnesses.h1.is_some());
    }

    #[test]
    fn embedding_single_probe_and_monotonicity() {
        let b = OrthoBasis::lacunary_sine(3, 4, 512).unwrap();
        let r = embedding_ratio(&b, &CoefVec::unit(3, 0), 4.0).unwrap();
        assert!((r - 1.5f64.powf(0.25)).abs() < 1e-12);
        let small = embedding_constant(&b, 4.0, 10, 3).unwrap();
        let large = embedding_constant(&b, 4.0, 50, 3).unwrap();
        assert!(large.constant >= small.constant);
        assert!(small.constant >= 1.0 - 1e-9);
    }
}
