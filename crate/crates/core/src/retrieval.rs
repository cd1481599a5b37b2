//! Recovery of `f = Σ a_j r_j` from `|f|` up to a global phase.
//!
//! The expansion of `|f|²` in the orthogonal family `{1, s_k, r_j conj(r_k)}`
//! exposes every `|a_k|²` and every product `a_j conj(a_k)` as a linear read
//! `⟨|f|², ·⟩ / ‖·‖₂²`. Fixing one nonzero anchor coefficient to be real and
//! positive then pins down the rest.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{CoefVec, Field, OrthoBasis};
use crate::error::{invalid, Result, SprError};
use crate::measure::{inner, SampledFunction};

pub const DEFAULT_TOL: f64 = 1e-8;
/// Residual above this fraction of `‖modulus‖₂` marks the input as outside the span.
pub const MISMATCH_REL: f64 = 1e-6;
const NEGATIVE_FLOOR: f64 = -1e-12;
/// A real off-diagonal read smaller than this fraction of `√d_j·a_{n₀}` does
/// not determine a sign.
const SIGN_CONFIDENCE: f64 = 0.5;
/// Diagonal reads below this fraction of the anchor read need no sign.
const NEGLIGIBLE_REL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryFlags {
    pub zero_function: bool,
    pub weak_anchor: bool,
    pub model_mismatch: bool,
    pub sign_ambiguity: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryDiagnostics {
    /// Clipped diagonal reads `d_k ≈ |a_k|²`.
    pub diagonal_reads: Vec<f64>,
    /// `max_j |d_j − |p_{j,n₀}|² / d_{n₀}|`.
    pub consistency_gap: f64,
    /// 1-based indices whose sign came from the secondary anchor.
    pub secondary_resolved: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub coeffs: CoefVec,
    /// 0-based anchor index `n₀`.
    pub anchor_index: usize,
    pub residual: f64,
    pub diagnostics: RecoveryDiagnostics,
    pub flags: RecoveryFlags,
    /// Second candidate when a real sign could not be resolved.
    pub alternate: Option<CoefVec>,
}

impl RecoveryResult {
    /// Both representatives `±coeffs` for a real family; `coeffs` alone otherwise.
    pub fn sign_candidates(&self, field: Field) -> Vec<CoefVec> {
        match field {
            Field::Real => vec![self.coeffs.clone(), self.coeffs.scale(Complex64::new(-1.0, 0.0))],
            Field::Complex => vec![self.coeffs.clone()],
        }
    }
}

fn validate_modulus(basis: &OrthoBasis, modulus: &SampledFunction) -> Result<()> {
    if modulus.measure() != basis.measure() {
        return Err(SprError::InvalidArgument(
            "modulus is sampled on a different measure than the basis".into(),
        ));
    }
    for (k, v) in modulus.values().iter().enumerate() {
        if v.im.abs() > 1e-12 || v.re < NEGATIVE_FLOOR || !v.re.is_finite() {
            return invalid(format!("modulus value at atom {k} is not a nonnegative real: {v}"));
        }
    }
    Ok(())
}

fn off_diagonal_read(
    basis: &OrthoBasis,
    q: &SampledFunction,
    j: usize,
    anchor: usize,
) -> Result<Complex64> {
    let norm = basis.pair_norm_sq(j, anchor);
    if norm <= 0.0 {
        return Err(SprError::DegenerateBasis(format!(
            "r_{} conj(r_{}) vanishes",
            j + 1,
            anchor + 1
        )));
    }
    let read = inner(q, &basis.product(j, anchor))? / norm;
    Ok(match basis.field() {
        Field::Complex => read,
        Field::Real => Complex64::new(read.re / 2.0, 0.0),
    })
}

pub fn recover_coefficients(
    basis: &OrthoBasis,
    modulus: &SampledFunction,
    tol: f64,
) -> Result<RecoveryResult> {
    validate_modulus(basis, modulus)?;
    let m = basis.len();
    let q = modulus.map(|v| Complex64::new(v.re * v.re, 0.0));

    let diag: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|k| {
            let norm = basis.s_norm_sq(k);
            if norm <= 0.0 {
                return Err(SprError::DegenerateBasis(format!("s_{} vanishes identically", k + 1)));
            }
            Ok((inner(&q, &basis.s_elements()[k])?.re / norm).max(0.0))
        })
        .collect::<Result<_>>()?;
    let anchor = diag
        .iter()
        .enumerate()
        .fold(0, |best, (k, &d)| if d > diag[best] { k } else { best });
    let d0 = diag[anchor];
    let mut flags = RecoveryFlags::default();

    if d0 <= tol * tol {
        flags.zero_function = true;
        let residual = modulus.norm2();
        flags.model_mismatch = residual > MISMATCH_REL * modulus.norm2().max(tol);
        return Ok(RecoveryResult {
            coeffs: CoefVec::zeros(m),
            anchor_index: anchor,
            residual,
            diagnostics: RecoveryDiagnostics {
                diagonal_reads: diag,
                consistency_gap: 0.0,
                secondary_resolved: vec![],
            },
            flags,
            alternate: None,
        });
    }
    flags.weak_anchor = d0 < 10.0 * tol * tol;

    let reads: Vec<Complex64> = (0..m)
        .into_par_iter()
        .map(|j| {
            if j == anchor {
                Ok(Complex64::new(d0, 0.0))
            } else {
                off_diagonal_read(basis, &q, j, anchor)
            }
        })
        .collect::<Result<_>>()?;
    let consistency_gap = (0..m)
        .map(|j| (diag[j] - reads[j].norm_sqr() / d0).abs())
        .fold(0.0, f64::max);

    let a0 = d0.sqrt();
    let mut secondary_resolved = Vec::new();
    let mut alternate = None;
    let coeffs = match basis.field() {
        Field::Complex => CoefVec::new(reads.iter().map(|p| p / a0).collect()),
        Field::Real => {
            let mags: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
            // resolved entries take p/a₀, which is linear in the data; √d_j
            // would turn rounding noise in a vanishing read into a 1e-8 error
            let negligible = |j: usize| diag[j] <= (NEGLIGIBLE_REL * d0).max(tol * tol);
            let mut values: Vec<Option<f64>> = (0..m)
                .map(|j| {
                    if j == anchor {
                        Some(a0)
                    } else if negligible(j) || reads[j].re.abs() >= SIGN_CONFIDENCE * mags[j] * a0 {
                        Some(reads[j].re / a0)
                    } else {
                        None
                    }
                })
                .collect();
            if values.iter().any(Option::is_none) {
                let secondary = (0..m)
                    .filter(|&k| k != anchor && !negligible(k) && values[k].is_some())
                    .max_by(|&x, &y| mags[x].total_cmp(&mags[y]));
                if let Some(n1) = secondary {
                    let s1 = values[n1].unwrap().signum();
                    for j in 0..m {
                        if values[j].is_none() {
                            let p = off_diagonal_read(basis, &q, j, n1)?.re;
                            if p.abs() >= SIGN_CONFIDENCE * mags[j] * mags[n1] {
                                values[j] = Some(mags[j] * p.signum() * s1);
                                secondary_resolved.push(j + 1);
                            }
                        }
                    }
                }
            }
            let ambiguous: Vec<usize> = (0..m).filter(|&j| values[j].is_none()).collect();
            let primary: Vec<f64> = (0..m).map(|j| values[j].unwrap_or(mags[j])).collect();
            if !ambiguous.is_empty() {
                flags.sign_ambiguity = true;
                let mut flipped = primary.clone();
                for &j in &ambiguous {
                    flipped[j] = -flipped[j];
                }
                alternate = Some(CoefVec::from_real(&flipped));
            }
            CoefVec::from_real(&primary)
        }
    };

    let residual_of = |c: &CoefVec| -> Result<f64> {
        let f = basis.synthesize(c)?;
        Ok((&f.modulus() - modulus).norm2())
    };
    let mut coeffs = coeffs;
    let mut residual = residual_of(&coeffs)?;
    if let Some(alt) = alternate.take() {
        let r_alt = residual_of(&alt)?;
        if r_alt < residual {
            alternate = Some(std::mem::replace(&mut coeffs, alt));
            residual = r_alt;
        } else {
            alternate = Some(alt);
        }
    }
    flags.model_mismatch = residual > MISMATCH_REL * modulus.norm2();

    Ok(RecoveryResult {
        coeffs,
        anchor_index: anchor,
        residual,
        diagnostics: RecoveryDiagnostics { diagonal_reads: diag, consistency_gap, secondary_resolved },
        flags,
        alternate,
    })
}

pub fn reconstruct(
    basis: &OrthoBasis,
    modulus: &SampledFunction,
    tol: f64,
) -> Result<SampledFunction> {
    basis.synthesize(&recover_coefficients(basis, modulus, tol)?.coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::min_phase_dist;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_element_is_recovered() {
        let b = OrthoBasis::lacunary_sine(3, 4, 512).unwrap();
        let f = basis_fn(&b, &CoefVec::unit(3, 0));
        let r = recover_coefficients(&b, &f.modulus(), DEFAULT_TOL).unwrap();
        assert!(r.coeffs.max_abs_diff(&CoefVec::unit(3, 0)) < 1e-10, "{r:?}");
        assert!(r.residual < 1e-10);
        assert_eq!(r.anchor_index, 0);
    }

    fn basis_fn(b: &OrthoBasis, a: &CoefVec) -> SampledFunction {
        b.synthesize(a).unwrap()
    }

    #[test]
    fn rudin_round_trip_up_to_phase() {
        let b = OrthoBasis::rudin_2d(&[1, 2, 5], 3, 32).unwrap();
        let a = CoefVec::new(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2), c(0.0, 0.0)]);
        let f = basis_fn(&b, &a).scale(Complex64::from_polar(1.0, 1.1));
        let r = recover_coefficients(&b, &f.modulus(), DEFAULT_TOL).unwrap();
        let z = r.coeffs.dot(&a);
        let aligned = a.scale(z / z.norm());
        assert!(r.coeffs.max_abs_diff(&aligned) < 1e-8, "{:?}", r.coeffs);
        assert!(r.coeffs.0[r.anchor_index].im == 0.0 && r.coeffs.0[r.anchor_index].re >= 0.0);
        assert!(!r.flags.model_mismatch);
    }

    #[test]
    fn zero_modulus() {
        let b = OrthoBasis::lacunary_sine(3, 4, 512).unwrap();
        let zero = SampledFunction::zeros(b.measure().clone());
        let r = recover_coefficients(&b, &zero, DEFAULT_TOL).unwrap();
        assert!(r.flags.zero_function);
        assert_eq!(r.coeffs, CoefVec::zeros(3));
        assert!(!r.flags.model_mismatch);
    }

    #[test]
    fn off_band_perturbation_is_flagged() {
        let b = OrthoBasis::lacunary_sine(3, 4, 512).unwrap();
        let pert = b
            .measure()
            .sample_interval(|x| Complex64::from_polar(0.1, 2.0 * PI * 7.0 * x))
            .unwrap();
        let f = &basis_fn(&b, &CoefVec::unit(3, 0)) + &pert;
        let r = recover_coefficients(&b, &f.modulus(), DEFAULT_TOL).unwrap();
        assert!(r.flags.model_mismatch);
        assert!(r.residual > 1e-3);
    }

    #[test]
    fn real_sign_and_both_candidates() {
        let b = OrthoBasis::lacunary_sine(3, 4, 512).unwrap();
        let a = CoefVec::from_real(&[1.0, -1.0, 0.0]);
        let f = basis_fn(&b, &a);
        let r = recover_coefficients(&b, &f.modulus(), DEFAULT_TOL).unwrap();
        let d = r.coeffs.max_abs_diff(&a).min(r.coeffs.max_abs_diff(&a.scale(c(-1.0, 0.0))));
        assert!(d < 1e-10);
        for cand in r.sign_candidates(Field::Real) {
            let g = basis_fn(&b, &cand);
            assert!((&g.modulus() - &f.modulus()).norm2() < 1e-10);
        }
    }

    #[test]
    fn negative_modulus_rejected() {
        let b = OrthoBasis::lacunary_sine(2, 4, 128).unwrap();
        let bad = SampledFunction::constant(b.measure().clone(), c(-0.1, 0.0));
        assert!(matches!(
            recover_coefficients(&b, &bad, DEFAULT_TOL),
            Err(SprError::InvalidArgument(_))
        ));
    }

    #[test]
    fn reconstruct_matches_up_to_phase() {
        let b = OrthoBasis::rudin_2d(&[1, 2, 5], 3, 32).unwrap();
        let a = CoefVec::new(vec![c(0.3, 0.4), c(-0.5, 0.1), c(0.2, -0.6)]).normalized();
        let f = basis_fn(&b, &a);
        let g = reconstruct(&b, &f.modulus(), DEFAULT_TOL).unwrap();
        assert!(min_phase_dist(&g, &f, 2.0, Field::Complex).unwrap().distance < 1e-8);
    }
}
