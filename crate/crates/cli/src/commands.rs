//! One runner per subcommand. Each returns the `results` section of its report.

use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};
use spr_lab::hypotheses::{self, Verdict};
use spr_lab::measure::SupportPoint;
use spr_lab::retrieval::recover_coefficients;
use spr_lab::sidon::{
    density_profile, greedy_bh, log_checkpoints, singer_difference_set, verify_bh,
    DEFAULT_SINGER_BUDGET,
};
use spr_lab::stability::{
    adversarial_from, holder_fit, lemma_identity_suite, monte_carlo_spr, random_pair_for,
};
use spr_lab::{io, CoefVec, OrthoBasis};

use crate::config::{
    BasisKind, BasisParams, CheckParams, IdentityParams, RetrieveParams, SidonMethod, SidonParams,
    StabilityParams,
};
use crate::error::CliError;

/// Results plus whether the run contradicted an expected verdict.
pub struct CommandOutput {
    pub results: Value,
    pub unexpected: Option<String>,
    /// A diagnostic that did not complete; the report is still written.
    pub diagnostic: Option<String>,
}

impl CommandOutput {
    fn ok(results: Value) -> Self {
        Self { results, unexpected: None, diagnostic: None }
    }
}

/// `p/q` or a decimal.
pub fn parse_number(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let bad = || CliError::config(format!("cannot parse number '{s}'"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            Ok(p / q)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

/// `re` or `re:im`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    match s.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(parse_number(re)?, parse_number(im)?)),
        None => Ok(Complex64::new(parse_number(s)?, 0.0)),
    }
}

/// `re:im:prob`.
pub fn parse_support_point(s: &str) -> Result<SupportPoint, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!("support point '{s}' is not re:im:prob")));
    }
    Ok(SupportPoint::new(
        Complex64::new(parse_number(parts[0])?, parse_number(parts[1])?),
        parse_number(parts[2])?,
    ))
}

fn require<T: Copy>(v: Option<T>, name: &str, kind: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::config(format!("--{name} is required for kind {kind}")))
}

pub fn build_basis(p: &BasisParams) -> Result<OrthoBasis, CliError> {
    let name = match p.kind {
        BasisKind::LacunarySine => "lacunary-sine",
        BasisKind::LacunaryPoly => "lacunary-poly",
        BasisKind::Rudin2d => "rudin-2d",
        BasisKind::Iid => "iid",
        BasisKind::Exponential => "exponential",
    };
    let basis = match p.kind {
        BasisKind::LacunarySine => OrthoBasis::lacunary_sine(
            require(p.m, "m", name)?,
            require(p.base, "base", name)?,
            require(p.grid, "grid", name)?,
        )?,
        BasisKind::LacunaryPoly => {
            let alpha = p.alpha.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>()?;
            OrthoBasis::lacunary_poly(
                &alpha,
                require(p.a, "a", name)?,
                require(p.m, "m", name)?,
                require(p.grid, "grid", name)?,
            )?
        }
        BasisKind::Rudin2d => {
            let seq = p
                .seq
                .iter()
                .map(|&n| u64::try_from(n).map_err(|_| CliError::config("rudin-2d needs positive terms")))
                .collect::<Result<Vec<_>, _>>()?;
            OrthoBasis::rudin_2d(&seq, require(p.m, "m", name)?, require(p.grid, "grid", name)?)?
        }
        BasisKind::Iid => {
            let support =
                p.support.iter().map(|s| parse_support_point(s)).collect::<Result<Vec<_>, _>>()?;
            let m = require(p.m, "m", name)?;
            if p.unchecked {
                OrthoBasis::iid_unchecked(&support, m)?
            } else {
                OrthoBasis::iid(&support, m)?
            }
        }
        BasisKind::Exponential => OrthoBasis::exponential(&p.seq, require(p.grid, "grid", name)?)?,
    };
    Ok(if p.complexify { basis.complexified() } else { basis })
}

pub fn run_basis(p: &BasisParams) -> Result<CommandOutput, CliError> {
    let basis = build_basis(p)?;
    let manifest = io::write_basis(&basis, &p.out)?;
    Ok(CommandOutput::ok(json!({
        "manifest": p.out,
        "elements": manifest.elements,
        "field": basis.field(),
        "len": basis.len(),
        "orthonormality_defect": basis.orthonormality_defect(),
        "notes": basis.notes(),
    })))
}

pub fn hypothesis_summary(basis: &OrthoBasis, tol: f64) -> Result<Value, CliError> {
    let report = hypotheses::full_report_with(basis, tol, hypotheses::DEFAULT_DELTA_THRESHOLD)?;
    let probe_l4 = hypotheses::embedding_constant(basis, 4.0, 0, 0)?;
    Ok(json!({
        "hypotheses": report,
        "delta": report.h3_delta,
        "verdict": report.verdict,
        "flagged_non_spr": basis.is_flagged_non_spr(),
        "provenance": basis.provenance(),
        "notes": basis.notes(),
        "embedding_l4_probe_sup": probe_l4.constant,
    }))
}

pub fn run_check(p: &CheckParams) -> Result<CommandOutput, CliError> {
    let basis = io::load_basis(&p.basis)?;
    Ok(CommandOutput::ok(hypothesis_summary(&basis, p.tol)?))
}

pub fn run_sidon(p: &SidonParams) -> Result<CommandOutput, CliError> {
    let seq = match p.method {
        SidonMethod::Greedy => greedy_bh(p.h, p.count, p.limit)?,
        SidonMethod::Singer => {
            if p.h != 2 {
                return Err(CliError::config("perfect difference sets are B2 only; use --h 2"));
            }
            let q = p.q.ok_or_else(|| CliError::config("--q is required for method singer"))?;
            singer_difference_set(q, DEFAULT_SINGER_BUDGET)?
        }
    };
    let verdict = verify_bh(&seq.terms, p.h)?;
    let density = density_profile(&seq.terms, &log_checkpoints(&seq.terms, p.checkpoints));
    let mut results = serde_json::to_value(&seq).map_err(|e| CliError::config(e.to_string()))?;
    results["verification"] = json!(verdict);
    results["density"] = json!(density);
    let unexpected = (!verdict.holds).then(|| format!("generated sequence is not B{}", p.h));
    Ok(CommandOutput { results, unexpected, diagnostic: None })
}

pub fn coeffs_json(c: &CoefVec) -> Value {
    json!(c.entries().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

pub fn run_retrieve(p: &RetrieveParams) -> Result<CommandOutput, CliError> {
    let basis = io::load_basis(&p.basis)?;
    let modulus = io::read_sampled_csv(&p.modulus, basis.measure())?;
    let r = recover_coefficients(&basis, &modulus, p.tol)?;
    Ok(CommandOutput::ok(json!({
        "coeffs": coeffs_json(&r.coeffs),
        "anchor": r.anchor_index + 1,
        "residual": r.residual,
        "flags": r.flags,
        "diagnostics": r.diagnostics,
        "alternate": r.alternate.as_ref().map(coeffs_json),
    })))
}

/// `RESTARTSxSTEPS`.
pub fn parse_budget(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::config(format!("adversarial budget '{s}' is not RESTARTSxSTEPS"));
    let (r, st) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((r.trim().parse().map_err(|_| bad())?, st.trim().parse().map_err(|_| bad())?))
}

fn spr_expected(basis: &OrthoBasis) -> Result<bool, CliError> {
    Ok(!basis.is_flagged_non_spr()
        && hypotheses::full_report(basis)?.verdict == Verdict::SprHypothesesSatisfied)
}

pub fn run_stability(p: &StabilityParams, seed: u64) -> Result<CommandOutput, CliError> {
    let basis = io::load_basis(&p.basis)?;
    let mut report = monte_carlo_spr(&basis, p.trials, p.p, seed)?;
    let monte_carlo_sup = report.sup_ratio;
    if let Some(budget) = &p.adversarial {
        let (restarts, steps) = parse_budget(budget)?;
        report = adversarial_from(&basis, &report, restarts, steps, seed)?;
    }
    let mut holder = Value::Null;
    let mut diagnostic = None;
    if let Some(n) = p.holder_trials {
        match holder_fit(&basis, n, p.p, seed) {
            Ok(fit) => {
                report.gamma_fit = Some(fit.gamma);
                holder = json!({"gamma": fit.gamma, "decades": fit.decades, "points": fit.points.len()});
            }
            Err(e @ spr_lab::SprError::InsufficientSpread(_)) => {
                holder = json!({"error": e.to_string()});
                diagnostic = Some(format!("hölder fit: {e}"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let expected = spr_expected(&basis)?;
    let unexpected = (expected && report.violation_count > 0).then(|| {
        format!(
            "{} SPR violation(s) on a basis satisfying the hypotheses",
            report.violation_count
        )
    });
    Ok(CommandOutput {
        results: json!({
            "report": report,
            "monte_carlo_sup": monte_carlo_sup,
            "spr_expected": expected,
            "holder": holder,
        }),
        unexpected,
        diagnostic,
    })
}

pub fn run_identity(p: &IdentityParams, seed: u64) -> Result<CommandOutput, CliError> {
    let basis = io::load_basis(&p.basis)?;
    Ok(CommandOutput::ok(identity_sweep(&basis, p.pairs, seed)?))
}

/// Worst residuals of the identity suite over `pairs` random unit pairs.
pub fn identity_sweep(basis: &OrthoBasis, pairs: usize, seed: u64) -> Result<Value, CliError> {
    use rayon::prelude::*;
    let delta = hypotheses::check_moments(basis)?.delta;
    let rows = (0..pairs)
        .into_par_iter()
        .map(|t| {
            let (a, b) = random_pair_for(seed, t, basis);
            lemma_identity_suite(basis, &a, &b, Some(delta))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max = |f: &dyn Fn(&spr_lab::stability::IdentityResiduals) -> f64| {
        rows.iter().map(f).fold(0.0, f64::max)
    };
    let inequality_failures = rows
        .iter()
        .filter(|r| r.inequality.map(|i| !i.holds).unwrap_or(false))
        .count();
    let fourier = rows
        .first()
        .and_then(|r| r.fourier)
        .map(|_| max(&|r| r.fourier.map(|f| f.residual).unwrap_or(0.0)));
    Ok(json!({
        "pairs": pairs,
        "delta": delta,
        "max_expansion_residual": max(&|r| r.expansion.residual),
        "max_algebraic_residual": max(&|r| r.algebraic.residual),
        "max_fourier_residual": fourier,
        "inequality_failures": inequality_failures,
    }))
}

pub fn write_modulus(basis: &OrthoBasis, a: &CoefVec, path: &Path) -> Result<(), CliError> {
    let f = basis.synthesize(a)?;
    io::write_sampled_csv(&f.modulus(), path)?;
    Ok(())
}
