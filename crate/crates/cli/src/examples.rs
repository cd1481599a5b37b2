//! Reproduction targets. Each builds its family, runs the relevant checks and
//! compares the outcome with the verdict the construction is known to have.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use spr_lab::hypotheses::{self, check_moments, embedding_constant, full_report, FamilyMember, Verdict};
use spr_lab::measure::SupportPoint;
use spr_lab::rng::{random_unit, trial_rng};
use spr_lab::sidon::{greedy_bh, verify_bh};
use spr_lab::stability::{
    corollary_theta, example6_gamma, lemma_identity_suite, monte_carlo_spr,
    proposition_bound_check, random_pair_for, ratio_of, spr_ratio, SprOutcome,
};
use spr_lab::{CoefVec, Field, OrthoBasis};

use crate::commands::identity_sweep;
use crate::config::{ExampleTarget, ReproduceParams};
use crate::error::CliError;

pub const DEFAULT_TRIALS: usize = 200;
const DELTA_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-9;

struct Checks {
    results: Map<String, Value>,
    checks: Vec<Value>,
    all_passed: bool,
}

impl Checks {
    fn new() -> Self {
        Self { results: Map::new(), checks: Vec::new(), all_passed: true }
    }

    fn set(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    fn check(&mut self, name: &str, passed: bool) {
        self.all_passed &= passed;
        self.checks.push(json!({"name": name, "passed": passed}));
    }

    fn finish(mut self, expected: &str) -> (Value, bool) {
        self.results.insert("expected_verdict".into(), json!(expected));
        self.results.insert("checks".into(), Value::Array(self.checks));
        self.results.insert("verdict_matches".into(), json!(self.all_passed));
        (Value::Object(self.results), self.all_passed)
    }
}

pub fn complex_cube_roots_support() -> Vec<SupportPoint> {
    let a = 1.5f64.sqrt();
    let mut support = vec![SupportPoint::real(0.0, 1.0 / 3.0)];
    for k in 0..3 {
        let w = Complex64::from_polar(a, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
        support.push(SupportPoint::new(w, 2.0 / 9.0));
    }
    support
}

pub fn ternary_support() -> Vec<SupportPoint> {
    let a = 1.5f64.sqrt();
    vec![
        SupportPoint::real(-a, 1.0 / 3.0),
        SupportPoint::real(0.0, 1.0 / 3.0),
        SupportPoint::real(a, 1.0 / 3.0),
    ]
}

pub fn rademacher_support() -> Vec<SupportPoint> {
    vec![SupportPoint::real(1.0, 0.5), SupportPoint::real(-1.0, 0.5)]
}

fn seed_of(p: &ReproduceParams) -> u64 {
    p.seed.unwrap_or(0)
}

fn trials_of(p: &ReproduceParams) -> usize {
    p.trials.unwrap_or(DEFAULT_TRIALS)
}

/// Hypotheses, δ and a Monte Carlo sweep on a family expected to be SPR.
fn spr_family(c: &mut Checks, basis: &OrthoBasis, p: &ReproduceParams, delta: Option<f64>) -> Result<(), CliError> {
    let report = full_report(basis)?;
    c.set("hypotheses", json!(report));
    c.set("delta", json!(report.h3_delta));
    c.check("hypotheses satisfied", report.verdict == Verdict::SprHypothesesSatisfied);
    if let Some(d) = delta {
        c.check("delta matches closed form", (report.h3_delta - d).abs() <= DELTA_TOL);
    }
    let mc = monte_carlo_spr(basis, trials_of(p), 4.0, seed_of(p))?;
    c.check("no violations at p = 4", mc.violation_count == 0);
    c.check("finite sup ratio at p = 4", mc.sup_ratio.is_finite());
    if let Some(bound) = mc.theoretical_bound {
        c.check("sup ratio within empirical-C bound", mc.sup_ratio <= bound);
    }
    c.set("stability_p4", json!(mc));
    Ok(())
}

fn example1(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let basis = OrthoBasis::iid(&complex_cube_roots_support(), p.m.unwrap_or(3))?;
    spr_family(&mut c, &basis, p, Some(0.5))?;
    let l6 = embedding_constant(&basis, 6.0, trials_of(p), seed_of(p))?;
    c.check("finite L6 embedding constant", l6.constant.is_finite());
    c.set("embedding_l6", json!(l6));
    Ok(c.finish("spr-hypotheses-satisfied"))
}

fn example2(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let alpha = [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)];
    let m = p.m.unwrap_or(3);
    let grid = p.grid.unwrap_or_else(|| 4 * 5usize.pow(m as u32) + 1);
    let basis = OrthoBasis::lacunary_poly(&alpha, 5, m, grid)?;
    spr_family(&mut c, &basis, p, None)?;
    let mc2 = monte_carlo_spr(&basis, trials_of(p), 2.0, seed_of(p))?;
    c.check("no violations at p = 2", mc2.violation_count == 0);
    c.set("stability_p2", json!(mc2));
    Ok(c.finish("spr-hypotheses-satisfied"))
}

fn example3(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let basis = OrthoBasis::lacunary_sine(p.m.unwrap_or(5), 4, p.grid.unwrap_or(16384))?;
    spr_family(&mut c, &basis, p, Some(0.5))?;
    c.set("orthogonality_variant", json!(hypotheses::check_orthogonality(&basis, hypotheses::DEFAULT_ORTHOGONALITY_TOL)?.variant));
    let mc2 = monte_carlo_spr(&basis, trials_of(p), 2.0, seed_of(p))?;
    c.check("finite sup ratio at p = 2", mc2.violation_count == 0 && mc2.sup_ratio.is_finite());
    c.set("stability_p2", json!(mc2));
    Ok(c.finish("spr-hypotheses-satisfied"))
}

fn example4(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let basis = OrthoBasis::iid(&ternary_support(), p.m.unwrap_or(4))?;
    spr_family(&mut c, &basis, p, Some(0.5))?;
    Ok(c.finish("spr-hypotheses-satisfied"))
}

fn mian_chowla(count: usize) -> Result<Vec<u64>, CliError> {
    Ok(greedy_bh(2, count, 1 << 40)?.terms)
}

fn example5(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let m = p.m.unwrap_or(4);
    let seq = mian_chowla(m)?;
    let verdict = verify_bh(&seq, 2)?;
    c.check("sequence is B2", verdict.holds);
    c.set("sequence", json!(seq));
    let need = 2 * (*seq.last().unwrap() as usize).max(2 * m);
    let basis = OrthoBasis::rudin_2d(&seq, m, p.grid.unwrap_or(need.next_power_of_two().max(need + 1)))?;
    spr_family(&mut c, &basis, p, None)?;
    Ok(c.finish("spr-hypotheses-satisfied"))
}

fn example6(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let m = p.m.unwrap_or(5);
    let seq: Vec<i64> = mian_chowla(m)?.into_iter().map(|n| n as i64).collect();
    let span = (seq[m - 1] - seq[0]) as usize;
    let need = 2 * (seq[m - 1] as usize).max(span);
    let basis = OrthoBasis::exponential(&seq, p.grid.unwrap_or(need.next_power_of_two().max(need + 1)))?;
    c.set("sequence", json!(seq));

    let sweep = identity_sweep(&basis, trials_of(p), seed_of(p))?;
    let fourier = sweep["max_fourier_residual"].as_f64().unwrap_or(f64::INFINITY);
    c.check("fourier identity residual below 1e-9", fourier < IDENTITY_TOL);
    c.set("identities", sweep);

    // pairs sharing the modulus profile |f^| = c
    let seed = seed_of(p);
    let weights: Vec<f64> = {
        let mut rng = trial_rng(seed, u64::MAX);
        random_unit(&mut rng, m, Field::Real).entries().iter().map(|z| z.re.abs()).collect()
    };
    let outcomes = (0..trials_of(p))
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let mut draw = || {
                let phases = random_unit(&mut rng, m, Field::Complex);
                CoefVec::new(
                    phases
                        .entries()
                        .iter()
                        .zip(&weights)
                        .map(|(z, w)| if z.norm() == 0.0 { Complex64::new(*w, 0.0) } else { z / z.norm() * *w })
                        .collect(),
                )
            };
            let (a, b) = (draw(), draw());
            let f = basis.synthesize(&a)?;
            let g = basis.synthesize(&b)?;
            ratio_of(&f, &g, 4.0, Field::Complex)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let violations = outcomes.iter().filter(|o| o.is_violation()).count();
    let sup = outcomes.iter().map(|o| if o.is_violation() { 0.0 } else { o.value() }).fold(0.0, f64::max);
    c.check("no violations on the fixed-modulus set", violations == 0);
    c.set("fixed_modulus_sup_ratio_p4", json!(sup));

    let subspace = spr_ratio(&basis, &CoefVec::unit(m, 0), &CoefVec::unit(m, 1), 4.0)?;
    c.check("full span fails: |r1| = |r2|", subspace.is_violation());
    c.set("span_violation", json!(subspace));
    let gamma = example6_gamma(6.0)?;
    c.check("gamma at q = 6 is 1/4", (gamma - 0.25).abs() < 1e-15);
    c.set("gamma_q6", json!(gamma));
    c.set("delta", json!(check_moments(&basis)?.delta));
    Ok(c.finish("holder-spr-on-fixed-modulus-set"))
}

/// Bound check and lemma inequality over random pairs.
fn proposition(c: &mut Checks, basis: &OrthoBasis, p: &ReproduceParams) -> Result<(), CliError> {
    let report = full_report(basis)?;
    c.set("hypotheses", json!(report));
    c.set("delta", json!(report.h3_delta));
    c.check("hypotheses satisfied", report.verdict == Verdict::SprHypothesesSatisfied);
    let delta = report.h3_delta;
    let constant = embedding_constant(basis, 4.0, trials_of(p), seed_of(p))?.constant;
    c.set("embedding_l4", json!(constant));
    let rows = (0..trials_of(p))
        .into_par_iter()
        .map(|t| {
            let (a, b) = random_pair_for(seed_of(p), t, basis);
            let bound = proposition_bound_check(basis, &a, &b, constant, delta)?;
            let ids = lemma_identity_suite(basis, &a, &b, Some(delta))?;
            Ok((bound.anomaly, ids.inequality.map(|i| i.holds).unwrap_or(false)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let anomalies = rows.iter().filter(|r| r.0).count();
    let inequality_failures = rows.iter().filter(|r| !r.1).count();
    c.check("no bound anomalies", anomalies == 0);
    c.check("lemma inequality holds on every pair", inequality_failures == 0);
    c.set("bound_anomalies", json!(anomalies));
    c.set("inequality_failures", json!(inequality_failures));
    let mc = monte_carlo_spr(basis, trials_of(p), 4.0, seed_of(p))?;
    c.check("no violations at p = 4", mc.violation_count == 0);
    c.set("stability_p4", json!(mc));
    Ok(())
}

fn prop1(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let basis = OrthoBasis::rudin_2d(&[1, 2, 5], p.m.unwrap_or(3), p.grid.unwrap_or(32))?;
    proposition(&mut c, &basis, p)?;
    Ok(c.finish("l4-spr"))
}

fn prop1b(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let basis = OrthoBasis::lacunary_sine(p.m.unwrap_or(5), 4, p.grid.unwrap_or(16384))?;
    proposition(&mut c, &basis, p)?;
    Ok(c.finish("real-l4-spr"))
}

fn cor_l6(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let theta = corollary_theta(6.0)?;
    let gamma = example6_gamma(6.0)?;
    c.check("theta at q = 6 is 1/4", (theta - 0.25).abs() < 1e-15);
    c.check("both exponent routes agree", (theta - gamma).abs() < 1e-15);
    c.set("theta_q6", json!(theta));
    c.set("gamma_q6", json!(gamma));
    let basis = OrthoBasis::iid(&complex_cube_roots_support(), p.m.unwrap_or(3))?;
    c.set("delta", json!(check_moments(&basis)?.delta));
    let l6 = embedding_constant(&basis, 6.0, trials_of(p), seed_of(p))?;
    c.check("finite L6 embedding constant", l6.constant.is_finite());
    c.set("embedding_l6", json!(l6));
    let mc2 = monte_carlo_spr(&basis, trials_of(p), 2.0, seed_of(p))?;
    c.check("no violations at p = 2", mc2.violation_count == 0);
    c.set("stability_p2", json!(mc2));
    Ok(c.finish("l2-spr"))
}

fn rademacher(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let m = p.m.unwrap_or(3);
    c.check(
        "checked construction is rejected",
        matches!(OrthoBasis::iid(&rademacher_support(), m), Err(spr_lab::SprError::DegenerateBasis(_))),
    );
    let basis = OrthoBasis::iid_unchecked(&rademacher_support(), m)?;
    let report = full_report(&basis)?;
    c.check("flagged degenerate", report.verdict == Verdict::Degenerate);
    c.set("delta", json!(report.h3_delta));
    c.set("hypotheses", json!(report));
    let outcome = spr_ratio(&basis, &CoefVec::unit(m, 0), &CoefVec::unit(m, 1), 2.0)?;
    let genuine = matches!(outcome, SprOutcome::Violation { numerator, denominator }
        if (numerator - SQRT_2).abs() < 1e-12 && denominator < 1e-10);
    c.check("|r1| = |r2| while r1 and r2 stay sqrt(2) apart", genuine);
    c.set("violation", json!(outcome));
    Ok(c.finish("degenerate"))
}

fn base3(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let basis = OrthoBasis::lacunary_sine(p.m.unwrap_or(3), 3, p.grid.unwrap_or(256))?;
    let report = full_report(&basis)?;
    let witness = report.worst_witnesses.h1;
    let value = witness.map(|w| w.modulus).unwrap_or(0.0);
    c.check("orthogonality fails", !report.passed.h1);
    c.check("witness modulus is 1/2", (value - 0.5).abs() < DELTA_TOL);
    c.check(
        "witness pairs some s_n with some r_j r_k",
        matches!(witness, Some(w) if matches!(w.first, FamilyMember::S { .. }) && matches!(w.second, FamilyMember::Product { .. })),
    );
    let i = 1;
    let direct = spr_lab::measure::inner(&basis.s_elements()[i - 1], &basis.product(i, i - 1))?;
    c.check("<s_1, r_2 r_1> = -1/2", (direct.re + 0.5).abs() < DELTA_TOL && direct.im.abs() < DELTA_TOL);
    c.set("witness_value", json!(value));
    c.set("s1_r2r1_inner", json!([direct.re, direct.im]));
    c.set("hypotheses", json!(report));
    c.set("delta", json!(report.h3_delta));
    Ok(c.finish("failed-with-witness"))
}

fn complex_conjugate(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    let mut c = Checks::new();
    let basis = OrthoBasis::lacunary_sine(2, 4, p.grid.unwrap_or(128))?.complexified();
    let report = full_report(&basis)?;
    c.check("orthogonality fails once complexified", !report.passed.h1);
    c.set("hypotheses", json!(report));
    c.set("delta", json!(report.h3_delta));
    let a = CoefVec::new(vec![Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, FRAC_1_SQRT_2)]);
    let outcome = spr_ratio(&basis, &a, &a.conj(), 2.0)?;
    let genuine = matches!(outcome, SprOutcome::Violation { numerator, denominator }
        if numerator > 0.1 && denominator < 1e-10);
    c.check("f and conj(f) share a modulus but are not proportional", genuine);
    c.set("violation", json!(outcome));
    Ok(c.finish("failed-with-witness"))
}

pub fn reproduce(p: &ReproduceParams) -> Result<(Value, bool), CliError> {
    match p.target {
        ExampleTarget::Example1 => example1(p),
        ExampleTarget::Example2 => example2(p),
        ExampleTarget::Example3 => example3(p),
        ExampleTarget::Example4 => example4(p),
        ExampleTarget::Example5 => example5(p),
        ExampleTarget::Example6 => example6(p),
        ExampleTarget::Prop1 => prop1(p),
        ExampleTarget::Prop1B => prop1b(p),
        ExampleTarget::CorL6 => cor_l6(p),
        ExampleTarget::CounterexampleRademacher => rademacher(p),
        ExampleTarget::CounterexampleBase3 => base3(p),
        ExampleTarget::CounterexampleComplexConjugate => complex_conjugate(p),
    }
}
