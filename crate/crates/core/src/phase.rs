//! Distance between two functions modulo a global phase.
//!
//! For the complex field the distance is `min_{|z|=1} ‖f − z g‖_p`; for the real
//! field the minimum runs over `z ∈ {1, −1}` only.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::Field;
use crate::error::Result;
use crate::measure::{check_exponent, inner, norm_p_of_moduli, pairwise_sum, pow_p, SampledFunction};

/// Number of equispaced angles in the coarse scan.
pub const SCAN_POINTS: usize = 64;
/// Target bracket width of the golden-section refinement.
pub const THETA_TOL: f64 = 1e-12;

/// `⟨f,g⟩` with modulus at or below this fraction of `‖f‖₂‖g‖₂` counts as zero.
const DEGENERATE_REL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseAlignment {
    /// Optimal angle in `[0, 2π)`; `0` or `π` for the real field.
    pub theta: f64,
    pub distance: f64,
    pub field: Field,
    /// Every unimodular `z` attains the minimum (`⟨f,g⟩ = 0` at `p = 2`).
    pub degenerate: bool,
}

impl PhaseAlignment {
    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }
}

pub fn min_phase_dist(
    f: &SampledFunction,
    g: &SampledFunction,
    p: f64,
    field: Field,
) -> Result<PhaseAlignment> {
    f.ensure_same_measure(g)?;
    check_exponent(p)?;
    let weights = f.measure().weights();
    let dist_at = |theta: f64| -> f64 {
        let z = Complex64::from_polar(1.0, theta);
        norm_p_of_moduli(
            f.values().iter().zip(g.values()).map(|(&a, &b)| (a - z * b).norm()),
            weights,
            p,
        )
    };

    match field {
        Field::Real => {
            let plus = dist_at(0.0);
            let minus = dist_at(PI);
            let (theta, distance) = if minus < plus { (PI, minus) } else { (0.0, plus) };
            Ok(PhaseAlignment { theta, distance, field, degenerate: false })
        }
        Field::Complex if p == 2.0 => {
            let c = inner(f, g)?;
            let scale = f.norm2() * g.norm2();
            let degenerate = c.norm() <= DEGENERATE_REL * scale;
            let theta = if degenerate { 0.0 } else { wrap_angle(c.arg()) };
            // evaluated directly: ‖f‖²+‖g‖²−2|⟨f,g⟩| loses half the digits near zero
            Ok(PhaseAlignment { theta, distance: dist_at(theta), field, degenerate })
        }
        Field::Complex => {
            let objective = PhaseObjective::new(f, g, p);
            let theta = objective.minimize();
            Ok(PhaseAlignment { theta, distance: dist_at(theta), field, degenerate: false })
        }
    }
}

/// `θ ↦ ‖f − e^{iθ} g‖_p^p` (or the sup norm).
///
/// For even integer `p = 2k` the objective is a trigonometric polynomial of
/// degree `k` in `θ`; its coefficients are recovered from `2k + 1` samples and
/// used for the coarse scan, while the golden-section refinement always
/// evaluates the sums directly.
struct PhaseObjective<'a> {
    f: &'a SampledFunction,
    g: &'a SampledFunction,
    p: f64,
    surrogate: Option<Vec<Complex64>>,
}

impl<'a> PhaseObjective<'a> {
    fn new(f: &'a SampledFunction, g: &'a SampledFunction, p: f64) -> Self {
        let mut obj = Self { f, g, p, surrogate: None };
        if p.is_finite() && p.fract() == 0.0 && (p as u64).is_multiple_of(2) && p <= 16.0 {
            let degree = (p as usize) / 2;
            let samples = 2 * degree + 1;
            let values: Vec<f64> = (0..samples)
                .map(|j| obj.direct(TAU * j as f64 / samples as f64))
                .collect();
            let coeffs = (0..=degree)
                .map(|m| {
                    values
                        .iter()
                        .enumerate()
                        .map(|(j, &v)| {
                            v * Complex64::from_polar(1.0, -TAU * (m * j) as f64 / samples as f64)
                        })
                        .sum::<Complex64>()
                        / samples as f64
                })
                .collect();
            obj.surrogate = Some(coeffs);
        }
        obj
    }

    fn direct(&self, theta: f64) -> f64 {
        let z = Complex64::from_polar(1.0, theta);
        let moduli = self
            .f
            .values()
            .iter()
            .zip(self.g.values())
            .map(|(&a, &b)| (a - z * b).norm());
        if self.p.is_infinite() {
            return moduli.fold(0.0, f64::max);
        }
        let terms: Vec<f64> = moduli
            .zip(self.f.measure().weights())
            .map(|(m, &w)| w * pow_p(m, self.p))
            .collect();
        pairwise_sum(&terms)
    }

    fn coarse(&self, theta: f64) -> f64 {
        match &self.surrogate {
            Some(c) => {
                c[0].re
                    + 2.0
                        * c.iter()
                            .enumerate()
                            .skip(1)
                            .map(|(m, cm)| (cm * Complex64::from_polar(1.0, m as f64 * theta)).re)
                            .sum::<f64>()
            }
            None => self.direct(theta),
        }
    }

    fn minimize(&self) -> f64 {
        let step = TAU / SCAN_POINTS as f64;
        let scan: Vec<f64> = (0..SCAN_POINTS).map(|j| self.coarse(step * j as f64)).collect();
        let best = scan.iter().cloned().fold(f64::INFINITY, f64::min);
        let slack = 1e-9 * best.abs().max(scan.iter().cloned().fold(0.0, f64::max)) + 1e-300;
        // refine every discrete local minimum that is competitive with the best
        let mut candidates: Vec<usize> = (0..SCAN_POINTS)
            .filter(|&j| {
                let prev = scan[(j + SCAN_POINTS - 1) % SCAN_POINTS];
                let next = scan[(j + 1) % SCAN_POINTS];
                scan[j] <= prev && scan[j] <= next && scan[j] <= best + slack
            })
            .collect();
        candidates.sort_by(|&a, &b| scan[a].total_cmp(&scan[b]));
        candidates.truncate(3);

        let mut best_theta = 0.0;
        let mut best_val = f64::INFINITY;
        for j in candidates {
            let centre = step * j as f64;
            let (theta, val) =
                golden_section_min(|t| self.direct(t), centre - step, centre + step, THETA_TOL);
            if val < best_val {
                best_val = val;
                best_theta = theta;
            }
        }
        wrap_angle(best_theta)
    }
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`; stops when the
/// bracket is narrower than `tol`. Returns the best abscissa seen and its value.
pub fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        // the interior points stop separating once the bracket hits rounding
        if c >= d {
            break;
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DiscreteMeasure;
    use std::f64::consts::SQRT_2;

    fn sines() -> (SampledFunction, SampledFunction) {
        let m = DiscreteMeasure::interval_grid(256).unwrap();
        let r1 = m.sample_interval(|x| Complex64::new(SQRT_2 * (8.0 * PI * x).sin(), 0.0)).unwrap();
        let r2 = m.sample_interval(|x| Complex64::new(SQRT_2 * (32.0 * PI * x).sin(), 0.0)).unwrap();
        (r1, r2)
    }

    #[test]
    fn identical_functions_have_zero_distance() {
        let (r1, _) = sines();
        for p in [2.0, 4.0, 3.0] {
            let a = min_phase_dist(&r1, &r1, p, Field::Complex).unwrap();
            assert!(a.distance < 1e-12, "p={p}: {}", a.distance);
        }
        assert_eq!(min_phase_dist(&r1, &r1, 4.0, Field::Real).unwrap().distance, 0.0);
    }

    #[test]
    fn orthonormal_pair_is_sqrt2_apart() {
        let (r1, r2) = sines();
        let a = min_phase_dist(&r1, &r2, 2.0, Field::Complex).unwrap();
        assert!((a.distance - SQRT_2).abs() < 1e-12);
        assert!(a.degenerate);
        assert_eq!(a.theta, 0.0);
    }

    #[test]
    fn exact_phase_is_found_at_p4() {
        let (r1, r2) = sines();
        let g = r1.zip_with(&r2, |a, b| (a + Complex64::new(0.0, 0.5) * b) / 1.25f64.sqrt()).unwrap();
        let f = g.scale(Complex64::from_polar(1.0, PI / 3.0));
        let a = min_phase_dist(&f, &g, 4.0, Field::Complex).unwrap();
        assert!((a.theta - PI / 3.0).abs() < 1e-10, "theta = {}", a.theta);
        assert!(a.distance < 1e-10);
    }

    #[test]
    fn real_field_picks_the_sign() {
        let (r1, _) = sines();
        let neg = r1.scale(Complex64::new(-1.0, 0.0));
        let a = min_phase_dist(&neg, &r1, 4.0, Field::Real).unwrap();
        assert_eq!(a.theta, PI);
        assert!(a.distance < 1e-15);
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, fx) = golden_section_min(|t| (t - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-14);
    }
}
