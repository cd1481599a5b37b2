//! B₂ / B₃ integer sequences: greedy generation, perfect difference sets,
//! exhaustive verification, and density profiles `α(N) = #{ν : n_ν ≤ N}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SprError};

/// Node budget for the perfect-difference-set search.
pub const DEFAULT_SINGER_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BhMethod {
    Greedy,
    Singer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BhSequence {
    pub h: u32,
    pub method: BhMethod,
    pub terms: Vec<u64>,
    /// False when the greedy search hit its limit before `count` terms.
    pub complete: bool,
    /// `q² + q + 1` for Singer sets.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<u64>,
}

/// Two distinct index multisets with equal sums (1-indexed positions).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BhWitness {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub sum: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BhVerdict {
    pub holds: bool,
    pub witness: Option<BhWitness>,
}

fn check_h(h: u32) -> Result<()> {
    if h == 2 || h == 3 {
        Ok(())
    } else {
        invalid(format!("h must be 2 or 3, got {h}"))
    }
}

/// Smallest-first greedy B_h sequence starting at 1. With `h = 2` this is the
/// Mian–Chowla sequence.
pub fn greedy_bh(h: u32, count: usize, limit: u64) -> Result<BhSequence> {
    check_h(h)?;
    if count == 0 {
        return invalid("count must be >= 1");
    }
    let h = h as usize;
    let mut terms: Vec<u64> = vec![];
    // lower[r]: sorted r-fold multiset sums of the accepted terms, r < h
    let mut lower: Vec<Vec<u64>> = vec![vec![0]];
    lower.resize(h, vec![]);
    // bitset of all h-fold sums of the accepted terms
    let mut taken: Vec<u64> = vec![];
    let is_taken = |taken: &[u64], s: u64| {
        let w = (s / 64) as usize;
        w < taken.len() && taken[w] >> (s % 64) & 1 == 1
    };

    let mut c: u64 = 1;
    while terms.len() < count && c <= limit {
        // a new sum k·c + rest collides with an old sum, or two new sums
        // k1·c + r1 = k2·c + r2 coincide
        let clash_old = (1..=h)
            .rev()
            .any(|k| lower[h - k].iter().any(|&rest| is_taken(&taken, k as u64 * c + rest)));
        let clash_new = !clash_old
            && (1..=h).any(|k1| {
                (1..k1).any(|k2| {
                    lower[h - k1].iter().any(|&r1| {
                        lower[h - k2].binary_search(&(r1 + (k1 - k2) as u64 * c)).is_ok()
                    })
                })
            });
        if !clash_old && !clash_new {
            let top = (h as u64 * c) as usize / 64 + 1;
            if taken.len() < top {
                taken.resize(top.max(taken.len() * 2), 0);
            }
            for k in 1..=h {
                for &rest in &lower[h - k] {
                    let s = k as u64 * c + rest;
                    taken[(s / 64) as usize] |= 1 << (s % 64);
                }
            }
            for r in (1..h).rev() {
                let mut added = vec![];
                for k in 1..=r {
                    for &rest in &lower[r - k] {
                        added.push(k as u64 * c + rest);
                    }
                }
                lower[r].extend(added);
                lower[r].sort_unstable();
            }
            terms.push(c);
        }
        c += 1;
    }
    Ok(BhSequence {
        h: h as u32,
        method: BhMethod::Greedy,
        complete: terms.len() == count,
        terms,
        modulus: None,
    })
}

/// Exhaustive check that all `h`-fold multiset sums are distinct.
pub fn verify_bh(seq: &[u64], h: u32) -> Result<BhVerdict> {
    check_h(h)?;
    if seq.is_empty() {
        return invalid("sequence must be nonempty");
    }
    let n = seq.len();
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut idx = vec![0usize; h as usize];
    loop {
        let sum: u64 = idx.iter().map(|&i| seq[i]).sum();
        let positions: Vec<usize> = idx.iter().map(|i| i + 1).collect();
        if let Some(prev) = seen.get(&sum) {
            return Ok(BhVerdict {
                holds: false,
                witness: Some(BhWitness { left: prev.clone(), right: positions, sum }),
            });
        }
        seen.insert(sum, positions);
        // next nondecreasing index tuple
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return Ok(BhVerdict { holds: true, witness: None });
            }
            pos -= 1;
            if idx[pos] + 1 < n {
                let v = idx[pos] + 1;
                for slot in idx[pos..].iter_mut() {
                    *slot = v;
                }
                break;
            }
        }
    }
}

pub fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut r = q;
            while r.is_multiple_of(p) {
                r /= p;
            }
            return r == 1;
        }
        p += 1;
    }
    true
}

/// True iff every nonzero residue mod `modulus` is a difference of `set`
/// exactly once.
pub fn is_perfect_difference_set(set: &[u64], modulus: u64) -> bool {
    if modulus < 2 {
        return false;
    }
    let mut hits = vec![0u32; modulus as usize];
    for &a in set {
        for &b in set {
            if a != b {
                hits[((a + modulus - b % modulus) % modulus) as usize] += 1;
            }
        }
    }
    hits[1..].iter().all(|&h| h == 1)
}

/// Perfect difference set of `q + 1` residues modulo `v = q² + q + 1`.
///
/// The search is exhaustive over sets that are unions of orbits of
/// `x ↦ p·x mod v`, `p` the characteristic of `q`; some translate of every
/// Singer set is fixed by this multiplier, so nothing is lost. Residues are
/// returned sorted as integers in `[1, v]` (residue 0 is reported as `v`).
pub fn singer_difference_set(q: u64, node_budget: u64) -> Result<BhSequence> {
    if !is_prime_power(q) {
        return Err(SprError::NotFound(format!(
            "{q} is not a prime power; no Singer difference set"
        )));
    }
    let v = q * q + q + 1;
    let k = (q + 1) as usize;
    let p = smallest_prime_factor(q);

    let mut seen = vec![false; v as usize];
    let mut orbits: Vec<Vec<u64>> = vec![];
    for start in 0..v {
        if seen[start as usize] {
            continue;
        }
        let mut orbit = vec![];
        let mut x = start;
        while !seen[x as usize] {
            seen[x as usize] = true;
            orbit.push(x);
            x = x * p % v;
        }
        orbits.push(orbit);
    }

    struct Search<'a> {
        orbits: &'a [Vec<u64>],
        v: u64,
        k: usize,
        used: Vec<bool>,
        chosen: Vec<u64>,
        nodes: u64,
        budget: u64,
    }

    impl Search<'_> {
        fn run(&mut self, from: usize) -> Option<bool> {
            if self.chosen.len() == self.k {
                return Some(true);
            }
            for idx in from..self.orbits.len() {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return None;
                }
                let orbit = &self.orbits[idx];
                if self.chosen.len() + orbit.len() > self.k {
                    continue;
                }
                let mut added: Vec<usize> = vec![];
                let mut ok = true;
                let mut members = self.chosen.clone();
                for &x in orbit {
                    for &y in &members {
                        let d = ((x + self.v - y) % self.v) as usize;
                        let e = ((y + self.v - x) % self.v) as usize;
                        if self.used[d] || self.used[e] {
                            ok = false;
                            break;
                        }
                        self.used[d] = true;
                        self.used[e] = true;
                        added.push(d);
                        added.push(e);
                    }
                    if !ok {
                        break;
                    }
                    members.push(x);
                }
                if ok {
                    let before = self.chosen.len();
                    self.chosen.extend(orbit);
                    match self.run(idx + 1) {
                        Some(true) => return Some(true),
                        None => return None,
                        Some(false) => self.chosen.truncate(before),
                    }
                }
                for d in added {
                    self.used[d] = false;
                }
            }
            Some(false)
        }
    }

    let mut search = Search {
        orbits: &orbits,
        v,
        k,
        used: vec![false; v as usize],
        chosen: vec![],
        nodes: 0,
        budget: node_budget,
    };
    match search.run(0) {
        Some(true) => {
            let mut terms: Vec<u64> = search
                .chosen
                .iter()
                .map(|&x| if x == 0 { v } else { x })
                .collect();
            terms.sort_unstable();
            Ok(BhSequence { h: 2, method: BhMethod::Singer, terms, complete: true, modulus: Some(v) })
        }
        Some(false) => Err(SprError::NotFound(format!("no perfect difference set mod {v}"))),
        None => Err(SprError::NotFound(format!(
            "search budget of {node_budget} nodes exhausted for q = {q}"
        ))),
    }
}

fn smallest_prime_factor(q: u64) -> u64 {
    (2..).find(|p| q.is_multiple_of(*p) || p * p > q).map(|p| if q.is_multiple_of(p) { p } else { q }).unwrap()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    /// `(N, α(N))` pairs.
    pub table: Vec<(u64, usize)>,
    /// Least-squares slope of `log α` against `log N` over rows with `α > 0`.
    pub fitted_exponent: Option<f64>,
}

pub fn density_profile(terms: &[u64], checkpoints: &[u64]) -> DensityProfile {
    let mut sorted = terms.to_vec();
    sorted.sort_unstable();
    let table: Vec<(u64, usize)> = checkpoints
        .iter()
        .map(|&n| (n, sorted.partition_point(|&t| t <= n)))
        .collect();
    let points: Vec<(f64, f64)> = table
        .iter()
        .filter(|&&(n, a)| a > 0 && n > 0)
        .map(|&(n, a)| ((n as f64).ln(), (a as f64).ln()))
        .collect();
    DensityProfile { table, fitted_exponent: least_squares_slope(&points) }
}

/// `count` log-spaced checkpoints from the first to the last term.
pub fn log_checkpoints(terms: &[u64], count: usize) -> Vec<u64> {
    let (Some(&lo), Some(&hi)) = (terms.iter().min(), terms.iter().max()) else {
        return vec![];
    };
    let lo = lo.max(1) as f64;
    let hi = hi.max(1) as f64;
    let steps = count.max(2) - 1;
    let mut out: Vec<u64> = (0..=steps)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / steps as f64).exp().round() as u64)
        .collect();
    out.dedup();
    out
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
