//! Bounded enumeration of exponent sets `C = ½(d + X)`.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::{half_shift, solve_coefficients, SuperpotentialAnsatz};
use crate::error::{Error, Result};
use crate::exact_geometry::{in_convex_hull, QVec};
use crate::rational::{fmt_rat, int};
use crate::weight_config::{CoefficientMode, Configuration};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// `|x_i| ≤ lattice_bound` for `C = ½(d + X)`.
    pub lattice_bound: u32,
    /// Non-vertex points added to each vertex set.
    pub max_extra: usize,
    pub mode: CoefficientMode,
    /// Also allow a nonzero last slot in `X`, leaving the hyperplane `P`.
    pub off_p: bool,
    /// Maximum number of candidate sets passed to the solver.
    pub budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            lattice_bound: 3,
            max_extra: 2,
            mode: CoefficientMode::Constant,
            off_p: false,
            budget: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub found: Vec<SuperpotentialAnsatz>,
    pub pruned_counts: BTreeMap<String, usize>,
    pub lattice_bound: u32,
    pub candidates_solved: usize,
    /// The budget ran out before every candidate was examined.
    pub partial: bool,
    pub off_p: bool,
}

#[derive(Serialize)]
pub struct SearchResultJson<'a> {
    pub found: &'a [SuperpotentialAnsatz],
    pub pruned_counts: &'a BTreeMap<String, usize>,
    pub lattice_bound: u32,
    pub candidates_solved: usize,
    pub partial: bool,
    pub off_p: bool,
}

impl SearchResult {
    pub fn to_json(&self) -> SearchResultJson<'_> {
        SearchResultJson {
            found: &self.found,
            pruned_counts: &self.pruned_counts,
            lattice_bound: self.lattice_bound,
            candidates_solved: self.candidates_solved,
            partial: self.partial,
            off_p: self.off_p,
        }
    }

    /// Exponent sets of the found ansätze, with exact rational strings.
    pub fn exponent_sets(&self) -> Vec<Vec<Vec<String>>> {
        self.found
            .iter()
            .map(|f| {
                f.exponents()
                    .iter()
                    .map(|c| c.iter().map(fmt_rat).collect())
                    .collect()
            })
            .collect()
    }
}

fn lattice(dim: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn bump(counts: &mut BTreeMap<String, usize>, key: &str, by: usize) {
    *counts.entry(key.into()).or_default() += by;
}

/// Enumerates exponent sets within the lattice bound and solves each survivor.
///
/// Hull vertices are drawn from the `J`-null lattice points and `½(d + W̃)`; the
/// hull must cover `½(d + W̃)`, and when `E ≠ 0` some vertex must be null. Up to
/// `max_extra` further lattice points inside the hull may be added.
pub fn search(cfg: &Configuration, opts: &SearchOptions) -> Result<SearchResult> {
    let r = cfg.r();
    if r > 4 {
        return Err(Error::Parameter("search supports r <= 4".into()));
    }
    if opts.lattice_bound > 4 {
        return Err(Error::Parameter("lattice_bound must be at most 4".into()));
    }
    if opts.max_extra > 4 {
        return Err(Error::Parameter("max_extra must be at most 4".into()));
    }
    let jf = cfg.jform();
    let bound = i64::from(opts.lattice_bound);
    let mut counts = BTreeMap::new();

    let pool: Vec<QVec> = lattice(if opts.off_p { r + 1 } else { r }, bound)
        .into_iter()
        .map(|x| {
            let mut x: QVec = x.into_iter().map(int).collect();
            if !opts.off_p {
                x.push(int(0));
            }
            half_shift(cfg, &x)
        })
        .filter(|c| !c.iter().all(|v| v.is_zero()))
        .collect();
    let targets: Vec<QVec> = cfg
        .extended_weights_with_zero()
        .iter()
        .map(|w| half_shift(cfg, w))
        .collect();

    let mut vertex_pool: Vec<QVec> = targets.clone();
    for c in &pool {
        if jf.is_null(c) && !vertex_pool.contains(c) {
            vertex_pool.push(c.clone());
        }
    }
    vertex_pool.sort();
    bump(
        &mut counts,
        "vertex_neither_null_nor_weight",
        pool.len().saturating_sub(vertex_pool.len()),
    );

    let need_null = !cfg.e.is_zero();
    let mut vertex_sets: Vec<Vec<QVec>> = Vec::new();
    let mut partial = false;
    let mut examined = 0usize;
    'outer: for k in 1..=vertex_pool.len().min(12) {
        for idx in subsets(vertex_pool.len(), k) {
            examined += 1;
            if examined > opts.budget {
                partial = true;
                break 'outer;
            }
            let v: Vec<QVec> = idx.iter().map(|&i| vertex_pool[i].clone()).collect();
            if need_null && !v.iter().any(|c| jf.is_null(c)) {
                bump(&mut counts, "no_null_vertex", 1);
                continue;
            }
            if !targets
                .iter()
                .all(|t| v.contains(t) || in_convex_hull(t, &v))
            {
                bump(&mut counts, "hull_misses_weights", 1);
                continue;
            }
            let convex = (0..v.len()).all(|i| {
                let others: Vec<QVec> = v
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, c)| c.clone())
                    .collect();
                !in_convex_hull(&v[i], &others)
            });
            if !convex {
                bump(&mut counts, "not_convex_position", 1);
                continue;
            }
            vertex_sets.push(v);
        }
    }

    let mut candidates: Vec<Vec<QVec>> = Vec::new();
    for v in &vertex_sets {
        let inside: Vec<QVec> = pool
            .iter()
            .filter(|c| !v.contains(c) && in_convex_hull(c, v))
            .cloned()
            .collect();
        for k in 0..=opts.max_extra.min(inside.len()) {
            for idx in subsets(inside.len(), k) {
                if v.len() + k > 12 {
                    continue;
                }
                if candidates.len() >= opts.budget {
                    partial = true;
                    break;
                }
                let mut c = v.clone();
                c.extend(idx.iter().map(|&i| inside[i].clone()));
                c.sort();
                candidates.push(c);
            }
        }
    }

    let solved: Vec<(Vec<QVec>, Option<SuperpotentialAnsatz>)> = candidates
        .par_iter()
        .map(|c| (c.clone(), solve_coefficients(cfg, c, opts.mode).ok()))
        .collect();
    let mut found: Vec<SuperpotentialAnsatz> = Vec::new();
    for (_, f) in &solved {
        match f {
            Some(f) => found.push(f.clone()),
            None => bump(&mut counts, "unsolvable", 1),
        }
    }
    found.sort_by(|a, b| a.exponents().cmp(&b.exponents()));
    found.dedup_by(|a, b| a.exponents() == b.exponents());

    Ok(SearchResult {
        found,
        pruned_counts: counts,
        lattice_bound: opts.lattice_bound,
        candidates_solved: solved.len(),
        partial,
        off_p: opts.off_p,
    })
}
