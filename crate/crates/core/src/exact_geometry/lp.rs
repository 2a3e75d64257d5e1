//! Exact linear algebra and phase-one simplex over the rationals.

use num_traits::{One, Signed, Zero};

use crate::rational::Rat;

/// Finds `λ ≥ 0` with `A λ = b`, or `None` if the system is infeasible.
///
/// Phase-one simplex on the tableau `[A | I | b]` with Bland's rule, so it
/// terminates without any tolerance.
pub fn feasible(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let m = a.len();
    assert_eq!(m, b.len());
    let k = a.first().map_or(0, |row| row.len());
    let ncols = k + m;
    // tableau rows: [A' | I | b'] with b' ≥ 0
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let flip = b[i].is_negative();
        let mut tr: Vec<Rat> = Vec::with_capacity(ncols + 1);
        for x in row {
            tr.push(if flip { -x.clone() } else { x.clone() });
        }
        for j in 0..m {
            tr.push(if i == j { Rat::one() } else { Rat::zero() });
        }
        tr.push(if flip { -b[i].clone() } else { b[i].clone() });
        t.push(tr);
    }
    let mut basis: Vec<usize> = (k..k + m).collect();
    // reduced costs for min Σ artificials: c_j - Σ_rows t_ij (for non-artificials)
    let mut cost: Vec<Rat> = vec![Rat::zero(); ncols + 1];
    for row in &t {
        for j in 0..k {
            cost[j] -= &row[j];
        }
        cost[ncols] -= &row[ncols];
    }
    loop {
        let Some(enter) = (0..ncols).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Rat)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[ncols] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Phase one is bounded below by zero, so a leaving row always exists.
        let (pr, _) = leave.expect("phase-one simplex is bounded");
        pivot(&mut t, &mut cost, pr, enter);
        basis[pr] = enter;
    }
    if !cost[ncols].is_zero() {
        return None;
    }
    let mut x = vec![Rat::zero(); k];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < k {
            x[bv] = t[i][ncols].clone();
        }
    }
    Some(x)
}

fn pivot(t: &mut [Vec<Rat>], cost: &mut [Rat], pr: usize, pc: usize) {
    let inv = t[pr][pc].recip();
    for x in t[pr].iter_mut() {
        *x *= &inv;
    }
    let prow = t[pr].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == pr || row[pc].is_zero() {
            continue;
        }
        let f = row[pc].clone();
        for (x, p) in row.iter_mut().zip(&prow) {
            *x -= &f * p;
        }
    }
    if !cost[pc].is_zero() {
        let f = cost[pc].clone();
        for (x, p) in cost.iter_mut().zip(&prow) {
            *x -= &f * p;
        }
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rat>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// One solution of `A x = b` (free variables set to zero), or `None` if inconsistent.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let k = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&k) {
        return None;
    }
    let mut x = vec![Rat::zero(); k];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = aug[i][k].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn feasible_simple() {
        // λ1 + λ2 = 1, λ1 - λ2 = 1/2
        let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        let b = vec![int(1), rat(1, 2)];
        let x = feasible(&a, &b).unwrap();
        assert_eq!(x, vec![rat(3, 4), rat(1, 4)]);
        // λ1 + λ2 = 1, λ1 - λ2 = 2 forces λ2 < 0
        assert!(feasible(&a, &[int(1), int(2)]).is_none());
    }

    #[test]
    fn rank_and_solve() {
        let a = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert_eq!(rank(&a), 1);
        assert!(solve(&a, &[int(1), int(3)]).is_none());
        assert_eq!(solve(&a, &[int(1), int(2)]).unwrap(), vec![int(1), int(0)]);
    }
}
