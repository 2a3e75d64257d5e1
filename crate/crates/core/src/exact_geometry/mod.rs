//! Exact rational geometry: the bilinear form `J`, its null cone, and
//! convex-position predicates decided by exact linear programming.

pub mod lp;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, rat, Rat};

/// Exact rational vector; length `r+1` for extended vectors, `r` for weights.
pub type QVec = Vec<Rat>;

pub fn add(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rat], s: &Rat) -> QVec {
    a.iter().map(|x| x * s).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Appends a zero extended slot to an ambient vector.
pub fn extend(x: &[Rat]) -> QVec {
    let mut v = x.to_vec();
    v.push(Rat::zero());
    v
}

/// The polarised kinetic form on extended momenta `(p_1..p_r, φ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JForm {
    dims: Vec<u64>,
    n: u64,
    matrix: Vec<Vec<Rat>>,
}

impl JForm {
    pub fn new(dims: &[u64]) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Config(
                "dimensions must be a nonempty list of positive integers".into(),
            ));
        }
        let r = dims.len();
        let n: u64 = dims.iter().sum();
        let mut matrix = vec![vec![Rat::zero(); r + 1]; r + 1];
        for (i, &d) in dims.iter().enumerate() {
            matrix[i][i] = -rat(1, d as i64);
            matrix[i][r] = rat(-1, 2);
            matrix[r][i] = rat(-1, 2);
        }
        matrix[r][r] = -rat(n as i64 - 1, 4);
        Ok(JForm {
            dims: dims.to_vec(),
            n,
            matrix,
        })
    }

    pub fn r(&self) -> usize {
        self.dims.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dims(&self) -> &[u64] {
        &self.dims
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.matrix
    }

    /// `d = (d_1, …, d_r, −2)`.
    pub fn d_ext(&self) -> QVec {
        let mut d: QVec = self.dims.iter().map(|&x| int(x as i64)).collect();
        d.push(int(-2));
        d
    }

    fn check_len(&self, v: &[Rat]) -> Result<()> {
        if v.len() != self.r() + 1 {
            return Err(Error::Dimension {
                expected: self.r() + 1,
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn j_eval(&self, a: &[Rat], b: &[Rat]) -> Result<Rat> {
        self.check_len(a)?;
        self.check_len(b)?;
        Ok(self.j(a, b))
    }

    /// `J(a, b)` without length checks.
    pub fn j(&self, a: &[Rat], b: &[Rat]) -> Rat {
        let r = self.r();
        let mut acc = Rat::zero();
        for i in 0..=r {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..=r {
                if !b[j].is_zero() && !self.matrix[i][j].is_zero() {
                    acc += &a[i] * &self.matrix[i][j] * &b[j];
                }
            }
        }
        acc
    }

    /// `J(v + d, w + d) = 1 − Σ v_i w_i / d_i` for vectors with zero extended slot.
    pub fn j_shifted(&self, v: &[Rat], w: &[Rat]) -> Result<Rat> {
        self.check_len(v)?;
        self.check_len(w)?;
        let r = self.r();
        if !v[r].is_zero() || !w[r].is_zero() {
            return Err(Error::ExtendedSlot);
        }
        let mut acc = Rat::one();
        for i in 0..r {
            acc -= &v[i] * &w[i] / int(self.dims[i] as i64);
        }
        Ok(acc)
    }

    /// Membership in the null cone via the slanted-cone equation.
    pub fn is_null(&self, c: &[Rat]) -> bool {
        let r = self.r();
        if c.len() != r + 1 {
            return false;
        }
        let cr = &c[r];
        if cr.is_zero() {
            return c.iter().all(|x| x.is_zero());
        }
        let mut lhs = Rat::zero();
        for i in 0..r {
            let d = int(self.dims[i] as i64);
            let t = int(2) * &c[i] + &d * cr;
            lhs += &t * &t / d;
        }
        lhs == cr * cr
    }
}

fn dedup(points: &[QVec]) -> Vec<QVec> {
    let mut out: Vec<QVec> = Vec::new();
    for p in points {
        if !out.contains(p) {
            out.push(p.clone());
        }
    }
    out
}

/// Is `x` a convex combination of `pts`?
pub fn in_convex_hull(x: &[Rat], pts: &[QVec]) -> bool {
    if pts.is_empty() {
        return false;
    }
    let dim = x.len();
    let mut a: Vec<Vec<Rat>> = vec![Vec::with_capacity(pts.len()); dim + 1];
    for p in pts {
        for i in 0..dim {
            a[i].push(p[i].clone());
        }
        a[dim].push(Rat::one());
    }
    let mut b = x.to_vec();
    b.push(Rat::one());
    lp::feasible(&a, &b).is_some()
}

/// Points of the set that are not convex combinations of the others, in input order.
pub fn hull_vertices(points: &[QVec]) -> Vec<QVec> {
    let pts = dedup(points);
    pts.iter()
        .enumerate()
        .filter(|(i, p)| {
            let others: Vec<QVec> = pts
                .iter()
                .enumerate()
                .filter(|(j, _)| j != i)
                .map(|(_, q)| q.clone())
                .collect();
            !in_convex_hull(p, &others)
        })
        .map(|(_, p)| p.clone())
        .collect()
}

pub fn is_vertex(points: &[QVec], x: &[Rat]) -> bool {
    let others: Vec<QVec> = dedup(points)
        .into_iter()
        .filter(|p| p.as_slice() != x)
        .collect();
    !in_convex_hull(x, &others)
}

/// Whether the segment `[a, b]` is an edge (one-dimensional face) of `conv(points)`.
///
/// Decided by projecting along `b − a`: the segment is a face exactly when the
/// common image of `a` and `b` is a vertex of the projected point set.
pub fn is_edge(points: &[QVec], a: &[Rat], b: &[Rat]) -> Result<bool> {
    if a == b {
        return Err(Error::NotVertex);
    }
    for x in [a, b] {
        if !points.iter().any(|p| p.as_slice() == x) || !is_vertex(points, x) {
            return Err(Error::NotVertex);
        }
    }
    let dir = sub(b, a);
    let k = dir.iter().position(|x| !x.is_zero()).expect("a != b");
    let project = |x: &[Rat]| -> QVec {
        let t = &x[k] / &dir[k];
        x.iter()
            .zip(&dir)
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, (xi, di))| xi - &t * di)
            .collect()
    };
    let pa = project(a);
    let projected: Vec<QVec> = points.iter().map(|p| project(p)).collect();
    Ok(is_vertex(&projected, &pa))
}

/// True iff `a + c` has no other two-element decomposition `x + y` within `points`.
pub fn unique_sum(points: &[QVec], a: &[Rat], c: &[Rat]) -> Result<bool> {
    if !points.iter().any(|p| p.as_slice() == a) || !points.iter().any(|p| p.as_slice() == c) {
        return Err(Error::Membership);
    }
    let pts = dedup(points);
    let target = add(a, c);
    for (i, x) in pts.iter().enumerate() {
        for y in &pts[i..] {
            let same = (x.as_slice() == a && y.as_slice() == c)
                || (x.as_slice() == c && y.as_slice() == a);
            if !same && add(x, y) == target {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Affine dimension of a finite point set.
pub fn affine_dim(points: &[QVec]) -> usize {
    let Some(first) = points.first() else {
        return 0;
    };
    let rows: Vec<Vec<Rat>> = points[1..].iter().map(|p| sub(p, first)).collect();
    lp::rank(&rows)
}

/// `true` when every coordinate of `x` is nonnegative.
pub fn nonneg(x: &[Rat]) -> bool {
    x.iter().all(|v| !v.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{half, rat_vec};

    fn form() -> JForm {
        JForm::new(&[1, 2, 2]).unwrap()
    }

    #[test]
    fn j_examples() {
        let j = form();
        let e1 = rat_vec(&[1, 0, 0, 0]);
        assert_eq!(j.j_eval(&e1, &e1).unwrap(), int(-1));
        let d = j.d_ext();
        assert_eq!(j.j_eval(&d, &d).unwrap(), int(1));
        let h = scale(&d, &half());
        assert_eq!(j.j_eval(&h, &h).unwrap(), rat(1, 4));
        assert!(matches!(
            j.j_eval(&e1, &rat_vec(&[1])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn shifted_examples() {
        let j = form();
        let v = rat_vec(&[-1, 0, 0, 0]);
        let w = rat_vec(&[1, -2, 0, 0]);
        assert_eq!(j.j_shifted(&v, &w).unwrap(), int(2));
        assert_eq!(j.j_shifted(&v, &v).unwrap(), int(0));
        let z = rat_vec(&[0, 0, 0, 0]);
        assert_eq!(j.j_shifted(&z, &z).unwrap(), int(1));
        assert_eq!(
            j.j_shifted(&rat_vec(&[0, 0, 0, 1]), &z),
            Err(Error::ExtendedSlot)
        );
    }

    #[test]
    fn null_examples() {
        let j = form();
        assert!(j.is_null(&rat_vec(&[0, 1, 1, -1])));
        assert!(j.is_null(&rat_vec(&[0, 0, 0, 0])));
        assert!(!j.is_null(&scale(&j.d_ext(), &half())));
    }

    #[test]
    fn square_edges() {
        let sq: Vec<QVec> = [[0, 0], [1, 0], [0, 1], [1, 1]]
            .iter()
            .map(|p| rat_vec(p))
            .collect();
        assert!(is_edge(&sq, &sq[0], &sq[1]).unwrap());
        assert!(!is_edge(&sq, &sq[0], &sq[3]).unwrap());
        let mid = vec![half(), half()];
        let mut with_mid = sq.clone();
        with_mid.push(mid.clone());
        assert_eq!(is_edge(&with_mid, &mid, &sq[0]), Err(Error::NotVertex));
    }

    #[test]
    fn segment_vertices() {
        let pts = vec![rat_vec(&[0, 0]), rat_vec(&[2, 2]), rat_vec(&[1, 1])];
        assert_eq!(
            hull_vertices(&pts),
            vec![rat_vec(&[0, 0]), rat_vec(&[2, 2])]
        );
        assert_eq!(hull_vertices(&pts[..1]), vec![rat_vec(&[0, 0])]);
    }

    #[test]
    fn two_point_unique_sum() {
        let pts = vec![rat_vec(&[0, 1]), rat_vec(&[3, 1])];
        assert!(unique_sum(&pts, &pts[0], &pts[1]).unwrap());
        assert_eq!(
            unique_sum(&pts, &pts[0], &rat_vec(&[9, 9])),
            Err(Error::Membership)
        );
    }
}
