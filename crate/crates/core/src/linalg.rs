//! Dense linear algebra over a tabulated finite field.

use crate::finite_fields::{Fe, Gf};

/// Row space in reduced row echelon form. Rows are sorted by pivot column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rref {
    ncols: usize,
    rows: Vec<Vec<Fe>>,
    pivots: Vec<usize>,
}

impl Rref {
    pub fn new(ncols: usize) -> Rref {
        Rref { ncols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn from_rows<'a>(f: &Gf, ncols: usize, rows: impl IntoIterator<Item = &'a Vec<Fe>>) -> Rref {
        let mut r = Rref::new(ncols);
        for v in rows {
            r.insert(f, v);
        }
        r
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Fe>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Clears the pivot coordinates of `v` by subtracting multiples of rows.
    pub fn reduce(&self, f: &Gf, v: &mut [Fe]) {
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = v[pc];
            if !c.is_zero() {
                let nc = f.neg(c);
                for (x, &y) in v.iter_mut().zip(row) {
                    if !y.is_zero() {
                        *x = f.add(*x, f.mul(nc, y));
                    }
                }
            }
        }
    }

    pub fn contains(&self, f: &Gf, v: &[Fe]) -> bool {
        let mut w = v.to_vec();
        self.reduce(f, &mut w);
        w.iter().all(|x| x.is_zero())
    }

    /// Adds `v` to the span; returns false when it was already there.
    pub fn insert(&mut self, f: &Gf, v: &[Fe]) -> bool {
        let mut w = v.to_vec();
        self.reduce(f, &mut w);
        let Some(pc) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = f.inv(w[pc]).unwrap();
        for x in w.iter_mut() {
            *x = f.mul(*x, inv);
        }
        for row in self.rows.iter_mut() {
            let c = row[pc];
            if !c.is_zero() {
                let nc = f.neg(c);
                for (x, &y) in row.iter_mut().zip(&w) {
                    if !y.is_zero() {
                        *x = f.add(*x, f.mul(nc, y));
                    }
                }
            }
        }
        let pos = self.pivots.partition_point(|&p| p < pc);
        self.rows.insert(pos, w);
        self.pivots.insert(pos, pc);
        true
    }

    /// Coordinates of a vector of the span with respect to the rows.
    pub fn coordinates(&self, v: &[Fe]) -> Vec<Fe> {
        self.pivots.iter().map(|&p| v[p]).collect()
    }

    pub fn is_subspace_of(&self, f: &Gf, other: &Rref) -> bool {
        self.rows.iter().all(|r| other.contains(f, r))
    }
}

/// Basis of {x : A x = 0} for A given by rows of length n.
pub fn nullspace(f: &Gf, rows: &[Vec<Fe>], n: usize) -> Vec<Vec<Fe>> {
    let r = Rref::from_rows(f, n, rows);
    let pivset: Vec<bool> = {
        let mut v = vec![false; n];
        for &p in r.pivots() {
            v[p] = true;
        }
        v
    };
    let mut out = Vec::new();
    for free in (0..n).filter(|&c| !pivset[c]) {
        let mut x = vec![Fe::ZERO; n];
        x[free] = Fe::ONE;
        for (row, &pc) in r.rows().iter().zip(r.pivots()) {
            x[pc] = f.neg(row[free]);
        }
        out.push(x);
    }
    out
}

pub fn rank(f: &Gf, rows: &[Vec<Fe>], n: usize) -> usize {
    Rref::from_rows(f, n, rows).rank()
}

/// Square matrix acting on column vectors: (M v)_i = Σ_j M[i][j] v_j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    pub n: usize,
    pub data: Vec<Fe>,
}

impl Mat {
    pub fn zero(n: usize) -> Mat {
        Mat { n, data: vec![Fe::ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zero(n);
        for i in 0..n {
            m.data[i * n + i] = Fe::ONE;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Fe) {
        self.data[i * self.n + j] = x;
    }

    pub fn apply(&self, f: &Gf, v: &[Fe]) -> Vec<Fe> {
        let n = self.n;
        let mut out = vec![Fe::ZERO; n];
        for (j, &x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = self.data[i * n + j];
                if !a.is_zero() {
                    *o = f.add(*o, f.mul(a, x));
                }
            }
        }
        out
    }

    pub fn mul(&self, f: &Gf, other: &Mat) -> Mat {
        let n = self.n;
        let mut out = Mat::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let s = out.data[i * n + j];
                        out.data[i * n + j] = f.add(s, f.mul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, f: &Gf, other: &Mat) -> Mat {
        Mat {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect(),
        }
    }

    pub fn scalar(n: usize, c: Fe) -> Mat {
        let mut m = Mat::zero(n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn is_nilpotent(&self, f: &Gf) -> bool {
        let mut p = self.clone();
        for _ in 0..self.n.max(1) {
            p = p.mul(f, self);
        }
        self.n == 0 || p.data.iter().all(|x| x.is_zero())
    }

    pub fn rank(&self, f: &Gf) -> usize {
        let rows: Vec<Vec<Fe>> = (0..self.n).map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec()).collect();
        rank(f, &rows, self.n)
    }

    pub fn map(&self, g: impl Fn(Fe) -> Fe) -> Mat {
        Mat { n: self.n, data: self.data.iter().map(|&x| g(x)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_is_annihilated() {
        let f = Gf::new(5, 1).unwrap();
        let rows = vec![
            vec![Fe(1), Fe(2), Fe(3), Fe(4)],
            vec![Fe(2), Fe(4), Fe(1), Fe(0)],
        ];
        let ns = nullspace(&f, &rows, 4);
        assert_eq!(ns.len(), 2);
        for x in &ns {
            for r in &rows {
                let mut s = Fe::ZERO;
                for (a, b) in r.iter().zip(x) {
                    s = f.add(s, f.mul(*a, *b));
                }
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn rref_is_canonical() {
        let f = Gf::new(3, 2).unwrap();
        let a = vec![vec![Fe(1), Fe(2), Fe(0)], vec![Fe(0), Fe(1), Fe(5)]];
        let b = vec![
            a[0].iter().zip(&a[1]).map(|(&x, &y)| f.add(x, y)).collect::<Vec<_>>(),
            a[1].iter().map(|&y| f.mul(y, Fe(7))).collect::<Vec<_>>(),
        ];
        let ra = Rref::from_rows(&f, 3, &a);
        let rb = Rref::from_rows(&f, 3, &b);
        assert_eq!(ra.rank(), 2);
        assert_eq!(ra, rb);
    }
}
