//! Subspaces of K^n in reduced row echelon form, stored flat.

use std::fmt;

use crate::finite_fields::{Fe, Gf};
use crate::linalg::Mat;

/// A subspace of K^n as its reduced echelon basis. Ordering compares the
/// dimension first, then the basis rows lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    dim: u32,
    n: u32,
    data: Vec<Fe>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace{:?}", self.rows().collect::<Vec<_>>())
    }
}

impl Subspace {
    pub fn zero(n: usize) -> Subspace {
        Subspace { dim: 0, n: n as u32, data: Vec::new() }
    }

    pub fn full(n: usize) -> Subspace {
        let mut data = vec![Fe::ZERO; n * n];
        for i in 0..n {
            data[i * n + i] = Fe::ONE;
        }
        Subspace { dim: n as u32, n: n as u32, data }
    }

    pub fn from_rows<'a>(f: &Gf, n: usize, rows: impl IntoIterator<Item = &'a [Fe]>) -> Subspace {
        let mut s = Subspace::zero(n);
        for r in rows {
            s.insert_in_place(f, r);
        }
        s
    }

    pub fn ambient_dim(&self) -> usize {
        self.n as usize
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        let n = self.n as usize;
        &self.data[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Fe]> {
        let n = (self.n as usize).max(1);
        self.data.chunks(n).take(self.dim as usize)
    }

    pub fn pivot(&self, i: usize) -> usize {
        self.row(i).iter().position(|x| !x.is_zero()).expect("echelon rows are nonzero")
    }

    pub fn pivots(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| self.pivot(i)).collect()
    }

    /// Clears pivot coordinates of v.
    #[inline]
    pub fn reduce(&self, f: &Gf, v: &mut [Fe]) {
        let n = self.n as usize;
        for i in 0..self.dim as usize {
            let row = &self.data[i * n..(i + 1) * n];
            let pc = row.iter().position(|x| !x.is_zero()).unwrap();
            let c = v[pc];
            if !c.is_zero() {
                let nc = f.neg(c);
                for (x, &y) in v[pc..].iter_mut().zip(&row[pc..]) {
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

    /// Adds v; returns whether the dimension grew.
    pub fn insert_in_place(&mut self, f: &Gf, v: &[Fe]) -> bool {
        let n = self.n as usize;
        let mut w = v.to_vec();
        self.reduce(f, &mut w);
        let Some(pc) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = f.inv(w[pc]).unwrap();
        for x in w[pc..].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let mut pos = self.dim as usize;
        for i in 0..self.dim as usize {
            let row = &mut self.data[i * n..(i + 1) * n];
            let c = row[pc];
            if !c.is_zero() {
                let nc = f.neg(c);
                for (x, &y) in row[pc..].iter_mut().zip(&w[pc..]) {
                    if !y.is_zero() {
                        *x = f.add(*x, f.mul(nc, y));
                    }
                }
            }
            if pos == self.dim as usize && row.iter().position(|x| !x.is_zero()).unwrap() > pc {
                pos = i;
            }
        }
        let at = pos * n;
        self.data.splice(at..at, w);
        self.dim += 1;
        true
    }

    pub fn with(&self, f: &Gf, v: &[Fe]) -> Subspace {
        let mut s = self.clone();
        s.insert_in_place(f, v);
        s
    }

    pub fn is_subspace_of(&self, f: &Gf, other: &Subspace) -> bool {
        self.rows().all(|r| other.contains(f, r))
    }

    /// M(S) ⊂ S.
    pub fn is_stable(&self, f: &Gf, m: &Mat) -> bool {
        self.rows().all(|r| self.contains(f, &m.apply(f, r)))
    }

    pub fn image(&self, f: &Gf, m: &Mat) -> Subspace {
        let imgs: Vec<Vec<Fe>> = self.rows().map(|r| m.apply(f, r)).collect();
        Subspace::from_rows(f, self.n as usize, imgs.iter().map(|v| v.as_slice()))
    }

    /// Coefficientwise map (a field automorphism keeps echelon shape).
    pub fn map_coeffs(&self, g: impl Fn(Fe) -> Fe) -> Subspace {
        Subspace { dim: self.dim, n: self.n, data: self.data.iter().map(|&x| g(x)).collect() }
    }

    /// Rank of the rows restricted to the column range.
    pub fn rank_on_columns(&self, f: &Gf, cols: std::ops::Range<usize>) -> usize {
        let width = cols.len();
        let mut s = Subspace::zero(width);
        for r in self.rows() {
            s.insert_in_place(f, &r[cols.clone()]);
        }
        s.dim()
    }

    pub fn flat(&self) -> &[Fe] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insertion_keeps_echelon_order() {
        let f = Gf::new(3, 2).unwrap();
        let s = Subspace::from_rows(
            &f,
            3,
            [&[Fe(0), Fe(1), Fe(2)][..], &[Fe(1), Fe(5), Fe(0)][..], &[Fe(1), Fe(5), Fe(0)][..]],
        );
        assert_eq!(s.dim(), 2);
        assert_eq!(s.pivots(), vec![0, 1]);
        assert!(s.contains(&f, &[Fe(1), Fe(5), Fe(0)]));
        let t = Subspace::from_rows(&f, 3, [&[Fe(1), Fe(5), Fe(0)][..], &[Fe(0), Fe(1), Fe(2)][..]]);
        assert_eq!(s, t);
    }
}
