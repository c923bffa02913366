//! Linear systems over Z/p^N by Smith normal form with minimal-valuation
//! pivoting. The factorization `U A V = D` is computed once and reused for
//! every right-hand side.

use serde::Serialize;

use super::Zpn;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Matrix whose `j`-th column is `cols[j]`.
    pub fn from_cols(rows: usize, cols: &[Vec<u64>]) -> Mat {
        let mut m = Mat::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn apply(&self, z: &Zpn, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(0, |acc, j| z.add(acc, z.mul(self.get(i, j), x[j])))
            })
            .collect()
    }

    pub fn mul(&self, z: &Zpn, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = z.add(out.get(i, j), z.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Entrywise reduction to a coarser modulus `p^k`.
    pub fn truncated(&self, z: &Zpn, k: u32) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| z.truncate(v, k)).collect(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row_dst -= f * row_src
    fn row_axpy(&mut self, z: &Zpn, dst: usize, src: usize, f: u64) {
        for j in 0..self.cols {
            let v = z.sub(self.get(dst, j), z.mul(f, self.get(src, j)));
            self.set(dst, j, v);
        }
    }

    fn col_axpy(&mut self, z: &Zpn, dst: usize, src: usize, f: u64) {
        for i in 0..self.rows {
            let v = z.sub(self.get(i, dst), z.mul(f, self.get(i, src)));
            self.set(i, dst, v);
        }
    }

    fn scale_row(&mut self, z: &Zpn, i: usize, f: u64) {
        for j in 0..self.cols {
            let v = z.mul(self.get(i, j), f);
            self.set(i, j, v);
        }
    }
}

/// Why a system has no solution at the working precision: the first row of
/// the diagonalized system whose right-hand side is not divisible enough.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NoSolution {
    /// Number of p-adic digits (from the bottom) at which the obstruction is
    /// visible: one more than the valuation of the offending entry.
    pub depth: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub x: Vec<u64>,
    /// Basis of the part of the kernel that survives at every precision.
    pub free_kernel: Vec<Vec<u64>>,
    /// Kernel vectors that exist only because of the finite modulus.
    pub precision_kernel: Vec<Vec<u64>>,
    /// Digits to which `A x = c` is guaranteed.
    pub precision: u32,
}

/// `U A V = D` with `D` diagonal; `pivots[t]` is the valuation of `D[t][t]`
/// for the nonzero diagonal entries.
#[derive(Clone, Debug)]
pub struct Smith {
    z: Zpn,
    rows: usize,
    cols: usize,
    u: Mat,
    v: Mat,
    pivots: Vec<u32>,
}

impl Smith {
    pub fn factor(z: Zpn, a: &Mat) -> Smith {
        let (m, n) = (a.rows, a.cols);
        let mut d = a.clone();
        let mut u = Mat::identity(m);
        let mut v = Mat::identity(n);
        let mut pivots = Vec::new();
        for t in 0..m.min(n) {
            let mut best: Option<(u32, usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = d.get(i, j);
                    if x != 0 {
                        let val = z.val(x);
                        if best.is_none_or(|(bv, _, _)| val < bv) {
                            best = Some((val, i, j));
                        }
                    }
                }
            }
            let Some((val, bi, bj)) = best else { break };
            d.swap_rows(t, bi);
            u.swap_rows(t, bi);
            d.swap_cols(t, bj);
            v.swap_cols(t, bj);
            let unit = z.div_p_pow(d.get(t, t), val).expect("pivot valuation");
            let inv = z.inv(unit).expect("unit part is invertible");
            d.scale_row(&z, t, inv);
            u.scale_row(&z, t, inv);
            for i in t + 1..m {
                let x = d.get(i, t);
                if x != 0 {
                    let f = z.div_p_pow(x, val).expect("minimal pivot divides column");
                    d.row_axpy(&z, i, t, f);
                    u.row_axpy(&z, i, t, f);
                }
            }
            for j in t + 1..n {
                let x = d.get(t, j);
                if x != 0 {
                    let f = z.div_p_pow(x, val).expect("minimal pivot divides row");
                    d.col_axpy(&z, j, t, f);
                    v.col_axpy(&z, j, t, f);
                }
            }
            pivots.push(val);
        }
        Smith { z, rows: m, cols: n, u, v, pivots }
    }

    pub fn modulus(&self) -> &Zpn {
        &self.z
    }

    /// Valuations of the nonzero elementary divisors, in pivot order.
    pub fn pivots(&self) -> &[u32] {
        &self.pivots
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Precision lost by the elimination: the largest pivot valuation.
    pub fn delta(&self) -> u32 {
        self.pivots.iter().copied().max().unwrap_or(0)
    }

    fn v_col(&self, j: usize) -> Vec<u64> {
        (0..self.cols).map(|i| self.v.get(i, j)).collect()
    }

    /// Kernel vectors that exist at every precision (columns of `V` beyond the rank).
    pub fn free_kernel(&self) -> Vec<Vec<u64>> {
        (self.rank()..self.cols).map(|j| self.v_col(j)).collect()
    }

    /// `p^(N - d_t) V e_t` for each pivot with `d_t > 0`.
    pub fn precision_kernel(&self) -> Vec<Vec<u64>> {
        let n = self.z.digits();
        self.pivots
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d > 0)
            .map(|(t, &d)| {
                let f = self.z.p_pow(n - d);
                self.v_col(t).into_iter().map(|x| self.z.mul(x, f)).collect()
            })
            .collect()
    }

    /// Solves `A x = c`. Rows of the diagonal system past the rank are
    /// required to vanish modulo `p^check`; `check` is clamped to the modulus.
    pub fn solve_checked(&self, c: &[u64], check: u32) -> Result<Solution, NoSolution> {
        assert_eq!(c.len(), self.rows);
        let z = &self.z;
        let n = z.digits();
        let check = check.min(n);
        let uc = self.u.apply(z, c);
        let r = self.rank();
        let mut zvec = vec![0u64; self.cols];
        for (t, &d) in self.pivots.iter().enumerate() {
            match z.div_p_pow(uc[t], d) {
                Some(q) => zvec[t] = q,
                None => return Err(NoSolution { depth: z.val(uc[t]) + 1 }),
            }
        }
        for &val in &uc[r..] {
            if z.truncate(val, check) != 0 {
                return Err(NoSolution { depth: z.val(val) + 1 });
            }
        }
        let x = self.v.apply(z, &zvec);
        let precision = if r < self.rows { check } else { n };
        Ok(Solution {
            x,
            free_kernel: self.free_kernel(),
            precision_kernel: self.precision_kernel(),
            precision,
        })
    }

    /// Solves `A x = c` requiring every row to hold at full precision.
    pub fn solve(&self, c: &[u64]) -> Result<Solution, NoSolution> {
        self.solve_checked(c, self.z.digits())
    }
}

/// One-shot helper: factor and solve.
pub fn linsolve(z: Zpn, a: &Mat, c: &[u64]) -> Result<Solution, NoSolution> {
    Smith::factor(z, a).solve(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z8() -> Zpn {
        Zpn::new(2, 3).unwrap()
    }

    #[test]
    fn identity_returns_rhs() {
        let z = Zpn::new(3, 4).unwrap();
        let c = vec![5, 17, 80];
        let s = linsolve(z, &Mat::identity(3), &c).unwrap();
        assert_eq!(s.x, c);
        assert!(s.free_kernel.is_empty());
        assert!(s.precision_kernel.is_empty());
    }

    #[test]
    fn two_y_equals_four_mod_8() {
        let s = linsolve(z8(), &Mat::from_rows(vec![vec![2]]), &[4]).unwrap();
        assert_eq!(s.x, vec![2]);
        assert!(s.free_kernel.is_empty());
        assert_eq!(s.precision_kernel, vec![vec![4]]);
    }

    #[test]
    fn two_y_equals_one_mod_8() {
        let e = linsolve(z8(), &Mat::from_rows(vec![vec![2]]), &[1]).unwrap_err();
        assert_eq!(e.depth, 1);
    }

    #[test]
    fn factorization_identity() {
        let z = Zpn::new(2, 5).unwrap();
        let a = Mat::from_rows(vec![vec![2, 4, 6], vec![4, 12, 1], vec![6, 16, 7]]);
        let s = Smith::factor(z, &a);
        let d = s.u.mul(&z, &a).mul(&z, &s.v);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(d.get(i, j), 0);
                }
            }
        }
        for (t, &v) in s.pivots().iter().enumerate() {
            assert_eq!(z.val(d.get(t, t)), v);
        }
    }

    #[test]
    fn rectangular_kernel() {
        // (2 2) x = 0 over Z/16: kernel spanned by (1, -1) and the precision vector
        let z = Zpn::new(2, 4).unwrap();
        let a = Mat::from_rows(vec![vec![2, 2]]);
        let s = linsolve(z, &a, &[0]).unwrap();
        assert_eq!(s.free_kernel.len(), 1);
        assert_eq!(s.precision_kernel.len(), 1);
        for k in s.free_kernel.iter().chain(&s.precision_kernel) {
            assert_eq!(a.apply(&z, k), vec![0]);
        }
        let sol = linsolve(z, &a, &[6]).unwrap();
        assert_eq!(a.apply(&z, &sol.x), vec![6]);
        assert_eq!(linsolve(z, &a, &[3]).unwrap_err().depth, 1);
    }
}
