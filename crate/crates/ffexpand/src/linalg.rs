//! Dense linear algebra over a [`FieldCtx`].
//!
//! Matrices store packed coefficient values row-major.  Reduction is plain
//! Gauss-Jordan with the pivot chosen as the first nonzero entry of each
//! column, so identical inputs reduce identically on every platform; kernel
//! bases use the standard free-column construction (free variable set to 1,
//! pivot variables solved), which makes the basis deterministic too.

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, FieldElement};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixGF {
    ctx: FieldCtx,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

/// Outcome of [`MatrixGF::rref`]: the reduced matrix, its pivot columns in
/// order, and the rank (= number of pivots).
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: MatrixGF,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl MatrixGF {
    pub fn zero(ctx: &FieldCtx, rows: usize, cols: usize) -> MatrixGF {
        MatrixGF { ctx: ctx.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ctx: &FieldCtx, n: usize) -> MatrixGF {
        let mut m = MatrixGF::zero(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from rows of field elements.
    pub fn from_rows(ctx: &FieldCtx, rows: &[Vec<FieldElement>]) -> Result<MatrixGF> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = MatrixGF::zero(ctx, rows.len(), ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::domain("rows have differing lengths"));
            }
            for (j, e) in row.iter().enumerate() {
                ctx.check_same(e.ctx(), "matrix entry")?;
                m.data[i * ncols + j] = e.packed();
            }
        }
        Ok(m)
    }

    #[cfg(test)]
    pub(crate) fn from_raw(ctx: &FieldCtx, rows: usize, cols: usize, data: Vec<u64>) -> MatrixGF {
        debug_assert_eq!(data.len(), rows * cols);
        MatrixGF { ctx: ctx.clone(), rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.ctx.from_packed(self.data[i * self.cols + j]).expect("entries are canonical")
    }

    pub fn set(&mut self, i: usize, j: usize, v: &FieldElement) {
        assert!(self.ctx == *v.ctx(), "matrix entry context mismatch");
        self.data[i * self.cols + j] = v.packed();
    }

    pub(crate) fn get_raw(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub(crate) fn set_raw(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    /// Matrix-vector product on packed values.
    pub(crate) fn mul_vec_raw(&self, v: &[u64]) -> Vec<u64> {
        debug_assert_eq!(v.len(), self.cols);
        let mut out = vec![0u64; self.rows];
        for i in 0..self.rows {
            let mut acc = 0u64;
            for j in 0..self.cols {
                let a = self.data[i * self.cols + j];
                if a != 0 && v[j] != 0 {
                    acc = self.ctx.add_raw(acc, self.ctx.mul_raw(a, v[j]));
                }
            }
            out[i] = acc;
        }
        out
    }

    /// Reduced row echelon form.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let ctx = m.ctx.clone();
        let mut pivots = Vec::new();
        let mut next_row = 0usize;
        for col in 0..m.cols {
            if next_row >= m.rows {
                break;
            }
            // First nonzero entry at or below next_row.
            let Some(pivot_row) = (next_row..m.rows).find(|&r| m.get_raw(r, col) != 0) else {
                continue;
            };
            if pivot_row != next_row {
                for j in 0..m.cols {
                    let a = m.get_raw(next_row, j);
                    let b = m.get_raw(pivot_row, j);
                    m.set_raw(next_row, j, b);
                    m.set_raw(pivot_row, j, a);
                }
            }
            let inv = ctx.inv_raw(m.get_raw(next_row, col)).expect("pivot is nonzero");
            for j in col..m.cols {
                m.set_raw(next_row, j, ctx.mul_raw(m.get_raw(next_row, j), inv));
            }
            for r in 0..m.rows {
                if r == next_row {
                    continue;
                }
                let factor = m.get_raw(r, col);
                if factor == 0 {
                    continue;
                }
                for j in col..m.cols {
                    let sub = ctx.mul_raw(factor, m.get_raw(next_row, j));
                    m.set_raw(r, j, ctx.sub_raw(m.get_raw(r, j), sub));
                }
            }
            pivots.push(col);
            next_row += 1;
        }
        let rank = pivots.len();
        Rref { matrix: m, pivots, rank }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// A basis of the right kernel {v : Mv = 0}, one vector per free column,
    /// in ascending free-column order.  Empty when the kernel is trivial.
    pub fn kernel(&self) -> Vec<Vec<FieldElement>> {
        let Rref { matrix: r, pivots, .. } = self.rref();
        let ctx = &self.ctx;
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &col) in pivots.iter().enumerate() {
                v[col] = Some(row);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut v = vec![0u64; self.cols];
            v[free] = 1;
            for (row, &col) in pivots.iter().enumerate() {
                // Row reads: x_col + sum_{j free} r[row][j] x_j = 0.
                v[col] = ctx.neg_raw(r.get_raw(row, free));
            }
            debug_assert!(self.mul_vec_raw(&v).iter().all(|&x| x == 0));
            basis.push(
                v.into_iter()
                    .map(|x| ctx.from_packed(x).expect("canonical"))
                    .collect::<Vec<FieldElement>>(),
            );
        }
        basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::RngExt;

    fn f(spec: &str) -> FieldCtx {
        FieldCtx::parse_spec(spec).unwrap()
    }

    fn mat(ctx: &FieldCtx, rows: &[&[i64]]) -> MatrixGF {
        let rows: Vec<Vec<FieldElement>> =
            rows.iter().map(|r| r.iter().map(|&v| ctx.from_int(v)).collect()).collect();
        MatrixGF::from_rows(ctx, &rows).unwrap()
    }

    #[test]
    fn rank_one_matrix_reduces() {
        let ctx = f("5");
        let m = mat(&ctx, &[&[1, 2], &[2, 4]]);
        let r = m.rref();
        assert_eq!(r.rank, 1);
        assert_eq!(r.pivots, vec![0]);
        assert_eq!(r.matrix.get(0, 0), ctx.from_int(1));
        assert_eq!(r.matrix.get(0, 1), ctx.from_int(2));
        assert_eq!(r.matrix.get(1, 0), ctx.from_int(0));
        assert_eq!(r.matrix.get(1, 1), ctx.from_int(0));
    }

    #[test]
    fn identity_has_full_rank() {
        let ctx = f("7");
        assert_eq!(MatrixGF::identity(&ctx, 3).rank(), 3);
        assert_eq!(MatrixGF::zero(&ctx, 2, 3).rank(), 0);
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        let ctx = f("5");
        let m = mat(&ctx, &[&[1, 2], &[2, 4]]);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], vec![ctx.from_int(3), ctx.from_int(1)]);
    }

    #[test]
    fn kernel_of_invertible_matrix_is_empty() {
        let ctx = f("7");
        let m = mat(&ctx, &[&[1, 2], &[3, 4]]);
        assert!(m.kernel().is_empty());
    }

    #[test]
    fn rref_is_idempotent() {
        let ctx = f("7");
        let mut rng = seeded_rng(41);
        for _ in 0..200 {
            let rows = rng.random_range(1..8);
            let cols = rng.random_range(1..8);
            let data: Vec<u64> = (0..rows * cols).map(|_| rng.random_range(0..ctx.q())).collect();
            let m = MatrixGF::from_raw(&ctx, rows, cols, data);
            let r1 = m.rref();
            let r2 = r1.matrix.rref();
            assert_eq!(r1.matrix, r2.matrix);
            assert_eq!(r1.rank, r2.rank);
        }
    }

    #[test]
    fn rank_nullity_holds_and_kernel_annihilates() {
        for spec in ["7", "3^2"] {
            let ctx = f(spec);
            let mut rng = seeded_rng(43);
            for _ in 0..100 {
                let rows = rng.random_range(1..10);
                let cols = rng.random_range(1..10);
                let data: Vec<u64> =
                    (0..rows * cols).map(|_| rng.random_range(0..ctx.q())).collect();
                let m = MatrixGF::from_raw(&ctx, rows, cols, data);
                let rank = m.rank();
                let kernel = m.kernel();
                assert_eq!(rank + kernel.len(), cols);
                for v in &kernel {
                    let raw: Vec<u64> = v.iter().map(FieldElement::packed).collect();
                    assert!(m.mul_vec_raw(&raw).iter().all(|&x| x == 0));
                }
            }
        }
    }

    #[test]
    fn stacked_kernel_basis_has_full_nullity_rank() {
        // 20x35 over F_7: the kernel basis rows stack into a matrix of rank
        // exactly cols - rank(M).
        let ctx = f("7");
        let mut rng = seeded_rng(47);
        let (rows, cols) = (20, 35);
        let data: Vec<u64> = (0..rows * cols).map(|_| rng.random_range(0..ctx.q())).collect();
        let m = MatrixGF::from_raw(&ctx, rows, cols, data);
        let kernel = m.kernel();
        let stacked = MatrixGF::from_rows(&ctx, &kernel).unwrap();
        assert_eq!(stacked.rank(), cols - m.rank());
    }
}
