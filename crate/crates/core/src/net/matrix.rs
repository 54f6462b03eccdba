//! Row-major f64 matrix with the three product shapes backprop needs.
//!
//! Every output element is a dot product accumulated in index order, and
//! parallelism only splits over independent output rows, so results are
//! bitwise identical for any worker count.

use rayon::prelude::*;

const PAR_MIN_ROWS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(&row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self (n,k) * other^T (k,m)` where `other` is `(m,k)`: both operands
    /// stream along contiguous rows.
    pub fn matmul_nt(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols, "inner dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.rows);
        let cols = self.cols;
        let out_cols = out.cols;
        let body = |(i, out_row): (usize, &mut [f64])| {
            let a = &self.data[i * cols..(i + 1) * cols];
            for (o, out_v) in out_row.iter_mut().enumerate().take(out_cols) {
                let b = &other.data[o * cols..(o + 1) * cols];
                let mut acc = 0.0;
                for k in 0..cols {
                    acc += a[k] * b[k];
                }
                *out_v = acc;
            }
        };
        if self.rows >= PAR_MIN_ROWS {
            out.data.par_chunks_mut(out_cols).enumerate().for_each(body);
        } else {
            out.data.chunks_mut(out_cols).enumerate().for_each(body);
        }
        out
    }

    /// `self (n,k) * other (k,m)` accumulated row-wise.
    pub fn matmul_nn(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        let k_dim = self.cols;
        let out_cols = out.cols;
        let body = |(i, out_row): (usize, &mut [f64])| {
            let a = &self.data[i * k_dim..(i + 1) * k_dim];
            for (k, &a_ik) in a.iter().enumerate() {
                if a_ik == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * out_cols..(k + 1) * out_cols];
                for (o, b_v) in b_row.iter().enumerate() {
                    out_row[o] += a_ik * b_v;
                }
            }
        };
        if self.rows >= PAR_MIN_ROWS {
            out.data.par_chunks_mut(out_cols).enumerate().for_each(body);
        } else {
            out.data.chunks_mut(out_cols).enumerate().for_each(body);
        }
        out
    }

    /// `self^T (n,k) * other (n,m)` -> `(k,m)`; the gradient product
    /// `dW = dY^T X`. Each output row scans the batch dimension in order.
    pub fn matmul_tn(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows, "batch dimension mismatch");
        let mut out = Mat::zeros(self.cols, other.cols);
        let n = self.rows;
        let a_cols = self.cols;
        let out_cols = out.cols;
        let body = |(j, out_row): (usize, &mut [f64])| {
            for i in 0..n {
                let a_ij = self.data[i * a_cols + j];
                if a_ij == 0.0 {
                    continue;
                }
                let b_row = &other.data[i * out_cols..(i + 1) * out_cols];
                for (o, b_v) in b_row.iter().enumerate() {
                    out_row[o] += a_ij * b_v;
                }
            }
        };
        if out.rows >= PAR_MIN_ROWS {
            out.data.par_chunks_mut(out_cols).enumerate().for_each(body);
        } else {
            out.data.chunks_mut(out_cols).enumerate().for_each(body);
        }
        out
    }

    /// Column sums: the bias gradient.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            for (o, v) in row.iter().enumerate() {
                out[o] += v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_shapes_and_values() {
        let a = Mat::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]); // 3x2
        let b = Mat::from_rows(vec![vec![7.0, 8.0], vec![9.0, 10.0]]); // 2x2
        let nt = a.matmul_nt(&b); // a * b^T
        assert_eq!(nt.rows, 3);
        assert_eq!(nt.row(0), &[1.0 * 7.0 + 2.0 * 8.0, 1.0 * 9.0 + 2.0 * 10.0]);
        let nn = a.matmul_nn(&b);
        assert_eq!(nn.row(1), &[3.0 * 7.0 + 4.0 * 9.0, 3.0 * 8.0 + 4.0 * 10.0]);
        let tn = a.matmul_tn(&a); // 2x2 gram matrix
        assert_eq!(tn.row(0), &[35.0, 44.0]);
        assert_eq!(tn.row(1), &[44.0, 56.0]);
    }

    #[test]
    fn parallel_threshold_does_not_change_bits() {
        // same computation just below and above the parallel threshold must
        // agree row by row
        let big = 2 * PAR_MIN_ROWS;
        let mut a = Mat::zeros(big, 17);
        for i in 0..big {
            for j in 0..17 {
                a.data[i * 17 + j] = ((i * 31 + j * 7) % 13) as f64 * 0.37 - 1.0;
            }
        }
        let mut w = Mat::zeros(9, 17);
        for i in 0..9 {
            for j in 0..17 {
                w.data[i * 17 + j] = ((i * 5 + j) % 11) as f64 * 0.21 - 0.8;
            }
        }
        let full = a.matmul_nt(&w);
        for i in 0..big {
            let single = Mat { rows: 1, cols: 17, data: a.row(i).to_vec() };
            let r = single.matmul_nt(&w);
            for o in 0..9 {
                assert_eq!(full.row(i)[o].to_bits(), r.row(0)[o].to_bits());
            }
        }
    }

    #[test]
    fn col_sums_match_manual() {
        let a = Mat::from_rows(vec![vec![1.0, -2.0], vec![3.0, 5.0]]);
        assert_eq!(a.col_sums(), vec![4.0, 3.0]);
    }
}
