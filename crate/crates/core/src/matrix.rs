//! Dense matrices over arbitrary-precision rationals with exact elimination.

use num::{BigRational, One, Zero};

/// Row-major rational matrix. All elimination is exact, no floating point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == width),
            "ragged rows in matrix constructor"
        );
        RatMatrix {
            rows: height,
            cols: width,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Exact rank by Gaussian elimination with first-nonzero pivoting.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let pivot = (rank..m.rows).find(|&r| !m.at(r, col).is_zero());
            let Some(p) = pivot else { continue };
            m.swap_rows(rank, p);
            let inv = m.at(rank, col).clone();
            for r in rank + 1..m.rows {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col) / &inv;
                for c in col..m.cols {
                    let v = m.at(r, c) - &factor * m.at(rank, c);
                    m.set(r, c, v);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Exact determinant of a square matrix.
    pub fn determinant(&self) -> BigRational {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let mut m = self.clone();
        let mut det = BigRational::one();
        for col in 0..m.cols {
            let pivot = (col..m.rows).find(|&r| !m.at(r, col).is_zero());
            let Some(p) = pivot else {
                return BigRational::zero();
            };
            if p != col {
                m.swap_rows(col, p);
                det = -det;
            }
            det *= m.at(col, col);
            let inv = m.at(col, col).clone();
            for r in col + 1..m.rows {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col) / &inv;
                for c in col..m.cols {
                    let v = m.at(r, c) - &factor * m.at(col, c);
                    m.set(r, c, v);
                }
            }
        }
        det
    }

    /// Exact inverse, or None when the matrix is singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = RatMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.at(r, col).is_zero())?;
            m.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let scale = m.at(col, col).clone();
            for c in 0..n {
                let v = m.at(col, c) / &scale;
                m.set(col, c, v);
                let w = inv.at(col, c) / &scale;
                inv.set(col, c, w);
            }
            for r in 0..n {
                if r == col || m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone();
                for c in 0..n {
                    let v = m.at(r, c) - &factor * m.at(col, c);
                    m.set(r, c, v);
                    let w = inv.at(r, c) - &factor * inv.at(col, c);
                    inv.set(r, c, w);
                }
            }
        }
        Some(inv)
    }

    /// Solves `self * x = rhs` when a unique solution exists.
    ///
    /// Returns None when the system is inconsistent or the solution is not
    /// unique. The matrix may have more rows than columns.
    pub fn solve_unique(&self, rhs: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(rhs.len(), self.rows, "right-hand side length mismatch");
        let mut m = RatMatrix::zero(self.rows, self.cols + 1);
        for (r, rhs_entry) in rhs.iter().enumerate() {
            for c in 0..self.cols {
                m.set(r, c, self.at(r, c).clone());
            }
            m.set(r, self.cols, rhs_entry.clone());
        }
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in 0..self.cols {
            let pivot = (rank..m.rows).find(|&r| !m.at(r, col).is_zero());
            let Some(p) = pivot else { continue };
            m.swap_rows(rank, p);
            let scale = m.at(rank, col).clone();
            for c in col..=self.cols {
                let v = m.at(rank, c) / &scale;
                m.set(rank, c, v);
            }
            for r in 0..m.rows {
                if r == rank || m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone();
                for c in col..=self.cols {
                    let v = m.at(r, c) - &factor * m.at(rank, c);
                    m.set(r, c, v);
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        for r in rank..m.rows {
            if !m.at(r, self.cols).is_zero() {
                return None;
            }
        }
        if rank < self.cols {
            return None;
        }
        let mut x = vec![BigRational::zero(); self.cols];
        for (row, &col) in pivot_cols.iter().enumerate() {
            x[col] = m.at(row, self.cols).clone();
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn rank_of_rectangular_matrix() {
        let m = RatMatrix::from_rows(vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(0), q(1), q(1)],
        ]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn determinant_and_inverse_agree() {
        let m = RatMatrix::from_rows(vec![
            vec![q(2), q(1), q(0)],
            vec![q(1), q(3), q(1)],
            vec![q(0), q(1), q(4)],
        ]);
        assert_eq!(m.determinant(), q(18));
        let inv = m.inverse().unwrap();
        let mut prod = RatMatrix::zero(3, 3);
        for r in 0..3 {
            for c in 0..3 {
                let mut acc = BigRational::zero();
                for k in 0..3 {
                    acc += m.at(r, k) * inv.at(k, c);
                }
                prod.set(r, c, acc);
            }
        }
        assert_eq!(prod, RatMatrix::identity(3));
    }

    #[test]
    fn solve_rejects_underdetermined_systems() {
        let m = RatMatrix::from_rows(vec![vec![q(1), q(1)], vec![q(2), q(2)]]);
        assert_eq!(m.solve_unique(&[q(3), q(6)]), None);
        let consistent =
            RatMatrix::from_rows(vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(1), q(1)]]);
        assert_eq!(
            consistent.solve_unique(&[q(2), q(5), q(7)]),
            Some(vec![q(2), q(5)])
        );
        assert_eq!(consistent.solve_unique(&[q(2), q(5), q(8)]), None);
    }
}
