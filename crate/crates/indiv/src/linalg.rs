//! Dense exact linear algebra over F_p: reduced row echelon form with a
//! configurable pivot-column order, multi-right-hand-side solving, kernel
//! bases, and replayable infeasibility certificates.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fp::PrimeModulus;

/// Row-major dense matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMat {
    p: PrimeModulus,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl FpMat {
    pub fn zeros(p: PrimeModulus, rows: usize, cols: usize) -> Self {
        FpMat {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: PrimeModulus, n: usize) -> Self {
        let mut m = FpMat::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.data[i * self.cols + j] = v % self.p.get() as u8;
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.cols);
        let p = self.p;
        (0..self.rows)
            .map(|i| {
                let mut acc = 0u64;
                for (j, &x) in v.iter().enumerate() {
                    acc += self.get(i, j) as u64 * x as u64;
                }
                p.reduce(acc)
            })
            .collect()
    }

    /// v^T * A for a row functional v.
    pub fn vec_mul(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.rows);
        let p = self.p;
        (0..self.cols)
            .map(|j| {
                let mut acc = 0u64;
                for (i, &x) in v.iter().enumerate() {
                    acc += self.get(i, j) as u64 * x as u64;
                }
                p.reduce(acc)
            })
            .collect()
    }

    pub fn matmul(&self, other: &FpMat) -> FpMat {
        assert_eq!(self.cols, other.rows);
        let p = self.p;
        let mut out = FpMat::zeros(p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = p.add(out.get(i, j), p.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, i: usize, c: u8) {
        let p = self.p;
        for j in 0..self.cols {
            let v = p.mul(self.get(i, j), c);
            self.set(i, j, v);
        }
    }

    /// row[dst] -= c * row[src]
    fn axpy_row(&mut self, dst: usize, src: usize, c: u8) {
        if c == 0 {
            return;
        }
        let p = self.p;
        for j in 0..self.cols {
            let v = p.sub(self.get(dst, j), p.mul(c, self.get(src, j)));
            self.set(dst, j, v);
        }
    }

    pub fn rank(&self) -> usize {
        FpSolver::new(self, None).rank()
    }
}

/// Witness that a linear system `A x = b` is inconsistent: a row functional
/// `lambda` with `lambda^T A = 0` but `lambda^T b != 0`.
#[derive(Debug, Clone)]
pub struct InfeasCert {
    pub functional: Vec<u8>,
    pub value: u8,
}

impl InfeasCert {
    /// Replays the certificate against the original data.
    pub fn verify(&self, a: &FpMat, b: &[u8]) -> bool {
        if self.functional.len() != a.rows() || b.len() != a.rows() {
            return false;
        }
        let p = a.modulus();
        if a.vec_mul(&self.functional).iter().any(|&x| x != 0) {
            return false;
        }
        let mut acc = 0u64;
        for (l, x) in self.functional.iter().zip(b) {
            acc += *l as u64 * *x as u64;
        }
        let v = p.reduce(acc);
        v != 0 && v == self.value
    }
}

/// Reduced row echelon factorization of a matrix, retaining the row transform
/// so many right-hand sides can be solved (or refuted) from one elimination.
///
/// The pivot-column order is a permutation of the columns; varying it by seed
/// varies which solution of an underdetermined system gets picked.
#[derive(Debug, Clone)]
pub struct FpSolver {
    p: PrimeModulus,
    rref: FpMat,
    transform: FpMat,
    pivots: Vec<(usize, usize)>, // (row, col) in elimination order
    col_order: Vec<usize>,
}

impl FpSolver {
    pub fn new(a: &FpMat, col_order: Option<&[usize]>) -> Self {
        let p = a.modulus();
        let order: Vec<usize> = match col_order {
            Some(o) => {
                assert_eq!(o.len(), a.cols());
                o.to_vec()
            }
            None => (0..a.cols()).collect(),
        };
        let mut r = a.clone();
        let mut t = FpMat::identity(p, a.rows());
        let mut pivots = Vec::new();
        let mut next_row = 0usize;
        for &col in &order {
            if next_row >= r.rows() {
                break;
            }
            let Some(pr) = (next_row..r.rows()).find(|&i| r.get(i, col) != 0) else {
                continue;
            };
            r.swap_rows(next_row, pr);
            t.swap_rows(next_row, pr);
            let inv = p.inv(r.get(next_row, col));
            r.scale_row(next_row, inv);
            t.scale_row(next_row, inv);
            for i in 0..r.rows() {
                if i != next_row {
                    let c = r.get(i, col);
                    r.axpy_row(i, next_row, c);
                    t.axpy_row(i, next_row, c);
                }
            }
            pivots.push((next_row, col));
            next_row += 1;
        }
        FpSolver {
            p,
            rref: r,
            transform: t,
            pivots,
            col_order: order,
        }
    }

    pub fn seeded(a: &FpMat, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..a.cols()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        FpSolver::new(a, Some(&order))
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Solves `A x = b`, free variables set to zero. On inconsistency returns
    /// the violated row functional.
    pub fn solve(&self, b: &[u8]) -> Result<Vec<u8>, InfeasCert> {
        assert_eq!(b.len(), self.rref.rows());
        let c = self.transform.mul_vec(b);
        for (i, &ci) in c.iter().enumerate().skip(self.rank()) {
            if ci != 0 {
                return Err(InfeasCert {
                    functional: self.transform.row(i).to_vec(),
                    value: ci,
                });
            }
        }
        let mut x = vec![0u8; self.rref.cols()];
        for &(row, col) in &self.pivots {
            x[col] = c[row];
        }
        Ok(x)
    }

    /// F_p-basis of the kernel, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<u8>> {
        let n = self.rref.cols();
        let mut is_pivot = vec![false; n];
        for &(_, col) in &self.pivots {
            is_pivot[col] = true;
        }
        let mut basis = Vec::new();
        for &fc in self.col_order.iter().filter(|&&c| !is_pivot[c]) {
            let mut v = vec![0u8; n];
            v[fc] = 1;
            for &(row, col) in &self.pivots {
                v[col] = self.p.neg(self.rref.get(row, fc));
            }
            basis.push(v);
        }
        basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(p: u32, rows: usize, cols: usize, entries: &[u8]) -> FpMat {
        let p = PrimeModulus::new(p).unwrap();
        let mut m = FpMat::zeros(p, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, entries[i * cols + j]);
            }
        }
        m
    }

    #[test]
    fn solve_square() {
        let a = mat(5, 2, 2, &[1, 2, 3, 4]);
        let s = FpSolver::new(&a, None);
        assert_eq!(s.rank(), 2);
        let x = s.solve(&[1, 0]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![1, 0]);
    }

    #[test]
    fn infeasible_has_replayable_certificate() {
        // rows are equal, rhs differs
        let a = mat(2, 2, 1, &[1, 1]);
        let s = FpSolver::new(&a, None);
        let b = vec![1, 0];
        let cert = s.solve(&b).unwrap_err();
        assert!(cert.verify(&a, &b));
        assert!(!cert.verify(&a, &[1, 1]));
    }

    #[test]
    fn kernel_of_rank_deficient() {
        let a = mat(3, 2, 3, &[1, 2, 0, 0, 0, 1]);
        let s = FpSolver::new(&a, None);
        let k = s.kernel_basis();
        assert_eq!(k.len(), 1);
        assert!(a.mul_vec(&k[0]).iter().all(|&x| x == 0));
        assert!(k[0].iter().any(|&x| x != 0));
    }

    #[test]
    fn seeded_orders_give_valid_solutions() {
        let a = mat(3, 2, 4, &[1, 1, 2, 0, 0, 1, 1, 1]);
        let b = vec![1, 2];
        for seed in 0..20 {
            let s = FpSolver::seeded(&a, seed);
            let x = s.solve(&b).unwrap();
            assert_eq!(a.mul_vec(&x), b);
        }
    }

    #[test]
    fn kernel_dimension_matches_rank() {
        let a = mat(2, 4, 4, &[1, 0, 1, 0, 0, 1, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0]);
        let s = FpSolver::new(&a, None);
        assert_eq!(s.rank() + s.kernel_basis().len(), 4);
        for v in s.kernel_basis() {
            assert!(a.mul_vec(&v).iter().all(|&x| x == 0));
        }
    }
}
