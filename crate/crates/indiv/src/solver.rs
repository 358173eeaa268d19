//! Linear systems whose unknowns are ring elements.
//!
//! A system `Σ_u c_{e,u} · x_u = b_e` with coefficients and unknowns in R is
//! solved by restriction of scalars: each unknown becomes dim(R) unknowns
//! over F_p and each coefficient acts through its multiplication matrix. One
//! factorization serves any number of right-hand sides, which is what the
//! splitting solver leans on. Pivot order is seedable; "no" answers carry a
//! replayable inconsistency certificate.

use crate::error::{Error, Result};
use crate::linalg::{FpMat, FpSolver, InfeasCert};
use crate::ring::{mul_matrix, RingElem, RingHandle};

/// Sparse system of R-linear equations in R-valued unknowns.
#[derive(Debug, Clone)]
pub struct RingSystem {
    ring: RingHandle,
    n_eqs: usize,
    n_unknowns: usize,
    coeffs: Vec<(usize, usize, RingElem)>,
}

impl RingSystem {
    pub fn new(ring: &RingHandle, n_eqs: usize, n_unknowns: usize) -> Self {
        RingSystem {
            ring: ring.clone(),
            n_eqs,
            n_unknowns,
            coeffs: Vec::new(),
        }
    }

    /// Adds `c · x_unknown` to equation `eq`.
    pub fn push(&mut self, eq: usize, unknown: usize, c: RingElem) -> Result<()> {
        if c.owner() != &self.ring {
            return Err(Error::RingMismatch);
        }
        if eq >= self.n_eqs || unknown >= self.n_unknowns {
            return Err(Error::IndexOutOfRange {
                index: eq.max(unknown),
                arity: self.n_eqs.max(self.n_unknowns),
            });
        }
        if !c.is_zero() {
            self.coeffs.push((eq, unknown, c));
        }
        Ok(())
    }

    pub fn ring(&self) -> &RingHandle {
        &self.ring
    }

    pub fn n_eqs(&self) -> usize {
        self.n_eqs
    }

    pub fn n_unknowns(&self) -> usize {
        self.n_unknowns
    }

    fn fp_matrix(&self) -> Result<FpMat> {
        let dim = self.ring.dim().ok_or(Error::InfiniteDimensional)?;
        let mut m = FpMat::zeros(self.ring.modulus(), self.n_eqs * dim, self.n_unknowns * dim);
        let p = self.ring.modulus();
        for (eq, unk, c) in &self.coeffs {
            let block = mul_matrix(&self.ring, c);
            for i in 0..dim {
                for j in 0..dim {
                    let v = block.get(i, j);
                    if v != 0 {
                        let r = eq * dim + i;
                        let cl = unk * dim + j;
                        m.set(r, cl, p.add(m.get(r, cl), v));
                    }
                }
            }
        }
        Ok(m)
    }

    /// Eliminates once; `seed` shuffles the pivot-column order.
    pub fn factor(&self, seed: Option<u64>) -> Result<RingSolver> {
        let mat = self.fp_matrix()?;
        let fp = match seed {
            Some(s) => FpSolver::seeded(&mat, s),
            None => FpSolver::new(&mat, None),
        };
        Ok(RingSolver {
            ring: self.ring.clone(),
            n_eqs: self.n_eqs,
            n_unknowns: self.n_unknowns,
            mat,
            fp,
        })
    }
}

/// Inconsistency certificate for a ring system: an F_p row functional over
/// the scalarized equations annihilating the matrix but not the rhs.
#[derive(Debug, Clone)]
pub struct RingInfeas {
    pub cert: InfeasCert,
}

impl RingInfeas {
    pub fn verify(&self, solver: &RingSolver, rhs: &[RingElem]) -> bool {
        match solver.rhs_to_fp(rhs) {
            Ok(b) => self.cert.verify(&solver.mat, &b),
            Err(_) => false,
        }
    }
}

/// A factored ring system ready to solve right-hand sides.
#[derive(Debug, Clone)]
pub struct RingSolver {
    ring: RingHandle,
    n_eqs: usize,
    n_unknowns: usize,
    mat: FpMat,
    fp: FpSolver,
}

impl RingSolver {
    fn rhs_to_fp(&self, rhs: &[RingElem]) -> Result<Vec<u8>> {
        let dim = self.ring.dim().unwrap();
        if rhs.len() != self.n_eqs {
            return Err(Error::IndexOutOfRange {
                index: rhs.len(),
                arity: self.n_eqs,
            });
        }
        let mut b = vec![0u8; self.n_eqs * dim];
        for (e, v) in rhs.iter().enumerate() {
            if v.owner() != &self.ring {
                return Err(Error::RingMismatch);
            }
            for (i, c) in v.basis_pairs() {
                b[e * dim + i as usize] = c;
            }
        }
        Ok(b)
    }

    /// Solves for the unknowns; free variables are pinned to zero by the
    /// factored pivot order.
    pub fn solve(&self, rhs: &[RingElem]) -> Result<std::result::Result<Vec<RingElem>, RingInfeas>> {
        let dim = self.ring.dim().unwrap();
        let b = self.rhs_to_fp(rhs)?;
        match self.fp.solve(&b) {
            Ok(x) => {
                let out = (0..self.n_unknowns)
                    .map(|u| RingElem::from_fp_col(&self.ring, &x[u * dim..(u + 1) * dim]))
                    .collect();
                Ok(Ok(out))
            }
            Err(cert) => Ok(Err(RingInfeas { cert })),
        }
    }

    pub fn rank(&self) -> usize {
        self.fp.rank()
    }
}
