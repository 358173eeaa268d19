//! Finitely supported vectors and linear maps between free modules over a
//! ring handle, together with the standard map constructors used by the
//! splitting machinery: the augmented maps `psi_map` / `psi_n_map`, exact
//! kernels via restriction of scalars to F_p, and cokernel presentations.

use std::collections::BTreeMap;

use crate::caps::KERNEL_EXHAUST;
use crate::error::{Error, Result};
use crate::index::IndexSet;
use crate::linalg::{FpMat, FpSolver};
use crate::ring::{mul_matrix, RingElem, RingHandle, RingHom};

/// A finitely supported function from an index set to ring elements. No
/// explicit zeros are stored, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinVec {
    ring: RingHandle,
    index: IndexSet,
    entries: BTreeMap<usize, RingElem>,
}

impl FinVec {
    pub fn zero(ring: &RingHandle, index: &IndexSet) -> Self {
        FinVec {
            ring: ring.clone(),
            index: index.clone(),
            entries: BTreeMap::new(),
        }
    }

    /// The unit vector at `pos`.
    pub fn delta(ring: &RingHandle, index: &IndexSet, pos: usize) -> Self {
        let mut v = FinVec::zero(ring, index);
        v.set(pos, ring.one());
        v
    }

    pub fn from_entries(
        ring: &RingHandle,
        index: &IndexSet,
        entries: impl IntoIterator<Item = (usize, RingElem)>,
    ) -> Result<Self> {
        let mut v = FinVec::zero(ring, index);
        for (pos, e) in entries {
            if e.owner() != ring {
                return Err(Error::RingMismatch);
            }
            if pos >= index.len() {
                return Err(Error::IndexOutOfRange {
                    index: pos,
                    arity: index.len(),
                });
            }
            let sum = v.get(pos).add(&e)?;
            v.set(pos, sum);
        }
        Ok(v)
    }

    pub fn ring(&self) -> &RingHandle {
        &self.ring
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }

    pub fn get(&self, pos: usize) -> RingElem {
        self.entries
            .get(&pos)
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    pub fn set(&mut self, pos: usize, e: RingElem) {
        assert!(pos < self.index.len());
        if e.is_zero() {
            self.entries.remove(&pos);
        } else {
            self.entries.insert(pos, e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &RingElem)> {
        self.entries.iter().map(|(&p, e)| (p, e))
    }

    fn check_compatible(&self, other: &FinVec) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        if self.index != other.index {
            return Err(Error::IndexMismatch("vector index sets differ".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &FinVec) -> Result<FinVec> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (pos, e) in &other.entries {
            let sum = out.get(*pos).add(e)?;
            out.set(*pos, sum);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FinVec) -> Result<FinVec> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (pos, e) in &other.entries {
            let diff = out.get(*pos).sub(e)?;
            out.set(*pos, diff);
        }
        Ok(out)
    }

    /// Scalar multiplication by a ring element.
    pub fn scale(&self, c: &RingElem) -> Result<FinVec> {
        if c.owner() != &self.ring {
            return Err(Error::RingMismatch);
        }
        let mut out = FinVec::zero(&self.ring, &self.index);
        for (pos, e) in &self.entries {
            out.set(*pos, c.mul(e)?);
        }
        Ok(out)
    }

    pub fn scale_fp(&self, c: u8) -> FinVec {
        let mut out = FinVec::zero(&self.ring, &self.index);
        for (pos, e) in &self.entries {
            out.set(*pos, e.scale_fp(c));
        }
        out
    }

    /// Applies a ring map to every entry, producing a vector over its target.
    pub fn map_entries(&self, hom: &RingHom) -> Result<FinVec> {
        let mut out = FinVec::zero(hom.target(), &self.index);
        for (pos, e) in &self.entries {
            out.set(*pos, hom.apply(e)?);
        }
        Ok(out)
    }

    /// Dense representation over the F_p basis, position-major.
    pub fn to_fp_vec(&self) -> Vec<u8> {
        let dim = self.ring.dim().expect("finite handle required");
        let mut v = vec![0u8; self.index.len() * dim];
        for (pos, e) in &self.entries {
            for (i, c) in e.basis_pairs() {
                v[pos * dim + i as usize] = c;
            }
        }
        v
    }

    pub fn from_fp_vec(ring: &RingHandle, index: &IndexSet, v: &[u8]) -> FinVec {
        let dim = ring.dim().expect("finite handle required");
        assert_eq!(v.len(), index.len() * dim);
        let mut out = FinVec::zero(ring, index);
        for pos in 0..index.len() {
            let slice = &v[pos * dim..(pos + 1) * dim];
            let e = RingElem::from_fp_col(ring, slice);
            if !e.is_zero() {
                out.set(pos, e);
            }
        }
        out
    }
}

/// An R-linear map between free modules, stored as one column per source
/// position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinMap {
    ring: RingHandle,
    source: IndexSet,
    target: IndexSet,
    columns: Vec<FinVec>,
}

impl LinMap {
    pub fn from_columns(
        ring: &RingHandle,
        source: &IndexSet,
        target: &IndexSet,
        columns: Vec<FinVec>,
    ) -> Result<Self> {
        if columns.len() != source.len() {
            return Err(Error::IndexMismatch(format!(
                "expected {} columns, got {}",
                source.len(),
                columns.len()
            )));
        }
        for c in &columns {
            if c.ring() != ring {
                return Err(Error::RingMismatch);
            }
            if c.index() != target {
                return Err(Error::IndexMismatch("column over wrong target".into()));
            }
        }
        Ok(LinMap {
            ring: ring.clone(),
            source: source.clone(),
            target: target.clone(),
            columns,
        })
    }

    pub fn identity(ring: &RingHandle, index: &IndexSet) -> Self {
        let columns = (0..index.len())
            .map(|i| FinVec::delta(ring, index, i))
            .collect();
        LinMap {
            ring: ring.clone(),
            source: index.clone(),
            target: index.clone(),
            columns,
        }
    }

    pub fn zero_map(ring: &RingHandle, source: &IndexSet, target: &IndexSet) -> Self {
        let columns = (0..source.len())
            .map(|_| FinVec::zero(ring, target))
            .collect();
        LinMap {
            ring: ring.clone(),
            source: source.clone(),
            target: target.clone(),
            columns,
        }
    }

    pub fn ring(&self) -> &RingHandle {
        &self.ring
    }

    pub fn source(&self) -> &IndexSet {
        &self.source
    }

    pub fn target(&self) -> &IndexSet {
        &self.target
    }

    pub fn column(&self, pos: usize) -> &FinVec {
        &self.columns[pos]
    }

    pub fn columns(&self) -> &[FinVec] {
        &self.columns
    }

    pub fn apply(&self, v: &FinVec) -> Result<FinVec> {
        if v.index() != &self.source {
            return Err(Error::IndexMismatch("vector not over the source".into()));
        }
        let mut out = FinVec::zero(&self.ring, &self.target);
        for (pos, c) in v.iter() {
            out = out.add(&self.columns[pos].scale(c)?)?;
        }
        Ok(out)
    }

    /// `outer . inner` (apply `inner` first).
    pub fn compose(outer: &LinMap, inner: &LinMap) -> Result<LinMap> {
        if outer.source != inner.target {
            return Err(Error::IndexMismatch(
                "composition: inner target != outer source".into(),
            ));
        }
        let columns = inner
            .columns
            .iter()
            .map(|c| outer.apply(c))
            .collect::<Result<_>>()?;
        LinMap::from_columns(&outer.ring, &inner.source, &outer.target, columns)
    }

    /// Applies a ring map to every matrix entry (base change along it).
    pub fn map_entries(&self, hom: &RingHom) -> Result<LinMap> {
        let columns = self
            .columns
            .iter()
            .map(|c| c.map_entries(hom))
            .collect::<Result<_>>()?;
        LinMap::from_columns(hom.target(), &self.source, &self.target, columns)
    }

    /// The map as a dense F_p matrix by restriction of scalars.
    pub fn fp_matrix(&self) -> Result<FpMat> {
        let dim = self.ring.dim().ok_or(Error::InfiniteDimensional)?;
        let rows = self.target.len() * dim;
        let cols = self.source.len() * dim;
        let mut m = FpMat::zeros(self.ring.modulus(), rows, cols);
        for (s, col) in self.columns.iter().enumerate() {
            for (t, e) in col.iter() {
                let block = mul_matrix(&self.ring, e);
                for i in 0..dim {
                    for j in 0..dim {
                        let v = block.get(i, j);
                        if v != 0 {
                            m.set(t * dim + i, s * dim + j, v);
                        }
                    }
                }
            }
        }
        Ok(m)
    }
}

/// The map `1_s -> 1 (+) psi(s)·1_s` from the free module on `s` to
/// `R (+) ⊕_S R`; the degree-0 slot is block 0 of the target union.
pub fn psi_map(ring: &RingHandle, s: &IndexSet, psi: &[RingElem]) -> Result<LinMap> {
    psi_n_map(ring, std::slice::from_ref(s), 0, psi)
}

/// The i-th augmented map on a product of index sets: the column at a tuple
/// `s` is `1` at the projected tuple (coordinate `i` dropped) plus
/// `psi_i(s_i)` at `s` itself. Indices are 0-based.
pub fn psi_n_map(
    ring: &RingHandle,
    sets: &[IndexSet],
    i: usize,
    psi_i: &[RingElem],
) -> Result<LinMap> {
    let n = sets.len();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, arity: n });
    }
    if psi_i.len() != sets[i].len() {
        return Err(Error::IndexMismatch(format!(
            "psi has {} values for a set of size {}",
            psi_i.len(),
            sets[i].len()
        )));
    }
    for e in psi_i {
        if e.owner() != ring {
            return Err(Error::RingMismatch);
        }
    }
    let source = IndexSet::product(sets.to_vec());
    let others: Vec<IndexSet> = sets
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, s)| s.clone())
        .collect();
    let projected = IndexSet::product(others);
    let target = IndexSet::union(vec![projected.clone(), source.clone()]);
    let mut columns = Vec::with_capacity(source.len());
    for pos in 0..source.len() {
        let coords = if n == 1 {
            vec![pos]
        } else {
            source.decode_product(pos)
        };
        let proj_pos = if n == 1 {
            0 // the empty product has a single point
        } else {
            let mut pc = coords.clone();
            pc.remove(i);
            if pc.len() == 1 {
                pc[0]
            } else {
                projected.encode_product(&pc)
            }
        };
        let mut col = FinVec::zero(ring, &target);
        col.set(target.encode_union(0, proj_pos), ring.one());
        let si = coords[i];
        let value = psi_i[si].clone();
        if !value.is_zero() {
            col.set(target.encode_union(1, pos), value);
        }
        columns.push(col);
    }
    LinMap::from_columns(ring, &source, &target, columns)
}

/// Result of an exact kernel computation over F_p. The kernel of an R-linear
/// map is an R-submodule; it vanishes iff the F_p kernel does, so the basis
/// returned here decides injectivity over R.
#[derive(Debug, Clone)]
pub struct KernelReport {
    pub basis: Vec<FinVec>,
    pub injective: bool,
}

pub fn kernel(f: &LinMap) -> Result<KernelReport> {
    let m = f.fp_matrix()?;
    let solver = FpSolver::new(&m, None);
    let basis: Vec<FinVec> = solver
        .kernel_basis()
        .iter()
        .map(|v| FinVec::from_fp_vec(f.ring(), f.source(), v))
        .collect();
    Ok(KernelReport {
        injective: basis.is_empty(),
        basis,
    })
}

/// Brute-force injectivity check: applies `f` to every source vector.
/// Only valid when `|R|^{|S|}` is within the exhaustion cap.
pub fn exhaustive_injectivity(f: &LinMap) -> Result<bool> {
    let dim = f.ring().dim().ok_or(Error::InfiniteDimensional)?;
    let total = (f.ring().p() as u128)
        .checked_pow((dim * f.source().len()) as u32)
        .filter(|t| *t <= KERNEL_EXHAUST);
    if total.is_none() {
        return Err(Error::CapExceeded(format!(
            "exhaustive injectivity over {} source vectors",
            f.source().len()
        )));
    }
    let n = f.source().len() * dim;
    let p = f.ring().p() as u8;
    let mut counter = vec![0u8; n];
    loop {
        let v = FinVec::from_fp_vec(f.ring(), f.source(), &counter);
        if !v.is_zero() && f.apply(&v)?.is_zero() {
            return Ok(false);
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(true);
            }
            counter[i] += 1;
            if counter[i] < p {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
}

/// A cokernel presentation: generators are `(target position, basis element)`
/// pairs, relations are the columns of the map over F_p.
#[derive(Debug, Clone)]
pub struct PresentedModule {
    pub ring: RingHandle,
    pub generators: IndexSet,
    pub relations: FpMat,
    pub fp_rank: usize,
}

pub fn coker_presentation(f: &LinMap) -> Result<PresentedModule> {
    let m = f.fp_matrix()?;
    let rank = m.rank();
    let dim = f.ring().dim().unwrap();
    Ok(PresentedModule {
        ring: f.ring().clone(),
        generators: f.target().clone(),
        fp_rank: f.target().len() * dim - rank,
        relations: m,
    })
}

/// Kernel restricted to a total-degree slice of a free polynomial ring.
/// Vectors whose entries have degree <= `max_degree` are checked; the map may
/// raise degrees, so the target slice is padded by the largest column degree.
#[derive(Debug, Clone)]
pub struct SliceKernelReport {
    pub max_degree: usize,
    pub injective_on_slice: bool,
    pub witness: Option<FinVec>,
}

pub fn kernel_poly_slice(f: &LinMap, max_degree: usize) -> Result<SliceKernelReport> {
    let ring = f.ring();
    let vars = ring
        .poly_vars()
        .ok_or_else(|| Error::Unsupported("slice kernels need a polynomial ring".into()))?;
    let nvars = vars.len();
    let col_degree = f
        .columns()
        .iter()
        .flat_map(|c| c.iter().map(|(_, e)| poly_total_degree(e)))
        .max()
        .unwrap_or(0);
    let src_monos = monomials_up_to(nvars, max_degree);
    let tgt_monos = monomials_up_to(nvars, max_degree + col_degree);
    let tgt_index: BTreeMap<Vec<u16>, usize> = tgt_monos
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    let p = ring.modulus();
    let rows = f.target().len() * tgt_monos.len();
    let cols = f.source().len() * src_monos.len();
    let mut mat = FpMat::zeros(p, rows, cols);
    for (s, col) in f.columns().iter().enumerate() {
        for (mi, mono) in src_monos.iter().enumerate() {
            // image of mono * 1_s
            for (t, e) in col.iter() {
                for (expo, c) in e.poly_terms() {
                    let sum: Vec<u16> = expo.iter().zip(mono).map(|(a, b)| a + b).collect();
                    let row = t * tgt_monos.len() + tgt_index[&sum];
                    let v = p.add(mat.get(row, s * src_monos.len() + mi), c);
                    mat.set(row, s * src_monos.len() + mi, v);
                }
            }
        }
    }
    let solver = FpSolver::new(&mat, None);
    let kernel = solver.kernel_basis();
    let witness = kernel.first().map(|v| {
        let mut w = FinVec::zero(ring, f.source());
        for (s, chunk) in v.chunks(src_monos.len()).enumerate() {
            let terms: Vec<(Vec<u16>, u8)> = chunk
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(mi, &c)| (src_monos[mi].clone(), c))
                .collect();
            if !terms.is_empty() {
                w.set(s, ring.poly_elem(terms).unwrap());
            }
        }
        w
    });
    Ok(SliceKernelReport {
        max_degree,
        injective_on_slice: witness.is_none(),
        witness,
    })
}

fn poly_total_degree(e: &RingElem) -> usize {
    e.poly_terms()
        .iter()
        .map(|(expo, _)| expo.iter().map(|&x| x as usize).sum())
        .max()
        .unwrap_or(0)
}

fn monomials_up_to(nvars: usize, d: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; nvars];
    fn rec(cur: &mut Vec<u16>, var: usize, left: usize, out: &mut Vec<Vec<u16>>) {
        if var == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[var] = e as u16;
            rec(cur, var + 1, left - e, out);
        }
        cur[var] = 0;
    }
    rec(&mut cur, 0, d, &mut out);
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{idempotent_family, make_ring, RingDescriptor};

    fn product_fp(p: u32, m: usize) -> RingHandle {
        make_ring(&RingDescriptor::ProductFp { p, m }).unwrap()
    }

    #[test]
    fn psi_map_unit_column() {
        let r = product_fp(2, 1);
        let s = IndexSet::atoms(["a"]).unwrap();
        let f = psi_map(&r, &s, &[r.one()]).unwrap();
        assert_eq!(f.target().len(), 2);
        let col = f.column(0);
        assert_eq!(col.get(0), r.one());
        assert_eq!(col.get(1), r.one());
        assert!(kernel(&f).unwrap().injective);
    }

    #[test]
    fn psi_map_idempotent_kernel_empty() {
        // the orthogonal idempotent construction is injective; cross-checked
        // exhaustively over all 16 source pairs
        let r = product_fp(2, 2);
        let s = IndexSet::atoms(["s1", "s2"]).unwrap();
        let fam = idempotent_family(&r).unwrap();
        let psi: Vec<RingElem> = fam.iter().map(|e| r.one().sub(e).unwrap()).collect();
        let f = psi_map(&r, &s, &psi).unwrap();
        let k = kernel(&f).unwrap();
        assert!(k.injective);
        assert!(exhaustive_injectivity(&f).unwrap());
    }

    #[test]
    fn zero_map_kernel_spans_the_source() {
        // the zero map on one generator over F_2 has kernel of F_p-dimension
        // dim(R) = 1
        let r = product_fp(2, 1);
        let s = IndexSet::atoms(["a"]).unwrap();
        let z = LinMap::zero_map(&r, &s, &s);
        let k = kernel(&z).unwrap();
        assert_eq!(k.basis.len(), 1);
        assert!(!k.injective);
    }

    #[test]
    fn psi_map_zero_columns_share_kernel_vector() {
        let r = product_fp(2, 1);
        let s = IndexSet::atoms(["a", "b"]).unwrap();
        let f = psi_map(&r, &s, &[r.zero(), r.zero()]).unwrap();
        let k = kernel(&f).unwrap();
        assert!(!k.injective);
        // 1_a - 1_b is in the kernel
        let mut v = FinVec::delta(&r, &s, 0);
        v = v.sub(&FinVec::delta(&r, &s, 1)).unwrap();
        assert!(f.apply(&v).unwrap().is_zero());
        assert!(!exhaustive_injectivity(&f).unwrap());
    }

    #[test]
    fn psi_n_map_reduces_to_psi_map() {
        let r = product_fp(3, 2);
        let s = IndexSet::atoms(["a", "b"]).unwrap();
        let fam = idempotent_family(&r).unwrap();
        let psi: Vec<RingElem> = fam.iter().map(|e| r.one().sub(e).unwrap()).collect();
        let a = psi_map(&r, &s, &psi).unwrap();
        let b = psi_n_map(&r, std::slice::from_ref(&s), 0, &psi).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn psi_n_map_column_shape() {
        // n=2, S_1 = S_2 = {1,2}, i=0: the column at (1,2) hits the projected
        // tuple (2) and the full tuple (1,2)
        let r = product_fp(2, 1);
        let s = IndexSet::atoms(["1", "2"]).unwrap();
        let psi = vec![r.one(), r.one()];
        let f = psi_n_map(&r, &[s.clone(), s.clone()], 0, &psi).unwrap();
        assert_eq!(f.source().len(), 4);
        assert_eq!(f.target().len(), 2 + 4);
        let pos = f.source().encode_product(&[0, 1]); // (1,2)
        let col = f.column(pos);
        assert_eq!(col.support(), vec![
            f.target().encode_union(0, 1),
            f.target().encode_union(1, pos),
        ]);
    }

    #[test]
    fn compose_and_identity() {
        let r = product_fp(2, 2);
        let s = IndexSet::atoms(["a", "b"]).unwrap();
        let id = LinMap::identity(&r, &s);
        let fam = idempotent_family(&r).unwrap();
        let psi: Vec<RingElem> = fam.iter().map(|e| r.one().sub(e).unwrap()).collect();
        let f = psi_map(&r, &s, &psi).unwrap();
        assert_eq!(LinMap::compose(&f, &id).unwrap(), f);
        assert!(kernel(&LinMap::identity(&r, &s)).unwrap().injective);
    }

    #[test]
    fn coker_ranks() {
        let r = product_fp(2, 1);
        let s = IndexSet::atoms(["a"]).unwrap();
        // identity has zero cokernel
        let id = LinMap::identity(&r, &s);
        assert_eq!(coker_presentation(&id).unwrap().fp_rank, 0);
        // zero map ⊕_S R -> R has cokernel R
        let z = LinMap::zero_map(&r, &s, &IndexSet::point());
        assert_eq!(coker_presentation(&z).unwrap().fp_rank, 1);
        // psi over F_2 with psi(a) = 1: target rank 2, image rank 1
        let f = psi_map(&r, &s, &[r.one()]).unwrap();
        assert_eq!(coker_presentation(&f).unwrap().fp_rank, 1);
    }

    #[test]
    fn poly_slice_injectivity() {
        // psi(a) = x - a over F_2[x] is injective on every degree slice
        let r = make_ring(&RingDescriptor::PolyRing {
            p: 2,
            vars: vec!["x".into()],
        })
        .unwrap();
        let s = IndexSet::atoms(["0", "1"]).unwrap();
        let x = r.poly_var(0).unwrap();
        let psi = vec![x.clone(), x.add(&r.one()).unwrap()];
        let f = psi_map(&r, &s, &psi).unwrap();
        let rep = kernel_poly_slice(&f, 8).unwrap();
        assert!(rep.injective_on_slice);

        // a degenerate poly map with a kernel is caught on the slice
        let g = psi_map(&r, &s, &[r.zero(), r.zero()]).unwrap();
        let rep = kernel_poly_slice(&g, 4).unwrap();
        assert!(!rep.injective_on_slice);
        let w = rep.witness.unwrap();
        assert!(g.apply(&w).unwrap().is_zero());
    }

    #[test]
    fn base_change_compatibility() {
        // applying a coordinate projection entrywise to psi_map equals
        // psi_map of the projected values; every projection, m <= 4,
        // |S| <= 4, idempotent and sampled psi alike
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        for p in [2u32, 3] {
            let fp1 = product_fp(p, 1);
            for m in 1..=4usize {
                let r = product_fp(p, m);
                let mut rng = ChaCha8Rng::seed_from_u64(m as u64 * 7 + p as u64);
                for s_len in 1..=4usize {
                    let s = IndexSet::numbered(s_len);
                    let fam = idempotent_family(&r).unwrap();
                    let idem_psi: Vec<RingElem> = (0..s_len)
                        .map(|i| r.one().sub(&fam[i % m]).unwrap())
                        .collect();
                    let sampled: Vec<RingElem> =
                        (0..s_len).map(|_| r.random_elem(&mut rng)).collect();
                    for psi in [idem_psi, sampled] {
                        let f = psi_map(&r, &s, &psi).unwrap();
                        for coord in 0..m as u32 {
                            let images: Vec<RingElem> = (0..m as u32)
                                .map(|i| if i == coord { fp1.one() } else { fp1.zero() })
                                .collect();
                            let proj =
                                RingHom::from_basis_images(r.clone(), fp1.clone(), images)
                                    .unwrap();
                            assert!(proj.verify_hom().unwrap());
                            let lhs = f.map_entries(&proj).unwrap();
                            let projected: Vec<RingElem> =
                                psi.iter().map(|e| proj.apply(e).unwrap()).collect();
                            assert_eq!(lhs, psi_map(&fp1, &s, &projected).unwrap());
                        }
                    }
                }
            }
        }
    }
}
