//! The obstruction-diagram machinery: deciding left inverses of module maps,
//! two-term tensor complexes, and the lifting problem `r ∘ F = E` against the
//! group-ring embedding. A solution decomposes into components `{f_i, g_i}`
//! satisfying one equation per tuple, and its coverage report records where
//! the extracted `f`-supports hit the tuple space.
//!
//! Everything here is exact: witnesses verify bit-exactly, "no" answers carry
//! replayable inconsistency certificates, and the elimination pivot order can
//! be varied by seed to diversify returned witnesses.

use crate::error::{Error, Result};
use crate::group_ring::{gr_make, GroupRing};
use crate::index::IndexSet;
use crate::indivisibility::IndivSpec;
use crate::modules::{FinVec, LinMap};
use crate::ring::RingElem;
use crate::solver::{RingInfeas, RingSystem};

/// Encode a coordinate tuple as a position, tolerating the degenerate point
/// and single-factor cases that `IndexSet::product` normalizes away.
pub(crate) fn encode_tuple(index: &IndexSet, coords: &[usize]) -> usize {
    match coords.len() {
        0 => 0,
        1 => coords[0],
        _ => index.encode_product(coords),
    }
}

pub(crate) fn decode_tuple(index: &IndexSet, n: usize, pos: usize) -> Vec<usize> {
    match n {
        1 => vec![pos],
        _ => index.decode_product(pos),
    }
}

/// Outcome of searching for an R-linear left inverse.
#[derive(Debug, Clone)]
pub struct LeftInverseOutcome {
    pub inverse: Option<LinMap>,
    pub infeasibility: Option<RingInfeas>,
}

/// Finds `r` with `r ∘ f = id`, or an inconsistency certificate.
///
/// The unknown entries of `r` are ring elements acting by multiplication, so
/// R-linearity is built into the parameterization; plain F_p unknowns would
/// admit non-R-linear solutions.
pub fn left_inverse(f: &LinMap, seed: Option<u64>) -> Result<LeftInverseOutcome> {
    let ring = f.ring();
    let src = f.source();
    let tgt = f.target();
    // one system per source row of r, all sharing the coefficient matrix
    let mut sys = RingSystem::new(ring, src.len(), tgt.len());
    for a_prime in 0..src.len() {
        for (b, c) in f.column(a_prime).iter() {
            sys.push(a_prime, b, c.clone())?;
        }
    }
    let solver = sys.factor(seed)?;
    let mut rows: Vec<Vec<RingElem>> = Vec::with_capacity(src.len());
    for a in 0..src.len() {
        let rhs: Vec<RingElem> = (0..src.len())
            .map(|a_prime| if a == a_prime { ring.one() } else { ring.zero() })
            .collect();
        match solver.solve(&rhs)? {
            Ok(x) => rows.push(x),
            Err(cert) => {
                return Ok(LeftInverseOutcome {
                    inverse: None,
                    infeasibility: Some(cert),
                })
            }
        }
    }
    let mut columns = Vec::with_capacity(tgt.len());
    for b in 0..tgt.len() {
        let mut col = FinVec::zero(ring, src);
        for (a, row) in rows.iter().enumerate() {
            col.set(a, row[b].clone());
        }
        columns.push(col);
    }
    let r = LinMap::from_columns(ring, tgt, src, columns)?;
    let composed = LinMap::compose(&r, f)?;
    if composed != LinMap::identity(ring, src) {
        return Err(Error::ConstructionFailure(
            "solved left inverse failed exact re-verification".into(),
        ));
    }
    Ok(LeftInverseOutcome {
        inverse: Some(r),
        infeasibility: None,
    })
}

/// The two-term tensor complex of a pair of maps: the column at `(u, v)` is
/// `d1(u) ⊗ v` in the first block plus `u ⊗ d2(v)` in the second.
pub fn tensor_two_term(d1: &LinMap, d2: &LinMap) -> Result<LinMap> {
    if d1.ring() != d2.ring() {
        return Err(Error::RingMismatch);
    }
    let ring = d1.ring();
    let source = IndexSet::product(vec![d1.source().clone(), d2.source().clone()]);
    let block_a = IndexSet::product(vec![d1.target().clone(), d2.source().clone()]);
    let block_b = IndexSet::product(vec![d1.source().clone(), d2.target().clone()]);
    let target = IndexSet::union(vec![block_a.clone(), block_b.clone()]);
    let mut columns = Vec::with_capacity(source.len());
    for pos in 0..source.len() {
        let [u, v] = source.decode_product(pos)[..] else {
            unreachable!()
        };
        let mut col = FinVec::zero(ring, &target);
        for (w, c) in d1.column(u).iter() {
            col.set(
                target.encode_union(0, block_a.encode_product(&[w, v])),
                c.clone(),
            );
        }
        for (w, c) in d2.column(v).iter() {
            let slot = target.encode_union(1, block_b.encode_product(&[u, w]));
            let prev = col.get(slot);
            col.set(slot, prev.add(c)?);
        }
        columns.push(col);
    }
    LinMap::from_columns(ring, &source, &target, columns)
}

/// The lifting problem of an indivisible-sequence candidate: the bottom map
/// `F = ⊕_i psi_n_map(i)` out of the free module on the tuple space, against
/// the left map `E` embedding each tuple as the subset with one member per
/// block of the tagged union.
#[derive(Debug, Clone)]
pub struct ObstructionDiagram {
    spec: IndivSpec,
    union: IndexSet,
    product: IndexSet,
    gring: GroupRing,
    module_index: IndexSet,
    w_index: IndexSet,
    projected: Vec<IndexSet>,
    f_map: LinMap,
    e_map: LinMap,
    block_offsets: Vec<usize>,
}

impl ObstructionDiagram {
    pub fn spec(&self) -> &IndivSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn product(&self) -> &IndexSet {
        &self.product
    }

    pub fn union(&self) -> &IndexSet {
        &self.union
    }

    pub fn group_ring(&self) -> &GroupRing {
        &self.gring
    }

    /// Free-module index of the group ring (subsets of the union).
    pub fn module_index(&self) -> &IndexSet {
        &self.module_index
    }

    pub fn f_map(&self) -> &LinMap {
        &self.f_map
    }

    pub fn e_map(&self) -> &LinMap {
        &self.e_map
    }

    /// Replace the embedding map (test hook for non-image targets).
    pub fn with_e_map(mut self, e: LinMap) -> Result<Self> {
        if e.source() != self.e_map.source() || e.target() != self.e_map.target() {
            return Err(Error::IndexMismatch("replacement E has wrong shape".into()));
        }
        self.e_map = e;
        Ok(self)
    }

    /// The subset mask embedding a tuple: one member per union block.
    pub fn tuple_mask(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .enumerate()
            .map(|(i, &c)| 1usize << (self.block_offsets[i] + c))
            .sum()
    }

    pub fn tuple_coords(&self, pos: usize) -> Vec<usize> {
        decode_tuple(&self.product, self.n(), pos)
    }

    fn proj_pos(&self, i: usize, coords: &[usize]) -> usize {
        let mut pc = coords.to_vec();
        pc.remove(i);
        encode_tuple(&self.projected[i], &pc)
    }

    /// W position of the f-unknown `(i, s')`.
    pub fn f_slot(&self, i: usize, proj_pos: usize) -> usize {
        self.w_index.encode_union(2 * i, proj_pos)
    }

    /// W position of the g-unknown `(i, s)`.
    pub fn g_slot(&self, i: usize, tuple_pos: usize) -> usize {
        self.w_index.encode_union(2 * i + 1, tuple_pos)
    }

    pub fn projected_sets(&self) -> &[IndexSet] {
        &self.projected
    }
}

/// Builds the diagram for a candidate sequence.
pub fn build_obstruction(spec: &IndivSpec) -> Result<ObstructionDiagram> {
    let ring = spec.ring().clone();
    let n = spec.n();
    let sets: Vec<IndexSet> = spec.entries().iter().map(|e| e.index.clone()).collect();
    let union = IndexSet::union(sets.clone());
    let product = IndexSet::product(sets.clone());
    let gring = gr_make(&ring, &union)?;
    let module_index = gring.module_index();
    let mut block_offsets = Vec::with_capacity(n);
    let mut off = 0;
    for s in &sets {
        block_offsets.push(off);
        off += s.len();
    }
    let mut projected = Vec::with_capacity(n);
    let mut w_blocks = Vec::with_capacity(2 * n);
    for i in 0..n {
        let others: Vec<IndexSet> = sets
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, s)| s.clone())
            .collect();
        let p = IndexSet::product(others);
        projected.push(p.clone());
        w_blocks.push(p);
        w_blocks.push(product.clone());
    }
    let w_index = IndexSet::union(w_blocks);

    let mut f_columns = Vec::with_capacity(product.len());
    let mut e_columns = Vec::with_capacity(product.len());
    for pos in 0..product.len() {
        let coords = decode_tuple(&product, n, pos);
        let mut fcol = FinVec::zero(&ring, &w_index);
        for i in 0..n {
            let mut pc = coords.clone();
            pc.remove(i);
            let proj = encode_tuple(&projected[i], &pc);
            fcol.set(w_index.encode_union(2 * i, proj), ring.one());
            let value = spec.entries()[i].psi[coords[i]].clone();
            if !value.is_zero() {
                fcol.set(w_index.encode_union(2 * i + 1, pos), value);
            }
        }
        f_columns.push(fcol);

        let mask: usize = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| 1usize << (block_offsets[i] + c))
            .sum();
        let mut ecol = FinVec::zero(&ring, &module_index);
        ecol.set(mask, ring.one());
        e_columns.push(ecol);
    }
    let f_map = LinMap::from_columns(&ring, &product, &w_index, f_columns)?;
    let e_map = LinMap::from_columns(&ring, &product, &module_index, e_columns)?;
    Ok(ObstructionDiagram {
        spec: spec.clone(),
        union,
        product,
        gring,
        module_index,
        w_index,
        projected,
        f_map,
        e_map,
        block_offsets,
    })
}

/// A candidate extension `r` with `r ∘ F = E`, decomposed into the components
/// `f_i` (indexed by projected tuples) and `g_i` (indexed by full tuples).
#[derive(Debug, Clone)]
pub struct SplitWitness {
    pub r: LinMap,
    /// Number of mismatching entries of `r ∘ F - E`; a valid witness has 0.
    pub residual: usize,
}

impl SplitWitness {
    pub fn f_component(&self, d: &ObstructionDiagram, i: usize, proj_pos: usize) -> FinVec {
        self.r.column(d.f_slot(i, proj_pos)).clone()
    }

    pub fn g_component(&self, d: &ObstructionDiagram, i: usize, tuple_pos: usize) -> FinVec {
        self.r.column(d.g_slot(i, tuple_pos)).clone()
    }
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Split(SplitWitness),
    NoSplit(RingInfeas),
}

impl SolveOutcome {
    pub fn witness(&self) -> Option<&SplitWitness> {
        match self {
            SolveOutcome::Split(w) => Some(w),
            SolveOutcome::NoSplit(_) => None,
        }
    }
}

/// Solves `r ∘ F = E` for an R-linear `r`.
///
/// The unknowns are module elements of the group ring; since that module is
/// free over R with the subsets as basis, the system decouples into one
/// R-valued block per subset, all sharing one coefficient matrix. Blocks
/// whose right-hand side is zero have the zero solution, so only masks in the
/// image of `E` are solved explicitly.
pub fn solve_obstruction(d: &ObstructionDiagram, seed: Option<u64>) -> Result<SolveOutcome> {
    let ring = d.spec.ring();
    let n = d.n();
    let n_tuples = d.product.len();
    let mut sys = RingSystem::new(ring, n_tuples, d.w_index.len());
    for pos in 0..n_tuples {
        let coords = d.tuple_coords(pos);
        for i in 0..n {
            sys.push(pos, d.f_slot(i, d.proj_pos(i, &coords)), ring.one())?;
            let value = d.spec.entries()[i].psi[coords[i]].clone();
            sys.push(pos, d.g_slot(i, pos), value)?;
        }
    }
    let solver = sys.factor(seed)?;

    // per-subset solutions; untouched masks stay zero
    let mut per_mask: Vec<Option<Vec<RingElem>>> = vec![None; d.module_index.len()];
    for pos in 0..n_tuples {
        let mask = d.tuple_mask(&d.tuple_coords(pos));
        if per_mask[mask].is_some() {
            continue;
        }
        let rhs: Vec<RingElem> = d.e_map.columns().iter().map(|c| c.get(mask)).collect();
        match solver.solve(&rhs)? {
            Ok(x) => per_mask[mask] = Some(x),
            Err(cert) => return Ok(SolveOutcome::NoSplit(cert)),
        }
    }

    let mut columns = Vec::with_capacity(d.w_index.len());
    for u in 0..d.w_index.len() {
        let mut col = FinVec::zero(ring, &d.module_index);
        for (mask, sol) in per_mask.iter().enumerate() {
            if let Some(x) = sol {
                col.set(mask, x[u].clone());
            }
        }
        columns.push(col);
    }
    let r = LinMap::from_columns(ring, &d.w_index, &d.module_index, columns)?;
    let residual = diagram_residual(d, &r)?;
    if residual != 0 {
        return Err(Error::ConstructionFailure(
            "solver produced a witness that fails r∘F = E".into(),
        ));
    }
    Ok(SolveOutcome::Split(SplitWitness { r, residual }))
}

/// Number of entries where `r ∘ F` differs from `E`.
pub fn diagram_residual(d: &ObstructionDiagram, r: &LinMap) -> Result<usize> {
    let composed = LinMap::compose(r, &d.f_map)?;
    let mut mismatches = 0;
    for pos in 0..d.product.len() {
        let diff = composed.column(pos).sub(d.e_map.column(pos))?;
        mismatches += diff.support().len();
    }
    Ok(mismatches)
}

/// Checks the per-tuple splitting equation at `t`:
/// `Σ_i f_i(p_i(t)) + Σ_i psi_i(t_i)·g_i(t)` must equal the product of the
/// degree-1 embeddings of the coordinates of `t`. The right-hand side is
/// evaluated by actual group-ring multiplication, independently of how the
/// embedding map was assembled.
pub fn verify_star(d: &ObstructionDiagram, w: &SplitWitness, t: usize) -> Result<bool> {
    let ring = d.spec.ring();
    let coords = d.tuple_coords(t);
    let mut lhs = FinVec::zero(ring, &d.module_index);
    for i in 0..d.n() {
        lhs = lhs.add(&w.f_component(d, i, d.proj_pos(i, &coords)))?;
        let value = &d.spec.entries()[i].psi[coords[i]];
        lhs = lhs.add(&w.g_component(d, i, t).scale(value)?)?;
    }
    let mut rhs_ring = d.gring.handle().one();
    for (i, &c) in coords.iter().enumerate() {
        let bit = d.union.encode_union(i, c);
        rhs_ring = rhs_ring.mul(&d.gring.indicator(1 << bit))?;
    }
    let rhs = d.gring.to_module_vec(&rhs_ring)?;
    Ok(lhs == rhs)
}

/// Coverage of the tuple space by the extracted f-supports.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    /// For each tuple position, the entries `i` whose extraction is nonzero
    /// at that tuple.
    pub per_tuple: Vec<Vec<usize>>,
    pub full_coverage: bool,
    /// Total extracted support over all `(i, s')`: at least one entry must
    /// cover each tuple, so a valid witness on a unit-ideal-free sequence has
    /// support cost >= the number of tuples.
    pub support_cost: usize,
}

pub fn coverage(d: &ObstructionDiagram, w: &SplitWitness) -> Result<CoverageReport> {
    let n = d.n();
    // extraction of every f-component, computed once
    let mut extracted: Vec<Vec<FinVec>> = Vec::with_capacity(n);
    let mut support_cost = 0usize;
    for i in 0..n {
        let mut per_proj = Vec::with_capacity(d.projected[i].len());
        for s in 0..d.projected[i].len() {
            let fv = w.f_component(d, i, s);
            let elem = d.gring.from_module_vec(&fv)?;
            let ex = d.gring.d_extract(n, &elem)?;
            support_cost += ex.support().len();
            per_proj.push(ex);
        }
        extracted.push(per_proj);
    }
    let mut per_tuple = Vec::with_capacity(d.product.len());
    let mut full = true;
    for t in 0..d.product.len() {
        let coords = d.tuple_coords(t);
        let covering: Vec<usize> = (0..n)
            .filter(|&i| !extracted[i][d.proj_pos(i, &coords)].get(t).is_zero())
            .collect();
        if covering.is_empty() {
            full = false;
        }
        per_tuple.push(covering);
    }
    Ok(CoverageReport {
        per_tuple,
        full_coverage: full,
        support_cost,
    })
}

/// Per-level outcome of the exponent sweep.
#[derive(Debug)]
pub struct LevelOutcome {
    pub m: usize,
    pub split: bool,
    pub witness: Option<SplitWitness>,
    pub infeasibility: Option<RingInfeas>,
}

#[derive(Debug)]
pub struct ExponentReport {
    /// Largest prefix length whose diagram has no splitting; 0 when every
    /// level splits.
    pub exponent: usize,
    pub levels: Vec<LevelOutcome>,
}

/// Sweeps the prefix diagrams of a sequence and reports the largest level
/// with no splitting, certifying every verdict.
pub fn exponent_estimate(spec: &IndivSpec, seed: Option<u64>) -> Result<ExponentReport> {
    let n = spec.n();
    let mut levels = Vec::with_capacity(n);
    let mut exponent = 0;
    for m in 1..=n {
        let prefix = spec.prefix(m)?;
        let d = build_obstruction(&prefix)?;
        match solve_obstruction(&d, seed)? {
            SolveOutcome::Split(w) => levels.push(LevelOutcome {
                m,
                split: true,
                witness: Some(w),
                infeasibility: None,
            }),
            SolveOutcome::NoSplit(cert) => {
                exponent = m;
                levels.push(LevelOutcome {
                    m,
                    split: false,
                    witness: None,
                    infeasibility: Some(cert),
                });
            }
        }
    }
    Ok(ExponentReport { exponent, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::IndexSet;
    use crate::indivisibility::{idempotent_example_spec, IndivSpec};
    use crate::modules::psi_map;
    use crate::ring::{make_ring, RingDescriptor, RingHandle};

    fn f2() -> RingHandle {
        make_ring(&RingDescriptor::ProductFp { p: 2, m: 1 }).unwrap()
    }

    fn product_fp(p: u32, m: usize) -> RingHandle {
        make_ring(&RingDescriptor::ProductFp { p, m }).unwrap()
    }

    #[test]
    fn left_inverse_identity_and_projection() {
        let r = f2();
        let s = IndexSet::atoms(["a"]).unwrap();
        let id = LinMap::identity(&r, &s);
        let out = left_inverse(&id, None).unwrap();
        assert_eq!(out.inverse.unwrap(), id);

        // 1 -> (1, 0): the retraction is projection to slot 0
        let t = IndexSet::atoms(["u", "v"]).unwrap();
        let mut col = FinVec::zero(&r, &t);
        col.set(0, r.one());
        let f = LinMap::from_columns(&r, &s, &t, vec![col]).unwrap();
        let out = left_inverse(&f, None).unwrap();
        let inv = out.inverse.unwrap();
        assert_eq!(LinMap::compose(&inv, &f).unwrap(), LinMap::identity(&r, &s));
    }

    #[test]
    fn zero_map_has_no_retraction() {
        let r = f2();
        let s = IndexSet::atoms(["a"]).unwrap();
        let f = LinMap::zero_map(&r, &s, &s);
        let out = left_inverse(&f, None).unwrap();
        assert!(out.inverse.is_none());
        assert!(out.infeasibility.is_some());
    }

    #[test]
    fn tensor_two_term_identity_columns() {
        let r = f2();
        let s = IndexSet::atoms(["a"]).unwrap();
        let id = LinMap::identity(&r, &s);
        let t = tensor_two_term(&id, &id).unwrap();
        assert_eq!(t.source().len(), 1);
        assert_eq!(t.target().len(), 2);
        let col = t.column(0);
        assert_eq!(col.support().len(), 2);
    }

    #[test]
    fn tensor_two_term_splits_when_one_factor_does() {
        // d1 split injective, d2 arbitrary: the complex retains a retraction
        let r = product_fp(2, 2);
        let spec = idempotent_example_spec(&r, None).unwrap();
        let e = &spec.entries()[0];
        let d1 = psi_map(&r, &e.index, &e.psi).unwrap();
        let d2 = LinMap::zero_map(&r, &e.index, &e.index);
        let t = tensor_two_term(&d1, &d2).unwrap();
        let out = left_inverse(&t, None).unwrap();
        assert!(out.inverse.is_some());
    }

    #[test]
    fn obstruction_shapes() {
        // n=2, |S_i|=2: source rank 4, target rank 2+4+2+4
        let r = product_fp(2, 2);
        let one_entry = idempotent_example_spec(&r, None).unwrap();
        let e = one_entry.entries()[0].clone();
        let spec = IndivSpec::new(r.clone(), vec![e.clone(), e]).unwrap();
        let d = build_obstruction(&spec).unwrap();
        assert_eq!(d.f_map().source().len(), 4);
        assert_eq!(d.f_map().target().len(), 12);
        assert_eq!(d.e_map().target().len(), 1 << 4);

        // n=1: F has columns (1, psi(s)) like psi_map, E embeds singletons
        let d1 = build_obstruction(&one_entry).unwrap();
        let pm = psi_map(&r, &one_entry.entries()[0].index, &one_entry.entries()[0].psi).unwrap();
        for pos in 0..2 {
            let col = d1.f_map().column(pos);
            let pcol = pm.column(pos);
            assert_eq!(col.get(d1.f_slot(0, 0)), pcol.get(0));
            assert_eq!(
                col.get(d1.g_slot(0, pos)),
                pcol.get(pm.target().encode_union(1, pos))
            );
            assert_eq!(
                d1.e_map().column(pos).support(),
                vec![1usize << pos]
            );
        }
    }

    #[test]
    fn solve_unit_psi_n1() {
        // R=F_2, S={a}, psi(a)=1: f + g(a) = 1_{{a}} is solvable
        let r = f2();
        let s = IndexSet::atoms(["a"]).unwrap();
        let spec = IndivSpec::new(r.clone(), vec![(s, vec![r.one()]).into()]).unwrap();
        let d = build_obstruction(&spec).unwrap();
        let out = solve_obstruction(&d, None).unwrap();
        let w = out.witness().expect("splits");
        assert_eq!(w.residual, 0);
        assert!(verify_star(&d, w, 0).unwrap());
    }

    #[test]
    fn stacked_psi_n_maps_are_injective() {
        // n=2 with the idempotent-complement psi's: the direct sum of the
        // two augmented maps has empty kernel
        let r = product_fp(2, 2);
        let one_entry = idempotent_example_spec(&r, None).unwrap();
        let e = one_entry.entries()[0].clone();
        let spec = IndivSpec::new(r, vec![e.clone(), e]).unwrap();
        let d = build_obstruction(&spec).unwrap();
        assert!(crate::modules::kernel(d.f_map()).unwrap().injective);
    }

    #[test]
    fn solve_idempotent_example_and_verify() {
        let r = product_fp(2, 2);
        let spec = idempotent_example_spec(&r, None).unwrap();
        let d = build_obstruction(&spec).unwrap();
        let out = solve_obstruction(&d, None).unwrap();
        let w = out.witness().expect("splits");
        for t in 0..d.product().len() {
            assert!(verify_star(&d, w, t).unwrap());
        }
        let cov = coverage(&d, w).unwrap();
        assert!(cov.full_coverage);
        assert!(cov.support_cost >= d.product().len());
    }

    #[test]
    fn degenerate_psi_zero_fails_to_split() {
        // psi ≡ 0 on two points: F's columns coincide but E's differ, so the
        // system is infeasible; the certificate replays
        let r = f2();
        let s = IndexSet::atoms(["a", "b"]).unwrap();
        let spec = IndivSpec::new(r.clone(), vec![(s, vec![r.zero(), r.zero()]).into()]).unwrap();
        let d = build_obstruction(&spec).unwrap();
        match solve_obstruction(&d, None).unwrap() {
            SolveOutcome::NoSplit(_) => {}
            SolveOutcome::Split(_) => panic!("degenerate diagram must not split"),
        }
        assert_eq!(exponent_estimate(&spec, None).unwrap().exponent, 1);
    }

    #[test]
    fn perturbed_witness_fails_star() {
        let r = product_fp(2, 2);
        let spec = idempotent_example_spec(&r, None).unwrap();
        let d = build_obstruction(&spec).unwrap();
        let out = solve_obstruction(&d, None).unwrap();
        let w = out.witness().unwrap().clone();
        // perturb g_0 at tuple 0 by 1_∅ where psi(0) != 0
        let t = 0usize;
        let slot = d.g_slot(0, t);
        let mut col = w.r.column(slot).clone();
        let bumped = col.get(0).add(&r.one()).unwrap();
        col.set(0, bumped);
        let mut cols: Vec<FinVec> = w.r.columns().to_vec();
        cols[slot] = col;
        let r2 = LinMap::from_columns(
            w.r.ring(),
            w.r.source(),
            w.r.target(),
            cols,
        )
        .unwrap();
        let w2 = SplitWitness {
            r: r2,
            residual: 0,
        };
        assert!(!verify_star(&d, &w2, t).unwrap());
    }

    #[test]
    fn trivial_witness_for_unit_psi() {
        // n=1, f=0, g(s)=1_{{s}}, psi(s)=1 satisfies the equation at every s
        let r = f2();
        let s = IndexSet::atoms(["a", "b"]).unwrap();
        let spec =
            IndivSpec::new(r.clone(), vec![(s, vec![r.one(), r.one()]).into()]).unwrap();
        let d = build_obstruction(&spec).unwrap();
        let mut cols = Vec::new();
        for u in 0..d.f_map().target().len() {
            cols.push(FinVec::zero(&r, d.module_index()));
            let _ = u;
        }
        for t in 0..2 {
            let mask = d.tuple_mask(&[t]);
            let mut col = FinVec::zero(&r, d.module_index());
            col.set(mask, r.one());
            cols[d.g_slot(0, t)] = col;
        }
        let rmap = LinMap::from_columns(&r, d.f_map().target(), d.module_index(), cols).unwrap();
        assert_eq!(diagram_residual(&d, &rmap).unwrap(), 0);
        let w = SplitWitness {
            r: rmap,
            residual: 0,
        };
        for t in 0..2 {
            assert!(verify_star(&d, &w, t).unwrap());
        }
        // a unit psi lets g carry the whole equation: empty coverage
        let cov = coverage(&d, &w).unwrap();
        assert!(!cov.full_coverage);
    }
}
