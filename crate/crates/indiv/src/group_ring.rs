//! The boolean group ring R{S}: the free R-module on the finite subsets of
//! S, with basis subsets multiplying by union. Comes with the degree-1
//! embedding of ⊕_S R, the coefficient extraction left inverse `d_extract`,
//! and the disjoint-union tensor decomposition.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::IndexSet;
use crate::modules::FinVec;
use crate::ring::{make_ring, RingDescriptor, RingElem, RingHandle, RingHom};

/// Wire form of one group-ring term: a sorted subset (by member label, in
/// index order) and the sparse base coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupElemTerm {
    pub subset: Vec<String>,
    pub coeff: Vec<(u32, u8)>,
}

/// A constructed group ring together with its base and index set.
///
/// Basis indices are `mask * dim(base) + base_index`, so the subset lattice
/// is ordered by bitmask value and union is bitwise or.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRing {
    handle: RingHandle,
    base: RingHandle,
    index: IndexSet,
}

/// Builds R{S}. The basis has `2^|S| * dim(R)` elements, so `|S|` is capped.
pub fn gr_make(base: &RingHandle, index: &IndexSet) -> Result<GroupRing> {
    let desc = RingDescriptor::GroupRing {
        base: Box::new(base.descriptor().clone()),
        index: index.clone(),
    };
    let handle = make_ring(&desc)?;
    Ok(GroupRing {
        handle,
        base: base.clone(),
        index: index.clone(),
    })
}

impl GroupRing {
    pub fn handle(&self) -> &RingHandle {
        &self.handle
    }

    pub fn base(&self) -> &RingHandle {
        &self.base
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }

    /// Rank of the free base-module, i.e. the number of subsets.
    pub fn rank(&self) -> usize {
        1 << self.index.len()
    }

    fn base_dim(&self) -> u32 {
        self.base.dim().expect("group ring base is finite") as u32
    }

    /// `c * 1_K` for a subset mask and base coefficient.
    pub fn term(&self, mask: usize, c: &RingElem) -> Result<RingElem> {
        if c.owner() != &self.base {
            return Err(Error::RingMismatch);
        }
        if mask >= self.rank() {
            return Err(Error::IndexOutOfRange {
                index: mask,
                arity: self.rank(),
            });
        }
        let bd = self.base_dim();
        Ok(self.handle.elem_from_pairs(
            c.basis_pairs()
                .into_iter()
                .map(|(i, v)| (mask as u32 * bd + i, v)),
        ))
    }

    /// The basis indicator `1_K` (coefficient 1 on the subset `mask`).
    pub fn indicator(&self, mask: usize) -> RingElem {
        self.term(mask, &self.base.one()).expect("mask in range")
    }

    /// Splits a ring element into its subset coefficients.
    pub fn coefficients(&self, x: &RingElem) -> Result<BTreeMap<usize, RingElem>> {
        if x.owner() != &self.handle {
            return Err(Error::RingMismatch);
        }
        let bd = self.base_dim();
        let mut per_mask: BTreeMap<usize, Vec<(u32, u8)>> = BTreeMap::new();
        for (i, c) in x.basis_pairs() {
            per_mask
                .entry((i / bd) as usize)
                .or_default()
                .push((i % bd, c));
        }
        Ok(per_mask
            .into_iter()
            .map(|(mask, pairs)| (mask, self.base.elem_from_pairs(pairs)))
            .collect())
    }

    /// The R-linear decomposition by subset size.
    pub fn degree_parts(&self, x: &RingElem) -> Result<BTreeMap<u32, RingElem>> {
        let mut parts: BTreeMap<u32, RingElem> = BTreeMap::new();
        for (mask, c) in self.coefficients(x)? {
            let deg = (mask as u32).count_ones();
            let t = self.term(mask, &c)?;
            let entry = parts.entry(deg).or_insert_with(|| self.handle.zero());
            *entry = entry.add(&t)?;
        }
        parts.retain(|_, v| !v.is_zero());
        Ok(parts)
    }

    /// Degree-1 embedding: `v = Σ v(s)·1_s` goes to `Σ v(s)·1_{{s}}`.
    pub fn iota_embed(&self, v: &FinVec) -> Result<RingElem> {
        if v.index() != &self.index {
            return Err(Error::IndexMismatch(
                "vector is not over the group-ring index set".into(),
            ));
        }
        if v.ring() != &self.base {
            return Err(Error::RingMismatch);
        }
        let mut acc = self.handle.zero();
        for (pos, c) in v.iter() {
            acc = acc.add(&self.term(1 << pos, c)?)?;
        }
        Ok(acc)
    }

    /// The free-module view of the group ring: a rank-`2^|S|` index set whose
    /// positions are subset masks.
    pub fn module_index(&self) -> IndexSet {
        IndexSet::subsets(self.index.clone()).expect("index within cap")
    }

    /// Ring element -> vector over the subsets index with base coefficients.
    pub fn to_module_vec(&self, x: &RingElem) -> Result<FinVec> {
        let idx = self.module_index();
        FinVec::from_entries(&self.base, &idx, self.coefficients(x)?)
    }

    /// Vector over the subsets index -> ring element.
    pub fn from_module_vec(&self, v: &FinVec) -> Result<RingElem> {
        if v.ring() != &self.base {
            return Err(Error::RingMismatch);
        }
        let mut acc = self.handle.zero();
        for (mask, c) in v.iter() {
            acc = acc.add(&self.term(mask, c)?)?;
        }
        Ok(acc)
    }

    /// Serializes an element as a list of (sorted subset, coefficient)
    /// pairs.
    pub fn elem_to_terms(&self, x: &RingElem) -> Result<Vec<GroupElemTerm>> {
        Ok(self
            .coefficients(x)?
            .into_iter()
            .map(|(mask, c)| GroupElemTerm {
                subset: (0..self.index.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| self.index.label(i).to_string())
                    .collect(),
                coeff: c.basis_pairs(),
            })
            .collect())
    }

    pub fn elem_from_terms(&self, terms: &[GroupElemTerm]) -> Result<RingElem> {
        let labels: Vec<String> = (0..self.index.len())
            .map(|i| self.index.label(i).to_string())
            .collect();
        let mut acc = self.handle.zero();
        for term in terms {
            let mut mask = 0usize;
            for member in &term.subset {
                let pos = labels
                    .iter()
                    .position(|l| l == member)
                    .ok_or_else(|| Error::IndexMismatch(format!("unknown member {member}")))?;
                mask |= 1 << pos;
            }
            let c = self.base.elem_from_pairs(term.coeff.iter().copied());
            acc = acc.add(&self.term(mask, &c)?)?;
        }
        Ok(acc)
    }

    /// Coefficient extraction against the n-fold degree-1 tensor embedding:
    /// reads off, for each tuple, the coefficient of the subset with exactly
    /// one member in each union block. All other subsets contribute zero,
    /// which extends the left inverse linearly and canonically.
    ///
    /// The handle's index set must be a tagged disjoint union of `n` blocks
    /// (a plain set counts as one block when `n == 1`).
    pub fn d_extract(&self, n: usize, x: &RingElem) -> Result<FinVec> {
        let blocks: Vec<IndexSet> = if self.index.is_union() {
            self.index.union_blocks().to_vec()
        } else if n == 1 {
            vec![self.index.clone()]
        } else {
            return Err(Error::IndexMismatch(
                "d_extract needs a tagged disjoint union index".into(),
            ));
        };
        if blocks.len() != n {
            return Err(Error::IndexMismatch(format!(
                "d_extract arity {n} does not match {} union blocks",
                blocks.len()
            )));
        }
        // per-block bit ranges within the mask
        let mut offsets = Vec::with_capacity(n);
        let mut off = 0usize;
        for b in &blocks {
            offsets.push(off);
            off += b.len();
        }
        let product = IndexSet::product(blocks.clone());
        let mut out = FinVec::zero(&self.base, &product);
        'masks: for (mask, c) in self.coefficients(x)? {
            let mut coords = Vec::with_capacity(n);
            for (b, block) in blocks.iter().enumerate() {
                let sub = (mask >> offsets[b]) & ((1 << block.len()) - 1);
                if sub.count_ones() != 1 {
                    continue 'masks; // not one-per-block: extraction is zero
                }
                coords.push(sub.trailing_zeros() as usize);
            }
            if mask >> off != 0 {
                continue;
            }
            let pos = if n == 1 {
                coords[0]
            } else {
                product.encode_product(&coords)
            };
            out.set(pos, c);
        }
        Ok(out)
    }
}

/// A verified ring isomorphism given by a basis bijection.
#[derive(Debug, Clone)]
pub struct VerifiedIso {
    pub source: RingHandle,
    pub target: RingHandle,
    pub forward: RingHom,
    pub verified: bool,
}

/// The decomposition R{S ⊔ T} ≅ R{S} ⊗_R R{T}, with the tensor realized as
/// the iterated group ring R{S}{T}. The basis map sends a subset `K` of the
/// union to `(K ∩ S) ⊗ (K ∩ T)`; the returned object has been checked to be
/// a bijection and multiplicative on every basis pair.
pub fn disjoint_union_iso(
    base: &RingHandle,
    s: &IndexSet,
    t: &IndexSet,
) -> Result<VerifiedIso> {
    let union = IndexSet::union(vec![s.clone(), t.clone()]);
    let src = gr_make(base, &union)?;
    let inner = gr_make(base, s)?;
    let outer = gr_make(inner.handle(), t)?;
    let bd = base.dim().ok_or(Error::InfiniteDimensional)? as u32;
    let inner_dim = inner.handle().dim().unwrap() as u32;
    let s_bits = s.len();
    let mut images = Vec::with_capacity(src.handle().dim().unwrap());
    for idx in 0..src.handle().dim().unwrap() as u32 {
        let mask = idx / bd;
        let b = idx % bd;
        let s_mask = mask & ((1 << s_bits) - 1);
        let t_mask = mask >> s_bits;
        // (t_mask, (s_mask, b)) in the iterated ring
        let inner_idx = s_mask * bd + b;
        images.push(outer.handle().basis_elem(t_mask * inner_dim + inner_idx));
    }
    let forward = RingHom::from_basis_images(src.handle().clone(), outer.handle().clone(), images)?;
    let bijective = forward.fp_matrix()?.rank() == src.handle().dim().unwrap();
    let verified = bijective && forward.verify_hom()?;
    Ok(VerifiedIso {
        source: src.handle().clone(),
        target: outer.handle().clone(),
        forward,
        verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::is_pboolean;

    fn f2() -> RingHandle {
        make_ring(&RingDescriptor::ProductFp { p: 2, m: 1 }).unwrap()
    }

    #[test]
    fn dimensions() {
        let base = f2();
        let g1 = gr_make(&base, &IndexSet::atoms(["a"]).unwrap()).unwrap();
        assert_eq!(g1.handle().dim(), Some(2));
        let g2 = gr_make(&base, &IndexSet::atoms(["a", "b"]).unwrap()).unwrap();
        assert_eq!(g2.handle().dim(), Some(4));
        let prod = make_ring(&RingDescriptor::ProductFp { p: 2, m: 2 }).unwrap();
        let g3 = gr_make(&prod, &IndexSet::atoms(["a", "b", "c"]).unwrap()).unwrap();
        assert_eq!(g3.rank(), 8);
        assert_eq!(g3.handle().dim(), Some(16));
    }

    #[test]
    fn union_multiplication() {
        let g = gr_make(&f2(), &IndexSet::atoms(["a", "b"]).unwrap()).unwrap();
        let a = g.indicator(0b01);
        let b = g.indicator(0b10);
        // 1_{a} * 1_{a} = 1_{a}
        assert_eq!(a.mul(&a).unwrap(), a);
        // 1_{a} * 1_{b} = 1_{a,b}
        assert_eq!(a.mul(&b).unwrap(), g.indicator(0b11));
        // (1_∅ + 1_{a})^2 = 1_∅ + 1_{a} in characteristic 2: the cross terms
        // 1_{a} + 1_{a} cancel and 1_{a}·1_{a} survives
        let e = g.indicator(0).add(&a).unwrap();
        assert_eq!(e.mul(&e).unwrap(), e);
    }

    #[test]
    fn grading_bounds() {
        // deg-a times deg-b lands in degrees max(a,b)..a+b
        let g = gr_make(&f2(), &IndexSet::atoms(["a", "b", "c"]).unwrap()).unwrap();
        for m1 in 0..8usize {
            for m2 in 0..8usize {
                let prod = g.indicator(m1).mul(&g.indicator(m2)).unwrap();
                let parts = g.degree_parts(&prod).unwrap();
                let a = m1.count_ones();
                let b = m2.count_ones();
                for &d in parts.keys() {
                    assert!(d >= a.max(b) && d <= a + b);
                }
            }
        }
    }

    #[test]
    fn iota_lands_in_degree_one() {
        let base = make_ring(&RingDescriptor::ProductFp { p: 3, m: 1 }).unwrap();
        let s = IndexSet::atoms(["a", "b"]).unwrap();
        let g = gr_make(&base, &s).unwrap();
        // 2·1_a + 1·1_b maps to 2·1_{{a}} + 1·1_{{b}}
        let mut v = FinVec::zero(&base, &s);
        v.set(0, base.one().scale_fp(2));
        v.set(1, base.one());
        let x = g.iota_embed(&v).unwrap();
        let parts = g.degree_parts(&x).unwrap();
        assert_eq!(parts.len(), 1);
        assert!(parts.contains_key(&1));
        let expected = g
            .term(0b01, &base.one().scale_fp(2))
            .unwrap()
            .add(&g.term(0b10, &base.one()).unwrap())
            .unwrap();
        assert_eq!(x, expected);
        assert!(g.iota_embed(&FinVec::zero(&base, &s)).unwrap().is_zero());
    }

    #[test]
    fn d_extract_picks_one_per_block() {
        let base = f2();
        let s1 = IndexSet::atoms(["s1", "s2"]).unwrap();
        let s2 = IndexSet::atoms(["t1"]).unwrap();
        let union = IndexSet::union(vec![s1.clone(), s2.clone()]);
        let g = gr_make(&base, &union).unwrap();
        // subset {s1, t1}: bits 0 and 2
        let x = g.indicator(0b101);
        let v = g.d_extract(2, &x).unwrap();
        let prod = IndexSet::product(vec![s1.clone(), s2.clone()]);
        assert_eq!(v.support(), vec![prod.encode_product(&[0, 0])]);
        // subset {s1, s2} lies entirely in block 1: extraction is zero
        let y = g.indicator(0b011);
        assert!(g.d_extract(2, &y).unwrap().is_zero());
    }

    #[test]
    fn d_extract_degree_one_for_single_block() {
        let base = f2();
        let s = IndexSet::atoms(["a"]).unwrap();
        let g = gr_make(&base, &s).unwrap();
        let x = g.indicator(0).add(&g.indicator(1)).unwrap();
        let v = g.d_extract(1, &x).unwrap();
        assert_eq!(v.support(), vec![0]);
        assert_eq!(v.get(0), base.one());
    }

    #[test]
    fn d_extract_inverts_iota_tensor() {
        // d_n ∘ (⊗_i iota) = id on basis vectors, n <= 3, |S_i| <= 3
        let base = make_ring(&RingDescriptor::ProductFp { p: 2, m: 2 }).unwrap();
        for n in 1..=3usize {
            for size in 1..=3usize {
                let sets: Vec<IndexSet> = (0..n)
                    .map(|_| IndexSet::numbered(size))
                    .collect();
                let union = IndexSet::union(sets.clone());
                let g = gr_make(&base, &union).unwrap();
                let product = IndexSet::product(sets.clone());
                for pos in 0..product.len() {
                    let coords = if n == 1 {
                        vec![pos]
                    } else {
                        product.decode_product(pos)
                    };
                    // embed the tuple as the product of its degree-1 pieces
                    let mut x = g.handle().one();
                    for (b, &c) in coords.iter().enumerate() {
                        let bit = union.encode_union(b, c);
                        x = x.mul(&g.indicator(1 << bit)).unwrap();
                    }
                    let v = g.d_extract(n, &x).unwrap();
                    assert_eq!(v.support(), vec![pos]);
                    assert_eq!(v.get(pos), base.one());
                }
            }
        }
    }

    #[test]
    fn disjoint_union_iso_small() {
        let base = f2();
        let s = IndexSet::atoms(["a"]).unwrap();
        let t = IndexSet::atoms(["b"]).unwrap();
        let iso = disjoint_union_iso(&base, &s, &t).unwrap();
        assert!(iso.verified);
        // 1_{{a,b}} maps to 1_{{a}} ⊗ 1_{{b}}
        let src = gr_make(&base, &IndexSet::union(vec![s.clone(), t.clone()])).unwrap();
        let img = iso.forward.apply(&src.indicator(0b11)).unwrap();
        let inner = gr_make(&base, &s).unwrap();
        let outer = gr_make(inner.handle(), &t).unwrap();
        let expected = outer.term(0b1, &inner.indicator(0b1)).unwrap();
        assert_eq!(img, expected);
    }

    #[test]
    fn disjoint_union_iso_empty_block() {
        let base = f2();
        let s = IndexSet::atoms(Vec::<String>::new()).unwrap();
        let t = IndexSet::atoms(["a", "b"]).unwrap();
        let iso = disjoint_union_iso(&base, &s, &t).unwrap();
        assert!(iso.verified);
    }

    #[test]
    fn group_ring_over_f2_is_pboolean() {
        let g = gr_make(&f2(), &IndexSet::atoms(["a", "b"]).unwrap()).unwrap();
        let v = is_pboolean(g.handle());
        assert!(v.holds);
    }

    #[test]
    fn subset_pair_serialization_round_trip() {
        let base = make_ring(&RingDescriptor::ProductFp { p: 3, m: 2 }).unwrap();
        let g = gr_make(&base, &IndexSet::atoms(["a", "b", "c"]).unwrap()).unwrap();
        let x = g
            .term(0b101, &base.basis_elem(1).scale_fp(2))
            .unwrap()
            .add(&g.term(0b010, &base.one()).unwrap())
            .unwrap();
        let terms = g.elem_to_terms(&x).unwrap();
        assert_eq!(terms[0].subset, vec!["b".to_string()]);
        assert_eq!(terms[1].subset, vec!["a".to_string(), "c".to_string()]);
        let json = serde_json::to_string(&terms).unwrap();
        let back: Vec<GroupElemTerm> = serde_json::from_str(&json).unwrap();
        assert_eq!(g.elem_from_terms(&back).unwrap(), x);
    }

    #[test]
    fn module_vec_round_trip() {
        let base = make_ring(&RingDescriptor::ProductFp { p: 3, m: 2 }).unwrap();
        let g = gr_make(&base, &IndexSet::atoms(["a", "b"]).unwrap()).unwrap();
        let x = g
            .term(0b01, &base.basis_elem(1))
            .unwrap()
            .add(&g.term(0b11, &base.one().scale_fp(2)).unwrap())
            .unwrap();
        let v = g.to_module_vec(&x).unwrap();
        assert_eq!(g.from_module_vec(&v).unwrap(), x);
    }
}
