//! Exact arithmetic for commutative F_p-algebras with a distinguished basis:
//! finite products of F_p, p-boolean polynomial quotients
//! F_p[X_1..X_k]/(X_i^p - X_i), free polynomial rings (construction,
//! evaluation and linear quotients only), tensor products, finite powers,
//! boolean group rings, and degree-truncated polynomial slices.
//!
//! Handles are immutable and cheap to clone; every operation is a pure
//! function of its inputs, so handles can be shared across threads freely.
//! Elements are kept in canonical form (sorted sparse storage, no explicit
//! zeros), so equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::caps::{MAX_GROUP_RING_INDEX, MAX_RING_DIM, PBOOL_EXHAUST, SAMPLE_COUNT};
use crate::error::{Error, Result};
use crate::fp::PrimeModulus;
use crate::index::IndexSet;
use crate::linalg::FpMat;

/// Blueprint of a ring. Serializes to a tagged structured-text form, e.g.
/// `{"kind":"pbool_poly","p":2,"k":3}`; round-trip is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RingDescriptor {
    /// F_p^m with coordinatewise operations.
    ProductFp { p: u32, m: usize },
    /// F_p[X_1..X_k]/(X_1^p-X_1, ..., X_k^p-X_k); basis = monomials with
    /// exponents in 0..p-1, so dim = p^k.
    #[serde(rename = "pbool_poly")]
    PBoolPoly { p: u32, k: usize },
    /// Free polynomial ring F_p[vars]; infinite-dimensional, supported for
    /// construction, evaluation and quotient-by-linear-forms only.
    PolyRing { p: u32, vars: Vec<String> },
    /// Tensor product over F_p of finite-dimensional factors.
    Tensor { factors: Vec<RingDescriptor> },
    /// Direct product of `copies` copies of a finite-dimensional base.
    Power {
        base: Box<RingDescriptor>,
        copies: usize,
    },
    /// Boolean group ring base{S}: free base-module on the subsets of the
    /// index set, multiplying basis subsets by union.
    GroupRing {
        base: Box<RingDescriptor>,
        index: IndexSet,
    },
    /// Degree-truncated polynomial slice F_p[X_1..X_k] / (monomials of total
    /// degree > max_degree). Carries nilpotents; used for Sym truncations.
    TruncPoly {
        p: u32,
        k: usize,
        max_degree: usize,
    },
}

struct RingInner {
    desc: RingDescriptor,
    p: PrimeModulus,
    dim: Option<usize>,
    factors: Vec<RingHandle>,
    base: Option<RingHandle>,
    gr_index: Option<IndexSet>,
    monomials: Vec<Vec<u16>>,
    mono_index: BTreeMap<Vec<u16>, u32>,
}

/// A constructed ring. Equality is by descriptor.
#[derive(Clone)]
pub struct RingHandle {
    inner: Arc<RingInner>,
}

impl PartialEq for RingHandle {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.desc == other.inner.desc
    }
}
impl Eq for RingHandle {}

impl fmt::Debug for RingHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingHandle({:?}, dim={:?})", self.inner.desc, self.dim())
    }
}

fn count_monomials(k: usize, d: usize) -> usize {
    // C(k + d, k), small arguments only
    let mut acc: usize = 1;
    for i in 1..=k {
        acc = acc * (d + i) / i;
    }
    acc
}

fn enumerate_monomials(k: usize, d: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::with_capacity(count_monomials(k, d));
    let mut cur = vec![0u16; k];
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

/// Builds a handle from a descriptor, validating primes and dimension caps.
pub fn make_ring(desc: &RingDescriptor) -> Result<RingHandle> {
    let (p, dim, factors, base, gr_index, monomials) = match desc {
        RingDescriptor::ProductFp { p, m } => {
            if *m == 0 {
                return Err(Error::ConstructionFailure("product needs m >= 1".into()));
            }
            (PrimeModulus::new(*p)?, Some(*m), vec![], None, None, vec![])
        }
        RingDescriptor::PBoolPoly { p, k } => {
            let pm = PrimeModulus::new(*p)?;
            let dim = (*p as u128).checked_pow(*k as u32).filter(|d| *d <= MAX_RING_DIM as u128);
            let Some(dim) = dim else {
                return Err(Error::DimensionCap {
                    dim: usize::MAX,
                    cap: MAX_RING_DIM,
                });
            };
            (pm, Some(dim as usize), vec![], None, None, vec![])
        }
        RingDescriptor::PolyRing { p, vars } => {
            for (i, v) in vars.iter().enumerate() {
                if vars[..i].contains(v) {
                    return Err(Error::DuplicateLabel(v.clone()));
                }
            }
            (PrimeModulus::new(*p)?, None, vec![], None, None, vec![])
        }
        RingDescriptor::Tensor { factors } => {
            if factors.is_empty() {
                return Err(Error::ConstructionFailure(
                    "tensor needs at least one factor".into(),
                ));
            }
            let handles: Vec<RingHandle> =
                factors.iter().map(make_ring).collect::<Result<_>>()?;
            let p = handles[0].modulus();
            let mut dim: usize = 1;
            for h in &handles {
                if h.modulus() != p {
                    return Err(Error::CharMismatch(p.get(), h.modulus().get()));
                }
                let d = h.dim().ok_or(Error::InfiniteDimensional)?;
                dim = dim.checked_mul(d).ok_or(Error::DimensionCap {
                    dim: usize::MAX,
                    cap: MAX_RING_DIM,
                })?;
            }
            if dim > MAX_RING_DIM {
                return Err(Error::DimensionCap {
                    dim,
                    cap: MAX_RING_DIM,
                });
            }
            (p, Some(dim), handles, None, None, vec![])
        }
        RingDescriptor::Power { base, copies } => {
            if *copies == 0 {
                return Err(Error::ConstructionFailure("power needs copies >= 1".into()));
            }
            let b = make_ring(base)?;
            let d = b.dim().ok_or(Error::InfiniteDimensional)? * copies;
            if d > MAX_RING_DIM {
                return Err(Error::DimensionCap {
                    dim: d,
                    cap: MAX_RING_DIM,
                });
            }
            (b.modulus(), Some(d), vec![], Some(b), None, vec![])
        }
        RingDescriptor::GroupRing { base, index } => {
            let b = make_ring(base)?;
            if index.len() > MAX_GROUP_RING_INDEX {
                return Err(Error::DimensionCap {
                    dim: index.len(),
                    cap: MAX_GROUP_RING_INDEX,
                });
            }
            let d = b.dim().ok_or(Error::InfiniteDimensional)? << index.len();
            if d > MAX_RING_DIM {
                return Err(Error::DimensionCap {
                    dim: d,
                    cap: MAX_RING_DIM,
                });
            }
            (b.modulus(), Some(d), vec![], Some(b), Some(index.clone()), vec![])
        }
        RingDescriptor::TruncPoly { p, k, max_degree } => {
            let pm = PrimeModulus::new(*p)?;
            let n = count_monomials(*k, *max_degree);
            if n > MAX_RING_DIM {
                return Err(Error::DimensionCap {
                    dim: n,
                    cap: MAX_RING_DIM,
                });
            }
            (pm, Some(n), vec![], None, None, enumerate_monomials(*k, *max_degree))
        }
    };
    let mono_index = monomials
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i as u32))
        .collect();
    Ok(RingHandle {
        inner: Arc::new(RingInner {
            desc: desc.clone(),
            p,
            dim,
            factors,
            base,
            gr_index,
            monomials,
            mono_index,
        }),
    })
}

impl RingHandle {
    pub fn descriptor(&self) -> &RingDescriptor {
        &self.inner.desc
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.inner.p
    }

    pub fn p(&self) -> u32 {
        self.inner.p.get()
    }

    /// F_p-dimension; `None` for the free polynomial ring.
    pub fn dim(&self) -> Option<usize> {
        self.inner.dim
    }

    pub fn is_finite(&self) -> bool {
        self.inner.dim.is_some()
    }

    pub fn tensor_factors(&self) -> &[RingHandle] {
        &self.inner.factors
    }

    pub fn base_ring(&self) -> Option<&RingHandle> {
        self.inner.base.as_ref()
    }

    pub fn group_index(&self) -> Option<&IndexSet> {
        self.inner.gr_index.as_ref()
    }

    pub fn poly_vars(&self) -> Option<&[String]> {
        match &self.inner.desc {
            RingDescriptor::PolyRing { vars, .. } => Some(vars),
            _ => None,
        }
    }

    fn dim_or_panic(&self) -> usize {
        self.inner.dim.expect("operation requires a finite basis")
    }

    pub fn zero(&self) -> RingElem {
        let repr = match &self.inner.desc {
            RingDescriptor::PolyRing { .. } => Repr::Poly(BTreeMap::new()),
            _ => Repr::Basis(BTreeMap::new()),
        };
        RingElem {
            owner: self.clone(),
            repr,
        }
    }

    fn one_pairs(&self) -> Vec<(u32, u8)> {
        match &self.inner.desc {
            RingDescriptor::ProductFp { m, .. } => (0..*m as u32).map(|i| (i, 1)).collect(),
            RingDescriptor::PBoolPoly { .. } | RingDescriptor::TruncPoly { .. } => vec![(0, 1)],
            RingDescriptor::Tensor { .. } => {
                let mut acc: Vec<(u32, u8)> = vec![(0, 1)];
                for f in &self.inner.factors {
                    let fd = f.dim_or_panic() as u32;
                    let ones = f.one_pairs();
                    let mut next = Vec::with_capacity(acc.len() * ones.len());
                    for (idx, c) in &acc {
                        for (j, cj) in &ones {
                            next.push((idx * fd + j, self.inner.p.mul(*c, *cj)));
                        }
                    }
                    acc = next;
                }
                acc
            }
            RingDescriptor::Power { copies, .. } => {
                let b = self.inner.base.as_ref().unwrap();
                let bd = b.dim_or_panic() as u32;
                let ones = b.one_pairs();
                (0..*copies as u32)
                    .flat_map(|c| ones.iter().map(move |(j, v)| (c * bd + j, *v)))
                    .collect()
            }
            RingDescriptor::GroupRing { .. } => {
                // coefficient 1 (the base unit) on the empty subset
                let b = self.inner.base.as_ref().unwrap();
                b.one_pairs()
            }
            RingDescriptor::PolyRing { .. } => unreachable!(),
        }
    }

    pub fn one(&self) -> RingElem {
        match &self.inner.desc {
            RingDescriptor::PolyRing { vars, .. } => {
                let mut m = BTreeMap::new();
                m.insert(vec![0u16; vars.len()], 1u8);
                RingElem {
                    owner: self.clone(),
                    repr: Repr::Poly(m),
                }
            }
            _ => self.elem_from_pairs(self.one_pairs()),
        }
    }

    /// The basis element with index `idx` (finite handles only).
    pub fn basis_elem(&self, idx: u32) -> RingElem {
        assert!((idx as usize) < self.dim_or_panic());
        self.elem_from_pairs([(idx, 1u8)])
    }

    /// Builds an element from `(basis index, coefficient)` pairs, reducing
    /// mod p and dropping zeros.
    pub fn elem_from_pairs(&self, pairs: impl IntoIterator<Item = (u32, u8)>) -> RingElem {
        let dim = self.dim_or_panic();
        let mut m: BTreeMap<u32, u8> = BTreeMap::new();
        let p = self.inner.p;
        for (i, c) in pairs {
            assert!((i as usize) < dim, "basis index out of range");
            let c = (c as u32 % p.get()) as u8;
            if c == 0 {
                continue;
            }
            let e = m.entry(i).or_insert(0);
            *e = p.add(*e, c);
            if *e == 0 {
                m.remove(&i);
            }
        }
        RingElem {
            owner: self.clone(),
            repr: Repr::Basis(m),
        }
    }

    /// Builds a free-polynomial element from `(exponents, coefficient)` terms.
    pub fn poly_elem(
        &self,
        terms: impl IntoIterator<Item = (Vec<u16>, u8)>,
    ) -> Result<RingElem> {
        let Some(vars) = self.poly_vars() else {
            return Err(Error::Unsupported("poly_elem on a non-polynomial ring".into()));
        };
        let p = self.inner.p;
        let nvars = vars.len();
        let mut m: BTreeMap<Vec<u16>, u8> = BTreeMap::new();
        for (expo, c) in terms {
            if expo.len() != nvars {
                return Err(Error::IndexOutOfRange {
                    index: expo.len(),
                    arity: nvars,
                });
            }
            let c = (c as u32 % p.get()) as u8;
            if c == 0 {
                continue;
            }
            let e = m.entry(expo).or_insert(0);
            *e = p.add(*e, c);
        }
        m.retain(|_, v| *v != 0);
        Ok(RingElem {
            owner: self.clone(),
            repr: Repr::Poly(m),
        })
    }

    /// The generator X_i of a free polynomial ring.
    pub fn poly_var(&self, i: usize) -> Result<RingElem> {
        let vars = self
            .poly_vars()
            .ok_or_else(|| Error::Unsupported("poly_var on a non-polynomial ring".into()))?;
        if i >= vars.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                arity: vars.len(),
            });
        }
        let mut expo = vec![0u16; vars.len()];
        expo[i] = 1;
        self.poly_elem([(expo, 1u8)])
    }

    pub fn constant(&self, c: u8) -> RingElem {
        let mut e = self.one();
        e = e.scale_fp(c);
        e
    }

    // --- basis structure ------------------------------------------------

    fn pbool_digits(&self, k: usize, idx: u32) -> Vec<u8> {
        let p = self.inner.p.get();
        let mut digits = vec![0u8; k];
        let mut rest = idx;
        for d in digits.iter_mut().rev() {
            *d = (rest % p) as u8;
            rest /= p;
        }
        digits
    }

    fn pbool_encode(&self, digits: &[u8]) -> u32 {
        let p = self.inner.p.get();
        digits.iter().fold(0u32, |acc, &d| acc * p + d as u32)
    }

    /// Product of two basis elements, as sparse pairs.
    pub(crate) fn mul_basis(&self, i: u32, j: u32) -> Vec<(u32, u8)> {
        match &self.inner.desc {
            RingDescriptor::ProductFp { .. } => {
                if i == j {
                    vec![(i, 1)]
                } else {
                    vec![]
                }
            }
            RingDescriptor::PBoolPoly { p, k } => {
                let a = self.pbool_digits(*k, i);
                let b = self.pbool_digits(*k, j);
                let digits: Vec<u8> = a
                    .iter()
                    .zip(&b)
                    .map(|(&x, &y)| {
                        let e = x as u32 + y as u32;
                        if e == 0 {
                            0
                        } else {
                            // X^p = X, so exponents reduce into 1..=p-1
                            (((e - 1) % (p - 1)) + 1) as u8
                        }
                    })
                    .collect();
                vec![(self.pbool_encode(&digits), 1)]
            }
            RingDescriptor::TruncPoly { k: _, max_degree, .. } => {
                let a = &self.inner.monomials[i as usize];
                let b = &self.inner.monomials[j as usize];
                let sum: Vec<u16> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let total: usize = sum.iter().map(|&e| e as usize).sum();
                if total > *max_degree {
                    vec![]
                } else {
                    vec![(self.inner.mono_index[&sum], 1)]
                }
            }
            RingDescriptor::Tensor { .. } => {
                let dims: Vec<u32> = self
                    .inner
                    .factors
                    .iter()
                    .map(|f| f.dim_or_panic() as u32)
                    .collect();
                let decode = |mut idx: u32| -> Vec<u32> {
                    let mut coords = vec![0u32; dims.len()];
                    for (c, d) in coords.iter_mut().zip(&dims).rev() {
                        *c = idx % d;
                        idx /= d;
                    }
                    coords
                };
                let ci = decode(i);
                let cj = decode(j);
                let mut acc: Vec<(u32, u8)> = vec![(0, 1)];
                for (f, ((&a, &b), &fd)) in self
                    .inner
                    .factors
                    .iter()
                    .zip(ci.iter().zip(&cj).zip(&dims))
                {
                    let part = f.mul_basis(a, b);
                    if part.is_empty() {
                        return vec![];
                    }
                    let mut next = Vec::with_capacity(acc.len() * part.len());
                    for (idx, c) in &acc {
                        for (pj, pc) in &part {
                            let c2 = self.inner.p.mul(*c, *pc);
                            if c2 != 0 {
                                next.push((idx * fd + pj, c2));
                            }
                        }
                    }
                    acc = next;
                }
                acc
            }
            RingDescriptor::Power { .. } => {
                let bd = self.inner.base.as_ref().unwrap().dim_or_panic() as u32;
                let (ci, bi) = (i / bd, i % bd);
                let (cj, bj) = (j / bd, j % bd);
                if ci != cj {
                    return vec![];
                }
                self.inner
                    .base
                    .as_ref()
                    .unwrap()
                    .mul_basis(bi, bj)
                    .into_iter()
                    .map(|(k, c)| (ci * bd + k, c))
                    .collect()
            }
            RingDescriptor::GroupRing { .. } => {
                let bd = self.inner.base.as_ref().unwrap().dim_or_panic() as u32;
                let (mi, bi) = (i / bd, i % bd);
                let (mj, bj) = (j / bd, j % bd);
                let mask = mi | mj; // basis subsets multiply by union
                self.inner
                    .base
                    .as_ref()
                    .unwrap()
                    .mul_basis(bi, bj)
                    .into_iter()
                    .map(|(k, c)| (mask * bd + k, c))
                    .collect()
            }
            RingDescriptor::PolyRing { .. } => unreachable!("poly ring has no finite basis"),
        }
    }

    /// Basis index of a monomial in a quotient with a monomial basis.
    pub fn monomial_index(&self, expo: &[u16]) -> Result<u32> {
        match &self.inner.desc {
            RingDescriptor::PBoolPoly { p, k } => {
                if expo.len() != *k {
                    return Err(Error::IndexOutOfRange {
                        index: expo.len(),
                        arity: *k,
                    });
                }
                if expo.iter().any(|&e| e as u32 >= *p) {
                    return Err(Error::Unsupported("exponent outside 0..p".into()));
                }
                let digits: Vec<u8> = expo.iter().map(|&e| e as u8).collect();
                Ok(self.pbool_encode(&digits))
            }
            RingDescriptor::TruncPoly { k, .. } => {
                if expo.len() != *k {
                    return Err(Error::IndexOutOfRange {
                        index: expo.len(),
                        arity: *k,
                    });
                }
                self.inner
                    .mono_index
                    .get(expo)
                    .copied()
                    .ok_or_else(|| Error::Unsupported("monomial beyond the truncation".into()))
            }
            other => Err(Error::Unsupported(format!(
                "monomial_index on {other:?}"
            ))),
        }
    }

    /// Exponent vector of a basis monomial (inverse of `monomial_index`).
    pub fn monomial_exponents(&self, idx: u32) -> Result<Vec<u16>> {
        match &self.inner.desc {
            RingDescriptor::PBoolPoly { k, .. } => Ok(self
                .pbool_digits(*k, idx)
                .into_iter()
                .map(|d| d as u16)
                .collect()),
            RingDescriptor::TruncPoly { .. } => self
                .inner
                .monomials
                .get(idx as usize)
                .cloned()
                .ok_or(Error::IndexOutOfRange {
                    index: idx as usize,
                    arity: self.inner.monomials.len(),
                }),
            other => Err(Error::Unsupported(format!(
                "monomial_exponents on {other:?}"
            ))),
        }
    }

    pub fn basis_label(&self, idx: u32) -> String {
        match &self.inner.desc {
            RingDescriptor::ProductFp { .. } => format!("e{}", idx + 1),
            RingDescriptor::PBoolPoly { k, .. } => {
                let digits = self.pbool_digits(*k, idx);
                monomial_label(&digits.iter().map(|&d| d as u16).collect::<Vec<_>>())
            }
            RingDescriptor::TruncPoly { .. } => {
                monomial_label(&self.inner.monomials[idx as usize])
            }
            RingDescriptor::Tensor { .. } => {
                let dims: Vec<u32> = self
                    .inner
                    .factors
                    .iter()
                    .map(|f| f.dim_or_panic() as u32)
                    .collect();
                let mut coords = vec![0u32; dims.len()];
                let mut rest = idx;
                for (c, d) in coords.iter_mut().zip(&dims).rev() {
                    *c = rest % d;
                    rest /= d;
                }
                coords
                    .iter()
                    .zip(&self.inner.factors)
                    .map(|(&c, f)| f.basis_label(c))
                    .collect::<Vec<_>>()
                    .join("⊗")
            }
            RingDescriptor::Power { .. } => {
                let bd = self.inner.base.as_ref().unwrap().dim_or_panic() as u32;
                format!(
                    "{}|{}",
                    idx / bd,
                    self.inner.base.as_ref().unwrap().basis_label(idx % bd)
                )
            }
            RingDescriptor::GroupRing { index, .. } => {
                let base = self.inner.base.as_ref().unwrap();
                let bd = base.dim_or_panic() as u32;
                let mask = (idx / bd) as usize;
                let members: Vec<String> = (0..index.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| index.label(i).to_string())
                    .collect();
                let subset = format!("{{{}}}", members.join(","));
                if bd == 1 {
                    subset
                } else {
                    format!("{subset}·{}", base.basis_label(idx % bd))
                }
            }
            RingDescriptor::PolyRing { .. } => unreachable!(),
        }
    }

    /// Iterates every element of a finite handle (caller bounds the size).
    pub fn enumerate_elements(&self) -> ElemIter {
        ElemIter {
            handle: self.clone(),
            current: vec![0; self.dim_or_panic()],
            done: false,
        }
    }

    pub fn random_elem(&self, rng: &mut impl Rng) -> RingElem {
        let dim = self.dim_or_panic();
        let p = self.p();
        self.elem_from_pairs((0..dim as u32).map(|i| (i, rng.gen_range(0..p) as u8)))
    }
}

fn monomial_label(expo: &[u16]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in expo.iter().enumerate() {
        if e == 1 {
            parts.push(format!("X{}", i + 1));
        } else if e > 1 {
            parts.push(format!("X{}^{}", i + 1, e));
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

pub struct ElemIter {
    handle: RingHandle,
    current: Vec<u8>,
    done: bool,
}

impl Iterator for ElemIter {
    type Item = RingElem;

    fn next(&mut self) -> Option<RingElem> {
        if self.done {
            return None;
        }
        let elem = self.handle.elem_from_pairs(
            self.current
                .iter()
                .enumerate()
                .map(|(i, &c)| (i as u32, c)),
        );
        // odometer increment
        let p = self.handle.p() as u8;
        let mut i = 0;
        loop {
            if i == self.current.len() {
                self.done = true;
                break;
            }
            self.current[i] += 1;
            if self.current[i] < p {
                break;
            }
            self.current[i] = 0;
            i += 1;
        }
        Some(elem)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Repr {
    Basis(BTreeMap<u32, u8>),
    Poly(BTreeMap<Vec<u16>, u8>),
}

/// An element of a ring, owned by its handle.
#[derive(Clone, PartialEq, Eq)]
pub struct RingElem {
    owner: RingHandle,
    repr: Repr,
}

impl fmt::Debug for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Basis(m) if m.is_empty() => write!(f, "0"),
            Repr::Poly(m) if m.is_empty() => write!(f, "0"),
            Repr::Basis(m) => {
                let parts: Vec<String> = m
                    .iter()
                    .map(|(&i, &c)| {
                        let lbl = self.owner.basis_label(i);
                        if c == 1 {
                            lbl
                        } else {
                            format!("{c}·{lbl}")
                        }
                    })
                    .collect();
                write!(f, "{}", parts.join(" + "))
            }
            Repr::Poly(m) => {
                let parts: Vec<String> = m
                    .iter()
                    .map(|(expo, &c)| {
                        let lbl = monomial_label(expo);
                        if c == 1 {
                            lbl
                        } else {
                            format!("{c}·{lbl}")
                        }
                    })
                    .collect();
                write!(f, "{}", parts.join(" + "))
            }
        }
    }
}

impl RingElem {
    pub fn owner(&self) -> &RingHandle {
        &self.owner
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Basis(m) => m.is_empty(),
            Repr::Poly(m) => m.is_empty(),
        }
    }

    fn check_owner(&self, other: &RingElem) -> Result<()> {
        if self.owner == other.owner {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn coeff(&self, idx: u32) -> u8 {
        match &self.repr {
            Repr::Basis(m) => m.get(&idx).copied().unwrap_or(0),
            Repr::Poly(_) => panic!("coeff by basis index on a polynomial element"),
        }
    }

    /// Sparse `(basis index, coefficient)` view of a finite-basis element.
    pub fn basis_pairs(&self) -> Vec<(u32, u8)> {
        match &self.repr {
            Repr::Basis(m) => m.iter().map(|(&i, &c)| (i, c)).collect(),
            Repr::Poly(_) => panic!("basis_pairs on a polynomial element"),
        }
    }

    pub fn poly_terms(&self) -> Vec<(Vec<u16>, u8)> {
        match &self.repr {
            Repr::Poly(m) => m.iter().map(|(e, &c)| (e.clone(), c)).collect(),
            Repr::Basis(_) => panic!("poly_terms on a basis element"),
        }
    }

    pub fn is_poly(&self) -> bool {
        matches!(self.repr, Repr::Poly(_))
    }

    pub fn add(&self, other: &RingElem) -> Result<RingElem> {
        self.check_owner(other)?;
        let p = self.owner.modulus();
        let repr = match (&self.repr, &other.repr) {
            (Repr::Basis(a), Repr::Basis(b)) => {
                let mut out = a.clone();
                for (&i, &c) in b {
                    let e = out.entry(i).or_insert(0);
                    *e = p.add(*e, c);
                    if *e == 0 {
                        out.remove(&i);
                    }
                }
                Repr::Basis(out)
            }
            (Repr::Poly(a), Repr::Poly(b)) => {
                let mut out = a.clone();
                for (expo, &c) in b {
                    let e = out.entry(expo.clone()).or_insert(0);
                    *e = p.add(*e, c);
                    if *e == 0 {
                        out.remove(expo);
                    }
                }
                Repr::Poly(out)
            }
            _ => return Err(Error::RingMismatch),
        };
        Ok(RingElem {
            owner: self.owner.clone(),
            repr,
        })
    }

    pub fn neg(&self) -> RingElem {
        let p = self.owner.modulus();
        let repr = match &self.repr {
            Repr::Basis(m) => Repr::Basis(m.iter().map(|(&i, &c)| (i, p.neg(c))).collect()),
            Repr::Poly(m) => Repr::Poly(m.iter().map(|(e, &c)| (e.clone(), p.neg(c))).collect()),
        };
        RingElem {
            owner: self.owner.clone(),
            repr,
        }
    }

    pub fn sub(&self, other: &RingElem) -> Result<RingElem> {
        self.add(&other.neg())
    }

    pub fn scale_fp(&self, c: u8) -> RingElem {
        let p = self.owner.modulus();
        let c = (c as u32 % p.get()) as u8;
        if c == 0 {
            return self.owner.zero();
        }
        let repr = match &self.repr {
            Repr::Basis(m) => Repr::Basis(m.iter().map(|(&i, &x)| (i, p.mul(x, c))).collect()),
            Repr::Poly(m) => Repr::Poly(m.iter().map(|(e, &x)| (e.clone(), p.mul(x, c))).collect()),
        };
        RingElem {
            owner: self.owner.clone(),
            repr,
        }
    }

    pub fn mul(&self, other: &RingElem) -> Result<RingElem> {
        self.check_owner(other)?;
        let p = self.owner.modulus();
        match (&self.repr, &other.repr) {
            (Repr::Basis(a), Repr::Basis(b)) => {
                let mut out: BTreeMap<u32, u8> = BTreeMap::new();
                for (&i, &ci) in a {
                    for (&j, &cj) in b {
                        let c = p.mul(ci, cj);
                        if c == 0 {
                            continue;
                        }
                        for (k, ck) in self.owner.mul_basis(i, j) {
                            let e = out.entry(k).or_insert(0);
                            *e = p.add(*e, p.mul(c, ck));
                            if *e == 0 {
                                out.remove(&k);
                            }
                        }
                    }
                }
                Ok(RingElem {
                    owner: self.owner.clone(),
                    repr: Repr::Basis(out),
                })
            }
            (Repr::Poly(a), Repr::Poly(b)) => {
                let mut out: BTreeMap<Vec<u16>, u8> = BTreeMap::new();
                for (ea, &ca) in a {
                    for (eb, &cb) in b {
                        let c = p.mul(ca, cb);
                        if c == 0 {
                            continue;
                        }
                        let expo: Vec<u16> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                        let e = out.entry(expo.clone()).or_insert(0);
                        *e = p.add(*e, c);
                        if *e == 0 {
                            out.remove(&expo);
                        }
                    }
                }
                Ok(RingElem {
                    owner: self.owner.clone(),
                    repr: Repr::Poly(out),
                })
            }
            _ => Err(Error::RingMismatch),
        }
    }

    pub fn pow(&self, mut e: u32) -> Result<RingElem> {
        let mut base = self.clone();
        let mut acc = self.owner.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Dense coefficient column over the F_p basis.
    pub fn to_fp_col(&self) -> Vec<u8> {
        let dim = self.owner.dim().expect("finite handle required");
        let mut v = vec![0u8; dim];
        if let Repr::Basis(m) = &self.repr {
            for (&i, &c) in m {
                v[i as usize] = c;
            }
        } else {
            panic!("to_fp_col on a polynomial element");
        }
        v
    }

    pub fn from_fp_col(owner: &RingHandle, col: &[u8]) -> RingElem {
        owner.elem_from_pairs(col.iter().enumerate().map(|(i, &c)| (i as u32, c)))
    }
}

/// The dim x dim matrix of multiplication by `e` on the F_p basis.
pub fn mul_matrix(r: &RingHandle, e: &RingElem) -> FpMat {
    let dim = r.dim().expect("finite handle required");
    let p = r.modulus();
    let mut m = FpMat::zeros(p, dim, dim);
    for (i, ci) in e.basis_pairs() {
        for j in 0..dim as u32 {
            for (k, ck) in r.mul_basis(i, j) {
                let v = p.add(m.get(k as usize, j as usize), p.mul(ci, ck));
                m.set(k as usize, j as usize, v);
            }
        }
    }
    m
}

// --- ring homomorphisms --------------------------------------------------

#[derive(Clone, Debug)]
enum HomKind {
    /// Images of the source basis; the map is their F_p-linear extension.
    BasisImages(Vec<RingElem>),
    /// Partial evaluation of a free polynomial ring: substitute constants for
    /// some variables, rename the rest into the target's variables.
    PolyEval {
        assignments: Vec<Option<u8>>,
        remaining: Vec<usize>,
    },
}

/// A ring homomorphism, applicable to elements and (for finite sources)
/// verifiable on basis pairs.
#[derive(Clone, Debug)]
pub struct RingHom {
    source: RingHandle,
    target: RingHandle,
    kind: HomKind,
}

impl RingHom {
    pub fn from_basis_images(
        source: RingHandle,
        target: RingHandle,
        images: Vec<RingElem>,
    ) -> Result<Self> {
        let dim = source.dim().ok_or(Error::InfiniteDimensional)?;
        if images.len() != dim {
            return Err(Error::ConstructionFailure(format!(
                "expected {dim} basis images, got {}",
                images.len()
            )));
        }
        for img in &images {
            if img.owner() != &target {
                return Err(Error::RingMismatch);
            }
        }
        Ok(RingHom {
            source,
            target,
            kind: HomKind::BasisImages(images),
        })
    }

    pub fn identity(r: &RingHandle) -> Result<Self> {
        let dim = r.dim().ok_or(Error::InfiniteDimensional)?;
        let images = (0..dim as u32).map(|i| r.basis_elem(i)).collect();
        RingHom::from_basis_images(r.clone(), r.clone(), images)
    }

    pub fn source(&self) -> &RingHandle {
        &self.source
    }

    pub fn target(&self) -> &RingHandle {
        &self.target
    }

    pub fn basis_images(&self) -> Option<&[RingElem]> {
        match &self.kind {
            HomKind::BasisImages(v) => Some(v),
            _ => None,
        }
    }

    pub fn apply(&self, e: &RingElem) -> Result<RingElem> {
        if e.owner() != &self.source {
            return Err(Error::RingMismatch);
        }
        match &self.kind {
            HomKind::BasisImages(images) => {
                let mut acc = self.target.zero();
                for (i, c) in e.basis_pairs() {
                    acc = acc.add(&images[i as usize].scale_fp(c))?;
                }
                Ok(acc)
            }
            HomKind::PolyEval {
                assignments,
                remaining,
            } => {
                let p = self.source.modulus();
                let target_finite = self.target.is_finite();
                let n_rem = remaining.len();
                if target_finite {
                    // all variables assigned; result is a constant
                    let mut acc = 0u8;
                    for (expo, c) in e.poly_terms() {
                        let mut term = c;
                        for (v, &ex) in expo.iter().enumerate() {
                            let a = assignments[v].expect("total assignment");
                            term = p.mul(term, p.pow(a, ex as u32));
                        }
                        acc = p.add(acc, term);
                    }
                    Ok(self.target.one().scale_fp(acc))
                } else {
                    let mut terms: Vec<(Vec<u16>, u8)> = Vec::new();
                    for (expo, c) in e.poly_terms() {
                        let mut coeff = c;
                        let mut new_expo = vec![0u16; n_rem];
                        for (v, &ex) in expo.iter().enumerate() {
                            match assignments[v] {
                                Some(a) => coeff = p.mul(coeff, p.pow(a, ex as u32)),
                                None => {
                                    let slot = remaining.iter().position(|&r| r == v).unwrap();
                                    new_expo[slot] = ex;
                                }
                            }
                        }
                        if coeff != 0 {
                            terms.push((new_expo, coeff));
                        }
                    }
                    self.target.poly_elem(terms)
                }
            }
        }
    }

    /// Checks multiplicativity on all basis pairs and preservation of 1.
    pub fn verify_hom(&self) -> Result<bool> {
        let HomKind::BasisImages(images) = &self.kind else {
            return Err(Error::Unsupported(
                "verify_hom needs a finite source basis".into(),
            ));
        };
        if self.apply(&self.source.one())? != self.target.one() {
            return Ok(false);
        }
        let dim = self.source.dim().unwrap() as u32;
        for i in 0..dim {
            for j in i..dim {
                let prod = self
                    .source
                    .elem_from_pairs(self.source.mul_basis(i, j));
                let lhs = self.apply(&prod)?;
                let rhs = images[i as usize].mul(&images[j as usize])?;
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Dense F_p matrix of the map (finite source and target).
    pub fn fp_matrix(&self) -> Result<FpMat> {
        let HomKind::BasisImages(images) = &self.kind else {
            return Err(Error::InfiniteDimensional);
        };
        let sdim = self.source.dim().unwrap();
        let tdim = self.target.dim().ok_or(Error::InfiniteDimensional)?;
        let mut m = FpMat::zeros(self.source.modulus(), tdim, sdim);
        for (j, img) in images.iter().enumerate() {
            for (i, c) in img.basis_pairs() {
                m.set(i as usize, j, c);
            }
        }
        Ok(m)
    }
}

// --- constructions --------------------------------------------------------

/// Tensor product over F_p with the slot inclusions `t_i(r) = 1⊗..⊗r⊗..⊗1`.
pub fn tensor_many(factors: &[RingHandle]) -> Result<(RingHandle, Vec<RingHom>)> {
    let desc = RingDescriptor::Tensor {
        factors: factors.iter().map(|f| f.descriptor().clone()).collect(),
    };
    let t = make_ring(&desc)?;
    let dims: Vec<u32> = factors
        .iter()
        .map(|f| f.dim().ok_or(Error::InfiniteDimensional).map(|d| d as u32))
        .collect::<Result<_>>()?;
    let mut inclusions = Vec::with_capacity(factors.len());
    for (slot, f) in factors.iter().enumerate() {
        let mut images = Vec::with_capacity(dims[slot] as usize);
        for b in 0..dims[slot] {
            // pure tensor: b in this slot, the unit everywhere else
            let mut acc: Vec<(u32, u8)> = vec![(0, 1)];
            for (k, g) in factors.iter().enumerate() {
                let part: Vec<(u32, u8)> = if k == slot {
                    vec![(b, 1)]
                } else {
                    g.one_pairs()
                };
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for (idx, c) in &acc {
                    for (j, cj) in &part {
                        next.push((idx * dims[k] + j, t.modulus().mul(*c, *cj)));
                    }
                }
                acc = next;
            }
            images.push(t.elem_from_pairs(acc));
        }
        inclusions.push(RingHom::from_basis_images(f.clone(), t.clone(), images)?);
    }
    Ok((t, inclusions))
}

/// Binary tensor product with its two inclusions.
pub fn tensor_ring(a: &RingHandle, b: &RingHandle) -> Result<(RingHandle, RingHom, RingHom)> {
    let (t, mut incs) = tensor_many(&[a.clone(), b.clone()])?;
    let t2 = incs.pop().unwrap();
    let t1 = incs.pop().unwrap();
    Ok((t, t1, t2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckMode {
    /// Every element in range was checked.
    Proved,
    /// Basis elements plus seeded random samples were checked.
    Sampled,
}

#[derive(Debug, Clone)]
pub struct PBoolVerdict {
    pub holds: bool,
    pub mode: CheckMode,
    pub witness: Option<RingElem>,
}

/// Exact p-booleanness by descriptor structure (no enumeration).
///
/// Frobenius is additive in characteristic p, so r^p = r on a spanning set
/// forces it everywhere; this resolves all descriptor kinds exactly.
pub fn is_pboolean_structural(r: &RingHandle) -> bool {
    match r.descriptor() {
        RingDescriptor::ProductFp { .. } | RingDescriptor::PBoolPoly { .. } => true,
        RingDescriptor::PolyRing { vars, .. } => vars.is_empty(),
        RingDescriptor::Tensor { .. } => r.tensor_factors().iter().all(is_pboolean_structural),
        RingDescriptor::Power { .. } => is_pboolean_structural(r.base_ring().unwrap()),
        // basis subsets are idempotent, so the group ring inherits from the base
        RingDescriptor::GroupRing { .. } => is_pboolean_structural(r.base_ring().unwrap()),
        RingDescriptor::TruncPoly { k, max_degree, .. } => *k == 0 || *max_degree == 0,
    }
}

/// Decides whether `r^p = r` holds for all elements: exhaustively when
/// `|R| <= 2^16`, otherwise on the basis plus seeded random samples.
pub fn is_pboolean(r: &RingHandle) -> PBoolVerdict {
    let p = r.p();
    if let Some(vars) = r.poly_vars() {
        if !vars.is_empty() {
            let witness = r.poly_var(0).unwrap();
            return PBoolVerdict {
                holds: false,
                mode: CheckMode::Proved,
                witness: Some(witness),
            };
        }
        // F_p itself
        return PBoolVerdict {
            holds: true,
            mode: CheckMode::Proved,
            witness: None,
        };
    }
    let dim = r.dim().expect("finite handle");
    let size = (p as u128).checked_pow(dim as u32);
    let exhaustive = matches!(size, Some(s) if s <= PBOOL_EXHAUST);
    if exhaustive {
        for elem in r.enumerate_elements() {
            let powp = elem.pow(p).unwrap();
            if powp != elem {
                return PBoolVerdict {
                    holds: false,
                    mode: CheckMode::Proved,
                    witness: Some(elem),
                };
            }
        }
        PBoolVerdict {
            holds: true,
            mode: CheckMode::Proved,
            witness: None,
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let candidates = (0..dim as u32)
            .map(|i| r.basis_elem(i))
            .chain(std::iter::once(r.one()))
            .chain((0..SAMPLE_COUNT).map(|_| r.random_elem(&mut rng)));
        for elem in candidates {
            let powp = elem.pow(p).unwrap();
            if powp != elem {
                return PBoolVerdict {
                    holds: false,
                    mode: CheckMode::Proved,
                    witness: Some(elem),
                };
            }
        }
        PBoolVerdict {
            holds: true,
            mode: CheckMode::Sampled,
            witness: None,
        }
    }
}

/// Canonical orthogonal idempotent family of a handle: the coordinate
/// idempotents of a product, or the telescoping family
/// `a_n = (1 - X_n^{p-1}) * prod_{i<n} X_i^{p-1}` of a p-boolean polynomial
/// quotient.
pub fn idempotent_family(r: &RingHandle) -> Result<Vec<RingElem>> {
    match r.descriptor() {
        RingDescriptor::ProductFp { m, .. } => {
            Ok((0..*m as u32).map(|i| r.basis_elem(i)).collect())
        }
        RingDescriptor::PBoolPoly { p, k } => {
            let e = (p - 1) as u8;
            let mut family = Vec::with_capacity(*k);
            for n in 1..=*k {
                // prod_{i<n} X_i^{p-1}, with and without the X_n factor
                let mut lead = vec![0u8; *k];
                for d in lead.iter_mut().take(n - 1) {
                    *d = e;
                }
                let mut full = lead.clone();
                full[n - 1] = e;
                let lead_idx = r.pbool_encode(&lead);
                let full_idx = r.pbool_encode(&full);
                family.push(r.elem_from_pairs([(lead_idx, 1u8), (full_idx, (p - 1) as u8)]));
            }
            Ok(family)
        }
        other => Err(Error::Unsupported(format!(
            "idempotent_family expects a product or p-boolean quotient, got {other:?}"
        ))),
    }
}

/// Complete set of primitive idempotents of a finite p-boolean ring
/// (equivalently, its points). The count always equals the dimension.
pub fn primitive_idempotents(r: &RingHandle) -> Result<Vec<RingElem>> {
    if !is_pboolean_structural(r) {
        return Err(Error::NotPBoolean(format!("{:?}", r.descriptor())));
    }
    let dim = r.dim().ok_or(Error::InfiniteDimensional)?;
    let p = r.p();
    let pm = r.modulus();
    let mut atoms = vec![r.one()];
    for b in 0..dim as u32 {
        let be = r.basis_elem(b);
        for c in 0..p as u8 {
            // indicator of the locus {b = c}, by Lagrange interpolation
            let mut num = r.one();
            let mut den = 1u8;
            for c2 in 0..p as u8 {
                if c2 == c {
                    continue;
                }
                num = num.mul(&be.sub(&r.one().scale_fp(c2))?)?;
                den = pm.mul(den, pm.sub(c, c2));
            }
            let e = num.scale_fp(pm.inv(den));
            let mut next = Vec::with_capacity(atoms.len());
            for a in atoms {
                let hit = a.mul(&e)?;
                let miss = a.sub(&hit)?;
                if !hit.is_zero() {
                    next.push(hit);
                }
                if !miss.is_zero() {
                    next.push(miss);
                }
            }
            atoms = next;
            if atoms.len() == dim {
                break;
            }
        }
        if atoms.len() == dim {
            break;
        }
    }
    if atoms.len() != dim {
        return Err(Error::ConstructionFailure(format!(
            "found {} primitive idempotents in a ring of dimension {dim}",
            atoms.len()
        )));
    }
    Ok(atoms)
}

/// Quotient of a free polynomial ring by linear forms `x_i - a_i`, realized
/// by substitution. Returns the residue ring and the evaluation map. Killing
/// every variable yields F_p (dimension 1), never the zero ring.
pub fn quotient_by_linear(
    r: &RingHandle,
    forms: &[(usize, u8)],
) -> Result<(RingHandle, RingHom)> {
    let vars = r
        .poly_vars()
        .ok_or_else(|| Error::Unsupported("quotient_by_linear needs a polynomial ring".into()))?;
    let mut assignments: Vec<Option<u8>> = vec![None; vars.len()];
    for &(v, a) in forms {
        if v >= vars.len() {
            return Err(Error::IndexOutOfRange {
                index: v,
                arity: vars.len(),
            });
        }
        if assignments[v].is_some() {
            return Err(Error::RepeatedVariable(vars[v].clone()));
        }
        assignments[v] = Some(a % r.p() as u8);
    }
    let remaining: Vec<usize> = (0..vars.len()).filter(|&v| assignments[v].is_none()).collect();
    let target = if remaining.is_empty() {
        make_ring(&RingDescriptor::ProductFp { p: r.p(), m: 1 })?
    } else {
        make_ring(&RingDescriptor::PolyRing {
            p: r.p(),
            vars: remaining.iter().map(|&v| vars[v].clone()).collect(),
        })?
    };
    let hom = RingHom {
        source: r.clone(),
        target: target.clone(),
        kind: HomKind::PolyEval {
            assignments,
            remaining,
        },
    };
    Ok((target, hom))
}

/// F_p-dimension of `R / (gens)` for a finite handle: the ideal is the
/// F_p-span of `g * b` over generators g and basis elements b.
pub fn quotient_dim_by_ideal(r: &RingHandle, gens: &[RingElem]) -> Result<usize> {
    let dim = r.dim().ok_or(Error::InfiniteDimensional)?;
    for g in gens {
        if g.owner() != r {
            return Err(Error::RingMismatch);
        }
    }
    if gens.is_empty() {
        return Ok(dim);
    }
    let mut m = FpMat::zeros(r.modulus(), dim, gens.len() * dim);
    for (gi, g) in gens.iter().enumerate() {
        for b in 0..dim as u32 {
            let prod = g.mul(&r.basis_elem(b))?;
            for (k, c) in prod.basis_pairs() {
                m.set(k as usize, gi * dim + b as usize, c);
            }
        }
    }
    Ok(dim - m.rank())
}
