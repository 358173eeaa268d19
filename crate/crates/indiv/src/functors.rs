//! Free-algebra functors on modules and maps: the p-boolean free algebra
//! `R[X_s]/(X_s^p - X_s)` (exact and finite), degree-truncated symmetric
//! algebra slices, the split-cokernel decomposition in the finite free case,
//! the faithful-flatness checker for finite p-boolean maps, and the assembled
//! tensor map of a candidate sequence.

use crate::error::{Error, Result};
use crate::index::IndexSet;
use crate::modules::LinMap;
use crate::ring::{
    is_pboolean_structural, make_ring, primitive_idempotents, tensor_many, RingDescriptor,
    RingElem, RingHandle, RingHom,
};
use crate::group_ring::gr_make;
use crate::indivisibility::IndivSpec;
use crate::linalg::FpSolver;
use crate::solver::RingSystem;
use crate::splitting::left_inverse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgKind {
    /// `base[X_s]/(X_s^p - X_s)`: exact, dimension `p^{gens}` over the base.
    FpFree,
    /// Degree-truncated symmetric algebra slice; flagged, not exact.
    SymTrunc { degree: usize },
}

/// A free algebra on a generator set over a base ring, realized as
/// `base ⊗ quotient` with the quotient carrying the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeAlgebraHandle {
    kind: AlgKind,
    base: RingHandle,
    generators: IndexSet,
    ring: RingHandle,
}

impl FreeAlgebraHandle {
    pub fn kind(&self) -> AlgKind {
        self.kind
    }

    pub fn base(&self) -> &RingHandle {
        &self.base
    }

    pub fn generators(&self) -> &IndexSet {
        &self.generators
    }

    pub fn ring(&self) -> &RingHandle {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.ring.dim().unwrap()
    }

    pub fn truncated(&self) -> bool {
        matches!(self.kind, AlgKind::SymTrunc { .. })
    }

    fn inner(&self) -> &RingHandle {
        &self.ring.tensor_factors()[1]
    }

    fn inner_dim(&self) -> u32 {
        self.inner().dim().unwrap() as u32
    }

    /// `b ⊗ 1` for a base element.
    pub fn base_embed(&self, e: &RingElem) -> Result<RingElem> {
        if e.owner() != &self.base {
            return Err(Error::RingMismatch);
        }
        let idim = self.inner_dim();
        Ok(self
            .ring
            .elem_from_pairs(e.basis_pairs().into_iter().map(|(i, c)| (i * idim, c))))
    }

    /// The generator `X_g`.
    pub fn generator(&self, g: usize) -> Result<RingElem> {
        if g >= self.generators.len() {
            return Err(Error::IndexOutOfRange {
                index: g,
                arity: self.generators.len(),
            });
        }
        let mut expo = vec![0u16; self.generators.len()];
        expo[g] = 1;
        let mono = self.inner().monomial_index(&expo)?;
        let idim = self.inner_dim();
        Ok(self.ring.elem_from_pairs(
            self.base
                .one()
                .basis_pairs()
                .into_iter()
                .map(|(i, c)| (i * idim + mono, c)),
        ))
    }
}

/// `F^p` of a free module: `base[X_s]/(X_s^p - X_s)`, dimension `p^{|S|}`
/// over the base. The base must be p-boolean.
pub fn fp_free(base: &RingHandle, generators: &IndexSet) -> Result<FreeAlgebraHandle> {
    if !is_pboolean_structural(base) {
        return Err(Error::NotPBoolean(format!("{:?}", base.descriptor())));
    }
    let inner = RingDescriptor::PBoolPoly {
        p: base.p(),
        k: generators.len(),
    };
    let ring = make_ring(&RingDescriptor::Tensor {
        factors: vec![base.descriptor().clone(), inner],
    })?;
    Ok(FreeAlgebraHandle {
        kind: AlgKind::FpFree,
        base: base.clone(),
        generators: generators.clone(),
        ring,
    })
}

/// The degree-`d` slice of the symmetric algebra on a free module.
pub fn sym_trunc(base: &RingHandle, generators: &IndexSet, d: usize) -> Result<FreeAlgebraHandle> {
    let inner = RingDescriptor::TruncPoly {
        p: base.p(),
        k: generators.len(),
        max_degree: d,
    };
    let ring = make_ring(&RingDescriptor::Tensor {
        factors: vec![base.descriptor().clone(), inner],
    })?;
    Ok(FreeAlgebraHandle {
        kind: AlgKind::SymTrunc { degree: d },
        base: base.clone(),
        generators: generators.clone(),
        ring,
    })
}

/// An algebra map determined by generator images, extended multiplicatively
/// over base-linear combinations of monomials.
#[derive(Debug, Clone)]
pub struct AlgebraMap {
    source: FreeAlgebraHandle,
    target: FreeAlgebraHandle,
    gen_images: Vec<RingElem>,
}

impl AlgebraMap {
    pub fn new(
        source: FreeAlgebraHandle,
        target: FreeAlgebraHandle,
        gen_images: Vec<RingElem>,
    ) -> Result<Self> {
        if source.base != target.base {
            return Err(Error::RingMismatch);
        }
        if gen_images.len() != source.generators.len() {
            return Err(Error::IndexMismatch(format!(
                "{} generator images for {} generators",
                gen_images.len(),
                source.generators.len()
            )));
        }
        for img in &gen_images {
            if img.owner() != &target.ring {
                return Err(Error::RingMismatch);
            }
        }
        Ok(AlgebraMap {
            source,
            target,
            gen_images,
        })
    }

    pub fn source(&self) -> &FreeAlgebraHandle {
        &self.source
    }

    pub fn target(&self) -> &FreeAlgebraHandle {
        &self.target
    }

    pub fn gen_images(&self) -> &[RingElem] {
        &self.gen_images
    }

    /// Image of one source basis element `b ⊗ X^e`.
    fn basis_image(&self, idx: u32) -> Result<RingElem> {
        let idim = self.source.inner_dim();
        let base_idx = idx / idim;
        let mono = idx % idim;
        let expo = self.source.inner().monomial_exponents(mono)?;
        let mut acc = self
            .target
            .base_embed(&self.source.base.basis_elem(base_idx))?;
        for (g, &e) in expo.iter().enumerate() {
            for _ in 0..e {
                acc = acc.mul(&self.gen_images[g])?;
            }
        }
        Ok(acc)
    }

    pub fn apply(&self, e: &RingElem) -> Result<RingElem> {
        if e.owner() != &self.source.ring {
            return Err(Error::RingMismatch);
        }
        let mut acc = self.target.ring.zero();
        for (i, c) in e.basis_pairs() {
            acc = acc.add(&self.basis_image(i)?.scale_fp(c))?;
        }
        Ok(acc)
    }

    /// The induced map on full bases as a plain ring homomorphism.
    pub fn as_ring_hom(&self) -> Result<RingHom> {
        let dim = self.source.dim();
        let images = (0..dim as u32)
            .map(|i| self.basis_image(i))
            .collect::<Result<Vec<_>>>()?;
        RingHom::from_basis_images(self.source.ring.clone(), self.target.ring.clone(), images)
    }

    /// Checks unit preservation, multiplicativity on generator pairs, and
    /// preservation of the defining relations (`X^p = X` for the exact kind,
    /// degree-1 images for truncated slices).
    pub fn verify_hom(&self) -> Result<bool> {
        let one_src = self.source.ring.one();
        if self.apply(&one_src)? != self.target.ring.one() {
            return Ok(false);
        }
        let k = self.source.generators.len();
        for u in 0..k {
            let xu = self.source.generator(u)?;
            let iu = self.apply(&xu)?;
            match self.source.kind {
                AlgKind::FpFree => {
                    if iu.pow(self.source.ring.p())? != iu {
                        return Ok(false);
                    }
                }
                AlgKind::SymTrunc { .. } => {
                    // degree-preserving by construction: images must be
                    // homogeneous of degree one in the target generators
                    let idim = self.target.inner_dim();
                    for (idx, _) in iu.basis_pairs() {
                        let expo = self.target.inner().monomial_exponents(idx % idim)?;
                        let total: usize = expo.iter().map(|&e| e as usize).sum();
                        if total != 1 {
                            return Ok(false);
                        }
                    }
                }
            }
            for v in u..k {
                let xv = self.source.generator(v)?;
                let lhs = self.apply(&xu.mul(&xv)?)?;
                let rhs = iu.mul(&self.apply(&xv)?)?;
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// `F^p` applied to a module map between free modules: the generator at a
/// source position goes to the degree-1 polynomial read off its column.
pub fn fp_map(psi: &LinMap) -> Result<AlgebraMap> {
    let base = psi.ring();
    let source = fp_free(base, psi.source())?;
    let target = fp_free(base, psi.target())?;
    build_functor_map(psi, source, target)
}

/// The degree-truncated symmetric algebra applied to a module map.
pub fn sym_trunc_map(psi: &LinMap, d: usize) -> Result<AlgebraMap> {
    if d == 0 {
        return Err(Error::ConstructionFailure("truncation degree must be >= 1".into()));
    }
    let base = psi.ring();
    let source = sym_trunc(base, psi.source(), d)?;
    let target = sym_trunc(base, psi.target(), d)?;
    build_functor_map(psi, source, target)
}

fn build_functor_map(
    psi: &LinMap,
    source: FreeAlgebraHandle,
    target: FreeAlgebraHandle,
) -> Result<AlgebraMap> {
    let mut gen_images = Vec::with_capacity(psi.source().len());
    for u in 0..psi.source().len() {
        let mut img = target.ring().zero();
        for (v, c) in psi.column(u).iter() {
            img = img.add(&target.base_embed(c)?.mul(&target.generator(v)?)?)?;
        }
        gen_images.push(img);
    }
    let map = AlgebraMap::new(source, target, gen_images)?;
    if !map.verify_hom()? {
        return Err(Error::NotAHomomorphism(
            "functor image failed the generator-pair check".into(),
        ));
    }
    Ok(map)
}

/// Outcome of the finite free-cokernel splitting: the retraction, an R-basis
/// of the complement, and the verified product decomposition of the free
/// algebras.
#[derive(Debug)]
pub struct LazardReport {
    pub retraction: LinMap,
    pub complement_rank: usize,
    /// (dim F^p(N), dim F^p(M) ⊗_R F^p(K)) — equal when the check passes.
    pub fp_dims: (usize, usize),
    pub iso_verified: bool,
}

/// For a split injection `f: M -> N` of finite free modules with free
/// cokernel `K`, produces the decomposition `N ≅ M ⊕ K` and verifies
/// `F^p(N) ≅ F^p(M) ⊗ F^p(K)` by dimension count and an explicit generator
/// isomorphism.
pub fn lazard_split_check(f: &LinMap) -> Result<LazardReport> {
    let ring = f.ring();
    let dim = ring.dim().ok_or(Error::InfiniteDimensional)?;
    let out = left_inverse(f, None)?;
    let Some(r) = out.inverse else {
        return Err(Error::NonFreeCokernel("the map does not split".into()));
    };
    // projector onto the complement of the image
    let fr = LinMap::compose(f, &r)?;
    let id = LinMap::identity(ring, f.target());
    let mut proj_cols = Vec::with_capacity(f.target().len());
    for t in 0..f.target().len() {
        proj_cols.push(id.column(t).sub(fr.column(t))?);
    }
    let proj = LinMap::from_columns(ring, f.target(), f.target(), proj_cols)?;

    // R-basis of the projector image, fiber by fiber: over a finite
    // p-boolean ring the image is free iff every fiber e_x·(im proj) has the
    // same F_p-dimension k, and summing matching fiber bases over the
    // primitive idempotents yields a free basis of rank k
    let prims = primitive_idempotents(ring)?;
    let nfp = f.target().len() * dim;
    let rank_of = |rows: &[Vec<u8>]| -> usize {
        if rows.is_empty() {
            return 0;
        }
        let mut m = crate::linalg::FpMat::zeros(ring.modulus(), rows.len(), nfp);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m.rank()
    };
    let mut fiber_bases: Vec<Vec<crate::modules::FinVec>> = Vec::with_capacity(prims.len());
    let mut k_rank_opt: Option<usize> = None;
    for e in &prims {
        let mut rows: Vec<Vec<u8>> = Vec::new();
        let mut kept: Vec<crate::modules::FinVec> = Vec::new();
        for t in 0..f.target().len() {
            let v = proj.column(t).scale(e)?;
            if v.is_zero() {
                continue;
            }
            let mut trial = rows.clone();
            trial.push(v.to_fp_vec());
            if rank_of(&trial) > rows.len() {
                rows = trial;
                kept.push(v);
            }
        }
        match k_rank_opt {
            None => k_rank_opt = Some(kept.len()),
            Some(k) if k == kept.len() => {}
            Some(k) => {
                return Err(Error::NonFreeCokernel(format!(
                    "fiber dimensions differ ({k} vs {}), the complement is projective but not free",
                    kept.len()
                )))
            }
        }
        fiber_bases.push(kept);
    }
    let k_rank = k_rank_opt.unwrap_or(0);
    let coker_fp = f.target().len() * dim - f.fp_matrix()?.rank();
    if k_rank * prims.len() != coker_fp {
        return Err(Error::NonFreeCokernel(format!(
            "fiber ranks cover {} of the cokernel dimension {coker_fp}",
            k_rank * prims.len()
        )));
    }
    let mut basis: Vec<crate::modules::FinVec> = Vec::with_capacity(k_rank);
    for j in 0..k_rank {
        let mut v = crate::modules::FinVec::zero(ring, f.target());
        for fb in &fiber_bases {
            v = v.add(&fb[j])?;
        }
        basis.push(v);
    }

    // coordinates of proj(e) in the complement basis, solved over R
    let mut sys = RingSystem::new(ring, f.target().len(), k_rank);
    for (i, b) in basis.iter().enumerate() {
        for (t, c) in b.iter() {
            sys.push(t, i, c.clone())?;
        }
    }
    let solver = sys.factor(None)?;

    // θ: N -> M ⊕ K
    let m_index = f.source().clone();
    let k_index = IndexSet::numbered(k_rank);
    let mk = IndexSet::union(vec![m_index.clone(), k_index.clone()]);
    let mut theta_cols = Vec::with_capacity(f.target().len());
    for t in 0..f.target().len() {
        let e = crate::modules::FinVec::delta(ring, f.target(), t);
        let rm = r.apply(&e)?;
        let pk = proj.apply(&e)?;
        let rhs: Vec<RingElem> = (0..f.target().len()).map(|u| pk.get(u)).collect();
        let coords = match solver.solve(&rhs)? {
            Ok(x) => x,
            Err(_) => {
                return Err(Error::NonFreeCokernel(
                    "projector image missed the complement span".into(),
                ))
            }
        };
        let mut col = crate::modules::FinVec::zero(ring, &mk);
        for (u, c) in rm.iter() {
            col.set(mk.encode_union(0, u), c.clone());
        }
        for (i, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                col.set(mk.encode_union(1, i), c.clone());
            }
        }
        theta_cols.push(col);
    }
    let theta = LinMap::from_columns(ring, f.target(), &mk, theta_cols)?;
    let theta_rank = theta.fp_matrix()?.rank();
    if theta_rank != f.target().len() * dim {
        return Err(Error::NonFreeCokernel(
            "module decomposition is not bijective".into(),
        ));
    }

    // F^p level: dimension equality and the explicit generator isomorphism
    let fp_n = fp_free(ring, f.target())?;
    let fp_mk = fp_free(ring, &mk)?;
    let dims = (fp_n.dim(), fp_mk.dim());
    let iso = build_functor_map(&theta, fp_n.clone(), fp_mk.clone())?;
    let iso_hom = iso.as_ring_hom()?;
    let iso_verified =
        dims.0 == dims.1 && iso_hom.fp_matrix()?.rank() == dims.0 && iso.verify_hom()?;
    Ok(LazardReport {
        retraction: r,
        complement_rank: k_rank,
        fp_dims: dims,
        iso_verified,
    })
}

#[derive(Debug, Clone)]
pub struct FaithfulFlatReport {
    pub faithfully_flat: bool,
    /// A primitive idempotent killed by the map, when not faithful.
    pub dead_idempotent: Option<RingElem>,
    /// Injectivity of the underlying F_p map; faithfully flat ring maps are
    /// injective, so this is asserted on every positive verdict.
    pub injective: bool,
}

/// Faithful flatness of a map of finite p-boolean rings. Flatness is
/// automatic (such rings are products of F_p, hence von Neumann regular);
/// faithfulness means every primitive idempotent of the source survives.
pub fn faithfully_flat_check(hom: &RingHom) -> Result<FaithfulFlatReport> {
    for side in [hom.source(), hom.target()] {
        if !side.is_finite() || !is_pboolean_structural(side) {
            return Err(Error::NotPBoolean(format!("{:?}", side.descriptor())));
        }
    }
    for e in primitive_idempotents(hom.source())? {
        if hom.apply(&e)?.is_zero() {
            return Ok(FaithfulFlatReport {
                faithfully_flat: false,
                dead_idempotent: Some(e),
                injective: false,
            });
        }
    }
    let m = hom.fp_matrix()?;
    let injective = FpSolver::new(&m, None).rank() == hom.source().dim().unwrap();
    if !injective {
        return Err(Error::ConstructionFailure(
            "faithful verdict contradicts a non-injective map".into(),
        ));
    }
    Ok(FaithfulFlatReport {
        faithfully_flat: true,
        dead_idempotent: None,
        injective,
    })
}

/// The base-changed map emitted alongside the tensor track: in the split
/// coordinates it is the unit of `R{⊔S_i} ⊗ (p-boolean algebra on n
/// generators)`.
#[derive(Debug)]
pub struct BaseChangedMap {
    pub hom: RingHom,
    pub report: FaithfulFlatReport,
}

#[derive(Debug)]
pub struct MainMapBundle {
    pub fp_track: AlgebraMap,
    pub fp_report: FaithfulFlatReport,
    pub per_factor_lazard: Vec<LazardReport>,
    pub base_changed: BaseChangedMap,
    pub sym_track: AlgebraMap,
    pub sym_truncated_at: usize,
}

/// Assembles the tensor of the per-entry functor maps for a sequence over a
/// finite p-boolean ring: sources tensor to one free algebra on the tagged
/// union of the index sets, targets add one extra generator per entry. The
/// result must pass the faithful-flatness check; a failure is a construction
/// bug, not a verdict.
///
/// Also emits the degree-truncated symmetric track and the base change to
/// the boolean group ring, using the per-factor splittings to put it in
/// product coordinates.
pub fn main_map_builder(spec: &IndivSpec, sym_degree: usize) -> Result<MainMapBundle> {
    let ring = spec.ring();
    if !ring.is_finite() || !is_pboolean_structural(ring) {
        return Err(Error::NotPBoolean(format!("{:?}", ring.descriptor())));
    }
    let n = spec.n();
    let sets: Vec<IndexSet> = spec.entries().iter().map(|e| e.index.clone()).collect();
    let source_gens = IndexSet::union(sets.clone());
    let mut target_blocks = Vec::with_capacity(2 * n);
    for s in &sets {
        target_blocks.push(IndexSet::point());
        target_blocks.push(s.clone());
    }
    let target_gens = IndexSet::union(target_blocks);

    let fp_source = fp_free(ring, &source_gens)?;
    let fp_target = fp_free(ring, &target_gens)?;
    let sym_source = sym_trunc(ring, &source_gens, sym_degree)?;
    let sym_target = sym_trunc(ring, &target_gens, sym_degree)?;

    let mut fp_images = Vec::with_capacity(source_gens.len());
    let mut sym_images = Vec::with_capacity(source_gens.len());
    for pos in 0..source_gens.len() {
        let (i, s) = source_gens.decode_union(pos);
        let value = &spec.entries()[i].psi[s];
        let unit_slot = target_gens.encode_union(2 * i, 0);
        let s_slot = target_gens.encode_union(2 * i + 1, s);
        let fp_img = fp_target.generator(unit_slot)?.add(
            &fp_target
                .base_embed(value)?
                .mul(&fp_target.generator(s_slot)?)?,
        )?;
        fp_images.push(fp_img);
        let sym_img = sym_target.generator(unit_slot)?.add(
            &sym_target
                .base_embed(value)?
                .mul(&sym_target.generator(s_slot)?)?,
        )?;
        sym_images.push(sym_img);
    }
    let fp_track = AlgebraMap::new(fp_source, fp_target, fp_images)?;
    if !fp_track.verify_hom()? {
        return Err(Error::NotAHomomorphism("assembled tensor map".into()));
    }
    let sym_track = AlgebraMap::new(sym_source, sym_target, sym_images)?;
    if !sym_track.verify_hom()? {
        return Err(Error::NotAHomomorphism("truncated symmetric track".into()));
    }
    let fp_report = faithfully_flat_check(&fp_track.as_ring_hom()?)?;
    if !fp_report.faithfully_flat {
        return Err(Error::ConstructionFailure(
            "assembled tensor map failed faithful flatness".into(),
        ));
    }

    // per-factor splittings justify the product coordinates of the base
    // change: each cokernel is free of rank one
    let mut per_factor_lazard = Vec::with_capacity(n);
    for i in 0..n {
        let rep = lazard_split_check(&spec.psi_linmap(i)?)?;
        if rep.complement_rank != 1 || !rep.iso_verified {
            return Err(Error::ConstructionFailure(format!(
                "entry {i} cokernel is not free of rank one"
            )));
        }
        per_factor_lazard.push(rep);
    }
    let gring = gr_make(ring, &source_gens)?;
    let pbool_n = make_ring(&RingDescriptor::PBoolPoly { p: ring.p(), k: n })?;
    let (_, incs) = tensor_many(&[gring.handle().clone(), pbool_n])?;
    let unit = incs.into_iter().next().unwrap();
    let report = faithfully_flat_check(&unit)?;
    if !report.faithfully_flat {
        return Err(Error::ConstructionFailure(
            "base-changed unit failed faithful flatness".into(),
        ));
    }
    Ok(MainMapBundle {
        fp_track,
        fp_report,
        per_factor_lazard,
        base_changed: BaseChangedMap { hom: unit, report },
        sym_track,
        sym_truncated_at: sym_degree,
    })
}
