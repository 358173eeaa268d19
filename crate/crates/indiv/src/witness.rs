//! On-disk certificate formats with content digests and replay verification.
//! A serialized witness can be re-checked bit-exactly without re-solving
//! anything; corruption is reported with the first offending location.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::index::IndexSet;
use crate::indivisibility::{IndivEntry, IndivSpec};
use crate::modules::{psi_map, FinVec, LinMap};
use crate::ring::{make_ring, RingDescriptor, RingElem, RingHandle};
use crate::splitting::{build_obstruction, verify_star, SplitWitness};

pub const SPLIT_WITNESS_VERSION: &str = "indiv-witness-v1";
pub const LEFT_INVERSE_VERSION: &str = "indiv-leftinv-v1";
pub const LINMAP_VERSION: &str = "indiv-linmap-v1";

/// Element payload: sparse basis pairs or sparse polynomial terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "repr", content = "terms", rename_all = "snake_case")]
pub enum ElemData {
    Basis(Vec<(u32, u8)>),
    Poly(Vec<(Vec<u16>, u8)>),
}

pub fn elem_to_data(e: &RingElem) -> ElemData {
    if e.is_poly() {
        ElemData::Poly(e.poly_terms())
    } else {
        ElemData::Basis(e.basis_pairs())
    }
}

pub fn elem_from_data(r: &RingHandle, d: &ElemData) -> Result<RingElem> {
    match d {
        ElemData::Basis(pairs) => {
            let dim = r.dim().ok_or(Error::InfiniteDimensional)?;
            for (i, _) in pairs {
                if *i as usize >= dim {
                    return Err(Error::WitnessFormat(format!(
                        "basis index {i} out of range {dim}"
                    )));
                }
            }
            Ok(r.elem_from_pairs(pairs.iter().copied()))
        }
        ElemData::Poly(terms) => r.poly_elem(terms.iter().cloned()),
    }
}

/// Golden-file form of a linear map: sparse columns over explicit index sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinMapData {
    pub version: String,
    pub ring: RingDescriptor,
    pub source: IndexSet,
    pub target: IndexSet,
    pub columns: Vec<Vec<(usize, ElemData)>>,
}

pub fn linmap_to_data(f: &LinMap) -> LinMapData {
    LinMapData {
        version: LINMAP_VERSION.into(),
        ring: f.ring().descriptor().clone(),
        source: f.source().clone(),
        target: f.target().clone(),
        columns: f
            .columns()
            .iter()
            .map(|c| c.iter().map(|(p, e)| (p, elem_to_data(e))).collect())
            .collect(),
    }
}

pub fn linmap_from_data(d: &LinMapData) -> Result<LinMap> {
    if d.version != LINMAP_VERSION {
        return Err(Error::WitnessFormat(format!(
            "linmap version {} (expected {LINMAP_VERSION})",
            d.version
        )));
    }
    let ring = make_ring(&d.ring)?;
    let mut columns = Vec::with_capacity(d.columns.len());
    for col in &d.columns {
        let entries = col
            .iter()
            .map(|(p, e)| Ok((*p, elem_from_data(&ring, e)?)))
            .collect::<Result<Vec<_>>>()?;
        columns.push(FinVec::from_entries(&ring, &d.target, entries)?);
    }
    LinMap::from_columns(&ring, &d.source, &d.target, columns)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryData {
    pub index: IndexSet,
    pub psi: Vec<ElemData>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndivSpecData {
    pub ring: RingDescriptor,
    pub entries: Vec<EntryData>,
}

pub fn spec_to_data(spec: &IndivSpec) -> IndivSpecData {
    IndivSpecData {
        ring: spec.ring().descriptor().clone(),
        entries: spec
            .entries()
            .iter()
            .map(|e| EntryData {
                index: e.index.clone(),
                psi: e.psi.iter().map(elem_to_data).collect(),
            })
            .collect(),
    }
}

pub fn spec_from_data(d: &IndivSpecData) -> Result<IndivSpec> {
    let ring = make_ring(&d.ring)?;
    let entries = d
        .entries
        .iter()
        .map(|e| {
            Ok(IndivEntry {
                index: e.index.clone(),
                psi: e
                    .psi
                    .iter()
                    .map(|x| elem_from_data(&ring, x))
                    .collect::<Result<Vec<_>>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    IndivSpec::new(ring, entries)
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Content digest of any serializable payload (sha-256 of its JSON form).
pub fn digest_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(value)?))
}

#[derive(Serialize)]
struct SplitPayload<'a> {
    version: &'a str,
    spec: &'a IndivSpecData,
    seed: Option<u64>,
    r: &'a LinMapData,
}

/// A solved obstruction splitting, replayable from the sequence data alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitWitnessFile {
    pub version: String,
    pub spec: IndivSpecData,
    pub seed: Option<u64>,
    pub r: LinMapData,
    pub digest: String,
}

impl SplitWitnessFile {
    pub fn create(spec: &IndivSpec, seed: Option<u64>, witness: &SplitWitness) -> Result<Self> {
        let spec_data = spec_to_data(spec);
        let r = linmap_to_data(&witness.r);
        let digest = sha256_hex(&serde_json::to_vec(&SplitPayload {
            version: SPLIT_WITNESS_VERSION,
            spec: &spec_data,
            seed,
            r: &r,
        })?);
        Ok(SplitWitnessFile {
            version: SPLIT_WITNESS_VERSION.into(),
            spec: spec_data,
            seed,
            r,
            digest,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(Error::WitnessFormat("empty witness file".into()));
        }
        Ok(serde_json::from_str(s)?)
    }

    /// Re-verifies the stored witness without re-solving: digest, shapes,
    /// `r ∘ F = E` entrywise, and the per-tuple equation at every tuple.
    pub fn verify(&self) -> Result<Verification> {
        if self.version != SPLIT_WITNESS_VERSION {
            return Err(Error::WitnessFormat(format!(
                "witness version {} (expected {SPLIT_WITNESS_VERSION})",
                self.version
            )));
        }
        let recomputed = sha256_hex(&serde_json::to_vec(&SplitPayload {
            version: SPLIT_WITNESS_VERSION,
            spec: &self.spec,
            seed: self.seed,
            r: &self.r,
        })?);
        if recomputed != self.digest {
            return Ok(Verification::fail("digest mismatch"));
        }
        let spec = spec_from_data(&self.spec)?;
        let d = build_obstruction(&spec)?;
        let r = linmap_from_data(&self.r)?;
        if r.source() != d.f_map().target() || r.target() != d.module_index() {
            return Ok(Verification::fail("witness map has the wrong shape"));
        }
        let composed = LinMap::compose(&r, d.f_map())?;
        for t in 0..d.product().len() {
            let diff = composed.column(t).sub(d.e_map().column(t))?;
            if let Some(&mask) = diff.support().first() {
                return Ok(Verification::fail(format!(
                    "r∘F differs from E at tuple {t}, subset mask {mask}"
                )));
            }
        }
        let w = SplitWitness { r, residual: 0 };
        for t in 0..d.product().len() {
            if !verify_star(&d, &w, t)? {
                return Ok(Verification::fail(format!(
                    "splitting equation fails at tuple {t}"
                )));
            }
        }
        Ok(Verification::ok())
    }
}

#[derive(Serialize)]
struct LeftInvPayload<'a> {
    version: &'a str,
    ring: &'a RingDescriptor,
    index: &'a IndexSet,
    psi: &'a [ElemData],
    inverse: &'a LinMapData,
}

/// A left-inverse certificate for a single augmented map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeftInverseFile {
    pub version: String,
    pub ring: RingDescriptor,
    pub index: IndexSet,
    pub psi: Vec<ElemData>,
    pub inverse: LinMapData,
    pub digest: String,
}

impl LeftInverseFile {
    pub fn create(
        ring: &RingHandle,
        index: &IndexSet,
        psi: &[RingElem],
        inverse: &LinMap,
    ) -> Result<Self> {
        let psi_data: Vec<ElemData> = psi.iter().map(elem_to_data).collect();
        let inv_data = linmap_to_data(inverse);
        let digest = sha256_hex(&serde_json::to_vec(&LeftInvPayload {
            version: LEFT_INVERSE_VERSION,
            ring: ring.descriptor(),
            index,
            psi: &psi_data,
            inverse: &inv_data,
        })?);
        Ok(LeftInverseFile {
            version: LEFT_INVERSE_VERSION.into(),
            ring: ring.descriptor().clone(),
            index: index.clone(),
            psi: psi_data,
            inverse: inv_data,
            digest,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(Error::WitnessFormat("empty certificate file".into()));
        }
        Ok(serde_json::from_str(s)?)
    }

    pub fn verify(&self) -> Result<Verification> {
        if self.version != LEFT_INVERSE_VERSION {
            return Err(Error::WitnessFormat(format!(
                "certificate version {} (expected {LEFT_INVERSE_VERSION})",
                self.version
            )));
        }
        let recomputed = sha256_hex(&serde_json::to_vec(&LeftInvPayload {
            version: LEFT_INVERSE_VERSION,
            ring: &self.ring,
            index: &self.index,
            psi: &self.psi,
            inverse: &self.inverse,
        })?);
        if recomputed != self.digest {
            return Ok(Verification::fail("digest mismatch"));
        }
        let ring = make_ring(&self.ring)?;
        let psi = self
            .psi
            .iter()
            .map(|d| elem_from_data(&ring, d))
            .collect::<Result<Vec<_>>>()?;
        let f = psi_map(&ring, &self.index, &psi)?;
        let inv = linmap_from_data(&self.inverse)?;
        let composed = LinMap::compose(&inv, &f)?;
        let id = LinMap::identity(&ring, &self.index);
        for pos in 0..self.index.len() {
            if composed.column(pos) != id.column(pos) {
                return Ok(Verification::fail(format!(
                    "r∘psi differs from the identity at column {pos}"
                )));
            }
        }
        Ok(Verification::ok())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub ok: bool,
    pub failure: Option<String>,
}

impl Verification {
    fn ok() -> Self {
        Verification {
            ok: true,
            failure: None,
        }
    }

    fn fail(msg: impl Into<String>) -> Self {
        Verification {
            ok: false,
            failure: Some(msg.into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indivisibility::idempotent_example_spec;
    use crate::splitting::solve_obstruction;

    #[test]
    fn split_witness_round_trip_and_corruption() {
        let r = make_ring(&RingDescriptor::ProductFp { p: 2, m: 2 }).unwrap();
        let spec = idempotent_example_spec(&r, None).unwrap();
        let d = build_obstruction(&spec).unwrap();
        let out = solve_obstruction(&d, Some(5)).unwrap();
        let w = out.witness().unwrap();
        let file = SplitWitnessFile::create(&spec, Some(5), w).unwrap();
        let json = file.to_json().unwrap();
        let back = SplitWitnessFile::from_json(&json).unwrap();
        assert!(back.verify().unwrap().ok);

        // corrupt one coefficient: verification localizes the failure
        let mut bad = back.clone();
        let col = &mut bad.r.columns[0];
        match &mut col[0].1 {
            ElemData::Basis(pairs) => pairs[0].1 ^= 1,
            ElemData::Poly(_) => unreachable!(),
        }
        let v = bad.verify().unwrap();
        assert!(!v.ok);
        assert!(v.failure.unwrap().contains("digest"));

        // fix the digest but keep the corruption: the replay catches it
        let fixed_digest = sha256_hex(
            &serde_json::to_vec(&SplitPayload {
                version: SPLIT_WITNESS_VERSION,
                spec: &bad.spec,
                seed: bad.seed,
                r: &bad.r,
            })
            .unwrap(),
        );
        bad.digest = fixed_digest;
        let v = bad.verify().unwrap();
        assert!(!v.ok);
        assert!(v.failure.unwrap().contains("tuple"));

        // empty file is a parse error
        assert!(SplitWitnessFile::from_json("").is_err());
    }

    #[test]
    fn left_inverse_file_round_trip() {
        use crate::splitting::left_inverse;
        let r = make_ring(&RingDescriptor::ProductFp { p: 3, m: 3 }).unwrap();
        let spec = idempotent_example_spec(&r, None).unwrap();
        let e = &spec.entries()[0];
        let f = psi_map(&r, &e.index, &e.psi).unwrap();
        let inv = left_inverse(&f, None).unwrap().inverse.unwrap();
        let file = LeftInverseFile::create(&r, &e.index, &e.psi, &inv).unwrap();
        let back = LeftInverseFile::from_json(&file.to_json().unwrap()).unwrap();
        assert!(back.verify().unwrap().ok);
        assert_eq!(back.digest, file.digest);
    }

    #[test]
    fn linmap_golden_file_layout() {
        // the on-disk layout is pinned: a change here is a format break and
        // must come with a version bump
        let r = make_ring(&RingDescriptor::ProductFp { p: 2, m: 2 }).unwrap();
        let s = IndexSet::atoms(["a"]).unwrap();
        let f = psi_map(&r, &s, &[r.basis_elem(1)]).unwrap();
        let json = serde_json::to_string(&linmap_to_data(&f)).unwrap();
        assert_eq!(
            json,
            concat!(
                r#"{"version":"indiv-linmap-v1","ring":{"kind":"product_fp","p":2,"m":2},"#,
                r#""source":{"shape":"atoms","labels":["a"]},"#,
                r#""target":{"shape":"union","factors":[{"shape":"product","factors":[]},"#,
                r#"{"shape":"atoms","labels":["a"]}]},"#,
                r#""columns":[[[0,{"repr":"basis","terms":[[0,1],[1,1]]}],"#,
                r#"[1,{"repr":"basis","terms":[[1,1]]}]]]}"#,
            )
        );
        let back = linmap_from_data(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn poly_elem_data_round_trip() {
        let r = make_ring(&RingDescriptor::PolyRing {
            p: 3,
            vars: vec!["x".into(), "y".into()],
        })
        .unwrap();
        let e = r
            .poly_var(0)
            .unwrap()
            .mul(&r.poly_var(1).unwrap())
            .unwrap()
            .add(&r.one().scale_fp(2))
            .unwrap();
        let d = elem_to_data(&e);
        assert_eq!(elem_from_data(&r, &d).unwrap(), e);
    }
}
