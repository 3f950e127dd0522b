//! JSON schemas shared by the library and the CLI.
//!
//! - lattice: `{"name": str?, "gram": [[int]]}`, or a preset tag string such as `"K3n:2"`
//! - vector: `{"lattice": ref, "coords": ["p/q" | int]}`
//! - isometry: `{"lattice": ref, "matrix": [["p/q" | int]]}`
//! - normal form: `{"k": int, "gammas": [isometry], "us": [vector]}`
//! - symmetric-power element: `{"space": {"base": ref, "n": int}, "coords": {"i,j,...": "p/q"}}`,
//!   sparse over monomials in the base basis (indices sorted, comma-separated)
//!
//! LLV objects use the lattice tag `"llv(<tag>)"`.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::NormalForm;
use crate::isometry::Isometry;
use crate::lattice::{Lattice, Preset};
use crate::llv::LlvSpace;
use crate::matrix::{QMat, QVec};
use crate::rat::Rat;
use crate::snrep::SnSpace;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub gram: Vec<Vec<Rat>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeRef {
    Tag(String),
    Inline(LatticeJson),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorJson {
    pub lattice: LatticeRef,
    pub coords: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsometryJson {
    pub lattice: LatticeRef,
    pub matrix: Vec<Vec<Rat>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormJson {
    pub k: usize,
    pub gammas: Vec<IsometryJson>,
    pub us: Vec<VectorJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymSpaceJson {
    pub base: LatticeRef,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymEltJson {
    pub space: SymSpaceJson,
    pub coords: BTreeMap<String, Rat>,
}

pub fn lattice_json(lat: &Lattice) -> LatticeJson {
    LatticeJson { name: lat.name().map(str::to_string), gram: lat.gram().to_rows() }
}

/// Presets are referenced by tag, other lattices inline.
pub fn lattice_ref(lat: &Lattice) -> LatticeRef {
    match lat.preset_tag() {
        Some(p) => LatticeRef::Tag(p.tag()),
        None => LatticeRef::Inline(lattice_json(lat)),
    }
}

pub fn llv_ref(base: &Lattice) -> LatticeRef {
    match lattice_ref(base) {
        LatticeRef::Tag(t) => LatticeRef::Tag(format!("llv({t})")),
        LatticeRef::Inline(j) => LatticeRef::Inline(LatticeJson { name: Some("llv".into()), gram: j.gram }),
    }
}

pub fn lattice_from_json(j: &LatticeJson) -> Result<Lattice> {
    let n = j.gram.len();
    if j.gram.iter().any(|r| r.len() != n) {
        return Err(Error::Precondition("Gram matrix must be square".into()));
    }
    Lattice::custom(j.name.clone(), QMat::from_rows(j.gram.clone()))
}

/// Resolves a reference. `llv(<tag>)` resolves to the base lattice, with the flag set.
pub fn resolve(r: &LatticeRef) -> Result<(Lattice, bool)> {
    match r {
        LatticeRef::Tag(t) => {
            let t = t.trim();
            let lower = t.to_ascii_lowercase();
            if lower.starts_with("llv(") && lower.ends_with(')') {
                Ok((Lattice::preset(&Preset::parse(&t[4..t.len() - 1])?), true))
            } else {
                Ok((Lattice::preset(&Preset::parse(t)?), false))
            }
        }
        LatticeRef::Inline(j) => Ok((lattice_from_json(j)?, false)),
    }
}

pub fn resolve_plain(r: &LatticeRef) -> Result<Lattice> {
    match resolve(r)? {
        (l, false) => Ok(l),
        (_, true) => Err(Error::Precondition("expected a lattice, found an LLV space".into())),
    }
}

pub fn vector_json(r: LatticeRef, v: &[Rat]) -> VectorJson {
    VectorJson { lattice: r, coords: v.to_vec() }
}

pub fn isometry_json(r: LatticeRef, m: &QMat) -> IsometryJson {
    IsometryJson { lattice: r, matrix: m.to_rows() }
}

pub fn matrix_from_rows(rows: &[Vec<Rat>]) -> Result<QMat> {
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != c) {
        return Err(Error::Precondition("ragged matrix".into()));
    }
    Ok(QMat::from_rows(rows.to_vec()))
}

impl VectorJson {
    pub fn read(&self) -> Result<(Lattice, QVec)> {
        let lat = resolve_plain(&self.lattice)?;
        crate::error::check_dim(lat.rank(), self.coords.len())?;
        Ok((lat, self.coords.clone()))
    }
}

impl IsometryJson {
    pub fn read(&self) -> Result<(Lattice, Isometry)> {
        let lat = resolve_plain(&self.lattice)?;
        let m = matrix_from_rows(&self.matrix)?;
        Ok((lat.clone(), Isometry::new(&lat, m)?))
    }
}

pub fn normal_form_json(lat: &Lattice, nf: &NormalForm) -> NormalFormJson {
    let r = lattice_ref(lat);
    NormalFormJson {
        k: nf.k,
        gammas: nf.gammas.iter().map(|g| isometry_json(r.clone(), g)).collect(),
        us: nf.us.iter().map(|u| vector_json(r.clone(), u)).collect(),
    }
}

impl NormalFormJson {
    /// The lattice of the first gamma, and the normal form; all factors must share it.
    pub fn read(&self) -> Result<(Lattice, NormalForm)> {
        let first = self.gammas.first().ok_or_else(|| Error::Precondition("normal form has no gammas".into()))?;
        let lat = resolve_plain(&first.lattice)?;
        let mut gammas = Vec::new();
        for g in &self.gammas {
            if resolve_plain(&g.lattice)? != lat {
                return Err(Error::Precondition("factors live on different lattices".into()));
            }
            gammas.push(matrix_from_rows(&g.matrix)?);
        }
        let mut us = Vec::new();
        for u in &self.us {
            let (l, v) = u.read()?;
            if l != lat {
                return Err(Error::Precondition("factors live on different lattices".into()));
            }
            us.push(v);
        }
        Ok((lat, NormalForm { k: self.k, gammas, us }))
    }
}

/// An element of S_[n] given in S-coordinates.
pub fn sym_elt_json(sp: &SnSpace, s: &[Rat]) -> SymEltJson {
    let base = match sp.llv() {
        Some(l) => llv_ref(l.base()),
        None => lattice_ref(sp.lattice()),
    };
    let p = sp.to_sym(s);
    let coords = p
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| {
            let key: Vec<String> = sp.sym().monomial(sp.n(), i).iter().map(u16::to_string).collect();
            (key.join(","), c.clone())
        })
        .collect();
    SymEltJson { space: SymSpaceJson { base, n: sp.n() }, coords }
}

impl SymEltJson {
    /// The space and the S-coordinates; the polynomial must lie in S_[n].
    pub fn read(&self) -> Result<(SnSpace, QVec)> {
        let (lat, is_llv) = resolve(&self.space.base)?;
        let sp = if is_llv { SnSpace::over_llv(&LlvSpace::new(&lat), self.space.n)? } else { SnSpace::new(&lat, self.space.n)? };
        let mut p = vec![Rat::zero(); sp.sym_dim()];
        for (key, c) in &self.coords {
            let mut m = Vec::new();
            for part in key.split(',') {
                let i: u16 = part.trim().parse().map_err(|_| Error::Precondition(format!("bad monomial {key:?}")))?;
                if i as usize >= sp.base_dim() {
                    return Err(Error::Precondition(format!("bad monomial {key:?}")));
                }
                m.push(i);
            }
            m.sort_unstable();
            if m.len() != sp.n() {
                return Err(Error::Precondition(format!("monomial {key:?} does not have degree {}", sp.n())));
            }
            let i = sp.sym().index_of(&m).expect("sorted in-range monomial");
            p[i] += c;
        }
        let s = sp.coords(&p)?;
        Ok((sp, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_refs_round_trip() {
        let lat = Lattice::preset(&Preset::K3n(3));
        let r = lattice_ref(&lat);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, "\"K3n:3\"");
        let back: LatticeRef = serde_json::from_str(&s).unwrap();
        assert_eq!(resolve_plain(&back).unwrap(), lat);
        let (base, is_llv) = resolve(&llv_ref(&lat)).unwrap();
        assert!(is_llv);
        assert_eq!(base, lat);
    }

    #[test]
    fn inline_lattice_and_vector() {
        let s = r#"{"lattice": {"gram": [[2, 1], [1, 2]]}, "coords": [1, "-1/2"]}"#;
        let v: VectorJson = serde_json::from_str(s).unwrap();
        let (lat, x) = v.read().unwrap();
        assert_eq!(lat.rank(), 2);
        assert_eq!(x[1], Rat::new(-1, 2));
        let again = serde_json::to_string(&vector_json(lattice_ref(&lat), &x)).unwrap();
        let back: VectorJson = serde_json::from_str(&again).unwrap();
        assert_eq!(back.coords, x);
    }

    #[test]
    fn sym_elements_round_trip() {
        let lat = Lattice::preset(&Preset::U);
        let llv = LlvSpace::new(&lat);
        let sp = SnSpace::over_llv(&llv, 3).unwrap();
        let v = vec![Rat::int(1), Rat::int(2), Rat::int(0), Rat::int(0)];
        let s = sp.power(&v).unwrap();
        let j = sym_elt_json(&sp, &s);
        let text = serde_json::to_string(&j).unwrap();
        let back: SymEltJson = serde_json::from_str(&text).unwrap();
        let (sp2, s2) = back.read().unwrap();
        assert_eq!(sp2.dim(), sp.dim());
        assert_eq!(s2, s);
        let bad = SymEltJson { coords: [("1,2,2".to_string(), Rat::int(1))].into(), ..j };
        assert!(bad.read().is_err());
    }

    #[test]
    fn floats_rejected() {
        let s = r#"{"lattice": "U", "coords": [1.5, 0]}"#;
        assert!(serde_json::from_str::<VectorJson>(s).is_err());
    }
}
