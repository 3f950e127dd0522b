//! Rational isometries, their characters, and subgroup membership.

use std::fmt;

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::lattice::{DiscAction, Lattice};
use crate::matrix::{QMat, QVec};
use crate::rat::Rat;

/// A matrix `M` (acting on column vectors) with `MᵀGM = G`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Isometry {
    m: QMat,
}

impl fmt::Debug for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Isometry({:?})", self.m)
    }
}

pub fn is_isometry(lat: &Lattice, m: &QMat) -> bool {
    m.is_square() && m.rows() == lat.rank() && m.transpose().mul(&lat.gram().mul(m)) == *lat.gram()
}

impl Isometry {
    pub fn new(lat: &Lattice, m: QMat) -> Result<Isometry> {
        check_dim(lat.rank(), m.rows())?;
        check_dim(lat.rank(), m.cols())?;
        if !is_isometry(lat, &m) {
            return Err(Error::NotIsometry);
        }
        Ok(Isometry { m })
    }

    /// Skips the isometry check outside debug builds; for matrices that are
    /// isometries by construction.
    pub(crate) fn trusted(lat: &Lattice, m: QMat) -> Isometry {
        debug_assert!(is_isometry(lat, &m), "constructed matrix is not an isometry");
        Isometry { m }
    }

    pub fn identity(rank: usize) -> Isometry {
        Isometry { m: QMat::identity(rank) }
    }

    pub fn minus_identity(rank: usize) -> Isometry {
        Isometry { m: QMat::scalar(rank, Rat::int(-1)) }
    }

    pub fn matrix(&self) -> &QMat {
        &self.m
    }

    pub fn into_matrix(self) -> QMat {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.m.rows()
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry { m: self.m.mul(&other.m) }
    }

    pub fn neg(&self) -> Isometry {
        Isometry { m: self.m.neg() }
    }

    /// `G⁻¹ Mᵀ G`
    pub fn inverse(&self, lat: &Lattice) -> Isometry {
        Isometry { m: lat.gram_inv().mul(&self.m.transpose()).mul(lat.gram()) }
    }

    pub fn apply(&self, v: &[Rat]) -> QVec {
        self.m.mul_vec(v)
    }

    pub fn is_integral(&self) -> bool {
        self.m.is_integral()
    }

    pub fn is_identity(&self) -> bool {
        self.m.is_identity()
    }

    pub fn det_sign(&self) -> i32 {
        self.m.det().signum()
    }
}

/// Product of a list of isometries, left to right.
pub fn product<'a>(rank: usize, factors: impl IntoIterator<Item = &'a Isometry>) -> Isometry {
    factors.into_iter().fold(Isometry::identity(rank), |acc, f| acc.compose(f))
}

/// Orientation character with respect to the positive-definite subspace spanned by `frame`.
pub fn nu_with_frame(lat: &Lattice, frame: &[QVec], m: &QMat) -> i32 {
    if frame.is_empty() {
        return 1;
    }
    let p = QMat::from_columns(lat.rank(), frame);
    let proj = p.transpose().mul(&lat.gram().mul(&m.mul(&p)));
    let s = proj.det().signum();
    assert!(s != 0, "degenerate projection of a positive subspace");
    s
}

pub fn nu(lat: &Lattice, m: &QMat) -> i32 {
    nu_with_frame(lat, lat.positive_frame(), m)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Characters {
    pub nu: i32,
    pub det: i32,
    pub disc: DiscAction,
}

pub fn characters(lat: &Lattice, g: &Isometry) -> Characters {
    let disc = if g.is_integral() { lat.disc_group().classify(g.matrix()) } else { DiscAction::NotApplicable };
    Characters { nu: nu(lat, g.matrix()), det: g.det_sign(), disc }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Group {
    O,
    OPlus,
    Gamma,
    Gamma0,
    MonK3n,
}

impl Group {
    pub fn parse(s: &str) -> Result<Group> {
        match s.to_ascii_lowercase().as_str() {
            "o" => Ok(Group::O),
            "o+" | "oplus" => Ok(Group::OPlus),
            "gamma" => Ok(Group::Gamma),
            "gamma0" => Ok(Group::Gamma0),
            "mon_k3n" | "mon" | "monk3n" => Ok(Group::MonK3n),
            _ => Err(Error::Precondition(format!("unknown group {s:?}"))),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Group::O => "O",
            Group::OPlus => "O+",
            Group::Gamma => "Gamma",
            Group::Gamma0 => "Gamma0",
            Group::MonK3n => "Mon_K3n",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub group: &'static str,
    pub member: bool,
    pub integral: bool,
    pub nu: i32,
    pub det: i32,
    pub disc: &'static str,
    /// First failed condition, if any.
    pub failed: Option<&'static str>,
}

pub fn membership(lat: &Lattice, g: &Isometry, group: Group) -> Result<Membership> {
    match group {
        Group::Gamma | Group::Gamma0 if lat.delta().is_none() => {
            return Err(Error::IncompatibleGroup { group: group.tag().into(), needs: "a lattice of the form L + Z delta" })
        }
        Group::MonK3n if !matches!(lat.preset_tag(), Some(crate::lattice::Preset::K3n(_))) => {
            return Err(Error::IncompatibleGroup { group: group.tag().into(), needs: "a K3n preset" })
        }
        _ => {}
    }
    let ch = characters(lat, g);
    let integral = g.is_integral();
    let failed = if !integral {
        Some("integral")
    } else {
        match group {
            Group::O => None,
            Group::OPlus if ch.nu != 1 => Some("nu"),
            Group::OPlus => None,
            Group::Gamma | Group::MonK3n if ch.nu != 1 => Some("nu"),
            Group::Gamma | Group::MonK3n if ch.disc.sign().is_none() => Some("disc"),
            Group::Gamma | Group::MonK3n => None,
            Group::Gamma0 if ch.nu != 1 => Some("nu"),
            Group::Gamma0 => match ch.disc.sign() {
                Some(xi) if xi * ch.det == 1 => None,
                Some(_) => Some("det*xi"),
                None => Some("disc"),
            },
        }
    };
    Ok(Membership {
        group: group.tag(),
        member: failed.is_none(),
        integral,
        nu: ch.nu,
        det: ch.det,
        disc: ch.disc.label(),
        failed,
    })
}

pub fn is_in(lat: &Lattice, g: &Isometry, group: Group) -> bool {
    membership(lat, g, group).map(|m| m.member).unwrap_or(false)
}
