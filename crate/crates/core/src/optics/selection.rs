//! Optical selection rules of the C3v double group and the polarization bookkeeping of a
//! zero-phonon line.
//!
//! | pair               | E_1/2 | 1E_3/2 | 2E_3/2 |
//! |--------------------|-------|--------|--------|
//! | **E_1/2**          | Z, XY | XY     | XY     |
//! | **1E_3/2**         | XY    | -      | Z      |
//! | **2E_3/2**         | XY    | Z      | -      |
//!
//! Z is the A1 dipole component (E parallel to c), XY the E pair (E perpendicular to c).

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryLabel {
    EHalfPlus,
    EHalfMinus,
    EThreeHalf1,
    EThreeHalf2,
}

impl SymmetryLabel {
    pub const ALL: [SymmetryLabel; 4] = [
        SymmetryLabel::EHalfPlus,
        SymmetryLabel::EHalfMinus,
        SymmetryLabel::EThreeHalf1,
        SymmetryLabel::EThreeHalf2,
    ];

    fn class(self) -> usize {
        match self {
            SymmetryLabel::EHalfPlus | SymmetryLabel::EHalfMinus => 0,
            SymmetryLabel::EThreeHalf1 => 1,
            SymmetryLabel::EThreeHalf2 => 2,
        }
    }
}

/// Dipole components allowed between two levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Allowed {
    pub z: bool,
    pub xy: bool,
}

impl Allowed {
    pub const NONE: Allowed = Allowed { z: false, xy: false };
    pub const Z: Allowed = Allowed { z: true, xy: false };
    pub const XY: Allowed = Allowed { z: false, xy: true };
    pub const BOTH: Allowed = Allowed { z: true, xy: true };
}

const TABLE: [[Allowed; 3]; 3] = [
    [Allowed::BOTH, Allowed::XY, Allowed::XY],
    [Allowed::XY, Allowed::NONE, Allowed::Z],
    [Allowed::XY, Allowed::Z, Allowed::NONE],
];

pub fn allowed_polarizations(a: SymmetryLabel, b: SymmetryLabel) -> Allowed {
    TABLE[a.class()][b.class()]
}

/// Exact rational read from `"p/q"`, `"p"` or an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exact(pub Rational);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Exact(Rational::from_integer(i))),
            Raw::Text(s) => Rational::from_str(s.trim())
                .map(Exact)
                .map_err(|e| serde::de::Error::custom(format!("bad rational {s:?}: {e}"))),
        }
    }
}

fn one() -> Exact {
    Exact(Rational::from_integer(1))
}

fn half() -> Exact {
    Exact(Rational::new(1, 2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sublevel {
    pub label: SymmetryLabel,
    #[serde(default = "one")]
    pub weight: Exact,
    /// Spin content, informational.
    #[serde(default)]
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pairing {
    pub ground: usize,
    pub excited: usize,
    /// Multiplies g_weight * e_weight.
    #[serde(default = "one")]
    pub scale: Exact,
    /// Share going to Z when both components are allowed.
    #[serde(default = "half")]
    pub z_fraction: Exact,
}

impl Pairing {
    pub fn new(ground: usize, excited: usize) -> Self {
        Self {
            ground,
            excited,
            scale: one(),
            z_fraction: half(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionPreset {
    pub name: String,
    #[serde(default)]
    pub note: String,
    pub ground: Vec<Sublevel>,
    pub excited: Vec<Sublevel>,
    pub pairing: Vec<Pairing>,
}

/// Accumulated (E parallel c, E perpendicular c) weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarizationWeights {
    pub parallel: Rational,
    pub perpendicular: Rational,
}

impl PolarizationWeights {
    /// Ratio parallel / perpendicular as a float.
    pub fn ratio(&self) -> f64 {
        to_f64(self.parallel) / to_f64(self.perpendicular)
    }

    /// Both weights divided by their gcd-free common scale, e.g. (3, 1).
    pub fn reduced(&self) -> (i64, i64) {
        let r = self.parallel / self.perpendicular;
        (*r.numer(), *r.denom())
    }
}

impl fmt::Display for PolarizationWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.parallel, self.perpendicular)
    }
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn polarization_ratio(ground: &[Sublevel], excited: &[Sublevel], pairing: &[Pairing]) -> Result<PolarizationWeights> {
    let zero = Rational::from_integer(0);
    let (mut par, mut perp) = (zero, zero);
    for (k, p) in pairing.iter().enumerate() {
        let (Some(g), Some(e)) = (ground.get(p.ground), excited.get(p.excited)) else {
            return Err(Error::invalid(
                "pairing",
                format!("entry {k} refers to a missing sublevel ({}, {})", p.ground, p.excited),
            ));
        };
        let s = p.z_fraction.0;
        if s < zero || s > Rational::from_integer(1) {
            return Err(Error::invalid("z_fraction", format!("entry {k}: must lie in [0, 1]")));
        }
        let w = g.weight.0 * e.weight.0 * p.scale.0;
        match allowed_polarizations(g.label, e.label) {
            Allowed { z: true, xy: true } => {
                par += w * s;
                perp += w * (Rational::from_integer(1) - s);
            }
            Allowed { z: true, xy: false } => par += w,
            Allowed { z: false, xy: true } => perp += w,
            Allowed { z: false, xy: false } => {}
        }
    }
    Ok(PolarizationWeights {
        parallel: par,
        perpendicular: perp,
    })
}

impl SelectionPreset {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("preset", e.to_string()))
    }

    pub fn weights(&self) -> Result<PolarizationWeights> {
        polarization_ratio(&self.ground, &self.excited, &self.pairing)
    }

    pub fn v1() -> Self {
        Self::from_json(include_str!("../../presets/v1.json")).expect("bundled preset parses")
    }

    pub fn v1_prime() -> Self {
        Self::from_json(include_str!("../../presets/v1_prime.json")).expect("bundled preset parses")
    }

    pub fn bundled(name: &str) -> Option<Self> {
        match name {
            "v1" => Some(Self::v1()),
            "v1_prime" => Some(Self::v1_prime()),
            _ => None,
        }
    }
}
