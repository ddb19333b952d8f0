//! Model files. Numbers are written with 17 significant digits so that
//! every binary64 weight survives a save/load round trip exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::families::{FamilyKind, ParametricFamily};
use crate::network::GeneratorNetwork;

pub const FORMAT_VERSION: u32 = 1;

/// Shortest text form with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn raw_number(v: f64) -> Result<Box<RawValue>> {
    if !v.is_finite() {
        return Err(Error::degenerate(format!("cannot serialize non-finite weight {v}")));
    }
    Ok(RawValue::from_string(format_f64(v))?)
}

fn raw_vec(v: &[f64]) -> Result<Vec<Box<RawValue>>> {
    v.iter().map(|&x| raw_number(x)).collect()
}

#[derive(Serialize)]
struct NetworkOut {
    format_version: u32,
    #[serde(rename = "L")]
    depth: usize,
    #[serde(rename = "H")]
    widths: Vec<usize>,
    #[serde(rename = "phi_A")]
    phi_a: Vec<Vec<Vec<Box<RawValue>>>>,
    #[serde(rename = "phi_B")]
    phi_b: Vec<Vec<Box<RawValue>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
}

#[derive(Serialize)]
struct FamilyOut {
    format_version: u32,
    family: FamilyKind,
    theta: Box<RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
#[allow(non_snake_case)]
enum ModelIn {
    Network {
        format_version: u32,
        L: usize,
        H: Vec<usize>,
        phi_A: Vec<Vec<Vec<f64>>>,
        phi_B: Vec<Vec<f64>>,
        #[serde(default)]
        dimension: Option<usize>,
    },
    Family {
        format_version: u32,
        family: FamilyKind,
        theta: f64,
        #[serde(default)]
        dimension: Option<usize>,
    },
}

/// Contents of a model file: a generator plus the copula dimension it was
/// fitted for, when recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub generator: crate::copula::Generator,
    pub dimension: Option<usize>,
}

impl ModelFile {
    pub fn to_json(&self) -> Result<String> {
        let text = match &self.generator {
            crate::copula::Generator::Network(net) => {
                let doc = NetworkOut {
                    format_version: FORMAT_VERSION,
                    depth: net.depth(),
                    widths: net.widths().to_vec(),
                    phi_a: net
                        .phi_a_nested()
                        .iter()
                        .map(|layer| layer.iter().map(|row| raw_vec(row)).collect())
                        .collect::<Result<_>>()?,
                    phi_b: net.phi_b_nested().iter().map(|l| raw_vec(l)).collect::<Result<_>>()?,
                    dimension: self.dimension,
                };
                serde_json::to_string_pretty(&doc)?
            }
            crate::copula::Generator::Family(f) => {
                let doc = FamilyOut {
                    format_version: FORMAT_VERSION,
                    family: f.kind(),
                    theta: raw_number(f.theta())?,
                    dimension: self.dimension,
                };
                serde_json::to_string_pretty(&doc)?
            }
        };
        Ok(text + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelIn = serde_json::from_str(text)?;
        let check_version = |v: u32| -> Result<()> {
            if v != FORMAT_VERSION {
                return Err(Error::Structural(format!("unsupported model format version {v}")));
            }
            Ok(())
        };
        match doc {
            ModelIn::Network { format_version, L, H, phi_A, phi_B, dimension } => {
                check_version(format_version)?;
                if L != H.len() {
                    return Err(Error::Structural(format!("L = {L} but H lists {} widths", H.len())));
                }
                let net = GeneratorNetwork::from_nested(H, &phi_A, &phi_B)?;
                Ok(ModelFile { generator: net.into(), dimension })
            }
            ModelIn::Family { format_version, family, theta, dimension } => {
                check_version(format_version)?;
                Ok(ModelFile { generator: ParametricFamily::new(family, theta)?.into(), dimension })
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Serialize a network alone.
pub fn network_to_json(net: &GeneratorNetwork) -> Result<String> {
    ModelFile { generator: net.clone().into(), dimension: None }.to_json()
}

/// Parse a network document; parametric documents are rejected.
pub fn network_from_json(text: &str) -> Result<GeneratorNetwork> {
    match ModelFile::from_json(text)?.generator {
        crate::copula::Generator::Network(net) => Ok(net),
        crate::copula::Generator::Family(_) => {
            Err(Error::Structural("expected a network model, found a parametric family".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network_round_trip_is_exact() {
        let net = GeneratorNetwork::init(&[10, 10], 99).unwrap();
        let text = network_to_json(&net).unwrap();
        let back = network_from_json(&text).unwrap();
        assert_eq!(back.raw_weights(), net.raw_weights());
        assert!(text.contains("\"format_version\": 1"));
    }

    #[test]
    fn family_round_trip() {
        let m = ModelFile {
            generator: ParametricFamily::new(FamilyKind::Frank, 15.0).unwrap().into(),
            dimension: Some(2),
        };
        assert_eq!(ModelFile::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn rejects_mismatched_documents() {
        let bad = r#"{"format_version": 1, "L": 2, "H": [1], "phi_A": [[[0.0]], [[0.0]]], "phi_B": [[0.0]]}"#;
        assert!(ModelFile::from_json(bad).is_err());
        let v2 = r#"{"format_version": 2, "family": "clayton", "theta": 2.0}"#;
        assert!(ModelFile::from_json(v2).is_err());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_f64(1.0 / 3.0).len(), "3.3333333333333331e-1".len());
    }
}
