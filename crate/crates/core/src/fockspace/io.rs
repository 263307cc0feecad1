use std::path::Path;

use serde::{Deserialize, Serialize};

use super::arena::LatticeVoa;
use super::key::FockKey;
use super::lattice::{Cocycle, Lattice};
use crate::algebra::{GradedVector, VertexAlgebra};
use crate::error::{Error, Result};
use crate::exactlin::Rational;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CocycleSpec {
    Named(String),
    Table { table: Vec<Vec<i8>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeFile {
    pub rank: usize,
    pub gram: Vec<Vec<i64>>,
    #[serde(default = "default_cocycle")]
    pub cocycle: CocycleSpec,
}

fn default_cocycle() -> CocycleSpec {
    CocycleSpec::Named("default".into())
}

impl LatticeFile {
    pub fn into_lattice(self) -> Result<Lattice> {
        if self.rank != self.gram.len() {
            return Err(Error::InvalidLattice(format!(
                "rank {} does not match gram size {}",
                self.rank,
                self.gram.len()
            )));
        }
        match self.cocycle {
            CocycleSpec::Named(name) if name == "default" => Lattice::new(self.gram),
            CocycleSpec::Named(name) => Err(Error::InvalidLattice(format!("unknown cocycle '{name}'"))),
            CocycleSpec::Table { table } => Lattice::with_cocycle(self.gram, Cocycle::from_table(table)),
        }
    }

    pub fn from_lattice(lattice: &Lattice) -> Self {
        let cocycle = if *lattice.cocycle() == Cocycle::standard(lattice.gram()) {
            default_cocycle()
        } else {
            CocycleSpec::Table { table: lattice.cocycle().table().to_vec() }
        };
        LatticeFile { rank: lattice.rank(), gram: lattice.gram().to_vec(), cocycle }
    }
}

pub fn parse_lattice(json: &str) -> Result<Lattice> {
    let f: LatticeFile = serde_json::from_str(json)?;
    f.into_lattice()
}

pub fn read_lattice(path: &Path) -> Result<Lattice> {
    parse_lattice(&std::fs::read_to_string(path)?)
}

/// One term of a serialized vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorTerm {
    pub charge: Vec<i64>,
    pub parts: Vec<[u32; 3]>,
    pub coeff: Rational,
}

pub fn vector_to_terms(voa: &LatticeVoa, v: &GradedVector) -> Vec<VectorTerm> {
    voa.to_keys(v)
        .into_iter()
        .map(|(k, c)| VectorTerm {
            charge: k.charge,
            parts: k.parts.iter().map(|&(i, n, m)| [i as u32, n, m]).collect(),
            coeff: c,
        })
        .collect()
}

pub fn terms_to_vector(voa: &LatticeVoa, terms: &[VectorTerm]) -> Result<GradedVector> {
    let mut pairs = Vec::new();
    for t in terms {
        if t.charge.len() != voa.rank() {
            return Err(Error::Parse(format!("charge {:?} has the wrong rank", t.charge)));
        }
        if t.parts.iter().any(|p| p[0] as usize >= voa.rank() || p[1] == 0) {
            return Err(Error::Parse("invalid Heisenberg part".into()));
        }
        let key = FockKey::new(t.charge.clone(), t.parts.iter().map(|p| (p[0] as usize, p[1], p[2])).collect());
        pairs.push((key, t.coeff.clone()));
    }
    voa.from_keys(&pairs)
}

/// Serialized arena: bases per weight, vacuum and conformal vector.
#[derive(Clone, Debug, Serialize)]
pub struct ArenaArtifact {
    pub lattice: LatticeFile,
    pub cutoff: u32,
    pub dims: Vec<usize>,
    pub central_charge: Rational,
    pub bases: Vec<Vec<String>>,
    pub vacuum: Vec<VectorTerm>,
    pub omega: Vec<VectorTerm>,
}

impl ArenaArtifact {
    pub fn new(voa: &LatticeVoa) -> Self {
        let g = voa.grading();
        ArenaArtifact {
            lattice: LatticeFile::from_lattice(voa.lattice()),
            cutoff: voa.cutoff(),
            dims: g.dims(),
            central_charge: voa.central_charge(),
            bases: (0..=voa.cutoff()).map(|w| g.range(w).map(|i| voa.label(i)).collect()).collect(),
            vacuum: vector_to_terms(voa, &voa.vacuum()),
            omega: vector_to_terms(voa, voa.conformal()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_json_forms() {
        let l = parse_lattice(r#"{"rank":1,"gram":[[2]],"cocycle":"default"}"#).unwrap();
        assert_eq!(l.rank(), 1);
        let l = parse_lattice(r#"{"rank":1,"gram":[[2]],"cocycle":{"table":[[-1]]}}"#).unwrap();
        assert_eq!(l.cocycle().entry(0, 0), -1);
        assert!(parse_lattice(r#"{"rank":2,"gram":[[2]]}"#).is_err());
        assert!(parse_lattice(r#"{"rank":1,"gram":[[3]]}"#).is_err());
        assert!(parse_lattice(r#"{"rank":1,"gram":[[2]],"cocycle":"other"}"#).is_err());
    }

    #[test]
    fn vector_roundtrip() {
        let voa = LatticeVoa::build(Lattice::new(vec![vec![2]]).unwrap(), 3).unwrap();
        let w = voa.conformal().clone();
        let terms = vector_to_terms(&voa, &w);
        let json = serde_json::to_string(&terms).unwrap();
        assert_eq!(json, r#"[{"charge":[0],"parts":[[0,1,2]],"coeff":"1/4"}]"#);
        let back: Vec<VectorTerm> = serde_json::from_str(&json).unwrap();
        assert_eq!(terms_to_vector(&voa, &back).unwrap(), w);
    }
}
