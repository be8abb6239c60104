//! Cone interchange format: `{"alphabet": [...], "cells": [{"normals": [[...], ...]}, ...]}`.

use serde::{Deserialize, Serialize};

use super::{Alphabet, DcCone};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CellJson {
    pub normals: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConeJson {
    pub alphabet: Vec<String>,
    pub cells: Vec<CellJson>,
}

impl From<&DcCone> for ConeJson {
    fn from(cone: &DcCone) -> Self {
        let c = cone.canonical();
        ConeJson {
            alphabet: c.alphabet().symbols().to_vec(),
            cells: c.cells().iter().map(|cell| CellJson { normals: cell.normals().to_vec() }).collect(),
        }
    }
}

impl TryFrom<ConeJson> for DcCone {
    type Error = Error;

    fn try_from(j: ConeJson) -> Result<DcCone> {
        let alphabet = Alphabet::new(j.alphabet)?;
        DcCone::from_cells(alphabet, j.cells.into_iter().map(|c| c.normals).collect())
    }
}

impl DcCone {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ConeJson::from(self)).expect("cone serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<DcCone> {
        let j: ConeJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::Input(format!("bad cone JSON: {e}")))?;
        DcCone::try_from(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::equals_cone;

    #[test]
    fn round_trip() {
        let a = Alphabet::new(["ok", "lost"]).unwrap();
        let cones = [
            DcCone::empty(a.clone()),
            DcCone::full(a.clone()),
            DcCone::noiseless(a.clone()),
            DcCone::from_generators(a.clone(), &[vec![-1.0, 9.0]]).unwrap(),
        ];
        for c in &cones {
            let text = serde_json::to_string(&c.to_json()).unwrap();
            let back = DcCone::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert!(equals_cone(c, &back, 1e-9).unwrap());
            assert_eq!(back.to_json(), c.to_json());
        }
    }

    #[test]
    fn empty_normals_is_full_cell() {
        let v = serde_json::json!({"alphabet": ["a", "b"], "cells": [{"normals": []}]});
        assert!(DcCone::from_json(&v).unwrap().has_full_cell());
    }
}
