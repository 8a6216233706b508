//! TOML description of a fair polytope.
//!
//! ```toml
//! k = 4
//! structure_class = "partition"
//! groups = [[0, 1], [2, 3]]
//! lower = [0.25, 0.25]
//! upper = [0.75, 0.75]
//! ```
//!
//! Arms are 0-based. `structure_class` is optional; when present it must
//! match the groups.

use std::path::Path;

use fairbandit_core::constraints::{FairPolytope, FairnessBounds, GroupStructure, StructureClass};
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeFile {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure_class: Option<String>,
    pub groups: Vec<Vec<usize>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PolytopeFile {
    pub fn into_polytope(self) -> Result<FairPolytope> {
        let structure = match self.structure_class {
            Some(c) => {
                let class: StructureClass = c.parse()?;
                GroupStructure::with_class(self.k, self.groups, class)?
            }
            None => GroupStructure::new(self.k, self.groups)?,
        };
        Ok(FairPolytope::new(structure, FairnessBounds::new(self.lower, self.upper)?)?)
    }

    pub fn from_polytope(p: &FairPolytope) -> Self {
        Self {
            k: p.k(),
            structure_class: Some(p.structure().class().to_string()),
            groups: p.structure().groups().to_vec(),
            lower: p.lower().to_vec(),
            upper: p.upper().to_vec(),
        }
    }
}

pub fn parse_polytope(text: &str, origin: &Path) -> Result<FairPolytope> {
    let file: PolytopeFile = toml::from_str(text).map_err(|source| HarnessError::Toml {
        path: origin.to_path_buf(),
        source,
    })?;
    file.into_polytope()
}

pub fn load_polytope(path: &Path) -> Result<FairPolytope> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_polytope(&text, path)
}

pub fn write_polytope(p: &FairPolytope) -> String {
    toml::to_string(&PolytopeFile::from_polytope(p)).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let text = "k = 4\nstructure_class = \"partition\"\ngroups = [[0, 1], [2, 3]]\nlower = [0.25, 0.25]\nupper = [0.75, 0.75]\n";
        let p = parse_polytope(text, Path::new("t.toml")).unwrap();
        assert_eq!(p.k(), 4);
        assert_eq!(p.structure().class(), StructureClass::Partition);
        let again = parse_polytope(&write_polytope(&p), Path::new("t.toml")).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn declared_class_must_match() {
        let text = "k = 3\nstructure_class = \"partition\"\ngroups = [[0, 1], [0]]\nlower = [0, 0]\nupper = [1, 1]\n";
        assert!(parse_polytope(text, Path::new("t.toml")).is_err());
        let text = "k = 3\ngroups = [[0, 1], [0]]\nlower = [0, 0]\nupper = [1, 1]\n";
        let p = parse_polytope(text, Path::new("t.toml")).unwrap();
        assert_eq!(p.structure().class(), StructureClass::Laminar);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "k = 2\ngroups = [[0]]\nlower = [0]\nupper = [1]\nweights = [1]\n";
        assert!(matches!(
            parse_polytope(text, Path::new("t.toml")),
            Err(HarnessError::Toml { .. })
        ));
    }
}
