//! JSON form of a triple: `{b, A, rho: {family, params} | {grid}, atoms, transient}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Atom, GaussianComponent, JumpDensity, LevyTriple};
use crate::error::{Error, Result};
use crate::grid::GridField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum FamilySpec {
    None,
    GaussianMixture { components: Vec<GaussianComponent> },
    PowerLaw { c: f64, alpha: f64, r_min: f64, r_max: f64 },
    UniformBall { rate: f64, center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoSpec {
    Family(FamilySpec),
    /// Path of a grid field in the JSON layout of [`GridField::to_json`].
    Grid { grid: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    pub b: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<RhoSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub transient: bool,
}

impl TripleSpec {
    /// Builds the triple; `load_grid` resolves grid references.
    pub fn resolve(&self, load_grid: impl Fn(&str) -> Result<GridField<f64>>) -> Result<LevyTriple> {
        let d = self.b.len();
        if self.a.len() != d || self.a.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidParameter(format!("A must be {d}x{d}")));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| self.a[i][j]);
        let jumps = match &self.rho {
            None | Some(RhoSpec::Family(FamilySpec::None)) => JumpDensity::None,
            Some(RhoSpec::Family(FamilySpec::GaussianMixture { components })) => {
                JumpDensity::GaussianMixture(components.clone())
            }
            Some(RhoSpec::Family(FamilySpec::PowerLaw { c, alpha, r_min, r_max })) => {
                JumpDensity::PowerLaw { c: *c, alpha: *alpha, r_min: *r_min, r_max: *r_max }
            }
            Some(RhoSpec::Family(FamilySpec::UniformBall { rate, center, radius })) => {
                JumpDensity::UniformBall { rate: *rate, center: center.clone(), radius: *radius }
            }
            Some(RhoSpec::Grid { grid }) => JumpDensity::Grid(load_grid(grid)?),
        };
        Ok(LevyTriple::new(self.b.clone(), cov, jumps, self.atoms.clone())?.assert_transient(self.transient))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families_and_atoms() {
        let text = r#"{"b": [0.5], "A": [[1.0]],
            "rho": {"family": "power-law", "params": {"c": 1.0, "alpha": 1.5, "r_min": 0.0, "r_max": 1.0}},
            "atoms": [{"position": [1.0], "rate": 2.0}]}"#;
        let spec = TripleSpec::from_json(text).unwrap();
        let t = spec.resolve(|_| unreachable!()).unwrap();
        assert_eq!(t.atoms().len(), 1);
        assert!(matches!(t.jumps(), JumpDensity::PowerLaw { .. }));

        let none = TripleSpec::from_json(r#"{"b": [0, 0], "A": [[1, 0], [0, 1]], "rho": {"family": "none"}}"#).unwrap();
        assert_eq!(none.resolve(|_| unreachable!()).unwrap(), LevyTriple::brownian(2).unwrap());
        assert!(TripleSpec::from_json(r#"{"b": [0], "A": [[1]], "bogus": 1}"#).is_err());
    }
}
