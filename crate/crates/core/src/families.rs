//! Degree/weight sequence inputs and the random graph models they drive.
//!
//! Sequences are read from a whitespace-separated file, a JSON array, or a
//! block description `{"hubs": {"count": 50, "degree": 100}, ...}` whose
//! blocks expand in name order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generators::{
    bipartite_configuration_model, configuration_model, generalized_random_graph,
    preferential_attachment,
};
use crate::graphex::{
    limit_of_bcm, limit_of_cm, limit_of_ecm, limit_of_grg, limit_of_pa, Multigraphex,
};
use crate::multigraph::Multigraph;
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub count: usize,
    pub degree: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeqSpec {
    List(Vec<f64>),
    Blocks(BTreeMap<String, Block>),
}

impl SeqSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            SeqSpec::List(v) => v.clone(),
            SeqSpec::Blocks(b) => b
                .values()
                .flat_map(|blk| std::iter::repeat_n(blk.degree, blk.count))
                .collect(),
        }
    }

    pub fn degrees(&self) -> Result<Vec<u32>> {
        to_degrees(&self.values())
    }
}

fn to_degrees(v: &[f64]) -> Result<Vec<u32>> {
    v.iter()
        .map(|&x| {
            if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as u32)
            } else {
                invalid(format!("degree {x} is not a nonnegative integer"))
            }
        })
        .collect()
}

/// Parses a sequence from any of the accepted text forms.
pub fn parse_sequence(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        let spec: SeqSpec = serde_json::from_str(text)?;
        return Ok(spec.values());
    }
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::Parse(format!("not a number: {tok:?}")))
        })
        .collect()
}

pub fn parse_degrees(text: &str) -> Result<Vec<u32>> {
    to_degrees(&parse_sequence(text)?)
}

/// 50 hubs of degree 100 followed by 5000 leaves; `ℓ_n = 10⁴`.
pub fn f_star() -> Vec<u32> {
    let mut d = vec![100u32; 50];
    d.extend(std::iter::repeat_n(1u32, 5000));
    d
}

/// A random graph model with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Cm { degrees: SeqSpec },
    Ecm { degrees: SeqSpec },
    Pa { delta: SeqSpec, m: u64 },
    Grg { weights: SeqSpec },
    Bcm { side1: SeqSpec, side2: SeqSpec },
}

/// A model with its sequences expanded, ready for repeated draws.
#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Cm(Vec<u32>),
    Ecm(Vec<u32>),
    Pa(Vec<f64>, u64),
    Grg(Vec<f64>),
    Bcm(Vec<u32>, Vec<u32>),
}

impl Model {
    pub fn instance(&self) -> Result<Instance> {
        Ok(match self {
            Model::Cm { degrees } => Instance::Cm(degrees.degrees()?),
            Model::Ecm { degrees } => Instance::Ecm(degrees.degrees()?),
            Model::Pa { delta, m } => Instance::Pa(delta.values(), *m),
            Model::Grg { weights } => Instance::Grg(weights.values()),
            Model::Bcm { side1, side2 } => Instance::Bcm(side1.degrees()?, side2.degrees()?),
        })
    }
}

impl Instance {
    pub fn name(&self) -> &'static str {
        match self {
            Instance::Cm(_) => "cm",
            Instance::Ecm(_) => "ecm",
            Instance::Pa(..) => "pa",
            Instance::Grg(_) => "grg",
            Instance::Bcm(..) => "bcm",
        }
    }

    pub fn draw(&self, rng: &mut Rng) -> Result<Multigraph> {
        match self {
            Instance::Cm(d) => configuration_model(d, rng),
            Instance::Ecm(d) => Ok(configuration_model(d, rng)?.erase()),
            Instance::Pa(delta, m) => preferential_attachment(delta, *m, rng),
            Instance::Grg(w) => generalized_random_graph(w, rng),
            Instance::Bcm(a, b) => Ok(bipartite_configuration_model(a, b, rng)?.graph),
        }
    }

    /// The model's limiting multigraphex with hub threshold `tau`.
    pub fn limit(&self, tau: f64) -> Result<Multigraphex> {
        match self {
            Instance::Cm(d) => limit_of_cm(d, tau),
            Instance::Ecm(d) => limit_of_ecm(d, tau),
            Instance::Pa(delta, m) => limit_of_pa(delta, *m, tau),
            Instance::Grg(w) => limit_of_grg(w, tau),
            Instance::Bcm(a, b) => limit_of_bcm(a, b, tau),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_forms() {
        assert_eq!(
            parse_sequence("1 2\n3\t4\n").unwrap(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
        assert_eq!(parse_sequence("[1, 2.5]").unwrap(), vec![1.0, 2.5]);
        let dsl = r#"{"leaves": {"count": 2, "degree": 1}, "hubs": {"count": 1, "degree": 4}}"#;
        assert_eq!(parse_degrees(dsl).unwrap(), vec![4, 1, 1]);
        assert!(parse_degrees("1 x").is_err());
        assert!(parse_degrees("[1.5]").is_err());
    }

    #[test]
    fn f_star_shape() {
        let d = f_star();
        assert_eq!(d.len(), 5050);
        assert_eq!(d.iter().map(|&x| x as u64).sum::<u64>(), 10_000);
        let dsl =
            r#"{"hubs": {"count": 50, "degree": 100}, "leaves": {"count": 5000, "degree": 1}}"#;
        assert_eq!(parse_degrees(dsl).unwrap(), d);
    }

    #[test]
    fn model_json() {
        let m: Model = serde_json::from_str(r#"{"model": "pa", "delta": [1, 1], "m": 3}"#).unwrap();
        assert_eq!(m.instance().unwrap(), Instance::Pa(vec![1.0, 1.0], 3));
        let m: Model = serde_json::from_str(
            r#"{"model": "bcm", "side1": [2], "side2": {"x": {"count": 2, "degree": 1}}}"#,
        )
        .unwrap();
        assert_eq!(m.instance().unwrap(), Instance::Bcm(vec![2], vec![1, 1]));
    }
}
