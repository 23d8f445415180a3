//! Empirical distributions over isomorphism classes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canon::{key_or_oversize, CanonicalKey, DEFAULT_VERTEX_LIMIT};
use crate::error::{Error, Result};
use crate::multigraph::{Multigraph, MultigraphJson};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Census {
    counts: BTreeMap<CanonicalKey, u64>,
    total: u64,
    vertex_limit: usize,
}

impl Default for Census {
    fn default() -> Self {
        Census::new()
    }
}

impl Census {
    pub fn new() -> Self {
        Census::with_limit(DEFAULT_VERTEX_LIMIT)
    }

    pub fn with_limit(vertex_limit: usize) -> Self {
        Census {
            counts: BTreeMap::new(),
            total: 0,
            vertex_limit,
        }
    }

    pub fn add(&mut self, g: &Multigraph) {
        let key = key_or_oversize(g, self.vertex_limit);
        self.add_key(key, 1);
    }

    pub fn add_key(&mut self, key: CanonicalKey, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(key).or_insert(0) += count;
        self.total += count;
    }

    /// Adds the counts of `other`; censuses built with different limits may
    /// be merged, keys stay as recorded.
    pub fn merge(mut self, other: Census) -> Census {
        for (k, c) in other.counts {
            self.add_key(k, c);
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn vertex_limit(&self) -> usize {
        self.vertex_limit
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, key: &CanonicalKey) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &CanonicalKey) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(key) as f64 / self.total as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalKey, u64)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }

    pub fn to_json_value(&self) -> CensusJson {
        CensusJson {
            total: self.total,
            vertex_limit: self.vertex_limit,
            classes: self
                .counts
                .iter()
                .map(|(k, &count)| {
                    (
                        k.to_hex(),
                        ClassJson {
                            count,
                            graph: k.to_graph().map(|g| g.to_json_value()),
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("census serializes")
    }

    pub fn from_json(s: &str) -> Result<Census> {
        let raw: CensusJson = serde_json::from_str(s)?;
        let mut c = Census::with_limit(raw.vertex_limit);
        for (hex, class) in raw.classes {
            c.add_key(CanonicalKey::from_hex(&hex)?, class.count);
        }
        if c.total != raw.total {
            return Err(Error::Parse(format!(
                "census total {} does not match class counts {}",
                raw.total, c.total
            )));
        }
        Ok(c)
    }

    /// Rows `key,count,frequency,vertices,edges` for external plotting.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["key", "count", "frequency", "vertices", "edges"])?;
        for (k, c) in self.iter() {
            let (nv, ne) = match k.to_graph() {
                Some(g) => (
                    g.n_vertices().to_string(),
                    g.non_loop_edge_count().to_string(),
                ),
                None => ("oversize".into(), "".into()),
            };
            out.write_record([
                k.to_hex(),
                c.to_string(),
                format!("{:.6}", self.frequency(k)),
                nv,
                ne,
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn census_of<'a, I>(graphs: I) -> Census
where
    I: IntoIterator<Item = &'a Multigraph>,
{
    let mut c = Census::new();
    for g in graphs {
        c.add(g);
    }
    c
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusJson {
    pub total: u64,
    pub vertex_limit: usize,
    pub classes: BTreeMap<String, ClassJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassJson {
    pub count: u64,
    pub graph: Option<MultigraphJson>,
}
