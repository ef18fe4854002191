//! Confusion tables: generate graphs from a grid of models, classify each,
//! and count assigned labels per generating model.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail};
use netrand::classifier::{build_atlas, classify, ModelLabel, RefinedClassifier, RefinedLabel};
use netrand::{gen_er, gen_ws, ErParams, Seed, WsParams};
use rayon::prelude::*;
use serde::Serialize;

/// Density gap below which an assigned model counts as related.
pub const RELATED_DENSITY: f64 = 0.1;
/// Smallest rewiring probability of a related WS label.
pub const RELATED_REWIRING: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Generator {
    Er { p: f64 },
    Ws { p_r: f64, k: usize },
}

impl Generator {
    fn density(&self, n: usize) -> f64 {
        match *self {
            Generator::Er { p } => p,
            Generator::Ws { k, .. } => k as f64 / (n - 1) as f64,
        }
    }

    fn seed(&self, master: Seed, rep: usize) -> Seed {
        match *self {
            Generator::Er { p } => master.derive(&[0x4552, p.to_bits(), rep as u64]),
            Generator::Ws { p_r, k } => master.derive(&[0x5753, k as u64, p_r.to_bits(), rep as u64]),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Er { p } => write!(f, "ER {p}"),
            Generator::Ws { p_r, k } => write!(f, "WS {p_r},{k}"),
        }
    }
}

/// Parses a WS grid entry `p_r:k`.
pub fn parse_ws(s: &str) -> anyhow::Result<(f64, usize)> {
    let (p_r, k) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("WS entry `{s}` must look like p_r:k"))?;
    Ok((p_r.trim().parse()?, k.trim().parse()?))
}

/// Assigned label, independent of classifier flavour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Assigned {
    Model(ModelLabel),
    Refined(RefinedLabel),
    /// No connected tetrads, so the graph could not be embedded.
    Unembeddable,
}

impl Assigned {
    fn is_er(&self) -> bool {
        match self {
            Assigned::Model(m) => m.is_er(),
            Assigned::Refined(r) => r.is_er(),
            Assigned::Unembeddable => false,
        }
    }

    fn is_ws(&self) -> bool {
        matches!(
            self,
            Assigned::Model(ModelLabel::Ws { .. }) | Assigned::Refined(RefinedLabel::Ws { .. })
        )
    }

    /// Same family or a high-rewiring WS label of similar density.
    fn related(&self, generator: &Generator, n: usize, graph_density: f64) -> bool {
        let target = generator.density(n);
        let close = |d: f64| (d - target).abs() <= RELATED_DENSITY + 1e-12;
        match *self {
            Assigned::Model(ModelLabel::Er { p }) => close(p),
            Assigned::Model(ModelLabel::Ws { p_r, k }) => {
                p_r >= RELATED_REWIRING - 1e-12 && close(k as f64 / (n - 1) as f64)
            }
            Assigned::Refined(RefinedLabel::Er) => close(graph_density),
            Assigned::Refined(RefinedLabel::Ws { p_r }) => p_r >= RELATED_REWIRING - 1e-12 && close(graph_density),
            Assigned::Unembeddable => false,
        }
    }

    fn sort_key(&self) -> (u8, u64, u64) {
        match *self {
            Assigned::Model(ModelLabel::Er { p }) => (0, p.to_bits(), 0),
            Assigned::Refined(RefinedLabel::Er) => (0, 0, 0),
            Assigned::Model(ModelLabel::Ws { p_r, k }) => (1, p_r.to_bits(), k as u64),
            Assigned::Refined(RefinedLabel::Ws { p_r }) => (1, p_r.to_bits(), 0),
            Assigned::Unembeddable => (2, 0, 0),
        }
    }
}

impl fmt::Display for Assigned {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assigned::Model(m) => m.fmt(f),
            Assigned::Refined(r) => r.fmt(f),
            Assigned::Unembeddable => write!(f, "none"),
        }
    }
}

pub struct MonteCarlo {
    pub n: usize,
    pub reps: usize,
    pub atlas_reps: usize,
    pub refined: bool,
    pub generators: Vec<Generator>,
}

#[derive(Debug, Serialize)]
pub struct ConfusionTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<usize>)>,
    pub er_family: Vec<usize>,
    pub ws_family: Vec<usize>,
    pub related: Vec<usize>,
}

struct Outcome {
    assigned: Assigned,
    related: bool,
}

impl MonteCarlo {
    pub fn run(&self, seed: Seed) -> anyhow::Result<ConfusionTable> {
        if self.n < 5 {
            bail!(netrand::Error::TooSmall { n: self.n, min: 5 });
        }
        for g in &self.generators {
            match *g {
                Generator::Er { p } => {
                    ErParams::new(self.n, p)?;
                }
                Generator::Ws { p_r, k } => {
                    WsParams::new(self.n, k, p_r)?;
                }
            }
        }
        let columns: Vec<String> = self.generators.iter().map(ToString::to_string).collect();
        if self.reps == 0 {
            return Ok(ConfusionTable {
                columns,
                rows: Vec::new(),
                er_family: Vec::new(),
                ws_family: Vec::new(),
                related: Vec::new(),
            });
        }
        let classifier = Classifier::new(self, seed)?;
        let outcomes: Vec<Vec<Outcome>> = self
            .generators
            .iter()
            .map(|generator| {
                (0..self.reps)
                    .into_par_iter()
                    .map(|rep| {
                        let graph_seed = generator.seed(seed, rep);
                        let g = match *generator {
                            Generator::Er { p } => gen_er(&ErParams::new(self.n, p)?, graph_seed)?,
                            Generator::Ws { p_r, k } => gen_ws(&WsParams::new(self.n, k, p_r)?, graph_seed)?,
                        };
                        let assigned = classifier.assign(&g)?;
                        let related = assigned.related(generator, self.n, g.density()?);
                        Ok(Outcome { assigned, related })
                    })
                    .collect::<netrand::Result<Vec<_>>>()
            })
            .collect::<netrand::Result<_>>()?;

        let mut labels: Vec<Assigned> = Vec::new();
        for o in outcomes.iter().flatten() {
            if !labels.contains(&o.assigned) {
                labels.push(o.assigned);
            }
        }
        labels.sort_by_key(Assigned::sort_key);
        let rows = labels
            .iter()
            .map(|label| {
                let counts = outcomes
                    .iter()
                    .map(|col| col.iter().filter(|o| o.assigned == *label).count())
                    .collect();
                (label.to_string(), counts)
            })
            .collect();
        let tally = |f: &dyn Fn(&Outcome) -> bool| -> Vec<usize> {
            outcomes.iter().map(|col| col.iter().filter(|o| f(o)).count()).collect()
        };
        Ok(ConfusionTable {
            columns,
            rows,
            er_family: tally(&|o| o.assigned.is_er()),
            ws_family: tally(&|o| o.assigned.is_ws()),
            related: tally(&|o| o.related),
        })
    }
}

enum Classifier {
    Atlas(netrand::Atlas),
    Refined(RefinedClassifier),
}

impl Classifier {
    fn new(mc: &MonteCarlo, seed: Seed) -> netrand::Result<Self> {
        let model_seed = seed.derive(&[0x4154_4c53]);
        Ok(if mc.refined {
            Classifier::Refined(RefinedClassifier::new(mc.atlas_reps, model_seed)?)
        } else {
            Classifier::Atlas(build_atlas(mc.n, mc.atlas_reps, model_seed)?)
        })
    }

    fn assign(&self, g: &netrand::Graph) -> netrand::Result<Assigned> {
        let result = match self {
            Classifier::Atlas(atlas) => classify(g, atlas).map(|c| Assigned::Model(c.best.label)),
            Classifier::Refined(rc) => rc.classify(g).map(|c| Assigned::Refined(c.label)),
        };
        match result {
            Err(netrand::Error::NoConnectedTetrads) | Err(netrand::Error::DegenerateGraph(_)) => {
                Ok(Assigned::Unembeddable)
            }
            other => other,
        }
    }
}

impl ConfusionTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("assigned");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        let mut line = |name: &str, counts: &[usize]| {
            out.push_str(name);
            for c in counts {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        };
        for (name, counts) in &self.rows {
            line(name, counts);
        }
        if !self.rows.is_empty() {
            line("family ER", &self.er_family);
            line("family WS", &self.ws_family);
            line("related", &self.related);
        }
        out
    }

    /// Count in row `label` of column `column`, if present.
    #[cfg(test)]
    pub fn get(&self, label: &str, column: usize) -> usize {
        self.rows
            .iter()
            .find(|(name, _)| name == label)
            .map_or(0, |(_, counts)| counts[column])
    }
}

impl FromStr for Generator {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if let Some(rest) = s.strip_prefix("er:") {
            return Ok(Generator::Er { p: rest.parse()? });
        }
        if let Some(rest) = s.strip_prefix("ws:") {
            let (p_r, k) = parse_ws(rest)?;
            return Ok(Generator::Ws { p_r, k });
        }
        bail!("model `{s}` must be er:p or ws:p_r:k")
    }
}
