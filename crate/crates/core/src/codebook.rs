//! Per-RIS focusing codebooks (one codeword per target RIS) and their JSON form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Provenance;
use crate::ris::{linear_codebook, PhaseVector, RayPair};
use crate::scenario::{NodeId, Scenario};
use crate::sdr::opt_codebook;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Opt,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Linear, Method::Opt];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::Opt => "opt",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Method::Linear),
            "opt" => Ok(Method::Opt),
            other => Err(format!("unknown method {other:?} (expected linear or opt)")),
        }
    }
}

/// Solver figures kept alongside an optimized codeword.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdrSummary {
    pub gamma_relaxed: f64,
    pub gamma_restored: f64,
    pub leading_eigenvalue: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookEntry {
    pub target: usize,
    pub codeword: PhaseVector,
    pub sdr: Option<SdrSummary>,
}

/// The `I − 1` codewords of one source RIS, in target-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub source: usize,
    pub method: Method,
    pub entries: Vec<CodebookEntry>,
}

impl Codebook {
    pub fn codeword(&self, target: usize) -> Result<&PhaseVector> {
        self.entries
            .iter()
            .find(|e| e.target == target)
            .map(|e| &e.codeword)
            .ok_or(Error::UnknownRis(target))
    }

    pub fn targets(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.target).collect()
    }
}

/// Linear codebook of `source`, each codeword designed on the LoS AoA from the
/// BS and the LoS AoD towards the target.
pub fn scenario_linear_codebook(scenario: &Scenario, source: usize) -> Result<Codebook> {
    let node = scenario.ris(source)?;
    let incident = scenario.link(NodeId::Bs, NodeId::Ris(source))?.los().aoa;
    let designs = scenario
        .ris_ids()
        .filter(|&t| t != source)
        .map(|t| {
            let aod = scenario.link(NodeId::Ris(source), NodeId::Ris(t))?.los().aod;
            Ok((t, RayPair::new(incident, aod)))
        })
        .collect::<Result<Vec<_>>>()?;
    let entries = linear_codebook(&node.geometry, &scenario.wave, &designs)?
        .into_iter()
        .map(|(target, codeword)| CodebookEntry {
            target,
            codeword,
            sdr: None,
        })
        .collect();
    Ok(Codebook {
        source,
        method: Method::Linear,
        entries,
    })
}

pub fn build_codebook(scenario: &Scenario, source: usize, method: Method, tol: f64) -> Result<Codebook> {
    match method {
        Method::Linear => scenario_linear_codebook(scenario, source),
        Method::Opt => {
            let entries = opt_codebook(scenario, source, tol)?
                .into_iter()
                .map(|(target, sol)| CodebookEntry {
                    target,
                    sdr: Some(SdrSummary {
                        gamma_relaxed: sol.gamma_relaxed,
                        gamma_restored: sol.gamma_restored,
                        leading_eigenvalue: sol.leading_eigenvalue,
                        iterations: sol.iterations,
                    }),
                    codeword: sol.codeword,
                })
                .collect();
            Ok(Codebook {
                source,
                method,
                entries,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodewordEntry {
    pub target: usize,
    pub nx: usize,
    pub nz: usize,
    /// Per-element phase (radians), x index outer, z index inner.
    pub phases_rad: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdr: Option<SdrSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodEntry {
    pub method: Method,
    pub codewords: Vec<CodewordEntry>,
}

/// Codebook document: one or more methods for a single source RIS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub source: usize,
    pub codebooks: Vec<MethodEntry>,
}

impl CodebookFile {
    pub fn new(books: &[Codebook], provenance: Option<&Provenance>) -> Result<Self> {
        let source = books
            .first()
            .map(|b| b.source)
            .ok_or_else(|| Error::schema("codebooks", "at least one codebook is required"))?;
        if let Some(b) = books.iter().find(|b| b.source != source) {
            return Err(Error::schema(
                "source",
                format!("mixed sources {source} and {}", b.source),
            ));
        }
        Ok(Self {
            provenance: provenance.cloned(),
            source,
            codebooks: books
                .iter()
                .map(|b| MethodEntry {
                    method: b.method,
                    codewords: b
                        .entries
                        .iter()
                        .map(|e| CodewordEntry {
                            target: e.target,
                            nx: e.codeword.geometry().nx,
                            nz: e.codeword.geometry().nz,
                            phases_rad: e.codeword.phases(),
                            sdr: e.sdr,
                        })
                        .collect(),
                })
                .collect(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        crate::io::parse_json(text)
    }

    /// Rebuilds codebooks against the source panel of `scenario`.
    pub fn into_codebooks(self, scenario: &Scenario) -> Result<Vec<Codebook>> {
        let node = scenario
            .ris(self.source)
            .map_err(|_| Error::schema("source", format!("RIS {} not in scenario", self.source)))?;
        let g = node.geometry;
        self.codebooks
            .into_iter()
            .enumerate()
            .map(|(bi, book)| {
                let mut seen = Vec::new();
                let entries = book
                    .codewords
                    .into_iter()
                    .enumerate()
                    .map(|(ci, cw)| {
                        let field = |f: &str| format!("codebooks[{bi}].codewords[{ci}].{f}");
                        if cw.target == self.source || scenario.ris(cw.target).is_err() {
                            return Err(Error::schema(field("target"), format!("invalid target {}", cw.target)));
                        }
                        if seen.contains(&cw.target) {
                            return Err(Error::schema(field("target"), format!("duplicate target {}", cw.target)));
                        }
                        seen.push(cw.target);
                        if cw.nx != g.nx || cw.nz != g.nz {
                            return Err(Error::schema(
                                field("nx"),
                                format!("{}×{} does not match RIS {} ({}×{})", cw.nx, cw.nz, self.source, g.nx, g.nz),
                            ));
                        }
                        let codeword = PhaseVector::from_phases(g, &cw.phases_rad)
                            .map_err(|e| Error::schema(field("phases_rad"), e.to_string()))?;
                        Ok(CodebookEntry {
                            target: cw.target,
                            codeword,
                            sdr: cw.sdr,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Codebook {
                    source: self.source,
                    method: book.method,
                    entries,
                })
            })
            .collect()
    }
}
