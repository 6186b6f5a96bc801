//! Strict JSON documents for paths, families, clutching data, Hamiltonian
//! systems, chain complexes and Morse-Bott data. Unknown fields are errors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::{BoundaryEntry, ChainComplex, Generator, MorseBottComponent, MorseBottData, MorsePoint};
use crate::chern::ClutchingData;
use crate::error::{Result, SymError};
use crate::hamdyn::{Hamiltonian, HamiltonianSystem, JConvention, Monomial, PhaseSpace};
use crate::linalg::Mat;
use crate::path::SymplecticPath;
use crate::splin::{SymmetricFamily, SymmetricHomotopy};

/// Tolerance used when validating matrices read from files.
pub const FILE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDoc {
    pub t: f64,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceDoc {
    pub s: f64,
    pub rows: Vec<SampleDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    Path,
    SymmetricFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathDoc {
    pub n: usize,
    pub kind: DocKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<SampleDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_2d: Option<Vec<SliceDoc>>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| SymError::Parse(e.to_string()))
}

fn to_matrix(n: usize, rows: &[Vec<f64>]) -> Result<Mat> {
    let dim = 2 * n;
    if n == 0 {
        return Err(SymError::Parse("n must be positive".into()));
    }
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(SymError::Parse(format!("matrix must be {dim} x {dim}")));
    }
    Ok(Mat::from_fn(dim, dim, |i, j| rows[i][j]))
}

pub fn matrix_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn split(samples: &[SampleDoc], n: usize) -> Result<(Vec<f64>, Vec<Mat>)> {
    let times = samples.iter().map(|s| s.t).collect();
    let mats = samples
        .iter()
        .map(|s| to_matrix(n, &s.matrix))
        .collect::<Result<Vec<_>>>()?;
    Ok((times, mats))
}

impl PathDoc {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn from_path(path: &SymplecticPath) -> Self {
        Self {
            n: path.n(),
            kind: DocKind::Path,
            samples: Some(
                path.times()
                    .iter()
                    .zip(path.samples())
                    .map(|(&t, m)| SampleDoc {
                        t,
                        matrix: matrix_rows(m),
                    })
                    .collect(),
            ),
            samples_2d: None,
        }
    }

    fn one_parameter(&self, kind: DocKind) -> Result<&[SampleDoc]> {
        if self.kind != kind {
            return Err(SymError::Parse(format!("expected kind {kind:?}, found {:?}", self.kind)));
        }
        self.samples
            .as_deref()
            .ok_or_else(|| SymError::Parse("missing samples".into()))
    }

    pub fn to_path(&self) -> Result<SymplecticPath> {
        let samples = self.one_parameter(DocKind::Path)?;
        let (times, mats) = split(samples, self.n)?;
        SymplecticPath::from_samples(times, mats, FILE_TOL)
    }

    pub fn to_family(&self) -> Result<SymmetricFamily> {
        let samples = self.one_parameter(DocKind::SymmetricFamily)?;
        let (times, mats) = split(samples, self.n)?;
        SymmetricFamily::from_samples(times, mats, FILE_TOL)
    }

    pub fn to_homotopy(&self) -> Result<SymmetricHomotopy> {
        if self.kind != DocKind::SymmetricFamily {
            return Err(SymError::Parse("expected kind symmetric_family".into()));
        }
        let slices = self
            .samples_2d
            .as_ref()
            .ok_or_else(|| SymError::Parse("missing samples_2d".into()))?;
        let slices = slices
            .iter()
            .map(|sl| {
                let (times, mats) = split(&sl.rows, self.n)?;
                Ok((sl.s, SymmetricFamily::from_samples(times, mats, FILE_TOL)?))
            })
            .collect::<Result<Vec<_>>>()?;
        SymmetricHomotopy::new(slices)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutchingDoc {
    pub rank: usize,
    pub genus: u32,
    pub loops: Vec<PathDoc>,
}

impl ClutchingDoc {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_data(&self) -> Result<ClutchingData> {
        let loops = self.loops.iter().map(PathDoc::to_path).collect::<Result<Vec<_>>>()?;
        ClutchingData::new(self.rank, self.genus, loops)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialDoc {
    pub coefficient: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Vec<MonomialDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    /// `plane`, `cylinder` or `r2n`.
    pub phase_space: String,
    /// Half-dimension for `r2n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub hamiltonian: HamiltonianDoc,
    #[serde(default = "default_j")]
    pub j_convention: String,
}

fn default_j() -> String {
    "standard".into()
}

impl SystemDoc {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_system(&self) -> Result<HamiltonianSystem> {
        let phase_space = match (self.phase_space.as_str(), self.n) {
            ("plane", None) => PhaseSpace::Plane,
            ("cylinder", None) => PhaseSpace::Cylinder,
            ("r2n", Some(n)) if n > 0 => PhaseSpace::Euclidean(n),
            (other, _) => {
                return Err(SymError::Parse(format!(
                    "unknown phase space {other:?} (r2n requires n, the others forbid it)"
                )))
            }
        };
        let j = match self.j_convention.as_str() {
            "standard" => JConvention::Standard,
            "canonical" => JConvention::Canonical,
            other => return Err(SymError::Parse(format!("unknown j_convention {other:?}"))),
        };
        let h = &self.hamiltonian;
        let param = |name: &str, default: f64| -> Result<f64> {
            Ok(*h.parameters.get(name).unwrap_or(&default))
        };
        let hamiltonian = match (&h.builtin, &h.polynomial) {
            (Some(name), None) => {
                let allowed: &[&str] = match name.as_str() {
                    "harmonic" => &["omega"],
                    "pendulum" => &["epsilon"],
                    _ => return Err(SymError::Parse(format!("unknown builtin Hamiltonian {name:?}"))),
                };
                if let Some(k) = h.parameters.keys().find(|k| !allowed.contains(&k.as_str())) {
                    return Err(SymError::Parse(format!("unknown parameter {k:?} for {name}")));
                }
                match name.as_str() {
                    "harmonic" => Hamiltonian::Harmonic { omega: param("omega", 1.0)? },
                    _ => Hamiltonian::Pendulum { epsilon: param("epsilon", 1.0)? },
                }
            }
            (None, Some(terms)) => {
                if !h.parameters.is_empty() {
                    return Err(SymError::Parse("polynomial Hamiltonians take no parameters".into()));
                }
                Hamiltonian::Polynomial(
                    terms
                        .iter()
                        .map(|m| Monomial {
                            coefficient: m.coefficient,
                            powers: m.powers.clone(),
                        })
                        .collect(),
                )
            }
            _ => {
                return Err(SymError::Parse(
                    "hamiltonian needs exactly one of builtin or polynomial".into(),
                ))
            }
        };
        HamiltonianSystem::new(phase_space, hamiltonian, j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDoc {
    pub id: String,
    pub doubled_degree: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub generators: Vec<GeneratorDoc>,
    #[serde(default)]
    pub boundary: Vec<(String, String)>,
}

impl ComplexDoc {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_complex(&self) -> Result<ChainComplex> {
        let gens = self
            .generators
            .iter()
            .map(|g| Generator {
                id: g.id.clone(),
                doubled_degree: g.doubled_degree,
                action: g.action,
            })
            .collect();
        let entries = self
            .boundary
            .iter()
            .map(|(from, to)| BoundaryEntry {
                from: from.clone(),
                to: to.clone(),
            })
            .collect::<Vec<_>>();
        ChainComplex::build(gens, &entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorsePointDoc {
    pub id: String,
    pub morse_index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub id: String,
    pub dim: u32,
    pub action: f64,
    pub rs_trans_doubled: i64,
    pub morse_points: Vec<MorsePointDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountDoc {
    pub from: String,
    pub to: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorseBottDoc {
    pub components: Vec<ComponentDoc>,
    #[serde(default)]
    pub cascades: Vec<CountDoc>,
    #[serde(default)]
    pub intra: Vec<CountDoc>,
}

impl MorseBottDoc {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_data(&self) -> MorseBottData {
        let counts = |v: &[CountDoc]| {
            v.iter()
                .map(|c| (c.from.clone(), c.to.clone(), c.count))
                .collect()
        };
        MorseBottData {
            components: self
                .components
                .iter()
                .map(|c| MorseBottComponent {
                    id: c.id.clone(),
                    dim: c.dim,
                    action: c.action,
                    rs_trans_doubled: c.rs_trans_doubled,
                    morse_points: c
                        .morse_points
                        .iter()
                        .map(|p| MorsePoint {
                            id: p.id.clone(),
                            morse_index: p.morse_index,
                        })
                        .collect(),
                })
                .collect(),
            cascades: counts(&self.cascades),
            intra: counts(&self.intra),
        }
    }

    pub fn from_data(data: &MorseBottData) -> Self {
        let counts = |v: &[(String, String, u64)]| {
            v.iter()
                .map(|(f, t, c)| CountDoc {
                    from: f.clone(),
                    to: t.clone(),
                    count: *c,
                })
                .collect()
        };
        Self {
            components: data
                .components
                .iter()
                .map(|c| ComponentDoc {
                    id: c.id.clone(),
                    dim: c.dim,
                    action: c.action,
                    rs_trans_doubled: c.rs_trans_doubled,
                    morse_points: c
                        .morse_points
                        .iter()
                        .map(|p| MorsePointDoc {
                            id: p.id.clone(),
                            morse_index: p.morse_index,
                        })
                        .collect(),
                })
                .collect(),
            cascades: counts(&data.cascades),
            intra: counts(&data.intra),
        }
    }
}
