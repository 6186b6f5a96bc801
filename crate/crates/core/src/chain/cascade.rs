use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::complex::{Betti, BoundaryEntry, ChainComplex, Generator};
use crate::error::{Result, SymError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorsePoint {
    pub id: String,
    pub morse_index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseBottComponent {
    pub id: String,
    pub dim: u32,
    pub action: f64,
    pub rs_trans_doubled: i64,
    pub morse_points: Vec<MorsePoint>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MorseBottData {
    pub components: Vec<MorseBottComponent>,
    /// Counts of cascades `(from, to, count)` between Morse points on
    /// distinct components.
    pub cascades: Vec<(String, String, u64)>,
    /// Counts of flow lines of the auxiliary Morse function inside one
    /// component.
    pub intra: Vec<(String, String, u64)>,
}

/// `mu = RS^trans + IND - dim / 2`, doubled.
pub fn doubled_grading(component: &MorseBottComponent, point: &MorsePoint) -> i64 {
    component.rs_trans_doubled + 2 * point.morse_index as i64 - component.dim as i64
}

#[derive(Debug, Clone)]
pub struct CascadeComplex {
    pub complex: ChainComplex,
    /// No two generators differ in grading by exactly one.
    pub strict_lacunary: bool,
    /// No pair of generators on different components with decreasing action
    /// differs in grading by one, and every intra-component count is even.
    /// Under this condition the boundary vanishes.
    pub lacunary: bool,
}

struct Node {
    component: usize,
    grading: i64,
    action: f64,
}

/// Cascade complex of Morse-Bott data over GF(2). Odd counts become boundary
/// entries `from -> to`; each must lower the grading by one, and cascades must
/// strictly lower the action.
pub fn cascade_complex(data: &MorseBottData) -> Result<CascadeComplex> {
    let mut nodes: HashMap<&str, Node> = HashMap::new();
    let mut generators = Vec::new();
    for (ci, c) in data.components.iter().enumerate() {
        for p in &c.morse_points {
            if p.morse_index > c.dim {
                return Err(SymError::Parameter(format!(
                    "Morse index {} of {} exceeds the component dimension {}",
                    p.morse_index, p.id, c.dim
                )));
            }
            let grading = doubled_grading(c, p);
            let node = Node {
                component: ci,
                grading,
                action: c.action,
            };
            if nodes.insert(p.id.as_str(), node).is_some() {
                return Err(SymError::DuplicateGenerator(p.id.clone()));
            }
            generators.push(Generator {
                id: p.id.clone(),
                doubled_degree: grading,
                action: Some(c.action),
            });
        }
    }
    let node = |id: &str| {
        nodes
            .get(id)
            .ok_or_else(|| SymError::UnknownGenerator(id.to_string()))
    };

    let mut entries = Vec::new();
    for (from, to, count) in &data.cascades {
        let (a, b) = (node(from)?, node(to)?);
        if a.component == b.component {
            return Err(SymError::Parameter(format!(
                "cascade {from} -> {to} stays on one component"
            )));
        }
        if count % 2 == 1 {
            if b.action >= a.action {
                return Err(SymError::ActionIncreasing {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            if a.grading - b.grading != 2 {
                return Err(SymError::GradingMismatch {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            entries.push(BoundaryEntry {
                from: from.clone(),
                to: to.clone(),
            });
        }
    }
    let mut intra_even = true;
    for (from, to, count) in &data.intra {
        let (a, b) = (node(from)?, node(to)?);
        if a.component != b.component {
            return Err(SymError::Parameter(format!(
                "flow line {from} -> {to} joins different components"
            )));
        }
        if count % 2 == 1 {
            intra_even = false;
            if a.grading - b.grading != 2 {
                return Err(SymError::GradingMismatch {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            entries.push(BoundaryEntry {
                from: from.clone(),
                to: to.clone(),
            });
        }
    }

    let all: Vec<&Node> = generators.iter().map(|g| &nodes[g.id.as_str()]).collect();
    let mut strict = true;
    let mut cross = true;
    for a in &all {
        for b in &all {
            if a.grading - b.grading == 2 {
                strict = false;
                if a.component != b.component && a.action > b.action {
                    cross = false;
                }
            }
        }
    }
    let complex = ChainComplex::build(generators, &entries)?;
    Ok(CascadeComplex {
        complex,
        strict_lacunary: strict,
        lacunary: strict || (cross && intra_even),
    })
}

/// Doubled transverse Robbin-Salamon index of the `k`-fold great circles on
/// the round `S^n`, i.e. of the critical component at level `k` of `S^*S^n`.
///
/// The linearized geodesic flow splits into the direction of the circle and
/// `n - 1` normal Jacobi directions, each solving `J'' + J = 0` and hence a
/// rotation path `exp(t J0)` on `[0, 2 pi |k|]`. Such a path has crossings at
/// `t = 2 pi j`, `0 <= j <= |k|`, of signature 2, so its doubled index is
/// `2 + 4 (|k| - 1) + 2 = 4 |k|`. Equivalently, the `|k|`-fold circle has
/// `2 |k| - 1` interior conjugate points of multiplicity `n - 1`, and the
/// doubled index is `(n - 1)(2 (2|k| - 1) + 2)`. Negative levels traverse the
/// circles backwards, which negates the index.
pub fn unit_sphere_rs_trans_doubled(n: u32, k: i64) -> i64 {
    4 * k * (n as i64 - 1)
}

/// Length of a great circle, the prime period of the unit cogeodesic flow.
pub const GREAT_CIRCLE: f64 = 2.0 * PI;

/// Morse-Bott data of `S^*S^n` in the action window `-window..=window`.
///
/// Every level is a copy of `S^*S^n` (dimension `2n - 1`) carrying a Morse
/// function with critical points of index `0, n - 1, n, 2n - 1`. Between the
/// index `n` and `n - 1` points run two flow lines when the Euler number of
/// `S^n` is 2 (`n` even) and none when it is 0, so the intra counts vanish
/// modulo 2 either way. No cascade count is needed: gradings of different
/// levels never differ by one when `n >= 4`.
pub fn unit_sphere_data(n: u32, window: u32) -> MorseBottData {
    let w = window as i64;
    let mut components = Vec::new();
    let mut intra = Vec::new();
    for k in -w..=w {
        let id = format!("level{k}");
        let point = |i: u32| format!("{id}:m{i}");
        components.push(MorseBottComponent {
            id: id.clone(),
            dim: 2 * n - 1,
            action: k as f64 * GREAT_CIRCLE,
            rs_trans_doubled: unit_sphere_rs_trans_doubled(n, k),
            morse_points: [0, n - 1, n, 2 * n - 1]
                .into_iter()
                .map(|i| MorsePoint {
                    id: point(i),
                    morse_index: i,
                })
                .collect(),
        });
        intra.push((point(n), point(n - 1), if n % 2 == 0 { 2 } else { 0 }));
    }
    MorseBottData {
        components,
        cascades: Vec::new(),
        intra,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RfhReport {
    pub n: u32,
    pub window: u32,
    pub lacunary: bool,
    pub strict_lacunary: bool,
    /// `(level, doubled RS^trans)`.
    pub rs_trans_doubled: Vec<(i64, i64)>,
    pub betti: Betti,
    /// Doubled degrees of `{-n + 1/2, -1/2, 1/2, n - 1/2} + (2n - 2) k` for
    /// `|k| <= window`.
    pub expected_support: Vec<i64>,
    pub support_matches: bool,
    pub all_rank_one: bool,
}

/// Graded GF(2) Betti table of the cascade complex of `S^*S^n`.
pub fn rfh_unit_sphere(n: u32, window: u32) -> Result<RfhReport> {
    if n < 4 {
        return Err(SymError::Unsupported(format!(
            "unit sphere bundle of S^{n}: the lacunary argument needs n >= 4"
        )));
    }
    let data = unit_sphere_data(n, window);
    let cc = cascade_complex(&data)?;
    let betti = cc.complex.homology();
    let w = window as i64;
    let ni = n as i64;
    let mut expected: Vec<i64> = (-w..=w)
        .flat_map(|k| {
            [-2 * ni + 1, -1, 1, 2 * ni - 1].map(|d| d + 2 * k * (2 * ni - 2))
        })
        .collect();
    expected.sort_unstable();
    expected.dedup();
    let support = betti.support();
    Ok(RfhReport {
        n,
        window,
        lacunary: cc.lacunary,
        strict_lacunary: cc.strict_lacunary,
        rs_trans_doubled: (-w..=w).map(|k| (k, unit_sphere_rs_trans_doubled(n, k))).collect(),
        support_matches: support == expected,
        all_rank_one: support.iter().all(|&d| betti.get(d) == 1),
        betti,
        expected_support: expected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumValue {
    pub value: f64,
    /// Number of pairs `(speed, k)` with `k != 0` giving the value; `0`
    /// always appears once for the constant orbits.
    pub multiplicity: usize,
}

/// `{k sigma : sigma in speeds, k in k_min..=k_max} u {0}`, sorted, with
/// coinciding values merged.
pub fn action_spectrum(speeds: &[f64], k_min: i64, k_max: i64) -> Result<Vec<SpectrumValue>> {
    if let Some(s) = speeds.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(SymError::Parameter(format!("speed {s} is not positive")));
    }
    let mut values = vec![(0.0, 0usize)];
    for &s in speeds {
        for k in k_min..=k_max {
            if k != 0 {
                values.push((k as f64 * s, 1));
            }
        }
    }
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<SpectrumValue> = Vec::new();
    for (v, m) in values {
        match out.last_mut() {
            Some(last) if (last.value - v).abs() <= 1e-12 * v.abs().max(1.0) => {
                last.multiplicity += m
            }
            _ => out.push(SpectrumValue {
                value: v,
                multiplicity: m,
            }),
        }
    }
    if let Some(zero) = out.iter_mut().find(|s| s.value == 0.0) {
        zero.multiplicity = zero.multiplicity.max(1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_as_hypersurface() -> MorseBottData {
        MorseBottData {
            components: vec![MorseBottComponent {
                id: "sigma".into(),
                dim: 2,
                action: 0.0,
                rs_trans_doubled: 0,
                morse_points: vec![
                    MorsePoint { id: "min".into(), morse_index: 0 },
                    MorsePoint { id: "max".into(), morse_index: 2 },
                ],
            }],
            cascades: vec![],
            intra: vec![],
        }
    }

    #[test]
    fn single_component_gives_its_homology() {
        let cc = cascade_complex(&sphere_as_hypersurface()).unwrap();
        let h = cc.complex.homology();
        // Gradings shift by -dim/2 = -1.
        assert_eq!(h.get(-2), 1);
        assert_eq!(h.get(2), 1);
        assert_eq!(h.support(), vec![-2, 2]);
    }

    #[test]
    fn empty_data() {
        let cc = cascade_complex(&MorseBottData::default()).unwrap();
        assert!(cc.complex.is_empty());
        assert!(cc.lacunary);
    }

    #[test]
    fn unit_sphere_tables() {
        for (n, k) in [(4, 2), (5, 1), (6, 0), (7, 3)] {
            let r = rfh_unit_sphere(n, k).unwrap();
            assert!(r.lacunary && r.support_matches && r.all_rank_one, "{r:?}");
            assert!(!r.strict_lacunary);
        }
        assert_eq!(rfh_unit_sphere(3, 1).unwrap_err().name(), "unsupported");
    }

    #[test]
    fn low_dimension_is_not_lacunary() {
        let cc = cascade_complex(&unit_sphere_data(3, 1)).unwrap();
        assert!(!cc.lacunary);
    }

    #[test]
    fn cascade_rules() {
        let mut d = sphere_as_hypersurface();
        d.components.push(MorseBottComponent {
            id: "up".into(),
            dim: 0,
            action: 1.0,
            rs_trans_doubled: 0,
            morse_points: vec![MorsePoint { id: "top".into(), morse_index: 0 }],
        });
        // top has grading 0 and max grading 2 (doubled).
        d.cascades = vec![("max".into(), "top".into(), 1)];
        assert_eq!(cascade_complex(&d).unwrap_err().name(), "action-increasing");
        d.cascades = vec![("top".into(), "max".into(), 1)];
        assert_eq!(cascade_complex(&d).unwrap_err().name(), "grading-mismatch");
        d.cascades = vec![("top".into(), "min".into(), 3)];
        let cc = cascade_complex(&d).unwrap();
        assert_eq!(cc.complex.boundary_entries(), vec![("top".to_string(), "min".to_string())]);
        assert!(!cc.lacunary);
    }

    #[test]
    fn spectra() {
        let s = action_spectrum(&[1.0], -2, 2).unwrap();
        let v: Vec<f64> = s.iter().map(|x| x.value).collect();
        assert_eq!(v, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(action_spectrum(&[], -3, 3).unwrap().len(), 1);
        let r2 = 2f64.sqrt();
        let s = action_spectrum(&[1.0, r2], 1, 2).unwrap();
        let v: Vec<f64> = s.iter().map(|x| x.value).collect();
        assert_eq!(v, vec![0.0, 1.0, r2, 2.0, 2.0 * r2]);
        assert!(action_spectrum(&[0.0], 1, 2).is_err());
        let s = action_spectrum(&[1.0, 2.0], 1, 2).unwrap();
        assert_eq!(s.iter().find(|x| x.value == 2.0).unwrap().multiplicity, 2);
    }
}
