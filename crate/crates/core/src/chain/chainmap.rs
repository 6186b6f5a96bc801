use serde::Serialize;

use super::complex::ChainComplex;
use super::gf2::{BitVec, GfMatrix};
use crate::error::{Result, SymError};

/// Degree-preserving GF(2) map commuting with the boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMap {
    source: ChainComplex,
    target: ChainComplex,
    /// Rows index target generators, columns source generators.
    matrix: GfMatrix,
}

fn lookup(c: &ChainComplex, id: &str) -> Result<usize> {
    c.position(id)
        .ok_or_else(|| SymError::UnknownGenerator(id.to_string()))
}

/// Matrix of `(from, to)` pairs with `from` in `source` and `to` in
/// `target`; repeated pairs add modulo 2.
fn matrix_from_pairs(
    source: &ChainComplex,
    target: &ChainComplex,
    pairs: &[(String, String)],
    degree_shift: i64,
) -> Result<GfMatrix> {
    let mut m = GfMatrix::zeros(target.len(), source.len());
    for (from, to) in pairs {
        let (j, i) = (lookup(source, from)?, lookup(target, to)?);
        let shift = target.generators()[i].doubled_degree - source.generators()[j].doubled_degree;
        if shift != degree_shift {
            return Err(SymError::DegreeRule {
                from: from.clone(),
                to: to.clone(),
            });
        }
        m.toggle(i, j);
    }
    Ok(m)
}

fn describe(c: &ChainComplex, v: &BitVec) -> String {
    let ids: Vec<&str> = v.ones().map(|k| c.generators()[k].id.as_str()).collect();
    ids.join(" + ")
}

impl ChainMap {
    pub fn new(source: ChainComplex, target: ChainComplex, pairs: &[(String, String)]) -> Result<Self> {
        let matrix = matrix_from_pairs(&source, &target, pairs, 0)?;
        Self::from_matrix(source, target, matrix)
    }

    pub fn from_matrix(source: ChainComplex, target: ChainComplex, matrix: GfMatrix) -> Result<Self> {
        if matrix.nrows() != target.len() || matrix.ncols() != source.len() {
            return Err(SymError::DimensionMismatch {
                expected: target.len(),
                found: matrix.nrows(),
            });
        }
        for j in 0..source.len() {
            for i in matrix.column(j).ones() {
                if target.generators()[i].doubled_degree != source.generators()[j].doubled_degree {
                    return Err(SymError::DegreeRule {
                        from: source.generators()[j].id.clone(),
                        to: target.generators()[i].id.clone(),
                    });
                }
            }
        }
        let lhs = target.boundary().mul(&matrix);
        let rhs = matrix.mul(source.boundary());
        let diff = lhs.add(&rhs);
        if let Some(j) = (0..diff.ncols()).find(|&j| !diff.column(j).is_zero()) {
            return Err(SymError::NotChainMap(format!(
                "d f and f d differ on {}",
                source.generators()[j].id
            )));
        }
        Ok(Self {
            source,
            target,
            matrix,
        })
    }

    pub fn identity(c: &ChainComplex) -> Self {
        Self {
            source: c.clone(),
            target: c.clone(),
            matrix: GfMatrix::identity(c.len()),
        }
    }

    pub fn source(&self) -> &ChainComplex {
        &self.source
    }

    pub fn target(&self) -> &ChainComplex {
        &self.target
    }

    pub fn matrix(&self) -> &GfMatrix {
        &self.matrix
    }

    /// `self o first`.
    pub fn after(&self, first: &ChainMap) -> Result<ChainMap> {
        if first.target != self.source {
            return Err(SymError::NotChainMap("maps are not composable".into()));
        }
        Ok(ChainMap {
            source: first.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.mul(&first.matrix),
        })
    }

    /// A cycle on which `self` and `other` induce different homology
    /// classes, if any.
    pub fn homology_difference(&self, other: &ChainMap) -> Result<Option<String>> {
        if self.source != other.source || self.target != other.target {
            return Err(SymError::NotChainMap("maps have different ends".into()));
        }
        let diff = self.matrix.add(&other.matrix);
        for z in self.source.boundary().kernel() {
            let image = diff.apply(&z);
            if !image.is_zero() && !self.target.boundary().column_space_contains(&image) {
                return Ok(Some(describe(&self.source, &z)));
            }
        }
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuationReport {
    /// `[cb] o [ba] = [ca]` on homology.
    pub composition_holds: bool,
    /// A cycle on which the law fails.
    pub witness: Option<String>,
}

pub fn verify_continuation(ba: &ChainMap, cb: &ChainMap, ca: &ChainMap) -> Result<ContinuationReport> {
    let composed = cb.after(ba)?;
    let witness = composed.homology_difference(ca)?;
    Ok(ContinuationReport {
        composition_holds: witness.is_none(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomotopyReport {
    /// `f1 - f0 = d T + T d` holds exactly.
    pub homotopic: bool,
    /// A generator on which the identity fails.
    pub witness: Option<String>,
}

/// Checks the chain-homotopy identity for a candidate `T` of degree `+1`,
/// given as `(from, to)` pairs.
pub fn check_chain_homotopy(f0: &ChainMap, f1: &ChainMap, t: &[(String, String)]) -> Result<HomotopyReport> {
    if f0.source != f1.source || f0.target != f1.target {
        return Err(SymError::NotChainMap("maps have different ends".into()));
    }
    let t = matrix_from_pairs(&f0.source, &f0.target, t, 2)?;
    let lhs = f1.matrix.add(&f0.matrix);
    let rhs = f0.target.boundary().mul(&t).add(&t.mul(f0.source.boundary()));
    let diff = lhs.add(&rhs);
    let witness = (0..diff.ncols())
        .find(|&j| !diff.column(j).is_zero())
        .map(|j| f0.source.generators()[j].id.clone());
    Ok(HomotopyReport {
        homotopic: witness.is_none(),
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{BoundaryEntry, Generator};

    fn complex(spec: &[(&str, i64)], bd: &[(&str, &str)]) -> ChainComplex {
        let gens = spec
            .iter()
            .map(|&(id, d)| Generator {
                id: id.into(),
                doubled_degree: 2 * d,
                action: None,
            })
            .collect();
        let entries: Vec<BoundaryEntry> = bd
            .iter()
            .map(|&(f, t)| BoundaryEntry {
                from: f.into(),
                to: t.into(),
            })
            .collect();
        ChainComplex::build(gens, &entries).unwrap()
    }

    fn pairs(p: &[(&str, &str)]) -> Vec<(String, String)> {
        p.iter().map(|&(a, b)| (a.into(), b.into())).collect()
    }

    #[test]
    fn identities_compose() {
        let c = complex(&[("x", 0), ("y", 0), ("m", 1)], &[("m", "x"), ("m", "y")]);
        let id = ChainMap::identity(&c);
        let r = verify_continuation(&id, &id, &id).unwrap();
        assert!(r.composition_holds);
    }

    #[test]
    fn homotopic_maps_differ_by_dt_plus_td() {
        // Interval with two minima: the maps picking either minimum agree on
        // homology, and T = (x -> m) exhibits the homotopy.
        let c = complex(&[("x", 0), ("y", 0), ("m", 1)], &[("m", "x"), ("m", "y")]);
        let f0 = ChainMap::identity(&c);
        let f1 = ChainMap::new(c.clone(), c.clone(), &pairs(&[("x", "y"), ("y", "y")])).unwrap();
        assert!(f0.homology_difference(&f1).unwrap().is_none());
        let r = check_chain_homotopy(&f0, &f1, &pairs(&[("x", "m")])).unwrap();
        assert!(r.homotopic, "{r:?}");
        let r = check_chain_homotopy(&f0, &f1, &[]).unwrap();
        assert!(!r.homotopic);
    }

    #[test]
    fn different_homology_maps() {
        let s = complex(&[("min", 0), ("max", 2)], &[]);
        let zero = ChainMap::new(s.clone(), s.clone(), &[]).unwrap();
        let id = ChainMap::identity(&s);
        assert!(id.homology_difference(&zero).unwrap().is_some());
        let r = check_chain_homotopy(&id, &zero, &[]).unwrap();
        assert!(!r.homotopic);
        let r = verify_continuation(&id, &id, &zero).unwrap();
        assert!(!r.composition_holds);
    }

    #[test]
    fn non_chain_maps_are_rejected() {
        let c = complex(&[("x", 0), ("y", 0), ("m", 1)], &[("m", "x"), ("m", "y")]);
        let err = ChainMap::new(c.clone(), c, &pairs(&[("x", "x")])).unwrap_err();
        assert_eq!(err.name(), "not-chain-map");
    }
}
