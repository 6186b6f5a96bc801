use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::gf2::GfMatrix;
use crate::error::{Result, SymError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    pub id: String,
    /// Twice the degree, so that half-integer gradings stay exact.
    pub doubled_degree: i64,
    pub action: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryEntry {
    pub from: String,
    pub to: String,
}

/// One row of a Betti table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BettiEntry {
    pub doubled_degree: i64,
    pub rank: usize,
}

/// Betti numbers indexed by doubled degree, listing every degree that
/// carries generators.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Betti(pub BTreeMap<i64, usize>);

impl Betti {
    pub fn get(&self, doubled_degree: i64) -> usize {
        self.0.get(&doubled_degree).copied().unwrap_or(0)
    }

    /// Degrees (doubled) with nonzero rank.
    pub fn support(&self) -> Vec<i64> {
        self.0.iter().filter(|(_, &r)| r > 0).map(|(&d, _)| d).collect()
    }

    pub fn entries(&self) -> Vec<BettiEntry> {
        self.0
            .iter()
            .map(|(&doubled_degree, &rank)| BettiEntry {
                doubled_degree,
                rank,
            })
            .collect()
    }
}

impl Serialize for Betti {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries().serialize(s)
    }
}

/// Formats a doubled degree as a decimal (`3 -> "1.5"`).
pub fn degree_label(doubled: i64) -> String {
    if doubled % 2 == 0 {
        format!("{}", doubled / 2)
    } else {
        format!("{}", doubled as f64 / 2.0)
    }
}

/// A finite GF(2) chain complex. `boundary[(i, j)]` is the coefficient of
/// generator `i` in the boundary of generator `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainComplex {
    generators: Vec<Generator>,
    index: HashMap<String, usize>,
    boundary: GfMatrix,
}

impl ChainComplex {
    /// Validates ids, the degree rule and `d^2 = 0`. Repeated entries add
    /// modulo 2.
    pub fn build(generators: Vec<Generator>, entries: &[BoundaryEntry]) -> Result<Self> {
        let mut index = HashMap::new();
        for (k, g) in generators.iter().enumerate() {
            if index.insert(g.id.clone(), k).is_some() {
                return Err(SymError::DuplicateGenerator(g.id.clone()));
            }
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| SymError::UnknownGenerator(id.to_string()))
        };
        let mut boundary = GfMatrix::zeros(generators.len(), generators.len());
        for e in entries {
            let (from, to) = (lookup(&e.from)?, lookup(&e.to)?);
            if generators[from].doubled_degree - generators[to].doubled_degree != 2 {
                return Err(SymError::DegreeRule {
                    from: e.from.clone(),
                    to: e.to.clone(),
                });
            }
            boundary.toggle(to, from);
        }
        let square = boundary.mul(&boundary);
        if let Some(j) = (0..square.ncols()).find(|&j| !square.column(j).is_zero()) {
            return Err(SymError::DSquaredNonzero {
                witness: generators[j].id.clone(),
            });
        }
        Ok(Self {
            generators,
            index,
            boundary,
        })
    }

    pub fn empty() -> Self {
        Self {
            generators: Vec::new(),
            index: HashMap::new(),
            boundary: GfMatrix::zeros(0, 0),
        }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn boundary(&self) -> &GfMatrix {
        &self.boundary
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Nonzero boundary coefficients as `(from, to)` id pairs.
    pub fn boundary_entries(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for j in 0..self.len() {
            for i in self.boundary.column(j).ones() {
                out.push((self.generators[j].id.clone(), self.generators[i].id.clone()));
            }
        }
        out
    }

    /// Generator positions in the given doubled degree, in input order.
    pub fn in_degree(&self, doubled_degree: i64) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| self.generators[k].doubled_degree == doubled_degree)
            .collect()
    }

    pub fn chain_groups(&self) -> Betti {
        let mut out = BTreeMap::new();
        for g in &self.generators {
            *out.entry(g.doubled_degree).or_insert(0) += 1;
        }
        Betti(out)
    }

    /// `d_k : C_k -> C_{k-1}` with `k` given doubled.
    pub fn boundary_in_degree(&self, doubled_degree: i64) -> GfMatrix {
        self.boundary
            .submatrix(&self.in_degree(doubled_degree - 2), &self.in_degree(doubled_degree))
    }

    /// `dim ker d_k - rank d_{k+1}` over GF(2).
    pub fn homology(&self) -> Betti {
        let groups = self.chain_groups();
        let rank = |d: i64| self.boundary_in_degree(d).rank();
        Betti(
            groups
                .0
                .iter()
                .map(|(&d, &dim)| (d, dim - rank(d) - rank(d + 2)))
                .collect(),
        )
    }

    /// Cohomology of the transposed complex, `delta^k = (d_{k+1})^T`.
    pub fn cohomology(&self) -> Betti {
        let groups = self.chain_groups();
        let coboundary = self.boundary.transpose();
        let rank = |d: i64| {
            coboundary
                .submatrix(&self.in_degree(d + 2), &self.in_degree(d))
                .rank()
        };
        Betti(
            groups
                .0
                .iter()
                .map(|(&d, &dim)| (d, dim - rank(d) - rank(d - 2)))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gens(spec: &[(&str, i64)]) -> Vec<Generator> {
        spec.iter()
            .map(|&(id, d)| Generator {
                id: id.into(),
                doubled_degree: 2 * d,
                action: None,
            })
            .collect()
    }

    fn entries(spec: &[(&str, &str)]) -> Vec<BoundaryEntry> {
        spec.iter()
            .map(|&(f, t)| BoundaryEntry {
                from: f.into(),
                to: t.into(),
            })
            .collect()
    }

    #[test]
    fn sphere_height_function() {
        let c = ChainComplex::build(gens(&[("min", 0), ("max", 2)]), &[]).unwrap();
        assert_eq!(c.homology().0, BTreeMap::from([(0, 1), (4, 1)]));
        assert_eq!(c.homology(), c.cohomology());
    }

    #[test]
    fn projective_plane_even_counts() {
        // Every connecting count is 2, so each pair is listed twice.
        let c = ChainComplex::build(
            gens(&[("p", 0), ("q", 1), ("r", 2)]),
            &entries(&[("q", "p"), ("q", "p"), ("r", "q"), ("r", "q")]),
        )
        .unwrap();
        assert!(c.boundary().is_zero());
        assert_eq!(c.homology().0, BTreeMap::from([(0, 1), (2, 1), (4, 1)]));
    }

    #[test]
    fn rejects_bad_boundaries() {
        let g = gens(&[("a", 2), ("b", 1), ("b2", 1), ("c", 0)]);
        let err = ChainComplex::build(g.clone(), &entries(&[("a", "b"), ("b", "c")])).unwrap_err();
        assert_eq!(err, SymError::DSquaredNonzero { witness: "a".into() });
        let ok = ChainComplex::build(g.clone(), &entries(&[("a", "b"), ("a", "b2"), ("b", "c"), ("b2", "c")]));
        assert!(ok.is_ok());
        let err = ChainComplex::build(g.clone(), &entries(&[("a", "c")])).unwrap_err();
        assert_eq!(err.name(), "degree-rule");
        let err = ChainComplex::build(g, &entries(&[("a", "z")])).unwrap_err();
        assert_eq!(err.name(), "unknown-generator");
    }

    #[test]
    fn interval_is_acyclic_above_a_point() {
        // Two minima joined by a maximum on an interval.
        let c = ChainComplex::build(
            gens(&[("x", 0), ("y", 0), ("m", 1)]),
            &entries(&[("m", "x"), ("m", "y")]),
        )
        .unwrap();
        assert_eq!(c.homology().0, BTreeMap::from([(0, 1), (2, 0)]));
        assert_eq!(c.cohomology(), c.homology());
    }

    #[test]
    fn empty_complex() {
        let c = ChainComplex::empty();
        assert!(c.homology().0.is_empty());
        assert!(c.cohomology().0.is_empty());
    }

    #[test]
    fn labels() {
        assert_eq!(degree_label(4), "2");
        assert_eq!(degree_label(-7), "-3.5");
    }
}
