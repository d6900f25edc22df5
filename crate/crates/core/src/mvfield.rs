//! Multivector fields and the flow digraph they generate.

use std::fmt;

use thiserror::Error;

use crate::simplicial::{Simplex, SimplicialComplex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldViolation {
    UnknownSimplex { block: usize, index: usize },
    EmptyBlock(usize),
    Uncovered(Simplex),
    DoubleCovered { simplex: Simplex, first_block: usize, second_block: usize },
    /// `lower <= middle <= upper` with both ends in `block` but `middle` outside.
    NotConvex { block: usize, lower: Simplex, middle: Simplex, upper: Simplex },
}

impl fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnknownSimplex { block, index } => {
                write!(f, "block {block} references unknown simplex index {index}")
            }
            Self::EmptyBlock(b) => write!(f, "block {b} is empty"),
            Self::Uncovered(s) => write!(f, "uncovered simplex {s}"),
            Self::DoubleCovered { simplex, first_block, second_block } => {
                write!(f, "simplex {simplex} is in blocks {first_block} and {second_block}")
            }
            Self::NotConvex { block, lower, middle, upper } => write!(
                f,
                "block {block} is not convex: {lower} <= {middle} <= {upper} but {middle} is missing"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid multivector field: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct FieldError {
    pub violations: Vec<FieldViolation>,
}

/// A partition of a complex into convex blocks (multivectors).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultivectorField {
    blocks: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl MultivectorField {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block id of simplex `id`.
    pub fn owner(&self, id: usize) -> usize {
        self.owner[id]
    }

    /// The multivector containing simplex `id`.
    pub fn block_of(&self, id: usize) -> &[usize] {
        &self.blocks[self.owner[id]]
    }

    /// Every block has at most two simplices.
    pub fn is_forman(&self) -> bool {
        self.blocks.iter().all(|b| b.len() <= 2)
    }

    pub fn singletons(complex: &SimplicialComplex) -> Self {
        Self { blocks: (0..complex.len()).map(|k| vec![k]).collect(), owner: (0..complex.len()).collect() }
    }
}

/// Checks that `blocks` partitions `complex` into convex sets.
///
/// Every problem found is reported; convexity is reported once per block
/// with the first missing intermediate simplex.
pub fn validate_field(
    complex: &SimplicialComplex,
    blocks: Vec<Vec<usize>>,
) -> Result<MultivectorField, FieldError> {
    let n = complex.len();
    let mut violations = Vec::new();
    let mut owner = vec![usize::MAX; n];
    let mut blocks = blocks;
    for (b, block) in blocks.iter_mut().enumerate() {
        if block.is_empty() {
            violations.push(FieldViolation::EmptyBlock(b));
        }
        block.sort_unstable();
        block.dedup();
        for &s in block.iter() {
            if s >= n {
                violations.push(FieldViolation::UnknownSimplex { block: b, index: s });
            } else if owner[s] != usize::MAX {
                violations.push(FieldViolation::DoubleCovered {
                    simplex: complex.simplex(s).clone(),
                    first_block: owner[s],
                    second_block: b,
                });
            } else {
                owner[s] = b;
            }
        }
    }
    for (s, &o) in owner.iter().enumerate() {
        if o == usize::MAX {
            violations.push(FieldViolation::Uncovered(complex.simplex(s).clone()));
        }
    }
    for (b, block) in blocks.iter().enumerate() {
        if let Some((lower, middle, upper)) = convexity_witness(complex, block) {
            violations.push(FieldViolation::NotConvex {
                block: b,
                lower: complex.simplex(lower).clone(),
                middle: complex.simplex(middle).clone(),
                upper: complex.simplex(upper).clone(),
            });
        }
    }
    if violations.is_empty() {
        Ok(MultivectorField { blocks, owner })
    } else {
        Err(FieldError { violations })
    }
}

/// Finds `lower < middle < upper` with `lower`, `upper` in the sorted
/// `block` and `middle` outside it.
fn convexity_witness(complex: &SimplicialComplex, block: &[usize]) -> Option<(usize, usize, usize)> {
    let n = complex.len();
    for &upper in block.iter().filter(|&&s| s < n) {
        let top = complex.simplex(upper);
        for &lower in block.iter().filter(|&&s| s < n) {
            let bottom = complex.simplex(lower);
            if bottom.dim() + 2 > top.dim() || !bottom.is_face_of(top) {
                continue;
            }
            let extra: Vec<&String> =
                top.vertices().iter().filter(|v| !bottom.vertices().contains(v)).collect();
            let mut middles: Vec<usize> = (1u32..(1 << extra.len()) - 1)
                .map(|mask| {
                    let verts = bottom.vertices().iter().cloned().chain(
                        extra.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, v)| (*v).clone()),
                    );
                    let s = Simplex::new(verts).expect("subset of a simplex");
                    complex.index_of(&s).expect("complex is closed")
                })
                .collect();
            middles.sort_unstable();
            if let Some(&m) = middles.iter().find(|m| block.binary_search(m).is_err()) {
                return Some((lower, m, upper));
            }
        }
    }
    None
}

/// The directed graph of the multivalued flow map: `s -> t` iff `t` lies in
/// the multivector of `s` or in the closure of `s`. Every node has a self-loop.
#[derive(Debug, Clone)]
pub struct FlowDigraph {
    successors: Vec<Vec<usize>>,
}

impl FlowDigraph {
    pub fn len(&self) -> usize {
        self.successors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.successors.is_empty()
    }

    /// Sorted successor list of `node` (contains `node`).
    pub fn successors(&self, node: usize) -> &[usize] {
        &self.successors[node]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.successors[from].binary_search(&to).is_ok()
    }

    /// A digraph from arbitrary successor lists, for tests and tooling.
    pub fn from_successors(mut successors: Vec<Vec<usize>>) -> Self {
        for s in &mut successors {
            s.sort_unstable();
            s.dedup();
        }
        Self { successors }
    }
}

pub fn flow_digraph(complex: &SimplicialComplex, field: &MultivectorField) -> FlowDigraph {
    let successors = (0..complex.len())
        .map(|s| {
            let mut succ = complex.faces(s).expect("index in range");
            succ.extend_from_slice(field.block_of(s));
            succ.sort_unstable();
            succ.dedup();
            succ
        })
        .collect();
    FlowDigraph { successors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annulus() -> SimplicialComplex {
        SimplicialComplex::from_facets([["A", "B", "C"], ["C", "D", "A"]]).unwrap()
    }

    fn ids(k: &SimplicialComplex, labels: &[&str]) -> Vec<usize> {
        labels.iter().map(|l| k.index_of(&Simplex::from_chars(l).unwrap()).unwrap()).collect()
    }

    fn annulus_field(k: &SimplicialComplex) -> MultivectorField {
        let blocks = [
            &["A", "AB"][..],
            &["B", "BC"],
            &["C", "CD"],
            &["D", "AD"],
            &["AC"],
            &["ABC"],
            &["ACD"],
        ]
        .iter()
        .map(|b| ids(k, b))
        .collect();
        validate_field(k, blocks).unwrap()
    }

    #[test]
    fn annulus_field_is_valid() {
        let k = annulus();
        let v = annulus_field(&k);
        assert!(v.is_forman());
        assert_eq!(v.blocks().len(), 7);
    }

    #[test]
    fn singletons_are_valid() {
        let k = annulus();
        let blocks = (0..k.len()).map(|i| vec![i]).collect();
        assert_eq!(validate_field(&k, blocks).unwrap(), MultivectorField::singletons(&k));
    }

    #[test]
    fn non_convex_block_reports_witness() {
        let k = annulus();
        let mut blocks = vec![ids(&k, &["A", "ABC"])];
        for i in 0..k.len() {
            if !blocks[0].contains(&i) {
                blocks.push(vec![i]);
            }
        }
        let err = validate_field(&k, blocks).unwrap_err();
        assert_eq!(
            err.violations,
            vec![FieldViolation::NotConvex {
                block: 0,
                lower: Simplex::from_chars("A").unwrap(),
                middle: Simplex::from_chars("AB").unwrap(),
                upper: Simplex::from_chars("ABC").unwrap(),
            }]
        );
    }

    #[test]
    fn partition_violations() {
        let k = annulus();
        let d = ids(&k, &["D"])[0];
        let a = ids(&k, &["A"])[0];
        let mut blocks: Vec<Vec<usize>> = (0..k.len()).filter(|&i| i != d).map(|i| vec![i]).collect();
        blocks.push(vec![a]);
        blocks.push(vec![]);
        blocks.push(vec![42]);
        let err = validate_field(&k, blocks).unwrap_err();
        assert!(err.violations.contains(&FieldViolation::Uncovered(Simplex::from_chars("D").unwrap())));
        assert!(err.violations.iter().any(|v| matches!(v, FieldViolation::DoubleCovered { .. })));
        assert!(err.violations.iter().any(|v| matches!(v, FieldViolation::EmptyBlock(_))));
        assert!(err.violations.iter().any(|v| matches!(v, FieldViolation::UnknownSimplex { index: 42, .. })));
        assert!(err.to_string().contains("uncovered simplex D"));
    }

    #[test]
    fn flow_edges_on_annulus() {
        let k = annulus();
        let v = annulus_field(&k);
        let g = flow_digraph(&k, &v);
        let [a, ab, b] = ids(&k, &["A", "AB", "B"])[..] else { unreachable!() };
        assert!(g.has_edge(a, ab));
        assert!(g.has_edge(ab, a));
        assert!(g.has_edge(ab, b));
        for s in 0..k.len() {
            assert!(g.has_edge(s, s));
            for &f in k.boundary_faces(s).unwrap() {
                assert!(g.has_edge(s, f));
            }
        }
    }

    #[test]
    fn singleton_flow_is_closure_only() {
        let k = annulus();
        let g = flow_digraph(&k, &MultivectorField::singletons(&k));
        for s in 0..k.len() {
            assert_eq!(g.successors(s), k.faces(s).unwrap().as_slice());
        }
        let point = SimplicialComplex::from_facets([["A"]]).unwrap();
        let g = flow_digraph(&point, &MultivectorField::singletons(&point));
        assert_eq!(g.successors(0), &[0]);
    }
}
