//! Finite abstract simplicial complexes with named vertices.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::gf2::SparseGF2Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("a simplex needs at least one vertex")]
    EmptySimplex,
    #[error("vertex {0:?} repeated within one simplex")]
    DuplicateVertex(String),
    #[error("simplex {0} listed twice")]
    DuplicateSimplex(Simplex),
    #[error("missing face {face} of simplex {simplex}")]
    MissingFace { simplex: Simplex, face: Simplex },
    #[error("simplex {0} is not in the complex")]
    UnknownSimplex(Simplex),
    #[error("simplex index {0} out of range")]
    IndexOutOfRange(usize),
}

/// A simplex given by its sorted, duplicate-free vertex names.
///
/// Simplices compare by dimension first, then lexicographically on vertices;
/// this is the canonical order used to index a [`SimplicialComplex`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Simplex(Vec<String>);

impl Simplex {
    pub fn new<I, S>(vertices: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v: Vec<String> = vertices.into_iter().map(Into::into).collect();
        if v.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        v.sort();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(ComplexError::DuplicateVertex(w[0].clone()));
        }
        Ok(Simplex(v))
    }

    /// Parses a compact label where every character is a vertex, e.g. `"ABC"`.
    pub fn from_chars(label: &str) -> Result<Self, ComplexError> {
        Self::new(label.chars().map(String::from))
    }

    pub fn vertices(&self) -> &[String] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, in canonical order.
    pub fn boundary(&self) -> Vec<Simplex> {
        if self.0.len() == 1 {
            return Vec::new();
        }
        let mut faces: Vec<Simplex> = (0..self.0.len())
            .map(|skip| {
                Simplex(
                    self.0
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != skip)
                        .map(|(_, v)| v.clone())
                        .collect(),
                )
            })
            .collect();
        faces.sort();
        faces
    }

    /// Whether `self` is a (not necessarily proper) face of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        // both sorted: subset test by merge
        let mut it = other.0.iter();
        self.0.iter().all(|v| it.any(|w| w == v))
    }

    /// The vertices joined into one label: `"AB"` when every vertex name is a
    /// single character, otherwise comma separated.
    pub fn label(&self) -> String {
        if self.0.iter().all(|v| v.chars().count() == 1) {
            self.0.concat()
        } else {
            self.0.join(",")
        }
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Simplex({})", self.label())
    }
}

/// A closure-closed set of simplices, indexed `0..len()` in canonical order.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    simplices: Vec<Simplex>,
    index: HashMap<Simplex, usize>,
    boundary: Vec<Vec<usize>>,
    cofaces: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    /// The closure of a set of facets.
    pub fn from_facets<I, F, S>(facets: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = F>,
        F: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut all = BTreeSet::new();
        for facet in facets {
            let facet = Simplex::new(facet)?;
            let n = facet.0.len();
            if n > 24 {
                // 2^n faces would not fit in memory anyway
                panic!("facet of dimension {} is too large", n - 1);
            }
            for mask in 1u32..(1 << n) {
                let verts = (0..n)
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| facet.0[k].clone())
                    .collect();
                all.insert(Simplex(verts));
            }
        }
        Ok(Self::from_sorted(all.into_iter().collect()))
    }

    /// A complex from an explicit simplex list, which must already be closed.
    pub fn from_simplices<I>(simplices: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = Simplex>,
    {
        let mut list: Vec<Simplex> = simplices.into_iter().collect();
        list.sort();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(ComplexError::DuplicateSimplex(w[0].clone()));
        }
        let present: std::collections::HashSet<&Simplex> = list.iter().collect();
        for s in &list {
            if let Some(face) = s.boundary().into_iter().find(|f| !present.contains(f)) {
                return Err(ComplexError::MissingFace { simplex: s.clone(), face });
            }
        }
        Ok(Self::from_sorted(list))
    }

    fn from_sorted(simplices: Vec<Simplex>) -> Self {
        let index: HashMap<Simplex, usize> =
            simplices.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect();
        let boundary: Vec<Vec<usize>> = simplices
            .iter()
            .map(|s| s.boundary().iter().map(|f| index[f]).collect())
            .collect();
        let mut cofaces = vec![Vec::new(); simplices.len()];
        for (k, faces) in boundary.iter().enumerate() {
            for &f in faces {
                cofaces[f].push(k);
            }
        }
        Self { simplices, index, boundary, cofaces }
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Panics if `id` is out of range.
    pub fn simplex(&self, id: usize) -> &Simplex {
        &self.simplices[id]
    }

    pub fn dim_of(&self, id: usize) -> usize {
        self.simplices[id].dim()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.last().map(Simplex::dim)
    }

    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Looks up a simplex given as a vertex list.
    pub fn resolve<I, S>(&self, vertices: I) -> Result<usize, ComplexError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let s = Simplex::new(vertices)?;
        self.index_of(&s).ok_or(ComplexError::UnknownSimplex(s))
    }

    fn check(&self, id: usize) -> Result<(), ComplexError> {
        if id < self.len() {
            Ok(())
        } else {
            Err(ComplexError::IndexOutOfRange(id))
        }
    }

    /// Codimension-one faces of simplex `id`, ascending.
    pub fn boundary_faces(&self, id: usize) -> Result<&[usize], ComplexError> {
        self.check(id)?;
        Ok(&self.boundary[id])
    }

    /// Codimension-one cofaces of simplex `id`, ascending.
    pub fn cofaces(&self, id: usize) -> Result<&[usize], ComplexError> {
        self.check(id)?;
        Ok(&self.cofaces[id])
    }

    /// All faces of `id`, itself included, ascending.
    pub fn faces(&self, id: usize) -> Result<Vec<usize>, ComplexError> {
        self.closure([id]).map(|s| s.into_iter().collect())
    }

    /// Union of the faces of every simplex in `ids`.
    pub fn closure<I>(&self, ids: I) -> Result<BTreeSet<usize>, ComplexError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut out = BTreeSet::new();
        let mut stack = Vec::new();
        for id in ids {
            self.check(id)?;
            if out.insert(id) {
                stack.push(id);
            }
        }
        while let Some(s) = stack.pop() {
            for &f in &self.boundary[s] {
                if out.insert(f) {
                    stack.push(f);
                }
            }
        }
        Ok(out)
    }

    /// The full boundary matrix with simplex `k` at position `k + 1`.
    pub fn boundary_matrix(&self) -> SparseGF2Matrix {
        let columns = self
            .boundary
            .iter()
            .map(|faces| faces.iter().map(|&f| f + 1).collect())
            .collect();
        SparseGF2Matrix::from_columns(self.len(), columns).expect("faces are distinct")
    }

    /// Dimension of every simplex, indexed by id.
    pub fn dims(&self) -> Vec<usize> {
        self.simplices.iter().map(Simplex::dim).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(label: &str) -> Simplex {
        Simplex::from_chars(label).unwrap()
    }

    fn annulus() -> SimplicialComplex {
        SimplicialComplex::from_facets([["A", "B", "C"], ["C", "D", "A"]]).unwrap()
    }

    #[test]
    fn annulus_has_eleven_simplices() {
        let k = annulus();
        let labels: Vec<String> = k.simplices().iter().map(Simplex::label).collect();
        assert_eq!(labels, ["A", "B", "C", "D", "AB", "AC", "AD", "BC", "CD", "ABC", "ACD"]);
    }

    #[test]
    fn closure_of_small_facets() {
        let k = SimplicialComplex::from_facets([["A"]]).unwrap();
        assert_eq!(k.len(), 1);
        let k = SimplicialComplex::from_facets([["A", "B"]]).unwrap();
        assert_eq!(k.simplices(), &[s("A"), s("B"), s("AB")]);
    }

    #[test]
    fn duplicate_vertex_rejected() {
        assert_eq!(
            SimplicialComplex::from_facets([["A", "A"]]).unwrap_err(),
            ComplexError::DuplicateVertex("A".into())
        );
        assert_eq!(Simplex::new(Vec::<String>::new()), Err(ComplexError::EmptySimplex));
    }

    #[test]
    fn closure_operation() {
        let k = annulus();
        let id = |l: &str| k.index_of(&s(l)).unwrap();
        let got: Vec<Simplex> =
            k.closure([id("ABC")]).unwrap().into_iter().map(|i| k.simplex(i).clone()).collect();
        assert_eq!(got, ["A", "B", "C", "AB", "AC", "BC", "ABC"].map(s));
        assert!(k.closure([]).unwrap().is_empty());
        let got: Vec<Simplex> = k
            .closure([id("CD"), id("AD")])
            .unwrap()
            .into_iter()
            .map(|i| k.simplex(i).clone())
            .collect();
        assert_eq!(got, ["A", "C", "D", "AD", "CD"].map(s));
        assert_eq!(k.closure([99]), Err(ComplexError::IndexOutOfRange(99)));
    }

    #[test]
    fn boundary_faces_of_simplices() {
        let k = annulus();
        let id = |l: &str| k.index_of(&s(l)).unwrap();
        let names = |ids: &[usize]| ids.iter().map(|&i| k.simplex(i).clone()).collect::<Vec<_>>();
        assert_eq!(names(k.boundary_faces(id("AB")).unwrap()), [s("A"), s("B")]);
        assert!(k.boundary_faces(id("A")).unwrap().is_empty());
        assert_eq!(names(k.boundary_faces(id("ACD")).unwrap()), ["AC", "AD", "CD"].map(s));
        for i in 0..k.len() {
            let expected = if k.dim_of(i) == 0 { 0 } else { k.dim_of(i) + 1 };
            assert_eq!(k.boundary_faces(i).unwrap().len(), expected);
        }
    }

    #[test]
    fn explicit_simplex_list_must_be_closed() {
        let err = SimplicialComplex::from_simplices([s("A"), s("AB")]).unwrap_err();
        assert_eq!(err, ComplexError::MissingFace { simplex: s("AB"), face: s("B") });
        let err = SimplicialComplex::from_simplices([s("A"), s("A")]).unwrap_err();
        assert_eq!(err, ComplexError::DuplicateSimplex(s("A")));
        let k = SimplicialComplex::from_simplices([s("AB"), s("B"), s("A")]).unwrap();
        assert_eq!(k.len(), 3);
    }

    #[test]
    fn boundary_squares_to_zero() {
        let k = SimplicialComplex::from_facets([["0", "1", "2", "3"], ["2", "3", "4", "5"]]).unwrap();
        let d = k.boundary_matrix().to_dense(512).unwrap();
        assert!(d.multiply(&d).unwrap().is_zero());
    }

    #[test]
    fn annulus_boundary_rank() {
        // Betti numbers (1, 1, 0) on 11 cells: rank = (11 - 2) / 2
        assert_eq!(annulus().boundary_matrix().rank(), 5);
        assert_eq!(annulus().boundary_matrix().to_dense(64).unwrap().rank(), 5);
    }

    #[test]
    fn multi_character_labels() {
        let x = Simplex::new(["v10", "v2"]).unwrap();
        assert_eq!(x.label(), "v10,v2");
        assert!(Simplex::new(["v2"]).unwrap().is_face_of(&x));
        assert!(!s("C").is_face_of(&x));
    }
}
