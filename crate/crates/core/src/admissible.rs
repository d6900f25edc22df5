//! Admissible bases: a linear extension of the Morse order, an ordering of
//! the simplices inside each Morse set, and the boundary matrix assembled in
//! the resulting basis.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf2::SparseGF2Matrix;
use crate::morse::{MorseDecomposition, Poset};
use crate::simplicial::{Simplex, SimplicialComplex};

/// How Kahn's algorithm picks among simultaneously available Morse sets.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    MinSetId,
    /// Uniformly random choice from a ChaCha8 stream with this seed.
    Seeded(u64),
    /// Prefer sets appearing earlier in the list; unlisted sets come last,
    /// by id.
    Preference(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BasisError {
    #[error("sequence is not a permutation of the Morse sets")]
    NotPermutation,
    #[error("Morse set {later} is listed after set {earlier} although {later} < {earlier}")]
    NotExtension { earlier: usize, later: usize },
    #[error("intra order for Morse set {set} does not list exactly its members")]
    IntraOrderMismatch { set: usize },
    #[error("intra order given for unknown Morse set {0}")]
    UnknownSet(usize),
    #[error("basis is not a permutation of the complex")]
    NotBasis,
    #[error("simplices of Morse set {0} are not contiguous in the basis")]
    NotContiguous(usize),
    #[error("entry ({row}, {col}) lies on or below the diagonal")]
    BelowDiagonal { row: Simplex, col: Simplex },
}

/// A total order on Morse-set ids extending the Morse order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearExtension {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl LinearExtension {
    /// Validates an explicit sequence of set ids.
    pub fn from_order(poset: &Poset, order: Vec<usize>) -> Result<Self, BasisError> {
        let n = poset.len();
        let mut rank = vec![usize::MAX; n];
        if order.len() != n {
            return Err(BasisError::NotPermutation);
        }
        for (r, &p) in order.iter().enumerate() {
            if p >= n || rank[p] != usize::MAX {
                return Err(BasisError::NotPermutation);
            }
            rank[p] = r;
        }
        for (r, &q) in order.iter().enumerate() {
            if let Some(&p) = order[r + 1..].iter().find(|&&p| poset.lt(p, q)) {
                return Err(BasisError::NotExtension { earlier: q, later: p });
            }
        }
        Ok(Self { order, rank })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Position of set `p` in the extension.
    pub fn rank(&self, p: usize) -> usize {
        self.rank[p]
    }
}

/// Topologically sorts the Morse sets, minimal sets first.
pub fn linear_extension(poset: &Poset, tie_break: &TieBreak) -> LinearExtension {
    let n = poset.len();
    let mut pending: Vec<usize> = (0..n).map(|q| poset.direct_below(q).len()).collect();
    let mut above = vec![Vec::new(); n];
    for q in 0..n {
        for &p in poset.direct_below(q) {
            above[p].push(q);
        }
    }
    let priority: Vec<usize> = match tie_break {
        TieBreak::Preference(pref) => {
            let mut pr = vec![usize::MAX; n];
            for (k, &p) in pref.iter().enumerate() {
                if p < n && pr[p] == usize::MAX {
                    pr[p] = k;
                }
            }
            pr
        }
        _ => vec![0; n],
    };
    let mut rng = match tie_break {
        TieBreak::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut order = Vec::with_capacity(n);
    match rng.as_mut() {
        Some(rng) => {
            let mut available: Vec<usize> = (0..n).filter(|&q| pending[q] == 0).collect();
            while !available.is_empty() {
                available.sort_unstable();
                let k = rng.gen_range(0..available.len());
                let p = available.swap_remove(k);
                order.push(p);
                for &q in &above[p] {
                    pending[q] -= 1;
                    if pending[q] == 0 {
                        available.push(q);
                    }
                }
            }
        }
        None => {
            let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
                (0..n).filter(|&q| pending[q] == 0).map(|q| Reverse((priority[q], q))).collect();
            while let Some(Reverse((_, p))) = heap.pop() {
                order.push(p);
                for &q in &above[p] {
                    pending[q] -= 1;
                    if pending[q] == 0 {
                        heap.push(Reverse((priority[q], q)));
                    }
                }
            }
        }
    }
    assert_eq!(order.len(), n, "Morse order must be acyclic");
    LinearExtension::from_order(poset, order).expect("Kahn's algorithm yields a linear extension")
}

/// Order of simplices inside each Morse set.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum IntraOrder {
    /// Dimension ascending, then lexicographic (the complex's canonical order).
    #[default]
    DimLex,
    /// Explicit simplex ids per Morse set; unlisted sets use `DimLex`.
    Explicit(BTreeMap<usize, Vec<usize>>),
}

/// An ordered basis of simplices grouped by Morse set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleBasis {
    order: Vec<usize>,
    position_of: Vec<usize>,
    nu: Vec<usize>,
    homdim: Vec<usize>,
    linext: LinearExtension,
}

impl AdmissibleBasis {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Simplex ids in basis order (`order()[k]` sits at position `k + 1`).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Simplex at 1-based position `pos`.
    pub fn simplex_at(&self, pos: usize) -> usize {
        self.order[pos - 1]
    }

    /// 1-based position of simplex `id`.
    pub fn position_of(&self, id: usize) -> usize {
        self.position_of[id]
    }

    /// Morse-set id at 1-based position `pos`.
    pub fn grade_at(&self, pos: usize) -> usize {
        self.nu[pos - 1]
    }

    /// Grades indexed by `pos - 1`.
    pub fn grades(&self) -> &[usize] {
        &self.nu
    }

    /// Homological dimensions indexed by `pos - 1`.
    pub fn dims(&self) -> &[usize] {
        &self.homdim
    }

    pub fn linear_extension(&self) -> &LinearExtension {
        &self.linext
    }

    /// Accepts an explicit ordering of all simplices, checking that Morse sets
    /// are contiguous, appear along a linear extension, and that the boundary
    /// matrix is strictly upper triangular.
    pub fn from_order(
        complex: &SimplicialComplex,
        decomp: &MorseDecomposition,
        order: Vec<usize>,
    ) -> Result<Self, BasisError> {
        let n = complex.len();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(BasisError::NotBasis);
        }
        for &s in &order {
            if s >= n || std::mem::replace(&mut seen[s], true) {
                return Err(BasisError::NotBasis);
            }
        }
        let mut set_sequence: Vec<usize> = Vec::new();
        for &s in &order {
            let p = decomp.grade_of(s);
            if set_sequence.last() != Some(&p) {
                if set_sequence.contains(&p) {
                    return Err(BasisError::NotContiguous(p));
                }
                set_sequence.push(p);
            }
        }
        let linext = LinearExtension::from_order(decomp.poset(), set_sequence)?;
        Self::finish(complex, decomp, order, linext)
    }

    fn finish(
        complex: &SimplicialComplex,
        decomp: &MorseDecomposition,
        order: Vec<usize>,
        linext: LinearExtension,
    ) -> Result<Self, BasisError> {
        let mut position_of = vec![0; complex.len()];
        for (k, &s) in order.iter().enumerate() {
            position_of[s] = k + 1;
        }
        for &s in &order {
            for &f in complex.boundary_faces(s).expect("ids come from the complex") {
                if position_of[f] >= position_of[s] {
                    return Err(BasisError::BelowDiagonal {
                        row: complex.simplex(f).clone(),
                        col: complex.simplex(s).clone(),
                    });
                }
            }
        }
        let nu = order.iter().map(|&s| decomp.grade_of(s)).collect();
        let homdim = order.iter().map(|&s| complex.dim_of(s)).collect();
        Ok(Self { order, position_of, nu, homdim, linext })
    }
}

/// Groups simplices by Morse set along `linext`, ordering each set by `intra`.
pub fn build_admissible_basis(
    complex: &SimplicialComplex,
    decomp: &MorseDecomposition,
    linext: &LinearExtension,
    intra: &IntraOrder,
) -> Result<AdmissibleBasis, BasisError> {
    if let IntraOrder::Explicit(map) = intra {
        for (&p, list) in map {
            if p >= decomp.len() {
                return Err(BasisError::UnknownSet(p));
            }
            let mut sorted = list.clone();
            sorted.sort_unstable();
            if sorted != decomp.set(p) {
                return Err(BasisError::IntraOrderMismatch { set: p });
            }
        }
    }
    let mut order = Vec::with_capacity(complex.len());
    for &p in linext.order() {
        match intra {
            IntraOrder::Explicit(map) if map.contains_key(&p) => order.extend_from_slice(&map[&p]),
            // sets are stored sorted by id, which is dimension-then-lex
            _ => order.extend_from_slice(decomp.set(p)),
        }
    }
    AdmissibleBasis::finish(complex, decomp, order, linext.clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssemblyError {
    #[error("boundary entry ({row}, {col}) violates the Morse order; the order direction is inconsistent")]
    NotFiltered { row: Simplex, col: Simplex },
    #[error("boundary entry ({row}, {col}) is not above the diagonal")]
    NotUpperTriangular { row: Simplex, col: Simplex },
}

/// Boundary matrix of a complex in an admissible basis, with its grading.
#[derive(Clone, Debug)]
pub struct FilteredBoundaryMatrix {
    pub matrix: SparseGF2Matrix,
    pub basis: AdmissibleBasis,
    pub poset: Poset,
    pub labels: Vec<Simplex>,
}

impl FilteredBoundaryMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub fn assemble(
    complex: &SimplicialComplex,
    decomp: &MorseDecomposition,
    basis: &AdmissibleBasis,
) -> Result<FilteredBoundaryMatrix, AssemblyError> {
    let columns: Vec<Vec<usize>> = basis
        .order()
        .iter()
        .map(|&s| {
            complex
                .boundary_faces(s)
                .expect("ids come from the complex")
                .iter()
                .map(|&f| basis.position_of(f))
                .collect()
        })
        .collect();
    let matrix = SparseGF2Matrix::from_columns(basis.len(), columns).expect("boundary faces are distinct");
    let poset = decomp.poset().clone();
    for (i, j) in matrix.entries() {
        let label = |pos| complex.simplex(basis.simplex_at(pos)).clone();
        if i >= j {
            return Err(AssemblyError::NotUpperTriangular { row: label(i), col: label(j) });
        }
        if !poset.le(basis.grade_at(i), basis.grade_at(j)) {
            return Err(AssemblyError::NotFiltered { row: label(i), col: label(j) });
        }
    }
    let labels = basis.order().iter().map(|&s| complex.simplex(s).clone()).collect();
    Ok(FilteredBoundaryMatrix { matrix, basis: basis.clone(), poset, labels })
}
