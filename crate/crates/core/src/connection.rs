//! The single-pass reduction of a filtered boundary matrix and extraction of
//! the connection matrix from the reduced result.
//!
//! Columns are processed left to right. Inside column `j` the rows holding a
//! 1 are visited from the initial lowest entry downwards; whenever the row
//! `i` is the lowest entry of some other homogeneous column `s` (a column
//! whose lowest entry has its own grade), column `s` is added to column `j`
//! and row `j` to row `s`. This keeps the matrix a conjugate `E A E` of the
//! input, so every intermediate matrix stays a filtered boundary matrix.
//! Afterwards the homogeneous columns and their targets are dropped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::admissible::FilteredBoundaryMatrix;
use crate::gf2::SparseGF2Matrix;
use crate::morse::Poset;
use crate::simplicial::Simplex;

/// One column/row addition: column `source` was added to column `target`
/// (triggered in row `row`), followed by row `target` added to row `source`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdditionEvent {
    pub source: usize,
    pub target: usize,
    pub row: usize,
}

#[derive(Clone, Debug)]
pub struct ReduceOptions {
    /// Keep the list of addition events.
    pub record_trace: bool,
    /// Per-event consistency checks (expensive; dense squaring is limited to
    /// matrices with at most `dense_limit` columns).
    pub checks: bool,
    pub dense_limit: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        Self { record_trace: true, checks: false, dense_limit: 200 }
    }
}

impl ReduceOptions {
    /// No trace and no checks.
    pub fn fast() -> Self {
        Self { record_trace: false, checks: false, dense_limit: 0 }
    }

    pub fn checked() -> Self {
        Self { record_trace: true, checks: true, dense_limit: 200 }
    }
}

/// Something the run monitors observed. An empty diagnostics list is the
/// expected outcome on every input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    /// An addition created a 1 on or below the diagonal.
    BelowDiagonal { event: usize, row: usize, col: usize },
    /// The source column was not to the left although grades differ.
    IllegalSource { event: usize },
    /// The addition matrix `E` is not filtered.
    UnfilteredAddition { event: usize },
    /// `A * A != 0` after this event.
    SquareNonzero { event: usize },
    /// An already settled entry of the target column changed.
    EntryChanged { event: usize, row: usize, col: usize },
    /// Column `col` changed after its pass finished.
    ColumnChanged { col: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BelowDiagonal { event, row, col } => {
                write!(f, "event {event}: entry ({row}, {col}) on or below the diagonal")
            }
            Self::IllegalSource { event } => write!(f, "event {event}: source right of target across grades"),
            Self::UnfilteredAddition { event } => write!(f, "event {event}: addition matrix not filtered"),
            Self::SquareNonzero { event } => write!(f, "event {event}: matrix no longer squares to zero"),
            Self::EntryChanged { event, row, col } => {
                write!(f, "event {event}: settled entry ({row}, {col}) changed")
            }
            Self::ColumnChanged { col } => write!(f, "column {col} changed after its pass"),
        }
    }
}

/// The matrix being reduced together with its grading and run record.
#[derive(Clone, Debug)]
pub struct ReductionState {
    pub matrix: SparseGF2Matrix,
    nu: Vec<usize>,
    dims: Vec<usize>,
    labels: Vec<Simplex>,
    poset: Poset,
    trace: Vec<AdditionEvent>,
    events: usize,
    diagnostics: Vec<Diagnostic>,
}

impl ReductionState {
    /// Wraps an assembled matrix without reducing it.
    pub fn new(fm: &FilteredBoundaryMatrix) -> Self {
        Self {
            matrix: fm.matrix.clone(),
            nu: fm.basis.grades().to_vec(),
            dims: fm.basis.dims().to_vec(),
            labels: fm.labels.clone(),
            poset: fm.poset.clone(),
            trace: Vec::new(),
            events: 0,
            diagnostics: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    /// Grade of 1-based position `pos`.
    pub fn grade(&self, pos: usize) -> usize {
        self.nu[pos - 1]
    }

    pub fn grades(&self) -> &[usize] {
        &self.nu
    }

    pub fn labels(&self) -> &[Simplex] {
        &self.labels
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn trace(&self) -> &[AdditionEvent] {
        &self.trace
    }

    /// Number of column/row additions performed.
    pub fn event_count(&self) -> usize {
        self.events
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn is_homogeneous(&self, j: usize) -> bool {
        is_homogeneous(&self.matrix, &self.nu, j)
    }

    pub fn homogeneous_positions(&self) -> BTreeSet<usize> {
        homogeneous_positions(&self.matrix, &self.nu)
    }

    pub fn targetable_positions(&self) -> BTreeSet<usize> {
        targetable_positions(&self.matrix, &self.nu)
    }
}

/// Column `j` is nonzero and its lowest entry has the same grade.
pub fn is_homogeneous(matrix: &SparseGF2Matrix, nu: &[usize], j: usize) -> bool {
    match matrix.low_unchecked(j) {
        0 => false,
        low => nu[low - 1] == nu[j - 1],
    }
}

pub fn homogeneous_positions(matrix: &SparseGF2Matrix, nu: &[usize]) -> BTreeSet<usize> {
    (1..=matrix.n_cols()).filter(|&j| is_homogeneous(matrix, nu, j)).collect()
}

/// `{ low(s) : s homogeneous }`.
pub fn targetable_positions(matrix: &SparseGF2Matrix, nu: &[usize]) -> BTreeSet<usize> {
    (1..=matrix.n_cols())
        .filter(|&j| is_homogeneous(matrix, nu, j))
        .map(|j| matrix.low_unchecked(j))
        .collect()
}

/// Lowest entries of all columns, indexed by row for quick conflict lookup.
struct LowIndex {
    low: Vec<usize>,
    by_row: Vec<BTreeSet<usize>>,
}

impl LowIndex {
    fn new(m: &SparseGF2Matrix) -> Self {
        let n = m.n_cols();
        let mut idx = Self { low: vec![0; n + 1], by_row: vec![BTreeSet::new(); m.n_rows() + 1] };
        for j in 1..=n {
            idx.refresh(m, j);
        }
        idx
    }

    fn refresh(&mut self, m: &SparseGF2Matrix, j: usize) {
        let new = m.low_unchecked(j);
        let old = std::mem::replace(&mut self.low[j], new);
        if old != new {
            if old != 0 {
                self.by_row[old].remove(&j);
            }
            if new != 0 {
                self.by_row[new].insert(j);
            }
        }
    }
}

/// Runs the reduction on a working copy of `fm`.
pub fn reduce(fm: &FilteredBoundaryMatrix, options: &ReduceOptions) -> ReductionState {
    let mut state = ReductionState::new(fm);
    run(&mut state, options);
    state
}

fn run(state: &mut ReductionState, options: &ReduceOptions) {
    let n = state.len();
    let mut lows = LowIndex::new(&state.matrix);
    let dense_checks = options.checks && n <= options.dense_limit;
    let mut finished_columns: Vec<Vec<usize>> = Vec::new();

    for j in 1..=n {
        // bound fixed at loop entry
        let mut cursor = lows.low[j];
        while cursor > 0 {
            let col = state.matrix.column(j);
            let i = match col.partition_point(|&r| r <= cursor) {
                0 => break,
                k => col[k - 1],
            };
            cursor = i - 1;
            let grade_i = state.nu[i - 1];
            let Some(s) = lows.by_row[i].iter().copied().find(|&c| c != j && state.nu[c - 1] == grade_i)
            else {
                continue;
            };
            let event = state.events;
            let settled: Vec<usize> = if options.checks {
                state.matrix.column(j).iter().copied().filter(|&r| r > i).collect()
            } else {
                Vec::new()
            };
            if options.checks {
                if state.nu[s - 1] != state.nu[j - 1] && s > j {
                    state.diagnostics.push(Diagnostic::IllegalSource { event });
                }
                if !state.poset.le(state.nu[s - 1], state.nu[j - 1]) {
                    state.diagnostics.push(Diagnostic::UnfilteredAddition { event });
                }
            }

            // new 1s from the column addition land in column j
            for &r in state.matrix.column(s) {
                if r >= j && !state.matrix.get(r, j) {
                    state.diagnostics.push(Diagnostic::BelowDiagonal { event, row: r, col: j });
                }
            }
            state.matrix.add_column_unchecked(s, j);
            lows.refresh(&state.matrix, j);

            let row_j: Vec<usize> = state.matrix.row(j).to_vec();
            for &c in &row_j {
                if s >= c && !state.matrix.get(s, c) {
                    state.diagnostics.push(Diagnostic::BelowDiagonal { event, row: s, col: c });
                }
            }
            state.matrix.add_row_unchecked(j, s);
            for &c in &row_j {
                lows.refresh(&state.matrix, c);
            }

            state.events += 1;
            if options.record_trace {
                state.trace.push(AdditionEvent { source: s, target: j, row: i });
            }
            if options.checks {
                let now: Vec<usize> = state.matrix.column(j).iter().copied().filter(|&r| r > i).collect();
                if now != settled {
                    state.diagnostics.push(Diagnostic::EntryChanged { event, row: i, col: j });
                }
                if state.matrix.get(i, j) {
                    state.diagnostics.push(Diagnostic::EntryChanged { event, row: i, col: j });
                }
            }
            if dense_checks {
                let d = state.matrix.to_dense(options.dense_limit).expect("size checked");
                if !d.multiply(&d).expect("square").is_zero() {
                    state.diagnostics.push(Diagnostic::SquareNonzero { event });
                }
            }
        }
        if options.checks {
            finished_columns.push(state.matrix.column(j).to_vec());
        }
    }

    if options.checks {
        for (k, col) in finished_columns.iter().enumerate() {
            if state.matrix.column(k + 1) != col.as_slice() {
                state.diagnostics.push(Diagnostic::ColumnChanged { col: k + 1 });
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReducedViolation {
    /// Two homogeneous columns share their lowest entry.
    NotInjective { first: usize, second: usize, low: usize },
    /// A position is both homogeneous and targetable.
    Overlap { position: usize },
    /// `A[row, col] = 1` while `row` is the lowest entry of another
    /// homogeneous column `homogeneous`.
    StrayEntry { row: usize, col: usize, homogeneous: usize },
}

impl fmt::Display for ReducedViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotInjective { first, second, low } => {
                write!(f, "homogeneous columns {first} and {second} share low {low}")
            }
            Self::Overlap { position } => write!(f, "position {position} is homogeneous and targetable"),
            Self::StrayEntry { row, col, homogeneous } => write!(
                f,
                "entry ({row}, {col}) conflicts with homogeneous column {homogeneous}"
            ),
        }
    }
}

/// Outcome of checking the three reducedness conditions separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedReport {
    /// Homogeneous column -> its lowest entry.
    pub pairing: BTreeMap<usize, usize>,
    pub bijection: Option<ReducedViolation>,
    pub disjoint: Option<ReducedViolation>,
    pub no_stray_entries: Option<ReducedViolation>,
}

impl ReducedReport {
    pub fn passes(&self) -> bool {
        self.bijection.is_none() && self.disjoint.is_none() && self.no_stray_entries.is_none()
    }

    pub fn first_violation(&self) -> Option<&ReducedViolation> {
        self.bijection.as_ref().or(self.disjoint.as_ref()).or(self.no_stray_entries.as_ref())
    }
}

/// Checks a graded matrix for the three reducedness conditions.
pub fn check_reduced(matrix: &SparseGF2Matrix, nu: &[usize]) -> ReducedReport {
    let homogeneous = homogeneous_positions(matrix, nu);
    let mut pairing = BTreeMap::new();
    let mut owner_of_low: BTreeMap<usize, usize> = BTreeMap::new();
    let mut bijection = None;
    for &j in &homogeneous {
        let low = matrix.low_unchecked(j);
        pairing.insert(j, low);
        if let Some(&first) = owner_of_low.get(&low) {
            bijection.get_or_insert(ReducedViolation::NotInjective { first, second: j, low });
        } else {
            owner_of_low.insert(low, j);
        }
    }
    let disjoint = owner_of_low
        .keys()
        .find(|t| homogeneous.contains(t))
        .map(|&position| ReducedViolation::Overlap { position });
    let mut no_stray_entries = None;
    'outer: for j in 1..=matrix.n_cols() {
        for &i in matrix.column(j).iter().rev() {
            if let Some(&s) = homogeneous.iter().find(|&&s| s != j && matrix.low_unchecked(s) == i) {
                no_stray_entries = Some(ReducedViolation::StrayEntry { row: i, col: j, homogeneous: s });
                break 'outer;
            }
        }
    }
    ReducedReport { pairing, bijection, disjoint, no_stray_entries }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConnectionError {
    #[error("reduced matrix check failed: {0}")]
    NotReduced(ReducedViolation),
    #[error("extracted matrix still has homogeneous column at position {0}")]
    NotCropped(usize),
    #[error("entry ({row}, {col}) in a diagonal block of the connection matrix")]
    DiagonalBlock { row: usize, col: usize },
}

/// The submatrix on the cells that are neither homogeneous nor targetable,
/// with labels, grades and dimensions of the surviving cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionMatrix {
    /// Original 1-based basis positions, ascending.
    pub surviving: Vec<usize>,
    pub labels: Vec<Simplex>,
    pub grades: Vec<usize>,
    pub dims: Vec<usize>,
    /// Square matrix over the surviving cells, indexed `1..=len()`.
    pub entries: SparseGF2Matrix,
}

impl ConnectionMatrix {
    pub fn len(&self) -> usize {
        self.surviving.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surviving.is_empty()
    }

    /// Nonzero entries as (row, col) in original basis positions.
    pub fn entry_positions(&self) -> Vec<(usize, usize)> {
        self.entries.entries().map(|(r, c)| (self.surviving[r - 1], self.surviving[c - 1])).collect()
    }

    /// Nonzero entries as (row simplex, column simplex).
    pub fn labeled_entries(&self) -> BTreeSet<(Simplex, Simplex)> {
        self.entries
            .entries()
            .map(|(r, c)| (self.labels[r - 1].clone(), self.labels[c - 1].clone()))
            .collect()
    }

    /// Restricts a full matrix in some basis to the given positions.
    pub fn restrict(
        matrix: &SparseGF2Matrix,
        surviving: Vec<usize>,
        labels: &[Simplex],
        grades: &[usize],
        dims: &[usize],
    ) -> Self {
        let entries = matrix.submatrix(&surviving, &surviving);
        Self {
            labels: surviving.iter().map(|&p| labels[p - 1].clone()).collect(),
            grades: surviving.iter().map(|&p| grades[p - 1]).collect(),
            dims: surviving.iter().map(|&p| dims[p - 1]).collect(),
            surviving,
            entries,
        }
    }
}

/// Drops homogeneous and targetable cells from a reduced state.
pub fn extract(state: &ReductionState) -> Result<ConnectionMatrix, ConnectionError> {
    let report = check_reduced(&state.matrix, &state.nu);
    if let Some(v) = report.first_violation() {
        return Err(ConnectionError::NotReduced(v.clone()));
    }
    let dropped: BTreeSet<usize> = report.pairing.iter().flat_map(|(&j, &i)| [i, j]).collect();
    let surviving: Vec<usize> = (1..=state.len()).filter(|p| !dropped.contains(p)).collect();
    let cm = ConnectionMatrix::restrict(&state.matrix, surviving, &state.labels, &state.nu, &state.dims);
    for j in 1..=cm.len() {
        if is_homogeneous(&cm.entries, &cm.grades, j) {
            return Err(ConnectionError::NotCropped(cm.surviving[j - 1]));
        }
    }
    if let Some((r, c)) = cm.entries.entries().find(|&(r, c)| cm.grades[r - 1] == cm.grades[c - 1]) {
        return Err(ConnectionError::DiagonalBlock { row: cm.surviving[r - 1], col: cm.surviving[c - 1] });
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::{assemble, build_admissible_basis, linear_extension, AdmissibleBasis, IntraOrder, TieBreak};
    use crate::morse::{minimal_decomposition, MorseDecomposition};
    use crate::mvfield::{flow_digraph, validate_field, MultivectorField};
    use crate::simplicial::SimplicialComplex;

    fn ids(k: &SimplicialComplex, labels: &[&str]) -> Vec<usize> {
        labels.iter().map(|l| k.index_of(&Simplex::from_chars(l).unwrap()).unwrap()).collect()
    }

    fn annulus() -> (SimplicialComplex, MorseDecomposition) {
        let k = SimplicialComplex::from_facets([["A", "B", "C"], ["C", "D", "A"]]).unwrap();
        let blocks = [&["A", "AB"][..], &["B", "BC"], &["C", "CD"], &["D", "AD"], &["AC"], &["ABC"], &["ACD"]]
            .iter()
            .map(|b| ids(&k, b))
            .collect();
        let v = validate_field(&k, blocks).unwrap();
        let m = minimal_decomposition(&flow_digraph(&k, &v));
        (k, m)
    }

    const TOP_ORDER: [&str; 11] = ["A", "B", "AB", "C", "BC", "D", "CD", "AD", "AC", "ABC", "ACD"];

    fn annulus_matrix() -> FilteredBoundaryMatrix {
        let (k, m) = annulus();
        let b = AdmissibleBasis::from_order(&k, &m, ids(&k, &TOP_ORDER)).unwrap();
        assemble(&k, &m, &b).unwrap()
    }

    fn pos(label: &str) -> usize {
        TOP_ORDER.iter().position(|&l| l == label).unwrap() + 1
    }

    #[test]
    fn homogeneity_on_initial_annulus() {
        let state = ReductionState::new(&annulus_matrix());
        assert!(state.is_homogeneous(pos("AB")));
        assert!(!state.is_homogeneous(pos("AC")));
        assert!(!state.is_homogeneous(pos("A")));
    }

    #[test]
    fn annulus_trace_matches_narrative() {
        let state = reduce(&annulus_matrix(), &ReduceOptions::checked());
        let trace: Vec<(usize, usize)> = state.trace().iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(
            trace,
            vec![(pos("AB"), pos("BC")), (pos("AD"), pos("CD")), (pos("BC"), pos("CD")), (pos("BC"), pos("AC"))]
        );
        assert_eq!(
            state.trace().iter().map(|e| e.row).collect::<Vec<_>>(),
            vec![pos("B"), pos("D"), pos("C"), pos("C")]
        );
        assert!(state.diagnostics().is_empty(), "{:?}", state.diagnostics());
        assert!(state.matrix.column(pos("CD")).is_empty());
        assert!(state.matrix.column(pos("AC")).is_empty());
        assert_eq!(
            state.targetable_positions(),
            BTreeSet::from([pos("B"), pos("C"), pos("D")])
        );
    }

    #[test]
    fn annulus_reduced_report() {
        let initial = ReductionState::new(&annulus_matrix());
        let report = check_reduced(&initial.matrix, initial.grades());
        assert_eq!(
            report.no_stray_entries,
            Some(ReducedViolation::StrayEntry { row: pos("B"), col: pos("BC"), homogeneous: pos("AB") })
        );
        assert!(!report.passes());
        let state = reduce(&annulus_matrix(), &ReduceOptions::default());
        let report = check_reduced(&state.matrix, state.grades());
        assert!(report.passes());
        assert_eq!(
            report.pairing,
            BTreeMap::from([(pos("AB"), pos("B")), (pos("BC"), pos("C")), (pos("AD"), pos("D"))])
        );
        let zero = SparseGF2Matrix::zeros(3, 3);
        assert!(check_reduced(&zero, &[0, 0, 0]).passes());
    }

    #[test]
    fn annulus_connection_matrix() {
        let state = reduce(&annulus_matrix(), &ReduceOptions::default());
        let cm = extract(&state).unwrap();
        assert_eq!(cm.surviving, vec![pos("A"), pos("CD"), pos("AC"), pos("ABC"), pos("ACD")]);
        assert_eq!(
            cm.entry_positions().into_iter().collect::<BTreeSet<_>>(),
            BTreeSet::from([(pos("AC"), pos("ABC")), (pos("AC"), pos("ACD")), (pos("CD"), pos("ACD"))])
        );
        assert_eq!(cm.dims, vec![0, 1, 1, 2, 2]);
    }

    #[test]
    fn extraction_refuses_unreduced_state() {
        let state = ReductionState::new(&annulus_matrix());
        assert!(matches!(extract(&state), Err(ConnectionError::NotReduced(_))));
    }

    #[test]
    fn singleton_field_is_untouched() {
        let (k, _) = annulus();
        let m = minimal_decomposition(&flow_digraph(&k, &MultivectorField::singletons(&k)));
        let ext = linear_extension(m.poset(), &TieBreak::MinSetId);
        let b = build_admissible_basis(&k, &m, &ext, &IntraOrder::DimLex).unwrap();
        let fm = assemble(&k, &m, &b).unwrap();
        let state = reduce(&fm, &ReduceOptions::checked());
        assert_eq!(state.event_count(), 0);
        assert!(state.targetable_positions().is_empty());
        let cm = extract(&state).unwrap();
        assert_eq!(cm.entries, fm.matrix);
    }

    #[test]
    fn edge_example() {
        let k = SimplicialComplex::from_facets([["A", "B"]]).unwrap();
        let v = validate_field(&k, vec![vec![0, 2], vec![1]]).unwrap();
        let m = minimal_decomposition(&flow_digraph(&k, &v));
        let ext = linear_extension(m.poset(), &TieBreak::MinSetId);
        let b = build_admissible_basis(&k, &m, &ext, &IntraOrder::DimLex).unwrap();
        let fm = assemble(&k, &m, &b).unwrap();
        let state = reduce(&fm, &ReduceOptions::checked());
        assert_eq!(state.event_count(), 0);
        assert_eq!(state.matrix, fm.matrix);
        // basis is [B, A, AB]
        assert_eq!(state.targetable_positions(), BTreeSet::from([2]));
        let cm = extract(&state).unwrap();
        assert_eq!(cm.surviving, vec![1]);
        assert!(cm.entries.is_zero());
        assert_eq!(cm.labels, vec![Simplex::from_chars("B").unwrap()]);
    }

    #[test]
    fn fast_path_matches_traced_path() {
        let a = reduce(&annulus_matrix(), &ReduceOptions::fast());
        let b = reduce(&annulus_matrix(), &ReduceOptions::default());
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.event_count(), b.event_count());
        assert!(a.trace().is_empty());
    }
}
