//! Brute-force certification of connection matrices.
//!
//! Everything here works on dense matrices and plain Gaussian elimination,
//! independent of the sparse reduction it checks. It is cubic or worse and
//! refuses inputs above [`DEFAULT_ORACLE_LIMIT`] simplices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admissible::{assemble, AdmissibleBasis};
use crate::connection::{is_homogeneous, reduce, AdditionEvent, ConnectionMatrix, ReduceOptions};
use crate::gf2::{DenseGF2Matrix, MatrixError, SparseGF2Matrix};
use crate::morse::MorseDecomposition;
use crate::par::{Execution, map_collect};
use crate::simplicial::SimplicialComplex;

pub const DEFAULT_ORACLE_LIMIT: usize = 2000;

/// Above this size the chain-homotopy identities of every reduction pair are
/// not multiplied out during certification.
const IDENTITY_CHECK_LIMIT: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("matrix does not square to zero")]
    NotBoundary,
    #[error("entry ({row}, {col}) does not lower the dimension by one")]
    DimensionMismatch { row: usize, col: usize },
    #[error("{size} cells exceed the oracle limit of {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("({i0}, {j0}) is not a reduction pair")]
    NotReductionPair { i0: usize, j0: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Betti numbers over GF(2) by degree, without trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HomologyProfile(Vec<usize>);

impl HomologyProfile {
    pub fn new(mut betti: Vec<usize>) -> Self {
        while betti.last() == Some(&0) {
            betti.pop();
        }
        Self(betti)
    }

    pub fn betti(&self, q: usize) -> usize {
        self.0.get(q).copied().unwrap_or(0)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Homology of the chain complex given by a square `boundary` matrix whose
/// cell `k` (1-based) has dimension `dims[k - 1]`.
pub fn betti_numbers(boundary: &SparseGF2Matrix, dims: &[usize]) -> Result<HomologyProfile, OracleError> {
    let n = dims.len();
    if boundary.n_rows() != n || boundary.n_cols() != n {
        return Err(MatrixError::DimensionMismatch {
            left_rows: boundary.n_rows(),
            left_cols: boundary.n_cols(),
            right_rows: n,
            right_cols: n,
        }
        .into());
    }
    if n > DEFAULT_ORACLE_LIMIT {
        return Err(OracleError::TooLarge { size: n, limit: DEFAULT_ORACLE_LIMIT });
    }
    for (r, c) in boundary.entries() {
        if dims[r - 1] + 1 != dims[c - 1] {
            return Err(OracleError::DimensionMismatch { row: r, col: c });
        }
    }
    if !boundary.multiply(boundary)?.is_zero() {
        return Err(OracleError::NotBoundary);
    }
    let top = dims.iter().copied().max().unwrap_or(0);
    let cells: Vec<Vec<usize>> =
        (0..=top).map(|q| (1..=n).filter(|&k| dims[k - 1] == q).collect()).collect();
    // rank of the map from degree q to degree q - 1
    let mut ranks = vec![0; top + 2];
    for q in 1..=top {
        let block = boundary.submatrix(&cells[q - 1], &cells[q]);
        ranks[q] = block.to_dense(DEFAULT_ORACLE_LIMIT)?.rank();
    }
    let betti = (0..=top).map(|q| cells[q].len() - ranks[q] - ranks[q + 1]).collect();
    Ok(HomologyProfile::new(betti))
}

/// Conley index of a Morse set: homology of the chains spanned by `set`
/// with boundary terms leaving the set dropped (relative homology of its
/// closure modulo the exit set).
pub fn conley_index_dims(complex: &SimplicialComplex, set: &[usize]) -> Result<HomologyProfile, OracleError> {
    let mut positions: Vec<usize> = set.iter().map(|&s| s + 1).collect();
    positions.sort_unstable();
    let restricted = complex.boundary_matrix().submatrix(&positions, &positions);
    let dims: Vec<usize> = positions.iter().map(|&p| complex.dim_of(p - 1)).collect();
    betti_numbers(&restricted, &dims)
}

/// Chain maps of one elementary reduction `(i0, j0)`.
#[derive(Clone, Debug)]
pub struct ReductionPairMaps {
    /// Positions of the original basis kept in the reduced complex.
    pub kept: Vec<usize>,
    /// Boundary of the reduced complex, `kept.len()` square.
    pub reduced: DenseGF2Matrix,
    /// Projection onto the reduced complex, `kept.len() x n`.
    pub projection: DenseGF2Matrix,
    /// Inclusion of the reduced complex, `n x kept.len()`.
    pub inclusion: DenseGF2Matrix,
    /// Chain homotopy, `n x n`.
    pub homotopy: DenseGF2Matrix,
}

fn column_of(d: &DenseGF2Matrix, j: usize) -> Vec<bool> {
    (1..=d.n_rows()).map(|i| d.get(i, j)).collect()
}

fn unit(n: usize, k: usize) -> Vec<bool> {
    let mut v = vec![false; n];
    v[k - 1] = true;
    v
}

fn axpy(acc: &mut [bool], coeff: bool, v: &[bool]) {
    if coeff {
        acc.iter_mut().zip(v).for_each(|(a, b)| *a ^= b);
    }
}

/// Builds the maps of the `(i0, j0)` reduction by evaluating them on basis
/// vectors: with `<., .>` the coordinate functional,
///
/// * reduced `c -> dc + <dc, b_i0> d b_j0 + <dc, b_j0> b_j0`
/// * projection `c -> c + <c, b_i0> d b_j0 + <c, b_j0> b_j0`
/// * inclusion `c -> c + <dc, b_i0> b_j0`
/// * homotopy `c -> <c, b_i0> b_j0`
pub fn single_reduction(d: &DenseGF2Matrix, i0: usize, j0: usize) -> Result<ReductionPairMaps, OracleError> {
    let n = d.n_cols();
    if d.n_rows() != n {
        return Err(MatrixError::DimensionMismatch {
            left_rows: d.n_rows(),
            left_cols: n,
            right_rows: n,
            right_cols: n,
        }
        .into());
    }
    if i0 == 0 || j0 == 0 || i0 > n || j0 > n || i0 == j0 || !d.get(i0, j0) {
        return Err(OracleError::NotReductionPair { i0, j0 });
    }
    let kept: Vec<usize> = (1..=n).filter(|&k| k != i0 && k != j0).collect();
    let m = kept.len();
    let d_j0 = column_of(d, j0);
    let restrict = |v: &[bool]| -> Vec<bool> { kept.iter().map(|&k| v[k - 1]).collect() };

    let mut reduced = DenseGF2Matrix::zeros(m, m);
    let mut inclusion = DenseGF2Matrix::zeros(n, m);
    for (a, &j) in kept.iter().enumerate() {
        let dc = column_of(d, j);
        let mut v = dc.clone();
        axpy(&mut v, dc[i0 - 1], &d_j0);
        axpy(&mut v, dc[j0 - 1], &unit(n, j0));
        if v[i0 - 1] || v[j0 - 1] {
            return Err(OracleError::NotBoundary);
        }
        for (b, &x) in restrict(&v).iter().enumerate() {
            reduced.set(b + 1, a + 1, x);
        }
        let mut w = unit(n, j);
        axpy(&mut w, dc[i0 - 1], &unit(n, j0));
        for (k, &x) in w.iter().enumerate() {
            inclusion.set(k + 1, a + 1, x);
        }
    }
    let mut projection = DenseGF2Matrix::zeros(m, n);
    let mut homotopy = DenseGF2Matrix::zeros(n, n);
    for j in 1..=n {
        let mut v = unit(n, j);
        axpy(&mut v, j == i0, &d_j0);
        axpy(&mut v, j == j0, &unit(n, j0));
        for (b, &x) in restrict(&v).iter().enumerate() {
            projection.set(b + 1, j, x);
        }
        if j == i0 {
            homotopy.set(j0, i0, true);
        }
    }
    Ok(ReductionPairMaps { kept, reduced, projection, inclusion, homotopy })
}

impl ReductionPairMaps {
    /// Checks the chain-map and homotopy identities against the original
    /// boundary `d`. Returns the name of the first identity that fails.
    pub fn verify(&self, d: &DenseGF2Matrix) -> Result<(), &'static str> {
        let n = d.n_rows();
        let m = self.kept.len();
        let mul = |a: &DenseGF2Matrix, b: &DenseGF2Matrix| a.multiply(b).expect("shapes agree");
        if mul(&self.projection, &self.inclusion) != DenseGF2Matrix::identity(m) {
            return Err("projection * inclusion = id");
        }
        let rhs = DenseGF2Matrix::identity(n)
            .add(&mul(d, &self.homotopy))
            .and_then(|x| x.add(&mul(&self.homotopy, d)))
            .expect("shapes agree");
        if mul(&self.inclusion, &self.projection) != rhs {
            return Err("inclusion * projection = id + d h + h d");
        }
        if mul(&self.reduced, &self.projection) != mul(&self.projection, d) {
            return Err("projection is a chain map");
        }
        if mul(d, &self.inclusion) != mul(&self.inclusion, &self.reduced) {
            return Err("inclusion is a chain map");
        }
        if !mul(&self.reduced, &self.reduced).is_zero() {
            return Err("reduced boundary squares to zero");
        }
        Ok(())
    }
}

/// Multiplies out the addition matrices of a trace: returns `P^-1 A P` with
/// `P = E_1 E_2 ... E_K`, each `E_k` the identity plus a 1 at
/// (source, target).
pub fn replay_conjugation(input: &SparseGF2Matrix, trace: &[AdditionEvent]) -> Result<DenseGF2Matrix, OracleError> {
    let n = input.n_cols();
    let mut p = DenseGF2Matrix::identity(n);
    let mut p_inv = DenseGF2Matrix::identity(n);
    for e in trace {
        let mut elem = DenseGF2Matrix::identity(n);
        elem.set(e.source, e.target, true);
        p = p.multiply(&elem)?;
        // E_k is its own inverse
        p_inv = elem.multiply(&p_inv)?;
    }
    let a = input.to_dense(DEFAULT_ORACLE_LIMIT)?;
    Ok(p_inv.multiply(&a)?.multiply(&p)?)
}

/// Outcome of each certification check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub cropped: bool,
    pub squared_zero: bool,
    pub diagonal_blocks_zero: bool,
    pub filtered: bool,
    pub conley_index: bool,
    pub betti: bool,
    pub reduction_pairs: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub checks: Checks,
    /// Description of the first failure, if any.
    pub witness: Option<String>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        let c = &self.checks;
        c.cropped
            && c.squared_zero
            && c.diagonal_blocks_zero
            && c.filtered
            && c.conley_index
            && c.betti
            && c.reduction_pairs
    }
}

/// Certifies `cm` as a connection matrix of `complex` for the Morse
/// decomposition `decomp`, where `cm` was computed in `basis`.
pub fn verify_connection_matrix(
    cm: &ConnectionMatrix,
    complex: &SimplicialComplex,
    decomp: &MorseDecomposition,
    basis: &AdmissibleBasis,
) -> Result<Certificate, OracleError> {
    verify_with(cm, complex, decomp, basis, Execution::default())
}

pub fn verify_with(
    cm: &ConnectionMatrix,
    complex: &SimplicialComplex,
    decomp: &MorseDecomposition,
    basis: &AdmissibleBasis,
    exec: Execution,
) -> Result<Certificate, OracleError> {
    let n = complex.len();
    if n > DEFAULT_ORACLE_LIMIT {
        return Err(OracleError::TooLarge { size: n, limit: DEFAULT_ORACLE_LIMIT });
    }
    let mut witnesses: Vec<String> = Vec::new();
    let label = |k: usize| cm.labels[k - 1].label();
    let m = cm.len();

    let consistent = cm.surviving.iter().enumerate().all(|(k, &p)| {
        p >= 1
            && p <= basis.len()
            && complex.simplex(basis.simplex_at(p)) == &cm.labels[k]
            && basis.grade_at(p) == cm.grades[k]
            && basis.dims()[p - 1] == cm.dims[k]
    });
    if !consistent {
        witnesses.push("labels, grades or dimensions disagree with the basis".into());
    }

    let mut note = |ok: bool, msg: &dyn Fn() -> String| {
        if !ok {
            witnesses.push(msg());
        }
        ok
    };
    let homogeneous = (1..=m).find(|&j| is_homogeneous(&cm.entries, &cm.grades, j));
    let cropped = note(homogeneous.is_none(), &|| format!("column {} is homogeneous", label(homogeneous.unwrap())));

    let dense = cm.entries.to_dense(DEFAULT_ORACLE_LIMIT)?;
    let squared_zero = note(dense.multiply(&dense)?.is_zero(), &|| "entries do not square to zero".into());

    let diagonal = cm.entries.entries().find(|&(r, c)| cm.grades[r - 1] == cm.grades[c - 1]);
    let diagonal_blocks_zero = note(diagonal.is_none(), &|| {
        let (r, c) = diagonal.unwrap();
        format!("entry ({}, {}) lies in a diagonal block", label(r), label(c))
    });

    let unfiltered = cm.entries.entries().find(|&(r, c)| !decomp.poset().le(cm.grades[r - 1], cm.grades[c - 1]));
    let filtered = note(unfiltered.is_none(), &|| {
        let (r, c) = unfiltered.unwrap();
        format!("entry ({}, {}) is not filtered", label(r), label(c))
    });

    let sets: Vec<usize> = (0..decomp.len()).collect();
    let indices = map_collect(&sets, exec, |&p| conley_index_dims(complex, decomp.set(p)));
    let mut index_mismatch = None;
    for (p, index) in indices.into_iter().enumerate() {
        let index = index?;
        let top = complex.max_dim().unwrap_or(0);
        for q in 0..=top {
            let count = (0..m).filter(|&k| cm.grades[k] == p && cm.dims[k] == q).count();
            if count != index.betti(q) && index_mismatch.is_none() {
                index_mismatch = Some((p, q, count, index.betti(q)));
            }
        }
    }
    let conley_index = note(index_mismatch.is_none(), &|| {
        let (p, q, count, expected) = index_mismatch.unwrap();
        format!("Morse set {p} has {count} generators in degree {q}, Conley index has rank {expected}")
    });

    let input_betti = betti_numbers(&complex.boundary_matrix(), &complex.dims())?;
    let output_betti = match betti_numbers(&cm.entries, &cm.dims) {
        Ok(b) => Some(b),
        Err(OracleError::NotBoundary | OracleError::DimensionMismatch { .. }) => None,
        Err(e) => return Err(e),
    };
    let betti = note(output_betti.as_ref() == Some(&input_betti), &|| {
        format!("Betti numbers {:?} differ from the complex's {:?}", output_betti, input_betti.as_slice())
    });

    let pairs = replay_reduction_pairs(cm, complex, decomp, basis)?;
    let reduction_pairs = note(pairs.is_none(), &|| pairs.clone().unwrap());

    let checks = Checks {
        cropped: cropped && consistent,
        squared_zero,
        diagonal_blocks_zero,
        filtered,
        conley_index,
        betti,
        reduction_pairs,
    };
    Ok(Certificate { checks, witness: witnesses.into_iter().next() })
}

/// Recomputes the reduced matrix in `basis`, then removes one reduction pair
/// per homogeneous column (ascending), each time through the generic
/// reduction formulas. Returns a witness if the final matrix differs from
/// `cm`.
fn replay_reduction_pairs(
    cm: &ConnectionMatrix,
    complex: &SimplicialComplex,
    decomp: &MorseDecomposition,
    basis: &AdmissibleBasis,
) -> Result<Option<String>, OracleError> {
    let fm = match assemble(complex, decomp, basis) {
        Ok(fm) => fm,
        Err(e) => return Ok(Some(format!("basis does not assemble: {e}"))),
    };
    let state = reduce(&fm, &ReduceOptions::fast());
    let grades = state.grades().to_vec();
    let homogeneous: Vec<usize> = state.homogeneous_positions().into_iter().collect();
    let mut d = state.matrix.to_dense(DEFAULT_ORACLE_LIMIT)?;
    let mut kept: Vec<usize> = (1..=state.len()).collect();
    for j0 in homogeneous {
        let local = |p: usize| kept.iter().position(|&k| k == p).map(|i| i + 1);
        let Some(jl) = local(j0) else {
            return Ok(Some(format!("column {j0} was removed before its own pair")));
        };
        let Some(il) = (1..=d.n_rows()).rev().find(|&i| d.get(i, jl)) else {
            return Ok(Some(format!("column {j0} became zero")));
        };
        if grades[kept[il - 1] - 1] != grades[j0 - 1] {
            return Ok(Some(format!("column {j0} is no longer homogeneous")));
        }
        let maps = single_reduction(&d, il, jl)?;
        if d.n_rows() <= IDENTITY_CHECK_LIMIT {
            if let Err(identity) = maps.verify(&d) {
                return Ok(Some(format!("pair ({}, {j0}): {identity} fails", kept[il - 1])));
            }
        }
        kept = maps.kept.iter().map(|&k| kept[k - 1]).collect();
        d = maps.reduced;
    }
    if kept != cm.surviving {
        return Ok(Some(format!("surviving cells {:?}, expected {:?}", cm.surviving, kept)));
    }
    let expected = cm.entries.to_dense(DEFAULT_ORACLE_LIMIT)?;
    if d != expected {
        let (r, c) = (1..=d.n_rows())
            .flat_map(|i| (1..=d.n_cols()).map(move |j| (i, j)))
            .find(|&(i, j)| d.get(i, j) != expected.get(i, j))
            .expect("matrices differ somewhere");
        return Ok(Some(format!(
            "entry ({}, {}) should be {}",
            cm.labels[r - 1].label(),
            cm.labels[c - 1].label(),
            u8::from(d.get(r, c))
        )));
    }
    Ok(None)
}
