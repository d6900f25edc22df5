//! End-to-end driver: flow digraph, Morse decomposition, admissible basis,
//! assembly, reduction and extraction.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::admissible::{
    assemble, build_admissible_basis, linear_extension, AdmissibleBasis, AssemblyError, BasisError,
    FilteredBoundaryMatrix, IntraOrder, TieBreak,
};
use crate::connection::{extract, reduce, ConnectionError, ConnectionMatrix, ReduceOptions, ReductionState};
use crate::morse::{minimal_decomposition, validate_morse_partition, MorseDecomposition, MorseError};
use crate::mvfield::{flow_digraph, MultivectorField};
use crate::simplicial::SimplicialComplex;

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    /// Explicit Morse partition (simplex ids); the minimal one otherwise.
    pub morse_sets: Option<Vec<Vec<usize>>>,
    pub tie_break: TieBreak,
    pub intra_order: IntraOrder,
    pub reduce: ReduceOptions,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
}

/// Wall-clock time per stage, in milliseconds.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StageTimings {
    pub morse_ms: f64,
    pub basis_ms: f64,
    pub assemble_ms: f64,
    pub reduce_ms: f64,
    pub extract_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub n: usize,
    pub sets: usize,
    pub surviving: usize,
    pub events: usize,
    pub timings: StageTimings,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub decomposition: MorseDecomposition,
    pub assembled: FilteredBoundaryMatrix,
    pub state: ReductionState,
    pub connection: ConnectionMatrix,
    pub report: RunReport,
}

impl PipelineOutput {
    pub fn basis(&self) -> &AdmissibleBasis {
        &self.assembled.basis
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Morse decomposition of `field`, minimal unless `morse_sets` is given.
pub fn decompose(
    complex: &SimplicialComplex,
    field: &MultivectorField,
    morse_sets: Option<Vec<Vec<usize>>>,
) -> Result<MorseDecomposition, MorseError> {
    let g = flow_digraph(complex, field);
    match morse_sets {
        Some(sets) => validate_morse_partition(complex, &g, sets),
        None => Ok(minimal_decomposition(&g)),
    }
}

pub fn compute_connection_matrix(
    complex: &SimplicialComplex,
    field: &MultivectorField,
    options: &PipelineOptions,
) -> Result<PipelineOutput, PipelineError> {
    let start = Instant::now();
    let decomposition = decompose(complex, field, options.morse_sets.clone())?;
    let morse_ms = ms(start.elapsed());
    let mut out = connect_decomposition(complex, decomposition, options)?;
    out.report.timings.morse_ms = morse_ms;
    out.report.timings.total_ms = ms(start.elapsed());
    Ok(out)
}

/// Runs the pipeline from an already computed decomposition.
pub fn connect_decomposition(
    complex: &SimplicialComplex,
    decomposition: MorseDecomposition,
    options: &PipelineOptions,
) -> Result<PipelineOutput, PipelineError> {
    let start = Instant::now();
    let linext = linear_extension(decomposition.poset(), &options.tie_break);
    let basis = build_admissible_basis(complex, &decomposition, &linext, &options.intra_order)?;
    let t_basis = Instant::now();
    let assembled = assemble(complex, &decomposition, &basis)?;
    let t_assemble = Instant::now();
    let state = reduce(&assembled, &options.reduce);
    let t_reduce = Instant::now();
    let connection = extract(&state)?;
    let t_extract = Instant::now();
    let report = RunReport {
        n: complex.len(),
        sets: decomposition.len(),
        surviving: connection.len(),
        events: state.event_count(),
        timings: StageTimings {
            morse_ms: 0.0,
            basis_ms: ms(t_basis - start),
            assemble_ms: ms(t_assemble - t_basis),
            reduce_ms: ms(t_reduce - t_assemble),
            extract_ms: ms(t_extract - t_reduce),
            total_ms: ms(t_extract - start),
        },
    };
    Ok(PipelineOutput { decomposition, assembled, state, connection, report })
}
