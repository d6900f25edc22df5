//! Batches of independent pipeline runs, optionally on the rayon pool.

use crate::admissible::{IntraOrder, TieBreak};
use crate::connection::{ConnectionMatrix, ReduceOptions};
use crate::generate::{generate, Generator, Instance};
use crate::morse::MorseDecomposition;
use crate::par::{map_collect, Execution};
use crate::pipeline::{compute_connection_matrix, connect_decomposition, PipelineError, PipelineOptions, RunReport};
use crate::simplicial::SimplicialComplex;

pub const CSV_HEADER: &str = "n,sets,events,reduce_ms,total_ms";

impl RunReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.3},{:.3}",
            self.n, self.sets, self.events, self.timings.reduce_ms, self.timings.total_ms
        )
    }
}

/// Runs the pipeline on every instance and collects the reports in input
/// order.
pub fn run_batch(
    instances: &[Instance],
    options: &PipelineOptions,
    exec: Execution,
) -> Vec<Result<RunReport, PipelineError>> {
    map_collect(instances, exec, |inst| {
        compute_connection_matrix(&inst.complex, &inst.field, options).map(|out| out.report)
    })
}

/// Generates one instance per `(n, seed)` pair and runs it without trace
/// recording.
pub fn bench_generator(
    generator: Generator,
    sizes: &[(usize, u64)],
    exec: Execution,
) -> Vec<Result<RunReport, PipelineError>> {
    let options = PipelineOptions { reduce: ReduceOptions::fast(), ..Default::default() };
    map_collect(sizes, exec, |&(n, seed)| {
        let inst = generate(generator, n, seed);
        compute_connection_matrix(&inst.complex, &inst.field, &options).map(|out| out.report)
    })
}

/// Connection matrices of one decomposition under seeded linear extensions.
pub fn sweep_linear_extensions(
    complex: &SimplicialComplex,
    decomposition: &MorseDecomposition,
    seeds: &[u64],
    intra_order: &IntraOrder,
    exec: Execution,
) -> Vec<Result<ConnectionMatrix, PipelineError>> {
    map_collect(seeds, exec, |&seed| {
        let options = PipelineOptions {
            tie_break: TieBreak::Seeded(seed),
            intra_order: intra_order.clone(),
            reduce: ReduceOptions::fast(),
            ..Default::default()
        };
        connect_decomposition(complex, decomposition.clone(), &options).map(|out| out.connection)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn execution_modes_agree() {
        let sizes: Vec<(usize, u64)> = (0..6).map(|s| (80, s)).collect();
        let a = bench_generator(Generator::RandomMultivector, &sizes, Execution::Sequential);
        let b = bench_generator(Generator::RandomMultivector, &sizes, Execution::Parallel);
        for (x, y) in a.iter().zip(&b) {
            let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
            assert_eq!((x.n, x.sets, x.events, x.surviving), (y.n, y.sets, y.events, y.surviving));
        }
    }

    #[test]
    fn singleton_bench_has_no_events() {
        let reports = bench_generator(Generator::Singleton, &[(50, 1), (150, 2)], Execution::Parallel);
        assert!(reports.iter().all(|r| r.as_ref().unwrap().events == 0));
    }

    #[test]
    fn csv_row_shape() {
        let inst = generate(Generator::RandomForman, 40, 9);
        let report = run_batch(&[inst], &Default::default(), Execution::Sequential).remove(0).unwrap();
        assert_eq!(report.csv_row().split(',').count(), CSV_HEADER.split(',').count());
    }
}
