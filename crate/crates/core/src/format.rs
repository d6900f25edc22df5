//! JSON input and output documents.
//!
//! Simplices are written as vertex lists, e.g. `["A", "B"]`. Basis positions
//! are 1-based.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admissible::{AdmissibleBasis, BasisError, IntraOrder, TieBreak};
use crate::connection::ConnectionMatrix;
use crate::gf2::{MatrixError, SparseGF2Matrix};
use crate::morse::MorseDecomposition;
use crate::mvfield::{validate_field, FieldError, MultivectorField};
use crate::oracle::Certificate;
use crate::pipeline::{PipelineOptions, PipelineOutput};
use crate::simplicial::{ComplexError, Simplex, SimplicialComplex};

pub const FORMAT_VERSION: u32 = 1;

pub type SimplexRef = Vec<String>;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("complex: {0}")]
    Complex(ComplexError),
    #[error("{context}: {source}")]
    Reference { context: String, source: ComplexError },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("intra_order key {0:?} is not a Morse set id")]
    BadSetKey(String),
    #[error("connection matrix document: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn check_version(format: u32) -> Result<(), FormatError> {
    if format == FORMAT_VERSION {
        Ok(())
    } else {
        Err(FormatError::Version(format))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<SimplexRef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplices: Option<Vec<SimplexRef>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInput {
    pub format: u32,
    pub complex: ComplexSpec,
    pub multivectors: Vec<Vec<SimplexRef>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morse_sets: Option<Vec<Vec<SimplexRef>>>,
    /// Morse set id (as a string) to the order of its simplices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intra_order: Option<BTreeMap<String, Vec<SimplexRef>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linext_seed: Option<u64>,
}

/// A parsed input with every reference resolved to simplex ids.
#[derive(Clone, Debug)]
pub struct Problem {
    pub complex: SimplicialComplex,
    pub field: MultivectorField,
    pub options: PipelineOptions,
}

impl ProblemInput {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let input: Self = parse_json(text)?;
        check_version(input.format)?;
        Ok(input)
    }

    pub fn build_complex(&self) -> Result<SimplicialComplex, FormatError> {
        let result = match (&self.complex.facets, &self.complex.simplices) {
            (Some(facets), None) => SimplicialComplex::from_facets(facets.iter().cloned()),
            (None, Some(simplices)) => simplices
                .iter()
                .map(|s| Simplex::new(s.iter().cloned()))
                .collect::<Result<Vec<_>, _>>()
                .and_then(SimplicialComplex::from_simplices),
            _ => {
                return Err(FormatError::Inconsistent(
                    "complex needs exactly one of \"facets\" and \"simplices\"".into(),
                ))
            }
        };
        result.map_err(FormatError::Complex)
    }

    /// Resolves everything against `complex`. The field is validated, Morse
    /// sets are only resolved (they are checked by the pipeline).
    pub fn resolve(&self, complex: SimplicialComplex) -> Result<Problem, FormatError> {
        let lookup = |context: &str, s: &SimplexRef| {
            complex.resolve(s.iter().map(String::as_str)).map_err(|source| FormatError::Reference {
                context: context.to_string(),
                source,
            })
        };
        let blocks = self
            .multivectors
            .iter()
            .map(|b| b.iter().map(|s| lookup("multivectors", s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let field = validate_field(&complex, blocks)?;
        let morse_sets = self
            .morse_sets
            .as_ref()
            .map(|sets| {
                sets.iter()
                    .map(|m| m.iter().map(|s| lookup("morse_sets", s)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let intra_order = match &self.intra_order {
            None => IntraOrder::DimLex,
            Some(map) => {
                let mut resolved = BTreeMap::new();
                for (key, list) in map {
                    let p: usize = key.parse().map_err(|_| FormatError::BadSetKey(key.clone()))?;
                    let ids = list.iter().map(|s| lookup("intra_order", s)).collect::<Result<Vec<_>, _>>()?;
                    resolved.insert(p, ids);
                }
                IntraOrder::Explicit(resolved)
            }
        };
        let tie_break = self.linext_seed.map_or(TieBreak::MinSetId, TieBreak::Seeded);
        let options = PipelineOptions { morse_sets, tie_break, intra_order, ..Default::default() };
        Ok(Problem { complex, field, options })
    }

    pub fn load(&self) -> Result<Problem, FormatError> {
        self.resolve(self.build_complex()?)
    }
}

fn simplex_ref(s: &Simplex) -> SimplexRef {
    s.vertices().to_vec()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseOutput {
    pub format: u32,
    pub sets: Vec<Vec<SimplexRef>>,
    /// Covering relations `[p, q]` with `p < q`.
    pub order_pairs: Vec<[usize; 2]>,
}

impl MorseOutput {
    pub fn new(complex: &SimplicialComplex, decomp: &MorseDecomposition) -> Self {
        Self {
            format: FORMAT_VERSION,
            sets: decomp
                .sets()
                .iter()
                .map(|m| m.iter().map(|&s| simplex_ref(complex.simplex(s))).collect())
                .collect(),
            order_pairs: decomp.poset().covering_pairs().into_iter().map(|(p, q)| [p, q]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionOutput {
    pub format: u32,
    /// Simplices in admissible order.
    pub basis: Vec<SimplexRef>,
    /// Morse set of each basis position.
    pub grades: Vec<usize>,
    pub dims: Vec<usize>,
    /// Basis positions of the surviving cells.
    pub surviving: Vec<usize>,
    /// Nonzero entries as `[row, col]` basis positions.
    pub entries: Vec<[usize; 2]>,
    /// Surviving position to simplex.
    pub labels: BTreeMap<usize, SimplexRef>,
    /// Column additions `[source, target]` in order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<[String; 2]>>,
    /// Full reduced matrix as `[row, col]` basis positions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

impl ConnectionOutput {
    pub fn new(complex: &SimplicialComplex, out: &PipelineOutput, emit_trace: bool, emit_matrix: bool) -> Self {
        let basis = out.basis();
        let cm = &out.connection;
        let labels = out.state.labels();
        Self {
            format: FORMAT_VERSION,
            basis: basis.order().iter().map(|&s| simplex_ref(complex.simplex(s))).collect(),
            grades: basis.grades().to_vec(),
            dims: basis.dims().to_vec(),
            surviving: cm.surviving.clone(),
            entries: cm.entry_positions().into_iter().map(|(r, c)| [r, c]).collect(),
            labels: cm.surviving.iter().zip(&cm.labels).map(|(&p, s)| (p, simplex_ref(s))).collect(),
            trace: emit_trace.then(|| {
                out.state
                    .trace()
                    .iter()
                    .map(|e| [labels[e.source - 1].label(), labels[e.target - 1].label()])
                    .collect()
            }),
            matrix: emit_matrix.then(|| out.state.matrix.entries().map(|(r, c)| [r, c]).collect()),
            certificate: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let doc: Self = parse_json(text)?;
        check_version(doc.format)?;
        Ok(doc)
    }

    /// Rebuilds the basis and connection matrix against `complex` and
    /// `decomp`, checking the document is self-consistent.
    pub fn rebuild(
        &self,
        complex: &SimplicialComplex,
        decomp: &MorseDecomposition,
    ) -> Result<(AdmissibleBasis, ConnectionMatrix), FormatError> {
        let order = self
            .basis
            .iter()
            .map(|s| {
                complex.resolve(s.iter().map(String::as_str)).map_err(|source| FormatError::Reference {
                    context: "basis".into(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let basis = AdmissibleBasis::from_order(complex, decomp, order)?;
        if self.grades != basis.grades() || self.dims != basis.dims() {
            return Err(FormatError::Inconsistent("grades or dims disagree with the basis".into()));
        }
        let n = basis.len();
        if self.surviving.windows(2).any(|w| w[0] >= w[1]) || self.surviving.iter().any(|&p| p == 0 || p > n) {
            return Err(FormatError::Inconsistent("surviving positions must be ascending and in range".into()));
        }
        let local: BTreeMap<usize, usize> = self.surviving.iter().enumerate().map(|(k, &p)| (p, k + 1)).collect();
        let mut columns = vec![Vec::new(); self.surviving.len()];
        for &[r, c] in &self.entries {
            match (local.get(&r), local.get(&c)) {
                (Some(&i), Some(&j)) => columns[j - 1].push(i),
                _ => return Err(FormatError::Inconsistent(format!("entry [{r}, {c}] is not between surviving cells"))),
            }
        }
        columns.iter_mut().for_each(|c| c.sort_unstable());
        let entries = SparseGF2Matrix::from_columns(self.surviving.len(), columns)?;
        let labels: Vec<Simplex> =
            self.surviving.iter().map(|&p| complex.simplex(basis.simplex_at(p)).clone()).collect();
        for (p, label) in self.surviving.iter().zip(&labels) {
            if self.labels.get(p).map(Vec::as_slice) != Some(label.vertices()) {
                return Err(FormatError::Inconsistent(format!("label of position {p} disagrees with the basis")));
            }
        }
        let cm = ConnectionMatrix {
            grades: self.surviving.iter().map(|&p| basis.grade_at(p)).collect(),
            dims: self.surviving.iter().map(|&p| basis.dims()[p - 1]).collect(),
            surviving: self.surviving.clone(),
            labels,
            entries,
        };
        Ok((basis, cm))
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{compute_connection_matrix, decompose};

    const ANNULUS: &str = r#"{
        "format": 1,
        "complex": {"facets": [["A","B","C"], ["C","D","A"]]},
        "multivectors": [[["A"],["A","B"]], [["B"],["B","C"]], [["C"],["C","D"]], [["D"],["A","D"]],
                         [["A","C"]], [["A","B","C"]], [["A","C","D"]]],
        "intra_order": {"0": [["A"],["B"],["A","B"],["C"],["B","C"],["D"],["C","D"],["A","D"]]}
    }"#;

    #[test]
    fn annulus_roundtrip() {
        let problem = ProblemInput::parse(ANNULUS).unwrap().load().unwrap();
        let out = compute_connection_matrix(&problem.complex, &problem.field, &problem.options).unwrap();
        let doc = ConnectionOutput::new(&problem.complex, &out, true, true);
        assert_eq!(doc.surviving.len(), 5);
        assert_eq!(doc.entries.len(), 3);
        assert_eq!(doc.trace.as_ref().unwrap().len(), 4);
        let reparsed = ConnectionOutput::parse(&to_json(&doc)).unwrap();
        assert_eq!(reparsed, doc);
        let decomp = decompose(&problem.complex, &problem.field, None).unwrap();
        let (basis, cm) = reparsed.rebuild(&problem.complex, &decomp).unwrap();
        assert_eq!(&basis, out.basis());
        assert_eq!(cm, out.connection);
    }

    #[test]
    fn parse_errors_have_positions() {
        match ProblemInput::parse("{\n  \"format\": 1,\n  oops\n}") {
            Err(FormatError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ProblemInput::parse(r#"{"format": 2, "complex": {"facets": []}, "multivectors": []}"#),
            Err(FormatError::Version(2))
        ));
    }

    #[test]
    fn uncovered_simplex_is_reported() {
        let text = ANNULUS.replace(r#"[["D"],["A","D"]],"#, r#"[["A","D"]],"#);
        let err = ProblemInput::parse(&text).unwrap().load().unwrap_err();
        assert!(err.to_string().contains("uncovered simplex D"), "{err}");
    }

    #[test]
    fn unknown_reference_is_reported() {
        let text = ANNULUS.replace(r#"[["A","C"]],"#, r#"[["A","C"]], [["E"]],"#);
        let err = ProblemInput::parse(&text).unwrap().load().unwrap_err();
        assert!(matches!(err, FormatError::Reference { .. }), "{err}");
    }
}
