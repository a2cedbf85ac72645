//! Multi Expression Programming.
//!
//! A chromosome here is a flat list of genes. Gene 0 holds a terminal;
//! every later gene holds a terminal or a function call whose arguments
//! point strictly backwards. Each gene roots a complete expression, so one
//! chromosome of length `NG` encodes `NG` candidate expressions that share
//! subexpressions, and all of them are scored in a single forward pass over
//! the gene list. The chromosome's fitness is the best fitness among its
//! expressions, which makes the extra candidates free at evaluation time.
//!
//! The crate provides the representation ([`chromosome`]), the
//! dynamic-programming evaluator with exception handling ([`evaluator`]),
//! crossover and mutation ([`operators`]), automatically defined functions
//! ([`adf`]), a steady-state search loop ([`engine`]), and dataset loading
//! plus benchmark generators ([`problems`]). All randomness flows through
//! the seeded generator in [`rng`], so runs replay exactly.
//!
//! ```
//! use mep::{EngineConfig, FitnessCase, Dataset, Mode};
//!
//! // Fit a + b on four cases.
//! let cases = [(1.0, 2.0), (3.0, 5.0), (2.0, 2.0), (10.0, 4.0)]
//!     .iter()
//!     .map(|&(a, b)| FitnessCase::new(vec![a, b], vec![a + b]))
//!     .collect();
//! let dataset = Dataset::new(2, 1, Mode::Regression, cases).unwrap();
//!
//! let config = EngineConfig {
//!     population_size: 40,
//!     max_generations: 40,
//!     chromosome_length: 8,
//!     seed: 7,
//!     ..EngineConfig::default()
//! };
//! let output = mep::engine::run(&config, &dataset).unwrap();
//! assert_eq!(output.best_outcome.fitness, 0.0);
//! ```

pub mod adf;
pub mod chromosome;
pub mod engine;
pub mod evaluator;
pub mod operators;
pub mod problems;
pub mod rng;

#[cfg(test)]
pub(crate) mod testutil;

pub use adf::{AdfChromosome, AdfConfig, AdfSignature, Individual, Primitives, RepresentativePolicy};
pub use chromosome::{
    arithmetic_functions, boolean_functions, max_symbol_count, Chromosome, ChromosomeError,
    FunctionOp, FunctionSymbol, Gene, ParseError, PrimitiveSet, SymbolPolicy, Violation,
};
pub use engine::{
    ConfigError, Engine, EngineConfig, EngineError, GenerationRecord, RunOutput, RunStats,
    ScoredIndividual,
};
pub use evaluator::{
    Dataset, DatasetError, EvalError, EvalOutcome, EvaluationMatrix, ExceptionEvent,
    ExceptionPolicy, FitnessCase, GeneOutputTable, Mode,
};
pub use operators::{CrossoverKind, OperatorConfig, OperatorError};
pub use problems::{GeneratorSpec, ProblemError, ProblemSource, ProblemSpec};
pub use rng::Rng;
