//! Python bindings for the mep engine: datasets, solutions, evaluation,
//! and full evolutionary runs.

use mep::chromosome::all_builtin_functions;
use mep::evaluator::{
    assign_outputs_greedy, chromosome_fitness_single, evaluate_matrix, expression_fitness,
    gene_output_fitness,
};
use mep::problems::parse_csv_text;
use mep::{
    CrossoverKind, EngineConfig, ExceptionPolicy, FitnessCase, FunctionSymbol, GeneratorSpec,
    Individual as MepIndividual, Mode, OperatorConfig, Primitives, Rng, SymbolPolicy,
};
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(value_err)
}

/// A table of fitness cases: input columns, target columns, and a mode.
#[pyclass(name = "Dataset", frozen)]
struct Dataset {
    inner: mep::Dataset,
}

#[pymethods]
impl Dataset {
    /// Builds a dataset from parallel rows of inputs and targets.
    #[new]
    #[pyo3(signature = (ni, no, mode, inputs, targets))]
    fn new(
        ni: usize,
        no: usize,
        mode: &str,
        inputs: Vec<Vec<f64>>,
        targets: Vec<Vec<f64>>,
    ) -> PyResult<Self> {
        if inputs.len() != targets.len() {
            return Err(PyValueError::new_err(format!(
                "{} input rows but {} target rows",
                inputs.len(),
                targets.len()
            )));
        }
        let cases = inputs
            .into_iter()
            .zip(targets)
            .map(|(i, t)| FitnessCase::new(i, t))
            .collect();
        let inner = mep::Dataset::new(ni, no, parse_mode(mode)?, cases).map_err(value_err)?;
        Ok(Dataset { inner })
    }

    /// Parses CSV text with `ni` input columns followed by `no` targets.
    #[staticmethod]
    #[pyo3(signature = (text, ni, no, has_header = false, mode = "regression"))]
    fn from_csv(text: &str, ni: usize, no: usize, has_header: bool, mode: &str) -> PyResult<Self> {
        let inner =
            parse_csv_text(text, ni, no, has_header, parse_mode(mode)?).map_err(value_err)?;
        Ok(Dataset { inner })
    }

    /// Full truth table of the even-parity function over `bits` inputs.
    #[staticmethod]
    fn even_parity(bits: usize) -> PyResult<Self> {
        let inner = GeneratorSpec::EvenParity { bits }.build().map_err(value_err)?;
        Ok(Dataset { inner })
    }

    /// Truth table of the one-bit full adder (sum and carry outputs).
    #[staticmethod]
    fn full_adder() -> PyResult<Self> {
        let inner = GeneratorSpec::FullAdder.build().map_err(value_err)?;
        Ok(Dataset { inner })
    }

    /// Truth table of the `bits`-by-`bits` binary multiplier.
    #[staticmethod]
    fn multiplier(bits: usize) -> PyResult<Self> {
        let inner = GeneratorSpec::Multiplier { bits }.build().map_err(value_err)?;
        Ok(Dataset { inner })
    }

    /// Samples a univariate polynomial on a uniform random grid.
    #[staticmethod]
    #[pyo3(signature = (coefficients, domain = (-1.0, 1.0), samples = 20, seed = 0))]
    fn polynomial(
        coefficients: Vec<f64>,
        domain: (f64, f64),
        samples: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let inner = GeneratorSpec::Polynomial { coefficients, domain, samples, seed }
            .build()
            .map_err(value_err)?;
        Ok(Dataset { inner })
    }

    #[getter]
    fn ni(&self) -> usize {
        self.inner.ni()
    }

    #[getter]
    fn no(&self) -> usize {
        self.inner.no()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode().as_str()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// The case at `index` as an (inputs, targets) pair.
    fn case(&self, index: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
        if index >= self.inner.len() {
            return Err(PyIndexError::new_err(index));
        }
        let c = self.inner.case(index);
        Ok((c.inputs().to_vec(), c.targets().to_vec()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(ni={}, no={}, mode='{}', cases={})",
            self.inner.ni(),
            self.inner.no(),
            self.inner.mode().as_str(),
            self.inner.len()
        )
    }
}

/// A parsed individual: a main chromosome plus optional subprograms.
#[pyclass(name = "Individual", frozen)]
struct Individual {
    inner: MepIndividual,
    prims: Primitives,
}

#[pymethods]
impl Individual {
    /// Parses the text format over `ni` problem inputs.
    #[staticmethod]
    fn parse(text: &str, ni: usize) -> PyResult<Self> {
        let (inner, prims) = mep::adf::parse_individual(
            text,
            ni,
            all_builtin_functions(),
            SymbolPolicy::PerSymbolUniform,
        )
        .map_err(value_err)?;
        Ok(Individual { inner, prims })
    }

    /// Renders back to the text format.
    fn to_text(&self) -> String {
        self.inner.to_text(&self.prims)
    }

    /// Infix rendering of the expression rooted at `gene`.
    fn expression(&self, gene: usize) -> PyResult<String> {
        self.inner
            .main()
            .expression_text(gene, self.prims.main())
            .map_err(value_err)
    }

    /// Number of genes in the main chromosome.
    fn __len__(&self) -> usize {
        self.inner.main().len()
    }

    #[getter]
    fn num_adfs(&self) -> usize {
        self.inner.adfs().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Individual(genes={}, adfs={})",
            self.inner.main().len(),
            self.inner.adfs().len()
        )
    }
}

/// Scores an individual against a dataset without modifying it.
///
/// Returns a dict with per-gene fitnesses, the chosen output genes, and
/// the total fitness. Division by zero is absorbed (protected evaluation).
#[pyfunction]
fn evaluate<'py>(
    py: Python<'py>,
    individual: &Individual,
    dataset: &Dataset,
) -> PyResult<Bound<'py, PyDict>> {
    let ds = &dataset.inner;
    let mut scratch = individual.inner.clone();
    let mut rng = Rng::new(0);
    let matrix = evaluate_matrix(
        &mut scratch,
        &individual.prims,
        ds,
        ExceptionPolicy::Protected,
        &mut rng,
    );
    let ng = individual.inner.main().len();
    let out = PyDict::new(py);
    if ds.no() == 1 {
        let per_gene: Vec<f64> = (0..ng).map(|i| expression_fitness(&matrix, ds, i)).collect();
        let outcome = chromosome_fitness_single(&matrix, ds);
        out.set_item("gene_fitnesses", per_gene)?;
        out.set_item("best_genes", outcome.best_genes)?;
        out.set_item("fitness", outcome.fitness)?;
    } else {
        let table = gene_output_fitness(&matrix, ds);
        let per_gene: Vec<Vec<f64>> = (0..ng)
            .map(|i| (0..ds.no()).map(|q| table.get(i, q)).collect())
            .collect();
        let outcome = assign_outputs_greedy(&table).map_err(value_err)?;
        out.set_item("gene_fitnesses", per_gene)?;
        out.set_item("best_genes", outcome.best_genes)?;
        out.set_item("fitness", outcome.fitness)?;
    }
    Ok(out)
}

/// Runs the steady-state evolutionary search and returns a result dict.
#[pyfunction]
#[pyo3(signature = (
    dataset,
    *,
    population_size = 100,
    max_generations = 100,
    chromosome_length = 16,
    tournament_size = 2,
    seed = 0,
    crossover = "one_point",
    crossover_prob = 0.9,
    mutation_prob = 0.02,
    exception_policy = "mutate_gene",
    functions = None,
))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    dataset: &Dataset,
    population_size: usize,
    max_generations: usize,
    chromosome_length: usize,
    tournament_size: usize,
    seed: u64,
    crossover: &str,
    crossover_prob: f64,
    mutation_prob: f64,
    exception_policy: &str,
    functions: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyDict>> {
    let crossover_kind = match crossover {
        "one_point" => CrossoverKind::OnePoint,
        "two_point" => CrossoverKind::TwoPoint,
        "uniform" => CrossoverKind::Uniform,
        other => return Err(PyValueError::new_err(format!("unknown crossover `{other}`"))),
    };
    let exception_policy = match exception_policy {
        "mutate_gene" => ExceptionPolicy::MutateGene,
        "protected" => ExceptionPolicy::Protected,
        other => {
            return Err(PyValueError::new_err(format!("unknown exception policy `{other}`")))
        }
    };
    let functions = match functions {
        None => mep::arithmetic_functions(),
        Some(names) => names
            .iter()
            .map(|n| {
                FunctionSymbol::builtin(n)
                    .ok_or_else(|| PyValueError::new_err(format!("unknown function `{n}`")))
            })
            .collect::<PyResult<Vec<_>>>()?,
    };
    let config = EngineConfig {
        population_size,
        max_generations,
        chromosome_length,
        tournament_size,
        operators: OperatorConfig {
            crossover_kind,
            crossover_prob,
            mutation_prob_per_symbol: mutation_prob,
        },
        seed,
        exception_policy,
        functions,
        ..EngineConfig::default()
    };
    let output = mep::engine::run(&config, &dataset.inner).map_err(value_err)?;

    let records: Vec<(usize, f64, f64, usize)> = output
        .stats
        .records()
        .iter()
        .map(|r| (r.generation, r.best_fitness, r.mean_fitness, r.exception_count))
        .collect();
    let expressions = output
        .best_outcome
        .best_genes
        .iter()
        .map(|&g| output.best.main().expression_text(g, output.primitives.main()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(value_err)?;

    let out = PyDict::new(py);
    out.set_item("seed", seed)?;
    out.set_item("fitness", output.best_outcome.fitness)?;
    out.set_item("solved", output.stats.solved())?;
    out.set_item("generations", output.stats.generations())?;
    out.set_item("best_genes", output.best_outcome.best_genes.clone())?;
    out.set_item("best_expressions", expressions)?;
    out.set_item("solution_text", output.best.to_text(&output.primitives))?;
    out.set_item("records", records)?;
    Ok(out)
}

/// Largest number of effective symbols a chromosome of the given length
/// can hold when functions take at most `max_arity` arguments.
#[pyfunction]
fn max_symbol_count(length: usize, max_arity: usize) -> PyResult<usize> {
    if length == 0 {
        return Err(PyValueError::new_err("length must be at least 1"));
    }
    Ok(mep::max_symbol_count(length, max_arity))
}

#[pymodule]
fn mep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<Individual>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(max_symbol_count, m)?)?;
    Ok(())
}
