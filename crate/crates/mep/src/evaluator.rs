//! Single-pass evaluation and fitness.
//!
//! Because argument pointers only run backwards, one forward sweep over the
//! gene list computes every encoded expression's value on every fitness
//! case. The per-gene values form the evaluation matrix; fitness is read
//! off that matrix, so a chromosome with `NG` genes yields `NG` candidate
//! solutions for the price of one evaluation.
//!
//! Division by zero is the one arithmetic exception. Under the default
//! mutate-gene policy the raising gene is replaced by a random terminal and
//! only that matrix row is recomputed; under the protected policy the
//! division returns its numerator and the chromosome is never touched.
//!
//! Multi-output problems score each output against each gene (the
//! gene-output table) and then assign outputs to distinct genes: a greedy
//! per-output pass (the engine default), a global-minimum variant, and an
//! exact brute-force reference for small tables.

use crate::adf::{AdfChromosome, Individual, Primitives};
use crate::chromosome::{FunctionOp, Gene, PrimitiveSet};
use crate::rng::Rng;
use thiserror::Error;

/// How raw expression values are scored against targets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Sum of absolute errors.
    #[default]
    Regression,
    /// Count of misclassified cases; value >= 0 reads as class 1.
    Classification,
    /// Absolute error over {0,1} values, i.e. Hamming distance.
    Boolean,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Regression => "regression",
            Mode::Classification => "classification",
            Mode::Boolean => "boolean",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown mode `{0}`; expected regression, classification, or boolean")]
pub struct ModeParseError(pub String);

impl std::str::FromStr for Mode {
    type Err = ModeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "regression" => Ok(Mode::Regression),
            "classification" => Ok(Mode::Classification),
            "boolean" => Ok(Mode::Boolean),
            other => Err(ModeParseError(other.to_string())),
        }
    }
}

/// One training case: `NI` input values and `NO` target values.
#[derive(Clone, Debug, PartialEq)]
pub struct FitnessCase {
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl FitnessCase {
    pub fn new(inputs: Vec<f64>, targets: Vec<f64>) -> Self {
        FitnessCase { inputs, targets }
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DatasetError {
    #[error("a dataset needs at least one case")]
    Empty,
    #[error("a dataset needs at least one input and one target column")]
    BadShape,
    #[error("case {case}: expected {expected} inputs, got {got}")]
    InputLen {
        case: usize,
        expected: usize,
        got: usize,
    },
    #[error("case {case}: expected {expected} targets, got {got}")]
    TargetLen {
        case: usize,
        expected: usize,
        got: usize,
    },
    #[error("case {case}: value {value} is not boolean (0 or 1)")]
    NonBoolean { case: usize, value: f64 },
    #[error("case {case}: classification target {value} is not 0 or 1")]
    NonBinaryTarget { case: usize, value: f64 },
    #[error("expected {expected} column names, got {got}")]
    ColumnNames { expected: usize, got: usize },
}

/// A fixed training set with its scoring mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    ni: usize,
    no: usize,
    mode: Mode,
    cases: Vec<FitnessCase>,
    column_names: Option<Vec<String>>,
}

impl Dataset {
    /// Validates shapes and mode-specific value constraints.
    pub fn new(
        ni: usize,
        no: usize,
        mode: Mode,
        cases: Vec<FitnessCase>,
    ) -> Result<Self, DatasetError> {
        if ni == 0 || no == 0 {
            return Err(DatasetError::BadShape);
        }
        if cases.is_empty() {
            return Err(DatasetError::Empty);
        }
        for (case, c) in cases.iter().enumerate() {
            if c.inputs.len() != ni {
                return Err(DatasetError::InputLen {
                    case,
                    expected: ni,
                    got: c.inputs.len(),
                });
            }
            if c.targets.len() != no {
                return Err(DatasetError::TargetLen {
                    case,
                    expected: no,
                    got: c.targets.len(),
                });
            }
            match mode {
                Mode::Regression => {}
                Mode::Classification => {
                    if let Some(&value) = c.targets.iter().find(|&&v| v != 0.0 && v != 1.0) {
                        return Err(DatasetError::NonBinaryTarget { case, value });
                    }
                }
                Mode::Boolean => {
                    let bad = c
                        .inputs
                        .iter()
                        .chain(&c.targets)
                        .find(|&&v| v != 0.0 && v != 1.0);
                    if let Some(&value) = bad {
                        return Err(DatasetError::NonBoolean { case, value });
                    }
                }
            }
        }
        Ok(Dataset {
            ni,
            no,
            mode,
            cases,
            column_names: None,
        })
    }

    /// Attaches one name per column (`NI` inputs then `NO` targets).
    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self, DatasetError> {
        if names.len() != self.ni + self.no {
            return Err(DatasetError::ColumnNames {
                expected: self.ni + self.no,
                got: names.len(),
            });
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn ni(&self) -> usize {
        self.ni
    }

    pub fn no(&self) -> usize {
        self.no
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn cases(&self) -> &[FitnessCase] {
        &self.cases
    }

    pub fn case(&self, k: usize) -> &FitnessCase {
        &self.cases[k]
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }
}

/// What happens when a gene raises an arithmetic exception.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExceptionPolicy {
    /// Replace the raising gene with a random terminal and recompute its row.
    #[default]
    MutateGene,
    /// Division by zero returns its numerator; the chromosome never changes.
    Protected,
}

/// One recorded exception: which gene raised on which case, and the
/// terminal it was replaced with (None under the protected policy).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExceptionEvent {
    pub gene: usize,
    pub case: usize,
    pub replacement: Option<usize>,
}

/// The `NG x NFC` table of gene values, plus the exception trail.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationMatrix {
    ng: usize,
    nfc: usize,
    values: Vec<f64>,
    visits: Vec<u32>,
    events: Vec<ExceptionEvent>,
}

impl EvaluationMatrix {
    /// Wraps explicit rows; useful for feeding synthetic tables to the
    /// fitness functions in tests.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let ng = rows.len();
        assert!(ng > 0, "a matrix needs at least one row");
        let nfc = rows[0].len();
        assert!(nfc > 0, "a matrix needs at least one column");
        assert!(rows.iter().all(|r| r.len() == nfc), "ragged rows");
        EvaluationMatrix {
            ng,
            nfc,
            values: rows.into_iter().flatten().collect(),
            visits: vec![1; ng],
            events: Vec::new(),
        }
    }

    pub fn ng(&self) -> usize {
        self.ng
    }

    pub fn nfc(&self) -> usize {
        self.nfc
    }

    /// Value of gene `i` on case `k`.
    pub fn value(&self, i: usize, k: usize) -> f64 {
        assert!(i < self.ng && k < self.nfc, "matrix index out of range");
        self.values[i * self.nfc + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.nfc..(i + 1) * self.nfc]
    }

    /// How many times each row was (re)computed; 1 everywhere when no
    /// repairs happened.
    pub fn visits(&self) -> &[u32] {
        &self.visits
    }

    pub fn events(&self) -> &[ExceptionEvent] {
        &self.events
    }

    pub fn exception_count(&self) -> usize {
        self.events.len()
    }

    /// True when any exception led to a gene replacement.
    pub fn repaired(&self) -> bool {
        self.events.iter().any(|e| e.replacement.is_some())
    }
}

/// Fitness result for one individual.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalOutcome {
    pub fitness: f64,
    /// The gene chosen per output: one index for single-output problems,
    /// `NO` distinct indices otherwise.
    pub best_genes: Vec<usize>,
    /// True when mutate-gene repairs changed the individual.
    pub repaired: bool,
    /// Exceptions raised (repairs) or absorbed (protected) during evaluation.
    pub exception_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cannot assign {outputs} outputs to {genes} genes injectively")]
    InfeasibleAssignment { genes: usize, outputs: usize },
    #[error("brute-force assignment is limited to 10 genes and 5 outputs, got {genes}x{outputs}")]
    AssignmentTooLarge { genes: usize, outputs: usize },
    #[error("ADF expects {expected} arguments, got {got}")]
    AdfArityMismatch { expected: usize, got: usize },
}

/// The one arithmetic exception.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct DivisionByZero;

fn truthy(v: f64) -> bool {
    v != 0.0
}

fn bool01(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Applies a builtin to already-computed argument values. ADF calls are
/// dispatched by the callers, never here.
fn apply_op(op: FunctionOp, a: &[f64]) -> Result<f64, DivisionByZero> {
    Ok(match op {
        FunctionOp::Add => a[0] + a[1],
        FunctionOp::Sub => a[0] - a[1],
        FunctionOp::Mul => a[0] * a[1],
        FunctionOp::Div => {
            if a[1] == 0.0 {
                return Err(DivisionByZero);
            }
            a[0] / a[1]
        }
        FunctionOp::And => bool01(truthy(a[0]) && truthy(a[1])),
        FunctionOp::Or => bool01(truthy(a[0]) || truthy(a[1])),
        FunctionOp::Nand => bool01(!(truthy(a[0]) && truthy(a[1]))),
        FunctionOp::Nor => bool01(!(truthy(a[0]) || truthy(a[1]))),
        FunctionOp::Xor => bool01(truthy(a[0]) != truthy(a[1])),
        FunctionOp::Not => bool01(!truthy(a[0])),
        FunctionOp::AdfCall(_) => unreachable!("ADF calls are handled by the evaluator loops"),
    })
}

/// Error contribution of one (value, target) pair.
fn case_error(mode: Mode, value: f64, target: f64) -> f64 {
    match mode {
        Mode::Regression | Mode::Boolean => {
            let e = (value - target).abs();
            if e.is_finite() {
                e
            } else {
                f64::MAX
            }
        }
        Mode::Classification => {
            let class = if value >= 0.0 { 1.0 } else { 0.0 };
            if class == target {
                0.0
            } else {
                1.0
            }
        }
    }
}

/// Keeps fitness totals finite so comparisons stay total orders.
fn clamp_total(total: f64) -> f64 {
    if total.is_finite() {
        total
    } else {
        f64::MAX
    }
}

/// Value of an ADF call, propagating the first internal exception.
fn adf_value_raising(
    adf: &AdfChromosome,
    ps: &PrimitiveSet,
    args: &[f64],
) -> Result<f64, DivisionByZero> {
    debug_assert_eq!(args.len(), adf.param_count());
    let genes = adf.chromosome().genes();
    let mut col = Vec::with_capacity(genes.len());
    let mut argv = Vec::new();
    for gene in genes {
        let v = match gene {
            Gene::Terminal(p) => args[*p],
            Gene::Call { function, args: a } => {
                argv.clear();
                argv.extend(a.iter().map(|&j| col[j]));
                apply_op(ps.function(*function).op(), &argv)?
            }
        };
        col.push(v);
    }
    Ok(col[adf.representative()])
}

/// Value of an ADF call with internal divisions protected; `absorbed`
/// counts how many were absorbed.
fn adf_value_protected(
    adf: &AdfChromosome,
    ps: &PrimitiveSet,
    args: &[f64],
    absorbed: &mut usize,
) -> f64 {
    debug_assert_eq!(args.len(), adf.param_count());
    let genes = adf.chromosome().genes();
    let mut col = Vec::with_capacity(genes.len());
    let mut argv = Vec::new();
    for gene in genes {
        let v = match gene {
            Gene::Terminal(p) => args[*p],
            Gene::Call { function, args: a } => {
                argv.clear();
                argv.extend(a.iter().map(|&j| col[j]));
                match apply_op(ps.function(*function).op(), &argv) {
                    Ok(v) => v,
                    Err(DivisionByZero) => {
                        *absorbed += 1;
                        argv[0]
                    }
                }
            }
        };
        col.push(v);
    }
    col[adf.representative()]
}

/// All gene values of an ADF body on one argument vector, with internal
/// divisions protected. Diagnostic helper.
pub fn adf_gene_values(
    adf: &AdfChromosome,
    ps: &PrimitiveSet,
    args: &[f64],
) -> Result<Vec<f64>, EvalError> {
    if args.len() != adf.param_count() {
        return Err(EvalError::AdfArityMismatch {
            expected: adf.param_count(),
            got: args.len(),
        });
    }
    let genes = adf.chromosome().genes();
    let mut col: Vec<f64> = Vec::with_capacity(genes.len());
    let mut argv = Vec::new();
    for gene in genes {
        let v = match gene {
            Gene::Terminal(p) => args[*p],
            Gene::Call { function, args: a } => {
                argv.clear();
                argv.extend(a.iter().map(|&j| col[j]));
                match apply_op(ps.function(*function).op(), &argv) {
                    Ok(v) => v,
                    Err(DivisionByZero) => argv[0],
                }
            }
        };
        col.push(v);
    }
    Ok(col)
}

/// Evaluates one ADF call standalone.
///
/// Under mutate-gene, a raising gene inside the ADF is replaced by a random
/// parameter terminal and re-evaluated, mutating `adf` in place. Under
/// protected, divisions return their numerator and `adf` is untouched.
pub fn eval_adf_call(
    adf: &mut AdfChromosome,
    ps: &PrimitiveSet,
    args: &[f64],
    policy: ExceptionPolicy,
    rng: &mut Rng,
) -> Result<f64, EvalError> {
    if args.len() != adf.param_count() {
        return Err(EvalError::AdfArityMismatch {
            expected: adf.param_count(),
            got: args.len(),
        });
    }
    match policy {
        ExceptionPolicy::Protected => {
            let mut absorbed = 0;
            Ok(adf_value_protected(adf, ps, args, &mut absorbed))
        }
        ExceptionPolicy::MutateGene => {
            let len = adf.chromosome().len();
            let mut col = vec![0.0; len];
            let mut argv = Vec::new();
            let mut i = 0;
            while i < len {
                let gene = adf.chromosome().gene(i).clone();
                match gene {
                    Gene::Terminal(p) => col[i] = args[p],
                    Gene::Call { function, args: a } => {
                        argv.clear();
                        argv.extend(a.iter().map(|&j| col[j]));
                        match apply_op(ps.function(function).op(), &argv) {
                            Ok(v) => col[i] = v,
                            Err(DivisionByZero) => {
                                let t = rng.below(adf.param_count());
                                adf.replace_gene(i, Gene::Terminal(t));
                                continue;
                            }
                        }
                    }
                }
                i += 1;
            }
            Ok(col[adf.representative()])
        }
    }
}

/// Computes the full evaluation matrix of an individual's main chromosome.
///
/// Rows are filled in gene order. When gene `i` raises on some case under
/// mutate-gene, the gene becomes a random terminal and row `i` restarts
/// from case 0; rows below `i` are unaffected because pointers only run
/// backwards, and rows above are computed afterwards. Exceptions raised
/// inside a called ADF are attributed to the calling main gene, so repairs
/// land on the main chromosome and the matrix stays consistent with the
/// repaired individual.
///
/// The individual must be valid for `prims`.
pub fn evaluate_matrix(
    ind: &mut Individual,
    prims: &Primitives,
    ds: &Dataset,
    policy: ExceptionPolicy,
    rng: &mut Rng,
) -> EvaluationMatrix {
    let (main, adfs) = ind.parts_mut();
    let ng = main.len();
    let nfc = ds.len();
    let mut values = vec![0.0; ng * nfc];
    let mut visits = vec![0u32; ng];
    let mut events = Vec::new();
    let mut argv: Vec<f64> = Vec::new();

    for i in 0..ng {
        'row: loop {
            visits[i] += 1;
            let gene = main.gene(i).clone();
            match gene {
                Gene::Terminal(v) => {
                    for k in 0..nfc {
                        values[i * nfc + k] = ds.case(k).inputs()[v];
                    }
                }
                Gene::Call { function, args } => {
                    let sym = *prims.main().function(function);
                    for k in 0..nfc {
                        argv.clear();
                        argv.extend(args.iter().map(|&a| values[a * nfc + k]));
                        let result = match sym.op() {
                            FunctionOp::AdfCall(x) => match policy {
                                ExceptionPolicy::Protected => {
                                    let mut absorbed = 0;
                                    let v = adf_value_protected(
                                        &adfs[x],
                                        prims.adf(x),
                                        &argv,
                                        &mut absorbed,
                                    );
                                    for _ in 0..absorbed {
                                        events.push(ExceptionEvent {
                                            gene: i,
                                            case: k,
                                            replacement: None,
                                        });
                                    }
                                    Ok(v)
                                }
                                ExceptionPolicy::MutateGene => {
                                    adf_value_raising(&adfs[x], prims.adf(x), &argv)
                                }
                            },
                            op => apply_op(op, &argv),
                        };
                        match result {
                            Ok(v) => values[i * nfc + k] = v,
                            Err(DivisionByZero) => match policy {
                                ExceptionPolicy::Protected => {
                                    values[i * nfc + k] = argv[0];
                                    events.push(ExceptionEvent {
                                        gene: i,
                                        case: k,
                                        replacement: None,
                                    });
                                }
                                ExceptionPolicy::MutateGene => {
                                    let t = rng.below(prims.main().num_terminals());
                                    main.replace_gene(i, Gene::Terminal(t));
                                    events.push(ExceptionEvent {
                                        gene: i,
                                        case: k,
                                        replacement: Some(t),
                                    });
                                    continue 'row;
                                }
                            },
                        }
                    }
                }
            }
            break;
        }
    }
    EvaluationMatrix {
        ng,
        nfc,
        values,
        visits,
        events,
    }
}

/// Sum over cases of the error of gene `i`'s value against the single
/// target column.
///
/// # Panics
///
/// Panics if the dataset has more than one output or `i` is out of range.
pub fn expression_fitness(m: &EvaluationMatrix, ds: &Dataset, i: usize) -> f64 {
    assert_eq!(ds.no(), 1, "expression_fitness needs a single-output dataset");
    let mut total = 0.0;
    for k in 0..ds.len() {
        total += case_error(ds.mode(), m.value(i, k), ds.case(k).targets()[0]);
    }
    clamp_total(total)
}

/// Best gene of a single-output chromosome: the minimum of
/// [`expression_fitness`] over all genes, ties to the lowest index.
pub fn chromosome_fitness_single(m: &EvaluationMatrix, ds: &Dataset) -> EvalOutcome {
    let mut best = 0;
    let mut best_fitness = expression_fitness(m, ds, 0);
    for i in 1..m.ng() {
        let f = expression_fitness(m, ds, i);
        if f < best_fitness {
            best_fitness = f;
            best = i;
        }
    }
    EvalOutcome {
        fitness: best_fitness,
        best_genes: vec![best],
        repaired: m.repaired(),
        exception_count: m.exception_count(),
    }
}

/// The `NG x NO` table of per-gene, per-output fitness sums.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneOutputTable {
    ng: usize,
    no: usize,
    f: Vec<f64>,
}

impl GeneOutputTable {
    /// Wraps explicit rows (genes) of `NO` columns each.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let ng = rows.len();
        assert!(ng > 0, "a table needs at least one gene row");
        let no = rows[0].len();
        assert!(no > 0, "a table needs at least one output column");
        assert!(rows.iter().all(|r| r.len() == no), "ragged rows");
        GeneOutputTable {
            ng,
            no,
            f: rows.into_iter().flatten().collect(),
        }
    }

    pub fn ng(&self) -> usize {
        self.ng
    }

    pub fn no(&self) -> usize {
        self.no
    }

    /// Fitness of expression `i` against output column `q`.
    pub fn get(&self, i: usize, q: usize) -> f64 {
        assert!(i < self.ng && q < self.no, "table index out of range");
        self.f[i * self.no + q]
    }
}

/// Builds the gene-output table from an evaluation matrix: entry `(i, q)`
/// sums the error of gene `i` against target column `q` over all cases.
pub fn gene_output_fitness(m: &EvaluationMatrix, ds: &Dataset) -> GeneOutputTable {
    let ng = m.ng();
    let no = ds.no();
    let mut f = vec![0.0; ng * no];
    for i in 0..ng {
        for q in 0..no {
            let mut total = 0.0;
            for k in 0..ds.len() {
                total += case_error(ds.mode(), m.value(i, k), ds.case(k).targets()[q]);
            }
            f[i * no + q] = clamp_total(total);
        }
    }
    GeneOutputTable { ng, no, f }
}

fn check_feasible(t: &GeneOutputTable) -> Result<(), EvalError> {
    if t.ng() < t.no() {
        return Err(EvalError::InfeasibleAssignment {
            genes: t.ng(),
            outputs: t.no(),
        });
    }
    Ok(())
}

fn assignment_outcome(t: &GeneOutputTable, genes: Vec<usize>) -> EvalOutcome {
    let total = genes.iter().enumerate().map(|(q, &i)| t.get(i, q)).sum();
    EvalOutcome {
        fitness: clamp_total(total),
        best_genes: genes,
        repaired: false,
        exception_count: 0,
    }
}

/// Greedy assignment: outputs in order, each taking its best unused gene
/// (ties to the lowest gene index).
pub fn assign_outputs_greedy(t: &GeneOutputTable) -> Result<EvalOutcome, EvalError> {
    check_feasible(t)?;
    let mut used = vec![false; t.ng()];
    let mut genes = Vec::with_capacity(t.no());
    for q in 0..t.no() {
        let mut best: Option<usize> = None;
        for (i, &taken) in used.iter().enumerate() {
            if taken {
                continue;
            }
            if best.is_none_or(|b| t.get(i, q) < t.get(b, q)) {
                best = Some(i);
            }
        }
        let pick = best.expect("feasibility was checked");
        used[pick] = true;
        genes.push(pick);
    }
    Ok(assignment_outcome(t, genes))
}

/// Global-minimum assignment: repeatedly fix the smallest remaining
/// (gene, output) entry, ties to the lexicographically lowest pair.
pub fn assign_outputs_global_min(t: &GeneOutputTable) -> Result<EvalOutcome, EvalError> {
    check_feasible(t)?;
    let mut gene_used = vec![false; t.ng()];
    let mut output_done = vec![false; t.no()];
    let mut genes = vec![usize::MAX; t.no()];
    for _ in 0..t.no() {
        let mut best: Option<(usize, usize)> = None;
        for (i, &taken) in gene_used.iter().enumerate() {
            if taken {
                continue;
            }
            for (q, &done) in output_done.iter().enumerate() {
                if done {
                    continue;
                }
                if best.is_none_or(|(bi, bq)| t.get(i, q) < t.get(bi, bq)) {
                    best = Some((i, q));
                }
            }
        }
        let (i, q) = best.expect("feasibility was checked");
        gene_used[i] = true;
        output_done[q] = true;
        genes[q] = i;
    }
    Ok(assignment_outcome(t, genes))
}

/// Exact minimum-total assignment by exhaustive search. Limited to
/// `NG <= 10` and `NO <= 5`; intended as a reference for the heuristics.
pub fn assign_outputs_bruteforce(t: &GeneOutputTable) -> Result<EvalOutcome, EvalError> {
    check_feasible(t)?;
    if t.ng() > 10 || t.no() > 5 {
        return Err(EvalError::AssignmentTooLarge {
            genes: t.ng(),
            outputs: t.no(),
        });
    }
    fn recurse(
        t: &GeneOutputTable,
        q: usize,
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        total: f64,
        best_total: &mut f64,
        best_genes: &mut Vec<usize>,
    ) {
        if q == t.no() {
            if total < *best_total {
                *best_total = total;
                *best_genes = current.clone();
            }
            return;
        }
        for i in 0..t.ng() {
            if used[i] {
                continue;
            }
            used[i] = true;
            current.push(i);
            recurse(t, q + 1, used, current, total + t.get(i, q), best_total, best_genes);
            current.pop();
            used[i] = false;
        }
    }
    let mut best_total = f64::INFINITY;
    let mut best_genes = Vec::new();
    recurse(
        t,
        0,
        &mut vec![false; t.ng()],
        &mut Vec::new(),
        0.0,
        &mut best_total,
        &mut best_genes,
    );
    Ok(assignment_outcome(t, best_genes))
}

/// One pass over the dataset computing the gene-output table without
/// storing the matrix and without mutating anything; divisions are
/// protected and counted in `absorbed`.
fn streaming_table(
    ind: &Individual,
    prims: &Primitives,
    ds: &Dataset,
    absorbed: &mut usize,
) -> GeneOutputTable {
    let main = ind.main();
    let ng = main.len();
    let no = ds.no();
    let mut f = vec![0.0; ng * no];
    let mut col = vec![0.0; ng];
    let mut argv: Vec<f64> = Vec::new();
    for case in ds.cases() {
        for i in 0..ng {
            col[i] = match main.gene(i) {
                Gene::Terminal(v) => case.inputs()[*v],
                Gene::Call { function, args } => {
                    argv.clear();
                    argv.extend(args.iter().map(|&a| col[a]));
                    match prims.main().function(*function).op() {
                        FunctionOp::AdfCall(x) => {
                            adf_value_protected(&ind.adfs()[x], prims.adf(x), &argv, absorbed)
                        }
                        op => match apply_op(op, &argv) {
                            Ok(v) => v,
                            Err(DivisionByZero) => {
                                *absorbed += 1;
                                argv[0]
                            }
                        },
                    }
                }
            };
        }
        for i in 0..ng {
            for q in 0..no {
                f[i * no + q] += case_error(ds.mode(), col[i], case.targets()[q]);
            }
        }
    }
    for v in &mut f {
        *v = clamp_total(*v);
    }
    GeneOutputTable { ng, no, f }
}

fn outcome_from_table(t: &GeneOutputTable) -> Result<EvalOutcome, EvalError> {
    if t.no() == 1 {
        let mut best = 0;
        let mut best_fitness = t.get(0, 0);
        for i in 1..t.ng() {
            if t.get(i, 0) < best_fitness {
                best_fitness = t.get(i, 0);
                best = i;
            }
        }
        Ok(EvalOutcome {
            fitness: best_fitness,
            best_genes: vec![best],
            repaired: false,
            exception_count: 0,
        })
    } else {
        assign_outputs_greedy(t)
    }
}

/// Scores one individual end to end.
///
/// Single-output fitness is the best expression fitness over all genes;
/// multi-output fitness is the greedy injective assignment total.
/// Exhaustive-best ADF representatives are resolved first by trying every
/// gene under protected evaluation. The final pass honors `policy`:
/// mutate-gene may repair the individual in place (via the evaluation
/// matrix), protected never mutates and streams case by case. When no
/// function in the vocabulary can raise, the streaming path is always used;
/// it produces bit-identical fitness to the matrix path.
pub fn evaluate_individual(
    ind: &mut Individual,
    prims: &Primitives,
    ds: &Dataset,
    policy: ExceptionPolicy,
    rng: &mut Rng,
) -> Result<EvalOutcome, EvalError> {
    if ind.main().len() < ds.no() {
        return Err(EvalError::InfeasibleAssignment {
            genes: ind.main().len(),
            outputs: ds.no(),
        });
    }

    use crate::adf::RepresentativePolicy;
    for k in 0..ind.adfs().len() {
        if ind.adfs()[k].policy() != RepresentativePolicy::ExhaustiveBest {
            continue;
        }
        let len = ind.adfs()[k].chromosome().len();
        let mut best_r = 0;
        let mut best_f = f64::INFINITY;
        for r in 0..len {
            ind.parts_mut().1[k].set_representative(r);
            let mut absorbed = 0;
            let table = streaming_table(ind, prims, ds, &mut absorbed);
            let f = outcome_from_table(&table)?.fitness;
            if f < best_f {
                best_f = f;
                best_r = r;
            }
        }
        ind.parts_mut().1[k].set_representative(best_r);
    }

    match policy {
        ExceptionPolicy::MutateGene if prims.may_raise() => {
            let m = evaluate_matrix(ind, prims, ds, policy, rng);
            let t = gene_output_fitness(&m, ds);
            let mut outcome = outcome_from_table(&t)?;
            outcome.repaired = m.repaired();
            outcome.exception_count = m.exception_count();
            Ok(outcome)
        }
        _ => {
            let mut absorbed = 0;
            let t = streaming_table(ind, prims, ds, &mut absorbed);
            let mut outcome = outcome_from_table(&t)?;
            outcome.exception_count = absorbed;
            Ok(outcome)
        }
    }
}
