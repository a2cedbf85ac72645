//! Linear chromosomes.
//!
//! A chromosome is a fixed-length sequence of genes. Gene 0 always holds a
//! terminal; every later gene holds either a terminal or a function call
//! whose argument pointers refer strictly backwards. Each gene is therefore
//! the root of one complete expression, so a chromosome of length `NG`
//! encodes `NG` candidate expressions at once.
//!
//! This module owns the primitive vocabulary ([`PrimitiveSet`]), gene and
//! chromosome construction, structural validation, symbol counting, infix
//! rendering, and the one-gene-per-line text format.

use crate::rng::Rng;
use std::fmt;
use thiserror::Error;

/// How random symbol choice weighs terminals against functions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SymbolPolicy {
    /// Every admissible symbol, terminal or function, is equally likely.
    #[default]
    PerSymbolUniform,
    /// First pick the terminal set or the function set with probability 1/2
    /// each, then a symbol uniformly inside the chosen set. Falls back to
    /// terminals when the function set is empty.
    SetBalanced,
}

/// Operation carried by a function symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FunctionOp {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Not,
    /// Call into the automatically defined function with this index.
    AdfCall(usize),
}

impl FunctionOp {
    /// True for operations rendered as infix arithmetic.
    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            FunctionOp::Add | FunctionOp::Sub | FunctionOp::Mul | FunctionOp::Div
        )
    }
}

/// A function symbol: an operation plus its arity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FunctionSymbol {
    op: FunctionOp,
    arity: usize,
}

impl FunctionSymbol {
    /// Looks up a builtin by its text-format name.
    pub fn builtin(name: &str) -> Option<FunctionSymbol> {
        let (op, arity) = match name {
            "+" => (FunctionOp::Add, 2),
            "-" => (FunctionOp::Sub, 2),
            "*" => (FunctionOp::Mul, 2),
            "/" => (FunctionOp::Div, 2),
            "and" => (FunctionOp::And, 2),
            "or" => (FunctionOp::Or, 2),
            "nand" => (FunctionOp::Nand, 2),
            "nor" => (FunctionOp::Nor, 2),
            "xor" => (FunctionOp::Xor, 2),
            "not" => (FunctionOp::Not, 1),
            _ => return None,
        };
        Some(FunctionSymbol { op, arity })
    }

    /// Symbol that calls ADF `adf_index` with `param_count` arguments.
    pub fn adf_call(adf_index: usize, param_count: usize) -> FunctionSymbol {
        FunctionSymbol {
            op: FunctionOp::AdfCall(adf_index),
            arity: param_count,
        }
    }

    pub fn op(&self) -> FunctionOp {
        self.op
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// True when applying this symbol can raise an arithmetic exception.
    pub fn may_raise(&self) -> bool {
        matches!(self.op, FunctionOp::Div)
    }

    /// Index of the called ADF, if this symbol is an ADF call.
    pub fn adf_index(&self) -> Option<usize> {
        match self.op {
            FunctionOp::AdfCall(i) => Some(i),
            _ => None,
        }
    }

    /// Text-format name.
    pub fn name(&self) -> String {
        match self.op {
            FunctionOp::Add => "+".into(),
            FunctionOp::Sub => "-".into(),
            FunctionOp::Mul => "*".into(),
            FunctionOp::Div => "/".into(),
            FunctionOp::And => "and".into(),
            FunctionOp::Or => "or".into(),
            FunctionOp::Nand => "nand".into(),
            FunctionOp::Nor => "nor".into(),
            FunctionOp::Xor => "xor".into(),
            FunctionOp::Not => "not".into(),
            FunctionOp::AdfCall(i) => format!("ADF{i}"),
        }
    }
}

/// The four arithmetic builtins `+ - * /`, the default set for regression
/// and classification runs.
pub fn arithmetic_functions() -> Vec<FunctionSymbol> {
    ["+", "-", "*", "/"]
        .iter()
        .map(|n| FunctionSymbol::builtin(n).unwrap())
        .collect()
}

/// The default boolean set for boolean runs: `and or nand nor xor`.
pub fn boolean_functions() -> Vec<FunctionSymbol> {
    ["and", "or", "nand", "nor", "xor"]
        .iter()
        .map(|n| FunctionSymbol::builtin(n).unwrap())
        .collect()
}

/// Every builtin symbol. Used when parsing solution files whose function
/// vocabulary is not known in advance.
pub fn all_builtin_functions() -> Vec<FunctionSymbol> {
    ["+", "-", "*", "/", "and", "or", "nand", "nor", "xor", "not"]
        .iter()
        .map(|n| FunctionSymbol::builtin(n).unwrap())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TerminalNaming {
    /// Problem inputs: `a..z` when there are at most 26, else `x0, x1, ..`.
    Inputs,
    /// ADF formal parameters: `p0, p1, ..`.
    Params,
}

/// The vocabulary a chromosome draws from: `num_terminals` terminals plus an
/// ordered list of function symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveSet {
    num_terminals: usize,
    functions: Vec<FunctionSymbol>,
    policy: SymbolPolicy,
    naming: TerminalNaming,
}

impl PrimitiveSet {
    /// Vocabulary over problem inputs.
    pub fn for_inputs(
        num_inputs: usize,
        functions: Vec<FunctionSymbol>,
        policy: SymbolPolicy,
    ) -> Result<Self, ChromosomeError> {
        if num_inputs == 0 {
            return Err(ChromosomeError::NoTerminals);
        }
        Ok(PrimitiveSet {
            num_terminals: num_inputs,
            functions,
            policy,
            naming: TerminalNaming::Inputs,
        })
    }

    /// Vocabulary over ADF formal parameters. ADF-call symbols are rejected
    /// so that ADF bodies can never call other ADFs.
    pub fn for_params(
        param_count: usize,
        functions: Vec<FunctionSymbol>,
        policy: SymbolPolicy,
    ) -> Result<Self, ChromosomeError> {
        if param_count == 0 {
            return Err(ChromosomeError::NoTerminals);
        }
        if functions.iter().any(|f| f.adf_index().is_some()) {
            return Err(ChromosomeError::AdfCallInParamSet);
        }
        Ok(PrimitiveSet {
            num_terminals: param_count,
            functions,
            policy,
            naming: TerminalNaming::Params,
        })
    }

    pub fn num_terminals(&self) -> usize {
        self.num_terminals
    }

    pub fn functions(&self) -> &[FunctionSymbol] {
        &self.functions
    }

    /// Function symbol by id.
    ///
    /// # Panics
    ///
    /// Panics if `id` is out of range.
    pub fn function(&self, id: usize) -> &FunctionSymbol {
        &self.functions[id]
    }

    pub fn policy(&self) -> SymbolPolicy {
        self.policy
    }

    /// Largest arity over the function set, 0 when it is empty.
    pub fn max_arity(&self) -> usize {
        self.functions.iter().map(|f| f.arity()).max().unwrap_or(0)
    }

    /// True when any function in the set can raise an exception.
    pub fn may_raise(&self) -> bool {
        self.functions.iter().any(|f| f.may_raise())
    }

    /// Canonical printed name of terminal `var`.
    pub fn terminal_name(&self, var: usize) -> String {
        match self.naming {
            TerminalNaming::Params => format!("p{var}"),
            TerminalNaming::Inputs => {
                if self.num_terminals <= 26 {
                    char::from(b'a' + var as u8).to_string()
                } else {
                    format!("x{var}")
                }
            }
        }
    }

    /// Parses a terminal token, accepting both the letter form and the
    /// indexed form for inputs.
    pub fn parse_terminal(&self, token: &str) -> Option<usize> {
        let var = match self.naming {
            TerminalNaming::Params => token.strip_prefix('p')?.parse().ok()?,
            TerminalNaming::Inputs => {
                let mut bytes = token.bytes();
                match (bytes.next(), bytes.next()) {
                    // The single-letter form wins, so a bare `x` is input
                    // 23, not a malformed indexed terminal.
                    (Some(b @ b'a'..=b'z'), None) => usize::from(b - b'a'),
                    _ => {
                        let rest = token.strip_prefix('x')?;
                        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
                            return None;
                        }
                        rest.parse().ok()?
                    }
                }
            }
        };
        (var < self.num_terminals).then_some(var)
    }

    /// Function id by text-format name.
    pub fn function_id(&self, token: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name() == token)
    }
}

/// One gene: a terminal reference or a function call over earlier genes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gene {
    /// Terminal with 0-based variable index.
    Terminal(usize),
    /// Call of `functions[function]` on the values of earlier genes.
    Call { function: usize, args: Vec<usize> },
}

/// Upper bound on the symbols a chromosome of `length` genes can hold when
/// the largest function arity is `max_arity`: one terminal symbol in gene 0
/// and `1 + max_arity` symbols in every other gene.
pub fn max_symbol_count(length: usize, max_arity: usize) -> usize {
    (max_arity + 1) * (length - 1) + 1
}

/// A structural rule a gene breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    FirstGeneNotTerminal,
    TerminalOutOfRange { var: usize },
    UnknownFunction { function: usize },
    ArityMismatch { expected: usize, got: usize },
    ForwardPointer { slot: usize, target: usize },
}

/// A validation finding: which gene broke which rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub gene: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gene {}: ", self.gene)?;
        match &self.kind {
            ViolationKind::FirstGeneNotTerminal => {
                write!(f, "the first gene must hold a terminal")
            }
            ViolationKind::TerminalOutOfRange { var } => {
                write!(f, "terminal index {var} out of range")
            }
            ViolationKind::UnknownFunction { function } => {
                write!(f, "function id {function} not in the primitive set")
            }
            ViolationKind::ArityMismatch { expected, got } => {
                write!(f, "expected {expected} arguments, got {got}")
            }
            ViolationKind::ForwardPointer { slot, target } => {
                write!(f, "argument {slot} points forward to gene {target}")
            }
        }
    }
}

/// Errors from chromosome construction and rendering.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ChromosomeError {
    #[error("chromosome length must be at least 1")]
    InvalidLength,
    #[error("a primitive set needs at least one terminal")]
    NoTerminals,
    #[error("ADF parameter sets must not contain ADF-call symbols")]
    AdfCallInParamSet,
    #[error("the builtin function list must not contain ADF-call symbols")]
    AdfCallInBuiltins,
    #[error("gene index {index} out of range for length {length}")]
    GeneIndexOutOfRange { index: usize, length: usize },
}

/// Text-format parse failure at a 1-based line.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty chromosome text")]
    Empty,
    #[error("expected `<index>: <symbol> [args]`")]
    BadLine,
    #[error("gene index {got} where {expected} was expected")]
    BadIndex { expected: usize, got: usize },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("the first gene must hold a terminal")]
    FirstGeneNotTerminal,
    #[error("argument points forward to gene {target}")]
    ForwardPointer { target: usize },
    #[error("`{symbol}` takes {expected} arguments, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("bad section header `{0}`")]
    BadSectionHeader(String),
    #[error("{0}")]
    BadStructure(String),
}

/// Draws one structurally valid gene for position `index`.
///
/// Position 0 always yields a terminal. Elsewhere the head is drawn under
/// the set's [`SymbolPolicy`]; a function head gets fresh argument pointers,
/// each uniform over `[0, index)`.
pub(crate) fn random_gene(ps: &PrimitiveSet, index: usize, rng: &mut Rng) -> Gene {
    let nt = ps.num_terminals();
    let nf = ps.functions().len();
    let pick_function = if index == 0 || nf == 0 {
        false
    } else {
        match ps.policy() {
            SymbolPolicy::PerSymbolUniform => rng.below(nt + nf) >= nt,
            SymbolPolicy::SetBalanced => rng.below(2) == 1,
        }
    };
    if pick_function {
        let function = rng.below(nf);
        let arity = ps.function(function).arity();
        let args = (0..arity).map(|_| rng.below(index)).collect();
        Gene::Call { function, args }
    } else {
        Gene::Terminal(rng.below(nt))
    }
}

/// A fixed-length sequence of genes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chromosome {
    genes: Vec<Gene>,
}

impl Chromosome {
    /// Wraps a gene vector.
    ///
    /// Structural rules are not checked here; use [`Chromosome::validate`].
    ///
    /// # Panics
    ///
    /// Panics if `genes` is empty.
    pub fn new(genes: Vec<Gene>) -> Self {
        assert!(!genes.is_empty(), "a chromosome holds at least one gene");
        Chromosome { genes }
    }

    /// Draws a random chromosome that always satisfies every structural rule.
    pub fn random(ps: &PrimitiveSet, length: usize, rng: &mut Rng) -> Result<Self, ChromosomeError> {
        if length == 0 {
            return Err(ChromosomeError::InvalidLength);
        }
        let genes = (0..length).map(|i| random_gene(ps, i, rng)).collect();
        Ok(Chromosome { genes })
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    /// # Panics
    ///
    /// Panics if `index` is out of range.
    pub fn gene(&self, index: usize) -> &Gene {
        &self.genes[index]
    }

    pub(crate) fn replace_gene(&mut self, index: usize, gene: Gene) {
        self.genes[index] = gene;
    }

    /// Checks every structural rule and returns all findings, empty when the
    /// chromosome is valid for `ps`.
    pub fn validate(&self, ps: &PrimitiveSet) -> Vec<Violation> {
        let mut found = Vec::new();
        for (i, gene) in self.genes.iter().enumerate() {
            match gene {
                Gene::Terminal(var) => {
                    if *var >= ps.num_terminals() {
                        found.push(Violation {
                            gene: i,
                            kind: ViolationKind::TerminalOutOfRange { var: *var },
                        });
                    }
                }
                Gene::Call { function, args } => {
                    if i == 0 {
                        found.push(Violation {
                            gene: i,
                            kind: ViolationKind::FirstGeneNotTerminal,
                        });
                    }
                    match ps.functions().get(*function) {
                        None => found.push(Violation {
                            gene: i,
                            kind: ViolationKind::UnknownFunction {
                                function: *function,
                            },
                        }),
                        Some(f) => {
                            if args.len() != f.arity() {
                                found.push(Violation {
                                    gene: i,
                                    kind: ViolationKind::ArityMismatch {
                                        expected: f.arity(),
                                        got: args.len(),
                                    },
                                });
                            }
                        }
                    }
                    for (slot, &target) in args.iter().enumerate() {
                        if target >= i {
                            found.push(Violation {
                                gene: i,
                                kind: ViolationKind::ForwardPointer { slot, target },
                            });
                        }
                    }
                }
            }
        }
        found
    }

    pub fn is_valid(&self, ps: &PrimitiveSet) -> bool {
        self.validate(ps).is_empty()
    }

    /// Number of symbols actually written in the genes: 1 per terminal gene,
    /// `1 + arity` per call gene.
    pub fn effective_symbol_count(&self) -> usize {
        self.genes
            .iter()
            .map(|g| match g {
                Gene::Terminal(_) => 1,
                Gene::Call { args, .. } => 1 + args.len(),
            })
            .sum()
    }

    /// Gene indices reachable from `roots` through argument pointers,
    /// ascending. This is the coding region for those roots.
    pub fn coding_genes(&self, roots: &[usize]) -> Result<Vec<usize>, ChromosomeError> {
        let mut needed = vec![false; self.genes.len()];
        let mut stack = Vec::new();
        for &r in roots {
            if r >= self.genes.len() {
                return Err(ChromosomeError::GeneIndexOutOfRange {
                    index: r,
                    length: self.genes.len(),
                });
            }
            stack.push(r);
        }
        while let Some(i) = stack.pop() {
            if needed[i] {
                continue;
            }
            needed[i] = true;
            if let Gene::Call { args, .. } = &self.genes[i] {
                stack.extend(args.iter().copied());
            }
        }
        Ok((0..self.genes.len()).filter(|&i| needed[i]).collect())
    }

    /// Infix text of the expression rooted at gene `index`.
    ///
    /// Arithmetic calls render as `lhs op rhs` with call operands
    /// parenthesized; other functions render in call style `name(..)`.
    /// The top level carries no outer parentheses.
    pub fn expression_text(
        &self,
        index: usize,
        ps: &PrimitiveSet,
    ) -> Result<String, ChromosomeError> {
        if index >= self.genes.len() {
            return Err(ChromosomeError::GeneIndexOutOfRange {
                index,
                length: self.genes.len(),
            });
        }
        let mut texts: Vec<String> = Vec::with_capacity(index + 1);
        for i in 0..=index {
            let text = match &self.genes[i] {
                Gene::Terminal(var) => ps.terminal_name(*var),
                Gene::Call { function, args } => {
                    let sym = ps.function(*function);
                    if sym.op().is_arithmetic() {
                        let operand = |a: usize| match &self.genes[a] {
                            Gene::Terminal(_) => texts[a].clone(),
                            Gene::Call { .. } => format!("({})", texts[a]),
                        };
                        format!("{}{}{}", operand(args[0]), sym.name(), operand(args[1]))
                    } else {
                        let inner: Vec<&str> = args.iter().map(|&a| texts[a].as_str()).collect();
                        format!("{}({})", sym.name(), inner.join(","))
                    }
                }
            };
            texts.push(text);
        }
        Ok(texts.pop().unwrap())
    }

    /// One-gene-per-line text form: `<index>: <terminal>` or
    /// `<index>: <function> <arg0>, <arg1>, ..`. No trailing newline.
    pub fn to_text(&self, ps: &PrimitiveSet) -> String {
        let lines: Vec<String> = self
            .genes
            .iter()
            .enumerate()
            .map(|(i, gene)| match gene {
                Gene::Terminal(var) => format!("{i}: {}", ps.terminal_name(*var)),
                Gene::Call { function, args } => {
                    let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                    format!("{i}: {} {}", ps.function(*function).name(), args.join(", "))
                }
            })
            .collect();
        lines.join("\n")
    }

    /// Parses the text form, enforcing every structural rule.
    pub fn parse_text(text: &str, ps: &PrimitiveSet) -> Result<Self, ParseError> {
        let mut genes: Vec<Gene> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let err = |kind| ParseError { line, kind };
            let raw = raw.trim();
            if raw.is_empty() {
                return Err(err(ParseErrorKind::BadLine));
            }
            let (idx_part, rest) = raw.split_once(':').ok_or(err(ParseErrorKind::BadLine))?;
            let got: usize = idx_part
                .trim()
                .parse()
                .map_err(|_| err(ParseErrorKind::BadLine))?;
            if got != genes.len() {
                return Err(err(ParseErrorKind::BadIndex {
                    expected: genes.len(),
                    got,
                }));
            }
            let rest = rest.trim();
            let (symbol, tail) = match rest.split_once(char::is_whitespace) {
                Some((s, t)) => (s, t.trim()),
                None => (rest, ""),
            };
            if symbol.is_empty() {
                return Err(err(ParseErrorKind::BadLine));
            }
            if let Some(var) = ps.parse_terminal(symbol) {
                if !tail.is_empty() {
                    return Err(err(ParseErrorKind::BadLine));
                }
                genes.push(Gene::Terminal(var));
            } else if let Some(function) = ps.function_id(symbol) {
                if genes.is_empty() {
                    return Err(err(ParseErrorKind::FirstGeneNotTerminal));
                }
                let expected = ps.function(function).arity();
                let mut args = Vec::with_capacity(expected);
                if !tail.is_empty() {
                    for piece in tail.split(',') {
                        let target: usize = piece
                            .trim()
                            .parse()
                            .map_err(|_| err(ParseErrorKind::BadLine))?;
                        args.push(target);
                    }
                }
                if args.len() != expected {
                    return Err(err(ParseErrorKind::ArityMismatch {
                        symbol: symbol.to_string(),
                        expected,
                        got: args.len(),
                    }));
                }
                let here = genes.len();
                if let Some(&target) = args.iter().find(|&&t| t >= here) {
                    return Err(err(ParseErrorKind::ForwardPointer { target }));
                }
                genes.push(Gene::Call { function, args });
            } else {
                return Err(err(ParseErrorKind::UnknownSymbol(symbol.to_string())));
            }
        }
        if genes.is_empty() {
            return Err(ParseError {
                line: 1,
                kind: ParseErrorKind::Empty,
            });
        }
        Ok(Chromosome { genes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{arith_inputs, worked_example};

    /// Repeated squaring of `a`: gene 3 computes a^8.
    fn power_chain() -> Chromosome {
        Chromosome::new(vec![
            Gene::Terminal(0),
            Gene::Call { function: 2, args: vec![0, 0] },
            Gene::Call { function: 2, args: vec![1, 1] },
            Gene::Call { function: 2, args: vec![2, 2] },
        ])
    }

    #[test]
    fn worked_example_is_valid() {
        assert!(worked_example().is_valid(&arith_inputs(4)));
    }

    #[test]
    fn first_gene_call_is_flagged() {
        let c = Chromosome::new(vec![
            Gene::Call { function: 0, args: vec![0, 0] },
            Gene::Terminal(0),
        ]);
        let v = c.validate(&arith_inputs(2));
        assert!(v.iter().any(|v| v.gene == 0
            && matches!(v.kind, ViolationKind::FirstGeneNotTerminal)));
        assert!(v.iter().any(|v| v.gene == 0
            && matches!(v.kind, ViolationKind::ForwardPointer { .. })));
    }

    #[test]
    fn forward_pointer_is_flagged() {
        let c = Chromosome::new(vec![
            Gene::Terminal(0),
            Gene::Terminal(1),
            Gene::Call { function: 0, args: vec![1, 5] },
        ]);
        let v = c.validate(&arith_inputs(2));
        assert_eq!(
            v,
            vec![Violation {
                gene: 2,
                kind: ViolationKind::ForwardPointer { slot: 1, target: 5 },
            }]
        );
    }

    #[test]
    fn terminal_and_arity_violations_are_flagged() {
        let c = Chromosome::new(vec![
            Gene::Terminal(9),
            Gene::Call { function: 0, args: vec![0] },
            Gene::Call { function: 7, args: vec![0, 1] },
        ]);
        let v = c.validate(&arith_inputs(3));
        assert!(v.contains(&Violation {
            gene: 0,
            kind: ViolationKind::TerminalOutOfRange { var: 9 },
        }));
        assert!(v.contains(&Violation {
            gene: 1,
            kind: ViolationKind::ArityMismatch { expected: 2, got: 1 },
        }));
        assert!(v.contains(&Violation {
            gene: 2,
            kind: ViolationKind::UnknownFunction { function: 7 },
        }));
    }

    #[test]
    fn random_single_gene_is_terminal() {
        let ps = arith_inputs(3);
        for seed in 0..200 {
            let mut rng = Rng::new(seed);
            let c = Chromosome::random(&ps, 1, &mut rng).unwrap();
            assert!(matches!(c.gene(0), Gene::Terminal(_)));
        }
    }

    #[test]
    fn random_with_no_functions_is_all_terminals() {
        let ps = PrimitiveSet::for_inputs(3, vec![], SymbolPolicy::SetBalanced).unwrap();
        let mut rng = Rng::new(1);
        let c = Chromosome::random(&ps, 5, &mut rng).unwrap();
        assert!(c.genes().iter().all(|g| matches!(g, Gene::Terminal(_))));
        assert!(c.is_valid(&ps));
    }

    #[test]
    fn random_zero_length_is_rejected() {
        let mut rng = Rng::new(1);
        assert_eq!(
            Chromosome::random(&arith_inputs(2), 0, &mut rng),
            Err(ChromosomeError::InvalidLength)
        );
    }

    #[test]
    fn max_symbol_count_matches_formula() {
        assert_eq!(max_symbol_count(8, 2), 22);
        assert_eq!(max_symbol_count(21, 2), 61);
        for n in 1..6 {
            assert_eq!(max_symbol_count(1, n), 1);
        }
        assert_eq!(max_symbol_count(5, 0), 5);
    }

    #[test]
    fn effective_symbols_count_heads_and_pointers() {
        assert_eq!(power_chain().effective_symbol_count(), 10);
        assert_eq!(worked_example().effective_symbol_count(), 16);
        let all_terminals = Chromosome::new(vec![Gene::Terminal(0); 5]);
        assert_eq!(all_terminals.effective_symbol_count(), 5);
    }

    #[test]
    fn expression_text_renders_infix() {
        let ps = arith_inputs(4);
        let c = worked_example();
        assert_eq!(c.expression_text(0, &ps).unwrap(), "a");
        assert_eq!(c.expression_text(2, &ps).unwrap(), "a+b");
        assert_eq!(c.expression_text(6, &ps).unwrap(), "(a+b)*d");
        assert_eq!(c.expression_text(7, &ps).unwrap(), "b+(c+d)");
        assert_eq!(
            c.expression_text(9, &ps),
            Err(ChromosomeError::GeneIndexOutOfRange { index: 9, length: 8 })
        );
    }

    #[test]
    fn expression_text_renders_boolean_calls() {
        let ps = PrimitiveSet::for_inputs(2, boolean_functions(), SymbolPolicy::default()).unwrap();
        let c = Chromosome::new(vec![
            Gene::Terminal(0),
            Gene::Terminal(1),
            Gene::Call { function: 4, args: vec![0, 1] },
            Gene::Call { function: 0, args: vec![2, 0] },
        ]);
        assert_eq!(c.expression_text(3, &ps).unwrap(), "and(xor(a,b),a)");
    }

    #[test]
    fn coding_genes_collects_reachable_indices() {
        let c = worked_example();
        assert_eq!(c.coding_genes(&[6]).unwrap(), vec![0, 1, 2, 4, 6]);
        assert_eq!(c.coding_genes(&[0]).unwrap(), vec![0]);
        assert_eq!(c.coding_genes(&[6, 7]).unwrap(), vec![0, 1, 2, 3, 4, 5, 6, 7]);
        assert!(c.coding_genes(&[8]).is_err());
    }

    #[test]
    fn to_text_matches_line_format() {
        let ps = arith_inputs(1);
        assert_eq!(
            power_chain().to_text(&ps),
            "0: a\n1: * 0, 0\n2: * 1, 1\n3: * 2, 2"
        );
    }

    #[test]
    fn parse_roundtrips_the_text_format() {
        let ps = arith_inputs(4);
        let c = worked_example();
        let parsed = Chromosome::parse_text(&c.to_text(&ps), &ps).unwrap();
        assert_eq!(parsed, c);
    }

    #[test]
    fn parse_accepts_indexed_terminal_names() {
        let ps = arith_inputs(4);
        let c = Chromosome::parse_text("0: x3\n1: + 0, 0", &ps).unwrap();
        assert_eq!(c.gene(0), &Gene::Terminal(3));
    }

    #[test]
    fn letter_x_terminal_round_trips() {
        // Input 23 renders as the letter `x` in narrow sets; the parser
        // must read it back as the letter, not a malformed x-index.
        let ps = arith_inputs(26);
        let c = Chromosome::new(vec![Gene::Terminal(23)]);
        let text = c.to_text(&ps);
        assert_eq!(text, "0: x");
        assert_eq!(Chromosome::parse_text(&text, &ps).unwrap(), c);
        assert_eq!(ps.parse_terminal("x"), Some(23));
        assert_eq!(ps.parse_terminal("x23"), Some(23));
    }

    #[test]
    fn parse_rejects_function_in_first_gene() {
        let ps = arith_inputs(2);
        let e = Chromosome::parse_text("0: + 0, 0", &ps).unwrap_err();
        assert_eq!(e.line, 1);
        assert_eq!(e.kind, ParseErrorKind::FirstGeneNotTerminal);
    }

    #[test]
    fn parse_rejects_unknown_symbol_with_line_number() {
        let ps = arith_inputs(2);
        let e = Chromosome::parse_text("0: a\n1: q 0, 0", &ps).unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.kind, ParseErrorKind::UnknownSymbol("q".into()));
        let e = Chromosome::parse_text("0: z", &ps).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownSymbol("z".into()));
    }

    #[test]
    fn parse_rejects_forward_pointer() {
        let ps = arith_inputs(2);
        let e = Chromosome::parse_text("0: a\n1: + 0, 4", &ps).unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.kind, ParseErrorKind::ForwardPointer { target: 4 });
    }

    #[test]
    fn parse_rejects_bad_gene_index() {
        let ps = arith_inputs(2);
        let e = Chromosome::parse_text("0: a\n3: b", &ps).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::BadIndex { expected: 1, got: 3 });
    }

    #[test]
    fn parse_rejects_arity_mismatch() {
        let ps = arith_inputs(2);
        let e = Chromosome::parse_text("0: a\n1: + 0", &ps).unwrap_err();
        assert_eq!(
            e.kind,
            ParseErrorKind::ArityMismatch { symbol: "+".into(), expected: 2, got: 1 }
        );
    }

    #[test]
    fn parse_rejects_empty_text() {
        let ps = arith_inputs(2);
        let e = Chromosome::parse_text("", &ps).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Empty);
    }

    #[test]
    fn wide_input_sets_roundtrip_with_indexed_names() {
        let ps = PrimitiveSet::for_inputs(30, arithmetic_functions(), SymbolPolicy::default())
            .unwrap();
        let c = Chromosome::new(vec![
            Gene::Terminal(27),
            Gene::Call { function: 1, args: vec![0, 0] },
        ]);
        let text = c.to_text(&ps);
        assert_eq!(text, "0: x27\n1: - 0, 0");
        assert_eq!(Chromosome::parse_text(&text, &ps).unwrap(), c);
    }

    #[test]
    fn param_sets_name_and_parse_params() {
        let ps = PrimitiveSet::for_params(3, arithmetic_functions(), SymbolPolicy::default())
            .unwrap();
        assert_eq!(ps.terminal_name(2), "p2");
        assert_eq!(ps.parse_terminal("p2"), Some(2));
        assert_eq!(ps.parse_terminal("p3"), None);
        assert_eq!(ps.parse_terminal("a"), None);
    }

    #[test]
    fn param_sets_reject_adf_calls() {
        let mut fns = arithmetic_functions();
        fns.push(FunctionSymbol::adf_call(0, 2));
        assert_eq!(
            PrimitiveSet::for_params(2, fns, SymbolPolicy::default()).unwrap_err(),
            ChromosomeError::AdfCallInParamSet
        );
    }

    #[test]
    fn empty_terminal_sets_are_rejected() {
        assert_eq!(
            PrimitiveSet::for_inputs(0, vec![], SymbolPolicy::default()).unwrap_err(),
            ChromosomeError::NoTerminals
        );
    }
}
