//! Automatically defined functions.
//!
//! An individual owns a main chromosome plus zero or more ADF chromosomes.
//! Each ADF is an ordinary chromosome over its own formal parameters
//! `p0, p1, ..`; the main chromosome sees each ADF as one extra function
//! symbol `ADF<k>` whose arity is the ADF's parameter count. ADF bodies use
//! builtins only, so calls can never recurse.
//!
//! The value an ADF call returns is the value of the ADF's representative
//! gene: the last gene by default, or the best-scoring gene when the
//! exhaustive-best policy is selected (resolved during evaluation).

use crate::chromosome::{
    Chromosome, ChromosomeError, FunctionSymbol, Gene, ParseError, ParseErrorKind, PrimitiveSet,
    SymbolPolicy, Violation,
};
use crate::operators::{crossover, mutate, OperatorConfig, OperatorError};
use crate::rng::Rng;

/// Call signature of an ADF.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdfSignature {
    pub param_count: usize,
}

/// How an ADF picks the gene whose value a call returns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RepresentativePolicy {
    /// The last gene is the representative.
    #[default]
    LastGene,
    /// Try every gene as representative during evaluation and keep the one
    /// with the best resulting individual fitness.
    ExhaustiveBest,
}

/// Search-time shape of one ADF.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdfConfig {
    pub param_count: usize,
    pub length: usize,
    pub representative_policy: RepresentativePolicy,
}

/// An ADF body together with its signature and representative choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdfChromosome {
    chromosome: Chromosome,
    param_count: usize,
    policy: RepresentativePolicy,
    representative: usize,
}

impl AdfChromosome {
    /// Wraps a body; the representative starts at the last gene.
    pub fn new(
        chromosome: Chromosome,
        param_count: usize,
        policy: RepresentativePolicy,
    ) -> Self {
        let representative = chromosome.len() - 1;
        AdfChromosome {
            chromosome,
            param_count,
            policy,
            representative,
        }
    }

    /// Draws a random body over a parameter vocabulary.
    pub fn random(
        ps: &PrimitiveSet,
        length: usize,
        policy: RepresentativePolicy,
        rng: &mut Rng,
    ) -> Result<Self, ChromosomeError> {
        let chromosome = Chromosome::random(ps, length, rng)?;
        Ok(AdfChromosome::new(chromosome, ps.num_terminals(), policy))
    }

    pub fn chromosome(&self) -> &Chromosome {
        &self.chromosome
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn policy(&self) -> RepresentativePolicy {
        self.policy
    }

    pub fn representative(&self) -> usize {
        self.representative
    }

    pub(crate) fn set_representative(&mut self, gene: usize) {
        debug_assert!(gene < self.chromosome.len());
        self.representative = gene;
    }

    pub(crate) fn replace_gene(&mut self, index: usize, gene: Gene) {
        self.chromosome.replace_gene(index, gene);
    }
}

/// Which structure of an individual a finding refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    Main,
    Adf(usize),
}

/// A main chromosome plus its ADFs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Individual {
    main: Chromosome,
    adfs: Vec<AdfChromosome>,
}

impl Individual {
    pub fn new(main: Chromosome, adfs: Vec<AdfChromosome>) -> Self {
        Individual { main, adfs }
    }

    /// An individual with no ADFs behaves exactly like its bare chromosome.
    pub fn from_chromosome(main: Chromosome) -> Self {
        Individual { main, adfs: Vec::new() }
    }

    /// Draws a random individual: the main chromosome over the enriched
    /// vocabulary, each ADF over its parameter vocabulary.
    pub fn random(
        prims: &Primitives,
        main_length: usize,
        adf_configs: &[AdfConfig],
        rng: &mut Rng,
    ) -> Result<Self, ChromosomeError> {
        assert_eq!(
            adf_configs.len(),
            prims.num_adfs(),
            "ADF config count must match the primitive tables"
        );
        let main = Chromosome::random(prims.main(), main_length, rng)?;
        let mut adfs = Vec::with_capacity(adf_configs.len());
        for (k, cfg) in adf_configs.iter().enumerate() {
            adfs.push(AdfChromosome::random(
                prims.adf(k),
                cfg.length,
                cfg.representative_policy,
                rng,
            )?);
        }
        Ok(Individual { main, adfs })
    }

    pub fn main(&self) -> &Chromosome {
        &self.main
    }

    pub fn adfs(&self) -> &[AdfChromosome] {
        &self.adfs
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Chromosome, &mut [AdfChromosome]) {
        (&mut self.main, &mut self.adfs)
    }

    /// Validates every structure against its vocabulary.
    pub fn validate(&self, prims: &Primitives) -> Vec<(Structure, Violation)> {
        let mut found: Vec<(Structure, Violation)> = self
            .main
            .validate(prims.main())
            .into_iter()
            .map(|v| (Structure::Main, v))
            .collect();
        for (k, adf) in self.adfs.iter().enumerate() {
            found.extend(
                adf.chromosome()
                    .validate(prims.adf(k))
                    .into_iter()
                    .map(move |v| (Structure::Adf(k), v)),
            );
        }
        found
    }

    pub fn is_valid(&self, prims: &Primitives) -> bool {
        self.validate(prims).is_empty()
    }

    /// Text form: the bare chromosome text when there are no ADFs, else
    /// `[main]` and `[adf<k> params=<n>]` sections separated by blank lines.
    pub fn to_text(&self, prims: &Primitives) -> String {
        if self.adfs.is_empty() {
            return self.main.to_text(prims.main());
        }
        let mut sections = vec![format!("[main]\n{}", self.main.to_text(prims.main()))];
        for (k, adf) in self.adfs.iter().enumerate() {
            sections.push(format!(
                "[adf{k} params={}]\n{}",
                adf.param_count(),
                adf.chromosome().to_text(prims.adf(k))
            ));
        }
        sections.join("\n\n")
    }
}

/// Symbol tables for an individual: the enriched main vocabulary plus one
/// parameter vocabulary per ADF.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Primitives {
    main: PrimitiveSet,
    adfs: Vec<PrimitiveSet>,
}

impl Primitives {
    /// Builds the tables from the builtin function list and the ADF
    /// signatures. The main set sees `builtins` plus one `ADF<k>` symbol per
    /// signature; each ADF set sees `builtins` over its own parameters.
    pub fn new(
        num_inputs: usize,
        builtins: Vec<FunctionSymbol>,
        policy: SymbolPolicy,
        signatures: &[AdfSignature],
    ) -> Result<Self, ChromosomeError> {
        if builtins.iter().any(|f| f.adf_index().is_some()) {
            return Err(ChromosomeError::AdfCallInBuiltins);
        }
        let mut main_functions = builtins.clone();
        for (k, sig) in signatures.iter().enumerate() {
            if sig.param_count == 0 {
                return Err(ChromosomeError::NoTerminals);
            }
            main_functions.push(FunctionSymbol::adf_call(k, sig.param_count));
        }
        let main = PrimitiveSet::for_inputs(num_inputs, main_functions, policy)?;
        let adfs = signatures
            .iter()
            .map(|sig| PrimitiveSet::for_params(sig.param_count, builtins.clone(), policy))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Primitives { main, adfs })
    }

    /// Tables with no ADFs.
    pub fn plain(
        num_inputs: usize,
        builtins: Vec<FunctionSymbol>,
        policy: SymbolPolicy,
    ) -> Result<Self, ChromosomeError> {
        Primitives::new(num_inputs, builtins, policy, &[])
    }

    pub fn main(&self) -> &PrimitiveSet {
        &self.main
    }

    /// # Panics
    ///
    /// Panics if `k` is out of range.
    pub fn adf(&self, k: usize) -> &PrimitiveSet {
        &self.adfs[k]
    }

    pub fn num_adfs(&self) -> usize {
        self.adfs.len()
    }

    /// True when any reachable function can raise an exception.
    pub fn may_raise(&self) -> bool {
        self.main.may_raise() || self.adfs.iter().any(|ps| ps.may_raise())
    }
}

fn signatures_match(a: &Individual, b: &Individual) -> bool {
    a.adfs.len() == b.adfs.len()
        && a.adfs.iter().zip(&b.adfs).all(|(x, y)| {
            x.param_count() == y.param_count()
                && x.chromosome().len() == y.chromosome().len()
        })
}

/// Structure-wise crossover: main recombines with main and each `ADF<k>`
/// with its counterpart, all using the configured kind. The caller decides
/// whether to recombine at all; this function always does.
pub fn crossover_individuals(
    a: &Individual,
    b: &Individual,
    config: &OperatorConfig,
    rng: &mut Rng,
) -> Result<(Individual, Individual), OperatorError> {
    if !signatures_match(a, b) {
        return Err(OperatorError::SignatureMismatch);
    }
    let (m1, m2) = crossover(&a.main, &b.main, config.crossover_kind, rng)?;
    let mut adfs1 = Vec::with_capacity(a.adfs.len());
    let mut adfs2 = Vec::with_capacity(a.adfs.len());
    for (x, y) in a.adfs.iter().zip(&b.adfs) {
        let (c1, c2) = crossover(x.chromosome(), y.chromosome(), config.crossover_kind, rng)?;
        adfs1.push(AdfChromosome::new(c1, x.param_count(), x.policy()));
        adfs2.push(AdfChromosome::new(c2, y.param_count(), y.policy()));
    }
    Ok((Individual::new(m1, adfs1), Individual::new(m2, adfs2)))
}

/// Per-symbol mutation over every structure: main first, then each ADF.
pub fn mutate_individual(
    ind: &Individual,
    prims: &Primitives,
    prob_per_symbol: f64,
    rng: &mut Rng,
) -> Individual {
    let main = mutate(&ind.main, prims.main(), prob_per_symbol, rng);
    let adfs = ind
        .adfs
        .iter()
        .enumerate()
        .map(|(k, adf)| {
            let body = mutate(adf.chromosome(), prims.adf(k), prob_per_symbol, rng);
            AdfChromosome::new(body, adf.param_count(), adf.policy())
        })
        .collect();
    Individual::new(main, adfs)
}

fn bad_structure(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        kind: ParseErrorKind::BadStructure(msg.into()),
    }
}

/// Parses the individual text form (bare chromosome or sections), deriving
/// the ADF signatures from the section headers. Returns the individual and
/// the primitive tables it was parsed against. Parsed ADFs carry the
/// last-gene representative policy.
pub fn parse_individual(
    text: &str,
    num_inputs: usize,
    builtins: Vec<FunctionSymbol>,
    policy: SymbolPolicy,
) -> Result<(Individual, Primitives), ParseError> {
    if !text.lines().any(|l| l.trim_start().starts_with('[')) {
        let prims = Primitives::plain(num_inputs, builtins, policy)
            .map_err(|e| bad_structure(1, e.to_string()))?;
        let main = Chromosome::parse_text(text, prims.main())?;
        return Ok((Individual::from_chromosome(main), prims));
    }

    struct Section<'a> {
        header: String,
        header_line: usize,
        body_lines: Vec<(usize, &'a str)>,
    }
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(inner) = trimmed.strip_prefix('[') {
            let header = inner
                .strip_suffix(']')
                .ok_or_else(|| ParseError {
                    line,
                    kind: ParseErrorKind::BadSectionHeader(trimmed.to_string()),
                })?
                .to_string();
            sections.push(Section {
                header,
                header_line: line,
                body_lines: Vec::new(),
            });
        } else {
            match sections.last_mut() {
                Some(s) => s.body_lines.push((line, raw)),
                None => return Err(bad_structure(line, "content before the [main] section")),
            }
        }
    }
    if sections.is_empty() || sections[0].header != "main" {
        return Err(bad_structure(1, "the first section must be [main]"));
    }

    let mut signatures = Vec::new();
    for (k, section) in sections[1..].iter().enumerate() {
        let bad = || ParseError {
            line: section.header_line,
            kind: ParseErrorKind::BadSectionHeader(format!("[{}]", section.header)),
        };
        let rest = section.header.strip_prefix("adf").ok_or_else(bad)?;
        let (index_part, params_part) = rest.split_once(" params=").ok_or_else(bad)?;
        let index: usize = index_part.parse().map_err(|_| bad())?;
        let param_count: usize = params_part.parse().map_err(|_| bad())?;
        if index != k {
            return Err(bad_structure(
                section.header_line,
                format!("expected section [adf{k}], found [adf{index}]"),
            ));
        }
        if param_count == 0 {
            return Err(bad_structure(
                section.header_line,
                "an ADF needs at least one parameter",
            ));
        }
        signatures.push(AdfSignature { param_count });
    }

    let prims = Primitives::new(num_inputs, builtins, policy, &signatures)
        .map_err(|e| bad_structure(1, e.to_string()))?;

    let parse_body = |section: &Section, ps: &PrimitiveSet| -> Result<Chromosome, ParseError> {
        if section.body_lines.is_empty() {
            return Err(bad_structure(section.header_line, "empty section"));
        }
        let body: Vec<&str> = section.body_lines.iter().map(|&(_, l)| l).collect();
        Chromosome::parse_text(&body.join("\n"), ps).map_err(|e| ParseError {
            line: section
                .body_lines
                .get(e.line - 1)
                .map(|&(n, _)| n)
                .unwrap_or(section.header_line),
            kind: e.kind,
        })
    };

    let main = parse_body(&sections[0], prims.main())?;
    let mut adfs = Vec::new();
    for (k, section) in sections[1..].iter().enumerate() {
        let body = parse_body(section, prims.adf(k))?;
        adfs.push(AdfChromosome::new(
            body,
            signatures[k].param_count,
            RepresentativePolicy::LastGene,
        ));
    }
    Ok((Individual::new(main, adfs), prims))
}
