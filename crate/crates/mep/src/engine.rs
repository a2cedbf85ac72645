//! Steady-state evolutionary search.
//!
//! Every generation runs `population_size / 2` breeding events: two parents
//! are picked by tournament, recombined with the configured probability
//! (otherwise cloned), mutated per symbol, and evaluated. The better
//! offspring then replaces the current worst individual, but only when it
//! is strictly better, so the population's best fitness never regresses.
//!
//! All randomness comes from one master generator seeded by the
//! configuration. Each fitness evaluation gets its own generator split off
//! the master, which keeps the breeding stream independent of how many
//! random draws exception repair consumes inside an evaluation. Identical
//! configurations therefore replay identical runs, record for record.

use crate::adf::{
    crossover_individuals, mutate_individual, AdfConfig, AdfSignature, Individual, Primitives,
};
use crate::chromosome::{arithmetic_functions, ChromosomeError, FunctionSymbol, SymbolPolicy};
use crate::evaluator::{evaluate_individual, Dataset, EvalError, EvalOutcome, ExceptionPolicy};
use crate::operators::{CrossoverKind, OperatorConfig, OperatorError};
use crate::rng::Rng;
use thiserror::Error;

/// An individual together with its most recent evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredIndividual {
    pub individual: Individual,
    pub outcome: EvalOutcome,
}

/// Everything a run needs besides the dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    /// Number of individuals; must be even and at least 2.
    pub population_size: usize,
    /// Generations to run after initialization; 0 scores only the initial
    /// population.
    pub max_generations: usize,
    /// Genes per main chromosome.
    pub chromosome_length: usize,
    /// Individuals drawn (with replacement) per tournament.
    pub tournament_size: usize,
    pub operators: OperatorConfig,
    pub seed: u64,
    pub exception_policy: ExceptionPolicy,
    pub symbol_policy: SymbolPolicy,
    /// Builtin function vocabulary; ADF-call symbols are derived from
    /// `adfs`, never listed here.
    pub functions: Vec<FunctionSymbol>,
    pub adfs: Vec<AdfConfig>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            population_size: 100,
            max_generations: 100,
            chromosome_length: 16,
            tournament_size: 2,
            operators: OperatorConfig::default(),
            seed: 0,
            exception_policy: ExceptionPolicy::default(),
            symbol_policy: SymbolPolicy::default(),
            functions: arithmetic_functions(),
            adfs: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("invalid configuration: {field}: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

fn config_error(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field,
        message: message.into(),
    }
}

impl EngineConfig {
    /// Checks the configuration against itself and the dataset shape.
    pub fn validate(&self, dataset: &Dataset) -> Result<(), ConfigError> {
        if self.population_size < 2 {
            return Err(config_error("population_size", "must be at least 2"));
        }
        if !self.population_size.is_multiple_of(2) {
            return Err(config_error("population_size", "must be even"));
        }
        if self.tournament_size < 2 {
            return Err(config_error("tournament_size", "must be at least 2"));
        }
        if self.chromosome_length == 0 {
            return Err(config_error("chromosome_length", "must be at least 1"));
        }
        if self.chromosome_length < dataset.no() {
            return Err(config_error(
                "chromosome_length",
                format!(
                    "must be at least the number of outputs ({})",
                    dataset.no()
                ),
            ));
        }
        self.operators
            .validate()
            .map_err(|e| config_error("operators", e.to_string()))?;
        if self.functions.is_empty() {
            return Err(config_error("functions", "need at least one function symbol"));
        }
        if self.functions.iter().any(|f| f.adf_index().is_some()) {
            return Err(config_error(
                "functions",
                "ADF-call symbols are derived from `adfs` and cannot be listed",
            ));
        }
        for (k, adf) in self.adfs.iter().enumerate() {
            if adf.param_count == 0 {
                return Err(config_error(
                    "adfs",
                    format!("ADF {k} needs at least one parameter"),
                ));
            }
            if adf.length == 0 {
                return Err(config_error("adfs", format!("ADF {k} needs at least one gene")));
            }
        }
        if self.operators.crossover_kind == CrossoverKind::TwoPoint {
            if self.chromosome_length < 3 {
                return Err(config_error(
                    "chromosome_length",
                    "two-point crossover needs at least 3 genes",
                ));
            }
            if let Some(k) = self.adfs.iter().position(|a| a.length < 3) {
                return Err(config_error(
                    "adfs",
                    format!("two-point crossover needs at least 3 genes in ADF {k}"),
                ));
            }
        }
        Ok(())
    }

    fn signatures(&self) -> Vec<AdfSignature> {
        self.adfs
            .iter()
            .map(|a| AdfSignature {
                param_count: a.param_count,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Chromosome(#[from] ChromosomeError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Per-generation summary. Generation 0 describes the freshly initialized
/// population.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Exceptions raised while evaluating this generation's new
    /// individuals (the whole population for generation 0, the offspring
    /// afterwards).
    pub exception_count: usize,
    /// Output-to-gene mapping of the generation's best individual.
    pub best_genes: Vec<usize>,
}

/// The full per-generation history of one run.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RunStats {
    pub records: Vec<GenerationRecord>,
}

impl RunStats {
    pub fn records(&self) -> &[GenerationRecord] {
        &self.records
    }

    /// Generations actually run (excluding the initial population).
    pub fn generations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_best_fitness(&self) -> f64 {
        self.records.last().map_or(f64::MAX, |r| r.best_fitness)
    }

    pub fn solved(&self) -> bool {
        self.final_best_fitness() == 0.0
    }
}

/// Result of a completed run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub best: Individual,
    pub best_outcome: EvalOutcome,
    pub stats: RunStats,
    /// The vocabulary the run evolved over; needed to print or re-evaluate
    /// `best`.
    pub primitives: Primitives,
}

/// Tournament selection with replacement: the earliest-drawn individual
/// among the strictly fittest sampled wins.
pub(crate) fn select(population: &[ScoredIndividual], tournament_size: usize, rng: &mut Rng) -> usize {
    let mut winner = rng.below(population.len());
    for _ in 1..tournament_size {
        let challenger = rng.below(population.len());
        if population[challenger].outcome.fitness < population[winner].outcome.fitness {
            winner = challenger;
        }
    }
    winner
}

/// A search in progress: an evaluated population plus the history so far.
///
/// [`run`] drives an `Engine` to completion; stepping manually gives access
/// to the population between generations.
pub struct Engine {
    config: EngineConfig,
    dataset: Dataset,
    primitives: Primitives,
    rng: Rng,
    population: Vec<ScoredIndividual>,
    records: Vec<GenerationRecord>,
}

impl Engine {
    /// Validates the configuration, then creates and scores the initial
    /// random population (recorded as generation 0).
    pub fn new(config: EngineConfig, dataset: Dataset) -> Result<Self, EngineError> {
        config.validate(&dataset)?;
        let primitives = Primitives::new(
            dataset.ni(),
            config.functions.clone(),
            config.symbol_policy,
            &config.signatures(),
        )?;
        let mut rng = Rng::new(config.seed);
        let mut population = Vec::with_capacity(config.population_size);
        let mut exceptions = 0;
        for _ in 0..config.population_size {
            let mut individual =
                Individual::random(&primitives, config.chromosome_length, &config.adfs, &mut rng)?;
            let mut eval_rng = rng.split();
            let outcome = evaluate_individual(
                &mut individual,
                &primitives,
                &dataset,
                config.exception_policy,
                &mut eval_rng,
            )?;
            exceptions += outcome.exception_count;
            population.push(ScoredIndividual {
                individual,
                outcome,
            });
        }
        let mut engine = Engine {
            config,
            dataset,
            primitives,
            rng,
            population,
            records: Vec::new(),
        };
        engine.record(0, exceptions);
        Ok(engine)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn primitives(&self) -> &Primitives {
        &self.primitives
    }

    pub fn population(&self) -> &[ScoredIndividual] {
        &self.population
    }

    pub fn records(&self) -> &[GenerationRecord] {
        &self.records
    }

    /// Generations run so far.
    pub fn generation(&self) -> usize {
        self.records.len() - 1
    }

    /// The fittest individual (lowest index on ties).
    pub fn best(&self) -> &ScoredIndividual {
        let mut best = 0;
        for i in 1..self.population.len() {
            if self.population[i].outcome.fitness < self.population[best].outcome.fitness {
                best = i;
            }
        }
        &self.population[best]
    }

    pub fn solved(&self) -> bool {
        self.best().outcome.fitness == 0.0
    }

    fn record(&mut self, generation: usize, exceptions: usize) {
        let best = self.best();
        let best_fitness = best.outcome.fitness;
        let best_genes = best.outcome.best_genes.clone();
        let mean_fitness = self
            .population
            .iter()
            .map(|s| s.outcome.fitness)
            .sum::<f64>()
            / self.population.len() as f64;
        self.records.push(GenerationRecord {
            generation,
            best_fitness,
            mean_fitness,
            exception_count: exceptions,
            best_genes,
        });
    }

    /// Runs one steady-state generation and returns its record.
    pub fn step(&mut self) -> Result<&GenerationRecord, EngineError> {
        let pairs = self.population.len() / 2;
        let mut exceptions = 0;
        for _ in 0..pairs {
            let a = select(&self.population, self.config.tournament_size, &mut self.rng);
            let b = select(&self.population, self.config.tournament_size, &mut self.rng);
            let (o1, o2) = if self.rng.chance(self.config.operators.crossover_prob) {
                crossover_individuals(
                    &self.population[a].individual,
                    &self.population[b].individual,
                    &self.config.operators,
                    &mut self.rng,
                )?
            } else {
                (
                    self.population[a].individual.clone(),
                    self.population[b].individual.clone(),
                )
            };
            let mut o1 = mutate_individual(
                &o1,
                &self.primitives,
                self.config.operators.mutation_prob_per_symbol,
                &mut self.rng,
            );
            let mut o2 = mutate_individual(
                &o2,
                &self.primitives,
                self.config.operators.mutation_prob_per_symbol,
                &mut self.rng,
            );
            let mut rng1 = self.rng.split();
            let out1 = evaluate_individual(
                &mut o1,
                &self.primitives,
                &self.dataset,
                self.config.exception_policy,
                &mut rng1,
            )?;
            let mut rng2 = self.rng.split();
            let out2 = evaluate_individual(
                &mut o2,
                &self.primitives,
                &self.dataset,
                self.config.exception_policy,
                &mut rng2,
            )?;
            exceptions += out1.exception_count + out2.exception_count;
            let offspring = if out1.fitness < out2.fitness {
                ScoredIndividual {
                    individual: o1,
                    outcome: out1,
                }
            } else {
                ScoredIndividual {
                    individual: o2,
                    outcome: out2,
                }
            };
            let mut worst = 0;
            for i in 1..self.population.len() {
                if self.population[i].outcome.fitness > self.population[worst].outcome.fitness {
                    worst = i;
                }
            }
            if offspring.outcome.fitness < self.population[worst].outcome.fitness {
                self.population[worst] = offspring;
            }
        }
        let generation = self.records.len();
        self.record(generation, exceptions);
        Ok(self.records.last().expect("just recorded"))
    }

    /// Steps until `max_generations` or a perfect (zero) fitness.
    pub fn run_to_completion(&mut self) -> Result<(), EngineError> {
        while self.generation() < self.config.max_generations && !self.solved() {
            self.step()?;
        }
        Ok(())
    }

    /// Consumes the engine into its final result.
    pub fn into_output(self) -> RunOutput {
        let best = self.best().clone();
        RunOutput {
            best: best.individual,
            best_outcome: best.outcome,
            stats: RunStats {
                records: self.records,
            },
            primitives: self.primitives,
        }
    }
}

/// Runs a full search: initialize, evolve until the generation budget or a
/// perfect solution, and return the best individual with the run history.
pub fn run(config: &EngineConfig, dataset: &Dataset) -> Result<RunOutput, EngineError> {
    let mut engine = Engine::new(config.clone(), dataset.clone())?;
    engine.run_to_completion()?;
    Ok(engine.into_output())
}
