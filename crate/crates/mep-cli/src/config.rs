//! The JSON run-configuration schema.
//!
//! Parsing is strict: unknown keys anywhere in the document are errors, so
//! typos in experiment configs fail fast instead of silently falling back
//! to defaults. Every field that can default is optional; the defaults are
//! spelled out in the `Default` impls below and in the README.

use anyhow::{anyhow, bail, Context, Result};
use mep::problems::{GeneratorSpec, ProblemSource, ProblemSpec};
use mep::{AdfConfig, CrossoverKind, EngineConfig, ExceptionPolicy, Mode, SymbolPolicy};
use serde::Deserialize;
use std::collections::hash_map::RandomState;
use std::hash::{BuildHasher, Hasher};
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub problem: ProblemSection,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// Scoring mode: "regression", "classification", or "boolean".
    pub mode: String,
    /// CSV-backed problem; exactly one of `csv` and `generator` must be set.
    #[serde(default)]
    pub csv: Option<CsvSection>,
    /// Generator-backed problem.
    #[serde(default)]
    pub generator: Option<GeneratorSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSection {
    /// Dataset path, resolved against the config file's directory.
    pub path: PathBuf,
    pub ni: usize,
    pub no: usize,
    #[serde(default)]
    pub has_header: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    /// "even_parity", "full_adder", "multiplier", or "polynomial".
    pub name: String,
    #[serde(default)]
    pub bits: Option<usize>,
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default)]
    pub domain: Option<(f64, f64)>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineSection {
    pub population_size: usize,
    pub max_generations: usize,
    pub chromosome_length: usize,
    pub tournament_size: usize,
    /// "one_point", "two_point", or "uniform".
    pub crossover: String,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// A number, or the string "random" to draw one (the drawn seed is
    /// printed on the seed= line).
    pub seed: SeedSetting,
    /// "mutate_gene" or "protected".
    pub exception_policy: String,
    /// "per_symbol_uniform" or "set_balanced".
    pub symbol_policy: String,
    /// Builtin function names, e.g. ["+", "-", "*", "/"] or
    /// ["and", "or", "nand", "nor", "xor"].
    pub functions: Vec<String>,
    pub adfs: Vec<AdfSection>,
}

impl Default for EngineSection {
    fn default() -> Self {
        EngineSection {
            population_size: 100,
            max_generations: 100,
            chromosome_length: 16,
            tournament_size: 2,
            crossover: "one_point".to_string(),
            crossover_prob: 0.9,
            mutation_prob: 0.02,
            seed: SeedSetting::Fixed(0),
            exception_policy: "mutate_gene".to_string(),
            symbol_policy: "per_symbol_uniform".to_string(),
            functions: vec!["+", "-", "*", "/"].into_iter().map(String::from).collect(),
            adfs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeedSetting {
    Fixed(u64),
    Named(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdfSection {
    pub params: usize,
    pub length: usize,
    /// "last_gene" (default) or "exhaustive_best".
    #[serde(default)]
    pub representative: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Best-individual text file, resolved against the config directory.
    pub solution: PathBuf,
    /// Run summary JSON, resolved against the config directory.
    pub summary: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            solution: PathBuf::from("solution.txt"),
            summary: PathBuf::from("summary.json"),
        }
    }
}

/// A parsed configuration converted to engine inputs.
#[derive(Debug)]
pub struct ResolvedConfig {
    pub problem: ProblemSpec,
    pub engine: EngineConfig,
    pub solution_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Draws a process-unique seed without touching the wall clock.
fn draw_seed() -> u64 {
    RandomState::new().build_hasher().finish()
}

pub fn parse_mode(text: &str) -> Result<Mode> {
    text.parse::<Mode>().map_err(|e| anyhow!(e))
}

fn parse_crossover(text: &str) -> Result<CrossoverKind> {
    match text {
        "one_point" => Ok(CrossoverKind::OnePoint),
        "two_point" => Ok(CrossoverKind::TwoPoint),
        "uniform" => Ok(CrossoverKind::Uniform),
        other => bail!("unknown crossover `{other}`; expected one_point, two_point, or uniform"),
    }
}

fn parse_exception_policy(text: &str) -> Result<ExceptionPolicy> {
    match text {
        "mutate_gene" => Ok(ExceptionPolicy::MutateGene),
        "protected" => Ok(ExceptionPolicy::Protected),
        other => bail!("unknown exception_policy `{other}`; expected mutate_gene or protected"),
    }
}

fn parse_symbol_policy(text: &str) -> Result<SymbolPolicy> {
    match text {
        "per_symbol_uniform" => Ok(SymbolPolicy::PerSymbolUniform),
        "set_balanced" => Ok(SymbolPolicy::SetBalanced),
        other => {
            bail!("unknown symbol_policy `{other}`; expected per_symbol_uniform or set_balanced")
        }
    }
}

fn parse_representative(text: Option<&str>) -> Result<mep::RepresentativePolicy> {
    match text {
        None | Some("last_gene") => Ok(mep::RepresentativePolicy::LastGene),
        Some("exhaustive_best") => Ok(mep::RepresentativePolicy::ExhaustiveBest),
        Some(other) => {
            bail!("unknown representative `{other}`; expected last_gene or exhaustive_best")
        }
    }
}

pub fn parse_functions(names: &[String]) -> Result<Vec<mep::FunctionSymbol>> {
    if names.is_empty() {
        bail!("functions must not be empty");
    }
    names
        .iter()
        .map(|name| {
            mep::FunctionSymbol::builtin(name)
                .ok_or_else(|| anyhow!("unknown function `{name}`"))
        })
        .collect()
}

/// Builds a generator spec from the loose name/parameter form shared by the
/// config file and the `gen` subcommand.
pub fn build_generator(
    name: &str,
    bits: Option<usize>,
    coefficients: Option<Vec<f64>>,
    domain: Option<(f64, f64)>,
    samples: Option<usize>,
    seed: Option<u64>,
) -> Result<GeneratorSpec> {
    let no_extras = |gen: &str, used_bits: bool| -> Result<()> {
        if !used_bits && bits.is_some() {
            bail!("{gen} takes no `bits` parameter");
        }
        if gen != "polynomial"
            && (coefficients.is_some() || domain.is_some() || samples.is_some() || seed.is_some())
        {
            bail!("{gen} takes no polynomial parameters");
        }
        Ok(())
    };
    match name {
        "even_parity" => {
            no_extras("even_parity", true)?;
            let bits = bits.ok_or_else(|| anyhow!("even_parity needs `bits`"))?;
            Ok(GeneratorSpec::EvenParity { bits })
        }
        "full_adder" => {
            no_extras("full_adder", false)?;
            Ok(GeneratorSpec::FullAdder)
        }
        "multiplier" => {
            no_extras("multiplier", true)?;
            let bits = bits.ok_or_else(|| anyhow!("multiplier needs `bits`"))?;
            Ok(GeneratorSpec::Multiplier { bits })
        }
        "polynomial" => {
            if bits.is_some() {
                bail!("polynomial takes no `bits` parameter");
            }
            let coefficients =
                coefficients.ok_or_else(|| anyhow!("polynomial needs `coefficients`"))?;
            Ok(GeneratorSpec::Polynomial {
                coefficients,
                domain: domain.unwrap_or((-1.0, 1.0)),
                samples: samples.unwrap_or(20),
                seed: seed.unwrap_or(0),
            })
        }
        other => bail!(
            "unknown generator `{other}`; expected even_parity, full_adder, multiplier, or polynomial"
        ),
    }
}

impl RunConfigFile {
    /// Resolves the document against the directory containing the config
    /// file. Returns the resolved inputs plus the seed actually used (drawn
    /// here when the config says "random").
    pub fn resolve(self, config_dir: &Path) -> Result<ResolvedConfig> {
        let mode = parse_mode(&self.problem.mode).context("problem.mode")?;
        let source = match (self.problem.csv, self.problem.generator) {
            (Some(csv), None) => ProblemSource::Csv {
                path: config_dir.join(csv.path),
                ni: csv.ni,
                no: csv.no,
                has_header: csv.has_header,
            },
            (None, Some(g)) => ProblemSource::Generator(
                build_generator(&g.name, g.bits, g.coefficients, g.domain, g.samples, g.seed)
                    .context("problem.generator")?,
            ),
            (Some(_), Some(_)) => bail!("problem: set either `csv` or `generator`, not both"),
            (None, None) => bail!("problem: one of `csv` or `generator` is required"),
        };
        let problem = ProblemSpec { mode, source };

        let e = self.engine;
        let seed = match e.seed {
            SeedSetting::Fixed(n) => n,
            SeedSetting::Named(name) if name == "random" => draw_seed(),
            SeedSetting::Named(other) => {
                bail!("engine.seed must be a number or \"random\", got `{other}`")
            }
        };
        let adfs = e
            .adfs
            .iter()
            .map(|a| {
                Ok(AdfConfig {
                    param_count: a.params,
                    length: a.length,
                    representative_policy: parse_representative(a.representative.as_deref())?,
                })
            })
            .collect::<Result<Vec<_>>>()
            .context("engine.adfs")?;
        let engine = EngineConfig {
            population_size: e.population_size,
            max_generations: e.max_generations,
            chromosome_length: e.chromosome_length,
            tournament_size: e.tournament_size,
            operators: mep::OperatorConfig {
                crossover_kind: parse_crossover(&e.crossover).context("engine.crossover")?,
                crossover_prob: e.crossover_prob,
                mutation_prob_per_symbol: e.mutation_prob,
            },
            seed,
            exception_policy: parse_exception_policy(&e.exception_policy)
                .context("engine.exception_policy")?,
            symbol_policy: parse_symbol_policy(&e.symbol_policy)
                .context("engine.symbol_policy")?,
            functions: parse_functions(&e.functions).context("engine.functions")?,
            adfs,
        };

        Ok(ResolvedConfig {
            problem,
            engine,
            solution_path: config_dir.join(self.output.solution),
            summary_path: config_dir.join(self.output.summary),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(json: &str) -> Result<ResolvedConfig> {
        let file: RunConfigFile = serde_json::from_str(json)?;
        file.resolve(Path::new("/base"))
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = resolve(
            r#"{"problem": {"mode": "regression",
                "csv": {"path": "data.csv", "ni": 2, "no": 1}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.engine.population_size, 100);
        assert_eq!(cfg.engine.seed, 0);
        assert_eq!(cfg.engine.operators.crossover_prob, 0.9);
        assert_eq!(cfg.solution_path, Path::new("/base/solution.txt"));
        match cfg.problem.source {
            ProblemSource::Csv { path, ni, no, has_header } => {
                assert_eq!(path, Path::new("/base/data.csv"));
                assert_eq!((ni, no, has_header), (2, 1, false));
            }
            other => panic!("unexpected source {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = resolve(
            r#"{"problem": {"mode": "regression",
                "csv": {"path": "d.csv", "ni": 2, "no": 1}},
                "engine": {"popsize": 10}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("popsize"), "{err}");
    }

    #[test]
    fn both_or_neither_source_is_an_error() {
        assert!(resolve(r#"{"problem": {"mode": "boolean"}}"#).is_err());
        let err = resolve(
            r#"{"problem": {"mode": "boolean",
                "csv": {"path": "d.csv", "ni": 2, "no": 1},
                "generator": {"name": "full_adder"}}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("not both"), "{err}");
    }

    #[test]
    fn random_seed_draws_fresh_values() {
        let json = r#"{"problem": {"mode": "boolean",
            "generator": {"name": "full_adder"}},
            "engine": {"seed": "random"}}"#;
        let a = resolve(json).unwrap().engine.seed;
        let b = resolve(json).unwrap().engine.seed;
        // Two draws from RandomState collide with negligible probability.
        assert_ne!(a, b);

        let err = resolve(
            r#"{"problem": {"mode": "boolean",
                "generator": {"name": "full_adder"}},
                "engine": {"seed": "tuesday"}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("random"), "{err}");
    }

    #[test]
    fn engine_names_are_checked() {
        let bad = [
            (r#""crossover": "diagonal""#, "crossover"),
            (r#""exception_policy": "ignore""#, "exception_policy"),
            (r#""symbol_policy": "always_terminal""#, "symbol_policy"),
            (r#""functions": ["+", "cos"]"#, "cos"),
            (r#""functions": []"#, "empty"),
        ];
        for (fragment, needle) in bad {
            let json = format!(
                r#"{{"problem": {{"mode": "regression",
                    "csv": {{"path": "d.csv", "ni": 2, "no": 1}}}},
                    "engine": {{{fragment}}}}}"#
            );
            let err =
                resolve(&json).unwrap_err();
            assert!(
                format!("{err:#}").contains(needle),
                "fragment {fragment}: {err:#}"
            );
        }
    }

    #[test]
    fn adf_sections_resolve_policies() {
        let cfg = resolve(
            r#"{"problem": {"mode": "regression",
                "csv": {"path": "d.csv", "ni": 2, "no": 1}},
                "engine": {"adfs": [
                    {"params": 2, "length": 4},
                    {"params": 3, "length": 5, "representative": "exhaustive_best"}]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.engine.adfs.len(), 2);
        assert_eq!(
            cfg.engine.adfs[0].representative_policy,
            mep::RepresentativePolicy::LastGene
        );
        assert_eq!(
            cfg.engine.adfs[1].representative_policy,
            mep::RepresentativePolicy::ExhaustiveBest
        );
    }

    #[test]
    fn generator_parameters_are_validated() {
        assert!(build_generator("even_parity", Some(3), None, None, None, None).is_ok());
        assert!(build_generator("even_parity", None, None, None, None, None).is_err());
        assert!(build_generator("full_adder", Some(3), None, None, None, None).is_err());
        assert!(build_generator("polynomial", None, None, None, None, None).is_err());
        assert!(build_generator("warp", None, None, None, None, None).is_err());
        let poly = build_generator(
            "polynomial",
            None,
            Some(vec![0.0, 1.0]),
            None,
            None,
            None,
        )
        .unwrap();
        match poly {
            GeneratorSpec::Polynomial { domain, samples, seed, .. } => {
                assert_eq!(domain, (-1.0, 1.0));
                assert_eq!(samples, 20);
                assert_eq!(seed, 0);
            }
            other => panic!("unexpected spec {other:?}"),
        }
    }
}
