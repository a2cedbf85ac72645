//! The four subcommands: run, eval, export, gen.

use crate::config::{self, RunConfigFile};
use anyhow::{anyhow, bail, Context, Result};
use mep::adf::parse_individual;
use mep::chromosome::all_builtin_functions;
use mep::evaluator::{
    assign_outputs_greedy, chromosome_fitness_single, evaluate_matrix, expression_fitness,
    gene_output_fitness,
};
use mep::problems::dataset_to_csv_text;
use mep::{
    Engine, ExceptionPolicy, Gene, GenerationRecord, Individual, Mode, Primitives, Rng,
    SymbolPolicy,
};
use serde::Serialize;
use std::path::Path;

/// The stable summary schema written after every run.
#[derive(Serialize)]
struct Summary {
    seed: u64,
    mode: &'static str,
    ni: usize,
    no: usize,
    cases: usize,
    population_size: usize,
    chromosome_length: usize,
    max_generations: usize,
    generations_run: usize,
    best_fitness: f64,
    solved: bool,
    best_genes: Vec<usize>,
    best_expressions: Vec<String>,
    exceptions_total: usize,
}

fn stats_line(record: &GenerationRecord) -> String {
    format!(
        "gen={} best={} mean={} exceptions={}",
        record.generation, record.best_fitness, record.mean_fitness, record.exception_count
    )
}

pub fn cmd_run(config_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let file: RunConfigFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", config_path.display()))?;
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let resolved = file.resolve(config_dir)?;
    let dataset = resolved.problem.load()?;

    let seed = resolved.engine.seed;
    let mode = dataset.mode();
    let (ni, no, cases) = (dataset.ni(), dataset.no(), dataset.len());
    let population_size = resolved.engine.population_size;
    let chromosome_length = resolved.engine.chromosome_length;
    let max_generations = resolved.engine.max_generations;

    let mut engine = Engine::new(resolved.engine, dataset)?;
    println!("seed={seed}");
    println!("{}", stats_line(engine.records().last().expect("generation 0")));
    while engine.generation() < max_generations && !engine.solved() {
        let record = engine.step()?;
        println!("{}", stats_line(record));
    }
    let output = engine.into_output();

    let best_expressions = output
        .best_outcome
        .best_genes
        .iter()
        .map(|&g| output.best.main().expression_text(g, output.primitives.main()))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = Summary {
        seed,
        mode: mode.as_str(),
        ni,
        no,
        cases,
        population_size,
        chromosome_length,
        max_generations,
        generations_run: output.stats.generations(),
        best_fitness: output.best_outcome.fitness,
        solved: output.stats.solved(),
        best_genes: output.best_outcome.best_genes.clone(),
        best_expressions,
        exceptions_total: output
            .stats
            .records()
            .iter()
            .map(|r| r.exception_count)
            .sum(),
    };

    let solution_text = output.best.to_text(&output.primitives) + "\n";
    std::fs::write(&resolved.solution_path, solution_text)
        .with_context(|| format!("writing {}", resolved.solution_path.display()))?;
    let summary_text = serde_json::to_string_pretty(&summary)? + "\n";
    std::fs::write(&resolved.summary_path, summary_text)
        .with_context(|| format!("writing {}", resolved.summary_path.display()))?;
    Ok(())
}

/// Reads a solution file and parses it over `ni` inputs with the full
/// builtin vocabulary, so any solution this tool wrote can be read back.
fn read_solution(path: &Path, ni: usize) -> Result<(Individual, Primitives)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = parse_individual(
        &text,
        ni,
        all_builtin_functions(),
        SymbolPolicy::PerSymbolUniform,
    )
    .map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok(parsed)
}

pub fn cmd_eval(
    solution: &Path,
    data: &Path,
    ni: usize,
    no: usize,
    has_header: bool,
    mode: Mode,
) -> Result<()> {
    let dataset = mep::problems::load_csv(data, ni, no, has_header, mode)
        .with_context(|| format!("loading {}", data.display()))?;
    let (individual, prims) = read_solution(solution, ni)?;

    // Diagnostic evaluation never rewrites the solution, so the exception
    // policy is forced to protected.
    let mut scratch = individual.clone();
    let mut rng = Rng::new(0);
    let matrix = evaluate_matrix(
        &mut scratch,
        &prims,
        &dataset,
        ExceptionPolicy::Protected,
        &mut rng,
    );

    let main = individual.main();
    if no == 1 {
        for i in 0..main.len() {
            println!(
                "gene {i}: fitness={} expr={}",
                expression_fitness(&matrix, &dataset, i),
                main.expression_text(i, prims.main())?
            );
        }
        let outcome = chromosome_fitness_single(&matrix, &dataset);
        println!("best: gene {} fitness={}", outcome.best_genes[0], outcome.fitness);
        println!("total={}", outcome.fitness);
    } else {
        let table = gene_output_fitness(&matrix, &dataset);
        for i in 0..main.len() {
            let columns: Vec<String> = (0..no).map(|q| table.get(i, q).to_string()).collect();
            println!(
                "gene {i}: fitness=({}) expr={}",
                columns.join(", "),
                main.expression_text(i, prims.main())?
            );
        }
        let outcome = assign_outputs_greedy(&table)?;
        for (q, &g) in outcome.best_genes.iter().enumerate() {
            println!("output {q}: gene {g} fitness={}", table.get(g, q));
        }
        println!("total={}", outcome.fitness);
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Infix,
    CLike,
}

/// Determines how many inputs a solution file spans by scanning the main
/// section's terminal tokens (the widest index used, at least one input).
fn infer_num_inputs(text: &str) -> Result<usize> {
    let mut max_index: Option<usize> = None;
    let mut in_adf = false;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            in_adf = line != "[main]";
            continue;
        }
        if in_adf {
            continue;
        }
        let Some((_, rest)) = line.split_once(':') else {
            continue;
        };
        let token = rest.trim();
        if token.contains(' ') || token.contains(',') {
            continue; // a function-call line, not a terminal
        }
        let index = match token.as_bytes() {
            [b @ b'a'..=b'z'] => Some(usize::from(b - b'a')),
            _ => token.strip_prefix('x').and_then(|d| d.parse().ok()),
        };
        if let Some(index) = index {
            max_index = Some(max_index.map_or(index, |m: usize| m.max(index)));
        }
    }
    max_index
        .map(|m| m + 1)
        .ok_or_else(|| anyhow!("no terminal genes found in the solution"))
}

fn rhs_text(gene: &Gene, ps: &mep::PrimitiveSet, var_prefix: &str) -> String {
    match gene {
        Gene::Terminal(t) => ps.terminal_name(*t),
        Gene::Call { function, args } => {
            let sym = ps.function(*function);
            if sym.op().is_arithmetic() {
                format!(
                    "{var_prefix}{} {} {var_prefix}{}",
                    args[0],
                    sym.name(),
                    args[1]
                )
            } else {
                let inner: Vec<String> =
                    args.iter().map(|a| format!("{var_prefix}{a}")).collect();
                format!("{}({})", sym.name(), inner.join(", "))
            }
        }
    }
}

/// Renders the coding genes as one assignment per gene, ADF bodies first,
/// then `out<q> = v<gene>;` lines mapping outputs to the requested genes.
fn render_c_like(ind: &Individual, prims: &Primitives, roots: &[usize]) -> Result<String> {
    let main = ind.main();
    let coding = main.coding_genes(roots)?;
    let mut used_adfs: Vec<usize> = coding
        .iter()
        .filter_map(|&i| match main.gene(i) {
            Gene::Call { function, .. } => prims.main().function(*function).adf_index(),
            Gene::Terminal(_) => None,
        })
        .collect();
    used_adfs.sort_unstable();
    used_adfs.dedup();

    let mut out = String::new();
    for &k in &used_adfs {
        let adf = &ind.adfs()[k];
        let params: Vec<String> = (0..adf.param_count()).map(|p| format!("p{p}")).collect();
        out.push_str(&format!("ADF{k}({}):\n", params.join(", ")));
        let body = adf.chromosome();
        for &i in &body.coding_genes(&[adf.representative()])? {
            out.push_str(&format!("  u{i} = {};\n", rhs_text(body.gene(i), prims.adf(k), "u")));
        }
        out.push_str(&format!("  return u{};\n\n", adf.representative()));
    }
    for &i in &coding {
        out.push_str(&format!("v{i} = {};\n", rhs_text(main.gene(i), prims.main(), "v")));
    }
    for (q, &g) in roots.iter().enumerate() {
        out.push_str(&format!("out{q} = v{g};\n"));
    }
    Ok(out)
}

pub fn cmd_export(solution: &Path, format: ExportFormat, genes: &[usize]) -> Result<()> {
    let text = std::fs::read_to_string(solution)
        .with_context(|| format!("reading {}", solution.display()))?;
    let ni = infer_num_inputs(&text)?;
    let (individual, prims) = read_solution(solution, ni)?;
    let main = individual.main();
    let genes: Vec<usize> = if genes.is_empty() {
        vec![main.len() - 1]
    } else {
        genes.to_vec()
    };
    for &g in &genes {
        if g >= main.len() {
            bail!("gene {g} is out of range; the solution has {} genes", main.len());
        }
    }
    match format {
        ExportFormat::Infix => {
            for &g in &genes {
                println!("{}", main.expression_text(g, prims.main())?);
            }
        }
        ExportFormat::CLike => {
            print!("{}", render_c_like(&individual, &prims, &genes)?);
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_gen(
    problem: &str,
    bits: Option<usize>,
    coefficients: Option<Vec<f64>>,
    domain: Option<(f64, f64)>,
    samples: Option<usize>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let spec = config::build_generator(problem, bits, coefficients, domain, samples, seed)?;
    let dataset = spec.build()?;
    std::fs::write(out, dataset_to_csv_text(&dataset))
        .with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_count_inference_reads_main_terminals_only() {
        assert_eq!(infer_num_inputs("0: a\n1: d\n2: + 0, 1").unwrap(), 4);
        assert_eq!(infer_num_inputs("0: x12\n1: + 0, 0").unwrap(), 13);
        assert_eq!(infer_num_inputs("0: x\n1: + 0, 0").unwrap(), 24);
        let sections = "[main]\n0: b\n1: ADF0 0, 0\n\n[adf0 params=3]\n0: p2\n1: + 0, 0";
        assert_eq!(infer_num_inputs(sections).unwrap(), 2);
        assert!(infer_num_inputs("").is_err());
    }
}
