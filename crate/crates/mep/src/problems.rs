//! Dataset loading and benchmark generators.
//!
//! CSV here is the plain numeric dialect: comma-separated fields, optional
//! single header row, no quoting. Every row carries `NI` input columns
//! followed by `NO` target columns.
//!
//! The generators produce the usual benchmark tables exactly: even-parity
//! and binary multiplier truth tables, the full adder (two outputs), and
//! sampled polynomials for symbolic regression.

use crate::evaluator::{Dataset, DatasetError, FitnessCase, Mode};
use crate::rng::Rng;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("row {row}: expected {expected} fields, got {got}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("row {row}, column {column}: cannot parse `{text}` as a number")]
    NonNumericField {
        row: usize,
        column: usize,
        text: String,
    },
    #[error("no data rows")]
    EmptyData,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("generator parameter out of range: {0}")]
    BadGenerator(String),
    #[error("mode {requested} does not match the generator's natural mode {natural}")]
    ModeMismatch {
        requested: &'static str,
        natural: &'static str,
    },
}

/// Where a problem's cases come from.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSource {
    Csv {
        path: PathBuf,
        ni: usize,
        no: usize,
        has_header: bool,
    },
    Generator(GeneratorSpec),
}

/// A problem: its scoring mode plus the case source.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub mode: Mode,
    pub source: ProblemSource,
}

impl ProblemSpec {
    /// Produces the dataset, checking that generator-backed problems are
    /// scored in their natural mode.
    pub fn load(&self) -> Result<Dataset, ProblemError> {
        match &self.source {
            ProblemSource::Csv {
                path,
                ni,
                no,
                has_header,
            } => load_csv(path, *ni, *no, *has_header, self.mode),
            ProblemSource::Generator(spec) => {
                if self.mode != spec.natural_mode() {
                    return Err(ProblemError::ModeMismatch {
                        requested: self.mode.as_str(),
                        natural: spec.natural_mode().as_str(),
                    });
                }
                spec.build()
            }
        }
    }
}

/// Built-in benchmark tables.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    /// `bits`-input even parity: target 1 when the number of set inputs is
    /// even. 2 to 16 bits.
    EvenParity { bits: usize },
    /// One-bit full adder: inputs a, b, cin; outputs sum and carry.
    FullAdder,
    /// `bits` x `bits` binary multiplier, operands and product little
    /// endian. 1 to 3 bits.
    Multiplier { bits: usize },
    /// `samples` points of the polynomial with the given coefficients
    /// (constant term first), x drawn uniformly from the domain.
    Polynomial {
        coefficients: Vec<f64>,
        domain: (f64, f64),
        samples: usize,
        seed: u64,
    },
}

impl GeneratorSpec {
    /// The mode the generated dataset is meant to be scored in.
    pub fn natural_mode(&self) -> Mode {
        match self {
            GeneratorSpec::EvenParity { .. }
            | GeneratorSpec::FullAdder
            | GeneratorSpec::Multiplier { .. } => Mode::Boolean,
            GeneratorSpec::Polynomial { .. } => Mode::Regression,
        }
    }

    pub fn build(&self) -> Result<Dataset, ProblemError> {
        match self {
            GeneratorSpec::EvenParity { bits } => gen_even_parity(*bits),
            GeneratorSpec::FullAdder => gen_full_adder(),
            GeneratorSpec::Multiplier { bits } => gen_multiplier(*bits),
            GeneratorSpec::Polynomial {
                coefficients,
                domain,
                samples,
                seed,
            } => gen_polynomial(coefficients, *domain, *samples, *seed),
        }
    }
}

/// Parses the numeric CSV dialect. Row numbers in errors are 1-based file
/// lines, so the header (when present) is row 1.
pub fn parse_csv_text(
    text: &str,
    ni: usize,
    no: usize,
    has_header: bool,
    mode: Mode,
) -> Result<Dataset, ProblemError> {
    let expected = ni + no;
    let mut column_names: Option<Vec<String>> = None;
    let mut want_header = has_header;
    let mut cases = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let row = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != expected {
            return Err(ProblemError::RaggedRow {
                row,
                expected,
                got: fields.len(),
            });
        }
        if want_header {
            column_names = Some(fields.iter().map(|s| s.to_string()).collect());
            want_header = false;
            continue;
        }
        let mut values = Vec::with_capacity(expected);
        for (i, field) in fields.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| ProblemError::NonNumericField {
                row,
                column: i + 1,
                text: field.to_string(),
            })?;
            values.push(value);
        }
        let targets = values.split_off(ni);
        cases.push(FitnessCase::new(values, targets));
    }
    if cases.is_empty() {
        return Err(ProblemError::EmptyData);
    }
    let dataset = Dataset::new(ni, no, mode, cases)?;
    match column_names {
        Some(names) => Ok(dataset.with_column_names(names)?),
        None => Ok(dataset),
    }
}

/// Reads and parses a CSV file.
pub fn load_csv(
    path: &Path,
    ni: usize,
    no: usize,
    has_header: bool,
    mode: Mode,
) -> Result<Dataset, ProblemError> {
    let text = std::fs::read_to_string(path)?;
    parse_csv_text(&text, ni, no, has_header, mode)
}

/// Renders a dataset back to CSV text: a header row when column names are
/// attached, then one row per case. Numbers use the shortest text that
/// parses back to the same value.
pub fn dataset_to_csv_text(dataset: &Dataset) -> String {
    let mut out = String::new();
    if let Some(names) = dataset.column_names() {
        out.push_str(&names.join(","));
        out.push('\n');
    }
    for case in dataset.cases() {
        let row: Vec<String> = case
            .inputs()
            .iter()
            .chain(case.targets())
            .map(|v| v.to_string())
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// The even-parity truth table over `bits` inputs.
pub fn gen_even_parity(bits: usize) -> Result<Dataset, ProblemError> {
    if !(2..=16).contains(&bits) {
        return Err(ProblemError::BadGenerator(format!(
            "parity bits must be in 2..=16, got {bits}"
        )));
    }
    let mut cases = Vec::with_capacity(1 << bits);
    for row in 0..1u32 << bits {
        let inputs: Vec<f64> = (0..bits).map(|i| ((row >> i) & 1) as f64).collect();
        let ones = row.count_ones();
        let parity = if ones % 2 == 0 { 1.0 } else { 0.0 };
        cases.push(FitnessCase::new(inputs, vec![parity]));
    }
    let mut names: Vec<String> = (0..bits).map(|i| format!("x{i}")).collect();
    names.push("parity".to_string());
    Ok(Dataset::new(bits, 1, Mode::Boolean, cases)?.with_column_names(names)?)
}

/// The one-bit full adder: sum and carry of a + b + cin.
pub fn gen_full_adder() -> Result<Dataset, ProblemError> {
    let mut cases = Vec::with_capacity(8);
    for row in 0..8u32 {
        let a = row & 1;
        let b = (row >> 1) & 1;
        let cin = (row >> 2) & 1;
        let total = a + b + cin;
        cases.push(FitnessCase::new(
            vec![a as f64, b as f64, cin as f64],
            vec![(total & 1) as f64, (total >> 1) as f64],
        ));
    }
    let names = ["a", "b", "cin", "sum", "carry"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    Ok(Dataset::new(3, 2, Mode::Boolean, cases)?.with_column_names(names)?)
}

/// The `bits` x `bits` binary multiplier truth table. Operand bits come
/// first (a then b), product bits last, all little endian.
pub fn gen_multiplier(bits: usize) -> Result<Dataset, ProblemError> {
    if !(1..=3).contains(&bits) {
        return Err(ProblemError::BadGenerator(format!(
            "multiplier bits must be in 1..=3, got {bits}"
        )));
    }
    let out_bits = 2 * bits;
    let mut cases = Vec::with_capacity(1 << (2 * bits));
    for a in 0..1u32 << bits {
        for b in 0..1u32 << bits {
            let product = a * b;
            let mut inputs = Vec::with_capacity(2 * bits);
            inputs.extend((0..bits).map(|i| ((a >> i) & 1) as f64));
            inputs.extend((0..bits).map(|i| ((b >> i) & 1) as f64));
            let targets: Vec<f64> = (0..out_bits).map(|i| ((product >> i) & 1) as f64).collect();
            cases.push(FitnessCase::new(inputs, targets));
        }
    }
    let mut names: Vec<String> = (0..bits).map(|i| format!("a{i}")).collect();
    names.extend((0..bits).map(|i| format!("b{i}")));
    names.extend((0..out_bits).map(|i| format!("p{i}")));
    Ok(Dataset::new(2 * bits, out_bits, Mode::Boolean, cases)?.with_column_names(names)?)
}

/// Value of the polynomial with `coefficients` (constant term first) at
/// `x`, as the plain power sum c0 + c1 x + c2 x^2 + ...
pub fn polynomial_value(coefficients: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    let mut power = 1.0;
    for &c in coefficients {
        total += c * power;
        power *= x;
    }
    total
}

/// Samples a polynomial uniformly on `[domain.0, domain.1)`.
pub fn gen_polynomial(
    coefficients: &[f64],
    domain: (f64, f64),
    samples: usize,
    seed: u64,
) -> Result<Dataset, ProblemError> {
    if coefficients.is_empty() {
        return Err(ProblemError::BadGenerator(
            "polynomial needs at least one coefficient".to_string(),
        ));
    }
    if !domain.0.is_finite() || !domain.1.is_finite() || domain.0 >= domain.1 {
        return Err(ProblemError::BadGenerator(format!(
            "polynomial domain must satisfy lo < hi, got ({}, {})",
            domain.0, domain.1
        )));
    }
    if samples == 0 {
        return Err(ProblemError::BadGenerator(
            "polynomial needs at least one sample".to_string(),
        ));
    }
    let mut rng = Rng::new(seed);
    let width = domain.1 - domain.0;
    let cases = (0..samples)
        .map(|_| {
            let x = domain.0 + rng.unit() * width;
            FitnessCase::new(vec![x], vec![polynomial_value(coefficients, x)])
        })
        .collect();
    let names = vec!["x".to_string(), "y".to_string()];
    Ok(Dataset::new(1, 1, Mode::Regression, cases)?.with_column_names(names)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case_for<'d>(ds: &'d Dataset, inputs: &[f64]) -> &'d FitnessCase {
        ds.cases()
            .iter()
            .find(|c| c.inputs() == inputs)
            .expect("case present")
    }

    #[test]
    fn parity_three_is_balanced_and_correct() {
        let ds = gen_even_parity(3).unwrap();
        assert_eq!(ds.len(), 8);
        assert_eq!((ds.ni(), ds.no()), (3, 1));
        assert_eq!(ds.mode(), Mode::Boolean);
        let ones: f64 = ds.cases().iter().map(|c| c.targets()[0]).sum();
        assert_eq!(ones, 4.0);
        assert_eq!(case_for(&ds, &[0.0, 0.0, 0.0]).targets(), &[1.0]);
        assert_eq!(case_for(&ds, &[1.0, 0.0, 0.0]).targets(), &[0.0]);
        assert_eq!(case_for(&ds, &[1.0, 1.0, 0.0]).targets(), &[1.0]);
        assert_eq!(case_for(&ds, &[1.0, 1.0, 1.0]).targets(), &[0.0]);
        assert_eq!(
            ds.column_names().unwrap(),
            &["x0", "x1", "x2", "parity"]
        );
    }

    #[test]
    fn parity_bits_are_bounded() {
        assert!(gen_even_parity(1).is_err());
        assert!(gen_even_parity(17).is_err());
        assert_eq!(gen_even_parity(16).unwrap().len(), 65536);
    }

    #[test]
    fn full_adder_matches_arithmetic() {
        let ds = gen_full_adder().unwrap();
        assert_eq!(ds.len(), 8);
        assert_eq!((ds.ni(), ds.no()), (3, 2));
        assert_eq!(case_for(&ds, &[1.0, 1.0, 1.0]).targets(), &[1.0, 1.0]);
        assert_eq!(case_for(&ds, &[1.0, 0.0, 0.0]).targets(), &[1.0, 0.0]);
        assert_eq!(case_for(&ds, &[1.0, 1.0, 0.0]).targets(), &[0.0, 1.0]);
        assert_eq!(case_for(&ds, &[0.0, 0.0, 0.0]).targets(), &[0.0, 0.0]);
        assert_eq!(
            ds.column_names().unwrap(),
            &["a", "b", "cin", "sum", "carry"]
        );
    }

    #[test]
    fn two_bit_multiplier_table() {
        let ds = gen_multiplier(2).unwrap();
        assert_eq!(ds.len(), 16);
        assert_eq!((ds.ni(), ds.no()), (4, 4));
        // 3 * 2 = 6: a = (1,1), b = (0,1), product 0110 little endian.
        assert_eq!(
            case_for(&ds, &[1.0, 1.0, 0.0, 1.0]).targets(),
            &[0.0, 1.0, 1.0, 0.0]
        );
        // 3 * 3 = 9 = 1001.
        assert_eq!(
            case_for(&ds, &[1.0, 1.0, 1.0, 1.0]).targets(),
            &[1.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn one_bit_multiplier_is_and() {
        let ds = gen_multiplier(1).unwrap();
        assert_eq!(ds.len(), 4);
        for case in ds.cases() {
            assert_eq!(case.targets()[0], case.inputs()[0] * case.inputs()[1]);
            assert_eq!(case.targets()[1], 0.0);
        }
        assert!(gen_multiplier(0).is_err());
        assert!(gen_multiplier(4).is_err());
    }

    #[test]
    fn polynomial_value_is_the_power_sum() {
        let quartic = [0.0, 1.0, 1.0, 1.0, 1.0];
        assert_eq!(polynomial_value(&quartic, 1.0), 4.0);
        assert_eq!(polynomial_value(&quartic, 2.0), 30.0);
        assert_eq!(polynomial_value(&[7.0], 123.0), 7.0);
        assert_eq!(polynomial_value(&[1.0, 0.0, 2.0], -3.0), 19.0);
    }

    #[test]
    fn polynomial_value_agrees_with_horner_on_integers() {
        // Integer coefficients and arguments stay exact in f64, so the
        // power-sum and Horner forms must agree bit for bit.
        let mut rng = Rng::new(5);
        for _ in 0..50 {
            let coeffs: Vec<f64> = (0..5).map(|_| rng.below(9) as f64 - 4.0).collect();
            let x = rng.below(7) as f64 - 3.0;
            let horner = coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            assert_eq!(polynomial_value(&coeffs, x), horner);
        }
    }

    #[test]
    fn polynomial_value_close_to_horner_on_floats() {
        let mut rng = Rng::new(6);
        for _ in 0..50 {
            let coeffs: Vec<f64> = (0..6).map(|_| rng.unit() * 4.0 - 2.0).collect();
            let x = rng.unit() * 4.0 - 2.0;
            let horner = coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            let naive = polynomial_value(&coeffs, x);
            assert!((naive - horner).abs() <= 1e-12 * (1.0 + horner.abs()));
        }
    }

    #[test]
    fn polynomial_sampling_is_seeded_and_in_domain() {
        let coeffs = [0.0, 1.0, 1.0, 1.0, 1.0];
        let a = gen_polynomial(&coeffs, (-1.0, 1.0), 40, 9).unwrap();
        let b = gen_polynomial(&coeffs, (-1.0, 1.0), 40, 9).unwrap();
        let c = gen_polynomial(&coeffs, (-1.0, 1.0), 40, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 40);
        for case in a.cases() {
            let x = case.inputs()[0];
            assert!((-1.0..1.0).contains(&x));
            assert_eq!(case.targets()[0], polynomial_value(&coeffs, x));
        }
    }

    #[test]
    fn bad_polynomial_parameters_are_rejected() {
        assert!(gen_polynomial(&[], (0.0, 1.0), 5, 0).is_err());
        assert!(gen_polynomial(&[1.0], (1.0, 1.0), 5, 0).is_err());
        assert!(gen_polynomial(&[1.0], (2.0, 1.0), 5, 0).is_err());
        assert!(gen_polynomial(&[1.0], (0.0, 1.0), 0, 0).is_err());
    }

    #[test]
    fn csv_parses_header_and_values() {
        let ds = parse_csv_text("a,b,y\n1,2,3\n4.5, -1, 3.5\n", 2, 1, true, Mode::Regression)
            .unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.column_names().unwrap(), &["a", "b", "y"]);
        assert_eq!(ds.case(0).inputs(), &[1.0, 2.0]);
        assert_eq!(ds.case(0).targets(), &[3.0]);
        assert_eq!(ds.case(1).inputs(), &[4.5, -1.0]);
        assert_eq!(ds.case(1).targets(), &[3.5]);
    }

    #[test]
    fn csv_without_header_keeps_no_names() {
        let ds = parse_csv_text("1,2,3\n", 2, 1, false, Mode::Regression).unwrap();
        assert_eq!(ds.len(), 1);
        assert!(ds.column_names().is_none());
    }

    #[test]
    fn csv_errors_point_at_file_lines() {
        let err = parse_csv_text("a,b,y\n1,2,3\n4,5\n", 2, 1, true, Mode::Regression).unwrap_err();
        match err {
            ProblemError::RaggedRow { row, expected, got } => {
                assert_eq!((row, expected, got), (3, 3, 2));
            }
            other => panic!("unexpected error: {other}"),
        }

        let err =
            parse_csv_text("1,2,3\n1,oops,3\n", 2, 1, false, Mode::Regression).unwrap_err();
        match err {
            ProblemError::NonNumericField { row, column, text } => {
                assert_eq!((row, column), (2, 2));
                assert_eq!(text, "oops");
            }
            other => panic!("unexpected error: {other}"),
        }

        assert!(matches!(
            parse_csv_text("a,b,y\n", 2, 1, true, Mode::Regression).unwrap_err(),
            ProblemError::EmptyData
        ));
    }

    #[test]
    fn csv_round_trips_byte_for_byte() {
        let text = "a,b,y\n1,2,3\n4.5,-1,3.5\n0.125,7,-2\n";
        let ds = parse_csv_text(text, 2, 1, true, Mode::Regression).unwrap();
        assert_eq!(dataset_to_csv_text(&ds), text);

        let generated = gen_full_adder().unwrap();
        let rendered = dataset_to_csv_text(&generated);
        let reparsed = parse_csv_text(&rendered, 3, 2, true, Mode::Boolean).unwrap();
        assert_eq!(reparsed, generated);
    }

    #[test]
    fn blank_lines_are_skipped() {
        let ds = parse_csv_text("1,2,3\n\n4,5,9\n\n", 2, 1, false, Mode::Regression).unwrap();
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn boolean_csv_values_are_checked() {
        let err = parse_csv_text("1,0,1\n0,2,0\n", 2, 1, false, Mode::Boolean).unwrap_err();
        assert!(matches!(
            err,
            ProblemError::Dataset(DatasetError::NonBoolean { case: 1, value }) if value == 2.0
        ));
    }

    #[test]
    fn generator_spec_checks_mode() {
        let spec = ProblemSpec {
            mode: Mode::Classification,
            source: ProblemSource::Generator(GeneratorSpec::EvenParity { bits: 3 }),
        };
        assert!(matches!(spec.load(), Err(ProblemError::ModeMismatch { .. })));

        let spec = ProblemSpec {
            mode: Mode::Boolean,
            source: ProblemSource::Generator(GeneratorSpec::EvenParity { bits: 3 }),
        };
        assert_eq!(spec.load().unwrap().len(), 8);

        let spec = ProblemSpec {
            mode: Mode::Regression,
            source: ProblemSource::Generator(GeneratorSpec::Polynomial {
                coefficients: vec![0.0, 1.0, 1.0, 1.0, 1.0],
                domain: (-1.0, 1.0),
                samples: 20,
                seed: 1,
            }),
        };
        assert_eq!(spec.load().unwrap().len(), 20);
    }

    #[test]
    fn csv_source_loads_from_disk() {
        let dir = std::env::temp_dir().join(format!("mep-csv-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cases.csv");
        std::fs::write(&path, "a,b,y\n1,2,3\n2,2,4\n").unwrap();
        let spec = ProblemSpec {
            mode: Mode::Regression,
            source: ProblemSource::Csv {
                path: path.clone(),
                ni: 2,
                no: 1,
                has_header: true,
            },
        };
        let ds = spec.load().unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.column_names().unwrap(), &["a", "b", "y"]);
        std::fs::remove_dir_all(&dir).unwrap();

        let missing = ProblemSpec {
            mode: Mode::Regression,
            source: ProblemSource::Csv {
                path,
                ni: 2,
                no: 1,
                has_header: true,
            },
        };
        assert!(matches!(missing.load(), Err(ProblemError::Io(_))));
    }
}
