//! Crossover and mutation.
//!
//! Crossover exchanges whole genes at matching positions, so any offspring
//! of two valid equal-length parents is valid by construction. Mutation
//! works per symbol: each gene head and each argument pointer is redrawn
//! independently with the configured probability. Deterministic variants
//! (`*_at`, `*_masked`, [`apply_symbol_edits`]) expose the same gene
//! arithmetic with the random choices passed in, which is what the golden
//! tests pin down.

use crate::chromosome::{random_gene, Chromosome, Gene, PrimitiveSet};
use crate::rng::Rng;
use thiserror::Error;

/// Which crossover kind the engine applies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CrossoverKind {
    #[default]
    OnePoint,
    TwoPoint,
    Uniform,
}

/// Variation-operator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorConfig {
    pub crossover_kind: CrossoverKind,
    /// Probability that a selected pair recombines at all.
    pub crossover_prob: f64,
    /// Probability that any single symbol (head or pointer) is redrawn.
    pub mutation_prob_per_symbol: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            crossover_kind: CrossoverKind::OnePoint,
            crossover_prob: 0.9,
            mutation_prob_per_symbol: 0.02,
        }
    }
}

impl OperatorConfig {
    pub fn validate(&self) -> Result<(), OperatorError> {
        for (value, name) in [
            (self.crossover_prob, "crossover_prob"),
            (self.mutation_prob_per_symbol, "mutation_prob_per_symbol"),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(OperatorError::BadProbability { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OperatorError {
    #[error("parents have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("chromosome length {length} too short, need at least {needed}")]
    TooShort { length: usize, needed: usize },
    #[error("cut point {cut} is not interior for length {length}")]
    BadCut { cut: usize, length: usize },
    #[error("cut points must satisfy first < second, got {first} and {second}")]
    BadCutPair { first: usize, second: usize },
    #[error("mask length {got} does not match chromosome length {expected}")]
    BadMask { expected: usize, got: usize },
    #[error("edit on gene {gene} is invalid: {reason}")]
    InvalidEdit { gene: usize, reason: String },
    #[error("parents have different ADF signatures")]
    SignatureMismatch,
    #[error("{name} must lie in [0, 1], got {value}")]
    BadProbability { name: &'static str, value: f64 },
}

fn check_lengths(p1: &Chromosome, p2: &Chromosome) -> Result<usize, OperatorError> {
    if p1.len() != p2.len() {
        return Err(OperatorError::LengthMismatch {
            left: p1.len(),
            right: p2.len(),
        });
    }
    Ok(p1.len())
}

/// One-point crossover at a fixed cut: offspring 1 takes parent 1's genes
/// in `[0, cut)` and parent 2's genes in `[cut, NG)`; offspring 2 mirrors.
pub fn crossover_one_point_at(
    p1: &Chromosome,
    p2: &Chromosome,
    cut: usize,
) -> Result<(Chromosome, Chromosome), OperatorError> {
    let ng = check_lengths(p1, p2)?;
    if cut == 0 || cut >= ng {
        return Err(OperatorError::BadCut { cut, length: ng });
    }
    let splice = |a: &Chromosome, b: &Chromosome| {
        let genes = a.genes()[..cut]
            .iter()
            .chain(&b.genes()[cut..])
            .cloned()
            .collect();
        Chromosome::new(genes)
    };
    Ok((splice(p1, p2), splice(p2, p1)))
}

/// One-point crossover with the cut drawn uniformly from `[1, NG-1]`.
/// Single-gene parents have no interior cut and yield clones.
pub fn crossover_one_point(
    p1: &Chromosome,
    p2: &Chromosome,
    rng: &mut Rng,
) -> Result<(Chromosome, Chromosome), OperatorError> {
    let ng = check_lengths(p1, p2)?;
    if ng == 1 {
        return Ok((p1.clone(), p2.clone()));
    }
    let cut = 1 + rng.below(ng - 1);
    crossover_one_point_at(p1, p2, cut)
}

/// Two-point crossover with fixed cuts: the segment `[first, second)` is
/// exchanged between the parents.
pub fn crossover_two_point_at(
    p1: &Chromosome,
    p2: &Chromosome,
    first: usize,
    second: usize,
) -> Result<(Chromosome, Chromosome), OperatorError> {
    let ng = check_lengths(p1, p2)?;
    for cut in [first, second] {
        if cut == 0 || cut >= ng {
            return Err(OperatorError::BadCut { cut, length: ng });
        }
    }
    if first >= second {
        return Err(OperatorError::BadCutPair { first, second });
    }
    let splice = |a: &Chromosome, b: &Chromosome| {
        let genes = a.genes()[..first]
            .iter()
            .chain(&b.genes()[first..second])
            .chain(&a.genes()[second..])
            .cloned()
            .collect();
        Chromosome::new(genes)
    };
    Ok((splice(p1, p2), splice(p2, p1)))
}

/// Two-point crossover with two distinct cuts drawn from `[1, NG-1]`.
/// Needs at least three genes so that two distinct cuts exist.
pub fn crossover_two_point(
    p1: &Chromosome,
    p2: &Chromosome,
    rng: &mut Rng,
) -> Result<(Chromosome, Chromosome), OperatorError> {
    let ng = check_lengths(p1, p2)?;
    if ng < 3 {
        return Err(OperatorError::TooShort { length: ng, needed: 3 });
    }
    let first = 1 + rng.below(ng - 1);
    let second = loop {
        let c = 1 + rng.below(ng - 1);
        if c != first {
            break c;
        }
    };
    crossover_two_point_at(p1, p2, first.min(second), first.max(second))
}

/// Uniform crossover with a fixed coin vector: where `take_first[i]` holds,
/// offspring 1 receives parent 1's gene `i`, otherwise parent 2's;
/// offspring 2 mirrors.
pub fn crossover_uniform_masked(
    p1: &Chromosome,
    p2: &Chromosome,
    take_first: &[bool],
) -> Result<(Chromosome, Chromosome), OperatorError> {
    let ng = check_lengths(p1, p2)?;
    if take_first.len() != ng {
        return Err(OperatorError::BadMask {
            expected: ng,
            got: take_first.len(),
        });
    }
    let pick = |flip: bool| {
        let genes = (0..ng)
            .map(|i| {
                if take_first[i] != flip {
                    p1.gene(i).clone()
                } else {
                    p2.gene(i).clone()
                }
            })
            .collect();
        Chromosome::new(genes)
    };
    Ok((pick(false), pick(true)))
}

/// Uniform crossover with a fair coin per position.
pub fn crossover_uniform(
    p1: &Chromosome,
    p2: &Chromosome,
    rng: &mut Rng,
) -> Result<(Chromosome, Chromosome), OperatorError> {
    let ng = check_lengths(p1, p2)?;
    let mask: Vec<bool> = (0..ng).map(|_| rng.below(2) == 0).collect();
    crossover_uniform_masked(p1, p2, &mask)
}

/// Dispatches on the configured kind.
pub fn crossover(
    p1: &Chromosome,
    p2: &Chromosome,
    kind: CrossoverKind,
    rng: &mut Rng,
) -> Result<(Chromosome, Chromosome), OperatorError> {
    match kind {
        CrossoverKind::OnePoint => crossover_one_point(p1, p2, rng),
        CrossoverKind::TwoPoint => crossover_two_point(p1, p2, rng),
        CrossoverKind::Uniform => crossover_uniform(p1, p2, rng),
    }
}

/// One symbol replacement inside a chromosome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolEdit {
    /// Replace gene `gene` wholesale; a head redraw always brings fresh
    /// argument pointers with it.
    Head { gene: usize, new: Gene },
    /// Redraw a single argument pointer of a call gene.
    Arg {
        gene: usize,
        slot: usize,
        target: usize,
    },
}

/// Applies edits in order, checking that each one preserves validity.
pub fn apply_symbol_edits(
    c: &Chromosome,
    ps: &PrimitiveSet,
    edits: &[SymbolEdit],
) -> Result<Chromosome, OperatorError> {
    let mut genes = c.genes().to_vec();
    let invalid = |gene: usize, reason: &str| OperatorError::InvalidEdit {
        gene,
        reason: reason.to_string(),
    };
    for edit in edits {
        match edit {
            SymbolEdit::Head { gene, new } => {
                if *gene >= genes.len() {
                    return Err(invalid(*gene, "gene index out of range"));
                }
                match new {
                    Gene::Terminal(var) => {
                        if *var >= ps.num_terminals() {
                            return Err(invalid(*gene, "terminal index out of range"));
                        }
                    }
                    Gene::Call { function, args } => {
                        if *gene == 0 {
                            return Err(invalid(0, "the first gene must stay a terminal"));
                        }
                        let sym = ps
                            .functions()
                            .get(*function)
                            .ok_or_else(|| invalid(*gene, "unknown function id"))?;
                        if args.len() != sym.arity() {
                            return Err(invalid(*gene, "argument count does not match arity"));
                        }
                        if args.iter().any(|&a| a >= *gene) {
                            return Err(invalid(*gene, "argument points forward"));
                        }
                    }
                }
                genes[*gene] = new.clone();
            }
            SymbolEdit::Arg { gene, slot, target } => {
                if *gene >= genes.len() {
                    return Err(invalid(*gene, "gene index out of range"));
                }
                if *target >= *gene {
                    return Err(invalid(*gene, "argument points forward"));
                }
                match &mut genes[*gene] {
                    Gene::Terminal(_) => {
                        return Err(invalid(*gene, "terminal genes have no arguments"))
                    }
                    Gene::Call { args, .. } => {
                        if *slot >= args.len() {
                            return Err(invalid(*gene, "argument slot out of range"));
                        }
                        args[*slot] = *target;
                    }
                }
            }
        }
    }
    Ok(Chromosome::new(genes))
}

/// Per-symbol mutation.
///
/// For each gene, the head is redrawn with probability `prob_per_symbol`
/// (gene 0 can only become another terminal, and a redrawn function head
/// gets fresh pointers). When the head stays, each argument pointer of a
/// call gene is redrawn independently with the same probability.
pub fn mutate(
    c: &Chromosome,
    ps: &PrimitiveSet,
    prob_per_symbol: f64,
    rng: &mut Rng,
) -> Chromosome {
    let mut edits = Vec::new();
    for (i, gene) in c.genes().iter().enumerate() {
        if rng.chance(prob_per_symbol) {
            edits.push(SymbolEdit::Head {
                gene: i,
                new: random_gene(ps, i, rng),
            });
        } else if let Gene::Call { args, .. } = gene {
            for slot in 0..args.len() {
                if rng.chance(prob_per_symbol) {
                    edits.push(SymbolEdit::Arg {
                        gene: i,
                        slot,
                        target: rng.below(i),
                    });
                }
            }
        }
    }
    apply_symbol_edits(c, ps, &edits).expect("generated edits preserve validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chromosome::FunctionSymbol;
    use crate::testutil::arith_inputs;

    /// [b, a*a, (a*a)+b, a, ((a*a)+b)*(a*a), a, b-a] over + - * /.
    fn parent_one() -> Chromosome {
        Chromosome::new(vec![
            Gene::Terminal(1),
            Gene::Call { function: 2, args: vec![0, 0] },
            Gene::Call { function: 0, args: vec![1, 0] },
            Gene::Terminal(0),
            Gene::Call { function: 2, args: vec![2, 1] },
            Gene::Terminal(0),
            Gene::Call { function: 1, args: vec![0, 3] },
        ])
    }

    /// [a, b, a+b, c, d, c+d, (a+b)*(c+d)].
    fn parent_two() -> Chromosome {
        Chromosome::new(vec![
            Gene::Terminal(0),
            Gene::Terminal(1),
            Gene::Call { function: 0, args: vec![0, 1] },
            Gene::Terminal(2),
            Gene::Terminal(3),
            Gene::Call { function: 0, args: vec![3, 4] },
            Gene::Call { function: 2, args: vec![2, 5] },
        ])
    }

    #[test]
    fn one_point_at_cut_three_swaps_tails() {
        let (o1, o2) = crossover_one_point_at(&parent_one(), &parent_two(), 3).unwrap();
        assert_eq!(
            o1,
            Chromosome::new(vec![
                Gene::Terminal(1),
                Gene::Call { function: 2, args: vec![0, 0] },
                Gene::Call { function: 0, args: vec![1, 0] },
                Gene::Terminal(2),
                Gene::Terminal(3),
                Gene::Call { function: 0, args: vec![3, 4] },
                Gene::Call { function: 2, args: vec![2, 5] },
            ])
        );
        assert_eq!(
            o2,
            Chromosome::new(vec![
                Gene::Terminal(0),
                Gene::Terminal(1),
                Gene::Call { function: 0, args: vec![0, 1] },
                Gene::Terminal(0),
                Gene::Call { function: 2, args: vec![2, 1] },
                Gene::Terminal(0),
                Gene::Call { function: 1, args: vec![0, 3] },
            ])
        );
    }

    #[test]
    fn two_point_at_cuts_two_five_swaps_middle() {
        let (o1, o2) = crossover_two_point_at(&parent_one(), &parent_two(), 2, 5).unwrap();
        assert_eq!(
            o1,
            Chromosome::new(vec![
                Gene::Terminal(1),
                Gene::Call { function: 2, args: vec![0, 0] },
                Gene::Call { function: 0, args: vec![0, 1] },
                Gene::Terminal(2),
                Gene::Terminal(3),
                Gene::Terminal(0),
                Gene::Call { function: 1, args: vec![0, 3] },
            ])
        );
        assert_eq!(
            o2,
            Chromosome::new(vec![
                Gene::Terminal(0),
                Gene::Terminal(1),
                Gene::Call { function: 0, args: vec![1, 0] },
                Gene::Terminal(0),
                Gene::Call { function: 2, args: vec![2, 1] },
                Gene::Call { function: 0, args: vec![3, 4] },
                Gene::Call { function: 2, args: vec![2, 5] },
            ])
        );
    }

    #[test]
    fn uniform_masked_interleaves_genes() {
        let mask = [false, true, true, false, true, false, true];
        let (o1, o2) = crossover_uniform_masked(&parent_one(), &parent_two(), &mask).unwrap();
        assert_eq!(
            o1,
            Chromosome::new(vec![
                Gene::Terminal(0),
                Gene::Call { function: 2, args: vec![0, 0] },
                Gene::Call { function: 0, args: vec![1, 0] },
                Gene::Terminal(2),
                Gene::Call { function: 2, args: vec![2, 1] },
                Gene::Call { function: 0, args: vec![3, 4] },
                Gene::Call { function: 1, args: vec![0, 3] },
            ])
        );
        assert_eq!(
            o2,
            Chromosome::new(vec![
                Gene::Terminal(1),
                Gene::Terminal(1),
                Gene::Call { function: 0, args: vec![0, 1] },
                Gene::Terminal(0),
                Gene::Terminal(3),
                Gene::Terminal(0),
                Gene::Call { function: 2, args: vec![2, 5] },
            ])
        );
    }

    #[test]
    fn uniform_all_true_mask_clones_parents() {
        let mask = [true; 7];
        let (o1, o2) = crossover_uniform_masked(&parent_one(), &parent_two(), &mask).unwrap();
        assert_eq!(o1, parent_one());
        assert_eq!(o2, parent_two());
    }

    #[test]
    fn one_point_keeps_first_gene_from_each_parent() {
        for seed in 0..500 {
            let mut rng = Rng::new(seed);
            let (o1, o2) = crossover_one_point(&parent_one(), &parent_two(), &mut rng).unwrap();
            assert_eq!(o1.gene(0), parent_one().gene(0));
            assert_eq!(o2.gene(0), parent_two().gene(0));
            assert_eq!(o1.gene(6), parent_two().gene(6));
            assert_eq!(o2.gene(6), parent_one().gene(6));
        }
    }

    #[test]
    fn single_gene_one_point_clones() {
        let a = Chromosome::new(vec![Gene::Terminal(0)]);
        let b = Chromosome::new(vec![Gene::Terminal(1)]);
        let mut rng = Rng::new(1);
        let (o1, o2) = crossover_one_point(&a, &b, &mut rng).unwrap();
        assert_eq!(o1, a);
        assert_eq!(o2, b);
    }

    #[test]
    fn two_point_adjacent_cuts_swap_one_gene() {
        let (o1, _) = crossover_two_point_at(&parent_one(), &parent_two(), 3, 4).unwrap();
        let mut expected = parent_one().genes().to_vec();
        expected[3] = parent_two().gene(3).clone();
        assert_eq!(o1, Chromosome::new(expected));
    }

    #[test]
    fn two_point_draws_two_distinct_interior_cuts() {
        for seed in 0..500 {
            let mut rng = Rng::new(seed);
            let (o1, o2) = crossover_two_point(&parent_one(), &parent_two(), &mut rng).unwrap();
            assert_eq!(o1.gene(0), parent_one().gene(0));
            assert_eq!(o2.gene(0), parent_two().gene(0));
            let swapped: Vec<usize> = (0..7)
                .filter(|&i| o1.gene(i) != parent_one().gene(i))
                .collect();
            assert!(!swapped.is_empty());
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let short = Chromosome::new(vec![Gene::Terminal(0)]);
        assert_eq!(
            crossover_one_point_at(&parent_one(), &short, 1).unwrap_err(),
            OperatorError::LengthMismatch { left: 7, right: 1 }
        );
    }

    #[test]
    fn bad_cuts_are_rejected() {
        let e = crossover_one_point_at(&parent_one(), &parent_two(), 0).unwrap_err();
        assert_eq!(e, OperatorError::BadCut { cut: 0, length: 7 });
        let e = crossover_one_point_at(&parent_one(), &parent_two(), 7).unwrap_err();
        assert_eq!(e, OperatorError::BadCut { cut: 7, length: 7 });
        let e = crossover_two_point_at(&parent_one(), &parent_two(), 4, 4).unwrap_err();
        assert_eq!(e, OperatorError::BadCutPair { first: 4, second: 4 });
        let a = Chromosome::new(vec![Gene::Terminal(0), Gene::Terminal(0)]);
        let b = Chromosome::new(vec![Gene::Terminal(1), Gene::Terminal(1)]);
        let mut rng = Rng::new(1);
        assert_eq!(
            crossover_two_point(&a, &b, &mut rng).unwrap_err(),
            OperatorError::TooShort { length: 2, needed: 3 }
        );
    }

    #[test]
    fn edits_replace_head_and_pointer() {
        let c = Chromosome::new(vec![
            Gene::Terminal(0),
            Gene::Call { function: 2, args: vec![0, 0] },
            Gene::Terminal(1),
            Gene::Call { function: 2, args: vec![1, 1] },
            Gene::Terminal(1),
            Gene::Call { function: 0, args: vec![2, 4] },
            Gene::Terminal(0),
        ]);
        let ps = arith_inputs(2);
        let o = apply_symbol_edits(
            &c,
            &ps,
            &[
                SymbolEdit::Head {
                    gene: 2,
                    new: Gene::Call { function: 0, args: vec![0, 1] },
                },
                SymbolEdit::Arg { gene: 5, slot: 0, target: 0 },
            ],
        )
        .unwrap();
        assert_eq!(
            o,
            Chromosome::new(vec![
                Gene::Terminal(0),
                Gene::Call { function: 2, args: vec![0, 0] },
                Gene::Call { function: 0, args: vec![0, 1] },
                Gene::Call { function: 2, args: vec![1, 1] },
                Gene::Terminal(1),
                Gene::Call { function: 0, args: vec![0, 4] },
                Gene::Terminal(0),
            ])
        );
        assert!(o.is_valid(&ps));
    }

    #[test]
    fn edits_that_break_rules_are_rejected() {
        let ps = arith_inputs(2);
        let c = Chromosome::new(vec![Gene::Terminal(0), Gene::Call { function: 0, args: vec![0, 0] }]);
        let head_on_zero = SymbolEdit::Head {
            gene: 0,
            new: Gene::Call { function: 0, args: vec![0, 0] },
        };
        assert!(apply_symbol_edits(&c, &ps, &[head_on_zero]).is_err());
        let forward = SymbolEdit::Arg { gene: 1, slot: 0, target: 1 };
        assert!(apply_symbol_edits(&c, &ps, &[forward]).is_err());
        let bad_slot = SymbolEdit::Arg { gene: 1, slot: 2, target: 0 };
        assert!(apply_symbol_edits(&c, &ps, &[bad_slot]).is_err());
    }

    #[test]
    fn mutation_probability_zero_is_identity() {
        let ps = arith_inputs(4);
        let c = parent_two();
        for seed in 0..50 {
            let mut rng = Rng::new(seed);
            assert_eq!(mutate(&c, &ps, 0.0, &mut rng), c);
        }
    }

    #[test]
    fn mutation_probability_one_rebuilds_every_head() {
        let ps = arith_inputs(4);
        let c = parent_two();
        for seed in 0..200 {
            let mut rng = Rng::new(seed);
            let m = mutate(&c, &ps, 1.0, &mut rng);
            assert_eq!(m.len(), c.len());
            assert!(m.is_valid(&ps), "seed {seed} produced an invalid mutant");
            assert!(matches!(m.gene(0), Gene::Terminal(_)));
        }
    }

    #[test]
    fn head_mutation_into_wider_function_gets_fresh_pointers() {
        let ps = PrimitiveSet::for_inputs(
            2,
            vec![FunctionSymbol::adf_call(1, 3)],
            crate::chromosome::SymbolPolicy::PerSymbolUniform,
        )
        .unwrap();
        let c = Chromosome::new(vec![
            Gene::Terminal(0),
            Gene::Terminal(1),
            Gene::Terminal(0),
            Gene::Terminal(1),
        ]);
        let mut saw_call = false;
        for seed in 0..100 {
            let mut rng = Rng::new(seed);
            let m = mutate(&c, &ps, 1.0, &mut rng);
            assert!(m.is_valid(&ps));
            for (i, gene) in m.genes().iter().enumerate() {
                if let Gene::Call { args, .. } = gene {
                    saw_call = true;
                    assert_eq!(args.len(), 3);
                    assert!(args.iter().all(|&a| a < i));
                }
            }
        }
        assert!(saw_call);
    }
}
