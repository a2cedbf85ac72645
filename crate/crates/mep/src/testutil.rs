//! Fixtures shared by the unit tests.

use crate::chromosome::{
    arithmetic_functions, Chromosome, Gene, PrimitiveSet, SymbolPolicy,
};
use crate::evaluator::{Dataset, FitnessCase, Mode};

/// Arithmetic vocabulary over `ni` inputs with function ids
/// `+` = 0, `-` = 1, `*` = 2, `/` = 3.
pub(crate) fn arith_inputs(ni: usize) -> PrimitiveSet {
    PrimitiveSet::for_inputs(ni, arithmetic_functions(), SymbolPolicy::PerSymbolUniform).unwrap()
}

/// 8-gene chromosome over a..d used across the evaluator and operator
/// tests: [a, b, a+b, c, d, c+d, (a+b)*d, b+(c+d)].
pub(crate) fn worked_example() -> Chromosome {
    Chromosome::new(vec![
        Gene::Terminal(0),
        Gene::Terminal(1),
        Gene::Call { function: 0, args: vec![0, 1] },
        Gene::Terminal(2),
        Gene::Terminal(3),
        Gene::Call { function: 0, args: vec![3, 4] },
        Gene::Call { function: 2, args: vec![2, 4] },
        Gene::Call { function: 0, args: vec![1, 5] },
    ])
}

/// Single regression case (a,b,c,d) = (7,2,1,5) with target 10.
pub(crate) fn single_case_dataset() -> Dataset {
    Dataset::new(
        4,
        1,
        Mode::Regression,
        vec![FitnessCase::new(vec![7.0, 2.0, 1.0, 5.0], vec![10.0])],
    )
    .unwrap()
}

/// Two regression cases: (7,2,1,5) -> 10 and (12,3,9,1) -> 7.
pub(crate) fn two_case_dataset() -> Dataset {
    Dataset::new(
        4,
        1,
        Mode::Regression,
        vec![
            FitnessCase::new(vec![7.0, 2.0, 1.0, 5.0], vec![10.0]),
            FitnessCase::new(vec![12.0, 3.0, 9.0, 1.0], vec![7.0]),
        ],
    )
    .unwrap()
}
