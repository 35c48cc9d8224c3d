//! Bracket the top growth rate of the pair of elementary 2x2 matrices.

use std::collections::BTreeMap;

use curverad::algorithms::metric_jsr;
use curverad::cocycle::{Cocycle, GeneratorWord};
use curverad::matrix::{MatrixTarget, RationalMatrix};
use curverad::symbolic::TransitionSystem;

fn main() -> curverad::Result<()> {
    let a = RationalMatrix::from_int_rows(&[vec![1, 1], vec![0, 1]])?;
    let b = RationalMatrix::from_int_rows(&[vec![1, 0], vec![1, 1]])?;
    let gens = BTreeMap::from([("A".to_owned(), a), ("B".to_owned(), b)]);
    let cocycle = Cocycle::new(
        TransitionSystem::full_shift(2)?,
        MatrixTarget::new(2, gens)?,
        vec![GeneratorWord::parse("A")?, GeneratorWord::parse("B")?],
    )?;
    let bracket = metric_jsr(&cocycle, 20, 8)?;
    println!(
        "growth rate in [{:.6}, {:.6}], witness period {}",
        bracket.lower,
        bracket.upper,
        bracket.witness.len()
    );
    Ok(())
}
