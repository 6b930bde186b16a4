//! Sums over weakly decreasing index chains `top >= i_1 >= ... >= i_k >= 1`.
//!
//! Each level either sums its index freely below the previous one, or is
//! pinned to it (the collapse used when an `h_{m-1}` factor has `m = 0`).

use crate::error::Result;
use crate::field::Field;

pub type FreeWeight<'a, F> = Box<dyn Fn(i64, i64) -> Result<F> + 'a>;
pub type PinnedWeight<'a, F> = Box<dyn Fn(i64) -> Result<F> + 'a>;

pub enum Level<'a, F> {
    /// `sum_{i=1}^{prev} w(i, prev) * (inner at i)`.
    Free(FreeWeight<'a, F>),
    /// `w(prev) * (inner at prev)`.
    Pinned(PinnedWeight<'a, F>),
}

impl<'a, F> Level<'a, F> {
    pub fn free(w: impl Fn(i64, i64) -> Result<F> + 'a) -> Self {
        Level::Free(Box::new(w))
    }

    pub fn pinned(w: impl Fn(i64) -> Result<F> + 'a) -> Self {
        Level::Pinned(Box::new(w))
    }
}

/// Enumeration strategy. All strategies give identical exact results; the
/// alternatives exist for cross-checking and for larger shapes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum ChainOrder {
    /// Recursive descent, indices visited from 1 upward.
    #[default]
    Descending,
    /// Recursive descent, indices visited from the bound downward.
    Reversed,
    /// Dynamic programming over the level index.
    Memoized,
}

/// Sum over chains below `top` of the level weights times `terminal(i_k)`.
///
/// With no levels the chain is just `top` itself. Otherwise an empty range
/// (`top < 1`) gives zero.
pub fn chain_sum<F: Field>(
    unit: &F,
    top: i64,
    levels: &[Level<'_, F>],
    terminal: &dyn Fn(i64) -> Result<F>,
    order: ChainOrder,
) -> Result<F> {
    if levels.is_empty() {
        return terminal(top);
    }
    if top < 1 {
        return Ok(unit.zero_like());
    }
    match order {
        ChainOrder::Descending => descend(unit, top, levels, terminal, false),
        ChainOrder::Reversed => descend(unit, top, levels, terminal, true),
        ChainOrder::Memoized => memoized(unit, top, levels, terminal),
    }
}

fn descend<F: Field>(
    unit: &F,
    prev: i64,
    levels: &[Level<'_, F>],
    terminal: &dyn Fn(i64) -> Result<F>,
    reversed: bool,
) -> Result<F> {
    let Some((level, rest)) = levels.split_first() else {
        return terminal(prev);
    };
    match level {
        Level::Pinned(w) => Ok(w(prev)? * descend(unit, prev, rest, terminal, reversed)?),
        Level::Free(w) => {
            let mut acc = unit.zero_like();
            let step = |i: i64| -> Result<F> { Ok(w(i, prev)? * descend(unit, i, rest, terminal, reversed)?) };
            if reversed {
                for i in (1..=prev).rev() {
                    acc = acc + step(i)?;
                }
            } else {
                for i in 1..=prev {
                    acc = acc + step(i)?;
                }
            }
            Ok(acc)
        }
    }
}

fn memoized<F: Field>(unit: &F, top: i64, levels: &[Level<'_, F>], terminal: &dyn Fn(i64) -> Result<F>) -> Result<F> {
    // inner[p - 1] is the value of the remaining levels when the previous
    // index equals p.
    let mut inner = (1..=top).map(terminal).collect::<Result<Vec<F>>>()?;
    for level in levels.iter().rev() {
        let mut next = Vec::with_capacity(inner.len());
        for p in 1..=top {
            let v = match level {
                Level::Pinned(w) => w(p)? * inner[(p - 1) as usize].clone(),
                Level::Free(w) => {
                    let mut acc = unit.zero_like();
                    for i in 1..=p {
                        acc = acc + w(i, p)? * inner[(i - 1) as usize].clone();
                    }
                    acc
                }
            };
            next.push(v);
        }
        inner = next;
    }
    Ok(inner.pop().expect("top >= 1"))
}

/// Sum over chains `n >= i_1 >= ... >= i_k >= 1` of
/// `prod_j weight(j, i_j, i_{j-1}) * terminal(i_k)` with `i_0 = n`; `j` is
/// 1-based.
pub fn nested_qsum<F, W, T>(unit: &F, n: i64, k: usize, weight: W, terminal: T) -> Result<F>
where
    F: Field,
    W: Fn(usize, i64, i64) -> Result<F>,
    T: Fn(i64) -> Result<F>,
{
    if n < 1 {
        return Ok(unit.zero_like());
    }
    let weight = &weight;
    let levels: Vec<Level<'_, F>> = (1..=k).map(|j| Level::free(move |i, prev| weight(j, i, prev))).collect();
    chain_sum(unit, n, &levels, &terminal, ChainOrder::Descending)
}
