//! High-precision real backend: infinite identities, real-order
//! continuations and cross-checks of the exact evaluators.

mod bigreal;
mod identities;
mod probe;
mod series;

pub use bigreal::{BigReal, DEFAULT_PRECISION};
pub use identities::{eval_numeric_identity, NumericEvaluation};
pub use probe::probe_noninteger;
pub use series::{
    qpoch_infinite, qpoch_real_order, qpoch_truncated, shifted_sum_real, sum_series, Approx, NumericConfig,
    Truncation, DEFAULT_TERMS, DEFAULT_TOLERANCE, MAX_TERMS,
};

use crate::error::Result;
use crate::field::ExactScalar;
use crate::registry::{eval_pair, EvalOptions, IdentityInstance, Vals};

/// Exact and floating evaluations of a finite identity side by side.
#[derive(Debug, Clone)]
pub struct Agreement {
    pub exact: (ExactScalar, ExactScalar),
    pub real: (BigReal, BigReal),
}

impl Agreement {
    /// Largest deviation of a floating side from its exact value.
    pub fn max_error(&self) -> BigReal {
        let prec = self.real.0.precision();
        let dl = (self.real.0.clone() - BigReal::from_rational(&self.exact.0, prec)).abs();
        let dr = (self.real.1.clone() - BigReal::from_rational(&self.exact.1, prec)).abs();
        dl.max(dr)
    }

    /// Deviation relative to the magnitude of the exact values (at least 1).
    pub fn scaled_error(&self) -> BigReal {
        let prec = self.real.0.precision();
        let one = BigReal::one(prec);
        let scale = BigReal::from_rational(&self.exact.0, prec).abs().max(one);
        use crate::field::Field;
        self.max_error().div(&scale).expect("scale >= 1")
    }
}

/// Evaluate a finite identity with the exact evaluators instantiated over
/// both rationals and `BigReal` at `prec` bits.
pub fn backend_agreement(inst: &IdentityInstance, opts: EvalOptions, prec: usize) -> Result<Agreement> {
    let exact = eval_pair(inst, &Vals::from_env(&crate::field::int(1), &inst.env), opts)?;
    let real = eval_pair(inst, &Vals::from_env(&BigReal::one(prec), &inst.env), opts)?;
    Ok(Agreement { exact, real })
}
