//! Reductions from the centered problem: the centerless variant and
//! ε-approximate agreement on `[0, 1]`.

use num_rational::Rational64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::spider::{BranchValue, TaskSpec, Value, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("epsilon {0} outside (0, 1/2]")]
    EpsilonOutOfRange(Rational64),
    #[error("epsilon {epsilon} needs refinement {refinement}; only 1 and 2 are implemented")]
    RefinementTooLarge { epsilon: Rational64, refinement: i64 },
    #[error("approximate agreement needs exactly two values, got {0}")]
    NotBinary(usize),
    #[error("decision {decision} does not fit refinement {refinement}")]
    BadDecision { decision: Vertex, refinement: u8 },
}

/// Turns a centered decision into a centerless one: the center becomes the
/// grade-1 vertex of the process's own input.
pub fn centerless_adapt(decision: Vertex, own_input: Value) -> Vertex {
    if decision.is_center() {
        Vertex::on_branch(own_input, 1)
    } else {
        decision
    }
}

/// ε-approximate agreement solved through connected consensus on two
/// values with `R = ceil(1 / (2ε))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApproxSpec {
    epsilon: Rational64,
    refinement: u8,
}

impl ApproxSpec {
    pub fn new(epsilon: Rational64) -> Result<ApproxSpec, ReductionError> {
        let half = Rational64::new(1, 2);
        if epsilon <= Rational64::zero() || epsilon > half {
            return Err(ReductionError::EpsilonOutOfRange(epsilon));
        }
        let refinement = (Rational64::one() / (epsilon * 2)).ceil().to_integer();
        if refinement > 2 {
            return Err(ReductionError::RefinementTooLarge {
                epsilon,
                refinement,
            });
        }
        Ok(ApproxSpec {
            epsilon,
            refinement: refinement as u8,
        })
    }

    pub fn epsilon(&self) -> Rational64 {
        self.epsilon
    }

    pub fn refinement(&self) -> u8 {
        self.refinement
    }
}

/// Position of `decision` on the path `(0,R) … (0,1) (⊥,0) (1,1) … (1,R)`,
/// scaled to `[0, 1]`.
pub fn approx_decode(
    decision: Vertex,
    approx: &ApproxSpec,
    task: &TaskSpec,
) -> Result<Rational64, ReductionError> {
    if task.value_count != 2 {
        return Err(ReductionError::NotBinary(task.value_count));
    }
    let r = approx.refinement;
    if decision.grade > r || decision.is_center() != (decision.grade == 0) {
        return Err(ReductionError::BadDecision {
            decision,
            refinement: r,
        });
    }
    let r = i64::from(r);
    let g = i64::from(decision.grade);
    let index = match decision.value {
        BranchValue::Bottom => r,
        BranchValue::Val(Value(0)) => r - g,
        BranchValue::Val(_) => r + g,
    };
    Ok(Rational64::new(index, 2 * r))
}

/// Encodes a real input in `{0, 1}` as a value.
pub fn approx_input(x: Rational64) -> Option<Value> {
    if x.is_zero() {
        Some(Value(0))
    } else if x.is_one() {
        Some(Value(1))
    } else {
        None
    }
}
