use alloc::vec;

use serde::{Deserialize, Serialize};

use crate::task::{FactSet, GroundedTask};

/// Non-negative cost, possibly infinite. `Finite(_) < Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Cost {
    Finite(u32),
    Infinite,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Cost::Finite(c) => Some(c),
            Cost::Infinite => None,
        }
    }

    pub fn plus(self, c: u32) -> Cost {
        match self {
            Cost::Finite(x) => Cost::Finite(x.saturating_add(c)),
            Cost::Infinite => Cost::Infinite,
        }
    }
}

/// `h_max`: relaxed (delete- and negative-precondition-free) fixpoint where
/// a fact costs 0 if true in `state`, otherwise the cheapest achiever's
/// cost plus the maximum cost of its preconditions. The value is the
/// maximum over goal facts.
pub fn hmax(task: &GroundedTask, state: &FactSet) -> Cost {
    let mut cost = vec![Cost::Infinite; task.fact_count()];
    for f in state.iter() {
        cost[f] = Cost::ZERO;
    }
    loop {
        let mut changed = false;
        for a in &task.actions {
            let mut pre = Cost::ZERO;
            for &p in &a.pre_pos {
                pre = pre.max(cost[p]);
                if pre == Cost::Infinite {
                    break;
                }
            }
            let via = pre.plus(a.cost);
            if via == Cost::Infinite {
                continue;
            }
            for &f in &a.add {
                if via < cost[f] {
                    cost[f] = via;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    task.goal
        .iter()
        .map(|&g| cost[g])
        .max()
        .unwrap_or(Cost::ZERO)
}
