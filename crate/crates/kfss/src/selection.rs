//! Budget-constrained sensor-subset optimization: greedy selection and the
//! exhaustive optimal oracle, plus the algorithm-vs-optimal trace ratio.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::riccati::{solve_dare, Selection, SensorCatalog, SteadyState, SystemModel};

/// Enumeration guard for the exhaustive optimizer.
pub const MAX_EXHAUSTIVE_SENSORS: usize = 24;

/// Outcome of an optimizer run. `picks` and `trace_history` are populated by
/// the greedy algorithm only.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub selection: Selection,
    pub steady: SteadyState,
    /// 0-based sensor indices in the order they were chosen.
    pub picks: Vec<usize>,
    /// Best trace after each greedy round (`+∞` encodes unbounded).
    pub trace_history: Vec<f64>,
}

/// Trace ratio of an algorithm's selection against a reference optimum, as
/// extended reals (`+∞` encodes an unbounded steady state).
#[derive(Debug, Clone, Copy)]
pub struct RatioReport {
    pub trace_alg: f64,
    pub trace_opt: f64,
    pub ratio: f64,
}

/// Greedy selection: `budget_count` rounds, each adding the sensor whose
/// inclusion minimizes the steady-state trace. Ties break toward the lowest
/// sensor index. Requires unit sensor costs.
pub fn greedy_select(
    sys: &SystemModel,
    catalog: &SensorCatalog,
    budget_count: usize,
) -> Result<SelectionResult> {
    let q = catalog.q();
    if budget_count > q {
        return Err(Error::BudgetExceedsCatalog {
            budget: budget_count,
            q,
        });
    }
    if budget_count == 0 {
        return Err(Error::DomainError(
            "greedy budget must select at least one sensor".into(),
        ));
    }
    if catalog.costs().iter().any(|&c| c != 1.0) {
        return Err(Error::DomainError(
            "greedy selection is defined for unit sensor costs only".into(),
        ));
    }
    let mut chosen = vec![false; q];
    let mut picks = Vec::with_capacity(budget_count);
    let mut trace_history = Vec::with_capacity(budget_count);
    let mut best_steady: Option<SteadyState> = None;
    for _ in 0..budget_count {
        let candidates: Vec<usize> = (0..q).filter(|&i| !chosen[i]).collect();
        let round_best = candidates
            .par_iter()
            .map(|&i| {
                let mut mu = chosen.clone();
                mu[i] = true;
                let sel = Selection::new(mu, budget_count as f64)?;
                let steady = solve_dare(sys, catalog, &sel)?;
                Ok((i, steady))
            })
            .try_reduce_with(|a, b| Ok(pick_better(a, b)))
            .expect("at least one candidate per round")?;
        let (idx, steady) = round_best;
        chosen[idx] = true;
        picks.push(idx);
        trace_history.push(steady.trace_extended());
        best_steady = Some(steady);
    }
    Ok(SelectionResult {
        selection: Selection::new(chosen, budget_count as f64)?,
        steady: best_steady.expect("budget_count >= 1"),
        picks,
        trace_history,
    })
}

/// Lower trace wins; exact trace ties resolve to the lower sensor index.
fn pick_better(a: (usize, SteadyState), b: (usize, SteadyState)) -> (usize, SteadyState) {
    let (ta, tb) = (a.1.trace_extended(), b.1.trace_extended());
    if tb < ta || (tb == ta && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// Exhaustive optimum over all feasible selections `bᵀμ ≤ B`.
///
/// Enumerates bitmasks in counting order (least-significant bit = sensor 1);
/// trace ties resolve to the lexicographically smallest indicator vector.
pub fn exhaustive_select(
    sys: &SystemModel,
    catalog: &SensorCatalog,
    budget: f64,
) -> Result<SelectionResult> {
    let q = catalog.q();
    if q > MAX_EXHAUSTIVE_SENSORS {
        return Err(Error::TooManySensors {
            q,
            max: MAX_EXHAUSTIVE_SENSORS,
        });
    }
    if budget < 0.0 || !budget.is_finite() {
        return Err(Error::DomainError(format!(
            "budget must be nonnegative and finite, got {budget}"
        )));
    }
    let best = (0u64..(1u64 << q))
        .into_par_iter()
        .map(|mask| {
            let mu: Vec<bool> = (0..q).map(|i| mask & (1 << i) != 0).collect();
            let cost: f64 = mu
                .iter()
                .zip(catalog.costs())
                .filter(|(&on, _)| on)
                .map(|(_, &c)| c)
                .sum();
            if cost > budget {
                return Ok(None);
            }
            let sel = Selection::new(mu.clone(), budget)?;
            let steady = solve_dare(sys, catalog, &sel)?;
            Ok(Some((mu, steady)))
        })
        .try_reduce(
            || None,
            |a, b| {
                Ok(match (a, b) {
                    (None, x) | (x, None) => x,
                    (Some(a), Some(b)) => Some(pick_optimum(a, b)),
                })
            },
        )?
        .expect("the empty selection is always feasible");
    let (mu, steady) = best;
    Ok(SelectionResult {
        selection: Selection::new(mu, budget)?,
        steady,
        picks: Vec::new(),
        trace_history: Vec::new(),
    })
}

fn pick_optimum(
    a: (Vec<bool>, SteadyState),
    b: (Vec<bool>, SteadyState),
) -> (Vec<bool>, SteadyState) {
    let (ta, tb) = (a.1.trace_extended(), b.1.trace_extended());
    if tb < ta || (tb == ta && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// Extended-real trace ratio of `alg` against `opt`.
pub fn ratio(alg: &SelectionResult, opt: &SelectionResult) -> RatioReport {
    let trace_alg = alg.steady.trace_extended();
    let trace_opt = opt.steady.trace_extended();
    let ratio = if trace_alg == trace_opt {
        1.0
    } else {
        trace_alg / trace_opt
    };
    RatioReport {
        trace_alg,
        trace_opt,
        ratio,
    }
}
