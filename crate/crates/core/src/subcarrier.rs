//! Subcarrier assignment.
//!
//! Every organization prices every subcarrier by its optimal power cost; the
//! resulting square matrix is solved exactly as a linear assignment problem.

use num_traits::{Bounded, Num};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::model::Scenario;
use crate::power_sca::{PowerProblem, ScaParams};
use crate::scalar::Scalar;

/// Default cost of an (organization, subcarrier) pair that cannot meet the
/// latency bound.
pub const DEFAULT_PENALTY: f64 = 1e12;

/// Element type accepted by [`hungarian`]: signed integers for exact
/// arithmetic, or floats.
pub trait AssignCost: Copy + PartialOrd + Num + Bounded + std::fmt::Debug {
    fn is_finite_cost(self) -> bool;
}

macro_rules! assign_cost_float {
    ($($t:ty),*) => {$(
        impl AssignCost for $t {
            fn is_finite_cost(self) -> bool { self.is_finite() }
        }
    )*};
}
macro_rules! assign_cost_int {
    ($($t:ty),*) => {$(
        impl AssignCost for $t {
            fn is_finite_cost(self) -> bool { true }
        }
    )*};
}
assign_cost_float!(f32, f64);
assign_cost_int!(i32, i64, i128);

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<C> {
    /// `mapping[j]` is the subcarrier given to organization `j`.
    pub mapping: Vec<usize>,
    pub total_cost: C,
}

/// Minimum-cost perfect matching of a square cost matrix.
///
/// Shortest augmenting path formulation with row and column potentials,
/// `O(n^3)`. Rows are inserted in index order and the lowest column wins
/// every tie, so results are deterministic.
pub fn hungarian<C: AssignCost>(matrix: &[Vec<C>]) -> Result<Assignment<C>> {
    let n = matrix.len();
    if let Some((i, row)) = matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(invalid(format!("cost matrix is not square: row {i} has {} entries, expected {n}", row.len())));
    }
    if matrix.iter().flatten().any(|c| !c.is_finite_cost()) {
        return Err(invalid("cost matrix contains non-finite entries"));
    }
    if n == 0 {
        return Ok(Assignment { mapping: Vec::new(), total_cost: C::zero() });
    }

    let inf = C::max_value();
    // 1-based; index 0 is the virtual column the current row starts from.
    let mut u = vec![C::zero(); n + 1];
    let mut v = vec![C::zero(); n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut min_v = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = matrix[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < min_v[j] {
                    min_v[j] = cur;
                    way[j] = j0;
                }
                if min_v[j] < delta {
                    delta = min_v[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] = u[row_of[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    min_v[j] = min_v[j] - delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut mapping = vec![0; n];
    for j in 1..=n {
        mapping[row_of[j] - 1] = j - 1;
    }
    let total_cost = mapping.iter().enumerate().fold(C::zero(), |acc, (i, &j)| acc + matrix[i][j]);
    Ok(Assignment { mapping, total_cost })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    /// `values[j][n]`: optimal power cost of org `j` on subcarrier `n`, or the penalty.
    pub values: Vec<Vec<T>>,
    /// Power achieving `values[j][n]` (`p_max` for infeasible pairs).
    pub powers: Vec<Vec<T>>,
    pub feasible: Vec<Vec<bool>>,
}

impl<T: Scalar> CostMatrix<T> {
    /// Organizations for which no subcarrier meets the latency bound.
    pub fn stranded_orgs(&self) -> Vec<usize> {
        self.feasible.iter().enumerate().filter(|(_, row)| !row.iter().any(|&f| f)).map(|(j, _)| j).collect()
    }

    /// True when `assignment` only selects feasible pairs.
    pub fn is_feasible(&self, assignment: &[usize]) -> bool {
        assignment.iter().enumerate().all(|(j, &n)| self.feasible[j][n])
    }
}

/// Previous assignment and powers, used to warm start each organization on
/// the subcarrier it held in the last iteration.
#[derive(Debug, Clone, Copy)]
pub struct WarmStart<'a, T> {
    pub assignment: &'a [usize],
    pub powers: &'a [T],
}

/// Prices every (organization, subcarrier) pair by running the SCA power
/// optimizer under the given latency bound and frequencies.
///
/// Pairs without a warm start begin at `p_max`. Rows are priced in parallel.
pub fn build_cost_matrix<T: Scalar>(
    scenario: &Scenario<T>,
    latency_bound: T,
    frequencies: &[T],
    receive_times: &[T],
    warm: Option<WarmStart<'_, T>>,
    sca: &ScaParams<T>,
    penalty: T,
) -> CostMatrix<T> {
    let j_count = scenario.num_orgs();
    let rows: Vec<(Vec<T>, Vec<T>, Vec<bool>)> = (0..j_count)
        .into_par_iter()
        .map(|j| {
            let mut values = vec![penalty; j_count];
            let mut powers = vec![scenario.params.sbs_max_power; j_count];
            let mut feasible = vec![false; j_count];
            for n in 0..j_count {
                let prob = PowerProblem::for_pair(
                    scenario,
                    j,
                    n,
                    latency_bound,
                    frequencies[j],
                    receive_times[j],
                    sca.clone(),
                    penalty,
                );
                let start = match warm {
                    Some(w) if w.assignment[j] == n => w.powers[j],
                    _ => prob.p_max,
                };
                let result = prob.optimize(start);
                if result.feasible {
                    values[n] = result.objective;
                    powers[n] = result.power;
                    feasible[n] = true;
                }
            }
            (values, powers, feasible)
        })
        .collect();
    let mut values = Vec::with_capacity(j_count);
    let mut powers = Vec::with_capacity(j_count);
    let mut feasible = Vec::with_capacity(j_count);
    for (v, p, f) in rows {
        values.push(v);
        powers.push(p);
        feasible.push(f);
    }
    CostMatrix { values, powers, feasible }
}
