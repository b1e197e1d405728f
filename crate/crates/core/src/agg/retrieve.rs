//! Concrete controls from an optimal path of aggregated controls.

use crate::cascade::{simulate_controls, surviving, ControlBox, NetworkState};
use crate::error::{Error, Result};
use crate::geometry::{clip, Hyperplane};
use crate::net::Network;

use super::{control_objective, expand, SearchResult};

/// Builds a control sequence whose simulated trajectory follows `result.path` and whose
/// objective is within `epsilon` of the aggregated value.
///
/// The last control is the final-stage maximizer moved towards the centroid of its cell by at
/// most `epsilon / |controlled nodes| / 2`. Earlier controls are chosen backwards as centroids of
/// the part of each cell that still dominates the next control coordinatewise. When the next
/// control itself realizes a step (same surviving links), it is held instead: near a vertex the
/// dominating part of a cell can be thinner than the geometric tolerance.
pub fn retrieve_control(
    net: &Network,
    state: &NetworkState,
    result: &SearchResult,
    epsilon: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(epsilon > 0.0) {
        return Err(Error::RetrievalFailed {
            step: 0,
            reason: "epsilon must be positive".into(),
        });
    }
    let n = result.path.len();
    if n == 0 {
        return Err(Error::RetrievalFailed {
            step: 0,
            reason: "empty path".into(),
        });
    }
    let m = net.controlled_nodes().len();
    let sigma = control_objective(net);
    let mut controls: Vec<Vec<f64>> = vec![Vec::new(); n];

    let last = &result.path[n - 1];
    let center = &last.region.face(last.region.top()).centroid;
    let dir: Vec<f64> = center
        .iter()
        .zip(&result.terminal)
        .map(|(c, x)| c - x)
        .collect();
    let dist = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let rho = (epsilon / m as f64).min(dist) / 2.0;
    controls[n - 1] = if dist > 0.0 {
        result
            .terminal
            .iter()
            .zip(&dir)
            .map(|(x, d)| x + rho * d / dist)
            .collect()
    } else {
        result.terminal.clone()
    };

    for t in (0..n - 1).rev() {
        let next = controls[t + 1].clone();
        let before = if t == 0 {
            &state.active
        } else {
            &result.path[t - 1].next_active
        };
        let full = expand(net, &next);
        let in_box = t > 0 || ControlBox::of(&state.p).contains(&full, 0.0);
        if in_box && surviving(net, before, &full).is_ok_and(|a| a == result.path[t].next_active) {
            controls[t] = next;
            continue;
        }
        let mut q = result.path[t].region.clone();
        for j in 0..m {
            if sigma[j] == 0.0 {
                continue;
            }
            let h = Hyperplane::axis(m, j, next[j]);
            let keep = if sigma[j] > 0.0 { 1 } else { -1 };
            q = clip(&q, &h, keep).ok_or_else(|| Error::RetrievalFailed {
                step: t,
                reason: format!("no control in the cell dominates the next one on coordinate {j}"),
            })?;
        }
        controls[t] = q.face(q.top()).centroid.clone();
    }

    let full: Vec<Vec<f64>> = controls.iter().map(|x| expand(net, x)).collect();
    verify_controls(net, state, result, &full, epsilon)?;
    Ok(full)
}

/// Simulates `controls` and checks the active sets along `result.path`, terminal feasibility and
/// the objective gap.
pub fn verify_controls(
    net: &Network,
    state: &NetworkState,
    result: &SearchResult,
    controls: &[Vec<f64>],
    epsilon: f64,
) -> Result<()> {
    let (states, feasible) =
        simulate_controls(net, state, controls).map_err(|e| Error::RetrievalFailed {
            step: 0,
            reason: format!("simulation rejected the controls: {e}"),
        })?;
    for (t, step) in result.path.iter().enumerate().take(controls.len() - 1) {
        if states[t + 1].active != step.next_active {
            return Err(Error::RetrievalFailed {
                step: t,
                reason: format!(
                    "active set {:?} differs from the planned {:?}",
                    states[t + 1].active,
                    step.next_active
                ),
            });
        }
    }
    if !feasible {
        return Err(Error::RetrievalFailed {
            step: controls.len() - 1,
            reason: "terminal state is infeasible".into(),
        });
    }
    let value = net.objective(controls.last().unwrap());
    if value < result.value - epsilon {
        return Err(Error::RetrievalFailed {
            step: controls.len() - 1,
            reason: format!(
                "objective {value} falls short of {} by more than {epsilon}",
                result.value
            ),
        });
    }
    Ok(())
}
