//! Failure rule, controlled cascade dynamics and admissible controls.

use crate::error::{Error, Result};
use crate::flow::{component_labels, compute_flow, connected_components, EPS_NUM};
use crate::linkset::LinkSet;
use crate::net::Network;

/// Additive slack on capacity comparisons; a link at exactly `|f| = c` survives.
pub const EPS_CAP: f64 = 1e-9;

/// Dynamics state: active links and the supply-demand vector (one entry per node).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub active: LinkSet,
    pub p: Vec<f64>,
}

impl NetworkState {
    pub fn new(active: LinkSet, p: Vec<f64>) -> Self {
        NetworkState { active, p }
    }

    pub fn initial(net: &Network, p: Vec<f64>) -> Self {
        NetworkState {
            active: net.all_links(),
            p,
        }
    }
}

/// Componentwise bounds of the monotone shedding box `Π(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ControlBox {
    pub fn of(p: &[f64]) -> Self {
        ControlBox {
            lower: p.iter().map(|&x| x.min(0.0)).collect(),
            upper: p.iter().map(|&x| x.max(0.0)).collect(),
        }
    }

    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&x, (&lo, &hi))| x >= lo - tol && x <= hi + tol)
    }
}

/// `U(E, p) = Π(p) ∩ B_E`: the box plus one balance equation per component.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleSet {
    pub bounds: ControlBox,
    /// Node groups whose controls must sum to zero.
    pub balance_groups: Vec<Vec<usize>>,
    /// True when the set reduces to `{0}`.
    pub trivial: bool,
}

impl AdmissibleSet {
    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        self.bounds.contains(u, tol)
            && self
                .balance_groups
                .iter()
                .all(|g| g.iter().map(|&v| u[v]).sum::<f64>().abs() <= tol)
    }
}

pub fn admissible_set(net: &Network, state: &NetworkState) -> AdmissibleSet {
    let bounds = ControlBox::of(&state.p);
    let components = connected_components(net, &state.active);
    let balance_groups: Vec<Vec<usize>> = components
        .into_iter()
        .filter(|c| c.iter().any(|&v| bounds.lower[v] != bounds.upper[v]))
        .collect();
    // a component with nonzero range only on one sign side can only carry zero
    let trivial = balance_groups.iter().all(|g| {
        let has_pos = g.iter().any(|&v| bounds.upper[v] > 0.0);
        let has_neg = g.iter().any(|&v| bounds.lower[v] < 0.0);
        !(has_pos && has_neg)
    });
    AdmissibleSet {
        bounds,
        balance_groups,
        trivial,
    }
}

fn check_admissible(net: &Network, state: &NetworkState, u: &[f64]) -> Result<()> {
    let tol = EPS_NUM * (1.0 + state.p.iter().fold(0.0f64, |a, &x| a.max(x.abs())));
    let bounds = ControlBox::of(&state.p);
    for v in 0..net.node_count() {
        if u[v] < bounds.lower[v] - tol || u[v] > bounds.upper[v] + tol {
            return Err(Error::InadmissibleControl {
                node: v,
                reason: format!(
                    "{} outside [{}, {}]",
                    u[v], bounds.lower[v], bounds.upper[v]
                ),
            });
        }
    }
    for comp in connected_components(net, &state.active) {
        let s: f64 = comp.iter().map(|&v| u[v]).sum();
        if s.abs() > tol {
            return Err(Error::InadmissibleControl {
                node: comp[0],
                reason: format!("component imbalance {s:e}"),
            });
        }
    }
    Ok(())
}

pub(crate) fn surviving(net: &Network, active: &LinkSet, u: &[f64]) -> Result<LinkSet> {
    let sol = compute_flow(net, active, u)?;
    let mut next = active.clone();
    for i in active.iter() {
        let f = sol.flows[i].unwrap_or(0.0);
        if f.abs() > net.link(i).capacity + EPS_CAP {
            next.remove(i);
        }
    }
    Ok(next)
}

/// One step of the controlled dynamics: apply `u`, then drop overloaded links.
pub fn failure_step(net: &Network, state: &NetworkState, u: &[f64]) -> Result<NetworkState> {
    check_admissible(net, state, u)?;
    let balanced = balance_exactly(net, &state.active, u);
    let active = surviving(net, &state.active, &balanced)?;
    Ok(NetworkState {
        active,
        p: u.to_vec(),
    })
}

/// Removes round-off imbalance so flow evaluation accepts an admissible control.
fn balance_exactly(net: &Network, active: &LinkSet, u: &[f64]) -> Vec<f64> {
    let mut out = u.to_vec();
    for comp in connected_components(net, active) {
        let s: f64 = comp.iter().map(|&v| u[v]).sum();
        if s != 0.0 {
            let k = comp.len() as f64;
            for &v in &comp {
                out[v] -= s / k;
            }
        }
    }
    out
}

/// Feasible states: balanced per component and every active flow within capacity.
pub fn is_feasible(net: &Network, state: &NetworkState) -> bool {
    match compute_flow(net, &state.active, &state.p) {
        Err(_) => false,
        Ok(sol) => state
            .active
            .iter()
            .all(|i| sol.flows[i].unwrap_or(0.0).abs() <= net.link(i).capacity + EPS_CAP),
    }
}

/// Injection with every unbalanced component zeroed.
pub fn zero_unbalanced(net: &Network, active: &LinkSet, p: &[f64]) -> Vec<f64> {
    let components = connected_components(net, active);
    let mut out = p.to_vec();
    for comp in &components {
        let s: f64 = comp.iter().map(|&v| p[v]).sum();
        if s.abs() > EPS_NUM {
            for &v in comp {
                out[v] = 0.0;
            }
        }
    }
    out
}

/// True when `p` is balanced on every component of `active`.
pub fn is_balanced(net: &Network, active: &LinkSet, p: &[f64]) -> bool {
    let components = connected_components(net, active);
    let label = component_labels(&components, net.node_count());
    let mut sums = vec![0.0; components.len()];
    for (v, &x) in p.iter().enumerate() {
        sums[label[v]] += x;
    }
    sums.iter().all(|s| s.abs() <= EPS_NUM)
}

/// Uncontrolled cascade: repeatedly apply `u = p` (unbalanced components zeroed) until the state
/// is feasible or `horizon` steps were taken. The first entry is the initial state.
pub fn run_uncontrolled(net: &Network, state: &NetworkState, horizon: usize) -> Vec<NetworkState> {
    let mut out = vec![state.clone()];
    let mut cur = state.clone();
    for _ in 0..horizon {
        if is_feasible(net, &cur) {
            break;
        }
        let u = zero_unbalanced(net, &cur.active, &cur.p);
        let active = surviving(net, &cur.active, &u).expect("zeroed injection is balanced");
        let next = NetworkState { active, p: u };
        if next == cur {
            break;
        }
        out.push(next.clone());
        cur = next;
    }
    out
}

/// Simulates a control sequence and reports whether it is feasible: every control admissible
/// and the state after the last control feasible. Returns the visited states.
pub fn simulate_controls(
    net: &Network,
    initial: &NetworkState,
    controls: &[Vec<f64>],
) -> Result<(Vec<NetworkState>, bool)> {
    if controls.is_empty() {
        return Ok((vec![initial.clone()], is_feasible(net, initial)));
    }
    let mut states = vec![initial.clone()];
    let mut cur = initial.clone();
    for u in controls {
        cur = failure_step(net, &cur, u)?;
        states.push(cur.clone());
    }
    let last = states.len() - 2;
    let terminal = NetworkState {
        active: states[last].active.clone(),
        p: cur.p.clone(),
    };
    Ok((states, is_feasible(net, &terminal)))
}
