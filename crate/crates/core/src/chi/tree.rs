//! Reduction of a network to a tree whose links stand for two-terminal components, and the
//! feasible aggregate flows of each component.

use std::collections::{BTreeSet, VecDeque};

use crate::agg::line::{LineMode, LineProblem, Span};
use crate::error::{Error, Result};
use crate::linkset::LinkSet;
use crate::net::{Network, NodeRole};

use super::interval::{Interval, IntervalSetF64};

/// Two-terminal piece of the network that a tree link stands for. Positive aggregate flow runs
/// from `child` to `parent`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub links: Vec<usize>,
    pub child: usize,
    pub parent: usize,
    /// Transmission nodes strictly inside the component.
    pub interior: Vec<usize>,
}

/// Tree of supply, demand and junction nodes. Tree node `k` is network node `nodes[k]`; node 0
/// is the root and every other node owns the component joining it to its parent.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTree {
    pub nodes: Vec<usize>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub components: Vec<Option<Component>>,
    /// Tree nodes with every parent before its children, starting at the root.
    pub order: Vec<usize>,
    /// Active links on branches without supply or demand nodes; they never carry flow.
    pub idle_links: Vec<usize>,
}

impl ReducedTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.nodes[0]
    }

    /// Tree index of a network node.
    pub fn index_of(&self, node: usize) -> Option<usize> {
        self.nodes.iter().position(|&v| v == node)
    }

    /// The same tree rooted at network node `node`; components are re-oriented.
    pub fn rerooted(&self, node: usize) -> Result<ReducedTree> {
        let edges: Vec<(usize, usize, Vec<usize>, Vec<usize>)> = self
            .components
            .iter()
            .flatten()
            .map(|c| (c.child, c.parent, c.links.clone(), c.interior.clone()))
            .collect();
        let mut tree = build(&self.nodes, &edges, node)?;
        tree.idle_links = self.idle_links.clone();
        Ok(tree)
    }

    /// Every link covered by a component or idle.
    pub fn covered_links(&self) -> BTreeSet<usize> {
        self.components
            .iter()
            .flatten()
            .flat_map(|c| c.links.iter().copied())
            .chain(self.idle_links.iter().copied())
            .collect()
    }
}

fn is_terminal(net: &Network, v: usize) -> bool {
    net.role(v) != NodeRole::Transmission
}

/// Reduces the active network to a tree by replacing every biconnected piece that touches at
/// most two supply, demand or junction nodes with one link, then merging chains through
/// transmission nodes. Rooted at the first supply or demand node.
pub fn tree_reduce(net: &Network, active: &LinkSet) -> Result<ReducedTree> {
    let root = (0..net.node_count())
        .find(|&v| is_terminal(net, v))
        .ok_or_else(|| Error::NotTreeReducible("no supply or demand nodes".into()))?;
    tree_reduce_rooted(net, active, root)
}

/// [`tree_reduce`] with an explicit root, which must be a supply or demand node.
pub fn tree_reduce_rooted(net: &Network, active: &LinkSet, root: usize) -> Result<ReducedTree> {
    let n = net.node_count();
    if root >= n || !is_terminal(net, root) {
        return Err(Error::NotTreeReducible(
            "the root must be a supply or demand node".into(),
        ));
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for i in active.iter() {
        let l = net.link(i);
        adj[l.tail].push((i, l.head));
        adj[l.head].push((i, l.tail));
    }
    let reached = reachable(&adj, root);
    if let Some(v) = (0..n).find(|&v| is_terminal(net, v) && !reached[v]) {
        return Err(Error::NotTreeReducible(format!(
            "node {} is not connected to node {}",
            net.node_name(v),
            net.node_name(root)
        )));
    }

    let blocks = biconnected_blocks(net, &adj, root);
    let block_nodes: Vec<BTreeSet<usize>> = blocks
        .iter()
        .map(|b| {
            b.iter()
                .flat_map(|&i| [net.link(i).tail, net.link(i).head])
                .collect()
        })
        .collect();

    // peel branches that hold no supply or demand node
    let mut live = vec![true; blocks.len()];
    loop {
        let mut changed = false;
        for b in 0..blocks.len() {
            if !live[b] {
                continue;
            }
            let shared: Vec<usize> = block_nodes[b]
                .iter()
                .copied()
                .filter(|&v| {
                    (0..blocks.len()).any(|o| o != b && live[o] && block_nodes[o].contains(&v))
                })
                .collect();
            let own_terminal = block_nodes[b]
                .iter()
                .any(|&v| is_terminal(net, v) && !shared.contains(&v));
            if shared.len() <= 1 && !own_terminal {
                live[b] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let idle_links: Vec<usize> = (0..blocks.len())
        .filter(|&b| !live[b])
        .flat_map(|b| blocks[b].iter().copied())
        .collect();

    let mut edges: Vec<(usize, usize, Vec<usize>, Vec<usize>)> = Vec::new();
    let mut tree_nodes: BTreeSet<usize> = BTreeSet::new();
    tree_nodes.insert(root);
    for b in (0..blocks.len()).filter(|&b| live[b]) {
        let attach: Vec<usize> = block_nodes[b]
            .iter()
            .copied()
            .filter(|&v| {
                is_terminal(net, v)
                    || (0..blocks.len()).any(|o| o != b && live[o] && block_nodes[o].contains(&v))
            })
            .collect();
        if attach.len() != 2 {
            let names: Vec<&str> = attach.iter().map(|&v| net.node_name(v)).collect();
            return Err(Error::NotTreeReducible(format!(
                "a loop of links touches {} supply, demand or junction nodes ({})",
                attach.len(),
                names.join(", ")
            )));
        }
        let mut links = blocks[b].clone();
        links.sort_unstable();
        let interior: Vec<usize> = block_nodes[b]
            .iter()
            .copied()
            .filter(|v| !attach.contains(v))
            .collect();
        tree_nodes.extend(attach.iter().copied());
        edges.push((attach[0], attach[1], links, interior));
    }

    // merge chains through transmission nodes with exactly two neighbours
    loop {
        let chain = tree_nodes.iter().copied().find(|&v| {
            !is_terminal(net, v) && edges.iter().filter(|e| e.0 == v || e.1 == v).count() == 2
        });
        let Some(v) = chain else { break };
        let pos: Vec<usize> = (0..edges.len())
            .filter(|&k| edges[k].0 == v || edges[k].1 == v)
            .collect();
        let second = edges.remove(pos[1]);
        let first = edges.remove(pos[0]);
        let other = |e: &(usize, usize, Vec<usize>, Vec<usize>)| if e.0 == v { e.1 } else { e.0 };
        let mut links = [first.2.clone(), second.2.clone()].concat();
        links.sort_unstable();
        let mut interior = [first.3.clone(), second.3.clone(), vec![v]].concat();
        interior.sort_unstable();
        edges.push((other(&first), other(&second), links, interior));
        tree_nodes.remove(&v);
    }

    let nodes: Vec<usize> = tree_nodes.into_iter().collect();
    let mut tree = build(&nodes, &edges, root)?;
    tree.idle_links = idle_links;
    Ok(tree)
}

fn reachable(adj: &[Vec<(usize, usize)>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for &(_, v) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Link sets of the biconnected blocks reachable from `start`; parallel links share a block.
fn biconnected_blocks(net: &Network, adj: &[Vec<(usize, usize)>], start: usize) -> Vec<Vec<usize>> {
    struct Walk<'a> {
        adj: &'a [Vec<(usize, usize)>],
        disc: Vec<usize>,
        low: Vec<usize>,
        time: usize,
        stack: Vec<usize>,
        blocks: Vec<Vec<usize>>,
    }
    impl Walk<'_> {
        fn visit(&mut self, u: usize, via: Option<usize>) {
            self.time += 1;
            self.disc[u] = self.time;
            self.low[u] = self.time;
            for k in 0..self.adj[u].len() {
                let (e, v) = self.adj[u][k];
                if Some(e) == via {
                    continue;
                }
                if self.disc[v] == 0 {
                    self.stack.push(e);
                    self.visit(v, Some(e));
                    self.low[u] = self.low[u].min(self.low[v]);
                    if self.low[v] >= self.disc[u] {
                        let mut block = Vec::new();
                        while let Some(x) = self.stack.pop() {
                            block.push(x);
                            if x == e {
                                break;
                            }
                        }
                        self.blocks.push(block);
                    }
                } else if self.disc[v] < self.disc[u] {
                    self.stack.push(e);
                    self.low[u] = self.low[u].min(self.disc[v]);
                }
            }
        }
    }
    let n = net.node_count();
    let mut walk = Walk {
        adj,
        disc: vec![0; n],
        low: vec![0; n],
        time: 0,
        stack: Vec::new(),
        blocks: Vec::new(),
    };
    walk.visit(start, None);
    walk.blocks
}

/// Roots the tree given by `edges` (endpoints, links, interior) at `root`.
fn build(
    nodes: &[usize],
    edges: &[(usize, usize, Vec<usize>, Vec<usize>)],
    root: usize,
) -> Result<ReducedTree> {
    if !nodes.contains(&root) {
        return Err(Error::NotTreeReducible(format!(
            "node {root} is not a node of the reduced tree"
        )));
    }
    let mut order_nodes = vec![root];
    order_nodes.extend(nodes.iter().copied().filter(|&v| v != root));
    let index = |v: usize| order_nodes.iter().position(|&x| x == v).unwrap();
    let k = order_nodes.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (e, (a, b, _, _)) in edges.iter().enumerate() {
        adj[index(*a)].push(e);
        adj[index(*b)].push(e);
    }
    let mut parent = vec![None; k];
    let mut children = vec![Vec::new(); k];
    let mut components = vec![None; k];
    let mut order = vec![0];
    let mut seen = vec![false; k];
    seen[0] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &e in &adj[u] {
            let (a, b, links, interior) = &edges[e];
            let w = if index(*a) == u { index(*b) } else { index(*a) };
            if seen[w] {
                continue;
            }
            seen[w] = true;
            parent[w] = Some(u);
            children[u].push(w);
            components[w] = Some(Component {
                links: links.clone(),
                child: order_nodes[w],
                parent: order_nodes[u],
                interior: interior.clone(),
            });
            order.push(w);
        }
    }
    if order.len() != k || edges.len() + 1 != k {
        return Err(Error::NotTreeReducible(
            "the reduced components do not form a tree".into(),
        ));
    }
    Ok(ReducedTree {
        nodes: order_nodes,
        parent,
        children,
        components,
        order,
        idle_links: Vec::new(),
    })
}

/// Network of a component alone: node 0 is the child terminal, node 1 the parent terminal.
pub fn component_network(net: &Network, comp: &Component) -> Network {
    let mut local = vec![comp.child, comp.parent];
    local.extend(comp.interior.iter().copied());
    let at = |v: usize| {
        local
            .iter()
            .position(|&x| x == v)
            .expect("component link leaves the component")
    };
    let mut roles = vec![NodeRole::Supply, NodeRole::Demand];
    roles.extend(std::iter::repeat(NodeRole::Transmission).take(comp.interior.len()));
    let links: Vec<(usize, usize, f64, f64)> = comp
        .links
        .iter()
        .map(|&i| {
            let l = net.link(i);
            (at(l.tail), at(l.head), l.weight, l.capacity)
        })
        .collect();
    Network::from_parts(roles, &links).expect("component of a valid network is valid")
}

/// Capacity of a minimum cut between the two terminals of a component.
pub fn min_cut(net: &Network, comp: &Component) -> f64 {
    let local = component_network(net, comp);
    let n = local.node_count();
    let mut cap = vec![vec![0.0; n]; n];
    for l in local.links() {
        cap[l.tail][l.head] += l.capacity;
        cap[l.head][l.tail] += l.capacity;
    }
    let (s, t) = (0, 1);
    let mut total = 0.0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 1e-12 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return total;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= push;
            cap[v][prev[v]] += push;
            v = prev[v];
        }
        total += push;
    }
}

/// Which aggregate flow sequences of a component are collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibleMode {
    /// The same flow at every stage.
    Constant,
    /// Any flow within the min-cut capacity at every stage; the set holds the final-stage flows.
    General,
}

/// Closure of the aggregate flows `z` of a component whose `N`-stage sequences end in a feasible
/// state. Symmetric about zero.
pub fn component_feasible_set(
    net: &Network,
    comp: &Component,
    n: usize,
    mode: FeasibleMode,
) -> IntervalSetF64 {
    let local = component_network(net, comp);
    let c = min_cut(net, comp);
    let line_mode = match mode {
        FeasibleMode::Constant => LineMode::Constant,
        FeasibleMode::General => LineMode::Relaxed { bound: c },
    };
    let mut line = LineProblem::new(&local, vec![1.0, -1.0], line_mode);
    let spans = line.collect_feasible(&local.all_links(), Span::new(-c, c), n);
    let set =
        IntervalSetF64::from_intervals(spans.iter().map(|s| Interval::new(s.lo, s.hi)).collect());
    set.union(&set.neg())
}
