//! Plain-text instance files and the bundled benchmark instances.
//!
//! ```text
//! # comment
//! [nodes]
//! <name> supply|demand|transmission
//! [links]
//! <name> <tail> <head> <weight> <capacity>
//! [injections]
//! <node> <value>
//! [outages]
//! <link>
//! ```
//!
//! Nodes without an injection line start at zero. The outage section is optional and lists links
//! that are already lost at time zero.

use std::collections::HashMap;

use crate::cascade::NetworkState;
use crate::error::{Error, Result};
use crate::linkset::LinkSet;
use crate::net::{Link, Network, NodeRole};

/// A network together with its initial supply-demand vector and initial outages.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub net: Network,
    pub p0: Vec<f64>,
    /// Links lost before the first control, by index.
    pub outages: Vec<usize>,
}

impl Instance {
    pub fn new(net: Network, p0: Vec<f64>, outages: Vec<usize>) -> Self {
        Instance { net, p0, outages }
    }

    /// Initial state: every link except the outages active, injections `p0`.
    pub fn state(&self) -> NetworkState {
        let mut active = self.net.all_links();
        for &i in &self.outages {
            active.remove(i);
        }
        NetworkState::new(active, self.p0.clone())
    }

    pub fn active(&self) -> LinkSet {
        self.state().active
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Nodes,
    Links,
    Injections,
    Outages,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_err(line, format!("{what} `{tok}` is not a finite number")))
}

/// Parses an instance file. Errors carry one-based line numbers.
pub fn parse(text: &str) -> Result<Instance> {
    let mut section = Section::None;
    let mut names = Vec::new();
    let mut roles = Vec::new();
    let mut node_index: HashMap<String, usize> = HashMap::new();
    let mut links = Vec::new();
    let mut link_index: HashMap<String, usize> = HashMap::new();
    let mut injections = Vec::new();
    let mut outages = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "nodes" => Section::Nodes,
                "links" => Section::Links,
                "injections" => Section::Injections,
                "outages" => Section::Outages,
                other => return Err(parse_err(line, format!("unknown section `{other}`"))),
            };
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let node = |tok: &str| {
            node_index
                .get(tok)
                .copied()
                .ok_or_else(|| parse_err(line, format!("unknown node `{tok}`")))
        };
        match section {
            Section::None => return Err(parse_err(line, "data before the first section header")),
            Section::Nodes => {
                let [name, role] = toks[..] else {
                    return Err(parse_err(line, "expected `<name> <role>`"));
                };
                let role = match role {
                    "supply" => NodeRole::Supply,
                    "demand" => NodeRole::Demand,
                    "transmission" => NodeRole::Transmission,
                    other => return Err(parse_err(line, format!("unknown role `{other}`"))),
                };
                if node_index.insert(name.to_string(), names.len()).is_some() {
                    return Err(parse_err(line, format!("duplicate node `{name}`")));
                }
                names.push(name.to_string());
                roles.push(role);
            }
            Section::Links => {
                let [name, tail, head, w, c] = toks[..] else {
                    return Err(parse_err(
                        line,
                        "expected `<name> <tail> <head> <weight> <capacity>`",
                    ));
                };
                let (tail, head) = (node(tail)?, node(head)?);
                let (weight, capacity) = (number(w, line, "weight")?, number(c, line, "capacity")?);
                if tail == head {
                    return Err(parse_err(line, format!("link `{name}` is a self-loop")));
                }
                if weight <= 0.0 || capacity <= 0.0 {
                    return Err(parse_err(
                        line,
                        format!("link `{name}` needs positive weight and capacity"),
                    ));
                }
                if link_index.insert(name.to_string(), links.len()).is_some() {
                    return Err(parse_err(line, format!("duplicate link `{name}`")));
                }
                links.push(Link {
                    name: name.to_string(),
                    tail,
                    head,
                    weight,
                    capacity,
                });
            }
            Section::Injections => {
                let [name, value] = toks[..] else {
                    return Err(parse_err(line, "expected `<node> <value>`"));
                };
                injections.push((node(name)?, number(value, line, "injection")?, line));
            }
            Section::Outages => {
                let [name] = toks[..] else {
                    return Err(parse_err(line, "expected `<link>`"));
                };
                let i = link_index
                    .get(name)
                    .copied()
                    .ok_or_else(|| parse_err(line, format!("unknown link `{name}`")))?;
                outages.push(i);
            }
        }
    }
    if names.is_empty() {
        return Err(parse_err(text.lines().count().max(1), "no nodes declared"));
    }
    let mut p0 = vec![0.0; names.len()];
    for (v, x, line) in injections {
        if roles[v] == NodeRole::Transmission && x != 0.0 {
            return Err(parse_err(
                line,
                format!("transmission node `{}` cannot inject", names[v]),
            ));
        }
        p0[v] = x;
    }
    outages.sort_unstable();
    outages.dedup();
    let net = Network::new(names, roles, links).map_err(|e| parse_err(0, e.to_string()))?;
    Ok(Instance { net, p0, outages })
}

/// Writes an instance in the format read by [`parse`].
pub fn emit(inst: &Instance) -> String {
    let net = &inst.net;
    let mut out = String::from("[nodes]\n");
    for v in 0..net.node_count() {
        let role = match net.role(v) {
            NodeRole::Supply => "supply",
            NodeRole::Demand => "demand",
            NodeRole::Transmission => "transmission",
        };
        out.push_str(&format!("{} {role}\n", net.node_name(v)));
    }
    out.push_str("\n[links]\n");
    for l in net.links() {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            l.name,
            net.node_name(l.tail),
            net.node_name(l.head),
            l.weight,
            l.capacity
        ));
    }
    out.push_str("\n[injections]\n");
    for (v, &x) in inst.p0.iter().enumerate() {
        if x != 0.0 {
            out.push_str(&format!("{} {x}\n", net.node_name(v)));
        }
    }
    if !inst.outages.is_empty() {
        out.push_str("\n[outages]\n");
        for &i in &inst.outages {
            out.push_str(&format!("{}\n", net.link(i).name));
        }
    }
    out
}

/// Benchmark instances shipped with the crate.
pub mod bundled {
    use super::{parse, Instance};

    pub const EXAMPLE1: &str = include_str!("../data/example1.txt");
    pub const EXAMPLE2_A: &str = include_str!("../data/example2a.txt");
    pub const EXAMPLE2_B: &str = include_str!("../data/example2b.txt");
    pub const FOUR_NODE: &str = include_str!("../data/four_node.txt");
    pub const IEEE39: &str = include_str!("../data/ieee39.txt");
    pub const IEEE39_TREE: &str = include_str!("../data/ieee39_tree.txt");

    /// `(name, file contents)` of every bundled instance.
    pub const ALL: [(&str, &str); 6] = [
        ("example1", EXAMPLE1),
        ("example2a", EXAMPLE2_A),
        ("example2b", EXAMPLE2_B),
        ("four-node", FOUR_NODE),
        ("ieee39", IEEE39),
        ("ieee39-tree", IEEE39_TREE),
    ];

    pub fn by_name(name: &str) -> Option<Instance> {
        ALL.iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| parse(text).expect("bundled instances parse"))
    }

    pub fn example1() -> Instance {
        parse(EXAMPLE1).unwrap()
    }

    /// Diamond network; `scenario` 1 or 2 selects the capacity of the middle link.
    pub fn example2(scenario: u8) -> Instance {
        match scenario {
            1 => parse(EXAMPLE2_A).unwrap(),
            2 => parse(EXAMPLE2_B).unwrap(),
            _ => panic!("the diamond network has scenarios 1 and 2"),
        }
    }

    pub fn four_node() -> Instance {
        parse(FOUR_NODE).unwrap()
    }

    pub fn ieee39() -> Instance {
        parse(IEEE39).unwrap()
    }

    pub fn ieee39_tree() -> Instance {
        parse(IEEE39_TREE).unwrap()
    }
}
