//! Network model: nodes with supply/demand roles and weighted, capacitated links.

use crate::error::{Error, Result};
use crate::linkset::LinkSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    Supply,
    Demand,
    Transmission,
}

impl NodeRole {
    /// Objective coefficient: +1 for supply, -1 for demand, 0 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            NodeRole::Supply => 1.0,
            NodeRole::Demand => -1.0,
            NodeRole::Transmission => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
    pub capacity: f64,
}

/// Immutable multigraph. Nodes and links are addressed by position; names are kept for I/O.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    node_names: Vec<String>,
    roles: Vec<NodeRole>,
    links: Vec<Link>,
    controlled: Vec<usize>,
}

impl Network {
    pub fn new(node_names: Vec<String>, roles: Vec<NodeRole>, links: Vec<Link>) -> Result<Self> {
        if node_names.len() != roles.len() {
            return Err(Error::InvalidNetwork("one role per node required".into()));
        }
        let n = node_names.len();
        for l in &links {
            if l.tail >= n || l.head >= n {
                return Err(Error::InvalidNetwork(format!(
                    "link {} references a missing node",
                    l.name
                )));
            }
            if l.tail == l.head {
                return Err(Error::InvalidNetwork(format!(
                    "link {} is a self-loop",
                    l.name
                )));
            }
            if !(l.weight > 0.0 && l.weight.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "link {} needs a positive weight",
                    l.name
                )));
            }
            if !(l.capacity > 0.0 && l.capacity.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "link {} needs a positive capacity",
                    l.name
                )));
            }
        }
        let controlled = (0..n)
            .filter(|&v| roles[v] != NodeRole::Transmission)
            .collect();
        Ok(Network {
            node_names,
            roles,
            links,
            controlled,
        })
    }

    /// Builds a network with numeric node names `1..=n` and links `(tail, head, weight, capacity)`
    /// given with zero-based node indices.
    pub fn from_parts(roles: Vec<NodeRole>, links: &[(usize, usize, f64, f64)]) -> Result<Self> {
        let names = (1..=roles.len()).map(|i| i.to_string()).collect();
        let links = links
            .iter()
            .enumerate()
            .map(|(i, &(tail, head, weight, capacity))| Link {
                name: format!("e{}", i + 1),
                tail,
                head,
                weight,
                capacity,
            })
            .collect();
        Network::new(names, roles, links)
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, i: usize) -> &Link {
        &self.links[i]
    }

    pub fn node_name(&self, v: usize) -> &str {
        &self.node_names[v]
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn role(&self, v: usize) -> NodeRole {
        self.roles[v]
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    /// Objective vector `s`.
    pub fn sign_vector(&self) -> Vec<f64> {
        self.roles.iter().map(|r| r.sign()).collect()
    }

    /// Supply and demand nodes in index order; these are the coordinates of the control space.
    pub fn controlled_nodes(&self) -> &[usize] {
        &self.controlled
    }

    pub fn all_links(&self) -> LinkSet {
        LinkSet::full(self.links.len())
    }

    /// Same network with link directions reversed on the given links.
    pub fn with_flipped(&self, flip: &[usize]) -> Network {
        let mut out = self.clone();
        for &i in flip {
            let l = &mut out.links[i];
            std::mem::swap(&mut l.tail, &mut l.head);
        }
        out
    }

    /// Same topology with replaced capacities.
    pub fn with_capacities(&self, capacities: &[f64]) -> Result<Network> {
        let mut links = self.links.clone();
        for (l, &c) in links.iter_mut().zip(capacities) {
            l.capacity = c;
        }
        Network::new(self.node_names.clone(), self.roles.clone(), links)
    }

    /// Objective value `sᵀp`.
    pub fn objective(&self, p: &[f64]) -> f64 {
        self.roles.iter().zip(p).map(|(r, x)| r.sign() * x).sum()
    }
}
