//! Networks and channel instances.
//!
//! A network is a bipartite graph between `S` sources (transmitters) and `D`
//! destinations (receivers) together with the set of links that carry a
//! message. A channel instance adds `F` parallel carriers, a per-source power
//! budget and the complex gain of every link on every carrier.
//!
//! All indices are 1-based. A link is written `(rx, tx)`, destination first,
//! and links order lexicographically in that form.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A link from source `tx` to destination `rx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    pub rx: usize,
    pub tx: usize,
}

impl Link {
    pub const fn new(rx: usize, tx: usize) -> Self {
        Self { rx, tx }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.rx, self.tx)
    }
}

impl From<(usize, usize)> for Link {
    fn from((rx, tx): (usize, usize)) -> Self {
        Self { rx, tx }
    }
}

/// Identifies message `W_{rx,tx}`: generated at source `tx`, intended for destination `rx`.
pub type MessageId = Link;

/// A vertex of the bipartite network graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "side", content = "index", rename_all = "snake_case")]
pub enum Node {
    Source(usize),
    Destination(usize),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Source(i) => write!(f, "T{i}"),
            Node::Destination(j) => write!(f, "R{j}"),
        }
    }
}

/// A broken topology invariant, naming the offending node or link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NoSources,
    NoDestinations,
    LinkOutOfRange { link: Link },
    MessageNotALink { message: MessageId },
    SourceWithoutMessage { source: usize },
    DestinationWithoutMessage { destination: usize },
    Disconnected { unreachable: Vec<Node> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoSources => write!(f, "network has no sources"),
            Violation::NoDestinations => write!(f, "network has no destinations"),
            Violation::LinkOutOfRange { link } => write!(f, "link {link} is out of index range"),
            Violation::MessageNotALink { message } => {
                write!(f, "message {message} is not a link (messages ⊆ edges)")
            }
            Violation::SourceWithoutMessage { source } => {
                write!(f, "source {source} has no message destination")
            }
            Violation::DestinationWithoutMessage { destination } => {
                write!(f, "destination {destination} has no message source")
            }
            Violation::Disconnected { unreachable } => {
                let names: Vec<String> = unreachable.iter().map(Node::to_string).collect();
                write!(f, "graph disconnected; unreachable from T1: {}", names.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("invalid topology: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("node {0} is out of range")]
    NodeOutOfRange(Node),
    #[error("link {0} is not in the network")]
    MissingLink(Link),
    #[error("invalid relabeling: {0}")]
    BadPermutation(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(Violation::to_string).collect::<Vec<_>>().join("; ")
}

/// Topology `(S, D, ℰ, ℳ)` of a single-hop network.
///
/// Construction does not validate; [`NetworkTopology::validate`] reports every
/// broken invariant and [`NetworkTopology::validated`] rejects invalid input.
/// Sub-networks produced by [`NetworkTopology::delete_edges`] may be
/// disconnected and must be re-validated by the caller.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkTopology {
    num_sources: usize,
    num_destinations: usize,
    edges: BTreeSet<Link>,
    messages: BTreeSet<Link>,
}

impl NetworkTopology {
    pub fn new(
        num_sources: usize,
        num_destinations: usize,
        edges: impl IntoIterator<Item = Link>,
        messages: impl IntoIterator<Item = Link>,
    ) -> Self {
        Self {
            num_sources,
            num_destinations,
            edges: edges.into_iter().collect(),
            messages: messages.into_iter().collect(),
        }
    }

    /// Builds a topology where every link carries a message (`ℳ = ℰ`).
    pub fn fully_messaged(
        num_sources: usize,
        num_destinations: usize,
        edges: impl IntoIterator<Item = Link>,
    ) -> Self {
        let edges: BTreeSet<Link> = edges.into_iter().collect();
        Self {
            num_sources,
            num_destinations,
            messages: edges.clone(),
            edges,
        }
    }

    pub fn validated(
        num_sources: usize,
        num_destinations: usize,
        edges: impl IntoIterator<Item = Link>,
        messages: impl IntoIterator<Item = Link>,
    ) -> Result<Self, NetworkError> {
        let t = Self::new(num_sources, num_destinations, edges, messages);
        t.validate().map_err(NetworkError::Invalid)?;
        Ok(t)
    }

    pub fn num_sources(&self) -> usize {
        self.num_sources
    }

    pub fn num_destinations(&self) -> usize {
        self.num_destinations
    }

    pub fn edges(&self) -> &BTreeSet<Link> {
        &self.edges
    }

    pub fn messages(&self) -> &BTreeSet<Link> {
        &self.messages
    }

    pub fn has_edge(&self, link: Link) -> bool {
        self.edges.contains(&link)
    }

    pub fn has_message(&self, link: Link) -> bool {
        self.messages.contains(&link)
    }

    /// True when every link carries a message.
    pub fn is_fully_messaged(&self) -> bool {
        self.edges == self.messages
    }

    /// Checks every topology invariant and lists all violations.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.num_sources == 0 {
            out.push(Violation::NoSources);
        }
        if self.num_destinations == 0 {
            out.push(Violation::NoDestinations);
        }
        for &link in self.edges.iter().chain(self.messages.iter()) {
            if !self.in_range(link) {
                let v = Violation::LinkOutOfRange { link };
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        for &m in &self.messages {
            if !self.edges.contains(&m) {
                out.push(Violation::MessageNotALink { message: m });
            }
        }
        for i in 1..=self.num_sources {
            if !self.messages.iter().any(|m| m.tx == i) {
                out.push(Violation::SourceWithoutMessage { source: i });
            }
        }
        for j in 1..=self.num_destinations {
            if !self.messages.iter().any(|m| m.rx == j) {
                out.push(Violation::DestinationWithoutMessage { destination: j });
            }
        }
        if self.num_sources > 0 && self.num_destinations > 0 {
            let reached = self.reachable_from(Node::Source(1));
            let unreachable: Vec<Node> = self
                .nodes()
                .filter(|n| !reached.contains(n))
                .collect();
            if !unreachable.is_empty() {
                out.push(Violation::Disconnected { unreachable });
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn in_range(&self, link: Link) -> bool {
        (1..=self.num_destinations).contains(&link.rx) && (1..=self.num_sources).contains(&link.tx)
    }

    fn node_in_range(&self, node: Node) -> bool {
        match node {
            Node::Source(i) => (1..=self.num_sources).contains(&i),
            Node::Destination(j) => (1..=self.num_destinations).contains(&j),
        }
    }

    /// All nodes, sources first, in index order.
    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (1..=self.num_sources)
            .map(Node::Source)
            .chain((1..=self.num_destinations).map(Node::Destination))
    }

    /// Number of links incident on `node`.
    pub fn degree(&self, node: Node) -> Result<usize, NetworkError> {
        if !self.node_in_range(node) {
            return Err(NetworkError::NodeOutOfRange(node));
        }
        Ok(self.neighbors(node).len())
    }

    /// Neighbors of `node` in ascending index order.
    pub fn neighbors(&self, node: Node) -> Vec<Node> {
        match node {
            Node::Source(i) => self
                .edges
                .iter()
                .filter(|e| e.tx == i)
                .map(|e| Node::Destination(e.rx))
                .collect(),
            Node::Destination(j) => self
                .edges
                .iter()
                .filter(|e| e.rx == j)
                .map(|e| Node::Source(e.tx))
                .collect(),
        }
    }

    /// Destinations directly linked to source `tx`.
    pub fn destinations_of(&self, tx: usize) -> BTreeSet<usize> {
        self.edges.iter().filter(|e| e.tx == tx).map(|e| e.rx).collect()
    }

    /// Sources directly linked to destination `rx`.
    pub fn sources_of(&self, rx: usize) -> BTreeSet<usize> {
        self.edges.iter().filter(|e| e.rx == rx).map(|e| e.tx).collect()
    }

    fn reachable_from(&self, start: Node) -> BTreeSet<Node> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for m in self.neighbors(n) {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        seen
    }

    /// Shortest path between two nodes, found breadth-first with neighbors
    /// visited in ascending order. Returns the node sequence including both
    /// endpoints.
    pub fn shortest_path(&self, from: Node, to: Node) -> Option<Vec<Node>> {
        let mut parent: BTreeMap<Node, Node> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                let mut path = vec![to];
                let mut cur = to;
                while let Some(&p) = parent.get(&cur) {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for m in self.neighbors(n) {
                if seen.insert(m) {
                    parent.insert(m, n);
                    queue.push_back(m);
                }
            }
        }
        None
    }

    /// Removes `removed` from the edge set; messages on removed links go too.
    /// The result is not validated.
    pub fn delete_edges<'a>(
        &self,
        removed: impl IntoIterator<Item = &'a Link>,
    ) -> Result<Self, NetworkError> {
        let mut edges = self.edges.clone();
        for link in removed {
            if !self.edges.contains(link) {
                return Err(NetworkError::MissingLink(*link));
            }
            edges.remove(link);
        }
        let messages = self.messages.intersection(&edges).copied().collect();
        Ok(Self {
            num_sources: self.num_sources,
            num_destinations: self.num_destinations,
            edges,
            messages,
        })
    }

    /// Renames nodes. `perm.sources[i - 1]` is the new index of source `i`,
    /// likewise for destinations.
    pub fn relabel(&self, perm: &Relabeling) -> Result<Self, NetworkError> {
        perm.check(self.num_sources, self.num_destinations)?;
        let map = |l: &Link| perm.apply(*l);
        Ok(Self {
            num_sources: self.num_sources,
            num_destinations: self.num_destinations,
            edges: self.edges.iter().map(map).collect(),
            messages: self.messages.iter().map(map).collect(),
        })
    }
}

/// Node renaming. Entry `k` of each vector is the new 1-based index of old
/// node `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabeling {
    pub sources: Vec<usize>,
    pub destinations: Vec<usize>,
}

impl Relabeling {
    pub fn identity(num_sources: usize, num_destinations: usize) -> Self {
        Self {
            sources: (1..=num_sources).collect(),
            destinations: (1..=num_destinations).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.sources.iter().enumerate().all(|(k, &v)| v == k + 1)
            && self.destinations.iter().enumerate().all(|(k, &v)| v == k + 1)
    }

    pub fn apply(&self, link: Link) -> Link {
        Link::new(self.destinations[link.rx - 1], self.sources[link.tx - 1])
    }

    pub fn inverse(&self) -> Self {
        fn inv(p: &[usize]) -> Vec<usize> {
            let mut out = vec![0; p.len()];
            for (k, &v) in p.iter().enumerate() {
                out[v - 1] = k + 1;
            }
            out
        }
        Self {
            sources: inv(&self.sources),
            destinations: inv(&self.destinations),
        }
    }

    fn check(&self, s: usize, d: usize) -> Result<(), NetworkError> {
        fn is_perm(p: &[usize], n: usize) -> bool {
            let set: BTreeSet<usize> = p.iter().copied().collect();
            p.len() == n && set.len() == n && set.iter().all(|&v| (1..=n).contains(&v))
        }
        if !is_perm(&self.sources, s) {
            return Err(NetworkError::BadPermutation(format!(
                "{:?} is not a permutation of 1..={s}",
                self.sources
            )));
        }
        if !is_perm(&self.destinations, d) {
            return Err(NetworkError::BadPermutation(format!(
                "{:?} is not a permutation of 1..={d}",
                self.destinations
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Topology(#[from] NetworkError),
    #[error("number of carriers must be positive")]
    NoCarriers,
    #[error("expected {expected} power budgets, got {got}")]
    BudgetLength { expected: usize, got: usize },
    #[error("power budget of source {tx} is {value}; must be finite and nonnegative")]
    BadBudget { tx: usize, value: f64 },
    #[error("gain given on non-link (rx={rx}, tx={tx}, carrier={carrier})")]
    GainOnNonLink { rx: usize, tx: usize, carrier: usize },
    #[error("gain (rx={rx}, tx={tx}, carrier={carrier}) has carrier outside 1..={num_carriers}")]
    CarrierOutOfRange {
        rx: usize,
        tx: usize,
        carrier: usize,
        num_carriers: usize,
    },
    #[error("gain (rx={rx}, tx={tx}, carrier={carrier}) is not finite")]
    NonFiniteGain { rx: usize, tx: usize, carrier: usize },
}

/// Key of a stored gain: `(rx, tx, carrier)`.
pub type GainKey = (usize, usize, usize);

/// A channel: topology plus carriers, power budgets and per-carrier link gains.
///
/// Noise is unit-variance on every carrier at every receiver, so budgets are
/// noise-normalized. Gains are stored sparsely; an absent key reads as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    topology: NetworkTopology,
    num_carriers: usize,
    power_budget: Vec<f64>,
    gains: BTreeMap<GainKey, Complex64>,
}

impl ChannelInstance {
    pub fn new(
        topology: NetworkTopology,
        num_carriers: usize,
        power_budget: Vec<f64>,
        gains: BTreeMap<GainKey, Complex64>,
    ) -> Result<Self, InstanceError> {
        topology.validate().map_err(NetworkError::Invalid)?;
        if num_carriers == 0 {
            return Err(InstanceError::NoCarriers);
        }
        if power_budget.len() != topology.num_sources() {
            return Err(InstanceError::BudgetLength {
                expected: topology.num_sources(),
                got: power_budget.len(),
            });
        }
        for (k, &p) in power_budget.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(InstanceError::BadBudget {
                    tx: k + 1,
                    value: p,
                });
            }
        }
        for (&(rx, tx, carrier), g) in &gains {
            if !topology.has_edge(Link::new(rx, tx)) {
                return Err(InstanceError::GainOnNonLink { rx, tx, carrier });
            }
            if !(1..=num_carriers).contains(&carrier) {
                return Err(InstanceError::CarrierOutOfRange {
                    rx,
                    tx,
                    carrier,
                    num_carriers,
                });
            }
            if !g.re.is_finite() || !g.im.is_finite() {
                return Err(InstanceError::NonFiniteGain { rx, tx, carrier });
            }
        }
        Ok(Self {
            topology,
            num_carriers,
            power_budget,
            gains,
        })
    }

    /// Instance whose gains are given by `gain(link, carrier)` for every link.
    pub fn from_fn(
        topology: NetworkTopology,
        num_carriers: usize,
        power_budget: Vec<f64>,
        mut gain: impl FnMut(Link, usize) -> Complex64,
    ) -> Result<Self, InstanceError> {
        let mut gains = BTreeMap::new();
        for &l in topology.edges() {
            for f in 1..=num_carriers {
                gains.insert((l.rx, l.tx, f), gain(l, f));
            }
        }
        Self::new(topology, num_carriers, power_budget, gains)
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn num_carriers(&self) -> usize {
        self.num_carriers
    }

    pub fn power_budget(&self) -> &[f64] {
        &self.power_budget
    }

    pub fn gains(&self) -> &BTreeMap<GainKey, Complex64> {
        &self.gains
    }

    /// `H_{rx,tx}(carrier)`; zero when not stored.
    pub fn gain(&self, rx: usize, tx: usize, carrier: usize) -> Complex64 {
        self.gains
            .get(&(rx, tx, carrier))
            .copied()
            .unwrap_or_default()
    }

    /// Same channel with nodes renamed; budgets and gains follow their nodes.
    pub fn relabel(&self, perm: &Relabeling) -> Result<Self, InstanceError> {
        let topology = self.topology.relabel(perm)?;
        let mut power_budget = vec![0.0; self.power_budget.len()];
        for (k, &p) in self.power_budget.iter().enumerate() {
            power_budget[perm.sources[k] - 1] = p;
        }
        let gains = self
            .gains
            .iter()
            .map(|(&(rx, tx, f), &g)| {
                let l = perm.apply(Link::new(rx, tx));
                ((l.rx, l.tx, f), g)
            })
            .collect();
        Self::new(topology, self.num_carriers, power_budget, gains)
    }

    /// Same channel with different power budgets.
    pub fn with_power_budget(&self, power_budget: Vec<f64>) -> Result<Self, InstanceError> {
        Self::new(
            self.topology.clone(),
            self.num_carriers,
            power_budget,
            self.gains.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn links(v: &[(usize, usize)]) -> Vec<Link> {
        v.iter().copied().map(Link::from).collect()
    }

    fn fig1() -> NetworkTopology {
        NetworkTopology::fully_messaged(
            4,
            3,
            links(&[(1, 1), (1, 2), (1, 3), (1, 4), (2, 4), (3, 4)]),
        )
    }

    #[test]
    fn z_interference_is_valid() {
        let t = NetworkTopology::new(2, 2, links(&[(1, 1), (1, 2), (2, 2)]), links(&[(1, 1), (2, 2)]));
        assert_eq!(t.validate(), Ok(()));
    }

    #[test]
    fn empty_message_set_is_rejected() {
        let t = NetworkTopology::new(1, 1, links(&[(1, 1)]), []);
        let v = t.validate().unwrap_err();
        assert!(v.contains(&Violation::DestinationWithoutMessage { destination: 1 }));
        assert!(v.contains(&Violation::SourceWithoutMessage { source: 1 }));
    }

    #[test]
    fn disjoint_links_are_disconnected() {
        let t = NetworkTopology::fully_messaged(2, 2, links(&[(1, 1), (2, 2)]));
        let v = t.validate().unwrap_err();
        assert_eq!(
            v,
            vec![Violation::Disconnected {
                unreachable: vec![Node::Source(2), Node::Destination(2)]
            }]
        );
    }

    #[test]
    fn message_outside_edges_and_out_of_range() {
        let t = NetworkTopology::new(2, 1, links(&[(1, 1), (1, 2)]), links(&[(1, 1), (1, 2), (3, 1)]));
        let v = t.validate().unwrap_err();
        assert!(v.contains(&Violation::MessageNotALink { message: Link::new(3, 1) }));
        assert!(v.contains(&Violation::LinkOutOfRange { link: Link::new(3, 1) }));
    }

    #[test]
    fn fig1_degrees() {
        let t = fig1();
        assert_eq!(t.degree(Node::Source(4)), Ok(3));
        assert_eq!(t.degree(Node::Source(1)), Ok(1));
        assert_eq!(t.degree(Node::Destination(1)), Ok(4));
        assert_eq!(
            t.degree(Node::Source(5)),
            Err(NetworkError::NodeOutOfRange(Node::Source(5)))
        );
    }

    #[test]
    fn isolated_node_has_degree_zero() {
        let t = NetworkTopology::fully_messaged(2, 1, links(&[(1, 1)]));
        assert_eq!(t.degree(Node::Source(2)), Ok(0));
        assert!(t.validate().is_err());
    }

    #[test]
    fn x_minus_cross_link_is_z() {
        let x = NetworkTopology::fully_messaged(2, 2, links(&[(1, 1), (1, 2), (2, 1), (2, 2)]));
        let z = x.delete_edges(&[Link::new(2, 1)]).unwrap();
        assert_eq!(z, NetworkTopology::fully_messaged(2, 2, links(&[(1, 1), (1, 2), (2, 2)])));
        assert_eq!(z.validate(), Ok(()));
    }

    #[test]
    fn fig1_minus_broadcast_part_is_mac() {
        let mac = fig1().delete_edges(&links(&[(2, 4), (3, 4)])).unwrap();
        assert_eq!(mac.edges().len(), 4);
        assert!(mac.edges().iter().all(|e| e.rx == 1));
        // receivers 2 and 3 are now isolated
        assert!(mac.validate().is_err());
    }

    #[test]
    fn z_interference_minus_cross_is_disconnected() {
        let t = NetworkTopology::new(2, 2, links(&[(1, 1), (1, 2), (2, 2)]), links(&[(1, 1), (2, 2)]));
        let s = t.delete_edges(&[Link::new(1, 2)]).unwrap();
        assert!(matches!(
            s.validate().unwrap_err()[..],
            [Violation::Disconnected { .. }]
        ));
    }

    #[test]
    fn delete_missing_edge_errors() {
        assert_eq!(
            fig1().delete_edges(&[Link::new(2, 1)]),
            Err(NetworkError::MissingLink(Link::new(2, 1)))
        );
    }

    #[test]
    fn instance_rejects_gain_on_non_link() {
        let t = fig1();
        let mut gains = BTreeMap::new();
        gains.insert((2, 1, 1), Complex64::new(1.0, 0.0));
        assert_eq!(
            ChannelInstance::new(t, 1, vec![1.0; 4], gains),
            Err(InstanceError::GainOnNonLink { rx: 2, tx: 1, carrier: 1 })
        );
    }

    #[test]
    fn instance_accepts_zero_gain_and_reads_absent_as_zero() {
        let t = fig1();
        let mut gains = BTreeMap::new();
        gains.insert((1, 1, 1), Complex64::new(0.0, 0.0));
        let inst = ChannelInstance::new(t, 2, vec![1.0; 4], gains).unwrap();
        assert_eq!(inst.gain(1, 1, 1), Complex64::new(0.0, 0.0));
        assert_eq!(inst.gain(3, 4, 2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn instance_rejects_nan_gain_and_negative_budget() {
        let t = fig1();
        let mut gains = BTreeMap::new();
        gains.insert((1, 1, 1), Complex64::new(f64::NAN, 0.0));
        assert!(matches!(
            ChannelInstance::new(t.clone(), 1, vec![1.0; 4], gains),
            Err(InstanceError::NonFiniteGain { .. })
        ));
        assert!(matches!(
            ChannelInstance::new(t, 1, vec![1.0, -1.0, 1.0, 1.0], BTreeMap::new()),
            Err(InstanceError::BadBudget { tx: 2, .. })
        ));
    }

    #[test]
    fn relabel_moves_gains_and_budgets() {
        let t = NetworkTopology::fully_messaged(2, 2, links(&[(1, 1), (2, 1), (2, 2)]));
        let inst = ChannelInstance::from_fn(t, 1, vec![3.0, 5.0], |l, _| {
            Complex64::new((10 * l.rx + l.tx) as f64, 0.0)
        })
        .unwrap();
        let perm = Relabeling {
            sources: vec![2, 1],
            destinations: vec![2, 1],
        };
        let r = inst.relabel(&perm).unwrap();
        assert_eq!(r.power_budget(), &[5.0, 3.0]);
        assert_eq!(r.gain(1, 2, 1).re, 21.0);
        assert_eq!(r.gain(1, 1, 1).re, 22.0);
        assert_eq!(r.relabel(&perm.inverse()).unwrap(), inst);
    }

    #[test]
    fn shortest_path_is_lexicographic_bfs() {
        let t = NetworkTopology::fully_messaged(3, 3, links(&[(1, 1), (2, 1), (2, 2), (3, 2), (1, 3), (3, 3)]));
        let p = t.shortest_path(Node::Destination(1), Node::Destination(3)).unwrap();
        assert_eq!(p, vec![Node::Destination(1), Node::Source(3), Node::Destination(3)]);
    }
}
