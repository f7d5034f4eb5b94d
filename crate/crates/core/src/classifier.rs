//! Separability classification.
//!
//! A network is separable exactly when it is a MAC-Z-BC network: every link
//! carries a message, at most one source has degree above one and at most one
//! destination has degree above one. Every other network contains one of four
//! small forbidden sub-networks, and [`find_forbidden_subnetwork`] constructs
//! such a sub-network explicitly.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Link, NetworkTopology, Node, Relabeling, Violation};

/// The minimal inseparable sub-networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ForbiddenKind {
    ZInterference,
    XNetwork,
    Sigma,
    ReverseSigma,
}

impl ForbiddenKind {
    pub const ALL: [ForbiddenKind; 4] = [
        ForbiddenKind::ZInterference,
        ForbiddenKind::XNetwork,
        ForbiddenKind::Sigma,
        ForbiddenKind::ReverseSigma,
    ];

    /// The kind's own network in its canonical labeling.
    ///
    /// * Z-interference: `S=2, D=2`, links `(1,1),(1,2),(2,2)`, cross link `(1,2)` carries no message.
    /// * X: `S=2, D=2`, all four links.
    /// * Σ: `S=2, D=3`, links `(1,1),(2,1),(2,2),(3,2)`.
    /// * Reverse Σ: `S=3, D=2`, links `(1,1),(1,2),(2,2),(2,3)`.
    pub fn canonical_topology(self) -> NetworkTopology {
        let l = |v: &[(usize, usize)]| v.iter().copied().map(Link::from).collect::<Vec<_>>();
        match self {
            ForbiddenKind::ZInterference => {
                NetworkTopology::new(2, 2, l(&[(1, 1), (1, 2), (2, 2)]), l(&[(1, 1), (2, 2)]))
            }
            ForbiddenKind::XNetwork => {
                NetworkTopology::fully_messaged(2, 2, l(&[(1, 1), (1, 2), (2, 1), (2, 2)]))
            }
            ForbiddenKind::Sigma => {
                NetworkTopology::fully_messaged(2, 3, l(&[(1, 1), (2, 1), (2, 2), (3, 2)]))
            }
            ForbiddenKind::ReverseSigma => {
                NetworkTopology::fully_messaged(3, 2, l(&[(1, 1), (1, 2), (2, 2), (2, 3)]))
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ForbiddenKind::ZInterference => "Z_INTERFERENCE",
            ForbiddenKind::XNetwork => "X_NETWORK",
            ForbiddenKind::Sigma => "SIGMA",
            ForbiddenKind::ReverseSigma => "REVERSE_SIGMA",
        }
    }
}

impl fmt::Display for ForbiddenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An occurrence of a forbidden network inside a host network.
///
/// `sources[k]` is the host source playing canonical source `k + 1`, and
/// `destinations[k]` likewise. `edges` lists the host links in the order of
/// the canonical network's links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEmbedding {
    pub kind: ForbiddenKind,
    pub edges: Vec<Link>,
    pub sources: Vec<usize>,
    pub destinations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("node map has wrong shape for {0}")]
    Shape(ForbiddenKind),
    #[error("node map is not injective")]
    NotInjective,
    #[error("mapped node out of range")]
    OutOfRange,
    #[error("edge list does not match node map")]
    EdgeMismatch,
    #[error("host lacks link {0}")]
    MissingLink(Link),
    #[error("message status of host link {0} differs from the canonical network")]
    MessageStatus(Link),
}

impl WitnessEmbedding {
    /// Builds the embedding induced by a node correspondence.
    pub fn from_node_maps(kind: ForbiddenKind, sources: Vec<usize>, destinations: Vec<usize>) -> Self {
        let edges = kind
            .canonical_topology()
            .edges()
            .iter()
            .map(|e| Link::new(destinations[e.rx - 1], sources[e.tx - 1]))
            .collect();
        Self {
            kind,
            edges,
            sources,
            destinations,
        }
    }

    /// Checks the embedding against `host`: injective node maps, every mapped
    /// link present, and message status matching the canonical network.
    pub fn verify(&self, host: &NetworkTopology) -> Result<(), WitnessError> {
        let canon = self.kind.canonical_topology();
        if self.sources.len() != canon.num_sources()
            || self.destinations.len() != canon.num_destinations()
            || self.edges.len() != canon.edges().len()
        {
            return Err(WitnessError::Shape(self.kind));
        }
        let distinct = |v: &[usize]| v.iter().collect::<BTreeSet<_>>().len() == v.len();
        if !distinct(&self.sources) || !distinct(&self.destinations) {
            return Err(WitnessError::NotInjective);
        }
        if self.sources.iter().any(|&i| i == 0 || i > host.num_sources())
            || self.destinations.iter().any(|&j| j == 0 || j > host.num_destinations())
        {
            return Err(WitnessError::OutOfRange);
        }
        for (ce, &he) in canon.edges().iter().zip(&self.edges) {
            let mapped = Link::new(self.destinations[ce.rx - 1], self.sources[ce.tx - 1]);
            if mapped != he {
                return Err(WitnessError::EdgeMismatch);
            }
            if !host.has_edge(he) {
                return Err(WitnessError::MissingLink(he));
            }
            if canon.has_message(*ce) != host.has_message(he) {
                return Err(WitnessError::MessageStatus(he));
            }
        }
        Ok(())
    }
}

/// Hubs of a MAC-Z-BC network and the relabeling that puts it in canonical form
/// (hub destination becomes 1, hub source becomes `S`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacZBc {
    pub hub_source: Option<usize>,
    pub hub_destination: Option<usize>,
    pub relabeling: Relabeling,
}

impl MacZBc {
    pub fn is_canonical(&self) -> bool {
        self.relabeling.is_identity()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Separable(MacZBc),
    Inseparable { witness: WitnessEmbedding },
}

impl Verdict {
    pub fn is_separable(&self) -> bool {
        matches!(self, Verdict::Separable(_))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("invalid topology: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidTopology(Vec<Violation>),
    #[error("brute-force search limited to {limit} links, network has {edges}")]
    TooLarge { edges: usize, limit: usize },
}

/// Largest edge count accepted by [`contains_subnetwork_bruteforce`].
pub const BRUTEFORCE_EDGE_LIMIT: usize = 24;

fn check(topology: &NetworkTopology) -> Result<(), ClassifierError> {
    topology.validate().map_err(ClassifierError::InvalidTopology)
}

fn hubs(topology: &NetworkTopology) -> (Vec<usize>, Vec<usize>) {
    let srcs = (1..=topology.num_sources())
        .filter(|&i| topology.destinations_of(i).len() > 1)
        .collect();
    let dsts = (1..=topology.num_destinations())
        .filter(|&j| topology.sources_of(j).len() > 1)
        .collect();
    (srcs, dsts)
}

/// Moves `hub` to position `target` and keeps the other nodes in order.
fn hub_permutation(n: usize, hub: Option<usize>, target_last: bool) -> Vec<usize> {
    let Some(hub) = hub else {
        return (1..=n).collect();
    };
    let others: Vec<usize> = (1..=n).filter(|&k| k != hub).collect();
    let order: Vec<usize> = if target_last {
        others.into_iter().chain([hub]).collect()
    } else {
        [hub].into_iter().chain(others).collect()
    };
    // order[new - 1] = old; invert to old -> new
    let mut perm = vec![0; n];
    for (new0, &old) in order.iter().enumerate() {
        perm[old - 1] = new0 + 1;
    }
    perm
}

/// Recognizes MAC-Z-BC networks.
pub fn is_mac_z_bc(topology: &NetworkTopology) -> Result<Option<MacZBc>, ClassifierError> {
    check(topology)?;
    if !topology.is_fully_messaged() {
        return Ok(None);
    }
    let (srcs, dsts) = hubs(topology);
    if srcs.len() > 1 || dsts.len() > 1 {
        return Ok(None);
    }
    let hub_source = srcs.first().copied();
    let hub_destination = dsts.first().copied();
    Ok(Some(MacZBc {
        hub_source,
        hub_destination,
        relabeling: Relabeling {
            sources: hub_permutation(topology.num_sources(), hub_source, true),
            destinations: hub_permutation(topology.num_destinations(), hub_destination, false),
        },
    }))
}

/// Constructs a forbidden sub-network, or `None` for MAC-Z-BC networks.
///
/// Cases are tried in order: a link without a message gives a Z-interference
/// witness; two sources of degree above one give X, Σ or reverse-Σ depending
/// on how their neighborhoods meet; two such destinations give the mirrored
/// result. Every free choice takes the smallest index.
pub fn find_forbidden_subnetwork(
    topology: &NetworkTopology,
) -> Result<Option<WitnessEmbedding>, ClassifierError> {
    check(topology)?;

    if let Some(&cross) = topology.edges().difference(topology.messages()).next() {
        let (j, i) = (cross.rx, cross.tx);
        // validation guarantees both exist
        let i0 = topology
            .messages()
            .iter()
            .find(|m| m.rx == j)
            .map(|m| m.tx)
            .expect("destination has a message");
        let j0 = topology
            .messages()
            .iter()
            .find(|m| m.tx == i)
            .map(|m| m.rx)
            .expect("source has a message");
        return Ok(Some(WitnessEmbedding::from_node_maps(
            ForbiddenKind::ZInterference,
            vec![i0, i],
            vec![j, j0],
        )));
    }

    let (srcs, dsts) = hubs(topology);
    if srcs.len() >= 2 {
        return Ok(Some(two_hubs(topology, srcs[0], srcs[1], Side::Sources)));
    }
    if dsts.len() >= 2 {
        return Ok(Some(two_hubs(topology, dsts[0], dsts[1], Side::Destinations)));
    }
    Ok(None)
}

#[derive(Clone, Copy)]
enum Side {
    Sources,
    Destinations,
}

impl Side {
    fn node(self, k: usize) -> Node {
        match self {
            Side::Sources => Node::Source(k),
            Side::Destinations => Node::Destination(k),
        }
    }

    fn other(self) -> Side {
        match self {
            Side::Sources => Side::Destinations,
            Side::Destinations => Side::Sources,
        }
    }

    fn neighborhood(self, t: &NetworkTopology, k: usize) -> BTreeSet<usize> {
        match self {
            Side::Sources => t.destinations_of(k),
            Side::Destinations => t.sources_of(k),
        }
    }
}

fn index(n: Node) -> usize {
    match n {
        Node::Source(k) | Node::Destination(k) => k,
    }
}

/// A 4-link path `a0 - b0 - a1 - b1 - a2` with `a*` on `ends` side. Returns
/// the witness it forms: Σ when the ends are destinations, reverse-Σ when
/// they are sources.
fn path_witness(ends: Side, a: [usize; 3], b: [usize; 2]) -> WitnessEmbedding {
    match ends {
        // R a0 - T b0 - R a1 - T b1 - R a2
        Side::Destinations => {
            WitnessEmbedding::from_node_maps(ForbiddenKind::Sigma, b.to_vec(), a.to_vec())
        }
        // T a0 - R b0 - T a1 - R b1 - T a2
        Side::Sources => {
            WitnessEmbedding::from_node_maps(ForbiddenKind::ReverseSigma, a.to_vec(), b.to_vec())
        }
    }
}

/// Two nodes `h0 < h1` of degree above one on side `hub_side` in a fully
/// messaged network.
fn two_hubs(t: &NetworkTopology, h0: usize, h1: usize, hub_side: Side) -> WitnessEmbedding {
    let far = hub_side.other();
    let n0 = hub_side.neighborhood(t, h0);
    let n1 = hub_side.neighborhood(t, h1);
    let shared: Vec<usize> = n0.intersection(&n1).copied().collect();

    match shared.len() {
        0 => {
            let a = *n0.first().expect("hub has neighbors");
            let b = *n1.first().expect("hub has neighbors");
            let path = t
                .shortest_path(far.node(a), far.node(b))
                .expect("valid topology is connected");
            if path.len() - 1 >= 4 {
                let p: Vec<usize> = path[..5].iter().copied().map(index).collect();
                path_witness(far, [p[0], p[2], p[4]], [p[1], p[3]])
            } else {
                let k0 = index(path[1]);
                path_witness(hub_side, [h0, k0, h1], [a, b])
            }
        }
        1 => {
            let k = shared[0];
            let a = *n0.iter().find(|&&x| x != k).expect("degree above one");
            let b = *n1.iter().find(|&&x| x != k).expect("degree above one");
            path_witness(far, [a, k, b], [h0, h1])
        }
        _ => {
            let (x0, x1) = (shared[0], shared[1]);
            match hub_side {
                Side::Sources => WitnessEmbedding::from_node_maps(
                    ForbiddenKind::XNetwork,
                    vec![h0, h1],
                    vec![x0, x1],
                ),
                Side::Destinations => WitnessEmbedding::from_node_maps(
                    ForbiddenKind::XNetwork,
                    vec![x0, x1],
                    vec![h0, h1],
                ),
            }
        }
    }
}

/// Exhaustive search for an embedding of `kind` in `topology`, trying every
/// injective node correspondence in lexicographic order.
pub fn contains_subnetwork_bruteforce(
    topology: &NetworkTopology,
    kind: ForbiddenKind,
) -> Result<Option<WitnessEmbedding>, ClassifierError> {
    check(topology)?;
    if topology.edges().len() > BRUTEFORCE_EDGE_LIMIT {
        return Err(ClassifierError::TooLarge {
            edges: topology.edges().len(),
            limit: BRUTEFORCE_EDGE_LIMIT,
        });
    }
    let canon = kind.canonical_topology();
    for sources in injections(canon.num_sources(), topology.num_sources()) {
        for destinations in injections(canon.num_destinations(), topology.num_destinations()) {
            let fits = canon.edges().iter().all(|ce| {
                let he = Link::new(destinations[ce.rx - 1], sources[ce.tx - 1]);
                topology.has_edge(he) && topology.has_message(he) == canon.has_message(*ce)
            });
            if fits {
                return Ok(Some(WitnessEmbedding::from_node_maps(
                    kind,
                    sources,
                    destinations.clone(),
                )));
            }
        }
    }
    Ok(None)
}

/// All injective maps `{1..k} -> {1..n}` as value vectors, lexicographically.
fn injections(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in 1..=n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(k, n, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(k, n, &mut Vec::with_capacity(k), &mut vec![false; n + 1], &mut out);
    }
    out
}

/// Separable when the network is MAC-Z-BC, otherwise inseparable with a witness.
pub fn classify(topology: &NetworkTopology) -> Result<Verdict, ClassifierError> {
    if let Some(m) = is_mac_z_bc(topology)? {
        return Ok(Verdict::Separable(m));
    }
    let witness = find_forbidden_subnetwork(topology)?
        .expect("every non-MAC-Z-BC network contains a forbidden sub-network");
    Ok(Verdict::Inseparable { witness })
}
