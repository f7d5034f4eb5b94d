//! Canonical and random networks for tests, examples and the CLI's seeded mode.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::network::{ChannelInstance, Link, NetworkTopology};

/// The MAC-Z-BC network with `S` sources and `D` destinations in canonical
/// labeling: sources `1..S` reach receiver 1 only, source `S` reaches every
/// receiver.
pub fn mac_z_bc_topology(num_sources: usize, num_destinations: usize) -> NetworkTopology {
    assert!(num_sources > 0 && num_destinations > 0);
    let edges = (1..num_sources)
        .map(|i| Link::new(1, i))
        .chain((1..=num_destinations).map(|j| Link::new(j, num_sources)));
    NetworkTopology::fully_messaged(num_sources, num_destinations, edges)
}

/// Circularly symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Random canonical MAC-Z-BC channel: `S ≤ max_sources`, `D ≤ max_destinations`,
/// `F` carriers, complex Gaussian gains and budgets uniform in `[0, max_power]`.
pub fn random_mac_z_bc<R: Rng + ?Sized>(
    rng: &mut R,
    max_sources: usize,
    max_destinations: usize,
    num_carriers: usize,
    max_power: f64,
) -> ChannelInstance {
    let s = rng.gen_range(1..=max_sources);
    let d = rng.gen_range(1..=max_destinations);
    let topology = mac_z_bc_topology(s, d);
    let budget = (0..s).map(|_| rng.gen_range(0.0..=max_power)).collect();
    ChannelInstance::from_fn(topology, num_carriers, budget, |_, _| complex_gaussian(rng))
        .expect("canonical MAC-Z-BC construction is valid")
}

/// Every valid topology with exactly `S` sources and `D` destinations:
/// connected edge sets and every message subset meeting the per-node
/// message requirement.
pub fn all_valid_topologies(num_sources: usize, num_destinations: usize) -> Vec<NetworkTopology> {
    let slots: Vec<Link> = (1..=num_destinations)
        .flat_map(|j| (1..=num_sources).map(move |i| Link::new(j, i)))
        .collect();
    let mut out = Vec::new();
    for edge_mask in 1u32..(1 << slots.len()) {
        let edges: Vec<Link> = pick(&slots, edge_mask);
        let probe = NetworkTopology::fully_messaged(num_sources, num_destinations, edges.clone());
        if probe.validate().is_err() {
            continue;
        }
        for msg_mask in 1u32..(1 << edges.len()) {
            let t = NetworkTopology::new(
                num_sources,
                num_destinations,
                edges.clone(),
                pick(&edges, msg_mask),
            );
            if t.validate().is_ok() {
                out.push(t);
            }
        }
    }
    out
}

fn pick(items: &[Link], mask: u32) -> Vec<Link> {
    items
        .iter()
        .enumerate()
        .filter(|(k, _)| mask >> k & 1 == 1)
        .map(|(_, &l)| l)
        .collect()
}
