//! Independent oracles and property checks shared by the property suite and
//! the acceptance run. Oracles here avoid the library's own code paths.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sepnet::alignment::{self, canonical_scheme, BeamformingScheme};
use sepnet::capacity::{
    converse_bound_gradient, converse_bound_parallel, sum_capacity_single_carrier, LogBase,
    PowerAllocation,
};
use sepnet::classifier::{contains_subnetwork_bruteforce, is_mac_z_bc};
use sepnet::cli::{self, file, AnalysisRequest, Command, Format};
use sepnet::fixtures::complex_gaussian;
use sepnet::{classify, ChannelInstance, ForbiddenKind, Link, NetworkTopology, Node, Verdict};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- oracles

/// Single-carrier sum capacity in bits, straight from the closed form.
pub fn capacity_oracle_bits(inst: &ChannelInstance, f: usize, powers: &[f64]) -> f64 {
    let t = inst.topology();
    let s = t.num_sources();
    let mac: f64 = (1..=s)
        .map(|j| inst.gain(1, j, f).norm().powi(2) * powers[j - 1])
        .sum();
    let h_sq = (1..=t.num_destinations())
        .map(|j| inst.gain(j, s, f).norm().powi(2))
        .fold(0.0, f64::max);
    let direct = inst.gain(1, s, f).norm().powi(2);
    let ps = powers[s - 1];
    (1.0 + mac).log2() + ((1.0 + h_sq * ps) / (1.0 + direct * ps)).log2()
}

/// Closed-form water-filling: try every active-set size on gains sorted
/// descending. Returns allocation (original order) and value in bits.
pub fn waterfill_oracle(gains: &[f64], budget: f64) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..gains.len()).filter(|&k| gains[k] > 0.0).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    let mut alloc = vec![0.0; gains.len()];
    if budget == 0.0 || order.is_empty() {
        return (alloc, 0.0);
    }
    for k in (1..=order.len()).rev() {
        let inv_sum: f64 = order[..k].iter().map(|&i| 1.0 / gains[i]).sum();
        let mu = (budget + inv_sum) / k as f64;
        if mu > 1.0 / gains[order[k - 1]] {
            for &i in &order[..k] {
                alloc[i] = mu - 1.0 / gains[i];
            }
            let value = order[..k].iter().map(|&i| (mu * gains[i]).log2()).sum();
            return (alloc, value);
        }
    }
    unreachable!("the strongest carrier is always active")
}

/// Whether `topology` contains `kind` as a sub-network, found by deleting
/// links: every link subset of the right size, with isolated nodes dropped,
/// is compared against the canonical network up to node renaming.
pub fn contains_by_edge_subsets(topology: &NetworkTopology, kind: ForbiddenKind) -> bool {
    let canon = kind.canonical_topology();
    let k = canon.edges().len();
    let edges: Vec<Link> = topology.edges().iter().copied().collect();
    subsets(edges.len(), k).into_iter().any(|pick| {
        let kept: Vec<Link> = pick.iter().map(|&i| edges[i]).collect();
        let srcs: BTreeSet<usize> = kept.iter().map(|l| l.tx).collect();
        let dsts: BTreeSet<usize> = kept.iter().map(|l| l.rx).collect();
        if srcs.len() != canon.num_sources() || dsts.len() != canon.num_destinations() {
            return false;
        }
        let srcs: Vec<usize> = srcs.into_iter().collect();
        let dsts: Vec<usize> = dsts.into_iter().collect();
        permutations(srcs.len()).iter().any(|ps| {
            permutations(dsts.len()).iter().any(|pd| {
                // host node srcs[ps[a]] plays canonical source a + 1
                let to_host = |l: &Link| Link::new(dsts[pd[l.rx - 1]], srcs[ps[l.tx - 1]]);
                let mapped: BTreeSet<Link> = canon.edges().iter().map(to_host).collect();
                mapped == kept.iter().copied().collect()
                    && canon
                        .edges()
                        .iter()
                        .all(|l| canon.has_message(*l) == topology.has_message(to_host(l)))
            })
        })
    })
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Drops isolated nodes and renumbers the rest in order.
pub fn compact(t: &NetworkTopology) -> NetworkTopology {
    let srcs: Vec<usize> = (1..=t.num_sources())
        .filter(|&i| !t.destinations_of(i).is_empty())
        .collect();
    let dsts: Vec<usize> = (1..=t.num_destinations())
        .filter(|&j| !t.sources_of(j).is_empty())
        .collect();
    let idx = |v: &[usize], x: usize| v.iter().position(|&y| y == x).unwrap() + 1;
    let map = |l: &Link| Link::new(idx(&dsts, l.rx), idx(&srcs, l.tx));
    NetworkTopology::new(
        srcs.len(),
        dsts.len(),
        t.edges().iter().map(map).collect::<Vec<_>>(),
        t.messages().iter().map(map).collect::<Vec<_>>(),
    )
}

// ------------------------------------------------------------- generators

/// Random valid topology with `S ≤ max_s`, `D ≤ max_d`; each link carries a
/// message with probability `p_msg`.
pub fn random_topology(r: &mut impl Rng, max_s: usize, max_d: usize, p_msg: f64) -> NetworkTopology {
    loop {
        let s = r.gen_range(1..=max_s);
        let d = r.gen_range(1..=max_d);
        let edges: Vec<Link> = (1..=d)
            .flat_map(|j| (1..=s).map(move |i| Link::new(j, i)))
            .filter(|_| r.gen_bool(0.6))
            .collect();
        let messages: Vec<Link> = edges.iter().copied().filter(|_| r.gen_bool(p_msg)).collect();
        let t = NetworkTopology::new(s, d, edges, messages);
        if t.validate().is_ok() {
            return t;
        }
    }
}

/// Random complex gains on every link and carrier, budgets in `[0, 10]`.
pub fn random_instance(r: &mut impl Rng, t: NetworkTopology, carriers: usize) -> ChannelInstance {
    let budget = (0..t.num_sources()).map(|_| r.gen_range(0.0..10.0)).collect();
    ChannelInstance::from_fn(t, carriers, budget, |_, _| complex_gaussian(r)).unwrap()
}

/// Random allocation using at most `fill` of each transmitter's budget.
pub fn random_allocation(r: &mut impl Rng, inst: &ChannelInstance, fill: f64) -> PowerAllocation {
    let f = inst.num_carriers();
    let split = inst
        .power_budget()
        .iter()
        .map(|&b| {
            let w: Vec<f64> = (0..f).map(|_| r.gen_range(0.0..1.0)).collect();
            let total: f64 = w.iter().sum::<f64>().max(1e-300);
            let used = fill * r.gen_range(0.0..1.0);
            w.iter().map(|x| b * used * x / total).collect()
        })
        .collect();
    PowerAllocation { split }
}

/// A gap kind's network with random gains on `F` carriers and random beams on
/// the canonical scheme's active messages. `F` is large enough that
/// zero-forcing is generically feasible.
pub fn random_beamforming(r: &mut impl Rng, kind: ForbiddenKind) -> (ChannelInstance, BeamformingScheme) {
    let f = match kind {
        ForbiddenKind::XNetwork => 4,
        _ => 3,
    };
    let t = kind.canonical_topology();
    let budget = vec![1.0; t.num_sources()];
    let inst = ChannelInstance::from_fn(t, f, budget, |_, _| complex_gaussian(r)).unwrap();
    let active = canonical_scheme(kind).unwrap().active();
    let beams: Vec<(Link, Vec<Complex64>)> = active
        .into_iter()
        .map(|m| (m, (0..f).map(|_| complex_gaussian(r)).collect()))
        .collect();
    (inst, BeamformingScheme::equal_split(f, beams).unwrap())
}

// ---------------------------------------------------- network properties

pub fn prop_degree_sum(t: &NetworkTopology) -> Check {
    let e = t.edges().len();
    let src: usize = (1..=t.num_sources()).map(|i| t.degree(Node::Source(i)).unwrap()).sum();
    let dst: usize = (1..=t.num_destinations())
        .map(|j| t.degree(Node::Destination(j)).unwrap())
        .sum();
    ensure!(src == e && dst == e, "degree sums {src}, {dst} vs {e} links");
    Ok(())
}

/// Deleting `a` then `b` equals deleting `a ∪ b`; messages stay a subset of links.
pub fn prop_delete_composition(t: &NetworkTopology, r: &mut impl Rng) -> Check {
    let edges: Vec<Link> = t.edges().iter().copied().collect();
    let mut shuffled = edges.clone();
    shuffled.shuffle(r);
    let ka = r.gen_range(0..=edges.len());
    let kb = r.gen_range(0..=edges.len() - ka);
    let (a, rest) = shuffled.split_at(ka);
    let b = &rest[..kb];
    let stepwise = t.delete_edges(a).unwrap().delete_edges(b).unwrap();
    let at_once = t.delete_edges(a.iter().chain(b)).unwrap();
    ensure!(stepwise == at_once, "composition differs");
    ensure!(
        at_once.messages().is_subset(at_once.edges()),
        "messages outside links after deletion"
    );
    ensure!(
        at_once.edges().len() == edges.len() - ka - kb,
        "wrong link count"
    );
    Ok(())
}

// ------------------------------------------------- classifier properties

/// Verdict agrees with both brute-force searches, and any witness validates.
pub fn prop_classifier_sound(t: &NetworkTopology) -> Check {
    let fast = is_mac_z_bc(t).map_err(|e| e.to_string())?.is_some();
    let lib = ForbiddenKind::ALL
        .iter()
        .any(|&k| contains_subnetwork_bruteforce(t, k).unwrap().is_some());
    let ours = ForbiddenKind::ALL.iter().any(|&k| contains_by_edge_subsets(t, k));
    ensure!(fast != lib, "is_mac_z_bc={fast} but library brute force found={lib} on {t:?}");
    ensure!(lib == ours, "library brute force {lib} vs link-subset oracle {ours} on {t:?}");
    match classify(t).map_err(|e| e.to_string())? {
        Verdict::Separable(_) => ensure!(fast, "classify says separable, recognizer disagrees"),
        Verdict::Inseparable { witness } => {
            ensure!(!fast, "witness returned for MAC-Z-BC network");
            witness
                .verify(t)
                .map_err(|e| format!("witness {witness:?} fails on {t:?}: {e}"))?;
            ensure!(
                contains_by_edge_subsets(t, witness.kind),
                "oracle does not find {} in {t:?}",
                witness.kind
            );
        }
    }
    Ok(())
}

/// An inseparable sub-network makes the whole network inseparable.
pub fn prop_inseparable_monotone(t: &NetworkTopology, r: &mut impl Rng) -> Check {
    let removed: Vec<Link> = t.edges().iter().copied().filter(|_| r.gen_bool(0.3)).collect();
    let sub = compact(&t.delete_edges(&removed).unwrap());
    if sub.num_sources() == 0 || sub.validate().is_err() {
        return Ok(());
    }
    let sub_sep = classify(&sub).unwrap().is_separable();
    let host_sep = classify(t).unwrap().is_separable();
    ensure!(sub_sep || !host_sep, "sub-network {sub:?} inseparable but host {t:?} separable");
    Ok(())
}

// --------------------------------------------------- capacity properties

fn powers_of(inst: &ChannelInstance, r: &mut impl Rng) -> Vec<f64> {
    inst.power_budget().iter().map(|&b| r.gen_range(0.0..=b)).collect()
}

/// Capacity is nondecreasing in every transmit power.
pub fn prop_capacity_monotone(inst: &ChannelInstance, r: &mut impl Rng) -> Check {
    let p = powers_of(inst, r);
    let base = sum_capacity_single_carrier(inst, 1, &p, LogBase::Two).unwrap();
    for j in 0..p.len() {
        let mut q = p.clone();
        q[j] += r.gen_range(0.0..5.0);
        let more = sum_capacity_single_carrier(inst, 1, &q, LogBase::Two).unwrap();
        ensure!(more >= base - 1e-12, "raising P_{} lowered capacity {base} -> {more}", j + 1);
    }
    Ok(())
}

/// The hub-source term `log((1 + H²P_S)/(1 + |H_{1,S}|²P_S))` is nonnegative.
pub fn prop_second_term_nonneg(inst: &ChannelInstance, r: &mut impl Rng) -> Check {
    let p = powers_of(inst, r);
    let total = sum_capacity_single_carrier(inst, 1, &p, LogBase::Two).unwrap();
    let mac: f64 = (1..=p.len()).map(|j| inst.gain(1, j, 1).norm_sqr() * p[j - 1]).sum();
    let second = total - (1.0 + mac).log2();
    ensure!(second >= -1e-12, "second term {second}");
    Ok(())
}

/// Midpoint concavity of the parallel objective.
pub fn prop_concave_midpoint(inst: &ChannelInstance, r: &mut impl Rng) -> Check {
    let a = random_allocation(r, inst, 1.0);
    let b = random_allocation(r, inst, 1.0);
    let mid = PowerAllocation {
        split: a
            .split
            .iter()
            .zip(&b.split)
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| 0.5 * (u + v)).collect())
            .collect(),
    };
    let f = |x: &PowerAllocation| converse_bound_parallel(inst, x, LogBase::Two).unwrap();
    let slack = f(&mid) - 0.5 * (f(&a) + f(&b));
    ensure!(slack >= -1e-9, "midpoint slack {slack}");
    Ok(())
}

/// Analytic gradient against central differences with step 1e-6.
pub fn prop_gradient_fd(inst: &ChannelInstance, r: &mut impl Rng) -> Check {
    // stay inside the budgets so both difference points are feasible
    let bigger: Vec<f64> = inst.power_budget().iter().map(|b| b + 1.0).collect();
    let inst = inst.with_power_budget(bigger).unwrap();
    let x = random_allocation(r, &inst, 0.9);
    let g = converse_bound_gradient(&inst, &x, LogBase::Two).unwrap();
    let h = 1e-6;
    for j in 0..x.split.len() {
        for f in 0..x.split[j].len() {
            if x.split[j][f] < h {
                continue;
            }
            let mut up = x.clone();
            up.split[j][f] += h;
            let mut down = x.clone();
            down.split[j][f] -= h;
            let fd = (converse_bound_parallel(&inst, &up, LogBase::Two).unwrap()
                - converse_bound_parallel(&inst, &down, LogBase::Two).unwrap())
                / (2.0 * h);
            let err = (g[j][f] - fd).abs();
            ensure!(
                err <= 1e-5 * g[j][f].abs().max(1e-3),
                "d/dP[{}][{}]: analytic {} vs difference {fd}",
                j + 1,
                f + 1,
                g[j][f]
            );
        }
    }
    Ok(())
}

// -------------------------------------------------- alignment properties

/// Zero-forcing filters are unit norm and orthogonal to every nulled image.
pub fn prop_filters_orthogonal(inst: &ChannelInstance, scheme: &BeamformingScheme, p: f64) -> Check {
    let rep = alignment::zf_rates(inst, scheme, p, LogBase::Two).map_err(|e| e.to_string())?;
    for s in &rep.streams {
        let n: f64 = s.filter.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        ensure!((n - 1.0).abs() <= 1e-12, "filter of {} has norm {n}", s.message);
        for img in &s.nulled {
            let dot: Complex64 = s.filter.iter().zip(img).map(|(a, b)| a.conj() * b).sum();
            let scale = img.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            ensure!(
                dot.norm() <= 1e-12 * scale.max(1.0),
                "filter of {} leaks {} onto a nulled image",
                s.message,
                dot.norm()
            );
        }
    }
    Ok(())
}

/// Scaling power by `c = 2^k` scales every SNR by exactly `c`; in the top
/// decade each stream's rate moves by `log₂ c` up to a vanishing term.
pub fn prop_scale_covariance(inst: &ChannelInstance, scheme: &BeamformingScheme, k: i32) -> Check {
    let c = 2f64.powi(k);
    for p in [1.0, 1e3, 1e8] {
        let a = alignment::zf_rates(inst, scheme, p, LogBase::Two).map_err(|e| e.to_string())?;
        let b = alignment::zf_rates(inst, scheme, c * p, LogBase::Two).map_err(|e| e.to_string())?;
        for (x, y) in a.streams.iter().zip(&b.streams) {
            ensure!(y.snr == c * x.snr, "SNR {} -> {} under c={c}", x.snr, y.snr);
            if p >= 1e8 && x.snr >= 1e6 {
                let shift = y.rate - x.rate;
                ensure!(
                    (shift - k as f64).abs() <= 1e-5,
                    "rate shift {shift} vs {k} for {}",
                    x.message
                );
            }
        }
    }
    Ok(())
}

// --------------------------------------------------------- cli properties

/// Serialize and re-parse gives an identical structure.
pub fn prop_round_trip(inst: &ChannelInstance) -> Check {
    let text = serde_json::to_string(&file::instance_to_file(inst)).unwrap();
    let back = file::parse_network_str(&text).map_err(|e| e.to_string())?;
    ensure!(back.topology == *inst.topology(), "topology changed");
    ensure!(back.instance.as_ref() == Some(inst), "instance changed");
    let text = serde_json::to_string(&file::topology_to_file(inst.topology())).unwrap();
    let back = file::parse_network_str(&text).map_err(|e| e.to_string())?;
    ensure!(back.topology == *inst.topology() && back.instance.is_none(), "bare topology changed");
    Ok(())
}

pub fn request(command: Command, seed: u64) -> AnalysisRequest {
    AnalysisRequest {
        command,
        input_path: None,
        output_path: None,
        format: Format::Json,
        log_base: LogBase::Two,
        tolerance: 1e-9,
        max_iterations: 100_000,
        power_grid: "1e3:1e9:7".into(),
        seed,
    }
}

/// Two identical requests yield byte-identical reports apart from timing.
pub fn prop_report_deterministic(req: &AnalysisRequest) -> Check {
    let render = || {
        let mut rep = cli::run(req);
        rep.duration_seconds = 0.0;
        cli::render(&rep, req.format)
    };
    let (a, b) = (render(), render());
    ensure!(a == b, "reports differ for {:?}", req.command);
    Ok(())
}

/// Runs `check` on `n` seeded draws; stops at the first failure.
pub fn sweep<T>(
    n: u64,
    seed: u64,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> T,
    mut check: impl FnMut(&T, &mut ChaCha8Rng) -> Check,
) -> Check {
    for k in 0..n {
        let mut r = rng(seed.wrapping_mul(1_000_003).wrapping_add(k));
        let x = draw(&mut r);
        check(&x, &mut r).map_err(|e| format!("draw {k}: {e}"))?;
    }
    Ok(())
}
