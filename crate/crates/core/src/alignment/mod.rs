//! Linear beamforming over carriers and interference alignment.
//!
//! Each transmitter sends `X_i = Σ_j x_{j,i} V_{j,i}`: one Gaussian symbol
//! stream per message, spread over the `F` carriers by a beam `V_{j,i}`.
//! Because the channel is diagonal across carriers, stream `(j,i)` arrives at
//! receiver `r` along the elementwise product `H_{r,i} ∘ V_{j,i}`, its image.
//! Receivers separate streams with zero-forcing filters.
//!
//! The canonical X, Σ and reverse-Σ channels and schemes here show joint
//! coding across carriers reaching more degrees of freedom than any per-carrier
//! scheme can.

pub mod linalg;

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::LogBase;
use crate::classifier::ForbiddenKind;
use crate::network::{ChannelInstance, InstanceError, Link, MessageId};
use linalg::GaussInt;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlignmentError {
    #[error("no canonical gap instance for {0}")]
    UnsupportedKind(ForbiddenKind),
    #[error("stream {message} has length {got}, channel has {expected} carriers")]
    DimensionMismatch {
        message: MessageId,
        expected: usize,
        got: usize,
    },
    #[error("receiver {receiver} outside 1..={num_destinations}")]
    ReceiverOutOfRange {
        receiver: usize,
        num_destinations: usize,
    },
    #[error("stream {0} is not a message of the network")]
    UnknownMessage(MessageId),
    #[error("stream {0} has a zero beam")]
    ZeroBeam(MessageId),
    #[error("power split of stream {message} is {value}; must lie in [0, 1]")]
    BadFraction { message: MessageId, value: f64 },
    #[error("power splits at source {tx} sum to {total} > 1")]
    SourceOverCommitted { tx: usize, total: f64 },
    #[error("zero-forcing infeasible for {0:?}: desired image lies in the nulled span")]
    NullingInfeasible(Vec<MessageId>),
    #[error("total power {0} must be finite and nonnegative")]
    BadPower(f64),
    #[error("power grid: {0}")]
    DegenerateGrid(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// One active message stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stream {
    pub beam: Vec<Complex64>,
    /// Fraction of the source's power spent on this stream.
    pub power_fraction: f64,
}

/// Per-message beams. Messages of the network that have no stream are
/// inactive and carry rate zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamformingScheme {
    num_carriers: usize,
    streams: BTreeMap<MessageId, Stream>,
}

impl BeamformingScheme {
    pub fn new(
        num_carriers: usize,
        streams: BTreeMap<MessageId, Stream>,
    ) -> Result<Self, AlignmentError> {
        let mut per_source: BTreeMap<usize, f64> = BTreeMap::new();
        for (&m, s) in &streams {
            if s.beam.len() != num_carriers {
                return Err(AlignmentError::DimensionMismatch {
                    message: m,
                    expected: num_carriers,
                    got: s.beam.len(),
                });
            }
            if linalg::norm_sqr(&s.beam) == 0.0 {
                return Err(AlignmentError::ZeroBeam(m));
            }
            if !(0.0..=1.0).contains(&s.power_fraction) {
                return Err(AlignmentError::BadFraction {
                    message: m,
                    value: s.power_fraction,
                });
            }
            *per_source.entry(m.tx).or_default() += s.power_fraction;
        }
        if let Some((&tx, &total)) = per_source.iter().find(|(_, &t)| t > 1.0 + 1e-12) {
            return Err(AlignmentError::SourceOverCommitted { tx, total });
        }
        Ok(Self {
            num_carriers,
            streams,
        })
    }

    /// Beams for the given messages, each source splitting its power evenly
    /// over its own active streams.
    pub fn equal_split(
        num_carriers: usize,
        beams: impl IntoIterator<Item = (MessageId, Vec<Complex64>)>,
    ) -> Result<Self, AlignmentError> {
        let beams: Vec<(MessageId, Vec<Complex64>)> = beams.into_iter().collect();
        let mut count: BTreeMap<usize, usize> = BTreeMap::new();
        for (m, _) in &beams {
            *count.entry(m.tx).or_default() += 1;
        }
        let streams = beams
            .into_iter()
            .map(|(m, beam)| {
                let power_fraction = 1.0 / count[&m.tx] as f64;
                (m, Stream { beam, power_fraction })
            })
            .collect();
        Self::new(num_carriers, streams)
    }

    pub fn num_carriers(&self) -> usize {
        self.num_carriers
    }

    pub fn streams(&self) -> &BTreeMap<MessageId, Stream> {
        &self.streams
    }

    pub fn active(&self) -> BTreeSet<MessageId> {
        self.streams.keys().copied().collect()
    }

    fn check_against(&self, instance: &ChannelInstance) -> Result<(), AlignmentError> {
        for (&m, s) in &self.streams {
            if s.beam.len() != instance.num_carriers() {
                return Err(AlignmentError::DimensionMismatch {
                    message: m,
                    expected: instance.num_carriers(),
                    got: s.beam.len(),
                });
            }
            if !instance.topology().has_message(m) {
                return Err(AlignmentError::UnknownMessage(m));
            }
        }
        Ok(())
    }
}

fn real(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// The canonical channel of a forbidden kind, with unit power budgets.
///
/// * X: three carriers, `H̄(1) = [[1,0],[1,1]]`, `H̄(2) = H̄(1)ᵀ`, `H̄(3)` all ones.
/// * Σ and reverse-Σ: two carriers, unit gain on every link.
pub fn canonical_channel(kind: ForbiddenKind) -> Result<ChannelInstance, AlignmentError> {
    let topology = kind.canonical_topology();
    let budget = vec![1.0; topology.num_sources()];
    let inst = match kind {
        ForbiddenKind::ZInterference => return Err(AlignmentError::UnsupportedKind(kind)),
        ForbiddenKind::XNetwork => {
            // rows are receivers, columns transmitters
            let h = [
                [[1.0, 0.0], [1.0, 1.0]],
                [[1.0, 1.0], [0.0, 1.0]],
                [[1.0, 1.0], [1.0, 1.0]],
            ];
            ChannelInstance::from_fn(topology, 3, budget, |l, f| {
                Complex64::new(h[f - 1][l.rx - 1][l.tx - 1], 0.0)
            })?
        }
        ForbiddenKind::Sigma | ForbiddenKind::ReverseSigma => {
            ChannelInstance::from_fn(topology, 2, budget, |_, _| Complex64::new(1.0, 0.0))?
        }
    };
    Ok(inst)
}

/// The joint-coding scheme for a forbidden kind.
///
/// * X: `V_{1,1} = V_{1,2} = [1,0,1]`, `V_{2,1} = V_{2,2} = [0,1,1]`.
/// * Σ: `V_{1,1} = V_{3,2} = [1,0]`, `V_{2,1} = [1,1]`; `W_{1,2}` idle.
/// * reverse-Σ: `V_{1,1} = V_{2,3} = [1,0]`, `V_{1,2} = [1,1]`; `W_{2,2}` idle.
pub fn canonical_scheme(kind: ForbiddenKind) -> Result<BeamformingScheme, AlignmentError> {
    let m = Link::new;
    let beams = match kind {
        ForbiddenKind::ZInterference => return Err(AlignmentError::UnsupportedKind(kind)),
        ForbiddenKind::XNetwork => vec![
            (m(1, 1), real(&[1.0, 0.0, 1.0])),
            (m(1, 2), real(&[1.0, 0.0, 1.0])),
            (m(2, 1), real(&[0.0, 1.0, 1.0])),
            (m(2, 2), real(&[0.0, 1.0, 1.0])),
        ],
        ForbiddenKind::Sigma => vec![
            (m(1, 1), real(&[1.0, 0.0])),
            (m(2, 1), real(&[1.0, 1.0])),
            (m(3, 2), real(&[1.0, 0.0])),
        ],
        ForbiddenKind::ReverseSigma => vec![
            (m(1, 1), real(&[1.0, 0.0])),
            (m(1, 2), real(&[1.0, 1.0])),
            (m(2, 3), real(&[1.0, 0.0])),
        ],
    };
    let f = beams[0].1.len();
    BeamformingScheme::equal_split(f, beams)
}

/// Degrees of freedom of the best separate (per-carrier) coding scheme, as
/// established for each kind's canonical channel. Not computed.
pub fn separate_coding_dof_bound(kind: ForbiddenKind) -> Result<f64, AlignmentError> {
    match kind {
        ForbiddenKind::XNetwork => Ok(3.0),
        ForbiddenKind::Sigma | ForbiddenKind::ReverseSigma => Ok(2.0),
        ForbiddenKind::ZInterference => Err(AlignmentError::UnsupportedKind(kind)),
    }
}

/// `H_{r,i} ∘ V` at receiver `r` for a stream from source `i`.
pub fn image(instance: &ChannelInstance, receiver: usize, tx: usize, beam: &[Complex64]) -> Vec<Complex64> {
    beam.iter()
        .enumerate()
        .map(|(f, v)| instance.gain(receiver, tx, f + 1) * v)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceivedStream {
    pub message: MessageId,
    pub image: Vec<Complex64>,
}

/// What one receiver sees of a scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub receiver: usize,
    pub desired: Vec<ReceivedStream>,
    /// Interfering streams grouped by collinear image; each group occupies one dimension.
    pub groups: Vec<Vec<ReceivedStream>>,
    /// Dimension of the span of all interference images.
    pub interference_dimension: usize,
    /// Whether the collinearity and rank decisions were exact.
    pub exact: bool,
    /// Desired images together with one image per group are linearly independent.
    pub rank_condition: bool,
}

impl AlignmentReport {
    /// All interference arrives along a single direction.
    pub fn is_aligned(&self) -> bool {
        self.groups.len() <= 1
    }
}

enum Arith {
    Exact(Vec<Vec<GaussInt>>),
    Float,
}

fn arith_for(images: &[&[Complex64]]) -> Arith {
    let exact: Option<Vec<Vec<GaussInt>>> = images.iter().map(|v| linalg::to_exact(v)).collect();
    exact.map_or(Arith::Float, Arith::Exact)
}

fn collinear(a: &Arith, images: &[&[Complex64]], i: usize, j: usize) -> bool {
    match a {
        Arith::Exact(e) => linalg::collinear_exact(&e[i], &e[j]),
        Arith::Float => linalg::collinear_f64(images[i], images[j]),
    }
}

fn rank(a: &Arith, images: &[&[Complex64]], pick: &[usize]) -> usize {
    match a {
        Arith::Exact(e) => linalg::rank_exact(&pick.iter().map(|&k| e[k].clone()).collect::<Vec<_>>()),
        Arith::Float => linalg::rank_f64(&pick.iter().map(|&k| images[k].to_vec()).collect::<Vec<_>>()),
    }
}

/// Streams arriving at `receiver` with a nonzero image, split into desired and interfering.
fn received(
    instance: &ChannelInstance,
    scheme: &BeamformingScheme,
    receiver: usize,
) -> (Vec<ReceivedStream>, Vec<ReceivedStream>) {
    let mut desired = Vec::new();
    let mut interference = Vec::new();
    for (&m, s) in scheme.streams() {
        let img = image(instance, receiver, m.tx, &s.beam);
        if linalg::is_zero(&img) {
            continue;
        }
        let r = ReceivedStream { message: m, image: img };
        if m.rx == receiver {
            desired.push(r);
        } else {
            interference.push(r);
        }
    }
    (desired, interference)
}

/// Groups the interference at `receiver` by direction and checks that the
/// desired streams stay independent of it.
pub fn check_alignment(
    instance: &ChannelInstance,
    scheme: &BeamformingScheme,
    receiver: usize,
) -> Result<AlignmentReport, AlignmentError> {
    scheme.check_against(instance)?;
    let nd = instance.topology().num_destinations();
    if !(1..=nd).contains(&receiver) {
        return Err(AlignmentError::ReceiverOutOfRange {
            receiver,
            num_destinations: nd,
        });
    }
    let (desired, interference) = received(instance, scheme, receiver);
    let images: Vec<&[Complex64]> = desired
        .iter()
        .chain(&interference)
        .map(|r| r.image.as_slice())
        .collect();
    let arith = arith_for(&images);
    let off = desired.len();

    let mut reps: Vec<usize> = Vec::new();
    let mut groups: Vec<Vec<ReceivedStream>> = Vec::new();
    for (k, r) in interference.iter().enumerate() {
        let idx = off + k;
        match reps.iter().position(|&rep| collinear(&arith, &images, rep, idx)) {
            Some(g) => groups[g].push(r.clone()),
            None => {
                reps.push(idx);
                groups.push(vec![r.clone()]);
            }
        }
    }
    let interference_idx: Vec<usize> = (off..images.len()).collect();
    let interference_dimension = rank(&arith, &images, &interference_idx);
    let stacked: Vec<usize> = (0..off).chain(reps.iter().copied()).collect();
    let rank_condition = rank(&arith, &images, &stacked) == stacked.len();

    Ok(AlignmentReport {
        receiver,
        desired,
        groups,
        interference_dimension,
        exact: matches!(arith, Arith::Exact(_)),
        rank_condition,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRate {
    pub message: MessageId,
    /// Unit-norm zero-forcing filter.
    pub filter: Vec<Complex64>,
    /// `|⟨filter, desired image⟩|²`.
    pub filter_gain: f64,
    /// Symbol power of the stream: its power fraction times the total power.
    pub power: f64,
    pub snr: f64,
    pub rate: f64,
    /// Images the filter nulls.
    #[serde(skip)]
    pub nulled: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub total_power: f64,
    pub streams: Vec<StreamRate>,
    pub sum_rate: f64,
    pub log_base: LogBase,
}

/// Per-stream zero-forcing rates with every transmitter at power `total_power`.
///
/// Each active message is decoded at its receiver through the unit-norm
/// filter orthogonal to the images of all other streams arriving there, so
/// the post-filter noise keeps unit variance and the stream's rate is
/// `log(1 + p·|⟨u, d⟩|²)` with `p` its share of `total_power`.
pub fn zf_rates(
    instance: &ChannelInstance,
    scheme: &BeamformingScheme,
    total_power: f64,
    base: LogBase,
) -> Result<RateReport, AlignmentError> {
    scheme.check_against(instance)?;
    if !total_power.is_finite() || total_power < 0.0 {
        return Err(AlignmentError::BadPower(total_power));
    }
    let mut streams = Vec::new();
    let mut infeasible = Vec::new();
    for (&m, s) in scheme.streams() {
        let (desired, interference) = received(instance, scheme, m.rx);
        let d = image(instance, m.rx, m.tx, &s.beam);
        let nulled: Vec<Vec<Complex64>> = desired
            .iter()
            .chain(&interference)
            .filter(|r| r.message != m)
            .map(|r| r.image.clone())
            .collect();
        let basis = linalg::orthonormal_basis(&nulled);
        let r = linalg::residual(&d, &basis);
        let gain = linalg::norm_sqr(&r);
        let scale = linalg::norm_sqr(&d);
        if scale == 0.0 || gain <= linalg::RANK_TOL * scale {
            infeasible.push(m);
            continue;
        }
        let inv = 1.0 / gain.sqrt();
        let filter: Vec<Complex64> = r.iter().map(|z| z * inv).collect();
        let filter_gain = linalg::inner(&filter, &d).norm_sqr();
        let power = s.power_fraction * total_power;
        let snr = power * filter_gain;
        streams.push(StreamRate {
            message: m,
            filter,
            filter_gain,
            power,
            snr,
            rate: base.log1p(snr),
            nulled,
        });
    }
    if !infeasible.is_empty() {
        return Err(AlignmentError::NullingInfeasible(infeasible));
    }
    let sum_rate = streams.iter().map(|s| s.rate).sum();
    Ok(RateReport {
        total_power,
        streams,
        sum_rate,
        log_base: base,
    })
}

/// Logarithmically spaced transmit powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerGrid {
    pub powers: Vec<f64>,
}

impl PowerGrid {
    /// `points` powers from `lo` to `hi`, evenly spaced in log scale.
    pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Result<Self, AlignmentError> {
        if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
            return Err(AlignmentError::DegenerateGrid(format!(
                "need 0 < lo < hi, got {lo}..{hi}"
            )));
        }
        if points < 2 {
            return Err(AlignmentError::DegenerateGrid("need at least 2 points".into()));
        }
        let (a, b) = (lo.log10(), hi.log10());
        let step = (b - a) / (points - 1) as f64;
        let powers = (0..points)
            .map(|k| match k {
                0 => lo,
                k if k == points - 1 => hi,
                k => 10f64.powf(a + step * k as f64),
            })
            .collect();
        Ok(Self { powers })
    }

    /// Parses `lo:hi:points`, e.g. `1e3:1e9:7`.
    pub fn parse(spec: &str) -> Result<Self, AlignmentError> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || AlignmentError::DegenerateGrid(format!("expected lo:hi:points, got {spec:?}"));
        let [lo, hi, n] = parts[..] else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        Self::log_spaced(lo, hi, n)
    }

    /// `10³, 10⁴, …, 10⁹`.
    pub fn default_grid() -> Self {
        Self {
            powers: (3..=9).map(|e| 10f64.powi(e)).collect(),
        }
    }

    /// Requirements for slope fitting: at least four increasing, positive,
    /// log-evenly spaced powers spanning four decades or more.
    pub fn check_for_fit(&self) -> Result<(), AlignmentError> {
        let p = &self.powers;
        if p.len() < 4 {
            return Err(AlignmentError::DegenerateGrid(format!(
                "need at least 4 points, got {}",
                p.len()
            )));
        }
        if p.iter().any(|&x| !(x > 0.0 && x.is_finite())) || p.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AlignmentError::DegenerateGrid(
                "powers must be positive, finite and increasing".into(),
            ));
        }
        let ratios: Vec<f64> = p.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        if ratios.iter().any(|r| (r - ratios[0]).abs() > 1e-6 * ratios[0]) {
            return Err(AlignmentError::DegenerateGrid(
                "powers are not logarithmically spaced".into(),
            ));
        }
        if p[p.len() - 1] / p[0] < 1e4 {
            return Err(AlignmentError::DegenerateGrid(
                "grid must span at least four decades".into(),
            ));
        }
        Ok(())
    }
}

/// Least-squares slope of sum rate against `log P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofFit {
    pub slope: f64,
    pub intercept: f64,
    /// `(P, sum rate)` at every grid point, including the discarded bottom decade.
    pub grid: Vec<(f64, f64)>,
    /// Smallest power used in the fit.
    pub fit_from: f64,
    /// Root-mean-square deviation of the fitted points from the line.
    pub residual: f64,
}

fn sum_rates(
    instance: &ChannelInstance,
    scheme: &BeamformingScheme,
    grid: &PowerGrid,
    base: LogBase,
) -> Result<Vec<(f64, f64)>, AlignmentError> {
    grid.powers
        .iter()
        .map(|&p| Ok((p, zf_rates(instance, scheme, p, base)?.sum_rate)))
        .collect()
}

/// Degrees of freedom of a scheme, estimated as the slope of its
/// zero-forcing sum rate against `log P`. The bottom decade of the grid is
/// left out of the fit.
pub fn dof_fit(
    instance: &ChannelInstance,
    scheme: &BeamformingScheme,
    grid: &PowerGrid,
    base: LogBase,
) -> Result<DofFit, AlignmentError> {
    grid.check_for_fit()?;
    let samples = sum_rates(instance, scheme, grid, base)?;
    // bottom decade, with slack for rounding in log-spaced grids
    let cutoff = grid.powers[0] * 10.0 * (1.0 - 1e-9);
    let fitted: Vec<(f64, f64)> = samples.iter().copied().filter(|(p, _)| *p >= cutoff).collect();
    if fitted.len() < 2 {
        return Err(AlignmentError::DegenerateGrid(
            "fewer than two points above the bottom decade".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = fitted.iter().map(|&(p, r)| (base.log(p), r)).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DofFit {
        slope,
        intercept,
        fit_from: fitted[0].0,
        grid: samples,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub power: f64,
    pub joint_rate: f64,
    pub separate_bound: f64,
}

/// Joint-coding sum rate against the separate-coding line `dof · log P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    pub kind: ForbiddenKind,
    pub separate_dof: f64,
    pub rows: Vec<GapRow>,
    /// Smallest grid power at which the joint rate exceeds the line.
    pub crossover: Option<f64>,
    pub log_base: LogBase,
}

/// [`gap_experiment_with`] on the kind's canonical channel and scheme.
pub fn gap_experiment(
    kind: ForbiddenKind,
    grid: &PowerGrid,
    base: LogBase,
) -> Result<GapTable, AlignmentError> {
    gap_experiment_with(&canonical_channel(kind)?, &canonical_scheme(kind)?, kind, grid, base)
}

pub fn gap_experiment_with(
    instance: &ChannelInstance,
    scheme: &BeamformingScheme,
    kind: ForbiddenKind,
    grid: &PowerGrid,
    base: LogBase,
) -> Result<GapTable, AlignmentError> {
    grid.check_for_fit()?;
    let dof = separate_coding_dof_bound(kind)?;
    let rows: Vec<GapRow> = sum_rates(instance, scheme, grid, base)?
        .into_iter()
        .map(|(p, r)| GapRow {
            power: p,
            joint_rate: r,
            separate_bound: dof * base.log(p),
        })
        .collect();
    let crossover = rows
        .iter()
        .find(|r| r.joint_rate > r.separate_bound)
        .map(|r| r.power);
    Ok(GapTable {
        kind,
        separate_dof: dof,
        rows,
        crossover,
        log_base: base,
    })
}
