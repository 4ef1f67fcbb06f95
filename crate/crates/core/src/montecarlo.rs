//! Haar-random sweeps over channel families and noise strengths.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{channel_benchmark, one_sided_with_benchmark, two_sided_with_benchmarks, EvolutionReport};
use crate::io::{read_channel, read_text};
use crate::linalg::{ComplexMatrix, Side};
use crate::measures::concurrence_pure_det;
use crate::quantum::{amplitude_damping, complex_gaussian, phase_damping, pure_to_density, PureState, QuantumChannel};

/// Tolerance for histogram values outside `[0, 1]` and for bound violations.
pub const VALUE_TOL: f64 = 1e-9;

/// Ratio at or above which a sample counts as evolving close to its bound.
pub const NEAR_BOUND: f64 = 0.99;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    PhaseDamping,
    AmplitudeDamping,
    /// A fixed channel read from a channel file; `p` then only labels rows.
    CustomFile(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sides {
    /// The channel acts on subsystem B only.
    OneSided,
    /// The same channel acts on both subsystems.
    TwoSidedIdentical,
    /// `channel_family` on A and `channel_family_b` on B.
    TwoSided,
}

fn default_dims() -> [usize; 2] {
    [2, 2]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel_family: ChannelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_family_b: Option<ChannelFamily>,
    pub p_grid: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub sides: Sides,
    #[serde(default = "default_dims")]
    pub dims: [usize; 2],
}

impl ExperimentConfig {
    /// Parses a JSON config; relative `custom_file` paths are resolved
    /// against `base_dir` when given.
    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text)?;
        if let Some(dir) = base_dir {
            for family in std::iter::once(&mut cfg.channel_family).chain(cfg.channel_family_b.as_mut()) {
                if let ChannelFamily::CustomFile(path) = family {
                    if path.is_relative() {
                        *path = dir.join(&*path);
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        Self::from_json(&text, path.parent()).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks the grid, sample count, dimensions and side options. All
    /// failures are reported as malformed input.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Format(msg));
        if self.p_grid.is_empty() {
            return bad("p_grid must not be empty".into());
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("p_grid value {p} is outside [0, 1]"));
        }
        if self.p_grid.windows(2).any(|w| w[0] > w[1]) {
            return bad("p_grid must be sorted".into());
        }
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1".into());
        }
        if self.dims != [2, 2] {
            return bad(format!("dims must be [2, 2], got {:?}", self.dims));
        }
        match (self.sides, &self.channel_family_b) {
            (Sides::TwoSided, None) => bad("sides = two_sided needs channel_family_b".into()),
            (Sides::OneSided | Sides::TwoSidedIdentical, Some(_)) => {
                bad("channel_family_b is only used with sides = two_sided".into())
            }
            _ => Ok(()),
        }
    }
}

/// One Monte-Carlo datum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleRecord {
    pub sample_index: usize,
    pub p: f64,
    pub c_initial: f64,
    pub c_final: f64,
    pub bound: f64,
    pub ratio: f64,
}

impl SampleRecord {
    pub fn violation(&self) -> f64 {
        (self.c_final - self.bound).max(0.0)
    }
}

/// Haar-random pure state number `index` of the stream seeded by `seed`.
///
/// Sample `index` uses ChaCha20 seeded with `seed_from_u64(seed)` on stream
/// `index`, so any subset of samples can be drawn independently and in any
/// order. Entries of `chi` are i.i.d. standard complex Gaussians, row-major,
/// normalized afterwards.
pub fn sample_haar_pure(d_a: usize, d_b: usize, seed: u64, index: u64) -> Result<PureState> {
    if d_a < 2 || d_b < 2 {
        return Err(Error::InvalidParameter(format!("dimensions must be at least 2, got {d_a}x{d_b}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let chi = ComplexMatrix::from_fn(d_a, d_b, |_, _| complex_gaussian(&mut rng));
    PureState::normalize(chi)
}

fn family_channel(family: &ChannelFamily, p: f64) -> Result<QuantumChannel> {
    match family {
        ChannelFamily::PhaseDamping => phase_damping(p),
        ChannelFamily::AmplitudeDamping => amplitude_damping(p),
        ChannelFamily::CustomFile(path) => read_channel(path),
    }
}

struct Dynamics {
    ch_a: Option<(QuantumChannel, f64)>,
    ch_b: (QuantumChannel, f64),
}

fn with_benchmark(ch: QuantumChannel) -> Result<(QuantumChannel, f64)> {
    let bench = channel_benchmark(&ch)?.value();
    Ok((ch, bench))
}

fn dynamics(cfg: &ExperimentConfig, p: f64) -> Result<Dynamics> {
    let primary = with_benchmark(family_channel(&cfg.channel_family, p)?)?;
    Ok(match (cfg.sides, &cfg.channel_family_b) {
        (Sides::OneSided, _) => Dynamics { ch_a: None, ch_b: primary },
        (Sides::TwoSidedIdentical, _) => Dynamics { ch_a: Some(primary.clone()), ch_b: primary },
        (Sides::TwoSided, Some(family_b)) => {
            Dynamics { ch_a: Some(primary), ch_b: with_benchmark(family_channel(family_b, p)?)? }
        }
        (Sides::TwoSided, None) => unreachable!("validated config"),
    })
}

fn run_sample(cfg: &ExperimentConfig, dyn_p: &Dynamics, p: f64, index: usize) -> Result<SampleRecord> {
    let s = sample_haar_pure(cfg.dims[0], cfg.dims[1], cfg.seed, index as u64)?;
    let initial = concurrence_pure_det(&s)?.value();
    let (ch_b, bench_b) = &dyn_p.ch_b;
    let report: EvolutionReport = match &dyn_p.ch_a {
        None => one_sided_with_benchmark(&s, initial, ch_b, Side::B, *bench_b)?,
        Some((ch_a, bench_a)) => {
            two_sided_with_benchmarks(&pure_to_density(&s), initial, ch_a, ch_b, (*bench_a, *bench_b))?
        }
    };
    Ok(SampleRecord {
        sample_index: index,
        p,
        c_initial: report.initial_concurrence,
        c_final: report.final_concurrence,
        bound: report.predicted,
        ratio: report.ratio,
    })
}

/// Runs the sweep. Records come p-major, then by sample index; sample `i`
/// is the same state for every `p`. The order and values do not depend on
/// the number of worker threads.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SampleRecord>> {
    cfg.validate()?;
    let per_p = cfg.p_grid.iter().map(|&p| dynamics(cfg, p)).collect::<Result<Vec<_>>>()?;
    let n = cfg.n_samples;
    (0..cfg.p_grid.len() * n)
        .into_par_iter()
        .map(|k| {
            let (pi, index) = (k / n, k % n);
            run_sample(cfg, &per_p[pi], cfg.p_grid[pi], index)
        })
        .collect()
}

pub const CSV_HEADER: &str = "p,sample_index,c_initial,c_final,bound,ratio";

pub fn write_records_csv<W: Write>(records: &[SampleRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{:.12},{},{:.12},{:.12},{:.12},{:.12}",
            r.p, r.sample_index, r.c_initial, r.c_final, r.bound, r.ratio
        )?;
    }
    Ok(())
}

pub fn records_to_csv(records: &[SampleRecord]) -> String {
    let mut buf = Vec::new();
    write_records_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HistogramField {
    Ratio,
    CFinal,
}

impl HistogramField {
    fn get(self, r: &SampleRecord) -> f64 {
        match self {
            HistogramField::Ratio => r.ratio,
            HistogramField::CFinal => r.c_final,
        }
    }
}

/// Equal-width histogram on `[0, 1]`, normalized as a probability density.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub count: usize,
}

impl Histogram {
    /// `sum density * width`; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.densities.iter().zip(self.bin_edges.windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_lo,bin_hi,density\n");
        for (d, w) in self.densities.iter().zip(self.bin_edges.windows(2)) {
            s.push_str(&format!("{:.12},{:.12},{:.12}\n", w[0], w[1], d));
        }
        s
    }
}

/// Values within [`VALUE_TOL`] of `[0, 1]` are clamped into it; 1 falls in the
/// last bin.
pub fn build_histogram(records: &[SampleRecord], n_bins: usize, field: HistogramField) -> Result<Histogram> {
    if records.is_empty() {
        return Err(Error::Empty("histogram needs at least one record"));
    }
    if n_bins == 0 {
        return Err(Error::InvalidParameter("n_bins must be at least 1".into()));
    }
    let mut counts = vec![0usize; n_bins];
    for r in records {
        let v = field.get(r);
        if !(-VALUE_TOL..=1.0 + VALUE_TOL).contains(&v) {
            return Err(Error::InvalidParameter(format!("histogram value {v} is outside [0, 1]")));
        }
        let bin = ((v.clamp(0.0, 1.0) * n_bins as f64) as usize).min(n_bins - 1);
        counts[bin] += 1;
    }
    let width = 1.0 / n_bins as f64;
    let total = records.len() as f64;
    Ok(Histogram {
        bin_edges: (0..=n_bins).map(|i| i as f64 / n_bins as f64).collect(),
        densities: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
        count: records.len(),
    })
}

/// Statistics of the records sharing one `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PSummary {
    pub p: f64,
    pub count: usize,
    pub mean_ratio: f64,
    pub median_ratio: f64,
    pub min_ratio: f64,
    /// Fraction of samples with ratio at least [`NEAR_BOUND`].
    pub fraction_near_bound: f64,
    /// `max(c_final - bound, 0)`.
    pub max_violation: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Per-`p` statistics in order of first appearance.
pub fn summarize(records: &[SampleRecord]) -> Result<Vec<PSummary>> {
    if records.is_empty() {
        return Err(Error::Empty("summary needs at least one record"));
    }
    let mut groups: Vec<(f64, Vec<&SampleRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(p, _)| p.to_bits() == r.p.to_bits()) {
            Some((_, g)) => g.push(r),
            None => groups.push((r.p, vec![r])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(p, g)| {
            let mut ratios: Vec<f64> = g.iter().map(|r| r.ratio).collect();
            ratios.sort_by(f64::total_cmp);
            let n = ratios.len() as f64;
            PSummary {
                p,
                count: g.len(),
                mean_ratio: ratios.iter().sum::<f64>() / n,
                median_ratio: median(&ratios),
                min_ratio: ratios[0],
                fraction_near_bound: ratios.iter().filter(|&&x| x >= NEAR_BOUND).count() as f64 / n,
                max_violation: g.iter().map(|r| r.violation()).fold(0.0, f64::max),
            }
        })
        .collect())
}
