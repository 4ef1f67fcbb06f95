use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entdyn_core::evolution::{
    channel_benchmark, evolve_mixed_one_sided, evolve_pure_non_trace_preserving, evolve_pure_one_sided,
    evolve_two_sided,
};
use entdyn_core::io::{read_channel, read_state};
use entdyn_core::measures::{concurrence_pure, concurrence_wootters, gconcurrence_pure};
use entdyn_core::montecarlo::{build_histogram, records_to_csv, run_sweep, summarize, HistogramField, PSummary};
use entdyn_core::quantum::{amplitude_damping, phase_damping, pure_to_density};
use entdyn_core::{EvolutionReport, ExperimentConfig, QuantumChannel, Side, StateSpec};

/// Concurrence dynamics of bipartite states under local channels.
#[derive(Parser)]
#[command(name = "entdyn", version)]
struct Cli {
    /// Output style on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Overrides the seed of a sweep config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Entanglement of a state file.
    Concurrence {
        state: PathBuf,
        /// Defaults to `pure` for `chi` files and `wootters` for `rho` files.
        #[arg(long, value_enum)]
        measure: Option<Measure>,
    },
    /// Benchmark factor of a channel: the concurrence of its Choi state.
    Bench {
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Compares the final concurrence with the factorization law or bound.
    Verify {
        state: PathBuf,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Noise on both subsystems: one channel on both, or the first
        /// channel on A and the second on B.
        #[arg(long)]
        two_sided: bool,
        /// Subsystem of a one-sided channel.
        #[arg(long, value_enum, default_value_t = SideArg::B, conflicts_with = "two_sided")]
        side: SideArg,
    },
    /// Runs a Monte-Carlo sweep and writes one CSV row per sample.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also writes per-p histograms (p,bin_lo,bin_hi,density).
        #[arg(long)]
        histogram: Option<PathBuf>,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..))]
        bins: u32,
        #[arg(long, value_enum, default_value_t = FieldArg::Ratio)]
        histogram_field: FieldArg,
    },
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel file; repeat for two-sided evolution.
    #[arg(long = "channel", value_name = "FILE", conflicts_with = "builtin")]
    channels: Vec<PathBuf>,
    #[arg(long, value_enum, requires = "p")]
    builtin: Option<Builtin>,
    /// Noise strength of the builtin channel.
    #[arg(long, requires = "builtin")]
    p: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Measure {
    Pure,
    Wootters,
    Gconcurrence,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Phase,
    Amp,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    A,
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Ratio,
    CFinal,
}

/// A failed command with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn domain(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<entdyn_core::Error> for Failure {
    fn from(e: entdyn_core::Error) -> Self {
        if e.is_input_error() {
            Failure::input(e.to_string())
        } else {
            Failure::domain(e.to_string())
        }
    }
}

type CmdResult = Result<String, Failure>;

fn fmt12(x: f64) -> String {
    format!("{x:.12}")
}

fn load_channels(args: &ChannelArgs) -> Result<Vec<QuantumChannel>, Failure> {
    match (args.builtin, args.p) {
        (Some(kind), Some(p)) => Ok(vec![match kind {
            Builtin::Phase => phase_damping(p)?,
            Builtin::Amp => amplitude_damping(p)?,
        }]),
        _ if args.channels.is_empty() => Err(Failure::input("give a channel file or --builtin with --p")),
        _ => Ok(args.channels.iter().map(|path| read_channel(path)).collect::<Result<_, _>>()?),
    }
}

fn single_value(format: Format, name: &str, value: f64) -> String {
    match format {
        Format::Human => format!("{}\n", fmt12(value)),
        Format::Csv => format!("{name}\n{}\n", fmt12(value)),
    }
}

fn cmd_concurrence(format: Format, path: &Path, measure: Option<Measure>) -> CmdResult {
    let state = read_state(path)?;
    let measure = measure.unwrap_or(match state {
        StateSpec::Pure(_) => Measure::Pure,
        StateSpec::Mixed(_) => Measure::Wootters,
    });
    let (name, value) = match (measure, &state) {
        (Measure::Pure, StateSpec::Pure(s)) => ("concurrence", concurrence_pure(s).value()),
        (Measure::Pure, StateSpec::Mixed(_)) => {
            return Err(Failure::domain("measure `pure` needs a pure state file (chi)"));
        }
        (Measure::Wootters, StateSpec::Pure(s)) => ("concurrence", concurrence_wootters(&pure_to_density(s))?.value()),
        (Measure::Wootters, StateSpec::Mixed(rho)) => ("concurrence", concurrence_wootters(rho)?.value()),
        (Measure::Gconcurrence, StateSpec::Pure(s)) => ("gconcurrence", gconcurrence_pure(s)?.value()),
        (Measure::Gconcurrence, StateSpec::Mixed(_)) => {
            return Err(Failure::domain("G-concurrence is only available for pure state files (chi)"));
        }
    };
    Ok(single_value(format, name, value))
}

fn cmd_bench(format: Format, args: &ChannelArgs) -> CmdResult {
    let channels = load_channels(args)?;
    let [ch] = channels.as_slice() else {
        return Err(Failure::input("bench takes exactly one channel"));
    };
    Ok(single_value(format, "benchmark", channel_benchmark(ch)?.value()))
}

fn cmd_verify(format: Format, path: &Path, args: &ChannelArgs, two_sided: bool, side: SideArg) -> CmdResult {
    let state = read_state(path)?;
    let channels = load_channels(args)?;
    let side = match side {
        SideArg::A => Side::A,
        SideArg::B => Side::B,
    };
    let report: EvolutionReport = match (two_sided, channels.as_slice(), &state) {
        (false, [ch], StateSpec::Pure(s)) if ch.is_trace_preserving() => evolve_pure_one_sided(s, ch, side)?,
        (false, [ch], StateSpec::Pure(s)) => evolve_pure_non_trace_preserving(s, ch, side)?,
        (false, [ch], StateSpec::Mixed(rho)) => evolve_mixed_one_sided(rho, ch, side)?,
        (true, [a] | [a, _], _) => {
            let b = channels.last().expect("one or two channels");
            let rho = match &state {
                StateSpec::Pure(s) => pure_to_density(s),
                StateSpec::Mixed(rho) => rho.clone(),
            };
            evolve_two_sided(&rho, a, b)?
        }
        (false, _, _) => return Err(Failure::input("one-sided verify takes exactly one channel")),
        (true, _, _) => return Err(Failure::input("--two-sided takes one or two channels")),
    };
    let regime = if report.is_exact_regime { "EXACT" } else { "BOUND" };
    let label = if report.is_exact_regime { "predicted" } else { "bound" };
    let mut out = match format {
        Format::Human => {
            let mut s = format!(
                "c_initial  {}\nc_final    {}\n{label:<10} {}\nratio      {}\nregime     {regime}\n",
                fmt12(report.initial_concurrence),
                fmt12(report.final_concurrence),
                fmt12(report.predicted),
                fmt12(report.ratio),
            );
            if let Some(passage) = report.passage {
                s += &format!("p_state    {}\np_bench    {}\n", fmt12(passage.state), fmt12(passage.benchmark));
            }
            s
        }
        Format::Csv => format!(
            "c_initial,c_final,predicted,ratio,regime\n{},{},{},{},{regime}\n",
            fmt12(report.initial_concurrence),
            fmt12(report.final_concurrence),
            fmt12(report.predicted),
            fmt12(report.ratio),
        ),
    };
    if report.violation() > 1e-9 {
        out += &format!("bound violated by {:e}\n", report.violation());
        return Err(Failure { code: 1, message: out });
    }
    Ok(out)
}

/// Writes through a temporary sibling so a failed write leaves no partial file.
fn write_atomically(path: &Path, contents: &str) -> Result<(), Failure> {
    let unwritable = |e: std::io::Error| Failure::domain(format!("cannot write {}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| Failure::domain(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(unwritable)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        unwritable(e)
    })
}

fn summary_table(format: Format, summary: &[PSummary]) -> String {
    let mut s = match format {
        Format::Human => format!(
            "{:>14} {:>7} {:>14} {:>14} {:>14} {:>10} {:>14}\n",
            "p", "n", "mean_ratio", "median_ratio", "min_ratio", "frac>=0.99", "max_violation"
        ),
        Format::Csv => "p,n,mean_ratio,median_ratio,min_ratio,fraction_ge_0.99,max_violation\n".to_string(),
    };
    for row in summary {
        s += &match format {
            Format::Human => format!(
                "{:>14.12} {:>7} {:>14.12} {:>14.12} {:>14.12} {:>10.4} {:>14.3e}\n",
                row.p,
                row.count,
                row.mean_ratio,
                row.median_ratio,
                row.min_ratio,
                row.fraction_near_bound,
                row.max_violation
            ),
            Format::Csv => format!(
                "{:.12},{},{:.12},{:.12},{:.12},{:.12},{:.12}\n",
                row.p,
                row.count,
                row.mean_ratio,
                row.median_ratio,
                row.min_ratio,
                row.fraction_near_bound,
                row.max_violation
            ),
        };
    }
    s
}

fn cmd_sweep(
    format: Format,
    seed: Option<u64>,
    config: &Path,
    out: &Path,
    histogram: Option<&Path>,
    bins: usize,
    field: FieldArg,
) -> CmdResult {
    let mut cfg = ExperimentConfig::from_file(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let records = run_sweep(&cfg)?;
    let summary = summarize(&records)?;
    let histograms = match histogram {
        Some(_) => {
            let field = match field {
                FieldArg::Ratio => HistogramField::Ratio,
                FieldArg::CFinal => HistogramField::CFinal,
            };
            let mut csv = String::from("p,bin_lo,bin_hi,density\n");
            // records are p-major with n_samples per grid point
            for chunk in records.chunks(cfg.n_samples) {
                let h = build_histogram(chunk, bins, field)?;
                for (d, w) in h.densities.iter().zip(h.bin_edges.windows(2)) {
                    csv += &format!("{:.12},{:.12},{:.12},{:.12}\n", chunk[0].p, w[0], w[1], d);
                }
            }
            Some(csv)
        }
        None => None,
    };
    write_atomically(out, &records_to_csv(&records))?;
    if let (Some(path), Some(csv)) = (histogram, histograms) {
        write_atomically(path, &csv)?;
    }
    let mut text = summary_table(format, &summary);
    let worst = summary.iter().map(|s| s.max_violation).fold(0.0, f64::max);
    if worst > 1e-9 {
        text += &format!("bound violated by {worst:e}\n");
        return Err(Failure { code: 1, message: text });
    }
    Ok(text)
}

fn run(cli: Cli) -> CmdResult {
    match &cli.command {
        Command::Concurrence { state, measure } => cmd_concurrence(cli.format, state, *measure),
        Command::Bench { channel } => cmd_bench(cli.format, channel),
        Command::Verify { state, channel, two_sided, side } => {
            cmd_verify(cli.format, state, channel, *two_sided, *side)
        }
        Command::Sweep { config, out, histogram, bins, histogram_field } => {
            cmd_sweep(cli.format, cli.seed, config, out, histogram.as_deref(), *bins as usize, *histogram_field)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(Failure { code, message }) => {
            eprintln!("error: {}", message.trim_end());
            ExitCode::from(code)
        }
    }
}
