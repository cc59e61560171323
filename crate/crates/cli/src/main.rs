//! Command-line front end: generators, checks, samplers and experiments.
//!
//! Graphs travel as edge lists, triangle sets as triple lists, reports as
//! JSON and experiment tables as CSV.

mod commands;
mod host;

use clap::{Args, Parser, Subcommand, ValueEnum};
use host::HostSpec;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "robustlab", version, about = "Random sparsifications of pseudorandom graphs")]
pub struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, env = robustlab::rng::SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GraphInput {
    /// Edge-list file.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Built-in host such as `paley:1009`, `complete:60`, `gnp:200:0.5` or
    /// `regular:100:6`.
    #[arg(long)]
    pub host: Option<HostSpec>,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum CoupleMode {
    Exact,
    Bound,
    MonteCarlo,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum SamplerKind {
    AlmostFactor,
    Pipeline,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Random d-regular graph.
    Regular {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Exact rejection sampling of whole pairings.
        #[arg(long)]
        pairing: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Paley graph on a prime q ≡ 1 (mod 4).
    Paley {
        #[arg(long)]
        q: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Binomial random graph G(n, p).
    Gnp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Random d-regular bipartite graph with parts of size n.
    Bipartite {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Keep each edge independently with probability p.
    Sparsify {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Second-largest absolute eigenvalue.
    Spectrum {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long, default_value_t = robustlab::spectral::DEFAULT_TOL)]
        tol: f64,
    },
    /// Expander mixing bound over set pairs.
    Mixing {
        #[command(flatten)]
        graph: GraphInput,
        /// Number of random pairs; exhaustive when omitted.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// C-expander certification.
    CheckExpander {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        c: f64,
        /// Random sets per size class instead of the exact check.
        #[arg(long)]
        sampled: Option<usize>,
    },
    /// Maximum matching, with a Tutte witness on small graphs.
    Matching {
        #[command(flatten)]
        graph: GraphInput,
    },
    /// Hamiltonian cycle search.
    Hamilton {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
    },
    /// Triangle hypergraph statistics; `--list` prints the triple list.
    Triangles {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long)]
        list: bool,
    },
    /// Sequential coupling of G_p with a random triangle hypergraph.
    Couple {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0 / 2048.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0 / 512.0)]
        c: f64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, value_enum, default_value = "exact")]
        mode: CoupleMode,
        /// Samples per probability in Monte Carlo mode.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        /// Write each trial's event log to this directory.
        #[arg(long)]
        logs: Option<PathBuf>,
    },
    /// Greedy triangle almost-factor.
    AlmostFactor {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        eta: f64,
        /// Edge density; defaults to that of the host.
        #[arg(long)]
        q: Option<f64>,
        /// JSON summary written here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Nested random vertex sets with degree and spectral audits.
    Vortex {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 1000)]
        retries: usize,
        /// Override for the last-level size window, as `lo,hi`.
        #[arg(long)]
        window: Option<String>,
    },
    /// Cover every vertex outside a random reserve by triangles.
    Coverdown {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        /// Reserve size; defaults to ⌈α²n⌉.
        #[arg(long)]
        reserve: Option<usize>,
    },
    /// Exact triangle factor (or the absorption pipeline with `--spread`).
    Factor {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        spread: bool,
        #[arg(long, default_value_t = 0.7)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value_t = robustlab::spread::DEFAULT_NODE_BUDGET)]
        budget: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Largest empirical probability of a fixed set of triangles.
    SpreadEstimate {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long, value_enum, default_value = "almost-factor")]
        sampler: SamplerKind,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long, default_value_t = 0.7)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = robustlab::spread::MIN_SPREAD_TRIALS)]
        trials: u64,
        /// Per-triangle target; defaults to 18/(q³η³n²).
        #[arg(long)]
        q_target: Option<f64>,
    },
    /// Success probability of a property across a grid of p.
    ThresholdSweep {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        property: robustlab::experiments::Property,
        /// Explicit grid, comma separated.
        #[arg(long, conflicts_with_all = ["factors", "bisect"])]
        grid: Option<String>,
        /// Geometric grid `lo,hi,points` in units of the reference value.
        #[arg(long, conflicts_with = "bisect")]
        factors: Option<String>,
        /// Bisection `lo,hi,steps` in absolute p.
        #[arg(long)]
        bisect: Option<String>,
        /// Also evaluate at (1+γ) times the reference value.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// JSON curve written here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Isolated-vertex moments, or uncovered vertices with `--uncovered`.
    Moments {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        uncovered: bool,
    },
    /// Failure frequencies of the robust-expansion events.
    Events {
        #[command(flatten)]
        graph: GraphInput,
        /// Absolute p.
        #[arg(long, conflicts_with = "factor", required_unless_present = "factor")]
        p: Option<f64>,
        /// p as a multiple of ln n / d.
        #[arg(long)]
        factor: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 10)]
        sets: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// CSV table written here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Log-log fit of the threshold against n on complete hosts.
    Scaling {
        #[arg(long, value_delimiter = ',', default_value = "30,60,90,120")]
        n_list: Vec<usize>,
        #[arg(long, default_value = "TRIANGLE_FACTOR")]
        property: robustlab::experiments::Property,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0.4)]
        lo_factor: f64,
        #[arg(long, default_value_t = 2.5)]
        hi_factor: f64,
        #[arg(long, default_value_t = 9)]
        points: usize,
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

fn main() {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    if let Err(e) = robustlab::par::with_jobs(jobs, || commands::run(cli)) {
        let closed = e
            .downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe);
        if closed {
            return;
        }
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
