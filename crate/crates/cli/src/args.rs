use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use ising_rc::Caps;

#[derive(Parser, Serialize, Deserialize, Debug, Clone, PartialEq)]
#[command(
    name = "isingrc",
    version,
    about = "Exact, Monte Carlo and inequality checks for Ising, random-current, FK and Z2 gauge models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub enum Command {
    /// Exact quantities cross-checked between two engines.
    Exact {
        #[arg(value_enum)]
        what: ExactKind,
        #[command(flatten)]
        common: Common,
    },
    /// Representation identities.
    Verify {
        #[arg(value_enum)]
        what: VerifyKind,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        extra: VerifyArgs,
    },
    /// Correlation inequality suites on seeded random instances.
    Ineq {
        #[arg(value_enum)]
        suite: IneqKind,
        #[command(flatten)]
        common: Common,
        /// Where to write the worst instance (graph file with header).
        #[arg(long)]
        #[serde(skip)]
        worst: Option<PathBuf>,
    },
    /// Z2 gauge model, duality and deconfinement chain.
    Gauge {
        #[arg(value_enum)]
        what: GaugeKind,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gauge: GaugeArgs,
    },
    /// Monte Carlo estimates compared with exact values.
    Sample {
        #[arg(value_enum)]
        what: SampleKind,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Summarize result CSVs.
    Report {
        files: Vec<PathBuf>,
        /// Plain columnar plot data (beta, quantity, lhs, rhs).
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        #[serde(skip)]
        out: Option<PathBuf>,
    },
    /// Re-check a saved inequality instance.
    Replay {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        #[serde(skip)]
        out: Option<PathBuf>,
    },
    /// Rerun the configuration echoed in a result CSV header.
    Rerun {
        file: PathBuf,
        #[arg(long)]
        #[serde(skip)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactKind {
    Z,
    Corr,
    U4,
    Tension,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyKind {
    Switching,
    Xtoy,
    Ursell,
    Frustration,
    Boundary,
    Disorder,
    Fold,
    Dobrushin,
    Fkrcr,
    Duality,
    Pathprops,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
pub enum IneqKind {
    Griffiths,
    Ghs,
    Simonlieb,
    Dss,
    Smms,
    Vanbeijeren,
    Tree,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeKind {
    Z,
    Wilson,
    Dualbeta,
    Dualcheck,
    Deconfine,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Metropolis,
    Sw,
    Currents,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct Common {
    /// Graph file (`vertex`, `edge`, `boundary` records).
    #[arg(long, conflicts_with = "lattice")]
    pub graph: Option<PathBuf>,
    /// Box lattice, e.g. `box:d=2,L=3x4,bc=pm`.
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long, conflicts_with = "beta_sweep")]
    pub beta: Option<f64>,
    /// Inclusive sweep `start:end:step`.
    #[arg(long)]
    pub beta_sweep: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Vertex list used by the subcommand (pairs, quadruples, sources).
    #[arg(long, value_delimiter = ',')]
    pub sites: Vec<usize>,
    #[command(flatten)]
    pub caps: CapArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct CapArgs {
    #[arg(long)]
    pub cap_spin: Option<usize>,
    #[arg(long)]
    pub cap_single_edges: Option<usize>,
    #[arg(long)]
    pub cap_double_states: Option<u128>,
    #[arg(long)]
    pub cap_fk_edges: Option<usize>,
    #[arg(long)]
    pub cap_plaquettes: Option<usize>,
    #[arg(long)]
    pub cap_gauge_edges: Option<usize>,
}

impl CapArgs {
    pub fn caps(&self) -> Caps {
        let d = Caps::default();
        Caps {
            spin_vertices: self.cap_spin.unwrap_or(d.spin_vertices),
            single_edges: self.cap_single_edges.unwrap_or(d.single_edges),
            double_states: self.cap_double_states.unwrap_or(d.double_states),
            fk_edges: self.cap_fk_edges.unwrap_or(d.fk_edges),
            plaquettes: self.cap_plaquettes.unwrap_or(d.plaquettes),
            gauge_edges: self.cap_gauge_edges.unwrap_or(d.gauge_edges),
        }
        .bounded()
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',')]
    pub a1: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub a2: Vec<usize>,
    /// Switched source set.
    #[arg(long = "switch", value_delimiter = ',')]
    pub switch: Vec<usize>,
    /// Edge ids whose coupling sign is flipped.
    #[arg(long, value_delimiter = ',')]
    pub flips: Vec<usize>,
    /// Reflection axis (defaults to the last axis).
    #[arg(long)]
    pub axis: Option<usize>,
    /// Reflection plane coordinate (defaults to the middle of the axis).
    #[arg(long)]
    pub plane: Option<f64>,
    /// Gauge box for `verify duality`, e.g. `2x1x1`.
    #[arg(long, default_value = "1x1x1")]
    pub cells: String,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct GaugeArgs {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Box size in cells, e.g. `2x2x1`.
    #[arg(long, default_value = "1x1x1")]
    pub cells: String,
    /// Side of the square Wilson loop.
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 20_000)]
    pub sweeps: usize,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
}
