use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "morrey", version, about = "Generalized Morrey spaces on sampled functions")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug)]
pub struct Common {
    /// File of `key = value` lines using the long flag names; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// JSON report destination (default stdout).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Tidy CSV destination for experiments that have one.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Fixed reduction orders. Every reduction in the toolkit is index
    /// ordered, so `false` changes nothing; the value is echoed in reports.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    pub deterministic: bool,
}

#[derive(Args, Debug, Clone)]
pub struct WeightOpt {
    /// Weight expression, e.g. `power:0.5` or `min(power:0.5,power:0)`.
    #[arg(long)]
    pub weight: String,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ProbeOpt {
    /// `t_min,t_max,points_per_octave`
    #[arg(long)]
    pub probe: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct FnOpt {
    /// Catalog function, e.g. `cube:0,1` or `smooth:3`.
    #[arg(long = "fn")]
    pub func: Option<String>,
    /// Grid function file (CSV or binary).
    #[arg(long)]
    pub fn_file: Option<PathBuf>,
    /// `n,L,N`
    #[arg(long)]
    pub grid: Option<String>,
    /// `dyadic`, `all` or a comma list of sides in cells.
    #[arg(long, default_value = "dyadic")]
    pub sides: String,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Class membership, doubling and the integral condition of a weight.
    CheckWeight {
        #[command(flatten)]
        w: WeightOpt,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        probe: ProbeOpt,
    },
    /// Equivalent weight in normal form.
    NormalizeWeight {
        #[command(flatten)]
        w: WeightOpt,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[command(flatten)]
        probe: ProbeOpt,
        /// Also write the normalized weight tabulated on the probe as CSV.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Morrey norm with its witness cube.
    Norm {
        #[command(flatten)]
        w: WeightOpt,
        #[command(flatten)]
        f: FnOpt,
    },
    /// Weak Morrey norm with its witness cube and level.
    WeakNorm {
        #[command(flatten)]
        w: WeightOpt,
        #[command(flatten)]
        f: FnOpt,
    },
    /// Apply an operator: `maximal`, `maximal(<w>,eta)`, `frac(<w>)`, `riesz:j[,eps]`.
    ApplyOp {
        #[arg(long)]
        op: String,
        #[command(flatten)]
        f: FnOpt,
        /// Write the output function here instead of inlining its values.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Normalize a function on a cube into a block.
    MakeBlock {
        #[command(flatten)]
        w: WeightOpt,
        #[command(flatten)]
        f: FnOpt,
        /// Lower corner then side, in cells: `lo_1,…,lo_n,side`.
        #[arg(long)]
        cube: String,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda: f64,
        /// Decomposition file to write.
        #[arg(long)]
        save: Option<PathBuf>,
        /// Add the block to the decomposition already in `--save`.
        #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false, action = ArgAction::Set)]
        append: bool,
    },
    /// Regroup a decomposition onto dyadic cubes.
    Regroup {
        #[command(flatten)]
        w: WeightOpt,
        #[arg(long)]
        blocks: PathBuf,
        #[arg(long)]
        grid: String,
        /// Write the regrouped decomposition here.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Pair a function with a decomposition and check the Hölder bound.
    Pairing {
        #[command(flatten)]
        w: WeightOpt,
        #[arg(long)]
        blocks: PathBuf,
        #[command(flatten)]
        f: FnOpt,
    },
    /// Experiments.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// The full acceptance battery.
    Suite {
        /// Comma list of criterion ids to run (default all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Operator-norm ratios over a function family at two resolutions.
    Maximal {
        #[arg(long, default_value = "maximal")]
        op: String,
        #[command(flatten)]
        w: WeightOpt,
        /// Target weight (default: the source weight).
        #[arg(long)]
        target_weight: Option<String>,
        /// Target exponent (default: q).
        #[arg(long)]
        t: Option<f64>,
        /// Measure the output in the weak norm.
        #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false, action = ArgAction::Set)]
        weak: bool,
        /// `corpus` or a `;`-separated list of catalog functions.
        #[arg(long, default_value = "corpus")]
        family: String,
        /// `none` or `u,jmax` (`u` may be `inf`).
        #[arg(long, default_value = "none")]
        aggregate: String,
        #[arg(long, default_value = "1,4,128")]
        grid: String,
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Annuli family against the vector-valued maximal inequality.
    VectorCounterexample {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Aggregation exponent; `inf` for the max.
        #[arg(long, default_value = "2")]
        u: String,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        m: Vec<u32>,
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Cone family against the first Riesz transform.
    RieszCounterexample {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "4,8,12")]
        m: Vec<u32>,
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Pointwise Hedberg quotients.
    Hedberg {
        /// Morrey weight φ.
        #[arg(long, default_value = "power:0.5")]
        weight: String,
        /// Kernel ρ (default φ^{1−a} for the maximal variant).
        #[arg(long)]
        rho: Option<String>,
        /// Maximal variant exponent.
        #[arg(long)]
        a: Option<f64>,
        /// Fractional variant exponents `p,q`.
        #[arg(long)]
        pq: Option<String>,
        /// Catalog function (default: the whole corpus).
        #[arg(long = "fn")]
        func: Option<String>,
        #[arg(long, default_value = "1,4,128")]
        grid: String,
        /// Exponent of the normalizing Morrey norm.
        #[arg(long, default_value_t = 1.0)]
        norm_q: f64,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[command(flatten)]
        probe: ProbeOpt,
    },
    /// Packed-cube family: bounded norms, divergent embedding marker.
    Packed {
        /// Weight φ (default `power:n/p`).
        #[arg(long)]
        weight: Option<String>,
        #[arg(long, default_value_t = 1.0 / 1.8)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        q2: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        k: Vec<u32>,
        #[arg(long, default_value = "1,1,1024")]
        grid: String,
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Staircase, radial and sup-norm membership checks.
    Membership {
        #[command(flatten)]
        w: WeightOpt,
        #[arg(long, default_value = "1,2,256")]
        grid: String,
        #[command(flatten)]
        probe: ProbeOpt,
    },
    /// Spanne condition on the power triple `t^α, t^{n/p}, t^{n/p−α}`.
    Spanne {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.25)]
        alpha: f64,
        /// Shift of the kernel exponent.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb: f64,
        #[command(flatten)]
        probe: ProbeOpt,
    },
    /// Adams condition on the power triple `t^{n/p−n/q}, t^{n/p}`.
    Adams {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 4.0)]
        q: f64,
        /// Use the simple form of the condition.
        #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false, action = ArgAction::Set)]
        simple: bool,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb: f64,
        #[command(flatten)]
        probe: ProbeOpt,
    },
}
