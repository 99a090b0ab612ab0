//! One JSON document per run; command-line flags override its fields.
//! Unknown keys are rejected before any computation starts.

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "ufh", version, about = "Window-exact uniformly finite homology runs")]
pub struct Cli {
    /// JSON run config; explicit flags take precedence over its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Group model: Z, Z2, Z3, Z4, heis, or semidirect:a,b,c,d.
    #[arg(long, global = true)]
    pub group: Option<String>,
    /// Enumeration radius for scans that touch "all of G".
    #[arg(long, global = true)]
    pub window: Option<u64>,
    /// Seed for the randomized probes; everything else ignores it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Exact rational arithmetic instead of f64.
    #[arg(long, global = true)]
    pub rational: bool,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: CliCmd,
}

#[derive(Subcommand, Debug)]
pub enum CliCmd {
    /// Enumerate B_r(e) as a point cloud.
    Ball {
        #[arg(long)]
        r: Option<u64>,
    },
    /// Sizes, boundaries and σ of a Følner family.
    Folner {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        jmax: Option<u64>,
    },
    /// Growth table: σ plus β of one function over the family.
    Growth {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        jmax: Option<u64>,
        #[arg(long)]
        chain: Option<String>,
    },
    /// Greedy r-tiling of the window.
    Tile {
        #[arg(long)]
        r: Option<u64>,
    },
    /// Build a sparse set Γ_c and emit it with its diagnostics.
    SparseBuild {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        jmax: Option<u64>,
        /// sigma_squared, power:P, or explicit:p/q;p/q;…
        #[arg(long)]
        c: Option<String>,
    },
    /// Re-check a built sparse set: observed meeting constants per radius.
    SparseVerify {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Radii to certify; defaults to all r with 2r < max r(j).
        #[arg(long, value_delimiter = ',')]
        r: Option<Vec<u64>>,
        #[arg(long)]
        claim: Option<u64>,
    },
    /// Place n families of subgroup-separated tiles up to depth L.
    ThickBuild {
        /// coordinate:a[,b] or center.
        #[arg(long)]
        sub: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        l: Option<u64>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Re-check a built thick family exhaustively.
    ThickVerify {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Search for a set witnessing |Σ_S c| > n·|∂S|.
    Whyte {
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        level: Option<u64>,
        #[arg(long)]
        budget: Option<usize>,
        /// Also bound-check this many seeded random degree-1 chains.
        #[arg(long)]
        bound_chains: Option<usize>,
    },
    /// β-profiles of several functions and their ≺-ordering.
    Indep {
        #[arg(long, value_delimiter = ',')]
        functions: Option<Vec<String>>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        jmax: Option<u64>,
    },
    /// Subgroup-invariant cycle spread over a thick family.
    Cycle {
        #[arg(long)]
        input: Option<PathBuf>,
        /// 1-based family index inside the artifact.
        #[arg(long)]
        k: Option<usize>,
        /// Template row half-length along the subgroup.
        #[arg(long)]
        m: Option<i64>,
    },
    /// Coset-averaged function values over a probe ball.
    CosetAvg {
        #[arg(long)]
        sub: Option<String>,
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        j: Option<u64>,
        #[arg(long)]
        probe: Option<u64>,
    },
}

/// The config document. Every field has a flag twin; a block only matters
/// for its own subcommand.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: Option<String>,
    pub window: Option<u64>,
    pub seed: Option<u64>,
    pub rational: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub ball: Option<BallBlock>,
    pub folner: Option<FolnerBlock>,
    pub growth: Option<GrowthBlock>,
    pub tile: Option<TileBlock>,
    pub sparse: Option<SparseBlock>,
    pub sparse_verify: Option<SparseVerifyBlock>,
    pub thick: Option<ThickBlock>,
    pub thick_verify: Option<ThickVerifyBlock>,
    pub whyte: Option<WhyteBlock>,
    pub indep: Option<IndepBlock>,
    pub cycle: Option<CycleBlock>,
    pub coset_avg: Option<CosetAvgBlock>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct BallBlock {
    pub r: Option<u64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct FolnerBlock {
    pub family: Option<String>,
    pub jmax: Option<u64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct GrowthBlock {
    pub family: Option<String>,
    pub jmax: Option<u64>,
    pub chain: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct TileBlock {
    pub r: Option<u64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct SparseBlock {
    pub family: Option<String>,
    pub jmax: Option<u64>,
    pub c: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct SparseVerifyBlock {
    pub input: Option<PathBuf>,
    pub r: Option<Vec<u64>>,
    pub claim: Option<u64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ThickBlock {
    pub sub: Option<String>,
    pub n: Option<usize>,
    pub l: Option<u64>,
    pub budget: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ThickVerifyBlock {
    pub input: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct WhyteBlock {
    pub function: Option<String>,
    pub family: Option<String>,
    pub level: Option<u64>,
    pub budget: Option<usize>,
    pub bound_chains: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct IndepBlock {
    pub functions: Option<Vec<String>>,
    pub family: Option<String>,
    pub jmax: Option<u64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct CycleBlock {
    pub input: Option<PathBuf>,
    pub k: Option<usize>,
    pub m: Option<i64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct CosetAvgBlock {
    pub sub: Option<String>,
    pub function: Option<String>,
    pub j: Option<u64>,
    pub probe: Option<u64>,
}

/// Fully resolved run: flags merged over the config document, every
/// required field present. `canonical` is the hash input — it omits output
/// paths so a rerun into a different directory stays byte-identical.
#[derive(Debug)]
pub struct Resolved {
    pub group: String,
    pub window: Option<u64>,
    pub seed: u64,
    pub rational: bool,
    pub out_dir: PathBuf,
    pub cmd: CmdSpec,
    pub canonical: Value,
}

#[derive(Debug, Clone)]
pub enum CmdSpec {
    Ball { r: u64 },
    Folner { family: String, jmax: u64 },
    Growth { family: String, jmax: u64, chain: Option<String> },
    Tile { r: u64 },
    SparseBuild { family: String, jmax: u64, c: String },
    SparseVerify { input: PathBuf, r: Option<Vec<u64>>, claim: u64 },
    ThickBuild { sub: String, n: usize, depth: u64, budget: usize },
    ThickVerify { input: PathBuf },
    Whyte { function: String, family: String, level: u64, budget: usize, bound_chains: usize },
    Indep { functions: Vec<String>, family: String, jmax: u64 },
    Cycle { input: PathBuf, k: usize, half_len: i64 },
    CosetAvg { sub: String, function: String, j: u64, probe: u64 },
}

impl CmdSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CmdSpec::Ball { .. } => "ball",
            CmdSpec::Folner { .. } => "folner",
            CmdSpec::Growth { .. } => "growth",
            CmdSpec::Tile { .. } => "tile",
            CmdSpec::SparseBuild { .. } => "sparse-build",
            CmdSpec::SparseVerify { .. } => "sparse-verify",
            CmdSpec::ThickBuild { .. } => "thick-build",
            CmdSpec::ThickVerify { .. } => "thick-verify",
            CmdSpec::Whyte { .. } => "whyte",
            CmdSpec::Indep { .. } => "indep",
            CmdSpec::Cycle { .. } => "cycle",
            CmdSpec::CosetAvg { .. } => "coset-avg",
        }
    }

    fn params_json(&self) -> Value {
        match self {
            CmdSpec::Ball { r } => json!({ "r": r }),
            CmdSpec::Folner { family, jmax } => json!({ "family": family, "jmax": jmax }),
            CmdSpec::Growth { family, jmax, chain } => {
                json!({ "family": family, "jmax": jmax, "chain": chain })
            }
            CmdSpec::Tile { r } => json!({ "r": r }),
            CmdSpec::SparseBuild { family, jmax, c } => {
                json!({ "family": family, "jmax": jmax, "c": c })
            }
            CmdSpec::SparseVerify { input, r, claim } => {
                json!({ "input": input.to_string_lossy(), "r": r, "claim": claim })
            }
            CmdSpec::ThickBuild { sub, n, depth, budget } => {
                json!({ "sub": sub, "n": n, "l": depth, "budget": budget })
            }
            CmdSpec::ThickVerify { input } => json!({ "input": input.to_string_lossy() }),
            CmdSpec::Whyte { function, family, level, budget, bound_chains } => json!({
                "function": function, "family": family, "level": level,
                "budget": budget, "bound_chains": bound_chains
            }),
            CmdSpec::Indep { functions, family, jmax } => {
                json!({ "functions": functions, "family": family, "jmax": jmax })
            }
            CmdSpec::Cycle { input, k, half_len } => {
                json!({ "input": input.to_string_lossy(), "k": k, "m": half_len })
            }
            CmdSpec::CosetAvg { sub, function, j, probe } => {
                json!({ "sub": sub, "function": function, "j": j, "probe": probe })
            }
        }
    }
}

fn need<T>(v: Option<T>, what: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("missing required parameter: {what}"))
}

/// Flags win over config fields; subcommand params come from the flag set
/// or the matching config block.
pub fn resolve(cli: &Cli) -> Result<Resolved, String> {
    let doc: RunConfig = match &cli.config {
        None => RunConfig::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| format!("invalid config {}: {e}", path.display()))?
        }
    };

    let group = cli
        .group
        .clone()
        .or(doc.group.clone())
        .ok_or_else(|| "missing required parameter: group".to_string())?;
    let window = cli.window.or(doc.window);
    let seed = cli.seed.or(doc.seed).unwrap_or(0);
    let rational = cli.rational || doc.rational.unwrap_or(false);
    let out_dir = cli
        .out
        .clone()
        .or(doc.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));

    let cmd = match &cli.cmd {
        CliCmd::Ball { r } => {
            let b = doc.ball.unwrap_or_default();
            CmdSpec::Ball { r: need(r.or(b.r), "r")? }
        }
        CliCmd::Folner { family, jmax } => {
            let b = doc.folner.unwrap_or_default();
            CmdSpec::Folner {
                family: need(family.clone().or(b.family), "family")?,
                jmax: need(jmax.or(b.jmax), "jmax")?,
            }
        }
        CliCmd::Growth { family, jmax, chain } => {
            let b = doc.growth.unwrap_or_default();
            CmdSpec::Growth {
                family: need(family.clone().or(b.family), "family")?,
                jmax: need(jmax.or(b.jmax), "jmax")?,
                chain: chain.clone().or(b.chain),
            }
        }
        CliCmd::Tile { r } => {
            let b = doc.tile.unwrap_or_default();
            CmdSpec::Tile { r: need(r.or(b.r), "r")? }
        }
        CliCmd::SparseBuild { family, jmax, c } => {
            let b = doc.sparse.unwrap_or_default();
            CmdSpec::SparseBuild {
                family: need(family.clone().or(b.family), "family")?,
                jmax: need(jmax.or(b.jmax), "jmax")?,
                c: c.clone().or(b.c).unwrap_or_else(|| "sigma_squared".into()),
            }
        }
        CliCmd::SparseVerify { input, r, claim } => {
            let b = doc.sparse_verify.unwrap_or_default();
            CmdSpec::SparseVerify {
                input: need(input.clone().or(b.input), "input")?,
                r: r.clone().or(b.r),
                claim: claim.or(b.claim).unwrap_or(2),
            }
        }
        CliCmd::ThickBuild { sub, n, l, budget } => {
            let b = doc.thick.unwrap_or_default();
            CmdSpec::ThickBuild {
                sub: need(sub.clone().or(b.sub), "sub")?,
                n: need(n.or(b.n), "n")?,
                depth: need(l.or(b.l), "l")?,
                budget: budget.or(b.budget).unwrap_or(50_000),
            }
        }
        CliCmd::ThickVerify { input } => {
            let b = doc.thick_verify.unwrap_or_default();
            CmdSpec::ThickVerify { input: need(input.clone().or(b.input), "input")? }
        }
        CliCmd::Whyte { function, family, level, budget, bound_chains } => {
            let b = doc.whyte.unwrap_or_default();
            CmdSpec::Whyte {
                function: need(function.clone().or(b.function), "function")?,
                family: need(family.clone().or(b.family), "family")?,
                level: need(level.or(b.level), "level")?,
                budget: budget.or(b.budget).unwrap_or(200),
                bound_chains: bound_chains.or(b.bound_chains).unwrap_or(0),
            }
        }
        CliCmd::Indep { functions, family, jmax } => {
            let b = doc.indep.unwrap_or_default();
            CmdSpec::Indep {
                functions: need(functions.clone().or(b.functions), "functions")?,
                family: need(family.clone().or(b.family), "family")?,
                jmax: need(jmax.or(b.jmax), "jmax")?,
            }
        }
        CliCmd::Cycle { input, k, m } => {
            let b = doc.cycle.unwrap_or_default();
            CmdSpec::Cycle {
                input: need(input.clone().or(b.input), "input")?,
                k: k.or(b.k).unwrap_or(1),
                half_len: m.or(b.m).unwrap_or(2),
            }
        }
        CliCmd::CosetAvg { sub, function, j, probe } => {
            let b = doc.coset_avg.unwrap_or_default();
            CmdSpec::CosetAvg {
                sub: need(sub.clone().or(b.sub), "sub")?,
                function: need(function.clone().or(b.function), "function")?,
                j: need(j.or(b.j), "j")?,
                probe: probe.or(b.probe).unwrap_or(6),
            }
        }
    };

    let canonical = json!({
        "cmd": cmd.name(),
        "group": group,
        "params": cmd.params_json(),
        "rational": rational,
        "seed": seed,
        "window": window,
    });

    Ok(Resolved { group, window, seed, rational, out_dir, cmd, canonical })
}
