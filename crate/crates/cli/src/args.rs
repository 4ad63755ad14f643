use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ghzq_core::study::ConventionFamily;
use ghzq_core::MAX_QUBITS;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "ghzq", version, about = "Phase-space sampling of GHZ Bell correlations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalised Bell violation F/F_QM for each m.
    BellSweep(BellSweepArgs),
    /// Relative sampling errors of F and of the spin-up number versus m.
    Scaling(ScalingArgs),
    /// Per-sample factor and term values for a qubit pair.
    Scatter(ScatterArgs),
    /// Decay of F under collective dephasing noise.
    Decoherence(DecoherenceArgs),
    /// Oracle, quadrature and sampler cross-checks.
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionArg {
    Mermin,
    Ardehali,
    Auto,
}

impl From<ConventionArg> for ConventionFamily {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Mermin => ConventionFamily::Mermin,
            ConventionArg::Ardehali => ConventionFamily::Ardehali,
            ConventionArg::Auto => ConventionFamily::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Bell convention; auto picks Mermin for odd m and Ardehali for even m
    #[arg(long, value_enum, default_value_t = ConventionArg::Auto)]
    pub convention: ConventionArg,

    /// Samples per point; scientific notation such as 1e6 is accepted
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    pub samples: u64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Worker threads; 0 uses all available cores
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,

    /// Output file; written atomically. Defaults to stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BellSweepArgs {
    /// Qubit counts: a single value, a list `2,4,6` or a range `start:end[:step]`
    #[arg(long, value_parser = parse_m_list, default_value = "3:11:2")]
    pub m: MList,

    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScalingArgs {
    #[arg(long, value_parser = parse_m_list, default_value = "4:24")]
    pub m: MList,

    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScatterArgs {
    #[arg(long, value_parser = parse_m_list, default_value = "2")]
    pub m: MList,

    /// One-based qubit labels of the pair
    #[arg(long, value_parser = parse_pair, default_value = "1,2")]
    pub pair: (usize, usize),

    /// Maximum rows written; moments always use every sample
    #[arg(long, default_value_t = 10_000)]
    pub rows: usize,

    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecoherenceArgs {
    #[arg(long, value_parser = parse_m_list, default_value = "2,3,4,6")]
    pub m: MList,

    /// Per-step noise strength ε
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,

    /// Number of time steps τ
    #[arg(long, default_value_t = 30)]
    pub steps: u32,

    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleCheckArgs {
    /// Largest m checked against the dense oracle
    #[arg(long, default_value_t = ghzq_core::oracle::ORACLE_CAP)]
    pub max_m: usize,

    /// Largest m in the sampler-versus-oracle moment checks
    #[arg(long, default_value_t = 10)]
    pub max_sampled_m: usize,

    /// Quadrature nodes per angle
    #[arg(long, default_value_t = 16)]
    pub resolution: usize,

    #[arg(long, value_parser = parse_count, default_value = "200000")]
    pub samples: u64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,

    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct MList(pub Vec<usize>);

fn parse_m_value(s: &str) -> Result<usize, String> {
    let m: usize = s.trim().parse().map_err(|_| format!("`{s}` is not a qubit count"))?;
    if m == 0 || m > MAX_QUBITS {
        return Err(format!("m = {m} outside 1..={MAX_QUBITS}"));
    }
    Ok(m)
}

pub fn parse_m_list(s: &str) -> Result<MList, String> {
    let ms = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() > 3 {
            return Err(format!("range `{s}` must be start:end[:step]"));
        }
        let start = parse_m_value(parts[0])?;
        let end = parse_m_value(parts[1])?;
        let step: usize = match parts.get(2) {
            Some(p) => p.trim().parse().map_err(|_| format!("bad step in `{s}`"))?,
            None => 1,
        };
        if step == 0 || end < start {
            return Err(format!("empty range `{s}`"));
        }
        (start..=end).step_by(step).collect()
    } else {
        s.split(',').map(parse_m_value).collect::<Result<Vec<_>, _>>()?
    };
    if ms.is_empty() {
        return Err("no qubit counts given".into());
    }
    Ok(MList(ms))
}

/// Positive sample count, accepting `1000`, `1e6` or `2.5e5`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let n = match s.trim().parse::<u64>() {
        Ok(n) => n,
        Err(_) => {
            let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a count"))?;
            if !x.is_finite() || x < 0.0 || x.fract() != 0.0 || x > 9.0e18 {
                return Err(format!("`{s}` is not a nonnegative integer count"));
            }
            x as u64
        }
    };
    if n == 0 {
        return Err("sample count must be positive".into());
    }
    Ok(n)
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("pair `{s}` must be `a,b`"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad qubit label `{a}`"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad qubit label `{b}`"))?;
    if a == 0 || b == 0 || a == b {
        return Err(format!("pair `{s}` needs two distinct one-based labels"));
    }
    Ok((a, b))
}
