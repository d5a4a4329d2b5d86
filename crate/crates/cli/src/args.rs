use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use locc_bounds::bounds::{AnalyzeConfig, HeuristicOptions, Inequality, PovmOptions};
use locc_bounds::measures::BisectionOptions;
use locc_bounds::qla::DEFAULT_RANK_TOL;
use locc_bounds::subspaces::AscentOptions;

#[derive(Debug, Parser)]
#[command(
    name = "locc-bounds",
    version,
    about = "Entanglement-based necessary conditions for perfect LOCC discrimination",
    long_about = "Evaluates upper bounds on the number of perfectly LOCC-distinguishable \
                  orthogonal bipartite states, and a PPT-relaxed POVM feasibility test.\n\n\
                  Exit codes: 0 = not ruled out / satisfied, 1 = ruled out / violated, \
                  2 = input or validation error, 3 = solver non-convergence."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schmidt decomposition of every (pure) state.
    Schmidt(Common),
    /// Entanglement measures of every state.
    Measures(Common),
    /// Most entangled vector, least entangled vector and product content of
    /// every support.
    SubspaceMax(Common),
    /// PPT-relaxed POVM feasibility of the ensemble.
    Feasibility(Common),
    /// One bound chain.
    Bound(BoundArgs),
    /// Every check and the overall verdict.
    Analyze(Common),
    /// List catalog ensembles, or write one as an ensemble file.
    Catalog(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InequalityArg {
    PureChain,
    SupportMaximum,
    ProjectorChain,
    CandidateChain,
    OptimizedChainHeuristic,
}

impl From<InequalityArg> for Inequality {
    fn from(a: InequalityArg) -> Self {
        match a {
            InequalityArg::PureChain => Inequality::PureChain,
            InequalityArg::SupportMaximum => Inequality::SupportMaximum,
            InequalityArg::ProjectorChain => Inequality::ProjectorChain,
            InequalityArg::CandidateChain => Inequality::CandidateChain,
            InequalityArg::OptimizedChainHeuristic => Inequality::OptimizedChainHeuristic,
        }
    }
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub inequality: InequalityArg,
    /// Ensemble file of candidate states for the candidate chain; defaults to
    /// the states themselves.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Ensemble file (JSON).
    #[arg(long, conflicts_with = "catalog")]
    pub file: Option<PathBuf>,
    /// Catalog ensemble name.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Catalog parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Shorthand for `--param alpha=…`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Shorthand for `--param beta=…`.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Relative eigenvalue cutoff for supports and ranks.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol_rank: f64,
    /// Residual below which a POVM is declared feasible.
    #[arg(long, default_value_t = PovmOptions::default().threshold)]
    pub tol_feas: f64,
    /// Sweep limit of the POVM search.
    #[arg(long, default_value_t = PovmOptions::default().max_sweeps)]
    pub max_sweeps: usize,
    /// Final bisection bracket width for R_g and d.
    #[arg(long, default_value_t = BisectionOptions::default().bisect_tol)]
    pub bisect_tol: f64,
    /// Multi-start count of the subspace optimizer.
    #[arg(long, default_value_t = AscentOptions::default().starts)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random starts of the heuristic α⁻¹(1+R_g) maximization.
    #[arg(long, default_value_t = HeuristicOptions::default().starts)]
    pub heuristic_starts: usize,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("value of {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

impl Common {
    pub fn config(&self) -> AnalyzeConfig {
        let d = AnalyzeConfig::default();
        AnalyzeConfig {
            rank_tol: self.tol_rank,
            bisection: BisectionOptions {
                bisect_tol: self.bisect_tol,
                ..d.bisection
            },
            ascent: AscentOptions {
                starts: self.starts,
                seed: self.seed,
                ..d.ascent
            },
            heuristic: HeuristicOptions {
                starts: self.heuristic_starts,
                ..d.heuristic
            },
            povm: PovmOptions {
                threshold: self.tol_feas,
                max_sweeps: self.max_sweeps,
                ..d.povm
            },
        }
    }
}
