//! `regret`: potential evaluation, bound tables, simulation and exact checks.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numeric failure, 3 a checked
//! inequality failed.

mod table;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use regret_potentials::bounds::{bound_report_for, BoundStrategy};
use regret_potentials::dp::{verify_horizon, DpOptions};
use regret_potentials::heat::{phi_eval, HeatPotentialParams};
use regret_potentials::max_potential::{psi_eval, MaxPotentialParams};
use regret_potentials::potential::exp_potential;
use regret_potentials::strategies::{StrategyKind, StrategySpec};
use regret_potentials::{simulate, Error, GameConfig, PotentialEval};

use table::{Cell, Format, Table};

#[derive(Parser, Debug)]
#[command(name = "regret", version, about = "Potential-based regret bounds for prediction with expert advice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to a file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a potential, its gradient and (max potential) its Hessian.
    Eval(EvalArgs),
    /// Bound values and C_N = bound / √|T| for a range of N.
    Bounds(BoundsArgs),
    /// Monte-Carlo estimate of the expected regret of a player against an adversary.
    Simulate(SimulateArgs),
    /// Check every bound against exact game values for small N and |T|.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PotentialKind {
    Heat,
    Max,
    Exp,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_enum)]
    potential: PotentialKind,
    /// Regret vector, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    /// Time, a negative number.
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    /// Diffusion factor (heat and max; default 1).
    #[arg(long)]
    kappa: Option<f64>,
    /// Learning rate (exp; default 1).
    #[arg(long)]
    eta: Option<f64>,
    /// Quadrature tolerance for the heat potential.
    #[arg(long, default_value_t = 1e-10)]
    quad_tol: f64,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Expert counts, as `A..B` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "2..20")]
    n: String,
    /// Number of rounds |T|.
    #[arg(long, default_value_t = 10_000_000)]
    horizon: u64,
    /// Bound names: exp_ub, heat_lb (= heat_lb_h), heat_lb_r, heat_lb_c, heat_ub, max_lb, max_ub, gyorgy_lb.
    #[arg(long, value_delimiter = ',', default_value = "exp_ub,heat_lb,gyorgy_lb,max_ub,heat_ub")]
    strategies: Vec<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// exp_player, heat_player, max_player or uniform_player.
    #[arg(long)]
    player: String,
    /// randomized_adv, comb_adv, heat_adv, max_adv or point_mass_adv.
    #[arg(long)]
    adversary: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    horizon: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Player diffusion factor override (heat_player, max_player).
    #[arg(long)]
    kappa: Option<f64>,
    /// Learning rate override (exp_player); default √(2 ln N / |T|).
    #[arg(long)]
    eta: Option<f64>,
    /// Per-round quadrature tolerance for heat_player.
    #[arg(long)]
    quad_tol: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Expert count; both 2 and 3 when omitted.
    #[arg(long)]
    n: Option<usize>,
    /// Largest |T|; every horizon from 1 up to it is checked.
    #[arg(long, default_value_t = 6)]
    horizon: u64,
}

/// A failed command with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numeric { .. } | Error::StrategyContract { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("output: {e}"),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type Outcome = Result<(Table, bool), Failure>;

const BOUND_HEADERS: [&str; 8] = ["n", "horizon", "strategy", "direction", "potential_value", "error", "bound", "c_n"];

fn eval(args: &EvalArgs) -> Outcome {
    if args.x.len() < 2 {
        return Err(invalid("the regret vector needs at least two components"));
    }
    let e: PotentialEval = match args.potential {
        PotentialKind::Heat => {
            if args.eta.is_some() {
                return Err(invalid("--eta applies to the exp potential only"));
            }
            let p = HeatPotentialParams::with_tolerance(args.kappa.unwrap_or(1.0), args.quad_tol)?;
            phi_eval(&args.x, args.t, &p)?
        }
        PotentialKind::Max => {
            if args.eta.is_some() {
                return Err(invalid("--eta applies to the exp potential only"));
            }
            psi_eval(&args.x, args.t, &MaxPotentialParams::new(args.kappa.unwrap_or(1.0))?)?
        }
        PotentialKind::Exp => {
            if args.kappa.is_some() {
                return Err(invalid("--kappa applies to the heat and max potentials only"));
            }
            exp_potential(&args.x, args.t, args.eta.unwrap_or(1.0))?
        }
    };
    let mut t = Table::new(&["quantity", "i", "j", "value"]);
    t.push(vec!["value".into(), Cell::Empty, Cell::Empty, e.value.into()]);
    t.push(vec![
        "quadrature_error".into(),
        Cell::Empty,
        Cell::Empty,
        e.quadrature_error_estimate.into(),
    ]);
    for (i, g) in e.gradient.iter().enumerate() {
        t.push(vec!["gradient".into(), (i + 1).into(), Cell::Empty, (*g).into()]);
    }
    // the exp Hessian is available but only the max potential's is part of the report
    if args.potential == PotentialKind::Max {
        for (i, row) in e.hessian.iter().flatten().enumerate() {
            for (j, h) in row.iter().enumerate() {
                t.push(vec!["hessian".into(), (i + 1).into(), (j + 1).into(), (*h).into()]);
            }
        }
    }
    Ok((t, true))
}

fn parse_n_range(arg: &str) -> Result<Vec<usize>, Failure> {
    let bad = || invalid(format!("cannot parse expert counts `{arg}`; use A..B or a list"));
    let ns: Vec<usize> = if let Some((a, b)) = arg.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        arg.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if ns.iter().any(|&n| n < 2) {
        return Err(invalid("expert counts must be at least 2"));
    }
    Ok(ns)
}

fn bounds(args: &BoundsArgs) -> Outcome {
    let ns = parse_n_range(&args.n)?;
    let mut strategies: Vec<BoundStrategy> = args
        .strategies
        .iter()
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()?;
    strategies.sort_by_key(|s| s.as_str());
    strategies.dedup();
    let mut t = Table::new(&BOUND_HEADERS);
    for n in ns {
        for &s in &strategies {
            let r = bound_report_for(s, n, args.horizon)?;
            t.push(vec![
                r.n.into(),
                r.horizon.into(),
                r.strategy.into(),
                r.direction.to_string().into(),
                r.potential_value.into(),
                r.error.into(),
                r.bound.into(),
                r.c_n.into(),
            ]);
        }
    }
    Ok((t, true))
}

/// Closed-form bound naming the strategy, when defaults are in use.
fn matching_bound(kind: StrategyKind) -> Option<BoundStrategy> {
    match kind {
        StrategyKind::ExpPlayer => Some(BoundStrategy::ExpUb),
        StrategyKind::HeatPlayer => Some(BoundStrategy::HeatUb),
        StrategyKind::MaxPlayer => Some(BoundStrategy::MaxUb),
        StrategyKind::RandomizedAdv => Some(BoundStrategy::HeatLbR),
        StrategyKind::CombAdv => Some(BoundStrategy::HeatLbC),
        StrategyKind::HeatAdv => Some(BoundStrategy::HeatLbH),
        StrategyKind::MaxAdv => Some(BoundStrategy::MaxLb),
        StrategyKind::UniformPlayer | StrategyKind::PointMassAdv => None,
    }
}

fn simulate_cmd(args: &SimulateArgs) -> Outcome {
    let mut player_spec: StrategySpec = args.player.parse()?;
    if !player_spec.kind.is_player() {
        return Err(invalid(format!("{} is not a player", args.player)));
    }
    let adversary_spec: StrategySpec = args.adversary.parse()?;
    if adversary_spec.kind.is_player() {
        return Err(invalid(format!("{} is not an adversary", args.adversary)));
    }
    player_spec.kappa = args.kappa;
    player_spec.eta = args.eta;
    player_spec.quad_tolerance = args.quad_tol;
    let config = GameConfig::new(args.n, args.horizon)?;
    let player = player_spec.player(args.n, args.horizon)?;
    let adversary = adversary_spec.adversary(args.n)?;
    let stats = simulate(player.as_ref(), adversary.as_ref(), &config, args.seed, args.trials)?;

    let defaults = args.kappa.is_none() && args.eta.is_none();
    let upper = matching_bound(player_spec.kind).filter(|_| defaults);
    let lower = matching_bound(adversary_spec.kind);
    let bound_of = |b: Option<BoundStrategy>| -> Result<(Cell, Cell), Failure> {
        Ok(match b {
            Some(b) => (b.as_str().into(), bound_report_for(b, args.n, args.horizon)?.bound.into()),
            None => (Cell::Empty, Cell::Empty),
        })
    };
    let (upper_name, upper_value) = bound_of(upper)?;
    let (lower_name, lower_value) = bound_of(lower)?;
    let mut t = Table::new(&[
        "n",
        "horizon",
        "player",
        "adversary",
        "trials",
        "seed",
        "mean",
        "std_error",
        "lower_bound_strategy",
        "lower_bound",
        "upper_bound_strategy",
        "upper_bound",
    ]);
    t.push(vec![
        args.n.into(),
        args.horizon.into(),
        player.name().into(),
        adversary.name().into(),
        stats.trials.into(),
        stats.seed.into(),
        stats.mean.into(),
        stats.std_error.into(),
        lower_name,
        lower_value,
        upper_name,
        upper_value,
    ]);
    Ok((t, true))
}

fn verify(args: &VerifyArgs) -> Outcome {
    let ns = match args.n {
        Some(n) => vec![n],
        None => vec![2, 3],
    };
    let opts = DpOptions::default();
    let mut headers = BOUND_HEADERS.to_vec();
    headers.extend(["dp_value", "slack"]);
    let mut t = Table::new(&headers);
    let mut ok = true;
    let (mut pairs, mut failed_pairs) = (0usize, 0usize);
    for n in ns {
        for h in 1..=args.horizon {
            let report = verify_horizon(n, h, &opts)?;
            for s in &report.sandwiches {
                if !s.pass {
                    ok = false;
                    eprintln!(
                        "FAIL {} N={n} |T|={h}: exact {} vs bound {}",
                        s.report.strategy, s.dp_value, s.report.bound
                    );
                }
                let r = &s.report;
                t.push(vec![
                    r.n.into(),
                    r.horizon.into(),
                    r.strategy.clone().into(),
                    r.direction.to_string().into(),
                    r.potential_value.into(),
                    r.error.into(),
                    r.bound.into(),
                    r.c_n.into(),
                    s.dp_value.into(),
                    s.slack.into(),
                ]);
            }
            for c in &report.cross_pairs {
                pairs += 1;
                if !c.pass {
                    ok = false;
                    failed_pairs += 1;
                    eprintln!(
                        "FAIL {} vs {} N={n} |T|={h}: {} > {}",
                        c.adversary, c.player, c.adversary_value, c.player_value
                    );
                }
            }
        }
    }
    eprintln!("adversary/player comparisons: {pairs} checked, {failed_pairs} failed");
    Ok((t, ok))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let (table, ok) = match &cli.command {
        Command::Eval(a) => eval(a)?,
        Command::Bounds(a) => bounds(a)?,
        Command::Simulate(a) => simulate_cmd(a)?,
        Command::Verify(a) => verify(a)?,
    };
    match &cli.output.output {
        Some(path) => {
            let mut f = File::create(path)?;
            table.write(cli.output.format, &mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(cli.output.format, &mut lock)?;
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
