//! `pbr-monty`: analysis, simulation, sweeps, the Born matrix, teleportation,
//! and the play server behind one command.
//!
//! Results go to standard output as an [`OutputEnvelope`], JSON by default
//! or a text table with `--table`. `sweep` writes CSV unless `--json` is
//! given. Exit status is 0 on success, 2 on a usage error (unknown
//! subcommand, game, or flag; malformed number), and 1 when well-formed
//! input is rejected (e.g. `q1 > 1/4`), with the reason on standard error.

mod render;

use std::error::Error;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pbr_monty::engine::{enumerate_joint, Strategy};
use pbr_monty::envelope::{analysis_envelope, simulation_envelope, OutputEnvelope};
use pbr_monty::games::{params_from_parts, sweep_epistemic, EpistemicParams, GameKind, GamesError, PrepState};
use pbr_monty::qcore::{born_matrix, is_antidistinguishable, pbr_basis, pbr_states};
use pbr_monty::rational::{self, fraction_string, parse_rational, ratio, to_f64, Rational};
use pbr_monty::teleport::{
    monty_teleport_game_for, simulate_teleport_with, unreliable_analysis, BellLabel, TeleportMode,
};
use pbr_monty::Execution;
use pbr_monty_session::ServeConfig;
use serde_json::json;

/// Environment variable holding the default `serve` port.
pub const PORT_ENV: &str = "PBR_MONTY_PORT";
pub const DEFAULT_PORT: u16 = 8080;

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser, Debug)]
#[command(name = "pbr-monty", version, about = "Exact and Monte Carlo analysis of quantum Monty Hall games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact win probabilities for a catalog game.
    Analyze {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded Monte Carlo beside the exact value it estimates.
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        /// stick, switch, or random (fair coin per trial)
        #[arg(long)]
        strategy: Strategy,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// ψ-epistemic stick and switch rates over a range of q.
    Sweep(SweepArgs),
    /// Born probabilities of the four preparations in the entangled basis.
    BornMatrix {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Teleportation and its Monty Hall variants.
    Teleport {
        #[command(subcommand)]
        command: TeleportCommand,
    },
    /// Serve the HTTP play API, and the web UI if a build directory is given.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct GameArgs {
    /// classic, ignorant, psi-ontic, psi-epistemic, or monty-teleport
    game: GameKind,
    /// Total ψ-epistemic deformation, split equally into q1, q2, q3
    #[arg(long, value_parser = rational_arg, conflicts_with_all = ["q1", "q2", "q3"])]
    q: Option<Rational>,
    /// Weight moved onto outcome 1 from the first quarter-probability door (0..=1/4)
    #[arg(long, value_parser = rational_arg)]
    q1: Option<Rational>,
    /// Weight moved from the second quarter-probability door (0..=1/4)
    #[arg(long, value_parser = rational_arg)]
    q2: Option<Rational>,
    /// Weight moved from the half-probability door (0..=1/2)
    #[arg(long, value_parser = rational_arg)]
    q3: Option<Rational>,
    /// Preparation state 1..=4 for the ψ-ontic and ψ-epistemic games
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    state: Option<u8>,
}

impl GameArgs {
    fn resolve(&self) -> std::result::Result<(GameKind, Option<EpistemicParams>, PrepState), GamesError> {
        let params = params_from_parts(self.q.clone(), [self.q1.clone(), self.q2.clone(), self.q3.clone()])?;
        if params.is_some() && !self.game.takes_q() {
            return Err(GamesError::UnexpectedParams(self.game));
        }
        let state = self.state.map(PrepState::new).transpose()?.unwrap_or_default();
        Ok((self.game, params, state))
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Random seed; drawn at random (and reported) when omitted
    #[arg(long)]
    seed: Option<u64>,
    /// Run batches on one thread (results are identical either way)
    #[arg(long)]
    sequential: bool,
}

impl RunArgs {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(rand::random)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Print the JSON envelope (the default)
    #[arg(long, conflicts_with = "table")]
    json: bool,
    /// Print a text table instead of JSON
    #[arg(long)]
    table: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_parser = rational_arg, default_value = "0")]
    q_from: Rational,
    #[arg(long, value_parser = rational_arg, default_value = "1/2")]
    q_to: Rational,
    /// Number of equal intervals; rows are produced at both endpoints
    #[arg(long, default_value_t = 8)]
    steps: u32,
    /// How q is divided into (q1, q2, q3): `equal`, or weights `r1,r2,r3`
    #[arg(long, value_parser = split_arg, default_value = "equal")]
    split: Split,
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit a JSON envelope instead of CSV
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Debug)]
enum Split {
    Equal,
    Weights([Rational; 3]),
}

impl Split {
    fn apply(&self, q: &Rational) -> (Rational, Rational, Rational) {
        match self {
            Split::Equal => {
                let third = q / rational::int(3);
                (third.clone(), third.clone(), third)
            }
            Split::Weights(w) => {
                let total: Rational = w.iter().sum();
                let part = |r: &Rational| q * r / &total;
                (part(&w[0]), part(&w[1]), part(&w[2]))
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            Split::Equal => "equal".into(),
            Split::Weights(w) => w.iter().map(fraction_string).collect::<Vec<_>>().join(","),
        }
    }
}

#[derive(Subcommand, Debug)]
enum TeleportCommand {
    /// Exact outcome probabilities for a teleportation game.
    Analyze {
        #[arg(long)]
        mode: AnalyzeMode,
        /// Shared Bell state label
        #[arg(long, default_value = "00")]
        bell: BellLabel,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Haar-random inputs through the full protocol.
    Simulate {
        /// standard, monty, or unreliable
        #[arg(long)]
        mode: TeleportMode,
        /// stick, switch, or random; ignored in standard mode
        #[arg(long, default_value = "stick")]
        strategy: Strategy,
        #[arg(long, default_value = "00")]
        bell: BellLabel,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AnalyzeMode {
    /// Alice announces a goat door instead of her result
    Monty,
    /// One of the two classical bits is lost
    Unreliable,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
    host: IpAddr,
    #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Built web UI to serve for every path the API does not claim
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Append every session event to this JSON-lines file
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Seconds of inactivity after which a session is dropped
    #[arg(long, default_value_t = 3600)]
    idle_timeout: u64,
}

fn rational_arg(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn split_arg(s: &str) -> std::result::Result<Split, String> {
    let s = s.trim();
    if s == "equal" {
        return Ok(Split::Equal);
    }
    let inner = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s);
    let parts: Vec<&str> = inner.split(',').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected `equal` or three weights `r1,r2,r3`, got `{s}`"));
    };
    let w = [rational_arg(a)?, rational_arg(b)?, rational_arg(c)?];
    if w.iter().any(|r| *r < rational::zero()) {
        return Err("split weights must be non-negative".into());
    }
    if w.iter().sum::<Rational>() == rational::zero() {
        return Err("split weights must not all be zero".into());
    }
    Ok(Split::Weights(w))
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let out: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(out, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Analyze { game, output } => {
            let (kind, params, state) = game.resolve()?;
            emit(&analysis_envelope(kind, params.as_ref(), state)?, &output, stdout)
        }
        Command::Simulate { game, strategy, run, output } => {
            let (kind, params, state) = game.resolve()?;
            let env =
                simulation_envelope(kind, params.as_ref(), state, strategy, run.trials, run.seed(), run.execution())?;
            emit(&env, &output, stdout)
        }
        Command::Sweep(args) => sweep(&args, stdout, stderr),
        Command::BornMatrix { output } => born(&output, stdout),
        Command::Teleport { command } => match command {
            TeleportCommand::Analyze { mode, bell, output } => emit(&teleport_analysis(mode, bell)?, &output, stdout),
            TeleportCommand::Simulate { mode, strategy, bell, run, output } => {
                emit(&teleport_simulation(mode, bell, strategy, &run)?, &output, stdout)
            }
        },
        Command::Serve(args) => serve(args, stderr),
    }
}

fn emit(env: &OutputEnvelope, output: &OutputArgs, stdout: &mut dyn Write) -> Result<()> {
    if output.table {
        write!(stdout, "{}", render::table(env))?;
    } else {
        writeln!(stdout, "{}", env.to_json_pretty())?;
    }
    Ok(())
}

/// `steps + 1` evenly spaced points from `from` to `to` inclusive.
fn sweep_points(from: &Rational, to: &Rational, steps: u32) -> Result<Vec<Rational>> {
    if steps == 0 {
        return if from == to { Ok(vec![from.clone()]) } else { Err("--steps 0 needs --q-from equal to --q-to".into()) };
    }
    let width = (to - from) / rational::int(i64::from(steps));
    Ok((0..=steps).map(|k| from + &width * rational::int(i64::from(k))).collect())
}

/// A CSV cell holding an exact value and its decimal: `3/11 (0.2727…)`.
fn exact_cell(r: &Rational) -> String {
    format!("{} ({})", fraction_string(r), to_f64(r))
}

fn sweep(args: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let qs = sweep_points(&args.q_from, &args.q_to, args.steps)?;
    let triples: Vec<_> = qs.iter().map(|q| args.split.apply(q)).collect();
    let rows = sweep_epistemic(&triples);

    let mut file;
    let sink: &mut dyn Write = match &args.out {
        Some(path) => {
            file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            &mut file
        }
        None => stdout,
    };

    let failures: Vec<String> = rows
        .iter()
        .zip(&qs)
        .filter_map(|(row, q)| row.as_ref().err().map(|e| format!("q = {}: {e}", fraction_string(q))))
        .collect();

    if args.json {
        let details: Vec<_> = rows
            .iter()
            .zip(&qs)
            .map(|(row, q)| match row {
                Ok(r) => serde_json::to_value(r).expect("sweep rows serialize"),
                Err(e) => json!({ "q": fraction_string(q), "error": e.to_string() }),
            })
            .collect();
        let env = OutputEnvelope::new("sweep")
            .param("q_from", fraction_string(&args.q_from))
            .param("q_to", fraction_string(&args.q_to))
            .param("steps", args.steps)
            .param("split", args.split.describe())
            .details(details);
        writeln!(sink, "{}", env.to_json_pretty())?;
    } else {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["q", "stick", "switch", "advantage"])?;
        for (row, q) in rows.iter().zip(&qs) {
            match row {
                Ok(r) => w.write_record([&r.q, &r.stick, &r.switch, &r.advantage].map(exact_cell))?,
                Err(_) => w.write_record([exact_cell(q), String::new(), String::new(), String::new()])?,
            }
        }
        w.flush()?;
    }

    for f in &failures {
        writeln!(stderr, "invalid row: {f}")?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(format!("{} of {} sweep rows are outside the parameter bounds", failures.len(), rows.len()).into())
    }
}

fn born(output: &OutputArgs, stdout: &mut dyn Write) -> Result<()> {
    let table = born_matrix();
    let mut env = OutputEnvelope::new("born-matrix");
    for (h, row) in table.rows().iter().enumerate() {
        for (i, p) in row.iter().enumerate() {
            env = env.exact(&format!("p_state{}_outcome{}", h + 1, i + 1), p);
        }
    }
    let violations = table.violations();
    let antidistinguishable = is_antidistinguishable(&pbr_states(), &pbr_basis())?;
    let env = env.details(json!({
        "matrix": table,
        "antidistinguishable": antidistinguishable,
        "violations": violations,
    }));
    if output.table {
        write!(stdout, "{}", render::born_grid(&table))?;
        writeln!(stdout, "antidistinguishable: {}", if antidistinguishable { "yes" } else { "no" })?;
    } else {
        writeln!(stdout, "{}", env.to_json_pretty())?;
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations.join("; ").into())
    }
}

/// `stick`, `switch`, or their average for a per-trial coin.
fn for_strategy(strategy: Strategy, stick: &Rational, switch: &Rational) -> Rational {
    match strategy {
        Strategy::Stick => stick.clone(),
        Strategy::Switch => switch.clone(),
        Strategy::PerTrialRandom => (stick + switch) * ratio(1, 2),
    }
}

fn teleport_analysis(mode: AnalyzeMode, bell: BellLabel) -> Result<OutputEnvelope> {
    let env = OutputEnvelope::new("teleport-analyze").param("bell", bell.to_string());
    Ok(match mode {
        AnalyzeMode::Monty => {
            let analysis = enumerate_joint(&monty_teleport_game_for(bell))?;
            env.param("mode", "monty").analysis(&analysis).details(&analysis)
        }
        AnalyzeMode::Unreliable => {
            let report = unreliable_analysis(bell);
            let mut env = env.param("mode", "unreliable");
            let (mut stick, mut switch) = (rational::zero(), rational::zero());
            for b in &report.by_bit {
                let n = b.bit;
                env = env
                    .exact(&format!("p_received_bit{n}"), &b.p_received)
                    .exact(&format!("win_stick_and_bit{n}"), &b.p_win_stick_and_bit)
                    .exact(&format!("win_switch_and_bit{n}"), &b.p_win_switch_and_bit);
                if let Some(p) = &b.p_win_stick_given_bit {
                    env = env.exact(&format!("win_stick_given_bit{n}"), p);
                }
                if let Some(p) = &b.p_win_switch_given_bit {
                    env = env.exact(&format!("win_switch_given_bit{n}"), p);
                }
                stick += &b.p_win_stick_and_bit;
                switch += &b.p_win_switch_and_bit;
            }
            env.exact("win_stick", &stick).exact("win_switch", &switch).details(&report)
        }
    })
}

fn teleport_simulation(mode: TeleportMode, bell: BellLabel, strategy: Strategy, run: &RunArgs) -> Result<OutputEnvelope> {
    let seed = run.seed();
    let report = simulate_teleport_with(mode, bell, strategy, run.trials, seed, run.execution())?;
    let sim = &report.report;
    let mut env = OutputEnvelope::new("teleport-simulate")
        .param("mode", mode)
        .param("bell", bell.to_string())
        .seed(seed)
        .trials(run.trials)
        .float("win_rate", sim.empirical_win_given_goat)
        .float("mean_fidelity", report.mean_fidelity);
    if mode != TeleportMode::Standard {
        env = env.param("strategy", strategy);
    }

    let expected = match mode {
        TeleportMode::Standard => rational::one(),
        TeleportMode::Monty => {
            let a = enumerate_joint(&monty_teleport_game_for(bell))?;
            for_strategy(strategy, a.p_win_stick(), a.p_win_switch())
        }
        TeleportMode::Unreliable => {
            let analysis = unreliable_analysis(bell);
            let mut total = rational::zero();
            for (b, tally) in analysis.by_bit.iter().zip(report.by_received_bit.unwrap_or_default()) {
                let n = b.bit;
                total += for_strategy(strategy, &b.p_win_stick_and_bit, &b.p_win_switch_and_bit);
                env = env.float(&format!("win_rate_given_bit{n}"), tally.rate());
                if let (Some(stick), Some(switch)) = (&b.p_win_stick_given_bit, &b.p_win_switch_given_bit) {
                    let p = for_strategy(strategy, stick, switch);
                    let sigma = 3.0 * (to_f64(&p) * (1.0 - to_f64(&p)) / tally.trials.max(1) as f64).sqrt();
                    env = env
                        .exact(&format!("expected_win_given_bit{n}"), &p)
                        .float(&format!("three_sigma_given_bit{n}"), sigma);
                }
            }
            total
        }
    };
    Ok(env.exact("expected_win", &expected).float("three_sigma", sim.three_sigma(to_f64(&expected))).details(&report))
}

fn serve(args: ServeArgs, stderr: &mut dyn Write) -> Result<()> {
    if let Some(dir) = &args.static_dir {
        if !dir.join("index.html").is_file() {
            return Err(format!("{} has no index.html", dir.display()).into());
        }
    }
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .try_init();
    let config = ServeConfig {
        addr: SocketAddr::new(args.host, args.port),
        static_dir: args.static_dir,
        transcript: args.transcript,
        idle_timeout: Duration::from_secs(args.idle_timeout),
    };
    writeln!(stderr, "serving on http://{}", config.addr)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(pbr_monty_session::serve(config, async {
        let _ = tokio::signal::ctrl_c().await;
    }))?;
    Ok(())
}
