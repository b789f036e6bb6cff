//! The `qpd` command line: outcome tables, payoff sweeps, equilibrium
//! reports, port images, terminal play and the HTTP service.
//!
//! Settings come from flags and an optional JSON file (`--config`); flags win.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, Write};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::analysis::{self, EquilibriumReport, DEFAULT_RESOLUTION};
use crate::game::{coefficient_table, Backend, OpponentPolicy, Outcome, PayoffTable, Protocol, Strategy};
use crate::render::{self, GridSpec};
use crate::service::{self, ServiceConfig};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "qpd", version, about = "Quantum prisoners dilemma on spin-orbit laser modes")]
pub struct Cli {
    /// JSON config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// abstract | optical
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Grid points per swept segment (sweep, best-response opponents).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Output file (table, sweep) or directory (render).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Payoff override such as `DD=0,0`; repeatable.
    #[arg(long = "payoff", global = true)]
    payoff: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Outcomes for every pair of named strategies.
    Table,
    /// Payoff surface over the swept converter families, as CSV.
    Sweep,
    /// Nash equilibria and Pareto flags for the named and classical sets.
    Nash,
    /// Play rounds against a computer opponent in the terminal.
    Play {
        /// nash | best | <strategy>
        #[arg(long)]
        opponent: Option<String>,
    },
    /// Write the four port images for one strategy pair.
    Render {
        a: String,
        b: String,
        #[arg(long)]
        pixels: Option<usize>,
        #[arg(long)]
        extent: Option<f64>,
    },
    /// Start the HTTP API (and web UI, with --static-dir).
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        host: Option<IpAddr>,
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

/// Values accepted in the `--config` JSON file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub backend: Option<Backend>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub payoff: Vec<String>,
    pub opponent: Option<String>,
    pub port: Option<u16>,
    pub static_dir: Option<PathBuf>,
    pub pixels: Option<usize>,
    pub extent: Option<f64>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub backend: Backend,
    pub table: PayoffTable,
    pub grid: usize,
    pub out: Option<PathBuf>,
    pub opponent: OpponentPolicy,
    pub port: u16,
    pub host: IpAddr,
    pub static_dir: Option<PathBuf>,
    pub image: GridSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            backend: Backend::Abstract,
            table: PayoffTable::default(),
            grid: DEFAULT_RESOLUTION,
            out: None,
            opponent: OpponentPolicy::Nash,
            port: 8080,
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            static_dir: None,
            image: GridSpec::default(),
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let f = File::open(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_reader(f).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let mut cfg = RunConfig::default();
    cfg.backend = match &cli.backend {
        Some(s) => s.parse()?,
        None => file.backend.unwrap_or(cfg.backend),
    };
    cfg.grid = cli.grid.or(file.grid).unwrap_or(cfg.grid);
    if cfg.grid < 2 {
        return Err(Error::InvalidGrid { got: cfg.grid, min: 2 });
    }
    cfg.out = cli.out.clone().or(file.out);
    for spec in file.payoff.iter().chain(&cli.payoff) {
        cfg.table = cfg.table.apply_override(spec)?;
    }
    let (mut pixels, mut extent) = (file.pixels, file.extent);
    let mut opponent = file.opponent;
    match &cli.command {
        Command::Play { opponent: o } => opponent = o.clone().or(opponent),
        Command::Render { pixels: p, extent: e, .. } => {
            pixels = p.or(pixels);
            extent = e.or(extent);
        }
        Command::Serve { port, host, static_dir } => {
            cfg.port = port.or(file.port).unwrap_or(cfg.port);
            cfg.host = host.unwrap_or(cfg.host);
            cfg.static_dir = static_dir.clone().or(file.static_dir);
        }
        _ => {}
    }
    if let Some(o) = opponent {
        cfg.opponent = o.parse()?;
    }
    cfg.image = GridSpec::new(pixels.unwrap_or(cfg.image.n), extent.unwrap_or(cfg.image.extent))?;
    Ok(cfg)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are printed to `stderr`.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match dispatch(&cli, stdin, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn dispatch(cli: &Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<()> {
    let cfg = resolve(cli)?;
    match &cli.command {
        Command::Table => cmd_table(&cfg, stdout),
        Command::Sweep => cmd_sweep(&cfg, stdout),
        Command::Nash => cmd_nash(&cfg, stdout),
        Command::Play { .. } => cmd_play(&cfg, stdin, stdout),
        Command::Render { a, b, .. } => cmd_render(&cfg, &a.parse()?, &b.parse()?, stdout),
        Command::Serve { .. } => cmd_serve(&cfg, stdout),
    }
}

/// CSV number: 12 significant digits, trailing zeros trimmed. Magnitudes
/// below 1e−13 are rounding residue at the unit scale and print as `0`.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v.abs() < 1e-13 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
        if s == "-0" { "0".into() } else { s.to_string() }
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        format!("{}e{exp}", mantissa.trim_end_matches('0').trim_end_matches('.'))
    }
}

fn stdout_err(e: io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("{}: {other:?}", path.display())),
    }
}

/// Writes CSV rows to `cfg.out` if set, otherwise to `stdout`.
fn emit_csv(cfg: &RunConfig, stdout: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let target = cfg.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let sink: Box<dyn Write + '_> = match &cfg.out {
        Some(path) => Box::new(File::create(path).map_err(|e| Error::io(path, e))?),
        None => Box::new(&mut *stdout),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header).map_err(csv_err(&target))?;
    for row in rows {
        w.write_record(row).map_err(csv_err(&target))?;
    }
    w.flush().map_err(|e| Error::io(&target, e))
}

pub const TABLE_HEADER: [&str; 16] = [
    "a", "b", "c_cc_re", "c_cc_im", "c_cd_re", "c_cd_im", "c_dc_re", "c_dc_im", "c_dd_re", "c_dd_im", "p_cc", "p_cd",
    "p_dc", "p_dd", "payoff_a", "payoff_b",
];

fn table_row(a: &Strategy, b: &Strategy, o: &Outcome) -> Vec<String> {
    let mut row = vec![a.to_string(), b.to_string()];
    for c in &o.amplitudes {
        row.push(fmt_num(c.re));
        row.push(fmt_num(c.im));
    }
    row.extend(o.probs.iter().map(|&p| fmt_num(p)));
    row.push(fmt_num(o.payoff_a));
    row.push(fmt_num(o.payoff_b));
    row
}

pub fn cmd_table(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let named = Strategy::named();
    let grid = coefficient_table(&named, cfg.backend, &cfg.table)?;
    writeln!(stdout, "{:>4} {:>4}  {:>8} {:>8} {:>8} {:>8}  {:>6} {:>6}", "A", "B", "p(CC)", "p(CD)", "p(DC)", "p(DD)", "$A", "$B")
        .map_err(stdout_err)?;
    let mut rows = Vec::new();
    for (a, row) in named.iter().zip(&grid) {
        for (b, o) in named.iter().zip(row) {
            let p = o.probs.map(|v| if v.abs() < 5e-13 { 0.0 } else { v });
            writeln!(
                stdout,
                "{:>4} {:>4}  {:>8.4} {:>8.4} {:>8.4} {:>8.4}  {:>6.3} {:>6.3}",
                a.to_string(),
                b.to_string(),
                p[0],
                p[1],
                p[2],
                p[3],
                o.payoff_a,
                o.payoff_b
            )
            .map_err(stdout_err)?;
            rows.push(table_row(a, b, o));
        }
    }
    if cfg.out.is_none() {
        writeln!(stdout).map_err(stdout_err)?;
    }
    emit_csv(cfg, stdout, &TABLE_HEADER, &rows)
}

pub const SWEEP_HEADER: [&str; 8] =
    ["t_a", "t_b", "theta_a_deg", "phi_a_rad", "theta_b_deg", "phi_b_rad", "payoff_a", "payoff_b"];

pub fn cmd_sweep(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let points = analysis::sweep(cfg.grid, cfg.backend, &cfg.table)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            let (a, b) = (p.t_a.params(), p.t_b.params());
            [p.t_a.value(), p.t_b.value(), a.theta_deg, a.phi_rad, b.theta_deg, b.phi_rad, p.payoff_a, p.payoff_b]
                .iter()
                .map(|&v| fmt_num(v))
                .collect()
        })
        .collect();
    emit_csv(cfg, stdout, &SWEEP_HEADER, &rows)
}

fn write_report(out: &mut dyn Write, title: &str, r: &EquilibriumReport) -> io::Result<()> {
    writeln!(out, "== {title} ==")?;
    write!(out, "{:>5}", "A\\B")?;
    for s in &r.strategies {
        write!(out, " {:>14}", s.to_string())?;
    }
    writeln!(out)?;
    for (i, a) in r.strategies.iter().enumerate() {
        write!(out, "{:>5}", a.to_string())?;
        for j in 0..r.strategies.len() {
            let (pa, pb) = r.payoffs[i][j];
            let mut flags = String::new();
            if r.is_equilibrium(i, j) {
                flags.push('N');
            }
            if r.is_pareto(i, j) {
                flags.push('P');
            }
            if r.dominated_pairs.contains(&(i, j)) {
                flags.push('d');
            }
            write!(out, " {:>10} {:<3}", format!("{pa:.3},{pb:.3}"), flags)?;
        }
        writeln!(out)?;
    }
    let names = |pairs: &[(usize, usize)]| {
        pairs.iter().map(|&(i, j)| format!("({}, {})", r.strategies[i], r.strategies[j])).collect::<Vec<_>>().join(" ")
    };
    writeln!(out, "nash equilibria: {}", names(&r.equilibria))?;
    writeln!(out, "pareto optimal: {}", names(&r.pareto_front))?;
    writeln!(out, "dominated by (iZ, iZ): {}", names(&r.dominated_pairs))?;
    writeln!(out, "flags: N = Nash, P = Pareto optimal, d = dominated by (iZ, iZ)")?;
    writeln!(out)
}

pub fn cmd_nash(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let full = analysis::nash_discrete(&Strategy::named(), cfg.backend, &cfg.table)?;
    let classical = analysis::nash_discrete(&[Strategy::I, Strategy::IX], cfg.backend, &cfg.table)?;
    write_report(stdout, "named strategies", &full).map_err(stdout_err)?;
    write_report(stdout, "classical {I, iX}", &classical).map_err(stdout_err)
}

/// Interactive rounds: Alice types a move, the configured opponent answers.
/// `q` (or end of input) prints the summary.
pub fn cmd_play(cfg: &RunConfig, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<()> {
    let protocol = Protocol::cached(cfg.backend)?;
    let mut totals = (0.0, 0.0);
    let mut rounds = 0usize;
    writeln!(stdout, "You are Alice. Opponent policy: {}", cfg.opponent).map_err(stdout_err)?;
    writeln!(stdout, "Moves: iX, Q1, I, Q2, iZ or C(<deg>, <rad>); q to quit.").map_err(stdout_err)?;
    let mut line = String::new();
    loop {
        write!(stdout, "round {}> ", rounds + 1).map_err(stdout_err)?;
        stdout.flush().map_err(stdout_err)?;
        line.clear();
        if stdin.read_line(&mut line).map_err(|e| Error::io("<stdin>", e))? == 0 {
            writeln!(stdout).map_err(stdout_err)?;
            break;
        }
        let input = line.trim();
        if input.is_empty() {
            continue;
        }
        if input.eq_ignore_ascii_case("q") || input.eq_ignore_ascii_case("quit") {
            break;
        }
        let a: Strategy = match input.parse() {
            Ok(s) => s,
            Err(e) => {
                writeln!(stdout, "  {e}").map_err(stdout_err)?;
                continue;
            }
        };
        let b = cfg.opponent.choose(&a, cfg.grid.max(3), cfg.backend, &cfg.table)?;
        let o = protocol.play(&a, &b, &cfg.table);
        rounds += 1;
        totals.0 += o.payoff_a;
        totals.1 += o.payoff_b;
        let p = o.probs;
        writeln!(stdout, "  opponent plays {b}").map_err(stdout_err)?;
        writeln!(stdout, "  p(CC)={:.4} p(CD)={:.4} p(DC)={:.4} p(DD)={:.4}", p[0], p[1], p[2], p[3])
            .map_err(stdout_err)?;
        writeln!(
            stdout,
            "  payoffs: you {:.4}, opponent {:.4}   totals: {:.4} / {:.4}",
            o.payoff_a, o.payoff_b, totals.0, totals.1
        )
        .map_err(stdout_err)?;
    }
    writeln!(stdout, "{rounds} rounds played. Final totals: you {:.4}, opponent {:.4}", totals.0, totals.1)
        .map_err(stdout_err)
}

pub fn cmd_render(cfg: &RunConfig, a: &Strategy, b: &Strategy, stdout: &mut dyn Write) -> Result<()> {
    let outcome = Protocol::cached(cfg.backend)?.play(a, b, &cfg.table);
    let images = render::port_images(&outcome, cfg.image);
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    for (path, img) in render::write_port_images(&images, &dir)?.iter().zip(&images) {
        writeln!(stdout, "{} p={}", path.display(), fmt_num(img.scale)).map_err(stdout_err)?;
    }
    Ok(())
}

pub fn cmd_serve(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let addr = SocketAddr::new(cfg.host, cfg.port);
    let service_cfg = ServiceConfig {
        backend: cfg.backend,
        table: cfg.table,
        best_response_grid: cfg.grid.max(3),
        static_dir: cfg.static_dir.clone(),
    };
    writeln!(stdout, "listening on http://{addr}").map_err(stdout_err)?;
    stdout.flush().map_err(stdout_err)?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Config(format!("runtime: {e}")))?;
    rt.block_on(service::serve(service_cfg, addr))
}
