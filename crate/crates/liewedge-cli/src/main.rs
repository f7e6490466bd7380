//! `liewedge` command-line frontend.

mod emit;
mod error;
mod sysfile;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use liewedge::channels::{
    build_system, example1, example2, example3, is_identity_map, kraus_family, kraus_rank, r3, Axis, ChannelName,
    ChannelSpec, Label,
};
use liewedge::liealg::check_conditions;
use liewedge::lindblad::{propagator, STRUCTURE_TOL};
use liewedge::matcore::{eigvals_sym, expm, Mat, RANK_TOL};
use liewedge::par::{init_threads, threads_from_env, Exec};
use liewedge::reachable::{contraction_audit, sample_reachable, SampleOptions, U_MAX};
use liewedge::semialgebra::{semialgebra_probe, ProbeOptions, MAX_BCH_ORDER, PROBE_T};
use liewedge::wedge::{initial_wedge, saturate, SaturateOptions};
use liewedge::ControlSystem;
use serde_json::{json, Value};

use emit::{conditions, csv_row, document, matrices, matrix, num, saturation};
use error::CliError;
use sysfile::SystemFile;

#[derive(Parser, Debug)]
#[command(name = "liewedge", version, about = "Lie wedges of controlled Lindblad systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct SatArgs {
    /// Random edge exponentials per round
    #[arg(long)]
    samples: Option<usize>,
    /// Grid points along abelian edges
    #[arg(long)]
    grid: Option<usize>,
    /// Maximum saturation rounds
    #[arg(long)]
    rounds: Option<usize>,
    /// Cone membership tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Figure {
    #[value(name = "2a")]
    Fig2a,
    #[value(name = "2b")]
    Fig2b,
    #[value(name = "3")]
    Fig3,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Saturate one of the three ℝ³ examples
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        n: u8,
        #[command(flatten)]
        sat: SatArgs,
    },
    /// Catalog channel: system report, Kraus family and Kraus rank
    Channel {
        name: String,
        /// Lindblad rates, comma separated
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Control axes, comma separated
        #[arg(long, value_delimiter = ',')]
        controls: Vec<String>,
        #[arg(long)]
        drift: Option<String>,
        /// Local noise axes (k,k') of the two-qubit systems
        #[arg(long, value_delimiter = ',')]
        noise: Vec<String>,
    },
    /// Saturate the inner wedge approximation of a system file
    Wedge {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        sat: SatArgs,
    },
    /// Controllability conditions (H), (WH), (A)
    Conditions {
        #[arg(long)]
        system: PathBuf,
    },
    /// Probe the saturated wedge for BCH products leaving it
    Semialgebra {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = PROBE_T)]
        t: f64,
        #[arg(long, default_value_t = MAX_BCH_ORDER)]
        order: usize,
        #[command(flatten)]
        sat: SatArgs,
    },
    /// Sample the reachable set and audit contraction
    Reachable {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        switches: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0x5a3)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = U_MAX)]
        u_max: f64,
        /// Time points per contraction audit
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
    /// CSV of projected cone boundary samples
    Figdata {
        figure: Figure,
        #[arg(long, default_value_t = 360)]
        theta_steps: usize,
        /// Half-width of the edge direction in the 2b prism
        #[arg(long, default_value_t = 1.0)]
        edge_extent: f64,
    },
}

struct Output {
    text: String,
    status: u8,
}

impl Output {
    fn json(v: &Value) -> Output {
        Output::json_with(v, 0)
    }

    fn json_with(v: &Value, status: u8) -> Output {
        let mut text = serde_json::to_string_pretty(v).expect("serializable");
        text.push('\n');
        Output { text, status }
    }
}

fn read_system(path: &Path) -> Result<SystemFile, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    sysfile::parse(&text)
}

fn sat_options(a: &SatArgs, file: &sysfile::SysOptions) -> SaturateOptions {
    let d = SaturateOptions::default();
    SaturateOptions {
        orbit_samples: a.samples.or(file.samples).unwrap_or(d.orbit_samples),
        grid: a.grid.or(file.grid).unwrap_or(d.grid),
        max_rounds: a.rounds.or(file.rounds).unwrap_or(d.max_rounds),
        tol: a.tol.or(file.tol).unwrap_or(d.tol),
        seed: a.seed.or(file.seed).unwrap_or(d.seed),
        exec: Exec::default(),
    }
}

fn sat_echo(o: &SaturateOptions) -> Value {
    json!({
        "samples": o.orbit_samples,
        "grid": o.grid,
        "rounds": o.max_rounds,
        "tol": num(o.tol),
        "seed": o.seed,
    })
}

fn tolerances(cone: Option<f64>) -> Value {
    let mut v = json!({ "rank": num(RANK_TOL), "structure": num(STRUCTURE_TOL) });
    if let Some(c) = cone {
        v["cone"] = num(c);
    }
    v
}

fn system_echo(sf: &SystemFile) -> Value {
    json!({
        "rep": sf.system.rep().name(),
        "text": sysfile::emit(sf),
    })
}

fn run_saturation(sys: &ControlSystem, opts: &SaturateOptions) -> Result<liewedge::wedge::Saturation, CliError> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) || opts.max_rounds == 0 {
        return Err(CliError::Usage("tol must be positive and rounds at least 1".into()));
    }
    Ok(saturate(&initial_wedge(sys), opts)?)
}

fn cmd_example(n: u8, a: &SatArgs) -> Result<Output, CliError> {
    let sys = match n {
        1 => example1(3.0, 2.0, 1.0),
        2 => example2(1.0),
        _ => example3(1.0),
    };
    let sf = SystemFile {
        system: sys,
        options: Default::default(),
    };
    let opts = sat_options(a, &sf.options);
    let s = run_saturation(&sf.system, &opts)?;
    let doc = document(
        "example",
        json!({ "example": n, "system": system_echo(&sf), "saturation": sat_echo(&opts) }),
        tolerances(Some(opts.tol)),
        json!({
            "conditions": conditions(&check_conditions(&sf.system)?),
            "wedge": saturation(&s),
        }),
    );
    Ok(Output::json_with(&doc, if s.converged { 0 } else { 1 }))
}

fn labels(xs: &[String]) -> Result<Vec<Label>, CliError> {
    xs.iter()
        .map(|s| s.parse::<Label>().map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn cmd_channel(
    name: &str,
    gamma: &[f64],
    t: f64,
    controls: &[String],
    drift: Option<&str>,
    noise: &[String],
) -> Result<Output, CliError> {
    let name: ChannelName = name
        .parse()
        .map_err(|e: liewedge::Error| CliError::Usage(e.to_string()))?;
    let mut spec = ChannelSpec::new(name);
    if !gamma.is_empty() {
        spec = spec.with_rates(gamma.to_vec());
    }
    if !controls.is_empty() {
        spec = spec.with_controls(labels(controls)?);
    }
    if let Some(d) = drift {
        spec = spec.with_drift(Some(labels(&[d.to_string()])?[0]));
    }
    if !noise.is_empty() {
        let axes = noise
            .iter()
            .map(|s| s.parse::<Axis>().map_err(|e| CliError::Usage(e.to_string())))
            .collect::<Result<_, _>>()?;
        spec = spec.with_noise(axes);
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(CliError::Usage(format!("--t must be finite and nonnegative, got {t}")));
    }
    let sys = build_system(&spec)?;
    let zero = vec![0.0; sys.num_controls()];
    let prop = propagator(&sys, &zero, t)?;
    let vm = prop.vec_matrix()?;
    let audit = prop.audit()?;
    let kraus = if spec.is_purely_dissipative() {
        kraus_family(&spec, t).ok()
    } else {
        None
    };
    let sf = SystemFile {
        system: sys,
        options: Default::default(),
    };
    let doc = document(
        "channel",
        json!({
            "name": name.as_str(),
            "rates": emit::nums(&spec.rates),
            "controls": spec.control_axes.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "drift": spec.drift_axis.map(|l| l.to_string()),
            "noise": spec.noise_axes.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            "t": num(t),
            "system": system_echo(&sf),
        }),
        json!({ "rank": num(RANK_TOL), "identity": num(1e-12), "kraus_rank_relative": num(1e-8) }),
        json!({
            "conditions": conditions(&check_conditions(&sf.system)?),
            "propagator": matrix(&vm),
            "is_tp": audit.is_tp,
            "tp_residual": num(audit.tp_residual),
            "is_cp": audit.is_cp,
            "choi_min_eig": num(audit.choi_min_eig),
            "identity_channel": is_identity_map(&vm, 1e-12),
            "kraus_available": kraus.is_some(),
            "kraus_operators": kraus.as_ref().map(|k| matrices(&k.operators)).unwrap_or_else(|| json!([])),
            "kraus_completeness_defect": kraus.as_ref().map(|k| num(k.completeness_defect())).unwrap_or(Value::Null),
            "kraus_rank": kraus_rank(&vm)?,
        }),
    );
    Ok(Output::json(&doc))
}

fn cmd_wedge(path: &Path, a: &SatArgs) -> Result<Output, CliError> {
    let sf = read_system(path)?;
    let opts = sat_options(a, &sf.options);
    let s = run_saturation(&sf.system, &opts)?;
    let doc = document(
        "wedge",
        json!({ "system": system_echo(&sf), "saturation": sat_echo(&opts) }),
        tolerances(Some(opts.tol)),
        json!({ "wedge": saturation(&s) }),
    );
    Ok(Output::json_with(&doc, if s.converged { 0 } else { 1 }))
}

fn cmd_conditions(path: &Path) -> Result<Output, CliError> {
    let sf = read_system(path)?;
    let doc = document(
        "conditions",
        json!({ "system": system_echo(&sf) }),
        tolerances(None),
        json!({ "conditions": conditions(&check_conditions(&sf.system)?) }),
    );
    Ok(Output::json(&doc))
}

fn cmd_semialgebra(path: &Path, pairs: usize, t: f64, order: usize, a: &SatArgs) -> Result<Output, CliError> {
    let sf = read_system(path)?;
    let opts = sat_options(a, &sf.options);
    let s = run_saturation(&sf.system, &opts)?;
    let probe = ProbeOptions {
        pairs,
        t_grid: vec![t],
        order,
        seed: opts.seed,
        ..ProbeOptions::default()
    };
    let witness = semialgebra_probe(&s.wedge, &probe)?;
    let w = &s.wedge;
    let doc = document(
        "semialgebra",
        json!({
            "system": system_echo(&sf),
            "saturation": sat_echo(&opts),
            "pairs": pairs,
            "t": num(t),
            "order": order,
        }),
        json!({
            "rank": num(RANK_TOL),
            "cone": num(opts.tol),
            "probe": num(probe.tol),
        }),
        json!({
            "wedge": {
                "edge_dim": w.edge.dim(),
                "cone_span_dim": w.cone_span_dim(),
                "wedge_dim": w.dim(),
                "converged": s.converged,
            },
            "witness_found": witness.is_some(),
            "witness": witness.as_ref().map(|x| json!({
                "a": matrix(&x.a),
                "b": matrix(&x.b),
                "t": num(x.t),
                "order": x.order,
                "product": matrix(&x.product),
                "offending": matrix(&x.offending),
                "residual": num(x.residual),
            })),
        }),
    );
    Ok(Output::json_with(&doc, if s.converged { 0 } else { 1 }))
}

fn spectral_norm(m: &Mat) -> Result<f64, CliError> {
    let g = &m.adjoint() * m;
    let g = (&g + &g.adjoint()).scale(0.5);
    Ok(eigvals_sym(&g)?.first().copied().unwrap_or(0.0).max(0.0).sqrt())
}

#[allow(clippy::too_many_arguments)]
fn cmd_reachable(
    path: &Path,
    switches: usize,
    count: usize,
    seed: u64,
    horizon: f64,
    u_max: f64,
    grid: usize,
) -> Result<Output, CliError> {
    let sf = read_system(path)?;
    let sys = &sf.system;
    let opts = SampleOptions {
        n: count,
        depth: switches,
        horizon,
        u_max,
        seed,
        exec: Exec::default(),
    };
    let samples = sample_reachable(sys, &opts)?;
    let mut all_cptp = true;
    let mut min_choi = f64::INFINITY;
    let mut max_tp = 0.0f64;
    let mut max_norm = 0.0f64;
    for (_, p) in &samples {
        let a = p.audit()?;
        all_cptp &= a.is_tp && a.is_cp;
        min_choi = min_choi.min(a.choi_min_eig);
        max_tp = max_tp.max(a.tp_residual);
        if sys.is_unital() {
            max_norm = max_norm.max(spectral_norm(&p.coherence()?)?);
        }
    }
    let contraction = if sys.is_unital() {
        let reports = Exec::default().map(samples.len(), |k| contraction_audit(sys, &samples[k].0, grid));
        let mut inc = f64::NEG_INFINITY;
        let mut drift = 0.0f64;
        for r in reports {
            let r = r?;
            inc = inc.max(r.max_increment);
            drift = drift.max(r.max_drift);
        }
        json!({
            "applicable": true,
            "max_increment": if samples.is_empty() { Value::Null } else { num(inc) },
            "max_drift": num(drift),
            "contracting": inc <= 1e-9,
        })
    } else {
        json!({ "applicable": false, "reason": "system is not unital" })
    };
    let doc = document(
        "reachable",
        json!({
            "system": system_echo(&sf),
            "switches": switches,
            "count": count,
            "seed": seed,
            "horizon": num(horizon),
            "u_max": num(u_max),
            "grid": grid,
        }),
        json!({ "cptp": num(1e-10), "contraction": num(1e-9) }),
        json!({
            "samples": samples.len(),
            "all_cptp": all_cptp,
            "min_choi_eig": if samples.is_empty() { Value::Null } else { num(min_choi) },
            "max_tp_residual": num(max_tp),
            "max_coherence_norm": if sys.is_unital() { num(max_norm) } else { Value::Null },
            "contraction": contraction,
        }),
    );
    Ok(Output::json(&doc))
}

/// Coordinate of x along b in an orthogonal basis.
fn coord(x: &Mat, b: &Mat) -> f64 {
    x.inner(b) / b.inner(b)
}

fn cmd_figdata(fig: Figure, steps: usize, extent: f64) -> Result<Output, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("--theta-steps must be positive".into()));
    }
    if !(extent.is_finite() && extent >= 0.0) {
        return Err(CliError::Usage("--edge-extent must be finite and nonnegative".into()));
    }
    let g0 = match fig {
        Figure::Fig3 => r3::gamma0([1.0, 1.0, 2.0]),
        _ => r3::gamma0([1.0, 0.0, 1.0]),
    };
    let seed = &g0 + &r3::h(Axis::Z);
    let (hx, hy, hz) = (r3::h(Axis::X), r3::h(Axis::Y), r3::h(Axis::Z));
    let mut text = match fig {
        Figure::Fig2b => "theta,c_Hy_min,c_Hy_max,c_Hz,c_Gamma0\n",
        _ => "theta,c_Hx,c_Hz,c_Gamma0\n",
    }
    .to_string();
    for k in 0..steps {
        let th = std::f64::consts::TAU * k as f64 / steps as f64;
        let u = expm(&hy.scale(th));
        let x = &(&u * &seed) * &u.transpose();
        let row = match fig {
            Figure::Fig2b => {
                let y = coord(&x, &hy);
                csv_row(&[th, y - extent, y + extent, coord(&x, &hz), coord(&x, &g0)])
            }
            _ => csv_row(&[th, coord(&x, &hx), coord(&x, &hz), coord(&x, &g0)]),
        };
        text.push_str(&row);
        text.push('\n');
    }
    Ok(Output { text, status: 0 })
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Example { n, sat } => cmd_example(n, &sat),
        Command::Channel {
            name,
            gamma,
            t,
            controls,
            drift,
            noise,
        } => cmd_channel(&name, &gamma, t, &controls, drift.as_deref(), &noise),
        Command::Wedge { system, sat } => cmd_wedge(&system, &sat),
        Command::Conditions { system } => cmd_conditions(&system),
        Command::Semialgebra {
            system,
            pairs,
            t,
            order,
            sat,
        } => cmd_semialgebra(&system, pairs, t, order, &sat),
        Command::Reachable {
            system,
            switches,
            count,
            seed,
            horizon,
            u_max,
            grid,
        } => cmd_reachable(&system, switches, count, seed, horizon, u_max, grid),
        Command::Figdata {
            figure,
            theta_steps,
            edge_extent,
        } => cmd_figdata(figure, theta_steps, edge_extent),
    }
}

fn setup_threads() -> Result<(), CliError> {
    if let Some(n) = threads_from_env().map_err(CliError::Usage)? {
        init_threads(n).map_err(CliError::Usage)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = setup_threads().and_then(|_| run(cli));
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout.write_all(out.text.as_bytes()).and_then(|_| stdout.flush()) {
                eprintln!("liewedge: i/o: {e}");
                return ExitCode::from(1);
            }
            if out.status != 0 {
                eprintln!("liewedge: saturation did not converge");
            }
            ExitCode::from(out.status)
        }
        Err(e) => {
            eprintln!("liewedge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
