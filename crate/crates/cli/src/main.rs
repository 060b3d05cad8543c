use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hubqc_core::analysis::{
    angle_distribution_test, input_blindness_check, measurement_angle_test, standard_layout, transcript_angle_test,
    AttackSpec, DistributionReport, VerifiabilityRow,
};
use hubqc_core::protocol::{
    run_session_with, AdversaryPolicy, CircuitDescription, Gate, InputSpec, PlanConfig, SessionConfig, SessionReport,
    REPORT_VERSION,
};
use hubqc_core::qft::{build_qft, dft_matrix, run_blind_qft, QftSpec};
use hubqc_core::quantum::{fidelity, StateVector};
use hubqc_core::rng::{split, stream};
use hubqc_core::{Angle, AxisOrder};

#[derive(Parser)]
#[command(name = "hubqc", version, about = "Hybrid blind quantum computation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Output {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Blind CNOT on all four basis inputs.
    DemoCnot(Output),
    /// Blind two-qubit QFT on all four basis inputs.
    DemoQft(Output),
    /// Run one session from a circuit file.
    Run {
        /// Circuit JSON file.
        #[arg(long)]
        circuit: PathBuf,
        /// Pauli attacks such as `X@q3,Z@q7`, or an adversary JSON object.
        #[arg(long)]
        attack: Option<String>,
        /// Traps per block.
        #[arg(long)]
        traps: Option<usize>,
        /// Basis index of the input register.
        #[arg(long, default_value_t = 0)]
        input: usize,
        /// Trap failures tolerated before aborting.
        #[arg(long, default_value_t = 0)]
        tolerance: usize,
        #[arg(long, value_enum, default_value_t = Order::Zyz)]
        order: Order,
        #[command(flatten)]
        output: Output,
    },
    /// Blindness or verifiability analysis.
    Report {
        #[command(subcommand)]
        kind: ReportKind,
    },
    /// Print the compiled QFT circuit as JSON.
    QftCircuit {
        #[arg(long, default_value_t = 2)]
        wires: usize,
        #[arg(long)]
        no_swap: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Zyz,
    Zxz,
    Yxy,
}

impl From<Order> for AxisOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::Zyz => AxisOrder::ZYZ,
            Order::Zxz => AxisOrder::ZXZ,
            Order::Yxy => AxisOrder::YXY,
        }
    }
}

#[derive(Subcommand)]
enum ReportKind {
    Blindness {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Honest sessions sampled for the transcript angle test.
        #[arg(long, default_value_t = 200)]
        sessions: usize,
        #[command(flatten)]
        output: Output,
    },
    Verifiability {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Computational grid as `ROWSxCOLS`.
        #[arg(long, default_value = "2x3")]
        layout: String,
        /// Trap count; defaults to the number of computational qubits.
        #[arg(long)]
        traps: Option<usize>,
        /// Attack shapes as `x,z,xz` triples separated by `;`.
        #[arg(long, default_value = "1,0,0;0,1,0;0,0,1;2,0,0;1,1,0;3,0,0;1,1,1;0,3,0")]
        attacks: String,
        #[command(flatten)]
        output: Output,
    },
}

fn emit(out: &Output, json: &serde_json::Value, text: &str) -> Result<()> {
    let body = match out.format {
        Format::Json => serde_json::to_string_pretty(json)? + "\n",
        Format::Text => text.to_string(),
    };
    match &out.out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn basis_label(i: usize, n: usize) -> String {
    format!("|{i:0n$b}⟩")
}

fn demo_cnot(out: &Output) -> Result<bool> {
    let mut c = CircuitDescription::new(2);
    c.push(Gate::CNOT { c: 0, t: 1 });
    let mut reports = Vec::new();
    let mut text = format!("blind CNOT, seed {}\ninput  output  verdict  fidelity\n", out.seed);
    for index in 0..4 {
        let cfg = SessionConfig {
            input: InputSpec::Basis { index },
            ..Default::default()
        };
        let r = run_session_with(&c, &AdversaryPolicy::Honest, out.seed.wrapping_add(index as u64), &cfg)?;
        let amps = r.output.clone().unwrap_or_default();
        let peak = (0..amps.len())
            .max_by(|&a, &b| amps[a].norm().total_cmp(&amps[b].norm()))
            .unwrap_or(0);
        let _ = writeln!(
            text,
            "{}   {}    {:<7}  {:.12}",
            basis_label(index, 2),
            basis_label(peak, 2),
            verdict_word(&r),
            r.fidelity.unwrap_or(0.0)
        );
        reports.push(r);
    }
    let ok = reports.iter().all(|r| r.verdict.is_accept());
    emit(
        out,
        &json!({"version": REPORT_VERSION, "seed": out.seed, "sessions": reports}),
        &text,
    )?;
    Ok(ok)
}

fn verdict_word(r: &SessionReport) -> &'static str {
    if r.verdict.is_accept() {
        "accept"
    } else {
        "abort"
    }
}

fn demo_qft(out: &Output) -> Result<bool> {
    let dft = dft_matrix(2);
    let mut reports = Vec::new();
    let mut fids = Vec::new();
    let mut text = format!("blind two-qubit QFT, seed {}\n", out.seed);
    for index in 0..4 {
        let r = run_blind_qft(QftSpec::new(2), index, out.seed.wrapping_add(index as u64))?;
        let got = StateVector::from_amplitudes(r.output.clone().context("session produced no output")?)?;
        let want = StateVector::from_amplitudes((0..4).map(|j| dft.get(j, index)).collect())?;
        let f = fidelity(&got, &want)?;
        let _ = writeln!(text, "{}  {}  fidelity vs DFT {:.12}", basis_label(index, 2), verdict_word(&r), f);
        for (j, a) in got.amplitudes().iter().enumerate() {
            let _ = writeln!(text, "    {}  {:+.6} {:+.6}i", basis_label(j, 2), a.re, a.im);
        }
        fids.push(f);
        reports.push(r);
    }
    let ok = reports.iter().all(|r| r.verdict.is_accept());
    emit(
        out,
        &json!({"version": REPORT_VERSION, "seed": out.seed, "dft_fidelities": fids, "sessions": reports}),
        &text,
    )?;
    Ok(ok)
}

fn parse_adversary(spec: Option<&str>) -> Result<AdversaryPolicy> {
    match spec.map(str::trim) {
        None | Some("") => Ok(AdversaryPolicy::Honest),
        Some(s) if s.starts_with('{') => serde_json::from_str(s).context("adversary JSON"),
        Some(s) => Ok(AdversaryPolicy::parse(s)?),
    }
}

fn dist_text(s: &mut String, d: &DistributionReport) {
    let _ = writeln!(
        s,
        "{:<22} n={:<7} chi2={:<9.4} dof={} p={:.4}",
        d.variable, d.samples, d.chi_square, d.dof, d.p_value
    );
    for ((c, o), p) in d.categories.iter().zip(&d.observed).zip(&d.reference) {
        let _ = writeln!(s, "    {c:<12} {o:>7}  expect {:>9.1}", p * d.samples as f64);
    }
}

fn blindness(trials: usize, sessions: usize, out: &Output) -> Result<()> {
    let check = input_blindness_check()?;
    let mut rng = split(out.seed, stream::TRIALS);
    let (a, b) = angle_distribution_test(&[1.0; 6], trials, &mut rng)?;
    let (pa, pb) = angle_distribution_test(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0], trials, &mut rng)?;
    let kappas: Vec<Angle> = (0..8).map(Angle::quarters).collect();
    let delta = measurement_angle_test(&kappas, trials, &mut rng)?;
    let seen = transcript_angle_test(sessions, out.seed)?;
    let mut text = format!("blindness report, seed {}, trials {trials}\n", out.seed);
    let _ = writeln!(
        text,
        "average prepared state: {} states, max deviation from I/2 = {:.3e}",
        check.states, check.max_deviation
    );
    let _ = writeln!(text, "\nuniform prior over the rotation set");
    dist_text(&mut text, &a);
    dist_text(&mut text, &b);
    let _ = writeln!(text, "\npoint prior ν = π/4 (ξ reveals r up to the pair {{ν, ν+π}})");
    dist_text(&mut text, &pa);
    dist_text(&mut text, &pb);
    let _ = writeln!(text, "\nmeasurement angles");
    dist_text(&mut text, &delta);
    dist_text(&mut text, &seen);
    emit(
        out,
        &json!({
            "version": REPORT_VERSION,
            "seed": out.seed,
            "config": {"trials": trials, "sessions": sessions},
            "input_blindness": check,
            "uniform_prior": {"xi": a, "r_given_xi": b},
            "point_prior": {"xi": pa, "r_given_xi": pb},
            "delta_formula": delta,
            "delta_transcripts": seen,
        }),
        &text,
    )
}

fn parse_attacks(s: &str) -> Result<Vec<AttackSpec>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let v: Vec<usize> = p
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("attack shape `{p}`"))?;
            match v[..] {
                [x, z, xz] => Ok(AttackSpec::new(x, z, xz)),
                _ => bail!("attack shape `{p}` needs three counts"),
            }
        })
        .collect()
}

fn verifiability(trials: usize, layout: &str, traps: Option<usize>, attacks: &str, out: &Output) -> Result<()> {
    let (r, c) = layout
        .split_once('x')
        .and_then(|(r, c)| Some((r.trim().parse::<usize>().ok()?, c.trim().parse::<usize>().ok()?)))
        .with_context(|| format!("layout `{layout}` is not ROWSxCOLS"))?;
    let l = match traps {
        None => standard_layout(r, c, out.seed)?,
        Some(t) => hubqc_core::cluster::place_traps(
            &hubqc_core::cluster::ClusterLayout::grid(r, c)?,
            &mut hubqc_core::rng::seeded(out.seed ^ stream::LAYOUT),
            t,
        )?,
    };
    let specs = parse_attacks(attacks)?;
    let mut rows = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        rows.push(VerifiabilityRow::compute(&l, *spec, trials, out.seed.wrapping_add(i as u64))?);
    }
    let mut text = format!(
        "verifiability, seed {}, {}x{} grid + {} traps ({} qubits), {trials} trials\n",
        out.seed,
        r,
        c,
        l.trap_count(),
        l.len()
    );
    let _ = writeln!(text, "attack           alpha  oracle    mc        stderr    bound     3σ   ≤bound");
    for row in &rows {
        let _ = writeln!(
            text,
            "{:<16} {:<6} {:<9.5} {:<9.5} {:<9.5} {:<9.5} {:<4} {}",
            row.attack.to_string(),
            row.alpha,
            row.oracle,
            row.mc.rate,
            row.mc.stderr,
            row.bound,
            if row.agrees { "ok" } else { "FAIL" },
            if row.within_bound { "ok" } else { "FAIL" }
        );
    }
    emit(
        out,
        &json!({
            "version": REPORT_VERSION,
            "seed": out.seed,
            "config": {"trials": trials, "rows": r, "cols": c, "traps": l.trap_count()},
            "layout": l,
            "rows": rows,
        }),
        &text,
    )
}

fn run() -> Result<u8> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return Ok(code);
        }
    };
    match cli.command {
        Command::DemoCnot(out) => Ok(if demo_cnot(&out)? { 0 } else { 1 }),
        Command::DemoQft(out) => Ok(if demo_qft(&out)? { 0 } else { 1 }),
        Command::Run {
            circuit,
            attack,
            traps,
            input,
            tolerance,
            order,
            output,
        } => {
            let src = std::fs::read_to_string(&circuit).with_context(|| format!("reading {}", circuit.display()))?;
            let c = CircuitDescription::from_json(&src).with_context(|| format!("parsing {}", circuit.display()))?;
            let adversary = parse_adversary(attack.as_deref())?;
            let cfg = SessionConfig {
                plan: PlanConfig {
                    axis_order: order.into(),
                    traps_per_block: traps,
                },
                tolerance,
                input: InputSpec::Basis { index: input },
            };
            let r = run_session_with(&c, &adversary, output.seed, &cfg)?;
            emit(&output, &serde_json::to_value(&r)?, &r.to_text())?;
            if let hubqc_core::Verdict::Abort { reason, .. } = &r.verdict {
                eprintln!("abort: {reason}");
                return Ok(1);
            }
            Ok(0)
        }
        Command::Report { kind } => {
            match kind {
                ReportKind::Blindness {
                    trials,
                    sessions,
                    output,
                } => blindness(trials, sessions, &output)?,
                ReportKind::Verifiability {
                    trials,
                    layout,
                    traps,
                    attacks,
                    output,
                } => verifiability(trials, &layout, traps, &attacks, &output)?,
            }
            Ok(0)
        }
        Command::QftCircuit { wires, no_swap } => {
            let q = build_qft(QftSpec {
                wires,
                include_swap: !no_swap,
            })?;
            println!("{}", q.circuit.to_json());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
