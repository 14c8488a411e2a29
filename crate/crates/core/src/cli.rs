//! The `indist` command-line front end.
//!
//! Every command builds a [`Report`] from library calls only and renders it
//! as JSON (one document, `"schema": 1`) or CSV (`#` comment header carrying
//! the invocation, then a table). The exit code is 0 when every check in the
//! report passes, 1 when a check fails and 2 on usage or input errors; the
//! latter two also emit a JSON failure record on stderr.

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::ffi::OsString;
use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use std::path::PathBuf;

use crate::behaviors::{
    bits_to_string, is_no_signaling, local_deterministic_max, optimize_ghz_svetlichny, pr_like_box, quantum_bound,
    s_n, sigma_n, svetlichny_signs, transitivity_check, TRANSITIVITY_TOL,
};
use crate::correlations::{
    chsh_quantum_max_seeded, maximize_case_one, maximize_case_two, TSIRELSON,
};
use crate::error::{Error, Result};
use crate::exclusivity::{
    e_inequality_bound, e_inequality_bound_closed_form, pairwise_exclusive_check, search_partition_n2,
    sigma_event_set, two_copy_sigma_events, verify_e_inequality, verify_partition, Event,
};
use crate::numerics::{c, random_ket, ComplexMatrix, Ket};
use crate::schmidt::{
    family_lambdas_closed_form, rank_lemma_check, reduced_density_from_family, sample_projector_pair,
    schmidt_decompose_family,
};
use crate::symstate::SuperpositionParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "indist", version, about = "Indistinguishable-qubit entanglement and nonlocality bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Grid points for scans.
    #[arg(long, global = true, default_value_t = 65)]
    pub grid: usize,

    /// Tolerance for the command's checks (command-specific default).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Seed for randomized searches and samples.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    One,
    Two,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateChoice {
    /// (|00⟩ + |11⟩)/√2
    Bell,
    /// |00⟩
    Product,
    /// Haar-random, drawn from --seed
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduced density, Schmidt weights and bases, entropy and rank of
    /// |0⟩|s(θ, φ)⟩ + η|s(θ, φ)⟩|0⟩.
    Schmidt {
        #[arg(long, default_value = "pi", value_parser = parse_angle, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        eta: f64,
    },
    /// Schmidt weights and entropy over θ ∈ [0, π] with --grid points.
    EntropyScan {
        #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
        phi: f64,
    },
    /// Maximum CHSH value for a two-component case or a quantum state.
    ChshMax {
        #[arg(value_enum)]
        case: Case,
        #[arg(long, value_enum, default_value_t = StateChoice::Bell)]
        state: StateChoice,
    },
    /// Local, exclusivity and quantum bounds for n parties.
    Nbody {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=5))]
        n: u8,
    },
    /// The S₂ = 3 box: table, S₂, transitivity and the E-inequality.
    Prbox,
    /// Random projector pairs against the rank lemma.
    RankCheck {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        dim: usize,
    },
    /// Exclusivity checks on Σ_n events and a two-copy partition.
    ExclusivityVerify {
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// JSON array of sets of {x, b} events to verify; defaults to a
        /// searched partition (n = 2 only).
        #[arg(long)]
        partition: Option<PathBuf>,
    },
}

/// Radians, with optional `deg` suffix, or multiples of pi such as
/// `pi`, `-pi/2`, `2pi/3`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let bad = || format!("cannot parse angle '{s}'");
    if let Some(d) = t.strip_suffix("deg") {
        return d.trim().parse::<f64>().map(f64::to_radians).map_err(|_| bad());
    }
    if let Some(pos) = t.find("pi") {
        let (head, tail) = (t[..pos].trim().trim_end_matches('*'), &t[pos + 2..]);
        let k = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|_| bad())?,
        };
        let d = match tail.trim() {
            "" => 1.0,
            r => r.strip_prefix('/').ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad())?,
        };
        return Ok(k * PI / d);
    }
    t.parse::<f64>().map_err(|_| bad())
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub result: Value,
    pub checks: Vec<Check>,
    pub table: Option<Table>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self, invocation: &str) -> String {
        let mut doc = Map::new();
        doc.insert("schema".into(), json!(SCHEMA_VERSION));
        doc.insert("command".into(), json!(self.command));
        doc.insert("invocation".into(), json!(invocation));
        doc.insert("passed".into(), json!(self.passed()));
        doc.insert("checks".into(), json!(self.checks));
        doc.insert("result".into(), self.result.clone());
        if let Some(t) = &self.table {
            doc.insert("table".into(), json!(t));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self, invocation: &str) -> String {
        let mut s = format!("# {invocation}\n");
        s += &format!(
            "# schema={SCHEMA_VERSION} command={} passed={}\n",
            self.command,
            self.passed()
        );
        for c in &self.checks {
            s += &format!(
                "# check {}: {} ({})\n",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.detail
            );
        }
        match &self.table {
            Some(t) => {
                s += &t.header.join(",");
                s.push('\n');
                for row in &t.rows {
                    let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                    s += &cells.join(",");
                    s.push('\n');
                }
            }
            None => {
                s += "quantity,value\n";
                let mut flat = vec![];
                flatten("", &self.result, &mut flat);
                for (k, v) in flat {
                    s += &format!("{},{}\n", csv_cell(&k), csv_cell(&v));
                }
            }
        }
        s
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn complex_json(z: num_complex::Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

fn ket_json(k: &Ket) -> Value {
    Value::Array(k.amplitudes().iter().map(|z| complex_json(*z)).collect())
}

fn cmd_schmidt(theta: f64, phi: f64, eta: f64, tol: f64) -> Result<Report> {
    let p = SuperpositionParams::new(theta, phi)?;
    let eta = c(eta, 0.0);
    let rho = reduced_density_from_family(p, eta)?;
    let d = schmidt_decompose_family(p, eta)?;
    let sum: f64 = d.lambdas.iter().sum();
    let mut checks = vec![Check::new(
        "lambda_sum",
        (sum - 1.0).abs() <= tol,
        format!("sum = {sum}"),
    )];
    let mut result = json!({
        "theta": p.theta,
        "phi": p.phi,
        "eta": eta.re,
        "rho": matrix_json(rho.matrix()),
        "lambdas": d.lambdas,
        "bases": d.bases.iter().map(|(a, b)| json!({"a": ket_json(a), "b": ket_json(b)})).collect::<Vec<_>>(),
        "entropy": d.entropy(),
        "rank": d.rank(),
    });
    if eta.re == 1.0 {
        let (l0, l1) = family_lambdas_closed_form(p.theta);
        let dev = (d.lambdas[0] - l0).abs().max((d.lambdas[1] - l1).abs());
        checks.push(Check::new("closed_form_lambdas", dev <= tol, format!("max deviation {dev:e}")));
        result["closed_form_lambdas"] = json!([l0, l1]);
    }
    Ok(Report {
        command: "schmidt".into(),
        result,
        checks,
        table: None,
    })
}

fn cmd_entropy_scan(grid: usize, phi: f64, tol: f64) -> Result<Report> {
    if grid < 2 {
        return Err(Error::OutOfRange(format!("--grid must be at least 2, got {grid}")));
    }
    let mut rows = Vec::with_capacity(grid);
    let mut worst: f64 = 0.0;
    for k in 0..grid {
        let theta = PI * k as f64 / (grid - 1) as f64;
        let p = SuperpositionParams::new(theta, phi)?;
        let d = schmidt_decompose_family(p, c(1.0, 0.0))?;
        worst = worst.max((d.lambdas[0] + d.lambdas[1] - 1.0).abs());
        rows.push(vec![p.theta, p.phi, d.lambdas[0], d.lambdas[1], d.entropy()]);
    }
    Ok(Report {
        command: "entropy-scan".into(),
        result: json!({ "grid": grid, "phi": phi }),
        checks: vec![Check::new("lambda_sum", worst <= tol, format!("max |l0 + l1 - 1| = {worst:e}"))],
        table: Some(Table {
            header: ["theta", "phi", "lambda0", "lambda1", "entropy"].map(String::from).to_vec(),
            rows,
        }),
    })
}

fn cmd_chsh_max(case: Case, state: StateChoice, seed: u64, tol: f64) -> Result<Report> {
    let (result, checks) = match case {
        Case::One => {
            let r = maximize_case_one();
            let m = &r.maximum;
            let checks = vec![Check::new(
                "tsirelson",
                m.max <= TSIRELSON + 1e-9,
                format!("max {} vs 2sqrt2", m.max),
            )];
            (
                json!({
                    "case": "one",
                    "max": m.max,
                    "argmax": [m.x, m.y],
                    "sign": m.sign,
                    "grid_best": m.grid_best,
                    "grid_points": m.grid_points,
                    "reference_value": r.reference_value,
                    "discrepancy": r.discrepancy,
                    "agrees_with_reference": r.agrees_with_reference,
                }),
                checks,
            )
        }
        Case::Two => {
            let m = maximize_case_two();
            let dev = (m.max - TSIRELSON).abs();
            (
                json!({
                    "case": "two",
                    "max": m.max,
                    "argmax": [m.x, m.y],
                    "grid_best": m.grid_best,
                    "grid_points": m.grid_points,
                    "expected": TSIRELSON,
                }),
                vec![Check::new("tsirelson", dev <= tol, format!("|max - 2sqrt2| = {dev:e}"))],
            )
        }
        Case::Quantum => {
            let ket = match state {
                StateChoice::Bell => Ket::from_real(&[1.0 / SQRT_2, 0.0, 0.0, 1.0 / SQRT_2]),
                StateChoice::Product => Ket::basis(4, 0),
                StateChoice::Random => random_ket(4, &mut ChaCha8Rng::seed_from_u64(seed)),
            };
            let m = chsh_quantum_max_seeded(&ket, seed, 24)?;
            (
                json!({
                    "case": "quantum",
                    "state": ket_json(&ket),
                    "max": m.max,
                    "measurement_angles": m.measurement_angles,
                    "tsirelson": TSIRELSON,
                }),
                vec![Check::new(
                    "tsirelson",
                    m.max <= TSIRELSON + 1e-9,
                    format!("max {} vs 2sqrt2", m.max),
                )],
            )
        }
    };
    Ok(Report {
        command: "chsh-max".into(),
        result,
        checks,
        table: None,
    })
}

fn cmd_nbody(n: usize, seed: u64, tol: f64) -> Result<Report> {
    let pattern = svetlichny_signs(n)?;
    let local = local_deterministic_max(n, &pattern)?;
    let sigma_bound = e_inequality_bound(n)?;
    let closed = e_inequality_bound_closed_form(n);
    let half = (1u64 << (n - 1)) as f64;
    let s_bound = 2.0 * (sigma_bound - half);
    let mut checks = vec![
        Check::new("local_max", local == half, format!("local {local} vs 2^(n-1) = {half}")),
        Check::new(
            "sigma_bound_closed_form",
            (sigma_bound - closed).abs() <= 1e-12,
            format!("numeric {sigma_bound} vs closed form {closed}"),
        ),
    ];
    let mut result = json!({
        "n": n,
        "signs": (0..1usize << n)
            .map(|x| (bits_to_string(x, n), pattern.sign(x)))
            .collect::<std::collections::BTreeMap<_, _>>(),
        "local_max": local,
        "sigma_bound": sigma_bound,
        "s_bound": s_bound,
        "quantum_bound": quantum_bound(n),
    });
    if n <= 3 {
        let opt = optimize_ghz_svetlichny(n, seed, 8)?;
        let dev = (opt.s_n - quantum_bound(n)).abs();
        checks.push(Check::new("ghz_reaches_quantum_bound", dev <= tol, format!("|S - bound| = {dev:e}")));
        result["quantum"] = json!({ "s_n": opt.s_n, "angles": opt.angles, "behavior": opt.behavior });
    }
    Ok(Report {
        command: "nbody".into(),
        result,
        checks,
        table: None,
    })
}

fn cmd_prbox() -> Result<Report> {
    let b = pr_like_box();
    let p = svetlichny_signs(2)?;
    let s2 = s_n(&b, &p)?;
    let ns = is_no_signaling(&b, 1e-10);
    let tr = transitivity_check(&b, TRANSITIVITY_TOL)?;
    let e = verify_e_inequality(&b, &p)?;
    let checks = vec![
        Check::new("s2_equals_3", s2 == 3.0, format!("S2 = {s2}")),
        Check::new("no_signaling", ns, "tol 1e-10"),
        Check::new(
            "one_transitivity_violation",
            tr.violations.len() == 1,
            format!("{} violations", tr.violations.len()),
        ),
        Check::new(
            "e_inequality_violated",
            !e.satisfied,
            format!("lhs {} vs rhs {}", e.lhs, e.rhs),
        ),
    ];
    Ok(Report {
        command: "prbox".into(),
        result: json!({
            "behavior": b,
            "correlators": b.correlators(),
            "s2": s2,
            "sigma2": sigma_n(&b, &p)?,
            "no_signaling": ns,
            "transitivity": tr,
            "e_inequality": e,
        }),
        checks,
        table: None,
    })
}

fn cmd_rank_check(samples: usize, dim: usize, seed: u64) -> Result<Report> {
    if !(1..=16).contains(&dim) {
        return Err(Error::OutOfRange(format!("--dim must be in 1..=16, got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut applicable, mut counterexamples, mut max_norm_applicable) = (0usize, 0usize, 0.0f64);
    for _ in 0..samples {
        let (p, q) = sample_projector_pair(dim, &mut rng);
        let r = rank_lemma_check(&p, &q)?;
        if r.lemma_applicable {
            applicable += 1;
            max_norm_applicable = max_norm_applicable.max(r.norm);
        }
        if !r.consistent {
            counterexamples += 1;
        }
    }
    Ok(Report {
        command: "rank-check".into(),
        result: json!({
            "samples": samples,
            "dim": dim,
            "seed": seed,
            "lemma_applicable": applicable,
            "counterexamples": counterexamples,
            "max_norm_when_applicable": max_norm_applicable,
        }),
        checks: vec![Check::new(
            "no_counterexamples",
            counterexamples == 0,
            format!("{counterexamples} of {applicable} applicable pairs"),
        )],
        table: None,
    })
}

fn cmd_exclusivity_verify(n: usize, partition: Option<&PathBuf>) -> Result<Report> {
    let p = svetlichny_signs(n)?;
    let sigma_events = sigma_event_set(n, &p)?;
    let universe = two_copy_sigma_events(n, &p)?.len();
    let (sets, source) = match partition {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let sets: Vec<Vec<Event>> =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            (sets, "file")
        }
        None => {
            let sets = search_partition_n2(&p)?
                .ok_or_else(|| Error::OutOfRange("no partition found".into()))?;
            (sets, "search")
        }
    };
    let report = verify_partition(n, &p, &sets)?;
    Ok(Report {
        command: "exclusivity-verify".into(),
        result: json!({
            "n": n,
            "sigma_events": sigma_events.len(),
            "sigma_events_pairwise_exclusive": pairwise_exclusive_check(&sigma_events)?,
            "two_copy_events": universe,
            "partition_source": source,
            "partition": report,
        }),
        checks: vec![Check::new(
            "partition_valid",
            report.valid,
            format!("{} sets checked", report.set_count),
        )],
        table: None,
    })
}

/// Executes a parsed command.
pub fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Schmidt { theta, phi, eta } => cmd_schmidt(*theta, *phi, *eta, cli.tol.unwrap_or(1e-9)),
        Command::EntropyScan { phi } => cmd_entropy_scan(cli.grid, *phi, cli.tol.unwrap_or(1e-10)),
        Command::ChshMax { case, state } => cmd_chsh_max(*case, *state, cli.seed, cli.tol.unwrap_or(1e-8)),
        Command::Nbody { n } => cmd_nbody(*n as usize, cli.seed, cli.tol.unwrap_or(1e-5)),
        Command::Prbox => cmd_prbox(),
        Command::RankCheck { samples, dim } => cmd_rank_check(*samples, *dim, cli.seed),
        Command::ExclusivityVerify { n, partition } => cmd_exclusivity_verify(*n, partition.as_ref()),
    }
}

/// The arguments after the program name with `--out` removed, so that the
/// recorded invocation does not depend on where output is written.
fn invocation(args: &[OsString]) -> String {
    let mut words = vec!["indist".to_string()];
    let mut skip = false;
    for a in args.iter().skip(1) {
        let a = a.to_string_lossy();
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") {
            continue;
        }
        words.push(if a.contains(' ') { format!("'{a}'") } else { a.into_owned() });
    }
    words.join(" ")
}

fn failure_record(kind: &str, message: &str) -> String {
    json!({ "schema": SCHEMA_VERSION, "status": "error", "kind": kind, "message": message }).to_string()
}

/// Parses `args` (including the program name), runs the command and writes
/// the output. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            eprintln!("{}", failure_record("usage", &e.kind().to_string()));
            return 2;
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", failure_record("input", &e.to_string()));
            return 2;
        }
    };
    let inv = invocation(&args);
    let text = match cli.format {
        Format::Json => report.to_json(&inv),
        Format::Csv => report.to_csv(&inv),
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        eprintln!("{}", failure_record("io", &msg));
        return 2;
    }
    if !report.passed() {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        eprintln!(
            "{}",
            json!({ "schema": SCHEMA_VERSION, "status": "check_failed", "command": report.command, "failed": failed })
        );
        return 1;
    }
    0
}
