//! Deterministic command-line front end: magic-value tables, Rabi
//! frequencies, gate synthesis and verification, schedule execution, and
//! Lamb-Dicke sensitivity scans.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 when a verification ran
//! but landed outside its tolerance. Output is byte-identical for identical
//! invocations; angles are radians, with a `pi` suffix accepted as a
//! multiplier (`0.25pi`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ion_gate_lab::coupling::{rabi_frequency, CouplingContext};
use ion_gate_lab::dynamics::{NumericOptions, StateVector, DEFAULT_STEPS_PER_TRAP_PERIOD};
use ion_gate_lab::magic::{
    magic_eta_01, magic_table, magic_table_for_pair, MagicEntry, DEFAULT_SEARCH_MAX,
};
use ion_gate_lab::schema::{matrix_to_pairs, ScheduleDoc, SCHEMA};
use ion_gate_lab::sequence::{
    apply_schedule, eta_sensitivity, reduced_cn_schedule, truth_table, verify_net_unitary,
    PropagationMethod,
};

fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let parsed = if let Some(head) = t.strip_suffix("pi") {
        let head = head.trim();
        let factor: f64 = match head {
            "" => 1.0,
            "-" => -1.0,
            _ => head
                .parse()
                .map_err(|_| format!("invalid angle {s:?} (radians, or a pi multiple like 0.25pi)"))?,
        };
        factor * std::f64::consts::PI
    } else {
        t.parse()
            .map_err(|_| format!("invalid angle {s:?} (radians, or a pi multiple like 0.25pi)"))?
    };
    if parsed.is_finite() {
        Ok(parsed)
    } else {
        Err(format!("angle {s:?} is not finite"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Structured,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the document to a file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Decimal digits for text and CSV output.
    #[arg(long, default_value_t = 6)]
    precision: usize,
}

#[derive(Debug, Parser)]
#[command(name = "ion-gate", version, about = "Single-pulse trapped-ion CN gate toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate magic Lamb-Dicke parameters over (k, m) pairs.
    MagicTable {
        /// Largest k (flip-level rotation (2k+1) pi).
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        /// Largest m (no-op-level rotation 2m pi).
        #[arg(long, default_value_t = 7)]
        mmax: usize,
        /// Solve for an arbitrary Fock pair N_A N_B instead of 0 1.
        #[arg(long, num_args = 2, value_names = ["N_A", "N_B"])]
        pair: Option<Vec<usize>>,
        /// Swap the roles of the |0> and |1> levels (|1> becomes the no-op).
        #[arg(long)]
        swapped: bool,
        /// Upper end of the eta root search for general pairs.
        #[arg(long, default_value_t = DEFAULT_SEARCH_MAX)]
        search_max: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate the Rabi frequency Omega_{nprime,n} at a given eta.
    Rabi {
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        nprime: usize,
        /// Base coupling in rad/s (1 = dimensionless mode).
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        g: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Simulate the single-pulse reduced CN and compare to the net unitary.
    Gate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Drive phase (radians; accepts e.g. 0.25pi).
        #[arg(long, value_parser = parse_angle, default_value = "0", allow_hyphen_values = true)]
        phi: f64,
        /// Entrywise tolerance for the comparison.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run a serialized pulse schedule on a basis input.
    Sequence {
        /// Schedule document (JSON, schema ion-gate-lab/1).
        #[arg(long)]
        file: PathBuf,
        /// Input basis label, e.g. 1:d or 0:du.
        #[arg(long)]
        input: String,
        /// Propagate with the brute-force integrator instead of the RWA blocks.
        #[arg(long)]
        oracle: bool,
        /// Trap frequency over base coupling, required with --oracle.
        #[arg(long)]
        omega_over_g: Option<f64>,
        /// Integrator resolution (steps per trap period).
        #[arg(long, default_value_t = DEFAULT_STEPS_PER_TRAP_PERIOD)]
        steps_per_period: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Truth-table check of the reduced CN gate.
    Verify {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Drive phase (radians; accepts e.g. 0.25pi).
        #[arg(long, value_parser = parse_angle, default_value = "0", allow_hyphen_values = true)]
        phi: f64,
        /// Population tolerance.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Gate infidelity versus Lamb-Dicke error at fixed pulse duration.
    Sensitivity {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Perturbations delta applied to eta, comma-separated.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        deltas: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// A finished command: the document to emit and whether verification (if
/// any) stayed inside tolerance.
struct Outcome {
    document: String,
    passed: bool,
}

impl Outcome {
    fn ok(document: String) -> Self {
        Self { document, passed: true }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            // Keep the diagnostic to one line, naming the offending flag.
            let rendered = err.render().to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{line}");
            return ExitCode::from(1);
        }
    };

    let (outcome, out_args) = match run(cli.command) {
        Ok(pair) => pair,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };

    if let Some(path) = &out_args.output {
        if let Err(e) = std::fs::write(path, &outcome.document) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    } else {
        print!("{}", outcome.document);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run(command: Command) -> Result<(Outcome, OutputArgs), String> {
    match command {
        Command::MagicTable { kmax, mmax, pair, swapped, search_max, out } => {
            let outcome = magic_table_cmd(kmax, mmax, pair, swapped, search_max, &out)?;
            Ok((outcome, out))
        }
        Command::Rabi { eta, n, nprime, g, out } => {
            let outcome = rabi_cmd(eta, n, nprime, g, &out)?;
            Ok((outcome, out))
        }
        Command::Gate { k, m, phi, tol, out } => {
            let outcome = gate_cmd(k, m, phi, tol, &out)?;
            Ok((outcome, out))
        }
        Command::Sequence { file, input, oracle, omega_over_g, steps_per_period, out } => {
            let outcome = sequence_cmd(&file, &input, oracle, omega_over_g, steps_per_period, &out)?;
            Ok((outcome, out))
        }
        Command::Verify { k, m, phi, tol, out } => {
            let outcome = verify_cmd(k, m, phi, tol, &out)?;
            Ok((outcome, out))
        }
        Command::Sensitivity { k, m, deltas, out } => {
            let outcome = sensitivity_cmd(k, m, &deltas, &out)?;
            Ok((outcome, out))
        }
    }
}

/// Fixed-point formatting; values that round to zero lose their sign so a
/// -1e-17 never prints as "-0.000000".
fn fmt_f(v: f64, prec: usize) -> String {
    let s = format!("{v:.prec$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn fmt_e(v: f64, prec: usize) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.prec$e}")
}

fn fmt_signed(v: f64, prec: usize) -> String {
    let s = format!("{v:+.prec$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        format!("+{}", &s[1..])
    } else {
        s
    }
}

fn fmt_complex(re: f64, im: f64, prec: usize) -> String {
    format!("{}{}i", fmt_signed(re, prec), fmt_signed(im, prec))
}

/// Pad columns to equal width, two spaces between, one row per line.
fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut widths = vec![0usize; cols];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut doc = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, cell)| format!("{cell:<width$}", width = widths[i]))
            .collect();
        doc.push_str(line.join("  ").trim_end());
        doc.push('\n');
    }
    doc
}

fn csv_lines(rows: &[Vec<String>]) -> String {
    let mut doc = String::new();
    for row in rows {
        doc.push_str(&row.join(","));
        doc.push('\n');
    }
    doc
}

fn magic_table_cmd(
    kmax: usize,
    mmax: usize,
    pair: Option<Vec<usize>>,
    swapped: bool,
    search_max: f64,
    out: &OutputArgs,
) -> Result<Outcome, String> {
    let entries: Vec<MagicEntry> = match &pair {
        None => magic_table(kmax, mmax, swapped).map_err(|e| e.to_string())?,
        Some(p) => {
            if swapped {
                return Err("--swapped applies only to the default 0/1 pair".into());
            }
            magic_table_for_pair(p[0], p[1], kmax, mmax, search_max).map_err(|e| e.to_string())?
        }
    };

    let document = match out.format {
        Format::Text | Format::Csv => {
            let mut rows = vec![vec![
                "k".to_string(),
                "rotation_b".to_string(),
                "m".to_string(),
                "rotation_a".to_string(),
                "n_a".to_string(),
                "n_b".to_string(),
                "eta".to_string(),
            ]];
            for e in &entries {
                rows.push(vec![
                    e.k().to_string(),
                    format!("{}pi", 2 * e.k() + 1),
                    e.m().to_string(),
                    format!("{}pi", 2 * e.m()),
                    e.n_a().to_string(),
                    e.n_b().to_string(),
                    fmt_f(e.eta(), out.precision),
                ]);
            }
            if out.format == Format::Text {
                aligned(&rows)
            } else {
                csv_lines(&rows)
            }
        }
        Format::Structured => {
            let list: Vec<_> = entries
                .iter()
                .map(|e| {
                    json!({
                        "k": e.k(),
                        "m": e.m(),
                        "n_a": e.n_a(),
                        "n_b": e.n_b(),
                        "rotation_b_pi": 2 * e.k() + 1,
                        "rotation_a_pi": 2 * e.m(),
                        "eta": e.eta(),
                        "pulse_area_00_rad": e.pulse_area_00(),
                    })
                })
                .collect();
            let doc = json!({
                "schema": SCHEMA,
                "kind": "magic_table",
                "entries": list,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
    };
    Ok(Outcome::ok(document))
}

fn rabi_cmd(eta: f64, n: usize, nprime: usize, g: f64, out: &OutputArgs) -> Result<Outcome, String> {
    let ctx = CouplingContext::new(eta, g).map_err(|e| e.to_string())?;
    let omega = rabi_frequency(n, nprime, &ctx);
    let document = match out.format {
        Format::Text => format!("{}\n", fmt_f(omega, out.precision)),
        Format::Csv => csv_lines(&[
            vec!["eta".into(), "n".into(), "nprime".into(), "g".into(), "omega".into()],
            vec![
                fmt_f(eta, out.precision),
                n.to_string(),
                nprime.to_string(),
                fmt_f(g, out.precision),
                fmt_f(omega, out.precision),
            ],
        ]),
        Format::Structured => {
            let doc = json!({
                "schema": SCHEMA,
                "kind": "rabi",
                "eta": eta,
                "n": n,
                "nprime": nprime,
                "g": g,
                "omega": omega,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
    };
    Ok(Outcome::ok(document))
}

fn cn_entry(k: usize, m: usize) -> Result<MagicEntry, String> {
    let eta = magic_eta_01(k, m).map_err(|e| e.to_string())?;
    MagicEntry::new(k, m, 0, 1, eta).map_err(|e| e.to_string())
}

fn gate_cmd(k: usize, m: usize, phi: f64, tol: f64, out: &OutputArgs) -> Result<Outcome, String> {
    let entry = cn_entry(k, m)?;
    let schedule = reduced_cn_schedule(&entry, phi, 1.0, 2).map_err(|e| e.to_string())?;
    let report = verify_net_unitary(&schedule, k, m, phi, tol).map_err(|e| e.to_string())?;

    let status = if report.passed { "pass" } else { "fail" };
    let document = match out.format {
        Format::Text => {
            let mut doc = String::new();
            for r in 0..4 {
                let row: Vec<String> = (0..4)
                    .map(|c| {
                        let z = report.unitary[[r, c]];
                        fmt_complex(z.re, z.im, out.precision)
                    })
                    .collect();
                doc.push_str(&row.join("  "));
                doc.push('\n');
            }
            doc.push_str(&format!("max_deviation = {}\n", fmt_e(report.max_deviation, out.precision)));
            doc.push_str(&format!("fidelity = {}\n", fmt_f(report.report.fidelity, out.precision)));
            doc.push_str(&format!("status = {status}\n"));
            doc
        }
        Format::Csv => csv_lines(&[
            vec!["metric".into(), "value".into()],
            vec!["max_deviation".into(), fmt_e(report.max_deviation, out.precision)],
            vec!["fidelity".into(), fmt_f(report.report.fidelity, out.precision)],
            vec!["infidelity".into(), fmt_e(report.report.infidelity, out.precision)],
            vec!["status".into(), status.into()],
        ]),
        Format::Structured => {
            let doc = json!({
                "schema": SCHEMA,
                "kind": "gate",
                "k": k,
                "m": m,
                "phi": phi,
                "tol": tol,
                "unitary": matrix_to_pairs(&report.unitary),
                "max_deviation": report.max_deviation,
                "fidelity": report.report.fidelity,
                "infidelity": report.report.infidelity,
                "passed": report.passed,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
    };
    Ok(Outcome { document, passed: report.passed })
}

fn sequence_cmd(
    file: &PathBuf,
    input: &str,
    oracle: bool,
    omega_over_g: Option<f64>,
    steps_per_period: usize,
    out: &OutputArgs,
) -> Result<Outcome, String> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    let schedule = ScheduleDoc::from_json(&text)
        .and_then(|doc| doc.to_schedule())
        .map_err(|e| e.to_string())?;
    let space = *schedule.space();

    let method = if oracle {
        let ratio = omega_over_g.ok_or("--oracle requires --omega-over-g")?;
        let opts = NumericOptions::new(ratio)
            .and_then(|o| o.steps_per_trap_period(steps_per_period))
            .map_err(|e| e.to_string())?;
        PropagationMethod::Numeric(opts)
    } else {
        if omega_over_g.is_some() {
            return Err("--omega-over-g requires --oracle".into());
        }
        PropagationMethod::Rwa
    };

    let index = space.parse_label(input).map_err(|e| e.to_string())?;
    let state = StateVector::basis_state(&space, index).map_err(|e| e.to_string())?;
    let final_state = apply_schedule(&schedule, &state, method).map_err(|e| e.to_string())?;

    let labels = space.labels();
    let amps = final_state.amplitudes();
    let pops = final_state.populations();
    let document = match out.format {
        Format::Text | Format::Csv => {
            let mut rows = vec![vec![
                "label".to_string(),
                "re".to_string(),
                "im".to_string(),
                "population".to_string(),
            ]];
            for (i, label) in labels.iter().enumerate() {
                rows.push(vec![
                    label.clone(),
                    fmt_f(amps[i].re, out.precision),
                    fmt_f(amps[i].im, out.precision),
                    fmt_f(pops[i], out.precision),
                ]);
            }
            if out.format == Format::Text {
                aligned(&rows)
            } else {
                csv_lines(&rows)
            }
        }
        Format::Structured => {
            let doc = json!({
                "schema": SCHEMA,
                "kind": "final_state",
                "input": input,
                "labels": labels,
                "amplitudes": amps.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "populations": pops,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
    };
    Ok(Outcome::ok(document))
}

fn verify_cmd(k: usize, m: usize, phi: f64, tol: f64, out: &OutputArgs) -> Result<Outcome, String> {
    let entry = cn_entry(k, m)?;
    let schedule = reduced_cn_schedule(&entry, phi, 1.0, 2).map_err(|e| e.to_string())?;
    let labels = ["0:d", "0:u", "1:d", "1:u"];
    let report = truth_table(&schedule, &labels).map_err(|e| e.to_string())?;

    // The reduced CN flips the internal state exactly when n = 1.
    let expected = [0usize, 1, 3, 2];
    let mut worst = report.max_leakage;
    for (row, &want_col) in report.rows.iter().zip(&expected) {
        for (col, (_, p)) in row.populations.iter().enumerate() {
            let want = if col == want_col { 1.0 } else { 0.0 };
            worst = worst.max((p - want).abs());
        }
    }
    let passed = worst <= tol;
    let status = if passed { "pass" } else { "fail" };

    let document = match out.format {
        Format::Text | Format::Csv => {
            let mut rows = vec![{
                let mut h = vec!["input".to_string()];
                h.extend(labels.iter().map(|l| l.to_string()));
                h.push("leakage".to_string());
                h
            }];
            for row in &report.rows {
                let logical_sum: f64 = row.populations.iter().map(|(_, p)| p).sum();
                let mut r = vec![row.input.clone()];
                r.extend(row.populations.iter().map(|(_, p)| fmt_f(*p, out.precision)));
                r.push(fmt_e(1.0 - logical_sum, out.precision));
                rows.push(r);
            }
            let table = if out.format == Format::Text {
                let mut t = aligned(&rows);
                t.push_str(&format!("max_population_error = {}\n", fmt_e(worst, out.precision)));
                t.push_str(&format!("status = {status}\n"));
                t
            } else {
                csv_lines(&rows)
            };
            table
        }
        Format::Structured => {
            let rows: Vec<_> = report
                .rows
                .iter()
                .map(|row| {
                    let pops: serde_json::Map<String, serde_json::Value> = row
                        .populations
                        .iter()
                        .map(|(l, p)| (l.clone(), json!(p)))
                        .collect();
                    json!({ "input": row.input, "populations": pops })
                })
                .collect();
            let doc = json!({
                "schema": SCHEMA,
                "kind": "truth_table",
                "k": k,
                "m": m,
                "phi": phi,
                "tol": tol,
                "rows": rows,
                "max_leakage": report.max_leakage,
                "max_population_error": worst,
                "passed": passed,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
    };
    Ok(Outcome { document, passed })
}

fn sensitivity_cmd(k: usize, m: usize, deltas: &[f64], out: &OutputArgs) -> Result<Outcome, String> {
    let entry = cn_entry(k, m)?;
    let ctx = CouplingContext::dimensionless(entry.eta()).map_err(|e| e.to_string())?;
    let points = eta_sensitivity(&entry, deltas, &ctx).map_err(|e| e.to_string())?;

    let document = match out.format {
        Format::Text | Format::Csv => {
            let mut rows = vec![vec!["delta_eta".to_string(), "infidelity".to_string()]];
            for p in &points {
                rows.push(vec![
                    fmt_e(p.delta_eta, out.precision),
                    fmt_e(p.infidelity, out.precision),
                ]);
            }
            if out.format == Format::Text {
                aligned(&rows)
            } else {
                csv_lines(&rows)
            }
        }
        Format::Structured => {
            let list: Vec<_> = points
                .iter()
                .map(|p| json!({ "delta_eta": p.delta_eta, "infidelity": p.infidelity }))
                .collect();
            let doc = json!({
                "schema": SCHEMA,
                "kind": "sensitivity",
                "k": k,
                "m": m,
                "points": list,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
    };
    Ok(Outcome::ok(document))
}
