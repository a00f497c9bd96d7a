//! Command-line surface: file parsing, dispatch, reports and exit codes.
//!
//! Exit codes: 0 when the checked condition holds (or the operation succeeded),
//! 1 when it was checked and fails, 2 when the input could not be checked.

pub mod error;
pub mod files;
pub mod json;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use qecverify::channels::{
    compose, example_channel, random_ampliate_channel, random_channel, validate_cptp,
};
use qecverify::conditions::{
    bruteforce_noiseless_oracle, check_ampliate_noiseless, check_correctable,
    check_normal_noiseless, check_quadruple, classify_support_case, ConditionReport, Witness,
    WitnessKind,
};
use qecverify::recovery::{rank_profile, synthesize_recovery};
use qecverify::{CMatrix, KrausChannel, SpaceDecomposition};

use crate::error::CliError;
use crate::files::{matrix_to_rows, ChannelFile, Factor, StateFile};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "qecverify",
    version,
    about = "Noiseless-subsystem and correctability checks for Kraus channels"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Residual tolerance (Frobenius norm).
    #[arg(long, global = true, default_value_t = qecverify::DEFAULT_TOL)]
    tol: f64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Random samples drawn by the oracle.
    #[arg(long, global = true, default_value_t = 20)]
    samples: usize,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// Which noisy factor a quadruple is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reading {
    /// The full `B` of the file's decomposition.
    B,
    /// `B := B1`.
    B1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Random,
    Ampliate,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ampliate noiseless-subsystem test (B1 inputs may spread over B).
    CheckAmpliate { channel: PathBuf },
    /// Normal noiseless-subsystem test (B1 must stay in B1).
    CheckNoiseless { channel: PathBuf },
    /// Correctability of uniform-B1 inputs.
    CheckCorrectable { channel: PathBuf },
    /// Whether RECOVERY undoes CHANNEL on every rho^A ⊗ I^{B1}/r1.
    CheckQuadruple {
        channel: PathBuf,
        recovery: PathBuf,
        #[arg(long, value_enum, default_value_t = Reading::B)]
        reading: Reading,
    },
    /// Build a recovery channel and write it as a channel file.
    Synthesize {
        channel: PathBuf,
        #[arg(long)]
        emit: PathBuf,
    },
    /// Sampling test of the ampliate noiseless condition.
    Oracle { channel: PathBuf },
    /// Classify the supports of an input/output pair of B states.
    ClassifyCase { rho1: PathBuf, rho2: PathBuf },
    /// Apply a channel to a state on H.
    Apply {
        channel: PathBuf,
        state: PathBuf,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// The two-qubit example channel and its verdicts.
    Demo {
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Write a random channel file.
    Generate {
        #[arg(long, value_enum)]
        kind: GeneratorKind,
        #[arg(long)]
        dim_a: usize,
        #[arg(long)]
        dim_b: usize,
        #[arg(long)]
        dim_b1: usize,
        #[arg(long, default_value_t = 0)]
        dim_perp: usize,
        /// Kraus operators (random) or environment dimension (ampliate).
        #[arg(long, default_value_t = 2)]
        count: usize,
        #[arg(long)]
        emit: PathBuf,
    },
}

struct Outcome {
    code: i32,
    report: Map<String, Value>,
    text: String,
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => match emit_report(&cli, outcome.report, &outcome.text) {
            Ok(()) => outcome.code,
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit_report(cli: &Cli, mut report: Map<String, Value>, text: &str) -> Result<(), CliError> {
    report.insert("version".into(), json!(VERSION));
    report.insert("seed".into(), json!(cli.seed));
    report.insert("tolerance".into(), json!(cli.tol));
    let rendered = match cli.format {
        Format::Json => json::canonical(&Value::Object(report)) + "\n",
        Format::Text => text.to_string(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::input("--tol must be a positive number"));
    }
    let tol = cli.tol;
    match &cli.command {
        Command::CheckAmpliate { channel } => {
            let (e, d) = load_channel(channel, tol)?;
            Ok(condition_outcome(
                "check-ampliate",
                &check_ampliate_noiseless(&e, &d, tol)?,
            ))
        }
        Command::CheckNoiseless { channel } => {
            let (e, d) = load_channel(channel, tol)?;
            Ok(condition_outcome(
                "check-noiseless",
                &check_normal_noiseless(&e, &d, tol)?,
            ))
        }
        Command::CheckCorrectable { channel } => {
            let (e, d) = load_channel(channel, tol)?;
            Ok(condition_outcome(
                "check-correctable",
                &check_correctable(&e, &d, tol)?,
            ))
        }
        Command::CheckQuadruple {
            channel,
            recovery,
            reading,
        } => quadruple(channel, recovery, *reading, tol),
        Command::Synthesize { channel, emit } => synthesize(channel, emit, tol),
        Command::Oracle { channel } => oracle(channel, cli.samples, cli.seed, tol),
        Command::ClassifyCase { rho1, rho2 } => classify(rho1, rho2, tol),
        Command::Apply {
            channel,
            state,
            emit,
        } => apply_state(channel, state, emit.as_deref(), tol),
        Command::Demo { gamma, emit } => demo(*gamma, emit.as_deref(), tol),
        Command::Generate {
            kind,
            dim_a,
            dim_b,
            dim_b1,
            dim_perp,
            count,
            emit,
        } => {
            let d = SpaceDecomposition::new(*dim_a, *dim_b, *dim_b1, *dim_perp)?;
            let e = match kind {
                GeneratorKind::Random => random_channel(d.total_dim(), *count, cli.seed)?,
                GeneratorKind::Ampliate => random_ampliate_channel(&d, *count, cli.seed)?,
            };
            ChannelFile::from_channel(&e, &d).write(emit)?;
            let mut report = Map::new();
            report.insert("command".into(), json!("generate"));
            report.insert("verdict".into(), json!("written"));
            report.insert("lambda_table".into(), json!({}));
            report.insert("kraus_count".into(), json!(e.len()));
            Ok(Outcome {
                code: 0,
                report,
                text: format!(
                    "generate: wrote {} Kraus operators to {}\n",
                    e.len(),
                    emit.display()
                ),
            })
        }
    }
}

fn load_channel(path: &Path, tol: f64) -> Result<(KrausChannel, SpaceDecomposition), CliError> {
    ChannelFile::read(path)?.to_channel(tol)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &CMatrix) -> Value {
    serde_json::to_value(matrix_to_rows(m)).expect("matrix rows serialize")
}

fn lambda_json(report: &ConditionReport) -> Value {
    let mut map = Map::new();
    for (key, lambda) in &report.lambda_table {
        let key = key
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",");
        map.insert(key, complex_json(*lambda));
    }
    Value::Object(map)
}

fn kind_name(kind: WitnessKind) -> &'static str {
    match kind {
        WitnessKind::BlockNotScalar => "block_not_scalar",
        WitnessKind::Leakage => "leakage",
        WitnessKind::OutputMismatch => "output_mismatch",
    }
}

fn witness_json(w: &Option<Witness>) -> Value {
    match w {
        Some(w) => json!({
            "kind": kind_name(w.kind),
            "indices": w.indices,
            "residual": w.residual,
        }),
        None => Value::Null,
    }
}

fn verdict(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "fails"
    }
}

fn witness_text(w: &Option<Witness>) -> String {
    match w {
        Some(w) => format!(
            "  witness: {} at {:?}, residual {:.3e}\n",
            kind_name(w.kind),
            w.indices,
            w.residual
        ),
        None => String::new(),
    }
}

fn condition_outcome(command: &str, r: &ConditionReport) -> Outcome {
    let mut report = Map::new();
    report.insert("command".into(), json!(command));
    report.insert("verdict".into(), json!(verdict(r.holds)));
    report.insert("max_residual".into(), json!(r.max_residual));
    report.insert("lambda_table".into(), lambda_json(r));
    report.insert("witness".into(), witness_json(&r.witness));
    let mut text = format!(
        "{command}: {} (max residual {:.3e})\n",
        verdict(r.holds),
        r.max_residual
    );
    text += &witness_text(&r.witness);
    Outcome {
        code: if r.holds { 0 } else { 1 },
        report,
        text,
    }
}

fn quadruple(
    channel: &Path,
    recovery: &Path,
    reading: Reading,
    tol: f64,
) -> Result<Outcome, CliError> {
    let (e, d) = load_channel(channel, tol)?;
    let (r, rd) = load_channel(recovery, tol)?;
    if rd.total_dim() != d.total_dim() {
        return Err(CliError::input(format!(
            "recovery acts on dimension {}, channel on {}",
            rd.total_dim(),
            d.total_dim()
        )));
    }
    let (e, r, d) = match reading {
        Reading::B => (e, r, d),
        Reading::B1 => {
            let (reduced, perm) = d.b1_reading();
            (e.permuted(&perm), r.permuted(&perm), reduced)
        }
    };
    let q = check_quadruple(&r, &e, &d, tol)?;
    let corr = check_correctable(&e, &d, tol)?;
    let mut report = Map::new();
    report.insert("command".into(), json!("check-quadruple"));
    report.insert("verdict".into(), json!(verdict(q.holds)));
    report.insert("max_residual".into(), json!(q.residual));
    report.insert("lambda_table".into(), lambda_json(&corr));
    let witness = match (&q.witness, q.holds) {
        (Some(_), _) => q.witness.clone(),
        (None, false) => Some(Witness {
            kind: WitnessKind::OutputMismatch,
            indices: vec![0],
            residual: q.residual,
        }),
        (None, true) => None,
    };
    report.insert("witness".into(), witness_json(&witness));
    report.insert(
        "sigma".into(),
        q.sigma.as_ref().map_or(Value::Null, matrix_json),
    );
    report.insert(
        "reading".into(),
        json!(match reading {
            Reading::B => "B",
            Reading::B1 => "B1",
        }),
    );
    let mut text = format!(
        "check-quadruple: {} (max residual {:.3e})\n",
        verdict(q.holds),
        q.residual
    );
    if let Some(s) = &q.sigma {
        let _ = writeln!(text, "  sigma: {}", matrix_text(s));
    }
    text += &witness_text(&witness);
    Ok(Outcome {
        code: if q.holds { 0 } else { 1 },
        report,
        text,
    })
}

fn matrix_text(m: &CMatrix) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cells: Vec<String> = (0..m.ncols())
                .map(|j| {
                    let z = m[(i, j)];
                    if z.im.abs() < 1e-12 {
                        format!("{:.4}", z.re)
                    } else {
                        format!("{:.4}{:+.4}i", z.re, z.im)
                    }
                })
                .collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

fn synthesize(channel: &Path, emit: &Path, tol: f64) -> Result<Outcome, CliError> {
    let (e, d) = load_channel(channel, tol)?;
    let rec = match synthesize_recovery(&e, &d, tol) {
        Ok(rec) => rec,
        Err(qecverify::Error::NotCorrectable(report)) => {
            let mut out = condition_outcome("synthesize", &report);
            out.text = format!(
                "synthesize: channel is not correctable\n{}",
                witness_text(&report.witness)
            );
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    let certify_tol = 10.0 * tol;
    let q = check_quadruple(&rec.channel, &e, &d, certify_tol)?;
    let cptp = validate_cptp(rec.channel.operators(), certify_tol)?;
    let corr = check_correctable(&e, &d, tol)?;
    let gram = qecverify::recovery::build_gram(&e, &d, tol)?;
    let profile = rank_profile(&gram, tol);
    ChannelFile::from_channel(&rec.channel, &d).write(emit)?;

    let holds = q.holds && cptp.ok;
    let mut report = Map::new();
    report.insert("command".into(), json!("synthesize"));
    report.insert("verdict".into(), json!(verdict(holds)));
    report.insert("max_residual".into(), json!(q.residual.max(cptp.residual)));
    report.insert("lambda_table".into(), lambda_json(&corr));
    report.insert("gram_eigenvalues".into(), json!(profile.eigenvalues));
    report.insert("rank".into(), json!(profile.rank));
    report.insert("recovery_kraus_count".into(), json!(rec.channel.len()));
    report.insert("warnings".into(), json!(rec.warnings));
    report.insert(
        "sigma".into(),
        q.sigma.as_ref().map_or(Value::Null, matrix_json),
    );
    let witness = (!holds).then(|| Witness {
        kind: WitnessKind::OutputMismatch,
        indices: q.witness.as_ref().map_or(vec![], |w| w.indices.clone()),
        residual: q.residual.max(cptp.residual),
    });
    report.insert("witness".into(), witness_json(&witness));
    let mut text = format!(
        "synthesize: recovery with {} Kraus operators written to {} (rank {}, certified: {})\n",
        rec.channel.len(),
        emit.display(),
        profile.rank,
        verdict(holds)
    );
    for w in &rec.warnings {
        let _ = writeln!(text, "  warning: {w}");
    }
    Ok(Outcome {
        code: if holds { 0 } else { 1 },
        report,
        text,
    })
}

fn oracle(channel: &Path, samples: usize, seed: u64, tol: f64) -> Result<Outcome, CliError> {
    let (e, d) = load_channel(channel, tol)?;
    let sampled = bruteforce_noiseless_oracle(&e, &d, samples, seed, tol)?;
    let algebraic = check_ampliate_noiseless(&e, &d, tol)?;
    // Sampling alone cannot certify a universal statement.
    let confirmation = sampled.holds.then_some(algebraic.holds);
    let holds = sampled.holds && algebraic.holds;
    let witness = if holds {
        None
    } else if !sampled.holds {
        Some(Witness {
            kind: WitnessKind::OutputMismatch,
            indices: vec![],
            residual: sampled.worst_residual,
        })
    } else {
        algebraic.witness.clone()
    };
    let mut report = Map::new();
    report.insert("command".into(), json!("oracle"));
    report.insert("verdict".into(), json!(verdict(holds)));
    report.insert("max_residual".into(), json!(sampled.worst_residual));
    report.insert("samples".into(), json!(samples));
    report.insert("algebraic_confirmation".into(), json!(confirmation));
    report.insert("lambda_table".into(), lambda_json(&algebraic));
    report.insert(
        "per_basis_sigmas".into(),
        Value::Array(sampled.per_basis_sigmas.iter().map(matrix_json).collect()),
    );
    report.insert("witness".into(), witness_json(&witness));
    let mut text = format!(
        "oracle: {} over {samples} samples (worst residual {:.3e})\n",
        verdict(holds),
        sampled.worst_residual
    );
    if let Some(c) = confirmation {
        let _ = writeln!(text, "  algebraic confirmation: {}", verdict(c));
    }
    text += &witness_text(&witness);
    Ok(Outcome {
        code: if holds { 0 } else { 1 },
        report,
        text,
    })
}

fn classify(rho1: &Path, rho2: &Path, tol: f64) -> Result<Outcome, CliError> {
    let s1 = StateFile::read(rho1)?.density(tol)?;
    let s2 = StateFile::read(rho2)?.density(tol)?;
    if s1.shape() != s2.shape() {
        return Err(CliError::input(
            "the two states act on different dimensions",
        ));
    }
    let d = SpaceDecomposition::new(1, s1.nrows(), 1, 0)?;
    let case = classify_support_case(&s1, &s2, &d, tol)?;
    let name = match case {
        qecverify::SupportCase::CaseA => "A",
        qecverify::SupportCase::CaseB => "B",
        qecverify::SupportCase::CaseC => "C",
    };
    let mut report = Map::new();
    report.insert("command".into(), json!("classify-case"));
    report.insert("verdict".into(), json!(name));
    report.insert("lambda_table".into(), json!({}));
    report.insert("witness".into(), Value::Null);
    Ok(Outcome {
        code: 0,
        report,
        text: format!("classify-case: case {name}\n"),
    })
}

fn apply_state(
    channel: &Path,
    state: &Path,
    emit: Option<&Path>,
    tol: f64,
) -> Result<Outcome, CliError> {
    let (e, d) = load_channel(channel, tol)?;
    let file = StateFile::read(state)?;
    if file.factor != Factor::H {
        return Err(CliError::input(
            "apply expects a state on the full space (factor \"H\")",
        ));
    }
    let rho = file.density(tol)?;
    if rho.nrows() != d.total_dim() {
        return Err(CliError::input(format!(
            "state is {0}x{0}, channel acts on {1}x{1}",
            rho.nrows(),
            d.total_dim()
        )));
    }
    let out = e.apply(&rho)?;
    if let Some(path) = emit {
        StateFile::new(Factor::H, &out).write(path)?;
    }
    let mut report = Map::new();
    report.insert("command".into(), json!("apply"));
    report.insert("verdict".into(), json!("applied"));
    report.insert("lambda_table".into(), json!({}));
    report.insert("witness".into(), Value::Null);
    report.insert(
        "state".into(),
        json!({"factor": "H", "matrix": matrix_json(&out)}),
    );
    Ok(Outcome {
        code: 0,
        report,
        text: format!("apply: {}\n", matrix_text(&out)),
    })
}

fn demo(gamma: f64, emit: Option<&Path>, tol: f64) -> Result<Outcome, CliError> {
    let ex = example_channel(gamma)?;
    let (e, d) = (&ex.channel, &ex.decomp);
    if let Some(path) = emit {
        ChannelFile::from_channel(e, d).write(path)?;
    }
    let cptp = validate_cptp(e.operators(), tol)?;
    let ampliate = check_ampliate_noiseless(e, d, tol)?;
    let normal = check_normal_noiseless(e, d, tol)?;
    let correctable = check_correctable(e, d, tol)?;
    let identity = KrausChannel::identity(d.total_dim());
    let quad = check_quadruple(&identity, e, d, tol)?;
    let (reduced, perm) = d.b1_reading();
    let folded = compose(&qecverify::channels::build_eta2(d), &identity)?;
    let quad_b1 = check_quadruple(&folded.permuted(&perm), &e.permuted(&perm), &reduced, tol)?;

    let expected = cptp.ok
        && ampliate.holds
        && !normal.holds
        && correctable.holds
        && quad.holds
        && quad_b1.holds;
    let sigma_text = quad.sigma.as_ref().map_or("none".into(), matrix_text);

    let mut text = String::new();
    let _ = writeln!(text, "demo: example channel with gamma = {gamma}");
    let _ = writeln!(
        text,
        "  CPTP {} (residual {:.3e})",
        if cptp.ok { "ok" } else { "violated" },
        cptp.residual
    );
    let _ = writeln!(text, "  ampliate noiseless: {}", verdict(ampliate.holds));
    let _ = writeln!(text, "  normal noiseless: {}", verdict(normal.holds));
    text += &witness_text(&normal.witness).replace("  witness", "    witness");
    let _ = writeln!(text, "  correctable: {}", verdict(correctable.holds));
    let _ = writeln!(
        text,
        "  identity recovery quadruple: {} with sigma = {sigma_text}",
        verdict(quad.holds)
    );
    let _ = writeln!(
        text,
        "  folding recovery (B := B1) quadruple: {}",
        verdict(quad_b1.holds)
    );

    let mut report = Map::new();
    report.insert("command".into(), json!("demo"));
    report.insert("gamma".into(), json!(gamma));
    report.insert("verdict".into(), json!(verdict(expected)));
    report.insert("cptp_residual".into(), json!(cptp.residual));
    report.insert("ampliate".into(), json!(verdict(ampliate.holds)));
    report.insert("normal_noiseless".into(), json!(verdict(normal.holds)));
    report.insert(
        "normal_noiseless_witness".into(),
        witness_json(&normal.witness),
    );
    report.insert("correctable".into(), json!(verdict(correctable.holds)));
    report.insert("identity_quadruple".into(), json!(verdict(quad.holds)));
    report.insert("folded_quadruple_b1".into(), json!(verdict(quad_b1.holds)));
    report.insert(
        "sigma".into(),
        quad.sigma.as_ref().map_or(Value::Null, matrix_json),
    );
    report.insert(
        "max_residual".into(),
        json!(ampliate
            .max_residual
            .max(correctable.max_residual)
            .max(quad.residual)),
    );
    report.insert("lambda_table".into(), lambda_json(&correctable));
    let witness = (!expected).then(|| Witness {
        kind: WitnessKind::OutputMismatch,
        indices: vec![],
        residual: quad.residual,
    });
    report.insert("witness".into(), witness_json(&witness));
    Ok(Outcome {
        code: if expected { 0 } else { 1 },
        report,
        text,
    })
}
