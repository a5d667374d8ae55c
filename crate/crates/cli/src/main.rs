//! Command-line surface for the incompatibility measures: closed forms,
//! searches, convex bounds, eavesdropping simulation, figure data, and the
//! inequality audit.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use incompat::audit::{has_enforced_violation, run_corpus, Corpus};
use incompat::bounds::{audit_bound, qp_qf_lower, sdp_q_lower, OracleKind, QpVariant};
use incompat::distance::{q_alpha_directional, q_alpha_set, qf_subspace_closed, DistanceKind};
use incompat::eur::{h2_corollary_bound, h2_standard, t2_standard, t2_successive, Method};
use incompat::fidelity::{fmax_ascent, q_measure, q_mub_closed, q_subspace_closed, PovmJson};
use incompat::linalg::{eigenstate_ensemble, mub_bases, subspace_pair, ObservableJson};
use incompat::qkd::simulate_error_rate;
use incompat::{Error, SearchConfig};

use io::{num, Output};

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Usage(String),
    Core(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Usage(_) => 3,
            CliError::Core(Error::DimensionMismatch(_, _)) => 3,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    /// Distinguishability measure Q (accessible fidelity).
    Q,
    /// Fidelity-based disturbance measure.
    Qf,
    /// Total-variation disturbance measure.
    Q1,
    /// Chebyshev disturbance measure.
    Qinf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EurArg {
    T2,
    H2,
    T2succ,
    H2bound,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArg {
    Sdp,
    Qp,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    #[value(name = "as_stated")]
    AsStated,
    #[value(name = "with_factor2")]
    WithFactor2,
    #[value(name = "derivation_matrix")]
    DerivationMatrix,
}

impl VariantArg {
    fn to_variant(self) -> QpVariant {
        match self {
            VariantArg::AsStated => QpVariant::AsStated,
            VariantArg::WithFactor2 => QpVariant::WithFactor2,
            VariantArg::DerivationMatrix => QpVariant::DerivationMatrix,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Fig1,
    Fig2,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusArg {
    #[value(name = "qubit_grid")]
    QubitGrid,
    #[value(name = "mub_set")]
    MubSet,
    #[value(name = "subspace_grid")]
    SubspaceGrid,
    #[value(name = "random")]
    Random,
}

impl CorpusArg {
    fn to_corpus(self) -> Corpus {
        match self {
            CorpusArg::QubitGrid => Corpus::QubitGrid,
            CorpusArg::MubSet => Corpus::MubSet,
            CorpusArg::SubspaceGrid => Corpus::SubspaceGrid,
            CorpusArg::Random => Corpus::Random,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "incompat",
    about = "Incompatibility measures for sets of quantum observables",
    version
)]
struct Cli {
    /// Master seed for all randomized searches.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Number of random restarts per search.
    #[arg(long, global = true, default_value_t = 64)]
    restarts: usize,
    /// Convergence tolerance for the density/POVM searches.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Iteration cap per search run.
    #[arg(long, global = true, default_value_t = 600)]
    max_iters: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form values for a pair of qubit observables at a given angle.
    Qubit {
        /// Bloch-vector inner product 𝑎⃗·𝑏⃗, in [−1, 1].
        #[arg(long)]
        cos_delta: f64,
    },
    /// Closed-form values for N mutually unbiased bases in prime dimension d.
    Mub {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        bases: usize,
        /// Write the constructed bases as observable JSON files here.
        #[arg(long)]
        emit_bases: Option<PathBuf>,
    },
    /// Closed-form values for a pair commuting on a subspace.
    Subspace {
        #[arg(long)]
        dim: usize,
        /// Dimension of the commuting subspace.
        #[arg(long)]
        commuting: usize,
        #[arg(long)]
        emit_bases: Option<PathBuf>,
    },
    /// Evaluate an incompatibility measure on observables from JSON files.
    Measure {
        #[arg(long, value_enum)]
        measure: MeasureArg,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Entropic-uncertainty lower bounds for observables from JSON files.
    Eur {
        #[arg(long, value_enum)]
        kind: EurArg,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Convex-programming bounds with certificates and audit verdicts.
    Bound {
        #[arg(long, value_enum)]
        kind: BoundArg,
        /// Quadratic-program reading; all three are solved when omitted.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Monte-Carlo intercept-resend simulation.
    Qkd {
        /// JSON file {"observables": [...]} defining the signal ensemble.
        #[arg(long)]
        ensemble: PathBuf,
        /// "optimal" (ascent POVM), "none" (untouched channel) or a strategy
        /// JSON file.
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Emit figure data tables.
    Figure {
        #[arg(long, value_enum)]
        name: FigureArg,
        /// Space dimension for fig2.
        #[arg(long, default_value_t = 20)]
        dim: usize,
    },
    /// Run an inequality-audit corpus; exits nonzero iff an enforced
    /// (proved) relation is violated.
    Audit {
        #[arg(long, value_enum)]
        corpus: CorpusArg,
    },
}

fn search_config(cli: &Cli) -> SearchConfig {
    SearchConfig {
        restarts: cli.restarts.max(1),
        seed: cli.seed,
        tol: cli.tol,
        max_iters: cli.max_iters.max(1),
        ..SearchConfig::default()
    }
}

fn method_label(m: Method) -> &'static str {
    match m {
        Method::ClosedForm => "closed_form",
        Method::RestartSearch => "restart_search",
    }
}

fn qubit_record(cos_delta: f64) -> Result<Output, CliError> {
    if !(-1.0..=1.0).contains(&cos_delta) {
        return Err(CliError::Usage(format!(
            "cos_delta {cos_delta} is outside [-1, 1]"
        )));
    }
    let c = cos_delta;
    Ok(Output::Record(vec![
        ("cos_delta".into(), num(c)),
        ("q".into(), num(0.25 * (1.0 - c.abs()))),
        ("q_f".into(), num(0.25 * (1.0 - c * c))),
        ("t2_standard".into(), num(0.25 * (1.0 - c.abs()))),
        ("t2_succ".into(), num(0.25 * (1.0 - c * c))),
        ("h2_bound".into(), num(-(0.75 + 0.25 * c.abs()).log2())),
    ]))
}

fn emit_observables(dir: &PathBuf, observables: &[incompat::Observable]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Parse(format!("{}: {e}", dir.display())))?;
    for (k, obs) in observables.iter().enumerate() {
        let path = dir.join(format!("basis_{k}.json"));
        let json = ObservableJson::from(obs);
        let text = serde_json::to_string_pretty(&json).expect("serializable");
        std::fs::write(&path, text + "\n")
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn mub_record(
    dim: usize,
    bases: usize,
    emit: Option<&PathBuf>,
) -> Result<Output, CliError> {
    let family = mub_bases(dim, bases)?;
    if let Some(dir) = emit {
        emit_observables(dir, &family)?;
    }
    let (n, d) = (bases as f64, dim as f64);
    let qf_pair = if bases == 2 {
        num(0.5 * (1.0 - 1.0 / d))
    } else {
        Value::Null
    };
    Ok(Output::Record(vec![
        ("dim".into(), Value::from(dim)),
        ("bases".into(), Value::from(bases)),
        ("q".into(), num(q_mub_closed(bases, dim))),
        ("q_f_pair".into(), qf_pair),
        ("t2".into(), num((1.0 - 1.0 / n) * (1.0 - 1.0 / d))),
        ("h2_c2".into(), num(-((n + d - 1.0) / (n * d)).log2())),
    ]))
}

fn subspace_record(
    dim: usize,
    commuting: usize,
    emit: Option<&PathBuf>,
) -> Result<Output, CliError> {
    let q = q_subspace_closed(dim, commuting)?;
    let qf = qf_subspace_closed(dim, commuting)?;
    if let Some(dir) = emit {
        let (a, b) = subspace_pair(dim, commuting)?;
        emit_observables(dir, &[a, b])?;
    }
    Ok(Output::Record(vec![
        ("dim".into(), Value::from(dim)),
        ("commuting_dim".into(), Value::from(commuting)),
        ("q".into(), num(q)),
        ("q_f".into(), num(qf)),
    ]))
}

fn measure_record(
    measure: MeasureArg,
    files: &[PathBuf],
    cfg: &SearchConfig,
) -> Result<Output, CliError> {
    let observables = io::load_observables(files)?;
    if observables.len() < 2 {
        return Err(CliError::Usage(
            "at least two observable files are required".into(),
        ));
    }
    match measure {
        MeasureArg::Q => {
            let res = q_measure(&observables, cfg)?;
            Ok(Output::Record(vec![
                ("measure".into(), "q".into()),
                ("value".into(), num(res.q_upper)),
                ("fmax_lower".into(), num(res.fmax_lower)),
                ("method".into(), method_label(res.method).into()),
                (
                    "povm".into(),
                    serde_json::to_value(PovmJson::from(&res.povm)).expect("serializable"),
                ),
            ]))
        }
        _ => {
            let kind = match measure {
                MeasureArg::Qf => DistanceKind::Fidelity,
                MeasureArg::Q1 => DistanceKind::One,
                MeasureArg::Qinf => DistanceKind::Infinity,
                MeasureArg::Q => unreachable!(),
            };
            if observables.len() == 2 {
                let ab = q_alpha_directional(&observables[0], &observables[1], kind, cfg)?;
                let ba = q_alpha_directional(&observables[1], &observables[0], kind, cfg)?;
                Ok(Output::Record(vec![
                    ("measure".into(), kind.label().into()),
                    ("value".into(), num(0.25 * (ab.value + ba.value))),
                    ("a_to_b".into(), num(ab.value)),
                    ("b_to_a".into(), num(ba.value)),
                    ("method".into(), method_label(ab.method).into()),
                    ("maximizer_rank_a_to_b".into(), Value::from(ab.maximizer_rank)),
                    ("maximizer_rank_b_to_a".into(), Value::from(ba.maximizer_rank)),
                    ("maximizer_a_to_b".into(), io::density_json(&ab.maximizer)),
                    ("maximizer_b_to_a".into(), io::density_json(&ba.maximizer)),
                ]))
            } else {
                let value = q_alpha_set(&observables, kind, cfg)?;
                Ok(Output::Record(vec![
                    ("measure".into(), kind.label().into()),
                    ("value".into(), num(value)),
                ]))
            }
        }
    }
}

fn eur_record(kind: EurArg, files: &[PathBuf], cfg: &SearchConfig) -> Result<Output, CliError> {
    let observables = io::load_observables(files)?;
    if observables.is_empty() {
        return Err(CliError::Usage("at least one observable file is required".into()));
    }
    match kind {
        EurArg::T2 | EurArg::H2 => {
            let res = match kind {
                EurArg::T2 => t2_standard(&observables, cfg)?,
                _ => h2_standard(&observables, cfg)?,
            };
            Ok(Output::Record(vec![
                (
                    "kind".into(),
                    if matches!(kind, EurArg::T2) { "t2" } else { "h2" }.into(),
                ),
                ("value".into(), num(res.value)),
                ("method".into(), method_label(res.method).into()),
                ("entropy_spread".into(), num(res.entropy_spread)),
            ]))
        }
        EurArg::T2succ => {
            if observables.len() != 2 {
                return Err(CliError::Usage(
                    "t2succ needs exactly two observable files".into(),
                ));
            }
            let ab = t2_successive(&observables[0], &observables[1])?;
            let ba = t2_successive(&observables[1], &observables[0])?;
            Ok(Output::Record(vec![
                ("kind".into(), "t2succ".into()),
                ("a_to_b".into(), num(ab)),
                ("b_to_a".into(), num(ba)),
                ("avg".into(), num(0.5 * (ab + ba))),
            ]))
        }
        EurArg::H2bound => {
            let c2 = h2_standard(&observables, cfg)?;
            let bound = h2_corollary_bound(&observables, cfg)?;
            Ok(Output::Record(vec![
                ("kind".into(), "h2bound".into()),
                ("c2".into(), num(c2.value)),
                ("value".into(), num(bound)),
                ("entropy_spread".into(), num(c2.entropy_spread)),
            ]))
        }
    }
}

fn bound_record(
    kind: BoundArg,
    variant: Option<VariantArg>,
    files: &[PathBuf],
    cfg: &SearchConfig,
) -> Result<Output, CliError> {
    let observables = io::load_observables(files)?;
    if observables.len() < 2 {
        return Err(CliError::Usage(
            "at least two observable files are required".into(),
        ));
    }
    match kind {
        BoundArg::Sdp => {
            let ensemble = eigenstate_ensemble(&observables)?;
            let report = sdp_q_lower(&ensemble)?;
            // oracle for Q: closed form when the family is recognized,
            // otherwise the ascent upper estimate
            let q_ref = q_measure(&observables, cfg)?;
            let oracle_kind = match q_ref.method {
                Method::ClosedForm => OracleKind::ClosedForm,
                Method::RestartSearch => OracleKind::BruteForceLowerEstimate,
            };
            let audited = audit_bound(report, q_ref.q_upper, oracle_kind);
            Ok(Output::Record(vec![
                ("kind".into(), "sdp".into()),
                ("q_lower".into(), num(audited.claimed_lower_bound())),
                ("report".into(), audited.to_json()),
            ]))
        }
        BoundArg::Qp => {
            if observables.len() != 2 {
                return Err(CliError::Usage(
                    "the quadratic-program bound needs exactly two observable files".into(),
                ));
            }
            let variants: Vec<QpVariant> = match variant {
                Some(v) => vec![v.to_variant()],
                None => QpVariant::all().to_vec(),
            };
            let oracle = q_alpha_directional(
                &observables[0],
                &observables[1],
                DistanceKind::Fidelity,
                cfg,
            )?;
            let oracle_kind = match oracle.method {
                Method::ClosedForm => OracleKind::ClosedForm,
                Method::RestartSearch => OracleKind::BruteForceLowerEstimate,
            };
            let mut reports = Vec::new();
            for v in variants {
                let report = qp_qf_lower(&observables[0], &observables[1], v)?;
                reports.push(audit_bound(report, oracle.value, oracle_kind).to_json());
            }
            Ok(Output::Record(vec![
                ("kind".into(), "qp".into()),
                ("oracle".into(), num(oracle.value)),
                ("reports".into(), Value::Array(reports)),
            ]))
        }
    }
}

fn qkd_record(
    ensemble_path: &PathBuf,
    strategy: &str,
    trials: u64,
    cfg: &SearchConfig,
) -> Result<Output, CliError> {
    let json: io::EnsembleJson = io::read_json(ensemble_path)?;
    let observables = json
        .observables
        .iter()
        .map(|o| incompat::Observable::try_from(o).map_err(CliError::Core))
        .collect::<Result<Vec<_>, _>>()?;
    let ensemble = eigenstate_ensemble(&observables)?;
    let eve = match strategy {
        "none" => None,
        "optimal" => {
            let ascent = fmax_ascent(&ensemble, cfg)?;
            Some(incompat::qkd::EveStrategy::optimal_for(
                ascent.povm, &ensemble,
            )?)
        }
        path => Some(io::load_strategy(std::path::Path::new(path), &ensemble)?),
    };
    let sim = simulate_error_rate(&observables, eve.as_ref(), trials, cfg.seed)?;
    Ok(Output::Record(vec![
        ("trials".into(), Value::from(sim.trials)),
        ("empirical_error".into(), num(sim.empirical_error)),
        ("std_error".into(), num(sim.std_error)),
        ("analytic_error".into(), num(sim.analytic_error)),
    ]))
}

fn figure_table(name: FigureArg, dim: usize) -> Result<Output, CliError> {
    let columns = vec!["x".to_string(), "q".to_string(), "q_f".to_string()];
    let rows = match name {
        FigureArg::Fig1 => (0..=100)
            .map(|i| {
                let c = i as f64 / 100.0;
                vec![num(c), num(0.25 * (1.0 - c)), num(0.25 * (1.0 - c * c))]
            })
            .collect(),
        FigureArg::Fig2 => (0..dim)
            .map(|d_c| {
                let q = q_subspace_closed(dim, d_c).expect("d_c < dim");
                let qf = qf_subspace_closed(dim, d_c).expect("d_c < dim");
                vec![Value::from(d_c), num(q), num(qf)]
            })
            .collect(),
    };
    Ok(Output::Table { columns, rows })
}

fn audit_table(corpus: Corpus, cfg: &SearchConfig) -> Result<(Output, bool), CliError> {
    let rows = run_corpus(corpus, cfg)?;
    let failed = has_enforced_violation(&rows);
    let columns = vec![
        "instance".to_string(),
        "inequality".to_string(),
        "lhs".to_string(),
        "rhs".to_string(),
        "verdict".to_string(),
        "enforced".to_string(),
    ];
    let table = rows
        .iter()
        .map(|r| {
            vec![
                Value::String(r.instance.clone()),
                Value::String(r.inequality.clone()),
                num(r.lhs),
                num(r.rhs),
                Value::String(r.verdict.label().to_string()),
                Value::Bool(r.enforced),
            ]
        })
        .collect();
    Ok((
        Output::Table {
            columns,
            rows: table,
        },
        failed,
    ))
}

fn write_output(cli: &Cli, output: &Output) -> Result<(), CliError> {
    let text = match cli.format {
        Format::Json => output.to_json(),
        Format::Csv => output.to_csv(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = search_config(cli);
    let (output, exit) = match &cli.command {
        Command::Qubit { cos_delta } => (qubit_record(*cos_delta)?, ExitCode::SUCCESS),
        Command::Mub {
            dim,
            bases,
            emit_bases,
        } => (mub_record(*dim, *bases, emit_bases.as_ref())?, ExitCode::SUCCESS),
        Command::Subspace {
            dim,
            commuting,
            emit_bases,
        } => (
            subspace_record(*dim, *commuting, emit_bases.as_ref())?,
            ExitCode::SUCCESS,
        ),
        Command::Measure { measure, files } => {
            (measure_record(*measure, files, &cfg)?, ExitCode::SUCCESS)
        }
        Command::Eur { kind, files } => (eur_record(*kind, files, &cfg)?, ExitCode::SUCCESS),
        Command::Bound {
            kind,
            variant,
            files,
        } => (
            bound_record(*kind, *variant, files, &cfg)?,
            ExitCode::SUCCESS,
        ),
        Command::Qkd {
            ensemble,
            strategy,
            trials,
        } => (qkd_record(ensemble, strategy, *trials, &cfg)?, ExitCode::SUCCESS),
        Command::Figure { name, dim } => (figure_table(*name, *dim)?, ExitCode::SUCCESS),
        Command::Audit { corpus } => {
            let (table, failed) = audit_table(corpus.to_corpus(), &cfg)?;
            (
                table,
                if failed {
                    ExitCode::from(1)
                } else {
                    ExitCode::SUCCESS
                },
            )
        }
    };
    write_output(cli, &output)?;
    Ok(exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
