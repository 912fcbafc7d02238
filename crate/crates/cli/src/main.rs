//! Batch front end: each subcommand reads one JSON request (or takes its
//! parameters on the command line), runs the corresponding computation, and
//! prints one report. Output is byte-identical for identical inputs and
//! seed; errors print a machine-readable diagnostic on stderr and select
//! the exit status by failure category.

use std::fmt::Write as _;
use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semple_core::io as schema;
use semple_core::{
    analyze_branch, build_tower, chart_kind_label, curve_characteristics, curve_module,
    emit_formula, exact_rank, lemma_b_sweep, proto_contact, universal_matrix, BranchError,
    BranchSeries, ChartSpec, ContactError, ContactModule, CurveCharacteristics, FactorTag, IoError,
    JetError, LemmaStatement, LiftReport, PairingMatrix, ProtoContactResult, RingError, SweepCase,
    SymbolicCurve, DEFAULT_SEED,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "semple",
    version,
    about = "Exact contact calculus for plane curves: pairing tables, contact \
             counts, branch lifting, and operator identity sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Read the JSON request from this file instead of standard input.
    #[arg(long, global = true, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Output format; latex is available from the formula subcommand only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for the randomized point choices in verify.
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Highest tower level explored when lifting branches.
    #[arg(long, global = true, value_name = "N", default_value_t = 6)]
    max_level: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Print the intersection pairing table and divisor relation checks.
    Ring {
        /// Tower level, at least 1.
        level: u32,
    },
    /// Print the contact module of one curve at the requested weight.
    Module,
    /// Evaluate a contact count for a list of curves against a family.
    Contact,
    /// Lift a branch or a whole curve and report singularity invariants.
    Lift,
    /// Run the operator identity and matrix rank sweeps, reporting TAP.
    Verify,
    /// Expand a contact count symbolically over labeled curves.
    Formula,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Latex,
}

/// A failure routed to stderr, categorized for the exit status.
enum Failure {
    Input(String),
    Internal(String),
    Precision(String),
}

impl Failure {
    fn category(&self) -> &'static str {
        match self {
            Failure::Input(_) => "input",
            Failure::Internal(_) => "internal",
            Failure::Precision(_) => "precision",
        }
    }

    fn exit(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Internal(_) => 2,
            Failure::Precision(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Internal(m) | Failure::Precision(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(err: IoError) -> Self {
        match &err {
            IoError::Branch(BranchError::PrecisionExhausted { .. }) => {
                Failure::Precision(err.to_string())
            }
            _ => Failure::Input(err.to_string()),
        }
    }
}

impl From<BranchError> for Failure {
    fn from(err: BranchError) -> Self {
        match err {
            BranchError::PrecisionExhausted { .. } => Failure::Precision(err.to_string()),
            _ => Failure::Input(err.to_string()),
        }
    }
}

impl From<ContactError> for Failure {
    fn from(err: ContactError) -> Self {
        Failure::Input(err.to_string())
    }
}

impl From<RingError> for Failure {
    fn from(err: RingError) -> Self {
        Failure::Internal(err.to_string())
    }
}

impl From<JetError> for Failure {
    fn from(err: JetError) -> Self {
        Failure::Internal(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let diagnostic = json!({
                "error": {
                    "category": failure.category(),
                    "message": failure.message(),
                }
            });
            eprintln!("{diagnostic}");
            ExitCode::from(failure.exit())
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    if cli.format == Format::Latex && !matches!(cli.command, Command::Formula) {
        return Err(Failure::Input(
            "latex output is available from the formula subcommand only".to_string(),
        ));
    }
    match &cli.command {
        Command::Ring { level } => run_ring(*level, cli.format),
        Command::Module => run_module(&read_request(cli)?, cli.format),
        Command::Contact => run_contact(&read_request(cli)?, cli.format),
        Command::Lift => run_lift(&read_request(cli)?, cli.format, cli.max_level),
        Command::Verify => run_verify(cli.seed),
        Command::Formula => run_formula(&read_request(cli)?, cli.format),
    }
}

fn read_request(cli: &Cli) -> Result<String, Failure> {
    match &cli.input {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|err| Failure::Input(format!("cannot read {}: {err}", path.display()))),
        None => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|err| Failure::Input(format!("cannot read standard input: {err}")))?;
            Ok(text)
        }
    }
}

fn json_line(value: &serde_json::Value) -> String {
    let mut line = value.to_string();
    line.push('\n');
    line
}

fn run_ring(level: u32, format: Format) -> Result<String, Failure> {
    if level < 1 {
        return Err(Failure::Input("tower level must be at least 1".to_string()));
    }
    let tower = build_tower(level);
    let matrix = tower.pairing_matrix()?;
    let mut relations = Vec::new();
    for k in 2..=level {
        relations.push((k, tower.theorem1_check(k)?));
    }
    match format {
        Format::Json => Ok(json_line(&json!({
            "pairing": schema::pairing_matrix_json(&matrix),
            "relations": relations
                .iter()
                .map(|&(k, holds)| json!({ "k": k, "holds": holds }))
                .collect::<Vec<_>>(),
        }))),
        Format::Text => Ok(render_ring_text(&matrix, &relations)),
        Format::Latex => unreachable!("gated in run"),
    }
}

fn render_ring_text(matrix: &PairingMatrix, relations: &[(u32, bool)]) -> String {
    let mut out = format!("intersection pairing at level {}\n", matrix.level);
    out.push_str(&format!("columns: {}\n", matrix.column_labels.join(", ")));
    let cells: Vec<Vec<String>> = matrix
        .entries
        .iter()
        .map(|row| row.iter().map(BigInt::to_string).collect())
        .collect();
    let label_width = matrix.row_labels.iter().map(String::len).max().unwrap_or(0);
    let mut widths = vec![0usize; matrix.column_labels.len()];
    for row in &cells {
        for (c, cell) in row.iter().enumerate() {
            widths[c] = widths[c].max(cell.len());
        }
    }
    for (label, row) in matrix.row_labels.iter().zip(&cells) {
        let _ = write!(out, "{label:<label_width$}");
        for (c, cell) in row.iter().enumerate() {
            let _ = write!(out, "  {cell:>width$}", width = widths[c]);
        }
        out.push('\n');
    }
    if !relations.is_empty() {
        let rendered: Vec<String> = relations
            .iter()
            .map(|&(k, holds)| format!("i{k} {}", if holds { "ok" } else { "violated" }))
            .collect();
        out.push_str(&format!(
            "divisor square relations: {}\n",
            rendered.join(", ")
        ));
    }
    out
}

fn run_module(text: &str, format: Format) -> Result<String, Failure> {
    let request: schema::ModuleRequest = serde_json::from_str(text).map_err(IoError::from)?;
    let curve = request.curve.to_characteristics(0, request.order + 1)?;
    let module = curve_module(&curve, request.order);
    match format {
        Format::Json => Ok(json_line(&schema::module_json(&module))),
        Format::Text => Ok(render_module_text(&module)),
        Format::Latex => unreachable!("gated in run"),
    }
}

fn render_module_text(module: &ContactModule) -> String {
    let terms: Vec<String> = module
        .terms()
        .into_iter()
        .map(|(kind, coeff)| {
            let tag = FactorTag {
                weight: module.weight,
                kind,
            };
            format!("{coeff}*{}", tag.code())
        })
        .collect();
    format!("weight {}: {}\n", module.weight, terms.join(" + "))
}

fn run_contact(text: &str, format: Format) -> Result<String, Failure> {
    let request: schema::ContactRequest = serde_json::from_str(text).map_err(IoError::from)?;
    if request.curves.len() != request.orders.len() {
        return Err(ContactError::LengthMismatch {
            curves: request.curves.len(),
            orders: request.orders.len(),
        }
        .into());
    }
    let mut curves: Vec<CurveCharacteristics> = Vec::with_capacity(request.curves.len());
    for (index, curve) in request.curves.iter().enumerate() {
        curves.push(curve.to_characteristics(index, request.orders[index])?);
    }
    let family = request.family.to_characteristics()?;
    let result = proto_contact(&curves, &request.orders, &family)?;
    match format {
        Format::Json => Ok(json_line(&schema::contact_result_json(&result))),
        Format::Text => Ok(render_contact_text(&result)),
        Format::Latex => unreachable!("gated in run"),
    }
}

fn render_contact_text(result: &ProtoContactResult) -> String {
    let mut out = format!("total: {}\n", result.total);
    for (monomial, coeff, value) in &result.expansion {
        let _ = writeln!(
            out,
            "  {}: coefficient {coeff}, value {value}",
            monomial.canonical_key()
        );
    }
    for warning in &result.hypothesis_warnings {
        let _ = writeln!(out, "warning: {warning}");
    }
    out
}

fn run_lift(text: &str, format: Format, max_level: u32) -> Result<String, Failure> {
    match schema::LiftRequest::parse(text)? {
        schema::LiftRequest::Branch(input) => {
            let branch = input.to_series()?;
            let report = analyze_branch(&branch, max_level)?;
            match format {
                Format::Json => Ok(json_line(&schema::lift_report_json(&report))),
                Format::Text => Ok(render_lift_text(&report)),
                Format::Latex => unreachable!("gated in run"),
            }
        }
        schema::LiftRequest::Curve(request) => {
            let mut branches: Vec<BranchSeries> = Vec::with_capacity(request.branches.len());
            for input in &request.branches {
                branches.push(input.to_series()?);
            }
            let curve = curve_characteristics(&branches, request.degree, request.class, max_level)?;
            match format {
                Format::Json => Ok(json_line(&schema::curve_characteristics_json(&curve))),
                Format::Text => Ok(render_curve_text(&curve)),
                Format::Latex => unreachable!("gated in run"),
            }
        }
    }
}

fn render_lift_text(report: &LiftReport) -> String {
    let mut out = String::new();
    if report.kappa.is_empty() {
        out.push_str("kappa: none\n");
    } else {
        let pairs: Vec<String> = report
            .kappa
            .iter()
            .map(|(j, count)| format!("{j}:{count}"))
            .collect();
        let _ = writeln!(out, "kappa: {}", pairs.join(", "));
    }
    if report.infinity_hits.is_empty() {
        out.push_str("infinity hits: none\n");
    } else {
        let levels: Vec<String> = report.infinity_hits.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "infinity hits: {}", levels.join(", "));
    }
    let _ = writeln!(out, "profound: {}", report.profound);
    let _ = writeln!(out, "flat: {}", report.flat);
    let _ = writeln!(out, "smooth: {}", report.smooth);
    out.push_str("trace:\n");
    for entry in &report.trace {
        let mut line = format!(
            "  level {}: {}",
            entry.level,
            chart_kind_label(&entry.chart)
        );
        if let Some(v) = entry.valuation {
            let _ = write!(line, ", valuation {v}");
        }
        if let Some(m) = entry.hit_multiplicity {
            let _ = write!(line, ", hit multiplicity {m}");
        }
        let _ = writeln!(out, "{line}");
    }
    out
}

fn render_curve_text(curve: &CurveCharacteristics) -> String {
    let mut out = format!("degree: {}\nclass: {}\n", curve.degree, curve.class_number);
    if curve.cusps.is_empty() {
        out.push_str("kappa: none\n");
    } else {
        let pairs: Vec<String> = curve
            .cusps
            .iter()
            .map(|(j, count)| format!("{j}:{count}"))
            .collect();
        let _ = writeln!(out, "kappa: {}", pairs.join(", "));
    }
    let _ = writeln!(out, "profound: {}", curve.has_profound_cusp);
    let _ = writeln!(out, "flat: {}", curve.has_flat_cusp);
    out
}

fn run_formula(text: &str, format: Format) -> Result<String, Failure> {
    let request: schema::FormulaRequest = serde_json::from_str(text).map_err(IoError::from)?;
    let curves: Vec<SymbolicCurve> = request
        .curves
        .iter()
        .map(|label| SymbolicCurve {
            label: label.clone(),
        })
        .collect();
    let texts = emit_formula(&curves, &request.orders)?;
    match format {
        Format::Json => Ok(json_line(&json!({
            "plain": texts.plain,
            "latex": texts.latex,
        }))),
        Format::Text => Ok(format!("{}\n", texts.plain)),
        Format::Latex => Ok(format!("{}\n", texts.latex)),
    }
}

/// Sort key for sweep cases: chart tuple, then statement family, then the
/// statement's own parameters.
fn sweep_key(case: &SweepCase) -> (u32, u32, u8, u32, u32, u32, u32) {
    let (rank, a, b, c, d) = match case.statement {
        LemmaStatement::PowerAnnihilation { k, i } => (0u8, k, i, 0, 0),
        LemmaStatement::SubstitutionRecursion { i, m } => (1, i, m, 0, 0),
        LemmaStatement::JetCoefficientRemainder { h, i } => (2, h, i, 0, 0),
        LemmaStatement::DerivedAnnihilation { h, i } => (3, h, i, 0, 0),
        LemmaStatement::ProductShift { h, i, alpha, beta } => (4, h, i, alpha, beta),
        LemmaStatement::MixedAnnihilation { k, h, i } => (5, k, h, i, 0),
        LemmaStatement::TopMixedAnnihilation { k, i } => (6, k, i, 0, 0),
    };
    (case.j, case.tail, rank, a, b, c, d)
}

fn random_point(rng: &mut ChaCha8Rng, arity: usize) -> Vec<BigRational> {
    (0..arity)
        .map(|_| {
            BigRational::new(
                BigInt::from(rng.random_range(-9..=9i64)),
                BigInt::from(rng.random_range(1..=9i64)),
            )
        })
        .collect()
}

fn nonzero_rational(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let q = BigRational::new(
            BigInt::from(rng.random_range(-9..=9i64)),
            BigInt::from(rng.random_range(1..=9i64)),
        );
        if !q.is_zero() {
            return q;
        }
    }
}

fn run_verify(seed: u64) -> Result<String, Failure> {
    let mut lines: Vec<(String, bool)> = Vec::new();

    let mut cases = lemma_b_sweep(3, 3, 5, 5)?;
    cases.sort_by_key(sweep_key);
    for case in &cases {
        let mut description = format!(
            "operator j={} tail={} {}",
            case.j,
            case.tail,
            case.statement.label()
        );
        if let Some(witness) = &case.outcome.positive_witness {
            let _ = write!(description, " witness={witness}");
        }
        lines.push((description, case.outcome.holds));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=4u32 {
        let chart = ChartSpec::primary(n)?;
        for p in 1..=3u32 {
            let point = random_point(&mut rng, chart.arity());
            let matrix = universal_matrix(&chart, n, &point, false)?;
            let rank = exact_rank(&matrix);
            let want = n as usize + 1;
            lines.push((
                format!("rank primary n={n} point={p} rank={rank} expected={want}"),
                rank == want,
            ));
        }
        // The incidence rank claim on a divisor at infinity needs the
        // second derivative coordinate, so only charts with one qualify.
        for j in 2..=n.saturating_sub(1) {
            let chart = ChartSpec::secondary(n, j)?;
            for p in 1..=3u32 {
                let mut point = random_point(&mut rng, chart.arity());
                point[chart.x_index(1).expect("chart has x'")] = BigRational::zero();
                point[chart.x_index(2).expect("chart has x''")] = nonzero_rational(&mut rng);
                let matrix = universal_matrix(&chart, n, &point, false)?;
                let rank = exact_rank(&matrix);
                let want = n as usize + 1;
                lines.push((
                    format!("rank secondary n={n} j={j} point={p} rank={rank} expected={want}"),
                    rank == want,
                ));
            }
        }
    }

    for n in 1..=4u32 {
        let chart = ChartSpec::primary(n)?;
        let point = random_point(&mut rng, chart.arity());
        let matrix = universal_matrix(&chart, n, &point, false)?;
        let labels: Vec<String> = (0..=n).map(|u| format!("a_{u}_0")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let det = matrix.submatrix(&refs)?.determinant();
        let mut want = BigRational::one();
        for k in 2..=i64::from(n) {
            for m in 1..=k {
                want *= BigRational::from_integer(m.into());
            }
        }
        lines.push((
            format!("det derivative-block n={n} det={det} expected={want}"),
            det == want,
        ));
    }

    let mut out = format!("1..{}\n", lines.len());
    let mut all_ok = true;
    for (number, (description, ok)) in lines.iter().enumerate() {
        all_ok &= *ok;
        let _ = writeln!(
            out,
            "{} {} - {description}",
            if *ok { "ok" } else { "not ok" },
            number + 1
        );
    }
    if all_ok {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure::Internal(
            "verify sweep reported failing cases".to_string(),
        ))
    }
}
