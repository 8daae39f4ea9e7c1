use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use compack_cli::{parse_certificate, render_svg, write_certificate, FormatError, LimitReportFile};
use compack_core::scalar::{format_fraction, parse_rational, Measure};
use compack_core::{
    brick_limit, extract_convergent_subsequence, fixtures, pack_moser_rectangles,
    pack_moser_squares, shrink_search, Certificate, CollectionKind, Error, PackingMode,
    PackingSequence, Rational, VerificationReport,
};

const EXIT_INVALID: u8 = 1;
const EXIT_DIVERGENCE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_PARSE: u8 = 65;

#[derive(Parser)]
#[command(name = "compack", version, about = "Build, verify and take limits of packing certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Rectangles,
    Squares,
}

impl Kind {
    fn collection(self) -> CollectionKind {
        match self {
            Kind::Rectangles => CollectionKind::MoserRectangles,
            Kind::Squares => CollectionKind::MoserSquares,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    General,
    Oriented,
    Translated,
}

impl From<ModeArg> for PackingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::General => PackingMode::General,
            ModeArg::Oriented => PackingMode::Oriented,
            ModeArg::Translated => PackingMode::Translated,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureName {
    /// Four unit squares in shrinking homothets of [0,2]^2, float, dyadic steps.
    HomothetFloat,
    /// The same with exact offsets that vanish halfway through.
    HomothetExact,
    /// A unit square escaping along homothets of the funnel.
    Funnel,
    /// The limit tiling of [0,2]^2 by four unit squares.
    Tiling,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Pack a Moser collection with the guillotine packer.
    Pack {
        kind: Kind,
        /// Last piece index N.
        #[arg(short = 'n', long)]
        count: usize,
        /// Square side (rectangles) or strip width (squares); p/q or decimal.
        #[arg(long, value_parser = rational_arg)]
        param: Rational,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a certificate file.
    Verify {
        path: PathBuf,
        #[arg(long)]
        mode_override: Option<ModeArg>,
    },
    /// Extract a convergent subsequence and verify its limit.
    Limit {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 10)]
        min_keep: usize,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to `<out>.report.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Draw a planar certificate as SVG.
    Render {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the limit brick of a CSV of brick dimensions, one brick per row.
    BrickLimit {
        csv: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        window: u64,
    },
    /// Bisect for the smallest container the packer fills.
    Shrink {
        kind: Kind,
        #[arg(short = 'n', long)]
        count: usize,
        #[arg(long, value_parser = rational_arg)]
        lo: Rational,
        #[arg(long, value_parser = rational_arg)]
        hi: Rational,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a reference certificate sequence into a directory.
    Fixture {
        name: FixtureName,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    Invalid(String),
    Divergence(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Divergence(_) => EXIT_DIVERGENCE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Invalid(m) | Failure::Divergence(m) => m,
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Parse(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Certificate, Failure> {
    parse_certificate(&read(path)?)
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn coverage_text(c: &Option<Measure>) -> String {
    match c {
        Some(Measure::Exact(r)) => r.to_string(),
        Some(Measure::Approx(v)) => format!("{v}"),
        None => "none".to_string(),
    }
}

fn report_lines(report: &VerificationReport) -> Vec<String> {
    let mut lines = vec![format!(
        "{} coverage={}",
        report.verdict.name(),
        coverage_text(&report.coverage)
    )];
    lines.extend(report.violations.iter().map(ToString::to_string));
    lines.extend(report.marginal.iter().map(|v| format!("marginal {v}")));
    if report.partial {
        lines.push("partial".to_string());
    }
    lines
}

fn pack(kind: Kind, count: usize, param: &Rational, out: &Path) -> Result<u8, Failure> {
    let packed = match kind {
        Kind::Rectangles => pack_moser_rectangles(count, param),
        Kind::Squares => pack_moser_squares(count, param),
    };
    let cert = match packed {
        Ok(c) => c,
        Err(Error::Capacity { index }) => {
            return Err(Failure::Invalid(format!("capacity: piece {index} does not fit")))
        }
        Err(e @ (Error::IndexOutOfRange { .. } | Error::InvalidTarget(_))) => {
            return Err(Failure::Usage(e.to_string()))
        }
        Err(e) => return Err(Failure::Invalid(e.to_string())),
    };
    let report = compack_core::verify_packing(&cert).map_err(|e| Failure::Invalid(e.to_string()))?;
    write(out, &write_certificate(&Certificate::Exact(cert)))?;
    let coverage = report.coverage.clone().expect("bounded target");
    println!("coverage={} ({:.6})", coverage_text(&Some(coverage.clone())), coverage.to_f64());
    Ok(0)
}

fn verify(path: &Path, mode: Option<ModeArg>) -> Result<u8, Failure> {
    let mut cert = load(path)?;
    if let Some(m) = mode {
        cert = cert.with_mode(m.into());
    }
    let report = cert.verify().map_err(|e| Failure::Usage(e.to_string()))?;
    for line in report_lines(&report) {
        println!("{line}");
    }
    Ok(if report.is_valid() { 0 } else { EXIT_INVALID })
}

fn sequence_error(e: Error) -> Failure {
    match e {
        Error::Divergence { .. } => Failure::Divergence(e.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

fn limit(
    paths: &[PathBuf],
    tol: f64,
    min_keep: usize,
    out: &Path,
    report_path: Option<&Path>,
) -> Result<u8, Failure> {
    let certs = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let report = if certs.iter().all(Certificate::is_exact) {
        let entries = certs
            .into_iter()
            .map(|c| match c {
                Certificate::Exact(c) => c,
                Certificate::Float(_) => unreachable!("all exact"),
            })
            .collect();
        let seq = PackingSequence::new(entries).map_err(sequence_error)?;
        extract_convergent_subsequence(&seq, tol, min_keep)
    } else {
        let seq = PackingSequence::new(certs.iter().map(Certificate::to_f64).collect())
            .map_err(sequence_error)?;
        extract_convergent_subsequence(&seq, tol, min_keep)
    }
    .map_err(sequence_error)?;

    write(out, &write_certificate(&report.limit))?;
    let default_report = PathBuf::from(format!("{}.report.json", out.display()));
    let report_path = report_path.unwrap_or(&default_report);
    write(report_path, &LimitReportFile::from_report(&report).to_json())?;
    println!(
        "kept={} cluster_diameter={:e} certified_slack={:e}",
        report.kept_indices.len(),
        report.cluster_diameter,
        report.certified_slack
    );
    for line in report_lines(&report.verdict) {
        println!("{line}");
    }
    Ok(if report.verdict.is_valid() { 0 } else { EXIT_INVALID })
}

fn render(path: &Path, out: &Path) -> Result<u8, Failure> {
    let cert = load(path)?;
    let svg = render_svg(&cert).map_err(|e| Failure::Usage(e.to_string()))?;
    write(out, &svg)?;
    Ok(0)
}

fn tuple(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn brick_limit_cmd(csv_path: &Path, window: usize) -> Result<u8, Failure> {
    let text = read(csv_path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::Parse(format!("{}: {e}", csv_path.display())))?;
        let row = record
            .iter()
            .map(parse_rational)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Parse(format!("row {}: {e}", k + 1)))?;
        rows.push(row);
    }
    let b = brick_limit(&rows, window).map_err(|e| Failure::Parse(e.to_string()))?;
    println!("V={}", b.volume);
    println!("b={}", tuple(&b.dims));
    println!("window={} monotone={}", b.window, b.monotone_len);
    if let Some(shrink) = &b.tail_shrink {
        println!("tail_shrink={}", tuple(shrink));
    }
    if b.product_exceeds_volume {
        println!("note: prod(b) > V");
    }
    Ok(0)
}

fn shrink(
    kind: Kind,
    count: usize,
    lo: &Rational,
    hi: &Rational,
    steps: usize,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let outcome = shrink_search(kind.collection(), count, lo, hi, steps).map_err(|e| match e {
        Error::InfeasibleAtHi { index } => {
            Failure::Invalid(format!("infeasible at hi: piece {index} does not fit"))
        }
        other => Failure::Usage(other.to_string()),
    })?;
    if let Some(path) = out {
        write(path, &write_certificate(&Certificate::Exact(outcome.certificate.clone())))?;
    }
    println!(
        "parameter={} ({:.9}) epsilon={:e} iterations={}",
        format_fraction(&outcome.parameter),
        compack_core::Scalar::to_f64(&outcome.parameter),
        outcome.epsilon,
        outcome.iterations
    );
    Ok(0)
}

fn fixture(name: FixtureName, count: usize, dir: &Path) -> Result<u8, Failure> {
    let certs: Vec<Certificate> = match name {
        FixtureName::HomothetFloat => fixtures::shrinking_homothet_float(count)
            .into_iter()
            .map(Certificate::Float)
            .collect(),
        FixtureName::HomothetExact => fixtures::shrinking_homothet_exact(count)
            .into_iter()
            .map(Certificate::Exact)
            .collect(),
        FixtureName::Funnel => fixtures::funnel_escape(count).into_iter().map(Certificate::Exact).collect(),
        FixtureName::Tiling => vec![Certificate::Exact(fixtures::two_by_two_tiling())],
    };
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let stem = name.to_possible_value().expect("named").get_name().to_string();
    for (k, cert) in certs.iter().enumerate() {
        write(&dir.join(format!("{stem}-{:03}.json", k + 1)), &write_certificate(cert))?;
    }
    println!("wrote {} certificates to {}", certs.len(), dir.display());
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Pack { kind, count, param, out } => pack(kind, count, &param, &out),
        Command::Verify { path, mode_override } => verify(&path, mode_override),
        Command::Limit { paths, tol, min_keep, out, report } => {
            limit(&paths, tol, min_keep, &out, report.as_deref())
        }
        Command::Render { path, out } => render(&path, &out),
        Command::BrickLimit { csv, window } => brick_limit_cmd(&csv, window as usize),
        Command::Shrink { kind, count, lo, hi, steps, out } => {
            shrink(kind, count, &lo, &hi, steps, out.as_deref())
        }
        Command::Fixture { name, count, dir } => fixture(name, count, &dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
