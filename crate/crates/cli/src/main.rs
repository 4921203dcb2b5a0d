mod angle;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use choi_core::error::Error;
use choi_core::family::MapParams;
use choi_core::report::{classify_with_tolerance, spanning_report, ReportDocument};
use choi_core::sweep::{figure_body, figure_p_theta, sweep, write_csv, Plane, DEFAULT_EXTENT};
use choi_core::witness::build_witness;

use angle::parse_angle;

const EXIT_USAGE: u8 = 1;
const EXIT_THETA: u8 = 2;
const EXIT_NO_DETECTION: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "choi", version, about = "Positivity, faces and optimality of the Φ[a,b,c;θ] family")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full classification of Φ[a,b,c;θ].
    Classify {
        a: f64,
        b: f64,
        c: f64,
        #[arg(allow_hyphen_values = true, value_parser = parse_angle)]
        theta: f64,
        #[arg(long)]
        json: bool,
        /// Face membership tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Entanglement witness detecting the edge state with parameters (b, θ).
    Witness {
        #[arg(allow_hyphen_values = true, value_parser = parse_angle)]
        theta: f64,
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha_tilde: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Spanning and co-spanning report for one point.
    Spanning {
        a: f64,
        b: f64,
        c: f64,
        #[arg(allow_hyphen_values = true, value_parser = parse_angle)]
        theta: f64,
        #[arg(long)]
        json: bool,
    },
    /// CSV grid over one parameter plane.
    Sweep {
        #[arg(allow_hyphen_values = true, value_parser = parse_angle)]
        theta: f64,
        grid_n: usize,
        #[arg(long, value_enum, default_value_t = PlaneArg::AbcSimplex)]
        plane: PlaneArg,
        #[arg(long, default_value_t = DEFAULT_EXTENT)]
        extent: f64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV data for figure 1 (p_θ), 2 (the plane a+b+c=p_θ) or 3 (body boundary).
    FigureData {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        figure: u8,
        #[arg(long, default_value = "pi/6", allow_hyphen_values = true, value_parser = parse_angle)]
        theta: f64,
        /// Samples per axis; figure 1 defaults to 1000, the others to 101.
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_EXTENT)]
        extent: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PlaneArg {
    AbcSimplex,
    Ab,
    Ac,
    Bc,
}

impl From<PlaneArg> for Plane {
    fn from(p: PlaneArg) -> Self {
        match p {
            PlaneArg::AbcSimplex => Plane::AbcSimplex,
            PlaneArg::Ab => Plane::Ab,
            PlaneArg::Ac => Plane::Ac,
            PlaneArg::Bc => Plane::Bc,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(io::Error),
    NoDetection(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::ThetaOutOfRange { .. } | Error::UnsupportedTheta { .. }) => EXIT_THETA,
            Failure::Core(Error::NoDetectingChoice { .. }) | Failure::NoDetection(_) => EXIT_NO_DETECTION,
            Failure::Core(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => format!("error: {e}"),
            Failure::Io(e) => format!("error: I/O: {e}"),
            Failure::NoDetection(m) => format!("warning: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Classify { a, b, c, theta, json, tol } => {
            let p = MapParams::new(a, b, c, theta)?;
            let report = classify_with_tolerance(&p, tol)?;
            emit(&ReportDocument::from_classification(&report)?, json)
        }
        Command::Witness {
            theta,
            b,
            alpha_tilde,
            json,
        } => {
            let spec = build_witness(theta, b, alpha_tilde)?;
            emit(&ReportDocument::from_witness(&spec)?, json)?;
            if spec.validation.detects {
                Ok(())
            } else {
                Err(Failure::NoDetection(format!(
                    "positive pairing {:.6e} with the edge state; the witness does not detect it",
                    spec.detection_value
                )))
            }
        }
        Command::Spanning { a, b, c, theta, json } => {
            let p = MapParams::new(a, b, c, theta)?;
            emit(&ReportDocument::from_spanning(&spanning_report(&p)?)?, json)
        }
        Command::Sweep {
            theta,
            grid_n,
            plane,
            extent,
            out,
        } => {
            let rows = sweep(theta, grid_n, plane.into(), extent)?;
            write_rows(&rows, out)
        }
        Command::FigureData {
            figure,
            theta,
            grid_n,
            extent,
            out,
        } => match figure {
            1 => write_rows(&figure_p_theta(grid_n.unwrap_or(1000))?, out),
            2 => write_rows(&sweep(theta, grid_n.unwrap_or(101), Plane::AbcSimplex, extent)?, out),
            _ => write_rows(&figure_body(theta, grid_n.unwrap_or(101), extent)?, out),
        },
    }
}

fn write_rows<T: serde::Serialize>(rows: &[T], out: Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_csv(rows, &mut w)?;
            w.flush()?;
        }
        None => write_csv(rows, io::stdout().lock())?,
    }
    Ok(())
}

fn emit(doc: &ReportDocument, json: bool) -> Result<(), Failure> {
    let text = if json { doc.to_json()? } else { plain(doc) };
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    Ok(())
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(true) => Some("Y".into()),
        Value::Bool(false) => Some("N".into()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Human-readable rendering of the scalar parts of a document.
fn plain(doc: &ReportDocument) -> String {
    let mut lines = Vec::new();
    let kind = serde_json::to_value(doc.kind).ok().and_then(|v| scalar(&v)).unwrap_or_default();
    lines.push(format!("{kind} (schema {})", doc.schema_version));
    if let Some(p) = doc.params {
        lines.push(format!("params: a={} b={} c={} theta={}", p.a, p.b, p.c, p.theta));
    }
    for (title, section) in [("flags", &doc.flags), ("evidence", &doc.evidence)] {
        if let Value::Object(map) = section {
            let entries: Vec<String> = map
                .iter()
                .filter_map(|(k, v)| scalar(v).map(|s| format!("  {k}: {s}")))
                .collect();
            if !entries.is_empty() {
                lines.push(format!("{title}:"));
                lines.extend(entries);
            }
        }
    }
    lines.join("\n")
}
