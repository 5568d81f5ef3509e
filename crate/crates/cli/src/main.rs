//! `helix-mobius`: command-line runner for the helix Möbius energy numerics.

mod table;
mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use helix_mobius::contour::{arc_integral, closed_contour_check, side_integral};
use helix_mobius::curve::{mobius_gradient_field, pointwise_energy, Curve, SampledCurve};
use helix_mobius::quadrature::integrate_density;
use helix_mobius::residue::{approx_series, residue_series};
use helix_mobius::roots::{curve_oracle, refine_roots};
use helix_mobius::{asymptotic_report, EnergyEstimate, Error, Pitch, SeriesResult};
use rayon::prelude::*;
use serde_json::json;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use table::{Cell, Table};

const ENV_NOTE: &str = "Environment:\n  HELIX_MOBIUS_SEED  reserved for future randomized methods; \
    every computation is deterministic and the variable is currently ignored.";

#[derive(Debug, Parser)]
#[command(name = "helix-mobius", version, about = "Möbius energy density of the helix", after_help = ENV_NOTE)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Grid {
    Log,
    Linear,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// I(ρ) by adaptive quadrature on the real line.
    Density {
        #[arg(long, value_parser = positive)]
        rho: f64,
        #[arg(long, default_value_t = 1e-10, value_parser = positive)]
        tol: f64,
    },
    /// Refined strip roots z_k with their approximants and certificates.
    Roots {
        #[arg(long, value_parser = positive)]
        rho: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        kmax: u64,
        /// Add an independent root from the real two-equation reduction.
        #[arg(long)]
        oracle: bool,
    },
    /// I(ρ) from the residue series, or Ĩ(ρ) from the approximants.
    Series {
        #[arg(long, value_parser = positive)]
        rho: f64,
        #[arg(long, default_value_t = 1e-10, value_parser = positive)]
        tol: f64,
        /// Sum the closed-form approximants instead of the refined roots.
        #[arg(long)]
        approx: bool,
    },
    /// All methods and reference curves over a grid of pitches.
    Sweep {
        #[arg(long, value_parser = positive)]
        rho_min: f64,
        #[arg(long, value_parser = positive)]
        rho_max: f64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        steps: u32,
        #[arg(long, value_enum, default_value_t = Grid::Log)]
        grid: Grid,
        /// Relative tolerance.
        #[arg(long, default_value_t = 1e-8, value_parser = positive)]
        tol: f64,
    },
    /// Run self-checks; exits 1 if any fails.
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Suite::All)]
        suite: verify::Suite,
    },
    /// Side, arc and closed-contour integrals for k = 1..kmax.
    Contour {
        #[arg(long, value_parser = positive)]
        rho: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        kmax: u64,
        /// Relative tolerance of the closed-contour comparison.
        #[arg(long, default_value_t = 1e-7, value_parser = positive)]
        tol: f64,
    },
    /// Energy density (or gradient) along a sampled curve read from CSV.
    Curve {
        /// CSV with header t,x,y,z; a `# closed=true` line marks a closed curve.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0, value_parser = positive)]
        j: f64,
        #[arg(long, default_value_t = 1.0, value_parser = positive)]
        p: f64,
        #[arg(long, default_value_t = 1e-8, value_parser = positive)]
        tol: f64,
        /// Emit the Möbius gradient field instead of the energy density.
        #[arg(long)]
        gradient: bool,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive finite number, got {s}"))
    }
}

/// Why a run did not produce a clean result.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(Error),
    Verification(usize),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Pole { .. } => "pole",
        Error::Overflow { .. } => "overflow",
        Error::ToleranceNotReached { .. } => "tolerance_not_reached",
        Error::NonConvergence { .. } => "non_convergence",
        Error::StripViolation { .. } => "strip_violation",
        Error::NoSignChange { .. } => "no_sign_change",
        Error::IndeterminateCount { .. } => "indeterminate_count",
        Error::DerivativeUnderflow { .. } => "derivative_underflow",
        Error::Degenerate(_) => "degenerate",
        Error::CostGuard(_) => "cost_guard",
        Error::EmptyInput(_) => "empty_input",
        Error::Input(_) => "input",
    }
}

fn estimate_table(command: &'static str, e: &EnergyEstimate, series: Option<&SeriesResult>) -> Table {
    let mut cols = vec!["rho", "value", "method", "tail_bound", "tolerance"];
    let mut row: Vec<Cell> = vec![
        e.rho.value().into(),
        e.value.into(),
        e.method.as_str().into(),
        e.tail_bound.into(),
        e.tolerance.into(),
    ];
    if let Some(s) = series {
        cols.extend(["cutoff", "tail_estimate"]);
        row.extend([s.truncation.cutoff.into(), s.truncation.tail_estimate.into()]);
    }
    let mut t = Table::new(command, &cols);
    t.push(row);
    t
}

fn roots_table(rho: Pitch, kmax: u64, oracle: bool) -> Result<Table, Failure> {
    let mut cols = vec![
        "k", "re_w", "im_w", "re_z", "im_z", "rouche_r", "err_bound", "abs_err", "certified",
    ];
    if oracle {
        cols.extend(["re_oracle", "im_oracle", "oracle_gap"]);
    }
    let found = refine_roots(rho, kmax, 1e-13)?;
    let oracles: Vec<Option<_>> = if oracle {
        found
            .par_iter()
            .map(|z| curve_oracle(rho, z.k, 1e-14).map(Some))
            .collect::<Result<_, _>>()?
    } else {
        vec![None; found.len()]
    };
    let mut t = Table::new("roots", &cols);
    for (z, o) in found.iter().zip(oracles) {
        let mut row: Vec<Cell> = vec![
            z.k.into(),
            z.w.re.into(),
            z.w.im.into(),
            z.z.re.into(),
            z.z.im.into(),
            z.rouche_radius.into(),
            z.error_bound.into(),
            z.distance().into(),
            z.certified.into(),
        ];
        if let Some(o) = o {
            row.extend([o.re.into(), o.im.into(), (o - z.z).norm().into()]);
        }
        t.push(row);
    }
    Ok(t)
}

fn sweep_grid(lo: f64, hi: f64, steps: u32, grid: Grid) -> Result<Vec<Pitch>, Failure> {
    if lo > hi {
        return Err(Failure::Usage(format!("--rho-min {lo} exceeds --rho-max {hi}")));
    }
    if steps == 1 {
        return Ok(vec![Pitch::new(lo)?]);
    }
    (0..steps)
        .map(|i| {
            let f = i as f64 / (steps - 1) as f64;
            let r = match grid {
                Grid::Log => (lo.ln() + f * (hi.ln() - lo.ln())).exp(),
                Grid::Linear => lo + f * (hi - lo),
            };
            // Pin the endpoints exactly.
            let r = if i == 0 { lo } else if i == steps - 1 { hi } else { r };
            Ok(Pitch::new(r)?)
        })
        .collect()
}

fn sweep_table(grid: &[Pitch], tol: f64) -> Result<Table, Failure> {
    let mut t = Table::new(
        "sweep",
        &[
            "rho", "i_quad", "i_res", "i_tilde", "ref_small", "ref_large_lo", "ref_large_hi",
            "ratio_small", "ratio_large",
        ],
    );
    for r in asymptotic_report(grid, tol)? {
        t.push(vec![
            r.rho.value().into(),
            r.i_quad.into(),
            r.i_res.into(),
            r.i_tilde.into(),
            r.small_rho_ref.into(),
            r.large_rho_band.0.into(),
            r.large_rho_band.1.into(),
            r.ratio_small.into(),
            r.ratio_large.into(),
        ]);
    }
    Ok(t)
}

fn contour_table(rho: Pitch, kmax: u64, tol: f64) -> Result<Table, Failure> {
    let mut t = Table::new(
        "contour",
        &[
            "k", "radius", "side", "arc", "bottom", "contour_re", "contour_im", "residue_total",
            "poles_inside", "discrepancy", "passed",
        ],
    );
    let rows: Vec<Vec<Cell>> = (1..=kmax)
        .into_par_iter()
        .map(|k| {
            let rep = closed_contour_check(rho, k, tol)?;
            Ok(vec![
                k.into(),
                rep.radius.into(),
                side_integral(rho, k)?.into(),
                arc_integral(rho, k)?.into(),
                rep.bottom.into(),
                rep.contour_total.re.into(),
                rep.contour_total.im.into(),
                rep.residue_total.into(),
                rep.poles_inside.into(),
                rep.discrepancy.into(),
                rep.passed.into(),
            ])
        })
        .collect::<Result<_, Error>>()?;
    for row in rows {
        t.push(row);
    }
    Ok(t)
}

fn curve_table(input: &PathBuf, j: f64, p: f64, tol: f64, gradient: bool) -> Result<Table, Failure> {
    let curve = SampledCurve::from_csv_path(input)?;
    let params = curve.params();
    // The gradient needs room on both sides of an open curve's sample.
    let ts: Vec<f64> = if gradient && !curve.is_closed() {
        params[1..params.len() - 1].to_vec()
    } else {
        params.to_vec()
    };
    if gradient {
        let mut t = Table::new("curve", &["t", "gx", "gy", "gz"]);
        let rows: Vec<_> = ts
            .par_iter()
            .map(|&s| mobius_gradient_field(&curve, s, tol).map(|g| (s, g)))
            .collect::<Result<_, _>>()?;
        for (s, g) in rows {
            t.push(vec![s.into(), g.x.into(), g.y.into(), g.z.into()]);
        }
        Ok(t)
    } else {
        let mut t = Table::new("curve", &["t", "energy", "error", "j", "p"]);
        let rows: Vec<_> = ts
            .par_iter()
            .map(|&s| pointwise_energy(&curve, s, j, p, tol))
            .collect::<Result<_, _>>()?;
        for e in rows {
            t.push(vec![e.s.into(), e.value.into(), e.error.into(), e.j.into(), e.p.into()]);
        }
        Ok(t)
    }
}

/// Runs the command; a failed verification still returns its report.
fn execute(command: &Command) -> Result<(Table, Option<Failure>), Failure> {
    let table = match *command {
        Command::Density { rho, tol } => {
            estimate_table("density", &integrate_density(Pitch::new(rho)?, tol)?, None)
        }
        Command::Roots { rho, kmax, oracle } => roots_table(Pitch::new(rho)?, kmax, oracle)?,
        Command::Series { rho, tol, approx } => {
            let rho = Pitch::new(rho)?;
            let s = if approx { approx_series(rho, tol)? } else { residue_series(rho, tol)? };
            estimate_table("series", &s.estimate, Some(&s))
        }
        Command::Sweep { rho_min, rho_max, steps, grid, tol } => {
            sweep_table(&sweep_grid(rho_min, rho_max, steps, grid)?, tol)?
        }
        Command::Verify { suite } => {
            let checks = verify::run(suite)?;
            let failed = checks.iter().filter(|c| !c.passed()).count();
            let failure = (failed > 0).then_some(Failure::Verification(failed));
            return Ok((verify::table(&checks), failure));
        }
        Command::Contour { rho, kmax, tol } => contour_table(Pitch::new(rho)?, kmax, tol)?,
        Command::Curve { ref input, j, p, tol, gradient } => curve_table(input, j, p, tol, gradient)?,
    };
    Ok((table, None))
}

fn emit(table: &Table, global: &Global) -> io::Result<()> {
    let sink: Box<dyn Write> = match &global.output {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    match global.format {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &table.to_json())?;
            writeln!(out)?;
        }
    }
    out.flush()
}

/// Exit status and error record for a failure; the record goes to stderr.
fn report(failure: &Failure) -> ExitCode {
    let (code, kind, message) = match failure {
        Failure::Usage(m) => (2, "usage", m.clone()),
        Failure::Compute(e) => (1, error_kind(e), e.to_string()),
        Failure::Verification(n) => (1, "verification_failed", format!("{n} check(s) failed")),
        Failure::Io(e) => (1, "io", e.to_string()),
    };
    let record = json!({ "error": { "kind": kind, "message": message, "exit_code": code } });
    eprintln!("{record}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.into()).build_global() {
            return report(&Failure::Usage(e.to_string()));
        }
    }
    match execute(&cli.command) {
        Ok((table, failure)) => {
            if let Err(e) = emit(&table, &cli.global) {
                return report(&Failure::Io(e));
            }
            failure.as_ref().map_or(ExitCode::SUCCESS, report)
        }
        Err(f) => report(&f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn log_grid_pins_endpoints() {
        let g = sweep_grid(1e-6, 1e-3, 4, Grid::Log).unwrap();
        let v: Vec<f64> = g.iter().map(|r| r.value()).collect();
        assert_eq!(v[0], 1e-6);
        assert_eq!(v[3], 1e-3);
        assert!((v[1] / 1e-5 - 1.0).abs() < 1e-12);
        assert!(matches!(sweep_grid(2.0, 1.0, 3, Grid::Log), Err(Failure::Usage(_))));
    }

    #[test]
    fn positive_rejects_bad_numbers() {
        assert!(positive("0").is_err());
        assert!(positive("-1").is_err());
        assert!(positive("nan").is_err());
        assert_eq!(positive("2.5"), Ok(2.5));
    }
}
