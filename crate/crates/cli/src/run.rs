//! Mode execution: drives the library and writes the artifacts.
//!
//! Every artifact carries the effective seed and the configuration hash so
//! a result file can always be traced back to the run that produced it.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use quditpea::estimate::{curve_table, fidelity, iterative_pea, mse_fit, Backend, FitResult};
use quditpea::pea::run_pea;
use quditpea::photonic::simulate_counts;
use quditpea::{CurveRow64, DiagonalUnitary64, NormalizedCounts64, QuditState64};

use crate::config::{config_hash, BackendKind, Mode, OutputFormat, Resolved};
use crate::output::{sig12, write_atomic, CsvDoc, Json};

/// Runs the resolved configuration and writes its artifacts.
pub fn execute(resolved: &Resolved) -> Result<()> {
    match resolved.mode {
        Mode::Ideal => run_ideal(resolved),
        Mode::Photonic => run_photonic(resolved),
        Mode::Fit => run_fit(resolved),
        Mode::Iterate => run_iterate(resolved),
        Mode::Curves => run_curves(resolved),
    }
}

fn emit(path: &Path, contents: &str) -> Result<()> {
    write_atomic(path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn proj_columns(d: usize) -> impl Iterator<Item = String> {
    (0..d).map(|j| format!("proj{j}"))
}

fn table_header(d: usize) -> impl Iterator<Item = String> {
    std::iter::once("eigenstate".to_string()).chain(proj_columns(d))
}

fn run_ideal(r: &Resolved) -> Result<()> {
    let dense = DiagonalUnitary64::new(&r.phases).to_unitary();
    let mut rows = Vec::with_capacity(r.d);
    for tau in 0..r.d {
        let target = QuditState64::basis(&[r.d], &[tau])?;
        let outcome = run_pea(&dense, &target, r.d)?;
        rows.push(outcome.distribution.probs().to_vec());
    }
    let hash = config_hash(r);

    match r.format {
        OutputFormat::Csv => {
            let mut doc = CsvDoc::new();
            doc.comment("seed", r.seed);
            doc.comment("config_hash", &hash);
            doc.header(table_header(r.d));
            for (tau, row) in rows.iter().enumerate() {
                doc.row(
                    std::iter::once(tau.to_string()).chain(row.iter().map(|&p| sig12(p))),
                );
            }
            emit(&r.output_dir.join("ideal.csv"), &doc.finish())?;
        }
        OutputFormat::Json => {
            let json_rows = rows
                .iter()
                .enumerate()
                .map(|(tau, row)| {
                    Json::Obj(vec![
                        ("eigenstate", Json::int(tau)),
                        (
                            "distribution",
                            Json::Arr(row.iter().map(|&p| Json::num(p)).collect()),
                        ),
                    ])
                })
                .collect();
            let doc = Json::Obj(vec![
                ("mode", Json::text("ideal")),
                ("seed", Json::int(r.seed)),
                ("config_hash", Json::text(&hash)),
                ("d", Json::int(r.d)),
                ("rows", Json::Arr(json_rows)),
            ]);
            emit(&r.output_dir.join("ideal.json"), &doc.render())?;
        }
    }
    Ok(())
}

fn run_photonic(r: &Resolved) -> Result<()> {
    let table = simulate_counts(&r.phases, &r.geometry, &r.drive, &r.detector, r.seed)?;
    let fid: f64 = fidelity(&table)?;
    let normalized: Vec<Vec<f64>> = table
        .counts()
        .iter()
        .enumerate()
        .map(|(tau, row)| {
            Ok(NormalizedCounts64::normalize(row)
                .with_context(|| format!("eigenstate {tau} registered no counts"))?
                .fractions()
                .to_vec())
        })
        .collect::<Result<_>>()?;
    let hash = config_hash(r);

    match r.format {
        OutputFormat::Csv => {
            let mut counts_doc = CsvDoc::new();
            counts_doc.comment("seed", r.seed);
            counts_doc.comment("config_hash", &hash);
            counts_doc.header(table_header(r.d));
            for (tau, row) in table.counts().iter().enumerate() {
                counts_doc.row(
                    std::iter::once(tau.to_string()).chain(row.iter().map(u64::to_string)),
                );
            }
            emit(&r.output_dir.join("photonic_counts.csv"), &counts_doc.finish())?;

            let mut norm_doc = CsvDoc::new();
            norm_doc.comment("seed", r.seed);
            norm_doc.comment("config_hash", &hash);
            norm_doc.comment("fidelity", sig12(fid));
            norm_doc.header(table_header(r.d));
            for (tau, row) in normalized.iter().enumerate() {
                norm_doc.row(
                    std::iter::once(tau.to_string()).chain(row.iter().map(|&p| sig12(p))),
                );
            }
            emit(
                &r.output_dir.join("photonic_normalized.csv"),
                &norm_doc.finish(),
            )?;
        }
        OutputFormat::Json => {
            let json_rows = table
                .counts()
                .iter()
                .zip(&normalized)
                .enumerate()
                .map(|(tau, (counts, fractions))| {
                    Json::Obj(vec![
                        ("eigenstate", Json::int(tau)),
                        (
                            "counts",
                            Json::Arr(counts.iter().map(Json::int).collect()),
                        ),
                        (
                            "normalized",
                            Json::Arr(fractions.iter().map(|&p| Json::num(p)).collect()),
                        ),
                    ])
                })
                .collect();
            let doc = Json::Obj(vec![
                ("mode", Json::text("photonic")),
                ("seed", Json::int(r.seed)),
                ("config_hash", Json::text(&hash)),
                ("d", Json::int(r.d)),
                ("fidelity", Json::num(fid)),
                ("rows", Json::Arr(json_rows)),
            ]);
            emit(&r.output_dir.join("photonic.json"), &doc.render())?;
        }
    }
    println!("fidelity = {fid:.6}");
    Ok(())
}

/// A count table read back from disk: projection columns plus raw cell
/// values, one row per eigenstate.
#[derive(Debug)]
struct InputTable {
    d: usize,
    rows: Vec<Vec<f64>>,
}

/// Reads a count-table CSV: `# comment` lines are skipped, the header must
/// be `eigenstate,proj0,...,proj{d-1}`, and rows must be labeled 0,1,...
/// in order. Cells may be integer counts or already-normalized fractions.
fn read_count_table(path: &Path) -> Result<InputTable> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read count table {}", path.display()))?;
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'));

    let header = lines
        .next()
        .ok_or_else(|| anyhow!("{}: no header row", path.display()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.first() != Some(&"eigenstate") || columns.len() < 3 {
        bail!(
            "{}: header must be eigenstate,proj0,...,proj{{d-1}}, got '{header}'",
            path.display()
        );
    }
    let d = columns.len() - 1;
    for (j, name) in columns[1..].iter().enumerate() {
        if *name != format!("proj{j}") {
            bail!(
                "{}: column {} should be proj{j}, got '{name}'",
                path.display(),
                j + 2
            );
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != d + 1 {
            bail!(
                "{}: row {} has {} cells, expected {}",
                path.display(),
                rows.len(),
                cells.len(),
                d + 1
            );
        }
        let label: usize = cells[0]
            .parse()
            .with_context(|| format!("{}: bad eigenstate label '{}'", path.display(), cells[0]))?;
        if label != rows.len() {
            bail!(
                "{}: rows must be labeled 0,1,... in order; got {label} at row {}",
                path.display(),
                rows.len()
            );
        }
        let mut row = Vec::with_capacity(d);
        for cell in &cells[1..] {
            let value: f64 = cell
                .parse()
                .with_context(|| format!("{}: bad count '{cell}'", path.display()))?;
            if !value.is_finite() || value < 0.0 {
                bail!(
                    "{}: counts must be finite and nonnegative, got '{cell}'",
                    path.display()
                );
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(InputTable { d, rows })
}

/// Turns one raw row into normalized fractions: integer cells are treated
/// as counts, anything else as weights normalized by their sum.
fn normalized_row(row: &[f64]) -> Result<NormalizedCounts64> {
    if row.iter().all(|v| v.fract() == 0.0) {
        let counts: Vec<u64> = row.iter().map(|&v| v as u64).collect();
        return Ok(NormalizedCounts64::normalize(&counts)?);
    }
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        bail!("row sums to zero");
    }
    let fractions: Vec<f64> = row.iter().map(|&v| v / total).collect();
    Ok(NormalizedCounts64::from_fractions(&fractions)?)
}

fn run_fit(r: &Resolved) -> Result<()> {
    let input = r.input.as_ref().expect("presence checked during resolve");
    let table = read_count_table(input)?;
    if r.d != 0 && r.d != table.d {
        bail!(
            "d: config says {} but {} has {} projection columns",
            r.d,
            input.display(),
            table.d
        );
    }
    if !r.phases.is_empty() && r.phases.len() != table.rows.len() {
        bail!(
            "phases: {} true phases for {} rows in {}",
            r.phases.len(),
            table.rows.len(),
            input.display()
        );
    }

    let mut fits: Vec<FitResult<f64>> = Vec::with_capacity(table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        let counts = normalized_row(row)
            .with_context(|| format!("row {i} of {}", input.display()))?;
        let truth = r.fit_true_phase.or_else(|| r.phases.get(i).copied());
        fits.push(mse_fit(&counts, truth));
    }
    let hash = config_hash(r);

    match r.format {
        OutputFormat::Csv => {
            let mut doc = CsvDoc::new();
            doc.comment("seed", r.seed);
            doc.comment("config_hash", &hash);
            doc.comment("input", input.display());
            doc.header(
                ["eigenstate", "phi_over_pi", "residual", "error"]
                    .map(String::from),
            );
            for (i, fit) in fits.iter().enumerate() {
                doc.row([
                    i.to_string(),
                    sig12(fit.phi_hat / PI),
                    sig12(fit.residual),
                    fit.circular_error_fraction.map(sig12).unwrap_or_default(),
                ]);
            }
            emit(&r.output_dir.join("fit.csv"), &doc.finish())?;
        }
        OutputFormat::Json => {
            let json_rows = fits
                .iter()
                .enumerate()
                .map(|(i, fit)| {
                    Json::Obj(vec![
                        ("eigenstate", Json::int(i)),
                        ("phi_over_pi", Json::num(fit.phi_hat / PI)),
                        ("residual", Json::num(fit.residual)),
                        (
                            "error",
                            fit.circular_error_fraction.map_or(Json::Null, Json::num),
                        ),
                    ])
                })
                .collect();
            let doc = Json::Obj(vec![
                ("mode", Json::text("fit")),
                ("seed", Json::int(r.seed)),
                ("config_hash", Json::text(&hash)),
                ("input", Json::text(input.display())),
                ("rows", Json::Arr(json_rows)),
            ]);
            emit(&r.output_dir.join("fit.json"), &doc.render())?;
        }
    }
    for (i, fit) in fits.iter().enumerate() {
        match fit.circular_error_fraction {
            Some(err) => println!(
                "row {i}: phi/pi = {:.6}, error = {err:.6}",
                fit.phi_hat / PI
            ),
            None => println!("row {i}: phi/pi = {:.6}", fit.phi_hat / PI),
        }
    }
    Ok(())
}

fn run_iterate(r: &Resolved) -> Result<()> {
    let backend = match r.backend {
        BackendKind::Ideal => Backend::Ideal,
        BackendKind::Photonic => Backend::Photonic {
            geometry: r.geometry.clone(),
            drive: r.drive,
            detector: r.detector,
        },
    };
    let outcome = iterative_pea(&r.phases, r.eigenstate, r.n_digits, &backend, r.seed)?;
    let hash = config_hash(r);
    let digit_list = outcome
        .digits
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",");

    match r.format {
        OutputFormat::Csv => {
            let mut doc = CsvDoc::new();
            doc.comment("seed", r.seed);
            doc.comment("config_hash", &hash);
            doc.comment("backend", r.backend);
            doc.comment("eigenstate", r.eigenstate);
            doc.header(
                [
                    "round",
                    "power",
                    "feedback_phase",
                    "measured_digit",
                    "tie",
                    "running_phase",
                ]
                .map(String::from),
            );
            for record in &outcome.records {
                doc.row([
                    record.k.to_string(),
                    record.x.to_string(),
                    sig12(record.theta),
                    record.measured_digit.to_string(),
                    record.tie.to_string(),
                    sig12(record.running_phase),
                ]);
            }
            doc.comment("digits", &digit_list);
            doc.comment("phase", sig12(outcome.phase));
            emit(&r.output_dir.join("iterate.csv"), &doc.finish())?;
        }
        OutputFormat::Json => {
            let records = outcome
                .records
                .iter()
                .map(|record| {
                    Json::Obj(vec![
                        ("round", Json::int(record.k)),
                        ("power", Json::int(record.x)),
                        ("feedback_phase", Json::num(record.theta)),
                        ("measured_digit", Json::int(record.measured_digit)),
                        ("tie", Json::Bool(record.tie)),
                        ("running_phase", Json::num(record.running_phase)),
                    ])
                })
                .collect();
            let doc = Json::Obj(vec![
                ("mode", Json::text("iterate")),
                ("seed", Json::int(r.seed)),
                ("config_hash", Json::text(&hash)),
                ("d", Json::int(r.d)),
                ("eigenstate", Json::int(r.eigenstate)),
                ("backend", Json::text(r.backend)),
                ("records", Json::Arr(records)),
                (
                    "digits",
                    Json::Arr(outcome.digits.iter().map(Json::int).collect()),
                ),
                ("phase", Json::num(outcome.phase)),
            ]);
            emit(&r.output_dir.join("iterate.json"), &doc.render())?;
        }
    }
    println!("digits = [{digit_list}], phase = {:.6} rad", outcome.phase);
    Ok(())
}

fn run_curves(r: &Resolved) -> Result<()> {
    let rows: Vec<CurveRow64> = curve_table(r.d, r.resolution)?;
    let hash = config_hash(r);

    match r.format {
        OutputFormat::Csv => {
            let mut doc = CsvDoc::new();
            doc.comment("seed", r.seed);
            doc.comment("config_hash", &hash);
            doc.header(std::iter::once("phi".to_string()).chain(proj_columns(r.d)));
            for row in &rows {
                doc.row(
                    std::iter::once(sig12(row.phi))
                        .chain(row.collapse.iter().map(|&p| sig12(p))),
                );
            }
            emit(&r.output_dir.join("curves.csv"), &doc.finish())?;
        }
        OutputFormat::Json => {
            let json_rows = rows
                .iter()
                .map(|row| {
                    Json::Obj(vec![
                        ("phi", Json::num(row.phi)),
                        (
                            "collapse",
                            Json::Arr(row.collapse.iter().map(|&p| Json::num(p)).collect()),
                        ),
                    ])
                })
                .collect();
            let doc = Json::Obj(vec![
                ("mode", Json::text("curves")),
                ("seed", Json::int(r.seed)),
                ("config_hash", Json::text(&hash)),
                ("d", Json::int(r.d)),
                ("resolution", Json::int(r.resolution)),
                ("rows", Json::Arr(json_rows)),
            ]);
            emit(&r.output_dir.join("curves.json"), &doc.render())?;
        }
    }
    Ok(())
}
