use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use super::config::ExperimentConfig;
use super::converge::ConvergenceRow;
use crate::bounds::BoundChain;
use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One grid point: the chain plus the metadata needed to re-run it.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRecord {
    pub version: String,
    pub config_hash: String,
    pub convergence: String,
    pub wall_time_s: f64,
    pub chain: BoundChain,
}

fn csv_float(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(csv_float).unwrap_or_default()
}

/// Column names of `report.csv`, in order.
pub const CSV_COLUMNS: &[&str] = &[
    "version",
    "config_hash",
    "convergence",
    "d",
    "L",
    "L_A",
    "n_max",
    "N_cap",
    "beta",
    "J",
    "U",
    "mu",
    "gamma",
    "exact_mi",
    "lemma1_value",
    "prop1_value",
    "prop2_value",
    "theorem_value",
    "slack_lemma1",
    "slack_prop1",
    "slack_theorem",
    "prop2_relaxed_value",
    "step3_value",
    "step4_value",
    "entropy_ab",
    "entropy_a",
    "entropy_b",
    "mean_particles",
    "boundary_energy",
    "g",
    "c0",
    "w_free",
    "n_free",
    "prop2_particles",
    "f_value",
    "quadrature_error",
    "eps1",
    "eps2",
    "lemma_s3_rhs",
    "main_constant",
    "pb_literal_lhs",
    "pb_literal_rhs",
    "pb_literal_slack",
    "pb_genuine_shift",
    "pb_genuine_rhs",
    "pb_genuine_slack",
    "trace_distance",
    "pinsker_slack",
    "correlation_slack",
    "zero_mode_sum",
    "eps2_dominates",
    "translation_deviation",
    "edge_occupation",
    "boundary_bonds",
    "skipped_sectors",
    "violations",
];

impl ReportRecord {
    pub fn csv_row(&self) -> Vec<String> {
        let c = &self.chain;
        let f = csv_float;
        let pk = c.pinsker.as_ref();
        vec![
            self.version.clone(),
            self.config_hash.clone(),
            self.convergence.clone(),
            c.dim.to_string(),
            c.side.to_string(),
            c.width.to_string(),
            c.n_max.to_string(),
            c.n_cap.map(|n| n.to_string()).unwrap_or_default(),
            f(c.beta),
            f(c.j),
            f(c.u),
            f(c.mu),
            f(c.gamma),
            f(c.exact_mi),
            f(c.lemma1_value),
            f(c.prop1_value),
            f(c.prop2_value),
            f(c.theorem_value),
            f(c.slack_lemma1),
            f(c.slack_prop1),
            f(c.slack_theorem),
            f(c.prop2_relaxed_value),
            f(c.step3_value),
            f(c.step4_value),
            f(c.entropy_ab),
            f(c.entropy_a),
            f(c.entropy_b),
            f(c.mean_particles),
            f(c.boundary_energy),
            f(c.g),
            f(c.c0),
            f(c.w_free),
            f(c.n_free),
            f(c.prop2_particles),
            f(c.f_value),
            f(c.quadrature_error),
            f(c.eps1),
            f(c.eps2),
            f(c.lemma_s3_rhs),
            f(c.main_constant),
            f(c.pb_literal.lhs),
            f(c.pb_literal.rhs),
            f(c.pb_literal.slack),
            f(c.pb_genuine.reference_shift),
            f(c.pb_genuine.rhs),
            f(c.pb_genuine.slack),
            opt_float(pk.map(|p| p.trace_distance)),
            opt_float(pk.map(|p| p.pinsker_slack)),
            opt_float(pk.map(|p| p.correlation_slack)),
            f(c.zero_modes.zero_mode_sum),
            c.zero_modes.eps2_dominates.to_string(),
            f(c.translation_deviation),
            f(c.edge_occupation),
            c.boundary_bonds.to_string(),
            c.skipped_sectors.to_string(),
            c.violations.join("; "),
        ]
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_report_csv(path: &Path, records: &[ReportRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(CSV_COLUMNS).map_err(csv_error)?;
    for r in records {
        w.write_record(r.csv_row()).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub const CONVERGENCE_COLUMNS: &[&str] = &[
    "L",
    "n_max",
    "beta",
    "exact_mi",
    "mean_particles",
    "rel_diff_mi",
    "rel_diff_particles",
    "max_sector_dim",
];

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(CONVERGENCE_COLUMNS).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.side.to_string(),
            r.n_max.to_string(),
            csv_float(r.beta),
            csv_float(r.exact_mi),
            csv_float(r.mean_particles),
            opt_float(r.rel_diff_mi),
            opt_float(r.rel_diff_particles),
            r.max_sector_dim.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with every float written to 17 significant digits.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

fn to_json<T: Serialize, W: io::Write>(writer: W, value: &T) -> Result<()> {
    let mut ser = Serializer::with_formatter(writer, FullPrecision(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(io::Error::other(e)))
}

#[derive(Serialize)]
struct JsonReport<'a> {
    version: &'a str,
    config_hash: String,
    config: &'a ExperimentConfig,
    wall_time_s: f64,
    records: &'a [ReportRecord],
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence: Option<&'a [ConvergenceRow]>,
}

pub fn write_report_json(
    path: &Path,
    config: &ExperimentConfig,
    records: &[ReportRecord],
    convergence: Option<&[ConvergenceRow]>,
    wall_time_s: f64,
) -> Result<()> {
    let report = JsonReport {
        version: VERSION,
        config_hash: config.hash(),
        config,
        wall_time_s,
        records,
        convergence,
    };
    let mut file = io::BufWriter::new(std::fs::File::create(path)?);
    to_json(&mut file, &report)?;
    writeln!(file)?;
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        #[derive(Serialize)]
        struct Sample {
            a: Vec<f64>,
            b: f64,
            c: u32,
        }
        let mut buf = Vec::new();
        let sample = Sample {
            a: vec![0.1, 1.0 / 3.0],
            b: f64::NAN,
            c: 3,
        };
        to_json(&mut buf, &sample).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(text.contains("3.3333333333333331e-1"));
        assert!(text.contains("\"b\": null"));
        assert!(text.contains("\"c\": 3"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"][1].as_f64().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn csv_precision_is_twelve_digits() {
        assert_eq!(csv_float(1.0 / 3.0), "3.33333333333e-1");
    }
}
