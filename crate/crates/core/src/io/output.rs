use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::bayes::PosteriorSummary;
use crate::cohort::{BoxplotStats, ComparisonRow, ScatterData};
use crate::error::{Error, Result};
use crate::regression::{OperatorRecord, RegressionFit};

/// Pretty JSON with every float written to 17 significant digits.
struct SigFigFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SigFigFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn r4(v: f64) -> String {
    format!("{v:.4}")
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w)?;
    let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
}

/// Per-operator informative posterior table, one row per operator:
/// `operator_id, n, X, mu_FN, prior_a, prior_b, post_a, post_b, post_mean,
/// ci_lo, ci_hi, rank_informative, rank_noninformative`.
pub fn posterior_table_csv(summaries: &[PosteriorSummary], rows: &[ComparisonRow]) -> Result<String> {
    csv_string(|w| {
        w.write_record([
            "operator_id",
            "n",
            "X",
            "mu_FN",
            "prior_a",
            "prior_b",
            "post_a",
            "post_b",
            "post_mean",
            "ci_lo",
            "ci_hi",
            "rank_informative",
            "rank_noninformative",
        ])?;
        for s in summaries {
            let row = rows.iter().find(|r| r.operator_id == s.operator_id);
            w.write_record([
                s.operator_id.to_string(),
                s.n_total.to_string(),
                s.x_repaired.to_string(),
                s.mu_fn.map(r4).unwrap_or_default(),
                r4(s.prior.a()),
                r4(s.prior.b()),
                r4(s.posterior.a()),
                r4(s.posterior.b()),
                r4(s.posterior_mean),
                r4(s.credible_interval.0),
                r4(s.credible_interval.1),
                row.map(|r| r.rank_informative.to_string()).unwrap_or_default(),
                row.map(|r| r.rank_noninformative.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(())
    })
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> Result<String> {
    csv_string(|w| {
        w.write_record([
            "operator_id",
            "n",
            "X",
            "mean_noninformative",
            "mean_informative",
            "abs_difference",
            "rank_noninformative",
            "rank_informative",
        ])?;
        for r in rows {
            w.write_record([
                r.operator_id.to_string(),
                r.n_total.to_string(),
                r.x_repaired.to_string(),
                r4(r.mean_noninformative),
                r4(r.mean_informative),
                r4(r.abs_difference),
                r.rank_noninformative.to_string(),
                r.rank_informative.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Ranking table sorted by informative rank.
pub fn ranking_csv(rows: &[ComparisonRow]) -> Result<String> {
    let mut sorted: Vec<&ComparisonRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.rank_informative);
    csv_string(|w| {
        w.write_record([
            "rank_informative",
            "rank_noninformative",
            "shift",
            "operator_id",
            "n",
            "X",
            "mean_informative",
            "mean_noninformative",
        ])?;
        for r in sorted {
            w.write_record([
                r.rank_informative.to_string(),
                r.rank_noninformative.to_string(),
                (r.rank_noninformative as i64 - r.rank_informative as i64).to_string(),
                r.operator_id.to_string(),
                r.n_total.to_string(),
                r.x_repaired.to_string(),
                r4(r.mean_informative),
                r4(r.mean_noninformative),
            ])?;
        }
        Ok(())
    })
}

pub fn fit_csv(fit: &RegressionFit) -> Result<String> {
    csv_string(|w| {
        w.write_record(["parameter", "value"])?;
        let rows = [
            ("A", r4(fit.params.a)),
            ("B", format!("{:.6}", fit.params.b)),
            ("C", r4(fit.params.c)),
            ("sigma", format!("{:.6}", fit.sigma)),
            ("log_likelihood", r4(fit.log_likelihood)),
            ("converged", fit.converged.to_string()),
            ("iterations", fit.iterations.to_string()),
            ("n_restarts_used", fit.n_restarts_used.to_string()),
            ("clamp_fraction", r4(fit.clamp_fraction)),
        ];
        for (k, v) in rows {
            w.write_record([k, v.as_str()])?;
        }
        Ok(())
    })
}

pub fn boxplot_csv(stats: &[BoxplotStats]) -> Result<String> {
    csv_string(|w| {
        w.write_record([
            "operator_id",
            "scheme",
            "whisker_lo",
            "q1",
            "median",
            "q3",
            "whisker_hi",
            "mean",
        ])?;
        for b in stats {
            w.write_record([
                b.operator_id.to_string(),
                b.scheme.to_owned(),
                r4(b.whisker_lo),
                r4(b.q1),
                r4(b.median),
                r4(b.q3),
                r4(b.whisker_hi),
                r4(b.mean),
            ])?;
        }
        Ok(())
    })
}

/// Operator points followed by the fitted-curve grid; `kind` tells them apart.
pub fn scatter_csv(data: &ScatterData) -> Result<String> {
    csv_string(|w| {
        w.write_record(["kind", "operator_id", "n", "naive_fraction", "fitted_mu"])?;
        for p in &data.points {
            w.write_record([
                "operator".to_owned(),
                p.operator_id.to_string(),
                p.n_total.to_string(),
                r4(p.naive_fraction),
                r4(p.fitted_mu),
            ])?;
        }
        for c in &data.curve {
            w.write_record([
                "curve".to_owned(),
                String::new(),
                r4(c.n),
                String::new(),
                r4(c.mu),
            ])?;
        }
        Ok(())
    })
}

/// Cohort in the ingestion schema, optionally tagged with a weld type.
pub fn records_csv(records: &[OperatorRecord], group: Option<&crate::io::WeldTypeKey>) -> Result<String> {
    csv_string(|w| {
        let mut header = vec!["operator_id", "total_welds", "repaired_welds"];
        if group.is_some() {
            header.extend(["pipe_schedule", "nominal_pipe_size", "material_type", "weld_type"]);
        }
        w.write_record(&header)?;
        for r in records {
            let mut row = vec![
                r.operator_id.to_string(),
                r.n_total.to_string(),
                r.x_repaired.to_string(),
            ];
            if let Some(k) = group {
                row.extend([
                    k.pipe_schedule.clone(),
                    k.nominal_pipe_size.clone(),
                    k.material_type.clone(),
                    k.weld_type.clone(),
                ]);
            }
            w.write_record(&row)?;
        }
        Ok(())
    })
}
