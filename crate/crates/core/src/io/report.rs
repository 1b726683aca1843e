use serde::Serialize;

use crate::bayes::PosteriorSummary;
use crate::cohort::{self, BoxplotStats, ComparisonRow, RankShift, ScatterData};
use crate::error::{Error, Result};
use crate::io::ingest::{InspectionDataset, Provenance, WeldTypeKey};
use crate::regression::{self, FitConfig, OperatorRecord, RegressionFit};

pub const TOOL_NAME: &str = "lcb";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: TOOL_NAME,
            version: TOOL_VERSION,
        }
    }
}

/// How the learning curve behind the informative priors was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSource {
    /// Maximum-likelihood fit on the group.
    Fitted { config: FitConfig },
    /// Coefficients supplied by the caller.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boxplots {
    pub informative: Vec<BoxplotStats>,
    pub noninformative: Vec<BoxplotStats>,
}

/// Everything one `analyze` run produces for one weld-type group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub group: String,
    pub seed: u64,
    pub level: f64,
    pub n_operators: usize,
    pub curve_source: CurveSource,
    pub fit: RegressionFit,
    pub informative: Vec<PosteriorSummary>,
    pub noninformative: Vec<PosteriorSummary>,
    pub comparison: Vec<ComparisonRow>,
    /// Absent for single-operator groups.
    pub rank_shift: Option<RankShift>,
    pub boxplots: Boxplots,
    pub scatter: ScatterData,
    pub provenance: Option<Provenance>,
}

/// Fits the curve on `group`, then builds every per-operator and cohort
/// output from it.
pub fn run_pipeline(
    dataset: &InspectionDataset,
    group: &WeldTypeKey,
    fit_config: &FitConfig,
    level: f64,
) -> Result<Report> {
    let records = dataset.group(group)?;
    let fit = regression::fit(records, fit_config).map_err(|e| Error::Group {
        group: group.to_string(),
        source: Box::new(e),
    })?;
    let mut report = build_report(
        group,
        records,
        fit,
        CurveSource::Fitted {
            config: *fit_config,
        },
        fit_config.seed,
        level,
    )?;
    report.provenance = Some(dataset.provenance.clone());
    Ok(report)
}

/// Report for an already-determined curve.
pub fn build_report(
    group: &WeldTypeKey,
    records: &[OperatorRecord],
    fit: RegressionFit,
    curve_source: CurveSource,
    seed: u64,
    level: f64,
) -> Result<Report> {
    let analysis = cohort::analyze(records, &fit, level)?;
    let rank_shift = if analysis.rows.len() >= 2 {
        Some(cohort::rank_shift_report(&analysis.rows)?)
    } else {
        None
    };
    let boxplots = Boxplots {
        informative: analysis
            .informative
            .iter()
            .map(cohort::boxplot_stats)
            .collect::<Result<_>>()?,
        noninformative: analysis
            .noninformative
            .iter()
            .map(cohort::boxplot_stats)
            .collect::<Result<_>>()?,
    };
    let scatter = cohort::scatter_data(records, &fit)?;
    Ok(Report {
        tool: ToolInfo::default(),
        group: group.to_string(),
        seed,
        level,
        n_operators: records.len(),
        curve_source,
        fit,
        informative: analysis.informative,
        noninformative: analysis.noninformative,
        comparison: analysis.rows,
        rank_shift,
        boxplots,
        scatter,
        provenance: None,
    })
}
