//! Cohort-level comparison of the informative and Jeffreys posteriors:
//! rankings, rank shifts, boxplot statistics and plot-ready scatter data.

use serde::Serialize;

use crate::bayes::{PosteriorSummary, PriorScheme, summarize};
use crate::error::{Error, Result};
use crate::regression::{CurvePoint, OperatorId, OperatorRecord, RegressionFit};
use crate::stats::beta_quantile;

/// Points on the fitted curve emitted with the scatter data.
pub const CURVE_GRID_POINTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub operator_id: OperatorId,
    pub n_total: u64,
    pub x_repaired: u64,
    pub mean_noninformative: f64,
    pub mean_informative: f64,
    pub abs_difference: f64,
    pub rank_noninformative: usize,
    pub rank_informative: usize,
}

/// Both posteriors for every operator plus the comparison rows built from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortAnalysis {
    pub informative: Vec<PosteriorSummary>,
    pub noninformative: Vec<PosteriorSummary>,
    pub rows: Vec<ComparisonRow>,
}

/// Ranks by descending posterior mean (rank 1 is the worst performer), ties by
/// ascending operator id.
pub fn rank_descending(entries: &[(&OperatorId, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&i, &j| {
        entries[j]
            .1
            .total_cmp(&entries[i].1)
            .then_with(|| entries[i].0.cmp(entries[j].0))
    });
    let mut ranks = vec![0; entries.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

/// Summaries under both schemes and the comparison table, sorted by operator id.
pub fn analyze(records: &[OperatorRecord], fit: &RegressionFit, level: f64) -> Result<CohortAnalysis> {
    if records.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let mut records = records.to_vec();
    records.sort_by(|p, q| p.operator_id.cmp(&q.operator_id));

    let informative = records
        .iter()
        .map(|r| summarize(r, PriorScheme::Informative(fit), level))
        .collect::<Result<Vec<_>>>()?;
    let noninformative = records
        .iter()
        .map(|r| summarize(r, PriorScheme::Noninformative, level))
        .collect::<Result<Vec<_>>>()?;

    let ranks_of = |summaries: &[PosteriorSummary]| {
        let entries: Vec<_> = summaries
            .iter()
            .map(|s| (&s.operator_id, s.posterior_mean))
            .collect();
        rank_descending(&entries)
    };
    let rank_inf = ranks_of(&informative);
    let rank_non = ranks_of(&noninformative);

    let rows = informative
        .iter()
        .zip(&noninformative)
        .enumerate()
        .map(|(i, (inf, non))| ComparisonRow {
            operator_id: inf.operator_id.clone(),
            n_total: inf.n_total,
            x_repaired: inf.x_repaired,
            mean_noninformative: non.posterior_mean,
            mean_informative: inf.posterior_mean,
            abs_difference: (inf.posterior_mean - non.posterior_mean).abs(),
            rank_noninformative: rank_non[i],
            rank_informative: rank_inf[i],
        })
        .collect();
    Ok(CohortAnalysis {
        informative,
        noninformative,
        rows,
    })
}

/// One comparison row per operator.
pub fn analyze_cohort(
    records: &[OperatorRecord],
    fit: &RegressionFit,
    level: f64,
) -> Result<Vec<ComparisonRow>> {
    analyze(records, fit, level).map(|a| a.rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankShift {
    pub operators: usize,
    /// Operators whose rank differs between the two schemes.
    pub rank_changes: usize,
    pub max_shift: usize,
    /// Number of discordant operator pairs.
    pub kendall_tau_distance: usize,
}

/// Kendall-tau distance between two rankings of the same items, by pair counting.
pub fn kendall_tau_distance(first: &[usize], second: &[usize]) -> usize {
    assert_eq!(first.len(), second.len());
    let mut discordant = 0;
    for i in 0..first.len() {
        for j in i + 1..first.len() {
            let a = first[i].cmp(&first[j]);
            let b = second[i].cmp(&second[j]);
            if a != b {
                discordant += 1;
            }
        }
    }
    discordant
}

pub fn rank_shift_report(rows: &[ComparisonRow]) -> Result<RankShift> {
    if rows.len() < 2 {
        return Err(Error::Degenerate(format!(
            "rank comparison needs at least 2 operators, got {}",
            rows.len()
        )));
    }
    let non: Vec<usize> = rows.iter().map(|r| r.rank_noninformative).collect();
    let inf: Vec<usize> = rows.iter().map(|r| r.rank_informative).collect();
    let shifts = non.iter().zip(&inf).map(|(a, b)| a.abs_diff(*b));
    Ok(RankShift {
        operators: rows.len(),
        rank_changes: shifts.clone().filter(|&d| d > 0).count(),
        max_shift: shifts.max().unwrap_or(0),
        kendall_tau_distance: kendall_tau_distance(&non, &inf),
    })
}

/// Quartiles of a posterior with whiskers at its 2.5% and 97.5% quantiles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotStats {
    pub operator_id: OperatorId,
    pub scheme: &'static str,
    pub whisker_lo: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_hi: f64,
    pub mean: f64,
}

pub fn boxplot_stats(summary: &PosteriorSummary) -> Result<BoxplotStats> {
    let q = |level| beta_quantile(level, &summary.posterior);
    Ok(BoxplotStats {
        operator_id: summary.operator_id.clone(),
        scheme: summary.scheme,
        whisker_lo: q(0.025)?,
        q1: q(0.25)?,
        median: q(0.5)?,
        q3: q(0.75)?,
        whisker_hi: q(0.975)?,
        mean: summary.posterior_mean,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub operator_id: OperatorId,
    pub n_total: u64,
    pub naive_fraction: f64,
    pub fitted_mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterData {
    pub points: Vec<ScatterPoint>,
    /// Fitted curve on a geometric grid from the smallest to the largest `n`.
    pub curve: Vec<CurvePoint>,
}

/// `n` geometrically spaced values from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln() / (n - 1) as f64;
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    _ if i == n - 1 => hi,
                    _ => lo * (ratio * i as f64).exp(),
                })
                .collect()
        }
    }
}

pub fn scatter_data(records: &[OperatorRecord], fit: &RegressionFit) -> Result<ScatterData> {
    let mut records = records.to_vec();
    records.sort_by(|p, q| p.operator_id.cmp(&q.operator_id));
    let points = records
        .iter()
        .map(|r| {
            Ok(ScatterPoint {
                operator_id: r.operator_id.clone(),
                n_total: r.n_total,
                naive_fraction: r.fraction_nonconforming(),
                fitted_mu: fit.mean_at(r.n_total as f64)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let curve = match (
        records.iter().map(|r| r.n_total).min(),
        records.iter().map(|r| r.n_total).max(),
    ) {
        (Some(lo), Some(hi)) => geometric_grid(lo as f64, hi as f64, CURVE_GRID_POINTS)
            .into_iter()
            .map(|n| {
                let v = fit.mean_at(n)?;
                Ok(CurvePoint {
                    n,
                    mu: v.value,
                    clamped: v.clamped,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        _ => Vec::new(),
    };
    Ok(ScatterData { points, curve })
}
