use lcb_core::bayes::{PriorScheme, jeffreys_prior, posterior_update, summarize};
use lcb_core::cohort::{analyze, kendall_tau_distance, rank_shift_report};
use lcb_core::curve::{ClampPolicy, PlateauParams};
use lcb_core::regression::{OperatorRecord, RegressionFit};
use lcb_core::stats::{BetaParams, beta_cdf, beta_quantile, betabinom_log_pmf, log_beta_fn};
use lcb_core::synth::{SynthConfig, generate_cohort};
use proptest::prelude::*;

fn published_fit(records: &[OperatorRecord]) -> RegressionFit {
    RegressionFit::from_curve(records, PlateauParams::published(), 0.0184, ClampPolicy::default()).unwrap()
}

proptest! {
    #[test]
    fn betabinomial_pmf_sums_to_one(a in 0.1f64..100.0, b in 0.1f64..100.0, n in 0u64..=60) {
        let p = BetaParams::new(a, b).unwrap();
        let total: f64 = (0..=n).map(|x| betabinom_log_pmf(x, n, &p).unwrap().exp()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "sum {total}");
    }

    #[test]
    fn quantile_inverts_cdf(a in 0.05f64..500.0, b in 0.05f64..500.0) {
        let p = BetaParams::new(a, b).unwrap();
        for q in [0.01, 0.025, 0.5, 0.975, 0.99] {
            let x = beta_quantile(q, &p).unwrap();
            prop_assert!((beta_cdf(x, &p).unwrap() - q).abs() < 1e-9, "q {q} x {x}");
        }
    }

    #[test]
    fn log_beta_is_symmetric(a in 1e-3f64..1e4, b in 1e-3f64..1e4) {
        prop_assert_eq!(log_beta_fn(a, b).unwrap(), log_beta_fn(b, a).unwrap());
    }

    #[test]
    fn mean_spread_round_trip(mu in 1e-4f64..0.9999, spread in 1e-4f64..50.0) {
        let p = BetaParams::from_mean_spread(mu, spread).unwrap();
        prop_assert!((p.mean() - mu).abs() < 1e-12);
        prop_assert!((p.spread() - spread).abs() <= 1e-12 * spread.max(1.0));
    }

    #[test]
    fn jeffreys_ranking_follows_closed_form(
        counts in prop::collection::vec((1u64..400, 0.0f64..1.0), 2..40)
    ) {
        let records: Vec<_> = counts
            .iter()
            .enumerate()
            .map(|(i, &(n, f))| OperatorRecord::new(i as u64 + 1, n, (f * n as f64).floor() as u64).unwrap())
            .collect();
        let analysis = analyze(&records, &published_fit(&records), 0.95).unwrap();
        // Brute-force ranks straight from (X + 0.5) / (n + 1).
        let closed: Vec<f64> = records.iter().map(|r| (r.x_repaired as f64 + 0.5) / (r.n_total as f64 + 1.0)).collect();
        for (i, row) in analysis.rows.iter().enumerate() {
            prop_assert!((row.mean_noninformative - closed[i]).abs() < 1e-12);
            let above = (0..records.len())
                .filter(|&j| closed[j] > closed[i] || (closed[j] == closed[i] && j < i))
                .count();
            prop_assert_eq!(row.rank_noninformative, above + 1);
        }
    }

    #[test]
    fn kendall_distance_symmetric_and_zero_on_self(perm in Just((1..=12usize).collect::<Vec<_>>()).prop_shuffle()) {
        let id: Vec<usize> = (1..=12).collect();
        prop_assert_eq!(kendall_tau_distance(&perm, &id), kendall_tau_distance(&id, &perm));
        prop_assert_eq!(kendall_tau_distance(&perm, &perm), 0);
    }
}

#[test]
fn posterior_update_adds_counts() {
    let prior = jeffreys_prior();
    let post = posterior_update(&prior, 175, 25).unwrap();
    assert_eq!((post.a(), post.b()), (25.5, 150.5));
}

#[test]
fn schemes_converge_as_experience_grows() {
    let ladder = [10u64, 100, 1000, 10000];
    let records: Vec<_> = ladder
        .iter()
        .map(|&n| OperatorRecord::new(n, n, (0.1 * n as f64).round() as u64).unwrap())
        .collect();
    let fit = published_fit(&records);
    let gaps: Vec<f64> = records
        .iter()
        .map(|r| {
            let inf = summarize(r, PriorScheme::Informative(&fit), 0.95).unwrap();
            let non = summarize(r, PriorScheme::Noninformative, 0.95).unwrap();
            (inf.posterior_mean - non.posterior_mean).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn small_heterogeneous_cohort_changes_ranks() {
    let cfg = SynthConfig::new(PlateauParams::published(), 0.0184, 17, (5, 60), 17).unwrap();
    let records = generate_cohort(&cfg).unwrap();
    let analysis = analyze(&records, &published_fit(&records), 0.95).unwrap();
    let shift = rank_shift_report(&analysis.rows).unwrap();

    let rows = &analysis.rows;
    let mut discordant = 0;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let a = rows[i].rank_informative as i64 - rows[j].rank_informative as i64;
            let b = rows[i].rank_noninformative as i64 - rows[j].rank_noninformative as i64;
            if a * b < 0 {
                discordant += 1;
            }
        }
    }
    assert_eq!(shift.kendall_tau_distance, discordant);
    assert!(shift.kendall_tau_distance > 0);
    assert!(shift.rank_changes > 0);
}
