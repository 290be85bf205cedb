use obpursuit::experiments::{
    ab_comparison, phase_transition, rbop_trend, ExperimentConfig, ExperimentKind,
};
use obpursuit::pursuits::Algorithm;

#[test]
fn isotropic_noiseless_cell_is_recovered() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::PhaseTransition);
    cfg.kappa = 1.0;
    cfg.snr_db = None;
    cfg.m_over_n = vec![0.5];
    cfg.s_over_m = vec![0.1];
    cfg.repetitions = 100;
    cfg.algorithms = vec![
        Algorithm::Mp,
        Algorithm::Cosamp,
        Algorithm::Sp,
        Algorithm::Htp,
    ];
    let grid = phase_transition(&cfg).unwrap();
    for r in &grid.rows {
        assert!(
            r.success_rate() >= 0.95,
            "{}{} succeeded in {}/{}",
            if r.oblique { "ob" } else { "" },
            r.algorithm,
            r.successes,
            r.trials
        );
    }
}

#[test]
fn noisy_ab_comparison_reports_finite_errors() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::AbCompare);
    cfg.n = 64;
    cfg.m_over_n = vec![0.3, 0.6];
    cfg.s_over_m = vec![0.1, 0.2];
    cfg.repetitions = 5;
    let ab = ab_comparison(&cfg).unwrap();
    assert_eq!(ab.rows.len(), 4 * Algorithm::ALL.len());
    for r in &ab.rows {
        assert!(r.conventional_mean_error.is_finite() && r.oblique_mean_error.is_finite());
    }
}

#[test]
fn isotropic_ab_comparison_is_identical() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::AbCompare);
    cfg.n = 48;
    cfg.kappa = 1.0;
    cfg.m_over_n = vec![0.5];
    cfg.s_over_m = vec![0.1, 0.3];
    cfg.repetitions = 10;
    for r in &ab_comparison(&cfg).unwrap().rows {
        assert_eq!(r.conventional_successes, r.oblique_successes);
        assert!((r.conventional_mean_error - r.oblique_mean_error).abs() < 1e-9);
    }
}

#[test]
fn theta_medians_do_not_increase_with_m() {
    let cfg = ExperimentConfig::defaults(ExperimentKind::RbopTrend);
    assert_eq!((cfg.n, cfg.sparsity, cfg.repetitions), (64, 2, 20));
    let trend = rbop_trend(&cfg).unwrap();
    let medians: Vec<f64> = trend.rows.iter().map(|r| r.median_theta).collect();
    assert_eq!(trend.rows.len(), 3);
    assert!(trend.theta_nonincreasing(), "medians {medians:?}");
    assert!(trend.isotropy.dual_deviation < 1e-9);
}
