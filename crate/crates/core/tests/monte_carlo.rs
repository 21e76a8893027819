use bellgarch::montecarlo::{preset, run_study, McConfig};

fn config(name: &str, reps: usize, seed: u64) -> McConfig<f64> {
    let mut c = McConfig::new(preset(name).unwrap(), seed);
    c.sample_sizes = vec![100, 200];
    c.replications = reps;
    c
}

#[test]
fn fixed_seed_is_bit_identical() {
    let a = run_study(&config("A2", 12, 9)).unwrap();
    let b = run_study(&config("A2", 12, 9)).unwrap();
    assert_eq!(a, b);
    let c = run_study(&config("A2", 12, 10)).unwrap();
    assert_ne!(a.rows[0].stats, c.rows[0].stats);
}

#[test]
fn counts_reconcile() {
    let r = run_study(&config("B1", 10, 1)).unwrap();
    for row in &r.rows {
        assert_eq!(row.converged + row.failed, 10);
        assert!(row.stats.iter().all(|s| s.made >= 0.0 && s.mse >= 0.0));
    }
}

#[test]
fn single_replication_is_absolute_error() {
    let r = run_study(&config("A1", 1, 4)).unwrap();
    for row in &r.rows {
        for (s, t) in row.stats.iter().zip(&r.truth) {
            assert_eq!(s.made, (s.mean - t).abs());
            assert_eq!(s.mse, s.made * s.made);
        }
    }
}

#[test]
fn invalid_config_is_rejected() {
    let mut c = config("A1", 0, 1);
    assert!(run_study(&c).is_err());
    c.replications = 5;
    c.sample_sizes = vec![10];
    assert!(run_study(&c).is_err());
}
