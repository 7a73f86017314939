use vcvrl_web::{momentum_curve, DemoTrainer, Volume};

#[test]
fn volume_slices_are_rgba_planes() {
    let v = Volume::generate(3, 0.1, 5).unwrap();
    let plane = v.height() * v.width();
    let img = v.slice_rgba(v.depth() / 2, true).unwrap();
    assert_eq!(img.len(), 4 * plane);
    assert!(img.chunks(4).all(|p| p[3] == 255));
    assert!(v.foreground_fraction() > 0.0);
    assert!(v.slice_rgba(v.depth(), false).is_err());
    assert!(Volume::generate(0, -1.0, 5).is_err());
}

#[test]
fn momentum_curve_runs_from_base_to_zero() {
    let c = momentum_curve(100, 1.0, 11).unwrap();
    assert_eq!(c.len(), 11);
    assert!((c[0] - 1.0).abs() < 1e-3);
    assert!(c[10].abs() < 1e-12);
    assert!(c.windows(2).all(|w| w[1] <= w[0]));
    assert!(momentum_curve(0, 1.0, 5).is_err());
}

#[test]
fn trainer_steps_and_samples_anchors() {
    let mut t = DemoTrainer::new(1, "hybrid", 16, 3).unwrap();
    assert_eq!(t.total_iterations(), 3);
    let first = t.step().unwrap();
    let record: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(record["iteration"], 1);
    assert!(record["loss_sim"].as_f64().is_some());
    while !t.finished() {
        t.step().unwrap();
    }
    assert!(t.step().is_err());
    let f1 = t.validation_f1().unwrap();
    assert!((0.0..=1.0).contains(&f1));
    assert_eq!(
        t.prediction_rgba(0).unwrap().len(),
        4 * t.height() * t.width()
    );

    let view = t.sample_anchors("hybrid", 16, 9).unwrap();
    assert_eq!(view.from_pool() + view.from_hard(), 16);
    if view.hard_count() > 0 {
        assert_eq!(view.from_hard(), 8);
    }
    let marked: usize = (0..t.depth()).map(|z| view.slice_count(z)).sum();
    assert!((1..=16).contains(&marked));
    assert!(t.sample_anchors("sideways", 16, 9).is_err());
}

#[test]
fn baseline_trainer_has_no_siamese_loss() {
    let mut t = DemoTrainer::new(1, "none", 16, 2).unwrap();
    let record: serde_json::Value = serde_json::from_str(&t.step().unwrap()).unwrap();
    assert!(record["loss_sim"].is_null());
    assert!(t.parameter_count() > 0);
}
