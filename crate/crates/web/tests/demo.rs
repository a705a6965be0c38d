use spindrive_web::{calibration, entanglement_curves, transfer_curves};

#[test]
fn calibration_at_zero_weight() {
    let c = calibration(0.0, 100.0).unwrap();
    assert!((c.ratio - 2.404825557695773).abs() < 1e-10);
    assert!(c.weight.abs() < 1e-12);
    let c = calibration(0.5, 10.0).unwrap();
    assert!((c.weight - 0.5).abs() < 1e-10);
    assert!(calibration(-0.9, 10.0).is_err());
}

#[test]
fn transfer_demo_reaches_the_far_end() {
    let c = transfer_curves(7, 50.0, 0.0, 2.0).unwrap();
    assert_eq!(c.labels(), ["driven", "effective", "undriven"]);
    assert_eq!(c.times().len(), c.column(0).len());
    let driven = c.peak(0);
    assert!(driven[1] > 0.97, "{driven:?}");
    assert!((driven[0] - std::f64::consts::FRAC_PI_2).abs() < 0.1);
    assert!(c.column(2).iter().all(|v| *v < 0.9));
}

#[test]
fn entanglement_demo_improves_on_the_bare_chain() {
    let c = entanglement_curves(3, 2.0, 1.0, 50.0, 4.0).unwrap();
    assert!(c.peak(0)[1] > c.peak(2)[1]);
    assert!(c.columns().iter().flatten().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn bad_parameters_are_errors() {
    assert!(transfer_curves(1, 50.0, 0.0, 1.0).is_err());
    assert!(entanglement_curves(3, 2.0, 1.0, -1.0, 1.0).is_err());
}
