use kato_core::experiments::*;
use kato_core::norms::Exponent;
use kato_core::Error;

fn scaling(alpha: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(ExperimentKind::Scaling);
    c.scales = vec![8.0, 16.0, 32.0];
    c.alpha = alpha;
    c
}

fn schema() -> serde_json::Value {
    serde_json::from_str(REPORT_SCHEMA).unwrap()
}

fn assert_valid(report: &Report) {
    let instance: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn sabotaged_alpha_fails_the_scaling_criterion() {
    let honest = run(&scaling(0.5)).unwrap();
    assert!(honest.passed(), "{:?}", honest.criteria);
    let sabotaged = run(&scaling(1.0)).unwrap();
    assert!(!sabotaged.criteria[0].passed);
    assert!(!sabotaged.passed());
    assert!((sabotaged.criteria[0].measured - honest.criteria[0].measured).abs() < 0.05);
}

#[test]
fn reports_validate_against_the_schema() {
    let mut wp = ExperimentConfig::defaults(ExperimentKind::WavepacketAudit);
    wp.samples = 2;
    for cfg in [scaling(0.5), wp, ExperimentConfig::defaults(ExperimentKind::DecayAudit)] {
        assert_valid(&run(&cfg).unwrap());
    }
    let mut verify = Report::new("verify", Default::default());
    for c in acceptance_criteria().iter().filter(|c| ["1", "2", "10"].contains(&c.id)) {
        let ev = evaluate(c);
        verify.timing.record(&format!("criterion {}", c.id), ev.seconds, Some(c.limit_seconds));
        verify.criteria.push(ev.result);
    }
    assert_valid(&verify);

    let mut broken: serde_json::Value = serde_json::from_str(&verify.to_json().unwrap()).unwrap();
    broken.as_object_mut().unwrap().remove("environment");
    assert!(!jsonschema::is_valid(&schema(), &broken));
    broken = serde_json::from_str(&verify.to_json().unwrap()).unwrap();
    broken["kind"] = "bogus".into();
    assert!(!jsonschema::is_valid(&schema(), &broken));
}

#[test]
fn reports_are_reproducible() {
    let sparse = ExperimentConfig::defaults(ExperimentKind::SparseAudit);
    let a = run(&sparse).unwrap();
    let b = run(&sparse).unwrap();
    assert_eq!(a.deterministic_json().unwrap(), b.deterministic_json().unwrap());
    assert_eq!(a.measurements_csv().unwrap(), b.measurements_csv().unwrap());
    assert!(a.passed(), "{:?}", a.criteria);
    let c = run(&scaling(0.5)).unwrap();
    let d = run(&scaling(0.5)).unwrap();
    assert_eq!(c.deterministic_json().unwrap(), d.deterministic_json().unwrap());
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::DecayAudit);
    cfg.output = Some(dir.path().join("decay"));
    let report = run(&cfg).unwrap();
    assert!(report.passed(), "{:?}", report.criteria);
    let out = dir.path().join("decay");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["kind"], "decay-audit");
    assert!(std::fs::read_to_string(out.join("measurements.csv")).unwrap().starts_with("series,scale,value\n"));
    assert!(std::fs::read_to_string(out.join("plot.dat")).unwrap().contains("# index 0"));
}

#[test]
fn invalid_configs_name_the_field() {
    let mut c = scaling(0.5);
    c.scales = vec![8.0, 16.0];
    assert!(matches!(run(&c), Err(Error::Config(m)) if m.contains("`R`")));
    let mut t = ExperimentConfig::defaults(ExperimentKind::Transfer);
    t.r = Exponent::Infinity;
    assert!(matches!(run(&t), Err(Error::Config(m)) if m.contains("`r`")));
    let mut s = ExperimentConfig::defaults(ExperimentKind::SparseAudit);
    s.levels = 0;
    assert!(matches!(run(&s), Err(Error::Config(m)) if m.contains("`levels`")));
}

#[test]
fn maximal_run_carries_the_sobolev_display() {
    let mut c = ExperimentConfig::defaults(ExperimentKind::Maximal);
    c.scales = vec![2.0, 4.0, 8.0];
    let report = run(&c).unwrap();
    assert_eq!(report.series("sobolev").count(), 3);
    assert!(report.fit("sobolev").is_some());
    assert_eq!(report.criteria.len(), 1);
    assert!(report.series("norm").all(|m| m.value >= m.details["initial"]));
}

#[test]
fn transfer_run_reports_tails_and_monotonicity() {
    let mut c = ExperimentConfig::defaults(ExperimentKind::Transfer);
    c.scales = vec![2.0, 4.0, 8.0];
    let report = run(&c).unwrap();
    let ids: Vec<&str> = report.criteria.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids, ["transfer", "window-monotonicity"]);
    assert!(report.criteria[1].passed);
    for m in report.series("global") {
        let tail = m.details["tail_fraction"];
        assert!((0.0..=1.0).contains(&tail));
        assert_eq!(m.details["T"], 8.0 * m.scale * m.scale);
    }
}

#[test]
fn config_file_round_trip() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/sharpness.cfg")).unwrap();
    let c = ExperimentConfig::parse(&text).unwrap();
    assert_eq!(c.check, SlopeCheck::Exceed);
    assert_eq!(c.alpha, 0.75);
    let echoed: String = c.echo().iter().filter(|(k, _)| *k != "output").map(|(k, v)| format!("{k} = {v}\n")).collect();
    let again = ExperimentConfig::parse(&echoed.replace("r_tilde = none\n", "")).unwrap();
    assert_eq!(again.echo().get("alpha"), c.echo().get("alpha"));
    assert_eq!(again.scales, c.scales);
}
