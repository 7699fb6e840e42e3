use std::collections::BTreeSet;

use spanbound::harness::{
    generate, paper_suite, parse_checks, run_suite, verify_bounds, CheckStatus, Dataset, Params, Shape, TheoremId, VerifyConfig,
};
use spanbound::widths::Exactness;
use spanbound::Error;

fn circle(n: usize) -> Dataset {
    generate(Shape::Circle, &Params::parse("r=1").unwrap(), n, 1).unwrap()
}

fn only(ids: &[TheoremId]) -> VerifyConfig {
    VerifyConfig {
        checks: Some(ids.to_vec()),
        ..VerifyConfig::default()
    }
}

#[test]
fn stretched_deaths_are_caught() {
    let data = circle(40);
    let clean = verify_bounds("circle", &data, &only(&[TheoremId::T9])).unwrap();
    assert_eq!(clean.violations(), 0);
    let bad = VerifyConfig {
        death_factor: 1.1,
        ..only(&[TheoremId::T9])
    };
    let report = verify_bounds("circle", &data, &bad).unwrap();
    assert!(report.violations() > 0);
    assert!(report
        .rows_of(TheoremId::T9)
        .any(|r| r.bound_exactness == Exactness::Exact && r.status == CheckStatus::Violated));
}

#[test]
fn reports_are_deterministic() {
    let data = generate(Shape::Uniform, &Params::parse("dim=2,side=3").unwrap(), 15, 4).unwrap();
    let config = VerifyConfig {
        seed: 4,
        ..VerifyConfig::default()
    };
    let a = verify_bounds("u", &data, &config).unwrap();
    let b = verify_bounds("u", &data, &config).unwrap();
    assert_eq!(a.deterministic_json(), b.deterministic_json());
    assert_eq!(a.checks_csv(), b.checks_csv());
}

#[test]
fn explicit_checks_with_unmet_prerequisites_fail() {
    let data = circle(20);
    let config = VerifyConfig {
        core: Some(spanbound::widths::mst_core(data.cloud().unwrap()).unwrap()),
        ..only(&[TheoremId::T6])
    };
    assert!(matches!(verify_bounds("c", &data, &config), Err(Error::Prerequisite { .. })));

    let metric = Dataset::Metric(data.metric().unwrap());
    assert!(matches!(verify_bounds("m", &metric, &only(&[TheoremId::T1])), Err(Error::Prerequisite { .. })));
    // the same theorem is skipped with a reason when not asked for by name
    let report = verify_bounds("m", &metric, &VerifyConfig::default()).unwrap();
    assert!(report.skipped.iter().any(|s| s.theorem_id == TheoremId::T1 && !s.reason.is_empty()));
    assert_eq!(report.rows_of(TheoremId::T1).count(), 0);
}

#[test]
fn check_lists_parse() {
    assert_eq!(parse_checks("T1, t4,T9").unwrap(), vec![TheoremId::T1, TheoremId::T4, TheoremId::T9]);
    assert!(parse_checks("T12").is_err());
}

#[test]
fn circle_extinction_matches_its_deficiency() {
    let report = verify_bounds("circle", &circle(120), &only(&[TheoremId::T4])).unwrap();
    let row = report.rows_of(TheoremId::T4).next().unwrap();
    assert_eq!(row.degree, 1);
    assert_eq!(row.bound_exactness, Exactness::Exact);
    assert!((row.measured - 1.0).abs() < 1e-9 && (row.bound_value - 1.0).abs() < 1e-9, "{row:?}");
    assert!(row.satisfied);
    // the cut locus of a regular polygon's boundary collapses to its center
    let d = report.quantities["cut_locus_hausdorff"];
    assert!((d - 1.0).abs() < 1e-3, "{d}");
}

#[test]
fn linf_sphere_vr_death_is_twice_its_deficiency() {
    let ms = generate(Shape::LinfSphere, &Params::default(), 40, 0).unwrap().metric().unwrap();
    let config = VerifyConfig {
        hcdef_subsample: 12,
        hcdef_exact_limit: 12,
        ..only(&[TheoremId::T8])
    };
    let report = verify_bounds("linf", &Dataset::Metric(ms), &config).unwrap();
    let row = report.rows_of(TheoremId::T8).next().unwrap();
    assert!((row.bound_value - 2.0).abs() < 1e-9, "{row:?}");
    assert!(row.measured > 1.8 && row.satisfied, "{row:?}");
}

#[test]
fn paper_suite_exercises_every_theorem() {
    let entries = paper_suite(0).unwrap();
    let names: BTreeSet<&str> = entries.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names.len(), entries.len());
    let reports = run_suite(&entries).unwrap();
    let mut seen = BTreeSet::new();
    for r in &reports {
        assert_eq!(r.violations(), 0, "{}", r.dataset.name);
        seen.extend(r.checks.iter().map(|c| c.theorem_id));
    }
    assert_eq!(seen, TheoremId::ALL.into_iter().collect());
}
