use std::sync::Arc;

use hilbw::error::Error;
use hilbw::ring::SurfaceRing;
use hilbw::verify::{list_suites, run_suite, ClassSelection, SuiteId, SuiteSpec};

fn spec(suite: SuiteId, surface: &str, cutoff: u32) -> SuiteSpec {
    SuiteSpec::new(suite, Arc::new(SurfaceRing::builtin(surface).unwrap()), cutoff)
}

#[test]
fn catalog() {
    let suites = list_suites();
    assert_eq!(suites.len(), 17);
    let ids: Vec<&str> = suites.iter().map(|s| s.0).collect();
    assert!(ids.contains(&"thm55") && ids.contains(&"lem61"));
    for id in ids {
        assert_eq!(id.parse::<SuiteId>().unwrap().as_str(), id);
    }
    assert!("thm99".parse::<SuiteId>().is_err());
}

#[test]
fn heisenberg_on_p2_at_cutoff_six() {
    let mut s = spec(SuiteId::Heis, "p2", 6);
    s.ranges.m = 3;
    s.ranges.n = 3;
    let r = run_suite(&s).unwrap();
    assert!(r.all_passed());
    assert_eq!(r.records.len(), 36);
}

#[test]
fn reports_are_deterministic() {
    let mut s = spec(SuiteId::Thm31, "p1xp1", 6);
    s.ranges.m = 2;
    s.ranges.n = 2;
    s.ranges.k = 2;
    let a = run_suite(&s).unwrap();
    let b = run_suite(&s).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.records.iter().all(|r| r.millis.is_none()));
}

#[test]
fn negated_omega_is_caught() {
    let mut s = spec(SuiteId::Thm55, "p2", 6);
    s.ranges.pq = 4;
    s.ranges.m = 1;
    s.ranges.n = 1;
    s.action_window = Some(2);
    assert!(run_suite(&s).unwrap().all_passed());
    s.mutate = true;
    let r = run_suite(&s).unwrap();
    let f = r.first_failure().expect("mutation must be detected");
    assert!(f.detail.as_deref().unwrap_or("").contains("leftover"), "{f:?}");
}

#[test]
fn structure_constants_need_flat_surface() {
    let err = run_suite(&spec(SuiteId::Thm57, "k3", 8)).unwrap_err();
    assert!(matches!(err, Error::Invalid(_)));
}

#[test]
fn named_classes() {
    let mut s = spec(SuiteId::Lem52, "k3", 6);
    s.classes = ClassSelection::Named(vec!["x".into(), "u1 + v1".into()]);
    s.ranges.p = 2;
    s.ranges.n = 2;
    assert!(run_suite(&s).unwrap().all_passed());
    s.classes = ClassSelection::Named(vec!["1 + x".into()]);
    s.suite = SuiteId::Heis;
    // 1 + x is even: accepted
    assert!(run_suite(&s).is_ok());
    s.classes = ClassSelection::Named(vec!["nope".into()]);
    assert!(run_suite(&s).is_err());
}

#[test]
fn odd_classes_with_mixed_parity_rejected() {
    let mut s = spec(SuiteId::Heis, "abelian", 6);
    let ring = SurfaceRing::builtin("abelian").unwrap();
    let odd = (0..ring.dim()).find(|&i| ring.parity(i as _) == 1).unwrap();
    s.classes = ClassSelection::Named(vec![format!("1 + {}", ring.basis_name(odd as _))]);
    assert!(matches!(run_suite(&s), Err(Error::MixedParity(_))));
}
