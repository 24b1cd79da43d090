//! The twelve acceptance checks, one PASS/FAIL line each.
//! Runs without the libtest harness so the lines always reach the output.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hilbw::hilbert::{self, IntersectionRequest};
use hilbw::rational::{fmt_q, qf};
use hilbw::ring::SurfaceRing;
use hilbw::verify::{self, Ranges, SuiteId, SuiteSpec, VerificationReport};

const ALL: [&str; 4] = ["p2", "p1xp1", "k3", "abelian"];

fn ring(name: &str) -> Arc<SurfaceRing> {
    Arc::new(SurfaceRing::builtin(name).expect("built-in surface"))
}

fn run(suite: SuiteId, surface: &str, adjust: impl Fn(&mut Ranges)) -> Result<VerificationReport, String> {
    let mut spec = SuiteSpec::new(suite, ring(surface), 8);
    adjust(&mut spec.ranges);
    verify::run_suite(&spec).map_err(|e| format!("{suite} on {surface}: {e}"))
}

/// Runs suites and folds them into one verdict.
fn suites(list: &[(SuiteId, &[&str])], adjust: impl Fn(SuiteId, &mut Ranges) + Copy) -> Result<String, String> {
    let mut records = 0;
    for (suite, surfaces) in list {
        for s in surfaces.iter() {
            let r = run(*suite, s, |x| adjust(*suite, x))?;
            if let Some(f) = r.first_failure() {
                return Err(format!("{}: {} [{}] {}", r.summary_line(), f.instance, f.route, f.detail.clone().unwrap_or_default()));
            }
            if r.records.is_empty() {
                return Err(format!("{suite} on {s} produced no records"));
            }
            records += r.records.len();
        }
    }
    Ok(format!("{records} records"))
}

fn no_change(_: SuiteId, _: &mut Ranges) {}

fn heisenberg() -> Result<String, String> {
    let abelian = SurfaceRing::builtin("abelian").unwrap();
    if !(0..abelian.dim() as u8).any(|i| abelian.parity(i as _) == 1) {
        return Err("abelian surface has no odd classes".into());
    }
    suites(&[(SuiteId::Heis, &ALL)], |_, r| {
        r.m = 4;
        r.n = 4;
    })
}

fn virasoro() -> Result<String, String> {
    let out = suites(&[(SuiteId::Vir, &ALL)], no_change)?;
    let k3 = run(SuiteId::Vir, "k3", |_| {})?;
    for m in -3i64..=3 {
        let label = format!("m={m} n={}", -m);
        let rec = k3
            .records
            .iter()
            .find(|r| r.instance == label && r.route == "terms")
            .ok_or_else(|| format!("missing record {label}"))?;
        let want = fmt_q(&qf((m * m * m - m) * 24, 12));
        if rec.value.as_deref() != Some(want.as_str()) {
            return Err(format!("central scalar at {label} on k3: {:?}, expected {want}", rec.value));
        }
    }
    Ok(format!("{out}; K3 central scalar at m=2 is 12"))
}

fn brackets_and_transfer() -> Result<String, String> {
    suites(&[(SuiteId::Thm31, &ALL), (SuiteId::Lem32, &ALL)], no_change)
}

fn higher_derivatives() -> Result<String, String> {
    let p2 = run(SuiteId::Thm42, "p2", |_| {})?;
    if p2.records.iter().any(|r| r.route == "terms" && r.checked != 1) {
        return Err("on p2 only the point class satisfies K·α = 0".into());
    }
    suites(&[(SuiteId::Thm42, &["k3", "abelian", "p2"]), (SuiteId::Rmk43, &["k3", "abelian", "p2"])], no_change)
}

fn chern_uniqueness() -> Result<String, String> {
    suites(&[(SuiteId::Thm46Unique, &["k3", "abelian"])], no_change)
}

fn chern_classes() -> Result<String, String> {
    suites(&[(SuiteId::Cor48, &["k3", "abelian"])], no_change)
}

fn intersections() -> Result<String, String> {
    // oracle first: spot values from the closed sum
    let spot = [(vec![0], 1, qf(1, 1)), (vec![2], 2, qf(-1, 4)), (vec![0, 0], 2, qf(1, 1))];
    for (ks, n, want) in &spot {
        let req = IntersectionRequest { exponents: ks.clone(), n: *n };
        let oracle = hilbert::intersection_number_closed(&req).map_err(|e| e.to_string())?;
        if &oracle != want {
            return Err(format!("closed sum at k={ks:?} n={n} is {}, expected {}", fmt_q(&oracle), fmt_q(want)));
        }
    }
    let out = suites(&[(SuiteId::Rmk410, &ALL)], no_change)?;
    let mut values: BTreeMap<String, String> = BTreeMap::new();
    for s in ALL {
        for rec in run(SuiteId::Rmk410, s, |_| {})?.records {
            let v = rec.value.clone().unwrap_or_default();
            if let Some(prev) = values.insert(rec.instance.clone(), v.clone()) {
                if prev != v {
                    return Err(format!("{} differs across surfaces: {prev} vs {v}", rec.instance));
                }
            }
        }
    }
    Ok(format!("{out}; {} requests agree on all four surfaces", values.len()))
}

fn w_algebra_closure() -> Result<String, String> {
    let mut total = 0;
    for s in ["k3", "abelian", "p2"] {
        let r = run(SuiteId::Thm55, s, |_| {})?;
        if let Some(f) = r.first_failure() {
            return Err(format!("{}: {} {}", r.summary_line(), f.instance, f.detail.clone().unwrap_or_default()));
        }
        for (p, q) in [(0, 0), (0, 1), (1, 0), (0, 2), (2, 0), (1, 1), (3, 3), (2, 4)] {
            let prefix = format!("p={p} q={q} ");
            if !r.records.iter().any(|x| x.instance.starts_with(&prefix)) {
                return Err(format!("no records for {prefix}on {s}"));
            }
        }
        total += r.records.len();
    }
    Ok(format!("{total} records, exceptional pairs included"))
}

fn w_generators() -> Result<String, String> {
    suites(&[(SuiteId::Def51Ids, &ALL), (SuiteId::Lem52, &ALL), (SuiteId::Lem53, &ALL)], no_change)
}

fn derivative_and_structure_constants() -> Result<String, String> {
    suites(&[(SuiteId::Rmk56, &["k3"]), (SuiteId::Thm57, &["abelian"])], no_change)
}

fn field_derivatives() -> Result<String, String> {
    suites(&[(SuiteId::Lem61, &["p2"])], no_change)
}

fn mutations() -> Result<String, String> {
    let mut caught = 0;
    for suite in SuiteId::all() {
        let surface = if suite == SuiteId::Thm57 { "abelian" } else { "p2" };
        let mut spec = SuiteSpec::new(suite, ring(surface), 8);
        spec.mutate = true;
        let r = verify::run_suite(&spec).map_err(|e| format!("{suite}: {e}"))?;
        if r.failed == 0 {
            return Err(format!("mutated {suite} still passes"));
        }
        caught += 1;
    }
    Ok(format!("{caught} of 17 suites report counterexamples"))
}

type Check = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let checks: [(&str, Check, u64); 12] = [
        ("Heisenberg relations", heisenberg, 60),
        ("Virasoro relations and central scalar", virasoro, 120),
        ("brackets with L, derivative of a, transfer rules", brackets_and_transfer, 300),
        ("higher derivatives and shifted sums", higher_derivatives, 300),
        ("Chern character operators: uniqueness triple", chern_uniqueness, 180),
        ("Chern classes: operator vs closed expansion", chern_classes, 180),
        ("intersection numbers vs closed sum", intersections, 120),
        ("W-algebra closure grid", w_algebra_closure, 900),
        ("W generators: low cases, bracket with a, field form", w_generators, 300),
        ("W derivative and structure constants", derivative_and_structure_constants, 300),
        ("Fourier-component derivative rules", field_derivatives, 120),
        ("harness integrity under mutation", mutations, 120),
    ];
    let mut failed = 0;
    for (i, (title, check, budget)) in checks.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let took = t.elapsed();
        let over = took > Duration::from_secs(*budget);
        let (status, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget}s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {status} {title}: {detail} ({:.1}s, budget {budget}s)", i + 1, took.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
