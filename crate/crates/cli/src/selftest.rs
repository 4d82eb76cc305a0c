//! Golden values for the bundled instances.

use cbcast_core::binning::{analytic_bits_per_symbol, BinningConfig, BinningPlan};
use cbcast_core::io::Instance;
use cbcast_core::lcb::{build_scheme, verify_scheme};
use cbcast_core::library;
use cbcast_core::matching::{
    self, scheme_4x3, MatchingInstance, StructureClass, DEFAULT_CYCLE_CAP,
};
use cbcast_core::oracle::{brute_capacity_l1, DEFAULT_NODE_BUDGET};
use num_rational::Ratio;
use serde_json::json;

use crate::commands::CliError;

const EPS: f64 = 1e-9;

struct Row {
    name: &'static str,
    expected: String,
    actual: String,
    pass: bool,
}

fn row(name: &'static str, expected: impl ToString, actual: impl ToString, pass: bool) -> Row {
    Row {
        name,
        expected: expected.to_string(),
        actual: actual.to_string(),
        pass,
    }
}

fn bundled(name: &str) -> Instance {
    library::load(name)
        .expect("bundled")
        .expect("bundled instances parse")
}

fn linear_rows(rows: &mut Vec<Row>, name: &'static str, cost: usize, cap: Ratio<u64>) {
    let Instance::Linear(l) = bundled(name) else {
        unreachable!()
    };
    match build_scheme(&l) {
        Ok(sol) => {
            let ok = verify_scheme(&l, &sol.scheme).all_passed();
            rows.push(row(
                name,
                format!("cost {cost}"),
                format!("cost {}", sol.scheme.cost_symbols),
                sol.scheme.cost_symbols == cost,
            ));
            rows.push(row(
                name,
                format!("capacity {cap}"),
                format!("capacity {}", sol.capacity),
                sol.capacity == cap,
            ));
            rows.push(row(
                name,
                "verify PASS",
                format!("verify {}", if ok { "PASS" } else { "FAIL" }),
                ok,
            ));
        }
        Err(e) => rows.push(row(name, "scheme", e, false)),
    }
}

fn matching_rows(rows: &mut Vec<Row>, name: &'static str, class: StructureClass, hstar: f64) {
    let Instance::Matching(mi) = bundled(name) else {
        unreachable!()
    };
    let b = matching::bounds(&mi, DEFAULT_CYCLE_CAP);
    rows.push(row(
        name,
        format!("class {class}"),
        format!("class {}", b.class),
        b.class == class,
    ));
    let h = b.hstar_bits.unwrap_or(f64::NAN);
    rows.push(row(
        name,
        format!("H* {hstar:.9}"),
        format!("H* {h:.9}"),
        (h - hstar).abs() < EPS,
    ));
}

fn collect() -> Vec<Row> {
    let mut rows = Vec::new();
    let log3 = 3f64.log2();

    linear_rows(&mut rows, "ternary7", 4, Ratio::new(7, 4));
    linear_rows(&mut rows, "butterfly", 1, Ratio::new(2, 1));
    linear_rows(&mut rows, "zero_sum", 1, Ratio::new(2, 1));

    matching_rows(&mut rows, "cb1", StructureClass::Maximal, 2.0);
    matching_rows(&mut rows, "cb2", StructureClass::Minimal, 4.0 - log3);
    let (Instance::Matching(c1), Instance::Matching(c2)) = (bundled("cb1"), bundled("cb2")) else {
        unreachable!()
    };
    let diff = match (matching::to_general(&c1), matching::to_general(&c2)) {
        (Ok(g1), Ok(g2)) => g1.entropy_profile().max_abs_diff(&g2.entropy_profile()),
        _ => f64::NAN,
    };
    rows.push(row(
        "cb1/cb2",
        "profiles equal",
        format!("max diff {diff:.1e}"),
        diff < EPS,
    ));

    let Instance::General(andor) = bundled("andor") else {
        unreachable!()
    };
    let want = 2.0 - 0.75 * log3;
    match brute_capacity_l1(&andor, DEFAULT_NODE_BUDGET) {
        Ok(r) => {
            rows.push(row(
                "andor",
                format!("one-shot {want:.9}"),
                format!("one-shot {:.9}", r.h_bits),
                (r.h_bits - want).abs() < EPS,
            ));
            rows.push(row(
                "andor",
                "rate < bound",
                format!("{:.4} < {:.4}", r.rate_l1, r.capacity_ub),
                r.rate_l1 < r.capacity_ub,
            ));
        }
        Err(e) => rows.push(row("andor", "oracle", e, false)),
    }

    let Instance::Matching(m43) = bundled("matching_4x3") else {
        unreachable!()
    };
    let b = matching::bounds(&m43, DEFAULT_CYCLE_CAP);
    rows.push(row(
        "matching_4x3",
        "gap 1 bit",
        format!("gap {}", b.gap_bits),
        (b.gap_bits - 1.0).abs() < EPS,
    ));
    let decodes = scheme_4x3(&m43)
        .map(|s| s.verify_exhaustive(&m43))
        .unwrap_or(false);
    rows.push(row("matching_4x3", "4x3 scheme decodes", decodes, decodes));

    for l in [100usize, 400, 1600] {
        let lf = l as f64;
        let closed = (2.0 - log3) + log3 / lf.sqrt() + (1.0 + 1.0 / lf.sqrt()).log2() / lf;
        let got = analytic_bits_per_symbol(4, 3, l);
        let plan = BinningPlan::new(&BinningConfig::new(4, 3, l, 1, 0))
            .map(|p| p.bits_per_symbol())
            .unwrap_or(f64::NAN);
        let name = match l {
            100 => "binning L=100",
            400 => "binning L=400",
            _ => "binning L=1600",
        };
        let ok = (got - closed).abs() < 1e-12 && (plan - closed).abs() < 1e-12;
        rows.push(row(name, format!("{closed:.12}"), format!("{got:.12}"), ok));
    }

    let maximal = MatchingInstance::cb1();
    let single = matching::to_general(&maximal)
        .ok()
        .and_then(|g| brute_capacity_l1(&g, DEFAULT_NODE_BUDGET).ok());
    let ok = single
        .as_ref()
        .is_some_and(|r| r.optimal && (r.h_bits - 2.0).abs() < EPS);
    rows.push(row(
        "cb1 oracle",
        "2 bits, optimal",
        single.map_or("error".into(), |r| format!("{:.9}", r.h_bits)),
        ok,
    ));
    rows
}

pub fn run(json_mode: bool) -> Result<(), CliError> {
    let rows = collect();
    let failed = rows.iter().filter(|r| !r.pass).count();
    if json_mode {
        let v: Vec<_> = rows
            .iter()
            .map(|r| json!({"instance": r.name, "expected": r.expected, "actual": r.actual, "pass": r.pass}))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({"rows": v, "failed": failed}))
                .expect("serializable")
        );
    } else {
        println!(
            "{:<16} {:<24} {:<24} result",
            "instance", "expected", "actual"
        );
        for r in &rows {
            println!(
                "{:<16} {:<24} {:<24} {}",
                r.name,
                r.expected,
                r.actual,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        println!("{} of {} checks passed", rows.len() - failed, rows.len());
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Analysis(format!(
            "{failed} self-test checks failed"
        )))
    }
}
