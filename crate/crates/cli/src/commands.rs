use std::fmt;
use std::path::Path;

use cbcast_core::binning::{
    run_cb2_scheme, run_matching_scheme, simulate_binning, BinningConfig, SchemeOptions,
    SimulationResult,
};
use cbcast_core::distributions::{converse_bound, from_linear, subset_name, GeneralCbInstance};
use cbcast_core::io::{load_instance, Instance, IoError};
use cbcast_core::lcb::{build_scheme, verify_scheme, LcbSolution, LinearCbInstance, LinearScheme};
use cbcast_core::library;
use cbcast_core::matching::{
    self, classify as classify_matching, MatchingInstance, StructureClass,
};
use cbcast_core::oracle::{brute_capacity_l1, OracleError, DEFAULT_NODE_BUDGET, EXACT_ATOM_LIMIT};
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Analysis(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Analysis(m) => f.write_str(m),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        if e.is_parse() {
            CliError::Parse(e.to_string())
        } else {
            CliError::Analysis(e.to_string())
        }
    }
}

fn analysis(e: impl fmt::Display) -> CliError {
    CliError::Analysis(e.to_string())
}

/// A file path, or the name of a bundled instance when no such file exists.
pub fn resolve(target: &str) -> Result<Instance, CliError> {
    if Path::new(target).exists() {
        return Ok(load_instance(target)?);
    }
    let name = Path::new(target)
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or(target);
    match library::load(name) {
        Some(r) => Ok(r?),
        None => Err(CliError::Parse(format!(
            "{target}: no such file or bundled instance (bundled: {})",
            library::names().collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn emit(json_mode: bool, value: &Value, text: impl FnOnce() -> String) {
    if json_mode {
        println!(
            "{}",
            serde_json::to_string_pretty(value).expect("serializable")
        );
    } else {
        print!("{}", text());
    }
}

fn want_linear(inst: Instance) -> Result<LinearCbInstance, CliError> {
    match inst {
        Instance::Linear(l) => Ok(l),
        other => Err(analysis(format!(
            "expected a linear instance, got a {} instance",
            other.kind()
        ))),
    }
}

fn want_matching(inst: Instance) -> Result<MatchingInstance, CliError> {
    match inst {
        Instance::Matching(m) => Ok(m),
        other => Err(analysis(format!(
            "expected a matching instance, got a {} instance",
            other.kind()
        ))),
    }
}

fn solution_json(inst: &LinearCbInstance, sol: &LcbSolution) -> Value {
    let d = &sol.decomposition;
    json!({
        "kind": "linear",
        "field": inst.field().modulus(),
        "m": inst.m(),
        "demand_rank": inst.demand_rank(),
        "converse_symbols": sol.converse_symbols,
        "cost_symbols": sol.scheme.cost_symbols,
        "capacity": sol.capacity.to_string(),
        "tight": sol.scheme.cost_symbols == sol.converse_symbols,
        "decomposition": {
            "user1": {"a": d.n1a(), "b": d.n1b(), "c": d.n1c()},
            "user2": {"a": d.n2a(), "b": d.n2b(), "c": d.n2c()},
        },
        "bounds": sol.bounds,
    })
}

fn solution_text(inst: &LinearCbInstance, sol: &LcbSolution) -> String {
    let d = &sol.decomposition;
    format!(
        "linear instance over {}, m = {}\n\
         demand rank          {}\n\
         converse             {} symbols\n\
         parts (a b c)        user 1: {} {} {}   user 2: {} {} {}\n\
         scheme cost          {} symbols\n\
         capacity             {}\n\
         tight                {}\n",
        inst.field(),
        inst.m(),
        inst.demand_rank(),
        sol.converse_symbols,
        d.n1a(),
        d.n1b(),
        d.n1c(),
        d.n2a(),
        d.n2b(),
        d.n2c(),
        sol.scheme.cost_symbols,
        sol.capacity,
        sol.scheme.cost_symbols == sol.converse_symbols,
    )
}

fn general_bounds_json(g: &GeneralCbInstance, budget: u64) -> Result<Value, CliError> {
    let b = converse_bound(g).map_err(analysis)?;
    let single = match brute_capacity_l1(g, budget) {
        Ok(r) => Some(r),
        Err(OracleError::TooLarge(_)) | Err(OracleError::SearchBudgetExceeded { .. }) => None,
        Err(e) => return Err(analysis(e)),
    };
    let b = match &single {
        Some(r) => b.with_achievability(r.h_bits),
        None => b,
    };
    let note = if b.tight {
        "one-shot optimum meets the converse; capacity determined"
    } else {
        "capacity open: bracket only"
    };
    Ok(json!({
        "kind": "general",
        "bounds": b,
        "single_letter": single,
        "note": note,
    }))
}

fn general_bounds_text(v: &Value) -> String {
    let b = &v["bounds"];
    let mut s = format!(
        "H(w1,w2)             {:.6} bits\n\
         converse cost        >= {:.6} bits\n\
         capacity             <= {:.6}\n",
        b["h_w1w2"].as_f64().unwrap_or(f64::NAN),
        b["converse_cost_lb"].as_f64().unwrap_or(f64::NAN),
        b["capacity_ub"].as_f64().unwrap_or(f64::NAN),
    );
    if let Some(lb) = b["capacity_lb"].as_f64() {
        s += &format!(
            "one-shot cost        {:.6} bits\ncapacity             >= {:.6}\n",
            b["achiev_cost_ub"].as_f64().unwrap_or(f64::NAN),
            lb
        );
    }
    s += &format!(
        "note                 {}\n",
        v["note"].as_str().unwrap_or("")
    );
    s
}

fn matching_bounds_json(mi: &MatchingInstance, cap: usize) -> Value {
    let b = matching::bounds(mi, cap);
    let note = match b.class {
        StructureClass::Maximal | StructureClass::Minimal => "bounds tight for this class",
        _ => "capacity open: bracket only",
    };
    json!({"kind": "matching", "m": mi.m(), "m1": mi.m1(), "m2": mi.m2(), "bounds": b, "note": note})
}

fn matching_bounds_text(v: &Value) -> String {
    let b = &v["bounds"];
    let f = |k: &str| b[k].as_f64().unwrap_or(f64::NAN);
    let mut s = format!(
        "matching instance m = {}, grid {}x{}\n\
         class                {}\n\
         H* bracket           [{:.6}, {:.6}] bits\n\
         capacity bracket     [{:.6}, {:.6}]\n\
         H(w1,w2)             {:.6} bits\n",
        v["m"],
        v["m1"],
        v["m2"],
        b["class"].as_str().unwrap_or("?"),
        f("hstar_lb_bits"),
        f("hstar_ub_bits"),
        f("capacity_lb"),
        f("capacity_ub"),
        f("h_w1w2_bits"),
    );
    if let Some(h) = b["hstar_bits"].as_f64() {
        s += &format!("H*                   {h:.6} bits\n");
    }
    s += &format!(
        "note                 {}\n",
        v["note"].as_str().unwrap_or("")
    );
    s
}

pub fn analyze(target: &str, json_mode: bool) -> Result<(), CliError> {
    match resolve(target)? {
        Instance::Linear(l) => {
            let sol = build_scheme(&l).map_err(analysis)?;
            let rep = verify_scheme(&l, &sol.scheme);
            let mut v = solution_json(&l, &sol);
            v["verify"] = json!(rep);
            emit(json_mode, &v, || {
                format!(
                    "{}verification         {}\n",
                    solution_text(&l, &sol),
                    pass(rep.all_passed())
                )
            });
            if rep.all_passed() {
                Ok(())
            } else {
                Err(analysis("scheme verification failed"))
            }
        }
        Instance::General(g) => {
            let profile = g.entropy_profile();
            let mut v = general_bounds_json(&g, DEFAULT_NODE_BUDGET)?;
            v["entropy_profile"] = json!(profile.to_map());
            v["atoms"] = json!(g.atoms().len());
            emit(json_mode, &v, || {
                let mut s = format!("general instance with {} atoms\n", g.atoms().len());
                for (mask, h) in profile.iter().filter(|(m, _)| *m != 0) {
                    s += &format!("  H({:<15}) = {h:.6}\n", subset_name(mask));
                }
                s + &general_bounds_text(&v)
            });
            Ok(())
        }
        Instance::Matching(mi) => {
            let v = matching_bounds_json(&mi, matching::DEFAULT_CYCLE_CAP);
            emit(json_mode, &v, || matching_bounds_text(&v));
            Ok(())
        }
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn solve(target: &str, out: Option<&Path>, json_mode: bool) -> Result<(), CliError> {
    let l = want_linear(resolve(target)?)?;
    let sol = build_scheme(&l).map_err(analysis)?;
    let rep = verify_scheme(&l, &sol.scheme);
    let scheme_json = sol.scheme.to_json();
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&scheme_json).expect("serializable") + "\n";
        std::fs::write(path, text)
            .map_err(|e| analysis(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut v = solution_json(&l, &sol);
    v["scheme"] = scheme_json;
    v["verify"] = json!(rep);
    emit(json_mode, &v, || {
        let mut s = solution_text(&l, &sol);
        s += "broadcast columns\n";
        for j in 0..sol.scheme.s_cols.cols() {
            s += &format!("  {:?}\n", sol.scheme.s_cols.column(j));
        }
        s + &format!("{rep}")
    });
    if rep.all_passed() {
        Ok(())
    } else {
        Err(analysis("scheme verification failed"))
    }
}

pub fn verify(target: &str, scheme_path: &Path, json_mode: bool) -> Result<(), CliError> {
    let l = want_linear(resolve(target)?)?;
    let text = std::fs::read_to_string(scheme_path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", scheme_path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", scheme_path.display())))?;
    let scheme = LinearScheme::from_json(&v, &l).map_err(|e| CliError::Parse(e.to_string()))?;
    let rep = verify_scheme(&l, &scheme);
    emit(json_mode, &json!(rep), || format!("{rep}"));
    if rep.all_passed() {
        Ok(())
    } else {
        Err(analysis("scheme verification failed"))
    }
}

pub fn classify(target: &str, cap: usize, json_mode: bool) -> Result<(), CliError> {
    let mi = want_matching(resolve(target)?)?;
    let class = classify_matching(&mi, cap);
    let v = json!({"class": class, "m": mi.m(), "m1": mi.m1(), "m2": mi.m2(), "cycle_cap": cap});
    emit(json_mode, &v, || format!("class                {class}\n"));
    Ok(())
}

pub fn bounds(target: &str, cap: usize, json_mode: bool) -> Result<(), CliError> {
    match resolve(target)? {
        Instance::Linear(l) => {
            let sol = build_scheme(&l).map_err(analysis)?;
            let v = solution_json(&l, &sol);
            emit(json_mode, &v, || solution_text(&l, &sol));
        }
        Instance::General(g) => {
            let v = general_bounds_json(&g, DEFAULT_NODE_BUDGET)?;
            emit(json_mode, &v, || general_bounds_text(&v));
        }
        Instance::Matching(mi) => {
            let v = matching_bounds_json(&mi, cap);
            emit(json_mode, &v, || matching_bounds_text(&v));
        }
    }
    Ok(())
}

pub fn oracle(target: &str, budget: u64, json_mode: bool) -> Result<(), CliError> {
    let g = match resolve(target)? {
        Instance::General(g) => g,
        Instance::Linear(l) => from_linear(&l).map_err(analysis)?,
        Instance::Matching(mi) => matching::to_general(&mi).map_err(analysis)?,
    };
    match brute_capacity_l1(&g, budget) {
        Ok(r) => {
            let v = json!({
                "h_bits": r.h_bits,
                "h_w1w2": r.h_w1w2,
                "rate_l1": r.rate_l1,
                "capacity_ub": r.capacity_ub,
                "gap": r.gap,
                "optimal": r.optimal,
                "method": r.coloring.method,
                "num_colors": r.coloring.num_colors,
                "colors": r.coloring.colors,
            });
            emit(json_mode, &v, || {
                format!(
                    "one-shot cost        {:.5} bits ({}, {} colors, {})\n\
                     one-shot rate        {:.4}\n\
                     capacity             <= {:.4}\n\
                     gap                  {:.4}\n",
                    r.h_bits,
                    if r.optimal {
                        "optimal"
                    } else {
                        "not certified"
                    },
                    r.coloring.num_colors,
                    r.coloring.method,
                    r.rate_l1,
                    r.capacity_ub,
                    r.gap,
                )
            });
            Ok(())
        }
        Err(OracleError::SearchBudgetExceeded { best }) => {
            let v = json!({"h_bits": best.h_bits, "optimal": false, "nodes": best.nodes, "colors": best.colors});
            emit(json_mode, &v, || {
                format!(
                    "search budget exhausted after {} nodes (support {} atoms > exact limit {EXACT_ATOM_LIMIT})\n\
                     best one-shot cost   {:.5} bits (not certified)\n",
                    best.nodes,
                    g.atoms().len(),
                    best.h_bits
                )
            });
            Err(analysis("oracle search budget exceeded"))
        }
        Err(e) => Err(analysis(e)),
    }
}

pub struct SimArgs {
    pub n1: Option<u64>,
    pub n2: Option<u64>,
    pub l: usize,
    pub trials: usize,
    pub seed: u64,
    pub force_fallback: bool,
}

fn sim_text(r: &SimulationResult) -> String {
    let mut s = format!(
        "L = {}, {} trials, seed {} ({} mode)\n\
         bits per symbol      {:.6} ± {:.6}\n\
         analytic             {:.6}\n\
         binning failures     {:.6}\n\
         chebyshev bound      {:.6e}\n\
         decode errors        {}\n",
        r.l,
        r.trials,
        r.seed,
        r.mode,
        r.bits_per_symbol_mean,
        r.bits_per_symbol_std,
        r.analytic_bits_per_symbol,
        r.binning_failure_rate,
        r.chebyshev_bound,
        r.decode_errors
    );
    if let Some(c) = r.class {
        s += &format!("class                {c}\n");
    }
    if let Some(x) = &r.scheme_4x3 {
        s += &format!(
            "4x3 one-shot scheme  {:.6} bits per symbol, exhaustive decode {}\n",
            x.bits_per_symbol,
            pass(x.exhaustive_decode)
        );
    }
    s
}

pub fn simulate(target: Option<&str>, a: &SimArgs, json_mode: bool) -> Result<(), CliError> {
    let opts = SchemeOptions {
        l: a.l,
        trials: a.trials,
        seed: a.seed,
        force_fallback: a.force_fallback,
    };
    let r = match target {
        Some(target) => {
            let mi = want_matching(resolve(target)?)?;
            if mi == MatchingInstance::cb2() {
                run_cb2_scheme(&opts)
            } else {
                run_matching_scheme(&mi, &opts)
            }
        }
        None => {
            let (n1, n2) = (a.n1.unwrap_or(0), a.n2.unwrap_or(0));
            simulate_binning(&BinningConfig::new(n1, n2, a.l, a.trials, a.seed))
        }
    }
    .map_err(analysis)?;
    emit(json_mode, &json!(r), || sim_text(&r));
    if r.decode_errors == 0 {
        Ok(())
    } else {
        Err(analysis(format!("{} decode errors", r.decode_errors)))
    }
}
