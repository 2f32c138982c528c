//! One pass/fail line per acceptance criterion; exits nonzero if any fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use skewgroupoid::action::PartialActionData;
use skewgroupoid::algebra::AlgElem;
use skewgroupoid::examples;
use skewgroupoid::extension::{
    artinian_verdict, center_of_coarse_skew, coarse_criterion, coarse_sum, frobenius_chain, separable_composite,
    separable_direct, separable_group_level, skew_tensor_space, trace_condition_holds, trace_maps,
};
use skewgroupoid::fuzz::restrict_to_ideal;
use skewgroupoid::instance::{fixtures, parse_instance_str, InstanceFile, Meta};
use skewgroupoid::matrix::Matrix;
use skewgroupoid::pipeline::{self, run_pipeline, PipelineOptions};
use skewgroupoid::rational::{rat, Rational};
use skewgroupoid::report::Status;
use skewgroupoid::skew::{factorize, Factorization};

const SEARCH_LIMIT: Duration = Duration::from_secs(1);
const FACTORIZATION_LIMIT: Duration = Duration::from_secs(5);
const FROBENIUS_LIMIT: Duration = Duration::from_secs(10);
const FUZZ_LIMIT: Duration = Duration::from_secs(300);
const E57_DIM: usize = 24;
const E57_CENTER_DIM: usize = 4;
const E57_NONZERO_LOOPS: usize = 2;
const FUZZ_COUNT: usize = 100;

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skewgroupoid"))
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("skewgroupoid-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn e57_elem(pa: &PartialActionData, pairs: &[(&str, Rational)]) -> AlgElem {
    let a = pa.algebra();
    let mut v = vec![rat(0, 1); a.dim()];
    for (l, q) in pairs {
        v[a.label_index(l).unwrap()] = q.clone();
    }
    AlgElem::new(v)
}

fn e57_factorized() -> (PartialActionData, Factorization) {
    let pa = parse_instance_str(fixtures::E57).unwrap().validate().unwrap();
    let cert = pa.find_group_type(0).unwrap().expect("E57 is of group type");
    let f = factorize(&pa, &cert).unwrap();
    (pa, f)
}

fn search_on_e57() -> Verdict {
    let start = Instant::now();
    let file = parse_instance_str(fixtures::E57).map_err(|e| e.to_string())?;
    let pa = file.validate().map_err(|e| format!("validation failed: {e}"))?;
    let results = pa.group_type_search(0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let g = pa.groupoid();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for (tau, outcome) in &results {
        match outcome {
            Ok(_) => accepted.push(tau.describe(g)),
            Err(_) => rejected.push(tau.describe(g)),
        }
    }
    ensure!(accepted.first().map(String::as_str) == Some("{x=x, y=l}"), "accepted {accepted:?}");
    ensure!(rejected.iter().any(|t| t == "{x=x, y=m}"), "rejected {rejected:?}");
    ensure!(elapsed < SEARCH_LIMIT, "took {elapsed:?}");
    Ok(format!("τ = {}, rejected {}, {elapsed:?}", accepted[0], rejected.join(" ")))
}

fn factorization_on_e57() -> Verdict {
    let start = Instant::now();
    let (_, f) = e57_factorized();
    let elapsed = start.elapsed();
    ensure!(f.skew.dim() == E57_DIM && f.iterated.dim() == E57_DIM, "dims {} and {}", f.skew.dim(), f.iterated.dim());
    ensure!(f.iso.report.passed(), "{}", f.iso.report);
    let (s, t) = (f.skew.carrier(), f.iterated.carrier());
    let fwd = &f.iso.forward;
    let mut pairs = 0;
    for p in 0..s.dim() {
        for q in 0..s.dim() {
            let (u, v) = (s.basis_elem(p), s.basis_elem(q));
            ensure!(
                fwd.apply(&s.mul(&u, &v)) == t.mul(&fwd.apply(&u), &fwd.apply(&v)),
                "φ not multiplicative on {} · {}",
                s.label(p),
                s.label(q)
            );
            pairs += 1;
        }
    }
    let id = Matrix::identity(E57_DIM);
    ensure!(f.iso.backward.compose(fwd).matrix() == &id, "φ⁻¹φ != id");
    ensure!(fwd.compose(&f.iso.backward).matrix() == &id, "φφ⁻¹ != id");
    ensure!(elapsed < FACTORIZATION_LIMIT, "took {elapsed:?}");
    Ok(format!("dims {E57_DIM}/{E57_DIM}, {pairs} products, explicit inverse exact, {elapsed:?}"))
}

fn separability_on_e57() -> Verdict {
    let (pa, f) = e57_factorized();
    let cert = &f.certificate;
    let half = rat(1, 2);
    let one = rat(1, 1);

    let restricted = pa.restrict_to_isotropy(0).map_err(|e| e.to_string())?;
    let ra = restricted.algebra();
    let mut w = vec![rat(0, 1); ra.dim()];
    w[ra.label_index("e1").unwrap()] = half.clone();
    w[ra.label_index("e2").unwrap()] = one.clone();
    let t_x = trace_maps(&restricted).object(0).apply(&AlgElem::new(w));
    ensure!(&t_x == ra.unit(), "t_x(½e1 + e2) = {t_x:?}");

    let a = e57_elem(&pa, &[("e1", half.clone()), ("e2", half.clone()), ("e3", half.clone()), ("e4", half)]);
    ensure!(&coarse_sum(&pa, cert, &a) == pa.object_unit(0), "coarse sum of ½Σe_i is not 1_x");

    let traces = trace_maps(&pa);
    let group = separable_group_level(&pa, 0).map_err(|e| e.to_string())?;
    let gw = group.witness.clone().ok_or("group level: no witness")?;
    ensure!(
        trace_maps(&restricted).object(0).apply(&pa.algebra().ideal(pa.idempotent(0)).coordinates(&gw).map(AlgElem::new).unwrap())
            == *ra.unit(),
        "group-level witness fails"
    );
    let coarse = coarse_criterion(&pa, cert, &f.beta);
    let cw = coarse.witness.clone().ok_or("coarse criterion: no witness")?;
    ensure!(&coarse_sum(&pa, cert, &cw) == pa.object_unit(0), "coarse witness fails");
    ensure!(coarse.matches_coarse_action, "coarse criterion disagrees with the coarse action");
    let direct = separable_direct(&pa);
    let dw = direct.witness.clone().ok_or("direct: no witness")?;
    ensure!(trace_condition_holds(&pa, &traces, &dw), "direct witness fails");
    let composite = separable_composite(&pa, &f, &direct).map_err(|e| e.to_string())?;
    ensure!(composite.verdict.separable, "composite says no");
    ensure!(composite.agrees_with_direct && composite.bridge_agrees, "routes disagree");
    let a_alg = pa.algebra();
    for (label, w) in [("group", &gw), ("coarse", &cw), ("direct", &dw)] {
        ensure!(a_alg.commutes_with_basis(w), "{label} witness is not central");
    }
    Ok(format!(
        "t_x(½e1+e2) = 1_x, coarse sum = 1_x, group/coarse/direct/composite yes, direct a = {}",
        skewgroupoid::linmap::describe(a_alg, &dw)
    ))
}

fn center_on_e57() -> Verdict {
    let (pa, f) = e57_factorized();
    let check = center_of_coarse_skew(&pa, &f.certificate, &f.coarse).map_err(|e| e.to_string())?;
    ensure!(check.report.passed(), "{}", check.report);
    ensure!(check.report.checked == 2, "expected both containments, got {} checks", check.report.checked);
    ensure!(
        check.center_dim == E57_CENTER_DIM && check.diagonal_dim == E57_CENTER_DIM,
        "center {} diagonal {}",
        check.center_dim,
        check.diagonal_dim
    );
    Ok(format!("dim center = dim diagonal span = {E57_CENTER_DIM}, both containments"))
}

fn frobenius_on_e57() -> Verdict {
    let (_, f) = e57_factorized();
    let start = Instant::now();
    let space = skew_tensor_space(&f.skew).map_err(|e| e.to_string())?;
    let chain = frobenius_chain(&f, &space).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    for sys in [&chain.coarse, &chain.group_part, &chain.composite] {
        ensure!(sys.report.passed(), "{}: {}", sys.name, sys.report);
    }
    ensure!(elapsed < FROBENIUS_LIMIT, "took {elapsed:?}");
    Ok(format!(
        "{} / {} / {} pass ({} + {} + {} identities), {elapsed:?}",
        chain.coarse.name,
        chain.group_part.name,
        chain.composite.name,
        chain.coarse.report.checked,
        chain.group_part.report.checked,
        chain.composite.report.checked
    ))
}

fn artinian_on_fixtures() -> Verdict {
    let mut counts = Vec::new();
    for (name, text) in fixtures::ALL {
        let file = parse_instance_str(text).map_err(|e| format!("{name}: {e}"))?;
        let r = run_pipeline(&file, &PipelineOptions::all());
        let checks: Vec<_> = r.find_all(pipeline::ARTINIAN).collect();
        ensure!(!checks.is_empty(), "{name}: no artinian check");
        for c in &checks {
            ensure!(c.status == Status::Pass && c.verdict.as_deref() == Some("yes"), "{name}: {:?}", c.verdict);
        }
        let reported: Vec<&str> = r.witnesses_for(pipeline::ARTINIAN).collect();
        ensure!(reported.iter().all(|w| w.contains("loops")), "{name}: no loop count in {reported:?}");
        counts.push(format!("{name}: {}", reported.join("; ")));
    }
    let pa = examples::e57();
    let v = artinian_verdict(&pa, 0).map_err(|e| e.to_string())?;
    ensure!(v.skew_artinian && v.nonzero_loops == E57_NONZERO_LOOPS, "E57: {v:?}");
    Ok(counts.join(" | "))
}

fn fuzz_suite() -> Verdict {
    let start = Instant::now();
    let out = bin()
        .args(["fuzz", "--seed", "0", "--count", &FUZZ_COUNT.to_string()])
        .args(["--max-objects", "3", "--max-dim", "12", "--max-isotropy", "4", "--format", "json"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("summary: {e}"))?;
    let field = |k: &str| summary[k].as_u64().unwrap_or(0);
    let violations = summary["violations"].as_array().map_or(usize::MAX, Vec::len);
    ensure!(out.status.success(), "exit {:?}, {violations} violations", out.status.code());
    ensure!(violations == 0, "{violations} violations: {}", summary["violations"]);
    ensure!(field("instances") == FUZZ_COUNT as u64, "ran {} instances", field("instances"));
    ensure!(field("global") > 0 && field("partial") > 0, "needs both global and restricted instances");
    ensure!(elapsed < FUZZ_LIMIT, "took {elapsed:?}");
    Ok(format!(
        "{} instances ({} global, {} restricted, {} group type), 0 violations, {elapsed:?}",
        field("instances"),
        field("global"),
        field("partial"),
        field("group_type")
    ))
}

/// `Q^2 × Q^2` under the coarse groupoid on `{x, y}` with one factor of
/// `A_y` cut away, so `1_{(y,x)}` is strictly smaller than `1_x`.
fn shrunken_coarse_action() -> PartialActionData {
    let block = examples::split_algebra(&["u".to_string(), "v".to_string()]);
    let global = examples::coarse_block_action(&block);
    let a = global.algebra();
    let e = a.unit() - &a.basis_elem(a.dim() - 1);
    restrict_to_ideal(&global, &e).expect("restriction is a partial action")
}

fn negative_cases() -> Verdict {
    let mut file = parse_instance_str(fixtures::E57).unwrap();
    let l = file.action.iter_mut().find(|e| e.morphism == "l").unwrap();
    let map = l.map.as_mut().unwrap();
    // α_l now sends blocks 1, 2 to 4, 3
    for (key, (from, to)) in [("e1", ("e3", "e4")), ("ie1", ("e3", "e4")), ("e2", ("e4", "e3")), ("ie2", ("e4", "e3"))] {
        let img = map.remove(key).unwrap();
        map.insert(key.into(), img.into_iter().map(|(k, v)| (k.replace(from, to), v)).collect());
    }
    let corrupted = scratch("corrupted.json", &file.to_json());
    let out = bin().arg("validate").arg(&corrupted).output().map_err(|e| e.to_string())?;
    let text = stdout(&out);
    ensure!(out.status.code() == Some(1), "validate exit {:?}", out.status.code());
    let witness = text
        .lines()
        .find(|l| l.contains("witness") && l.contains("pair ("))
        .ok_or_else(|| format!("no pair witness in:\n{text}"))?
        .trim()
        .to_string();

    let pa = shrunken_coarse_action();
    let g = pa.groupoid();
    for (tau, outcome) in pa.group_type_search(0).map_err(|e| e.to_string())? {
        ensure!(outcome.is_err(), "{} accepted", tau.describe(g));
        let shrunk = (0..g.n_objects()).any(|y| {
            let t = tau.tau[y];
            pa.ideal(g.inverse(t)).dim() < pa.ideal(g.identity(0)).dim() || pa.ideal(t).dim() < pa.ideal(g.identity(y)).dim()
        });
        ensure!(shrunk, "{} not shrunk", tau.describe(g));
    }
    ensure!(pa.find_group_type(0).unwrap().is_none(), "group type found");
    let path = scratch("not-group-type.json", &InstanceFile::from_action(&pa, Meta::default()).to_json());
    let out = bin().arg("factorize").arg(&path).output().map_err(|e| e.to_string())?;
    let text = stdout(&out);
    ensure!(out.status.success(), "factorize exit {:?}:\n{text}", out.status.code());
    let iso_line = text
        .lines()
        .find(|l| l.contains(pipeline::FACTORIZATION))
        .ok_or_else(|| format!("no factorization line in:\n{text}"))?;
    ensure!(iso_line.contains("not applicable"), "{iso_line}");
    let direct_line = text
        .lines()
        .find(|l| l.contains(pipeline::SEPARABLE_DIRECT))
        .ok_or_else(|| format!("direct separability did not run:\n{text}"))?;
    ensure!(direct_line.starts_with("[pass]"), "{direct_line}");
    Ok(format!("corrupted α_l: {witness}; shrunken instance: group type none, factorize not applicable, direct separability ran"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("E57 validation and group-type search", search_on_e57),
        ("E57 factorization isomorphism", factorization_on_e57),
        ("E57 separability witnesses", separability_on_e57),
        ("E57 center of the coarse skew ring", center_on_e57),
        ("E57 Frobenius systems", frobenius_on_e57),
        ("artinian verdict on every fixture", artinian_on_fixtures),
        ("fuzz suite", fuzz_suite),
        ("negative cases", negative_cases),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {}: FAIL {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
