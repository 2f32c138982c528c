//! Runs the checks on an instance and collects a [`Report`].
//!
//! Order: validation, components, then per component the group-type
//! search, the factorization and the extension checks. Without a
//! group-type transversal the factorization-based checks are reported as
//! not applicable; direct separability and artinianity still run.

use std::time::Instant;

use crate::action::{GroupTypeCertificate, PartialActionData};
use crate::error::Error;
use crate::extension::{
    artinian_verdict, center_of_coarse_skew, check_separability_idempotent, frobenius_chain, semisimple_verdict,
    separable_composite, separable_direct, skew_tensor_space, SemisimpleVerdict,
};
use crate::groupoid::{connected_components, Transversal};
use crate::instance::{InstanceFile, Meta};
use crate::linmap::describe;
use crate::report::{CheckResult, Report, Status, TransversalEntry};
use crate::skew::{build_skew_ring, check_global_factorization, factorize, Factorization, SkewRing};

pub const VALIDATE: &str = "validate";
pub const CONSEQUENCES: &str = "partial action consequences";
pub const COMPONENTS: &str = "components";
pub const GROUP_TYPE: &str = "group type";
pub const FACTORIZATION: &str = "factorization isomorphism";
pub const GLOBALITY: &str = "globality flags";
pub const SEPARABLE_DIRECT: &str = "separability (trace criterion)";
pub const SEPARABLE_COMPOSITE: &str = "separability (via factorization)";
pub const SEPARABILITY_IDEMPOTENT: &str = "separability idempotent";
pub const SEMISIMPLE: &str = "semisimple extension";
pub const CENTER: &str = "center of coarse skew ring";
pub const FROBENIUS_COARSE: &str = "frobenius: A in coarse skew ring";
pub const FROBENIUS_GROUP: &str = "frobenius: coarse ring in iterated ring";
pub const FROBENIUS_COMPOSITE: &str = "frobenius: A in skew ring";
pub const ARTINIAN: &str = "artinian";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    pub factorize: bool,
    pub separable: bool,
    pub frobenius: bool,
    pub artinian: bool,
    /// Tensor-space checks are skipped above this skew ring dimension.
    pub max_tensor_dim: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions::all()
    }
}

impl PipelineOptions {
    pub fn all() -> Self {
        PipelineOptions {
            factorize: true,
            separable: true,
            frobenius: true,
            artinian: true,
            max_tensor_dim: 64,
        }
    }

    pub fn validate_only() -> Self {
        PipelineOptions {
            factorize: false,
            separable: false,
            frobenius: false,
            artinian: false,
            ..PipelineOptions::all()
        }
    }

    /// The factorization and the separability checks that use it.
    pub fn factorization() -> Self {
        PipelineOptions {
            factorize: true,
            separable: true,
            ..PipelineOptions::validate_only()
        }
    }

    fn needs_factorization(&self) -> bool {
        self.factorize || self.separable || self.frobenius
    }
}

fn ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

fn check(name: &str, component: &str, status: Status, verdict: Option<String>, detail: impl Into<String>, t: Instant) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        component: Some(component.to_string()),
        status,
        verdict,
        detail: detail.into(),
        checked: 1,
        elapsed_ms: ms(t),
    }
}

/// Validates the file and runs the selected checks.
pub fn run_pipeline(file: &InstanceFile, opts: &PipelineOptions) -> Report {
    let start = Instant::now();
    let mut report = Report::new(file.name());
    let t = Instant::now();
    match file.validate() {
        Ok(pa) => {
            report.push(CheckResult {
                name: VALIDATE.into(),
                component: None,
                status: Status::Pass,
                verdict: None,
                detail: String::new(),
                checked: 1,
                elapsed_ms: ms(t),
            });
            run_checks(&mut report, &pa, &file.meta, opts);
        }
        Err(e) => {
            report.witness(VALIDATE, None, e.to_string());
            report.push(CheckResult {
                name: VALIDATE.into(),
                component: None,
                status: Status::Fail,
                verdict: None,
                detail: error_kind(&e),
                checked: 1,
                elapsed_ms: ms(t),
            });
        }
    }
    report.elapsed_ms = ms(start);
    report
}

/// The pipeline for an already validated action.
pub fn run_on_action(name: &str, pa: &PartialActionData, meta: &Meta, opts: &PipelineOptions) -> Report {
    let start = Instant::now();
    let mut report = Report::new(name);
    run_checks(&mut report, pa, meta, opts);
    report.elapsed_ms = ms(start);
    report
}

fn error_kind(e: &Error) -> String {
    match e {
        Error::GroupoidAxiomViolation { reason, .. } => format!("groupoid: {reason}"),
        Error::PartialActionAxiomViolation { axiom, .. } => format!("partial action axiom {axiom}"),
        Error::InvalidAlgebra(_) | Error::AssociativityFailure(_) => "algebra".into(),
        _ => "invalid input".into(),
    }
}

fn run_checks(report: &mut Report, pa: &PartialActionData, meta: &Meta, opts: &PipelineOptions) {
    let t = Instant::now();
    let cons = pa.check_consequences();
    report.push_verification(CONSEQUENCES, None, &cons, ms(t));
    let g = pa.groupoid();
    report.dims.insert("A".into(), pa.algebra().dim());
    report
        .dims
        .insert("A⋆αG".into(), (0..g.n_morphisms()).map(|m| pa.ideal(m).dim()).sum());

    let t = Instant::now();
    let comps = connected_components(g);
    let labels: Vec<String> = comps
        .iter()
        .map(|c| c.object_map.iter().map(|&o| g.object_name(o)).collect::<Vec<_>>().join(","))
        .collect();
    report.push(CheckResult {
        name: COMPONENTS.into(),
        component: None,
        status: Status::Pass,
        verdict: Some(format!("{} component(s): {}", comps.len(), labels.iter().map(|l| format!("{{{l}}}")).collect::<Vec<_>>().join(" "))),
        detail: String::new(),
        checked: 1,
        elapsed_ms: ms(t),
    });
    if !(opts.needs_factorization() || opts.artinian) {
        return;
    }
    for (comp, label) in comps.iter().zip(&labels) {
        let t = Instant::now();
        match pa.restrict_to_component(comp) {
            Ok(sub) => run_component(report, &sub, label, meta, opts),
            Err(e) => {
                report.witness(COMPONENTS, Some(label), e.to_string());
                report.push(check(COMPONENTS, label, Status::Fail, None, "restriction failed", t));
            }
        }
    }
}

fn hinted_transversal(pa: &PartialActionData, base: usize, meta: &Meta) -> Option<Transversal> {
    let hint = meta.transversal.as_ref()?;
    let g = pa.groupoid();
    let tau = (0..g.n_objects())
        .map(|y| {
            if y == base {
                Some(g.identity(base))
            } else {
                g.morphism_index(hint.get(g.object_name(y))?)
            }
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Transversal { base, tau })
}

const MAX_REJECTION_WITNESSES: usize = 16;

fn group_type(report: &mut Report, pa: &PartialActionData, label: &str, meta: &Meta) -> Option<GroupTypeCertificate> {
    let t = Instant::now();
    let g = pa.groupoid();
    let base = meta
        .base
        .as_deref()
        .and_then(|b| g.object_index(b).ok())
        .unwrap_or_else(|| (0..g.n_objects()).min_by_key(|&o| g.object_name(o)).expect("nonempty component"));
    let mut found = None;
    let mut tried = 0;
    if let Some(tau) = hinted_transversal(pa, base, meta) {
        tried += 1;
        match pa.test_transversal(&tau) {
            Ok(c) => found = Some(c),
            Err(why) => report.witness(GROUP_TYPE, Some(label), format!("hint {} rejected: {why}", tau.describe(g))),
        }
    }
    if found.is_none() {
        match pa.group_type_search(base) {
            Ok(results) => {
                let mut shown = 0;
                for (tau, r) in results {
                    tried += 1;
                    match r {
                        Ok(c) => {
                            if found.is_none() {
                                found = Some(c);
                            }
                        }
                        Err(why) => {
                            if shown < MAX_REJECTION_WITNESSES {
                                report.witness(GROUP_TYPE, Some(label), format!("rejected {}: {why}", tau.describe(g)));
                                shown += 1;
                            }
                        }
                    }
                }
            }
            Err(e) => {
                report.witness(GROUP_TYPE, Some(label), e.to_string());
                report.push(check(GROUP_TYPE, label, Status::Fail, None, "search failed", t));
                return None;
            }
        }
    }
    let verdict = match &found {
        Some(c) => {
            let desc = c.transversal.describe(g);
            report.transversal.push(TransversalEntry {
                component: label.to_string(),
                base: g.object_name(base).to_string(),
                transversal: desc.clone(),
            });
            for w in &c.witnesses {
                report.witness(GROUP_TYPE, Some(label), w.clone());
            }
            format!("yes, τ = {desc}")
        }
        None => "no transversal satisfies the condition".to_string(),
    };
    let mut r = check(GROUP_TYPE, label, Status::Pass, Some(verdict), format!("base {}", g.object_name(base)), t);
    r.checked = tried;
    report.push(r);
    found
}

fn run_component(report: &mut Report, pa: &PartialActionData, label: &str, meta: &Meta, opts: &PipelineOptions) {
    let g = pa.groupoid();
    let cert = group_type(report, pa, label, meta);
    let mut fact: Option<Factorization> = None;
    if opts.needs_factorization() {
        let t = Instant::now();
        match &cert {
            None => report.push(check(
                FACTORIZATION,
                label,
                Status::NotApplicable,
                Some("not applicable".into()),
                "no group-type transversal",
                t,
            )),
            Some(c) => match factorize(pa, c) {
                Ok(f) => {
                    report.push_verification(FACTORIZATION, Some(label), &f.iso.report, ms(t));
                    for (k, v) in [
                        ("A⋆αG", f.skew.dim()),
                        ("A⋆βG₀²", f.coarse.dim()),
                        ("(A⋆βG₀²)⋆γG(x)", f.iterated.dim()),
                    ] {
                        report.dims.insert(format!("[{label}] {k}"), v);
                    }
                    let t = Instant::now();
                    let glob = check_global_factorization(pa, &f);
                    report.push_verification(GLOBALITY, Some(label), &glob.report, ms(t));
                    report.witness(
                        GLOBALITY,
                        Some(label),
                        format!("action global: {}, γ global: {}", glob.action_global, glob.gamma_global),
                    );
                    fact = Some(f);
                }
                Err(e) => {
                    report.witness(FACTORIZATION, Some(label), e.to_string());
                    report.push(check(FACTORIZATION, label, Status::Fail, None, "construction failed", t));
                }
            },
        }
    }

    let mut skew: Option<SkewRing> = fact.as_ref().map(|f| f.skew.clone());
    if opts.separable {
        let t = Instant::now();
        let direct = separable_direct(pa);
        if let Some(w) = &direct.witness {
            report.witness(SEPARABLE_DIRECT, Some(label), format!("a = {}", describe(pa.algebra(), w)));
        }
        report.push(check(
            SEPARABLE_DIRECT,
            label,
            Status::Pass,
            Some(if direct.separable { "separable" } else { "not separable" }.into()),
            "finite groupoid required",
            t,
        ));

        let t = Instant::now();
        match (&cert, &fact) {
            (Some(_), Some(f)) => match separable_composite(pa, f, &direct) {
                Ok(comp) => {
                    if let Some(w) = &comp.group_level.witness {
                        report.witness(SEPARABLE_COMPOSITE, Some(label), format!("a_x = {}", describe(pa.algebra(), w)));
                    }
                    if let Some(w) = &comp.coarse.witness {
                        report.witness(SEPARABLE_COMPOSITE, Some(label), format!("a = {}", describe(pa.algebra(), w)));
                    }
                    let consistent = comp.bridge_agrees
                        && comp.converse_holds
                        && comp.agrees_with_direct
                        && comp.coarse.matches_coarse_action;
                    let detail = if consistent {
                        String::new()
                    } else {
                        format!(
                            "bridge {}, converse {}, agreement {}, coarse {}",
                            comp.bridge_agrees, comp.converse_holds, comp.agrees_with_direct, comp.coarse.matches_coarse_action
                        )
                    };
                    let verdict = if comp.verdict.separable { "separable" } else { "criterion not met" };
                    report.push(check(
                        SEPARABLE_COMPOSITE,
                        label,
                        if consistent { Status::Pass } else { Status::Fail },
                        Some(verdict.into()),
                        detail,
                        t,
                    ));
                }
                Err(e) => {
                    report.witness(SEPARABLE_COMPOSITE, Some(label), e.to_string());
                    report.push(check(SEPARABLE_COMPOSITE, label, Status::Fail, None, "construction failed", t));
                }
            },
            _ => report.push(check(
                SEPARABLE_COMPOSITE,
                label,
                Status::NotApplicable,
                None,
                "needs a group-type factorization",
                t,
            )),
        }

        let t = Instant::now();
        if skew.is_none() {
            skew = build_skew_ring(pa).ok();
        }
        match (&direct.witness, &skew) {
            (Some(a), Some(s)) if s.dim() <= opts.max_tensor_dim => match skew_tensor_space(s) {
                Ok(space) => {
                    let r = check_separability_idempotent(s, &space, a);
                    report.push_verification(SEPARABILITY_IDEMPOTENT, Some(label), &r, ms(t));
                }
                Err(e) => {
                    report.witness(SEPARABILITY_IDEMPOTENT, Some(label), e.to_string());
                    report.push(check(SEPARABILITY_IDEMPOTENT, label, Status::Fail, None, "tensor space", t));
                }
            },
            (Some(_), _) => report.push(check(
                SEPARABILITY_IDEMPOTENT,
                label,
                Status::NotApplicable,
                None,
                "skew ring above the size limit",
                t,
            )),
            (None, _) => report.push(check(SEPARABILITY_IDEMPOTENT, label, Status::NotApplicable, None, "not separable", t)),
        }

        let t = Instant::now();
        let verdict = match semisimple_verdict(&direct) {
            SemisimpleVerdict::Yes => "yes (by separability)",
            SemisimpleVerdict::Undetermined => "undetermined by this criterion",
        };
        report.push(check(SEMISIMPLE, label, Status::Pass, Some(verdict.into()), String::new(), t));

        let t = Instant::now();
        match (&cert, &fact) {
            (Some(c), Some(f)) => match center_of_coarse_skew(pa, c, &f.coarse) {
                Ok(chk) => {
                    report.push_verification(CENTER, Some(label), &chk.report, ms(t));
                    report.witness(CENTER, Some(label), format!("dim center = {}, dim diagonal span = {}", chk.center_dim, chk.diagonal_dim));
                }
                Err(e) => {
                    report.witness(CENTER, Some(label), e.to_string());
                    report.push(check(CENTER, label, Status::Fail, None, "construction failed", t));
                }
            },
            _ => report.push(check(CENTER, label, Status::NotApplicable, None, "needs a group-type factorization", t)),
        }
    }

    if opts.frobenius {
        let t = Instant::now();
        let names = [FROBENIUS_COARSE, FROBENIUS_GROUP, FROBENIUS_COMPOSITE];
        match &fact {
            Some(f) if f.skew.dim() <= opts.max_tensor_dim => {
                let chain = skew_tensor_space(&f.skew).and_then(|space| frobenius_chain(f, &space));
                match chain {
                    Ok(chain) => {
                        let each = ms(t) / 3;
                        for (name, sys) in names.iter().zip([&chain.coarse, &chain.group_part, &chain.composite]) {
                            report.push_verification(name, Some(label), &sys.report, each);
                            report.witness(name, Some(label), format!("|Δ| = {} terms, tensor dim {}", sys.terms.len(), sys.tensor_dim));
                        }
                        let cand = match chain.diagonal_candidate.first_violation() {
                            None => "diagonal-only Δ also verifies".to_string(),
                            Some(v) => format!("diagonal-only Δ fails {} at {}", v.check, v.witness),
                        };
                        report.witness(FROBENIUS_COARSE, Some(label), cand);
                    }
                    Err(e) => {
                        for name in names {
                            report.witness(name, Some(label), e.to_string());
                            report.push(check(name, label, Status::Fail, None, "verification failed", t));
                        }
                    }
                }
            }
            Some(_) => {
                for name in names {
                    report.push(check(name, label, Status::NotApplicable, None, "skew ring above the size limit", t));
                }
            }
            None => {
                for name in names {
                    report.push(check(name, label, Status::NotApplicable, None, "needs a group-type factorization", t));
                }
            }
        }
    }

    if opts.artinian {
        let t = Instant::now();
        let base = cert
            .as_ref()
            .map(|c| c.base())
            .unwrap_or_else(|| (0..g.n_objects()).min_by_key(|&o| g.object_name(o)).expect("nonempty"));
        match artinian_verdict(pa, base) {
            Ok(v) => {
                report.witness(
                    ARTINIAN,
                    Some(label),
                    format!(
                        "{} of {} loops at {} have A_h != 0",
                        v.nonzero_loops,
                        v.isotropy_order,
                        g.object_name(base)
                    ),
                );
                report.push(check(
                    ARTINIAN,
                    label,
                    Status::Pass,
                    Some("yes".into()),
                    format!(
                        "A finite-dimensional, hence artinian; A_h = 0 for all but {} loops (the finiteness condition is automatic here)",
                        v.nonzero_loops
                    ),
                    t,
                ));
            }
            Err(e) => {
                report.witness(ARTINIAN, Some(label), e.to_string());
                report.push(check(ARTINIAN, label, Status::Fail, None, "isotropy", t));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fixtures, parse_instance_str};

    #[test]
    fn e57_full_pipeline() {
        let f = parse_instance_str(fixtures::E57).unwrap();
        let r = run_pipeline(&f, &PipelineOptions::all());
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.transversal[0].transversal, "{x=x, y=l}");
        assert_eq!(r.dims["A⋆αG"], 24);
        assert!(r.witnesses_for(GROUP_TYPE).any(|w| w.starts_with("rejected {x=x, y=m}")));
        assert_eq!(r.find(SEPARABLE_COMPOSITE).unwrap().verdict.as_deref(), Some("separable"));
        assert_eq!(r.find(ARTINIAN).unwrap().verdict.as_deref(), Some("yes"));
    }

    #[test]
    fn every_fixture_passes() {
        for (name, text) in fixtures::ALL {
            let r = run_pipeline(&parse_instance_str(text).unwrap(), &PipelineOptions::all());
            assert!(r.passed(), "{name}: {}", r.to_text());
        }
    }

    #[test]
    fn validate_only_stops_early() {
        let f = parse_instance_str(fixtures::E57).unwrap();
        let r = run_pipeline(&f, &PipelineOptions::validate_only());
        assert!(r.find(GROUP_TYPE).is_none());
        assert!(r.find(COMPONENTS).is_some());
    }

    #[test]
    fn corrupted_action_fails_validation() {
        let mut f = parse_instance_str(fixtures::E57).unwrap();
        let l = f.action.iter_mut().find(|e| e.morphism == "l").unwrap();
        // α_l now sends blocks 1, 2 to 4, 3
        let map = l.map.as_mut().unwrap();
        for (key, (from, to)) in [("e1", ("e3", "e4")), ("ie1", ("e3", "e4")), ("e2", ("e4", "e3")), ("ie2", ("e4", "e3"))] {
            let img = map.remove(key).unwrap();
            map.insert(key.into(), img.into_iter().map(|(k, v)| (k.replace(from, to), v)).collect());
        }
        let r = run_pipeline(&f, &PipelineOptions::all());
        assert!(!r.passed());
        assert_eq!(r.exit_code(), 1);
        assert!(r.witnesses_for(VALIDATE).next().unwrap().contains("pair ("));
    }
}
