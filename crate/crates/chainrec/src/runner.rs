//! Suite drivers behind the CLI subcommands: each takes a parsed scenario,
//! runs one family of checks and returns a report envelope plus the overall
//! verdict that decides the process exit code.

use crate::certify::{noncr_bound, random_reach_search};
use crate::chain::DeltaChain;
use crate::classical::{classify_classical, criterion_partial_sums, zero_weight_analysis};
use crate::construct::{chain_for_basis, return_chain_e0, Direction};
use crate::error::{Error, Result};
use crate::operator::LinearOp;
use crate::oracle::min_delta_reach;
use crate::report::envelope;
use crate::scalar::{rat_from_decimal, rat_to_f64, Mode, Rat, Scalar};
use crate::scenario::{Family, Scenario};
use crate::tree::VertexId;
use crate::vector::SeqVector;
use rayon::prelude::*;
use serde_json::{json, Value};

/// A finished suite: the JSON report and whether every check passed.
pub struct RunOutcome {
    pub report: Value,
    pub ok: bool,
}

fn parse_direction(s: &str) -> Result<Option<Direction>> {
    match s {
        "from_zero" => Ok(Some(Direction::FromZero)),
        "to_zero" => Ok(Some(Direction::ToZero)),
        "return" => Ok(None),
        other => Err(Error::Scenario(format!(
            "chains.direction must be from_zero, to_zero or return, got {other:?}"
        ))),
    }
}

fn chain_entry(chain: &DeltaChain, delta: &Rat, exact: bool) -> Result<Value> {
    let report = chain.validate()?;
    let max = report.max_defect.to_f64();
    Ok(json!({
        "delta": delta.to_string(),
        "length": chain.len(),
        "valid": report.valid,
        "max_defect": max,
        "margin": rat_to_f64(delta) - max,
        "endpoints_exact": exact,
    }))
}

/// Replays the construction recipes over the δ grid and target list; a chain
/// with an invalid defect fails the run. An empty δ grid is an empty success.
pub fn run_verify_constructions(scenario: &Scenario) -> Result<RunOutcome> {
    let op = scenario.build_op()?;
    let norm = scenario.norm_spec(op.tree())?;
    let deltas = scenario.deltas()?;
    let targets = scenario.chain_targets()?;
    let direction = parse_direction(
        scenario.chains.as_ref().map(|c| c.direction.as_str()).unwrap_or("from_zero"),
    )?;
    let exact = scenario.mode()? == Mode::Exact;

    let mut rows = Vec::new();
    let mut ok = true;
    for delta in &deltas {
        match direction {
            None => {
                let mut entry = match return_chain_e0(&op, &norm, delta) {
                    Ok(chain) => {
                        let closed = chain.first() == chain.last();
                        chain_entry(&chain, delta, exact && closed)?
                    }
                    Err(e) => {
                        ok = false;
                        json!({"delta": delta.to_string(), "error": e.to_string()})
                    }
                };
                entry["direction"] = json!("return");
                entry["target"] = json!("0");
                if entry["valid"] == json!(false) {
                    ok = false;
                }
                rows.push(entry);
            }
            Some(dir) => {
                for target in &targets {
                    let mut entry = match chain_for_basis(&op, &norm, delta, *target, dir) {
                        Ok(chain) => {
                            let endpoint = match dir {
                                Direction::FromZero => {
                                    chain.last()
                                        == &SeqVector::basis(*target, scenario.mode()?)
                                }
                                Direction::ToZero => chain.last().is_zero(),
                            };
                            chain_entry(&chain, delta, exact && endpoint)?
                        }
                        Err(e) => {
                            ok = false;
                            json!({"delta": delta.to_string(), "error": e.to_string()})
                        }
                    };
                    entry["direction"] = json!(match dir {
                        Direction::FromZero => "from_zero",
                        Direction::ToZero => "to_zero",
                    });
                    entry["target"] = json!(target.to_string());
                    if entry["valid"] == json!(false) {
                        ok = false;
                    }
                    rows.push(entry);
                }
            }
        }
    }
    Ok(RunOutcome { report: envelope("verify-constructions", scenario, ok, json!({"chains": rows})), ok })
}

fn oracle_infimum(op: &LinearOp, target: VertexId, horizon: u32) -> (Option<Rat>, u32) {
    let source = SeqVector::zero();
    let one = Scalar::one(Mode::Exact);
    let mut best: Option<Rat> = None;
    let mut at_m = 0;
    for m in 1..=horizon {
        match min_delta_reach(op, &source, target, &one, m) {
            Ok(bound) => {
                if best.as_ref().map(|b| &bound.infimum < b).unwrap_or(true) {
                    best = Some(bound.infimum);
                    at_m = m;
                }
            }
            Err(Error::Unreachable) => continue,
            Err(Error::LeakageOutOfWindow { .. }) => break,
            Err(_) => break,
        }
    }
    (best, at_m)
}

fn certify_branch_vertices(scenario: &Scenario) -> Result<Vec<VertexId>> {
    let section = scenario.certify.as_ref().expect("caller checked");
    let mut vertices = Vec::new();
    for k in 1..=section.k_max {
        let (j_lo, j_hi) = match scenario.family()? {
            Family::Comb => (1, k as i64),
            _ => (section.j_min.unwrap_or(1), section.j_max.unwrap_or(k as i64)),
        };
        for j in j_lo..=j_hi {
            vertices.push(VertexId::Branch(k, j));
        }
    }
    Ok(vertices)
}

/// Non-recurrence certificates for every branch vector up to `certify.k_max`,
/// each cross-checked against the influence oracle and (optionally) a seeded
/// random search at half the certified bound; plus membership chains for the
/// requested line vertices. Fails when an oracle infimum undercuts a bound,
/// a search beats one, or a membership chain is invalid.
pub fn run_certify(scenario: &Scenario, jobs: usize) -> Result<RunOutcome> {
    let section = scenario
        .certify
        .as_ref()
        .ok_or_else(|| Error::Scenario("certify section is required".into()))?;
    let op = scenario.build_op()?;
    let norm = scenario.norm_spec(op.tree())?;

    if section.k_max == 0 || scenario.family()? == Family::Classical {
        let report = envelope(
            "certify",
            scenario,
            true,
            json!({
                "note": "no branch vectors in scope; the operator restricts to a classical shift on the line — use the classify suite",
                "certificates": [],
            }),
        );
        return Ok(RunOutcome { report, ok: true });
    }

    let vertices = certify_branch_vertices(scenario)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Scenario(format!("thread pool: {e}")))?;

    let exact = scenario.mode()? == Mode::Exact;
    let entries: Vec<Result<Value>> = pool.install(|| {
        vertices
            .par_iter()
            .map(|v| -> Result<Value> {
                let f = SeqVector::basis(*v, scenario.mode()?);
                let cert = noncr_bound(&op, &f)?;
                let bound = cert.bound_rat();
                let (oracle, at_m) = oracle_infimum(&op, *v, section.oracle_horizon);
                let oracle_ok = oracle.as_ref().map(|o| o >= &bound).unwrap_or(true);
                let search = if section.search_trials > 0 && exact {
                    let half = &bound / rat_from_decimal("2")?;
                    Some(random_reach_search(
                        &op,
                        &norm,
                        &half,
                        *v,
                        1.0,
                        section.search_max_len,
                        section.search_trials,
                        scenario.seed,
                    )?)
                } else {
                    None
                };
                let search_ok = search.as_ref().map(|s| !s.succeeded).unwrap_or(true);
                Ok(json!({
                    "target": v.to_string(),
                    "bound": cert.bound,
                    "bound_f64": cert.bound_f64,
                    "case": cert.case_label,
                    "oracle_infimum": oracle.as_ref().map(|o| o.to_string()),
                    "oracle_infimum_f64": oracle.as_ref().map(rat_to_f64),
                    "oracle_at_m": if oracle.is_some() { Some(at_m) } else { None },
                    "oracle_consistent": oracle_ok,
                    "search": search,
                    "search_consistent": search_ok,
                    "ok": oracle_ok && search_ok,
                }))
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut ok = true;
    for entry in entries {
        let entry = entry?;
        if entry["ok"] == json!(false) {
            ok = false;
        }
        rows.push(entry);
    }

    // line vertices: membership certified by an explicit 0 → e_n chain
    let delta = match &section.membership_delta {
        Some(d) => rat_from_decimal(d)?,
        None => rat_from_decimal("0.1")?,
    };
    let mut members = Vec::new();
    for n in &section.line_targets {
        let chain = chain_for_basis(&op, &norm, &delta, VertexId::Line(*n), Direction::FromZero)?;
        let valid = chain.is_valid()?;
        if !valid {
            ok = false;
        }
        members.push(json!({
            "target": VertexId::Line(*n).to_string(),
            "delta": delta.to_string(),
            "length": chain.len(),
            "valid": valid,
        }));
    }

    let report = envelope(
        "certify",
        scenario,
        ok,
        json!({"certificates": rows, "memberships": members}),
    );
    Ok(RunOutcome { report, ok })
}

/// Classifies a classical-shift scenario: ratio-test verdict with the n0
/// sweep and partial-sum traces, or the zero-weight subspace analysis when
/// the weight sequence has zeros.
pub fn run_classify(scenario: &Scenario) -> Result<RunOutcome> {
    if scenario.family()? != Family::Classical {
        return Err(Error::Scenario("classify needs operator.family = \"classical\"".into()));
    }
    let shift = scenario.classical()?;
    let section = scenario.classify.clone().unwrap_or(crate::scenario::ClassifySection {
        n0_min: -5,
        n0_max: 5,
        partial_sum_terms: 30,
    });

    if !shift.weights.zero_set().is_empty() {
        let analysis = zero_weight_analysis(&shift)?;
        let report = envelope(
            "classify",
            scenario,
            true,
            json!({"zero_weight_analysis": analysis}),
        );
        return Ok(RunOutcome { report, ok: true });
    }

    let classification = classify_classical(&shift, section.n0_min..=section.n0_max)?;
    let trace_n0 = section.n0_min.max(0).min(section.n0_max);
    let traces = json!({
        "n0": trace_n0,
        "forward": criterion_partial_sums(&shift, trace_n0, false, section.partial_sum_terms),
        "backward": criterion_partial_sums(&shift, trace_n0, true, section.partial_sum_terms),
    });
    let ok = classification.n0_invariant;
    let report = envelope(
        "classify",
        scenario,
        ok,
        json!({"classification": classification, "partial_sums": traces}),
    );
    Ok(RunOutcome { report, ok })
}

/// One ad-hoc reachability query: the per-horizon table of
/// `min_delta_reach` for `target`, plus its infimum over the horizon.
pub struct OracleQuery {
    pub target: VertexId,
    pub value: String,
    pub source: Option<VertexId>,
    pub horizon: u32,
}

pub fn run_oracle(scenario: &Scenario, query: &OracleQuery) -> Result<RunOutcome> {
    let op = scenario.build_op()?;
    let mode = scenario.mode()?;
    let value = Scalar::parse(&query.value, mode)?;
    let source = match query.source {
        Some(v) => SeqVector::basis(v, mode),
        None => SeqVector::zero(),
    };
    let mut rows = Vec::new();
    let mut best: Option<Rat> = None;
    for m in 1..=query.horizon {
        match min_delta_reach(&op, &source, query.target, &value, m) {
            Ok(bound) => {
                if best.as_ref().map(|b| &bound.infimum < b).unwrap_or(true) {
                    best = Some(bound.infimum.clone());
                }
                rows.push(json!({
                    "m": m,
                    "min_delta": bound.infimum.to_string(),
                    "min_delta_f64": rat_to_f64(&bound.infimum),
                    "gap": rat_to_f64(&bound.gap),
                    "influence_sum": rat_to_f64(&bound.influence_sum),
                }));
            }
            Err(Error::Unreachable) => {
                rows.push(json!({"m": m, "unreachable": true}));
            }
            Err(Error::LeakageOutOfWindow { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let report = envelope(
        "oracle",
        scenario,
        true,
        json!({
            "target": query.target.to_string(),
            "value": query.value,
            "source": query.source.map(|v| v.to_string()),
            "table": rows,
            "infimum": best.as_ref().map(|b| b.to_string()),
            "infimum_f64": best.as_ref().map(rat_to_f64),
        }),
    );
    Ok(RunOutcome { report, ok: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    const COMB: &str = r#"
        mode = "exact"
        seed = 5
        [operator]
        family = "comb"
        mu1 = "2"
        mu2 = "4"
        [window]
        n_min = -20
        n_max = 10
        k_max = 10
        [chains]
        deltas = ["0.1", "0.01"]
        direction = "return"
        [certify]
        k_max = 3
        oracle_horizon = 20
        search_trials = 50
        search_max_len = 10
        line_targets = [0, 2]
    "#;

    #[test]
    fn verify_constructions_runs_the_return_recipe() {
        let s = Scenario::from_str(COMB).unwrap();
        let out = run_verify_constructions(&s).unwrap();
        assert!(out.ok);
        let rows = out.report["results"]["chains"].as_array().unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0]["valid"], json!(true));
        assert_eq!(rows[0]["endpoints_exact"], json!(true));
        // δ = 0.1 return chain: 6 links out, 5 back
        assert_eq!(rows[0]["length"], json!(11));
    }

    #[test]
    fn empty_delta_grid_is_an_empty_success() {
        let mut text = COMB.replace("deltas = [\"0.1\", \"0.01\"]", "deltas = []");
        text = text.replace("direction = \"return\"", "direction = \"from_zero\"");
        let s = Scenario::from_str(&text).unwrap();
        let out = run_verify_constructions(&s).unwrap();
        assert!(out.ok);
        assert_eq!(out.report["results"]["chains"], json!([]));
    }

    #[test]
    fn certify_cross_checks_oracle_and_search() {
        let s = Scenario::from_str(COMB).unwrap();
        let out = run_certify(&s, 2).unwrap();
        assert!(out.ok);
        let rows = out.report["results"]["certificates"].as_array().unwrap();
        assert_eq!(rows.len(), 1 + 2 + 3);
        let e31 = rows.iter().find(|r| r["target"] == json!("(-3,1)")).unwrap();
        assert_eq!(e31["bound"], json!("1/48"));
        assert_eq!(e31["oracle_consistent"], json!(true));
        assert_eq!(e31["search_consistent"], json!(true));
        let members = out.report["results"]["memberships"].as_array().unwrap();
        assert!(members.iter().all(|m| m["valid"] == json!(true)));
    }

    #[test]
    fn classify_reports_verdict_and_traces() {
        let text = r#"
            [operator]
            family = "classical"
            [operator.classical]
            kind = "bilateral"
            lambda = "2"
            [classify]
            partial_sum_terms = 20
        "#;
        let s = Scenario::from_str(text).unwrap();
        let out = run_classify(&s).unwrap();
        assert!(out.ok);
        let c = &out.report["results"]["classification"];
        assert_eq!(c["verdict"], json!("not_chain_recurrent"));
        assert_eq!(c["bound"], json!("1"));
        assert_eq!(
            out.report["results"]["partial_sums"]["backward"]
                .as_array()
                .unwrap()
                .len(),
            20
        );
    }

    #[test]
    fn oracle_table_matches_the_closed_form() {
        let text = r#"
            [operator]
            family = "classical"
            [operator.classical]
            kind = "bilateral"
            lambda = "2"
            [window]
            n_min = -12
            n_max = 12
        "#;
        let s = Scenario::from_str(text).unwrap();
        let query = OracleQuery {
            target: VertexId::Line(-5),
            value: "0".into(),
            source: Some(VertexId::Line(0)),
            horizon: 5,
        };
        let out = run_oracle(&s, &query).unwrap();
        let table = out.report["results"]["table"].as_array().unwrap();
        // m = 5: (|λ|−1)·|λ|^m/(|λ|^m−1) = 32/31
        assert_eq!(table[4]["min_delta"], json!("32/31"));
    }
}
