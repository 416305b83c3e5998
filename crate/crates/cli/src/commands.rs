use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;
use sosforge_core::algebra::{vars, ConstraintSystem};
use sosforge_core::formulas::dimacs::{parse_dimacs, write_dimacs, VarMap};
use sosforge_core::formulas::{
    build_xor_graph, encode_xor, gen_block, gen_clique, gen_random_3xor, gen_threshold, relativize,
    subsets, symmetric_template, Clause, CnfFormula, Graph, XorSystem,
};
use sosforge_core::resolution::{
    build_bruteforce_refutation, build_clique_refutation, build_relativized_refutation,
    build_threshold_refutation, check_proof, check_refutation, parse_trace, write_trace, ResolutionError,
    ResolutionProof,
};
use sosforge_core::restriction::{
    apply_restriction, check_recovers_base, rename_to_base, sample_restriction, shrinkage_experiment,
    RecoveryWitness, Restriction,
};
use sosforge_core::sos::{
    certificate_from_json, certificate_to_json, check_certificate, cnf_system, compile_resolution,
    measure_certificate, transform_block_to_xor, transform_clique_to_block, SosError,
};
use sosforge_lasserre::{
    build_truncated_system, extract_exact, min_degree, solve_feasibility, MinDegree, SolveOptions, Status,
};

use crate::{reproduce, CliError, CliResult, Command, RunManifest, Session, SystemInput};

fn check(e: impl std::fmt::Display) -> CliError {
    CliError::Check(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(anyhow!("{e}"))
}

fn read_graph(s: &mut Session, path: &Path) -> Result<Graph, CliError> {
    let text = s.read("--graph", path)?;
    Graph::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_cnf(s: &mut Session, flag: &str, path: &Path) -> Result<(CnfFormula, VarMap), CliError> {
    let text = s.read(flag, path)?;
    parse_dimacs(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_xor(s: &mut Session, path: &Path) -> Result<XorSystem, CliError> {
    let text = s.read("--xor", path)?;
    XorSystem::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_cert(s: &mut Session, path: &Path) -> Result<(ConstraintSystem, sosforge_core::sos::SosCertificate), CliError> {
    let text = s.read("--cert", path)?;
    certificate_from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_proof(s: &mut Session, path: &Path, map: &VarMap) -> Result<ResolutionProof, CliError> {
    let text = s.read("--proof", path)?;
    parse_trace(&text, map).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// A precondition failure of a builder (e.g. the graph has a clique) is a
/// check failure; anything else is a usage error.
fn builder_error(e: ResolutionError) -> CliError {
    match e {
        ResolutionError::HasClique(_) | ResolutionError::Proof(_) => check(e),
        other => usage(other),
    }
}

fn sos_error(e: SosError) -> CliError {
    match e {
        SosError::Formula(_) => usage(e),
        other => check(other),
    }
}

fn write_proof(s: &mut Session, f: &CnfFormula, proof: &ResolutionProof, out: &Path, cnf: Option<&Path>) -> CliResult {
    let meas = check_refutation(f, proof).map_err(check)?;
    let trace = write_trace(proof, &VarMap::for_formula(f)).map_err(usage)?;
    s.write("--out", out, &trace)?;
    if let Some(p) = cnf {
        s.write("--cnf", p, &write_dimacs(f))?;
    }
    s.say(meas.to_string());
    Ok(())
}

fn cnf_widths(f: &CnfFormula) -> (usize, usize) {
    let w = f.clauses().iter().map(|c| c.width()).max().unwrap_or(0);
    let dw = f.clauses().iter().map(|c| c.domain_width()).max().unwrap_or(0);
    (w, dw)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn dispatch(cmd: &Command, s: &mut Session) -> CliResult {
    match cmd {
        Command::GenClique { graph, k, out } => {
            let g = read_graph(s, graph)?;
            let f = gen_clique(&g, *k);
            s.write("--out", out, &write_dimacs(&f))?;
            s.say(format!("clauses={} vars={}", f.len(), f.num_vars()));
        }
        Command::GenBlock { graph, k, out } => {
            let g = read_graph(s, graph)?;
            let sys = gen_block(&g, *k).map_err(usage)?;
            s.write("--out", out, &sys.to_json())?;
            s.say(format!("constraints={} vars={}", sys.len(), sys.vars().len()));
        }
        Command::Gen3xor { n, density, seed, out } => {
            s.seed = Some(seed.seed);
            let sys = gen_random_3xor(*n, *density, seed.seed).map_err(usage)?;
            s.write("--out", out, &sys.to_json())?;
            s.say(format!("n={} equations={}", sys.n, sys.equations.len()));
        }
        Command::GenXorGraph { xor, k, keep_violating, out } => {
            let xs = read_xor(s, xor)?;
            let xg = build_xor_graph(&xs, *k, *keep_violating).map_err(usage)?;
            s.write("--out", out, &xg.graph.to_json())?;
            s.say(format!("vertices={} edges={}", xg.graph.num_vertices(), xg.graph.edges().len()));
        }
        Command::GenThreshold { k, m, out } => {
            let f = gen_threshold(*k, *m).map_err(usage)?;
            s.write("--out", out, &write_dimacs(&f))?;
            s.say(format!("clauses={} vars={}", f.len(), f.num_vars()));
        }
        Command::Relativize { input, k, m, out } => {
            let (f, _) = read_cnf(s, "--in", input)?;
            let rel = relativize(&f, *k, *m).map_err(usage)?;
            s.write("--out", out, &write_dimacs(&rel))?;
            let (w, dw) = cnf_widths(&rel);
            s.say(format!("clauses={} vars={} width={w} domain_width={dw}", rel.len(), rel.num_vars()));
        }
        Command::RefuteClique { graph, k, out, cnf } => {
            let g = read_graph(s, graph)?;
            let proof = build_clique_refutation(&g, *k).map_err(builder_error)?;
            write_proof(s, &gen_clique(&g, *k), &proof, out, cnf.as_deref())?;
        }
        Command::RefuteBruteforce { m, out, cnf } => {
            let f = sosforge_core::formulas::gen_bruteforce_gadget(m).map_err(usage)?;
            let proof = build_bruteforce_refutation(m).map_err(builder_error)?;
            write_proof(s, &f, &proof, out, cnf.as_deref())?;
        }
        Command::RefuteThreshold { k, m, out, cnf } => {
            // The threshold formula is satisfiable; the refutation also uses
            // ¬s_ι over every k-subset.
            let base = gen_threshold(*k, *m).map_err(usage)?;
            let mut clauses: Vec<Clause> = base.clauses().iter().cloned().collect();
            clauses.extend(subsets(*m, *k as usize).iter().map(|d| Clause::negations(d.iter().map(|&i| vars::selector(i)))));
            let f = CnfFormula::new(clauses, Some(*m)).with_provenance(base.provenance.clone());
            let proof = build_threshold_refutation(*k, *m).map_err(builder_error)?;
            write_proof(s, &f, &proof, out, cnf.as_deref())?;
        }
        Command::RefuteRelativized { graph, k, m, out, cnf } => {
            let g = read_graph(s, graph)?;
            let base = gen_clique(&g, *k);
            let template = symmetric_template(&base).map_err(usage)?;
            let inner = build_clique_refutation(&g, *k).map_err(builder_error)?;
            let proof = build_relativized_refutation(&template, *k, *m, &inner).map_err(builder_error)?;
            let rel = relativize(&base, *k, *m).map_err(usage)?;
            write_proof(s, &rel, &proof, out, cnf.as_deref())?;
        }
        Command::CheckRes { cnf, proof, allow_derivation } => {
            let (f, map) = read_cnf(s, "--cnf", cnf)?;
            let p = read_proof(s, proof, &map)?;
            let meas = if *allow_derivation { check_proof(&f, &p) } else { check_refutation(&f, &p) };
            s.say(meas.map_err(check)?.to_string());
        }
        Command::CompileSos { cnf, proof, out } => {
            let (f, map) = read_cnf(s, "--cnf", cnf)?;
            let p = read_proof(s, proof, &map)?;
            let cert = compile_resolution(&f, &p).map_err(sos_error)?;
            let sys = cnf_system(&f);
            let meas = check_certificate(&sys, &cert).map_err(sos_error)?;
            s.write("--out", out, &certificate_to_json(&sys, &cert))?;
            s.say(meas.to_string());
        }
        Command::CheckSos { cert } => {
            let (sys, c) = read_cert(s, cert)?;
            let meas = check_certificate(&sys, &c).map_err(sos_error)?;
            s.say(meas.to_string());
        }
        Command::TransformCliqueBlock { graph, k, cert, out } => {
            let g = read_graph(s, graph)?;
            let (sys, c) = read_cert(s, cert)?;
            if sys != cnf_system(&gen_clique(&g, *k)) {
                return Err(usage("certificate is not over the clique formula of this graph"));
            }
            let before = check_certificate(&sys, &c).map_err(sos_error)?;
            let block = gen_block(&g, *k).map_err(usage)?;
            let t = transform_clique_to_block(&g, *k, &c).map_err(sos_error)?;
            let after = check_certificate(&block, &t).map_err(sos_error)?;
            s.write("--out", out, &certificate_to_json(&block, &t))?;
            s.say(format!("in: {before}"));
            s.say(format!("out: {after}"));
        }
        Command::TransformBlockXor { xor, k, keep_violating, cert, out } => {
            let xs = read_xor(s, xor)?;
            let xg = build_xor_graph(&xs, *k, *keep_violating).map_err(usage)?;
            let (sys, c) = read_cert(s, cert)?;
            if sys != gen_block(&xg.graph, *k as u32).map_err(usage)? {
                return Err(usage("certificate is not over the block encoding of this XOR graph"));
            }
            let before = check_certificate(&sys, &c).map_err(sos_error)?;
            let t = transform_block_to_xor(&xg, &c).map_err(sos_error)?;
            let target = encode_xor(&xs);
            let after = check_certificate(&target, &t).map_err(sos_error)?;
            s.write("--out", out, &certificate_to_json(&target, &t))?;
            s.say(format!("in: {before}"));
            s.say(format!("out: {after}"));
        }
        Command::Restrict { seed, input, out, witness, base } => {
            s.seed = Some(seed.seed);
            let (rel, _) = read_cnf(s, "--in", input)?;
            let rho = sample_restriction(&rel, seed.seed).map_err(usage)?;
            let restricted = rename_to_base(&apply_restriction(&rel, &rho), &rho);
            let recovery = match base {
                Some(p) => Some(check_recovers_base(&rel, &rho, &read_cnf(s, "--base", p)?.0)),
                None => None,
            };
            #[derive(Serialize)]
            struct Witness<'a> {
                restriction: &'a Restriction,
                recovery: &'a Option<RecoveryWitness>,
            }
            s.write("--out", out, &write_dimacs(&restricted))?;
            s.write("--witness", witness, &to_json(&Witness { restriction: &rho, recovery: &recovery }))?;
            s.say(format!("survivors={:?} clauses={}", rho.survivors, restricted.len()));
            if let Some(RecoveryWitness::Mismatch { clause, only_in }) = &recovery {
                return Err(check(format!("clause {clause} only in {only_in}")));
            }
        }
        Command::Shrink { m, k, l, lprime, trials, seed, out } => {
            s.seed = Some(seed.seed);
            let report = shrinkage_experiment(*m, *k, *l, *lprime, *trials, seed.seed).map_err(usage)?;
            let text = to_json(&report);
            match out {
                Some(p) => {
                    s.write("--out", p, &text)?;
                    s.say(format!(
                        "empirical={} sigma={} default_bound={}",
                        report.empirical_survival, report.sigma, report.default_bound
                    ));
                }
                None => s.stdout.extend_from_slice(text.as_bytes()),
            }
        }
        Command::SosSearch { input, dmax, degree, tol, max_iters, out, cert } => {
            let sys = read_system(s, input)?;
            let opts = SolveOptions { tol_eq: *tol, tol_psd: *tol, max_iters: *max_iters };
            sos_search(s, &sys, *dmax, *degree, &opts, out.as_deref(), cert.as_deref())?;
        }
        Command::Measure { cnf, proof, sys, cert } => {
            if cnf.is_none() && sys.is_none() && cert.is_none() {
                return Err(usage("nothing to measure; pass --cnf, --sys or --cert"));
            }
            if let Some(path) = cnf {
                let (f, map) = read_cnf(s, "--cnf", path)?;
                let (w, dw) = cnf_widths(&f);
                s.say(format!("clauses={} vars={} width={w} domain_width={dw}", f.len(), f.num_vars()));
                if let Some(pp) = proof {
                    let p = read_proof(s, pp, &map)?;
                    s.say(check_proof(&f, &p).map_err(check)?.to_string());
                }
            }
            if let Some(path) = sys {
                let text = s.read("--sys", path)?;
                let sys = ConstraintSystem::from_json(&text).map_err(usage)?;
                let dd = sys.iter().map(|c| c.poly.domain_degree()).max().unwrap_or(0);
                s.say(format!(
                    "constraints={} vars={} degree={} domain_degree={dd}",
                    sys.len(),
                    sys.vars().len(),
                    sys.max_degree()
                ));
            }
            if let Some(path) = cert {
                let (sys, c) = read_cert(s, path)?;
                s.say(measure_certificate(&sys, &c).map_err(sos_error)?.to_string());
            }
        }
        Command::Reproduce { recorded } => {
            let m = RunManifest::load(recorded)?;
            let mismatches = reproduce(&m)?;
            if !mismatches.is_empty() {
                return Err(check(mismatches.join("; ")));
            }
            s.say(format!("reproduced {} with {} outputs", m.command, m.outputs.len()));
        }
    }
    Ok(())
}

fn read_system(s: &mut Session, input: &SystemInput) -> Result<ConstraintSystem, CliError> {
    if let Some(p) = &input.input {
        let text = s.read("--in", p)?;
        return ConstraintSystem::from_json(&text).map_err(|e| usage(format!("{}: {e}", p.display())));
    }
    if let Some(p) = &input.cnf {
        return Ok(cnf_system(&read_cnf(s, "--cnf", p)?.0));
    }
    let p = input.xor.as_ref().context("no input system")?;
    Ok(encode_xor(&read_xor(s, p)?))
}

fn sos_search(
    s: &mut Session,
    sys: &ConstraintSystem,
    dmax: Option<usize>,
    degree: Option<usize>,
    opts: &SolveOptions,
    out: Option<&Path>,
    cert_path: Option<&Path>,
) -> CliResult {
    let (outcome, certificate, extraction_error) = if let Some(d) = degree {
        let cs = build_truncated_system(sys, d);
        let outcome = solve_feasibility(&cs, opts);
        s.say(format!(
            "degree={d} status={} iterations={} dropped={:?}",
            status_name(outcome.status),
            outcome.iterations,
            cs.dropped
        ));
        let (cert, err) = if outcome.status == Status::Feasible {
            match extract_exact(&outcome, &cs) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            }
        } else {
            (None, None)
        };
        (Some(outcome), cert, err)
    } else {
        let d_max = dmax.unwrap_or(4);
        let search = min_degree(sys, d_max, opts);
        for step in &search.steps {
            s.say(format!(
                "degree={} status={} iterations={} dropped={:?}",
                step.degree,
                status_name(step.status),
                step.iterations,
                step.dropped
            ));
        }
        match search.result {
            MinDegree::Found { degree, exact } => s.say(format!("result=found degree={degree} exact={exact}")),
            MinDegree::NotFoundBelow { d_max } => s.say(format!("result=not_found d_max={d_max}")),
        }
        (search.outcome, search.certificate, search.extraction_error)
    };

    if let Some(o) = &outcome {
        if let Some(r) = o.residual {
            s.say(format!("residual={r:e}"));
        }
        if let Some(p) = out {
            s.write("--out", p, &to_json(o))?;
        }
    }
    if let Some(c) = &certificate {
        let meas = check_certificate(sys, c).map_err(sos_error)?;
        s.say(format!("certificate: {meas}"));
        if let Some(p) = cert_path {
            s.write("--cert", p, &certificate_to_json(sys, c))?;
        }
    }
    if let Some(e) = extraction_error {
        return Err(check(format!("exact extraction failed: {e}")));
    }
    Ok(())
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Feasible => "feasible",
        Status::Infeasible => "infeasible",
        Status::Unknown => "unknown",
    }
}
