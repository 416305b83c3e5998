use std::collections::HashMap;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use sosforge_core::algebra::vars::xor_var;
use sosforge_core::algebra::{rational, ConstraintSystem, Monomial, Poly, PolynomialConstraint, Relation};
use sosforge_core::formulas::{
    build_xor_graph, encode_xor, gen_block, Clause, CnfFormula, Graph, Lit, XorEquation, XorSystem,
};
use sosforge_core::sos::{
    check_certificate, cnf_system, EqualityTerm, InequalityTerm, SosCertificate, SquareSum,
};
use sosforge_lasserre::{
    build_coefficient_system, build_truncated_system, extract_exact, min_degree, monomials_up_to,
    solve_feasibility, CoefficientSystem, MinDegree, SdpOutcome, SolveOptions, Status,
};

fn xor_pair() -> ConstraintSystem {
    encode_xor(
        &XorSystem::new(
            3,
            vec![
                XorEquation { vars: [1, 2, 3], rhs: false },
                XorEquation { vars: [1, 2, 3], rhs: true },
            ],
        )
        .unwrap(),
    )
}

fn block_instance(blocks: Vec<Vec<usize>>) -> ConstraintSystem {
    let n = blocks.iter().map(Vec::len).sum();
    let k = blocks.len() as u32;
    let mut g = Graph::with_vertices(n);
    g.set_partition(blocks).unwrap();
    gen_block(&g, k).unwrap()
}

/// Recomputes, from the constraint polynomials alone, that the evidence is
/// a normalized functional vanishing on the ideal part with PSD moment
/// matrices.
fn assert_evidence(cs: &CoefficientSystem, out: &SdpOutcome) {
    let l = out.evidence.as_ref().expect("evidence");
    let value: HashMap<&Monomial, f64> = cs.rows.iter().zip(l).map(|(m, v)| (m, *v)).collect();
    let apply = |p: &Poly| -> f64 {
        p.terms().map(|(m, c)| c.to_f64().unwrap() * value[m]).sum()
    };
    assert!((value[&Monomial::one()] - 1.0).abs() < 1e-12);
    let vars: Vec<_> = cs.system.vars().into_iter().collect();
    let d = cs.degree;
    for (i, c) in cs.system.iter().enumerate() {
        let deg = c.poly.degree();
        if deg > d {
            assert!(cs.dropped.contains(&i));
            continue;
        }
        match c.relation {
            Relation::EqZero => {
                for m in monomials_up_to(&vars, d - deg) {
                    let v = apply(&(&Poly::monomial(m, rational(1)) * &c.poly));
                    assert!(v.abs() < 1e-6, "L(m f) = {v}");
                }
            }
            Relation::GeqZero => assert_psd(&vars, (d - deg) / 2, &c.poly, &apply),
        }
    }
    assert_psd(&vars, d / 2, &Poly::one(), &apply);
}

fn assert_psd(vars: &[sosforge_core::algebra::VarId], half: usize, h: &Poly, apply: &dyn Fn(&Poly) -> f64) {
    let basis = monomials_up_to(vars, half);
    let n = basis.len();
    let m = DMatrix::from_fn(n, n, |a, b| {
        let vv = Poly::monomial(basis[a].mul(&basis[b]), rational(1));
        apply(&(&vv * h))
    });
    let lmin = m.symmetric_eigenvalues().min();
    assert!(lmin > -1e-6, "moment matrix eigenvalue {lmin}");
}

#[test]
fn contradictory_xor_pair_has_degree_three() {
    let sys = xor_pair();
    let opts = SolveOptions::default();
    let low = build_truncated_system(&sys, 2);
    let out = solve_feasibility(&low, &opts);
    assert_eq!(out.status, Status::Infeasible);
    assert_evidence(&low, &out);
    // With every constraint above degree 2, the uniform pseudo-expectation
    // is one valid functional; whatever is returned must be one.
    let high = build_coefficient_system(&sys, 3).unwrap();
    let out = solve_feasibility(&high, &opts);
    assert_eq!(out.status, Status::Feasible);
    assert!(out.residual.unwrap() <= 1e-6);
    let cert = extract_exact(&out, &high).unwrap();
    assert_eq!(check_certificate(&sys, &cert).unwrap().degree, 3);
    // −1 = −f₀ + f₁ with integer multipliers.
    assert!(cert.equality.iter().all(|t| t.g.as_constant().is_some_and(|c| c.is_integer())));

    let search = min_degree(&sys, 5, &opts);
    assert_eq!(search.result, MinDegree::Found { degree: 3, exact: true });
    let statuses: Vec<Status> = search.steps.iter().map(|s| s.status).collect();
    assert_eq!(
        statuses,
        [Status::Infeasible, Status::Infeasible, Status::Infeasible, Status::Feasible]
    );
}

#[test]
fn equality_pair_has_degree_one() {
    let x = Poly::var(xor_var(1));
    let sys = ConstraintSystem::new(vec![
        PolynomialConstraint::eq_zero(x.clone()),
        PolynomialConstraint::eq_zero(&x - &Poly::one()),
    ]);
    let search = min_degree(&sys, 3, &SolveOptions::default());
    assert_eq!(search.result, MinDegree::Found { degree: 1, exact: true });
    let cert = search.certificate.unwrap();
    assert!(cert.inequality.is_empty() && cert.free.is_empty());
    check_certificate(&sys, &cert).unwrap();
}

#[test]
fn satisfiable_system_not_found() {
    let sys = ConstraintSystem::new(vec![PolynomialConstraint::eq_zero(Poly::var(xor_var(1)))]);
    let search = min_degree(&sys, 4, &SolveOptions::default());
    assert_eq!(search.result, MinDegree::NotFoundBelow { d_max: 4 });
    assert!(search.steps.iter().all(|s| s.status == Status::Infeasible));
}

#[test]
fn small_block_instances_need_squares() {
    for blocks in [vec![vec![0], vec![1]], vec![vec![0, 1], vec![2]]] {
        let sys = block_instance(blocks);
        let search = min_degree(&sys, 2, &SolveOptions::default());
        assert_eq!(search.result, MinDegree::Found { degree: 1, exact: true });
        let cert = search.certificate.unwrap();
        assert!(!cert.inequality.is_empty());
        assert!(check_certificate(&sys, &cert).unwrap().degree <= 2);
    }
}

#[test]
fn two_by_two_blocks() {
    // Hand certificate: Σ_{u,v} (x_u x_v)² (1 − x_u − x_v) = −Σ x_u x_v, and
    // Σ x_u x_v = (Σ_{B₁} x)(Σ_{B₂} x) = 1 modulo the block equalities.
    let sys = block_instance(vec![vec![0, 1], vec![2, 3]]);
    let x = |i: u32, v: u32| Poly::var(sosforge_core::algebra::vars::clique_x(i, v));
    let mut cert = SosCertificate::refutation();
    for h in 2..6 {
        let vars: Vec<_> = sys[h].poly.vars().into_iter().collect();
        let q = &Poly::var(vars[0]) * &Poly::var(vars[1]);
        cert.inequality.push(InequalityTerm { u: SquareSum::of(vec![q]), h });
    }
    cert.equality.push(EqualityTerm { g: &x(2, 3) + &x(2, 4), f: 0 });
    cert.equality.push(EqualityTerm { g: Poly::one(), f: 1 });
    assert_eq!(check_certificate(&sys, &cert).unwrap().degree, 2);

    // The search builds u from monomials of degree ⌊(d − deg h)/2⌋, which
    // excludes x_u x_v at d = 2; its first certificate has degree 3.
    let opts = SolveOptions::default();
    let cs = build_coefficient_system(&sys, 2).unwrap();
    let out = solve_feasibility(&cs, &opts);
    assert_eq!(out.status, Status::Infeasible);
    assert_evidence(&cs, &out);
    let search = min_degree(&sys, 3, &opts);
    assert_eq!(search.result, MinDegree::Found { degree: 3, exact: true });
}

#[test]
fn xor_graph_block_within_transform_bound() {
    let xs = XorSystem::new(
        3,
        vec![
            XorEquation { vars: [1, 2, 3], rhs: false },
            XorEquation { vars: [1, 2, 3], rhs: true },
        ],
    )
    .unwrap();
    let xg = build_xor_graph(&xs, 2, false).unwrap();
    let block = gen_block(&xg.graph, 2).unwrap();
    let opts = SolveOptions::default();
    let MinDegree::Found { degree: dx, .. } = min_degree(&encode_xor(&xs), 4, &opts).result else {
        panic!("pair is refutable");
    };
    let search = min_degree(&block, 3 * dx, &opts);
    let MinDegree::Found { degree: db, exact } = search.result else {
        panic!("block encoding is refutable: {:?}", search.steps);
    };
    assert!(exact);
    assert!(db <= 3 * dx, "{db} > 3·{dx}");
}

#[test]
fn outcome_json_round_trip() {
    let cs = build_truncated_system(&xor_pair(), 2);
    let out = solve_feasibility(&cs, &SolveOptions::default());
    let text = serde_json::to_string(&out).unwrap();
    let back: SdpOutcome = serde_json::from_str(&text).unwrap();
    assert_eq!(back.status, out.status);
    assert_eq!(back.evidence, out.evidence);
    assert!(text.contains("\"status\":\"infeasible\""));
}

fn satisfiable(sys: &ConstraintSystem) -> bool {
    let vars: Vec<_> = sys.vars().into_iter().collect();
    (0u32..1 << vars.len()).any(|mask| {
        sys.iter().all(|c| {
            c.holds(|v| vars.iter().position(|&w| w == v).map(|i| mask >> i & 1 == 1))
                .unwrap()
        })
    })
}

fn cnf_strategy() -> impl Strategy<Value = CnfFormula> {
    let lit = (1u32..=4, any::<bool>()).prop_map(|(v, s)| Lit::new(xor_var(v), s));
    let clause = prop::collection::vec(lit, 1..=2);
    prop::collection::vec(clause, 1..=7).prop_map(|cs| {
        CnfFormula::new(cs.into_iter().filter_map(|c| Clause::new(c).ok()), None)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Satisfiable systems are never refuted, and feasibility is monotone
    /// in the degree.
    #[test]
    fn soundness_and_monotonicity(f in cnf_strategy()) {
        let sys = cnf_system(&f);
        let sat = satisfiable(&sys);
        let opts = SolveOptions::default();
        let mut seen_feasible = false;
        for d in 1..=3 {
            let out = solve_feasibility(&build_coefficient_system(&sys, d).unwrap(), &opts);
            prop_assert!(out.status != Status::Unknown, "d={} {}", d, out.message);
            if sat {
                prop_assert_eq!(out.status, Status::Infeasible);
            }
            if seen_feasible {
                prop_assert_eq!(out.status, Status::Feasible);
            }
            seen_feasible |= out.status == Status::Feasible;
        }
    }
}
