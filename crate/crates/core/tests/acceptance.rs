//! Acceptance suite. Each test checks one criterion at its pinned
//! tolerance and prints a single PASS/FAIL line; run with
//! `cargo test -p odeig --test acceptance -- --nocapture` to see them.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use odeig::odt::DEFAULT_LAMBDA_RANGE;
use odeig::{
    classify, coefficients_for, count_complex_classes, discover, enumerate_real, fd_gradient_check,
    fd_hessian_check, random_decomp, theoretical_bound, verify_tangent_equivalence, Classification,
    IndexSelection, OrthoDiagDecomp, SymTensor,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RESIDUAL_TOL: f64 = 1e-10;
const SPECTRUM_TOL: f64 = 1e-8;
const TANGENT_TOL: f64 = 1e-8;
const MATCH_TOL: f64 = 1e-6;
const FD_GRADIENT_TOL: f64 = 1e-6;
const FD_HESSIAN_TOL: f64 = 1e-4;
const RESIDUAL_BUDGET: Duration = Duration::from_secs(60);
const ORACLE_BUDGET: Duration = Duration::from_secs(120);
const ORACLE_RESTARTS: usize = 200;
const MONOTONE_SLACK: f64 = 1e-12;

fn report(id: &str, name: &str, ok: bool, detail: String) {
    println!(
        "[{}] {id} {name}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

/// 50 seeded instances spread evenly over every (n, r, m) with
/// n ∈ 2..=6, 1 ≤ r ≤ n and m ∈ 3..=6.
fn suite() -> Vec<OrthoDiagDecomp> {
    let mut grid = Vec::new();
    for m in 3..=6 {
        for n in 2..=6 {
            for r in 1..=n {
                grid.push((n, r, m));
            }
        }
    }
    (0..50)
        .map(|i| {
            let (n, r, m) = grid[i * grid.len() / 50];
            random_decomp(n, r, m, DEFAULT_LAMBDA_RANGE, 1000 + i as u64).unwrap()
        })
        .collect()
}

#[test]
fn suite_spans_the_parameter_space() {
    let s = suite();
    let dims: HashSet<usize> = s.iter().map(|d| d.dim()).collect();
    let orders: HashSet<usize> = s.iter().map(|d| d.order()).collect();
    assert_eq!(dims, (2..=6).collect());
    assert_eq!(orders, (3..=6).collect());
    for m in 3..=6 {
        assert!(s.iter().any(|d| d.order() == m && d.rank() == d.dim()));
        assert!(s.iter().any(|d| d.order() == m && d.rank() < d.dim()));
        assert!(s.iter().any(|d| d.order() == m && d.rank() == 1));
    }
}

#[test]
fn ac1_eigenpair_residual() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut pairs = 0;
    for d in suite() {
        let dense = d.materialize().unwrap();
        for p in enumerate_real(&d).unwrap().pairs {
            let r = dense.eigen_residual(p.eigenvalue, &p.eigenvector).unwrap();
            assert!(!r.is_nan());
            worst = worst.max(r);
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = worst <= RESIDUAL_TOL && elapsed < RESIDUAL_BUDGET;
    report(
        "AC1",
        "eigenpair residual",
        ok,
        format!("max ‖Su^(m-1) − λu‖ = {worst:.3e} over {pairs} pairs in {elapsed:.2?} (tol {RESIDUAL_TOL:e}, budget 60 s)"),
    );
    assert!(ok);
}

/// Independent class count: every subset × every sign of every real root,
/// deduplicated by `u ~ −u` directly on the resulting vectors.
fn brute_force_real_classes(d: &OrthoDiagDecomp) -> usize {
    let (m, r, n) = (d.order(), d.rank(), d.dim());
    let even = m % 2 == 0;
    let mut found: Vec<Vec<f64>> = Vec::new();
    for mask in 1usize..(1 << r) {
        let idx: Vec<usize> = (0..r).filter(|i| mask >> i & 1 == 1).collect();
        let k = idx.len();
        let sel = IndexSelection::new(idx.clone(), r).unwrap();
        let patterns: Vec<Option<Vec<i8>>> = if even {
            (0..1usize << k)
                .map(|b| {
                    Some(
                        (0..k)
                            .map(|p| if b >> p & 1 == 1 { -1 } else { 1 })
                            .collect(),
                    )
                })
                .collect()
        } else {
            vec![None]
        };
        for signs in patterns {
            let c = coefficients_for(&sel, d.lambdas(), m, signs.as_deref()).unwrap();
            let mut u = vec![0.0; n];
            for (&i, ci) in idx.iter().zip(&c.normalized) {
                for (row, x) in u.iter_mut().enumerate() {
                    *x += ci * d.u_matrix()[(row, i)];
                }
            }
            let dup = found.iter().any(|v| {
                let plus: f64 = v
                    .iter()
                    .zip(&u)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let minus: f64 = v
                    .iter()
                    .zip(&u)
                    .map(|(a, b)| (a + b).abs())
                    .fold(0.0, f64::max);
                plus < 1e-8 || (even && minus < 1e-8)
            });
            if !dup {
                found.push(u);
            }
        }
    }
    found.len()
}

#[test]
fn ac2_counting() {
    let mut failures = Vec::new();
    let mut checked = 0;
    for d in suite() {
        let (m, n, r) = (d.order(), d.dim(), d.rank());
        let rep = enumerate_real(&d).unwrap();
        let expected_real = if m % 2 == 1 {
            (1u128 << r) - 1
        } else {
            (3u128.pow(r as u32) - 1) / 2
        };
        let brute = brute_force_real_classes(&d);
        let complex = ((m as u128 - 1).pow(r as u32) - 1) / (m as u128 - 2);
        let bound = ((m as u128 - 1).pow(n as u32) - 1) / (m as u128 - 2);
        let mut ok = rep.real_class_count as u128 == expected_real
            && rep.pairs.len() == brute
            && brute as u128 == expected_real
            && rep.complex_class_count == complex
            && count_complex_classes(m, r).unwrap() == complex
            && rep.bound == bound
            && theoretical_bound(m, n).unwrap() == bound
            && rep.complex_class_count <= rep.bound;
        if r == n {
            ok &= rep.complex_class_count == rep.bound;
        }
        if !ok {
            failures.push(format!("(n={n}, r={r}, m={m})"));
        }
        checked += 1;
    }
    let ok = failures.is_empty();
    report(
        "AC2",
        "counting",
        ok,
        format!("{checked} instances, exact integer equality; failures: {failures:?}"),
    );
    assert!(ok);
}

#[test]
fn ac3_spectrum_reproduction() {
    let mut worst_rel = 0.0_f64;
    let mut pairs = 0;
    for d in suite() {
        let s = d.materialize().unwrap();
        for p in enumerate_real(&d).unwrap().pairs {
            let rep = classify(&s, &p).unwrap();
            let scale = p.eigenvalue.max(1.0);
            worst_rel = worst_rel.max(rep.spectrum_match_error / scale);
            pairs += 1;
        }
    }
    let ok = worst_rel <= SPECTRUM_TOL;
    report(
        "AC3",
        "spectrum reproduction",
        ok,
        format!("max sorted-entry gap / max(1, λ) = {worst_rel:.3e} over {pairs} pairs (tol {SPECTRUM_TOL:e})"),
    );
    assert!(ok);
}

#[test]
fn ac4_classification_totals() {
    let mut problems = Vec::new();
    let mut integrity_failures = 0;
    for d in suite() {
        let (m, n, r) = (d.order(), d.dim(), d.rank());
        let s = d.materialize().unwrap();
        let mut maxes = 0;
        let mut min_pairs = 0;
        let mut min_selections = HashSet::new();
        let mut saddles = 0;
        let pairs = enumerate_real(&d).unwrap().pairs;
        for p in &pairs {
            let rep = classify(&s, p).unwrap();
            if !rep.is_consistent() {
                integrity_failures += 1;
            }
            match rep.classification {
                Classification::IsolatedLocalMax => maxes += 1,
                Classification::IsolatedLocalMin => {
                    min_pairs += 1;
                    min_selections.insert(p.selection.clone());
                }
                Classification::Saddle => saddles += 1,
            }
        }
        // one class for odd m; for even m the 2^(n-1) sign variants of the
        // single selection A = {1..n}
        let expected_min_pairs = match (r == n, m % 2) {
            (false, _) => 0,
            (true, 1) => 1,
            (true, _) => 1usize << (n - 1),
        };
        let ok = maxes == r
            && min_pairs == expected_min_pairs
            && min_selections.len() == usize::from(r == n)
            && maxes + min_pairs + saddles == pairs.len();
        if !ok {
            problems.push(format!(
                "(n={n}, r={r}, m={m}): max {maxes}, min {min_pairs} over {} selections, saddle {saddles}",
                min_selections.len()
            ));
        }
    }
    let ok = problems.is_empty() && integrity_failures == 0;
    report(
        "AC4",
        "classification totals",
        ok,
        format!("integrity failures {integrity_failures}; problems: {problems:?}"),
    );
    assert!(ok);
}

#[test]
fn ac5_tangent_equivalence() {
    let mut worst = 0.0_f64;
    let mut pairs = 0;
    for d in suite() {
        let s = d.materialize().unwrap();
        for p in enumerate_real(&d).unwrap().pairs {
            worst = worst.max(verify_tangent_equivalence(&s, &p).unwrap());
            pairs += 1;
        }
    }
    let ok = worst <= TANGENT_TOL;
    report(
        "AC5",
        "projected Hessian equivalence",
        ok,
        format!("max |eig(Q₂ᵀHQ₂) ∪ {{0}} − eig(M)| = {worst:.3e} over {pairs} pairs (tol {TANGENT_TOL:e})"),
    );
    assert!(ok);
}

#[test]
fn ac6_oracle_soundness_and_completeness() {
    let start = Instant::now();
    let mut instances = Vec::new();
    let mut seed = 5000;
    for m in 3..=4 {
        for n in 2..=5 {
            for r in 1..=n {
                seed += 1;
                instances.push(random_decomp(n, r, m, DEFAULT_LAMBDA_RANGE, seed).unwrap());
            }
        }
    }
    let mut problems = Vec::new();
    let mut worst_match = 0.0_f64;
    let mut discoveries = 0;
    let mut null_space = 0;
    let mut worst_drop = 0.0_f64;
    for (i, d) in instances.iter().enumerate() {
        let rep = discover(d, ORACLE_RESTARTS, 77 + i as u64).unwrap();
        discoveries += rep.discovered.len();
        null_space += rep.null_discovered.len();
        assert!(rep.null_discovered.is_empty() || d.rank() < d.dim());
        worst_drop = rep
            .traces
            .iter()
            .map(|t| t.max_objective_drop())
            .fold(worst_drop, f64::max);
        worst_match = rep
            .matched
            .iter()
            .map(|m| m.distance)
            .fold(worst_match, f64::max);
        if !rep.unmatched_discovered.is_empty() || rep.coverage < 1.0 {
            problems.push(format!(
                "(n={}, r={}, m={}): unmatched {:?}, coverage {}",
                d.dim(),
                d.rank(),
                d.order(),
                rep.unmatched_discovered,
                rep.coverage
            ));
        }
    }
    let elapsed = start.elapsed();
    let ok = problems.is_empty()
        && worst_match <= MATCH_TOL
        && worst_drop <= MONOTONE_SLACK
        && elapsed < ORACLE_BUDGET;
    report(
        "AC6",
        "oracle soundness/completeness",
        ok,
        format!(
            "{} instances, {discoveries} distinct discoveries ({null_space} on the λ = 0 null space), worst match {worst_match:.3e} (tol {MATCH_TOL:e}), worst objective drop {worst_drop:.1e} (slack {MONOTONE_SLACK:e}), {elapsed:.2?} (budget 120 s); problems: {problems:?}",
            instances.len()
        ),
    );
    assert!(ok);
}

#[test]
fn ac7_derivative_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_grad = 0.0_f64;
    let mut worst_hess = 0.0_f64;
    for probe in 0..20 {
        let n = rng.random_range(2..=5);
        let m = rng.random_range(3..=5);
        let r = rng.random_range(1..=n);
        let d = random_decomp(n, r, m, DEFAULT_LAMBDA_RANGE, 9000 + probe).unwrap();
        let s: SymTensor = d.materialize().unwrap();
        let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nrm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= nrm);
        let lambda = rng.random_range(0.5..10.0);
        worst_grad = worst_grad.max(fd_gradient_check(&s, &u, 1e-5).unwrap());
        worst_hess = worst_hess.max(fd_hessian_check(&s, lambda, &u, 1e-4).unwrap());
    }
    let ok = worst_grad <= FD_GRADIENT_TOL && worst_hess <= FD_HESSIAN_TOL;
    report(
        "AC7",
        "derivative checks",
        ok,
        format!(
            "20 probes: gradient deviation {worst_grad:.3e} (tol {FD_GRADIENT_TOL:e}), Hessian deviation {worst_hess:.3e} (tol {FD_HESSIAN_TOL:e})"
        ),
    );
    assert!(ok);
}
