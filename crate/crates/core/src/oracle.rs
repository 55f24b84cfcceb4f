//! Independent numerical checks.
//!
//! The shifted power iteration works on the dense tensor only and never
//! sees the decomposition's closed form, so agreement with
//! [`crate::enumerate`] is a genuine cross-check. Finite differences verify
//! the analytic gradient and Lagrangian Hessian.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::enumerate::{enumerate_real, Eigenpair};
use crate::error::{Error, Result};
use crate::linalg::{check_unit, dot, fmax, norm};
use crate::odt::OrthoDiagDecomp;
use crate::stability::lagrangian_hessian;
use crate::symtensor::SymTensor;
use crate::tol;

#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub start: Vec<f64>,
    pub shift: f64,
    /// Updates applied before stopping.
    pub iterations: usize,
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    pub converged: bool,
    pub residual: f64,
    /// `S u^m` at every visited iterate, start included.
    pub objective: Vec<f64>,
}

impl IterationTrace {
    /// Largest decrease of the objective between consecutive iterates.
    pub fn max_objective_drop(&self) -> f64 {
        self.objective
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

/// Iterates `u ← normalize(S u^{m−1} + shift·u)` from a unit `start`
/// until `‖S u^{m−1} − λu‖_max` drops below the convergence tolerance
/// or `max_iters` updates have been applied.
pub fn shifted_power_iterate(
    s: &SymTensor,
    start: &[f64],
    shift: f64,
    max_iters: usize,
) -> Result<IterationTrace> {
    if start.len() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "start of length {} against dimension {}",
            start.len(),
            s.dim()
        )));
    }
    check_unit(start)?;
    if !(shift >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "shift must be >= 0 (got {shift})"
        )));
    }
    let mut u = start.to_vec();
    let mut objective = Vec::new();
    let mut iterations = 0;
    loop {
        let g = s.contract_grad(&u)?;
        let lambda = dot(&u, &g);
        objective.push(lambda);
        let residual = g
            .iter()
            .zip(&u)
            .fold(0.0, |acc, (gi, ui)| fmax(acc, (gi - lambda * ui).abs()));
        let converged = residual <= tol::ORACLE_CONVERGED;
        if converged || iterations == max_iters {
            return Ok(IterationTrace {
                start: start.to_vec(),
                shift,
                iterations,
                eigenvalue: lambda,
                eigenvector: u,
                converged,
                residual,
                objective,
            });
        }
        let mut next: Vec<f64> = g.iter().zip(&u).map(|(gi, ui)| gi + shift * ui).collect();
        let nrm = norm(&next);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::ZeroUpdate(iterations));
        }
        next.iter_mut().for_each(|x| *x /= nrm);
        u = next;
        iterations += 1;
    }
}

/// A distinct converged fixed point of the iteration.
#[derive(Debug, Clone)]
pub struct DiscoveredPair {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    /// First restart that reached it.
    pub restart: usize,
    /// Number of restarts that reached it.
    pub hits: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairMatch {
    pub discovered: usize,
    pub enumerated: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct MatchReport {
    pub discovered: Vec<DiscoveredPair>,
    pub matched: Vec<PairMatch>,
    /// Indices into `discovered` with no enumerated counterpart.
    pub unmatched_discovered: Vec<usize>,
    /// Indices into `discovered` that sit on the `λ = 0` eigenvectors
    /// (`S u^{m−1} ≈ 0`, possible only when `r < n`). These are genuine
    /// eigenpairs outside the `λ > 0` family the enumeration produces, so
    /// they are kept apart from `unmatched_discovered`.
    pub null_discovered: Vec<usize>,
    /// Fraction of `k = 1` enumerated pairs that were discovered.
    pub coverage: f64,
    pub restarts: usize,
    pub nonconverged: usize,
    pub shift: f64,
    pub traces: Vec<IterationTrace>,
}

impl MatchReport {
    pub fn is_complete(&self) -> bool {
        self.unmatched_discovered.is_empty() && self.coverage >= 1.0
    }
}

/// Distance between `(λa, ua)` and `(λb, ub)` up to the sign flip
/// `(λ, u) ~ ((−1)^m λ, −u)`: the smaller over both signs of
/// `max(‖ua − s·ub‖, |λa − s^m λb|)`.
pub fn pair_distance(order: usize, la: f64, ua: &[f64], lb: f64, ub: &[f64]) -> f64 {
    [1.0_f64, -1.0]
        .iter()
        .map(|&s| {
            let dv = ua
                .iter()
                .zip(ub)
                .map(|(a, b)| (a - s * b).powi(2))
                .sum::<f64>()
                .sqrt();
            let dl = (la - s.powi(order as i32) * lb).abs();
            dv.max(dl)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Matches each discovered pair to its nearest enumerated pair.
pub fn match_discoveries(
    order: usize,
    discovered: &[DiscoveredPair],
    enumerated: &[Eigenpair],
) -> (Vec<PairMatch>, Vec<usize>, f64) {
    let mut matched = Vec::new();
    let mut unmatched = Vec::new();
    let mut found = vec![false; enumerated.len()];
    for (di, d) in discovered.iter().enumerate() {
        let best = enumerated
            .iter()
            .enumerate()
            .map(|(ei, e)| {
                let dist = pair_distance(
                    order,
                    d.eigenvalue,
                    &d.eigenvector,
                    e.eigenvalue,
                    &e.eigenvector,
                );
                (ei, dist)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((ei, dist)) if dist <= tol::ORACLE_MATCH => {
                found[ei] = true;
                matched.push(PairMatch {
                    discovered: di,
                    enumerated: ei,
                    distance: dist,
                });
            }
            _ => unmatched.push(di),
        }
    }
    let maxima: Vec<usize> = (0..enumerated.len())
        .filter(|&i| enumerated[i].k() == 1)
        .collect();
    let coverage = if maxima.is_empty() {
        1.0
    } else {
        maxima.iter().filter(|&&i| found[i]).count() as f64 / maxima.len() as f64
    };
    (matched, unmatched, coverage)
}

/// `count` random unit vectors in `R^n` drawn from one generator seeded
/// with `seed`; the starts [`discover`] uses.
pub fn random_starts(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_unit(&mut rng, n)).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let nrm = norm(&v);
        if nrm > 1e-8 {
            return v.into_iter().map(|x| x / nrm).collect();
        }
    }
}

/// Runs the shifted iteration from `restarts` seeded random unit starts
/// with shift `1 + max λᵢ` and matches its fixed points against the
/// closed-form enumeration.
pub fn discover(d: &OrthoDiagDecomp, restarts: usize, seed: u64) -> Result<MatchReport> {
    d.ensure_valid()?;
    let s = d.materialize()?;
    let enumerated = enumerate_real(d)?.pairs;
    let starts = random_starts(d.dim(), restarts, seed);
    discover_from_starts(&s, &starts, 1.0 + d.max_lambda(), &enumerated)
}

/// [`discover`] with explicit starts, shift and reference pairs.
pub fn discover_from_starts(
    s: &SymTensor,
    starts: &[Vec<f64>],
    shift: f64,
    enumerated: &[Eigenpair],
) -> Result<MatchReport> {
    let order = s.order();
    let mut traces = Vec::with_capacity(starts.len());
    for start in starts {
        traces.push(shifted_power_iterate(
            s,
            start,
            shift,
            tol::ORACLE_MAX_ITERS,
        )?);
    }

    let mut discovered: Vec<DiscoveredPair> = Vec::new();
    let mut nonconverged = 0;
    for (restart, t) in traces.iter().enumerate() {
        if !t.converged {
            nonconverged += 1;
            continue;
        }
        let existing = discovered.iter_mut().find(|p| {
            pair_distance(
                order,
                p.eigenvalue,
                &p.eigenvector,
                t.eigenvalue,
                &t.eigenvector,
            ) < tol::ORACLE_DEDUP
        });
        match existing {
            Some(p) => p.hits += 1,
            None => discovered.push(DiscoveredPair {
                eigenvalue: t.eigenvalue,
                eigenvector: t.eigenvector.clone(),
                restart,
                hits: 1,
                residual: t.residual,
            }),
        }
    }

    let (matched, unmatched, coverage) = match_discoveries(order, &discovered, enumerated);
    let (null_discovered, unmatched_discovered) = unmatched.into_iter().partition(|&i| {
        let p = &discovered[i];
        p.eigenvalue.abs() <= tol::ORACLE_NULL_EIGENVALUE
            && s.contract_grad(&p.eigenvector).is_ok_and(|g| {
                g.iter().fold(0.0, |a: f64, x| fmax(a, x.abs())) <= tol::ORACLE_NULL_EIGENVALUE
            })
    });
    Ok(MatchReport {
        discovered,
        matched,
        unmatched_discovered,
        null_discovered,
        coverage,
        restarts: starts.len(),
        nonconverged,
        shift,
        traces,
    })
}

fn check_step(step: f64) -> Result<()> {
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must lie in [1e-7, 1e-3] (got {step})"
        )));
    }
    Ok(())
}

/// Largest entrywise gap between central differences of `S u^m` and
/// `m · S u^{m−1}`.
pub fn fd_gradient_check(s: &SymTensor, u: &[f64], step: f64) -> Result<f64> {
    check_step(step)?;
    let g = s.contract_grad(u)?;
    let m = s.order() as f64;
    let mut worst = 0.0_f64;
    let mut x = u.to_vec();
    for j in 0..u.len() {
        x[j] = u[j] + step;
        let up = s.contract_full(&x)?;
        x[j] = u[j] - step;
        let dn = s.contract_full(&x)?;
        x[j] = u[j];
        worst = worst.max(((up - dn) / (2.0 * step) - m * g[j]).abs());
    }
    Ok(worst)
}

/// Largest entrywise gap between second central differences of
/// `L(u, λ) = S u^m / m − λ(uᵀu − 1)/2` and `(m−1) S u^{m−2} − λI`.
pub fn fd_hessian_check(s: &SymTensor, eigenvalue: f64, u: &[f64], step: f64) -> Result<f64> {
    check_step(step)?;
    if !(eigenvalue > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue must be positive (got {eigenvalue})"
        )));
    }
    let h = lagrangian_hessian(s, eigenvalue, u)?;
    let m = s.order() as f64;
    let lagrangian = |x: &[f64]| -> Result<f64> {
        Ok(s.contract_full(x)? / m - 0.5 * eigenvalue * (dot(x, x) - 1.0))
    };
    let n = u.len();
    let mut worst = 0.0_f64;
    let mut x = u.to_vec();
    for i in 0..n {
        for j in i..n {
            let mut eval = |di: f64, dj: f64| -> Result<f64> {
                x.copy_from_slice(u);
                x[i] += di;
                x[j] += dj;
                lagrangian(&x)
            };
            let fd = (eval(step, step)? - eval(step, -step)? - eval(-step, step)?
                + eval(-step, -step)?)
                / (4.0 * step * step);
            worst = worst.max((fd - h[(i, j)]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::IndexSelection;
    use crate::linalg::Matrix;
    use crate::odt::{random_decomp, DEFAULT_LAMBDA_RANGE};

    fn five_e1() -> SymTensor {
        OrthoDiagDecomp::new(
            3,
            Matrix::from_columns(&[vec![1.0, 0.0]]).unwrap(),
            vec![5.0],
        )
        .unwrap()
        .materialize()
        .unwrap()
    }

    #[test]
    fn single_attractor() {
        let t = shifted_power_iterate(&five_e1(), &[0.8, 0.6], 1.0, 5000).unwrap();
        assert!(t.converged);
        assert!((t.eigenvalue - 5.0).abs() < 1e-8);
        assert!(t.eigenvector[0].abs() > 1.0 - 1e-9);
        assert!(t.max_objective_drop() <= tol::ORACLE_MONOTONE_SLACK);
    }

    #[test]
    fn fixed_point_start_converges_immediately() {
        let d = random_decomp(4, 3, 4, DEFAULT_LAMBDA_RANGE, 1).unwrap();
        let s = d.materialize().unwrap();
        for i in 0..3 {
            let t = shifted_power_iterate(&s, &d.column(i), 1.0 + d.max_lambda(), 5000).unwrap();
            assert!(t.converged);
            assert!(t.iterations <= 2);
        }
    }

    #[test]
    fn unit_lambdas_order_four_discoveries_match() {
        let d = OrthoDiagDecomp::new(4, Matrix::identity(2).unwrap(), vec![1.0, 1.0]).unwrap();
        let rep = discover(&d, 200, 3).unwrap();
        assert!(rep.unmatched_discovered.is_empty());
        assert_eq!(rep.coverage, 1.0);
        assert!(rep.matched.iter().all(|m| m.distance <= 1e-6));
    }

    #[test]
    fn rank_one_full_coverage() {
        let d = random_decomp(3, 1, 3, DEFAULT_LAMBDA_RANGE, 4).unwrap();
        let rep = discover(&d, 50, 0).unwrap();
        assert_eq!(rep.coverage, 1.0);
        assert!(rep.unmatched_discovered.is_empty());
    }

    #[test]
    fn saddle_is_not_an_attractor() {
        let u = Matrix::from_columns(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let d = OrthoDiagDecomp::new(3, u, vec![2.0, 8.0]).unwrap();
        let rep = discover(&d, 200, 5).unwrap();
        assert_eq!(rep.coverage, 1.0);
        assert!(rep.unmatched_discovered.is_empty());
        // enumeration order: {1}, {2}, {1,2}; in dimension 3 the k = 2 pair is a saddle
        assert!(rep.matched.iter().all(|m| m.enumerated != 2));
    }

    #[test]
    fn injected_enumerated_starts_all_match() {
        let d = random_decomp(4, 3, 3, DEFAULT_LAMBDA_RANGE, 8).unwrap();
        let s = d.materialize().unwrap();
        let pairs = enumerate_real(&d).unwrap().pairs;
        let starts: Vec<Vec<f64>> = pairs.iter().map(|p| p.eigenvector.clone()).collect();
        let rep = discover_from_starts(&s, &starts, 1.0 + d.max_lambda(), &pairs).unwrap();
        assert_eq!(rep.nonconverged, 0);
        assert_eq!(rep.discovered.len(), pairs.len());
        assert!(rep.unmatched_discovered.is_empty());
    }

    #[test]
    fn corrupt_reference_is_flagged() {
        let d = random_decomp(3, 2, 3, DEFAULT_LAMBDA_RANGE, 12).unwrap();
        let s = d.materialize().unwrap();
        let mut pairs = enumerate_real(&d).unwrap().pairs;
        pairs[0].eigenvector[0] += 1e-3;
        let starts: Vec<Vec<f64>> = (0..2).map(|i| d.column(i)).collect();
        let rep = discover_from_starts(&s, &starts, 1.0 + d.max_lambda(), &pairs).unwrap();
        assert_eq!(rep.unmatched_discovered, vec![0]);
        assert!(rep.coverage < 1.0);
    }

    #[test]
    fn null_space_start_is_kept_apart() {
        let u = Matrix::from_columns(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let d = OrthoDiagDecomp::new(4, u, vec![2.0]).unwrap();
        let s = d.materialize().unwrap();
        let pairs = enumerate_real(&d).unwrap().pairs;
        let starts = vec![vec![0.0, 0.6, 0.8], vec![1.0, 0.0, 0.0]];
        let rep = discover_from_starts(&s, &starts, 3.0, &pairs).unwrap();
        assert_eq!(rep.null_discovered, vec![0]);
        assert!(rep.unmatched_discovered.is_empty());
        assert_eq!(rep.coverage, 1.0);
    }

    #[test]
    fn iterate_rejects_bad_input() {
        let s = five_e1();
        assert!(shifted_power_iterate(&s, &[1.0, 1.0], 1.0, 10).is_err());
        assert!(shifted_power_iterate(&s, &[1.0, 0.0], -1.0, 10).is_err());
        assert!(shifted_power_iterate(&s, &[1.0], 1.0, 10).is_err());
    }

    #[test]
    fn degenerate_update_is_an_error() {
        // the update only vanishes or overflows when no direction is left to normalize
        let s = SymTensor::from_entries(3, 2, vec![f64::MAX; 8]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(matches!(
            shifted_power_iterate(&s, &[h, h], 1.0, 10),
            Err(Error::ZeroUpdate(0))
        ));

        let z = SymTensor::zeros(3, 2).unwrap();
        let t = shifted_power_iterate(&z, &[1.0, 0.0], 0.0, 10).unwrap();
        assert!(t.converged && t.eigenvalue == 0.0);
    }

    #[test]
    fn pair_distance_respects_sign_class() {
        let u = [0.6, 0.8];
        let neg = [-0.6, -0.8];
        assert_eq!(pair_distance(3, 2.0, &u, -2.0, &neg), 0.0);
        assert!(pair_distance(3, 2.0, &u, 2.0, &neg) > 1.0);
        assert_eq!(pair_distance(4, 2.0, &u, 2.0, &neg), 0.0);
    }

    #[test]
    fn fd_gradient_examples() {
        let d = random_decomp(4, 3, 3, DEFAULT_LAMBDA_RANGE, 30).unwrap();
        let s = d.materialize().unwrap();
        let u = [0.1, -0.5, 0.7, 0.2];
        assert!(fd_gradient_check(&s, &u, 1e-5).unwrap() <= 1e-6);

        let z = SymTensor::zeros(3, 4).unwrap();
        assert_eq!(fd_gradient_check(&z, &u, 1e-5).unwrap(), 0.0);

        let d = random_decomp(4, 4, 4, DEFAULT_LAMBDA_RANGE, 31).unwrap();
        let s = d.materialize().unwrap();
        assert!(fd_gradient_check(&s, &u, 1e-5).unwrap() <= 1e-5);

        assert!(fd_gradient_check(&s, &u, 1e-2).is_err());
        assert!(fd_gradient_check(&s, &u, 1e-9).is_err());
    }

    #[test]
    fn fd_hessian_examples() {
        let s = five_e1();
        let dev = fd_hessian_check(&s, 5.0, &[1.0, 0.0], 1e-4).unwrap();
        assert!(dev <= 1e-4);
        let h = lagrangian_hessian(&s, 5.0, &[1.0, 0.0]).unwrap();
        assert!(h.max_abs_diff(&Matrix::from_diagonal(&[5.0, -5.0]).unwrap()) < 1e-14);

        let z = SymTensor::zeros(3, 2).unwrap();
        assert!(fd_hessian_check(&z, 0.0, &[1.0, 0.0], 1e-4).is_err());

        let d = random_decomp(3, 3, 4, DEFAULT_LAMBDA_RANGE, 32).unwrap();
        let s = d.materialize().unwrap();
        let pairs = enumerate_real(&d).unwrap().pairs;
        let p = pairs
            .iter()
            .find(|p| p.selection == IndexSelection::new(vec![0, 2], 3).unwrap())
            .unwrap();
        assert!(fd_hessian_check(&s, p.eigenvalue, &p.eigenvector, 1e-4).unwrap() <= 1e-4);
    }
}
