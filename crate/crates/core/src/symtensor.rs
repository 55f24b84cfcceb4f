//! Dense symmetric tensors and the three contractions used throughout:
//! `S u^m` (a scalar), `S u^{m−1}` (a vector) and `S u^{m−2}` (a matrix).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, fmax, Matrix};
use crate::tol;

const SYMMETRY_PROBE_SEED: u64 = 0x0005_eed0_f5e7;

/// Order-`m`, dimension-`n` tensor with all `n^m` entries stored.
///
/// The first index is the most significant digit of the flat offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

fn check_shape(order: usize, dim: usize) -> Result<usize> {
    if order < 3 {
        return Err(Error::OrderTooSmall(order));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "tensor dimension must be >= 1".into(),
        ));
    }
    u32::try_from(order)
        .ok()
        .and_then(|m| dim.checked_pow(m))
        .ok_or_else(|| Error::InvalidArgument(format!("{dim}^{order} entries overflow")))
}

impl SymTensor {
    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        let len = check_shape(order, dim)?;
        Ok(Self {
            order,
            dim,
            entries: vec![0.0; len],
        })
    }

    /// Wraps a raw entry array. Symmetry is not enforced here; see
    /// [`SymTensor::max_asymmetry`] and [`SymTensor::symmetry_check`].
    pub fn from_entries(order: usize, dim: usize, entries: Vec<f64>) -> Result<Self> {
        let len = check_shape(order, dim)?;
        if entries.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a tensor with {len}",
                entries.len()
            )));
        }
        Ok(Self {
            order,
            dim,
            entries,
        })
    }

    /// `Σ_t weights[t] · vectors[:, t]^∘m`.
    ///
    /// Each entry multiplies its factors in sorted-index order, so entries
    /// related by an index permutation are bitwise equal.
    pub fn from_rank_one_sum(weights: &[f64], vectors: &Matrix, order: usize) -> Result<Self> {
        if weights.len() != vectors.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} vectors",
                weights.len(),
                vectors.cols()
            )));
        }
        let dim = vectors.rows();
        let mut tensor = Self::zeros(order, dim)?;
        let mut idx = vec![0usize; order];
        let mut sorted = vec![0usize; order];
        for flat in 0..tensor.entries.len() {
            tensor.decode(flat, &mut idx);
            sorted.copy_from_slice(&idx);
            sorted.sort_unstable();
            let mut value = 0.0;
            for (t, &w) in weights.iter().enumerate() {
                let prod = sorted.iter().fold(w, |acc, &i| acc * vectors[(i, t)]);
                value += prod;
            }
            tensor.entries[flat] = value;
        }
        Ok(tensor)
    }

    /// Diagonal tensor with `D_{i..i} = diag[i]`.
    pub fn diagonal(diag: &[f64], order: usize) -> Result<Self> {
        let mut tensor = Self::zeros(order, diag.len())?;
        let n = diag.len();
        // offset of (i, i, ..., i) is i · (1 + n + ... + n^{m−1})
        let stride: usize = (0..order).map(|p| n.pow(p as u32)).sum();
        for (i, &d) in diag.iter().enumerate() {
            tensor.entries[i * stride] = d;
        }
        Ok(tensor)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.order);
        index.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.entries[self.offset(index)]
    }

    fn decode(&self, mut flat: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
    }

    fn check_vector(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against tensor dimension {}",
                u.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Contracts the trailing `times` modes with `u`, leaving `n^{m−times}` entries.
    fn contract_trailing(&self, u: &[f64], times: usize) -> Vec<f64> {
        let n = self.dim;
        let mut current: Vec<f64> = self.entries.clone();
        for _ in 0..times {
            current = current.chunks_exact(n).map(|fiber| dot(fiber, u)).collect();
        }
        current
    }

    /// `S u^m = Σ s_{i₁..i_m} u_{i₁}···u_{i_m}`.
    pub fn contract_full(&self, u: &[f64]) -> Result<f64> {
        self.check_vector(u)?;
        Ok(self.contract_trailing(u, self.order)[0])
    }

    /// `(S u^{m−1})_j = Σ s_{j,i₂..i_m} u_{i₂}···u_{i_m}`.
    pub fn contract_grad(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_vector(u)?;
        Ok(self.contract_trailing(u, self.order - 1))
    }

    /// `(S u^{m−2})_{ij} = Σ s_{i,j,i₃..i_m} u_{i₃}···u_{i_m}`.
    pub fn contract_hess(&self, u: &[f64]) -> Result<Matrix> {
        self.check_vector(u)?;
        let data = self.contract_trailing(u, self.order - 2);
        Ok(Matrix::from_row_major(self.dim, self.dim, data)?)
    }

    /// `‖S u^{m−1} − λu‖_max`.
    pub fn eigen_residual(&self, eigenvalue: f64, u: &[f64]) -> Result<f64> {
        let g = self.contract_grad(u)?;
        Ok(g.iter()
            .zip(u)
            .fold(0.0, |acc, (gi, ui)| fmax(acc, (gi - eigenvalue * ui).abs())))
    }

    /// Probes `samples` random (index, permutation) pairs; true iff every
    /// probe agrees within the tensor symmetry tolerance. The probe
    /// sequence is fixed, so the answer is deterministic.
    pub fn symmetry_check(&self, samples: usize) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(SYMMETRY_PROBE_SEED);
        let mut idx = vec![0usize; self.order];
        for _ in 0..samples {
            for slot in idx.iter_mut() {
                *slot = rng.random_range(0..self.dim);
            }
            let a = self.get(&idx);
            idx.shuffle(&mut rng);
            let b = self.get(&idx);
            if !((a - b).abs() <= tol::TENSOR_SYMMETRY) {
                return false;
            }
        }
        true
    }

    /// Exhaustive counterpart of [`SymTensor::symmetry_check`]: the largest
    /// gap between any entry and the entry at its sorted index.
    pub fn max_asymmetry(&self) -> f64 {
        let mut idx = vec![0usize; self.order];
        let mut worst = 0.0_f64;
        for flat in 0..self.entries.len() {
            self.decode(flat, &mut idx);
            idx.sort_unstable();
            let gap = (self.entries[flat] - self.get(&idx)).abs();
            if gap.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(gap);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gram_schmidt, max_abs, max_abs_diff};
    use proptest::prelude::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    fn single(weight: f64, v: Vec<f64>, order: usize) -> SymTensor {
        SymTensor::from_rank_one_sum(&[weight], &Matrix::from_columns(&[v]).unwrap(), order)
            .unwrap()
    }

    fn two_eight() -> SymTensor {
        SymTensor::from_rank_one_sum(&[2.0, 8.0], &Matrix::identity(2).unwrap(), 3).unwrap()
    }

    /// Independent brute-force contraction: iterate all index tuples.
    fn brute_full(s: &SymTensor, u: &[f64]) -> f64 {
        let n = s.dim();
        let m = s.order();
        let mut idx = vec![0usize; m];
        let mut total = 0.0;
        for flat in 0..n.pow(m as u32) {
            s.decode(flat, &mut idx);
            total += s.get(&idx) * idx.iter().map(|&i| u[i]).product::<f64>();
        }
        total
    }

    #[test]
    fn rank_one_single_entry() {
        let s = single(1.0, e(2, 0), 3);
        assert_eq!(s.get(&[0, 0, 0]), 1.0);
        assert_eq!(s.entries().iter().filter(|&&x| x != 0.0).count(), 1);
    }

    #[test]
    fn rank_one_sum_diagonal_weights() {
        let s = two_eight();
        assert_eq!(s.get(&[0, 0, 0]), 2.0);
        assert_eq!(s.get(&[1, 1, 1]), 8.0);
        assert_eq!(s.entries().iter().filter(|&&x| x != 0.0).count(), 2);
        assert_eq!(s, SymTensor::diagonal(&[2.0, 8.0], 3).unwrap());
    }

    #[test]
    fn rank_one_diagonal_direction() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = single(1.0, vec![h, h], 3);
        for &x in s.entries() {
            assert!((x - 2f64.powf(-1.5)).abs() < 1e-15);
            assert!((x - 0.353553).abs() < 1e-6);
        }
    }

    #[test]
    fn rank_one_rejects_mismatch() {
        let err = SymTensor::from_rank_one_sum(&[1.0, 2.0], &Matrix::identity(3).unwrap(), 3);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
        let err = SymTensor::from_rank_one_sum(&[1.0], &Matrix::identity(1).unwrap(), 2);
        assert!(matches!(err, Err(Error::OrderTooSmall(2))));
    }

    #[test]
    fn full_contraction_examples() {
        assert_eq!(
            single(1.0, e(2, 0), 3).contract_full(&e(2, 0)).unwrap(),
            1.0
        );

        let r17 = 17f64.sqrt();
        let u = [4.0 / r17, 1.0 / r17];
        let expected = 136.0 / 17f64.powf(1.5);
        let got = two_eight().contract_full(&u).unwrap();
        assert!((got - expected).abs() < 1e-14);
        assert!((got - 1.940285).abs() < 1e-6);

        assert_eq!(
            SymTensor::zeros(4, 3)
                .unwrap()
                .contract_full(&[0.3, -2.0, 1.0])
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn grad_contraction_examples() {
        assert_eq!(
            single(5.0, e(2, 0), 3).contract_grad(&e(2, 0)).unwrap(),
            vec![5.0, 0.0]
        );

        let r17 = 17f64.sqrt();
        let u = [4.0 / r17, 1.0 / r17];
        let g = two_eight().contract_grad(&u).unwrap();
        let lambda = 8.0 / r17;
        assert!(max_abs_diff(&g, &[lambda * u[0], lambda * u[1]]) < 1e-14);

        assert_eq!(
            two_eight().contract_grad(&[0.0, 0.0]).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn hess_contraction_examples() {
        let h = single(5.0, e(2, 0), 3).contract_hess(&e(2, 0)).unwrap();
        assert_eq!(h, Matrix::from_diagonal(&[5.0, 0.0]).unwrap());

        let s4 = single(1.5, vec![0.6, 0.8], 4);
        assert_eq!(s4.contract_hess(&[0.0, 0.0]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn contraction_rejects_wrong_length() {
        let s = two_eight();
        assert!(s.contract_full(&[1.0]).is_err());
        assert!(s.contract_grad(&[1.0, 0.0, 0.0]).is_err());
        assert!(s.contract_hess(&[]).is_err());
    }

    #[test]
    fn symmetry_check_examples() {
        let q = gram_schmidt(
            &Matrix::from_columns(&[vec![1.0, 2.0, 0.5], vec![-1.0, 0.3, 2.0]]).unwrap(),
        )
        .unwrap();
        let s = SymTensor::from_rank_one_sum(&[1.3, 0.7], &q, 4).unwrap();
        assert!(s.symmetry_check(500));
        assert_eq!(s.max_asymmetry(), 0.0);

        let mut entries = two_eight().into_entries();
        let off = 1; // (0, 0, 1)
        entries[off] += 1e-3;
        let broken = SymTensor::from_entries(3, 2, entries).unwrap();
        assert!(!broken.symmetry_check(1000));
        assert!((broken.max_asymmetry() - 1e-3).abs() < 1e-12);

        assert!(SymTensor::diagonal(&[1.0, 2.0, 3.0], 5)
            .unwrap()
            .symmetry_check(200));
    }

    #[test]
    fn diagonal_matches_rank_one_on_identity() {
        let d = SymTensor::diagonal(&[1.0, 4.0, 9.0], 4).unwrap();
        let s = SymTensor::from_rank_one_sum(&[1.0, 4.0, 9.0], &Matrix::identity(3).unwrap(), 4)
            .unwrap();
        assert_eq!(d, s);
    }

    fn random_tensor() -> impl Strategy<Value = (SymTensor, Vec<f64>)> {
        (1usize..=5, 3usize..=5, 1usize..=4).prop_flat_map(|(n, m, r)| {
            (
                prop::collection::vec(-2.0f64..2.0, r),
                prop::collection::vec(-1.0f64..1.0, n * r),
                prop::collection::vec(-1.0f64..1.0, n),
            )
                .prop_map(move |(w, v, u)| {
                    let vecs = Matrix::from_row_major(n, r, v).unwrap();
                    (SymTensor::from_rank_one_sum(&w, &vecs, m).unwrap(), u)
                })
        })
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }

    proptest! {
        #[test]
        fn contraction_chain((s, u) in random_tensor()) {
            let g = s.contract_grad(&u).unwrap();
            let hu = s.contract_hess(&u).unwrap().mat_vec(&u).unwrap();
            for (a, b) in hu.iter().zip(&g) {
                prop_assert!(rel(*a, *b) <= 1e-10);
            }
            prop_assert!(rel(dot(&u, &g), s.contract_full(&u).unwrap()) <= 1e-10);
            prop_assert!(rel(s.contract_full(&u).unwrap(), brute_full(&s, &u)) <= 1e-10);
        }

        #[test]
        fn gradient_matches_central_differences((s, u) in random_tensor()) {
            let m = s.order() as f64;
            let g = s.contract_grad(&u).unwrap();
            let h = 1e-5;
            for j in 0..u.len() {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[j] += h;
                dn[j] -= h;
                let fd = (s.contract_full(&up).unwrap() - s.contract_full(&dn).unwrap()) / (2.0 * h);
                prop_assert!((fd - m * g[j]).abs() <= 1e-6, "fd {} vs {}", fd, m * g[j]);
            }
        }

        #[test]
        fn gradient_is_homogeneous((s, u) in random_tensor(), t in -3.0f64..3.0) {
            let m = s.order() as i32;
            let g = s.contract_grad(&u).unwrap();
            let tu: Vec<f64> = u.iter().map(|x| t * x).collect();
            let gt = s.contract_grad(&tu).unwrap();
            let scale = t.powi(m - 1);
            for (a, b) in gt.iter().zip(&g) {
                prop_assert!(rel(*a, scale * b) <= 1e-10);
            }
        }

        #[test]
        fn constructed_tensors_are_exactly_symmetric((s, _u) in random_tensor()) {
            prop_assert!(s.symmetry_check(64));
            prop_assert_eq!(s.max_asymmetry(), 0.0);
        }

        #[test]
        fn zero_vector_gives_zero_hessian_for_order_four_and_up((s, u) in random_tensor()) {
            let z = vec![0.0; u.len()];
            prop_assert_eq!(max_abs(&s.contract_grad(&z).unwrap()), 0.0);
            if s.order() >= 4 {
                prop_assert_eq!(s.contract_hess(&z).unwrap().max_abs(), 0.0);
            }
        }
    }
}
