//! Dense complex linear algebra on row-vectorized operators.
//!
//! Matrices are `nalgebra` dense matrices of `Complex<f64>`. The crate uses
//! row-vectorization everywhere: `vec(A)` stacks the rows of `A`, so that
//! `vec(ABC) = (A ⊗ Cᵀ) vec(B)` and a map with Kraus operators `E_k` has the
//! matrix `Σ E_k ⊗ conj(E_k)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::rng;

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Relative tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// Builds a matrix from row-major entries.
pub fn from_rows(rows: usize, cols: usize, entries: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(rows, cols, entries)
}

pub fn from_real_diagonal(diag: &[f64]) -> ComplexMatrix {
    let d = diag.len();
    ComplexMatrix::from_fn(d, d, |i, j| if i == j { c(diag[i], 0.0) } else { C64::default() })
}

pub fn pauli_i() -> ComplexMatrix {
    identity(2)
}

pub fn pauli_x() -> ComplexMatrix {
    from_rows(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> ComplexMatrix {
    from_rows(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> ComplexMatrix {
    from_rows(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `|k⟩⟨k|` on a `d`-dimensional space.
pub fn basis_projector(d: usize, k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(k, k)] = c(1.0, 0.0);
    m
}

pub fn maximally_mixed(d: usize) -> ComplexMatrix {
    identity(d).unscale(d as f64)
}

/// Kronecker product with `a`'s indices major.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, leftmost factor major.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    factors
        .iter()
        .fold(ComplexMatrix::identity(1, 1), |acc, f| acc.kronecker(*f))
}

fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Traces out every subsystem not listed in `keep`.
///
/// `dims` lists the subsystem dimensions with the first subsystem major.
/// The kept subsystems appear in the output in their original relative
/// order, whatever the order of `keep`.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let d = ensure_square(m)?;
    let total: usize = dims.iter().product();
    if total != d {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {dims:?} multiply to {total}, matrix has dimension {d}"
        )));
    }
    if let Some(&k) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "subsystem {k} does not exist among {} subsystems",
            dims.len()
        )));
    }
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|k| keep.contains(k)).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();

    // Offsets of each multi-index over a subset of subsystems, in
    // lexicographic order of that subset.
    let offsets = |subset: &[usize]| -> Vec<usize> {
        let mut out = vec![0usize];
        for &k in subset {
            let (dim, stride) = (dims[k], strides[k]);
            out = out
                .iter()
                .flat_map(|&base| (0..dim).map(move |x| base + x * stride))
                .collect();
        }
        out
    };
    let kept_offsets = offsets(&kept);
    let traced_offsets = offsets(&traced);

    let dk = kept_offsets.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (col, &co) in kept_offsets.iter().enumerate() {
            out[(r, col)] = traced_offsets.iter().map(|&t| m[(ro + t, co + t)]).sum();
        }
    }
    Ok(out)
}

/// Row-vectorization: the rows of `a` concatenated into one column.
pub fn vectorize(a: &ComplexMatrix) -> Result<ComplexVector> {
    let d = ensure_square(a)?;
    Ok(ComplexVector::from_fn(d * d, |k, _| a[(k / d, k % d)]))
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &ComplexVector, d: usize) -> Result<ComplexMatrix> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot be reshaped to {d}x{d}",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| v[i * d + j]))
}

/// Hilbert–Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// Which Schatten norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schatten {
    /// Trace norm: sum of singular values.
    One,
    /// Frobenius norm.
    Two,
    /// Operator norm: largest singular value.
    Inf,
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn schatten_norm(a: &ComplexMatrix, p: Schatten) -> f64 {
    match p {
        Schatten::Two => a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        Schatten::One => singular_values(a).iter().sum(),
        Schatten::Inf => singular_values(a).first().copied().unwrap_or(0.0),
    }
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    schatten_norm(a, Schatten::Two)
}

pub fn op_norm(a: &ComplexMatrix) -> f64 {
    schatten_norm(a, Schatten::Inf)
}

pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    schatten_norm(a, Schatten::One)
}

/// `‖a − a†‖₂ / max(1, ‖a‖₂)`.
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    frobenius(&(a - a.adjoint())) / frobenius(a).max(1.0)
}

/// `‖u†u − 𝟙‖₂`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    frobenius(&(u.adjoint() * u - identity(u.nrows())))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda = from_real_diagonal(&self.eigenvalues);
        &self.eigenvectors * lambda * self.eigenvectors.adjoint()
    }

    pub fn eigenvector(&self, k: usize) -> ComplexVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// Applies `f` to the eigenvalues: `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let fk = f(lam);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= fk);
        }
        scaled * v.adjoint()
    }
}

/// Eigendecomposition of `h`, which must be Hermitian to [`HERMITIAN_TOL`].
///
/// The input is symmetrized as `(h + h†)/2` before decomposition.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<Spectrum> {
    ensure_square(h)?;
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = (h + h.adjoint()).unscale(2.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(h.nrows(), h.nrows(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// `e^{-i t h}` for Hermitian `h`.
pub fn expm_i(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eigen(h)?.map(|lam| C64::from_polar(1.0, -t * lam)))
}

/// Unitary factor `U` of the polar decomposition `a = U|a|`.
///
/// Fails when `a` is (numerically) singular, where `U` is not unique.
pub fn closest_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(a)?;
    let svd = a.clone().svd(true, true);
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if smin.is_nan() || smin <= 1e-12 {
        return Err(Error::RankDeficient(smin));
    }
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    Ok(u * v_t)
}

/// Fixes the global phase so the largest-magnitude entry is real positive.
pub fn fix_global_phase(u: &ComplexMatrix) -> ComplexMatrix {
    let mut best = C64::default();
    for z in u.iter() {
        // ties resolved toward the first entry in storage order
        if z.norm() > best.norm() + 1e-12 {
            best = *z;
        }
    }
    if best.norm() == 0.0 {
        return u.clone();
    }
    let phase = best.conj() / best.norm();
    u.map(|z| z * phase)
}

/// Random traceless Hermitian matrix following the recipe used for the
/// two-qubit reference model: complex entries with real and imaginary parts
/// uniform in `[-1, 1]`, hermitized as `A + A†`, made traceless, scaled to
/// unit operator norm and rounded to two decimals.
pub fn random_traceless_hermitian(d: usize, seed: u64) -> ComplexMatrix {
    assert!(d >= 2, "dimension must be at least 2");
    let mut g = rng::stream(seed, 0);
    let a = ComplexMatrix::from_fn(d, d, |_, _| {
        let re = rng::uniform_in(&mut g, -1.0, 1.0);
        let im = rng::uniform_in(&mut g, -1.0, 1.0);
        c(re, im)
    });
    let mut h = &a + a.adjoint();
    let shift = trace(&h) / d as f64;
    for k in 0..d {
        h[(k, k)] -= shift;
    }
    let h = h.unscale(op_norm(&h));
    let round = |x: f64| (x * 100.0).round() / 100.0;
    let mut out = h.map(|z| c(round(z.re), round(z.im)));
    // rounding keeps Hermiticity; pin the diagonal to be exactly real
    for k in 0..d {
        out[(k, k)].im = 0.0;
    }
    out
}

/// Gaussian complex matrix with i.i.d. standard normal real and imaginary parts.
pub fn random_gaussian(rows: usize, cols: usize, rng: &mut rng::StreamRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c(rng::normal(rng), rng::normal(rng)))
}

/// Random unitary: polar factor of a Gaussian matrix.
pub fn random_unitary(d: usize, rng: &mut rng::StreamRng) -> ComplexMatrix {
    loop {
        if let Ok(u) = closest_unitary(&random_gaussian(d, d, rng)) {
            return u;
        }
    }
}

/// Random full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density(d: usize, rng: &mut rng::StreamRng) -> ComplexMatrix {
    let g = random_gaussian(d, d, rng);
    let rho = &g * g.adjoint();
    let tr = trace(&rho).re;
    rho.unscale(tr)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(d: usize, rng: &mut rng::StreamRng) -> ComplexMatrix {
    let g = random_gaussian(d, d, rng);
    (&g + g.adjoint()).unscale(2.0)
}

pub fn all_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> rng::StreamRng {
        rng::stream(seed, 0)
    }

    fn max_abs(a: &ComplexMatrix) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn tensor_identity_and_diagonal() {
        assert_eq!(tensor(&identity(2), &identity(2)), identity(4));
        let p = tensor(&from_real_diagonal(&[1., 2.]), &from_real_diagonal(&[3., 4.]));
        assert_eq!(p, from_real_diagonal(&[3., 4., 6., 8.]));
    }

    #[test]
    fn tensor_acts_factorwise() {
        let mut g = rng(1);
        let a = random_gaussian(3, 3, &mut g);
        let b = random_gaussian(3, 3, &mut g);
        let x = random_gaussian(3, 1, &mut g);
        let y = random_gaussian(3, 1, &mut g);
        let lhs = tensor(&a, &b) * tensor(&x, &y);
        let rhs = tensor(&(&a * &x), &(&b * &y));
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut g = rng(2);
        let a = random_gaussian(2, 2, &mut g);
        let b = random_gaussian(2, 2, &mut g);
        let ab = tensor(&a, &b);
        let tr2 = partial_trace(&ab, &[2, 2], &[0]).unwrap();
        assert!(max_abs(&(tr2 - &a * trace(&b))) < 1e-12);
        let tr1 = partial_trace(&ab, &[2, 2], &[1]).unwrap();
        assert!(max_abs(&(tr1 - &b * trace(&a))) < 1e-12);
        let all = partial_trace(&identity(4), &[2, 2], &[]).unwrap();
        assert_eq!(all.shape(), (1, 1));
        assert!((all[(0, 0)] - c(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_loop() {
        let mut g = rng(3);
        let m = random_gaussian(16, 16, &mut g);
        // explicit summation over the subsystems 2 and 2' of (1,2,1',2')
        let mut oracle = ComplexMatrix::zeros(4, 4);
        for a in 0..2 {
            for ap in 0..2 {
                for b in 0..2 {
                    for bp in 0..2 {
                        let mut acc = C64::default();
                        for j in 0..2 {
                            for jp in 0..2 {
                                let row = ((a * 2 + j) * 2 + ap) * 2 + jp;
                                let col = ((b * 2 + j) * 2 + bp) * 2 + jp;
                                acc += m[(row, col)];
                            }
                        }
                        oracle[(a * 2 + ap, b * 2 + bp)] = acc;
                    }
                }
            }
        }
        let got = partial_trace(&m, &[2, 2, 2, 2], &[2, 0]).unwrap();
        assert!(max_abs(&(got - oracle)) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        assert!(matches!(
            partial_trace(&identity(4), &[2, 3], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(partial_trace(&ComplexMatrix::zeros(2, 3), &[2], &[0]).is_err());
    }

    #[test]
    fn vectorize_examples() {
        let a = from_rows(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]);
        let v = vectorize(&a).unwrap();
        assert_eq!(v.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1., 2., 3., 4.]);
        let v = vectorize(&identity(2)).unwrap();
        assert_eq!(v.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1., 0., 0., 1.]);
        assert!(vectorize(&ComplexMatrix::zeros(2, 3)).is_err());
        assert_eq!(devectorize(&vectorize(&a).unwrap(), 2).unwrap(), a);
    }

    #[test]
    fn vectorization_via_maximally_entangled_vector() {
        let mut g = rng(4);
        let a = random_gaussian(3, 3, &mut g);
        let one = vectorize(&identity(3)).unwrap();
        let lhs = vectorize(&a).unwrap();
        let rhs = tensor(&a, &identity(3)) * one;
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn vectorization_identity() {
        let mut g = rng(5);
        for _ in 0..20 {
            let a = random_gaussian(3, 3, &mut g);
            let b = random_gaussian(3, 3, &mut g);
            let cm = random_gaussian(3, 3, &mut g);
            let lhs = vectorize(&(&a * &b * &cm)).unwrap();
            let rhs = tensor(&a, &cm.transpose()) * vectorize(&b).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn schatten_examples() {
        let d = from_real_diagonal(&[3., -4.]);
        assert!((schatten_norm(&d, Schatten::One) - 7.0).abs() < 1e-12);
        assert!((schatten_norm(&d, Schatten::Two) - 5.0).abs() < 1e-12);
        assert!((schatten_norm(&d, Schatten::Inf) - 4.0).abs() < 1e-12);
        let u = random_unitary(4, &mut rng(6));
        assert!((op_norm(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schatten_ordering_and_svd_oracle() {
        let mut g = rng(7);
        let a = random_gaussian(5, 5, &mut g);
        let s = singular_values(&a);
        let fro_from_svd = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((frobenius(&a) - fro_from_svd).abs() < 1e-12);
        assert!(op_norm(&a) <= frobenius(&a) && frobenius(&a) <= trace_norm(&a));
    }

    #[test]
    fn choi_sized_norm_equivalences() {
        let mut g = rng(8);
        for d in 2..=4 {
            for _ in 0..10 {
                let lam = random_density(d * d, &mut g);
                let (inf, two, one) = (op_norm(&lam), frobenius(&lam), trace_norm(&lam));
                let df = d as f64;
                assert!(inf <= two + 1e-12 && two <= df * inf + 1e-12);
                assert!(inf <= one + 1e-12 && one <= df * df * inf + 1e-12);
                assert!(two <= one + 1e-12 && one <= df * two + 1e-12);
            }
        }
    }

    #[test]
    fn eigen_reconstruction_and_orthonormality() {
        let mut g = rng(9);
        for d in [2, 4, 7] {
            let h = random_hermitian(d, &mut g);
            let s = hermitian_eigen(&h).unwrap();
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            assert!(frobenius(&(s.reconstruct() - &h)) <= 1e-10 * frobenius(&h).max(1.0));
            assert!(unitarity_defect(&s.eigenvectors) < 1e-10);
        }
        let nonherm = from_rows(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(hermitian_eigen(&nonherm), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn expm_examples() {
        assert!(max_abs(&(expm_i(&ComplexMatrix::zeros(3, 3), 0.7).unwrap() - identity(3))) < 1e-14);
        let t = 0.37;
        let e = expm_i(&pauli_z(), t).unwrap();
        let expect = from_rows(2, 2, &[C64::from_polar(1., -t), c(0., 0.), c(0., 0.), C64::from_polar(1., t)]);
        assert!(max_abs(&(e - expect)) < 1e-14);
        assert!(expm_i(&from_rows(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]), 1.0).is_err());
    }

    fn taylor_expm_i(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
        // scale so the series converges fast, then square back
        let squarings = 6;
        let x = h * c(0.0, -t / f64::from(1 << squarings));
        let mut term = identity(h.nrows());
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &x / c(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn expm_matches_taylor_oracle() {
        let mut g = rng(10);
        for d in [2, 4, 6] {
            let h = random_hermitian(d, &mut g);
            let t = 1.3;
            let e = expm_i(&h, t).unwrap();
            assert!(max_abs(&(&e - taylor_expm_i(&h, t))) < 1e-10);
            assert!(unitarity_defect(&e) < 1e-10);
        }
    }

    #[test]
    fn exponential_deviation_estimates() {
        let mut g = rng(11);
        for _ in 0..50 {
            let x = random_hermitian(3, &mut g);
            let t = 2.0 * rng::uniform(&mut g);
            let e = expm_i(&x, t).unwrap();
            let nx = op_norm(&x);
            let first = op_norm(&(&e - identity(3)));
            assert!(first <= t * nx + 1e-12);
            let second = op_norm(&(&e - identity(3) + &x * c(0.0, t)));
            assert!(second <= t * t * nx * nx / 2.0 + 1e-12);
        }
    }

    #[test]
    fn telescope_identity() {
        let mut g = rng(12);
        let a = random_gaussian(4, 4, &mut g);
        let b = random_gaussian(4, 4, &mut g);
        let pow = |m: &ComplexMatrix, k: usize| (0..k).fold(identity(4), |acc, _| acc * m);
        for n in 1..=6 {
            let lhs = pow(&a, n) - pow(&b, n);
            let rhs = (0..n).fold(ComplexMatrix::zeros(4, 4), |acc, k| {
                acc + pow(&a, k) * (&a - &b) * pow(&b, n - 1 - k)
            });
            assert!(max_abs(&(lhs - rhs)) <= 1e-10 * (1.0 + op_norm(&pow(&a, n))));
        }
    }

    #[test]
    fn closest_unitary_examples() {
        let mut g = rng(13);
        let u = random_unitary(3, &mut g);
        assert!(max_abs(&(closest_unitary(&u).unwrap() - &u)) < 1e-12);
        let diag = from_real_diagonal(&[2.0, 0.5]);
        assert!(max_abs(&(closest_unitary(&diag).unwrap() - identity(2))) < 1e-12);
        let singular = from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(closest_unitary(&singular), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn closest_unitary_recovers_polar_factor() {
        let mut g = rng(14);
        for _ in 0..20 {
            let u = random_unitary(3, &mut g);
            let p = random_density(3, &mut g) + identity(3) * c(0.1, 0.0);
            let got = closest_unitary(&(&u * p)).unwrap();
            assert!(max_abs(&(got - &u)) < 1e-9);
        }
    }

    #[test]
    fn closest_unitary_beats_random_search() {
        let mut g = rng(15);
        let a = random_gaussian(2, 2, &mut g);
        let u = closest_unitary(&a).unwrap();
        let best = frobenius(&(&a - &u));
        for _ in 0..10_000 {
            let v = random_unitary(2, &mut g);
            assert!(frobenius(&(&a - v)) >= best - 1e-12);
        }
    }

    #[test]
    fn random_hamiltonian_postconditions() {
        for seed in 0..20 {
            for d in [2, 4, 6] {
                let h = random_traceless_hermitian(d, seed);
                assert_eq!(&h - h.adjoint(), ComplexMatrix::zeros(d, d));
                assert!(trace(&h).norm() <= 0.01 * d as f64);
                let n = op_norm(&h);
                assert!((0.95..=1.05).contains(&n), "norm {n}");
            }
        }
        assert_eq!(random_traceless_hermitian(4, 42), random_traceless_hermitian(4, 42));
    }

    #[test]
    fn global_phase_fix() {
        let u = pauli_y() * c(0.0, 1.0);
        let fixed = fix_global_phase(&u);
        assert!(fixed.iter().all(|z| z.im.abs() < 1e-15));
        assert!(fixed.iter().any(|z| z.re > 0.0));
    }
}
