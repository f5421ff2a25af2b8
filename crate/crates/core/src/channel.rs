//! Channel representations: superoperator matrices, Kraus operators and
//! normalized Choi states, plus the distance measures built on them.
//!
//! Choi states use the normalization `Λ = (T ⊗ I)(|𝟙)(𝟙|/d)` with the output
//! leg first. For a map on `H₁ ⊗ H₂` the Choi matrix therefore lives on the
//! subsystems `(1, 2, 1', 2')` in that storage order, and every reduced Choi
//! state goes through [`choi_subsystem_dims`] and [`Subsystem::choi_legs`].

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, closest_unitary, devectorize, hermitian_eigen, partial_trace, tensor, trace_norm, vectorize,
    ComplexMatrix, Spectrum, C64,
};
use crate::rng;

pub const TP_TOL: f64 = 1e-9;
pub const UNITARY_TOL: f64 = 1e-9;
pub const KRAUS_TOL: f64 = 1e-6;
/// Eigenvalues in `[-CLAMP_TOL, 0)` are treated as numerical zeros.
pub const CLAMP_TOL: f64 = 1e-9;
/// Choi eigenvalues below this are dropped during Kraus extraction.
pub const KRAUS_DROP: f64 = 1e-12;

/// One side of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    One,
    Two,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::One => Subsystem::Two,
            Subsystem::Two => Subsystem::One,
        }
    }

    pub fn dim(self, d1: usize, d2: usize) -> usize {
        match self {
            Subsystem::One => d1,
            Subsystem::Two => d2,
        }
    }

    /// Positions of this subsystem's output and reference legs in the
    /// `(1, 2, 1', 2')` Choi layout.
    pub fn choi_legs(self) -> [usize; 2] {
        match self {
            Subsystem::One => [0, 2],
            Subsystem::Two => [1, 3],
        }
    }
}

/// Leg dimensions of the Choi matrix of a map on `H₁ ⊗ H₂`.
pub fn choi_subsystem_dims(d1: usize, d2: usize) -> [usize; 4] {
    [d1, d2, d1, d2]
}

/// Matrix representation of a linear map acting on row-vectorized operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on dimension {dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: linalg::identity(dim * dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::zeros(dim * dim, dim * dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Applies the map to an operator.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.nrows() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} for a map on dimension {}",
                rho.nrows(),
                self.dim
            )));
        }
        devectorize(&(&self.matrix * vectorize(rho)?), self.dim)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, other.dim, "composing maps on different dimensions");
        Superoperator { dim: self.dim, matrix: &self.matrix * &other.matrix }
    }

    pub fn adjoint(&self) -> Superoperator {
        Superoperator { dim: self.dim, matrix: self.matrix.adjoint() }
    }

    /// `‖(𝟙|Ŝ − (𝟙|‖₂`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim;
        let mut defect = 0.0;
        for col in 0..d * d {
            let mut acc = C64::default();
            for a in 0..d {
                acc += self.matrix[(a * d + a, col)];
            }
            let target = if col / d == col % d { 1.0 } else { 0.0 };
            defect += (acc - c(target, 0.0)).norm_sqr();
        }
        defect.sqrt()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preservation_defect() <= TP_TOL
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.matrix)
    }
}

/// `Ŝ = u ⊗ conj(u)` for a unitary `u`.
pub fn superop_from_unitary(u: &ComplexMatrix) -> Result<Superoperator> {
    let defect = linalg::unitarity_defect(u);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(unitary_superop_unchecked(u))
}

pub(crate) fn unitary_superop_unchecked(u: &ComplexMatrix) -> Superoperator {
    Superoperator { dim: u.nrows(), matrix: tensor(u, &u.conjugate()) }
}

/// A channel given by Kraus operators with `Σ E_k† E_k = 𝟙`.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = kraus
            .first()
            .map(|k| k.nrows())
            .ok_or_else(|| Error::InvalidArgument("a channel needs at least one Kraus operator".into()))?;
        if kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::DimensionMismatch("Kraus operators must share one square shape".into()));
        }
        let ch = Self { dim, kraus };
        let defect = ch.kraus_defect();
        if defect > KRAUS_TOL {
            return Err(Error::KrausCondition(defect));
        }
        Ok(ch)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `‖Σ E_k† E_k − 𝟙‖₂`.
    pub fn kraus_defect(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * k);
        linalg::frobenius(&(sum - linalg::identity(self.dim)))
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, k| acc + k * rho * k.adjoint())
    }
}

/// `Ŝ = Σ_k E_k ⊗ conj(E_k)`.
pub fn superop_from_kraus(ch: &QuantumChannel) -> Superoperator {
    let d = ch.dim;
    let matrix = ch
        .kraus
        .iter()
        .fold(ComplexMatrix::zeros(d * d, d * d), |acc, k| acc + tensor(k, &k.conjugate()));
    Superoperator { dim: d, matrix }
}

/// Reshuffles a superoperator into its (unvalidated) Choi matrix.
///
/// `Λ[(a,i),(b,j)] = T(|i⟩⟨j|)[a,b] / d = Ŝ[(a,b),(i,j)] / d`: the map is
/// applied to every matrix unit `|i⟩⟨j|` and the images assembled as blocks.
pub fn choi_matrix(s: &Superoperator) -> ComplexMatrix {
    let d = s.dim;
    let scale = 1.0 / d as f64;
    ComplexMatrix::from_fn(d * d, d * d, |r, col| {
        let (a, i) = (r / d, r % d);
        let (b, j) = (col / d, col % d);
        s.matrix[(a * d + b, i * d + j)] * scale
    })
}

/// Inverse of [`choi_matrix`].
pub fn superop_from_choi_matrix(dim: usize, lam: &ComplexMatrix) -> Superoperator {
    let d = dim;
    let scale = d as f64;
    let matrix = ComplexMatrix::from_fn(d * d, d * d, |r, col| {
        let (a, b) = (r / d, r % d);
        let (i, j) = (col / d, col % d);
        lam[(a * d + i, b * d + j)] * scale
    });
    Superoperator { dim, matrix }
}

/// Normalized Choi state of a CPTP map with its spectrum.
#[derive(Debug, Clone)]
pub struct ChoiState {
    dim: usize,
    matrix: ComplexMatrix,
    spectrum: Spectrum,
    kraus: OnceLock<QuantumChannel>,
}

impl ChoiState {
    /// Validates Hermiticity, unit trace and positivity, then caches the
    /// spectrum with eigenvalues in `[-1e-9, 0)` clamped to zero.
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "Choi state of a map on dimension {dim} must be {0}x{0}",
                dim * dim
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr - c(1.0, 0.0)).norm() > 1e-9 {
            return Err(Error::InvalidChoi(format!("trace {tr} is not 1")));
        }
        let mut spectrum = hermitian_eigen(&matrix).map_err(|e| Error::InvalidChoi(e.to_string()))?;
        for lam in spectrum.eigenvalues.iter_mut() {
            if *lam < -CLAMP_TOL {
                return Err(Error::InvalidChoi(format!("negative eigenvalue {lam:.3e}")));
            }
            if *lam < 0.0 {
                *lam = 0.0;
            }
        }
        Ok(Self { dim, matrix, spectrum, kraus: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Largest eigenvalue, equal to the operator norm.
    pub fn op_norm(&self) -> f64 {
        self.spectrum.eigenvalues[0]
    }

    /// Pure Choi state `|u)(u|/d` of a unitary.
    pub fn of_unitary(u: &ComplexMatrix) -> Result<Self> {
        choi_from_superop(&superop_from_unitary(u)?)
    }

    pub fn to_superop(&self) -> Superoperator {
        superop_from_choi_matrix(self.dim, &self.matrix)
    }

    /// Kraus operators `E_k = √(dλ_k) devec(v_k)`, computed once.
    pub fn kraus(&self) -> &QuantumChannel {
        self.kraus.get_or_init(|| kraus_from_choi(self))
    }
}

/// Choi state of a trace-preserving superoperator.
pub fn choi_from_superop(s: &Superoperator) -> Result<ChoiState> {
    let defect = s.trace_preservation_defect();
    if defect > TP_TOL {
        return Err(Error::NotTracePreserving(defect));
    }
    ChoiState::new(s.dim, choi_matrix(s))
}

/// Canonical Kraus operators from the Choi spectrum. Eigenvalues below
/// [`KRAUS_DROP`] are discarded.
pub fn kraus_from_choi(choi: &ChoiState) -> QuantumChannel {
    let d = choi.dim;
    let eig = &choi.spectrum;
    let mut kraus: Vec<ComplexMatrix> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &lam)| lam >= KRAUS_DROP)
        .map(|(k, &lam)| {
            let v = eig.eigenvector(k);
            devectorize(&v, d).expect("Choi eigenvector has length d²") * c((d as f64 * lam).sqrt(), 0.0)
        })
        .collect();
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(d, d));
    }
    QuantumChannel { dim: d, kraus }
}

/// `P(Λ) = tr Λ² = Σ λ_k²`.
pub fn purity(choi: &ChoiState) -> f64 {
    choi.spectrum.eigenvalues.iter().map(|l| l * l).sum()
}

fn check_density(rho: &ComplexMatrix) -> Result<Spectrum> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::InvalidDensity("not square".into()));
    }
    let tr = linalg::trace(rho);
    if (tr - c(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
    }
    let eig = hermitian_eigen(rho).map_err(|e| Error::InvalidDensity(e.to_string()))?;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -CLAMP_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
    }
    Ok(eig)
}

/// Validates a density operator.
pub fn validate_density(rho: &ComplexMatrix) -> Result<()> {
    check_density(rho).map(|_| ())
}

/// Reduced Choi state `Λ₁ = tr_{22'} Λ` or `Λ₂ = tr_{11'} Λ`.
pub fn reduced_choi(choi: &ChoiState, which: Subsystem, d1: usize, d2: usize) -> Result<ChoiState> {
    if choi.dim != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "Choi state on dimension {} cannot be split as {d1}x{d2}",
            choi.dim
        )));
    }
    let reduced = partial_trace(&choi.matrix, &choi_subsystem_dims(d1, d2), &which.choi_legs())?;
    ChoiState::new(which.dim(d1, d2), reduced)
}

/// Superoperator of the reduced map on the free subsystem when the
/// subsystem `fixed_on` starts in `fixed_state`:
/// `T₁(ρ₁) = tr₂ T(ρ₁ ⊗ σ₂)` or `T₂(ρ₂) = tr₁ T(σ₁ ⊗ ρ₂)`.
pub fn reduced_superop(
    s: &Superoperator,
    d1: usize,
    d2: usize,
    fixed_state: &ComplexMatrix,
    fixed_on: Subsystem,
) -> Result<Superoperator> {
    if s.dim != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "map on dimension {} cannot be split as {d1}x{d2}",
            s.dim
        )));
    }
    if fixed_state.nrows() != fixed_on.dim(d1, d2) || fixed_state.ncols() != fixed_state.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "fixed state of dimension {} for subsystem of dimension {}",
            fixed_state.nrows(),
            fixed_on.dim(d1, d2)
        )));
    }
    let free = fixed_on.other();
    let df = free.dim(d1, d2);
    let keep = match free {
        Subsystem::One => 0,
        Subsystem::Two => 1,
    };
    let mut matrix = ComplexMatrix::zeros(df * df, df * df);
    for i in 0..df {
        for j in 0..df {
            let mut unit = ComplexMatrix::zeros(df, df);
            unit[(i, j)] = c(1.0, 0.0);
            let input = match free {
                Subsystem::One => tensor(&unit, fixed_state),
                Subsystem::Two => tensor(fixed_state, &unit),
            };
            let out = partial_trace(&s.apply(&input)?, &[d1, d2], &[keep])?;
            let col = vectorize(&out)?;
            matrix.set_column(i * df + j, &col);
        }
    }
    Ok(Superoperator { dim: df, matrix })
}

/// Choi state of the reduced map of [`reduced_superop`].
pub fn choi_of_reduced_map(
    s: &Superoperator,
    d1: usize,
    d2: usize,
    fixed_state: &ComplexMatrix,
    fixed_on: Subsystem,
) -> Result<ChoiState> {
    check_density(fixed_state)?;
    choi_from_superop(&reduced_superop(s, d1, d2, fixed_state, fixed_on)?)
}

/// Entanglement fidelity `(1/d)(u|Λ|u)` with `|u) = vec(u)`.
pub fn fidelity_to_unitary(choi: &ChoiState, u: &ComplexMatrix) -> Result<f64> {
    if u.nrows() != choi.dim || u.ncols() != choi.dim {
        return Err(Error::DimensionMismatch(format!(
            "unitary of dimension {} against a Choi state on dimension {}",
            u.nrows(),
            choi.dim
        )));
    }
    let v = vectorize(u)?;
    let val = (v.adjoint() * &choi.matrix * &v)[(0, 0)];
    Ok(val.re / choi.dim as f64)
}

/// Closest unitary to the leading Kraus operator, with the sandwich bounds
/// on the distance of the channel to that unitary.
#[derive(Debug, Clone)]
pub struct ClosestUnitary {
    pub unitary: ComplexMatrix,
    /// `d(1 − √P)`, lower bound on `‖T̂ − Û‖₂`.
    pub lower: f64,
    /// `d√(P − P²) + d√(1 − P²)`, upper bound on `‖T̂ − Û‖₂`.
    pub upper_frobenius: f64,
    /// `3d(1 − ‖Λ‖∞)`, upper bound on the diamond distance.
    pub upper_diamond: f64,
    /// The leading eigenvalue was degenerate within 1e-12; the first
    /// eigenvector in decomposition order was used.
    pub degenerate: bool,
}

pub fn closest_unitary_channel(choi: &ChoiState) -> Result<ClosestUnitary> {
    let d = choi.dim as f64;
    let lams = &choi.spectrum.eigenvalues;
    let lead = lams[0];
    let degenerate = lams.len() > 1 && lead - lams[1] < 1e-12;
    let e0 = devectorize(&choi.spectrum.eigenvector(0), choi.dim)? * c((d * lead).sqrt(), 0.0);
    let unitary = linalg::fix_global_phase(&closest_unitary(&e0)?);
    let p = purity(choi).min(1.0);
    Ok(ClosestUnitary {
        unitary,
        lower: d * (1.0 - p.sqrt()),
        upper_frobenius: d * (p - p * p).max(0.0).sqrt() + d * (1.0 - p * p).max(0.0).sqrt(),
        upper_diamond: 3.0 * d * (1.0 - lead),
        degenerate,
    })
}

/// Bracket `(‖Λa − Λb‖₁, d‖Λa − Λb‖₁)` on the diamond distance.
pub fn diamond_bounds(a: &ChoiState, b: &ChoiState) -> Result<(f64, f64)> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(format!("Choi states on dimensions {} and {}", a.dim, b.dim)));
    }
    let dist = trace_norm(&(&a.matrix - &b.matrix));
    Ok((dist, a.dim as f64 * dist))
}

/// Monte-Carlo lower bound on `‖S − T‖◇`.
///
/// Evaluates `‖((S − T) ⊗ I)(|ψ)(ψ|)‖₁` for pure inputs `|ψ) = vec(X)` with
/// `‖X‖₂ = 1`, using `((S−T) ⊗ I)(|X)(X|) = d (𝟙 ⊗ Xᵀ) ΔΛ (𝟙 ⊗ X̄)`. Input 0
/// is the maximally entangled state; inputs `1..samples` are Gaussian draws
/// from stream 0 of `seed`. Returns the running maximum.
pub fn sampled_diamond_lower(sa: &Superoperator, sb: &Superoperator, samples: usize, seed: u64) -> Result<f64> {
    if sa.dim != sb.dim {
        return Err(Error::DimensionMismatch(format!("maps on dimensions {} and {}", sa.dim, sb.dim)));
    }
    let d = sa.dim;
    let delta = choi_matrix(&Superoperator { dim: d, matrix: &sa.matrix - &sb.matrix });
    let id = linalg::identity(d);
    let eval = |x: &ComplexMatrix| -> f64 {
        let left = tensor(&id, &x.transpose());
        let right = tensor(&id, &x.conjugate());
        trace_norm(&(left * &delta * right)) * d as f64
    };
    if samples == 0 {
        return Ok(0.0);
    }
    let mut best = eval(&(id.clone() / c((d as f64).sqrt(), 0.0)));
    let mut g = rng::stream(seed, 0);
    for _ in 1..samples {
        let x = linalg::random_gaussian(d, d, &mut g);
        let x = x.unscale(linalg::frobenius(&x));
        best = best.max(eval(&x));
    }
    Ok(best)
}

/// Convex split `𝟙/d = p σ + (1 − p) ω` with `p = 1/(d‖σ‖∞)`.
#[derive(Debug, Clone)]
pub struct MaxMixedSplit {
    pub weight: f64,
    pub residual: ComplexMatrix,
}

pub fn max_mixed_split(sigma: &ComplexMatrix) -> Result<MaxMixedSplit> {
    let eig = check_density(sigma)?;
    let d = sigma.nrows();
    let df = d as f64;
    let smax = eig.eigenvalues[0];
    let weight = 1.0 / (df * smax);
    if weight >= 1.0 - 1e-12 {
        // σ is maximally mixed; ω carries zero weight
        return Ok(MaxMixedSplit { weight: 1.0, residual: linalg::maximally_mixed(d) });
    }
    let norm = df - 1.0 / smax;
    let residual = eig.map(|s| c((1.0 - s.max(0.0) / smax) / norm, 0.0));
    Ok(MaxMixedSplit { weight, residual })
}

/// What the reduced-Choi lower bound is evaluated against.
#[derive(Debug, Clone)]
pub enum Probe {
    /// `(v|Λ_σ|v) ≥ 1 − d‖σ‖∞(1 − (v|Λ|v))` for a normalized vector `v`.
    Vector(linalg::ComplexVector),
    /// `‖Λ_σ‖∞ ≥ 1 − d‖σ‖∞(1 − ‖Λ‖∞)`.
    OpNorm,
    /// `√P(Λ_σ) ≥ 1 − d‖σ‖∞(1 − P(Λ))`.
    Purity,
}

/// Lower bound on a quantity of the Choi state with a general fixed input
/// `σ`, from the reduced Choi state `full_reduced` (fixed input maximally
/// mixed) of the same subsystem.
pub fn reduced_choi_lower_bound(full_reduced: &ChoiState, sigma_norm_inf: f64, other_dim: usize, probe: &Probe) -> f64 {
    let base = match probe {
        Probe::Vector(v) => (v.adjoint() * &full_reduced.matrix * v)[(0, 0)].re,
        Probe::OpNorm => full_reduced.op_norm(),
        Probe::Purity => purity(full_reduced),
    };
    1.0 - other_dim as f64 * sigma_norm_inf * (1.0 - base)
}

/// Random channel with `k` Kraus operators: blocks of the polar factor of a
/// Gaussian `kd × d` matrix, which is an isometry.
pub fn random_channel(d: usize, k: usize, g: &mut rng::StreamRng) -> QuantumChannel {
    let gauss = linalg::random_gaussian(k * d, d, g);
    let gram = gauss.adjoint() * &gauss;
    let inv_sqrt = hermitian_eigen(&gram).expect("Gram matrix is Hermitian").map(|l| c(1.0 / l.sqrt(), 0.0));
    let iso = gauss * inv_sqrt;
    let kraus = (0..k).map(|j| iso.rows(j * d, d).into_owned()).collect();
    QuantumChannel::new(kraus).expect("isometry blocks satisfy the Kraus condition")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, pauli_x, pauli_y, pauli_z, random_density, random_unitary};

    fn g(seed: u64) -> rng::StreamRng {
        rng::stream(seed, 0)
    }

    fn max_abs(a: &ComplexMatrix) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn depolarizing_qubit() -> QuantumChannel {
        QuantumChannel::new(
            [identity(2), pauli_x(), pauli_y(), pauli_z()]
                .into_iter()
                .map(|p| p * c(0.5, 0.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn unitary_superop_examples() {
        assert_eq!(superop_from_unitary(&identity(2)).unwrap(), Superoperator::identity(2));
        let x = superop_from_unitary(&pauli_x()).unwrap();
        let rho = random_density(2, &mut g(1));
        let direct = pauli_x() * &rho * pauli_x();
        assert!(max_abs(&(x.apply(&rho).unwrap() - direct)) < 1e-12);
        assert!((linalg::op_norm(x.matrix()) - 1.0).abs() < 1e-12);
        let u = random_unitary(3, &mut g(2));
        assert!(superop_from_unitary(&u).unwrap().unitarity_defect() < 1e-10);
        assert!(matches!(superop_from_unitary(&(identity(2) * c(2.0, 0.0))), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn kraus_superop_examples() {
        let id = QuantumChannel::new(vec![identity(3)]).unwrap();
        assert_eq!(superop_from_kraus(&id), Superoperator::identity(3));
        let dep = superop_from_kraus(&depolarizing_qubit());
        let rho = random_density(2, &mut g(3));
        assert!(max_abs(&(dep.apply(&rho).unwrap() - linalg::maximally_mixed(2))) < 1e-12);
        assert!(dep.is_trace_preserving());
        assert!(matches!(
            QuantumChannel::new(vec![identity(2) * c(0.5, 0.0)]),
            Err(Error::KrausCondition(_))
        ));
    }

    #[test]
    fn frobenius_norm_equals_scaled_purity() {
        let mut rng = g(4);
        for d in [2, 3] {
            for k in 1..=3 {
                let ch = random_channel(d, k, &mut rng);
                let s = superop_from_kraus(&ch);
                let choi = choi_from_superop(&s).unwrap();
                let lhs = linalg::frobenius(s.matrix()).powi(2);
                assert!((lhs - (d * d) as f64 * purity(&choi)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn choi_examples() {
        let id = choi_from_superop(&Superoperator::identity(2)).unwrap();
        let one = vectorize(&identity(2)).unwrap();
        let expect = &one * one.adjoint() / c(2.0, 0.0);
        assert!(max_abs(&(id.matrix() - expect)) < 1e-15);
        assert!((purity(&id) - 1.0).abs() < 1e-12);

        let dep = choi_from_superop(&superop_from_kraus(&depolarizing_qubit())).unwrap();
        let mm = tensor(&linalg::maximally_mixed(2), &linalg::maximally_mixed(2));
        assert!(max_abs(&(dep.matrix() - mm)) < 1e-12);
        assert!((purity(&dep) - 0.25).abs() < 1e-12);

        let u = random_unitary(3, &mut g(5));
        let uc = ChoiState::of_unitary(&u).unwrap();
        assert!((uc.op_norm() - 1.0).abs() < 1e-10);

        let mut not_tp = Superoperator::identity(2).into_matrix();
        not_tp[(0, 0)] = c(2.0, 0.0);
        assert!(matches!(
            choi_from_superop(&Superoperator::new(2, not_tp).unwrap()),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn choi_rejects_unnormalized() {
        let one = vectorize(&identity(2)).unwrap();
        let unnormalized = &one * one.adjoint();
        assert!(matches!(ChoiState::new(2, unnormalized), Err(Error::InvalidChoi(_))));
    }

    #[test]
    fn kraus_extraction() {
        let u = random_unitary(2, &mut g(6));
        let k = kraus_from_choi(&ChoiState::of_unitary(&u).unwrap());
        assert_eq!(k.kraus().len(), 1);
        let fixed = linalg::fix_global_phase(&k.kraus()[0]);
        assert!(max_abs(&(fixed - linalg::fix_global_phase(&u))) < 1e-10);

        let mut rng = g(7);
        for d in [2, 3] {
            let ch = random_channel(d, 3, &mut rng);
            let s = superop_from_kraus(&ch);
            let choi = choi_from_superop(&s).unwrap();
            let back = superop_from_kraus(choi.kraus());
            assert!(max_abs(&(back.matrix() - s.matrix())) < 1e-9);
            let ks = choi.kraus().kraus();
            for (a, ka) in ks.iter().enumerate() {
                for (b, kb) in ks.iter().enumerate() {
                    let inner = linalg::hs_inner(ka, kb) / c(d as f64, 0.0);
                    let expect = if a == b { choi.spectrum().eigenvalues[a] } else { 0.0 };
                    assert!((inner - c(expect, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn purity_sandwich() {
        let mut rng = g(8);
        for _ in 0..20 {
            let choi = choi_from_superop(&superop_from_kraus(&random_channel(2, 2, &mut rng))).unwrap();
            let (p, n) = (purity(&choi), choi.op_norm());
            assert!(n * n <= p + 1e-12 && p <= n + 1e-12);
            assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&p));
        }
        let mm = ChoiState::new(2, linalg::maximally_mixed(4)).unwrap();
        assert!((purity(&mm) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn reduced_choi_of_product_unitary() {
        let mut rng = g(9);
        let u1 = random_unitary(2, &mut rng);
        let u2 = random_unitary(3, &mut rng);
        let total = ChoiState::of_unitary(&tensor(&u1, &u2)).unwrap();
        let l1 = reduced_choi(&total, Subsystem::One, 2, 3).unwrap();
        let c1 = ChoiState::of_unitary(&u1).unwrap();
        assert!(max_abs(&(l1.matrix() - c1.matrix())) < 1e-12);
        let l2 = reduced_choi(&total, Subsystem::Two, 2, 3).unwrap();
        let c2 = ChoiState::of_unitary(&u2).unwrap();
        assert!(max_abs(&(l2.matrix() - c2.matrix())) < 1e-12);
        assert!(reduced_choi(&total, Subsystem::One, 3, 3).is_err());
    }

    #[test]
    fn reduced_choi_equals_maximally_mixed_reduced_map() {
        let mut rng = g(10);
        for (d1, d2) in [(2, 2), (2, 3), (3, 2)] {
            let s = superop_from_kraus(&random_channel(d1 * d2, 2, &mut rng));
            let total = choi_from_superop(&s).unwrap();
            let l1 = reduced_choi(&total, Subsystem::One, d1, d2).unwrap();
            let m1 = choi_of_reduced_map(&s, d1, d2, &linalg::maximally_mixed(d2), Subsystem::Two).unwrap();
            assert!(max_abs(&(l1.matrix() - m1.matrix())) < 1e-12);
            let l2 = reduced_choi(&total, Subsystem::Two, d1, d2).unwrap();
            let m2 = choi_of_reduced_map(&s, d1, d2, &linalg::maximally_mixed(d1), Subsystem::One).unwrap();
            assert!(max_abs(&(l2.matrix() - m2.matrix())) < 1e-12);
        }
    }

    #[test]
    fn pure_total_choi_has_equal_reduced_purities() {
        let mut rng = g(11);
        for _ in 0..10 {
            let u = random_unitary(4, &mut rng);
            let total = ChoiState::of_unitary(&u).unwrap();
            let p1 = purity(&reduced_choi(&total, Subsystem::One, 2, 2).unwrap());
            let p2 = purity(&reduced_choi(&total, Subsystem::Two, 2, 2).unwrap());
            assert!((p1 - p2).abs() < 1e-10);
        }
    }

    #[test]
    fn reduced_map_examples() {
        let rho = random_density(2, &mut g(12));
        let m = choi_of_reduced_map(&Superoperator::identity(4), 2, 2, &rho, Subsystem::Two).unwrap();
        let id = ChoiState::of_unitary(&identity(2)).unwrap();
        assert!(max_abs(&(m.matrix() - id.matrix())) < 1e-12);

        // swap then keep system 1: ρ₁ ↦ σ₂
        let mut swap = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(j * 2 + i, i * 2 + j)] = c(1.0, 0.0);
            }
        }
        let s = superop_from_unitary(&swap).unwrap();
        let zero = linalg::basis_projector(2, 0);
        let m = choi_of_reduced_map(&s, 2, 2, &zero, Subsystem::Two).unwrap();
        let expect = tensor(&zero, &linalg::maximally_mixed(2));
        assert!(max_abs(&(m.matrix() - expect)) < 1e-12);
        let rs = reduced_superop(&s, 2, 2, &zero, Subsystem::Two).unwrap();
        assert!(max_abs(&(rs.apply(&random_density(2, &mut g(13))).unwrap() - &zero)) < 1e-12);

        let bad = linalg::identity(2);
        assert!(matches!(
            choi_of_reduced_map(&s, 2, 2, &bad, Subsystem::Two),
            Err(Error::InvalidDensity(_))
        ));
    }

    #[test]
    fn fidelity_examples() {
        let u = random_unitary(3, &mut g(14));
        let uc = ChoiState::of_unitary(&u).unwrap();
        assert!((fidelity_to_unitary(&uc, &u).unwrap() - 1.0).abs() < 1e-12);
        let xc = ChoiState::of_unitary(&pauli_x()).unwrap();
        assert!(fidelity_to_unitary(&xc, &identity(2)).unwrap().abs() < 1e-12);
        assert!(fidelity_to_unitary(&xc, &identity(3)).is_err());

        let mut rng = g(15);
        for _ in 0..20 {
            let choi = choi_from_superop(&superop_from_kraus(&random_channel(2, 3, &mut rng))).unwrap();
            let v = random_unitary(2, &mut rng);
            let f = fidelity_to_unitary(&choi, &v).unwrap();
            assert!(f <= choi.op_norm() + 1e-12 && choi.op_norm() <= purity(&choi).sqrt() + 1e-12);
        }
    }

    #[test]
    fn closest_unitary_channel_pure_case() {
        let u = random_unitary(3, &mut g(16));
        let cu = closest_unitary_channel(&ChoiState::of_unitary(&u).unwrap()).unwrap();
        assert!(cu.lower.abs() < 1e-7 && cu.upper_frobenius < 1e-4);
        assert!(max_abs(&(cu.unitary - linalg::fix_global_phase(&u))) < 1e-9);
    }

    #[test]
    fn closest_unitary_channel_two_kraus_example() {
        let ch = QuantumChannel::new(vec![identity(2) * c(0.9f64.sqrt(), 0.0), pauli_x() * c(0.1f64.sqrt(), 0.0)])
            .unwrap();
        let choi = choi_from_superop(&superop_from_kraus(&ch)).unwrap();
        assert!((purity(&choi) - 0.82).abs() < 1e-12);
        let cu = closest_unitary_channel(&choi).unwrap();
        assert!((cu.lower - 2.0 * (1.0 - 0.82f64.sqrt())).abs() < 1e-12);
        assert!(max_abs(&(cu.unitary - identity(2))) < 1e-12);
        assert!((cu.upper_diamond - 3.0 * 2.0 * 0.1).abs() < 1e-12);
        assert!(!cu.degenerate);
    }

    #[test]
    fn closest_unitary_channel_sandwich() {
        let mut rng = g(17);
        for d in [2, 3] {
            for k in 1..=4 {
                let s = superop_from_kraus(&random_channel(d, k, &mut rng));
                let choi = choi_from_superop(&s).unwrap();
                let cu = closest_unitary_channel(&choi).unwrap();
                let direct = linalg::frobenius(&(s.matrix() - superop_from_unitary(&cu.unitary).unwrap().matrix()));
                let p = purity(&choi).min(1.0);
                let df = d as f64;
                assert!(cu.lower <= direct + 1e-9);
                assert!(direct <= cu.upper_frobenius + 1e-9);
                assert!(cu.upper_frobenius <= 2.0 * df * (1.0 - p * p).sqrt() + 1e-9);
            }
        }
    }

    #[test]
    fn closest_unitary_channel_rank_deficient() {
        // leading Kraus operator |0⟩⟨0| + |0⟩⟨1| is singular
        let k0 = linalg::from_rows(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        let k1 = linalg::from_rows(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        let choi = choi_from_superop(&superop_from_kraus(&QuantumChannel::new(vec![k0, k1]).unwrap())).unwrap();
        let res = closest_unitary_channel(&choi);
        assert!(matches!(res, Err(Error::RankDeficient(_))));
    }

    #[test]
    fn diamond_bound_examples() {
        let a = ChoiState::of_unitary(&identity(2)).unwrap();
        assert_eq!(diamond_bounds(&a, &a).unwrap(), (0.0, 0.0));
        let b = ChoiState::of_unitary(&pauli_x()).unwrap();
        let (lo, hi) = diamond_bounds(&a, &b).unwrap();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 4.0).abs() < 1e-12);

        let sa = Superoperator::identity(2);
        let sb = superop_from_unitary(&pauli_x()).unwrap();
        assert_eq!(sampled_diamond_lower(&sa, &sa, 50, 1).unwrap(), 0.0);
        let v = sampled_diamond_lower(&sa, &sb, 500, 1).unwrap();
        assert!(v > 0.0 && v <= 2.0 + 1e-12 && v <= hi);
    }

    #[test]
    fn sampled_diamond_monotone_and_bracketed() {
        let mut rng = g(18);
        let sa = superop_from_kraus(&random_channel(2, 2, &mut rng));
        let sb = superop_from_kraus(&random_channel(2, 3, &mut rng));
        let (_, hi) =
            diamond_bounds(&choi_from_superop(&sa).unwrap(), &choi_from_superop(&sb).unwrap()).unwrap();
        let mut prev = 0.0;
        for samples in [1, 10, 50, 200] {
            let v = sampled_diamond_lower(&sa, &sb, samples, 9).unwrap();
            assert!(v >= prev && v <= hi + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn max_mixed_split_examples() {
        let mm = max_mixed_split(&linalg::maximally_mixed(3)).unwrap();
        assert_eq!(mm.weight, 1.0);
        let s = max_mixed_split(&linalg::basis_projector(2, 0)).unwrap();
        assert!((s.weight - 0.5).abs() < 1e-15);
        assert!(max_abs(&(s.residual - linalg::basis_projector(2, 1))) < 1e-12);
        let mut rng = g(19);
        for d in [2, 3, 4] {
            let sigma = random_density(d, &mut rng);
            let s = max_mixed_split(&sigma).unwrap();
            validate_density(&s.residual).unwrap();
            let rebuilt = &sigma * c(s.weight, 0.0) + &s.residual * c(1.0 - s.weight, 0.0);
            assert!(max_abs(&(rebuilt - linalg::maximally_mixed(d))) < 1e-12);
        }
        assert!(max_mixed_split(&identity(2)).is_err());
    }

    #[test]
    fn reduced_choi_lower_bound_examples() {
        let pure = ChoiState::of_unitary(&identity(2)).unwrap();
        assert!((reduced_choi_lower_bound(&pure, 1.0, 2, &Probe::OpNorm) - 1.0).abs() < 1e-12);
        // Λ = a|𝟙)(𝟙|/2 + b𝟙/4 with a + b = 1 and a + b/4 = 0.9, so ‖Λ‖∞ = 0.9
        let b = 0.4 / 3.0;
        let one = vectorize(&identity(2)).unwrap() / c(2f64.sqrt(), 0.0);
        let mixed = &one * one.adjoint() * c(1.0 - b, 0.0) + linalg::maximally_mixed(4) * c(b, 0.0);
        let choi = ChoiState::new(2, mixed).unwrap();
        assert!((choi.op_norm() - 0.9).abs() < 1e-12);
        assert!((reduced_choi_lower_bound(&choi, 1.0, 2, &Probe::OpNorm) - 0.8).abs() < 1e-12);
    }
}
