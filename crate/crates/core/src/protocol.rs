//! Decoupling evolutions: periodic (PDD), single random trajectories, the
//! exact ensemble average, Zeno products and pulse inversion.
//!
//! Pulses act on system 1 as `V ⊗ 𝟙₂`. A trajectory with `n` free steps
//! carries `n + 1` pulses, `V_{n+1} E V_n ⋯ E V_1` with `E = e^{-itH/n}`.

use rayon::prelude::*;

use crate::channel::{unitary_superop_unchecked, Superoperator};
use crate::error::{Error, Result};
use crate::linalg::{self, c, expm_i, op_norm, tensor, unitarity_defect, ComplexMatrix};
use crate::model::{projector_d, zeno_generator, BipartiteModel};

/// Default upper limit on `|𝒱|^{n+1}` for exhaustive enumeration.
pub const ENUMERATION_CAP: u128 = 500_000;

/// Sequences per work unit during enumeration. Fixed so that the merge order,
/// and hence every floating-point sum, does not depend on the thread count.
const ENUMERATION_CHUNK: u128 = 2048;

/// Tolerance on `e^{-itD̂ĤD̂}D̂ = e^{-it(Î₁⊗Ĥ₂)}D̂`.
pub const ZENO_LIMIT_TOL: f64 = 1e-10;

/// The typical uniformly drawn reference sequence (`n = 100`).
pub const TYPICAL_SEQUENCE: &str = "Z,Z,Y,Y,Y,Y,X,X,I,I,I,Y,I,I,Y,Y,Y,Z,Z,X,Z,Y,Y,Y,Y,Z,X,Y,Z,I,X,Y,I,Z,Y,X,Y,Y,Z,I,Z,Z,X,Y,I,Y,Z,X,I,I,Z,X,Y,Y,Y,X,Y,Z,Y,Y,X,Y,Y,Y,Y,I,Z,Y,X,Y,Z,Z,X,I,X,I,X,Y,Y,Z,X,Y,Z,X,I,X,Z,Z,I,Z,Y,X,X,I,I,Z,Y,Y,X,Y,I";

/// The identity-heavy reference sequence (`n = 100`).
pub const ATYPICAL_SEQUENCE: &str = "I,X,Y,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,X,I,X,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,Z,Z,I,I,I,I,I,I,I,Z,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,Z,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I,I";

/// Pulse unitaries on system 1 with their sampling weights.
#[derive(Debug, Clone)]
pub struct DecouplingSet {
    unitaries: Vec<ComplexMatrix>,
    weights: Vec<f64>,
    labels: Vec<String>,
}

impl DecouplingSet {
    pub fn new(unitaries: Vec<ComplexMatrix>, weights: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(Error::InvalidArgument("decoupling set is empty".into()));
        }
        if weights.len() != unitaries.len() || labels.len() != unitaries.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} unitaries, {} weights, {} labels",
                unitaries.len(),
                weights.len(),
                labels.len()
            )));
        }
        let d = unitaries[0].nrows();
        for u in &unitaries {
            if u.nrows() != d || u.ncols() != d {
                return Err(Error::DimensionMismatch("pulses of different dimensions".into()));
            }
            let defect = unitarity_defect(u);
            if defect > 1e-10 {
                return Err(Error::NotUnitary(defect));
            }
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument("weights must be positive and finite".into()));
        }
        Ok(Self { unitaries, weights, labels })
    }

    /// `{𝟙, X, Y, Z}`, drawn uniformly.
    pub fn pauli() -> Self {
        Self::pauli_weighted([1.0; 4])
    }

    /// `{𝟙, X, Y, Z}` with the identity 20 times as likely as each Pauli.
    pub fn pauli_atypical() -> Self {
        Self::pauli_weighted([20.0, 1.0, 1.0, 1.0])
    }

    fn pauli_weighted(weights: [f64; 4]) -> Self {
        let unitaries = vec![linalg::pauli_i(), linalg::pauli_x(), linalg::pauli_y(), linalg::pauli_z()];
        let labels = ["I", "X", "Y", "Z"].map(String::from).to_vec();
        Self::new(unitaries, weights.to_vec(), labels).expect("Pauli set is valid")
    }

    /// `{𝟙}` on dimension `d`.
    pub fn identity_only(d: usize) -> Self {
        Self::new(vec![linalg::identity(d)], vec![1.0], vec!["I".into()]).expect("identity set is valid")
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].nrows()
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Normalized sampling probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.iter().all(|w| *w == self.weights[0])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A concrete pulse sequence: `n + 1` indices into a [`DecouplingSet`],
/// first pulse first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectorySample {
    pub n: usize,
    pub indices: Vec<usize>,
    /// Provenance of the draw.
    pub seed: u64,
}

impl TrajectorySample {
    pub fn new(n: usize, indices: Vec<usize>, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("a trajectory needs at least one step".into()));
        }
        if indices.len() != n + 1 {
            return Err(Error::DimensionMismatch(format!("{} pulse indices for n = {n}", indices.len())));
        }
        Ok(Self { n, indices, seed })
    }

    /// Comma-separated labels, e.g. `Z,Z,Y`.
    pub fn to_labels(&self, set: &DecouplingSet) -> String {
        self.indices.iter().map(|&i| set.labels()[i].as_str()).collect::<Vec<_>>().join(",")
    }

    /// Inverse of [`to_labels`](Self::to_labels); `n` is the label count minus one.
    pub fn parse(line: &str, set: &DecouplingSet, seed: u64) -> Result<Self> {
        let indices = line
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                set.index_of(tok).ok_or_else(|| Error::Parse(format!("unknown pulse label `{tok}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if indices.len() < 2 {
            return Err(Error::Parse("a trajectory needs at least two pulses".into()));
        }
        Self::new(indices.len() - 1, indices, seed)
    }

    /// The first `n + 1` pulses as an `n`-step trajectory.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n {
            return Err(Error::IndexOutOfRange { index: n, len: self.n + 1 });
        }
        Self::new(n, self.indices[..=n].to_vec(), self.seed)
    }
}

/// The typical reference sequence over [`DecouplingSet::pauli`] labels.
pub fn typical_sample() -> TrajectorySample {
    TrajectorySample::parse(TYPICAL_SEQUENCE, &DecouplingSet::pauli(), 0).expect("fixture parses")
}

/// The atypical reference sequence over [`DecouplingSet::pauli`] labels.
pub fn atypical_sample() -> TrajectorySample {
    TrajectorySample::parse(ATYPICAL_SEQUENCE, &DecouplingSet::pauli(), 0).expect("fixture parses")
}

/// Whether the closing pulse `V_{n+1}` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TerminalPulse {
    #[default]
    Applied,
    Omitted,
}

/// Hilbert-space propagator `e^{-itH/n}` and lifted pulses for one
/// `(model, set, n)`, shared by every trajectory at that `n`.
#[derive(Debug, Clone)]
pub struct TrajectoryKernel {
    n: usize,
    d1: usize,
    d2: usize,
    step: ComplexMatrix,
    pulses: Vec<ComplexMatrix>,
}

impl TrajectoryKernel {
    pub fn new(model: &BipartiteModel, set: &DecouplingSet, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if set.dim() != model.d1 {
            return Err(Error::DimensionMismatch(format!(
                "pulses on dimension {} for system 1 of dimension {}",
                set.dim(),
                model.d1
            )));
        }
        let id2 = linalg::identity(model.d2);
        Ok(Self {
            n,
            d1: model.d1,
            d2: model.d2,
            step: model.propagator(model.t_total / n as f64),
            pulses: set.unitaries().iter().map(|v| tensor(v, &id2)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, sample: &TrajectorySample) -> Result<()> {
        if sample.n != self.n {
            return Err(Error::InvalidArgument(format!("sample with n = {} on a kernel with n = {}", sample.n, self.n)));
        }
        sample.check_against_len(self.pulses.len())
    }

    /// `V_{n+1} E V_n ⋯ E V_1` on the Hilbert space.
    pub fn unitary(&self, sample: &TrajectorySample, terminal: TerminalPulse) -> Result<ComplexMatrix> {
        self.check(sample)?;
        let mut u = self.pulses[sample.indices[0]].clone();
        for &k in &sample.indices[1..self.n] {
            u = &self.pulses[k] * (&self.step * u);
        }
        u = &self.step * u;
        if terminal == TerminalPulse::Applied {
            u = &self.pulses[sample.indices[self.n]] * u;
        }
        Ok(u)
    }

    /// `V_{n+1} ⋯ V_1`.
    pub fn pulse_product(&self, sample: &TrajectorySample) -> Result<ComplexMatrix> {
        self.check(sample)?;
        let d = self.d1 * self.d2;
        Ok(sample.indices.iter().fold(linalg::identity(d), |acc, &k| &self.pulses[k] * acc))
    }

    pub fn evolution(&self, sample: &TrajectorySample) -> Result<Superoperator> {
        Ok(unitary_superop_unchecked(&self.unitary(sample, TerminalPulse::Applied)?))
    }

    /// `(V̂_{n+1} ⋯ V̂_1)† ·` trajectory.
    pub fn pulse_inverted(&self, sample: &TrajectorySample) -> Result<Superoperator> {
        let u = self.pulse_product(sample)?.adjoint() * self.unitary(sample, TerminalPulse::Applied)?;
        Ok(unitary_superop_unchecked(&u))
    }
}

impl TrajectorySample {
    fn check_against_len(&self, len: usize) -> Result<()> {
        match self.indices.iter().find(|&&i| i >= len) {
            Some(&index) => Err(Error::IndexOutOfRange { index, len }),
            None => Ok(()),
        }
    }
}

/// `((V̂†_{|𝒱|} E V̂_{|𝒱|}) ⋯ (V̂†_1 E V̂_1))^m` with `E = e^{-itĤ/(m|𝒱|)}`.
pub fn pdd_evolution(model: &BipartiteModel, set: &DecouplingSet, m: usize) -> Result<Superoperator> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let kernel = TrajectoryKernel::new(model, set, 1)?;
    let step = model.propagator(model.t_total / (m * set.len()) as f64);
    let d = model.dim();
    let cycle = kernel
        .pulses
        .iter()
        .fold(linalg::identity(d), |acc, v| v.adjoint() * &step * v * acc);
    let total = (0..m).fold(linalg::identity(d), |acc, _| &cycle * acc);
    Ok(unitary_superop_unchecked(&total))
}

/// Superoperator of one trajectory.
pub fn trajectory_evolution(model: &BipartiteModel, set: &DecouplingSet, sample: &TrajectorySample) -> Result<Superoperator> {
    TrajectoryKernel::new(model, set, sample.n)?.evolution(sample)
}

/// Hilbert-space unitary of one trajectory, optionally without `V_{n+1}`.
pub fn trajectory_unitary(
    model: &BipartiteModel,
    set: &DecouplingSet,
    sample: &TrajectorySample,
    terminal: TerminalPulse,
) -> Result<ComplexMatrix> {
    TrajectoryKernel::new(model, set, sample.n)?.unitary(sample, terminal)
}

pub fn pulse_inverted_evolution(
    model: &BipartiteModel,
    set: &DecouplingSet,
    sample: &TrajectorySample,
) -> Result<Superoperator> {
    TrajectoryKernel::new(model, set, sample.n)?.pulse_inverted(sample)
}

fn power(m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let mut result = ComplexMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `(D̂ Ê D̂)^n`, or `(Ê D̂)^n` when the closing pulse is omitted, with
/// `Ê = e^{-itĤ/n}`. This is the ensemble average for any set whose
/// uniform twirl is `D̂`.
pub fn average_evolution_exact(model: &BipartiteModel, n: usize, terminal: TerminalPulse) -> Result<Superoperator> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let d = projector_d(model.d1, model.d2);
    let step = unitary_superop_unchecked(&model.propagator(model.t_total / n as f64));
    let factor = match terminal {
        TerminalPulse::Applied => d.matrix() * step.matrix() * d.matrix(),
        TerminalPulse::Omitted => step.matrix() * d.matrix(),
    };
    Superoperator::new(model.dim(), power(&factor, n))
}

/// Number of pulse sequences `|𝒱|^{n+1}`, or `None` on overflow.
pub fn sequence_count(set_len: usize, n: usize) -> Option<u128> {
    (set_len as u128).checked_pow(u32::try_from(n + 1).ok()?)
}

fn decode(mut ordinal: u128, base: usize, n: usize) -> Vec<usize> {
    (0..=n)
        .map(|_| {
            let digit = (ordinal % base as u128) as usize;
            ordinal /= base as u128;
            digit
        })
        .collect()
}

/// Folds `f(acc, sample, probability)` over every pulse sequence, first pulse
/// varying fastest. Work is split into fixed-size chunks that run in
/// parallel; chunk results are merged in chunk order.
pub fn fold_sequences<A, I, F, M>(set: &DecouplingSet, n: usize, cap: u128, init: I, f: F, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &TrajectorySample, f64) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let total = sequence_count(set.len(), n).unwrap_or(u128::MAX);
    if total > cap {
        return Err(Error::EnumerationCap { requested: total, cap });
    }
    let probs = set.probabilities();
    let chunks = total.div_ceil(ENUMERATION_CHUNK) as u64;
    let parts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = init();
            let start = chunk as u128 * ENUMERATION_CHUNK;
            let end = (start + ENUMERATION_CHUNK).min(total);
            for ordinal in start..end {
                let indices = decode(ordinal, set.len(), n);
                let q = indices.iter().map(|&i| probs[i]).product();
                let sample = TrajectorySample { n, indices, seed: 0 };
                f(&mut acc, &sample, q)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<A>>>()?;
    let mut out = init();
    for part in parts {
        merge(&mut out, part);
    }
    Ok(out)
}

/// Weighted sum of every trajectory superoperator.
pub fn brute_force_average(model: &BipartiteModel, set: &DecouplingSet, n: usize) -> Result<Superoperator> {
    brute_force_average_capped(model, set, n, ENUMERATION_CAP)
}

pub fn brute_force_average_capped(model: &BipartiteModel, set: &DecouplingSet, n: usize, cap: u128) -> Result<Superoperator> {
    let kernel = TrajectoryKernel::new(model, set, n)?;
    let dd = model.dim() * model.dim();
    let sum = fold_sequences(
        set,
        n,
        cap,
        || ComplexMatrix::zeros(dd, dd),
        |acc, sample, q| {
            let s = kernel.evolution(sample)?;
            *acc += s.into_matrix() * c(q, 0.0);
            Ok(())
        },
        |acc, part| *acc += part,
    )?;
    Superoperator::new(model.dim(), sum)
}

/// `e^{-itD̂ĤD̂}D̂`, cross-checked against `e^{-it(Î₁⊗Ĥ₂)}D̂`.
pub fn zeno_limit(model: &BipartiteModel) -> Result<Superoperator> {
    let gen = zeno_generator(model)?;
    let d = projector_d(model.d1, model.d2);
    let a = expm_i(gen.projected.matrix(), model.t_total)? * d.matrix();
    let b = expm_i(model.bath_generator().matrix(), model.t_total)? * d.matrix();
    let deviation = op_norm(&(&a - &b));
    if deviation > ZENO_LIMIT_TOL {
        return Err(Error::IdentityViolated { check: "Zeno limit", deviation });
    }
    Superoperator::new(model.dim(), a)
}

/// Placement of the projection in a Zeno product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZenoVariant {
    /// `(e^{-itH/n} P)^n`.
    PLast,
    /// `(P e^{-itH/n} P)^n`.
    PSandwich,
    /// `(P e^{-itH/n})^n`.
    PFirst,
}

fn check_projection(p: &ComplexMatrix) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::NotSquare { rows: p.nrows(), cols: p.ncols() });
    }
    let defect = op_norm(&(p * p - p)).max(op_norm(&(p - p.adjoint())));
    if defect > 1e-10 {
        return Err(Error::NotProjection(defect));
    }
    Ok(())
}

/// The product of `variant` for Hermitian `h` and projection `p`.
pub fn zeno_product(h: &ComplexMatrix, p: &ComplexMatrix, t: f64, n: usize, variant: ZenoVariant) -> Result<ComplexMatrix> {
    check_projection(p)?;
    if h.shape() != p.shape() {
        return Err(Error::DimensionMismatch("generator and projection differ in shape".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let e = expm_i(h, t / n as f64)?;
    let factor = match variant {
        ZenoVariant::PLast => e * p,
        ZenoVariant::PSandwich => p * e * p,
        ZenoVariant::PFirst => p * e,
    };
    Ok(power(&factor, n))
}

/// `e^{-itPHP}P`.
pub fn zeno_target(h: &ComplexMatrix, p: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    check_projection(p)?;
    Ok(expm_i(&(p * h * p), t)? * p)
}

/// `‖zeno_product − zeno_target‖∞`.
pub fn zeno_error(h: &ComplexMatrix, p: &ComplexMatrix, t: f64, n: usize, variant: ZenoVariant) -> Result<f64> {
    Ok(op_norm(&(zeno_product(h, p, t, n, variant)? - zeno_target(h, p, t)?)))
}
