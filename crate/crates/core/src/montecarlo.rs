//! Seeded trajectory sampling and statistics over random decoupling
//! sequences.
//!
//! Trajectory `k` of a run keyed by `master_seed` always draws its pulses from
//! substream `k`, and per-trajectory values are reduced in ordinal order, so
//! every estimate is bit-identical for any number of worker threads.

use rayon::prelude::*;

use crate::bounds::{self, BoundInputs};
use crate::channel::{
    choi_from_superop, choi_of_reduced_map, closest_unitary_channel, fidelity_to_unitary, purity, reduced_superop,
    superop_from_unitary, ChoiState, Subsystem, Superoperator,
};
use crate::error::{Error, Result};
use crate::linalg::{self, frobenius, op_norm, trace_norm, ComplexMatrix};
use crate::model::BipartiteModel;
use crate::protocol::{fold_sequences, DecouplingSet, TrajectoryKernel, TrajectorySample, ENUMERATION_CAP};
use crate::rng;

/// Draws `n + 1` pulse indices from substream `ordinal` of `master_seed`.
pub fn sample_trajectory(set: &DecouplingSet, n: usize, master_seed: u64, ordinal: u64) -> TrajectorySample {
    let mut g = rng::stream(master_seed, ordinal);
    let indices = (0..=n).map(|_| rng::weighted_index(&mut g, set.weights())).collect();
    TrajectorySample { n, indices, seed: master_seed }
}

/// Model, pulse set and the fixed inputs `σ₁`, `σ₂` of the reduced maps.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub model: BipartiteModel,
    pub set: DecouplingSet,
    /// Initial state of system 1 for the reduced dynamics of system 2.
    pub sigma1: ComplexMatrix,
    /// Initial state of system 2 for the reduced dynamics of system 1.
    pub sigma2: ComplexMatrix,
}

impl Ensemble {
    pub fn new(model: BipartiteModel, set: DecouplingSet, sigma1: ComplexMatrix, sigma2: ComplexMatrix) -> Result<Self> {
        if sigma1.nrows() != model.d1 || sigma2.nrows() != model.d2 {
            return Err(Error::DimensionMismatch(format!(
                "fixed inputs of dimensions {} and {} for a {}x{} model",
                sigma1.nrows(),
                sigma2.nrows(),
                model.d1,
                model.d2
            )));
        }
        crate::channel::validate_density(&sigma1)?;
        crate::channel::validate_density(&sigma2)?;
        if set.dim() != model.d1 {
            return Err(Error::DimensionMismatch("pulse set does not act on system 1".into()));
        }
        Ok(Self { model, set, sigma1, sigma2 })
    }

    /// Both fixed inputs `|0⟩⟨0|`.
    pub fn ground(model: BipartiteModel, set: DecouplingSet) -> Self {
        let (d1, d2) = (model.d1, model.d2);
        Self::new(model, set, linalg::basis_projector(d1, 0), linalg::basis_projector(d2, 0))
            .expect("basis projectors are valid inputs")
    }

    /// Bound parameters at step count `n`, with `‖σ₁‖₂` and `‖σ₂‖∞`.
    pub fn bound_inputs(&self, n: usize) -> Result<BoundInputs> {
        let sigma_fro = frobenius(&self.sigma1);
        let sigma_inf = op_norm(&self.sigma2);
        BoundInputs::new(self.model.d1, self.model.d2, self.model.big_t, n, sigma_fro, sigma_inf)
    }

    pub fn context(&self, n: usize) -> Result<StatContext<'_>> {
        Ok(StatContext {
            ensemble: self,
            kernel: TrajectoryKernel::new(&self.model, &self.set, n)?,
            zeno_choi2: ChoiState::of_unitary(&self.model.bath_unitary())?,
        })
    }
}

/// Everything a statistic needs that is shared across trajectories at one `n`.
#[derive(Debug, Clone)]
pub struct StatContext<'a> {
    pub ensemble: &'a Ensemble,
    pub kernel: TrajectoryKernel,
    /// `|e^{-itH₂})(e^{-itH₂}|/d₂`.
    pub zeno_choi2: ChoiState,
}

impl StatContext<'_> {
    pub fn evolution(&self, sample: &TrajectorySample) -> Result<Superoperator> {
        self.kernel.evolution(sample)
    }

    fn dims(&self) -> (usize, usize) {
        (self.ensemble.model.d1, self.ensemble.model.d2)
    }

    /// Reduced map on system 1 with system 2 starting in `σ₂`.
    pub fn reduced_map1(&self, s: &Superoperator) -> Result<Superoperator> {
        let (d1, d2) = self.dims();
        reduced_superop(s, d1, d2, &self.ensemble.sigma2, Subsystem::Two)
    }

    /// `Λ₁,σ₂`.
    pub fn choi1(&self, s: &Superoperator) -> Result<ChoiState> {
        let (d1, d2) = self.dims();
        choi_of_reduced_map(s, d1, d2, &self.ensemble.sigma2, Subsystem::Two)
    }

    /// `Λ₂,σ₁`.
    pub fn choi2(&self, s: &Superoperator) -> Result<ChoiState> {
        let (d1, d2) = self.dims();
        choi_of_reduced_map(s, d1, d2, &self.ensemble.sigma1, Subsystem::One)
    }

    pub fn reduced_map2(&self, s: &Superoperator) -> Result<Superoperator> {
        let (d1, d2) = self.dims();
        reduced_superop(s, d1, d2, &self.ensemble.sigma1, Subsystem::One)
    }
}

pub type Evaluator = fn(&StatContext<'_>, &TrajectorySample) -> Result<f64>;
pub type BoundFn = fn(&BoundInputs) -> f64;

/// How a statistic is reported in tables: as is, or as `1 − value` so that
/// values near one become small deficits on a log scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Presentation {
    Direct,
    Deficit,
}

/// A named per-trajectory quantity, with the bound on the mean of its
/// reported form when one exists.
#[derive(Clone, Copy)]
pub struct Statistic {
    pub name: &'static str,
    pub description: &'static str,
    pub presentation: Presentation,
    evaluator: Evaluator,
    bound: Option<BoundFn>,
}

impl std::fmt::Debug for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Statistic").field("name", &self.name).field("presentation", &self.presentation).finish()
    }
}

impl Statistic {
    pub const fn new(
        name: &'static str,
        description: &'static str,
        presentation: Presentation,
        evaluator: Evaluator,
        bound: Option<BoundFn>,
    ) -> Self {
        Self { name, description, presentation, evaluator, bound }
    }

    pub fn evaluate(&self, ctx: &StatContext<'_>, sample: &TrajectorySample) -> Result<f64> {
        let v = (self.evaluator)(ctx, sample)?;
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("statistic {} is not finite", self.name)));
        }
        Ok(v)
    }

    /// `value` or `1 − value` according to the presentation.
    pub fn report(&self, value: f64) -> f64 {
        match self.presentation {
            Presentation::Direct => value,
            Presentation::Deficit => 1.0 - value,
        }
    }

    /// Upper bound on the mean of the reported form.
    pub fn bound(&self, inputs: &BoundInputs) -> Option<f64> {
        self.bound.map(|b| b(inputs))
    }
}

fn purity1(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    Ok(purity(&ctx.choi1(&ctx.evolution(s)?)?))
}

fn purity2(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    Ok(purity(&ctx.choi2(&ctx.evolution(s)?)?))
}

fn opnorm1(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    Ok(ctx.choi1(&ctx.evolution(s)?)?.op_norm())
}

fn opnorm2(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    Ok(ctx.choi2(&ctx.evolution(s)?)?.op_norm())
}

fn fidelity2(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    fidelity_to_unitary(&ctx.choi2(&ctx.evolution(s)?)?, &ctx.ensemble.model.bath_unitary())
}

fn frob_dist2(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    let choi = ctx.choi2(&ctx.evolution(s)?)?;
    Ok(frobenius(&(choi.matrix() - ctx.zeno_choi2.matrix())))
}

fn opnorm_dist1(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    let choi = ctx.choi1(&ctx.evolution(s)?)?;
    let v = choi.spectrum().eigenvector(0);
    Ok(op_norm(&(choi.matrix() - &v * v.adjoint())))
}

fn superop_dist_closest_unitary(map: &Superoperator) -> Result<f64> {
    let cu = closest_unitary_channel(&choi_from_superop(map)?)?;
    Ok(frobenius(&(map.matrix() - superop_from_unitary(&cu.unitary)?.matrix())))
}

fn frob_dist_superop1(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    superop_dist_closest_unitary(&ctx.reduced_map1(&ctx.evolution(s)?)?)
}

fn frob_dist_superop2(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    superop_dist_closest_unitary(&ctx.reduced_map2(&ctx.evolution(s)?)?)
}

fn diamond_upper1(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    let choi = ctx.choi1(&ctx.evolution(s)?)?;
    Ok(closest_unitary_channel(&choi)?.upper_diamond)
}

/// Trace-norm distances of the system-1 Choi states in the pulse-inversion
/// triangle `blue ≤ red + green`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseInversionDistances {
    /// `‖Λ̃₁,σ₂ − Choi(𝟙₁)‖₁`.
    pub to_identity: f64,
    /// `‖Choi(Ũ) − Choi(𝟙₁)‖₁`, `Ũ` the closest unitary of `Λ̃₁,σ₂`.
    pub unitary_to_identity: f64,
    /// `‖Λ₁,σ₂ − Choi(U)‖₁`, `U` the closest unitary of `Λ₁,σ₂`.
    pub to_closest_unitary: f64,
    /// `‖Λ̃₁,σ₂ − Choi(Ũ)‖₁`, equal to `to_closest_unitary` by unitary
    /// invariance of the trace norm.
    pub inverted_to_closest_unitary: f64,
}

impl PulseInversionDistances {
    /// `to_identity − unitary_to_identity − to_closest_unitary`, at most 0.
    pub fn triangle_excess(&self) -> f64 {
        self.to_identity - self.unitary_to_identity - self.to_closest_unitary
    }
}

pub fn pulse_inversion_distances(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<PulseInversionDistances> {
    let d1 = ctx.ensemble.model.d1;
    let identity_choi = ChoiState::of_unitary(&linalg::identity(d1))?;
    let inverted = ctx.choi1(&ctx.kernel.pulse_inverted(s)?)?;
    let plain = ctx.choi1(&ctx.evolution(s)?)?;
    let u_inv = ChoiState::of_unitary(&closest_unitary_channel(&inverted)?.unitary)?;
    let u_plain = ChoiState::of_unitary(&closest_unitary_channel(&plain)?.unitary)?;
    Ok(PulseInversionDistances {
        to_identity: trace_norm(&(inverted.matrix() - identity_choi.matrix())),
        unitary_to_identity: trace_norm(&(u_inv.matrix() - identity_choi.matrix())),
        to_closest_unitary: trace_norm(&(plain.matrix() - u_plain.matrix())),
        inverted_to_closest_unitary: trace_norm(&(inverted.matrix() - u_inv.matrix())),
    })
}

fn trace_dist_identity(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    Ok(pulse_inversion_distances(ctx, s)?.to_identity)
}

fn trace_dist_unitary_identity(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    Ok(pulse_inversion_distances(ctx, s)?.unitary_to_identity)
}

fn trace_dist_closest_unitary(ctx: &StatContext<'_>, s: &TrajectorySample) -> Result<f64> {
    let plain = ctx.choi1(&ctx.evolution(s)?)?;
    let u = ChoiState::of_unitary(&closest_unitary_channel(&plain)?.unitary)?;
    Ok(trace_norm(&(plain.matrix() - u.matrix())))
}

fn purity_deficit_bound(floor: f64) -> f64 {
    1.0 - floor * floor
}

static REGISTRY: [Statistic; 13] = [
    Statistic::new(
        "purity-1",
        "purity of the system-1 Choi state",
        Presentation::Deficit,
        purity1,
        Some(|b| purity_deficit_bound(bounds::tr1_purity_floor(b).clipped)),
    ),
    Statistic::new(
        "purity-2",
        "purity of the system-2 Choi state",
        Presentation::Deficit,
        purity2,
        Some(|b| purity_deficit_bound(bounds::tr2_purity_floor(b).clipped)),
    ),
    Statistic::new(
        "opnorm-1",
        "largest eigenvalue of the system-1 Choi state",
        Presentation::Deficit,
        opnorm1,
        Some(|b| 1.0 - bounds::tr1_purity_floor(b).clipped),
    ),
    Statistic::new(
        "opnorm-2",
        "largest eigenvalue of the system-2 Choi state",
        Presentation::Deficit,
        opnorm2,
        Some(|b| 1.0 - bounds::tr2_purity_floor(b).clipped),
    ),
    Statistic::new(
        "fidelity-2-zeno",
        "entanglement fidelity of the system-2 map to exp(-itH2)",
        Presentation::Deficit,
        fidelity2,
        Some(|b| 1.0 - bounds::tr2_purity_floor(b).clipped),
    ),
    Statistic::new(
        "frob-dist-2-zeno",
        "Frobenius distance of the system-2 Choi state to that of exp(-itH2)",
        Presentation::Direct,
        frob_dist2,
        Some(|b| bounds::tr2_distance_bound(b).0),
    ),
    Statistic::new(
        "opnorm-dist-1-leading",
        "operator-norm distance of the system-1 Choi state to its leading eigenprojection",
        Presentation::Direct,
        opnorm_dist1,
        Some(bounds::tr1_pure_choi_distance),
    ),
    Statistic::new(
        "frob-dist-superop-1-closest-unitary",
        "Frobenius distance of the system-1 map to its closest unitary map",
        Presentation::Direct,
        frob_dist_superop1,
        Some(|b| bounds::distance_to_unitary_bounds(b).fro_mean),
    ),
    Statistic::new(
        "frob-dist-superop-2-closest-unitary",
        "Frobenius distance of the system-2 map to its closest unitary map",
        Presentation::Direct,
        frob_dist_superop2,
        Some(|b| {
            let floor = bounds::tr2_purity_floor(b).clipped;
            2.0 * b.d2 as f64 * (1.0 - floor.powi(4)).sqrt()
        }),
    ),
    Statistic::new(
        "diamond-upper-1-closest-unitary",
        "3 d1 (1 - largest eigenvalue of the system-1 Choi state), a diamond-distance upper bound",
        Presentation::Direct,
        diamond_upper1,
        Some(|b| bounds::distance_to_unitary_bounds(b).diamond_mean),
    ),
    Statistic::new(
        "trace-dist-1-identity",
        "trace distance of the pulse-inverted system-1 Choi state to the identity channel",
        Presentation::Direct,
        trace_dist_identity,
        None,
    ),
    Statistic::new(
        "trace-dist-1-unitary-identity",
        "trace distance of the pulse-inverted closest unitary to the identity channel",
        Presentation::Direct,
        trace_dist_unitary_identity,
        None,
    ),
    Statistic::new(
        "trace-dist-1-closest-unitary",
        "trace distance of the system-1 Choi state to that of its closest unitary",
        Presentation::Direct,
        trace_dist_closest_unitary,
        None,
    ),
];

/// All registered statistics.
pub fn registry() -> &'static [Statistic] {
    &REGISTRY
}

pub fn statistic(name: &str) -> Result<&'static Statistic> {
    REGISTRY
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown statistic `{name}`")))
}

/// Summary of one Monte-Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub n: usize,
    pub samples: usize,
    pub mean: f64,
    /// Unbiased (`samples − 1`) sample variance.
    pub variance: f64,
    /// `√(variance/samples)`.
    pub stderr: f64,
    pub seed: u64,
    pub statistic: String,
}

/// Raw statistic values of trajectories `0..samples`, in ordinal order.
pub fn sample_values(
    ensemble: &Ensemble,
    n: usize,
    samples: usize,
    master_seed: u64,
    statistic: &Statistic,
) -> Result<Vec<f64>> {
    let ctx = ensemble.context(n)?;
    (0..samples as u64)
        .into_par_iter()
        .map(|ordinal| {
            let sample = sample_trajectory(&ensemble.set, n, master_seed, ordinal);
            statistic.evaluate(&ctx, &sample).map_err(|e| Error::Statistic {
                name: statistic.name.to_string(),
                ordinal,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Mean and unbiased variance, summed in order.
pub fn moments(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let variance = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    (mean, variance)
}

/// Mean, variance and standard error of the raw statistic over `samples`
/// trajectories.
pub fn estimate(
    ensemble: &Ensemble,
    n: usize,
    samples: usize,
    master_seed: u64,
    statistic: &Statistic,
) -> Result<EstimateReport> {
    if samples < 2 {
        return Err(Error::InvalidArgument("a variance estimate needs at least 2 samples".into()));
    }
    let values = sample_values(ensemble, n, samples, master_seed, statistic)?;
    let (mean, variance) = moments(&values);
    Ok(EstimateReport {
        n,
        samples,
        mean,
        variance,
        stderr: (variance / samples as f64).sqrt(),
        seed: master_seed,
        statistic: statistic.name.to_string(),
    })
}

/// Side of the threshold counted by a tail probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// `value ≤ threshold`.
    AtMost,
    /// `value ≥ threshold`.
    AtLeast,
}

impl Tail {
    pub fn contains(self, value: f64, threshold: f64) -> bool {
        match self {
            Tail::AtMost => value <= threshold,
            Tail::AtLeast => value >= threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub probability: f64,
    /// Binomial standard error `√(p(1 − p)/samples)`.
    pub stderr: f64,
    pub samples: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn tail_probability(
    ensemble: &Ensemble,
    n: usize,
    samples: usize,
    master_seed: u64,
    statistic: &Statistic,
    threshold: f64,
    direction: Tail,
) -> Result<TailEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("a tail estimate needs at least 1 sample".into()));
    }
    let values = sample_values(ensemble, n, samples, master_seed, statistic)?;
    let hits = values.iter().filter(|&&v| direction.contains(v, threshold)).count();
    let p = hits as f64 / samples as f64;
    Ok(TailEstimate { probability: p, stderr: (p * (1.0 - p) / samples as f64).sqrt(), samples })
}

/// Every trajectory value with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    /// `(probability, value)` in enumeration order.
    pub outcomes: Vec<(f64, f64)>,
}

impl ExactDistribution {
    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|(q, v)| q * v).sum()
    }

    /// Population variance under the trajectory weights.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.outcomes.iter().map(|(q, v)| q * (v - mean).powi(2)).sum()
    }

    pub fn tail(&self, threshold: f64, direction: Tail) -> f64 {
        self.outcomes.iter().filter(|(_, v)| direction.contains(*v, threshold)).map(|(q, _)| q).sum()
    }
}

/// Exact distribution of the statistic over all `|𝒱|^{n+1}` sequences.
pub fn enumerate_statistic(ensemble: &Ensemble, n: usize, statistic: &Statistic) -> Result<ExactDistribution> {
    enumerate_statistic_capped(ensemble, n, statistic, ENUMERATION_CAP)
}

pub fn enumerate_statistic_capped(
    ensemble: &Ensemble,
    n: usize,
    statistic: &Statistic,
    cap: u128,
) -> Result<ExactDistribution> {
    let ctx = ensemble.context(n)?;
    let outcomes = fold_sequences(
        &ensemble.set,
        n,
        cap,
        Vec::new,
        |acc: &mut Vec<(f64, f64)>, sample, q| {
            acc.push((q, statistic.evaluate(&ctx, sample)?));
            Ok(())
        },
        |acc, part| acc.extend(part),
    )?;
    Ok(ExactDistribution { outcomes })
}
