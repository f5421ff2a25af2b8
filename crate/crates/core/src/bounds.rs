//! Closed-form error bounds for the Zeno limit and the decoupling protocols.
//!
//! Every bound depends on the evolution only through `T = t‖Ĥ‖∞` and the
//! number of steps `n`. System-2 bounds take `‖σ₁‖₂` and system-1 bounds take
//! `‖σ₂‖∞`; there is no conversion between the two.

use crate::error::{Error, Result};

const NORM_SLACK: f64 = 1e-12;

/// Parameters shared by the decoupling bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub d1: usize,
    pub d2: usize,
    pub big_t: f64,
    pub n: usize,
    /// `‖σ₁‖₂` of the fixed system-1 input, in `[1/√d₁, 1]`.
    pub sigma_fro: f64,
    /// `‖σ₂‖∞` of the fixed system-2 input, in `[1/d₂, 1]`.
    pub sigma_inf: f64,
    /// Tail threshold in `[0, 1)`.
    pub r: f64,
}

impl BoundInputs {
    pub fn new(d1: usize, d2: usize, big_t: f64, n: usize, sigma_fro: f64, sigma_inf: f64) -> Result<Self> {
        let inputs = Self { d1, d2, big_t, n, sigma_fro, sigma_inf, r: 0.0 };
        inputs.validate()?;
        Ok(inputs)
    }

    /// Pure `σ₁` and `σ₂` (both norms equal to 1).
    pub fn pure(d1: usize, d2: usize, big_t: f64, n: usize) -> Self {
        Self { d1, d2, big_t, n, sigma_fro: 1.0, sigma_inf: 1.0, r: 0.0 }
    }

    pub fn with_n(self, n: usize) -> Self {
        Self { n, ..self }
    }

    pub fn with_r(self, r: f64) -> Self {
        Self { r, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d1 == 0 || self.d2 == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if !(self.big_t >= 0.0 && self.big_t.is_finite()) {
            return Err(Error::InvalidArgument(format!("T = {} must be finite and nonnegative", self.big_t)));
        }
        let fro_min = 1.0 / (self.d1 as f64).sqrt();
        if self.sigma_fro < fro_min - NORM_SLACK || self.sigma_fro > 1.0 + NORM_SLACK {
            return Err(Error::InvalidArgument(format!("‖σ₁‖₂ = {} outside [{fro_min}, 1]", self.sigma_fro)));
        }
        let inf_min = 1.0 / self.d2 as f64;
        if self.sigma_inf < inf_min - NORM_SLACK || self.sigma_inf > 1.0 + NORM_SLACK {
            return Err(Error::InvalidArgument(format!("‖σ₂‖∞ = {} outside [{inf_min}, 1]", self.sigma_inf)));
        }
        if !(0.0..1.0).contains(&self.r) {
            return Err(Error::InvalidArgument(format!("threshold r = {} outside [0, 1)", self.r)));
        }
        Ok(())
    }

    /// `x = √d₁‖σ₁‖₂T²/n`, the system-2 rate.
    pub fn rate2(&self) -> f64 {
        (self.d1 as f64).sqrt() * self.sigma_fro * self.big_t * self.big_t / self.n as f64
    }

    /// `y = d₂‖σ₂‖∞T²/n`, the system-1 rate.
    pub fn rate1(&self) -> f64 {
        self.d2 as f64 * self.sigma_inf * self.big_t * self.big_t / self.n as f64
    }
}

/// A bound as stated and after clipping to the trivial range of the bounded
/// quantity. Small `n` can make the stated value vacuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub raw: f64,
    pub clipped: f64,
}

impl Bound {
    fn clip(raw: f64, lo: f64, hi: f64) -> Self {
        Self { raw, clipped: raw.clamp(lo, hi) }
    }

    pub fn was_clipped(&self) -> bool {
        self.raw != self.clipped
    }
}

/// `‖(e^{-itĤ/n}D̂)^n − e^{-itD̂ĤD̂}D̂‖∞ ≤ T/n + T²/n`.
pub fn zeno_bound(big_t: f64, n: usize) -> f64 {
    (big_t + big_t * big_t) / n as f64
}

/// `‖(D̂e^{-itĤ/n}D̂)^n − e^{-itD̂ĤD̂}D̂‖∞ ≤ T²/n`.
pub fn zeno_bound_sandwich(big_t: f64, n: usize) -> f64 {
    big_t * big_t / n as f64
}

/// Distance of the averaged system-2 evolution from the Zeno unitary:
/// `(Choi Frobenius, diamond) = (√d₁‖σ₁‖₂T²/n, d₂²√d₁‖σ₁‖₂T²/n)`.
pub fn av2_bounds(inputs: &BoundInputs) -> (f64, f64) {
    let x = inputs.rate2();
    (x, (inputs.d2 * inputs.d2) as f64 * x)
}

/// `E[F] ≥ 1 − √d₁‖σ₁‖₂T²/n` for the system-2 fidelity to `e^{-itH₂}`; the
/// same value bounds `E[‖Λ₂,σ₁‖∞]` and, squared, `E[P(Λ₂,σ₁)]`. Clipped at 0.
pub fn tr2_purity_floor(inputs: &BoundInputs) -> Bound {
    Bound::clip(1.0 - inputs.rate2(), 0.0, 1.0)
}

/// `E‖Λ₂,σ₁ − |e^{-itH₂})(e^{-itH₂}|/d₂‖₂ ≤ √(2x)` and the diamond version
/// `d₂²√(2x)`, with `x = √d₁‖σ₁‖₂T²/n`.
pub fn tr2_distance_bound(inputs: &BoundInputs) -> (f64, f64) {
    let choi = (2.0 * inputs.rate2()).sqrt();
    (choi, (inputs.d2 * inputs.d2) as f64 * choi)
}

/// `Pr[F ≤ r] ≤ √d₁‖σ₁‖₂T²/(n(1 − r))`, clipped to `[0, 1]`.
pub fn tr2_tail(inputs: &BoundInputs) -> Result<Bound> {
    if inputs.r.is_nan() || inputs.r >= 1.0 {
        return Err(Error::InvalidArgument(format!("threshold r = {} must be below 1", inputs.r)));
    }
    Ok(Bound::clip(inputs.rate2() / (1.0 - inputs.r), 0.0, 1.0))
}

/// `E[‖Λ₁,σ₂‖∞] ≥ 1 − d₂‖σ₂‖∞T²/n`; squared, it bounds `E[P(Λ₁,σ₂)]`.
/// Clipped at 0.
pub fn tr1_purity_floor(inputs: &BoundInputs) -> Bound {
    Bound::clip(1.0 - inputs.rate1(), 0.0, 1.0)
}

/// `E‖Λ₁,σ₂ − |v)(v|‖∞ ≤ d₂‖σ₂‖∞T²/n` with `|v)` the leading eigenvector.
pub fn tr1_pure_choi_distance(inputs: &BoundInputs) -> f64 {
    inputs.rate1()
}

/// Distance of a channel from the unitary of its leading Kraus operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelUnitaryBounds {
    /// `d(1 − √P)`.
    pub lower: f64,
    /// `d√(P − P²) + d√(1 − P²)`.
    pub upper_fro: f64,
    /// `2d√(1 − P²)`.
    pub upper_fro_loose: f64,
    /// `3d(1 − ‖Λ‖∞)`.
    pub upper_diamond: f64,
}

/// Requires `1/d² ≤ P ≤ 1` and `P ≤ ‖Λ‖∞ ≤ √P` (within 1e-9).
pub fn channel_unitary_bounds(d: usize, purity: f64, opnorm: f64) -> Result<ChannelUnitaryBounds> {
    const TOL: f64 = 1e-9;
    let df = d as f64;
    if d == 0 || purity < 1.0 / (df * df) - TOL || purity > 1.0 + TOL {
        return Err(Error::InvalidArgument(format!("purity {purity} outside [1/d², 1] for d = {d}")));
    }
    if opnorm < purity - TOL || opnorm > purity.sqrt() + TOL {
        return Err(Error::InvalidArgument(format!("operator norm {opnorm} outside [P, √P] for P = {purity}")));
    }
    let p = purity.min(1.0);
    Ok(ChannelUnitaryBounds {
        lower: df * (1.0 - p.sqrt()),
        upper_fro: df * (p - p * p).max(0.0).sqrt() + df * (1.0 - p * p).sqrt(),
        upper_fro_loose: 2.0 * df * (1.0 - p * p).sqrt(),
        upper_diamond: 3.0 * df * (1.0 - opnorm.min(1.0)),
    })
}

/// Distance of the system-1 trajectory evolution from the unitary of its
/// leading Kraus operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceToUnitaryBounds {
    /// `2d₁√(1 − (1 − y)⁴)` on the mean Frobenius distance of the matrices.
    pub fro_mean: f64,
    /// `4d₁²√(1 − (1 − y)⁴)`.
    pub fro_var: f64,
    /// `3d₁y` on the mean diamond distance.
    pub diamond_mean: f64,
    /// `6d₁y`.
    pub diamond_var: f64,
}

/// With `y = d₂‖σ₂‖∞T²/n`. The floor `1 − y` is clipped at 0 first, so the
/// Frobenius forms saturate at their trivial values once `y ≥ 1`.
pub fn distance_to_unitary_bounds(inputs: &BoundInputs) -> DistanceToUnitaryBounds {
    let d1 = inputs.d1 as f64;
    let y = inputs.rate1();
    let floor = tr1_purity_floor(inputs).clipped;
    let root = (1.0 - floor.powi(4)).sqrt();
    DistanceToUnitaryBounds {
        fro_mean: 2.0 * d1 * root,
        fro_var: 4.0 * d1 * d1 * root,
        diamond_mean: 3.0 * d1 * y,
        diamond_var: 6.0 * d1 * y,
    }
}

/// `Var[X] ≤ (max − E)(E − min)`.
pub fn bhatia_davis(max_val: f64, min_val: f64, mean: f64) -> Result<f64> {
    if !(min_val <= mean && mean <= max_val) {
        return Err(Error::InvalidArgument(format!(
            "mean {mean} outside [{min_val}, {max_val}]"
        )));
    }
    Ok((max_val - mean) * (mean - min_val))
}

/// Bhatia–Davis when only a lower bound `floor ≤ E` is known:
/// `(max − E)(E − min) ≤ (max − floor)(max − min)`.
pub fn bhatia_davis_from_floor(max_val: f64, min_val: f64, floor: f64) -> f64 {
    (max_val - floor) * (max_val - min_val)
}

/// Bhatia–Davis when only an upper bound `E ≤ cap` is known:
/// `(max − E)(E − min) ≤ (max − min)(cap − min)`.
pub fn bhatia_davis_from_cap(max_val: f64, min_val: f64, cap: f64) -> f64 {
    (max_val - min_val) * (cap - min_val)
}

/// Variance bounds on system-2 statistics of a trajectory. Floors are clipped
/// at 0, so the forms below hold as written for `x ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct System2Variances {
    /// `(1 − 1/d₂)[1 − (1 − x)²]`.
    pub purity: f64,
    /// `(1 − 1/d₂)x`.
    pub opnorm: f64,
    /// `x`.
    pub fidelity: f64,
    /// `2√(2x)`; the Frobenius distance between trace-one states is at most 2.
    pub frobenius: f64,
    /// `2d₂²√(2x)`; the diamond distance is at most 2.
    pub diamond: f64,
}

pub fn tr2_variances(inputs: &BoundInputs) -> System2Variances {
    let floor = tr2_purity_floor(inputs).clipped;
    let d2 = inputs.d2 as f64;
    let (fro, dia) = tr2_distance_bound(inputs);
    System2Variances {
        purity: bhatia_davis_from_floor(1.0, 1.0 / d2, floor * floor),
        opnorm: bhatia_davis_from_floor(1.0, 1.0 / d2, floor),
        fidelity: bhatia_davis_from_floor(1.0, 0.0, floor),
        frobenius: bhatia_davis_from_cap(2.0, 0.0, fro),
        diamond: bhatia_davis_from_cap(2.0, 0.0, dia),
    }
}

/// Variance bounds on system-1 statistics of a trajectory, with floors clipped
/// as for system 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct System1Variances {
    /// `(1 − 1/d₁)[1 − (1 − y)²]`.
    pub purity: f64,
    /// `(1 − 1/d₁)y`.
    pub opnorm: f64,
    /// `y`, for the distance to the leading eigenprojection.
    pub pure_choi_distance: f64,
}

pub fn tr1_variances(inputs: &BoundInputs) -> System1Variances {
    let floor = tr1_purity_floor(inputs).clipped;
    let d1 = inputs.d1 as f64;
    System1Variances {
        purity: bhatia_davis_from_floor(1.0, 1.0 / d1, floor * floor),
        opnorm: bhatia_davis_from_floor(1.0, 1.0 / d1, floor),
        pure_choi_distance: bhatia_davis_from_cap(1.0, 0.0, inputs.rate1().min(1.0)),
    }
}
