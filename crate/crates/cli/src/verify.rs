//! The verification suite: every identity and bound checked on the configured
//! model, plus randomized channel checks.
//!
//! A check records `margin = bound − value` for an inequality `value ≤ bound`
//! (identities use `bound = 0`, `value = deviation`) and passes when
//! `margin ≥ −tolerance`. Families of checks report their worst instance.

use std::fmt::Write as _;

use rayon::prelude::*;

use zeno_dd_core::bounds::{
    tr1_variances, tr2_tail, tr2_variances, distance_to_unitary_bounds, zeno_bound, zeno_bound_sandwich,
};
use zeno_dd_core::channel::{
    choi_from_superop, choi_of_reduced_map, closest_unitary_channel, max_mixed_split, purity, random_channel,
    reduced_choi, sampled_diamond_lower, superop_from_kraus, superop_from_unitary, Subsystem, Superoperator,
};
use zeno_dd_core::linalg::{
    self, c, frobenius, op_norm, partial_trace, random_density, random_gaussian, tensor, vectorize, ComplexMatrix,
};
use zeno_dd_core::model::{projector_d, zeno_generator_with, BipartiteModel};
use zeno_dd_core::montecarlo::{
    enumerate_statistic, pulse_inversion_distances, registry, sample_trajectory, ExactDistribution, Tail,
};
use zeno_dd_core::protocol::{
    average_evolution_exact, brute_force_average, zeno_error, zeno_limit, TerminalPulse, ZenoVariant,
};
use zeno_dd_core::{rng, Ensemble};

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    /// `bound − value` of the worst instance.
    pub margin: f64,
    /// Where the worst instance occurred.
    pub detail: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.margin >= -self.tolerance
    }
}

/// Worst-case accumulator for a family of `value ≤ bound` instances.
struct Family {
    name: String,
    tolerance: f64,
    margin: f64,
    detail: String,
}

impl Family {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self { name: name.into(), tolerance, margin: f64::INFINITY, detail: String::new() }
    }

    fn at_most(&mut self, value: f64, bound: f64, detail: impl FnOnce() -> String) {
        let m = bound - value;
        // NaN margins must fail
        if m.is_nan() || m < self.margin {
            self.margin = if m.is_nan() { f64::NEG_INFINITY } else { m };
            self.detail = detail();
        }
    }

    fn deviation(&mut self, dev: f64, detail: impl FnOnce() -> String) {
        self.at_most(dev, 0.0, detail)
    }

    fn finish(self) -> Check {
        Check { name: self.name, tolerance: self.tolerance, margin: self.margin, detail: self.detail }
    }
}

fn failed(name: &str, err: impl std::fmt::Display) -> Check {
    Check { name: name.into(), tolerance: 0.0, margin: f64::NEG_INFINITY, detail: err.to_string() }
}

fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn superop_diff(a: &Superoperator, b: &Superoperator) -> f64 {
    op_norm(&(a.matrix() - b.matrix()))
}

/// `D̂ĤD̂ = (Î₁ ⊗ Ĥ₂)D̂` for the given projector.
pub fn check_projected_generator(model: &BipartiteModel, projector: &Superoperator) -> Check {
    const NAME: &str = "projected-generator-identity";
    match zeno_generator_with(model, projector) {
        Ok(z) => Check {
            name: NAME.into(),
            tolerance: 1e-10,
            margin: -z.deviation,
            detail: "D H D = (I x H2) D".into(),
        },
        Err(zeno_dd_core::Error::IdentityViolated { deviation, .. }) => Check {
            name: NAME.into(),
            tolerance: 1e-10,
            margin: -deviation,
            detail: "D H D = (I x H2) D".into(),
        },
        Err(e) => failed(NAME, e),
    }
}

/// `D̂` is an idempotent and equals the Pauli twirl of system 1.
pub fn check_projector(model: &BipartiteModel, projector: &Superoperator) -> Check {
    let mut f = Family::new("projector-is-pauli-twirl", 1e-12);
    let p = projector.matrix();
    f.deviation(max_abs(&(p * p - p)), || "idempotence".into());
    let set = zeno_dd_core::protocol::DecouplingSet::pauli();
    if set.dim() == model.d1 {
        let mut twirl = ComplexMatrix::zeros(p.nrows(), p.ncols());
        for (u, q) in set.unitaries().iter().zip(set.probabilities()) {
            let lifted = tensor(u, &linalg::identity(model.d2));
            match superop_from_unitary(&lifted) {
                Ok(s) => twirl += s.matrix() * c(q, 0.0),
                Err(e) => return failed("projector-is-pauli-twirl", e),
            }
        }
        f.deviation(max_abs(&(twirl - p)), || "twirl average".into());
    }
    f.finish()
}

/// Zeno product errors over `grid`: projection last against `(T + T²)/n`,
/// sandwiched against `T²/n`.
pub fn check_zeno(model: &BipartiteModel, grid: &[usize]) -> Vec<Check> {
    let h = model.generator();
    let d = projector_d(model.d1, model.d2);
    let mut out = Vec::new();
    for (variant, name, bound) in [
        (ZenoVariant::PLast, "zeno-bound-projection-last", zeno_bound as fn(f64, usize) -> f64),
        (ZenoVariant::PFirst, "zeno-bound-projection-first", zeno_bound),
        (ZenoVariant::PSandwich, "zeno-bound-sandwich", zeno_bound_sandwich),
    ] {
        let mut f = Family::new(name, 1e-10);
        for &n in grid {
            match zeno_error(h.matrix(), d.matrix(), model.t_total, n, variant) {
                Ok(e) => f.at_most(e, bound(model.big_t, n), || format!("n={n}")),
                Err(e) => return vec![failed(name, e)],
            }
        }
        out.push(f.finish());
    }
    out
}

/// The closed-form average `(D̂ÊD̂)^n` against explicit enumeration.
pub fn check_average_enumeration(ensemble: &Ensemble, ns: &[usize]) -> Check {
    const NAME: &str = "average-equals-enumeration";
    let mut f = Family::new(NAME, 1e-10);
    for &n in ns {
        let exact = average_evolution_exact(&ensemble.model, n, TerminalPulse::Applied);
        let brute = brute_force_average(&ensemble.model, &ensemble.set, n);
        match (exact, brute) {
            (Ok(a), Ok(b)) => f.deviation(superop_diff(&a, &b), || format!("n={n}")),
            (Err(e), _) | (_, Err(e)) => return failed(NAME, e),
        }
    }
    f.finish()
}

/// Distance of the averaged evolution from the Zeno limit, with and without
/// the closing pulse.
pub fn check_average_zeno_limit(model: &BipartiteModel, grid: &[usize]) -> Vec<Check> {
    let limit = match zeno_limit(model) {
        Ok(l) => l,
        Err(e) => return vec![failed("average-zeno-limit", e)],
    };
    let mut with = Family::new("average-to-zeno-limit", 1e-10);
    let mut without = Family::new("average-to-zeno-limit-no-closing-pulse", 1e-10);
    for &n in grid {
        for (terminal, fam, bound) in [
            (TerminalPulse::Applied, &mut with, zeno_bound_sandwich(model.big_t, n)),
            (TerminalPulse::Omitted, &mut without, zeno_bound(model.big_t, n)),
        ] {
            match average_evolution_exact(model, n, terminal) {
                Ok(a) => fam.at_most(superop_diff(&a, &limit), bound, || format!("n={n}")),
                Err(e) => return vec![failed("average-zeno-limit", e)],
            }
        }
    }
    vec![with.finish(), without.finish()]
}

/// Every registered bound on the mean, the Markov tail at `r ∈ {0.5, 0.9}`
/// and the variance bounds, for the exact distribution over all sequences.
pub fn check_enumerated_expectations(ensemble: &Ensemble, ns: &[usize]) -> Vec<Check> {
    const TOL: f64 = 1e-9;
    let mut means = Family::new("exact-mean-bounds", TOL);
    let mut tails = Family::new("exact-fidelity-tail", TOL);
    let mut vars = Family::new("exact-variance-bounds", TOL);
    let mut dists: Vec<(usize, &str, ExactDistribution)> = Vec::new();
    for &n in ns {
        for stat in registry() {
            match enumerate_statistic(ensemble, n, stat) {
                Ok(d) => dists.push((n, stat.name, d)),
                Err(e) => return vec![failed("exact-enumeration", e)],
            }
        }
    }
    let find = |n: usize, name: &str| dists.iter().find(|(m, s, _)| *m == n && *s == name).map(|(_, _, d)| d);
    for &n in ns {
        let inputs = match ensemble.bound_inputs(n) {
            Ok(i) => i,
            Err(e) => return vec![failed("exact-enumeration", e)],
        };
        for stat in registry() {
            let (Some(bound), Some(d)) = (stat.bound(&inputs), find(n, stat.name)) else { continue };
            means.at_most(stat.report(d.mean()), bound, || format!("{} n={n}", stat.name));
        }
        if let Some(fid) = find(n, "fidelity-2-zeno") {
            for r in [0.5, 0.9] {
                match tr2_tail(&inputs.with_r(r)) {
                    Ok(b) => tails.at_most(fid.tail(r, Tail::AtMost), b.raw, || format!("n={n} r={r}")),
                    Err(e) => return vec![failed("exact-fidelity-tail", e)],
                }
            }
        }
        let v2 = tr2_variances(&inputs);
        let v1 = tr1_variances(&inputs);
        let vu = distance_to_unitary_bounds(&inputs);
        for (name, bound) in [
            ("purity-2", v2.purity),
            ("opnorm-2", v2.opnorm),
            ("fidelity-2-zeno", v2.fidelity),
            ("frob-dist-2-zeno", v2.frobenius),
            ("purity-1", v1.purity),
            ("opnorm-1", v1.opnorm),
            ("opnorm-dist-1-leading", v1.pure_choi_distance),
            ("frob-dist-superop-1-closest-unitary", vu.fro_var),
            ("diamond-upper-1-closest-unitary", vu.diamond_var),
        ] {
            if let Some(d) = find(n, name) {
                vars.at_most(d.variance(), bound, || format!("{name} n={n}"));
            }
        }
    }
    vec![means.finish(), tails.finish(), vars.finish()]
}

/// Choi-state and channel identities on `count` random channels.
pub fn check_random_channels(count: usize, seed: u64) -> Vec<Check> {
    let mut fnorm = Family::new("frobenius-norm-is-scaled-purity", 1e-9);
    let mut sandwich = Family::new("closest-unitary-frobenius-sandwich", 1e-9);
    let mut diamond = Family::new("closest-unitary-diamond-bound", 1e-9);
    let results: Vec<Result<[(f64, f64); 5], zeno_dd_core::Error>> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut g = rng::stream(seed, k);
            let d = 2 + (k % 2) as usize;
            let kraus = 1 + (k / 2 % 4) as usize;
            let s = superop_from_kraus(&random_channel(d, kraus, &mut g));
            let choi = choi_from_superop(&s)?;
            let p = purity(&choi);
            let f = frobenius(s.matrix());
            let cu = closest_unitary_channel(&choi)?;
            let u = superop_from_unitary(&cu.unitary)?;
            let direct = frobenius(&(s.matrix() - u.matrix()));
            let df = d as f64;
            let pc = p.min(1.0);
            let sampled = sampled_diamond_lower(&s, &u, 8, seed ^ k)?;
            Ok([
                ((f * f - df * df * p).abs(), 0.0),
                (cu.lower, direct),
                (direct, cu.upper_frobenius),
                (cu.upper_frobenius, 2.0 * df * (1.0 - pc * pc).sqrt()),
                (sampled, cu.upper_diamond),
            ])
        })
        .collect();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok([id, lo, hi, loose, dia]) => {
                fnorm.at_most(id.0, id.1, || format!("channel {k}"));
                for (v, b) in [lo, hi, loose] {
                    sandwich.at_most(v, b, || format!("channel {k}"));
                }
                diamond.at_most(dia.0, dia.1, || format!("channel {k}"));
            }
            Err(e) => return vec![failed("random-channels", e)],
        }
    }
    vec![fnorm.finish(), sandwich.finish(), diamond.finish()]
}

/// `Λ₁ = Λ₁,𝟙/d₂` and `Λ₂ = Λ₂,𝟙/d₁` on random two-qubit channels, and the
/// decomposition `𝟙/d = pσ + (1 − p)σ'` on random densities.
pub fn check_reduced_choi(count: usize, seed: u64) -> Vec<Check> {
    let mut reduced = Family::new("reduced-choi-is-max-mixed-input", 1e-10);
    let mut split = Family::new("max-mixed-split-reconstructs", 1e-12);
    for k in 0..count as u64 {
        let mut g = rng::stream(seed, k);
        let s = superop_from_kraus(&random_channel(4, 1 + (k % 4) as usize, &mut g));
        let mm = linalg::maximally_mixed(2);
        let run = || -> zeno_dd_core::Result<(f64, f64)> {
            let choi = choi_from_superop(&s)?;
            let l1 = reduced_choi(&choi, Subsystem::One, 2, 2)?;
            let l2 = reduced_choi(&choi, Subsystem::Two, 2, 2)?;
            let l1m = choi_of_reduced_map(&s, 2, 2, &mm, Subsystem::Two)?;
            let l2m = choi_of_reduced_map(&s, 2, 2, &mm, Subsystem::One)?;
            Ok((max_abs(&(l1.matrix() - l1m.matrix())), max_abs(&(l2.matrix() - l2m.matrix()))))
        };
        match run() {
            Ok((a, b)) => reduced.deviation(a.max(b), || format!("channel {k}")),
            Err(e) => return vec![failed("reduced-choi-is-max-mixed-input", e)],
        }
        let sigma = random_density(2 + (k % 3) as usize, &mut g);
        match max_mixed_split(&sigma) {
            Ok(sp) => {
                let d = sigma.nrows();
                let rebuilt = &sigma * c(sp.weight, 0.0) + &sp.residual * c(1.0 - sp.weight, 0.0);
                split.deviation(max_abs(&(rebuilt - linalg::maximally_mixed(d))), || format!("density {k}"));
            }
            Err(e) => return vec![failed("max-mixed-split-reconstructs", e)],
        }
    }
    vec![reduced.finish(), split.finish()]
}

/// Equal purities and operator norms of `Λ₁` and `Λ₂` for sampled
/// trajectories (the total Choi state is pure).
pub fn check_schmidt_symmetry(ensemble: &Ensemble, n: usize, samples: usize, seed: u64) -> Vec<Check> {
    let mut pur = Family::new("schmidt-symmetry-purity", 1e-10);
    let mut op = Family::new("schmidt-symmetry-opnorm", 1e-8);
    let ctx = match ensemble.context(n) {
        Ok(c) => c,
        Err(e) => return vec![failed("schmidt-symmetry", e)],
    };
    let (d1, d2) = (ensemble.model.d1, ensemble.model.d2);
    let diffs: Vec<zeno_dd_core::Result<(f64, f64)>> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let s = ctx.evolution(&sample_trajectory(&ensemble.set, n, seed, k))?;
            let choi = choi_from_superop(&s)?;
            let l1 = reduced_choi(&choi, Subsystem::One, d1, d2)?;
            let l2 = reduced_choi(&choi, Subsystem::Two, d1, d2)?;
            Ok(((purity(&l1) - purity(&l2)).abs(), (l1.op_norm() - l2.op_norm()).abs()))
        })
        .collect();
    for (k, r) in diffs.into_iter().enumerate() {
        match r {
            Ok((a, b)) => {
                pur.deviation(a, || format!("trajectory {k}"));
                op.deviation(b, || format!("trajectory {k}"));
            }
            Err(e) => return vec![failed("schmidt-symmetry", e)],
        }
    }
    vec![pur.finish(), op.finish()]
}

/// `blue ≤ red + green` per trajectory, and `green` unchanged by pulse
/// inversion.
pub fn check_pulse_inversion(ensemble: &Ensemble, ns: &[usize], samples: usize, seed: u64) -> Vec<Check> {
    let mut tri = Family::new("pulse-inversion-triangle", 1e-9);
    let mut inv = Family::new("pulse-inversion-invariance", 1e-9);
    for &n in ns {
        let ctx = match ensemble.context(n) {
            Ok(c) => c,
            Err(e) => return vec![failed("pulse-inversion", e)],
        };
        let rows: Vec<_> = (0..samples as u64)
            .into_par_iter()
            .map(|k| pulse_inversion_distances(&ctx, &sample_trajectory(&ensemble.set, n, seed, k)))
            .collect();
        for (k, r) in rows.into_iter().enumerate() {
            match r {
                Ok(d) => {
                    tri.at_most(d.triangle_excess(), 0.0, || format!("n={n} trajectory {k}"));
                    inv.deviation((d.to_closest_unitary - d.inverted_to_closest_unitary).abs(), || {
                        format!("n={n} trajectory {k}")
                    });
                }
                Err(e) => return vec![failed("pulse-inversion", e)],
            }
        }
    }
    vec![tri.finish(), inv.finish()]
}

/// Monte-Carlo means of every bounded statistic within 3 standard errors.
pub fn check_sampled_means(ensemble: &Ensemble, ns: &[usize], samples: usize, seed: u64) -> Check {
    let mut f = Family::new("sampled-mean-bounds", 1e-10);
    for &n in ns {
        let inputs = match ensemble.bound_inputs(n) {
            Ok(i) => i,
            Err(e) => return failed("sampled-mean-bounds", e),
        };
        for stat in registry() {
            let Some(bound) = stat.bound(&inputs) else { continue };
            match zeno_dd_core::montecarlo::sample_values(ensemble, n, samples, seed, stat) {
                Ok(vals) => {
                    let rep: Vec<f64> = vals.iter().map(|&v| stat.report(v)).collect();
                    let (mean, var) = zeno_dd_core::montecarlo::moments(&rep);
                    let se = (var / samples as f64).sqrt();
                    f.at_most(mean, bound + 3.0 * se, || format!("{} n={n}", stat.name));
                }
                Err(e) => return failed("sampled-mean-bounds", e),
            }
        }
    }
    f.finish()
}

/// Row-vectorization identity and partial traces of products on random
/// matrices.
pub fn check_linear_algebra(count: usize, seed: u64) -> Vec<Check> {
    let mut roth = Family::new("vectorization-identity", 1e-10);
    let mut ptr = Family::new("partial-trace-of-products", 1e-10);
    for k in 0..count as u64 {
        let mut g = rng::stream(seed, k);
        let d = 1 + (k % 4) as usize;
        let (a, b, cm) = (random_gaussian(d, d, &mut g), random_gaussian(d, d, &mut g), random_gaussian(d, d, &mut g));
        let lhs = vectorize(&(&a * &b * &cm));
        let rhs = vectorize(&b).map(|v| tensor(&a, &cm.transpose()) * v);
        if let (Ok(l), Ok(r)) = (lhs, rhs) {
            roth.deviation((l - r).norm(), || format!("d={d}"));
        }
        let ab = tensor(&a, &b);
        if let Ok(k1) = partial_trace(&ab, &[d, d], &[0]) {
            ptr.deviation(max_abs(&(k1 - &a * linalg::trace(&b))), || format!("d={d}"));
        }
    }
    vec![roth.finish(), ptr.finish()]
}

/// Options of the verification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Test hook: perturb `D̂` by a rank-one term before the generator check.
    pub corrupt_projector: bool,
    /// Random channels per channel check.
    pub channels: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { corrupt_projector: false, channels: 200 }
    }
}

/// `D̂` plus `ε|e₁)(e₁|`, which breaks idempotence and the generator identity.
pub fn corrupted_projector(d1: usize, d2: usize) -> Superoperator {
    let mut m = projector_d(d1, d2).into_matrix();
    m[(1, 1)] += c(1e-3, 0.0);
    Superoperator::new(d1 * d2, m).expect("square matrix of the right size")
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:width$}  tol={:.1e}  margin={:+.3e}  [{}]",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.tolerance,
                c.margin,
                c.detail
            );
        }
        let failed = self.failures().len();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

pub fn cmd_verify(cfg: &ExperimentConfig, opts: VerifyOptions) -> Result<Report, CliError> {
    let ensemble = cfg.build_ensemble()?;
    let model = &ensemble.model;
    let grid = cfg.n_grid();
    let projector = if opts.corrupt_projector {
        corrupted_projector(model.d1, model.d2)
    } else {
        projector_d(model.d1, model.d2)
    };
    let small: Vec<usize> = (1..=3).collect();
    let mut checks = vec![check_projected_generator(model, &projector), check_projector(model, &projector)];
    checks.extend(check_zeno(model, &grid));
    checks.push(check_average_enumeration(&ensemble, &small));
    checks.extend(check_average_zeno_limit(model, &grid));
    checks.extend(check_enumerated_expectations(&ensemble, &small));
    checks.push(check_sampled_means(&ensemble, &[10, 50], cfg.samples.max(2), cfg.seed));
    checks.extend(check_schmidt_symmetry(&ensemble, 20, 100, cfg.seed));
    checks.extend(check_pulse_inversion(&ensemble, &[10, 100], 50, cfg.seed));
    checks.extend(check_random_channels(opts.channels, cfg.seed));
    checks.extend(check_reduced_choi(opts.channels / 4, cfg.seed));
    checks.extend(check_linear_algebra(50, cfg.seed));
    Ok(Report { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use zeno_dd_core::model::reference_model;

    #[test]
    fn families_track_the_worst_instance() {
        let mut f = Family::new("x", 1e-3);
        f.at_most(1.0, 2.0, || "a".into());
        f.at_most(1.0, 1.5, || "b".into());
        f.at_most(0.0, 3.0, || "c".into());
        let c = f.finish();
        assert_eq!((c.margin, c.detail.as_str()), (0.5, "b"));
        assert!(c.passed());
        let mut g = Family::new("nan", 1.0);
        g.at_most(f64::NAN, 1.0, || "nan".into());
        assert!(!g.finish().passed());
    }

    #[test]
    fn corrupted_projector_is_caught() {
        let m = reference_model();
        assert!(check_projected_generator(&m, &projector_d(2, 2)).passed());
        let bad = check_projected_generator(&m, &corrupted_projector(2, 2));
        assert!(!bad.passed());
        assert_eq!(bad.name, "projected-generator-identity");
    }
}
