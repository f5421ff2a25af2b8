//! Experiment commands. Each returns the series it produced; writing and exit
//! codes are left to the caller.

use rayon::prelude::*;

use zeno_dd_core::bounds::{zeno_bound, zeno_bound_sandwich};
use zeno_dd_core::model::{format_matrix, pauli_decompose, projector_d, reference_hamiltonian};
use zeno_dd_core::montecarlo::{
    moments, pulse_inversion_distances, registry, sample_trajectory, sample_values, statistic, tail_probability,
    PulseInversionDistances, Tail,
};
use zeno_dd_core::protocol::{atypical_sample, typical_sample, DecouplingSet, ZenoVariant};
use zeno_dd_core::Statistic;

use crate::config::ExperimentConfig;
use crate::csv::{series_path, CsvSeries};
use crate::error::CliError;

/// Slack on bound comparisons that carry no statistical error.
pub const EXACT_SLACK: f64 = 1e-10;
/// Statistical slack on Monte-Carlo means, in standard errors.
pub const STDERR_SLACK: f64 = 3.0;
/// Per-trajectory tolerance of the pulse-inversion triangle inequality.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// Statistics plotted against their bounds, in figure order.
pub const FIGURE_STATISTICS: &[&str] = &[
    "purity-1",
    "purity-2",
    "opnorm-1",
    "opnorm-2",
    "fidelity-2-zeno",
    "opnorm-dist-1-leading",
    "frob-dist-2-zeno",
    "frob-dist-superop-1-closest-unitary",
    "frob-dist-superop-2-closest-unitary",
    "diamond-upper-1-closest-unitary",
];

/// Series together with any bound violations found while producing them.
/// The series are complete even when violations are present.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub series: Vec<CsvSeries>,
    pub violations: Vec<String>,
}

impl Outcome {
    pub fn into_result(self) -> Result<Vec<CsvSeries>, CliError> {
        if self.violations.is_empty() {
            Ok(self.series)
        } else {
            Err(CliError::CheckFailed(self.violations.join("; ")))
        }
    }
}

fn some(v: f64) -> Option<f64> {
    Some(v)
}

/// Zeno product errors for the projection-last and sandwiched products,
/// columns `n, error, bound`.
pub fn cmd_zeno(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let model = cfg.build_model()?;
    let grid = cfg.n_grid();
    let h = model.generator();
    let d = projector_d(model.d1, model.d2);
    let mut out = Outcome::default();
    for (variant, tag, bound_fn) in [
        (ZenoVariant::PLast, "p-last", zeno_bound as fn(f64, usize) -> f64),
        (ZenoVariant::PSandwich, "p-sandwich", zeno_bound_sandwich),
    ] {
        let mut s = CsvSeries::new(series_path(&cfg.out, "zeno", tag, "none", &grid), &["n", "error", "bound"]);
        let errors: Vec<f64> = grid
            .par_iter()
            .map(|&n| zeno_dd_core::protocol::zeno_error(h.matrix(), d.matrix(), model.t_total, n, variant))
            .collect::<Result<_, _>>()?;
        for (&n, err) in grid.iter().zip(errors) {
            let bound = bound_fn(model.big_t, n);
            if err > bound + EXACT_SLACK {
                out.violations.push(format!("zeno {tag} n={n}: error {err:.3e} above bound {bound:.3e}"));
            }
            s.push(vec![some(n as f64), some(err), some(bound)]);
        }
        out.series.push(s);
    }
    Ok(out)
}

fn resolve(names: &[String], fallback: &[&str]) -> Result<Vec<&'static Statistic>, CliError> {
    let names: Vec<&str> =
        if names.is_empty() { fallback.to_vec() } else { names.iter().map(String::as_str).collect() };
    names.iter().map(|n| statistic(n).map_err(|e| CliError::Usage(e.to_string()))).collect()
}

/// Per-statistic Monte-Carlo means of the reported form, columns
/// `n, mean, stderr, bound`. With a single sample the stderr cell is empty and
/// the bound is not asserted.
pub fn cmd_trajectories(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let ensemble = cfg.build_ensemble()?;
    let grid = cfg.n_grid();
    if cfg.samples == 0 {
        return Err(CliError::Usage("samples must be at least 1".into()));
    }
    let stats = resolve(&cfg.statistics, FIGURE_STATISTICS)?;
    let mut out = Outcome::default();
    for stat in stats {
        let path = series_path(&cfg.out, "trajectories", stat.name, &cfg.sigma_tag(), &grid);
        let mut s = CsvSeries::new(path, &["n", "mean", "stderr", "bound"]);
        for &n in &grid {
            let raw = sample_values(&ensemble, n, cfg.samples, cfg.seed, stat)?;
            let reported: Vec<f64> = raw.iter().map(|&v| stat.report(v)).collect();
            let (mean, variance) = moments(&reported);
            let stderr = (cfg.samples > 1).then(|| (variance / cfg.samples as f64).sqrt());
            let bound = stat.bound(&ensemble.bound_inputs(n)?);
            if let (Some(b), Some(se)) = (bound, stderr) {
                if mean > b + STDERR_SLACK * se + EXACT_SLACK {
                    out.violations.push(format!("{} n={n}: mean {mean:.4e} above bound {b:.4e}", stat.name));
                }
            }
            s.push(vec![some(n as f64), some(mean), stderr, bound]);
        }
        out.series.push(s);
    }
    Ok(out)
}

/// Empirical `P[statistic ≤ threshold]`, columns `n, probability, stderr`.
/// Defaults to the system-1 purity.
pub fn cmd_tail(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    if !(0.0..=1.0).contains(&cfg.threshold) {
        return Err(CliError::Usage(format!("threshold {} outside [0, 1]", cfg.threshold)));
    }
    if cfg.samples == 0 {
        return Err(CliError::Usage("samples must be at least 1".into()));
    }
    let ensemble = cfg.build_ensemble()?;
    let grid = cfg.n_grid();
    let mut out = Outcome::default();
    for stat in resolve(&cfg.statistics, &["purity-1"])? {
        let path = series_path(&cfg.out, "tail", stat.name, &cfg.sigma_tag(), &grid);
        let mut s = CsvSeries::new(path, &["n", "probability", "stderr"]);
        for &n in &grid {
            let t = tail_probability(&ensemble, n, cfg.samples, cfg.seed, stat, cfg.threshold, Tail::AtMost)?;
            s.push(vec![some(n as f64), some(t.probability), some(t.stderr)]);
        }
        out.series.push(s);
    }
    Ok(out)
}

/// Per-`n` means of the three pulse-inversion distances
/// (`blue = ‖Λ̃₁ − Choi(𝟙)‖₁`, `red = ‖Choi(Ũ) − Choi(𝟙)‖₁`,
/// `green = ‖Λ₁ − Choi(U)‖₁`) with the largest per-trajectory excess of
/// `blue − red − green`.
pub fn cmd_pulse_inversion(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    if cfg.samples == 0 {
        return Err(CliError::Usage("samples must be at least 1".into()));
    }
    let ensemble = cfg.build_ensemble()?;
    let grid = cfg.n_grid();
    let columns =
        ["n", "blue", "blue_stderr", "red", "red_stderr", "green", "green_stderr", "max_triangle_excess"];
    let path = series_path(&cfg.out, "pulse-inversion", "trace-dist-1", &cfg.sigma_tag(), &grid);
    let mut s = CsvSeries::new(path, &columns);
    let mut out = Outcome::default();
    for &n in &grid {
        let ctx = ensemble.context(n)?;
        let dists: Vec<PulseInversionDistances> = (0..cfg.samples as u64)
            .into_par_iter()
            .map(|k| pulse_inversion_distances(&ctx, &sample_trajectory(&ensemble.set, n, cfg.seed, k)))
            .collect::<Result<_, _>>()?;
        let mut row = vec![some(n as f64)];
        for pick in [
            (|d: &PulseInversionDistances| d.to_identity) as fn(&PulseInversionDistances) -> f64,
            |d| d.unitary_to_identity,
            |d| d.to_closest_unitary,
        ] {
            let values: Vec<f64> = dists.iter().map(pick).collect();
            let (mean, var) = moments(&values);
            row.push(some(mean));
            row.push((cfg.samples > 1).then(|| (var / cfg.samples as f64).sqrt()));
        }
        let excess = dists.iter().map(PulseInversionDistances::triangle_excess).fold(f64::NEG_INFINITY, f64::max);
        if excess > TRIANGLE_TOL {
            out.violations.push(format!("pulse-inversion n={n}: triangle excess {excess:.3e}"));
        }
        let invariance =
            dists.iter().map(|d| (d.to_closest_unitary - d.inverted_to_closest_unitary).abs()).fold(0.0, f64::max);
        if invariance > TRIANGLE_TOL {
            out.violations.push(format!("pulse-inversion n={n}: green not invariant ({invariance:.3e})"));
        }
        row.push(some(excess));
        s.push(row);
    }
    out.series.push(s);
    Ok(out)
}

/// A named text artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub contents: String,
}

/// Reference Hamiltonian, its Pauli coefficients, the projector `D̂`, the
/// fixed typical/atypical sequences and the statistic registry.
pub fn cmd_fixtures() -> Result<Vec<Fixture>, CliError> {
    let h = reference_hamiltonian();
    let pauli = pauli_decompose(&h, 2)?;
    let mut coeffs = String::from("# label coefficient\n");
    for (label, v) in &pauli.coefficients {
        coeffs.push_str(&format!("{label} {}\n", crate::csv::format_float(*v)));
    }
    let set = DecouplingSet::pauli();
    let sequences = format!(
        "# first n + 1 labels give the length-n trajectory\ntypical {}\natypical {}\n",
        typical_sample().to_labels(&set),
        atypical_sample().to_labels(&set)
    );
    let mut stats = String::from("# name presentation description\n");
    for s in registry() {
        stats.push_str(&format!("{} {:?} {}\n", s.name, s.presentation, s.description));
    }
    Ok(vec![
        Fixture { name: "hamiltonian.txt", contents: format_matrix(&h) },
        Fixture { name: "pauli_coefficients.txt", contents: coeffs },
        Fixture { name: "projector.txt", contents: format_matrix(projector_d(2, 2).matrix()) },
        Fixture { name: "sequences.txt", contents: sequences },
        Fixture { name: "statistics.txt", contents: stats },
    ])
}
