//! Bipartite Hamiltonian models `H = H₁ ⊗ 𝟙 + 𝟙 ⊗ H₂ + H₁₂`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::channel::Superoperator;
use crate::error::{Error, Result};
use crate::linalg::{self, c, hermitian_eigen, hermiticity_defect, partial_trace, tensor, ComplexMatrix, C64};

/// Tolerance on the identity `D̂ĤD̂ = (Î₁ ⊗ Ĥ₂)D̂`.
pub const ZENO_IDENTITY_TOL: f64 = 1e-10;

/// Hamiltonian on `d1 × d2` with its split into local and interaction parts
/// and the evolution time.
#[derive(Debug, Clone)]
pub struct BipartiteModel {
    pub d1: usize,
    pub d2: usize,
    pub h: ComplexMatrix,
    pub h1: ComplexMatrix,
    pub h2: ComplexMatrix,
    pub h12: ComplexMatrix,
    /// Total evolution time `t`.
    pub t_total: f64,
    /// Dimensionless time `T = t‖Ĥ‖∞`.
    pub big_t: f64,
    generator_norm: f64,
}

impl BipartiteModel {
    /// Splits `h` and sets the time so that `T = 1` (or `t = 1` when the
    /// generator vanishes).
    pub fn new(h: ComplexMatrix, d1: usize, d2: usize) -> Result<Self> {
        let (h1, h2, h12) = schmidt_split(&h, d1, d2)?;
        let generator_norm = generator_norm(&h)?;
        let t_total = if generator_norm > 0.0 { 1.0 / generator_norm } else { 1.0 };
        Ok(Self { d1, d2, h, h1, h2, h12, t_total, big_t: t_total * generator_norm, generator_norm })
    }

    /// Rescales the evolution time so that `T = t‖Ĥ‖∞ = big_t`.
    pub fn with_big_t(mut self, big_t: f64) -> Self {
        if self.generator_norm > 0.0 {
            self.t_total = big_t / self.generator_norm;
            self.big_t = big_t;
        } else {
            self.t_total = big_t;
            self.big_t = 0.0;
        }
        self
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t_total = t;
        self.big_t = t * self.generator_norm;
        self
    }

    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    /// `‖Ĥ‖∞ = λmax(H) − λmin(H)`.
    pub fn generator_norm(&self) -> f64 {
        self.generator_norm
    }

    /// `Ĥ` of the full Hamiltonian.
    pub fn generator(&self) -> Superoperator {
        generator_superop_unchecked(&self.h)
    }

    /// `Î₁ ⊗ Ĥ₂`: the generator of `𝟙 ⊗ H₂` on the full space.
    pub fn bath_generator(&self) -> Superoperator {
        generator_superop_unchecked(&tensor(&linalg::identity(self.d1), &self.h2))
    }

    /// `e^{-itH₂}`, the bath unitary of the Zeno limit.
    pub fn bath_unitary(&self) -> ComplexMatrix {
        linalg::expm_i(&self.h2, self.t_total).expect("H₂ is Hermitian")
    }

    /// `e^{-i τ H}` on the Hilbert space.
    pub fn propagator(&self, tau: f64) -> ComplexMatrix {
        linalg::expm_i(&self.h, tau).expect("H is Hermitian")
    }
}

fn generator_norm(h: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.eigenvalues.first().unwrap_or(&0.0) - eig.eigenvalues.last().unwrap_or(&0.0))
}

/// `h1 = tr₂(h)/d₂`, `h2 = tr₁(h)/d₁`, `h12 = h − h1 ⊗ 𝟙 − 𝟙 ⊗ h2`.
pub fn schmidt_split(h: &ComplexMatrix, d1: usize, d2: usize) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    if h.nrows() != d1 * d2 || h.ncols() != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian of shape {}x{} on {d1}x{d2}",
            h.nrows(),
            h.ncols()
        )));
    }
    let defect = hermiticity_defect(h);
    if defect > linalg::HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let tr = linalg::trace(h);
    // the reference fixture carries a rounding residue of order 1e-2
    if tr.norm() > 0.01 * (d1 * d2) as f64 {
        return Err(Error::NotTraceless(tr.norm()));
    }
    let h = h - linalg::identity(d1 * d2) * (tr / (d1 * d2) as f64);
    let h1 = partial_trace(&h, &[d1, d2], &[0])? / c(d2 as f64, 0.0);
    let h2 = partial_trace(&h, &[d1, d2], &[1])? / c(d1 as f64, 0.0);
    let h12 = &h - tensor(&h1, &linalg::identity(d2)) - tensor(&linalg::identity(d1), &h2);
    Ok((h1, h2, h12))
}

/// Pauli-string coefficients of an operator on qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    pub num_qubits: usize,
    /// Keyed by labels such as `"XZ"`, first letter acting on qubit 0.
    pub coefficients: BTreeMap<String, f64>,
}

impl PauliDecomposition {
    pub fn coefficient(&self, label: &str) -> f64 {
        self.coefficients.get(label).copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = 1usize << self.num_qubits;
        self.coefficients
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, (label, &w)| acc + pauli_string(label) * c(w, 0.0))
    }
}

/// Tensor product of single-qubit Paulis named by `label` (`I`, `X`, `Y`, `Z`).
pub fn pauli_string(label: &str) -> ComplexMatrix {
    label.chars().fold(ComplexMatrix::identity(1, 1), |acc, ch| {
        let p = match ch {
            'I' => linalg::pauli_i(),
            'X' => linalg::pauli_x(),
            'Y' => linalg::pauli_y(),
            'Z' => linalg::pauli_z(),
            other => panic!("unknown Pauli label {other}"),
        };
        tensor(&acc, &p)
    })
}

fn pauli_labels(num_qubits: usize) -> Vec<String> {
    (0..num_qubits).fold(vec![String::new()], |acc, _| {
        acc.iter()
            .flat_map(|prefix| ['I', 'X', 'Y', 'Z'].map(|p| format!("{prefix}{p}")))
            .collect()
    })
}

/// `coeff(P) = tr(P h)/2ⁿ` for every Pauli string `P`.
pub fn pauli_decompose(h: &ComplexMatrix, num_qubits: usize) -> Result<PauliDecomposition> {
    let d = h.nrows();
    if !d.is_power_of_two() || d != 1 << num_qubits {
        return Err(Error::NotPowerOfTwo(d));
    }
    let defect = hermiticity_defect(h);
    if defect > linalg::HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let coefficients = pauli_labels(num_qubits)
        .into_iter()
        .map(|label| {
            let w = linalg::trace(&(pauli_string(&label) * h)).re / d as f64;
            (label, w)
        })
        .collect();
    Ok(PauliDecomposition { num_qubits, coefficients })
}

fn generator_superop_unchecked(h: &ComplexMatrix) -> Superoperator {
    let d = h.nrows();
    let id = linalg::identity(d);
    let m = tensor(h, &id) - tensor(&id, &h.transpose());
    Superoperator::new(d, m).expect("generator has shape d²×d²")
}

/// `Ĥ = H ⊗ 𝟙 − 𝟙 ⊗ Hᵀ`, the matrix of `[H, •]`.
pub fn generator_superop(h: &ComplexMatrix) -> Result<Superoperator> {
    let defect = hermiticity_defect(h);
    if defect > linalg::HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(generator_superop_unchecked(h))
}

/// `D̂ = (1/d₁)|𝟙₁)(𝟙₁| ⊗ Î₂₂'`, stored in the row-vectorized order
/// `(1, 2, 1', 2')`: `D(ρ) = 𝟙₁/d₁ ⊗ tr₁ρ`.
pub fn projector_d(d1: usize, d2: usize) -> Superoperator {
    let d = d1 * d2;
    let idx = |a: usize, b: usize, ap: usize, bp: usize| (a * d2 + b) * d + ap * d2 + bp;
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    let w = c(1.0 / d1 as f64, 0.0);
    for a in 0..d1 {
        for ci in 0..d1 {
            for b in 0..d2 {
                for bp in 0..d2 {
                    m[(idx(a, b, a, bp), idx(ci, b, ci, bp))] = w;
                }
            }
        }
    }
    Superoperator::new(d, m).expect("projector has shape d²×d²")
}

/// The projected generator in both of its forms.
#[derive(Debug, Clone)]
pub struct ZenoGenerator {
    /// `D̂ĤD̂`.
    pub projected: Superoperator,
    /// `(Î₁ ⊗ Ĥ₂)D̂`.
    pub factored: Superoperator,
    /// `‖D̂ĤD̂ − (Î₁ ⊗ Ĥ₂)D̂‖∞`.
    pub deviation: f64,
}

pub fn zeno_generator(model: &BipartiteModel) -> Result<ZenoGenerator> {
    zeno_generator_with(model, &projector_d(model.d1, model.d2))
}

/// [`zeno_generator`] against an explicit projector.
pub fn zeno_generator_with(model: &BipartiteModel, projector: &Superoperator) -> Result<ZenoGenerator> {
    let gen = model.generator();
    let projected = projector.compose(&gen).compose(projector);
    let factored = model.bath_generator().compose(projector);
    let deviation = linalg::op_norm(&(projected.matrix() - factored.matrix()));
    if deviation > ZENO_IDENTITY_TOL {
        return Err(Error::IdentityViolated { check: "projected generator", deviation });
    }
    Ok(ZenoGenerator { projected, factored, deviation })
}

/// Entries of the two-qubit reference Hamiltonian, row-major `(re, im)`.
const REFERENCE_ENTRIES: [(f64, f64); 16] = [
    (-0.10, 0.00),
    (-0.03, -0.35),
    (-0.22, -0.36),
    (0.13, 0.21),
    (-0.03, 0.35),
    (-0.29, 0.00),
    (0.20, 0.27),
    (-0.02, -0.04),
    (-0.22, 0.36),
    (0.20, -0.27),
    (-0.33, 0.00),
    (0.30, 0.40),
    (0.13, -0.21),
    (-0.02, 0.04),
    (0.30, -0.40),
    (0.72, 0.00),
];

/// The generic two-qubit reference Hamiltonian (one system qubit, one bath
/// qubit).
pub fn reference_hamiltonian() -> ComplexMatrix {
    let entries: Vec<C64> = REFERENCE_ENTRIES.iter().map(|&(re, im)| c(re, im)).collect();
    linalg::from_rows(4, 4, &entries)
}

/// Two-qubit reference model with `T = t‖Ĥ‖∞ = 1`.
pub fn reference_model() -> BipartiteModel {
    BipartiteModel::new(reference_hamiltonian(), 2, 2).expect("reference Hamiltonian is valid")
}

fn format_entry(z: C64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    format!("{}{}{}j", z.re, if im < 0.0 || (im == 0.0 && im.is_sign_negative()) { "" } else { "+" }, im)
}

/// Writes a matrix as one row per line with `re+imj` entries separated by
/// spaces.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_entry(m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

fn parse_entry(tok: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("malformed complex entry `{tok}`"));
    let Some(body) = tok.strip_suffix('j').or_else(|| tok.strip_suffix('i')) else {
        return tok.parse::<f64>().map(|re| c(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            let im = body[k..].parse::<f64>().map_err(|_| bad())?;
            Ok(c(re, im))
        }
        None => body.parse::<f64>().map(|im| c(0.0, im)).map_err(|_| bad()),
    }
}

/// Parses the format of [`format_matrix`]. Blank lines and `#` comments are
/// skipped; plain reals are accepted.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        rows.push(line.split_whitespace().map(parse_entry).collect::<Result<_>>()?);
    }
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.is_empty() || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("matrix rows are empty or ragged".into()));
    }
    let flat: Vec<C64> = rows.concat();
    Ok(linalg::from_rows(rows.len(), ncols, &flat))
}
