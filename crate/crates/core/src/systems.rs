//! Drift Hamiltonians, dipole structures and target gates.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::rng::{stream, Purpose};
use crate::numerics::{haar_random_unitary, ComplexMatrix, C64};

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_OMEGA: f64 = 20.0;
pub const DEFAULT_ANHARMONICITY: f64 = 2000.0;
pub const SPARSE_MAX_ATTEMPTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DriftKind {
    Rotor,
    Oscillator { omega: f64, anharmonicity: f64 },
    Custom,
}

#[derive(Clone, Debug)]
pub struct DriftHamiltonian {
    matrix: ComplexMatrix,
    levels: Vec<f64>,
    kind: DriftKind,
}

impl DriftHamiltonian {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn kind(&self) -> DriftKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// Largest transition frequency, E_max − E_min (the |1⟩→|N⟩ gap for ordered ladders).
    pub fn max_transition(&self) -> f64 {
        let lo = self.levels.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    fn from_levels(levels: Vec<f64>, kind: DriftKind) -> Self {
        Self {
            matrix: ComplexMatrix::from_real_diagonal(&levels),
            levels,
            kind,
        }
    }
}

pub fn build_rotor_drift(n: usize) -> DriftHamiltonian {
    let levels = (0..n).map(|j| (j * (j + 1)) as f64 / 2.0).collect();
    DriftHamiltonian::from_levels(levels, DriftKind::Rotor)
}

pub fn build_oscillator_drift(n: usize, omega: f64, anharmonicity: f64) -> Result<DriftHamiltonian> {
    if !(omega > 0.0) {
        return Err(Error::param("omega", "must be positive"));
    }
    if !(anharmonicity > 0.0) {
        return Err(Error::param("anharmonicity", "must be positive"));
    }
    let levels: Vec<f64> = (0..n)
        .map(|j| {
            let x = j as f64 + 0.5;
            omega * x - omega * omega / anharmonicity * x * x
        })
        .collect();
    for j in 1..n {
        if levels[j] <= levels[j - 1] {
            return Err(Error::SpectrumFoldOver {
                level: j,
                prev: j - 1,
                upper: levels[j],
                lower: levels[j - 1],
            });
        }
    }
    Ok(DriftHamiltonian::from_levels(
        levels,
        DriftKind::Oscillator {
            omega,
            anharmonicity,
        },
    ))
}

/// Any real diagonal matrix.
pub fn custom_drift(matrix: ComplexMatrix) -> Result<DriftHamiltonian> {
    if !matrix.is_diagonal(0.0) || !matrix.is_real(0.0) {
        return Err(Error::param("drift", "custom drift must be real and diagonal"));
    }
    if !matrix.is_finite() {
        return Err(Error::NonFinite("custom drift"));
    }
    let levels = matrix.diagonal().iter().map(|z| z.re).collect();
    Ok(DriftHamiltonian::from_levels(levels, DriftKind::Custom))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "lowercase")]
pub enum DipoleStructure {
    D { coupling: f64 },
    Banded { bands: usize },
    Sparse { fraction: f64, pairs: usize },
    Tensor { qubits: u32 },
    Flat,
    Custom,
}

/// Sign convention for off-diagonal couplings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signs {
    Positive,
    Random(u64),
}

#[derive(Clone, Debug)]
pub struct ControlHamiltonian {
    matrix: ComplexMatrix,
    structure: DipoleStructure,
    alpha: f64,
    seed: Option<u64>,
}

impl ControlHamiltonian {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn structure(&self) -> DipoleStructure {
        self.structure
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Row-major real entries.
    pub fn real_entries(&self) -> Vec<f64> {
        self.matrix.as_slice().iter().map(|z| z.re).collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    /// Number of nonzero couplings above the diagonal.
    pub fn transitions(&self) -> usize {
        let n = self.dim();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.matrix[(i, j)].re != 0.0 {
                    count += 1;
                }
            }
        }
        count
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::param("alpha", "diagonal must be positive"))
    }
}

fn symmetric_from(n: usize, alpha: f64, mut coupling: impl FnMut(usize, usize) -> f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::from_real_diagonal(&vec![alpha; n]);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = C64::new(coupling(i, j), 0.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn sign_source(signs: Signs) -> impl FnMut() -> f64 {
    let mut rng = match signs {
        Signs::Random(seed) => Some(stream(0, seed, Purpose::Dipole)),
        Signs::Positive => None,
    };
    move || match rng.as_mut() {
        Some(r) => {
            if r.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        None => 1.0,
    }
}

pub fn build_dipole_d(n: usize, coupling: f64, alpha: f64, seed: u64) -> Result<ControlHamiltonian> {
    if !(0.0..=1.0).contains(&coupling) {
        return Err(Error::param("D", "coupling must lie in [0, 1]"));
    }
    check_alpha(alpha)?;
    let mut sign = sign_source(Signs::Random(seed));
    let matrix = symmetric_from(n, alpha, |i, j| sign() * coupling.powi((j - i) as i32 - 1));
    Ok(ControlHamiltonian {
        matrix,
        structure: DipoleStructure::D { coupling },
        alpha,
        seed: Some(seed),
    })
}

pub fn build_dipole_banded(n: usize, bands: usize, alpha: f64, signs: Signs) -> Result<ControlHamiltonian> {
    if bands < 1 || bands + 1 > n {
        return Err(Error::param("bands", format!("need 1 <= bands <= N-1 = {}", n.saturating_sub(1))));
    }
    check_alpha(alpha)?;
    let mut sign = sign_source(signs);
    let matrix = symmetric_from(n, alpha, |i, j| if j - i <= bands { sign() } else { 0.0 });
    Ok(ControlHamiltonian {
        matrix,
        structure: DipoleStructure::Banded { bands },
        alpha,
        seed: match signs {
            Signs::Random(s) => Some(s),
            Signs::Positive => None,
        },
    })
}

/// All off-diagonal couplings ±1 with random signs.
pub fn build_dipole_flat(n: usize, alpha: f64, seed: u64) -> ControlHamiltonian {
    let mut sign = sign_source(Signs::Random(seed));
    let matrix = symmetric_from(n, alpha, |_, _| sign());
    ControlHamiltonian {
        matrix,
        structure: DipoleStructure::Flat,
        alpha,
        seed: Some(seed),
    }
}

/// Random sparse couplings, resampled until controllable with the rotor drift.
pub fn build_dipole_sparse(n: usize, fraction: f64, alpha: f64, seed: u64) -> Result<ControlHamiltonian> {
    build_dipole_sparse_with_drift(&build_rotor_drift(n), fraction, alpha, seed)
}

pub fn build_dipole_sparse_with_drift(
    drift: &DriftHamiltonian,
    fraction: f64,
    alpha: f64,
    seed: u64,
) -> Result<ControlHamiltonian> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param("fraction", "must lie in (0, 1]"));
    }
    check_alpha(alpha)?;
    let n = drift.dim();
    let mut all_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            all_pairs.push((i, j));
        }
    }
    let count = (fraction * all_pairs.len() as f64).round() as usize;
    let mut rng = stream(0, seed, Purpose::Dipole);
    for _ in 0..SPARSE_MAX_ATTEMPTS {
        all_pairs.shuffle(&mut rng);
        let mut matrix = ComplexMatrix::from_real_diagonal(&vec![alpha; n]);
        for &(i, j) in &all_pairs[..count] {
            let v = C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0);
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
        let candidate = ControlHamiltonian {
            matrix,
            structure: DipoleStructure::Sparse { fraction, pairs: count },
            alpha,
            seed: Some(seed),
        };
        let lie = crate::lie::lie_closure(drift.matrix(), candidate.matrix(), crate::lie::DEFAULT_TOL)?;
        if lie.controllable {
            return Ok(candidate);
        }
    }
    Err(Error::NotControllable {
        attempts: SPARSE_MAX_ATTEMPTS,
    })
}

/// Σ_j σ_x^(j) + α·I on `qubits` qubits.
pub fn build_dipole_tensor(qubits: u32, alpha: f64) -> Result<ControlHamiltonian> {
    if qubits < 1 {
        return Err(Error::param("qubits", "need at least one qubit"));
    }
    check_alpha(alpha)?;
    let n = 1usize << qubits;
    let matrix = symmetric_from(n, alpha, |i, j| {
        if (i ^ j).count_ones() == 1 {
            1.0
        } else {
            0.0
        }
    });
    Ok(ControlHamiltonian {
        matrix,
        structure: DipoleStructure::Tensor { qubits },
        alpha,
        seed: None,
    })
}

/// Any real symmetric matrix.
pub fn custom_dipole(matrix: ComplexMatrix) -> Result<ControlHamiltonian> {
    if !matrix.is_real(0.0) || matrix.hermitian_violation() != 0.0 {
        return Err(Error::param("dipole", "custom dipole must be real symmetric"));
    }
    if !matrix.is_finite() {
        return Err(Error::NonFinite("custom dipole"));
    }
    let alpha = matrix.diagonal().first().map(|z| z.re).unwrap_or(0.0);
    Ok(ControlHamiltonian {
        matrix,
        structure: DipoleStructure::Custom,
        alpha,
        seed: None,
    })
}

/// Real orthogonal eigendecomposition μ = Q·diag(m)·Qᵀ, used by the propagator.
#[derive(Clone, Debug)]
pub(crate) struct DipoleEigen {
    /// Row-major Q.
    pub q: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ControlSystem {
    drift: DriftHamiltonian,
    dipole: ControlHamiltonian,
    eigen: DipoleEigen,
}

impl ControlSystem {
    pub fn new(drift: DriftHamiltonian, dipole: ControlHamiltonian) -> Result<Self> {
        if drift.dim() != dipole.dim() {
            return Err(Error::DimensionMismatch {
                expected: drift.dim(),
                found: dipole.dim(),
            });
        }
        let n = dipole.dim();
        let m = nalgebra::DMatrix::from_row_slice(n, n, &dipole.real_entries());
        let eig = m.symmetric_eigen();
        let q = (0..n * n).map(|k| eig.eigenvectors[(k / n, k % n)]).collect();
        let eigen = DipoleEigen {
            q,
            values: eig.eigenvalues.iter().copied().collect(),
        };
        Ok(Self {
            drift,
            dipole,
            eigen,
        })
    }

    pub fn drift(&self) -> &DriftHamiltonian {
        &self.drift
    }

    pub fn dipole(&self) -> &ControlHamiltonian {
        &self.dipole
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub(crate) fn dipole_eigen(&self) -> &DipoleEigen {
        &self.eigen
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetKind {
    Identity,
    Haar { seed: u64 },
    Qft { qubits: u32 },
    Custom,
}

#[derive(Clone, Debug)]
pub struct TargetGate {
    matrix: ComplexMatrix,
    kind: TargetKind,
}

impl TargetGate {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n),
            kind: TargetKind::Identity,
        }
    }

    pub fn haar(n: usize, seed: u64) -> Self {
        Self {
            matrix: haar_random_unitary(n, seed),
            kind: TargetKind::Haar { seed },
        }
    }

    pub fn custom(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_unitary(1e-10) {
            return Err(Error::param(
                "target",
                format!("not unitary: ||W^H W - I|| = {:.3e}", matrix.unitarity_defect()),
            ));
        }
        Ok(Self {
            matrix,
            kind: TargetKind::Custom,
        })
    }
}

/// Quantum Fourier transform gate on `qubits` qubits with unitary normalization.
pub fn build_qft_gate(qubits: u32) -> Result<TargetGate> {
    if qubits < 1 {
        return Err(Error::param("qubits", "need at least one qubit"));
    }
    let n = 1usize << qubits;
    let norm = (n as f64).sqrt().recip();
    let matrix = ComplexMatrix::from_fn(n, |j, k| {
        // Indices run from 1; reduce the exponent mod N to keep the phase exact.
        let e = ((j + 1) * (k + 1)) % n;
        C64::from_polar(norm, std::f64::consts::TAU * e as f64 / n as f64)
    });
    Ok(TargetGate {
        matrix,
        kind: TargetKind::Qft { qubits },
    })
}

/// Reads the plain-text matrix format: a line holding N, then N rows of N entries.
/// Complex entries are written `re+imj`.
pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            context: path.display().to_string(),
            message,
        },
        other => other,
    })
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let fail = |message: String| Error::Parse {
        context: "matrix text".into(),
        message,
    };
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| fail("empty input".into()))?;
    let n: usize = header
        .parse()
        .map_err(|_| fail(format!("bad dimension line `{header}`")))?;
    if n == 0 {
        return Err(fail("dimension must be positive".into()));
    }
    let mut data = Vec::with_capacity(n * n);
    for row in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| fail(format!("expected {n} rows, found {row}")))?;
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != n {
            return Err(fail(format!("row {} has {} entries, expected {n}", row + 1, entries.len())));
        }
        for e in entries {
            data.push(parse_complex(e).ok_or_else(|| fail(format!("bad entry `{e}`")))?);
        }
    }
    if lines.next().is_some() {
        return Err(fail("trailing rows after matrix".into()));
    }
    ComplexMatrix::from_row_major(data)
}

pub fn parse_complex(s: &str) -> Option<C64> {
    let Some(body) = s.strip_suffix('j') else {
        return s.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().ok()?;
            let im = parse_imag(&body[k..])?;
            Some(C64::new(re, im))
        }
        None => parse_imag(body).map(|im| C64::new(0.0, im)),
    }
}

fn parse_imag(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse().ok(),
    }
}

pub fn format_complex(z: C64) -> String {
    if z.im.is_sign_negative() {
        format!("{:e}-{:e}j", z.re, -z.im)
    } else {
        format!("{:e}+{:e}j", z.re, z.im)
    }
}

/// Writes `m` in the matrix text format; real matrices are written without imaginary parts.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let real = m.is_real(0.0);
    let mut out = format!("{}\n", m.dim());
    for i in 0..m.dim() {
        let row: Vec<String> = m
            .row(i)
            .iter()
            .map(|&z| if real { format!("{:e}", z.re) } else { format_complex(z) })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_matrix_file(path: impl AsRef<Path>, m: &ComplexMatrix) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_matrix(m)).map_err(|e| Error::io(path, e))
}
