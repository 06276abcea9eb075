//! Time grids, piecewise-constant control fields and their spectra.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::rng::{stream, Purpose};
use crate::systems::{ControlSystem, DriftKind};

pub const DEFAULT_T: f64 = 14.0;
pub const DEFAULT_COMPONENTS: usize = 20;

/// Uniform grid of `n_points` cells on [0, T]; sample k is held on [k·dt, (k+1)·dt).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_final: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_points: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::param("T", "final time must be positive and finite"));
        }
        if n_points < 2 {
            return Err(Error::param("n_points", "need at least 2 points"));
        }
        Ok(Self { t_final, n_points })
    }

    /// Like [`TimeGrid::new`] but also enforces dt·ω_max ≤ π for the system's drift.
    pub fn checked(t_final: f64, n_points: usize, system: &ControlSystem) -> Result<Self> {
        let grid = Self::new(t_final, n_points)?;
        grid.check_nyquist(system.drift().max_transition())?;
        Ok(grid)
    }

    pub fn check_nyquist(&self, omega_max: f64) -> Result<()> {
        let product = self.dt() * omega_max;
        if product > PI {
            let needed = (self.t_final * omega_max / PI).ceil() as usize;
            return Err(Error::NyquistViolation {
                product,
                suggested: needed.next_power_of_two(),
            });
        }
        Ok(())
    }

    #[inline]
    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.t_final / self.n_points as f64
    }

    /// Left edge of cell k.
    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn cell_centre(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dt()
    }
}

/// Grid sizes for T = 14 by drift family and dimension, with 4096 points for longer T.
/// The count is doubled until the drift's highest transition is resolved.
pub fn default_grid(system: &ControlSystem, t_final: Option<f64>) -> Result<TimeGrid> {
    let t = t_final.unwrap_or(DEFAULT_T);
    let n = system.dim();
    let mut points = if t > DEFAULT_T {
        4096
    } else {
        match system.drift().kind() {
            DriftKind::Oscillator { .. } => match n {
                0..=8 => 512,
                9..=16 => 1024,
                _ => 2048,
            },
            _ => match n {
                0..=8 => 512,
                9..=16 => 2048,
                _ => 4096,
            },
        }
    };
    let omega = system.drift().max_transition();
    while TimeGrid::new(t, points)?.check_nyquist(omega).is_err() {
        points *= 2;
    }
    TimeGrid::new(t, points)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Random,
    Even,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub components: usize,
    /// Square root of the fluence.
    pub amplitude: f64,
    pub spacing: Spacing,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            components: DEFAULT_COMPONENTS,
            amplitude: 10.0,
            spacing: Spacing::Random,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    grid: TimeGrid,
    samples: Vec<f64>,
}

impl ControlField {
    pub fn new(grid: TimeGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_points(),
                found: samples.len(),
            });
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("field samples"));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.n_points()],
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..grid.n_points()).map(|k| f(grid.cell_centre(k))).collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|x| c * x).collect(),
        }
    }

    /// L² distance (∫(a − b)² dt)^½.
    pub fn distance(&self, other: &Self) -> f64 {
        l2_distance(&self.samples, &other.samples, self.grid.dt())
    }

    pub fn norm(&self) -> f64 {
        fluence(self).sqrt()
    }
}

pub(crate) fn l2_distance(a: &[f64], b: &[f64], dt: f64) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() * dt).sqrt()
}

/// Gaussian-enveloped sum of sinusoids, normalized to fluence `amplitude²`.
pub fn initial_field(
    grid: &TimeGrid,
    params: &FieldParams,
    seed: u64,
    system: &ControlSystem,
) -> Result<ControlField> {
    if params.components < 1 {
        return Err(Error::param("K", "need at least one frequency component"));
    }
    if !(params.amplitude > 0.0 && params.amplitude.is_finite()) {
        return Err(Error::param("f", "field amplitude must be positive"));
    }
    let omega_max = system.drift().max_transition();
    let mut rng = stream(0, seed, Purpose::Field);
    let k = params.components;
    let mut omegas = Vec::with_capacity(k);
    let mut phases = Vec::with_capacity(k);
    for j in 0..k {
        let w = match params.spacing {
            Spacing::Random => rng.random_range(0.0..=1.0) * omega_max,
            Spacing::Even => (j + 1) as f64 * omega_max / k as f64,
        };
        omegas.push(w);
        phases.push(rng.random_range(0.0..TAU));
    }
    let t_final = grid.t_final();
    let shape = |t: f64| {
        let envelope = envelope(t, t_final);
        let carrier: f64 = omegas
            .iter()
            .zip(&phases)
            .map(|(w, p)| (w * t + p).sin())
            .sum();
        envelope * carrier
    };
    let raw = ControlField::from_fn(*grid, shape)?;
    let norm = raw.norm();
    if norm == 0.0 {
        return Err(Error::Degenerate("initial field"));
    }
    Ok(raw.scaled(params.amplitude / norm))
}

/// exp[−(8π/T²)(t − T/2)²].
pub fn envelope(t: f64, t_final: f64) -> f64 {
    let x = t - t_final / 2.0;
    (-8.0 * PI / (t_final * t_final) * x * x).exp()
}

/// ∫₀ᵀ ε² dt; exact for the piecewise-constant field.
pub fn fluence(field: &ControlField) -> f64 {
    field.samples.iter().map(|x| x * x).sum::<f64>() * field.grid.dt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSpectrum {
    /// Angular frequencies 2πj/T.
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl FieldSpectrum {
    /// Bins whose magnitude exceeds `fraction` of the peak.
    pub fn count_above(&self, fraction: f64) -> usize {
        let peak = self.magnitudes.iter().copied().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0;
        }
        self.magnitudes.iter().filter(|&&m| m > fraction * peak).count()
    }

    /// Σ samples² reconstructed from the one-sided spectrum of an `n`-sample signal.
    pub fn parseval_sum(&self, n: usize) -> f64 {
        let last = self.magnitudes.len() - 1;
        let total: f64 = self
            .magnitudes
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let w = if j == 0 || (n % 2 == 0 && j == last) { 1.0 } else { 2.0 };
                w * m * m
            })
            .sum();
        total / n as f64
    }
}

pub fn fourier_spectrum(field: &ControlField) -> FieldSpectrum {
    let n = field.samples.len();
    let mut buffer: Vec<Complex64> = field.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let bins = n / 2 + 1;
    let t = field.grid.t_final();
    FieldSpectrum {
        frequencies: (0..bins).map(|j| TAU * j as f64 / t).collect(),
        magnitudes: buffer[..bins].iter().map(|z| z.norm()).collect(),
    }
}

/// Writes `t,epsilon` rows; t is the left edge of each cell.
pub fn write_field_csv(path: impl AsRef<Path>, field: &ControlField) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_field(file, field)
}

pub fn write_field<W: std::io::Write>(out: W, field: &ControlField) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "epsilon"])?;
    for (k, x) in field.samples.iter().enumerate() {
        w.write_record([field.grid.node(k).to_string(), x.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_field_csv(path: impl AsRef<Path>) -> Result<ControlField> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_field(file).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            context: path.display().to_string(),
            message,
        },
        other => other,
    })
}

pub fn read_field<R: std::io::Read>(input: R) -> Result<ControlField> {
    let fail = |message: String| Error::Parse {
        context: "field csv".into(),
        message,
    };
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "epsilon" {
        return Err(fail(format!("expected header `t,epsilon`, found {headers:?}")));
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| fail(format!("row {}: bad number `{s}`", row + 1)))
        };
        times.push(parse(&record[0])?);
        samples.push(parse(&record[1])?);
    }
    if times.len() < 2 {
        return Err(fail("need at least two rows".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(fail("times must increase".into()));
    }
    for (k, t) in times.iter().enumerate() {
        if (t - k as f64 * dt - times[0]).abs() > 1e-9 * (1.0 + t.abs()) {
            return Err(fail(format!("row {}: times are not uniformly spaced", k + 1)));
        }
    }
    if times[0].abs() > 1e-12 {
        return Err(fail("first time must be 0".into()));
    }
    let grid = TimeGrid::new(dt * times.len() as f64, times.len())?;
    ControlField::new(grid, samples)
}
