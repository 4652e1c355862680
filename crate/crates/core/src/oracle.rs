//! Ground truth for strong stability: the frequency sweep of
//! `ρ(A + B e^{−jθ})`, the `ρ(A+B)` necessary condition, the power index, and
//! an exact simulator for commensurate delays.

use crate::algebra::{spectral_norm, spectral_radius, spectral_radius_real, to_complex, ComplexMatrix, RealMatrix};
use crate::conditions::SpectralPrecheck;
use crate::error::{Error, Result};
use crate::families::{build_shuffle_family, SystemPair};
use nalgebra::{Complex, DVector};
use rayon::prelude::*;
use std::f64::consts::PI;

pub const DEFAULT_GRID_POINTS: usize = 2048;
const REFINE_WIDTH: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Uniform grid `2πi/N`, `i = 0..N`.
    pub grid: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_max: f64,
    pub argmax_theta: f64,
    pub refined: bool,
    pub rho_a_plus_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Stable,
    Unstable,
    Boundary,
}

impl OracleVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            OracleVerdict::Stable => "stable",
            OracleVerdict::Unstable => "unstable",
            OracleVerdict::Boundary => "boundary",
        }
    }
}

/// `A + B e^{−jθ}` in the caller's labelling.
pub fn delta_theta(sys: &SystemPair, theta: f64) -> ComplexMatrix {
    let (a, b, _, _) = sys.original();
    to_complex(a) + to_complex(b) * Complex::from_polar(1.0, -theta)
}

pub fn rho_at(sys: &SystemPair, theta: f64) -> Result<f64> {
    spectral_radius(&delta_theta(sys, theta))
}

pub fn sweep(sys: &SystemPair, grid_points: usize, refine: bool) -> Result<SweepReport> {
    if grid_points < 8 {
        return Err(Error::InvalidInput(format!("grid needs at least 8 points, got {grid_points}")));
    }
    let step = 2.0 * PI / grid_points as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| i as f64 * step).collect();
    let rho = grid.par_iter().map(|&th| rho_at(sys, th)).collect::<Result<Vec<f64>>>()?;
    let (imax, &coarse) = rho
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, r)| if *r > *acc.1 { (i, r) } else { acc });
    let (mut rho_max, mut argmax_theta) = (coarse, grid[imax]);
    if refine {
        let (th, val) = golden_max(sys, grid[imax] - step, grid[imax] + step)?;
        if val > rho_max {
            rho_max = val;
            argmax_theta = th.rem_euclid(2.0 * PI);
        }
    }
    let rho_a_plus_b = spectral_radius_real(&sys.sum())?;
    Ok(SweepReport { grid, rho, rho_max, argmax_theta, refined: refine, rho_a_plus_b })
}

/// Golden-section search for a maximum of `ρ(Δ_θ)` on `[lo, hi]`.
fn golden_max(sys: &SystemPair, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (rho_at(sys, x1)?, rho_at(sys, x2)?);
    let mut best = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    while hi - lo > REFINE_WIDTH {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = rho_at(sys, x1)?;
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = rho_at(sys, x2)?;
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    Ok(best)
}

pub fn classify(rho_max: f64, band: f64) -> OracleVerdict {
    if rho_max <= 1.0 - band && rho_max < 1.0 {
        OracleVerdict::Stable
    } else if rho_max >= 1.0 + band && rho_max > 1.0 {
        OracleVerdict::Unstable
    } else {
        OracleVerdict::Boundary
    }
}

pub fn is_strongly_stable(sys: &SystemPair, grid_points: usize, threshold_band: f64) -> Result<OracleVerdict> {
    if !(threshold_band >= 0.0) {
        return Err(Error::InvalidInput("threshold band must be nonnegative".into()));
    }
    Ok(classify(sweep(sys, grid_points, true)?.rho_max, threshold_band))
}

/// Smallest `k ≤ k_max` with `max_θ ‖Δ_θ^k‖₂ < 1` over the grid.
pub fn power_index(sys: &SystemPair, k_max: usize, grid_points: usize) -> Result<Option<usize>> {
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be at least 1".into()));
    }
    if grid_points < 8 {
        return Err(Error::InvalidInput(format!("grid needs at least 8 points, got {grid_points}")));
    }
    let per_theta: Vec<Vec<f64>> = (0..grid_points)
        .into_par_iter()
        .map(|i| {
            let delta = delta_theta(sys, 2.0 * PI * i as f64 / grid_points as f64);
            let mut power = delta.clone();
            let mut norms = Vec::with_capacity(k_max);
            for _ in 0..k_max {
                norms.push(spectral_norm(&power));
                power = &power * &delta;
            }
            norms
        })
        .collect();
    Ok((0..k_max).find(|&k| per_theta.iter().all(|n| n[k] < 1.0)).map(|k| k + 1))
}

/// `Q_k* = W_kᵀW_k`, the constructive seed for the order-`k` condition.
pub fn constructive_seed(sys: &SystemPair, k: usize) -> Result<RealMatrix> {
    let w = build_shuffle_family(sys, k)?.w;
    Ok(w.transpose() * &w)
}

pub fn precheck_holds(pc: &SpectralPrecheck) -> Result<bool> {
    Ok(spectral_radius_real(&pc.matrix)? < 1.0)
}

/// Sequence generated by `x_t = A x_{t−p} + B x_{t−q}` on the lattice `h·Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRun {
    pub step_h: f64,
    /// Steps of the shorter delay (internal labelling).
    pub p: usize,
    /// Steps of the longer delay.
    pub q: usize,
    pub history_len: usize,
    pub horizon: usize,
    /// History followed by the generated states; index `i` is time `i·h`.
    pub states: Vec<DVector<f64>>,
}

fn lattice_steps(delay: f64, h: f64) -> Result<usize> {
    let r = delay / h;
    let steps = r.round();
    if steps < 1.0 || (r - steps).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::NonCommensurate { step: h, detail: format!("delay {delay} is {r} steps") });
    }
    Ok(steps as usize)
}

pub fn simulate_commensurate(
    sys: &SystemPair,
    h: f64,
    history: &[DVector<f64>],
    horizon: usize,
) -> Result<TrajectoryRun> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {h}")));
    }
    let p = lattice_steps(sys.delay_a(), h)?;
    let q = lattice_steps(sys.delay_b(), h)?;
    let needed = p.max(q);
    if history.len() < needed {
        return Err(Error::InsufficientHistory { needed, got: history.len() });
    }
    let n = sys.n();
    if let Some(bad) = history.iter().find(|x| x.len() != n) {
        return Err(Error::Dimension(format!("history states must have length {n}, got {}", bad.len())));
    }
    let mut states = history.to_vec();
    for _ in 0..horizon {
        let t = states.len();
        let next = sys.a() * &states[t - p] + sys.b() * &states[t - q];
        states.push(next);
    }
    Ok(TrajectoryRun { step_h: h, p, q, history_len: history.len(), horizon, states })
}

impl TrajectoryRun {
    /// State at lattice index `idx`; offsets are in steps and may be negative.
    pub fn x(&self, idx: i64) -> Result<&DVector<f64>> {
        if idx < 0 || idx as usize >= self.states.len() {
            return Err(Error::InsufficientHistory { needed: (idx.max(0) as usize) + 1, got: self.states.len() });
        }
        Ok(&self.states[idx as usize])
    }

    fn stack(&self, idx: &[i64]) -> Result<DVector<f64>> {
        let parts = idx.iter().map(|&i| self.x(i)).collect::<Result<Vec<_>>>()?;
        let n = parts.first().map_or(0, |v| v.len());
        let mut out = DVector::zeros(n * parts.len());
        for (j, v) in parts.iter().enumerate() {
            out.rows_mut(j * n, n).copy_from(v);
        }
        Ok(out)
    }

    /// `X_k(t)`, block `j` = `x(t − (k−j)b − ja)`.
    pub fn stacked_x(&self, k: usize, t: i64) -> Result<DVector<f64>> {
        let (p, q) = (self.p as i64, self.q as i64);
        let idx: Vec<i64> = (0..k as i64).map(|j| t - (k as i64 - j) * q - j * p).collect();
        self.stack(&idx)
    }

    /// `U_k(t) = x(t − ka)`.
    pub fn stacked_u(&self, k: usize, t: i64) -> Result<DVector<f64>> {
        Ok(self.x(t - k as i64 * self.p as i64)?.clone())
    }

    /// `X̄_k(t) = [x(t); x(t−a); …; x(t−(k−1)a)]`.
    pub fn stacked_xbar(&self, k: usize, t: i64) -> Result<DVector<f64>> {
        let idx: Vec<i64> = (0..k as i64).map(|j| t - j * self.p as i64).collect();
        self.stack(&idx)
    }

    /// `Ū_k(t) = x(t + b − ka)`.
    pub fn stacked_ubar(&self, k: usize, t: i64) -> Result<DVector<f64>> {
        Ok(self.x(t + self.q as i64 - k as i64 * self.p as i64)?.clone())
    }

    /// Lattice offset of `b − a`.
    pub fn gap(&self) -> i64 {
        self.q as i64 - self.p as i64
    }
}
