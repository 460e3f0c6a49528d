//! Receiver operations: collision-mediated parity with an auxiliary species,
//! virtual displacement, and their success statistics.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::{evolve_cross_kerr, evolve_self_kerr, CrossSpeciesParams, KerrParams};
use crate::error::{Error, Result};
use crate::fock::{
    coherent_amplitudes, displacement, displacement_matrix, squeezed_amplitudes, FockCutoff, StateVector,
};

/// Tail mass tolerated when tabulating an auxiliary number distribution.
pub const AUX_TAIL_BOUND: f64 = 1e-13;
/// Relative tolerance on `lambda = E0/hbar - kappa = kappa/2`.
pub const PARITY_RATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxiliaryKind {
    Number,
    Coherent,
    SqueezedVacuum,
}

impl std::str::FromStr for AuxiliaryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "number" => Ok(Self::Number),
            "coherent" => Ok(Self::Coherent),
            "squeezed_vacuum" | "squeezed" => Ok(Self::SqueezedVacuum),
            other => Err(Error::InvalidParameter(format!("unknown auxiliary kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for AuxiliaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Number => "number",
            Self::Coherent => "coherent",
            Self::SqueezedVacuum => "squeezed_vacuum",
        })
    }
}

/// Auxiliary species preparation. `parameter` is `n` for a number state,
/// the mean atom number for a coherent state and `r` for squeezed vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxiliaryPrep {
    pub kind: AuxiliaryKind,
    pub parameter: f64,
}

impl AuxiliaryPrep {
    pub fn new(kind: AuxiliaryKind, parameter: f64) -> Result<Self> {
        if !(parameter >= 0.0) || !parameter.is_finite() {
            return Err(Error::InvalidParameter(format!("auxiliary parameter {parameter} must be >= 0")));
        }
        if kind == AuxiliaryKind::Number && parameter.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!("number-state auxiliary needs integer n, got {parameter}")));
        }
        Ok(Self { kind, parameter })
    }

    pub fn vacuum() -> Self {
        Self { kind: AuxiliaryKind::Number, parameter: 0.0 }
    }

    /// Number distribution `P(m)`, tabulated until the tail is below [`AUX_TAIL_BOUND`].
    pub fn number_distribution(&self) -> Vec<f64> {
        match self.kind {
            AuxiliaryKind::Number => {
                let n = self.parameter as usize;
                let mut p = vec![0.0; n + 1];
                p[n] = 1.0;
                p
            }
            AuxiliaryKind::Coherent => {
                let amp = Complex64::new(self.parameter.sqrt(), 0.0);
                let mut n_max = FockCutoff::for_amplitude(amp.re).n_max();
                loop {
                    let (c, tail) = coherent_amplitudes(amp, n_max);
                    if tail <= AUX_TAIL_BOUND {
                        return c.iter().map(|z| z.norm_sqr()).collect();
                    }
                    n_max *= 2;
                }
            }
            AuxiliaryKind::SqueezedVacuum => {
                let n_max = FockCutoff::for_squeezed(self.parameter, AUX_TAIL_BOUND).n_max();
                squeezed_amplitudes(self.parameter, 0.0, n_max).0.iter().map(|z| z.norm_sqr()).collect()
            }
        }
    }

    /// Auxiliary state vector on a given single-mode cutoff.
    pub fn state(&self, cutoff: FockCutoff) -> Result<StateVector> {
        let (amps, tail) = match self.kind {
            AuxiliaryKind::Number => return StateVector::number(self.parameter as usize, cutoff),
            AuxiliaryKind::Coherent => coherent_amplitudes(Complex64::new(self.parameter.sqrt(), 0.0), cutoff.n_max()),
            AuxiliaryKind::SqueezedVacuum => squeezed_amplitudes(self.parameter, 0.0, cutoff.n_max()),
        };
        if tail > cutoff.leakage_bound() {
            return Err(Error::CutoffTooSmall { leakage: tail, bound: cutoff.leakage_bound() });
        }
        StateVector::from_amplitudes(1, cutoff, amps)?.normalized()
    }
}

/// Closed-form probability of an even auxiliary count.
pub fn p_even_analytic(aux: AuxiliaryPrep) -> f64 {
    match aux.kind {
        AuxiliaryKind::Number => {
            if (aux.parameter as u64).is_multiple_of(2) {
                1.0
            } else {
                0.0
            }
        }
        AuxiliaryKind::Coherent => (1.0 + (-2.0 * aux.parameter).exp()) / 2.0,
        AuxiliaryKind::SqueezedVacuum => 1.0,
    }
}

/// Inverse-CDF sampler for the auxiliary count.
#[derive(Debug, Clone)]
pub struct AuxSampler {
    cdf: Vec<f64>,
}

impl AuxSampler {
    pub fn new(aux: AuxiliaryPrep) -> Self {
        let mut acc = 0.0;
        let cdf = aux
            .number_distribution()
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cdf }
    }

    /// Draws one count using a single uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().unwrap_or(&1.0);
        let u: f64 = rng.gen::<f64>() * total;
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    /// Probability that the count is even, from the tabulated distribution.
    pub fn p_even(&self) -> f64 {
        let mut prev = 0.0;
        let mut even = 0.0;
        for (m, &c) in self.cdf.iter().enumerate() {
            if m % 2 == 0 {
                even += c - prev;
            }
            prev = c;
        }
        even / self.cdf.last().copied().unwrap_or(1.0)
    }
}

/// Result of one parity attempt.
#[derive(Debug, Clone)]
pub struct ParityOutcome {
    pub m: usize,
    pub conditional: StateVector,
    pub success: bool,
}

/// Collision duration `2 pi / kappa` for the parity stage.
pub fn parity_time(kappa: f64) -> f64 {
    2.0 * PI / kappa
}

fn check_parity_rates(lambda: CrossSpeciesParams, kp: KerrParams) -> Result<()> {
    if kp.kappa <= 0.0 {
        return Err(Error::FrequencyConditionViolated("parity needs kappa > 0".into()));
    }
    let half = kp.kappa / 2.0;
    let tol = PARITY_RATE_TOLERANCE * half;
    if (lambda.lambda - half).abs() > tol || (kp.e0_over_hbar - kp.kappa - half).abs() > tol {
        return Err(Error::FrequencyConditionViolated(format!(
            "parity needs lambda = E0/hbar - kappa = kappa/2; got lambda={}, E0/hbar-kappa={}, kappa/2={}",
            lambda.lambda,
            kp.e0_over_hbar - kp.kappa,
            half
        )));
    }
    Ok(())
}

/// Phases picked up by the central mode when the auxiliary holds `m` atoms.
///
/// The inter-species term is `hbar lambda n_a n_c`, so for `m` auxiliary atoms
/// the central number `n` acquires `exp(-i [E0 n + kappa n(n-1) + lambda m n] t)`.
fn central_phases(m: usize, d: usize, lambda: f64, kp: KerrParams, t: f64) -> Vec<Complex64> {
    (0..d)
        .map(|n| {
            let nf = n as f64;
            let ph = kp.e0_over_hbar * nf + kp.kappa * nf * (nf - 1.0) + lambda * (m as f64) * nf;
            Complex64::from_polar(1.0, -ph * t)
        })
        .collect()
}

/// Applies the central-mode map for auxiliary count `m`.
pub fn parity_conditional(central: &StateVector, m: usize, lambda: CrossSpeciesParams, kp: KerrParams) -> Result<StateVector> {
    check_parity_rates(lambda, kp)?;
    if central.modes() != 1 {
        return Err(Error::ShapeMismatch("parity acts on a single central mode".into()));
    }
    let phases = central_phases(m, central.cutoff().dim(), lambda.lambda, kp, parity_time(kp.kappa));
    let amps: Vec<Complex64> = central.amplitudes().iter().zip(&phases).map(|(a, p)| a * p).collect();
    StateVector::from_amplitudes(1, central.cutoff(), amps)
}

/// Joint evolution of `aux ⊗ central` through the collision stage.
///
/// Used to cross-check [`parity_conditional`]; both modes share one cutoff.
pub fn parity_collision(aux: &StateVector, central: &StateVector, lambda: CrossSpeciesParams, kp: KerrParams) -> Result<StateVector> {
    check_parity_rates(lambda, kp)?;
    let t = parity_time(kp.kappa);
    let joint = crate::fock::tensor(aux, central)?;
    let s = evolve_self_kerr(&joint, 0, kp, t)?;
    let s = evolve_self_kerr(&s, 1, kp, t)?;
    // evolve_cross_kerr applies 2 g n_a n_c; the inter-species term is lambda n_a n_c.
    evolve_cross_kerr(&s, (0, 1), lambda.lambda / 2.0, t)
}

/// Collision with the auxiliary species followed by a count of its atoms.
/// An even count leaves the central `±beta` pair exchanged.
pub fn parity_operation<R: Rng + ?Sized>(
    central: &StateVector,
    aux: AuxiliaryPrep,
    lambda: CrossSpeciesParams,
    kp: KerrParams,
    rng: &mut R,
) -> Result<ParityOutcome> {
    parity_with_sampler(central, &AuxSampler::new(aux), lambda, kp, rng)
}

/// [`parity_operation`] with a precomputed auxiliary sampler.
pub fn parity_with_sampler<R: Rng + ?Sized>(
    central: &StateVector,
    sampler: &AuxSampler,
    lambda: CrossSpeciesParams,
    kp: KerrParams,
    rng: &mut R,
) -> Result<ParityOutcome> {
    let m = sampler.sample(rng);
    let conditional = parity_conditional(central, m, lambda, kp)?;
    Ok(ParityOutcome { m, conditional, success: m.is_multiple_of(2) })
}

/// Repeats the parity stage on the same pre-collision snapshot until an even
/// count occurs or `max_attempts` is reached. Returns the last outcome and the
/// number of attempts used.
pub fn parity_until_even<R: Rng + ?Sized>(
    central: &StateVector,
    aux: AuxiliaryPrep,
    lambda: CrossSpeciesParams,
    kp: KerrParams,
    max_attempts: usize,
    rng: &mut R,
) -> Result<(ParityOutcome, usize)> {
    let sampler = AuxSampler::new(aux);
    let mut attempt = 0;
    loop {
        attempt += 1;
        let out = parity_with_sampler(central, &sampler, lambda, kp, rng)?;
        if out.success || attempt >= max_attempts.max(1) {
            return Ok((out, attempt));
        }
    }
}

/// Monte-Carlo estimate of `P_even` with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PEvenEstimate {
    pub p_even: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Samples `trials` auxiliary counts.
pub fn p_even_monte_carlo<R: Rng + ?Sized>(aux: AuxiliaryPrep, trials: usize, rng: &mut R) -> PEvenEstimate {
    let sampler = AuxSampler::new(aux);
    let even = (0..trials).filter(|_| sampler.sample(rng).is_multiple_of(2)).count();
    let n = trials.max(1) as f64;
    let p = even as f64 / n;
    PEvenEstimate { p_even: p, stderr: (p * (1.0 - p) / n).sqrt(), trials }
}

/// Analytic `P_even` along a parameter grid.
pub fn p_even_curve(kind: AuxiliaryKind, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter().map(|&x| Ok((x, p_even_analytic(AuxiliaryPrep::new(kind, x)?)))).collect()
}

/// `delta = (l + 1/2) pi / Im(beta)`.
pub fn virtual_displacement_delta(beta: Complex64, l: i64) -> Result<f64> {
    if beta.im == 0.0 {
        return Err(Error::ZeroImaginaryPart);
    }
    Ok((l as f64 + 0.5) * PI / beta.im)
}

/// Applies the exact real displacement `D(delta)`, `delta = (l + 1/2) pi / Im(beta)`.
pub fn virtual_displacement(central: &StateVector, beta: Complex64, l: i64) -> Result<StateVector> {
    let delta = virtual_displacement_delta(beta, l)?;
    if delta.abs() > 0.2 * beta.norm() {
        log::warn!("|delta| = {:.4} exceeds 0.2 |beta| = {:.4}", delta.abs(), 0.2 * beta.norm());
    }
    if central.modes() != 1 {
        return Err(Error::ShapeMismatch("virtual displacement acts on a single central mode".into()));
    }
    displacement(central, 0, Complex64::new(delta, 0.0))
}

/// Spectral-norm distance between the truncated `D(delta)` and its
/// linearization `1 + delta (a^dag - a)` for real `delta`.
pub fn linearized_displacement_error(delta: f64, n_max: usize) -> f64 {
    let d = n_max + 1;
    let exact = displacement_matrix(Complex64::new(delta, 0.0), n_max);
    let mut lin = DMatrix::<Complex64>::identity(d, d);
    for n in 0..n_max {
        let s = ((n + 1) as f64).sqrt() * delta;
        lin[(n + 1, n)] += s;
        lin[(n, n + 1)] -= s;
    }
    SVD::new(exact - lin, false, false).singular_values.max()
}

/// Success probabilities of the parity and displacement stages and the
/// protocol average over the four equiprobable branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPoint {
    pub p_even: f64,
    pub p_d: f64,
    pub p_total: f64,
}

pub fn total_efficiency(p_even: f64, p_d: f64) -> Result<EfficiencyPoint> {
    for (name, v) in [("p_even", p_even), ("p_d", p_d)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::RangeError(format!("{name}={v} not in [0, 1]")));
        }
    }
    Ok(EfficiencyPoint { p_even, p_d, p_total: (1.0 + p_even + p_d + p_even * p_d) / 4.0 })
}
