//! Truncated multimode Fock space.
//!
//! Basis states are occupation tuples `(n_0, .., n_{M-1})` with every
//! `n_k <= n_max`, ordered lexicographically with mode 0 most significant:
//! `index = sum_k n_k (n_max+1)^(M-1-k)`. The JSON layout
//! `{"modes", "n_max", "amplitudes": [[re, im], ..]}` uses the same order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::hermitian_propagator;

pub const DEFAULT_LEAKAGE_BOUND: f64 = 1e-10;

/// Probability below which a conditional state is refused.
pub const ZERO_PROBABILITY: f64 = 1e-14;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Per-mode occupation cutoff together with the tolerated truncation leakage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockCutoff {
    n_max: usize,
    leakage_bound: f64,
}

impl FockCutoff {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        Ok(Self { n_max, leakage_bound: DEFAULT_LEAKAGE_BOUND })
    }

    pub fn with_leakage_bound(mut self, bound: f64) -> Self {
        self.leakage_bound = bound;
        self
    }

    /// Smallest cutoff satisfying `n_max >= |a|^2 + 6|a| + 10`.
    pub fn for_amplitude(magnitude: f64) -> Self {
        let a = magnitude.abs();
        let n = (a * a + 6.0 * a + 10.0).ceil() as usize;
        Self { n_max: n.max(1), leakage_bound: DEFAULT_LEAKAGE_BOUND }
    }

    /// Smallest cutoff whose squeezed-vacuum tail mass at `r` is below `bound`.
    pub fn for_squeezed(r: f64, bound: f64) -> Self {
        const CAP: usize = 20_002;
        let (amps, beyond) = squeezed_amplitudes(r, 0.0, CAP);
        // Walk down from the cap; the first level whose inclusion pushes the
        // upper weight past the bound is the smallest admissible cutoff.
        let mut tail = beyond;
        let mut n = 2;
        for k in (2..=CAP).rev().step_by(2) {
            tail += amps[k].norm_sqr();
            if tail > bound {
                n = k;
                break;
            }
        }
        Self { n_max: n, leakage_bound: bound.max(DEFAULT_LEAKAGE_BOUND) }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn leakage_bound(&self) -> f64 {
        self.leakage_bound
    }

    /// Single-mode dimension `n_max + 1`.
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// Coherent amplitude (alpha, beta, gamma or xi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentSpec {
    pub amplitude: Complex64,
}

impl CoherentSpec {
    pub fn new(amplitude: Complex64) -> Self {
        Self { amplitude }
    }

    pub fn real(x: f64) -> Self {
        Self { amplitude: Complex64::new(x, 0.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedVacuumSpec {
    pub r: f64,
    pub phase: f64,
}

/// Pre-normalization weights of `A|gamma> + B|-gamma>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionSpec {
    pub a: Complex64,
    pub b: Complex64,
    pub gamma: Complex64,
}

/// Pure state of `modes` bosonic modes in a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    modes: usize,
    cutoff: FockCutoff,
    amplitudes: Vec<Complex64>,
    leakage: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    modes: usize,
    n_max: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl StateVector {
    pub fn from_amplitudes(modes: usize, cutoff: FockCutoff, amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = checked_dim(cutoff.dim(), modes)?;
        if amplitudes.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {dim} amplitudes for {modes} modes at n_max={}, got {}",
                cutoff.n_max,
                amplitudes.len()
            )));
        }
        Ok(Self { modes, cutoff, amplitudes, leakage: 0.0 })
    }

    /// Product vacuum. Zero modes gives the scalar state `[1]`.
    pub fn vacuum(modes: usize, cutoff: FockCutoff) -> Self {
        let dim = cutoff.dim().pow(modes as u32);
        let mut amplitudes = vec![C0; dim];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { modes, cutoff, amplitudes, leakage: 0.0 }
    }

    pub fn number(n: usize, cutoff: FockCutoff) -> Result<Self> {
        if n > cutoff.n_max {
            return Err(Error::InvalidParameter(format!("number state |{n}> above n_max={}", cutoff.n_max)));
        }
        let mut s = Self::vacuum(1, cutoff);
        s.amplitudes[0] = C0;
        s.amplitudes[n] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Truncation leakage accumulated by the preparations and operations that
    /// produced this state.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub(crate) fn with_leakage(mut self, leakage: f64) -> Self {
        self.leakage = leakage;
        self
    }

    pub(crate) fn map_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        Self { modes: self.modes, cutoff: self.cutoff, amplitudes, leakage: self.leakage }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::DegenerateSuperposition { norm: n });
        }
        self.amplitudes.iter_mut().for_each(|c| *c /= n);
        Ok(self)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.map_amplitudes(self.amplitudes.iter().map(|c| c * factor).collect())
    }

    /// `self + other`, unnormalized.
    pub fn add(&self, other: &StateVector) -> Result<Self> {
        check_same_shape(self, other)?;
        Ok(self.map_amplitudes(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a + b).collect()))
    }

    /// Stride of `mode` in the flat amplitude array.
    pub fn stride(&self, mode: usize) -> usize {
        self.cutoff.dim().pow((self.modes - 1 - mode) as u32)
    }

    /// Occupation tuple of a flat index.
    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let d = self.cutoff.dim();
        let mut occ = vec![0; self.modes];
        for k in (0..self.modes).rev() {
            occ[k] = index % d;
            index /= d;
        }
        occ
    }

    pub fn index_of(&self, occupations: &[usize]) -> usize {
        let d = self.cutoff.dim();
        occupations.iter().fold(0, |acc, &n| acc * d + n)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::ShapeMismatch(format!("mode {mode} out of range for {} modes", self.modes)));
        }
        Ok(())
    }

    /// Occupation of `mode` at a flat index.
    #[inline]
    pub fn occupation_at(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.cutoff.dim()
    }

    /// Marginal number distribution of one mode.
    pub fn number_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        let stride = self.stride(mode);
        let d = self.cutoff.dim();
        let mut p = vec![0.0; d];
        for (i, c) in self.amplitudes.iter().enumerate() {
            p[(i / stride) % d] += c.norm_sqr();
        }
        Ok(p)
    }

    pub fn mean_number(&self, mode: usize) -> Result<f64> {
        Ok(self
            .number_distribution(mode)?
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum::<f64>()
            / self.norm_sqr())
    }

    /// `<a>` of one mode.
    pub fn mean_annihilation(&self, mode: usize) -> Result<Complex64> {
        self.check_mode(mode)?;
        let stride = self.stride(mode);
        let mut acc = C0;
        for (i, c) in self.amplitudes.iter().enumerate() {
            let n = self.occupation_at(i, mode);
            if n >= 1 {
                acc += self.amplitudes[i - stride].conj() * c * (n as f64).sqrt();
            }
        }
        Ok(acc / self.norm_sqr())
    }

    /// `<X_phi>` with `X_phi = (a e^{-i phi} + a^dag e^{i phi}) / 2`.
    pub fn mean_quadrature(&self, mode: usize, phi: f64) -> Result<f64> {
        let a = self.mean_annihilation(mode)?;
        Ok((a * Complex64::from_polar(1.0, -phi)).re)
    }

    pub fn to_json(&self) -> Result<String> {
        let js = StateJson {
            modes: self.modes,
            n_max: self.cutoff.n_max,
            amplitudes: self.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        };
        Ok(serde_json::to_string(&js)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let js: StateJson = serde_json::from_str(text)?;
        let cutoff = FockCutoff::new(js.n_max)?;
        let amps = js.amplitudes.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        Self::from_amplitudes(js.modes, cutoff, amps)
    }
}

fn checked_dim(d: usize, modes: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..modes {
        dim = dim
            .checked_mul(d)
            .ok_or_else(|| Error::ShapeMismatch("basis dimension overflows".into()))?;
    }
    Ok(dim)
}

pub(crate) fn check_same_shape(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.modes != b.modes || a.cutoff.n_max != b.cutoff.n_max {
        return Err(Error::ShapeMismatch(format!(
            "({} modes, n_max={}) vs ({} modes, n_max={})",
            a.modes, a.cutoff.n_max, b.modes, b.cutoff.n_max
        )));
    }
    Ok(())
}

/// Coherent amplitudes for `n <= n_max` and the exact tail mass beyond.
pub fn coherent_amplitudes(alpha: Complex64, n_max: usize) -> (Vec<Complex64>, f64) {
    let mean = alpha.norm_sqr();
    let mut c = Complex64::new((-mean / 2.0).exp(), 0.0);
    let mut amps = Vec::with_capacity(n_max + 1);
    amps.push(c);
    for n in 1..=n_max {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        c = c * alpha / (n as f64).sqrt();
        let p = c.norm_sqr();
        tail += p;
        if (n as f64 > mean + 1.0 && p < 1e-25) || alpha.norm() == 0.0 {
            break;
        }
        n += 1;
    }
    (amps, tail)
}

/// Squeezed-vacuum amplitudes for `n <= n_max` and the tail mass beyond.
pub fn squeezed_amplitudes(r: f64, phase: f64, n_max: usize) -> (Vec<Complex64>, f64) {
    let t = r.tanh();
    let ratio = -Complex64::from_polar(t, phase);
    let mut c = Complex64::new(1.0 / r.cosh().sqrt(), 0.0);
    let mut amps = vec![C0; n_max + 1];
    amps[0] = c;
    let mut k = 0usize;
    loop {
        c = c * ratio * ((2 * k + 1) as f64 / (2 * k + 2) as f64).sqrt();
        k += 1;
        if 2 * k > n_max {
            break;
        }
        amps[2 * k] = c;
    }
    if t == 0.0 {
        return (amps, 0.0);
    }
    let geometric = 1.0 / (1.0 - t * t);
    let mut tail = 0.0;
    loop {
        let p = c.norm_sqr();
        tail += p;
        if p * geometric < 1e-25 || k > 1_000_000 {
            break;
        }
        c = c * ratio * ((2 * k + 1) as f64 / (2 * k + 2) as f64).sqrt();
        k += 1;
    }
    (amps, tail)
}

fn single_mode(cutoff: FockCutoff, amps: Vec<Complex64>, leakage: f64) -> Result<StateVector> {
    if leakage > cutoff.leakage_bound {
        return Err(Error::CutoffTooSmall { leakage, bound: cutoff.leakage_bound });
    }
    let s = StateVector::from_amplitudes(1, cutoff, amps)?.normalized()?;
    Ok(s.with_leakage(leakage))
}

/// Coherent state `|alpha>` truncated at the cutoff and renormalized.
pub fn prepare_coherent(spec: CoherentSpec, cutoff: FockCutoff) -> Result<StateVector> {
    let (amps, leakage) = coherent_amplitudes(spec.amplitude, cutoff.n_max);
    if spec.amplitude.norm_sqr() > cutoff.n_max as f64 / 4.0 {
        return Err(Error::CutoffTooSmall { leakage, bound: cutoff.leakage_bound });
    }
    single_mode(cutoff, amps, leakage)
}

/// Squeezed vacuum; only even Fock levels are populated.
pub fn prepare_squeezed_vacuum(spec: SqueezedVacuumSpec, cutoff: FockCutoff) -> Result<StateVector> {
    if !(spec.r >= 0.0) {
        return Err(Error::InvalidParameter(format!("squeezing r={} must be >= 0", spec.r)));
    }
    let (amps, leakage) = squeezed_amplitudes(spec.r, spec.phase, cutoff.n_max);
    single_mode(cutoff, amps, leakage)
}

/// Analytic normalization `1/sqrt(|A|^2 + |B|^2 + 2 Re(A* B exp(-2|gamma|^2)))`.
pub fn cat_norm_constant(spec: &SuperpositionSpec) -> f64 {
    let overlap = (-2.0 * spec.gamma.norm_sqr()).exp();
    let n2 = spec.a.norm_sqr() + spec.b.norm_sqr() + 2.0 * (spec.a.conj() * spec.b).re * overlap;
    1.0 / n2.max(0.0).sqrt()
}

/// Normalized `A|gamma> + B|-gamma>`.
pub fn prepare_cat_superposition(spec: SuperpositionSpec, cutoff: FockCutoff) -> Result<StateVector> {
    let plus = prepare_coherent(CoherentSpec::new(spec.gamma), cutoff)?;
    let minus = prepare_coherent(CoherentSpec::new(-spec.gamma), cutoff)?;
    let raw = plus.scaled(spec.a).add(&minus.scaled(spec.b))?;
    let norm = raw.norm();
    if norm < 1e-12 {
        return Err(Error::DegenerateSuperposition { norm });
    }
    let leakage = plus.leakage;
    // The analytic constant fixes the scale; the residual from truncated
    // overlaps is removed numerically.
    let s = raw.scaled(Complex64::new(cat_norm_constant(&spec), 0.0)).normalized()?;
    Ok(s.with_leakage(leakage))
}

pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    check_same_shape(a, b)?;
    Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum())
}

/// `|<a|b>|^2 / (<a|a><b|b>)`, insensitive to global phase.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    let ip = inner_product(a, b)?;
    Ok(ip.norm_sqr() / (a.norm_sqr() * b.norm_sqr()))
}

/// `a ⊗ b`, with the modes of `a` first.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    if a.cutoff.n_max != b.cutoff.n_max {
        return Err(Error::ShapeMismatch("tensor factors must share a cutoff".into()));
    }
    let mut amps = Vec::with_capacity(a.dim() * b.dim());
    for x in &a.amplitudes {
        for y in &b.amplitudes {
            amps.push(x * y);
        }
    }
    Ok(StateVector { modes: a.modes + b.modes, cutoff: a.cutoff, amplitudes: amps, leakage: a.leakage + b.leakage })
}

/// Contracts `mode` against `coeffs`: returns the unnormalized state of the
/// remaining modes `sum_n coeffs[n] psi[.., n, ..]`.
pub fn contract_mode(joint: &StateVector, mode: usize, coeffs: &[Complex64]) -> Result<StateVector> {
    joint.check_mode(mode)?;
    let d = joint.cutoff.dim();
    if coeffs.len() != d {
        return Err(Error::ShapeMismatch(format!("{} coefficients for a mode of dimension {d}", coeffs.len())));
    }
    let stride = joint.stride(mode);
    let block = stride * d;
    let outer = joint.dim() / block;
    let mut out = vec![C0; outer * stride];
    for o in 0..outer {
        for (n, cn) in coeffs.iter().enumerate() {
            if *cn == C0 {
                continue;
            }
            let src = &joint.amplitudes[o * block + n * stride..o * block + (n + 1) * stride];
            let dst = &mut out[o * stride..(o + 1) * stride];
            for (y, x) in dst.iter_mut().zip(src) {
                *y += cn * x;
            }
        }
    }
    Ok(StateVector { modes: joint.modes - 1, cutoff: joint.cutoff, amplitudes: out, leakage: joint.leakage })
}

/// Number projection of `mode` onto `|outcome>`: the Born probability and the
/// normalized conditional state of the other modes.
pub fn partial_trace_free_project(joint: &StateVector, mode: usize, outcome: usize) -> Result<(f64, StateVector)> {
    joint.check_mode(mode)?;
    if outcome > joint.cutoff.n_max {
        return Err(Error::InvalidParameter(format!("outcome {outcome} above n_max")));
    }
    let mut e = vec![C0; joint.cutoff.dim()];
    e[outcome] = Complex64::new(1.0, 0.0);
    let cond = contract_mode(joint, mode, &e)?;
    let p = cond.norm_sqr() / joint.norm_sqr();
    if p < ZERO_PROBABILITY {
        return Err(Error::ZeroProbabilityBranch { probability: p });
    }
    Ok((p, cond.normalized()?))
}

/// Applies a single-mode operator given as a dense matrix.
pub fn apply_single_mode(state: &StateVector, mode: usize, op: &DMatrix<Complex64>) -> Result<StateVector> {
    state.check_mode(mode)?;
    let d = state.cutoff.dim();
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::ShapeMismatch("operator dimension differs from mode dimension".into()));
    }
    let stride = state.stride(mode);
    let block = stride * d;
    let mut out = vec![C0; state.dim()];
    let mut col = vec![C0; d];
    for o in 0..state.dim() / block {
        for inner in 0..stride {
            let base = o * block + inner;
            for n in 0..d {
                col[n] = state.amplitudes[base + n * stride];
            }
            for r in 0..d {
                let mut acc = C0;
                for n in 0..d {
                    acc += op[(r, n)] * col[n];
                }
                out[base + r * stride] = acc;
            }
        }
    }
    Ok(state.map_amplitudes(out))
}

/// Block `<m|D(delta)|n>` for `m, n <= n_max`, obtained by exponentiating the
/// generator `delta a^dag - delta* a` on a padded truncation.
pub fn displacement_matrix(delta: Complex64, n_max: usize) -> DMatrix<Complex64> {
    let a = delta.norm();
    let padded = n_max + 20 + (a * a + 6.0 * a).ceil() as usize;
    let d = padded + 1;
    // K = i (delta a^dag - delta* a) is Hermitian and D = exp(-i K).
    let mut k = DMatrix::<Complex64>::zeros(d, d);
    let i = Complex64::new(0.0, 1.0);
    for n in 0..padded {
        let s = ((n + 1) as f64).sqrt();
        k[(n + 1, n)] = i * delta * s;
        k[(n, n + 1)] = -i * delta.conj() * s;
    }
    let full = hermitian_propagator(k, 1.0);
    full.view((0, 0), (n_max + 1, n_max + 1)).into_owned()
}

/// Exact displacement `D(delta)` of one mode.
pub fn displacement(state: &StateVector, mode: usize, delta: Complex64) -> Result<StateVector> {
    if delta == C0 {
        state.check_mode(mode)?;
        return Ok(state.clone());
    }
    apply_displacement_matrix(state, mode, &displacement_matrix(delta, state.cutoff.n_max))
}

/// Applies a precomputed [`displacement_matrix`] with the same leakage
/// accounting as [`displacement`].
pub fn apply_displacement_matrix(state: &StateVector, mode: usize, op: &DMatrix<Complex64>) -> Result<StateVector> {
    let out = apply_single_mode(state, mode, op)?;
    let before = state.norm_sqr();
    let leakage = ((before - out.norm_sqr()) / before).max(0.0);
    if leakage > state.cutoff.leakage_bound {
        return Err(Error::CutoffTooSmall { leakage, bound: state.cutoff.leakage_bound });
    }
    let total = state.leakage + leakage;
    Ok(out.scaled(Complex64::new((before / out.norm_sqr()).sqrt(), 0.0)).with_leakage(total))
}
