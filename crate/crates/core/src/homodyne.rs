//! Josephson-coupled homodyne detection of a condensate quadrature.
//!
//! The signal mode `c` is coupled to a reference mode `b` prepared in a
//! coherent state `|beta>`, `beta = |beta| e^{i theta}`. After `t = pi/(2 Omega)`
//! the half population difference `<n_c - n_b>/2` equals
//! `|beta| <X_{theta - pi/2}>` for `kappa = 0`, where
//! `X_phi = (c e^{-i phi} + c^dag e^{i phi}) / 2` throughout this crate.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::{evolve_josephson, josephson_sectors, JosephsonParams, KerrParams};
use crate::error::{Error, Result};
use crate::fock::{contract_mode, prepare_coherent, tensor, CoherentSpec, StateVector};

/// Upper limit on `eps * N` for the perturbative solution.
pub const EPS_N_LIMIT: f64 = 0.1;
/// Above this `eps * N` a warning is logged.
pub const EPS_N_WARNING: f64 = 0.02;

/// Pseudo-spin expectation values at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchwingerRecord {
    pub t: f64,
    pub sx: Complex64,
    pub sy: Complex64,
    pub sz: Complex64,
    /// `N = <n_c + n_b>`.
    pub normalization: f64,
    /// `<n_c - n_b> / 2`, i.e. `N * S_x`.
    pub raw_half_diff: f64,
}

/// Zeroth-order initial values for the first-order solution of `S_x(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeInit {
    pub x0: Complex64,
    pub y0: Complex64,
    pub z0: Complex64,
    /// `kappa / Omega`.
    pub epsilon: f64,
    /// Equal initial well populations: forces `x0 = 0`.
    pub equal_populations: bool,
}

impl PerturbativeInit {
    pub fn from_record(r: &SchwingerRecord, epsilon: f64) -> Self {
        Self { x0: r.sx, y0: r.sy, z0: r.sz, epsilon, equal_populations: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureEstimate {
    /// Estimate of `<X_{theta - pi/2}>` of the signal.
    pub value: f64,
    pub reference_phase: f64,
    pub reference_magnitude: f64,
    pub raw_half_diff: f64,
}

fn pseudo_spin(joint: &StateVector, t: f64) -> SchwingerRecord {
    let amps = joint.amplitudes();
    let d = joint.cutoff().dim();
    let mut diff = 0.0;
    let mut total = 0.0;
    // X = <c^dag b>
    let mut x = Complex64::new(0.0, 0.0);
    for nc in 0..d {
        for nb in 0..d {
            let a = amps[nc * d + nb];
            let p = a.norm_sqr();
            diff += (nc as f64 - nb as f64) * p;
            total += (nc + nb) as f64 * p;
            if nb >= 1 && nc + 1 < d {
                x += amps[(nc + 1) * d + nb - 1].conj() * a * (((nc + 1) * nb) as f64).sqrt();
            }
        }
    }
    let norm = joint.norm_sqr();
    let (diff, total, x) = (diff / norm, total / norm, x / norm);
    let two_n = 2.0 * total;
    // S_y = i/(2N) <c^dag b - c b^dag>, S_z = 1/(2N) <c^dag b + c b^dag>
    let i = Complex64::new(0.0, 1.0);
    SchwingerRecord {
        t,
        sx: Complex64::new(diff / two_n, 0.0),
        sy: i * (x - x.conj()) / two_n,
        sz: (x + x.conj()) / two_n,
        normalization: total,
        raw_half_diff: diff / 2.0,
    }
}

/// Full quantum evolution of `signal ⊗ |beta>` under the two-well Hamiltonian,
/// sampled on `t_grid`.
pub fn simulate_sx(
    signal: &StateVector,
    beta: CoherentSpec,
    jp: JosephsonParams,
    kp: KerrParams,
    t_grid: &[f64],
) -> Result<Vec<SchwingerRecord>> {
    if signal.modes() != 1 {
        return Err(Error::ShapeMismatch("homodyne signal must be a single mode".into()));
    }
    let joint = tensor(signal, &prepare_coherent(beta, signal.cutoff())?)?;
    t_grid
        .iter()
        .map(|&t| Ok(pseudo_spin(&evolve_josephson(&joint, (0, 1), jp, kp, t)?, t)))
        .collect()
}

/// First-order semiclassical `S_x(t)`:
/// `[S_x(0) + eps t (2N z0 y0 - i x0)] cos(Omega t) - [S_y(0) - eps t (2N z0 x0 + i y0)] sin(Omega t)`.
///
/// The expression is evaluated as written; its imaginary part is kept.
pub fn perturbative_sx(init: PerturbativeInit, n: f64, omega: f64, t: f64) -> Result<Complex64> {
    let eps_n = init.epsilon * n;
    if eps_n > EPS_N_LIMIT {
        return Err(Error::ValidityDomainExceeded { eps_n, limit: EPS_N_LIMIT });
    }
    if eps_n > EPS_N_WARNING {
        log::warn!("eps*N = {eps_n:.4} is above {EPS_N_WARNING}; first-order solution is marginal");
    }
    Ok(first_order(init, n, omega, t))
}

/// [`perturbative_sx`] on a time grid, warning at most once.
pub fn perturbative_sx_series(init: PerturbativeInit, n: f64, omega: f64, ts: &[f64]) -> Result<Vec<Complex64>> {
    let eps_n = init.epsilon * n;
    if eps_n > EPS_N_LIMIT {
        return Err(Error::ValidityDomainExceeded { eps_n, limit: EPS_N_LIMIT });
    }
    if eps_n > EPS_N_WARNING {
        log::warn!("eps*N = {eps_n:.4} is above {EPS_N_WARNING}; first-order solution is marginal");
    }
    Ok(ts.iter().map(|&t| first_order(init, n, omega, t)).collect())
}

fn first_order(init: PerturbativeInit, n: f64, omega: f64, t: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let x0 = if init.equal_populations { Complex64::new(0.0, 0.0) } else { init.x0 };
    let (y0, z0) = (init.y0, init.z0);
    let et = init.epsilon * t;
    let (s, c) = (omega * t).sin_cos();
    (x0 + et * (2.0 * n * z0 * y0 - i * x0)) * c - (y0 - et * (2.0 * n * z0 * x0 + i * y0)) * s
}

/// `eps * N` for a signal coupled to a reference of magnitude `|beta|`.
pub fn eps_n(signal: &StateVector, mode: usize, beta_magnitude: f64, jp: JosephsonParams, kp: KerrParams) -> Result<f64> {
    if kp.kappa == 0.0 {
        return Ok(0.0);
    }
    let n = signal.mean_number(mode)? + beta_magnitude * beta_magnitude;
    Ok(kp.kappa / jp.omega * n)
}

/// Half population difference at `Omega t = pi/2`, divided by `|beta|`.
pub fn estimate_quadrature(
    signal: &StateVector,
    beta: CoherentSpec,
    jp: JosephsonParams,
    kp: KerrParams,
) -> Result<QuadratureEstimate> {
    let magnitude = beta.amplitude.norm();
    if magnitude == 0.0 || jp.omega <= 0.0 {
        return Err(Error::InvalidParameter("homodyne needs |beta| > 0 and Omega > 0".into()));
    }
    let en = eps_n(signal, 0, magnitude, jp, kp)?;
    if en > EPS_N_LIMIT {
        return Err(Error::ValidityDomainExceeded { eps_n: en, limit: EPS_N_LIMIT });
    }
    let rec = simulate_sx(signal, beta, jp, kp, &[PI / (2.0 * jp.omega)])?[0];
    Ok(QuadratureEstimate {
        value: rec.raw_half_diff / magnitude,
        reference_phase: beta.amplitude.arg(),
        reference_magnitude: magnitude,
        raw_half_diff: rec.raw_half_diff,
    })
}

/// Josephson homodyne settings for [`PhaseBackend::Homodyne`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSettings {
    pub reference_magnitude: f64,
    pub jp: JosephsonParams,
    pub kp: KerrParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseBackend {
    /// Minimum-error projective measurement on the span of `|a>, |-a>`.
    Ideal,
    /// Number counting in both wells after Josephson mixing with a reference.
    Homodyne(HomodyneSettings),
}

/// Raw record of a phase measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseRecord {
    Projector { index: usize },
    Counts { signal: usize, reference: usize, quadrature: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Zero,
    Tie,
    One,
}

#[derive(Debug, Clone)]
struct Outcome {
    coeffs: Vec<Complex64>,
    class: Class,
    record: PhaseRecord,
}

/// A two-valued phase measurement compiled for one cutoff and one coherent pair.
#[derive(Debug, Clone)]
pub struct PhaseMeasurement {
    outcomes: Vec<Outcome>,
    /// Projector vectors for the ideal backend.
    projectors: Option<[StateVector; 2]>,
}

/// Outcome selected by [`PhaseMeasurement::choose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Choice {
    pub index: usize,
    pub bit: u8,
    /// Probability of the chosen outcome class.
    pub probability: f64,
}

/// Result of [`phase_bit`].
#[derive(Debug, Clone)]
pub struct PhaseBit {
    pub bit: u8,
    pub record: PhaseRecord,
    /// Probability of the sampled outcome class given the pre-measurement state.
    pub probability: f64,
    /// Normalized state of the unmeasured modes (zero modes for a single-mode signal).
    pub conditional: StateVector,
    /// Post-measurement state of the measured mode (ideal backend only).
    pub measured: Option<StateVector>,
}

fn check_pair(pair: Complex64) -> Result<()> {
    let overlap = (-2.0 * pair.norm_sqr()).exp();
    if overlap > 0.5 {
        return Err(Error::AmbiguousSupport { overlap });
    }
    Ok(())
}

impl PhaseMeasurement {
    /// Builds the measurement discriminating `|pair>` (bit 0) from `|-pair>` (bit 1).
    pub fn new(pair: Complex64, backend: PhaseBackend, cutoff: crate::fock::FockCutoff) -> Result<Self> {
        check_pair(pair)?;
        match backend {
            PhaseBackend::Ideal => Self::ideal(pair, cutoff),
            PhaseBackend::Homodyne(h) => Self::homodyne(pair, h, cutoff),
        }
    }

    fn ideal(pair: Complex64, cutoff: crate::fock::FockCutoff) -> Result<Self> {
        let plus = prepare_coherent(CoherentSpec::new(pair), cutoff)?;
        let minus = prepare_coherent(CoherentSpec::new(-pair), cutoff)?;
        let even = plus.add(&minus)?.normalized()?;
        let odd = plus.add(&minus.scaled(Complex64::new(-1.0, 0.0)))?.normalized()?;
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let e0 = even.add(&odd)?.scaled(h);
        let e1 = even.add(&odd.scaled(Complex64::new(-1.0, 0.0)))?.scaled(h);
        let outcomes = [&e0, &e1]
            .iter()
            .enumerate()
            .map(|(k, e)| Outcome {
                coeffs: e.amplitudes().iter().map(|c| c.conj()).collect(),
                class: if k == 0 { Class::Zero } else { Class::One },
                record: PhaseRecord::Projector { index: k },
            })
            .collect();
        Ok(Self { outcomes, projectors: Some([e0, e1]) })
    }

    fn homodyne(pair: Complex64, h: HomodyneSettings, cutoff: crate::fock::FockCutoff) -> Result<Self> {
        if h.reference_magnitude <= 0.0 || h.jp.omega <= 0.0 {
            return Err(Error::InvalidParameter("homodyne needs |beta| > 0 and Omega > 0".into()));
        }
        // theta - pi/2 = arg(pair): the counted quadrature lies along the pair axis.
        let theta = pair.arg() + PI / 2.0;
        let reference = prepare_coherent(CoherentSpec::new(Complex64::from_polar(h.reference_magnitude, theta)), cutoff)?;
        let b = reference.amplitudes();
        let d = cutoff.dim();
        let t = PI / (2.0 * h.jp.omega);
        let mut outcomes = Vec::with_capacity(d * d);
        for sec in josephson_sectors(cutoff.n_max(), h.jp, h.kp, t) {
            let lo = sec.first[0];
            for (row, &p) in sec.first.iter().enumerate() {
                let q = sec.total - p;
                let mut coeffs = vec![Complex64::new(0.0, 0.0); d];
                for (col, &n) in sec.first.iter().enumerate() {
                    coeffs[n] = sec.u[(row, col)] * b[sec.total - n];
                }
                debug_assert_eq!(sec.first[row] - lo, row);
                let class = match p.cmp(&q) {
                    std::cmp::Ordering::Greater => Class::Zero,
                    std::cmp::Ordering::Equal => Class::Tie,
                    std::cmp::Ordering::Less => Class::One,
                };
                let quadrature = (p as f64 - q as f64) / 2.0 / h.reference_magnitude;
                outcomes.push(Outcome { coeffs, class, record: PhaseRecord::Counts { signal: p, reference: q, quadrature } });
            }
        }
        // Sampling order: bit-0 outcomes, ties, bit-1 outcomes.
        outcomes.sort_by_key(|o| match o.class {
            Class::Zero => 0,
            Class::Tie => 1,
            Class::One => 2,
        });
        Ok(Self { outcomes, projectors: None })
    }

    /// Probability of each outcome for `mode` of `state`.
    pub fn outcome_probabilities(&self, state: &StateVector, mode: usize) -> Result<Vec<f64>> {
        let norm = state.norm_sqr();
        self.outcomes
            .iter()
            .map(|o| Ok(contract_mode(state, mode, &o.coeffs)?.norm_sqr() / norm))
            .collect()
    }

    /// `(P(bit 0), P(bit 1))`, ties split evenly.
    pub fn bit_probabilities(&self, state: &StateVector, mode: usize) -> Result<(f64, f64)> {
        let probs = self.outcome_probabilities(state, mode)?;
        let (mut p0, mut p1) = (0.0, 0.0);
        for (o, p) in self.outcomes.iter().zip(probs) {
            match o.class {
                Class::Zero => p0 += p,
                Class::One => p1 += p,
                Class::Tie => {
                    p0 += p / 2.0;
                    p1 += p / 2.0;
                }
            }
        }
        Ok((p0, p1))
    }

    /// Samples the measurement. Consumes exactly two uniforms from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, state: &StateVector, mode: usize, rng: &mut R) -> Result<PhaseBit> {
        let u: f64 = rng.gen();
        let coin: f64 = rng.gen();
        let probs = self.outcome_probabilities(state, mode)?;
        self.select(state, mode, &probs, u, coin)
    }

    /// Picks the outcome at cumulative position `u` of the (renormalized)
    /// outcome distribution `probs`.
    pub(crate) fn select(&self, state: &StateVector, mode: usize, probs: &[f64], u: f64, coin: f64) -> Result<PhaseBit> {
        let choice = self.choose(probs, u, coin)?;
        let cond = contract_mode(state, mode, self.coefficients(choice.index))?;
        let conditional = cond.normalized()?;
        let measured = self.projectors.as_ref().map(|p| p[choice.index].clone());
        Ok(PhaseBit {
            bit: choice.bit,
            record: self.outcomes[choice.index].record,
            probability: choice.probability,
            conditional,
            measured,
        })
    }

    /// Kraus coefficients of outcome `index` on the measured mode.
    pub fn coefficients(&self, index: usize) -> &[Complex64] {
        &self.outcomes[index].coeffs
    }

    pub fn record(&self, index: usize) -> PhaseRecord {
        self.outcomes[index].record
    }

    pub fn outcome_count(&self) -> usize {
        self.outcomes.len()
    }

    /// Outcome choice from precomputed probabilities; no state is touched.
    pub fn choose(&self, probs: &[f64], u: f64, coin: f64) -> Result<Choice> {
        let total: f64 = probs.iter().sum();
        let off = 1.0 - total;
        if off > 1e-6 {
            return Err(Error::OffPairSupport { weight: off });
        }
        let target = u * total;
        let mut acc = 0.0;
        let mut chosen = probs.len() - 1;
        for (k, p) in probs.iter().enumerate() {
            acc += p;
            if target < acc && *p > 0.0 {
                chosen = k;
                break;
            }
        }
        while probs[chosen] <= 0.0 && chosen > 0 {
            chosen -= 1;
        }
        let o = &self.outcomes[chosen];
        let bit = match o.class {
            Class::Zero => 0,
            Class::One => 1,
            Class::Tie => u8::from(coin >= 0.5),
        };
        let probability: f64 = self
            .outcomes
            .iter()
            .zip(probs)
            .filter(|(x, _)| x.class == o.class)
            .map(|(_, p)| p)
            .sum::<f64>()
            / total;
        Ok(Choice { index: chosen, bit, probability })
    }
}

/// Decides whether `mode` of `state` holds `|pair>` (bit 0) or `|-pair>` (bit 1).
pub fn phase_bit<R: Rng + ?Sized>(
    state: &StateVector,
    mode: usize,
    pair: Complex64,
    backend: PhaseBackend,
    rng: &mut R,
) -> Result<PhaseBit> {
    state.check_mode(mode)?;
    if let PhaseBackend::Homodyne(h) = backend {
        let en = eps_n(state, mode, h.reference_magnitude, h.jp, h.kp)?;
        if en > EPS_N_LIMIT {
            return Err(Error::ValidityDomainExceeded { eps_n: en, limit: EPS_N_LIMIT });
        }
    }
    PhaseMeasurement::new(pair, backend, state.cutoff())?.sample(state, mode, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockCutoff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    fn coh(a: Complex64, n: usize) -> StateVector {
        prepare_coherent(CoherentSpec::new(a), cut(n)).unwrap()
    }

    fn linear() -> (JosephsonParams, KerrParams) {
        (JosephsonParams::new(1.0).unwrap(), KerrParams::new(0.0, 0.0).unwrap())
    }

    #[test]
    fn symmetric_populations_give_zero_sx() {
        let (jp, kp) = linear();
        let b = Complex64::new(0.0, 1.2);
        let recs = simulate_sx(&coh(b, 20), CoherentSpec::new(b), jp, kp, &[0.0, 0.4, 1.1, 2.5]).unwrap();
        for r in recs {
            assert!(r.sx.norm() < 1e-10, "{:?}", r);
        }
    }

    #[test]
    fn raw_half_difference_is_scaled_quadrature() {
        let (jp, kp) = linear();
        let recs = simulate_sx(&coh(Complex64::new(1.0, 0.0), 24), CoherentSpec::new(Complex64::new(0.0, 2.0)), jp, kp, &[PI / 2.0])
            .unwrap();
        assert!((recs[0].raw_half_diff - 2.0).abs() < 1e-6);
    }

    #[test]
    fn initial_record_is_definition() {
        let (jp, kp) = linear();
        let s = coh(Complex64::new(1.3, 0.0), 20);
        let r = simulate_sx(&s, CoherentSpec::real(0.5), jp, kp, &[0.0]).unwrap()[0];
        let (nc, nb) = (s.mean_number(0).unwrap(), 0.25);
        assert!((r.sx.re - (nc - nb) / (2.0 * (nc + nb))).abs() < 1e-10);
        assert!(r.sx.im.abs() < 1e-15);
    }

    #[test]
    fn perturbative_limits() {
        let init = PerturbativeInit {
            x0: Complex64::new(0.1, 0.0),
            y0: Complex64::new(-0.3, 0.0),
            z0: Complex64::new(0.2, 0.0),
            epsilon: 0.0,
            equal_populations: false,
        };
        let t = 0.7;
        let v = perturbative_sx(init, 4.0, 1.3, t).unwrap();
        assert!((v - Complex64::new(0.1 * (1.3 * t).cos() + 0.3 * (1.3 * t).sin(), 0.0)).norm() < 1e-15);
        let eq = PerturbativeInit { equal_populations: true, ..init };
        assert!((perturbative_sx(eq, 4.0, 1.0, PI / 2.0).unwrap() - Complex64::new(0.3, 0.0)).norm() < 1e-15);
        let big = PerturbativeInit { epsilon: 0.3, ..init };
        assert!(matches!(perturbative_sx(big, 4.0, 1.0, 0.1), Err(Error::ValidityDomainExceeded { .. })));
    }

    #[test]
    fn quadrature_sign_distinguishes_branches() {
        let (jp, kp) = linear();
        let beta = CoherentSpec::new(Complex64::new(0.0, 2.0));
        let plus = estimate_quadrature(&coh(Complex64::new(1.0, 0.0), 24), beta, jp, kp).unwrap();
        let minus = estimate_quadrature(&coh(Complex64::new(-1.0, 0.0), 24), beta, jp, kp).unwrap();
        let vac = estimate_quadrature(&StateVector::vacuum(1, cut(24)), beta, jp, kp).unwrap();
        assert!((plus.value - 1.0).abs() < 1e-6);
        assert!((minus.value + 1.0).abs() < 1e-6);
        assert!(vac.value.abs() < 1e-6);
    }

    #[test]
    fn ambiguous_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = StateVector::vacuum(1, cut(5));
        assert!(matches!(
            phase_bit(&s, 0, Complex64::new(0.0, 0.0), PhaseBackend::Ideal, &mut rng),
            Err(Error::AmbiguousSupport { .. })
        ));
    }

    #[test]
    fn ideal_backend_meets_helstrom() {
        let pair = Complex64::new(2.0, 0.0);
        let m = PhaseMeasurement::new(pair, PhaseBackend::Ideal, cut(26)).unwrap();
        let (p0, _) = m.bit_probabilities(&coh(pair, 26), 0).unwrap();
        let s = (-8f64).exp();
        let helstrom = 1.0 - 0.5 * (1.0 - (1.0 - s * s).sqrt());
        assert!((p0 - helstrom).abs() < 1e-10, "{p0} vs {helstrom}");
    }

    #[test]
    fn homodyne_backend_matches_poisson_oracle() {
        // kappa = 0: output wells are coherent with amplitudes (c - i b)/sqrt2 and (b - i c)/sqrt2.
        let pair = Complex64::new(2.0, 0.0);
        let settings = HomodyneSettings {
            reference_magnitude: 2.0,
            jp: JosephsonParams::new(1.0).unwrap(),
            kp: KerrParams::new(0.0, 0.0).unwrap(),
        };
        let m = PhaseMeasurement::new(pair, PhaseBackend::Homodyne(settings), cut(30)).unwrap();
        let signal = -pair;
        let b = Complex64::new(0.0, 2.0);
        let i = Complex64::new(0.0, 1.0);
        let mc = ((signal - i * b) / 2f64.sqrt()).norm_sqr();
        let mb = ((b - i * signal) / 2f64.sqrt()).norm_sqr();
        let pois = |mean: f64, n: usize| (-mean).exp() * mean.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut p1 = 0.0;
        for p in 0..60 {
            for q in 0..60 {
                let w = pois(mc, p) * pois(mb, q);
                if p < q {
                    p1 += w;
                } else if p == q {
                    p1 += w / 2.0;
                }
            }
        }
        let (_, got) = m.bit_probabilities(&coh(signal, 30), 0).unwrap();
        assert!((got - p1).abs() < 1e-6, "{got} vs {p1}");
        assert!(got >= 0.997);
    }

    #[test]
    fn phase_bit_consumes_fixed_randomness() {
        let pair = Complex64::new(2.0, 0.0);
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        phase_bit(&coh(pair, 26), 0, pair, PhaseBackend::Ideal, &mut a).unwrap();
        let _: f64 = b.gen();
        let _: f64 = b.gen();
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
    }
}
