//! End-to-end protocol: channel, target collision, two-bit phase measurement,
//! receiver correction and scoring.
//!
//! Modes: 0 is the target, 1 and 2 hold the channel; mode 2 is the receiver's.
//! With bit 0 meaning the `+` branch and `branch = 2 bit_target + bit_mode2`,
//! the receiver's conditional states are
//!
//! | branch | target, mode 1 | receiver state (up to phase) | correction |
//! |--------|----------------|------------------------------|------------|
//! | 0 | `+g, +a` | `A|b> - B|-b>` | displacement |
//! | 1 | `+g, -a` | `A|-b> + B|b>` | parity |
//! | 2 | `-g, +a` | `A|-b> - B|b>` | displacement, then parity |
//! | 3 | `-g, -a` | `A|b> + B|-b>` | none |

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::channel::{collide, ChannelFamilyIndex};
use crate::corrections::{
    p_even_analytic, parity_conditional, total_efficiency, virtual_displacement_delta, AuxSampler, AuxiliaryPrep,
};
use crate::dynamics::{CrossSpeciesParams, JosephsonParams, KerrParams};
use crate::error::{Error, Result};
use crate::fock::{
    apply_displacement_matrix, contract_mode, displacement_matrix, fidelity, prepare_cat_superposition,
    prepare_coherent, tensor, CoherentSpec, FockCutoff, StateVector, SuperpositionSpec,
};
use crate::homodyne::{HomodyneSettings, PhaseBackend, PhaseMeasurement, PhaseRecord};
use crate::rng::trial_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Ideal,
    Homodyne,
}

impl std::str::FromStr for BackendKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Self::Ideal),
            "homodyne" => Ok(Self::Homodyne),
            other => Err(Error::InvalidParameter(format!("unknown backend '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    Parity,
    Displacement,
}

/// Corrections per branch, in application order.
pub const BRANCH_CORRECTIONS: [&[Correction]; 4] =
    [&[Correction::Displacement], &[Correction::Parity], &[Correction::Displacement, Correction::Parity], &[]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub target: SuperpositionSpec,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub kerr: KerrParams,
    pub josephson: JosephsonParams,
    pub cross: CrossSpeciesParams,
    pub n_max: usize,
    pub backend: BackendKind,
    /// `|beta_ref|` of the homodyne reference well.
    pub homodyne_reference: f64,
    /// Self-collision rate during homodyne mixing.
    pub homodyne_kappa: f64,
    pub aux: AuxiliaryPrep,
    pub p_d: f64,
    /// `l` in the virtual displacement `delta = (l + 1/2) pi / Im(beta)`.
    pub displacement_l: i64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            target: SuperpositionSpec { a: Complex64::new(0.6, 0.0), b: Complex64::new(0.8, 0.0), gamma: Complex64::new(2.0, 0.0) },
            alpha: Complex64::new(2.0, 0.0),
            beta: Complex64::new(0.0, 2.0),
            kerr: KerrParams { e0_over_hbar: 1.0, kappa: 1.0 },
            josephson: JosephsonParams { omega: 1.0 },
            cross: CrossSpeciesParams { lambda: 0.5 },
            n_max: 24,
            backend: BackendKind::Ideal,
            homodyne_reference: 2.0,
            homodyne_kappa: 0.0,
            aux: AuxiliaryPrep::vacuum(),
            p_d: 1.0,
            displacement_l: 0,
            trials: 1000,
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p_d) {
            return Err(Error::RangeError(format!("p_d={} not in [0, 1]", self.p_d)));
        }
        if !(self.homodyne_kappa >= 0.0) {
            return Err(Error::InvalidParameter("homodyne_kappa must be >= 0".into()));
        }
        AuxiliaryPrep::new(self.aux.kind, self.aux.parameter)?;
        if ChannelFamilyIndex::from_params(self.kerr)?.get() != 0 {
            return Err(Error::FrequencyConditionViolated("the protocol needs E0/hbar = kappa".into()));
        }
        Ok(())
    }

    pub fn cutoff(&self) -> Result<FockCutoff> {
        FockCutoff::new(self.n_max)
    }

    pub fn phase_backend(&self) -> Result<PhaseBackend> {
        Ok(match self.backend {
            BackendKind::Ideal => PhaseBackend::Ideal,
            BackendKind::Homodyne => PhaseBackend::Homodyne(HomodyneSettings {
                reference_magnitude: self.homodyne_reference,
                jp: self.josephson,
                kp: KerrParams::new(0.0, self.homodyne_kappa)?,
            }),
        })
    }

    /// Rates of the receiver's parity stage: `E0/hbar = kappa + lambda`.
    pub fn parity_kerr(&self) -> KerrParams {
        KerrParams { e0_over_hbar: self.kerr.kappa + self.cross.lambda, kappa: self.kerr.kappa }
    }

    /// Normalized `A|beta> + B|-beta>`.
    pub fn reference_state(&self) -> Result<StateVector> {
        prepare_cat_superposition(SuperpositionSpec { a: self.target.a, b: self.target.b, gamma: self.beta }, self.cutoff()?)
    }
}

/// Target on mode 0, channel on modes 1 and 2, then the target/mode-1 collision.
pub fn build_protocol_state(config: &ProtocolConfig) -> Result<StateVector> {
    if ChannelFamilyIndex::from_params(config.kerr)?.get() != 0 {
        return Err(Error::FrequencyConditionViolated("the protocol needs E0/hbar = kappa".into()));
    }
    let cutoff = config.cutoff()?;
    let target = prepare_cat_superposition(config.target, cutoff)?;
    let channel = tensor(
        &prepare_coherent(CoherentSpec::new(config.alpha), cutoff)?,
        &prepare_coherent(CoherentSpec::new(config.beta), cutoff)?,
    )?;
    let channel = collide(&channel, (0, 1), config.kerr)?;
    collide(&tensor(&target, &channel)?, (0, 1), config.kerr)
}

/// Unnormalized receiver states of the four branches, indexed by branch.
pub fn branch_receiver_states(config: &ProtocolConfig) -> Result<[StateVector; 4]> {
    let cutoff = config.cutoff()?;
    let (a, b) = (config.target.a, config.target.b);
    let plus = prepare_coherent(CoherentSpec::new(config.beta), cutoff)?;
    let minus = prepare_coherent(CoherentSpec::new(-config.beta), cutoff)?;
    let comb = |x: Complex64, y: Complex64, first: &StateVector, second: &StateVector| -> Result<StateVector> {
        first.scaled(x).add(&second.scaled(y))
    };
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.0);
    Ok([
        comb(-i * half * a, i * half * b, &plus, &minus)?,
        comb(half * a, half * b, &minus, &plus)?,
        comb(i * half * a, -i * half * b, &minus, &plus)?,
        comb(half * a, half * b, &plus, &minus)?,
    ])
}

/// Four-branch protocol state assembled from coherent products, normalized.
pub fn four_branch_state(config: &ProtocolConfig) -> Result<StateVector> {
    let cutoff = config.cutoff()?;
    let (g, al) = (config.target.gamma, config.alpha);
    let n = crate::fock::cat_norm_constant(&config.target);
    let pair = |bits: usize| -> (Complex64, Complex64) {
        let sg = if bits & 2 == 0 { g } else { -g };
        let sa = if bits & 1 == 0 { al } else { -al };
        (sg, sa)
    };
    let receivers = branch_receiver_states(config)?;
    let mut total: Option<StateVector> = None;
    for (branch, recv) in receivers.iter().enumerate() {
        let (sg, sa) = pair(branch);
        let k = |x| prepare_coherent(CoherentSpec::new(x), cutoff);
        let term = tensor(&tensor(&k(sg)?, &k(sa)?)?, recv)?.scaled(Complex64::new(n, 0.0));
        total = Some(match total {
            None => term,
            Some(t) => t.add(&term)?,
        });
    }
    total.expect("four branches").normalized()
}

/// Result of the two phase measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementOutcome {
    pub bit_target: u8,
    pub bit_mode2: u8,
    pub branch: u8,
    pub raw: [PhaseRecord; 2],
    pub aux_m: Option<usize>,
}

impl MeasurementOutcome {
    pub fn new(bit_target: u8, bit_mode2: u8, raw: [PhaseRecord; 2]) -> Self {
        Self { bit_target, bit_mode2, branch: 2 * bit_target + bit_mode2, raw, aux_m: None }
    }
}

struct Stage2 {
    state: StateVector,
    probs: Vec<f64>,
}

/// Sampler for the two phase measurements on a fixed protocol state.
/// The second-stage distributions are computed on first use per first-stage outcome.
pub struct BellSampler {
    state: StateVector,
    target: PhaseMeasurement,
    mode2: PhaseMeasurement,
    first_probs: Vec<f64>,
    second: Vec<OnceLock<Option<Stage2>>>,
}

impl BellSampler {
    pub fn new(state: StateVector, config: &ProtocolConfig) -> Result<Self> {
        if state.modes() != 3 {
            return Err(Error::ShapeMismatch("protocol state must have three modes".into()));
        }
        let backend = config.phase_backend()?;
        let target = PhaseMeasurement::new(config.target.gamma, backend, state.cutoff())?;
        let mode2 = PhaseMeasurement::new(config.alpha, backend, state.cutoff())?;
        if let PhaseBackend::Homodyne(h) = backend {
            for (mode, _) in [(0, config.target.gamma), (1, config.alpha)] {
                let en = crate::homodyne::eps_n(&state, mode, h.reference_magnitude, h.jp, h.kp)?;
                if en > crate::homodyne::EPS_N_LIMIT {
                    return Err(Error::ValidityDomainExceeded { eps_n: en, limit: crate::homodyne::EPS_N_LIMIT });
                }
            }
        }
        let first_probs = target.outcome_probabilities(&state, 0)?;
        let second = (0..target.outcome_count()).map(|_| OnceLock::new()).collect();
        Ok(Self { state, target, mode2, first_probs, second })
    }

    fn stage2(&self, index: usize) -> Result<&Stage2> {
        self.second[index]
            .get_or_init(|| {
                let cond = contract_mode(&self.state, 0, self.target.coefficients(index)).ok()?.normalized().ok()?;
                let probs = self.mode2.outcome_probabilities(&cond, 0).ok()?;
                Some(Stage2 { state: cond, probs })
            })
            .as_ref()
            .ok_or(Error::ZeroProbabilityBranch { probability: self.first_probs[index] })
    }

    /// Draws both bits (four uniforms) and returns the receiver's normalized state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(MeasurementOutcome, StateVector)> {
        let (u0, c0): (f64, f64) = (rng.gen(), rng.gen());
        let (u1, c1): (f64, f64) = (rng.gen(), rng.gen());
        let first = self.target.choose(&self.first_probs, u0, c0)?;
        let stage = self.stage2(first.index)?;
        let second = self.mode2.choose(&stage.probs, u1, c1)?;
        let receiver = contract_mode(&stage.state, 0, self.mode2.coefficients(second.index))?.normalized()?;
        let raw = [self.target.record(first.index), self.mode2.record(second.index)];
        Ok((MeasurementOutcome::new(first.bit, second.bit, raw), receiver))
    }
}

/// Measures the target along `arg(gamma)` and mode 1 along `arg(alpha)`.
pub fn measure_bell<R: Rng + ?Sized>(
    state: &StateVector,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<(MeasurementOutcome, StateVector)> {
    BellSampler::new(state.clone(), config)?.sample(rng)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub outcome: MeasurementOutcome,
    pub corrected: bool,
    pub fidelity: f64,
    pub corrections_applied: Vec<Correction>,
    pub p_d_draw: f64,
}

/// Receiver-side operations prepared once per run.
pub struct Receiver {
    reference: StateVector,
    sampler: AuxSampler,
    cross: CrossSpeciesParams,
    parity_kp: KerrParams,
    displacement: Option<DMatrix<Complex64>>,
    p_d: f64,
}

impl Receiver {
    pub fn new(config: &ProtocolConfig) -> Result<Self> {
        let displacement = match virtual_displacement_delta(config.beta, config.displacement_l) {
            Ok(delta) => {
                if delta.abs() > 0.2 * config.beta.norm() {
                    log::warn!("|delta| = {:.4} exceeds 0.2 |beta| = {:.4}", delta.abs(), 0.2 * config.beta.norm());
                }
                Some(displacement_matrix(Complex64::new(delta, 0.0), config.n_max))
            }
            Err(Error::ZeroImaginaryPart) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            reference: config.reference_state()?,
            sampler: AuxSampler::new(config.aux),
            cross: config.cross,
            parity_kp: config.parity_kerr(),
            displacement,
            p_d: config.p_d,
        })
    }

    /// Applies the branch's corrections and scores the result against the
    /// reference. Draws one auxiliary-count uniform and one `p_d` uniform.
    pub fn correct<R: Rng + ?Sized>(
        &self,
        trial: usize,
        mode3: &StateVector,
        mut outcome: MeasurementOutcome,
        rng: &mut R,
    ) -> Result<TrialRecord> {
        if outcome.branch > 3 {
            return Err(Error::InvalidParameter(format!("branch {} not in 0..=3", outcome.branch)));
        }
        let m = self.sampler.sample(rng);
        let p_d_draw: f64 = rng.gen();
        let mut state = mode3.clone();
        let mut corrected = true;
        let mut applied = Vec::new();
        for step in BRANCH_CORRECTIONS[outcome.branch as usize] {
            match step {
                Correction::Displacement => match &self.displacement {
                    Some(op) if p_d_draw < self.p_d => {
                        state = apply_displacement_matrix(&state, 0, op)?;
                        applied.push(Correction::Displacement);
                    }
                    _ => corrected = false,
                },
                Correction::Parity => {
                    state = parity_conditional(&state, m, self.cross, self.parity_kp)?;
                    outcome.aux_m = Some(m);
                    corrected &= m.is_multiple_of(2);
                    applied.push(Correction::Parity);
                }
            }
        }
        let f = fidelity(&state, &self.reference)?.clamp(0.0, 1.0);
        Ok(TrialRecord { trial, outcome, corrected, fidelity: f, corrections_applied: applied, p_d_draw })
    }
}

/// Corrects one receiver state given only the two transmitted bits.
pub fn correct_and_score<R: Rng + ?Sized>(
    mode3: &StateVector,
    outcome: MeasurementOutcome,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<TrialRecord> {
    Receiver::new(config)?.correct(0, mode3, outcome, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolSummary {
    pub trials: usize,
    /// Mean fidelity over corrected trials; absent if none succeeded.
    pub mean_fidelity: Option<f64>,
    pub mean_fidelity_all: f64,
    pub success_rate: f64,
    pub success_stderr: f64,
    pub branch_histogram: [usize; 4],
    /// `total_efficiency(p_even, p_d)` for the configured auxiliary.
    pub expected_success_rate: f64,
}

pub fn summarize(records: &[TrialRecord], config: &ProtocolConfig) -> Result<ProtocolSummary> {
    let n = records.len().max(1) as f64;
    let mut hist = [0usize; 4];
    let (mut ok, mut f_ok, mut f_all) = (0usize, 0.0, 0.0);
    for r in records {
        hist[r.outcome.branch as usize] += 1;
        f_all += r.fidelity;
        if r.corrected {
            ok += 1;
            f_ok += r.fidelity;
        }
    }
    let rate = ok as f64 / n;
    Ok(ProtocolSummary {
        trials: records.len(),
        mean_fidelity: (ok > 0).then(|| f_ok / ok as f64),
        mean_fidelity_all: f_all / n,
        success_rate: rate,
        success_stderr: (rate * (1.0 - rate) / n).sqrt(),
        branch_histogram: hist,
        expected_success_rate: total_efficiency(p_even_analytic(config.aux), config.p_d)?.p_total,
    })
}

/// Runs `config.trials` independent trials; trial `k` uses stream `k` of `config.seed`.
pub fn run_protocol(config: &ProtocolConfig) -> Result<(Vec<TrialRecord>, ProtocolSummary)> {
    config.validate()?;
    let sampler = BellSampler::new(build_protocol_state(config)?, config)?;
    let receiver = Receiver::new(config)?;
    let records = (0..config.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(config.seed, k as u64);
            let (outcome, mode3) = sampler.sample(&mut rng)?;
            receiver.correct(k, &mode3, outcome, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&records, config)?;
    Ok((records, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrections::AuxiliaryKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> ProtocolConfig {
        ProtocolConfig {
            target: SuperpositionSpec { a: Complex64::new(0.6, 0.0), b: Complex64::new(0.8, 0.0), gamma: Complex64::new(2.0, 0.0) },
            trials: 200,
            ..Default::default()
        }
    }

    #[test]
    fn staged_state_matches_branch_construction() {
        let c = small();
        let staged = build_protocol_state(&c).unwrap();
        let direct = four_branch_state(&c).unwrap();
        assert!(fidelity(&staged, &direct).unwrap() >= 1.0 - 1e-7);
    }

    #[test]
    fn receiver_states_follow_branch_table() {
        let c = small();
        let states = branch_receiver_states(&c).unwrap();
        let sampler = BellSampler::new(build_protocol_state(&c).unwrap(), &c).unwrap();
        let mut seen = [false; 4];
        for k in 0..64 {
            let (out, mode3) = sampler.sample(&mut trial_rng(1, k)).unwrap();
            let want = states[out.branch as usize].clone().normalized().unwrap();
            assert!(fidelity(&mode3, &want).unwrap() >= 0.99);
            seen[out.branch as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn uncorrected_branch_is_reference() {
        let c = small();
        let states = branch_receiver_states(&c).unwrap();
        let reference = c.reference_state().unwrap();
        assert!(fidelity(&states[3], &reference).unwrap() / states[3].norm_sqr() >= 0.99);
    }

    #[test]
    fn parity_branch_with_vacuum_aux_is_fixed() {
        let c = small();
        let mode3 = branch_receiver_states(&c).unwrap()[1].clone().normalized().unwrap();
        let out = MeasurementOutcome::new(0, 1, [PhaseRecord::Projector { index: 0 }, PhaseRecord::Projector { index: 1 }]);
        let rec = correct_and_score(&mode3, out, &c, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(rec.corrected);
        assert_eq!(rec.outcome.aux_m, Some(0));
        assert!(rec.fidelity >= 0.98, "{}", rec.fidelity);
    }

    #[test]
    fn real_beta_fails_displacement_branches() {
        let c = ProtocolConfig { beta: Complex64::new(2.0, 0.0), ..small() };
        let mode3 = branch_receiver_states(&c).unwrap()[0].clone().normalized().unwrap();
        let out = MeasurementOutcome::new(0, 0, [PhaseRecord::Projector { index: 0 }; 2]);
        let rec = correct_and_score(&mode3, out, &c, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(!rec.corrected);
        assert!(rec.corrections_applied.is_empty());
    }

    #[test]
    fn run_is_deterministic_and_thread_independent() {
        let c = ProtocolConfig { aux: AuxiliaryPrep::new(AuxiliaryKind::Coherent, 1.0).unwrap(), p_d: 0.7, ..small() };
        let (a, sa) = run_protocol(&c).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let (b, sb) = pool.install(|| run_protocol(&c)).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert_eq!(sa.branch_histogram.iter().sum::<usize>(), c.trials);
    }

    #[test]
    fn ideal_settings_always_succeed() {
        let (_, s) = run_protocol(&small()).unwrap();
        assert_eq!(s.success_rate, 1.0);
        assert_eq!(s.expected_success_rate, 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(ProtocolConfig { trials: 0, ..small() }.validate().is_err());
        assert!(matches!(ProtocolConfig { p_d: 1.5, ..small() }.validate(), Err(Error::RangeError(_))));
        let bad = ProtocolConfig { kerr: KerrParams { e0_over_hbar: 2.0, kappa: 1.0 }, ..small() };
        assert!(matches!(bad.validate(), Err(Error::FrequencyConditionViolated(_))));
    }
}
