//! Time evolution: diagonal Kerr and cross-Kerr propagators, block-diagonal
//! Josephson evolution, and a dense matrix-exponential reference.
//!
//! All rates are angular frequencies (E/hbar), so `exp(-i H t)` is evaluated
//! with hbar = 1.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::StateVector;
use crate::linalg::real_symmetric_propagator;

/// Matrix-size cap for the dense reference propagator.
pub const DEFAULT_ORACLE_CAP: usize = 2048;

/// Single-well rates: mode energy `E0/hbar` and self-collision `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrParams {
    pub e0_over_hbar: f64,
    pub kappa: f64,
}

impl KerrParams {
    pub fn new(e0_over_hbar: f64, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !e0_over_hbar.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa={kappa} must be finite and non-negative")));
        }
        Ok(Self { e0_over_hbar, kappa })
    }
}

/// Tunnelling frequency `Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JosephsonParams {
    pub omega: f64,
}

impl JosephsonParams {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega={omega} must be finite and non-negative")));
        }
        Ok(Self { omega })
    }
}

/// Inter-species collision rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSpeciesParams {
    pub lambda: f64,
}

impl CrossSpeciesParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda={lambda} must be positive")));
        }
        Ok(Self { lambda })
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("evolution time {t} must be finite and >= 0")));
    }
    Ok(())
}

fn check_pair(state: &StateVector, (i, j): (usize, usize)) -> Result<()> {
    state.check_mode(i)?;
    state.check_mode(j)?;
    if i == j {
        return Err(Error::ShapeMismatch(format!("mode pair ({i}, {j}) must be distinct")));
    }
    Ok(())
}

/// `exp(-i [(E0/hbar) n + kappa n(n-1)] t)` on every Fock level of `mode`.
pub fn evolve_self_kerr(state: &StateVector, mode: usize, params: KerrParams, t: f64) -> Result<StateVector> {
    state.check_mode(mode)?;
    check_time(t)?;
    let phases: Vec<Complex64> = (0..state.cutoff().dim())
        .map(|n| {
            let n = n as f64;
            Complex64::from_polar(1.0, -(params.e0_over_hbar * n + params.kappa * n * (n - 1.0)) * t)
        })
        .collect();
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(idx, c)| c * phases[state.occupation_at(idx, mode)])
        .collect();
    Ok(state.map_amplitudes(amps))
}

/// `exp(-i 2 g n_i n_j t)`, the collision term `2 hbar g n_i n_j`.
pub fn evolve_cross_kerr(state: &StateVector, modes: (usize, usize), rate: f64, t: f64) -> Result<StateVector> {
    check_pair(state, modes)?;
    check_time(t)?;
    let d = state.cutoff().dim();
    let mut phases = vec![Complex64::new(1.0, 0.0); d * d];
    for m in 0..d {
        for n in 0..d {
            phases[m * d + n] = Complex64::from_polar(1.0, -2.0 * rate * (m * n) as f64 * t);
        }
    }
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(idx, c)| c * phases[state.occupation_at(idx, modes.0) * d + state.occupation_at(idx, modes.1)])
        .collect();
    Ok(state.map_amplitudes(amps))
}

/// Flat indices whose occupations of modes `i` and `j` are both zero.
pub(crate) fn pair_bases(state: &StateVector, (i, j): (usize, usize)) -> Vec<usize> {
    (0..state.dim())
        .filter(|&idx| state.occupation_at(idx, i) == 0 && state.occupation_at(idx, j) == 0)
        .collect()
}

/// Two-mode propagator restricted to one total-number sector.
#[derive(Debug, Clone)]
pub(crate) struct SectorPropagator {
    /// Occupation of the first mode for each sector basis vector.
    pub first: Vec<usize>,
    pub total: usize,
    pub u: DMatrix<Complex64>,
}

/// Per-sector propagators of
/// `E0 (n_c + n_b) + (Omega/2)(c^dag b + b^dag c) + kappa [n_c(n_c-1) + n_b(n_b-1)]`.
pub(crate) fn josephson_sectors(n_max: usize, jp: JosephsonParams, kp: KerrParams, t: f64) -> Vec<SectorPropagator> {
    (0..=2 * n_max)
        .into_par_iter()
        .map(|total| {
            let lo = total.saturating_sub(n_max);
            let hi = total.min(n_max);
            let first: Vec<usize> = (lo..=hi).collect();
            let k = first.len();
            let mut h = DMatrix::<f64>::zeros(k, k);
            for (a, &nc) in first.iter().enumerate() {
                let nb = total - nc;
                let (x, y) = (nc as f64, nb as f64);
                h[(a, a)] = kp.e0_over_hbar * total as f64 + kp.kappa * (x * (x - 1.0) + y * (y - 1.0));
                if a + 1 < k {
                    // <nc+1, nb-1| c^dag b |nc, nb>
                    let v = 0.5 * jp.omega * ((x + 1.0) * y).sqrt();
                    h[(a + 1, a)] = v;
                    h[(a, a + 1)] = v;
                }
            }
            SectorPropagator { first, total, u: real_symmetric_propagator(h, t) }
        })
        .collect()
}

/// Josephson-coupled evolution of modes `(i, j)`, one total-number sector at a time.
pub fn evolve_josephson(
    state: &StateVector,
    modes: (usize, usize),
    jp: JosephsonParams,
    kp: KerrParams,
    t: f64,
) -> Result<StateVector> {
    check_pair(state, modes)?;
    check_time(t)?;
    let n_max = state.cutoff().n_max();
    let sectors = josephson_sectors(n_max, jp, kp, t);
    let (si, sj) = (state.stride(modes.0), state.stride(modes.1));
    let src = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
    for base in pair_bases(state, modes) {
        for sec in &sectors {
            let idx: Vec<usize> = sec.first.iter().map(|&nc| base + nc * si + (sec.total - nc) * sj).collect();
            for (r, &ir) in idx.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, &ic) in idx.iter().enumerate() {
                    acc += sec.u[(r, c)] * src[ic];
                }
                out[ir] = acc;
            }
        }
    }
    Ok(state.map_amplitudes(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    /// `n_i`
    Number,
    /// `n_i (n_i - 1)`
    SelfPair,
    /// `n_i n_j`
    Cross,
    /// `c_i^dag c_j + c_j^dag c_i`
    Hop,
}

/// One real-coefficient term of a Hamiltonian (in units of hbar).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianTerm {
    #[serde(rename = "type")]
    pub kind: TermKind,
    pub modes: Vec<usize>,
    pub coefficient: f64,
}

impl HamiltonianTerm {
    pub fn new(kind: TermKind, modes: Vec<usize>, coefficient: f64) -> Self {
        Self { kind, modes, coefficient }
    }

    fn validate(&self, n_modes: usize) -> Result<()> {
        let want = match self.kind {
            TermKind::Number | TermKind::SelfPair => 1,
            TermKind::Cross | TermKind::Hop => 2,
        };
        if self.modes.len() != want || self.modes.iter().any(|&m| m >= n_modes) {
            return Err(Error::ShapeMismatch(format!("term {:?} has invalid modes {:?}", self.kind, self.modes)));
        }
        if want == 2 && self.modes[0] == self.modes[1] {
            return Err(Error::ShapeMismatch(format!("term {:?} needs two distinct modes", self.kind)));
        }
        Ok(())
    }
}

/// Terms reproducing [`evolve_self_kerr`].
pub fn self_kerr_terms(mode: usize, kp: KerrParams) -> Vec<HamiltonianTerm> {
    vec![
        HamiltonianTerm::new(TermKind::Number, vec![mode], kp.e0_over_hbar),
        HamiltonianTerm::new(TermKind::SelfPair, vec![mode], kp.kappa),
    ]
}

/// Terms reproducing [`evolve_cross_kerr`] at `rate`.
pub fn cross_kerr_terms(modes: (usize, usize), rate: f64) -> Vec<HamiltonianTerm> {
    vec![HamiltonianTerm::new(TermKind::Cross, vec![modes.0, modes.1], 2.0 * rate)]
}

/// Terms reproducing [`evolve_josephson`].
pub fn josephson_terms(modes: (usize, usize), jp: JosephsonParams, kp: KerrParams) -> Vec<HamiltonianTerm> {
    let mut terms = self_kerr_terms(modes.0, kp);
    terms.extend(self_kerr_terms(modes.1, kp));
    terms.push(HamiltonianTerm::new(TermKind::Hop, vec![modes.0, modes.1], 0.5 * jp.omega));
    terms
}

/// Dense Hamiltonian matrix on the full truncated basis.
pub fn hamiltonian_matrix(state: &StateVector, terms: &[HamiltonianTerm], cap: usize) -> Result<DMatrix<f64>> {
    let dim = state.dim();
    if dim > cap {
        return Err(Error::DimensionTooLarge { dim, cap });
    }
    for term in terms {
        term.validate(state.modes())?;
    }
    let n_max = state.cutoff().n_max();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for idx in 0..dim {
        for term in terms {
            let occ = |m: usize| state.occupation_at(idx, m) as f64;
            match term.kind {
                TermKind::Number => h[(idx, idx)] += term.coefficient * occ(term.modes[0]),
                TermKind::SelfPair => {
                    let n = occ(term.modes[0]);
                    h[(idx, idx)] += term.coefficient * n * (n - 1.0);
                }
                TermKind::Cross => h[(idx, idx)] += term.coefficient * occ(term.modes[0]) * occ(term.modes[1]),
                TermKind::Hop => {
                    let (i, j) = (term.modes[0], term.modes[1]);
                    let (ni, nj) = (state.occupation_at(idx, i), state.occupation_at(idx, j));
                    // c_i^dag c_j |.., ni, .., nj, ..>
                    if nj >= 1 && ni < n_max {
                        let target = idx + state.stride(i) - state.stride(j);
                        let v = term.coefficient * (((ni + 1) * nj) as f64).sqrt();
                        h[(target, idx)] += v;
                        h[(idx, target)] += v;
                    }
                }
            }
        }
    }
    Ok(h)
}

/// `exp(-i H t) psi` with a dense scaling-and-squaring matrix exponential.
pub fn brute_force_oracle(state: &StateVector, terms: &[HamiltonianTerm], t: f64, cap: usize) -> Result<StateVector> {
    check_time(t)?;
    let h = hamiltonian_matrix(state, terms, cap)?;
    let u = h.map(|x| Complex64::new(0.0, -x * t)).exp();
    let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
    let out = u * psi;
    Ok(state.map_amplitudes(out.iter().copied().collect()))
}

/// Largest componentwise amplitude difference.
pub fn max_amplitude_difference(a: &StateVector, b: &StateVector) -> Result<f64> {
    crate::fock::check_same_shape(a, b)?;
    Ok(a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{prepare_coherent, tensor, CoherentSpec, FockCutoff};
    use std::f64::consts::PI;

    fn coh(re: f64, im: f64, n: usize) -> StateVector {
        let cutoff = FockCutoff::new(n).unwrap().with_leakage_bound(1e-3);
        prepare_coherent(CoherentSpec::new(Complex64::new(re, im)), cutoff).unwrap()
    }

    #[test]
    fn self_kerr_identity_cases() {
        let s = coh(0.8, 0.3, 12);
        let kp = KerrParams::new(1.0, 1.0).unwrap();
        assert_eq!(evolve_self_kerr(&s, 0, kp, 0.0).unwrap(), s);
        let full = evolve_self_kerr(&s, 0, kp, 2.0 * PI).unwrap();
        assert!(max_amplitude_difference(&full, &s).unwrap() < 1e-12);
    }

    #[test]
    fn cross_kerr_parity_phase() {
        let s = tensor(&coh(0.9, 0.0, 10), &coh(0.0, 0.7, 10)).unwrap();
        let out = evolve_cross_kerr(&s, (0, 1), 1.0, PI / 2.0).unwrap();
        for (idx, (a, b)) in s.amplitudes().iter().zip(out.amplitudes()).enumerate() {
            let occ = s.occupations(idx);
            let sign = if (occ[0] * occ[1]).is_multiple_of(2) { 1.0 } else { -1.0 };
            assert!((a * sign - b).norm() < 1e-12);
        }
    }

    #[test]
    fn cross_kerr_vacuum_untouched() {
        let s = tensor(&StateVector::vacuum(1, FockCutoff::new(8).unwrap().with_leakage_bound(1e-3)), &coh(1.0, 0.0, 8)).unwrap();
        let out = evolve_cross_kerr(&s, (0, 1), 0.37, 1.3).unwrap();
        assert!(max_amplitude_difference(&out, &s).unwrap() < 1e-15);
        assert!(matches!(evolve_cross_kerr(&s, (1, 1), 1.0, 1.0), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn josephson_identity_and_kerr_limit() {
        let s = tensor(&coh(0.6, 0.2, 10), &coh(-0.4, 0.5, 10)).unwrap();
        let kp = KerrParams::new(0.4, 0.13).unwrap();
        let jp = JosephsonParams::new(1.7).unwrap();
        assert!(max_amplitude_difference(&evolve_josephson(&s, (0, 1), jp, kp, 0.0).unwrap(), &s).unwrap() < 1e-14);
        let zero = JosephsonParams::new(0.0).unwrap();
        let a = evolve_josephson(&s, (0, 1), zero, kp, 2.3).unwrap();
        let b = evolve_self_kerr(&evolve_self_kerr(&s, 0, kp, 2.3).unwrap(), 1, kp, 2.3).unwrap();
        assert!(max_amplitude_difference(&a, &b).unwrap() < 1e-10);
    }

    #[test]
    fn josephson_swap_at_pi() {
        let s = tensor(&coh(1.0, 0.0, 16), &StateVector::vacuum(1, FockCutoff::new(16).unwrap().with_leakage_bound(1e-3))).unwrap();
        let out = evolve_josephson(&s, (0, 1), JosephsonParams::new(2.0).unwrap(), KerrParams::new(0.0, 0.0).unwrap(), PI / 2.0)
            .unwrap();
        assert!((out.mean_number(0).unwrap() - 0.0).abs() < 1e-8);
        assert!((out.mean_number(1).unwrap() - s.mean_number(0).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn oracle_zero_hamiltonian() {
        let s = tensor(&coh(0.5, 0.1, 5), &coh(0.2, -0.3, 5)).unwrap();
        let out = brute_force_oracle(&s, &[], 3.0, DEFAULT_ORACLE_CAP).unwrap();
        assert!(max_amplitude_difference(&out, &s).unwrap() < 1e-14);
    }

    #[test]
    fn oracle_cap() {
        let s = tensor(&coh(0.5, 0.1, 9), &coh(0.2, -0.3, 9)).unwrap();
        assert!(matches!(brute_force_oracle(&s, &[], 1.0, 50), Err(Error::DimensionTooLarge { dim: 100, cap: 50 })));
    }

    #[test]
    fn term_json_shape() {
        let t: HamiltonianTerm = serde_json::from_str(r#"{"type":"hop","modes":[0,1],"coefficient":0.5}"#).unwrap();
        assert_eq!(t.kind, TermKind::Hop);
        assert!(serde_json::from_str::<HamiltonianTerm>(r#"{"type":"hop","modes":[0,1],"coefficient":0.5,"x":1}"#).is_err());
    }
}
