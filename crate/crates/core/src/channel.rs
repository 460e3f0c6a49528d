//! Entangled channel between two wells formed by a timed cross-collision.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::dynamics::{evolve_cross_kerr, evolve_self_kerr, KerrParams};
use crate::error::{Error, Result};
use crate::fock::{inner_product, prepare_coherent, tensor, CoherentSpec, FockCutoff, StateVector};

/// Relative tolerance on the frequency condition `E0/hbar = (j+1) kappa`.
pub const FREQUENCY_TOLERANCE: f64 = 1e-9;

/// Member `j` of the channel family, generated when `E0/hbar = (j+1) kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelFamilyIndex(u8);

impl ChannelFamilyIndex {
    pub fn new(j: u8) -> Result<Self> {
        if j > 3 {
            return Err(Error::InvalidParameter(format!("channel index j={j} not in 0..=3")));
        }
        Ok(Self(j))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Finds `j` such that `E0/hbar = (j+1) kappa`.
    pub fn from_params(params: KerrParams) -> Result<Self> {
        if params.kappa <= 0.0 {
            return Err(Error::FrequencyConditionViolated("kappa must be positive".into()));
        }
        let ratio = params.e0_over_hbar / params.kappa;
        let nearest = ratio.round();
        if (ratio - nearest).abs() > FREQUENCY_TOLERANCE * ratio.abs().max(1.0) || !(1.0..=4.0).contains(&nearest) {
            return Err(Error::FrequencyConditionViolated(format!(
                "E0/hbar = {} kappa is not (j+1) kappa for any j in 0..=3",
                ratio
            )));
        }
        Ok(Self(nearest as u8 - 1))
    }

    /// Rates generating this member for a given `kappa`.
    pub fn params(self, kappa: f64) -> KerrParams {
        KerrParams { e0_over_hbar: (self.0 as f64 + 1.0) * kappa, kappa }
    }

    /// Branch rotation `(-i)^j`.
    pub fn rotation(self) -> Complex64 {
        Complex64::new(0.0, -1.0).powu(self.0 as u32)
    }
}

/// Collision duration `pi / (2 kappa)`.
pub fn collision_time(kappa: f64) -> f64 {
    PI / (2.0 * kappa)
}

/// Self- and cross-collision of two modes of `state` for `t = pi/(2 kappa)`.
pub fn collide(state: &StateVector, modes: (usize, usize), params: KerrParams) -> Result<StateVector> {
    let t = collision_time(params.kappa);
    let s = evolve_self_kerr(state, modes.0, params, t)?;
    let s = evolve_self_kerr(&s, modes.1, params, t)?;
    evolve_cross_kerr(&s, modes, params.kappa, t)
}

/// Prepares `|alpha>|beta>` and lets the wells collide for `t = pi/(2 kappa)`.
pub fn generate_channel(
    alpha: CoherentSpec,
    beta: CoherentSpec,
    params: KerrParams,
    cutoff: FockCutoff,
) -> Result<StateVector> {
    ChannelFamilyIndex::from_params(params)?;
    let joint = tensor(&prepare_coherent(alpha, cutoff)?, &prepare_coherent(beta, cutoff)?)?;
    collide(&joint, (0, 1), params)
}

/// Closed form `1/2 [(1-i)|r alpha, r beta> + (1+i)|-r alpha, -r beta>]`, `r = (-i)^j`.
pub fn analytic_channel(
    alpha: CoherentSpec,
    beta: CoherentSpec,
    j: ChannelFamilyIndex,
    cutoff: FockCutoff,
) -> Result<StateVector> {
    let r = j.rotation();
    let plus = tensor(
        &prepare_coherent(CoherentSpec::new(r * alpha.amplitude), cutoff)?,
        &prepare_coherent(CoherentSpec::new(r * beta.amplitude), cutoff)?,
    )?;
    let minus = tensor(
        &prepare_coherent(CoherentSpec::new(-r * alpha.amplitude), cutoff)?,
        &prepare_coherent(CoherentSpec::new(-r * beta.amplitude), cutoff)?,
    )?;
    plus.scaled(Complex64::new(0.5, -0.5)).add(&minus.scaled(Complex64::new(0.5, 0.5)))?.normalized()
}

/// Von Neumann entropy (bits) of the first mode's reduced state.
pub fn channel_entanglement(state: &StateVector) -> Result<f64> {
    if state.modes() != 2 {
        return Err(Error::ShapeMismatch(format!("entanglement needs a two-mode state, got {} modes", state.modes())));
    }
    let d = state.cutoff().dim();
    let m = DMatrix::from_row_slice(d, d, state.amplitudes());
    let svd = SVD::new(m, false, false);
    let norm = state.norm_sqr();
    let entropy = svd
        .singular_values
        .iter()
        .map(|s| s * s / norm)
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.log2())
        .sum::<f64>();
    Ok(entropy.max(0.0))
}

/// Gram matrix `<Phi_j|Phi_k>` of the four family members.
pub fn channel_family_overlaps(
    alpha: CoherentSpec,
    beta: CoherentSpec,
    kappa: f64,
    cutoff: FockCutoff,
) -> Result<[[Complex64; 4]; 4]> {
    let members = (0..4u8)
        .map(|j| generate_channel(alpha, beta, ChannelFamilyIndex(j).params(kappa), cutoff))
        .collect::<Result<Vec<_>>>()?;
    let mut gram = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (r, a) in members.iter().enumerate() {
        for (c, b) in members.iter().enumerate() {
            gram[r][c] = inner_product(a, b)?;
        }
    }
    Ok(gram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::fidelity;

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    #[test]
    fn frequency_condition() {
        assert_eq!(ChannelFamilyIndex::from_params(KerrParams::new(1.0, 1.0).unwrap()).unwrap().get(), 0);
        assert_eq!(ChannelFamilyIndex::from_params(KerrParams::new(6.0, 2.0).unwrap()).unwrap().get(), 2);
        assert!(matches!(
            ChannelFamilyIndex::from_params(KerrParams::new(1.5, 1.0).unwrap()),
            Err(Error::FrequencyConditionViolated(_))
        ));
        assert!(ChannelFamilyIndex::from_params(KerrParams::new(5.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn j0_channel_matches_closed_form() {
        let (a, b) = (CoherentSpec::real(2.0), CoherentSpec::real(2.0));
        let ch = generate_channel(a, b, KerrParams::new(1.0, 1.0).unwrap(), cut(26)).unwrap();
        let want = analytic_channel(a, b, ChannelFamilyIndex(0), cut(26)).unwrap();
        assert!(fidelity(&ch, &want).unwrap() >= 1.0 - 1e-8);
        assert!((ch.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn j1_channel_rotates_branches() {
        let (a, b) = (CoherentSpec::real(2.0), CoherentSpec::real(2.0));
        let ch = generate_channel(a, b, KerrParams::new(2.0, 1.0).unwrap(), cut(26)).unwrap();
        let want = analytic_channel(a, b, ChannelFamilyIndex(1), cut(26)).unwrap();
        assert!(fidelity(&ch, &want).unwrap() >= 1.0 - 1e-8);
    }

    #[test]
    fn zero_amplitude_channel_is_vacuum() {
        let ch = generate_channel(CoherentSpec::real(0.0), CoherentSpec::real(0.0), KerrParams::new(1.0, 1.0).unwrap(), cut(4))
            .unwrap();
        assert!((ch.amplitudes()[0].norm() - 1.0).abs() < 1e-14);
        assert!(channel_entanglement(&ch).unwrap().abs() < 1e-10);
    }

    #[test]
    fn entanglement_of_product_and_channel() {
        let prod = tensor(&prepare_coherent(CoherentSpec::real(1.0), cut(16)).unwrap(), &StateVector::vacuum(1, cut(16))).unwrap();
        assert!(channel_entanglement(&prod).unwrap().abs() < 1e-10);
        let ch = generate_channel(CoherentSpec::real(2.0), CoherentSpec::real(2.0), KerrParams::new(1.0, 1.0).unwrap(), cut(26))
            .unwrap();
        let e = channel_entanglement(&ch).unwrap();
        assert!((0.99..=1.0 + 1e-12).contains(&e), "{e}");
    }

    #[test]
    fn gram_matrix_bounds() {
        let (a, b) = (CoherentSpec::real(2.0), CoherentSpec::real(2.0));
        let g = channel_family_overlaps(a, b, 1.0, cut(26)).unwrap();
        for r in 0..4 {
            assert!((g[r][r].re - 1.0).abs() < 1e-10);
            for c in 0..4 {
                if r != c {
                    assert!(g[r][c].norm() <= (-4f64).exp() + 1e-8);
                }
            }
        }
        let vac = channel_family_overlaps(CoherentSpec::real(0.0), CoherentSpec::real(0.0), 1.0, cut(3)).unwrap();
        assert!(vac.iter().flatten().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }
}
