//! Subcommand implementations.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::config::{command_config, Cplx};
use crate::channel::{channel_entanglement, channel_family_overlaps, generate_channel, ChannelFamilyIndex};
use crate::corrections::{p_even_analytic, p_even_monte_carlo, total_efficiency, AuxiliaryKind, AuxiliaryPrep};
use crate::dynamics::{CrossSpeciesParams, JosephsonParams, KerrParams};
use crate::error::{Error, Result};
use crate::fock::{prepare_coherent, CoherentSpec, FockCutoff, SuperpositionSpec};
use crate::homodyne::{perturbative_sx_series, simulate_sx, PerturbativeInit};
use crate::lattice::{density_map, derived_geometry, linear_schedule, min_gap, period_grid, schedule_check, LatticeParams};
use crate::output::{write_csv, write_json, Manifest, OutputSet};
use crate::protocol::{run_protocol, BackendKind, ProtocolConfig};
use crate::rng::trial_rng;

fn c(re: f64, im: f64) -> Cplx {
    Cplx(Complex64::new(re, im))
}

command_config!(ChannelOpts, ChannelConfig {
    /// Amplitude of well 1.
    alpha: Cplx = c(2.0, 0.0),
    /// Amplitude of well 2.
    beta: Cplx = c(2.0, 0.0),
    kappa: f64 = 1.0,
    /// Mode energy E0/hbar.
    e0: f64 = 1.0,
    /// Per-mode cutoff n_max.
    cutoff: usize = 24,
});

command_config!(TeleportOpts, TeleportConfig {
    /// Target weight A.
    a: Cplx = c(0.6, 0.0),
    /// Target weight B.
    b: Cplx = c(0.8, 0.0),
    /// Target amplitude.
    gamma: Cplx = c(2.0, 0.0),
    alpha: Cplx = c(2.0, 0.0),
    beta: Cplx = c(0.0, 2.0),
    kappa: f64 = 1.0,
    e0: f64 = 1.0,
    /// Josephson frequency of the homodyne stage.
    omega: f64 = 1.0,
    /// Inter-species rate of the parity stage.
    lambda: f64 = 0.5,
    cutoff: usize = 24,
    /// ideal | homodyne
    backend: String = "ideal".into(),
    homodyne_reference: f64 = 2.0,
    homodyne_kappa: f64 = 0.0,
    /// number | coherent | squeezed_vacuum
    aux: String = "number".into(),
    /// n, mean number, or r.
    aux_param: f64 = 0.0,
    p_d: f64 = 1.0,
    displacement_l: i64 = 0,
    trials: usize = 1000,
    seed: u64 = 0,
});

command_config!(ParitySweepOpts, ParitySweepConfig {
    /// Comma-separated families, or "all".
    family: String = "all".into(),
    start: f64 = 0.0,
    stop: f64 = 5.0,
    points: usize = 6,
    mc_trials: usize = 100_000,
    seed: u64 = 0,
});

command_config!(EfficiencySweepOpts, EfficiencySweepConfig {
    /// Auxiliary family whose parameter is swept as r.
    family: String = "squeezed_vacuum".into(),
    r_start: f64 = 0.0,
    r_stop: f64 = 2.0,
    r_points: usize = 11,
    p_d_start: f64 = 0.0,
    p_d_stop: f64 = 1.0,
    p_d_points: usize = 11,
});

command_config!(HomodyneOpts, HomodyneConfig {
    /// Coherent amplitude of the signal well.
    signal: Cplx = c(1.0, 0.0),
    /// Coherent amplitude of the reference well.
    reference: Cplx = c(0.0, 2.0),
    omega: f64 = 1.0,
    kappa: f64 = 0.0,
    cutoff: usize = 24,
    t_max: f64 = 2.0 * PI,
    points: usize = 101,
});

command_config!(LatticeMapOpts, LatticeMapConfig {
    u1: f64 = 1.0,
    k_l: f64 = 1.0,
    b_parallel: f64 = 0.0,
    b_perp: f64 = 0.05,
    gyro: f64 = 1.0,
    theta_start: f64 = PI / 2.0,
    theta_stop: f64 = 2.5 * PI,
    theta_points: usize = 81,
    z_points: usize = 256,
});

command_config!(ScheduleCheckOpts, ScheduleCheckConfig {
    u1: f64 = 1.0,
    k_l: f64 = 1.0,
    b_parallel: f64 = 0.0,
    b_perp: f64 = 0.0,
    gyro: f64 = 1.0,
    theta_start: f64 = PI / 2.0,
    theta_stop: f64 = 2.5 * PI,
    duration: f64 = 100.0,
    samples: usize = 201,
    /// Excited-band gap (E' - E0)/hbar.
    gap: f64 = 1.0,
    /// Rate threshold as a fraction of the gap.
    factor: f64 = 0.1,
});

/// Options shared by all subcommands.
pub struct Context {
    pub out: OutputSet,
    pub gnuplot: bool,
    pub timing: Option<std::time::Instant>,
}

impl Context {
    fn finish(mut self, mut manifest: Manifest) -> Result<()> {
        manifest.outputs = self.out.hashes()?;
        manifest.wall_time_s = self.timing.map(|t| t.elapsed().as_secs_f64());
        let path = self.out.path("manifest.json")?;
        write_json(&path, &manifest)
    }

    fn gnuplot(&mut self, name: &str, script: &str) -> Result<()> {
        if self.gnuplot {
            let path = self.out.path(name)?;
            std::fs::write(path, script)?;
        }
        Ok(())
    }
}

fn linspace(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    match points {
        0 => Err(Error::InvalidParameter("grid needs at least one point".into())),
        1 => Ok(vec![start]),
        n => Ok((0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect()),
    }
}

fn meta(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

#[derive(Serialize)]
struct GramRow {
    j: usize,
    k: usize,
    re: f64,
    im: f64,
    abs: f64,
}

pub fn channel(cfg: &ChannelConfig, mut ctx: Context) -> Result<()> {
    let kp = KerrParams::new(cfg.e0, cfg.kappa)?;
    let j = ChannelFamilyIndex::from_params(kp)?;
    let cutoff = FockCutoff::new(cfg.cutoff)?;
    let (alpha, beta) = (CoherentSpec::new(cfg.alpha.0), CoherentSpec::new(cfg.beta.0));
    let state = generate_channel(alpha, beta, kp, cutoff)?;
    let path = ctx.out.path("channel_state.json")?;
    std::fs::write(path, state.to_json()? + "\n")?;

    let gram = channel_family_overlaps(alpha, beta, cfg.kappa, cutoff)?;
    let rows: Vec<GramRow> = (0..4)
        .flat_map(|j| (0..4).map(move |k| (j, k)))
        .map(|(j, k)| GramRow { j, k, re: gram[j][k].re, im: gram[j][k].im, abs: gram[j][k].norm() })
        .collect();
    let path = ctx.out.path("gram.csv")?;
    write_csv(&path, &meta(&[("quantity", "overlaps <Phi_j|Phi_k> of the four channel family members".into())]), &rows)?;

    let entropy = channel_entanglement(&state)?;
    let report = serde_json::json!({
        "family_index": j.get(),
        "entropy_bits": entropy,
        "norm": state.norm(),
        "leakage": state.leakage(),
    });
    let path = ctx.out.path("entanglement.json")?;
    write_json(&path, &report)?;

    let mut m = Manifest::new("channel", None, cfg)?;
    m.summary = Some(report);
    ctx.finish(m)
}

#[derive(Serialize)]
struct TrialRow {
    trial: usize,
    branch: u8,
    corrected: bool,
    fidelity: f64,
    aux_m: Option<usize>,
    p_d_draw: f64,
}

pub fn protocol_config(cfg: &TeleportConfig) -> Result<ProtocolConfig> {
    Ok(ProtocolConfig {
        target: SuperpositionSpec { a: cfg.a.0, b: cfg.b.0, gamma: cfg.gamma.0 },
        alpha: cfg.alpha.0,
        beta: cfg.beta.0,
        kerr: KerrParams::new(cfg.e0, cfg.kappa)?,
        josephson: JosephsonParams::new(cfg.omega)?,
        cross: CrossSpeciesParams::new(cfg.lambda)?,
        n_max: cfg.cutoff,
        backend: cfg.backend.parse::<BackendKind>()?,
        homodyne_reference: cfg.homodyne_reference,
        homodyne_kappa: cfg.homodyne_kappa,
        aux: AuxiliaryPrep::new(cfg.aux.parse()?, cfg.aux_param)?,
        p_d: cfg.p_d,
        displacement_l: cfg.displacement_l,
        trials: cfg.trials,
        seed: cfg.seed,
    })
}

pub fn teleport(cfg: &TeleportConfig, mut ctx: Context) -> Result<()> {
    let pc = protocol_config(cfg)?;
    let (records, summary) = run_protocol(&pc)?;
    let rows: Vec<TrialRow> = records
        .iter()
        .map(|r| TrialRow {
            trial: r.trial,
            branch: r.outcome.branch,
            corrected: r.corrected,
            fidelity: r.fidelity,
            aux_m: r.outcome.aux_m,
            p_d_draw: r.p_d_draw,
        })
        .collect();
    let path = ctx.out.path("trials.csv")?;
    write_csv(
        &path,
        &meta(&[
            ("seed", cfg.seed.to_string()),
            ("reference", "A|beta> + B|-beta> with the channel amplitude beta".into()),
            ("branches", "0: displacement, 1: parity, 2: displacement then parity, 3: none".into()),
        ]),
        &rows,
    )?;
    let path = ctx.out.path("summary.json")?;
    write_json(&path, &summary)?;
    let mut m = Manifest::new("teleport", Some(cfg.seed), cfg)?;
    m.summary = Some(serde_json::to_value(&summary)?);
    m.caveats.push("The teleported amplitude is the channel's beta, not the target's gamma.".into());
    m.caveats.push(
        "The virtual displacement flips the relative sign only in the displaced basis {|beta+delta>, |-beta+delta>}; \
         fidelity against A|beta> + B|-beta> on the displacement branches is reduced accordingly."
            .into(),
    );
    ctx.finish(m)
}

#[derive(Serialize)]
struct ParityRow {
    family: AuxiliaryKind,
    parameter: f64,
    p_even_analytic: f64,
    p_even_mc: f64,
    mc_trials: usize,
    mc_stderr: f64,
}

fn families(spec: &str) -> Result<Vec<AuxiliaryKind>> {
    if spec == "all" {
        return Ok(vec![AuxiliaryKind::Number, AuxiliaryKind::Coherent, AuxiliaryKind::SqueezedVacuum]);
    }
    spec.split(',').map(|s| s.trim().parse()).collect()
}

pub fn parity_sweep(cfg: &ParitySweepConfig, mut ctx: Context) -> Result<()> {
    let grid = linspace(cfg.start, cfg.stop, cfg.points)?;
    let points: Vec<AuxiliaryPrep> = families(&cfg.family)?
        .into_iter()
        .flat_map(|f| grid.iter().map(move |&x| AuxiliaryPrep::new(f, x)))
        .collect::<Result<_>>()?;
    let rows: Vec<ParityRow> = points
        .par_iter()
        .enumerate()
        .map(|(k, &aux)| {
            let mut rng = trial_rng(cfg.seed, k as u64);
            let est = p_even_monte_carlo(aux, cfg.mc_trials, &mut rng);
            ParityRow {
                family: aux.kind,
                parameter: aux.parameter,
                p_even_analytic: p_even_analytic(aux),
                p_even_mc: est.p_even,
                mc_trials: cfg.mc_trials,
                mc_stderr: est.stderr,
            }
        })
        .collect();
    let path = ctx.out.path("parity_sweep.csv")?;
    write_csv(&path, &meta(&[("seed", cfg.seed.to_string()), ("quantity", "probability of an even auxiliary count".into())]), &rows)?;
    ctx.gnuplot(
        "parity_sweep.gp",
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'parameter'\nset ylabel 'P_even'\n\
         plot 'parity_sweep.csv' using 2:3 with lines title 'analytic', '' using 2:4 with points title 'Monte Carlo'\n",
    )?;
    let mut m = Manifest::new("parity-sweep", Some(cfg.seed), cfg)?;
    m.caveats.push(
        "Under the collision model the count distribution equals the auxiliary's initial number distribution: \
         number states give P_even in {0, 1} and squeezed vacuum gives P_even = 1 for every r. \
         A constant 0.5 for number states or a squeezing threshold is not produced by this model."
            .into(),
    );
    ctx.finish(m)
}

#[derive(Serialize)]
struct EfficiencyRow {
    r: f64,
    p_d: f64,
    p_even: f64,
    p_total: f64,
}

pub fn efficiency_sweep(cfg: &EfficiencySweepConfig, mut ctx: Context) -> Result<()> {
    let kind: AuxiliaryKind = cfg.family.parse()?;
    let rs = linspace(cfg.r_start, cfg.r_stop, cfg.r_points)?;
    let pds = linspace(cfg.p_d_start, cfg.p_d_stop, cfg.p_d_points)?;
    let mut rows = Vec::with_capacity(rs.len() * pds.len());
    for &r in &rs {
        let p_even = p_even_analytic(AuxiliaryPrep::new(kind, r)?);
        for &p_d in &pds {
            let e = total_efficiency(p_even, p_d)?;
            rows.push(EfficiencyRow { r, p_d, p_even: e.p_even, p_total: e.p_total });
        }
    }
    let path = ctx.out.path("efficiency_sweep.csv")?;
    write_csv(&path, &meta(&[("family", kind.to_string()), ("p_total", "(1 + p_even + p_d + p_even p_d) / 4".into())]), &rows)?;
    ctx.gnuplot(
        "efficiency_sweep.gp",
        "set datafile separator ','\nset xlabel 'r'\nset ylabel 'P_D'\nset zlabel 'P'\n\
         splot 'efficiency_sweep.csv' using 1:2:4 with points title 'P'\n",
    )?;
    let mut m = Manifest::new("efficiency-sweep", None, cfg)?;
    if kind == AuxiliaryKind::SqueezedVacuum {
        m.caveats.push("Squeezed-vacuum auxiliaries give p_even = 1 for every r, so p_total depends on p_d only.".into());
    }
    ctx.finish(m)
}

#[derive(Serialize)]
struct HomodyneRow {
    t: f64,
    sx_full_re: f64,
    sx_full_im: f64,
    sx_pert_re: f64,
    sx_pert_im: f64,
    raw_half_diff: f64,
}

pub fn homodyne(cfg: &HomodyneConfig, mut ctx: Context) -> Result<()> {
    let jp = JosephsonParams::new(cfg.omega)?;
    let kp = KerrParams::new(0.0, cfg.kappa)?;
    if cfg.omega <= 0.0 {
        return Err(Error::InvalidParameter("omega must be positive".into()));
    }
    let cutoff = FockCutoff::new(cfg.cutoff)?;
    let signal = prepare_coherent(CoherentSpec::new(cfg.signal.0), cutoff)?;
    let beta = CoherentSpec::new(cfg.reference.0);
    let ts = linspace(0.0, cfg.t_max, cfg.points)?;
    let full = simulate_sx(&signal, beta, jp, kp, &ts)?;
    let start = simulate_sx(&signal, beta, jp, kp, &[0.0])?[0];
    let epsilon = cfg.kappa / cfg.omega;
    let init = PerturbativeInit::from_record(&start, epsilon);
    let mut m = Manifest::new("homodyne", None, cfg)?;
    let pert = match perturbative_sx_series(init, start.normalization, cfg.omega, &ts) {
        Ok(v) => v,
        Err(Error::ValidityDomainExceeded { eps_n, limit }) => {
            m.caveats.push(format!("eps*N = {eps_n:.4} exceeds {limit}; perturbative columns are NaN."));
            vec![Complex64::new(f64::NAN, f64::NAN); ts.len()]
        }
        Err(e) => return Err(e),
    };
    let rows: Vec<HomodyneRow> = full
        .iter()
        .zip(&pert)
        .map(|(r, p)| HomodyneRow {
            t: r.t,
            sx_full_re: r.sx.re,
            sx_full_im: r.sx.im,
            sx_pert_re: p.re,
            sx_pert_im: p.im,
            raw_half_diff: r.raw_half_diff,
        })
        .collect();
    let path = ctx.out.path("homodyne.csv")?;
    write_csv(
        &path,
        &meta(&[("epsilon", epsilon.to_string()), ("N", start.normalization.to_string())]),
        &rows,
    )?;
    ctx.gnuplot(
        "homodyne.gp",
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nset ylabel 'S_x'\n\
         plot 'homodyne.csv' using 1:2 with lines title 'full', '' using 1:4 with lines title 'first order'\n",
    )?;
    ctx.finish(m)
}

fn lattice_params(u1: f64, k_l: f64, b_parallel: f64, b_perp: f64, gyro: f64, theta: f64) -> Result<LatticeParams> {
    LatticeParams::new(u1, theta, k_l, b_parallel, b_perp, gyro)
}

pub fn lattice_map(cfg: &LatticeMapConfig, mut ctx: Context) -> Result<()> {
    let p = lattice_params(cfg.u1, cfg.k_l, cfg.b_parallel, cfg.b_perp, cfg.gyro, cfg.theta_start)?;
    let thetas = linspace(cfg.theta_start, cfg.theta_stop, cfg.theta_points)?;
    let zs = period_grid(cfg.z_points.max(1));
    let rows = density_map(&p, &thetas, &zs)?;
    let gap = rows.iter().map(|r| r.band_upper - r.band_lower).fold(f64::INFINITY, f64::min);
    let path = ctx.out.path("lattice_map.csv")?;
    write_csv(
        &path,
        &meta(&[("z_prime", "2 k_L z".into()), ("min_gap", gap.to_string()), ("hbar", "1".into())]),
        &rows,
    )?;
    ctx.gnuplot(
        "lattice_map.gp",
        "set datafile separator ','\nset xlabel \"z'\"\nset ylabel 'theta'\nset view map\n\
         splot 'lattice_map.csv' using 2:1:3 with points palette pointtype 5 title 'lower band'\n",
    )?;
    let mut m = Manifest::new("lattice-map", None, cfg)?;
    m.summary = Some(serde_json::json!({
        "min_gap": gap,
        "min_gap_at_start": min_gap(&p, &zs),
        "geometry_at_start": derived_geometry(&p),
    }));
    ctx.finish(m)
}

pub fn schedule(cfg: &ScheduleCheckConfig, mut ctx: Context) -> Result<()> {
    let p = lattice_params(cfg.u1, cfg.k_l, cfg.b_parallel, cfg.b_perp, cfg.gyro, cfg.theta_start)?;
    let (ts, thetas) = linear_schedule(cfg.theta_start, cfg.theta_stop, cfg.duration, cfg.samples);
    let report = schedule_check(&ts, &thetas, cfg.gap, cfg.factor, &p)?;
    let path = ctx.out.path("schedule.json")?;
    write_json(&path, &report)?;
    let mut m = Manifest::new("schedule-check", None, cfg)?;
    m.summary = Some(serde_json::to_value(&report)?);
    ctx.finish(m)
}
