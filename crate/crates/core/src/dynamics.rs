//! Forward-Euler integration of the Allen–Cahn flow
//! `u_t = κ Δu - W'(u)` with `u = 0` on the boundary.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    self, classify_field, Classification, EnergyReport, DEFAULT_TRIVIAL_TOL,
};
use crate::error::{Error, Result};
use crate::field::{GridGeometry, ScalarField, UNIT_LAMBDA_LENGTH};
use crate::potential::{
    w_prime_raw, GuardMode, ModifiedPotential, PotentialParams, DEFAULT_THRESHOLD_C, GUARD_EPS,
};

/// Which potential drives the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialMode {
    /// `W` itself, with [`SolverConfig::guard`] applied near `|u| = 1`.
    #[default]
    Exact,
    /// The globally defined `W̃`.
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitSign {
    #[default]
    Positive,
    Negative,
}

impl InitSign {
    pub fn factor(self) -> f64 {
        match self {
            InitSign::Positive => 1.0,
            InitSign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub kappa: f64,
    pub theta: f64,
    pub dt: f64,
    pub grid: GridGeometry,
    pub seed: u64,
    pub init_amplitude: f64,
    pub init_sign: InitSign,
    pub residual_tol: f64,
    /// Earliest time at which the run may stop.
    pub t_min: f64,
    pub checkpoint_period: f64,
    pub t_max: f64,
    pub potential_mode: PotentialMode,
    pub guard: GuardMode,
    /// Threshold constant of the modified potential.
    pub modified_c: f64,
    pub trivial_tol: f64,
}

impl SolverConfig {
    /// Defaults: `L = √2 π`, `N = 128`, `Δt = 1e-4`, `a₀ = 0.1`,
    /// tolerance `1e-7`, `t ≥ 50`, `t_max = 5000`.
    pub fn new(theta: f64, kappa: f64) -> Self {
        Self {
            kappa,
            theta,
            dt: 1e-4,
            grid: GridGeometry::new(UNIT_LAMBDA_LENGTH, 128).expect("valid default grid"),
            seed: 1,
            init_amplitude: 0.1,
            init_sign: InitSign::Positive,
            residual_tol: 1e-7,
            t_min: 50.0,
            checkpoint_period: 50.0,
            t_max: 5000.0,
            potential_mode: PotentialMode::Exact,
            guard: GuardMode::Strict,
            modified_c: DEFAULT_THRESHOLD_C,
            trivial_tol: DEFAULT_TRIVIAL_TOL,
        }
    }

    pub fn params(&self) -> Result<PotentialParams> {
        PotentialParams::new(self.theta)
    }

    /// Explicit stability bound `h²/(4κ)`.
    pub fn stability_bound(&self) -> f64 {
        let h = self.grid.spacing();
        h * h / (4.0 * self.kappa)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, v, "must be positive and finite"))
            }
        };
        positive("kappa", self.kappa)?;
        positive("dt", self.dt)?;
        positive("residual_tol", self.residual_tol)?;
        positive("checkpoint_period", self.checkpoint_period)?;
        positive("trivial_tol", self.trivial_tol)?;
        if !(self.init_amplitude > 0.0 && self.init_amplitude < 1.0) {
            return Err(Error::invalid(
                "init_amplitude",
                self.init_amplitude,
                "must satisfy 0 < a0 < 1",
            ));
        }
        if !(self.t_min >= 0.0) {
            return Err(Error::invalid("t_min", self.t_min, "must be nonnegative"));
        }
        if !(self.t_max >= self.t_min && self.t_max.is_finite()) {
            return Err(Error::invalid("t_max", self.t_max, "must be finite and >= t_min"));
        }
        if !(self.modified_c > 1.0) {
            return Err(Error::invalid("modified_c", self.modified_c, "must exceed 1"));
        }
        let dt_max = self.stability_bound();
        if self.dt > dt_max {
            return Err(Error::Unstable {
                dt: self.dt,
                dt_max,
            });
        }
        Ok(())
    }
}

/// `h²/(4κ)` for `cfg`.
pub fn stability_bound(cfg: &SolverConfig) -> f64 {
    cfg.stability_bound()
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform sample in the open interval `(0, 1)` for node `(i, j)`:
/// `splitmix64(seed + splitmix64(i << 32 | j))`, top 53 bits, offset by half
/// an ulp so neither endpoint occurs.
pub fn node_uniform(seed: u64, i: usize, j: usize) -> f64 {
    let key = ((i as u64) << 32) | (j as u64 & 0xFFFF_FFFF);
    let x = splitmix64(seed.wrapping_add(splitmix64(key)));
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Interior values `± a₀ U(0, 1)`, independent of platform and thread count.
pub fn init_random(cfg: &SolverConfig) -> ScalarField {
    let g = cfg.grid;
    let scale = cfg.init_sign.factor() * cfg.init_amplitude;
    let mut u = ScalarField::zeros(g);
    for j in 1..g.cells() {
        for i in 1..g.cells() {
            u.set(i, j, scale * node_uniform(cfg.seed, i, j));
        }
    }
    u
}

struct KernelOut {
    residual: f64,
    max_abs: f64,
    /// first interior node whose update was not finite
    bad: Option<usize>,
}

/// `dst = src + dt (c Δ₅ src - dw(src))` on interior nodes, where
/// `c = κ/h²` and `Δ₅` is the unscaled five-point stencil.
#[inline(always)]
fn kernel(src: &[f64], dst: &mut [f64], side: usize, c: f64, dt: f64, dw: impl Fn(f64) -> f64) -> KernelOut {
    let mut residual = 0.0f64;
    let mut max_abs = 0.0f64;
    let mut bad = None;
    for j in 1..side - 1 {
        let row = j * side;
        let up = &src[row - side..row];
        let cur = &src[row..row + side];
        let down = &src[row + side..row + 2 * side];
        let out = &mut dst[row..row + side];
        for i in 1..side - 1 {
            let x = cur[i];
            let lap = cur[i - 1] + cur[i + 1] + up[i] + down[i] - 4.0 * x;
            let r = c * lap - dw(x);
            let next = x + dt * r;
            let (ra, na) = (r.abs(), next.abs());
            if ra > residual {
                residual = ra;
            }
            if na > max_abs {
                max_abs = na;
            }
            if !(na < f64::INFINITY) && bad.is_none() {
                bad = Some(row + i);
            }
            out[i] = next;
        }
    }
    KernelOut {
        residual,
        max_abs,
        bad,
    }
}

/// Incremental forward-Euler integrator.
#[derive(Debug, Clone)]
pub struct Integrator {
    cfg: SolverConfig,
    modified: Option<ModifiedPotential>,
    current: ScalarField,
    scratch: Vec<f64>,
    steps: u64,
    last_residual: f64,
}

impl Integrator {
    pub fn new(cfg: SolverConfig, initial: ScalarField) -> Result<Self> {
        cfg.validate()?;
        if *initial.geometry() != cfg.grid {
            return Err(Error::Shape {
                expected: cfg.grid.node_count(),
                got: initial.geometry().node_count(),
            });
        }
        let modified = match cfg.potential_mode {
            PotentialMode::Modified => Some(ModifiedPotential::build(&cfg.params()?, cfg.modified_c)?),
            PotentialMode::Exact => None,
        };
        Ok(Self {
            scratch: vec![0.0; initial.values().len()],
            current: initial,
            cfg,
            modified,
            steps: 0,
            last_residual: f64::NAN,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn field(&self) -> &ScalarField {
        &self.current
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.cfg.dt
    }

    pub fn modified_potential(&self) -> Option<&ModifiedPotential> {
        self.modified.as_ref()
    }

    /// `‖κΔ_h u - W'(u)‖_∞` of the state before the most recent step.
    pub fn last_residual(&self) -> f64 {
        self.last_residual
    }

    /// Computes the update into the scratch buffer. Returns the residual of
    /// the current state and the sup norm of the candidate.
    fn propose(&mut self) -> Result<(f64, f64)> {
        let g = self.cfg.grid;
        let side = g.side();
        let h = g.spacing();
        let c = self.cfg.kappa / (h * h);
        let dt = self.cfg.dt;
        let theta = self.cfg.theta;
        let src = self.current.values();
        let dst = &mut self.scratch;
        let limit = 1.0 - GUARD_EPS;
        let out = match (self.cfg.potential_mode, &self.modified) {
            (PotentialMode::Modified, Some(m)) => kernel(src, dst, side, c, dt, |x| m.derivative(x)),
            (_, _) => match self.cfg.guard {
                GuardMode::Strict => kernel(src, dst, side, c, dt, |x| {
                    if x.abs() < limit {
                        w_prime_raw(theta, x)
                    } else {
                        f64::NAN
                    }
                }),
                GuardMode::Clamped => kernel(src, dst, side, c, dt, |x| {
                    w_prime_raw(theta, x.clamp(-limit, limit))
                }),
            },
        };
        if let Some(k) = out.bad {
            let (i, j) = (k % side, k / side);
            let value = src[k];
            if self.cfg.potential_mode == PotentialMode::Exact
                && self.cfg.guard == GuardMode::Strict
                && value.abs() >= limit
            {
                return Err(Error::Guard { i, j, value });
            }
            return Err(Error::NonFinite {
                i,
                j,
                steps: self.steps,
            });
        }
        Ok((out.residual, out.max_abs))
    }

    fn commit(&mut self, max_abs: f64) -> Result<()> {
        std::mem::swap(self.current.values_vec_mut(), &mut self.scratch);
        self.steps += 1;
        if max_abs > 1.0 {
            return Err(Error::Blowup {
                max_abs,
                steps: self.steps,
            });
        }
        Ok(())
    }

    /// One forward-Euler step. Returns the residual of the state it started from.
    pub fn step(&mut self) -> Result<f64> {
        let (res, max_abs) = self.propose()?;
        self.last_residual = res;
        self.commit(max_abs)?;
        Ok(res)
    }

    /// Advances up to `steps` steps; returns the last residual.
    pub fn advance(&mut self, steps: u64) -> Result<f64> {
        let mut res = self.last_residual;
        for _ in 0..steps {
            res = self.step()?;
        }
        Ok(res)
    }

    /// Energy of the functional the flow descends (`E`, or `Ẽ` in modified mode).
    pub fn flow_energy(&self) -> Result<f64> {
        match &self.modified {
            Some(m) => Ok(diagnostics::modified_energy(&self.current, self.cfg.kappa, m)),
            None => Ok(diagnostics::energy(&self.current, self.cfg.kappa, &self.cfg.params()?, None)?.total),
        }
    }
}

/// One forward-Euler step: returns `u + Δt (κ Δ_h u - W'(u))` and the sup
/// norm of the bracket.
pub fn step(u: &ScalarField, cfg: &SolverConfig) -> Result<(ScalarField, f64)> {
    let mut it = Integrator::new(cfg.clone(), u.clone())?;
    let (res, max_abs) = it.propose()?;
    it.commit(max_abs)?;
    Ok((it.current, res))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub t: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RunFlag {
    /// `t_max` reached before the residual dropped below tolerance.
    TimeLimit,
    /// Energy rose between two checkpoints by more than the relative tolerance.
    EnergyIncrease { t: f64, before: f64, after: f64 },
}

/// Relative tolerance on energy increase between consecutive checkpoints.
pub const ENERGY_MONOTONE_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub final_field: ScalarField,
    pub max_u: f64,
    pub min_u: f64,
    pub steps: u64,
    pub t_final: f64,
    /// `t_final` rounded up to the next multiple of the checkpoint period.
    pub t_checkpoint: f64,
    pub energy: EnergyReport,
    pub nehari_residual: f64,
    pub residual_inf: f64,
    pub classification: Classification,
    pub converged: bool,
    pub energy_history: Vec<EnergySample>,
    pub flags: Vec<RunFlag>,
}

impl RunResult {
    pub fn energy_monotone(&self) -> bool {
        !self
            .flags
            .iter()
            .any(|f| matches!(f, RunFlag::EnergyIncrease { .. }))
    }
}

/// State handed to checkpoint observers.
pub struct Checkpoint<'a> {
    pub t: f64,
    pub steps: u64,
    pub field: &'a ScalarField,
    pub energy: f64,
    pub residual: f64,
}

/// Integrates from [`init_random`] to a numerical equilibrium.
pub fn run_to_equilibrium(cfg: &SolverConfig) -> Result<RunResult> {
    run_from(cfg, init_random(cfg), &mut |_| Ok(()))
}

/// Integrates from `initial`.
///
/// The run stops at the first step whose residual `‖κΔ_h u - W'(u)‖_∞` is
/// below `residual_tol` at a time `t ≥ t_min`, or at `t_max`. `observer` is
/// called at `t = 0`, at every checkpoint, and at the final state.
pub fn run_from(
    cfg: &SolverConfig,
    initial: ScalarField,
    observer: &mut dyn FnMut(&Checkpoint) -> Result<()>,
) -> Result<RunResult> {
    let mut it = Integrator::new(cfg.clone(), initial)?;
    let dt = cfg.dt;
    let steps_min = (cfg.t_min / dt - 1e-9).ceil().max(0.0) as u64;
    let steps_max = (cfg.t_max / dt + 1e-9).floor() as u64;
    let per_checkpoint = ((cfg.checkpoint_period / dt).round() as u64).max(1);

    let mut history = Vec::new();
    let mut flags = Vec::new();
    let mut record = |it: &Integrator, residual: f64, flags: &mut Vec<RunFlag>, history: &mut Vec<EnergySample>| -> Result<()> {
        let energy = it.flow_energy()?;
        let t = it.time();
        if let Some(prev) = history.last().map(|s: &EnergySample| s.energy) {
            if energy > prev + ENERGY_MONOTONE_RTOL * prev.abs() {
                flags.push(RunFlag::EnergyIncrease {
                    t,
                    before: prev,
                    after: energy,
                });
            }
        }
        history.push(EnergySample { t, energy });
        observer(&Checkpoint {
            t,
            steps: it.steps(),
            field: it.field(),
            energy,
            residual,
        })
    };

    record(&it, f64::NAN, &mut flags, &mut history)?;
    let (converged, residual) = loop {
        let (res, max_abs) = it.propose()?;
        if it.steps >= steps_min && res < cfg.residual_tol {
            break (true, res);
        }
        if it.steps >= steps_max {
            break (false, res);
        }
        it.last_residual = res;
        it.commit(max_abs)?;
        if it.steps % per_checkpoint == 0 {
            record(&it, res, &mut flags, &mut history)?;
        }
    };
    if history.last().map(|s| s.t) != Some(it.time()) {
        record(&it, residual, &mut flags, &mut history)?;
    }
    if !converged {
        flags.push(RunFlag::TimeLimit);
    }

    let params = cfg.params()?;
    let u = it.current.clone();
    let modified = match it.modified.clone() {
        Some(m) => Some(m),
        None => ModifiedPotential::build(&params, cfg.modified_c).ok(),
    };
    let energy = diagnostics::energy(&u, cfg.kappa, &params, modified.as_ref())?;
    let nehari = match (&cfg.potential_mode, &modified) {
        (PotentialMode::Modified, Some(m)) => diagnostics::phi_prime(&u, cfg.kappa, m, 1.0),
        _ => diagnostics::nehari_residual(&u, cfg.kappa, &params)?,
    };
    let t_final = it.time();
    let period = cfg.checkpoint_period;
    Ok(RunResult {
        max_u: u.max(),
        min_u: u.min(),
        classification: classify_field(&u, cfg.trivial_tol),
        steps: it.steps,
        t_final,
        t_checkpoint: (t_final / period - 1e-9).ceil().max(0.0) * period,
        energy,
        nehari_residual: nehari,
        residual_inf: residual,
        converged,
        energy_history: history,
        flags,
        final_field: u,
    })
}
