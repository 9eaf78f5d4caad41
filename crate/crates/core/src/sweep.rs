//! Parameter sweeps over `(θ, κ, seed)`: single cases, Cartesian grids,
//! the `±` symmetry experiment and a bisection probe for the threshold
//! `κ_c = (1-θ)/λ₁`. Records persist as CSV with a JSON manifest.

use std::io::{Read, Write};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, classify_field, kappa_c, Classification, DEFAULT_TRIVIAL_TOL};
use crate::dynamics::{self, InitSign, Integrator, PotentialMode, RunFlag, RunResult, SolverConfig};
use crate::error::{Error, Result};
use crate::field::{GridGeometry, UNIT_LAMBDA_LENGTH};
use crate::potential::{find_u_theta, GuardMode, PotentialParams, DEFAULT_THRESHOLD_C};

pub const TABLE1_THETAS: [f64; 5] = [0.3, 0.5, 0.7, 0.9, 0.95];
pub const TABLE1_KAPPA: f64 = 0.02;
pub const TABLE2_THETA: f64 = 0.7;
pub const TABLE2_KAPPAS: [f64; 8] = [0.02, 0.05, 0.10, 0.15, 0.20, 0.25, 0.28, 0.299];

/// Cases this close to `κ_c` get `t_max` multiplied by `near_threshold_factor`.
pub const NEAR_THRESHOLD_BAND: f64 = 0.01;
/// Distance from `κ_c` beyond which a trivial/nontrivial label is required.
pub const DICHOTOMY_MARGIN: f64 = 5e-3;
/// Seeds of one `(θ, κ)` whose `max u` differ by more than this are flagged.
pub const SEED_AGREEMENT_TOL: f64 = 1e-4;
/// Allowed excess of `max u` over `u_θ` before the maximum principle counts as violated.
pub const MAX_PRINCIPLE_BAND: f64 = 1e-4;

pub const CSV_HEADER: [&str; 11] = [
    "theta",
    "kappa",
    "kappa_c",
    "seed",
    "u_theta",
    "max_u",
    "energy",
    "nehari_residual",
    "t_final",
    "classification",
    "flags",
];

/// Discretization and stopping parameters shared by every case of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub length: f64,
    pub cells: usize,
    pub dt: f64,
    pub residual_tol: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub checkpoint_period: f64,
    pub init_amplitude: f64,
    pub potential_mode: PotentialMode,
    pub guard: GuardMode,
    pub modified_c: f64,
    pub trivial_tol: f64,
    pub near_threshold_factor: f64,
}

impl Numerics {
    /// `N = 128`, `Δt = 1e-4`.
    pub fn full() -> Self {
        Self {
            length: UNIT_LAMBDA_LENGTH,
            cells: 128,
            dt: 1e-4,
            residual_tol: 1e-7,
            t_min: 50.0,
            t_max: 5000.0,
            checkpoint_period: 50.0,
            init_amplitude: 0.1,
            potential_mode: PotentialMode::Exact,
            guard: GuardMode::Strict,
            modified_c: DEFAULT_THRESHOLD_C,
            trivial_tol: DEFAULT_TRIVIAL_TOL,
            near_threshold_factor: 4.0,
        }
    }

    /// `N = 64`, `Δt = 4e-4`.
    pub fn fast() -> Self {
        Self {
            cells: 64,
            dt: 4e-4,
            ..Self::full()
        }
    }

    pub fn grid(&self) -> Result<GridGeometry> {
        GridGeometry::new(self.length, self.cells)
    }

    pub fn solver_config(&self, theta: f64, kappa: f64, seed: u64) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(theta, kappa);
        cfg.grid = self.grid()?;
        cfg.dt = self.dt;
        cfg.seed = seed;
        cfg.residual_tol = self.residual_tol;
        cfg.t_min = self.t_min;
        cfg.t_max = self.t_max;
        cfg.checkpoint_period = self.checkpoint_period;
        cfg.init_amplitude = self.init_amplitude;
        cfg.potential_mode = self.potential_mode;
        cfg.guard = self.guard;
        cfg.modified_c = self.modified_c;
        cfg.trivial_tol = self.trivial_tol;
        if let Ok(kc) = kappa_c(theta, cfg.grid.continuum_lambda1()) {
            if (kappa - kc).abs() < NEAR_THRESHOLD_BAND {
                cfg.t_max *= self.near_threshold_factor;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One `(θ, κ, seed)` case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub theta: f64,
    pub kappa: f64,
    pub kappa_c: f64,
    pub seed: u64,
    pub u_theta: f64,
    pub max_u: f64,
    pub energy: f64,
    pub nehari_residual: f64,
    pub t_final: f64,
    /// `None` when the run failed; the reason is among the flags.
    pub classification: Option<Classification>,
    pub flags: Vec<String>,
}

impl SweepRecord {
    pub fn is_anomaly(&self) -> bool {
        self.flags.iter().any(|f| f.starts_with("anomaly:"))
    }

    pub fn is_converged(&self) -> bool {
        self.classification.is_some() && !self.flags.iter().any(|f| f == "time-limit")
    }

    /// Recomputes `κ_c` for the square of side `length`.
    pub fn kappa_c_consistent(&self, length: f64) -> bool {
        let lambda1 = GridGeometry::new(length, 4)
            .map(|g| g.continuum_lambda1())
            .unwrap_or(f64::NAN);
        match kappa_c(self.theta, lambda1) {
            Ok(kc) => (kc - self.kappa_c).abs() <= 1e-15,
            Err(_) => false,
        }
    }
}

/// A record with the run that produced it.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub record: SweepRecord,
    pub run: Option<RunResult>,
    pub wall_seconds: f64,
}

fn annotate(record: &mut SweepRecord, run: &RunResult) {
    for f in &run.flags {
        let tag = match f {
            RunFlag::TimeLimit => "time-limit",
            RunFlag::EnergyIncrease { .. } => "energy-increase",
        };
        if !record.flags.iter().any(|x| x == tag) {
            record.flags.push(tag.to_string());
        }
    }
    let class = run.classification;
    if class == Classification::NontrivialPositive {
        if run.max_u > record.u_theta + MAX_PRINCIPLE_BAND || run.min_u < -1e-12 {
            record.flags.push("anomaly:max-principle".into());
        } else if run.max_u >= record.u_theta {
            record.flags.push("above-u-theta".into());
        }
    }
    if class == Classification::NontrivialNegative
        && (-run.min_u > record.u_theta + MAX_PRINCIPLE_BAND || run.max_u > 1e-12)
    {
        record.flags.push("anomaly:max-principle".into());
    }
    let nontrivial = !class.is_trivial();
    if record.kappa >= record.kappa_c + DICHOTOMY_MARGIN && nontrivial {
        record.flags.push("anomaly:dichotomy".into());
    }
    if record.kappa <= record.kappa_c - DICHOTOMY_MARGIN && !nontrivial && run.converged {
        record.flags.push("anomaly:dichotomy".into());
    }
    if class == Classification::MixedSign {
        record.flags.push("mixed-sign".into());
    }
}

fn run_config(cfg: &SolverConfig) -> CaseOutcome {
    let start = Instant::now();
    let grid = cfg.grid;
    let params = PotentialParams::new(cfg.theta).expect("validated");
    let u_theta = find_u_theta(&params, 1e-14).map(|r| r.u_theta).unwrap_or(f64::NAN);
    let mut record = SweepRecord {
        theta: cfg.theta,
        kappa: cfg.kappa,
        kappa_c: kappa_c(cfg.theta, grid.continuum_lambda1()).expect("validated"),
        seed: cfg.seed,
        u_theta,
        max_u: f64::NAN,
        energy: f64::NAN,
        nehari_residual: f64::NAN,
        t_final: f64::NAN,
        classification: None,
        flags: Vec::new(),
    };
    if (cfg.kappa - record.kappa_c).abs() < NEAR_THRESHOLD_BAND {
        record.flags.push("near-threshold".into());
    }
    let run = match dynamics::run_to_equilibrium(cfg) {
        Ok(run) => {
            record.max_u = run.max_u;
            record.energy = run.energy.total;
            record.nehari_residual = run.nehari_residual;
            record.t_final = run.t_final;
            record.classification = Some(run.classification);
            annotate(&mut record, &run);
            Some(run)
        }
        Err(e) => {
            record.flags.push(format!("error:{e}"));
            None
        }
    };
    CaseOutcome {
        record,
        run,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs one case from `init_random` to equilibrium.
pub fn run_case_outcome(theta: f64, kappa: f64, seed: u64, numerics: &Numerics) -> Result<CaseOutcome> {
    let cfg = numerics.solver_config(theta, kappa, seed)?;
    Ok(run_config(&cfg))
}

pub fn run_case(theta: f64, kappa: f64, seed: u64, numerics: &Numerics) -> Result<SweepRecord> {
    Ok(run_case_outcome(theta, kappa, seed, numerics)?.record)
}

fn for_each_case<T: Send>(configs: &[SolverConfig], jobs: usize, f: impl Fn(&SolverConfig) -> T + Sync) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if jobs > 1 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                return pool.install(|| configs.par_iter().map(&f).collect());
            }
        }
    }
    let _ = jobs;
    configs.iter().map(f).collect()
}

/// Cartesian product ordered by `θ`, then `κ`, then seed.
pub fn sweep_grid_outcomes(
    thetas: &[f64],
    kappas: &[f64],
    seeds: &[u64],
    numerics: &Numerics,
    jobs: usize,
) -> Result<Vec<CaseOutcome>> {
    if thetas.is_empty() || kappas.is_empty() || seeds.is_empty() {
        return Err(Error::invalid(
            "sweep",
            0.0,
            "theta, kappa and seed lists must be nonempty",
        ));
    }
    let mut configs = Vec::with_capacity(thetas.len() * kappas.len() * seeds.len());
    for &theta in thetas {
        for &kappa in kappas {
            for &seed in seeds {
                configs.push(numerics.solver_config(theta, kappa, seed)?);
            }
        }
    }
    let mut out = for_each_case(&configs, jobs.max(1), run_config);
    for group in out.chunks_mut(seeds.len()) {
        let finite = group.iter().map(|o| o.record.max_u).filter(|v| v.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if hi - lo > SEED_AGREEMENT_TOL {
            for o in group.iter_mut() {
                o.record.flags.push("anomaly:seed-disagreement".into());
            }
        }
    }
    Ok(out)
}

pub fn sweep_grid(
    thetas: &[f64],
    kappas: &[f64],
    seeds: &[u64],
    numerics: &Numerics,
    jobs: usize,
) -> Result<Vec<SweepRecord>> {
    Ok(sweep_grid_outcomes(thetas, kappas, seeds, numerics, jobs)?
        .into_iter()
        .map(|o| o.record)
        .collect())
}

/// True when, among records with the given `θ`, `max u` strictly decreases
/// between consecutive distinct `κ` (every seed at the larger `κ` below
/// every seed at the smaller one).
pub fn max_u_strictly_decreasing(records: &[SweepRecord], theta: f64) -> bool {
    let mut rows: Vec<&SweepRecord> = records.iter().filter(|r| r.theta == theta).collect();
    rows.sort_by(|a, b| a.kappa.total_cmp(&b.kappa));
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut last_kappa = f64::NAN;
    for r in rows {
        if r.kappa == last_kappa {
            let g = groups.last_mut().expect("nonempty");
            g.0 = g.0.min(r.max_u);
            g.1 = g.1.max(r.max_u);
        } else {
            groups.push((r.max_u, r.max_u));
            last_kappa = r.kappa;
        }
    }
    groups.windows(2).all(|w| w[1].1 < w[0].0)
}

#[derive(Debug, Clone)]
pub struct SymmetryOutcome {
    pub positive: CaseOutcome,
    pub negative: CaseOutcome,
    /// `‖u⁻ + u⁺‖_∞` at equilibrium.
    pub mismatch: f64,
    /// `|E(u⁺) - E(u⁻)| / |E(u⁺)|`
    pub energy_rel_diff: f64,
}

/// Runs `init_sign = ±1` from the same seed.
pub fn symmetry_experiment(theta: f64, kappa: f64, seed: u64, numerics: &Numerics) -> Result<SymmetryOutcome> {
    let cfg = numerics.solver_config(theta, kappa, seed)?;
    let mut neg = cfg.clone();
    neg.init_sign = InitSign::Negative;
    let mut out = for_each_case(&[cfg, neg], 2, run_config).into_iter();
    let positive = out.next().expect("two cases");
    let negative = out.next().expect("two cases");
    let (mismatch, energy_rel_diff) = match (&positive.run, &negative.run) {
        (Some(p), Some(n)) => {
            let m = p.final_field.axpy(1.0, &n.final_field)?.inf_norm();
            let e = (p.energy.total - n.energy.total).abs() / p.energy.total.abs();
            (m, e)
        }
        _ => (f64::NAN, f64::NAN),
    };
    Ok(SymmetryOutcome {
        positive,
        negative,
        mismatch,
        energy_rel_diff,
    })
}

/// Settings of the short runs used by [`threshold_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings {
    /// Initial amplitude `a₀`; small so that a growing mode is visible.
    pub amplitude: f64,
    /// Integration time before the label is read off.
    pub horizon: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            amplitude: 1e-2,
            horizon: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEvaluation {
    pub kappa: f64,
    pub seed: u64,
    pub classification: Classification,
    pub nehari_residual: f64,
    pub converged: bool,
}

/// Labels the flow at `(θ, κ)` from a short run with small positive data.
///
/// A converged state is classified directly. Otherwise the sign of
/// `⟨δE(u), u⟩ = -½ d/dt ‖u‖²` decides: a negative value forces
/// `κ λ₁ʰ < 1-θ` (discrete Poincaré inequality together with
/// `W'(u) u ≥ -(1-θ) u²`), so the state is on the nontrivial branch;
/// a nonnegative value after the transient means the flow is decaying to 0.
pub fn probe_classify(
    theta: f64,
    kappa: f64,
    seed: u64,
    numerics: &Numerics,
    probe: &ProbeSettings,
) -> Result<ProbeEvaluation> {
    let mut cfg = numerics.solver_config(theta, kappa, seed)?;
    cfg.init_amplitude = probe.amplitude;
    cfg.validate()?;
    let params = cfg.params()?;
    let initial = dynamics::init_random(&cfg);
    let mut it = Integrator::new(cfg.clone(), initial)?;
    let steps = (probe.horizon / cfg.dt).ceil() as u64;
    it.advance(steps)?;
    let u = it.field();
    let residual = diagnostics::flow_residual(u, kappa, &params)?;
    let nehari = diagnostics::nehari_residual(u, kappa, &params)?;
    let converged = residual < cfg.residual_tol;
    let classification = if converged {
        classify_field(u, cfg.trivial_tol)
    } else if nehari < 0.0 {
        classify_field(u, 0.0)
    } else {
        Classification::Trivial
    };
    Ok(ProbeEvaluation {
        kappa,
        seed,
        classification,
        nehari_residual: nehari,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub theta: f64,
    /// Largest probed `κ` labelled nontrivial.
    pub low: f64,
    /// Smallest probed `κ` labelled trivial.
    pub high: f64,
    pub estimate: f64,
    pub kappa_c_continuum: f64,
    pub kappa_c_discrete: f64,
    pub evaluations: Vec<ProbeEvaluation>,
}

impl ThresholdEstimate {
    pub fn contains(&self, kappa: f64) -> bool {
        self.low <= kappa && kappa <= self.high
    }
}

/// Bisection on `κ` with [`probe_classify`] as predicate until the bracket
/// is at most `resolution` wide. A `κ` counts as nontrivial if any seed
/// says so.
pub fn threshold_probe(
    theta: f64,
    bracket: (f64, f64),
    seeds: &[u64],
    resolution: f64,
    numerics: &Numerics,
    probe: &ProbeSettings,
) -> Result<ThresholdEstimate> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid("bracket", hi - lo, "needs 0 < low < high"));
    }
    if !(resolution > 0.0) {
        return Err(Error::invalid("resolution", resolution, "must be positive"));
    }
    if seeds.is_empty() {
        return Err(Error::invalid("seeds", 0.0, "must be nonempty"));
    }
    let mut evaluations = Vec::new();
    let nontrivial = |kappa: f64, evaluations: &mut Vec<ProbeEvaluation>| -> Result<bool> {
        let mut any = false;
        for &seed in seeds {
            let e = probe_classify(theta, kappa, seed, numerics, probe)?;
            any |= !e.classification.is_trivial();
            evaluations.push(e);
        }
        Ok(any)
    };
    let lo_nontrivial = nontrivial(lo, &mut evaluations)?;
    let hi_nontrivial = nontrivial(hi, &mut evaluations)?;
    if lo_nontrivial == hi_nontrivial {
        let label = if lo_nontrivial { "nontrivial" } else { "trivial" };
        return Err(Error::NoStraddle {
            lo,
            hi,
            label: label.into(),
        });
    }
    let increasing = lo_nontrivial;
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if nontrivial(mid, &mut evaluations)? == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let grid = numerics.grid()?;
    Ok(ThresholdEstimate {
        theta,
        low: lo,
        high: hi,
        estimate: 0.5 * (lo + hi),
        kappa_c_continuum: kappa_c(theta, grid.continuum_lambda1())?,
        kappa_c_discrete: kappa_c(theta, grid.discrete_lambda1())?,
        evaluations,
    })
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:?}")
    }
}

/// Writes records with the fixed [`CSV_HEADER`]. Flags are `;`-separated;
/// failed runs have an empty metric and classification `failed`.
pub fn write_records_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    write_records_with(records, out, b',')
}

/// As [`write_records_csv`] with another field delimiter.
pub fn write_records_with<W: Write>(records: &[SweepRecord], out: W, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            fmt_f64(r.theta),
            fmt_f64(r.kappa),
            fmt_f64(r.kappa_c),
            r.seed.to_string(),
            fmt_f64(r.u_theta),
            fmt_f64(r.max_u),
            fmt_f64(r.energy),
            fmt_f64(r.nehari_residual),
            fmt_f64(r.t_final),
            r.classification.map_or("failed", |c| c.as_str()).to_string(),
            r.flags.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let num = |s: &str| -> Result<f64> {
        if s.is_empty() {
            Ok(f64::NAN)
        } else {
            s.parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))
        }
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let classification = match &rec[9] {
            "failed" => None,
            s => Some(s.parse()?),
        };
        out.push(SweepRecord {
            theta: num(&rec[0])?,
            kappa: num(&rec[1])?,
            kappa_c: num(&rec[2])?,
            seed: rec[3]
                .parse()
                .map_err(|_| Error::Parse(format!("bad seed `{}`", &rec[3])))?,
            u_theta: num(&rec[4])?,
            max_u: num(&rec[5])?,
            energy: num(&rec[6])?,
            nehari_residual: num(&rec[7])?,
            t_final: num(&rec[8])?,
            classification,
            flags: if rec[10].is_empty() {
                Vec::new()
            } else {
                rec[10].split(';').map(str::to_string).collect()
            },
        });
    }
    Ok(out)
}

/// Wall-clock data; the only part of the manifest that varies between
/// identical invocations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub timestamp_unix: u64,
    pub wall_seconds_total: f64,
    pub wall_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub code_version: String,
    pub numerics: Numerics,
    pub thetas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub records: usize,
    pub anomalies: usize,
    pub run_info: RunInfo,
}

impl SweepManifest {
    pub fn new(
        numerics: &Numerics,
        thetas: &[f64],
        kappas: &[f64],
        seeds: &[u64],
        outcomes: &[CaseOutcome],
        wall_seconds_total: f64,
    ) -> Self {
        Self {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            numerics: numerics.clone(),
            thetas: thetas.to_vec(),
            kappas: kappas.to_vec(),
            seeds: seeds.to_vec(),
            records: outcomes.len(),
            anomalies: outcomes.iter().filter(|o| o.record.is_anomaly()).count(),
            run_info: RunInfo {
                timestamp_unix: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                wall_seconds_total,
                wall_seconds: outcomes.iter().map(|o| o.wall_seconds).collect(),
            },
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        Ok(())
    }
}
