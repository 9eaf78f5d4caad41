use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use fhmin::diagnostics::{kappa_c, phi_prime, phi_prime_scale, phi_scan, s_phi_bound};
use fhmin::dynamics::{self, Checkpoint, InitSign, PotentialMode, SolverConfig};
use fhmin::io::{self, FieldSidecar};
use fhmin::potential::{find_u_theta, GuardMode, ModifiedPotential, PotentialParams, DEFAULT_THRESHOLD_C};
use fhmin::sweep::{self, Numerics, ProbeSettings, SweepManifest, SweepRecord};
use fhmin::{Classification, EnergyReport, GridGeometry};
use serde::Serialize;

use crate::cli::*;
use crate::config::{list_or, ConfigFile};

pub const DEFAULT_OUTPUT_DIR: &str = "fhmin-out";

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or input files; exit code 2.
    Usage(String),
    /// Numerical failure or anomaly; exit code 3.
    Numerical(String),
}

impl From<fhmin::Error> for Failure {
    fn from(e: fhmin::Error) -> Self {
        if e.is_validation() || matches!(e, fhmin::Error::Io(_)) {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn load_config(common: &Common) -> Result<ConfigFile, Failure> {
    ConfigFile::load(common.config.as_deref()).map_err(Failure::Usage)
}

fn required<T>(name: &str, flag: Option<T>, file: Option<T>) -> Result<T, Failure> {
    flag.or(file).ok_or_else(|| usage(format!("missing required value `--{name}`")))
}

fn output_dir(common: &Common, file: &ConfigFile) -> Result<PathBuf, Failure> {
    let dir = common
        .output_dir
        .clone()
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn numerics(args: &NumericsArgs, file: &ConfigFile, default_suite: Suite) -> Numerics {
    let mut n = match args.suite.or(file.suite).unwrap_or(default_suite) {
        Suite::Full => Numerics::full(),
        Suite::Fast => Numerics::fast(),
    };
    macro_rules! set {
        ($($flag:ident => $field:ident),* $(,)?) => {
            $(if let Some(v) = args.$flag.or(file.$flag) { n.$field = v; })*
        };
    }
    set!(
        n => cells,
        length => length,
        dt => dt,
        tol => residual_tol,
        t_min => t_min,
        t_max => t_max,
        checkpoint_period => checkpoint_period,
        amplitude => init_amplitude,
        c => modified_c,
        trivial_tol => trivial_tol,
    );
    if let Some(m) = args.mode.or(file.mode) {
        n.potential_mode = match m {
            Mode::Exact => PotentialMode::Exact,
            Mode::Modified => PotentialMode::Modified,
        };
    }
    if let Some(g) = args.guard.or(file.guard) {
        n.guard = match g {
            Guard::Strict => GuardMode::Strict,
            Guard::Clamped => GuardMode::Clamped,
        };
    }
    n
}

fn linspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, Failure> {
    if points < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(usage(format!(
            "need at least 2 points on a finite range with min < max, got {points} on [{lo}, {hi}]"
        )));
    }
    let span = hi - lo;
    let last = (points - 1) as f64;
    Ok((0..points).map(|k| lo + span * k as f64 / last).collect())
}

fn tsv_row(cells: &[String]) -> String {
    let mut s = cells.join("\t");
    s.push('\n');
    s
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:?}")
    }
}

fn display_path(p: &Path) -> String {
    p.display().to_string()
}

pub fn utheta(args: UthetaArgs) -> Outcome {
    let file = load_config(&args.common)?;
    let thetas = list_or(args.theta, file.theta.clone(), Vec::new());
    if thetas.is_empty() {
        return Err(usage("no theta values given"));
    }
    let params = thetas
        .iter()
        .map(|&t| PotentialParams::new(t))
        .collect::<Result<Vec<_>, _>>()?;
    let tol = args.tol.or(file.tol).unwrap_or(1e-14);
    let mut out = tsv_row(&["theta", "u_theta", "iterations", "residual"].map(String::from));
    for p in &params {
        let r = find_u_theta(p, tol)?;
        out.push_str(&tsv_row(&[
            num(p.theta()),
            num(r.u_theta),
            r.iterations.to_string(),
            format!("{:e}", r.residual),
        ]));
    }
    print!("{out}");
    if let Some(path) = args.output.or(file.output) {
        fs::write(path, &out)?;
    }
    Ok(())
}

pub fn potential_table(args: PotentialTableArgs) -> Outcome {
    let file = load_config(&args.common)?;
    let theta = required("theta", args.theta, file.theta_one().map_err(Failure::Usage)?)?;
    let p = PotentialParams::new(theta)?;
    let c = args.c.or(file.c).unwrap_or(DEFAULT_THRESHOLD_C);
    let us = linspace(
        args.u_min.or(file.u_min).unwrap_or(-1.5),
        args.u_max.or(file.u_max).unwrap_or(1.5),
        args.points.or(file.points).unwrap_or(301),
    )?;
    let m = ModifiedPotential::build(&p, c)?;
    let path = match args.output.or(file.output.clone()) {
        Some(p) => p,
        None => output_dir(&args.common, &file)?.join("potential_table.csv"),
    };

    let mut text = String::new();
    writeln!(
        text,
        "# theta={:?} u_theta={:?} u_hat={:?} k={} C={:?}",
        theta,
        m.u_theta(),
        m.u_hat(),
        m.order(),
        c
    )
    .unwrap();
    text.push_str("u,W,dW,d2W,W_mod,dW_mod\n");
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for &u in &us {
        let (wt, dwt) = m.values(u);
        writeln!(
            text,
            "{},{},{},{},{},{}",
            num(u),
            opt(p.w(u).ok()),
            opt(p.dw(u, GuardMode::Strict).ok()),
            opt(p.d2w(u, GuardMode::Strict).ok()),
            num(wt),
            num(dwt)
        )
        .unwrap();
    }
    fs::write(&path, text)?;

    print!(
        "{}{}",
        tsv_row(&["theta", "u_theta", "u_hat", "k", "C", "rows", "file"].map(String::from)),
        tsv_row(&[
            num(theta),
            num(m.u_theta()),
            num(m.u_hat()),
            m.order().to_string(),
            num(c),
            us.len().to_string(),
            display_path(&path),
        ])
    );
    Ok(())
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    config: &'a SolverConfig,
    u_theta: f64,
    kappa_c: f64,
    max_u: f64,
    min_u: f64,
    energy: &'a EnergyReport,
    nehari_residual: f64,
    residual_inf: f64,
    steps: u64,
    t_final: f64,
    t_checkpoint: f64,
    converged: bool,
    classification: Classification,
    flags: &'a [dynamics::RunFlag],
    energy_history: &'a [dynamics::EnergySample],
}

pub fn solve(args: SolveArgs) -> Outcome {
    let file = load_config(&args.common)?;
    let theta = required("theta", args.theta, file.theta_one().map_err(Failure::Usage)?)?;
    let kappa = required("kappa", args.kappa, file.kappa_one().map_err(Failure::Usage)?)?;
    let seed = args.seed.or(file.seed_one().map_err(Failure::Usage)?).unwrap_or(1);
    let n = numerics(&args.numerics, &file, Suite::Full);
    let mut cfg = n.solver_config(theta, kappa, seed)?;
    if args.sign.or(file.sign) == Some(Sign::Negative) {
        cfg.init_sign = InitSign::Negative;
    }
    let format = args.format.or(file.format).unwrap_or(Format::Csv);
    let image = args.image || file.image.unwrap_or(false);
    let checkpoints = args.checkpoints || file.checkpoints.unwrap_or(false);
    let dir = output_dir(&args.common, &file)?;

    let run = if checkpoints {
        let cdir = dir.join("checkpoints");
        fs::create_dir_all(&cdir)?;
        let mut dump = io::checkpoint_dumper(&cdir);
        dynamics::run_from(&cfg, dynamics::init_random(&cfg), &mut dump)?
    } else {
        dynamics::run_from(&cfg, dynamics::init_random(&cfg), &mut |_: &Checkpoint| Ok(()))?
    };

    let params = cfg.params()?;
    let summary = SolveSummary {
        config: &cfg,
        u_theta: find_u_theta(&params, 1e-14)?.u_theta,
        kappa_c: kappa_c(theta, cfg.grid.continuum_lambda1())?,
        max_u: run.max_u,
        min_u: run.min_u,
        energy: &run.energy,
        nehari_residual: run.nehari_residual,
        residual_inf: run.residual_inf,
        steps: run.steps,
        t_final: run.t_final,
        t_checkpoint: run.t_checkpoint,
        converged: run.converged,
        classification: run.classification,
        flags: &run.flags,
        energy_history: &run.energy_history,
    };
    let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    match format {
        Format::Csv => io::save_field_csv(&run.final_field, dir.join("field.csv"))?,
        Format::Json => {
            let mut f = BufWriter::new(File::create(dir.join("field.json"))?);
            serde_json::to_writer(&mut f, &run.final_field)?;
            f.write_all(b"\n")?;
            f.flush()?;
        }
    }
    if image {
        let sidecar = FieldSidecar {
            length: cfg.grid.length(),
            cells: cfg.grid.cells(),
            theta,
            kappa,
            t_final: run.t_final,
        };
        io::save_field_image(&run.final_field, &sidecar, &dir, "image")?;
    }

    print!(
        "{}{}",
        tsv_row(
            &["max_u", "min_u", "energy", "nehari_residual", "t_final", "converged", "classification"]
                .map(String::from)
        ),
        tsv_row(&[
            num(run.max_u),
            num(run.min_u),
            num(run.energy.total),
            num(run.nehari_residual),
            num(run.t_final),
            run.converged.to_string(),
            run.classification.to_string(),
        ])
    );
    if !run.converged {
        eprintln!("warning: t_max reached before the residual fell below {:e}", cfg.residual_tol);
    }
    Ok(())
}

pub fn sweep(args: SweepArgs) -> Outcome {
    let file = load_config(&args.common)?;
    let (preset_thetas, preset_kappas) = match args.preset.or(file.preset) {
        Some(Preset::Table1) => (sweep::TABLE1_THETAS.to_vec(), vec![sweep::TABLE1_KAPPA]),
        Some(Preset::Table2) => (vec![sweep::TABLE2_THETA], sweep::TABLE2_KAPPAS.to_vec()),
        None => (Vec::new(), Vec::new()),
    };
    let thetas = list_or(args.theta, file.theta.clone(), preset_thetas);
    let kappas = list_or(args.kappa, file.kappa.clone(), preset_kappas);
    let seeds = list_or(args.seed, file.seed.clone(), vec![1]);
    if thetas.is_empty() || kappas.is_empty() || seeds.is_empty() {
        return Err(usage("sweep needs nonempty theta, kappa and seed lists (or --preset)"));
    }
    let jobs = args
        .jobs
        .or(file.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let format = args.format.or(file.format).unwrap_or(Format::Csv);
    let n = numerics(&args.numerics, &file, Suite::Full);
    let dir = output_dir(&args.common, &file)?;

    let start = Instant::now();
    let outcomes = sweep::sweep_grid_outcomes(&thetas, &kappas, &seeds, &n, jobs)?;
    let wall = start.elapsed().as_secs_f64();
    let records: Vec<SweepRecord> = outcomes.iter().map(|o| o.record.clone()).collect();

    match format {
        Format::Csv => {
            let f = BufWriter::new(File::create(dir.join("records.csv"))?);
            sweep::write_records_csv(&records, f)?;
        }
        Format::Json => {
            let mut f = BufWriter::new(File::create(dir.join("records.json"))?);
            serde_json::to_writer_pretty(&mut f, &records)?;
            f.write_all(b"\n")?;
            f.flush()?;
        }
    }
    let manifest = SweepManifest::new(&n, &thetas, &kappas, &seeds, &outcomes, wall);
    manifest.write_json(BufWriter::new(File::create(dir.join("manifest.json"))?))?;

    let mut table = Vec::new();
    sweep::write_records_with(&records, &mut table, b'\t')?;
    std::io::stdout().write_all(&table)?;

    if kappas.len() > 1 {
        for &theta in &thetas {
            let verdict = sweep::max_u_strictly_decreasing(&records, theta);
            eprintln!(
                "max_u strictly decreasing in kappa at theta={theta}: {}",
                if verdict { "yes" } else { "no" }
            );
        }
    }
    for r in records.iter().filter(|r| !r.flags.is_empty()) {
        eprintln!(
            "theta={} kappa={} seed={}: {}",
            r.theta,
            r.kappa,
            r.seed,
            r.flags.join(", ")
        );
    }
    if manifest.anomalies > 0 {
        return Err(Failure::Numerical(format!(
            "{} of {} records are anomalous",
            manifest.anomalies, manifest.records
        )));
    }
    Ok(())
}

pub fn phi_scan_cmd(args: PhiScanArgs) -> Outcome {
    let file = load_config(&args.common)?;
    let theta = required("theta", args.theta, file.theta_one().map_err(Failure::Usage)?)?;
    let kappa = required("kappa", args.kappa, file.kappa_one().map_err(Failure::Usage)?)?;
    let p = PotentialParams::new(theta)?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(usage(format!("kappa must be positive, got {kappa}")));
    }
    let c = args.c.or(file.c).unwrap_or(DEFAULT_THRESHOLD_C);
    let length = args.length.or(file.length).unwrap_or(fhmin::field::UNIT_LAMBDA_LENGTH);
    let eigen = args.eigenfunction || file.eigenfunction.unwrap_or(false);
    let field_path = args.field.or(file.field.clone());
    let u = match (eigen, &field_path) {
        (true, None) => GridGeometry::new(length, args.n.or(file.n).unwrap_or(128))?.first_eigenfunction(),
        (false, Some(path)) => io::load_field_csv(path, length)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?,
        (true, Some(_)) => return Err(usage("--eigenfunction and --field are exclusive")),
        (false, None) => return Err(usage("give --eigenfunction or --field <csv>")),
    };
    let s_grid = linspace(0.0, args.smax.or(file.smax).unwrap_or(3.0), args.points.or(file.points).unwrap_or(301))?;
    let m = ModifiedPotential::build(&p, c)?;
    let scan = phi_scan(&u, kappa, &m, &s_grid)?;
    let path = match args.output.or(file.output.clone()) {
        Some(p) => p,
        None => output_dir(&args.common, &file)?.join("phi_scan.csv"),
    };
    scan.write_csv(BufWriter::new(File::create(&path)?))?;

    let d1 = phi_prime(&u, kappa, &m, 1.0);
    let scale = phi_prime_scale(&u, kappa, &m, 1.0);
    let bound = if eigen {
        s_phi_bound(theta, kappa, u.geometry()).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    let (lo, hi) = scan.sign_change.unwrap_or((f64::NAN, f64::NAN));
    print!(
        "{}{}",
        tsv_row(
            &["sign_change_lo", "sign_change_hi", "dphi_at_1", "dphi_at_1_rel", "s_phi_bound", "file"]
                .map(String::from)
        ),
        tsv_row(&[
            num(lo),
            num(hi),
            num(d1),
            num(if scale > 0.0 { d1 / scale } else { 0.0 }),
            num(bound),
            display_path(&path),
        ])
    );
    Ok(())
}

pub fn threshold(args: ThresholdArgs) -> Outcome {
    let file = load_config(&args.common)?;
    let theta = required("theta", args.theta, file.theta_one().map_err(Failure::Usage)?)?;
    let low = required("low", args.low, file.low)?;
    let high = required("high", args.high, file.high)?;
    let resolution = args.resolution.or(file.resolution).unwrap_or(5e-3);
    let seeds = list_or(args.seed, file.seed.clone(), vec![1]);
    let n = numerics(&args.numerics, &file, Suite::Fast);
    let mut probe = ProbeSettings::default();
    if let Some(a) = args.numerics.amplitude.or(file.amplitude) {
        probe.amplitude = a;
    }
    if let Some(h) = args.horizon.or(file.horizon) {
        probe.horizon = h;
    }
    let dir = output_dir(&args.common, &file)?;
    let est = sweep::threshold_probe(theta, (low, high), &seeds, resolution, &n, &probe)?;
    let mut f = BufWriter::new(File::create(dir.join("threshold.json"))?);
    serde_json::to_writer_pretty(&mut f, &est)?;
    f.write_all(b"\n")?;
    f.flush()?;
    print!(
        "{}{}",
        tsv_row(
            &["theta", "low", "high", "estimate", "kappa_c", "kappa_c_discrete", "contains_kappa_c"]
                .map(String::from)
        ),
        tsv_row(&[
            num(theta),
            num(est.low),
            num(est.high),
            num(est.estimate),
            num(est.kappa_c_continuum),
            num(est.kappa_c_discrete),
            est.contains(est.kappa_c_continuum).to_string(),
        ])
    );
    Ok(())
}
