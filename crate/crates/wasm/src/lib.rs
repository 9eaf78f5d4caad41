//! Browser bindings: potential curves, a live Allen-Cahn run drawn to a
//! canvas, and the fiber-map scan of the first eigenfunction.
//!
//! The logic lives in plain Rust types so it can be tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use fhmin::diagnostics::{classify_field, phi_scan, s_phi_bound};
use fhmin::dynamics::{init_random, Integrator, SolverConfig};
use fhmin::field::UNIT_LAMBDA_LENGTH;
use fhmin::{GridGeometry, ModifiedPotential, PotentialParams};
use wasm_bindgen::prelude::*;

/// Samples of `W`, `W̃` and their derivatives on `[-u_max, u_max]`.
#[wasm_bindgen]
pub struct PotentialCurve {
    u: Vec<f64>,
    w: Vec<f64>,
    w_mod: Vec<f64>,
    u_theta: f64,
    u_hat: f64,
    order: usize,
}

#[wasm_bindgen]
impl PotentialCurve {
    pub fn u(&self) -> Vec<f64> {
        self.u.clone()
    }
    /// `NaN` where `|u| > 1`.
    pub fn w(&self) -> Vec<f64> {
        self.w.clone()
    }
    pub fn w_mod(&self) -> Vec<f64> {
        self.w_mod.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn u_theta(&self) -> f64 {
        self.u_theta
    }
    #[wasm_bindgen(getter)]
    pub fn u_hat(&self) -> f64 {
        self.u_hat
    }
    #[wasm_bindgen(getter)]
    pub fn order(&self) -> usize {
        self.order
    }
}

pub fn build_potential_curve(theta: f64, c: f64, u_max: f64, points: usize) -> fhmin::Result<PotentialCurve> {
    let p = PotentialParams::new(theta)?;
    let m = ModifiedPotential::build(&p, c)?;
    let points = points.max(2);
    let u: Vec<f64> = (0..points)
        .map(|k| -u_max + 2.0 * u_max * k as f64 / (points - 1) as f64)
        .collect();
    Ok(PotentialCurve {
        w: u.iter().map(|&x| p.w(x).unwrap_or(f64::NAN)).collect(),
        w_mod: u.iter().map(|&x| m.value(x)).collect(),
        u,
        u_theta: m.u_theta(),
        u_hat: m.u_hat(),
        order: m.order(),
    })
}

#[wasm_bindgen]
pub fn potential_curve(theta: f64, c: f64, u_max: f64, points: usize) -> Result<PotentialCurve, JsError> {
    build_potential_curve(theta, c, u_max, points).map_err(|e| JsError::new(&e.to_string()))
}

/// A forward-Euler run at the largest stable step (times a safety factor).
#[wasm_bindgen]
pub struct Simulation {
    it: Integrator,
    residual: f64,
}

impl Simulation {
    pub fn create(theta: f64, kappa: f64, cells: usize, seed: u64) -> fhmin::Result<Self> {
        let mut cfg = SolverConfig::new(theta, kappa);
        cfg.grid = GridGeometry::new(UNIT_LAMBDA_LENGTH, cells)?;
        cfg.seed = seed;
        cfg.dt = (0.9 * cfg.stability_bound()).min(0.05);
        cfg.validate()?;
        let u0 = init_random(&cfg);
        Ok(Self {
            it: Integrator::new(cfg, u0)?,
            residual: f64::NAN,
        })
    }

    pub fn run(&mut self, steps: u32) -> fhmin::Result<f64> {
        self.residual = self.it.advance(steps as u64)?;
        Ok(self.residual)
    }

    pub fn energy_value(&self) -> fhmin::Result<f64> {
        self.it.flow_energy()
    }
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(theta: f64, kappa: f64, cells: usize, seed: u32) -> Result<Simulation, JsError> {
        Self::create(theta, kappa, cells, seed as u64).map_err(|e| JsError::new(&e.to_string()))
    }

    /// Advances `steps` steps and returns the last flow residual.
    pub fn advance(&mut self, steps: u32) -> Result<f64, JsError> {
        self.run(steps).map_err(|e| JsError::new(&e.to_string()))
    }

    pub fn energy(&self) -> Result<f64, JsError> {
        self.energy_value().map_err(|e| JsError::new(&e.to_string()))
    }

    #[wasm_bindgen(getter)]
    pub fn time(&self) -> f64 {
        self.it.time()
    }

    #[wasm_bindgen(getter)]
    pub fn dt(&self) -> f64 {
        self.it.config().dt
    }

    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.residual
    }

    #[wasm_bindgen(getter)]
    pub fn max_u(&self) -> f64 {
        self.it.field().max()
    }

    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.it.field().geometry().side()
    }

    pub fn classification(&self) -> String {
        classify_field(self.it.field(), self.it.config().trivial_tol).to_string()
    }

    /// RGBA pixels, one per node, `u ∈ [-1, 1]` on a blue-white-red ramp.
    pub fn rgba(&self) -> Vec<u8> {
        rgba(self.it.field().values())
    }
}

pub fn rgba(values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 * values.len());
    for &u in values {
        let t = u.clamp(-1.0, 1.0);
        let (r, g, b) = if t >= 0.0 {
            (1.0, 1.0 - t, 1.0 - t)
        } else {
            (1.0 + t, 1.0 + t, 1.0)
        };
        out.extend([r, g, b].map(|c| (c * 255.0).round() as u8));
        out.push(255);
    }
    out
}

/// `Φ(s)` and `Φ'(s)` along the first eigenfunction with the bound `s_φ`.
#[wasm_bindgen]
pub struct PhiCurve {
    s: Vec<f64>,
    phi: Vec<f64>,
    dphi: Vec<f64>,
    bound: f64,
}

#[wasm_bindgen]
impl PhiCurve {
    pub fn s(&self) -> Vec<f64> {
        self.s.clone()
    }
    pub fn phi(&self) -> Vec<f64> {
        self.phi.clone()
    }
    pub fn dphi(&self) -> Vec<f64> {
        self.dphi.clone()
    }
    /// `NaN` when `κ ≥ κ_c`.
    #[wasm_bindgen(getter)]
    pub fn bound(&self) -> f64 {
        self.bound
    }
}

pub fn build_phi_curve(theta: f64, kappa: f64, s_max: f64, points: usize) -> fhmin::Result<PhiCurve> {
    let p = PotentialParams::new(theta)?;
    let m = ModifiedPotential::build(&p, fhmin::potential::DEFAULT_THRESHOLD_C)?;
    let g = GridGeometry::new(UNIT_LAMBDA_LENGTH, 64)?;
    let phi1 = g.first_eigenfunction();
    let points = points.max(2);
    let s: Vec<f64> = (0..points).map(|k| s_max * k as f64 / (points - 1) as f64).collect();
    let scan = phi_scan(&phi1, kappa, &m, &s)?;
    Ok(PhiCurve {
        s,
        phi: scan.phi,
        dphi: scan.dphi,
        bound: s_phi_bound(theta, kappa, &g).unwrap_or(f64::NAN),
    })
}

#[wasm_bindgen]
pub fn phi_scan_eigenfunction(theta: f64, kappa: f64, s_max: f64, points: usize) -> Result<PhiCurve, JsError> {
    build_phi_curve(theta, kappa, s_max, points).map_err(|e| JsError::new(&e.to_string()))
}
