//! Square grids on `(0, L)²`, node fields with homogeneous Dirichlet
//! boundary, and the five-point Laplacian.
//!
//! A grid with `N` cells per side has `(N+1)²` nodes, stored row-major with
//! rows indexed by `j` (the y index): node `(i, j)` lives at `j (N+1) + i`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length `√2 π`, for which the continuum `λ₁` equals 1.
pub const UNIT_LAMBDA_LENGTH: f64 = std::f64::consts::SQRT_2 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    length: f64,
    cells: usize,
    spacing: f64,
}

impl GridGeometry {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("L", length, "must be positive and finite"));
        }
        if cells < 4 {
            return Err(Error::invalid("N", cells as f64, "must be at least 4"));
        }
        Ok(Self {
            length,
            cells,
            spacing: length / cells as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Nodes per side, `N + 1`.
    pub fn side(&self) -> usize {
        self.cells + 1
    }

    pub fn node_count(&self) -> usize {
        self.side() * self.side()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.side() + i
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.cells || j == self.cells
    }

    /// Trapezoidal quadrature weight of node `(i, j)` (without the `h²`).
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let edge = |k: usize| if k == 0 || k == self.cells { 0.5 } else { 1.0 };
        edge(i) * edge(j)
    }

    pub fn area(&self) -> f64 {
        self.length * self.length
    }

    /// `λ₁ = 2π²/L²` of the continuum Dirichlet Laplacian.
    pub fn continuum_lambda1(&self) -> f64 {
        2.0 * PI * PI / (self.length * self.length)
    }

    /// Smallest eigenvalue of the negative five-point Laplacian,
    /// `(8/h²) sin²(πh/(2L))`.
    pub fn discrete_lambda1(&self) -> f64 {
        let h = self.spacing;
        let s = (PI * h / (2.0 * self.length)).sin();
        8.0 / (h * h) * s * s
    }

    /// `sin(πx/L) sin(πy/L)` sampled on the nodes.
    pub fn first_eigenfunction(&self) -> ScalarField {
        let l = self.length;
        // boundary rows are exact zeros after sampling
        self.sample(|x, y| (PI * x / l).sin() * (PI * y / l).sin())
            .expect("eigenfunction is finite")
    }

    /// Samples `f(ih, jh)` on every node and zeroes the boundary.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        let h = self.spacing;
        let n = self.side();
        let mut values = vec![0.0; self.node_count()];
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                let v = f(x, y);
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample { x, y });
                }
                if !self.is_boundary(i, j) {
                    values[j * n + i] = v;
                }
            }
        }
        Ok(ScalarField {
            geometry: *self,
            values,
        })
    }
}

/// Node values on a [`GridGeometry`], zero on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(geometry: GridGeometry) -> Self {
        Self {
            values: vec![0.0; geometry.node_count()],
            geometry,
        }
    }

    /// Wraps raw node values. Fails on wrong length, non-finite entries or a
    /// nonzero boundary.
    pub fn from_values(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.node_count() {
            return Err(Error::Shape {
                expected: geometry.node_count(),
                got: values.len(),
            });
        }
        let n = geometry.side();
        for j in 0..n {
            for i in 0..n {
                let v = values[j * n + i];
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample {
                        x: i as f64 * geometry.spacing(),
                        y: j as f64 * geometry.spacing(),
                    });
                }
                if geometry.is_boundary(i, j) && v != 0.0 {
                    return Err(Error::Boundary { i, j, value: v });
                }
            }
        }
        Ok(Self { geometry, values })
    }

    /// Builds a field from interior values, forcing the boundary to zero.
    pub(crate) fn from_raw(geometry: GridGeometry, mut values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), geometry.node_count());
        let mut f = Self {
            geometry,
            values: std::mem::take(&mut values),
        };
        f.zero_boundary();
        f
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Raw storage; callers keep the boundary at zero.
    pub(crate) fn values_vec_mut(&mut self) -> &mut Vec<f64> {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.geometry.index(i, j)]
    }

    /// The interior value at `(i, j)` is set; boundary writes are ignored.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        if !self.geometry.is_boundary(i, j) {
            let k = self.geometry.index(i, j);
            self.values[k] = value;
        }
    }

    pub(crate) fn zero_boundary(&mut self) {
        let n = self.geometry.side();
        let last = n - 1;
        for k in 0..n {
            self.values[k] = 0.0;
            self.values[last * n + k] = 0.0;
            self.values[k * n] = 0.0;
            self.values[k * n + last] = 0.0;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_raw(self.geometry, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        self.map(|v| s * v)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &ScalarField) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Ok(ScalarField::from_raw(self.geometry, values))
    }

    pub(crate) fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.geometry != other.geometry {
            return Err(Error::Shape {
                expected: self.geometry.node_count(),
                got: other.geometry.node_count(),
            });
        }
        Ok(())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Maximum of `|u|` over all nodes.
    pub fn inf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    /// Five-point Laplacian on interior nodes; zero on the boundary.
    pub fn laplacian(&self) -> ScalarField {
        let n = self.geometry.side();
        let inv_h2 = 1.0 / (self.geometry.spacing() * self.geometry.spacing());
        let u = &self.values;
        let mut out = vec![0.0; u.len()];
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let k = j * n + i;
                out[k] = (u[k + 1] + u[k - 1] + u[k + n] + u[k - n] - 4.0 * u[k]) * inv_h2;
            }
        }
        ScalarField::from_raw(self.geometry, out)
    }

    /// `Σ (u_{i+1,j} - u_{i,j})² + Σ (u_{i,j+1} - u_{i,j})²` over all grid
    /// edges, i.e. `∫|∇u|²` for the piecewise-linear edge gradients
    /// (`((Δu)/h)² h²`).
    pub fn edge_gradient_sum(&self) -> f64 {
        let n = self.geometry.side();
        let u = &self.values;
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                if i + 1 < n {
                    let d = u[k + 1] - u[k];
                    s += d * d;
                }
                if j + 1 < n {
                    let d = u[k + n] - u[k];
                    s += d * d;
                }
            }
        }
        s
    }

    /// Edge-gradient inner product `Σ (Δ_e u)(Δ_e v)` over all edges.
    pub fn edge_gradient_dot(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        let n = self.geometry.side();
        let (u, v) = (&self.values, &other.values);
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                if i + 1 < n {
                    s += (u[k + 1] - u[k]) * (v[k + 1] - v[k]);
                }
                if j + 1 < n {
                    s += (u[k + n] - u[k]) * (v[k + n] - v[k]);
                }
            }
        }
        Ok(s)
    }

    /// Trapezoidal quadrature `Σ w_ij f(u_ij) h²`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let g = &self.geometry;
        let n = g.side();
        let h2 = g.spacing() * g.spacing();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += g.weight(i, j) * f(self.values[j * n + i]);
            }
        }
        s * h2
    }

    /// Discrete `L²` inner product with trapezoidal weights.
    pub fn dot(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        let g = &self.geometry;
        let n = g.side();
        let h2 = g.spacing() * g.spacing();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                s += g.weight(i, j) * self.values[k] * other.values[k];
            }
        }
        Ok(s * h2)
    }
}
