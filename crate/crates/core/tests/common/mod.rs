//! Shared oracles: an axisymmetric field defined in Cartesian components and
//! differentiated there with fourth-order central differences, and the
//! closed-form stream-function field of the example data.
#![allow(dead_code)]

use axicone::elliptic::BiotSavart;
use axicone::field::{ScalarField, VectorField};
use axicone::geometry::{spherical_basis, to_cylindrical, MeridianDomain, Spherical};
use axicone::grid::MeridianGrid;
use axicone::norms::l2;
use axicone::ops::*;
use std::f64::consts::{FRAC_PI_6, PI};
use std::sync::Arc;

pub type V3 = [f64; 3];

pub fn grid(n: usize) -> Arc<MeridianGrid<f64>> {
    MeridianGrid::new(MeridianDomain::new(FRAC_PI_6, 2).unwrap(), n, n).unwrap().shared()
}

pub fn orders(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Divergence-free axisymmetric field with swirl, from the Stokes stream
/// function `r² e^{r/2} sin(x₃ + 0.3)` and swirl `r cos(x₃) e^{−r}`.
pub fn field(x: V3) -> V3 {
    let r = x[0].hypot(x[1]);
    let z = x[2] + 0.3;
    let vr = -r * (r / 2.0).exp() * z.cos();
    let v3 = (2.0 + r / 2.0) * (r / 2.0).exp() * z.sin();
    let vt = r * x[2].cos() * (-r).exp();
    let (er, et) = ([x[0] / r, x[1] / r], [-x[1] / r, x[0] / r]);
    [vr * er[0] + vt * et[0], vr * er[1] + vt * et[1], v3]
}

/// Axisymmetric field with nonzero divergence: `r x₃ e_r + (r² x₃²/2) e₃`.
pub fn compressible(x: V3) -> V3 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    [x[0] * x[2], x[1] * x[2], r2 * x[2] * x[2] / 2.0]
}

pub fn scalar(x: V3) -> f64 {
    let r = x[0].hypot(x[1]);
    (1.0 + r * r) * (2.0 * x[2]).sin() + r.powi(3)
}

pub fn point(rho: f64, phi: f64) -> V3 {
    let c = to_cylindrical(Spherical { rho, phi, theta: 0.0 });
    [c.r, 0.0, c.x3]
}

fn shift(x: V3, k: usize, h: f64) -> V3 {
    let mut y = x;
    y[k] += h;
    y
}

/// Fourth-order first derivative `∂_k f`.
pub fn d1<F: Fn(V3) -> f64>(f: &F, x: V3, k: usize) -> f64 {
    let h = 1e-3;
    (-f(shift(x, k, 2.0 * h)) + 8.0 * f(shift(x, k, h)) - 8.0 * f(shift(x, k, -h)) + f(shift(x, k, -2.0 * h))) / (12.0 * h)
}

/// Fourth-order `∂_k² f`.
pub fn d2<F: Fn(V3) -> f64>(f: &F, x: V3, k: usize) -> f64 {
    let h = 1e-2;
    (-f(shift(x, k, 2.0 * h)) + 16.0 * f(shift(x, k, h)) - 30.0 * f(x) + 16.0 * f(shift(x, k, -h)) - f(shift(x, k, -2.0 * h)))
        / (12.0 * h * h)
}

pub fn jacobian(x: V3) -> [[f64; 3]; 3] {
    let mut j = [[0.0; 3]; 3];
    for (i, row) in j.iter_mut().enumerate() {
        for (k, e) in row.iter_mut().enumerate() {
            *e = d1(&|y| field(y)[i], x, k);
        }
    }
    j
}

pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn frame(phi: f64) -> [V3; 3] {
    spherical_basis(phi, 0.0)
}

pub fn project(v: V3, phi: f64) -> V3 {
    frame(phi).map(|e| dot(v, e))
}

pub fn sampled(g: &Arc<MeridianGrid<f64>>, f: impl Fn(f64, f64) -> V3) -> VectorField<f64> {
    VectorField::from_fn(g, |r, p| f(r, p))
}

pub fn velocity(g: &Arc<MeridianGrid<f64>>) -> VectorField<f64> {
    sampled(g, |r, p| project(field(point(r, p)), p))
}

/// Operators checked against the oracle.
pub const OPERATORS: [&str; 7] =
    ["gradient", "divergence", "curl", "vector laplacian", "scalar laplacian", "convection", "scalar gradient"];

/// Largest nodal error of operator `name` on the `n × n` grid.
pub fn operator_error(name: &str, n: usize) -> f64 {
    let g = grid(n);
    match name {
        "gradient" => {
            let num = grad_vector(&velocity(&g));
            let mut worst: f64 = 0.0;
            for (i, j) in g.nodes() {
                let (r, p) = (g.rho(i), g.phi(j));
                let jac = jacobian(point(r, p));
                let e = frame(p);
                for a in 0..3 {
                    for b in 0..3 {
                        let jb = [0, 1, 2].map(|k| dot(jac[k], e[b]));
                        worst = worst.max((num.entry(a, b).at(i, j) - dot(e[a], jb)).abs());
                    }
                }
            }
            worst
        }
        "divergence" => {
            let v = velocity(&g).add(&sampled(&g, |r, p| project(compressible(point(r, p)), p)));
            let num = divergence(&v);
            let mut worst: f64 = 0.0;
            for (i, j) in g.nodes() {
                let x = point(g.rho(i), g.phi(j));
                let exact: f64 = (0..3).map(|k| d1(&|y| field(y)[k] + compressible(y)[k], x, k)).sum();
                worst = worst.max((num.at(i, j) - exact).abs());
            }
            worst
        }
        "curl" => {
            let num = curl(&velocity(&g));
            let exact = sampled(&g, |r, p| {
                let j = jacobian(point(r, p));
                project([j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]], p)
            });
            num.sub(&exact).max_abs()
        }
        "vector laplacian" => {
            let num = laplacian_divfree(&velocity(&g));
            let exact = sampled(&g, |r, p| {
                let x = point(r, p);
                project([0, 1, 2].map(|c| (0..3).map(|k| d2(&|y| field(y)[c], x, k)).sum::<f64>()), p)
            });
            num.sub(&exact).max_abs()
        }
        "scalar laplacian" => {
            let f = ScalarField::from_fn(&g, |r, p| scalar(point(r, p)));
            let exact = ScalarField::from_fn(&g, |r, p| (0..3).map(|k| d2(&scalar, point(r, p), k)).sum::<f64>());
            laplacian_scalar(&f).sub(&exact).max_abs()
        }
        "convection" => {
            let num = convect_vector(&velocity(&g));
            let exact = sampled(&g, |r, p| {
                let x = point(r, p);
                let (j, v) = (jacobian(x), field(x));
                project([0, 1, 2].map(|c| dot(j[c], v)), p)
            });
            num.sub(&exact).max_abs()
        }
        "scalar gradient" => {
            let f = ScalarField::from_fn(&g, |r, p| scalar(point(r, p)));
            let (gr, gp) = grad_scalar(&f);
            let mut worst: f64 = 0.0;
            for (i, j) in g.nodes() {
                let (r, p) = (g.rho(i), g.phi(j));
                let grad = [0, 1, 2].map(|k| d1(&scalar, point(r, p), k));
                let e = frame(p);
                worst = worst.max((gr.at(i, j) - dot(grad, e[0])).abs()).max((gp.at(i, j) - dot(grad, e[1])).abs());
            }
            worst
        }
        other => panic!("unknown operator {other}"),
    }
}

/// Stream-function data of the example: `f_m`, `g` and their derivatives up to second order.
pub struct Stream {
    pub m: f64,
}

impl Stream {
    pub fn f(&self, r: f64) -> [f64; 3] {
        // f = r⁴ a³ b³ with a = r − 1/m, b = r − 1, differentiated by the product rule.
        let a = r - 1.0 / self.m;
        let b = r - 1.0;
        let u = r.powi(4);
        let du = 4.0 * r.powi(3);
        let ddu = 12.0 * r * r;
        let w = a.powi(3) * b.powi(3);
        let dw = 3.0 * a * a * b.powi(3) + 3.0 * a.powi(3) * b * b;
        let ddw = 6.0 * a * b.powi(3) + 18.0 * a * a * b * b + 6.0 * a.powi(3) * b;
        [u * w, du * w + u * dw, ddu * w + 2.0 * du * dw + u * ddw]
    }
    pub fn g(&self, p: f64) -> [f64; 3] {
        let k = PI / FRAC_PI_6;
        let (s, c) = (k * (p - PI / 2.0)).sin_cos();
        [s.powi(3), 3.0 * k * s * s * c, k * k * (6.0 * s * c * c - 3.0 * s.powi(3))]
    }
    pub fn v(&self, r: f64, p: f64) -> [f64; 2] {
        let ([f, df, _], [g, dg, _]) = (self.f(r), self.g(p));
        [f * dg / (r * r * p.sin()), -df * g / (r * p.sin())]
    }
    /// `Ω̃ = ω_θ/(ρ sinφ)` from the closed-form curl.
    pub fn omega(&self, r: f64, p: f64) -> f64 {
        let ([f, _, ddf], [g, dg, ddg]) = (self.f(r), self.g(p));
        let (s, c) = p.sin_cos();
        let wt = -(ddf * g / (r * s) + f * (ddg * s - dg * c) / (r.powi(3) * s * s));
        wt / (r * s)
    }
}

/// Biot-Savart recovery of the stream-function field on the `n × n` grid.
#[derive(Debug, Clone, Copy)]
pub struct RecoveryErrors {
    /// Largest nodal velocity error.
    pub v: f64,
    /// `‖div b‖`.
    pub div: f64,
    /// Harmonic residual of `ρ² div b`.
    pub h: f64,
    /// Largest per-radius mean of `v_ρ`.
    pub mean: f64,
    /// `‖curl(b)_θ − ρ sinφ Ω̃‖`.
    pub curl: f64,
}

pub fn recovery_errors(n: usize) -> RecoveryErrors {
    let st = Stream { m: 2.0 };
    let g = grid(n);
    let om = ScalarField::from_fn(&g, |r, p| st.omega(r, p));
    let (b, audit) = BiotSavart::new(&g).unwrap().assemble_b(&om).unwrap();
    let exact = VectorField::from_fn(&g, |r, p| {
        let v = st.v(r, p);
        [v[0], v[1], 0.0]
    });
    let target = om.map_indexed(|i, j, x| g.rho(i) * g.sin(j) * x);
    RecoveryErrors {
        v: b.sub(&exact).max_abs(),
        div: audit.div_l2,
        h: audit.h_max,
        mean: audit.mean_max,
        curl: l2(&curl(&b).theta.sub(&target)),
    }
}
