//! Axisymmetric differential operators in spherical coordinates.
//!
//! Central differences in the interior, one-sided second-order stencils on the
//! boundary rows and columns.

use crate::field::{GradientField, ScalarField, VectorField};
use crate::grid::GridError;
use crate::real::Real;

#[derive(Clone, Copy)]
enum Axis {
    Rho,
    Phi,
}

fn diff1<T: Real>(f: &ScalarField<T>, axis: Axis) -> ScalarField<T> {
    let g = f.grid();
    let (n, h) = match axis {
        Axis::Rho => (g.n_rho(), g.h_rho()),
        Axis::Phi => (g.n_phi(), g.h_phi()),
    };
    let at = |i: usize, j: usize, k: usize| match axis {
        Axis::Rho => f.at(k, j),
        Axis::Phi => f.at(i, k),
    };
    let two = T::lit(2.0);
    let (three, four) = (T::lit(3.0), T::lit(4.0));
    ScalarField::from_index_fn(g, |i, j| {
        let k = match axis {
            Axis::Rho => i,
            Axis::Phi => j,
        };
        let u = |m: usize| at(i, j, m);
        if k == 0 {
            (-three * u(0) + four * u(1) - u(2)) / (two * h)
        } else if k + 1 == n {
            (three * u(n - 1) - four * u(n - 2) + u(n - 3)) / (two * h)
        } else {
            (u(k + 1) - u(k - 1)) / (two * h)
        }
    })
}

fn diff2<T: Real>(f: &ScalarField<T>, axis: Axis) -> ScalarField<T> {
    let g = f.grid();
    let (n, h) = match axis {
        Axis::Rho => (g.n_rho(), g.h_rho()),
        Axis::Phi => (g.n_phi(), g.h_phi()),
    };
    let at = |i: usize, j: usize, k: usize| match axis {
        Axis::Rho => f.at(k, j),
        Axis::Phi => f.at(i, k),
    };
    let h2 = h * h;
    let (two, four, five) = (T::lit(2.0), T::lit(4.0), T::lit(5.0));
    ScalarField::from_index_fn(g, |i, j| {
        let k = match axis {
            Axis::Rho => i,
            Axis::Phi => j,
        };
        let u = |m: usize| at(i, j, m);
        if n == 3 {
            (u(0) - two * u(1) + u(2)) / h2
        } else if k == 0 {
            (two * u(0) - five * u(1) + four * u(2) - u(3)) / h2
        } else if k + 1 == n {
            (two * u(n - 1) - five * u(n - 2) + four * u(n - 3) - u(n - 4)) / h2
        } else {
            (u(k + 1) - two * u(k) + u(k - 1)) / h2
        }
    })
}

/// `∂ρ f`.
pub fn d_rho<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    diff1(f, Axis::Rho)
}
/// `∂φ f`.
pub fn d_phi<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    diff1(f, Axis::Phi)
}
/// `∂ρ² f`.
pub fn d_rho2<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    diff2(f, Axis::Rho)
}
/// `∂φ² f`.
pub fn d_phi2<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    diff2(f, Axis::Phi)
}

/// Physical gradient components `(∂ρ f, ρ⁻¹ ∂φ f)`.
pub fn grad_scalar<T: Real>(f: &ScalarField<T>) -> (ScalarField<T>, ScalarField<T>) {
    let g = f.grid();
    let dp = d_phi(f).map_indexed(|i, _, x| x / g.rho(i));
    (d_rho(f), dp)
}

/// Node-wise `|∇f|²`.
pub fn grad_sq<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    let (a, b) = grad_scalar(f);
    a.zip_with(&b, |x, y| x * x + y * y)
}

/// Spherical gradient matrix of a vector field.
pub fn grad_vector<T: Real>(v: &VectorField<T>) -> GradientField<T> {
    let g = v.grid();
    let (vr, vp, vt) = (&v.rho, &v.phi, &v.theta);
    let (dr_r, dr_p, dr_t) = (d_rho(vr), d_rho(vp), d_rho(vt));
    let (dp_r, dp_p, dp_t) = (d_phi(vr), d_phi(vp), d_phi(vt));
    let f = |h: &dyn Fn(usize, usize, T, T) -> T| {
        ScalarField::from_index_fn(g, |i, j| h(i, j, g.rho(i), g.cot(j)))
    };
    let e12 = f(&|i, j, r, _| (dp_r.at(i, j) - vp.at(i, j)) / r);
    let e13 = f(&|i, j, r, _| -vt.at(i, j) / r);
    let e22 = f(&|i, j, r, _| (dp_p.at(i, j) + vr.at(i, j)) / r);
    let e23 = f(&|i, j, r, c| -c * vt.at(i, j) / r);
    let e32 = f(&|i, j, r, _| dp_t.at(i, j) / r);
    let e33 = f(&|i, j, r, c| (vr.at(i, j) + c * vp.at(i, j)) / r);
    GradientField {
        entries: [[dr_r, e12, e13], [dr_p, e22, e23], [dr_t, e32, e33]],
    }
}

/// `ρ⁻² ∂ρ(ρ² v_ρ) + (ρ sin φ)⁻¹ ∂φ(sin φ v_φ)`.
pub fn divergence<T: Real>(v: &VectorField<T>) -> ScalarField<T> {
    let g = v.grid();
    let a = d_rho(&v.rho.map_indexed(|i, _, x| g.rho(i) * g.rho(i) * x));
    let b = d_phi(&v.phi.map_indexed(|_, j, x| g.sin(j) * x));
    ScalarField::from_index_fn(g, |i, j| {
        let r = g.rho(i);
        a.at(i, j) / (r * r) + b.at(i, j) / (r * g.sin(j))
    })
}

/// Vorticity `∇ × v` in spherical components.
pub fn curl<T: Real>(v: &VectorField<T>) -> VectorField<T> {
    let g = v.grid();
    let s_vt = d_phi(&v.theta.map_indexed(|_, j, x| g.sin(j) * x));
    let r_vt = d_rho(&v.theta.map_indexed(|i, _, x| g.rho(i) * x));
    let r_vp = d_rho(&v.phi.map_indexed(|i, _, x| g.rho(i) * x));
    let dp_vr = d_phi(&v.rho);
    let wr = s_vt.map_indexed(|i, j, x| x / (g.rho(i) * g.sin(j)));
    let wp = r_vt.map_indexed(|i, _, x| -x / g.rho(i));
    let wt = ScalarField::from_index_fn(g, |i, j| (r_vp.at(i, j) - dp_vr.at(i, j)) / g.rho(i));
    VectorField { rho: wr, phi: wp, theta: wt }
}

/// Scalar Laplacian `∂ρ² + (2/ρ)∂ρ + ρ⁻²∂φ² + (cot φ/ρ²)∂φ`.
pub fn laplacian_scalar<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    let g = f.grid();
    let (fr, frr, fp, fpp) = (d_rho(f), d_rho2(f), d_phi(f), d_phi2(f));
    let two = T::lit(2.0);
    ScalarField::from_index_fn(g, |i, j| {
        let r = g.rho(i);
        frr.at(i, j) + two / r * fr.at(i, j) + (fpp.at(i, j) + g.cot(j) * fp.at(i, j)) / (r * r)
    })
}

/// Vector Laplacian of a divergence-free field.
pub fn laplacian_divfree<T: Real>(v: &VectorField<T>) -> VectorField<T> {
    let g = v.grid();
    let two = T::lit(2.0);
    let (lr, lp, lt) = (laplacian_scalar(&v.rho), laplacian_scalar(&v.phi), laplacian_scalar(&v.theta));
    let dr_vr = d_rho(&v.rho);
    let dp_vr = d_phi(&v.rho);
    let rho = ScalarField::from_index_fn(g, |i, j| {
        let r = g.rho(i);
        lr.at(i, j) + two / r * dr_vr.at(i, j) + two * v.rho.at(i, j) / (r * r)
    });
    let phi = ScalarField::from_index_fn(g, |i, j| {
        let (r, s) = (g.rho(i), g.sin(j));
        lp.at(i, j) - v.phi.at(i, j) / (r * r * s * s) + two / (r * r) * dp_vr.at(i, j)
    });
    let theta = ScalarField::from_index_fn(g, |i, j| {
        let (r, s) = (g.rho(i), g.sin(j));
        lt.at(i, j) - v.theta.at(i, j) / (r * r * s * s)
    });
    VectorField { rho, phi, theta }
}

/// `b·∇f = v_ρ ∂ρ f + (v_φ/ρ) ∂φ f` for a meridional `b`.
pub fn convect<T: Real>(b: &VectorField<T>, f: &ScalarField<T>) -> ScalarField<T> {
    let g = f.grid();
    let (fr, fp) = (d_rho(f), d_phi(f));
    ScalarField::from_index_fn(g, |i, j| {
        b.rho.at(i, j) * fr.at(i, j) + b.phi.at(i, j) / g.rho(i) * fp.at(i, j)
    })
}

/// `(v·∇)v` including the curvature terms.
pub fn convect_vector<T: Real>(v: &VectorField<T>) -> VectorField<T> {
    let g = v.grid();
    let b = VectorField::meridional(v.rho.clone(), v.phi.clone());
    let (cr, cp, ct) = (convect(&b, &v.rho), convect(&b, &v.phi), convect(&b, &v.theta));
    let rho = ScalarField::from_index_fn(g, |i, j| {
        let (vp, vt) = (v.phi.at(i, j), v.theta.at(i, j));
        cr.at(i, j) - (vp * vp + vt * vt) / g.rho(i)
    });
    let phi = ScalarField::from_index_fn(g, |i, j| {
        let (vr, vp, vt) = (v.rho.at(i, j), v.phi.at(i, j), v.theta.at(i, j));
        cp.at(i, j) + (vr * vp - g.cot(j) * vt * vt) / g.rho(i)
    });
    let theta = ScalarField::from_index_fn(g, |i, j| {
        let (vr, vp, vt) = (v.rho.at(i, j), v.phi.at(i, j), v.theta.at(i, j));
        ct.at(i, j) + (vr + g.cot(j) * vp) * vt / g.rho(i)
    });
    VectorField { rho, phi, theta }
}

/// `(Γ, K, F, Ω) = (ρ sinφ v_θ, ω_ρ/ρ, ω_φ/ρ, ω_θ/(ρ sinφ))`.
#[derive(Debug, Clone)]
pub struct Derived<T> {
    pub gamma: ScalarField<T>,
    pub k: ScalarField<T>,
    pub f: ScalarField<T>,
    pub omega: ScalarField<T>,
}

pub fn derived_quantities<T: Real>(v: &VectorField<T>, w: &VectorField<T>) -> Derived<T> {
    let g = v.grid();
    Derived {
        gamma: v.theta.map_indexed(|i, j, x| g.rho(i) * g.sin(j) * x),
        k: w.rho.map_indexed(|i, _, x| x / g.rho(i)),
        f: w.phi.map_indexed(|i, _, x| x / g.rho(i)),
        omega: w.theta.map_indexed(|i, j, x| x / (g.rho(i) * g.sin(j))),
    }
}

/// Largest boundary values of the slip conditions
/// `v_φ, ∂φv_ρ, ∂φ(sinφ v_θ)` on the walls and `v_ρ, ∂ρ(ρv_φ), ∂ρ(ρv_θ)` on the spheres.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NhlResiduals {
    pub walls: [f64; 3],
    pub spheres: [f64; 3],
}

impl NhlResiduals {
    pub fn max(&self) -> f64 {
        self.walls.iter().chain(&self.spheres).fold(0.0, |m, &x| m.max(x))
    }
}

pub fn nhl_residuals<T: Real>(v: &VectorField<T>) -> NhlResiduals {
    let g = v.grid();
    let dp_vr = d_phi(&v.rho);
    let dp_svt = d_phi(&v.theta.map_indexed(|_, j, x| g.sin(j) * x));
    let dr_rvp = d_rho(&v.phi.map_indexed(|i, _, x| g.rho(i) * x));
    let dr_rvt = d_rho(&v.theta.map_indexed(|i, _, x| g.rho(i) * x));
    let (nr, np) = (g.n_rho(), g.n_phi());
    let edge_max = |f: &ScalarField<T>, walls: bool| -> f64 {
        let nodes: Vec<(usize, usize)> = if walls {
            (0..nr).flat_map(|i| [(i, 0), (i, np - 1)]).collect()
        } else {
            (0..np).flat_map(|j| [(0, j), (nr - 1, j)]).collect()
        };
        nodes.into_iter().fold(0.0, |m, (i, j)| m.max(f.at(i, j).abs().as_f64()))
    };
    NhlResiduals {
        walls: [edge_max(&v.phi, true), edge_max(&dp_vr, true), edge_max(&dp_svt, true)],
        spheres: [edge_max(&v.rho, false), edge_max(&dr_rvp, false), edge_max(&dr_rvt, false)],
    }
}

/// Even-odd-odd part of `v` and the weighted L² norm of the discarded part.
pub fn eoo_project<T: Real>(v: &VectorField<T>) -> Result<(VectorField<T>, T), GridError> {
    let g = v.grid();
    g.require_symmetric()?;
    let half = T::lit(0.5);
    let even = |f: &ScalarField<T>| f.zip_with(&f.reflect(), |a, b| half * (a + b));
    let odd = |f: &ScalarField<T>| f.zip_with(&f.reflect(), |a, b| half * (a - b));
    let p = VectorField { rho: even(&v.rho), phi: odd(&v.phi), theta: odd(&v.theta) };
    let rest = v.sub(&p);
    let res = crate::norms::integrate(&rest.norm_sq()).sqrt();
    Ok((p, res))
}
