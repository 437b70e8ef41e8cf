//! Elliptic coefficient fields `A(X)` with the named presets used by the
//! experiment pipelines.

use crate::geom::Pt;
use crate::{Error, Result};

pub type Matrix2 = [[f64; 2]; 2];

/// A 2×2 coefficient field with optional analytic gradient.
pub struct CoefficientField {
    pub name: String,
    entries: Box<dyn Fn(Pt) -> Matrix2 + Send + Sync>,
    /// `∂_k a_{ij}` as `grad(x)[k][i][j]`, when analytic.
    grad: Option<Box<dyn Fn(Pt) -> [[[f64; 2]; 2]; 2] + Send + Sync>>,
    /// Declared ellipticity constant Λ.
    pub lambda: f64,
    pub symmetric: bool,
}

impl CoefficientField {
    pub fn at(&self, x: Pt) -> Matrix2 {
        (self.entries)(x)
    }

    pub fn at_transpose(&self, x: Pt) -> Matrix2 {
        let a = self.at(x);
        [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
    }

    /// A constant field? (probe-based, used for fast paths in tests only)
    pub fn apply(&self, x: Pt, v: [f64; 2]) -> [f64; 2] {
        let a = self.at(x);
        [
            a[0][0] * v[0] + a[0][1] * v[1],
            a[1][0] * v[0] + a[1][1] * v[1],
        ]
    }

    /// Frobenius norm of ∇A at `x`; analytic when available, otherwise
    /// centered differences with step `fd`.
    pub fn grad_norm(&self, x: Pt, fd: f64) -> f64 {
        if let Some(g) = &self.grad {
            let t = g(x);
            let mut s = 0.0;
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        s += t[k][i][j] * t[k][i][j];
                    }
                }
            }
            return s.sqrt();
        }
        let mut s = 0.0;
        for k in 0..2 {
            let mut ep = x;
            let mut em = x;
            ep[k] += fd;
            em[k] -= fd;
            let ap = self.at(ep);
            let am = self.at(em);
            for i in 0..2 {
                for j in 0..2 {
                    let d = (ap[i][j] - am[i][j]) / (2.0 * fd);
                    s += d * d;
                }
            }
        }
        s.sqrt()
    }

    /// Measure ellipticity on probe points: the largest Λ with
    /// `Λ⁻¹|ξ|² ≤ Aξ·ξ` and `|Aξ·η| ≤ Λ|ξ||η|` over a direction sweep.
    pub fn verify_ellipticity(&self, probes: &[Pt]) -> f64 {
        let mut lambda: f64 = 1.0;
        for &x in probes {
            for s in 0..16 {
                let t = s as f64 * std::f64::consts::PI / 8.0;
                let xi = [t.cos(), t.sin()];
                let axi = self.apply(x, xi);
                let quad = axi[0] * xi[0] + axi[1] * xi[1];
                lambda = lambda.max(1.0 / quad.max(1e-300));
                let norm = (axi[0] * axi[0] + axi[1] * axi[1]).sqrt();
                lambda = lambda.max(norm);
            }
        }
        lambda
    }

    pub fn identity() -> Self {
        CoefficientField {
            name: "identity".into(),
            entries: Box::new(|_| [[1.0, 0.0], [0.0, 1.0]]),
            grad: Some(Box::new(|_| [[[0.0; 2]; 2]; 2])),
            lambda: 1.0,
            symmetric: true,
        }
    }

    /// `diag(2, 1)`.
    pub fn diag() -> Self {
        CoefficientField {
            name: "diag".into(),
            entries: Box::new(|_| [[2.0, 0.0], [0.0, 1.0]]),
            grad: Some(Box::new(|_| [[[0.0; 2]; 2]; 2])),
            lambda: 2.0,
            symmetric: true,
        }
    }

    /// Constant non-symmetric rotation-like perturbation `I + b·J`.
    pub fn rotating(b: f64) -> Self {
        CoefficientField {
            name: "rotating".into(),
            entries: Box::new(move |_| [[1.0, b], [-b, 1.0]]),
            grad: Some(Box::new(|_| [[[0.0; 2]; 2]; 2])),
            lambda: 1.0 + b.abs(),
            symmetric: false,
        }
    }

    /// Oscillating profile `A(t) = I + (1/2)·sin(log t)·e₁⊗e₁`, frozen below
    /// the floor `t0` so the Carleson content of `|∇A|²t` stays finite. The
    /// second row stays `(0, 1)`, matching the normalized drift form.
    pub fn kp_t_profile(t0: f64) -> Self {
        let f = move |t: f64| {
            let tt = t.max(t0);
            1.0 + 0.5 * tt.ln().sin()
        };
        let entries = move |x: Pt| [[f(x[1]), 0.0], [0.0, 1.0]];
        let grad = move |x: Pt| {
            let mut g = [[[0.0; 2]; 2]; 2];
            if x[1] > t0 {
                g[1][0][0] = 0.5 * x[1].ln().cos() / x[1];
            }
            g
        };
        CoefficientField {
            name: "kp_t_profile".into(),
            entries: Box::new(entries),
            grad: Some(Box::new(grad)),
            lambda: 2.0,
            symmetric: true,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "identity" => Ok(Self::identity()),
            "diag" => Ok(Self::diag()),
            "rotating" => Ok(Self::rotating(0.3)),
            "kp_t_profile" => Ok(Self::kp_t_profile(0.125)),
            other => Err(Error::Input(format!("unknown coefficient preset {other}"))),
        }
    }
}
