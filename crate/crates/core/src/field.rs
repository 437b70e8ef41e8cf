//! Scalar fields tabulated on uniform interior grids, with masked derivative
//! stencils and a small binary file format.

use crate::boundary::Domain;
use crate::geom::Pt;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridGeom {
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridGeom {
    pub fn node(&self, i: usize, j: usize) -> Pt {
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
            0.0,
        ]
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid cell containing `x`, if in range.
    pub fn locate(&self, x: Pt) -> Option<(usize, usize)> {
        let fi = (x[0] - self.origin[0]) / self.h;
        let fj = (x[1] - self.origin[1]) / self.h;
        if fi < 0.0 || fj < 0.0 {
            return None;
        }
        let i = fi.round() as usize;
        let j = fj.round() as usize;
        if i >= self.nx || j >= self.ny {
            None
        } else {
            Some((i, j))
        }
    }
}

/// A scalar field on the masked interior nodes of a grid. Values at masked
/// out nodes are NaN.
#[derive(Clone, Debug)]
pub struct FieldSample {
    pub geom: GridGeom,
    pub values: Vec<f64>,
    /// Node strictly inside Ω.
    pub mask: Vec<bool>,
    /// δ(node); 0 outside the mask.
    pub delta: Vec<f64>,
}

impl FieldSample {
    /// Build the interior mask for a window over the domain.
    pub fn layout(domain: &Domain, origin: [f64; 2], h: f64, nx: usize, ny: usize) -> Self {
        let geom = GridGeom { origin, h, nx, ny };
        let mut mask = vec![false; geom.len()];
        let mut delta = vec![0.0; geom.len()];
        for j in 0..ny {
            for i in 0..nx {
                let p = geom.node(i, j);
                let sd = domain.signed_dist(p);
                if sd > 0.0 {
                    mask[geom.idx(i, j)] = true;
                    delta[geom.idx(i, j)] = sd;
                }
            }
        }
        FieldSample {
            values: vec![f64::NAN; geom.len()],
            geom,
            mask,
            delta,
        }
    }

    /// Tabulate a closure on the mask.
    pub fn from_fn(
        domain: &Domain,
        origin: [f64; 2],
        h: f64,
        nx: usize,
        ny: usize,
        f: impl Fn(Pt) -> f64,
    ) -> Self {
        let mut fs = Self::layout(domain, origin, h, nx, ny);
        for j in 0..ny {
            for i in 0..nx {
                let id = fs.geom.idx(i, j);
                if fs.mask[id] {
                    fs.values[id] = f(fs.geom.node(i, j));
                }
            }
        }
        fs
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.geom.idx(i, j)]
    }

    #[inline]
    pub fn in_mask(&self, i: i64, j: i64) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.geom.nx
            && (j as usize) < self.geom.ny
            && self.mask[self.geom.idx(i as usize, j as usize)]
    }

    /// Gradient at an interior node: centered differences, one-sided next to
    /// the boundary; stencils never cross ∂Ω.
    pub fn grad(&self, i: usize, j: usize) -> Option<[f64; 2]> {
        if !self.mask[self.geom.idx(i, j)] {
            return None;
        }
        let h = self.geom.h;
        let (i, j) = (i as i64, j as i64);
        let axis = |lo: (i64, i64), hi: (i64, i64)| -> Option<f64> {
            let at = |p: (i64, i64)| self.at(p.0 as usize, p.1 as usize);
            match (self.in_mask(lo.0, lo.1), self.in_mask(hi.0, hi.1)) {
                (true, true) => Some((at(hi) - at(lo)) / (2.0 * h)),
                (true, false) => Some((at((i, j)) - at(lo)) / h),
                (false, true) => Some((at(hi) - at((i, j))) / h),
                (false, false) => None,
            }
        };
        let gx = axis((i - 1, j), (i + 1, j))?;
        let gy = axis((i, j - 1), (i, j + 1))?;
        Some([gx, gy])
    }

    /// Pure second derivatives and the mixed one, centered; requires the full
    /// 3×3 neighborhood in the mask.
    pub fn hessian(&self, i: usize, j: usize) -> Option<[[f64; 2]; 2]> {
        let (ii, jj) = (i as i64, j as i64);
        for di in -1..=1 {
            for dj in -1..=1 {
                if !self.in_mask(ii + di, jj + dj) {
                    return None;
                }
            }
        }
        let h2 = self.geom.h * self.geom.h;
        let v = |di: i64, dj: i64| self.at((ii + di) as usize, (jj + dj) as usize);
        let uxx = (v(1, 0) - 2.0 * v(0, 0) + v(-1, 0)) / h2;
        let uyy = (v(0, 1) - 2.0 * v(0, 0) + v(0, -1)) / h2;
        let uxy = (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / (4.0 * h2);
        Some([[uxx, uxy], [uxy, uyy]])
    }

    /// Bilinear interpolation from masked nodes; NaN if any corner is masked
    /// out.
    pub fn interpolate(&self, x: Pt) -> f64 {
        let fi = (x[0] - self.geom.origin[0]) / self.geom.h;
        let fj = (x[1] - self.geom.origin[1]) / self.geom.h;
        let i0 = fi.floor() as i64;
        let j0 = fj.floor() as i64;
        let tx = fi - i0 as f64;
        let ty = fj - j0 as f64;
        let mut acc = 0.0;
        for (di, dj, w) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            if !self.in_mask(i0 + di, j0 + dj) {
                return f64::NAN;
            }
            acc += w * self.at((i0 + di) as usize, (j0 + dj) as usize);
        }
        acc
    }

    /// Node nearest `x` that lies in the mask.
    pub fn nearest_node(&self, x: Pt) -> Option<(usize, usize)> {
        let (i, j) = self.geom.locate(x)?;
        if self.mask[self.geom.idx(i, j)] {
            return Some((i, j));
        }
        for ring in 1..5i64 {
            for di in -ring..=ring {
                for dj in -ring..=ring {
                    if di.abs() != ring && dj.abs() != ring {
                        continue;
                    }
                    if self.in_mask(i as i64 + di, j as i64 + dj) {
                        return Some(((i as i64 + di) as usize, (j as i64 + dj) as usize));
                    }
                }
            }
        }
        None
    }

    /// Binary format: `u32 nx, u32 ny, f64 h, f64 ox, f64 oy`, then `nx·ny`
    /// row-major doubles (NaN marks masked-out nodes).
    pub fn write_binary(&self, w: &mut impl std::io::Write) -> Result<()> {
        w.write_all(&(self.geom.nx as u32).to_le_bytes())?;
        w.write_all(&(self.geom.ny as u32).to_le_bytes())?;
        w.write_all(&self.geom.h.to_le_bytes())?;
        w.write_all(&self.geom.origin[0].to_le_bytes())?;
        w.write_all(&self.geom.origin[1].to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl std::io::Read) -> Result<Self> {
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let nx = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)?;
        let ny = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let h = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let ox = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let oy = f64::from_le_bytes(b8);
        if nx * ny > 1 << 28 {
            return Err(Error::Format("grid file too large".into()));
        }
        let mut values = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        let mask = values.iter().map(|v| v.is_finite()).collect();
        Ok(FieldSample {
            geom: GridGeom {
                origin: [ox, oy],
                h,
                nx,
                ny,
            },
            values,
            mask,
            delta: vec![0.0; nx * ny],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::shapes;

    #[test]
    fn derivatives_exact_on_quadratics() {
        let d = shapes::unit_square(1e-2);
        let f = |x: Pt| 2.0 * x[0] * x[0] - 3.0 * x[0] * x[1] + x[1] * x[1] + x[0];
        let fs = FieldSample::from_fn(&d, [0.05, 0.05], 0.05, 19, 19, f);
        let (i, j) = (9, 9);
        let x = fs.geom.node(i, j);
        let g = fs.grad(i, j).unwrap();
        assert!((g[0] - (4.0 * x[0] - 3.0 * x[1] + 1.0)).abs() < 1e-10);
        assert!((g[1] - (-3.0 * x[0] + 2.0 * x[1])).abs() < 1e-10);
        let hess = fs.hessian(i, j).unwrap();
        assert!((hess[0][0] - 4.0).abs() < 1e-9);
        assert!((hess[0][1] + 3.0).abs() < 1e-9);
        assert!((hess[1][1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn stencils_respect_mask() {
        let d = shapes::disk(512, 2e-3);
        let fs = FieldSample::from_fn(&d, [-1.0, -1.0], 0.05, 41, 41, |x| x[0]);
        for j in 0..41 {
            for i in 0..41 {
                if fs.mask[fs.geom.idx(i, j)] {
                    // One-sided fallbacks keep stencils inside.
                    if let Some(g) = fs.grad(i, j) {
                        assert!((g[0] - 1.0).abs() < 1e-9 && g[1].abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn binary_round_trip() {
        let d = shapes::unit_square(1e-2);
        let fs = FieldSample::from_fn(&d, [0.1, 0.1], 0.1, 9, 9, |x| x[0] * x[1]);
        let mut buf = Vec::new();
        fs.write_binary(&mut buf).unwrap();
        let back = FieldSample::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back.geom, fs.geom);
        for (a, b) in back.values.iter().zip(&fs.values) {
            assert!(a == b || (a.is_nan() && b.is_nan()));
        }
    }
}
