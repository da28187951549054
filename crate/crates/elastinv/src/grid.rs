//! Structured Cartesian grids used as the measurement record.
//!
//! Forward solutions are sampled onto a node-aligned grid and inversion
//! meshes pick values back up by bilinear interpolation, so the forward and
//! inverse discretizations never share an operator.

use crate::error::{Error, Result};
use crate::mesh::{Location, Mesh};
use crate::scalar::{cast, to_f64, Scalar};

/// Node-centered rectangular grid holding one array per field component.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianGrid<T> {
    pub origin: [T; 2],
    pub spacing: [T; 2],
    /// Node counts per axis (values are stored row-major, x fastest).
    pub shape: [usize; 2],
    pub components: Vec<Vec<T>>,
}

impl<T: Scalar> CartesianGrid<T> {
    /// Samples P1 nodal fields on a grid covering `[xmin, xmax] x [ymin, ymax]`
    /// with spacing at most `h` (node-aligned, endpoints included).
    pub fn sample_from_mesh(
        mesh: &Mesh<T>,
        components: &[Vec<T>],
        rect: [T; 4],
        h: T,
    ) -> Result<Self> {
        let [xmin, xmax, ymin, ymax] = rect;
        if !(h > T::zero()) || !(xmax > xmin) || !(ymax > ymin) {
            return Err(Error::InvalidArgument("bad sampling rectangle or spacing".into()));
        }
        let nx = to_f64((xmax - xmin) / h).ceil() as usize;
        let ny = to_f64((ymax - ymin) / h).ceil() as usize;
        let hx = (xmax - xmin) / cast::<T>(nx as f64);
        let hy = (ymax - ymin) / cast::<T>(ny as f64);
        let shape = [nx + 1, ny + 1];
        let mut out = vec![vec![T::zero(); shape[0] * shape[1]]; components.len()];
        let snap = cast::<T>(1e-10);
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let x = if i == nx { xmax } else { xmin + hx * cast::<T>(i as f64) };
                let y = if j == ny { ymax } else { ymin + hy * cast::<T>(j as f64) };
                match mesh.locate_with_tol([x, y], snap) {
                    Location::Inside { triangle, bary } => {
                        let tri = mesh.triangle(triangle);
                        for (c, comp) in components.iter().enumerate() {
                            out[c][j * shape[0] + i] = comp[tri[0]] * bary[0]
                                + comp[tri[1]] * bary[1]
                                + comp[tri[2]] * bary[2];
                        }
                    }
                    Location::Outside => {
                        return Err(Error::OutsideDomain(to_f64(x), to_f64(y)));
                    }
                }
            }
        }
        Ok(Self { origin: [xmin, ymin], spacing: [hx, hy], shape, components: out })
    }

    /// Bilinear interpolation at a point. The point must lie inside the
    /// grid rectangle (within a relative 1e-10 snap).
    pub fn interpolate(&self, p: [T; 2]) -> Result<Vec<T>> {
        let [nx, ny] = self.shape;
        let fx = (p[0] - self.origin[0]) / self.spacing[0];
        let fy = (p[1] - self.origin[1]) / self.spacing[1];
        let snap = cast::<T>(1e-10) * cast::<T>((nx.max(ny)) as f64);
        if fx < -snap || fy < -snap
            || fx > cast::<T>((nx - 1) as f64) + snap
            || fy > cast::<T>((ny - 1) as f64) + snap
        {
            return Err(Error::OutsideDomain(to_f64(p[0]), to_f64(p[1])));
        }
        let clamp = |f: T, n: usize| -> (usize, T) {
            let max_cell = cast::<T>((n - 2) as f64);
            let mut f0 = f.floor();
            if f0 < T::zero() {
                f0 = T::zero();
            }
            if f0 > max_cell {
                f0 = max_cell;
            }
            let i = to_f64(f0) as usize;
            (i, f - f0)
        };
        let (i, tx) = clamp(fx, nx);
        let (j, ty) = clamp(fy, ny);
        let idx = |ii: usize, jj: usize| jj * nx + ii;
        let one = T::one();
        Ok(self
            .components
            .iter()
            .map(|c| {
                let v00 = c[idx(i, j)];
                let v10 = c[idx(i + 1, j)];
                let v01 = c[idx(i, j + 1)];
                let v11 = c[idx(i + 1, j + 1)];
                v00 * (one - tx) * (one - ty)
                    + v10 * tx * (one - ty)
                    + v01 * (one - tx) * ty
                    + v11 * tx * ty
            })
            .collect())
    }

    /// Interpolates all components at the nodes of a mesh.
    pub fn to_mesh_nodes(&self, mesh: &Mesh<T>) -> Result<Vec<Vec<T>>> {
        let mut out = vec![vec![T::zero(); mesh.num_nodes()]; self.components.len()];
        for (i, &p) in mesh.nodes().iter().enumerate() {
            let vals = self.interpolate(p)?;
            for (c, v) in vals.into_iter().enumerate() {
                out[c][i] = v;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DomainSpec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_round_trip_is_exact_on_affine() {
        let spec = DomainSpec::square(1.0).unwrap();
        let mesh = Mesh::build_structured(&spec, 0.21, 0.2, 3).unwrap();
        let f = |p: [f64; 2]| [1.0 - 2.0 * p[0] + p[1], 0.5 * p[0] + p[1]];
        let comps: Vec<Vec<f64>> = (0..2)
            .map(|c| mesh.nodes().iter().map(|&p| f(p)[c]).collect())
            .collect();
        let grid =
            CartesianGrid::sample_from_mesh(&mesh, &comps, [-1.0, 1.0, -1.0, 1.0], 0.1).unwrap();
        let inner = DomainSpec::with_default_bc(-0.9, 0.9, -0.9, 0.9).unwrap();
        let target = Mesh::build_structured(&inner, 0.37, 0.2, 8).unwrap();
        let vals = grid.to_mesh_nodes(&target).unwrap();
        for (i, &p) in target.nodes().iter().enumerate() {
            assert_abs_diff_eq!(vals[0][i], f(p)[0], epsilon = 1e-12);
            assert_abs_diff_eq!(vals[1][i], f(p)[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn interpolate_rejects_outside() {
        let spec = DomainSpec::square(1.0).unwrap();
        let mesh = Mesh::build_structured(&spec, 0.5, 0.0, 0).unwrap();
        let comps = vec![vec![0.0; mesh.num_nodes()]];
        let grid =
            CartesianGrid::sample_from_mesh(&mesh, &comps, [-1.0, 1.0, -1.0, 1.0], 0.5).unwrap();
        assert!(grid.interpolate([1.5, 0.0]).is_err());
    }
}
