//! P0/P1 finite element spaces and assembly.
//!
//! All integrands appearing here are piecewise polynomial of degree at most
//! two, so every element integral is computed in closed form; there is no
//! numerical quadrature anywhere in the assembly path.
//!
//! Degrees of freedom of vector fields interleave components: the dof of
//! node `i`, component `c` is `2 i + c`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linsolve::SpdSolver;
use crate::mesh::Mesh;
use crate::scalar::{cast, Scalar};
use crate::sparse::{Coo, Csr};
use crate::tensor::{canonical, frob_dd, CanonicalKind, SymMat2, Tensor4Sym};

/// Piecewise-constant scalar field (one value per triangle).
#[derive(Debug, Clone)]
pub struct ScalarFieldP0<T> {
    mesh: Arc<Mesh<T>>,
    values: Vec<T>,
}

impl<T: Scalar> ScalarFieldP0<T> {
    pub fn new(mesh: Arc<Mesh<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.num_triangles() {
            return Err(Error::DimensionMismatch(format!(
                "P0 field has {} values for {} triangles",
                values.len(),
                mesh.num_triangles()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Arc<Mesh<T>>, value: T) -> Self {
        let n = mesh.num_triangles();
        Self { mesh, values: vec![value; n] }
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Area-weighted L2 norm.
    pub fn l2_norm(&self) -> T {
        let mut s = T::zero();
        for (t, &v) in self.values.iter().enumerate() {
            s += self.mesh.area(t) * v * v;
        }
        s.sqrt()
    }
}

/// Continuous piecewise-linear vector field (two values per node,
/// interleaved).
#[derive(Debug, Clone)]
pub struct VectorFieldP1<T> {
    mesh: Arc<Mesh<T>>,
    values: Vec<T>,
}

impl<T: Scalar> VectorFieldP1<T> {
    pub fn new(mesh: Arc<Mesh<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != 2 * mesh.num_nodes() {
            return Err(Error::DimensionMismatch(format!(
                "P1 vector field has {} values for {} nodes",
                values.len(),
                mesh.num_nodes()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn zero(mesh: Arc<Mesh<T>>) -> Self {
        let n = 2 * mesh.num_nodes();
        Self { mesh, values: vec![T::zero(); n] }
    }

    /// Builds the nodal interpolant of an analytic vector field.
    pub fn interpolate(mesh: Arc<Mesh<T>>, f: impl Fn([T; 2]) -> [T; 2]) -> Self {
        let mut values = Vec::with_capacity(2 * mesh.num_nodes());
        for &p in mesh.nodes() {
            let v = f(p);
            values.push(v[0]);
            values.push(v[1]);
        }
        Self { mesh, values }
    }

    pub fn from_components(mesh: Arc<Mesh<T>>, comps: &[Vec<T>]) -> Result<Self> {
        if comps.len() != 2 || comps[0].len() != mesh.num_nodes() || comps[1].len() != mesh.num_nodes() {
            return Err(Error::DimensionMismatch("expected two nodal component arrays".into()));
        }
        let mut values = Vec::with_capacity(2 * mesh.num_nodes());
        for i in 0..mesh.num_nodes() {
            values.push(comps[0][i]);
            values.push(comps[1][i]);
        }
        Ok(Self { mesh, values })
    }

    pub fn components(&self) -> [Vec<T>; 2] {
        let n = self.mesh.num_nodes();
        let mut cx = Vec::with_capacity(n);
        let mut cy = Vec::with_capacity(n);
        for i in 0..n {
            cx.push(self.values[2 * i]);
            cy.push(self.values[2 * i + 1]);
        }
        [cx, cy]
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn node_value(&self, i: usize) -> [T; 2] {
        [self.values[2 * i], self.values[2 * i + 1]]
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for &v in &self.values {
            if v.abs() > m {
                m = v.abs();
            }
        }
        m
    }
}

/// Piecewise-constant strain field (one symmetric matrix per triangle).
#[derive(Debug, Clone)]
pub struct StrainFieldP0<T> {
    mesh: Arc<Mesh<T>>,
    values: Vec<SymMat2<T>>,
}

impl<T: Scalar> StrainFieldP0<T> {
    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[SymMat2<T>] {
        &self.values
    }

    /// Area-weighted L2 norm of the strain field.
    pub fn l2_norm(&self) -> T {
        let mut s = T::zero();
        for (t, e) in self.values.iter().enumerate() {
            s += self.mesh.area(t) * frob_dd(e, e);
        }
        s.sqrt()
    }
}

/// Constant gradients of the three nodal hat functions on a triangle.
///
/// Rejects triangles with area below `1e-14`.
pub fn grad_basis<T: Scalar>(mesh: &Mesh<T>, t: usize) -> Result<[[T; 2]; 3]> {
    let area = mesh.area(t);
    if area < cast::<T>(1e-14) {
        return Err(Error::Mesh(format!("triangle {t} is degenerate (area {area:e})")));
    }
    let tri = mesh.triangle(t);
    let p = [mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2])];
    let two_a = area + area;
    let mut g = [[T::zero(); 2]; 3];
    for i in 0..3 {
        let a = p[(i + 1) % 3];
        let b = p[(i + 2) % 3];
        g[i] = [(a[1] - b[1]) / two_a, (b[0] - a[0]) / two_a];
    }
    Ok(g)
}

/// Strain of the vector hat function at a node with gradient `g`, moving in
/// component `comp`.
#[inline]
pub fn strain_basis<T: Scalar>(g: [T; 2], comp: usize) -> SymMat2<T> {
    let half = cast::<T>(0.5);
    match comp {
        0 => SymMat2::new(g[0], T::zero(), g[1] * half),
        _ => SymMat2::new(T::zero(), g[1], g[0] * half),
    }
}

/// Per-triangle symmetric gradient of a P1 vector field. Exact.
pub fn strain_field<T: Scalar>(u: &VectorFieldP1<T>) -> StrainFieldP0<T> {
    let mesh = u.mesh().clone();
    let mut values = Vec::with_capacity(mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let g = grad_basis(&mesh, t).expect("mesh guarantees positive areas");
        let tri = mesh.triangle(t);
        let mut e = SymMat2::zero();
        for (k, &node) in tri.iter().enumerate() {
            let v = u.node_value(node);
            // grad u = sum_k v_k (x) g_k ; take the symmetric part
            e.a11 += v[0] * g[k][0];
            e.a22 += v[1] * g[k][1];
            e.a12 += (v[0] * g[k][1] + v[1] * g[k][0]) * cast::<T>(0.5);
        }
        values.push(e);
    }
    StrainFieldP0 { mesh, values }
}

/// Assembles the elastic stiffness matrix for a per-triangle tensor field.
///
/// Entry `(2a+c, 2b+d)` accumulates `area(T) * (C_T : eps_bd) : eps_ac` over
/// the triangles containing both nodes; one-point quadrature is exact since
/// the integrand is constant per triangle. Every triangle tensor must be
/// elliptic.
pub fn assemble_elastic_stiffness<T: Scalar>(
    mesh: &Mesh<T>,
    tensors: &[Tensor4Sym<T>],
) -> Result<Csr<T>> {
    if tensors.len() != mesh.num_triangles() {
        return Err(Error::DimensionMismatch(format!(
            "{} tensors for {} triangles",
            tensors.len(),
            mesh.num_triangles()
        )));
    }
    let n = 2 * mesh.num_nodes();
    let mut coo = Coo::new(n, n);
    for t in 0..mesh.num_triangles() {
        let c_t = &tensors[t];
        if !c_t.is_elliptic() {
            return Err(Error::NonElliptic(t));
        }
        element_stiffness_into(mesh, t, c_t, &mut coo)?;
    }
    Ok(coo.to_csr())
}

fn element_stiffness_into<T: Scalar>(
    mesh: &Mesh<T>,
    t: usize,
    c_t: &Tensor4Sym<T>,
    coo: &mut Coo<T>,
) -> Result<()> {
    let g = grad_basis(mesh, t)?;
    let area = mesh.area(t);
    let tri = mesh.triangle(t);
    let mut eps = [[SymMat2::zero(); 2]; 3];
    let mut sig = [[SymMat2::zero(); 2]; 3];
    for a in 0..3 {
        for c in 0..2 {
            eps[a][c] = strain_basis(g[a], c);
            sig[a][c] = c_t.apply(&eps[a][c]);
        }
    }
    for a in 0..3 {
        for c in 0..2 {
            let row = 2 * tri[a] + c;
            for b in 0..3 {
                for d in 0..2 {
                    let col = 2 * tri[b] + d;
                    coo.push(row, col, area * frob_dd(&sig[b][d], &eps[a][c]));
                }
            }
        }
    }
    Ok(())
}

/// Exact P1 vector mass matrix (block-diagonal over the two components).
pub fn assemble_mass_vec<T: Scalar>(mesh: &Mesh<T>) -> Csr<T> {
    let n = 2 * mesh.num_nodes();
    let mut coo = Coo::new(n, n);
    let twelfth = cast::<T>(1.0 / 12.0);
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangle(t);
        let area = mesh.area(t);
        for a in 0..3 {
            for b in 0..3 {
                let w = if a == b { area * twelfth * cast::<T>(2.0) } else { area * twelfth };
                for c in 0..2 {
                    coo.push(2 * tri[a] + c, 2 * tri[b] + c, w);
                }
            }
        }
    }
    coo.to_csr()
}

/// Vector stiffness matrix of the symmetric-gradient form: the elastic
/// stiffness with constant tensor `2 Ident`, so `u^T L u` equals twice the
/// integrated squared strain. The form couples the two components, so it is
/// assembled jointly.
pub fn assemble_stiffness_vec<T: Scalar>(mesh: &Mesh<T>) -> Csr<T> {
    let two_ident = canonical::<T>(CanonicalKind::Ident).scale(cast::<T>(2.0));
    let tensors = vec![two_ident; mesh.num_triangles()];
    assemble_elastic_stiffness(mesh, &tensors).expect("2*Ident is elliptic")
}

/// Elastic smoother: returns the minimizer of
/// `(1/eps) ||v - u||_M^2 + v^T L v` by solving `(M + eps L) v = M u`.
/// With `eps = 0` the input is returned unchanged. Rigid motions are fixed
/// points for every `eps`.
pub fn elastic_smooth<T: Scalar>(u: &VectorFieldP1<T>, eps: T) -> Result<VectorFieldP1<T>> {
    if eps < T::zero() {
        return Err(Error::InvalidArgument(format!("eps must be >= 0, got {eps}")));
    }
    if eps == T::zero() {
        return Ok(u.clone());
    }
    let mesh = u.mesh();
    let m = assemble_mass_vec(mesh);
    let l = assemble_stiffness_vec(mesh);
    let a = m.add_scaled(&l, eps);
    let rhs = m.matvec_alloc(u.values());
    let solver = SpdSolver::new(&a)?;
    let v = solver.solve(&rhs)?;
    VectorFieldP1::new(u.mesh().clone(), v)
}

/// Index map between interior vector dofs and global dofs.
#[derive(Debug, Clone)]
pub struct InteriorMap {
    /// Global dof for each interior dof (length `2 * N_int`).
    pub dofs: Vec<usize>,
    /// Interior dof for each global dof, `usize::MAX` on the boundary.
    pub global_to_interior: Vec<usize>,
}

impl InteriorMap {
    pub fn num_interior_dofs(&self) -> usize {
        self.dofs.len()
    }

    /// Restricts a global dof vector to interior dofs.
    pub fn restrict<T: Copy>(&self, global: &[T]) -> Vec<T> {
        self.dofs.iter().map(|&g| global[g]).collect()
    }

    /// Scatters interior values into a zero-padded global vector.
    pub fn prolong<T: Scalar>(&self, interior: &[T], n_global: usize) -> Vec<T> {
        let mut out = vec![T::zero(); n_global];
        for (i, &g) in self.dofs.iter().enumerate() {
            out[g] = interior[i];
        }
        out
    }
}

/// Selects the dofs of nodes not on the boundary.
pub fn interior_restriction<T: Scalar>(mesh: &Mesh<T>) -> InteriorMap {
    let mut dofs = Vec::new();
    let mut global_to_interior = vec![usize::MAX; 2 * mesh.num_nodes()];
    for (i, &interior) in mesh.interior_node_flags().iter().enumerate() {
        if interior {
            for c in 0..2 {
                global_to_interior[2 * i + c] = dofs.len();
                dofs.push(2 * i + c);
            }
        }
    }
    InteriorMap { dofs, global_to_interior }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DomainSpec;
    use approx::assert_abs_diff_eq;

    fn mesh(h: f64, jitter: f64, seed: u64) -> Arc<Mesh<f64>> {
        let spec = DomainSpec::square(1.0).unwrap();
        Arc::new(Mesh::build_structured(&spec, h, jitter, seed).unwrap())
    }

    fn reference_triangle() -> Arc<Mesh<f64>> {
        // Two triangles over the unit square; triangle 0 is (0,0),(1,0),(1,1).
        let spec = DomainSpec::with_default_bc(0.0, 1.0, 0.0, 1.0).unwrap();
        Arc::new(Mesh::build_structured(&spec, 1.0, 0.0, 0).unwrap())
    }

    #[test]
    fn gradients_on_reference_triangle() {
        let spec = DomainSpec::with_default_bc(0.0, 1.0, 0.0, 1.0).unwrap();
        // Triangle 0 is the reference element (0,0),(1,0),(0,1).
        let m = Mesh::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            vec![[0, 1, 2], [1, 3, 2]],
            spec,
        )
        .unwrap();
        let g = grad_basis(&m, 0).unwrap();
        assert_eq!(g[0], [-1.0, -1.0]);
        assert_eq!(g[1], [1.0, 0.0]);
        assert_eq!(g[2], [0.0, 1.0]);
    }

    #[test]
    fn gradients_sum_to_zero_and_scale() {
        let m = mesh(0.23, 0.2, 9);
        for t in 0..m.num_triangles() {
            let g = grad_basis(&m, t).unwrap();
            for c in 0..2 {
                let s = g[0][c] + g[1][c] + g[2][c];
                assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
            }
        }
        // Doubling a triangle halves its hat gradients.
        let spec = DomainSpec::with_default_bc(0.0, 2.0, 0.0, 2.0).unwrap();
        let m2 = Mesh::from_parts(
            vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]],
            vec![[0, 1, 2], [1, 3, 2]],
            spec,
        )
        .unwrap();
        let g = grad_basis(&m2, 0).unwrap();
        assert_eq!(g[0], [-0.5, -0.5]);
        assert_eq!(g[1], [0.5, 0.0]);
        assert_eq!(g[2], [0.0, 0.5]);
    }

    #[test]
    fn strain_of_simple_fields() {
        let m = mesh(0.31, 0.15, 4);
        // u = (x, -y): constant strain diag(1, -1).
        let u = VectorFieldP1::interpolate(m.clone(), |p| [p[0], -p[1]]);
        for e in strain_field(&u).values() {
            assert_abs_diff_eq!(e.a11, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(e.a22, -1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(e.a12, 0.0, epsilon = 1e-12);
        }
        // rigid rotation u = (-y, x): zero strain.
        let rot = VectorFieldP1::interpolate(m.clone(), |p| [-p[1], p[0]]);
        for e in strain_field(&rot).values() {
            assert_abs_diff_eq!(e.norm(), 0.0, epsilon = 1e-12);
        }
        // shear u = (y, 0): strain (0, 0, 1/2).
        let sh = VectorFieldP1::interpolate(m, |p| [p[1], 0.0]);
        for e in strain_field(&sh).values() {
            assert_abs_diff_eq!(e.a11, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(e.a22, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(e.a12, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn stiffness_annihilates_rigid_motions() {
        let m = mesh(0.26, 0.2, 12);
        let k = assemble_stiffness_vec(&m);
        for rigid in [
            VectorFieldP1::interpolate(m.clone(), |_| [1.0, 0.0]),
            VectorFieldP1::interpolate(m.clone(), |_| [0.0, 1.0]),
            VectorFieldP1::interpolate(m.clone(), |p| [-p[1], p[0]]),
        ] {
            let y = k.matvec_alloc(rigid.values());
            let ymax = y.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            assert!(ymax < 1e-12, "rigid motion leaked energy: {ymax}");
        }
    }

    #[test]
    fn stiffness_energy_matches_per_element_sum() {
        let m = mesh(0.37, 0.25, 7);
        let l = assemble_stiffness_vec(&m);
        let u = VectorFieldP1::interpolate(m.clone(), |p| {
            [(3.1 * p[0]).sin() * p[1], p[0] * p[0] - 0.4 * p[1]]
        });
        let strains = strain_field(&u);
        let mut direct = 0.0;
        for (t, e) in strains.values().iter().enumerate() {
            direct += 2.0 * m.area(t) * frob_dd(e, e);
        }
        let energy = crate::linsolve::dot(u.values(), &l.matvec_alloc(u.values()));
        assert_abs_diff_eq!(energy, direct, epsilon = 1e-11 * direct.abs());
    }

    #[test]
    fn stiffness_linear_in_tensor() {
        let m = mesh(0.5, 0.0, 0);
        let c1 = crate::tensor::make_isotropic(crate::tensor::IsoParams::new(1.0, 0.3)).unwrap();
        let c2 = crate::tensor::make_isotropic(crate::tensor::IsoParams::new(2.0, 1.0)).unwrap();
        let k1 = assemble_elastic_stiffness(&m, &vec![c1; m.num_triangles()]).unwrap();
        let k2 = assemble_elastic_stiffness(&m, &vec![c2; m.num_triangles()]).unwrap();
        let ksum = assemble_elastic_stiffness(&m, &vec![c1.add(&c2); m.num_triangles()]).unwrap();
        let expect = k1.add_scaled(&k2, 1.0);
        for i in 0..ksum.nrows {
            for (&c, &v) in ksum.row(i).0.iter().zip(ksum.row(i).1) {
                assert_abs_diff_eq!(v, expect.get(i, c), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn stiffness_rejects_non_elliptic() {
        let m = reference_triangle();
        let bad = canonical::<f64>(CanonicalKind::C1);
        let res = assemble_elastic_stiffness(&m, &vec![bad; m.num_triangles()]);
        assert!(matches!(res, Err(Error::NonElliptic(_))));
    }

    #[test]
    fn mass_row_sums_give_domain_area() {
        let m = mesh(0.29, 0.2, 2);
        let mass = assemble_mass_vec(&m);
        // Summing all entries in one component block integrates the constant 1.
        let ones_x = VectorFieldP1::interpolate(m.clone(), |_| [1.0, 0.0]);
        let y = mass.matvec_alloc(ones_x.values());
        let total: f64 = y.iter().sum();
        assert_abs_diff_eq!(total, 4.0, epsilon = 1e-10);
    }

    #[test]
    fn galerkin_symmetry() {
        let m = mesh(0.41, 0.2, 21);
        let k = assemble_stiffness_vec(&m);
        let u = VectorFieldP1::interpolate(m.clone(), |p| [p[0] * p[1], (2.0 * p[1]).cos()]);
        let v = VectorFieldP1::interpolate(m.clone(), |p| [p[1] - p[0], p[0] * p[0]]);
        let kuv = crate::linsolve::dot(v.values(), &k.matvec_alloc(u.values()));
        let kvu = crate::linsolve::dot(u.values(), &k.matvec_alloc(v.values()));
        assert_abs_diff_eq!(kuv, kvu, epsilon = 1e-10 * kuv.abs().max(1.0));
    }

    #[test]
    fn smoother_identity_and_fixed_points() {
        let m = mesh(0.34, 0.2, 6);
        let u = VectorFieldP1::interpolate(m.clone(), |p| [p[0].sin(), p[1] * p[0]]);
        let same = elastic_smooth(&u, 0.0).unwrap();
        assert_eq!(same.values(), u.values());
        // Rigid motions are in the null space of L, hence exact fixed points.
        let rot = VectorFieldP1::interpolate(m.clone(), |p| [1.0 - p[1], p[0] + 2.0]);
        let sm = elastic_smooth(&rot, 0.5).unwrap();
        for (a, b) in sm.values().iter().zip(rot.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn smoother_reduces_strain_energy_and_is_bounded() {
        let m = mesh(0.2, 0.2, 19);
        // noisy field: deterministic pseudo-noise from node index
        let mut vals = Vec::new();
        for i in 0..m.num_nodes() {
            let x = ((i * 2654435761) % 1000) as f64 / 1000.0 - 0.5;
            let y = ((i * 40503) % 997) as f64 / 997.0 - 0.5;
            vals.push(x);
            vals.push(y);
        }
        let u = VectorFieldP1::new(m.clone(), vals).unwrap();
        let v = elastic_smooth(&u, 1e-3).unwrap();
        let su = strain_field(&u).l2_norm();
        let sv = strain_field(&v).l2_norm();
        assert!(sv < su, "smoothing must reduce strain norm: {sv} !< {su}");
        let mass = assemble_mass_vec(&m);
        let nu = crate::linsolve::dot(u.values(), &mass.matvec_alloc(u.values()));
        let nv = crate::linsolve::dot(v.values(), &mass.matvec_alloc(v.values()));
        assert!(nv <= nu * (1.0 + 1e-12), "smoother must be M-bounded");
    }

    #[test]
    fn interior_restriction_counts() {
        // 2x2 cells -> 3x3 nodes -> exactly one interior node.
        let spec = DomainSpec::square(1.0).unwrap();
        let m = Mesh::build_structured(&spec, 1.0, 0.0, 0).unwrap();
        let map = interior_restriction(&m);
        assert_eq!(map.num_interior_dofs(), 2);
        let boundary_nodes = m.interior_node_flags().iter().filter(|&&f| !f).count();
        assert_eq!(boundary_nodes + m.num_interior_nodes(), m.num_nodes());
        // minimal split has no interior nodes at all
        let m2 = Mesh::build_structured(&DomainSpec::with_default_bc(0.0, 1.0, 0.0, 1.0).unwrap(), 1.0, 0.0, 0).unwrap();
        assert_eq!(interior_restriction(&m2).num_interior_dofs(), 0);
    }
}
