//! Triangulations of rectangular domains.
//!
//! Meshes are immutable after construction: adjacency, boundary tags,
//! oriented internal edges and a uniform-bin location grid are all built up
//! front. Non-structured meshes come from seeded jitter of a structured
//! grid, which keeps generation deterministic and dependency-free while
//! still breaking the node alignment between forward and inversion meshes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{cast, to_f64, Scalar};

/// Boundary condition tag carried by boundary edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
    Free,
}

/// One of the four sides of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Top,
    Left,
    Right,
}

/// A range along one side of the rectangle (in the varying coordinate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySegment<T> {
    pub side: Side,
    pub lo: T,
    pub hi: T,
}

/// Rectangle with tagged Dirichlet and Neumann boundary segments.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec<T> {
    pub xmin: T,
    pub xmax: T,
    pub ymin: T,
    pub ymax: T,
    pub dirichlet: BoundarySegment<T>,
    pub neumann: BoundarySegment<T>,
}

impl<T: Scalar> DomainSpec<T> {
    /// Rectangle with the whole bottom side Dirichlet and the whole top
    /// side Neumann.
    pub fn with_default_bc(xmin: T, xmax: T, ymin: T, ymax: T) -> Result<Self> {
        let spec = Self {
            xmin,
            xmax,
            ymin,
            ymax,
            dirichlet: BoundarySegment { side: Side::Bottom, lo: xmin, hi: xmax },
            neumann: BoundarySegment { side: Side::Top, lo: xmin, hi: xmax },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn square(half: T) -> Result<Self> {
        Self::with_default_bc(-half, half, -half, half)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xmax > self.xmin) || !(self.ymax > self.ymin) {
            return Err(Error::InvalidArgument("degenerate rectangle".into()));
        }
        let same_side = self.dirichlet.side == self.neumann.side;
        let overlap = same_side
            && self.dirichlet.lo < self.neumann.hi
            && self.neumann.lo < self.dirichlet.hi;
        if overlap {
            return Err(Error::InvalidArgument(
                "Dirichlet and Neumann segments overlap".into(),
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> T {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> T {
        self.ymax - self.ymin
    }

    fn geom_tol(&self) -> T {
        let extent = if self.width() > self.height() { self.width() } else { self.height() };
        cast::<T>(1e-12) * if extent > T::one() { extent } else { T::one() }
    }

    fn on_side(&self, p: [T; 2], side: Side, tol: T) -> bool {
        match side {
            Side::Bottom => (p[1] - self.ymin).abs() <= tol,
            Side::Top => (p[1] - self.ymax).abs() <= tol,
            Side::Left => (p[0] - self.xmin).abs() <= tol,
            Side::Right => (p[0] - self.xmax).abs() <= tol,
        }
    }

    fn in_segment(&self, p: [T; 2], seg: &BoundarySegment<T>, tol: T) -> bool {
        if !self.on_side(p, seg.side, tol) {
            return false;
        }
        let s = match seg.side {
            Side::Bottom | Side::Top => p[0],
            Side::Left | Side::Right => p[1],
        };
        s >= seg.lo - tol && s <= seg.hi + tol
    }

    /// Tags a boundary edge by the geometric predicate on both endpoints.
    pub fn classify_edge(&self, a: [T; 2], b: [T; 2]) -> BoundaryTag {
        let tol = self.geom_tol();
        if self.in_segment(a, &self.dirichlet, tol) && self.in_segment(b, &self.dirichlet, tol) {
            BoundaryTag::Dirichlet
        } else if self.in_segment(a, &self.neumann, tol) && self.in_segment(b, &self.neumann, tol) {
            BoundaryTag::Neumann
        } else {
            BoundaryTag::Free
        }
    }

    /// Arclength of a point along the Neumann segment, measured from the
    /// segment start in the coordinate that varies along the side.
    pub fn neumann_arclength(&self, p: [T; 2]) -> T {
        let s = match self.neumann.side {
            Side::Bottom | Side::Top => p[0],
            Side::Left | Side::Right => p[1],
        };
        s - self.neumann.lo
    }

    pub fn neumann_length(&self) -> T {
        self.neumann.hi - self.neumann.lo
    }
}

/// Boundary edge with its tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// Oriented internal edge between two adjacent triangles (`tri[0] < tri[1]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalEdge<T> {
    pub tri: [usize; 2],
    pub nodes: [usize; 2],
    pub length: T,
    /// Unit normal pointing from `tri[0]` into `tri[1]`.
    pub normal: [T; 2],
}

/// Result of point location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location<T> {
    Inside { triangle: usize, bary: [T; 3] },
    Outside,
}

#[derive(Debug, Clone)]
struct BinGrid {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    cells: Vec<Vec<u32>>,
}

/// Immutable triangulation with adjacency and boundary structure.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    nodes: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<T>,
    boundary_edges: Vec<BoundaryEdge>,
    internal_edges: Vec<InternalEdge<T>>,
    interior_node_flags: Vec<bool>,
    domain: DomainSpec<T>,
    bins: BinGrid,
}

fn signed_area<T: Scalar>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])) * cast::<T>(0.5)
}

impl<T: Scalar> Mesh<T> {
    /// Builds a mesh from raw geometry, computing adjacency, boundary tags
    /// and the location grid. All mesh invariants are checked.
    pub fn from_parts(
        nodes: Vec<[T; 2]>,
        triangles: Vec<[usize; 3]>,
        domain: DomainSpec<T>,
    ) -> Result<Self> {
        domain.validate()?;
        let n_nodes = nodes.len();
        let mut areas = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n_nodes {
                    return Err(Error::Mesh(format!("triangle {t} references missing node {v}")));
                }
            }
            let a = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if !(a > T::zero()) {
                return Err(Error::Mesh(format!(
                    "triangle {t} has non-positive signed area {a:e}"
                )));
            }
            areas.push(a);
        }

        // Edge incidence: unordered node pair -> adjacent triangles.
        let mut edge_map: std::collections::HashMap<(usize, usize), Vec<usize>> =
            std::collections::HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                edge_map.entry(key).or_default().push(t);
            }
        }

        let mut boundary_edges = Vec::new();
        let mut internal_edges = Vec::new();
        let mut keys: Vec<(usize, usize)> = edge_map.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let tris = &edge_map[&key];
            match tris.len() {
                1 => {
                    let tag = domain.classify_edge(nodes[key.0], nodes[key.1]);
                    boundary_edges.push(BoundaryEdge { nodes: [key.0, key.1], tag });
                }
                2 => {
                    let (mut i, mut j) = (tris[0], tris[1]);
                    if i > j {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let (pa, pb) = (nodes[key.0], nodes[key.1]);
                    let ex = pb[0] - pa[0];
                    let ey = pb[1] - pa[1];
                    let length = (ex * ex + ey * ey).sqrt();
                    if length <= T::zero() {
                        return Err(Error::Mesh("zero-length internal edge".into()));
                    }
                    let mut normal = [-ey / length, ex / length];
                    let ci = triangle_centroid(&nodes, triangles[i]);
                    let cj = triangle_centroid(&nodes, triangles[j]);
                    let toward = [cj[0] - ci[0], cj[1] - ci[1]];
                    if normal[0] * toward[0] + normal[1] * toward[1] < T::zero() {
                        normal = [-normal[0], -normal[1]];
                    }
                    internal_edges.push(InternalEdge {
                        tri: [i, j],
                        nodes: [key.0, key.1],
                        length,
                        normal,
                    });
                }
                n => {
                    return Err(Error::Mesh(format!(
                        "edge ({}, {}) shared by {n} triangles",
                        key.0, key.1
                    )))
                }
            }
        }

        let mut interior_node_flags = vec![true; n_nodes];
        for be in &boundary_edges {
            interior_node_flags[be.nodes[0]] = false;
            interior_node_flags[be.nodes[1]] = false;
        }

        // Euler relation for a simply connected triangulated region.
        let v = n_nodes as i64;
        let e = (boundary_edges.len() + internal_edges.len()) as i64;
        let f = triangles.len() as i64;
        if v - e + f != 1 {
            return Err(Error::Mesh(format!(
                "Euler relation violated: V={v}, E={e}, F={f}"
            )));
        }

        // Covering check: triangle areas must sum to the rectangle area.
        let total: T = areas.iter().copied().sum();
        let rect = domain.width() * domain.height();
        if ((total - rect) / rect).abs() > cast::<T>(1e-10) {
            return Err(Error::Mesh(format!(
                "triangle areas sum to {total:e}, domain area is {rect:e}"
            )));
        }

        let bins = build_bins(&nodes, &triangles);
        Ok(Self {
            nodes,
            triangles,
            areas,
            boundary_edges,
            internal_edges,
            interior_node_flags,
            domain,
            bins,
        })
    }

    /// Structured right-triangle grid with optional seeded interior jitter.
    ///
    /// Cells of size about `h` are split along alternating diagonals and
    /// interior nodes are displaced componentwise by uniform offsets of at
    /// most `jitter * h`. Boundary nodes stay put. A draw producing an
    /// inverted triangle is retried with fresh offsets a bounded number of
    /// times before failing.
    pub fn build_structured(spec: &DomainSpec<T>, h: T, jitter: f64, seed: u64) -> Result<Self> {
        spec.validate()?;
        let w = spec.width();
        let ht = spec.height();
        let min_side = if w < ht { w } else { ht };
        if !(h > T::zero()) || h > min_side {
            return Err(Error::InvalidArgument(format!(
                "h must satisfy 0 < h <= {min_side} (got {h})"
            )));
        }
        if !(0.0..0.5).contains(&jitter) {
            return Err(Error::InvalidArgument(format!(
                "jitter must lie in [0, 0.5), got {jitter}"
            )));
        }
        let nx = to_f64(w / h).ceil() as usize;
        let ny = to_f64(ht / h).ceil() as usize;
        let hx = w / cast::<T>(nx as f64);
        let hy = ht / cast::<T>(ny as f64);
        let amp = to_f64(if hx < hy { hx } else { hy }) * jitter;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        const MAX_ATTEMPTS: usize = 20;
        let mut last_err = None;
        for _attempt in 0..MAX_ATTEMPTS {
            let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
            for j in 0..=ny {
                for i in 0..=nx {
                    let mut x = spec.xmin + hx * cast::<T>(i as f64);
                    let mut y = spec.ymin + hy * cast::<T>(j as f64);
                    // exact corners on the far side
                    if i == nx {
                        x = spec.xmax;
                    }
                    if j == ny {
                        y = spec.ymax;
                    }
                    let interior = i > 0 && i < nx && j > 0 && j < ny;
                    if interior && amp > 0.0 {
                        let ox: f64 = rng.gen_range(-amp..=amp);
                        let oy: f64 = rng.gen_range(-amp..=amp);
                        x += cast::<T>(ox);
                        y += cast::<T>(oy);
                    }
                    nodes.push([x, y]);
                }
            }
            let id = |i: usize, j: usize| j * (nx + 1) + i;
            let mut triangles = Vec::with_capacity(2 * nx * ny);
            for j in 0..ny {
                for i in 0..nx {
                    let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                    if (i + j) % 2 == 0 {
                        triangles.push([a, b, c]);
                        triangles.push([a, c, d]);
                    } else {
                        triangles.push([a, b, d]);
                        triangles.push([b, c, d]);
                    }
                }
            }
            match Self::from_parts(nodes, triangles, spec.clone()) {
                Ok(mesh) => return Ok(mesh),
                Err(e) => {
                    if jitter == 0.0 {
                        return Err(e);
                    }
                    last_err = Some(e);
                }
            }
        }
        Err(Error::Mesh(format!(
            "jitter {jitter} kept producing inverted triangles after {MAX_ATTEMPTS} attempts: {}",
            last_err.map(|e| e.to_string()).unwrap_or_default()
        )))
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_interior_nodes(&self) -> usize {
        self.interior_node_flags.iter().filter(|&&f| f).count()
    }

    pub fn node(&self, i: usize) -> [T; 2] {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[[T; 2]] {
        &self.nodes
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn area(&self, t: usize) -> T {
        self.areas[t]
    }

    pub fn total_area(&self) -> T {
        self.areas.iter().copied().sum()
    }

    pub fn centroid(&self, t: usize) -> [T; 2] {
        triangle_centroid(&self.nodes, self.triangles[t])
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// The oriented internal edge set: each adjacent triangle pair appears
    /// exactly once with `tri[0] < tri[1]`.
    pub fn internal_edges(&self) -> &[InternalEdge<T>] {
        &self.internal_edges
    }

    pub fn interior_node_flags(&self) -> &[bool] {
        &self.interior_node_flags
    }

    pub fn is_interior_node(&self, i: usize) -> bool {
        self.interior_node_flags[i]
    }

    pub fn domain(&self) -> &DomainSpec<T> {
        &self.domain
    }

    /// Longest edge in the mesh.
    pub fn max_edge_length(&self) -> T {
        let mut m = T::zero();
        for tri in &self.triangles {
            for k in 0..3 {
                let a = self.nodes[tri[k]];
                let b = self.nodes[tri[(k + 1) % 3]];
                let dx = b[0] - a[0];
                let dy = b[1] - a[1];
                let l = (dx * dx + dy * dy).sqrt();
                if l > m {
                    m = l;
                }
            }
        }
        m
    }

    /// Barycentric coordinates of `p` in triangle `t` (unclamped).
    pub fn barycentric(&self, t: usize, p: [T; 2]) -> [T; 3] {
        let tri = self.triangles[t];
        let (a, b, c) = (self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]);
        let total = self.areas[t];
        let l0 = signed_area(p, b, c) / total;
        let l1 = signed_area(a, p, c) / total;
        let l2 = signed_area(a, b, p) / total;
        [l0, l1, l2]
    }

    /// Point location with the default barycentric tolerance `1e-12`.
    ///
    /// Points on shared edges resolve to the lowest triangle index.
    pub fn locate(&self, p: [T; 2]) -> Location<T> {
        self.locate_with_tol(p, cast::<T>(1e-12))
    }

    pub fn locate_with_tol(&self, p: [T; 2], tol: T) -> Location<T> {
        let neg = -tol;
        let candidates = self.bins.candidates(to_f64(p[0]), to_f64(p[1]));
        for &t in candidates {
            let t = t as usize;
            let bary = self.barycentric(t, p);
            if bary[0] >= neg && bary[1] >= neg && bary[2] >= neg {
                return Location::Inside { triangle: t, bary: clamp_bary(bary) };
            }
        }
        Location::Outside
    }

    /// P1 resampling of nodal component arrays onto another mesh.
    ///
    /// Every target node must land in the source domain within the snap
    /// tolerance `1e-10` (in barycentric units), otherwise the whole
    /// operation fails. Exact on globally affine fields.
    pub fn resample_nodal(
        &self,
        components: &[Vec<T>],
        target: &Mesh<T>,
    ) -> Result<Vec<Vec<T>>> {
        for comp in components {
            if comp.len() != self.num_nodes() {
                return Err(Error::DimensionMismatch(format!(
                    "component has {} values for {} source nodes",
                    comp.len(),
                    self.num_nodes()
                )));
            }
        }
        let snap = cast::<T>(1e-10);
        let mut out = vec![vec![T::zero(); target.num_nodes()]; components.len()];
        for (i, &p) in target.nodes().iter().enumerate() {
            match self.locate_with_tol(p, snap) {
                Location::Inside { triangle, bary } => {
                    let tri = self.triangles[triangle];
                    for (c, comp) in components.iter().enumerate() {
                        out[c][i] = comp[tri[0]] * bary[0]
                            + comp[tri[1]] * bary[1]
                            + comp[tri[2]] * bary[2];
                    }
                }
                Location::Outside => {
                    return Err(Error::OutsideDomain(to_f64(p[0]), to_f64(p[1])));
                }
            }
        }
        Ok(out)
    }
}

fn triangle_centroid<T: Scalar>(nodes: &[[T; 2]], tri: [usize; 3]) -> [T; 2] {
    let third = cast::<T>(1.0 / 3.0);
    [
        (nodes[tri[0]][0] + nodes[tri[1]][0] + nodes[tri[2]][0]) * third,
        (nodes[tri[0]][1] + nodes[tri[1]][1] + nodes[tri[2]][1]) * third,
    ]
}

fn clamp_bary<T: Scalar>(bary: [T; 3]) -> [T; 3] {
    let mut b = bary;
    for x in b.iter_mut() {
        if *x < T::zero() {
            *x = T::zero();
        }
        if *x > T::one() {
            *x = T::one();
        }
    }
    let s = b[0] + b[1] + b[2];
    [b[0] / s, b[1] / s, b[2] / s]
}

fn build_bins<T: Scalar>(nodes: &[[T; 2]], triangles: &[[usize; 3]]) -> BinGrid {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for p in nodes {
        let (x, y) = (to_f64(p[0]), to_f64(p[1]));
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let n = ((triangles.len() as f64 / 2.0).sqrt().ceil() as usize).max(1);
    let (nx, ny) = (n, n);
    let dx = ((xmax - xmin) / nx as f64).max(f64::MIN_POSITIVE);
    let dy = ((ymax - ymin) / ny as f64).max(f64::MIN_POSITIVE);
    let pad = 1e-12 * (1.0 + (xmax - xmin).max(ymax - ymin));
    let mut cells = vec![Vec::new(); nx * ny];
    for (t, tri) in triangles.iter().enumerate() {
        let xs = [to_f64(nodes[tri[0]][0]), to_f64(nodes[tri[1]][0]), to_f64(nodes[tri[2]][0])];
        let ys = [to_f64(nodes[tri[0]][1]), to_f64(nodes[tri[1]][1]), to_f64(nodes[tri[2]][1])];
        let bx0 = bin_index(xs.iter().copied().fold(f64::INFINITY, f64::min) - pad, xmin, dx, nx);
        let bx1 = bin_index(xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad, xmin, dx, nx);
        let by0 = bin_index(ys.iter().copied().fold(f64::INFINITY, f64::min) - pad, ymin, dy, ny);
        let by1 = bin_index(ys.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad, ymin, dy, ny);
        for by in by0..=by1 {
            for bx in bx0..=bx1 {
                cells[by * nx + bx].push(t as u32);
            }
        }
    }
    BinGrid { nx, ny, x0: xmin, y0: ymin, dx, dy, cells }
}

fn bin_index(x: f64, x0: f64, dx: f64, n: usize) -> usize {
    let i = ((x - x0) / dx).floor();
    if i < 0.0 {
        0
    } else if i as usize >= n {
        n - 1
    } else {
        i as usize
    }
}

impl BinGrid {
    fn candidates(&self, x: f64, y: f64) -> &[u32] {
        let bx = bin_index(x, self.x0, self.dx, self.nx);
        let by = bin_index(y, self.y0, self.dy, self.ny);
        &self.cells[by * self.nx + bx]
    }
}
