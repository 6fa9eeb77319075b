//! Structured triangulation of the rectangular glacier domain.
//!
//! The domain `[0, L] x [0, H]` is divided into a regular grid of cells,
//! each split into two 6-node (quadratic) triangles. Midside nodes sit on
//! a fine grid of spacing `h/2`, so a mesh of `nx x nz` cells carries
//! `(2 nx + 1)(2 nz + 1)` nodes. The splitting diagonal alternates per
//! cell row so crack paths are not biased toward one direction.
//!
//! Node numbering runs fastest in `z`, which keeps the bandwidth of the
//! assembled systems proportional to the (short) vertical node count.

use thiserror::Error;

/// Default cap on node count, guarding against accidental huge runs.
pub const DEFAULT_NODE_CAP: usize = 2_000_000;

/// One 6-node triangle: three corners counter-clockwise, then the midside
/// nodes opposite each corner ordering `[v0, v1, v2, m01, m12, m20]`.
pub type Element = [usize; 6];

/// Quadratic edge on the domain boundary: `[end, mid, end]` node indices,
/// ordered along the face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 3],
}

/// Node and edge sets for the four faces of the rectangle.
///
/// Corner nodes carry both adjacent tags; otherwise the sets partition the
/// boundary.
#[derive(Debug, Clone, Default)]
pub struct BoundaryTags {
    pub top_nodes: Vec<usize>,
    pub bottom_nodes: Vec<usize>,
    pub left_nodes: Vec<usize>,
    pub right_nodes: Vec<usize>,
    pub top_edges: Vec<BoundaryEdge>,
    pub bottom_edges: Vec<BoundaryEdge>,
    pub left_edges: Vec<BoundaryEdge>,
    pub right_edges: Vec<BoundaryEdge>,
}

/// Structured quadratic-triangle mesh of the glacier rectangle.
#[derive(Debug, Clone)]
pub struct Mesh {
    /// Node coordinates `(x, z)` in metres.
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    pub boundary: BoundaryTags,
    /// Characteristic element size (cell edge length), m.
    pub h_e: f64,
    pub height: f64,
    pub length: f64,
    /// Cells in x.
    pub nx: usize,
    /// Cells in z.
    pub nz: usize,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Fine-grid column count, `2 nx + 1`.
    pub fn n_cols(&self) -> usize {
        2 * self.nx + 1
    }

    /// Fine-grid rows per column, `2 nz + 1`.
    pub fn n_rows(&self) -> usize {
        2 * self.nz + 1
    }

    /// Node index of fine-grid position `(ix, iz)`.
    pub fn node_at(&self, ix: usize, iz: usize) -> usize {
        ix * self.n_rows() + iz
    }

    /// Integrates `f(x, z)` over the mesh with the element quadrature.
    pub fn integrate(&self, rule: &QuadratureRule, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for elem in &self.elements {
            let geo = ElementGeometry::new(self, elem);
            for (q, w) in rule.points.iter().zip(&rule.weights) {
                let [x, z] = geo.physical_point(q);
                total += w * geo.det_jacobian * f(x, z);
            }
        }
        total
    }
}

/// Quadrature rule on the reference triangle in barycentric coordinates.
///
/// Weights include the reference-triangle area, so they sum to 1/2.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Six-point rule, exact for polynomials up to degree 4. One rule
    /// serves every bilinear form arising from quadratic elements here.
    pub fn degree4() -> Self {
        let a = 0.445_948_490_915_965;
        let b = 0.091_576_213_509_771;
        let wa = 0.223_381_589_678_011 * 0.5;
        let wb = 0.109_951_743_655_322 * 0.5;
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for &(c, w) in &[(a, wa), (b, wb)] {
            let d = 1.0 - 2.0 * c;
            points.push([d, c, c]);
            points.push([c, d, c]);
            points.push([c, c, d]);
            weights.extend_from_slice(&[w, w, w]);
        }
        Self { points, weights }
    }

    /// Three-point 1D Gauss rule on `[0, 1]`, degree 5; used for boundary
    /// edge integrals.
    pub fn edge_gauss3() -> ([f64; 3], [f64; 3]) {
        let s = (0.6f64).sqrt();
        (
            [0.5 * (1.0 - s), 0.5, 0.5 * (1.0 + s)],
            [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
        )
    }
}

/// Quadratic Lagrange shape functions at a barycentric point.
pub fn shape_functions(l: &[f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Shape function derivatives with respect to the barycentric coordinates.
fn shape_gradients_barycentric(l: &[f64; 3]) -> [[f64; 3]; 6] {
    [
        [4.0 * l[0] - 1.0, 0.0, 0.0],
        [0.0, 4.0 * l[1] - 1.0, 0.0],
        [0.0, 0.0, 4.0 * l[2] - 1.0],
        [4.0 * l[1], 4.0 * l[0], 0.0],
        [0.0, 4.0 * l[2], 4.0 * l[1]],
        [4.0 * l[2], 0.0, 4.0 * l[0]],
    ]
}

/// Affine geometry of one element (straight edges, midside nodes at true
/// midpoints): the Jacobian is constant across the element.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    corners: [[f64; 2]; 3],
    /// Gradients of the barycentric coordinates in physical space.
    grad_l: [[f64; 2]; 3],
    /// Determinant of the reference-to-physical Jacobian (twice the area).
    pub det_jacobian: f64,
}

impl ElementGeometry {
    pub fn new(mesh: &Mesh, elem: &Element) -> Self {
        let p0 = mesh.nodes[elem[0]];
        let p1 = mesh.nodes[elem[1]];
        let p2 = mesh.nodes[elem[2]];
        Self::from_corners([p0, p1, p2])
    }

    pub fn from_corners(corners: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = corners;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let inv = 1.0 / det;
        let grad_l = [
            [(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv],
            [(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv],
            [(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv],
        ];
        Self {
            corners,
            grad_l,
            det_jacobian: det,
        }
    }

    pub fn physical_point(&self, l: &[f64; 3]) -> [f64; 2] {
        let mut x = 0.0;
        let mut z = 0.0;
        for (li, p) in l.iter().zip(&self.corners) {
            x += li * p[0];
            z += li * p[1];
        }
        [x, z]
    }

    /// Shape values and physical-coordinate gradients at a barycentric
    /// point.
    pub fn shape_values(&self, l: &[f64; 3]) -> ([f64; 6], [[f64; 2]; 6]) {
        let values = shape_functions(l);
        let dbary = shape_gradients_barycentric(l);
        let mut grads = [[0.0; 2]; 6];
        for i in 0..6 {
            for k in 0..3 {
                grads[i][0] += dbary[i][k] * self.grad_l[k][0];
                grads[i][1] += dbary[i][k] * self.grad_l[k][1];
            }
        }
        (values, grads)
    }
}

/// Shape values with an explicit singular-geometry check, for callers
/// handing in arbitrary corner coordinates.
pub fn shape_values_checked(
    corners: [[f64; 2]; 3],
    l: &[f64; 3],
) -> Result<([f64; 6], [[f64; 2]; 6]), MeshError> {
    let det = (corners[1][0] - corners[0][0]) * (corners[2][1] - corners[0][1])
        - (corners[2][0] - corners[0][0]) * (corners[1][1] - corners[0][1]);
    let scale = corners
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(1.0);
    if det.abs() <= 1e-14 * scale * scale {
        return Err(MeshError::SingularJacobian);
    }
    Ok(ElementGeometry::from_corners(corners).shape_values(l))
}

/// Builds the structured mesh for a rectangle of height `height` and
/// length `length`, targeting cell size `target_h`.
pub fn build_rectangle_mesh(
    height: f64,
    length: f64,
    target_h: f64,
    node_cap: usize,
) -> Result<Mesh, MeshError> {
    if !(height > 0.0 && length > 0.0 && target_h > 0.0) {
        return Err(MeshError::NonPositiveDimension);
    }
    // At least two cells in each direction.
    if target_h > height.min(length) / 2.0 {
        return Err(MeshError::TargetTooCoarse {
            target_h,
            limit: height.min(length) / 2.0,
        });
    }
    let nx = (length / target_h).round().max(1.0) as usize;
    let nz = (height / target_h).round().max(1.0) as usize;
    let n_cols = 2 * nx + 1;
    let n_rows = 2 * nz + 1;
    let n_nodes = n_cols * n_rows;
    if n_nodes > node_cap {
        return Err(MeshError::NodeCapExceeded {
            nodes: n_nodes,
            cap: node_cap,
        });
    }

    let dxf = length / (n_cols - 1) as f64;
    let dzf = height / (n_rows - 1) as f64;
    let mut nodes = Vec::with_capacity(n_nodes);
    for ix in 0..n_cols {
        for iz in 0..n_rows {
            nodes.push([ix as f64 * dxf, iz as f64 * dzf]);
        }
    }

    let at = |ix: usize, iz: usize| ix * n_rows + iz;
    let mid = |a: (usize, usize), b: (usize, usize)| at((a.0 + b.0) / 2, (a.1 + b.1) / 2);
    let make = |c0: (usize, usize), c1: (usize, usize), c2: (usize, usize)| -> Element {
        [
            at(c0.0, c0.1),
            at(c1.0, c1.1),
            at(c2.0, c2.1),
            mid(c0, c1),
            mid(c1, c2),
            mid(c2, c0),
        ]
    };

    let mut elements = Vec::with_capacity(2 * nx * nz);
    for i in 0..nx {
        for j in 0..nz {
            let a = (2 * i, 2 * j);
            let b = (2 * i + 2, 2 * j);
            let c = (2 * i + 2, 2 * j + 2);
            let d = (2 * i, 2 * j + 2);
            if j % 2 == 0 {
                // Diagonal from bottom-left to top-right.
                elements.push(make(a, b, c));
                elements.push(make(a, c, d));
            } else {
                // Diagonal from bottom-right to top-left.
                elements.push(make(a, b, d));
                elements.push(make(b, c, d));
            }
        }
    }

    let mut boundary = BoundaryTags::default();
    for iz in 0..n_rows {
        boundary.left_nodes.push(at(0, iz));
        boundary.right_nodes.push(at(n_cols - 1, iz));
    }
    for ix in 0..n_cols {
        boundary.bottom_nodes.push(at(ix, 0));
        boundary.top_nodes.push(at(ix, n_rows - 1));
    }
    for i in 0..nx {
        boundary.bottom_edges.push(BoundaryEdge {
            nodes: [at(2 * i, 0), at(2 * i + 1, 0), at(2 * i + 2, 0)],
        });
        boundary.top_edges.push(BoundaryEdge {
            nodes: [
                at(2 * i, n_rows - 1),
                at(2 * i + 1, n_rows - 1),
                at(2 * i + 2, n_rows - 1),
            ],
        });
    }
    for j in 0..nz {
        boundary.left_edges.push(BoundaryEdge {
            nodes: [at(0, 2 * j), at(0, 2 * j + 1), at(0, 2 * j + 2)],
        });
        boundary.right_edges.push(BoundaryEdge {
            nodes: [
                at(n_cols - 1, 2 * j),
                at(n_cols - 1, 2 * j + 1),
                at(n_cols - 1, 2 * j + 2),
            ],
        });
    }

    Ok(Mesh {
        nodes,
        elements,
        boundary,
        h_e: (length / nx as f64).max(height / nz as f64),
        height,
        length,
        nx,
        nz,
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh dimensions and target size must be positive")]
    NonPositiveDimension,
    #[error("target element size {target_h} m too coarse; must not exceed {limit} m")]
    TargetTooCoarse { target_h: f64, limit: f64 },
    #[error("mesh would have {nodes} nodes, exceeding the cap of {cap}")]
    NodeCapExceeded { nodes: usize, cap: usize },
    #[error("element geometry has a singular Jacobian")]
    SingularJacobian,
}
