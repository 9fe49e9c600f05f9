//! Cell and face geometry: volumes, centroids, second moments, vector areas,
//! local frames and face quadrature.

use nalgebra::Matrix3;

use crate::{Error, Result, Vec3};

/// One face quadrature point; weights of a face sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub pos: Vec3,
    pub weight: f64,
    /// Vector area element of the curved face at this point; sums to the face vector area.
    pub area: Vec3,
}

/// Orthonormal triad attached to a face, `nx` being the unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub nx: Vec3,
    pub ny: Vec3,
    pub nz: Vec3,
}

impl Frame {
    /// `ny` is the projection of the global axis least aligned with `n`.
    pub fn from_normal(n: Vec3) -> Frame {
        let a = n.map(f64::abs);
        let k = if a.x <= a.y && a.x <= a.z {
            0
        } else if a.y <= a.z {
            1
        } else {
            2
        };
        let mut e = Vec3::zeros();
        e[k] = 1.0;
        let ny = (e - n * n[k]).normalize();
        let nz = n.cross(&ny);
        Frame { nx: n, ny, nz }
    }

    pub fn identity() -> Frame {
        Frame {
            nx: Vec3::x(),
            ny: Vec3::y(),
            nz: Vec3::z(),
        }
    }

    /// Rows are the local axes, so `m * v` gives local components.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_rows(&[self.nx.transpose(), self.ny.transpose(), self.nz.transpose()])
    }

    #[inline]
    pub fn to_local(&self, v: &Vec3) -> Vec3 {
        Vec3::new(self.nx.dot(v), self.ny.dot(v), self.nz.dot(v))
    }

    #[inline]
    pub fn to_global(&self, v: &Vec3) -> Vec3 {
        self.nx * v.x + self.ny * v.y + self.nz * v.z
    }
}

/// Geometry of a planar polygonal face.
#[derive(Debug, Clone)]
pub struct FaceGeometry {
    pub area: f64,
    pub normal: Vec3,
    pub centroid: Vec3,
    pub quad: Vec<QuadPoint>,
}

/// Vector area of a triangle or quadrilateral given in counter-clockwise order
/// about the outward normal.
pub fn vector_area(p: &[Vec3]) -> Vec3 {
    match p.len() {
        3 => 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])),
        4 => 0.5 * (p[2] - p[0]).cross(&(p[3] - p[1])),
        n => panic!("faces have 3 or 4 nodes, got {n}"),
    }
}

const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Degree-2 exact rule on triangles (3 points), 2x2 tensor Gauss on quads.
pub fn face_quadrature(p: &[Vec3]) -> Result<Vec<QuadPoint>> {
    let area = vector_area(p).norm();
    if !(area > 0.0) {
        return Err(Error::Mesh("degenerate face with zero area".into()));
    }
    match p.len() {
        3 => {
            let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
            let da = vector_area(p) / 3.0;
            Ok(vec![
                QuadPoint { pos: p[0] * a + p[1] * b + p[2] * b, weight: 1.0 / 3.0, area: da },
                QuadPoint { pos: p[0] * b + p[1] * a + p[2] * b, weight: 1.0 / 3.0, area: da },
                QuadPoint { pos: p[0] * b + p[1] * b + p[2] * a, weight: 1.0 / 3.0, area: da },
            ])
        }
        4 => {
            let mut out = Vec::with_capacity(4);
            let mut total = 0.0;
            for &s in &GAUSS2 {
                for &t in &GAUSS2 {
                    let pos = p[0] * ((1.0 - s) * (1.0 - t))
                        + p[1] * (s * (1.0 - t))
                        + p[2] * (s * t)
                        + p[3] * ((1.0 - s) * t);
                    let ds = (p[1] - p[0]) * (1.0 - t) + (p[2] - p[3]) * t;
                    let dt = (p[3] - p[0]) * (1.0 - s) + (p[2] - p[1]) * s;
                    let da = ds.cross(&dt) * 0.25;
                    let jac = da.norm();
                    total += jac;
                    out.push(QuadPoint { pos, weight: jac, area: da });
                }
            }
            for q in &mut out {
                q.weight /= total;
            }
            Ok(out)
        }
        n => Err(Error::Mesh(format!("face with {n} nodes"))),
    }
}

pub fn face_geometry(p: &[Vec3]) -> Result<FaceGeometry> {
    let va = vector_area(p);
    let area = va.norm();
    let quad = face_quadrature(p)?;
    let centroid = quad.iter().fold(Vec3::zeros(), |c, q| c + q.pos * q.weight);
    Ok(FaceGeometry {
        area,
        normal: va / area,
        centroid,
        quad,
    })
}

/// Volume, centroid and central second moment `avg((x-c)(x-c)^T)` of a cell.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub volume: f64,
    pub centroid: Vec3,
    pub second_moment: Matrix3<f64>,
}

pub fn tet_geometry(p: &[Vec3; 4]) -> Result<CellGeometry> {
    let det = (p[1] - p[0]).dot(&(p[2] - p[0]).cross(&(p[3] - p[0])));
    let volume = det / 6.0;
    if !(volume > 0.0) {
        return Err(Error::Mesh(format!("inverted or degenerate tetrahedron (volume {volume:e})")));
    }
    let centroid = (p[0] + p[1] + p[2] + p[3]) * 0.25;
    let mut m = Matrix3::zeros();
    for x in p {
        let d = x - centroid;
        m += d * d.transpose();
    }
    Ok(CellGeometry {
        volume,
        centroid,
        second_moment: m / 20.0,
    })
}

const GAUSS3_X: [f64; 3] = [
    0.112_701_665_379_258_31,
    0.5,
    0.887_298_334_620_741_7,
];
const GAUSS3_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Points and weights (`w * det J`) of a 3x3x3 Gauss rule on the trilinear
/// hexahedron with VTK node order.
pub fn hex_quadrature(p: &[Vec3; 8]) -> Result<Vec<(Vec3, f64)>> {
    let mut out = Vec::with_capacity(27);
    for (i, &r) in GAUSS3_X.iter().enumerate() {
        for (j, &s) in GAUSS3_X.iter().enumerate() {
            for (k, &t) in GAUSS3_X.iter().enumerate() {
                let n = [
                    (1.0 - r) * (1.0 - s) * (1.0 - t),
                    r * (1.0 - s) * (1.0 - t),
                    r * s * (1.0 - t),
                    (1.0 - r) * s * (1.0 - t),
                    (1.0 - r) * (1.0 - s) * t,
                    r * (1.0 - s) * t,
                    r * s * t,
                    (1.0 - r) * s * t,
                ];
                let dr = [
                    -(1.0 - s) * (1.0 - t),
                    (1.0 - s) * (1.0 - t),
                    s * (1.0 - t),
                    -s * (1.0 - t),
                    -(1.0 - s) * t,
                    (1.0 - s) * t,
                    s * t,
                    -s * t,
                ];
                let ds = [
                    -(1.0 - r) * (1.0 - t),
                    -r * (1.0 - t),
                    r * (1.0 - t),
                    (1.0 - r) * (1.0 - t),
                    -(1.0 - r) * t,
                    -r * t,
                    r * t,
                    (1.0 - r) * t,
                ];
                let dt = [
                    -(1.0 - r) * (1.0 - s),
                    -r * (1.0 - s),
                    -r * s,
                    -(1.0 - r) * s,
                    (1.0 - r) * (1.0 - s),
                    r * (1.0 - s),
                    r * s,
                    (1.0 - r) * s,
                ];
                let mut x = Vec3::zeros();
                let (mut jr, mut js, mut jt) = (Vec3::zeros(), Vec3::zeros(), Vec3::zeros());
                for a in 0..8 {
                    x += p[a] * n[a];
                    jr += p[a] * dr[a];
                    js += p[a] * ds[a];
                    jt += p[a] * dt[a];
                }
                let det = jr.dot(&js.cross(&jt));
                if !(det > 0.0) {
                    return Err(Error::Mesh("inverted hexahedron (non-positive Jacobian)".into()));
                }
                out.push((x, det * GAUSS3_W[i] * GAUSS3_W[j] * GAUSS3_W[k]));
            }
        }
    }
    Ok(out)
}

pub fn hex_geometry(p: &[Vec3; 8]) -> Result<CellGeometry> {
    let q = hex_quadrature(p)?;
    let volume: f64 = q.iter().map(|(_, w)| w).sum();
    let centroid = q.iter().fold(Vec3::zeros(), |c, (x, w)| c + x * *w) / volume;
    let mut m = Matrix3::zeros();
    for (x, w) in &q {
        let d = x - centroid;
        m += d * d.transpose() * *w;
    }
    Ok(CellGeometry {
        volume,
        centroid,
        second_moment: m / volume,
    })
}
