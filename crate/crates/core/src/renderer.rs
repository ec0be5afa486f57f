//! Software triangle rasterizer producing depth, object-index, view-space
//! normal and curvature maps.
//!
//! Pixel (i, j) is sampled at its center (j + 0.5, i + 0.5). Faces are
//! flat-shaded with geometric face normals, rendered double-sided, and
//! oriented toward the camera (n·ray ≤ 0) after the fact.

use crate::geometry::{Camera, Pose, Vec3};
use crate::grid::Grid;
use crate::mesh::Mesh;
use crate::scalar::Real;

/// Sentinel object index for empty pixels.
pub const NO_OBJECT: u32 = u32::MAX;

/// Triangles closer than this camera-frame depth are skipped.
const Z_NEAR: f64 = 1e-6;

/// Per-view depth / object-index / normal buffers.
#[derive(Debug, Clone)]
pub struct ViewMaps<S> {
    pub height: usize,
    pub width: usize,
    /// Meters; +inf where empty.
    pub depth: Vec<S>,
    /// Index into the rendered instance list; `NO_OBJECT` where empty.
    pub object_index: Vec<u32>,
    /// View-space unit normals at covered pixels; zero vector where empty.
    pub normals: Vec<[S; 3]>,
}

impl<S: Real> ViewMaps<S> {
    pub fn empty(camera: &Camera<S>) -> Self {
        let n = camera.width * camera.height;
        Self {
            height: camera.height,
            width: camera.width,
            depth: vec![S::infinity(); n],
            object_index: vec![NO_OBJECT; n],
            normals: vec![[S::zero(); 3]; n],
        }
    }

    #[inline]
    pub fn covered(&self, row: usize, col: usize) -> bool {
        self.object_index[row * self.width + col] != NO_OBJECT
    }

    pub fn depth_grid(&self) -> Grid<S> {
        Grid::from_data(self.height, self.width, self.depth.clone())
    }
}

/// One rendered view: raster buffers plus the derived curvature map.
#[derive(Debug, Clone)]
pub struct RenderedView<S> {
    pub maps: ViewMaps<S>,
    pub curvature: Grid<S>,
}

/// Multi-view render result.
#[derive(Debug, Clone)]
pub struct RenderedViews<S> {
    pub views: Vec<RenderedView<S>>,
}

/// Rasterize posed meshes into a single view (z-buffer).
pub fn rasterize<S: Real>(meshes: &[&Mesh<S>], poses: &[Pose<S>], camera: &Camera<S>) -> ViewMaps<S> {
    let mut maps = ViewMaps::empty(camera);
    for (index, (mesh, pose)) in meshes.iter().zip(poses.iter()).enumerate() {
        rasterize_into(&mut maps, *mesh, pose, camera, index as u32);
    }
    maps
}

/// Rasterize one posed mesh on top of existing buffers.
pub fn rasterize_into<S: Real>(
    maps: &mut ViewMaps<S>,
    mesh: &Mesh<S>,
    pose: &Pose<S>,
    camera: &Camera<S>,
    object_index: u32,
) {
    let object_to_cam = crate::geometry::compose(&camera.world_to_cam, pose);
    let cam_verts: Vec<Vec3<S>> = mesh.vertices.iter().map(|&v| object_to_cam.apply(v)).collect();
    let z_near = S::c(Z_NEAR);
    let (w, h) = (maps.width, maps.height);
    for tri in &mesh.triangles {
        let a = cam_verts[tri[0]];
        let b = cam_verts[tri[1]];
        let c = cam_verts[tri[2]];
        if a.z <= z_near || b.z <= z_near || c.z <= z_near {
            continue;
        }
        let pa = (camera.fx * a.x / a.z + camera.cx, camera.fy * a.y / a.z + camera.cy);
        let pb = (camera.fx * b.x / b.z + camera.cx, camera.fy * b.y / b.z + camera.cy);
        let pc = (camera.fx * c.x / c.z + camera.cx, camera.fy * c.y / c.z + camera.cy);
        let area = (pb.0 - pa.0) * (pc.1 - pa.1) - (pb.1 - pa.1) * (pc.0 - pa.0);
        if area.abs() < S::c(1e-14) {
            continue;
        }
        let sign = if area > S::zero() { S::one() } else { -S::one() };

        let min_x = pa.0.min(pb.0).min(pc.0);
        let max_x = pa.0.max(pb.0).max(pc.0);
        let min_y = pa.1.min(pb.1).min(pc.1);
        let max_y = pa.1.max(pb.1).max(pc.1);
        let c0 = (min_x - S::c(0.5)).ceil().to_f64c().max(0.0) as usize;
        let r0 = (min_y - S::c(0.5)).ceil().to_f64c().max(0.0) as usize;
        if c0 >= w || r0 >= h {
            continue;
        }
        let c1 = ((max_x - S::c(0.5)).floor().to_f64c().max(-1.0) as i64).min(w as i64 - 1);
        let r1 = ((max_y - S::c(0.5)).floor().to_f64c().max(-1.0) as i64).min(h as i64 - 1);
        if c1 < c0 as i64 || r1 < r0 as i64 {
            continue;
        }

        // Camera-frame plane n·X = d; pixel-ray depth is d / (n·v).
        let mut n = b.sub(a).cross(c.sub(a));
        let mut d = n.dot(a);
        if d > S::zero() {
            // Orient toward the camera: n·X ≤ 0 for points on the face.
            n = n.scale(-S::one());
            d = -d;
        }
        let n_unit = n.normalized();
        let n_arr = [n_unit.x, n_unit.y, n_unit.z];

        for row in r0..=(r1 as usize) {
            let py = S::c(row as f64) + S::c(0.5);
            for col in c0..=(c1 as usize) {
                let px = S::c(col as f64) + S::c(0.5);
                let e0 = (pb.0 - pa.0) * (py - pa.1) - (pb.1 - pa.1) * (px - pa.0);
                let e1 = (pc.0 - pb.0) * (py - pb.1) - (pc.1 - pb.1) * (px - pb.0);
                let e2 = (pa.0 - pc.0) * (py - pc.1) - (pa.1 - pc.1) * (px - pc.0);
                if sign * e0 < S::zero() || sign * e1 < S::zero() || sign * e2 < S::zero() {
                    continue;
                }
                let v = Vec3::new((px - camera.cx) / camera.fx, (py - camera.cy) / camera.fy, S::one());
                let nv = n.dot(v);
                if nv.abs() < S::c(1e-300) {
                    continue;
                }
                let depth = d / nv;
                if depth <= z_near {
                    continue;
                }
                let i = row * w + col;
                if depth < maps.depth[i] {
                    maps.depth[i] = depth;
                    maps.object_index[i] = object_index;
                    maps.normals[i] = n_arr;
                }
            }
        }
    }
}

/// Prewitt-based curvature: per-pixel 2-norm of the 6-component gradient
/// of the 3-channel normal map. Uncovered neighbors contribute zero
/// vectors, so silhouette boundaries produce curvature.
pub fn curvature_from_normals<S: Real>(maps: &ViewMaps<S>) -> Grid<S> {
    let mut out = Grid::zeros(maps.height, maps.width);
    curvature_region(maps, 0, maps.height, 0, maps.width, &mut out);
    out
}

/// Compute curvature only for rows `r0..r1` and cols `c0..c1` of `out`.
/// `out` must have the full view dimensions.
pub fn curvature_region<S: Real>(
    maps: &ViewMaps<S>,
    r0: usize,
    r1: usize,
    c0: usize,
    c1: usize,
    out: &mut Grid<S>,
) {
    debug_assert_eq!(out.height, maps.height);
    debug_assert_eq!(out.width, maps.width);
    let (h, w) = (maps.height as i64, maps.width as i64);
    let inv6 = S::one() / S::c(6.0);
    for row in r0..r1 {
        for col in c0..c1 {
            let mut gx = [S::zero(); 3];
            let mut gy = [S::zero(); 3];
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    if dc == 0 && dr == 0 {
                        continue;
                    }
                    let r = row as i64 + dr;
                    let c = col as i64 + dc;
                    if r < 0 || c < 0 || r >= h || c >= w {
                        continue;
                    }
                    let n = &maps.normals[(r * w + c) as usize];
                    // Unit weights here, one 1/6 normalization at the end,
                    // so constant-normal regions cancel exactly.
                    if dc != 0 {
                        for k in 0..3 {
                            gx[k] = if dc > 0 { gx[k] + n[k] } else { gx[k] - n[k] };
                        }
                    }
                    if dr != 0 {
                        for k in 0..3 {
                            gy[k] = if dr > 0 { gy[k] + n[k] } else { gy[k] - n[k] };
                        }
                    }
                }
            }
            let mut sq = S::zero();
            for k in 0..3 {
                let (x, y) = (gx[k] * inv6, gy[k] * inv6);
                sq = sq + x * x + y * y;
            }
            out.set(row, col, sq.sqrt());
        }
    }
}

/// Rasterize and derive curvature for every camera.
pub fn render_curvature<S: Real>(
    meshes: &[&Mesh<S>],
    poses: &[Pose<S>],
    cameras: &[Camera<S>],
) -> RenderedViews<S> {
    let views = cameras
        .iter()
        .map(|camera| {
            let maps = rasterize(meshes, poses, camera);
            let curvature = curvature_from_normals(&maps);
            RenderedView { maps, curvature }
        })
        .collect();
    RenderedViews { views }
}
