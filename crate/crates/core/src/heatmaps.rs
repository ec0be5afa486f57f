//! Center/curvature heatmap synthesis from known scenes, noise corruption,
//! and 2D peak detection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{Camera, Pose, Vec3};
use crate::grid::Grid;
use crate::mesh::Mesh;
use crate::renderer;
use crate::scalar::Real;

/// Single-channel non-negative 2D field tied to a view.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap<S> {
    pub grid: Grid<S>,
    pub view_index: usize,
}

#[derive(Debug, Clone)]
pub struct HeatmapConfig<S> {
    /// Scale factor s_e in the blob-sigma formula.
    pub sigma_scale: S,
    /// Std-dev of additive Gaussian corruption (0 = oracle).
    pub noise_sigma: S,
    /// Neighborhood radius for peak detection (pixels).
    pub peak_min_distance: usize,
    /// Minimum heatmap value for a peak.
    pub peak_threshold: S,
}

impl<S: Real> Default for HeatmapConfig<S> {
    fn default() -> Self {
        Self {
            sigma_scale: S::c(0.5),
            noise_sigma: S::zero(),
            peak_min_distance: 5,
            peak_threshold: S::c(0.3),
        }
    }
}

/// Blob standard deviation in pixels:
/// `sigma = s_e * (mean bbox extents * 100) / distance(center, camera)`.
/// Distance is Euclidean, center to camera origin.
pub fn blob_sigma<S: Real>(sigma_scale: S, mesh: &Mesh<S>, center_world: Vec3<S>, camera: &Camera<S>) -> S {
    let dist = center_world.sub(camera.center_world()).norm();
    sigma_scale * (mesh.mean_bbox_extent() * S::c(100.0)) / dist
}

/// Detected 2D peak: image coordinates of the pixel center, plus its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<S> {
    pub x: S,
    pub y: S,
    pub score: S,
}

/// Splat projected object centers as Gaussian blobs, combined per-pixel by
/// maximum and clamped to [0, 1]. Behind-camera centers are skipped.
pub fn center_heatmap<S: Real>(
    centers_world: &[Vec3<S>],
    mesh_per_center: &[&Mesh<S>],
    camera: &Camera<S>,
    config: &HeatmapConfig<S>,
    view_index: usize,
) -> Heatmap<S> {
    let mut grid = Grid::zeros(camera.height, camera.width);
    for (&center, mesh) in centers_world.iter().zip(mesh_per_center) {
        let Ok(pix) = camera.project(center) else {
            continue;
        };
        let sigma = blob_sigma(config.sigma_scale, mesh, center, camera);
        let radius = sigma * S::c(4.0); // truncation; tail error < 3.4e-4
        let r0 = ((pix.y - radius - S::c(0.5)).floor().to_f64c().max(0.0)) as usize;
        let c0 = ((pix.x - radius - S::c(0.5)).floor().to_f64c().max(0.0)) as usize;
        let r1 = (((pix.y + radius).ceil().to_f64c().max(0.0)) as usize).min(camera.height);
        let c1 = (((pix.x + radius).ceil().to_f64c().max(0.0)) as usize).min(camera.width);
        let inv_two_sigma_sq = S::one() / (S::c(2.0) * sigma * sigma);
        for row in r0..r1 {
            for col in c0..c1 {
                let qx = S::c(col as f64) + S::c(0.5);
                let qy = S::c(row as f64) + S::c(0.5);
                let dx = qx - pix.x;
                let dy = qy - pix.y;
                let v = (-(dx * dx + dy * dy) * inv_two_sigma_sq).exp();
                let cur = grid.get(row, col);
                if v > cur {
                    grid.set(row, col, v.min(S::one()));
                }
            }
        }
    }
    Heatmap { grid, view_index }
}

/// Ground-truth curvature heatmap: renders the scene and takes the
/// curvature map, optionally masked to pixels covered by visible objects.
pub fn curvature_target<S: Real>(
    meshes: &[&Mesh<S>],
    poses: &[Pose<S>],
    camera: &Camera<S>,
    mask_to_visible: bool,
    view_index: usize,
) -> Heatmap<S> {
    let maps = renderer::rasterize(meshes, poses, camera);
    let mut grid = renderer::curvature_from_normals(&maps);
    if mask_to_visible {
        for row in 0..grid.height {
            for col in 0..grid.width {
                if !maps.covered(row, col) {
                    grid.set(row, col, S::zero());
                }
            }
        }
    }
    Heatmap { grid, view_index }
}

/// Add zero-mean Gaussian noise, clamped to [0, clamp_max] (pass
/// `S::infinity()` for curvature maps). Deterministic per seed.
pub fn corrupt<S: Real>(h: &Heatmap<S>, noise_sigma: S, clamp_max: S, rng_seed: u64) -> Heatmap<S>
where
    StandardNormal: Distribution<S>,
{
    if noise_sigma == S::zero() {
        return h.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut grid = h.grid.clone();
    for v in grid.data.iter_mut() {
        let n: S = StandardNormal.sample(&mut rng);
        *v = (*v + n * noise_sigma).max(S::zero()).min(clamp_max);
    }
    Heatmap {
        grid,
        view_index: h.view_index,
    }
}

/// Strict local maxima within a square neighborhood of radius
/// `peak_min_distance`, with value ≥ `peak_threshold`. Among equal values
/// in one neighborhood the smallest (row, col) wins. Sorted by descending
/// score, ties by (row, col).
pub fn detect_peaks<S: Real>(h: &Heatmap<S>, config: &HeatmapConfig<S>) -> Vec<Peak<S>> {
    let g = &h.grid;
    let r = config.peak_min_distance as i64;
    let mut peaks: Vec<(usize, usize, S)> = Vec::new();
    for row in 0..g.height {
        for col in 0..g.width {
            let v = g.get(row, col);
            if v < config.peak_threshold {
                continue;
            }
            let mut is_peak = true;
            'scan: for dr in -r..=r {
                for dc in -r..=r {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let nr = row as i64 + dr;
                    let nc = col as i64 + dc;
                    if nr < 0 || nc < 0 || nr >= g.height as i64 || nc >= g.width as i64 {
                        continue;
                    }
                    let nv = g.get(nr as usize, nc as usize);
                    if nv > v || (nv == v && (nr as usize, nc as usize) < (row, col)) {
                        is_peak = false;
                        break 'scan;
                    }
                }
            }
            if is_peak {
                peaks.push((row, col, v));
            }
        }
    }
    peaks.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then_with(|| (a.0, a.1).cmp(&(b.0, b.1)))
    });
    peaks
        .into_iter()
        .map(|(row, col, score)| Peak {
            x: S::c(col as f64) + S::c(0.5),
            y: S::c(row as f64) + S::c(0.5),
            score,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Mat3;

    type V3 = Vec3<f64>;

    fn camera() -> Camera<f64> {
        // Half-integer principal point: the optical axis hits a pixel center.
        Camera {
            fx: 500.0,
            fy: 500.0,
            cx: 160.5,
            cy: 128.5,
            width: 320,
            height: 256,
            world_to_cam: Pose::identity(),
        }
    }

    fn cube(side: f64) -> Mesh<f64> {
        crate::scene::primitive_mesh(&crate::scene::PrimitiveKind::Cube { side })
            .unwrap()
            .0
    }

    #[test]
    fn single_center_peaks_at_projection_with_value_one() {
        let cam = camera();
        let mesh = cube(0.06);
        let cfg = HeatmapConfig::default();
        let h = center_heatmap(&[V3::new(0.0, 0.0, 0.6)], &[&mesh], &cam, &cfg, 0);
        assert_eq!(h.grid.get(128, 160), 1.0);
        assert!(h.grid.max_value() <= 1.0);
    }

    #[test]
    fn sigma_formula_reference_value() {
        // s_e = 0.5, mean bbox extent 0.06 m, distance 0.6 m → sigma = 5 px.
        let cam = camera();
        let mesh = cube(0.06);
        let sigma = blob_sigma(0.5, &mesh, V3::new(0.0, 0.0, 0.6), &cam);
        assert!((sigma - 5.0).abs() < 1e-12, "sigma = {sigma}");
    }

    #[test]
    fn sigma_scaling_laws() {
        let cam = camera();
        let m1 = cube(0.06);
        let m2 = cube(0.12);
        let s1 = blob_sigma(0.5, &m1, V3::new(0.0, 0.0, 0.6), &cam);
        // Doubling distance halves sigma.
        let s_far = blob_sigma(0.5, &m1, V3::new(0.0, 0.0, 1.2), &cam);
        assert!((s_far - s1 / 2.0).abs() < 1e-12);
        // Doubling extent doubles sigma.
        let s_big = blob_sigma(0.5, &m2, V3::new(0.0, 0.0, 0.6), &cam);
        assert!((s_big - s1 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_centers_are_idempotent_under_max() {
        let cam = camera();
        let mesh = cube(0.06);
        let cfg = HeatmapConfig::default();
        let c = V3::new(0.02, -0.01, 0.6);
        let one = center_heatmap(&[c], &[&mesh], &cam, &cfg, 0);
        let two = center_heatmap(&[c, c], &[&mesh, &mesh], &cam, &cfg, 0);
        assert_eq!(one, two);
    }

    #[test]
    fn behind_camera_center_is_skipped() {
        let cam = camera();
        let mesh = cube(0.06);
        let cfg = HeatmapConfig::default();
        let h = center_heatmap(&[V3::new(0.0, 0.0, -0.6)], &[&mesh], &cam, &cfg, 0);
        assert!(h.grid.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn principal_point_shift_translates_heatmap() {
        let mut cam = camera();
        cam.width = 64;
        cam.height = 64;
        cam.cx = 32.5;
        cam.cy = 32.5;
        let mesh = cube(0.06);
        let cfg = HeatmapConfig::default();
        let c = V3::new(0.0, 0.0, 0.8);
        let h1 = center_heatmap(&[c], &[&mesh], &cam, &cfg, 0);
        let mut cam2 = cam.clone();
        cam2.cx += 3.0;
        cam2.cy += 2.0;
        let h2 = center_heatmap(&[c], &[&mesh], &cam2, &cfg, 0);
        for row in 10..50 {
            for col in 10..50 {
                assert_eq!(h1.grid.get(row, col), h2.grid.get(row + 2, col + 3));
            }
        }
    }

    #[test]
    fn corrupt_zero_sigma_and_determinism() {
        let cam = camera();
        let mesh = cube(0.06);
        let cfg = HeatmapConfig::default();
        let h = center_heatmap(&[V3::new(0.0, 0.0, 0.6)], &[&mesh], &cam, &cfg, 0);
        assert_eq!(corrupt(&h, 0.0, 1.0, 7), h);
        let a = corrupt(&h, 0.05, 1.0, 7);
        let b = corrupt(&h, 0.05, 1.0, 7);
        assert_eq!(a, b);
        assert_ne!(a, h);
    }

    #[test]
    fn corrupt_noise_matches_half_normal_statistics() {
        // Zero map + clamp at 0: surviving values follow a half-normal
        // distribution with mean sigma*sqrt(2/pi) over all pixels.
        let zero = Heatmap {
            grid: Grid::<f64>::zeros(256, 320),
            view_index: 0,
        };
        let sigma = 0.05;
        let noisy = corrupt(&zero, sigma, 1.0, 42);
        let n = noisy.grid.data.len() as f64;
        let mean: f64 = noisy.grid.data.iter().sum::<f64>() / n;
        let expected = sigma * (2.0 / std::f64::consts::PI).sqrt() / 2.0; // half mass clamped to 0
        // Standard error of the mean for the clamped variable.
        let var = sigma * sigma / 2.0; // loose upper bound on variance
        let se = (var / n).sqrt();
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "mean {mean}, expected {expected}, se {se}"
        );
    }

    #[test]
    fn detect_single_blob_and_empty_map() {
        let cam = camera();
        let mesh = cube(0.06);
        let cfg = HeatmapConfig::default();
        let h = center_heatmap(&[V3::new(0.0, 0.0, 0.6)], &[&mesh], &cam, &cfg, 0);
        let peaks = detect_peaks(&h, &cfg);
        assert_eq!(peaks.len(), 1);
        assert_eq!((peaks[0].x, peaks[0].y), (160.5, 128.5));
        assert_eq!(peaks[0].score, 1.0);

        let empty = Heatmap {
            grid: Grid::<f64>::zeros(64, 64),
            view_index: 0,
        };
        assert!(detect_peaks(&empty, &cfg).is_empty());
    }

    #[test]
    fn detect_two_separated_blobs_matches_exhaustive_oracle() {
        let mut grid = Grid::<f64>::zeros(64, 64);
        let cfg = HeatmapConfig::<f64>::default();
        let blobs = [(20.0f64, 15.0f64), (45.0, 48.0)]; // > 3 * peak_min_distance apart
        for &(r, c) in &blobs {
            let sigma = 2.5;
            for row in 0..64 {
                for col in 0..64 {
                    let d2 = (row as f64 + 0.5 - r).powi(2) + (col as f64 + 0.5 - c).powi(2);
                    let v = (-d2 / (2.0 * sigma * sigma)).exp();
                    if v > grid.get(row, col) {
                        grid.set(row, col, v);
                    }
                }
            }
        }
        let h = Heatmap {
            grid: grid.clone(),
            view_index: 0,
        };
        let peaks = detect_peaks(&h, &cfg);
        assert_eq!(peaks.len(), 2);

        // Exhaustive neighborhood-scan oracle.
        let r = cfg.peak_min_distance as i64;
        let mut oracle = Vec::new();
        for row in 0..64usize {
            for col in 0..64usize {
                let v = grid.get(row, col);
                if v < cfg.peak_threshold {
                    continue;
                }
                let mut ok = true;
                for dr in -r..=r {
                    for dc in -r..=r {
                        let (nr, nc) = (row as i64 + dr, col as i64 + dc);
                        if (dr, dc) == (0, 0) || nr < 0 || nc < 0 || nr >= 64 || nc >= 64 {
                            continue;
                        }
                        let nv = grid.get(nr as usize, nc as usize);
                        if nv > v || (nv == v && (nr as usize, nc as usize) < (row, col)) {
                            ok = false;
                        }
                    }
                }
                if ok {
                    oracle.push((row, col));
                }
            }
        }
        assert_eq!(peaks.len(), oracle.len());
        for p in &peaks {
            let rc = ((p.y - 0.5) as usize, (p.x - 0.5) as usize);
            assert!(oracle.contains(&rc));
        }
    }

    #[test]
    fn curvature_target_delegates_to_renderer() {
        let cam = camera();
        let mesh = cube(0.06);
        let pose = Pose::new(Mat3::identity(), V3::new(0.0, 0.0, 0.6));
        let t = curvature_target(&[&mesh], &[pose], &cam, false, 3);
        let direct =
            renderer::render_curvature(&[&mesh], &[pose], std::slice::from_ref(&cam));
        assert_eq!(t.grid, direct.views[0].curvature);
        assert_eq!(t.view_index, 3);
        // Determinism.
        let t2 = curvature_target(&[&mesh], &[pose], &cam, false, 3);
        assert_eq!(t, t2);
        // Empty scene → zero map.
        let empty = curvature_target::<f64>(&[], &[], &cam, false, 0);
        assert!(empty.grid.data.iter().all(|&v| v == 0.0));
    }
}
