//! Render-and-compare scalar cost: exact Euclidean distance transform of
//! binarized target curvature maps, multiplied against rendered candidate
//! curvature, normalized per view and combined with view weights.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Camera, Pose};
use crate::grid::Grid;
use crate::heatmaps::Heatmap;
use crate::mesh::Mesh;
use crate::renderer::{self, RenderedViews, ViewMaps};
use crate::scalar::Real;

/// Exact Euclidean distance (pixels) to the nearest binarized-true pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap<S> {
    pub grid: Grid<S>,
    /// Binarization threshold the map was built with.
    pub source_threshold: S,
}

#[derive(Debug, Clone)]
pub struct CostConfig<S> {
    /// Curvature binarization threshold t_b.
    pub t_b: S,
    /// Per-view weights w_v; at least one must be positive.
    pub view_weights: Vec<S>,
    /// Cost assigned to a view whose render is empty.
    pub empty_render_penalty: S,
}

impl<S: Real> CostConfig<S> {
    pub fn new(t_b: S, view_weights: Vec<S>, empty_render_penalty: S) -> Self {
        Self {
            t_b,
            view_weights,
            empty_render_penalty,
        }
    }

    /// Defaults: t_b = 0.1, uniform weights, penalty = image diagonal.
    pub fn uniform(n_views: usize, width: usize, height: usize) -> Self {
        Self {
            t_b: S::c(0.1),
            view_weights: vec![S::one(); n_views],
            empty_render_penalty: image_diagonal(width, height),
        }
    }
}

pub fn image_diagonal<S: Real>(width: usize, height: usize) -> S {
    S::c(((width * width + height * height) as f64).sqrt())
}

/// Felzenszwalb–Huttenlocher 1D squared distance transform (lower
/// envelope). Infinite entries (no source in that line yet) are skipped;
/// an all-infinite input stays infinite.
#[allow(clippy::needless_range_loop)]
fn dt_1d<S: Real>(f: &[S], out: &mut [S], v: &mut [usize], z: &mut [S]) {
    let n = f.len();
    let inf = S::infinity();
    let Some(first) = (0..n).find(|&i| f[i] < inf) else {
        out[..n].fill(inf);
        return;
    };
    let mut k = 0usize;
    v[0] = first;
    z[0] = -inf;
    z[1] = inf;
    for q in (first + 1)..n {
        if f[q] == inf {
            continue;
        }
        let qs = S::c(q as f64);
        loop {
            let p = v[k];
            let ps = S::c(p as f64);
            let s = ((f[q] + qs * qs) - (f[p] + ps * ps)) / (S::c(2.0) * (qs - ps));
            if s <= z[k] {
                k -= 1; // z[0] = -inf guarantees termination
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = inf;
                break;
            }
        }
    }
    let mut k = 0usize;
    for q in 0..n {
        let qs = S::c(q as f64);
        while z[k + 1] < qs {
            k += 1;
        }
        let p = v[k];
        let d = qs - S::c(p as f64);
        out[q] = d * d + f[p];
    }
}

/// Exact Euclidean distance transform of `{target >= t_b}`. An all-false
/// input yields the image diagonal everywhere.
#[allow(clippy::needless_range_loop)]
pub fn distance_transform<S: Real>(target: &Heatmap<S>, t_b: S) -> DistanceMap<S> {
    let g = &target.grid;
    let (h, w) = (g.height, g.width);
    let sentinel = image_diagonal(w, h);
    let inf = S::infinity();
    let mut d2 = vec![inf; h * w];
    let mut any = false;
    for i in 0..h * w {
        if g.data[i] >= t_b {
            d2[i] = S::zero();
            any = true;
        }
    }
    if !any {
        return DistanceMap {
            grid: Grid::from_data(h, w, vec![sentinel; h * w]),
            source_threshold: t_b,
        };
    }
    let n = h.max(w);
    let mut col_buf = vec![S::zero(); n];
    let mut out_buf = vec![S::zero(); n];
    let mut v = vec![0usize; n];
    let mut z = vec![S::zero(); n + 1];
    // Columns first.
    for col in 0..w {
        for row in 0..h {
            col_buf[row] = d2[row * w + col];
        }
        dt_1d(&col_buf[..h], &mut out_buf[..h], &mut v, &mut z);
        for row in 0..h {
            d2[row * w + col] = out_buf[row];
        }
    }
    // Then rows.
    for row in 0..h {
        dt_1d(&d2[row * w..(row + 1) * w], &mut out_buf[..w], &mut v, &mut z);
        d2[row * w..(row + 1) * w].copy_from_slice(&out_buf[..w]);
    }
    let data = d2.into_iter().map(|x| x.sqrt()).collect();
    DistanceMap {
        grid: Grid::from_data(h, w, data),
        source_threshold: t_b,
    }
}

/// Reference scalar cost over fully rendered views.
pub fn scene_cost<S: Real>(
    renders: &RenderedViews<S>,
    distance_maps: &[DistanceMap<S>],
    config: &CostConfig<S>,
) -> Result<S> {
    let mut total = S::zero();
    let mut weight_sum = S::zero();
    for (v, (view, dm)) in renders.views.iter().zip(distance_maps).enumerate() {
        let curv = &view.curvature;
        if curv.height != dm.grid.height || curv.width != dm.grid.width {
            return Err(Error::ShapeMismatch {
                expected_h: dm.grid.height,
                expected_w: dm.grid.width,
                got_h: curv.height,
                got_w: curv.width,
            });
        }
        let w_v = config.view_weights.get(v).copied().unwrap_or(S::one());
        let mut num = S::zero();
        let mut den = S::zero();
        for i in 0..curv.data.len() {
            let c = curv.data[i];
            num = num + c * dm.grid.data[i];
            den = den + c;
        }
        let c_v = if den == S::zero() {
            config.empty_render_penalty
        } else {
            num / den
        };
        total = total + w_v * c_v;
        weight_sum = weight_sum + w_v;
    }
    Ok(total / weight_sum)
}

struct ViewContext<'a, S> {
    camera: &'a Camera<S>,
    dm: &'a DistanceMap<S>,
    weight: S,
    placed: ViewMaps<S>,
    placed_curv: Grid<S>,
    placed_num: S,
    placed_den: S,
}

/// Per-thread scratch buffers for incremental cost evaluation.
pub struct EvalScratch<S> {
    views: Vec<ViewMaps<S>>,
    curv: Vec<Grid<S>>,
}

/// Incremental scene-cost evaluator: placed objects are rendered once per
/// view; each candidate is rasterized on top within its screen bounding
/// box only. Results match the full render path up to floating-point
/// reassociation of the per-view sums (≤ 1e-9 relative).
pub struct SceneCostEvaluator<'a, S> {
    views: Vec<ViewContext<'a, S>>,
    config: &'a CostConfig<S>,
    placed_count: usize,
}

impl<'a, S: Real> SceneCostEvaluator<'a, S> {
    pub fn new(
        placed_meshes: &[&Mesh<S>],
        placed_poses: &[Pose<S>],
        cameras: &'a [Camera<S>],
        distance_maps: &'a [DistanceMap<S>],
        config: &'a CostConfig<S>,
    ) -> Self {
        let views = cameras
            .iter()
            .zip(distance_maps)
            .enumerate()
            .map(|(v, (camera, dm))| {
                let placed = renderer::rasterize(placed_meshes, placed_poses, camera);
                let placed_curv = renderer::curvature_from_normals(&placed);
                let mut num = S::zero();
                let mut den = S::zero();
                for i in 0..placed_curv.data.len() {
                    let c = placed_curv.data[i];
                    num = num + c * dm.grid.data[i];
                    den = den + c;
                }
                ViewContext {
                    camera,
                    dm,
                    weight: config.view_weights.get(v).copied().unwrap_or(S::one()),
                    placed,
                    placed_curv,
                    placed_num: num,
                    placed_den: den,
                }
            })
            .collect();
        Self {
            views,
            config,
            placed_count: placed_meshes.len(),
        }
    }

    pub fn new_scratch(&self) -> EvalScratch<S> {
        EvalScratch {
            views: self
                .views
                .iter()
                .map(|v| ViewMaps::empty(v.camera))
                .collect(),
            curv: self
                .views
                .iter()
                .map(|v| Grid::zeros(v.camera.height, v.camera.width))
                .collect(),
        }
    }

    /// Cost of placing `mesh` at `pose` on top of the placed objects.
    pub fn eval(&self, mesh: &Mesh<S>, pose: &Pose<S>, scratch: &mut EvalScratch<S>) -> S {
        let mut total = S::zero();
        let mut weight_sum = S::zero();
        for (vi, view) in self.views.iter().enumerate() {
            let c_v = self.eval_view(vi, view, mesh, pose, scratch);
            total = total + view.weight * c_v;
            weight_sum = weight_sum + view.weight;
        }
        total / weight_sum
    }

    fn eval_view(
        &self,
        vi: usize,
        view: &ViewContext<'a, S>,
        mesh: &Mesh<S>,
        pose: &Pose<S>,
        scratch: &mut EvalScratch<S>,
    ) -> S {
        let camera = view.camera;
        let (h, w) = (camera.height, camera.width);
        // Screen bounding box of the candidate.
        let object_to_cam = crate::geometry::compose(&camera.world_to_cam, pose);
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        let mut any_behind = false;
        for &vtx in &mesh.vertices {
            let pc = object_to_cam.apply(vtx);
            if pc.z <= S::c(1e-6) {
                any_behind = true;
                break;
            }
            let px = (camera.fx * pc.x / pc.z + camera.cx).to_f64c();
            let py = (camera.fy * pc.y / pc.z + camera.cy).to_f64c();
            min_x = min_x.min(px);
            max_x = max_x.max(px);
            min_y = min_y.min(py);
            max_y = max_y.max(py);
        }
        let placed_cost = || {
            if view.placed_den == S::zero() {
                self.config.empty_render_penalty
            } else {
                view.placed_num / view.placed_den
            }
        };
        let (f_r0, f_r1, f_c0, f_c1) = if any_behind {
            (0usize, h, 0usize, w) // rare; fall back to the full image
        } else {
            if max_x < 0.0 || max_y < 0.0 || min_x >= w as f64 || min_y >= h as f64 {
                return placed_cost(); // candidate invisible in this view
            }
            let r0 = (min_y.floor() as i64 - 1).max(0) as usize;
            let c0 = (min_x.floor() as i64 - 1).max(0) as usize;
            let r1 = ((max_y.ceil() as i64 + 1).min(h as i64)) as usize;
            let c1 = ((max_x.ceil() as i64 + 1).min(w as i64)) as usize;
            (r0, r1, c0, c1)
        };
        // Changed pixels lie in F = [f_r0, f_r1) x [f_c0, f_c1); curvature
        // can change in F expanded by 1, which needs normals in F expanded
        // by 2.
        let e1 = |a: usize| a.saturating_sub(1);
        let (g_r0, g_r1) = (e1(f_r0), (f_r1 + 1).min(h));
        let (g_c0, g_c1) = (e1(f_c0), (f_c1 + 1).min(w));
        let (n_r0, n_r1) = (e1(g_r0), (g_r1 + 1).min(h));
        let (n_c0, n_c1) = (e1(g_c0), (g_c1 + 1).min(w));

        let smap = &mut scratch.views[vi];
        for row in n_r0..n_r1 {
            let a = row * w + n_c0;
            let b = row * w + n_c1;
            smap.depth[a..b].copy_from_slice(&view.placed.depth[a..b]);
            smap.object_index[a..b].copy_from_slice(&view.placed.object_index[a..b]);
            smap.normals[a..b].copy_from_slice(&view.placed.normals[a..b]);
        }
        renderer::rasterize_into(smap, mesh, pose, camera, self.placed_count as u32);
        let scurv = &mut scratch.curv[vi];
        renderer::curvature_region(smap, g_r0, g_r1, g_c0, g_c1, scurv);

        let mut new_num = S::zero();
        let mut new_den = S::zero();
        let mut old_num = S::zero();
        let mut old_den = S::zero();
        for row in g_r0..g_r1 {
            for col in g_c0..g_c1 {
                let i = row * w + col;
                let c_new = scurv.data[i];
                let d = view.dm.grid.data[i];
                new_num = new_num + c_new * d;
                new_den = new_den + c_new;
                let c_old = view.placed_curv.data[i];
                old_num = old_num + c_old * d;
                old_den = old_den + c_old;
            }
        }
        let num = view.placed_num - old_num + new_num;
        let den = view.placed_den - old_den + new_den;
        if den <= S::zero() {
            self.config.empty_render_penalty
        } else {
            num / den
        }
    }
}

/// Costs of many candidate poses for one object, evaluated in parallel.
/// A pure map: output order matches input order for any thread count.
pub fn batch_cost<S: Real>(
    evaluator: &SceneCostEvaluator<'_, S>,
    mesh: &Mesh<S>,
    poses: &[Pose<S>],
) -> Vec<S> {
    poses
        .par_iter()
        .map_init(
            || evaluator.new_scratch(),
            |scratch, pose| evaluator.eval(mesh, pose, scratch),
        )
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Mat3, Vec3};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn heat(h: usize, w: usize, truths: &[(usize, usize)]) -> Heatmap<f64> {
        let mut g = Grid::zeros(h, w);
        for &(r, c) in truths {
            g.set(r, c, 1.0);
        }
        Heatmap {
            grid: g,
            view_index: 0,
        }
    }

    fn brute_force_edt(target: &Heatmap<f64>, t_b: f64) -> Grid<f64> {
        let g = &target.grid;
        let mut out = Grid::zeros(g.height, g.width);
        let truths: Vec<(usize, usize)> = (0..g.height)
            .flat_map(|r| (0..g.width).map(move |c| (r, c)))
            .filter(|&(r, c)| g.get(r, c) >= t_b)
            .collect();
        let sentinel = image_diagonal::<f64>(g.width, g.height);
        for r in 0..g.height {
            for c in 0..g.width {
                let mut best = u64::MAX;
                for &(tr, tc) in &truths {
                    let dr = tr as i64 - r as i64;
                    let dc = tc as i64 - c as i64;
                    let d2 = (dr * dr + dc * dc) as u64;
                    best = best.min(d2);
                }
                out.set(
                    r,
                    c,
                    if best == u64::MAX {
                        sentinel
                    } else {
                        (best as f64).sqrt()
                    },
                );
            }
        }
        out
    }

    #[test]
    fn edt_hand_cases() {
        // 1x3 image, true center → [1, 0, 1].
        let dm = distance_transform(&heat(1, 3, &[(0, 1)]), 0.5);
        assert_eq!(dm.grid.data, vec![1.0, 0.0, 1.0]);
        // All true → all zeros.
        let all = heat(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(distance_transform(&all, 0.5).grid.data.iter().all(|&d| d == 0.0));
        // All false → diagonal sentinel.
        let none = heat(3, 4, &[]);
        let dm = distance_transform(&none, 0.5);
        let diag = 25f64.sqrt();
        assert!(dm.grid.data.iter().all(|&d| d == diag));
    }

    #[test]
    fn edt_matches_brute_force_bit_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let mut g = Grid::zeros(32, 32);
            let density = rng.gen_range(0.001..0.3);
            for v in g.data.iter_mut() {
                if rng.gen_bool(density) {
                    *v = 1.0;
                }
            }
            let h = Heatmap {
                grid: g,
                view_index: 0,
            };
            let dm = distance_transform(&h, 0.5);
            let oracle = brute_force_edt(&h, 0.5);
            assert_eq!(dm.grid.data, oracle.data);
        }
    }

    #[test]
    fn edt_metric_property() {
        let dm = distance_transform(&heat(16, 16, &[(3, 4), (12, 10)]), 0.5);
        for r in 0..16 {
            for c in 0..15 {
                assert!((dm.grid.get(r, c) - dm.grid.get(r, c + 1)).abs() <= 1.0 + 1e-12);
            }
        }
    }

    fn camera() -> Camera<f64> {
        Camera {
            fx: 100.0,
            fy: 100.0,
            cx: 32.0,
            cy: 32.0,
            width: 64,
            height: 64,
            world_to_cam: Pose::identity(),
        }
    }

    fn square_mesh(s: f64) -> Mesh<f64> {
        let h = s / 2.0;
        Mesh::new(
            vec![
                Vec3::new(-h, -h, 0.0),
                Vec3::new(h, -h, 0.0),
                Vec3::new(h, h, 0.0),
                Vec3::new(-h, h, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn cost_zero_when_render_matches_target() {
        let cam = camera();
        let mesh = square_mesh(0.2);
        let pose = Pose::new(Mat3::identity(), Vec3::new(0.0, 0.0, 1.0));
        let cams = [cam];
        let renders = renderer::render_curvature(&[&mesh], &[pose], &cams);
        let target = Heatmap {
            grid: renders.views[0].curvature.clone(),
            view_index: 0,
        };
        let dm = distance_transform(&target, 0.1);
        let config = CostConfig::uniform(1, 64, 64);
        let cost = scene_cost(&renders, &[dm], &config).unwrap();
        assert!(cost.abs() < 1e-12, "cost = {cost}");
    }

    #[test]
    fn empty_render_hits_penalty() {
        let cam = camera();
        let cams = [cam];
        let renders = renderer::render_curvature::<f64>(&[], &[], &cams);
        let target = heat(64, 64, &[(10, 10)]);
        let dm = distance_transform(&target, 0.5);
        let config = CostConfig::uniform(1, 64, 64);
        let cost = scene_cost(&renders, &[dm], &config).unwrap();
        assert_eq!(cost, config.empty_render_penalty);
    }

    #[test]
    fn single_pixel_hand_evaluation() {
        // Render with one nonzero pixel of value 2.0 at distance 3 px from
        // the nearest true pixel → cost (2.0 * 3) / 2.0 = 3.0.
        let mut curv = Grid::zeros(16, 16);
        curv.set(5, 8, 2.0);
        let renders = RenderedViews {
            views: vec![crate::renderer::RenderedView {
                maps: ViewMaps {
                    height: 16,
                    width: 16,
                    depth: vec![f64::INFINITY; 256],
                    object_index: vec![crate::renderer::NO_OBJECT; 256],
                    normals: vec![[0.0; 3]; 256],
                },
                curvature: curv,
            }],
        };
        let dm = distance_transform(&heat(16, 16, &[(5, 5)]), 0.5);
        assert_eq!(dm.grid.get(5, 8), 3.0);
        let config = CostConfig::new(0.5, vec![1.0], 100.0);
        let cost = scene_cost(&renders, &[dm], &config).unwrap();
        assert_eq!(cost, 3.0);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let cam = camera();
        let cams = [cam];
        let mesh = square_mesh(0.2);
        let pose = Pose::new(Mat3::identity(), Vec3::new(0.0, 0.0, 1.0));
        let renders = renderer::render_curvature(&[&mesh], &[pose], &cams);
        let dm = distance_transform(&heat(32, 32, &[(1, 1)]), 0.5);
        let config = CostConfig::uniform(1, 64, 64);
        assert!(matches!(
            scene_cost(&renders, &[dm], &config),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn cost_invariant_to_uniform_curvature_scaling() {
        let cam = camera();
        let cams = [cam];
        let mesh = square_mesh(0.2);
        let pose = Pose::new(Mat3::identity(), Vec3::new(0.01, 0.02, 1.1));
        let mut renders = renderer::render_curvature(&[&mesh], &[pose], &cams);
        let target = heat(64, 64, &[(20, 20), (40, 30)]);
        let dm = distance_transform(&target, 0.5);
        let config = CostConfig::uniform(1, 64, 64);
        let c1 = scene_cost(&renders, std::slice::from_ref(&dm), &config).unwrap();
        for v in renders.views[0].curvature.data.iter_mut() {
            *v *= 7.5;
        }
        let c2 = scene_cost(&renders, &[dm], &config).unwrap();
        assert!((c1 - c2).abs() < 1e-9 * c1.max(1.0));
    }

    #[test]
    fn incremental_evaluator_matches_full_render_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut cam = camera();
        cam.world_to_cam = Pose::new(
            Mat3::from_rotation_vector(Vec3::new(0.1, -0.2, 0.05)),
            Vec3::new(0.02, -0.01, 1.0),
        );
        let cams = vec![cam];
        let placed_mesh = square_mesh(0.25);
        let placed_pose = Pose::new(
            Mat3::from_rotation_vector(Vec3::new(0.2, 0.1, 0.0)),
            Vec3::new(-0.05, 0.05, 0.1),
        );
        let cand_mesh = square_mesh(0.15);
        let target = heat(64, 64, &[(10, 12), (30, 40), (50, 20)]);
        let dms = vec![distance_transform(&target, 0.5)];
        let config = CostConfig::uniform(1, 64, 64);
        let evaluator =
            SceneCostEvaluator::new(&[&placed_mesh], &[placed_pose], &cams, &dms, &config);
        let mut scratch = evaluator.new_scratch();
        for _ in 0..25 {
            let pose = Pose::new(
                Mat3::from_rotation_vector(Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )),
                Vec3::new(
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.1..0.3),
                ),
            );
            let fast = evaluator.eval(&cand_mesh, &pose, &mut scratch);
            let renders = renderer::render_curvature(
                &[&placed_mesh, &cand_mesh],
                &[placed_pose, pose],
                &cams,
            );
            let full = scene_cost(&renders, &dms, &config).unwrap();
            assert!(
                (fast - full).abs() < 1e-9 * full.abs().max(1.0),
                "fast {fast} vs full {full}"
            );
        }
    }

    #[test]
    fn batch_cost_is_a_pure_map() {
        let cam = camera();
        let cams = vec![cam];
        let mesh = square_mesh(0.2);
        let target = heat(64, 64, &[(20, 20)]);
        let dms = vec![distance_transform(&target, 0.5)];
        let config = CostConfig::uniform(1, 64, 64);
        let evaluator = SceneCostEvaluator::new(&[], &[], &cams, &dms, &config);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut poses = Vec::new();
        for _ in 0..30 {
            poses.push(Pose::new(
                Mat3::from_rotation_vector(Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )),
                Vec3::new(
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(0.8..1.2),
                ),
            ));
        }
        // Duplicate a candidate: identical outputs expected.
        poses.push(poses[3]);
        let batch = batch_cost(&evaluator, &mesh, &poses);
        let mut scratch = evaluator.new_scratch();
        let sequential: Vec<f64> = poses
            .iter()
            .map(|p| evaluator.eval(&mesh, p, &mut scratch))
            .collect();
        assert_eq!(batch, sequential);
        assert_eq!(batch[3], batch[30]);
        // Batch of 1 equals direct evaluation.
        let single = batch_cost(&evaluator, &mesh, &poses[..1]);
        assert_eq!(single[0], sequential[0]);
    }
}
