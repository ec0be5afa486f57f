//! Multi-view center heatmaps → pruned, refined 3D object centers.

use crate::error::{Error, Result};
use crate::geometry::{ray_pair_midpoint, Camera, Vec2, Vec3};
use crate::heatmaps::{Heatmap, Peak};
use crate::optimizer::{nelder_mead, SimplexConfig};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct TriangulationConfig<S> {
    /// Max ray-pair gap for a midpoint candidate (meters).
    pub d_t: S,
    /// Candidate merge radius (meters).
    pub d_c: S,
    /// Overlap pruning radius (meters).
    pub d_o: S,
    pub expected_count: Option<usize>,
}

impl<S: Real> Default for TriangulationConfig<S> {
    fn default() -> Self {
        // The 30s carry no units in their source; interpreted as mm.
        Self {
            d_t: S::c(0.03),
            d_c: S::c(0.03),
            d_o: S::c(0.03),
            expected_count: None,
        }
    }
}

/// A 3D object-center hypothesis with per-view heatmap scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Center3D<S> {
    pub position: Vec3<S>,
    pub per_view_scores: Vec<S>,
    pub aggregate_score: S,
}

/// Midpoints of all cross-view peak-ray pairs with gap below d_t.
/// Parallel ray pairs are skipped.
pub fn triangulate_candidates<S: Real>(
    peaks_per_view: &[Vec<Peak<S>>],
    cameras: &[Camera<S>],
    config: &TriangulationConfig<S>,
) -> Result<Vec<Vec3<S>>> {
    if peaks_per_view.len() < 2 {
        return Err(Error::InsufficientViews {
            views: peaks_per_view.len(),
        });
    }
    let rays: Vec<Vec<crate::geometry::Ray<S>>> = peaks_per_view
        .iter()
        .zip(cameras)
        .map(|(peaks, cam)| {
            peaks
                .iter()
                .map(|p| cam.pixel_ray(Vec2::new(p.x, p.y)))
                .collect()
        })
        .collect();
    let mut midpoints = Vec::new();
    for va in 0..rays.len() {
        for vb in (va + 1)..rays.len() {
            for ra in &rays[va] {
                for rb in &rays[vb] {
                    match ray_pair_midpoint(ra, rb) {
                        Ok((mid, gap)) if gap < config.d_t => midpoints.push(mid),
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(midpoints)
}

/// Greedy agglomeration: repeatedly merge the closest pair under d_c into
/// their (size-weighted) centroid. Output sorted by descending cluster
/// size, then lexicographic position.
pub fn merge_candidates<S: Real>(points: &[Vec3<S>], d_c: S) -> Vec<Vec3<S>> {
    let mut clusters: Vec<(Vec3<S>, usize)> = points.iter().map(|&p| (p, 1usize)).collect();
    loop {
        let mut best: Option<(usize, usize, S)> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let d = clusters[i].0.sub(clusters[j].0).norm();
                if d < d_c && best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((i, j, d));
                }
            }
        }
        let Some((i, j, _)) = best else { break };
        let (pi, ni) = clusters[i];
        let (pj, nj) = clusters[j];
        let n = ni + nj;
        let w_i = S::c(ni as f64) / S::c(n as f64);
        let w_j = S::c(nj as f64) / S::c(n as f64);
        clusters[i] = (pi.scale(w_i).add(pj.scale(w_j)), n);
        clusters.swap_remove(j);
    }
    clusters.sort_by(|a, b| {
        b.1.cmp(&a.1).then_with(|| {
            (a.0.x, a.0.y, a.0.z)
                .partial_cmp(&(b.0.x, b.0.y, b.0.z))
                .unwrap()
        })
    });
    clusters.into_iter().map(|(p, _)| p).collect()
}

/// Refine each point by maximizing its summed bilinear reprojection score
/// across views (bounded simplex over the 3 coordinates), then score it.
/// The search box has half-width `search_bound` around the initial point.
pub fn refine_and_score<S: Real>(
    points: &[Vec3<S>],
    heatmaps_per_view: &[Heatmap<S>],
    cameras: &[Camera<S>],
    search_bound: S,
) -> Result<Vec<Center3D<S>>> {
    let score_views = |p: Vec3<S>| -> Vec<S> {
        cameras
            .iter()
            .zip(heatmaps_per_view)
            .map(|(cam, h)| match cam.project(p) {
                Ok(pix) => h.grid.sample_bilinear(pix.x, pix.y),
                Err(_) => S::zero(),
            })
            .collect()
    };
    let simplex_config = SimplexConfig {
        max_iters: 300,
        xtol: S::c(1e-7),
        ftol: S::c(1e-12),
    };
    let mut out = Vec::with_capacity(points.len());
    for &p0 in points {
        let mut objective = |x: &[S]| {
            let scores = score_views(Vec3::new(x[0], x[1], x[2]));
            -scores.iter().fold(S::zero(), |a, &b| a + b)
        };
        let x0 = [p0.x, p0.y, p0.z];
        let bounds = [
            (p0.x - search_bound, p0.x + search_bound),
            (p0.y - search_bound, p0.y + search_bound),
            (p0.z - search_bound, p0.z + search_bound),
        ];
        let step = search_bound * S::c(0.25);
        let (x, _) = nelder_mead(
            &mut objective,
            &x0,
            &bounds,
            &[step, step, step],
            &simplex_config,
            None,
        )?;
        let position = Vec3::new(x[0], x[1], x[2]);
        let per_view_scores = score_views(position);
        let aggregate_score = per_view_scores.iter().fold(S::zero(), |a, &b| a + b);
        out.push(Center3D {
            position,
            per_view_scores,
            aggregate_score,
        });
    }
    Ok(out)
}

/// Keep centers in descending aggregate-score order, dropping any closer
/// than d_o to an already-kept one; truncate to `expected_count` if set.
pub fn prune<S: Real>(centers: &[Center3D<S>], config: &TriangulationConfig<S>) -> Vec<Center3D<S>> {
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| {
        centers[b]
            .aggregate_score
            .partial_cmp(&centers[a].aggregate_score)
            .unwrap()
            .then_with(|| {
                let pa = centers[a].position;
                let pb = centers[b].position;
                (pa.x, pa.y, pa.z).partial_cmp(&(pb.x, pb.y, pb.z)).unwrap()
            })
    });
    let mut kept: Vec<Center3D<S>> = Vec::new();
    for &i in &order {
        let c = &centers[i];
        if kept
            .iter()
            .all(|k| k.position.sub(c.position).norm() >= config.d_o)
        {
            kept.push(c.clone());
        }
    }
    if let Some(n) = config.expected_count {
        kept.truncate(n);
    }
    kept
}

/// Full stage-2 pipeline: peaks → triangulation → merge → refine → prune.
pub fn centers_from_heatmaps<S: Real>(
    heatmaps_per_view: &[Heatmap<S>],
    cameras: &[Camera<S>],
    heatmap_config: &crate::heatmaps::HeatmapConfig<S>,
    config: &TriangulationConfig<S>,
) -> Result<Vec<Center3D<S>>> {
    let peaks: Vec<Vec<Peak<S>>> = heatmaps_per_view
        .iter()
        .map(|h| crate::heatmaps::detect_peaks(h, heatmap_config))
        .collect();
    let midpoints = triangulate_candidates(&peaks, cameras, config)?;
    let merged = merge_candidates(&midpoints, config.d_c);
    let refined = refine_and_score(&merged, heatmaps_per_view, cameras, config.d_c)?;
    Ok(prune(&refined, config))
}
