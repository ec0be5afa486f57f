//! Derivative-free pose search: random candidates around 3D centers,
//! bounded Nelder-Mead refinement, and the sequential visibility-ordered
//! scheduling loop.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::centers::Center3D;
use crate::costfn::{batch_cost, CostConfig, DistanceMap, SceneCostEvaluator};
use crate::error::{Error, Result};
use crate::geometry::{Camera, Mat3, Pose, Vec3};
use crate::mesh::Mesh;
use crate::scalar::Real;

/// Candidate pose chart: translation offset from the anchor center plus an
/// axis-angle rotation (norm ≤ π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseParams<S> {
    pub translation_offset: Vec3<S>,
    pub axis_angle: Vec3<S>,
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig<S> {
    pub n_candidates: usize,
    /// Candidates passed on to simplex refinement.
    pub n_refine: usize,
    /// Defaults to 0.25 · object diameter when `None`.
    pub translation_sigma: Option<S>,
    /// Defaults to 0.5 · object diameter when `None`.
    pub translation_bound: Option<S>,
    pub simplex_max_iters: usize,
    pub simplex_xtol: S,
    pub simplex_ftol: S,
    pub rng_seed: u64,
}

impl<S: Real> Default for OptimizerConfig<S> {
    fn default() -> Self {
        Self {
            n_candidates: 2000,
            n_refine: 4,
            translation_sigma: None,
            translation_bound: None,
            simplex_max_iters: 200,
            simplex_xtol: S::c(1e-6),
            simplex_ftol: S::c(1e-10),
            rng_seed: 0,
        }
    }
}

impl<S: Real> OptimizerConfig<S> {
    pub fn translation_sigma_for(&self, diameter: S) -> S {
        self.translation_sigma.unwrap_or(S::c(0.25) * diameter)
    }

    pub fn translation_bound_for(&self, diameter: S) -> S {
        self.translation_bound.unwrap_or(S::c(0.5) * diameter)
    }
}

/// Minimum rotation angle (radians) between simplex starting candidates;
/// roughly the basin radius of the render-and-compare cost.
const REFINE_MIN_ROTATION_SEPARATION: f64 = 0.5;

/// One placed object of a scene estimate.
#[derive(Debug, Clone)]
pub struct EstimatedObject<S> {
    pub class_id: u32,
    pub pose: Pose<S>,
    pub per_view_scores: Vec<S>,
    pub cost: S,
}

/// Ordered scene estimate (descending visibility order).
#[derive(Debug, Clone)]
pub struct SceneEstimate<S> {
    pub objects: Vec<EstimatedObject<S>>,
}

/// Per-iteration best-cost trace row for convergence plots.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub object_ordinal: usize,
    pub phase: String,
    pub iteration: usize,
    pub best_cost: f64,
}

/// Uniform random rotation (Shoemake's method) as a rotation matrix.
pub fn uniform_rotation<S: Real, R: Rng>(rng: &mut R) -> Mat3<S> {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let u3: f64 = rng.gen();
    let two_pi = 2.0 * std::f64::consts::PI;
    let q = [
        (1.0 - u1).sqrt() * (two_pi * u2).sin(),
        (1.0 - u1).sqrt() * (two_pi * u2).cos(),
        u1.sqrt() * (two_pi * u3).sin(),
        u1.sqrt() * (two_pi * u3).cos(),
    ];
    let (x, y, z, w) = (S::c(q[0]), S::c(q[1]), S::c(q[2]), S::c(q[3]));
    let two = S::c(2.0);
    let one = S::one();
    Mat3::from_rows(
        [
            one - two * (y * y + z * z),
            two * (x * y - z * w),
            two * (x * z + y * w),
        ],
        [
            two * (x * y + z * w),
            one - two * (x * x + z * z),
            two * (y * z - x * w),
        ],
        [
            two * (x * z - y * w),
            two * (y * z + x * w),
            one - two * (x * x + y * y),
        ],
    )
}

/// Random pose candidates: rotations uniform on SO(3), translation offsets
/// Normal(0, sigma²) per axis clamped to ±bound. Deterministic per rng
/// state.
pub fn sample_candidates<S: Real, R: Rng>(
    config: &OptimizerConfig<S>,
    diameter: S,
    rng: &mut R,
) -> Vec<PoseParams<S>>
where
    StandardNormal: Distribution<S>,
{
    let sigma = config.translation_sigma_for(diameter);
    let bound = config.translation_bound_for(diameter);
    (0..config.n_candidates)
        .map(|_| {
            let rotation = uniform_rotation::<S, _>(rng);
            let mut t = [S::zero(); 3];
            for v in t.iter_mut() {
                let n: S = StandardNormal.sample(rng);
                *v = (n * sigma).max(-bound).min(bound);
            }
            PoseParams {
                translation_offset: Vec3::new(t[0], t[1], t[2]),
                axis_angle: rotation.to_rotation_vector(),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SimplexConfig<S> {
    pub max_iters: usize,
    pub xtol: S,
    pub ftol: S,
}

/// Bounded Nelder-Mead simplex minimization (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). Trial points are projected onto the box.
/// Returns the best evaluated vertex; its value never exceeds f(x0).
#[allow(clippy::needless_range_loop)]
pub fn nelder_mead<S: Real>(
    objective: &mut dyn FnMut(&[S]) -> S,
    x0: &[S],
    bounds: &[(S, S)],
    initial_step: &[S],
    config: &SimplexConfig<S>,
    mut on_iteration: Option<&mut dyn FnMut(usize, S)>,
) -> Result<(Vec<S>, S)> {
    let n = x0.len();
    assert_eq!(bounds.len(), n);
    assert_eq!(initial_step.len(), n);
    let project = |x: &mut [S]| {
        for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *v = (*v).max(lo).min(hi);
        }
    };
    let mut eval = |x: &[S]| -> Result<S> {
        let f = objective(x);
        if !f.is_finite() {
            return Err(Error::NonFiniteObjective {
                at: x.iter().map(|v| v.to_f64c()).collect(),
            });
        }
        Ok(f)
    };

    let mut simplex: Vec<Vec<S>> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    project(&mut start);
    simplex.push(start.clone());
    for i in 0..n {
        let mut v = start.clone();
        let stepped = v[i] + initial_step[i];
        // Step away from a bound if the forward step is clipped off.
        v[i] = if stepped > bounds[i].1 {
            (v[i] - initial_step[i]).max(bounds[i].0)
        } else {
            stepped.max(bounds[i].0)
        };
        simplex.push(v);
    }
    let mut values: Vec<S> = simplex.iter().map(|v| eval(v)).collect::<Result<_>>()?;

    for iter in 0..config.max_iters {
        // Order: best first.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let reorder_s: Vec<Vec<S>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let reorder_v: Vec<S> = order.iter().map(|&i| values[i]).collect();
        simplex = reorder_s;
        values = reorder_v;

        if let Some(cb) = on_iteration.as_deref_mut() {
            cb(iter, values[0]);
        }

        // Termination: simplex extent and value spread.
        let mut max_extent = S::zero();
        for v in &simplex[1..] {
            let mut d = S::zero();
            for i in 0..n {
                d = d + (v[i] - simplex[0][i]).abs();
            }
            max_extent = max_extent.max(d);
        }
        let f_spread = values[n] - values[0];
        if max_extent < config.xtol || f_spread < config.ftol {
            break;
        }

        // Centroid of all but the worst.
        let mut centroid = vec![S::zero(); n];
        for v in &simplex[..n] {
            for i in 0..n {
                centroid[i] = centroid[i] + v[i];
            }
        }
        for c in centroid.iter_mut() {
            *c = *c / S::c(n as f64);
        }

        let blend = |alpha: S| -> Vec<S> {
            let mut x: Vec<S> = (0..n)
                .map(|i| centroid[i] + alpha * (centroid[i] - simplex[n][i]))
                .collect();
            project(&mut x);
            x
        };

        let xr = blend(S::one());
        let fr = eval(&xr)?;
        if fr < values[0] {
            let xe = blend(S::c(2.0));
            let fe = eval(&xe)?;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            // Contraction (outside if the reflection improved on the worst).
            let xc = if fr < values[n] {
                blend(S::c(0.5))
            } else {
                blend(-S::c(0.5))
            };
            let fc = eval(&xc)?;
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                // Shrink toward the best vertex.
                for j in 1..=n {
                    for i in 0..n {
                        simplex[j][i] =
                            simplex[0][i] + S::c(0.5) * (simplex[j][i] - simplex[0][i]);
                    }
                    project(&mut simplex[j]);
                    values[j] = eval(&simplex[j])?;
                }
            }
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .unwrap();
    Ok((simplex[best].clone(), values[best]))
}

/// Scene context shared across object optimizations.
pub struct SceneContext<'a, S> {
    /// Candidate object classes: (class id, mesh).
    pub classes: &'a [(u32, &'a Mesh<S>)],
    pub cameras: &'a [Camera<S>],
    pub distance_maps: &'a [DistanceMap<S>],
    /// Binarization threshold used to build the distance maps.
    pub t_b: S,
}

fn params_to_pose<S: Real>(anchor: Vec3<S>, params: &PoseParams<S>) -> Pose<S> {
    Pose::new(
        Mat3::from_rotation_vector(params.axis_angle),
        anchor.add(params.translation_offset),
    )
}

/// Optimize one object anchored at `center`, occlusion-aware against the
/// already-placed objects. Tries every class in the context and returns
/// the lowest-cost (class id, pose, cost).
#[allow(clippy::too_many_arguments)]
pub fn optimize_object<S: Real>(
    center: &Center3D<S>,
    placed_meshes: &[&Mesh<S>],
    placed_poses: &[Pose<S>],
    ctx: &SceneContext<'_, S>,
    config: &OptimizerConfig<S>,
    rng: &mut ChaCha8Rng,
    object_ordinal: usize,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<(u32, Pose<S>, S)>
where
    StandardNormal: Distribution<S>,
{
    // View weights from the per-view center heatmap scores, renormalized.
    let score_sum: S = center
        .per_view_scores
        .iter()
        .fold(S::zero(), |a, &b| a + b);
    let weights: Vec<S> = if score_sum > S::zero() {
        center
            .per_view_scores
            .iter()
            .map(|&s| s / score_sum)
            .collect()
    } else {
        vec![
            S::one() / S::c(ctx.cameras.len() as f64);
            ctx.cameras.len()
        ]
    };
    let (w, h) = (ctx.cameras[0].width, ctx.cameras[0].height);
    let cost_config = CostConfig::new(ctx.t_b, weights, crate::costfn::image_diagonal(w, h));
    let evaluator = SceneCostEvaluator::new(
        placed_meshes,
        placed_poses,
        ctx.cameras,
        ctx.distance_maps,
        &cost_config,
    );

    let mut best: Option<(u32, Pose<S>, S)> = None;
    for &(class_id, mesh) in ctx.classes {
        let candidates = sample_candidates(config, mesh.diameter, rng);
        let poses: Vec<Pose<S>> = candidates
            .iter()
            .map(|p| params_to_pose(center.position, p))
            .collect();
        let costs = batch_cost(&evaluator, mesh, &poses);

        let mut order: Vec<usize> = (0..costs.len()).collect();
        order.sort_by(|&a, &b| costs[a].partial_cmp(&costs[b]).unwrap().then(a.cmp(&b)));
        // Screen a wider, rotationally diverse candidate set with short
        // simplex runs before committing to full refinement. Coarse costs
        // alone rank poorly here: shallow spurious basins (hypothesis
        // edges draped over *other* objects' target edges) beat the true
        // basin's samples, which start 20–30° off their optimum. A few
        // simplex iterations sink true-basin starts well below every
        // spurious floor.
        let min_sep = S::c(REFINE_MIN_ROTATION_SEPARATION);
        let n_screen = (config.n_refine * 4).max(8);
        let mut screen_set: Vec<usize> = Vec::with_capacity(n_screen);
        for &ci in &order {
            if screen_set.len() >= n_screen {
                break;
            }
            let rot = Mat3::from_rotation_vector(candidates[ci].axis_angle);
            let diverse = screen_set.iter().all(|&sj| {
                let prev = Mat3::from_rotation_vector(candidates[sj].axis_angle);
                prev.transpose().mul_mat(&rot).to_rotation_vector().norm() > min_sep
            });
            if diverse {
                screen_set.push(ci);
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceRow {
                object_ordinal,
                phase: format!("candidates_class{class_id}"),
                iteration: 0,
                best_cost: costs[order[0]].to_f64c(),
            });
        }

        let bound = config.translation_bound_for(mesh.diameter);
        let t_step = S::c(0.05) * mesh.diameter;
        let r_step = S::c(0.1);
        let pi = S::c(std::f64::consts::PI);
        let bounds = [
            (-bound, bound),
            (-bound, bound),
            (-bound, bound),
            (-pi, pi),
            (-pi, pi),
            (-pi, pi),
        ];
        let steps = [t_step, t_step, t_step, r_step, r_step, r_step];
        let anchor = center.position;
        // One bounded simplex run in an axis-angle chart re-centered on
        // `base_rot` (avoids chart boundary issues at ‖θ‖ ≈ π).
        let run_simplex = |base_rot: Mat3<S>,
                           offset: Vec3<S>,
                           max_iters: usize,
                           rows: Option<&mut Vec<(usize, f64)>>|
         -> Result<(Mat3<S>, Vec3<S>, S)> {
            let mut scratch = evaluator.new_scratch();
            let mut objective = |x: &[S]| {
                let delta = Vec3::new(x[3], x[4], x[5]);
                let rot = Mat3::from_rotation_vector(delta).mul_mat(&base_rot);
                let pose = Pose::new(rot, anchor.add(Vec3::new(x[0], x[1], x[2])));
                evaluator.eval(mesh, &pose, &mut scratch)
            };
            let x0 = [offset.x, offset.y, offset.z, S::zero(), S::zero(), S::zero()];
            let simplex_config = SimplexConfig {
                max_iters,
                xtol: config.simplex_xtol,
                ftol: config.simplex_ftol,
            };
            let mut sink = rows;
            let mut cb = |iter: usize, cost: S| {
                if let Some(r) = sink.as_deref_mut() {
                    r.push((iter, cost.to_f64c()));
                }
            };
            let (x, f) = nelder_mead(
                &mut objective,
                &x0,
                &bounds,
                &steps,
                &simplex_config,
                Some(&mut cb),
            )?;
            let rot = Mat3::from_rotation_vector(Vec3::new(x[3], x[4], x[5])).mul_mat(&base_rot);
            Ok((rot, Vec3::new(x[0], x[1], x[2]), f))
        };

        let screen_iters = (config.simplex_max_iters / 8).max(15);
        let mut screened: Vec<(Mat3<S>, Vec3<S>, S)> = Vec::with_capacity(screen_set.len());
        for &ci in &screen_set {
            let cand = &candidates[ci];
            screened.push(run_simplex(
                Mat3::from_rotation_vector(cand.axis_angle),
                cand.translation_offset,
                screen_iters,
                None,
            )?);
        }
        screened.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceRow {
                object_ordinal,
                phase: format!("screen_class{class_id}"),
                iteration: screen_iters,
                best_cost: screened[0].2.to_f64c(),
            });
        }

        let mut class_best: (Pose<S>, S) = (poses[order[0]], costs[order[0]]);
        for (k, &(base_rot, offset, _)) in
            screened.iter().take(config.n_refine).enumerate()
        {
            let mut rows: Vec<(usize, f64)> = Vec::new();
            let (rot, off, f) = run_simplex(
                base_rot,
                offset,
                config.simplex_max_iters,
                trace.is_some().then_some(&mut rows),
            )?;
            if let Some(t) = trace.as_deref_mut() {
                for (iter, cost) in rows {
                    t.push(TraceRow {
                        object_ordinal,
                        phase: format!("simplex{k}_class{class_id}"),
                        iteration: iter,
                        best_cost: cost,
                    });
                }
            }
            if f < class_best.1 {
                class_best = (Pose::new(rot, anchor.add(off)), f);
            }
        }
        // Near-symmetric shapes converge to a 180° flip of the true pose
        // often enough to matter: the long outer edges align and only
        // shorter interior edges disagree (an L-profile with similar leg
        // lengths flipped about its in-plane diagonal is the canonical
        // case). The flips are involutions, so re-flipping the winner
        // and refining recovers the true pose when that happened. Each
        // flip is screened briefly and refined in full only if it
        // already beats the winner; truly symmetric flips tie and are
        // skipped.
        let winner = class_best;
        let d = S::c(std::f64::consts::FRAC_1_SQRT_2);
        let z = S::zero();
        let o = S::one();
        let flip_axes = [
            Vec3::new(o, z, z),
            Vec3::new(z, o, z),
            Vec3::new(z, z, o),
            Vec3::new(d, d, z),
            Vec3::new(d, -d, z),
            Vec3::new(d, z, d),
            Vec3::new(d, z, -d),
            Vec3::new(z, d, d),
            Vec3::new(z, d, -d),
        ];
        for axis in flip_axes {
            let flip = Mat3::from_axis_angle(axis, pi);
            let (rot1, off1, f1) = run_simplex(
                winner.0.rotation.mul_mat(&flip),
                winner.0.translation.sub(anchor),
                screen_iters,
                None,
            )?;
            if f1 < class_best.1 {
                let (rot2, off2, f2) =
                    run_simplex(rot1, off1, config.simplex_max_iters, None)?;
                if f2 < class_best.1 {
                    class_best = (Pose::new(rot2, anchor.add(off2)), f2);
                }
            }
        }
        if best.as_ref().is_none_or(|b| class_best.1 < b.2) {
            best = Some((class_id, class_best.0, class_best.1));
        }
    }
    Ok(best.expect("at least one object class"))
}

/// Sequential scene optimization: centers sorted by descending aggregate
/// score; each object is optimized with the previously placed objects as
/// occluders.
pub fn optimize_scene<S: Real>(
    centers: &[Center3D<S>],
    ctx: &SceneContext<'_, S>,
    config: &OptimizerConfig<S>,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<SceneEstimate<S>>
where
    StandardNormal: Distribution<S>,
{
    if centers.is_empty() {
        return Err(Error::EmptyScene);
    }
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| {
        centers[b]
            .aggregate_score
            .partial_cmp(&centers[a].aggregate_score)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut estimate = SceneEstimate {
        objects: Vec::new(),
    };
    let mesh_by_class = |class_id: u32| {
        ctx.classes
            .iter()
            .find(|(id, _)| *id == class_id)
            .map(|(_, m)| *m)
            .expect("class id from optimize_object")
    };
    for (ordinal, &ci) in order.iter().enumerate() {
        let center = &centers[ci];
        let placed_meshes: Vec<&Mesh<S>> = estimate
            .objects
            .iter()
            .map(|o| mesh_by_class(o.class_id))
            .collect();
        let placed_poses: Vec<Pose<S>> = estimate.objects.iter().map(|o| o.pose).collect();
        let (class_id, pose, cost) = optimize_object(
            center,
            &placed_meshes,
            &placed_poses,
            ctx,
            config,
            &mut rng,
            ordinal,
            trace.as_deref_mut(),
        )?;
        estimate.objects.push(EstimatedObject {
            class_id,
            pose,
            per_view_scores: center.per_view_scores.clone(),
            cost,
        });
    }
    Ok(estimate)
}
