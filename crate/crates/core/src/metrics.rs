//! Symmetry-aware pose errors (MSSD, MSPD) and average-recall scoring.

use crate::error::{Error, Result};
use crate::geometry::{Camera, Pose, Vec3};
use crate::scalar::Real;

/// Rigid transforms mapping the object model onto itself. Always contains
/// the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrySet<S> {
    pub transforms: Vec<Pose<S>>,
}

impl<S: Real> SymmetrySet<S> {
    pub fn identity_only() -> Self {
        Self {
            transforms: vec![Pose::identity()],
        }
    }

    pub fn new(mut transforms: Vec<Pose<S>>) -> Self {
        let has_identity = transforms.iter().any(|t| {
            t.rotation.max_abs_diff(&crate::geometry::Mat3::identity()) < S::c(1e-12)
                && t.translation.norm() < S::c(1e-12)
        });
        if !has_identity {
            transforms.insert(0, Pose::identity());
        }
        Self { transforms }
    }
}

/// Pose error for one object instance.
#[derive(Debug, Clone, Copy)]
pub struct PoseError<S> {
    /// Pixels (max over nothing if absent; +inf marks a missed instance).
    pub mspd: S,
    /// Meters; +inf marks a missed instance.
    pub mssd: S,
    pub diameter: S,
}

/// Maximum symmetry-aware surface distance:
/// min over S of max over x of ‖P̂x − P̄Sx‖.
pub fn mssd<S: Real>(
    p_hat: &Pose<S>,
    p_bar: &Pose<S>,
    symmetries: &SymmetrySet<S>,
    vertices: &[Vec3<S>],
) -> Result<S> {
    if vertices.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut best = S::infinity();
    for sym in &symmetries.transforms {
        let composed = crate::geometry::compose(p_bar, sym);
        let mut worst = S::zero();
        for &x in vertices {
            let d = p_hat.apply(x).sub(composed.apply(x)).norm();
            if d > worst {
                worst = d;
            }
            if worst >= best {
                break;
            }
        }
        if worst < best {
            best = worst;
        }
    }
    Ok(best)
}

/// Maximum symmetry-aware projection distance:
/// min over S of max over x of ‖proj(P̂x) − proj(P̄Sx)‖.
pub fn mspd<S: Real>(
    p_hat: &Pose<S>,
    p_bar: &Pose<S>,
    symmetries: &SymmetrySet<S>,
    vertices: &[Vec3<S>],
    camera: &Camera<S>,
) -> Result<S> {
    if vertices.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let hat_proj: Vec<crate::geometry::Vec2<S>> = vertices
        .iter()
        .map(|&x| camera.project(p_hat.apply(x)))
        .collect::<Result<_>>()?;
    let mut best = S::infinity();
    for sym in &symmetries.transforms {
        let composed = crate::geometry::compose(p_bar, sym);
        let mut worst = S::zero();
        for (&x, &hp) in vertices.iter().zip(&hat_proj) {
            let bp = camera.project(composed.apply(x))?;
            let d = hp.sub(bp).norm();
            if d > worst {
                worst = d;
            }
            if worst >= best {
                break;
            }
        }
        if worst < best {
            best = worst;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMetric {
    Mspd,
    Mssd,
}

/// Fraction of instances below threshold, averaged over the threshold
/// grid. MSSD thresholds are fractions of the object diameter; MSPD
/// thresholds are pixels.
pub fn average_recall<S: Real>(
    errors: &[PoseError<S>],
    metric: ErrorMetric,
    thresholds: &[S],
) -> S {
    assert!(!errors.is_empty(), "empty error list");
    assert!(!thresholds.is_empty(), "empty threshold list");
    let mut total = S::zero();
    for &th in thresholds {
        let mut below = 0usize;
        for e in errors {
            let ok = match metric {
                ErrorMetric::Mspd => e.mspd < th,
                ErrorMetric::Mssd => e.mssd < th * e.diameter,
            };
            if ok {
                below += 1;
            }
        }
        total = total + S::c(below as f64) / S::c(errors.len() as f64);
    }
    total / S::c(thresholds.len() as f64)
}

/// BOP-style threshold sweep for MSSD: 0.05..0.50 step 0.05 of diameter.
pub fn bop_mssd_thresholds<S: Real>() -> Vec<S> {
    (1..=10).map(|i| S::c(i as f64 * 0.05)).collect()
}

/// BOP-style threshold sweep for MSPD: 5..50 step 5 pixels.
pub fn bop_mspd_thresholds<S: Real>() -> Vec<S> {
    (1..=10).map(|i| S::c(i as f64 * 5.0)).collect()
}

/// An instance pairing for evaluation: estimate index (or None for a
/// missed ground truth) against a ground-truth index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchedPair {
    pub estimate: Option<usize>,
    pub ground_truth: usize,
}

/// Greedy 6D-localization matching within each object class: pairs are
/// taken in ascending MSSD order; unmatched ground truths become misses.
pub fn match_estimates<S: Real>(
    estimates: &[(u32, Pose<S>)],
    ground_truth: &[(u32, Pose<S>)],
    symmetries_by_class: &dyn Fn(u32) -> SymmetrySet<S>,
    vertices_by_class: &dyn Fn(u32) -> Vec<Vec3<S>>,
) -> Vec<MatchedPair> {
    let mut pairs: Vec<(S, usize, usize)> = Vec::new();
    for (ei, (ec, ep)) in estimates.iter().enumerate() {
        for (gi, (gc, gp)) in ground_truth.iter().enumerate() {
            if ec != gc {
                continue;
            }
            let verts = vertices_by_class(*ec);
            let syms = symmetries_by_class(*ec);
            if let Ok(d) = mssd(ep, gp, &syms, &verts) {
                pairs.push((d, ei, gi));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut est_used = vec![false; estimates.len()];
    let mut gt_used = vec![false; ground_truth.len()];
    let mut out = Vec::new();
    for (_, ei, gi) in pairs {
        if est_used[ei] || gt_used[gi] {
            continue;
        }
        est_used[ei] = true;
        gt_used[gi] = true;
        out.push(MatchedPair {
            estimate: Some(ei),
            ground_truth: gi,
        });
    }
    for (gi, used) in gt_used.iter().enumerate() {
        if !used {
            out.push(MatchedPair {
                estimate: None,
                ground_truth: gi,
            });
        }
    }
    out.sort_by_key(|p| p.ground_truth);
    out
}
