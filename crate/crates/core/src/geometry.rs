//! Rigid-body transforms, pinhole cameras, rays, and ray-pair midpoints.
//!
//! Conventions: world units are meters, image units are pixels. Camera
//! frames are right-handed with +z looking into the scene; pixel (i, j)
//! has its center at image coordinates (j + 0.5, i + 0.5).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// 2-vector (image coordinates, pixels).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Real> Vec2<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> S {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

/// 3-vector (world or camera coordinates, meters).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Real> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    pub fn zeros() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn scale(self, s: S) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> S {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        self.scale(S::one() / n)
    }

    pub fn to_array(self) -> [S; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [S; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// 3x3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<S> {
    pub m: [[S; 3]; 3],
}

impl<S: Real> Mat3<S> {
    pub fn identity() -> Self {
        let o = S::one();
        let z = S::zero();
        Self {
            m: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn from_rows(r0: [S; 3], r1: [S; 3], r2: [S; 3]) -> Self {
        Self { m: [r0, r1, r2] }
    }

    pub fn mul_vec(&self, v: Vec3<S>) -> Vec3<S> {
        Vec3::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        )
    }

    #[allow(clippy::needless_range_loop)]
    pub fn mul_mat(&self, o: &Self) -> Self {
        let mut r = [[S::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = S::zero();
                for k in 0..3 {
                    acc = acc + self.m[i][k] * o.m[k][j];
                }
                r[i][j] = acc;
            }
        }
        Self { m: r }
    }

    #[allow(clippy::needless_range_loop)]
    pub fn transpose(&self) -> Self {
        let mut r = [[S::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = self.m[j][i];
            }
        }
        Self { m: r }
    }

    pub fn det(&self) -> S {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Max absolute element of `self - other`.
    pub fn max_abs_diff(&self, o: &Self) -> S {
        let mut d = S::zero();
        for i in 0..3 {
            for j in 0..3 {
                let e = (self.m[i][j] - o.m[i][j]).abs();
                if e > d {
                    d = e;
                }
            }
        }
        d
    }

    /// Deviation from orthonormality: max |R Rᵀ − I| plus |det − 1|.
    pub fn orthonormality_error(&self) -> S {
        let rrt = self.mul_mat(&self.transpose());
        rrt.max_abs_diff(&Self::identity()) + (self.det() - S::one()).abs()
    }

    /// Re-orthonormalize via Gram-Schmidt on the rows.
    pub fn orthonormalized(&self) -> Self {
        let r0 = Vec3::from_array(self.m[0]).normalized();
        let mut r1 = Vec3::from_array(self.m[1]);
        r1 = r1.sub(r0.scale(r0.dot(r1))).normalized();
        let r2 = r0.cross(r1);
        Self::from_rows(r0.to_array(), r1.to_array(), r2.to_array())
    }

    /// Rotation about `axis` (unit) by `angle` radians (Rodrigues).
    pub fn from_axis_angle(axis: Vec3<S>, angle: S) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        let t = S::one() - c;
        let (x, y, z) = (axis.x, axis.y, axis.z);
        Self::from_rows(
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        )
    }

    /// Rotation from an axis-angle 3-vector (angle = norm).
    pub fn from_rotation_vector(v: Vec3<S>) -> Self {
        let angle = v.norm();
        if angle < S::c(1e-12) {
            return Self::identity();
        }
        Self::from_axis_angle(v.scale(S::one() / angle), angle)
    }

    /// Axis-angle 3-vector of a rotation matrix, with norm in [0, π].
    pub fn to_rotation_vector(&self) -> Vec3<S> {
        let m = &self.m;
        let trace = m[0][0] + m[1][1] + m[2][2];
        let two = S::c(2.0);
        let cos_a = ((trace - S::one()) / two).max(-S::one()).min(S::one());
        let angle = cos_a.acos();
        if angle < S::c(1e-12) {
            return Vec3::zeros();
        }
        if angle > S::c(std::f64::consts::PI - 1e-6) {
            // Near π: extract axis from R + I.
            let xx = ((m[0][0] + S::one()) / two).max(S::zero()).sqrt();
            let yy = ((m[1][1] + S::one()) / two).max(S::zero()).sqrt();
            let zz = ((m[2][2] + S::one()) / two).max(S::zero()).sqrt();
            let mut axis = Vec3::new(xx, yy, zz);
            // Fix signs from the off-diagonal sums.
            if m[0][1] + m[1][0] < S::zero() {
                axis.y = -axis.y;
            }
            if m[0][2] + m[2][0] < S::zero() {
                axis.z = -axis.z;
            }
            let n = axis.norm();
            if n > S::zero() {
                return axis.scale(angle / n);
            }
            return Vec3::zeros();
        }
        let k = angle / (two * angle.sin());
        Vec3::new(
            (m[2][1] - m[1][2]) * k,
            (m[0][2] - m[2][0]) * k,
            (m[1][0] - m[0][1]) * k,
        )
    }
}

/// Rigid transform: `p_out = rotation * p_in + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<S> {
    pub rotation: Mat3<S>,
    pub translation: Vec3<S>,
}

impl<S: Real> Pose<S> {
    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Mat3<S>, translation: Vec3<S>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_rotation_vector(rot_vec: Vec3<S>, translation: Vec3<S>) -> Self {
        Self::new(Mat3::from_rotation_vector(rot_vec), translation)
    }

    pub fn apply(&self, p: Vec3<S>) -> Vec3<S> {
        self.rotation.mul_vec(p).add(self.translation)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, rt.mul_vec(self.translation).scale(-S::one()))
    }
}

/// Applies `b` then `a`. Re-orthonormalizes if rotation drift exceeds 1e-9.
pub fn compose<S: Real>(a: &Pose<S>, b: &Pose<S>) -> Pose<S> {
    let mut rotation = a.rotation.mul_mat(&b.rotation);
    if rotation.orthonormality_error() > S::c(1e-9) {
        rotation = rotation.orthonormalized();
    }
    Pose::new(rotation, a.rotation.mul_vec(b.translation).add(a.translation))
}

/// Pinhole camera: intrinsics plus a world→camera pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera<S> {
    pub fx: S,
    pub fy: S,
    pub cx: S,
    pub cy: S,
    pub width: usize,
    pub height: usize,
    pub world_to_cam: Pose<S>,
}

impl<S: Real> Camera<S> {
    /// World point into the camera frame.
    pub fn to_camera(&self, point_world: Vec3<S>) -> Vec3<S> {
        self.world_to_cam.apply(point_world)
    }

    /// Camera center in world coordinates.
    pub fn center_world(&self) -> Vec3<S> {
        self.world_to_cam.inverse().translation
    }

    /// Project a camera-frame point to pixel coordinates.
    pub fn project_cam(&self, pc: Vec3<S>) -> Result<Vec2<S>> {
        if pc.z <= S::zero() {
            return Err(Error::BehindCamera { z: pc.z.to_f64c() });
        }
        Ok(Vec2::new(
            self.fx * pc.x / pc.z + self.cx,
            self.fy * pc.y / pc.z + self.cy,
        ))
    }

    /// Project a world point to pixel coordinates.
    pub fn project(&self, point_world: Vec3<S>) -> Result<Vec2<S>> {
        self.project_cam(self.to_camera(point_world))
    }

    /// World-frame ray through a pixel, originating at the camera center.
    pub fn pixel_ray(&self, pixel: Vec2<S>) -> Ray<S> {
        let dir_cam = Vec3::new(
            (pixel.x - self.cx) / self.fx,
            (pixel.y - self.cy) / self.fy,
            S::one(),
        );
        let cam_to_world = self.world_to_cam.inverse();
        let dir_world = cam_to_world.rotation.mul_vec(dir_cam).normalized();
        Ray {
            origin: cam_to_world.translation,
            direction: dir_world,
        }
    }
}

/// Half-line: origin plus non-negative multiples of a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray<S> {
    pub origin: Vec3<S>,
    pub direction: Vec3<S>,
}

impl<S: Real> Ray<S> {
    pub fn at(&self, t: S) -> Vec3<S> {
        self.origin.add(self.direction.scale(t))
    }
}

/// Midpoint of the two closest points of a ray pair, plus their distance.
///
/// Closest-point parameters are clamped to t ≥ 0 (rays, not lines).
pub fn ray_pair_midpoint<S: Real>(a: &Ray<S>, b: &Ray<S>) -> Result<(Vec3<S>, S)> {
    let d = a.direction.dot(b.direction);
    if d.abs() > S::one() - S::c(1e-9) {
        return Err(Error::Parallel { dot: d.to_f64c() });
    }
    let w = a.origin.sub(b.origin);
    // Unconstrained closest points of the two lines.
    let pa = a.direction.dot(w);
    let pb = b.direction.dot(w);
    let denom = S::one() - d * d;
    let ta = (d * pb - pa) / denom;
    let tb = (pb - d * pa) / denom;
    // If the line minimum leaves the half-line domain, the constrained
    // minimum lies on a boundary edge; check both.
    let mut candidates = [(ta, tb); 3];
    let mut n = 1;
    if ta < S::zero() || tb < S::zero() {
        n = 0;
        let tb0 = b.direction.dot(a.origin.sub(b.origin)).max(S::zero());
        candidates[n] = (S::zero(), tb0);
        n += 1;
        let ta0 = a.direction.dot(b.origin.sub(a.origin)).max(S::zero());
        candidates[n] = (ta0, S::zero());
        n += 1;
    }
    let mut best: Option<(Vec3<S>, S)> = None;
    for &(ca_t, cb_t) in &candidates[..n] {
        let ca = a.at(ca_t);
        let cb = b.at(cb_t);
        let gap = ca.sub(cb).norm();
        if best.is_none_or(|(_, g)| gap < g) {
            best = Some((ca.add(cb).scale(S::c(0.5)), gap));
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type V3 = Vec3<f64>;

    fn random_rotation(rng: &mut impl Rng) -> Mat3<f64> {
        let axis = V3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
        .normalized();
        Mat3::from_axis_angle(axis, rng.gen_range(-3.0..3.0))
    }

    fn random_pose(rng: &mut impl Rng) -> Pose<f64> {
        Pose::new(
            random_rotation(rng),
            V3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ),
        )
    }

    fn test_camera() -> Camera<f64> {
        Camera {
            fx: 500.0,
            fy: 500.0,
            cx: 160.0,
            cy: 128.0,
            width: 320,
            height: 256,
            world_to_cam: Pose::identity(),
        }
    }

    #[test]
    fn compose_identity_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_pose(&mut rng);
        let id = Pose::identity();
        let c = compose(&id, &p);
        assert!(c.rotation.max_abs_diff(&p.rotation) < 1e-15);
        let c2 = compose(&p, &p.inverse());
        assert!(c2.rotation.max_abs_diff(&Mat3::identity()) < 1e-9);
        assert!(c2.translation.norm() < 1e-9);
    }

    #[test]
    fn compose_matches_matrix_product_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = random_pose(&mut rng);
            let b = random_pose(&mut rng);
            let c = compose(&a, &b);
            // Oracle: element-wise 3x3 product and affine translation.
            for i in 0..3 {
                for j in 0..3 {
                    let mut e = 0.0;
                    for k in 0..3 {
                        e += a.rotation.m[i][k] * b.rotation.m[k][j];
                    }
                    assert_abs_diff_eq!(c.rotation.m[i][j], e, epsilon = 1e-12);
                }
            }
            let t = a.rotation.mul_vec(b.translation).add(a.translation);
            assert_abs_diff_eq!(c.translation.x, t.x, epsilon = 1e-12);
            // Action equivalence on a point.
            let p = V3::new(0.3, -0.7, 1.1);
            let q1 = c.apply(p);
            let q2 = a.apply(b.apply(p));
            assert!(q1.sub(q2).norm() < 1e-12);
        }
    }

    #[test]
    fn project_principal_point_and_offset() {
        let cam = test_camera();
        let p = cam.project(V3::new(0.0, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(p.x, 160.0);
        assert_abs_diff_eq!(p.y, 128.0);
        let p = cam.project(V3::new(0.1, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(p.x, 210.0);
        assert_abs_diff_eq!(p.y, 128.0);
    }

    #[test]
    fn project_behind_camera_errors() {
        let cam = test_camera();
        assert!(matches!(
            cam.project(V3::new(0.0, 0.0, -1.0)),
            Err(Error::BehindCamera { .. })
        ));
    }

    #[test]
    fn project_matches_homogeneous_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut cam = test_camera();
            cam.world_to_cam = random_pose(&mut rng);
            let pw = V3::new(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            );
            let pc = cam.to_camera(pw);
            if pc.z <= 0.1 {
                continue;
            }
            // Oracle: 3x4 projection matrix K [R | t] applied to homogeneous point.
            let k = [
                [cam.fx, 0.0, cam.cx],
                [0.0, cam.fy, cam.cy],
                [0.0, 0.0, 1.0],
            ];
            let r = &cam.world_to_cam.rotation.m;
            let t = cam.world_to_cam.translation;
            let mut proj = [[0.0f64; 4]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for l in 0..3 {
                        proj[i][j] += k[i][l] * r[l][j];
                    }
                }
                proj[i][3] = k[i][0] * t.x + k[i][1] * t.y + k[i][2] * t.z;
            }
            let h = [pw.x, pw.y, pw.z, 1.0];
            let mut uvw = [0.0f64; 3];
            for i in 0..3 {
                for j in 0..4 {
                    uvw[i] += proj[i][j] * h[j];
                }
            }
            let expected = (uvw[0] / uvw[2], uvw[1] / uvw[2]);
            let got = cam.project(pw).unwrap();
            assert_abs_diff_eq!(got.x, expected.0, epsilon = 1e-9);
            assert_abs_diff_eq!(got.y, expected.1, epsilon = 1e-9);
        }
    }

    #[test]
    fn pixel_ray_principal_point_is_optical_axis() {
        let cam = test_camera();
        let ray = cam.pixel_ray(Vec2::new(160.0, 128.0));
        assert!(ray.origin.norm() < 1e-12);
        assert!(ray.direction.sub(V3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn project_pixel_ray_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let mut cam = test_camera();
            cam.world_to_cam = random_pose(&mut rng);
            let pw = V3::new(
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
            );
            if cam.to_camera(pw).z <= 0.2 {
                continue;
            }
            let pix = cam.project(pw).unwrap();
            let ray = cam.pixel_ray(pix);
            // Point-to-line distance oracle.
            let w = pw.sub(ray.origin);
            let dist = w.sub(ray.direction.scale(ray.direction.dot(w))).norm();
            assert!(dist < 1e-9, "point-ray distance {dist}");
            // Forward projection consistency along the ray.
            for t in [0.5, 1.0, 2.0] {
                let q = cam.project(ray.at(t)).unwrap();
                assert!(q.sub(pix).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn ray_midpoint_intersecting_and_parallel() {
        let a = Ray {
            origin: V3::new(0.0, 0.0, 0.0),
            direction: V3::new(1.0, 0.0, 0.0),
        };
        let b = Ray {
            origin: V3::new(1.0, 1.0, 0.0),
            direction: V3::new(0.0, -1.0, 0.0),
        };
        let (mid, gap) = ray_pair_midpoint(&a, &b).unwrap();
        assert!(mid.sub(V3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!(gap < 1e-12);

        let c = Ray {
            origin: V3::new(0.0, 1.0, 0.0),
            direction: V3::new(1.0, 0.0, 0.0),
        };
        assert!(matches!(
            ray_pair_midpoint(&a, &c),
            Err(Error::Parallel { .. })
        ));
    }

    #[test]
    fn ray_midpoint_matches_grid_refinement_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = Ray {
                origin: V3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ),
                direction: V3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
                .normalized(),
            };
            let b = Ray {
                origin: V3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ),
                direction: V3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
                .normalized(),
            };
            if a.direction.dot(b.direction).abs() > 0.99 {
                continue;
            }
            let (_, gap) = ray_pair_midpoint(&a, &b).unwrap();

            // Oracle: coarse grid over (ta, tb) then local refinement.
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for i in 0..=400 {
                for j in 0..=400 {
                    let ta = i as f64 * 0.02;
                    let tb = j as f64 * 0.02;
                    let d = a.at(ta).sub(b.at(tb)).norm();
                    if d < best.0 {
                        best = (d, ta, tb);
                    }
                }
            }
            let mut step = 0.02;
            let (mut ta, mut tb) = (best.1, best.2);
            for _ in 0..60 {
                let mut improved = false;
                for (da, db) in [
                    (step, 0.0),
                    (-step, 0.0),
                    (0.0, step),
                    (0.0, -step),
                    (step, step),
                    (-step, -step),
                    (step, -step),
                    (-step, step),
                ] {
                    let (na, nb) = ((ta + da).max(0.0), (tb + db).max(0.0));
                    let d = a.at(na).sub(b.at(nb)).norm();
                    if d < best.0 {
                        best.0 = d;
                        ta = na;
                        tb = nb;
                        improved = true;
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            assert!((gap - best.0).abs() < 1e-6, "gap {gap} oracle {}", best.0);
        }
    }

    proptest! {
        #[test]
        fn pose_inverse_roundtrip(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -0.9f64..0.9,
                                  tx in -2.0f64..2.0, ty in -2.0f64..2.0, tz in -2.0f64..2.0) {
            let p = Pose::from_rotation_vector(Vec3::new(ax, ay, az), Vec3::new(tx, ty, tz));
            let c = compose(&p, &p.inverse());
            prop_assert!(c.rotation.max_abs_diff(&Mat3::identity()) < 1e-9);
            prop_assert!(c.translation.norm() < 1e-9);
        }

        #[test]
        fn rotation_vector_roundtrip(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0) {
            let v = Vec3::new(ax, ay, az);
            let r = Mat3::from_rotation_vector(v);
            let v2 = r.to_rotation_vector();
            let r2 = Mat3::from_rotation_vector(v2);
            prop_assert!(r.max_abs_diff(&r2) < 1e-9);
        }

        #[test]
        fn midpoint_symmetric(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mk = |rng: &mut ChaCha8Rng| Ray {
                origin: V3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                direction: V3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalized(),
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            if a.direction.dot(b.direction).abs() <= 0.999 {
                let (m1, g1) = ray_pair_midpoint(&a, &b).unwrap();
                let (m2, g2) = ray_pair_midpoint(&b, &a).unwrap();
                prop_assert!(m1.sub(m2).norm() < 1e-12);
                prop_assert!((g1 - g2).abs() < 1e-12);
            }
        }
    }
}
