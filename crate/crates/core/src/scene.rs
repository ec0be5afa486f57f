//! Scene model: primitive test objects with exact symmetry sets, synthetic
//! scene generation (objects in a box, cameras on a ring), and a versioned
//! JSON scene file format.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Camera, Mat3, Pose, Vec3};
use crate::mesh::Mesh;
use crate::metrics::SymmetrySet;
use crate::optimizer::uniform_rotation;
use crate::scalar::Real;

pub const SCENE_FORMAT_VERSION: u32 = 1;

/// Test-object primitives with known discrete symmetry groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimitiveKind {
    Cube {
        side: f64,
    },
    Cuboid {
        x: f64,
        y: f64,
        z: f64,
    },
    Cylinder {
        radius: f64,
        height: f64,
        /// Ring discretization; also the axial symmetry order.
        segments: usize,
    },
    LBracket {
        leg_a: f64,
        leg_b: f64,
        thickness: f64,
        depth: f64,
    },
}

/// Watertight mesh plus its exact discrete symmetry set.
pub fn primitive_mesh<S: Real>(kind: &PrimitiveKind) -> Result<(Mesh<S>, SymmetrySet<S>)> {
    match *kind {
        PrimitiveKind::Cube { side } => {
            require_positive(&[("side", side)])?;
            Ok((box_mesh(side, side, side)?, cube_rotations()))
        }
        PrimitiveKind::Cuboid { x, y, z } => {
            require_positive(&[("x", x), ("y", y), ("z", z)])?;
            Ok((box_mesh(x, y, z)?, cuboid_rotations()))
        }
        PrimitiveKind::Cylinder {
            radius,
            height,
            segments,
        } => {
            require_positive(&[("radius", radius), ("height", height)])?;
            if segments < 3 {
                return Err(Error::InvalidDimensions {
                    what: format!("cylinder needs >= 3 segments, got {segments}"),
                });
            }
            Ok((
                cylinder_mesh(radius, height, segments)?,
                cylinder_symmetries(segments),
            ))
        }
        PrimitiveKind::LBracket {
            leg_a,
            leg_b,
            thickness,
            depth,
        } => {
            require_positive(&[
                ("leg_a", leg_a),
                ("leg_b", leg_b),
                ("thickness", thickness),
                ("depth", depth),
            ])?;
            if thickness >= leg_a || thickness >= leg_b {
                return Err(Error::InvalidDimensions {
                    what: "l-bracket thickness must be smaller than both legs".into(),
                });
            }
            Ok((
                l_bracket_mesh(leg_a, leg_b, thickness, depth)?,
                SymmetrySet::identity_only(),
            ))
        }
    }
}

fn require_positive(dims: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in dims {
        if v <= 0.0 {
            return Err(Error::InvalidDimensions {
                what: format!("{name} = {v} must be positive"),
            });
        }
    }
    Ok(())
}

fn box_mesh<S: Real>(x: f64, y: f64, z: f64) -> Result<Mesh<S>> {
    let (hx, hy, hz) = (S::c(x / 2.0), S::c(y / 2.0), S::c(z / 2.0));
    let mut vertices = Vec::with_capacity(8);
    for &sz in &[-S::one(), S::one()] {
        for &sy in &[-S::one(), S::one()] {
            for &sx in &[-S::one(), S::one()] {
                vertices.push(Vec3::new(sx * hx, sy * hy, sz * hz));
            }
        }
    }
    // Index layout: bit 0 = +x, bit 1 = +y, bit 2 = +z.
    let quads = [
        [0, 1, 3, 2], // z-
        [4, 6, 7, 5], // z+
        [0, 2, 6, 4], // x-
        [1, 5, 7, 3], // x+
        [0, 4, 5, 1], // y-
        [2, 3, 7, 6], // y+
    ];
    let mut triangles = Vec::with_capacity(12);
    for q in quads {
        triangles.push([q[0], q[1], q[2]]);
        triangles.push([q[0], q[2], q[3]]);
    }
    Mesh::new(vertices, triangles)
}

fn cylinder_mesh<S: Real>(radius: f64, height: f64, n: usize) -> Result<Mesh<S>> {
    let h = S::c(height / 2.0);
    let mut vertices = Vec::with_capacity(2 * n + 2);
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        vertices.push(Vec3::new(
            S::c(radius * theta.cos()),
            S::c(radius * theta.sin()),
            h,
        ));
    }
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        vertices.push(Vec3::new(
            S::c(radius * theta.cos()),
            S::c(radius * theta.sin()),
            -h,
        ));
    }
    let top_center = vertices.len();
    vertices.push(Vec3::new(S::zero(), S::zero(), h));
    let bottom_center = vertices.len();
    vertices.push(Vec3::new(S::zero(), S::zero(), -h));

    let mut triangles = Vec::with_capacity(4 * n);
    for k in 0..n {
        let k1 = (k + 1) % n;
        // Side quad.
        triangles.push([k, k1, n + k1]);
        triangles.push([k, n + k1, n + k]);
        // Caps.
        triangles.push([top_center, k, k1]);
        triangles.push([bottom_center, n + k1, n + k]);
    }
    Mesh::new(vertices, triangles)
}

fn l_bracket_mesh<S: Real>(leg_a: f64, leg_b: f64, t: f64, depth: f64) -> Result<Mesh<S>> {
    // L cross-section in the xy-plane, centered at its bbox center, then
    // extruded along z. Star-shaped from the inner corner, so cap fans
    // from vertex 0 stay inside the polygon.
    let (cx, cy) = (leg_a / 2.0, leg_b / 2.0);
    let profile = [
        (0.0, 0.0),
        (leg_a, 0.0),
        (leg_a, t),
        (t, t),
        (t, leg_b),
        (0.0, leg_b),
    ];
    let hz = depth / 2.0;
    let mut vertices = Vec::with_capacity(12);
    for &z in &[-hz, hz] {
        for &(px, py) in &profile {
            vertices.push(Vec3::new(S::c(px - cx), S::c(py - cy), S::c(z)));
        }
    }
    let mut triangles = Vec::new();
    for base in [0usize, 6] {
        for k in 1..5 {
            triangles.push([base, base + k, base + k + 1]);
        }
    }
    for k in 0..6usize {
        let k1 = (k + 1) % 6;
        triangles.push([k, k1, 6 + k1]);
        triangles.push([k, 6 + k1, 6 + k]);
    }
    Mesh::new(vertices, triangles)
}

/// The 24 rotations of the cube: signed permutation matrices with det +1.
fn cube_rotations<S: Real>() -> SymmetrySet<S> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(24);
    for perm in perms {
        for bits in 0..8u32 {
            let signs = [
                if bits & 1 != 0 { -1.0 } else { 1.0 },
                if bits & 2 != 0 { -1.0 } else { 1.0 },
                if bits & 4 != 0 { -1.0 } else { 1.0 },
            ];
            let mut m = [[S::zero(); 3]; 3];
            for i in 0..3 {
                m[i][perm[i]] = S::c(signs[i]);
            }
            let rot = Mat3 { m };
            if (rot.det() - S::one()).abs() < S::c(1e-12) {
                out.push(Pose::new(rot, Vec3::zeros()));
            }
        }
    }
    debug_assert_eq!(out.len(), 24);
    SymmetrySet::new(out)
}

/// Rectangular box with distinct extents: identity + the three 180° axis
/// rotations.
fn cuboid_rotations<S: Real>() -> SymmetrySet<S> {
    let flip = |sx: f64, sy: f64, sz: f64| {
        Pose::new(
            Mat3::from_rows(
                [S::c(sx), S::zero(), S::zero()],
                [S::zero(), S::c(sy), S::zero()],
                [S::zero(), S::zero(), S::c(sz)],
            ),
            Vec3::zeros(),
        )
    };
    SymmetrySet::new(vec![
        flip(1.0, 1.0, 1.0),
        flip(1.0, -1.0, -1.0),
        flip(-1.0, 1.0, -1.0),
        flip(-1.0, -1.0, 1.0),
    ])
}

/// n-fold axial rotations plus the 180° flip about x, composed: 2n total.
fn cylinder_symmetries<S: Real>(n: usize) -> SymmetrySet<S> {
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let rz = Mat3::from_axis_angle(Vec3::new(S::zero(), S::zero(), S::one()), S::c(theta));
        out.push(Pose::new(rz, Vec3::zeros()));
        let rx = Mat3::from_rows(
            [S::one(), S::zero(), S::zero()],
            [S::zero(), -S::one(), S::zero()],
            [S::zero(), S::zero(), -S::one()],
        );
        out.push(Pose::new(rx.mul_mat(&rz), Vec3::zeros()));
    }
    SymmetrySet::new(out)
}

/// Camera at `position` looking at `target` (world z up), pinhole with
/// square pixels and the principal point at the image center.
pub fn look_at_camera<S: Real>(
    position: Vec3<S>,
    target: Vec3<S>,
    focal: S,
    width: usize,
    height: usize,
) -> Camera<S> {
    let forward = target.sub(position).normalized();
    let up = Vec3::new(S::zero(), S::zero(), S::one());
    let right = forward.cross(up).normalized();
    let down = forward.cross(right);
    // Rows of world→cam rotation: camera x (right), y (down), z (forward).
    let rot = Mat3::from_rows(right.to_array(), down.to_array(), forward.to_array());
    let translation = rot.mul_vec(position).scale(-S::one());
    Camera {
        fx: focal,
        fy: focal,
        cx: S::c(width as f64 / 2.0),
        cy: S::c(height as f64 / 2.0),
        width,
        height,
        world_to_cam: Pose::new(rot, translation),
    }
}

/// Object class: mesh (with a file path for serialization) and symmetries.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectClass<S> {
    pub id: u32,
    pub mesh: Mesh<S>,
    pub symmetries: SymmetrySet<S>,
    pub mesh_path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    pub class_id: u32,
    pub pose: Pose<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene<S> {
    pub classes: Vec<ObjectClass<S>>,
    pub instances: Vec<Instance<S>>,
    pub cameras: Vec<Camera<S>>,
}

impl<S: Real> Scene<S> {
    pub fn class(&self, class_id: u32) -> Result<&ObjectClass<S>> {
        self.classes
            .iter()
            .find(|c| c.id == class_id)
            .ok_or_else(|| Error::Validation {
                what: format!("unknown class id {class_id}"),
            })
    }

    /// Per-instance (mesh, pose) pairs for rendering.
    #[allow(clippy::type_complexity)]
    pub fn instance_meshes(&self) -> Result<(Vec<&Mesh<S>>, Vec<Pose<S>>)> {
        let mut meshes = Vec::with_capacity(self.instances.len());
        let mut poses = Vec::with_capacity(self.instances.len());
        for inst in &self.instances {
            meshes.push(&self.class(inst.class_id)?.mesh);
            poses.push(inst.pose);
        }
        Ok((meshes, poses))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraRingSpec {
    pub n_views: usize,
    pub radius: f64,
    pub height: f64,
    pub focal: f64,
    pub image_width: usize,
    pub image_height: usize,
}

impl Default for CameraRingSpec {
    fn default() -> Self {
        Self {
            n_views: 6,
            radius: 0.8,
            height: 0.6,
            focal: 450.0,
            image_width: 320,
            image_height: 256,
        }
    }
}

/// Synthetic scene recipe for `generate_scene`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenSpec {
    pub n_objects: usize,
    /// Class mix; instances cycle through this list.
    pub classes: Vec<PrimitiveKind>,
    /// Placement region half-extents around the origin (meters).
    pub region_half_extents: [f64; 3],
    pub min_spacing: f64,
    pub camera_ring: CameraRingSpec,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            n_objects: 3,
            classes: vec![PrimitiveKind::Cuboid {
                x: 0.05,
                y: 0.08,
                z: 0.11,
            }],
            region_half_extents: [0.16, 0.16, 0.05],
            min_spacing: 0.15,
            camera_ring: CameraRingSpec::default(),
        }
    }
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Rejection-sampled object placement plus a camera ring, deterministic
/// per seed.
pub fn generate_scene(spec: &GenSpec, seed: u64) -> Result<Scene<f64>> {
    if spec.camera_ring.n_views < 2 {
        return Err(Error::Validation {
            what: format!("need >= 2 views, got {}", spec.camera_ring.n_views),
        });
    }
    if spec.min_spacing <= 0.0 {
        return Err(Error::Validation {
            what: "min_spacing must be positive".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes = Vec::with_capacity(spec.classes.len());
    for (i, kind) in spec.classes.iter().enumerate() {
        let (mesh, symmetries) = primitive_mesh::<f64>(kind)?;
        classes.push(ObjectClass {
            id: i as u32,
            mesh,
            symmetries,
            mesh_path: format!("meshes/class{i}.ply"),
        });
    }
    let he = spec.region_half_extents;
    let mut positions: Vec<Vec3<f64>> = Vec::with_capacity(spec.n_objects);
    let mut attempts = 0usize;
    while positions.len() < spec.n_objects {
        attempts += 1;
        if attempts > MAX_PLACEMENT_ATTEMPTS {
            return Err(Error::PlacementFailed {
                attempts: MAX_PLACEMENT_ATTEMPTS,
            });
        }
        let p = Vec3::new(
            rng.gen_range(-he[0]..=he[0]),
            rng.gen_range(-he[1]..=he[1]),
            rng.gen_range(-he[2]..=he[2]),
        );
        if positions
            .iter()
            .all(|q| q.sub(p).norm() >= spec.min_spacing)
        {
            positions.push(p);
        }
    }
    let instances: Vec<Instance<f64>> = positions
        .into_iter()
        .enumerate()
        .map(|(i, p)| Instance {
            class_id: (i % spec.classes.len()) as u32,
            pose: Pose::new(uniform_rotation(&mut rng), p),
        })
        .collect();
    let ring = &spec.camera_ring;
    let cameras: Vec<Camera<f64>> = (0..ring.n_views)
        .map(|i| {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / ring.n_views as f64;
            look_at_camera(
                Vec3::new(ring.radius * phi.cos(), ring.radius * phi.sin(), ring.height),
                Vec3::zeros(),
                ring.focal,
                ring.image_width,
                ring.image_height,
            )
        })
        .collect();
    Ok(Scene {
        classes,
        instances,
        cameras,
    })
}

// ---- Scene file (JSON + referenced PLY meshes) ----

#[derive(Serialize, Deserialize)]
struct PoseDoc {
    rotation: [f64; 9],
    translation_m: [f64; 3],
}

impl PoseDoc {
    fn from_pose(p: &Pose<f64>) -> Self {
        let m = &p.rotation.m;
        Self {
            rotation: [
                m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
            ],
            translation_m: [p.translation.x, p.translation.y, p.translation.z],
        }
    }

    fn to_pose(&self) -> Pose<f64> {
        let r = &self.rotation;
        Pose::new(
            Mat3::from_rows([r[0], r[1], r[2]], [r[3], r[4], r[5]], [r[6], r[7], r[8]]),
            Vec3::new(
                self.translation_m[0],
                self.translation_m[1],
                self.translation_m[2],
            ),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ClassDoc {
    id: u32,
    mesh_path: String,
    symmetries: Vec<PoseDoc>,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    class_id: u32,
    #[serde(flatten)]
    pose: PoseDoc,
}

#[derive(Serialize, Deserialize)]
struct CameraDoc {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    #[serde(flatten)]
    world_to_cam: PoseDoc,
}

#[derive(Serialize, Deserialize)]
struct SceneDoc {
    version: u32,
    classes: Vec<ClassDoc>,
    instances: Vec<InstanceDoc>,
    cameras: Vec<CameraDoc>,
}

/// Write `scene.json` plus referenced mesh PLYs under `dir`.
pub fn save_scene(scene: &Scene<f64>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    for class in &scene.classes {
        let mesh_path = dir.join(&class.mesh_path);
        if let Some(parent) = mesh_path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
        class.mesh.save_ply(&mesh_path)?;
    }
    let doc = SceneDoc {
        version: SCENE_FORMAT_VERSION,
        classes: scene
            .classes
            .iter()
            .map(|c| ClassDoc {
                id: c.id,
                mesh_path: c.mesh_path.clone(),
                symmetries: c.symmetries.transforms.iter().map(PoseDoc::from_pose).collect(),
            })
            .collect(),
        instances: scene
            .instances
            .iter()
            .map(|i| InstanceDoc {
                class_id: i.class_id,
                pose: PoseDoc::from_pose(&i.pose),
            })
            .collect(),
        cameras: scene
            .cameras
            .iter()
            .map(|c| CameraDoc {
                fx: c.fx,
                fy: c.fy,
                cx: c.cx,
                cy: c.cy,
                width: c.width,
                height: c.height,
                world_to_cam: PoseDoc::from_pose(&c.world_to_cam),
            })
            .collect(),
    };
    let path = dir.join("scene.json");
    let json = serde_json::to_string_pretty(&doc).expect("scene serialization");
    std::fs::write(&path, json).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Load a scene from a `scene.json` path; mesh paths resolve relative to
/// its directory.
pub fn load_scene(path: &Path) -> Result<Scene<f64>> {
    let p = path.display().to_string();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(&p, e))?;
    let doc: SceneDoc = serde_json::from_str(&raw).map_err(|e| Error::MalformedFile {
        path: p.clone(),
        what: e.to_string(),
    })?;
    if doc.version != SCENE_FORMAT_VERSION {
        return Err(Error::UnknownVersion {
            found: doc.version,
            supported: SCENE_FORMAT_VERSION,
        });
    }
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut classes = Vec::with_capacity(doc.classes.len());
    for c in &doc.classes {
        let mesh = Mesh::load(&dir.join(&c.mesh_path))?;
        classes.push(ObjectClass {
            id: c.id,
            mesh,
            symmetries: SymmetrySet {
                transforms: c.symmetries.iter().map(PoseDoc::to_pose).collect(),
            },
            mesh_path: c.mesh_path.clone(),
        });
    }
    let scene = Scene {
        classes,
        instances: doc
            .instances
            .iter()
            .map(|i| Instance {
                class_id: i.class_id,
                pose: i.pose.to_pose(),
            })
            .collect(),
        cameras: doc
            .cameras
            .iter()
            .map(|c| Camera {
                fx: c.fx,
                fy: c.fy,
                cx: c.cx,
                cy: c.cy,
                width: c.width,
                height: c.height,
                world_to_cam: c.world_to_cam.to_pose(),
            })
            .collect(),
    };
    for inst in &scene.instances {
        scene.class(inst.class_id)?;
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hausdorff distance between a vertex set and its transformed copy.
    fn symmetry_hausdorff(vertices: &[Vec3<f64>], sym: &Pose<f64>) -> f64 {
        let mapped: Vec<Vec3<f64>> = vertices.iter().map(|&v| sym.apply(v)).collect();
        let one_sided = |a: &[Vec3<f64>], b: &[Vec3<f64>]| {
            a.iter()
                .map(|&p| {
                    b.iter()
                        .map(|&q| p.sub(q).norm())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        one_sided(vertices, &mapped).max(one_sided(&mapped, vertices))
    }

    #[test]
    fn cube_has_24_exact_symmetries() {
        let (mesh, syms) = primitive_mesh::<f64>(&PrimitiveKind::Cube { side: 0.08 }).unwrap();
        assert_eq!(syms.transforms.len(), 24);
        for s in &syms.transforms {
            assert!(symmetry_hausdorff(&mesh.vertices, s) < 1e-12);
        }
    }

    #[test]
    fn cuboid_has_4_exact_symmetries() {
        let (mesh, syms) = primitive_mesh::<f64>(&PrimitiveKind::Cuboid {
            x: 0.01,
            y: 0.02,
            z: 0.03,
        })
        .unwrap();
        assert_eq!(syms.transforms.len(), 4);
        for s in &syms.transforms {
            assert!(symmetry_hausdorff(&mesh.vertices, s) < 1e-12);
        }
    }

    #[test]
    fn cylinder_symmetries_are_exact() {
        let (mesh, syms) = primitive_mesh::<f64>(&PrimitiveKind::Cylinder {
            radius: 0.03,
            height: 0.07,
            segments: 64,
        })
        .unwrap();
        assert_eq!(syms.transforms.len(), 128);
        for s in &syms.transforms {
            assert!(symmetry_hausdorff(&mesh.vertices, s) < 1e-12);
        }
    }

    #[test]
    fn l_bracket_is_asymmetric() {
        let (mesh, syms) = primitive_mesh::<f64>(&PrimitiveKind::LBracket {
            leg_a: 0.09,
            leg_b: 0.06,
            thickness: 0.02,
            depth: 0.03,
        })
        .unwrap();
        assert_eq!(syms.transforms.len(), 1);
        assert_eq!(mesh.triangles.len(), 20);
        // No non-identity signed axis flip maps the L onto itself.
        let flip = Pose::new(
            Mat3::from_rows([-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]),
            Vec3::zeros(),
        );
        assert!(symmetry_hausdorff(&mesh.vertices, &flip) > 1e-6);
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(matches!(
            primitive_mesh::<f64>(&PrimitiveKind::Cube { side: -1.0 }),
            Err(Error::InvalidDimensions { .. })
        ));
        assert!(matches!(
            primitive_mesh::<f64>(&PrimitiveKind::Cylinder {
                radius: 0.1,
                height: 0.1,
                segments: 2
            }),
            Err(Error::InvalidDimensions { .. })
        ));
    }

    #[test]
    fn generate_scene_deterministic_and_spaced() {
        let spec = GenSpec {
            n_objects: 5,
            min_spacing: 0.2,
            region_half_extents: [0.35, 0.35, 0.05],
            ..Default::default()
        };
        let a = generate_scene(&spec, 7).unwrap();
        let b = generate_scene(&spec, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.instances.len(), 5);
        for i in 0..5 {
            for j in (i + 1)..5 {
                let d = a.instances[i]
                    .pose
                    .translation
                    .sub(a.instances[j].pose.translation)
                    .norm();
                assert!(d >= 0.2);
            }
        }
        // Zero objects is a valid scene.
        let empty = generate_scene(
            &GenSpec {
                n_objects: 0,
                ..spec.clone()
            },
            7,
        )
        .unwrap();
        assert!(empty.instances.is_empty());
        assert_eq!(empty.cameras.len(), 6);
    }

    #[test]
    fn generate_scene_placement_failure() {
        let spec = GenSpec {
            n_objects: 10,
            min_spacing: 1.0,
            region_half_extents: [0.1, 0.1, 0.1],
            ..Default::default()
        };
        assert!(matches!(
            generate_scene(&spec, 0),
            Err(Error::PlacementFailed { .. })
        ));
    }

    #[test]
    fn scene_round_trip_is_exact() {
        let spec = GenSpec {
            n_objects: 3,
            classes: vec![
                PrimitiveKind::Cube { side: 0.06 },
                PrimitiveKind::LBracket {
                    leg_a: 0.09,
                    leg_b: 0.06,
                    thickness: 0.02,
                    depth: 0.03,
                },
            ],
            ..Default::default()
        };
        let scene = generate_scene(&spec, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_scene(&scene, dir.path()).unwrap();
        let loaded = load_scene(&dir.path().join("scene.json")).unwrap();
        assert_eq!(scene, loaded);
    }

    #[test]
    fn malformed_and_invalid_scene_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        std::fs::write(&path, "{ truncated").unwrap();
        assert!(matches!(
            load_scene(&path),
            Err(Error::MalformedFile { .. })
        ));

        // Unknown version.
        std::fs::write(
            &path,
            r#"{"version": 99, "classes": [], "instances": [], "cameras": []}"#,
        )
        .unwrap();
        assert!(matches!(
            load_scene(&path),
            Err(Error::UnknownVersion { found: 99, .. })
        ));

        // Unknown class id in instances.
        let scene = generate_scene(&GenSpec::default(), 1).unwrap();
        save_scene(&scene, dir.path()).unwrap();
        let raw = std::fs::read_to_string(&path).unwrap();
        let tampered = raw.replace("\"class_id\": 0", "\"class_id\": 42");
        std::fs::write(&path, tampered).unwrap();
        match load_scene(&path) {
            Err(Error::Validation { what }) => assert!(what.contains("42")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn look_at_projects_target_to_principal_point() {
        let cam = look_at_camera::<f64>(Vec3::new(0.8, 0.3, 0.6), Vec3::zeros(), 450.0, 320, 256);
        let pix = cam.project(Vec3::zeros()).unwrap();
        assert!((pix.x - 160.0).abs() < 1e-9);
        assert!((pix.y - 128.0).abs() < 1e-9);
        assert!(cam.world_to_cam.rotation.orthonormality_error() < 1e-12);
    }
}
