//! Multi-view 6D object pose estimation from center and curvature heatmaps.
//!
//! The pipeline has three stages: per-view heatmaps (synthesized here by an
//! oracle from ground truth, standing in for a learned predictor), 3D object
//! centers by triangulating heatmap peaks across views, and 6D poses by
//! render-and-compare optimization of a distance-transform edge cost.
//!
//! All numerics are generic over [`scalar::Real`] (`f32` or `f64`); the
//! crate root exports `f64` aliases for the common case.

pub mod centers;
pub mod costfn;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod heatmaps;
pub mod imgio;
pub mod mesh;
pub mod metrics;
pub mod optimizer;
pub mod pipeline;
pub mod renderer;
pub mod scalar;
pub mod scene;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete `f64` aliases for the generic core types.
pub type Vec2 = geometry::Vec2<f64>;
pub type Vec3 = geometry::Vec3<f64>;
pub type Mat3 = geometry::Mat3<f64>;
pub type Pose = geometry::Pose<f64>;
pub type Camera = geometry::Camera<f64>;
pub type Ray = geometry::Ray<f64>;
pub type Mesh = mesh::Mesh<f64>;
pub type Grid = grid::Grid<f64>;
pub type Heatmap = heatmaps::Heatmap<f64>;
pub type HeatmapConfig = heatmaps::HeatmapConfig<f64>;
pub type Peak = heatmaps::Peak<f64>;
pub type Center3D = centers::Center3D<f64>;
pub type TriangulationConfig = centers::TriangulationConfig<f64>;
pub type DistanceMap = costfn::DistanceMap<f64>;
pub type CostConfig = costfn::CostConfig<f64>;
pub type OptimizerConfig = optimizer::OptimizerConfig<f64>;
pub type SceneEstimate = optimizer::SceneEstimate<f64>;
pub type EstimatedObject = optimizer::EstimatedObject<f64>;
pub type SymmetrySet = metrics::SymmetrySet<f64>;
pub type PoseError = metrics::PoseError<f64>;
pub type Scene = scene::Scene<f64>;
