//! Model planes `M_κ` for κ ∈ {−1, 0, 1}.

pub mod hyperbolic;
pub mod spherical;
pub mod triangle;

pub use hyperbolic::{h_angle, h_distance, h_geodesic_point, HIsometry, HPoint};
pub use spherical::{s_angle, s_distance, s_geodesic_point, s_oriented_angle, SPoint};
pub use triangle::{
    comparison_angle, embed_comparison_triangle, triangle_angles, Kappa, TriangleAngles, TriangleShape,
};
