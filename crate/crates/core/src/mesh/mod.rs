mod analysis;
mod delaunay;
mod energy;
mod init;
mod remesh;
mod solver;
mod sparse;
mod surface;

pub use analysis::{
    cap_mesh, cap_vertex_error, curvature_spread, estimate_lambda, mean_curvature_field, measure_contact_angle,
    sheet_asymmetry, sphere_cap_mesh, ContactAngleStats,
};
pub use delaunay::triangulate;
pub use energy::{
    area_and_gradient, column_volume_and_gradient, enclosed_volume, triangle_area_grad, triangle_column_grad,
    wedge_volume,
};
pub use init::{init_mesh, plateau_domain};
pub use remesh::remesh;
pub use solver::{add_bump, minimize, minimize_two_sheets, Preconditioner, SolveParams, SolveReport};
pub use surface::{triangle_quality, ProjectedLocator, TriSurface};
