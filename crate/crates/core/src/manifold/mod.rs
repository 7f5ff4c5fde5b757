//! Statistical manifolds and their Fisher-Rao geometry.

pub mod christoffel;
pub mod density;
pub mod domain;
pub mod metric;
pub mod model;

pub use christoffel::{
    check_reparam_covariance, christoffel, christoffel_numeric, Christoffel, CoordinateMap, Diffeomorphism,
};
pub use density::{metric_numeric, Axis, DensityFamily, QuadratureSpec, SampleMap};
pub use domain::{DomainBox, ParamPoint, BOUNDARY_GUARD};
pub use metric::{fisher_density, pullback, MetricTensor};
pub use model::{metric_analytic, metric_of_density, Factor, Flow, MetricRule, StatisticalModel, VolumeFactorization};
