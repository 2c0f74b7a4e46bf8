//! Parameter derivation and construction of the spatially coupled pooling design.

mod io;
mod params;
mod pooling;

pub use io::{CompartmentBounds, DesignFile};
pub use params::{
    c_min, derive_params, exponent_f, feasibility_report, rate_for_slack, skew_alpha,
    DerivedParams, DesignParams, FeasibilityReport, Overrides, Rate, DENSITY_EXPONENT_MARGIN,
};
pub use pooling::{build_design, item_layout, PoolingDesign};
