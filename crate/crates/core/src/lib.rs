//! Accessibility-driven land-use allocation and floor-area-ratio assignment.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! 1. [`netgraph`] builds the street-segment dual graph and computes
//!    radius-bounded Choice and Integration under metric or angular cost.
//! 2. [`blockmap`] transfers segment scores to block polygons and normalizes
//!    them per tier into an [`blockmap::AccessibilityTensor`].
//! 3. [`basins`] groups blocks into per-tier service basins.
//! 4. [`allocator`] places land uses tier by tier with priority queues and
//!    minimum-parcel guards.
//! 5. [`intensity`] fits the accessibility-weighted FAR line and derives heights.
//!
//! [`policy`] samples planning policies, evaluates them through
//! [`pipeline`], and screens the results (Pareto front, knee, rank
//! correlations, sensitivity groups). [`io`] holds GeoJSON/CSV/config
//! persistence and [`synth`] builds orthogonal grid fixtures.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocator;
pub mod basins;
pub mod blockmap;
pub mod error;
pub mod intensity;
pub mod io;
pub mod landuse;
pub mod netgraph;
pub mod norm;
pub mod pipeline;
pub mod policy;
pub mod synth;
pub mod tier;

pub use error::{Error, Result};
pub use landuse::LandUse;
pub use tier::Tier;

pub(crate) mod par {
    //! Thin shim so the crate builds with or without rayon.

    #[cfg(feature = "parallel")]
    pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }

    #[cfg(not(feature = "parallel"))]
    pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        F: Fn(&T) -> R,
    {
        items.iter().map(f).collect()
    }
}
