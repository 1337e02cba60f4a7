//! Fixtures shared by the benchmarks.

use nevlab_core::funcrep::GalleryParams;
use nevlab_core::{gallery, HoloMap, TargetGeometry};

/// A gallery map with default parameters.
pub fn map(name: &str) -> (HoloMap, TargetGeometry) {
    gallery(name, &GalleryParams::default()).expect("gallery entry exists")
}

/// A gallery map with one parameter set.
pub fn map_with(name: &str, key: &str, value: &str) -> (HoloMap, TargetGeometry) {
    gallery(name, &GalleryParams::default().with(key, value)).expect("gallery entry exists")
}
