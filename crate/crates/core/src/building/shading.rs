//! Overhangs and side fins attached to the window frame.
//!
//! Left and right are as seen from outside, facing the façade. Overhang
//! extensions run sideways past the frame; the fin extension runs upwards
//! past the top of the frame. There are no bottom elements.

use serde::{Deserialize, Serialize};

use super::{dm, truncate_dm};
use crate::catalog::Orientation;

pub const MIN_DEPTH_M: f64 = 0.2;
pub const MAX_DEPTH_M: f64 = 1.5;
pub const MAX_EXTENSION_M: f64 = 0.3;
/// Extension left at a corner where an overhang and a fin would overlap.
pub const CLIPPED_EXTENSION_M: f64 = 0.07;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShadingGeometry {
    pub overhang_depth_m: f64,
    pub overhang_ext_left_m: f64,
    pub overhang_ext_right_m: f64,
    pub fin_left_depth_m: f64,
    pub fin_right_depth_m: f64,
    pub fin_ext_top_m: f64,
}

impl ShadingGeometry {
    pub fn has_overhang(&self) -> bool {
        self.overhang_depth_m > 0.0
    }

    pub fn has_fins(&self) -> bool {
        self.fin_left_depth_m > 0.0 || self.fin_right_depth_m > 0.0
    }

    pub fn is_empty(&self) -> bool {
        !self.has_overhang() && !self.has_fins()
    }

    /// Surface of the devices built around one `width × height` window.
    pub fn area_m2(&self, width_m: f64, height_m: f64) -> f64 {
        let overhang =
            self.overhang_depth_m * (width_m + self.overhang_ext_left_m + self.overhang_ext_right_m);
        let fins = (self.fin_left_depth_m + self.fin_right_depth_m) * (height_m + self.fin_ext_top_m);
        overhang + fins
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.overhang_depth_m,
            self.overhang_ext_left_m,
            self.overhang_ext_right_m,
            self.fin_left_depth_m,
            self.fin_right_depth_m,
            self.fin_ext_top_m,
        ]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            overhang_depth_m: v[0],
            overhang_ext_left_m: v[1],
            overhang_ext_right_m: v[2],
            fin_left_depth_m: v[3],
            fin_right_depth_m: v[4],
            fin_ext_top_m: v[5],
        }
    }

    /// True when every value is a legal canonical value.
    pub fn is_canonical(&self) -> bool {
        let on_grid = |x: f64| {
            (x * 10.0 - (x * 10.0).round()).abs() < 1e-9 || (x - CLIPPED_EXTENSION_M).abs() < 1e-12
        };
        let depth_ok = |d: f64| d == 0.0 || (MIN_DEPTH_M - 1e-12..=MAX_DEPTH_M + 1e-12).contains(&d);
        let ext_ok = |e: f64| (0.0..=MAX_EXTENSION_M + 1e-12).contains(&e);
        let a = self.as_array();
        a.iter().all(|&x| on_grid(x))
            && depth_ok(self.overhang_depth_m)
            && depth_ok(self.fin_left_depth_m)
            && depth_ok(self.fin_right_depth_m)
            && ext_ok(self.overhang_ext_left_m)
            && ext_ok(self.overhang_ext_right_m)
            && ext_ok(self.fin_ext_top_m)
            && (self.has_overhang() || (self.overhang_ext_left_m == 0.0 && self.overhang_ext_right_m == 0.0))
            && (self.has_fins() || self.fin_ext_top_m == 0.0)
    }
}

fn snap_depth(x: f64) -> f64 {
    let d = truncate_dm(x).clamp(0, dm(MAX_DEPTH_M));
    if d < dm(MIN_DEPTH_M) {
        0.0
    } else {
        d as f64 / 10.0
    }
}

fn snap_extension(x: f64) -> f64 {
    truncate_dm(x).clamp(0, dm(MAX_EXTENSION_M)) as f64 / 10.0
}

/// Canonical form of raw shading values for a façade.
///
/// Values are truncated to the 0.1 m grid and clamped; depths under 0.20 m
/// mean the element is not built and its extensions vanish; east façades
/// carry no devices; where an overhang extension meets a fin extension at a
/// top corner both are clipped to 0.07 m.
pub fn validate_shading(geom: &ShadingGeometry, orientation: Orientation) -> ShadingGeometry {
    if orientation == Orientation::E {
        return ShadingGeometry::default();
    }
    let finite = |x: f64| if x.is_finite() { x } else { 0.0 };
    let mut g = ShadingGeometry {
        overhang_depth_m: snap_depth(finite(geom.overhang_depth_m)),
        overhang_ext_left_m: snap_extension(finite(geom.overhang_ext_left_m)),
        overhang_ext_right_m: snap_extension(finite(geom.overhang_ext_right_m)),
        fin_left_depth_m: snap_depth(finite(geom.fin_left_depth_m)),
        fin_right_depth_m: snap_depth(finite(geom.fin_right_depth_m)),
        fin_ext_top_m: snap_extension(finite(geom.fin_ext_top_m)),
    };
    if !g.has_overhang() {
        g.overhang_ext_left_m = 0.0;
        g.overhang_ext_right_m = 0.0;
    }
    if !g.has_fins() {
        g.fin_ext_top_m = 0.0;
    }
    if g.fin_ext_top_m > 0.0 {
        let left = g.fin_left_depth_m > 0.0 && g.overhang_ext_left_m > 0.0;
        let right = g.fin_right_depth_m > 0.0 && g.overhang_ext_right_m > 0.0;
        if left {
            g.overhang_ext_left_m = CLIPPED_EXTENSION_M;
        }
        if right {
            g.overhang_ext_right_m = CLIPPED_EXTENSION_M;
        }
        if left || right {
            g.fin_ext_top_m = CLIPPED_EXTENSION_M;
        }
    }
    g
}
