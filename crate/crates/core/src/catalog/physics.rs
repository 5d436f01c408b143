//! Centre-of-glass and whole-window thermal/optical properties.
//!
//! The cavity is treated as conduction plus linearised long-wave radiation
//! (Nusselt = 1); convection onset in wide gaps is ignored.

use serde::{Deserialize, Serialize};

use super::{CatalogError, FrameSpec, GapSpec, GlassPane, GlazingComposition, PanePosition};

/// External surface resistance, m²K/W.
pub const R_SE: f64 = 0.04;
/// Internal surface resistance, m²K/W.
pub const R_SI: f64 = 0.13;
pub const GLASS_CONDUCTIVITY: f64 = 1.0;
pub const MEAN_GAP_TEMPERATURE_K: f64 = 283.0;
pub const STEFAN_BOLTZMANN: f64 = 5.67e-8;
/// Frame face width on every side of the window.
pub const FRAME_WIDTH_M: f64 = 0.07;

/// U-value of a double glazing from raw layer data (lengths in metres).
pub fn glazing_u(
    outer_thickness_m: f64,
    eps_outer: f64,
    inner_thickness_m: f64,
    eps_inner: f64,
    gas_conductivity: f64,
    gap_m: f64,
) -> Result<f64, CatalogError> {
    if gap_m <= 0.0 {
        return Err(CatalogError::DegenerateGap);
    }
    let h_gas = gas_conductivity / gap_m;
    let h_rad = 4.0 * STEFAN_BOLTZMANN * MEAN_GAP_TEMPERATURE_K.powi(3)
        / (1.0 / eps_outer + 1.0 / eps_inner - 1.0);
    let r_gap = 1.0 / (h_gas + h_rad);
    let r_total = R_SE
        + outer_thickness_m / GLASS_CONDUCTIVITY
        + r_gap
        + inner_thickness_m / GLASS_CONDUCTIVITY
        + R_SI;
    Ok(1.0 / r_total)
}

pub fn center_of_glass_u(
    outer: &GlassPane,
    gap: &GapSpec,
    inner: &GlassPane,
) -> Result<f64, CatalogError> {
    glazing_u(
        outer.thickness_mm as f64 / 1000.0,
        outer.cavity_emissivity(PanePosition::Outer),
        inner.thickness_mm as f64 / 1000.0,
        inner.cavity_emissivity(PanePosition::Inner),
        gap.conductivity(),
        gap.width_mm as f64 / 1000.0,
    )
}

fn two_pane_transmission(t1: f64, t2: f64) -> f64 {
    let r1 = 0.08 + 0.2 * (1.0 - t1);
    let r2 = 0.08 + 0.2 * (1.0 - t2);
    (t1 * t2 / (1.0 - r1 * r2)).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Estimated (SHGC, VT) of a pane pair from normal-incidence transmittances.
pub fn composition_optics(outer: &GlassPane, inner: &GlassPane) -> (f64, f64) {
    (
        two_pane_transmission(outer.tsol, inner.tsol),
        two_pane_transmission(outer.tvis, inner.tvis),
    )
}

/// Area-weighted window U with no glass/frame thermal bridge.
pub fn window_u_value(u_g: f64, a_g: f64, u_f: f64, a_f: f64) -> f64 {
    (u_g * a_g + u_f * a_f) / (a_g + a_f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowAssembly {
    pub glazing: GlazingComposition,
    pub frame: FrameSpec,
    pub width_m: f64,
    pub height_m: f64,
    pub a_g: f64,
    pub a_f: f64,
    pub psi_gf: f64,
    pub u_w: f64,
}

impl WindowAssembly {
    pub fn new(
        glazing: GlazingComposition,
        frame: FrameSpec,
        width_m: f64,
        height_m: f64,
    ) -> Result<Self, CatalogError> {
        let a_g = (width_m - 2.0 * frame.width_m) * (height_m - 2.0 * frame.width_m);
        if !(a_g > 0.0) || width_m <= 2.0 * frame.width_m {
            return Err(CatalogError::Geometry(format!(
                "{width_m} x {height_m} m leaves no glazed area inside a {} m frame",
                frame.width_m
            )));
        }
        let a_f = width_m * height_m - a_g;
        let u_w = window_u_value(glazing.u_g, a_g, frame.u_value, a_f);
        Ok(Self {
            glazing,
            frame,
            width_m,
            height_m,
            a_g,
            a_f,
            psi_gf: 0.0,
            u_w,
        })
    }

    pub fn area(&self) -> f64 {
        self.a_g + self.a_f
    }
}

/// Recomputes U_w of an assembly from its parts.
pub fn window_u(assembly: &WindowAssembly) -> Result<f64, CatalogError> {
    if !(assembly.a_g > 0.0) {
        return Err(CatalogError::Geometry("glazed area must be positive".into()));
    }
    let perimeter = 2.0 * (assembly.width_m + assembly.height_m - 4.0 * assembly.frame.width_m);
    Ok((assembly.glazing.u_g * assembly.a_g
        + assembly.frame.u_value * assembly.a_f
        + perimeter * assembly.psi_gf)
        / (assembly.a_g + assembly.a_f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{FrameMaterial, Gas, GlassCategory};
    use proptest::prelude::*;

    fn pane(t: u32, ef: f64, eb: f64) -> GlassPane {
        GlassPane {
            id: "p".into(),
            thickness_mm: t,
            tsol: 0.8,
            tvis: 0.88,
            emis_front: ef,
            emis_back: eb,
            category: GlassCategory::Clear,
        }
    }

    fn frame(u: f64) -> FrameSpec {
        FrameSpec {
            id: "f".into(),
            material: FrameMaterial::WoodAlum,
            u_value: u,
            width_m: FRAME_WIDTH_M,
        }
    }

    fn glazing(u_g: f64) -> GlazingComposition {
        GlazingComposition {
            outer: pane(4, 0.84, 0.84),
            gap: GapSpec { gas: Gas::Argon, width_mm: 16 },
            inner: pane(4, 0.84, 0.84),
            u_g,
            shgc: 0.6,
            vt: 0.7,
            code: "x".into(),
        }
    }

    // Hand evaluation of the resistance network:
    // h_r = 4·5.67e-8·283³/(1/0.89 + 1/0.05 − 1) = 0.25545, h_g = 0.017/0.016
    // R = 0.04 + 0.004 + 1/(1.0625 + 0.25545) + 0.004 + 0.13 = 0.93675
    #[test]
    fn low_e_argon_unit() {
        let outer = pane(4, 0.89, 0.89);
        let inner = pane(4, 0.05, 0.84);
        let gap = GapSpec { gas: Gas::Argon, width_mm: 16 };
        let u = center_of_glass_u(&outer, &gap, &inner).unwrap();
        assert!((u - 1.068).abs() < 0.01, "{u}");
        assert!((u - 1.0675).abs() < 5e-4, "{u}");
    }

    // h_r = 5.1405/(2/0.84 − 1) = 3.7224, h_g = 0.025/0.012 = 2.0833
    // R = 0.04 + 0.008 + 0.17224 + 0.13 = 0.35024
    #[test]
    fn clear_air_unit() {
        let p = pane(4, 0.84, 0.84);
        let gap = GapSpec { gas: Gas::Air, width_mm: 12 };
        let u = center_of_glass_u(&p, &gap, &p).unwrap();
        assert!((u - 2.854).abs() < 0.01, "{u}");
    }

    #[test]
    fn zero_gap_is_degenerate() {
        let p = pane(4, 0.84, 0.84);
        let gap = GapSpec { gas: Gas::Air, width_mm: 0 };
        assert!(matches!(
            center_of_glass_u(&p, &gap, &p),
            Err(CatalogError::DegenerateGap)
        ));
    }

    #[test]
    fn u_grows_as_gap_shrinks() {
        let mut last = 0.0;
        for mm in (1..=20).rev() {
            let u = glazing_u(0.004, 0.84, 0.004, 0.84, 0.025, mm as f64 / 1000.0).unwrap();
            assert!(u > last);
            last = u;
        }
    }

    #[test]
    fn optics_clamps_and_hand_values() {
        let mut a = pane(4, 0.84, 0.84);
        let mut b = a.clone();
        a.tsol = 1.0;
        b.tsol = 1.0;
        assert_eq!(composition_optics(&a, &b).0, 1.0);
        a.tsol = 0.62;
        b.tsol = 0.82;
        // 0.5084 / (1 − 0.156·0.116)
        let (shgc, _) = composition_optics(&a, &b);
        assert!((shgc - 0.5177).abs() < 0.001, "{shgc}");
    }

    #[test]
    fn equal_u_gives_same_window_u() {
        let w = WindowAssembly::new(glazing(1.8), frame(1.8), 1.2, 1.3).unwrap();
        assert!((w.u_w - 1.8).abs() < 1e-12);
    }

    #[test]
    fn small_window_hand_arithmetic() {
        let w = WindowAssembly::new(glazing(1.07), frame(1.19), 0.6, 1.0).unwrap();
        assert!((w.a_g - 0.3956).abs() < 1e-9);
        assert!((w.a_f - 0.2044).abs() < 1e-9);
        assert!((w.u_w - 1.111).abs() < 0.005, "{}", w.u_w);
        assert!((window_u(&w).unwrap() - w.u_w).abs() < 1e-12);
    }

    #[test]
    fn frame_swallowing_the_window_is_a_geometry_error() {
        assert!(matches!(
            WindowAssembly::new(glazing(1.0), frame(1.0), 0.14, 1.0),
            Err(CatalogError::Geometry(_))
        ));
    }

    proptest! {
        #[test]
        fn window_u_is_convex_combination(
            u_g in 0.5f64..3.5, u_f in 0.5f64..5.0,
            w in 0.6f64..4.0, h in 1.0f64..3.0,
        ) {
            let a = WindowAssembly::new(glazing(u_g), frame(u_f), w, h).unwrap();
            prop_assert!(a.u_w >= u_g.min(u_f) - 1e-12);
            prop_assert!(a.u_w <= u_g.max(u_f) + 1e-12);
            prop_assert!((a.a_g + a.a_f - w * h).abs() < 1e-12);
        }

        #[test]
        fn lower_cavity_emissivity_lowers_u(e1 in 0.03f64..0.9, e2 in 0.03f64..0.9, k in 0.1f64..0.99) {
            let base = glazing_u(0.006, e1, 0.006, e2, 0.017, 0.012).unwrap();
            let a = glazing_u(0.006, e1 * k, 0.006, e2, 0.017, 0.012).unwrap();
            let b = glazing_u(0.006, e1, 0.006, e2 * k, 0.017, 0.012).unwrap();
            prop_assert!(a < base);
            prop_assert!(b < base);
        }
    }
}
