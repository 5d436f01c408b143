//! Double-glazing construction rules.
//!
//! A candidate `(outer, gap, inner)` is legal for an orientation when:
//! - the outer pane is at least as thick as the inner one and at most one
//!   thickness class thicker;
//! - a solar-control pane (tsol < 0.54) may only be the outer pane;
//! - at most one pane is low-e coated, and the coating faces the cavity;
//! - north: no solar control at all, low-e on face #2 or #3;
//! - east/west: low-e on face #2 or #3;
//! - south, south-east, south-west: low-e only on face #2.

use super::{Catalog, GlazingComposition, GlassPane, Orientation, RuleFamily};

fn thickness_ok(outer: &GlassPane, inner: &GlassPane) -> bool {
    match (outer.thickness_class(), inner.thickness_class()) {
        (Some(o), Some(i)) => o >= i && o - i <= 1,
        _ => false,
    }
}

pub(crate) fn is_legal(outer: &GlassPane, inner: &GlassPane, orientation: Orientation) -> bool {
    if outer.is_double_coated() || inner.is_double_coated() {
        return false;
    }
    if outer.is_coated() && inner.is_coated() {
        return false;
    }
    if !thickness_ok(outer, inner) || inner.is_solar_control() {
        return false;
    }
    match orientation.family() {
        RuleFamily::North => !outer.is_solar_control(),
        RuleFamily::EastWest => true,
        RuleFamily::South => !inner.is_coated(),
    }
}

/// All legal compositions for one orientation, in catalog order
/// (outer glass, then gap, then inner glass).
pub fn enumerate_compositions(
    catalog: &Catalog,
    orientation: Orientation,
) -> Vec<GlazingComposition> {
    let mut out = Vec::new();
    for outer in &catalog.glasses {
        for gap in &catalog.gaps {
            for inner in &catalog.glasses {
                if !is_legal(outer, inner, orientation) {
                    continue;
                }
                // gaps in a validated catalog are never degenerate
                if let Ok(c) = GlazingComposition::assemble(catalog, outer, gap, inner) {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Union over every orientation, deduplicated by code.
pub fn enumerate_all(catalog: &Catalog) -> Vec<GlazingComposition> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for o in Orientation::ALL {
        for c in enumerate_compositions(catalog, o) {
            if seen.insert(c.code.clone()) {
                out.push(c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{GapSpec, Gas, GlassCategory};

    fn clear(id: &str, t: u32) -> GlassPane {
        GlassPane {
            id: id.into(),
            thickness_mm: t,
            tsol: 0.8,
            tvis: 0.88,
            emis_front: 0.84,
            emis_back: 0.84,
            category: GlassCategory::Clear,
        }
    }

    fn two_gaps() -> Vec<GapSpec> {
        vec![
            GapSpec { gas: Gas::Air, width_mm: 12 },
            GapSpec { gas: Gas::Argon, width_mm: 16 },
        ]
    }

    #[test]
    fn two_clear_glasses_two_gaps_north() {
        let cat = Catalog {
            glasses: vec![clear("clear4", 4), clear("clear6", 6)],
            gaps: two_gaps(),
            ..Default::default()
        };
        let comps = enumerate_compositions(&cat, Orientation::N);
        assert_eq!(comps.len(), 6);
        let mut pairs: Vec<(u32, u32)> = comps
            .iter()
            .map(|c| (c.outer.thickness_mm, c.inner.thickness_mm))
            .collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs, vec![(4, 4), (6, 4), (6, 6)]);
    }

    #[test]
    fn only_solar_control_glass_north_is_empty() {
        let mut g = clear("st6", 6);
        g.tsol = 0.30;
        g.category = GlassCategory::LowTsol;
        let cat = Catalog {
            glasses: vec![g],
            gaps: two_gaps(),
            ..Default::default()
        };
        assert!(enumerate_compositions(&cat, Orientation::N).is_empty());
        // East/west allows it on the outer pane but then the inner pane is
        // solar control too, which is never allowed.
        assert!(enumerate_compositions(&cat, Orientation::W).is_empty());
    }

    #[test]
    fn thickness_jump_of_two_classes_is_illegal() {
        assert!(!thickness_ok(&clear("a", 10), &clear("b", 6)));
        assert!(thickness_ok(&clear("a", 10), &clear("b", 8)));
        assert!(!thickness_ok(&clear("a", 6), &clear("b", 8)));
    }

    #[test]
    fn south_never_has_low_e_on_face_three() {
        let cat = Catalog::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/catalog.json"))
            .unwrap();
        for o in [Orientation::S, Orientation::SE, Orientation::SW] {
            let comps = enumerate_compositions(&cat, o);
            assert!(!comps.is_empty());
            assert!(comps.iter().all(|c| c.low_e_face() != Some(3)));
        }
        for c in enumerate_compositions(&cat, Orientation::N) {
            assert!(c.outer.tsol >= 0.54);
        }
    }
}
