//! Composition codes: `<glass1>,<Gas>_<mm>,<glass2>`, with the low-e side of
//! a coated pane marked `#1` (side facing out) or `#2` (side facing in),
//! e.g. `clear10,Argon_16,e8_0.05#1_tsol62tvis89`.

use std::fmt;

use super::{Catalog, CatalogError, GapSpec, Gas, GlassPane, PanePosition};

/// Token for a pane at a given position. The side marker goes in front of
/// a `_tsol` suffix when the id has one, otherwise at the end.
pub fn pane_token(pane: &GlassPane, position: PanePosition) -> String {
    if !pane.is_coated() {
        return pane.id.clone();
    }
    // coatings always face the cavity
    let side = match position {
        PanePosition::Outer => "#2",
        PanePosition::Inner => "#1",
    };
    match pane.id.find("_tsol") {
        Some(at) => format!("{}{}{}", &pane.id[..at], side, &pane.id[at..]),
        None => format!("{}{}", pane.id, side),
    }
}

fn strip_marker(token: &str) -> (String, Option<u8>) {
    match token.find('#') {
        Some(at) => {
            let side = token[at + 1..].chars().next().and_then(|c| c.to_digit(10));
            let mut id = token[..at].to_string();
            id.push_str(&token[(at + 2).min(token.len())..]);
            (id, side.map(|d| d as u8))
        }
        None => (token.to_string(), None),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionCode {
    pub outer: String,
    pub gap: String,
    pub inner: String,
}

impl CompositionCode {
    pub fn new(outer: &GlassPane, gap: &GapSpec, inner: &GlassPane) -> Self {
        Self {
            outer: pane_token(outer, PanePosition::Outer),
            gap: gap.id(),
            inner: pane_token(inner, PanePosition::Inner),
        }
    }
}

impl fmt::Display for CompositionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.outer, self.gap, self.inner)
    }
}

/// Resolves a composition code back to catalog entries.
pub fn parse_code<'a>(
    code: &str,
    catalog: &'a Catalog,
) -> Result<(&'a GlassPane, &'a GapSpec, &'a GlassPane), CatalogError> {
    let err = |reason: &str| CatalogError::Code {
        code: code.to_string(),
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = code.split(',').collect();
    let [outer, gap, inner] = parts.as_slice() else {
        return Err(err("expected three comma-separated fields"));
    };
    let (gas, width) = gap.split_once('_').ok_or_else(|| err("gap must be <Gas>_<mm>"))?;
    let gas = match gas {
        "Air" => Gas::Air,
        "Argon" => Gas::Argon,
        _ => return Err(err("unknown gas")),
    };
    let width: u32 = width.parse().map_err(|_| err("bad gap width"))?;
    let gap = catalog
        .gap(gas, width)
        .ok_or_else(|| err("gap not in catalog"))?;

    let resolve = |token: &str, position: PanePosition| {
        let (id, side) = strip_marker(token);
        let pane = catalog.glass(&id).ok_or_else(|| err("unknown glass id"))?;
        let expected = match (pane.is_coated(), position) {
            (false, _) => None,
            (true, PanePosition::Outer) => Some(2),
            (true, PanePosition::Inner) => Some(1),
        };
        if side != expected {
            return Err(err("low-e side marker does not match pane position"));
        }
        Ok(pane)
    };
    let outer = resolve(outer, PanePosition::Outer)?;
    let inner = resolve(inner, PanePosition::Inner)?;
    Ok((outer, gap, inner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{enumerate_all, Catalog};

    fn bundled() -> Catalog {
        Catalog::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/catalog.json")).unwrap()
    }

    #[test]
    fn published_codes_are_reproduced() {
        let c = bundled();
        for code in [
            "clear10,Argon_16,e8_0.05#1_tsol62tvis89",
            "sc10_tsol25tvis63,Argon_10,e8_0.05#1_tsol62tvis89",
            "e6_0.16#2_tsol71tvis88,Argon_12,clear6",
        ] {
            let (o, g, i) = parse_code(code, &c).unwrap();
            assert_eq!(CompositionCode::new(o, g, i).to_string(), code);
        }
    }

    #[test]
    fn every_legal_code_round_trips() {
        let c = bundled();
        for comp in enumerate_all(&c) {
            let (o, g, i) = parse_code(&comp.code, &c).unwrap();
            assert_eq!(o, &comp.outer);
            assert_eq!(g, &comp.gap);
            assert_eq!(i, &comp.inner);
        }
    }

    #[test]
    fn wrong_side_marker_is_rejected() {
        let c = bundled();
        assert!(parse_code("clear10,Argon_16,e8_0.05#2_tsol62tvis89", &c).is_err());
        assert!(parse_code("clear10,Argon_16,e8_0.05_tsol62tvis89", &c).is_err());
        assert!(parse_code("clear10,Krypton_16,clear8", &c).is_err());
    }
}
