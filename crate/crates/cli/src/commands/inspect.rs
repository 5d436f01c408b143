use std::fmt::Write;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use fenopt::analysis::SolutionRow;

use crate::error::config;
use crate::output::RunReport;

/// Reads a solution file: a bare solution row or a run record carrying one.
pub fn load_solution(path: &Path) -> Result<SolutionRow> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if let Ok(row) = serde_json::from_str::<SolutionRow>(&text) {
        return Ok(row);
    }
    match serde_json::from_str::<RunReport>(&text) {
        Ok(RunReport { best_design: Some(row), .. }) => Ok(row),
        Ok(_) => Err(anyhow!("{} holds no solution", path.display())),
        Err(e) => Err(anyhow!("{} is not a solution file: {e}", path.display())),
    }
}

pub fn report(row: &SolutionRow) -> String {
    let s = &row.summary;
    let d = &row.design;
    let mut out = String::new();
    let _ = writeln!(out, "Solution {} ({}), fitness {:.4}", s.label, s.design_id, s.fitness);
    let building = [
        ("ED_Heating", format!("{:.2} kWh/m²·year", s.edh)),
        ("ED_Cooling", format!("{:.2} kWh/m²·year", s.edc)),
        ("ED_Heating+Cooling", format!("{:.2} kWh/m²·year", s.ed_total)),
        ("NCT", format!("{:.0} h", s.nct)),
        ("WWR", format!("{:.2} %", s.wwr_pct)),
        ("K", format!("{:.3} W/m²K", s.k)),
        ("Q_sol,Jul", format!("{:.2} kWh/m²", s.q_sol_jul)),
        ("Reflectance", format!("{:.2}", d.reflectance)),
    ];
    for (name, value) in building {
        let _ = writeln!(out, "  {name:<20} {value}");
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "  {:<10} {:<6} {:>6} {:>7} {:>8}  {:<40} {:>14}  {:<28} {}",
        "Window", "Facade", "Width", "Height", "Area", "Glazing Composition", "Window U-value", "Frame Material", "Shading Control"
    );
    for w in &d.windows {
        let f = &d.facades[w.facade];
        let _ = writeln!(
            out,
            "  {:<10} {:<6} {:>6.2} {:>7.2} {:>8.3}  {:<40} {:>14.3}  {:<28} SC{}",
            w.slot_id,
            f.name,
            w.size.width_m(),
            w.size.height_m(),
            w.size.area_m2(),
            f.glazing.code,
            w.assembly.u_w,
            format!("{} ({:?})", d.frame.id, d.frame.material),
            f.control
        );
    }
    out
}

pub fn inspect(path: &Path) -> Result<()> {
    let row = load_solution(path).map_err(config)?;
    print!("{}", report(&row));
    Ok(())
}
