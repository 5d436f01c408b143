use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use fenopt::catalog::{enumerate_compositions, Catalog, Orientation};
use serde::Serialize;

use super::csv_bytes;
use crate::error::config;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Args)]
pub struct CatalogArgs {
    #[arg(long)]
    pub catalog: PathBuf,
    /// N, E, W, S, SE or SW; every orientation when omitted.
    #[arg(long)]
    pub orientation: Option<Orientation>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Serialize)]
struct Listing {
    orientation: String,
    code: String,
    u_g: f64,
    shgc: f64,
    vt: f64,
}

pub fn catalog(args: CatalogArgs) -> Result<()> {
    let catalog = Catalog::load(&args.catalog)
        .with_context(|| format!("catalog {}", args.catalog.display()))
        .map_err(config)?;
    let orientations = match args.orientation {
        Some(o) => vec![o],
        None => Orientation::ALL.to_vec(),
    };
    let mut listing = Vec::new();
    let mut counts = Vec::new();
    for o in orientations {
        let comps = enumerate_compositions(&catalog, o);
        counts.push((o, comps.len()));
        listing.extend(comps.into_iter().map(|c| Listing {
            orientation: o.to_string(),
            code: c.code,
            u_g: c.u_g,
            shgc: c.shgc,
            vt: c.vt,
        }));
    }
    match args.format {
        Format::Csv => {
            use std::io::Write;
            std::io::stdout().write_all(&csv_bytes(&listing)?)?;
        }
        Format::Text => {
            for l in &listing {
                println!("{:<3} {:<32} U {:.3}  SHGC {:.3}  VT {:.3}", l.orientation, l.code, l.u_g, l.shgc, l.vt);
            }
            for (o, n) in counts {
                println!("{o}: {n} compositions");
            }
        }
    }
    Ok(())
}
