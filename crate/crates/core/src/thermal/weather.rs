//! Hourly typical-year weather from EPW files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const HOURS_PER_YEAR: usize = 8760;

const COL_MONTH: usize = 1;
const COL_DAY: usize = 2;
const COL_HOUR: usize = 3;
const COL_DRYBULB: usize = 6;
const COL_GHI: usize = 13;
const COL_DNI: usize = 14;
const COL_DHI: usize = 15;
const MIN_DATA_FIELDS: usize = 16;

const DAYS_IN_MONTH: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

#[derive(Debug, Error)]
pub enum WeatherError {
    #[error("failed to read weather file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("weather file has {rows} hourly records, expected {HOURS_PER_YEAR}")]
    ShortFile { rows: usize },
}

/// One non-leap year of hourly records, starting 1 January 00:00–01:00.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeatherSeries {
    pub location: String,
    pub latitude: f64,
    /// Degrees east.
    pub longitude: f64,
    /// Hours from UTC of the local standard time.
    pub utc_offset: f64,
    pub elevation_m: f64,
    /// °C.
    pub dry_bulb: Vec<f64>,
    /// W/m².
    pub direct_normal: Vec<f64>,
    pub diffuse_horizontal: Vec<f64>,
    pub global_horizontal: Vec<f64>,
}

/// Calendar of an hour index in the non-leap year.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HourStamp {
    /// 1..=12
    pub month: u32,
    /// 1..=365
    pub day_of_year: u32,
    /// 0..=23, start of the hourly interval.
    pub hour: u32,
}

pub fn hour_stamp(index: usize) -> HourStamp {
    let day0 = index / 24;
    let mut month = 0;
    let mut start = 0;
    while day0 >= start + DAYS_IN_MONTH[month] {
        start += DAYS_IN_MONTH[month];
        month += 1;
    }
    HourStamp {
        month: month as u32 + 1,
        day_of_year: day0 as u32 + 1,
        hour: (index % 24) as u32,
    }
}

impl WeatherSeries {
    pub fn len(&self) -> usize {
        self.dry_bulb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dry_bulb.is_empty()
    }

    /// Uniform weather, mostly for tests and analytic checks.
    pub fn constant(latitude: f64, dry_bulb: f64, dni: f64, dhi: f64, ghi: f64) -> Self {
        Self {
            location: "constant".into(),
            latitude,
            longitude: 0.0,
            utc_offset: 0.0,
            elevation_m: 0.0,
            dry_bulb: vec![dry_bulb; HOURS_PER_YEAR],
            direct_normal: vec![dni; HOURS_PER_YEAR],
            diffuse_horizontal: vec![dhi; HOURS_PER_YEAR],
            global_horizontal: vec![ghi; HOURS_PER_YEAR],
        }
    }

    pub fn validate(&self) -> Result<(), WeatherError> {
        let n = self.dry_bulb.len();
        if n != HOURS_PER_YEAR
            || self.direct_normal.len() != n
            || self.diffuse_horizontal.len() != n
            || self.global_horizontal.len() != n
        {
            return Err(WeatherError::ShortFile { rows: n });
        }
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(WeatherError::Parse { line: 1, reason: format!("latitude {} out of range", self.latitude) });
        }
        let irr = self.direct_normal.iter().chain(&self.diffuse_horizontal).chain(&self.global_horizontal);
        if irr.clone().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(WeatherError::Parse { line: 0, reason: "negative or non-finite irradiance".into() });
        }
        Ok(())
    }

    pub fn parse_epw(path: impl AsRef<Path>) -> Result<Self, WeatherError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| WeatherError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_epw_str(&text)
    }

    pub fn parse_epw_str(text: &str) -> Result<Self, WeatherError> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or(WeatherError::ShortFile { rows: 0 })?;
        let loc: Vec<&str> = first.split(',').map(str::trim).collect();
        if loc.first() != Some(&"LOCATION") || loc.len() < 10 {
            return Err(WeatherError::Parse { line: 1, reason: "first line must be a LOCATION header".into() });
        }
        let num = |i: usize, what: &str| -> Result<f64, WeatherError> {
            loc[i].parse::<f64>().map_err(|_| WeatherError::Parse {
                line: 1,
                reason: format!("bad {what} `{}`", loc[i]),
            })
        };
        let location = loc[1].to_string();
        let latitude = num(6, "latitude")?;
        let longitude = num(7, "longitude")?;
        let utc_offset = num(8, "time zone")?;
        let elevation_m = num(9, "elevation")?;
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(WeatherError::Parse { line: 1, reason: format!("latitude {latitude} out of range") });
        }

        let mut dry: Vec<Option<f64>> = Vec::with_capacity(HOURS_PER_YEAR);
        let mut dni = Vec::with_capacity(HOURS_PER_YEAR);
        let mut dhi = Vec::with_capacity(HOURS_PER_YEAR);
        let mut ghi = Vec::with_capacity(HOURS_PER_YEAR);
        let mut in_data = false;
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields[0].parse::<i32>().is_err() {
                if in_data {
                    return Err(WeatherError::Parse { line: line_no, reason: "header line inside data".into() });
                }
                continue;
            }
            in_data = true;
            if fields.len() < MIN_DATA_FIELDS {
                return Err(WeatherError::Parse {
                    line: line_no,
                    reason: format!("expected at least {MIN_DATA_FIELDS} fields, got {}", fields.len()),
                });
            }
            let field = |c: usize, what: &str| -> Result<f64, WeatherError> {
                fields[c].parse::<f64>().map_err(|_| WeatherError::Parse {
                    line: line_no,
                    reason: format!("bad {what} `{}`", fields[c]),
                })
            };
            let month = field(COL_MONTH, "month")?;
            let day = field(COL_DAY, "day")?;
            let hour = field(COL_HOUR, "hour")?;
            if !(1.0..=12.0).contains(&month) || !(1.0..=31.0).contains(&day) || !(1.0..=24.0).contains(&hour) {
                return Err(WeatherError::Parse { line: line_no, reason: "date/time out of range".into() });
            }
            if month == 2.0 && day == 29.0 {
                continue;
            }
            if dry.len() == HOURS_PER_YEAR {
                return Err(WeatherError::Parse {
                    line: line_no,
                    reason: format!("more than {HOURS_PER_YEAR} hourly records"),
                });
            }
            let t = field(COL_DRYBULB, "dry-bulb temperature")?;
            dry.push((t < 99.9).then_some(t));
            let irradiance = |c: usize, what: &str| -> Result<f64, WeatherError> {
                let v = field(c, what)?;
                if v >= 9999.0 {
                    Ok(0.0)
                } else if v < 0.0 {
                    Err(WeatherError::Parse { line: line_no, reason: format!("negative {what}") })
                } else {
                    Ok(v)
                }
            };
            ghi.push(irradiance(COL_GHI, "global horizontal irradiance")?);
            dni.push(irradiance(COL_DNI, "direct normal irradiance")?);
            dhi.push(irradiance(COL_DHI, "diffuse horizontal irradiance")?);
        }
        if dry.len() < HOURS_PER_YEAR {
            return Err(WeatherError::ShortFile { rows: dry.len() });
        }
        let dry_bulb = fill_gaps(&dry).ok_or(WeatherError::Parse {
            line: 0,
            reason: "no valid dry-bulb temperature in file".into(),
        })?;
        Ok(Self {
            location,
            latitude,
            longitude,
            utc_offset,
            elevation_m,
            dry_bulb,
            direct_normal: dni,
            diffuse_horizontal: dhi,
            global_horizontal: ghi,
        })
    }

    /// Writes a minimal EPW: the eight standard header lines and one row
    /// per hour, with fields this crate does not model set to EPW
    /// missing-value codes.
    pub fn to_epw_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "LOCATION,{},-,ESP,synthetic,000000,{:.2},{:.2},{:.1},{:.1}",
            self.location, self.latitude, self.longitude, self.utc_offset, self.elevation_m
        );
        s.push_str("DESIGN CONDITIONS,0\n");
        s.push_str("TYPICAL/EXTREME PERIODS,0\n");
        s.push_str("GROUND TEMPERATURES,0\n");
        s.push_str("HOLIDAYS/DAYLIGHT SAVINGS,No,0,0,0\n");
        s.push_str("COMMENTS 1,synthetic typical year\n");
        s.push_str("COMMENTS 2,\n");
        s.push_str("DATA PERIODS,1,1,Data,Sunday, 1/ 1,12/31\n");
        for i in 0..self.len() {
            let st = hour_stamp(i);
            let day_in_month = {
                let mut d = st.day_of_year as usize;
                for m in 0..(st.month as usize - 1) {
                    d -= DAYS_IN_MONTH[m];
                }
                d
            };
            let _ = writeln!(
                s,
                "2005,{},{},{},60,?9?9?9?9E0?9?9?9?9?9?9?9?9?9?9?9?9?9?9?9*9*9?9?9?9,{:.1},99.9,999,999999,9999,9999,9999,{:.0},{:.0},{:.0},999999,999999,999999,9999,999,999,99,99,9999,99999,9,999999999,999,0.999,999,99,999,999,99",
                st.month,
                day_in_month,
                st.hour + 1,
                self.dry_bulb[i],
                self.global_horizontal[i],
                self.direct_normal[i],
                self.diffuse_horizontal[i],
            );
        }
        s
    }

    pub fn write_epw(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_epw_string())
    }
}

/// Linear interpolation over missing values; ends take the nearest valid value.
fn fill_gaps(values: &[Option<f64>]) -> Option<Vec<f64>> {
    let known: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (i, x)))
        .collect();
    if known.is_empty() {
        return None;
    }
    let mut out = Vec::with_capacity(values.len());
    let mut k = 0;
    for i in 0..values.len() {
        while k + 1 < known.len() && known[k + 1].0 <= i {
            k += 1;
        }
        let (i0, v0) = known[k];
        let v = if i <= i0 {
            v0
        } else if k + 1 < known.len() {
            let (i1, v1) = known[k + 1];
            v0 + (v1 - v0) * (i - i0) as f64 / (i1 - i0) as f64
        } else {
            v0
        };
        out.push(v);
    }
    Some(out)
}
