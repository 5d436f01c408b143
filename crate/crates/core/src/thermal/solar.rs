//! Sun position, irradiance on vertical façades and shadows cast by
//! overhangs and fins.

use crate::building::ShadingGeometry;

/// Share of global horizontal irradiance reflected by the ground.
pub const GROUND_ALBEDO: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SunPosition {
    pub altitude_deg: f64,
    /// 0 = north, clockwise.
    pub azimuth_deg: f64,
}

impl SunPosition {
    pub fn is_up(&self) -> bool {
        self.altitude_deg > 0.0
    }
}

pub fn declination_deg(day_of_year: u32) -> f64 {
    23.45 * (360.0 * (284.0 + day_of_year as f64) / 365.0).to_radians().sin()
}

/// Equation of time in minutes.
pub fn equation_of_time_min(day_of_year: u32) -> f64 {
    let b = (360.0 * (day_of_year as f64 - 81.0) / 364.0).to_radians();
    9.87 * (2.0 * b).sin() - 7.53 * b.cos() - 1.5 * b.sin()
}

/// Apparent solar time in hours for a local standard clock time.
pub fn solar_hour(day_of_year: u32, clock_hour: f64, longitude_deg: f64, utc_offset_h: f64) -> f64 {
    let minutes = 4.0 * (longitude_deg - 15.0 * utc_offset_h) + equation_of_time_min(day_of_year);
    clock_hour + minutes / 60.0
}

pub fn solar_position(latitude_deg: f64, day_of_year: u32, solar_hour: f64) -> SunPosition {
    let phi = latitude_deg.to_radians();
    let delta = declination_deg(day_of_year).to_radians();
    let h = (15.0 * (solar_hour - 12.0)).to_radians();
    let sin_alt = (phi.sin() * delta.sin() + phi.cos() * delta.cos() * h.cos()).clamp(-1.0, 1.0);
    let alt = sin_alt.asin();
    let denom = alt.cos() * phi.cos();
    let azimuth = if denom.abs() < 1e-12 {
        180.0
    } else {
        let cos_az = ((delta.sin() - sin_alt * phi.sin()) / denom).clamp(-1.0, 1.0);
        let az = cos_az.acos().to_degrees();
        if h.sin() > 0.0 {
            360.0 - az
        } else {
            az
        }
    };
    SunPosition { altitude_deg: alt.to_degrees(), azimuth_deg: azimuth }
}

/// Sun azimuth relative to the façade normal, in (−180, 180].
/// Positive when the sun is clockwise from the normal.
pub fn relative_azimuth_deg(sun_azimuth_deg: f64, facade_azimuth_deg: f64) -> f64 {
    let mut g = (sun_azimuth_deg - facade_azimuth_deg) % 360.0;
    if g <= -180.0 {
        g += 360.0;
    } else if g > 180.0 {
        g -= 360.0;
    }
    g
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Incident {
    /// Beam component, W/m².
    pub direct: f64,
    /// Sky plus ground-reflected diffuse, W/m².
    pub diffuse: f64,
}

impl Incident {
    pub fn total(&self) -> f64 {
        self.direct + self.diffuse
    }
}

/// Irradiance on a vertical surface: beam by incidence cosine, isotropic
/// sky diffuse with view factor 1/2, ground reflection with view factor 1/2.
pub fn incident_irradiance(
    sun: SunPosition,
    facade_azimuth_deg: f64,
    dni: f64,
    dhi: f64,
    ghi: f64,
) -> Incident {
    let direct = if sun.is_up() {
        let cos_theta = sun.altitude_deg.to_radians().cos()
            * relative_azimuth_deg(sun.azimuth_deg, facade_azimuth_deg).to_radians().cos();
        dni * cos_theta.max(0.0)
    } else {
        0.0
    };
    Incident { direct, diffuse: dhi / 2.0 + GROUND_ALBEDO * ghi / 2.0 }
}

type Pt = (f64, f64);

const POLY_CAP: usize = 24;

/// Convex polygon on the stack. Clipping an n-gon by an m-gon yields at
/// most n + m vertices; the deepest chain here is 4 + 4 + 8 + 8.
#[derive(Clone, Copy)]
struct Poly {
    pts: [Pt; POLY_CAP],
    len: usize,
}

impl Poly {
    const EMPTY: Self = Self { pts: [(0.0, 0.0); POLY_CAP], len: 0 };

    fn from_slice(pts: &[Pt]) -> Self {
        let mut p = Self::EMPTY;
        p.pts[..pts.len()].copy_from_slice(pts);
        p.len = pts.len();
        p
    }

    fn push(&mut self, pt: Pt) {
        self.pts[self.len] = pt;
        self.len += 1;
    }

    fn as_slice(&self) -> &[Pt] {
        &self.pts[..self.len]
    }
}

fn signed_area(poly: &[Pt]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        / 2.0
}

fn ccw(mut poly: Poly) -> Poly {
    if signed_area(poly.as_slice()) < 0.0 {
        poly.pts[..poly.len].reverse();
    }
    poly
}

/// Sutherland–Hodgman clip of `subject` by a convex counter-clockwise `clip`.
fn clip_convex(subject: &Poly, clip: &Poly) -> Poly {
    let mut buf = [*subject, Poly::EMPTY];
    let mut cur = 0;
    let clip = clip.as_slice();
    let n = clip.len();
    for i in 0..n {
        if buf[cur].len == 0 {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        let side = |p: Pt| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        let (lo, hi) = buf.split_at_mut(1);
        let (input, out) = if cur == 0 { (&lo[0], &mut hi[0]) } else { (&hi[0], &mut lo[0]) };
        out.len = 0;
        let m = input.len;
        for j in 0..m {
            let (p, q) = (input.pts[j], input.pts[(j + 1) % m]);
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
            }
        }
        cur = 1 - cur;
    }
    buf[cur]
}

fn parallelogram(a: Pt, b: Pt, shift: Pt) -> Poly {
    ccw(Poly::from_slice(&[a, b, (b.0 + shift.0, b.1 + shift.1), (a.0 + shift.0, a.1 + shift.1)]))
}

/// Share of a `width × height` window that receives beam radiation.
///
/// Window coordinates: x to the right as seen from outside, z upwards, the
/// glazed rectangle is `[0, w] × [0, h]`. Each device projects a
/// parallelogram onto the façade plane; the shaded area is the union of
/// those parallelograms clipped to the window.
///
/// Returns 1 when the sun is behind the façade or below the horizon since
/// no beam reaches the window then anyway.
pub fn sunlit_fraction(
    width_m: f64,
    height_m: f64,
    shading: &ShadingGeometry,
    sun_altitude_deg: f64,
    relative_azimuth_deg: f64,
) -> f64 {
    if shading.is_empty() || width_m <= 0.0 || height_m <= 0.0 {
        return 1.0;
    }
    let alt = sun_altitude_deg.to_radians();
    let gamma = relative_azimuth_deg.to_radians();
    if alt <= 0.0 || gamma.cos() * alt.cos() <= 1e-9 {
        return 1.0;
    }
    // Shift on the façade per metre of outward depth.
    let per_depth = (gamma.tan(), -alt.tan() / gamma.cos());
    let (w, h) = (width_m, height_m);
    let mut shadows = [Poly::EMPTY; 3];
    let mut count = 0;
    if shading.has_overhang() {
        let d = shading.overhang_depth_m;
        shadows[count] = parallelogram(
            (-shading.overhang_ext_left_m, h),
            (w + shading.overhang_ext_right_m, h),
            (d * per_depth.0, d * per_depth.1),
        );
        count += 1;
    }
    let top = h + shading.fin_ext_top_m;
    for (x, d) in [(0.0, shading.fin_left_depth_m), (w, shading.fin_right_depth_m)] {
        if d > 0.0 {
            shadows[count] = parallelogram((x, 0.0), (x, top), (d * per_depth.0, d * per_depth.1));
            count += 1;
        }
    }
    let window = Poly::from_slice(&[(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)]);
    let mut pieces = [Poly::EMPTY; 3];
    let mut n = 0;
    for s in &shadows[..count] {
        let p = clip_convex(&window, s);
        if p.len >= 3 && signed_area(p.as_slice()).abs() > 1e-12 {
            pieces[n] = ccw(p);
            n += 1;
        }
    }
    // Inclusion–exclusion over at most three convex pieces.
    let area = |p: &Poly| if p.len >= 3 { signed_area(p.as_slice()).abs() } else { 0.0 };
    let mut shaded: f64 = pieces[..n].iter().map(area).sum();
    for i in 0..n {
        for j in i + 1..n {
            let ij = clip_convex(&pieces[i], &pieces[j]);
            shaded -= area(&ij);
            for k in j + 1..n {
                if ij.len >= 3 {
                    shaded += area(&clip_convex(&ij, &pieces[k]));
                }
            }
        }
    }
    (1.0 - shaded / (w * h)).clamp(0.0, 1.0)
}
