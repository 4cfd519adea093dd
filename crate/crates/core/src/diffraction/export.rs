use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::Peak;
use crate::error::Result;
use crate::scalar::Real;

pub const CSV_HEADER: &str = "c1,c2,c3,c4,kx,ky,re_amp,im_amp,intensity,n_iters";

/// JSON mirror of one CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeakRecord {
    pub c1: i64,
    pub c2: i64,
    pub c3: Option<i64>,
    pub c4: Option<i64>,
    pub kx: f64,
    pub ky: Option<f64>,
    pub re_amp: f64,
    pub im_amp: f64,
    pub intensity: f64,
    pub n_iters: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deformation: Option<String>,
}

impl PeakRecord {
    pub fn from_peak<T: Real>(p: &Peak<T>) -> Self {
        let c = &p.k.coords;
        Self {
            c1: c[0],
            c2: c[1],
            c3: c.get(2).copied(),
            c4: c.get(3).copied(),
            kx: p.k.k_phys[0].to_f64_lossy(),
            ky: p.k.k_phys.get(1).map(|v| v.to_f64_lossy()),
            re_amp: p.amplitude.re.to_f64_lossy(),
            im_amp: p.amplitude.im.to_f64_lossy(),
            intensity: p.intensity.to_f64_lossy(),
            n_iters: p.n_iters,
            deformation: p.deformation.clone(),
        }
    }
}

fn opt<V: ToString>(v: Option<V>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with 17 significant digits.
pub fn peaks_csv<T: Real>(peaks: &[Peak<T>]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for p in peaks {
        let r = PeakRecord::from_peak(p);
        let _ = writeln!(
            s,
            "{},{},{},{},{:.16e},{},{:.16e},{:.16e},{:.16e},{}",
            r.c1,
            r.c2,
            opt(r.c3),
            opt(r.c4),
            r.kx,
            r.ky.map(|v| format!("{v:.16e}")).unwrap_or_default(),
            r.re_amp,
            r.im_amp,
            r.intensity,
            r.n_iters
        );
    }
    s
}

pub fn peaks_json<T: Real>(peaks: &[Peak<T>]) -> Result<String> {
    let records: Vec<PeakRecord> = peaks.iter().map(PeakRecord::from_peak).collect();
    Ok(serde_json::to_string_pretty(&records)?)
}

#[derive(Clone, Debug)]
pub struct SvgOptions {
    pub size: f64,
    /// Radius of the brightest disk, in pixels.
    pub max_radius: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { size: 800.0, max_radius: 12.0 }
    }
}

/// Scatter plot with disk area proportional to intensity (stems in 1d).
pub fn peaks_svg<T: Real>(peaks: &[Peak<T>], opts: &SvgOptions) -> String {
    let w = opts.size;
    let planar = peaks.first().map_or(true, |p| p.k.k_phys.len() == 2);
    let h = if planar { w } else { w / 2.0 };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    if peaks.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let imax = peaks.iter().map(|p| p.intensity.to_f64_lossy()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let xy: Vec<[f64; 2]> = peaks
        .iter()
        .map(|p| [p.k.k_phys[0].to_f64_lossy(), p.k.k_phys.get(1).map_or(0.0, |v| v.to_f64_lossy())])
        .collect();
    let ext = |r: usize| xy.iter().map(|p| p[r]).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (x0, x1) = ext(0);
    let (y0, y1) = ext(1);
    let m = opts.max_radius + 4.0;
    if planar {
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let sc = (w - 2.0 * m) / span;
        let _ = writeln!(s, r#"<g fill="black">"#);
        for (p, k) in peaks.iter().zip(&xy) {
            let r = opts.max_radius * (p.intensity.to_f64_lossy() / imax).sqrt();
            let cx = m + (k[0] - x0) * sc;
            let cy = h - m - (k[1] - y0) * sc;
            let _ = writeln!(s, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}"/>"#);
        }
    } else {
        let sc = (w - 2.0 * m) / (x1 - x0).max(1e-12);
        let base = h - m;
        let _ = writeln!(s, r#"<g stroke="black" stroke-width="1.5">"#);
        for (p, k) in peaks.iter().zip(&xy) {
            let x = m + (k[0] - x0) * sc;
            let top = base - (h - 2.0 * m) * p.intensity.to_f64_lossy() / imax;
            let _ = writeln!(s, r#"<line x1="{x:.3}" y1="{base:.3}" x2="{x:.3}" y2="{top:.3}"/>"#);
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Writes `<stem>.csv`, `<stem>.json`, `<stem>.svg` into `dir`.
pub fn write_peaks<T: Real>(peaks: &[Peak<T>], dir: impl AsRef<Path>, stem: &str) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let files = [
        (dir.join(format!("{stem}.csv")), peaks_csv(peaks)),
        (dir.join(format!("{stem}.json")), peaks_json(peaks)?),
        (dir.join(format!("{stem}.svg")), peaks_svg(peaks, &SvgOptions::default())),
    ];
    let mut out = Vec::new();
    for (path, body) in files {
        std::fs::write(&path, body)?;
        out.push(path);
    }
    Ok(out)
}
