//! Verdicts, atomic artifact writes and log-log SVG plots.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// The machine-readable result printed on standard output.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub experiment: String,
    pub target: String,
    pub range: [u64; 2],
    pub verdict: String,
    pub details: Vec<Value>,
}

impl Verdict {
    pub fn new(experiment: &str, target: impl Into<String>, range: (u64, u64)) -> Verdict {
        Verdict { experiment: experiment.into(), target: target.into(), range: [range.0, range.1], verdict: "pass".into(), details: Vec::new() }
    }

    pub fn detail(&mut self, v: impl Serialize) {
        self.details.push(serde_json::to_value(v).expect("reports serialize"));
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        self.verdict = "fail".into();
        self.details.push(Value::String(why.into()));
    }

    pub fn passed(&self) -> bool {
        self.verdict != "fail"
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// File stem for a program name: the part after the last `/`, with
/// characters outside `[A-Za-z0-9._-]` replaced by `_`.
pub fn stem(name: &str) -> String {
    let last = name.rsplit('/').next().unwrap_or(name);
    last.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
}

pub fn artifact(out: &Path, name: &str, ext: &str) -> PathBuf {
    out.join(format!("{}.{ext}", stem(name)))
}

/// A log-log plot of `(n, steps)` points, optionally with a fitted line
/// `steps = c·n^k` given as `(c, k)`.
pub fn loglog_svg(title: &str, points: &[(u64, u64)], fit: Option<(f64, f64)>) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 56.0;
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|p| p.0 > 0 && p.1 > 0).map(|&(n, t)| ((n as f64).log10(), (t as f64).log10())).collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let span = |sel: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(sel).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = span(|p| p.0);
    let (y0, y1) = span(|p| p.1);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    svg.push_str(&format!(
        "<line x1=\"{M}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{cx}\" y=\"{lb}\" text-anchor=\"middle\">log10 n ({x0:.2} to {x1:.2})</text>\n\
         <text x=\"14\" y=\"{cy}\" transform=\"rotate(-90 14 {cy})\" text-anchor=\"middle\">log10 steps ({y0:.2} to {y1:.2})</text>\n",
        b = H - M,
        r = W - M,
        cx = W / 2.0,
        lb = H - 16.0,
        cy = H / 2.0,
    ));
    for &(x, y) in &pts {
        svg.push_str(&format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>\n", sx(x), sy(y)));
    }
    if let Some((c, k)) = fit {
        let line = |x: f64| c.log10() + k * x;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"firebrick\"/>\n\
             <text x=\"{}\" y=\"40\" fill=\"firebrick\">slope {k:.3}</text>\n",
            sx(x0),
            sy(line(x0)),
            sx(x1),
            sy(line(x1)),
            M + 8.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_file_safe() {
        assert_eq!(stem("tm/palindrome1"), "palindrome1");
        assert_eq!(stem("zoo/factorial.incremental"), "factorial.incremental");
        assert_eq!(stem("restart(tm/x)"), "x_");
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn plot_has_one_marker_per_point() {
        let svg = loglog_svg("t", &[(1, 1), (2, 4), (4, 16)], Some((1.0, 2.0)));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("slope 2.000"));
    }
}
