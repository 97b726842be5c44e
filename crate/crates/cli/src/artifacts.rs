//! `trajectory.csv` and `plot.svg` writers.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ribc_core::construct::Ellipsoid;
use ribc_core::geometry::Polytope;
use ribc_core::sim::Trajectory;
use ribc_core::{Matrix, Vector};

/// One executed phase with its global start time.
pub struct PhaseTrace<'a> {
    pub label: &'a str,
    pub start: f64,
    pub trajectory: &'a Trajectory,
}

/// Rows `t, x_1..x_n, u_1..u_m, phase`; samples repeated at phase joints are dropped.
pub fn write_csv(path: &Path, phases: &[PhaseTrace]) -> Result<()> {
    let Some(first) = phases.first() else { bail!("no phases to write") };
    let n = first.trajectory.states[0].len();
    let m = first.trajectory.controls[0].len();
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend((1..=m).map(|i| format!("u_{i}")));
    header.push("phase".into());
    w.write_record(&header)?;
    let mut last_t = f64::NEG_INFINITY;
    for ph in phases {
        let tr = ph.trajectory;
        for ((t, x), u) in tr.times.iter().zip(&tr.states).zip(&tr.controls) {
            let t = ph.start + t;
            if t <= last_t {
                continue;
            }
            last_t = t;
            let mut rec = vec![format!("{t}")];
            rec.extend(x.iter().map(|v| format!("{v}")));
            rec.extend(u.iter().map(|v| format!("{v}")));
            rec.push(ph.label.to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn project(x: &Vector, proj: (usize, usize)) -> (f64, f64) {
    (x[proj.0], x[proj.1])
}

/// Counter-clockwise hull of the projected vertices.
fn shadow(p: &Polytope, proj: (usize, usize)) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<Vector> = p.vertices().iter().map(|v| Vector::from_row_slice(&[v[proj.0], v[proj.1]])).collect();
    let hull = Polytope::from_vertices(&pts).context("projection of a polytope is degenerate")?;
    let c = hull.centroid();
    let mut out: Vec<(f64, f64)> = hull.vertices().iter().map(|v| (v[0], v[1])).collect();
    out.sort_by(|a, b| (a.1 - c[1]).atan2(a.0 - c[0]).total_cmp(&(b.1 - c[1]).atan2(b.0 - c[0])));
    Ok(out)
}

/// Boundary of the projected ellipsoid, sampled at 128 angles.
fn ellipse(e: &Ellipsoid, proj: (usize, usize)) -> Option<Vec<(f64, f64)>> {
    let pinv = e.p.clone().try_inverse()?;
    let s = Matrix::from_fn(2, 2, |r, c| pinv[([proj.0, proj.1][r], [proj.0, proj.1][c])]);
    let l = cholesky2(&s)?;
    let (cx, cy) = project(&e.center, proj);
    let r = e.level.sqrt();
    Some(
        (0..128)
            .map(|k| {
                let th = k as f64 * std::f64::consts::TAU / 128.0;
                let (z0, z1) = (th.cos(), th.sin());
                (cx + r * l[(0, 0)] * z0, cy + r * (l[(1, 0)] * z0 + l[(1, 1)] * z1))
            })
            .collect(),
    )
}

fn cholesky2(s: &Matrix) -> Option<Matrix> {
    let a = s[(0, 0)];
    if !(a > 0.0) {
        return None;
    }
    let l00 = a.sqrt();
    let l10 = s[(1, 0)] / l00;
    let d = s[(1, 1)] - l10 * l10;
    if !(d > 0.0) {
        return None;
    }
    Some(Matrix::from_row_slice(2, 2, &[l00, 0.0, l10, d.sqrt()]))
}

/// At most about 2000 projected points per phase, always keeping both ends.
fn thin(states: &[Vector], proj: (usize, usize)) -> Vec<(f64, f64)> {
    let step = states.len().div_ceil(2000).max(1);
    let mut out: Vec<(f64, f64)> = states.iter().step_by(step).map(|x| project(x, proj)).collect();
    if (states.len() - 1) % step != 0 {
        out.push(project(&states[states.len() - 1], proj));
    }
    out
}

pub struct PlotSets<'a> {
    pub polytopes: Vec<(&'a str, &'a Polytope)>,
    pub ellipsoids: Vec<(&'a str, &'a Ellipsoid)>,
}

/// SVG 1.1 plot: one polygon per polytope, one path per ellipsoid, one polyline per phase.
pub fn write_svg(path: &Path, sets: &PlotSets, phases: &[PhaseTrace], proj: (usize, usize)) -> Result<()> {
    let mut polys = Vec::new();
    for (name, p) in &sets.polytopes {
        polys.push((*name, shadow(p, proj)?));
    }
    let ells: Vec<(&str, Vec<(f64, f64)>)> = sets.ellipsoids.iter().filter_map(|(name, e)| ellipse(e, proj).map(|b| (*name, b))).collect();
    let lines: Vec<(&str, Vec<(f64, f64)>)> = phases.iter().map(|ph| (ph.label, thin(&ph.trajectory.states, proj))).collect();

    let all = polys.iter().chain(&ells).chain(&lines).flat_map(|(_, pts)| pts.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        bail!("nothing to plot");
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let stroke = 0.004 * w.max(h);
    // flip y so the second coordinate points up
    let pt = |(x, y): (f64, f64)| format!("{:.6},{:.6}", x, -y);
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="600" height="{:.0}" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
        600.0 * h / w,
        x0 - pad,
        -(y1 + pad),
        w,
        h
    )?;
    writeln!(s, "<title>projection on x_{} / x_{}</title>", proj.0 + 1, proj.1 + 1)?;
    for (k, (name, pts)) in polys.iter().enumerate() {
        let p: Vec<String> = pts.iter().map(|&q| pt(q)).collect();
        writeln!(
            s,
            r##"<polygon id="{name}" points="{}" fill="none" stroke="{}" stroke-width="{stroke:.6}" stroke-dasharray="{}"/>"##,
            p.join(" "),
            if k == 0 { "#000000" } else { "#777777" },
            if k == 0 { "none".to_string() } else { format!("{:.6}", 3.0 * stroke) }
        )?;
    }
    for (name, pts) in &ells {
        let p: Vec<String> = pts.iter().map(|&q| pt(q)).collect();
        writeln!(s, r##"<path id="{name}" d="M {} Z" fill="none" stroke="#999999" stroke-width="{stroke:.6}"/>"##, p.join(" L "))?;
    }
    for (k, (label, pts)) in lines.iter().enumerate() {
        let p: Vec<String> = pts.iter().map(|&q| pt(q)).collect();
        writeln!(
            s,
            r#"<polyline class="phase" id="phase-{label}" points="{}" fill="none" stroke="{}" stroke-width="{:.6}"/>"#,
            p.join(" "),
            COLORS[k % COLORS.len()],
            1.5 * stroke
        )?;
    }
    writeln!(s, "</svg>")?;
    std::fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
