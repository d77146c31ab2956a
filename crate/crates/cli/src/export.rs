//! SVG snapshots of spherical triangulations. Edges are drawn as sampled
//! geodesics, so stereographic images show the true circular arcs while
//! south-pole gnomonic images come out straight.

use std::fmt::Write as _;

use longsink::sphere::{gnomonic_project, slerp, stereographic_project};
use longsink::{Error, SphereTriangulation, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// From the north pole onto the equatorial plane; defined away from the
    /// pole itself.
    Stereographic,
    /// Central projection onto the plane z = -1; southern hemisphere only.
    Gnomonic,
}

#[derive(Debug, Clone)]
pub struct SvgOptions {
    pub projection: Projection,
    /// Canvas edge length in pixels.
    pub size: f64,
    /// Points sampled along each geodesic edge.
    pub samples: usize,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            projection: Projection::Stereographic,
            size: 800.0,
            samples: 32,
        }
    }
}

fn project(p: &Vec3, projection: Projection) -> Result<[f64; 2], Error> {
    match projection {
        Projection::Stereographic => stereographic_project(p),
        Projection::Gnomonic => gnomonic_project(p),
    }
}

/// Projected polyline of the geodesic from `a` to `b`.
pub fn project_edge(
    a: &Vec3,
    b: &Vec3,
    projection: Projection,
    samples: usize,
) -> Result<Vec<[f64; 2]>, Error> {
    let samples = samples.max(2);
    (0..samples)
        .map(|s| {
            let t = s as f64 / (samples - 1) as f64;
            project(&slerp(a, b, t), projection)
        })
        .collect()
}

/// One SVG snapshot of a drawing: every edge as a sampled geodesic polyline,
/// every vertex as a dot. Domain violations are collected per element and
/// reported together.
pub fn render_svg(
    vertices: &[Vec3],
    edges: &[(usize, usize)],
    opts: &SvgOptions,
) -> Result<String, Error> {
    let mut violations = Vec::new();
    let mut polylines = Vec::with_capacity(edges.len());
    for &(i, j) in edges {
        match project_edge(&vertices[i], &vertices[j], opts.projection, opts.samples) {
            Ok(line) => polylines.push(line),
            Err(e) => violations.push(format!("edge ({i}, {j}): {e}")),
        }
    }
    let mut dots = Vec::with_capacity(vertices.len());
    for (v, p) in vertices.iter().enumerate() {
        match project(p, opts.projection) {
            Ok(q) => dots.push(q),
            Err(e) => violations.push(format!("vertex {v}: {e}")),
        }
    }
    if !violations.is_empty() {
        return Err(Error::InvalidInput(format!(
            "projection domain violations: {}",
            violations.join("; ")
        )));
    }

    let all = polylines.iter().flatten().chain(&dots);
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for q in all {
        for axis in 0..2 {
            lo[axis] = lo[axis].min(q[axis]);
            hi[axis] = hi[axis].max(q[axis]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let pad = 0.05 * span;
    let scale = opts.size / (span + 2.0 * pad);
    let px = |q: &[f64; 2]| {
        let x = (q[0] - lo[0] + pad) * scale;
        let y = opts.size - (q[1] - lo[1] + pad) * scale;
        (x, y)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {0} {0}\">",
        opts.size
    );
    for line in &polylines {
        let points: Vec<String> = line
            .iter()
            .map(|q| {
                let (x, y) = px(q);
                format!("{x:.4},{y:.4}")
            })
            .collect();
        let _ = writeln!(
            svg,
            "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" ")
        );
    }
    for q in &dots {
        let (x, y) = px(q);
        let _ = writeln!(svg, "  <circle cx=\"{x:.4}\" cy=\"{y:.4}\" r=\"3\" fill=\"black\"/>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Snapshot of a triangulation under `opts`.
pub fn export_svg(t: &SphereTriangulation, opts: &SvgOptions) -> Result<String, Error> {
    render_svg(t.vertices(), t.edges(), opts)
}
