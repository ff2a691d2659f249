//! Text formats: edge-list graphs, placement TSV, and SVG rendering.
//! All writers are deterministic functions of their inputs.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::stress::Placement;

/// Parse the edge-list format: a required `vertices N` header, then one edge
/// per line as `u v [length]`; `#` starts a comment, blank lines are ignored.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<Edge> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let n = match n {
            None => {
                if fields.len() == 2 && fields[0] == "vertices" {
                    let count: usize = fields[1].parse().map_err(|_| Error::ParseError {
                        line: line_no,
                        reason: format!("invalid vertex count `{}`", fields[1]),
                    })?;
                    n = Some(count);
                    continue;
                }
                return Err(Error::MissingHeader);
            }
            Some(n) => n,
        };
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::ParseError {
                line: line_no,
                reason: format!("expected `u v [length]`, found {} fields", fields.len()),
            });
        }
        let parse_vertex = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| Error::ParseError {
                line: line_no,
                reason: format!("invalid vertex id `{}`", s),
            })?;
            if v >= n {
                return Err(Error::ParseError {
                    line: line_no,
                    reason: format!("vertex id {} out of range for {} vertices", v, n),
                });
            }
            Ok(v)
        };
        let u = parse_vertex(fields[0])?;
        let v = parse_vertex(fields[1])?;
        if u == v {
            return Err(Error::SelfLoop { vertex: u });
        }
        let length = match fields.get(2) {
            Some(s) => {
                let len: f64 = s.parse().map_err(|_| Error::ParseError {
                    line: line_no,
                    reason: format!("invalid edge length `{}`", s),
                })?;
                if !len.is_finite() || len <= 0.0 {
                    return Err(Error::ParseError {
                        line: line_no,
                        reason: format!("edge length {} must be positive and finite", len),
                    });
                }
                len
            }
            None => 1.0,
        };
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(Error::DuplicateEdge { u: key.0, v: key.1 });
        }
        edges.push(Edge { u, v, length });
    }
    match n {
        Some(n) => Graph::new(n, edges),
        None => Err(Error::MissingHeader),
    }
}

/// Inverse of [`parse_edge_list`]; unit lengths are left implicit.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vertices {}", g.n());
    for e in g.edges() {
        if e.length == 1.0 {
            let _ = writeln!(out, "{} {}", e.u, e.v);
        } else {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, format_coord(e.length));
        }
    }
    out
}

/// Nine digits of mantissa (enough for the 1e-9 round-trip contract); exact
/// zero stays `0`.
fn format_coord(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{:.9e}", v)
    }
}

/// Tab-separated placement: header `vertex\tx0..x{d-1}`, one row per vertex,
/// coordinates with nine significant digits (round-trips to 1e-9 relative).
pub fn write_placement_tsv(x: &Placement) -> String {
    let mut out = String::from("vertex");
    for k in 0..x.dim() {
        let _ = write!(out, "\tx{}", k);
    }
    out.push('\n');
    for i in 0..x.n() {
        let _ = write!(out, "{}", i);
        for &c in x.row(i) {
            let _ = write!(out, "\t{}", format_coord(c));
        }
        out.push('\n');
    }
    out
}

/// Parse the output of [`write_placement_tsv`].
pub fn parse_placement_tsv(text: &str) -> Result<Placement> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::MissingHeader)?;
    let columns: Vec<&str> = header.split('\t').collect();
    if columns.first() != Some(&"vertex") || columns.len() < 2 {
        return Err(Error::MissingHeader);
    }
    let dim = columns.len() - 1;
    let mut coords = Vec::new();
    let mut expected_vertex = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != dim + 1 {
            return Err(Error::ParseError {
                line: idx + 1,
                reason: format!("expected {} fields, found {}", dim + 1, fields.len()),
            });
        }
        let vertex: usize = fields[0].parse().map_err(|_| Error::ParseError {
            line: idx + 1,
            reason: format!("invalid vertex id `{}`", fields[0]),
        })?;
        if vertex != expected_vertex {
            return Err(Error::ParseError {
                line: idx + 1,
                reason: format!("expected vertex {}, found {}", expected_vertex, vertex),
            });
        }
        expected_vertex += 1;
        for f in &fields[1..] {
            let c: f64 = f.parse().map_err(|_| Error::ParseError {
                line: idx + 1,
                reason: format!("invalid coordinate `{}`", f),
            })?;
            coords.push(c);
        }
    }
    Placement::new(expected_vertex, dim, coords)
}

/// Rendering options for [`write_svg`].
#[derive(Debug, Clone)]
pub struct SvgOptions {
    /// Width of the longer viewport side in pixels.
    pub size: f64,
    pub node_radius: f64,
    pub stroke_width: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            size: 800.0,
            node_radius: 4.0,
            stroke_width: 1.5,
        }
    }
}

/// Render a 2-D placement as SVG: edges as line segments, vertices as
/// circles, viewport autoscaled to the bounding box with a 5% margin.
/// Identical inputs yield byte-identical output.
pub fn write_svg(x: &Placement, g: &Graph, options: &SvgOptions) -> Result<String> {
    if x.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: x.dim(),
            expected: 2,
        });
    }
    assert_eq!(x.n(), g.n(), "placement does not match the graph");

    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for i in 0..x.n() {
        for (k, &c) in x.row(i).iter().enumerate() {
            min[k] = min[k].min(c);
            max[k] = max[k].max(c);
        }
    }
    let mut extent = [max[0] - min[0], max[1] - min[1]];
    for e in &mut extent {
        if *e <= 0.0 {
            *e = 1.0;
        }
    }
    let margin = 0.05 * extent[0].max(extent[1]);
    let view_w = extent[0] + 2.0 * margin;
    let view_h = extent[1] + 2.0 * margin;
    let scale = options.size / view_w.max(view_h);
    let px = |c: f64, axis: usize| (c - min[axis] + margin) * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.3}\" height=\"{:.3}\" viewBox=\"0 0 {:.3} {:.3}\">",
        view_w * scale,
        view_h * scale,
        view_w * scale,
        view_h * scale
    );
    for e in g.edges() {
        let (a, b) = (x.row(e.u), x.row(e.v));
        let _ = writeln!(
            out,
            "  <line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-width=\"{:.3}\"/>",
            px(a[0], 0),
            px(a[1], 1),
            px(b[0], 0),
            px(b[1], 1),
            options.stroke_width
        );
    }
    for i in 0..x.n() {
        let row = x.row(i);
        let _ = writeln!(
            out,
            "  <circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.3}\" fill=\"steelblue\" stroke=\"black\" stroke-width=\"1\"/>",
            px(row[0], 0),
            px(row[1], 1),
            options.node_radius
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_band, generate_grid};

    #[test]
    fn parse_minimal_edge() {
        let g = parse_edge_list("vertices 2\n0 1\n").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges(), &[Edge::unit(0, 1)]);
    }

    #[test]
    fn parse_rejects_self_loop() {
        assert!(matches!(
            parse_edge_list("vertices 2\n0 0\n"),
            Err(Error::SelfLoop { vertex: 0 })
        ));
    }

    #[test]
    fn parse_weighted_path() {
        let g = parse_edge_list("vertices 3\n0 1 2.5\n1 2 3.0\n").unwrap();
        assert_eq!(g.edges()[0].length, 2.5);
        assert_eq!(g.edges()[1].length, 3.0);
    }

    #[test]
    fn parse_rejects_missing_header_and_duplicates() {
        assert!(matches!(parse_edge_list("0 1\n"), Err(Error::MissingHeader)));
        assert!(matches!(parse_edge_list(""), Err(Error::MissingHeader)));
        assert!(matches!(
            parse_edge_list("vertices 2\n0 1\n1 0\n"),
            Err(Error::DuplicateEdge { u: 0, v: 1 })
        ));
        assert!(parse_edge_list("vertices 2\n0 5\n").is_err());
        assert!(parse_edge_list("vertices 2\n0 1 -3\n").is_err());
    }

    #[test]
    fn parse_ignores_comments_and_blanks() {
        let g = parse_edge_list("# a path\n\nvertices 3\n0 1 # first\n1 2\n").unwrap();
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn edge_list_round_trip_of_generators() {
        for n in [2usize, 5, 9, 46] {
            let g = generate_band(n.max(2)).unwrap();
            assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
            let g = generate_grid(n).unwrap();
            assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
        }
    }

    #[test]
    fn tsv_single_vertex() {
        let x = Placement::zeros(1, 2);
        let text = write_placement_tsv(&x);
        assert_eq!(text, "vertex\tx0\tx1\n0\t0\t0\n");
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn tsv_line_count() {
        let x = Placement::zeros(7, 2);
        assert_eq!(write_placement_tsv(&x).lines().count(), 8);
    }

    #[test]
    fn tsv_round_trip_accuracy() {
        let coords: Vec<f64> = (0..10)
            .map(|i| (i as f64 * 0.7371).sin() * 13.77)
            .collect();
        let x = Placement::new(5, 2, coords).unwrap();
        let back = parse_placement_tsv(&write_placement_tsv(&x)).unwrap();
        for (a, b) in x.coords().iter().zip(back.coords()) {
            assert!(
                (a - b).abs() <= 1e-9 * (1.0 + a.abs()),
                "{} vs {}",
                a,
                b
            );
        }
    }

    #[test]
    fn svg_single_edge_structure() {
        let g = Graph::unit(2, &[(0, 1)]).unwrap();
        let x = Placement::from_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let svg = write_svg(&x, &g, &SvgOptions::default()).unwrap();
        assert_eq!(svg.matches("<line ").count(), 1);
        assert_eq!(svg.matches("<circle ").count(), 2);
    }

    #[test]
    fn svg_deterministic() {
        let g = generate_grid(9).unwrap();
        let x = crate::engine::init_placement(9, 2, 3);
        let a = write_svg(&x, &g, &SvgOptions::default()).unwrap();
        let b = write_svg(&x, &g, &SvgOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn svg_rejects_other_dimensions() {
        let g = Graph::unit(2, &[(0, 1)]).unwrap();
        let x = Placement::zeros(2, 3);
        assert!(matches!(
            write_svg(&x, &g, &SvgOptions::default()),
            Err(Error::UnsupportedDimension { dim: 3, .. })
        ));
    }
}
