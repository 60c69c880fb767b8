//! Reading and writing pose graphs in the plain-text g2o format.
//!
//! Supported records are `VERTEX_SE2 id x y theta` and
//! `EDGE_SE2 i j dx dy dtheta I11 I12 I13 I22 I23 I33`, with the edge
//! information matrix given as its upper triangle in row-major order.

use posegraph_core::{Edge, EdgeKind, Pose2, PoseGraph, RelPose};
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Parsed edge line: (line number, i, j, measurement, weight).
type RawEdge = (usize, usize, usize, RelPose, [[f64; 3]; 3]);

#[derive(Debug)]
pub enum G2oError {
    Io(std::io::Error),
    /// A line that could not be parsed, with its 1-based line number.
    Malformed { line: usize, reason: String },
    /// An edge references a vertex id that never appears.
    MissingVertex { line: usize, id: usize },
    /// Vertex ids do not form a dense range starting at zero.
    SparseVertexIds { expected: usize, found: usize },
    /// An information matrix is not positive semidefinite.
    NonPsdInformation { line: usize },
    /// The assembled graph violates a structural invariant.
    Graph(posegraph_core::graph::GraphError),
}

impl fmt::Display for G2oError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            G2oError::Io(e) => write!(f, "{e}"),
            G2oError::Malformed { line, reason } => write!(f, "line {line}: {reason}"),
            G2oError::MissingVertex { line, id } => {
                write!(f, "line {line}: edge references unknown vertex {id}")
            }
            G2oError::SparseVertexIds { expected, found } => write!(
                f,
                "vertex ids must be 0..{expected}, but only {found} ids were found"
            ),
            G2oError::NonPsdInformation { line } => {
                write!(f, "line {line}: information matrix is not positive semidefinite")
            }
            G2oError::Graph(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for G2oError {}

impl From<std::io::Error> for G2oError {
    fn from(e: std::io::Error) -> Self {
        G2oError::Io(e)
    }
}

/// Formats a float with the given number of significant digits, in the
/// style of printf `%g`: fixed notation for moderate exponents, scientific
/// otherwise, trailing zeros trimmed.
pub fn fmt_g(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let epos = sci.find('e').unwrap();
    let exp: i32 = sci[epos + 1..].parse().unwrap();
    if exp < -4 || exp >= sig as i32 {
        let mantissa = sci[..epos].trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    }
}

/// Accepts positive semidefinite blocks (a zero orientation weight is
/// legal) and rejects indefinite or negative ones via principal minors.
fn is_psd_3x3(w: &[[f64; 3]; 3]) -> bool {
    let scale = w
        .iter()
        .flatten()
        .fold(0.0f64, |a, &v| a.max(v.abs()))
        .max(1.0);
    let tol = -1e-9 * scale;
    let det2 = |a: f64, b: f64, c: f64, d: f64| a * d - b * c;
    // All principal minors of a symmetric PSD matrix are nonnegative.
    for i in 0..3 {
        if w[i][i] < tol {
            return false;
        }
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if det2(w[i][i], w[i][j], w[j][i], w[j][j]) < tol * scale {
            return false;
        }
    }
    let det3 = w[0][0] * det2(w[1][1], w[1][2], w[2][1], w[2][2])
        - w[0][1] * det2(w[1][0], w[1][2], w[2][0], w[2][2])
        + w[0][2] * det2(w[1][0], w[1][1], w[2][0], w[2][1]);
    det3 >= tol * scale * scale
}

/// Parses a pose graph from a g2o text file. Edges between consecutive ids
/// become odometry, all others loop closures; the gauge is vertex 0.
pub fn read_g2o(path: &Path) -> Result<PoseGraph, G2oError> {
    let text = fs::read_to_string(path)?;
    let mut vertices: Vec<(usize, Pose2)> = Vec::new();
    let mut raw_edges: Vec<RawEdge> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse =
            |s: &str, what: &str| -> Result<f64, G2oError> {
                s.parse::<f64>().map_err(|_| G2oError::Malformed {
                    line: line_no,
                    reason: format!("bad {what} value {s:?}"),
                })
            };
        let parse_id =
            |s: &str, what: &str| -> Result<usize, G2oError> {
                s.parse::<usize>().map_err(|_| G2oError::Malformed {
                    line: line_no,
                    reason: format!("bad {what} {s:?}"),
                })
            };
        match fields[0] {
            "VERTEX_SE2" => {
                if fields.len() != 5 {
                    return Err(G2oError::Malformed {
                        line: line_no,
                        reason: format!("expected 5 fields, got {}", fields.len()),
                    });
                }
                let id = parse_id(fields[1], "vertex id")?;
                let x = parse(fields[2], "x")?;
                let y = parse(fields[3], "y")?;
                let theta = parse(fields[4], "theta")?;
                vertices.push((id, Pose2::new(x, y, theta)));
            }
            "EDGE_SE2" => {
                if fields.len() != 12 {
                    return Err(G2oError::Malformed {
                        line: line_no,
                        reason: format!("expected 12 fields, got {}", fields.len()),
                    });
                }
                let i = parse_id(fields[1], "vertex id")?;
                let j = parse_id(fields[2], "vertex id")?;
                let meas = RelPose::new(
                    parse(fields[3], "dx")?,
                    parse(fields[4], "dy")?,
                    parse(fields[5], "dtheta")?,
                );
                let u: Vec<f64> = fields[6..12]
                    .iter()
                    .enumerate()
                    .map(|(k, s)| parse(s, &format!("information entry {k}")))
                    .collect::<Result<_, _>>()?;
                let weight = [
                    [u[0], u[1], u[2]],
                    [u[1], u[3], u[4]],
                    [u[2], u[4], u[5]],
                ];
                if !is_psd_3x3(&weight) {
                    return Err(G2oError::NonPsdInformation { line: line_no });
                }
                raw_edges.push((line_no, i, j, meas, weight));
            }
            tag => {
                eprintln!("warning: skipping unknown tag {tag:?} on line {line_no}");
            }
        }
    }

    let n = vertices.len();
    let mut poses = vec![None; n];
    for (id, pose) in vertices {
        if id >= n {
            return Err(G2oError::SparseVertexIds {
                expected: n,
                found: id,
            });
        }
        poses[id] = Some(pose);
    }
    let poses: Vec<Pose2> = poses
        .into_iter()
        .collect::<Option<_>>()
        .ok_or(G2oError::SparseVertexIds {
            expected: n,
            found: n,
        })?;

    let mut edges = Vec::with_capacity(raw_edges.len());
    for (line, i, j, meas, weight) in raw_edges {
        for id in [i, j] {
            if id >= n {
                return Err(G2oError::MissingVertex { line, id });
            }
        }
        let kind = if i.abs_diff(j) == 1 {
            EdgeKind::Odometry
        } else {
            EdgeKind::LoopClosure
        };
        edges.push(Edge {
            i,
            j,
            meas,
            weight,
            kind,
        });
    }

    let graph = PoseGraph::new(poses, edges, 0);
    graph.validate().map_err(G2oError::Graph)?;
    Ok(graph)
}

/// Writes the graph in g2o text format: vertices first in index order, then
/// edges in storage order, numbers with nine significant digits.
pub fn write_g2o(g: &PoseGraph, path: &Path) -> Result<(), G2oError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let g9 = |x: f64| fmt_g(x, 9);
    for (id, p) in g.poses.iter().enumerate() {
        writeln!(
            out,
            "VERTEX_SE2 {id} {} {} {}",
            g9(p.x),
            g9(p.y),
            g9(p.theta)
        )?;
    }
    for e in &g.edges {
        let w = &e.weight;
        writeln!(
            out,
            "EDGE_SE2 {} {} {} {} {} {} {} {} {} {} {}",
            e.i,
            e.j,
            g9(e.meas.dx),
            g9(e.meas.dy),
            g9(e.meas.dtheta),
            g9(w[0][0]),
            g9(w[0][1]),
            g9(w[0][2]),
            g9(w[1][1]),
            g9(w[1][2]),
            g9(w[2][2])
        )?;
    }
    out.flush()?;
    Ok(())
}
