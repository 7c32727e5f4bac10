//! Domain files, cover files and node-value files.

use std::path::Path;

use fracspace_core::funcspace::GridFunction;
use fracspace_core::geometry::{Domain, Point, Rect, Side, WhitneyCover};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `{"type": "polygon", "vertices": [[x, y], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub vertices: Vec<[f64; 2]>,
}

impl DomainFile {
    pub fn of(domain: &Domain) -> DomainFile {
        DomainFile { kind: "polygon".into(), vertices: domain.vertices().iter().map(|p| [p.x, p.y]).collect() }
    }

    pub fn to_domain(&self) -> Result<Domain, CliError> {
        if self.kind != "polygon" {
            return Err(CliError::Input(format!("domain type must be \"polygon\", got {:?}", self.kind)));
        }
        if self.vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CliError::Input("domain vertices must be finite".into()));
        }
        Domain::new(self.vertices.iter().map(|v| Point::new(v[0], v[1])).collect()).map_err(|e| CliError::Input(format!("bad domain: {e}")))
    }
}

/// Loads a domain from a file path or a builtin name: `square`, `lshape`,
/// `disk:<n>` (regular `n`-gon inscribed in the unit circle).
pub fn load_domain(source: &str) -> Result<Domain, CliError> {
    match source {
        "square" => return Ok(Domain::unit_square()),
        "lshape" => {
            let v = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)];
            return Domain::new(v.iter().map(|&(x, y)| Point::new(x, y)).collect()).map_err(|e| CliError::Input(e.to_string()));
        }
        _ => {}
    }
    if let Some(n) = source.strip_prefix("disk:") {
        let n: usize = n.parse().map_err(|_| CliError::Input(format!("bad polygon count in {source:?}")))?;
        return Domain::regular_polygon(n, Point::new(0.0, 0.0), 1.0).map_err(|e| CliError::Input(e.to_string()));
    }
    let text = std::fs::read_to_string(source).map_err(|e| CliError::Input(format!("cannot read domain file {source}: {e}")))?;
    let file: DomainFile = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed domain file {source}: {e}")))?;
    file.to_domain()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverHeader {
    pub c_w: f64,
    pub root_scale: f64,
    pub side: Side,
    #[serde(rename = "box")]
    pub region: Rect,
    pub max_level: u8,
    pub uncovered_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeRecord {
    pub level: u8,
    pub ix: i64,
    pub iy: i64,
    /// Flag names; currently only `"frontier"`.
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverFile {
    pub header: CoverHeader,
    pub cubes: Vec<CubeRecord>,
}

impl CoverFile {
    pub fn of(cover: &WhitneyCover) -> CoverFile {
        CoverFile {
            header: CoverHeader {
                c_w: cover.c_w(),
                root_scale: cover.root_scale(),
                side: cover.side(),
                region: cover.region(),
                max_level: cover.max_level(),
                uncovered_measure: cover.uncovered_measure(),
            },
            cubes: cover
                .cubes()
                .iter()
                .enumerate()
                .map(|(i, c)| CubeRecord {
                    level: c.level,
                    ix: c.ix,
                    iy: c.iy,
                    flags: if cover.is_frontier(i) { vec!["frontier".into()] } else { Vec::new() },
                })
                .collect(),
        }
    }
}

/// Writes node values as CSV: `cube,node,x,y,re[,im]`, one row per node in
/// cube order.
pub fn write_nodes(f: &GridFunction<'_>, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mm = f.nodes_per_cube();
    let im = f.im();
    let mut header = vec!["cube", "node", "x", "y", "re"];
    if im.is_some() {
        header.push("im");
    }
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    w.write_record(&header).map_err(io)?;
    for k in 0..f.len() {
        let p = f.point(k);
        let mut row = vec![(k / mm).to_string(), (k % mm).to_string(), p.x.to_string(), p.y.to_string(), f.re()[k].to_string()];
        if let Some(im) = im {
            row.push(im[k].to_string());
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Reads a node-value file written for `cover` with `m` nodes per axis.
/// Every node must appear once, in order, at its own coordinates.
pub fn read_nodes<'c>(cover: &'c WhitneyCover, m: usize, path: &Path) -> Result<GridFunction<'c>, CliError> {
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let complex = match headers.iter().collect::<Vec<_>>().as_slice() {
        ["cube", "node", "x", "y", "re"] => false,
        ["cube", "node", "x", "y", "re", "im"] => true,
        _ => return Err(bad("header must be cube,node,x,y,re[,im]".into())),
    };
    let mm = m * m;
    let n = cover.len() * mm;
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec[i].trim().parse::<f64>().map_err(|_| bad(format!("row {}: bad number {:?}", k + 1, &rec[i])))
        };
        let (cube, node) = (num(0)?, num(1)?);
        if k >= n || cube != (k / mm) as f64 || node != (k % mm) as f64 {
            return Err(bad(format!("row {} is not node {} of cube {} (m = {m})", k + 1, k % mm, k / mm)));
        }
        let p = fracspace_core::funcspace::node_point(cover, m, k / mm, k % mm);
        let (x, y) = (num(2)?, num(3)?);
        let tol = 1e-9 * cover.root_scale();
        if (x - p.x).abs() > tol || (y - p.y).abs() > tol {
            return Err(bad(format!("row {}: node sits at ({}, {}), not ({x}, {y})", k + 1, p.x, p.y)));
        }
        re.push(num(4)?);
        if complex {
            im.push(num(5)?);
        }
    }
    if re.len() != n {
        return Err(bad(format!("expected {n} nodes, found {}", re.len())));
    }
    GridFunction::from_values(cover, m, re, complex.then_some(im)).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracspace_core::funcspace::Builtin;
    use fracspace_core::geometry::{build_cover, DEFAULT_C_W};

    #[test]
    fn node_values_round_trip_exactly() {
        let cover = build_cover(&Domain::unit_square(), Side::Interior, DEFAULT_C_W, 5).unwrap();
        let f = GridFunction::builtin(&cover, Builtin::Holder { a: 0.7, center: Point::new(0.3, 0.3) }, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_nodes(&f, &path).unwrap();
        let g = read_nodes(&cover, 2, &path).unwrap();
        assert_eq!(g.re(), f.re());
        assert!(read_nodes(&cover, 1, &path).is_err());
    }

    #[test]
    fn domain_files() {
        let d = load_domain("disk:16").unwrap();
        let file = DomainFile::of(&d);
        let back = file.to_domain().unwrap();
        assert_eq!(back.vertices(), d.vertices());
        let bowtie = DomainFile { kind: "polygon".into(), vertices: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]] };
        assert!(bowtie.to_domain().is_err());
        assert!(load_domain("no/such/file.json").is_err());
        assert!(load_domain("disk:x").is_err());
    }
}
