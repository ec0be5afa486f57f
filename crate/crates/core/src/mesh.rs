//! Triangle meshes: construction, derived measures, ASCII PLY/OBJ I/O.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

/// Triangle mesh in object coordinates (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<S> {
    pub vertices: Vec<Vec3<S>>,
    pub triangles: Vec<[usize; 3]>,
    /// Max pairwise vertex distance.
    pub diameter: S,
    /// Axis-aligned bounding-box extents.
    pub bbox_extents: Vec3<S>,
}

impl<S: Real> Mesh<S> {
    pub fn new(vertices: Vec<Vec3<S>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyMesh);
        }
        for t in &triangles {
            for &i in t {
                if i >= vertices.len() {
                    return Err(Error::Validation {
                        what: format!("triangle index {i} out of range ({})", vertices.len()),
                    });
                }
            }
        }
        let diameter = max_pairwise_distance(&vertices);
        let bbox_extents = bbox_extents(&vertices);
        Ok(Self {
            vertices,
            triangles,
            diameter,
            bbox_extents,
        })
    }

    pub fn mean_bbox_extent(&self) -> S {
        (self.bbox_extents.x + self.bbox_extents.y + self.bbox_extents.z) / S::c(3.0)
    }

    pub fn save_ply(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str("ply\nformat ascii 1.0\n");
        out.push_str(&format!("element vertex {}\n", self.vertices.len()));
        out.push_str("property double x\nproperty double y\nproperty double z\n");
        out.push_str(&format!("element face {}\n", self.triangles.len()));
        out.push_str("property list uchar int vertex_indices\nend_header\n");
        for v in &self.vertices {
            out.push_str(&format!(
                "{:?} {:?} {:?}\n",
                v.x.to_f64c(),
                v.y.to_f64c(),
                v.z.to_f64c()
            ));
        }
        for t in &self.triangles {
            out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        f.write_all(out.as_bytes())
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        match ext.as_str() {
            "ply" => Self::load_ply(path),
            "obj" => Self::load_obj(path),
            other => Err(Error::MalformedFile {
                path: path.display().to_string(),
                what: format!("unsupported mesh extension '{other}'"),
            }),
        }
    }

    pub fn load_ply(path: &Path) -> Result<Self> {
        let p = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| Error::io(&p, e))?;
        let mut lines = BufReader::new(file).lines();
        let malformed = |what: &str| Error::MalformedFile {
            path: p.clone(),
            what: what.to_string(),
        };

        let magic = lines
            .next()
            .ok_or_else(|| malformed("empty file"))?
            .map_err(|e| Error::io(&p, e))?;
        if magic.trim() != "ply" {
            return Err(malformed("missing 'ply' magic"));
        }
        let mut n_vertices = 0usize;
        let mut n_faces = 0usize;
        let mut saw_ascii = false;
        loop {
            let line = lines
                .next()
                .ok_or_else(|| malformed("truncated header"))?
                .map_err(|e| Error::io(&p, e))?;
            let line = line.trim().to_string();
            if line == "end_header" {
                break;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.as_slice() {
                ["format", "ascii", _] => saw_ascii = true,
                ["format", ..] => return Err(malformed("only ASCII PLY is supported")),
                ["element", "vertex", n] => {
                    n_vertices = n.parse().map_err(|_| malformed("bad vertex count"))?
                }
                ["element", "face", n] => {
                    n_faces = n.parse().map_err(|_| malformed("bad face count"))?
                }
                _ => {}
            }
        }
        if !saw_ascii {
            return Err(malformed("missing ASCII format declaration"));
        }
        let mut vertices = Vec::with_capacity(n_vertices);
        for _ in 0..n_vertices {
            let line = lines
                .next()
                .ok_or_else(|| malformed("truncated vertex data"))?
                .map_err(|e| Error::io(&p, e))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .take(3)
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| malformed("bad vertex value"))?;
            if v.len() != 3 {
                return Err(malformed("vertex line with fewer than 3 values"));
            }
            vertices.push(Vec3::new(S::c(v[0]), S::c(v[1]), S::c(v[2])));
        }
        let mut triangles = Vec::with_capacity(n_faces);
        for _ in 0..n_faces {
            let line = lines
                .next()
                .ok_or_else(|| malformed("truncated face data"))?
                .map_err(|e| Error::io(&p, e))?;
            let idx: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| malformed("bad face index"))?;
            if idx.first() != Some(&3) || idx.len() != 4 {
                return Err(malformed("only triangle faces are supported"));
            }
            triangles.push([idx[1], idx[2], idx[3]]);
        }
        Self::new(vertices, triangles)
    }

    pub fn load_obj(path: &Path) -> Result<Self> {
        let p = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| Error::io(&p, e))?;
        let malformed = |what: String| Error::MalformedFile {
            path: p.clone(),
            what,
        };
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(&p, e))?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.as_slice() {
                ["v", rest @ ..] if rest.len() >= 3 => {
                    let v: Vec<f64> = rest[..3]
                        .iter()
                        .map(|t| t.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| malformed(format!("bad vertex line: {line}")))?;
                    vertices.push(Vec3::new(S::c(v[0]), S::c(v[1]), S::c(v[2])));
                }
                ["f", rest @ ..] => {
                    if rest.len() != 3 {
                        return Err(malformed(format!(
                            "only triangle faces are supported: {line}"
                        )));
                    }
                    let mut tri = [0usize; 3];
                    for (k, tok) in rest.iter().enumerate() {
                        // "i", "i/j", "i/j/k" forms; indices are 1-based.
                        let first = tok.split('/').next().unwrap_or("");
                        let i: isize = first
                            .parse()
                            .map_err(|_| malformed(format!("bad face index: {line}")))?;
                        if i < 1 {
                            return Err(malformed(format!("non-positive face index: {line}")));
                        }
                        tri[k] = (i - 1) as usize;
                    }
                    triangles.push(tri);
                }
                _ => {}
            }
        }
        Self::new(vertices, triangles)
    }
}

fn max_pairwise_distance<S: Real>(vertices: &[Vec3<S>]) -> S {
    let mut best = S::zero();
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            let d = vertices[i].sub(vertices[j]).norm();
            if d > best {
                best = d;
            }
        }
    }
    best
}

fn bbox_extents<S: Real>(vertices: &[Vec3<S>]) -> Vec3<S> {
    let mut min = vertices[0];
    let mut max = vertices[0];
    for v in vertices {
        min = Vec3::new(min.x.min(v.x), min.y.min(v.y), min.z.min(v.z));
        max = Vec3::new(max.x.max(v.x), max.y.max(v.y), max.z.max(v.z));
    }
    max.sub(min)
}
