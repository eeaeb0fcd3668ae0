//! Mesh file I/O: OBJ (v/f records), ASCII/binary STL, ASCII PLY.
//!
//! All formats are unit-less on disk and interpreted as meters. STL soups are
//! welded on exact coordinate bit patterns so adjacency can be derived.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{MeshError, Point, TriangleMesh};

/// Supported input formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Stl,
    Ply,
}

impl MeshFormat {
    /// Guesses the format from a path extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(Self::Obj),
            "stl" => Some(Self::Stl),
            "ply" => Some(Self::Ply),
            _ => None,
        }
    }
}

/// Loads and validates a mesh file.
pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriangleMesh, MeshError> {
    let bytes = fs::read(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let parse_err = |message: String| MeshError::Parse {
        path: path.display().to_string(),
        message,
    };
    let (vertices, faces) = match format {
        MeshFormat::Obj => {
            let text = String::from_utf8_lossy(&bytes);
            parse_obj(&text).map_err(parse_err)?
        }
        MeshFormat::Stl => parse_stl(&bytes).map_err(parse_err)?,
        MeshFormat::Ply => {
            let text = String::from_utf8_lossy(&bytes);
            parse_ply(&text).map_err(parse_err)?
        }
    };
    let mesh = TriangleMesh::build(vertices, faces)?;
    if !mesh.warnings().is_clean() {
        log::warn!(
            "{}: removed {} degenerate faces, {} non-manifold edges",
            path.display(),
            mesh.warnings().degenerate_faces_removed,
            mesh.warnings().non_manifold_edges
        );
    }
    Ok(mesh)
}

fn parse_obj(text: &str) -> Result<(Vec<Point>, Vec<[u32; 3]>), String> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut coords = [0.0; 3];
                for c in &mut coords {
                    *c = it
                        .next()
                        .ok_or_else(|| format!("line {}: vertex with <3 coordinates", ln + 1))?
                        .parse::<f64>()
                        .map_err(|e| format!("line {}: {}", ln + 1, e))?;
                }
                vertices.push(Point::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in it {
                    // "i", "i/t", "i/t/n", "i//n" all start with the vertex index.
                    let first = tok.split('/').next().unwrap_or("");
                    let raw: i64 = first
                        .parse()
                        .map_err(|e| format!("line {}: face index {:?}: {}", ln + 1, tok, e))?;
                    let resolved = if raw > 0 {
                        raw - 1
                    } else if raw < 0 {
                        vertices.len() as i64 + raw
                    } else {
                        return Err(format!("line {}: face index 0", ln + 1));
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(format!("line {}: face index {} out of range", ln + 1, raw));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(format!("line {}: face with <3 vertices", ln + 1));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

fn parse_stl(bytes: &[u8]) -> Result<(Vec<Point>, Vec<[u32; 3]>), String> {
    let looks_ascii = bytes.len() >= 6
        && bytes.starts_with(b"solid")
        && std::str::from_utf8(&bytes[..bytes.len().min(512)])
            .map(|s| s.contains("facet"))
            .unwrap_or(false);
    let triangles = if looks_ascii {
        parse_stl_ascii(&String::from_utf8_lossy(bytes))?
    } else {
        parse_stl_binary(bytes)?
    };
    Ok(weld(triangles))
}

fn parse_stl_ascii(text: &str) -> Result<Vec<[Point; 3]>, String> {
    let mut triangles = Vec::new();
    let mut current: Vec<Point> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("vertex") => {
                let mut coords = [0.0; 3];
                for c in &mut coords {
                    *c = it
                        .next()
                        .ok_or_else(|| format!("line {}: vertex with <3 coordinates", ln + 1))?
                        .parse::<f64>()
                        .map_err(|e| format!("line {}: {}", ln + 1, e))?;
                }
                current.push(Point::new(coords[0], coords[1], coords[2]));
            }
            Some("endfacet") => {
                if current.len() != 3 {
                    return Err(format!("line {}: facet with {} vertices", ln + 1, current.len()));
                }
                triangles.push([current[0], current[1], current[2]]);
                current.clear();
            }
            _ => {}
        }
    }
    Ok(triangles)
}

fn parse_stl_binary(bytes: &[u8]) -> Result<Vec<[Point; 3]>, String> {
    if bytes.len() < 84 {
        return Err("binary STL shorter than 84-byte header".into());
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let expected = 84 + count * 50;
    if bytes.len() < expected {
        return Err(format!(
            "binary STL truncated: {} triangles need {} bytes, found {}",
            count,
            expected,
            bytes.len()
        ));
    }
    let f32_at = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as f64;
    let mut triangles = Vec::with_capacity(count);
    for i in 0..count {
        let rec = 84 + i * 50;
        let mut tri = [Point::origin(); 3];
        for (v, p) in tri.iter_mut().enumerate() {
            let off = rec + 12 + v * 12; // skip the 12-byte facet normal
            *p = Point::new(f32_at(off), f32_at(off + 4), f32_at(off + 8));
        }
        triangles.push(tri);
    }
    Ok(triangles)
}

/// Welds a triangle soup on exact coordinate bit patterns.
fn weld(triangles: Vec<[Point; 3]>) -> (Vec<Point>, Vec<[u32; 3]>) {
    let mut index: HashMap<[u64; 3], u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::with_capacity(triangles.len());
    for tri in triangles {
        let mut f = [0u32; 3];
        for (k, p) in tri.iter().enumerate() {
            let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
            f[k] = *index.entry(key).or_insert_with(|| {
                vertices.push(*p);
                vertices.len() as u32 - 1
            });
        }
        faces.push(f);
    }
    (vertices, faces)
}

fn parse_ply(text: &str) -> Result<(Vec<Point>, Vec<[u32; 3]>), String> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err("missing ply magic".into());
    }

    #[derive(PartialEq)]
    enum Section {
        Vertex(usize),
        Face(usize),
        Other(usize),
    }
    let mut sections: Vec<Section> = Vec::new();
    let mut xyz_cols = [usize::MAX; 3];
    let mut vertex_props = 0usize;
    let mut in_vertex_element = false;
    for line in lines.by_ref() {
        let line = line.trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("format") => {
                if it.next() != Some("ascii") {
                    return Err("only ascii PLY is supported".into());
                }
            }
            Some("element") => {
                let name = it.next().ok_or("element without name")?;
                let count: usize = it
                    .next()
                    .ok_or("element without count")?
                    .parse()
                    .map_err(|e| format!("element count: {}", e))?;
                in_vertex_element = name == "vertex";
                sections.push(match name {
                    "vertex" => Section::Vertex(count),
                    "face" => Section::Face(count),
                    _ => Section::Other(count),
                });
            }
            Some("property") => {
                if in_vertex_element {
                    let mut toks: Vec<&str> = it.collect();
                    if let Some(name) = toks.pop() {
                        match name {
                            "x" => xyz_cols[0] = vertex_props,
                            "y" => xyz_cols[1] = vertex_props,
                            "z" => xyz_cols[2] = vertex_props,
                            _ => {}
                        }
                    }
                    vertex_props += 1;
                }
            }
            Some("end_header") => break,
            _ => {}
        }
    }
    if xyz_cols.contains(&usize::MAX) {
        return Err("vertex element lacks x/y/z properties".into());
    }

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for section in &sections {
        match section {
            Section::Vertex(count) => {
                for _ in 0..*count {
                    let line = lines.next().ok_or("truncated vertex data")?;
                    let cols: Vec<&str> = line.split_whitespace().collect();
                    let mut p = [0.0; 3];
                    for k in 0..3 {
                        p[k] = cols
                            .get(xyz_cols[k])
                            .ok_or("vertex line too short")?
                            .parse::<f64>()
                            .map_err(|e| format!("vertex coordinate: {}", e))?;
                    }
                    vertices.push(Point::new(p[0], p[1], p[2]));
                }
            }
            Section::Face(count) => {
                for _ in 0..*count {
                    let line = lines.next().ok_or("truncated face data")?;
                    let cols: Vec<&str> = line.split_whitespace().collect();
                    let n: usize = cols
                        .first()
                        .ok_or("empty face line")?
                        .parse()
                        .map_err(|e| format!("face count: {}", e))?;
                    if cols.len() < n + 1 || n < 3 {
                        return Err("malformed face line".into());
                    }
                    let mut idx = Vec::with_capacity(n);
                    for c in &cols[1..=n] {
                        let v: usize = c.parse().map_err(|e| format!("face index: {}", e))?;
                        if v >= vertices.len() {
                            return Err(format!("face index {} out of range", v));
                        }
                        idx.push(v as u32);
                    }
                    for k in 1..n - 1 {
                        faces.push([idx[0], idx[k], idx[k + 1]]);
                    }
                }
            }
            Section::Other(count) => {
                for _ in 0..*count {
                    lines.next().ok_or("truncated element data")?;
                }
            }
        }
    }
    Ok((vertices, faces))
}

/// Writes an ASCII PLY with one RGB color per face.
pub fn write_face_colored_ply(
    path: &Path,
    mesh: &TriangleMesh,
    face_colors: &[[u8; 3]],
) -> std::io::Result<()> {
    assert_eq!(face_colors.len(), mesh.face_count());
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    out.push_str(&format!("element vertex {}\n", mesh.vertex_count()));
    out.push_str("property float x\nproperty float y\nproperty float z\n");
    out.push_str(&format!("element face {}\n", mesh.face_count()));
    out.push_str("property list uchar int vertex_indices\n");
    out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    out.push_str("end_header\n");
    for v in mesh.vertices() {
        out.push_str(&format!("{} {} {}\n", v.x as f32, v.y as f32, v.z as f32));
    }
    for (f, c) in mesh.faces().iter().zip(face_colors) {
        out.push_str(&format!("3 {} {} {} {} {} {}\n", f[0], f[1], f[2], c[0], c[1], c[2]));
    }
    fs::File::create(path)?.write_all(out.as_bytes())
}

/// Writes a polyline as OBJ line segments for visualization.
pub fn write_polyline_obj(path: &Path, polyline: &[Point]) -> std::io::Result<()> {
    let mut out = String::new();
    for p in polyline {
        out.push_str(&format!("v {} {} {}\n", p.x, p.y, p.z));
    }
    for i in 1..polyline.len() {
        out.push_str(&format!("l {} {}\n", i, i + 1));
    }
    fs::File::create(path)?.write_all(out.as_bytes())
}
