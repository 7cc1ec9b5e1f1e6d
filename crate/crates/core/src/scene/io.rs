//! Point-cloud readers: CSV (`x,y,z` per line) and PLY (ASCII or binary
//! little-endian, vertex positions only).

use std::fs;
use std::path::Path;

use crate::error::SceneError;
use crate::tensor3::Vec3;

/// Loads particle positions. Files starting with the `ply` magic are read
/// as PLY, everything else as CSV.
pub fn load_particles(path: &Path) -> Result<Vec<Vec3>, SceneError> {
    let bytes = fs::read(path).map_err(|source| SceneError::Io { path: path.to_owned(), source })?;
    let points = if bytes.starts_with(b"ply") { parse_ply(&bytes)? } else { parse_csv(&bytes)? };
    if points.is_empty() {
        return Err(SceneError::Empty);
    }
    Ok(points)
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<Vec3>, SceneError> {
    let text = std::str::from_utf8(bytes).map_err(|e| SceneError::Parse { line: 0, msg: e.to_string() })?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| SceneError::Parse { line: n + 1, msg };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        }
        // Optional header row such as `x,y,z`.
        if out.is_empty() && fields.iter().all(|f| f.parse::<f64>().is_err() && f.starts_with(char::is_alphabetic)) {
            continue;
        }
        let mut p = [0.0; 3];
        for (slot, f) in p.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|_| err(format!("not a number: {f:?}")))?;
        }
        let p = Vec3::from(p);
        if !p.is_finite() {
            return Err(err("non-finite coordinate".into()));
        }
        out.push(p);
    }
    Ok(out)
}

pub fn write_csv(path: &Path, points: &[Vec3]) -> Result<(), SceneError> {
    let mut s = String::with_capacity(points.len() * 40);
    for p in points {
        s.push_str(&format!("{},{},{}\n", p.x, p.y, p.z));
    }
    fs::write(path, s).map_err(|source| SceneError::Io { path: path.to_owned(), source })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Result<Self, SceneError> {
        Ok(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            other => return Err(SceneError::Ply(format!("unknown property type {other:?}"))),
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug, PartialEq, Eq)]
enum Format {
    Ascii,
    BinaryLittleEndian,
}

fn parse_header(bytes: &[u8]) -> Result<(Format, Vec<Element>, usize), SceneError> {
    const END: &[u8] = b"end_header";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| SceneError::Ply("missing end_header".into()))?;
    let mut body = end + END.len();
    if bytes.get(body) == Some(&b'\r') {
        body += 1;
    }
    if bytes.get(body) == Some(&b'\n') {
        body += 1;
    }
    let header = std::str::from_utf8(&bytes[..end]).map_err(|e| SceneError::Ply(e.to_string()))?;

    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in header.lines() {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            ["ply"] | [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => format = Some(Format::Ascii),
            ["format", "binary_little_endian", _] => format = Some(Format::BinaryLittleEndian),
            ["format", other, _] => return Err(SceneError::Ply(format!("unsupported format {other}"))),
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| SceneError::Ply(format!("bad element count {count:?}")))?,
                props: Vec::new(),
            }),
            ["property", "list", count, item, _name] => {
                let el = elements.last_mut().ok_or_else(|| SceneError::Ply("property before element".into()))?;
                el.props.push(Property::List { count: Scalar::parse(count)?, item: Scalar::parse(item)? });
            }
            ["property", ty, name] => {
                let el = elements.last_mut().ok_or_else(|| SceneError::Ply("property before element".into()))?;
                el.props.push(Property::Scalar { name: name.to_string(), ty: Scalar::parse(ty)? });
            }
            _ => return Err(SceneError::Ply(format!("unrecognized header line {line:?}"))),
        }
    }
    let format = format.ok_or_else(|| SceneError::Ply("missing format line".into()))?;
    Ok((format, elements, body))
}

fn xyz_slots(el: &Element) -> Result<[usize; 3], SceneError> {
    let find = |axis: &str| {
        el.props
            .iter()
            .position(|p| matches!(p, Property::Scalar { name, .. } if name == axis))
            .ok_or_else(|| SceneError::Ply(format!("vertex element has no `{axis}` property")))
    };
    Ok([find("x")?, find("y")?, find("z")?])
}

pub fn parse_ply(bytes: &[u8]) -> Result<Vec<Vec3>, SceneError> {
    let (format, elements, body) = parse_header(bytes)?;
    let vertex_at = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| SceneError::Ply("no vertex element".into()))?;
    let slots = xyz_slots(&elements[vertex_at])?;
    match format {
        Format::Ascii => parse_ascii_body(&bytes[body..], &elements, vertex_at, slots),
        Format::BinaryLittleEndian => parse_binary_body(&bytes[body..], &elements, vertex_at, slots),
    }
}

fn parse_ascii_body(body: &[u8], elements: &[Element], vertex_at: usize, slots: [usize; 3]) -> Result<Vec<Vec3>, SceneError> {
    let text = std::str::from_utf8(body).map_err(|e| SceneError::Ply(e.to_string()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    for el in &elements[..vertex_at] {
        for _ in 0..el.count {
            lines.next().ok_or_else(|| SceneError::Ply(format!("truncated `{}` element", el.name)))?;
        }
    }
    let el = &elements[vertex_at];
    let mut out = Vec::with_capacity(el.count);
    for i in 0..el.count {
        let line = lines.next().ok_or_else(|| SceneError::Ply(format!("truncated at vertex {i}")))?;
        // Lists in the vertex element shift the token positions.
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let mut values = Vec::with_capacity(el.props.len());
        let mut t = 0;
        for prop in &el.props {
            match prop {
                Property::Scalar { .. } => {
                    let tok = tokens.get(t).ok_or_else(|| SceneError::Ply(format!("short vertex line {i}")))?;
                    values.push(tok.parse::<f64>().map_err(|_| SceneError::Ply(format!("vertex {i}: bad number {tok:?}")))?);
                    t += 1;
                }
                Property::List { .. } => {
                    let n: usize = tokens
                        .get(t)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| SceneError::Ply(format!("vertex {i}: bad list count")))?;
                    values.push(f64::NAN);
                    t += 1 + n;
                }
            }
        }
        out.push(Vec3::new(values[slots[0]], values[slots[1]], values[slots[2]]));
    }
    check_finite(out)
}

fn parse_binary_body(body: &[u8], elements: &[Element], vertex_at: usize, slots: [usize; 3]) -> Result<Vec<Vec3>, SceneError> {
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8], SceneError> {
        let s = body.get(*pos..*pos + n).ok_or_else(|| SceneError::Ply("truncated binary body".into()))?;
        *pos += n;
        Ok(s)
    };
    let mut out = Vec::new();
    for (e, el) in elements.iter().enumerate().take(vertex_at + 1) {
        let is_vertex = e == vertex_at;
        if is_vertex {
            out.reserve(el.count);
        }
        let mut values = vec![0.0; el.props.len()];
        for _ in 0..el.count {
            for (k, prop) in el.props.iter().enumerate() {
                match *prop {
                    Property::Scalar { ty, .. } => values[k] = ty.read_le(take(&mut pos, ty.size())?),
                    Property::List { count, item } => {
                        let n = count.read_le(take(&mut pos, count.size())?) as usize;
                        take(&mut pos, n * item.size())?;
                    }
                }
            }
            if is_vertex {
                out.push(Vec3::new(values[slots[0]], values[slots[1]], values[slots[2]]));
            }
        }
    }
    check_finite(out)
}

fn check_finite(points: Vec<Vec3>) -> Result<Vec<Vec3>, SceneError> {
    match points.iter().position(|p| !p.is_finite()) {
        Some(i) => Err(SceneError::Ply(format!("vertex {i} has a non-finite coordinate"))),
        None => Ok(points),
    }
}

/// Binary little-endian PLY with float `x y z` only.
pub fn write_ply(path: &Path, points: &[Vec3]) -> Result<(), SceneError> {
    let mut buf = format!(
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        points.len()
    )
    .into_bytes();
    for p in points {
        for c in p.to_array() {
            buf.extend_from_slice(&(c as f32).to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|source| SceneError::Io { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_three_lines() {
        let pts = parse_csv(b"0,0,0\n1, 2, 3\n# comment\n\n-1.5,2e-3,4\n").unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[2], Vec3::new(-1.5, 2e-3, 4.0));
    }

    #[test]
    fn csv_header_row_is_skipped() {
        assert_eq!(parse_csv(b"x,y,z\n1,2,3\n").unwrap(), vec![Vec3::new(1.0, 2.0, 3.0)]);
        assert!(parse_csv(b"1,2,3\nx,y,z\n").is_err());
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        match parse_csv(b"0,0,0\n1,2\n") {
            Err(SceneError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_csv(b"0,0,0\n\n1,x,3\n") {
            Err(SceneError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.csv");
        std::fs::write(&p, "").unwrap();
        assert!(matches!(load_particles(&p), Err(SceneError::Empty)));
        assert!(matches!(load_particles(&dir.path().join("missing.csv")), Err(SceneError::Io { .. })));
    }

    #[test]
    fn ascii_ply_with_faces_and_extras() {
        let ply = b"ply\nformat ascii 1.0\ncomment test\nelement vertex 2\nproperty float x\nproperty uchar red\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n1 255 2 3\n4 0 5 6\n3 0 1 1\n";
        let pts = parse_ply(ply).unwrap();
        assert_eq!(pts, vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.0)]);
    }

    #[test]
    fn binary_ply_skips_leading_list_element() {
        let mut b = b"ply\nformat binary_little_endian 1.0\nelement meta 1\nproperty list uchar ushort ids\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nend_header\n".to_vec();
        b.push(2);
        b.extend_from_slice(&7u16.to_le_bytes());
        b.extend_from_slice(&9u16.to_le_bytes());
        for v in [0.5f64, -1.0, 2.0] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(parse_ply(&b).unwrap(), vec![Vec3::new(0.5, -1.0, 2.0)]);
    }

    #[test]
    fn ply_rejects_big_endian_and_truncation() {
        assert!(parse_ply(b"ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n").is_err());
        let b = b"ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n\0\0\0\0";
        assert!(parse_ply(b).is_err());
    }
}
