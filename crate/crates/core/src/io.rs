//! File formats: catalog ingestion, realization certificates, and mesh
//! export (OFF / OBJ) with optional vertex-link highlighting.
//!
//! All coordinates are integers end to end; no floating point appears in
//! any file this module reads or writes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::geom::GridPoint;
use crate::surface::{coherent_orientation, validate_closed_surface, vertex_link, Triangulation};

/// A named triangulation from a catalog file.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub triangulation: Triangulation,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: duplicate name {name:?}")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}: facet {index} has {arity} labels, expected 3")]
    FacetArity { line: usize, index: usize, arity: usize },
    #[error("line {line}: entry {name:?} is invalid: {source}")]
    InvalidTriangulation {
        line: usize,
        name: String,
        #[source]
        source: crate::surface::TriangulationError,
    },
    #[error("line {line}: entry {name:?} is not a closed surface")]
    NotAClosedSurface { line: usize, name: String },
}

/// Parse the line-based catalog grammar `NAME=[[a,b,c],[d,e,f],...]`.
///
/// `#` as the first non-blank character starts a comment line; whitespace is
/// tolerated anywhere between tokens. Labels are 1-based; the vertex count
/// of each entry is its largest label. With `validate` set, every entry must
/// additionally pass the closed-surface check.
pub fn parse_catalog(text: &str, validate: bool) -> Result<Vec<CatalogEntry>, CatalogError> {
    let mut entries = Vec::new();
    let mut names = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let eq = raw.find('=').ok_or_else(|| CatalogError::Parse {
            line,
            column: raw.len() + 1,
            message: "expected NAME=[[...]]".into(),
        })?;
        let name = raw[..eq].trim().to_string();
        if name.is_empty() {
            return Err(CatalogError::Parse {
                line,
                column: 1,
                message: "empty name".into(),
            });
        }
        if !names.insert(name.clone()) {
            return Err(CatalogError::DuplicateName { line, name });
        }
        let facets = parse_facet_list(&raw[eq + 1..], line, eq + 1)?;
        let vertex_count = facets.iter().flatten().copied().max().unwrap_or(0);
        let triangulation = Triangulation::new(&name, vertex_count, facets).map_err(|source| {
            CatalogError::InvalidTriangulation {
                line,
                name: name.clone(),
                source,
            }
        })?;
        if validate {
            let report = validate_closed_surface(&triangulation);
            if !report.is_closed_surface {
                return Err(CatalogError::NotAClosedSurface { line, name });
            }
        }
        entries.push(CatalogEntry { name, triangulation });
    }
    Ok(entries)
}

fn parse_facet_list(text: &str, line: usize, offset: usize) -> Result<Vec<[usize; 3]>, CatalogError> {
    let err = |column: usize, message: &str| CatalogError::Parse {
        line,
        column: offset + column + 1,
        message: message.into(),
    };
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    skip_ws(&mut pos);
    if pos >= bytes.len() || bytes[pos] != b'[' {
        return Err(err(pos, "expected '['"));
    }
    pos += 1;
    let mut facets = Vec::new();
    loop {
        skip_ws(&mut pos);
        if pos < bytes.len() && bytes[pos] == b']' {
            pos += 1;
            break;
        }
        if pos >= bytes.len() || bytes[pos] != b'[' {
            return Err(err(pos, "expected '[' opening a facet"));
        }
        pos += 1;
        let mut facet = Vec::new();
        loop {
            skip_ws(&mut pos);
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if pos == start {
                return Err(err(pos, "expected a label"));
            }
            let label: usize = text[start..pos].parse().map_err(|_| err(start, "bad integer"))?;
            facet.push(label);
            skip_ws(&mut pos);
            match bytes.get(pos) {
                Some(b',') => pos += 1,
                Some(b']') => {
                    pos += 1;
                    break;
                }
                _ => return Err(err(pos, "expected ',' or ']'")),
            }
        }
        if facet.len() != 3 {
            return Err(CatalogError::FacetArity {
                line,
                index: facets.len(),
                arity: facet.len(),
            });
        }
        facets.push([facet[0], facet[1], facet[2]]);
        skip_ws(&mut pos);
        match bytes.get(pos) {
            Some(b',') => pos += 1,
            Some(b']') => {
                pos += 1;
                break;
            }
            _ => return Err(err(pos, "expected ',' or ']'")),
        }
    }
    skip_ws(&mut pos);
    if pos != bytes.len() {
        return Err(err(pos, "trailing characters after facet list"));
    }
    Ok(facets)
}

/// Serialize entries back to the catalog grammar (inverse of
/// [`parse_catalog`] on its output).
pub fn serialize_catalog(entries: &[CatalogEntry]) -> String {
    let mut out = String::new();
    for entry in entries {
        let facets: Vec<String> = entry
            .triangulation
            .facets()
            .iter()
            .map(|f| format!("[{},{},{}]", f[0], f[1], f[2]))
            .collect();
        let _ = writeln!(out, "{}=[{}]", entry.name, facets.join(","));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Search,
    Anneal,
    External,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::Search => "search",
            Provenance::Anneal => "anneal",
            Provenance::External => "external",
        })
    }
}

/// A realization certificate: a named surface, the grid extent, and a total
/// placement, with provenance for reproducibility audits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub surface: String,
    pub extent: i32,
    pub provenance: Provenance,
    pub seed: Option<u64>,
    pub shard: Option<String>,
    pub placement: BTreeMap<usize, GridPoint>,
}

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate vertex {label}")]
    DuplicateVertex { line: usize, label: usize },
    #[error("line {line}: coordinate of vertex {label} outside 0..{extent}")]
    CoordinateOutOfRange { line: usize, label: usize, extent: i32 },
    #[error("missing header field {0:?}")]
    MissingHeader(&'static str),
}

/// Render a certificate in its canonical text form: `surface:`, `extent:`,
/// `provenance:` (plus optional `seed:` / `shard:`), then one `v x y z` line
/// per vertex, sorted by label.
pub fn write_certificate(cert: &Certificate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "surface: {}", cert.surface);
    let _ = writeln!(out, "extent: {}", cert.extent);
    let _ = writeln!(out, "provenance: {}", cert.provenance);
    if let Some(seed) = cert.seed {
        let _ = writeln!(out, "seed: {seed}");
    }
    if let Some(shard) = &cert.shard {
        let _ = writeln!(out, "shard: {shard}");
    }
    for (&label, point) in &cert.placement {
        let _ = writeln!(out, "{} {} {} {}", label, point.x, point.y, point.z);
    }
    out
}

/// Parse the text form produced by [`write_certificate`].
pub fn read_certificate(text: &str) -> Result<Certificate, CertificateError> {
    let mut surface = None;
    let mut extent: Option<i32> = None;
    let mut provenance = None;
    let mut seed = None;
    let mut shard = None;
    let mut placement: BTreeMap<usize, GridPoint> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("surface:") {
            surface = Some(rest.trim().to_string());
        } else if let Some(rest) = trimmed.strip_prefix("extent:") {
            extent = Some(rest.trim().parse().map_err(|_| CertificateError::Parse {
                line,
                message: "bad extent".into(),
            })?);
        } else if let Some(rest) = trimmed.strip_prefix("provenance:") {
            provenance = Some(match rest.trim() {
                "search" => Provenance::Search,
                "anneal" => Provenance::Anneal,
                "external" => Provenance::External,
                other => {
                    return Err(CertificateError::Parse {
                        line,
                        message: format!("unknown provenance {other:?}"),
                    })
                }
            });
        } else if let Some(rest) = trimmed.strip_prefix("seed:") {
            seed = Some(rest.trim().parse().map_err(|_| CertificateError::Parse {
                line,
                message: "bad seed".into(),
            })?);
        } else if let Some(rest) = trimmed.strip_prefix("shard:") {
            shard = Some(rest.trim().to_string());
        } else {
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(CertificateError::Parse {
                    line,
                    message: format!("expected 'v x y z', got {trimmed:?}"),
                });
            }
            let nums: Result<Vec<i64>, _> = fields.iter().map(|s| s.parse::<i64>()).collect();
            let nums = nums.map_err(|_| CertificateError::Parse {
                line,
                message: "bad integer in vertex line".into(),
            })?;
            let label = nums[0] as usize;
            if nums[0] <= 0 {
                return Err(CertificateError::Parse {
                    line,
                    message: "vertex label must be positive".into(),
                });
            }
            if placement.contains_key(&label) {
                return Err(CertificateError::DuplicateVertex { line, label });
            }
            let ext = extent.ok_or(CertificateError::MissingHeader("extent"))?;
            let point = GridPoint::new(nums[1] as i32, nums[2] as i32, nums[3] as i32);
            if !point.in_grid(ext) {
                return Err(CertificateError::CoordinateOutOfRange {
                    line,
                    label,
                    extent: ext,
                });
            }
            placement.insert(label, point);
        }
    }
    Ok(Certificate {
        surface: surface.ok_or(CertificateError::MissingHeader("surface"))?,
        extent: extent.ok_or(CertificateError::MissingHeader("extent"))?,
        provenance: provenance.ok_or(CertificateError::MissingHeader("provenance"))?,
        seed,
        shard,
        placement,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("certificate places {placed} vertices but surface has {expected}")]
    PlacementMismatch { placed: usize, expected: usize },
    #[error("surface is not orientable; cannot emit coherent facet orientation")]
    NotOrientable,
    #[error("highlight vertex {0} outside 1..={1}")]
    HighlightOutOfRange(usize, usize),
}

/// Export a certificate as a mesh with coherently oriented facets.
///
/// With `highlight` set, the facets incident to that vertex are emitted as a
/// separate group and its link cycle as a polyline (`l` element in OBJ, a
/// comment block in OFF, which has no polyline construct).
pub fn export_mesh(
    cert: &Certificate,
    tri: &Triangulation,
    format: MeshFormat,
    highlight: Option<usize>,
) -> Result<String, ExportError> {
    let n = tri.vertex_count();
    if cert.placement.len() != n || cert.placement.keys().any(|&l| l == 0 || l > n) {
        return Err(ExportError::PlacementMismatch {
            placed: cert.placement.len(),
            expected: n,
        });
    }
    if let Some(v) = highlight {
        if v == 0 || v > n {
            return Err(ExportError::HighlightOutOfRange(v, n));
        }
    }
    let oriented = coherent_orientation(tri).ok_or(ExportError::NotOrientable)?;
    let point = |label: usize| cert.placement[&label];

    let (plain, marked): (Vec<[usize; 3]>, Vec<[usize; 3]>) = oriented
        .iter()
        .partition(|f| highlight.map_or(true, |v| !f.contains(&v)));
    let link = match highlight {
        Some(v) => Some(vertex_link(tri, v).expect("validated surface has cycle links")),
        None => None,
    };

    let mut out = String::new();
    match format {
        MeshFormat::Off => {
            let e = tri.edges().len();
            let _ = writeln!(out, "OFF");
            let _ = writeln!(out, "{} {} {}", n, oriented.len(), e);
            for label in 1..=n {
                let p = point(label);
                let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
            }
            for f in &plain {
                let _ = writeln!(out, "3 {} {} {}", f[0] - 1, f[1] - 1, f[2] - 1);
            }
            if let Some(v) = highlight {
                let _ = writeln!(out, "# facets incident to vertex {v}");
                for f in &marked {
                    let _ = writeln!(out, "3 {} {} {}", f[0] - 1, f[1] - 1, f[2] - 1);
                }
                let cycle: Vec<String> =
                    link.as_ref().unwrap().iter().map(|w| (w - 1).to_string()).collect();
                let _ = writeln!(out, "# link of vertex {v} (0-based cycle): {}", cycle.join(" "));
            }
        }
        MeshFormat::Obj => {
            let _ = writeln!(out, "o {}", cert.surface);
            for label in 1..=n {
                let p = point(label);
                let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
            }
            if highlight.is_some() {
                let _ = writeln!(out, "g surface");
            }
            for f in &plain {
                let _ = writeln!(out, "f {} {} {}", f[0], f[1], f[2]);
            }
            if let Some(v) = highlight {
                let _ = writeln!(out, "g star_of_vertex_{v}");
                for f in &marked {
                    let _ = writeln!(out, "f {} {} {}", f[0], f[1], f[2]);
                }
                let _ = writeln!(out, "g link_of_vertex_{v}");
                let mut cycle: Vec<String> =
                    link.as_ref().unwrap().iter().map(|w| w.to_string()).collect();
                cycle.push(cycle[0].clone()); // close the loop
                let _ = writeln!(out, "l {}", cycle.join(" "));
            }
        }
    }
    Ok(out)
}
