//! Flat-file input and output.
//!
//! Segments load from CSV rows `x1,y1,x2,y2[,w]` (optional header, UTF-8,
//! `.` decimal separator) or from JSON `{"segments": [{"a": [x, y],
//! "b": [x, y], "w": 1.0}, ...]}`. Polylines load from a JSON array of
//! vertex arrays. Degenerate geometry and nonpositive weights are rejected
//! with the offending line or index.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use serde_json::json;

use crate::coreset::Coreset;
use crate::error::{Error, Result};
use crate::geometry::{Point, Segment};
use crate::objective::{Weighted, WeightedPolyline, WeightedSegment};
use crate::pipeline::PipelineResult;
use crate::polyline::Polyline;
use crate::space::ShapeSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Json,
}

impl InputFormat {
    /// Picks the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => InputFormat::Json,
            _ => InputFormat::Csv,
        }
    }
}

pub fn load_segments(path: &Path, format: InputFormat) -> Result<Vec<WeightedSegment>> {
    let text = std::fs::read_to_string(path)?;
    match format {
        InputFormat::Csv => parse_segments_csv(&text),
        InputFormat::Json => parse_segments_json(&text),
    }
}

pub fn parse_segments_csv(text: &str) -> Result<Vec<WeightedSegment>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if out.is_empty() && fields.iter().any(|f| f.parse::<f64>().is_err()) && idx == 0 {
            // Header row.
            continue;
        }
        if fields.len() != 4 && fields.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected x1,y1,x2,y2[,w], got {} fields", fields.len()),
            });
        }
        let mut nums = [0.0f64; 5];
        nums[4] = 1.0;
        for (i, f) in fields.iter().enumerate() {
            nums[i] = f.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad number {f:?}"),
            })?;
        }
        let seg = Segment::new(Point::new(nums[0], nums[1]), Point::new(nums[2], nums[3]))
            .map_err(|e| Error::invalid(format!("line {line_no}: {e}")))?;
        let w = Weighted::new(seg, nums[4])
            .map_err(|e| Error::invalid(format!("line {line_no}: {e}")))?;
        out.push(w);
    }
    if out.is_empty() {
        return Err(Error::invalid("no segments in input"));
    }
    Ok(out)
}

pub fn segments_to_csv(items: &[WeightedSegment]) -> String {
    let mut out = String::from("x1,y1,x2,y2,w\n");
    for it in items {
        let s = &it.item;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.a.x, s.a.y, s.b.x, s.b.y, it.weight
        );
    }
    out
}

#[derive(Deserialize)]
struct SegmentsFile {
    segments: Vec<SegmentRecord>,
}

#[derive(Deserialize)]
struct SegmentRecord {
    a: [f64; 2],
    b: [f64; 2],
    #[serde(default)]
    w: Option<f64>,
}

pub fn parse_segments_json(text: &str) -> Result<Vec<WeightedSegment>> {
    let file: SegmentsFile = serde_json::from_str(text)?;
    let mut out = Vec::with_capacity(file.segments.len());
    for (i, rec) in file.segments.iter().enumerate() {
        let seg = Segment::new(
            Point::new(rec.a[0], rec.a[1]),
            Point::new(rec.b[0], rec.b[1]),
        )
        .map_err(|e| Error::invalid(format!("segment {i}: {e}")))?;
        out.push(
            Weighted::new(seg, rec.w.unwrap_or(1.0))
                .map_err(|e| Error::invalid(format!("segment {i}: {e}")))?,
        );
    }
    if out.is_empty() {
        return Err(Error::invalid("no segments in input"));
    }
    Ok(out)
}

pub fn segments_to_json(items: &[WeightedSegment]) -> serde_json::Value {
    json!({
        "segments": items
            .iter()
            .map(|it| json!({
                "a": [it.item.a.x, it.item.a.y],
                "b": [it.item.b.x, it.item.b.y],
                "w": it.weight,
            }))
            .collect::<Vec<_>>()
    })
}

/// Loads polylines from a JSON array of vertex arrays, e.g.
/// `[[[0,0],[1,0],[1,1]], [[2,0],[3,1]]]`. All weights are 1.
pub fn load_polylines(path: &Path) -> Result<Vec<WeightedPolyline>> {
    let text = std::fs::read_to_string(path)?;
    parse_polylines_json(&text)
}

pub fn parse_polylines_json(text: &str) -> Result<Vec<WeightedPolyline>> {
    let raw: Vec<Vec<[f64; 2]>> = serde_json::from_str(text)?;
    let mut out = Vec::with_capacity(raw.len());
    for (i, verts) in raw.iter().enumerate() {
        let pts: Vec<Point> = verts.iter().map(|v| Point::new(v[0], v[1])).collect();
        let poly =
            Polyline::new(pts).map_err(|e| Error::invalid(format!("polyline {i}: {e}")))?;
        out.push(Weighted::unit(poly));
    }
    if out.is_empty() {
        return Err(Error::invalid("no polylines in input"));
    }
    Ok(out)
}

/// Serializes a segment coreset: one record per retained item with its
/// coordinates and merged weight, plus the sampling metadata.
pub fn segment_coreset_json(coreset: &Coreset, items: &[WeightedSegment]) -> serde_json::Value {
    json!({
        "items": coreset
            .items
            .iter()
            .map(|ci| {
                let s = &items[ci.index].item;
                json!({
                    "index": ci.index,
                    "x1": s.a.x, "y1": s.a.y, "x2": s.b.x, "y2": s.b.y,
                    "weight": ci.weight,
                })
            })
            .collect::<Vec<_>>(),
        "meta": coreset.meta,
    })
}

pub fn polyline_coreset_json(coreset: &Coreset, items: &[WeightedPolyline]) -> serde_json::Value {
    json!({
        "items": coreset
            .items
            .iter()
            .map(|ci| {
                let p = &items[ci.index].item;
                let verts: Vec<[f64; 2]> =
                    p.vertices().iter().map(|v| [v.x, v.y]).collect();
                json!({
                    "index": ci.index,
                    "vertices": verts,
                    "weight": ci.weight,
                })
            })
            .collect::<Vec<_>>(),
        "meta": coreset.meta,
    })
}

pub fn write_json(value: &serde_json::Value, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes the optimizer trace of a result as JSON lines
/// (`{"restart": r, "iter": i, "cost": c, "centers": [...]}`).
pub fn write_trace<S: ShapeSpace>(
    space: &S,
    result: &PipelineResult<S::Object>,
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    for entry in &result.trace {
        let centers: Vec<Vec<[f64; 2]>> = entry
            .centers
            .iter()
            .map(|c| {
                let mut verts = Vec::new();
                space.for_each_point(c, &mut |p| verts.push([p.x, p.y]));
                verts
            })
            .collect();
        let line = json!({
            "restart": entry.restart,
            "iter": entry.iter,
            "cost": entry.cost,
            "centers": centers,
        });
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Renders the input colored by cluster with the centers drawn on top in a
/// thicker black stroke.
pub fn emit_svg<S: ShapeSpace>(
    space: &S,
    items: &[Weighted<S::Object>],
    result: &PipelineResult<S::Object>,
    path: &Path,
) -> Result<()> {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut extend = |p: Point| {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    };
    for it in items {
        space.for_each_point(&it.item, &mut extend);
    }
    for c in &result.centers {
        space.for_each_point(c, &mut extend);
    }
    let span = (max.x - min.x).max(max.y - min.y).max(1e-9);
    let margin = 0.05 * span;
    let stroke = span / 220.0;

    let mut svg = String::new();
    // Flip the y axis so the plot reads in math orientation.
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        min.x - margin,
        -max.y - margin,
        (max.x - min.x) + 2.0 * margin,
        (max.y - min.y) + 2.0 * margin
    );
    svg.push_str("<g transform=\"scale(1 -1)\">\n");
    let points_attr = |obj: &S::Object| -> String {
        let mut s = String::new();
        space.for_each_point(obj, &mut |p| {
            let _ = write!(s, "{},{} ", p.x, p.y);
        });
        s.trim_end().to_string()
    };
    for (i, it) in items.iter().enumerate() {
        let color = PALETTE[result.assignment.center_index[i] % PALETTE.len()];
        let _ = writeln!(
            svg,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>",
            points_attr(&it.item),
            color,
            stroke
        );
    }
    for c in &result.centers {
        let _ = writeln!(
            svg,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"{}\" stroke-linecap=\"round\"/>",
            points_attr(c),
            3.0 * stroke
        );
    }
    svg.push_str("</g>\n</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}
