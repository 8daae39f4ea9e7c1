//! Deterministic SVG drawings of planar certificates.

use std::fmt::Write;

use compack_core::{Aabb, Certificate, PackingCertificate, Scalar, TargetSet};

const PALETTE: [&str; 6] = ["#8ecae6", "#ffb703", "#90be6d", "#f4a261", "#cdb4db", "#e5989b"];
const PIXELS: f64 = 800.0;

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("rendering supports dimension 2 only, got {0}")]
    Unsupported(usize),
}

/// Fixed-precision number with trailing zeros removed.
fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s.is_empty() {
        "0".to_string()
    } else {
        s.to_string()
    }
}

struct Frame {
    min_x: f64,
    max_y: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        x - self.min_x
    }

    fn y(&self, y: f64) -> f64 {
        self.max_y - y
    }

    fn point(&self, p: &[f64]) -> String {
        format!("{},{}", num(self.x(p[0])), num(self.y(p[1])))
    }
}

/// Corners of a placed rectangle in boundary order.
fn outline(cert: &PackingCertificate<f64>, k: usize) -> Vec<Vec<f64>> {
    let p = &cert.placements()[k];
    let d = cert.piece(p).dims_f64();
    [[0.0, 0.0], [d[0], 0.0], [d[0], d[1]], [0.0, d[1]]]
        .iter()
        .map(|v| p.motion.apply(v).expect("planar"))
        .collect()
}

fn target_shape(target: &TargetSet, scale: f64, frame: &Frame, stroke: f64, out: &mut String) {
    let style = format!("fill=\"none\" stroke=\"#222\" stroke-width=\"{}\"", num(stroke));
    match target {
        TargetSet::Brick { dims } => {
            let (w, h) = (dims[0].to_f64() * scale, dims[1].to_f64() * scale);
            // A path, so `<rect>` elements are exactly the pieces.
            let _ = writeln!(
                out,
                "  <path d=\"M{} {} H{} V{} H{} Z\" {style}/>",
                num(frame.x(0.0)),
                num(frame.y(0.0)),
                num(frame.x(w)),
                num(frame.y(h)),
                num(frame.x(0.0))
            );
        }
        TargetSet::Ball { radius } => {
            let _ = writeln!(
                out,
                "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" {style}/>",
                num(frame.x(0.0)),
                num(frame.y(0.0)),
                num(radius.to_f64() * scale)
            );
        }
        TargetSet::Homothet { base, lambda } => {
            target_shape(base, scale * lambda.to_f64(), frame, stroke, out)
        }
        TargetSet::Funnel => {
            // Boundary t -> (t, +-(1 - 1/t)) scaled, up to the right edge.
            let right = frame.min_x + frame.width;
            let steps = 200;
            let end = (right / scale).max(1.0);
            let upper: Vec<Vec<f64>> = (0..=steps)
                .map(|i| {
                    let t = 1.0 + (end - 1.0) * i as f64 / steps as f64;
                    vec![t * scale, (1.0 - 1.0 / t) * scale]
                })
                .collect();
            let points: Vec<String> = upper
                .iter()
                .rev()
                .map(|p| frame.point(&[p[0], -p[1]]))
                .chain(upper.iter().map(|p| frame.point(p)))
                .collect();
            let _ = writeln!(out, "  <polyline points=\"{}\" {style}/>", points.join(" "));
        }
    }
}

/// Target outline plus every placed piece with its id, framed on the
/// target's bounding box (or the pieces' when the target is unbounded)
/// padded by 5%.
pub fn render_svg(cert: &Certificate) -> Result<String, RenderError> {
    if cert.dim() != 2 {
        return Err(RenderError::Unsupported(cert.dim()));
    }
    let exact_axes: Vec<bool> = match cert {
        Certificate::Exact(c) => c.placements().iter().map(|p| p.motion.is_signed_permutation()).collect(),
        Certificate::Float(c) => c.placements().iter().map(|p| p.motion.is_signed_permutation()).collect(),
    };
    let cert = cert.to_f64();
    let shapes: Vec<Vec<Vec<f64>>> = (0..cert.placements().len()).map(|k| outline(&cert, k)).collect();
    let pieces_box = Aabb::from_points(shapes.iter().flatten().map(Vec::as_slice));
    let bounds = match (cert.target().bounding_box(2), pieces_box) {
        (Some(b), _) => b,
        (None, Some(p)) => p,
        (None, None) => Aabb::new(vec![0.0, -1.0], vec![2.0, 1.0]),
    };
    let ext = bounds.extents();
    let pad: Vec<f64> = ext.iter().map(|e| 0.05 * if *e > 0.0 { *e } else { 1.0 }).collect();
    let frame = Frame {
        min_x: bounds.lo[0] - pad[0],
        max_y: bounds.hi[1] + pad[1],
        width: ext[0] + 2.0 * pad[0],
        height: ext[1] + 2.0 * pad[1],
    };
    let size = frame.width.max(frame.height);
    let stroke = size * 0.002;

    let mut out = String::new();
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        num(PIXELS * frame.width / size),
        num(PIXELS * frame.height / size),
        num(frame.width),
        num(frame.height)
    );
    target_shape(cert.target(), 1.0, &frame, stroke * 2.0, &mut out);
    for (k, (p, shape)) in cert.placements().iter().zip(&shapes).enumerate() {
        let fill = PALETTE[p.piece_id % PALETTE.len()];
        let style = format!("fill=\"{fill}\" stroke=\"#333\" stroke-width=\"{}\"", num(stroke));
        let xs = shape.iter().map(|v| v[0]);
        let ys = shape.iter().map(|v| v[1]);
        let (x0, x1) = (xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max));
        let (y0, y1) = (ys.clone().fold(f64::INFINITY, f64::min), ys.fold(f64::NEG_INFINITY, f64::max));
        if exact_axes[k] {
            let _ = writeln!(
                out,
                "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" {style}/>",
                num(frame.x(x0)),
                num(frame.y(y1)),
                num(x1 - x0),
                num(y1 - y0)
            );
        } else {
            let points: Vec<String> = shape.iter().map(|v| frame.point(v)).collect();
            let _ = writeln!(out, "  <polygon points=\"{}\" {style}/>", points.join(" "));
        }
        let font = ((x1 - x0).min(y1 - y0) * 0.5).min(size * 0.05);
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"middle\" dominant-baseline=\"central\">{}</text>",
            num(frame.x((x0 + x1) / 2.0)),
            num(frame.y((y0 + y1) / 2.0)),
            num(font),
            p.piece_id
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
