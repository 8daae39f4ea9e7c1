//! Versioned JSON certificate files.
//!
//! Exact scalars are canonical `p/q` strings; float scalars are the
//! shortest decimal that round-trips. Targets and piece dimensions are
//! always exact. Unknown fields are rejected, and serializing a parsed file
//! reproduces it byte for byte.

use compack_core::scalar::{format_fraction, parse_fraction};
use compack_core::{
    Certificate, CollectionKind, LimitReport, PackingCertificate, PackingMode, PieceCollection,
    Placement, Rational, RigidMotion, Scalar, TargetSet,
};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

impl From<compack_core::Error> for FormatError {
    fn from(e: compack_core::Error) -> Self {
        FormatError::Invalid(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Exact,
    Float,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub format_version: u32,
    pub dim: usize,
    pub arithmetic: Arithmetic,
    pub mode: String,
    pub collection: CollectionSpec,
    pub target: TargetSpec,
    pub placements: Vec<PlacementSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CollectionSpec {
    MoserRectangles { count: usize },
    MoserSquares { count: usize },
    Custom { pieces: Vec<Vec<String>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Brick { dims: Vec<String> },
    Ball { radius: String },
    Homothet { lambda: String, base: Box<TargetSpec> },
    Funnel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSpec {
    pub piece_id: usize,
    /// Row-major rotation matrix.
    pub theta: Vec<String>,
    pub xi: Vec<String>,
}

fn exact(s: &str) -> Result<Rational, FormatError> {
    Ok(parse_fraction(s)?)
}

fn exact_all(v: &[String]) -> Result<Vec<Rational>, FormatError> {
    v.iter().map(|s| exact(s)).collect()
}

fn float(s: &str) -> Result<f64, FormatError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| FormatError::Invalid(format!("expected a finite decimal, got {s:?}")))
}

fn float_text(v: f64) -> String {
    format!("{v:?}")
}

impl CollectionSpec {
    pub fn from_collection(c: &PieceCollection) -> Self {
        match c.kind() {
            CollectionKind::MoserRectangles => CollectionSpec::MoserRectangles { count: c.count() },
            CollectionKind::MoserSquares => CollectionSpec::MoserSquares { count: c.count() },
            CollectionKind::Custom => CollectionSpec::Custom {
                pieces: c
                    .pieces()
                    .iter()
                    .map(|p| p.dims().iter().map(format_fraction).collect())
                    .collect(),
            },
        }
    }

    pub fn to_collection(&self) -> Result<PieceCollection, FormatError> {
        Ok(match self {
            CollectionSpec::MoserRectangles { count } => PieceCollection::moser_rectangles(*count)?,
            CollectionSpec::MoserSquares { count } => PieceCollection::moser_squares(*count)?,
            CollectionSpec::Custom { pieces } => PieceCollection::custom(
                pieces.iter().map(|d| exact_all(d)).collect::<Result<_, _>>()?,
            )?,
        })
    }
}

impl TargetSpec {
    pub fn from_target(t: &TargetSet) -> Self {
        match t {
            TargetSet::Brick { dims } => TargetSpec::Brick {
                dims: dims.iter().map(format_fraction).collect(),
            },
            TargetSet::Ball { radius } => TargetSpec::Ball {
                radius: format_fraction(radius),
            },
            TargetSet::Homothet { base, lambda } => TargetSpec::Homothet {
                lambda: format_fraction(lambda),
                base: Box::new(TargetSpec::from_target(base)),
            },
            TargetSet::Funnel => TargetSpec::Funnel,
        }
    }

    pub fn to_target(&self) -> Result<TargetSet, FormatError> {
        Ok(match self {
            TargetSpec::Brick { dims } => TargetSet::brick(exact_all(dims)?)?,
            TargetSpec::Ball { radius } => TargetSet::ball(exact(radius)?)?,
            TargetSpec::Homothet { lambda, base } => {
                TargetSet::homothet(base.to_target()?, exact(lambda)?)?
            }
            TargetSpec::Funnel => TargetSet::funnel(),
        })
    }
}

fn placements_to_specs<S: Scalar>(
    cert: &PackingCertificate<S>,
    text: impl Fn(&S) -> String,
) -> Vec<PlacementSpec> {
    cert.placements()
        .iter()
        .map(|p| PlacementSpec {
            piece_id: p.piece_id,
            theta: p.motion.theta().iter().map(&text).collect(),
            xi: p.motion.xi().iter().map(&text).collect(),
        })
        .collect()
}

fn specs_to_placements<S: Scalar>(
    specs: &[PlacementSpec],
    dim: usize,
    parse: impl Fn(&str) -> Result<S, FormatError>,
) -> Result<Vec<Placement<S>>, FormatError> {
    specs
        .iter()
        .map(|p| {
            if p.theta.len() != dim * dim || p.xi.len() != dim {
                return Err(FormatError::Invalid(format!(
                    "placement of piece {} has the wrong shape for dimension {dim}",
                    p.piece_id
                )));
            }
            let theta = p.theta.iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
            let xi = p.xi.iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
            let motion = RigidMotion::new(theta, xi)
                .map_err(|e| FormatError::Invalid(format!("piece {}: {e}", p.piece_id)))?;
            Ok(Placement::new(p.piece_id, motion))
        })
        .collect()
}

impl CertificateFile {
    pub fn from_certificate(cert: &Certificate) -> Self {
        let (arithmetic, placements) = match cert {
            Certificate::Exact(c) => (Arithmetic::Exact, placements_to_specs(c, format_fraction)),
            Certificate::Float(c) => (Arithmetic::Float, placements_to_specs(c, |v| float_text(*v))),
        };
        CertificateFile {
            format_version: FORMAT_VERSION,
            dim: cert.dim(),
            arithmetic,
            mode: cert.mode().name().to_string(),
            collection: CollectionSpec::from_collection(cert.collection()),
            target: TargetSpec::from_target(cert.target()),
            placements,
        }
    }

    pub fn to_certificate(&self) -> Result<Certificate, FormatError> {
        if self.format_version != FORMAT_VERSION {
            return Err(FormatError::Invalid(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let collection = self.collection.to_collection()?;
        if collection.dim() != self.dim {
            return Err(FormatError::Invalid(format!(
                "dim is {} but the pieces are {}-dimensional",
                self.dim,
                collection.dim()
            )));
        }
        let target = self.target.to_target()?;
        let mode = PackingMode::parse(&self.mode)?;
        Ok(match self.arithmetic {
            Arithmetic::Exact => Certificate::Exact(PackingCertificate::new(
                collection,
                target,
                mode,
                specs_to_placements(&self.placements, self.dim, exact)?,
            )?),
            Arithmetic::Float => Certificate::Float(PackingCertificate::new(
                collection,
                target,
                mode,
                specs_to_placements(&self.placements, self.dim, float)?,
            )?),
        })
    }
}

pub fn parse_certificate(text: &str) -> Result<Certificate, FormatError> {
    let file: CertificateFile = serde_json::from_str(text)?;
    file.to_certificate()
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_certificate(cert: &Certificate) -> String {
    to_pretty(&CertificateFile::from_certificate(cert))
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

/// Summary written next to a limit certificate. Real numbers are decimal
/// strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitReportFile {
    pub kept_indices: Vec<usize>,
    pub cluster_diameter: String,
    pub certified_slack: String,
    pub verdict: String,
    pub snapped: bool,
    pub limit_target: TargetSpec,
    pub violations: Vec<String>,
}

impl LimitReportFile {
    pub fn from_report(report: &LimitReport) -> Self {
        LimitReportFile {
            kept_indices: report.kept_indices.clone(),
            cluster_diameter: float_text(report.cluster_diameter),
            certified_slack: float_text(report.certified_slack),
            verdict: report.verdict.verdict.name().to_string(),
            snapped: report.snapped,
            limit_target: TargetSpec::from_target(&report.limit_target),
            violations: report
                .verdict
                .violations
                .iter()
                .chain(&report.verdict.marginal)
                .map(ToString::to_string)
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        to_pretty(self)
    }
}
