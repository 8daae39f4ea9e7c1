//! Certificate file format and SVG rendering behind the `compack` binary.

pub mod format;
pub mod render;

pub use format::{parse_certificate, write_certificate, CertificateFile, FormatError, LimitReportFile};
pub use render::{render_svg, RenderError};
