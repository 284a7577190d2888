//! Grayscale PGM (P2 plain, P5 raw) decoding and P5 export.

use shapeflow_core::energy::ScalarField;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PgmError {
    #[error("byte {offset}: missing PGM magic number")]
    MissingMagic { offset: usize },
    #[error("byte 0: unsupported magic {found:?}, expected P2 or P5")]
    BadMagic { found: String },
    #[error("byte {offset}: malformed header, {message}")]
    Header { offset: usize, message: String },
    #[error("byte {offset}: unsupported maxval {maxval}, expected 1..=255")]
    UnsupportedMaxval { offset: usize, maxval: u64 },
    #[error("byte {offset}: truncated payload, expected {expected} {unit}, received {received}")]
    Truncated {
        offset: usize,
        expected: usize,
        received: usize,
        unit: &'static str,
    },
    #[error("byte {offset}: sample {value} exceeds maxval {maxval}")]
    SampleRange { offset: usize, value: u64, maxval: u64 },
    #[error("image is {width}x{height}; at least 2x2 pixels are required")]
    TooSmall { width: usize, height: usize },
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Next unsigned decimal token, or `None` at the end of input.
    fn number(&mut self, what: &str) -> Result<Option<(usize, u64)>, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        if start == self.bytes.len() {
            return Ok(None);
        }
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        let token = &self.bytes[start..self.pos];
        let trailing_ok = self
            .bytes
            .get(self.pos)
            .is_none_or(|b| b.is_ascii_whitespace() || *b == b'#');
        if token.is_empty() || !trailing_ok {
            return Err(PgmError::Header {
                offset: start,
                message: format!("expected {what} as a decimal integer"),
            });
        }
        let value = std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::Header {
                offset: start,
                message: format!("{what} is out of range"),
            })?;
        Ok(Some((start, value)))
    }

    fn header_field(&mut self, what: &str) -> Result<(usize, u64), PgmError> {
        self.skip_space_and_comments();
        let offset = self.pos;
        self.number(what)?.ok_or(PgmError::Header {
            offset,
            message: format!("end of file before {what}"),
        })
    }
}

/// Decodes an 8-bit P2 or P5 image, scaling samples to `[0, 1]` by maxval.
pub fn decode(bytes: &[u8]) -> Result<ScalarField, PgmError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(PgmError::MissingMagic { offset: 0 });
    }
    let raw = match bytes[1] {
        b'2' => false,
        b'5' => true,
        _ => {
            return Err(PgmError::BadMagic {
                found: String::from_utf8_lossy(&bytes[..2]).into_owned(),
            })
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(PgmError::Header {
            offset: 2,
            message: "expected whitespace after the magic number".into(),
        });
    }
    let (w_at, width) = cur.header_field("width")?;
    let (h_at, height) = cur.header_field("height")?;
    let (m_at, maxval) = cur.header_field("maxval")?;
    for (at, v, what) in [(w_at, width, "width"), (h_at, height, "height")] {
        if v == 0 {
            return Err(PgmError::Header {
                offset: at,
                message: format!("{what} must be positive"),
            });
        }
    }
    if !(1..=255).contains(&maxval) {
        return Err(PgmError::UnsupportedMaxval { offset: m_at, maxval });
    }
    let (width, height) = (width as usize, height as usize);
    let count = width.checked_mul(height).ok_or(PgmError::Header {
        offset: w_at,
        message: "image dimensions overflow".into(),
    })?;
    if width < 2 || height < 2 {
        return Err(PgmError::TooSmall { width, height });
    }
    let scale = maxval as f64;

    let values = if raw {
        // exactly one whitespace byte separates maxval from the payload
        let start = cur.pos + 1;
        let payload = bytes.get(start..).unwrap_or(&[]);
        if payload.len() < count {
            return Err(PgmError::Truncated {
                offset: start.min(bytes.len()),
                expected: count,
                received: payload.len(),
                unit: "bytes",
            });
        }
        let mut values = Vec::with_capacity(count);
        for (k, &b) in payload[..count].iter().enumerate() {
            if b as u64 > maxval {
                return Err(PgmError::SampleRange {
                    offset: start + k,
                    value: b as u64,
                    maxval,
                });
            }
            values.push(b as f64 / scale);
        }
        values
    } else {
        let mut values = Vec::with_capacity(count);
        while values.len() < count {
            match cur.number("sample")? {
                Some((at, v)) if v > maxval => {
                    return Err(PgmError::SampleRange { offset: at, value: v, maxval })
                }
                Some((_, v)) => values.push(v as f64 / scale),
                None => {
                    return Err(PgmError::Truncated {
                        offset: bytes.len(),
                        expected: count,
                        received: values.len(),
                        unit: "samples",
                    })
                }
            }
        }
        values
    };
    Ok(ScalarField::new(width, height, values).expect("validated dimensions and finite samples"))
}

/// Encodes `field` as a P5 image, rescaling its range linearly to 0..=255.
/// A constant field maps to 0.
pub fn encode(field: &ScalarField) -> Vec<u8> {
    let (lo, hi) = (field.min(), field.max());
    let span = hi - lo;
    let mut out = format!("P5\n{} {}\n255\n", field.width(), field.height()).into_bytes();
    out.extend(field.values().iter().map(|v| {
        if span > 0.0 {
            ((v - lo) / span * 255.0).round() as u8
        } else {
            0
        }
    }));
    out
}
