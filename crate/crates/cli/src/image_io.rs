//! Grayscale PGM (8/16-bit, binary or ASCII) and PFM images.

use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, top row first.
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "image buffer size");
        Image { rows, cols, data }
    }
}

/// Binary 8-bit PGM of `img` clipped to `[0, 1]`.
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols, img.rows).into_bytes();
    out.extend(img.data.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

/// Little-endian grayscale PFM, stored bottom row first.
pub fn encode_pfm(img: &Image) -> Vec<u8> {
    let mut out = format!("Pf\n{} {}\n-1.0\n", img.cols, img.rows).into_bytes();
    for r in (0..img.rows).rev() {
        for v in &img.data[r * img.cols..(r + 1) * img.cols] {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    out
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn token(&mut self) -> Option<&'a str> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.bytes.get(self.pos) == Some(&b'#') {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.bytes[start..self.pos]).ok()).flatten()
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        self.token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| CliError::Config(format!("bad image header: missing {what}")))
    }
}

/// Decodes PGM (P2/P5) scaled to `[0, 1]`, or PFM (`Pf`) as stored.
pub fn decode(bytes: &[u8]) -> Result<Image> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token().ok_or_else(|| CliError::Config("empty image".into()))?;
    let cols: usize = h.number("width")?;
    let rows: usize = h.number("height")?;
    let n = rows * cols;
    let short = || CliError::Config("truncated image data".into());
    match magic {
        "P2" | "P5" => {
            let maxval: u32 = h.number("maxval")?;
            if maxval == 0 || maxval > 65535 {
                return Err(CliError::Config(format!("bad PGM maxval {maxval}")));
            }
            let scale = 1.0 / maxval as f64;
            let data = if magic == "P2" {
                (0..n).map(|_| h.number::<u32>("pixel").map(|v| v as f64 * scale)).collect::<Result<Vec<_>>>()?
            } else {
                let body = &bytes[h.pos + 1..];
                let width = if maxval < 256 { 1 } else { 2 };
                if body.len() < n * width {
                    return Err(short());
                }
                (0..n)
                    .map(|i| {
                        let v = if width == 1 { body[i] as u32 } else { u16::from_be_bytes([body[2 * i], body[2 * i + 1]]) as u32 };
                        v as f64 * scale
                    })
                    .collect()
            };
            Ok(Image::new(rows, cols, data))
        }
        "Pf" => {
            let scale: f64 = h.number("scale")?;
            let body = &bytes[h.pos + 1..];
            if body.len() < 4 * n {
                return Err(short());
            }
            let mut data = vec![0.0; n];
            for (k, chunk) in body[..4 * n].chunks_exact(4).enumerate() {
                let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
                let v = if scale < 0.0 { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
                let (r, c) = (rows - 1 - k / cols, k % cols);
                data[r * cols + c] = v as f64;
            }
            Ok(Image::new(rows, cols, data))
        }
        other => Err(CliError::Config(format!("unsupported image format '{other}'"))),
    }
}

pub fn load(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_pgm(path: &Path, img: &Image) -> Result<()> {
    std::fs::write(path, encode_pgm(img)).map_err(|e| CliError::io(path, e))
}

pub fn save_pfm(path: &Path, img: &Image) -> Result<()> {
    std::fs::write(path, encode_pfm(img)).map_err(|e| CliError::io(path, e))
}
