//! Heatmap image I/O: a lossless little-endian f32 raster format for
//! downstream processing, and 16-bit PNG (with a JSON sidecar recording the
//! quantization scale) for inspection.

use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;

/// 8-byte magic prefix of the raw f32 grid format.
pub const RAW_MAGIC: &[u8; 8] = b"F32GRID\0";

/// Write a grid as magic + u32 height + u32 width + row-major f32 samples,
/// all little-endian.
pub fn save_raw<S: Real>(grid: &Grid<S>, path: &Path) -> Result<()> {
    let p = || path.display().to_string();
    let mut buf = Vec::with_capacity(16 + 4 * grid.data.len());
    buf.extend_from_slice(RAW_MAGIC);
    let h = u32::try_from(grid.height).map_err(|_| Error::Validation {
        what: format!("grid height {} exceeds u32", grid.height),
    })?;
    let w = u32::try_from(grid.width).map_err(|_| Error::Validation {
        what: format!("grid width {} exceeds u32", grid.width),
    })?;
    buf.extend_from_slice(&h.to_le_bytes());
    buf.extend_from_slice(&w.to_le_bytes());
    for &v in &grid.data {
        buf.extend_from_slice(&(v.to_f64c() as f32).to_le_bytes());
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(p(), e))?;
    file.write_all(&buf).map_err(|e| Error::io(p(), e))?;
    Ok(())
}

pub fn load_raw<S: Real>(path: &Path) -> Result<Grid<S>> {
    let p = || path.display().to_string();
    let malformed = |what: &str| Error::MalformedFile {
        path: path.display().to_string(),
        what: what.into(),
    };
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(p(), e))?;
    if bytes.len() < 16 {
        return Err(malformed("shorter than the 16-byte header"));
    }
    if &bytes[..8] != RAW_MAGIC {
        return Err(malformed("bad magic"));
    }
    let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let w = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let expected = 16 + 4 * h * w;
    if bytes.len() != expected {
        return Err(malformed(&format!(
            "expected {expected} bytes for {h}x{w}, found {}",
            bytes.len()
        )));
    }
    let data = bytes[16..]
        .chunks_exact(4)
        .map(|c| S::c(f32::from_le_bytes(c.try_into().unwrap()) as f64))
        .collect();
    Ok(Grid::from_data(h, w, data))
}

/// Sidecar metadata written next to each 16-bit PNG.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PngSidecar {
    pub version: u32,
    pub view_index: usize,
    /// Grid value corresponding to the full 16-bit code 65535.
    pub scale: f64,
    pub width: usize,
    pub height: usize,
}

pub fn sidecar_path(png_path: &Path) -> PathBuf {
    let mut os = png_path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// Write a 16-bit grayscale PNG quantized against the grid maximum (or 1.0
/// for all-zero grids), plus a JSON sidecar with the scale and view index.
pub fn save_png<S: Real>(grid: &Grid<S>, view_index: usize, path: &Path) -> Result<()> {
    let p = || path.display().to_string();
    let max = grid.max_value().to_f64c();
    let scale = if max > 0.0 { max } else { 1.0 };
    let mut img = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::new(
        grid.width as u32,
        grid.height as u32,
    );
    for r in 0..grid.height {
        for c in 0..grid.width {
            let v = (grid.get(r, c).to_f64c() / scale).clamp(0.0, 1.0);
            img.put_pixel(c as u32, r as u32, image::Luma([(v * 65535.0).round() as u16]));
        }
    }
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::MalformedFile {
            path: p(),
            what: e.to_string(),
        })?;
    let sidecar = PngSidecar {
        version: 1,
        view_index,
        scale,
        width: grid.width,
        height: grid.height,
    };
    let sc_path = sidecar_path(path);
    std::fs::write(
        &sc_path,
        serde_json::to_string_pretty(&sidecar).expect("sidecar serialization"),
    )
    .map_err(|e| Error::io(sc_path.display().to_string(), e))?;
    Ok(())
}
