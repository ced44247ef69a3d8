//! Voxel images: loading (PGM, RAW + JSON sidecar), thresholding and
//! analytic phantoms with known boundaries.
//!
//! The object of interest is always the LOW-intensity region: after
//! [`binarize`], voxels inside the object are 0 and all others are 255.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{norm, sub, Vec3};

/// A 2D or 3D grid of 8-bit intensities. Axis 0 varies fastest in `data`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    dim: usize,
    dims: [usize; 3],
    spacing: [f64; 3],
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(dims: &[usize], data: Vec<u8>) -> Result<Self> {
        let dim = dims.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("images must be 2D or 3D, got {dim}D")));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument("zero-sized axis".into()));
        }
        let mut d = [1usize; 3];
        d[..dim].copy_from_slice(dims);
        let expected: usize = d.iter().product();
        if data.len() != expected {
            return Err(Error::SizeMismatch { expected, found: data.len() });
        }
        Ok(Self { dim, dims: d, spacing: [1.0; 3], data })
    }

    pub fn filled(dims: &[usize], value: u8) -> Result<Self> {
        let n = dims.iter().product();
        Self::new(dims, vec![value; n])
    }

    pub fn with_spacing(mut self, spacing: &[f64]) -> Result<Self> {
        if spacing.len() != self.dim || spacing.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidArgument(format!("bad spacing {spacing:?}")));
        }
        self.spacing[..self.dim].copy_from_slice(spacing);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Voxel counts per axis (unused axes are 1).
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, i: [usize; 3]) -> usize {
        i[0] + self.dims[0] * (i[1] + self.dims[1] * i[2])
    }

    #[inline]
    pub fn get(&self, i: [usize; 3]) -> u8 {
        self.data[self.index(i)]
    }

    /// Physical extent of the image box.
    pub fn extent(&self) -> Vec3 {
        let mut e = [0.0; 3];
        for a in 0..self.dim {
            e[a] = self.dims[a] as f64 * self.spacing[a];
        }
        e
    }

    /// Physical position of a voxel center.
    pub fn voxel_center(&self, i: [usize; 3]) -> Vec3 {
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (i[a] as f64 + 0.5) * self.spacing[a];
        }
        x
    }

    pub(crate) fn voxels(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let d = self.dims;
        (0..d[2]).flat_map(move |k| (0..d[1]).flat_map(move |j| (0..d[0]).map(move |i| [i, j, k])))
    }
}

/// Input formats understood by [`load_image`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImageFormat {
    /// Portable graymap, ASCII (P2) or binary (P5).
    Pgm,
    /// Flat 8-bit voxels with a `<stem>.json` sidecar `{dims, spacing}`.
    Raw,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "pgm" => Some(Self::Pgm),
            "raw" => Some(Self::Raw),
            _ => None,
        }
    }
}

/// JSON sidecar for RAW volumes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RawHeader {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub spacing: Option<Vec<f64>>,
}

pub fn load_image(path: &Path, format: ImageFormat) -> Result<GrayImage> {
    match format {
        ImageFormat::Pgm => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            parse_pgm(&bytes)
        }
        ImageFormat::Raw => {
            let header_path = raw_header_path(path);
            let text = fs::read_to_string(&header_path).map_err(|e| Error::io(&header_path, e))?;
            let header: RawHeader = serde_json::from_str(&text)
                .map_err(|e| Error::MalformedHeader(format!("{}: {e}", header_path.display())))?;
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            parse_raw(&header, bytes)
        }
    }
}

pub fn raw_header_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn parse_raw(header: &RawHeader, bytes: Vec<u8>) -> Result<GrayImage> {
    if !(2..=3).contains(&header.dims.len()) {
        return Err(Error::MalformedHeader(format!("dims must have 2 or 3 entries, got {:?}", header.dims)));
    }
    let expected: usize = header.dims.iter().product();
    if bytes.len() != expected {
        return Err(Error::SizeMismatch { expected, found: bytes.len() });
    }
    let img = GrayImage::new(&header.dims, bytes)?;
    match &header.spacing {
        Some(s) => img.with_spacing(s),
        None => Ok(img),
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;
    let token = |pos: &mut usize| -> Result<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::MalformedHeader("unexpected end of PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    let number = |s: String| -> Result<u32> {
        s.parse::<u32>().map_err(|_| Error::MalformedHeader(format!("expected integer, got {s:?}")))
    };
    let width = number(token(&mut pos)?)? as usize;
    let height = number(token(&mut pos)?)? as usize;
    let maxval = number(token(&mut pos)?)?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero image size".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedBitDepth(maxval));
    }
    let n = width * height;
    let data = match magic.as_str() {
        "P2" => {
            let mut data = Vec::with_capacity(n);
            for _ in 0..n {
                let v = match token(&mut pos) {
                    Ok(t) => number(t)?,
                    Err(_) => break,
                };
                if v > maxval {
                    return Err(Error::MalformedHeader(format!("sample {v} exceeds maxval {maxval}")));
                }
                data.push(v as u8);
            }
            data
        }
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            pos += 1;
            bytes.get(pos..).unwrap_or_default().to_vec()
        }
        other => return Err(Error::MalformedHeader(format!("unknown PGM magic {other:?}"))),
    };
    if data.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: data.len() });
    }
    GrayImage::new(&[width, height], data)
}

/// Binary P5 encoding of a 2D image.
pub fn encode_pgm(img: &GrayImage) -> Result<Vec<u8>> {
    if img.dim() != 2 {
        return Err(Error::InvalidArgument("PGM holds 2D images only".into()));
    }
    let [w, h, _] = img.dims();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(img.data());
    Ok(out)
}

pub fn save_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    fs::write(path, encode_pgm(img)?).map_err(|e| Error::io(path, e))
}

/// Write `path` (raw bytes) and its JSON sidecar.
pub fn save_raw(img: &GrayImage, path: &Path) -> Result<()> {
    let d = img.dim();
    let header = RawHeader { dims: img.dims()[..d].to_vec(), spacing: Some(img.spacing()[..d].to_vec()) };
    let hp = raw_header_path(path);
    fs::write(&hp, serde_json::to_string_pretty(&header)?).map_err(|e| Error::io(&hp, e))?;
    fs::write(path, img.data()).map_err(|e| Error::io(path, e))
}

/// Voxels at or below `threshold` become 0 (inside), all others 255.
pub fn binarize(img: &GrayImage, threshold: f64) -> GrayImage {
    let mut out = img.clone();
    for v in &mut out.data {
        *v = if f64::from(*v) <= threshold { 0 } else { 255 };
    }
    out
}

/// Analytic shapes used as ground truth. Lengths are physical units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
    /// Material occupies the box minus a disk of `radius` centered at the origin corner.
    PlateWithHoleQuarter { radius: f64 },
    Sphere { center: [f64; 3], radius: f64 },
    /// Spherical shell octant centered at the origin corner. Without `outer`
    /// the material is the whole box minus the ball of radius `inner`.
    HollowSphereOctant { inner: f64, outer: Option<f64> },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Disk { .. } | Shape::Annulus { .. } | Shape::PlateWithHoleQuarter { .. } => 2,
            _ => 3,
        }
    }

    fn radial(&self, x: Vec3) -> f64 {
        match self {
            Shape::Disk { center, .. } | Shape::Annulus { center, .. } => {
                norm(sub(x, [center[0], center[1], 0.0]))
            }
            Shape::Sphere { center, .. } => norm(sub(x, *center)),
            _ => norm(x),
        }
    }

    /// Signed distance to the shape, negative inside.
    ///
    /// For the plate and the unbounded octant only the curved boundary is
    /// considered, which is what boundary-fit errors are measured against.
    pub fn signed_distance(&self, x: Vec3) -> f64 {
        let r = self.radial(x);
        match *self {
            Shape::Disk { radius, .. } | Shape::Sphere { radius, .. } => r - radius,
            Shape::Annulus { inner, outer, .. } => (inner - r).max(r - outer),
            Shape::PlateWithHoleQuarter { radius } => radius - r,
            Shape::HollowSphereOctant { inner, outer } => match outer {
                Some(o) => (inner - r).max(r - o),
                None => inner - r,
            },
        }
    }

    pub fn contains(&self, x: Vec3) -> bool {
        self.signed_distance(x) <= 0.0
    }

    /// Distance to the curved part of the boundary.
    pub fn boundary_distance(&self, x: Vec3) -> f64 {
        let r = self.radial(x);
        match *self {
            Shape::Disk { radius, .. } | Shape::Sphere { radius, .. } => (r - radius).abs(),
            Shape::PlateWithHoleQuarter { radius } => (r - radius).abs(),
            Shape::Annulus { inner, outer, .. } => (r - inner).abs().min((r - outer).abs()),
            Shape::HollowSphereOctant { inner, outer } => {
                let d = (r - inner).abs();
                outer.map_or(d, |o| d.min((r - o).abs()))
            }
        }
    }

    fn check_fits(&self, extent: Vec3) -> Result<()> {
        let fail = |msg: String| Err(Error::OutOfBounds(msg));
        let positive = |v: f64, name: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive")))
            }
        };
        match *self {
            Shape::Disk { center, radius } => {
                positive(radius, "radius")?;
                for a in 0..2 {
                    if center[a] - radius < 0.0 || center[a] + radius > extent[a] {
                        return fail(format!("disk of radius {radius} at {center:?} in box {extent:?}"));
                    }
                }
            }
            Shape::Annulus { center, inner, outer } => {
                positive(inner, "inner radius")?;
                if outer <= inner {
                    return Err(Error::InvalidArgument("outer radius must exceed inner".into()));
                }
                for a in 0..2 {
                    if center[a] - outer < 0.0 || center[a] + outer > extent[a] {
                        return fail(format!("annulus of radius {outer} at {center:?} in box {extent:?}"));
                    }
                }
            }
            Shape::PlateWithHoleQuarter { radius } => {
                positive(radius, "radius")?;
                if radius >= extent[0].min(extent[1]) {
                    return fail(format!("hole radius {radius} in box {extent:?}"));
                }
            }
            Shape::Sphere { center, radius } => {
                positive(radius, "radius")?;
                for a in 0..3 {
                    if center[a] - radius < 0.0 || center[a] + radius > extent[a] {
                        return fail(format!("sphere of radius {radius} at {center:?} in box {extent:?}"));
                    }
                }
            }
            Shape::HollowSphereOctant { inner, outer } => {
                positive(inner, "inner radius")?;
                let m = extent[0].min(extent[1]).min(extent[2]);
                let reach = outer.unwrap_or(inner);
                if outer.is_some_and(|o| o <= inner) {
                    return Err(Error::InvalidArgument("outer radius must exceed inner".into()));
                }
                if reach > m {
                    return fail(format!("shell radius {reach} in box {extent:?}"));
                }
            }
        }
        Ok(())
    }
}

/// A synthetic image together with the shape it was rasterized from.
#[derive(Clone, Debug)]
pub struct Phantom {
    pub image: GrayImage,
    pub shape: Shape,
}

/// Rasterize `shape`: voxels whose centers lie inside get 0, others 255.
pub fn synthesize_phantom(shape: Shape, dims: &[usize], spacing: &[f64]) -> Result<Phantom> {
    if dims.len() != shape.dim() {
        return Err(Error::InvalidArgument(format!(
            "shape is {}D but dims has {} entries",
            shape.dim(),
            dims.len()
        )));
    }
    let img = GrayImage::filled(dims, 255)?.with_spacing(spacing)?;
    shape.check_fits(img.extent())?;
    let mut data = img.data.clone();
    for i in img.voxels() {
        if shape.contains(img.voxel_center(i)) {
            data[img.index(i)] = 0;
        }
    }
    Ok(Phantom { image: GrayImage { data, ..img }, shape })
}
