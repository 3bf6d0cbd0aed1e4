//! Raster containers.
//!
//! All images are row-major with the origin at the top-left corner and `y`
//! growing downward.

use crate::error::{Error, Result};

/// 8-bit raster with one (gray) or three (RGB) interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl Raster {
    pub fn new_gray(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, 1, data)
    }

    pub fn new_rgb(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, 3, data)
    }

    fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::Shape(format!(
                "{}x{}x{} raster with {} bytes",
                width,
                height,
                channels,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled_gray(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            channels: 1,
            data: vec![value; width * height],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    /// Pixel-exact copy of the window `[x0, x0+w) x [y0, y0+h)`.
    pub fn window(&self, x0: usize, y0: usize, w: usize, h: usize) -> Raster {
        debug_assert!(x0 + w <= self.width && y0 + h <= self.height);
        let ch = self.channels;
        let mut data = Vec::with_capacity(w * h * ch);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * ch;
            data.extend_from_slice(&self.data[start..start + w * ch]);
        }
        Raster {
            width: w,
            height: h,
            channels: ch,
            data,
        }
    }

    /// Reads a PNG (or any format the `image` crate was built with).
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let img = image::open(path)?;
        Ok(Self::from_dynamic(img))
    }

    pub fn from_dynamic(img: image::DynamicImage) -> Self {
        use image::DynamicImage;
        match img {
            DynamicImage::ImageLuma8(g) => {
                let (w, h) = g.dimensions();
                Raster {
                    width: w as usize,
                    height: h as usize,
                    channels: 1,
                    data: g.into_raw(),
                }
            }
            other => {
                let rgb = other.to_rgb8();
                let (w, h) = rgb.dimensions();
                Raster {
                    width: w as usize,
                    height: h as usize,
                    channels: 3,
                    data: rgb.into_raw(),
                }
            }
        }
    }

    pub fn save_png(&self, path: &std::path::Path) -> Result<()> {
        let color = if self.channels == 1 {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgb8
        };
        image::save_buffer(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            color,
        )?;
        Ok(())
    }
}

/// Which intensity carries the ink.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Polarity {
    /// Dark writing on a light page (scan polarity).
    InkDark,
    /// Bright writing on a black background (after inversion).
    InkBright,
}

impl Polarity {
    pub fn flipped(self) -> Self {
        match self {
            Polarity::InkDark => Polarity::InkBright,
            Polarity::InkBright => Polarity::InkDark,
        }
    }
}

/// Single-channel 8-bit image with explicit ink polarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    pub polarity: Polarity,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>, polarity: Polarity) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel count mismatch");
        Self {
            width,
            height,
            pixels,
            polarity,
        }
    }

    pub fn filled(width: usize, height: usize, value: u8, polarity: Polarity) -> Self {
        Self::new(width, height, vec![value; width * height], polarity)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    /// `255 - v` on every pixel; flips the polarity flag.
    pub fn inverted(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| 255 - v).collect(),
            polarity: self.polarity.flipped(),
        }
    }

    /// Intensities scaled to `[0, 1]`.
    pub fn to_unit(&self) -> FloatImage {
        FloatImage {
            width: self.width,
            height: self.height,
            data: self.pixels.iter().map(|&v| f64::from(v) / 255.0).collect(),
        }
    }

    /// Foreground mask of ink pixels given a threshold on the 0..=255 scale.
    ///
    /// For dark ink the mask is `v <= threshold`, for bright ink `v > 255 - threshold`.
    pub fn ink_mask(&self, threshold: u8) -> BinaryImage {
        let bits = match self.polarity {
            Polarity::InkDark => self.pixels.iter().map(|&v| v <= threshold).collect(),
            Polarity::InkBright => self
                .pixels
                .iter()
                .map(|&v| v >= 255 - threshold)
                .collect(),
        };
        BinaryImage {
            width: self.width,
            height: self.height,
            bits,
        }
    }
}

/// Foreground/background mask; `true` is ink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width * height, "bit count mismatch");
        Self {
            width,
            height,
            bits,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-range coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Per-pixel Euclidean distance to the nearest background pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl DistanceMap {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Connected-region labels; 0 is background, regions are `1..=count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelImage {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub count: u32,
}

impl LabelImage {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Pixel coordinates `(x, y)` of every region, indexed by `label - 1`,
    /// each list in raster order.
    pub fn regions(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.count as usize];
        for y in 0..self.height {
            for x in 0..self.width {
                let l = self.labels[y * self.width + x];
                if l > 0 {
                    out[l as usize - 1].push((x, y));
                }
            }
        }
        out
    }

    pub fn areas(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.count as usize];
        for &l in &self.labels {
            if l > 0 {
                out[l as usize - 1] += 1;
            }
        }
        out
    }
}

/// `f64` working image used by filters and the scale-space detectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl FloatImage {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}
