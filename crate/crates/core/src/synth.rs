//! Synthetic handwriting pages with matching hOCR layout.
//!
//! Glyphs are random polylines drawn with a round pen of fixed width,
//! sheared by the hand's slant and laid out in words and lines. Every hand
//! parameter is explicit, so two styles can be made as similar or as
//! different as a test needs.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hocr::{to_hocr, BBox, LineBox, PageRecord};
use crate::image::Raster;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HandStyle {
    pub name: String,
    /// Pen width in pixels.
    pub stroke_width: f64,
    /// Glyph body height in pixels.
    pub char_height: f64,
    /// Glyph width as a fraction of its height.
    pub char_aspect: f64,
    /// Forward lean in degrees.
    pub slant_deg: f64,
    /// Horizontal gap between glyphs of a word, in pixels.
    pub char_gap: f64,
    /// Gap between words as a multiple of the glyph height.
    pub word_gap: f64,
    /// Line pitch as a multiple of the glyph height.
    pub line_pitch: f64,
    /// Polyline vertices per glyph, inclusive range.
    pub vertices: (usize, usize),
    /// Relative jitter of glyph size.
    pub size_jitter: f64,
    pub ink: u8,
    pub paper: u8,
}

impl Default for HandStyle {
    fn default() -> Self {
        Self {
            name: "A".into(),
            stroke_width: 3.0,
            char_height: 20.0,
            char_aspect: 0.6,
            slant_deg: 10.0,
            char_gap: 4.0,
            word_gap: 0.9,
            line_pitch: 2.0,
            vertices: (4, 6),
            size_jitter: 0.1,
            ink: 25,
            paper: 240,
        }
    }
}

impl HandStyle {
    /// Thin, small, upright-leaning hand.
    pub fn hand_a() -> Self {
        Self::default()
    }

    /// Heavy, tall, more slanted hand.
    pub fn hand_b() -> Self {
        Self {
            name: "B".into(),
            stroke_width: 6.0,
            char_height: 35.0,
            slant_deg: 20.0,
            char_gap: 6.0,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageSpec {
    pub width: usize,
    pub height: usize,
    /// Blank border around the text block.
    pub margin: usize,
    /// Upper bound on text lines per page.
    pub max_lines: usize,
}

impl Default for PageSpec {
    fn default() -> Self {
        Self {
            width: 900,
            height: 700,
            margin: 60,
            max_lines: 12,
        }
    }
}

struct Canvas {
    width: usize,
    height: usize,
    pix: Vec<u8>,
}

impl Canvas {
    fn new(width: usize, height: usize, paper: u8) -> Self {
        Self {
            width,
            height,
            pix: vec![paper; width * height],
        }
    }

    /// Paints pixels whose centres lie within `radius` of the segment.
    fn segment(&mut self, a: (f64, f64), b: (f64, f64), radius: f64, ink: u8) {
        let x0 = (a.0.min(b.0) - radius).floor().max(0.0) as usize;
        let y0 = (a.1.min(b.1) - radius).floor().max(0.0) as usize;
        let x1 = ((a.0.max(b.0) + radius).ceil() as usize).min(self.width.saturating_sub(1));
        let y1 = ((a.1.max(b.1) + radius).ceil() as usize).min(self.height.saturating_sub(1));
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let r2 = radius * radius;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (px, py) = (x as f64, y as f64);
                let t = if len2 > 0.0 {
                    (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let (qx, qy) = (a.0 + t * dx - px, a.1 + t * dy - py);
                if qx * qx + qy * qy <= r2 {
                    self.pix[y * self.width + x] = ink;
                }
            }
        }
    }
}

/// One glyph drawn with its top-left body corner at `(x, baseline - h)`.
/// Returns the glyph's horizontal extent.
fn draw_glyph<R: Rng>(canvas: &mut Canvas, style: &HandStyle, x: f64, baseline: f64, rng: &mut R) -> (f64, f64) {
    let scale = 1.0 + rng.gen_range(-style.size_jitter..=style.size_jitter);
    let h = style.char_height * scale;
    let w = h * style.char_aspect;
    let shear = style.slant_deg.to_radians().tan();
    let n = rng.gen_range(style.vertices.0..=style.vertices.1);
    // vertices sweep left to right with random heights, like a pen stroke
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let fx = (i as f64 + rng.gen_range(0.0..0.8)) / n as f64;
        let fy = rng.gen_range(0.0..1.0);
        let gy = baseline - fy * h;
        let gx = x + fx * w + (baseline - gy) * shear;
        pts.push((gx, gy));
    }
    let r = style.stroke_width / 2.0;
    for pair in pts.windows(2) {
        canvas.segment(pair[0], pair[1], r, style.ink);
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::MAX, f64::min) - r;
    let hi = pts.iter().map(|p| p.0).fold(f64::MIN, f64::max) + r;
    (lo, hi)
}

fn ink_bounds(canvas: &Canvas, x0: usize, y0: usize, x1: usize, y1: usize, paper: u8) -> Option<BBox> {
    let mut bb: Option<(usize, usize, usize, usize)> = None;
    for y in y0..y1.min(canvas.height) {
        for x in x0..x1.min(canvas.width) {
            if canvas.pix[y * canvas.width + x] != paper {
                bb = Some(match bb {
                    None => (x, y, x, y),
                    Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x), d.max(y)),
                });
            }
        }
    }
    bb.map(|(a, b, c, d)| BBox::new(a as i64, b as i64, c as i64 + 1, d as i64 + 1))
}

fn pad(b: BBox, p: i64, w: usize, h: usize) -> BBox {
    BBox::new((b.x0 - p).max(0), (b.y0 - p).max(0), (b.x1 + p).min(w as i64), (b.y1 + p).min(h as i64))
}

/// Renders one page of text in `style` and its line and word boxes.
pub fn render_page<R: Rng>(style: &HandStyle, spec: &PageSpec, page_index: usize, rng: &mut R) -> PageRecord {
    let mut canvas = Canvas::new(spec.width, spec.height, style.paper);
    let pitch = style.char_height * style.line_pitch;
    let left = spec.margin as f64;
    let right = (spec.width - spec.margin) as f64;
    let bottom = (spec.height - spec.margin) as f64;
    let mut baseline = spec.margin as f64 + style.char_height * 1.3;
    let mut lines = Vec::new();
    let shear_room = style.char_height * style.slant_deg.to_radians().tan().abs();
    while baseline <= bottom && lines.len() < spec.max_lines {
        let mut x = left;
        let mut words = Vec::new();
        let top = (baseline - style.char_height * 1.4).max(0.0) as usize;
        let bot = (baseline + style.stroke_width + 2.0) as usize;
        loop {
            let n = rng.gen_range(3..=7);
            let est = n as f64 * (style.char_height * style.char_aspect + style.char_gap) + shear_room;
            if x + est > right {
                break;
            }
            let start = x;
            for _ in 0..n {
                let (_, hi) = draw_glyph(&mut canvas, style, x, baseline, rng);
                x = hi.max(x + style.stroke_width) + style.char_gap;
            }
            let wx0 = (start - style.stroke_width).max(0.0) as usize;
            let wx1 = (x + shear_room) as usize;
            if let Some(b) = ink_bounds(&canvas, wx0, top, wx1, bot, style.paper) {
                words.push(pad(b, 2, spec.width, spec.height));
            }
            x += style.word_gap * style.char_height;
        }
        if !words.is_empty() {
            let lb = words.iter().skip(1).fold(words[0], |a, b| {
                BBox::new(a.x0.min(b.x0), a.y0.min(b.y0), a.x1.max(b.x1), a.y1.max(b.y1))
            });
            lines.push(LineBox { bbox: lb, words, page_index });
        }
        baseline += pitch;
    }
    PageRecord {
        page_index,
        image: Raster::new_gray(spec.width, spec.height, canvas.pix).expect("canvas size"),
        lines,
        hand_tag: Some(style.name.clone()),
    }
}

/// Pages `first..first + count` of one hand, each page from its own seeded
/// stream.
pub fn render_pages(style: &HandStyle, spec: &PageSpec, first: usize, count: usize, seed: u64) -> Vec<PageRecord> {
    (first..first + count)
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            render_page(style, spec, p, &mut rng)
        })
        .collect()
}

/// Writes `page_NNN.png` and `page_NNN.hocr` for every page.
pub fn write_corpus(dir: &Path, pages: &[PageRecord]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for p in pages {
        let stem = format!("page_{:03}", p.page_index);
        p.image.save_png(&dir.join(format!("{stem}.png")))?;
        std::fs::write(dir.join(format!("{stem}.hocr")), to_hocr(&p.lines))?;
    }
    Ok(())
}
