//! hOCR layout ingest: line and word boxes, page records, margin cropping.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Raster;

/// Axis-aligned box, `[x0, x1) x [y0, y1)` in page pixels, origin top-left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl BBox {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0
    }

    pub fn is_valid(&self) -> bool {
        self.x0 < self.x1 && self.y0 < self.y1
    }

    pub fn intersect(&self, other: &BBox) -> Option<BBox> {
        let b = BBox::new(
            self.x0.max(other.x0),
            self.y0.max(other.y0),
            self.x1.min(other.x1),
            self.y1.min(other.y1),
        );
        b.is_valid().then_some(b)
    }

    pub fn contains(&self, other: &BBox) -> bool {
        other.x0 >= self.x0 && other.y0 >= self.y0 && other.x1 <= self.x1 && other.y1 <= self.y1
    }

    pub fn translate(&self, dx: i64, dy: i64) -> BBox {
        BBox::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }

    fn as_array(&self) -> [i64; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }
}

/// A text line and the word boxes that follow it in the hOCR stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineBox {
    pub bbox: BBox,
    pub words: Vec<BBox>,
    pub page_index: usize,
}

/// Problem with one hOCR element; the element is skipped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HocrIssue {
    /// Byte offset of the offending start tag.
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct ParsedHocr {
    pub lines: Vec<LineBox>,
    pub issues: Vec<HocrIssue>,
}

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<([A-Za-z][A-Za-z0-9]*)\b([^>]*)>").unwrap())
}

fn attr_re(name: &str) -> Regex {
    Regex::new(&format!(r#"(?s)\b{name}\s*=\s*(?:"([^"]*)"|'([^']*)')"#)).unwrap()
}

fn class_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| attr_re("class"))
}

fn title_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| attr_re("title"))
}

fn attr<'a>(re: &Regex, attrs: &'a str) -> Option<&'a str> {
    re.captures(attrs)
        .and_then(|c| c.get(1).or_else(|| c.get(2)))
        .map(|m| m.as_str())
}

/// Extracts `bbox x0 y0 x1 y1` from an hOCR `title` property list.
pub fn parse_bbox_title(title: &str) -> std::result::Result<BBox, String> {
    let prop = title
        .split(';')
        .map(str::trim)
        .find(|p| p.starts_with("bbox"))
        .ok_or_else(|| format!("no bbox property in title `{title}`"))?;
    let nums: Vec<&str> = prop["bbox".len()..].split_whitespace().collect();
    if nums.len() != 4 {
        return Err(format!("bbox needs 4 coordinates, got `{prop}`"));
    }
    let mut v = [0i64; 4];
    for (slot, s) in v.iter_mut().zip(&nums) {
        *slot = s
            .parse()
            .map_err(|_| format!("bad bbox coordinate `{s}`"))?;
    }
    let b = BBox::new(v[0], v[1], v[2], v[3]);
    if !b.is_valid() {
        return Err(format!("degenerate bbox {:?}", v));
    }
    Ok(b)
}

/// Parses `ocr_line` and `ocrx_word` elements in document order.
///
/// Malformed elements are reported in [`ParsedHocr::issues`] and skipped.
/// Word boxes that stick out of their line are clipped to it. Producing no
/// lines at all is an error.
pub fn parse_hocr(text: &str, page_index: usize) -> Result<ParsedHocr> {
    let mut out = ParsedHocr::default();
    for caps in tag_re().captures_iter(text) {
        let attrs = caps.get(2).map_or("", |m| m.as_str());
        let Some(class) = attr(class_re(), attrs) else {
            continue;
        };
        let is_line = class.split_whitespace().any(|c| c == "ocr_line");
        let is_word = class.split_whitespace().any(|c| c == "ocrx_word");
        if !is_line && !is_word {
            continue;
        }
        let offset = caps.get(0).unwrap().start();
        let parsed = attr(title_re(), attrs)
            .ok_or_else(|| "missing title attribute".to_string())
            .and_then(parse_bbox_title);
        let bbox = match parsed {
            Ok(b) => b,
            Err(message) => {
                out.issues.push(HocrIssue { offset, message });
                continue;
            }
        };
        if is_line {
            out.lines.push(LineBox {
                bbox,
                words: Vec::new(),
                page_index,
            });
        } else if let Some(line) = out.lines.last_mut() {
            match bbox.intersect(&line.bbox) {
                Some(clipped) => line.words.push(clipped),
                None => out.issues.push(HocrIssue {
                    offset,
                    message: format!("word {:?} lies outside its line", bbox.as_array()),
                }),
            }
        } else {
            out.issues.push(HocrIssue {
                offset,
                message: "word before any line".into(),
            });
        }
    }
    if out.lines.is_empty() {
        return Err(Error::Hocr(format!(
            "no ocr_line elements parsed ({} issues)",
            out.issues.len()
        )));
    }
    Ok(out)
}

/// Minimal hOCR document carrying exactly the given lines and words.
pub fn to_hocr(lines: &[LineBox]) -> String {
    let mut s = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<html xmlns=\"http://www.w3.org/1999/xhtml\">\n<body>\n<div class='ocr_page'>\n",
    );
    for (li, l) in lines.iter().enumerate() {
        let b = l.bbox;
        s.push_str(&format!(
            "  <span class='ocr_line' id='line_{}_{}' title=\"bbox {} {} {} {}\">\n",
            l.page_index, li + 1, b.x0, b.y0, b.x1, b.y1
        ));
        for (wi, w) in l.words.iter().enumerate() {
            s.push_str(&format!(
                "    <span class='ocrx_word' id='word_{}_{}_{}' title='bbox {} {} {} {}; x_wconf 90'>w</span>\n",
                l.page_index, li + 1, wi + 1, w.x0, w.y0, w.x1, w.y1
            ));
        }
        s.push_str("  </span>\n");
    }
    s.push_str("</div>\n</body>\n</html>\n");
    s
}

/// One scanned page with its layout.
#[derive(Clone, Debug)]
pub struct PageRecord {
    pub page_index: usize,
    pub image: Raster,
    pub lines: Vec<LineBox>,
    pub hand_tag: Option<String>,
}

/// Number of pixels removed from each side by a margin crop.
fn margin(len: usize, fraction: f64) -> usize {
    (len as f64 * fraction).floor() as usize
}

/// Centre crop removing `fraction` of the width from the left and right and
/// `fraction` of the height from the top and bottom (floored to whole
/// pixels). Returns the cropped raster and the `(x, y)` offset of its origin.
pub fn crop_margins(image: &Raster, fraction: f64) -> Result<(Raster, (usize, usize))> {
    if !(0.0..0.5).contains(&fraction) {
        return Err(Error::CropFraction(fraction));
    }
    let (mx, my) = (margin(image.width, fraction), margin(image.height, fraction));
    let w = image.width.saturating_sub(2 * mx);
    let h = image.height.saturating_sub(2 * my);
    if w < 1 || h < 1 {
        return Err(Error::EmptyCrop { width: w, height: h });
    }
    Ok((image.window(mx, my, w, h), (mx, my)))
}

impl PageRecord {
    pub fn bounds(&self) -> BBox {
        BBox::new(0, 0, self.image.width as i64, self.image.height as i64)
    }

    /// Crops the page margins and moves the layout into the cropped frame.
    /// Boxes that fall entirely in the removed margin are dropped; boxes that
    /// straddle the crop edge are clipped.
    pub fn crop_margins(&self, fraction: f64) -> Result<PageRecord> {
        let (image, (dx, dy)) = crop_margins(&self.image, fraction)?;
        let frame = BBox::new(0, 0, image.width as i64, image.height as i64);
        let lines = self
            .lines
            .iter()
            .filter_map(|l| {
                let bbox = l.bbox.translate(-(dx as i64), -(dy as i64)).intersect(&frame)?;
                let words = l
                    .words
                    .iter()
                    .filter_map(|w| {
                        w.translate(-(dx as i64), -(dy as i64))
                            .intersect(&bbox)
                    })
                    .collect();
                Some(LineBox {
                    bbox,
                    words,
                    page_index: l.page_index,
                })
            })
            .collect();
        Ok(PageRecord {
            page_index: self.page_index,
            image,
            lines,
            hand_tag: self.hand_tag.clone(),
        })
    }
}

/// Sub-image for a bbox, with a note when the box had to be clipped.
#[derive(Clone, Debug)]
pub struct BBoxImage {
    pub image: Raster,
    /// Effective box after clipping to the page.
    pub bbox: BBox,
    pub warning: Option<String>,
}

/// Pixel-exact crop of `bbox` from the page. Out-of-bounds boxes are clipped
/// with a warning; a box that misses the page entirely is an error.
pub fn extract_bbox_image(page: &PageRecord, bbox: &BBox) -> Result<BBoxImage> {
    let clipped = bbox
        .intersect(&page.bounds())
        .ok_or(Error::EmptyIntersection(bbox.as_array()))?;
    let warning = (clipped != *bbox).then(|| {
        let msg = format!(
            "page {}: bbox {:?} clipped to {:?}",
            page.page_index,
            bbox.as_array(),
            clipped.as_array()
        );
        log::warn!("{msg}");
        msg
    });
    let image = page.image.window(
        clipped.x0 as usize,
        clipped.y0 as usize,
        clipped.width() as usize,
        clipped.height() as usize,
    );
    Ok(BBoxImage {
        image,
        bbox: clipped,
        warning,
    })
}
