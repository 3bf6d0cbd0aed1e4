//! Run configuration and corpus loading.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{assemble_dataset, Dataset, ExtractConfig};
use crate::error::{Error, Result};
use crate::fuzzy::CmeansConfig;
use crate::hocr::{parse_hocr, PageRecord};
use crate::image::Raster;
use crate::reduce::ReducerKind;
use crate::report::ClusterSettings;
use crate::shift::ShiftProtocolConfig;

/// Inclusive page-number range with an optional hand tag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRange {
    pub first: usize,
    pub last: usize,
    #[serde(default)]
    pub hand: Option<String>,
}

impl PageRange {
    pub fn contains(&self, page: usize) -> bool {
        (self.first..=self.last).contains(&page)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub images_dir: Option<PathBuf>,
    /// Defaults to `images_dir`.
    #[serde(default)]
    pub hocr_dir: Option<PathBuf>,
    /// Pages to load; empty means every page, untagged.
    #[serde(default)]
    pub pages: Vec<PageRange>,
    #[serde(default)]
    pub extract: ExtractConfig,
    #[serde(default = "default_reducers")]
    pub reducers: Vec<ReducerKind>,
    #[serde(default = "default_centers")]
    pub centers: Vec<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub cmeans: CmeansConfig,
    #[serde(default)]
    pub shift: ShiftProtocolConfig,
    /// Master seed. Required, either here or on the command line.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_reducers() -> Vec<ReducerKind> {
    vec![ReducerKind::Pca]
}

fn default_centers() -> Vec<usize> {
    vec![2]
}

fn default_k() -> usize {
    2
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            images_dir: None,
            hocr_dir: None,
            pages: Vec::new(),
            extract: ExtractConfig::default(),
            reducers: default_reducers(),
            centers: default_centers(),
            k: default_k(),
            cmeans: CmeansConfig::default(),
            shift: ShiftProtocolConfig::default(),
            seed: None,
            out_dir: default_out(),
            workers: None,
        }
    }
}

impl RunConfig {
    /// Reads TOML or JSON, chosen by extension (`.json` is JSON, anything
    /// else TOML). Relative paths are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut cfg: Self = if is_json {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        if let Some(base) = path.parent() {
            let rebase = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            for p in [cfg.images_dir.as_mut(), cfg.hocr_dir.as_mut(), Some(&mut cfg.out_dir)].into_iter().flatten() {
                rebase(p);
            }
        }
        Ok(cfg)
    }

    /// The master seed, copied into every seeded stage.
    pub fn resolve_seed(&mut self, cli: Option<u64>) -> Result<u64> {
        let seed = cli
            .or(self.seed)
            .ok_or_else(|| Error::Config("a seed is required (config `seed` or --seed)".into()))?;
        self.seed = Some(seed);
        self.extract.seed = seed;
        self.shift.seed = seed;
        Ok(seed)
    }

    pub fn cluster_settings(&self, reducer: ReducerKind, centers: usize) -> ClusterSettings {
        ClusterSettings {
            reducer,
            k: self.k,
            centers,
            cmeans: self.cmeans.clone(),
            seed: self.seed.unwrap_or(0),
        }
    }

    fn hand_for(&self, page: usize) -> Option<Option<String>> {
        if self.pages.is_empty() {
            return Some(None);
        }
        self.pages.iter().find(|r| r.contains(page)).map(|r| r.hand.clone())
    }
}

/// Trailing decimal digits of a file stem, if any.
pub fn page_number(stem: &str) -> Option<usize> {
    let digits: String = stem
        .chars()
        .rev()
        .take_while(char::is_ascii_digit)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    digits.parse().ok()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageFile {
    pub page: usize,
    pub image: PathBuf,
    pub hocr: PathBuf,
}

/// Pairs `<stem>.png` images with `<stem>.hocr` (or `.html`) layouts. Page
/// numbers come from the trailing digits of the stem; stems without digits
/// are numbered by position after sorting.
pub fn discover_pages(images_dir: &Path, hocr_dir: &Path) -> Result<(Vec<PageFile>, Vec<String>)> {
    let mut images: Vec<PathBuf> = std::fs::read_dir(images_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")))
        .collect();
    images.sort();
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for (pos, img) in images.into_iter().enumerate() {
        let stem = img.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let hocr = ["hocr", "html"]
            .iter()
            .map(|ext| hocr_dir.join(format!("{stem}.{ext}")))
            .find(|p| p.exists());
        match hocr {
            Some(hocr) => files.push(PageFile {
                page: page_number(&stem).unwrap_or(pos + 1),
                image: img,
                hocr,
            }),
            None => warnings.push(format!("{}: no matching hOCR file, skipped", img.display())),
        }
    }
    files.sort_by_key(|f| f.page);
    if let Some(w) = files.windows(2).find(|w| w[0].page == w[1].page) {
        return Err(Error::Config(format!(
            "page number {} is used by both {} and {}",
            w[0].page,
            w[0].image.display(),
            w[1].image.display()
        )));
    }
    Ok((files, warnings))
}

fn load_page(f: &PageFile, hand: Option<String>) -> std::result::Result<(PageRecord, Vec<String>), String> {
    let image = Raster::load(&f.image).map_err(|e| format!("{}: {e}, page skipped", f.image.display()))?;
    let text = std::fs::read_to_string(&f.hocr).map_err(|e| format!("{}: {e}, page skipped", f.hocr.display()))?;
    let parsed = parse_hocr(&text, f.page).map_err(|e| format!("{}: {e}, page skipped", f.hocr.display()))?;
    let notes = parsed
        .issues
        .iter()
        .map(|i| format!("{}: byte {}: {}", f.hocr.display(), i.offset, i.message))
        .collect();
    Ok((
        PageRecord {
            page_index: f.page,
            image,
            lines: parsed.lines,
            hand_tag: hand,
        },
        notes,
    ))
}

/// Pages and the problems met while loading them. Unreadable pages are
/// skipped and reported, not fatal.
#[derive(Debug, Default)]
pub struct LoadedCorpus {
    pub pages: Vec<PageRecord>,
    pub warnings: Vec<String>,
}

pub fn load_corpus(cfg: &RunConfig) -> Result<LoadedCorpus> {
    let images_dir = cfg
        .images_dir
        .as_deref()
        .ok_or_else(|| Error::Config("`images_dir` is not set".into()))?;
    if !images_dir.is_dir() {
        return Err(Error::Config(format!("{} is not a directory", images_dir.display())));
    }
    let hocr_dir = cfg.hocr_dir.as_deref().unwrap_or(images_dir);
    let (files, mut warnings) = discover_pages(images_dir, hocr_dir)?;
    let wanted: Vec<(PageFile, Option<String>)> = files
        .into_iter()
        .filter_map(|f| cfg.hand_for(f.page).map(|h| (f, h)))
        .collect();
    let loaded: Vec<_> = wanted.par_iter().map(|(f, h)| load_page(f, h.clone())).collect();
    let mut pages = Vec::new();
    for r in loaded {
        match r {
            Ok((p, notes)) => {
                warnings.extend(notes);
                pages.push(p);
            }
            Err(w) => warnings.push(w),
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(LoadedCorpus { pages, warnings })
}

#[derive(Debug)]
pub struct ExtractRun {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

/// Loads the configured pages and extracts their rows.
pub fn run_extract(cfg: &RunConfig) -> Result<ExtractRun> {
    let corpus = load_corpus(cfg)?;
    if corpus.pages.is_empty() {
        return Err(Error::NoRows);
    }
    let dataset = assemble_dataset(&corpus.pages, &cfg.extract)?;
    Ok(ExtractRun {
        dataset,
        warnings: corpus.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{render_pages, write_corpus, HandStyle, PageSpec};

    #[test]
    fn page_numbers_from_stems() {
        assert_eq!(page_number("page_012"), Some(12));
        assert_eq!(page_number("scan7b"), None);
        assert_eq!(page_number("p3"), Some(3));
    }

    #[test]
    fn toml_and_json_configs() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("run.toml");
        std::fs::write(
            &t,
            r#"
images_dir = "pages"
seed = 9
reducers = ["pca", "kpca_rbf"]
centers = [2, 3]

[[pages]]
first = 1
last = 3
hand = "A"

[extract]
margin_fraction = 0.1
selected = ["orientation", "height"]

[shift]
tolerance_pct = 7.5
"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&t).unwrap();
        assert_eq!(cfg.images_dir, Some(dir.path().join("pages")));
        assert_eq!(cfg.out_dir, dir.path().join("out"));
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.reducers, vec![ReducerKind::Pca, ReducerKind::KpcaRbf]);
        assert_eq!(cfg.pages[0].hand.as_deref(), Some("A"));
        assert_eq!(cfg.extract.margin_fraction, 0.1);
        assert_eq!(cfg.shift.tolerance_pct, 7.5);
        assert_eq!(cfg.shift.page_rows, 50);
        let j = dir.path().join("run.json");
        std::fs::write(&j, serde_json::to_string(&cfg).unwrap()).unwrap();
        // absolute paths are kept as written
        assert_eq!(RunConfig::load(&j).unwrap(), cfg);
        std::fs::write(&t, "sed = 1\n").unwrap();
        assert!(matches!(RunConfig::load(&t), Err(Error::Config(_))));
    }

    #[test]
    fn seed_is_mandatory_and_propagates() {
        let mut cfg = RunConfig::default();
        assert!(cfg.resolve_seed(None).is_err());
        assert_eq!(cfg.resolve_seed(Some(4)).unwrap(), 4);
        assert_eq!((cfg.extract.seed, cfg.shift.seed), (4, 4));
        cfg.seed = Some(5);
        assert_eq!(cfg.resolve_seed(Some(6)).unwrap(), 6);
    }

    #[test]
    fn corpus_with_ranges_and_a_corrupt_page() {
        let dir = tempfile::tempdir().unwrap();
        let spec = PageSpec { width: 400, height: 300, margin: 30, max_lines: 3 };
        write_corpus(dir.path(), &render_pages(&HandStyle::hand_a(), &spec, 1, 3, 2)).unwrap();
        std::fs::write(dir.path().join("page_002.png"), b"\x89PNG\r\n\x1a\ntruncated").unwrap();
        std::fs::write(dir.path().join("page_009.png"), std::fs::read(dir.path().join("page_001.png")).unwrap()).unwrap();
        let mut cfg = RunConfig {
            images_dir: Some(dir.path().to_path_buf()),
            pages: vec![
                PageRange { first: 1, last: 2, hand: Some("A".into()) },
                PageRange { first: 3, last: 3, hand: Some("B".into()) },
            ],
            ..RunConfig::default()
        };
        cfg.resolve_seed(Some(1)).unwrap();
        let c = load_corpus(&cfg).unwrap();
        let got: Vec<(usize, Option<&str>)> = c.pages.iter().map(|p| (p.page_index, p.hand_tag.as_deref())).collect();
        assert_eq!(got, vec![(1, Some("A")), (3, Some("B"))]);
        assert_eq!(c.warnings.len(), 2);
        assert!(c.warnings.iter().any(|w| w.contains("page_002.png")));
        assert!(c.warnings.iter().any(|w| w.contains("page_009.png") && w.contains("hOCR")));
        let run = run_extract(&cfg).unwrap();
        assert_eq!(run.dataset.hands(), vec!["A".to_string(), "B".to_string()]);
    }
}
