//! Connected-component labelling.

use serde::{Deserialize, Serialize};

use super::raster::{BinaryImage, GrayImage, LabelImage};

/// Neighbourhood used when growing regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    /// Edge neighbours only (connectivity 1).
    Four,
    /// Edge and corner neighbours (connectivity 2).
    Eight,
}

impl Connectivity {
    pub fn from_rank(rank: u8) -> Option<Self> {
        match rank {
            1 => Some(Connectivity::Four),
            2 => Some(Connectivity::Eight),
            _ => None,
        }
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // slot 0 is unused so labels start at 1
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass union-find labelling of the foreground. Labels are numbered in
/// raster-scan order of each region's first pixel.
pub fn label_binary(bin: &BinaryImage, conn: Connectivity) -> LabelImage {
    let (w, h) = (bin.width, bin.height);
    let mut provisional = vec![0u32; w * h];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            if !bin.get(x, y) {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut n = 0;
            let mut push = |l: u32| {
                if l > 0 {
                    neighbours[n] = l;
                    n += 1;
                }
            };
            if x > 0 {
                push(provisional[y * w + x - 1]);
            }
            if y > 0 {
                push(provisional[(y - 1) * w + x]);
                if conn == Connectivity::Eight {
                    if x > 0 {
                        push(provisional[(y - 1) * w + x - 1]);
                    }
                    if x + 1 < w {
                        push(provisional[(y - 1) * w + x + 1]);
                    }
                }
            }
            let label = if n == 0 {
                sets.make()
            } else {
                let first = neighbours[0];
                for &other in &neighbours[1..n] {
                    sets.union(first, other);
                }
                first
            };
            provisional[y * w + x] = label;
        }
    }

    let mut remap = vec![0u32; sets.parent.len()];
    let mut count = 0u32;
    let mut labels = vec![0u32; w * h];
    for (i, &p) in provisional.iter().enumerate() {
        if p == 0 {
            continue;
        }
        let root = sets.find(p) as usize;
        if remap[root] == 0 {
            count += 1;
            remap[root] = count;
        }
        labels[i] = remap[root];
    }
    LabelImage {
        width: w,
        height: h,
        labels,
        count,
    }
}

/// Labels the ink of a gray image, thresholded at `ink_threshold` according
/// to its polarity (see [`GrayImage::ink_mask`]).
pub fn label_gray(img: &GrayImage, ink_threshold: u8, conn: Connectivity) -> LabelImage {
    label_binary(&img.ink_mask(ink_threshold), conn)
}
