//! Graph-based segmentation (Felzenszwalb & Huttenlocher), following the
//! scikit-image conventions: intensities in `[0, 1]`, `scale` expressed on
//! the 0-255 range, 8-connected grid graph.

use crate::imgio::Image;
use crate::raster::{gaussian_blur, Grid};

#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    /// Labels `0..count` in row-major order of first appearance.
    pub labels: Grid<u32>,
    pub count: usize,
}

struct Forest {
    parent: Vec<usize>,
    size: Vec<usize>,
    internal: Vec<f64>,
}

impl Forest {
    fn new(n: usize) -> Self {
        Forest {
            parent: (0..n).collect(),
            size: vec![1; n],
            internal: vec![0.0; n],
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[i] != root {
            let next = self.parent[i];
            self.parent[i] = root;
            i = next;
        }
        root
    }

    /// Joins two roots under the smaller index and returns it.
    fn join(&mut self, a: usize, b: usize) -> usize {
        let (keep, drop) = if a < b { (a, b) } else { (b, a) };
        self.parent[drop] = keep;
        self.size[keep] += self.size[drop];
        keep
    }
}

pub fn felzenszwalb_segment(
    image: &Image,
    scale: f64,
    sigma: f64,
    min_size: usize,
) -> Segmentation {
    let (w, h) = image.dims();
    let smoothed;
    let data = if sigma > 0.0 {
        let radius = (4.0 * sigma + 0.5) as usize;
        smoothed = gaussian_blur(image.data(), w, h, 3, sigma, radius);
        &smoothed[..]
    } else {
        image.data()
    };
    let px = |i: usize| &data[i * 3..i * 3 + 3];
    let dist = |a: usize, b: usize| {
        let (p, q) = (px(a), px(b));
        (0..3)
            .map(|c| (p[c] as f64 - q[c] as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    };

    // right, down, down-right, up-right
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(4 * w * h);
    for y in 0..h {
        for x in 1..w {
            edges.push((y * w + x, y * w + x - 1));
        }
    }
    for y in 1..h {
        for x in 0..w {
            edges.push((y * w + x, (y - 1) * w + x));
        }
    }
    for y in 1..h {
        for x in 1..w {
            edges.push((y * w + x, (y - 1) * w + x - 1));
        }
    }
    for y in 0..h.saturating_sub(1) {
        for x in 1..w {
            edges.push((y * w + x, (y + 1) * w + x - 1));
        }
    }
    let costs: Vec<f64> = edges.iter().map(|&(a, b)| dist(a, b)).collect();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));

    let scale = scale / 255.0;
    let mut forest = Forest::new(w * h);
    for &e in &order {
        let (a, b) = (forest.find(edges[e].0), forest.find(edges[e].1));
        if a == b {
            continue;
        }
        let ta = forest.internal[a] + scale / forest.size[a] as f64;
        let tb = forest.internal[b] + scale / forest.size[b] as f64;
        if costs[e] < ta.min(tb) {
            let r = forest.join(a, b);
            forest.internal[r] = costs[e];
        }
    }
    for &e in &order {
        let (a, b) = (forest.find(edges[e].0), forest.find(edges[e].1));
        if a != b && (forest.size[a] < min_size || forest.size[b] < min_size) {
            forest.join(a, b);
        }
    }

    let mut relabel = vec![u32::MAX; w * h];
    let mut count = 0u32;
    let mut labels = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let r = forest.find(i);
        if relabel[r] == u32::MAX {
            relabel[r] = count;
            count += 1;
        }
        labels.push(relabel[r]);
    }
    Segmentation {
        labels: Grid::from_vec(w, h, labels).expect("label count matches pixels"),
        count: count as usize,
    }
}
