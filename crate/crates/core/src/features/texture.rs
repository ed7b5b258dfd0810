//! Texture features: GLCM, LBP, PCA over time, and keyframe consistency.

use nalgebra::{DMatrix, SymmetricEigen};

use super::statistical::tiles;
use super::stats::{entropy_of_counts, pearson, summary_stats, SUMMARY_NAMES};
use crate::registry::FeatureVector;
use crate::tensor::Inds;

pub const GRAY_LEVELS: usize = 16;
pub const PCA_COMPONENTS: usize = 7;
/// Relative eigenvalue floor below which a component counts as beyond rank.
const RANK_TOL: f64 = 1e-10;

pub fn keyframes(len: usize) -> [usize; 3] {
    [0, len / 2, len - 1]
}

/// Min-max quantization to `levels` gray levels; a flat map is all level 0.
pub fn quantize(map: &[f64], levels: usize) -> Vec<usize> {
    let (lo, hi) = map
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let range = hi - lo;
    if !(range > 0.0) {
        return vec![0; map.len()];
    }
    map.iter()
        .map(|&x| (((x - lo) / range * levels as f64).floor() as usize).min(levels - 1))
        .collect()
}

/// Normalized symmetric co-occurrence matrix for offset `(dy, dx)`.
pub fn glcm(q: &[usize], h: usize, w: usize, levels: usize, dy: usize, dx: usize) -> Vec<f64> {
    let mut m = vec![0.0; levels * levels];
    let mut total = 0.0;
    for y in 0..h.saturating_sub(dy) {
        for x in 0..w.saturating_sub(dx) {
            let (a, b) = (q[y * w + x], q[(y + dy) * w + x + dx]);
            m[a * levels + b] += 1.0;
            m[b * levels + a] += 1.0;
            total += 2.0;
        }
    }
    if total > 0.0 {
        m.iter_mut().for_each(|v| *v /= total);
    }
    m
}

/// `[contrast, dissimilarity, homogeneity, energy]`.
pub fn glcm_stats(p: &[f64], levels: usize) -> [f64; 4] {
    let mut s = [0.0; 4];
    let mut asm = 0.0;
    for i in 0..levels {
        for j in 0..levels {
            let v = p[i * levels + j];
            let d = i as f64 - j as f64;
            s[0] += v * d * d;
            s[1] += v * d.abs();
            s[2] += v / (1.0 + d * d);
            asm += v * v;
        }
    }
    s[3] = asm.sqrt();
    s
}

pub fn glcm_features(inds: &Inds) -> FeatureVector {
    let (h, w) = (inds.height(), inds.width());
    let mut fv = FeatureVector::new();
    for t in keyframes(inds.len()) {
        let q = quantize(&inds.channel_mean(t), GRAY_LEVELS);
        for (angle, (dy, dx)) in [("0", (0, 1)), ("90", (1, 0))] {
            let p = glcm(&q, h, w, GRAY_LEVELS, dy, dx);
            let stats = glcm_stats(&p, GRAY_LEVELS);
            for (name, v) in ["contrast", "dissimilarity", "homogeneity", "energy"].iter().zip(stats) {
                fv.push(format!("texture.glcm.f{t}.a{angle}.{name}"), v);
            }
        }
    }
    fv
}

/// Neighbor offsets clockwise from the top-left; neighbor `k` sets bit `k`.
const LBP_NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
];

/// LBP codes of interior pixels, row-major over `(h-2) x (w-2)`.
pub fn lbp_codes(map: &[f64], h: usize, w: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(h.saturating_sub(2) * w.saturating_sub(2));
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let c = map[y * w + x];
            let mut code = 0u8;
            for (k, (dy, dx)) in LBP_NEIGHBORS.iter().enumerate() {
                let v = map[(y as isize + dy) as usize * w + (x as isize + dx) as usize];
                if v >= c {
                    code |= 1 << k;
                }
            }
            out.push(code);
        }
    }
    out
}

pub fn is_uniform(code: u8) -> bool {
    (code ^ code.rotate_right(1)).count_ones() <= 2
}

pub fn lbp_features(inds: &Inds) -> FeatureVector {
    let (h, w) = (inds.height(), inds.width());
    let mut counts = vec![0usize; 256];
    let mut total = 0;
    for t in keyframes(inds.len()) {
        for code in lbp_codes(&inds.channel_mean(t), h, w) {
            counts[code as usize] += 1;
            total += 1;
        }
    }
    let mut fv = FeatureVector::new();
    let (entropy, max_mass, nonzero, uniform) = if total == 0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let n = total as f64;
        (
            entropy_of_counts(&counts, total),
            *counts.iter().max().unwrap() as f64 / n,
            counts.iter().filter(|&&c| c > 0).count() as f64,
            (0..=255u8)
                .filter(|&c| is_uniform(c))
                .map(|c| counts[c as usize])
                .sum::<usize>() as f64
                / n,
        )
    };
    fv.push("texture.lbp.entropy", entropy);
    fv.push("texture.lbp.max_mass", max_mass);
    fv.push("texture.lbp.nonzero_bins", nonzero as f64);
    fv.push("texture.lbp.uniform_mass", uniform);
    fv
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// One score vector (length = time steps) per retained component.
    pub scores: Vec<Vec<f64>>,
    pub ratios: Vec<f64>,
}

/// Rows are time steps; columns z-scored, ones with zero variance set to 0.
pub fn zscore_matrix(inds: &Inds) -> DMatrix<f64> {
    let (t, d) = (inds.len(), inds.diffs()[0].len());
    let mut m = DMatrix::from_fn(t, d, |r, c| inds.diffs()[r].data()[c]);
    for mut col in m.column_iter_mut() {
        let mu = col.mean();
        let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / t as f64;
        if super::stats::is_degenerate(var, mu) {
            col.fill(0.0);
        } else {
            let sd = var.sqrt();
            col.iter_mut().for_each(|v| *v = (*v - mu) / sd);
        }
    }
    m
}

pub fn pca(inds: &Inds) -> PcaResult {
    let x = zscore_matrix(inds);
    let t = x.nrows();
    let gram = &x * x.transpose();
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let lead = eig.eigenvalues[order[0]].max(0.0);
    let mut scores = Vec::with_capacity(PCA_COMPONENTS);
    let mut ratios = Vec::with_capacity(PCA_COMPONENTS);
    for k in 0..PCA_COMPONENTS {
        let lambda = order.get(k).map_or(0.0, |&i| eig.eigenvalues[i]);
        if k >= t || lambda <= RANK_TOL * lead || lead <= f64::MIN_POSITIVE {
            scores.push(vec![0.0; t]);
            ratios.push(0.0);
            continue;
        }
        let u = eig.eigenvectors.column(order[k]);
        let mut s: Vec<f64> = u.iter().map(|v| v * lambda.sqrt()).collect();
        // Deterministic sign: the largest-magnitude score is positive.
        let pivot = s.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        if pivot < 0.0 {
            s.iter_mut().for_each(|v| *v = -*v);
        }
        scores.push(s);
        ratios.push(lambda / total);
    }
    PcaResult { scores, ratios }
}

pub fn pca_features(inds: &Inds) -> FeatureVector {
    let r = pca(inds);
    let mut fv = FeatureVector::new();
    for (k, (s, ratio)) in r.scores.iter().zip(&r.ratios).enumerate() {
        let prefix = format!("texture.pca.c{k}");
        let stats = summary_stats(s).unwrap_or_default();
        for (name, v) in SUMMARY_NAMES.iter().zip(stats.as_array()) {
            fv.put(&prefix, name, v);
        }
        fv.put(&prefix, "energy", s.iter().map(|v| v * v).sum());
        fv.put(&prefix, "l1", s.iter().map(|v| v.abs()).sum());
        fv.put(&prefix, "ratio", *ratio);
    }
    fv
}

/// Tile-mean SSIM of two `h x w` maps over 8x8 tiles.
pub fn ssim(a: &[f64], b: &[f64], h: usize, w: usize) -> f64 {
    let (lo, hi) = a
        .iter()
        .chain(b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &x| (l.min(x), u.max(x)));
    let range = hi - lo;
    if !(range > 0.0) {
        return if a == b { 1.0 } else { 0.0 };
    }
    let c1 = (0.01 * range).powi(2);
    let c2 = (0.03 * range).powi(2);
    let grid = tiles(h, w);
    let mut acc = 0.0;
    for &(y0, x0, th, tw) in &grid {
        let n = (th * tw) as f64;
        let (mut sa, mut sb) = (0.0, 0.0);
        for y in y0..y0 + th {
            for x in x0..x0 + tw {
                sa += a[y * w + x];
                sb += b[y * w + x];
            }
        }
        let (ma, mb) = (sa / n, sb / n);
        let (mut vaa, mut vbb, mut vab) = (0.0, 0.0, 0.0);
        for y in y0..y0 + th {
            for x in x0..x0 + tw {
                let (da, db) = (a[y * w + x] - ma, b[y * w + x] - mb);
                vaa += da * da;
                vbb += db * db;
                vab += da * db;
            }
        }
        let (vaa, vbb, vab) = (vaa / n, vbb / n, vab / n);
        acc += ((2.0 * ma * mb + c1) * (2.0 * vab + c2))
            / ((ma * ma + mb * mb + c1) * (vaa + vbb + c2));
    }
    acc / grid.len() as f64
}

pub fn keyframe_consistency_features(inds: &Inds) -> FeatureVector {
    let (h, w) = (inds.height(), inds.width());
    let [k0, k1, k2] = keyframes(inds.len());
    let mut fv = FeatureVector::new();
    for (i, j) in [(k0, k1), (k1, k2), (k0, k2)] {
        let (a, b) = (inds.channel_mean(i), inds.channel_mean(j));
        fv.push(format!("texture.consistency.f{i}_{j}.pearson"), pearson(&a, &b));
        fv.push(format!("texture.consistency.f{i}_{j}.ssim"), ssim(&a, &b, h, w));
    }
    fv
}

pub fn texture_features(inds: &Inds) -> FeatureVector {
    let mut fv = glcm_features(inds);
    fv.append(lbp_features(inds));
    fv.append(pca_features(inds));
    fv.append(keyframe_consistency_features(inds));
    fv
}
