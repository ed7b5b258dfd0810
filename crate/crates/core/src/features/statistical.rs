//! Higher-order moments, L-moments, local variability and Sobel edge dynamics.

use super::stats::{central_moment, entropy_of_counts, is_degenerate, mean, pearson, SummaryStats};
use crate::error::{Error, Result};
use crate::registry::FeatureVector;
use crate::tensor::Inds;

pub const WINDOW: usize = 8;
pub const WINDOW_BINS: usize = 16;
const LMOMENT_EPS: f64 = 1e-12;

/// Standardized central moments of orders 3 through 6.
pub fn standardized_moments(x: &[f64]) -> [f64; 4] {
    let m = mean(x);
    let var = central_moment(x, m, 2);
    if x.is_empty() || is_degenerate(var, m) {
        return [0.0; 4];
    }
    let sd = var.sqrt();
    let mut out = [0.0; 4];
    for (k, o) in (3..=6).zip(out.iter_mut()) {
        *o = central_moment(x, m, k) / sd.powi(k);
    }
    out
}

fn emit_moments(fv: &mut FeatureVector, prefix: &str, m: [f64; 4]) {
    for (k, v) in (3..=6).zip(m) {
        fv.push(format!("{prefix}.m{k}"), v);
    }
}

pub fn higher_moment_features(inds: &Inds) -> FeatureVector {
    let mut fv = FeatureVector::new();
    let all: Vec<f64> = inds.values().collect();
    emit_moments(&mut fv, "histat.global", standardized_moments(&all));

    let per_frame: Vec<[f64; 4]> = inds
        .diffs()
        .iter()
        .map(|d| standardized_moments(d.data()))
        .collect();
    for k in 0..4 {
        let series: Vec<f64> = per_frame.iter().map(|m| m[k]).collect();
        SummaryStats::emit_series(&mut fv, &format!("histat.frame.m{}", k + 3), &series);
    }

    for c in 0..inds.channels() {
        let pooled: Vec<f64> = (0..inds.len())
            .flat_map(|t| inds.plane(t, c).iter().copied())
            .collect();
        emit_moments(&mut fv, &format!("histat.channel{c}"), standardized_moments(&pooled));
    }

    let lm = l_moments(&all).unwrap_or_default();
    fv.push("histat.lmom.l1", lm.l1);
    fv.push("histat.lmom.l2", lm.l2);
    fv.push("histat.lmom.t3", lm.t3);
    fv.push("histat.lmom.t4", lm.t4);
    fv
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LMomentSet {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    /// L-skewness.
    pub t3: f64,
    /// L-kurtosis.
    pub t4: f64,
}

/// Sample L-moments from probability-weighted moments of the sorted sample.
pub fn l_moments(sample: &[f64]) -> Result<LMomentSet> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "L-moments need at least 4 values, got {n}"
        )));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let nf = n as f64;
    let (mut b0, mut b1, mut b2, mut b3) = (0.0, 0.0, 0.0, 0.0);
    for (j, &v) in x.iter().enumerate() {
        let j = j as f64;
        b0 += v;
        b1 += v * j / (nf - 1.0);
        b2 += v * j * (j - 1.0) / ((nf - 1.0) * (nf - 2.0));
        b3 += v * j * (j - 1.0) * (j - 2.0) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0));
    }
    let (b0, b1, b2, b3) = (b0 / nf, b1 / nf, b2 / nf, b3 / nf);
    let l1 = b0;
    let l2 = 2.0 * b1 - b0;
    let l3 = 6.0 * b2 - 6.0 * b1 + b0;
    let l4 = 20.0 * b3 - 30.0 * b2 + 12.0 * b1 - b0;
    let (l2, l3, l4) = if x[0] == x[n - 1] { (0.0, 0.0, 0.0) } else { (l2, l3, l4) };
    let flat = l2 <= LMOMENT_EPS;
    Ok(LMomentSet {
        l1,
        l2,
        l3,
        l4,
        t3: if flat { 0.0 } else { l3 / l2 },
        t4: if flat { 0.0 } else { l4 / l2 },
    })
}

/// Non-overlapping `WINDOW x WINDOW` tiles of an `h x w` map (a smaller map is one tile).
pub fn tiles(h: usize, w: usize) -> Vec<(usize, usize, usize, usize)> {
    let (th, tw) = (WINDOW.min(h), WINDOW.min(w));
    let mut out = Vec::with_capacity((h / th) * (w / tw));
    for by in 0..h / th {
        for bx in 0..w / tw {
            out.push((by * th, bx * tw, th, tw));
        }
    }
    out
}

fn tile_values(map: &[f64], w: usize, (y0, x0, th, tw): (usize, usize, usize, usize)) -> Vec<f64> {
    let mut v = Vec::with_capacity(th * tw);
    for y in y0..y0 + th {
        v.extend_from_slice(&map[y * w + x0..y * w + x0 + tw]);
    }
    v
}

fn window_entropy(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !(hi > lo) {
        return 0.0;
    }
    let width = (hi - lo) / WINDOW_BINS as f64;
    let mut counts = [0usize; WINDOW_BINS];
    for &x in v {
        counts[(((x - lo) / width) as usize).min(WINDOW_BINS - 1)] += 1;
    }
    entropy_of_counts(&counts, v.len())
}

/// Per-frame window variances (outer index `t`).
pub fn window_variances(inds: &Inds) -> Vec<Vec<f64>> {
    let (h, w) = (inds.height(), inds.width());
    let grid = tiles(h, w);
    (0..inds.len())
        .map(|t| {
            let m = inds.channel_mean(t);
            grid.iter()
                .map(|&tile| {
                    let v = tile_values(&m, w, tile);
                    let mu = mean(&v);
                    let var = central_moment(&v, mu, 2);
                    if is_degenerate(var, mu) { 0.0 } else { var }
                })
                .collect()
        })
        .collect()
}

pub fn local_variability_features(inds: &Inds) -> FeatureVector {
    let (h, w) = (inds.height(), inds.width());
    let grid = tiles(h, w);
    let maps: Vec<Vec<f64>> = (0..inds.len()).map(|t| inds.channel_mean(t)).collect();
    let mut var_t = Vec::with_capacity(maps.len());
    let mut ent_t = Vec::with_capacity(maps.len());
    for vars in window_variances(inds) {
        var_t.push(mean(&vars));
    }
    for m in &maps {
        let ent: Vec<f64> = grid.iter().map(|&tile| window_entropy(&tile_values(m, w, tile))).collect();
        ent_t.push(mean(&ent));
    }
    let temporal_std: Vec<f64> = (0..h * w)
        .map(|s| {
            let traj: Vec<f64> = maps.iter().map(|m| m[s]).collect();
            let mu = mean(&traj);
            let var = central_moment(&traj, mu, 2);
            if is_degenerate(var, mu) { 0.0 } else { var.sqrt() }
        })
        .collect();
    let mut fv = FeatureVector::new();
    SummaryStats::emit_series(&mut fv, "localvar.window_var", &var_t);
    SummaryStats::emit_series(&mut fv, "localvar.window_entropy", &ent_t);
    SummaryStats::emit_series(&mut fv, "localvar.temporal_std", &temporal_std);
    fv
}

/// Sobel gradient magnitude with replicate borders, unnormalized kernels.
pub fn sobel_magnitude(map: &[f64], h: usize, w: usize) -> Vec<f64> {
    let at = |y: isize, x: isize| {
        let y = y.clamp(0, h as isize - 1) as usize;
        let x = x.clamp(0, w as isize - 1) as usize;
        map[y * w + x]
    };
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
            let gy = (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

pub fn sobel_edge_features(inds: &Inds) -> FeatureVector {
    let (h, w) = (inds.height(), inds.width());
    let edges: Vec<Vec<f64>> = (0..inds.len())
        .map(|t| sobel_magnitude(&inds.channel_mean(t), h, w))
        .collect();
    let r: Vec<f64> = edges.windows(2).map(|p| pearson(&p[0], &p[1])).collect();
    let mut fv = FeatureVector::new();
    for (k, v) in r.iter().enumerate() {
        fv.push(format!("edge.adjacent.{k}"), *v);
    }
    SummaryStats::emit_series(&mut fv, "edge.adjacent", &r);
    let means: Vec<f64> = edges.iter().map(|e| mean(e)).collect();
    SummaryStats::emit_series(&mut fv, "edge.magnitude", &means);
    fv
}

pub fn statistical_features(inds: &Inds) -> FeatureVector {
    let mut fv = higher_moment_features(inds);
    fv.append(local_variability_features(inds));
    fv.append(sobel_edge_features(inds));
    fv
}
