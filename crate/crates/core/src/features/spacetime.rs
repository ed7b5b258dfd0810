//! Spatiotemporal features: energy distributions, gradient fusion, correlation
//! suite and channel interactions.

use super::stats::{autocorrelation, mean, mutual_information, pearson, SummaryStats};
use crate::registry::FeatureVector;
use crate::tensor::Inds;

/// Bins per marginal for the first/last mutual information.
pub const MI_BINS: usize = 32;
/// Patch edge for the frame-vs-patch energy correlations.
pub const PATCH: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile {
    pub e_global: f64,
    /// One entry per difference frame.
    pub e_temporal: Vec<f64>,
    /// Row-major `H x W`.
    pub e_spatial: Vec<f64>,
}

pub fn energy_profile(inds: &Inds) -> EnergyProfile {
    let (c, n) = (inds.channels(), inds.plane_len());
    let mut e_temporal = Vec::with_capacity(inds.len());
    let mut e_spatial = vec![0.0; n];
    for t in 0..inds.len() {
        let mut et = 0.0;
        for ch in 0..c {
            for (s, v) in e_spatial.iter_mut().zip(inds.plane(t, ch)) {
                let v2 = v * v;
                *s += v2;
                et += v2;
            }
        }
        e_temporal.push(et);
    }
    EnergyProfile {
        e_global: e_temporal.iter().sum(),
        e_temporal,
        e_spatial,
    }
}

pub fn energy_features(inds: &Inds) -> FeatureVector {
    let p = energy_profile(inds);
    let mut fv = FeatureVector::new();
    fv.push("energy.global", p.e_global);
    SummaryStats::emit_series(&mut fv, "energy.temporal", &p.e_temporal);
    SummaryStats::emit_series(&mut fv, "energy.spatial", &p.e_spatial);
    let diffs: Vec<f64> = p.e_temporal.windows(2).map(|w| w[1] - w[0]).collect();
    SummaryStats::emit_series(&mut fv, "energy.temporal_diff", &diffs);
    fv
}

/// First derivative along one axis: central in the interior, one-sided at the ends.
fn derivative(values: impl Fn(usize) -> f64, len: usize, k: usize) -> f64 {
    if len < 2 {
        0.0
    } else if k == 0 {
        values(1) - values(0)
    } else if k == len - 1 {
        values(k) - values(k - 1)
    } else {
        0.5 * (values(k + 1) - values(k - 1))
    }
}

/// Per-axis gradients over `(t, c, h, w)`, each stored `t`-major like the INDS.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub g_temporal: Vec<f64>,
    pub g_spatial_h: Vec<f64>,
    pub g_spatial_w: Vec<f64>,
    pub g_magnitude: Vec<f64>,
}

pub fn gradient_field(inds: &Inds) -> GradientField {
    let (tn, cn, hn, wn) = (inds.len(), inds.channels(), inds.height(), inds.width());
    let total = tn * cn * hn * wn;
    let mut g = GradientField {
        g_temporal: Vec::with_capacity(total),
        g_spatial_h: Vec::with_capacity(total),
        g_spatial_w: Vec::with_capacity(total),
        g_magnitude: Vec::with_capacity(total),
    };
    for t in 0..tn {
        for c in 0..cn {
            for h in 0..hn {
                for w in 0..wn {
                    let gt = derivative(|k| inds.at(k, c, h, w), tn, t);
                    let gh = derivative(|k| inds.at(t, c, k, w), hn, h);
                    let gw = derivative(|k| inds.at(t, c, h, k), wn, w);
                    g.g_temporal.push(gt);
                    g.g_spatial_h.push(gh);
                    g.g_spatial_w.push(gw);
                    g.g_magnitude.push((gt * gt + gh * gh + gw * gw).sqrt());
                }
            }
        }
    }
    g
}

fn mean_abs(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64
    }
}

pub fn gradient_features(inds: &Inds) -> FeatureVector {
    let g = gradient_field(inds);
    let mut fv = FeatureVector::new();
    SummaryStats::emit_series(&mut fv, "gradient.magnitude", &g.g_magnitude);
    fv.push("gradient.temporal.mean_abs", mean_abs(&g.g_temporal));
    fv.push("gradient.spatial_h.mean_abs", mean_abs(&g.g_spatial_h));
    fv.push("gradient.spatial_w.mean_abs", mean_abs(&g.g_spatial_w));
    fv
}

/// Non-overlapping patch energies of one `H x W` energy map (edge remainders dropped;
/// a map smaller than a patch is one patch).
fn patch_energies(map: &[f64], h: usize, w: usize) -> Vec<f64> {
    let (ph, pw) = (PATCH.min(h), PATCH.min(w));
    let mut out = Vec::new();
    for by in 0..h / ph {
        for bx in 0..w / pw {
            let mut e = 0.0;
            for y in by * ph..(by + 1) * ph {
                e += map[y * w + bx * pw..y * w + (bx + 1) * pw].iter().sum::<f64>();
            }
            out.push(e);
        }
    }
    out
}

pub fn correlation_features(inds: &Inds) -> FeatureVector {
    let (tn, cn, hn, wn) = (inds.len(), inds.channels(), inds.height(), inds.width());
    let mut fv = FeatureVector::new();

    let adjacent: Vec<f64> = (0..tn - 1)
        .map(|t| pearson(inds.diffs()[t].data(), inds.diffs()[t + 1].data()))
        .collect();
    for (t, r) in adjacent.iter().enumerate() {
        fv.push(format!("correlation.adjacent.{t}"), *r);
    }
    SummaryStats::emit_series(&mut fv, "correlation.adjacent", &adjacent);

    // Site trajectories on channel-averaged maps against the global mean trajectory.
    let maps: Vec<Vec<f64>> = (0..tn).map(|t| inds.channel_mean(t)).collect();
    let global: Vec<f64> = maps.iter().map(|m| mean(m)).collect();
    let site_r: Vec<f64> = (0..hn * wn)
        .map(|s| {
            let traj: Vec<f64> = maps.iter().map(|m| m[s]).collect();
            pearson(&traj, &global)
        })
        .collect();
    SummaryStats::emit_series(&mut fv, "correlation.site_temporal", &site_r);

    let frame_means: Vec<f64> = inds.diffs().iter().map(|d| mean(d.data())).collect();
    for lag in 1..=3 {
        fv.push(
            format!("correlation.autocorr_t.lag{lag}"),
            autocorrelation(&frame_means, lag),
        );
    }

    let (mut acc_h, mut acc_w) = (0.0, 0.0);
    for t in 0..tn {
        for c in 0..cn {
            let p = inds.plane(t, c);
            if hn > 1 {
                acc_h += pearson(&p[..(hn - 1) * wn], &p[wn..]);
            }
            if wn > 1 {
                let (a, b): (Vec<f64>, Vec<f64>) = (0..hn)
                    .flat_map(|y| (0..wn - 1).map(move |x| (y, x)))
                    .map(|(y, x)| (p[y * wn + x], p[y * wn + x + 1]))
                    .unzip();
                acc_w += pearson(&a, &b);
            }
        }
    }
    let planes = (tn * cn) as f64;
    fv.push("correlation.autocorr_h", acc_h / planes);
    fv.push("correlation.autocorr_w", acc_w / planes);

    fv.push(
        "correlation.mi_first_last",
        mutual_information(inds.diffs()[0].data(), inds.diffs()[tn - 1].data(), MI_BINS),
    );

    let profile = energy_profile(inds);
    let mut patch_mean = Vec::with_capacity(tn);
    let mut patch_max = Vec::with_capacity(tn);
    let mut patch_std = Vec::with_capacity(tn);
    for t in 0..tn {
        let mut emap = vec![0.0; hn * wn];
        for c in 0..cn {
            for (e, v) in emap.iter_mut().zip(inds.plane(t, c)) {
                *e += v * v;
            }
        }
        let pe = patch_energies(&emap, hn, wn);
        let m = mean(&pe);
        patch_mean.push(m);
        patch_max.push(pe.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        patch_std.push(super::stats::variance(&pe).sqrt());
    }
    fv.push("correlation.cross_patch_mean", pearson(&profile.e_temporal, &patch_mean));
    fv.push("correlation.cross_patch_max", pearson(&profile.e_temporal, &patch_max));
    fv.push("correlation.cross_patch_std", pearson(&profile.e_temporal, &patch_std));
    fv
}

/// Off-diagonal channel correlations per difference frame, `(i, j)` pairs with `i < j`.
pub fn channel_correlations(inds: &Inds) -> Vec<Vec<f64>> {
    let cn = inds.channels();
    (0..inds.len())
        .map(|t| {
            let mut v = Vec::with_capacity(cn * (cn - 1) / 2);
            for i in 0..cn {
                for j in i + 1..cn {
                    v.push(pearson(inds.plane(t, i), inds.plane(t, j)));
                }
            }
            v
        })
        .collect()
}

pub fn channel_interaction_features(inds: &Inds) -> FeatureVector {
    let cn = inds.channels();
    let mut fv = FeatureVector::new();
    let per_frame = channel_correlations(inds);
    let pooled: Vec<f64> = per_frame.iter().flatten().copied().collect();
    SummaryStats::emit_series(&mut fv, "channel.corr", &pooled);
    let mut k = 0;
    for i in 0..cn {
        for j in i + 1..cn {
            let series: Vec<f64> = per_frame.iter().map(|f| f[k]).collect();
            fv.push(format!("channel.pair{i}_{j}.mean"), mean(&series));
            fv.push(
                format!("channel.pair{i}_{j}.std_t"),
                super::stats::variance(&series).sqrt(),
            );
            k += 1;
        }
    }
    fv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::LatentTensor;

    fn inds_from(f: impl Fn(usize, usize, usize, usize) -> f64, c: usize, h: usize, w: usize) -> Inds {
        Inds::new(
            (0..7)
                .map(|t| {
                    LatentTensor::from_fn(&[c, h, w], |i| {
                        let (ch, rem) = (i / (h * w), i % (h * w));
                        f(t, ch, rem / w, rem % w)
                    })
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_inds_energy() {
        let fv = energy_features(&inds_from(|_, _, _, _| 0.0, 4, 8, 8));
        assert!(fv.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_inds_energy_at_full_scale() {
        let inds = inds_from(|_, _, _, _| 1.0, 4, 64, 64);
        let fv = energy_features(&inds);
        assert_eq!(fv.get("energy.global"), Some(114688.0));
    }

    #[test]
    fn linear_in_h_gradient() {
        let inds = inds_from(|_, _, h, _| h as f64, 2, 6, 5);
        let g = gradient_field(&inds);
        assert!(g.g_magnitude.iter().all(|&m| (m - 1.0).abs() < 1e-12));
        let fv = gradient_features(&inds_from(|_, _, _, _| 3.0, 2, 4, 4));
        assert!(fv.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adjacent_correlations_sign() {
        let base = |_t: usize, c: usize, h: usize, w: usize| ((c * 31 + h * 7 + w) as f64).sin();
        let same = correlation_features(&inds_from(base, 2, 4, 4));
        let flip = correlation_features(&inds_from(
            move |t, c, h, w| if t % 2 == 0 { base(t, c, h, w) } else { -base(t, c, h, w) },
            2,
            4,
            4,
        ));
        for t in 0..6 {
            assert!((same.get(&format!("correlation.adjacent.{t}")).unwrap() - 1.0).abs() < 1e-12);
            assert!((flip.get(&format!("correlation.adjacent.{t}")).unwrap() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_channels_fully_correlated() {
        let inds = inds_from(|t, _, h, w| ((t * 13 + h * 5 + w) as f64).cos(), 4, 6, 6);
        let fv = channel_interaction_features(&inds);
        assert!((fv.get("channel.corr.mean").unwrap() - 1.0).abs() < 1e-12);
        let neg = inds_from(
            |t, c, h, w| {
                let v = ((t * 13 + h * 5 + w) as f64).cos();
                if c == 1 { -v } else { v }
            },
            4,
            6,
            6,
        );
        for f in channel_correlations(&neg) {
            assert!((f[0] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn names_are_unique_and_prefixed() {
        let inds = inds_from(|t, c, h, w| ((t + 2 * c + 3 * h + 5 * w) as f64).sin(), 4, 8, 8);
        for (fv, prefix) in [
            (energy_features(&inds), "energy."),
            (gradient_features(&inds), "gradient."),
            (correlation_features(&inds), "correlation."),
            (channel_interaction_features(&inds), "channel."),
        ] {
            fv.check_unique().unwrap();
            assert!(fv.names().iter().all(|n| n.starts_with(prefix)));
        }
    }
}
