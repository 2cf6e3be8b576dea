//! Test-only oracles, kept independent of the library's implementation paths.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use tactile_bci::dsp::FilterChain;
use tactile_bci::swlda::Dataset;

/// Writes past the test harness's output capture so the line always shows.
pub fn report(id: &str, name: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] {id} {name}: {detail}");
}

/// Steady-state amplitude of a unit sinusoid after `chain`, from the RMS of
/// the final 2 s of a 10 s record (an integer number of periods for the
/// tested frequencies at 512 Hz).
pub fn tone_amplitude(chain: &FilterChain, freq: f64) -> f64 {
    let fs = chain.sample_rate;
    let n = (10.0 * fs) as usize;
    let mut x: Vec<f64> = (0..n)
        .map(|i| (2.0 * PI * freq * i as f64 / fs).sin())
        .collect();
    chain.filter_in_place(&mut x);
    let tail = &x[n - (2.0 * fs) as usize..];
    (tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64).sqrt() * 2f64.sqrt()
}

/// Output of a unit step at the end of a 10 s record.
pub fn dc_steady_state(chain: &FilterChain) -> f64 {
    let n = (10.0 * chain.sample_rate) as usize;
    let mut x = vec![1.0; n];
    chain.filter_in_place(&mut x);
    x[n - 1].abs()
}

/// Power at `freq` by direct DFT projection (no FFT).
pub fn tone_power(x: &[f64], freq: f64, fs: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let a = 2.0 * PI * freq * i as f64 / fs;
        re += v * a.cos();
        im -= v * a.sin();
    }
    (re * re + im * im) / (x.len() as f64).powi(2)
}

/// Least-squares slope of log10 power vs log10 frequency over [f_lo, f_hi],
/// from Hann-windowed 2 s segments averaged by direct DFT.
pub fn spectral_slope(x: &[f64], fs: f64, f_lo: f64, f_hi: f64) -> f64 {
    let seg = (2.0 * fs) as usize;
    let window: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos())
        .collect();
    let df = fs / seg as f64;
    let bins: Vec<usize> = (0..seg / 2)
        .filter(|&k| (f_lo..=f_hi).contains(&(k as f64 * df)))
        .collect();
    let mut power = vec![0.0; bins.len()];
    let mut count = 0;
    for chunk in x.chunks_exact(seg) {
        let w: Vec<f64> = chunk.iter().zip(&window).map(|(a, b)| a * b).collect();
        for (p, &k) in power.iter_mut().zip(&bins) {
            *p += tone_power(&w, k as f64 * df, fs);
        }
        count += 1;
    }
    let pts: Vec<(f64, f64)> = bins
        .iter()
        .zip(&power)
        .map(|(&k, &p)| ((k as f64 * df).log10(), (p / count as f64).log10()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Upper tail of F(1, df) at `f` by Simpson integration of the density,
/// substituting t = sqrt(x) to remove the x^(-1/2) singularity at 0.
pub fn f1_survival_quadrature(f: f64, df: f64) -> f64 {
    // density of F(1, d): c * x^(-1/2) * (1 + x/d)^(-(d+1)/2); with x = t^2,
    // dx = 2t dt, the integrand becomes 2c (1 + t^2/d)^(-(d+1)/2)
    let ln_c = statrs::function::gamma::ln_gamma((df + 1.0) / 2.0)
        - statrs::function::gamma::ln_gamma(0.5)
        - statrs::function::gamma::ln_gamma(df / 2.0)
        - 0.5 * df.ln();
    let g = |t: f64| 2.0 * ln_c.exp() * (1.0 + t * t / df).powf(-(df + 1.0) / 2.0);
    let upper = f.sqrt();
    let n = 20_000;
    let h = upper / n as f64;
    let mut s = g(0.0) + g(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(i as f64 * h);
    }
    1.0 - s * h / 3.0
}

/// Residual sum of squares of labels regressed on an intercept plus `cols`,
/// via nalgebra's SVD least-squares solve.
pub fn subset_rss(data: &Dataset, cols: &[usize]) -> (f64, Vec<f64>) {
    let n = data.len();
    let x = DMatrix::from_fn(n, cols.len() + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            data.features()[r][cols[c - 1]]
        }
    });
    let y = DVector::from_column_slice(data.labels());
    let beta = x
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .expect("svd solve");
    let resid = &y - &x * &beta;
    (resid.norm_squared(), beta.iter().copied().collect())
}

fn f_p(drop: f64, rss_full: f64, df: usize) -> f64 {
    if rss_full <= 0.0 {
        return if drop > 0.0 { 0.0 } else { 1.0 };
    }
    let f = drop.max(0.0) / (rss_full / df as f64);
    let dist = FisherSnedecor::new(1.0, df as f64).unwrap();
    dist.sf(f)
}

/// Greedy forward-entry / backward-removal driven entirely by a brute-force
/// table of subset residual sums of squares. Returns (selected, weights, intercept).
pub fn brute_force_stepwise(
    data: &Dataset,
    p_enter: f64,
    p_remove: f64,
    max_features: usize,
) -> (Vec<usize>, Vec<f64>, f64) {
    let dim = data.dim();
    assert!(dim <= 8, "oracle enumerates all subsets");
    let n = data.len();
    let mut table = std::collections::HashMap::new();
    for mask in 0u32..(1 << dim) {
        let cols: Vec<usize> = (0..dim).filter(|j| mask & (1 << j) != 0).collect();
        table.insert(mask, subset_rss(data, &cols).0);
    }
    let mask_of = |s: &[usize]| s.iter().fold(0u32, |m, &j| m | (1 << j));
    let variance = |j: usize| {
        let col: Vec<f64> = data.features().iter().map(|r| r[j]).collect();
        let m = col.iter().sum::<f64>() / n as f64;
        col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64
    };
    let mut selected: Vec<usize> = Vec::new();
    let mut visited = std::collections::HashSet::new();
    for _ in 0..max_features.max(1) * dim {
        if selected.len() >= max_features {
            break;
        }
        let df = n as i64 - selected.len() as i64 - 2;
        if df < 1 {
            break;
        }
        let rss_now = table[&mask_of(&selected)];
        let mut best: Option<(usize, f64)> = None;
        for j in 0..dim {
            if selected.contains(&j) || variance(j) < 1e-12 {
                continue;
            }
            let mut s = selected.clone();
            s.push(j);
            let rss_full = table[&mask_of(&s)];
            let p = f_p(rss_now - rss_full, rss_full, df as usize);
            if best.is_none_or(|(_, bp)| p < bp) {
                best = Some((j, p));
            }
        }
        let Some((j, p)) = best else { break };
        if p >= p_enter {
            break;
        }
        selected.push(j);
        loop {
            let rss_full = table[&mask_of(&selected)];
            let df = n - selected.len() - 1;
            let mut worst: Option<(usize, f64)> = None;
            for (pos, _) in selected.iter().enumerate() {
                let mut reduced = selected.clone();
                reduced.remove(pos);
                let p = f_p(table[&mask_of(&reduced)] - rss_full, rss_full, df);
                if p > p_remove && worst.is_none_or(|(_, wp)| p > wp) {
                    worst = Some((pos, p));
                }
            }
            match worst {
                Some((pos, _)) => {
                    selected.remove(pos);
                }
                None => break,
            }
        }
        let mut key = selected.clone();
        key.sort_unstable();
        if !visited.insert(key) {
            break;
        }
    }
    let (_, beta) = subset_rss(data, &selected);
    (selected, beta[1..].to_vec(), beta[0])
}

/// Random 6-feature dataset: a few features carry a label-dependent shift of
/// random size, one feature is a noisy copy of another to provoke removals.
pub fn random_small_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(30..90);
    let effects: Vec<f64> = (0..6)
        .map(|_| {
            if rng.random_bool(0.5) {
                rng.random_range(0.0..0.8)
            } else {
                0.0
            }
        })
        .collect();
    let mut labels: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.3) { 1.0 } else { -1.0 })
        .collect();
    labels[0] = 1.0;
    labels[1] = -1.0;
    let features = labels
        .iter()
        .map(|&l| {
            let mut row: Vec<f64> = effects
                .iter()
                .map(|e| e * l + rng.sample::<f64, _>(StandardNormal))
                .collect();
            row[5] = row[0] + 0.7 * rng.sample::<f64, _>(StandardNormal);
            row
        })
        .collect();
    Dataset::new(features, labels).unwrap()
}

/// Dataset where feature 7 equals the label and the rest are noise.
pub fn separable_dataset(n: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<f64> = (0..n)
        .map(|i| if i % 6 == 0 { 1.0 } else { -1.0 })
        .collect();
    let features = labels
        .iter()
        .map(|&l| {
            (0..dim)
                .map(|j| {
                    if j == 7 {
                        l
                    } else {
                        rng.sample(StandardNormal)
                    }
                })
                .collect()
        })
        .collect();
    Dataset::new(features, labels).unwrap()
}
