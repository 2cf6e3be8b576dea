//! Accuracy against the 1/6 chance level, confusion matrices, exact
//! binomial significance and information-transfer rate.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::decoder::SelectionResult;
use crate::error::{Error, Result};
use crate::paradigm::N_COMMANDS;

pub const CHANCE_LEVEL: f64 = 1.0 / N_COMMANDS as f64;

/// Rows are intended commands, columns chosen commands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; N_COMMANDS]; N_COMMANDS],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..N_COMMANDS).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> [u64; N_COMMANDS] {
        self.counts.map(|r| r.iter().sum())
    }

    pub fn render(&self) -> String {
        let mut s = String::from("intended\\chosen");
        for c in 0..N_COMMANDS {
            s.push_str(&format!("{c:>6}"));
        }
        s.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            s.push_str(&format!("{i:>15}"));
            for v in row {
                s.push_str(&format!("{v:>6}"));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub n_selections: usize,
    /// One-sided P(X >= correct) under chance.
    pub binomial_p_vs_chance: f64,
    pub itr_bits_per_selection: f64,
    pub itr_bits_per_minute: f64,
    pub seconds_per_selection: f64,
}

impl std::fmt::Display for Metrics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "accuracy: {:.1}% ({} selections, chance {:.1}%)",
            100.0 * self.accuracy,
            self.n_selections,
            100.0 * CHANCE_LEVEL
        )?;
        writeln!(f, "binomial p vs chance: {:.3e}", self.binomial_p_vs_chance)?;
        write!(
            f,
            "ITR: {:.3} bits/selection, {:.2} bits/min ({:.2} s/selection)",
            self.itr_bits_per_selection, self.itr_bits_per_minute, self.seconds_per_selection
        )
    }
}

/// Bits per selection for an `n_classes`-way choice made with accuracy `p`.
///
/// Zero at or below chance, `log2(n_classes)` at `p = 1`.
pub fn itr_bits(p: f64, n_classes: usize) -> f64 {
    let n = n_classes as f64;
    if !(p > 1.0 / n) {
        return 0.0;
    }
    if p >= 1.0 {
        return n.log2();
    }
    n.log2() + p * p.log2() + (1.0 - p) * ((1.0 - p) / (n - 1.0)).log2()
}

/// Exact upper tail `P(X >= k)` for `X ~ Binomial(n, p)`, summed in log space.
pub fn binomial_tail(k: u64, n: u64, p: f64) -> Result<f64> {
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p = {p} must lie in (0, 1)")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let logs: Vec<f64> = (k..=n)
        .map(|i| ln_binomial(n, i) + i as f64 * lp + (n - i) as f64 * lq)
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    Ok((max + sum.ln()).exp().min(1.0))
}

/// Central acceptance region `[lo, hi]` of `Binomial(n, p)` with at most
/// `(1 - confidence) / 2` probability below `lo` and above `hi`.
pub fn binomial_acceptance_region(n: u64, p: f64, confidence: f64) -> Result<(u64, u64)> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid("confidence must lie in (0, 1)"));
    }
    let alpha = (1.0 - confidence) / 2.0;
    let mut lo = 0;
    // P(X < lo + 1) = 1 - P(X >= lo + 1)
    while lo < n && 1.0 - binomial_tail(lo + 1, n, p)? <= alpha {
        lo += 1;
    }
    let mut hi = n;
    while hi > 0 && binomial_tail(hi, n, p)? <= alpha {
        hi -= 1;
    }
    Ok((lo, hi))
}

/// Clopper-Pearson interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: u64, n: u64, confidence: f64) -> Result<(f64, f64)> {
    if n == 0 || k > n {
        return Err(Error::invalid("need 0 <= k <= n and n > 0"));
    }
    let alpha = (1.0 - confidence) / 2.0;
    let lower = if k == 0 {
        0.0
    } else {
        // P(X >= k | p) increases with p
        bisect(|p| binomial_tail(k, n, p).map(|t| t - alpha))?
    };
    let upper = if k == n {
        1.0
    } else {
        // P(X <= k | p) decreases with p
        bisect(|p| {
            binomial_tail(k + 1, n, p)
                .map(|t| (1.0 - t) - alpha)
                .map(|v| -v)
        })?
    };
    Ok((lower, upper))
}

// root of an increasing function on (0, 1)
fn bisect(f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (mut a, mut b) = (1e-15, 1.0 - 1e-15);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m)? < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn require_intents(results: &[SelectionResult]) -> Result<()> {
    if let Some(i) = results.iter().position(|r| r.intended.is_none()) {
        return Err(Error::invalid(format!("selection {i} has no known intent")));
    }
    Ok(())
}

pub fn confusion(results: &[SelectionResult]) -> Result<ConfusionMatrix> {
    require_intents(results)?;
    let mut counts = [[0u64; N_COMMANDS]; N_COMMANDS];
    for r in results {
        let i = r.intended.expect("checked").index();
        counts[i][r.chosen.index()] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

pub fn summarize(results: &[SelectionResult], seconds_per_selection: f64) -> Result<Metrics> {
    require_intents(results)?;
    if results.is_empty() {
        return Err(Error::invalid("no selections to summarize"));
    }
    if !(seconds_per_selection.is_finite() && seconds_per_selection > 0.0) {
        return Err(Error::invalid("seconds_per_selection must be > 0"));
    }
    let n = results.len();
    let correct = results.iter().filter(|r| r.is_correct()).count();
    let accuracy = correct as f64 / n as f64;
    let bits = itr_bits(accuracy, N_COMMANDS);
    Ok(Metrics {
        accuracy,
        n_selections: n,
        binomial_p_vs_chance: binomial_tail(correct as u64, n as u64, CHANCE_LEVEL)?,
        itr_bits_per_selection: bits,
        itr_bits_per_minute: 60.0 * bits / seconds_per_selection,
        seconds_per_selection,
    })
}
