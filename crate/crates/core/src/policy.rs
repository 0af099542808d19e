//! Fixed thresholds that turn a sequence of annulus suprema into a limit verdict.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Last supremum below this level counts as vanishing.
pub const VANISHING_LEVEL: f64 = 0.01;
/// Suprema above this level across the trend window count as bounded away from zero.
pub const BOUNDED_LEVEL: f64 = 0.1;
/// Number of outermost annuli inspected.
pub const TREND_WINDOW: usize = 3;
/// Largest acceptable standard error relative to a Monte Carlo estimate.
pub const STDERR_CAP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub vanishing_level: f64,
    pub bounded_level: f64,
    pub trend_window: usize,
    pub stderr_cap: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            vanishing_level: VANISHING_LEVEL,
            bounded_level: BOUNDED_LEVEL,
            trend_window: TREND_WINDOW,
            stderr_cap: STDERR_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limit {
    Vanishing,
    BoundedAway,
    Inconclusive,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Limit::Vanishing => "vanishing",
            Limit::BoundedAway => "bounded-away",
            Limit::Inconclusive => "inconclusive",
        })
    }
}

impl Thresholds {
    /// Vanishing: the last value is below the vanishing level and the window is
    /// non-increasing. Bounded away: every value in the window exceeds the bounded level.
    pub fn classify(&self, sups: &[f64]) -> Limit {
        if sups.len() < self.trend_window || sups.iter().any(|s| !s.is_finite()) {
            return Limit::Inconclusive;
        }
        let tail = &sups[sups.len() - self.trend_window..];
        let last = tail[tail.len() - 1];
        if last < self.vanishing_level && tail.windows(2).all(|w| w[1] <= w[0]) {
            Limit::Vanishing
        } else if tail.iter().all(|&s| s > self.bounded_level) {
            Limit::BoundedAway
        } else {
            Limit::Inconclusive
        }
    }
}

pub fn classify(sups: &[f64]) -> Limit {
    Thresholds::default().classify(sups)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        assert_eq!(classify(&[0.0; 11]), Limit::Vanishing);
        assert_eq!(classify(&[0.5, 0.05, 0.02, 0.009]), Limit::Vanishing);
        assert_eq!(classify(&[0.5, 0.002, 0.003, 0.001]), Limit::Inconclusive);
        assert_eq!(classify(&[1.0, 1.4, 1.3, 1.35]), Limit::BoundedAway);
        assert_eq!(classify(&[1.0, 0.2, 0.05, 0.03]), Limit::Inconclusive);
        assert_eq!(classify(&[0.0, 0.0]), Limit::Inconclusive);
        assert_eq!(classify(&[0.0, f64::NAN, 0.0]), Limit::Inconclusive);
    }

    #[test]
    fn display_matches_serde() {
        for l in [Limit::Vanishing, Limit::BoundedAway, Limit::Inconclusive] {
            assert_eq!(serde_json::to_string(&l).unwrap(), format!("\"{l}\""));
        }
    }
}
