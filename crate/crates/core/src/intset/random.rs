use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{IntSet, Window};
use crate::{Error, Result};

/// `period·Z` together with independent noise, tuned so the overall density
/// is `density`. Deterministic in `seed`.
pub fn planted_period_set(window: Window, period: i64, density: f64, seed: u64) -> Result<IntSet> {
    if period < 1 {
        return Err(Error::Argument(format!("period must be positive, got {period}")));
    }
    let base = 1.0 / period as f64;
    if !(base..=1.0).contains(&density) {
        return Err(Error::Argument(format!("density {density} must lie in [1/{period}, 1]")));
    }
    // density = 1/period + (1 − 1/period)·q
    let q = if period == 1 { 0.0 } else { (density - base) / (1.0 - base) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    IntSet::from_fn(window, |x| x.rem_euclid(period) == 0 || rng.gen_bool(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intset::CountingSet;

    #[test]
    fn planted_density_and_determinism() {
        let w = Window::bilateral(100_000);
        let a = planted_period_set(w, 7, 0.3, 11).unwrap();
        let b = planted_period_set(w, 7, 0.3, 11).unwrap();
        assert_eq!(a, b);
        let d = a.len() as f64 / w.len() as f64;
        assert!((d - 0.3).abs() < 0.01, "{d}");
        assert!((w.lo..=w.hi).filter(|x| x.rem_euclid(7) == 0).all(|x| a.contains(x)));
        assert!(planted_period_set(w, 7, 0.1, 0).is_err());
    }
}
