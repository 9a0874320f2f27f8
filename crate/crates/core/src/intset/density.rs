use serde::Serialize;

use super::CountingSet;
use crate::scalar::ratio_str;
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Checkpoint {
    pub n: i64,
    pub count: u64,
    #[serde(with = "ratio_str")]
    pub ratio: Rational,
}

/// Windowed surrogate for lower/upper density: the min/max checkpoint ratio
/// over the last quarter of the checkpoints. The full table is kept so
/// callers can apply their own rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityEstimate {
    pub checkpoints: Vec<Checkpoint>,
    #[serde(with = "ratio_str")]
    pub lower_est: Rational,
    #[serde(with = "ratio_str")]
    pub upper_est: Rational,
}

impl DensityEstimate {
    /// Checkpoints that enter the estimates.
    pub fn tail(&self) -> &[Checkpoint] {
        let k = self.checkpoints.len().div_ceil(4);
        &self.checkpoints[self.checkpoints.len() - k..]
    }
}

/// Density ratios `#A(n)/(2n+1)` (bilateral) or `#A(n)/(n+1)` (unilateral).
pub fn density_profile<S: CountingSet + ?Sized>(a: &S, checkpoints: &[i64]) -> Result<DensityEstimate> {
    if checkpoints.is_empty() {
        return Err(Error::Argument("empty checkpoint list".into()));
    }
    if checkpoints.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Argument("checkpoints must be strictly increasing".into()));
    }
    let bilateral = a.window().is_bilateral();
    let mut table = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        let count = a.count_prefix(n)?;
        let denom = if bilateral { 2 * n as i128 + 1 } else { n as i128 + 1 };
        table.push(Checkpoint { n, count, ratio: Rational::new(count as i128, denom) });
    }
    let k = table.len().div_ceil(4);
    let tail = &table[table.len() - k..];
    let lower_est = tail.iter().map(|c| c.ratio).min().unwrap();
    let upper_est = tail.iter().map(|c| c.ratio).max().unwrap();
    Ok(DensityEstimate { checkpoints: table, lower_est, upper_est })
}

/// `count` evenly spaced checkpoints ending at `max`.
pub fn linear_checkpoints(max: i64, count: usize) -> Vec<i64> {
    let count = count.max(1) as i64;
    let mut out: Vec<i64> = (1..=count).map(|i| (max as i128 * i as i128 / count as i128) as i64).collect();
    out.dedup();
    out.retain(|&n| n >= 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intset::{make_ap, make_interval_union, IntSet, Window};
    use num_traits::Signed;

    #[test]
    fn ap_densities() {
        let w = Window::bilateral(1000);
        let cps: Vec<i64> = (1..=10).map(|i| 100 * i).collect();
        let d = density_profile(&make_ap(2, 0, w).unwrap(), &cps).unwrap();
        let tol = Rational::new(1, 100);
        assert!((d.lower_est - Rational::new(1, 2)).abs() <= tol);
        assert!((d.upper_est - Rational::new(1, 2)).abs() <= tol);
        assert_eq!(d.tail().len(), 3);
        let d3 = density_profile(&make_ap(3, 0, w).unwrap(), &cps).unwrap();
        assert!((d3.lower_est - Rational::new(1, 3)).abs() <= tol);
        assert_eq!(d3.checkpoints[0].count, 67);
    }

    #[test]
    fn ratio_conventions() {
        let u = make_ap(4, 0, Window::unilateral(20)).unwrap();
        let d = density_profile(&u, &[20]).unwrap();
        assert_eq!(d.checkpoints[0].ratio, Rational::new(6, 21));
        assert!(density_profile(&u, &[]).is_err());
        assert!(density_profile(&u, &[5, 5]).is_err());
        assert!(density_profile(&u, &[21]).is_err());
    }

    #[test]
    fn geometric_intervals_oscillate() {
        // ∪_u [0.99·60^u, 1.01·60^u]: dense just after each interval, sparse
        // just before the next one.
        let n = 60i64.pow(4) * 2;
        let w = Window::unilateral(n);
        let ivs: Vec<(i64, i64)> = (1..=4)
            .map(|u| {
                let c = 60i64.pow(u);
                ((c * 99 + 99) / 100, c * 101 / 100)
            })
            .collect();
        let a = make_interval_union(&ivs, w).unwrap();
        let (lo3, hi3) = ivs[2];
        let lo4 = ivs[3].0;
        // oracle: direct counts at the two checkpoints
        let at = |m: i64| (0..=m).filter(|&x| ivs.iter().any(|&(l, h)| l <= x && x <= h)).count() as u64;
        let cps = [hi3, lo4 - 1, ivs[3].1];
        let d = density_profile(&a, &cps).unwrap();
        assert_eq!(d.checkpoints[0].count, at(hi3));
        assert_eq!(d.checkpoints[1].count, at(lo4 - 1));
        let high = d.checkpoints[2].ratio;
        let low = d.checkpoints[1].ratio;
        assert!(high > Rational::new(1, 100), "{high}");
        assert!(low < Rational::new(1, 1000), "{low}");
        assert!(lo3 > 0);
        let empty = IntSet::empty(w).unwrap();
        assert_eq!(density_profile(&empty, &cps).unwrap().upper_est, Rational::from_integer(0));
    }

    #[test]
    fn linear_checkpoint_shape() {
        assert_eq!(linear_checkpoints(100, 4), vec![25, 50, 75, 100]);
        assert_eq!(linear_checkpoints(2, 5), vec![0, 1, 2]);
    }
}
