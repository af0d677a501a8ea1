use crate::error::{Error, Result};

/// Low-rank adapter sizes suggested by an intrinsic dimension estimate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSuggestion {
    /// `ceil(id)`: the smallest rank not below the estimate.
    pub recommended: usize,
    /// Ranks worth sweeping, ascending and deduplicated.
    pub probes: Vec<usize>,
}

/// Recommends `ceil(id)` and probes its neighbours plus the next power of
/// two above it.
pub fn rank_suggestion(id: f64) -> Result<RankSuggestion> {
    if !(id.is_finite() && id > 0.0) {
        return Err(Error::precondition(format!(
            "intrinsic dimension must be finite and positive, got {id}"
        )));
    }
    let recommended = id.ceil() as usize;
    let next_pow2 = (recommended + 1).next_power_of_two();
    let mut probes: Vec<usize> = [recommended.saturating_sub(1), recommended, recommended + 1, next_pow2]
        .into_iter()
        .filter(|&r| r >= 1)
        .collect();
    probes.sort_unstable();
    probes.dedup();
    Ok(RankSuggestion { recommended, probes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sweep_around_estimate() {
        let s = rank_suggestion(24.95).unwrap();
        assert_eq!(s.recommended, 25);
        assert_eq!(s.probes, vec![24, 25, 26, 32]);
    }

    #[test]
    fn integral_estimate() {
        let s = rank_suggestion(8.0).unwrap();
        assert_eq!(s.recommended, 8);
        assert_eq!(s.probes, vec![7, 8, 9, 16]);
    }

    #[test]
    fn unit_estimate_drops_zero() {
        let s = rank_suggestion(1.0).unwrap();
        assert_eq!(s.recommended, 1);
        assert_eq!(s.probes, vec![1, 2]);
    }

    #[test]
    fn invalid_estimate() {
        assert!(rank_suggestion(0.0).is_err());
        assert!(rank_suggestion(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn never_below_estimate(id in 0.001f64..10_000.0) {
            let s = rank_suggestion(id).unwrap();
            prop_assert!(s.recommended as f64 >= id);
            prop_assert!(s.probes.contains(&s.recommended));
            prop_assert!(s.probes.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.probes.iter().all(|&r| r >= 1));
        }
    }
}
