//! Deterministic methods: complete-case analysis and single imputation.

use super::TrialData;
use crate::error::{Error, Result};
use crate::intervals::{clopper_pearson, IntervalEstimate};

/// Exact interval on the observed subjects only.
pub fn complete_case(data: &TrialData, alpha: f64) -> Result<IntervalEstimate> {
    if data.n_obs() == 0 {
        return Err(Error::NoObservedData);
    }
    clopper_pearson(data.y_obs(), data.n_obs(), alpha)
}

/// Every missing outcome counted as a success.
pub fn impute_all_success(data: &TrialData, alpha: f64) -> Result<IntervalEstimate> {
    clopper_pearson(data.y_obs() + data.n_miss(), data.n(), alpha)
}

/// Every missing outcome counted as a failure.
pub fn impute_all_failure(data: &TrialData, alpha: f64) -> Result<IntervalEstimate> {
    clopper_pearson(data.y_obs(), data.n(), alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r2(x: f64) -> f64 {
        (x * 100.0).round() / 100.0
    }

    #[test]
    fn single_imputation_examples() {
        let d = TrialData::new(12, 7, 1).unwrap();
        let s = impute_all_success(&d, 0.05).unwrap();
        assert_eq!((r2(s.estimate()), r2(s.lower()), r2(s.upper())), (0.65, 0.41, 0.85));
        let f = impute_all_failure(&d, 0.05).unwrap();
        assert_eq!((r2(f.estimate()), r2(f.lower()), r2(f.upper())), (0.60, 0.36, 0.81));
    }

    #[test]
    fn complete_case_examples() {
        let d = TrialData::new(12, 7, 1).unwrap();
        let cc = complete_case(&d, 0.05).unwrap();
        assert_eq!(cc, clopper_pearson(12, 19, 0.05).unwrap());
        let cit = complete_case(&TrialData::new(42, 3, 3).unwrap(), 0.05).unwrap();
        assert!((cit.estimate() - 42.0 / 45.0).abs() < 1e-15);
        let full = TrialData::new(9, 2, 0).unwrap();
        assert_eq!(complete_case(&full, 0.05).unwrap(), impute_all_failure(&full, 0.05).unwrap());
        assert!(matches!(complete_case(&TrialData::new(0, 0, 4).unwrap(), 0.05), Err(Error::NoObservedData)));
    }

    #[test]
    fn estimates_monotone_in_successes() {
        for y in 0..15 {
            let a = TrialData::new(y, 15 - y, 2).unwrap();
            let b = TrialData::new(y + 1, 14 - y, 2).unwrap();
            for f in [complete_case, impute_all_success, impute_all_failure] {
                assert!(f(&b, 0.05).unwrap().estimate() >= f(&a, 0.05).unwrap().estimate());
            }
        }
    }
}
