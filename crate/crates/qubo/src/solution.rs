use bitstring::BitString;
use serde::{Deserialize, Serialize};

/// Solver output: the bit vector, its energy (offset excluded), and solver
/// diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub bits: BitString,
    pub energy: f64,
    pub solver: String,
    pub elapsed_s: f64,
    /// States examined (exhaustive), moves attempted (annealing), or outer
    /// objective evaluations (variational solvers).
    pub evaluations: u64,
}

/// How an accuracy value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccuracyMode {
    /// found / optimum, the ratio form.
    Ratio,
    /// 1 / (1 + |found - optimum|), used when the ratio is ill-defined
    /// (zero optimum or mismatched signs).
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub value: f64,
    pub mode: AccuracyMode,
}

/// Solution quality as obtained energy divided by the known global optimum.
/// Equals 1.0 exactly when the energies match. When the optimum is zero or
/// the two energies differ in sign the ratio is meaningless, so the value
/// falls back to the gap form 1/(1 + |found - optimum|), which still equals
/// 1.0 only at equality.
pub fn accuracy(found: f64, optimum: f64) -> Accuracy {
    if found == optimum {
        return Accuracy {
            value: 1.0,
            mode: if optimum == 0.0 {
                AccuracyMode::Gap
            } else {
                AccuracyMode::Ratio
            },
        };
    }
    if optimum != 0.0 && found * optimum > 0.0 {
        Accuracy {
            value: found / optimum,
            mode: AccuracyMode::Ratio,
        }
    } else {
        Accuracy {
            value: 1.0 / (1.0 + (found - optimum).abs()),
            mode: AccuracyMode::Gap,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_energies_score_one() {
        let a = accuracy(-5.0, -5.0);
        assert_eq!(a.value, 1.0);
        assert_eq!(a.mode, AccuracyMode::Ratio);
        assert_eq!(accuracy(3.25, 3.25).value, 1.0);
    }

    #[test]
    fn ratio_form_matches_reported_scale() {
        let a = accuracy(-7.4, -10.0);
        assert_eq!(a.mode, AccuracyMode::Ratio);
        assert!((a.value - 0.74).abs() < 1e-15);
    }

    #[test]
    fn zero_optimum_falls_back_to_gap() {
        let a = accuracy(0.0, 0.0);
        assert_eq!(a.value, 1.0);
        assert_eq!(a.mode, AccuracyMode::Gap);
        let b = accuracy(0.5, 0.0);
        assert_eq!(b.mode, AccuracyMode::Gap);
        assert!((b.value - 1.0 / 1.5).abs() < 1e-15);
        assert!(b.value < 1.0);
    }

    #[test]
    fn sign_mismatch_falls_back_to_gap() {
        let a = accuracy(0.5, -2.0);
        assert_eq!(a.mode, AccuracyMode::Gap);
        assert!((a.value - 1.0 / 3.5).abs() < 1e-15);
    }

    #[test]
    fn one_exactly_iff_equal() {
        for (found, optimum) in [(-3.0, -4.0), (2.0, 3.0), (0.1, 0.0), (-1.0, 1.0)] {
            assert!(accuracy(found, optimum).value < 1.0);
        }
        for e in [-10.0, -0.5, 0.25, 7.0] {
            assert_eq!(accuracy(e, e).value, 1.0);
        }
    }
}
