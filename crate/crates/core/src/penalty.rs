//! Bifurcation delay penalty model.

use crate::error::{Error, Result};

/// Optimal split `(λ_x, λ_y)` of the bifurcation penalty between two
/// branches with subtree sink weights `w_x` and `w_y`: the heavier branch
/// takes the smallest admissible share `eta`, equal weights split evenly.
pub fn optimal_lambda(w_x: f64, w_y: f64, eta: f64) -> Result<(f64, f64)> {
    if !(0.0..=0.5).contains(&eta) {
        return Err(Error::Parameter(format!("eta out of [0, 1/2]: {eta}")));
    }
    let lx = if w_x > w_y {
        eta
    } else if w_x == w_y {
        0.5
    } else {
        1.0 - eta
    };
    Ok((lx, 1.0 - lx))
}

/// Minimum weighted penalty for joining two terminals of weights `w` and `w2`
/// at one bifurcation.
#[inline]
pub fn beta(w: f64, w2: f64, d_bif: f64, eta: f64) -> f64 {
    d_bif * (eta * w.max(w2) + (1.0 - eta) * w.min(w2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyParams {
    pub d_bif: f64,
    pub eta: f64,
    /// Subtract the guaranteed future saving `eta * d_bif * w(u)` from root
    /// connections.
    pub root_bonus: bool,
}

/// The other side of a merge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MergePartner {
    /// Another active terminal with the given weight.
    Terminal(f64),
    /// The current root; carries the total weight of all *other* active
    /// terminals.
    Root { remaining_weight: f64 },
}

/// Weighted bifurcation penalty `b(u, v)` charged when terminal `u` (weight
/// `w_u`) is merged with `partner`. Never negative.
pub fn merge_penalty(w_u: f64, partner: MergePartner, params: &PenaltyParams) -> f64 {
    match partner {
        MergePartner::Terminal(w_v) => beta(w_u, w_v, params.d_bif, params.eta),
        MergePartner::Root { remaining_weight } => {
            let b = beta(w_u, remaining_weight, params.d_bif, params.eta);
            if params.root_bonus {
                (b - params.eta * params.d_bif * w_u).max(0.0)
            } else {
                b
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lambda_cases() {
        assert_eq!(optimal_lambda(3.0, 1.0, 0.25).unwrap(), (0.25, 0.75));
        assert_eq!(optimal_lambda(2.0, 2.0, 0.25).unwrap(), (0.5, 0.5));
        assert_eq!(optimal_lambda(1.0, 3.0, 0.0).unwrap(), (1.0, 0.0));
        assert!(optimal_lambda(1.0, 3.0, 0.6).is_err());
    }

    #[test]
    fn beta_cases() {
        assert_eq!(beta(1.0, 3.0, 2.0, 0.25), 3.0);
        assert_eq!(beta(2.5, 2.5, 3.0, 0.1), 7.5);
        assert_eq!(beta(1.0, 9.0, 0.0, 0.3), 0.0);
    }

    #[test]
    fn merge_penalty_cases() {
        let mut p = PenaltyParams { d_bif: 2.0, eta: 0.25, root_bonus: false };
        assert_eq!(merge_penalty(1.0, MergePartner::Terminal(3.0), &p), 3.0);
        let root = MergePartner::Root { remaining_weight: 5.0 };
        assert_eq!(merge_penalty(1.0, root, &p), 4.0);
        p.root_bonus = true;
        assert_eq!(merge_penalty(1.0, root, &p), 3.5);
    }

    proptest! {
        #[test]
        fn lambda_is_a_valid_split(wx in 0.0..10.0f64, wy in 0.0..10.0f64, eta in 0.0..=0.5f64) {
            let (lx, ly) = optimal_lambda(wx, wy, eta).unwrap();
            prop_assert_eq!(lx + ly, 1.0);
            prop_assert!(lx >= eta && lx <= 1.0 - eta);
            if wx > wy { prop_assert!(lx <= ly); }
        }

        #[test]
        fn beta_symmetric_and_bounded(w in 0.0..10.0f64, w2 in 0.0..10.0f64, d in 0.0..5.0f64, eta in 0.0..=0.5f64) {
            prop_assert_eq!(beta(w, w2, d, eta), beta(w2, w, d, eta));
            // never below the bonus subtracted from root merges
            prop_assert!(beta(w, w2, d, eta) + 1e-12 >= eta * d * w);
        }
    }
}
