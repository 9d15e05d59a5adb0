/// Value and subgradients of the pairwise ranking hinge loss.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeLoss {
    pub loss: f64,
    /// d loss / d pos_scores[i]
    pub d_pos: Vec<f64>,
    /// d loss / d neg_scores[j]
    pub d_neg: Vec<f64>,
}

/// `Σ_p Σ_n max(0, θ − s_p + s_n)`. A pair exactly on the margin counts as
/// inactive.
pub fn hinge_loss(pos_scores: &[f64], neg_scores: &[f64], theta: f64) -> HingeLoss {
    let mut out = HingeLoss {
        loss: 0.0,
        d_pos: vec![0.0; pos_scores.len()],
        d_neg: vec![0.0; neg_scores.len()],
    };
    for (i, &p) in pos_scores.iter().enumerate() {
        for (j, &n) in neg_scores.iter().enumerate() {
            let m = theta - p + n;
            if m > 0.0 {
                out.loss += m;
                out.d_pos[i] -= 1.0;
                out.d_neg[j] += 1.0;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(hinge_loss(&[0.9], &[0.5], 0.2).loss, 0.0);
        assert!((hinge_loss(&[0.5], &[0.5], 0.2).loss - 0.2).abs() < 1e-15);
        assert!((hinge_loss(&[0.5], &[0.5, 0.6], 0.2).loss - 0.5).abs() < 1e-15);
        assert_eq!(hinge_loss(&[], &[1.0], 0.2).loss, 0.0);
        let h = hinge_loss(&[0.5], &[0.5, 0.6], 0.2);
        assert_eq!(h.d_pos, [-2.0]);
        assert_eq!(h.d_neg, [1.0, 1.0]);
    }

    proptest! {
        #[test]
        fn zero_iff_all_margins_hold(
            pos in prop::collection::vec(-2.0f64..2.0, 0..6),
            neg in prop::collection::vec(-2.0f64..2.0, 0..6),
        ) {
            let h = hinge_loss(&pos, &neg, 0.2);
            let all = pos.iter().all(|p| neg.iter().all(|n| p - n >= 0.2));
            prop_assert_eq!(h.loss == 0.0, all);
        }

        #[test]
        fn subgradients_match_finite_differences(
            pos in prop::collection::vec(-2.0f64..2.0, 1..5),
            neg in prop::collection::vec(-2.0f64..2.0, 1..5),
        ) {
            let theta = 0.2;
            let eps = 1e-6;
            // Skip draws near a kink, where the loss is not differentiable.
            prop_assume!(pos.iter().all(|p| neg.iter().all(|n| (theta - p + n).abs() > 10.0 * eps)));
            let h = hinge_loss(&pos, &neg, theta);
            for i in 0..pos.len() {
                let mut a = pos.clone();
                let mut b = pos.clone();
                a[i] += eps;
                b[i] -= eps;
                let fd = (hinge_loss(&a, &neg, theta).loss - hinge_loss(&b, &neg, theta).loss) / (2.0 * eps);
                prop_assert!((fd - h.d_pos[i]).abs() <= 1e-6 * h.d_pos[i].abs().max(1.0));
            }
            for j in 0..neg.len() {
                let mut a = neg.clone();
                let mut b = neg.clone();
                a[j] += eps;
                b[j] -= eps;
                let fd = (hinge_loss(&pos, &a, theta).loss - hinge_loss(&pos, &b, theta).loss) / (2.0 * eps);
                prop_assert!((fd - h.d_neg[j]).abs() <= 1e-6 * h.d_neg[j].abs().max(1.0));
            }
        }
    }
}
