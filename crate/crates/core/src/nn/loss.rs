use ndarray::{Array2, Zip};

/// Probabilities are clamped to `[EPS, 1 - EPS]` before taking logs.
pub const EPS: f64 = 1e-7;

/// Binary cross-entropy `-Σ [y ln p + (1-y) ln(1-p)]`, summed over features
/// and averaged over rows.
pub fn bce_loss(p: &Array2<f64>, y: &Array2<f64>) -> f64 {
    assert_eq!(p.dim(), y.dim(), "prediction/target shape mismatch");
    let total: f64 = Zip::from(p).and(y).fold(0.0, |acc, &p, &y| {
        let p = p.clamp(EPS, 1.0 - EPS);
        acc - (y * p.ln() + (1.0 - y) * (1.0 - p).ln())
    });
    total / p.nrows() as f64
}

/// Gradient of [`bce_loss`] with respect to `p`. Zero where `p` is clamped.
pub fn bce_grad(p: &Array2<f64>, y: &Array2<f64>) -> Array2<f64> {
    assert_eq!(p.dim(), y.dim(), "prediction/target shape mismatch");
    let n = p.nrows() as f64;
    Zip::from(p).and(y).map_collect(|&p, &y| {
        if !(EPS..=1.0 - EPS).contains(&p) {
            0.0
        } else {
            (-(y / p) + (1.0 - y) / (1.0 - p)) / n
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn half_half_is_ln2() {
        assert_abs_diff_eq!(bce_loss(&array![[0.5]], &array![[0.5]]), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn perfect_prediction_of_one_tends_to_zero() {
        let l = bce_loss(&array![[1.0 - 1e-9]], &array![[1.0]]);
        assert!(l < 1e-6);
        // clamped, so finite even at the boundary
        assert!(bce_loss(&array![[0.0]], &array![[1.0]]).is_finite());
    }

    #[test]
    fn minimized_at_target() {
        for &y in &[0.1, 0.37, 0.5, 0.82] {
            let at_y = bce_loss(&array![[y]], &array![[y]]);
            for k in 1..100 {
                let p = k as f64 / 100.0;
                assert!(at_y <= bce_loss(&array![[p]], &array![[y]]) + 1e-15);
            }
        }
    }

    #[test]
    fn averaged_over_rows_summed_over_columns() {
        let p = array![[0.5, 0.5], [0.5, 0.5]];
        assert_abs_diff_eq!(bce_loss(&p, &p), 2.0 * 2f64.ln(), epsilon = 1e-15);
    }
}
