/// Threshold between the quadratic and linear regimes of the smooth L1 loss.
pub const SMOOTH_L1_BETA: f64 = 1.0;

/// `0.5 r²` for `|r| < 1`, `|r| − 0.5` otherwise, with `r = prediction − target`.
pub fn smooth_l1(prediction: f64, target: f64) -> f64 {
    let r = prediction - target;
    if r.abs() < SMOOTH_L1_BETA {
        0.5 * r * r / SMOOTH_L1_BETA
    } else {
        r.abs() - 0.5 * SMOOTH_L1_BETA
    }
}

/// `d smooth_l1 / d prediction`: the residual clipped to `[−1, 1]`.
pub fn smooth_l1_grad(prediction: f64, target: f64) -> f64 {
    let r = prediction - target;
    (r / SMOOTH_L1_BETA).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(smooth_l1(3.0, 3.0), 0.0);
        assert_eq!(smooth_l1(2.0, 0.0), 1.5);
        assert_eq!(smooth_l1(0.5, 0.0), 0.125);
        assert_eq!(smooth_l1(-2.0, 0.0), 1.5);
    }

    #[test]
    fn derivative() {
        assert_eq!(smooth_l1_grad(0.5, 0.0), 0.5);
        assert_eq!(smooth_l1_grad(4.0, 0.0), 1.0);
        assert_eq!(smooth_l1_grad(-4.0, 0.0), -1.0);
        let h = 1e-6;
        for r in [-2.5, -0.3, 0.2, 0.9, 1.7] {
            let fd = (smooth_l1(r + h, 0.0) - smooth_l1(r - h, 0.0)) / (2.0 * h);
            assert!((fd - smooth_l1_grad(r, 0.0)).abs() < 1e-8);
        }
    }
}
