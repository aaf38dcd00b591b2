//! Quintic smoothstep cutoffs.

/// S(s) = 6s⁵ − 15s⁴ + 10s³ on [0, 1], clamped outside, and its derivatives.
pub fn smoothstep(s: f64, k: usize) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let s2 = s * s;
    match k {
        0 => s2 * s * (10.0 - 15.0 * s + 6.0 * s2),
        1 => 30.0 * s2 * (1.0 - s) * (1.0 - s),
        2 => 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s),
        3 => 60.0 * (1.0 - 6.0 * s + 6.0 * s2),
        _ => 0.0,
    }
}

/// Cutoff χ: 1 on [0, 3/4], 0 on [1, ∞). `k` selects the derivative order.
pub fn chi(t: f64, k: usize) -> f64 {
    let s = 4.0 * (t - 0.75);
    let v = 4f64.powi(k as i32) * smoothstep(s, k);
    if k == 0 {
        1.0 - v
    } else {
        -v
    }
}

/// Far-field weight: 0 below Y = 3, 1 above Y = 4.
pub fn far_weight(y: f64) -> f64 {
    smoothstep(y - 3.0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn cutoff_values() {
        assert_eq!(chi(0.0, 0), 1.0);
        assert_eq!(chi(0.75, 0), 1.0);
        assert_eq!(chi(1.0, 0), 0.0);
        assert_eq!(chi(3.0, 0), 0.0);
        assert_relative_eq!(chi(0.875, 0), 0.5, epsilon = 1e-15);
        assert_eq!(far_weight(2.0), 0.0);
        assert_eq!(far_weight(5.0), 1.0);
    }

    proptest! {
        #[test]
        fn cutoff_derivatives_match_differences(t in 0.76f64..0.99) {
            let h = 1e-6;
            for k in 0..3 {
                let fd = (chi(t + h, k) - chi(t - h, k)) / (2.0 * h);
                prop_assert!((fd - chi(t, k + 1)).abs() < 1e-4 * (1.0 + chi(t, k + 1).abs()));
            }
        }

        #[test]
        fn cutoff_bounded(t in 0.0f64..2.0) {
            let v = chi(t, 0);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
