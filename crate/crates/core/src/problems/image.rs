use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods win whenever std is linked
use num_traits::Float;

/// Piecewise-smooth test image in `[0, 1]`: a linear gradient background
/// with a disc, a rectangle, a triangle and a smoothly shaded ellipse.
pub fn synthetic_image(rows: usize, cols: usize) -> Vec<f64> {
    let mut img = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let u = (i as f64 + 0.5) / rows as f64;
            let v = (j as f64 + 0.5) / cols as f64;
            let mut val = 0.15 + 0.25 * v;
            if (u - 0.3).powi(2) + (v - 0.3).powi(2) < 0.18f64.powi(2) {
                val = 0.9;
            }
            if (0.55..0.85).contains(&u) && (0.15..0.45).contains(&v) {
                val = 0.55;
            }
            if u > 0.2 && u < 0.6 && v > 0.55 && (v - 0.55) < 0.9 * (u - 0.2) && (v - 0.55) < 0.9 * (0.6 - u) {
                val = 0.05;
            }
            let e = ((u - 0.72) / 0.16).powi(2) + ((v - 0.72) / 0.22).powi(2);
            if e < 1.0 {
                val = 0.4 + 0.5 * (1.0 - e);
            }
            img.push(val.clamp(0.0, 1.0));
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_structure() {
        let img = synthetic_image(77, 77);
        assert_eq!(img.len(), 77 * 77);
        assert!(img.iter().all(|v| (0.0..=1.0).contains(v)));
        let distinct = {
            let mut v: Vec<i64> = img.iter().map(|x| (x * 1e6) as i64).collect();
            v.sort_unstable();
            v.dedup();
            v.len()
        };
        assert!(distinct > 20);
        assert_eq!(synthetic_image(10, 12), synthetic_image(10, 12));
    }
}
