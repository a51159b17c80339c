//! Small algebra helpers shared by the mesh, mechanics and integrator modules.

use nalgebra::{Matrix3, Vector3};

/// Cross-product matrix: `skew(x) * y == x.cross(&y)`.
#[inline]
pub fn skew(x: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -x.z, x.y, x.z, 0.0, -x.x, -x.y, x.x, 0.0)
}

/// Inverse of [`skew`] for a skew-symmetric matrix (reads the three entries).
#[inline]
pub fn unskew(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Rotation matrix for a rotation of `angle` radians about `axis` (unit).
pub fn rotation_about(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    let k = skew(axis);
    Matrix3::identity() + s * k + (1.0 - c) * (k * k)
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Ordinary least-squares fit `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let a = (sy - b * sx) / n;
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn skew_matches_cross_product() {
        let x = Vector3::new(0.3, -1.2, 2.0);
        let y = Vector3::new(-0.7, 0.1, 0.4);
        assert_relative_eq!(skew(&x) * y, x.cross(&y), epsilon = 1e-15);
        assert_relative_eq!(unskew(&skew(&x)), x, epsilon = 0.0);
    }

    #[test]
    fn rotation_about_is_orthogonal() {
        let axis = Vector3::new(1.0, 2.0, -0.5).normalize();
        let r = rotation_about(&axis, 0.73);
        assert_relative_eq!(r.transpose() * r, Matrix3::identity(), epsilon = 1e-14);
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn log_log_slope_recovers_exponent() {
        let pts: Vec<(f64, f64)> = [1.0, 0.5, 0.25, 0.125]
            .iter()
            .map(|&h: &f64| (h, 3.0 * h.powi(2)))
            .collect();
        assert_relative_eq!(log_log_slope(&pts), 2.0, epsilon = 1e-12);
    }
}
