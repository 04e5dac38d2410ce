use nalgebra::{Matrix2, Matrix2x4, Matrix4, SymmetricEigen, Vector2, Vector4};

use crate::error::{Error, Result};

/// Polar measurement of a cluster centroid. Azimuth is measured from the
/// boresight (+y) towards +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub range_m: f64,
    pub azimuth_deg: f64,
    pub doppler_mps: Option<f64>,
    /// Covariance of `(range [m], azimuth [rad])`.
    pub r: Matrix2<f64>,
}

impl Measurement {
    pub fn new(range_m: f64, azimuth_deg: f64, sigma_range: f64, sigma_az_deg: f64) -> Self {
        let sa = sigma_az_deg.to_radians();
        Self {
            range_m,
            azimuth_deg,
            doppler_mps: None,
            r: Matrix2::new(sigma_range * sigma_range, 0.0, 0.0, sa * sa),
        }
    }

    pub fn from_xy(x: f64, y: f64, sigma_range: f64, sigma_az_deg: f64) -> Self {
        Self::new(x.hypot(y), x.atan2(y).to_degrees(), sigma_range, sigma_az_deg)
    }

    pub fn z(&self) -> Vector2<f64> {
        Vector2::new(self.range_m, self.azimuth_deg.to_radians())
    }

    pub fn xy(&self) -> (f64, f64) {
        let (s, c) = self.azimuth_deg.to_radians().sin_cos();
        (self.range_m * s, self.range_m * c)
    }

    pub fn is_valid(&self) -> bool {
        self.range_m.is_finite() && self.azimuth_deg.is_finite() && self.r.iter().all(|v| v.is_finite()) && self.r.cholesky().is_some()
    }
}

/// Constant-velocity state `(x, y, vx, vy)` with covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub x: Vector4<f64>,
    pub p: Matrix4<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Innovation {
    pub y: Vector2<f64>,
    pub s: Matrix2<f64>,
    /// Normalized innovation squared, `yᵀ S⁻¹ y`.
    pub nis: f64,
}

pub fn wrap_angle(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    (a + t / 2.0).rem_euclid(t) - t / 2.0
}

pub fn transition(dt: f64) -> Matrix4<f64> {
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    f
}

/// Continuous white-acceleration process noise with spectral density `sigma_a²`.
pub fn process_noise(dt: f64, sigma_a: f64) -> Matrix4<f64> {
    let q = sigma_a * sigma_a;
    let (a, b, c) = (dt.powi(3) / 3.0 * q, dt.powi(2) / 2.0 * q, dt * q);
    Matrix4::new(
        a, 0.0, b, 0.0, //
        0.0, a, 0.0, b, //
        b, 0.0, c, 0.0, //
        0.0, b, 0.0, c,
    )
}

pub fn h(x: &Vector4<f64>) -> Vector2<f64> {
    Vector2::new(x[0].hypot(x[1]), x[0].atan2(x[1]))
}

pub fn jacobian(x: &Vector4<f64>) -> Matrix2x4<f64> {
    let r2 = (x[0] * x[0] + x[1] * x[1]).max(1e-12);
    let r = r2.sqrt();
    Matrix2x4::new(
        x[0] / r,
        x[1] / r,
        0.0,
        0.0, //
        x[1] / r2,
        -x[0] / r2,
        0.0,
        0.0,
    )
}

/// Symmetrizes and lifts eigenvalues to `floor`. Returns true when a change
/// was needed to keep the matrix positive definite.
pub fn recondition(p: &mut Matrix4<f64>, floor: f64) -> bool {
    let sym = (*p + p.transpose()) * 0.5;
    if sym.cholesky().is_some() && sym.symmetric_eigenvalues().min() >= floor {
        *p = sym;
        return false;
    }
    let mut eig = SymmetricEigen::new(sym);
    eig.eigenvalues.apply(|v| *v = v.max(floor));
    *p = eig.recompose();
    *p = (*p + p.transpose()) * 0.5;
    true
}

impl Estimate {
    /// Track initialized at a measurement, velocity unknown.
    pub fn from_measurement(z: &Measurement, sigma_v: f64) -> Self {
        let (x, y) = z.xy();
        let az = z.azimuth_deg.to_radians();
        // Polar-to-Cartesian covariance via the inverse Jacobian.
        let g = Matrix2::new(az.sin(), z.range_m * az.cos(), az.cos(), -z.range_m * az.sin());
        let pos = g * z.r * g.transpose();
        let mut p = Matrix4::zeros();
        p.fixed_view_mut::<2, 2>(0, 0).copy_from(&pos);
        p[(2, 2)] = sigma_v * sigma_v;
        p[(3, 3)] = sigma_v * sigma_v;
        let mut est = Self {
            x: Vector4::new(x, y, 0.0, 0.0),
            p,
        };
        recondition(&mut est.p, 1e-9);
        est
    }

    pub fn predict(&self, dt: f64, sigma_a: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
        }
        let f = transition(dt);
        Ok(Self {
            x: f * self.x,
            p: f * self.p * f.transpose() + process_noise(dt, sigma_a),
        })
    }

    pub fn innovation(&self, z: &Measurement) -> Option<Innovation> {
        let hj = jacobian(&self.x);
        let mut y = z.z() - h(&self.x);
        y[1] = wrap_angle(y[1]);
        let s = hj * self.p * hj.transpose() + z.r;
        let s_inv = s.try_inverse()?;
        let nis = (y.transpose() * s_inv * y)[(0, 0)];
        nis.is_finite().then_some(Innovation { y, s, nis })
    }

    /// EKF update in Joseph form. Fails when the innovation covariance is singular.
    pub fn update(&self, z: &Measurement) -> Result<(Self, Innovation)> {
        let inn = self
            .innovation(z)
            .ok_or_else(|| Error::InvalidParams("singular innovation covariance".into()))?;
        let hj = jacobian(&self.x);
        let s_inv = inn.s.try_inverse().expect("checked invertible");
        let k = self.p * hj.transpose() * s_inv;
        let ikh = Matrix4::identity() - k * hj;
        let mut p = ikh * self.p * ikh.transpose() + k * z.r * k.transpose();
        recondition(&mut p, 1e-9);
        Ok((Self { x: self.x + k * inn.y, p }, inn))
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x[0], self.x[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn est(x: [f64; 4], p: f64) -> Estimate {
        Estimate {
            x: Vector4::from(x),
            p: Matrix4::identity() * p,
        }
    }

    #[test]
    fn predict_moves_at_constant_velocity() {
        let e = est([0.0, 0.0, 1.0, 0.0], 1.0).predict(1.0, 1.0).unwrap();
        assert_eq!((e.x[0], e.x[1]), (1.0, 0.0));
        assert!(est([0.0; 4], 1.0).predict(0.0, 1.0).is_err());
    }

    #[test]
    fn perfect_measurement_with_tiny_noise() {
        let e = est([1.0, 4.0, 0.0, 0.0], 0.5);
        let z = Measurement::from_xy(1.0, 4.0, 1e-6, 1e-6);
        let (post, _) = e.update(&z).unwrap();
        assert!((post.x[0] - 1.0).abs() < 1e-9 && (post.x[1] - 4.0).abs() < 1e-9);
        assert!(post.p.trace() < e.p.trace());
    }

    #[test]
    fn huge_noise_leaves_state() {
        let e = est([1.0, 4.0, 0.3, 0.1], 0.5);
        let z = Measurement::from_xy(2.0, 3.0, 1e8, 1e8);
        let (post, _) = e.update(&z).unwrap();
        assert!((post.x - e.x).norm() < 1e-6);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let x = Vector4::new(1.3, 3.7, 0.0, 0.0);
        let j = jacobian(&x);
        let eps = 1e-6;
        for c in 0..2 {
            let mut xp = x;
            xp[c] += eps;
            let d = (h(&xp) - h(&x)) / eps;
            assert!((d[0] - j[(0, c)]).abs() < 1e-5 && (d[1] - j[(1, c)]).abs() < 1e-5);
        }
    }

    #[test]
    fn noise_free_cv_target_converges() {
        let truth = |k: f64| Vector4::new(-1.0 + 0.5 * 0.1 * k, 2.0 + 0.8 * 0.1 * k, 0.5, 0.8);
        let first = truth(0.0);
        let mut e = Estimate::from_measurement(&Measurement::from_xy(first[0], first[1], 0.2, 4.0), 1.0);
        for k in 1..=50 {
            let t = truth(k as f64);
            e = e.predict(0.1, 1.5).unwrap();
            e = e.update(&Measurement::from_xy(t[0], t[1], 0.2, 4.0)).unwrap().0;
        }
        let t = truth(50.0);
        assert!((e.x[0] - t[0]).hypot(e.x[1] - t[1]) < 1e-3);
    }

    #[test]
    fn recondition_repairs_indefinite() {
        let mut p = Matrix4::identity();
        p[(0, 1)] = 2.0;
        p[(1, 0)] = 1.9;
        assert!(recondition(&mut p, 1e-6));
        assert!(p.cholesky().is_some());
        assert_eq!(p, p.transpose());
    }

    proptest! {
        #[test]
        fn covariance_stays_pd(
            steps in prop::collection::vec((0.5..8.0f64, -45.0..45.0f64, 0.01..0.5f64, 0.5..10.0f64), 1..30),
            dt in 0.01..1.0f64,
        ) {
            let mut e = Estimate::from_measurement(&Measurement::new(3.0, 0.0, 0.2, 4.0), 1.0);
            for (r, az, sr, sa) in steps {
                let before = e.p.trace();
                e = e.predict(dt, 1.5).unwrap();
                prop_assert!(e.p.trace() > before);
                if let Ok((post, _)) = e.update(&Measurement::new(r, az, sr, sa)) {
                    e = post;
                }
                prop_assert!(e.p.cholesky().is_some());
                prop_assert!((e.p - e.p.transpose()).abs().max() < 1e-9 * e.p.abs().max().max(1.0));
            }
        }
    }
}
