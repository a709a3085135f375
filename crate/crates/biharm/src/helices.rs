//! The closed-form helix family of BCV spaces and the totally-biharmonic
//! radius quartic.

use crate::curves::AnalyticCurve;
use crate::error::{GeomError, Result};
use nalgebra::DVector;

/// Parameters of the helix `gamma(s) = (r sin(lambda s), -r cos(lambda s),
/// lambda mu s)` in `N(a,b)`, together with the derived constants.
#[derive(Clone, Copy, Debug)]
pub struct HelixParams {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub mu: f64,
    pub lambda_a: f64,
    pub lambda: f64,
    pub sin_omega: f64,
    pub cos_omega: f64,
    pub varpi: f64,
}

impl HelixParams {
    pub fn new(a: f64, b: f64, r: f64, mu: f64) -> Result<Self> {
        if r <= 0.0 {
            return Err(GeomError::Parameter("helix radius must be positive".into()));
        }
        let lambda_a = 1.0 + a * r * r;
        if lambda_a <= 0.0 {
            return Err(GeomError::Parameter(format!(
                "helix orbit outside the chart: 1 + a r^2 = {lambda_a}"
            )));
        }
        // The printed angle relation; note that differentiating the
        // parametrization and projecting on the frame gives an E3-component
        // of -cos(omega), so the tangent-dependent quantities below carry
        // the compensating sign on the cos(omega) terms.
        let q = 0.5 * b * r * r - mu * lambda_a;
        let den = (r * r + q * q).sqrt();
        let lambda = lambda_a / den;
        let sin_omega = r / den;
        let cos_omega = q / den;
        let varpi = lambda - 2.0 * a * r * sin_omega + b * cos_omega;
        Ok(Self {
            a,
            b,
            r,
            mu,
            lambda_a,
            lambda,
            sin_omega,
            cos_omega,
            varpi,
        })
    }

    /// The angle relations `(sin w, cos w)`.
    pub fn angles(&self) -> (f64, f64) {
        (self.sin_omega, self.cos_omega)
    }

    /// Closed-form curvature and torsion under the standard Frenet
    /// convention (`kappa >= 0`, binormal `t x n` with the right-handed
    /// chart orientation): `kappa = |varpi| sin(omega)` and
    /// `tau = -varpi cos(omega) + b/2` (the E3-component of the tangent is
    /// `-cos(omega)`, see [`HelixParams::new`]). The signed quantities match
    /// the classical expressions up to the orientation of `n` and `b`;
    /// `tau^2` and `b_3^2`, the only quantities the biharmonic closure uses,
    /// agree.
    pub fn kappa_tau(&self) -> Result<(f64, f64)> {
        let kappa_signed = self.varpi * self.sin_omega;
        if kappa_signed.abs() < 1e-12 {
            return Err(GeomError::Parameter(
                "geodesic helix: varpi sin(omega) = 0".into(),
            ));
        }
        let kappa = kappa_signed.abs();
        let tau = -self.varpi * self.cos_omega + 0.5 * self.b;
        Ok((kappa, tau))
    }

    /// Whether the helix is an ambient geodesic.
    pub fn is_geodesic(&self) -> bool {
        (self.varpi * self.sin_omega).abs() < 1e-12
    }

    /// Arc-length analytic curve over `[0, length]`.
    pub fn curve(&self, length: f64) -> AnalyticCurve {
        let (r, lam, mu) = (self.r, self.lambda, self.mu);
        let eval = move |s: f64, order: u32| -> DVector<f64> {
            // phase-shifted trig derivatives
            let ph = 0.5 * std::f64::consts::PI * order as f64;
            let scale = lam.powi(order as i32);
            let z = match order {
                0 => lam * mu * s,
                1 => lam * mu,
                _ => 0.0,
            };
            DVector::from_column_slice(&[
                r * scale * (lam * s + ph).sin(),
                -r * scale * (lam * s + ph).cos(),
                z,
            ])
        };
        AnalyticCurve::new(
            (0.0, length),
            move |s| eval(s, 0),
            move |s| eval(s, 1),
            move |s| eval(s, 2),
            move |s| eval(s, 3),
        )
    }
}

/// Convenience constructor matching the operation vocabulary.
pub fn make_helix(a: f64, b: f64, r: f64, mu: f64, length: f64) -> Result<AnalyticCurve> {
    Ok(HelixParams::new(a, b, r, mu)?.curve(length))
}

pub fn helix_angles(a: f64, b: f64, r: f64, mu: f64) -> Result<(f64, f64)> {
    Ok(HelixParams::new(a, b, r, mu)?.angles())
}

pub fn helix_kappa_tau(a: f64, b: f64, r: f64, mu: f64) -> Result<(f64, f64)> {
    HelixParams::new(a, b, r, mu)?.kappa_tau()
}

/// Coefficients and positive real roots (in `r^2`) of the radius equation
/// `c4 r^4 + c2 r^2 + c0 = 0` whose solutions are the candidate
/// totally-biharmonic helix radii.
#[derive(Clone, Debug)]
pub struct QuarticRoots {
    pub c4: f64,
    pub c2: f64,
    pub c0: f64,
    /// Positive real roots in `r^2`, ascending.
    pub roots_r2: Vec<f64>,
    /// The quartic degenerated to a lower degree (`c4 = 0`).
    pub degenerate: bool,
}

pub fn tb_radius_quartic(a: f64, b: f64, mu: f64) -> QuarticRoots {
    let c4 = a * (2.0 * a * (1.0 - mu * b) + b * b);
    let c2 = b * b - 12.0 * a;
    let c0 = 2.0 * (1.0 + mu * b);
    let mut roots = Vec::new();
    let degenerate = c4.abs() < 1e-14;
    if degenerate {
        if c2.abs() > 1e-14 {
            roots.push(-c0 / c2);
        }
    } else {
        let disc = c2 * c2 - 4.0 * c4 * c0;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            roots.push((-c2 - sq) / (2.0 * c4));
            roots.push((-c2 + sq) / (2.0 * c4));
        }
    }
    let mut roots_r2: Vec<f64> = roots.into_iter().filter(|&x| x > 0.0).collect();
    roots_r2.sort_by(|p, q| p.partial_cmp(q).unwrap());
    QuarticRoots {
        c4,
        c2,
        c0,
        roots_r2,
        degenerate,
    }
}

/// The two totally-biharmonic radii `r^2 = (3 -+ 2 sqrt 2)/a` of
/// `N(a, 0) ~ S^2(4a) x R`, ascending.
pub fn tb_radii(a: f64) -> Result<(f64, f64)> {
    if a <= 0.0 {
        return Err(GeomError::Parameter(
            "totally biharmonic radii require a > 0".into(),
        ));
    }
    let s = 2.0 * 2.0f64.sqrt();
    Ok(((3.0 - s) / a, (3.0 + s) / a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{self, Curve, FrenetData};
    use crate::spaces::Ambient;
    use proptest::prelude::*;

    #[test]
    fn equatorial_helix_values() {
        let h = HelixParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
        assert!((h.lambda_a - 2.0).abs() < 1e-15);
        assert!((h.lambda - 2.0).abs() < 1e-15);
        let c = h.curve(2.0);
        let s = 0.7;
        let p = c.point(s).coords;
        assert!((p[0] - (2.0 * s).sin()).abs() < 1e-15);
        assert!((p[1] + (2.0 * s).cos()).abs() < 1e-15);
        assert!(p[2].abs() < 1e-15);
        // varpi = 2 - 2 = 0: the equator of S^2(4) is an ambient geodesic
        assert!(h.is_geodesic());
        assert!(matches!(h.kappa_tau(), Err(GeomError::Parameter(_))));
    }

    #[test]
    fn euclidean_unit_circle() {
        let h = HelixParams::new(0.0, 0.0, 1.0, 0.0).unwrap();
        assert!((h.lambda - 1.0).abs() < 1e-15);
        let c = h.curve(2.0);
        let p = c.point(0.0).coords;
        assert!(p[0].abs() < 1e-15 && (p[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(HelixParams::new(1.0, 0.0, -1.0, 0.0).is_err());
        assert!(HelixParams::new(-1.0, 0.0, 2.0, 0.0).is_err(), "1 + ar^2 < 0");
    }

    #[test]
    fn angle_examples() {
        let (s, c) = helix_angles(1.0, 0.0, 1.0, 0.0).unwrap();
        assert!((s - 1.0).abs() < 1e-15 && c.abs() < 1e-15);

        let (s, c) = helix_angles(1.0, 0.0, 1.0, 1.0).unwrap();
        let sq5 = 5.0f64.sqrt();
        assert!((s - 1.0 / sq5).abs() < 1e-15);
        assert!((c + 2.0 / sq5).abs() < 1e-15);
    }

    #[test]
    fn kappa_tau_examples() {
        let r = (3.0 - 2.0 * 2.0f64.sqrt()).sqrt();
        let (k, t) = helix_kappa_tau(1.0, 0.0, r, 0.0).unwrap();
        assert!((k - 2.0).abs() < 1e-12 && t.abs() < 1e-12);

        let h = HelixParams::new(1.0, 0.0, 2.0, 0.0).unwrap();
        assert!((h.lambda - 2.5).abs() < 1e-15);
        assert!((h.varpi + 1.5).abs() < 1e-15);
        let (k, t) = h.kappa_tau().unwrap();
        assert!((k - 1.5).abs() < 1e-12 && t.abs() < 1e-12);
    }

    #[test]
    fn quartic_examples() {
        let s = 2.0 * 2.0f64.sqrt();
        for k in 0..20 {
            let mu = -1.0 + 0.1 * k as f64;
            let q = tb_radius_quartic(1.0, 0.0, mu);
            assert_eq!(q.roots_r2.len(), 2);
            assert!((q.roots_r2[0] - (3.0 - s)).abs() < 1e-12);
            assert!((q.roots_r2[1] - (3.0 + s)).abs() < 1e-12);
        }

        let q = tb_radius_quartic(1.0, 1.0, 0.0);
        assert!((q.c4 - 3.0).abs() < 1e-15 && (q.c2 + 11.0).abs() < 1e-15);
        let d = 97.0f64.sqrt();
        assert!((q.roots_r2[0] - (11.0 - d) / 6.0).abs() < 1e-12);
        assert!((q.roots_r2[1] - (11.0 + d) / 6.0).abs() < 1e-12);

        let q = tb_radius_quartic(1.0, 1.0, 1.0);
        let d = 105.0f64.sqrt();
        assert!((q.roots_r2[0] - (11.0 - d) / 2.0).abs() < 1e-12);
        assert!((q.roots_r2[1] - (11.0 + d) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn quartic_degenerates_for_a_zero() {
        let q = tb_radius_quartic(0.0, 1.0, 0.3);
        assert!(q.degenerate);
        assert!(q.roots_r2.is_empty(), "-c0/c2 < 0 is not admissible");
    }

    #[test]
    fn tb_radii_values_and_scaling() {
        let (m, p) = tb_radii(1.0).unwrap();
        assert!((m - 0.17157287525380993).abs() < 1e-12);
        assert!((p - 5.82842712474619).abs() < 1e-12);
        let (m2, p2) = tb_radii(2.0).unwrap();
        assert!((m2 - 0.5 * m).abs() < 1e-14 && (p2 - 0.5 * p).abs() < 1e-14);
        assert!(tb_radii(0.0).is_err());
        assert!(tb_radii(-1.0).is_err());
    }

    #[test]
    fn mu_independence_iff_b_zero() {
        // b = 0: identical roots over mu (quartic_examples); b = 1: the root
        // sets at mu in {0, 1/2, 1} are pairwise disjoint
        let sets: Vec<Vec<f64>> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&mu| tb_radius_quartic(1.0, 1.0, mu).roots_r2)
            .collect();
        for i in 0..3 {
            for j in (i + 1)..3 {
                for x in &sets[i] {
                    for y in &sets[j] {
                        assert!((x - y).abs() > 1e-3, "roots collide: {x} vs {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn tb_radii_close_the_full_curve_system() {
        let a = 1.0;
        let space = crate::spaces::BcvSpace::new(a, 0.0);
        let (r2m, r2p) = tb_radii(a).unwrap();
        for k in 0..20 {
            let mu = -1.0 + 0.1 * k as f64;
            for r2 in [r2m, r2p] {
                let h = HelixParams::new(a, 0.0, r2.sqrt(), mu).unwrap();
                let curve = h.curve(2.0);
                let grid = curves::sample_grid(&curve, 5, 0.3);
                let res = curves::bcv_biharmonic_system(&space, &curve, &grid).unwrap();
                assert!(
                    res.max_residual() < 1e-6,
                    "mu = {mu}, r^2 = {r2}: residual {}",
                    res.max_residual()
                );
            }
        }
    }

    #[test]
    fn closed_forms_match_numerical_frenet() {
        let cases = [
            (1.0, 0.0, 0.6, 0.4),
            (0.5, 1.0, 0.9, -0.3),
            (1.2, -0.8, 0.5, 0.7),
            (-0.3, 0.6, 1.1, 0.2),
            (0.0, 1.0, 0.8, 0.5),
        ];
        for (a, b, r, mu) in cases {
            let h = HelixParams::new(a, b, r, mu).unwrap();
            let (kc, tc) = h.kappa_tau().unwrap();
            let amb = Ambient::bcv(a, b);
            let curve = h.curve(2.0);
            for s in [0.5, 1.0, 1.5] {
                let f = match curves::frenet_apparatus(&amb, &curve, s).unwrap() {
                    FrenetData::Frame(f) => f,
                    _ => panic!("non-geodesic case"),
                };
                assert!((f.kappa - kc).abs() < 1e-5, "kappa at {a},{b},{r},{mu}");
                assert!((f.tau.abs() - tc.abs()).abs() < 1e-5, "tau at {a},{b},{r},{mu}");
                assert!(f.n3.unwrap().abs() < 1e-6, "n3 vanishes");
                assert!(
                    (f.b3.unwrap().abs() - h.sin_omega).abs() < 1e-6,
                    "|b3| = sin(omega)"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn angles_are_on_the_unit_circle(
            a in -0.8f64..1.5,
            b in -1.5f64..1.5,
            r in 0.1f64..1.0,
            mu in -2.0f64..2.0,
        ) {
            prop_assume!(1.0 + a * r * r > 1e-2);
            let (s, c) = helix_angles(a, b, r, mu).unwrap();
            prop_assert!((s * s + c * c - 1.0).abs() < 1e-12);
            prop_assert!(s > 0.0);
        }

        #[test]
        fn helices_are_unit_speed(
            a in -0.8f64..1.5,
            b in -1.5f64..1.5,
            r in 0.1f64..1.0,
            mu in -2.0f64..2.0,
        ) {
            prop_assume!(1.0 + a * r * r > 1e-2);
            let h = HelixParams::new(a, b, r, mu).unwrap();
            let amb = Ambient::bcv(a, b);
            let curve = h.curve(2.0);
            for s in [0.0, 0.9, 1.7] {
                let p = curve.point(s);
                prop_assert!((amb.norm(&p, &curve.d1(s)) - 1.0).abs() < 1e-10);
            }
        }

        #[test]
        fn quartic_roots_satisfy_the_polynomial(
            a in -1.0f64..2.0,
            b in -1.5f64..1.5,
            mu in -1.0f64..1.0,
        ) {
            let q = tb_radius_quartic(a, b, mu);
            for &r2 in &q.roots_r2 {
                let v = q.c4 * r2 * r2 + q.c2 * r2 + q.c0;
                let scale = q.c4.abs().max(q.c2.abs()).max(q.c0.abs()).max(1.0);
                prop_assert!(v.abs() < 1e-9 * scale * (1.0 + r2 * r2));
            }
        }
    }
}
