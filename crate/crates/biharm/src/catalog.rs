//! Named example and counterexample surfaces with their expected verdicts,
//! plus the verification driver that measures them.

use crate::config::RunConfig;
use crate::curves::{self, AnalyticCurve, Curve};
use crate::error::{GeomError, Result};
use crate::helices;
use crate::hypersurfaces::{
    self, AppendConst, HopfCylinderChart, Immersion, ParamDomain, ProductChart,
    RoundCylinderChart, SphereChart,
};
use crate::report::{Check, Meta, VerificationReport};
use crate::spaces::Ambient;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Expected verdicts of a catalog case.
#[derive(Clone, Debug)]
pub struct Expected {
    /// Totally biharmonic.
    pub tb: bool,
    /// Satisfies the biharmonic hypersurface system (when printed).
    pub biharmonic: Option<bool>,
    pub totally_geodesic: bool,
    /// Principal curvatures in descending order, where printed.
    pub principal: Option<Vec<f64>>,
    pub minimal: Option<bool>,
}

pub struct CatalogCase {
    pub name: String,
    pub immersion: Immersion,
    pub expected: Expected,
    /// E3-invariant cylinder of a BCV space: run the base-curve checks.
    pub hopf: bool,
}

fn sphere_domains(k: usize) -> Vec<ParamDomain> {
    let mut d = vec![ParamDomain::Interval(0.0, PI); k];
    d[k - 1] = ParamDomain::Periodic(2.0 * PI);
    d
}

/// Generalized Clifford torus `S^p[1/sqrt 2] x S^q[1/sqrt 2]` in
/// `S^{p+q+1}[1]`.
pub fn clifford_torus(p: usize, q: usize) -> CatalogCase {
    assert!(p >= 1 && q >= 1);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let map = ProductChart {
        left: Box::new(SphereChart::new(p, inv_sqrt2)),
        right: Box::new(SphereChart::new(q, inv_sqrt2)),
    };
    let mut domains = sphere_domains(p);
    domains.extend(sphere_domains(q));
    let m = p + q;
    let mean = (p as f64 - q as f64) / m as f64;
    let mut principal: Vec<f64> = std::iter::repeat(1.0)
        .take(p)
        .chain(std::iter::repeat(-1.0).take(q))
        .collect();
    principal.sort_by(|a, b| b.partial_cmp(a).unwrap());
    CatalogCase {
        name: format!("clifford-torus:{p},{q}"),
        immersion: Immersion {
            ambient: Ambient::space_form(p + q + 1, 1.0),
            map: Box::new(map),
            domains,
            orientation: 1.0,
        },
        expected: Expected {
            tb: true,
            biharmonic: Some(true),
            totally_geodesic: false,
            principal: Some(principal),
            minimal: Some(mean.abs() < 1e-15),
        },
        hopf: false,
    }
}

/// Small hypersphere `S^{n-1}[1/sqrt 2]` in `S^n[1]`.
pub fn small_hypersphere(n: usize) -> CatalogCase {
    assert!(n >= 3);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let map = AppendConst {
        inner: Box::new(SphereChart::new(n - 1, inv_sqrt2)),
        consts: vec![inv_sqrt2],
    };
    CatalogCase {
        name: format!("small-hypersphere:n={n}"),
        immersion: Immersion {
            ambient: Ambient::space_form(n, 1.0),
            map: Box::new(map),
            domains: sphere_domains(n - 1),
            // eta toward the pole so that lambda_i = +1
            orientation: -1.0,
        },
        expected: Expected {
            tb: true,
            biharmonic: Some(true),
            totally_geodesic: false,
            principal: Some(vec![1.0; n - 1]),
            minimal: Some(false),
        },
        hopf: false,
    }
}

/// Totally geodesic equator `S^{n-1}[1]` in `S^n[1]`.
pub fn equator(n: usize) -> CatalogCase {
    assert!(n >= 3);
    let map = AppendConst {
        inner: Box::new(SphereChart::new(n - 1, 1.0)),
        consts: vec![0.0],
    };
    CatalogCase {
        name: format!("equator:n={n}"),
        immersion: Immersion {
            ambient: Ambient::space_form(n, 1.0),
            map: Box::new(map),
            domains: sphere_domains(n - 1),
            orientation: 1.0,
        },
        expected: Expected {
            tb: true,
            biharmonic: Some(true),
            totally_geodesic: true,
            principal: Some(vec![0.0; n - 1]),
            minimal: Some(true),
        },
        hopf: false,
    }
}

fn hopf_immersion(a: f64, b: f64, r: f64, orientation: f64) -> Result<Immersion> {
    if r <= 0.0 {
        return Err(GeomError::Parameter("hopf radius must be positive".into()));
    }
    let lambda_a = 1.0 + a * r * r;
    if lambda_a <= 0.0 {
        return Err(GeomError::Parameter(format!(
            "hopf orbit outside the chart: 1 + a r^2 = {lambda_a}"
        )));
    }
    Ok(Immersion {
        ambient: Ambient::bcv(a, b),
        map: Box::new(HopfCylinderChart {
            r,
            lam: lambda_a / r,
            drift: 0.5 * b * r,
        }),
        domains: vec![
            ParamDomain::Periodic(2.0 * PI * r / lambda_a),
            ParamDomain::Free,
        ],
        orientation,
    })
}

/// Totally biharmonic rotational Hopf cylinder `S^1(2 rho) x R` in
/// `S^2(rho) x R = N(rho/4, 0)`, the radius-`r_-` surface.
pub fn tb_cylinder(rho: f64) -> Result<CatalogCase> {
    tb_cylinder_signed(rho, false)
}

/// The congruent radius-`r_+` variant (opposite `II_11` sign).
pub fn tb_cylinder_plus(rho: f64) -> Result<CatalogCase> {
    tb_cylinder_signed(rho, true)
}

fn tb_cylinder_signed(rho: f64, plus: bool) -> Result<CatalogCase> {
    if rho <= 0.0 {
        return Err(GeomError::Parameter("tb cylinder requires rho > 0".into()));
    }
    let a = 0.25 * rho;
    let (r2_minus, r2_plus) = helices::tb_radii(a)?;
    let r = if plus { r2_plus.sqrt() } else { r2_minus.sqrt() };
    let sqrt_rho = rho.sqrt();
    // eta points toward the rotation axis; the r_+ surface bends the other way
    let (orientation, lambda) = if plus {
        (-1.0, -sqrt_rho)
    } else {
        (-1.0, sqrt_rho)
    };
    let name = if plus {
        format!("tb-cylinder-plus:rho={rho}")
    } else {
        format!("tb-cylinder:rho={rho}")
    };
    let mut principal = vec![lambda, 0.0];
    principal.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(CatalogCase {
        name,
        immersion: hopf_immersion(a, 0.0, r, orientation)?,
        expected: Expected {
            tb: true,
            // |S|^2 = rho matches Ric(eta, eta) = 4a, so the constant mean
            // curvature closes the normal equation
            biharmonic: Some(true),
            totally_geodesic: false,
            principal: Some(principal),
            minimal: Some(false),
        },
        hopf: true,
    })
}

/// General rotational Hopf cylinder; the expected verdict follows from
/// membership of `r^2` in the totally-biharmonic radius set.
pub fn hopf_cylinder(a: f64, b: f64, r: f64) -> Result<CatalogCase> {
    let imm = hopf_immersion(a, b, r, -1.0)?;
    let tb = if b == 0.0 && a > 0.0 {
        let (m, p) = helices::tb_radii(a)?;
        let r2 = r * r;
        (r2 - m).abs() < 1e-9 || (r2 - p).abs() < 1e-9
    } else {
        false
    };
    Ok(CatalogCase {
        name: format!("hopf:a={a},b={b},r={r}"),
        immersion: imm,
        expected: Expected {
            tb,
            biharmonic: None,
            totally_geodesic: false,
            principal: None,
            minimal: None,
        },
        hopf: true,
    })
}

/// Round cylinder in Euclidean 3-space (negative control: flat ambients
/// admit only totally geodesic TB hypersurfaces).
pub fn round_cylinder_r3(r: f64) -> Result<CatalogCase> {
    if r <= 0.0 {
        return Err(GeomError::Parameter("cylinder radius must be positive".into()));
    }
    Ok(CatalogCase {
        name: format!("round-cylinder:r={r}"),
        immersion: Immersion {
            ambient: Ambient::euclidean3(),
            map: Box::new(RoundCylinderChart { r }),
            domains: vec![ParamDomain::Periodic(2.0 * PI), ParamDomain::Free],
            orientation: -1.0,
        },
        expected: Expected {
            tb: false,
            biharmonic: Some(false),
            totally_geodesic: false,
            principal: Some(vec![1.0 / r, 0.0]),
            minimal: Some(false),
        },
        hopf: true,
    })
}

/// Default orthonormal direction set for [`clifford_geodesic`]: `v_1, v_2`
/// span the first factor's plane, `v_3, v_4` the second factor's.
pub fn default_clifford_vectors(p: usize, q: usize) -> [DVector<f64>; 4] {
    let d = p + q + 2;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let unit = |k: usize| {
        let mut v = DVector::zeros(d);
        v[k] = inv_sqrt2;
        v
    };
    [unit(0), unit(1), unit(p + 1), unit(p + 2)]
}

/// Biharmonic geodesic of the generalized Clifford torus:
/// `gamma(s) = cos(sqrt 2 a s) v1 + sin(sqrt 2 a s) v2
///           + cos(sqrt 2 b s) v3 + sin(sqrt 2 b s) v4`.
pub fn clifford_geodesic(
    p: usize,
    q: usize,
    a_const: f64,
    b_const: f64,
    v: [DVector<f64>; 4],
    length: f64,
) -> Result<AnalyticCurve> {
    if (a_const * a_const + b_const * b_const - 1.0).abs() > 1e-12 {
        return Err(GeomError::Parameter(
            "clifford geodesic requires a^2 + b^2 = 1".into(),
        ));
    }
    let d = p + q + 2;
    for (i, vi) in v.iter().enumerate() {
        if vi.len() != d {
            return Err(GeomError::Parameter("direction dimension mismatch".into()));
        }
        if (vi.norm_squared() - 0.5).abs() > 1e-12 {
            return Err(GeomError::Parameter(format!(
                "|v_{}|^2 must be 1/2",
                i + 1
            )));
        }
        for vj in v.iter().skip(i + 1) {
            if vi.dot(vj).abs() > 1e-12 {
                return Err(GeomError::Parameter("directions must be orthogonal".into()));
            }
        }
    }
    // v1, v2 must lie in the first factor's subspace
    for vi in &v[..2] {
        if vi.rows(p + 1, q + 1).norm() > 1e-12 {
            return Err(GeomError::Parameter(
                "v1, v2 must lie in the first factor".into(),
            ));
        }
    }
    let sq2 = 2.0f64.sqrt();
    let (wa, wb) = (sq2 * a_const, sq2 * b_const);
    let eval = move |s: f64, order: u32| -> DVector<f64> {
        let ph = 0.5 * PI * order as f64;
        wa.powi(order as i32) * ((wa * s + ph).cos() * &v[0] + (wa * s + ph).sin() * &v[1])
            + wb.powi(order as i32)
                * ((wb * s + ph).cos() * &v[2] + (wb * s + ph).sin() * &v[3])
    };
    Ok(AnalyticCurve::new(
        (0.0, length),
        {
            let eval = eval.clone();
            move |s| eval(s, 0)
        },
        {
            let eval = eval.clone();
            move |s| eval(s, 1)
        },
        {
            let eval = eval.clone();
            move |s| eval(s, 2)
        },
        move |s| eval(s, 3),
    ))
}

/// All registered cases, in registry order.
pub fn registry() -> Vec<CatalogCase> {
    vec![
        clifford_torus(1, 1),
        clifford_torus(1, 2),
        small_hypersphere(3),
        equator(3),
        tb_cylinder(4.0).expect("valid parameters"),
        tb_cylinder_plus(4.0).expect("valid parameters"),
        hopf_cylinder(1.0, 0.0, 2.0).expect("valid parameters"),
        hopf_cylinder(1.0, 1.0, 0.5).expect("valid parameters"),
        round_cylinder_r3(1.0).expect("valid parameters"),
    ]
}

/// Resolve a case selector string against the registry.
pub fn resolve(name: &str) -> Result<CatalogCase> {
    registry()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| GeomError::UnknownCase(name.to_string()))
}

pub fn case_names() -> Vec<String> {
    registry().into_iter().map(|c| c.name).collect()
}

/// Deterministic per-case RNG: the run seed mixed with the case name.
pub fn case_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut h = seed;
    for byte in name.bytes() {
        h = h.wrapping_mul(0x100000001b3).wrapping_add(byte as u64);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Run every applicable check on a case and compare against the expected
/// verdicts. Quantitative checks (printed principal curvatures, Hopf base
/// identities, unit speed) must always hold; verdict checks pass when the
/// measurement agrees with the expectation, so negative controls report PASS
/// by failing their residual tests.
pub fn verify_case(case: &CatalogCase, cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut rng = case_rng(cfg.seed, &case.name);
    let imm = &case.immersion;
    let mut report = VerificationReport::new(
        &case.name,
        Meta {
            seed: cfg.seed,
            samples: cfg.pointwise_samples,
            step: cfg.geodesic_step,
        },
    );

    let samples: Vec<Vec<f64>> = (0..cfg.pointwise_samples)
        .map(|_| imm.sample_point(&mut rng))
        .collect();

    // printed principal curvatures
    if let Some(expected) = &case.expected.principal {
        let sd = imm.shape_operator(&samples[0])?;
        let mut measured = sd.principal.clone();
        measured.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let diff = measured
            .iter()
            .zip(expected)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        report.push(Check::new(
            "principal-curvatures",
            diff,
            cfg.tolerance("principal-curvatures", 1e-6),
        ));
    }

    // isoparametric spread on expected-TB cases
    if case.expected.tb {
        let sorted = |u: &[f64]| -> Result<Vec<f64>> {
            let mut p = imm.shape_operator(u)?.principal;
            p.sort_by(|x, y| y.partial_cmp(x).unwrap());
            Ok(p)
        };
        let mut spread = 0.0f64;
        let base = sorted(&samples[0])?;
        for u in &samples[1..] {
            for (a, b) in sorted(u)?.iter().zip(&base) {
                spread = spread.max((a - b).abs());
            }
        }
        report.push(Check::new(
            "isoparametric-spread",
            spread,
            cfg.tolerance("isoparametric-spread", 1e-6),
        ));
    }

    if case.expected.totally_geodesic {
        let mut max_shape = 0.0f64;
        for u in &samples {
            let sd = imm.shape_operator(u)?;
            max_shape = max_shape.max(sd.principal.iter().fold(0.0f64, |m, l| m.max(l.abs())));
        }
        report.push(Check::new(
            "totally-geodesic",
            max_shape,
            cfg.tolerance("totally-geodesic", 1e-9),
        ));
    }

    if let Some(minimal) = case.expected.minimal {
        let h_max = samples
            .iter()
            .map(|u| imm.shape_operator(u).map(|d| d.mean.abs()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0f64, f64::max);
        let tol = cfg.tolerance("minimal", 1e-6);
        report.push(Check::comparison("minimal", h_max, tol, minimal));
    }

    // geodesic unit speed along one integrated geodesic
    {
        let u0 = imm.sample_point(&mut rng);
        let dir = imm.random_unit_direction(&u0, &mut rng)?;
        match hypersurfaces::surface_geodesic(imm, &u0, &dir, cfg.geodesic_length, cfg.geodesic_step)
        {
            Ok(trace) => {
                let grid = curves::sample_grid(&trace, 15, 0.02);
                let mut dev = 0.0f64;
                for s in grid {
                    let p = trace.point(s);
                    let t = trace.d1(s);
                    dev = dev.max((imm.ambient.norm(&p, &t) - 1.0).abs());
                }
                report.push(Check::new(
                    "geodesic-unit-speed",
                    dev,
                    cfg.tolerance("geodesic-unit-speed", 1e-6),
                ));
            }
            Err(GeomError::ChartExit { .. }) => {} // nothing measurable
            Err(e) => return Err(e),
        }
    }

    // biharmonic hypersurface system
    if let Some(expected) = case.expected.biharmonic {
        let res = hypersurfaces::biharmonic_check(imm, &samples)?;
        let tol = cfg.tolerance("biharmonic-system", 1e-6);
        report.push(Check::comparison(
            "biharmonic-system",
            res.normal_max.max(res.tangential_max),
            tol,
            expected,
        ));
    }

    // totally-biharmonic checks
    let pw = hypersurfaces::tb_pointwise_check(imm, cfg.pointwise_samples, &mut rng)?;
    let pw_tol = cfg.tolerance("tb-pointwise", 1e-6);
    report.push(Check::comparison(
        "tb-pointwise",
        pw.max_residual(),
        pw_tol,
        case.expected.tb,
    ));

    let geo_tol = cfg.tolerance("tb-geodesic", 1e-5);
    let geo = hypersurfaces::tb_geodesic_check(
        imm,
        cfg.geodesic_count,
        cfg.geodesic_length,
        cfg.geodesic_step,
        geo_tol,
        &mut rng,
    )?;
    let geo_vacuous = geo.used > 0 && geo.vacuous == geo.used;
    // an all-vacuous batch measures TB true (every geodesic was ambient)
    let geo_pass = geo_vacuous || geo.max_res <= geo_tol;
    report.push(Check::verdict(
        "tb-geodesic",
        geo_pass == case.expected.tb,
    ));
    report.push(Check::comparison(
        "tb-geodesic-residual",
        geo.max_res,
        geo_tol,
        case.expected.tb,
    ));

    if case.hopf {
        let base = hypersurfaces::hopf_base_data(imm, &samples)?;
        report.push(Check::new(
            "hopf-shape-norm",
            base.shape_norm_residual,
            cfg.tolerance("hopf-shape-norm", 1e-6),
        ));
        report.push(Check::new(
            "hopf-gauss-extrinsic",
            base.gauss_residual,
            cfg.tolerance("hopf-gauss-extrinsic", 1e-6),
        ));
    }

    Ok(report)
}
