//! Arc-length curves in an ambient space: covariant derivatives along the
//! curve, the Frenet apparatus, the bitension field and the biharmonicity
//! residual systems.

use crate::error::{GeomError, Result};
use crate::fd::{self, FdConfig};
use crate::spaces::{Ambient, BcvSpace, Point};
use nalgebra::DVector;

/// Below this curvature a point is treated as geodesic and Frenet data is
/// undefined.
pub const KAPPA_FLOOR: f64 = 1e-9;

/// Looser floor used by the residual systems: integrated geodesic traces of
/// ambient geodesics carry curvature noise above [`KAPPA_FLOOR`], and their
/// near-degenerate Frenet data would pollute the residuals.
pub const GEODESIC_DETECT: f64 = 1e-6;

/// Step for differentiating fields along the arc-length parameter.
const FIELD_STEP: f64 = 1e-3;
/// Step for differentiating the torsion along the curve.
const TAU_STEP: f64 = 1e-2;

/// Arc-length curve with derivative evaluators up to third order.
pub trait Curve {
    fn domain(&self) -> (f64, f64);
    fn point(&self, s: f64) -> Point;
    fn d1(&self, s: f64) -> DVector<f64>;
    fn d2(&self, s: f64) -> DVector<f64>;
    fn d3(&self, s: f64) -> DVector<f64>;
}

/// Curve given by closed-form evaluators.
pub struct AnalyticCurve {
    domain: (f64, f64),
    f0: Box<dyn Fn(f64) -> DVector<f64>>,
    f1: Box<dyn Fn(f64) -> DVector<f64>>,
    f2: Box<dyn Fn(f64) -> DVector<f64>>,
    f3: Box<dyn Fn(f64) -> DVector<f64>>,
}

impl AnalyticCurve {
    pub fn new(
        domain: (f64, f64),
        f0: impl Fn(f64) -> DVector<f64> + 'static,
        f1: impl Fn(f64) -> DVector<f64> + 'static,
        f2: impl Fn(f64) -> DVector<f64> + 'static,
        f3: impl Fn(f64) -> DVector<f64> + 'static,
    ) -> Self {
        Self {
            domain,
            f0: Box::new(f0),
            f1: Box::new(f1),
            f2: Box::new(f2),
            f3: Box::new(f3),
        }
    }
}

impl Curve for AnalyticCurve {
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn point(&self, s: f64) -> Point {
        Point {
            coords: (self.f0)(s),
        }
    }
    fn d1(&self, s: f64) -> DVector<f64> {
        (self.f1)(s)
    }
    fn d2(&self, s: f64) -> DVector<f64> {
        (self.f2)(s)
    }
    fn d3(&self, s: f64) -> DVector<f64> {
        (self.f3)(s)
    }
}

/// Uniform sample grid over the curve domain, shrunk by `margin` on both
/// sides so difference stencils stay inside.
pub fn sample_grid(curve: &dyn Curve, n: usize, margin: f64) -> Vec<f64> {
    let (lo, hi) = curve.domain();
    let a = lo + margin;
    let b = hi - margin;
    assert!(b > a, "curve too short for the requested margin");
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

/// `nabla_t t` at `s`.
pub fn tangent_acceleration(space: &Ambient, curve: &dyn Curve, s: f64) -> Result<DVector<f64>> {
    let p = curve.point(s);
    let t = curve.d1(s);
    Ok(curve.d2(s) + space.connection_correction(&p, &t, &t)?)
}

/// Covariant derivative `nabla_t V` of a field along the curve; `V'` is
/// estimated by central differences in the parameter.
pub fn covariant_derivative_along<F>(
    space: &Ambient,
    curve: &dyn Curve,
    field: F,
    s: f64,
) -> Result<DVector<f64>>
where
    F: Fn(f64) -> DVector<f64>,
{
    let (lo, hi) = curve.domain();
    if s - FIELD_STEP < lo || s + FIELD_STEP > hi {
        return Err(GeomError::Stencil(format!(
            "s = {s} too close to the curve endpoints"
        )));
    }
    let v_prime = fd::deriv(&field, s, &FdConfig::with_step(FIELD_STEP));
    let p = curve.point(s);
    let t = curve.d1(s);
    Ok(v_prime + space.connection_correction(&p, &t, &field(s))?)
}

/// Frenet data at a sample of an arc-length curve.
#[derive(Clone, Debug)]
pub struct FrenetSample {
    pub s: f64,
    pub t: DVector<f64>,
    pub n: DVector<f64>,
    /// Binormal; absent for Frenet curves of rank 2 in dimension > 3.
    pub b: Option<DVector<f64>>,
    pub kappa: f64,
    pub tau: f64,
    /// `<n, E3>` and `<b, E3>` for BCV ambients.
    pub n3: Option<f64>,
    pub b3: Option<f64>,
}

#[derive(Clone, Debug)]
pub enum FrenetData {
    /// `nabla_t t` vanished below the curvature floor.
    Geodesic { s: f64, kappa: f64 },
    Frame(FrenetSample),
}

impl FrenetData {
    pub fn frame(&self) -> Option<&FrenetSample> {
        match self {
            FrenetData::Frame(f) => Some(f),
            FrenetData::Geodesic { .. } => None,
        }
    }
}

pub fn frenet_apparatus(space: &Ambient, curve: &dyn Curve, s: f64) -> Result<FrenetData> {
    frenet_at(space, curve, s, None)
}

fn frenet_at(
    space: &Ambient,
    curve: &dyn Curve,
    s: f64,
    ref_binormal: Option<&DVector<f64>>,
) -> Result<FrenetData> {
    let p = curve.point(s);
    let t = curve.d1(s);
    let a1 = tangent_acceleration(space, curve, s)?;
    let kappa = space.norm(&p, &a1);
    if kappa < KAPPA_FLOOR {
        return Ok(FrenetData::Geodesic { s, kappa });
    }
    let n = a1 / kappa;

    // nabla_t n by differencing the normalized acceleration field
    let normal_field = |u: f64| -> DVector<f64> {
        let a = tangent_acceleration(space, curve, u).expect("stencil inside domain");
        let p = curve.point(u);
        let k = space.norm(&p, &a);
        a / k
    };
    let dtn = covariant_derivative_along(space, curve, normal_field, s)?;

    let (b, tau) = if space.dim() == 3 {
        let b = space.cross(&p, &t, &n)?;
        let tau = space.inner(&p, &dtn, &b);
        (Some(b), tau)
    } else {
        // Gram-Schmidt completion with rank detection
        let m = &dtn + kappa * &t;
        let tau_abs = space.norm(&p, &m);
        if tau_abs < 1e-7 {
            (None, 0.0)
        } else {
            let mut b = m / tau_abs;
            let mut tau = tau_abs;
            if let Some(r) = ref_binormal {
                if space.inner(&p, &b, r) < 0.0 {
                    b = -b;
                    tau = -tau;
                }
            }
            (Some(b), tau)
        }
    };

    let (n3, b3) = match space {
        Ambient::Bcv(_) => {
            let e3 = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
            (
                Some(space.inner(&p, &n, &e3)),
                b.as_ref().map(|b| space.inner(&p, b, &e3)),
            )
        }
        _ => (None, None),
    };

    Ok(FrenetData::Frame(FrenetSample {
        s,
        t,
        n,
        b,
        kappa,
        tau,
        n3,
        b3,
    }))
}

/// Bitension field `tau_2 = nabla_t^3 t + R(nabla_t t, t) t` at a sample.
#[derive(Clone, Debug)]
pub struct BitensionSample {
    pub s: f64,
    pub tau2: DVector<f64>,
    pub norm: f64,
    /// Projections on the Frenet frame `(tangent, normal, binormal)` where
    /// the frame exists.
    pub components: Option<(f64, f64, f64)>,
}

pub fn bitension(space: &Ambient, curve: &dyn Curve, s: f64) -> Result<BitensionSample> {
    let p = curve.point(s);
    let t = curve.d1(s);
    let a1 = tangent_acceleration(space, curve, s)?;

    let a1_field = |u: f64| tangent_acceleration(space, curve, u).expect("stencil inside domain");
    let a2_field = |u: f64| {
        covariant_derivative_along(space, curve, &a1_field, u).expect("stencil inside domain")
    };
    let a3 = covariant_derivative_along(space, curve, &a2_field, s)?;

    let r_term = space.curvature(&p, &a1, &t, &t)?;
    let tau2 = a3 + r_term;
    let norm = space.norm(&p, &tau2);

    let components = match frenet_at(space, curve, s, None)? {
        FrenetData::Frame(f) => {
            let ct = space.inner(&p, &tau2, &f.t);
            let cn = space.inner(&p, &tau2, &f.n);
            let cb = f
                .b
                .as_ref()
                .map(|b| space.inner(&p, &tau2, b))
                .unwrap_or(0.0);
            Some((ct, cn, cb))
        }
        FrenetData::Geodesic { .. } => None,
    };

    Ok(BitensionSample {
        s,
        tau2,
        norm,
        components,
    })
}

/// Per-sample residuals of the proper-biharmonic curve system
/// (tangent, normal and binormal components).
#[derive(Clone, Debug)]
pub struct SampleResidual {
    pub s: f64,
    pub kappa: f64,
    pub tau: f64,
    pub n3: f64,
    pub b3: f64,
    pub res_t: f64,
    pub res_n: f64,
    pub res_b: f64,
}

#[derive(Clone, Debug)]
pub struct CurveResiduals {
    pub samples: Vec<SampleResidual>,
    pub kappa_bar: f64,
    /// The curve was geodesic at every sample: vacuously biharmonic.
    pub vacuous: bool,
}

impl CurveResiduals {
    pub fn max_residuals(&self) -> (f64, f64, f64) {
        self.samples.iter().fold((0.0f64, 0.0f64, 0.0f64), |m, r| {
            (m.0.max(r.res_t), m.1.max(r.res_n), m.2.max(r.res_b))
        })
    }

    pub fn max_residual(&self) -> f64 {
        let (a, b, c) = self.max_residuals();
        a.max(b).max(c)
    }
}

fn tau_at(space: &Ambient, curve: &dyn Curve, s: f64, ref_b: &DVector<f64>) -> f64 {
    match frenet_at(space, curve, s, Some(ref_b)).expect("stencil inside domain") {
        FrenetData::Frame(f) => f.tau,
        FrenetData::Geodesic { .. } => 0.0,
    }
}

/// Residuals of the curve system `kappa = const`, `kappa^2 + tau^2 = K(t,n)`,
/// `tau' = -<R(t,n)t, b>` over a sample grid.
pub fn biharmonic_residuals(
    space: &Ambient,
    curve: &dyn Curve,
    grid: &[f64],
) -> Result<CurveResiduals> {
    let mut frames = Vec::new();
    for &s in grid {
        frames.push((s, frenet_at(space, curve, s, None)?));
    }
    let kappas: Vec<f64> = frames
        .iter()
        .filter_map(|(_, f)| f.frame().map(|f| f.kappa))
        .filter(|&k| k >= GEODESIC_DETECT)
        .collect();
    if kappas.is_empty() {
        return Ok(CurveResiduals {
            samples: Vec::new(),
            kappa_bar: 0.0,
            vacuous: true,
        });
    }
    let kappa_bar = kappas.iter().sum::<f64>() / kappas.len() as f64;

    let mut samples = Vec::new();
    for (s, data) in &frames {
        let Some(f) = data.frame().filter(|f| f.kappa >= GEODESIC_DETECT) else {
            samples.push(SampleResidual {
                s: *s,
                kappa: 0.0,
                tau: 0.0,
                n3: 0.0,
                b3: 0.0,
                res_t: 0.0,
                res_n: 0.0,
                res_b: 0.0,
            });
            continue;
        };
        let p = curve.point(*s);
        let k_sec = space.sectional(&p, &f.t, &f.n)?;
        let res_n = (f.kappa * f.kappa + f.tau * f.tau - k_sec).abs();
        let res_b = match &f.b {
            Some(b) => {
                let r = space.curvature(&p, &f.t, &f.n, &f.t)?;
                let rb = space.inner(&p, &r, b);
                let tau_prime = fd::deriv(
                    |u| tau_at(space, curve, u, b),
                    *s,
                    &FdConfig::with_step(TAU_STEP),
                );
                // reported in bitension scale: kappa (tau' + <R(t,n)t, b>) is
                // the binormal component of tau_2 for constant kappa, and the
                // measured tau carries O(1/kappa) frame noise that the factor
                // cancels
                (f.kappa * (tau_prime + rb)).abs()
            }
            None => 0.0, // rank-2 curve: binormal equation vacuous
        };
        samples.push(SampleResidual {
            s: *s,
            kappa: f.kappa,
            tau: f.tau,
            n3: f.n3.unwrap_or(0.0),
            b3: f.b3.unwrap_or(0.0),
            res_t: (f.kappa - kappa_bar).abs(),
            res_n,
            res_b,
        });
    }
    Ok(CurveResiduals {
        samples,
        kappa_bar,
        vacuous: false,
    })
}

/// Residuals of the BCV-specific proper-biharmonic system: curvature and
/// torsion constancy, `n3 = 0`, and
/// `kappa^2 + tau^2 = b^2/4 - (b^2 - 4a) b3^2`.
#[derive(Clone, Debug)]
pub struct BcvSystemResiduals {
    pub kappa_dev: f64,
    pub tau_dev: f64,
    pub n3_max: f64,
    pub closure_max: f64,
    pub kappa_bar: f64,
    pub tau_bar: f64,
    pub vacuous: bool,
}

impl BcvSystemResiduals {
    pub fn max_residual(&self) -> f64 {
        self.kappa_dev
            .max(self.tau_dev)
            .max(self.n3_max)
            .max(self.closure_max)
    }
}

pub fn bcv_biharmonic_system(
    space: &BcvSpace,
    curve: &dyn Curve,
    grid: &[f64],
) -> Result<BcvSystemResiduals> {
    let (a, b) = (space.a, space.b);
    if (4.0 * a - b * b).abs() < 1e-9 {
        return Err(GeomError::Parameter(
            "BCV biharmonic system requires 4a != b^2".into(),
        ));
    }
    let ambient = Ambient::Bcv(*space);
    let mut rows: Vec<FrenetSample> = Vec::new();
    for &s in grid {
        if let FrenetData::Frame(f) = frenet_at(&ambient, curve, s, None)? {
            if f.kappa >= GEODESIC_DETECT {
                rows.push(f);
            }
        }
    }
    if rows.is_empty() {
        return Ok(BcvSystemResiduals {
            kappa_dev: 0.0,
            tau_dev: 0.0,
            n3_max: 0.0,
            closure_max: 0.0,
            kappa_bar: 0.0,
            tau_bar: 0.0,
            vacuous: true,
        });
    }
    let kappa_bar = rows.iter().map(|f| f.kappa).sum::<f64>() / rows.len() as f64;
    let tau_bar = rows.iter().map(|f| f.tau).sum::<f64>() / rows.len() as f64;
    let mut out = BcvSystemResiduals {
        kappa_dev: 0.0,
        tau_dev: 0.0,
        n3_max: 0.0,
        closure_max: 0.0,
        kappa_bar,
        tau_bar,
        vacuous: false,
    };
    for f in &rows {
        let b3 = f.b3.unwrap_or(0.0);
        let rhs = 0.25 * b * b - (b * b - 4.0 * a) * b3 * b3;
        out.kappa_dev = out.kappa_dev.max((f.kappa - kappa_bar).abs());
        out.tau_dev = out.tau_dev.max((f.tau - tau_bar).abs());
        out.n3_max = out.n3_max.max(f.n3.unwrap_or(0.0).abs());
        out.closure_max = out
            .closure_max
            .max((f.kappa * f.kappa + f.tau * f.tau - rhs).abs());
    }
    Ok(out)
}

/// CSV rows of sampled Frenet/bitension data:
/// `s,kappa,tau,n3,b3,res_t,res_n,res_b`.
pub fn residuals_csv(res: &CurveResiduals) -> String {
    let mut out = String::from("s,kappa,tau,n3,b3,res_t,res_n,res_b\n");
    for r in &res.samples {
        out.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            r.s, r.kappa, r.tau, r.n3, r.b3, r.res_t, r.res_n, r.res_b
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// ambient geodesics

/// Cubic Hermite interpolation of values `p0, p1` with derivatives `m0, m1`
/// over `[0, h]`, evaluated at local parameter `x`.
pub(crate) fn hermite(
    p0: &DVector<f64>,
    m0: &DVector<f64>,
    p1: &DVector<f64>,
    m1: &DVector<f64>,
    h: f64,
    x: f64,
) -> DVector<f64> {
    let u = x / h;
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * p0
        + (u3 - 2.0 * u2 + u) * h * m0
        + (-2.0 * u3 + 3.0 * u2) * p1
        + (u3 - u2) * h * m1
}

/// Integrated geodesic of a BCV chart. Second derivatives come from the
/// geodesic equation itself; third derivatives difference the equation's
/// right-hand side along the parameter.
pub struct ChartGeodesic {
    space: BcvSpace,
    nodes: Vec<(DVector<f64>, DVector<f64>)>,
    step: f64,
    /// arc-length of the first node (negative padding before s = 0)
    s_start: f64,
    length: f64,
    pad: f64,
}

impl ChartGeodesic {
    fn accel(space: &BcvSpace, pos: &DVector<f64>, vel: &DVector<f64>) -> DVector<f64> {
        let p = Point {
            coords: pos.clone(),
        };
        let gamma = space.christoffels(&p).expect("geodesic left the chart");
        -crate::spaces::contract_christoffel(&gamma, vel, vel)
    }

    fn state(&self, s: f64) -> (DVector<f64>, DVector<f64>) {
        let rel = (s - self.s_start) / self.step;
        let i = (rel.floor() as usize).min(self.nodes.len() - 2);
        let x = s - (self.s_start + i as f64 * self.step);
        let (p0, v0) = &self.nodes[i];
        let (p1, v1) = &self.nodes[i + 1];
        let a0 = Self::accel(&self.space, p0, v0);
        let a1 = Self::accel(&self.space, p1, v1);
        let pos = hermite(p0, v0, p1, v1, self.step, x);
        let vel = hermite(v0, &a0, v1, &a1, self.step, x);
        (pos, vel)
    }
}

impl Curve for ChartGeodesic {
    fn domain(&self) -> (f64, f64) {
        (-self.pad + 4.0 * FIELD_STEP, self.length + self.pad - 4.0 * FIELD_STEP)
    }
    fn point(&self, s: f64) -> Point {
        Point {
            coords: self.state(s).0,
        }
    }
    fn d1(&self, s: f64) -> DVector<f64> {
        self.state(s).1
    }
    fn d2(&self, s: f64) -> DVector<f64> {
        let (pos, vel) = self.state(s);
        Self::accel(&self.space, &pos, &vel)
    }
    fn d3(&self, s: f64) -> DVector<f64> {
        fd::deriv(|u| self.d2(u), s, &FdConfig::with_step(FIELD_STEP))
    }
}

/// Geodesic of the ambient space from `p` with unit initial velocity `v`.
pub fn ambient_geodesic(
    space: &Ambient,
    p: &Point,
    v: &DVector<f64>,
    length: f64,
) -> Result<Box<dyn Curve>> {
    match space {
        Ambient::SpaceForm(s) => {
            if s.rho > 0.0 {
                let rho = s.rho;
                let sq = rho.sqrt();
                let pos = |p0: DVector<f64>, v0: DVector<f64>| {
                    move |s: f64| (sq * s).cos() * &p0 + ((sq * s).sin() / sq) * &v0
                };
                let der = |p0: DVector<f64>, v0: DVector<f64>| {
                    move |s: f64| -sq * (sq * s).sin() * &p0 + (sq * s).cos() * &v0
                };
                let (p0, v0) = (p.coords.clone(), v.clone());
                let f0 = pos(p0.clone(), v0.clone());
                let f1 = der(p0.clone(), v0.clone());
                let f2 = pos(p0.clone(), v0.clone());
                let f3 = der(p0, v0);
                Ok(Box::new(AnalyticCurve::new(
                    (0.0, length),
                    f0,
                    f1,
                    move |s| -rho * f2(s),
                    move |s| -rho * f3(s),
                )))
            } else if s.rho == 0.0 {
                let d = s.n;
                let p0 = p.coords.clone();
                let v0 = v.clone();
                let v1 = v0.clone();
                Ok(Box::new(AnalyticCurve::new(
                    (0.0, length),
                    move |s| &p0 + s * &v0,
                    move |_| v1.clone(),
                    move |_| DVector::zeros(d),
                    move |_| DVector::zeros(d),
                )))
            } else {
                Err(GeomError::Parameter(
                    "no geodesic model for hyperbolic space forms".into(),
                ))
            }
        }
        Ambient::Bcv(b) => {
            let pad = 0.05;
            let step = 2e-3;
            let total = length + 2.0 * pad;
            let steps = (total / step).ceil() as usize;
            let step = total / steps as f64;
            // back up by the padding first
            let mut pos = p.coords.clone();
            let mut vel = v.clone();
            let back = (pad / step).ceil() as usize;
            for _ in 0..back {
                rk4_step(&mut pos, &mut vel, -step, |q, w| {
                    ChartGeodesic::accel(b, q, w)
                });
            }
            let s_start = -(back as f64) * step;
            let mut nodes = Vec::with_capacity(steps + 1);
            nodes.push((pos.clone(), vel.clone()));
            for _ in 0..(steps + back) {
                rk4_step(&mut pos, &mut vel, step, |q, w| {
                    ChartGeodesic::accel(b, q, w)
                });
                nodes.push((pos.clone(), vel.clone()));
            }
            Ok(Box::new(ChartGeodesic {
                space: *b,
                nodes,
                step,
                s_start,
                length,
                pad,
            }))
        }
    }
}

pub(crate) fn rk4_step<F>(pos: &mut DVector<f64>, vel: &mut DVector<f64>, h: f64, accel: F)
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
{
    let k1p = vel.clone();
    let k1v = accel(pos, vel);
    let k2p = &*vel + 0.5 * h * &k1v;
    let k2v = accel(&(&*pos + 0.5 * h * &k1p), &k2p);
    let k3p = &*vel + 0.5 * h * &k2v;
    let k3v = accel(&(&*pos + 0.5 * h * &k2p), &k3p);
    let k4p = &*vel + h * &k3v;
    let k4v = accel(&(&*pos + h * &k3p), &k4p);
    *pos += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    *vel += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::helices::HelixParams;

    fn flat_circle(r: f64, length: f64) -> AnalyticCurve {
        let eval = move |s: f64, order: u32| -> DVector<f64> {
            let ph = 0.5 * std::f64::consts::PI * order as f64;
            let w = 1.0 / r;
            let scale = w.powi(order as i32);
            DVector::from_column_slice(&[
                r * scale * (w * s + ph).cos(),
                r * scale * (w * s + ph).sin(),
                0.0,
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

    fn e3_line(x0: f64, y0: f64, length: f64) -> AnalyticCurve {
        AnalyticCurve::new(
            (0.0, length),
            move |s| DVector::from_column_slice(&[x0, y0, s]),
            |_| DVector::from_column_slice(&[0.0, 0.0, 1.0]),
            |_| DVector::zeros(3),
            |_| DVector::zeros(3),
        )
    }

    #[test]
    fn flat_circle_frenet() {
        let amb = Ambient::euclidean3();
        for r in [0.5, 1.0, 2.0] {
            let c = flat_circle(r, 4.0);
            let f = match frenet_apparatus(&amb, &c, 1.0).unwrap() {
                FrenetData::Frame(f) => f,
                _ => panic!("circle is not a geodesic"),
            };
            assert!((f.kappa - 1.0 / r).abs() < 1e-12);
            assert!(f.tau.abs() < 1e-9);
            let bt = bitension(&amb, &c, 1.0).unwrap();
            assert!((bt.norm - 1.0 / (r * r * r)).abs() < 1e-7, "|tau2| = kappa^3");
        }
    }

    #[test]
    fn covariant_derivative_of_circle_tangent() {
        let amb = Ambient::euclidean3();
        let c = flat_circle(1.0, 4.0);
        let s0 = 1.3;
        let dt = covariant_derivative_along(&amb, &c, |s| c.d1(s), s0).unwrap();
        // inward normal of magnitude 1
        let inward = -c.point(s0).coords;
        assert!((dt - inward).norm() < 1e-8);
    }

    #[test]
    fn e3_integral_curve_is_geodesic() {
        let amb = Ambient::bcv(0.8, 1.4);
        let c = e3_line(0.2, -0.3, 2.0);
        let acc = tangent_acceleration(&amb, &c, 1.0).unwrap();
        assert!(acc.norm() < 1e-10, "nabla_{{E3}} E3 = 0");
        assert!(matches!(
            frenet_apparatus(&amb, &c, 1.0).unwrap(),
            FrenetData::Geodesic { .. }
        ));
        let space = BcvSpace::new(0.8, 1.4);
        let res = bcv_biharmonic_system(&space, &c, &sample_grid(&c, 5, 0.2)).unwrap();
        assert!(res.vacuous, "vacuous pass for an ambient geodesic");
    }

    #[test]
    fn great_circle_is_geodesic_marker() {
        let amb = Ambient::space_form(3, 1.0);
        let p = Point::new(&[1.0, 0.0, 0.0, 0.0]);
        let v = DVector::from_column_slice(&[0.0, 1.0, 0.0, 0.0]);
        let geo = ambient_geodesic(&amb, &p, &v, 3.0).unwrap();
        match frenet_apparatus(&amb, geo.as_ref(), 1.0).unwrap() {
            FrenetData::Geodesic { kappa, .. } => assert!(kappa < KAPPA_FLOOR),
            _ => panic!("great circle must be an ambient geodesic"),
        }
        let bt = bitension(&amb, geo.as_ref(), 1.0).unwrap();
        assert!(bt.norm < 1e-9);
    }

    #[test]
    fn flat_circle_normal_residual_is_one() {
        // kappa^2 + tau^2 - K(t,n) = 1 - 0 for the unit circle in flat space
        let amb = Ambient::euclidean3();
        let c = flat_circle(1.0, 4.0);
        let res = biharmonic_residuals(&amb, &c, &sample_grid(&c, 5, 0.3)).unwrap();
        let (_, rn, _) = res.max_residuals();
        assert!((rn - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tb_helix_passes_both_residual_systems() {
        let (a, b) = (1.0, 0.0);
        let r = (3.0 - 2.0 * 2.0f64.sqrt()).sqrt();
        let h = HelixParams::new(a, b, r, 0.0).unwrap();
        let (k, t) = h.kappa_tau().unwrap();
        assert!((k - 2.0).abs() < 1e-12 && t.abs() < 1e-12);

        let curve = h.curve(2.0);
        let grid = sample_grid(&curve, 7, 0.2);
        let amb = Ambient::bcv(a, b);
        let res = biharmonic_residuals(&amb, &curve, &grid).unwrap();
        assert!(res.max_residual() < 1e-6, "b1 residuals {:?}", res.max_residuals());

        let space = BcvSpace::new(a, b);
        let sys = bcv_biharmonic_system(&space, &curve, &grid).unwrap();
        assert!((sys.kappa_bar - 2.0).abs() < 1e-8);
        assert!(sys.max_residual() < 1e-6, "b11-b14 residuals");
    }

    #[test]
    fn non_tb_helix_closure_gap() {
        // r = 2 helix of N(1,0): kappa = 3/2, tau = 0, rhs = 4 -> gap 7/4
        let h = HelixParams::new(1.0, 0.0, 2.0, 0.0).unwrap();
        let (k, t) = h.kappa_tau().unwrap();
        assert!((k - 1.5).abs() < 1e-12 && t.abs() < 1e-12);
        let curve = h.curve(2.0);
        let space = BcvSpace::new(1.0, 0.0);
        let sys =
            bcv_biharmonic_system(&space, &curve, &sample_grid(&curve, 5, 0.3)).unwrap();
        assert!((sys.closure_max - 1.75).abs() < 1e-4, "closure {}", sys.closure_max);
        assert!(sys.kappa_dev < 1e-8 && sys.tau_dev < 1e-6 && sys.n3_max < 1e-8);

        // bitension norm = kappa * gap
        let amb = Ambient::bcv(1.0, 0.0);
        let bt = bitension(&amb, &curve, 1.0).unwrap();
        assert!((bt.norm - 1.5 * 1.75).abs() < 1e-4);
    }

    #[test]
    fn bcv_system_rejects_space_forms() {
        let space = BcvSpace::new(1.0, 2.0);
        let c = e3_line(0.0, 0.0, 1.0);
        assert!(matches!(
            bcv_biharmonic_system(&space, &c, &[0.5]),
            Err(GeomError::Parameter(_))
        ));
    }

    #[test]
    fn frenet_equations_hold_on_a_helix() {
        let h = HelixParams::new(0.6, 0.8, 0.9, 0.4).unwrap();
        let amb = Ambient::bcv(0.6, 0.8);
        let curve = h.curve(2.0);
        let s0 = 1.1;
        let f = match frenet_apparatus(&amb, &curve, s0).unwrap() {
            FrenetData::Frame(f) => f,
            _ => panic!("helix is not geodesic"),
        };
        let p = curve.point(s0);

        let frame_at = |s: f64| match frenet_apparatus(&amb, &curve, s).unwrap() {
            FrenetData::Frame(f) => f,
            _ => panic!("helix is not geodesic"),
        };
        let dtn =
            covariant_derivative_along(&amb, &curve, |s| frame_at(s).n, s0).unwrap();
        let expected = -f.kappa * &f.t + f.tau * f.b.as_ref().unwrap();
        assert!((dtn - expected).norm() < 1e-5, "nabla_t n = -kappa t + tau b");

        let dtb = covariant_derivative_along(
            &amb,
            &curve,
            |s| frame_at(s).b.unwrap(),
            s0,
        )
        .unwrap();
        assert!(
            amb.norm(&p, &(dtb + f.tau * &f.n)) < 1e-5,
            "nabla_t b = -tau n"
        );
    }

    #[test]
    fn bitension_component_identity() {
        let h = HelixParams::new(1.0, 1.0, 0.7, 0.3).unwrap();
        let amb = Ambient::bcv(1.0, 1.0);
        let curve = h.curve(2.0);
        let bt = bitension(&amb, &curve, 0.9).unwrap();
        let (ct, cn, cb) = bt.components.unwrap();
        assert!((bt.norm * bt.norm - (ct * ct + cn * cn + cb * cb)).abs() < 1e-8);
    }

    #[test]
    fn binormal_equation_matches_torsion_constancy() {
        // on a proper biharmonic helix, both the (b1) binormal residual and
        // the (b12)+(b13) residuals are small together
        let r = (3.0 + 2.0 * 2.0f64.sqrt()).sqrt();
        let h = HelixParams::new(1.0, 0.0, r, 0.25).unwrap();
        let amb = Ambient::bcv(1.0, 0.0);
        let space = BcvSpace::new(1.0, 0.0);
        let curve = h.curve(2.0);
        let grid = sample_grid(&curve, 5, 0.3);
        let res = biharmonic_residuals(&amb, &curve, &grid).unwrap();
        let (_, _, rb) = res.max_residuals();
        let sys = bcv_biharmonic_system(&space, &curve, &grid).unwrap();
        assert!(rb < 1e-5, "binormal residual {rb}");
        assert!(sys.tau_dev < 1e-5 && sys.n3_max < 1e-5);
    }

    #[test]
    fn arc_length_preserved() {
        let amb = Ambient::bcv(1.0, 1.0);
        let h = HelixParams::new(1.0, 1.0, 0.8, -0.5).unwrap();
        let curve = h.curve(3.0);
        for s in sample_grid(&curve, 9, 0.0) {
            let p = curve.point(s);
            assert!((amb.norm(&p, &curve.d1(s)) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn integrated_bcv_geodesic_is_unit_speed_and_vacuous() {
        let amb = Ambient::bcv(1.0, 1.0);
        let p = Point::new(&[0.1, 0.2, 0.0]);
        // normalize a chart direction
        let raw = DVector::from_column_slice(&[0.3, -0.2, 0.8]);
        let v = &raw / amb.norm(&p, &raw);
        let geo = ambient_geodesic(&amb, &p, &v, 2.0).unwrap();
        for s in [0.1, 0.7, 1.5, 1.9] {
            let q = geo.point(s);
            assert!((amb.norm(&q, &geo.d1(s)) - 1.0).abs() < 1e-8);
            let acc = tangent_acceleration(&amb, geo.as_ref(), s).unwrap();
            assert!(amb.norm(&q, &acc) < 1e-6, "geodesic acceleration {}", acc.norm());
        }
        let bt = bitension(&amb, geo.as_ref(), 1.0).unwrap();
        assert!(bt.norm < 1e-3, "bitension noise on integrated geodesic");
        let res =
            biharmonic_residuals(&amb, geo.as_ref(), &[0.3, 0.8, 1.3, 1.8]).unwrap();
        assert!(res.vacuous);
    }

    #[test]
    fn residual_csv_shape() {
        let amb = Ambient::euclidean3();
        let c = flat_circle(1.0, 4.0);
        let res = biharmonic_residuals(&amb, &c, &[1.0, 2.0]).unwrap();
        let csv = residuals_csv(&res);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "s,kappa,tau,n3,b3,res_t,res_n,res_b");
        assert_eq!(lines[1].split(',').count(), 8);
    }
}
