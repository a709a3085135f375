//! Codimension-one immersions: fundamental forms, shape operator, intrinsic
//! geodesics and the biharmonic / biminimal / totally-biharmonic checks.

use crate::curves::{self, Curve};
use crate::error::{GeomError, Result};
use crate::fd::{self, FdConfig};
use crate::spaces::{self, Ambient, Point};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Parametrized chart map into the ambient model coordinates, with first and
/// second parameter derivatives.
pub trait ChartMap {
    fn coord_dim(&self) -> usize;
    fn chart_dim(&self) -> usize;
    fn eval(&self, u: &[f64]) -> DVector<f64>;
    /// Columns are the first parameter derivatives.
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64>;
    /// Mixed second derivative in parameters `i`, `j`.
    fn hessian(&self, u: &[f64], i: usize, j: usize) -> DVector<f64>;
}

/// Hyperspherical chart of `S^k[radius]` in `R^{k+1}`.
///
/// Derivatives are exact: every coordinate is a product of sines/cosines of
/// single angles, so differentiation is a phase shift by `pi/2`.
pub struct SphereChart {
    pub k: usize,
    pub radius: f64,
}

impl SphereChart {
    pub fn new(k: usize, radius: f64) -> Self {
        assert!(k >= 1);
        Self { k, radius }
    }

    // trig factor of output m w.r.t. param j (0-based), with derivative order
    fn factor(&self, m: usize, j: usize, uj: f64, order: u32) -> Option<f64> {
        let ph = 0.5 * std::f64::consts::PI * order as f64;
        if j < m {
            Some((uj + ph).sin())
        } else if j == m && m < self.k {
            Some((uj + ph).cos())
        } else if j < self.k && m == self.k && j == self.k - 1 {
            // covered by j < m? no: j = k-1, m = k -> j < m, handled above
            unreachable!()
        } else {
            if order > 0 {
                None // constant factor: derivative kills the product
            } else {
                Some(1.0)
            }
        }
    }

    fn eval_orders(&self, u: &[f64], orders: &[u32]) -> DVector<f64> {
        let mut out = DVector::zeros(self.k + 1);
        for m in 0..=self.k {
            let mut prod = self.radius;
            let mut dead = false;
            for (j, &uj) in u.iter().enumerate() {
                match self.factor(m, j, uj, orders[j]) {
                    Some(f) => prod *= f,
                    None => {
                        dead = true;
                        break;
                    }
                }
            }
            out[m] = if dead { 0.0 } else { prod };
        }
        out
    }
}

impl ChartMap for SphereChart {
    fn coord_dim(&self) -> usize {
        self.k + 1
    }
    fn chart_dim(&self) -> usize {
        self.k
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        self.eval_orders(u, &vec![0; self.k])
    }
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.k + 1, self.k);
        for c in 0..self.k {
            let mut orders = vec![0; self.k];
            orders[c] = 1;
            j.set_column(c, &self.eval_orders(u, &orders));
        }
        j
    }
    fn hessian(&self, u: &[f64], i: usize, j: usize) -> DVector<f64> {
        let mut orders = vec![0; self.k];
        orders[i] += 1;
        orders[j] += 1;
        self.eval_orders(u, &orders)
    }
}

/// Product of two chart maps: parameters and coordinates are concatenated.
pub struct ProductChart {
    pub left: Box<dyn ChartMap>,
    pub right: Box<dyn ChartMap>,
}

impl ChartMap for ProductChart {
    fn coord_dim(&self) -> usize {
        self.left.coord_dim() + self.right.coord_dim()
    }
    fn chart_dim(&self) -> usize {
        self.left.chart_dim() + self.right.chart_dim()
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let ml = self.left.chart_dim();
        let mut out = DVector::zeros(self.coord_dim());
        out.rows_mut(0, self.left.coord_dim())
            .copy_from(&self.left.eval(&u[..ml]));
        out.rows_mut(self.left.coord_dim(), self.right.coord_dim())
            .copy_from(&self.right.eval(&u[ml..]));
        out
    }
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let ml = self.left.chart_dim();
        let (dl, dr) = (self.left.coord_dim(), self.right.coord_dim());
        let jl = self.left.jacobian(&u[..ml]);
        let jr = self.right.jacobian(&u[ml..]);
        let mut j = DMatrix::zeros(dl + dr, self.chart_dim());
        j.view_mut((0, 0), (dl, ml)).copy_from(&jl);
        j.view_mut((dl, ml), (dr, self.right.chart_dim()))
            .copy_from(&jr);
        j
    }
    fn hessian(&self, u: &[f64], i: usize, j: usize) -> DVector<f64> {
        let ml = self.left.chart_dim();
        let (dl, dr) = (self.left.coord_dim(), self.right.coord_dim());
        let mut out = DVector::zeros(dl + dr);
        if i < ml && j < ml {
            out.rows_mut(0, dl)
                .copy_from(&self.left.hessian(&u[..ml], i, j));
        } else if i >= ml && j >= ml {
            out.rows_mut(dl, dr)
                .copy_from(&self.right.hessian(&u[ml..], i - ml, j - ml));
        }
        out
    }
}

/// Chart map with constant coordinates appended (offset spheres etc.).
pub struct AppendConst {
    pub inner: Box<dyn ChartMap>,
    pub consts: Vec<f64>,
}

impl ChartMap for AppendConst {
    fn coord_dim(&self) -> usize {
        self.inner.coord_dim() + self.consts.len()
    }
    fn chart_dim(&self) -> usize {
        self.inner.chart_dim()
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let d = self.inner.coord_dim();
        let mut out = DVector::zeros(self.coord_dim());
        out.rows_mut(0, d).copy_from(&self.inner.eval(u));
        for (i, &c) in self.consts.iter().enumerate() {
            out[d + i] = c;
        }
        out
    }
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let d = self.inner.coord_dim();
        let mut j = DMatrix::zeros(self.coord_dim(), self.chart_dim());
        j.view_mut((0, 0), (d, self.chart_dim()))
            .copy_from(&self.inner.jacobian(u));
        j
    }
    fn hessian(&self, u: &[f64], i: usize, j: usize) -> DVector<f64> {
        let d = self.inner.coord_dim();
        let mut out = DVector::zeros(self.coord_dim());
        out.rows_mut(0, d).copy_from(&self.inner.hessian(u, i, j));
        out
    }
}

/// Hopf cylinder of a BCV chart: `(s, t) -> (r sin(lam s), -r cos(lam s),
/// drift s + t)` with `lam = lambda_a / r` and `drift = b r / 2` so the
/// profile is horizontal and unit speed.
pub struct HopfCylinderChart {
    pub r: f64,
    pub lam: f64,
    pub drift: f64,
}

impl ChartMap for HopfCylinderChart {
    fn coord_dim(&self) -> usize {
        3
    }
    fn chart_dim(&self) -> usize {
        2
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        let a = self.lam * u[0];
        DVector::from_column_slice(&[
            self.r * a.sin(),
            -self.r * a.cos(),
            self.drift * u[0] + u[1],
        ])
    }
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let a = self.lam * u[0];
        DMatrix::from_column_slice(
            3,
            2,
            &[
                self.r * self.lam * a.cos(),
                self.r * self.lam * a.sin(),
                self.drift,
                0.0,
                0.0,
                1.0,
            ],
        )
    }
    fn hessian(&self, u: &[f64], i: usize, j: usize) -> DVector<f64> {
        if i == 0 && j == 0 {
            let a = self.lam * u[0];
            let l2 = self.lam * self.lam;
            DVector::from_column_slice(&[-self.r * l2 * a.sin(), self.r * l2 * a.cos(), 0.0])
        } else {
            DVector::zeros(3)
        }
    }
}

/// Round cylinder `(u, v) -> (r cos u, r sin u, v)` in Euclidean 3-space.
pub struct RoundCylinderChart {
    pub r: f64,
}

impl ChartMap for RoundCylinderChart {
    fn coord_dim(&self) -> usize {
        3
    }
    fn chart_dim(&self) -> usize {
        2
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(&[self.r * u[0].cos(), self.r * u[0].sin(), u[1]])
    }
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(
            3,
            2,
            &[-self.r * u[0].sin(), self.r * u[0].cos(), 0.0, 0.0, 0.0, 1.0],
        )
    }
    fn hessian(&self, u: &[f64], i: usize, j: usize) -> DVector<f64> {
        if i == 0 && j == 0 {
            DVector::from_column_slice(&[-self.r * u[0].cos(), -self.r * u[0].sin(), 0.0])
        } else {
            DVector::zeros(3)
        }
    }
}

/// Finite-difference fallback for charts given only by an evaluator.
pub struct FdMap<F: Fn(&[f64]) -> DVector<f64>> {
    pub f: F,
    pub coord_dim: usize,
    pub chart_dim: usize,
    pub cfg: FdConfig,
}

impl<F: Fn(&[f64]) -> DVector<f64>> ChartMap for FdMap<F> {
    fn coord_dim(&self) -> usize {
        self.coord_dim
    }
    fn chart_dim(&self) -> usize {
        self.chart_dim
    }
    fn eval(&self, u: &[f64]) -> DVector<f64> {
        (self.f)(u)
    }
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.coord_dim, self.chart_dim);
        for c in 0..self.chart_dim {
            j.set_column(c, &fd::partial(|q: &[f64]| (self.f)(q), u, c, &self.cfg));
        }
        j
    }
    fn hessian(&self, u: &[f64], i: usize, j: usize) -> DVector<f64> {
        fd::partial(
            |q: &[f64]| {
                let jc = {
                    let mut col = DVector::zeros(self.coord_dim);
                    col.copy_from(&fd::partial(|w: &[f64]| (self.f)(w), q, j, &self.cfg));
                    col
                };
                jc
            },
            u,
            i,
            &self.cfg,
        )
    }
}

/// Validity region of a chart parameter.
#[derive(Clone, Copy, Debug)]
pub enum ParamDomain {
    Periodic(f64),
    Interval(f64, f64),
    Free,
}

impl ParamDomain {
    fn contains(&self, x: f64, margin_frac: f64) -> bool {
        match self {
            ParamDomain::Periodic(_) | ParamDomain::Free => true,
            ParamDomain::Interval(lo, hi) => {
                let m = margin_frac * (hi - lo);
                x > lo + m && x < hi - m
            }
        }
    }

    fn sample_range(&self) -> (f64, f64) {
        match self {
            ParamDomain::Periodic(p) => (0.0, *p),
            ParamDomain::Interval(lo, hi) => {
                let w = hi - lo;
                (lo + 0.25 * w, hi - 0.25 * w)
            }
            ParamDomain::Free => (-1.0, 1.0),
        }
    }
}

/// Codimension-one parametrized hypersurface.
pub struct Immersion {
    pub ambient: Ambient,
    pub map: Box<dyn ChartMap>,
    pub domains: Vec<ParamDomain>,
    /// Sign choice for the unit normal.
    pub orientation: f64,
}

/// Second-order data of the immersion at a chart point.
#[derive(Clone, Debug)]
pub struct SecondFundamentalData {
    pub u: Vec<f64>,
    pub metric: DMatrix<f64>,
    pub normal: DVector<f64>,
    /// Second fundamental form `II_ij`.
    pub second_form: DMatrix<f64>,
    /// Shape operator `S = g^{-1} II` in chart components.
    pub shape: DMatrix<f64>,
    /// Principal curvatures, ordered by descending absolute value.
    pub principal: Vec<f64>,
    /// g-orthonormal principal directions (chart components).
    pub directions: Vec<DVector<f64>>,
    pub mean: f64,
    pub shape_norm2: f64,
    /// `det S` for surfaces.
    pub gauss_extrinsic: Option<f64>,
}

impl Immersion {
    pub fn chart_dim(&self) -> usize {
        self.map.chart_dim()
    }

    pub fn eval(&self, u: &[f64]) -> Point {
        Point {
            coords: self.map.eval(u),
        }
    }

    pub fn in_domain(&self, u: &[f64]) -> bool {
        u.iter()
            .zip(&self.domains)
            .all(|(&x, d)| d.contains(x, 0.08))
    }

    /// Induced metric and the oriented unit normal.
    pub fn first_fundamental(&self, u: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let p = self.eval(u);
        self.ambient.check_domain(&p)?;
        let jac = self.map.jacobian(u);
        let m = self.chart_dim();
        let mut g = DMatrix::zeros(m, m);
        let cols: Vec<DVector<f64>> = (0..m).map(|c| jac.column(c).into_owned()).collect();
        for i in 0..m {
            for j in i..m {
                let v = self.ambient.inner(&p, &cols[i], &cols[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        if g.determinant().abs() < 1e-14 {
            return Err(GeomError::Degenerate(format!(
                "singular first fundamental form at {u:?}"
            )));
        }
        let eta_raw = match &self.ambient {
            Ambient::Bcv(_) => self.ambient.cross(&p, &cols[0], &cols[1])?,
            Ambient::SpaceForm(s) => {
                if s.rho > 0.0 {
                    let mut w = vec![p.coords.normalize()];
                    w.extend(cols.iter().cloned());
                    spaces::generalized_cross(&w)
                } else if s.n == 3 {
                    spaces::euclid_cross3(&cols[0], &cols[1])
                } else {
                    spaces::generalized_cross(&cols)
                }
            }
        };
        let norm = self.ambient.norm(&p, &eta_raw);
        if norm < 1e-12 {
            return Err(GeomError::Degenerate(format!(
                "vanishing normal at {u:?}"
            )));
        }
        Ok((g, self.orientation * eta_raw / norm))
    }

    /// Shape operator, principal curvatures and derived scalars.
    pub fn shape_operator(&self, u: &[f64]) -> Result<SecondFundamentalData> {
        let (g, eta) = self.first_fundamental(u)?;
        let p = self.eval(u);
        let jac = self.map.jacobian(u);
        let m = self.chart_dim();
        let cols: Vec<DVector<f64>> = (0..m).map(|c| jac.column(c).into_owned()).collect();
        let mut ii = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let second = self.map.hessian(u, i, j)
                    + self.ambient.connection_correction(&p, &cols[i], &cols[j])?;
                let v = self.ambient.inner(&p, &second, &eta);
                ii[(i, j)] = v;
                ii[(j, i)] = v;
            }
        }
        let ginv = g.clone().try_inverse().expect("checked nondegenerate");
        let shape = &ginv * &ii;

        // g-symmetric eigenproblem via the metric square root
        let eig_g = g.clone().symmetric_eigen();
        let mut sqrt_inv = DMatrix::zeros(m, m);
        for i in 0..m {
            let val = eig_g.eigenvalues[i].max(0.0).sqrt();
            let col = eig_g.eigenvectors.column(i);
            sqrt_inv += (1.0 / val) * &col * col.transpose();
        }
        let sym = &sqrt_inv * &ii * &sqrt_inv;
        let eig = sym.symmetric_eigen();
        let mut pairs: Vec<(f64, DVector<f64>)> = (0..m)
            .map(|i| {
                let mut dir = &sqrt_inv * eig.eigenvectors.column(i);
                // deterministic sign
                if let Some(k) = dir.iter().enumerate().max_by(|a, b| {
                    a.1.abs().partial_cmp(&b.1.abs()).unwrap()
                }) {
                    if *k.1 < 0.0 {
                        dir = -dir;
                    }
                }
                (eig.eigenvalues[i], dir)
            })
            .collect();
        pairs.sort_by(|a, b| b.0.abs().partial_cmp(&a.0.abs()).unwrap());
        let principal: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let directions: Vec<DVector<f64>> = pairs.into_iter().map(|p| p.1).collect();
        let mean = shape.trace() / m as f64;
        let shape_norm2 = principal.iter().map(|l| l * l).sum();
        let gauss_extrinsic = (m == 2).then(|| principal[0] * principal[1]);
        Ok(SecondFundamentalData {
            u: u.to_vec(),
            metric: g,
            normal: eta,
            second_form: ii,
            shape,
            principal,
            directions,
            mean,
            shape_norm2,
            gauss_extrinsic,
        })
    }

    /// Induced metric evaluator (for intrinsic Christoffels).
    fn induced_metric(&self, u: &[f64]) -> DMatrix<f64> {
        let p = self.eval(u);
        let jac = self.map.jacobian(u);
        let m = self.chart_dim();
        let mut g = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.ambient.inner(
                    &p,
                    &jac.column(i).into_owned(),
                    &jac.column(j).into_owned(),
                );
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    fn intrinsic_accel(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let uu: Vec<f64> = u.iter().copied().collect();
        let gamma = spaces::christoffels_from_metric(
            &|q| self.induced_metric(q),
            &uu,
            &FdConfig::plain(1e-4),
        );
        -spaces::contract_christoffel(&gamma, v, v)
    }

    /// Normalize a chart direction to unit induced-metric length.
    pub fn unit_direction(&self, u: &[f64], dir: &DVector<f64>) -> Result<DVector<f64>> {
        let g = self.induced_metric(u);
        let n2 = (&g * dir).dot(dir);
        if n2 < 1e-14 {
            return Err(GeomError::Degenerate("zero direction".into()));
        }
        Ok(dir / n2.sqrt())
    }

    /// Random chart point in the safe sampling box.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.domains
            .iter()
            .map(|d| {
                let (lo, hi) = d.sample_range();
                rng.gen_range(lo..hi)
            })
            .collect()
    }

    pub fn random_unit_direction<R: Rng>(&self, u: &[f64], rng: &mut R) -> Result<DVector<f64>> {
        let m = self.chart_dim();
        let raw = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0f64));
        self.unit_direction(u, &raw)
    }
}

/// Intrinsic geodesic trace of an immersion, exposed as an ambient curve.
pub struct SurfaceGeodesic<'a> {
    pub imm: &'a Immersion,
    nodes: Vec<(DVector<f64>, DVector<f64>)>,
    step: f64,
    s_start: f64,
    /// Usable arc length from s = 0 (requested length, or where the chart
    /// was exited).
    pub length: f64,
    pad: f64,
}

impl<'a> SurfaceGeodesic<'a> {
    fn state(&self, s: f64) -> (DVector<f64>, DVector<f64>) {
        let rel = (s - self.s_start) / self.step;
        let i = (rel.floor().max(0.0) as usize).min(self.nodes.len() - 2);
        let x = s - (self.s_start + i as f64 * self.step);
        let (p0, v0) = &self.nodes[i];
        let (p1, v1) = &self.nodes[i + 1];
        let a0 = self.imm.intrinsic_accel(p0, v0);
        let a1 = self.imm.intrinsic_accel(p1, v1);
        let pos = curves::hermite(p0, v0, p1, v1, self.step, x);
        let vel = curves::hermite(v0, &a0, v1, &a1, self.step, x);
        (pos, vel)
    }

    pub fn chart_state(&self, s: f64) -> (Vec<f64>, DVector<f64>) {
        let (p, v) = self.state(s);
        (p.iter().copied().collect(), v)
    }
}

impl<'a> Curve for SurfaceGeodesic<'a> {
    fn domain(&self) -> (f64, f64) {
        (-self.pad + 5e-3, self.length + self.pad - 5e-3)
    }
    fn point(&self, s: f64) -> Point {
        let (u, _) = self.chart_state(s);
        self.imm.eval(&u)
    }
    fn d1(&self, s: f64) -> DVector<f64> {
        let (u, v) = self.chart_state(s);
        self.imm.map.jacobian(&u) * v
    }
    fn d2(&self, s: f64) -> DVector<f64> {
        let (u, v) = self.chart_state(s);
        let m = self.imm.chart_dim();
        let jac = self.imm.map.jacobian(&u);
        let acc = self
            .imm
            .intrinsic_accel(&DVector::from_column_slice(&u), &v);
        let mut out = &jac * &acc;
        for i in 0..m {
            for j in 0..m {
                out += v[i] * v[j] * self.imm.map.hessian(&u, i, j);
            }
        }
        out
    }
    fn d3(&self, s: f64) -> DVector<f64> {
        fd::deriv(|t| self.d2(t), s, &FdConfig::with_step(1e-3))
    }
}

/// Integrate the intrinsic geodesic from `u0` with initial direction `dir0`
/// (normalized internally). Stops early if the chart is exited; the reached
/// length is recorded on the trace.
pub fn surface_geodesic<'a>(
    imm: &'a Immersion,
    u0: &[f64],
    dir0: &DVector<f64>,
    length: f64,
    step: f64,
) -> Result<SurfaceGeodesic<'a>> {
    let pad = 0.05;
    let v0 = imm.unit_direction(u0, dir0)?;
    let mut pos = DVector::from_column_slice(u0);
    let mut vel = v0;
    let accel = |q: &DVector<f64>, w: &DVector<f64>| imm.intrinsic_accel(q, w);

    let back = (pad / step).ceil() as usize;
    for _ in 0..back {
        curves::rk4_step(&mut pos, &mut vel, -step, accel);
        let uu: Vec<f64> = pos.iter().copied().collect();
        if !imm.in_domain(&uu) {
            return Err(GeomError::ChartExit { reached: 0.0 });
        }
    }
    let s_start = -(back as f64) * step;

    let total_steps = ((length + 2.0 * pad) / step).ceil() as usize;
    let mut nodes = vec![(pos.clone(), vel.clone())];
    let mut reached = length;
    for k in 0..total_steps {
        curves::rk4_step(&mut pos, &mut vel, step, accel);
        let uu: Vec<f64> = pos.iter().copied().collect();
        if !imm.in_domain(&uu) {
            let s_here = s_start + (k as f64 + 1.0) * step;
            reached = (s_here - pad).min(length);
            if reached < 4.0 * pad {
                return Err(GeomError::ChartExit {
                    reached: reached.max(0.0),
                });
            }
            break;
        }
        nodes.push((pos.clone(), vel.clone()));
    }
    if nodes.len() < 2 {
        return Err(GeomError::ChartExit { reached: 0.0 });
    }
    // clamp the usable length to what was actually integrated
    let integrated_end = s_start + (nodes.len() - 1) as f64 * step;
    reached = reached.min(integrated_end - pad);
    Ok(SurfaceGeodesic {
        imm,
        nodes,
        step,
        s_start,
        length: reached,
        pad,
    })
}

/// Laplace-Beltrami operator on a chart scalar field, with the geometer's
/// sign: `Delta f = -div grad f`.
pub fn laplace_beltrami<F>(imm: &Immersion, f: F, u: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let m = imm.chart_dim();
    // wide step: the nested difference quotient divides the scalar field's
    // own evaluation noise by step^2
    let cfg = FdConfig::with_step(1e-2);
    let flux = |q: &[f64], i: usize| -> f64 {
        let g = imm.induced_metric(q);
        let ginv = g.clone().try_inverse().expect("metric invertible");
        let sqrt_det = g.determinant().sqrt();
        let mut s = 0.0;
        for j in 0..m {
            s += ginv[(i, j)] * fd::partial(&f, q, j, &cfg);
        }
        sqrt_det * s
    };
    let g = imm.induced_metric(u);
    let sqrt_det = g.determinant().sqrt();
    let mut div = 0.0;
    for i in 0..m {
        div += fd::partial(|q: &[f64]| flux(q, i), u, i, &cfg);
    }
    Ok(-div / sqrt_det)
}

/// Residuals of the biharmonic hypersurface system: the normal equation
/// `Delta H + H |S|^2 - H Ric(eta, eta)` and the tangential equation
/// `2 S(grad H) + (n-1) H grad H - 2 H Ric(eta)^T`.
#[derive(Clone, Debug)]
pub struct BiharmonicResiduals {
    pub normal_max: f64,
    pub tangential_max: f64,
}

pub fn biharmonic_check(imm: &Immersion, samples: &[Vec<f64>]) -> Result<BiharmonicResiduals> {
    let m = imm.chart_dim();
    let cfg = FdConfig::with_step(1e-3);
    let h_field = |q: &[f64]| -> f64 {
        imm.shape_operator(q).map(|d| d.mean).unwrap_or(f64::NAN)
    };
    let mut out = BiharmonicResiduals {
        normal_max: 0.0,
        tangential_max: 0.0,
    };
    for u in samples {
        let sd = imm.shape_operator(u)?;
        let p = imm.eval(u);
        let h = sd.mean;
        let lap_h = laplace_beltrami(imm, h_field, u)?;
        let ric_nn = imm.ambient.ricci(&p, &sd.normal, &sd.normal)?;
        let res1 = (lap_h + h * sd.shape_norm2 - h * ric_nn).abs();

        let grad_cov = DVector::from_fn(m, |j, _| fd::partial(&h_field, u, j, &cfg));
        let ginv = sd.metric.clone().try_inverse().expect("metric invertible");
        let grad = &ginv * grad_cov;
        let ric_vec = imm.ambient.ricci_vector(&p, &sd.normal)?;
        let jac = imm.map.jacobian(u);
        let ric_t_cov = DVector::from_fn(m, |j, _| {
            imm.ambient.inner(&p, &ric_vec, &jac.column(j).into_owned())
        });
        let ric_t = &ginv * ric_t_cov;
        let tangential = 2.0 * (&sd.shape * &grad) + (m as f64) * h * &grad - 2.0 * h * ric_t;
        let res2 = ((&sd.metric * &tangential).dot(&tangential)).max(0.0).sqrt();
        out.normal_max = out.normal_max.max(res1);
        out.tangential_max = out.tangential_max.max(res2);
    }
    Ok(out)
}

/// Residual of the biminimal (normal-only) equation.
pub fn biminimal_check(imm: &Immersion, samples: &[Vec<f64>]) -> Result<f64> {
    let m = imm.chart_dim();
    let _ = m;
    let h_field = |q: &[f64]| -> f64 {
        imm.shape_operator(q).map(|d| d.mean).unwrap_or(f64::NAN)
    };
    let mut max = 0.0f64;
    for u in samples {
        let sd = imm.shape_operator(u)?;
        let p = imm.eval(u);
        let lap_h = laplace_beltrami(imm, h_field, u)?;
        let ric_nn = imm.ambient.ricci(&p, &sd.normal, &sd.normal)?;
        max = max.max((lap_h + sd.mean * sd.shape_norm2 - sd.mean * ric_nn).abs());
    }
    Ok(max)
}

/// Outcome of the pointwise totally-biharmonic system (s1)-(s3).
#[derive(Clone, Debug)]
pub struct PointwiseOutcome {
    pub s1_max: f64,
    pub s2_max: f64,
    pub s3_max: f64,
    pub totally_geodesic: bool,
    pub samples_used: usize,
}

impl PointwiseOutcome {
    pub fn max_residual(&self) -> f64 {
        self.s1_max.max(self.s2_max).max(self.s3_max)
    }
}

/// Check the shape-operator system characterizing totally biharmonic
/// hypersurfaces at randomly sampled points and directions. The constancy of
/// `<S X, X>` is tested along the integrated geodesic tangent to `X`.
pub fn tb_pointwise_check<R: Rng>(
    imm: &Immersion,
    n_samples: usize,
    rng: &mut R,
) -> Result<PointwiseOutcome> {
    let m = imm.chart_dim();
    let geo_len = 0.6;
    let step = 5e-3;
    let s_mid = 0.5 * geo_len;

    // totally geodesic short-circuit
    let mut max_shape = 0.0f64;
    let probes: Vec<Vec<f64>> = (0..n_samples.min(8)).map(|_| imm.sample_point(rng)).collect();
    for u in &probes {
        let sd = imm.shape_operator(u)?;
        max_shape = max_shape.max(sd.principal.iter().fold(0.0f64, |a, l| a.max(l.abs())));
    }
    if max_shape < 1e-9 {
        return Ok(PointwiseOutcome {
            s1_max: 0.0,
            s2_max: 0.0,
            s3_max: 0.0,
            totally_geodesic: true,
            samples_used: probes.len(),
        });
    }

    let mut out = PointwiseOutcome {
        s1_max: 0.0,
        s2_max: 0.0,
        s3_max: 0.0,
        totally_geodesic: false,
        samples_used: 0,
    };
    let mut attempts = 0;
    while out.samples_used < n_samples && attempts < 4 * n_samples {
        attempts += 1;
        let u = imm.sample_point(rng);
        let x = match imm.random_unit_direction(&u, rng) {
            Ok(x) => x,
            Err(_) => continue,
        };
        let trace = match surface_geodesic(imm, &u, &x, geo_len, step) {
            Ok(t) => t,
            Err(GeomError::ChartExit { .. }) => continue,
            Err(e) => return Err(e),
        };
        if trace.length < geo_len - 1e-9 {
            continue;
        }

        // (s1): <S t, t> constant along the geodesic
        let quad = |s: f64| -> f64 {
            let (uu, v) = trace.chart_state(s);
            let sd = imm.shape_operator(&uu).expect("inside domain");
            (&sd.second_form * &v).dot(&v)
        };
        let q0 = quad(0.0);
        for k in 0..=8 {
            let s = geo_len * k as f64 / 8.0;
            out.s1_max = out.s1_max.max((quad(s) - q0).abs());
        }

        // (s2) and (s3) at the midpoint of the trace
        let (um, vm) = trace.chart_state(s_mid);
        let sd = imm.shape_operator(&um)?;
        let p = imm.eval(&um);
        let jac = imm.map.jacobian(&um);
        let x_amb = &jac * &vm;
        let sx = &sd.shape * &vm;
        let sx2 = (&sd.metric * &sx).dot(&sx);
        let k_sec = imm.ambient.sectional(&p, &x_amb, &sd.normal)?;
        out.s2_max = out.s2_max.max((sx2 - k_sec).abs());

        // g-orthonormal complement of the direction at the midpoint
        let mut complement: Vec<DVector<f64>> = Vec::new();
        let mut basis = vec![vm.clone()];
        for k in 0..m {
            let mut w = DVector::zeros(m);
            w[k] = 1.0;
            for b in &basis {
                let c = (&sd.metric * b).dot(&w);
                w -= c * b;
            }
            let n2 = (&sd.metric * &w).dot(&w);
            if n2 > 1e-10 {
                let w = w / n2.sqrt();
                basis.push(w.clone());
                complement.push(w);
            }
        }

        let w_field = |s: f64| -> DVector<f64> {
            let (uu, v) = trace.chart_state(s);
            let sdl = imm.shape_operator(&uu).expect("inside domain");
            imm.map.jacobian(&uu) * (&sdl.shape * &v)
        };
        let dtw = curves::covariant_derivative_along(&imm.ambient, &trace, w_field, s_mid)?;
        let r_vec = imm.ambient.curvature(&p, &x_amb, &sd.normal, &x_amb)?;
        for y in &complement {
            let y_amb = &jac * y;
            let lhs = imm.ambient.inner(&p, &dtw, &y_amb);
            let rhs = imm.ambient.inner(&p, &r_vec, &y_amb);
            out.s3_max = out.s3_max.max((lhs + rhs).abs());
        }
        out.samples_used += 1;
    }
    if out.samples_used == 0 {
        return Err(GeomError::Degenerate(
            "no usable pointwise samples (all geodesics exited the chart)".into(),
        ));
    }
    Ok(out)
}

/// Per-geodesic outcome of the geodesic-sampling totally-biharmonic check.
#[derive(Clone, Debug)]
pub struct GeodesicRow {
    pub id: usize,
    pub u0: Vec<f64>,
    pub dir0: Vec<f64>,
    pub res_t: f64,
    pub res_n: f64,
    pub res_b: f64,
    pub verdict: String,
}

#[derive(Clone, Debug)]
pub struct GeodesicOutcome {
    pub rows: Vec<GeodesicRow>,
    pub max_res: f64,
    pub used: usize,
    pub skipped: usize,
    pub vacuous: usize,
}

/// Integrate `count` random intrinsic geodesics and measure the worst
/// ambient biharmonicity residual. Geodesics that exit the chart early are
/// reported as skipped, never as failures.
pub fn tb_geodesic_check<R: Rng>(
    imm: &Immersion,
    count: usize,
    length: f64,
    step: f64,
    tolerance: f64,
    rng: &mut R,
) -> Result<GeodesicOutcome> {
    let mut out = GeodesicOutcome {
        rows: Vec::new(),
        max_res: 0.0,
        used: 0,
        skipped: 0,
        vacuous: 0,
    };
    for id in 0..count {
        let u0 = imm.sample_point(rng);
        let dir = match imm.random_unit_direction(&u0, rng) {
            Ok(d) => d,
            Err(_) => {
                out.skipped += 1;
                continue;
            }
        };
        let dir0: Vec<f64> = dir.iter().copied().collect();
        let trace = match surface_geodesic(imm, &u0, &dir, length, step) {
            Ok(t) => t,
            Err(GeomError::ChartExit { .. }) => {
                out.rows.push(GeodesicRow {
                    id,
                    u0,
                    dir0,
                    res_t: 0.0,
                    res_n: 0.0,
                    res_b: 0.0,
                    verdict: "skipped".into(),
                });
                out.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if trace.length < 0.5 {
            out.rows.push(GeodesicRow {
                id,
                u0,
                dir0,
                res_t: 0.0,
                res_n: 0.0,
                res_b: 0.0,
                verdict: "skipped".into(),
            });
            out.skipped += 1;
            continue;
        }
        let grid: Vec<f64> = (0..13)
            .map(|k| 0.04 + (trace.length - 0.08) * k as f64 / 12.0)
            .collect();
        let res = curves::biharmonic_residuals(&imm.ambient, &trace, &grid)?;
        if res.vacuous {
            out.vacuous += 1;
            out.rows.push(GeodesicRow {
                id,
                u0,
                dir0,
                res_t: 0.0,
                res_n: 0.0,
                res_b: 0.0,
                verdict: "vacuous".into(),
            });
            out.used += 1;
            continue;
        }
        let (rt, rn, rb) = res.max_residuals();
        let pass = rt.max(rn).max(rb) <= tolerance;
        out.max_res = out.max_res.max(rt.max(rn).max(rb));
        out.rows.push(GeodesicRow {
            id,
            u0,
            dir0,
            res_t: rt,
            res_n: rn,
            res_b: rb,
            verdict: if pass { "pass".into() } else { "fail".into() },
        });
        out.used += 1;
    }
    if out.used == 0 {
        return Err(GeomError::Degenerate(
            "every sampled geodesic exited the chart".into(),
        ));
    }
    Ok(out)
}

/// Feasible principal curvatures of a non-totally-geodesic totally
/// biharmonic hypersurface of a space form: `lambda^2 = rho`.
pub fn tb_principal_constraint(rho: f64) -> Vec<f64> {
    if rho > 1e-12 {
        vec![rho.sqrt(), -rho.sqrt()]
    } else {
        Vec::new()
    }
}

/// Base-curve data of an E3-invariant (Hopf) cylinder in a BCV space:
/// geodesic curvature of the projected profile and the residuals of the
/// submersion identities `|S|^2 = kappa_g^2 + b^2/2`, `|K_e| = b^2/4`.
///
/// The fibers are ambient geodesics, so `II(E3, E3) = 0` and the shape
/// determinant of a Hopf cylinder is `-(b/2)^2`; the extrinsic Gaussian
/// curvature identity is therefore checked in absolute value.
#[derive(Clone, Debug)]
pub struct HopfBaseData {
    pub kappa_g: f64,
    pub shape_norm_residual: f64,
    pub gauss_residual: f64,
    pub invariance_max: f64,
}

pub fn hopf_base_data(imm: &Immersion, samples: &[Vec<f64>]) -> Result<HopfBaseData> {
    let Ambient::Bcv(bcv) = &imm.ambient else {
        return Err(GeomError::Parameter(
            "hopf base data requires a BCV ambient".into(),
        ));
    };
    let (a, b) = (bcv.a, bcv.b);

    // E3-invariance: the normal must stay horizontal
    let e3 = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
    let mut invariance_max = 0.0f64;
    for u in samples {
        let (_, eta) = imm.first_fundamental(u)?;
        let p = imm.eval(u);
        invariance_max = invariance_max.max(imm.ambient.inner(&p, &eta, &e3).abs());
    }
    if invariance_max > 1e-8 {
        return Err(GeomError::Parameter(format!(
            "immersion is not E3-invariant: <eta, E3> up to {invariance_max}"
        )));
    }

    // project the profile (t = 0 slice) to the base metric (dx^2+dy^2)/lambda^2
    let base_metric = |q: &[f64]| -> DMatrix<f64> {
        let lam = 1.0 + a * (q[0] * q[0] + q[1] * q[1]);
        DMatrix::identity(2, 2) / (lam * lam)
    };
    let profile = |s: f64, order: u32| -> DVector<f64> {
        let u = [s, 0.0];
        let full = match order {
            0 => imm.map.eval(&u),
            1 => imm.map.jacobian(&u).column(0).into_owned(),
            _ => imm.map.hessian(&u, 0, 0),
        };
        DVector::from_column_slice(&[full[0], full[1]])
    };
    let kappa_g_at = |s: f64| -> f64 {
        let beta = profile(s, 0);
        let d1 = profile(s, 1);
        let d2 = profile(s, 2);
        let q = [beta[0], beta[1]];
        let gamma =
            spaces::christoffels_from_metric(&base_metric, &q, &FdConfig::default());
        let acc = d2 + spaces::contract_christoffel(&gamma, &d1, &d1);
        let g = base_metric(&q);
        ((&g * &acc).dot(&acc)).max(0.0).sqrt()
    };
    let kappa_g = kappa_g_at(0.0);

    let mut shape_norm_residual = 0.0f64;
    let mut gauss_residual = 0.0f64;
    for u in samples {
        let sd = imm.shape_operator(u)?;
        shape_norm_residual = shape_norm_residual
            .max((sd.shape_norm2 - (kappa_g * kappa_g + 0.5 * b * b)).abs());
        gauss_residual = gauss_residual
            .max((sd.gauss_extrinsic.unwrap_or(f64::NAN).abs() - 0.25 * b * b).abs());
    }
    Ok(HopfBaseData {
        kappa_g,
        shape_norm_residual,
        gauss_residual,
        invariance_max,
    })
}
