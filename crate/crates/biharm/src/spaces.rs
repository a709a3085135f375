//! Ambient spaces: n-dimensional space forms and 3-dimensional BCV spaces.
//!
//! Both families are exposed behind the [`Ambient`] enum, which provides the
//! metric, the Levi-Civita connection, the curvature operator and derived
//! quantities (sectional curvature, Ricci). BCV tensors are evaluated
//! generically by finite differences of the metric; the closed-form
//! connection table and curvature components serve as oracles in the tests.

use crate::error::{GeomError, Result};
use crate::fd::{self, FdConfig};
use nalgebra::{DMatrix, DVector};

/// Chart point. For BCV spaces the coordinates are `(x, y, z)`; for sphere
/// models they are the coordinates of the round embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub coords: DVector<f64>,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        Self {
            coords: DVector::from_column_slice(coords),
        }
    }
}

/// Tangent vector in chart components at a base point.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub base: Point,
    pub components: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: &Point, components: &[f64]) -> Self {
        assert_eq!(base.coords.len(), components.len());
        Self {
            base: base.clone(),
            components: DVector::from_column_slice(components),
        }
    }
}

/// Orthonormal frame `{E1, E2, E3}` of a BCV space at a point.
#[derive(Clone, Debug)]
pub struct FrameTriple {
    pub e1: TangentVector,
    pub e2: TangentVector,
    pub e3: TangentVector,
}

/// The BCV family `N(a,b)` with metric `h_{a,b}` on the chart
/// `lambda_a = 1 + a(x^2+y^2) > 0`.
#[derive(Clone, Copy, Debug)]
pub struct BcvSpace {
    pub a: f64,
    pub b: f64,
    pub fd: FdConfig,
}

/// Space form `N^n(rho)`. For `rho > 0` the model is the round sphere of
/// radius `1/sqrt(rho)` embedded in `R^{n+1}`; for `rho <= 0` only the
/// constant-curvature tensor algebra is exposed (flat chart for `rho = 0`).
#[derive(Clone, Copy, Debug)]
pub struct SpaceForm {
    pub n: usize,
    pub rho: f64,
}

#[derive(Clone, Debug)]
pub enum Ambient {
    Bcv(BcvSpace),
    SpaceForm(SpaceForm),
}

/// Simply connected model of `N(a,b)` per the isometry-group classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcvClass {
    SpaceForm,
    Heisenberg,
    S2xR,
    H2xR,
    Su2,
    Sl2R,
}

pub fn classify_bcv(a: f64, b: f64) -> BcvClass {
    if (4.0 * a - b * b).abs() < 1e-12 {
        BcvClass::SpaceForm
    } else if a == 0.0 {
        BcvClass::Heisenberg
    } else if b == 0.0 {
        if a > 0.0 {
            BcvClass::S2xR
        } else {
            BcvClass::H2xR
        }
    } else if a > 0.0 {
        BcvClass::Su2
    } else {
        BcvClass::Sl2R
    }
}

impl BcvSpace {
    pub fn new(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            fd: FdConfig::default(),
        }
    }

    pub fn lambda(&self, p: &Point) -> f64 {
        let x = p.coords[0];
        let y = p.coords[1];
        1.0 + self.a * (x * x + y * y)
    }

    /// Chart-domain guard: keeps room for difference stencils near the
    /// boundary lambda_a = 0.
    pub fn check_domain(&self, p: &Point) -> Result<()> {
        let lam = self.lambda(p);
        if lam < 10.0 * self.fd.step {
            Err(GeomError::OutsideChart { lambda_a: lam })
        } else {
            Ok(())
        }
    }

    /// Gram matrix of `h_{a,b}` in the chart coordinates `(x, y, z)`.
    pub fn metric(&self, p: &Point) -> Result<DMatrix<f64>> {
        self.check_domain(p)?;
        Ok(self.metric_unchecked(&[p.coords[0], p.coords[1], p.coords[2]]))
    }

    fn metric_unchecked(&self, c: &[f64]) -> DMatrix<f64> {
        let (x, y) = (c[0], c[1]);
        let lam = 1.0 + self.a * (x * x + y * y);
        let inv2 = 1.0 / (lam * lam);
        // contact form: dz + w (y dx - x dy), with w = b / (2 lambda_a)
        let w = 0.5 * self.b / lam;
        let mut g = DMatrix::zeros(3, 3);
        g[(0, 0)] = inv2 + w * w * y * y;
        g[(1, 1)] = inv2 + w * w * x * x;
        g[(2, 2)] = 1.0;
        g[(0, 1)] = -w * w * x * y;
        g[(1, 0)] = g[(0, 1)];
        g[(0, 2)] = w * y;
        g[(2, 0)] = w * y;
        g[(1, 2)] = -w * x;
        g[(2, 1)] = -w * x;
        g
    }

    /// The defining orthonormal frame `E1, E2, E3` in chart components.
    pub fn frame(&self, p: &Point) -> Result<FrameTriple> {
        self.check_domain(p)?;
        let (x, y) = (p.coords[0], p.coords[1]);
        let lam = self.lambda(p);
        let e1 = TangentVector::new(p, &[lam, 0.0, -0.5 * self.b * y]);
        let e2 = TangentVector::new(p, &[0.0, lam, 0.5 * self.b * x]);
        let e3 = TangentVector::new(p, &[0.0, 0.0, 1.0]);
        Ok(FrameTriple { e1, e2, e3 })
    }

    /// Closed-form Levi-Civita table `nabla_{E_i} E_j`, returned in chart
    /// components. Indices are 1-based as in the frame notation.
    ///
    /// Note: the symmetric entry `nabla_{E_2} E_1` follows from torsion
    /// freeness, `nabla_{E_2}E_1 = nabla_{E_1}E_2 - [E_1, E_2]
    /// = -2ax E_2 - (b/2) E_3`.
    pub fn connection_frame(&self, p: &Point, i: usize, j: usize) -> Result<TangentVector> {
        assert!((1..=3).contains(&i) && (1..=3).contains(&j), "frame index");
        self.check_domain(p)?;
        let (x, y) = (p.coords[0], p.coords[1]);
        let (a, b) = (self.a, self.b);
        let f = self.frame(p)?;
        let [e1, e2, e3] = [f.e1.components, f.e2.components, f.e3.components];
        let comps = match (i, j) {
            (1, 1) => 2.0 * a * y * &e2,
            (1, 2) => -2.0 * a * y * &e1 + 0.5 * b * &e3,
            (1, 3) => -0.5 * b * &e2,
            (2, 1) => -2.0 * a * x * &e2 - 0.5 * b * &e3,
            (2, 2) => 2.0 * a * x * &e1,
            (2, 3) => 0.5 * b * &e1,
            (3, 1) => -0.5 * b * &e2,
            (3, 2) => 0.5 * b * &e1,
            (3, 3) => DVector::zeros(3),
            _ => unreachable!(),
        };
        Ok(TangentVector {
            base: p.clone(),
            components: comps,
        })
    }

    pub fn christoffels(&self, p: &Point) -> Result<Vec<DMatrix<f64>>> {
        self.check_domain(p)?;
        let c = [p.coords[0], p.coords[1], p.coords[2]];
        Ok(christoffels_from_metric(
            &|x| self.metric_unchecked(x),
            &c,
            &self.fd,
        ))
    }

    /// Basis `X1..X4` of the Killing algebra, evaluated at `p` in chart
    /// components. Requires `4a != b^2` (4-dimensional isometry algebra).
    pub fn killing_basis(&self, p: &Point) -> Result<Vec<TangentVector>> {
        if (4.0 * self.a - self.b * self.b).abs() < 1e-12 {
            return Err(GeomError::Parameter(
                "killing basis requires 4a != b^2".into(),
            ));
        }
        self.check_domain(p)?;
        Ok(self.killing_basis_unchecked(p))
    }

    fn killing_basis_unchecked(&self, p: &Point) -> Vec<TangentVector> {
        let (x, y) = (p.coords[0], p.coords[1]);
        let (a, b) = (self.a, self.b);
        let lam = self.lambda(p);
        let f = self.frame(p).expect("domain already checked");
        let [e1, e2, e3] = [f.e1.components, f.e2.components, f.e3.components];
        let x1 = (1.0 - 2.0 * a * y * y / lam) * &e1
            + (2.0 * a * x * y / lam) * &e2
            + (b * y / lam) * &e3;
        let x2 = (2.0 * a * x * y / lam) * &e1
            + (1.0 - 2.0 * a * x * x / lam) * &e2
            - (b * x / lam) * &e3;
        let x3 = -(y / lam) * &e1 + (x / lam) * &e2
            - (0.5 * b * (x * x + y * y) / lam) * &e3;
        let x4 = e3;
        [x1, x2, x3, x4]
            .into_iter()
            .map(|components| TangentVector {
                base: p.clone(),
                components,
            })
            .collect()
    }

    /// Max residual of the Lie derivative of the metric along the given
    /// vector field, estimated by finite-difference flow pullback over the
    /// coordinate-pair inner products.
    pub fn lie_derivative_residual<F>(&self, p: &Point, field: F) -> Result<f64>
    where
        F: Fn(&Point) -> DVector<f64>,
    {
        self.check_domain(p)?;
        let eps = 1e-2;
        let delta = 1e-4;
        let flow = |start: &DVector<f64>, time: f64| -> DVector<f64> {
            // RK4 along the field
            let steps = 8;
            let h = time / steps as f64;
            let rhs = |c: &DVector<f64>| field(&Point { coords: c.clone() });
            let mut c = start.clone();
            for _ in 0..steps {
                let k1 = rhs(&c);
                let k2 = rhs(&(&c + 0.5 * h * &k1));
                let k3 = rhs(&(&c + 0.5 * h * &k2));
                let k4 = rhs(&(&c + h * &k3));
                c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            c
        };
        let mut max_res: f64 = 0.0;
        for i in 0..3 {
            for j in i..3 {
                let pullback = |t: f64| -> f64 {
                    let q = flow(&p.coords, t);
                    let push = |k: usize| -> DVector<f64> {
                        let mut plus = p.coords.clone();
                        plus[k] += delta;
                        let mut minus = p.coords.clone();
                        minus[k] -= delta;
                        (flow(&plus, t) - flow(&minus, t)) / (2.0 * delta)
                    };
                    let vi = push(i);
                    let vj = push(j);
                    let g = self.metric_unchecked(&[q[0], q[1], q[2]]);
                    (g.clone() * &vj).dot(&vi)
                };
                let d = fd::deriv(pullback, 0.0, &FdConfig::plain(eps));
                max_res = max_res.max(d.abs());
            }
        }
        Ok(max_res)
    }
}

impl SpaceForm {
    pub fn new(n: usize, rho: f64) -> Self {
        assert!(n >= 2);
        Self { n, rho }
    }

    /// Radius of the sphere model, defined for `rho > 0`.
    pub fn radius(&self) -> f64 {
        assert!(self.rho > 0.0);
        1.0 / self.rho.sqrt()
    }

    fn model_dim(&self) -> usize {
        if self.rho > 0.0 {
            self.n + 1
        } else {
            self.n
        }
    }
}

impl Ambient {
    pub fn bcv(a: f64, b: f64) -> Self {
        Ambient::Bcv(BcvSpace::new(a, b))
    }

    pub fn space_form(n: usize, rho: f64) -> Self {
        Ambient::SpaceForm(SpaceForm::new(n, rho))
    }

    /// Euclidean 3-space realized as the flat BCV chart.
    pub fn euclidean3() -> Self {
        Ambient::bcv(0.0, 0.0)
    }

    /// Manifold dimension.
    pub fn dim(&self) -> usize {
        match self {
            Ambient::Bcv(_) => 3,
            Ambient::SpaceForm(s) => s.n,
        }
    }

    /// Length of coordinate tuples (embedding dimension for sphere models).
    pub fn coord_dim(&self) -> usize {
        match self {
            Ambient::Bcv(_) => 3,
            Ambient::SpaceForm(s) => s.model_dim(),
        }
    }

    pub fn check_domain(&self, p: &Point) -> Result<()> {
        match self {
            Ambient::Bcv(b) => b.check_domain(p),
            Ambient::SpaceForm(s) => {
                if s.rho > 0.0 {
                    let r2 = p.coords.norm_squared();
                    if (r2 - 1.0 / s.rho).abs() > 1e-8 * (1.0 + 1.0 / s.rho) {
                        return Err(GeomError::Parameter(format!(
                            "point off the sphere model: |P|^2 = {r2}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Gram matrix of the ambient metric in model coordinates. Sphere models
    /// carry the restricted Euclidean metric of the embedding.
    pub fn metric(&self, p: &Point) -> Result<DMatrix<f64>> {
        match self {
            Ambient::Bcv(b) => b.metric(p),
            Ambient::SpaceForm(s) => Ok(DMatrix::identity(s.model_dim(), s.model_dim())),
        }
    }

    pub fn inner(&self, p: &Point, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match self {
            Ambient::Bcv(b) => {
                let g = b
                    .metric_unchecked(&[p.coords[0], p.coords[1], p.coords[2]]);
                (g * y).dot(x)
            }
            Ambient::SpaceForm(_) => x.dot(y),
        }
    }

    pub fn norm(&self, p: &Point, x: &DVector<f64>) -> f64 {
        self.inner(p, x, x).max(0.0).sqrt()
    }

    /// Connection correction term: for a field `V` along a direction `X`,
    /// `nabla_X V = dV(X) + correction(p, X, V)`. Chart spaces use the
    /// Christoffel contraction, sphere models the projection form
    /// `rho <X, V> P`.
    pub fn connection_correction(
        &self,
        p: &Point,
        x: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        match self {
            Ambient::Bcv(b) => {
                let gamma = b.christoffels(p)?;
                Ok(contract_christoffel(&gamma, x, v))
            }
            Ambient::SpaceForm(s) => {
                if s.rho > 0.0 {
                    Ok(s.rho * x.dot(v) * &p.coords)
                } else {
                    // flat chart; hyperbolic handled at tensor-algebra level
                    Ok(DVector::zeros(s.model_dim()))
                }
            }
        }
    }

    /// Chart Christoffel symbols, `Gamma^k` as matrices indexed by `(i, j)`.
    /// Not defined for sphere models (projection form used instead).
    pub fn christoffels(&self, p: &Point) -> Result<Vec<DMatrix<f64>>> {
        match self {
            Ambient::Bcv(b) => b.christoffels(p),
            Ambient::SpaceForm(s) => {
                if s.rho == 0.0 {
                    Ok(vec![DMatrix::zeros(s.n, s.n); s.n])
                } else {
                    Err(GeomError::Parameter(
                        "sphere models use the ambient projection, not chart Christoffels".into(),
                    ))
                }
            }
        }
    }

    /// Curvature operator `R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z
    /// - nabla_{[X,Y]} Z` evaluated at `p`.
    pub fn curvature(
        &self,
        p: &Point,
        x: &DVector<f64>,
        y: &DVector<f64>,
        z: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        match self {
            Ambient::Bcv(b) => {
                b.check_domain(p)?;
                let cfg = b.fd;
                let c: Vec<f64> = p.coords.iter().copied().collect();
                let chris = |q: &[f64]| {
                    christoffels_from_metric(&|u| b.metric_unchecked(u), q, &cfg)
                };
                // larger outer step: each Christoffel evaluation already
                // carries the inner difference roundoff
                let outer = FdConfig::with_step(10.0 * cfg.step);
                Ok(curvature_from_christoffels(&chris, &c, x, y, z, &outer))
            }
            Ambient::SpaceForm(s) => {
                Ok(s.rho * (y.dot(z) * x - x.dot(z) * y))
            }
        }
    }

    /// Sectional curvature of the plane spanned by `x, y`.
    pub fn sectional(&self, p: &Point, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        let xx = self.inner(p, x, x);
        let yy = self.inner(p, y, y);
        let xy = self.inner(p, x, y);
        let area2 = xx * yy - xy * xy;
        if area2 < 1e-12 * xx * yy {
            return Err(GeomError::DegeneratePlane);
        }
        let r = self.curvature(p, x, y, y)?;
        Ok(self.inner(p, &r, x) / area2)
    }

    /// Ricci curvature `Ric(X, Y)` by tracing over an orthonormal frame.
    pub fn ricci(&self, p: &Point, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        let frame = self.tangent_frame(p)?;
        let mut sum = 0.0;
        for e in &frame {
            let r = self.curvature(p, e, x, y)?;
            sum += self.inner(p, &r, e);
        }
        Ok(sum)
    }

    /// Vector `Ric(X)` with `<Ric(X), W> = Ric(X, W)` for all `W`.
    pub fn ricci_vector(&self, p: &Point, x: &DVector<f64>) -> Result<DVector<f64>> {
        let frame = self.tangent_frame(p)?;
        let mut v = DVector::zeros(self.coord_dim());
        for e in &frame {
            v += self.ricci(p, x, e)? * e;
        }
        Ok(v)
    }

    /// Combined sectional/Ricci evaluation as a single operation.
    pub fn sectional_and_ricci(
        &self,
        p: &Point,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> Result<(f64, f64, DVector<f64>)> {
        let k = self.sectional(p, x, y)?;
        let ric = self.ricci(p, x, y)?;
        let ric_vec = self.ricci_vector(p, x)?;
        Ok((k, ric, ric_vec))
    }

    /// Orthonormal basis of the tangent space at `p`.
    pub fn tangent_frame(&self, p: &Point) -> Result<Vec<DVector<f64>>> {
        match self {
            Ambient::Bcv(b) => {
                let f = b.frame(p)?;
                Ok(vec![f.e1.components, f.e2.components, f.e3.components])
            }
            Ambient::SpaceForm(s) => {
                if s.rho > 0.0 {
                    let d = s.model_dim();
                    let radial = p.coords.normalize();
                    let mut basis: Vec<DVector<f64>> = vec![radial];
                    for k in 0..d {
                        let mut v = DVector::zeros(d);
                        v[k] = 1.0;
                        for b in &basis {
                            let c = v.dot(b);
                            v -= c * b;
                        }
                        if v.norm() > 1e-8 {
                            basis.push(v.normalize());
                        }
                        if basis.len() == d {
                            break;
                        }
                    }
                    Ok(basis.into_iter().skip(1).collect())
                } else {
                    let d = s.n;
                    Ok((0..d)
                        .map(|k| {
                            let mut v = DVector::zeros(d);
                            v[k] = 1.0;
                            v
                        })
                        .collect())
                }
            }
        }
    }

    /// Metric cross product for 3-dimensional ambients; for sphere models the
    /// product is taken inside the tangent hyperplane of the embedding.
    pub fn cross(&self, p: &Point, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            Ambient::Bcv(b) => {
                let g = b.metric(p)?;
                Ok(metric_cross3(&g, x, y))
            }
            Ambient::SpaceForm(s) => {
                if s.n != 3 || s.rho <= 0.0 {
                    if s.n == 3 && s.rho == 0.0 {
                        return Ok(euclid_cross3(x, y));
                    }
                    return Err(GeomError::Parameter(
                        "cross product requires a 3-dimensional ambient".into(),
                    ));
                }
                let radial = p.coords.normalize();
                Ok(generalized_cross(&[radial, x.clone(), y.clone()]))
            }
        }
    }
}

/// Christoffel symbols of a chart metric by central differences.
pub fn christoffels_from_metric<F>(metric: &F, x: &[f64], cfg: &FdConfig) -> Vec<DMatrix<f64>>
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    let d = x.len();
    let g = metric(x);
    let ginv = g
        .clone()
        .try_inverse()
        .expect("metric must be invertible on the chart");
    let dg: Vec<DMatrix<f64>> = (0..d)
        .map(|i| fd::partial(|q: &[f64]| metric(q), x, i, cfg))
        .collect();
    let mut gamma = vec![DMatrix::zeros(d, d); d];
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut s = 0.0;
                for l in 0..d {
                    s += ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
                gamma[k][(i, j)] = 0.5 * s;
                gamma[k][(j, i)] = 0.5 * s;
            }
        }
    }
    gamma
}

/// `Gamma(x, v)` contraction.
pub fn contract_christoffel(
    gamma: &[DMatrix<f64>],
    x: &DVector<f64>,
    v: &DVector<f64>,
) -> DVector<f64> {
    let d = gamma.len();
    DVector::from_fn(d, |k, _| (&gamma[k] * v).dot(x))
}

/// `R(X,Y)Z` of a chart connection by differencing the Christoffel symbols.
pub fn curvature_from_christoffels<F>(
    chris: &F,
    x0: &[f64],
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
    cfg: &FdConfig,
) -> DVector<f64>
where
    F: Fn(&[f64]) -> Vec<DMatrix<f64>>,
{
    let d = x0.len();
    let gamma = chris(x0);
    // dgamma[i][k] = d_i Gamma^k
    let dgamma: Vec<Vec<DMatrix<f64>>> = (0..d)
        .map(|i| {
            fd::partial(
                |q: &[f64]| StackedMats(chris(q)),
                x0,
                i,
                cfg,
            )
            .0
        })
        .collect();
    let mut out = DVector::zeros(d);
    for l in 0..d {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..d {
                    let mut term = dgamma[i][l][(j, k)] - dgamma[j][l][(i, k)];
                    for m in 0..d {
                        term += gamma[l][(i, m)] * gamma[m][(j, k)]
                            - gamma[l][(j, m)] * gamma[m][(i, k)];
                    }
                    acc += term * xy * z[k];
                }
            }
        }
        out[l] = acc;
    }
    out
}

// Arithmetic wrapper so a Vec of matrices can go through the FD helpers.
struct StackedMats(Vec<DMatrix<f64>>);

impl std::ops::Sub for StackedMats {
    type Output = StackedMats;
    fn sub(self, rhs: Self) -> Self {
        StackedMats(
            self.0
                .into_iter()
                .zip(rhs.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl std::ops::Add for StackedMats {
    type Output = StackedMats;
    fn add(self, rhs: Self) -> Self {
        StackedMats(
            self.0
                .into_iter()
                .zip(rhs.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl std::ops::Mul<f64> for StackedMats {
    type Output = StackedMats;
    fn mul(self, s: f64) -> Self {
        StackedMats(self.0.into_iter().map(|a| a * s).collect())
    }
}

impl Clone for StackedMats {
    fn clone(&self) -> Self {
        StackedMats(self.0.clone())
    }
}

/// Cross product of a 3-dimensional chart metric: `<x ^ y, w> = vol(x, y, w)`.
pub fn metric_cross3(g: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let det = g.determinant();
    let cov = det.sqrt() * euclid_cross3(x, y);
    g.clone()
        .try_inverse()
        .expect("metric must be invertible")
        * cov
}

pub fn euclid_cross3(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    DVector::from_column_slice(&[
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ])
}

/// Generalized cross product of `d-1` vectors in `R^d`: the unique vector
/// with `<u, v> = det[u; w_1; ...; w_{d-1}]`.
pub fn generalized_cross(w: &[DVector<f64>]) -> DVector<f64> {
    let d = w.len() + 1;
    for v in w {
        assert_eq!(v.len(), d);
    }
    let mut out = DVector::zeros(d);
    for l in 0..d {
        let mut minor = DMatrix::zeros(d - 1, d - 1);
        for (r, v) in w.iter().enumerate() {
            let mut cc = 0;
            for c in 0..d {
                if c == l {
                    continue;
                }
                minor[(r, cc)] = v[c];
                cc += 1;
            }
        }
        out[l] = if l % 2 == 0 { 1.0 } else { -1.0 } * minor.determinant();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point<R: Rng>(space: &BcvSpace, rng: &mut R) -> Point {
        loop {
            let p = Point::new(&[
                rng.gen_range(-0.6..0.6),
                rng.gen_range(-0.6..0.6),
                rng.gen_range(-0.6..0.6),
            ]);
            if space.lambda(&p) > 0.3 {
                return p;
            }
        }
    }

    fn random_params<R: Rng>(rng: &mut R) -> (f64, f64) {
        loop {
            let a: f64 = rng.gen_range(-0.5..1.5);
            let b: f64 = rng.gen_range(-1.5..1.5);
            if (4.0 * a - b * b).abs() > 0.1 {
                return (a, b);
            }
        }
    }

    #[test]
    fn metric_values() {
        let s = BcvSpace::new(1.0, 2.0);
        let g = s.metric(&Point::new(&[0.0, 0.0, 0.0])).unwrap();
        assert!((g - DMatrix::identity(3, 3)).norm() < 1e-14);

        let g = s.metric(&Point::new(&[1.0, 0.0, 0.0])).unwrap();
        assert!((g[(0, 0)] - 0.25).abs() < 1e-14);
        assert!((g[(1, 1)] - 0.5).abs() < 1e-14);
        assert!((g[(2, 2)] - 1.0).abs() < 1e-14);
        assert!((g[(1, 2)] + 0.5).abs() < 1e-14);
        assert!(g[(0, 1)].abs() < 1e-14 && g[(0, 2)].abs() < 1e-14);

        let flat = BcvSpace::new(0.0, 0.0);
        let g = flat.metric(&Point::new(&[0.3, -0.8, 2.0])).unwrap();
        assert!((g - DMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn metric_rejects_chart_boundary() {
        let s = BcvSpace::new(-1.0, 0.0);
        assert!(matches!(
            s.metric(&Point::new(&[1.0, 0.0, 0.0])),
            Err(GeomError::OutsideChart { .. })
        ));
    }

    #[test]
    fn frame_values_and_orthonormality() {
        let s = BcvSpace::new(1.0, 2.0);
        let f = s.frame(&Point::new(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(f.e1.components.as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(f.e2.components.as_slice(), &[0.0, 1.0, 0.0]);
        assert_eq!(f.e3.components.as_slice(), &[0.0, 0.0, 1.0]);

        let p = Point::new(&[1.0, 0.0, 0.0]);
        let f = s.frame(&p).unwrap();
        assert_eq!(f.e1.components.as_slice(), &[2.0, 0.0, 0.0]);
        assert_eq!(f.e2.components.as_slice(), &[0.0, 2.0, 1.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (a, b) = (rng.gen_range(-0.5..1.5), rng.gen_range(-2.0..2.0));
            let s = BcvSpace::new(a, b);
            let p = random_point(&s, &mut rng);
            let g = s.metric(&p).unwrap();
            let f = s.frame(&p).unwrap();
            let e = [f.e1.components, f.e2.components, f.e3.components];
            for i in 0..3 {
                for j in 0..3 {
                    let v = (&g * &e[j]).dot(&e[i]);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((v - expected).abs() < 1e-12, "Gram({i},{j}) = {v}");
                }
            }
        }
    }

    #[test]
    fn connection_table_entries() {
        let s = BcvSpace::new(1.3, 0.7);
        let p = Point::new(&[0.2, -0.4, 0.1]);
        let f = s.frame(&p).unwrap();

        let v = s.connection_frame(&p, 3, 3).unwrap();
        assert!(v.components.norm() < 1e-14);

        let v = s.connection_frame(&p, 1, 3).unwrap();
        let expected = -0.5 * 0.7 * &f.e2.components;
        assert!((v.components - expected).norm() < 1e-14);

        let s = BcvSpace::new(1.0, 0.0);
        let p = Point::new(&[0.0, 1.0, 0.0]);
        let f = s.frame(&p).unwrap();
        let v = s.connection_frame(&p, 1, 1).unwrap();
        assert!((v.components - 2.0 * &f.e2.components).norm() < 1e-14);
    }

    #[test]
    fn christoffels_match_connection_table() {
        // reconstruct nabla_{E_i} E_j = dE_j(E_i) + Gamma(E_i, E_j) from the
        // finite-difference Christoffels and compare with the closed table
        let s = BcvSpace::new(1.0, 2.0);
        let p = Point::new(&[1.0, 0.0, 0.0]);
        let gamma = s.christoffels(&p).unwrap();
        let frame_at = |c: &[f64], j: usize| -> DVector<f64> {
            let f = s
                .frame(&Point::new(c))
                .expect("inside chart");
            match j {
                1 => f.e1.components,
                2 => f.e2.components,
                _ => f.e3.components,
            }
        };
        let cfg = FdConfig::default();
        let c: Vec<f64> = p.coords.iter().copied().collect();
        for i in 1..=3 {
            for j in 1..=3 {
                let ei = frame_at(&c, i);
                let mut dej = DVector::zeros(3);
                for k in 0..3 {
                    dej += ei[k] * fd::partial(|q: &[f64]| frame_at(q, j), &c, k, &cfg);
                }
                let rebuilt = dej + contract_christoffel(&gamma, &ei, &frame_at(&c, j));
                let table = s.connection_frame(&p, i, j).unwrap().components;
                assert!(
                    (rebuilt - table).norm() < 1e-6,
                    "connection mismatch at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn flat_christoffels_vanish_and_are_symmetric() {
        let flat = BcvSpace::new(0.0, 0.0);
        let gamma = flat
            .christoffels(&Point::new(&[0.4, -0.2, 1.0]))
            .unwrap();
        for m in &gamma {
            assert!(m.norm() < 1e-10);
        }
        let s = BcvSpace::new(0.8, -1.1);
        let gamma = s.christoffels(&Point::new(&[0.3, 0.2, 0.0])).unwrap();
        for m in &gamma {
            assert!((m - m.transpose()).norm() == 0.0, "torsion symmetry");
        }
    }

    #[test]
    fn space_form_curvature_closed_form() {
        let amb = Ambient::space_form(3, 1.0);
        let p = Point::new(&[1.0, 0.0, 0.0, 0.0]);
        let x = DVector::from_column_slice(&[0.0, 1.0, 0.0, 0.0]);
        let y = DVector::from_column_slice(&[0.0, 0.0, 1.0, 0.0]);
        let r = amb.curvature(&p, &x, &y, &y).unwrap();
        assert!((r - &x).norm() < 1e-14);
        assert!((amb.sectional(&p, &x, &y).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bcv_frame_curvature_components() {
        let amb = Ambient::bcv(1.0, 1.0);
        let s = BcvSpace::new(1.0, 1.0);
        let p = Point::new(&[0.2, -0.1, 0.3]);
        let f = s.frame(&p).unwrap();
        let e = [f.e1.components, f.e2.components, f.e3.components];

        let r = amb.curvature(&p, &e[0], &e[1], &e[1]).unwrap();
        assert!((amb.inner(&p, &r, &e[0]) - 3.25).abs() < 1e-6, "R_1212");
        let r = amb.curvature(&p, &e[0], &e[2], &e[2]).unwrap();
        assert!((amb.inner(&p, &r, &e[0]) - 0.25).abs() < 1e-6, "R_1313");
        let r = amb.curvature(&p, &e[1], &e[2], &e[2]).unwrap();
        assert!((amb.inner(&p, &r, &e[1]) - 0.25).abs() < 1e-6, "R_2323");
    }

    #[test]
    fn ricci_frame_values() {
        let amb = Ambient::bcv(1.0, 2.0);
        let s = BcvSpace::new(1.0, 2.0);
        let p = Point::new(&[0.1, 0.2, -0.3]);
        let f = s.frame(&p).unwrap();
        let ric = amb
            .ricci(&p, &f.e3.components, &f.e3.components)
            .unwrap();
        assert!((ric - 2.0).abs() < 1e-6, "Ric(E3,E3) = b^2/2");

        let amb = Ambient::bcv(1.0, 0.0);
        let s = BcvSpace::new(1.0, 0.0);
        let f = s.frame(&p).unwrap();
        let ric = amb
            .ricci(&p, &f.e1.components, &f.e1.components)
            .unwrap();
        assert!((ric - 4.0).abs() < 1e-6, "Ric(E1,E1) = 4a - b^2/2");
    }

    #[test]
    fn curvature_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let (a, b) = random_params(&mut rng);
            let amb = Ambient::bcv(a, b);
            let s = BcvSpace::new(a, b);
            let p = random_point(&s, &mut rng);
            let v = |rng: &mut ChaCha8Rng| {
                DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0f64))
            };
            let (x, y, z, w) = (v(&mut rng), v(&mut rng), v(&mut rng), v(&mut rng));
            let rxyz = amb.curvature(&p, &x, &y, &z).unwrap();
            let ryxz = amb.curvature(&p, &y, &x, &z).unwrap();
            let rzwx = amb.curvature(&p, &z, &w, &x).unwrap();
            let s1 = amb.inner(&p, &rxyz, &w);
            assert!((s1 + amb.inner(&p, &ryxz, &w)).abs() < 1e-5, "antisymmetry");
            assert!((s1 - amb.inner(&p, &rzwx, &y)).abs() < 1e-5, "pair symmetry");
        }
    }

    #[test]
    fn metric_compatibility_along_curve() {
        // d/ds <V, W> = <nabla V, W> + <V, nabla W> along a chart line
        let amb = Ambient::bcv(0.7, -0.9);
        let dir = DVector::from_column_slice(&[0.4, 0.3, -0.2]);
        let base = DVector::from_column_slice(&[0.1, -0.2, 0.3]);
        let v_field = |s: f64| DVector::from_column_slice(&[s.sin(), 1.0, s * s]);
        let w_field = |s: f64| DVector::from_column_slice(&[0.5, s.cos(), -s]);
        let at = |s: f64| Point {
            coords: &base + s * &dir,
        };
        let s0 = 0.2;
        let p = at(s0);
        let lhs = fd::deriv(
            |s| {
                let p = at(s);
                amb.inner(&p, &v_field(s), &w_field(s))
            },
            s0,
            &FdConfig::default(),
        );
        let cov = |f: &dyn Fn(f64) -> DVector<f64>| {
            fd::deriv(f, s0, &FdConfig::default())
                + amb
                    .connection_correction(&p, &dir, &f(s0))
                    .unwrap()
        };
        let rhs = amb.inner(&p, &cov(&v_field), &w_field(s0))
            + amb.inner(&p, &v_field(s0), &cov(&w_field));
        assert!((lhs - rhs).abs() < 1e-5);
    }

    #[test]
    fn space_form_degeneration() {
        // 4a = b^2: constant sectional curvature b^2/4
        let amb = Ambient::bcv(1.0, 2.0);
        let s = BcvSpace::new(1.0, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 40 {
            let p = random_point(&s, &mut rng);
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0f64));
            let y = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0f64));
            let Ok(k) = amb.sectional(&p, &x, &y) else {
                continue;
            };
            assert!((k - 1.0).abs() < 1e-6, "K = {k}");
            checked += 1;
        }
    }

    #[test]
    fn killing_basis_values() {
        let s = BcvSpace::new(1.0, 1.0);
        let origin = Point::new(&[0.0, 0.0, 0.0]);
        let f = s.frame(&origin).unwrap();
        let basis = s.killing_basis(&origin).unwrap();
        assert!((basis[0].components.clone() - f.e1.components).norm() < 1e-14);
        assert!((basis[1].components.clone() - f.e2.components).norm() < 1e-14);
        assert!(basis[2].components.norm() < 1e-14);
        assert!((basis[3].components.clone() - f.e3.components).norm() < 1e-14);

        // X4 = E3 everywhere
        let p = Point::new(&[0.4, -0.3, 0.2]);
        let basis = s.killing_basis(&p).unwrap();
        assert_eq!(basis[3].components.as_slice(), &[0.0, 0.0, 1.0]);

        let s = BcvSpace::new(1.0, 0.0);
        let p = Point::new(&[1.0, 0.0, 0.0]);
        let f = s.frame(&p).unwrap();
        let basis = s.killing_basis(&p).unwrap();
        assert!(
            (basis[2].components.clone() - 0.5 * f.e2.components).norm() < 1e-14,
            "X3 = (1/2) E2 at (1,0,0) for a=1, b=0"
        );
    }

    #[test]
    fn killing_basis_rejects_space_forms() {
        let s = BcvSpace::new(1.0, 2.0);
        assert!(matches!(
            s.killing_basis(&Point::new(&[0.0, 0.0, 0.0])),
            Err(GeomError::Parameter(_))
        ));
    }

    #[test]
    fn killing_fields_have_vanishing_lie_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..3 {
            let (a, b) = random_params(&mut rng);
            let s = BcvSpace::new(a, b);
            for _ in 0..4 {
                let p = random_point(&s, &mut rng);
                for k in 0..4 {
                    let res = s
                        .lie_derivative_residual(&p, |q| {
                            s.killing_basis(q).expect("flow stays inside")[k]
                                .components
                                .clone()
                        })
                        .unwrap();
                    assert!(res < 1e-5, "Lie residual {res} for X{}", k + 1);
                }
            }
        }
    }

    #[test]
    fn non_killing_field_fails_the_residual() {
        let s = BcvSpace::new(1.0, 0.0);
        let p = Point::new(&[0.3, 0.1, 0.0]);
        let res = s
            .lie_derivative_residual(&p, |q| {
                DVector::from_column_slice(&[q.coords[0], 0.0, 0.0])
            })
            .unwrap();
        assert!(res > 1e-2, "x d/dx is not Killing, residual {res}");
    }

    #[test]
    fn classification() {
        assert_eq!(classify_bcv(0.0, 1.0), BcvClass::Heisenberg);
        assert_eq!(classify_bcv(1.0, 0.0), BcvClass::S2xR);
        assert_eq!(classify_bcv(-1.0, 0.0), BcvClass::H2xR);
        assert_eq!(classify_bcv(1.0, 2.0), BcvClass::SpaceForm);
        assert_eq!(classify_bcv(0.0, 0.0), BcvClass::SpaceForm);
        assert_eq!(classify_bcv(1.0, 1.0), BcvClass::Su2);
        assert_eq!(classify_bcv(-1.0, 1.0), BcvClass::Sl2R);
    }

    #[test]
    fn generalized_cross_matches_euclidean() {
        let x = DVector::from_column_slice(&[1.0, 2.0, -1.0]);
        let y = DVector::from_column_slice(&[0.0, 1.0, 3.0]);
        let g = generalized_cross(&[x.clone(), y.clone()]);
        assert!((g - euclid_cross3(&x, &y)).norm() < 1e-14);
    }

    #[test]
    fn metric_cross_is_metric_orthogonal() {
        let s = BcvSpace::new(0.9, 1.3);
        let p = Point::new(&[0.2, 0.4, -0.1]);
        let g = s.metric(&p).unwrap();
        let x = DVector::from_column_slice(&[1.0, 0.5, -0.2]);
        let y = DVector::from_column_slice(&[-0.3, 1.0, 0.7]);
        let c = metric_cross3(&g, &x, &y);
        assert!((&g * &c).dot(&x).abs() < 1e-12);
        assert!((&g * &c).dot(&y).abs() < 1e-12);
    }
}
