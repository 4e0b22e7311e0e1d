//! Fourier-symbol Stokes boundary correctors on the half-lines `y > 0` and
//! `y < 1`, and numerical checks of the multiplier bounds they satisfy.
//!
//! Everything here lives at symbol level: `zeta` is a free time frequency,
//! `k` a tangential wavenumber, and `h_hat` the Neumann datum at the wall.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ans::InfluenceOperator;
use crate::error::{Error, Result};
use crate::gevrey::bracket_pow;
use crate::linalg::Lu;
use crate::scalar::{japanese_bracket, Cx, Real};
use crate::spectral::elliptic::DirichletSolver;
use crate::spectral::Grid;

/// Below this `|gamma - eps|k||` the profile switches to its Taylor series.
pub const SERIES_SWITCH: f64 = 1e-8;
/// Half-line quadratures stop at `rate * y = QUADRATURE_CUTOFF`.
pub const QUADRATURE_CUTOFF: f64 = 40.0;
/// Relative change under quadrature refinement above which a report is flagged.
pub const REFINEMENT_TOLERANCE: f64 = 0.05;
/// Exponent `N` of the super-polynomial trace decay check.
pub const TRACE_DECAY_ORDER: u32 = 4;

/// Principal root of `A + i zeta` for `A > 0`.
fn principal_root<T: Real>(a: T, zeta: T) -> (Cx<T>, T, T) {
    let modulus = a.hypot(zeta);
    let re2 = (modulus + a) / T::lit(2.0);
    let re = re2.sqrt();
    (Cx::new(re, zeta / (re + re)), re2, modulus)
}

/// `gamma = sqrt(eps^2 k^2 + lambda <k>^{2/3} + i zeta)` with `Re(gamma) > 0`.
pub fn gamma_symbol<T: Real>(zeta: T, k: i64, eps: T, lambda: T) -> Cx<T> {
    let (ek2, stokes2) = radicand_parts(k, eps, lambda);
    principal_root(ek2 + stokes2, zeta).0
}

fn radicand_parts<T: Real>(k: i64, eps: T, lambda: T) -> (T, T) {
    let ek = eps * T::from_i64(k.abs()).expect("wavenumber representable");
    (ek * ek, lambda * bracket_pow::<T>(k))
}

/// One point `(zeta, k, eps, lambda)` of symbol space with its root `gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectorSymbol<T> {
    pub zeta: T,
    pub k: i64,
    pub eps: T,
    pub lambda: T,
    gamma: Cx<T>,
    ek2: T,
    stokes2: T,
    re2: T,
    modulus: T,
}

/// Outcome of the chain `max(eps|k|, lambda^{1/2}<k>^{1/3}) <= Re(gamma) <= |gamma| <= 2 Re(gamma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainCheck<T> {
    pub lower: bool,
    pub middle: bool,
    pub upper: bool,
    /// `|gamma| / Re(gamma)`.
    pub upper_ratio: T,
}

impl<T> ChainCheck<T> {
    pub fn holds(&self) -> bool {
        self.lower && self.middle && self.upper
    }
}

impl<T: Real> CorrectorSymbol<T> {
    pub fn new(zeta: T, k: i64, eps: T, lambda: T) -> Result<Self> {
        if !(lambda >= T::one()) || !lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be >= 1, got {lambda}")));
        }
        if !(eps > T::zero() && eps <= T::one()) {
            return Err(Error::Config(format!("eps must lie in (0, 1], got {eps}")));
        }
        if !zeta.is_finite() {
            return Err(Error::Config(format!("zeta must be finite, got {zeta}")));
        }
        let (ek2, stokes2) = radicand_parts(k, eps, lambda);
        let (gamma, re2, modulus) = principal_root(ek2 + stokes2, zeta);
        Ok(Self {
            zeta,
            k,
            eps,
            lambda,
            gamma,
            ek2,
            stokes2,
            re2,
            modulus,
        })
    }

    pub fn gamma(&self) -> Cx<T> {
        self.gamma
    }

    /// `eps |k|`.
    pub fn eps_k(&self) -> T {
        self.ek2.sqrt()
    }

    /// `lambda^{1/2} <k>^{1/3}`.
    pub fn stokes_rate(&self) -> T {
        self.stokes2.sqrt()
    }

    /// `gamma - eps|k|`.
    pub fn gap(&self) -> Cx<T> {
        self.gamma - self.eps_k()
    }

    /// The chain compared on squares, which rounding cannot reorder.
    pub fn chain(&self) -> ChainCheck<T> {
        ChainCheck {
            lower: self.ek2 <= self.re2 && self.stokes2 <= self.re2,
            middle: self.re2 <= self.modulus,
            upper: self.modulus <= T::lit(4.0) * self.re2,
            upper_ratio: (self.modulus / self.re2).sqrt(),
        }
    }
}

/// Wall a corrector is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `y = 0`, profile on `y >= 0`.
    Bottom,
    /// `y = 1`, profile on `y <= 1`.
    Top,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Bottom, Side::Top];

    /// Distance to the wall, `y` or `1 - y`.
    pub fn distance<T: Real>(self, y: T) -> T {
        match self {
            Side::Bottom => y,
            Side::Top => T::one() - y,
        }
    }

    fn direction<T: Real>(self) -> T {
        match self {
            Side::Bottom => T::one(),
            Side::Top => -T::one(),
        }
    }
}

/// Sign of the bottom corrector.
///
/// `Profile` keeps `-(e^{-gamma y} - e^{-eps|k| y}) / (gamma - eps|k|) h`, which has
/// `d_y phi(0) = +h`. `Identities` negates it so that `d_y phi(0) = -h` and
/// `Delta_eps phi = +(gamma + eps|k|) e^{-gamma y} h`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignConvention {
    #[default]
    Profile,
    Identities,
}

fn side_sign<T: Real>(side: Side, conv: SignConvention) -> T {
    match (side, conv) {
        (Side::Bottom, SignConvention::Profile) => T::one(),
        (Side::Bottom, SignConvention::Identities) => -T::one(),
        (Side::Top, _) => -T::one(),
    }
}

/// `e^z - 1` without cancellation for small `|z|`.
pub fn cexpm1<T: Real>(z: Cx<T>) -> Cx<T> {
    let half = (z.im / T::lit(2.0)).sin();
    Cx::new(
        z.re.exp_m1() * z.im.cos() - T::lit(2.0) * half * half,
        z.re.exp() * z.im.sin(),
    )
}

/// `e^{-a s} (1 - e^{-g s}) / g`, switching to the series below [`SERIES_SWITCH`].
pub fn profile_factor<T: Real>(g: Cx<T>, a: T, s: T) -> Cx<T> {
    if g.norm() < T::lit(SERIES_SWITCH) {
        profile_factor_series(g, a, s)
    } else {
        -cexpm1(-g * s) / g * (-a * s).exp()
    }
}

/// Taylor branch of [`profile_factor`], accurate while `|g s|` is small.
pub fn profile_factor_series<T: Real>(g: Cx<T>, a: T, s: T) -> Cx<T> {
    let z = g * s;
    let one = Cx::new(T::one(), T::zero());
    let poly = one - z / T::lit(2.0) + z * z / T::lit(6.0) - z * z * z / T::lit(24.0);
    poly * (s * (-a * s).exp())
}

/// Corrector streamfunction `phi^i(y)` for Neumann datum `h_hat`.
pub fn corrector_profile<T: Real>(
    side: Side,
    sym: &CorrectorSymbol<T>,
    h_hat: Cx<T>,
    y: T,
    conv: SignConvention,
) -> Cx<T> {
    let s = side.distance(y);
    profile_factor(sym.gap(), sym.eps_k(), s) * h_hat * side_sign::<T>(side, conv)
}

/// `(d_y^2 - eps^2 k^2) phi^i`, in closed form.
pub fn corrector_vorticity<T: Real>(
    side: Side,
    sym: &CorrectorSymbol<T>,
    h_hat: Cx<T>,
    y: T,
    conv: SignConvention,
) -> Cx<T> {
    let s = side.distance(y);
    let g = sym.gamma();
    -(g + sym.eps_k()) * (-g * s).exp() * h_hat * side_sign::<T>(side, conv)
}

/// `d_y` of [`corrector_vorticity`].
pub fn corrector_vorticity_dy<T: Real>(
    side: Side,
    sym: &CorrectorSymbol<T>,
    h_hat: Cx<T>,
    y: T,
    conv: SignConvention,
) -> Cx<T> {
    let s = side.distance(y);
    let g = sym.gamma();
    g * (g + sym.eps_k()) * (-g * s).exp() * h_hat * (side_sign::<T>(side, conv) * side.direction::<T>())
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes by Newton iteration on `P_n`, carried out in `f64`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("Gauss-Legendre rule needs at least one node".into()));
        }
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                if n == 1 {
                    p0 = 1.0;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(T::lit(x));
            weights.push(T::lit(2.0 / ((1.0 - x * x) * dp * dp)));
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: &impl Fn(T) -> T, a: T, b: T) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| *w * f(mid + half * *x))
            .sum::<T>()
            * half
    }
}

/// Composite Gauss-Legendre quadrature for decaying integrands.
#[derive(Clone, Debug)]
pub struct Quadrature<T> {
    rule: GaussLegendre<T>,
    panels: usize,
}

impl<T: Real> Quadrature<T> {
    pub fn new(nodes: usize, panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::Config("quadrature needs at least one panel".into()));
        }
        Ok(Self {
            rule: GaussLegendre::new(nodes)?,
            panels,
        })
    }

    /// Default rule: 32 nodes on 8 panels per scale.
    pub fn standard() -> Self {
        Self::new(32, 8).expect("valid rule")
    }

    /// Twice the nodes and twice the panels.
    pub fn refined(&self) -> Self {
        Self::new(2 * self.rule.len(), 2 * self.panels).expect("valid rule")
    }

    fn composite(&self, f: &impl Fn(T) -> T, a: T, b: T) -> T {
        let h = (b - a) / T::from_index(self.panels);
        (0..self.panels)
            .map(|p| {
                let lo = a + h * T::from_index(p);
                self.rule.integrate(f, lo, lo + h)
            })
            .sum()
    }

    /// `int_0^inf f`, for `f` decaying like `e^{-2 r y}` with the slowest
    /// positive rate among `rates`. Each rate `r` contributes a breakpoint at
    /// `QUADRATURE_CUTOFF / r`.
    pub fn half_line(&self, f: &impl Fn(T) -> T, rates: &[T]) -> T {
        let mut ends: Vec<T> = rates
            .iter()
            .filter(|r| **r > T::zero())
            .map(|r| T::lit(QUADRATURE_CUTOFF) / *r)
            .collect();
        ends.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        let mut lo = T::zero();
        let mut total = T::zero();
        for hi in ends {
            if hi > lo {
                total = total + self.composite(f, lo, hi);
                lo = hi;
            }
        }
        total
    }

    /// `int_0^1 f`, with a breakpoint at the boundary-layer edge `QUADRATURE_CUTOFF / rate`.
    pub fn unit_interval(&self, f: &impl Fn(T) -> T, rate: T) -> T {
        let edge = T::lit(QUADRATURE_CUTOFF) / rate;
        if rate > T::zero() && edge < T::one() {
            self.composite(f, T::zero(), edge) + self.composite(f, edge, T::one())
        } else {
            self.composite(f, T::zero(), T::one())
        }
    }
}

/// Symbol-level quantities whose size is bounded by a power of
/// `lambda^{1/2} <k>^{1/3}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Multiplier {
    /// `||e^{-Re(gamma) y}||_{L^2(0, inf)}`.
    HalflineDecay,
    /// `||eps|k| e^{-eps|k| y} (1 - e^{-(gamma - eps|k|) y}) / (gamma - eps|k|)||_{L^2(0, inf)}`.
    HalflineEpsK,
    /// `||e^{-eps|k| y} (1 - e^{-(gamma - eps|k|) y}) / (gamma - eps|k|)||_{L^2(0, 1)}`.
    UnitInterval,
    /// `||y^{1+m} |gamma| e^{-Re(gamma) y}||_{L^2(0, inf)}`.
    WeightedDecay { m: f64 },
    /// `||(phi^i)^{1+theta'} omega^i||_{L^2(I_i)}`, both sides.
    WeightedVorticity { theta_p: f64 },
    /// `||(phi^i)^{2+theta'} (d_y, eps|k|) omega^i||_{L^2(I_i)}`, both sides.
    WeightedVorticityGradient { theta_p: f64 },
    /// `<k>^{theta/3 - 1/3} |k| ||(phi^i)^{theta+3/2} omega^i||`.
    TransportX { theta: f64 },
    /// `<k>^{theta/3 - 1/3} ||(phi^i)^{theta+3/2} d_y omega^i||`.
    TransportY { theta: f64 },
    /// `(eps|k|)^M |e^{-eps|k|} (e^{-(gamma - eps|k|)} - 1) / (gamma - eps|k|)|`.
    TraceValue { m: u32 },
    /// `e^{-Re(gamma)} (eps|k|)^M`.
    TraceDerivative { m: u32 },
}

impl Multiplier {
    pub fn id(&self) -> String {
        match self {
            Multiplier::HalflineDecay => "halfline_decay".into(),
            Multiplier::HalflineEpsK => "halfline_eps_k".into(),
            Multiplier::UnitInterval => "unit_interval".into(),
            Multiplier::WeightedDecay { m } => format!("weighted_decay[m={m}]"),
            Multiplier::WeightedVorticity { theta_p } => format!("weighted_vorticity[theta'={theta_p}]"),
            Multiplier::WeightedVorticityGradient { theta_p } => {
                format!("weighted_vorticity_gradient[theta'={theta_p}]")
            }
            Multiplier::TransportX { theta } => format!("transport_x[theta={theta}]"),
            Multiplier::TransportY { theta } => format!("transport_y[theta={theta}]"),
            Multiplier::TraceValue { m } => format!("trace_value[M={m}]"),
            Multiplier::TraceDerivative { m } => format!("trace_derivative[M={m}]"),
        }
    }

    /// Whether [`Multiplier::value`] uses quadrature.
    pub fn uses_quadrature(&self) -> bool {
        !matches!(self, Multiplier::TraceValue { .. } | Multiplier::TraceDerivative { .. })
    }

    /// Exponents of `(lambda, <k>)` in the bounding rate.
    pub fn rate_exponents(&self) -> (f64, f64) {
        let stokes = |p: f64| (-p / 2.0, -p / 3.0);
        match *self {
            Multiplier::HalflineDecay | Multiplier::HalflineEpsK => stokes(0.5),
            Multiplier::UnitInterval | Multiplier::TraceValue { .. } => stokes(1.0),
            Multiplier::WeightedDecay { m } => stokes(m + 0.5),
            Multiplier::WeightedVorticity { theta_p } | Multiplier::WeightedVorticityGradient { theta_p } => {
                stokes(theta_p + 0.5)
            }
            Multiplier::TransportX { theta } => (-(theta + 1.0) / 2.0, 1.0 / 3.0),
            Multiplier::TransportY { theta } => (-theta / 2.0, -1.0 / 3.0),
            Multiplier::TraceDerivative { .. } => {
                let n = f64::from(TRACE_DECAY_ORDER);
                (-n / 2.0, -n / 3.0)
            }
        }
    }

    /// `lambda^a <k>^b` with `(a, b)` from [`Multiplier::rate_exponents`].
    pub fn rate<T: Real>(&self, sym: &CorrectorSymbol<T>) -> T {
        let (a, b) = self.rate_exponents();
        let bk = japanese_bracket(T::from_i64(sym.k).expect("wavenumber representable"));
        sym.lambda.powf(T::lit(a)) * bk.powf(T::lit(b))
    }

    /// The quantity itself, for unit datum `h_hat = 1`.
    pub fn value<T: Real>(&self, sym: &CorrectorSymbol<T>, q: &Quadrature<T>) -> T {
        let g = sym.gamma();
        let re = g.re;
        let a = sym.eps_k();
        let gap = sym.gap();
        let one = Cx::new(T::one(), T::zero());
        let two = T::lit(2.0);
        let bk = japanese_bracket(T::from_i64(sym.k).expect("wavenumber representable"));
        let kabs = T::from_i64(sym.k.abs()).expect("wavenumber representable");
        let both_sides = |p: T, f: &dyn Fn(Side, T) -> T| -> T {
            Side::BOTH
                .iter()
                .map(|&side| {
                    let y_of = |s: T| match side {
                        Side::Bottom => s,
                        Side::Top => T::one() - s,
                    };
                    q.half_line(&|s: T| s.powf(two * p) * f(side, y_of(s)), &[re]).sqrt()
                })
                .fold(T::zero(), T::max)
        };
        let conv = SignConvention::Profile;
        let vort = |side: Side, y: T| corrector_vorticity(side, sym, one, y, conv).norm_sqr();
        let vort_dy = |side: Side, y: T| corrector_vorticity_dy(side, sym, one, y, conv).norm_sqr();
        match *self {
            Multiplier::HalflineDecay => q.half_line(&|s: T| (-two * re * s).exp(), &[re]).sqrt(),
            Multiplier::HalflineEpsK => {
                let f = |s: T| (profile_factor(gap, a, s) * a).norm_sqr();
                q.half_line(&f, &[re, a]).sqrt()
            }
            Multiplier::UnitInterval => {
                let f = |s: T| profile_factor(gap, a, s).norm_sqr();
                q.unit_interval(&f, re).sqrt()
            }
            Multiplier::WeightedDecay { m } => {
                let p = T::one() + T::lit(m);
                let gn = g.norm();
                q.half_line(&|s: T| (s.powf(p) * gn).powi(2) * (-two * re * s).exp(), &[re])
                    .sqrt()
            }
            Multiplier::WeightedVorticity { theta_p } => both_sides(T::one() + T::lit(theta_p), &vort),
            Multiplier::WeightedVorticityGradient { theta_p } => {
                let f = |side: Side, y: T| vort_dy(side, y) + a * a * vort(side, y);
                both_sides(two + T::lit(theta_p), &f)
            }
            Multiplier::TransportX { theta } => {
                let w = bk.powf(T::lit((theta - 1.0) / 3.0)) * kabs;
                w * both_sides(T::lit(theta + 1.5), &vort)
            }
            Multiplier::TransportY { theta } => {
                let w = bk.powf(T::lit((theta - 1.0) / 3.0));
                w * both_sides(T::lit(theta + 1.5), &vort_dy)
            }
            Multiplier::TraceValue { m } => a.powi(m as i32) * (profile_factor(gap, a, T::one())).norm(),
            Multiplier::TraceDerivative { m } => (-re).exp() * a.powi(m as i32),
        }
    }

    /// `value / rate`.
    pub fn ratio<T: Real>(&self, sym: &CorrectorSymbol<T>, q: &Quadrature<T>) -> T {
        self.value(sym, q) / self.rate(sym)
    }
}

/// Sups measured on [`SymbolGrid::reference`] with [`Quadrature::standard`].
#[allow(clippy::approx_constant)]
const MEASURED: &[(&str, f64)] = &[
    ("halfline_decay", 0.7072),
    ("halfline_eps_k", 0.3875),
    ("unit_interval", 0.9550),
    ("weighted_decay[m=-0.5]", 0.7071),
    ("weighted_decay[m=0]", 0.5215),
    ("weighted_decay[m=0.5]", 0.6124),
    ("weighted_decay[m=1]", 0.8661),
    ("weighted_decay[m=2]", 2.372),
    ("weighted_vorticity[theta'=-0.5]", 0.9994),
    ("weighted_vorticity[theta'=0]", 0.7190),
    ("weighted_vorticity[theta'=0.5]", 0.7953),
    ("weighted_vorticity[theta'=1]", 1.064),
    ("weighted_vorticity[theta'=2]", 2.742),
    ("weighted_vorticity_gradient[theta'=-0.5]", 1.730),
    ("weighted_vorticity_gradient[theta'=0]", 1.547),
    ("weighted_vorticity_gradient[theta'=0.5]", 2.049),
    ("weighted_vorticity_gradient[theta'=1]", 3.208),
    ("weighted_vorticity_gradient[theta'=2]", 10.79),
    ("transport_x[theta=0]", 0.7952),
    ("transport_x[theta=1]", 1.622),
    ("transport_x[theta=2]", 5.035),
    ("transport_y[theta=0]", 1.401),
    ("transport_y[theta=1]", 1.781),
    ("transport_y[theta=2]", 5.257),
    ("trace_value[M=0]", 0.9997),
    ("trace_value[M=1]", 0.4648),
    ("trace_value[M=2]", 0.8268),
    ("trace_derivative[M=0]", 4.689),
    ("trace_derivative[M=1]", 5.816),
    ("trace_derivative[M=2]", 16.86),
];

/// Frozen constant budget: four times the reference sup.
pub fn budget(m: &Multiplier) -> Result<f64> {
    let id = m.id();
    MEASURED
        .iter()
        .find(|(name, _)| *name == id)
        .map(|(_, c)| 4.0 * c)
        .ok_or_else(|| Error::Config(format!("no frozen budget for {id}")))
}

/// Sample points of symbol space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolGrid {
    pub zeta: Vec<f64>,
    pub k: Vec<i64>,
    pub lambda: Vec<f64>,
    pub eps: Vec<f64>,
}

/// Extent of a [`SymbolGrid`], as recorded in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub zeta_max: f64,
    pub k_max: i64,
    pub lambda: Vec<f64>,
    pub eps: Vec<f64>,
    pub points: usize,
}

const LAMBDAS: [f64; 4] = [1.0, 4.0, 16.0, 64.0];
const EPSILONS: [f64; 7] = [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 0.5];

impl SymbolGrid {
    /// `zeta in {0, +-1, +-10, ..., +-1e4}`, `k in {0, +-1, +-2, +-4, ..., +-256}`.
    pub fn reference() -> Self {
        let mut zeta = vec![0.0];
        for p in 0..=4 {
            let z = 10f64.powi(p);
            zeta.extend([z, -z]);
        }
        let mut k = vec![0];
        for p in 0..=8 {
            k.extend([1i64 << p, -(1i64 << p)]);
        }
        Self {
            zeta,
            k,
            lambda: LAMBDAS.to_vec(),
            eps: EPSILONS.to_vec(),
        }
    }

    /// Every `|k| <= 256` and 401 log-spaced `|zeta| <= 1e4`.
    pub fn dense() -> Self {
        let mut zeta = vec![0.0];
        for i in 0..200 {
            let z = 10f64.powf(-3.0 + 7.0 * i as f64 / 199.0);
            zeta.extend([z, -z]);
        }
        Self {
            zeta,
            k: (-256..=256).collect(),
            lambda: LAMBDAS.to_vec(),
            eps: EPSILONS.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.zeta.is_empty() || self.k.is_empty() || self.lambda.is_empty() || self.eps.is_empty() {
            return Err(Error::Config("symbol grid has an empty axis".into()));
        }
        Ok(())
    }

    pub fn summary(&self) -> GridSummary {
        GridSummary {
            zeta_max: self.zeta.iter().fold(0.0, |m, z| m.max(z.abs())),
            k_max: self.k.iter().map(|k| k.abs()).max().unwrap_or(0),
            lambda: self.lambda.clone(),
            eps: self.eps.clone(),
            points: self.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.zeta.len() * self.k.len() * self.lambda.len() * self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All points as symbols; invalid `lambda` or `eps` is an error.
    pub fn symbols(&self) -> Result<Vec<CorrectorSymbol<f64>>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.len());
        for &lambda in &self.lambda {
            for &eps in &self.eps {
                for &k in &self.k {
                    for &zeta in &self.zeta {
                        out.push(CorrectorSymbol::new(zeta, k, eps, lambda)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Where a sup was attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolPoint {
    pub zeta: f64,
    pub k: i64,
    pub eps: f64,
    pub lambda: f64,
}

impl From<&CorrectorSymbol<f64>> for SymbolPoint {
    fn from(s: &CorrectorSymbol<f64>) -> Self {
        Self {
            zeta: s.zeta,
            k: s.k,
            eps: s.eps,
            lambda: s.lambda,
        }
    }
}

/// Measured constant of one inequality on one grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inequality: String,
    pub grid: GridSummary,
    #[serde(rename = "measured_C")]
    pub measured_c: f64,
    #[serde(rename = "budget_C")]
    pub budget_c: f64,
    pub pass: bool,
    /// Relative change of the sup when the quadrature is refined.
    pub refinement_change: Option<f64>,
    /// False when the refinement change exceeds [`REFINEMENT_TOLERANCE`].
    pub converged: bool,
    pub worst: Option<SymbolPoint>,
    /// Points violating an exact inequality.
    pub violations: usize,
}

fn sup_ratio(m: &Multiplier, syms: &[CorrectorSymbol<f64>], q: &Quadrature<f64>) -> (f64, Option<SymbolPoint>) {
    syms.par_iter()
        .map(|s| (m.ratio(s, q), Some(SymbolPoint::from(s))))
        .reduce(
            || (f64::NEG_INFINITY, None),
            |a, b| if b.0 > a.0 || b.0.is_nan() { b } else { a },
        )
}

/// Sup of `value / rate` over `grid`, with a quadrature-refinement check.
pub fn measure(m: &Multiplier, grid: &SymbolGrid, q: &Quadrature<f64>) -> Result<BoundReport> {
    let budget_c = budget(m)?;
    let syms = grid.symbols()?;
    let (coarse, worst) = sup_ratio(m, &syms, q);
    let (measured, change) = if m.uses_quadrature() {
        let (fine, _) = sup_ratio(m, &syms, &q.refined());
        (fine, Some((fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE)))
    } else {
        (coarse, None)
    };
    let converged = change.is_none_or(|c| c < REFINEMENT_TOLERANCE);
    Ok(BoundReport {
        inequality: m.id(),
        grid: grid.summary(),
        measured_c: measured,
        budget_c,
        pass: measured.is_finite() && converged && measured <= budget_c,
        refinement_change: change,
        converged,
        worst,
        violations: 0,
    })
}

/// Exact check of the `gamma` chain; `measured_C` is the worst `|gamma| / Re(gamma)`.
pub fn verify_symbol_chain(grid: &SymbolGrid) -> Result<BoundReport> {
    let syms = grid.symbols()?;
    let (violations, worst_ratio, worst) = syms
        .par_iter()
        .map(|s| {
            let c = s.chain();
            (usize::from(!c.holds()), c.upper_ratio, Some(SymbolPoint::from(s)))
        })
        .reduce(
            || (0, f64::NEG_INFINITY, None),
            |a, b| {
                let (r, w) = if b.1 > a.1 { (b.1, b.2) } else { (a.1, a.2) };
                (a.0 + b.0, r, w)
            },
        );
    Ok(BoundReport {
        inequality: "symbol_chain".into(),
        grid: grid.summary(),
        measured_c: worst_ratio,
        budget_c: 2.0,
        pass: violations == 0 && worst_ratio <= 2.0,
        refinement_change: None,
        converged: true,
        worst,
        violations,
    })
}

/// The symbol chain and the three half-line/interval multipliers.
pub fn verify_multiplier_bounds(grid: &SymbolGrid, q: &Quadrature<f64>) -> Result<Vec<BoundReport>> {
    let mut out = vec![verify_symbol_chain(grid)?];
    for m in [
        Multiplier::HalflineDecay,
        Multiplier::HalflineEpsK,
        Multiplier::UnitInterval,
    ] {
        out.push(measure(&m, grid, q)?);
    }
    Ok(out)
}

/// Weighted vorticity bounds for each `theta'`, and the transport bounds for each `theta`.
pub fn verify_weighted_vorticity_bounds(
    theta_primes: &[f64],
    thetas: &[f64],
    grid: &SymbolGrid,
    q: &Quadrature<f64>,
) -> Result<Vec<BoundReport>> {
    if let Some(t) = theta_primes.iter().find(|t| !(-0.5..=2.0).contains(*t)) {
        return Err(Error::Config(format!("theta' must lie in [-1/2, 2], got {t}")));
    }
    if let Some(t) = thetas.iter().find(|t| !(0.0..=2.0).contains(*t)) {
        return Err(Error::Config(format!("theta must lie in [0, 2], got {t}")));
    }
    let mut ms = Vec::new();
    for &theta_p in theta_primes {
        ms.push(Multiplier::WeightedVorticity { theta_p });
        ms.push(Multiplier::WeightedVorticityGradient { theta_p });
    }
    for &theta in thetas {
        ms.push(Multiplier::TransportX { theta });
        ms.push(Multiplier::TransportY { theta });
    }
    ms.iter().map(|m| measure(m, grid, q)).collect()
}

/// Wall-trace bounds for each order `M`.
pub fn verify_trace_bounds(orders: &[u32], grid: &SymbolGrid) -> Result<Vec<BoundReport>> {
    let q = Quadrature::new(1, 1)?;
    let mut out = Vec::new();
    for &m in orders {
        out.push(measure(&Multiplier::TraceValue { m }, grid, &q)?);
        out.push(measure(&Multiplier::TraceDerivative { m }, grid, &q)?);
    }
    Ok(out)
}

/// Least-squares fit `log value = c + a log lambda + b log <k>` at `zeta = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub inequality: String,
    pub lambda_exponent: f64,
    pub k_exponent: f64,
    pub expected: (f64, f64),
    pub tolerance: f64,
    pub pass: bool,
}

/// Fits the `(lambda, <k>)` exponents of `m` over `lambda in {1, 4, 16, 64}`
/// and `k in {1, 2, 4, ..., 256}` at `zeta = 0` and the given `eps`.
pub fn scaling_fit(m: &Multiplier, eps: f64, q: &Quadrature<f64>, tolerance: f64) -> Result<ScalingFit> {
    let mut rows = Vec::new();
    for &lambda in &LAMBDAS {
        for p in 0..=8 {
            let sym = CorrectorSymbol::new(0.0, 1i64 << p, eps, lambda)?;
            let v = m.value(&sym, q);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Contract(format!(
                    "{} is not positive at {:?}",
                    m.id(),
                    SymbolPoint::from(&sym)
                )));
            }
            rows.push([1.0, lambda.ln(), japanese_bracket((1i64 << p) as f64).ln(), v.ln()]);
        }
    }
    let mut ata = ndarray::Array2::<f64>::zeros((3, 3));
    let mut atb = ndarray::Array1::<f64>::zeros(3);
    for r in &rows {
        for i in 0..3 {
            atb[i] += r[i] * r[3];
            for j in 0..3 {
                ata[[i, j]] += r[i] * r[j];
            }
        }
    }
    let coef = Lu::factor(ata)
        .ok_or_else(|| Error::Contract("degenerate scaling regression".into()))?
        .solve(atb.view());
    let expected = m.rate_exponents();
    let pass = (coef[1] - expected.0).abs() <= tolerance && (coef[2] - expected.1).abs() <= tolerance;
    Ok(ScalingFit {
        inequality: m.id(),
        lambda_exponent: coef[1],
        k_exponent: coef[2],
        expected,
        tolerance,
        pass,
    })
}

/// Discrete proxy for the boundary-coupling operator: per-mode spectral
/// radii of `diag(M)^{-1} M - I` for the influence matrices `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbcProbe {
    pub rho: f64,
    /// Radii for `k = 1 ..= nx/2`.
    pub radii: Vec<f64>,
    pub failing: Vec<i64>,
    pub max_condition: f64,
}

impl RbcProbe {
    pub fn pass(&self) -> bool {
        self.failing.is_empty() && self.rho < 1.0
    }

    pub fn first_failing(&self) -> Option<i64> {
        self.failing.first().copied()
    }
}

pub fn rbc_contraction_probe<T: Real>(op: &InfluenceOperator<T>) -> RbcProbe {
    let radii: Vec<f64> = op.contraction_radii().into_iter().map(|r| r.as_f64()).collect();
    let failing = (1..)
        .zip(&radii)
        .filter(|(_, r)| !(**r < 1.0))
        .map(|(k, _)| k)
        .collect();
    RbcProbe {
        rho: radii.iter().fold(0.0, |a, r| a.max(*r)),
        radii,
        failing,
        max_condition: op.condition_numbers().iter().fold(0.0, |a, c| a.max(c.as_f64())),
    }
}

/// Probe for the operator `I - h Delta_eps` on `grid`.
pub fn rbc_probe_for<T: Real>(grid: &Grid<T>, eps: T, h: T) -> Result<RbcProbe> {
    let helm = DirichletSolver::helmholtz(grid, eps, h)?;
    let poisson = DirichletSolver::poisson(grid, eps)?;
    Ok(rbc_contraction_probe(&InfluenceOperator::new(grid, &helm, &poisson)?))
}

/// One resolution of a coarsening scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseningStep {
    pub ny: usize,
    pub rho: Option<f64>,
    /// First mode that fails, either by a radius `>= 1` or a singular system.
    pub first_failing: Option<i64>,
}

/// Scans `ny` downward and stops at the first resolution where the probe fails.
pub fn rbc_coarsening_scan(nx: usize, ny_list: &[usize], eps: f64, h: f64) -> Result<Vec<CoarseningStep>> {
    let mut out = Vec::new();
    let mut sorted = ny_list.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    for ny in sorted {
        let grid = Grid::<f64>::new(nx, ny)?;
        let step = match rbc_probe_for(&grid, eps, h) {
            Ok(p) => CoarseningStep {
                ny,
                rho: Some(p.rho),
                first_failing: p.first_failing(),
            },
            Err(Error::SingularInfluence { k, .. }) => CoarseningStep {
                ny,
                rho: None,
                first_failing: Some(k),
            },
            Err(e) => return Err(e),
        };
        let failed = step.first_failing.is_some();
        out.push(step);
        if failed {
            break;
        }
    }
    Ok(out)
}
