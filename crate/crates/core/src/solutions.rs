//! Closed-form solution handles of the null-state system.
//!
//! A [`SolutionHandle`] is a lazily evaluated function on the chamber
//! x₁ < … < x_{2N} together with N, κ and what is known about it analytically.
//! The built-in handles are the one-arc solution `C (x₂ − x₁)^{1−6/κ}`, the
//! two-dimensional four-point space spanned by G₁ and G₂, constants, and the
//! pairwise-product function that solves the null-state PDEs but not the
//! dilation and inversion Ward identities.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::diagrams::enumerate_diagrams;
use crate::error::{Error, Result};
use crate::params::{one_leg_weight, Kappa};
use crate::specfun::hyp2f1_split;

/// Anything that can be evaluated on a strictly increasing coordinate tuple.
pub trait Evaluate: Send + Sync {
    /// Number of coordinates the function takes.
    fn arity(&self) -> usize;

    fn kappa(&self) -> Kappa;

    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    /// Value together with an absolute uncertainty; exact evaluators report 0.
    fn evaluate_with_error(&self, x: &[f64]) -> Result<(f64, f64)> {
        Ok((self.evaluate(x)?, 0.0))
    }
}

/// A point of the chamber Ω₀: strictly increasing finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ConfigPoint(Vec<f64>);

impl ConfigPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("coordinate {bad} is not finite")));
        }
        if let Some(w) = coords.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "coordinates must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Smallest gap between consecutive coordinates (∞ for fewer than two).
    pub fn min_gap(&self) -> f64 {
        self.0
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for ConfigPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ConfigPoint> for Vec<f64> {
    fn from(p: ConfigPoint) -> Self {
        p.0
    }
}

impl AsRef<[f64]> for ConfigPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Four-point cross-ratio λ = (x₂−x₁)(x₄−x₃)/[(x₃−x₁)(x₄−x₂)] with its
/// complement 1 − λ = (x₃−x₂)(x₄−x₁)/[(x₃−x₁)(x₄−x₂)], both formed from gaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossRatio {
    lambda: f64,
    complement: f64,
}

impl CrossRatio {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda > 0.0 && lambda < 1.0 {
            Ok(Self {
                lambda,
                complement: 1.0 - lambda,
            })
        } else {
            Err(Error::Domain(format!(
                "cross-ratio must lie in (0, 1), got {lambda}"
            )))
        }
    }

    pub fn from_points(x: &[f64]) -> Result<Self> {
        let [x1, x2, x3, x4] = <[f64; 4]>::try_from(x).map_err(|_| {
            Error::Domain(format!("cross-ratio needs 4 points, got {}", x.len()))
        })?;
        let denom = (x3 - x1) * (x4 - x2);
        let lambda = (x2 - x1) * (x4 - x3) / denom;
        let complement = (x3 - x2) * (x4 - x1) / denom;
        if !(lambda > 0.0 && complement > 0.0) {
            return Err(Error::Domain(format!(
                "points {x:?} are not strictly increasing"
            )));
        }
        Ok(Self { lambda, complement })
    }

    pub fn lambda(self) -> f64 {
        self.lambda
    }

    pub fn complement(self) -> f64 {
        self.complement
    }

    fn swapped(self) -> Self {
        Self {
            lambda: self.complement,
            complement: self.lambda,
        }
    }
}

/// G₁(λ) = λ^{2/κ}(1−λ)^{1−6/κ} ₂F₁(4/κ, 1−4/κ; 8/κ | λ).
fn g1(kappa: Kappa, r: CrossRatio) -> Result<f64> {
    let k = kappa.value();
    let f = hyp2f1_split(4.0 / k, 1.0 - 4.0 / k, 8.0 / k, r.lambda, r.complement)?;
    Ok(r.lambda.powf(2.0 / k) * r.complement.powf(1.0 - 6.0 / k) * f)
}

/// (G₁(λ), G₂(λ)) with G₂(λ) = G₁(1 − λ).
pub fn g_functions(kappa: Kappa, lam: CrossRatio) -> Result<(f64, f64)> {
    Ok((g1(kappa, lam)?, g1(kappa, lam.swapped())?))
}

/// ₂F₁(4/κ, 1−4/κ; 8/κ | 1) = Γ(8/κ)Γ(8/κ−1) / (Γ(4/κ)Γ(12/κ−1)): the
/// identity-channel amplitude of G₁ as λ → 1 (and of G₂ as λ → 0).
pub fn identity_amplitude(kappa: Kappa) -> f64 {
    let r = 8.0 / kappa.value();
    gamma(r) * gamma(r - 1.0) / (gamma(r / 2.0) * gamma(1.5 * r - 1.0))
}

/// 3Γ(2/3)/Γ(1/3)², the prefactor turning G₁ at κ = 6 into Cardy's formula.
pub fn cardy_normalization() -> f64 {
    3.0 * gamma(2.0 / 3.0) / gamma(1.0 / 3.0).powi(2)
}

/// What is known analytically about a handle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Claims {
    pub satisfies_null_state: bool,
    pub satisfies_ward: bool,
    /// Values of the C_N collapse functionals in canonical diagram order.
    pub known_dual_vector: Option<Vec<f64>>,
}

/// User-supplied evaluator.
pub type CustomFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
enum HandleKind {
    OneArc { scale: f64 },
    FourPoint { c1: f64, c2: f64 },
    Constant { value: f64 },
    PairProduct,
    Combination(Vec<(f64, SolutionHandle)>),
    Custom(CustomFn),
}

/// An evaluable function on Ω₀ with 2N coordinates, tagged with κ.
#[derive(Clone)]
pub struct SolutionHandle {
    n_pairs: usize,
    kappa: Kappa,
    label: String,
    claims: Claims,
    kind: HandleKind,
}

impl fmt::Debug for SolutionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolutionHandle")
            .field("label", &self.label)
            .field("n_pairs", &self.n_pairs)
            .field("kappa", &self.kappa)
            .field("claims", &self.claims)
            .finish()
    }
}

impl SolutionHandle {
    /// F(x₁, x₂) = C (x₂ − x₁)^{1−6/κ}.
    pub fn s1(kappa: Kappa, scale: f64) -> Self {
        Self {
            n_pairs: 1,
            kappa,
            label: format!("s1(C={scale})"),
            claims: Claims {
                satisfies_null_state: true,
                satisfies_ward: true,
                known_dual_vector: Some(vec![scale]),
            },
            kind: HandleKind::OneArc { scale },
        }
    }

    /// F(x) = [(x₄ − x₂)(x₃ − x₁)]^{1−6/κ} [C₁G₁(λ) + C₂G₂(λ)].
    pub fn s2(kappa: Kappa, c1: f64, c2: f64) -> Self {
        let a = identity_amplitude(kappa);
        Self {
            n_pairs: 2,
            kappa,
            label: format!("s2(C1={c1}, C2={c2})"),
            claims: Claims {
                satisfies_null_state: true,
                satisfies_ward: true,
                // {(1,2),(3,4)} sees the identity channel of G₂; {(1,4),(2,3)} that of G₁.
                known_dual_vector: Some(vec![c2 * a, c1 * a]),
            },
            kind: HandleKind::FourPoint { c1, c2 },
        }
    }

    /// Cardy's left-right crossing probability as a four-point function at κ = 6,
    /// with λ playing the role of the elliptic parameter m.
    pub fn cardy() -> Self {
        let kappa = Kappa::new(6.0).expect("6 is in range");
        let mut h = Self::s2(kappa, cardy_normalization(), 0.0);
        h.label = "cardy".into();
        h
    }

    /// The constant function; a solution only at κ = 6 (θ₁ = 0) or when zero.
    pub fn constant(n_pairs: usize, kappa: Kappa, value: f64) -> Self {
        let solves = value == 0.0 || one_leg_weight(kappa) == 0.0;
        let dual = if solves {
            catalan_len(n_pairs).map(|len| vec![value; len])
        } else {
            None
        };
        Self {
            n_pairs,
            kappa,
            label: format!("constant({value})"),
            claims: Claims {
                satisfies_null_state: solves,
                satisfies_ward: solves,
                known_dual_vector: dual,
            },
            kind: HandleKind::Constant { value },
        }
    }

    pub fn zero(n_pairs: usize, kappa: Kappa) -> Self {
        let mut h = Self::constant(n_pairs, kappa, 0.0);
        h.label = "zero".into();
        h
    }

    /// ∏_{i<j} (x_j − x_i)^{2/κ}: solves the null-state PDEs and only the
    /// translation Ward identity.
    pub fn counterexample(kappa: Kappa, n_pairs: usize) -> Self {
        Self {
            n_pairs,
            kappa,
            label: "counterexample".into(),
            claims: Claims {
                satisfies_null_state: true,
                satisfies_ward: false,
                known_dual_vector: None,
            },
            kind: HandleKind::PairProduct,
        }
    }

    /// Σ aᵢ Fᵢ over handles sharing N and κ.
    pub fn linear_combination(terms: Vec<(f64, SolutionHandle)>) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::Parameter("empty linear combination".into()))?;
        let (n_pairs, kappa) = (first.n_pairs, first.kappa);
        if terms
            .iter()
            .any(|(_, h)| h.n_pairs != n_pairs || h.kappa != kappa)
        {
            return Err(Error::Parameter(
                "combined handles must share N and kappa".into(),
            ));
        }
        let label = terms
            .iter()
            .map(|(a, h)| format!("{a}*{}", h.label))
            .collect::<Vec<_>>()
            .join(" + ");
        let known_dual_vector = terms.iter().try_fold(None::<Vec<f64>>, |acc, (a, h)| {
            let v = h.claims.known_dual_vector.as_ref()?;
            let mut acc = acc.unwrap_or_else(|| vec![0.0; v.len()]);
            for (s, x) in acc.iter_mut().zip(v) {
                *s += a * x;
            }
            Some(Some(acc))
        });
        let claims = Claims {
            satisfies_null_state: terms.iter().all(|(_, h)| h.claims.satisfies_null_state),
            satisfies_ward: terms.iter().all(|(_, h)| h.claims.satisfies_ward),
            known_dual_vector: known_dual_vector.flatten(),
        };
        Ok(Self {
            n_pairs,
            kappa,
            label,
            claims,
            kind: HandleKind::Combination(terms),
        })
    }

    pub fn custom(
        n_pairs: usize,
        kappa: Kappa,
        label: impl Into<String>,
        claims: Claims,
        f: CustomFn,
    ) -> Self {
        Self {
            n_pairs,
            kappa,
            label: label.into(),
            claims,
            kind: HandleKind::Custom(f),
        }
    }

    /// Look up a built-in handle by name: `s1`, `s2`, `g1`, `g2`, `cardy`,
    /// `constant`, `zero` or `counterexample`. `coeffs` feeds the scale of `s1`,
    /// the (C₁, C₂) of `s2` and the value of `constant`.
    pub fn named(name: &str, kappa: Kappa, n_pairs: usize, coeffs: &[f64]) -> Result<Self> {
        let coeff = |i: usize, default: f64| coeffs.get(i).copied().unwrap_or(default);
        let need = |n: usize| {
            if n_pairs == n {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "solution '{name}' has N = {n}, requested N = {n_pairs}"
                )))
            }
        };
        match name {
            "s1" => need(1).map(|_| Self::s1(kappa, coeff(0, 1.0))),
            "s2" => need(2).map(|_| Self::s2(kappa, coeff(0, 1.0), coeff(1, 0.0))),
            "g1" => need(2).map(|_| Self::s2(kappa, 1.0, 0.0)),
            "g2" => need(2).map(|_| Self::s2(kappa, 0.0, 1.0)),
            "cardy" => {
                need(2)?;
                if kappa.value() != 6.0 {
                    return Err(Error::Parameter("the cardy handle is defined at kappa = 6".into()));
                }
                Ok(Self::cardy())
            }
            "constant" => Ok(Self::constant(n_pairs, kappa, coeff(0, 1.0))),
            "zero" => Ok(Self::zero(n_pairs, kappa)),
            "counterexample" => Ok(Self::counterexample(kappa, n_pairs)),
            other => Err(Error::Parameter(format!("unknown solution '{other}'"))),
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn claims(&self) -> &Claims {
        &self.claims
    }

    /// The handle describing the continuation of this function to the chamber
    /// component whose coordinates are a cyclic rotation of Ω₀, pulled back to
    /// Ω₀: for y ∈ Ω₀ it evaluates the extension at x′ with
    /// x′_{i} = y_{i − shift (mod 2N)}. `None` when the continuation is unknown.
    pub fn cyclic_extension(&self, shift: usize) -> Option<SolutionHandle> {
        let shift = shift % (2 * self.n_pairs).max(1);
        match &self.kind {
            HandleKind::OneArc { .. } | HandleKind::Constant { .. } | HandleKind::PairProduct => {
                Some(self.clone())
            }
            HandleKind::FourPoint { c1, c2 } => {
                if shift.is_multiple_of(2) {
                    Some(self.clone())
                } else {
                    let mut h = Self::s2(self.kappa, *c2, *c1);
                    h.label = format!("{} rotated by {shift}", self.label);
                    Some(h)
                }
            }
            HandleKind::Combination(terms) => {
                let rotated = terms
                    .iter()
                    .map(|(a, h)| h.cyclic_extension(shift).map(|r| (*a, r)))
                    .collect::<Option<Vec<_>>>()?;
                Self::linear_combination(rotated).ok()
            }
            HandleKind::Custom(_) => (shift == 0).then(|| self.clone()),
        }
    }
}

fn catalan_len(n_pairs: usize) -> Option<usize> {
    enumerate_diagrams(n_pairs).ok().map(|d| d.len())
}

impl Evaluate for SolutionHandle {
    fn arity(&self) -> usize {
        2 * self.n_pairs
    }

    fn kappa(&self) -> Kappa {
        self.kappa
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity() {
            return Err(Error::Domain(format!(
                "{} takes {} coordinates, got {}",
                self.label,
                self.arity(),
                x.len()
            )));
        }
        debug_assert!(
            x.windows(2).all(|w| w[0] < w[1]),
            "coordinates must be strictly increasing: {x:?}"
        );
        let k = self.kappa.value();
        match &self.kind {
            HandleKind::OneArc { scale } => Ok(scale * (x[1] - x[0]).powf(1.0 - 6.0 / k)),
            HandleKind::FourPoint { c1, c2 } => {
                if *c1 == 0.0 && *c2 == 0.0 {
                    return Ok(0.0);
                }
                let r = CrossRatio::from_points(x)?;
                let prefactor = ((x[3] - x[1]) * (x[2] - x[0])).powf(1.0 - 6.0 / k);
                let mut g = 0.0;
                if *c1 != 0.0 {
                    g += c1 * g1(self.kappa, r)?;
                }
                if *c2 != 0.0 {
                    g += c2 * g1(self.kappa, r.swapped())?;
                }
                Ok(prefactor * g)
            }
            HandleKind::Constant { value } => Ok(*value),
            HandleKind::PairProduct => {
                let mut log_sum = 0.0;
                for (i, xi) in x.iter().enumerate() {
                    for xj in &x[i + 1..] {
                        log_sum += (xj - xi).abs().ln();
                    }
                }
                Ok((2.0 / k * log_sum).exp())
            }
            HandleKind::Combination(terms) => terms
                .iter()
                .try_fold(0.0, |acc, (a, h)| Ok(acc + a * h.evaluate(x)?)),
            HandleKind::Custom(f) => f(x),
        }
    }
}

/// An orientation-preserving real Möbius map x ↦ (ax + b)/(cx + d), ad − bc > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusMap {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if det > 0.0 && det.is_finite() {
            Ok(Self { a, b, c, d })
        } else {
            Err(Error::Domain(format!(
                "Möbius map needs ad - bc > 0, got {det}"
            )))
        }
    }

    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// The real point sent to infinity, if any.
    pub fn pole(&self) -> Option<f64> {
        (self.c != 0.0).then(|| -self.d / self.c)
    }

    /// Image of `x`; `None` at the pole.
    pub fn apply(&self, x: f64) -> Option<f64> {
        let den = self.c * x + self.d;
        (den != 0.0).then(|| (self.a * x + self.b) / den)
    }

    /// f′(x) = (ad − bc)/(cx + d)².
    pub fn derivative(&self, x: f64) -> f64 {
        let den = self.c * x + self.d;
        self.determinant() / (den * den)
    }

    /// The map sending `zero ↦ 0`, `one ↦ 1` and `infinity ↦ ∞`, without the
    /// orientation requirement (the result may reverse orientation).
    pub fn through_points(zero: f64, one: f64, infinity: f64) -> Self {
        // f(x) = (one - infinity)(x - zero) / ((one - zero)(x - infinity))
        let alpha = one - infinity;
        let beta = one - zero;
        Self {
            a: alpha,
            b: -alpha * zero,
            c: beta,
            d: -beta * infinity,
        }
    }

    /// The cyclic map used to move the boundary interval (x_{2N}, x₁) into the
    /// interior: x_{2N} ↦ 0, x_{2N−2} ↦ 1, x_{2N−1} + 1 ↦ ∞.
    pub fn cyclic(pt: &ConfigPoint) -> Result<Self> {
        let x = pt.coords();
        let n = x.len();
        if n < 4 {
            return Err(Error::Domain(
                "the cyclic map needs at least four coordinates".into(),
            ));
        }
        Ok(Self::through_points(x[n - 1], x[n - 3], x[n - 2] + 1.0))
    }
}

/// Relative violation of Möbius covariance at `pt`:
/// |F̂(x′) ∏ f′(xᵢ)^{θ₁} − F(x)| / |F(x)| with x′ = f(x) re-sorted into Ω₀.
pub fn mobius_transform_check(
    f: &SolutionHandle,
    map: &MobiusMap,
    pt: &ConfigPoint,
) -> Result<f64> {
    if map.determinant() <= 0.0 {
        return Err(Error::Domain("Möbius map must preserve orientation".into()));
    }
    let x = pt.coords();
    let mut images = Vec::with_capacity(x.len());
    for &xi in x {
        let img = map
            .apply(xi)
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Domain(format!("coordinate {xi} is mapped to infinity")))?;
        images.push(img);
    }
    // Points left of the pole land above the others, so sorting rotates the labels.
    let shift = map.pole().map_or(0, |p| x.iter().filter(|&&xi| xi < p).count());
    let mut sorted = images[shift..].to_vec();
    sorted.extend_from_slice(&images[..shift]);
    let image_pt = ConfigPoint::new(sorted)?;
    let extension = f.cyclic_extension(shift).ok_or_else(|| {
        Error::Domain(format!(
            "{} has no known continuation to the rotated chamber (shift {shift})",
            f.label
        ))
    })?;
    let theta = one_leg_weight(f.kappa);
    let jacobian: f64 = x.iter().map(|&xi| map.derivative(xi).powf(theta)).product();
    let transformed = extension.evaluate(image_pt.coords())? * jacobian;
    let original = f.evaluate(x)?;
    let diff = (transformed - original).abs();
    Ok(if original != 0.0 {
        diff / original.abs()
    } else {
        diff
    })
}
