//! Parametric families for the flux `a` and the reaction terms `f`, `g`.
//!
//! The flux is either the degenerate power law `a(s) = |s|^{(p−2)/2}` (so that
//! `a(|∇u|²)∇u` is the p-Laplacian flux) or a constant `ν`.  Both carry the
//! regularisation `a_ε(s) = a(s + ε)`, which keeps the flux and its Jacobian
//! finite at `∇u = 0` and is the backbone of the solver.
//!
//! Reaction terms declare their tail growth `r` and leading coefficient `c`
//! (`f(y)·y ~ c·|y|^r` as `|y| → ∞`); `c > 0` is dissipative, `c < 0`
//! non-dissipative.  Primitives are computed by adaptive quadrature with
//! `F(0) = 0`.

use crate::linalg::adaptive_simpson;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxKind {
    /// `a(s) = |s|^{(p−2)/2}`, `p ≠ 2` allowed but also valid at `p = 2`
    PowerLaw { p: f64 },
    /// `a(s) ≡ ν`
    Constant { nu: f64 },
}

/// Flux family with its ε-regularisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSpec {
    pub kind: FluxKind,
    pub epsilon: f64,
}

impl FluxSpec {
    pub fn p_laplace(p: f64, epsilon: f64) -> Self {
        FluxSpec {
            kind: FluxKind::PowerLaw { p },
            epsilon,
        }
    }
    pub fn constant(nu: f64) -> Self {
        FluxSpec {
            kind: FluxKind::Constant { nu },
            epsilon: 0.0,
        }
    }
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Growth exponent `p` (2 for constant flux).
    pub fn p(&self) -> f64 {
        match self.kind {
            FluxKind::PowerLaw { p } => p,
            FluxKind::Constant { .. } => 2.0,
        }
    }
    /// Conjugate exponent `q = p/(p−1)`.
    pub fn q(&self) -> f64 {
        let p = self.p();
        p / (p - 1.0)
    }
    /// Coercivity constant in `a(|y|²)|y|² ≥ ν|y|^p` (1 for the power law).
    pub fn nu(&self) -> f64 {
        match self.kind {
            FluxKind::PowerLaw { .. } => 1.0,
            FluxKind::Constant { nu } => nu,
        }
    }

    /// Raw `a(s)`, `s ≥ 0`.
    pub fn a(&self, s: f64) -> f64 {
        match self.kind {
            FluxKind::PowerLaw { p } => s.abs().powf(0.5 * (p - 2.0)),
            FluxKind::Constant { nu } => nu,
        }
    }
    /// Regularised `a_ε(s) = a(s + ε)`.
    pub fn a_eps(&self, s: f64) -> f64 {
        self.a(s + self.epsilon)
    }
    /// `d/ds a_ε(s)`.
    pub fn da_eps(&self, s: f64) -> f64 {
        match self.kind {
            FluxKind::PowerLaw { p } => {
                0.5 * (p - 2.0) * (s + self.epsilon).powf(0.5 * (p - 4.0))
            }
            FluxKind::Constant { .. } => 0.0,
        }
    }
    /// Radial Hessian coefficient `a_ε(s) + 2 s a_ε'(s)` of the flux energy,
    /// evaluated so the degenerate limit `s → 0` stays finite.
    pub fn radial(&self, s: f64) -> f64 {
        match self.kind {
            FluxKind::PowerLaw { p } => {
                // (s+ε)^{(p−4)/2}·((p−1)s + ε), expanded so that ε = 0 and
                // s = 0 do not hit a 0·∞ product
                let se = s + self.epsilon;
                let first = (p - 1.0) * se.powf(0.5 * (p - 2.0));
                if self.epsilon == 0.0 {
                    first
                } else {
                    first - (p - 2.0) * self.epsilon * se.powf(0.5 * (p - 4.0))
                }
            }
            FluxKind::Constant { nu } => nu,
        }
    }
    /// Primitive `A_ε(s) = ∫₀^s a_ε(σ) dσ` of the regularised flux.
    pub fn a_eps_primitive(&self, s: f64) -> f64 {
        match self.kind {
            FluxKind::PowerLaw { p } => {
                let e = self.epsilon;
                2.0 / p * ((s + e).powf(0.5 * p) - e.powf(0.5 * p))
            }
            FluxKind::Constant { nu } => nu * s,
        }
    }
}

#[derive(Clone)]
enum Core {
    /// `c |y|^{r−2} y`
    Power,
    /// polynomial in ascending powers
    Poly(Vec<f64>),
    /// arbitrary smooth core with its derivative
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

/// A reaction term with declared tail metadata `(r, c)` and an optional
/// constant source (`h₁` when used in the bulk, `h₂` on the boundary).
#[derive(Clone)]
pub struct NonlinearitySpec {
    core: Core,
    /// tail growth: `f(y)·y ~ c·|y|^r`
    pub r: f64,
    /// leading coefficient; sign encodes dissipative (`> 0`) or not
    pub c: f64,
    /// constant source paired with this term
    pub source: f64,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.core {
            Core::Power => "power".to_string(),
            Core::Poly(c) => format!("poly{c:?}"),
            Core::Custom { .. } => "custom".to_string(),
        };
        write!(
            f,
            "NonlinearitySpec({kind}, r={}, c={}, source={})",
            self.r, self.c, self.source
        )
    }
}

impl NonlinearitySpec {
    /// Odd power law `f(y) = c |y|^{r−2} y`, so `f(y)·y = c|y|^r`.
    pub fn power(r: f64, c: f64) -> Self {
        assert!(r >= 1.0, "growth rate must satisfy r >= 1");
        NonlinearitySpec {
            core: Core::Power,
            r,
            c,
            source: 0.0,
        }
    }
    /// The dissipative cubic `f(y) = y³`.
    pub fn cubic() -> Self {
        Self::power(4.0, 1.0)
    }
    /// `f(y) = c·y`.
    pub fn linear(c: f64) -> Self {
        Self::power(2.0, c)
    }
    /// `f ≡ 0` (declared metadata `r = 1, c = 0`).
    pub fn zero() -> Self {
        Self::poly(vec![])
    }
    /// Polynomial with ascending coefficients; metadata from the leading term.
    pub fn poly(coeffs: Vec<f64>) -> Self {
        let deg = coeffs
            .iter()
            .rposition(|&a| a != 0.0)
            .map(|k| k as f64)
            .unwrap_or(0.0);
        let lead = coeffs
            .iter()
            .rfind(|&&a| a != 0.0)
            .copied()
            .unwrap_or(0.0);
        NonlinearitySpec {
            core: Core::Poly(coeffs),
            r: deg + 1.0,
            c: lead,
            source: 0.0,
        }
    }
    /// Arbitrary smooth core with declared tail metadata.
    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        r: f64,
        c: f64,
    ) -> Self {
        NonlinearitySpec {
            core: Core::Custom {
                f: Arc::new(f),
                df: Arc::new(df),
            },
            r,
            c,
            source: 0.0,
        }
    }
    pub fn with_source(mut self, h: f64) -> Self {
        self.source = h;
        self
    }

    pub fn eval(&self, y: f64) -> f64 {
        match &self.core {
            Core::Power => {
                if y == 0.0 {
                    0.0
                } else {
                    self.c * y.abs().powf(self.r - 2.0) * y
                }
            }
            Core::Poly(coeffs) => coeffs.iter().rev().fold(0.0, |acc, &a| acc * y + a),
            Core::Custom { f, .. } => f(y),
        }
    }

    pub fn deriv(&self, y: f64) -> f64 {
        match &self.core {
            Core::Power => {
                if y == 0.0 && self.r < 2.0 {
                    f64::INFINITY * self.c.signum()
                } else {
                    self.c * (self.r - 1.0) * y.abs().powf(self.r - 2.0)
                }
            }
            Core::Poly(coeffs) => {
                let mut acc = 0.0;
                for (k, &a) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc * y + k as f64 * a;
                }
                acc
            }
            Core::Custom { df, .. } => df(y),
        }
    }

    /// Primitive `F(y) = ∫₀^y f(s) ds` by adaptive quadrature, `F(0) = 0`.
    pub fn primitive(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 0.0;
        }
        adaptive_simpson(&|s| self.eval(s), 0.0, y, 1e-12)
    }

    /// Primitive with the closed form where one exists (power and polynomial
    /// cores); falls back to quadrature for custom cores.  Used on hot paths;
    /// cross-checked against [`Self::primitive`] in tests.
    pub fn primitive_fast(&self, y: f64) -> f64 {
        match &self.core {
            Core::Power => self.c * y.abs().powf(self.r) / self.r,
            Core::Poly(coeffs) => {
                let mut acc = 0.0;
                for (k, &a) in coeffs.iter().enumerate().rev() {
                    acc = acc * y + a / (k + 1) as f64;
                }
                acc * y
            }
            Core::Custom { .. } => self.primitive(y),
        }
    }

    /// Worst deviation of `f'(y)/|y|^{r−2}` from `(r−1)c` over a logarithmic
    /// tail sample; small values certify the declared `(r, c)` metadata.
    pub fn asss_deviation(&self, y_min: f64, y_max: f64, count: usize) -> f64 {
        let target = (self.r - 1.0) * self.c;
        let mut worst = 0.0f64;
        for k in 0..count {
            let t = k as f64 / (count - 1) as f64;
            let y = y_min * (y_max / y_min).powf(t);
            for sign in [-1.0, 1.0] {
                let ys = sign * y;
                let dev = (self.deriv(ys) / y.powf(self.r - 2.0) - target).abs();
                worst = worst.max(dev);
            }
        }
        worst
    }
}
