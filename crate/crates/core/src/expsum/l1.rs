//! `∫₀¹ |S_Q(α, z)| dα`.
//!
//! Two routes:
//!
//! * **Panels.** Every zero of `|S_Q|` lies on the lattice `ℤ / (p q^Q)`, so the
//!   cells of that lattice are zero-free and `|S_Q|` is analytic on each of
//!   them. Each cell is integrated with a 7/15-point Gauss–Kronrod pair and
//!   bisected while the pair disagrees. Cost grows like `p q^Q`.
//!
//! * **Transfer.** With `G(t) = |Σ_{u<q} e^{2πiu(t + z/p)}|` and
//!   `(L f)(w) = (1/q) Σ_j f((w + j)/q)`, the substitution `α = (w + j)/q`
//!   gives `∫|S_Q| = ∫ K_Q` where `K_0 = 1`, `K_m = L(G · K_{m−1})`. Every
//!   `K_m` is smooth between consecutive multiples of `1/p`, so it is stored as
//!   a piecewise Chebyshev interpolant on those panels. Cost is linear in `Q`.
//!
//! For the transfer route the error bound propagates the measured
//! interpolation error `η_m` of each level through `‖L(G e)‖∞ ≤ C ‖e‖∞` with
//! `C = ‖L G‖∞`, giving `E_Q = Σ_m C^{Q−m} η_m`.

use std::f64::consts::PI;

use serde::Serialize;

use super::{centered_phase, expsum_abs, theta_bound, Alpha, ExpSumError, ExpSumParams};
use crate::digits::reduce;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum L1Method {
    /// Panels when `p q^Q` is at most [`L1Options::auto_panel_cells`], transfer otherwise.
    Auto,
    Panels,
    Transfer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Options {
    pub method: L1Method,
    /// Hard cap on the number of panels of either route.
    pub panel_budget: usize,
    pub auto_panel_cells: u128,
    /// Chebyshev degree per transfer panel.
    pub degree: usize,
}

impl Default for L1Options {
    fn default() -> Self {
        Self {
            method: L1Method::Auto,
            panel_budget: 1 << 22,
            auto_panel_cells: 1 << 15,
            degree: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1Result {
    pub integral: f64,
    pub error_bound: f64,
    /// `q^{Qθ(q)}`.
    pub theta_bound: f64,
    pub panels: usize,
    pub method: L1Method,
}

impl L1Result {
    /// `integral − error_bound ≤ q^{Qθ}`.
    pub fn consistent_with_bound(&self) -> bool {
        self.integral - self.error_bound <= self.theta_bound
    }

    /// `integral + error_bound ≤ q^{Qθ}`: the bound holds for every value in the error interval.
    pub fn certifies_bound(&self) -> bool {
        self.integral + self.error_bound <= self.theta_bound
    }

    /// `q^{Qθ} − (integral + error_bound)`.
    pub fn slack(&self) -> f64 {
        self.theta_bound - (self.integral + self.error_bound)
    }
}

/// `∫₀¹ |S_Q(α, z)| dα` to absolute tolerance `tol`, choosing the route automatically.
pub fn l1_norm(digits: u32, q: u64, p: u64, z: i64, tol: f64) -> Result<L1Result, ExpSumError> {
    l1_norm_with(digits, q, p, z, tol, &L1Options::default())
}

pub fn l1_norm_with(
    digits: u32,
    q: u64,
    p: u64,
    z: i64,
    tol: f64,
    opts: &L1Options,
) -> Result<L1Result, ExpSumError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(ExpSumError::InvalidArgument("tol must be positive".into()));
    }
    let params = ExpSumParams::new(digits, q, p, z, Alpha::zero())?;
    let cells = params
        .block_len()
        .and_then(|b| b.checked_mul(p as u128))
        .unwrap_or(u128::MAX);
    let method = match opts.method {
        L1Method::Auto if cells <= opts.auto_panel_cells => L1Method::Panels,
        L1Method::Auto => L1Method::Transfer,
        m => m,
    };
    match method {
        L1Method::Panels => {
            if cells > opts.panel_budget as u128 {
                return Err(ExpSumError::NonConvergence {
                    tol,
                    panels: opts.panel_budget,
                    estimate: f64::INFINITY,
                });
            }
            panel_quadrature(&params, cells as usize, tol, opts.panel_budget)
        }
        _ => {
            let mut levels = transfer_levels(&params, tol, opts)?;
            Ok(levels.pop().expect("at least one level"))
        }
    }
}

/// Transfer-route results for every digit length `1..=Q` in one pass.
pub fn l1_norm_levels(
    digits: u32,
    q: u64,
    p: u64,
    z: i64,
    tol: f64,
    opts: &L1Options,
) -> Result<Vec<L1Result>, ExpSumError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(ExpSumError::InvalidArgument("tol must be positive".into()));
    }
    let params = ExpSumParams::new(digits, q, p, z, Alpha::zero())?;
    transfer_levels(&params, tol, opts)
}

// ---------------------------------------------------------------------------
// panel route

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Returns `(kronrod, |kronrod − gauss|)` on `[a, b]`.
fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn panel_quadrature(
    params: &ExpSumParams,
    cells: usize,
    tol: f64,
    budget: usize,
) -> Result<L1Result, ExpSumError> {
    let f = |a: f64| expsum_abs(&params.with_alpha(Alpha::real(a)));
    let width = 1.0 / cells as f64;
    let mut integral = 0.0;
    let mut error = 0.0;
    let mut panels = 0usize;
    let mut stack: Vec<(f64, f64, u32)> = Vec::new();
    for c in 0..cells {
        let a = c as f64 * width;
        let b = if c + 1 == cells {
            1.0
        } else {
            (c + 1) as f64 * width
        };
        stack.push((a, b, 0));
        while let Some((a, b, depth)) = stack.pop() {
            let (v, e) = gauss_kronrod(&f, a, b);
            let local_tol = tol * (b - a);
            if e > local_tol && depth < 30 && panels + stack.len() + 2 <= budget {
                let m = 0.5 * (a + b);
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
                continue;
            }
            panels += 1;
            integral += v;
            error += e;
        }
    }
    // summation rounding over all panels
    error += panels as f64 * f64::EPSILON * integral.abs().max(1.0) * 4.0;
    if error > tol {
        return Err(ExpSumError::NonConvergence {
            tol,
            panels,
            estimate: error,
        });
    }
    Ok(L1Result {
        integral,
        error_bound: error,
        theta_bound: theta_bound(params.digits(), params.base())?,
        panels,
        method: L1Method::Panels,
    })
}

// ---------------------------------------------------------------------------
// transfer route

/// Chebyshev points of the second kind on `[-1, 1]`, descending.
fn cheb_points(n: usize) -> Vec<f64> {
    (0..=n).map(|j| (PI * j as f64 / n as f64).cos()).collect()
}

/// Clenshaw–Curtis weights on `[-1, 1]` for [`cheb_points`]; `n` even.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut s = 0.0;
        for k in 1..=n / 2 {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            s += b / (4.0 * (k * k) as f64 - 1.0) * (2.0 * PI * (k * j) as f64 / n as f64).cos();
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        *wj = c / n as f64 * (1.0 - s);
    }
    w
}

#[derive(Debug, Clone)]
struct ChebPanel {
    a: f64,
    b: f64,
    values: Vec<f64>,
}

#[derive(Debug, Clone)]
struct ChebBasis {
    nodes: Vec<f64>,
    bary: Vec<f64>,
    cc: Vec<f64>,
    checks: Vec<f64>,
}

impl ChebBasis {
    fn new(n: usize) -> Self {
        let n = n + n % 2;
        let bary = (0..=n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let checks = (0..n)
            .map(|j| (PI * (j as f64 + 0.5) / n as f64).cos())
            .collect();
        Self {
            nodes: cheb_points(n),
            bary,
            cc: clenshaw_curtis(n),
            checks,
        }
    }

    fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &fj) in self.nodes.iter().zip(&self.bary).zip(values) {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            let t = wj / d;
            num += t * fj;
            den += t;
        }
        num / den
    }
}

#[derive(Debug, Clone)]
struct Piecewise {
    panels: Vec<ChebPanel>,
}

impl Piecewise {
    fn eval(&self, basis: &ChebBasis, w: f64) -> f64 {
        let i = self
            .panels
            .partition_point(|p| p.b <= w)
            .min(self.panels.len() - 1);
        let p = &self.panels[i];
        let x = (2.0 * w - p.a - p.b) / (p.b - p.a);
        basis.interpolate(&p.values, x.clamp(-1.0, 1.0))
    }

    fn integral(&self, basis: &ChebBasis) -> f64 {
        self.panels
            .iter()
            .map(|p| {
                0.5 * (p.b - p.a)
                    * p.values
                        .iter()
                        .zip(&basis.cc)
                        .map(|(v, w)| v * w)
                        .sum::<f64>()
            })
            .sum()
    }

    fn max_sampled(&self, basis: &ChebBasis, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| self.eval(basis, i as f64 / samples as f64))
            .chain(self.panels.iter().flat_map(|p| p.values.iter().copied()))
            .fold(0.0, f64::max)
    }
}

/// `|Σ_{u<q} e^{2πiu(t + z/p)}|`.
fn kernel_abs(t: f64, q: u64, z_mod_p: u64, p: u64) -> f64 {
    let (tc, singular) = centered_phase(Alpha::real(t), z_mod_p, p);
    if singular {
        q as f64
    } else {
        let qf = q as f64;
        ((PI * qf * tc).sin() / (PI * tc).sin()).abs()
    }
}

const MAX_SPLIT_DEPTH: u32 = 16;
const INTERP_SAFETY: f64 = 4.0;

fn transfer_levels(
    params: &ExpSumParams,
    tol: f64,
    opts: &L1Options,
) -> Result<Vec<L1Result>, ExpSumError> {
    let q = params.base();
    let p = params.modulus();
    let zr = reduce(params.z(), p);
    let qf = q as f64;
    let basis = ChebBasis::new(opts.degree.max(4));
    let digits = params.digits();

    let mut prev: Option<Piecewise> = None;
    let mut results = Vec::with_capacity(digits as usize);
    let mut etas: Vec<f64> = Vec::with_capacity(digits as usize);
    let mut contraction = 0.0; // C = ‖L G‖∞
    let rel_tol = (tol * 1e-3).min(1e-11);

    for level in 1..=digits {
        let apply = |w: f64| -> f64 {
            let mut s = 0.0;
            for j in 0..q {
                let t = (w + j as f64) / qf;
                let k = match &prev {
                    Some(pw) => pw.eval(&basis, t),
                    None => 1.0,
                };
                s += kernel_abs(t, q, zr, p) * k;
            }
            s / qf
        };

        let mut panels: Vec<ChebPanel> = Vec::new();
        let mut eta: f64 = 0.0;
        let mut stack: Vec<(f64, f64, u32)> = (0..p)
            .rev()
            .map(|k| (k as f64 / p as f64, (k + 1) as f64 / p as f64, 0))
            .collect();
        while let Some((a, b, depth)) = stack.pop() {
            let map = |x: f64| 0.5 * (a + b) + 0.5 * (b - a) * x;
            let values: Vec<f64> = basis.nodes.iter().map(|&x| apply(map(x))).collect();
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
            let err = basis
                .checks
                .iter()
                .map(|&x| (basis.interpolate(&values, x) - apply(map(x))).abs())
                .fold(0.0, f64::max)
                * INTERP_SAFETY;
            if err > rel_tol * scale && depth < MAX_SPLIT_DEPTH {
                if panels.len() + stack.len() + 2 > opts.panel_budget {
                    return Err(ExpSumError::NonConvergence {
                        tol,
                        panels: opts.panel_budget,
                        estimate: err,
                    });
                }
                let m = 0.5 * (a + b);
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
                continue;
            }
            eta = eta.max(err);
            panels.push(ChebPanel { a, b, values });
        }
        let current = Piecewise { panels };
        if level == 1 {
            contraction = current.max_sampled(&basis, 4096) + eta;
        }
        etas.push(eta);
        // E_m = Σ_{i ≤ m} C^{m−i} η_i
        let propagated = etas.iter().fold(0.0, |acc, &e| acc * contraction + e);
        let integral = current.integral(&basis);
        let rounding =
            64.0 * f64::EPSILON * integral.abs() * (level as f64 + current.panels.len() as f64);
        let error_bound = propagated + rounding;
        if error_bound > tol {
            return Err(ExpSumError::NonConvergence {
                tol,
                panels: current.panels.len(),
                estimate: error_bound,
            });
        }
        results.push(L1Result {
            integral,
            error_bound,
            theta_bound: theta_bound(level, q)?,
            panels: current.panels.len(),
            method: L1Method::Transfer,
        });
        prev = Some(current);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with(method: L1Method) -> L1Options {
        L1Options {
            method,
            ..L1Options::default()
        }
    }

    #[test]
    fn clenshaw_curtis_integrates_polynomials() {
        let n = 16;
        let nodes = cheb_points(n);
        let w = clenshaw_curtis(n);
        for deg in 0..=n {
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            let got: f64 = nodes
                .iter()
                .zip(&w)
                .map(|(x, w)| w * x.powi(deg as i32))
                .sum();
            assert!((got - exact).abs() < 1e-14, "deg {deg}: {got} vs {exact}");
        }
    }

    #[test]
    fn single_binary_digit_is_four_over_pi() {
        for method in [L1Method::Panels, L1Method::Transfer] {
            let r = l1_norm_with(1, 2, 2, 1, 1e-9, &with(method)).unwrap();
            assert!(
                (r.integral - 4.0 / PI).abs() < 1e-9,
                "{method:?}: {}",
                r.integral
            );
            assert!(r.error_bound <= 1e-9);
            assert!(r.certifies_bound());
        }
    }

    #[test]
    fn routes_agree() {
        for (digits, q, p, z) in [
            (3, 2, 2, 1),
            (4, 3, 2, 1),
            (2, 5, 3, 2),
            (3, 3, 5, 0),
            (2, 7, 13, 4),
        ] {
            let a = l1_norm_with(digits, q, p, z, 1e-8, &with(L1Method::Panels)).unwrap();
            let b = l1_norm_with(digits, q, p, z, 1e-8, &with(L1Method::Transfer)).unwrap();
            assert!(
                (a.integral - b.integral).abs() <= a.error_bound + b.error_bound + 1e-12,
                "Q={digits} q={q} p={p} z={z}: {} vs {}",
                a.integral,
                b.integral
            );
        }
    }

    #[test]
    fn levels_are_monotone_in_work() {
        let levels = l1_norm_levels(6, 10, 3, 1, 1e-8, &L1Options::default()).unwrap();
        assert_eq!(levels.len(), 6);
        for r in &levels {
            assert!(r.integral > 0.0 && r.certifies_bound());
        }
    }

    #[test]
    fn panel_budget_exhaustion_is_reported() {
        let opts = L1Options {
            method: L1Method::Panels,
            panel_budget: 100,
            ..L1Options::default()
        };
        assert!(matches!(
            l1_norm_with(6, 3, 2, 1, 1e-9, &opts),
            Err(ExpSumError::NonConvergence { .. })
        ));
        assert!(l1_norm(2, 2, 2, 1, 0.0).is_err());
    }
}
