//! Laplace-approximated maximum likelihood for logistic regression with
//! crossed random intercepts.
//!
//! Random effects are written `u = σ·b` with `b ~ N(0, I)`. For fixed σ the
//! inner problem maximizes the penalized log-likelihood
//! `Q(β, b) = Σ [y η − softplus(η)] − ½ |b|²` jointly over `(β, b)`; the
//! Laplace marginal log-likelihood is then `Q̂ − ½ log |H_bb|`, where `H_bb`
//! is the negative Hessian of `Q` in `b`. The outer search runs over log σ.
//!
//! The joint Hessian has a diagonal block for each random factor. The factor
//! with more levels is eliminated directly; the remaining factor and the
//! fixed effects form a small dense Schur complement.

use alloc::vec;
use alloc::vec::Vec;

use super::linalg::Cholesky;
use super::optim::{nelder_mead, NelderMeadOptions};
use super::quadrature::gauss_hermite;
use super::{
    Convergence, DesignMatrix, FitError, FitResult, FitStatus, IrlsOptions, ModelSpec, TermEstimate, SEPARATION_BOUND,
};
use crate::math;

#[derive(Debug, Clone, Copy)]
pub struct GlmmOptions {
    pub inner: IrlsOptions,
    pub outer: NelderMeadOptions,
    /// Box for each log σ.
    pub log_sigma_bounds: (f64, f64),
    /// Skip the search over σ and fit at these (σ_child, σ_word).
    pub fixed_sigmas: Option<[f64; 2]>,
    /// Second stage: maximize the approximate likelihood over (log σ, β),
    /// with the random effects profiled at each β. Without it the fixed
    /// effects stay at the joint mode of the penalized likelihood.
    pub refine: bool,
    /// Adaptive Gauss–Hermite nodes per group. 1 is the Laplace
    /// approximation; more are allowed only with a single random factor.
    pub quadrature_nodes: usize,
}

impl Default for GlmmOptions {
    fn default() -> Self {
        Self {
            inner: IrlsOptions::default(),
            outer: NelderMeadOptions::default(),
            log_sigma_bounds: (-8.0, 3.0),
            fixed_sigmas: None,
            refine: true,
            quadrature_nodes: 1,
        }
    }
}

/// `Q(β, b)` with `params = [β; b_child; b_word]`.
pub fn penalized_objective(design: &DesignMatrix, sigmas: [f64; 2], params: &[f64]) -> f64 {
    let (beta, bc, bw) = split(design, params);
    let eta = linear_predictor(design, sigmas, beta, bc, bw);
    data_term(design, &eta) - 0.5 * (norm_sq(bc) + norm_sq(bw))
}

/// Gradient of [`penalized_objective`], in the same layout as `params`.
pub fn penalized_gradient(design: &DesignMatrix, sigmas: [f64; 2], params: &[f64]) -> Vec<f64> {
    let (beta, bc, bw) = split(design, params);
    let eta = linear_predictor(design, sigmas, beta, bc, bw);
    let (p, qc) = (design.n_fixed(), design.n_children());
    let mut g = vec![0.0; params.len()];
    for (i, e) in eta.iter().enumerate() {
        let r = design.y[i] - math::logistic(*e);
        for (gk, xk) in g[..p].iter_mut().zip(design.row(i)) {
            *gk += r * xk;
        }
        g[p + design.child[i]] += sigmas[0] * r;
        g[p + qc + design.word[i]] += sigmas[1] * r;
    }
    for (gk, b) in g[p..].iter_mut().zip(&params[p..]) {
        *gk -= b;
    }
    g
}

/// Laplace log-likelihood at fixed `(σ_child, σ_word)`, with `(β, b)` at the
/// joint mode of `Q`.
pub fn laplace_log_likelihood(design: &DesignMatrix, sigmas: [f64; 2], options: &GlmmOptions) -> Result<f64, FitError> {
    let mut problem = Problem::new(design, sigmas);
    problem.solve(&options.inner)?;
    problem.marginal(None)
}

/// Approximate marginal log-likelihood at fixed `(β, σ_child, σ_word)`: the
/// random effects are set to their conditional modes, then integrated by the
/// Laplace approximation (`nodes == 1`) or adaptive Gauss–Hermite quadrature.
/// Quadrature needs at most one positive σ.
pub fn marginal_log_likelihood(
    design: &DesignMatrix,
    sigmas: [f64; 2],
    beta: &[f64],
    nodes: usize,
    options: &IrlsOptions,
) -> Result<f64, FitError> {
    if beta.len() != design.n_fixed() {
        return Err(FitError::InvalidDesign("beta length differs from the fixed effects"));
    }
    let rule = quadrature_rule(nodes)?;
    let mut problem = Problem::new(design, sigmas);
    problem.beta.copy_from_slice(beta);
    problem.fix_beta = true;
    problem.solve(options)?;
    problem.marginal(rule.as_ref())
}

/// Fit with default options; the random factors are taken from `spec`.
pub fn fit_glmm_laplace(design: &DesignMatrix, spec: &ModelSpec) -> Result<FitResult, FitError> {
    fit_glmm_laplace_with(design, spec, &GlmmOptions::default())
}

pub fn fit_glmm_laplace_with(
    design: &DesignMatrix,
    spec: &ModelSpec,
    options: &GlmmOptions,
) -> Result<FitResult, FitError> {
    if design.n_rows() == 0 {
        return Err(FitError::NoRows(design.age_months));
    }
    let active = [spec.random_child, spec.random_word];
    let levels = [design.n_children(), design.n_words()];
    for (k, factor) in ["child", "word"].into_iter().enumerate() {
        if active[k] && levels[k] < 2 {
            return Err(FitError::TooFewLevels { factor, levels: levels[k] });
        }
    }
    let rule = quadrature_rule(options.quadrature_nodes)?;
    if rule.is_some() && active.iter().filter(|a| **a).count() != 1 {
        return Err(FitError::InvalidDesign("adaptive quadrature needs exactly one random factor"));
    }
    let (lo, hi) = options.log_sigma_bounds;
    let tolerance = |f: f64| options.outer.f_tolerance * (1.0 + math::abs(f));

    // Stage 1: σ by the Laplace likelihood at the joint mode of (β, b).
    let mut sigmas = [0.0; 2];
    let mut evaluations = 0;
    let mut converged = true;
    let mut boundary = false;
    let mut at_upper = false;
    let free: Vec<usize>;
    if let Some(fixed) = options.fixed_sigmas {
        for k in 0..2 {
            if active[k] {
                sigmas[k] = fixed[k];
            }
        }
        if sigmas.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(FitError::InvalidDesign("fixed sigmas must be finite and non-negative"));
        }
        free = Vec::new();
    } else {
        let dims: Vec<usize> = (0..2).filter(|&k| active[k]).collect();
        if !dims.is_empty() {
            let mut warm: Option<Vec<f64>> = None;
            let mut problem = Problem::new(design, sigmas);
            let mut objective = |s: [f64; 2], warm: &mut Option<Vec<f64>>| -> f64 {
                problem.sigmas = s;
                match warm.as_ref() {
                    Some(w) => problem.load(w),
                    None => problem.reset(),
                }
                match problem.solve(&options.inner).and_then(|_| problem.marginal(None)) {
                    Ok(ll) => {
                        *warm = Some(problem.params());
                        -ll
                    }
                    Err(_) => f64::INFINITY,
                }
            };
            let to_sigmas = |x: &[f64]| {
                let mut s = [0.0; 2];
                for (v, &k) in x.iter().zip(&dims) {
                    s[k] = math::exp(*v);
                }
                s
            };
            let x0 = vec![0.0f64.clamp(lo, hi); dims.len()];
            let min = nelder_mead(
                |x| objective(to_sigmas(x), &mut warm),
                &x0,
                &vec![lo; dims.len()],
                &vec![hi; dims.len()],
                &options.outer,
            );
            if !min.f.is_finite() {
                return Err(FitError::Numerical("Laplace objective is not finite anywhere on the search path"));
            }
            evaluations += min.evaluations;
            converged &= min.converged;
            at_upper = min.x.iter().any(|&v| v >= hi - UPPER_MARGIN);
            sigmas = to_sigmas(&min.x);
            // A component whose removal leaves the objective unchanged sits on
            // the boundary.
            let mut best = min.f;
            for &k in &dims {
                let mut trial = sigmas;
                trial[k] = 0.0;
                let f0 = objective(trial, &mut warm);
                evaluations += 1;
                if f0 <= best + tolerance(best) {
                    sigmas = trial;
                    best = best.min(f0);
                    boundary = true;
                }
            }
        }
        free = dims.into_iter().filter(|&k| sigmas[k] > 0.0).collect();
    }

    let mut problem = Problem::new(design, sigmas);
    let inner = problem.solve(&options.inner)?;
    converged &= inner.converged;

    // Stage 2: (log σ, β) by the approximate marginal likelihood.
    let log_likelihood;
    if options.refine && sigmas.iter().any(|s| *s > 0.0) {
        let p = design.n_fixed();
        let beta0 = problem.beta.clone();
        let scale: Vec<f64> = problem
            .fixed_effect_covariance()?
            .into_iter()
            .map(|v| if v > 0.0 && v.is_finite() { math::sqrt(v) } else { 1.0 })
            .collect();
        problem.fix_beta = true;
        let nf = free.len();
        let mut objective = |x: &[f64]| -> f64 {
            for (v, &k) in x[..nf].iter().zip(&free) {
                problem.sigmas[k] = math::exp(*v);
            }
            for a in 0..p {
                problem.beta[a] = beta0[a] + scale[a] * x[nf + a];
            }
            if problem.beta.iter().any(|b| math::abs(*b) > SEPARATION_BOUND) {
                return f64::INFINITY;
            }
            match problem.solve(&options.inner).and_then(|_| problem.marginal(rule.as_ref())) {
                Ok(ll) => -ll,
                Err(_) => f64::INFINITY,
            }
        };
        let mut x0: Vec<f64> = free.iter().map(|&k| math::ln(sigmas[k])).collect();
        x0.extend(core::iter::repeat(0.0).take(p));
        let mut lower = vec![lo; nf];
        lower.extend(core::iter::repeat(-1e6).take(p));
        let mut upper = vec![hi; nf];
        upper.extend(core::iter::repeat(1e6).take(p));
        let mut stage = options.outer;
        stage.initial_step = stage.initial_step.min(0.5);
        let min = nelder_mead(&mut objective, &x0, &lower, &upper, &stage);
        evaluations += min.evaluations;
        converged &= min.converged;
        let interior: Vec<usize> = (0..x0.len())
            .filter(|&j| min.x[j] > lower[j] + POLISH_MARGIN && min.x[j] < upper[j] - POLISH_MARGIN)
            .collect();
        let (mut x, polish_evaluations) = newton_polish(&mut objective, min.x.clone(), min.f, &interior);
        evaluations += polish_evaluations;
        let mut best = objective(&x);
        if !best.is_finite() {
            return Err(FitError::Numerical("approximate likelihood is not finite at the optimum"));
        }
        at_upper = x[..nf].iter().any(|&v| v >= hi - UPPER_MARGIN);
        for j in 0..nf {
            if x[j] <= lo + 1e-6 {
                let mut trial = x.clone();
                trial[j] = f64::NEG_INFINITY;
                let f0 = objective(&trial);
                evaluations += 1;
                if f0 <= best + tolerance(best) {
                    x = trial;
                    best = best.min(f0);
                    boundary = true;
                }
            }
        }
        objective(&x);
        log_likelihood = -best;
        let inner = problem.solve(&options.inner)?;
        converged &= inner.converged;
    } else {
        log_likelihood = problem.marginal(rule.as_ref())?;
    }

    // A standard deviation pinned at the upper bound means the likelihood
    // was still rising: no interior maximum was found.
    let status = if !converged || at_upper {
        FitStatus::NotConverged
    } else if boundary {
        FitStatus::ConvergedAtBoundary
    } else {
        FitStatus::Converged
    };
    problem.finish(active, status, evaluations, log_likelihood)
}

const POLISH_STEP: f64 = 1e-4;
const UPPER_MARGIN: f64 = 1e-3;
const POLISH_MARGIN: f64 = 1e-2;

/// Newton refinement of a minimum found by the simplex search, with central
/// finite-difference derivatives over the coordinates in `dims`. Returns the
/// refined point and the number of objective evaluations used.
fn newton_polish<F>(f: &mut F, mut x: Vec<f64>, mut fx: f64, dims: &[usize]) -> (Vec<f64>, usize)
where
    F: FnMut(&[f64]) -> f64,
{
    let k = dims.len();
    let h = POLISH_STEP;
    let mut evaluations = 0;
    if k == 0 || !fx.is_finite() {
        return (x, evaluations);
    }
    let mut at = |x: &[f64], moves: &[(usize, f64)], evaluations: &mut usize| {
        let mut y = x.to_vec();
        for &(j, d) in moves {
            y[dims[j]] += d;
        }
        *evaluations += 1;
        f(&y)
    };
    for _ in 0..8 {
        let mut g = vec![0.0; k];
        let mut hess = vec![0.0; k * k];
        let mut plus = vec![0.0; k];
        let mut minus = vec![0.0; k];
        for j in 0..k {
            plus[j] = at(&x, &[(j, h)], &mut evaluations);
            minus[j] = at(&x, &[(j, -h)], &mut evaluations);
            g[j] = (plus[j] - minus[j]) / (2.0 * h);
            hess[j * k + j] = (plus[j] - 2.0 * fx + minus[j]) / (h * h);
        }
        for j in 0..k {
            for i in j + 1..k {
                let pp = at(&x, &[(i, h), (j, h)], &mut evaluations);
                let pm = at(&x, &[(i, h), (j, -h)], &mut evaluations);
                let mp = at(&x, &[(i, -h), (j, h)], &mut evaluations);
                let mm = at(&x, &[(i, -h), (j, -h)], &mut evaluations);
                hess[i * k + j] = (pp - pm - mp + mm) / (4.0 * h * h);
            }
        }
        if g.iter().chain(&hess).any(|v| !v.is_finite()) {
            break;
        }
        let Some(chol) = Cholesky::factor(hess, k) else { break };
        let step = chol.solve(&g);
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..20 {
            let moves: Vec<(usize, f64)> = step.iter().enumerate().map(|(j, s)| (j, -scale * s)).collect();
            let trial = at(&x, &moves, &mut evaluations);
            if trial.is_finite() && trial <= fx + rounding(fx) {
                for (j, d) in moves {
                    x[dims[j]] += d;
                }
                fx = trial;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if !moved || step.iter().fold(0.0f64, |m, s| m.max(math::abs(*s))) < 1e-9 {
            break;
        }
    }
    (x, evaluations)
}

fn quadrature_rule(nodes: usize) -> Result<Option<(Vec<f64>, Vec<f64>)>, FitError> {
    match nodes {
        0 => Err(FitError::InvalidDesign("quadrature needs at least one node")),
        1 => Ok(None),
        n => Ok(Some(gauss_hermite(n))),
    }
}

fn split<'p>(design: &DesignMatrix, params: &'p [f64]) -> (&'p [f64], &'p [f64], &'p [f64]) {
    let (p, qc, qw) = (design.n_fixed(), design.n_children(), design.n_words());
    assert_eq!(params.len(), p + qc + qw, "params must be [beta; b_child; b_word]");
    let (beta, rest) = params.split_at(p);
    let (bc, bw) = rest.split_at(qc);
    (beta, bc, bw)
}

fn linear_predictor(design: &DesignMatrix, sigmas: [f64; 2], beta: &[f64], bc: &[f64], bw: &[f64]) -> Vec<f64> {
    let mut eta = design.linear_predictor(beta);
    for (i, e) in eta.iter_mut().enumerate() {
        *e += sigmas[0] * bc[design.child[i]] + sigmas[1] * bw[design.word[i]];
    }
    eta
}

fn data_term(design: &DesignMatrix, eta: &[f64]) -> f64 {
    eta.iter().zip(&design.y).map(|(&e, &y)| y * e - math::softplus(e)).sum()
}

/// Changes of `q` smaller than this are indistinguishable from summation error.
pub(super) fn rounding(q: f64) -> f64 {
    1e-12 * (1.0 + math::abs(q))
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(math::abs(*x)))
}

struct InnerOutcome {
    converged: bool,
}

/// Inner penalized problem at fixed σ.
struct Problem<'a> {
    design: &'a DesignMatrix,
    sigmas: [f64; 2],
    /// Hold β and solve for the random effects only.
    fix_beta: bool,
    /// Index (0 = child, 1 = word) of the factor eliminated through its diagonal.
    big: usize,
    /// Rows grouped by level of the big factor.
    order: Vec<usize>,
    starts: Vec<usize>,
    beta: Vec<f64>,
    b: [Vec<f64>; 2],
    gradient_norm: f64,
}

/// Pieces of the negative Hessian of `Q` after eliminating the big factor.
struct Factored {
    /// Diagonal of the big factor's block.
    diag: Vec<f64>,
    /// Per big level, sparse cross terms against `[b_small; β]`.
    cross: Vec<Vec<(usize, f64)>>,
    /// Cholesky factor of the Schur complement over `[b_small; β]`
    /// (`[b_small]` alone when β is excluded).
    schur: Cholesky,
}

fn group_rows(labels: &[usize], levels: usize) -> (Vec<usize>, Vec<usize>) {
    let mut starts = vec![0usize; levels + 1];
    for &l in labels {
        starts[l + 1] += 1;
    }
    for l in 0..levels {
        starts[l + 1] += starts[l];
    }
    let mut fill = starts.clone();
    let mut order = vec![0; labels.len()];
    for (i, &l) in labels.iter().enumerate() {
        order[fill[l]] = i;
        fill[l] += 1;
    }
    (order, starts)
}

impl<'a> Problem<'a> {
    fn new(design: &'a DesignMatrix, sigmas: [f64; 2]) -> Self {
        let big = if design.n_children() >= design.n_words() { 0 } else { 1 };
        let (order, starts) = if big == 0 {
            group_rows(&design.child, design.n_children())
        } else {
            group_rows(&design.word, design.n_words())
        };
        Self {
            design,
            sigmas,
            fix_beta: false,
            big,
            order,
            starts,
            beta: vec![0.0; design.n_fixed()],
            b: [vec![0.0; design.n_children()], vec![0.0; design.n_words()]],
            gradient_norm: f64::INFINITY,
        }
    }

    fn params(&self) -> Vec<f64> {
        let mut out = self.beta.clone();
        out.extend_from_slice(&self.b[0]);
        out.extend_from_slice(&self.b[1]);
        out
    }

    fn load(&mut self, params: &[f64]) {
        let (beta, bc, bw) = split(self.design, params);
        self.beta.copy_from_slice(beta);
        self.b[0].copy_from_slice(bc);
        self.b[1].copy_from_slice(bw);
    }

    fn reset(&mut self) {
        self.beta.iter_mut().for_each(|v| *v = 0.0);
        self.b.iter_mut().for_each(|b| b.iter_mut().for_each(|v| *v = 0.0));
    }

    fn eta(&self) -> Vec<f64> {
        linear_predictor(self.design, self.sigmas, &self.beta, &self.b[0], &self.b[1])
    }

    fn objective_at(&self, beta: &[f64], b: &[Vec<f64>; 2]) -> f64 {
        let eta = linear_predictor(self.design, self.sigmas, beta, &b[0], &b[1]);
        data_term(self.design, &eta) - 0.5 * (norm_sq(&b[0]) + norm_sq(&b[1]))
    }

    fn objective(&self) -> f64 {
        self.objective_at(&self.beta, &self.b)
    }

    /// Gradient as `(g_beta, [g_child, g_word])`.
    fn gradient(&self, eta: &[f64]) -> (Vec<f64>, [Vec<f64>; 2]) {
        let d = self.design;
        let mut gb = vec![0.0; d.n_fixed()];
        let mut gc = vec![0.0; d.n_children()];
        let mut gw = vec![0.0; d.n_words()];
        for (i, e) in eta.iter().enumerate() {
            let r = d.y[i] - math::logistic(*e);
            for (gk, xk) in gb.iter_mut().zip(d.row(i)) {
                *gk += r * xk;
            }
            gc[d.child[i]] += self.sigmas[0] * r;
            gw[d.word[i]] += self.sigmas[1] * r;
        }
        for (g, b) in gc.iter_mut().zip(&self.b[0]) {
            *g -= b;
        }
        for (g, b) in gw.iter_mut().zip(&self.b[1]) {
            *g -= b;
        }
        (gb, [gc, gw])
    }

    fn factor(&self, eta: &[f64], include_beta: bool) -> Result<Factored, FitError> {
        let d = self.design;
        let p = if include_beta { d.n_fixed() } else { 0 };
        let small = 1 - self.big;
        let small_labels = if small == 0 { &d.child } else { &d.word };
        let q_small = self.b[small].len();
        let q_big = self.b[self.big].len();
        let (s_big, s_small) = (self.sigmas[self.big], self.sigmas[small]);
        let m = q_small + p;

        let w: Vec<f64> = eta
            .iter()
            .map(|&e| {
                let mu = math::logistic(e);
                mu * (1.0 - mu)
            })
            .collect();
        if w.iter().any(|v| !v.is_finite()) {
            return Err(FitError::Numerical("non-finite working weight"));
        }

        // Lower triangle only.
        let mut s = vec![0.0; m * m];
        for j in 0..q_small {
            s[j * m + j] = 1.0;
        }
        for (i, &wi) in w.iter().enumerate() {
            let j = small_labels[i];
            s[j * m + j] += s_small * s_small * wi;
            let x = d.row(i);
            for a in 0..p {
                let ra = q_small + a;
                s[ra * m + j] += s_small * wi * x[a];
                for c in 0..=a {
                    s[ra * m + q_small + c] += wi * x[a] * x[c];
                }
            }
        }

        let mut diag = Vec::with_capacity(q_big);
        let mut cross = Vec::with_capacity(q_big);
        let mut dense = vec![0.0; m];
        let mut touched: Vec<usize> = Vec::new();
        for l in 0..q_big {
            let rows = &self.order[self.starts[l]..self.starts[l + 1]];
            let mut dl = 1.0;
            for &i in rows {
                let wi = w[i];
                dl += s_big * s_big * wi;
                let j = small_labels[i];
                touched.push(j);
                dense[j] += s_big * s_small * wi;
                for (a, xa) in d.row(i)[..p].iter().enumerate() {
                    dense[q_small + a] += s_big * wi * xa;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut v: Vec<(usize, f64)> = touched.iter().map(|&j| (j, dense[j])).filter(|e| e.1 != 0.0).collect();
            v.extend((0..p).map(|a| (q_small + a, dense[q_small + a])).filter(|e| e.1 != 0.0));
            for &(r, vr) in &v {
                for &(c, vc) in &v {
                    if c > r {
                        break;
                    }
                    s[r * m + c] -= vr * vc / dl;
                }
            }
            for &j in &touched {
                dense[j] = 0.0;
            }
            for a in 0..p {
                dense[q_small + a] = 0.0;
            }
            touched.clear();
            diag.push(dl);
            cross.push(v);
        }

        let schur = Cholesky::factor(s, m).ok_or(FitError::Numerical("penalized information is not positive definite"))?;
        Ok(Factored { diag, cross, schur })
    }

    /// Newton ascent on `Q` with step-halving, over `(β, b)` or `b` alone.
    fn solve(&mut self, options: &IrlsOptions) -> Result<InnerOutcome, FitError> {
        let small = 1 - self.big;
        let q_small = self.b[small].len();
        let mut q = self.objective();
        let mut last_change = f64::INFINITY;
        let mut iterations = 0;
        loop {
            let eta = self.eta();
            let (gb, gr) = self.gradient(&eta);
            let mut gnorm = inf_norm(&gr[0]).max(inf_norm(&gr[1]));
            if !self.fix_beta {
                gnorm = gnorm.max(inf_norm(&gb));
            }
            self.gradient_norm = gnorm;
            if !gnorm.is_finite() {
                return Err(FitError::Numerical("non-finite gradient"));
            }
            if gnorm < options.gradient_tolerance && (iterations == 0 || last_change < options.deviance_tolerance) {
                return Ok(InnerOutcome { converged: true });
            }
            if iterations >= options.max_iterations {
                return Ok(InnerOutcome { converged: false });
            }

            let f = self.factor(&eta, !self.fix_beta)?;
            let g_big = &gr[self.big];
            let mut rhs: Vec<f64> = gr[small].clone();
            if !self.fix_beta {
                rhs.extend_from_slice(&gb);
            }
            for (l, v) in f.cross.iter().enumerate() {
                let t = g_big[l] / f.diag[l];
                for &(r, vr) in v {
                    rhs[r] -= vr * t;
                }
            }
            f.schur.solve_in_place(&mut rhs);
            let step_rest = rhs;
            let step_big: Vec<f64> = f
                .cross
                .iter()
                .enumerate()
                .map(|(l, v)| (g_big[l] - v.iter().map(|&(r, vr)| vr * step_rest[r]).sum::<f64>()) / f.diag[l])
                .collect();

            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let mut beta = self.beta.clone();
                for (v, s) in beta.iter_mut().zip(&step_rest[q_small..]) {
                    *v += scale * s;
                }
                let mut b = self.b.clone();
                for (v, s) in b[self.big].iter_mut().zip(&step_big) {
                    *v += scale * s;
                }
                for (v, s) in b[small].iter_mut().zip(&step_rest[..q_small]) {
                    *v += scale * s;
                }
                let trial = self.objective_at(&beta, &b);
                if trial.is_finite() && trial >= q - rounding(q) {
                    accepted = Some((beta, b, trial));
                    break;
                }
                scale *= 0.5;
            }
            iterations += 1;
            let Some((beta, b, trial)) = accepted else {
                return Ok(InnerOutcome {
                    converged: gnorm < options.gradient_tolerance,
                });
            };
            if let Some(k) = beta.iter().position(|v| math::abs(*v) > SEPARATION_BOUND) {
                return Err(FitError::Separation {
                    term: self.design.term_names[k].clone(),
                    value: beta[k],
                });
            }
            last_change = math::abs(trial - q) / (math::abs(trial) + 0.1);
            self.beta = beta;
            self.b = b;
            q = trial;
        }
    }

    /// Laplace (no rule) or adaptive Gauss–Hermite log-likelihood, with the
    /// random effects at their current modes.
    fn marginal(&self, rule: Option<&(Vec<f64>, Vec<f64>)>) -> Result<f64, FitError> {
        let eta = self.eta();
        let positive: Vec<usize> = (0..2).filter(|&k| self.sigmas[k] > 0.0).collect();
        match (rule, positive.as_slice()) {
            (Some((nodes, weights)), &[k]) => Ok(self.quadrature(&eta, k, nodes, weights)),
            (Some(_), &[_, _]) => Err(FitError::InvalidDesign("adaptive quadrature needs exactly one random factor")),
            _ => {
                let f = self.factor(&eta, false)?;
                let q_small = self.b[1 - self.big].len();
                let log_det = f.diag.iter().map(|d| math::ln(*d)).sum::<f64>() + f.schur.log_det_leading(q_small);
                Ok(self.objective() - 0.5 * log_det)
            }
        }
    }

    /// Sum over the levels of factor `k` of log ∫ Π p(y | η) φ(b) db, each
    /// integral centred at the mode and scaled by the curvature there.
    fn quadrature(&self, eta: &[f64], k: usize, nodes: &[f64], weights: &[f64]) -> f64 {
        let d = self.design;
        let labels = if k == 0 { &d.child } else { &d.word };
        let (order, starts) = group_rows(labels, self.b[k].len());
        let sigma = self.sigmas[k];
        let half_ln_2pi = 0.5 * math::ln(2.0 * core::f64::consts::PI);
        let mut total = 0.0;
        for (l, &mode) in self.b[k].iter().enumerate() {
            let rows = &order[starts[l]..starts[l + 1]];
            let mut curvature = 1.0;
            let mut h_mode = -0.5 * mode * mode;
            for &i in rows {
                let mu = math::logistic(eta[i]);
                curvature += sigma * sigma * mu * (1.0 - mu);
                h_mode += d.y[i] * eta[i] - math::softplus(eta[i]);
            }
            let spread = core::f64::consts::SQRT_2 / math::sqrt(curvature);
            let mut sum = 0.0;
            for (z, w) in nodes.iter().zip(weights) {
                let t = mode + spread * z;
                let shift = sigma * (t - mode);
                let mut h = -0.5 * t * t;
                for &i in rows {
                    let e = eta[i] + shift;
                    h += d.y[i] * e - math::softplus(e);
                }
                sum += w * math::exp(z * z + h - h_mode);
            }
            total += h_mode - half_ln_2pi + math::ln(spread * sum);
        }
        // Rows outside any level of `k` do not exist; the other factor has σ = 0.
        total
    }

    /// Fixed-effects block of the inverse negative Hessian of `Q` at the
    /// current point, diagonal only.
    fn fixed_effect_covariance(&self) -> Result<Vec<f64>, FitError> {
        let p = self.design.n_fixed();
        let f = self.factor(&self.eta(), true)?;
        let cov = f.schur.inverse_trailing(p);
        Ok((0..p).map(|k| cov[k * p + k]).collect())
    }

    fn finish(&self, active: [bool; 2], status: FitStatus, iterations: usize, log_likelihood: f64) -> Result<FitResult, FitError> {
        let variances = self.fixed_effect_covariance()?;
        let terms = self
            .design
            .term_names
            .iter()
            .zip(&self.beta)
            .zip(&variances)
            .map(|((name, &b), &v)| TermEstimate::new(name.clone(), b, math::sqrt(v)))
            .collect();
        let modes = |k: usize| -> Vec<f64> {
            if active[k] {
                self.b[k].iter().map(|b| self.sigmas[k] * b).collect()
            } else {
                Vec::new()
            }
        };
        Ok(FitResult {
            terms,
            variance_child: active[0].then(|| self.sigmas[0] * self.sigmas[0]),
            variance_word: active[1].then(|| self.sigmas[1] * self.sigmas[1]),
            log_likelihood,
            convergence: Convergence {
                status,
                iterations,
                gradient_norm: self.gradient_norm,
            },
            child_modes: modes(0),
            word_modes: modes(1),
        })
    }
}

