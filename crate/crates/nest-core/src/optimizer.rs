//! Derivative-free minimization with resumable ask/tell state, so runs
//! can interleave objective changes (map switches) between iterations.
//!
//! The primary method fits a linear model over a maintained simplex of
//! k+1 points and takes trust-region steps of radius rho, halving rho and
//! re-spanning the simplex around the incumbent after repeated failures
//! (the shape of Powell's linear-approximation scheme). Nelder-Mead is a
//! simplex-reflection fallback behind the same interface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cobyla,
    NelderMead,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Stop when the method's internal trust-region/simplex size falls
    /// below `tol`.
    DefaultTol { tol: f64 },
    /// Stop when best-so-far improved by less than
    /// `min_rel_improvement * |best-so-far at (len - window)|` over the
    /// last `window` evaluations.
    SlidingWindow {
        window: usize,
        min_rel_improvement: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub initial_step: f64,
    pub max_evals: usize,
    pub termination: Termination,
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_step > 0.0) {
            return Err(Error::Domain(format!(
                "initial_step {} must be > 0",
                self.initial_step
            )));
        }
        if self.max_evals < 1 {
            return Err(Error::InvalidBudget("max_evals must be >= 1".into()));
        }
        match self.termination {
            Termination::DefaultTol { tol } => {
                if !(tol > 0.0 && tol < self.initial_step) {
                    return Err(Error::Domain(format!(
                        "tolerance {tol} must be in (0, initial_step)"
                    )));
                }
            }
            Termination::SlidingWindow {
                window,
                min_rel_improvement,
            } => {
                if window < 1 {
                    return Err(Error::Domain("window must be >= 1".into()));
                }
                if !(min_rel_improvement > 0.0 && min_rel_improvement < 1.0) {
                    return Err(Error::Domain(format!(
                        "min_rel_improvement {min_rel_improvement} not in (0, 1)"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn default_tol(method: Method, initial_step: f64, max_evals: usize, tol: f64) -> Self {
        OptimizerConfig {
            method,
            initial_step,
            max_evals,
            termination: Termination::DefaultTol { tol },
        }
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Cobyla,
            initial_step: 1.0,
            max_evals: 1000,
            termination: Termination::DefaultTol { tol: 1e-4 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Budget,
    DefaultTol,
    SlidingWindow,
}

impl StopReason {
    pub fn label(self) -> &'static str {
        match self {
            StopReason::Budget => "budget",
            StopReason::DefaultTol => "default-tol",
            StopReason::SlidingWindow => "sliding-window",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eval {
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptTrace {
    pub evals: Vec<Eval>,
    pub best_value: f64,
    pub best_params: Vec<f64>,
    pub terminated_by: Option<StopReason>,
    pub iteration_count: usize,
    /// Current trust-region/simplex size (drives DefaultTol).
    pub scale: f64,
    pub seed: u64,
}

impl OptTrace {
    fn new(seed: u64, scale: f64) -> Self {
        OptTrace {
            evals: Vec::new(),
            best_value: f64::INFINITY,
            best_params: Vec::new(),
            terminated_by: None,
            iteration_count: 0,
            scale,
            seed,
        }
    }

    fn record(&mut self, params: Vec<f64>, value: f64) {
        if value < self.best_value {
            self.best_value = value;
            self.best_params = params.clone();
        }
        self.evals.push(Eval { params, value });
        self.iteration_count = self.evals.len();
    }

    /// Best value seen among the first `upto` evaluations.
    fn best_at(&self, upto: usize) -> f64 {
        self.evals[..upto]
            .iter()
            .map(|e| e.value)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Termination test over a trace. DefaultTol reads the trace's recorded
/// method scale; the sliding window compares best-so-far against the
/// best-so-far `window` evaluations earlier.
pub fn should_stop(trace: &OptTrace, rule: &Termination) -> bool {
    match *rule {
        Termination::DefaultTol { tol } => trace.scale < tol,
        Termination::SlidingWindow {
            window,
            min_rel_improvement,
        } => {
            let len = trace.evals.len();
            if len < window + 1 {
                return false;
            }
            let reference = trace.best_at(len - window);
            let improvement = reference - trace.best_value;
            improvement < min_rel_improvement * reference.abs()
        }
    }
}

// ---------------------------------------------------------------------------
// COBYLA-style linear trust region
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum TrustPhase {
    /// Spanning the simplex around `origin`; the origin itself is asked
    /// first when the point list is empty.
    Building { origin: Vec<f64> },
    Proposing,
}

#[derive(Debug, Clone)]
struct TrustState {
    dim: usize,
    rho: f64,
    pts: Vec<Vec<f64>>,
    vals: Vec<f64>,
    best: usize,
    phase: TrustPhase,
    fails: usize,
    probe_axis: usize,
}

impl TrustState {
    fn new(x0: Vec<f64>, step: f64) -> Self {
        TrustState {
            dim: x0.len(),
            rho: step,
            pts: Vec::new(),
            vals: Vec::new(),
            best: 0,
            phase: TrustPhase::Building { origin: x0 },
            fails: 0,
            probe_axis: 0,
        }
    }

    fn ask(&self) -> Vec<f64> {
        match &self.phase {
            TrustPhase::Building { origin } => {
                if self.pts.is_empty() {
                    origin.clone()
                } else {
                    let axis = self.pts.len() - 1;
                    let mut x = origin.clone();
                    x[axis] += self.rho;
                    x
                }
            }
            TrustPhase::Proposing => {
                let best = &self.pts[self.best];
                match self.fit_gradient() {
                    Some(g) => {
                        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if norm < 1e-14 {
                            self.axis_probe(best)
                        } else {
                            best.iter()
                                .zip(g.iter())
                                .map(|(x, gi)| x - self.rho * gi / norm)
                                .collect()
                        }
                    }
                    None => self.axis_probe(best),
                }
            }
        }
    }

    fn axis_probe(&self, best: &[f64]) -> Vec<f64> {
        let mut x = best.to_vec();
        x[self.probe_axis] += self.rho;
        x
    }

    /// Least-structure linear model: solve (pts_i - pts_best) g = f_i - f_best.
    fn fit_gradient(&self) -> Option<Vec<f64>> {
        let k = self.dim;
        let mut a = vec![0.0; k * k];
        let mut b = vec![0.0; k];
        let best = &self.pts[self.best];
        let fb = self.vals[self.best];
        let mut row = 0;
        for (i, p) in self.pts.iter().enumerate() {
            if i == self.best {
                continue;
            }
            for c in 0..k {
                a[row * k + c] = p[c] - best[c];
            }
            b[row] = self.vals[i] - fb;
            row += 1;
        }
        debug_assert_eq!(row, k);
        solve_linear(&mut a, &mut b, k)
    }

    fn worst(&self) -> usize {
        let mut worst = 0;
        for i in 1..self.vals.len() {
            if self.vals[i] > self.vals[worst] {
                worst = i;
            }
        }
        worst
    }

    fn respan(&mut self) {
        let best_pt = self.pts[self.best].clone();
        let best_val = self.vals[self.best];
        self.pts = vec![best_pt.clone()];
        self.vals = vec![best_val];
        self.best = 0;
        self.phase = TrustPhase::Building { origin: best_pt };
    }

    fn tell(&mut self, x: Vec<f64>, v: f64) {
        match &self.phase {
            TrustPhase::Building { .. } => {
                self.pts.push(x);
                self.vals.push(v);
                let idx = self.vals.len() - 1;
                if v < self.vals[self.best] {
                    self.best = idx;
                }
                if self.pts.len() == self.dim + 1 {
                    self.phase = TrustPhase::Proposing;
                }
            }
            TrustPhase::Proposing => {
                self.probe_axis = (self.probe_axis + 1) % self.dim;
                let improved = v < self.vals[self.best];
                let worst = self.worst();
                if v < self.vals[worst] {
                    self.pts[worst] = x;
                    self.vals[worst] = v;
                    if improved {
                        self.best = worst;
                    }
                }
                if improved {
                    self.fails = 0;
                } else {
                    self.fails += 1;
                    if self.fails >= 2 {
                        self.rho *= 0.5;
                        self.fails = 0;
                        self.respan();
                    }
                }
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; None on near-singular
/// systems (degenerate simplex geometry).
fn solve_linear(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let mut scale_max = 0.0f64;
    for v in a.iter() {
        scale_max = scale_max.max(v.abs());
    }
    if scale_max == 0.0 {
        return None;
    }
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * n + col].abs() < 1e-12 * scale_max {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(col * n + c, pivot * n + c);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for c in col + 1..n {
            acc -= a[col * n + c] * x[c];
        }
        x[col] = acc / a[col * n + col];
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Nelder-Mead
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum NmPhase {
    Building { origin: Vec<f64> },
    Reflect,
    Expand { xr: Vec<f64>, fr: f64 },
    ContractOutside { fr: f64 },
    ContractInside,
    Shrink { next: usize, anchor: usize },
}

#[derive(Debug, Clone)]
struct NmState {
    dim: usize,
    step: f64,
    pts: Vec<Vec<f64>>,
    vals: Vec<f64>,
    phase: NmPhase,
}

impl NmState {
    fn new(x0: Vec<f64>, step: f64) -> Self {
        NmState {
            dim: x0.len(),
            step,
            pts: Vec::new(),
            vals: Vec::new(),
            phase: NmPhase::Building { origin: x0 },
        }
    }

    fn order(&self) -> (usize, usize, usize) {
        let mut idx: Vec<usize> = (0..self.vals.len()).collect();
        idx.sort_by(|&a, &b| self.vals[a].partial_cmp(&self.vals[b]).expect("finite"));
        (idx[0], idx[idx.len() - 2], idx[idx.len() - 1])
    }

    fn centroid_excluding(&self, skip: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for (i, p) in self.pts.iter().enumerate() {
            if i == skip {
                continue;
            }
            for (ci, pi) in c.iter_mut().zip(p.iter()) {
                *ci += pi;
            }
        }
        c.iter_mut().for_each(|v| *v /= self.dim as f64);
        c
    }

    fn blend(c: &[f64], x: &[f64], t: f64) -> Vec<f64> {
        c.iter().zip(x.iter()).map(|(ci, xi)| ci + t * (xi - ci)).collect()
    }

    fn scale(&self) -> f64 {
        if self.pts.len() <= 1 {
            return self.step;
        }
        let (best, _, _) = self.order();
        self.pts
            .iter()
            .map(|p| {
                p.iter()
                    .zip(self.pts[best].iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    fn ask(&self) -> Vec<f64> {
        match &self.phase {
            NmPhase::Building { origin } => {
                if self.pts.is_empty() {
                    origin.clone()
                } else {
                    let axis = self.pts.len() - 1;
                    let mut x = origin.clone();
                    x[axis] += self.step;
                    x
                }
            }
            NmPhase::Reflect => {
                let (_, _, worst) = self.order();
                let c = self.centroid_excluding(worst);
                Self::blend(&c, &self.pts[worst], -1.0)
            }
            NmPhase::Expand { xr, .. } => {
                let (_, _, worst) = self.order();
                let c = self.centroid_excluding(worst);
                // xr = c + (c - xw); xe = c + 2 (c - xw)
                c.iter().zip(xr.iter()).map(|(ci, ri)| ci + 2.0 * (ri - ci)).collect()
            }
            NmPhase::ContractOutside { .. } => {
                let (_, _, worst) = self.order();
                let c = self.centroid_excluding(worst);
                Self::blend(&c, &self.pts[worst], -0.5)
            }
            NmPhase::ContractInside => {
                let (_, _, worst) = self.order();
                let c = self.centroid_excluding(worst);
                Self::blend(&c, &self.pts[worst], 0.5)
            }
            NmPhase::Shrink { next, anchor } => {
                Self::blend(&self.pts[*anchor], &self.pts[*next], 0.5)
            }
        }
    }

    fn replace_worst(&mut self, x: Vec<f64>, v: f64) {
        let (_, _, worst) = self.order();
        self.pts[worst] = x;
        self.vals[worst] = v;
    }

    fn tell(&mut self, x: Vec<f64>, v: f64) {
        match self.phase.clone() {
            NmPhase::Building { .. } => {
                self.pts.push(x);
                self.vals.push(v);
                if self.pts.len() == self.dim + 1 {
                    self.phase = NmPhase::Reflect;
                }
            }
            NmPhase::Reflect => {
                let (best, second_worst, worst) = self.order();
                if v < self.vals[best] {
                    self.phase = NmPhase::Expand { xr: x, fr: v };
                } else if v < self.vals[second_worst] {
                    self.replace_worst(x, v);
                    self.phase = NmPhase::Reflect;
                } else if v < self.vals[worst] {
                    // keep the original worst: the outside-contraction
                    // point is derived from it
                    self.phase = NmPhase::ContractOutside { fr: v };
                } else {
                    self.phase = NmPhase::ContractInside;
                }
            }
            NmPhase::Expand { xr, fr } => {
                if v < fr {
                    self.replace_worst(x, v);
                } else {
                    self.replace_worst(xr, fr);
                }
                self.phase = NmPhase::Reflect;
            }
            NmPhase::ContractOutside { fr } => {
                if v <= fr {
                    self.replace_worst(x, v);
                    self.phase = NmPhase::Reflect;
                } else {
                    self.start_shrink();
                }
            }
            NmPhase::ContractInside => {
                let (_, _, worst) = self.order();
                if v < self.vals[worst] {
                    self.replace_worst(x, v);
                    self.phase = NmPhase::Reflect;
                } else {
                    self.start_shrink();
                }
            }
            NmPhase::Shrink { next, anchor } => {
                self.pts[next] = x;
                self.vals[next] = v;
                let mut next = next + 1;
                if next == anchor {
                    next += 1;
                }
                self.phase = if next >= self.pts.len() {
                    NmPhase::Reflect
                } else {
                    NmPhase::Shrink { next, anchor }
                };
            }
        }
    }

    fn start_shrink(&mut self) {
        let (best, _, _) = self.order();
        let first = usize::from(best == 0);
        self.phase = NmPhase::Shrink {
            next: first,
            anchor: best,
        };
    }
}

// ---------------------------------------------------------------------------
// Shared driver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum MethodState {
    Trust(TrustState),
    Nm(NmState),
}

/// Resumable optimizer: repeatedly `ask` for parameters, evaluate them
/// outside, and `tell` the value back. One tell = one iteration.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    cfg: OptimizerConfig,
    trace: OptTrace,
    method: MethodState,
}

impl OptimizerState {
    pub fn new(x0: &[f64], cfg: OptimizerConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if x0.is_empty() {
            return Err(Error::EmptyInput("empty parameter vector".into()));
        }
        let method = match cfg.method {
            Method::Cobyla => MethodState::Trust(TrustState::new(x0.to_vec(), cfg.initial_step)),
            Method::NelderMead => MethodState::Nm(NmState::new(x0.to_vec(), cfg.initial_step)),
        };
        Ok(OptimizerState {
            trace: OptTrace::new(seed, cfg.initial_step),
            cfg,
            method,
        })
    }

    pub fn ask(&self) -> Vec<f64> {
        match &self.method {
            MethodState::Trust(s) => s.ask(),
            MethodState::Nm(s) => s.ask(),
        }
    }

    pub fn tell(&mut self, params: Vec<f64>, value: f64) {
        match &mut self.method {
            MethodState::Trust(s) => s.tell(params.clone(), value),
            MethodState::Nm(s) => s.tell(params.clone(), value),
        }
        self.trace.scale = match &self.method {
            MethodState::Trust(s) => s.rho,
            MethodState::Nm(s) => s.scale(),
        };
        self.trace.record(params, value);
    }

    /// Budget plus the configured termination rule.
    pub fn check_stop(&self) -> Option<StopReason> {
        if self.trace.evals.len() >= self.cfg.max_evals {
            return Some(StopReason::Budget);
        }
        if !self.trace.evals.is_empty() && should_stop(&self.trace, &self.cfg.termination) {
            return Some(match self.cfg.termination {
                Termination::DefaultTol { .. } => StopReason::DefaultTol,
                Termination::SlidingWindow { .. } => StopReason::SlidingWindow,
            });
        }
        None
    }

    pub fn finish(&mut self, reason: StopReason) {
        self.trace.terminated_by = Some(reason);
    }

    pub fn trace(&self) -> &OptTrace {
        &self.trace
    }

    pub fn into_trace(self) -> OptTrace {
        self.trace
    }

    pub fn scale(&self) -> f64 {
        self.trace.scale
    }
}

/// Runs the configured method to termination. One objective evaluation is
/// one iteration; failures propagate with the partial trace attached.
pub fn minimize(
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<OptTrace> {
    let mut state = OptimizerState::new(x0, *cfg, seed)?;
    loop {
        if let Some(reason) = state.check_stop() {
            state.finish(reason);
            return Ok(state.into_trace());
        }
        let x = state.ask();
        match objective(&x) {
            Ok(v) => state.tell(x, v),
            Err(e) => {
                return Err(Error::Objective {
                    source: Box::new(e),
                    partial: Box::new(state.into_trace()),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(center: Vec<f64>) -> impl FnMut(&[f64]) -> Result<f64> {
        move |x: &[f64]| {
            Ok(x.iter()
                .zip(center.iter())
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum())
        }
    }

    #[test]
    fn converges_on_one_dimensional_bowl() {
        for method in [Method::Cobyla, Method::NelderMead] {
            let cfg = OptimizerConfig::default_tol(method, 1.0, 200, 1e-6);
            let trace = minimize(quadratic(vec![2.0]), &[0.0], &cfg, 0).unwrap();
            assert!(
                trace.best_value <= 1e-4,
                "{method:?} best {}",
                trace.best_value
            );
        }
    }

    #[test]
    fn converges_on_multidim_quadratics() {
        for method in [Method::Cobyla, Method::NelderMead] {
            for dim in [2usize, 4, 8] {
                let center: Vec<f64> = (0..dim).map(|i| 0.5 + 0.25 * i as f64).collect();
                let cfg = OptimizerConfig::default_tol(method, 1.0, 500, 1e-7);
                let trace = minimize(quadratic(center), &vec![0.0; dim], &cfg, 0).unwrap();
                assert!(
                    trace.best_value <= 1e-3,
                    "{method:?} dim {dim}: best {}",
                    trace.best_value
                );
            }
        }
    }

    #[test]
    fn constant_objective_stops_at_window_plus_one() {
        let cfg = OptimizerConfig {
            method: Method::Cobyla,
            initial_step: 1.0,
            max_evals: 10_000,
            termination: Termination::SlidingWindow {
                window: 100,
                min_rel_improvement: 0.04,
            },
        };
        let trace = minimize(|_| Ok(1.0), &[0.0, 0.0], &cfg, 0).unwrap();
        assert_eq!(trace.iteration_count, 101);
        assert_eq!(trace.terminated_by, Some(StopReason::SlidingWindow));
    }

    #[test]
    fn budget_of_one_gives_single_eval() {
        let cfg = OptimizerConfig {
            max_evals: 1,
            ..OptimizerConfig::default()
        };
        let trace = minimize(quadratic(vec![1.0]), &[0.0], &cfg, 0).unwrap();
        assert_eq!(trace.iteration_count, 1);
        assert_eq!(trace.terminated_by, Some(StopReason::Budget));
    }

    #[test]
    fn sliding_window_rule_arithmetic() {
        let mut trace = OptTrace::new(0, 1.0);
        for _ in 0..100 {
            trace.record(vec![0.0], -1.0);
        }
        trace.record(vec![0.0], -1.05);
        let rule = Termination::SlidingWindow {
            window: 100,
            min_rel_improvement: 0.04,
        };
        // improvement 0.05 >= 0.04 -> keep going
        assert!(!should_stop(&trace, &rule));

        let mut stalled = OptTrace::new(0, 1.0);
        for _ in 0..100 {
            stalled.record(vec![0.0], -1.0);
        }
        stalled.record(vec![0.0], -1.01);
        assert!(should_stop(&stalled, &rule));

        let mut short = OptTrace::new(0, 1.0);
        short.record(vec![0.0], -1.0);
        assert!(!should_stop(&short, &rule));
    }

    #[test]
    fn traces_are_deterministic() {
        let cfg = OptimizerConfig::default();
        let noisy = |x: &[f64]| {
            // deterministic pseudo-noise from the point itself
            let h = x.iter().fold(0.0, |acc, v| acc + (v * 1337.0).sin());
            Ok(x.iter().map(|v| v * v).sum::<f64>() + 0.01 * h)
        };
        let a = minimize(noisy, &[0.3, -0.7], &cfg, 1).unwrap();
        let b = minimize(noisy, &[0.3, -0.7], &cfg, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn best_value_is_running_minimum() {
        let cfg = OptimizerConfig::default_tol(Method::Cobyla, 1.0, 120, 1e-5);
        let trace = minimize(quadratic(vec![1.0, -1.0, 0.5]), &[0.0; 3], &cfg, 0).unwrap();
        let mut best = f64::INFINITY;
        for e in &trace.evals {
            best = best.min(e.value);
        }
        assert_eq!(best, trace.best_value);
    }

    #[test]
    fn objective_failure_carries_partial_trace() {
        let cfg = OptimizerConfig::default();
        let mut count = 0;
        let failing = move |x: &[f64]| {
            count += 1;
            if count > 3 {
                Err(Error::Domain("boom".into()))
            } else {
                Ok(x[0] * x[0])
            }
        };
        match minimize(failing, &[1.0], &cfg, 0) {
            Err(Error::Objective { partial, .. }) => assert_eq!(partial.iteration_count, 3),
            other => panic!("expected objective failure, got {other:?}"),
        }
    }
}
