//! Sizing the smallest uniform grid whose first-order error bound meets a
//! requested accuracy.
//!
//! For a continuously differentiable target the midpoint expansion obeys
//! `|f − f̂| ≤ Σ Lᵢ·hᵢ` with `Lᵢ = ‖∂f/∂uᵢ‖∞` and `hᵢ` the widest interval
//! in dimension `i`. With `qᵢ` intervals the loosest admissible width is
//! `(bᵢ − aᵢ)/qᵢ`, so minimizing the agent-type count `2·∏qᵢ` reduces to a
//! search over integer interval counts.

use crate::basis::{eval_checked, program, sup_error, BasisConfig, Partition};
use crate::error::{Result, SwarmError};
use crate::target::TargetFn;

/// Largest dimension count the exhaustive solver accepts.
pub const MAX_DIMS: usize = 3;

/// Default per-dimension search cap for an `n`-input problem.
pub fn default_q_max(dims: usize) -> usize {
    match dims {
        1 => 10_000,
        2 => 1_000,
        _ => 100,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    pub bounds: Vec<(f64, f64)>,
    pub epsilon: f64,
    pub grad_norms: Vec<f64>,
    pub q_max: Vec<usize>,
}

impl DesignProblem {
    pub fn new(
        bounds: Vec<(f64, f64)>,
        epsilon: f64,
        grad_norms: Vec<f64>,
        q_max: Vec<usize>,
    ) -> Result<Self> {
        let n = bounds.len();
        if n == 0 {
            return Err(SwarmError::InvalidParameter("no input dimensions".into()));
        }
        if grad_norms.len() != n || q_max.len() != n {
            return Err(SwarmError::InvalidParameter(format!(
                "{n} bounds, {} gradient norms, {} caps",
                grad_norms.len(),
                q_max.len()
            )));
        }
        if let Some((a, b)) = bounds
            .iter()
            .find(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(SwarmError::InvalidParameter(format!(
                "bounds must satisfy a < b, got [{a}, {b}]"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(SwarmError::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if grad_norms.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(SwarmError::InvalidParameter(
                "gradient norms must be finite and nonnegative".into(),
            ));
        }
        if q_max.contains(&0) {
            return Err(SwarmError::InvalidParameter(
                "q_max must be at least 1".into(),
            ));
        }
        Ok(Self {
            bounds,
            epsilon,
            grad_norms,
            q_max,
        })
    }

    /// Problem with the default search caps for its dimension count.
    pub fn with_default_caps(
        bounds: Vec<(f64, f64)>,
        epsilon: f64,
        grad_norms: Vec<f64>,
    ) -> Result<Self> {
        let caps = vec![default_q_max(bounds.len()); bounds.len()];
        Self::new(bounds, epsilon, grad_norms, caps)
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    /// Widths `(bᵢ − aᵢ)/qᵢ`.
    pub fn widths(&self, q: &[usize]) -> Vec<f64> {
        self.bounds
            .iter()
            .zip(q)
            .map(|(&(a, b), &qi)| (b - a) / qi as f64)
            .collect()
    }

    /// `Σ Lᵢ·(bᵢ − aᵢ)/qᵢ`, summed in dimension order.
    pub fn bound_value(&self, q: &[usize]) -> f64 {
        self.grad_norms
            .iter()
            .zip(self.widths(q))
            .map(|(l, h)| l * h)
            .sum()
    }

    pub fn is_admissible(&self, q: &[usize]) -> bool {
        self.bound_value(q) <= self.epsilon
    }

    pub fn solution_for(&self, q: Vec<usize>) -> DesignSolution {
        DesignSolution {
            h: self.widths(&q),
            n_types: 2 * q.iter().map(|&k| k as u64).product::<u64>(),
            bound_value: self.bound_value(&q),
            q,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    pub q: Vec<usize>,
    pub h: Vec<f64>,
    pub n_types: u64,
    pub bound_value: f64,
}

/// Central differences on a uniform grid (one-sided at the edges), returning
/// the largest observed `|∂f/∂uᵢ|` per dimension. A sampled lower estimate of
/// the true sup norm.
pub fn estimate_grad_norms<F: TargetFn + ?Sized>(
    f: &F,
    bounds: &[(f64, f64)],
    samples_per_dim: usize,
) -> Result<Vec<f64>> {
    if samples_per_dim < 3 {
        return Err(SwarmError::InvalidParameter(
            "gradient estimation needs at least 3 samples per dimension".into(),
        ));
    }
    let m = samples_per_dim;
    let n = bounds.len();
    let axis = |d: usize, j: usize| {
        let (a, b) = bounds[d];
        if j == m - 1 {
            b
        } else {
            a + (b - a) * j as f64 / (m - 1) as f64
        }
    };
    let total = m.checked_pow(n as u32).ok_or_else(|| {
        SwarmError::InvalidParameter("gradient estimation grid is too large".into())
    })?;

    // Grid values in row-major order (last dimension fastest).
    let mut values = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    let mut point = vec![0.0; n];
    for _ in 0..total {
        for d in 0..n {
            point[d] = axis(d, idx[d]);
        }
        values.push(eval_checked(f, &point)?);
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
        }
    }

    let mut norms = vec![0.0f64; n];
    let mut stride = 1;
    for d in (0..n).rev() {
        for flat in 0..total {
            let j = (flat / stride) % m;
            let (lo, hi) = if j == 0 {
                (j, j + 1)
            } else if j == m - 1 {
                (j - 1, j)
            } else {
                (j - 1, j + 1)
            };
            let f_lo = values[flat - (j - lo) * stride];
            let f_hi = values[flat + (hi - j) * stride];
            let slope = (f_hi - f_lo) / (axis(d, hi) - axis(d, lo));
            norms[d] = norms[d].max(slope.abs());
        }
        stride *= m;
    }
    Ok(norms)
}

/// Smallest `2·∏qᵢ` over `1 ≤ qᵢ ≤ q_maxᵢ` subject to
/// `Σ Lᵢ·(bᵢ − aᵢ)/qᵢ ≤ ε`; ties go to the lexicographically smallest `q`.
///
/// Depth-first over the leading dimensions with the last dimension solved
/// directly (the objective is increasing in it), pruning any branch whose
/// partial product already reaches the incumbent.
pub fn near_minimal_types(problem: &DesignProblem) -> Result<DesignSolution> {
    let n = problem.dims();
    if n > MAX_DIMS {
        return Err(SwarmError::InvalidParameter(format!(
            "exhaustive design supports at most {MAX_DIMS} inputs, got {n}"
        )));
    }
    if !problem.is_admissible(&problem.q_max) {
        return Err(SwarmError::Infeasible {
            best_bound: problem.bound_value(&problem.q_max),
            epsilon: problem.epsilon,
        });
    }
    let mut search = Search {
        problem,
        q: vec![1; n],
        best: None,
    };
    search.descend(0, 1);
    let (_, q) = search.best.expect("q_max is admissible");
    Ok(problem.solution_for(q))
}

struct Search<'a> {
    problem: &'a DesignProblem,
    q: Vec<usize>,
    best: Option<(u128, Vec<usize>)>,
}

impl Search<'_> {
    fn beats_best(&self, product: u128) -> bool {
        self.best.as_ref().is_none_or(|(p, _)| product < *p)
    }

    fn descend(&mut self, dim: usize, product: u128) {
        let n = self.q.len();
        if dim == n - 1 {
            if let Some(k) = self.smallest_last() {
                let total = product * k as u128;
                if self.beats_best(total) {
                    self.q[dim] = k;
                    self.best = Some((total, self.q.clone()));
                }
            }
            return;
        }
        for k in 1..=self.problem.q_max[dim] {
            let partial = product * k as u128;
            if !self.beats_best(partial) {
                break;
            }
            self.q[dim] = k;
            // Remaining dimensions at their caps is the loosest completion.
            let cap_check: Vec<usize> = self.q[..=dim]
                .iter()
                .copied()
                .chain(self.problem.q_max[dim + 1..].iter().copied())
                .collect();
            if !self.problem.is_admissible(&cap_check) {
                continue;
            }
            self.descend(dim + 1, partial);
        }
        self.q[dim] = 1;
    }

    /// Smallest admissible count for the last dimension given the others.
    fn smallest_last(&mut self) -> Option<usize> {
        let last = self.q.len() - 1;
        let cap = self.problem.q_max[last];
        let (a, b) = self.problem.bounds[last];
        let weight = self.problem.grad_norms[last] * (b - a);
        self.q[last] = 1;
        let used = self.problem.bound_value(&self.q) - weight;
        let slack = self.problem.epsilon - used;
        let mut k = if weight == 0.0 {
            1
        } else if slack <= 0.0 {
            cap
        } else {
            ((weight / slack).ceil() as usize).clamp(1, cap)
        };
        // Settle rounding against the exact admissibility test.
        self.q[last] = k;
        while !self.problem.is_admissible(&self.q) {
            if k == cap {
                return None;
            }
            k += 1;
            self.q[last] = k;
        }
        while k > 1 {
            self.q[last] = k - 1;
            if !self.problem.is_admissible(&self.q) {
                break;
            }
            k -= 1;
        }
        self.q[last] = k;
        Some(k)
    }
}

/// Result of checking a design against a dense-grid error measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub solution: DesignSolution,
    pub epsilon: f64,
    pub measured_sup_error: f64,
    pub pass: bool,
}

/// Slack for comparing a sampled error with the analytic bound.
const BOUND_SLACK: f64 = 1e-12;

fn measure<F: TargetFn + ?Sized>(
    f: &F,
    bounds: &[(f64, f64)],
    q: &[usize],
    samples_per_dim: usize,
) -> Result<f64> {
    let cfg = BasisConfig::new(Partition::uniform(bounds, q)?, 1.0, 1.0)?;
    let map = program(f, &cfg)?;
    sup_error(f, &map, &cfg, samples_per_dim)
}

/// Programs `f` on the uniform grid of `solution` and checks
/// `measured ≤ bound ≤ ε`.
pub fn verify_design<F: TargetFn + ?Sized>(
    f: &F,
    problem: &DesignProblem,
    solution: &DesignSolution,
    samples_per_dim: usize,
) -> Result<DesignReport> {
    let measured = measure(f, &problem.bounds, &solution.q, samples_per_dim)?;
    let pass =
        measured <= solution.bound_value + BOUND_SLACK && solution.bound_value <= problem.epsilon;
    Ok(DesignReport {
        solution: solution.clone(),
        epsilon: problem.epsilon,
        measured_sup_error: measured,
        pass,
    })
}

/// Coordinate descent from `solution.q` that lowers each `qᵢ` while the
/// measured sup error stays within `ε`. Exposes how loose the analytic
/// bound is; the result carries no optimality guarantee.
pub fn coarsest_measured<F: TargetFn + ?Sized>(
    f: &F,
    problem: &DesignProblem,
    solution: &DesignSolution,
    samples_per_dim: usize,
) -> Result<(Vec<usize>, f64)> {
    let mut q = solution.q.clone();
    let mut current = measure(f, &problem.bounds, &q, samples_per_dim)?;
    loop {
        let mut improved = false;
        for d in 0..q.len() {
            while q[d] > 1 {
                q[d] -= 1;
                let err = measure(f, &problem.bounds, &q, samples_per_dim)?;
                if err <= problem.epsilon {
                    current = err;
                    improved = true;
                } else {
                    q[d] += 1;
                    break;
                }
            }
        }
        if !improved {
            return Ok((q, current));
        }
    }
}
