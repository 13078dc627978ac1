//! Independent reference computations shared by the integration suites.
#![allow(dead_code)]

use ba_swarm::{BaType, BasisConfig, Cell, ConcentrationMap, Sign};

pub const TOL: f64 = 1e-12;

pub fn f1(u: &[f64]) -> f64 {
    u[0] * u[0]
}

pub fn f2(u: &[f64]) -> f64 {
    (3.0 * u[0]).sin()
}

pub fn f3(u: &[f64]) -> f64 {
    (-2.0 * u[0]).exp()
}

/// `(name, f, sup |f'| on [0, 1])`
pub fn paper_functions() -> [(&'static str, fn(&[f64]) -> f64, f64); 3] {
    [
        ("u^2", f1, 2.0),
        ("sin(3u)", f2, 3.0),
        ("exp(-2u)", f3, 2.0),
    ]
}

/// Cell of `x` in `q` equal intervals of `[a, b]` by linear scan:
/// the first k with `x < a + k·(b − a)/q`, else the last cell.
pub fn scan_cell(x: f64, a: f64, b: f64, q: usize) -> usize {
    (1..=q)
        .find(|&k| x < a + (b - a) * k as f64 / q as f64)
        .unwrap_or(q)
}

/// Midpoint of cell `k` of `q` equal intervals of `[a, b]`.
pub fn uniform_mid(k: usize, a: f64, b: f64, q: usize) -> f64 {
    a + (b - a) * (k as f64 - 0.5) / q as f64
}

/// Literal `Σ_types (1/R)·C·B(u)` over every agent type of the partition.
pub fn expansion_by_sum(map: &ConcentrationMap, cfg: &BasisConfig, u: &[f64]) -> f64 {
    let mut total = 0.0;
    for cell in cfg.partition.cells() {
        for sign in [Sign::Minus, Sign::Plus] {
            let ba = BaType::new(sign, cell.clone());
            let b = ba_swarm::b_eval(&ba, cfg, u).unwrap();
            total += map.get(&ba) * b / cfg.clearance();
        }
    }
    total
}

/// Every `q ∈ ∏[1, q_max]` in lexicographic order; keeps the first vector
/// reaching the smallest product among those with `Σ Lᵢ·(bᵢ−aᵢ)/qᵢ ≤ ε`.
pub fn enumerate_minimal(
    bounds: &[(f64, f64)],
    grad_norms: &[f64],
    epsilon: f64,
    q_max: &[usize],
) -> Option<(Vec<usize>, u64)> {
    let n = bounds.len();
    let mut q = vec![1usize; n];
    let mut best: Option<(Vec<usize>, u64)> = None;
    loop {
        let bound: f64 = (0..n)
            .map(|i| grad_norms[i] * ((bounds[i].1 - bounds[i].0) / q[i] as f64))
            .sum();
        if bound <= epsilon {
            let types = 2 * q.iter().map(|&k| k as u64).product::<u64>();
            if best.as_ref().is_none_or(|(_, b)| types < *b) {
                best = Some((q.clone(), types));
            }
        }
        let mut d = n;
        loop {
            if d == 0 {
                return best;
            }
            d -= 1;
            if q[d] < q_max[d] {
                q[d] += 1;
                break;
            }
            q[d] = 1;
        }
    }
}

pub fn cell1(k: usize) -> Cell {
    Cell::new(vec![k])
}
