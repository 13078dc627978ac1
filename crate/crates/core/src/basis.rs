//! Input-domain partitions, B-functions and the concentration programming
//! rule that turns a target function into a swarm.
//!
//! A B-function of type `(s, k₁…kₙ)` is the crisp indicator of one grid cell
//! scaled by `s·α`. Programming a target `f` sets the concentration of the
//! agent type whose sign matches `f` at the cell midpoint to `(R/α)·|f|`,
//! so that `Σ (1/R)·C·B(u)` reproduces `f` at the midpoint of whichever
//! cell contains `u`.
//!
//! Cells are half-open `[û^{k-1}, û^k)` per dimension, except the last
//! interval which also owns the upper domain bound. Cell indices are
//! 1-based.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Result, SwarmError};
use crate::target::TargetFn;

/// Per-dimension breakpoints `û⁰ < û¹ < … < û^q` covering `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    breakpoints: Vec<Vec<f64>>,
}

impl Partition {
    pub fn new(breakpoints: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(SwarmError::InvalidPartition(
                "at least one input dimension is required".into(),
            ));
        }
        for (dim, points) in breakpoints.iter().enumerate() {
            if points.len() < 2 {
                return Err(SwarmError::InvalidPartition(format!(
                    "dimension {dim} needs at least two breakpoints (q >= 1)"
                )));
            }
            if points.iter().any(|x| !x.is_finite()) {
                return Err(SwarmError::InvalidPartition(format!(
                    "dimension {dim} has a non-finite breakpoint"
                )));
            }
            if let Some(k) = points.windows(2).position(|w| w[0] >= w[1]) {
                return Err(SwarmError::InvalidPartition(format!(
                    "dimension {dim}: breakpoints must be strictly increasing (index {})",
                    k + 1
                )));
            }
        }
        Ok(Self { breakpoints })
    }

    /// Equal-width intervals: `q_i` cells on `[a_i, b_i]`.
    pub fn uniform(bounds: &[(f64, f64)], counts: &[usize]) -> Result<Self> {
        if bounds.len() != counts.len() {
            return Err(SwarmError::InvalidPartition(format!(
                "{} bounds but {} interval counts",
                bounds.len(),
                counts.len()
            )));
        }
        let mut breakpoints = Vec::with_capacity(bounds.len());
        for (dim, (&(a, b), &q)) in bounds.iter().zip(counts).enumerate() {
            if q == 0 {
                return Err(SwarmError::InvalidPartition(format!(
                    "dimension {dim}: interval count must be at least 1"
                )));
            }
            if !(a < b) {
                return Err(SwarmError::InvalidPartition(format!(
                    "dimension {dim}: lower bound {a} must be below upper bound {b}"
                )));
            }
            let mut points: Vec<f64> = (0..=q).map(|k| a + (b - a) * k as f64 / q as f64).collect();
            points[q] = b;
            breakpoints.push(points);
        }
        Self::new(breakpoints)
    }

    pub fn dims(&self) -> usize {
        self.breakpoints.len()
    }

    /// Interval count `q_i` for every dimension.
    pub fn counts(&self) -> Vec<usize> {
        self.breakpoints.iter().map(|p| p.len() - 1).collect()
    }

    pub fn breakpoints(&self, dim: usize) -> &[f64] {
        &self.breakpoints[dim]
    }

    pub fn bounds(&self, dim: usize) -> (f64, f64) {
        let p = &self.breakpoints[dim];
        (p[0], p[p.len() - 1])
    }

    /// Widest interval in a dimension (the `h_i` of the error bound).
    pub fn max_width(&self, dim: usize) -> f64 {
        self.breakpoints[dim]
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn num_cells(&self) -> usize {
        self.counts().iter().product()
    }

    /// Number of distinct agent types, two signs per cell.
    pub fn num_types(&self) -> usize {
        2 * self.num_cells()
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        self.check_domain(u).is_ok()
    }

    fn check_domain(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dims() {
            return Err(SwarmError::DimensionMismatch {
                expected: self.dims(),
                got: u.len(),
            });
        }
        for (dim, &x) in u.iter().enumerate() {
            let (lower, upper) = self.bounds(dim);
            // NaN fails both comparisons and lands here too.
            if !(x >= lower && x <= upper) {
                return Err(SwarmError::OutOfDomain {
                    dim,
                    value: x,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    /// The unique cell containing `u`.
    pub fn cell_index(&self, u: &[f64]) -> Result<Cell> {
        self.check_domain(u)?;
        let index = u
            .iter()
            .zip(&self.breakpoints)
            .map(|(&x, points)| {
                let q = points.len() - 1;
                points.partition_point(|&p| p <= x).min(q)
            })
            .collect();
        Ok(Cell(index))
    }

    fn check_cell(&self, cell: &Cell) -> Result<()> {
        let counts = self.counts();
        let ok = cell.0.len() == counts.len()
            && cell.0.iter().zip(&counts).all(|(&k, &q)| k >= 1 && k <= q);
        if ok {
            Ok(())
        } else {
            Err(SwarmError::CellOutOfRange {
                index: cell.0.clone(),
                counts,
            })
        }
    }

    pub fn contains_cell(&self, cell: &Cell) -> bool {
        self.check_cell(cell).is_ok()
    }

    /// Center of a cell, `((û^{k-1} + û^k)/2)` per dimension.
    pub fn midpoint(&self, cell: &Cell) -> Result<Vec<f64>> {
        self.check_cell(cell)?;
        Ok(cell
            .0
            .iter()
            .zip(&self.breakpoints)
            .map(|(&k, points)| (points[k - 1] + points[k]) / 2.0)
            .collect())
    }

    /// All cells in lexicographic order.
    pub fn cells(&self) -> Cells {
        Cells {
            counts: self.counts(),
            next: Some(vec![1; self.dims()]),
        }
    }
}

/// Lexicographic iterator over the cells of a partition.
pub struct Cells {
    counts: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Cells {
    type Item = Cell;

    fn next(&mut self) -> Option<Cell> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for d in (0..succ.len()).rev() {
            if succ[d] < self.counts[d] {
                succ[d] += 1;
                self.next = Some(succ);
                break;
            }
            succ[d] = 1;
        }
        Some(Cell(current))
    }
}

/// 1-based multi-index `(k₁…kₙ)` naming one cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell(pub Vec<usize>);

impl Cell {
    pub fn new(index: Vec<usize>) -> Self {
        Self(index)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

/// Release (`+1`) or uptake (`-1`) agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Basis-agent type `s k₁…kₙ`. Displays as `+1,3` / `-1,2,4`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaType {
    pub sign: Sign,
    pub cell: Cell,
}

impl BaType {
    pub fn new(sign: Sign, cell: Cell) -> Self {
        Self { sign, cell }
    }
}

impl fmt::Display for BaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.sign, self.cell)
    }
}

/// Partition plus the agent flow rate `α` and the clearance rate `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisConfig {
    pub partition: Partition,
    alpha: f64,
    clearance: f64,
}

impl BasisConfig {
    pub fn new(partition: Partition, alpha: f64, clearance: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SwarmError::InvalidParameter(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if !(clearance > 0.0 && clearance.is_finite()) {
            return Err(SwarmError::InvalidParameter(format!(
                "clearance must be positive and finite, got {clearance}"
            )));
        }
        Ok(Self {
            partition,
            alpha,
            clearance,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    /// Output time constant `1/R`.
    pub fn time_constant(&self) -> f64 {
        1.0 / self.clearance
    }
}

/// Sparse per-type concentrations. Zero entries are not stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConcentrationMap {
    entries: BTreeMap<BaType, f64>,
}

impl ConcentrationMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the concentration of one type. Rejects negative or non-finite
    /// values and a nonzero value when the opposite sign of the same cell
    /// is already populated.
    pub fn set(&mut self, ba: BaType, concentration: f64) -> Result<()> {
        if !(concentration >= 0.0 && concentration.is_finite()) {
            return Err(SwarmError::InvalidParameter(format!(
                "concentration of {ba} must be finite and nonnegative, got {concentration}"
            )));
        }
        if concentration == 0.0 {
            self.entries.remove(&ba);
            return Ok(());
        }
        let twin = BaType::new(ba.sign.opposite(), ba.cell.clone());
        if self.entries.contains_key(&twin) {
            return Err(SwarmError::InvalidParameter(format!(
                "cell {} already has a nonzero {} concentration",
                ba.cell, twin.sign
            )));
        }
        self.entries.insert(ba, concentration);
        Ok(())
    }

    pub fn get(&self, ba: &BaType) -> f64 {
        self.entries.get(ba).copied().unwrap_or(0.0)
    }

    /// `C₊ − C₋` for one cell.
    pub fn net(&self, cell: &Cell) -> f64 {
        let plus = self.get(&BaType::new(Sign::Plus, cell.clone()));
        let minus = self.get(&BaType::new(Sign::Minus, cell.clone()));
        plus - minus
    }

    /// The populated type for a cell, if any.
    pub fn active_type(&self, cell: &Cell) -> Option<BaType> {
        [Sign::Plus, Sign::Minus]
            .into_iter()
            .map(|s| BaType::new(s, cell.clone()))
            .find(|ba| self.entries.contains_key(ba))
    }

    /// Nonzero entries in `(sign, lexicographic cell)` order.
    pub fn iter(&self) -> impl Iterator<Item = (&BaType, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when every stored type names a cell of `partition`.
    pub fn fits(&self, partition: &Partition) -> bool {
        self.entries
            .keys()
            .all(|ba| partition.contains_cell(&ba.cell))
    }
}

/// Value of one B-function: `s·α` inside its cell, zero elsewhere.
pub fn b_eval(ba: &BaType, cfg: &BasisConfig, u: &[f64]) -> Result<f64> {
    let cell = cfg.partition.cell_index(u)?;
    Ok(if cell == ba.cell {
        ba.sign.value() * cfg.alpha
    } else {
        0.0
    })
}

pub(crate) fn eval_checked<F: TargetFn + ?Sized>(f: &F, u: &[f64]) -> Result<f64> {
    let y = f.eval(u);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(SwarmError::TargetEvaluation { point: u.to_vec() })
    }
}

/// Programs a swarm for `f`: each cell gets `(R/α)·|f(midpoint)|` agents of
/// the sign of `f(midpoint)`; a zero midpoint value leaves the cell empty.
pub fn program<F: TargetFn + ?Sized>(f: &F, cfg: &BasisConfig) -> Result<ConcentrationMap> {
    let gain = cfg.clearance / cfg.alpha;
    let mut map = ConcentrationMap::new();
    for cell in cfg.partition.cells() {
        let mid = cfg.partition.midpoint(&cell)?;
        let value = eval_checked(f, &mid)?;
        let sign = if value > 0.0 {
            Sign::Plus
        } else if value < 0.0 {
            Sign::Minus
        } else {
            continue;
        };
        map.entries
            .insert(BaType::new(sign, cell), gain * value.abs());
    }
    Ok(map)
}

/// Swarm output `Σ (1/R)·C·B(u)`. Only the cell containing `u` contributes.
pub fn approximate(map: &ConcentrationMap, cfg: &BasisConfig, u: &[f64]) -> Result<f64> {
    let cell = cfg.partition.cell_index(u)?;
    Ok(map.net(&cell) * cfg.alpha / cfg.clearance)
}

/// Uniform sample grid over the partition's domain, `samples_per_dim`
/// points per dimension including both bounds.
pub fn sample_grid(partition: &Partition, samples_per_dim: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = (0..partition.dims())
        .map(|d| {
            let (a, b) = partition.bounds(d);
            let m = samples_per_dim.max(2);
            let mut xs: Vec<f64> = (0..m)
                .map(|j| a + (b - a) * j as f64 / (m - 1) as f64)
                .collect();
            xs[m - 1] = b;
            xs
        })
        .collect();
    let mut points = vec![Vec::with_capacity(axes.len())];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points
}

/// Default grid density for sup-norm estimates.
pub const DEFAULT_SAMPLES_PER_DIM: usize = 1001;

/// Max of `|f(u) − approximate(u)|` over a uniform sample grid. This is a
/// lower estimate of the true sup norm that tightens as the grid refines.
pub fn sup_error<F: TargetFn + ?Sized>(
    f: &F,
    map: &ConcentrationMap,
    cfg: &BasisConfig,
    samples_per_dim: usize,
) -> Result<f64> {
    if samples_per_dim < 2 {
        return Err(SwarmError::InvalidParameter(
            "sup_error needs at least 2 samples per dimension".into(),
        ));
    }
    let mut worst: f64 = 0.0;
    for u in sample_grid(&cfg.partition, samples_per_dim) {
        let exact = eval_checked(f, &u)?;
        let approx = approximate(map, cfg, &u)?;
        worst = worst.max((exact - approx).abs());
    }
    Ok(worst)
}
