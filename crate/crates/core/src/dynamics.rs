//! Well-mixed output dynamics `v' = −R·v + Σ C·B(u)`.
//!
//! While the input stays inside one cell the drive term is constant, so the
//! flow over a step is the closed-form exponential relaxation toward
//! `drive/R`. [`simulate`] aligns its steps with program switches, input
//! jumps and ramp cell crossings so the drive is constant on every step and
//! the trace is exact up to rounding.

use serde::{Deserialize, Serialize};

use crate::basis::{approximate, BasisConfig, ConcentrationMap, Partition};
use crate::error::{Result, SwarmError};

/// Net release rate `Σ C·B(u)` at input `u`, i.e. `α·(C₊ − C₋)` of the
/// containing cell. Equals `R` times the programmed midpoint value.
pub fn drive(map: &ConcentrationMap, cfg: &BasisConfig, u: &[f64]) -> Result<f64> {
    let cell = cfg.partition.cell_index(u)?;
    Ok(cfg.alpha() * map.net(&cell))
}

/// `v0·e^{−R·t} + target·(1 − e^{−R·t})`
pub fn analytic_v(v0: f64, target: f64, rate: f64, elapsed: f64) -> f64 {
    let decay = (-rate * elapsed).exp();
    v0 * decay + target * (1.0 - decay)
}

/// `(target − v0)·e^{−R·t}`; never larger in magnitude than `|target − v0|`.
pub fn transient_error(v0: f64, target: f64, rate: f64, elapsed: f64) -> f64 {
    (target - v0) * (-rate * elapsed).exp()
}

/// Exact update of `v` over `dt` with the drive of `u` held fixed.
pub fn step(v: f64, map: &ConcentrationMap, cfg: &BasisConfig, u: &[f64], dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(SwarmError::InvalidParameter(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let r = cfg.clearance();
    Ok(analytic_v(v, drive(map, cfg, u)? / r, r, dt))
}

/// Test input `u(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSignal {
    Constant {
        value: Vec<f64>,
    },
    /// `levels[0]` before `switch_times[0]`, `levels[j]` from
    /// `switch_times[j-1]` on.
    Step {
        levels: Vec<Vec<f64>>,
        switch_times: Vec<f64>,
    },
    /// Linear from `start` at `t_start` to `end` at `t_end`, held outside.
    Ramp {
        start: Vec<f64>,
        end: Vec<f64>,
        t_start: f64,
        t_end: f64,
    },
    /// Linear interpolation through `(times[j], values[j])`, held outside
    /// the knot range.
    PiecewiseLinear {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    /// Zero-order hold through `(times[j], values[j])`; `values[0]` before
    /// the first sample.
    Sampled {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

impl InputSignal {
    pub fn constant(value: Vec<f64>) -> Self {
        Self::Constant { value }
    }

    pub fn dims(&self) -> usize {
        match self {
            Self::Constant { value } => value.len(),
            Self::Step { levels, .. } => levels.first().map_or(0, Vec::len),
            Self::Ramp { start, .. } => start.len(),
            Self::PiecewiseLinear { values, .. } | Self::Sampled { values, .. } => {
                values.first().map_or(0, Vec::len)
            }
        }
    }

    /// Checks shape and that every emitted value lies in the partition's
    /// domain. Ramps only need their endpoints checked since the domain is a
    /// box.
    pub fn validate(&self, partition: &Partition) -> std::result::Result<(), String> {
        let dims = partition.dims();
        let check = |label: &str, v: &[f64]| -> std::result::Result<(), String> {
            if v.len() != dims {
                return Err(format!(
                    "{label} has {} components, expected {dims}",
                    v.len()
                ));
            }
            if !partition.contains(v) {
                return Err(format!("{label} {v:?} lies outside the input domain"));
            }
            Ok(())
        };
        let increasing = |label: &str, ts: &[f64]| -> std::result::Result<(), String> {
            if ts.iter().any(|t| !t.is_finite()) {
                return Err(format!("{label} must be finite"));
            }
            if ts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("{label} must be strictly increasing"));
            }
            Ok(())
        };
        match self {
            Self::Constant { value } => check("value", value),
            Self::Step {
                levels,
                switch_times,
            } => {
                if levels.len() != switch_times.len() + 1 {
                    return Err(format!(
                        "step needs one more level than switch times ({} levels, {} switch times)",
                        levels.len(),
                        switch_times.len()
                    ));
                }
                increasing("switch_times", switch_times)?;
                levels
                    .iter()
                    .enumerate()
                    .try_for_each(|(j, l)| check(&format!("levels[{j}]"), l))
            }
            Self::Ramp {
                start,
                end,
                t_start,
                t_end,
            } => {
                if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
                    return Err(format!(
                        "ramp needs t_start < t_end, got {t_start} and {t_end}"
                    ));
                }
                check("start", start)?;
                check("end", end)
            }
            Self::PiecewiseLinear { times, values } | Self::Sampled { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(format!(
                        "input needs matching nonempty times and values ({} vs {})",
                        times.len(),
                        values.len()
                    ));
                }
                increasing("times", times)?;
                values
                    .iter()
                    .enumerate()
                    .try_for_each(|(j, v)| check(&format!("values[{j}]"), v))
            }
        }
    }

    /// `u(t)`; right-continuous at jumps.
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        match self {
            Self::Constant { value } => value.clone(),
            Self::Step {
                levels,
                switch_times,
            } => levels[switch_times.partition_point(|&s| s <= t)].clone(),
            Self::Ramp {
                start,
                end,
                t_start,
                t_end,
            } => {
                if t <= *t_start {
                    start.clone()
                } else if t >= *t_end {
                    end.clone()
                } else {
                    let s = (t - t_start) / (t_end - t_start);
                    start
                        .iter()
                        .zip(end)
                        .map(|(a, b)| a + s * (b - a))
                        .collect()
                }
            }
            Self::PiecewiseLinear { times, values } => {
                let j = times.partition_point(|&s| s <= t);
                if j == 0 {
                    return values[0].clone();
                }
                if j == times.len() {
                    return values[j - 1].clone();
                }
                let s = (t - times[j - 1]) / (times[j] - times[j - 1]);
                values[j - 1]
                    .iter()
                    .zip(&values[j])
                    .map(|(a, b)| a + s * (b - a))
                    .collect()
            }
            Self::Sampled { times, values } => {
                let j = times.partition_point(|&s| s <= t);
                values[j.saturating_sub(1)].clone()
            }
        }
    }

    /// Linear pieces `(t_a, t_b, u_a, u_b)` of a ramp-like signal.
    fn linear_pieces(&self) -> Vec<(f64, f64, &[f64], &[f64])> {
        match self {
            Self::Ramp {
                start,
                end,
                t_start,
                t_end,
            } => vec![(*t_start, *t_end, start.as_slice(), end.as_slice())],
            Self::PiecewiseLinear { times, values } => times
                .windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| (t[0], t[1], v[0].as_slice(), v[1].as_slice()))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Times at which `u` jumps.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            Self::Step { switch_times, .. } => switch_times.clone(),
            Self::Sampled { times, .. } => times.iter().skip(1).copied().collect(),
            Self::Constant { .. } | Self::Ramp { .. } | Self::PiecewiseLinear { .. } => Vec::new(),
        }
    }

    /// Jumps plus the times a linear piece crosses an interior breakpoint of
    /// `partition`: between consecutive breakpoints the input stays in one
    /// cell.
    pub fn breakpoints(&self, partition: &Partition) -> Vec<f64> {
        let mut times = self.discontinuities();
        for (ta, tb, ua, ub) in self.linear_pieces() {
            times.push(ta);
            times.push(tb);
            for (dim, (a, b)) in ua.iter().zip(ub).enumerate() {
                if a == b {
                    continue;
                }
                let points = partition.breakpoints(dim);
                for &x in &points[1..points.len() - 1] {
                    let s = (x - a) / (b - a);
                    if s > 0.0 && s < 1.0 {
                        times.push(ta + s * (tb - ta));
                    }
                }
            }
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }
}

/// One programmed segment: `map` is in force from `t_switch` until the next
/// segment's switch.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub t_switch: f64,
    pub map: ConcentrationMap,
}

/// Time-ordered schedule of concentration maps over one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmProgram {
    cfg: BasisConfig,
    segments: Vec<Segment>,
}

impl SwarmProgram {
    pub fn new(cfg: BasisConfig, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(SwarmError::InvalidProgram("no segments".into()));
        }
        if segments.iter().any(|s| !s.t_switch.is_finite()) {
            return Err(SwarmError::InvalidProgram(
                "switch times must be finite".into(),
            ));
        }
        if segments.windows(2).any(|w| w[0].t_switch >= w[1].t_switch) {
            return Err(SwarmError::InvalidProgram(
                "switch times must be strictly increasing".into(),
            ));
        }
        if let Some(j) = segments.iter().position(|s| !s.map.fits(&cfg.partition)) {
            return Err(SwarmError::InvalidProgram(format!(
                "segment {j} names a cell outside the partition"
            )));
        }
        Ok(Self { cfg, segments })
    }

    /// A program that runs one map from `t0` onward.
    pub fn single(cfg: BasisConfig, t0: f64, map: ConcentrationMap) -> Result<Self> {
        Self::new(cfg, vec![Segment { t_switch: t0, map }])
    }

    pub fn cfg(&self) -> &BasisConfig {
        &self.cfg
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Index of the segment in force at `t`.
    pub fn segment_at(&self, t: f64) -> Result<usize> {
        match self.segments.partition_point(|s| s.t_switch <= t) {
            0 => Err(SwarmError::ScheduleGap { t }),
            j => Ok(j - 1),
        }
    }

    pub fn map_at(&self, t: f64) -> Result<&ConcentrationMap> {
        Ok(&self.segments[self.segment_at(t)?].map)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: f64,
    pub v_desired: f64,
    /// `v_desired − v`
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub dt: f64,
    pub clearance: f64,
    pub alpha: f64,
    pub counts: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
    /// Set when `v` dipped below zero anywhere along the run.
    pub went_negative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub rows: Vec<TraceRow>,
    pub meta: TraceMeta,
}

impl SimulationTrace {
    pub fn dims(&self) -> usize {
        self.meta.counts.len()
    }

    pub fn max_abs_error(&self) -> f64 {
        self.rows.iter().map(|r| r.e.abs()).fold(0.0, f64::max)
    }
}

/// Mean of `|e|` over the trace rows.
pub fn mae(trace: &SimulationTrace) -> Result<f64> {
    if trace.rows.is_empty() {
        return Err(SwarmError::EmptyTrace);
    }
    let total: f64 = trace.rows.iter().map(|r| r.e.abs()).sum();
    Ok(total / trace.rows.len() as f64)
}

fn snap_tolerance(t: f64) -> f64 {
    1e-9 * t.abs().max(1.0)
}

/// Merges `extra` into the sorted `base`, replacing base points that lie
/// within rounding distance of an extra point with the extra point itself.
fn merge_times(base: &mut Vec<(f64, bool)>, extra: &[f64], record: bool) {
    for &t in extra {
        let j = base.partition_point(|&(s, _)| s < t);
        let near = |i: usize| {
            base.get(i)
                .is_some_and(|&(s, _)| (s - t).abs() <= snap_tolerance(t))
        };
        if near(j) {
            base[j].0 = t;
            base[j].1 |= record;
        } else if j > 0 && near(j - 1) {
            base[j - 1].0 = t;
            base[j - 1].1 |= record;
        } else {
            base.insert(j, (t, record));
        }
    }
}

/// Runs a swarm program against an input signal on `[t0, t_end]`.
///
/// Rows are recorded on the uniform grid `t0 + i·dt` (plus `t_end`), at
/// every program switch and at every input jump. Ramp cell crossings split
/// steps without producing rows. A switch applies from its own row on, so
/// the row at a switch time already shows the new desired value.
pub fn simulate(
    prog: &SwarmProgram,
    input: &InputSignal,
    t0: f64,
    t_end: f64,
    dt: f64,
    v0: f64,
) -> Result<SimulationTrace> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SwarmError::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(t0.is_finite() && t_end.is_finite() && t0 < t_end) {
        return Err(SwarmError::InvalidParameter(format!(
            "need t0 < t_end, got {t0} and {t_end}"
        )));
    }
    if !v0.is_finite() {
        return Err(SwarmError::InvalidParameter("v0 must be finite".into()));
    }
    let cfg = prog.cfg();
    if input.dims() != cfg.partition.dims() {
        return Err(SwarmError::DimensionMismatch {
            expected: cfg.partition.dims(),
            got: input.dims(),
        });
    }
    prog.segment_at(t0)?;

    let inside = |t: f64| t > t0 && t < t_end;
    let n_steps = ((t_end - t0) / dt + 1e-9).floor() as usize;
    let mut times: Vec<(f64, bool)> = (0..=n_steps).map(|i| (t0 + i as f64 * dt, true)).collect();
    times.retain(|&(t, _)| t < t_end);
    times.push((t_end, true));

    let mut events: Vec<f64> = prog
        .segments()
        .iter()
        .map(|s| s.t_switch)
        .filter(|&t| inside(t))
        .collect();
    events.extend(input.discontinuities().into_iter().filter(|&t| inside(t)));
    merge_times(&mut times, &events, true);
    let crossings: Vec<f64> = input
        .breakpoints(&cfg.partition)
        .into_iter()
        .filter(|&t| inside(t))
        .collect();
    merge_times(&mut times, &crossings, false);

    let rate = cfg.clearance();
    let mut went_negative = v0 < 0.0;
    let mut rows = Vec::with_capacity(times.len());
    let mut v = v0;
    let record = |t: f64, v: f64| -> Result<TraceRow> {
        let u = input.value_at(t);
        let v_desired = approximate(prog.map_at(t)?, cfg, &u)?;
        Ok(TraceRow {
            t,
            u,
            v,
            v_desired,
            e: v_desired - v,
        })
    };
    rows.push(record(times[0].0, v)?);
    for w in times.windows(2) {
        let (ta, (tb, keep)) = (w[0].0, w[1]);
        // Steps never straddle a jump or crossing, so the midpoint input
        // selects the cell in force on the whole step.
        let u_mid = input.value_at(0.5 * (ta + tb));
        let target = drive(prog.map_at(ta)?, cfg, &u_mid)? / rate;
        v = analytic_v(v, target, rate, tb - ta);
        went_negative |= v < 0.0;
        if keep {
            rows.push(record(tb, v)?);
        }
    }

    let partition = &cfg.partition;
    Ok(SimulationTrace {
        rows,
        meta: TraceMeta {
            dt,
            clearance: rate,
            alpha: cfg.alpha(),
            counts: partition.counts(),
            bounds: (0..partition.dims()).map(|d| partition.bounds(d)).collect(),
            went_negative,
        },
    })
}
