//! Integer M-cycles from real-valued schedules.

use std::fmt;
use std::str::FromStr;

use crate::amplification::{KappaRange, WeightSchedule};
use crate::error::SrjError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantizeStrategy {
    #[default]
    Floor,
    Round,
    Ceil,
}

impl FromStr for QuantizeStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "floor" => Ok(Self::Floor),
            "round" => Ok(Self::Round),
            "ceil" => Ok(Self::Ceil),
            other => Err(format!("unknown quantization strategy '{other}'")),
        }
    }
}

impl fmt::Display for QuantizeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Floor => "floor",
            Self::Round => "round",
            Self::Ceil => "ceil",
        })
    }
}

/// One M-cycle: ω_i used q_i times, M = Σ q_i, in `weight_sequence` order.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSchedule {
    pub q: Vec<u64>,
    pub m: u64,
    pub weight_sequence: Vec<f64>,
    pub source: WeightSchedule,
}

impl CycleSchedule {
    pub fn omegas(&self) -> &[f64] {
        &self.source.omegas
    }
}

/// q_i = strategy(β_i / β_1), so q_1 = 1.
pub fn quantize(s: &WeightSchedule, strategy: QuantizeStrategy) -> Result<CycleSchedule, SrjError> {
    let b1 = s.betas[0];
    let mut q = Vec::with_capacity(s.levels());
    for (i, b) in s.betas.iter().enumerate() {
        let r = b / b1;
        let v = if i == 0 {
            1.0
        } else {
            match strategy {
                QuantizeStrategy::Floor => r.floor(),
                QuantizeStrategy::Round => r.round(),
                QuantizeStrategy::Ceil => r.ceil(),
            }
        };
        if !(v >= 1.0) {
            return Err(SrjError::DegenerateQuantization(i + 1));
        }
        q.push(v as u64);
    }
    let weight_sequence = layout(&q, &s.omegas);
    Ok(CycleSchedule {
        m: q.iter().sum(),
        q,
        weight_sequence,
        source: s.clone(),
    })
}

/// Spreads each weight class evenly over the cycle.
///
/// Occurrence j of class i targets slot round((j + c_i)·M/q_i) mod M and
/// takes the next free slot forward from there. c_i = r/n staggers the n
/// classes sharing a count, r being the class's rank among them. Classes are
/// placed in index order, so the largest weights get their target slots.
pub fn layout(q: &[u64], omegas: &[f64]) -> Vec<f64> {
    let m: u64 = q.iter().sum();
    let mut slots: Vec<Option<f64>> = vec![None; m as usize];
    for (i, (&qi, &w)) in q.iter().zip(omegas).enumerate() {
        let same = q.iter().filter(|&&x| x == qi).count();
        let rank = q[..i].iter().filter(|&&x| x == qi).count();
        let phase = rank as f64 / same as f64;
        for j in 0..qi {
            let target = (((j as f64 + phase) * m as f64 / qi as f64).round() as u64) % m;
            let mut pos = target as usize;
            while slots[pos].is_some() {
                pos = (pos + 1) % m as usize;
            }
            slots[pos] = Some(w);
        }
    }
    slots.into_iter().map(|s| s.expect("every slot filled")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Largest ln Π|1 − ω_i κ|^{q_i} over the grid.
    pub max_log_amplification: f64,
    pub max_amplification: f64,
    /// Geometric mean per elementary step at the maximum.
    pub max_mean_amplification: f64,
    pub kappa_at_max: f64,
    pub stable: bool,
}

/// Points of the uniform κ grid used by [`validate_cycle`].
pub const STABILITY_GRID: usize = 10_000;

/// Per-cycle amplification Π|1 − ω_i κ|^{q_i} over a uniform grid on the
/// range; stable when it stays strictly below 1.
pub fn validate_cycle(cycle: &CycleSchedule, range: KappaRange) -> StabilityReport {
    let h = (range.kappa_max - range.kappa_min) / (STABILITY_GRID - 1) as f64;
    let mut best = (f64::NEG_INFINITY, range.kappa_min);
    for k in 0..STABILITY_GRID {
        let kappa = if k + 1 == STABILITY_GRID {
            range.kappa_max
        } else {
            range.kappa_min + k as f64 * h
        };
        let v = cycle_log_amplification(cycle, kappa);
        if v > best.0 {
            best = (v, kappa);
        }
    }
    StabilityReport {
        max_log_amplification: best.0,
        max_amplification: best.0.exp(),
        max_mean_amplification: (best.0 / cycle.m as f64).exp(),
        kappa_at_max: best.1,
        stable: best.0 < 0.0,
    }
}

/// ln Π|1 − ω_i κ|^{q_i}.
pub fn cycle_log_amplification(cycle: &CycleSchedule, kappa: f64) -> f64 {
    cycle
        .omegas()
        .iter()
        .zip(&cycle.q)
        .map(|(w, &q)| q as f64 * (1.0 - w * kappa).abs().ln())
        .sum()
}
