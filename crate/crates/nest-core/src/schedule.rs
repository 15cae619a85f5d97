//! ESP schedules: six fidelity-evolution curves over an optimization run
//! and their stepwise discretization into cycles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::ScoredMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Flat,
    StepUp,
    Linear,
    VShape,
    Relu,
    InvertedRelu,
}

impl ScheduleKind {
    pub const ALL: [ScheduleKind; 6] = [
        ScheduleKind::Flat,
        ScheduleKind::StepUp,
        ScheduleKind::Linear,
        ScheduleKind::VShape,
        ScheduleKind::Relu,
        ScheduleKind::InvertedRelu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Flat => "flat",
            ScheduleKind::StepUp => "step-up",
            ScheduleKind::Linear => "linear",
            ScheduleKind::VShape => "v-shape",
            ScheduleKind::Relu => "relu",
            ScheduleKind::InvertedRelu => "inverted-relu",
        }
    }
}

/// Shape fractions: alpha = step-up switch point, beta = flat fraction of
/// the ReLU ramp, gamma = ramp fraction of the inverted ReLU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams {
            alpha: 0.5,
            beta: 1.0 / 3.0,
            gamma: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EspSchedule {
    pub kind: ScheduleKind,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub total_iters: usize,
    pub params: ScheduleParams,
}

impl EspSchedule {
    pub fn new(
        kind: ScheduleKind,
        sigma_min: f64,
        sigma_max: f64,
        total_iters: usize,
        params: ScheduleParams,
    ) -> Result<Self> {
        if !(sigma_min > 0.0 && sigma_min <= sigma_max && sigma_max <= 1.0) {
            return Err(Error::Domain(format!(
                "need 0 < sigma_min <= sigma_max <= 1, got ({sigma_min}, {sigma_max})"
            )));
        }
        if total_iters < 1 {
            return Err(Error::Domain("schedule needs at least one iteration".into()));
        }
        for (name, f) in [
            ("alpha", params.alpha),
            ("beta", params.beta),
            ("gamma", params.gamma),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Domain(format!("{name} = {f} not in (0, 1)")));
            }
        }
        Ok(EspSchedule {
            kind,
            sigma_min,
            sigma_max,
            total_iters,
            params,
        })
    }

    /// Convenience constructor with `total_iters = cycles * iters_per_cycle`.
    pub fn for_plan(
        kind: ScheduleKind,
        sigma_min: f64,
        sigma_max: f64,
        cycles: usize,
        iters_per_cycle: usize,
        params: ScheduleParams,
    ) -> Result<Self> {
        EspSchedule::new(kind, sigma_min, sigma_max, cycles * iters_per_cycle, params)
    }

    /// Closed-form target ESP at iteration `t` (0 <= t <= T).
    pub fn sigma_at(&self, t: usize) -> Result<f64> {
        let total = self.total_iters;
        if t > total {
            return Err(Error::OutOfRange { t, limit: total });
        }
        let frac = t as f64 / total as f64;
        let span = self.sigma_max - self.sigma_min;
        let value = match self.kind {
            ScheduleKind::Flat => self.sigma_max,
            ScheduleKind::StepUp => {
                if frac < self.params.alpha {
                    self.sigma_min
                } else {
                    self.sigma_max
                }
            }
            ScheduleKind::Linear => self.sigma_min + frac * span,
            ScheduleKind::VShape => {
                if frac < 0.5 {
                    self.sigma_max - 2.0 * frac * span
                } else {
                    self.sigma_min + 2.0 * (frac - 0.5) * span
                }
            }
            ScheduleKind::Relu => {
                let beta = self.params.beta;
                if frac < beta {
                    self.sigma_min
                } else {
                    self.sigma_min + (frac - beta) / (1.0 - beta) * span
                }
            }
            ScheduleKind::InvertedRelu => {
                let gamma = self.params.gamma;
                if frac < gamma {
                    self.sigma_min + frac / gamma * span
                } else {
                    self.sigma_max
                }
            }
        };
        Ok(value)
    }
}

/// Stepwise plan: one target ESP per cycle, sampled at each cycle's first
/// iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclePlan {
    pub kind: ScheduleKind,
    pub cycles: usize,
    pub iters_per_cycle: usize,
    pub targets: Vec<f64>,
}

impl CyclePlan {
    pub fn total_iters(&self) -> usize {
        self.cycles * self.iters_per_cycle
    }
}

/// Samples the continuous curve at t = c * I for c = 0..C-1.
pub fn discretize(schedule: &EspSchedule, cycles: usize, iters_per_cycle: usize) -> Result<CyclePlan> {
    if cycles < 1 || iters_per_cycle < 1 {
        return Err(Error::InvalidShape(format!(
            "cycles = {cycles}, iters_per_cycle = {iters_per_cycle}"
        )));
    }
    if cycles * iters_per_cycle != schedule.total_iters {
        return Err(Error::InvalidShape(format!(
            "{cycles} x {iters_per_cycle} != schedule total {}",
            schedule.total_iters
        )));
    }
    let targets = (0..cycles)
        .map(|c| schedule.sigma_at(c * iters_per_cycle))
        .collect::<Result<Vec<_>>>()?;
    Ok(CyclePlan {
        kind: schedule.kind,
        cycles,
        iters_per_cycle,
        targets,
    })
}

/// (min, max) ESP over a candidate map set.
pub fn default_sigma_bounds(scored: &[ScoredMap]) -> Result<(f64, f64)> {
    if scored.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in scored {
        lo = lo.min(s.esp);
        hi = hi.max(s.esp);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sched(kind: ScheduleKind) -> EspSchedule {
        EspSchedule::new(kind, 0.2, 0.8, 432, ScheduleParams::default()).unwrap()
    }

    #[test]
    fn flat_is_sigma_max_everywhere() {
        let s = sched(ScheduleKind::Flat);
        for t in [0, 1, 216, 432] {
            assert_eq!(s.sigma_at(t).unwrap(), 0.8);
        }
    }

    #[test]
    fn linear_midpoint() {
        let s = sched(ScheduleKind::Linear);
        assert_relative_eq!(s.sigma_at(216).unwrap(), 0.5);
    }

    #[test]
    fn v_shape_endpoints_and_valley() {
        let s = sched(ScheduleKind::VShape);
        assert_relative_eq!(s.sigma_at(0).unwrap(), 0.8);
        assert_relative_eq!(s.sigma_at(216).unwrap(), 0.2);
        assert_relative_eq!(s.sigma_at(432).unwrap(), 0.8);
    }

    #[test]
    fn inverted_relu_saturates_at_gamma() {
        let s = sched(ScheduleKind::InvertedRelu);
        for t in [216, 300, 432] {
            assert_eq!(s.sigma_at(t).unwrap(), 0.8);
        }
        assert_relative_eq!(s.sigma_at(108).unwrap(), 0.5);
    }

    #[test]
    fn out_of_range_t_is_rejected() {
        let s = sched(ScheduleKind::Flat);
        assert!(matches!(s.sigma_at(433), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn discretize_flat_and_step_up() {
        let flat = discretize(&sched(ScheduleKind::Flat), 6, 72).unwrap();
        assert_eq!(flat.targets, vec![0.8; 6]);

        let step = discretize(&sched(ScheduleKind::StepUp), 6, 72).unwrap();
        assert_eq!(step.targets, vec![0.2, 0.2, 0.2, 0.8, 0.8, 0.8]);
    }

    #[test]
    fn discretize_inverted_relu_matches_hand_evaluation() {
        let plan = discretize(&sched(ScheduleKind::InvertedRelu), 6, 72).unwrap();
        let expected = [0.2, 0.4, 0.6, 0.8, 0.8, 0.8];
        for (got, want) in plan.targets.iter().zip(expected) {
            assert_relative_eq!(*got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn discretize_rejects_shape_mismatch() {
        assert!(matches!(
            discretize(&sched(ScheduleKind::Flat), 5, 72),
            Err(Error::InvalidShape(_))
        ));
    }

    #[test]
    fn monotone_target_shapes() {
        let non_decreasing = |targets: &[f64]| targets.windows(2).all(|w| w[0] <= w[1] + 1e-15);
        for kind in [ScheduleKind::Linear, ScheduleKind::Relu, ScheduleKind::InvertedRelu] {
            let plan = discretize(&sched(kind), 6, 72).unwrap();
            assert!(non_decreasing(&plan.targets), "{kind:?}");
        }
        let v = discretize(&sched(ScheduleKind::VShape), 6, 72).unwrap();
        let valley = v
            .targets
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(v.targets[..=valley].windows(2).all(|w| w[0] >= w[1]));
        assert!(v.targets[valley..].windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn invalid_bounds_are_rejected() {
        assert!(EspSchedule::new(
            ScheduleKind::Flat,
            0.9,
            0.5,
            10,
            ScheduleParams::default()
        )
        .is_err());
    }
}
