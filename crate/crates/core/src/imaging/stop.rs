use super::trajectory::MetricsTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopMode {
    /// Stop once `t >= threshold`.
    FixedCount,
    /// Stop once the relative estimate change stays `<= threshold` for
    /// `patience` consecutive evaluations.
    EstimatePlateau,
    /// Stop once PSNR against the reference reaches `threshold` dB
    /// (simulation only).
    MetricThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub mode: StopMode,
    pub threshold: f64,
    pub patience: usize,
}

impl StopRule {
    pub fn fixed_count(count: usize) -> Self {
        Self {
            mode: StopMode::FixedCount,
            threshold: count as f64,
            patience: 1,
        }
    }

    pub fn plateau(threshold: f64, patience: usize) -> Self {
        Self {
            mode: StopMode::EstimatePlateau,
            threshold,
            patience: patience.max(1),
        }
    }

    pub fn psnr_at_least(db: f64) -> Self {
        Self {
            mode: StopMode::MetricThreshold,
            threshold: db,
            patience: 1,
        }
    }

    /// Count at which a fixed-count rule fires.
    pub fn fixed_target(&self) -> Option<usize> {
        (self.mode == StopMode::FixedCount).then(|| self.threshold.max(0.0).ceil() as usize)
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self::plateau(1e-4, 3)
    }
}

/// `estimate_changes` holds one relative change per evaluation, oldest first.
pub fn should_stop(rule: &StopRule, trajectory: &MetricsTrajectory, estimate_changes: &[f64]) -> bool {
    match rule.mode {
        StopMode::FixedCount => trajectory
            .last()
            .is_some_and(|r| r.t as f64 >= rule.threshold),
        StopMode::EstimatePlateau => {
            let patience = rule.patience.max(1);
            estimate_changes.len() >= patience
                && estimate_changes[estimate_changes.len() - patience..]
                    .iter()
                    .all(|&c| c <= rule.threshold)
        }
        StopMode::MetricThreshold => trajectory
            .last()
            .is_some_and(|r| r.psnr_db >= rule.threshold),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::TrajectoryRecord;

    fn traj(ts: &[usize], psnr: f64) -> MetricsTrajectory {
        let mut tr = MetricsTrajectory::new();
        for &t in ts {
            tr.push(TrajectoryRecord {
                t,
                psnr_db: psnr,
                ssim: 0.5,
                cg_iters_total: 0,
            })
            .unwrap();
        }
        tr
    }

    #[test]
    fn fixed_count() {
        let rule = StopRule::fixed_count(10);
        assert!(should_stop(&rule, &traj(&[5, 10], 0.0), &[]));
        assert!(!should_stop(&rule, &traj(&[5, 9], 0.0), &[]));
        assert!(!should_stop(&rule, &MetricsTrajectory::new(), &[]));
    }

    #[test]
    fn plateau_needs_full_patience() {
        let rule = StopRule::plateau(1e-4, 3);
        assert!(should_stop(&rule, &MetricsTrajectory::new(), &[1e-5, 1e-5, 1e-5]));
        assert!(!should_stop(&rule, &MetricsTrajectory::new(), &[1e-5, 1e-5]));
        assert!(!should_stop(&rule, &MetricsTrajectory::new(), &[1e-5, 1e-3, 1e-5, 1e-5]));
        assert!(should_stop(&rule, &MetricsTrajectory::new(), &[1.0, 1e-5, 1e-5, 1e-5]));
    }

    #[test]
    fn metric_threshold() {
        let rule = StopRule::psnr_at_least(30.0);
        assert!(should_stop(&rule, &traj(&[1], 31.0), &[]));
        assert!(!should_stop(&rule, &traj(&[1], 29.0), &[]));
        assert!(should_stop(&rule, &traj(&[1], f64::INFINITY), &[]));
    }
}
