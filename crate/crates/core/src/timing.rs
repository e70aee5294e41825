//! Durations of schedule events.

use serde::{Deserialize, Serialize};

/// Tweezer transport follows t(d) = t0·sqrt(d/d0); pulse and single-qubit
/// gate durations are fixed. All times in µs, distances in µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingModel {
    pub move_t0_us: f64,
    pub move_d0_um: f64,
    pub rydberg_pulse_us: f64,
    pub single_qubit_gate_us: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        Self {
            move_t0_us: 200.0,
            move_d0_um: 110.0,
            rydberg_pulse_us: 0.4,
            single_qubit_gate_us: 0.5,
        }
    }
}

impl TimingModel {
    pub fn move_time(&self, distance_um: f64) -> f64 {
        if distance_um <= 0.0 {
            return 0.0;
        }
        self.move_t0_us * (distance_um / self.move_d0_um).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_micron_move() {
        let t = TimingModel::default().move_time(12.0);
        // 200 * sqrt(12 / 110) = 66.0578...
        assert!((t - 66.057_825_0).abs() < 1e-6, "{t}");
        assert_eq!(TimingModel::default().move_time(0.0), 0.0);
    }
}
