//! State and action types plus flat mixed-radix indexing over both spaces.

use super::{Config, EnvError};

/// One device's observable state: available CPU shares and stored energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeviceState {
    pub cpu_shares: u32,
    pub energy_units: u32,
}

/// The server's state: the joint state of all devices, in device order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemState {
    pub devices: Vec<DeviceState>,
}

impl SystemState {
    pub fn new(devices: Vec<DeviceState>) -> Self {
        Self { devices }
    }

    /// Uniform device state repeated `n` times.
    pub fn uniform(n: usize, cpu_shares: u32, energy_units: u32) -> Self {
        Self {
            devices: vec![
                DeviceState {
                    cpu_shares,
                    energy_units,
                };
                n
            ],
        }
    }
}

/// Data and energy requested from one device for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Allocation {
    pub data_units: u32,
    pub energy_units: u32,
}

impl Allocation {
    pub const IDLE: Allocation = Allocation {
        data_units: 0,
        energy_units: 0,
    };

    pub fn is_idle(&self) -> bool {
        self.data_units == 0 && self.energy_units == 0
    }
}

/// The server's joint action: one [`Allocation`] per device.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointAction {
    pub allocations: Vec<Allocation>,
}

impl JointAction {
    pub fn new(allocations: Vec<Allocation>) -> Self {
        Self { allocations }
    }

    /// The all-idle action for `n` devices.
    pub fn idle(n: usize) -> Self {
        Self {
            allocations: vec![Allocation::IDLE; n],
        }
    }
}

impl Config {
    /// Number of joint states, ∏ₙ (Fₙ+1)(Cₙ+1).
    pub fn num_states(&self) -> usize {
        self.devices()
            .iter()
            .map(|d| (d.max_cpu_shares as usize + 1) * (d.energy_capacity as usize + 1))
            .try_fold(1usize, usize::checked_mul)
            .expect("state space exceeds usize range")
    }

    /// Size of the full capacity-based action grid, ∏ₙ (Dₙ+1)(Cₙ+1).
    ///
    /// This is the index space the Q-network's output layer spans; most grid
    /// points are infeasible in any particular state.
    pub fn num_actions(&self) -> usize {
        self.devices()
            .iter()
            .map(|d| (d.max_data as usize + 1) * (d.energy_capacity as usize + 1))
            .try_fold(1usize, usize::checked_mul)
            .expect("action grid exceeds usize range")
    }

    /// True iff every device state respects its caps and the device count
    /// matches.
    pub fn state_in_bounds(&self, state: &SystemState) -> bool {
        state.devices.len() == self.num_devices()
            && state
                .devices
                .iter()
                .zip(self.devices())
                .all(|(s, p)| s.cpu_shares <= p.max_cpu_shares && s.energy_units <= p.energy_capacity)
    }

    /// Flat mixed-radix state index; device 0 is the most significant digit.
    pub fn state_index(&self, state: &SystemState) -> Result<usize, EnvError> {
        if state.devices.len() != self.num_devices() {
            return Err(EnvError::DeviceCountMismatch {
                expected: self.num_devices(),
                got: state.devices.len(),
            });
        }
        let mut index = 0usize;
        for (n, (s, p)) in state.devices.iter().zip(self.devices()).enumerate() {
            if s.cpu_shares > p.max_cpu_shares || s.energy_units > p.energy_capacity {
                return Err(EnvError::OutOfBounds { device: n });
            }
            let radix = (p.max_cpu_shares as usize + 1) * (p.energy_capacity as usize + 1);
            let digit =
                s.cpu_shares as usize * (p.energy_capacity as usize + 1) + s.energy_units as usize;
            index = index * radix + digit;
        }
        Ok(index)
    }

    /// Inverse of [`Config::state_index`].
    pub fn index_state(&self, index: usize) -> Result<SystemState, EnvError> {
        let size = self.num_states();
        if index >= size {
            return Err(EnvError::IndexOutOfRange { index, size });
        }
        let mut rem = index;
        let mut devices = vec![
            DeviceState {
                cpu_shares: 0,
                energy_units: 0
            };
            self.num_devices()
        ];
        for (slot, p) in devices.iter_mut().zip(self.devices()).rev() {
            let cap = p.energy_capacity as usize + 1;
            let radix = (p.max_cpu_shares as usize + 1) * cap;
            let digit = rem % radix;
            rem /= radix;
            slot.cpu_shares = (digit / cap) as u32;
            slot.energy_units = (digit % cap) as u32;
        }
        Ok(SystemState { devices })
    }

    /// Flat mixed-radix action index over the full capacity grid; device 0 is
    /// the most significant digit. Bijective with [`Config::index_action`].
    pub fn action_index(&self, action: &JointAction) -> Result<usize, EnvError> {
        if action.allocations.len() != self.num_devices() {
            return Err(EnvError::DeviceCountMismatch {
                expected: self.num_devices(),
                got: action.allocations.len(),
            });
        }
        let mut index = 0usize;
        for (n, (a, p)) in action.allocations.iter().zip(self.devices()).enumerate() {
            if a.data_units > p.max_data || a.energy_units > p.energy_capacity {
                return Err(EnvError::OutOfBounds { device: n });
            }
            let radix = (p.max_data as usize + 1) * (p.energy_capacity as usize + 1);
            let digit =
                a.data_units as usize * (p.energy_capacity as usize + 1) + a.energy_units as usize;
            index = index * radix + digit;
        }
        Ok(index)
    }

    /// Inverse of [`Config::action_index`].
    pub fn index_action(&self, index: usize) -> Result<JointAction, EnvError> {
        let size = self.num_actions();
        if index >= size {
            return Err(EnvError::IndexOutOfRange { index, size });
        }
        let mut rem = index;
        let mut allocations = vec![Allocation::IDLE; self.num_devices()];
        for (slot, p) in allocations.iter_mut().zip(self.devices()).rev() {
            let cap = p.energy_capacity as usize + 1;
            let radix = (p.max_data as usize + 1) * cap;
            let digit = rem % radix;
            rem /= radix;
            slot.data_units = (digit / cap) as u32;
            slot.energy_units = (digit % cap) as u32;
        }
        Ok(JointAction { allocations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_sizes_match_products() {
        let cfg = Config::default();
        assert_eq!(cfg.num_states(), 16 * 16 * 16);
        assert_eq!(cfg.num_actions(), 4096); // ((3+1)(3+1))^3
    }

    #[test]
    fn all_zero_action_maps_to_zero() {
        let cfg = Config::default();
        assert_eq!(cfg.action_index(&JointAction::idle(3)).unwrap(), 0);
    }

    #[test]
    fn action_round_trip_on_full_grid() {
        let cfg = Config::default();
        for i in 0..cfg.num_actions() {
            let a = cfg.index_action(i).unwrap();
            assert_eq!(cfg.action_index(&a).unwrap(), i);
        }
    }

    #[test]
    fn state_round_trip_on_full_grid() {
        let cfg = Config::default();
        for i in 0..cfg.num_states() {
            let s = cfg.index_state(i).unwrap();
            assert_eq!(cfg.state_index(&s).unwrap(), i);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let cfg = Config::default();
        assert!(matches!(
            cfg.index_action(cfg.num_actions()),
            Err(EnvError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            cfg.index_state(cfg.num_states()),
            Err(EnvError::IndexOutOfRange { .. })
        ));
        let over = JointAction::new(vec![
            Allocation {
                data_units: 4,
                energy_units: 0,
            };
            3
        ]);
        assert!(cfg.action_index(&over).is_err());
    }

    #[test]
    fn device_zero_is_most_significant() {
        let cfg = Config::default();
        let mut a = JointAction::idle(3);
        a.allocations[2].energy_units = 1;
        assert_eq!(cfg.action_index(&a).unwrap(), 1);
        let mut a = JointAction::idle(3);
        a.allocations[0].energy_units = 1;
        assert_eq!(cfg.action_index(&a).unwrap(), 16 * 16);
    }
}
