//! Feasibility rules and enumeration of the per-state action set.
//!
//! A request of `d` data units backed by `e` energy units forces the device
//! to run its CPU at f̄ = √(δ·e / (τ·ν·d)). The request is feasible when the
//! energy is actually in the battery and f̄ fits inside the device's granted
//! CPU shares. Idle devices (d = 0, e = 0) are always feasible; spending
//! energy without training, or training without energy, is not.

use super::{Allocation, Config, DeviceState, EnvError, JointAction, SystemState};

impl Config {
    /// CPU frequency (Hz) required to train `data_units` within one round
    /// using `energy_units`: √(δe/(τνd)), with 0 for the idle request.
    pub fn required_cpu_freq(&self, data_units: u32, energy_units: u32) -> f64 {
        if data_units == 0 {
            return 0.0;
        }
        let joules = self.energy_unit_joules() * f64::from(energy_units);
        let cycles = self.cycles_per_data_unit() * f64::from(data_units);
        (joules / (self.switched_capacitance() * cycles)).sqrt()
    }

    /// Whether device `n` in state `dev` can execute the request `(d, e)`.
    pub fn device_feasible(
        &self,
        n: usize,
        dev: &DeviceState,
        data_units: u32,
        energy_units: u32,
    ) -> bool {
        if (data_units == 0) != (energy_units == 0) {
            return false;
        }
        data_units <= self.device(n).max_data
            && energy_units <= dev.energy_units
            && self.required_cpu_freq(data_units, energy_units)
                <= self.cpu_share_hz() * f64::from(dev.cpu_shares)
    }

    /// All feasible `(d, e)` requests for device `n`, sorted by `(d, e)`.
    /// Always contains the idle request.
    pub fn feasible_allocations(&self, n: usize, dev: &DeviceState) -> Vec<Allocation> {
        let p = self.device(n);
        let mut out = vec![Allocation::IDLE];
        for d in 1..=p.max_data {
            for e in 1..=dev.energy_units.min(p.energy_capacity) {
                if self.device_feasible(n, dev, d, e) {
                    out.push(Allocation {
                        data_units: d,
                        energy_units: e,
                    });
                }
            }
        }
        out
    }

    /// True iff every device can execute its part of `action`.
    pub fn action_feasible(&self, state: &SystemState, action: &JointAction) -> bool {
        action.allocations.len() == self.num_devices()
            && state.devices.len() == self.num_devices()
            && action
                .allocations
                .iter()
                .zip(&state.devices)
                .enumerate()
                .all(|(n, (a, dev))| self.device_feasible(n, dev, a.data_units, a.energy_units))
    }

    /// The full feasible action set of `state`: the Cartesian product of the
    /// per-device feasible requests, in lexicographic order (device index,
    /// then data, then energy). Never empty — all-idle is always present.
    pub fn enumerate_feasible(&self, state: &SystemState) -> Vec<JointAction> {
        let per_device: Vec<Vec<Allocation>> = state
            .devices
            .iter()
            .enumerate()
            .map(|(n, dev)| self.feasible_allocations(n, dev))
            .collect();
        let mut out = Vec::with_capacity(per_device.iter().map(Vec::len).product());
        let mut current = vec![Allocation::IDLE; per_device.len()];
        product_rec(&per_device, 0, &mut current, &mut out);
        out
    }
}

fn product_rec(
    per_device: &[Vec<Allocation>],
    depth: usize,
    current: &mut Vec<Allocation>,
    out: &mut Vec<JointAction>,
) {
    if depth == per_device.len() {
        out.push(JointAction::new(current.clone()));
        return;
    }
    for a in &per_device[depth] {
        current[depth] = *a;
        product_rec(per_device, depth + 1, current, out);
    }
}

/// Precomputed feasible action indices for every state, used by the agent's
/// masked argmax and by the exact solvers. Indices are flat grid indices
/// (see [`Config::action_index`]) in increasing order.
#[derive(Debug, Clone)]
pub struct FeasibleTable {
    per_state: Vec<Vec<u32>>,
}

/// Largest state count [`FeasibleTable::new`] will tabulate.
pub(crate) const MAX_TABLE_STATES: usize = 1_000_000;

impl FeasibleTable {
    pub fn new(cfg: &Config) -> Result<Self, EnvError> {
        let states = cfg.num_states();
        if states > MAX_TABLE_STATES {
            return Err(EnvError::TooLarge {
                entries: states,
                limit: MAX_TABLE_STATES,
            });
        }
        let per_state = (0..states)
            .map(|i| {
                let state = cfg.index_state(i).expect("index within bounds");
                cfg.enumerate_feasible(&state)
                    .iter()
                    .map(|a| cfg.action_index(a).expect("enumerated action in grid") as u32)
                    .collect()
            })
            .collect();
        Ok(Self { per_state })
    }

    /// Feasible flat action indices of the state with the given index.
    pub fn indices(&self, state_index: usize) -> &[u32] {
        &self.per_state[state_index]
    }

    pub fn num_states(&self) -> usize {
        self.per_state.len()
    }
}
