//! Central finite-difference verification of the backward pass.

use super::network::{QNetwork, SelectedSample};
use super::NnError;

/// Compares [`QNetwork::backward_selected`] against central finite
/// differences of the batch loss and returns the worst relative error.
///
/// Every parameter is perturbed by ±`step`, so the cost is two full batch
/// evaluations per parameter — keep the network small (≤ ~10³ parameters).
pub fn grad_check(
    net: &QNetwork,
    batch: &[SelectedSample<'_>],
    step: f64,
) -> Result<f64, NnError> {
    let analytic = net.backward_selected(batch)?;
    let mut probe = net.clone();
    let mut max_err = 0.0_f64;
    for l in 0..net.layers().len() {
        for slot in [ParamSlot::Weights, ParamSlot::Biases] {
            let len = match slot {
                ParamSlot::Weights => net.layers()[l].weights.len(),
                ParamSlot::Biases => net.layers()[l].biases.len(),
            };
            for i in 0..len {
                let original = read(&probe, l, slot, i);
                write(&mut probe, l, slot, i, original + step);
                let plus = probe.selected_loss(batch)?;
                write(&mut probe, l, slot, i, original - step);
                let minus = probe.selected_loss(batch)?;
                write(&mut probe, l, slot, i, original);
                let numeric = (plus - minus) / (2.0 * step);
                let exact = match slot {
                    ParamSlot::Weights => analytic.layers[l].weights[i],
                    ParamSlot::Biases => analytic.layers[l].biases[i],
                };
                let err = relative_error(numeric, exact);
                max_err = max_err.max(err);
            }
        }
    }
    Ok(max_err)
}

#[derive(Clone, Copy)]
enum ParamSlot {
    Weights,
    Biases,
}

fn read(net: &QNetwork, layer: usize, slot: ParamSlot, i: usize) -> f64 {
    match slot {
        ParamSlot::Weights => net.layers()[layer].weights[i],
        ParamSlot::Biases => net.layers()[layer].biases[i],
    }
}

fn write(net: &mut QNetwork, layer: usize, slot: ParamSlot, i: usize, value: f64) {
    match slot {
        ParamSlot::Weights => net.layers_mut()[layer].weights[i] = value,
        ParamSlot::Biases => net.layers_mut()[layer].biases[i] = value,
    }
}

/// |a − b| scaled by the larger magnitude, with a floor that keeps
/// finite-difference noise on true-zero gradients from registering.
fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SimRng;
    use rand::{Rng, SeedableRng};

    const H: f64 = 1e-5;

    fn random_batch(rng: &mut SimRng, input: usize, output: usize, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let mut v: Vec<f64> = (0..input).map(|_| rng.gen_range(-1.0..1.0)).collect();
                v.push(rng.gen_range(0..output) as f64); // action
                v.push(rng.gen_range(-2.0..2.0)); // target
                v
            })
            .collect()
    }

    fn as_samples(raw: &[Vec<f64>]) -> Vec<SelectedSample<'_>> {
        raw.iter()
            .map(|v| SelectedSample {
                input: &v[..v.len() - 2],
                action: v[v.len() - 2] as usize,
                target: v[v.len() - 1],
            })
            .collect()
    }

    #[test]
    fn random_small_networks_pass() {
        let mut rng = SimRng::seed_from_u64(100);
        for trial in 0..5 {
            let net = QNetwork::new(&[4, 8, 8, 6], &mut rng);
            let raw = random_batch(&mut rng, 4, 6, 8);
            let batch = as_samples(&raw);
            let err = grad_check(&net, &batch, H).unwrap();
            assert!(err < 1e-4, "trial {trial}: max relative error {err}");
        }
    }

    #[test]
    fn zero_input_batch_passes() {
        let mut rng = SimRng::seed_from_u64(200);
        let net = QNetwork::new(&[4, 8, 8, 6], &mut rng);
        let zeros = vec![0.0; 4];
        let batch = [
            SelectedSample {
                input: &zeros,
                action: 0,
                target: 1.0,
            },
            SelectedSample {
                input: &zeros,
                action: 5,
                target: -1.0,
            },
        ];
        let err = grad_check(&net, &batch, H).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        // Negative control: scale the analytic gradient by 1.1 and verify
        // the checker would flag it. Reuses the internal comparison on the
        // corrupted gradients directly.
        let mut rng = SimRng::seed_from_u64(300);
        let net = QNetwork::new(&[3, 6, 4], &mut rng);
        let raw = random_batch(&mut rng, 3, 4, 4);
        let batch = as_samples(&raw);
        let honest = net.backward_selected(&batch).unwrap();
        let mut max_err = 0.0_f64;
        for layer in &honest.layers {
            for &g in layer.weights.iter().chain(&layer.biases) {
                max_err = max_err.max(relative_error(g, g * 1.1));
            }
        }
        assert!(max_err > 1e-2, "corruption went unnoticed: {max_err}");
    }
}
