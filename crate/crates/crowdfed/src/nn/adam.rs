//! Bias-corrected Adam.

use super::network::{Gradients, LayerGrads, QNetwork};
use super::NnError;

/// Adam hyperparameters. The step size is the table value λ = 0.001.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            step_size: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second-moment accumulators plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<LayerGrads>,
    v: Vec<LayerGrads>,
    step: u64,
    params: AdamParams,
}

impl AdamState {
    pub fn new(net: &QNetwork, params: AdamParams) -> Self {
        let zeros = Gradients::zeros_like(net);
        AdamState {
            m: zeros.layers.clone(),
            v: zeros.layers,
            step: 0,
            params,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn params(&self) -> &AdamParams {
        &self.params
    }

    /// One Adam update: m ← β₁m + (1−β₁)g, v ← β₂v + (1−β₂)g², parameters
    /// move by −λ·m̂/(√v̂ + ε) with bias-corrected m̂, v̂.
    pub fn apply(&mut self, net: &mut QNetwork, grads: &Gradients) -> Result<(), NnError> {
        if !grads.matches_shape(net) || self.m.len() != net.layers().len() {
            return Err(NnError::ShapeMismatch);
        }
        self.step += 1;
        let p = self.params;
        let m_corr = 1.0 - p.beta1.powi(self.step as i32);
        let v_corr = 1.0 - p.beta2.powi(self.step as i32);
        for ((layer, g), (m, v)) in net
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            update(
                &mut layer.weights,
                &g.weights,
                &mut m.weights,
                &mut v.weights,
                p,
                m_corr,
                v_corr,
            );
            update(
                &mut layer.biases,
                &g.biases,
                &mut m.biases,
                &mut v.biases,
                p,
                m_corr,
                v_corr,
            );
        }
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    p: AdamParams,
    m_corr: f64,
    v_corr: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = p.beta1 * m[i] + (1.0 - p.beta1) * g;
        v[i] = p.beta2 * v[i] + (1.0 - p.beta2) * g * g;
        let m_hat = m[i] / m_corr;
        let v_hat = v[i] / v_corr;
        params[i] -= p.step_size * m_hat / (v_hat.sqrt() + p.epsilon);
    }
}
