//! Dense feed-forward network and the backward pass for the selected-output
//! mean-squared loss.

use rand::Rng;

use super::NnError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layer {
    /// Row-major `[out_dim][in_dim]`.
    pub(crate) weights: Vec<f64>,
    pub(crate) biases: Vec<f64>,
    pub(crate) in_dim: usize,
    pub(crate) out_dim: usize,
}

impl Layer {
    fn new<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        // Scaled uniform fan-in/fan-out initialization. Biases are drawn from
        // the same range rather than zeroed so that a zero input still lands
        // on a smooth region of the rectifier.
        let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        let biases = (0..out_dim).map(|_| rng.gen_range(-bound..bound)).collect();
        Layer {
            weights,
            biases,
            in_dim,
            out_dim,
        }
    }

    /// Affine map into `out`, no activation.
    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for row in 0..self.out_dim {
            let w = &self.weights[row * self.in_dim..(row + 1) * self.in_dim];
            let mut acc = self.biases[row];
            for (wi, xi) in w.iter().zip(input) {
                acc += wi * xi;
            }
            out.push(acc);
        }
    }

    fn affine_row(&self, input: &[f64], row: usize) -> f64 {
        let w = &self.weights[row * self.in_dim..(row + 1) * self.in_dim];
        let mut acc = self.biases[row];
        for (wi, xi) in w.iter().zip(input) {
            acc += wi * xi;
        }
        acc
    }
}

fn relu_in_place(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Q-value network: rectifier hidden layers, linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layers: Vec<Layer>,
}

/// One training sample for the selected-output loss: input features, the
/// output unit of the action actually taken, and its regression target.
#[derive(Debug, Clone, Copy)]
pub struct SelectedSample<'a> {
    pub input: &'a [f64],
    pub action: usize,
    pub target: f64,
}

/// Per-parameter gradients, shaped exactly like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub(crate) layers: Vec<LayerGrads>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LayerGrads {
    pub(crate) weights: Vec<f64>,
    pub(crate) biases: Vec<f64>,
}

impl Gradients {
    pub(crate) fn zeros_like(net: &QNetwork) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrads {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    pub(crate) fn matches_shape(&self, net: &QNetwork) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                g.weights.len() == l.weights.len() && g.biases.len() == l.biases.len()
            })
    }
}

impl QNetwork {
    /// Builds a network with the given layer size chain, e.g.
    /// `[6, 32, 32, 32, 4096]`. Panics if fewer than two sizes or any size is
    /// zero.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        assert!(sizes.iter().all(|&s| s > 0), "layer sizes must be positive");
        let layers = sizes
            .windows(2)
            .map(|w| Layer::new(w[0], w[1], rng))
            .collect();
        QNetwork { layers }
    }

    pub(crate) fn from_layers(layers: Vec<Layer>) -> Self {
        QNetwork { layers }
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    /// The size chain this network was built with.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].in_dim];
        sizes.extend(self.layers.iter().map(|l| l.out_dim));
        sizes
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    fn check_input(&self, input: &[f64]) -> Result<(), NnError> {
        if input.len() != self.input_size() {
            return Err(NnError::DimensionMismatch {
                expected: self.input_size(),
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Full forward pass: Q-values for every point of the action grid.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(input)?;
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&current, &mut next);
            if i + 1 < self.layers.len() {
                relu_in_place(&mut next);
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    /// Activations entering the output layer. Combined with
    /// [`QNetwork::q_at`] this evaluates only the output units a caller
    /// cares about, which is much cheaper than [`QNetwork::forward`] when
    /// the feasible subset is small.
    pub fn hidden_forward(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(input)?;
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers[..self.layers.len() - 1] {
            layer.affine(&current, &mut next);
            relu_in_place(&mut next);
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    /// Single output unit from precomputed hidden activations.
    pub fn q_at(&self, hidden: &[f64], action: usize) -> f64 {
        let out = self.layers.last().unwrap();
        debug_assert!(action < out.out_dim);
        debug_assert_eq!(hidden.len(), out.in_dim);
        out.affine_row(hidden, action)
    }

    /// Post-activation values of every layer; index 0 is the input itself.
    fn activations(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut next = Vec::new();
            layer.affine(acts.last().unwrap(), &mut next);
            if i + 1 < self.layers.len() {
                relu_in_place(&mut next);
            }
            acts.push(next);
        }
        acts
    }

    /// Batch loss of the selected-output mean squared error,
    /// (1/N) Σ (yₖ − Q(xₖ)[aₖ])².
    pub fn selected_loss(&self, batch: &[SelectedSample<'_>]) -> Result<f64, NnError> {
        if batch.is_empty() {
            return Err(NnError::EmptyBatch);
        }
        let mut total = 0.0;
        for sample in batch {
            let hidden = self.hidden_forward(sample.input)?;
            if sample.action >= self.output_size() {
                return Err(NnError::IndexOutOfRange {
                    index: sample.action,
                    size: self.output_size(),
                });
            }
            let q = self.q_at(&hidden, sample.action);
            total += (sample.target - q) * (sample.target - q);
        }
        Ok(total / batch.len() as f64)
    }

    /// Gradient of [`QNetwork::selected_loss`] with respect to every
    /// parameter. Only the taken action's output unit receives loss signal;
    /// all other output rows get zero gradient.
    pub fn backward_selected(
        &self,
        batch: &[SelectedSample<'_>],
    ) -> Result<Gradients, NnError> {
        if batch.is_empty() {
            return Err(NnError::EmptyBatch);
        }
        let mut grads = Gradients::zeros_like(self);
        let scale = 1.0 / batch.len() as f64;
        let depth = self.layers.len();
        for sample in batch {
            if sample.action >= self.output_size() {
                return Err(NnError::IndexOutOfRange {
                    index: sample.action,
                    size: self.output_size(),
                });
            }
            let acts = self.activations(sample.input);
            let q = acts[depth][sample.action];
            // dL/dq for this sample; every other output unit has zero delta.
            let delta_out = 2.0 * (q - sample.target) * scale;

            // Output layer: only the selected row accumulates gradient.
            let out_layer = &self.layers[depth - 1];
            let hidden = &acts[depth - 1];
            {
                let g = &mut grads.layers[depth - 1];
                let row = sample.action * out_layer.in_dim;
                for (j, h) in hidden.iter().enumerate() {
                    g.weights[row + j] += delta_out * h;
                }
                g.biases[sample.action] += delta_out;
            }

            // Delta entering the last hidden layer.
            let mut delta: Vec<f64> = {
                let row =
                    &out_layer.weights[sample.action * out_layer.in_dim..][..out_layer.in_dim];
                row.iter()
                    .zip(hidden)
                    .map(|(w, h)| if *h > 0.0 { w * delta_out } else { 0.0 })
                    .collect()
            };

            // Remaining layers, walking backwards.
            for l in (0..depth - 1).rev() {
                let layer = &self.layers[l];
                let input = &acts[l];
                {
                    let g = &mut grads.layers[l];
                    for (row, d) in delta.iter().enumerate() {
                        if *d == 0.0 {
                            continue;
                        }
                        let base = row * layer.in_dim;
                        for (j, x) in input.iter().enumerate() {
                            g.weights[base + j] += d * x;
                        }
                        g.biases[row] += d;
                    }
                }
                if l > 0 {
                    // Propagate through the affine map and the rectifier of
                    // the previous layer's output.
                    let mut prev = vec![0.0; layer.in_dim];
                    for (row, d) in delta.iter().enumerate() {
                        if *d == 0.0 {
                            continue;
                        }
                        let w = &layer.weights[row * layer.in_dim..(row + 1) * layer.in_dim];
                        for (p, wi) in prev.iter_mut().zip(w) {
                            *p += wi * d;
                        }
                    }
                    for (p, x) in prev.iter_mut().zip(input) {
                        if *x <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        Ok(grads)
    }

    /// True iff every parameter is finite.
    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|w| w.is_finite()) && l.biases.iter().all(|b| b.is_finite())
        })
    }

    pub(crate) fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }
}
