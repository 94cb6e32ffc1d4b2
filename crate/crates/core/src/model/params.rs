use serde::{Deserialize, Serialize};

use crate::numeric::{dot, SeededRng};

/// Handle to one named tensor inside [`Params`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorId(pub(crate) usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl TensorInfo {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// All trainable parameters in one flat buffer, addressed by named tensors.
///
/// The flat layout is what the optimizer and gradient checks operate on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params {
    values: Vec<f64>,
    tensors: Vec<TensorInfo>,
}

impl Params {
    pub(crate) fn add(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> TensorId {
        let offset = self.values.len();
        self.values.resize(offset + rows * cols, 0.0);
        self.tensors.push(TensorInfo {
            name: name.into(),
            rows,
            cols,
            offset,
        });
        TensorId(self.tensors.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tensors(&self) -> &[TensorInfo] {
        &self.tensors
    }

    pub fn info(&self, id: TensorId) -> &TensorInfo {
        &self.tensors[id.0]
    }

    pub fn get(&self, id: TensorId) -> &[f64] {
        &self.values[self.info(id).range()]
    }

    pub fn get_mut(&mut self, id: TensorId) -> &mut [f64] {
        let range = self.tensors[id.0].range();
        &mut self.values[range]
    }

    pub fn find(&self, name: &str) -> Option<TensorId> {
        self.tensors
            .iter()
            .position(|t| t.name == name)
            .map(TensorId)
    }

    /// Glorot-uniform fill `U(-√(6/(fan_in+fan_out)), +)` with `fan_in = cols`.
    pub(crate) fn init_glorot(&mut self, id: TensorId, rng: &mut SeededRng) {
        let info = self.info(id).clone();
        let limit = (6.0 / (info.rows + info.cols) as f64).sqrt();
        for w in self.get_mut(id) {
            *w = rng.uniform_range(-limit, limit);
        }
    }
}

/// Fully connected layer `y = W x + b`, `W` stored `out × in`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dense {
    pub weight: TensorId,
    pub bias: TensorId,
    pub inputs: usize,
    pub outputs: usize,
}

impl Dense {
    pub(crate) fn new(params: &mut Params, name: &str, inputs: usize, outputs: usize) -> Self {
        Dense {
            weight: params.add(format!("{name}.weight"), outputs, inputs),
            bias: params.add(format!("{name}.bias"), 1, outputs),
            inputs,
            outputs,
        }
    }

    pub fn forward(&self, params: &Params, x: &[f64]) -> Vec<f64> {
        let w = params.get(self.weight);
        params
            .get(self.bias)
            .iter()
            .enumerate()
            .map(|(i, b)| b + dot(&w[i * self.inputs..(i + 1) * self.inputs], x))
            .collect()
    }

    /// Accumulates parameter gradients into `grads` and returns `∂L/∂x`.
    pub fn backward(
        &self,
        params: &Params,
        x: &[f64],
        dout: &[f64],
        grads: &mut [f64],
    ) -> Vec<f64> {
        let w_info = params.info(self.weight);
        let b_info = params.info(self.bias);
        let w = params.get(self.weight);
        let mut dx = vec![0.0; self.inputs];
        for (i, &g) in dout.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grads[b_info.offset + i] += g;
            let row = w_info.offset + i * self.inputs;
            for (j, &xj) in x.iter().enumerate() {
                grads[row + j] += g * xj;
                dx[j] += g * w[i * self.inputs + j];
            }
        }
        dx
    }
}
