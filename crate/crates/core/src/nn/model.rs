use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::layers::{BatchNormLayer, DenseLayer, Layer};
use super::NnError;

/// Probabilities below this are clamped before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch-norm uses batch statistics.
    Train,
    /// Batch-norm uses running statistics.
    Inference,
}

/// Ordered layer stack with an implicit softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
}

enum Cache {
    Dense {
        input: Array2<f64>,
    },
    BatchNorm {
        x_hat: Array2<f64>,
        inv_std: Array1<f64>,
        mean: Array1<f64>,
        var: Array1<f64>,
    },
    Relu {
        input: Array2<f64>,
    },
}

/// Activations kept from a training-mode forward pass.
pub struct Trace {
    caches: Vec<Cache>,
    pub logits: Array2<f64>,
    pub probs: Array2<f64>,
}

/// One gradient buffer per parameter tensor, in [`MlpModel::params_mut`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Vec<f64>>);

pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

impl MlpModel {
    pub fn input_width(&self) -> Option<usize> {
        self.layers.iter().find_map(|l| match l {
            Layer::Dense(d) => Some(d.fan_in()),
            _ => None,
        })
    }

    pub fn classes(&self) -> Option<usize> {
        self.layers.iter().rev().find_map(|l| match l {
            Layer::Dense(d) => Some(d.fan_out()),
            _ => None,
        })
    }

    /// Check that consecutive layers agree on their widths.
    pub fn validate(&self) -> Result<(), NnError> {
        let mut width = self
            .input_width()
            .ok_or_else(|| NnError::Shape("model has no dense layer".into()))?;
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Dense(d) => {
                    if d.fan_in() != width || d.biases.len() != d.fan_out() {
                        return Err(NnError::Shape(format!(
                            "layer {i}: dense expects {} inputs, gets {width}",
                            d.fan_in()
                        )));
                    }
                    width = d.fan_out();
                }
                Layer::BatchNorm(b) => {
                    let n = b.features();
                    if n != width
                        || b.beta.len() != n
                        || b.running_mean.len() != n
                        || b.running_var.len() != n
                    {
                        return Err(NnError::Shape(format!(
                            "layer {i}: batch norm width {n}, input {width}"
                        )));
                    }
                }
                Layer::Relu => {}
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<(), NnError> {
        let want = self.input_width().unwrap_or(0);
        if x.ncols() != want {
            return Err(NnError::Shape(format!(
                "input has {} features, model expects {want}",
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Pre-softmax activations.
    pub fn logits(&self, x: ArrayView2<f64>, mode: Mode) -> Result<Array2<f64>, NnError> {
        if mode == Mode::Train {
            return Ok(self.trace(x)?.logits);
        }
        self.check_input(&x)?;
        let mut a = x.to_owned();
        for layer in &self.layers {
            a = match layer {
                Layer::Dense(d) => dense_forward(d, a.view()),
                Layer::BatchNorm(b) => {
                    let inv_std = b.running_var.mapv(|v| 1.0 / (v + b.epsilon).sqrt());
                    (&a - &b.running_mean) * &inv_std * &b.gamma + &b.beta
                }
                Layer::Relu => a.mapv(relu),
            };
        }
        Ok(a)
    }

    pub fn forward(&self, x: ArrayView2<f64>, mode: Mode) -> Result<Array2<f64>, NnError> {
        Ok(softmax_rows(&self.logits(x, mode)?))
    }

    /// Training-mode forward pass that keeps what backprop needs.
    pub fn trace(&self, x: ArrayView2<f64>) -> Result<Trace, NnError> {
        self.check_input(&x)?;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for layer in &self.layers {
            a = match layer {
                Layer::Dense(d) => {
                    let out = dense_forward(d, a.view());
                    caches.push(Cache::Dense { input: a });
                    out
                }
                Layer::BatchNorm(b) => {
                    let mean = a.mean_axis(Axis(0)).expect("non-empty batch");
                    let centered = &a - &mean;
                    let var = centered.mapv(|v| v * v).mean_axis(Axis(0)).unwrap();
                    let inv_std = var.mapv(|v| 1.0 / (v + b.epsilon).sqrt());
                    let x_hat = centered * &inv_std;
                    let out = &x_hat * &b.gamma + &b.beta;
                    caches.push(Cache::BatchNorm {
                        x_hat,
                        inv_std,
                        mean,
                        var,
                    });
                    out
                }
                Layer::Relu => {
                    let out = a.mapv(relu);
                    caches.push(Cache::Relu { input: a });
                    out
                }
            };
        }
        let probs = softmax_rows(&a);
        Ok(Trace {
            caches,
            logits: a,
            probs,
        })
    }

    /// Fold a trace's batch statistics into the running estimates.
    pub fn update_running_stats(&mut self, trace: &Trace) {
        for (layer, cache) in self.layers.iter_mut().zip(&trace.caches) {
            if let (Layer::BatchNorm(b), Cache::BatchNorm { mean, var, .. }) = (layer, cache) {
                let m = b.momentum;
                b.running_mean = &b.running_mean * m + mean * (1.0 - m);
                b.running_var = &b.running_var * m + var * (1.0 - m);
            }
        }
    }

    /// Σ of squared dense weights (biases and batch-norm parameters excluded).
    pub fn weight_sq_sum(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Dense(d) => d.weights.iter().map(|w| w * w).sum(),
                _ => 0.0,
            })
            .sum()
    }

    /// Mean cross-entropy against one-hot targets plus `l2 Σ w²`.
    pub fn loss(
        &self,
        x: ArrayView2<f64>,
        targets: ArrayView2<f64>,
        l2: f64,
        mode: Mode,
    ) -> Result<f64, NnError> {
        let probs = self.forward(x, mode)?;
        Ok(cross_entropy(&probs, targets)? + l2 * self.weight_sq_sum())
    }

    /// Analytic gradient of [`MlpModel::loss`] (training mode) for every parameter.
    pub fn backward(
        &self,
        trace: &Trace,
        targets: ArrayView2<f64>,
        l2: f64,
    ) -> Result<Gradients, NnError> {
        if targets.dim() != trace.probs.dim() {
            return Err(NnError::Shape(format!(
                "targets {:?} vs outputs {:?}",
                targets.dim(),
                trace.probs.dim()
            )));
        }
        let n = targets.nrows() as f64;
        let mut delta = (&trace.probs - &targets) / n;
        let mut grads: Vec<Vec<Vec<f64>>> = Vec::with_capacity(self.layers.len());
        for (layer, cache) in self.layers.iter().zip(&trace.caches).rev() {
            match (layer, cache) {
                (Layer::Dense(d), Cache::Dense { input }) => {
                    let mut dw = delta.t().dot(input);
                    dw.scaled_add(2.0 * l2, &d.weights);
                    let db = delta.sum_axis(Axis(0));
                    delta = delta.dot(&d.weights);
                    grads.push(vec![into_vec(dw), db.to_vec()]);
                }
                (Layer::BatchNorm(b), Cache::BatchNorm { x_hat, inv_std, .. }) => {
                    let dgamma = (&delta * x_hat).sum_axis(Axis(0));
                    let dbeta = delta.sum_axis(Axis(0));
                    let dx_hat = &delta * &b.gamma;
                    let m = delta.nrows() as f64;
                    let sum_dx_hat = dx_hat.sum_axis(Axis(0));
                    let sum_dx_hat_xhat = (&dx_hat * x_hat).sum_axis(Axis(0));
                    delta = (dx_hat * m - &sum_dx_hat - x_hat * &sum_dx_hat_xhat) * inv_std / m;
                    grads.push(vec![dgamma.to_vec(), dbeta.to_vec()]);
                }
                (Layer::Relu, Cache::Relu { input }) => {
                    delta.zip_mut_with(input, |d, &x| {
                        if x <= 0.0 {
                            *d = 0.0
                        }
                    });
                    grads.push(Vec::new());
                }
                _ => unreachable!("trace does not match model"),
            }
        }
        grads.reverse();
        Ok(Gradients(grads.into_iter().flatten().collect()))
    }

    /// Mutable views of every trainable tensor: per dense layer weights then
    /// biases, per batch-norm layer gamma then beta.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Dense(DenseLayer { weights, biases }) => {
                    out.push(weights.as_slice_mut().expect("standard layout"));
                    out.push(biases.as_slice_mut().unwrap());
                }
                Layer::BatchNorm(BatchNormLayer { gamma, beta, .. }) => {
                    out.push(gamma.as_slice_mut().unwrap());
                    out.push(beta.as_slice_mut().unwrap());
                }
                Layer::Relu => {}
            }
        }
        out
    }

    pub fn param_count(&mut self) -> usize {
        self.params_mut().iter().map(|p| p.len()).sum()
    }

    /// Row-wise argmax; ties resolve to the lowest class index.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>, NnError> {
        Ok(self
            .forward(x, Mode::Inference)?
            .rows()
            .into_iter()
            .map(|r| argmax(r.as_slice().unwrap()))
            .collect())
    }
}

fn into_vec(a: Array2<f64>) -> Vec<f64> {
    if a.is_standard_layout() {
        a.into_raw_vec_and_offset().0
    } else {
        a.iter().copied().collect()
    }
}

fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

fn dense_forward(d: &DenseLayer, x: ArrayView2<f64>) -> Array2<f64> {
    x.dot(&d.weights.t()) + &d.biases
}

/// First index of the maximum value.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn cross_entropy(probs: &Array2<f64>, targets: ArrayView2<f64>) -> Result<f64, NnError> {
    if probs.dim() != targets.dim() {
        return Err(NnError::Shape(format!(
            "targets {:?} vs outputs {:?}",
            targets.dim(),
            probs.dim()
        )));
    }
    let n = probs.nrows() as f64;
    let total: f64 = probs
        .iter()
        .zip(targets.iter())
        .map(|(&p, &t)| {
            if t == 0.0 {
                0.0
            } else {
                -t * p.clamp(PROB_FLOOR, 1.0).ln()
            }
        })
        .sum();
    Ok(total / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn single(w: f64, relu: bool) -> MlpModel {
        let mut layers = vec![Layer::Dense(DenseLayer {
            weights: array![[w]],
            biases: array![0.0],
        })];
        if relu {
            layers.push(Layer::Relu);
        }
        MlpModel { layers }
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        let m = MlpModel {
            layers: vec![Layer::Dense(DenseLayer::zeros(4, 5))],
        };
        let p = m
            .forward(array![[1.0, -2.0, 3.0, 0.5]].view(), Mode::Inference)
            .unwrap();
        assert!(p.iter().all(|&v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn relu_clamps_negative_input() {
        let m = single(1.0, true);
        let z = m.logits(array![[-5.0]].view(), Mode::Inference).unwrap();
        assert_eq!(z[[0, 0]], 0.0);
    }

    #[test]
    fn softmax_survives_huge_logits() {
        let p = softmax_rows(&array![[1e4, -1e4, 0.0], [3.0, 3.0, 3.0]]);
        for row in p.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn loss_closed_forms() {
        let m = MlpModel {
            layers: vec![Layer::Dense(DenseLayer::zeros(2, 3))],
        };
        let t = array![[1.0, 0.0, 0.0]];
        let l = m
            .loss(array![[0.3, 0.1]].view(), t.view(), 0.5, Mode::Inference)
            .unwrap();
        assert!((l - 3f64.ln()).abs() < 1e-15);

        let p = array![[1.0, 0.0, 0.0]];
        assert_eq!(cross_entropy(&p, t.view()).unwrap(), 0.0);
    }

    #[test]
    fn l2_penalty_is_linear_in_coefficient() {
        let m = single(0.7, false);
        let x = array![[1.0]];
        let t = array![[1.0]];
        let base = m.loss(x.view(), t.view(), 0.0, Mode::Inference).unwrap();
        let a = m.loss(x.view(), t.view(), 0.1, Mode::Inference).unwrap() - base;
        let b = m.loss(x.view(), t.view(), 0.2, Mode::Inference).unwrap() - base;
        assert!((b - 2.0 * a).abs() < 1e-15);
        assert!((a - 0.1 * 0.49).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let m = single(1.0, false);
        assert!(matches!(
            m.forward(array![[1.0, 2.0]].view(), Mode::Inference),
            Err(NnError::Shape(_))
        ));
    }

    #[test]
    fn argmax_ties_pick_lowest() {
        assert_eq!(argmax(&[0.25, 0.25, 0.25, 0.25]), 0);
        assert_eq!(argmax(&[0.1, 0.4, 0.4, 0.1]), 1);
    }
}
