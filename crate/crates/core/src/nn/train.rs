use std::io::Write;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::model::{argmax, cross_entropy, MlpModel, Mode};
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub l2_coefficient: f64,
    pub seed: u64,
    /// Oversample minority classes up to the largest class each epoch.
    pub balance_classes: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 32,
            adam: AdamConfig::default(),
            l2_coefficient: 1e-4,
            seed: 0,
            balance_classes: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        if self.epochs == 0 {
            return Err(NnError::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(NnError::Config("batch size must be at least 1".into()));
        }
        if !(self.adam.learning_rate > 0.0) || self.l2_coefficient < 0.0 {
            return Err(NnError::Config(
                "learning rate must be positive and l2 nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Feature rows with integer class targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Vec<usize>, classes: usize) -> Result<Self, NnError> {
        if x.nrows() != y.len() {
            return Err(NnError::Shape(format!(
                "{} rows but {} targets",
                x.nrows(),
                y.len()
            )));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= classes) {
            return Err(NnError::Shape(format!(
                "target {bad} outside {classes} classes"
            )));
        }
        Ok(Self { x, y, classes })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            classes: self.classes,
        }
    }
}

pub fn one_hot(y: &[usize], classes: usize) -> Array2<f64> {
    let mut t = Array2::zeros((y.len(), classes));
    for (i, &c) in y.iter().enumerate() {
        t[[i, c]] = 1.0;
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
}

impl History {
    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|r| r.epoch == self.best_epoch)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "epoch,train_loss,val_loss,val_accuracy")?;
        for r in &self.epochs {
            writeln!(
                out,
                "{},{},{},{}",
                r.epoch, r.train_loss, r.val_loss, r.val_accuracy
            )?;
        }
        Ok(())
    }
}

/// Mean loss (cross-entropy plus L2) and accuracy in inference mode.
pub fn evaluate(model: &MlpModel, data: &Dataset, l2: f64) -> Result<(f64, f64), NnError> {
    let probs = model.forward(data.x.view(), Mode::Inference)?;
    let loss =
        cross_entropy(&probs, one_hot(&data.y, data.classes).view())? + l2 * model.weight_sq_sum();
    let correct = probs
        .rows()
        .into_iter()
        .zip(&data.y)
        .filter(|(r, &y)| argmax(r.as_slice().unwrap()) == y)
        .count();
    Ok((loss, correct as f64 / data.len() as f64))
}

fn epoch_order(data: &Dataset, balance: bool, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    if balance {
        let mut by_class = vec![Vec::new(); data.classes];
        for (i, &c) in data.y.iter().enumerate() {
            by_class[c].push(i);
        }
        let target = by_class.iter().map(Vec::len).max().unwrap_or(0);
        for members in by_class.iter().filter(|m| !m.is_empty()) {
            for k in members.len()..target {
                order.push(members[k % members.len()]);
            }
        }
    }
    order.shuffle(rng);
    order
}

/// Mini-batch Adam training. On return `model` holds the parameters from the
/// epoch with the highest validation accuracy (earliest on ties).
pub fn train(
    model: &mut MlpModel,
    train_set: &Dataset,
    val_set: &Dataset,
    cfg: &TrainConfig,
) -> Result<History, NnError> {
    cfg.validate()?;
    model.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(NnError::Config(
            "training and validation sets must be nonempty".into(),
        ));
    }
    if model.classes() != Some(train_set.classes) || val_set.classes != train_set.classes {
        return Err(NnError::Shape(format!(
            "model has {:?} outputs, data has {} classes",
            model.classes(),
            train_set.classes
        )));
    }
    let shapes: Vec<usize> = model.params_mut().iter().map(|p| p.len()).collect();
    let mut opt = Adam::new(cfg.adam, &shapes);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut history = History::default();
    let mut best: Option<(f64, MlpModel)> = None;

    for epoch in 1..=cfg.epochs {
        let order = epoch_order(train_set, cfg.balance_classes, &mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let x = train_set.x.select(Axis(0), batch);
            let y: Vec<usize> = batch.iter().map(|&i| train_set.y[i]).collect();
            let t = one_hot(&y, train_set.classes);
            let trace = model.trace(x.view())?;
            loss_sum += batch.len() as f64
                * (cross_entropy(&trace.probs, t.view())?
                    + cfg.l2_coefficient * model.weight_sq_sum());
            let grads = model.backward(&trace, t.view(), cfg.l2_coefficient)?;
            model.update_running_stats(&trace);
            opt.step(model.params_mut(), &grads.0)?;
        }
        let (val_loss, val_accuracy) = evaluate(model, val_set, cfg.l2_coefficient)?;
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / order.len() as f64,
            val_loss,
            val_accuracy,
        });
        if best.as_ref().is_none_or(|(acc, _)| val_accuracy > *acc) {
            best = Some((val_accuracy, model.clone()));
            history.best_epoch = epoch;
        }
    }
    if let Some((_, snapshot)) = best {
        *model = snapshot;
    }
    Ok(history)
}
