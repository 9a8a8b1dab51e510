use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{pd_pfa, prf_scores, ConfusionMatrix, PrfReport};
use super::split::{split_dataset, Split, SplitSpec};
use super::EvalError;
use crate::detector::IcaoIndex;
use crate::features::FeatureTable;
use crate::nn::{train, Dataset, History, MlpModel, ModelSpec, TrainConfig};
use crate::phy::Label;
use crate::synth::stream_rng;

/// Seeds and optimizer settings shared by every cell of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub split_seed: u64,
    pub model_seed: u64,
    pub subset_seed: u64,
}

impl ExperimentConfig {
    /// Defaults with the preset's epoch count and every seed derived from `seed`.
    pub fn for_preset(spec: &ModelSpec, seed: u64) -> Self {
        Self {
            train: TrainConfig {
                epochs: spec.epochs,
                seed,
                ..TrainConfig::default()
            },
            split_seed: seed,
            model_seed: seed,
            subset_seed: seed,
        }
    }
}

/// Binary targets: 1 for any attack label.
pub fn message_dataset(table: &FeatureTable) -> Dataset {
    Dataset {
        x: table.x.clone(),
        y: table
            .labels
            .iter()
            .map(|l| l.is_malicious() as usize)
            .collect(),
        classes: 2,
    }
}

/// One class per transmitter, ordered as in `index`.
pub fn aircraft_dataset(table: &FeatureTable, index: &IcaoIndex) -> Result<Dataset, EvalError> {
    let y = table
        .truth_icao
        .iter()
        .map(|t| {
            t.and_then(|icao| index.class_of(icao)).ok_or_else(|| {
                EvalError::Config(format!("row with source {t:?} is not in the class index"))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset {
        x: table.x.clone(),
        y,
        classes: index.len(),
    })
}

#[derive(Debug, Clone)]
pub struct ClassificationRun {
    pub model: MlpModel,
    pub history: History,
    pub split: Split,
    pub confusion: ConfusionMatrix,
    pub report: PrfReport,
}

fn fit(
    data: &Dataset,
    split: &Split,
    train_rows: &[usize],
    spec: &ModelSpec,
    cfg: &ExperimentConfig,
) -> Result<(MlpModel, History), EvalError> {
    let mut model = spec.build(data.x.ncols(), data.classes, cfg.model_seed)?;
    let history = train(
        &mut model,
        &data.subset(train_rows),
        &data.subset(&split.validation),
        &cfg.train,
    )?;
    Ok((model, history))
}

fn test_confusion(
    model: &MlpModel,
    data: &Dataset,
    rows: &[usize],
) -> Result<ConfusionMatrix, EvalError> {
    let test = data.subset(rows);
    let predicted = model.predict(test.x.view())?;
    ConfusionMatrix::from_predictions(data.classes, &test.y, &predicted)
}

/// Stratified 60/20/20 split, train, and score the test part.
pub fn run_classification(
    data: &Dataset,
    spec: &ModelSpec,
    cfg: &ExperimentConfig,
) -> Result<ClassificationRun, EvalError> {
    let split = split_dataset(&data.y, &SplitSpec::with_seed(cfg.split_seed))?;
    run_on_split(data, split, None, spec, cfg)
}

fn run_on_split(
    data: &Dataset,
    split: Split,
    train_rows: Option<Vec<usize>>,
    spec: &ModelSpec,
    cfg: &ExperimentConfig,
) -> Result<ClassificationRun, EvalError> {
    let rows = train_rows.unwrap_or_else(|| split.train.clone());
    let (model, history) = fit(data, &split, &rows, spec, cfg)?;
    let confusion = test_confusion(&model, data, &split.test)?;
    let report = prf_scores(&confusion)?;
    Ok(ClassificationRun {
        model,
        history,
        split,
        confusion,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityRow {
    pub trained_on: Vec<Label>,
    /// Detection probability on the A1, A2 and A3 test rows.
    pub pd: [f64; 3],
    /// False alarms over the pooled A0 test rows.
    pub pfa: f64,
}

fn nonempty_attack_subsets() -> Vec<Vec<Label>> {
    let mut out: Vec<Vec<Label>> = (1u8..8)
        .map(|mask| {
            Label::ATTACKS
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &l)| l)
                .collect()
        })
        .collect();
    out.sort_by_key(|s| (s.len(), s.clone()));
    out
}

/// Train one message classifier per nonempty subset of attacks (always with
/// the authentic rows) and score it against every attack.
pub fn run_attack_diversity(
    table: &FeatureTable,
    spec: &ModelSpec,
    cfg: &ExperimentConfig,
) -> Result<Vec<DiversityRow>, EvalError> {
    for l in Label::ALL {
        if !table.labels.contains(&l) {
            return Err(EvalError::Config(format!("corpus has no {l} rows")));
        }
    }
    let data = message_dataset(table);
    let split = split_dataset(&table.labels, &SplitSpec::with_seed(cfg.split_seed))?;
    let keep = |rows: &[usize], subset: &[Label]| -> Vec<usize> {
        rows.iter()
            .copied()
            .filter(|&r| table.labels[r] == Label::A0 || subset.contains(&table.labels[r]))
            .collect()
    };
    let test = data.subset(&split.test);
    let test_labels: Vec<Label> = split.test.iter().map(|&r| table.labels[r]).collect();
    let mut rows = Vec::new();
    for subset in nonempty_attack_subsets() {
        let cell_split = Split {
            train: keep(&split.train, &subset),
            validation: keep(&split.validation, &subset),
            test: Vec::new(),
        };
        let (model, _) = fit(&data, &cell_split, &cell_split.train, spec, cfg)?;
        let flagged: Vec<bool> = model
            .predict(test.x.view())?
            .into_iter()
            .map(|p| p == 1)
            .collect();
        let mut pd = [0.0; 3];
        let mut pfa = 0.0;
        for (i, attack) in Label::ATTACKS.iter().enumerate() {
            let (f, m): (Vec<bool>, Vec<bool>) = flagged
                .iter()
                .zip(&test_labels)
                .filter(|(_, l)| *l == attack || **l == Label::A0)
                .map(|(&f, l)| (f, l.is_malicious()))
                .unzip();
            (pd[i], pfa) = pd_pfa(&f, &m)?;
        }
        rows.push(DiversityRow {
            trained_on: subset,
            pd,
            pfa,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub accuracy: f64,
    pub avg_f: f64,
    pub rate_avg_f: f64,
}

fn sweep_row(value: f64, report: &PrfReport) -> SweepRow {
    SweepRow {
        value,
        accuracy: report.accuracy,
        avg_f: report.avg_f,
        rate_avg_f: report.rate_avg_f,
    }
}

/// Keep a seeded fraction of every class in the training part; validation
/// and test parts stay fixed. A ratio of 1 keeps the training part as is.
pub fn sweep_training_ratio(
    data: &Dataset,
    spec: &ModelSpec,
    ratios: &[f64],
    cfg: &ExperimentConfig,
) -> Result<Vec<SweepRow>, EvalError> {
    if let Some(r) = ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(EvalError::Config(format!(
            "training ratio {r} outside (0, 1]"
        )));
    }
    let split = split_dataset(&data.y, &SplitSpec::with_seed(cfg.split_seed))?;
    let mut rows = Vec::with_capacity(ratios.len());
    for (cell, &ratio) in ratios.iter().enumerate() {
        let train_rows = if ratio == 1.0 {
            split.train.clone()
        } else {
            let mut rng = stream_rng(cfg.subset_seed, cell as u64);
            let mut kept = Vec::new();
            for c in 0..data.classes {
                let mut members: Vec<usize> = split
                    .train
                    .iter()
                    .copied()
                    .filter(|&r| data.y[r] == c)
                    .collect();
                members.shuffle(&mut rng);
                let n = ((members.len() as f64 * ratio).round() as usize)
                    .max(1)
                    .min(members.len());
                kept.extend(&members[..n]);
            }
            kept.sort_unstable();
            kept
        };
        let run = run_on_split(data, split.clone(), Some(train_rows), spec, cfg)?;
        rows.push(sweep_row(ratio, &run.report));
    }
    Ok(rows)
}

/// Restrict the data to `count` seeded classes (all of them, in order, when
/// `count` equals the class count), relabel, and run a fresh classification.
pub fn sweep_num_classes(
    data: &Dataset,
    spec: &ModelSpec,
    counts: &[usize],
    cfg: &ExperimentConfig,
) -> Result<Vec<SweepRow>, EvalError> {
    let mut rows = Vec::with_capacity(counts.len());
    for &count in counts {
        if count < 2 || count > data.classes {
            return Err(EvalError::Config(format!(
                "class count {count} outside 2..={}",
                data.classes
            )));
        }
        let run = if count == data.classes {
            run_classification(data, spec, cfg)?
        } else {
            let mut classes: Vec<usize> = (0..data.classes).collect();
            classes.shuffle(&mut stream_rng(cfg.subset_seed, count as u64));
            classes.truncate(count);
            classes.sort_unstable();
            let mut remap = vec![None; data.classes];
            for (new, &old) in classes.iter().enumerate() {
                remap[old] = Some(new);
            }
            let keep: Vec<usize> = (0..data.len())
                .filter(|&r| remap[data.y[r]].is_some())
                .collect();
            let mut sub = data.subset(&keep);
            sub.y.iter_mut().for_each(|y| *y = remap[*y].unwrap());
            sub.classes = count;
            run_classification(&sub, spec, cfg)?
        };
        rows.push(sweep_row(count as f64, &run.report));
    }
    Ok(rows)
}

pub fn write_diversity_table<W: Write>(rows: &[DiversityRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "training_set,pd_a1,pd_a2,pd_a3,pfa")?;
    for r in rows {
        let names: Vec<String> = r.trained_on.iter().map(|l| l.to_string()).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            names.join("+"),
            r.pd[0],
            r.pd[1],
            r.pd[2],
            r.pfa
        )?;
    }
    Ok(())
}

pub fn write_sweep_table<W: Write>(
    variable: &str,
    rows: &[SweepRow],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{variable},accuracy,avg_f,rate_avg_f")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.value, r.accuracy, r.avg_f, r.rate_avg_f
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_subsets_in_table_order() {
        let s = nonempty_attack_subsets();
        assert_eq!(s.len(), 7);
        assert_eq!(s[0], vec![Label::A1]);
        assert_eq!(s[6], Label::ATTACKS.to_vec());
    }
}
