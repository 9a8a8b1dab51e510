use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Detection probability and false-alarm probability.
pub fn pd_pfa(flagged: &[bool], malicious: &[bool]) -> Result<(f64, f64), EvalError> {
    if flagged.len() != malicious.len() {
        return Err(EvalError::Config(format!(
            "{} predictions for {} labels",
            flagged.len(),
            malicious.len()
        )));
    }
    let (mut tp, mut pos, mut fp, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&f, &m) in flagged.iter().zip(malicious) {
        if m {
            pos += 1;
            tp += f as usize;
        } else {
            neg += 1;
            fp += f as usize;
        }
    }
    if pos == 0 {
        return Err(EvalError::UndefinedMetric("no malicious samples".into()));
    }
    if neg == 0 {
        return Err(EvalError::UndefinedMetric("no authentic samples".into()));
    }
    Ok((tp as f64 / pos as f64, fp as f64 / neg as f64))
}

/// Counts with rows as the true class and columns as the prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn from_predictions(
        classes: usize,
        truth: &[usize],
        predicted: &[usize],
    ) -> Result<Self, EvalError> {
        if truth.len() != predicted.len() {
            return Err(EvalError::Config(format!(
                "{} predictions for {} labels",
                predicted.len(),
                truth.len()
            )));
        }
        let mut m = Self::new(classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= classes || p >= classes {
                return Err(EvalError::Config(format!(
                    "class index outside 0..{classes}"
                )));
            }
            m.counts[t][p] += 1;
        }
        Ok(m)
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes()).map(|i| self.counts[i][i]).sum()
    }

    /// Each row divided by its sum; empty rows stay zero.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|r| {
                let s: u64 = r.iter().sum();
                r.iter()
                    .map(|&c| if s == 0 { 0.0 } else { c as f64 / s as f64 })
                    .collect()
            })
            .collect()
    }

    /// Whitespace-free comma grid of row-normalized rates, one row per line.
    pub fn write_grid<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in self.row_normalized() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    ratio(2.0 * p * r, p + r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub tpr: f64,
    pub fpr: f64,
    pub fnr: f64,
    /// TPR / (TPR + FPR).
    pub rate_precision: f64,
    /// TPR / (TPR + FNR).
    pub rate_recall: f64,
    pub rate_f: f64,
    /// TP / (TP + FP).
    pub precision: f64,
    /// TP / (TP + FN).
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfReport {
    /// `None` for classes with no true samples.
    pub per_class: Vec<Option<ClassScores>>,
    pub rate_avg_precision: f64,
    pub rate_avg_recall: f64,
    pub rate_avg_f: f64,
    pub avg_precision: f64,
    pub avg_recall: f64,
    pub avg_f: f64,
    pub accuracy: f64,
    /// Classes left out of the macro averages.
    pub undefined_classes: usize,
}

/// Per-class and macro-averaged scores, both from rates and from counts.
/// Macro F is the harmonic mean of macro precision and macro recall.
pub fn prf_scores(cm: &ConfusionMatrix) -> Result<PrfReport, EvalError> {
    let k = cm.classes();
    if k < 2 {
        return Err(EvalError::Config("need at least two classes".into()));
    }
    let total = cm.total() as f64;
    if total == 0.0 {
        return Err(EvalError::UndefinedMetric("empty confusion matrix".into()));
    }
    let mut per_class = Vec::with_capacity(k);
    for i in 0..k {
        let tp = cm.counts[i][i] as f64;
        let pos = cm.row_sum(i) as f64;
        if pos == 0.0 {
            per_class.push(None);
            continue;
        }
        let fn_ = pos - tp;
        let fp = cm.col_sum(i) as f64 - tp;
        let neg = total - pos;
        let tpr = tp / pos;
        let fnr = fn_ / pos;
        let fpr = ratio(fp, neg);
        let rate_precision = ratio(tpr, tpr + fpr);
        let rate_recall = ratio(tpr, tpr + fnr);
        let precision = ratio(tp, tp + fp);
        per_class.push(Some(ClassScores {
            tpr,
            fpr,
            fnr,
            rate_precision,
            rate_recall,
            rate_f: harmonic(rate_precision, rate_recall),
            precision,
            recall: tpr,
            f1: harmonic(precision, tpr),
        }));
    }
    let defined: Vec<&ClassScores> = per_class.iter().flatten().collect();
    let mean = |f: fn(&ClassScores) -> f64| {
        defined.iter().map(|s| f(s)).sum::<f64>() / defined.len() as f64
    };
    let rate_avg_precision = mean(|s| s.rate_precision);
    let rate_avg_recall = mean(|s| s.rate_recall);
    let avg_precision = mean(|s| s.precision);
    let avg_recall = mean(|s| s.recall);
    Ok(PrfReport {
        undefined_classes: k - defined.len(),
        rate_avg_precision,
        rate_avg_recall,
        rate_avg_f: harmonic(rate_avg_precision, rate_avg_recall),
        avg_precision,
        avg_recall,
        avg_f: harmonic(avg_precision, avg_recall),
        accuracy: cm.correct() as f64 / total,
        per_class,
    })
}

/// Per-class rows followed by a macro row, both score families labeled.
pub fn write_prf_table<W: Write>(
    report: &PrfReport,
    names: &[String],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(
        out,
        "class,precision,recall,f1,rate_precision,rate_recall,rate_f"
    )?;
    for (name, s) in names.iter().zip(&report.per_class) {
        match s {
            Some(s) => writeln!(
                out,
                "{name},{},{},{},{},{},{}",
                s.precision, s.recall, s.f1, s.rate_precision, s.rate_recall, s.rate_f
            )?,
            None => writeln!(out, "{name},,,,,,")?,
        }
    }
    writeln!(
        out,
        "macro,{},{},{},{},{},{}",
        report.avg_precision,
        report.avg_recall,
        report.avg_f,
        report.rate_avg_precision,
        report.rate_avg_recall,
        report.rate_avg_f
    )?;
    writeln!(out, "accuracy,{}", report.accuracy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_everything() {
        assert_eq!(
            pd_pfa(&[true; 4], &[true, false, true, false]).unwrap(),
            (1.0, 1.0)
        );
        assert!(matches!(
            pd_pfa(&[true], &[true]),
            Err(EvalError::UndefinedMetric(_))
        ));
    }

    #[test]
    fn perfect_classifier() {
        let cm = ConfusionMatrix::from_predictions(3, &[0, 1, 2, 2], &[0, 1, 2, 2]).unwrap();
        let r = prf_scores(&cm).unwrap();
        assert_eq!((r.avg_f, r.rate_avg_f, r.accuracy), (1.0, 1.0, 1.0));
    }

    #[test]
    fn empty_row_excluded() {
        let cm = ConfusionMatrix {
            counts: vec![vec![3, 1, 0], vec![0, 4, 0], vec![0, 0, 0]],
        };
        let r = prf_scores(&cm).unwrap();
        assert_eq!(r.undefined_classes, 1);
        assert!(r.per_class[2].is_none());
        assert_eq!(r.avg_recall, (0.75 + 1.0) / 2.0);
    }
}
