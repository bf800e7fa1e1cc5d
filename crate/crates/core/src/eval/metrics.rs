use serde::{Deserialize, Serialize};

/// Precision, recall and F1 of one class (or an average of several).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Harmonic mean of P and R; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Prf {
    pub fn from_pr(precision: f64, recall: f64) -> Prf {
        Prf {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }

    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Prf {
        Prf::from_pr(ratio(tp, tp + fp), ratio(tp, tp + fn_))
    }

    /// Component-wise mean; F1 is averaged, not recomputed. Empty input
    /// gives zeros.
    pub fn mean<'a>(items: impl IntoIterator<Item = &'a Prf>) -> Prf {
        let mut sum = Prf::default();
        let mut n = 0usize;
        for p in items {
            sum.precision += p.precision;
            sum.recall += p.recall;
            sum.f1 += p.f1;
            n += 1;
        }
        if n == 0 {
            return Prf::default();
        }
        let n = n as f64;
        Prf {
            precision: sum.precision / n,
            recall: sum.recall / n,
            f1: sum.f1 / n,
        }
    }
}

/// Counts indexed `[gold][predicted]`; labels are added on first use.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_labels<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        let mut cm = Self::new();
        for l in labels {
            cm.ensure(&l.into());
        }
        cm
    }

    fn ensure(&mut self, label: &str) -> usize {
        if let Some(i) = self.position(label) {
            return i;
        }
        self.labels.push(label.to_string());
        for row in &mut self.counts {
            row.push(0);
        }
        self.counts.push(vec![0; self.labels.len()]);
        self.labels.len() - 1
    }

    fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn add(&mut self, gold: &str, predicted: &str) {
        self.add_n(gold, predicted, 1);
    }

    pub fn add_n(&mut self, gold: &str, predicted: &str, n: usize) {
        let g = self.ensure(gold);
        let p = self.ensure(predicted);
        self.counts[g][p] += n;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (g, row) in other.labels.iter().zip(&other.counts) {
            for (p, &n) in other.labels.iter().zip(row) {
                if n > 0 {
                    self.add_n(g, p, n);
                }
            }
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn count(&self, gold: &str, predicted: &str) -> usize {
        match (self.position(gold), self.position(predicted)) {
            (Some(g), Some(p)) => self.counts[g][p],
            _ => 0,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Number of gold instances of a class.
    pub fn support(&self, class: &str) -> usize {
        self.position(class).map_or(0, |i| self.counts[i].iter().sum())
    }

    pub fn predicted(&self, class: &str) -> usize {
        self.position(class).map_or(0, |i| self.counts.iter().map(|r| r[i]).sum())
    }

    pub fn prf(&self, class: &str) -> Prf {
        let tp = self.count(class, class);
        Prf::from_counts(tp, self.predicted(class) - tp, self.support(class) - tp)
    }

    /// Share of instances on the diagonal; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        let diag: usize = (0..self.labels.len()).map(|i| self.counts[i][i]).sum();
        ratio(diag, self.total())
    }

    /// Rows are gold labels, columns predictions.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("gold\\predicted");
        for l in &self.labels {
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.counts) {
            out.push_str(l);
            for n in row {
                out.push('\t');
                out.push_str(&n.to_string());
            }
            out.push('\n');
        }
        out
    }
}
