//! Forward-backward and Viterbi over a dense score lattice.

/// Per-position emission scores and label-pair transition scores of one
/// sequence. Row `n_labels` of the transition table is the virtual start
/// state.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    len: usize,
    n_labels: usize,
    emission: Vec<f64>,
    transition: Vec<f64>,
}

/// Posterior label probabilities of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    len: usize,
    n_labels: usize,
    node: Vec<f64>,
    edge: Vec<f64>,
}

impl Marginals {
    /// P(y_t = label).
    pub fn node(&self, t: usize, label: usize) -> f64 {
        self.node[t * self.n_labels + label]
    }

    /// P(y_{t-1} = prev, y_t = label), for t ≥ 1.
    pub fn edge(&self, t: usize, prev: usize, label: usize) -> f64 {
        let l = self.n_labels;
        self.edge[((t - 1) * l + prev) * l + label]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

impl Lattice {
    /// `emission` is row-major `len × n_labels`; `transition` is
    /// `(n_labels + 1) × n_labels` with the start state in the last row.
    pub fn new(len: usize, n_labels: usize, emission: Vec<f64>, transition: Vec<f64>) -> Self {
        assert_eq!(emission.len(), len * n_labels, "emission table size");
        assert_eq!(transition.len(), (n_labels + 1) * n_labels, "transition table size");
        Self {
            len,
            n_labels,
            emission,
            transition,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    #[inline]
    pub fn emit(&self, t: usize, label: usize) -> f64 {
        self.emission[t * self.n_labels + label]
    }

    /// `prev = None` is the start state.
    #[inline]
    pub fn trans(&self, prev: Option<usize>, label: usize) -> f64 {
        let row = prev.unwrap_or(self.n_labels);
        self.transition[row * self.n_labels + label]
    }

    /// Unnormalized log score of a complete label sequence.
    pub fn score(&self, labels: &[usize]) -> f64 {
        assert_eq!(labels.len(), self.len);
        let mut prev = None;
        let mut s = 0.0;
        for (t, &y) in labels.iter().enumerate() {
            s += self.trans(prev, y) + self.emit(t, y);
            prev = Some(y);
        }
        s
    }

    fn forward(&self) -> Vec<f64> {
        let l = self.n_labels;
        let mut alpha = vec![0.0; self.len * l];
        for y in 0..l {
            alpha[y] = self.trans(None, y) + self.emit(0, y);
        }
        for t in 1..self.len {
            let (done, rest) = alpha.split_at_mut(t * l);
            let prev = &done[(t - 1) * l..];
            for y in 0..l {
                let lse = log_sum_exp((0..l).map(|p| prev[p] + self.trans(Some(p), y)));
                rest[y] = lse + self.emit(t, y);
            }
        }
        alpha
    }

    fn backward(&self) -> Vec<f64> {
        let l = self.n_labels;
        let mut beta = vec![0.0; self.len * l];
        for t in (0..self.len.saturating_sub(1)).rev() {
            for p in 0..l {
                beta[t * l + p] = log_sum_exp(
                    (0..l).map(|y| self.trans(Some(p), y) + self.emit(t + 1, y) + beta[(t + 1) * l + y]),
                );
            }
        }
        beta
    }

    /// log Σ over all label sequences of exp(score). 0 for an empty lattice.
    pub fn log_partition(&self) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        let alpha = self.forward();
        log_sum_exp(alpha[(self.len - 1) * self.n_labels..].iter().copied())
    }

    pub fn marginals(&self) -> Marginals {
        let (len, l) = (self.len, self.n_labels);
        if len == 0 {
            return Marginals {
                len,
                n_labels: l,
                node: vec![],
                edge: vec![],
            };
        }
        let alpha = self.forward();
        let beta = self.backward();
        let z = log_sum_exp(alpha[(len - 1) * l..].iter().copied());
        let node = alpha
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a + b - z).exp())
            .collect();
        let mut edge = vec![0.0; (len - 1) * l * l];
        for t in 1..len {
            for p in 0..l {
                for y in 0..l {
                    edge[((t - 1) * l + p) * l + y] = (alpha[(t - 1) * l + p]
                        + self.trans(Some(p), y)
                        + self.emit(t, y)
                        + beta[t * l + y]
                        - z)
                        .exp();
                }
            }
        }
        Marginals {
            len,
            n_labels: l,
            node,
            edge,
        }
    }

    /// Best label sequence and its score. Ties resolve to the lowest label
    /// index at every decision.
    pub fn viterbi(&self) -> (Vec<usize>, f64) {
        let (len, l) = (self.len, self.n_labels);
        if len == 0 {
            return (vec![], 0.0);
        }
        let mut delta = vec![0.0; len * l];
        let mut back = vec![0usize; len * l];
        for y in 0..l {
            delta[y] = self.trans(None, y) + self.emit(0, y);
        }
        for t in 1..len {
            for y in 0..l {
                let mut best = (0, f64::NEG_INFINITY);
                for p in 0..l {
                    let s = delta[(t - 1) * l + p] + self.trans(Some(p), y);
                    if s > best.1 {
                        best = (p, s);
                    }
                }
                delta[t * l + y] = best.1 + self.emit(t, y);
                back[t * l + y] = best.0;
            }
        }
        let mut last = 0;
        for y in 1..l {
            if delta[(len - 1) * l + y] > delta[(len - 1) * l + last] {
                last = y;
            }
        }
        let score = delta[(len - 1) * l + last];
        let mut path = vec![0; len];
        path[len - 1] = last;
        for t in (1..len).rev() {
            path[t - 1] = back[t * l + path[t]];
        }
        (path, score)
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random_lattice(rng: &mut ChaCha8Rng, len: usize, l: usize) -> Lattice {
        let emission = (0..len * l).map(|_| rng.random_range(-2.0..2.0)).collect();
        let transition = (0..(l + 1) * l).map(|_| rng.random_range(-2.0..2.0)).collect();
        Lattice::new(len, l, emission, transition)
    }

    fn all_sequences(len: usize, l: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..l).map(move |y| {
                        let mut q = p.clone();
                        q.push(y);
                        q
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn single_position_closed_forms() {
        let lat = Lattice::new(1, 2, vec![0.3, -1.2], vec![0.0; 6]);
        let z = (0.3f64.exp() + (-1.2f64).exp()).ln();
        assert!((lat.log_partition() - z).abs() < 1e-14);
        let m = lat.marginals();
        assert!((m.node(0, 0) - (0.3 - z).exp()).abs() < 1e-14);
        assert_eq!(lat.viterbi().0, vec![0]);
    }

    #[test]
    fn uniform_lattice() {
        let (len, l) = (4, 3);
        let lat = Lattice::new(len, l, vec![0.0; len * l], vec![0.0; (l + 1) * l]);
        assert!((lat.log_partition() - len as f64 * (l as f64).ln()).abs() < 1e-12);
        let m = lat.marginals();
        for t in 0..len {
            for y in 0..l {
                assert!((m.node(t, y) - 1.0 / l as f64).abs() < 1e-12);
            }
        }
        assert_eq!(lat.viterbi().0, vec![0; len]);
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let len = rng.random_range(1..=5);
            let l = rng.random_range(1..=4);
            let lat = random_lattice(&mut rng, len, l);
            let seqs = all_sequences(len, l);
            let scores: Vec<f64> = seqs.iter().map(|s| lat.score(s)).collect();
            let z = scores.iter().map(|s| s.exp()).sum::<f64>().ln();
            assert!((lat.log_partition() - z).abs() <= 1e-10 * z.abs().max(1.0));

            let m = lat.marginals();
            for t in 0..len {
                for y in 0..l {
                    let p: f64 = seqs
                        .iter()
                        .zip(&scores)
                        .filter(|(s, _)| s[t] == y)
                        .map(|(_, sc)| (sc - z).exp())
                        .sum();
                    assert!((m.node(t, y) - p).abs() < 1e-9);
                }
            }
            let best = seqs
                .iter()
                .zip(&scores)
                .fold(None::<(&Vec<usize>, f64)>, |acc, (s, &sc)| match acc {
                    Some((_, b)) if b >= sc => acc,
                    _ => Some((s, sc)),
                })
                .unwrap();
            let (path, score) = lat.viterbi();
            assert_eq!(&path, best.0);
            assert!((score - best.1).abs() < 1e-12);
        }
    }

    #[test]
    fn edge_marginals_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lat = random_lattice(&mut rng, 6, 4);
        let m = lat.marginals();
        for t in 1..6 {
            for y in 0..4 {
                let into: f64 = (0..4).map(|p| m.edge(t, p, y)).sum();
                assert!((into - m.node(t, y)).abs() < 1e-9);
            }
            for p in 0..4 {
                let out: f64 = (0..4).map(|y| m.edge(t, p, y)).sum();
                assert!((out - m.node(t - 1, p)).abs() < 1e-9);
            }
        }
        for t in 0..6 {
            let total: f64 = (0..4).map(|y| m.node(t, y)).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
