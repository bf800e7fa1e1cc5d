//! C4.5-style decision tree over mixed nominal/numeric attributes.
//!
//! Splits are chosen by gain ratio among candidates whose information gain
//! is at least the average gain. Nominal attributes branch on every observed
//! value; numeric ones split at the midpoint between consecutive distinct
//! values. After growing, subtrees are replaced by leaves wherever that does
//! not raise the pessimistic (upper confidence bound) error estimate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::IdentifyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttrKind {
    Nominal,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttrKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub attributes: Vec<Attribute>,
    pub classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Nominal(String),
    Numeric(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub values: Vec<Value>,
    pub class: usize,
}

/// How a nominal value never seen at a split is routed at decode time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownValuePolicy {
    /// Follow the branch that received the most training instances.
    #[default]
    MajorityChild,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub min_leaf: usize,
    /// Confidence level of the pessimistic error bound.
    pub confidence: f64,
    pub prune: bool,
    pub unknown: UnknownValuePolicy,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            min_leaf: 2,
            confidence: 0.25,
            prune: true,
            unknown: UnknownValuePolicy::MajorityChild,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<(), IdentifyError> {
        if self.min_leaf == 0 {
            return Err(IdentifyError::BadConfig("min_leaf must be ≥ 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 0.5) {
            return Err(IdentifyError::BadConfig(format!(
                "confidence must lie in (0, 0.5), got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        counts: Vec<usize>,
        class: usize,
    },
    Nominal {
        attribute: usize,
        counts: Vec<usize>,
        /// (value, child node) in sorted value order.
        branches: Vec<(String, usize)>,
        /// Branch used for unseen values.
        default_branch: usize,
    },
    Numeric {
        attribute: usize,
        counts: Vec<usize>,
        threshold: f64,
        /// Child for values ≤ threshold.
        le: usize,
        gt: usize,
    },
}

impl Node {
    pub fn counts(&self) -> &[usize] {
        match self {
            Node::Leaf { counts, .. } | Node::Nominal { counts, .. } | Node::Numeric { counts, .. } => {
                counts
            }
        }
    }

    fn children(&self) -> Vec<usize> {
        match self {
            Node::Leaf { .. } => vec![],
            Node::Nominal { branches, .. } => branches.iter().map(|b| b.1).collect(),
            Node::Numeric { le, gt, .. } => vec![*le, *gt],
        }
    }
}

/// A trained tree; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub schema: Schema,
    pub nodes: Vec<Node>,
}

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// (information gain, split information) of a partition, in bits.
fn gain_and_split_info(parent: &[usize], parts: &[Vec<usize>]) -> (f64, f64) {
    let n: usize = parent.iter().sum();
    let n = n as f64;
    let mut remainder = 0.0;
    let mut sizes = Vec::with_capacity(parts.len());
    for p in parts {
        let size: usize = p.iter().sum();
        remainder += size as f64 / n * entropy(p);
        sizes.push(size);
    }
    (entropy(parent) - remainder, entropy(&sizes))
}

fn class_counts(rows: &[&Instance], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for r in rows {
        counts[r.class] += 1;
    }
    counts
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

enum Partition {
    Nominal(BTreeMap<String, Vec<usize>>),
    Numeric { threshold: f64 },
}

struct Candidate {
    attribute: usize,
    gain: f64,
    ratio: f64,
    partition: Partition,
}

fn nominal_value(v: &Value) -> &str {
    match v {
        Value::Nominal(s) => s,
        Value::Numeric(_) => unreachable!("schema checked before induction"),
    }
}

fn numeric_value(v: &Value) -> f64 {
    match v {
        Value::Numeric(x) => *x,
        Value::Nominal(_) => unreachable!("schema checked before induction"),
    }
}

fn evaluate_attribute(
    rows: &[&Instance],
    attribute: usize,
    kind: AttrKind,
    n_classes: usize,
    min_leaf: usize,
) -> Option<Candidate> {
    let parent = class_counts(rows, n_classes);
    match kind {
        AttrKind::Nominal => {
            let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for (i, r) in rows.iter().enumerate() {
                groups
                    .entry(nominal_value(&r.values[attribute]).to_string())
                    .or_default()
                    .push(i);
            }
            let big_enough = groups.values().filter(|g| g.len() >= min_leaf).count();
            if groups.len() < 2 || big_enough < 2 {
                return None;
            }
            let parts: Vec<Vec<usize>> = groups
                .values()
                .map(|g| {
                    let members: Vec<&Instance> = g.iter().map(|&i| rows[i]).collect();
                    class_counts(&members, n_classes)
                })
                .collect();
            let (gain, split) = gain_and_split_info(&parent, &parts);
            Some(Candidate {
                attribute,
                gain,
                ratio: if split > 0.0 { gain / split } else { 0.0 },
                partition: Partition::Nominal(groups),
            })
        }
        AttrKind::Numeric => {
            let mut sorted: Vec<(f64, usize)> = rows
                .iter()
                .map(|r| (numeric_value(&r.values[attribute]), r.class))
                .collect();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let n = sorted.len();
            let mut left = vec![0usize; n_classes];
            let mut right = parent.clone();
            let mut best: Option<(f64, f64, f64)> = None; // (gain, split, threshold)
            for i in 0..n - 1 {
                left[sorted[i].1] += 1;
                right[sorted[i].1] -= 1;
                let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
                if lo == hi || i + 1 < min_leaf || n - i - 1 < min_leaf {
                    continue;
                }
                let (gain, split) = gain_and_split_info(&parent, &[left.clone(), right.clone()]);
                if best.is_none_or(|b| gain > b.0) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((gain, split, threshold));
                }
            }
            let (gain, split, threshold) = best?;
            Some(Candidate {
                attribute,
                gain,
                ratio: if split > 0.0 { gain / split } else { 0.0 },
                partition: Partition::Numeric { threshold },
            })
        }
    }
}

fn check_schema(schema: &Schema, values: &[Value]) -> Result<(), IdentifyError> {
    if values.len() != schema.attributes.len() {
        return Err(IdentifyError::SchemaMismatch(format!(
            "row has {} values, schema has {} attributes",
            values.len(),
            schema.attributes.len()
        )));
    }
    for (a, v) in schema.attributes.iter().zip(values) {
        let ok = matches!(
            (a.kind, v),
            (AttrKind::Nominal, Value::Nominal(_)) | (AttrKind::Numeric, Value::Numeric(_))
        );
        if !ok {
            return Err(IdentifyError::SchemaMismatch(format!(
                "attribute `{}` expects a {:?} value",
                a.name, a.kind
            )));
        }
        if let Value::Numeric(x) = v {
            if !x.is_finite() {
                return Err(IdentifyError::SchemaMismatch(format!(
                    "attribute `{}` has non-finite value",
                    a.name
                )));
            }
        }
    }
    Ok(())
}

/// Gain ratio of the best split on one attribute (no minimum branch size).
/// Numeric attributes use the threshold with the highest information gain.
pub fn gain_ratio(schema: &Schema, rows: &[Instance], attribute: usize) -> f64 {
    if rows.len() < 2 {
        return 0.0;
    }
    let refs: Vec<&Instance> = rows.iter().collect();
    let kind = schema.attributes[attribute].kind;
    evaluate_attribute(&refs, attribute, kind, schema.classes.len(), 1)
        .map_or(0.0, |c| c.ratio)
}

/// Extra errors C4.5 adds to `errors` observed among `n` instances: the
/// upper confidence limit of the binomial error rate, times `n`, minus the
/// observed errors.
pub fn added_errors(n: f64, errors: f64, confidence: f64) -> f64 {
    if errors < 1.0 {
        let base = n * (1.0 - confidence.powf(1.0 / n));
        if errors == 0.0 {
            return base;
        }
        return base + errors * (added_errors(n, 1.0, confidence) - base);
    }
    if errors + 0.5 >= n {
        return (n - errors).max(0.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - confidence);
    let f = (errors + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    r * n - errors
}

/// Pessimistic error estimate of a node treated as a leaf.
fn leaf_estimate(counts: &[usize], confidence: f64) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let errors = (n - counts[majority(counts)]) as f64;
    errors + added_errors(n as f64, errors, confidence)
}

struct Builder<'a> {
    schema: &'a Schema,
    cfg: &'a TreeConfig,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf(&mut self, counts: Vec<usize>) -> usize {
        let class = majority(&counts);
        self.nodes.push(Node::Leaf { counts, class });
        self.nodes.len() - 1
    }

    fn grow(&mut self, rows: &[&Instance]) -> usize {
        let n_classes = self.schema.classes.len();
        let counts = class_counts(rows, n_classes);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || rows.len() < 2 * self.cfg.min_leaf {
            return self.leaf(counts);
        }
        let candidates: Vec<Candidate> = self
            .schema
            .attributes
            .iter()
            .enumerate()
            .filter_map(|(a, attr)| evaluate_attribute(rows, a, attr.kind, n_classes, self.cfg.min_leaf))
            .filter(|c| c.gain > 1e-12)
            .collect();
        if candidates.is_empty() {
            return self.leaf(counts);
        }
        let average = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
        let mut best: Option<Candidate> = None;
        for c in candidates {
            if c.gain + 1e-12 < average {
                continue;
            }
            if best.as_ref().is_none_or(|b| c.ratio > b.ratio) {
                best = Some(c);
            }
        }
        let best = best.expect("the highest-gain candidate is never below average");

        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            counts: vec![],
            class: 0,
        });
        let node = match best.partition {
            Partition::Nominal(groups) => {
                let mut branches = Vec::with_capacity(groups.len());
                let mut default_branch = 0;
                let mut largest = 0;
                for (i, (value, members)) in groups.into_iter().enumerate() {
                    if members.len() > largest {
                        largest = members.len();
                        default_branch = i;
                    }
                    let subset: Vec<&Instance> = members.iter().map(|&m| rows[m]).collect();
                    branches.push((value, self.grow(&subset)));
                }
                Node::Nominal {
                    attribute: best.attribute,
                    counts,
                    branches,
                    default_branch,
                }
            }
            Partition::Numeric { threshold } => {
                let (le, gt): (Vec<&Instance>, Vec<&Instance>) = rows
                    .iter()
                    .partition(|r| numeric_value(&r.values[best.attribute]) <= threshold);
                let le = self.grow(&le);
                let gt = self.grow(&gt);
                Node::Numeric {
                    attribute: best.attribute,
                    counts,
                    threshold,
                    le,
                    gt,
                }
            }
        };
        self.nodes[id] = node;
        id
    }

    /// Returns the pessimistic error estimate of the (possibly pruned) subtree.
    fn prune(&mut self, id: usize) -> f64 {
        let children = self.nodes[id].children();
        let counts = self.nodes[id].counts().to_vec();
        let as_leaf = leaf_estimate(&counts, self.cfg.confidence);
        if children.is_empty() {
            return as_leaf;
        }
        let subtree: f64 = children.into_iter().map(|c| self.prune(c)).sum();
        if as_leaf <= subtree {
            let class = majority(&counts);
            self.nodes[id] = Node::Leaf { counts, class };
            as_leaf
        } else {
            subtree
        }
    }
}

impl DecisionTree {
    pub fn train(schema: &Schema, rows: &[Instance], cfg: &TreeConfig) -> Result<Self, IdentifyError> {
        cfg.validate()?;
        if rows.is_empty() {
            return Err(IdentifyError::EmptyTrainingSet);
        }
        if schema.classes.is_empty() {
            return Err(IdentifyError::SchemaMismatch("schema has no classes".into()));
        }
        for r in rows {
            check_schema(schema, &r.values)?;
            if r.class >= schema.classes.len() {
                return Err(IdentifyError::SchemaMismatch(format!("class index {} out of range", r.class)));
            }
        }
        let refs: Vec<&Instance> = rows.iter().collect();
        let mut builder = Builder {
            schema,
            cfg,
            nodes: Vec::new(),
        };
        builder.grow(&refs);
        if cfg.prune {
            builder.prune(0);
        }
        let mut tree = DecisionTree {
            schema: schema.clone(),
            nodes: builder.nodes,
        };
        tree.compact();
        Ok(tree)
    }

    /// Drops nodes orphaned by pruning and renumbers in depth-first order.
    fn compact(&mut self) {
        fn visit(old: &[Node], id: usize, out: &mut Vec<Node>) -> usize {
            let new_id = out.len();
            out.push(old[id].clone());
            let node = match &old[id] {
                Node::Leaf { .. } => return new_id,
                Node::Nominal {
                    attribute,
                    counts,
                    branches,
                    default_branch,
                } => Node::Nominal {
                    attribute: *attribute,
                    counts: counts.clone(),
                    branches: branches
                        .iter()
                        .map(|(v, c)| (v.clone(), visit(old, *c, out)))
                        .collect(),
                    default_branch: *default_branch,
                },
                Node::Numeric {
                    attribute,
                    counts,
                    threshold,
                    le,
                    gt,
                } => Node::Numeric {
                    attribute: *attribute,
                    counts: counts.clone(),
                    threshold: *threshold,
                    le: visit(old, *le, out),
                    gt: visit(old, *gt, out),
                },
            };
            out[new_id] = node;
            new_id
        }
        let mut out = Vec::with_capacity(self.nodes.len());
        visit(&self.nodes, 0, &mut out);
        self.nodes = out;
    }

    fn leaf_for(&self, values: &[Value]) -> Result<&Node, IdentifyError> {
        check_schema(&self.schema, values)?;
        let mut id = 0;
        loop {
            let node = self.nodes.get(id).ok_or_else(|| IdentifyError::Corrupt(format!("missing node {id}")))?;
            id = match node {
                Node::Leaf { .. } => return Ok(node),
                Node::Nominal {
                    attribute,
                    branches,
                    default_branch,
                    ..
                } => {
                    let v = nominal_value(&values[*attribute]);
                    branches
                        .iter()
                        .find(|(b, _)| b == v)
                        .or_else(|| branches.get(*default_branch))
                        .map(|(_, c)| *c)
                        .ok_or_else(|| IdentifyError::Corrupt("nominal node without branches".into()))?
                }
                Node::Numeric {
                    attribute,
                    threshold,
                    le,
                    gt,
                    ..
                } => {
                    if numeric_value(&values[*attribute]) <= *threshold {
                        *le
                    } else {
                        *gt
                    }
                }
            };
        }
    }

    /// Predicted class index.
    pub fn classify(&self, values: &[Value]) -> Result<usize, IdentifyError> {
        match self.leaf_for(values)? {
            Node::Leaf { class, .. } => Ok(*class),
            _ => unreachable!("leaf_for returns leaves"),
        }
    }

    pub fn depth(&self) -> usize {
        fn depth(nodes: &[Node], id: usize) -> usize {
            nodes[id]
                .children()
                .into_iter()
                .map(|c| 1 + depth(nodes, c))
                .max()
                .unwrap_or(0)
        }
        depth(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Sum of the leaves' pessimistic error estimates.
    pub fn pessimistic_error(&self, confidence: f64) -> f64 {
        fn walk(nodes: &[Node], id: usize, cf: f64) -> f64 {
            let children = nodes[id].children();
            if children.is_empty() {
                return leaf_estimate(nodes[id].counts(), cf);
            }
            children.into_iter().map(|c| walk(nodes, c, cf)).sum()
        }
        walk(&self.nodes, 0, confidence)
    }

    /// Checks structural consistency after deserialization.
    pub(crate) fn validate(&self) -> Result<(), IdentifyError> {
        let n_classes = self.schema.classes.len();
        if self.nodes.is_empty() {
            return Err(IdentifyError::Corrupt("tree has no nodes".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.counts().len() != n_classes {
                return Err(IdentifyError::Corrupt(format!("node {i} has wrong class count")));
            }
            let bad_child = node.children().into_iter().any(|c| c <= i || c >= self.nodes.len());
            let bad = match node {
                Node::Leaf { class, .. } => *class >= n_classes,
                Node::Nominal {
                    attribute,
                    branches,
                    default_branch,
                    ..
                } => {
                    self.schema.attributes.get(*attribute).map(|a| a.kind) != Some(AttrKind::Nominal)
                        || *default_branch >= branches.len()
                }
                Node::Numeric { attribute, .. } => {
                    self.schema.attributes.get(*attribute).map(|a| a.kind) != Some(AttrKind::Numeric)
                }
            };
            if bad || bad_child {
                return Err(IdentifyError::Corrupt(format!("node {i} is inconsistent")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(kinds: &[AttrKind], classes: &[&str]) -> Schema {
        Schema {
            attributes: kinds
                .iter()
                .enumerate()
                .map(|(i, &kind)| Attribute {
                    name: format!("a{i}"),
                    kind,
                })
                .collect(),
            classes: classes.iter().map(|c| c.to_string()).collect(),
        }
    }

    fn nom(v: &str) -> Value {
        Value::Nominal(v.into())
    }

    fn row(values: Vec<Value>, class: usize) -> Instance {
        Instance { values, class }
    }

    #[test]
    fn perfect_balanced_predictor() {
        let s = schema(&[AttrKind::Nominal], &["A", "B"]);
        let rows = vec![
            row(vec![nom("x")], 0),
            row(vec![nom("x")], 0),
            row(vec![nom("y")], 1),
            row(vec![nom("y")], 1),
        ];
        assert!((gain_ratio(&s, &rows, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_attribute_has_zero_ratio() {
        let s = schema(&[AttrKind::Nominal, AttrKind::Numeric], &["A", "B"]);
        let rows = vec![
            row(vec![nom("x"), Value::Numeric(1.0)], 0),
            row(vec![nom("x"), Value::Numeric(1.0)], 1),
            row(vec![nom("x"), Value::Numeric(1.0)], 1),
        ];
        assert_eq!(gain_ratio(&s, &rows, 0), 0.0);
        assert_eq!(gain_ratio(&s, &rows, 1), 0.0);
    }

    #[test]
    fn added_errors_edge_cases() {
        // e = 0: N·(1 − CF^(1/N))
        assert!((added_errors(1.0, 0.0, 0.25) - 0.75).abs() < 1e-12);
        assert!((added_errors(4.0, 0.0, 0.25) - 4.0 * (1.0 - 0.25f64.powf(0.25))).abs() < 1e-12);
        // e + 0.5 ≥ N
        assert_eq!(added_errors(2.0, 2.0, 0.25), 0.0);
    }

    #[test]
    fn numeric_midpoint_threshold() {
        let s = schema(&[AttrKind::Numeric], &["A", "B"]);
        let rows = vec![
            row(vec![Value::Numeric(1.0)], 0),
            row(vec![Value::Numeric(2.0)], 0),
            row(vec![Value::Numeric(4.0)], 1),
            row(vec![Value::Numeric(6.0)], 1),
        ];
        let tree = DecisionTree::train(&s, &rows, &TreeConfig::default()).unwrap();
        match &tree.nodes[0] {
            Node::Numeric { threshold, .. } => assert_eq!(*threshold, 3.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_value_takes_largest_branch() {
        let s = schema(&[AttrKind::Nominal], &["A", "B"]);
        let mut rows = vec![row(vec![nom("x")], 0); 3];
        rows.extend(vec![row(vec![nom("y")], 1); 5]);
        let cfg = TreeConfig {
            prune: false,
            ..TreeConfig::default()
        };
        let tree = DecisionTree::train(&s, &rows, &cfg).unwrap();
        assert_eq!(tree.classify(&[nom("x")]).unwrap(), 0);
        assert_eq!(tree.classify(&[nom("never-seen")]).unwrap(), 1);
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let s = schema(&[AttrKind::Nominal], &["A", "B"]);
        let rows = vec![row(vec![nom("x")], 0), row(vec![nom("y")], 1)];
        let tree = DecisionTree::train(&s, &rows, &TreeConfig::default()).unwrap();
        assert!(matches!(
            tree.classify(&[Value::Numeric(1.0)]),
            Err(IdentifyError::SchemaMismatch(_))
        ));
        assert!(matches!(tree.classify(&[]), Err(IdentifyError::SchemaMismatch(_))));
    }

    #[test]
    fn three_one_split_ratio() {
        // classes (A,A,B | B): gain = 1 − ¾·H(⅔,⅓), split info = H(¾,¼).
        let s = schema(&[AttrKind::Nominal], &["A", "B"]);
        let rows = vec![
            row(vec![nom("p")], 0),
            row(vec![nom("p")], 0),
            row(vec![nom("p")], 1),
            row(vec![nom("q")], 1),
        ];
        let gain = 1.0 - 0.75 * (-(2.0f64 / 3.0) * (2.0f64 / 3.0).log2() - (1.0f64 / 3.0) * (1.0f64 / 3.0).log2());
        let split = -0.75 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
        assert!((gain - 0.31127812445913283).abs() < 1e-12);
        assert!((split - 0.8112781244591328).abs() < 1e-12);
        assert!((gain_ratio(&s, &rows, 0) - gain / split).abs() < 1e-9);
        assert!((gain_ratio(&s, &rows, 0) - 0.3836885465963443).abs() < 1e-9);
    }

    /// Root splits on `a0`; the `a` side splits on `a1` into two pure
    /// A branches and a one-instance B branch.
    fn pruning_fixture() -> (Schema, Vec<Instance>) {
        let s = schema(&[AttrKind::Nominal, AttrKind::Nominal], &["A", "B"]);
        let mut rows = Vec::new();
        rows.extend(vec![row(vec![nom("a"), nom("x1")], 0); 10]);
        rows.extend(vec![row(vec![nom("a"), nom("x2")], 0); 9]);
        rows.push(row(vec![nom("a"), nom("x3")], 1));
        rows.extend(vec![row(vec![nom("b"), nom("x1")], 1); 10]);
        rows.extend(vec![row(vec![nom("b"), nom("x2")], 1); 10]);
        (s, rows)
    }

    #[test]
    fn one_instance_branch_is_pruned() {
        let (s, rows) = pruning_fixture();
        let unpruned = DecisionTree::train(&s, &rows, &TreeConfig { prune: false, ..TreeConfig::default() }).unwrap();
        assert_eq!(unpruned.depth(), 2);
        assert!(rows.iter().all(|r| unpruned.classify(&r.values).unwrap() == r.class));

        // Leaf estimate for 20 instances with 1 error vs the three-leaf subtree.
        let leaf = 1.0 + added_errors(20.0, 1.0, 0.25);
        let subtree = [10.0, 9.0, 1.0].iter().map(|&n| added_errors(n, 0.0, 0.25)).sum::<f64>();
        assert!((leaf - 2.4970850788397816).abs() < 1e-9);
        assert!((subtree - 3.3292985213611037).abs() < 1e-9);

        let pruned = DecisionTree::train(&s, &rows, &TreeConfig::default()).unwrap();
        assert_eq!(pruned.depth(), 1);
        assert_eq!(pruned.n_leaves(), 2);
        assert_eq!(pruned.classify(&[nom("a"), nom("x3")]).unwrap(), 0);
        assert!(pruned.pessimistic_error(0.25) <= unpruned.pessimistic_error(0.25));
    }

    #[test]
    fn identical_attributes_give_majority_leaf() {
        let s = schema(&[AttrKind::Nominal, AttrKind::Numeric], &["A", "B"]);
        let mut rows = vec![row(vec![nom("x"), Value::Numeric(2.0)], 1); 3];
        rows.push(row(vec![nom("x"), Value::Numeric(2.0)], 0));
        let tree = DecisionTree::train(&s, &rows, &TreeConfig::default()).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.classify(&[nom("x"), Value::Numeric(9.0)]).unwrap(), 1);
    }

    #[test]
    fn json_round_trip_keeps_thresholds() {
        let s = schema(&[AttrKind::Numeric], &["A", "B"]);
        let rows: Vec<Instance> = (0..10)
            .map(|i| row(vec![Value::Numeric(0.1 * i as f64)], usize::from(i >= 5)))
            .collect();
        let tree = DecisionTree::train(&s, &rows, &TreeConfig::default()).unwrap();
        let back: DecisionTree = serde_json::from_str(&serde_json::to_string(&tree).unwrap()).unwrap();
        assert_eq!(back, tree);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dataset() -> impl Strategy<Value = Vec<(u8, u8, i8, usize)>> {
            prop::collection::vec((0u8..3, 0u8..4, -3i8..4, 0usize..3), 1..60)
        }

        fn build(data: &[(u8, u8, i8, usize)]) -> (Schema, Vec<Instance>) {
            let s = schema(&[AttrKind::Nominal, AttrKind::Nominal, AttrKind::Numeric], &["A", "B", "C"]);
            let rows = data
                .iter()
                .map(|&(a, b, x, c)| {
                    row(vec![nom(&format!("a{a}")), nom(&format!("b{b}")), Value::Numeric(x as f64)], c)
                })
                .collect();
            (s, rows)
        }

        proptest! {
            #[test]
            fn pruning_never_raises_estimate(data in dataset()) {
                let (s, rows) = build(&data);
                let unpruned = DecisionTree::train(&s, &rows, &TreeConfig { prune: false, ..TreeConfig::default() }).unwrap();
                let pruned = DecisionTree::train(&s, &rows, &TreeConfig::default()).unwrap();
                prop_assert!(pruned.pessimistic_error(0.25) <= unpruned.pessimistic_error(0.25) + 1e-9);
                prop_assert!(pruned.nodes.len() <= unpruned.nodes.len());
            }

            #[test]
            fn separable_data_is_fit_exactly(data in dataset()) {
                // Class is a function of one attribute.
                let labelled: Vec<_> = data.iter().map(|&(a, b, x, _)| (a, b, x, usize::from(b) % 3)).collect();
                let (s, rows) = build(&labelled);
                let cfg = TreeConfig { prune: false, min_leaf: 1, ..TreeConfig::default() };
                let tree = DecisionTree::train(&s, &rows, &cfg).unwrap();
                for r in &rows {
                    prop_assert_eq!(tree.classify(&r.values).unwrap(), r.class);
                }
            }

            #[test]
            fn induction_is_deterministic(data in dataset()) {
                let (s, rows) = build(&data);
                let a = DecisionTree::train(&s, &rows, &TreeConfig::default()).unwrap();
                let b = DecisionTree::train(&s, &rows, &TreeConfig::default()).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn config_bounds() {
        let bad = TreeConfig {
            confidence: 0.5,
            ..TreeConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TreeConfig {
            min_leaf: 0,
            ..TreeConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
