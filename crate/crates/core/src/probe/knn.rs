//! Exhaustive cosine nearest neighbors.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5 }
    }
}

/// Training rows with cached norms. Rows with zero norm have similarity 0 to
/// every query.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnIndex {
    rows: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

impl KnnIndex {
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        let norms = rows.iter().map(|r| norm(r)).collect();
        KnnIndex { rows, norms }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The `k` most similar rows as `(index, cosine)`, most similar first.
    /// Equal similarities keep index order.
    pub fn neighbors(&self, query: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
        if k == 0 || k > self.rows.len() {
            return Err(Error::KTooLarge {
                k,
                n: self.rows.len(),
            });
        }
        let qn = norm(query);
        if qn == 0.0 {
            return Err(Error::ZeroVector);
        }
        let mut sims: Vec<(usize, f64)> = self
            .rows
            .iter()
            .zip(&self.norms)
            .enumerate()
            .map(|(i, (r, &n))| {
                let s = if n == 0.0 {
                    0.0
                } else {
                    r.iter().zip(query).map(|(a, b)| a * b).sum::<f64>() / (n * qn)
                };
                (i, s)
            })
            .collect();
        sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        sims.truncate(k);
        Ok(sims)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Majority label among `neighbors` (most similar first). Tied vote counts
/// go to the tied label whose best neighbor ranks highest.
pub fn majority<L: PartialEq + Clone>(labels: impl IntoIterator<Item = L>) -> Option<L> {
    let mut tally: Vec<(L, usize)> = Vec::new();
    for label in labels {
        match tally.iter_mut().find(|(l, _)| *l == label) {
            Some((_, c)) => *c += 1,
            None => tally.push((label, 1)),
        }
    }
    // `tally` is in order of first appearance, i.e. best rank first, and
    // `max_by_key` would return the last maximum, so scan manually.
    let mut best: Option<(L, usize)> = None;
    for (l, c) in tally {
        if best.as_ref().is_none_or(|(_, bc)| c > *bc) {
            best = Some((l, c));
        }
    }
    best.map(|(l, _)| l)
}

/// Label of `query` by majority vote among its `k` cosine nearest neighbors.
pub fn knn_classify<L: PartialEq + Clone>(
    train: &[Vec<f64>],
    labels: &[L],
    query: &[f64],
    k: usize,
) -> Result<L> {
    if train.len() != labels.len() {
        return Err(Error::ExampleMismatch(format!(
            "{} training rows but {} labels",
            train.len(),
            labels.len()
        )));
    }
    let index = KnnIndex::new(train.to_vec());
    let nn = index.neighbors(query, k)?;
    Ok(majority(nn.iter().map(|&(i, _)| labels[i].clone())).expect("k >= 1"))
}

/// Binary KNN model; the likelihood is the positive share of the `k` votes.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnModel {
    index: KnnIndex,
    labels: Vec<bool>,
    k: usize,
}

impl KnnModel {
    pub fn fit(x: &[Vec<f64>], y: &[bool], k: usize) -> Result<Self> {
        if k == 0 || k > x.len() {
            return Err(Error::KTooLarge { k, n: x.len() });
        }
        Ok(KnnModel {
            index: KnnIndex::new(x.to_vec()),
            labels: y.to_vec(),
            k,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<(bool, f64)> {
        let nn = self.index.neighbors(x, self.k)?;
        Ok(vote(&nn, &self.labels))
    }
}

pub(crate) fn vote(nn: &[(usize, f64)], labels: &[bool]) -> (bool, f64) {
    let positive = nn.iter().filter(|&&(i, _)| labels[i]).count();
    let label = majority(nn.iter().map(|&(i, _)| labels[i])).expect("non-empty neighbors");
    (label, positive as f64 / nn.len() as f64)
}
