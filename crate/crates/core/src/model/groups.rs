use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partition of the SNP indices `0..d` into `K` nonempty groups (genes).
///
/// Group members are kept sorted ascending. Each group carries a string
/// label; when none is supplied the label is the group index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupStructure {
    groups: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    labels: Vec<String>,
}

impl GroupStructure {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        let labels = (0..groups.len()).map(|k| k.to_string()).collect();
        Self::with_labels(groups, labels)
    }

    pub fn with_labels(mut groups: Vec<Vec<usize>>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != groups.len() {
            return Err(Error::dims(
                "group labels",
                groups.len().to_string(),
                labels.len().to_string(),
            ));
        }
        if groups.is_empty() {
            return Err(Error::Invalid("group structure has no groups".into()));
        }
        let d: usize = groups.iter().map(Vec::len).sum();
        let mut group_of = vec![usize::MAX; d];
        for (k, members) in groups.iter_mut().enumerate() {
            if members.is_empty() {
                return Err(Error::Invalid(format!("group '{}' is empty", labels[k])));
            }
            members.sort_unstable();
            for &i in members.iter() {
                if i >= d {
                    return Err(Error::Invalid(format!(
                        "SNP index {i} out of range for {d} SNPs"
                    )));
                }
                if group_of[i] != usize::MAX {
                    return Err(Error::Invalid(format!("SNP index {i} appears in two groups")));
                }
                group_of[i] = k;
            }
        }
        Ok(Self {
            groups,
            group_of,
            labels,
        })
    }

    /// Groups of consecutive SNPs with the given sizes.
    pub fn contiguous(sizes: &[usize]) -> Result<Self> {
        let mut start = 0;
        let groups = sizes
            .iter()
            .map(|&m| {
                let g: Vec<usize> = (start..start + m).collect();
                start += m;
                g
            })
            .collect();
        Self::new(groups)
    }

    /// Builds the partition from one group label per SNP; groups are numbered
    /// in order of first appearance.
    pub fn from_labels<S: AsRef<str>>(snp_labels: &[S]) -> Result<Self> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut labels = Vec::new();
        for (i, lab) in snp_labels.iter().enumerate() {
            let lab = lab.as_ref();
            let k = *index.entry(lab).or_insert_with(|| {
                groups.push(Vec::new());
                labels.push(lab.to_string());
                groups.len() - 1
            });
            groups[k].push(i);
        }
        Self::with_labels(groups, labels)
    }

    pub fn singletons(d: usize) -> Result<Self> {
        Self::new((0..d).map(|i| vec![i]).collect())
    }

    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![(0..d).collect()])
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn n_snps(&self) -> usize {
        self.group_of.len()
    }

    pub fn members(&self, k: usize) -> &[usize] {
        &self.groups[k]
    }

    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    pub fn size(&self, k: usize) -> usize {
        self.groups[k].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.groups.iter().map(Vec::as_slice)
    }
}
