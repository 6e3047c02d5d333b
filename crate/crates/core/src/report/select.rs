use ndarray::ArrayView2;

use super::intervals::IntervalReport;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    /// `(snp, phenotype)` pairs whose interval excludes zero, in row-major order.
    pub pairs: Vec<(usize, usize)>,
    /// SNPs with at least one selected pair, ascending.
    pub snps: Vec<usize>,
}

pub fn select_snps(report: &IntervalReport) -> Selection {
    let mut pairs = Vec::new();
    for i in 0..report.d() {
        for j in 0..report.c() {
            if report.excludes_zero(i, j) {
                pairs.push((i, j));
            }
        }
    }
    let mut snps: Vec<usize> = pairs.iter().map(|&(i, _)| i).collect();
    snps.dedup();
    Selection { pairs, snps }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedSnp {
    pub snp: usize,
    pub score: f64,
}

/// Orders SNPs by `Σ_j |ŵ_ij|`, largest first, ties by index.
pub fn rank_snps<T: Scalar>(w_hat: ArrayView2<'_, T>) -> Vec<RankedSnp> {
    let mut ranked: Vec<RankedSnp> = w_hat
        .rows()
        .into_iter()
        .enumerate()
        .map(|(snp, row)| {
            // summing in sorted order keeps the score independent of column order
            let mut abs: Vec<f64> = row.iter().map(|v| v.as_f64().abs()).collect();
            abs.sort_by(f64::total_cmp);
            RankedSnp {
                snp,
                score: abs.iter().sum(),
            }
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.snp.cmp(&b.snp)));
    ranked
}
