//! CSV ingestion and the tabular outputs.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! matrix written by [`write_matrix_csv`] reads back bit-exactly.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use super::intervals::IntervalReport;
use super::select::{RankedSnp, Selection};
use crate::error::{Error, Result};
use crate::model::{ChainOutput, Dataset, GroupStructure};
use crate::wang::BootstrapResult;

/// Header and numeric body of a CSV file with one header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub values: Array2<f64>,
}

pub fn read_table<R: Read>(input: R, what: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() {
        return Err(Error::Invalid(format!("{what}: empty header")));
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Invalid(format!(
                "{what}: row {} has {} fields, header has {}",
                r + 1,
                rec.len(),
                header.len()
            )));
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Invalid(format!("{what}: row {}, column '{}': cannot parse {field:?}", r + 1, header[j]))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let values = Array2::from_shape_vec((rows, header.len()), values).expect("row lengths checked");
    Ok(Table { header, values })
}

pub fn read_table_file(path: &Path, what: &str) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::Invalid(format!("{what} {}: {e}", path.display())))?;
    read_table(file, what)
}

pub fn write_matrix_csv<W: Write>(out: W, header: &[String], values: &Array2<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in values.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// `(snp_id, gene_id)` pairs from a two-column CSV with a header row.
pub fn read_group_map<R: Read>(input: R) -> Result<Vec<(String, String)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut pairs = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Invalid(format!("group map row {} needs snp_id and gene_id", r + 1)));
        }
        pairs.push((rec[0].to_owned(), rec[1].to_owned()));
    }
    Ok(pairs)
}

/// Groups the genotype columns by the gene assigned in `map`. Genes are
/// numbered in order of first appearance along the genotype columns.
pub fn groups_from_map(snp_names: &[String], map: &[(String, String)]) -> Result<GroupStructure> {
    let mut gene_of: HashMap<&str, &str> = HashMap::new();
    for (snp, gene) in map {
        if gene_of.insert(snp, gene).is_some() {
            return Err(Error::Invalid(format!("SNP '{snp}' appears twice in the group map")));
        }
    }
    let labels: Vec<&str> = snp_names
        .iter()
        .map(|s| {
            gene_of
                .get(s.as_str())
                .copied()
                .ok_or_else(|| Error::Invalid(format!("SNP '{s}' has no gene in the group map")))
        })
        .collect::<Result<_>>()?;
    if gene_of.len() != snp_names.len() {
        let extra = map.iter().find(|(s, _)| !snp_names.contains(s)).map(|(s, _)| s.as_str()).unwrap_or("");
        return Err(Error::Invalid(format!("group map lists SNP '{extra}' absent from the genotypes")));
    }
    GroupStructure::from_labels(&labels)
}

/// Reads genotypes, phenotypes and the group map into a dataset.
pub fn load_dataset(genotypes: &Path, phenotypes: &Path, groups: &Path) -> Result<Dataset<f64>> {
    let g = read_table_file(genotypes, "genotypes")?;
    let p = read_table_file(phenotypes, "phenotypes")?;
    let file = File::open(groups).map_err(|e| Error::Invalid(format!("group map {}: {e}", groups.display())))?;
    let map = read_group_map(file)?;
    let structure = groups_from_map(&g.header, &map)?;
    Dataset::with_names(g.values, p.values, structure, g.header, p.header)
}

fn csv_file(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_writer(File::create(path)?))
}

pub fn write_posterior_summary<W: Write>(out: W, report: &IntervalReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["snp", "phenotype", "mean", "lower", "upper", "selected"])?;
    for i in 0..report.d() {
        for j in 0..report.c() {
            w.write_record([
                report.snp_names[i].clone(),
                report.phenotype_names[j].clone(),
                report.mean[[i, j]].to_string(),
                report.lower[[i, j]].to_string(),
                report.upper[[i, j]].to_string(),
                report.excludes_zero(i, j).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_selection<W: Write>(out: W, report: &IntervalReport, selection: &Selection) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["snp", "phenotype", "mean", "lower", "upper"])?;
    for &(i, j) in &selection.pairs {
        w.write_record([
            report.snp_names[i].clone(),
            report.phenotype_names[j].clone(),
            report.mean[[i, j]].to_string(),
            report.lower[[i, j]].to_string(),
            report.upper[[i, j]].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ranking<W: Write>(out: W, report: &IntervalReport, ranking: &[RankedSnp]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "snp", "score", "selected"])?;
    for (r, item) in ranking.iter().enumerate() {
        w.write_record([
            (r + 1).to_string(),
            report.snp_names[item.snp].clone(),
            item.score.to_string(),
            report.snp_selected(item.snp).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bootstrap<W: Write>(
    out: W,
    snp_names: &[String],
    phenotype_names: &[String],
    result: &BootstrapResult<f64>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["snp", "phenotype", "estimate", "lower", "upper", "converged_fraction"])?;
    let frac = result.converged_fraction().to_string();
    for (i, snp) in snp_names.iter().enumerate() {
        for (j, pheno) in phenotype_names.iter().enumerate() {
            w.write_record([
                snp.clone(),
                pheno.clone(),
                result.estimate[[i, j]].to_string(),
                result.lower[[i, j]].to_string(),
                result.upper[[i, j]].to_string(),
                frac.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Dense index and label of each SNP's gene.
pub fn write_group_map(path: &Path, snp_names: &[String], groups: &GroupStructure) -> Result<()> {
    let mut w = csv_file(path)?;
    w.write_record(["snp", "snp_index", "gene", "gene_index"])?;
    for (i, snp) in snp_names.iter().enumerate() {
        let k = groups.group_of(i);
        w.write_record([snp.clone(), i.to_string(), groups.label(k).to_owned(), k.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Stored draws of a chain, with labels, as written by `fit` and read by `report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedChain {
    pub snp_names: Vec<String>,
    pub phenotype_names: Vec<String>,
    pub lambda1_sq: f64,
    pub lambda2_sq: f64,
    pub seed: u64,
    pub sigma2: Vec<f64>,
    /// One row-major `d × c` matrix per draw.
    pub w: Vec<Vec<f64>>,
}

impl SavedChain {
    pub fn from_chain(chain: &ChainOutput<f64>, snp_names: &[String], phenotype_names: &[String]) -> Self {
        Self {
            snp_names: snp_names.to_vec(),
            phenotype_names: phenotype_names.to_vec(),
            lambda1_sq: chain.lambda1_sq,
            lambda2_sq: chain.lambda2_sq,
            seed: chain.seed,
            sigma2: chain.sigma2_draws.to_vec(),
            w: chain.w_draws.axis_iter(Axis(0)).map(|d| d.iter().copied().collect()).collect(),
        }
    }

    pub fn draws(&self) -> Result<Array3<f64>> {
        let (d, c) = (self.snp_names.len(), self.phenotype_names.len());
        let flat: Vec<f64> = self.w.iter().flatten().copied().collect();
        Array3::from_shape_vec((self.w.len(), d, c), flat)
            .map_err(|_| Error::Invalid(format!("saved draws do not form {d} × {c} matrices")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Invalid(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }
}
