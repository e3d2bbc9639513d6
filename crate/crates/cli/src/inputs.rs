use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use polyseq::nets::{ModelConfig, ReferenceModel, SpatialDescriptors};
use serde::Deserialize;

use crate::args::Common;

/// Non-blank, non-comment lines with their 1-based line numbers.
pub fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.to_string()))
        .collect())
}

pub fn open_output(common: &Common) -> Result<Box<dyn Write>> {
    Ok(match &common.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Spatial descriptors keyed by the P-SMILES column.
pub struct Descriptors {
    pub groups: Vec<(String, usize)>,
    rows: HashMap<String, SpatialDescriptors>,
}

impl Descriptors {
    pub fn get(&self, psmiles: &str) -> Result<&SpatialDescriptors> {
        self.rows
            .get(psmiles)
            .ok_or_else(|| anyhow!("no descriptors for {psmiles}"))
    }
}

pub fn load_descriptors(csv_path: &Path, groups_path: &Path) -> Result<Descriptors> {
    let groups: BTreeMap<String, Vec<String>> = serde_json::from_str(
        &std::fs::read_to_string(groups_path).with_context(|| format!("reading {}", groups_path.display()))?,
    )
    .with_context(|| format!("parsing {}", groups_path.display()))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(csv_path)
        .with_context(|| format!("reading {}", csv_path.display()))?;
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("psmiles") {
        bail!("{}: first column must be `psmiles`", csv_path.display());
    }
    let mut index = Vec::new();
    for (g, cols) in &groups {
        if cols.is_empty() {
            bail!("group {g} has no columns");
        }
        let idx = cols
            .iter()
            .map(|c| {
                header
                    .iter()
                    .position(|h| h == c)
                    .ok_or_else(|| anyhow!("group {g}: no column {c} in {}", csv_path.display()))
            })
            .collect::<Result<Vec<_>>>()?;
        index.push((g.clone(), idx));
    }
    let mut rows = HashMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let psmiles = rec[0].to_string();
        let mut sd = SpatialDescriptors {
            source: psmiles.clone(),
            groups: Vec::with_capacity(index.len()),
        };
        for (g, idx) in &index {
            let v = idx
                .iter()
                .map(|&i| {
                    rec[i]
                        .parse::<f64>()
                        .with_context(|| format!("{} row {}: bad number {:?}", csv_path.display(), line + 2, &rec[i]))
                })
                .collect::<Result<Vec<_>>>()?;
            sd.groups.push((g.clone(), v));
        }
        rows.insert(psmiles, sd);
    }
    Ok(Descriptors {
        groups: index.iter().map(|(g, idx)| (g.clone(), idx.len())).collect(),
        rows,
    })
}

pub fn model_config(c: &Common, groups: Vec<(String, usize)>) -> ModelConfig {
    ModelConfig {
        dim: c.dim as usize,
        layers: c.layers,
        d_thres: c.d_thres as usize,
        layer_kind: c.layer_kind,
        mask_mode: c.mask_mode,
        strategy: c.strategy,
        backbone_embedding: !c.no_backbone,
        spatial_groups: groups,
    }
}

/// The configured model and, when requested, its descriptors.
pub fn build_model(c: &Common) -> Result<(ReferenceModel, Option<Descriptors>)> {
    let desc = match (&c.descriptors, &c.groups) {
        (Some(d), Some(g)) => Some(load_descriptors(d, g)?),
        _ => None,
    };
    let cfg = model_config(c, desc.as_ref().map(|d| d.groups.clone()).unwrap_or_default());
    Ok((load_or_generate(c, cfg)?, desc))
}

/// Loads `--weights` when given, otherwise generates from `--seed`.
pub fn load_or_generate(c: &Common, cfg: ModelConfig) -> Result<ReferenceModel> {
    Ok(match &c.weights {
        Some(p) => ReferenceModel::load(cfg, p).with_context(|| format!("loading {}", p.display()))?,
        None => ReferenceModel::generate(cfg, c.seed),
    })
}

#[derive(Debug, Deserialize)]
pub struct FragmentEntry {
    pub psmiles: String,
    pub fragments: Vec<Fragment>,
}

#[derive(Debug, Deserialize)]
pub struct Fragment {
    /// Fragment class used for the dataset-level ranking.
    pub class: String,
    pub atoms: Vec<usize>,
}

pub fn load_fragments(path: &Path) -> Result<Vec<FragmentEntry>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
