use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context};
use polyseq::context::build_context;
use polyseq::nets::verify::{lemma1, theorem1, theorem2, theorem3, twin_pairs, OracleConfig, SuiteReport};
use polyseq::nets::{forward_polymer, fragcam, prepare, resolve_overlaps, ReferenceModel};
use polyseq::polymer::{backbone_mask, ring_stats, star_link, GraphDump, RingStats, Strategy};
use polyseq::psmiles::{canonical_form, parse, polymer_key, random_augment};
use polyseq::rng::trial_seed;
use polyseq::rsit::{compare_strategies, read_dataset, rsit, ReferencePredictor, RsitConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{Cli, Command, GraphKind, KeyKind, Suite};
use crate::inputs::{build_model, load_fragments, load_or_generate, model_config, open_output, read_lines};
use crate::Failure;

type CmdResult = Result<(), Failure>;

pub fn run(cli: &Cli) -> CmdResult {
    let c = &cli.common;
    match &cli.command {
        Command::Parse { input } => per_line_json(cli, input, |s| {
            Ok(serde_json::to_value(GraphDump::from_monomer(&parse(s)?))?)
        }),
        Command::Link { input } => per_line_json(cli, input, |s| {
            Ok(serde_json::to_value(GraphDump::from_star_link(&star_link(&parse(s)?)))?)
        }),
        Command::Backbone { input } => per_line_json(cli, input, |s| {
            let mask = backbone_mask(&parse(s)?);
            let atoms: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
            Ok(json!({ "psmiles": s, "atoms": mask.len(), "backbone": atoms }))
        }),
        Command::Canon { input, key } => per_line_text(cli, input, |_, s| {
            let k = match key {
                KeyKind::Polymer => polymer_key(s)?,
                KeyKind::Star => canonical_form(s)?,
            };
            Ok(vec![hex::encode(k)])
        }),
        Command::Augment { input, variants } => per_line_text(cli, input, |i, s| {
            (0..*variants)
                .map(|v| {
                    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(c.seed, i as u64, v as u64));
                    Ok(random_augment(s, &mut rng)?)
                })
                .collect()
        }),
        Command::Forward { input, save_weights } => {
            let (model, desc) = build_model(c)?;
            if let Some(p) = save_weights {
                std::fs::write(p, model.to_json()).with_context(|| format!("writing {}", p.display()))?;
            }
            per_line_json(cli, input, |s| {
                let sd = desc.as_ref().map(|d| d.get(s)).transpose()?;
                let out = forward_polymer(&model, &parse(s)?, sd)?;
                Ok(json!({ "psmiles": s, "y_hat": out.y_hat, "copies": out.copies }))
            })
        }
        Command::Stats { inputs, json } => stats(cli, inputs, *json),
        Command::Distances { psmiles, graph } => {
            let m = parse(psmiles).map_err(|e| anyhow!("{psmiles}: {e}"))?;
            let g = match graph {
                GraphKind::Monomer => m.graph.clone(),
                GraphKind::Link => star_link(&m).graph,
                GraphKind::Model => prepare(&model_config(c, Vec::new()), &m).graph,
            };
            let ctx = build_context(&g, c.d_thres as usize).map_err(anyhow::Error::from)?;
            let mut out = open_output(c)?;
            serde_json::to_writer_pretty(&mut out, &ctx.dump()).map_err(anyhow::Error::from)?;
            writeln!(out)?;
            out.flush()?;
            Ok(())
        }
        Command::Verify {
            suite,
            monomers,
            pairs_per_seed,
            json,
        } => verify(cli, *suite, *monomers, *pairs_per_seed, *json),
        Command::Rsit { .. } => run_rsit(cli),
        Command::Fragcam {
            fragments,
            resolve_overlaps,
            top,
            json,
        } => run_fragcam(cli, fragments, *resolve_overlaps, *top, *json),
    }
}

/// Applies `f` to every corpus line in parallel, keeping input order.
fn map_lines<T: Send>(
    input: &Path,
    f: impl Fn(usize, &str) -> anyhow::Result<T> + Sync,
) -> Result<Vec<(usize, String, anyhow::Result<T>)>, Failure> {
    let lines = read_lines(input)?;
    Ok(lines
        .into_par_iter()
        .enumerate()
        .map(|(i, (n, s))| {
            let r = f(i, &s);
            (n, s, r)
        })
        .collect())
}

fn malformed(count: usize) -> CmdResult {
    if count == 0 {
        Ok(())
    } else {
        Err(Failure::Input(anyhow!("{count} malformed line(s)")))
    }
}

/// One JSON object per line; failures become `{"line", "error"}` records.
fn per_line_json(cli: &Cli, input: &Path, f: impl Fn(&str) -> anyhow::Result<serde_json::Value> + Sync) -> CmdResult {
    let results = map_lines(input, |_, s| f(s))?;
    let mut out = open_output(&cli.common)?;
    let mut errors = 0;
    for (n, _, r) in results {
        let v = match r {
            Ok(v) => v,
            Err(e) => {
                errors += 1;
                json!({ "line": n, "error": format!("{e:#}") })
            }
        };
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    malformed(errors)
}

/// Text lines per input line; failures go to stderr with line numbers.
fn per_line_text(cli: &Cli, input: &Path, f: impl Fn(usize, &str) -> anyhow::Result<Vec<String>> + Sync) -> CmdResult {
    let results = map_lines(input, f)?;
    let mut out = open_output(&cli.common)?;
    let mut errors = 0;
    for (n, s, r) in results {
        match r {
            Ok(lines) => {
                for l in lines {
                    writeln!(out, "{l}")?;
                }
            }
            Err(e) => {
                errors += 1;
                eprintln!("line {n}: {s}: {e:#}");
            }
        }
    }
    out.flush()?;
    malformed(errors)
}

#[derive(Serialize)]
struct FileStats<'a> {
    file: String,
    #[serde(flatten)]
    stats: &'a RingStats,
}

fn stats(cli: &Cli, inputs: &[std::path::PathBuf], as_json: bool) -> CmdResult {
    let all = inputs
        .par_iter()
        .map(|p| {
            std::fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))
                .map(|t| ring_stats(t.lines()))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut out = open_output(&cli.common)?;
    if as_json {
        let rows: Vec<FileStats> = inputs
            .iter()
            .zip(&all)
            .map(|(p, s)| FileStats {
                file: p.display().to_string(),
                stats: s,
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &rows).map_err(anyhow::Error::from)?;
        writeln!(out)?;
    } else {
        writeln!(
            out,
            "{:<32} {:>9} {:>10} {:>10}",
            "file", "polymers", "mean_rings", "frac_gt_2"
        )?;
        for (p, s) in inputs.iter().zip(&all) {
            writeln!(
                out,
                "{:<32} {:>9} {:>10.4} {:>10.4}",
                p.display(),
                s.polymers,
                s.mean_rings,
                s.frac_more_than_two
            )?;
        }
    }
    out.flush()?;
    let mut errors = 0;
    for (p, s) in inputs.iter().zip(&all) {
        for (n, e) in &s.skipped {
            errors += 1;
            eprintln!("{}: line {n}: {e}", p.display());
        }
    }
    malformed(errors)
}

fn verify(cli: &Cli, suite: Suite, monomers: usize, per_seed: usize, as_json: bool) -> CmdResult {
    let cfg = OracleConfig {
        seed: cli.common.seed,
        monomers,
        ..OracleConfig::default()
    };
    let mut reports: Vec<SuiteReport> = Vec::new();
    if matches!(suite, Suite::Theorem1 | Suite::All) {
        reports.push(theorem1(&cfg));
    }
    if matches!(suite, Suite::Theorem2 | Suite::All) {
        reports.push(theorem2(&cfg));
    }
    if matches!(suite, Suite::Lemma1 | Suite::Theorem3 | Suite::All) {
        let pairs = twin_pairs(per_seed);
        if matches!(suite, Suite::Lemma1 | Suite::All) {
            reports.push(lemma1(&pairs));
        }
        if matches!(suite, Suite::Theorem3 | Suite::All) {
            reports.push(theorem3(&pairs, cfg.seed, cfg.dim));
        }
    }
    let mut out = open_output(&cli.common)?;
    if as_json {
        serde_json::to_writer_pretty(&mut out, &reports).map_err(anyhow::Error::from)?;
        writeln!(out)?;
    } else {
        for r in &reports {
            write!(out, "{}", r.to_text())?;
        }
    }
    out.flush()?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.suite.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(failed.join(", ")))
    }
}

fn run_rsit(cli: &Cli) -> CmdResult {
    let Command::Rsit {
        dataset,
        trials,
        metric,
        loss,
        compare,
        require_invariant,
        report,
    } = &cli.command
    else {
        unreachable!()
    };
    let c = &cli.common;
    let file = std::fs::File::open(dataset).with_context(|| format!("reading {}", dataset.display()))?;
    let samples = read_dataset(file).with_context(|| format!("reading {}", dataset.display()))?;
    let cfg = RsitConfig {
        trials: *trials,
        seed: c.seed,
        loss: (*loss).into(),
        metric: *metric,
    };
    let tol = c.tolerance.unwrap_or(1e-6);
    let mut out = open_output(c)?;
    let (json, failures, violation) = if *compare {
        if c.weights.is_some() {
            return Err(Failure::Input(anyhow!(
                "--compare generates one model per strategy; drop --weights"
            )));
        }
        let table = compare_strategies(&samples, &cfg, &model_config(c, Vec::new()), c.seed);
        write!(out, "{}", table.to_text())?;
        let link = table
            .rows
            .iter()
            .find(|r| r.strategy == Strategy::Link.name())
            .expect("link row");
        let violation = (link.max_prediction_shift > tol || link.gap.abs() > tol)
            .then(|| format!("link strategy shifted predictions by {:.3e}", link.max_prediction_shift));
        let failures = table.rows.iter().map(|r| r.failures).max().unwrap_or(0);
        (serde_json::to_string_pretty(&table), failures, violation)
    } else {
        let model = load_or_generate(c, model_config(c, Vec::new()))?;
        let r = rsit(&ReferencePredictor { model }, &samples, &cfg);
        write!(out, "{}", r.to_text())?;
        let violation = (r.max_prediction_shift > tol || r.rsit_gap.abs() > tol)
            .then(|| format!("predictions shifted by up to {:.3e}", r.max_prediction_shift));
        for f in &r.failures {
            eprintln!("sample {}: {}: {}", f.index + 1, f.psmiles, f.error);
        }
        (serde_json::to_string_pretty(&r), r.failures.len(), violation)
    };
    out.flush()?;
    if let Some(p) = report {
        std::fs::write(p, json.map_err(anyhow::Error::from)?).with_context(|| format!("writing {}", p.display()))?;
    }
    if failures > 0 {
        eprintln!("{failures} sample(s) failed and were left out of the metrics");
    }
    match violation {
        Some(v) if *require_invariant => Err(Failure::Verify(v)),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct PolymerScores {
    psmiles: String,
    classes: Vec<String>,
    scores: Vec<f64>,
    y_hat: f64,
    forward_y_hat: f64,
}

#[derive(Serialize)]
struct ClassScore {
    class: String,
    mean: f64,
    count: usize,
}

fn fragcam_one(
    model: &ReferenceModel,
    desc: Option<&crate::inputs::Descriptors>,
    e: &crate::inputs::FragmentEntry,
    resolve: bool,
) -> anyhow::Result<PolymerScores> {
    let atoms: Vec<Vec<usize>> = e.fragments.iter().map(|f| f.atoms.clone()).collect();
    let (classes, atoms): (Vec<String>, Vec<Vec<usize>>) = if resolve {
        resolve_overlaps(&atoms)
            .into_iter()
            .map(|(i, a)| (e.fragments[i].class.clone(), a))
            .unzip()
    } else {
        (e.fragments.iter().map(|f| f.class.clone()).collect(), atoms)
    };
    let sd = desc.map(|d| d.get(&e.psmiles)).transpose()?;
    let r = fragcam(model, &parse(&e.psmiles)?, &atoms, sd)?;
    Ok(PolymerScores {
        psmiles: e.psmiles.clone(),
        classes,
        scores: r.scores,
        y_hat: r.y_hat,
        forward_y_hat: r.forward_y_hat,
    })
}

fn run_fragcam(cli: &Cli, path: &Path, resolve: bool, top: usize, as_json: bool) -> CmdResult {
    let c = &cli.common;
    let entries = load_fragments(path)?;
    let (model, desc) = build_model(c)?;
    let results: Vec<anyhow::Result<PolymerScores>> = entries
        .par_iter()
        .map(|e| fragcam_one(&model, desc.as_ref(), e, resolve))
        .collect();
    let mut polymers = Vec::new();
    let mut errors = 0;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => polymers.push(p),
            Err(e) => {
                errors += 1;
                eprintln!("entry {}: {}: {e:#}", i + 1, entries[i].psmiles);
            }
        }
    }
    let mut by_class: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for p in &polymers {
        for (cl, s) in p.classes.iter().zip(&p.scores) {
            let e = by_class.entry(cl).or_default();
            e.0 += s;
            e.1 += 1;
        }
    }
    let mut ranking: Vec<ClassScore> = by_class
        .into_iter()
        .map(|(cl, (sum, n))| ClassScore {
            class: cl.to_string(),
            mean: sum / n as f64,
            count: n,
        })
        .collect();
    ranking.sort_by(|a, b| b.mean.total_cmp(&a.mean).then_with(|| a.class.cmp(&b.class)));
    let max_error = polymers
        .iter()
        .map(|p| (p.scores.iter().sum::<f64>() - p.y_hat).abs())
        .fold(0.0, f64::max);
    let mut out = open_output(c)?;
    if as_json {
        let v = json!({ "polymers": polymers, "classes": ranking, "max_completeness_error": max_error });
        serde_json::to_writer_pretty(&mut out, &v).map_err(anyhow::Error::from)?;
        writeln!(out)?;
    } else {
        writeln!(
            out,
            "polymers {}  classes {}  max |sum a - y| {:.3e}",
            polymers.len(),
            ranking.len(),
            max_error
        )?;
        writeln!(out, "top {top}")?;
        for r in ranking.iter().take(top) {
            writeln!(out, "  {:>12.6}  {:>5}  {}", r.mean, r.count, r.class)?;
        }
        writeln!(out, "bottom {top}")?;
        for r in ranking.iter().rev().take(top) {
            writeln!(out, "  {:>12.6}  {:>5}  {}", r.mean, r.count, r.class)?;
        }
    }
    out.flush()?;
    let tol = c.tolerance.unwrap_or(1e-9);
    if errors > 0 {
        return Err(Failure::Input(anyhow!("{errors} invalid fragmentation(s)")));
    }
    if max_error > tol {
        return Err(Failure::Verify(format!(
            "fragment scores miss the prediction by {max_error:.3e}"
        )));
    }
    Ok(())
}
