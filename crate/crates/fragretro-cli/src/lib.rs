//! Output shaping for the `fragretro` binary: JSON views of engine
//! results and CSV rows for the bench subcommands.
//!
//! Retro JSON deliberately leaves wall-clock numbers out of the per-stage
//! stats so that runs differing only in worker count print byte-identical
//! output; timings belong to `bench`.

use std::collections::BTreeMap;

use serde::Serialize;

use fragretro::engine::{MemberSet, RetroResult};
use fragretro::fragmenter::FragmentDecomposition;
use fragretro::molgraph::write_smiles;

pub const MATCH_SAMPLE_CAP: usize = 20;

#[derive(Debug, Serialize)]
pub struct FragmentJson {
    pub fragments: Vec<String>,
    /// Fragment-graph edges as `[a, b, bond_id]`, parallel edges kept.
    pub adjacency: Vec<(usize, usize, u32)>,
    /// Cleaved-bond id -> rule id.
    pub rules: BTreeMap<u32, String>,
}

pub fn render_fragments(decomp: &FragmentDecomposition) -> FragmentJson {
    FragmentJson {
        fragments: decomp.fragments.iter().map(write_smiles).collect(),
        adjacency: decomp.adjacency.clone(),
        rules: decomp.rule_per_bond.clone(),
    }
}

#[derive(Debug, Serialize)]
pub struct BlockJson {
    pub members: Vec<usize>,
    pub pattern_smiles: String,
    pub matched_bb_ids_sample: Vec<u32>,
}

#[derive(Debug, Serialize)]
pub struct SolutionJson {
    pub size: usize,
    pub blocks: Vec<BlockJson>,
}

#[derive(Debug, Serialize)]
pub struct StageJson {
    pub stage: usize,
    pub effective: usize,
    pub valid: usize,
    pub match_calls: usize,
    pub screen_rejects: usize,
}

#[derive(Debug, Serialize)]
pub struct RetroJson {
    pub solved: bool,
    pub termination_reason: &'static str,
    pub truncated: bool,
    pub solutions: Vec<SolutionJson>,
    pub stats: Vec<StageJson>,
}

/// `full_matches` lifts the per-block cap of [`MATCH_SAMPLE_CAP`] matched
/// building-block ids.
pub fn render_retro(result: &RetroResult, full_matches: bool) -> RetroJson {
    let by_members: BTreeMap<MemberSet, usize> = result
        .valid_combinations
        .iter()
        .enumerate()
        .map(|(i, c)| (c.members, i))
        .collect();
    let solutions = result
        .solutions
        .iter()
        .map(|s| SolutionJson {
            size: s.size(),
            blocks: s
                .blocks
                .iter()
                .map(|b| {
                    let combo = &result.valid_combinations[by_members[b]];
                    let mut sample = combo.matched_bbs.clone();
                    if !full_matches {
                        sample.truncate(MATCH_SAMPLE_CAP);
                    }
                    BlockJson {
                        members: b.indices(),
                        pattern_smiles: write_smiles(&combo.pattern),
                        matched_bb_ids_sample: sample,
                    }
                })
                .collect(),
        })
        .collect();
    RetroJson {
        solved: result.solved,
        termination_reason: result.termination_reason.as_str(),
        truncated: result.truncated,
        solutions,
        stats: result
            .stats
            .iter()
            .map(|s| StageJson {
                stage: s.stage,
                effective: s.effective,
                valid: s.valid,
                match_calls: s.match_calls,
                screen_rejects: s.screen_rejects,
            })
            .collect(),
    }
}

pub fn seconds(d: std::time::Duration) -> String {
    format!("{:.6}", d.as_secs_f64())
}

#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub heavy_atoms: usize,
    pub fragments: usize,
    pub combinations_evaluated: usize,
    pub elapsed: std::time::Duration,
}

pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from("heavy_atoms,fragments,combinations_evaluated,elapsed_s\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.heavy_atoms,
            r.fragments,
            r.combinations_evaluated,
            seconds(r.elapsed)
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct ParallelRow {
    pub workers: usize,
    pub elapsed: std::time::Duration,
    pub speedup: f64,
}

pub fn parallel_csv(rows: &[ParallelRow]) -> String {
    let mut out = String::from("workers,elapsed_s,speedup\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.3}\n",
            r.workers,
            seconds(r.elapsed),
            r.speedup
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct ScreeningRow {
    pub target: String,
    pub elapsed_on: std::time::Duration,
    pub elapsed_off: std::time::Duration,
    pub match_calls_on: usize,
    pub match_calls_off: usize,
}

pub fn screening_csv(rows: &[ScreeningRow]) -> String {
    let mut out =
        String::from("target,elapsed_on_s,elapsed_off_s,match_calls_on,match_calls_off\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.target,
            seconds(r.elapsed_on),
            seconds(r.elapsed_off),
            r.match_calls_on,
            r.match_calls_off
        ));
    }
    out
}
