//! Staged fragment-combination search.
//!
//! Stage 1 evaluates every initial fragment against the stock; stage n
//! extends each valid (n-1)-fragment combination by one adjacent fragment.
//! Growth only ever extends valid combinations, which is complete because
//! matching is monotone: a building block matching a combination also
//! matches every connected sub-combination, so all sub-combinations of a
//! valid combination are themselves valid and were found at earlier
//! stages. Solutions are exact covers of the fragment set by valid
//! combinations.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::fragmenter::{
    combination_pattern, fragment, FragmentDecomposition, FragmentationMode,
};
use crate::matcher::CompiledQuery;
use crate::molgraph::Molecule;
use crate::screen::screen_candidates;
use crate::stock::Stock;

pub const DEFAULT_SOLUTION_CAP: usize = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("target decomposed into {0} fragments; at most 128 are supported")]
    TooManyFragments(usize),
}

/// Set of initial-fragment indices, packed into a 128-bit word. Ordering
/// is the numeric order of the packed word; evaluation and registries use
/// it everywhere, which is what makes runs reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MemberSet(u128);

impl MemberSet {
    pub const EMPTY: MemberSet = MemberSet(0);

    pub fn singleton(i: usize) -> MemberSet {
        debug_assert!(i < 128);
        MemberSet(1u128 << i)
    }

    pub fn full(k: usize) -> MemberSet {
        debug_assert!(k <= 128);
        if k == 128 {
            MemberSet(!0)
        } else {
            MemberSet((1u128 << k) - 1)
        }
    }

    pub fn from_bits(bits: u128) -> MemberSet {
        MemberSet(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn with(self, i: usize) -> MemberSet {
        MemberSet(self.0 | (1u128 << i))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1u128 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: MemberSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: MemberSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Member indices in ascending order.
    pub fn indices(self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut rest = self.0;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            out.push(i);
            rest &= rest - 1;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    /// Some initial fragment matched nothing in the stock.
    InitFail,
    /// A stage produced no candidate combinations to evaluate.
    NoEffective,
    /// The whole-target combination was evaluated at the final stage.
    ReachedTarget,
    /// Defensive only: the stage loop is bounded by the fragment count,
    /// so runs never actually stop for this reason.
    StageLimit,
    /// Solution enumeration hit the configured cap.
    SolutionCap,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::InitFail => "init_fail",
            TerminationReason::NoEffective => "no_effective",
            TerminationReason::ReachedTarget => "reached_target",
            TerminationReason::StageLimit => "stage_limit",
            TerminationReason::SolutionCap => "solution_cap",
        }
    }
}

/// A connected set of initial fragments whose merged pattern matched at
/// least one building block.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentCombination {
    pub members: MemberSet,
    /// Merged fragment pattern (attachments at the combination boundary).
    pub pattern: Molecule,
    /// Matching stock ids, ascending. Complete under match-all; a single
    /// witness in first-hit mode.
    pub matched_bbs: Vec<u32>,
}

impl FragmentCombination {
    pub fn stage(&self) -> usize {
        self.members.len()
    }
}

/// One exact cover of the fragment set by valid combinations, blocks
/// ordered by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub blocks: Vec<MemberSet>,
}

impl Solution {
    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    /// Orders solutions of equal size: lexicographic over the blocks'
    /// ascending member-index lists.
    pub fn sort_key(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.indices()).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct StageStats {
    pub stage: usize,
    /// Combinations evaluated at this stage.
    pub effective: usize,
    pub valid: usize,
    pub match_calls: usize,
    pub screen_rejects: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct RetroResult {
    pub solved: bool,
    pub termination_reason: TerminationReason,
    /// Sorted by size, then by [`Solution::sort_key`].
    pub solutions: Vec<Solution>,
    /// True when enumeration stopped at the solution cap.
    pub truncated: bool,
    /// Evaluation order: stage ascending, member set ascending.
    pub valid_combinations: Vec<FragmentCombination>,
    pub stats: Vec<StageStats>,
}

impl RetroResult {
    pub fn combinations_evaluated(&self) -> usize {
        self.stats.iter().map(|s| s.effective).sum()
    }

    pub fn total_match_calls(&self) -> usize {
        self.stats.iter().map(|s| s.match_calls).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    /// Record every matching building block (false: stop a combination at
    /// its first hit; candidate priors are then disabled, because a prior
    /// built from partial match sets could drop true candidates).
    pub match_all: bool,
    pub max_solutions: usize,
    pub workers: usize,
    pub screening: bool,
    /// Seed each candidate's stock scan from its parents' match sets.
    pub use_priors: bool,
    /// Discard candidates containing a known-invalid sub-combination.
    pub prune_invalid: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            match_all: true,
            max_solutions: DEFAULT_SOLUTION_CAP,
            workers: 1,
            screening: true,
            use_priors: true,
            prune_invalid: true,
        }
    }
}

struct EvalOut {
    matched: Vec<u32>,
    match_calls: usize,
    screen_rejects: usize,
}

/// Screen, then match, one combination pattern against the stock.
fn evaluate(pattern: &Molecule, stock: &Stock, config: &EngineConfig, prior: Option<&[u32]>) -> EvalOut {
    let prior_len = prior.map_or(stock.len(), |p| p.len());
    let screened: Vec<u32> = if config.screening {
        screen_candidates(pattern, stock, prior)
    } else {
        match prior {
            Some(p) => p.to_vec(),
            None => (0..stock.len() as u32).collect(),
        }
    };
    let screen_rejects = prior_len - screened.len();
    let query = CompiledQuery::new(pattern).expect("fragment patterns have internal atoms");
    if config.match_all {
        let matched: Vec<u32> = screened
            .par_iter()
            .filter(|&&id| query.matches(&stock.entries[id as usize].molecule))
            .copied()
            .collect();
        EvalOut {
            match_calls: screened.len(),
            screen_rejects,
            matched,
        }
    } else {
        // match_calls reports the sequential-equivalent cost: the position
        // of the first hit, regardless of how the parallel scan probed.
        match screened
            .par_iter()
            .position_first(|&id| query.matches(&stock.entries[id as usize].molecule))
        {
            Some(pos) => EvalOut {
                matched: vec![screened[pos]],
                match_calls: pos + 1,
                screen_rejects,
            },
            None => EvalOut {
                matched: Vec::new(),
                match_calls: screened.len(),
                screen_rejects,
            },
        }
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn union_sorted_into(dst: &mut Vec<u32>, add: &[u32]) {
    let mut merged = Vec::with_capacity(dst.len() + add.len());
    let (mut i, mut j) = (0, 0);
    while i < dst.len() || j < add.len() {
        let next = match (dst.get(i), add.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        merged.push(next);
    }
    *dst = merged;
}

/// All exact covers of `0..k` by sets from `valid` (must be sorted
/// ascending), capped at `cap`. The second value reports whether the cap
/// cut enumeration short.
pub fn enumerate_solutions(valid: &[MemberSet], k: usize, cap: usize) -> (Vec<Solution>, bool) {
    if k == 0 {
        return (Vec::new(), false);
    }
    debug_assert!(valid.windows(2).all(|w| w[0] < w[1]), "valid sets sorted");
    let full = MemberSet::full(k);
    let mut containing: Vec<Vec<MemberSet>> = vec![Vec::new(); k];
    for &v in valid {
        for i in v.indices() {
            containing[i].push(v);
        }
    }

    fn recurse(
        covered: MemberSet,
        full: MemberSet,
        containing: &[Vec<MemberSet>],
        acc: &mut Vec<MemberSet>,
        out: &mut Vec<Solution>,
        cap: usize,
        truncated: &mut bool,
    ) -> bool {
        if covered == full {
            if out.len() == cap {
                *truncated = true;
                return false;
            }
            out.push(Solution { blocks: acc.clone() });
            return true;
        }
        let lowest = (!covered.bits()).trailing_zeros() as usize;
        for &v in &containing[lowest] {
            if v.intersects(covered) {
                continue;
            }
            acc.push(v);
            let keep_going = recurse(
                MemberSet(covered.bits() | v.bits()),
                full,
                containing,
                acc,
                out,
                cap,
                truncated,
            );
            acc.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }

    let mut out = Vec::new();
    let mut acc = Vec::new();
    let mut truncated = false;
    recurse(
        MemberSet::EMPTY,
        full,
        &containing,
        &mut acc,
        &mut out,
        cap,
        &mut truncated,
    );
    (out, truncated)
}

pub fn run(
    target: &Molecule,
    stock: &Stock,
    mode: &dyn FragmentationMode,
    config: &EngineConfig,
) -> Result<RetroResult, EngineError> {
    let decomp = fragment(target, mode);
    if decomp.fragments.len() > 128 {
        return Err(EngineError::TooManyFragments(decomp.fragments.len()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .expect("worker pool");
    Ok(pool.install(|| run_decomposed(&decomp, stock, config)))
}

/// As [`run`] with screening forced off; everything but the stats must
/// come out identical.
pub fn run_without_screening(
    target: &Molecule,
    stock: &Stock,
    mode: &dyn FragmentationMode,
    config: &EngineConfig,
) -> Result<RetroResult, EngineError> {
    let mut cfg = *config;
    cfg.screening = false;
    run(target, stock, mode, &cfg)
}

fn run_decomposed(decomp: &FragmentDecomposition, stock: &Stock, config: &EngineConfig) -> RetroResult {
    let k = decomp.fragments.len();
    let use_priors = config.use_priors && config.match_all;

    // Fragment adjacency, deduplicated (parallel cut bonds collapse).
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &(a, b, _) in &decomp.adjacency {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    for list in &mut nbrs {
        list.sort_unstable();
        list.dedup();
    }

    let mut stats: Vec<StageStats> = Vec::new();
    let mut valid_combinations: Vec<FragmentCombination> = Vec::new();

    // Stage 1: every initial fragment, full stock scan.
    let t0 = Instant::now();
    let singles: Vec<(usize, EvalOut)> = (0..k)
        .into_par_iter()
        .map(|i| (i, evaluate(&decomp.fragments[i], stock, config, None)))
        .collect();
    let mut stage1 = StageStats {
        stage: 1,
        effective: k,
        ..StageStats::default()
    };
    let mut singleton_matched: Vec<Vec<u32>> = Vec::with_capacity(k);
    let mut all_valid = true;
    for (i, out) in singles {
        stage1.match_calls += out.match_calls;
        stage1.screen_rejects += out.screen_rejects;
        if out.matched.is_empty() {
            all_valid = false;
        } else {
            stage1.valid += 1;
            valid_combinations.push(FragmentCombination {
                members: MemberSet::singleton(i),
                pattern: decomp.fragments[i].clone(),
                matched_bbs: out.matched.clone(),
            });
        }
        singleton_matched.push(out.matched);
    }
    stage1.elapsed = t0.elapsed();
    stats.push(stage1);

    if !all_valid {
        return RetroResult {
            solved: false,
            termination_reason: TerminationReason::InitFail,
            solutions: Vec::new(),
            truncated: false,
            valid_combinations,
            stats,
        };
    }

    // Match sets of valid combinations from the previous stage, for priors.
    let mut prev: BTreeMap<MemberSet, usize> = (0..k)
        .map(|i| (MemberSet::singleton(i), i))
        .collect();
    let mut invalid: Vec<MemberSet> = Vec::new();
    let mut reason = TerminationReason::ReachedTarget;

    for n in 2..=k {
        let t_stage = Instant::now();
        // Candidates: each previous valid combination extended by one
        // adjacent fragment. A candidate reachable from several parents
        // gets the union of the per-parent priors (each is sound alone).
        let mut candidates: BTreeMap<MemberSet, Option<Vec<u32>>> = BTreeMap::new();
        for (&p, &pidx) in &prev {
            for i in p.indices() {
                for &j in &nbrs[i] {
                    if p.contains(j) {
                        continue;
                    }
                    let c = p.with(j);
                    if use_priors {
                        let event = intersect_sorted(
                            &valid_combinations[pidx].matched_bbs,
                            &singleton_matched[j],
                        );
                        match candidates.entry(c).or_insert_with(|| Some(Vec::new())) {
                            Some(prior) => union_sorted_into(prior, &event),
                            None => unreachable!(),
                        }
                    } else {
                        candidates.entry(c).or_insert(None);
                    }
                }
            }
        }
        if config.prune_invalid {
            candidates.retain(|&c, _| !invalid.iter().any(|&inv| inv.is_subset_of(c)));
        }
        if candidates.is_empty() {
            reason = TerminationReason::NoEffective;
            break;
        }

        let work: Vec<(MemberSet, Option<Vec<u32>>)> = candidates.into_iter().collect();
        let evaluated: Vec<(MemberSet, Molecule, EvalOut)> = work
            .into_par_iter()
            .map(|(c, prior)| {
                let pattern = combination_pattern(decomp, c.bits())
                    .expect("stage candidates are connected");
                let out = evaluate(&pattern, stock, config, prior.as_deref());
                (c, pattern, out)
            })
            .collect();

        let mut record = StageStats {
            stage: n,
            effective: evaluated.len(),
            ..StageStats::default()
        };
        let mut next_prev: BTreeMap<MemberSet, usize> = BTreeMap::new();
        for (c, pattern, out) in evaluated {
            record.match_calls += out.match_calls;
            record.screen_rejects += out.screen_rejects;
            if out.matched.is_empty() {
                invalid.push(c);
            } else {
                record.valid += 1;
                next_prev.insert(c, valid_combinations.len());
                valid_combinations.push(FragmentCombination {
                    members: c,
                    pattern,
                    matched_bbs: out.matched,
                });
            }
        }
        record.elapsed = t_stage.elapsed();
        stats.push(record);
        prev = next_prev;
    }

    let mut members: Vec<MemberSet> = valid_combinations.iter().map(|c| c.members).collect();
    members.sort_unstable();
    let (mut solutions, truncated) =
        enumerate_solutions(&members, k, config.max_solutions.max(1));
    if truncated {
        reason = TerminationReason::SolutionCap;
    }
    solutions.sort_by_cached_key(|s| (s.size(), s.sort_key()));

    // All initial fragments valid ⇒ the all-singletons cover exists, so
    // reaching this point means the run is solved.
    debug_assert!(!solutions.is_empty());
    RetroResult {
        solved: !solutions.is_empty(),
        termination_reason: reason,
        solutions,
        truncated,
        valid_combinations,
        stats,
    }
}
