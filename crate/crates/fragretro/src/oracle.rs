//! Brute-force reference implementations used to cross-check the optimized
//! search paths. Everything here favors obviousness over speed and shares no
//! traversal code with the modules it checks.

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use thiserror::Error;

use crate::engine::{
    FragmentCombination, MemberSet, RetroResult, Solution, StageStats, TerminationReason,
    DEFAULT_SOLUTION_CAP,
};
use crate::fragmenter::{combination_pattern, fragment, FragmentationMode};
use crate::matcher::MatchError;
use crate::molgraph::Molecule;
use crate::stock::Stock;

/// Exhaustive backtracking substructure check: tries target atoms in index
/// order for each internal query atom in index order, with no candidate
/// ordering, no anchor-guided candidate sets, and no prefilters, then
/// re-verifies every completed assignment from scratch. Must agree with
/// `matcher::match_substructure` on every input.
pub fn naive_match(query: &Molecule, target: &Molecule) -> Result<bool, MatchError> {
    let internal: Vec<usize> = (0..query.num_atoms())
        .filter(|&i| !query.atom(i).is_attachment)
        .collect();
    if internal.is_empty() {
        return Err(MatchError::QueryHasNoInternalAtoms);
    }
    let mut map = vec![usize::MAX; internal.len()];
    let mut used = vec![false; target.num_atoms()];
    Ok(assign(query, target, &internal, 0, &mut map, &mut used))
}

fn assign(
    query: &Molecule,
    target: &Molecule,
    internal: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == internal.len() {
        return verify(query, target, internal, map);
    }
    for t in 0..target.num_atoms() {
        if used[t] || !plausible(query, target, internal, depth, t, map) {
            continue;
        }
        map[depth] = t;
        used[t] = true;
        if assign(query, target, internal, depth + 1, map, used) {
            return true;
        }
        map[depth] = usize::MAX;
        used[t] = false;
    }
    false
}

/// Partial consistency only — enough pruning to finish in reasonable time,
/// with the real decision left to `verify`.
fn plausible(
    query: &Molecule,
    target: &Molecule,
    internal: &[usize],
    depth: usize,
    t: usize,
    map: &[usize],
) -> bool {
    let qa = query.atom(internal[depth]);
    let ta = target.atom(t);
    if ta.is_attachment
        || qa.element != ta.element
        || qa.aromatic != ta.aromatic
        || qa.formal_charge != ta.formal_charge
    {
        return false;
    }
    for (p, &qi) in internal.iter().enumerate().take(depth) {
        let qbond = query.bond_between(internal[depth], qi);
        let tbond = target.bond_between(t, map[p]);
        match (qbond, tbond) {
            (Some(qb), Some(tb)) => {
                if query.bond(qb).order != target.bond(tb).order {
                    return false;
                }
            }
            (None, None) => {}
            _ => return false,
        }
    }
    true
}

/// Re-checks a completed assignment against the full strictness definition,
/// independent of whatever the search pruned on.
fn verify(query: &Molecule, target: &Molecule, internal: &[usize], map: &[usize]) -> bool {
    let n = internal.len();
    // Injectivity.
    for i in 0..n {
        for j in i + 1..n {
            if map[i] == map[j] {
                return false;
            }
        }
    }
    for (p, &qi) in internal.iter().enumerate() {
        let (qa, ta) = (query.atom(qi), target.atom(map[p]));
        if qa.element != ta.element
            || qa.aromatic != ta.aromatic
            || qa.formal_charge != ta.formal_charge
        {
            return false;
        }
        if query.atom_in_ring(qi) && !target.atom_in_ring(map[p]) {
            return false;
        }
        // Every internal query bond present with equal order; no target bond
        // between images without the corresponding query bond.
        let mut internal_deg = 0u32;
        let mut slot_count = 0u32;
        for &(w, qbidx) in query.neighbors(qi) {
            if query.atom(w).is_attachment {
                slot_count += 1;
                continue;
            }
            internal_deg += 1;
            let wp = internal.iter().position(|&x| x == w).unwrap();
            match target.bond_between(map[p], map[wp]) {
                Some(tb) if target.bond(tb).order == query.bond(qbidx).order => {}
                _ => return false,
            }
        }
        for &(w, _) in target.neighbors(map[p]) {
            if let Some(wp) = map.iter().position(|&x| x == w) {
                if query.bond_between(qi, internal[wp]).is_none() {
                    return false;
                }
            }
        }
        // Extra heavy neighbors are capped by the attachment slots.
        let extra = target.heavy_degree(map[p]) as i64 - internal_deg as i64;
        if extra < 0 || extra > slot_count as i64 {
            return false;
        }
    }
    true
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("brute-force search is limited to 8 fragments, target has {0}")]
    TooManyFragments(usize),
    #[error("brute-force search is limited to 500 building blocks, stock has {0}")]
    StockTooLarge(usize),
}

/// Every connected subset of `0..k` under the fragment adjacency, as
/// bitsets in ascending numeric order. Exhaustive growth: keep adding any
/// adjacent node to any known subset until nothing new appears.
pub fn all_connected_subsets(k: usize, adjacency: &[(usize, usize, u32)]) -> Vec<u128> {
    let mut nbrs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for &(a, b, _) in adjacency {
        nbrs[a].insert(b);
        nbrs[b].insert(a);
    }
    let mut seen: BTreeSet<u128> = (0..k).map(|i| 1u128 << i).collect();
    let mut work: Vec<u128> = seen.iter().copied().collect();
    while let Some(s) = work.pop() {
        for i in 0..k {
            if s & (1 << i) == 0 {
                continue;
            }
            for &j in &nbrs[i] {
                let grown = s | (1 << j);
                if grown != s && seen.insert(grown) {
                    work.push(grown);
                }
            }
        }
    }
    seen.into_iter().collect()
}

/// Reference search: decomposes the target, evaluates every connected
/// fragment subset against every stock entry with [`naive_match`] — no
/// screening, no priors, no pruning — then filters all set partitions of
/// the fragments down to those whose blocks are all valid. Mirrors the
/// engine's stage-1 early exit so unsolvable runs compare field-for-field.
pub fn brute_force_retro(
    target: &Molecule,
    stock: &Stock,
    mode: &dyn FragmentationMode,
) -> Result<RetroResult, OracleError> {
    let decomp = fragment(target, mode);
    let k = decomp.fragments.len();
    if k > 8 {
        return Err(OracleError::TooManyFragments(k));
    }
    if stock.len() > 500 {
        return Err(OracleError::StockTooLarge(stock.len()));
    }

    let matched_ids = |pattern: &Molecule| -> Vec<u32> {
        stock
            .entries
            .iter()
            .filter(|e| naive_match(pattern, &e.molecule) == Ok(true))
            .map(|e| e.id)
            .collect()
    };

    let mut stats: Vec<StageStats> = Vec::new();
    let mut valid_combinations: Vec<FragmentCombination> = Vec::new();

    let t0 = Instant::now();
    let mut stage1 = StageStats {
        stage: 1,
        effective: k,
        match_calls: k * stock.len(),
        ..StageStats::default()
    };
    let mut all_valid = true;
    for (i, pattern) in decomp.fragments.iter().enumerate() {
        let matched = matched_ids(pattern);
        if matched.is_empty() {
            all_valid = false;
        } else {
            stage1.valid += 1;
            valid_combinations.push(FragmentCombination {
                members: MemberSet::singleton(i),
                pattern: pattern.clone(),
                matched_bbs: matched,
            });
        }
    }
    stage1.elapsed = t0.elapsed();
    stats.push(stage1);

    if !all_valid {
        return Ok(RetroResult {
            solved: false,
            termination_reason: TerminationReason::InitFail,
            solutions: Vec::new(),
            truncated: false,
            valid_combinations,
            stats,
        });
    }

    let subsets = all_connected_subsets(k, &decomp.adjacency);
    for n in 2..=k {
        let t_stage = Instant::now();
        let mut record = StageStats {
            stage: n,
            ..StageStats::default()
        };
        for &s in &subsets {
            if s.count_ones() as usize != n {
                continue;
            }
            record.effective += 1;
            record.match_calls += stock.len();
            let pattern =
                combination_pattern(&decomp, s).expect("connected subsets merge cleanly");
            let matched = matched_ids(&pattern);
            if !matched.is_empty() {
                record.valid += 1;
                valid_combinations.push(FragmentCombination {
                    members: MemberSet::from_bits(s),
                    pattern,
                    matched_bbs: matched,
                });
            }
        }
        record.elapsed = t_stage.elapsed();
        stats.push(record);
    }

    // All set partitions of 0..k via restricted growth strings, kept when
    // every block is a valid combination.
    let valid_sets: HashSet<u128> = valid_combinations
        .iter()
        .map(|c| c.members.bits())
        .collect();
    let mut solutions: Vec<Solution> = Vec::new();
    let mut rgs = vec![0usize; k];
    loop {
        let nblocks = rgs.iter().copied().max().unwrap_or(0) + 1;
        let mut blocks = vec![0u128; nblocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b] |= 1 << i;
        }
        if blocks.iter().all(|b| valid_sets.contains(b)) {
            solutions.push(Solution {
                blocks: blocks.into_iter().map(MemberSet::from_bits).collect(),
            });
        }
        // Next restricted growth string: a[i] may rise to max(prefix) + 1.
        let mut advanced = false;
        for pos in (1..k).rev() {
            let prefix_max = rgs[..pos].iter().copied().max().unwrap();
            if rgs[pos] <= prefix_max {
                rgs[pos] += 1;
                for x in rgs[pos + 1..].iter_mut() {
                    *x = 0;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    solutions.sort_by_cached_key(|s| (s.size(), s.sort_key()));
    let truncated = solutions.len() > DEFAULT_SOLUTION_CAP;
    if truncated {
        solutions.truncate(DEFAULT_SOLUTION_CAP);
    }

    Ok(RetroResult {
        solved: !solutions.is_empty(),
        termination_reason: if truncated {
            TerminationReason::SolutionCap
        } else {
            TerminationReason::ReachedTarget
        },
        solutions,
        truncated,
        valid_combinations,
        stats,
    })
}
