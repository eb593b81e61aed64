//! Rule-driven decomposition of a target molecule into fragments.
//!
//! A rule table (see [`rules`]) selects cleavable bonds; all of them are cut
//! simultaneously. Each cut inserts one attachment atom on both sides
//! carrying a shared bond id, so any connected subset of fragments can later
//! be merged back into a single pattern. Fragments are nodes and cut bonds
//! are edges of the fragment adjacency graph the search engine walks.

mod modes;
mod rules;

pub use modes::{FragmentationMode, ModeRegistry, TableMode};
pub use rules::{CleavageRule, EnvPattern, NeighborSpec, RuleTable};

use crate::molgraph::{merge, Atom, Bond, Molecule};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FragmentError {
    #[error("{origin}:{line}: {msg}")]
    RuleSyntax {
        origin: String,
        line: usize,
        msg: String,
    },
    #[error("member set is empty or not connected in the fragment graph")]
    DisconnectedMembers,
    #[error("unknown fragmentation mode {0:?}")]
    UnknownMode(String),
}

/// Result of cutting a target: the fragment list, which fragments touch
/// which cut bonds, and which rule claimed each bond.
#[derive(Debug, Clone)]
pub struct FragmentDecomposition {
    pub target: Molecule,
    /// Ordered by smallest original atom index; every attachment atom
    /// carries the cut bond id it stands for.
    pub fragments: Vec<Molecule>,
    /// Edges (fragment_a, fragment_b, bond_id) with a < b, one per cut bond.
    /// May contain parallel edges (two fragments sharing two cut bonds), in
    /// which case the fragment graph is cyclic.
    pub adjacency: Vec<(usize, usize, u32)>,
    pub rule_per_bond: BTreeMap<u32, String>,
}

/// All bonds of `m` cleavable under `rules`, ascending by bond index, each
/// with the first rule (in table order) that matched in either orientation.
pub fn find_cleavage_bonds(m: &Molecule, rules: &RuleTable) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    for bidx in 0..m.num_bonds() {
        let bond = m.bond(bidx);
        for rule in &rules.rules {
            if bond.order != rule.bond_order {
                continue;
            }
            if rule.acyclic_only && m.bond_in_ring(bidx) {
                continue;
            }
            let fwd = rule.left_env.matches(m, bond.a, bond.b)
                && rule.right_env.matches(m, bond.b, bond.a);
            let rev = rule.left_env.matches(m, bond.b, bond.a)
                && rule.right_env.matches(m, bond.a, bond.b);
            if fwd || rev {
                out.push((bidx, rule.rule_id.clone()));
                break;
            }
        }
    }
    out
}

/// Cuts every cleavable bond of `m` under `mode` at once and packages the
/// resulting fragments. Cut bonds that do not separate their endpoints
/// (a lone cut inside a ring) are restored rather than left dangling, so
/// every reported bond id really joins two distinct fragments.
pub fn fragment(m: &Molecule, mode: &dyn FragmentationMode) -> FragmentDecomposition {
    let mut cut: BTreeMap<usize, String> = find_cleavage_bonds(m, mode.rules())
        .into_iter()
        .collect();
    for (bidx, rule_id) in mode.procedural_bonds(m) {
        debug_assert!(!m.bond_in_ring(bidx));
        cut.entry(bidx).or_insert(rule_id);
    }

    // Connected components over the uncut bonds.
    let mut comp = vec![usize::MAX; m.num_atoms()];
    let mut n_comp = 0;
    for start in 0..m.num_atoms() {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = n_comp;
        while let Some(v) = stack.pop() {
            for &(w, b) in m.neighbors(v) {
                if comp[w] == usize::MAX && !cut.contains_key(&b) {
                    comp[w] = n_comp;
                    stack.push(w);
                }
            }
        }
        n_comp += 1;
    }
    // A cut whose endpoints stayed in one component separates nothing;
    // restore it. The component labeling never used cut bonds and restored
    // bonds are intra-component, so the partition stays valid as computed —
    // one pass suffices.
    cut.retain(|&b, _| {
        let bond = m.bond(b);
        comp[bond.a] != comp[bond.b]
    });
    build_decomposition(m, &cut, &comp, n_comp)
}

fn build_decomposition(
    m: &Molecule,
    cut: &BTreeMap<usize, String>,
    comp: &[usize],
    n_comp: usize,
) -> FragmentDecomposition {
    // Components are discovered in ascending order of their smallest atom
    // index, so `comp` values already give the fragment ordering.
    let mut rule_per_bond = BTreeMap::new();
    let bond_ids: BTreeMap<usize, u32> = cut
        .iter()
        .enumerate()
        .map(|(i, (&bidx, rule_id))| {
            rule_per_bond.insert(i as u32, rule_id.clone());
            (bidx, i as u32)
        })
        .collect();

    let mut atoms_of: Vec<Vec<usize>> = vec![Vec::new(); n_comp];
    for v in 0..m.num_atoms() {
        atoms_of[comp[v]].push(v);
    }
    let mut fragments = Vec::with_capacity(n_comp);
    for c in 0..n_comp {
        let locals: BTreeMap<usize, usize> = atoms_of[c]
            .iter()
            .enumerate()
            .map(|(l, &g)| (g, l))
            .collect();
        let mut atoms: Vec<Atom> = atoms_of[c].iter().map(|&g| m.atom(g).clone()).collect();
        let mut bonds = Vec::new();
        for bidx in 0..m.num_bonds() {
            let b = m.bond(bidx);
            if comp[b.a] == c && comp[b.b] == c && !bond_ids.contains_key(&bidx) {
                bonds.push(Bond {
                    a: locals[&b.a],
                    b: locals[&b.b],
                    order: b.order,
                });
            }
        }
        // Attachment atoms for each cut touching this component, in bond id
        // order; the attachment bond keeps the cut bond's order.
        for (&bidx, &id) in &bond_ids {
            let b = m.bond(bidx);
            for &end in &[b.a, b.b] {
                if comp[end] == c {
                    atoms.push(Atom::attachment(id));
                    bonds.push(Bond {
                        a: locals[&end],
                        b: atoms.len() - 1,
                        order: b.order,
                    });
                }
            }
        }
        fragments.push(Molecule::new(atoms, bonds));
    }

    let adjacency = bond_ids
        .iter()
        .map(|(&bidx, &id)| {
            let b = m.bond(bidx);
            let (x, y) = (comp[b.a], comp[b.b]);
            (x.min(y), x.max(y), id)
        })
        .collect();
    FragmentDecomposition {
        target: m.clone(),
        fragments,
        adjacency,
        rule_per_bond,
    }
}

/// Merges the member fragments (a bitset over fragment indices) over all
/// bond ids internal to the set. Boundary attachments remain, making the
/// result the substructure pattern for this combination.
pub fn combination_pattern(
    d: &FragmentDecomposition,
    members: u128,
) -> Result<Molecule, FragmentError> {
    if members == 0 {
        return Err(FragmentError::DisconnectedMembers);
    }
    debug_assert!(
        d.fragments.len() >= 128 || members >> d.fragments.len() == 0,
        "member bit beyond fragment count"
    );
    let member_list: Vec<usize> = (0..d.fragments.len().min(128))
        .filter(|&i| members & (1u128 << i) != 0)
        .collect();
    if member_list.is_empty() {
        return Err(FragmentError::DisconnectedMembers);
    }
    let ids_of = |mol: &Molecule| -> Vec<u32> {
        let mut ids: Vec<u32> = (0..mol.num_atoms())
            .filter_map(|i| mol.atom(i).attachment_bond_id)
            .collect();
        ids.sort_unstable();
        ids
    };
    let mut acc = d.fragments[member_list[0]].clone();
    let mut remaining: Vec<usize> = member_list[1..].to_vec();
    while !remaining.is_empty() {
        let acc_ids = ids_of(&acc);
        let mut merged_any = false;
        for (pos, &f) in remaining.iter().enumerate() {
            let shared: Vec<u32> = ids_of(&d.fragments[f])
                .into_iter()
                .filter(|id| acc_ids.binary_search(id).is_ok())
                .collect();
            if shared.is_empty() {
                continue;
            }
            acc = merge(&acc, &d.fragments[f], &shared)
                .expect("shared ids verified present on both sides");
            remaining.remove(pos);
            merged_any = true;
            break;
        }
        if !merged_any {
            return Err(FragmentError::DisconnectedMembers);
        }
    }
    Ok(acc)
}
