//! Fragmentation modes behind a common trait, looked up by name at runtime.
//!
//! A mode supplies the rule table plus any structural cleavages that do not
//! fit a two-atom environment pattern. The built-in modes are `brics_like`
//! (table only) and `rbrics_like` (same table, plus long-aliphatic-chain
//! splitting and detachment of sp3 carbons bridging two rings).

use super::rules::RuleTable;
use super::FragmentError;
use crate::elements::Element;
use crate::molgraph::{BondOrder, Molecule};
use std::collections::BTreeSet;

pub trait FragmentationMode: Send + Sync {
    fn name(&self) -> &str;
    fn rules(&self) -> &RuleTable;
    /// Mode-specific extra cleavage bonds as (bond_index, pseudo rule id).
    /// Must never return ring bonds. Defaults to none.
    fn procedural_bonds(&self, _m: &Molecule) -> Vec<(usize, String)> {
        Vec::new()
    }
}

const BRICS_LIKE_RULES: &str = include_str!("../../../../rules/brics_like.rules");
const RBRICS_LIKE_RULES: &str = include_str!("../../../../rules/rbrics_like.rules");

/// A mode defined entirely by a rule table — used for the built-in
/// `brics_like` mode and for user-supplied tables.
pub struct TableMode {
    name: String,
    table: RuleTable,
}

impl TableMode {
    pub fn new(name: impl Into<String>, table: RuleTable) -> Self {
        TableMode {
            name: name.into(),
            table,
        }
    }
}

impl FragmentationMode for TableMode {
    fn name(&self) -> &str {
        &self.name
    }
    fn rules(&self) -> &RuleTable {
        &self.table
    }
}

struct RbricsLike {
    table: RuleTable,
}

impl FragmentationMode for RbricsLike {
    fn name(&self) -> &str {
        "rbrics_like"
    }
    fn rules(&self) -> &RuleTable {
        &self.table
    }
    fn procedural_bonds(&self, m: &Molecule) -> Vec<(usize, String)> {
        let mut out: Vec<(usize, String)> = long_chain_bonds(m)
            .into_iter()
            .map(|b| (b, "long_chain".to_string()))
            .collect();
        out.extend(
            ring_bridge_bonds(m)
                .into_iter()
                .map(|b| (b, "ring_bridge".to_string())),
        );
        out.sort_unstable();
        out.dedup_by_key(|e| e.0);
        out
    }
}

/// Saturated acyclic carbon: the only atom kind the procedural detectors
/// operate on.
fn is_chain_carbon(m: &Molecule, v: usize) -> bool {
    let a = m.atom(v);
    a.element == Element::C
        && !a.aromatic
        && !m.atom_in_ring(v)
        && m.neighbors(v)
            .iter()
            .all(|&(_, b)| m.bond(b).order == BondOrder::Single)
}

/// Splits unbranched runs of ≥ 7 saturated acyclic carbons every 4 atoms.
/// Returns the bonds after chain positions 4, 8, … counting from the end
/// with the smaller atom index.
fn long_chain_bonds(m: &Molecule) -> Vec<usize> {
    let chain: Vec<bool> = (0..m.num_atoms()).map(|v| is_chain_carbon(m, v)).collect();
    let chain_nbrs = |v: usize| -> Vec<usize> {
        m.neighbors(v)
            .iter()
            .filter(|&&(w, _)| chain[w])
            .map(|&(w, _)| w)
            .collect()
    };
    let mut seen = vec![false; m.num_atoms()];
    let mut cuts = Vec::new();
    for start in 0..m.num_atoms() {
        if !chain[start] || seen[start] {
            continue;
        }
        // Collect this component of the chain-carbon subgraph.
        let mut comp = vec![start];
        seen[start] = true;
        let mut i = 0;
        while i < comp.len() {
            for w in chain_nbrs(comp[i]) {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            i += 1;
        }
        // Only unbranched runs count; components with a junction are left
        // alone rather than split into arbitrary paths.
        if comp.len() < 7 || comp.iter().any(|&v| chain_nbrs(v).len() > 2) {
            continue;
        }
        let ends: Vec<usize> = comp
            .iter()
            .copied()
            .filter(|&v| chain_nbrs(v).len() <= 1)
            .collect();
        debug_assert_eq!(ends.len(), 2, "acyclic degree-≤2 component is a path");
        let mut pos = *ends.iter().min().unwrap();
        let mut prev = usize::MAX;
        let mut path = vec![pos];
        while path.len() < comp.len() {
            let next = chain_nbrs(pos)
                .into_iter()
                .find(|&w| w != prev)
                .expect("interior path atom has a forward neighbor");
            prev = pos;
            pos = next;
            path.push(pos);
        }
        let mut p = 4;
        while p < path.len() {
            cuts.push(
                m.bond_between(path[p - 1], path[p])
                    .expect("consecutive path atoms are bonded"),
            );
            p += 4;
        }
    }
    cuts.sort_unstable();
    cuts
}

/// Detaches saturated acyclic carbons that join two or more ring atoms:
/// every single bond from such a carbon to a ring atom is cut.
fn ring_bridge_bonds(m: &Molecule) -> Vec<usize> {
    let mut cuts = BTreeSet::new();
    for v in 0..m.num_atoms() {
        if !is_chain_carbon(m, v) {
            continue;
        }
        let ring_bonds: Vec<usize> = m
            .neighbors(v)
            .iter()
            .filter(|&&(w, _)| m.atom_in_ring(w))
            .map(|&(_, b)| b)
            .collect();
        if ring_bonds.len() >= 2 {
            cuts.extend(ring_bonds);
        }
    }
    cuts.into_iter().collect()
}

/// Name-indexed set of fragmentation modes.
pub struct ModeRegistry {
    modes: Vec<Box<dyn FragmentationMode>>,
}

impl ModeRegistry {
    /// Registry with the two built-in modes.
    pub fn builtin() -> Self {
        Self::with_tables(None, None)
    }

    /// Built-in mode set with replacement rule tables; `None` keeps the
    /// embedded table for that mode.
    pub fn with_tables(brics: Option<RuleTable>, rbrics: Option<RuleTable>) -> Self {
        let brics = brics.unwrap_or_else(|| {
            RuleTable::parse(BRICS_LIKE_RULES, "rules/brics_like.rules")
                .expect("shipped brics_like table parses")
        });
        let rbrics = rbrics.unwrap_or_else(|| {
            RuleTable::parse(RBRICS_LIKE_RULES, "rules/rbrics_like.rules")
                .expect("shipped rbrics_like table parses")
        });
        ModeRegistry {
            modes: vec![
                Box::new(TableMode::new("brics_like", brics)),
                Box::new(RbricsLike { table: rbrics }),
            ],
        }
    }

    /// Adds a mode, replacing any existing one with the same name.
    pub fn register(&mut self, mode: Box<dyn FragmentationMode>) {
        self.modes.retain(|m| m.name() != mode.name());
        self.modes.push(mode);
    }

    pub fn get(&self, name: &str) -> Result<&dyn FragmentationMode, FragmentError> {
        self.modes
            .iter()
            .find(|m| m.name() == name)
            .map(|m| m.as_ref())
            .ok_or_else(|| FragmentError::UnknownMode(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.modes.iter().map(|m| m.name()).collect()
    }
}
