//! Strict substructure matching for fragment patterns.
//!
//! A query's non-attachment ("internal") atoms must map injectively into the
//! target so that element, aromatic flag, and formal charge are equal and
//! every internal query bond lands on a target bond of equal order. The
//! strictness rule constrains degrees: a target atom may carry extra heavy
//! neighbors only where the query atom has attachment (`*`) neighbors, at
//! most one extra per attachment slot, and those extras may not be images of
//! other internal atoms (equivalently, the embedding is induced). A slot may
//! also be satisfied by hydrogen, so no lower bound beyond the internal
//! degree applies. Internal atoms with no attachments admit no extra heavy
//! neighbors at all. Query atoms in rings must map to ring atoms; the
//! converse direction is unconstrained (an acyclic query atom may sit on a
//! target ring when the slot arithmetic allows it). Isotopes are ignored;
//! formal charge must be exactly equal.

use crate::molgraph::{BondOrder, Molecule};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("query has no internal (non-attachment) atoms")]
    QueryHasNoInternalAtoms,
}

/// Query-side analysis reusable across many targets.
pub struct CompiledQuery<'q> {
    query: &'q Molecule,
    /// Internal (non-attachment) atom indices.
    internal: Vec<usize>,
    /// Per internal position: number of internal neighbors.
    req: Vec<u32>,
    /// Per internal position: number of attachment neighbors.
    slots: Vec<u32>,
    /// Per internal position: (internal neighbor position, bond order).
    nbrs: Vec<Vec<(usize, BondOrder)>>,
    /// (element number * 2 + aromatic) -> count over internal atoms.
    class_counts: Vec<(u16, u32)>,
}

fn class_of(elem_num: u8, aromatic: bool) -> u16 {
    (elem_num as u16) * 2 + aromatic as u16
}

impl<'q> CompiledQuery<'q> {
    pub fn new(query: &'q Molecule) -> Result<Self, MatchError> {
        let internal: Vec<usize> = (0..query.num_atoms())
            .filter(|&i| !query.atom(i).is_attachment)
            .collect();
        if internal.is_empty() {
            return Err(MatchError::QueryHasNoInternalAtoms);
        }
        let mut internal_pos = vec![usize::MAX; query.num_atoms()];
        for (p, &i) in internal.iter().enumerate() {
            internal_pos[i] = p;
        }
        let mut req = vec![0u32; internal.len()];
        let mut slots = vec![0u32; internal.len()];
        let mut nbrs = vec![Vec::new(); internal.len()];
        for (p, &i) in internal.iter().enumerate() {
            for &(w, bidx) in query.neighbors(i) {
                if query.atom(w).is_attachment {
                    slots[p] += 1;
                } else {
                    req[p] += 1;
                    nbrs[p].push((internal_pos[w], query.bond(bidx).order));
                }
            }
        }
        let mut counts = std::collections::BTreeMap::new();
        for &i in &internal {
            let a = query.atom(i);
            *counts.entry(class_of(a.element.0, a.aromatic)).or_insert(0u32) += 1;
        }
        Ok(CompiledQuery {
            query,
            internal,
            req,
            slots,
            nbrs,
            class_counts: counts.into_iter().collect(),
        })
    }

    pub fn internal_atom_count(&self) -> usize {
        self.internal.len()
    }

    /// True when at least one strict embedding into `target` exists.
    pub fn matches(&self, target: &Molecule) -> bool {
        self.search(target, 1) > 0
    }

    /// Number of distinct strict embeddings, counted up to `limit`.
    pub fn count(&self, target: &Molecule, limit: usize) -> usize {
        self.search(target, limit)
    }

    fn search(&self, target: &Molecule, limit: usize) -> usize {
        if limit == 0 || self.internal.len() > target.num_atoms() {
            return 0;
        }
        // Element-class prefilter: every query class needs enough target atoms.
        let mut tclass = vec![0u32; 240];
        for t in 0..target.num_atoms() {
            let a = target.atom(t);
            if !a.is_attachment {
                tclass[class_of(a.element.0, a.aromatic) as usize] += 1;
            }
        }
        for &(c, n) in &self.class_counts {
            if tclass[c as usize] < n {
                return 0;
            }
        }

        // Candidate counts per internal atom steer the assignment order:
        // scarcest-in-target first, then grow over query adjacency.
        let m = self.internal.len();
        let cand_count: Vec<u32> = (0..m)
            .map(|p| {
                (0..target.num_atoms())
                    .filter(|&t| self.atom_feasible(p, target, t))
                    .count() as u32
            })
            .collect();
        let mut order = Vec::with_capacity(m);
        let mut placed = vec![false; m];
        let mut anchors: Vec<Option<(usize, BondOrder)>> = vec![None; m];
        let start = (0..m).min_by_key(|&p| (cand_count[p], p)).unwrap();
        order.push(start);
        placed[start] = true;
        while order.len() < m {
            let mut best: Option<(u32, usize, usize, BondOrder)> = None;
            for &p in &order {
                for &(q, o) in &self.nbrs[p] {
                    if placed[q] {
                        continue;
                    }
                    let key = (cand_count[q], q, p, o);
                    if best.map_or(true, |(bc, bq, _, _)| (key.0, key.1) < (bc, bq)) {
                        best = Some(key);
                    }
                }
            }
            let (_, q, p, o) = best.expect("query internal graph is connected");
            anchors[q] = Some((p, o));
            order.push(q);
            placed[q] = true;
        }
        // order positions stated in assignment sequence; anchors reference the
        // query position whose image constrains the candidate set.
        let mut map = vec![usize::MAX; m]; // internal position -> target atom
        let mut rmap = vec![usize::MAX; target.num_atoms()]; // target -> internal position
        let mut found = 0usize;
        self.backtrack(
            target, &order, &anchors, 0, &mut map, &mut rmap, limit, &mut found,
        );
        found
    }

    /// Static label/ring/degree-window feasibility of mapping position `p`
    /// onto target atom `t`.
    fn atom_feasible(&self, p: usize, target: &Molecule, t: usize) -> bool {
        let qa = self.query.atom(self.internal[p]);
        let ta = target.atom(t);
        if ta.is_attachment {
            return false;
        }
        let deg = target.heavy_degree(t) as u32;
        qa.element == ta.element
            && qa.aromatic == ta.aromatic
            && qa.formal_charge == ta.formal_charge
            && (!self.query.atom_in_ring(self.internal[p]) || target.atom_in_ring(t))
            && deg >= self.req[p]
            && deg <= self.req[p] + self.slots[p]
    }

    /// Full consistency of `t` as the image of `p` against already-mapped
    /// atoms: query bonds must exist with equal order, and `t` may not touch
    /// images of non-adjacent internal atoms (induced embedding).
    fn edges_feasible(
        &self,
        p: usize,
        target: &Molecule,
        t: usize,
        map: &[usize],
        rmap: &[usize],
    ) -> bool {
        let mut need = 0usize;
        for &(q, o) in &self.nbrs[p] {
            if map[q] != usize::MAX {
                need += 1;
                match target.bond_between(t, map[q]) {
                    Some(bidx) if target.bond(bidx).order == o => {}
                    _ => return false,
                }
            }
        }
        // Any mapped target neighbor of t must be one of the `need` images.
        let mut mapped_nbrs = 0usize;
        for &(w, _) in target.neighbors(t) {
            if rmap[w] != usize::MAX {
                mapped_nbrs += 1;
            }
        }
        mapped_nbrs == need
    }

    #[allow(clippy::too_many_arguments)]
    fn backtrack(
        &self,
        target: &Molecule,
        order: &[usize],
        anchors: &[Option<(usize, BondOrder)>],
        depth: usize,
        map: &mut [usize],
        rmap: &mut [usize],
        limit: usize,
        found: &mut usize,
    ) {
        if depth == order.len() {
            *found += 1;
            return;
        }
        let p = order[depth];
        let try_candidate = |t: usize,
                             map: &mut [usize],
                             rmap: &mut [usize],
                             found: &mut usize| {
            if rmap[t] != usize::MAX
                || !self.atom_feasible(p, target, t)
                || !self.edges_feasible(p, target, t, map, rmap)
            {
                return;
            }
            map[p] = t;
            rmap[t] = p;
            self.backtrack(target, order, anchors, depth + 1, map, rmap, limit, found);
            map[p] = usize::MAX;
            rmap[t] = usize::MAX;
        };
        match anchors[p] {
            Some((ap, order_needed)) => {
                let image = map[ap];
                for &(t, bidx) in target.neighbors(image) {
                    if *found >= limit {
                        return;
                    }
                    if target.bond(bidx).order == order_needed {
                        try_candidate(t, map, rmap, found);
                    }
                }
            }
            None => {
                for t in 0..target.num_atoms() {
                    if *found >= limit {
                        return;
                    }
                    try_candidate(t, map, rmap, found);
                }
            }
        }
    }
}

/// True when at least one strict embedding of `query` into `target` exists.
pub fn match_substructure(query: &Molecule, target: &Molecule) -> Result<bool, MatchError> {
    Ok(CompiledQuery::new(query)?.matches(target))
}

/// Number of distinct strict embeddings (distinct internal-atom maps),
/// counted up to `limit`.
pub fn count_embeddings(
    query: &Molecule,
    target: &Molecule,
    limit: usize,
) -> Result<usize, MatchError> {
    Ok(CompiledQuery::new(query)?.count(target, limit))
}

/// Exact graph isomorphism over (element, aromatic, charge, attachment)
/// labels and bond orders. Attachment atoms participate as wildcard-labeled
/// atoms; their bond ids are bookkeeping and do not affect the result.
pub fn is_isomorphic(a: &Molecule, b: &Molecule) -> bool {
    if a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds() {
        return false;
    }
    let n = a.num_atoms();
    let compatible = |x: usize, y: usize| -> bool {
        let (aa, ba) = (a.atom(x), b.atom(y));
        aa.element == ba.element
            && aa.aromatic == ba.aromatic
            && aa.formal_charge == ba.formal_charge
            && aa.is_attachment == ba.is_attachment
            && a.degree(x) == b.degree(y)
            && a.atom_in_ring(x) == b.atom_in_ring(y)
    };
    // Assignment order: follow a's adjacency from atom 0 (a is connected).
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(w, _) in a.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut rmap = vec![usize::MAX; n];
    fn rec(
        a: &Molecule,
        b: &Molecule,
        order: &[usize],
        depth: usize,
        map: &mut [usize],
        rmap: &mut [usize],
        compatible: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let x = order[depth];
        'cand: for y in 0..b.num_atoms() {
            if rmap[y] != usize::MAX || !compatible(x, y) {
                continue;
            }
            let mut mapped_edges = 0usize;
            for &(w, bidx) in a.neighbors(x) {
                if map[w] != usize::MAX {
                    mapped_edges += 1;
                    match b.bond_between(y, map[w]) {
                        Some(bb) if b.bond(bb).order == a.bond(bidx).order => {}
                        _ => continue 'cand,
                    }
                }
            }
            let mut mapped_nbrs = 0usize;
            for &(w, _) in b.neighbors(y) {
                if rmap[w] != usize::MAX {
                    mapped_nbrs += 1;
                }
            }
            if mapped_nbrs != mapped_edges {
                continue;
            }
            map[x] = y;
            rmap[y] = x;
            if rec(a, b, order, depth + 1, map, rmap, compatible) {
                return true;
            }
            map[x] = usize::MAX;
            rmap[y] = usize::MAX;
        }
        false
    }
    rec(a, b, &order, 0, &mut map, &mut rmap, &compatible)
}
