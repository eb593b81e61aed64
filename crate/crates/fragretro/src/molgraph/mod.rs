//! Molecular graphs: atoms, bonds, SMILES round-tripping, measures, merging.
//!
//! A `Molecule` is a connected undirected graph. Hydrogens are implicit
//! (`Atom::explicit_h` counts them); every explicit atom is a heavy atom
//! except `*` attachment atoms, which mark cleavage sites on fragments and
//! carry the id of the bond that was cut.

mod parse;
mod write;

pub use parse::parse_smiles;
pub(crate) use parse::complete_hydrogens;
pub use write::write_smiles;

use crate::elements::Element;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MolError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("multi-component input (found '.'), single connected molecules only")]
    MultiComponent,
    #[error("valence error on atom {atom}: {msg}")]
    Valence { atom: usize, msg: String },
    #[error("no shared attachment bond id {0} on both molecules")]
    NoSharedBond(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i8,
    /// Implicit hydrogen count (explicit in bracket forms, inferred otherwise).
    pub explicit_h: u8,
    /// True for `*` atoms standing in for a cleaved bond partner.
    pub is_attachment: bool,
    /// Cleaved-bond id; paired across the two fragments sharing the cut.
    pub attachment_bond_id: Option<u32>,
}

impl Atom {
    pub fn heavy(element: Element) -> Atom {
        Atom {
            element,
            aromatic: false,
            formal_charge: 0,
            explicit_h: 0,
            is_attachment: false,
            attachment_bond_id: None,
        }
    }

    pub fn attachment(id: u32) -> Atom {
        Atom {
            element: Element::WILDCARD,
            aromatic: false,
            formal_charge: 0,
            explicit_h: 0,
            is_attachment: true,
            attachment_bond_id: Some(id),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if atom == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Connected molecular graph with derived adjacency and ring flags.
#[derive(Clone, Debug)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// Per atom: (neighbor atom, bond index) pairs in bond-insertion order.
    adjacency: Vec<Vec<(usize, usize)>>,
    ring_bond: Vec<bool>,
    ring_atom: Vec<bool>,
    heavy_degree: Vec<u32>,
}

impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.bonds == other.bonds
    }
}
impl Eq for Molecule {}

impl Molecule {
    /// Builds a molecule and its derived tables.
    ///
    /// Panics on structural violations (out-of-range indices, self-loops,
    /// parallel bonds, attachment atoms with more than one bond, disconnected
    /// graphs, empty graphs): those are construction bugs, not input errors.
    /// Input errors are rejected by `parse_smiles` with positions.
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Molecule {
        assert!(!atoms.is_empty(), "empty molecule");
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen_pairs = std::collections::HashSet::new();
        for (i, b) in bonds.iter().enumerate() {
            assert!(b.a < n && b.b < n, "bond atom index out of range");
            assert!(b.a != b.b, "self-loop bond");
            let key = (b.a.min(b.b), b.a.max(b.b));
            assert!(seen_pairs.insert(key), "parallel bond between same atoms");
            adjacency[b.a].push((b.b, i));
            adjacency[b.b].push((b.a, i));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.is_attachment {
                assert!(
                    adjacency[i].len() <= 1,
                    "attachment atom {i} must have at most one bond"
                );
            }
        }
        let heavy_degree = (0..n)
            .map(|i| {
                adjacency[i]
                    .iter()
                    .filter(|(nbr, _)| !atoms[*nbr].is_attachment)
                    .count() as u32
            })
            .collect();
        let mut m = Molecule {
            atoms,
            bonds,
            adjacency,
            ring_bond: Vec::new(),
            ring_atom: Vec::new(),
            heavy_degree,
        };
        assert!(m.is_connected(), "molecule must be connected");
        m.compute_ring_flags();
        m
    }

    fn is_connected(&self) -> bool {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Marks ring bonds (non-bridges) and ring atoms (endpoints of ring bonds)
    /// with an iterative bridge-finding DFS.
    fn compute_ring_flags(&mut self) {
        let n = self.atoms.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![usize::MAX; n];
        let mut is_bridge = vec![false; self.bonds.len()];
        let mut timer = 0usize;
        // stack frames: (atom, parent bond, next adjacency position)
        let mut stack: Vec<(usize, usize, usize)> = Vec::new();
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            stack.push((root, usize::MAX, 0));
            while !stack.is_empty() {
                let frame = stack.len() - 1;
                let (v, pbond, pos) = stack[frame];
                if pos < self.adjacency[v].len() {
                    stack[frame].2 += 1;
                    let (w, bidx) = self.adjacency[v][pos];
                    if bidx == pbond {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, bidx, 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(parent, _, _)) = stack.last() {
                        low[parent] = low[parent].min(low[v]);
                        if low[v] > disc[parent] {
                            is_bridge[pbond] = true;
                        }
                    }
                }
            }
        }
        self.ring_bond = is_bridge.iter().map(|b| !b).collect();
        self.ring_atom = vec![false; n];
        for (i, bond) in self.bonds.iter().enumerate() {
            if self.ring_bond[i] {
                self.ring_atom[bond.a] = true;
                self.ring_atom[bond.b] = true;
            }
        }
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn num_bonds(&self) -> usize {
        self.bonds.len()
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// (neighbor atom, bond index) pairs of `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn bond_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adjacency[u]
            .iter()
            .find(|(nbr, _)| *nbr == v)
            .map(|&(_, bidx)| bidx)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Number of non-attachment neighbors.
    pub fn heavy_degree(&self, i: usize) -> usize {
        self.heavy_degree[i] as usize
    }

    pub fn atom_in_ring(&self, i: usize) -> bool {
        self.ring_atom[i]
    }

    pub fn bond_in_ring(&self, bond_idx: usize) -> bool {
        self.ring_bond[bond_idx]
    }

    /// Non-attachment atom count.
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| !a.is_attachment).count()
    }

    pub fn attachment_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.is_attachment).count()
    }

    pub fn has_attachments(&self) -> bool {
        self.atoms.iter().any(|a| a.is_attachment)
    }

    /// Cyclomatic ring count: bonds - atoms + components (= 1, connected).
    pub fn ring_count(&self) -> usize {
        self.bonds.len() + 1 - self.atoms.len()
    }
}

/// (heavy atom count, cyclomatic ring count). Attachment atoms count for
/// neither: they are degree-1 pendants, so the cyclomatic number is unchanged
/// whether or not they are present.
pub fn measures(m: &Molecule) -> (usize, usize) {
    (m.heavy_atom_count(), m.ring_count())
}

/// Joins two fragments over the given cleaved-bond ids.
///
/// Each id must name exactly one attachment atom in `a` and one in `b`
/// (`NoSharedBond` otherwise). Those attachment atoms are deleted and their
/// anchor atoms joined by a bond of the recorded original order; every other
/// attachment atom is preserved unchanged. Should the two sides ever record
/// different orders for one id, `a`'s order is used; decompositions produced
/// by `fragment` always agree.
pub fn merge(a: &Molecule, b: &Molecule, shared_bond_ids: &[u32]) -> Result<Molecule, MolError> {
    if shared_bond_ids.is_empty() {
        return Err(MolError::NoSharedBond(u32::MAX));
    }
    // (attachment atom index, anchor atom index, order) per id, per side.
    let locate = |m: &Molecule, id: u32| -> Option<(usize, usize, BondOrder)> {
        let att = m
            .atoms
            .iter()
            .position(|at| at.is_attachment && at.attachment_bond_id == Some(id))?;
        let &(anchor, bidx) = m.adjacency[att].first()?;
        Some((att, anchor, m.bonds[bidx].order))
    };
    let mut joins = Vec::with_capacity(shared_bond_ids.len());
    let mut drop_a = vec![false; a.num_atoms()];
    let mut drop_b = vec![false; b.num_atoms()];
    for &id in shared_bond_ids {
        let (att_a, anchor_a, order) = locate(a, id).ok_or(MolError::NoSharedBond(id))?;
        let (att_b, anchor_b, _) = locate(b, id).ok_or(MolError::NoSharedBond(id))?;
        drop_a[att_a] = true;
        drop_b[att_b] = true;
        joins.push((anchor_a, anchor_b, order));
    }

    let mut atoms = Vec::with_capacity(a.num_atoms() + b.num_atoms());
    let mut map_a = vec![usize::MAX; a.num_atoms()];
    for (i, at) in a.atoms.iter().enumerate() {
        if !drop_a[i] {
            map_a[i] = atoms.len();
            atoms.push(at.clone());
        }
    }
    let mut map_b = vec![usize::MAX; b.num_atoms()];
    for (i, at) in b.atoms.iter().enumerate() {
        if !drop_b[i] {
            map_b[i] = atoms.len();
            atoms.push(at.clone());
        }
    }
    let mut bonds = Vec::with_capacity(a.num_bonds() + b.num_bonds());
    for bond in &a.bonds {
        if !drop_a[bond.a] && !drop_a[bond.b] {
            bonds.push(Bond {
                a: map_a[bond.a],
                b: map_a[bond.b],
                order: bond.order,
            });
        }
    }
    for bond in &b.bonds {
        if !drop_b[bond.a] && !drop_b[bond.b] {
            bonds.push(Bond {
                a: map_b[bond.a],
                b: map_b[bond.b],
                order: bond.order,
            });
        }
    }
    for (anchor_a, anchor_b, order) in joins {
        bonds.push(Bond {
            a: map_a[anchor_a],
            b: map_b[anchor_b],
            order,
        });
    }
    Ok(Molecule::new(atoms, bonds))
}

#[cfg(test)]
mod tests;
