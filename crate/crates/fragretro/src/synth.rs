//! Seeded generators for synthetic molecules, targets, and stocks.
//!
//! Test and benchmark support: everything here is deterministic in the
//! seed, so corpora can be regenerated identically across runs and worker
//! counts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::elements::Element;
use crate::molgraph::{complete_hydrogens, Atom, Bond, BondOrder, Molecule};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// (element, bonding capacity, sampling weight); capacities stay at or
/// below the smallest default valence so hydrogen completion never fails.
const POOL: &[(Element, u32, u32)] = &[
    (Element::C, 4, 12),
    (Element::N, 3, 3),
    (Element::O, 2, 3),
    (Element::S, 2, 1),
    (Element::F, 1, 1),
    (Element::CL, 1, 1),
    (Element::BR, 1, 1),
];

fn pick_element(rng: &mut impl Rng) -> (Element, u32) {
    let total: u32 = POOL.iter().map(|p| p.2).sum();
    let mut roll = rng.random_range(0..total);
    for &(e, cap, w) in POOL {
        if roll < w {
            return (e, cap);
        }
        roll -= w;
    }
    unreachable!()
}

/// Random connected molecule with at most `max_heavy` heavy atoms: tree
/// growth with occasional double/triple bonds, aromatic six-ring
/// insertions, and ring-closing bonds.
pub fn random_molecule(rng: &mut impl Rng, max_heavy: usize) -> Molecule {
    let goal = rng.random_range(1..=max_heavy.max(1));
    let mut atoms: Vec<Atom> = Vec::new();
    let mut bonds: Vec<Bond> = Vec::new();
    let mut free: Vec<u32> = Vec::new();

    let insert_aromatic_ring = |rng: &mut dyn rand::RngCore,
                                    atoms: &mut Vec<Atom>,
                                    bonds: &mut Vec<Bond>,
                                    free: &mut Vec<u32>,
                                    host: Option<usize>| {
        let base = atoms.len();
        let with_n = rng.random_range(0..4u32) == 0;
        for i in 0..6 {
            let mut a = if with_n && i == 3 {
                Atom::heavy(Element::N)
            } else {
                Atom::heavy(Element::C)
            };
            a.aromatic = true;
            atoms.push(a);
            // One substituent slot on carbons; aromatic N takes none.
            free.push(if with_n && i == 3 { 0 } else { 1 });
        }
        for i in 0..6 {
            bonds.push(Bond {
                a: base + i,
                b: base + (i + 1) % 6,
                order: BondOrder::Aromatic,
            });
        }
        if let Some(h) = host {
            bonds.push(Bond {
                a: h,
                b: base,
                order: BondOrder::Single,
            });
            free[h] -= 1;
            free[base] -= 1;
        }
    };

    if goal >= 6 && rng.random_range(0..4u32) == 0 {
        insert_aromatic_ring(rng, &mut atoms, &mut bonds, &mut free, None);
    } else {
        let (e, cap) = pick_element(rng);
        atoms.push(Atom::heavy(e));
        free.push(cap);
    }

    while atoms.len() < goal {
        let hosts: Vec<usize> = (0..atoms.len()).filter(|&i| free[i] > 0).collect();
        if hosts.is_empty() {
            break;
        }
        let host = hosts[rng.random_range(0..hosts.len())];
        if atoms.len() + 6 <= goal && rng.random_range(0..8u32) == 0 {
            insert_aromatic_ring(rng, &mut atoms, &mut bonds, &mut free, Some(host));
            continue;
        }
        let (e, cap) = pick_element(rng);
        let idx = atoms.len();
        atoms.push(Atom::heavy(e));
        free.push(cap);
        let order = if free[host] >= 2 && cap >= 2 && rng.random_range(0..6u32) == 0 {
            if free[host] >= 3 && cap >= 3 && rng.random_range(0..4u32) == 0 {
                BondOrder::Triple
            } else {
                BondOrder::Double
            }
        } else {
            BondOrder::Single
        };
        let units = match order {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => unreachable!(),
        };
        bonds.push(Bond { a: host, b: idx, order });
        free[host] -= units;
        free[idx] -= units;
    }

    // A few ring-closing single bonds between non-adjacent atoms with
    // spare capacity (aliphatic only; aromatic slots stay substituents).
    let closures = rng.random_range(0..=atoms.len() / 10);
    for _ in 0..closures {
        let open: Vec<usize> = (0..atoms.len())
            .filter(|&i| free[i] > 0 && !atoms[i].aromatic)
            .collect();
        if open.len() < 2 {
            break;
        }
        let u = open[rng.random_range(0..open.len())];
        let v = open[rng.random_range(0..open.len())];
        if u == v
            || bonds
                .iter()
                .any(|b| (b.a == u && b.b == v) || (b.a == v && b.b == u))
        {
            continue;
        }
        bonds.push(Bond { a: u, b: v, order: BondOrder::Single });
        free[u] -= 1;
        free[v] -= 1;
    }

    let from_bracket = vec![false; atoms.len()];
    complete_hydrogens(&mut atoms, &bonds, &from_bracket)
        .expect("generator respects bonding capacities");
    Molecule::new(atoms, bonds)
}

/// Carves a random connected induced subgraph of `target` (up to
/// `max_internal` atoms) and caps every boundary bond with an attachment
/// atom. By construction the result strictly matches `target`.
pub fn random_fragment_query(
    rng: &mut impl Rng,
    target: &Molecule,
    max_internal: usize,
) -> Option<Molecule> {
    let n = target.num_atoms();
    if n == 0 || max_internal == 0 || target.has_attachments() {
        return None;
    }
    let goal = rng.random_range(1..=max_internal.min(n));
    let start = rng.random_range(0..n);
    let mut chosen = vec![false; n];
    chosen[start] = true;
    let mut members = vec![start];
    let mut frontier: Vec<usize> = target
        .neighbors(start)
        .iter()
        .map(|&(w, _)| w)
        .collect();
    while members.len() < goal && !frontier.is_empty() {
        let pick = rng.random_range(0..frontier.len());
        let v = frontier.swap_remove(pick);
        if chosen[v] {
            continue;
        }
        chosen[v] = true;
        members.push(v);
        frontier.extend(
            target
                .neighbors(v)
                .iter()
                .filter(|&&(w, _)| !chosen[w])
                .map(|&(w, _)| w),
        );
    }
    members.sort_unstable();

    let mut index_of = vec![usize::MAX; n];
    let mut atoms: Vec<Atom> = Vec::new();
    for (qi, &v) in members.iter().enumerate() {
        index_of[v] = qi;
        atoms.push(target.atom(v).clone());
    }
    let mut bonds: Vec<Bond> = Vec::new();
    let mut next_attachment = 0u32;
    for b in target.bonds() {
        let (ia, ib) = (index_of[b.a], index_of[b.b]);
        match (ia != usize::MAX, ib != usize::MAX) {
            (true, true) => bonds.push(Bond { a: ia, b: ib, order: b.order }),
            (true, false) | (false, true) => {
                let anchor = if ia != usize::MAX { ia } else { ib };
                let att = atoms.len();
                atoms.push(Atom::attachment(next_attachment));
                next_attachment += 1;
                bonds.push(Bond { a: anchor, b: att, order: b.order });
            }
            (false, false) => {}
        }
    }
    Some(Molecule::new(atoms, bonds))
}

/// Same molecule under a random relabeling of atom indices.
pub fn permute_atoms(rng: &mut impl Rng, m: &Molecule) -> Molecule {
    let n = m.num_atoms();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut atoms = vec![Atom::heavy(Element::C); n];
    for (old, &new) in perm.iter().enumerate() {
        atoms[new] = m.atom(old).clone();
    }
    let mut bonds: Vec<Bond> = m
        .bonds()
        .iter()
        .map(|b| Bond { a: perm[b.a], b: perm[b.b], order: b.order })
        .collect();
    for i in (1..bonds.len()).rev() {
        let j = rng.random_range(0..=i);
        bonds.swap(i, j);
    }
    Molecule::new(atoms, bonds)
}

/// Linear amide oligomer with `m` interior units: fragments into a path
/// of `m + 2` pieces under the default cleavage rules.
pub fn oligomer_smiles(m: usize) -> String {
    let mut s = String::from("CC(=O)");
    for _ in 0..m {
        s.push_str("NCCC(=O)");
    }
    s.push_str("NCC");
    s
}

/// Amide-linked chain with randomized side chains; `units` interior
/// residues give roughly `6 + 6 * units` heavy atoms and `units + 2`
/// fragments.
pub fn stitched_target_smiles(rng: &mut impl Rng, units: usize) -> String {
    const SIDES: &[&str] = &["C", "CC", "CCC", "C(C)C", "CCl", "CBr", "CF", "CS"];
    let mut s = String::from("CC(=O)");
    for _ in 0..units {
        s.push_str("NC(");
        s.push_str(SIDES[rng.random_range(0..SIDES.len())]);
        s.push_str(")C(=O)");
    }
    s.push_str("NCC");
    s
}

/// Replaces every attachment atom with a methyl carbon, turning a
/// fragment pattern into a complete molecule that matches it.
pub fn materialize(pattern: &Molecule) -> Molecule {
    let mut atoms: Vec<Atom> = Vec::with_capacity(pattern.num_atoms());
    for a in pattern.atoms() {
        if a.is_attachment {
            let mut c = Atom::heavy(Element::C);
            c.explicit_h = 3;
            atoms.push(c);
        } else {
            atoms.push(a.clone());
        }
    }
    debug_assert!(
        pattern.bonds().iter().all(|b| {
            let capping =
                pattern.atom(b.a).is_attachment || pattern.atom(b.b).is_attachment;
            !capping || b.order == BondOrder::Single
        }),
        "methyl caps only stand in across single bonds"
    );
    Molecule::new(atoms, pattern.bonds().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{parse_smiles, write_smiles};

    #[test]
    fn random_molecules_round_trip_through_smiles() {
        let mut r = rng(42);
        for _ in 0..300 {
            let m = random_molecule(&mut r, 24);
            assert!(m.heavy_atom_count() >= 1 && m.heavy_atom_count() <= 24);
            let s = write_smiles(&m);
            let back = parse_smiles(&s).unwrap_or_else(|e| panic!("reparse {s}: {e}"));
            assert!(
                crate::matcher::is_isomorphic(&m, &back),
                "round trip changed {s}"
            );
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a: Vec<String> = {
            let mut r = rng(7);
            (0..20).map(|_| write_smiles(&random_molecule(&mut r, 16))).collect()
        };
        let b: Vec<String> = {
            let mut r = rng(7);
            (0..20).map(|_| write_smiles(&random_molecule(&mut r, 16))).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn carved_queries_match_their_source() {
        let mut r = rng(99);
        for _ in 0..200 {
            let t = random_molecule(&mut r, 20);
            let q = random_fragment_query(&mut r, &t, 10).unwrap();
            assert_eq!(
                crate::matcher::match_substructure(&q, &t),
                Ok(true),
                "query {} must match target {}",
                write_smiles(&q),
                write_smiles(&t)
            );
        }
    }

    #[test]
    fn permutation_preserves_structure() {
        let mut r = rng(5);
        for smiles in ["CC(=O)Nc1ccccc1", "C1CC2(CCC1)CCCC2", "CCOC(=O)CBr"] {
            let m = parse_smiles(smiles).unwrap();
            for _ in 0..10 {
                let p = permute_atoms(&mut r, &m);
                assert!(crate::matcher::is_isomorphic(&m, &p));
            }
        }
    }

    #[test]
    fn oligomer_family_parses_to_paths() {
        for m in [0, 2, 5] {
            let s = oligomer_smiles(m);
            let mol = parse_smiles(&s).unwrap();
            assert_eq!(mol.ring_count(), 0);
        }
    }

    #[test]
    fn materialized_pattern_matches_itself() {
        let p = parse_smiles("*NCCC(=O)*").unwrap();
        let bb = materialize(&p);
        assert!(!bb.has_attachments());
        assert_eq!(crate::matcher::match_substructure(&p, &bb), Ok(true));
        assert_eq!(bb.heavy_atom_count(), p.heavy_atom_count() + 2);
    }
}
