use super::*;
use crate::matcher::is_isomorphic;

fn mol(s: &str) -> Molecule {
    parse_smiles(s).unwrap_or_else(|e| panic!("parse {s}: {e}"))
}

#[test]
fn parse_ethanol() {
    let m = mol("CCO");
    assert_eq!(m.num_atoms(), 3);
    assert_eq!(m.num_bonds(), 2);
    assert_eq!(m.ring_count(), 0);
    assert_eq!(
        (0..3).map(|i| m.atom(i).explicit_h).collect::<Vec<_>>(),
        vec![3, 2, 1]
    );
}

#[test]
fn parse_benzene() {
    let m = mol("c1ccccc1");
    assert_eq!((m.num_atoms(), m.num_bonds()), (6, 6));
    assert_eq!(m.ring_count(), 1);
    for i in 0..6 {
        assert!(m.atom(i).aromatic);
        assert!(m.atom_in_ring(i));
        assert_eq!(m.atom(i).explicit_h, 1);
    }
    for b in 0..6 {
        assert_eq!(m.bond(b).order, BondOrder::Aromatic);
        assert!(m.bond_in_ring(b));
    }
}

#[test]
fn parse_attachment_pattern() {
    let m = mol("*C(=O)N*");
    assert_eq!(m.attachment_count(), 2);
    assert_eq!(measures(&m), (3, 0));
    assert_eq!(m.atom(0).attachment_bond_id, Some(0));
    assert_eq!(m.atom(4).attachment_bond_id, Some(1));
    // Carbonyl O keeps no hydrogens; amide N gets one.
    assert_eq!(m.atom(2).explicit_h, 0);
    assert_eq!(m.atom(3).explicit_h, 1);
}

#[test]
fn heavy_degree_ignores_attachments() {
    let m = mol("*C(*)C");
    let c = 1;
    assert_eq!(m.degree(c), 3);
    assert_eq!(m.heavy_degree(c), 1);
}

#[test]
fn parse_charges_and_brackets() {
    let m = mol("[NH4+]");
    assert_eq!(m.atom(0).formal_charge, 1);
    assert_eq!(m.atom(0).explicit_h, 4);
    let m = mol("CC(=O)[O-]");
    assert_eq!(m.atom(3).formal_charge, -1);
    let m = mol("c1cc[nH]c1");
    assert_eq!(m.atom(3).explicit_h, 1);
    assert!(m.atom(3).aromatic);
    let m = mol("[Fe++]");
    assert_eq!(m.atom(0).formal_charge, 2);
    let m = mol("[O-2]");
    assert_eq!(m.atom(0).formal_charge, -2);
}

#[test]
fn stereo_and_isotopes_are_discarded() {
    let a = mol("F/C=C/F");
    let b = mol("FC=CF");
    assert_eq!(a, b);
    let c = mol("[13CH4]");
    assert_eq!(c.atom(0).element, crate::elements::Element::C);
    let d = mol("C[C@H](N)O");
    assert_eq!(d.num_atoms(), 4);
    assert_eq!(d.atom(1).explicit_h, 1);
}

#[test]
fn percent_ring_closures() {
    let m = mol("C%12CC%12");
    assert_eq!(m.ring_count(), 1);
    assert_eq!(m.num_atoms(), 3);
}

#[test]
fn multi_component_rejected() {
    assert!(matches!(parse_smiles("CC.O"), Err(MolError::MultiComponent)));
}

#[test]
fn valence_overflow_rejected() {
    assert!(matches!(
        parse_smiles("C(C)(C)(C)(C)C"),
        Err(MolError::Valence { .. })
    ));
}

#[test]
fn syntax_errors_rejected() {
    for bad in ["C1CC", "C(", "C)", "", "C=", "C==C", "CC(", "[C", "*1CC1", "C**"] {
        assert!(
            matches!(parse_smiles(bad), Err(MolError::Syntax { .. })),
            "expected syntax error for {bad:?}"
        );
    }
}

#[test]
fn attachment_degree_limited_to_one() {
    // '*' bonded twice is structurally invalid.
    assert!(parse_smiles("C*C").is_err());
}

#[test]
fn aromatic_bond_endpoints_checked() {
    assert!(parse_smiles("C:C").is_err());
    // Aromatic order next to an attachment stays legal so that cleaving a
    // bond inside an aromatic system round-trips.
    assert!(parse_smiles("*:c1ccccc1").is_ok());
}

#[test]
fn write_then_reparse_preserves_structure() {
    let cases = [
        "CCO",
        "c1ccccc1",
        "CC(=O)Nc1ccccc1",
        "*C(=O)N*",
        "C1CCC2CCCCC2C1",
        "c1ccc(cc1)-c1ccccc1",
        "FC(F)(F)C(=O)NC(CCl)C(=O)NCCP",
        "[NH4+]",
        "CC(=O)[O-]",
        "c1cc[nH]c1",
        "C%12CC%12",
        "*c1ccccc1",
        "O=S(=O)(c1ccccc1)N1CCCC1",
        "C(*)(*)C*",
        "CN1C=NC2=C1C(=O)N(C)C(=O)N2C",
    ];
    for s in &cases {
        let m = mol(s);
        let out = write_smiles(&m);
        let back = parse_smiles(&out).unwrap_or_else(|e| panic!("reparse {out}: {e}"));
        assert!(
            is_isomorphic(&m, &back),
            "round trip changed structure: {s} -> {out}"
        );
    }
}

#[test]
fn ring_count_matches_independent_cycle_count() {
    // Cyclomatic number equals bonds - atoms + 1 for connected graphs; check
    // against an independent spanning-tree back-edge count.
    for s in [
        "C1CCCCC1",
        "C1CC2CCC1CC2",
        "c1ccc2ccccc2c1",
        "CC(C)(C)C",
        "C1CC1C1CC1",
        "C12(CC1)CC2",
    ] {
        let m = mol(s);
        let mut seen = vec![false; m.num_atoms()];
        let mut used_bond = vec![false; m.num_bonds()];
        let mut back_edges = 0usize;
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, b) in m.neighbors(v) {
                if used_bond[b] {
                    continue;
                }
                used_bond[b] = true;
                if seen[w] {
                    back_edges += 1;
                } else {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        assert_eq!(m.ring_count(), back_edges, "cycle count for {s}");
    }
}

#[test]
fn ring_flags_on_fused_and_linked_systems() {
    let m = mol("c1ccc(cc1)-c1ccccc1"); // biphenyl
    let link = (0..m.num_bonds()).find(|&b| !m.bond_in_ring(b)).unwrap();
    let link = m.bond(link);
    assert!(m.atom_in_ring(link.a) && m.atom_in_ring(link.b));
    assert_eq!(m.ring_count(), 2);
    let spiro = mol("C1CCC2(CC1)CCCC2");
    assert!((0..spiro.num_bonds()).all(|b| spiro.bond_in_ring(b)));
}

#[test]
fn merge_rejoins_cleaved_amide() {
    let whole = mol("CC(=O)NC");
    let left = mol("CC(=O)*");
    let right = mol("*NC");
    let rejoined = merge(&left, &right, &[0]).unwrap();
    assert!(is_isomorphic(&whole, &rejoined));
}

#[test]
fn merge_two_shared_bonds_forms_ring() {
    let a = mol("*CC*");
    let b = mol("*CC*");
    let ring = merge(&a, &b, &[0, 1]).unwrap();
    assert_eq!((ring.num_atoms(), ring.num_bonds()), (4, 4));
    assert!(is_isomorphic(&ring, &mol("C1CCC1")));
}

#[test]
fn merge_requires_shared_bond_ids() {
    let a = mol("CC(=O)*");
    let b = mol("CC");
    assert!(matches!(merge(&a, &b, &[0]), Err(MolError::NoSharedBond(0))));
    assert!(matches!(
        merge(&a, &mol("*NC"), &[]),
        Err(MolError::NoSharedBond(_))
    ));
}

#[test]
fn merge_preserves_cleaved_bond_order() {
    let a = mol("C*"); // single-order attachment
    let b = mol("*C");
    let joined = merge(&a, &b, &[0]).unwrap();
    assert_eq!(joined.bonds()[0].order, BondOrder::Single);
}

#[test]
fn double_bond_ring_membership() {
    let m = mol("C1=CC=CC=C1"); // Kekulé benzene: plain C atoms, alternating orders
    assert!(!m.atom(0).aromatic);
    assert_eq!(m.ring_count(), 1);
    assert!((0..6).all(|b| m.bond_in_ring(b)));
}

#[test]
fn write_emits_aromatic_marker_next_to_attachment() {
    // An aromatic-order bond to an attachment must survive a round trip.
    let m = mol("*:c1ccccc1");
    let out = write_smiles(&m);
    let back = parse_smiles(&out).unwrap();
    assert!(is_isomorphic(&m, &back));
    assert_eq!(back.bonds()[0].order, BondOrder::Aromatic);
}
