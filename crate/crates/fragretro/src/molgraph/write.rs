//! SMILES writer. Output reparses (via `parse_smiles`) to a graph isomorphic
//! to the input; attachment atoms are emitted as `*` (their bond ids are
//! transport metadata, carried separately where pairing matters).

use super::{BondOrder, Molecule};

pub fn write_smiles(m: &Molecule) -> String {
    let n = m.num_atoms();
    // DFS spanning tree from atom 0, children in adjacency order.
    let mut parent_bond = vec![usize::MAX; n];
    let mut order_visited = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut tree_bond = vec![false; m.num_bonds()];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        order_visited.push(v);
        // Push children in reverse so they are visited in adjacency order.
        let mut children = Vec::new();
        for &(w, bidx) in m.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                parent_bond[w] = bidx;
                tree_bond[bidx] = true;
                children.push(w);
            }
        }
        for &w in children.iter().rev() {
            stack.push(w);
        }
    }
    debug_assert_eq!(order_visited.len(), n);

    // Ring-closure digits for non-tree bonds, allocated in emission order.
    let preorder_pos = {
        let mut p = vec![0usize; n];
        for (i, &v) in order_visited.iter().enumerate() {
            p[v] = i;
        }
        p
    };
    let mut openings: Vec<Vec<(u16, usize)>> = vec![Vec::new(); n]; // (digit, bond)
    let mut closings: Vec<Vec<u16>> = vec![Vec::new(); n];
    {
        let mut back_bonds: Vec<usize> = (0..m.num_bonds()).filter(|&b| !tree_bond[b]).collect();
        // Open each closure at the earlier-emitted endpoint.
        back_bonds.sort_by_key(|&b| {
            let bond = m.bond(b);
            preorder_pos[bond.a].min(preorder_pos[bond.b])
        });
        let mut free: Vec<u16> = (1..100).rev().collect();
        let mut close_at: Vec<Vec<(u16, usize)>> = vec![Vec::new(); n]; // digit frees after this atom
        let mut pending: Vec<(usize, usize, usize)> = back_bonds
            .iter()
            .map(|&b| {
                let bond = m.bond(b);
                let (first, second) = if preorder_pos[bond.a] < preorder_pos[bond.b] {
                    (bond.a, bond.b)
                } else {
                    (bond.b, bond.a)
                };
                (first, second, b)
            })
            .collect();
        pending.sort_by_key(|&(first, _, _)| preorder_pos[first]);
        let mut pi = 0;
        for &v in &order_visited {
            for &(digit, _) in &close_at[v] {
                free.push(digit);
            }
            while pi < pending.len() && pending[pi].0 == v {
                let (_, second, bidx) = pending[pi];
                let digit = free.pop().expect("more than 99 concurrently open rings");
                openings[v].push((digit, bidx));
                closings[second].push(digit);
                close_at[second].push((digit, bidx));
                pi += 1;
            }
        }
    }

    let mut out = String::new();
    emit(m, 0, usize::MAX, &parent_bond, &openings, &closings, &mut out);
    out
}

fn bond_symbol(m: &Molecule, bidx: usize) -> &'static str {
    let bond = m.bond(bidx);
    let both_aromatic = m.atom(bond.a).aromatic && m.atom(bond.b).aromatic;
    match bond.order {
        BondOrder::Single => {
            if both_aromatic {
                "-" // bare would reparse as aromatic
            } else {
                ""
            }
        }
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => {
            if both_aromatic {
                "" // the default between aromatic atoms
            } else {
                ":" // aromatic bond to an attachment atom
            }
        }
    }
}

fn emit(
    m: &Molecule,
    v: usize,
    via_bond: usize,
    parent_bond: &[usize],
    openings: &[Vec<(u16, usize)>],
    closings: &[Vec<u16>],
    out: &mut String,
) {
    if via_bond != usize::MAX {
        out.push_str(bond_symbol(m, via_bond));
    }
    out.push_str(&atom_token(m, v));
    for &digit in &closings[v] {
        push_digit(out, digit);
    }
    for &(digit, bidx) in &openings[v] {
        out.push_str(bond_symbol(m, bidx));
        push_digit(out, digit);
    }
    let children: Vec<(usize, usize)> = m
        .neighbors(v)
        .iter()
        .filter(|&&(w, bidx)| parent_bond[w] == bidx && bidx != via_bond)
        .copied()
        .collect();
    for (i, &(w, bidx)) in children.iter().enumerate() {
        if i + 1 < children.len() {
            out.push('(');
            emit(m, w, bidx, parent_bond, openings, closings, out);
            out.push(')');
        } else {
            emit(m, w, bidx, parent_bond, openings, closings, out);
        }
    }
}

fn push_digit(out: &mut String, digit: u16) {
    if digit < 10 {
        out.push((b'0' + digit as u8) as char);
    } else {
        out.push('%');
        out.push_str(&format!("{digit:02}"));
    }
}

/// What the parser's implicit-H completion would infer for this atom given
/// its bonds; bare emission is only legal when it matches `explicit_h`.
fn inferred_h(m: &Molecule, v: usize) -> Option<u8> {
    let atom = m.atom(v);
    let mut sigma = 0u32;
    for &(_, bidx) in m.neighbors(v) {
        sigma += match m.bond(bidx).order {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        };
    }
    let valences = atom.element.default_valences();
    let max = *valences.last()? as u32;
    if sigma > max {
        return None;
    }
    let fitted = *valences.iter().find(|&&x| x as u32 >= sigma).unwrap() as u32;
    let h = if atom.aromatic {
        fitted.saturating_sub(sigma + 1)
    } else {
        fitted - sigma
    };
    Some(h as u8)
}

fn atom_token(m: &Molecule, v: usize) -> String {
    let atom = m.atom(v);
    if atom.is_attachment {
        return "*".to_string();
    }
    let lower_writable = matches!(atom.element.symbol(), "B" | "C" | "N" | "O" | "P" | "S");
    let bare_ok = atom.formal_charge == 0
        && atom.element.in_organic_subset()
        && (!atom.aromatic || lower_writable)
        && inferred_h(m, v) == Some(atom.explicit_h);
    let sym = if atom.aromatic {
        atom.element.symbol().to_ascii_lowercase()
    } else {
        atom.element.symbol().to_string()
    };
    if bare_ok {
        return sym;
    }
    let mut t = String::from("[");
    t.push_str(&sym);
    match atom.explicit_h {
        0 => {}
        1 => t.push('H'),
        h => t.push_str(&format!("H{h}")),
    }
    match atom.formal_charge {
        0 => {}
        1 => t.push('+'),
        -1 => t.push('-'),
        c if c > 0 => t.push_str(&format!("+{c}")),
        c => t.push_str(&format!("{c}")),
    }
    t.push(']');
    t
}
