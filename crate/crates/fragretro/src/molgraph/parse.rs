//! SMILES reader for the dialect this engine works in: organic subset plus
//! bracket atoms, formal charges, aromatic lowercase forms, ring-closure
//! digits and `%nn`, and `*` attachment atoms. Stereo markers (`/`, `\`, `@`)
//! are parsed and discarded. Aromaticity is taken from the input notation
//! only; no perception pass runs, so an unspecified bond between two aromatic
//! atoms reads as aromatic and a Kekule-form ring stays non-aromatic.

use super::{Atom, Bond, BondOrder, MolError, Molecule};
use crate::elements::Element;

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    from_bracket: Vec<bool>,
    bonds: Vec<Bond>,
    bond_count: Vec<u32>,
    /// Last atom emitted; ring digits and chain bonds attach to it.
    prev: Option<usize>,
    branch_stack: Vec<usize>,
    pending_order: Option<BondOrder>,
    pending_order_pos: usize,
    /// Open ring closures: number -> (atom, explicit order, byte position).
    ring_open: std::collections::HashMap<u16, (usize, Option<BondOrder>, usize)>,
    next_attachment_id: u32,
}

pub fn parse_smiles(text: &str) -> Result<Molecule, MolError> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        from_bracket: Vec::new(),
        bonds: Vec::new(),
        bond_count: Vec::new(),
        prev: None,
        branch_stack: Vec::new(),
        pending_order: None,
        pending_order_pos: 0,
        ring_open: std::collections::HashMap::new(),
        next_attachment_id: 0,
    };
    p.run()?;
    p.finish()
}

impl<'a> Parser<'a> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T, MolError> {
        Err(MolError::Syntax {
            pos,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), MolError> {
        if self.text.is_empty() {
            return self.err(0, "empty input");
        }
        if !self.text.is_ascii() {
            return self.err(0, "non-ASCII input");
        }
        while let Some(c) = self.peek() {
            let pos = self.pos;
            match c {
                b'.' => return Err(MolError::MultiComponent),
                b'-' | b'/' | b'\\' => {
                    self.set_pending(BondOrder::Single, pos)?;
                    self.pos += 1;
                }
                b'=' => {
                    self.set_pending(BondOrder::Double, pos)?;
                    self.pos += 1;
                }
                b'#' => {
                    self.set_pending(BondOrder::Triple, pos)?;
                    self.pos += 1;
                }
                b':' => {
                    self.set_pending(BondOrder::Aromatic, pos)?;
                    self.pos += 1;
                }
                b'(' => {
                    let Some(prev) = self.prev else {
                        return self.err(pos, "branch before any atom");
                    };
                    if self.pending_order.is_some() {
                        return self.err(pos, "bond symbol before '('");
                    }
                    self.branch_stack.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    let Some(saved) = self.branch_stack.pop() else {
                        return self.err(pos, "unmatched ')'");
                    };
                    if self.pending_order.is_some() {
                        return self.err(pos, "dangling bond before ')'");
                    }
                    self.prev = Some(saved);
                    self.pos += 1;
                }
                b'0'..=b'9' => {
                    self.pos += 1;
                    self.ring_closure((c - b'0') as u16, pos)?;
                }
                b'%' => {
                    self.pos += 1;
                    let d1 = self.peek().filter(u8::is_ascii_digit);
                    self.pos += 1;
                    let d2 = self.peek().filter(u8::is_ascii_digit);
                    let (Some(d1), Some(d2)) = (d1, d2) else {
                        return self.err(pos, "'%' needs two digits");
                    };
                    self.pos += 1;
                    self.ring_closure(((d1 - b'0') * 10 + (d2 - b'0')) as u16, pos)?;
                }
                b'[' => {
                    self.pos += 1;
                    self.bracket_atom(pos)?;
                }
                b'*' => {
                    self.pos += 1;
                    self.add_attachment_atom(pos)?;
                }
                _ => {
                    self.organic_atom(pos)?;
                }
            }
        }
        Ok(())
    }

    fn set_pending(&mut self, order: BondOrder, pos: usize) -> Result<(), MolError> {
        if self.pending_order.is_some() {
            return self.err(pos, "two bond symbols in a row");
        }
        if self.prev.is_none() {
            return self.err(pos, "bond symbol before any atom");
        }
        self.pending_order = Some(order);
        self.pending_order_pos = pos;
        Ok(())
    }

    /// Resolves an unspecified bond between the two atoms: aromatic when both
    /// endpoints are aromatic, single otherwise.
    fn default_order(&self, u: usize, v: usize) -> BondOrder {
        if self.atoms[u].aromatic && self.atoms[v].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn add_bond(
        &mut self,
        u: usize,
        v: usize,
        explicit: Option<BondOrder>,
        pos: usize,
    ) -> Result<(), MolError> {
        if u == v {
            return self.err(pos, "bond from an atom to itself");
        }
        if self
            .bonds
            .iter()
            .any(|b| (b.a == u && b.b == v) || (b.a == v && b.b == u))
        {
            return self.err(pos, "duplicate bond between the same atoms");
        }
        let order = explicit.unwrap_or_else(|| self.default_order(u, v));
        let arom_ok =
            |a: &Atom| a.aromatic || a.is_attachment; // '*' stands for an arbitrary partner
        if order == BondOrder::Aromatic && !(arom_ok(&self.atoms[u]) && arom_ok(&self.atoms[v])) {
            return self.err(pos, "aromatic bond between non-aromatic atoms");
        }
        for x in [u, v] {
            if self.atoms[x].is_attachment && self.bond_count[x] >= 1 {
                return self.err(pos, "attachment atom '*' cannot have multiple bonds");
            }
        }
        self.bond_count[u] += 1;
        self.bond_count[v] += 1;
        self.bonds.push(Bond { a: u, b: v, order });
        Ok(())
    }

    fn ring_closure(&mut self, num: u16, pos: usize) -> Result<(), MolError> {
        let Some(cur) = self.prev else {
            return self.err(pos, "ring closure before any atom");
        };
        let explicit = self.pending_order.take();
        match self.ring_open.remove(&num) {
            Some((other, other_explicit, opos)) => {
                let ord = match (explicit, other_explicit) {
                    (Some(a), Some(b)) if a != b => {
                        return self.err(pos, "ring closure bond symbols disagree")
                    }
                    (a, b) => a.or(b),
                };
                let _ = opos;
                self.add_bond(other, cur, ord, pos)?;
            }
            None => {
                self.ring_open.insert(num, (cur, explicit, pos));
            }
        }
        Ok(())
    }

    fn attach_chain(&mut self, new_atom: usize, pos: usize) -> Result<(), MolError> {
        let explicit = self.pending_order.take();
        if let Some(prev) = self.prev {
            self.add_bond(prev, new_atom, explicit, pos)?;
        } else if explicit.is_some() {
            return self.err(pos, "bond symbol before first atom");
        }
        self.prev = Some(new_atom);
        Ok(())
    }

    fn push_atom(&mut self, atom: Atom, bracket: bool, pos: usize) -> Result<(), MolError> {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        self.from_bracket.push(bracket);
        self.bond_count.push(0);
        self.attach_chain(idx, pos)
    }

    fn add_attachment_atom(&mut self, pos: usize) -> Result<(), MolError> {
        let id = self.next_attachment_id;
        self.next_attachment_id += 1;
        self.push_atom(Atom::attachment(id), false, pos)
    }

    fn organic_atom(&mut self, pos: usize) -> Result<(), MolError> {
        let rest = &self.text[self.pos..];
        // Two-letter subset symbols first.
        let (element, aromatic, len) = if rest.starts_with(b"Cl") {
            (Element::CL, false, 2)
        } else if rest.starts_with(b"Br") {
            (Element::BR, false, 2)
        } else {
            let c = rest[0];
            let elem = match c.to_ascii_uppercase() {
                b'B' => Element::B,
                b'C' => Element::C,
                b'N' => Element::N,
                b'O' => Element::O,
                b'P' => Element::P,
                b'S' => Element::S,
                b'F' => Element::F,
                b'I' => Element::I,
                _ => return self.err(pos, format!("unexpected character '{}'", c as char)),
            };
            let aromatic = c.is_ascii_lowercase();
            if aromatic && !matches!(c, b'b' | b'c' | b'n' | b'o' | b'p' | b's') {
                return self.err(pos, format!("'{}' is not an aromatic element", c as char));
            }
            (elem, aromatic, 1)
        };
        self.pos += len;
        let mut atom = Atom::heavy(element);
        atom.aromatic = aromatic;
        self.push_atom(atom, false, pos)
    }

    fn bracket_atom(&mut self, open_pos: usize) -> Result<(), MolError> {
        // [isotope? symbol chirality? Hcount? charge? class?]
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1; // isotope digits: parsed and ignored
        }
        let sym_pos = self.pos;
        let (element, aromatic, is_attachment) = match self.peek() {
            Some(b'*') => {
                self.pos += 1;
                (Element::WILDCARD, false, true)
            }
            Some(c) if c.is_ascii_uppercase() => {
                let mut sym = String::from(c as char);
                self.pos += 1;
                if self.peek().is_some_and(|c| c.is_ascii_lowercase()) {
                    let two = format!("{sym}{}", self.peek().unwrap() as char);
                    if Element::from_symbol(&two).is_some() {
                        sym = two;
                        self.pos += 1;
                    }
                }
                match Element::from_symbol(&sym) {
                    Some(e) => (e, false, false),
                    None => return self.err(sym_pos, format!("unknown element '{sym}'")),
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                let mut sym = String::from(c as char);
                self.pos += 1;
                // two-letter aromatic forms: se, as
                if self.peek().is_some_and(|c| c.is_ascii_lowercase()) {
                    let two = format!("{sym}{}", self.peek().unwrap() as char);
                    let cap = format!(
                        "{}{}",
                        two.chars().next().unwrap().to_ascii_uppercase(),
                        &two[1..]
                    );
                    if matches!(two.as_str(), "se" | "as") && Element::from_symbol(&cap).is_some()
                    {
                        sym = cap;
                        self.pos += 1;
                    }
                }
                let lookup = if sym.len() == 1 {
                    sym.to_ascii_uppercase()
                } else {
                    sym.clone()
                };
                let Some(e) = Element::from_symbol(&lookup) else {
                    return self.err(sym_pos, format!("unknown element '{sym}'"));
                };
                if !e.aromatic_capable() {
                    return self.err(sym_pos, format!("'{sym}' is not an aromatic element"));
                }
                (e, true, false)
            }
            _ => return self.err(self.pos, "expected element symbol in brackets"),
        };
        // chirality: parsed and discarded
        while self.peek() == Some(b'@') {
            self.pos += 1;
        }
        let mut explicit_h: u8 = 0;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            explicit_h = 1;
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                explicit_h = self.peek().unwrap() - b'0';
                self.pos += 1;
            }
        }
        let mut charge: i8 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let unit: i8 = if sign == b'+' { 1 } else { -1 };
            charge = unit;
            if self.peek() == Some(sign) {
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            } else if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                charge = unit * (self.peek().unwrap() - b'0') as i8;
                self.pos += 1;
            }
        }
        if self.peek() == Some(b':') {
            self.pos += 1; // atom class: parsed and ignored
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if self.peek() != Some(b']') {
            return self.err(self.pos, "expected ']'");
        }
        self.pos += 1;
        if is_attachment {
            let id = self.next_attachment_id;
            self.next_attachment_id += 1;
            return self.push_atom(Atom::attachment(id), true, open_pos);
        }
        let atom = Atom {
            element,
            aromatic,
            formal_charge: charge,
            explicit_h,
            is_attachment: false,
            attachment_bond_id: None,
        };
        self.push_atom(atom, true, open_pos)
    }

    fn finish(mut self) -> Result<Molecule, MolError> {
        if self.atoms.is_empty() {
            return self.err(self.pos, "no atoms");
        }
        if let Some(&open) = self.ring_open.keys().next() {
            let (_, _, pos) = self.ring_open[&open];
            return self.err(pos, format!("unclosed ring closure {open}"));
        }
        if !self.branch_stack.is_empty() {
            return self.err(self.pos, "unclosed '('");
        }
        if self.pending_order.is_some() {
            return self.err(self.pending_order_pos, "dangling bond at end of input");
        }
        complete_hydrogens(&mut self.atoms, &self.bonds, &self.from_bracket)?;
        Ok(Molecule::new(self.atoms, self.bonds))
    }
}

/// Fills in `explicit_h` for atoms that came without brackets, using default
/// valences. Bracket atoms keep their stated count verbatim and are exempt
/// from valence errors (they are the dialect's escape hatch). Aromatic bare
/// atoms reserve one unit of valence for the ring system.
pub(crate) fn complete_hydrogens(
    atoms: &mut [Atom],
    bonds: &[Bond],
    from_bracket: &[bool],
) -> Result<(), MolError> {
    let mut sigma = vec![0u32; atoms.len()];
    for b in bonds {
        let w = match b.order {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        };
        sigma[b.a] += w;
        sigma[b.b] += w;
    }
    for (i, atom) in atoms.iter_mut().enumerate() {
        if from_bracket[i] || atom.is_attachment {
            continue;
        }
        let valences = atom.element.default_valences();
        debug_assert!(!valences.is_empty(), "bare atom of bracket-only element");
        let max = *valences.last().unwrap() as u32;
        if sigma[i] > max {
            return Err(MolError::Valence {
                atom: i,
                msg: format!(
                    "bond order sum {} exceeds max valence {} for {}",
                    sigma[i],
                    max,
                    atom.element.symbol()
                ),
            });
        }
        let fitted = *valences
            .iter()
            .find(|&&v| v as u32 >= sigma[i])
            .unwrap() as u32;
        let h = if atom.aromatic {
            fitted.saturating_sub(sigma[i] + 1)
        } else {
            fitted - sigma[i]
        };
        atom.explicit_h = h as u8;
    }
    Ok(())
}
