//! Cleavage rule tables: a small environment-pattern language over the two
//! atoms of a candidate bond. See rules/brics_like.rules for the grammar.

use crate::elements::Element;
use crate::molgraph::{BondOrder, Molecule};
use super::FragmentError;

/// Requirement on one neighbor of the environment atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSpec {
    pub element: Element,
    /// Order of the bond from the environment atom to this neighbor.
    pub order: Option<BondOrder>,
    /// Neighbor must itself carry a double-bonded oxygen ("(=O)").
    pub carbonyl: bool,
}

impl NeighborSpec {
    fn matches(&self, m: &Molecule, nbr: usize, bond: usize) -> bool {
        if m.atom(nbr).element != self.element {
            return false;
        }
        if let Some(o) = self.order {
            if m.bond(bond).order != o {
                return false;
            }
        }
        if self.carbonyl {
            let has_dbl_o = m.neighbors(nbr).iter().any(|&(w, b)| {
                m.atom(w).element == Element::O && m.bond(b).order == BondOrder::Double
            });
            if !has_dbl_o {
                return false;
            }
        }
        true
    }
}

/// Constraints on one end of a cleavable bond.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnvPattern {
    pub elements: Option<Vec<Element>>,
    pub aromatic: Option<bool>,
    pub in_ring: Option<bool>,
    /// Inclusive heavy-degree window; the bond partner counts toward it.
    pub degree: Option<(u32, u32)>,
    /// Not aromatic and all incident bonds single.
    pub sp3: bool,
    /// Each spec must bind a distinct neighbor other than the bond partner.
    pub required_neighbors: Vec<NeighborSpec>,
    /// No neighbor — the bond partner included — may match.
    pub forbidden_neighbors: Vec<NeighborSpec>,
}

impl EnvPattern {
    /// Does atom `v` of `m` satisfy this pattern, where `partner` is the
    /// other end of the candidate bond?
    pub fn matches(&self, m: &Molecule, v: usize, partner: usize) -> bool {
        let a = m.atom(v);
        if let Some(els) = &self.elements {
            if !els.contains(&a.element) {
                return false;
            }
        }
        if let Some(ar) = self.aromatic {
            if a.aromatic != ar {
                return false;
            }
        }
        if let Some(r) = self.in_ring {
            if m.atom_in_ring(v) != r {
                return false;
            }
        }
        if let Some((lo, hi)) = self.degree {
            let d = m.heavy_degree(v) as u32;
            if d < lo || d > hi {
                return false;
            }
        }
        if self.sp3 {
            if a.aromatic {
                return false;
            }
            if m.neighbors(v)
                .iter()
                .any(|&(_, b)| m.bond(b).order != BondOrder::Single)
            {
                return false;
            }
        }
        for spec in &self.forbidden_neighbors {
            if m.neighbors(v).iter().any(|&(w, b)| spec.matches(m, w, b)) {
                return false;
            }
        }
        if !self.required_neighbors.is_empty() {
            let candidates: Vec<(usize, usize)> = m
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&(w, _)| w != partner)
                .collect();
            if !assign_required(m, &self.required_neighbors, &candidates, &mut vec![false; candidates.len()], 0) {
                return false;
            }
        }
        true
    }
}

/// Injective assignment of required specs to distinct candidate neighbors.
fn assign_required(
    m: &Molecule,
    specs: &[NeighborSpec],
    candidates: &[(usize, usize)],
    taken: &mut Vec<bool>,
    i: usize,
) -> bool {
    if i == specs.len() {
        return true;
    }
    for (c, &(w, b)) in candidates.iter().enumerate() {
        if !taken[c] && specs[i].matches(m, w, b) {
            taken[c] = true;
            if assign_required(m, specs, candidates, taken, i + 1) {
                return true;
            }
            taken[c] = false;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleavageRule {
    pub rule_id: String,
    pub left_env: EnvPattern,
    pub right_env: EnvPattern,
    pub bond_order: BondOrder,
    pub acyclic_only: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RuleTable {
    pub rules: Vec<CleavageRule>,
}

impl RuleTable {
    /// Parses the tab-separated rule file format. `origin` labels errors.
    pub fn parse(text: &str, origin: &str) -> Result<RuleTable, FragmentError> {
        let mut rules: Vec<CleavageRule> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: String| FragmentError::RuleSyntax {
                origin: origin.to_string(),
                line: lineno + 1,
                msg,
            };
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(err(format!(
                    "expected 5 tab-separated fields, got {}",
                    fields.len()
                )));
            }
            let rule_id = fields[0].to_string();
            if rule_id.is_empty() {
                return Err(err("empty rule id".into()));
            }
            if rules.iter().any(|r| r.rule_id == rule_id) {
                return Err(err(format!("duplicate rule id {rule_id:?}")));
            }
            let left_env = parse_env(fields[1]).map_err(&err)?;
            let right_env = parse_env(fields[2]).map_err(&err)?;
            let bond_order = match fields[3] {
                "1" => BondOrder::Single,
                "2" => BondOrder::Double,
                "3" => BondOrder::Triple,
                "a" => BondOrder::Aromatic,
                other => return Err(err(format!("bad bond order {other:?}"))),
            };
            let acyclic_only = match fields[4] {
                "0" => false,
                "1" => true,
                other => return Err(err(format!("bad acyclic_only flag {other:?}"))),
            };
            rules.push(CleavageRule {
                rule_id,
                left_env,
                right_env,
                bond_order,
                acyclic_only,
            });
        }
        Ok(RuleTable { rules })
    }

    /// Loads a rule table from a file on disk.
    pub fn load(path: &std::path::Path) -> Result<RuleTable, FragmentError> {
        let text = std::fs::read_to_string(path).map_err(|e| FragmentError::RuleSyntax {
            origin: path.display().to_string(),
            line: 0,
            msg: format!("cannot read rule file: {e}"),
        })?;
        Self::parse(&text, &path.display().to_string())
    }
}

fn parse_env(text: &str) -> Result<EnvPattern, String> {
    let mut env = EnvPattern::default();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err("empty constraint".into());
        }
        if let Some(spec) = part.strip_prefix("nbr!=") {
            env.forbidden_neighbors.push(parse_spec(spec)?);
        } else if let Some(spec) = part.strip_prefix("nbr=") {
            env.required_neighbors.push(parse_spec(spec)?);
        } else if let Some(v) = part.strip_prefix("elem=") {
            let mut els = Vec::new();
            for sym in v.split('|') {
                els.push(
                    Element::from_symbol(sym).ok_or_else(|| format!("unknown element {sym:?}"))?,
                );
            }
            env.elements = Some(els);
        } else if let Some(v) = part.strip_prefix("arom=") {
            env.aromatic = Some(parse_flag(v)?);
        } else if let Some(v) = part.strip_prefix("ring=") {
            env.in_ring = Some(parse_flag(v)?);
        } else if let Some(v) = part.strip_prefix("deg=") {
            let (lo, hi) = match v.split_once('-') {
                Some((a, b)) => (
                    a.parse().map_err(|_| format!("bad degree {v:?}"))?,
                    b.parse().map_err(|_| format!("bad degree {v:?}"))?,
                ),
                None => {
                    let n = v.parse().map_err(|_| format!("bad degree {v:?}"))?;
                    (n, n)
                }
            };
            if lo > hi {
                return Err(format!("empty degree window {v:?}"));
            }
            env.degree = Some((lo, hi));
        } else if let Some(v) = part.strip_prefix("sp3=") {
            if !parse_flag(v)? {
                return Err("sp3=0 is meaningless; omit the constraint".into());
            }
            env.sp3 = true;
        } else {
            return Err(format!("unknown constraint {part:?}"));
        }
    }
    Ok(env)
}

fn parse_flag(v: &str) -> Result<bool, String> {
    match v {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format!("bad flag value {v:?}")),
    }
}

/// SPEC = ELEMENT [":" order] ["(=O)"]
fn parse_spec(text: &str) -> Result<NeighborSpec, String> {
    let mut rest = text;
    let carbonyl = if let Some(stripped) = rest.strip_suffix("(=O)") {
        rest = stripped;
        true
    } else {
        false
    };
    let (sym, order) = match rest.split_once(':') {
        Some((s, o)) => {
            let order = match o {
                "1" => BondOrder::Single,
                "2" => BondOrder::Double,
                "3" => BondOrder::Triple,
                "a" => BondOrder::Aromatic,
                _ => return Err(format!("bad neighbor bond order {o:?}")),
            };
            (s, Some(order))
        }
        None => (rest, None),
    };
    let element =
        Element::from_symbol(sym).ok_or_else(|| format!("unknown element {sym:?} in neighbor spec"))?;
    Ok(NeighborSpec {
        element,
        order,
        carbonyl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    #[test]
    fn parses_default_table() {
        let table = RuleTable::parse(
            include_str!("../../../../rules/brics_like.rules"),
            "brics_like.rules",
        )
        .unwrap();
        assert_eq!(table.rules.len(), 8);
        assert_eq!(table.rules[0].rule_id, "amide");
        assert!(table.rules.iter().all(|r| r.acyclic_only));
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in [
            "only_two_fields\telem=C",
            "r\telem=C\telem=Zz\t1\t1",
            "r\telem=C\telem=C\t9\t1",
            "r\telem=C\telem=C\t1\t2",
            "r\tdeg=3-2\telem=C\t1\t1",
            "r\twat=1\telem=C\t1\t1",
            "r\telem=C\telem=C\t1\t1\nr\telem=N\telem=N\t1\t1",
        ] {
            // The last case duplicates the id "r" across two lines.
            assert!(
                RuleTable::parse(bad, "test").is_err(),
                "expected parse failure for {bad:?}"
            );
        }
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let t = RuleTable::parse("# header\n\nr\telem=C\telem=N\t1\t1 # tail\n", "t").unwrap();
        assert_eq!(t.rules.len(), 1);
    }

    #[test]
    fn env_pattern_semantics() {
        let m = parse_smiles("CC(=O)N(C)C").unwrap(); // N,N-dimethylacetamide
        // atoms: C0, C1(=O2), N3, C4, C5
        let carbonyl_c = parse_env("elem=C,arom=0,nbr=O:2").unwrap();
        assert!(carbonyl_c.matches(&m, 1, 3));
        assert!(!carbonyl_c.matches(&m, 0, 1));
        let amine_n = parse_env("elem=N,arom=0,deg=2-3,nbr!=C(=O)").unwrap();
        // N3 neighbors include the carbonyl carbon -> forbidden spec fires.
        assert!(!amine_n.matches(&m, 3, 4));
        let plain = parse_smiles("CN(C)C").unwrap();
        assert!(amine_n.matches(&plain, 1, 0));
    }

    #[test]
    fn required_neighbors_are_injective() {
        // Sulfone S needs two distinct double-bonded oxygens.
        let sulfone = parse_env("elem=S,nbr=O:2,nbr=O:2").unwrap();
        let dmso2 = parse_smiles("CS(C)(=O)=O").unwrap();
        assert!(sulfone.matches(&dmso2, 1, 0));
        let sulfoxide = parse_smiles("CS(C)=O").unwrap();
        assert!(!sulfone.matches(&sulfoxide, 1, 0));
    }

    #[test]
    fn sp3_constraint_rejects_unsaturation() {
        let env = parse_env("elem=C,sp3=1").unwrap();
        let m = parse_smiles("CC=C").unwrap();
        assert!(env.matches(&m, 0, 1));
        assert!(!env.matches(&m, 1, 0));
    }

    #[test]
    fn degree_counts_partner() {
        let env = parse_env("elem=O,deg=2").unwrap();
        let ether = parse_smiles("COC").unwrap();
        assert!(env.matches(&ether, 1, 0));
        let alcohol = parse_smiles("CO").unwrap();
        assert!(!env.matches(&alcohol, 1, 0));
    }
}
