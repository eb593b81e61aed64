//! Candidate pre-screening: path-hash pattern fingerprints plus cheap
//! property tests, tuned so that a true substructure match can never be
//! screened away.
//!
//! Every molecule hashes each simple path of 0..path_max bonds twice over:
//!
//! * a ring-blind variant over (element, aromatic) labels and bond orders —
//!   always sound, because a strict embedding preserves those exactly;
//! * a ring-aware variant that adds each atom's in-ring flag. For query
//!   molecules (anything with attachment atoms) this variant is emitted
//!   only for paths whose atoms are all in-ring: such atoms are guaranteed
//!   to land on in-ring target atoms, whereas an acyclic query atom may
//!   legally land on a ring atom, so ring-aware bits for those paths would
//!   produce false negatives. Attachment-free queries can only match by
//!   isomorphism (strictness leaves no slack anywhere), so they hash the
//!   ring-aware variant for every path, exactly like stock molecules.
//!
//! Query paths touching an attachment atom are not hashed at all.

use crate::molgraph::Molecule;
use crate::stock::Stock;

/// Fingerprint geometry. Stored in stock caches; a cache is only usable by
/// a run configured with identical values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpParams {
    /// Bit width; must be a positive multiple of 64.
    pub nbits: u32,
    /// Longest hashed path, in bonds.
    pub path_max: u32,
}

impl Default for FpParams {
    fn default() -> Self {
        FpParams {
            nbits: 2048,
            path_max: 7,
        }
    }
}

impl FpParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.nbits == 0 || self.nbits % 64 != 0 {
            return Err(format!(
                "fingerprint width must be a positive multiple of 64, got {}",
                self.nbits
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternFingerprint {
    words: Vec<u64>,
}

impl PatternFingerprint {
    pub fn empty(nbits: u32) -> Self {
        PatternFingerprint {
            words: vec![0; (nbits / 64) as usize],
        }
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        PatternFingerprint { words }
    }

    pub fn nbits(&self) -> u32 {
        (self.words.len() * 64) as u32
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn set(&mut self, bit: u64) {
        self.words[(bit / 64) as usize] |= 1 << (bit % 64);
    }

    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// True when every bit of `self` is set in `other`.
    pub fn is_subset_of(&self, other: &PatternFingerprint) -> bool {
        debug_assert_eq!(self.words.len(), other.words.len());
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }
}

/// Incremental 64-bit FNV-1a, also used for cache checksums.
pub(crate) struct Fnv1a(u64);

impl Fnv1a {
    pub(crate) fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

fn hash_path(tag: u8, canonical: &[u8], nbits: u32) -> u64 {
    let mut h = Fnv1a::new();
    h.write(&[tag]);
    h.write(canonical);
    h.finish() % nbits as u64
}

pub fn fingerprint(m: &Molecule, params: &FpParams) -> PatternFingerprint {
    let mut fp = PatternFingerprint::empty(params.nbits);
    let is_query = m.has_attachments();
    let n = m.num_atoms();
    let mut on_path = vec![false; n];
    let mut path: Vec<usize> = Vec::with_capacity(params.path_max as usize + 1);
    let mut path_bonds: Vec<usize> = Vec::with_capacity(params.path_max as usize);
    // Reused label buffers: forward and backward spellings of the path.
    let mut fwd: Vec<u8> = Vec::with_capacity(64);
    let mut bwd: Vec<u8> = Vec::with_capacity(64);

    fn emit(
        m: &Molecule,
        path: &[usize],
        path_bonds: &[usize],
        is_query: bool,
        fp: &mut PatternFingerprint,
        fwd: &mut Vec<u8>,
        bwd: &mut Vec<u8>,
        nbits: u32,
    ) {
        // Each multi-atom path is reached from both endpoints; keep one.
        if path.len() > 1 && path[0] > path[path.len() - 1] {
            return;
        }
        let ring_aware_ok = !is_query || path.iter().all(|&v| m.atom_in_ring(v));
        for ring_aware in [false, true] {
            if ring_aware && !ring_aware_ok {
                continue;
            }
            fwd.clear();
            bwd.clear();
            for dir in 0..2 {
                let buf: &mut Vec<u8> = if dir == 0 { &mut *fwd } else { &mut *bwd };
                let idx =
                    |i: usize| -> usize { if dir == 0 { i } else { path.len() - 1 - i } };
                for i in 0..path.len() {
                    let a = m.atom(path[idx(i)]);
                    buf.push(a.element.0);
                    buf.push(a.aromatic as u8);
                    if ring_aware {
                        buf.push(m.atom_in_ring(path[idx(i)]) as u8);
                    }
                    if i < path_bonds.len() {
                        let b = if dir == 0 {
                            path_bonds[i]
                        } else {
                            path_bonds[path_bonds.len() - 1 - i]
                        };
                        buf.push(m.bond(b).order as u8 + 1);
                    }
                }
            }
            let canonical: &[u8] = if fwd <= bwd { fwd } else { bwd };
            let tag = if ring_aware { 0xB2 } else { 0xA1 };
            let bit = hash_path(tag, canonical, nbits);
            fp.set(bit);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        m: &Molecule,
        params: &FpParams,
        is_query: bool,
        on_path: &mut Vec<bool>,
        path: &mut Vec<usize>,
        path_bonds: &mut Vec<usize>,
        fp: &mut PatternFingerprint,
        fwd: &mut Vec<u8>,
        bwd: &mut Vec<u8>,
    ) {
        let last = *path.last().unwrap();
        if path_bonds.len() == params.path_max as usize {
            return;
        }
        for &(w, b) in m.neighbors(last) {
            if on_path[w] || m.atom(w).is_attachment {
                continue;
            }
            on_path[w] = true;
            path.push(w);
            path_bonds.push(b);
            emit(m, path, path_bonds, is_query, fp, fwd, bwd, params.nbits);
            extend(m, params, is_query, on_path, path, path_bonds, fp, fwd, bwd);
            path_bonds.pop();
            path.pop();
            on_path[w] = false;
        }
    }

    for start in 0..n {
        if m.atom(start).is_attachment {
            continue;
        }
        on_path[start] = true;
        path.push(start);
        emit(m, &path, &path_bonds, is_query, &mut fp, &mut fwd, &mut bwd, params.nbits);
        extend(
            m,
            params,
            is_query,
            &mut on_path,
            &mut path,
            &mut path_bonds,
            &mut fp,
            &mut fwd,
            &mut bwd,
        );
        path.pop();
        on_path[start] = false;
    }
    fp
}

/// Stock ids (from `prior`, or all of the stock) that survive the property
/// screens and the fingerprint subset test for `fragment`. A strict
/// superset of the ids whose molecules actually match.
pub fn screen_candidates(fragment: &Molecule, stock: &Stock, prior: Option<&[u32]>) -> Vec<u32> {
    let heavy = fragment.heavy_atom_count() as u32;
    // Attachments are degree-1 leaves, so they never change the cyclomatic
    // count: this is the ring count of the internal part.
    let rings = fragment.ring_count() as u32;
    let fp = fingerprint(fragment, &stock.fp_params);
    let pass = |id: &u32| {
        let e = &stock.entries[*id as usize];
        e.heavy_atoms >= heavy && e.rings >= rings && fp.is_subset_of(&e.fp)
    };
    match prior {
        Some(ids) => ids.iter().filter(|id| pass(id)).copied().collect(),
        None => (0..stock.entries.len() as u32).filter(|id| pass(id)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn fp(s: &str) -> PatternFingerprint {
        fingerprint(&parse_smiles(s).unwrap(), &FpParams::default())
    }

    #[test]
    fn params_validation() {
        assert!(FpParams::default().validate().is_ok());
        assert!(FpParams { nbits: 100, path_max: 7 }.validate().is_err());
        assert!(FpParams { nbits: 0, path_max: 7 }.validate().is_err());
    }

    #[test]
    fn single_atom_is_subset_of_any_container() {
        // "*C" is a genuine fragment query, so only its ring-blind bits
        // constrain the target; it screens into any C-containing molecule.
        let c = fp("*C");
        for t in ["CC", "CCO", "CC(=O)Nc1ccccc1", "C1CCCCC1"] {
            assert!(c.is_subset_of(&fp(t)), "*C not subset of {t}");
        }
        // Attachment-free "C" can only match by isomorphism, and its
        // ring-aware bits correctly exclude an all-ring target.
        assert!(fp("C").is_subset_of(&fp("CC(=O)Nc1ccccc1")));
        assert!(!fp("C").is_subset_of(&fp("C1CCCCC1")));
        assert!(!fp("N").is_subset_of(&fp("CC")));
    }

    #[test]
    fn matched_query_bits_are_subset() {
        assert!(fp("*C(=O)N*").is_subset_of(&fp("CC(=O)NC")));
        assert!(fp("*CO").is_subset_of(&fp("CCO")));
        assert!(fp("*c1ccccc1").is_subset_of(&fp("Cc1ccccc1")));
    }

    #[test]
    fn ring_aware_bits_reject_acyclic_decoys() {
        // Cyclohexane's all-ring paths separate it from hexane even though
        // the ring-blind path labels coincide.
        assert!(!fp("C1CCCCC1").is_subset_of(&fp("CCCCCC")));
        // The reverse direction is also distinguished (hexane has paths
        // with non-ring labels that cyclohexane lacks).
        assert!(!fp("CCCCCC").is_subset_of(&fp("C1CCCCC1")));
    }

    #[test]
    fn acyclic_query_atoms_may_sit_on_rings() {
        // "*CCCC*" strictly matches cyclohexane; the fingerprint must not
        // screen it away even though the query atoms are not in rings.
        let q = fp("*CCCC*");
        let t = fp("C1CCCCC1");
        assert!(
            crate::matcher::match_substructure(
                &parse_smiles("*CCCC*").unwrap(),
                &parse_smiles("C1CCCCC1").unwrap()
            )
            .unwrap()
        );
        assert!(q.is_subset_of(&t));
    }

    #[test]
    fn attachment_paths_not_hashed() {
        // A lone attachment adds nothing: "*C" within "CC" etc.
        assert!(fp("*C").is_subset_of(&fp("CC")));
        assert!(fp("*C(*)C").is_subset_of(&fp("CC(C)C")));
    }

    #[test]
    fn fingerprint_is_deterministic() {
        let a = fp("CC(=O)Nc1ccccc1");
        let b = fp("CC(=O)Nc1ccccc1");
        assert_eq!(a, b);
        assert!(a.popcount() > 0);
    }

    #[test]
    fn screening_soundness_on_random_matched_pairs() {
        use crate::synth;
        let mut rng = synth::rng(011_771);
        let params = FpParams::default();
        let mut checked = 0;
        for _ in 0..400 {
            let target = synth::random_molecule(&mut rng, 24);
            let Some(query) = synth::random_fragment_query(&mut rng, &target, 12) else {
                continue;
            };
            // Queries carved out of the target always match it.
            assert_eq!(
                crate::oracle::naive_match(&query, &target),
                Ok(true),
                "carved query must match its source"
            );
            let qf = fingerprint(&query, &params);
            let tf = fingerprint(&target, &params);
            assert!(
                qf.is_subset_of(&tf),
                "screen false negative: query {} target {}",
                crate::molgraph::write_smiles(&query),
                crate::molgraph::write_smiles(&target),
            );
            checked += 1;
        }
        assert!(checked > 300, "generator produced too few pairs");
    }
}
