// SPDX-License-Identifier: Apache-2.0

//! Deciding `f ≤_C g` and `f ≡_C g`.
//!
//! For discriminator clones the decision works block by block: `A^n` splits
//! into orbits of the internal isomorphisms, and `f ≤_C g` holds iff every
//! orbit `P = c/~` admits an `m`-tuple `d` with `S_d ≤ S_c` such that
//! `f|_P = g ∘ Φ_{d,c}`, where `Φ_{d,c}` sends `ι(c)` to `ι(d)`. Any clone can
//! also be searched by brute force over `(C^(n))^m`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::boolean::{class_label, BooleanClone};
use crate::clones::{elements, CloneHandle, ElemSet, InternalIso};
use crate::error::{Error, Result};
use crate::ops::{decode, encode, encode_unchecked, Operation};
use crate::poset::{Poset, PosetNode};

/// One `~_C`-block of `A^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitBlock {
    /// Lexicographically least member.
    pub representative: Vec<u8>,
    /// Tuple codes of all members, increasing.
    pub members: Vec<usize>,
    /// `S_c` for the representative `c`.
    pub subuniverse: ElemSet,
    /// Distinct restrictions to `S_c` of the isos defined on `c`.
    actions: Vec<InternalIso>,
    /// `ι(c)` as a tuple code, one per action.
    action_codes: Vec<usize>,
}

/// The orbit partition of `A^n` for a clone, with per-block action data.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    k: usize,
    n: usize,
    block_of: Vec<u32>,
    blocks: Vec<OrbitBlock>,
}

impl OrbitTable {
    fn build(clone: &CloneHandle, n: usize) -> Result<OrbitTable> {
        let k = clone.k();
        let total = clone.caps().check_tuples(k, n)?;
        let isos = clone.internal_isos()?;
        let mut block_of = vec![u32::MAX; total];
        let mut blocks = Vec::new();
        for code in 0..total {
            if block_of[code] != u32::MAX {
                continue;
            }
            let rep = decode(code, k, n);
            let coords = rep.iter().fold(0 as ElemSet, |m, &x| m | 1 << x);
            let subuniverse = clone.generated_subuniverse_of(coords)?;
            let restricted: BTreeSet<InternalIso> = isos
                .iter()
                .filter(|i| i.domain() & coords == coords)
                .map(|i| i.restrict(subuniverse))
                .collect();
            let actions: Vec<InternalIso> = restricted.into_iter().collect();
            let id = blocks.len() as u32;
            let mut action_codes = Vec::with_capacity(actions.len());
            let mut members = BTreeSet::new();
            for iota in &actions {
                let image = iota.apply_tuple(&rep).ok_or_else(|| {
                    Error::Consistency("internal iso undefined on its own orbit".into())
                })?;
                let c = encode_unchecked(&image, k);
                action_codes.push(c);
                members.insert(c);
                block_of[c] = id;
            }
            blocks.push(OrbitBlock {
                representative: rep,
                members: members.into_iter().collect(),
                subuniverse,
                actions,
                action_codes,
            });
        }
        Ok(OrbitTable {
            k,
            n,
            block_of,
            blocks,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[OrbitBlock] {
        &self.blocks
    }

    /// Index of the block containing the tuple with this code.
    pub fn block_of(&self, code: usize) -> usize {
        self.block_of[code] as usize
    }
}

/// The orbit table of `A^n`, shared through the clone's cache.
pub fn orbit_table(clone: &CloneHandle, n: usize) -> Result<Arc<OrbitTable>> {
    if let Some(t) = clone.orbit_cache.lock().expect("poisoned").get(&n) {
        return Ok(t.clone());
    }
    let table = Arc::new(OrbitTable::build(clone, n)?);
    clone
        .orbit_cache
        .lock()
        .expect("poisoned")
        .entry(n)
        .or_insert(table.clone());
    Ok(table)
}

/// The `~_C`-blocks of `A^n`, ordered by representative.
pub fn orbits(clone: &CloneHandle, n: usize) -> Result<Vec<OrbitBlock>> {
    Ok(orbit_table(clone, n)?.blocks.clone())
}

/// Least subuniverse containing the coordinates of `tuple`.
pub fn generated_subuniverse(clone: &CloneHandle, tuple: &[u8]) -> Result<BTreeSet<u8>> {
    let mut coords: ElemSet = 0;
    for &x in tuple {
        if x as usize >= clone.k() {
            return Err(Error::ValueOutOfRange {
                value: x as usize,
                k: clone.k(),
            });
        }
        coords |= 1 << x;
    }
    Ok(elements(clone.generated_subuniverse_of(coords)?)
        .into_iter()
        .collect())
}

/// `Φ_{d,c}`: the iso-preserving map from the block of `c` onto the block of `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiMap {
    pub source: Vec<u8>,
    pub target: Vec<u8>,
    /// `(ι(c), ι(d))` as tuple codes, sorted by source.
    pub mapping: Vec<(usize, usize)>,
}

impl PhiMap {
    pub fn get(&self, source_code: usize) -> Option<usize> {
        self.mapping
            .binary_search_by_key(&source_code, |p| p.0)
            .ok()
            .map(|i| self.mapping[i].1)
    }

    pub fn is_bijective(&self) -> bool {
        let targets: BTreeSet<usize> = self.mapping.iter().map(|p| p.1).collect();
        targets.len() == self.mapping.len()
    }
}

pub fn phi_map(clone: &CloneHandle, c: &[u8], d: &[u8]) -> Result<PhiMap> {
    let k = clone.k();
    let sc = generated_subuniverse(clone, c)?;
    let sd = generated_subuniverse(clone, d)?;
    if !sd.is_subset(&sc) {
        return Err(Error::InvalidArgument(format!(
            "S_d = {sd:?} is not contained in S_c = {sc:?}"
        )));
    }
    let mut mapping: BTreeMap<usize, usize> = BTreeMap::new();
    for iota in clone.internal_isos()?.iter() {
        let Some(ic) = iota.apply_tuple(c) else {
            continue;
        };
        let id = iota
            .apply_tuple(d)
            .ok_or_else(|| Error::Consistency(format!("iso {iota} defined on S_c but not on d")))?;
        let (from, to) = (encode(&ic, k)?, encode(&id, k)?);
        if let Some(&prev) = mapping.get(&from) {
            if prev != to {
                return Err(Error::Consistency(format!(
                    "two isos agree on {c:?} but send {d:?} to different tuples"
                )));
            }
        }
        mapping.insert(from, to);
    }
    Ok(PhiMap {
        source: c.to_vec(),
        target: d.to_vec(),
        mapping: mapping.into_iter().collect(),
    })
}

fn check_pair(f: &Operation, g: &Operation, clone: &CloneHandle) -> Result<()> {
    if f.k() != g.k() {
        return Err(Error::BaseMismatch {
            left: f.k(),
            right: g.k(),
        });
    }
    if f.k() != clone.k() {
        return Err(Error::BaseMismatch {
            left: clone.k(),
            right: f.k(),
        });
    }
    Ok(())
}

/// Decides `f ≤_C g` for a discriminator clone via orbits and Φ-maps.
pub fn minor_decide(f: &Operation, g: &Operation, clone: &CloneHandle) -> Result<bool> {
    check_pair(f, g, clone)?;
    if !clone.is_discriminator()? {
        return Err(Error::UnsupportedClone(format!(
            "{} does not contain the discriminator; use the brute-force search",
            clone.name()
        )));
    }
    let k = clone.k();
    let m = g.arity();
    let table = orbit_table(clone, f.arity())?;
    let mut f_values = Vec::new();
    let mut d = vec![0u8; m];
    let mut idx = vec![0usize; m];
    for block in &table.blocks {
        f_values.clear();
        f_values.extend(block.action_codes.iter().map(|&c| f.value(c)));
        let candidates = elements(block.subuniverse);
        idx.iter_mut().for_each(|i| *i = 0);
        let mut found = false;
        loop {
            for (slot, &i) in d.iter_mut().zip(&idx) {
                *slot = candidates[i];
            }
            let fits = block.actions.iter().zip(&f_values).all(|(iota, &fv)| {
                let code = d.iter().fold(0, |acc, &x| {
                    acc * k + iota.apply(x).expect("d lies in S_c") as usize
                });
                g.value(code) == fv
            });
            if fits {
                found = true;
                break;
            }
            if !crate::ops::advance(&mut idx, candidates.len()) {
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Im(f) ⊆ Im(g)`: the minor relation for the clone of all operations.
pub fn minor_decide_o(f: &Operation, g: &Operation) -> Result<bool> {
    if f.k() != g.k() {
        return Err(Error::BaseMismatch {
            left: f.k(),
            right: g.k(),
        });
    }
    Ok(f.image().is_subset(&g.image()))
}

/// Searches `(C^(n))^m` for `h` with `f = g ∘ h`; returns the first witness.
pub fn minor_bruteforce(
    f: &Operation,
    g: &Operation,
    clone: &CloneHandle,
) -> Result<Option<Vec<Operation>>> {
    check_pair(f, g, clone)?;
    let members = clone.members(f.arity())?;
    let m = g.arity();
    let budget = clone.caps().brute_force_budget;
    let size = members.len() as u64;
    let attempted = size.checked_pow(m as u32).filter(|&a| a <= budget);
    if attempted.is_none() {
        return Err(Error::BudgetExceeded {
            attempted: format!("{size}^{m}"),
            budget,
        });
    }
    if members.is_empty() {
        return Ok(None);
    }
    let k = f.k();
    let cells = f.len();
    let tables: Vec<Vec<u8>> = members.iter().map(Operation::table).collect();
    let target = f.table();
    let mut idx = vec![0usize; m];
    loop {
        let hit = (0..cells).all(|j| {
            let code = idx
                .iter()
                .fold(0, |acc, &i| acc * k + tables[i][j] as usize);
            g.value(code) == target[j]
        });
        if hit {
            return Ok(Some(idx.iter().map(|&i| members[i].clone()).collect()));
        }
        if !crate::ops::advance(&mut idx, members.len()) {
            return Ok(None);
        }
    }
}

/// `f ≤_C g`, by the orbit criterion when `C` contains the discriminator and
/// by brute force otherwise.
pub fn is_minor(f: &Operation, g: &Operation, clone: &CloneHandle) -> Result<bool> {
    if clone.is_discriminator()? {
        minor_decide(f, g, clone)
    } else {
        Ok(minor_bruteforce(f, g, clone)?.is_some())
    }
}

/// `f ≡_C g`.
pub fn equivalent(f: &Operation, g: &Operation, clone: &CloneHandle) -> Result<bool> {
    Ok(is_minor(f, g, clone)? && is_minor(g, f, clone)?)
}

/// All `C`-classes meeting arities `1..=max_arity`, with the covering
/// relation of `⪯_C` between them.
///
/// The six Boolean discriminator clones are classified by their invariant
/// labels; any other clone by pairwise equivalence, bucketed by image. The
/// order is computed on representatives with [`is_minor`] in both cases.
pub fn enumerate_classes(clone: &CloneHandle, max_arity: usize) -> Result<Poset> {
    let k = clone.k();
    if max_arity == 0 {
        return Err(Error::InvalidArgument(
            "max arity must be at least 1".into(),
        ));
    }
    for n in 1..=max_arity {
        let cells = crate::ops::cell_count(k, n).unwrap_or(usize::MAX);
        let feasible = u32::try_from(cells)
            .ok()
            .and_then(|c| (k as u64).checked_pow(c))
            .is_some_and(|t| t <= clone.caps().max_candidates);
        if !feasible {
            return Err(Error::CapExceeded {
                what: format!("enumerating all {n}-ary operations on {k} elements"),
                cap: clone.caps().max_candidates,
            });
        }
    }
    let boolean = clone
        .named_id()
        .and_then(BooleanClone::from_named)
        .filter(|_| k == 2);
    let mut reps: Vec<(String, Operation)> = Vec::new();
    if let Some(id) = boolean {
        let mut by_label: BTreeMap<String, Operation> = BTreeMap::new();
        for n in 1..=max_arity {
            for f in Operation::all(k, n)? {
                by_label
                    .entry(class_label(&f, id)?.to_string())
                    .or_insert(f);
            }
        }
        reps.extend(by_label);
    } else {
        let mut buckets: BTreeMap<u32, Vec<Operation>> = BTreeMap::new();
        for n in 1..=max_arity {
            for f in Operation::all(k, n)? {
                let bucket = buckets.entry(f.image_mask()).or_default();
                let mut known = false;
                for r in bucket.iter() {
                    if equivalent(&f, r, clone)? {
                        known = true;
                        break;
                    }
                }
                if !known {
                    bucket.push(f);
                }
            }
        }
        reps.extend(buckets.into_values().flatten().map(|f| (f.to_string(), f)));
    }
    reps.sort_by(|a, b| a.0.cmp(&b.0));
    let nodes: Vec<PosetNode> = reps
        .into_iter()
        .map(|(key, representative)| PosetNode {
            key,
            representative,
            formula: None,
        })
        .collect();
    let mut leq = vec![vec![false; nodes.len()]; nodes.len()];
    for (i, a) in nodes.iter().enumerate() {
        for (j, b) in nodes.iter().enumerate() {
            leq[i][j] = i == j || is_minor(&a.representative, &b.representative, clone)?;
        }
    }
    Poset::from_order(clone.name(), nodes, &leq)
}

/// `ν_{C',C}`: sends each `C`-class to the `C'`-class containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuMap {
    /// `targets[i]` is the index in the coarser poset of the image of node `i`.
    pub targets: Vec<usize>,
}

impl NuMap {
    pub fn is_surjective(&self, onto: &Poset) -> bool {
        let hit: BTreeSet<usize> = self.targets.iter().copied().collect();
        hit.len() == onto.nodes().len()
    }

    pub fn is_order_preserving(&self, from: &Poset, onto: &Poset) -> bool {
        let n = from.nodes().len();
        (0..n).all(|i| (0..n).all(|j| !from.le(i, j) || onto.le(self.targets[i], self.targets[j])))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &NuMap) -> NuMap {
        NuMap {
            targets: self.targets.iter().map(|&t| next.targets[t]).collect(),
        }
    }

    /// Image keys, one per source node.
    pub fn describe(&self, from: &Poset, onto: &Poset) -> Vec<(String, String)> {
        self.targets
            .iter()
            .enumerate()
            .map(|(i, &t)| (from.nodes()[i].key.clone(), onto.nodes()[t].key.clone()))
            .collect()
    }
}

pub fn nu_map(
    sub: &CloneHandle,
    sup: &CloneHandle,
    poset_sub: &Poset,
    poset_sup: &Poset,
) -> Result<NuMap> {
    if !sub.is_subclone_of(sup)? {
        return Err(Error::NotSubclone {
            sub: sub.name().to_string(),
            sup: sup.name().to_string(),
        });
    }
    let mut targets = Vec::with_capacity(poset_sub.nodes().len());
    for node in poset_sub.nodes() {
        let mut hit = None;
        for (j, coarse) in poset_sup.nodes().iter().enumerate() {
            if equivalent(&node.representative, &coarse.representative, sup)? {
                hit = Some(j);
                break;
            }
        }
        let j = hit.ok_or_else(|| {
            Error::InvalidArgument(format!(
                "no class of {} contains {}",
                sup.name(),
                node.representative
            ))
        })?;
        targets.push(j);
    }
    Ok(NuMap { targets })
}
