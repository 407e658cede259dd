// SPDX-License-Identifier: Apache-2.0

//! Breadth blocks, the `E_r` invariants, and the arity bound
//! `d = k^k − k^(k−1) + 1` for the clone generated by the discriminator.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::clones::all_permutations;
use crate::error::{Error, Result};
use crate::ops::{advance, cell_count, decode_into, encode_unchecked, Operation, MAX_CELLS};

/// Number of distinct coordinates.
pub fn breadth(tuple: &[u8]) -> usize {
    tuple.iter().collect::<BTreeSet<_>>().len()
}

/// Relabels values so first occurrences read `0, 1, …, r−1` in order.
pub fn canonical_rep(tuple: &[u8]) -> Vec<u8> {
    let mut seen: Vec<u8> = Vec::new();
    tuple
        .iter()
        .map(|x| match seen.iter().position(|y| y == x) {
            Some(i) => i as u8,
            None => {
                seen.push(*x);
                (seen.len() - 1) as u8
            }
        })
        .collect()
}

/// Positions of first occurrences, increasing.
fn first_positions(tuple: &[u8]) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    (0..tuple.len())
        .filter(|&i| seen.insert(tuple[i]))
        .collect()
}

/// `P_r`: injective `r`-tuples over `{0, …, k−1}` in lexicographic order.
pub fn injective_tuples(k: usize, r: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if r == 0 || r > k {
        return out;
    }
    let mut idx = vec![0usize; r];
    loop {
        if breadth_usize(&idx) == r {
            out.push(idx.iter().map(|&x| x as u8).collect());
        }
        if !advance(&mut idx, k) {
            return out;
        }
    }
}

fn breadth_usize(idx: &[usize]) -> usize {
    idx.iter().collect::<BTreeSet<_>>().len()
}

/// A breadth-`r` block of `A^n` with its projection onto `P_r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockProjection {
    pub k: usize,
    /// Canonical representative, values `0..r`.
    pub representative: Vec<u8>,
    /// First-occurrence positions `j_1 < … < j_r`.
    pub positions: Vec<usize>,
}

impl BlockProjection {
    pub fn of(tuple: &[u8], k: usize) -> BlockProjection {
        let representative = canonical_rep(tuple);
        let positions = first_positions(&representative);
        BlockProjection {
            k,
            representative,
            positions,
        }
    }

    pub fn breadth(&self) -> usize {
        self.positions.len()
    }

    /// `π_P(a)`.
    pub fn project(&self, tuple: &[u8]) -> Vec<u8> {
        self.positions.iter().map(|&j| tuple[j]).collect()
    }

    /// `π_P^{-1}(x)` for an injective `r`-tuple `x`.
    pub fn lift(&self, x: &[u8]) -> Vec<u8> {
        self.representative.iter().map(|&c| x[c as usize]).collect()
    }

    /// All members of the block, in the order of `P_r`.
    pub fn members(&self) -> Vec<Vec<u8>> {
        injective_tuples(self.k, self.breadth())
            .iter()
            .map(|x| self.lift(x))
            .collect()
    }
}

/// Restricted growth strings of length `n` (canonical block
/// representatives), lexicographically.
pub fn canonical_reps(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(n: usize, cur: &mut Vec<u8>, max: u8, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let top = if cur.is_empty() { 0 } else { max + 1 };
        for v in 0..=top {
            cur.push(v);
            go(n, cur, max.max(v), out);
            cur.pop();
        }
    }
    if n > 0 {
        go(n, &mut cur, 0, &mut out);
    }
    out
}

/// Stirling number of the second kind.
pub fn stirling(d: usize, r: usize) -> BigUint {
    if r > d {
        return BigUint::zero();
    }
    let mut row = vec![BigUint::zero(); r + 1];
    row[0] = BigUint::one();
    for n in 1..=d {
        for j in (1..=r.min(n)).rev() {
            let carried = std::mem::take(&mut row[j]) * j as u64 + &row[j - 1];
            row[j] = carried;
        }
        row[0] = BigUint::zero();
    }
    row[r].clone()
}

/// The action of `σ ∈ S_r` on `P_r` as a permutation of indices:
/// `perm[i]` is the index of `σ*(x_i)`.
fn sigma_actions(k: usize, r: usize) -> (Vec<Vec<u8>>, Vec<Vec<usize>>) {
    let pr = injective_tuples(k, r);
    let index: BTreeMap<&[u8], usize> = pr
        .iter()
        .enumerate()
        .map(|(i, x)| (x.as_slice(), i))
        .collect();
    let actions = all_permutations(r)
        .into_iter()
        .map(|sigma| {
            pr.iter()
                .map(|x| {
                    let y: Vec<u8> = sigma.iter().map(|&s| x[s]).collect();
                    index[y.as_slice()]
                })
                .collect()
        })
        .collect();
    (pr, actions)
}

/// `N(k, r)`: orbits of `S_r` on functions `P_r → A`, by Burnside's lemma.
pub fn count_n(k: usize, r: usize) -> Result<BigUint> {
    if k < 1 || r < 1 || r > k {
        return Err(Error::InvalidArgument(format!(
            "N(k, r) needs 1 ≤ r ≤ k, got k={k}, r={r}"
        )));
    }
    if r > 8 {
        return Err(Error::CapExceeded {
            what: format!("S_{r} action"),
            cap: 8,
        });
    }
    let (_, actions) = sigma_actions(k, r);
    let mut total = BigUint::zero();
    for perm in &actions {
        let mut seen = vec![false; perm.len()];
        let mut cycles = 0u32;
        for start in 0..perm.len() {
            if !seen[start] {
                cycles += 1;
                let mut i = start;
                while !seen[i] {
                    seen[i] = true;
                    i = perm[i];
                }
            }
        }
        total += BigUint::from(k).pow(cycles);
    }
    Ok(total / BigUint::from(actions.len()))
}

/// A function `P_r → A` as its value list over `P_r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BlockFunction {
    pub k: usize,
    pub r: usize,
    pub values: Vec<u8>,
}

impl BlockFunction {
    pub fn new(k: usize, r: usize, values: Vec<u8>) -> Result<BlockFunction> {
        let expected = injective_tuples(k, r).len();
        if values.len() != expected {
            return Err(Error::ArityMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some(&v) = values.iter().find(|&&v| v as usize >= k) {
            return Err(Error::ValueOutOfRange {
                value: v as usize,
                k,
            });
        }
        Ok(BlockFunction { k, r, values })
    }

    /// `self ∘ σ*` for every `σ ∈ S_r`.
    fn orbit(&self) -> Vec<Vec<u8>> {
        let (_, actions) = sigma_actions(self.k, self.r);
        actions
            .iter()
            .map(|perm| perm.iter().map(|&j| self.values[j]).collect())
            .collect()
    }

    /// Lexicographic minimum of the `≈`-orbit.
    pub fn canonical(&self) -> BlockFunction {
        let values = self.orbit().into_iter().min().expect("S_r is nonempty");
        BlockFunction {
            k: self.k,
            r: self.r,
            values,
        }
    }
}

/// `φ ≈ ψ`.
pub fn approx_equiv(phi: &BlockFunction, psi: &BlockFunction) -> bool {
    phi.k == psi.k && phi.r == psi.r && psi.orbit().contains(&phi.values)
}

/// `E_r(f)` as canonical block functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErSignature {
    pub r: usize,
    pub classes: BTreeSet<BlockFunction>,
}

/// `f|_P ∘ π_P^{-1}` for the block of `rep`.
fn block_function(f: &Operation, block: &BlockProjection, pr: &[Vec<u8>]) -> BlockFunction {
    let k = f.k();
    let values = pr
        .iter()
        .map(|x| f.value(encode_unchecked(&block.lift(x), k)))
        .collect();
    BlockFunction {
        k,
        r: block.breadth(),
        values,
    }
}

pub fn er_signature(f: &Operation, r: usize) -> Result<ErSignature> {
    let k = f.k();
    if r == 0 || r > k {
        return Err(Error::InvalidArgument(format!(
            "breadth {r} outside 1..={k}"
        )));
    }
    let pr = injective_tuples(k, r);
    let mut classes = BTreeSet::new();
    for rep in canonical_reps(f.arity()) {
        let block = BlockProjection::of(&rep, k);
        if block.breadth() == r {
            classes.insert(block_function(f, &block, &pr).canonical());
        }
    }
    Ok(ErSignature { r, classes })
}

/// Sufficient condition for `f ≤_D g`: `E_r(f) ⊆ E_r(g)` for all `r`.
pub fn minor_via_er(f: &Operation, g: &Operation) -> Result<bool> {
    if f.k() != g.k() {
        return Err(Error::BaseMismatch {
            left: f.k(),
            right: g.k(),
        });
    }
    for r in 1..=f.k() {
        if !er_signature(f, r)?
            .classes
            .is_subset(&er_signature(g, r)?.classes)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `k^k − k^(k−1) + 1`.
pub fn bound_arity(k: usize) -> BigUint {
    let kk = BigUint::from(k);
    kk.pow(k as u32) - kk.pow(k as u32 - 1) + 1u32
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRow {
    pub r: usize,
    pub n: BigUint,
    pub s: BigUint,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub k: usize,
    pub d: BigUint,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    /// `{k, d, rows: [{r, N, S, ok}]}` with exact integers.
    pub fn to_json_value(&self) -> serde_json::Value {
        let num = |x: &BigUint| {
            serde_json::Value::Number(x.to_string().parse().expect("decimal integer"))
        };
        serde_json::json!({
            "k": self.k,
            "d": num(&self.d),
            "rows": self.rows.iter().map(|row| serde_json::json!({
                "r": row.r,
                "N": num(&row.n),
                "S": num(&row.s),
                "ok": row.ok,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Largest base accepted by [`check_bound`].
pub const MAX_BOUND_K: usize = 6;

/// Checks `N(k, r) ≤ S(d, r)` for `2 ≤ r ≤ k`.
pub fn check_bound(k: usize) -> Result<BoundReport> {
    if !(2..=MAX_BOUND_K).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 2..={MAX_BOUND_K}, got {k}"
        )));
    }
    let d = bound_arity(k);
    let du = d.to_usize().expect("small k");
    let mut rows = Vec::new();
    for r in 2..=k {
        let n = count_n(k, r)?;
        let s = stirling(du, r);
        rows.push(BoundRow {
            r,
            ok: n <= s,
            n,
            s,
        });
    }
    Ok(BoundReport { k, d, rows })
}

/// A `d`-ary operation with the same `E_r` invariants as `f`, built by
/// placing one `≈`-class of `E_r(f)` on each of the first breadth-`r`
/// blocks of `A^d`.
pub fn reduce_to_d_ary(f: &Operation, d: usize) -> Result<Operation> {
    let k = f.k();
    if d == 0 {
        return Err(Error::InvalidArgument(
            "target arity must be positive".into(),
        ));
    }
    match cell_count(k, d) {
        Some(c) if c <= MAX_CELLS => {}
        _ => {
            return Err(Error::CapExceeded {
                what: format!("a {d}-ary table on {k} elements"),
                cap: MAX_CELLS as u64,
            })
        }
    }
    let source = if f.arity() < d {
        f.pad_arity(d)?
    } else {
        f.clone()
    };
    let mut placed: BTreeMap<usize, Vec<BlockFunction>> = BTreeMap::new();
    for r in 2..=k.min(source.arity()) {
        let classes: Vec<BlockFunction> = er_signature(&source, r)?.classes.into_iter().collect();
        let available = stirling(d, r);
        if BigUint::from(classes.len()) > available {
            return Err(Error::CapacityViolated {
                r,
                needed: classes.len(),
                available: available.to_string(),
            });
        }
        placed.insert(r, classes);
    }
    let mut index_in_breadth: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut counts = vec![0usize; k + 1];
    for rep in canonical_reps(d) {
        let r = breadth(&rep);
        if r <= k {
            index_in_breadth.insert(rep, counts[r]);
            counts[r] += 1;
        }
    }
    let pr: Vec<BTreeMap<Vec<u8>, usize>> = (0..=k)
        .map(|r| {
            injective_tuples(k, r)
                .into_iter()
                .enumerate()
                .map(|(i, x)| (x, i))
                .collect()
        })
        .collect();
    let mut tuple = vec![0u8; d];
    let mut table = Vec::with_capacity(cell_count(k, d).expect("checked"));
    for code in 0..cell_count(k, d).expect("checked") {
        decode_into(code, k, &mut tuple);
        let block = BlockProjection::of(&tuple, k);
        let x = block.project(&tuple);
        let value = if block.breadth() == 1 {
            source.value(encode_unchecked(&vec![x[0]; source.arity()], k))
        } else {
            let classes = &placed[&block.breadth()];
            let j = index_in_breadth[&block.representative];
            let phi = classes.get(j).unwrap_or(&classes[0]);
            phi.values[pr[block.breadth()][&x]]
        };
        table.push(value);
    }
    Operation::from_table(k, d, &table)
}
