// SPDX-License-Identifier: Apache-2.0

//! Finitary operations on `{0, …, k−1}` stored as truth tables.
//!
//! Tuples are encoded big-endian mixed radix: `(a_1, …, a_n)` has code
//! `Σ a_i · k^(n−i)`, so entry `j` of the table is `f(dec(j))`. Boolean
//! tables are bit-packed; other bases use one byte per entry.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest table (in cells) an [`Operation`] may hold.
pub const MAX_CELLS: usize = 1 << 24;

/// Largest base size accepted anywhere in the crate.
pub const MAX_BASE: usize = 16;

/// `k^n`, or `None` when it overflows or exceeds [`MAX_CELLS`].
pub fn cell_count(k: usize, n: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..n {
        acc = acc.checked_mul(k)?;
        if acc > MAX_CELLS {
            return None;
        }
    }
    Some(acc)
}

/// Encodes a tuple over `{0, …, k−1}`; the first coordinate is most significant.
pub fn encode(tuple: &[u8], k: usize) -> Result<usize> {
    if tuple.is_empty() {
        return Err(Error::InvalidArgument("tuples must have length ≥ 1".into()));
    }
    let mut code = 0usize;
    for &a in tuple {
        if a as usize >= k {
            return Err(Error::ValueOutOfRange {
                value: a as usize,
                k,
            });
        }
        code = code
            .checked_mul(k)
            .and_then(|c| c.checked_add(a as usize))
            .ok_or_else(|| Error::InvalidArgument("tuple code overflows".into()))?;
    }
    Ok(code)
}

pub(crate) fn encode_unchecked(tuple: &[u8], k: usize) -> usize {
    tuple.iter().fold(0, |acc, &a| acc * k + a as usize)
}

/// Inverse of [`encode`].
pub fn decode(code: usize, k: usize, n: usize) -> Vec<u8> {
    let mut out = vec![0u8; n];
    decode_into(code, k, &mut out);
    out
}

pub(crate) fn decode_into(mut code: usize, k: usize, out: &mut [u8]) {
    for slot in out.iter_mut().rev() {
        *slot = (code % k) as u8;
        code /= k;
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Cells {
    Bits(Vec<u64>),
    Bytes(Vec<u8>),
}

impl Cells {
    fn build(k: usize, len: usize, mut value: impl FnMut(usize) -> u8) -> Cells {
        if k == 2 {
            let mut words = vec![0u64; len.div_ceil(64)];
            for j in 0..len {
                if value(j) != 0 {
                    words[j / 64] |= 1 << (j % 64);
                }
            }
            Cells::Bits(words)
        } else {
            Cells::Bytes((0..len).map(value).collect())
        }
    }

    #[inline]
    fn get(&self, j: usize) -> u8 {
        match self {
            Cells::Bits(words) => ((words[j / 64] >> (j % 64)) & 1) as u8,
            Cells::Bytes(bytes) => bytes[j],
        }
    }
}

/// An `n`-ary operation on `{0, …, k−1}`, `n ≥ 1`.
///
/// Constants are unary operations. Operations order by base, then arity,
/// then lexicographically by table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Operation {
    k: usize,
    arity: usize,
    cells: Cells,
}

impl Operation {
    /// Builds an operation from its table in encoding order.
    pub fn from_table(k: usize, arity: usize, table: &[u8]) -> Result<Operation> {
        let len = check_shape(k, arity)?;
        if table.len() != len {
            return Err(Error::InvalidArgument(format!(
                "table length {} does not equal {k}^{arity} = {len}",
                table.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&v| v as usize >= k) {
            return Err(Error::ValueOutOfRange {
                value: bad as usize,
                k,
            });
        }
        Ok(Operation {
            k,
            arity,
            cells: Cells::build(k, len, |j| table[j]),
        })
    }

    /// Builds an operation by evaluating `f` on every tuple.
    pub fn from_fn(k: usize, arity: usize, mut f: impl FnMut(&[u8]) -> u8) -> Result<Operation> {
        let len = check_shape(k, arity)?;
        let mut buf = vec![0u8; arity];
        let mut table = Vec::with_capacity(len);
        for j in 0..len {
            decode_into(j, k, &mut buf);
            table.push(f(&buf));
        }
        Operation::from_table(k, arity, &table)
    }

    /// The operation whose table is the `index`-th table in lexicographic order.
    pub fn from_index(k: usize, arity: usize, index: u64) -> Result<Operation> {
        let len = check_shape(k, arity)?;
        let mut table = vec![0u8; len];
        let mut rest = index;
        for slot in table.iter_mut().rev() {
            *slot = (rest % k as u64) as u8;
            rest /= k as u64;
        }
        if rest != 0 {
            return Err(Error::InvalidArgument(format!(
                "index {index} exceeds the number of {arity}-ary operations"
            )));
        }
        Operation::from_table(k, arity, &table)
    }

    /// All `n`-ary operations in lexicographic table order. The caller is
    /// responsible for keeping `k^(k^n)` reasonable.
    pub fn all(k: usize, arity: usize) -> Result<impl Iterator<Item = Operation>> {
        let len = check_shape(k, arity)?;
        let total = (k as u64)
            .checked_pow(len as u32)
            .ok_or_else(|| Error::CapExceeded {
                what: format!("{k}^({k}^{arity}) operations"),
                cap: u64::MAX,
            })?;
        Ok((0..total).map(move |i| Operation::from_index(k, arity, i).expect("index in range")))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of table cells, `k^n`.
    pub fn len(&self) -> usize {
        match &self.cells {
            Cells::Bits(_) => cell_count(2, self.arity).expect("validated"),
            Cells::Bytes(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `f(dec(code))`.
    #[inline]
    pub fn value(&self, code: usize) -> u8 {
        self.cells.get(code)
    }

    pub fn apply(&self, tuple: &[u8]) -> Result<u8> {
        if tuple.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: tuple.len(),
            });
        }
        Ok(self.value(encode(tuple, self.k)?))
    }

    pub fn values(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(|j| self.value(j))
    }

    pub fn table(&self) -> Vec<u8> {
        self.values().collect()
    }

    /// The `i`-th `n`-ary projection, `1 ≤ i ≤ n`.
    pub fn projection(k: usize, arity: usize, i: usize) -> Result<Operation> {
        if i == 0 || i > arity {
            return Err(Error::InvalidArgument(format!(
                "projection index {i} outside 1..={arity}"
            )));
        }
        Operation::from_fn(k, arity, |a| a[i - 1])
    }

    pub fn identity(k: usize) -> Result<Operation> {
        Operation::projection(k, 1, 1)
    }

    /// The unary constant operation with value `c`.
    pub fn constant(k: usize, c: u8) -> Result<Operation> {
        if c as usize >= k {
            return Err(Error::ValueOutOfRange {
                value: c as usize,
                k,
            });
        }
        Operation::from_fn(k, 1, |_| c)
    }

    /// The discriminator `t(x,y,z) = z` if `x = y`, else `x`.
    pub fn discriminator(k: usize) -> Result<Operation> {
        if k < 2 {
            return Err(Error::InvalidArgument(
                "the discriminator needs k ≥ 2".into(),
            ));
        }
        Operation::from_fn(k, 3, |a| if a[0] == a[1] { a[2] } else { a[0] })
    }

    /// `x_1 + … + x_n` over `{0, 1}`.
    pub fn xor_chain(arity: usize) -> Result<Operation> {
        Operation::from_fn(2, arity, |a| a.iter().fold(0, |acc, &x| acc ^ x))
    }

    /// A Boolean operation given as a predicate on the input bits.
    pub fn boolean(arity: usize, f: impl Fn(&[bool]) -> bool) -> Result<Operation> {
        let mut bits = vec![false; arity];
        Operation::from_fn(2, arity, |a| {
            for (b, &x) in bits.iter_mut().zip(a) {
                *b = x == 1;
            }
            f(&bits) as u8
        })
    }

    /// `g ∘ (h_1, …, h_m)`; all `h_i` share arity and base with `g`.
    pub fn compose(&self, hs: &[Operation]) -> Result<Operation> {
        if hs.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: hs.len(),
            });
        }
        let n = hs[0].arity;
        for h in hs {
            if h.k != self.k {
                return Err(Error::BaseMismatch {
                    left: self.k,
                    right: h.k,
                });
            }
            if h.arity != n {
                return Err(Error::ArityMismatch {
                    expected: n,
                    found: h.arity,
                });
            }
        }
        Ok(self.compose_unchecked(hs))
    }

    pub(crate) fn compose_unchecked(&self, hs: &[Operation]) -> Operation {
        let refs: Vec<&Operation> = hs.iter().collect();
        self.compose_refs(&refs)
    }

    pub(crate) fn compose_refs(&self, hs: &[&Operation]) -> Operation {
        let k = self.k;
        let len = hs[0].len();
        Operation {
            k,
            arity: hs[0].arity,
            cells: Cells::build(k, len, |j| {
                let code = hs.iter().fold(0, |acc, h| acc * k + h.value(j) as usize);
                self.value(code)
            }),
        }
    }

    /// The set of values taken by the operation.
    pub fn image(&self) -> BTreeSet<u8> {
        self.values().collect()
    }

    /// Bitmask form of [`Operation::image`].
    pub fn image_mask(&self) -> u32 {
        self.values().fold(0, |m, v| m | 1 << v)
    }

    /// `true` iff the operation maps `B^n` into `B`, for `B` given as a bitmask.
    pub fn preserves_subset(&self, subset: u32) -> bool {
        self.first_escape(subset).is_none()
    }

    fn first_escape(&self, subset: u32) -> Option<(Vec<u8>, u8)> {
        let elems: Vec<u8> = (0..self.k as u8)
            .filter(|&e| subset >> e & 1 == 1)
            .collect();
        if elems.is_empty() {
            return None;
        }
        let mut idx = vec![0usize; self.arity];
        let mut tuple = vec![elems[0]; self.arity];
        loop {
            let v = self.value(encode_unchecked(&tuple, self.k));
            if subset >> v & 1 == 0 {
                return Some((tuple, v));
            }
            if !advance(&mut idx, elems.len()) {
                return None;
            }
            for (t, &i) in tuple.iter_mut().zip(&idx) {
                *t = elems[i];
            }
        }
    }

    /// The restriction `f|_B`, with `B` relabelled to `0..|B|` by increasing value.
    pub fn restrict(&self, subset: &BTreeSet<u8>) -> Result<Operation> {
        if subset.is_empty() {
            return Err(Error::InvalidArgument(
                "restriction to the empty set".into(),
            ));
        }
        let mut mask = 0u32;
        for &b in subset {
            if b as usize >= self.k {
                return Err(Error::ValueOutOfRange {
                    value: b as usize,
                    k: self.k,
                });
            }
            mask |= 1 << b;
        }
        if let Some((tuple, value)) = self.first_escape(mask) {
            return Err(Error::NotPreserved { tuple, value });
        }
        let elems: Vec<u8> = subset.iter().copied().collect();
        let mut relabel = [0u8; MAX_BASE];
        for (i, &b) in elems.iter().enumerate() {
            relabel[b as usize] = i as u8;
        }
        let mut original = vec![0u8; self.arity];
        Operation::from_fn(elems.len(), self.arity, |a| {
            for (o, &x) in original.iter_mut().zip(a) {
                *o = elems[x as usize];
            }
            relabel[self.value(encode_unchecked(&original, self.k)) as usize]
        })
    }

    /// Adds fictitious trailing variables up to arity `d`.
    pub fn pad_arity(&self, d: usize) -> Result<Operation> {
        if d < self.arity {
            return Err(Error::InvalidArgument(format!(
                "cannot pad arity {} down to {d}",
                self.arity
            )));
        }
        let shift = cell_count(self.k, d - self.arity).ok_or_else(|| Error::CapExceeded {
            what: format!("{}^{d} cells", self.k),
            cap: MAX_CELLS as u64,
        })?;
        let len = check_shape(self.k, d)?;
        Ok(Operation {
            k: self.k,
            arity: d,
            cells: Cells::build(self.k, len, |j| self.value(j / shift)),
        })
    }

    /// Whether the value depends on coordinate `i` (0-based).
    pub fn depends_on(&self, i: usize) -> bool {
        let k = self.k;
        let stride = cell_count(k, self.arity - 1 - i).expect("validated");
        (0..self.len()).any(|j| {
            let digit = (j / stride) % k;
            digit == 0 && (1..k).any(|v| self.value(j + v * stride) != self.value(j))
        })
    }

    /// Number of coordinates the operation depends on.
    pub fn essential_arity(&self) -> usize {
        (0..self.arity).filter(|&i| self.depends_on(i)).count()
    }

    /// Table digits as a string; only meaningful for `k ≤ 10`.
    pub fn digits(&self) -> String {
        self.values().map(|v| char::from(b'0' + v)).collect()
    }
}

fn check_shape(k: usize, arity: usize) -> Result<usize> {
    if !(2..=MAX_BASE).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "base size {k} outside 2..={MAX_BASE}"
        )));
    }
    if arity == 0 {
        return Err(Error::InvalidArgument(
            "nullary operations are not supported".into(),
        ));
    }
    cell_count(k, arity).ok_or_else(|| Error::CapExceeded {
        what: format!("{k}^{arity} table cells"),
        cap: MAX_CELLS as u64,
    })
}

/// Odometer step over `idx ∈ base^len`; returns `false` after the last tuple.
pub(crate) fn advance(idx: &mut [usize], base: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

impl Ord for Operation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.k
            .cmp(&other.k)
            .then(self.arity.cmp(&other.arity))
            .then_with(|| self.values().cmp(other.values()))
    }
}

impl PartialOrd for Operation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.k, self.arity, self.digits())
    }
}

impl fmt::Debug for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operation({self})")
    }
}

impl FromStr for Operation {
    type Err = Error;

    /// Parses `k:n:digits`, one digit per table entry, `k ≤ 10`.
    fn from_str(text: &str) -> Result<Operation> {
        let parse_err = |reason: &str| Error::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = text.trim().splitn(3, ':');
        let (Some(k), Some(n), Some(digits)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err("expected k:n:digits"));
        };
        let k: usize = k.parse().map_err(|_| parse_err("k is not an integer"))?;
        let n: usize = n.parse().map_err(|_| parse_err("n is not an integer"))?;
        if !(2..=10).contains(&k) {
            return Err(parse_err("the text format supports 2 ≤ k ≤ 10"));
        }
        let table = digits
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .filter(|&d| (d as usize) < k)
                    .map(|d| d as u8)
                    .ok_or_else(|| parse_err(&format!("digit {c:?} is not below {k}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Operation::from_table(k, n, &table).map_err(|e| parse_err(&e.to_string()))
    }
}

impl serde::Serialize for Operation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
