// SPDX-License-Identifier: Apache-2.0

//! Clones on a finite set: generated clones materialized per arity by a
//! composition fixpoint, named clones given by membership predicates, and
//! the subalgebras and internal isomorphisms of the algebra `(A; C)`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::minors::OrbitTable;
use crate::ops::{advance, cell_count, encode_unchecked, Operation};

/// Subset of the base set as a bitmask (bit `i` set iff `i` is a member).
pub type ElemSet = u32;

pub(crate) fn elements(set: ElemSet) -> Vec<u8> {
    (0..32u8).filter(|&e| set >> e & 1 == 1).collect()
}

pub(crate) fn full_set(k: usize) -> ElemSet {
    ((1u64 << k) - 1) as ElemSet
}

/// Name of the environment variable overriding [`Caps::max_cells`].
pub const CAP_ENV: &str = "CLONE_MINOR_CAP";

/// Workload limits for materializing clones and searching tuple spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest `k^n` for which `C^(n)` is materialized when `k = 2`.
    pub max_cells_boolean: usize,
    /// Largest `k^n` for which `C^(n)` is materialized when `k > 2`.
    pub max_cells_general: usize,
    /// Largest number of candidate tables a predicate filter may scan.
    pub max_candidates: u64,
    /// Largest number of compositions one fixpoint may evaluate.
    pub max_compositions: u64,
    /// Largest `k^n` for orbit tables used by the decision procedure.
    pub max_tuples: usize,
    /// Largest `|C^(n)|^m` the brute-force minor search will try.
    pub brute_force_budget: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_cells_boolean: 32,
            max_cells_general: 16,
            max_candidates: 1 << 26,
            max_compositions: 200_000_000,
            max_tuples: 1 << 16,
            brute_force_budget: 100_000_000,
        }
    }
}

impl Caps {
    /// Defaults, with both cell caps replaced by `CLONE_MINOR_CAP` when set.
    pub fn from_env() -> Caps {
        let mut caps = Caps::default();
        if let Some(cap) = std::env::var(CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
        {
            caps.max_cells_boolean = cap;
            caps.max_cells_general = cap;
        }
        caps
    }

    fn max_cells(&self, k: usize) -> usize {
        if k == 2 {
            self.max_cells_boolean
        } else {
            self.max_cells_general
        }
    }

    pub(crate) fn check_cells(&self, k: usize, n: usize) -> Result<usize> {
        let cap = self.max_cells(k);
        match cell_count(k, n) {
            Some(cells) if cells <= cap => Ok(cells),
            _ => Err(Error::CapExceeded {
                what: format!("arity {n} on a {k}-element set ({k}^{n} table cells)"),
                cap: cap as u64,
            }),
        }
    }

    pub(crate) fn check_tuples(&self, k: usize, n: usize) -> Result<usize> {
        match cell_count(k, n) {
            Some(t) if t <= self.max_tuples => Ok(t),
            _ => Err(Error::CapExceeded {
                what: format!("{k}^{n} tuples"),
                cap: self.max_tuples as u64,
            }),
        }
    }
}

/// A binary relation on `{0, …, k−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRelation {
    k: usize,
    pairs: BTreeSet<(u8, u8)>,
}

impl BinaryRelation {
    pub fn new(k: usize, pairs: impl IntoIterator<Item = (u8, u8)>) -> Result<BinaryRelation> {
        let pairs: BTreeSet<(u8, u8)> = pairs.into_iter().collect();
        if let Some(&(a, b)) = pairs
            .iter()
            .find(|&&(a, b)| a as usize >= k || b as usize >= k)
        {
            return Err(Error::ValueOutOfRange {
                value: a.max(b) as usize,
                k,
            });
        }
        Ok(BinaryRelation { k, pairs })
    }

    /// The order `0 ≤ 1` on `{0, 1}`.
    pub fn boolean_order() -> BinaryRelation {
        BinaryRelation::new(2, [(0, 0), (0, 1), (1, 1)]).expect("valid")
    }

    /// `ρ₀ = {(0,0), (0,1), (1,0)}`.
    pub fn rho0() -> BinaryRelation {
        BinaryRelation::new(2, [(0, 0), (0, 1), (1, 0)]).expect("valid")
    }

    /// `ρ₁ = {(1,1), (1,0), (0,1)}`.
    pub fn rho1() -> BinaryRelation {
        BinaryRelation::new(2, [(1, 1), (1, 0), (0, 1)]).expect("valid")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn contains(&self, a: u8, b: u8) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u8, u8)> + '_ {
        self.pairs.iter().copied()
    }
}

/// Whether `f` maps coordinatewise `ρ`-related tuples to `ρ`-related values.
pub fn preserves_relation(f: &Operation, rho: &BinaryRelation) -> Result<bool> {
    if f.k() != rho.k {
        return Err(Error::BaseMismatch {
            left: f.k(),
            right: rho.k,
        });
    }
    let pairs: Vec<(u8, u8)> = rho.pairs().collect();
    if pairs.is_empty() {
        return Ok(true);
    }
    let n = f.arity();
    let mut idx = vec![0usize; n];
    let mut a = vec![0u8; n];
    let mut b = vec![0u8; n];
    loop {
        for i in 0..n {
            (a[i], b[i]) = pairs[idx[i]];
        }
        let fa = f.value(encode_unchecked(&a, f.k()));
        let fb = f.value(encode_unchecked(&b, f.k()));
        if !rho.contains(fa, fb) {
            return Ok(false);
        }
        if !advance(&mut idx, pairs.len()) {
            return Ok(true);
        }
    }
}

fn fixes(f: &Operation, c: u8) -> bool {
    f.value(encode_unchecked(&vec![c; f.arity()], f.k())) == c
}

fn is_self_dual(f: &Operation) -> bool {
    let last = f.len() - 1;
    // on {0,1} negating every coordinate maps code j to 2^n − 1 − j
    (0..f.len()).all(|j| f.value(last - j) == 1 - f.value(j))
}

fn is_affine(f: &Operation) -> bool {
    // f is affine iff f(a ⊕ b) = f(a) ⊕ f(b) ⊕ f(0) for all a, b
    let f0 = f.value(0);
    (0..f.len()).all(|a| (0..f.len()).all(|b| f.value(a ^ b) == f.value(a) ^ f.value(b) ^ f0))
}

/// Named clones: the Boolean clones of Post's lattice used here, and the
/// two maximal subclones `E`, `K` of `⟨t⟩` on larger sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedClone {
    /// All operations.
    O,
    T0,
    T1,
    /// `T0 ∩ T1`, the idempotent Boolean operations.
    Tid,
    /// Self-dual Boolean operations.
    S,
    /// The clone generated by the discriminator.
    D,
    /// Monotone Boolean operations.
    M,
    /// Linear (affine) Boolean operations.
    L,
    R0,
    R1,
    /// Members of `D` whose restriction to `{0,1}` is linear.
    E,
    /// Members of `D` whose restriction to `{0,1}` is monotone.
    K,
}

impl NamedClone {
    pub const ALL: [NamedClone; 12] = [
        NamedClone::O,
        NamedClone::T0,
        NamedClone::T1,
        NamedClone::Tid,
        NamedClone::S,
        NamedClone::D,
        NamedClone::M,
        NamedClone::L,
        NamedClone::R0,
        NamedClone::R1,
        NamedClone::E,
        NamedClone::K,
    ];

    pub fn id(self) -> &'static str {
        match self {
            NamedClone::O => "O",
            NamedClone::T0 => "T0",
            NamedClone::T1 => "T1",
            NamedClone::Tid => "Tid",
            NamedClone::S => "S",
            NamedClone::D => "D",
            NamedClone::M => "M",
            NamedClone::L => "L",
            NamedClone::R0 => "R0",
            NamedClone::R1 => "R1",
            NamedClone::E => "E",
            NamedClone::K => "K",
        }
    }

    pub fn from_id(id: &str) -> Option<NamedClone> {
        NamedClone::ALL.into_iter().find(|c| c.id() == id)
    }

    fn check_base(self, k: usize) -> Result<()> {
        let ok = match self {
            NamedClone::O | NamedClone::D => k >= 2,
            NamedClone::E | NamedClone::K => k >= 3,
            _ => k == 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedClone(format!(
                "{} is not defined on a {k}-element set",
                self.id()
            )))
        }
    }

    fn generators(self, k: usize) -> Option<Vec<Operation>> {
        let t = || Operation::discriminator(k).expect("k ≥ 2");
        let c = |v| Operation::constant(k, v).expect("in range");
        let and = || Operation::boolean(2, |x| x[0] && x[1]).expect("valid");
        let gens = match self {
            NamedClone::O => std::iter::once(t()).chain((0..k as u8).map(c)).collect(),
            NamedClone::T0 => vec![t(), c(0)],
            NamedClone::T1 => vec![t(), c(1)],
            NamedClone::Tid => vec![t(), and()],
            NamedClone::S => vec![t(), Operation::boolean(1, |x| !x[0]).expect("valid")],
            NamedClone::D => vec![t()],
            NamedClone::M => vec![
                and(),
                Operation::boolean(2, |x| x[0] || x[1]).expect("valid"),
                c(0),
                c(1),
            ],
            NamedClone::L => vec![Operation::xor_chain(2).expect("valid"), c(1)],
            NamedClone::R0 | NamedClone::R1 | NamedClone::E | NamedClone::K => return None,
        };
        Some(gens)
    }
}

impl fmt::Display for NamedClone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone)]
enum CloneKind {
    Generated(Vec<Operation>),
    Named(NamedClone),
}

/// A subuniverse of `(A; C)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subalgebra {
    universe: BTreeSet<u8>,
}

impl Subalgebra {
    fn from_mask(mask: ElemSet) -> Subalgebra {
        Subalgebra {
            universe: elements(mask).into_iter().collect(),
        }
    }

    pub fn universe(&self) -> &BTreeSet<u8> {
        &self.universe
    }

    pub fn mask(&self) -> ElemSet {
        self.universe.iter().fold(0, |m, &e| m | 1 << e)
    }
}

/// A partial bijection between subuniverses of `(A; C)` commuting with the clone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InternalIso {
    /// `map[x]` is the image of `x`, `None` outside the domain.
    map: Vec<Option<u8>>,
}

impl InternalIso {
    pub fn from_map(map: Vec<Option<u8>>) -> InternalIso {
        InternalIso { map }
    }

    pub fn identity(k: usize, domain: ElemSet) -> InternalIso {
        InternalIso {
            map: (0..k as u8)
                .map(|x| (domain >> x & 1 == 1).then_some(x))
                .collect(),
        }
    }

    /// Pairs `(x, ι(x))` in increasing order of `x`.
    pub fn pairs(&self) -> impl Iterator<Item = (u8, u8)> + '_ {
        self.map
            .iter()
            .enumerate()
            .filter_map(|(x, y)| y.map(|y| (x as u8, y)))
    }

    pub fn domain(&self) -> ElemSet {
        self.pairs().fold(0, |m, (x, _)| m | 1 << x)
    }

    pub fn range(&self) -> ElemSet {
        self.pairs().fold(0, |m, (_, y)| m | 1 << y)
    }

    #[inline]
    pub fn apply(&self, x: u8) -> Option<u8> {
        self.map.get(x as usize).copied().flatten()
    }

    /// Coordinatewise image; `None` unless every coordinate is in the domain.
    pub fn apply_tuple(&self, tuple: &[u8]) -> Option<Vec<u8>> {
        tuple.iter().map(|&x| self.apply(x)).collect()
    }

    pub fn inverse(&self) -> InternalIso {
        let mut map = vec![None; self.map.len()];
        for (x, y) in self.pairs() {
            map[y as usize] = Some(x);
        }
        InternalIso { map }
    }

    /// `other ∘ self`, or `None` when the composite has empty domain.
    pub fn then(&self, other: &InternalIso) -> Option<InternalIso> {
        let map: Vec<Option<u8>> = self
            .map
            .iter()
            .map(|y| y.and_then(|y| other.apply(y)))
            .collect();
        map.iter()
            .any(Option::is_some)
            .then_some(InternalIso { map })
    }

    /// Restriction to `domain` (which must lie inside the current domain).
    pub fn restrict(&self, domain: ElemSet) -> InternalIso {
        InternalIso {
            map: self
                .map
                .iter()
                .enumerate()
                .map(|(x, y)| if domain >> x & 1 == 1 { *y } else { None })
                .collect(),
        }
    }

    /// Whether `f` commutes with this partial bijection on all tuples over its domain.
    pub fn is_preserved_by(&self, f: &Operation) -> bool {
        let dom = elements(self.domain());
        if dom.is_empty() {
            return true;
        }
        let n = f.arity();
        let k = f.k();
        let mut idx = vec![0usize; n];
        let mut a = vec![dom[0]; n];
        let mut b = vec![0u8; n];
        loop {
            for i in 0..n {
                a[i] = dom[idx[i]];
                b[i] = self.apply(a[i]).expect("in domain");
            }
            let fa = f.value(encode_unchecked(&a, k));
            match self.apply(fa) {
                Some(img) if img == f.value(encode_unchecked(&b, k)) => {}
                _ => return false,
            }
            if !advance(&mut idx, dom.len()) {
                return true;
            }
        }
    }
}

impl fmt::Display for InternalIso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs().map(|(x, y)| format!("{x}->{y}")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A clone on `{0, …, k−1}`, either generated by operations or named.
///
/// Per-arity member sets and orbit tables are cached; the caches only grow.
pub struct CloneHandle {
    k: usize,
    kind: CloneKind,
    name: String,
    caps: Caps,
    members: Mutex<BTreeMap<usize, Arc<Vec<Operation>>>>,
    isos: OnceLock<Result<Arc<Vec<InternalIso>>>>,
    discriminator: OnceLock<Result<bool>>,
    d_isos: OnceLock<Arc<Vec<InternalIso>>>,
    pub(crate) orbit_cache: Mutex<BTreeMap<usize, Arc<OrbitTable>>>,
}

impl fmt::Debug for CloneHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CloneHandle")
            .field("k", &self.k)
            .field("name", &self.name)
            .finish()
    }
}

impl CloneHandle {
    fn build(k: usize, kind: CloneKind, name: String) -> CloneHandle {
        CloneHandle {
            k,
            kind,
            name,
            caps: Caps::from_env(),
            members: Mutex::new(BTreeMap::new()),
            isos: OnceLock::new(),
            discriminator: OnceLock::new(),
            d_isos: OnceLock::new(),
            orbit_cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn named(clone: NamedClone, k: usize) -> Result<CloneHandle> {
        clone.check_base(k)?;
        Ok(CloneHandle::build(
            k,
            CloneKind::Named(clone),
            clone.id().to_string(),
        ))
    }

    /// The clone `⟨gens⟩` on a `k`-element set.
    pub fn generated(k: usize, gens: Vec<Operation>) -> Result<CloneHandle> {
        if !(2..=crate::ops::MAX_BASE).contains(&k) {
            return Err(Error::InvalidArgument(format!(
                "base size {k} out of range"
            )));
        }
        if let Some(g) = gens.iter().find(|g| g.k() != k) {
            return Err(Error::BaseMismatch {
                left: k,
                right: g.k(),
            });
        }
        let mut gens = gens;
        gens.sort();
        gens.dedup();
        let name = format!(
            "gen:{}",
            gens.iter()
                .map(|g| g.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(CloneHandle::build(k, CloneKind::Generated(gens), name))
    }

    /// Parses a clone identifier: a [`NamedClone`] id or `gen:<op>,<op>,…`.
    /// `k` is used for named clones and for `gen:` with no operations.
    pub fn parse(id: &str, k: usize) -> Result<CloneHandle> {
        if let Some(list) = id.strip_prefix("gen:") {
            let gens = list
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.parse::<Operation>())
                .collect::<Result<Vec<_>>>()?;
            let k = gens.first().map_or(k, Operation::k);
            return CloneHandle::generated(k, gens);
        }
        match NamedClone::from_id(id) {
            Some(c) => CloneHandle::named(c, k),
            None => Err(Error::UnsupportedClone(format!("unknown clone id {id:?}"))),
        }
    }

    pub fn with_caps(mut self, caps: Caps) -> CloneHandle {
        self.caps = caps;
        self
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn named_id(&self) -> Option<NamedClone> {
        match self.kind {
            CloneKind::Named(c) => Some(c),
            CloneKind::Generated(_) => None,
        }
    }

    /// A generating set, when one is known.
    pub fn generators(&self) -> Option<Vec<Operation>> {
        match &self.kind {
            CloneKind::Generated(g) => Some(g.clone()),
            CloneKind::Named(c) => c.generators(self.k),
        }
    }

    fn require_generators(&self) -> Result<Vec<Operation>> {
        self.generators().ok_or_else(|| {
            Error::UnsupportedClone(format!("{} has no known generating set", self.name))
        })
    }

    fn check_base(&self, f: &Operation) -> Result<()> {
        if f.k() != self.k {
            return Err(Error::BaseMismatch {
                left: self.k,
                right: f.k(),
            });
        }
        Ok(())
    }

    /// `true` iff `f` belongs to the clone.
    pub fn contains(&self, f: &Operation) -> Result<bool> {
        self.check_base(f)?;
        match &self.kind {
            CloneKind::Named(c) => self.named_contains(*c, f),
            CloneKind::Generated(gens) => {
                if gens.contains(f) {
                    return Ok(true);
                }
                if self.is_discriminator()? {
                    // a discriminator clone is exactly the set of operations
                    // preserving its internal isomorphisms
                    Ok(self.internal_isos()?.iter().all(|i| i.is_preserved_by(f)))
                } else {
                    Ok(self.generate_arity(f.arity())?.binary_search(f).is_ok())
                }
            }
        }
    }

    fn named_contains(&self, c: NamedClone, f: &Operation) -> Result<bool> {
        Ok(match c {
            NamedClone::O => true,
            NamedClone::T0 => fixes(f, 0),
            NamedClone::T1 => fixes(f, 1),
            NamedClone::Tid => fixes(f, 0) && fixes(f, 1),
            NamedClone::S => is_self_dual(f),
            NamedClone::D if self.k == 2 => fixes(f, 0) && fixes(f, 1) && is_self_dual(f),
            NamedClone::D => self.preserves_discriminator_isos(f)?,
            NamedClone::M => preserves_relation(f, &BinaryRelation::boolean_order())?,
            NamedClone::L => is_affine(f),
            NamedClone::R0 => preserves_relation(f, &BinaryRelation::rho0())?,
            NamedClone::R1 => preserves_relation(f, &BinaryRelation::rho1())?,
            NamedClone::E | NamedClone::K => {
                if !self.preserves_discriminator_isos(f)? {
                    return Ok(false);
                }
                let on_pair = f.restrict(&BTreeSet::from([0, 1]))?;
                if c == NamedClone::E {
                    is_affine(&on_pair)
                } else {
                    preserves_relation(&on_pair, &BinaryRelation::boolean_order())?
                }
            }
        })
    }

    /// Membership in `⟨t⟩`: preserving every bijection between equal-size subsets.
    fn preserves_discriminator_isos(&self, f: &Operation) -> Result<bool> {
        let isos = self.d_isos.get_or_init(|| {
            let t = Operation::discriminator(self.k).expect("k ≥ 2");
            Arc::new(compute_isos(self.k, &[t]))
        });
        Ok(isos.iter().all(|i| i.is_preserved_by(f)))
    }

    /// `true` iff the clone contains the discriminator.
    pub fn is_discriminator(&self) -> Result<bool> {
        self.discriminator
            .get_or_init(|| {
                let t = Operation::discriminator(self.k)?;
                match &self.kind {
                    CloneKind::Named(c) => self.named_contains(*c, &t),
                    CloneKind::Generated(gens) if gens.contains(&t) => Ok(true),
                    CloneKind::Generated(_) => {
                        Ok(self.generate_arity(3)?.binary_search(&t).is_ok())
                    }
                }
            })
            .clone()
    }

    /// `C^(n)` as a sorted list, computed once per arity.
    pub fn members(&self, n: usize) -> Result<Arc<Vec<Operation>>> {
        if let Some(m) = self.members.lock().expect("poisoned").get(&n) {
            return Ok(m.clone());
        }
        let computed = match self.kind {
            CloneKind::Generated(_) => self.closure(n)?,
            CloneKind::Named(NamedClone::D) if self.k > 2 => self.closure(n)?,
            CloneKind::Named(_) => self.filter(n)?,
        };
        let computed = Arc::new(computed);
        self.members
            .lock()
            .expect("poisoned")
            .entry(n)
            .or_insert(computed.clone());
        Ok(computed)
    }

    /// All `n`-ary term operations of the generators.
    pub fn generate_arity(&self, n: usize) -> Result<Arc<Vec<Operation>>> {
        if let CloneKind::Generated(_) = self.kind {
            return self.members(n);
        }
        Ok(Arc::new(self.closure(n)?))
    }

    /// All `n`-ary operations satisfying the membership test.
    pub fn enumerate_arity(&self, n: usize) -> Result<Arc<Vec<Operation>>> {
        if let CloneKind::Named(_) = self.kind {
            return Ok(Arc::new(self.filter(n)?));
        }
        if !self.is_discriminator()? {
            return Err(Error::UnsupportedClone(format!(
                "{} has no membership test other than generation",
                self.name
            )));
        }
        Ok(Arc::new(self.filter(n)?))
    }

    fn filter(&self, n: usize) -> Result<Vec<Operation>> {
        let cells = self.caps.check_cells(self.k, n)?;
        let total = (self.k as u64)
            .checked_pow(cells as u32)
            .filter(|&t| t <= self.caps.max_candidates);
        if total.is_none() {
            return Err(Error::CapExceeded {
                what: format!("{}^{cells} candidate operations", self.k),
                cap: self.caps.max_candidates,
            });
        }
        let mut out = Vec::new();
        for f in Operation::all(self.k, n)? {
            if self.contains(&f)? {
                out.push(f);
            }
        }
        Ok(out)
    }

    /// Composition fixpoint from the projections, processing only newly added
    /// operations in each round.
    fn closure(&self, n: usize) -> Result<Vec<Operation>> {
        self.caps.check_cells(self.k, n)?;
        let gens = self.require_generators()?;
        let mut list: Vec<Operation> = (1..=n)
            .map(|i| Operation::projection(self.k, n, i))
            .collect::<Result<_>>()?;
        let mut seen: HashSet<Operation> = list.iter().cloned().collect();
        let mut old_end = 0;
        let mut work: u64 = 0;
        while old_end < list.len() {
            let cur_end = list.len();
            let mut fresh = Vec::new();
            for g in &gens {
                let m = g.arity();
                for pivot in 0..m {
                    // coordinates before the pivot are old, the pivot is new,
                    // coordinates after it range over everything so far
                    let ranges: Vec<(usize, usize)> = (0..m)
                        .map(|p| match p.cmp(&pivot) {
                            std::cmp::Ordering::Less => (0, old_end),
                            std::cmp::Ordering::Equal => (old_end, cur_end),
                            std::cmp::Ordering::Greater => (0, cur_end),
                        })
                        .collect();
                    if ranges.iter().any(|&(lo, hi)| lo >= hi) {
                        continue;
                    }
                    let count = ranges
                        .iter()
                        .fold(1u64, |acc, &(lo, hi)| acc.saturating_mul((hi - lo) as u64));
                    work = work.saturating_add(count);
                    if work > self.caps.max_compositions {
                        return Err(Error::CapExceeded {
                            what: format!("composition fixpoint for {} at arity {n}", self.name),
                            cap: self.caps.max_compositions,
                        });
                    }
                    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                    loop {
                        let args: Vec<&Operation> = idx.iter().map(|&i| &list[i]).collect();
                        let h = g.compose_refs(&args);
                        if !seen.contains(&h) {
                            seen.insert(h.clone());
                            fresh.push(h);
                        }
                        if !step(&mut idx, &ranges) {
                            break;
                        }
                    }
                }
            }
            old_end = cur_end;
            list.extend(fresh);
        }
        list.sort();
        Ok(list)
    }

    /// Least subuniverse containing `set`.
    pub fn generated_subuniverse_of(&self, set: ElemSet) -> Result<ElemSet> {
        let gens = self.require_generators()?;
        Ok(close_under(set, &gens))
    }

    /// All nonempty subuniverses, ordered by bitmask.
    pub fn subalgebras(&self) -> Result<Vec<Subalgebra>> {
        let gens = self.require_generators()?;
        Ok(subuniverse_masks(self.k, &gens)
            .into_iter()
            .map(Subalgebra::from_mask)
            .collect())
    }

    /// All partial bijections between subuniverses that commute with every generator.
    pub fn internal_isos(&self) -> Result<Arc<Vec<InternalIso>>> {
        self.isos
            .get_or_init(|| {
                let gens = self.require_generators()?;
                Ok(Arc::new(compute_isos(self.k, &gens)))
            })
            .clone()
    }

    /// Whether every generator of `self` lies in `other`.
    pub fn is_subclone_of(&self, other: &CloneHandle) -> Result<bool> {
        if self.k != other.k {
            return Ok(false);
        }
        for g in self.require_generators()? {
            if !other.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Odometer over the product of half-open index ranges.
fn step(idx: &mut [usize], ranges: &[(usize, usize)]) -> bool {
    for p in (0..idx.len()).rev() {
        idx[p] += 1;
        if idx[p] < ranges[p].1 {
            return true;
        }
        idx[p] = ranges[p].0;
    }
    false
}

fn close_under(start: ElemSet, gens: &[Operation]) -> ElemSet {
    let mut set = start;
    loop {
        let mut next = set;
        for g in gens {
            next |= image_on(g, set);
        }
        if next == set {
            return set;
        }
        set = next;
    }
}

/// Values of `g` on tuples over `set`.
fn image_on(g: &Operation, set: ElemSet) -> ElemSet {
    let elems = elements(set);
    if elems.is_empty() {
        return 0;
    }
    let n = g.arity();
    let mut idx = vec![0usize; n];
    let mut tuple = vec![0u8; n];
    let mut out = 0;
    loop {
        for (t, &i) in tuple.iter_mut().zip(&idx) {
            *t = elems[i];
        }
        out |= 1 << g.value(encode_unchecked(&tuple, g.k()));
        if !advance(&mut idx, elems.len()) {
            return out;
        }
    }
}

fn subuniverse_masks(k: usize, gens: &[Operation]) -> Vec<ElemSet> {
    (1..=full_set(k))
        .filter(|&s| close_under(s, gens) == s)
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub(crate) fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut ps = permutations(n);
    ps.sort();
    ps
}

fn compute_isos(k: usize, gens: &[Operation]) -> Vec<InternalIso> {
    let subs = subuniverse_masks(k, gens);
    let mut out = Vec::new();
    for &b in &subs {
        for &c in &subs {
            if b.count_ones() != c.count_ones() {
                continue;
            }
            let from = elements(b);
            let to = elements(c);
            for perm in all_permutations(from.len()) {
                let mut map = vec![None; k];
                for (i, &x) in from.iter().enumerate() {
                    map[x as usize] = Some(to[perm[i]]);
                }
                let iso = InternalIso { map };
                if gens.iter().all(|g| iso.is_preserved_by(g)) {
                    out.push(iso);
                }
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(s: &str) -> Operation {
        s.parse().unwrap()
    }

    fn gen(k: usize, gens: &[&str]) -> CloneHandle {
        CloneHandle::generated(k, gens.iter().map(|s| op(s)).collect()).unwrap()
    }

    fn named(c: NamedClone) -> CloneHandle {
        CloneHandle::named(c, 2).unwrap()
    }

    #[test]
    fn discriminator_clone_small_arities() {
        let d = gen(2, &["2:3:01001101"]);
        assert_eq!(op("2:3:01001101"), Operation::discriminator(2).unwrap());
        assert_eq!(
            *d.generate_arity(1).unwrap(),
            vec![Operation::identity(2).unwrap()]
        );
        assert_eq!(
            *d.generate_arity(2).unwrap(),
            vec![op("2:2:0011"), op("2:2:0101")]
        );
    }

    #[test]
    fn empty_generating_set_gives_projections() {
        let p = CloneHandle::parse("gen:", 2).unwrap();
        for n in 1..=3 {
            let members = p.generate_arity(n).unwrap();
            assert_eq!(members.len(), n);
            for i in 1..=n {
                assert!(members.contains(&Operation::projection(2, n, i).unwrap()));
            }
        }
    }

    #[test]
    fn predicate_enumeration_anchors() {
        // brute-force filters: Dedekind numbers for M, fixed points for Tid, self-duality for S
        let m = named(NamedClone::M);
        let counts: Vec<usize> = (1..=3)
            .map(|n| m.enumerate_arity(n).unwrap().len())
            .collect();
        assert_eq!(counts, vec![3, 6, 20]);
        assert_eq!(
            *named(NamedClone::Tid).enumerate_arity(1).unwrap(),
            vec![op("2:1:01")]
        );
        assert_eq!(
            *named(NamedClone::S).enumerate_arity(1).unwrap(),
            vec![op("2:1:01"), op("2:1:10")]
        );
    }

    #[test]
    fn membership() {
        let d = gen(2, &["2:3:01001101"]);
        let x = Operation::xor_chain(2).unwrap();
        assert!(d.contains(&Operation::discriminator(2).unwrap()).unwrap());
        assert!(!d.contains(&x).unwrap());
        assert!(!named(NamedClone::M).contains(&x).unwrap());
        let d3 = CloneHandle::parse("D", 3).unwrap();
        assert!(d3.contains(&Operation::discriminator(3).unwrap()).unwrap());
        assert!(!d3.contains(&Operation::constant(3, 0).unwrap()).unwrap());
        assert!(matches!(
            d.contains(&Operation::identity(3).unwrap()),
            Err(Error::BaseMismatch { .. })
        ));
    }

    #[test]
    fn relation_preservation() {
        let rho0 = BinaryRelation::rho0();
        assert!(preserves_relation(&Operation::constant(2, 0).unwrap(), &rho0).unwrap());
        assert!(!preserves_relation(&Operation::constant(2, 1).unwrap(), &rho0).unwrap());
        assert!(!preserves_relation(
            &Operation::xor_chain(2).unwrap(),
            &BinaryRelation::boolean_order()
        )
        .unwrap());
        assert!(BinaryRelation::new(2, [(0, 2)]).is_err());
    }

    #[test]
    fn subalgebra_lists() {
        let d3 = CloneHandle::parse("D", 3).unwrap();
        assert_eq!(d3.subalgebras().unwrap().len(), 7);
        let masks: Vec<ElemSet> = gen(2, &[])
            .subalgebras()
            .unwrap()
            .iter()
            .map(Subalgebra::mask)
            .collect();
        assert_eq!(masks, vec![0b01, 0b10, 0b11]);
        let masks: Vec<ElemSet> = gen(2, &["2:1:00"])
            .subalgebras()
            .unwrap()
            .iter()
            .map(Subalgebra::mask)
            .collect();
        assert_eq!(masks, vec![0b01, 0b11]);
    }

    #[test]
    fn internal_iso_counts() {
        // all bijections between equal-size subsets: 4 between singletons plus 2 on {0,1}
        assert_eq!(gen(2, &["2:3:01001101"]).internal_isos().unwrap().len(), 6);
        // Σ_r C(3,r)²·r! = 9 + 18 + 6
        assert_eq!(
            CloneHandle::parse("D", 3)
                .unwrap()
                .internal_isos()
                .unwrap()
                .len(),
            33
        );
        let neg = gen(2, &["2:1:10"]);
        let isos = neg.internal_isos().unwrap();
        let shown: Vec<String> = isos.iter().map(|i| i.to_string()).collect();
        assert_eq!(shown, vec!["{0->0,1->1}", "{0->1,1->0}"]);
    }

    #[test]
    fn iso_family_is_closed() {
        for clone in [
            CloneHandle::parse("D", 3).unwrap(),
            named(NamedClone::T0),
            named(NamedClone::S),
        ] {
            let isos = clone.internal_isos().unwrap();
            let set: BTreeSet<&InternalIso> = isos.iter().collect();
            for s in clone.subalgebras().unwrap() {
                assert!(set.contains(&InternalIso::identity(clone.k(), s.mask())));
            }
            for a in isos.iter() {
                assert!(set.contains(&a.inverse()));
                for b in isos.iter() {
                    if let Some(c) = a.then(b) {
                        assert!(set.contains(&c), "{a} then {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn the_six_discriminator_clones() {
        let t = Operation::discriminator(2).unwrap();
        let disc: Vec<&str> = NamedClone::ALL
            .into_iter()
            .filter_map(|c| CloneHandle::named(c, 2).ok())
            .filter(|c| c.contains(&t).unwrap())
            .map(|c| c.named_id().unwrap().id())
            .collect();
        assert_eq!(disc, vec!["O", "T0", "T1", "Tid", "S", "D"]);
    }

    #[test]
    fn maximal_subclones_of_d() {
        let d3 = CloneHandle::parse("D", 3).unwrap();
        let e = CloneHandle::parse("E", 3).unwrap();
        let k = CloneHandle::parse("K", 3).unwrap();
        let t = Operation::discriminator(3).unwrap();
        assert!(d3.contains(&t).unwrap());
        assert!(!e.contains(&t).unwrap());
        assert!(!k.contains(&t).unwrap());
        // the binary members of D on three elements are the two projections
        let binary = d3.members(2).unwrap();
        assert_eq!(binary.len(), 2);
        for p in binary.iter() {
            assert!(e.contains(p).unwrap() && k.contains(p).unwrap());
        }
        assert!(CloneHandle::parse("E", 2).is_err());
    }

    #[test]
    fn caps_are_enforced() {
        let o = named(NamedClone::O).with_caps(Caps {
            max_cells_boolean: 4,
            ..Caps::default()
        });
        assert!(matches!(
            o.enumerate_arity(3),
            Err(Error::CapExceeded { .. })
        ));
        let d3 = CloneHandle::parse("D", 3).unwrap();
        assert!(matches!(d3.members(3), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn unknown_ids() {
        assert!(matches!(
            CloneHandle::parse("Q", 2),
            Err(Error::UnsupportedClone(_))
        ));
        assert!(CloneHandle::parse("T0", 3).is_err());
        assert!(CloneHandle::parse("gen:2:1:2", 2).is_err());
    }
}
