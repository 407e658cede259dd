// SPDX-License-Identifier: Apache-2.0

//! Boolean discriminator clones: invariant labels and the known class posets.
//!
//! For `C ∈ {O, T0, T1, Tid, S, D}` the relation `f ≤_C g` holds iff
//! `f(0…0) = g(0…0)` when `C ⊆ T0`, `f(1…1) = g(1…1)` when `C ⊆ T1`, and
//! `Im^[d_C](f) ⊆ Im^[d_C](g)`.

use std::collections::BTreeSet;
use std::fmt;

use crate::clones::{CloneHandle, NamedClone};
use crate::error::{Error, Result};
use crate::ops::Operation;
use crate::poset::{Poset, PosetNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BooleanClone {
    O,
    T0,
    T1,
    Tid,
    S,
    D,
}

impl BooleanClone {
    pub const ALL: [BooleanClone; 6] = [
        BooleanClone::O,
        BooleanClone::T0,
        BooleanClone::T1,
        BooleanClone::Tid,
        BooleanClone::S,
        BooleanClone::D,
    ];

    pub fn from_named(c: NamedClone) -> Option<BooleanClone> {
        Some(match c {
            NamedClone::O => BooleanClone::O,
            NamedClone::T0 => BooleanClone::T0,
            NamedClone::T1 => BooleanClone::T1,
            NamedClone::Tid => BooleanClone::Tid,
            NamedClone::S => BooleanClone::S,
            NamedClone::D => BooleanClone::D,
            _ => return None,
        })
    }

    pub fn from_id(id: &str) -> Option<BooleanClone> {
        NamedClone::from_id(id).and_then(BooleanClone::from_named)
    }

    pub fn named(self) -> NamedClone {
        match self {
            BooleanClone::O => NamedClone::O,
            BooleanClone::T0 => NamedClone::T0,
            BooleanClone::T1 => NamedClone::T1,
            BooleanClone::Tid => NamedClone::Tid,
            BooleanClone::S => NamedClone::S,
            BooleanClone::D => NamedClone::D,
        }
    }

    pub fn id(self) -> &'static str {
        self.named().id()
    }

    pub fn handle(self) -> CloneHandle {
        CloneHandle::named(self.named(), 2).expect("Boolean clones exist on two elements")
    }

    /// Size of every `~_C`-block.
    pub fn d_c(self) -> usize {
        if self.within_s() {
            2
        } else {
            1
        }
    }

    pub fn within_t0(self) -> bool {
        matches!(self, BooleanClone::T0 | BooleanClone::Tid | BooleanClone::D)
    }

    pub fn within_t1(self) -> bool {
        matches!(self, BooleanClone::T1 | BooleanClone::Tid | BooleanClone::D)
    }

    pub fn within_s(self) -> bool {
        matches!(self, BooleanClone::S | BooleanClone::D)
    }
}

impl fmt::Display for BooleanClone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// A set of nonempty subsets of `{0,1}`: bit 0 is `{0}`, bit 1 is `{1}`,
/// bit 2 is `{0,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ImageFamily(u8);

impl ImageFamily {
    const PARTS: [&'static str; 3] = ["0", "1", "01"];

    pub fn from_bits(bits: u8) -> Result<ImageFamily> {
        if bits == 0 || bits > 7 {
            return Err(Error::InvalidArgument(format!(
                "image family bits {bits} out of range"
            )));
        }
        Ok(ImageFamily(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    fn of_pair(x: u8, y: u8) -> u8 {
        match (x, y) {
            (0, 0) => 1,
            (1, 1) => 2,
            _ => 4,
        }
    }

    pub fn sets(self) -> BTreeSet<BTreeSet<u8>> {
        let all = [
            BTreeSet::from([0]),
            BTreeSet::from([1]),
            BTreeSet::from([0, 1]),
        ];
        (0..3)
            .filter(|i| self.0 >> i & 1 == 1)
            .map(|i| all[i].clone())
            .collect()
    }

    pub fn is_subset(self, other: ImageFamily) -> bool {
        self.0 & !other.0 == 0
    }

    /// The single set in a one-element family of singletons.
    fn constant(self) -> Option<u8> {
        match self.0 {
            1 => Some(0),
            2 => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for ImageFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = (0..3)
            .filter(|i| self.0 >> i & 1 == 1)
            .map(|i| Self::PARTS[i])
            .collect();
        f.write_str(&parts.join(","))
    }
}

fn require_boolean(f: &Operation) -> Result<()> {
    if f.k() != 2 {
        return Err(Error::BaseMismatch {
            left: 2,
            right: f.k(),
        });
    }
    Ok(())
}

/// `{ {f(a), f(ā)} : a ∈ A^n }`.
pub fn im2(f: &Operation) -> Result<ImageFamily> {
    require_boolean(f)?;
    let last = f.len() - 1;
    let bits = (0..=last / 2).fold(0, |m, a| {
        m | ImageFamily::of_pair(f.value(a), f.value(last - a))
    });
    Ok(ImageFamily(bits))
}

/// `{ {f(a)} : a ∈ A^n }`.
pub fn im1(f: &Operation) -> Result<ImageFamily> {
    require_boolean(f)?;
    Ok(ImageFamily(f.image_mask() as u8))
}

fn im_d(f: &Operation, c: BooleanClone) -> Result<ImageFamily> {
    if c.d_c() == 2 {
        im2(f)
    } else {
        im1(f)
    }
}

fn bottom(f: &Operation) -> u8 {
    f.value(0)
}

fn top(f: &Operation) -> u8 {
    f.value(f.len() - 1)
}

/// `f ≤_C g` by the endpoint and image-family criterion.
pub fn boolean_minor(f: &Operation, g: &Operation, c: BooleanClone) -> Result<bool> {
    require_boolean(f)?;
    require_boolean(g)?;
    Ok((!c.within_t0() || bottom(f) == bottom(g))
        && (!c.within_t1() || top(f) == top(g))
        && im_d(f, c)?.is_subset(im_d(g, c)?))
}

/// Invariant naming the `C`-class of a Boolean function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassLabel {
    pub clone: BooleanClone,
    pub d: u8,
    pub a: Option<u8>,
    pub b: Option<u8>,
    pub family: ImageFamily,
}

impl ClassLabel {
    /// All labels for the clone that name a nonempty class.
    pub fn all(c: BooleanClone) -> Vec<ClassLabel> {
        let mut out = BTreeSet::new();
        let ends = |used: bool| {
            if used {
                vec![Some(0u8), Some(1)]
            } else {
                vec![None]
            }
        };
        let families: Vec<u8> = if c.d_c() == 2 {
            (1..8).collect()
        } else {
            (1..4).collect()
        };
        for a in ends(c.within_t0()) {
            for b in ends(c.within_t1()) {
                for &bits in &families {
                    let label = ClassLabel {
                        clone: c,
                        d: c.d_c() as u8,
                        a,
                        b,
                        family: ImageFamily(bits),
                    };
                    if label.is_realizable() {
                        out.insert(label);
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    fn is_realizable(&self) -> bool {
        let fam = self.family.0;
        if self.d == 2 {
            // {f(0…0), f(1…1)} is itself one of the pairs
            match (self.a, self.b) {
                (Some(a), Some(b)) => fam & ImageFamily::of_pair(a, b) != 0,
                _ => true,
            }
        } else {
            [self.a, self.b]
                .iter()
                .flatten()
                .all(|&v| fam >> v & 1 == 1)
        }
    }

    pub fn parse(text: &str, c: BooleanClone) -> Result<ClassLabel> {
        ClassLabel::all(c)
            .into_iter()
            .find(|l| l.to_string() == text.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("{text:?} is not a class label for {c}")))
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.family.constant() {
            return write!(f, "[{v}]");
        }
        let end = |x: Option<u8>| x.map_or("*".to_string(), |v| v.to_string());
        if self.d == 2 {
            write!(f, "F{{{}}}", self.family)?;
            if self.a.is_some() || self.b.is_some() {
                write!(f, "^{{{}{}}}", end(self.a), end(self.b))?;
            }
            Ok(())
        } else {
            f.write_str("N")?;
            if self.a.is_some() || self.b.is_some() {
                write!(f, "^{{{}{}}}", end(self.a), end(self.b))?;
            }
            Ok(())
        }
    }
}

pub fn class_label(f: &Operation, c: BooleanClone) -> Result<ClassLabel> {
    require_boolean(f)?;
    Ok(ClassLabel {
        clone: c,
        d: c.d_c() as u8,
        a: c.within_t0().then(|| bottom(f)),
        b: c.within_t1().then(|| top(f)),
        family: im_d(f, c)?,
    })
}

struct Golden {
    nodes: &'static [(&'static str, &'static str, &'static str)],
    covers: &'static [(&'static str, &'static str)],
}

const GOLDEN_D: Golden = Golden {
    nodes: &[
        ("[0]", "0", "2:1:00"),
        ("F{0,01}^{00}", "xȳ", "2:2:0010"),
        ("F{0,1}^{00}", "x+y", "2:2:0110"),
        ("F{0,1,01}^{00}", "xy+z", "2:3:01010110"),
        ("F{01}^{01}", "x", "2:1:01"),
        ("F{0,01}^{01}", "xy", "2:2:0001"),
        ("F{1,01}^{01}", "x∨y", "2:2:0111"),
        ("F{0,1,01}^{01}", "xȳ+z", "2:3:01011001"),
        ("F{01}^{10}", "x̄", "2:1:10"),
        ("F{0,01}^{10}", "x̄ȳ", "2:2:1000"),
        ("F{1,01}^{10}", "x̄∨ȳ", "2:2:1110"),
        ("F{0,1,01}^{10}", "xȳ+z̄", "2:3:10100110"),
        ("[1]", "1", "2:1:11"),
        ("F{0,1}^{11}", "x+ȳ", "2:2:1001"),
        ("F{1,01}^{11}", "x̄∨y", "2:2:1101"),
        ("F{0,1,01}^{11}", "xy+z̄", "2:3:10101001"),
    ],
    covers: &[
        ("[0]", "F{0,01}^{00}"),
        ("[0]", "F{0,1}^{00}"),
        ("F{0,01}^{00}", "F{0,1,01}^{00}"),
        ("F{0,1}^{00}", "F{0,1,01}^{00}"),
        ("F{01}^{01}", "F{0,01}^{01}"),
        ("F{01}^{01}", "F{1,01}^{01}"),
        ("F{0,01}^{01}", "F{0,1,01}^{01}"),
        ("F{1,01}^{01}", "F{0,1,01}^{01}"),
        ("F{01}^{10}", "F{0,01}^{10}"),
        ("F{01}^{10}", "F{1,01}^{10}"),
        ("F{0,01}^{10}", "F{0,1,01}^{10}"),
        ("F{1,01}^{10}", "F{0,1,01}^{10}"),
        ("[1]", "F{0,1}^{11}"),
        ("[1]", "F{1,01}^{11}"),
        ("F{0,1}^{11}", "F{0,1,01}^{11}"),
        ("F{1,01}^{11}", "F{0,1,01}^{11}"),
    ],
};

const GOLDEN_S: Golden = Golden {
    nodes: &[
        ("[0]", "0", "2:1:00"),
        ("F{01}", "x", "2:1:01"),
        ("[1]", "1", "2:1:11"),
        ("F{0,01}", "xy", "2:2:0001"),
        ("F{0,1}", "x+y", "2:2:0110"),
        ("F{1,01}", "x∨y", "2:2:0111"),
        ("F{0,1,01}", "xy+z", "2:3:01010110"),
    ],
    covers: &[
        ("[0]", "F{0,01}"),
        ("[0]", "F{0,1}"),
        ("F{01}", "F{0,01}"),
        ("F{01}", "F{1,01}"),
        ("[1]", "F{0,1}"),
        ("[1]", "F{1,01}"),
        ("F{0,01}", "F{0,1,01}"),
        ("F{0,1}", "F{0,1,01}"),
        ("F{1,01}", "F{0,1,01}"),
    ],
};

const GOLDEN_TID: Golden = Golden {
    nodes: &[
        ("[0]", "0", "2:1:00"),
        ("[1]", "1", "2:1:11"),
        ("N^{00}", "x+y", "2:2:0110"),
        ("N^{01}", "x", "2:1:01"),
        ("N^{10}", "x̄", "2:1:10"),
        ("N^{11}", "x+ȳ", "2:2:1001"),
    ],
    covers: &[("[0]", "N^{00}"), ("[1]", "N^{11}")],
};

const GOLDEN_T0: Golden = Golden {
    nodes: &[
        ("[0]", "0", "2:1:00"),
        ("[1]", "1", "2:1:11"),
        ("N^{0*}", "x", "2:1:01"),
        ("N^{1*}", "x̄", "2:1:10"),
    ],
    covers: &[("[0]", "N^{0*}"), ("[1]", "N^{1*}")],
};

const GOLDEN_T1: Golden = Golden {
    nodes: &[
        ("[0]", "0", "2:1:00"),
        ("[1]", "1", "2:1:11"),
        ("N^{*0}", "x̄", "2:1:10"),
        ("N^{*1}", "x", "2:1:01"),
    ],
    covers: &[("[0]", "N^{*0}"), ("[1]", "N^{*1}")],
};

const GOLDEN_O: Golden = Golden {
    nodes: &[
        ("[0]", "0", "2:1:00"),
        ("[1]", "1", "2:1:11"),
        ("N", "x", "2:1:01"),
    ],
    covers: &[("[0]", "N"), ("[1]", "N")],
};

fn golden(c: BooleanClone) -> &'static Golden {
    match c {
        BooleanClone::O => &GOLDEN_O,
        BooleanClone::T0 => &GOLDEN_T0,
        BooleanClone::T1 => &GOLDEN_T1,
        BooleanClone::Tid => &GOLDEN_TID,
        BooleanClone::S => &GOLDEN_S,
        BooleanClone::D => &GOLDEN_D,
    }
}

/// The class poset as drawn in the classification, with the drawn
/// representatives.
pub fn expected_poset(c: BooleanClone) -> Poset {
    let g = golden(c);
    let nodes = g
        .nodes
        .iter()
        .map(|&(key, formula, table)| PosetNode {
            key: key.to_string(),
            representative: table.parse().expect("golden tables are well formed"),
            formula: Some(formula.to_string()),
        })
        .collect();
    Poset::from_covers(c.id(), nodes, g.covers).expect("golden covers form a poset")
}

/// The drawn representative of a class and its formula.
pub fn representative(label: &ClassLabel) -> (Operation, &'static str) {
    let text = label.to_string();
    let &(_, formula, table) = golden(label.clone)
        .nodes
        .iter()
        .find(|n| n.0 == text)
        .expect("every realizable label has a drawn representative");
    (
        table.parse().expect("golden tables are well formed"),
        formula,
    )
}

/// Covering pairs `(smaller, larger)` of the inclusion order on the six clones.
pub const CLONE_COVERS: [(BooleanClone, BooleanClone); 7] = [
    (BooleanClone::D, BooleanClone::S),
    (BooleanClone::D, BooleanClone::Tid),
    (BooleanClone::Tid, BooleanClone::T0),
    (BooleanClone::Tid, BooleanClone::T1),
    (BooleanClone::S, BooleanClone::O),
    (BooleanClone::T0, BooleanClone::O),
    (BooleanClone::T1, BooleanClone::O),
];

/// Reflexive-transitive inclusion between the six clones.
pub fn included(sub: BooleanClone, sup: BooleanClone) -> bool {
    use BooleanClone::*;
    sub == sup || sup == O || sub == D || (sub == Tid && matches!(sup, T0 | T1))
}
