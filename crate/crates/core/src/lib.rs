// SPDX-License-Identifier: Apache-2.0

//! Minor relations between finitary operations on finite sets, relative to
//! clones that contain the discriminator function.
//!
//! An operation `f` is a `C`-minor of `g` when `f = g(h_1, …, h_m)` for some
//! `h_i` in the clone `C`. This crate decides that relation, enumerates the
//! resulting equivalence classes and their posets, and computes the arity
//! bound beyond which no new classes appear.

pub mod boolean;
pub mod bounds;
pub mod clones;
pub mod error;
pub mod minors;
pub mod ops;
pub mod poset;

pub use boolean::{boolean_minor, class_label, expected_poset, BooleanClone, ClassLabel};
pub use bounds::{check_bound, reduce_to_d_ary, BoundReport};
pub use clones::{Caps, CloneHandle, InternalIso, NamedClone};
pub use error::{Error, Result};
pub use minors::{
    enumerate_classes, equivalent, is_minor, minor_bruteforce, minor_decide, nu_map, NuMap,
};
pub use ops::Operation;
pub use poset::{Poset, PosetNode};
