// SPDX-License-Identifier: Apache-2.0

//! Browser bindings for the class browser page in `www/`.
//!
//! Every export takes and returns strings; structured results are JSON.

use clone_minor::boolean::{class_label, expected_poset, representative, BooleanClone};
use clone_minor::minors::{enumerate_classes, is_minor};
use clone_minor::{CloneHandle, Operation};
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

fn boolean(clone: &str) -> Result<BooleanClone, String> {
    BooleanClone::from_id(clone).ok_or_else(|| format!("unknown Boolean clone {clone:?}"))
}

fn op(text: &str) -> Result<Operation, String> {
    text.trim()
        .parse()
        .map_err(|e: clone_minor::Error| e.to_string())
}

/// Label of `op` under one of the six Boolean discriminator clones,
/// with the representative of its class.
#[wasm_bindgen]
pub fn classify(op_text: &str, clone: &str) -> Result<String, String> {
    let c = boolean(clone)?;
    let f = op(op_text)?;
    let label = class_label(&f, c).map_err(|e| e.to_string())?;
    let (rep, formula) = representative(&label);
    Ok(json!({
        "label": label.to_string(),
        "representative": rep.to_string(),
        "formula": formula,
    })
    .to_string())
}

/// Computed class poset of a Boolean clone from all operations of arity at
/// most `max_arity`, with node heights for layout and a comparison against
/// the known diagram.
#[wasm_bindgen]
pub fn hasse(clone: &str, max_arity: usize) -> Result<String, String> {
    let c = boolean(clone)?;
    if !(1..=3).contains(&max_arity) {
        return Err("arity must be 1, 2 or 3 in the browser".into());
    }
    let poset = enumerate_classes(&c.handle(), max_arity).map_err(|e| e.to_string())?;
    let mut value = poset.to_json_value();
    value["heights"] = json!(poset.heights());
    value["matches_known"] = json!(expected_poset(c).diff(&poset).is_empty());
    Ok(value.to_string())
}

/// Whether `f ≤ g` and `g ≤ f` hold for a named clone or a `gen:` clone.
#[wasm_bindgen]
pub fn minor(f_text: &str, g_text: &str, clone: &str) -> Result<String, String> {
    let (f, g) = (op(f_text)?, op(g_text)?);
    let c = CloneHandle::parse(clone.trim(), f.k()).map_err(|e| e.to_string())?;
    let forward = is_minor(&f, &g, &c).map_err(|e| e.to_string())?;
    let backward = is_minor(&g, &f, &c).map_err(|e| e.to_string())?;
    Ok(json!({ "f_le_g": forward, "g_le_f": backward, "clone": c.name() }).to_string())
}
