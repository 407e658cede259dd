// SPDX-License-Identifier: Apache-2.0

//! Cross-checks against independent reference computations.

use std::collections::{BTreeMap, BTreeSet};

use clone_minor::boolean::{boolean_minor, class_label, expected_poset, im2, BooleanClone};
use clone_minor::bounds::{
    count_n, er_signature, injective_tuples, minor_via_er, reduce_to_d_ary, stirling,
    BlockProjection,
};
use clone_minor::minors::{
    enumerate_classes, equivalent, minor_bruteforce, minor_decide, nu_map, orbits,
};
use clone_minor::{CloneHandle, NamedClone, Operation};
use num_bigint::{BigInt, BigUint};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn boolean_ops(max_arity: usize) -> Vec<Operation> {
    (1..=max_arity)
        .flat_map(|n| Operation::all(2, n).unwrap())
        .collect()
}

fn binomial(n: u64, r: u64) -> BigInt {
    (0..r).fold(BigInt::from(1), |acc, i| acc * (n - i) / (i + 1))
}

/// `S(d, r) = (1/r!) Σ_j (−1)^j C(r, j) (r − j)^d`.
fn stirling_inclusion_exclusion(d: u32, r: u64) -> BigInt {
    let mut sum = BigInt::from(0);
    for j in 0..=r {
        let term = binomial(r, j) * BigInt::from(r - j).pow(d);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let fact = (1..=r).fold(BigInt::from(1), |acc, i| acc * i);
    sum / fact
}

/// Surjections `[d] → [r]` counted by brute force, divided by `r!`.
fn stirling_brute(d: u32, r: usize) -> u64 {
    let mut surjective = 0u64;
    for code in 0..(r as u64).pow(d) {
        let mut hit = vec![false; r];
        let mut c = code;
        for _ in 0..d {
            hit[(c % r as u64) as usize] = true;
            c /= r as u64;
        }
        if hit.iter().all(|&h| h) {
            surjective += 1;
        }
    }
    surjective / (1..=r as u64).product::<u64>()
}

#[test]
fn stirling_matches_two_references() {
    for d in 0..=30u32 {
        for r in 0..=d.min(12) as usize {
            assert_eq!(
                BigInt::from(stirling(d as usize, r)),
                stirling_inclusion_exclusion(d, r as u64),
                "S({d},{r})"
            );
        }
    }
    for d in 1..=8u32 {
        for r in 1..=d as usize {
            if (r as u64).pow(d) <= 1 << 20 {
                assert_eq!(
                    stirling(d as usize, r),
                    BigUint::from(stirling_brute(d, r)),
                    "S({d},{r})"
                );
            }
        }
    }
    for d in 2..40 {
        for r in 1..d {
            assert_eq!(
                stirling(d, r),
                stirling(d - 1, r) * r as u64 + stirling(d - 1, r - 1)
            );
        }
    }
}

/// Orbits of `S_r` on functions `P_r → A`, found by explicit enumeration.
fn count_n_explicit(k: usize, r: usize) -> usize {
    // injective r-tuples, lexicographically
    let pr: Vec<Vec<u8>> = (0..k.pow(r as u32))
        .map(|code| {
            (0..r)
                .map(|i| (code / k.pow((r - 1 - i) as u32) % k) as u8)
                .collect::<Vec<u8>>()
        })
        .filter(|t| t.iter().collect::<BTreeSet<_>>().len() == r)
        .collect();
    let index: BTreeMap<Vec<u8>, usize> = pr
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, x)| (x, i))
        .collect();
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for n in 0..r {
        perms = perms
            .into_iter()
            .flat_map(|p| {
                (0..=n).map(move |pos| {
                    let mut q = p.clone();
                    q.insert(pos, n);
                    q
                })
            })
            .collect();
    }
    let total = k.pow(pr.len() as u32);
    let mut seen = vec![false; total];
    let mut orbits = 0;
    for code in 0..total {
        if seen[code] {
            continue;
        }
        orbits += 1;
        let values: Vec<usize> = (0..pr.len())
            .map(|i| code / k.pow((pr.len() - 1 - i) as u32) % k)
            .collect();
        for sigma in &perms {
            let moved = pr.iter().fold(0, |acc, x| {
                let y: Vec<u8> = sigma.iter().map(|&s| x[s]).collect();
                acc * k + values[index[&y]]
            });
            seen[moved] = true;
        }
    }
    orbits
}

#[test]
fn burnside_matches_enumeration() {
    for k in 1..=3 {
        for r in 1..=k.min(3) {
            assert_eq!(
                count_n(k, r).unwrap(),
                BigUint::from(count_n_explicit(k, r)),
                "N({k},{r})"
            );
        }
    }
    assert_eq!(count_n_explicit(2, 2), 3);
    assert_eq!(count_n_explicit(3, 2), 378);
}

#[test]
fn block_projections_are_bijective() {
    for k in 2..=3usize {
        for n in 1..=4 {
            let mut covered = BTreeSet::new();
            for code in 0..k.pow(n as u32) {
                let tuple = clone_minor::ops::decode(code, k, n);
                let block = BlockProjection::of(&tuple, k);
                let members = block.members();
                let r = block.breadth();
                let expected: usize = (0..r).map(|i| k - i).product();
                assert_eq!(members.len(), expected);
                assert_eq!(injective_tuples(k, r).len(), expected);
                assert!(members.contains(&tuple));
                for m in &members {
                    assert_eq!(
                        BlockProjection::of(m, k).representative,
                        block.representative
                    );
                    assert_eq!(block.lift(&block.project(m)), *m);
                }
                covered.insert(block.representative.clone());
            }
            let blocks: usize = (1..=k.min(n))
                .map(|r| stirling_brute(n as u32, r) as usize)
                .sum();
            assert_eq!(covered.len(), blocks);
        }
    }
}

#[test]
fn discriminator_orbits_are_equality_patterns() {
    for k in 2..=3 {
        let d = CloneHandle::named(NamedClone::D, k).unwrap();
        for n in 1..=3 {
            for block in orbits(&d, n).unwrap() {
                let pattern = |t: &[u8]| -> Vec<bool> {
                    (0..n)
                        .flat_map(|i| (0..n).map(move |j| (i, j)))
                        .map(|(i, j)| t[i] == t[j])
                        .collect()
                };
                let want = pattern(&block.representative);
                for &m in &block.members {
                    assert_eq!(pattern(&clone_minor::ops::decode(m, k, n)), want);
                }
                let sc: u32 = block.representative.iter().fold(0, |acc, &x| acc | 1 << x);
                assert_eq!(block.subuniverse, sc);
            }
        }
    }
}

#[test]
fn predicate_and_generated_members_agree() {
    for c in BooleanClone::ALL {
        let h = c.handle();
        for n in 1..=3 {
            assert_eq!(
                h.generate_arity(n).unwrap(),
                h.enumerate_arity(n).unwrap(),
                "{c} arity {n}"
            );
        }
    }
    for c in [NamedClone::M, NamedClone::L] {
        let h = CloneHandle::named(c, 2).unwrap();
        for n in 1..=3 {
            assert_eq!(
                h.generate_arity(n).unwrap(),
                h.enumerate_arity(n).unwrap(),
                "{c} arity {n}"
            );
        }
    }
}

#[test]
fn boolean_criterion_matches_orbit_procedure() {
    let ops = boolean_ops(3);
    for c in BooleanClone::ALL {
        let clone = c.handle();
        for f in &ops {
            for g in &ops {
                assert_eq!(
                    boolean_minor(f, g, c).unwrap(),
                    minor_decide(f, g, &clone).unwrap(),
                    "{c} {f} {g}"
                );
            }
        }
    }
}

#[test]
fn labels_are_complete_invariants() {
    let small = boolean_ops(2);
    for c in BooleanClone::ALL {
        let clone = c.handle();
        for f in &small {
            for g in &small {
                let same = class_label(f, c).unwrap() == class_label(g, c).unwrap();
                assert_eq!(same, equivalent(f, g, &clone).unwrap(), "{c} {f} {g}");
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(17);
    let random = |rng: &mut StdRng| {
        let n = rng.gen_range(3..=4);
        Operation::from_index(2, n, rng.gen_range(0..1u64 << (1 << n))).unwrap()
    };
    for i in 0..10_000 {
        let c = BooleanClone::ALL[i % 6];
        let f = random(&mut rng);
        // half of the pairs start from a padded copy so equal labels occur often
        let g = if i % 2 == 0 {
            random(&mut rng)
        } else {
            f.pad_arity(4).unwrap()
        };
        let same = class_label(&f, c).unwrap() == class_label(&g, c).unwrap();
        assert_eq!(
            same,
            equivalent(&f, &g, &c.handle()).unwrap(),
            "{c} {f} {g}"
        );
    }
}

#[test]
fn golden_representatives_realise_every_label() {
    let d = expected_poset(BooleanClone::D);
    let labels: BTreeSet<String> = d.nodes().iter().map(|v| v.key.clone()).collect();
    assert_eq!(labels.len(), 16);
    for v in d.nodes() {
        let fam = im2(&v.representative).unwrap().sets();
        let ends = BTreeSet::from([
            v.representative.value(0),
            v.representative.value(v.representative.len() - 1),
        ]);
        assert!(fam.contains(&ends), "{}", v.key);
    }
}

#[test]
fn brute_force_agrees_on_three_elements() {
    let t = Operation::discriminator(3).unwrap();
    let clones = [
        CloneHandle::generated(3, vec![t.clone()]).unwrap(),
        CloneHandle::generated(3, vec![t.clone(), Operation::constant(3, 0).unwrap()]).unwrap(),
        CloneHandle::generated(3, vec![t, Operation::from_table(3, 1, &[1, 0, 2]).unwrap()])
            .unwrap(),
    ];
    let mut rng = StdRng::seed_from_u64(3);
    for clone in &clones {
        let unary: Vec<Operation> = Operation::all(3, 1).unwrap().collect();
        for f in &unary {
            for g in &unary {
                assert_eq!(
                    minor_decide(f, g, clone).unwrap(),
                    minor_bruteforce(f, g, clone).unwrap().is_some()
                );
            }
        }
        for _ in 0..300 {
            let f = Operation::from_index(3, 2, rng.gen_range(0..3u64.pow(9))).unwrap();
            let g = Operation::from_index(3, 2, rng.gen_range(0..3u64.pow(9))).unwrap();
            // a genuine minor: g applied to members of the clone
            let members = clone.members(2).unwrap();
            let pick = |rng: &mut StdRng| members[rng.gen_range(0..members.len())].clone();
            let h = [pick(&mut rng), pick(&mut rng)];
            assert!(minor_decide(&g.compose(&h).unwrap(), &g, clone).unwrap());
            let fast = minor_decide(&f, &g, clone).unwrap();
            let slow = minor_bruteforce(&f, &g, clone).unwrap();
            assert_eq!(fast, slow.is_some(), "{f} {g}");
        }
    }
}

#[test]
fn er_containment_is_sufficient() {
    let d = CloneHandle::named(NamedClone::D, 2).unwrap();
    let ops = boolean_ops(3);
    for f in &ops {
        for g in &ops {
            if minor_via_er(f, g).unwrap() {
                assert!(minor_decide(f, g, &d).unwrap(), "{f} {g}");
            }
        }
    }
    let d3 = CloneHandle::named(NamedClone::D, 3).unwrap();
    let small: Vec<Operation> = Operation::all(3, 1).unwrap().collect();
    for f in &small {
        for g in &small {
            if minor_via_er(f, g).unwrap() {
                assert!(minor_decide(f, g, &d3).unwrap(), "{f} {g}");
            }
        }
    }
}

#[test]
fn equal_signatures_imply_equivalence() {
    let d = CloneHandle::named(NamedClone::D, 2).unwrap();
    let ops = boolean_ops(3);
    let sig = |f: &Operation| (er_signature(f, 1).unwrap(), er_signature(f, 2).unwrap());
    let sigs: Vec<_> = ops.iter().map(sig).collect();
    let mut equal_pairs = 0;
    for i in 0..ops.len() {
        for j in 0..ops.len() {
            if sigs[i] == sigs[j] {
                equal_pairs += 1;
                assert!(
                    equivalent(&ops[i], &ops[j], &d).unwrap(),
                    "{} {}",
                    ops[i],
                    ops[j]
                );
            }
        }
    }
    assert!(equal_pairs > ops.len());
}

#[test]
fn signatures_are_not_class_invariants() {
    // xȳ and its padding are equivalent, but merging variables of the padded
    // copy exposes a constant breadth-2 restriction
    let d = CloneHandle::named(NamedClone::D, 2).unwrap();
    let f: Operation = "2:2:0010".parse().unwrap();
    let g = f.pad_arity(3).unwrap();
    assert!(equivalent(&f, &g, &d).unwrap());
    let (ef, eg) = (er_signature(&f, 2).unwrap(), er_signature(&g, 2).unwrap());
    assert!(ef.classes.is_subset(&eg.classes));
    assert_ne!(ef, eg);
    assert!(minor_via_er(&f, &g).unwrap());
    assert!(!minor_via_er(&g, &f).unwrap());
}

#[test]
fn reduction_of_small_arities() {
    let d = CloneHandle::named(NamedClone::D, 2).unwrap();
    for f in boolean_ops(3) {
        let g = reduce_to_d_ary(&f, 3).unwrap();
        assert_eq!(g.arity(), 3);
        assert_eq!(
            class_label(&f, BooleanClone::D).unwrap(),
            class_label(&g, BooleanClone::D).unwrap()
        );
        assert!(equivalent(&f, &g, &d).unwrap());
    }
    let x4 = reduce_to_d_ary(&Operation::xor_chain(4).unwrap(), 3).unwrap();
    assert_eq!(
        class_label(&x4, BooleanClone::D).unwrap().to_string(),
        "F{0,1}^{00}"
    );
    // k = 3 in a small target arity that still has room for every class
    let d3 = CloneHandle::named(NamedClone::D, 3).unwrap();
    for f in Operation::all(3, 1).unwrap() {
        let g = reduce_to_d_ary(&f, 2).unwrap();
        assert!(equivalent(&f, &g, &d3).unwrap());
    }
}

#[test]
fn nu_map_between_d_and_s() {
    let (d, s, tid) = (
        BooleanClone::D.handle(),
        BooleanClone::S.handle(),
        BooleanClone::Tid.handle(),
    );
    let pd = enumerate_classes(&d, 3).unwrap();
    let ps = enumerate_classes(&s, 3).unwrap();
    let pt = enumerate_classes(&tid, 3).unwrap();
    let nu: BTreeMap<String, String> = nu_map(&d, &s, &pd, &ps)
        .unwrap()
        .describe(&pd, &ps)
        .into_iter()
        .collect();
    for (from, to) in [
        ("[0]", "[0]"),
        ("[1]", "[1]"),
        ("F{01}^{01}", "F{01}"),
        ("F{01}^{10}", "F{01}"),
        ("F{0,1}^{00}", "F{0,1}"),
        ("F{0,1}^{11}", "F{0,1}"),
        ("F{0,01}^{00}", "F{0,01}"),
        ("F{0,01}^{01}", "F{0,01}"),
        ("F{0,01}^{10}", "F{0,01}"),
        ("F{1,01}^{01}", "F{1,01}"),
        ("F{1,01}^{10}", "F{1,01}"),
        ("F{1,01}^{11}", "F{1,01}"),
        ("F{0,1,01}^{00}", "F{0,1,01}"),
        ("F{0,1,01}^{11}", "F{0,1,01}"),
    ] {
        assert_eq!(nu[from], to, "{from}");
    }
    let nu: BTreeMap<String, String> = nu_map(&d, &tid, &pd, &pt)
        .unwrap()
        .describe(&pd, &pt)
        .into_iter()
        .collect();
    assert_eq!(nu["F{0,1}^{00}"], "N^{00}");
    assert_eq!(nu["F{0,01}^{00}"], "N^{00}");
    assert_eq!(nu["[0]"], "[0]");
    assert_eq!(nu["F{0,1,01}^{01}"], "N^{01}");
    assert_eq!(nu["F{01}^{10}"], "N^{10}");
}

#[test]
fn three_element_class_counts_stabilise() {
    // every class of unary and binary operations on three elements under ⟨t⟩
    let d3 = CloneHandle::named(NamedClone::D, 3).unwrap();
    let p1 = enumerate_classes(&d3, 1).unwrap();
    // unary ops up to relabelling by the permutations that commute with them
    let unary: Vec<Operation> = Operation::all(3, 1).unwrap().collect();
    let mut classes: Vec<&Operation> = Vec::new();
    for f in &unary {
        if !classes.iter().any(|g| equivalent(f, g, &d3).unwrap()) {
            classes.push(f);
        }
    }
    assert_eq!(p1.len(), classes.len());
    // on one-variable functions, D-equivalence is equality (only the identity is a unary member)
    assert_eq!(classes.len(), 27);
}
