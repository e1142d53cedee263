//! Partitioning of interaction terms into mutually commuting families:
//! a structured partitioner that reads the Hamming-class tags attached at
//! construction time, a greedy graph-coloring baseline, and the frustration
//! graph export.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::model::ModelParams;
use crate::pauli::{Axis, PauliSum};

/// Which Hamiltonian picture a sum was built in. The structured partitioner
/// records it for provenance; the grouping itself is driven by the tagged
/// term content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Picture {
    Schrodinger,
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionMethod {
    Structured,
    Greedy,
}

/// A partition of the non-identity terms of a sum into pairwise commuting
/// groups of term indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommutingPartition {
    pub groups: Vec<Vec<usize>>,
    pub method: PartitionMethod,
    pub seed: Option<u64>,
    /// Set when a structured request had to fall back to the greedy method
    /// because the sum carried no structural tags.
    pub used_fallback: bool,
}

impl CommutingPartition {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }
}

/// Groups a tagged interaction sum by Hamming class and parity keys.
///
/// Key selection, mode-independent in every regime:
/// - If every term's atomic letter is the one a real coefficient forces
///   (X on even photon Y-parity, Y on odd), the key is (class, parity):
///   at most 2k groups for any mode count.
/// - Otherwise, with a single mode, opposite-parity photon factors and
///   opposite atomic letters anticommute in pairs, so (class,
///   parity XOR atom-letter) still yields at most 2k groups.
/// - Otherwise the key is (class, parity, atomic letter): at most 4k groups.
///
/// Untagged sums fall back to [`partition_greedy`] with seed 0 and the
/// fallback flag set.
pub fn partition_structured(
    sum: &PauliSum,
    params: &ModelParams,
    _picture: Picture,
    _t: f64,
) -> CommutingPartition {
    if !sum.has_tags() {
        let mut fallback = partition_greedy(sum, 0);
        fallback.used_fallback = true;
        return fallback;
    }
    let tags: Vec<_> = sum.terms().iter().map(|t| t.tag.unwrap()).collect();
    let real_shaped = tags
        .iter()
        .all(|tag| (tag.atom_axis == Axis::X) == !tag.photon_y_odd);
    let single_mode = params.n_modes() == 1;

    let mut cells: BTreeMap<(u32, bool, u8), Vec<usize>> = BTreeMap::new();
    for (idx, tag) in tags.iter().enumerate() {
        if sum.terms()[idx].string.is_identity() {
            continue;
        }
        let key = if real_shaped {
            (tag.hamming, tag.photon_y_odd, 0)
        } else if single_mode {
            (
                tag.hamming,
                tag.photon_y_odd ^ (tag.atom_axis == Axis::Y),
                0,
            )
        } else {
            let axis_rank = match tag.atom_axis {
                Axis::X => 0,
                Axis::Y => 1,
            };
            (tag.hamming, tag.photon_y_odd, axis_rank)
        };
        cells.entry(key).or_default().push(idx);
    }

    CommutingPartition {
        groups: cells.into_values().filter(|g| !g.is_empty()).collect(),
        method: PartitionMethod::Structured,
        seed: None,
        used_fallback: false,
    }
}

/// Greedy largest-degree-first coloring of the frustration graph, with
/// seeded tie-breaking among equal degrees.
pub fn partition_greedy(sum: &PauliSum, seed: u64) -> CommutingPartition {
    let n = sum.len();
    let mut adjacency = vec![Vec::new(); n];
    for (i, j) in frustration_graph(sum) {
        adjacency[i].push(j);
        adjacency[j].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tie: Vec<u64> = (0..n).map(|_| rng.gen()).collect();
    let mut order: Vec<usize> = (0..n)
        .filter(|&i| !sum.terms()[i].string.is_identity())
        .collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(adjacency[i].len()), tie[i]));

    let mut color = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        let mut blocked = vec![false; groups.len()];
        for &u in &adjacency[v] {
            if color[u] != usize::MAX {
                blocked[color[u]] = true;
            }
        }
        match blocked.iter().position(|b| !b) {
            Some(g) => {
                color[v] = g;
                groups[g].push(v);
            }
            None => {
                color[v] = groups.len();
                groups.push(vec![v]);
            }
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }

    CommutingPartition {
        groups,
        method: PartitionMethod::Greedy,
        seed: Some(seed),
        used_fallback: false,
    }
}

/// True iff the groups are disjoint, cover exactly the non-identity term
/// indices, stay in range, and are pairwise commuting.
pub fn verify_partition(sum: &PauliSum, partition: &CommutingPartition) -> bool {
    let n = sum.len();
    let mut seen = vec![false; n];
    for group in &partition.groups {
        for &idx in group {
            if idx >= n || seen[idx] || sum.terms()[idx].string.is_identity() {
                return false;
            }
            seen[idx] = true;
        }
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                if !sum.terms()[i].string.commutes(&sum.terms()[j].string) {
                    return false;
                }
            }
        }
    }
    (0..n).all(|i| seen[i] || sum.terms()[i].string.is_identity())
}

/// Edge list of the frustration graph: vertices are term indices, and an
/// edge joins every anticommuting pair (i < j).
pub fn frustration_graph(sum: &PauliSum) -> Vec<(usize, usize)> {
    let terms = sum.terms();
    let mut edges = Vec::new();
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            if !terms[i].string.commutes(&terms[j].string) {
                edges.push((i, j));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_interaction, build_schrodinger};
    use crate::pauli::{PauliString, Term};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn detuned(nf: usize, k: u32) -> ModelParams {
        let freqs: Vec<f64> = (0..nf).map(|m| 1.3 + 0.3 * m as f64).collect();
        let coups: Vec<f64> = (0..nf).map(|m| 0.5 + 0.1 * m as f64).collect();
        ModelParams::new(nf, k, freqs, 1.0, coups).unwrap()
    }

    #[test]
    fn structured_counts_match_theory_on_grid() {
        for nf in 1..=4usize {
            for k in 1..=4u32 {
                let params = detuned(nf, k);
                let parts = build_schrodinger(&params);
                for (picture, sum, t) in [
                    (Picture::Schrodinger, parts.h_int.clone(), 0.0),
                    (Picture::Interaction, build_interaction(&params, 0.0), 0.0),
                    (Picture::Interaction, build_interaction(&params, 0.7), 0.7),
                ] {
                    let partition = partition_structured(&sum, &params, picture, t);
                    assert!(verify_partition(&sum, &partition), "nf={nf} k={k} t={t}");
                    assert!(!partition.used_fallback);
                    let expected = if t == 0.0 || nf == 1 {
                        2 * k as usize
                    } else {
                        4 * k as usize
                    };
                    assert_eq!(
                        partition.group_count(),
                        expected,
                        "nf={nf} k={k} picture={picture:?} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn single_mode_two_bit_interaction_support_and_groups() {
        let params = detuned(1, 2);
        let sum = build_interaction(&params, 0.55);
        assert_eq!(sum.len(), 16);
        let support: BTreeSet<String> = sum.terms().iter().map(|t| t.string.label()).collect();
        let expected: BTreeSet<String> = [
            "IXX", "IXY", "IYX", "IYY", "XXX", "XXY", "XYX", "XYY", "YXX", "YXY", "YYX", "YYY",
            "ZXX", "ZXY", "ZYX", "ZYY",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        assert_eq!(support, expected);
        let partition = partition_structured(&sum, &params, Picture::Interaction, 0.55);
        assert_eq!(partition.group_count(), 4);
        assert!(verify_partition(&sum, &partition));
    }

    #[test]
    fn three_mode_interaction_has_eight_families() {
        let params = detuned(3, 2);
        let sum = build_interaction(&params, 0.7);
        assert_eq!(sum.len(), 48);
        let partition = partition_structured(&sum, &params, Picture::Interaction, 0.7);
        assert_eq!(partition.group_count(), 8);
        assert!(verify_partition(&sum, &partition));
    }

    #[test]
    fn minimal_instance_splits_in_two() {
        let params = detuned(1, 1);
        let parts = build_schrodinger(&params);
        let partition =
            partition_structured(&parts.h_int, &params, Picture::Schrodinger, 0.0);
        assert_eq!(partition.group_count(), 2);
    }

    #[test]
    fn untagged_sum_falls_back_to_greedy() {
        let params = detuned(1, 2);
        let parts = build_schrodinger(&params);
        let stripped = PauliSum::from_text(&parts.h_int.to_text()).unwrap();
        assert!(!stripped.has_tags());
        let partition =
            partition_structured(&stripped, &params, Picture::Schrodinger, 0.0);
        assert!(partition.used_fallback);
        assert_eq!(partition.method, PartitionMethod::Greedy);
        assert!(verify_partition(&stripped, &partition));
    }

    #[test]
    fn greedy_trivial_cases() {
        let empty = PauliSum::new(3);
        assert_eq!(partition_greedy(&empty, 1).group_count(), 0);

        let single = PauliSum::from_terms(
            2,
            vec![(
                Complex64::new(1.0, 0.0),
                PauliString::from_label("XY").unwrap(),
            )],
        );
        let p = partition_greedy(&single, 1);
        assert_eq!(p.group_count(), 1);
        assert!(verify_partition(&single, &p));
    }

    #[test]
    fn greedy_on_interaction_term_is_valid_and_bounded() {
        let params = detuned(1, 2);
        let sum = build_interaction(&params, 0.55);
        let p = partition_greedy(&sum, 42);
        assert!(verify_partition(&sum, &p));
        assert!(p.group_count() >= 4 && p.group_count() <= 16);
    }

    #[test]
    fn greedy_never_beats_structured_on_multimode_instances() {
        for nf in 2..=3usize {
            for k in 1..=2u32 {
                let params = detuned(nf, k);
                for (sum, picture, t) in [
                    (build_schrodinger(&params).h_int, Picture::Schrodinger, 0.0),
                    (build_interaction(&params, 0.7), Picture::Interaction, 0.7),
                ] {
                    let structured = partition_structured(&sum, &params, picture, t);
                    let best_greedy = (0..20u64)
                        .map(|seed| partition_greedy(&sum, seed).group_count())
                        .min()
                        .unwrap();
                    assert!(
                        structured.group_count() <= best_greedy,
                        "nf={nf} k={k} t={t}: structured {} vs greedy {}",
                        structured.group_count(),
                        best_greedy
                    );
                }
            }
        }
    }

    #[test]
    fn verify_rejects_anticommuting_group() {
        let sum = PauliSum::from_terms(
            2,
            vec![
                (
                    Complex64::new(1.0, 0.0),
                    PauliString::from_label("XI").unwrap(),
                ),
                (
                    Complex64::new(1.0, 0.0),
                    PauliString::from_label("ZI").unwrap(),
                ),
            ],
        );
        let bad = CommutingPartition {
            groups: vec![vec![0, 1]],
            method: PartitionMethod::Greedy,
            seed: None,
            used_fallback: false,
        };
        assert!(!verify_partition(&sum, &bad));
    }

    #[test]
    fn verify_rejects_incomplete_cover_and_bad_index() {
        let sum = PauliSum::from_terms(
            1,
            vec![
                (
                    Complex64::new(1.0, 0.0),
                    PauliString::from_label("X").unwrap(),
                ),
                (
                    Complex64::new(1.0, 0.0),
                    PauliString::from_label("Z").unwrap(),
                ),
            ],
        );
        let incomplete = CommutingPartition {
            groups: vec![vec![0]],
            method: PartitionMethod::Greedy,
            seed: None,
            used_fallback: false,
        };
        assert!(!verify_partition(&sum, &incomplete));
        let out_of_range = CommutingPartition {
            groups: vec![vec![0], vec![5]],
            method: PartitionMethod::Greedy,
            seed: None,
            used_fallback: false,
        };
        assert!(!verify_partition(&sum, &out_of_range));
    }

    #[test]
    fn frustration_graph_examples() {
        let all_z = PauliSum::from_terms(
            2,
            vec![
                (
                    Complex64::new(1.0, 0.0),
                    PauliString::from_label("ZI").unwrap(),
                ),
                (
                    Complex64::new(0.5, 0.0),
                    PauliString::from_label("IZ").unwrap(),
                ),
                (
                    Complex64::new(0.25, 0.0),
                    PauliString::from_label("ZZ").unwrap(),
                ),
            ],
        );
        assert!(frustration_graph(&all_z).is_empty());

        let pair = PauliSum::from_terms(
            2,
            vec![
                (
                    Complex64::new(1.0, 0.0),
                    PauliString::from_label("XI").unwrap(),
                ),
                (
                    Complex64::new(1.0, 0.0),
                    PauliString::from_label("ZI").unwrap(),
                ),
            ],
        );
        assert_eq!(frustration_graph(&pair), vec![(0, 1)]);
    }

    #[test]
    fn structured_groups_are_independent_sets() {
        let params = detuned(1, 3);
        let sum = build_interaction(&params, 0.7);
        let partition = partition_structured(&sum, &params, Picture::Interaction, 0.7);
        assert_eq!(partition.group_count(), 6);
        let edges: BTreeSet<(usize, usize)> = frustration_graph(&sum).into_iter().collect();
        for group in &partition.groups {
            for (a, &i) in group.iter().enumerate() {
                for &j in &group[a + 1..] {
                    let key = if i < j { (i, j) } else { (j, i) };
                    assert!(!edges.contains(&key));
                }
            }
        }
    }

    fn arbitrary_sum() -> impl Strategy<Value = PauliSum> {
        let term = (
            prop::collection::vec(0u8..4, 5),
            -2.0f64..2.0,
            -2.0f64..2.0,
        );
        prop::collection::vec(term, 1..12).prop_map(|raw| {
            let mut sum = PauliSum::new(5);
            for (letters, re, im) in raw {
                let mut s = PauliString::identity(5);
                for (q, &code) in letters.iter().enumerate() {
                    let letter = match code {
                        0 => crate::pauli::Pauli::I,
                        1 => crate::pauli::Pauli::X,
                        2 => crate::pauli::Pauli::Y,
                        _ => crate::pauli::Pauli::Z,
                    };
                    s = s.with_letter(q, letter);
                }
                sum.push_term(Term {
                    coeff: Complex64::new(re, im),
                    string: s,
                    tag: None,
                });
            }
            sum.canonicalize();
            sum
        })
    }

    proptest! {
        #[test]
        fn greedy_always_produces_valid_partitions(sum in arbitrary_sum(), seed in 0u64..100) {
            let p = partition_greedy(&sum, seed);
            prop_assert!(verify_partition(&sum, &p));
        }
    }
}
