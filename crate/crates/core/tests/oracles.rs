//! Library results checked against brute-force computations that share no
//! code with the implementation.

use std::collections::{BTreeSet, HashMap};

use ginvsketch::correlation::correlation_table;
use ginvsketch::discrim::{canonicalize, compute_delta, reduce_dataset};
use ginvsketch::embed::{embed_point, GaussianMap};
use ginvsketch::invariant::{stacked_invariant, tensor_distance_sq};
use ginvsketch::orbit::{burnside_count, enumerate_orbits, fixed_points};
use ginvsketch::{Caps, FiniteGroup, InvariantMap, Permutation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: usize = 1 << 20;

fn perm(image: &[usize]) -> Permutation {
    Permutation::new(image.to_vec()).unwrap()
}

fn dihedral4() -> FiniteGroup {
    FiniteGroup::close_generators(4, &[perm(&[1, 2, 3, 0]), perm(&[0, 3, 2, 1])], 100).unwrap()
}

/// Assorted groups, each with a name for failure messages.
fn fixtures() -> Vec<(&'static str, FiniteGroup)> {
    let caps = Caps::default();
    vec![
        ("C2", FiniteGroup::cyclic(2).unwrap()),
        ("C5", FiniteGroup::cyclic(5).unwrap()),
        ("trivial3", FiniteGroup::trivial(3)),
        ("D4", dihedral4()),
        ("S3 on 3", FiniteGroup::sym_subsets(3, 1, &caps).unwrap().0),
        (
            "S3 on pairs",
            FiniteGroup::sym_subsets(3, 2, &caps).unwrap().0,
        ),
        (
            "S4 on pairs",
            FiniteGroup::sym_subsets(4, 2, &caps).unwrap().0,
        ),
        (
            "S3 regular",
            FiniteGroup::sym_subsets(3, 1, &caps)
                .unwrap()
                .0
                .regular_space(100)
                .unwrap()
                .0,
        ),
        (
            "C2 x C2 intransitive",
            FiniteGroup::close_generators(4, &[perm(&[1, 0, 2, 3]), perm(&[0, 1, 3, 2])], 10)
                .unwrap(),
        ),
    ]
}

fn all_tuples(n: usize, omega: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..omega {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |x| {
                    let mut u = t.clone();
                    u.push(x);
                    u
                })
            })
            .collect();
    }
    out
}

fn act(g: &Permutation, t: &[usize]) -> Vec<usize> {
    t.iter().map(|&x| g.apply(x)).collect()
}

/// Orbits as sets of tuples, by applying every element to every tuple.
fn brute_orbits(g: &FiniteGroup, omega: usize) -> BTreeSet<BTreeSet<Vec<usize>>> {
    all_tuples(g.degree(), omega)
        .into_iter()
        .map(|t| g.elements().iter().map(|h| act(h, &t)).collect())
        .collect()
}

#[test]
fn orbit_partition_matches_brute_force() {
    for (name, g) in fixtures() {
        for omega in 1..=3 {
            if g.degree().pow(omega as u32) > 5000 {
                continue;
            }
            let orbits = enumerate_orbits(&g, omega, CAP).unwrap();
            let ours: BTreeSet<BTreeSet<Vec<usize>>> = (0..orbits.count())
                .map(|id| orbits.stream_orbit_members(id).unwrap().collect())
                .collect();
            assert_eq!(ours, brute_orbits(&g, omega), "{name}, omega {omega}");
            for id in 0..orbits.count() {
                assert_eq!(
                    orbits.orbit_sizes()[id],
                    orbits.member_codes(id).unwrap().len()
                );
            }
        }
    }
}

#[test]
fn burnside_matches_counted_fixed_tuples() {
    for (name, g) in fixtures() {
        for omega in 1..=3u32 {
            let n = g.degree();
            if n.pow(omega) > 5000 {
                continue;
            }
            let fixed_total: usize = g
                .elements()
                .iter()
                .map(|h| {
                    all_tuples(n, omega as usize)
                        .iter()
                        .filter(|t| act(h, t) == **t)
                        .count()
                })
                .sum();
            assert_eq!(fixed_total % g.order(), 0);
            let expected = (fixed_total / g.order()) as u128;
            assert_eq!(
                burnside_count(&g, omega as usize).unwrap(),
                expected,
                "{name}"
            );
            assert_eq!(
                brute_orbits(&g, omega as usize).len() as u128,
                expected,
                "{name}"
            );
        }
    }
}

#[test]
fn fixed_point_counts_are_class_functions() {
    for (name, g) in fixtures() {
        let theta = fixed_points(&g).theta;
        for (i, x) in g.elements().iter().enumerate() {
            assert_eq!(
                theta[i],
                (0..g.degree()).filter(|&p| x.apply(p) == p).count()
            );
            for h in g.elements() {
                let conj = h.compose(x).compose(&h.inverse());
                assert_eq!(theta[g.index_of(&conj).unwrap()], theta[i], "{name}");
            }
        }
    }
}

#[test]
fn orbit_lookup_is_invariant_under_random_elements() {
    let (g, _) = FiniteGroup::sym_subsets(5, 2, &Caps::default()).unwrap();
    let orbits = enumerate_orbits(&g, 3, CAP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let h = g.element(rng.random_range(0..g.order()));
        let t: Vec<usize> = (0..3).map(|_| rng.random_range(0..g.degree())).collect();
        assert_eq!(
            orbits.orbit_of(&act(h, &t)).unwrap(),
            orbits.orbit_of(&t).unwrap()
        );
    }
}

/// Dense indicator matrix with rows `|Ω|^{-1/2} 1_Ω`, columns in
/// lexicographic tuple order.
fn dense_matrix(g: &FiniteGroup, omega: usize) -> Vec<Vec<f64>> {
    let tuples = all_tuples(g.degree(), omega);
    let column: HashMap<&Vec<usize>, usize> =
        tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let orbits = enumerate_orbits(g, omega, CAP).unwrap();
    (0..orbits.count())
        .map(|id| {
            let members: Vec<Vec<usize>> = orbits.stream_orbit_members(id).unwrap().collect();
            let w = 1.0 / (members.len() as f64).sqrt();
            let mut row = vec![0.0; tuples.len()];
            for t in &members {
                row[column[t]] = w;
            }
            row
        })
        .collect()
}

fn tensor_power(a: &[f64], omega: usize) -> Vec<f64> {
    all_tuples(a.len(), omega)
        .iter()
        .map(|t| t.iter().map(|&x| a[x]).product())
        .collect()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn invariant_equals_dense_matrix_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, g) in fixtures() {
        for omega in 1..=2 {
            let m = dense_matrix(&g, omega);
            for r in 0..m.len() {
                for s in 0..m.len() {
                    let d: f64 = m[r].iter().zip(&m[s]).map(|(x, y)| x * y).sum();
                    let expected = if r == s { 1.0 } else { 0.0 };
                    assert!((d - expected).abs() < 1e-12, "{name}");
                }
            }
            let inv = InvariantMap::new(&g, omega, CAP).unwrap();
            let a = random_vec(&mut rng, g.degree());
            let t = tensor_power(&a, omega);
            let z = inv.apply(&a).unwrap().z;
            for (row, zi) in m.iter().zip(&z) {
                let expected: f64 = row.iter().zip(&t).map(|(x, y)| x * y).sum();
                assert!((expected - zi).abs() < 1e-12, "{name}: {expected} vs {zi}");
            }
        }
    }
}

#[test]
fn kernel_energy_matches_explicit_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (g, _) = FiniteGroup::sym_subsets(4, 2, &Caps::default()).unwrap();
    let m = dense_matrix(&g, 2);
    let inv = InvariantMap::new(&g, 2, CAP).unwrap();
    for _ in 0..20 {
        let a1 = random_vec(&mut rng, 6);
        let a2 = random_vec(&mut rng, 6);
        let d: Vec<f64> = tensor_power(&a1, 2)
            .iter()
            .zip(tensor_power(&a2, 2))
            .map(|(x, y)| x - y)
            .collect();
        let md: Vec<f64> = m
            .iter()
            .map(|row| row.iter().zip(&d).map(|(x, y)| x * y).sum())
            .collect();
        let f: f64 = md.iter().map(|v| v * v).sum();
        let mut proj = vec![0.0; d.len()];
        for (row, c) in m.iter().zip(&md) {
            for (p, r) in proj.iter_mut().zip(row) {
                *p += c * r;
            }
        }
        let kernel: f64 = d.iter().zip(&proj).map(|(x, p)| (x - p) * (x - p)).sum();
        let e = inv.kernel_energy(&a1, &a2).unwrap();
        let total = tensor_distance_sq(&a1, &a2, 2).unwrap();
        assert!((e.f_energy - f).abs() <= 1e-9 * total);
        assert!((e.f_energy + kernel - total).abs() <= 1e-9 * total);
        assert!((e.delta_fraction - kernel / total).abs() < 1e-9);
    }
}

/// The multi-correlation of the extension at coset representatives is the
/// orbit sum scaled by `|G|/|Ω|`.
#[test]
fn correlation_values_are_scaled_orbit_sums() {
    let caps = Caps::default();
    let transitive = vec![
        ("C3", FiniteGroup::cyclic(3).unwrap()),
        ("C4", FiniteGroup::cyclic(4).unwrap()),
        ("D4", dihedral4()),
        ("S3 on 3", FiniteGroup::sym_subsets(3, 1, &caps).unwrap().0),
        ("S4 on 4", FiniteGroup::sym_subsets(4, 1, &caps).unwrap().0),
        (
            "S4 on pairs",
            FiniteGroup::sym_subsets(4, 2, &caps).unwrap().0,
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (name, g) in transitive {
        let n = g.degree();
        let a = random_vec(&mut rng, n);
        for x1 in [0, n - 1] {
            // some element sending x1 to each point
            let t: Vec<&Permutation> = (0..n)
                .map(|j| g.elements().iter().find(|h| h.apply(x1) == j).unwrap())
                .collect();
            for omega in 1..=3 {
                let table = correlation_table(&a, &g, x1, omega, CAP).unwrap();
                assert!(table.distinct_values(1e-9) <= table.kappa, "{name}");
                assert_eq!(table.s_orbit_count, table.kappa, "{name}");
                for entry in &table.entries {
                    let mut tau = entry.points.clone();
                    tau.push(x1);
                    let orbit: BTreeSet<Vec<usize>> =
                        g.elements().iter().map(|h| act(h, &tau)).collect();
                    let f: f64 = orbit
                        .iter()
                        .map(|u| u.iter().map(|&x| a[x]).product::<f64>())
                        .sum();
                    let corr: f64 = g
                        .elements()
                        .iter()
                        .map(|s| {
                            let mut term = a[s.apply(x1)];
                            for &i in &entry.points {
                                term *= a[s.compose(t[i]).apply(x1)];
                            }
                            term
                        })
                        .sum();
                    let factor = g.order() / orbit.len();
                    assert_eq!(g.order() % orbit.len(), 0);
                    assert_eq!(entry.multiplicity, factor, "{name}");
                    assert!((corr - factor as f64 * f).abs() < 1e-12, "{name}");
                    assert!((entry.value - corr).abs() < 1e-12, "{name}");
                }
            }
        }
    }
}

fn equivalent(g: &FiniteGroup, a: &[f64], b: &[f64]) -> bool {
    g.elements().iter().any(|h| h.act_vector(a).unwrap() == b)
}

#[test]
fn stacked_powers_separate_inequivalent_pairs_on_two_points() {
    let g = FiniteGroup::cyclic(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let a = random_vec(&mut rng, 2);
        let b = if rng.random_bool(0.3) {
            vec![a[1], a[0]]
        } else {
            random_vec(&mut rng, 2)
        };
        let za = stacked_invariant(&g, &a, &[1, 2], CAP).unwrap().z;
        let zb = stacked_invariant(&g, &b, &[1, 2], CAP).unwrap().z;
        let gap = za
            .iter()
            .zip(&zb)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert_eq!(gap < 1e-12, equivalent(&g, &a, &b));
    }
}

#[test]
fn canonical_form_is_constant_on_orbits() {
    let (g, _) = FiniteGroup::sym_subsets(4, 2, &Caps::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let a = random_vec(&mut rng, 6);
        let h = g.element(rng.random_range(0..g.order()));
        let (c, _) = canonicalize(&a, &g).unwrap();
        assert_eq!(canonicalize(&h.act_vector(&a).unwrap(), &g).unwrap().0, c);
        assert_eq!(canonicalize(&c, &g).unwrap().0, c);
        assert!(equivalent(&g, &a, &c));
    }
}

#[test]
fn reduced_dataset_has_no_equivalent_pair() {
    let g = dihedral4();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut points = Vec::new();
    for _ in 0..12 {
        // small integer entries force coincidences and fixed points
        let a: Vec<f64> = (0..4).map(|_| rng.random_range(0..3) as f64).collect();
        let h = g.element(rng.random_range(0..g.order()));
        points.push(h.act_vector(&a).unwrap());
        points.push(a);
    }
    let canon = reduce_dataset(&points, &g).unwrap();
    for i in 0..canon.len() {
        for j in i + 1..canon.len() {
            assert!(!equivalent(&g, &canon.reps[i], &canon.reps[j]));
        }
        let fixed = g
            .elements()
            .iter()
            .any(|h| !h.is_identity() && h.act_vector(&canon.reps[i]).unwrap() == canon.reps[i]);
        assert_eq!(canon.fixed_flags[i], fixed);
    }
    for (p, &r) in points.iter().zip(&canon.assignment) {
        assert!(equivalent(&g, p, &canon.reps[r]));
    }
    assert_eq!(canon.class_sizes.iter().sum::<usize>(), points.len());
}

#[test]
fn delta_ignores_input_order_and_stays_in_range() {
    let g = FiniteGroup::cyclic(5).unwrap();
    let inv = InvariantMap::new(&g, 2, CAP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let points: Vec<Vec<f64>> = (0..8).map(|_| random_vec(&mut rng, 5)).collect();
    let mut shuffled = points.clone();
    shuffled.reverse();
    shuffled.swap(0, 3);
    let d1 = compute_delta(&reduce_dataset(&points, &g).unwrap(), &inv).unwrap();
    let d2 = compute_delta(&reduce_dataset(&shuffled, &g).unwrap(), &inv).unwrap();
    assert_eq!(d1, d2);
    for p in &d1.per_pair {
        assert!((-1e-9..=1.0 + 1e-9).contains(&p.delta_fraction));
    }
}

#[test]
fn embedding_is_deterministic_linear_and_invariant() {
    let (g, _) = FiniteGroup::sym_subsets(4, 2, &Caps::default()).unwrap();
    let inv = InvariantMap::new(&g, 2, CAP).unwrap();
    let map = GaussianMap::sample(16, inv.kappa(), 77).unwrap();
    let again = GaussianMap::sample(16, inv.kappa(), 77).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let a1 = random_vec(&mut rng, 6);
        let a2 = random_vec(&mut rng, 6);
        let y1 = embed_point(&map, &inv, &a1).unwrap();
        let y1_bits: Vec<u64> = y1.iter().map(|v| v.to_bits()).collect();
        let repeat: Vec<u64> = embed_point(&again, &inv, &a1)
            .unwrap()
            .iter()
            .map(|v| v.to_bits())
            .collect();
        assert_eq!(repeat, y1_bits);

        let h = g.element(rng.random_range(0..g.order()));
        let moved: Vec<u64> = embed_point(&map, &inv, &h.act_vector(&a1).unwrap())
            .unwrap()
            .iter()
            .map(|v| v.to_bits())
            .collect();
        assert_eq!(moved, y1_bits);

        let y2 = embed_point(&map, &inv, &a2).unwrap();
        let z1 = inv.apply(&a1).unwrap().z;
        let z2 = inv.apply(&a2).unwrap().z;
        let diff: Vec<f64> = z1.iter().zip(&z2).map(|(x, y)| x - y).collect();
        let yd = map.apply(&diff).unwrap();
        for ((p, q), r) in y1.iter().zip(&y2).zip(&yd) {
            assert!((p - q - r).abs() < 1e-12);
        }
    }
}
