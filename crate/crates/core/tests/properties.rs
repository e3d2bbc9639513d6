//! Property tests over seeded random monomers and matrices.

use polyseq::graph::{cyclomatic_number, MolGraph};
use polyseq::matrix::DenseMatrix;
use polyseq::nets::verify::random_monomer;
use polyseq::nets::{fragcam, layer_norm_columns, softmax_columns, ModelConfig, ReferenceModel};
use polyseq::polymer::{backbone_mask, lga_repeat_count, star_link, MonomerGraph};
use polyseq::psmiles::{parse, polymer_key, random_augment, random_augment_traced, translate, translation_cuts, write};
use polyseq::rng::hash_words;
use polyseq::rsit::{rsit, ReferencePredictor, RsitConfig};
use polyseq::wl::{atom_colors, histogram, isomorphic, isomorphic_colored, wl_refine};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn monomer(seed: u64) -> MonomerGraph {
    random_monomer(&mut ChaCha8Rng::seed_from_u64(seed), 4..=20)
}

/// Atom colors with the boundary atoms tagged.
fn boundary_colors(m: &MonomerGraph) -> Vec<u64> {
    let mut c = atom_colors(&m.graph);
    c[m.head] = hash_words(&[c[m.head], 1]);
    c[m.tail] = hash_words(&[c[m.tail], 2]);
    c
}

fn shuffled(m: &MonomerGraph, seed: u64) -> (MonomerGraph, Vec<usize>) {
    let mut perm: Vec<usize> = (0..m.atom_count()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let g = m.graph.permuted(&perm);
    (MonomerGraph::new(g, perm[m.head], perm[m.tail]).unwrap(), perm)
}

/// Cycle-space dimension by union-find: edges closing a cycle.
fn brute_force_rings(g: &MolGraph) -> usize {
    let mut parent: Vec<usize> = (0..g.atom_count()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut closing = 0;
    for b in g.bonds() {
        let (a, c) = (find(&mut parent, b.u), find(&mut parent, b.v));
        if a == c {
            closing += 1;
        } else {
            parent[a] = c;
        }
    }
    closing
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn write_parse_round_trip(seed in any::<u64>()) {
        let m = monomer(seed);
        let s = write(&m);
        let back = parse(&s).unwrap();
        prop_assert!(isomorphic_colored(&m.graph, &boundary_colors(&m), &back.graph, &boundary_colors(&back))
            .unwrap()
            .is_some(), "{s}");
        prop_assert_eq!(write(&back), s);
    }

    #[test]
    fn translations_keep_star_graph(seed in any::<u64>()) {
        let m = monomer(seed);
        let g = star_link(&m).graph;
        for cut in translation_cuts(&m) {
            let t = translate(&m, cut);
            prop_assert!(isomorphic(&star_link(&t).graph, &g).unwrap().is_some());
        }
    }

    #[test]
    fn augment_is_seeded_and_key_preserving(seed in any::<u64>(), trial in any::<u64>()) {
        let s = write(&monomer(seed));
        let a = random_augment(&s, &mut ChaCha8Rng::seed_from_u64(trial)).unwrap();
        let b = random_augment(&s, &mut ChaCha8Rng::seed_from_u64(trial)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(polymer_key(&a).unwrap(), polymer_key(&s).unwrap());
        let t = random_augment_traced(&s, &mut ChaCha8Rng::seed_from_u64(trial)).unwrap();
        prop_assert!(t.cut < t.cut_count);
    }

    #[test]
    fn star_link_keeps_atoms(seed in any::<u64>()) {
        let m = monomer(seed);
        let sl = star_link(&m);
        let n = sl.base.atom_count();
        prop_assert_eq!(&sl.graph.atoms()[..n], sl.base.graph.atoms());
        prop_assert_eq!(sl.graph.bond_count(), sl.base.graph.bond_count() + 1);
    }

    #[test]
    fn backbone_follows_relabeling(seed in any::<u64>(), p in any::<u64>()) {
        let m = monomer(seed);
        let (m2, perm) = shuffled(&m, p);
        let a = backbone_mask(&m);
        let b = backbone_mask(&m2);
        for i in 0..m.atom_count() {
            prop_assert_eq!(a[i], b[perm[i]]);
        }
    }

    #[test]
    fn ring_count_is_cycle_space_dimension(seed in any::<u64>()) {
        let m = monomer(seed);
        prop_assert_eq!(cyclomatic_number(&m.graph), brute_force_rings(&m.graph));
    }

    #[test]
    fn lga_repeat_count_is_minimal(d_b in 0usize..12, d_thres in 1usize..6) {
        let k = lga_repeat_count(d_b, d_thres);
        let dist = |k: usize| k * d_b + (k - 1);
        prop_assert!(dist(k) > 2 * d_thres - 1);
        if k > 1 {
            prop_assert!(dist(k - 1) < 2 * d_thres);
        }
    }

    #[test]
    fn wl_bounded_by_isomorphism(seed in any::<u64>(), p in any::<u64>()) {
        let m = monomer(seed);
        let (m2, _) = shuffled(&m, p);
        let a = wl_refine(&m.graph, &atom_colors(&m.graph));
        let b = wl_refine(&m2.graph, &atom_colors(&m2.graph));
        prop_assert_eq!(histogram(&a.colors), histogram(&b.colors));
    }

    #[test]
    fn softmax_and_layer_norm_moments(rows in 2usize..9, cols in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DenseMatrix::from_fn(rows, cols, |_, _| rand::Rng::gen_range(&mut rng, -4.0..4.0));
        let s = softmax_columns(&x);
        for j in 0..cols {
            let total: f64 = s.column(j).iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
        let y = layer_norm_columns(&x);
        for j in 0..cols {
            let c = y.column(j);
            let mean = c.iter().sum::<f64>() / rows as f64;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / rows as f64;
            prop_assert!(mean.abs() < 1e-9);
            // constant columns normalize to zero
            prop_assert!((var - 1.0).abs() < 1e-6 || var < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn fragcam_is_complete(seed in any::<u64>(), parts in 1usize..5) {
        let m = monomer(seed);
        let model = ReferenceModel::generate(ModelConfig { dim: 8, layers: 2, ..ModelConfig::default() }, seed);
        let n = m.atom_count();
        let parts = parts.min(n);
        let fragments: Vec<Vec<usize>> = (0..parts).map(|p| (p..n).step_by(parts).collect()).collect();
        let r = fragcam(&model, &m, &fragments, None).unwrap();
        prop_assert!((r.scores.iter().sum::<f64>() - r.y_hat).abs() < 1e-9);
    }

    #[test]
    fn link_predictor_is_rsit_invariant(seeds in proptest::collection::vec(any::<u64>(), 3..6)) {
        let data: Vec<(String, f64)> = seeds.iter().map(|&s| (write(&monomer(s)), (s % 7) as f64)).collect();
        let model = ReferenceModel::generate(ModelConfig { dim: 8, layers: 2, ..ModelConfig::default() }, 5);
        let cfg = RsitConfig { trials: 3, ..RsitConfig::default() };
        let p = ReferencePredictor { model };
        let r = rsit(&p, &data, &cfg);
        prop_assert!(r.failures.is_empty());
        prop_assert!(r.max_prediction_shift < 1e-6);
        prop_assert_eq!(r, rsit(&p, &data, &cfg));
    }
}
