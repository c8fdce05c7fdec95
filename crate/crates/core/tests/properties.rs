//! Property tests over module invariants.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use misinfo_netkit::credprop::{self, js_divergence, link_weight, PropagationProblem};
use misinfo_netkit::embed::{self, EmbedConfig};
use misinfo_netkit::graph::{
    adjacency, bundle_from_json, generate_synthetic, FriendshipNetwork, KnowledgeGraph, NetworkBundle, SyntheticSpec, Triple,
};
use misinfo_netkit::io::to_canonical_json;
use misinfo_netkit::kgcheck::{self, CapacityRule, Claim, FlowProblem, KgView, PathConfig};
use misinfo_netkit::mitigate::hawkes::{self, HawkesCampaign};
use misinfo_netkit::mitigate::icm::exact_influence;
use misinfo_netkit::mitigate::provenance::{find_provenance_paths, ProvenanceConfig};
use misinfo_netkit::mitigate::Digraph;
use misinfo_netkit::seqrep::{self, EncoderShape, RecurrentEncoder, TrainConfig};
use misinfo_netkit::social::{self, MnmfConfig};
use misinfo_netkit::stance::{self, Priors};

fn small_spec() -> impl Strategy<Value = SyntheticSpec> {
    (0u64..1000, 2usize..12, 1usize..8, 1usize..4, 2usize..8, 1usize..3).prop_map(|(seed, users, news, publishers, words, communities)| {
        SyntheticSpec { seed, users, news, publishers, words, communities, knowledge_entities: 6, ..SyntheticSpec::default() }
    })
}

fn bundle_json(spec: &SyntheticSpec) -> String {
    String::from_utf8(to_canonical_json(&generate_synthetic(spec).unwrap()).unwrap()).unwrap()
}

// ---------------------------------------------------------------- graph core

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_is_pure_and_round_trips(spec in small_spec()) {
        let a = bundle_json(&spec);
        prop_assert_eq!(&a, &bundle_json(&spec));
        let back = bundle_from_json(&a).unwrap();
        prop_assert_eq!(String::from_utf8(to_canonical_json(&back).unwrap()).unwrap(), a);
    }

    #[test]
    fn loader_agrees_with_invariants_under_mutation(spec in small_spec(), pick in 0usize..7, salt in 0usize..1000) {
        let bundle = generate_synthetic(&spec).unwrap();
        let mut bad: NetworkBundle = bundle.clone();
        let m = bad.users.count;
        // Each mutation breaks exactly one listed invariant.
        match pick {
            0 => bad.friendship.edges.push((m, 0)),
            1 => bad.friendship.edges.insert(0, (salt % m, salt % m)),
            2 => {
                if bad.interaction.credibility.is_empty() { return Ok(()); }
                let k = salt % bad.interaction.credibility.len();
                bad.interaction.credibility[k] = 1.5;
            }
            3 => bad.interaction.labels.push(0),
            4 => {
                let Some(&e) = bad.interaction.spread.first() else { return Ok(()); };
                bad.interaction.spread.push(e);
            }
            5 => bad.knowledge.degree.push(1),
            _ => bad.stance.likes.push((m + salt, 0)),
        }
        prop_assert!(bad.validate().is_err());
        let text = serde_json::to_string(&bad).unwrap();
        prop_assert!(bundle_from_json(&text).is_err());
        // Renaming entities violates nothing.
        let mut fine = bundle;
        if let Some(n) = fine.users.names.first_mut() { n.push_str("_renamed"); }
        prop_assert!(bundle_from_json(&serde_json::to_string(&fine).unwrap()).is_ok());
    }

    #[test]
    fn loader_never_panics_on_garbage(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = bundle_from_json(&text);
        let _ = misinfo_netkit::graph::bundle_from_edge_tsv(&text);
        let _ = KnowledgeGraph::from_tsv(&text);
    }

    #[test]
    fn adjacency_keeps_direction(edges in proptest::collection::btree_set((0usize..6, 0usize..6), 0..15)) {
        let edges: Vec<_> = edges.into_iter().filter(|(a, b)| a != b).collect();
        let net = FriendshipNetwork::new(6, edges.iter().copied()).unwrap();
        let a = adjacency(&net);
        let symmetric = edges.iter().all(|&(x, y)| net.contains(y, x));
        prop_assert_eq!(a.transpose() == a, symmetric);
    }
}

// ---------------------------------------------------------------- embedding

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn embedding_terms_nonnegative(seed in 0u64..500) {
        let b = generate_synthetic(&SyntheticSpec { seed, users: 8, news: 6, ..SyntheticSpec::default() }).unwrap();
        let cfg = EmbedConfig { dim: 3, max_iters: 5, seed, ..EmbedConfig::default() };
        let fit = embed::fit_joint(&b.interaction, &b.friendship, &cfg).unwrap();
        for t in &fit.trace {
            prop_assert!(t.news >= 0.0 && t.user >= 0.0 && t.engagement >= 0.0 && t.publisher >= 0.0);
        }
        let f = &fit.factors;
        for m in [&f.news, &f.words, &f.users, &f.correlation] {
            prop_assert!(m.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn every_round_stays_nonnegative(seed in 0u64..200, rounds in 0usize..12) {
        let b = generate_synthetic(&SyntheticSpec { seed, users: 8, news: 6, ..SyntheticSpec::default() }).unwrap();
        let cfg = EmbedConfig { dim: 3, max_iters: rounds, rel_tolerance: 1e-300, seed, ..EmbedConfig::default() };
        let f = embed::fit_joint(&b.interaction, &b.friendship, &cfg).unwrap().factors;
        for m in [&f.news, &f.words, &f.users, &f.correlation] {
            prop_assert!(m.iter().all(|&x| x >= 0.0));
        }
    }
}

// ---------------------------------------------------------------- sequence encoder

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn encoder_output_inside_open_interval(seed in 0u64..1000, len in 1usize..8, scale in 0.1f64..50.0) {
        let enc = RecurrentEncoder::random(EncoderShape { input: 3, embed: 4, hidden: 4, output: 3 }, seed);
        let xs: Vec<DVector<f64>> = (0..len).map(|t| DVector::from_fn(3, |i, _| scale * ((t * 3 + i) as f64).sin())).collect();
        let v = enc.encode_inputs(&xs).unwrap();
        prop_assert!(v.iter().all(|&x| x > -1.0 && x < 1.0));
        prop_assert_eq!(v, enc.encode_inputs(&xs).unwrap());
    }
}

#[test]
fn training_is_deterministic() {
    let data: Vec<(Vec<DVector<f64>>, i8)> =
        seqrep::planted_timing_dataset(4, 10, 1).iter().map(|(f, y)| (seqrep::sequence_inputs(f, true), *y)).collect();
    let shape = EncoderShape { input: data[0].0[0].len(), embed: 4, hidden: 4, output: 3 };
    let run = || {
        let mut enc = RecurrentEncoder::random(shape, 9);
        let losses = seqrep::train(&mut enc, &data, &TrainConfig { epochs: 5, seed: 2, ..TrainConfig::default() }).unwrap();
        (enc, losses)
    };
    let (a, la) = run();
    let (b, lb) = run();
    assert_eq!(la, lb);
    assert_eq!(a.tensors(), b.tensors());
}

// ---------------------------------------------------------------- friendship embedding

fn two_cliques(perm: &[usize]) -> FriendshipNetwork {
    let mut edges = Vec::new();
    for base in [0usize, 5] {
        for a in 0..5 {
            for b in 0..5 {
                if a != b {
                    edges.push((perm[base + a], perm[base + b]));
                }
            }
        }
    }
    edges.push((perm[4], perm[5]));
    FriendshipNetwork::new(10, edges).unwrap()
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn line_probabilities_are_valid(u in proptest::collection::vec(-3.0f64..3.0, 4), ctx in proptest::collection::vec(-3.0f64..3.0, 20)) {
        let v: Vec<f64> = ctx[..4].to_vec();
        let p1 = social::line_p1(&u, &v).unwrap();
        prop_assert!(p1 > 0.0 && p1 < 1.0);
        let c = DMatrix::from_row_slice(5, 4, &ctx);
        let p2 = social::line_p2_all(&u, &c).unwrap();
        prop_assert!((p2.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mnmf_invariants(seed in 0u64..100, perm in Just((0..10usize).collect::<Vec<_>>()).prop_shuffle()) {
        let cfg = MnmfConfig { k: 4, communities: 2, iters: 40, seed, ..MnmfConfig::default() };
        let (base, trace) = social::mnmf_fit(&two_cliques(&(0..10).collect::<Vec<_>>()), &cfg).unwrap();
        for t in &trace {
            prop_assert!((t.trace_hth - 10.0).abs() <= 1e-6);
        }
        for m in [&base.m, &base.u, &base.h, &base.c] {
            prop_assert!(m.iter().all(|&x| x >= 0.0));
        }
        let (moved, _) = social::mnmf_fit(&two_cliques(&perm), &cfg).unwrap();
        let relabeled: Vec<usize> = (0..10).map(|i| moved.communities()[perm[i]]).collect();
        prop_assert!(same_partition(&base.communities(), &relabeled));
    }
}

// ---------------------------------------------------------------- credibility

fn distribution() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, 3).prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-3).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn link_weight_range(p in distribution(), q in distribution(), same in any::<bool>()) {
        let w = link_weight(&p, &q, same).unwrap();
        prop_assert!(w.abs() <= 1.0);
        let d = js_divergence(&p, &q).unwrap();
        prop_assert_eq!(w.abs() == 1.0, d == 0.0);
        prop_assert_eq!(link_weight(&p, &p, same).unwrap().abs(), 1.0);
    }

    #[test]
    fn gauge_flip_on_opposing_pair(a in -1.0f64..1.0, b in -1.0f64..1.0, w in 0.05f64..1.0, mu in 0.05f64..0.95) {
        let weights = DMatrix::from_row_slice(2, 2, &[0.0, -w, -w, 0.0]);
        let solve = |t0: Vec<f64>| credprop::propagate(&PropagationProblem::new(t0, weights.clone(), mu).unwrap(), 1e-14, 100_000).credibility;
        let t = solve(vec![a, b]);
        let flipped = solve(vec![-a, -b]);
        prop_assert!((t[0] + flipped[0]).abs() < 1e-12 && (t[1] + flipped[1]).abs() < 1e-12);
    }

    #[test]
    fn propagation_matches_closed_form(seed in 0u64..10_000, n in 2usize..25, mu in 0.05f64..0.95) {
        let p = credprop::planted_instance(seed, n, 0.6, mu).unwrap().to_problem(mu).unwrap();
        let iter = credprop::propagate(&p, 1e-13, 100_000);
        let exact = p.closed_form();
        prop_assert!((&iter.credibility - &exact).amax() < 1e-8);
    }
}

// ---------------------------------------------------------------- knowledge graph

fn random_kg() -> impl Strategy<Value = KnowledgeGraph> {
    (3usize..8).prop_flat_map(|n| {
        proptest::collection::btree_set((0..n, 0..n), 1..14).prop_map(move |pairs| {
            let triples: Vec<Triple> =
                pairs.into_iter().filter(|(a, b)| a != b).map(|(a, b)| Triple { subject: a, predicate: "r".into(), object: b }).collect();
            KnowledgeGraph::new(n, (0..n).map(|i| format!("e{i}")).collect(), triples).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_is_conserved_and_paths_respect_capacity(kg in random_kg(), directed in any::<bool>()) {
        let o = kg.entities - 1;
        let view = KgView::new(&kg, directed);
        let problem = FlowProblem::new(&view, 0, o, CapacityRule::Specificity);
        let flow = kgcheck::min_cost_max_flow(&problem);
        let net = kgcheck::net_outflow(&problem, &flow);
        for v in 1..o {
            prop_assert!(net[v].abs() <= 1e-9);
        }
        for path in kgcheck::decompose(&problem, &flow, &view) {
            for w in path.entities.windows(2) {
                let cap = problem.arcs.iter().filter(|a| a.from == w[0] && a.to == w[1]).map(|a| a.capacity).fold(0.0, f64::max);
                prop_assert!(path.flow <= cap + 1e-12);
            }
        }
    }

    #[test]
    fn path_truth_monotone_in_length(kg in random_kg()) {
        let claim = Claim { subject: "e0".into(), predicate: "q".into(), object: format!("e{}", kg.entities - 1) };
        let mut last = 0.0;
        for max_len in 1..6 {
            let t = kgcheck::truth_value_path(&kg, &claim, &PathConfig { max_len, ..PathConfig::default() }).tau;
            prop_assert!(t >= last - 1e-15);
            last = t;
        }
    }

    #[test]
    fn deleting_an_edge_never_increases_flow(kg in random_kg(), pick in 0usize..100, directed in any::<bool>()) {
        let claim = Claim { subject: "e0".into(), predicate: "q".into(), object: format!("e{}", kg.entities - 1) };
        let before = kgcheck::knowledge_flow(&kg, &claim, CapacityRule::Uniform(1.0), directed).flow_value;
        prop_assume!(!kg.triples.is_empty());
        let mut triples = kg.triples.clone();
        triples.remove(pick % triples.len());
        let smaller = KnowledgeGraph::new(kg.entities, kg.names.clone(), triples).unwrap();
        let after = kgcheck::knowledge_flow(&smaller, &claim, CapacityRule::Uniform(1.0), directed).flow_value;
        prop_assert!(after <= before + 1e-9);
    }

    #[test]
    fn deleting_an_edge_with_degrees_fixed_never_increases_flow(kg in random_kg(), pick in 0usize..100, directed in any::<bool>()) {
        prop_assume!(!kg.triples.is_empty());
        let o = kg.entities - 1;
        let before = kgcheck::knowledge_flow_between(&KgView::new(&kg, directed), 0, o, CapacityRule::Specificity).flow_value;
        let mut smaller = kg.clone();
        smaller.triples.remove(pick % kg.triples.len());
        let after = kgcheck::knowledge_flow_between(&KgView::new(&smaller, directed), 0, o, CapacityRule::Specificity).flow_value;
        prop_assert!(after <= before + 1e-9);
    }
}

// ---------------------------------------------------------------- stance

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stance_scores_stay_bounded(seed in 0u64..1000) {
        let p = stance::planted_stance(seed, 12, 10, 0.3, 0.5, 0.1);
        let mut t = stance::init(&p.network, &p.labeled_fake, &p.labeled_true, Priors::default(), false).unwrap();
        for _ in 0..30 {
            t.step();
            let unlabeled = t.news.iter().zip(&t.pinned).filter(|(_, pin)| pin.is_none()).map(|(b, _)| b);
            for b in t.users.iter().chain(unlabeled) {
                prop_assert!(b.alpha > 0.0 && b.beta > 0.0 && b.q.abs() < 1.0);
            }
        }
    }

    #[test]
    fn stance_is_user_equivariant(seed in 0u64..1000, perm in Just((0..12usize).collect::<Vec<_>>()).prop_shuffle()) {
        let p = stance::planted_stance(seed, 12, 10, 0.3, 0.5, 0.1);
        let mut moved = p.network.clone();
        moved.likes = moved.likes.iter().map(|&(u, j)| (perm[u], j)).collect();
        moved.posting = moved.posting.iter().map(|&(u, s)| (perm[u], s)).collect();
        let run = |net| {
            let mut t = stance::init(net, &p.labeled_fake, &p.labeled_true, Priors::default(), false).unwrap();
            stance::iterate(&mut t, 200, 1e-12);
            (0..10).map(|j| t.predict(j).unwrap().0).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(&p.network), run(&moved));
    }

    #[test]
    fn no_likes_means_prior_sign(seed in 0u64..1000, a in 0.5f64..4.0, b in 0.5f64..4.0) {
        let mut net = stance::planted_stance(seed, 6, 6, 0.3, 0.5, 0.1).network;
        net.likes.clear();
        net.stance.clear();
        let pr = Priors { news_alpha: a, news_beta: b, ..Priors::default() };
        let mut t = stance::init(&net, &BTreeSet::new(), &BTreeSet::new(), pr, false).unwrap();
        stance::iterate(&mut t, 10, 1e-12);
        let prior = (a - b) / (a + b);
        for j in 0..6 {
            prop_assert_eq!(t.predict(j).unwrap().1, prior);
        }
    }
}

// ---------------------------------------------------------------- mitigation

fn subsets(n: usize) -> impl Iterator<Item = BTreeSet<usize>> {
    (0u32..(1 << n)).map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn influence_is_monotone(
        n in 2usize..=6,
        raw in proptest::collection::vec((0usize..6, 0usize..6, 0.05f64..0.95), 0..9),
    ) {
        let edges: Vec<_> = raw.into_iter().filter(|&(u, v, _)| u < n && v < n && u != v).collect();
        let g = Digraph::new(n, edges);
        for seeds in subsets(n).filter(|s| !s.is_empty()) {
            let s: Vec<usize> = seeds.iter().copied().collect();
            for blocked in subsets(n).filter(|b| b.is_disjoint(&seeds)) {
                let base = exact_influence(&g, &s, &blocked);
                for v in (0..n).filter(|v| !seeds.contains(v) && !blocked.contains(v)) {
                    let mut more = s.clone();
                    more.push(v);
                    prop_assert!(exact_influence(&g, &more, &blocked) >= base - 1e-12);
                    let mut bigger = blocked.clone();
                    bigger.insert(v);
                    prop_assert!(exact_influence(&g, &s, &bigger) <= base + 1e-12);
                }
            }
        }
    }

    #[test]
    fn provenance_sources_cover_targets(
        n in 3usize..15,
        raw in proptest::collection::vec((0usize..15, 0usize..15, 0.1f64..0.9), 2..30),
        k in 1usize..3,
    ) {
        let edges: Vec<_> = raw.into_iter().filter(|&(u, v, _)| u < n && v < n && u != v).collect();
        let g = Digraph::new(n, edges);
        let targets: Vec<usize> = (0..n).filter(|&v| !g.inc[v].is_empty()).take(4).collect();
        if targets.is_empty() { return Ok(()); }
        if let Ok(res) = find_provenance_paths(&g, &targets, &ProvenanceConfig { k, ..ProvenanceConfig::default() }) {
            let reach = g.reachable(&res.sources);
            prop_assert!(targets.iter().all(|&v| reach[v]));
        }
    }
}

#[test]
fn time_rescaled_residuals_are_exponential() {
    let m = 3;
    let mut alpha = DMatrix::zeros(m, m);
    for i in 0..m {
        alpha[(i, (i + 1) % m)] = 0.3;
        alpha[(i, i)] = 0.2;
    }
    let base = vec![0.4, 0.3, 0.5];
    let omega = 2.0;
    let mut pooled = Vec::new();
    let mut seed = 0;
    while pooled.len() < 1000 {
        let b = base.clone();
        let trace = hawkes::simulate_process(&move |_| b.clone(), &alpha, omega, &[0.0, 60.0], &mut misinfo_netkit::io::seeded_rng(seed));
        pooled.extend(hawkes::compensator_residuals(&base, &alpha, omega, &trace));
        seed += 1;
    }
    pooled.truncate(1000);
    let ks = hawkes::ks_exponential(&pooled);
    assert!(ks < 0.1, "KS distance {ks}");
}

#[test]
fn stable_campaign_validates() {
    let c = HawkesCampaign {
        adjacency: DMatrix::from_element(2, 2, 1.0),
        base_fake: DVector::from_element(2, 0.1),
        base_mitigation: DVector::from_element(2, 0.1),
        excitation: DMatrix::from_element(2, 2, 0.49),
        decay: 1.0,
        horizon: 1.0,
        stages: 1,
    };
    assert!(c.validate().is_ok());
}

#[test]
fn influence_monotone_on_every_small_digraph() {
    for n in 2..=4usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).filter(|(u, v)| u != v).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(b, &(u, v))| (u, v, 0.2 + 0.6 * ((b * 7 + mask as usize) % 5) as f64 / 4.0));
            let g = Digraph::new(n, edges);
            for seeds in subsets(n).filter(|s| !s.is_empty()) {
                let s: Vec<usize> = seeds.iter().copied().collect();
                for blocked in subsets(n).filter(|b| b.is_disjoint(&seeds)) {
                    let base = exact_influence(&g, &s, &blocked);
                    for v in (0..n).filter(|v| !seeds.contains(v) && !blocked.contains(v)) {
                        let mut more = s.clone();
                        more.push(v);
                        assert!(exact_influence(&g, &more, &blocked) >= base - 1e-12);
                        let mut bigger = blocked.clone();
                        bigger.insert(v);
                        assert!(exact_influence(&g, &s, &bigger) <= base + 1e-12);
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn edge_list_round_trip_keeps_both_networks(spec in small_spec()) {
        let bundle = generate_synthetic(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.tsv");
        misinfo_netkit::graph::save_networks(&bundle, &path, misinfo_netkit::graph::BundleFormat::EdgeTsv).unwrap();
        let back = misinfo_netkit::graph::load_networks(&path, misinfo_netkit::graph::BundleFormat::EdgeTsv).unwrap();
        prop_assert_eq!(&back.friendship.edges, &bundle.friendship.edges);
        prop_assert_eq!(&back.diffusion.edges, &bundle.diffusion.edges);
        prop_assert_eq!(back.users.count, bundle.users.count);
    }
}
