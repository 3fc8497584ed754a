mod common;

use std::collections::BTreeSet;

use common::*;
use fmreason::cnf::{parse_dimacs, write_dimacs, Model};
use fmreason::compiler::{compile, compile_with, CompileOptions, Heuristic};
use fmreason::ddnnf::{parse_canonical, write_canonical};
use fmreason::direct::{
    count_direct, enumerate_direct, optimize_direct, optimize_maxsat_emulation, sat_direct, topk_configs_direct,
    topk_values_direct, DirectOptions, TopKStop,
};
use fmreason::fm::{encode_fm, parse_fm, random_feature_model, write_fm, RandomFmParams};
use fmreason::queries::{count_models, enumerate_models, optimize, topk_transform, TopKEntries, TopKMode};
use fmreason::sat::{Backend, Solver, SolverConfig};
use fmreason::{Direction, Limit};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dpll() -> DirectOptions {
    DirectOptions {
        dpll: true,
        ..DirectOptions::default()
    }
}

fn dirs() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::Min), Just(Direction::Max)]
}

fn cnf_and_weights(l: i64) -> impl Strategy<Value = (RawCnf, RawWeights)> {
    cnf_strategy(10, 30).prop_flat_map(move |c| {
        let n = c.n;
        (Just(c), weights_strategy(n, l))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sat_agrees_with_exhaustive_search(c in cnf_strategy(12, 50)) {
        let masks = oracle_masks(&c);
        let f = c.formula();
        for opts in [DirectOptions::default(), dpll()] {
            let m = sat_direct(&f, &opts).unwrap();
            prop_assert_eq!(m.is_some(), !masks.is_empty());
            if let Some(m) = m {
                prop_assert!(masks.binary_search(&model_to_mask(&m)).is_ok());
            }
        }
    }

    #[test]
    fn enumeration_matches_on_both_sides(c in cnf_strategy(10, 30)) {
        let expected: BTreeSet<u64> = oracle_masks(&c).into_iter().collect();
        let f = c.formula();
        let direct = enumerate_direct(&f, Limit::All, &DirectOptions::default()).unwrap();
        prop_assert_eq!(direct.len(), expected.len());
        prop_assert_eq!(mask_set(&direct), expected.clone());

        let circuit = compile(&f).unwrap();
        let all: Vec<Model> = enumerate_models(&circuit, Limit::All).unwrap().collect();
        prop_assert_eq!(all.len(), expected.len());
        prop_assert_eq!(mask_set(&all), expected);
        let half = all.len() / 2;
        let prefix: Vec<Model> = enumerate_models(&circuit, Limit::First(half)).unwrap().collect();
        prop_assert_eq!(&prefix[..], &all[..half]);
    }

    #[test]
    fn counts_agree(c in cnf_strategy(12, 50)) {
        let expected = BigUint::from(oracle_masks(&c).len());
        let f = c.formula();
        prop_assert_eq!(count_direct(&f, None, &DirectOptions::default()).unwrap(), expected.clone());
        for heuristic in [Heuristic::MostOccurrences, Heuristic::Vsads] {
            for cache in [true, false] {
                let opts = CompileOptions { heuristic, cache, ..CompileOptions::default() };
                let circuit = compile_with(&f, &opts).unwrap();
                prop_assert!(circuit.validate().is_valid());
                prop_assert_eq!(count_models(&circuit), expected.clone());
            }
        }
    }

    #[test]
    fn compiled_circuit_is_equivalent(c in cnf_strategy(8, 25)) {
        let masks: BTreeSet<u64> = oracle_masks(&c).into_iter().collect();
        let circuit = compile(&c.formula()).unwrap();
        for mask in 0..1u64 << c.n {
            let m = Model::from_bools(mask_to_bools(c.n, mask));
            prop_assert_eq!(circuit.evaluate(&m), masks.contains(&mask));
        }
    }

    #[test]
    fn canonical_format_round_trips(c in cnf_strategy(10, 30)) {
        let circuit = compile(&c.formula()).unwrap();
        let text = write_canonical(&circuit).unwrap();
        let back = parse_canonical(&text).unwrap();
        prop_assert_eq!(write_canonical(&back).unwrap(), text);
        prop_assert_eq!(count_models(&back), count_models(&circuit));
    }

    #[test]
    fn dimacs_round_trips(c in cnf_strategy(10, 30)) {
        let f = c.formula();
        let back = parse_dimacs(&write_dimacs(&f)).unwrap();
        prop_assert!(back.same_clauses(&f));
    }

    #[test]
    fn optimization_agrees((c, w) in cnf_and_weights(100), dir in dirs()) {
        let masks = oracle_masks(&c);
        let expected = oracle_optimum(&masks, &w, dir);
        let f = c.formula();
        let weighting = w.weighting();
        let circuit = compile(&f).unwrap();
        let results = [
            optimize_direct(&f, &weighting, dir, &DirectOptions::default()).unwrap(),
            optimize_direct(&f, &weighting, dir, &dpll()).unwrap(),
            optimize_maxsat_emulation(&f, &weighting, dir, &DirectOptions::default()).unwrap(),
            optimize(&circuit, &weighting, dir).unwrap(),
        ];
        for r in results {
            prop_assert_eq!(r.as_ref().map(|r| r.value), expected);
            if let Some(r) = r {
                let mask = model_to_mask(&r.model);
                prop_assert!(masks.binary_search(&mask).is_ok());
                prop_assert_eq!(w.value(mask), r.value);
            }
        }
    }

    #[test]
    fn scaling_weights_scales_the_optimum((c, w) in cnf_and_weights(50), factor in 1i64..20, dir in dirs()) {
        let f = c.formula();
        let circuit = compile(&f).unwrap();
        let base = optimize(&circuit, &w.weighting(), dir).unwrap().map(|r| r.value);
        let scaled = w.weighting().scaled(factor).unwrap();
        let compiled = optimize(&circuit, &scaled, dir).unwrap().map(|r| r.value);
        let direct = optimize_direct(&f, &scaled, dir, &DirectOptions::default()).unwrap().map(|r| r.value);
        prop_assert_eq!(compiled, base.map(|v| v * factor));
        prop_assert_eq!(direct, compiled);
    }

    #[test]
    fn topk_agrees((c, w) in cnf_and_weights(20), k in 1usize..8, dir in dirs()) {
        let masks = oracle_masks(&c);
        let f = c.formula();
        let weighting = w.weighting();
        let circuit = compile(&f).unwrap();

        let values = oracle_topk_values(&masks, &w, k, dir);
        prop_assert_eq!(&topk_values_direct(&f, &weighting, k, dir, &DirectOptions::default()).unwrap(), &values);
        prop_assert_eq!(&topk_transform(&circuit, &weighting, k, dir, TopKMode::Values).unwrap().values(), &values);

        let config_values = oracle_topk_config_values(&masks, &w, k, dir);
        let direct = topk_configs_direct(&f, &weighting, k, dir, TopKStop::KBest, &DirectOptions::default()).unwrap();
        prop_assert_eq!(direct.iter().map(|r| r.value).collect::<Vec<_>>(), config_values.clone());
        let list = topk_transform(&circuit, &weighting, k, dir, TopKMode::Configurations).unwrap();
        let TopKEntries::Configurations(entries) = &list.entries else {
            panic!("configurations mode");
        };
        prop_assert_eq!(entries.iter().map(|(v, _)| *v).collect::<Vec<_>>(), config_values);
        for (v, m) in entries.iter().map(|(v, m)| (*v, m)).chain(direct.iter().map(|r| (r.value, &r.model))) {
            let mask = model_to_mask(m);
            prop_assert!(masks.binary_search(&mask).is_ok());
            prop_assert_eq!(w.value(mask), v);
        }
        let distinct: BTreeSet<u64> = entries.iter().map(|(_, m)| model_to_mask(m)).collect();
        prop_assert_eq!(distinct.len(), entries.len());
    }

    #[test]
    fn pb_constraints_match_dpll(c in cnf_strategy(8, 20), w in weights_strategy(8, 9), bound in 0i64..60) {
        // Coefficient pos + 1 on each variable, negated when neg is odd.
        let f = c.formula();
        let terms: Vec<(i64, fmreason::cnf::Lit)> = (0..c.n)
            .map(|i| {
                let v = fmreason::cnf::Var::new(i + 1);
                let lit = if w.neg[i as usize] % 2 == 1 { v.negative() } else { v.positive() };
                (w.pos[i as usize] + 1, lit)
            })
            .collect();
        let lhs = |mask: u64| -> i64 {
            (0..c.n as usize)
                .filter(|&i| (mask >> i & 1 == 1) != (w.neg[i] % 2 == 1))
                .map(|i| w.pos[i] + 1)
                .sum()
        };
        let masks = oracle_masks(&c);
        let expected = masks.iter().any(|&mask| lhs(mask) >= bound);
        for backend in [Backend::Cdcl, Backend::Dpll] {
            let mut s = Solver::with_config(&f, SolverConfig { backend, ..SolverConfig::default() });
            s.add_pb(&terms, bound).unwrap();
            let r = s.solve(&[]).unwrap();
            prop_assert_eq!(r.is_sat(), expected);
            if let Some(m) = r.model() {
                let mask = model_to_mask(m);
                prop_assert!(masks.binary_search(&mask).is_ok());
                prop_assert!(lhs(mask) >= bound);
            }
        }
    }

    #[test]
    fn encoding_matches_diagram_semantics(seed in any::<u64>(), n in 1usize..14, constraints in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fm = random_feature_model(&mut rng, RandomFmParams::new(n, constraints));
        let (f, names) = encode_fm(&fm);
        prop_assert_eq!(f.num_vars() as usize, fm.num_features());
        let raw = RawCnf::from_formula(&f);
        prop_assert_eq!(named(oracle_masks(&raw), names.names()), fm_configurations(&fm));
        let reparsed = parse_fm(&write_fm(&fm)).unwrap();
        prop_assert_eq!(write_fm(&reparsed), write_fm(&fm));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimization_at_large_weights((c, w) in cnf_and_weights(1_000_000), dir in dirs()) {
        let masks = oracle_masks(&c);
        let f = c.formula();
        let circuit = compile(&f).unwrap();
        let expected = oracle_optimum(&masks, &w, dir);
        let weighting = w.weighting();
        prop_assert_eq!(optimize(&circuit, &weighting, dir).unwrap().map(|r| r.value), expected);
        prop_assert_eq!(
            optimize_direct(&f, &weighting, dir, &DirectOptions::default()).unwrap().map(|r| r.value),
            expected
        );
    }
}
