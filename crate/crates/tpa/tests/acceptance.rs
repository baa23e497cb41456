//! Acceptance gate: one test per criterion, each printing a single
//! pass line (run with `--nocapture` to see them). Any failure anywhere
//! in this file fails the build.

use std::process::Command;
use std::time::Instant;

use tpa::automata::{
    behaviors, check_reactive, check_strong_pulse, check_weak_pulse, state, Alphabet, Automaton,
    Delta, PortSignature, PulseVerdict, Transition,
};
use tpa::builtins::{blocking_pair, buffer, fair_merge, merges};
use tpa::composition::{
    check_compose_precondition, compose, compose_signatures, ComposeConfig, ComposeError,
};
use tpa::denotational::{
    banach_fix, check_equivalence, DenotError, EquivOutcome, FixConfig, ResolverConfig, StepFun,
};
use tpa::history::{baire_distance, chan, msg, ChannelSet, DyadicDistance, History, Slice};
use tpa::random::{
    random_acyclic_pair, random_loop_transformer, random_sparse_acyclic_pair,
    random_strong_cyclic_pair, seed_batch,
};

const BUDGET: usize = 10_000_000;

fn fm_and_renamed_buf(alphabet: &Alphabet) -> (Automaton, Automaton) {
    use tpa::automata::rename_channel;
    let fm = fair_merge(alphabet, 1);
    let buf = buffer(alphabet, 1, 4);
    let buf = rename_channel(&buf, "o", "b_out");
    let buf = rename_channel(&buf, "i", "o");
    (fm, buf)
}

#[test]
fn criterion_01_decomposition_oracle_on_random_acyclic_pairs() {
    let started = Instant::now();
    let alphabet = Alphabet::of(&["a", "b"]);
    for seed in seed_batch(0xA11, 100) {
        let (a1, a2) = random_acyclic_pair(seed, &alphabet, false);
        let product = compose(&a1, &a2, &ComposeConfig::default())
            .expect("acyclic compositions are well defined")
            .automaton;
        let verdict = tpa::composition::decomposition_oracle(&a1, &a2, &product, 3, BUDGET)
            .expect("oracle runs within budget");
        assert!(verdict.is_ok(), "seed {seed}: {verdict:?}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    println!(
        "criterion 1: pass - decomposition oracle ok on 100 random acyclic pairs in {elapsed:?}"
    );
}

#[test]
fn criterion_02_equivalence_of_state_and_history_semantics() {
    let alphabet = Alphabet::of(&["a"]);
    let (fm, buf) = fm_and_renamed_buf(&alphabet);
    let rcfg = ResolverConfig {
        member_budget: 20_000,
        ..ResolverConfig::default()
    };
    let verdict = check_equivalence(&fm, &buf, 2, &ComposeConfig::default(), &rcfg)
        .expect("equivalence harness runs");
    assert!(
        matches!(verdict, EquivOutcome::Equivalent { exhaustive: true }),
        "{verdict:?}"
    );

    let alphabet2 = Alphabet::of(&["a", "b"]);
    for seed in seed_batch(0xE9, 25) {
        let (a1, a2) = random_sparse_acyclic_pair(seed, &alphabet2);
        let verdict = check_equivalence(&a1, &a2, 2, &ComposeConfig::default(), &rcfg)
            .expect("equivalence harness runs");
        assert!(
            matches!(verdict, EquivOutcome::Equivalent { exhaustive: true }),
            "seed {seed}: {verdict:?}"
        );
    }
    println!(
        "criterion 2: pass - state-based and history-based semantics agree for FM->BUF and 25 random pairs"
    );
}

#[test]
fn criterion_03_every_reactive_automaton_is_weakly_pulse_driven() {
    let alphabet = Alphabet::of(&["a", "b"]);
    for seed in seed_batch(0x3, 100) {
        let spec = tpa::random::RandomSpec::new(alphabet.clone(), &["i"], &["o"]);
        let a = tpa::random::random_automaton(seed, &spec);
        assert!(check_reactive(&a).unwrap().is_ok(), "seed {seed}");
        let verdict = check_weak_pulse(&a, 3, BUDGET).unwrap();
        assert!(verdict.is_ok(), "seed {seed}: {verdict:?}");
    }

    // A stuck automaton is rejected by the reactiveness check before any
    // pulse analysis applies.
    let sig = PortSignature::new(
        alphabet.clone(),
        ChannelSet::of(&["i"]),
        ChannelSet::of(&["o"]),
        ChannelSet::empty(),
    );
    let mut action = Slice::empty(&sig.channels());
    action.set(chan("i"), vec![msg("a")]);
    let stuck = Automaton {
        signature: sig,
        states: [state("q0")].into_iter().collect(),
        start: state("q0"),
        delta: Delta::Table(vec![Transition {
            source: state("q0"),
            action,
            target: state("q0"),
        }]),
        input_bound: 1,
    };
    assert!(!check_reactive(&stuck).unwrap().is_ok());
    println!("criterion 3: pass - weak pulse-drivenness holds for 100 random reactive automata; non-reactive fixture rejected");
}

#[test]
fn criterion_04_fair_merge_weak_only_buffer_strong() {
    let alphabet = Alphabet::of(&["a", "b"]);
    let fm = fair_merge(&alphabet, 1);
    assert!(check_weak_pulse(&fm, 2, BUDGET).unwrap().is_ok());
    match check_strong_pulse(&fm, 2, BUDGET).unwrap() {
        PulseVerdict::Witness { n, .. } => assert_eq!(n, 0),
        PulseVerdict::Ok => panic!("the fair merge must not be strongly pulse-driven"),
    }

    let buf = buffer(&Alphabet::of(&["a"]), 1, 8);
    assert!(check_strong_pulse(&buf, 3, BUDGET).unwrap().is_ok());
    println!("criterion 4: pass - FM is weakly but not strongly pulse-driven (tick-0 witness); BUF is strong");
}

#[test]
fn criterion_05_blocking_pair_composes_to_nothing() {
    let alphabet = Alphabet::of(&["a", "b"]);
    let (b1, b2) = blocking_pair(&alphabet, 1);
    let sig = compose_signatures(&b1.signature, &b2.signature).unwrap();
    assert!(sig.inputs.is_empty());
    assert_eq!(sig.outputs, ChannelSet::of(&["i", "o"]));
    assert!(sig.hidden.is_empty());
    for bound in 1..=3 {
        let cfg = ComposeConfig {
            joint_bound: bound,
            ..ComposeConfig::default()
        };
        match compose(&b1, &b2, &cfg) {
            Err(ComposeError::EmptyComposition {
                state, bound: b, ..
            }) => {
                assert_eq!(state.as_ref(), "(s1,s2)");
                assert_eq!(b, bound);
            }
            other => panic!("bound {bound}: expected an empty composition, got {other:?}"),
        }
    }
    println!("criterion 5: pass - blocking pair yields an empty composition at the start state for B in 1..=3");
}

#[test]
fn criterion_06_strong_pulse_drivenness_is_preserved_by_composition() {
    let alphabet = Alphabet::of(&["a", "b"]);
    for seed in seed_batch(0x6, 25) {
        let (a1, a2) = random_strong_cyclic_pair(seed, &alphabet);
        let pre = check_compose_precondition(&a1, &a2, 2, BUDGET).unwrap();
        assert!(pre.well_defined(), "seed {seed}");
        let product = compose(&a1, &a2, &ComposeConfig::default())
            .expect("well-defined composition")
            .automaton;
        let verdict = check_strong_pulse(&product, 3, BUDGET).unwrap();
        assert!(verdict.is_ok(), "seed {seed}: {verdict:?}");
    }
    println!("criterion 6: pass - 25 strong pairs compose to strongly pulse-driven products");
}

#[test]
fn criterion_07_banach_engine() {
    let domain = ChannelSet::of(&["x"]);
    let alphabet = Alphabet::of(&["a", "b"]);
    let horizon = 8;
    for seed in seed_batch(0x7, 20) {
        let (f, seed_a, seed_b) = random_loop_transformer(seed, &domain, &alphabet, 1, horizon);
        assert_ne!(seed_a, seed_b, "seed {seed}");
        let mut cfg = FixConfig::new(horizon);
        cfg.seed = Some(seed_a);
        cfg.check_seed = Some(seed_b);
        let out = banach_fix(&domain, &f, &cfg).expect("contractive transformers converge");
        assert!(
            out.iterations <= 9,
            "seed {seed}: {} iterations",
            out.iterations
        );
        let reapplied = f(&out.value).unwrap();
        assert_eq!(
            baire_distance(&out.value, &reapplied).unwrap(),
            DyadicDistance::UpperBound { exponent: 8 },
            "seed {seed}"
        );
    }

    let mut cfg = FixConfig::new(horizon);
    cfg.check_seed = Some({
        let mut h = History::empty(domain.clone());
        for _ in 0..horizon {
            let mut s = Slice::empty(&domain);
            s.set(chan("x"), vec![msg("a")]);
            h.push(s).unwrap();
        }
        h
    });
    let err = banach_fix(&domain, |h: &History| Ok(h.clone()), &cfg).unwrap_err();
    assert!(matches!(err, DenotError::NoConvergence(_)));
    println!("criterion 7: pass - 20 contractive loops solved in <= 9 iterations, seed-independent; identity rejected");
}

#[test]
fn criterion_08_contraction_constants() {
    let alphabet = Alphabet::of(&["a"]);
    let d_in = ChannelSet::of(&["i"]);
    let horizon = 3;
    let inputs = tpa::automata::histories_over(&d_in, &alphabet, 1, horizon);
    let strong_funs = vec![
        StepFun::delay(&[("i", "o")], Slice::of(&[("o", &[])])),
        StepFun::delay(&[("i", "o")], Slice::of(&[("o", &["a"])])),
    ];
    let copy = StepFun::copy(&[("i", "o")]);
    let mut tight = false;
    for a in &inputs {
        for b in &inputs {
            let d = baire_distance(a, b).unwrap();
            for f in &strong_funs {
                let df = baire_distance(&f.apply(a).unwrap(), &f.apply(b).unwrap()).unwrap();
                match d {
                    DyadicDistance::Exact { .. } => {
                        assert!(df.value() <= 0.5 * d.value(), "{a} / {b}")
                    }
                    DyadicDistance::UpperBound { .. } => {
                        assert!(df.bound_exponent() >= horizon as u32)
                    }
                }
            }
            let dc = baire_distance(&copy.apply(a).unwrap(), &copy.apply(b).unwrap()).unwrap();
            assert!(dc.value() <= d.value());
            if let DyadicDistance::Exact { exponent } = d {
                if dc == (DyadicDistance::Exact { exponent }) {
                    tight = true;
                }
            }
        }
    }
    assert!(tight, "the identity copy must attain its Lipschitz bound");
    println!("criterion 8: pass - strong functions halve distances, weak functions never expand them; copy is tight");
}

#[test]
fn criterion_09_fair_merge_conserves_and_preserves_order() {
    let alphabet = Alphabet::of(&["a", "b"]);
    let fm = fair_merge(&alphabet, 1);
    let behs = behaviors(&fm, 3, BUDGET).unwrap();
    assert!(!behs.is_empty());
    for b in &behs {
        for t in 0..b.len() {
            let slice = b.tick(t);
            let (i, j, o) = (slice.seq("i"), slice.seq("j"), slice.seq("o"));
            // Conservation: the output multiset is the two input
            // multisets combined.
            let mut expected: Vec<_> = i.iter().chain(j.iter()).cloned().collect();
            expected.sort();
            let mut got = o.to_vec();
            got.sort();
            assert_eq!(got, expected, "tick {t} of {b}");
            // Order preservation: the output is an interleaving.
            assert!(
                merges(i, j).contains(&o.to_vec()),
                "tick {t} of {b} is not an interleaving"
            );
        }
    }
    println!(
        "criterion 9: pass - all {} exhaustive FM behaviors conserve messages and preserve per-source order",
        behs.len()
    );
}

#[test]
fn criterion_10_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_tpanet");
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/fm.net");

    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().expect("binary runs");
        (out.status.code(), out.stdout)
    };

    let (code_a, trace_a) = run(&["run", "--seed", "1", fixture]);
    let (code_b, trace_b) = run(&["run", "--seed", "1", fixture]);
    assert_eq!(code_a, Some(0));
    assert_eq!(code_b, Some(0));
    assert_eq!(trace_a, trace_b, "seeded runs must be byte-identical");

    let (bc_a, behs_a) = run(&["behaviors", fixture]);
    let (bc_b, behs_b) = run(&["behaviors", fixture]);
    assert_eq!(bc_a, Some(0));
    assert_eq!(bc_b, Some(0));
    assert_eq!(behs_a, behs_b, "behavior listings must be stable");

    // The listing is canonically sorted: each rendered behavior parses
    // back and the sequence is strictly increasing.
    let text = String::from_utf8(behs_a).unwrap();
    let mut blocks: Vec<History> = Vec::new();
    let mut current = String::new();
    for line in text.lines().skip(1) {
        if line.starts_with("-- behavior") {
            if !current.is_empty() {
                blocks.push(tpa::cli::parse_trace(&current).unwrap());
                current.clear();
            }
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    if !current.is_empty() {
        blocks.push(tpa::cli::parse_trace(&current).unwrap());
    }
    assert!(blocks.len() > 1);
    for w in blocks.windows(2) {
        assert!(w[0] < w[1], "behaviors out of canonical order");
    }
    println!("criterion 10: pass - seeded runs byte-identical; behavior listing stable and sorted");
}
