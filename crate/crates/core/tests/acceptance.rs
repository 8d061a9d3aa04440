//! End-to-end acceptance checks. Each numbered criterion prints one
//! PASS/FAIL line; the test fails if any criterion fails.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use parrondo_qw::attack::{
    bb84_run, eve_attack_sweep, Bb84Config, EveBasis, EveReencode,
};
use parrondo_qw::circuit::Circuit;
use parrondo_qw::dist::Distribution;
use parrondo_qw::linalg::{c64, kron, ComplexMatrix};
use parrondo_qw::metrics::{hellinger_distance, hellinger_fidelity, total_variation};
use parrondo_qw::noise::NoiseSpec;
use parrondo_qw::protocol::{run_protocol, ProtocolConfig};
use parrondo_qw::router::{route, CouplingGraph, LayoutAssignment};
use parrondo_qw::walk::{
    diagonalized_translation, find_period, find_sequence_period, initial_state,
    sequence_unitary, translation_operator, walk_unitary, CoinParams, ParrondoSequence,
    WalkerInit,
};

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn(&mut Shared) -> Result<(), String>,
}

/// Values passed between criteria (criterion 8 compares against 7's QBER).
#[derive(Default)]
struct Shared {
    eve_mean_qber: Option<f64>,
}

fn check(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

fn revival_probability(u: &ComplexMatrix, init: &parrondo_qw::state::StateVector) -> f64 {
    let fin = init.apply(u).unwrap();
    let overlap: num_complex::Complex64 = init
        .amplitudes()
        .iter()
        .zip(fin.amplitudes())
        .map(|(a, b)| a.conj() * b)
        .sum();
    overlap.norm_sqr()
}

fn c1_parrondo_periodicity(_: &mut Shared) -> Result<(), String> {
    for (seq, dim, label) in [
        (ParrondoSequence::aabb(5), 8usize, "4-cycle"),
        (ParrondoSequence::aabb_prime(5), 6, "3-cycle"),
    ] {
        let u = sequence_unitary(&seq).map_err(|e| e.to_string())?;
        let dev = u.max_abs_diff(&ComplexMatrix::identity(dim));
        check(dev <= 5e-3, &format!("{label}: 20-step deviation {dev:.2e} > 5e-3"))?;
        let report = find_sequence_period(&seq, 20, 5e-3).map_err(|e| e.to_string())?;
        check(
            report.period == Some(20),
            &format!("{label}: smallest period found {:?}, expected 20", report.period),
        )?;
        let init = initial_state(&WalkerInit::basis(0, 0, seq.k).unwrap());
        let p = revival_probability(&u, &init);
        check(p >= 0.999, &format!("{label}: revival probability {p:.5} < 0.999"))?;
    }
    Ok(())
}

fn c2_chaotic_individual_coins(_: &mut Shared) -> Result<(), String> {
    for (coin, label) in [(CoinParams::parrondo_a(), "A"), (CoinParams::parrondo_b(), "B")] {
        let w = walk_unitary(&coin, 4).map_err(|e| e.to_string())?;
        let report = find_period(&w, 1000, 1e-6).map_err(|e| e.to_string())?;
        check(
            report.period.is_none(),
            &format!("coin {label}: unexpected period {:?} within 1000 steps", report.period),
        )?;
    }
    Ok(())
}

fn c3_ideal_protocol_completeness(_: &mut Shared) -> Result<(), String> {
    for k in 0..4 {
        for x in 0..4 {
            let cfg = ProtocolConfig::standard(k, x).map_err(|e| e.to_string())?;
            let t = run_protocol(&cfg).map_err(|e| e.to_string())?;
            let expected = (k + x) % 4;
            let p = t.decryption_distribution.probability(expected);
            check(
                p >= 0.999,
                &format!("(k={k}, x={x}): P(correct outcome) = {p:.5} < 0.999"),
            )?;
            check(
                t.recovered_k == k,
                &format!("(k={k}, x={x}): recovered {} instead", t.recovered_k),
            )?;
        }
    }
    Ok(())
}

fn c4_circuit_matrix_equivalence(_: &mut Shared) -> Result<(), String> {
    for coin in [CoinParams::parrondo_a(), CoinParams::parrondo_b()] {
        for t in [1usize, 2, 18] {
            let mut c = Circuit::new(3);
            c.qft_block(&[0, 1], false).map_err(|e| e.to_string())?;
            for _ in 0..t {
                c.walk_step_block(&coin, &[0, 1], 2).map_err(|e| e.to_string())?;
            }
            c.qft_block(&[0, 1], true).map_err(|e| e.to_string())?;
            let circuit_u = c.unitary_of().map_err(|e| e.to_string())?;
            let matrix_u = walk_unitary(&coin, 4)
                .and_then(|w| w.pow(t))
                .map_err(|e| e.to_string())?;
            let diff = circuit_u.max_abs_diff(&matrix_u);
            check(
                diff <= 1e-10,
                &format!("t={t}: circuit/matrix deviation {diff:.2e} > 1e-10"),
            )?;
        }
    }
    Ok(())
}

fn c5_commutation_and_diagonal_translations(_: &mut Shared) -> Result<(), String> {
    for coin in [CoinParams::parrondo_a(), CoinParams::parrondo_b()] {
        let w = walk_unitary(&coin, 4).map_err(|e| e.to_string())?;
        for k in 0..4 {
            let t = kron(
                &ComplexMatrix::identity(2),
                &translation_operator(k, 4).unwrap(),
            );
            let comm = w
                .matmul(&t)
                .unwrap()
                .max_abs_diff(&t.matmul(&w).unwrap());
            check(comm <= 1e-10, &format!("k={k}: commutator norm {comm:.2e} > 1e-10"))?;
        }
    }
    // Explicit diagonal forms: diag(i^{k·j}) for j = 0..3.
    let i = c64(0.0, 1.0);
    for k in 0..4usize {
        let (hi, lo) = diagonalized_translation(k).map_err(|e| e.to_string())?;
        let got = kron(&hi, &lo);
        let expected =
            ComplexMatrix::from_fn(4, 4, |r, c| if r == c { i.powu((k * r) as u32) } else { c64(0.0, 0.0) });
        let diff = got.max_abs_diff(&expected);
        check(diff <= 1e-12, &format!("k={k}: diagonal factor deviation {diff:.2e} > 1e-12"))?;
    }
    Ok(())
}

fn c6_noise_behavior(_: &mut Shared) -> Result<(), String> {
    let per_gate = ProtocolConfig::standard(1, 0)
        .unwrap()
        .with_noise(NoiseSpec::per_gate_uniform(0.03).unwrap())
        .with_shots(100_000, 1);
    let t = run_protocol(&per_gate).map_err(|e| e.to_string())?;
    check(
        (0.6..=0.95).contains(&t.hellinger_fidelity),
        &format!("per-gate p=0.03: fidelity {:.4} outside [0.6, 0.95]", t.hellinger_fidelity),
    )?;
    check(t.k_prime == 1, &format!("per-gate p=0.03: argmax {} != 1", t.k_prime))?;

    let mut fidelities = Vec::new();
    for p in [0.0, 0.01, 0.03, 0.1, 0.2] {
        let cfg = ProtocolConfig::standard(1, 0)
            .unwrap()
            .with_noise(NoiseSpec::terminal(p).unwrap());
        let t = run_protocol(&cfg).map_err(|e| e.to_string())?;
        if (p - 0.03).abs() < 1e-12 {
            check(
                t.hellinger_fidelity >= 0.9,
                &format!("terminal p=0.03: fidelity {:.4} < 0.9", t.hellinger_fidelity),
            )?;
        }
        if (p - 0.2).abs() < 1e-12 {
            check(
                t.hellinger_fidelity >= 0.6,
                &format!("terminal p=0.2: fidelity {:.4} < 0.6", t.hellinger_fidelity),
            )?;
            check(t.k_prime == 1, &format!("terminal p=0.2: argmax {} != 1", t.k_prime))?;
        }
        fidelities.push(t.hellinger_fidelity);
    }
    for pair in fidelities.windows(2) {
        check(
            pair[1] <= pair[0] + 1e-9,
            &format!("terminal fidelity not non-increasing: {fidelities:?}"),
        )?;
    }
    Ok(())
}

fn c7_eve_attack(shared: &mut Shared) -> Result<(), String> {
    let cfg = ProtocolConfig::standard(1, 0).unwrap();
    let ideal = eve_attack_sweep(&cfg, EveBasis::RandomPerQubit, EveReencode::HaarRandom, 200, 0.5)
        .map_err(|e| e.to_string())?;
    check(
        ideal.mean_p_correct <= 0.3,
        &format!("ideal channel: mean P(correct) {:.4} > 0.3", ideal.mean_p_correct),
    )?;
    check(
        ideal.mean_qber >= 0.6,
        &format!("ideal channel: mean QBER {:.4} < 0.6", ideal.mean_qber),
    )?;
    shared.eve_mean_qber = Some(ideal.mean_qber);

    let noisy_cfg = cfg.with_noise(NoiseSpec::per_gate_uniform(0.03).unwrap());
    let noisy = eve_attack_sweep(
        &noisy_cfg,
        EveBasis::RandomPerQubit,
        EveReencode::HaarRandom,
        50,
        0.5,
    )
    .map_err(|e| e.to_string())?;
    check(
        noisy.mean_qber >= 0.6,
        &format!("noisy channel: mean QBER {:.4} < 0.6", noisy.mean_qber),
    )?;
    Ok(())
}

fn c8_bb84_baseline(shared: &mut Shared) -> Result<(), String> {
    let clean = bb84_run(&Bb84Config::new(10_000, false, 12).unwrap()).map_err(|e| e.to_string())?;
    check(clean.qber == 0.0, &format!("no-Eve QBER {} != 0", clean.qber))?;
    let tapped = bb84_run(&Bb84Config::new(10_000, true, 12).unwrap()).map_err(|e| e.to_string())?;
    check(
        (0.22..=0.28).contains(&tapped.qber),
        &format!("Eve QBER {:.4} outside [0.22, 0.28]", tapped.qber),
    )?;
    let walk_qber = shared
        .eve_mean_qber
        .ok_or("walk-protocol QBER unavailable (criterion 7 did not run)")?;
    check(
        walk_qber - tapped.qber >= 0.3,
        &format!("walk QBER {walk_qber:.4} does not exceed BB84 {:.4} by 0.3", tapped.qber),
    )?;
    Ok(())
}

fn c9_metric_closed_forms(_: &mut Shared) -> Result<(), String> {
    let point = Distribution::from_probabilities(vec![1.0, 0.0]);
    let fair = Distribution::from_probabilities(vec![0.5, 0.5]);
    let f = hellinger_fidelity(&point, &fair);
    check((f - 0.5).abs() <= 1e-12, &format!("fidelity {f:.15} != 0.5"))?;
    let skew = Distribution::from_probabilities(vec![0.7, 0.3]);
    let t = total_variation(&skew, &fair);
    check((t - 0.2).abs() <= 1e-12, &format!("tvd {t:.15} != 0.2"))?;

    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let a = Distribution::from_probabilities((0..4).map(|_| rng.gen::<f64>()).collect());
        let b = Distribution::from_probabilities((0..4).map(|_| rng.gen::<f64>()).collect());
        let h = hellinger_distance(&a, &b);
        let f = hellinger_fidelity(&a, &b);
        let composed = (1.0 - h * h) * (1.0 - h * h);
        check(
            (f - composed).abs() <= 1e-12,
            &format!("composition identity broke: f={f:.15}, (1-h²)²={composed:.15}"),
        )?;
    }
    Ok(())
}

fn c10_routing_properties(_: &mut Shared) -> Result<(), String> {
    // Full protocol circuit on an all-to-all 9-node device vs a widely
    // separated heavy-hex placement.
    let cfg = ProtocolConfig::standard(1, 0).unwrap();
    let (circuit, _, _) = parrondo_qw::protocol::build_circuit(&cfg).map_err(|e| e.to_string())?;
    let n = circuit.n_qubits();
    let tags: Vec<String> = (0..n)
        .map(|i| if i < 3 { "alice" } else { "bob" }.to_string())
        .collect();

    let complete = CouplingGraph::complete(9).map_err(|e| e.to_string())?;
    let adjacent = LayoutAssignment::new((0..n).collect(), tags.clone(), "adjacent").unwrap();
    let on_complete = route(&circuit, &complete, &adjacent).map_err(|e| e.to_string())?;
    check(
        on_complete.inserted_swaps == 0,
        &format!("complete(9): {} swaps inserted", on_complete.inserted_swaps),
    )?;
    check(on_complete.modularity_preserved, "complete(9): modularity flag false")?;

    let hex = CouplingGraph::heavy_hex(3, 2).map_err(|e| e.to_string())?;
    let far = hex.n_physical - 3;
    let separated = LayoutAssignment::new(
        vec![0, 1, 2, far, far + 1, far + 2],
        tags,
        "separated",
    )
    .unwrap();
    let on_hex = route(&circuit, &hex, &separated).map_err(|e| e.to_string())?;
    check(on_hex.modularity_preserved, "heavy-hex: modularity flag false")?;
    check(
        on_complete.depth.depth < on_hex.depth.depth,
        &format!(
            "depth not strictly lower on complete(9): {} vs {}",
            on_complete.depth.depth, on_hex.depth.depth
        ),
    )?;

    // Semantic preservation on a small line-graph instance.
    use parrondo_qw::circuit::Gate;
    let mut small = Circuit::new(4);
    small.append(Gate::Hadamard { target: 0 }).unwrap();
    small.append(Gate::Cnot { control: 0, target: 3 }).unwrap();
    small.append(Gate::Cz { control: 1, target: 3 }).unwrap();
    small.append(Gate::Cnot { control: 2, target: 0 }).unwrap();
    small.append(Gate::Swap { a: 1, b: 2 }).unwrap();
    let line = CouplingGraph::line(4).map_err(|e| e.to_string())?;
    let layout = LayoutAssignment::new(
        vec![0, 1, 2, 3],
        vec!["m".into(), "m".into(), "m".into(), "m".into()],
        "identity",
    )
    .unwrap();
    let routed = route(&small, &line, &layout).map_err(|e| e.to_string())?;
    check(routed.modularity_preserved, "line(4): modularity flag false")?;
    let mut gather = ComplexMatrix::zeros(16, 16);
    for phys in 0..16usize {
        let mut logical = 0usize;
        for (l, &p) in routed.final_permutation.iter().enumerate() {
            logical |= ((phys >> p) & 1) << l;
        }
        gather[(logical, phys)] = c64(1.0, 0.0);
    }
    let lhs = gather
        .matmul(&routed.circuit.unitary_of().map_err(|e| e.to_string())?)
        .unwrap();
    let rhs = small.unitary_of().map_err(|e| e.to_string())?;
    let diff = lhs.max_abs_diff(&rhs);
    check(
        diff <= 1e-10,
        &format!("routed line circuit deviates from original by {diff:.2e}"),
    )?;
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        Criterion {
            name: "1 four- and three-cycle coin sequences revive with period 20",
            limit: Some(Duration::from_secs(1)),
            run: c1_parrondo_periodicity,
        },
        Criterion {
            name: "2 individual coins show no period within 1000 steps",
            limit: Some(Duration::from_secs(5)),
            run: c2_chaotic_individual_coins,
        },
        Criterion {
            name: "3 all 16 ideal runs decrypt to the sent message",
            limit: Some(Duration::from_secs(10)),
            run: c3_ideal_protocol_completeness,
        },
        Criterion {
            name: "4 circuit walk steps equal the dense walk unitary",
            limit: None,
            run: c4_circuit_matrix_equivalence,
        },
        Criterion {
            name: "5 walk commutes with translations; diagonal factors exact",
            limit: None,
            run: c5_commutation_and_diagonal_translations,
        },
        Criterion {
            name: "6 noise bands and monotonic fidelity decay",
            limit: Some(Duration::from_secs(120)),
            run: c6_noise_behavior,
        },
        Criterion {
            name: "7 intercept-resend attacker destroys the key",
            limit: Some(Duration::from_secs(120)),
            run: c7_eve_attack,
        },
        Criterion {
            name: "8 BB84 baseline and QBER separation",
            limit: Some(Duration::from_secs(10)),
            run: c8_bb84_baseline,
        },
        Criterion {
            name: "9 metric closed forms and composition identity",
            limit: None,
            run: c9_metric_closed_forms,
        },
        Criterion {
            name: "10 routing overhead ordering and semantic preservation",
            limit: None,
            run: c10_routing_properties,
        },
    ];

    let mut shared = Shared::default();
    let mut failures = Vec::new();
    for c in &criteria {
        let started = Instant::now();
        let outcome = (c.run)(&mut shared);
        let elapsed = started.elapsed();
        let outcome = outcome.and_then(|()| match c.limit {
            Some(limit) if elapsed > limit => Err(format!(
                "took {:.2}s, limit {:.0}s",
                elapsed.as_secs_f64(),
                limit.as_secs_f64()
            )),
            _ => Ok(()),
        });
        match outcome {
            Ok(()) => println!("PASS  criterion {:<60} ({:.2}s)", c.name, elapsed.as_secs_f64()),
            Err(msg) => {
                println!("FAIL  criterion {:<60} ({:.2}s): {msg}", c.name, elapsed.as_secs_f64());
                failures.push(format!("criterion {}: {msg}", c.name));
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
