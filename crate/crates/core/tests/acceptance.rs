//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use ftlcheck::channels::{
    basis_copier, clone_fidelity, falsify_cloning_dichotomy, linearity_witness, no_signaling_gap,
    KrausChannel, DICHOTOMY_MARGIN,
};
use ftlcheck::qstate::{
    apply_unitary, canonical_state, haar_random_state, haar_random_unitary, partial_trace, CMatrix,
    CanonicalState, DensityOperator,
};
use ftlcheck::relativity::{
    boost_event, order_reversing_boost, Boost, SignalSpeed, SpacetimeEvent,
};
use ftlcheck::scenario::{run_gedanken, ScenarioConfig, Verdict};
use ftlcheck::seeded_rng;
use ftlcheck::teleport::{
    bell_basis, derive_corrections, outcome_distribution, random_maximally_entangled,
    run_teleportation, ClassicalMessage, EntangledResource, ALICE, BOB,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn resources(seed: u64) -> Vec<EntangledResource> {
    let mut rng = seeded_rng(seed);
    let mut states = vec![
        canonical_state(CanonicalState::Singlet),
        canonical_state(CanonicalState::PhiPlus),
    ];
    for _ in 0..5 {
        states.push(random_maximally_entangled(&mut rng));
    }
    states
        .iter()
        .map(|s| derive_corrections(s).unwrap())
        .collect()
}

fn teleportation_exactness() -> Check {
    let start = Instant::now();
    let res = resources(11);
    let mut rng = seeded_rng(1);
    let mut worst: f64 = 1.0;
    let mut runs = 0;
    for _ in 0..1000 {
        let input = haar_random_state(1, &mut rng).map_err(|e| e.to_string())?;
        for r in &res {
            let t = run_teleportation(&input, r, &mut rng).map_err(|e| e.to_string())?;
            worst = worst.min(t.output_fidelity);
            runs += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(worst >= 1.0 - 1e-9, || {
        format!("worst fidelity {worst:.3e}")
    })?;
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{runs} runs, min fidelity 1 - {:.1e}, {elapsed:.2?}",
        1.0 - worst
    ))
}

fn two_bit_sufficiency() -> Check {
    let alphabet: Vec<u8> = (0..=255u8)
        .filter(|b| ClassicalMessage::new(*b).is_ok())
        .collect();
    ensure(alphabet == [0, 1, 2, 3], || {
        format!("alphabet {alphabet:?}")
    })?;
    let probes = [
        CanonicalState::Up,
        CanonicalState::Down,
        CanonicalState::Plus,
        CanonicalState::Minus,
    ];
    for r in resources(12) {
        ensure(r.corrections().len() == 4, || "table size".into())?;
        for bits in 0..4u8 {
            let msg = ClassicalMessage::new(bits).unwrap();
            let u = r.correction(msg.outcome());
            let defect = (u.adjoint() * u - CMatrix::identity(2, 2)).camax();
            ensure(defect <= 1e-12, || {
                format!("correction {bits} not unitary: {defect:.1e}")
            })?;
            for p in probes {
                let input = canonical_state(p).relabel(&["C"]).unwrap();
                let joint = ftlcheck::qstate::tensor(&input, r.state()).unwrap();
                let bell = msg.outcome().state().relabel(&["C", ALICE]).unwrap();
                let (_, bob) = joint.condition_on(&["C", ALICE], &bell).unwrap().unwrap();
                let fixed = apply_unitary(u, &bob, &[BOB]).unwrap();
                let f =
                    ftlcheck::qstate::fidelity(&fixed, &input.relabel(&[BOB]).unwrap()).unwrap();
                ensure(f >= 1.0 - 1e-12, || format!("outcome {bits} on {p:?}: {f}"))?;
            }
        }
    }
    Ok("alphabet {0,1,2,3}; every outcome corrected on 7 resources".into())
}

fn alice_learns_nothing() -> Check {
    let res = resources(13);
    let mut rng = seeded_rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let input = haar_random_state(1, &mut rng).unwrap();
        for r in &res {
            let p = outcome_distribution(&input, r).map_err(|e| e.to_string())?;
            for pk in p {
                worst = worst.max((pk - 0.25).abs());
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("max |p - 1/4| = {worst:.1e}"))
}

fn no_signaling() -> Check {
    let mut rng = seeded_rng(4);
    let singlet = canonical_state(CanonicalState::Singlet)
        .relabel(&[ALICE, BOB])
        .unwrap()
        .to_density();
    let mut ops = Vec::new();
    for i in 0..100 {
        ops.push(KrausChannel::random(&[ALICE], 1 + i % 4, &mut rng).unwrap());
    }
    for p in [0.0, 0.3, 1.0] {
        ops.push(KrausChannel::depolarizing(ALICE, p).unwrap());
    }
    for _ in 0..10 {
        let phi = haar_random_state(1, &mut rng)
            .unwrap()
            .relabel(&["C"])
            .unwrap();
        let basis = bell_basis("C", ALICE).unwrap();
        ops.push(KrausChannel::measure_and_discard(&phi, &basis, &[ALICE]).unwrap());
    }
    let gap = no_signaling_gap(&singlet, &ops, &[BOB]).map_err(|e| e.to_string())?;
    ensure(gap <= 1e-10, || format!("gap {gap:.3e}"))?;
    Ok(format!("{} operations, gap {gap:.1e}", ops.len()))
}

fn no_cloning_witness() -> Check {
    let copier = basis_copier();
    let expect = [
        (CanonicalState::Up, 1.0),
        (CanonicalState::Down, 1.0),
        (CanonicalState::Plus, 0.5),
    ];
    for (s, want) in expect {
        let f = clone_fidelity(&copier, &canonical_state(s)).unwrap();
        ensure((f - want).abs() <= 1e-9, || format!("{s:?}: fidelity {f}"))?;
    }
    let zero = canonical_state(CanonicalState::Up);
    let one = canonical_state(CanonicalState::Down);
    let mut checked = 0;
    for i in 0..=16 {
        let theta = i as f64 * std::f64::consts::FRAC_PI_2 / 16.0;
        for phase in [0.0, 0.7, 2.1] {
            let alpha = Complex64::new(theta.cos(), 0.0);
            let beta = Complex64::from_polar(theta.sin(), phase);
            let r = linearity_witness(&copier, &zero, &one, alpha, beta).unwrap();
            let nondegenerate = alpha.norm() > 1e-12 && beta.norm() > 1e-12;
            ensure(r.violation == nondegenerate, || {
                format!(
                    "theta {theta}: violation {} fidelity {}",
                    r.violation, r.actual_output_fidelity
                )
            })?;
            checked += 1;
        }
    }
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let r = linearity_witness(&copier, &zero, &one, h, h).unwrap();
    ensure((r.actual_output_fidelity - 0.5).abs() <= 1e-9, || {
        "|+> output".into()
    })?;
    Ok(format!(
        "fidelities 1, 1, 0.5; witness agrees on {checked} superpositions"
    ))
}

fn cloning_dichotomy() -> Check {
    let start = Instant::now();
    let s = falsify_cloning_dichotomy(10_000, 6).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(s.trials >= 10_000, || format!("{} trials", s.trials))?;
    ensure(s.counterexamples.is_empty(), || {
        format!("{} counterexamples", s.counterexamples.len())
    })?;
    ensure(s.closest_approach <= DICHOTOMY_MARGIN, || {
        "closest approach".into()
    })?;
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{} trials, {} doubly cloned, 0 counterexamples, {elapsed:.2?}",
        s.trials, s.both_cloned
    ))
}

fn frame_reversal() -> Check {
    let i = SpacetimeEvent::new("I", 0.0, 0.0).unwrap();
    let ii = SpacetimeEvent::new("II", 1.0, 2.0).unwrap();
    let rev = order_reversing_boost(&i, &ii)
        .map_err(|e| e.to_string())?
        .ok_or("no reversing frame")?;
    ensure((rev.threshold - 0.5).abs() <= 1e-12, || {
        format!("β* = {}", rev.threshold)
    })?;

    let boost = Boost::new(0.75).unwrap();
    let (ti, tii) = (boost_event(&i, &boost).t(), boost_event(&ii, &boost).t());
    // independent recomputation of t' = γ(t − βx)
    let gamma = 1.0 / (1.0f64 - 0.75 * 0.75).sqrt();
    let oracle_ii = gamma * (1.0 - 0.75 * 2.0);
    ensure(ti.abs() <= 1e-12, || format!("t'(I) = {ti}"))?;
    ensure((tii - oracle_ii).abs() <= 1e-12, || {
        format!("t'(II) = {tii} vs {oracle_ii}")
    })?;
    ensure((tii + 0.756).abs() <= 1e-3, || format!("t'(II) = {tii}"))?;

    for k in -99..=99 {
        let beta = k as f64 / 100.0;
        let b = Boost::new(beta).unwrap();
        let reversed = boost_event(&ii, &b).t() < boost_event(&i, &b).t();
        ensure(reversed == (beta > 0.5), || {
            format!("β = {beta}: reversed {reversed}")
        })?;
    }
    for d in [1e-6, 1e-9] {
        let lo = Boost::new(0.5 - d).unwrap();
        let hi = Boost::new(0.5 + d).unwrap();
        ensure(boost_event(&ii, &lo).t() > 0.0, || format!("β* - {d}"))?;
        ensure(boost_event(&ii, &hi).t() < 0.0, || format!("β* + {d}"))?;
    }
    Ok(format!(
        "β* = {}, t'(I) = {ti}, t'(II) = {tii:.4}",
        rev.threshold
    ))
}

fn end_to_end_verdicts() -> Check {
    let speeds = [
        SignalSpeed::Finite(0.5),
        SignalSpeed::Finite(0.9),
        SignalSpeed::Finite(1.0),
        SignalSpeed::Finite(1.1),
        SignalSpeed::Finite(2.0),
        SignalSpeed::Finite(10.0),
        SignalSpeed::Infinite,
    ];
    let expected = [
        Verdict::ConsistentSubluminal,
        Verdict::ConsistentSubluminal,
        Verdict::LightlikeBoundary,
        Verdict::CloneCertified,
        Verdict::CloneCertified,
        Verdict::CloneCertified,
        Verdict::CloneCertified,
    ];
    for (k, (speed, want)) in speeds.iter().zip(expected).enumerate() {
        let report = run_gedanken(&ScenarioConfig::new(*speed, 2.0, 100 + k as u64))
            .map_err(|e| e.to_string())?;
        ensure(report.verdict == want, || {
            format!("{speed:?}: {:?}", report.verdict)
        })?;
        ensure((report.verify_c_prob - 1.0).abs() <= 1e-9, || {
            format!("{speed:?}: P(C) = {}", report.verify_c_prob)
        })?;
        ensure((report.verify_b_prob - 1.0).abs() <= 1e-9, || {
            format!("{speed:?}: P(B) = {}", report.verify_b_prob)
        })?;
    }
    Ok("2 subluminal, 1 lightlike, 4 clone_certified; verification probabilities 1".into())
}

fn kron_all(ops: &[CMatrix]) -> CMatrix {
    ops.iter()
        .fold(CMatrix::identity(1, 1), |acc, m| acc.kronecker(m))
}

fn swap_matrix() -> CMatrix {
    let mut s = CMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        s[(r, c)] = Complex64::new(1.0, 0.0);
    }
    s
}

fn brute_partial_trace(rho: &CMatrix, n: usize, keep: &[usize]) -> CMatrix {
    let dk = 1 << keep.len();
    let mut out = CMatrix::zeros(dk, dk);
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let bit = |i: usize, q: usize| (i >> (n - 1 - q)) & 1;
    let sub = |i: usize, qs: &[usize]| qs.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
    for i in 0..1 << n {
        for j in 0..1 << n {
            if sub(i, &traced) == sub(j, &traced) {
                out[(sub(i, keep), sub(j, keep))] += rho[(i, j)];
            }
        }
    }
    out
}

fn oracle_equivalence() -> Check {
    let mut rng = seeded_rng(9);
    let labels = ["q0", "q1", "q2"];
    let id = CMatrix::identity(2, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let psi = haar_random_state(3, &mut rng).unwrap();
        let u1 = haar_random_unitary(2, &mut rng);
        for q in 0..3 {
            let mut factors = vec![id.clone(); 3];
            factors[q] = u1.clone();
            let want = kron_all(&factors) * psi.amplitudes();
            let got = apply_unitary(&u1, &psi, &[labels[q]]).unwrap();
            worst = worst.max((got.amplitudes() - want).camax());
        }
        let u2 = haar_random_unitary(4, &mut rng);
        let want = u2.kronecker(&id) * psi.amplitudes();
        let got = apply_unitary(&u2, &psi, &["q0", "q1"]).unwrap();
        worst = worst.max((got.amplitudes() - want).camax());
        let swapped = swap_matrix() * &u2 * swap_matrix();
        let want = id.kronecker(&swapped) * psi.amplitudes();
        let got = apply_unitary(&u2, &psi, &["q2", "q1"]).unwrap();
        worst = worst.max((got.amplitudes() - want).camax());

        let rho = psi.to_density();
        for keep in [
            vec![0],
            vec![1],
            vec![2],
            vec![0, 2],
            vec![2, 0],
            vec![1, 2],
        ] {
            let names: Vec<&str> = keep.iter().map(|&q| labels[q]).collect();
            let got = partial_trace(&rho, &names).unwrap();
            let want = brute_partial_trace(rho.matrix(), 3, &keep);
            worst = worst.max((got.matrix() - want).camax());
        }
    }
    let singlet = canonical_state(CanonicalState::Singlet);
    let up =
        CMatrix::from_column_slice(2, 1, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let down =
        CMatrix::from_column_slice(2, 1, &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    let direct = (up.kronecker(&down) - down.kronecker(&up)) * Complex64::new(FRAC_1_SQRT_2, 0.0);
    worst = worst
        .max((DMatrix::from_column_slice(4, 1, singlet.amplitudes().as_slice()) - direct).camax());
    let mixed = DensityOperator::maximally_mixed(&["q0"]).unwrap();
    worst = worst.max((mixed.matrix() - id * Complex64::new(0.5, 0.0)).camax());
    ensure(worst <= 1e-12, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("teleportation exactness", teleportation_exactness),
        ("two-bit sufficiency", two_bit_sufficiency),
        ("alice learns nothing", alice_learns_nothing),
        ("no-signaling", no_signaling),
        ("no-cloning witness", no_cloning_witness),
        ("cloning dichotomy search", cloning_dichotomy),
        ("frame reversal", frame_reversal),
        ("end-to-end verdicts", end_to_end_verdicts),
        ("oracle equivalence", oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
