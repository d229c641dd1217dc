//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero
//! exit if any fails. Run with `cargo test --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pbr_monty::engine::{enumerate_joint, simulate, GameAnalysis, GameSpec, Strategy};
use pbr_monty::games::{
    build_game, closed_form, crossover_q, psi_epistemic_game, psi_ontic_game_for, EpistemicParams, GameKind,
    PrepState,
};
use pbr_monty::oracle::{brute_force, lost_bit};
use pbr_monty::qcore::{born_matrix, inner, pbr_basis, ExactAmplitude};
use pbr_monty::rational::{fraction_string, ratio, to_f64, Rational};
use pbr_monty::teleport::{
    correction_for, monty_teleport_game, monty_teleport_game_for, teleport_step, unreliable_analysis, Bits2,
    CorrectionOp, QubitState, WIN_FIDELITY,
};
use pbr_monty_session::{router, verify_transcript, SessionStore, DEFAULT_IDLE_TIMEOUT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($msg)+)),
        }
    };
}

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:.2?}, limit {limit:?}");
    Ok(format!("{detail} in {took:.2?}"))
}

fn eq(name: &str, got: &Rational, want: Rational) -> Result<(), String> {
    if *got == want {
        Ok(())
    } else {
        Err(format!("{name} = {}, expected {}", fraction_string(got), fraction_string(&want)))
    }
}

fn given(name: &str, got: &Option<Rational>, want: Rational) -> Result<(), String> {
    match got {
        Some(v) => eq(name, v, want),
        None => Err(format!("{name} is undefined")),
    }
}

fn analyze(spec: &GameSpec) -> Result<GameAnalysis, String> {
    enumerate_joint(spec).map_err(|e| e.to_string())
}

fn born() -> Outcome {
    let start = Instant::now();
    let table = born_matrix();
    let row1: Vec<Rational> = table.row(0).to_vec();
    ensure!(row1 == [ratio(0, 1), ratio(1, 4), ratio(1, 4), ratio(1, 2)], "Ψ1 row is {row1:?}");
    for h in 0..4 {
        eq(&format!("diagonal {}", h + 1), table.get(h, h), ratio(0, 1))?;
    }
    let violations = table.violations();
    ensure!(violations.is_empty(), "{violations:?}");
    let basis = pbr_basis();
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let ip = inner(a, b).map_err(|e| e.to_string())?;
            let want = ExactAmplitude::integer(i64::from(i == j));
            ensure!(ip == want, "⟨Φ{}|Φ{}⟩ = {ip:?}", i + 1, j + 1);
        }
    }
    within(Duration::from_secs(1), start, "Ψ1 row (0, 1/4, 1/4, 1/2), zero diagonal, orthonormal basis".into())
}

fn classic() -> Outcome {
    let a = analyze(&build_game(GameKind::Classic, None, PrepState::PSI1).map_err(|e| e.to_string())?)?;
    eq("win_switch", a.p_win_switch(), ratio(2, 3))?;
    eq("win_stick", a.p_win_stick(), ratio(1, 3))?;
    Ok("switch 2/3, stick 1/3".into())
}

fn ignorant() -> Outcome {
    let a = analyze(&build_game(GameKind::Ignorant, None, PrepState::PSI1).map_err(|e| e.to_string())?)?;
    eq("p_opens_prize", &a.p_opens_prize, ratio(1, 3))?;
    given("stick | goat", &a.p_win_stick_given_goat, ratio(1, 2))?;
    given("switch | goat", &a.p_win_switch_given_goat, ratio(1, 2))?;
    Ok("opens prize 1/3, both strategies 1/2 given goat".into())
}

fn psi_ontic() -> Outcome {
    let a = analyze(&psi_ontic_game_for(PrepState::PSI1))?;
    eq("p_opens_prize", &a.p_opens_prize, ratio(1, 12))?;
    eq("p_opens_goat", &a.p_opens_goat, ratio(11, 12))?;
    given("stick | goat", &a.p_win_stick_given_goat, ratio(3, 11))?;
    given("switch | goat", &a.p_win_switch_given_goat, ratio(4, 11))?;
    Ok("1/12, 11/12, 3/11, 4/11".into())
}

/// A valid `(q1, q2, q3)` on a 1/1200 grid.
fn random_params(rng: &mut ChaCha8Rng) -> EpistemicParams {
    let q1 = ratio(rng.random_range(0..=300), 1200);
    let q2 = ratio(rng.random_range(0..=300), 1200);
    let q3 = ratio(rng.random_range(0..=600), 1200);
    EpistemicParams::new(q1, q2, q3).expect("grid values are in range")
}

fn psi_epistemic() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let q = p.q();
        let a = analyze(&psi_epistemic_game(&p))?;
        given("stick | goat", &a.p_win_stick_given_goat, closed_form::stick_given_goat(&q))?;
        given("switch | goat", &a.p_win_switch_given_goat, closed_form::switch_given_goat(&q))?;
        eq("p_opens_prize", &a.p_opens_prize, closed_form::opens_prize(&q))?;
    }
    for q in [ratio(1, 10), ratio(1, 4), ratio(2, 5), ratio(1, 2)] {
        let splits = [
            EpistemicParams::equal_split(&q),
            EpistemicParams::new(ratio(0, 1), ratio(0, 1), q.clone()),
            EpistemicParams::new(&q / ratio(2, 1), ratio(0, 1), &q / ratio(2, 1)),
        ];
        let mut seen: Option<(Option<Rational>, Option<Rational>)> = None;
        for p in splits {
            let p = p.map_err(|e| format!("split at q = {}: {e}", fraction_string(&q)))?;
            let a = analyze(&psi_epistemic_game(&p))?;
            let pair = (a.p_win_stick_given_goat, a.p_win_switch_given_goat);
            if let Some(prev) = &seen {
                ensure!(*prev == pair, "split changes the result at q = {}", fraction_string(&q));
            }
            seen = Some(pair);
        }
    }
    let tie = analyze(&psi_epistemic_game(&EpistemicParams::equal_split(&crossover_q()).unwrap()))?;
    ensure!(
        tie.p_win_stick_given_goat == tie.p_win_switch_given_goat,
        "stick and switch differ at q = 1/4"
    );
    given("tie value", &tie.p_win_stick_given_goat, ratio(1, 3))?;
    within(Duration::from_secs(5), start, "100 random triples match the closed forms; split-invariant; tie at q = 1/4".into())
}

fn catalog() -> Vec<GameSpec> {
    let mut specs = Vec::new();
    for kind in GameKind::ALL {
        for n in 1..=4 {
            let state = PrepState::new(n).unwrap();
            specs.push(build_game(kind, None, state).unwrap());
            if kind.takes_q() {
                for (a, b, c) in [(0, 0, 0), (1, 2, 3), (6, 6, 12), (6, 0, 0)] {
                    let p = EpistemicParams::new(ratio(a, 24), ratio(b, 24), ratio(c, 24)).unwrap();
                    specs.push(build_game(kind, Some(&p), state).unwrap());
                }
            }
        }
    }
    for i in 0..4 {
        specs.push(monty_teleport_game_for(Bits2::from_index(i)));
    }
    specs
}

fn oracle() -> Outcome {
    let specs = catalog();
    for spec in &specs {
        let a = analyze(spec)?;
        let o = brute_force(spec);
        let label = &spec.label;
        ensure!(a.p_opens_prize == o.opens_prize, "{label}: opens prize differs");
        ensure!(a.p_opens_goat == o.opens_goat, "{label}: opens goat differs");
        ensure!(a.p_win_stick_and_goat == o.stick_and_goat, "{label}: stick differs");
        ensure!(a.p_win_switch_and_goat == o.switch_and_goat, "{label}: switch differs");
        ensure!(a.p_win_stick_given_goat == o.stick_given_goat, "{label}: stick | goat differs");
        ensure!(a.p_win_switch_given_goat == o.switch_given_goat, "{label}: switch | goat differs");
    }
    Ok(format!("{} game configurations agree exactly", specs.len()))
}

fn monte_carlo() -> Outcome {
    const TRIALS: u64 = 1_000_000;
    let start = Instant::now();
    let mut cells = 0;
    let mut retries = 0;
    for kind in GameKind::ALL {
        let spec = build_game(kind, None, PrepState::PSI1).map_err(|e| e.to_string())?;
        let a = analyze(&spec)?;
        for strategy in [Strategy::Stick, Strategy::Switch] {
            let p = match strategy {
                Strategy::Stick => a.p_win_stick_given_goat.as_ref(),
                _ => a.p_win_switch_given_goat.as_ref(),
            }
            .map(to_f64)
            .ok_or_else(|| format!("{kind}: no goat reveals"))?;
            let mut last = 0.0;
            let ok = (0..2u64).any(|attempt| {
                retries += attempt;
                let r = simulate(&spec, strategy, TRIALS, 7_000 + attempt).expect("catalog games simulate");
                last = r.empirical_win_given_goat;
                (r.empirical_win_given_goat - p).abs() <= r.three_sigma(p)
            });
            ensure!(ok, "{kind} {strategy}: {last} outside 3σ of {p} on both attempts");
            cells += 1;
        }
    }
    within(Duration::from_secs(60), start, format!("{cells} cells × 10⁶ trials within 3σ ({retries} retries)"))
}

fn teleportation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1_000);
    let bells = [Bits2::new(0, 0), Bits2::new(1, 1)];
    let mut worst = 1.0f64;
    for _ in 0..1000 {
        let psi = QubitState::haar(&mut rng);
        for bell in bells {
            let branches = teleport_step(&psi, bell).map_err(|e| e.to_string())?;
            for b in branches {
                let f = psi.fidelity(&correction_for(bell, b.alice_result).apply(&b.bob_state));
                worst = worst.min(f);
                ensure!(f >= WIN_FIDELITY, "bell {bell}, result {}: fidelity {f}", b.alice_result);
            }
        }
    }
    let eleven = Bits2::new(1, 1);
    ensure!(correction_for(eleven, eleven) == CorrectionOp::NegI, "(11, 11) is not −σ₀");
    Ok(format!("1000 states × 4 outcomes × bells 00, 11; worst fidelity {worst:.15}; (11,11) → −σ₀"))
}

fn monty_teleport() -> Outcome {
    let a = analyze(&monty_teleport_game())?;
    eq("win_stick", a.p_win_stick(), ratio(2, 8))?;
    eq("win_switch", a.p_win_switch(), ratio(3, 8))?;
    Ok("stick 2/8, switch 3/8 from the generic engine".into())
}

fn unreliable() -> Outcome {
    let r = unreliable_analysis(Bits2::new(0, 0));
    let [b0, b1] = &r.by_bit;
    eq("P(bit 0)", &b0.p_received, ratio(1, 2))?;
    given("stick | bit 0", &b0.p_win_stick_given_bit, ratio(1, 2))?;
    given("switch | bit 0", &b0.p_win_switch_given_bit, ratio(1, 4))?;
    given("stick | bit 1", &b1.p_win_stick_given_bit, ratio(0, 1))?;
    given("switch | bit 1", &b1.p_win_switch_given_bit, ratio(1, 3))?;
    for b in [b0, b1] {
        let o = lost_bit((0, 0), b.bit);
        ensure!(o.p_received == b.p_received, "bit {}: P(received) differs from brute force", b.bit);
        ensure!(b.p_win_stick_given_bit.as_ref() == Some(&o.stick_given_bit), "bit {}: stick differs", b.bit);
        ensure!(b.p_win_switch_given_bit.as_ref() == Some(&o.switch_given_bit), "bit {}: switch differs", b.bit);
    }
    Ok("P(bit 0) 1/2; bit 0: stick 1/2, switch 1/4; bit 1: stick 0, switch 1/3 (brute force agrees)".into())
}

async fn call(app: &Router, method: &str, uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn play_switching(app: &Router, sessions: u64) -> Result<(u64, u64), String> {
    let (mut goats, mut wins) = (0u64, 0u64);
    for seed in 0..sessions {
        let (status, s) = call(app, "POST", "/sessions", json!({"game": "psi-ontic", "seed": seed})).await;
        ensure!(status == StatusCode::CREATED, "create returned {status}");
        let id = s["id"].as_str().ok_or("no session id")?.to_string();
        ensure!(s.get("result").is_none(), "prize disclosed before the game finished");
        let door = seed % 4 + 1;
        let (status, v) = call(app, "POST", &format!("/sessions/{id}/pick"), json!({"door": door})).await;
        ensure!(status == StatusCode::OK, "pick returned {status}");
        if v["phase"] == "finished" {
            continue;
        }
        ensure!(v.get("result").is_none(), "prize disclosed before the decision");
        let (status, v) = call(app, "POST", &format!("/sessions/{id}/decision"), json!({"action": "switch"})).await;
        ensure!(status == StatusCode::OK, "decision returned {status}");
        goats += 1;
        wins += u64::from(v["result"]["outcome"] == "win");
    }
    Ok((goats, wins))
}

fn session_api() -> Outcome {
    const SESSIONS: u64 = 100_000;
    let runtime = tokio::runtime::Builder::new_current_thread().build().map_err(|e| e.to_string())?;
    let app = router(Arc::new(SessionStore::new(DEFAULT_IDLE_TIMEOUT)));
    let (goats, wins) = runtime.block_on(play_switching(&app, SESSIONS))?;
    let p = 4.0 / 11.0;
    let rate = wins as f64 / goats as f64;
    let band = 3.0 * (p * (1.0 - p) / goats as f64).sqrt();
    ensure!((rate - p).abs() <= band, "switch rate {rate:.5} outside 4/11 ± {band:.5}");

    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("../session/tests/fixtures/transcript.jsonl");
    let summary = verify_transcript(&fixture).map_err(|e| format!("{}: {e}", fixture.display()))?;
    ensure!(summary.is_faithful(), "transcript replay diverged: {:?}", summary.mismatches);
    ensure!(summary.sessions > 0, "empty transcript fixture");
    Ok(format!(
        "{SESSIONS} sessions, switch | goat = {rate:.5} (4/11 ± {band:.5}); {} recorded sessions replay identically",
        summary.sessions
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("born-matrix", born),
        ("classic-game", classic),
        ("ignorant-game", ignorant),
        ("psi-ontic-game", psi_ontic),
        ("psi-epistemic-game", psi_epistemic),
        ("brute-force-oracle", oracle),
        ("monte-carlo", monte_carlo),
        ("teleportation-correctness", teleportation),
        ("monty-teleportation", monty_teleport),
        ("unreliable-teleportation", unreliable),
        ("session-api", session_api),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match result {
            Ok(detail) => println!("PASS  {name:<26} {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<26} {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
