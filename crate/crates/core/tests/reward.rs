mod common;

use std::sync::mpsc;
use std::thread;

use proptest::prelude::*;
use reasontrans::corpus::{ParallelFunction, TestSuite};
use reasontrans::reward::*;
use reasontrans::LanguageId;
use serde_json::{json, Value};

use common::*;

/// Length reward over exact rationals, with tau = num / 2^shift.
fn length_oracle(l_c: u64, l_g: u64, tau_num: u64, shift: u32, m: u64) -> f64 {
    let den = 1u128 << shift;
    let (l_c, l_g, num, m) = (l_c as u128, l_g as u128, tau_num as u128, m as u128);
    if l_c < l_g || l_c > m {
        return 0.0;
    }
    let excess = l_c - l_g;
    // excess / l_g <= num / den
    if excess * den <= num * l_g {
        // 1 - excess / (tau * l_g) = 1 - excess * den / (num * l_g)
        1.0 - (excess * den) as f64 / (num * l_g) as f64
    } else {
        0.1
    }
}

proptest! {
    #[test]
    fn length_reward_matches_rational_oracle(
        l_g in 1u64..2000,
        extra in -50i64..1200,
        tau_num in 1u64..64,
        shift in 0u32..6,
        m in 1u64..4000,
    ) {
        let l_c = (l_g as i64 + extra).max(0) as u64;
        let tau = tau_num as f64 / (1u64 << shift) as f64;
        let got = length_reward_value(l_c, l_g, tau, m).unwrap();
        let want = length_oracle(l_c, l_g, tau_num, shift, m);
        prop_assert!((got - want).abs() < 1e-12, "l_c={l_c} l_g={l_g} tau={tau} m={m}: {got} vs {want}");
    }

    #[test]
    fn length_reward_piecewise_shape(l_g in 1u64..500, tau_num in 1u64..16, shift in 0u32..4) {
        let tau = tau_num as f64 / (1u64 << shift) as f64;
        let m = 1_000_000;
        let r = |l_c| length_reward_value(l_c, l_g, tau, m).unwrap();
        prop_assert_eq!(r(l_g), 1.0);
        if l_g > 1 {
            prop_assert_eq!(r(l_g - 1), 0.0);
        }
        // Largest l_c inside the tolerance band, found with integer arithmetic.
        let den = 1u64 << shift;
        let band_end = l_g + (tau_num * l_g) / den;
        let mut prev = r(l_g);
        for l_c in l_g + 1..=band_end {
            let v = r(l_c);
            prop_assert!(v < prev, "not strictly decreasing at {l_c}");
            prev = v;
        }
        if (tau_num * l_g) % den == 0 {
            prop_assert_eq!(r(band_end), 0.0);
        }
        prop_assert_eq!(r(band_end + 1), 0.1);
        prop_assert_eq!(length_reward_value(band_end + 1, l_g, tau, band_end).unwrap(), 0.0);
    }
}

#[test]
fn length_reward_pinned_examples() {
    let r = |c, g| length_reward_value(c, g, 0.2, 4096).unwrap();
    assert_eq!(r(100, 100), 1.0);
    assert!((r(110, 100) - 0.5).abs() < 1e-12);
    assert_eq!(r(90, 100), 0.0);
    assert_eq!(r(150, 100), 0.1);
}

fn fenced(lang: LanguageId, code: &str) -> String {
    format!("I will translate step by step.\n```{}\n{}\n```\n", lang.fence_labels()[0], code.trim_end())
}

fn by_id(functions: &[ParallelFunction], id: &str) -> ParallelFunction {
    functions.iter().find(|f| f.id == id).unwrap().clone()
}

#[test]
fn execution_reward_examples() {
    let exec = executor();
    let functions = corpus();
    let mutants = mutants();
    let count_even = by_id(&functions, "FIX_count_even");
    let py = LanguageId::Python;
    let completions = vec![
        fenced(py, mutant_code(&mutants["FIX_count_even"], py)),
        fenced(py, "def f_gold(arr, n)\n    return 0"),
        fenced(py, count_even.code(py).unwrap()),
        "no code at all, just prose".to_string(),
    ];
    let suites = vec![count_even.suite.clone(); 4];
    let rewards = execution_reward(&exec, &completions, py, &suites).unwrap();
    assert_eq!(rewards[0], 0.6);
    assert_eq!(rewards[1], 0.0);
    assert_eq!(rewards[2], 1.0);
    assert_eq!(rewards[3], 0.0);
}

#[test]
fn execution_reward_for_every_available_language() {
    let exec = executor();
    for lang in available_languages() {
        let functions = corpus();
        let completions: Vec<String> = functions.iter().map(|f| fenced(lang, f.code(lang).unwrap())).collect();
        let suites: Vec<TestSuite> = functions.iter().map(|f| f.suite.clone()).collect();
        let rewards = execution_reward(&exec, &completions, lang, &suites).unwrap();
        assert!(rewards.iter().all(|&r| r == 1.0), "{lang}: {rewards:?}");
    }
}

#[test]
fn combined_reward_weights() {
    let exec = executor();
    let functions = corpus();
    let mutants = mutants();
    let f = by_id(&functions, "FIX_count_even");
    let py = LanguageId::Python;
    let mut completion = fenced(py, mutant_code(&mutants["FIX_count_even"], py));
    // Pad to a multiple of 11 characters so a reference of 10/11 the length scores exactly 0.5.
    while completion.chars().count() % 11 != 0 {
        completion.push(' ');
    }
    let config = LengthRewardConfig {
        length_unit: LengthUnit::Characters,
        ..LengthRewardConfig::default()
    };
    let l_c = completion.chars().count();
    let reference = "r".repeat(l_c * 10 / 11);
    let out = combined_reward(&exec, &[completion.clone()], &[reference.clone()], py, &[f.suite.clone()], &config, RewardWeights::default()).unwrap();
    assert_eq!(out[0].execution, 0.6);
    assert!((out[0].length - 0.5).abs() < 1e-12);
    assert!((out[0].combined - 1.1).abs() < 1e-12);

    let projection = combined_reward(&exec, &[completion], &[reference], py, &[f.suite.clone()], &config, RewardWeights(1.0, 0.0)).unwrap();
    assert_eq!(projection[0].combined, projection[0].execution);

    let zero = combined_reward(&exec, &["x".into()], &["a b c".into()], py, &[f.suite], &LengthRewardConfig::default(), RewardWeights::default()).unwrap();
    assert_eq!(zero[0].combined, 0.0);
}

#[test]
fn code_only_mode_measures_extracted_code() {
    let exec = executor();
    let f = by_id(&corpus(), "FIX_sum_digits");
    let py = LanguageId::Python;
    let code = f.code(py).unwrap().trim_end().to_string();
    let completion = format!("a very long explanation {}\n```python\n{code}\n```", "word ".repeat(200));
    let full = combined_reward(&exec, &[completion.clone()], &[code.clone()], py, &[f.suite.clone()], &LengthRewardConfig::default(), RewardWeights::default()).unwrap();
    let code_only = LengthRewardConfig { reference_mode: ReferenceMode::CodeOnly, ..LengthRewardConfig::default() };
    let only = combined_reward(&exec, &[completion], &[code], py, &[f.suite], &code_only, RewardWeights::default()).unwrap();
    assert_eq!(full[0].length, 0.1);
    assert_eq!(only[0].length, 1.0);
    assert_eq!(only[0].execution, 1.0);
}

#[test]
fn batch_order_is_preserved_under_permutation() {
    let exec = executor();
    let functions = corpus();
    let mutants = mutants();
    let py = LanguageId::Python;
    let mut items: Vec<(String, TestSuite)> = Vec::new();
    for f in &functions {
        items.push((fenced(py, f.code(py).unwrap()), f.suite.clone()));
        items.push((fenced(py, mutant_code(&mutants[&f.id], py)), f.suite.clone()));
    }
    let score = |items: &[(String, TestSuite)]| {
        let (c, s): (Vec<String>, Vec<TestSuite>) = items.iter().cloned().unzip();
        execution_reward(&exec, &c, py, &s).unwrap()
    };
    let forward = score(&items);
    let mut reversed_items = items.clone();
    reversed_items.reverse();
    let mut backward = score(&reversed_items);
    backward.reverse();
    assert_eq!(forward, backward);
    for (i, f) in functions.iter().enumerate() {
        let failing = mutants[&f.id].failing.len() as f64;
        assert_eq!(forward[2 * i], 1.0);
        assert_eq!(forward[2 * i + 1], (10.0 - failing) / 10.0, "{}", f.id);
    }
}

struct Service {
    base: String,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    handle: Option<thread::JoinHandle<()>>,
}

impl Drop for Service {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn start_service() -> Service {
    let (addr_tx, addr_rx) = mpsc::channel();
    let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
    let handle = thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            addr_tx.send(listener.local_addr().unwrap()).unwrap();
            serve_on(listener, executor(), RewardDefaults::default(), async {
                let _ = stop_rx.await;
            })
            .await
            .unwrap();
        });
    });
    let addr = addr_rx.recv().unwrap();
    Service { base: format!("http://{addr}"), shutdown: Some(stop_tx), handle: Some(handle) }
}

fn post(service: &Service, body: &Value) -> (u16, Value) {
    let response = reqwest::blocking::Client::new()
        .post(format!("{}/v1/rewards", service.base))
        .json(body)
        .send()
        .unwrap();
    let status = response.status().as_u16();
    (status, response.json().unwrap())
}

#[test]
fn service_scores_and_validates() {
    let service = start_service();
    let health = reqwest::blocking::get(format!("{}/healthz", service.base)).unwrap();
    assert_eq!(health.status().as_u16(), 200);
    assert_eq!(health.text().unwrap(), "ok");

    let functions = corpus();
    let mutants = mutants();
    let f = by_id(&functions, "FIX_count_even");
    let py = LanguageId::Python;
    let gold = fenced(py, f.code(py).unwrap());
    let mutant = fenced(py, mutant_code(&mutants["FIX_count_even"], py));
    let body = json!({
        "completions": [gold, mutant, "garbage"],
        "references": [gold, gold, gold],
        "language": "python",
        "suites": [f.suite, f.suite, f.suite],
    });
    let (status, reply) = post(&service, &body);
    assert_eq!(status, 200, "{reply}");
    let rewards = reply["rewards"].as_array().unwrap();
    assert_eq!(rewards[0]["execution"], 1.0);
    assert_eq!(rewards[0]["length"], 1.0);
    assert_eq!(rewards[0]["combined"], 2.0);
    assert_eq!(rewards[1]["execution"], 0.6);
    assert_eq!(rewards[2]["execution"], 0.0);

    // The library path gives the same numbers bit for bit.
    let request: RewardRequest = serde_json::from_value(body).unwrap();
    let library = score_request(&executor(), &request, &RewardDefaults::default()).unwrap();
    let served: RewardResponse = serde_json::from_value(reply).unwrap();
    for (a, b) in library.rewards.iter().zip(&served.rewards) {
        assert_eq!(a.execution.to_bits(), b.execution.to_bits());
        assert_eq!(a.length.to_bits(), b.length.to_bits());
        assert_eq!(a.combined.to_bits(), b.combined.to_bits());
    }

    let weighted = json!({
        "completions": ["```python\ndef f_gold(arr, n):\n    return 0\n```"],
        "references": ["x"],
        "language": "python",
        "suites": [f.suite],
        "config": {"max_length": 10, "tolerance": 0.5, "length_unit": "characters"},
        "weights": [2.0, 0.0],
    });
    let (status, reply) = post(&service, &weighted);
    assert_eq!(status, 200, "{reply}");
    assert_eq!(reply["rewards"][0]["length"], 0.0);
    assert_eq!(reply["rewards"][0]["weights"], json!([2.0, 0.0]));
}

#[test]
fn service_rejects_malformed_requests() {
    let service = start_service();
    let suite = corpus()[0].suite.clone();
    let base = json!({
        "completions": ["x"],
        "references": ["y"],
        "language": "python",
        "suites": [suite],
    });

    let mut rust = base.clone();
    rust["language"] = json!("Rust");
    let (status, reply) = post(&service, &rust);
    assert_eq!(status, 400);
    assert!(reply["error"].as_str().unwrap().contains("unsupported-language"), "{reply}");
    assert_eq!(reply["field"], "language");

    let mut missing = base.clone();
    missing.as_object_mut().unwrap().remove("references");
    let (status, reply) = post(&service, &missing);
    assert_eq!(status, 400);
    assert!(reply["error"].as_str().unwrap().contains("references"), "{reply}");

    let mut misaligned = base.clone();
    misaligned["references"] = json!(["a", "b"]);
    let (status, reply) = post(&service, &misaligned);
    assert_eq!(status, 400);
    assert_eq!(reply["field"], "references");

    let mut bad_tau = base.clone();
    bad_tau["config"] = json!({"tolerance": -1.0});
    let (status, reply) = post(&service, &bad_tau);
    assert_eq!(status, 400);
    assert_eq!(reply["field"], "config.tolerance");

    let mut bad_case = base.clone();
    bad_case["suites"][0]["cases"][0]["args"] = json!("not a list");
    let (status, reply) = post(&service, &bad_case);
    assert_eq!(status, 400);
    assert_eq!(reply["field"], "suites[0].cases[0].args", "{reply}");

    let mut empty_ref = base;
    empty_ref["references"] = json!([""]);
    let (status, reply) = post(&service, &empty_ref);
    assert_eq!(status, 400);
    assert_eq!(reply["field"], "references[0]");
}
