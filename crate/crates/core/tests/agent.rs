mod common;

use std::sync::Arc;

use common::*;
use reasontrans::agent::{self, AgentConfig, TraceStatus};
use reasontrans::gateway::{EndpointConfig, Gateway, MockBackend, MockEntry};
use reasontrans::prompt_kit::TemplateId;
use reasontrans::{LanguageId, LanguagePair};

fn endpoint() -> EndpointConfig {
    let mut e = EndpointConfig::new("mock:///agent", "mock-model");
    e.retries = 0;
    e
}

fn gateway(entries: Vec<MockEntry>) -> Gateway {
    Gateway::with_backend(endpoint(), Arc::new(MockBackend::new(entries).unwrap())).unwrap()
}

fn ready() -> bool {
    let langs = available_languages();
    langs.contains(&LanguageId::Python) && langs.contains(&LanguageId::Cpp)
}

fn run(wrong_rounds: usize) -> agent::AgentTrace {
    let program = digit_sum_program(LanguageId::Cpp);
    let config = AgentConfig::new(endpoint());
    agent::run_agent(&gateway(agent_script(wrong_rounds)), &executor(), &program, LanguageId::Python, &config).unwrap()
}

fn assert_sums(trace: &agent::AgentTrace) {
    assert_eq!(trace.total_tokens, trace.rounds.iter().map(|r| r.generated_tokens).sum::<u64>());
    assert_eq!(trace.total_latency_s, trace.rounds.iter().map(|r| r.latency_s).sum::<f64>());
    assert_eq!(trace.final_report, trace.rounds.last().unwrap().report);
}

#[test]
fn generated_tests_are_filtered_against_gold() {
    if !ready() {
        return;
    }
    let program = digit_sum_program(LanguageId::Cpp);
    let (cases, generation) = agent::generate_test_cases(
        &gateway(vec![digit_sum_testgen()]),
        &executor(),
        &program,
        LanguageId::Python,
        3,
        true,
    )
    .unwrap();
    assert_eq!(cases.len(), 2);
    assert_eq!(generation.generated_tokens, 30);
    let unfiltered =
        agent::generate_test_cases(&gateway(vec![digit_sum_testgen()]), &executor(), &program, LanguageId::Python, 3, false).unwrap();
    assert_eq!(unfiltered.0.len(), 3);
    let prose = gateway(vec![MockEntry::reply("I cannot think of any tests.")]);
    assert!(agent::generate_test_cases(&prose, &executor(), &program, LanguageId::Python, 3, true).is_err());
}

#[test]
fn correct_first_answer_stops_immediately() {
    if !ready() {
        return;
    }
    let trace = run(0);
    assert_eq!(trace.rounds.len(), 1);
    assert!(trace.final_report.all_passed());
    assert_sums(&trace);
}

#[test]
fn wrong_then_right_converges_in_round_one() {
    if !ready() {
        return;
    }
    let trace = run(1);
    assert_eq!(trace.rounds.len(), 2);
    assert_eq!(trace.rounds[0].prompt_kind, TemplateId::AgentTranslate);
    assert_eq!(trace.rounds[1].prompt_kind, TemplateId::AgentRepair);
    assert!(!trace.rounds[0].report.all_passed());
    assert!(trace.final_report.all_passed());
    assert_eq!(trace.total_tokens, 200 + 217);
    assert_eq!(trace.testgen_tokens, 30);
    assert_sums(&trace);
}

#[test]
fn always_wrong_halts_after_max_rounds() {
    if !ready() {
        return;
    }
    let trace = run(usize::MAX);
    assert_eq!(trace.rounds.len(), 3);
    assert!(!trace.final_report.all_passed());
    assert_eq!(trace.status, TraceStatus::Completed);
    assert_eq!(trace.total_tokens, 200 + 217 + 234);
    assert!(trace.total_latency_s >= 0.015);
    assert_sums(&trace);
}

#[test]
fn endpoint_failure_ends_the_trace() {
    if !ready() {
        return;
    }
    let mut entries = agent_script(usize::MAX);
    entries.truncate(2); // no repair answers: the first repair request fails
    let program = digit_sum_program(LanguageId::Cpp);
    let trace = agent::run_agent(&gateway(entries), &executor(), &program, LanguageId::Python, &AgentConfig::new(endpoint())).unwrap();
    assert_eq!(trace.rounds.len(), 1);
    assert!(matches!(trace.status, TraceStatus::EndpointFailed { .. }));
    assert_sums(&trace);
}

#[test]
fn batch_run_degrades_failed_samples() {
    if !ready() {
        return;
    }
    let functions = corpus();
    let pair = LanguagePair::new(LanguageId::Cpp, LanguageId::Python).unwrap();
    let config = AgentConfig::new(endpoint());
    let traces = agent::run_agents(&functions, pair, &config, &gateway(agent_script(0)), &executor()).unwrap();
    assert_eq!(traces.len(), functions.len());
    let digit = traces.iter().find(|t| t.sample_id == "FIX_sum_digits:cpp").unwrap();
    assert!(digit.final_report.all_passed());
    // The digit-sum tests have the wrong arity or disagree with the other gold programs.
    for t in traces.iter().filter(|t| t.sample_id != "FIX_sum_digits:cpp") {
        assert!(t.rounds.is_empty() || !t.final_report.all_passed(), "{}", t.sample_id);
    }
    let records = agent::trace_records(&traces, &functions).unwrap();
    assert_eq!(records.len(), traces.len());
}
