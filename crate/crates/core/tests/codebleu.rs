//! CodeBLEU conformance: self-similarity, brute-force oracles, rename invariance.

mod common;

use common::codebleu_oracle::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use reasontrans::metrics::codebleu::{codebleu, CodeBleuWeights};
use reasontrans::LanguageId;

#[test]
fn identical_code_scores_one() {
    for lang in LANGS {
        let programs = fixtures(lang, 50, true, 7);
        for code in &programs {
            let s = codebleu(code, code, lang, CodeBleuWeights::default()).unwrap();
            assert!(!s.hypothesis_parse_failed, "{lang} fixture does not parse:\n{code}");
            assert!((s.total - 1.0).abs() < 1e-9, "{lang}: {s:?}\n{code}");
        }
    }
}

#[test]
fn components_match_brute_force_oracle() {
    let mut rng = StdRng::seed_from_u64(11);
    let references = fixtures(LanguageId::Python, 20, false, 3);
    let mut imperfect = [0usize; 4];
    for reference in &references {
        let hypothesis = mutate(reference, &mut rng);
        let got = codebleu(&hypothesis, reference, LanguageId::Python, CodeBleuWeights::default()).unwrap();
        let want = oracle_scores(&hypothesis, reference, LanguageId::Python);
        let flow = oracle_dataflow(&hypothesis, reference);
        let ctx = format!("hypothesis:\n{hypothesis}\nreference:\n{reference}");
        assert!((got.ngram - want.ngram).abs() < 1e-6, "ngram {} vs {}\n{ctx}", got.ngram, want.ngram);
        assert!((got.weighted_ngram - want.weighted).abs() < 1e-6, "weighted {} vs {}\n{ctx}", got.weighted_ngram, want.weighted);
        assert!((got.ast_match - want.ast).abs() < 1e-6, "ast {} vs {}\n{ctx}", got.ast_match, want.ast);
        assert!((got.dataflow_match - flow).abs() < 1e-6, "dataflow {} vs {flow}\n{ctx}", got.dataflow_match);
        let total = 0.25 * (want.ngram + want.weighted + want.ast + flow);
        assert!((got.total - total).abs() < 1e-6);
        for (slot, v) in imperfect.iter_mut().zip([want.ngram, want.weighted, want.ast, flow]) {
            *slot += usize::from(v < 1.0);
        }
    }
    // The edits must exercise every component, not just the trivial perfect score.
    assert!(imperfect.iter().all(|&n| n >= 3), "{imperfect:?}");
}

#[test]
fn token_components_match_oracle_for_java_and_cpp() {
    for lang in [LanguageId::Java, LanguageId::Cpp] {
        let references = fixtures(lang, 10, true, 5);
        let hypotheses = fixtures(lang, 10, true, 6);
        for (h, r) in hypotheses.iter().zip(&references) {
            let got = codebleu(h, r, lang, CodeBleuWeights::default()).unwrap();
            let want = oracle_scores(h, r, lang);
            assert!((got.ngram - want.ngram).abs() < 1e-6, "{lang}");
            assert!((got.weighted_ngram - want.weighted).abs() < 1e-6, "{lang}");
            assert!((got.ast_match - want.ast).abs() < 1e-6, "{lang}");
        }
    }
}

#[test]
fn ast_match_is_rename_invariant() {
    for lang in LANGS {
        for code in fixtures(lang, 20, true, 19) {
            let renamed = rename_identifiers(&code, lang);
            assert_ne!(renamed, code);
            let s = codebleu(&renamed, &code, lang, CodeBleuWeights::default()).unwrap();
            assert_eq!(s.ast_match, 1.0, "{lang}\n{renamed}");
            assert_eq!(s.dataflow_match, 1.0, "{lang}\n{renamed}");
            assert!(s.ngram < 1.0);
        }
    }
}

#[test]
fn trailing_whitespace_does_not_matter() {
    for lang in LANGS {
        for code in fixtures(lang, 5, true, 23) {
            let padded: String = code.lines().map(|l| format!("{l}   \t\n")).collect();
            let a = codebleu(&padded, &code, lang, CodeBleuWeights::default()).unwrap();
            assert!((a.total - 1.0).abs() < 1e-9, "{lang}: {a:?}");
        }
    }
}

#[test]
fn unparseable_hypothesis_keeps_only_token_components() {
    let reference = "int f_gold(int a) {\n    return a + 1;\n}\n";
    let broken = "int f_gold(int a) {\n    return a + ;\n";
    let s = codebleu(broken, reference, LanguageId::Cpp, CodeBleuWeights::default()).unwrap();
    assert!(s.hypothesis_parse_failed);
    assert_eq!((s.ast_match, s.dataflow_match), (0.0, 0.0));
    assert!((s.total - 0.25 * s.ngram - 0.25 * s.weighted_ngram).abs() < 1e-12);
}
