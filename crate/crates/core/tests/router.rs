mod common;

use std::sync::Arc;

use common::{family_cache, fixture_embedder, seed_pool, FamilyGen};
use cotroute::harness::{CountingLlm, FlakyLlm, ScriptedLlm};
use cotroute::router::{MatchAttempt, Query, RouteFailure};
use cotroute::{
    AnswerFormat, DataCache, DemoPool, Demonstration, RoutePath, Router, RouterConfig, RouterState, StrategyKind,
    StrategyRunner,
};

const UNRELATED: &str = "Zyxwv qjzx vbnm plokij uhygt?";

fn counting() -> Arc<CountingLlm<ScriptedLlm>> {
    Arc::new(CountingLlm::new(ScriptedLlm::new(Vec::new(), "The answer is 42.")))
}

fn router(cfg: RouterConfig, llm: Arc<CountingLlm<ScriptedLlm>>) -> Router {
    Router::new(cfg, fixture_embedder(), llm)
}

fn q_blocks(prompt: &str) -> usize {
    prompt.lines().filter(|l| l.starts_with("Q: ")).count()
}

#[test]
fn family_question_takes_the_matched_path() {
    let llm = counting();
    let r = router(RouterConfig::default(), Arc::clone(&llm));
    let state = RouterState::new(seed_pool(1, 4, 3), DataCache::new());
    let question = FamilyGen::new(2).question(2);
    let routed = r.route_one(&question, &AnswerFormat::numeric(), &state).unwrap();
    let o = &routed.outcome;
    assert_eq!(o.path, RoutePath::Matched);
    assert_eq!(o.matched_type.as_deref(), Some("seed-2"));
    assert!(o.similarity.unwrap() >= 0.35);
    assert_eq!(o.demos_used, 3);
    assert_eq!(o.answer, "42");
    assert!(o.is_consistent(0.35));
    assert_eq!(llm.calls(), 1);
    assert_eq!(q_blocks(&llm.prompts()[0]), 4);
    assert_eq!(routed.state, state);
    assert!(Arc::ptr_eq(&routed.state.pool, &state.pool));
}

#[test]
fn unrelated_question_is_answered_zero_shot_and_cached() {
    let llm = counting();
    let r = router(RouterConfig::default(), Arc::clone(&llm));
    let state = RouterState::new(seed_pool(1, 4, 3), DataCache::new());
    let routed = r.route_one(UNRELATED, &AnswerFormat::numeric(), &state).unwrap();
    let o = &routed.outcome;
    assert_eq!(o.path, RoutePath::Unmatched);
    assert!(o.similarity.unwrap() < 0.35);
    assert_eq!(o.demos_used, 0);
    assert_eq!(llm.calls(), 2);
    let prompts = llm.prompts();
    assert!(prompts[0].ends_with("Let's think step by step."));
    assert!(prompts[1].ends_with("Therefore, the answer is"));
    assert_eq!(routed.state.cache.len(), 1);
    assert_eq!(routed.state.cache.records()[0].question, UNRELATED);
    assert_eq!(routed.state.cache.records()[0].answer, "42");
    assert_eq!(*routed.state.pool, *state.pool);
    assert!(routed.update.is_none());
}

#[test]
fn empty_pool_is_always_unmatched() {
    let r = router(RouterConfig::default(), counting());
    let routed = r.route_one("Anything at all?", &AnswerFormat::free_text(), &RouterState::default()).unwrap();
    assert_eq!(routed.outcome.path, RoutePath::Unmatched);
    assert_eq!(routed.outcome.similarity, None);
}

#[test]
fn threshold_is_inclusive() {
    let state = RouterState::new(seed_pool(1, 4, 3), DataCache::new());
    let question = FamilyGen::new(3).question(0);
    let probe = router(RouterConfig::default(), counting());
    let MatchAttempt::Matched(m) = probe.try_matched(&question, &AnswerFormat::numeric(), &state).unwrap() else {
        panic!("expected a match");
    };
    let score = m.outcome.similarity.unwrap();

    let at = router(RouterConfig { s_thres: score, ..RouterConfig::default() }, counting());
    assert!(matches!(at.try_matched(&question, &AnswerFormat::numeric(), &state).unwrap(), MatchAttempt::Matched(_)));
    let above = router(
        RouterConfig {
            s_thres: score + 1e-9,
            ..RouterConfig::default()
        },
        counting(),
    );
    assert_eq!(
        above.try_matched(&question, &AnswerFormat::numeric(), &state).unwrap(),
        MatchAttempt::Unmatched { similarity: Some(score) }
    );
}

#[test]
fn cache_reaching_th_ca_triggers_the_update() {
    let (cache, _) = family_cache(4, &[200]);
    let mut records = cache.records().to_vec();
    let last = records.pop().unwrap();
    let state = RouterState::new(DemoPool::new(), DataCache::from_records(records).unwrap());
    let r = router(RouterConfig::default(), counting());
    let routed = r.route_one(&last.question, &AnswerFormat::numeric(), &state).unwrap();
    let report = routed.update.expect("update fires at 200");
    assert!(report.triggered);
    assert_eq!(report.cache_size_before, 200);
    assert_eq!(report.clusters_accepted, 1);
    assert_eq!(routed.state.pool.len(), 6);
    assert!(routed.state.cache.is_empty());

    // The same family now matches.
    let again = r.route_one(&FamilyGen::new(5).question(0), &AnswerFormat::numeric(), &routed.state).unwrap();
    assert_eq!(again.outcome.path, RoutePath::Matched);
    assert_eq!(again.outcome.matched_type.as_deref(), Some("auto-0-0"));
}

#[test]
fn llm_failure_is_reported_and_state_is_kept() {
    let llm = Arc::new(FlakyLlm::new(ScriptedLlm::new(Vec::new(), "x"), 10));
    let cfg = RouterConfig {
        llm_max_attempts: 3,
        llm_backoff_ms: 0,
        ..RouterConfig::default()
    };
    let r = Router::new(cfg, fixture_embedder(), llm.clone());
    let state = RouterState::new(seed_pool(1, 2, 2), DataCache::new());
    let err = r.route_one(UNRELATED, &AnswerFormat::numeric(), &state).unwrap_err();
    assert!(matches!(err.source, RouteFailure::Llm(_)));
    assert_eq!(err.question, UNRELATED);
    assert_eq!(llm.attempts(), 3);
    assert!(state.cache.is_empty());
}

#[test]
fn transient_failures_are_retried_transparently() {
    let llm = Arc::new(FlakyLlm::new(ScriptedLlm::new(Vec::new(), "The answer is 5."), 2));
    let cfg = RouterConfig {
        llm_backoff_ms: 0,
        ..RouterConfig::default()
    };
    let r = Router::new(cfg, fixture_embedder(), llm.clone());
    let routed = r.route_one(UNRELATED, &AnswerFormat::numeric(), &RouterState::default()).unwrap();
    assert_eq!(routed.outcome.answer, "5");
    assert_eq!(llm.attempts(), 4);
}

#[test]
fn ranked_families_use_the_top_k_demos() {
    let mut gen = FamilyGen::new(6);
    let demos: Vec<Demonstration> = gen
        .family(1, 20)
        .into_iter()
        .map(|q| Demonstration::new(q, "Reason.", "yes", "auto-0-0:ranked").unwrap())
        .collect();
    let pool = DemoPool::from_demos(demos).unwrap();
    let llm = counting();
    let cfg = RouterConfig {
        k: 4,
        ..RouterConfig::default()
    };
    let r = router(cfg, Arc::clone(&llm));
    let routed = r
        .route_one(&gen.question(1), &AnswerFormat::yes_no(), &RouterState::new(pool, DataCache::new()))
        .unwrap();
    assert_eq!(routed.outcome.demos_used, 4);
    assert_eq!(q_blocks(&llm.prompts()[0]), 5);
}

#[test]
fn prompt_demo_cap_applies() {
    let llm = counting();
    let cfg = RouterConfig {
        max_prompt_demos: Some(2),
        ..RouterConfig::default()
    };
    let r = router(cfg, Arc::clone(&llm));
    let state = RouterState::new(seed_pool(1, 4, 5), DataCache::new());
    let routed = r.route_one(&FamilyGen::new(7).question(3), &AnswerFormat::numeric(), &state).unwrap();
    assert_eq!(routed.outcome.demos_used, 2);
    assert_eq!(q_blocks(&llm.prompts()[0]), 3);
}

#[test]
fn baselines_never_touch_the_state() {
    let pool = seed_pool(1, 4, 3);
    let state = RouterState::new(pool.clone(), DataCache::new());
    let fmt = AnswerFormat::numeric();
    let expected_calls = [
        (StrategyKind::ZeroShot, 1, 0),
        (StrategyKind::ZeroShotCot, 2, 0),
        (StrategyKind::FewShotCotGold, 1, 3),
        (StrategyKind::GeneralCot, 1, 4),
    ];
    for (kind, calls, demos) in expected_calls {
        let llm = counting();
        let runner = StrategyRunner::new(router(RouterConfig::default(), Arc::clone(&llm)), kind, &pool);
        let q = Query {
            question: UNRELATED,
            format: &fmt,
            gold_type: Some("seed-1"),
        };
        let routed = runner.run(&q, &state).unwrap();
        assert_eq!(routed.outcome.path, RoutePath::Baseline, "{kind}");
        assert_eq!(routed.outcome.similarity, None);
        assert_eq!(routed.outcome.demos_used, demos, "{kind}");
        assert_eq!(llm.calls(), calls, "{kind}");
        assert!(routed.state.cache.is_empty());
    }
}

#[test]
fn gold_baseline_requires_a_known_label() {
    let pool = seed_pool(1, 2, 3);
    let state = RouterState::new(pool.clone(), DataCache::new());
    let runner = StrategyRunner::new(router(RouterConfig::default(), counting()), StrategyKind::FewShotCotGold, &pool);
    let fmt = AnswerFormat::numeric();
    let mut q = Query {
        question: "What?",
        format: &fmt,
        gold_type: None,
    };
    assert!(matches!(runner.run(&q, &state).unwrap_err().source, RouteFailure::MissingGoldType));
    q.gold_type = Some("nope");
    assert_eq!(
        runner.run(&q, &state).unwrap_err().source,
        RouteFailure::UnknownGoldType("nope".to_owned())
    );
}

#[test]
fn gem_cot_runner_delegates_to_the_router() {
    let pool = seed_pool(1, 4, 3);
    let state = RouterState::new(pool.clone(), DataCache::new());
    let runner = StrategyRunner::new(router(RouterConfig::default(), counting()), StrategyKind::GemCot, &pool);
    let fmt = AnswerFormat::numeric();
    let q = Query {
        question: UNRELATED,
        format: &fmt,
        gold_type: None,
    };
    let routed = runner.run(&q, &state).unwrap();
    assert_eq!(routed.outcome.path, RoutePath::Unmatched);
    assert_eq!(routed.state.cache.len(), 1);
}
