use std::thread;
use std::time::Duration;

use super::extract::{extract_answer, AnswerFormat};
use super::prompt::{
    build_direct_prompt, build_fewshot_prompt, build_zeroshot_prompts, Prompt, ANSWER_TRIGGER,
    DIRECT_ANSWER_TRIGGER,
};
use super::provider::{CompletionRequest, LlmError, LlmProvider};
use crate::config::RouterConfig;
use crate::types::Demonstration;

/// Rationale and answer for one question, plus the number of LLM calls that
/// produced them (retries excluded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rationale: String,
    pub answer: String,
    pub llm_calls: u32,
}

/// Sends `prompt`, retrying transport failures with exponential backoff.
/// Protocol violations are returned at once.
pub fn complete_with_retry(
    llm: &dyn LlmProvider,
    prompt: &Prompt,
    cfg: &RouterConfig,
) -> Result<String, LlmError> {
    let request = CompletionRequest {
        prompt: prompt.text.clone(),
        temperature: cfg.llm_temperature,
        top_p: cfg.llm_top_p,
    };
    let attempts = cfg.llm_max_attempts.max(1);
    let mut attempt = 0;
    loop {
        attempt += 1;
        match llm.complete(&request) {
            Ok(text) => return Ok(text),
            Err(e) if !e.is_transient() => return Err(e.into()),
            Err(e) if attempt >= attempts => {
                return Err(LlmError::Exhausted { attempts, last: e });
            }
            Err(e) => {
                let delay = cfg.llm_backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                log::warn!(
                    "{}: attempt {attempt}/{attempts} failed ({e}); retrying in {delay} ms",
                    llm.name()
                );
                thread::sleep(Duration::from_millis(delay));
            }
        }
    }
}

/// With demos: one few-shot completion, which is the rationale and the
/// source of the answer. Without demos: zero-shot CoT, reasoning first, then
/// an answer-trigger call built on that reasoning.
pub fn derive_answer(
    question: &str,
    demos: Option<&[&Demonstration]>,
    fmt: &AnswerFormat,
    llm: &dyn LlmProvider,
    cfg: &RouterConfig,
) -> Result<Derivation, LlmError> {
    if let Some(demos) = demos {
        let prompt = build_fewshot_prompt(demos.iter().copied(), question)?;
        let completion = complete_with_retry(llm, &prompt, cfg)?;
        let answer = extract_answer(&completion, fmt);
        return Ok(Derivation {
            rationale: completion.trim().to_owned(),
            answer,
            llm_calls: 1,
        });
    }

    let reason_prompt = build_zeroshot_prompts(question, None)?;
    let reasoning = complete_with_retry(llm, &reason_prompt, cfg)?;
    let rationale = reasoning.trim().to_owned();
    if cfg.single_stage_zero_shot {
        return Ok(Derivation {
            answer: extract_answer(&rationale, fmt),
            rationale,
            llm_calls: 1,
        });
    }
    if rationale.is_empty() {
        log::warn!("empty zero-shot reasoning for {question:?}; no answer extracted");
        return Ok(Derivation {
            rationale,
            answer: String::new(),
            llm_calls: 1,
        });
    }
    let extract_prompt = build_zeroshot_prompts(question, Some(&rationale))?;
    let tail = complete_with_retry(llm, &extract_prompt, cfg)?;
    let answer = extract_answer(&format!("{ANSWER_TRIGGER}{tail}"), fmt);
    Ok(Derivation {
        rationale,
        answer,
        llm_calls: 2,
    })
}

/// Answer-only zero-shot: `Q: ...\nA: The answer is`, one call, no rationale.
pub fn derive_direct(
    question: &str,
    fmt: &AnswerFormat,
    llm: &dyn LlmProvider,
    cfg: &RouterConfig,
) -> Result<Derivation, LlmError> {
    let completion = complete_with_retry(llm, &build_direct_prompt(question), cfg)?;
    Ok(Derivation {
        rationale: String::new(),
        answer: extract_answer(&format!("{DIRECT_ANSWER_TRIGGER}{completion}"), fmt),
        llm_calls: 1,
    })
}
