//! Answer derivation: prompt construction for both routing paths, the LLM
//! provider contract, and answer extraction.

mod derive;
mod extract;
mod prompt;
mod provider;

pub use derive::{complete_with_retry, derive_answer, derive_direct, Derivation};
pub use extract::{extract_answer, AnswerFormat, AnswerKind, FormatError};
pub use prompt::{
    build_direct_prompt, build_fewshot_prompt, build_zeroshot_prompts, Prompt, PromptError,
    PromptStage, ANSWER_TRIGGER, DIRECT_ANSWER_TRIGGER, REASONING_TRIGGER,
};
pub use provider::{
    CompletionRequest, CompletionResponse, HttpLlm, LlmError, LlmProvider, SubprocessLlm,
};
