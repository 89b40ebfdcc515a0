use crate::types::Demonstration;

pub const REASONING_TRIGGER: &str = "Let's think step by step.";
pub const ANSWER_TRIGGER: &str = "Therefore, the answer is";
pub const DIRECT_ANSWER_TRIGGER: &str = "The answer is";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptStage {
    FewShot,
    ZeroShotReason,
    ZeroShotExtract,
    /// Answer-only prompt without reasoning (the plain zero-shot baseline).
    Direct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub text: String,
    pub stage: PromptStage,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("few-shot prompt needs at least one demonstration")]
    NoDemos,
    #[error("answer extraction prompt needs non-empty reasoning")]
    EmptyReasoning,
}

/// Renders each demo as `Q: {q}\nA: {rationale} {answer}\n\n` in the given
/// order and appends `Q: {question}\nA:`.
pub fn build_fewshot_prompt<'a, I>(demos: I, question: &str) -> Result<Prompt, PromptError>
where
    I: IntoIterator<Item = &'a Demonstration>,
{
    let mut text = String::new();
    let mut count = 0;
    for d in demos {
        text.push_str("Q: ");
        text.push_str(&d.question);
        text.push_str("\nA: ");
        text.push_str(&d.rationale);
        text.push(' ');
        text.push_str(&d.answer);
        text.push_str("\n\n");
        count += 1;
    }
    if count == 0 {
        return Err(PromptError::NoDemos);
    }
    text.push_str("Q: ");
    text.push_str(question);
    text.push_str("\nA:");
    Ok(Prompt {
        text,
        stage: PromptStage::FewShot,
    })
}

/// Zero-shot CoT prompts. Without `reasoning` this is the reasoning stage;
/// with it, the answer-extraction stage built on top of the reasoning.
pub fn build_zeroshot_prompts(question: &str, reasoning: Option<&str>) -> Result<Prompt, PromptError> {
    let stage1 = format!("Q: {question}\nA: {REASONING_TRIGGER}");
    match reasoning {
        None => Ok(Prompt {
            text: stage1,
            stage: PromptStage::ZeroShotReason,
        }),
        Some(r) if r.trim().is_empty() => Err(PromptError::EmptyReasoning),
        Some(r) => Ok(Prompt {
            text: format!("{stage1} {}\n{ANSWER_TRIGGER}", r.trim()),
            stage: PromptStage::ZeroShotExtract,
        }),
    }
}

/// `Q: {question}\nA: The answer is`.
pub fn build_direct_prompt(question: &str) -> Prompt {
    Prompt {
        text: format!("Q: {question}\nA: {DIRECT_ANSWER_TRIGGER}"),
        stage: PromptStage::Direct,
    }
}
