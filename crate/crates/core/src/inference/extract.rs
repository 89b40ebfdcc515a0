use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    Numeric,
    MultipleChoice,
    YesNo,
    FreeText,
}

/// Expected shape of a question's answer, supplied by the dataset and never
/// guessed by the model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnswerFormat {
    pub kind: AnswerKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub choices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("multiple-choice format needs at least one option")]
    NoChoices,
    #[error("unknown answer format `{0}` (expected numeric, yes_no, free_text or multiple_choice:A,B,...)")]
    Unknown(String),
}

impl AnswerFormat {
    pub fn numeric() -> Self {
        Self { kind: AnswerKind::Numeric, choices: Vec::new() }
    }

    pub fn yes_no() -> Self {
        Self { kind: AnswerKind::YesNo, choices: Vec::new() }
    }

    pub fn free_text() -> Self {
        Self { kind: AnswerKind::FreeText, choices: Vec::new() }
    }

    pub fn multiple_choice<S: Into<String>>(choices: impl IntoIterator<Item = S>) -> Result<Self, FormatError> {
        Self {
            kind: AnswerKind::MultipleChoice,
            choices: choices.into_iter().map(Into::into).collect(),
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self, FormatError> {
        if self.kind == AnswerKind::MultipleChoice && self.choices.iter().all(|c| c.trim().is_empty()) {
            return Err(FormatError::NoChoices);
        }
        Ok(self)
    }
}

impl FromStr for AnswerFormat {
    type Err = FormatError;

    /// `numeric`, `yes_no`, `free_text`, or `multiple_choice:A,B,C,D,E`
    /// (`mc:` and a bare letter run such as `mc:ABCDE` also work).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "numeric" => return Ok(Self::numeric()),
            "yes_no" | "yesno" => return Ok(Self::yes_no()),
            "free_text" | "text" => return Ok(Self::free_text()),
            _ => {}
        }
        let Some((head, rest)) = s.split_once(':') else {
            return Err(FormatError::Unknown(s.to_owned()));
        };
        if head != "multiple_choice" && head != "mc" {
            return Err(FormatError::Unknown(s.to_owned()));
        }
        let choices: Vec<String> = if rest.contains(',') {
            rest.split(',').map(|c| c.trim().to_owned()).filter(|c| !c.is_empty()).collect()
        } else {
            rest.chars().filter(|c| !c.is_whitespace()).map(String::from).collect()
        };
        Self::multiple_choice(choices)
    }
}

impl fmt::Display for AnswerFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AnswerKind::Numeric => f.write_str("numeric"),
            AnswerKind::YesNo => f.write_str("yes_no"),
            AnswerKind::FreeText => f.write_str("free_text"),
            AnswerKind::MultipleChoice => write!(f, "multiple_choice:{}", self.choices.join(",")),
        }
    }
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"-?\d[\d,]*(?:\.\d+)?").unwrap())
}

fn yes_no_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(yes|no)\b").unwrap())
}

fn answer_is_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)answer is").unwrap())
}

/// Pulls the final answer out of a completion. Returns an empty string when
/// nothing of the expected shape is present.
pub fn extract_answer(completion: &str, fmt: &AnswerFormat) -> String {
    match fmt.kind {
        AnswerKind::Numeric => last_number(completion).unwrap_or_default(),
        AnswerKind::MultipleChoice => last_choice(completion, &fmt.choices).unwrap_or_default(),
        AnswerKind::YesNo => yes_no_re()
            .find_iter(completion)
            .last()
            .map(|m| m.as_str().to_lowercase())
            .unwrap_or_default(),
        AnswerKind::FreeText => after_answer_is(completion).unwrap_or_default(),
    }
}

fn last_number(text: &str) -> Option<String> {
    let m = number_re().find_iter(text).last()?;
    let mut raw = m.as_str();
    // A hyphen glued to a preceding word ("3-4", "x-1") is not a sign.
    if raw.starts_with('-')
        && text[..m.start()]
            .chars()
            .next_back()
            .is_some_and(|c| c.is_alphanumeric())
    {
        raw = &raw[1..];
    }
    let mut digits: String = raw.trim_end_matches(',').chars().filter(|&c| c != ',').collect();
    if digits.contains('.') {
        let trimmed = digits.trim_end_matches('0').trim_end_matches('.').len();
        digits.truncate(trimmed);
    }
    if digits == "-0" {
        digits = "0".to_owned();
    }
    Some(digits)
}

fn last_choice(text: &str, choices: &[String]) -> Option<String> {
    let alternatives: Vec<String> = choices
        .iter()
        .map(|c| c.trim())
        .filter(|c| !c.is_empty())
        .map(regex::escape)
        .collect();
    if alternatives.is_empty() {
        return None;
    }
    let re = Regex::new(&format!(r"\b({})\b", alternatives.join("|"))).ok()?;
    re.captures_iter(text)
        .last()
        .map(|c| c[1].to_owned())
}

fn after_answer_is(text: &str) -> Option<String> {
    let m = answer_is_re().find_iter(text).last()?;
    let rest = text[m.end()..].trim_start();
    let line = rest.lines().next().unwrap_or("");
    let cleaned = line
        .trim()
        .trim_end_matches(|c: char| matches!(c, '.' | ',' | '!' | '?' | ';' | ':') || c.is_whitespace())
        .trim_start_matches(':')
        .trim();
    if cleaned.is_empty() {
        None
    } else {
        Some(cleaned.to_owned())
    }
}
