//! Versioned prompt text assets and prompt construction.

pub const REASONING_SYSTEM: &str = include_str!("../../assets/prompts/reasoning_system.txt");
pub const SEARCH_SYSTEM: &str = include_str!("../../assets/prompts/search_system.txt");
pub const JUDGE_TEMPLATE: &str = include_str!("../../assets/prompts/judge.txt");
pub const SYNTHESIS_TEMPLATE: &str = include_str!("../../assets/prompts/synthesis.txt");

/// Bumped whenever any prompt asset changes; recorded in exported batches.
pub const PROMPT_VERSION: &str = "prompts-v1";

pub fn reasoning_prompt(claim: &str) -> String {
    format!("{REASONING_SYSTEM}\nClaim: {claim}\n")
}

pub fn search_prompt(question: &str) -> String {
    format!("{SEARCH_SYSTEM}\nQuestion: {question}\n")
}
