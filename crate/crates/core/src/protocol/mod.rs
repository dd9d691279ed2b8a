//! Tag protocol shared by the reasoning and search agents.
//!
//! Both agents emit a flat sequence of tagged blocks (`<think>`, `<question>`,
//! `<search>`, `<result>`, `<report>`, `<verification>`) over plain text.
//! This module parses that grammar, detects generation pause points, injects
//! retrieved results, and validates transcripts against the per-role format
//! rules that gate the outcome rewards.

mod parse;
mod validate;

pub use validate::validate_format;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// The six tag kinds of the protocol. Unknown tag names never map here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagKind {
    Think,
    Question,
    Search,
    Result,
    Report,
    Verification,
}

impl TagKind {
    pub const ALL: [TagKind; 6] = [
        TagKind::Think,
        TagKind::Question,
        TagKind::Search,
        TagKind::Result,
        TagKind::Report,
        TagKind::Verification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TagKind::Think => "think",
            TagKind::Question => "question",
            TagKind::Search => "search",
            TagKind::Result => "result",
            TagKind::Report => "report",
            TagKind::Verification => "verification",
        }
    }

    pub fn from_name(name: &str) -> Option<TagKind> {
        // Exact, case-sensitive match; no attributes, no whitespace.
        TagKind::ALL.iter().copied().find(|k| k.name() == name)
    }

    pub fn open_tag(self) -> String {
        format!("<{}>", self.name())
    }

    pub fn close_tag(self) -> String {
        format!("</{}>", self.name())
    }
}

/// What a segment is: a recognized tagged block or untagged text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Plain,
    Think,
    Question,
    Search,
    Result,
    Report,
    Verification,
}

impl From<TagKind> for SegmentKind {
    fn from(k: TagKind) -> SegmentKind {
        match k {
            TagKind::Think => SegmentKind::Think,
            TagKind::Question => SegmentKind::Question,
            TagKind::Search => SegmentKind::Search,
            TagKind::Result => SegmentKind::Result,
            TagKind::Report => SegmentKind::Report,
            TagKind::Verification => SegmentKind::Verification,
        }
    }
}

/// Who produced a segment's bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    AgentGenerated,
    SystemInjected,
}

/// Byte-offset interval into the raw transcript text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// One parsed piece of a transcript. For tagged segments `content` is the
/// inner text between the tags; the span covers the tags themselves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub content: String,
    pub origin: Origin,
    pub span: Span,
}

/// Which agent's grammar a transcript follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Reasoning,
    Search,
}

/// Binary verification outcome; no third value is representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Support,
    Refute,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Support => write!(f, "Support"),
            Verdict::Refute => write!(f, "Refute"),
        }
    }
}

/// Action implied by the end of a partial generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PauseAction {
    QuestionPosed(String),
    SearchIssued(String),
    ReportEmitted(String),
    VerdictEmitted(Verdict),
    Incomplete,
}

/// Machine-readable format violation codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    UnmatchedOpen,
    UnmatchedClose,
    NestedTag,
    MissingTerminal,
    MultipleTerminal,
    TerminalNotLast,
    NoParsableVerdict,
    ResultNotInjected,
    RoleMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub span: Span,
    pub message: String,
}

/// Result of format validation; `valid` holds exactly when no violations exist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatReport {
    pub violations: Vec<Violation>,
}

impl FormatReport {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("result injection requires a pending question or search, found {found}")]
    InjectionNotAllowed { found: String },
}

/// An ordered sequence of tagged segments over raw text. Immutable after
/// construction; `with_generated` and `inject_result` return new values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    role: Role,
    raw: String,
    segments: Vec<Segment>,
    /// Spans of system-injected `<result>` blocks, ordered and disjoint.
    injected: Vec<Span>,
}

impl Transcript {
    pub fn new(role: Role) -> Transcript {
        Transcript {
            role,
            raw: String::new(),
            segments: Vec::new(),
            injected: Vec::new(),
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Appends agent-generated text and reparses the affected region.
    pub fn with_generated(&self, text: &str) -> Transcript {
        let mut raw = self.raw.clone();
        raw.push_str(text);
        Transcript::from_parts(self.role, raw, self.injected.clone())
    }

    /// Appends a system-injected `<result>` block holding `content`.
    ///
    /// Embedded result tags in `content` are escaped so the block always
    /// parses back as exactly one `Result` segment.
    pub fn inject_result(&self, content: &str) -> Result<Transcript, ProtocolError> {
        let (action, _) = detect_pause(&self.raw, self.role);
        let pending = matches!(
            action,
            PauseAction::QuestionPosed(_) | PauseAction::SearchIssued(_)
        );
        if !pending {
            return Err(ProtocolError::InjectionNotAllowed {
                found: format!("{action:?}"),
            });
        }
        let start = self.raw.len();
        let block = format!(
            "{}{}{}",
            TagKind::Result.open_tag(),
            escape_result_content(content),
            TagKind::Result.close_tag()
        );
        let mut raw = self.raw.clone();
        raw.push_str(&block);
        let mut injected = self.injected.clone();
        injected.push(Span::new(start, raw.len()));
        Ok(Transcript::from_parts(self.role, raw, injected))
    }

    fn from_parts(role: Role, raw: String, injected: Vec<Span>) -> Transcript {
        let segments = parse::segment_with_injections(&raw, &injected);
        Transcript {
            role,
            raw,
            segments,
            injected,
        }
    }

    /// Line-delimited structured dump: one record per segment with fields
    /// `kind`, `origin`, `start`, `end`, `content`.
    pub fn dump_segments(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            let record = serde_json::json!({
                "kind": seg.kind,
                "origin": seg.origin,
                "start": seg.span.start,
                "end": seg.span.end,
                "content": seg.content,
            });
            out.push_str(&record.to_string());
            out.push('\n');
        }
        out
    }
}

/// Parses raw text into a transcript. Total: malformed tag structure yields
/// plain segments that `validate_format` later flags, never a failure.
///
/// Origins are inferred: `Result` segments are system-injected by
/// construction of the rollout protocol, everything else agent-generated.
pub fn parse_stream(raw: &str, role: Role) -> Transcript {
    let segments = parse::scan_segments(raw, 0);
    let injected = segments
        .iter()
        .filter(|s| s.kind == SegmentKind::Result)
        .map(|s| s.span)
        .collect();
    Transcript::from_parts(role, raw.to_string(), injected)
}

/// Escapes embedded result tags in retrieved content before wrapping.
pub fn escape_result_content(content: &str) -> String {
    content
        .replace("<result>", "&lt;result&gt;")
        .replace("</result>", "&lt;/result&gt;")
}

/// Restores escaped result tags for display.
pub fn unescape_result_content(content: &str) -> String {
    content
        .replace("&lt;result&gt;", "<result>")
        .replace("&lt;/result&gt;", "</result>")
}

/// Returns the action implied by the last complete action tag at the end of
/// `partial`, plus a violation when the tag exists but is illegal for `role`.
pub fn detect_pause(partial: &str, role: Role) -> (PauseAction, Option<Violation>) {
    let segments = parse::scan_segments(partial, 0);
    // Skip trailing whitespace-only plain text.
    let last = segments
        .iter()
        .rev()
        .find(|s| !(s.kind == SegmentKind::Plain && s.content.trim().is_empty()));
    let Some(seg) = last else {
        return (PauseAction::Incomplete, None);
    };
    // The tag must actually terminate the text (modulo trailing whitespace).
    if !partial[seg.span.end..].trim().is_empty() {
        return (PauseAction::Incomplete, None);
    }
    let mismatch = |kind: &str| {
        (
            PauseAction::Incomplete,
            Some(Violation {
                code: ViolationCode::RoleMismatch,
                span: seg.span,
                message: format!("closing </{kind}> tag is not a {role:?}-role action"),
            }),
        )
    };
    match (seg.kind, role) {
        (SegmentKind::Question, Role::Reasoning) => {
            (PauseAction::QuestionPosed(seg.content.clone()), None)
        }
        (SegmentKind::Question, Role::Search) => mismatch("question"),
        (SegmentKind::Search, Role::Search) => (PauseAction::SearchIssued(seg.content.clone()), None),
        (SegmentKind::Search, Role::Reasoning) => mismatch("search"),
        (SegmentKind::Report, Role::Search) => (PauseAction::ReportEmitted(seg.content.clone()), None),
        (SegmentKind::Report, Role::Reasoning) => mismatch("report"),
        (SegmentKind::Verification, Role::Reasoning) => match extract_verdict(&seg.content) {
            Some(v) => (PauseAction::VerdictEmitted(v), None),
            None => (
                PauseAction::Incomplete,
                Some(Violation {
                    code: ViolationCode::NoParsableVerdict,
                    span: seg.span,
                    message: "verification closed without a single boxed verdict".to_string(),
                }),
            ),
        },
        (SegmentKind::Verification, Role::Search) => mismatch("verification"),
        _ => (PauseAction::Incomplete, None),
    }
}

/// Scans for the boxed verdict pattern. Returns a verdict only when exactly
/// one boxed pattern is present and its inner word is Support or Refute,
/// case-insensitively, tolerating surrounding whitespace inside the braces.
pub fn extract_verdict(text: &str) -> Option<Verdict> {
    let mut found = None;
    let mut rest = text;
    let mut count = 0;
    while let Some(pos) = rest.find("\\boxed{") {
        let inner_start = pos + "\\boxed{".len();
        let Some(close) = rest[inner_start..].find('}') else {
            break;
        };
        let inner = rest[inner_start..inner_start + close].trim();
        count += 1;
        if count > 1 {
            return None;
        }
        found = if inner.eq_ignore_ascii_case("support") {
            Some(Verdict::Support)
        } else if inner.eq_ignore_ascii_case("refute") {
            Some(Verdict::Refute)
        } else {
            None
        };
        rest = &rest[inner_start + close + 1..];
    }
    found
}

#[cfg(test)]
mod tests;
