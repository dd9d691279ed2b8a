//! Per-role transcript format validation. The resulting report is what the
//! reward functions consult for their wrong-format branch.

use super::{
    extract_verdict, FormatReport, Origin, Role, SegmentKind, Span, TagKind, Transcript, Violation,
    ViolationCode,
};

/// Validates a transcript against the role's format rules.
///
/// Both roles require well-paired, non-nested tags and injection-only result
/// blocks. Reasoning transcripts additionally need exactly one terminal
/// `<verification>` block containing exactly one boxed verdict; search
/// transcripts exactly one terminal `<report>` block.
pub fn validate_format(transcript: &Transcript, role: Role) -> FormatReport {
    let mut violations = Vec::new();
    structural_violations(transcript, &mut violations);
    origin_violations(transcript, &mut violations);
    let terminal_kind = match role {
        Role::Reasoning => SegmentKind::Verification,
        Role::Search => SegmentKind::Report,
    };
    terminal_violations(transcript, terminal_kind, &mut violations);
    if role == Role::Reasoning {
        verdict_violations(transcript, &mut violations);
    }
    FormatReport { violations }
}

/// Stray tag tokens left in plain runs mean an open without a close (or a
/// close without an open); tag tokens inside a tagged block mean nesting
/// beyond depth 1. Both are structural failures.
fn structural_violations(transcript: &Transcript, violations: &mut Vec<Violation>) {
    for seg in transcript.segments() {
        // Retrieved content is opaque; embedded result tags were escaped at
        // injection time and other markup in a passage is not agent structure.
        if seg.kind == SegmentKind::Result {
            continue;
        }
        let (inner_base, code_for_open, code_for_close) = match seg.kind {
            SegmentKind::Plain => (
                seg.span.start,
                ViolationCode::UnmatchedOpen,
                ViolationCode::UnmatchedClose,
            ),
            _ => (
                // content starts after the opening tag token
                seg.span.start + seg.span.len() - seg.content.len()
                    - close_len(seg.kind),
                ViolationCode::NestedTag,
                ViolationCode::NestedTag,
            ),
        };
        for kind in TagKind::ALL {
            for (tok, code) in [
                (kind.open_tag(), code_for_open),
                (kind.close_tag(), code_for_close),
            ] {
                let mut from = 0usize;
                while let Some(pos) = seg.content[from..].find(&tok) {
                    let at = inner_base + from + pos;
                    violations.push(Violation {
                        code,
                        span: Span::new(at, at + tok.len()),
                        message: format!("stray {tok} token inside {:?} segment", seg.kind),
                    });
                    from += pos + tok.len();
                }
            }
        }
    }
}

fn close_len(kind: SegmentKind) -> usize {
    match kind {
        SegmentKind::Plain => 0,
        SegmentKind::Think => TagKind::Think.close_tag().len(),
        SegmentKind::Question => TagKind::Question.close_tag().len(),
        SegmentKind::Search => TagKind::Search.close_tag().len(),
        SegmentKind::Result => TagKind::Result.close_tag().len(),
        SegmentKind::Report => TagKind::Report.close_tag().len(),
        SegmentKind::Verification => TagKind::Verification.close_tag().len(),
    }
}

fn origin_violations(transcript: &Transcript, violations: &mut Vec<Violation>) {
    for seg in transcript.segments() {
        if seg.kind == SegmentKind::Result && seg.origin != Origin::SystemInjected {
            violations.push(Violation {
                code: ViolationCode::ResultNotInjected,
                span: seg.span,
                message: "result block was generated by the agent, not injected".to_string(),
            });
        }
    }
}

fn terminal_violations(
    transcript: &Transcript,
    terminal: SegmentKind,
    violations: &mut Vec<Violation>,
) {
    let positions: Vec<usize> = transcript
        .segments()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind == terminal)
        .map(|(i, _)| i)
        .collect();
    match positions.as_slice() {
        [] => violations.push(Violation {
            code: ViolationCode::MissingTerminal,
            span: Span::new(transcript.raw().len(), transcript.raw().len()),
            message: format!("no terminal {terminal:?} segment"),
        }),
        [only] => {
            // Trailing whitespace-only plain text after the terminal is fine.
            let trailing_ok = transcript.segments()[only + 1..]
                .iter()
                .all(|s| s.kind == SegmentKind::Plain && s.content.trim().is_empty());
            if !trailing_ok {
                violations.push(Violation {
                    code: ViolationCode::TerminalNotLast,
                    span: transcript.segments()[*only].span,
                    message: format!("{terminal:?} segment is not terminal"),
                });
            }
        }
        many => {
            for idx in &many[1..] {
                violations.push(Violation {
                    code: ViolationCode::MultipleTerminal,
                    span: transcript.segments()[*idx].span,
                    message: format!("more than one {terminal:?} segment"),
                });
            }
        }
    }
}

fn verdict_violations(transcript: &Transcript, violations: &mut Vec<Violation>) {
    for seg in transcript.segments() {
        if seg.kind == SegmentKind::Verification && extract_verdict(&seg.content).is_none() {
            violations.push(Violation {
                code: ViolationCode::NoParsableVerdict,
                span: seg.span,
                message: "verification does not contain exactly one boxed Support/Refute"
                    .to_string(),
            });
        }
    }
}
