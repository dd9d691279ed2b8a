//! Tag scanner. Recognizes well-paired `<kind>...</kind>` blocks over plain
//! text; anything that does not pair up stays plain and is flagged later by
//! validation, keeping parsing total.

use super::{Origin, Segment, SegmentKind, Span, TagKind};

/// Matches an opening tag `<kind>` at the start of `text`; returns the kind
/// and the byte length of the tag token. Exact, case-sensitive form only.
fn match_open_tag(text: &str) -> Option<(TagKind, usize)> {
    let rest = text.strip_prefix('<')?;
    let end = rest.find('>')?;
    let name = &rest[..end];
    let kind = TagKind::from_name(name)?;
    Some((kind, 1 + end + 1))
}

/// Scans `text` into segments with byte spans offset by `base`.
///
/// Concatenating the raw text of the returned segments reproduces `text`
/// byte-for-byte. A `<kind>` without a following `</kind>` is left inside a
/// plain run; blocks are matched non-greedily (first close wins).
pub fn scan_segments(text: &str, base: usize) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut plain_start = 0usize;
    let mut pos = 0usize;
    while let Some(lt) = text[pos..].find('<') {
        let abs = pos + lt;
        if let Some((kind, open_len)) = match_open_tag(&text[abs..]) {
            let close = kind.close_tag();
            if let Some(rel) = text[abs + open_len..].find(&close) {
                if plain_start < abs {
                    out.push(plain(&text[plain_start..abs], base + plain_start));
                }
                let content_start = abs + open_len;
                let content_end = content_start + rel;
                let seg_end = content_end + close.len();
                out.push(Segment {
                    kind: kind.into(),
                    content: text[content_start..content_end].to_string(),
                    origin: default_origin(kind),
                    span: Span::new(base + abs, base + seg_end),
                });
                pos = seg_end;
                plain_start = seg_end;
                continue;
            }
        }
        pos = abs + 1;
    }
    if plain_start < text.len() {
        out.push(plain(&text[plain_start..], base + plain_start));
    }
    out
}

fn plain(content: &str, start: usize) -> Segment {
    Segment {
        kind: SegmentKind::Plain,
        content: content.to_string(),
        origin: Origin::AgentGenerated,
        span: Span::new(start, start + content.len()),
    }
}

/// Result blocks exist only via injection in the rollout protocol, so a cold
/// parse infers them as system-injected.
fn default_origin(kind: TagKind) -> Origin {
    if kind == TagKind::Result {
        Origin::SystemInjected
    } else {
        Origin::AgentGenerated
    }
}

/// Segments raw text given the known injected result spans. Injected spans
/// become `Result` segments verbatim; the gaps are scanned normally with
/// agent-generated origin, so a model-faked `<result>` block keeps
/// `AgentGenerated` origin and fails the injection-origin check.
pub fn segment_with_injections(raw: &str, injected: &[Span]) -> Vec<Segment> {
    if injected.is_empty() {
        return scan_agent_region(raw, 0);
    }
    let mut out = Vec::new();
    let mut cursor = 0usize;
    for span in injected {
        if cursor < span.start {
            out.extend(scan_agent_region(&raw[cursor..span.start], cursor));
        }
        let open = TagKind::Result.open_tag();
        let close = TagKind::Result.close_tag();
        let inner = &raw[span.start + open.len()..span.end - close.len()];
        out.push(Segment {
            kind: SegmentKind::Result,
            content: inner.to_string(),
            origin: Origin::SystemInjected,
            span: *span,
        });
        cursor = span.end;
    }
    if cursor < raw.len() {
        out.extend(scan_agent_region(&raw[cursor..], cursor));
    }
    out
}

fn scan_agent_region(text: &str, base: usize) -> Vec<Segment> {
    let mut segs = scan_segments(text, base);
    // Anything the model generated, including a faked result block, is
    // agent-generated in this region.
    for seg in &mut segs {
        seg.origin = Origin::AgentGenerated;
    }
    segs
}
