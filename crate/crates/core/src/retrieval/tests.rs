use super::*;
use std::io::Write;

fn corpus_from(pairs: &[(&str, &str)]) -> Corpus {
    let mut corpus = Corpus::default();
    for (id, contents) in pairs {
        corpus
            .insert(Passage {
                id: id.to_string(),
                contents: contents.to_string(),
            })
            .unwrap();
    }
    corpus
}

fn write_jsonl(lines: &[serde_json::Value]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    for line in lines {
        writeln!(f, "{line}").unwrap();
    }
    f
}

#[test]
fn ingest_three_line_fixture() {
    let f = write_jsonl(&[
        serde_json::json!({"id": "d1", "contents": "alpha"}),
        serde_json::json!({"id": "d2", "contents": "beta", "title": "B"}),
        serde_json::json!({"id": "d3", "contents": "gamma"}),
    ]);
    let corpus = ingest_corpus(f.path()).unwrap();
    assert_eq!(corpus.count(), 3);
    assert_eq!(corpus.get("d2").unwrap().contents, "B\nbeta");
}

#[test]
fn ingest_rejects_duplicate_ids_with_line_numbers() {
    let f = write_jsonl(&[
        serde_json::json!({"id": "d1", "contents": "a"}),
        serde_json::json!({"id": "dup", "contents": "b"}),
        serde_json::json!({"id": "d3", "contents": "c"}),
        serde_json::json!({"id": "d4", "contents": "d"}),
        serde_json::json!({"id": "dup", "contents": "e"}),
    ]);
    match ingest_corpus(f.path()) {
        Err(RetrievalError::DuplicateId {
            id,
            first_line,
            second_line,
        }) => {
            assert_eq!(id, "dup");
            assert_eq!((first_line, second_line), (2, 5));
        }
        other => panic!("expected duplicate id error, got {other:?}"),
    }
}

#[test]
fn ingest_empty_file_and_empty_index_error() {
    let f = write_jsonl(&[]);
    let corpus = ingest_corpus(f.path()).unwrap();
    assert_eq!(corpus.count(), 0);
    assert!(matches!(build_index(&corpus), Err(RetrievalError::EmptyCorpus)));
}

#[test]
fn ingest_reports_malformed_line_number() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "{}", serde_json::json!({"id": "d1", "contents": "a"})).unwrap();
    writeln!(f, "not json").unwrap();
    match ingest_corpus(f.path()) {
        Err(RetrievalError::MalformedLine { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected malformed line error, got {other:?}"),
    }
}

#[test]
fn build_index_counts_terms() {
    let corpus = corpus_from(&[("d1", "alpha beta"), ("d2", "beta beta")]);
    let index = build_index(&corpus).unwrap();
    assert_eq!(
        index.postings("beta").unwrap(),
        &[("d1".to_string(), 1), ("d2".to_string(), 2)]
    );
    assert_eq!(index.doc_length("d1"), Some(2));
    assert_eq!(index.doc_length("d2"), Some(2));
    assert_eq!(index.avg_doc_length(), 2.0);
    assert_eq!(index.doc_count(), 2);
}

#[test]
fn search_finds_unique_phrase_at_rank_one() {
    let corpus = corpus_from(&[
        ("d1", "Feodor Chin is an American voice actor."),
        ("d2", "Overwatch is a video game by Blizzard."),
        ("d3", "Zenyatta is a playable hero."),
    ]);
    let index = build_index(&corpus).unwrap();
    let hits = search(&index, "Feodor Chin", 3).unwrap();
    assert_eq!(hits[0].passage_id, "d1");
    assert_eq!(hits[0].rank, 1);
}

#[test]
fn search_k_larger_than_corpus_returns_all() {
    let corpus = corpus_from(&[("d1", "alpha"), ("d2", "alpha beta")]);
    let index = build_index(&corpus).unwrap();
    let hits = search(&index, "alpha", 10).unwrap();
    assert_eq!(hits.len(), 2);
    assert_eq!(
        hits.iter().map(|h| h.rank).collect::<Vec<_>>(),
        vec![1, 2]
    );
}

#[test]
fn search_punctuation_only_query_is_empty_query() {
    let corpus = corpus_from(&[("d1", "alpha")]);
    let index = build_index(&corpus).unwrap();
    assert!(matches!(
        search(&index, "?!,.", 3),
        Err(RetrievalError::EmptyQuery)
    ));
}

#[test]
fn search_monotone_k_prefix_property() {
    let corpus = corpus_from(&[
        ("a", "x y z"),
        ("b", "x y"),
        ("c", "x"),
        ("d", "y z"),
    ]);
    let index = build_index(&corpus).unwrap();
    for k in 1..4 {
        let small = search(&index, "x y", k).unwrap();
        let big = search(&index, "x y", k + 1).unwrap();
        let small_ids: Vec<_> = small.iter().map(|h| &h.passage_id).collect();
        let big_ids: Vec<_> = big.iter().take(k).map(|h| &h.passage_id).collect();
        assert_eq!(small_ids, big_ids);
    }
}

#[test]
fn format_results_numbered_block() {
    let corpus = corpus_from(&[("d1", "first passage"), ("d2", "second passage")]);
    let hits = vec![
        SearchHit {
            passage_id: "d2".to_string(),
            score: 2.0,
            rank: 1,
        },
        SearchHit {
            passage_id: "d1".to_string(),
            score: 1.0,
            rank: 2,
        },
    ];
    let text = format_results(&hits, &corpus).unwrap();
    assert_eq!(text, "(1) second passage\n(2) first passage");
}

#[test]
fn format_results_zero_hits_sentinel() {
    let corpus = corpus_from(&[("d1", "x")]);
    assert_eq!(format_results(&[], &corpus).unwrap(), NO_RESULTS_SENTINEL);
}

#[test]
fn format_results_dangling_id_errors() {
    let corpus = corpus_from(&[("d1", "x")]);
    let hits = vec![SearchHit {
        passage_id: "missing".to_string(),
        score: 1.0,
        rank: 1,
    }];
    assert!(matches!(
        format_results(&hits, &corpus),
        Err(RetrievalError::DanglingPassage(_))
    ));
}

#[test]
fn service_answers_search_and_health() {
    let corpus = corpus_from(&[
        ("d1", "alpha beta"),
        ("d2", "beta gamma"),
        ("d3", "delta"),
    ]);
    let index = build_index(&corpus).unwrap();
    let handle = serve(
        index.clone(),
        corpus.clone(),
        "127.0.0.1:0".parse().unwrap(),
        &RetrievalConfig::default(),
    )
    .unwrap();

    let hits = query_remote(&handle.base_url(), "beta", Some(2)).unwrap();
    let local = search(&index, "beta", 2).unwrap();
    assert_eq!(
        hits.iter().map(|h| &h.id).collect::<Vec<_>>(),
        local.iter().map(|h| &h.passage_id).collect::<Vec<_>>()
    );

    // k omitted -> server default 3
    let hits = query_remote(&handle.base_url(), "beta gamma delta alpha", None).unwrap();
    assert_eq!(hits.len(), 3);

    // empty query maps back to EmptyQuery, not a network error
    assert!(matches!(
        query_remote(&handle.base_url(), "...", None),
        Err(RetrievalError::EmptyQuery)
    ));

    let health: serde_json::Value = reqwest::blocking::get(format!("{}/health", handle.base_url()))
        .unwrap()
        .json()
        .unwrap();
    assert_eq!(health["status"], "ok");
    assert_eq!(health["doc_count"], 3);

    // malformed body -> 4xx-class response
    let resp = reqwest::blocking::Client::new()
        .post(format!("{}/search", handle.base_url()))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .unwrap();
    assert!(resp.status().is_client_error());

    handle.shutdown();
}

#[test]
fn query_remote_network_failure_is_retryable() {
    let err = query_remote("http://127.0.0.1:1", "x", None).unwrap_err();
    assert!(err.is_retryable());
}

struct HashEmbedder;

impl EmbeddingEndpoint for HashEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f64>, RetrievalError> {
        // toy deterministic embedding: token-hash buckets
        let mut v = vec![0.0; 8];
        for tok in analyze(text) {
            let h: usize = tok.bytes().map(|b| b as usize).sum();
            v[h % 8] += 1.0;
        }
        Ok(v)
    }
}

#[test]
fn embedding_backend_ranks_by_inner_product() {
    let corpus = corpus_from(&[("d1", "alpha alpha"), ("d2", "beta"), ("d3", "alpha")]);
    let index = EmbeddingIndex::build(&corpus, &HashEmbedder).unwrap();
    assert_eq!(index.doc_count(), 3);
    let hits = index.search(&HashEmbedder, "alpha", 2).unwrap();
    assert_eq!(hits[0].passage_id, "d1");
    assert_eq!(hits.len(), 2);
    assert!(matches!(
        index.search(&HashEmbedder, "   ", 2),
        Err(RetrievalError::EmptyQuery)
    ));
}
