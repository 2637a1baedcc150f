mod common;

use std::fs;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use serde::Deserialize;
use viramem_core::corpus::{
    dedup_records, filter_valid, load_corpus, median_split, remove_outliers_iqr, save_corpus, Attachment,
    AttachmentKind, CommentRecord, CorpusError, Decision, EngagementField, MemorabilityGroup, PostCandidate,
    PostRecord, RejectReason,
};

use common::{load_fixture, Cases};

fn comment() -> impl Strategy<Value = CommentRecord> {
    ("[a-zA-Z ,.!?é東]{0,30}[a-z]", -50i64..5000).prop_map(|(body, comment_score)| CommentRecord { body, comment_score })
}

fn record() -> impl Strategy<Value = PostRecord> {
    (
        ("[a-z0-9]{1,7}", "(pics|pic|images)", "\\PC{0,40}"),
        (0i64..2_000_000_000, 0i64..10_000_000, -10i64..100_000, 0u64..5000),
        ("[0-9a-f]{6}", 1u32..5000, 1u32..5000, 1u64..50_000_000),
        prop::collection::vec(comment(), 0..=5),
        prop::option::of("run-[0-9]"),
    )
        .prop_map(|((id, sub, caption), (created, lag_ms, score, n), (hash, w, h, size), mut comments, run)| {
            comments.sort_by(|a, b| b.comment_score.cmp(&a.comment_score));
            let created_at = Utc.timestamp_opt(created, 0).unwrap();
            PostRecord {
                post_id: id,
                subreddit: sub,
                caption,
                created_at,
                fetched_at: created_at + chrono::Duration::milliseconds(lag_ms),
                score,
                num_comments: n,
                image_ref: format!("images/{hash}.jpg"),
                image_width: w,
                image_height: h,
                file_size: size,
                top_comments: comments,
                collection_run: run,
            }
        })
}

fn corpus() -> impl Strategy<Value = Vec<PostRecord>> {
    prop::collection::vec(record(), 0..25)
}

proptest! {
    #[test]
    fn save_load_roundtrip(c in corpus()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.ndjson");
        save_corpus(&path, &c).unwrap();
        prop_assert_eq!(load_corpus(&path).unwrap(), c);
    }

    #[test]
    fn dedup_is_idempotent(c in corpus()) {
        let once = dedup_records(&c).kept;
        let twice = dedup_records(&once);
        prop_assert_eq!(&twice.kept, &once);
        prop_assert!(twice.dropped.is_empty());
        prop_assert_eq!(once.len() + dedup_records(&c).dropped.len(), c.len());
        let mut ids: Vec<_> = once.iter().map(|r| &r.post_id).collect();
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), once.len());
    }

    #[test]
    fn median_split_bounds(xs in prop::collection::hash_set(0u32..1_000_000, 1..200)) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let n_high = median_split(&xs).iter().filter(|g| **g == MemorabilityGroup::High).count();
        prop_assert!(n_high <= xs.len().div_ceil(2));
        prop_assert_eq!(n_high, xs.len() / 2);
    }

    #[test]
    fn outliers_match_brute_force(
        rows in prop::collection::vec((0i64..200, 0u64..200), 4..60),
        spikes in prop::collection::vec((0usize..60, 1_000i64..100_000), 0..3),
    ) {
        let mut c: Vec<PostRecord> = rows.iter().enumerate().map(|(i, (s, n))| {
            let mut r = base(&format!("p{i}"));
            r.score = *s;
            r.num_comments = *n;
            r
        }).collect();
        for (i, v) in spikes {
            let k = i % c.len();
            c[k].score = v;
        }
        let out = remove_outliers_iqr(&c, &[EngagementField::Score, EngagementField::NumComments]).unwrap();
        let fence = |vals: Vec<f64>| {
            let mut s = vals.clone();
            s.sort_by(f64::total_cmp);
            let q = |p: f64| {
                let h = (s.len() - 1) as f64 * p;
                let lo = h.floor() as usize;
                s[lo] + (h - lo as f64) * (s[(lo + 1).min(s.len() - 1)] - s[lo])
            };
            let (q1, q3) = (q(0.25), q(0.75));
            (q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1))
        };
        let fs = fence(c.iter().map(|r| r.score as f64).collect());
        let fc = fence(c.iter().map(|r| r.num_comments as f64).collect());
        let expect_removed: Vec<&PostRecord> = c.iter().filter(|r| {
            let (s, n) = (r.score as f64, r.num_comments as f64);
            s < fs.0 || s > fs.1 || n < fc.0 || n > fc.1
        }).collect();
        prop_assert_eq!(out.removed.iter().collect::<Vec<_>>(), expect_removed);
        prop_assert_eq!(out.kept.len() + out.removed.len(), c.len());
    }

    #[test]
    fn filter_is_a_pure_predicate(score in -5i64..20, n in 0i64..20, images in 0usize..3, video in any::<bool>()) {
        let mut attachments: Vec<Attachment> = (0..images)
            .map(|i| Attachment { url: format!("https://i.test/{i}.png"), kind: AttachmentKind::Image })
            .collect();
        if video {
            attachments.push(Attachment { url: "https://v.test/x".into(), kind: AttachmentKind::Video });
        }
        let cand = PostCandidate {
            post_id: "p".into(),
            subreddit: "pics".into(),
            caption: String::new(),
            created_at: Utc.timestamp_opt(0, 0).unwrap(),
            score,
            num_comments: n,
            attachments,
            is_crosspost: false,
        };
        let d = filter_valid(&cand).unwrap();
        prop_assert_eq!(d, filter_valid(&cand).unwrap());
        prop_assert_eq!(d == Decision::Accept, score >= 5 && n >= 5 && images == 1 && !video);
    }
}

fn base(id: &str) -> PostRecord {
    PostRecord {
        post_id: id.into(),
        subreddit: "pics".into(),
        caption: "c".into(),
        created_at: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
        fetched_at: Utc.with_ymd_and_hms(2024, 1, 2, 0, 0, 0).unwrap(),
        score: 10,
        num_comments: 10,
        image_ref: format!("images/{id}.png"),
        image_width: 10,
        image_height: 10,
        file_size: 100,
        top_comments: vec![],
        collection_run: None,
    }
}

#[test]
fn filter_examples() {
    let cand = |score, n, images: usize| PostCandidate {
        post_id: "p".into(),
        subreddit: "pics".into(),
        caption: String::new(),
        created_at: Utc.timestamp_opt(0, 0).unwrap(),
        score,
        num_comments: n,
        attachments: (0..images)
            .map(|i| Attachment { url: format!("https://i.test/{i}.png"), kind: AttachmentKind::Image })
            .collect(),
        is_crosspost: false,
    };
    assert_eq!(filter_valid(&cand(5, 5, 1)).unwrap(), Decision::Accept);
    assert_eq!(filter_valid(&cand(5, 4, 1)).unwrap(), Decision::Reject(RejectReason::TooFewComments));
    assert_eq!(filter_valid(&cand(9, 9, 2)).unwrap(), Decision::Reject(RejectReason::MultiImage));
    assert!(filter_valid(&cand(9, -1, 1)).is_err());
}

#[test]
fn dedup_examples() {
    let a = base("a");
    let mut a2 = base("a");
    a2.image_ref = "images/other.png".into();
    assert_eq!(dedup_records(&[a.clone(), a2]).kept.len(), 1);
    let mut b = base("b");
    b.image_ref = a.image_ref.clone();
    assert_eq!(dedup_records(&[a, b]).kept.len(), 1);
    assert!(dedup_records(&[]).kept.is_empty());
}

#[test]
fn empty_file_is_an_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.ndjson");
    fs::write(&path, "").unwrap();
    assert!(load_corpus(&path).unwrap().is_empty());
}

#[test]
fn truncated_last_line_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.ndjson");
    save_corpus(&path, &[base("a"), base("b"), base("c")]).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let cut = text.trim_end().len() - 20;
    fs::write(&path, &text[..cut]).unwrap();
    match load_corpus(&path) {
        Err(CorpusError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_record_is_rejected_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.ndjson");
    let mut r = base("a");
    r.image_width = 0;
    fs::write(&path, serde_json::to_string(&r).unwrap()).unwrap();
    assert!(matches!(load_corpus(&path), Err(CorpusError::Parse { line: 1, .. })));
}

#[derive(Deserialize)]
struct SplitCase {
    scores: Vec<f64>,
    high: Vec<bool>,
    n_high: usize,
}

#[test]
fn median_split_matches_fixture() {
    let cases: Cases<SplitCase> = load_fixture("corpus/median_split.json");
    assert_eq!(cases.cases[0].scores.len(), 100);
    assert_eq!(cases.cases[0].n_high, 50);
    for c in cases.cases {
        let got: Vec<bool> = median_split(&c.scores).iter().map(|g| *g == MemorabilityGroup::High).collect();
        assert_eq!(got, c.high);
        assert_eq!(got.iter().filter(|h| **h).count(), c.n_high);
    }
}

#[derive(Deserialize)]
struct FenceCase {
    score: Vec<i64>,
    num_comments: Vec<u64>,
    fences: Vec<[f64; 2]>,
    keep: Vec<bool>,
}

#[test]
fn outlier_fences_match_fixture() {
    let cases: Cases<FenceCase> = load_fixture("corpus/iqr_fences.json");
    for c in cases.cases {
        let records: Vec<PostRecord> = c
            .score
            .iter()
            .zip(&c.num_comments)
            .enumerate()
            .map(|(i, (s, n))| PostRecord { score: *s, num_comments: *n, ..base(&format!("p{i}")) })
            .collect();
        let out = remove_outliers_iqr(&records, &[EngagementField::Score, EngagementField::NumComments]).unwrap();
        for ((_, f), want) in out.fences.iter().zip(&c.fences) {
            assert!((f.lower - want[0]).abs() < 1e-9 && (f.upper - want[1]).abs() < 1e-9);
        }
        let kept: Vec<&str> = out.kept.iter().map(|r| r.post_id.as_str()).collect();
        let want: Vec<String> = c.keep.iter().enumerate().filter(|(_, k)| **k).map(|(i, _)| format!("p{i}")).collect();
        assert_eq!(kept, want);
    }
}

#[test]
fn outlier_example_from_comments() {
    let records: Vec<PostRecord> = [6, 7, 8, 9, 10, 11, 12, 200]
        .iter()
        .enumerate()
        .map(|(i, n)| PostRecord { num_comments: *n, ..base(&format!("p{i}")) })
        .collect();
    let out = remove_outliers_iqr(&records, &[EngagementField::Score, EngagementField::NumComments]).unwrap();
    assert_eq!(out.removed.len(), 1);
    assert_eq!(out.removed[0].num_comments, 200);
    assert!(matches!(
        remove_outliers_iqr(&records[..3], &[EngagementField::Score]),
        Err(CorpusError::TooSmall { .. })
    ));
}
