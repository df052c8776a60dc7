use codenames_core::embeddings::{cosine_distance, EmbeddingModel};
use codenames_core::rng::stream;
use codenames_core::Error;
use proptest::prelude::*;
use rand::Rng;

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/neighbors_small.txt");

fn five_words() -> String {
    let m = EmbeddingModel::from_vectors(
        "five",
        vec![
            ("ant".into(), vec![1.0, 0.1]),
            ("bee".into(), vec![0.9, 0.3]),
            ("cat".into(), vec![-0.2, 1.0]),
            ("dog".into(), vec![-0.1, 0.8]),
            ("eel".into(), vec![0.5, -1.0]),
        ],
        2,
    )
    .unwrap();
    let mut buf = Vec::new();
    m.write_to(&mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn externally_produced_file_matches_brute_force() {
    let m = EmbeddingModel::load(FIXTURE).unwrap();
    assert_eq!((m.name(), m.dim(), m.len(), m.k()), ("small", 4, 12, 4));
    for w in m.words() {
        let u = m.vector(w).unwrap();
        let mut all: Vec<(f64, &str)> = m
            .words()
            .iter()
            .filter(|o| *o != w)
            .map(|o| (cosine_distance(u, m.vector(o).unwrap()).unwrap(), o.as_str()))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        let stored: Vec<(&str, f64)> = m.neighbors(w).unwrap().collect();
        assert_eq!(stored.len(), 4);
        for ((sw, sd), (bd, bw)) in stored.iter().zip(&all) {
            assert_eq!(sw, bw);
            assert!((sd - bd).abs() < 1e-6);
        }
    }
}

#[test]
fn rebuilding_from_fixture_vectors_reproduces_the_file() {
    let text = std::fs::read_to_string(FIXTURE).unwrap();
    let m = EmbeddingModel::parse(&text, "fixture").unwrap();
    let entries = m
        .words()
        .iter()
        .map(|w| (w.clone(), m.vector(w).unwrap().to_vec()))
        .collect();
    let rebuilt = EmbeddingModel::from_vectors("small", entries, 4).unwrap();
    let mut buf = Vec::new();
    rebuilt.write_to(&mut buf).unwrap();
    let ours = String::from_utf8(buf).unwrap();
    // same words, same neighbor order; distances agree to float noise
    for (a, b) in ours.lines().zip(text.lines()) {
        if a.starts_with('N') {
            let names = |l: &str| l.split(' ').map(|t| t.split(':').next().unwrap().to_string()).collect::<Vec<_>>();
            assert_eq!(names(a), names(b));
        } else {
            assert_eq!(a, b);
        }
    }
}

#[test]
fn five_word_file_loads() {
    let m = EmbeddingModel::parse(&five_words(), "five").unwrap();
    assert_eq!(m.len(), 5);
    assert!(m.contains("eel"));
}

#[test]
fn missing_neighbor_word_is_rejected() {
    let text = five_words().replace("N ant bee:", "N ant bat:");
    match EmbeddingModel::parse(&text, "five") {
        Err(Error::Parse { line, msg, .. }) => {
            assert_eq!(line, 3);
            assert!(msg.contains("bat"), "{msg}");
        }
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn tampered_distance_is_rejected() {
    let text = five_words();
    let line = text.lines().find(|l| l.starts_with("N ant")).unwrap();
    let (head, tail) = line.split_once(':').unwrap();
    let tail = tail.split_once(' ').map(|(_, rest)| format!(" {rest}")).unwrap_or_default();
    let tampered = text.replace(line, &format!("{head}:0.5{tail}"));
    assert!(matches!(
        EmbeddingModel::parse(&tampered, "five"),
        Err(Error::Parse { line: 3, .. })
    ));
}

#[test]
fn structural_errors() {
    let text = five_words();
    let cases = [
        text.replace("V cat ", "V cat 0 "),                         // wrong dimension
        text.replace("V cat -0.2 1", "V cat 0 0"),                  // zero vector
        text.replace("V cat -0.2 1", "V cat x 1"),                  // bad float
        text.replacen("N eel", "X eel", 1),                         // unknown record
        text.lines().filter(|l| !l.starts_with("N dog")).collect::<Vec<_>>().join("\n"), // missing list
        format!("{text}V fox 1 1\nN fox ant:0\n"),                  // count mismatch
    ];
    for (i, c) in cases.iter().enumerate() {
        assert!(EmbeddingModel::parse(c, "five").is_err(), "case {i} parsed");
    }
}

#[test]
fn nearest_board_words_against_exhaustive_sort() {
    let m = EmbeddingModel::from_vectors(
        "hand",
        vec![
            ("clue".into(), vec![1.0, 0.0, 0.0]),
            ("w1".into(), vec![0.9, 0.4, 0.0]),
            ("w2".into(), vec![0.2, 1.0, 0.0]),
            ("w3".into(), vec![1.0, 0.0, 0.1]),
            ("w4".into(), vec![-1.0, 0.2, 0.0]),
        ],
        4,
    )
    .unwrap();
    let cands = ["w1", "w2", "w3", "w4"];
    let mut oracle: Vec<(f64, &str)> = cands
        .iter()
        .map(|c| (cosine_distance(m.vector("clue").unwrap(), m.vector(c).unwrap()).unwrap(), *c))
        .collect();
    oracle.sort_by(|a, b| a.0.total_cmp(&b.0));
    let expect: Vec<&str> = oracle.iter().map(|x| x.1).collect();
    assert_eq!(expect, vec!["w3", "w1", "w2", "w4"]);
    for k in 0..=4 {
        assert_eq!(m.nearest_board_words("clue", &cands, k).unwrap(), expect[..k]);
    }
}

fn random_model(seed: u64, n: usize, dim: usize) -> EmbeddingModel {
    let mut rng = stream(seed, &[]);
    let entries = (0..n)
        .map(|i| {
            let v = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            (format!("w{i:03}"), v)
        })
        .collect();
    EmbeddingModel::from_vectors("rand", entries, 10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_symmetric_and_bounded(
        u in prop::collection::vec(-5.0f64..5.0, 6),
        v in prop::collection::vec(-5.0f64..5.0, 6),
    ) {
        prop_assume!(u.iter().any(|x| x.abs() > 1e-3) && v.iter().any(|x| x.abs() > 1e-3));
        let a = cosine_distance(&u, &v).unwrap();
        let b = cosine_distance(&v, &u).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=2.0).contains(&a));
    }

    #[test]
    fn candidate_order_does_not_matter(seed in 0u64..1000, k in 1usize..8) {
        let m = random_model(seed, 30, 5);
        let words: Vec<&str> = m.words().iter().map(String::as_str).collect();
        let cands: Vec<&str> = words[1..9].to_vec();
        let mut shuffled = cands.clone();
        shuffled.reverse();
        shuffled.rotate_left((seed % 8) as usize);
        prop_assert_eq!(
            m.nearest_board_words(words[0], &cands, k).unwrap(),
            m.nearest_board_words(words[0], &shuffled, k).unwrap()
        );
    }

    #[test]
    fn stored_distances_match_vectors(seed in 0u64..1000) {
        let m = random_model(seed, 25, 4);
        for w in m.words() {
            for (n, d) in m.neighbors(w).unwrap() {
                prop_assert!((m.distance(w, n).unwrap() - d).abs() < 1e-6);
            }
        }
    }
}
