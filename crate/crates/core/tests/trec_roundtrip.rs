use std::collections::BTreeMap;
use std::io::Write;

use obsinfo::trec::{parse_qrels, parse_qrels_file, parse_run, parse_run_file, write_qrels, write_run};
use obsinfo::{DocId, Error, GoldStandard, RankedList};
use proptest::prelude::*;

fn topics_strategy() -> impl Strategy<Value = BTreeMap<String, RankedList>> {
    let list = prop::collection::btree_map("[a-z][a-z0-9-]{0,8}", -1.0e6f64..1.0e6, 1..20)
        .prop_map(|m| RankedList::from_scored(m.into_iter().map(|(d, s)| (DocId::new(d).unwrap(), s))).unwrap());
    prop::collection::btree_map("[0-9]{1,4}", list, 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn runs_survive_a_write_parse_cycle(topics in topics_strategy(), tag in "[A-Za-z][A-Za-z0-9_]{0,10}") {
        let mut buf = Vec::new();
        write_run(&mut buf, &topics, &tag).unwrap();
        let parsed = parse_run(buf.as_slice()).unwrap();
        prop_assert_eq!(parsed.tag, Some(tag));
        prop_assert_eq!(parsed.topics, topics);
    }

    #[test]
    fn qrels_survive_a_write_parse_cycle(golds in prop::collection::btree_map(
        "[0-9]{1,4}",
        prop::collection::btree_set("[a-z][a-z0-9]{0,6}", 1..15)
            .prop_map(|s| GoldStandard::new(s.into_iter().map(|d| DocId::new(d).unwrap()))),
        1..5,
    )) {
        let mut buf = Vec::new();
        write_qrels(&mut buf, &golds).unwrap();
        prop_assert_eq!(parse_qrels(buf.as_slice()).unwrap(), golds);
    }
}

#[test]
fn file_errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.run");
    let msg = parse_run_file(&missing).unwrap_err().to_string();
    assert!(msg.contains("absent.run"), "{msg}");

    let bad = dir.path().join("bad.qrels");
    writeln!(std::fs::File::create(&bad).unwrap(), "1 0 a 1\n1 0 b").unwrap();
    let err = parse_qrels_file(&bad).unwrap_err();
    assert!(matches!(&err, Error::Parse { line: 2, message } if message.contains("bad.qrels")), "{err}");
}
