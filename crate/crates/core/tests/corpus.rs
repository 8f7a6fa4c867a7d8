use std::fs;
use std::path::PathBuf;

use abc_core::bpi::{correspondence_check, parse_bpi};
use abc_core::{parse_program, StepOptions};

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn files(dir: PathBuf, ext: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    out.sort();
    out
}

#[test]
fn every_model_parses_and_round_trips() {
    let models = files(corpus(), "abc");
    assert!(models.len() >= 6);
    for f in models {
        let text = fs::read_to_string(&f).unwrap();
        let p = parse_program(&text).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let printed = p.to_string();
        let again = parse_program(&printed).unwrap_or_else(|e| panic!("{}: {e}\n{printed}", f.display()));
        assert_eq!(again, p, "{}", f.display());
        assert_eq!(again.to_string(), printed);
    }
}

#[test]
fn every_broadcast_term_corresponds_to_its_translation() {
    let terms = files(corpus().join("bpi"), "bpi");
    assert!(terms.len() >= 20);
    for f in terms {
        let text = fs::read_to_string(&f).unwrap();
        let p = parse_bpi(&text).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let r = correspondence_check(&p, 5, &StepOptions::default()).unwrap();
        assert!(r.holds(), "{}: {r:#?}", f.display());
    }
}
