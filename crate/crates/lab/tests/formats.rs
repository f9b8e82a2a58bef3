use proptest::prelude::*;
use repat_core::pattern::{build_stages, reference_schedule, reference_start};
use repat_core::{BuildOptions, HierarchicalWord, MapFamily};
use repat_lab::config::{Config, Overrides};
use repat_lab::grammar;
use repat_lab::stagefile::StageFile;

const REFERENCE: &str = include_str!("../configs/reference.toml");

fn word_strategy() -> impl Strategy<Value = HierarchicalWord> {
    let leaf = "[1-3]{1,4}".prop_map(|s| HierarchicalWord::parse_literal(&s).unwrap());
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), 1u64..4).prop_map(|(w, k)| HierarchicalWord::power(w, k).unwrap()),
            prop::collection::vec(inner, 1..4).prop_map(|c| HierarchicalWord::concat(c).unwrap()),
        ]
    })
}

proptest! {
    #[test]
    fn grammar_round_trips(w in word_strategy()) {
        let text = grammar::format(&w);
        let back = grammar::parse(&text).unwrap();
        prop_assert_eq!(grammar::format(&back), text);
        prop_assert!(back.same_symbols(&w));
        prop_assert_eq!(back.len(), w.len());
    }
}

#[test]
fn grammar_examples() {
    let w = grammar::parse("CONCAT(POWER(LITERAL:\"12\",3), LITERAL:\"1\")").unwrap();
    assert_eq!(w.len(), 7);
    assert_eq!(w.expand(100).unwrap().iter().map(|s| s.get()).collect::<Vec<_>>(), vec![1, 2, 1, 2, 1, 2, 1]);
    assert_eq!(grammar::format(&w), "CONCAT(POWER(LITERAL:\"12\",3),LITERAL:\"1\")");
    for bad in ["", "LITERAL:\"0\"", "POWER(LITERAL:\"1\",0)", "POWER(LITERAL:\"1\")", "CONCAT()", "LITERAL:\"1\" x"] {
        assert!(grammar::parse(bad).is_err(), "{bad}");
    }
}

#[test]
fn reference_config_parses() {
    let cfg = Config::from_toml(REFERENCE).unwrap();
    assert_eq!(cfg.stage_count(), 13);
    assert_eq!(cfg.family().unwrap(), MapFamily::reference());
    let (omega0, j0) = cfg.start().unwrap();
    let (w, j) = reference_start();
    assert_eq!(omega0, w);
    assert_eq!(j0, j);
    assert_eq!(cfg.schedule().unwrap(), reference_schedule(13));
    assert_eq!(cfg.build_options(), BuildOptions::default());
}

#[test]
fn overrides_truncate_the_schedule() {
    let mut cfg = Config::from_toml(REFERENCE).unwrap();
    cfg.apply(&Overrides { seed: Some(9), max_stage: Some(4), out: None });
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.stage_count(), 4);
}

#[test]
fn config_rejects_bad_documents() {
    let wrong_schema = REFERENCE.replace("repat-config/1", "repat-config/0");
    assert!(Config::from_toml(&wrong_schema).is_err());
    let float_not_text = REFERENCE.replace("theta = \"0.5\"", "theta = 0.5");
    assert!(Config::from_toml(&float_not_text).is_err());
    let mismatch = REFERENCE.replace("alphabet = 2", "alphabet = 3");
    assert!(Config::from_toml(&mismatch).is_err());
    let both = REFERENCE.replace("search = \"exhaustive\"", "search = \"exhaustive\"\nalpha = \"1\"");
    assert!(Config::from_toml(&both).is_err());
    let unknown = REFERENCE.replace("seed = 0", "seed = 0\ncolour = \"red\"");
    assert!(Config::from_toml(&unknown).is_err());
}

#[test]
fn stage_file_round_trips_bit_for_bit() {
    let fam = MapFamily::reference();
    let (w, j) = reference_start();
    let st = build_stages(&fam, &w, j, &reference_schedule(6), &BuildOptions::default()).unwrap();
    let file = StageFile::new(&fam, &st, None);
    let text = file.to_json().unwrap();
    let back = StageFile::from_json(&text).unwrap().stages_for(&fam).unwrap();
    assert_eq!(back.len(), st.len());
    for (a, b) in st.iter().zip(&back) {
        assert!(a.xi.same_symbols(&b.xi));
        assert_eq!(a.q.value().to_bits(), b.q.value().to_bits());
        assert_eq!(a.j, b.j);
        assert_eq!(a.log_c.to_bits(), b.log_c.to_bits());
        assert_eq!(a.rho_exact, b.rho_exact);
        assert_eq!(a.alpha, b.alpha);
    }
    assert_eq!(StageFile::new(&fam, &back, None).to_json().unwrap(), text);
    // a different family is refused
    assert!(StageFile::from_json(&text).unwrap().stages_for(&MapFamily::identity(2)).is_err());
}
