use bopco_bench::{fuzz_campaign, fuzz_model};

#[test]
fn fuzzed_models_are_deterministic() {
    for seed in 0..50 {
        let a = format!("{:?}", fuzz_model(seed).templates);
        let b = format!("{:?}", fuzz_model(seed).templates);
        assert_eq!(a, b);
    }
}

#[test]
fn audited_loops_on_fuzzed_models() {
    let s = fuzz_campaign(60, 6);
    assert!(s.violations.is_empty(), "{:#?}", s.violations);
    assert!(s.iterations >= 60);
}
