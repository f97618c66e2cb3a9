use std::path::PathBuf;

use hicluster::bench::BenchSpec;

#[test]
fn shipped_specs_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances/specs");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&path).unwrap();
            BenchSpec::from_toml(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 5);
}
