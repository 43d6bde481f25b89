//! The machine files under `machines/` are the text form of the built-in
//! machines. Set `CIRLAB_WRITE_MACHINES=1` to regenerate them.

use std::path::PathBuf;

use cirlab::tm::machines;
use cirlab::tm::parse_machine;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("machines")
}

#[test]
fn shipped_files_match_builders() {
    let regenerate = std::env::var_os("CIRLAB_WRITE_MACHINES").is_some();
    for spec in machines::all() {
        let path = dir().join(format!("{}.tm", spec.name()));
        if regenerate {
            std::fs::write(&path, spec.to_string()).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let parsed = parse_machine(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parsed.to_string(), spec.to_string(), "{}", path.display());
    }
}

#[test]
fn text_form_roundtrips() {
    for spec in machines::all() {
        let again = parse_machine(&spec.to_string()).unwrap();
        assert_eq!(again.to_string(), spec.to_string());
    }
}
