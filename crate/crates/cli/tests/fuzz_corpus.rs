//! Replays the checked-in fuzz seeds so the invariants the fuzz targets
//! assert are exercised on every test run.

use std::fs;
use std::path::PathBuf;

use satmodel::model::{Constant, RotationNumber};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.display().to_string(), fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (name, text) in seeds("parse_config") {
        match satmodel_cli::parse_config(&text) {
            Ok(config) => {
                accepted += 1;
                assert!(config.model.constant().exceeds_one(), "{name}");
                assert!(config.model.rotations(config.horizon + 1).is_ok(), "{name}");
            }
            Err(e) => assert!(!e.0.is_empty(), "{name}"),
        }
    }
    assert_eq!(accepted, 5);
}

#[test]
fn constant_seeds_round_trip() {
    for (name, text) in seeds("parse_constant") {
        if let Ok(c) = text.parse::<Constant>() {
            assert_eq!(c.to_string().parse::<Constant>().unwrap(), c, "{name}");
        }
    }
}

#[test]
fn rotation_seeds_round_trip() {
    let mut accepted = 0;
    for (name, text) in seeds("parse_rotation") {
        if let Ok(r) = text.parse::<RotationNumber>() {
            accepted += 1;
            assert_eq!(r.to_string().parse::<RotationNumber>().unwrap(), r, "{name}");
        }
    }
    assert_eq!(accepted, 3);
}
