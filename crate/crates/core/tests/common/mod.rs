#![allow(dead_code)]

use std::path::PathBuf;

use causeplan::{parse_model, BindingDoc, Catalog, CausalModel, ObjectSpec};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn catalog() -> Catalog {
    Catalog::load_dir(fixtures().join("catalog")).unwrap()
}

pub fn model(name: &str) -> CausalModel {
    let text = std::fs::read_to_string(fixtures().join("models").join(name)).unwrap();
    parse_model(&text).unwrap()
}

pub fn binding(name: &str) -> BindingDoc {
    let text = std::fs::read_to_string(fixtures().join("bindings").join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn toy(name: &str) -> ObjectSpec {
    let text = std::fs::read_to_string(fixtures().join("toy").join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}
