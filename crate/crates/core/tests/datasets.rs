mod common;

use std::collections::BTreeSet;

use common::vendored_suite;

fn shape(name: &str) -> Option<(usize, usize, usize)> {
    let (present, _) = vendored_suite();
    present.into_iter().find(|d| d.name == name).map(|d| {
        let labels: BTreeSet<usize> = d.data.labels().unwrap().iter().copied().collect();
        assert_eq!(labels.len(), d.k, "{name}: manifest k_star disagrees with the label column");
        (d.data.n_samples(), d.data.n_attributes(), labels.len())
    })
}

#[test]
fn zoo_shape() {
    assert_eq!(shape("zoo"), Some((101, 16, 7)));
}

#[test]
fn lenses_shape() {
    assert_eq!(shape("lenses"), Some((24, 4, 3)));
}

#[test]
fn hayes_roth_shape() {
    assert_eq!(shape("hayes-roth"), Some((132, 4, 3)));
}

// The next two files come from scripts/fetch_datasets.sh and may be absent.
#[test]
fn soybean_small_shape_when_fetched() {
    match shape("soybean-small") {
        Some(s) => assert_eq!(s, (47, 35, 4)),
        None => eprintln!("soybean-small.csv not present; skipped"),
    }
}

#[test]
fn caesarian_shape_when_fetched() {
    match shape("caesarian") {
        Some(s) => assert_eq!(s, (80, 4, 2)),
        None => eprintln!("caesarian.csv not present; skipped"),
    }
}
