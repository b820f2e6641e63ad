//! Runs every acceptance criterion and prints one line per criterion.

#[test]
fn acceptance_criteria() {
    let results = frakolm::acceptance::run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
