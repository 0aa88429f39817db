mod support;

use std::path::{Path, PathBuf};

use drlint::extract::SourceUnit;
use drlint::report::lint;
use drlint::rules::builtin_rules;

use support::{all_sources, golden_dir};

/// `clean/cartpole_dqn.py` -> `clean__cartpole_dqn`.
fn stem(src: &SourceUnit) -> String {
    src.path.trim_end_matches(".py").replace('/', "__")
}

fn check(path: PathBuf, actual: &str, failures: &mut Vec<String>) {
    if std::env::var_os("DRLINT_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    match std::fs::read_to_string(&path) {
        Ok(expected) if expected == actual => {}
        Ok(_) => failures.push(format!("{} differs", name(&path))),
        Err(_) => failures.push(format!("{} missing", name(&path))),
    }
}

fn name(p: &Path) -> String {
    p.file_name().unwrap().to_string_lossy().into_owned()
}

#[test]
fn reports_match_golden_files() {
    let rules = builtin_rules();
    let mut failures = Vec::new();
    for src in all_sources() {
        let report = lint(&src, &rules).unwrap();
        let base = golden_dir().join(stem(&src));
        check(
            base.with_extension("json"),
            &report.comparison_form(),
            &mut failures,
        );
        check(base.with_extension("txt"), &report.to_text(), &mut failures);
    }
    assert!(
        failures.is_empty(),
        "set DRLINT_BLESS=1 to regenerate: {failures:?}"
    );
}

#[test]
fn comparison_form_is_stable_across_runs() {
    let rules = builtin_rules();
    for src in all_sources() {
        let a = lint(&src, &rules).unwrap().comparison_form();
        let b = lint(&src, &rules).unwrap().comparison_form();
        assert_eq!(a, b, "{}", src.path);
    }
}
