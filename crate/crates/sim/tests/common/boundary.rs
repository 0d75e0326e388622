//! Structural check that the trajectory engine cannot reach agent
//! identities, health states or the ground-truth contact log.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

/// Crates the engine may depend on, directly or through a dev build.
const ENGINE_DEPS: &[&str] = &[
    "sapsr-device",
    "rand",
    "rand_distr",
    "serde",
    "thiserror",
    "proptest",
];

/// Workspace crates that hold ground truth.
const GROUND_TRUTH: &[&str] = &["sapsr-core", "sapsr-sim"];

/// Identifiers that only make sense with access to ground truth.
const FORBIDDEN: &[&str] = &[
    "sapsr_core",
    "sapsr_sim",
    "AgentId",
    "HealthState",
    "Individual",
    "PopulationLedger",
    "ContactGraph",
    "Contact",
    "contagion_step",
    "owner_of",
    "device_of",
];

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn manifest_deps(crate_dir: &Path) -> BTreeSet<String> {
    let text = fs::read_to_string(crate_dir.join("Cargo.toml")).expect("manifest readable");
    let doc: toml::Table = toml::from_str(&text).expect("manifest parses");
    let mut deps = BTreeSet::new();
    for section in ["dependencies", "dev-dependencies", "build-dependencies"] {
        if let Some(t) = doc.get(section).and_then(|v| v.as_table()) {
            deps.extend(t.keys().cloned());
        }
    }
    if let Some(targets) = doc.get("target").and_then(|v| v.as_table()) {
        for platform in targets.values() {
            for section in ["dependencies", "dev-dependencies", "build-dependencies"] {
                if let Some(t) = platform.get(section).and_then(|v| v.as_table()) {
                    deps.extend(t.keys().cloned());
                }
            }
        }
    }
    deps
}

/// Every package reachable from `root` in the lock file.
fn locked_closure(root: &Path, package: &str) -> BTreeSet<String> {
    let text = fs::read_to_string(root.join("Cargo.lock")).expect("lock file readable");
    let doc: toml::Table = toml::from_str(&text).expect("lock file parses");
    let mut graph: HashMap<String, Vec<String>> = HashMap::new();
    for p in doc["package"].as_array().expect("package list") {
        let name = p["name"].as_str().unwrap().to_string();
        let deps = p
            .get("dependencies")
            .and_then(|d| d.as_array())
            .map(|d| {
                d.iter()
                    .map(|s| s.as_str().unwrap().split(' ').next().unwrap().to_string())
                    .collect()
            })
            .unwrap_or_default();
        graph.entry(name).or_default().extend::<Vec<String>>(deps);
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![package.to_string()];
    while let Some(p) = stack.pop() {
        if seen.insert(p.clone()) {
            stack.extend(graph.get(&p).cloned().unwrap_or_default());
        }
    }
    seen.remove(package);
    seen
}

fn rust_files(dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in fs::read_dir(dir).expect("source dir readable") {
        let path = entry.unwrap().path();
        if path.is_dir() {
            rust_files(&path, out);
        } else if path.extension().is_some_and(|e| e == "rs") {
            out.push(path);
        }
    }
}

/// Forbidden identifiers in the code (not the comments) of every `.rs`
/// file under `dir`.
pub fn forbidden_identifiers(dir: &Path) -> Vec<String> {
    let mut files = Vec::new();
    rust_files(dir, &mut files);
    let mut hits = Vec::new();
    for file in files {
        let text = fs::read_to_string(&file).unwrap();
        for (no, line) in text.lines().enumerate() {
            let code = line.split("//").next().unwrap_or("");
            for word in code.split(|c: char| !(c.is_alphanumeric() || c == '_')) {
                if FORBIDDEN.contains(&word) {
                    hits.push(format!("{}:{}: {word}", file.display(), no + 1));
                }
            }
        }
    }
    hits
}

/// Returns every violation found; empty means the boundary holds.
pub fn violations() -> Vec<String> {
    let root = workspace_root();
    let engine = root.join("crates/ppto");
    let device = root.join("crates/device");
    let mut bad = Vec::new();

    for dep in manifest_deps(&engine) {
        if !ENGINE_DEPS.contains(&dep.as_str()) {
            bad.push(format!("engine manifest declares {dep}"));
        }
    }
    for dep in manifest_deps(&device) {
        if GROUND_TRUTH.contains(&dep.as_str()) || dep == "sapsr-ppto" {
            bad.push(format!("device manifest declares {dep}"));
        }
    }
    for package in ["sapsr-ppto", "sapsr-device"] {
        for dep in locked_closure(&root, package) {
            if GROUND_TRUTH.contains(&dep.as_str()) {
                bad.push(format!("{package} reaches {dep} through the lock file"));
            }
        }
    }
    for dir in [engine.join("src"), engine.join("tests"), device.join("src")] {
        if dir.exists() {
            bad.extend(forbidden_identifiers(&dir));
        }
    }
    bad
}
