//! Benchmark support: synthetic projects with a controllable mix of
//! test and production files. Shared between the benches and anyone who
//! wants a quick corpus to poke at.

use std::fs;
use std::path::Path;

/// A Java test file with `assertions` assertion sites.
pub fn java_test_source(class: &str, assertions: usize) -> String {
    let mut out = String::new();
    out.push_str("import org.junit.Test;\n");
    out.push_str("import static org.junit.Assert.*;\n\n");
    out.push_str(&format!("public class {class} {{\n"));
    for i in 0..assertions {
        out.push_str("\t@Test\n");
        out.push_str(&format!("\tpublic void case{i}() {{\n"));
        out.push_str(&format!(
            "\t\tassertEquals({i}, compute({i}), \"case {i} result\");\n"
        ));
        out.push_str("\t}\n\n");
    }
    out.push_str("\tprivate int compute(int x) { return x; }\n");
    out.push_str("}\n");
    out
}

/// A production Java class with a few methods, `lines` lines long-ish.
pub fn java_production_source(class: &str, lines: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!("public class {class} {{\n"));
    for i in 0..lines.max(1) {
        out.push_str(&format!("\tpublic int method{i}(int x) {{ return x + {i}; }}\n"));
    }
    out.push_str("}\n");
    out
}

/// Write a project with `tests` test classes and `production` production
/// classes under `root/<id>`.
pub fn write_project(root: &Path, id: &str, tests: usize, production: usize) {
    let base = root.join(id);
    for i in 0..production {
        let path = base.join(format!("src/Prod{i}.java"));
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, java_production_source(&format!("Prod{i}"), 12)).unwrap();
    }
    for i in 0..tests {
        let path = base.join(format!("test/Prod{i}Check.java"));
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        let mut source = java_test_source(&format!("Prod{i}Check"), 4);
        source = source.replace("compute(", &format!("Prod{i}.compute("));
        fs::write(&path, source).unwrap();
    }
}
