use std::io::Write;
use std::process::{Command, Stdio};

use rlct::model::parse_point;
use rlct::parse;
use serde_json::Value;

fn rlct(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_rlct")).args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = vec!["--json"];
    a.extend_from_slice(args);
    let (c, out) = rlct(&a);
    (c, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{args:?}: {e}: {out}")))
}

fn parses(v: &Value) {
    let s = v.as_str().unwrap();
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"));
}

#[test]
fn exit_codes() {
    let cases: &[(&[&str], i32)] = &[
        (&["parse", "-e", "x[y"], 2),
        (&["parse", "-e", "\\x.x"], 0),
        (&["normalize", "-e", "D[; I!]"], 3),
        (&["normalize", "-e", "tau[D[D, D]]"], 0),
        (&["converges", "-e", "tau[I]"], 1),
        (&["converges", "-e", "tau[]"], 0),
        (&["converges", "-e", "I"], 3),
        (&["converges", "--fuel", "100", "-e", "tau[Omega]"], 4),
        (&["converges", "-e", "tau[x]"], 3),
        (&["member", "--term", "I", "--point", "[*]::*"], 0),
        (&["member", "--term", "I", "--point", "*"], 1),
        (&["member", "--term", "I", "--point", "[*"], 2),
        (&["member", "--term", "y", "--point", "*"], 3),
        (&["member", "--term", "D[; I!]", "--point", "[*]::*"], 3),
        (&["member", "--term", "D[; I!]", "--point", "[*]::*", "--full"], 0),
        (&["member", "--term", "Omega", "--point", "*", "--full", "--fuel", "20"], 4),
        (&["member", "--term", "D[; I!]", "--point", "[*]::*", "--full", "--via", "taylor"], 0),
        (&["member", "--term", "T", "--point", "[*]::[]::*", "--via", "direct"], 0),
        (&["testctx", "--point", "[*, *]::*"], 0),
        (&["testctx", "--point", "x=[*] |- *"], 0),
        (&["testctx", "--point", "[["], 2),
        (&["taylor", "--size-bound", "7", "-e", "\\x.x[; x!]"], 0),
        (&["expand", "--ell", "{1:2, default:0}", "-e", "tau[tbar(eps)]"], 0),
        (&["expand", "--ell", "{1:", "-e", "tau[]"], 2),
        (&["expand", "-e", "x[; y!]"], 3),
        (&["solvable", "-e", "\\x.x[x]"], 0),
        (&["solvable", "-e", "D[I]"], 1),
        (&["solvable", "-e", "tbar(eps)"], 3),
        (&["probe", "--left", "T", "--right", "F", "--max-rank", "2"], 0),
        (&["probe", "--left", "D[I]", "--right", "I", "--max-rank", "2", "--max-points", "50"], 1),
        (&["head", "--steps", "2", "-e", "tau[Omega]"], 0),
        (&["bogus"], 2),
    ];
    for (args, code) in cases {
        assert_eq!(rlct(args).0, *code, "{args:?}");
        let (c, v) = json(args);
        assert_eq!(c, *code, "--json {args:?}");
        assert_eq!(v.get("error").is_some(), *code >= 2 && *code != 4, "--json {args:?}: {v}");
    }
}

#[test]
fn json_fields_parse_back() {
    let (_, v) = json(&["parse", "-e", "x[y, x; (\\z.z + w)!] + I"]);
    parses(&v["text"]);
    v["summands"].as_array().unwrap().iter().for_each(parses);
    let (_, v) = json(&["normalize", "-e", "D[I, F] + tau[I[tbar(eps)]]"]);
    assert!(v.get("error").is_some());
    let (_, v) = json(&["normalize", "-e", "D[I, F] + T[x][y]"]);
    parses(&v["normal_form"]);
    let (_, v) = json(&["head", "--steps", "3", "-e", "tau[D[I, T[tbar(eps)]]]"]);
    parses(&v["result"]);
    v["trace"].as_array().unwrap().iter().for_each(parses);
    let (_, v) = json(&["testctx", "--point", "[*, [*]::*]::[*]::*"]);
    parses(&v["plus"]);
    parses(&v["minus"]);
    let (_, v) = json(&["testctx", "--point", "x=[*]; y=[] |- [*]::*"]);
    parses(&v["context"]);
    parse_point(v["point"].as_str().unwrap()).unwrap();
    let (_, v) = json(&["taylor", "--size-bound", "8", "-e", "x[; (y[; z!])!]"]);
    v["elements"].as_array().unwrap().iter().for_each(parses);
    let (_, v) = json(&["expand", "--ell", "{default:1}", "-e", "tau[tbar(tau[x]), y]"]);
    parses(&v["expansion"]);
    let (_, v) = json(&["probe", "--left", "T", "--right", "F", "--max-rank", "2"]);
    parse_point(v["point"].as_str().unwrap()).unwrap();
    let (_, v) = json(&["member", "--term", "x", "--point", "x=[*] |- *"]);
    assert_eq!(v["member"], Value::Bool(true));
    parse_point(v["point"].as_str().unwrap()).unwrap();
}

#[test]
fn input_from_file_and_stdin() {
    let dir = std::env::temp_dir().join(format!("rlct-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("t.rl");
    std::fs::write(&f, "D[I, F]\n").unwrap();
    assert_eq!(rlct(&["normalize", f.to_str().unwrap()]), (0, "F\n".into()));
    let mut child = Command::new(env!("CARGO_BIN_EXE_rlct"))
        .arg("normalize")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"tau[D[D, D]]").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "0\n");
    assert_eq!(rlct(&["normalize", dir.join("missing").to_str().unwrap()]).0, 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seeded_normalization_matches() {
    let plain = rlct(&["normalize", "-e", "D[I, F] + (\\x.x[x, x])[I, I, I]"]);
    for seed in ["1", "2", "99"] {
        let o = Command::new(env!("CARGO_BIN_EXE_rlct"))
            .args(["normalize", "-e", "D[I, F] + (\\x.x[x, x])[I, I, I]"])
            .env("RLCT_SEED", seed)
            .output()
            .unwrap();
        assert_eq!(String::from_utf8(o.stdout).unwrap(), plain.1);
    }
}
