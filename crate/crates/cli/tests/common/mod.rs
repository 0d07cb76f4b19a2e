//! Helpers shared by the CLI and acceptance test suites.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_storygraph")
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawning the storygraph binary")
}

pub fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn ingest_fixture(dir: &Path, extra: &[&str]) -> PathBuf {
    let archive = dir.join("graph.kg");
    let facts = fixtures_dir().join("facts.csv");
    let ontology = fixtures_dir().join("ontology.txt");
    let mut args = vec![
        "ingest",
        "--facts",
        facts.to_str().unwrap(),
        "--ontology",
        ontology.to_str().unwrap(),
        "--out",
        archive.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run_ok(&args);
    archive
}

/// Strict syntax check for the DOT subset the tool emits: a `digraph` with
/// node statements (`"id";`) and labeled edge statements
/// (`"a" -> "b" [key="value"];`). Independent of the writer.
pub fn check_dot(text: &str) -> Result<(), String> {
    let tokens = dot_tokens(text)?;
    let mut pos = 0usize;
    let expect = |want: &DotToken, pos: &mut usize| -> Result<(), String> {
        match tokens.get(*pos) {
            Some(t) if t == want => {
                *pos += 1;
                Ok(())
            }
            other => Err(format!("expected {want:?}, got {other:?}")),
        }
    };
    expect(&DotToken::Keyword("digraph".into()), &mut pos)?;
    if matches!(
        tokens.get(pos),
        Some(DotToken::Id(_) | DotToken::Keyword(_))
    ) {
        pos += 1; // optional graph name
    }
    expect(&DotToken::Symbol('{'), &mut pos)?;
    loop {
        match tokens.get(pos) {
            Some(DotToken::Symbol('}')) => {
                pos += 1;
                break;
            }
            Some(DotToken::Id(_) | DotToken::Keyword(_)) => {
                pos += 1;
                if matches!(tokens.get(pos), Some(DotToken::Arrow)) {
                    pos += 1;
                    match tokens.get(pos) {
                        Some(DotToken::Id(_) | DotToken::Keyword(_)) => pos += 1,
                        other => return Err(format!("edge target expected, got {other:?}")),
                    }
                    if matches!(tokens.get(pos), Some(DotToken::Symbol('['))) {
                        pos += 1;
                        loop {
                            match tokens.get(pos) {
                                Some(DotToken::Id(_) | DotToken::Keyword(_)) => pos += 1,
                                other => return Err(format!("attr key expected, got {other:?}")),
                            }
                            expect(&DotToken::Symbol('='), &mut pos)?;
                            match tokens.get(pos) {
                                Some(DotToken::Id(_) | DotToken::Keyword(_)) => pos += 1,
                                other => return Err(format!("attr value expected, got {other:?}")),
                            }
                            match tokens.get(pos) {
                                Some(DotToken::Symbol(',')) => pos += 1,
                                Some(DotToken::Symbol(']')) => {
                                    pos += 1;
                                    break;
                                }
                                other => return Err(format!("`,` or `]` expected, got {other:?}")),
                            }
                        }
                    }
                }
                expect(&DotToken::Symbol(';'), &mut pos)?;
            }
            other => return Err(format!("statement expected, got {other:?}")),
        }
    }
    if pos != tokens.len() {
        return Err(format!("trailing tokens after `}}`: {:?}", &tokens[pos..]));
    }
    Ok(())
}

#[derive(Debug, PartialEq)]
enum DotToken {
    Keyword(String),
    Id(String),
    Symbol(char),
    Arrow,
}

fn dot_tokens(text: &str) -> Result<Vec<DotToken>, String> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ws if ws.is_whitespace() => {
                chars.next();
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('\\') => match chars.next() {
                            Some(escaped) => s.push(escaped),
                            None => return Err("dangling escape".into()),
                        },
                        Some('"') => break,
                        Some(other) => s.push(other),
                        None => return Err("unterminated string".into()),
                    }
                }
                tokens.push(DotToken::Id(s));
            }
            '-' => {
                chars.next();
                match chars.next() {
                    Some('>') => tokens.push(DotToken::Arrow),
                    other => return Err(format!("expected `->`, got `-{other:?}`")),
                }
            }
            '{' | '}' | '[' | ']' | ';' | '=' | ',' => {
                chars.next();
                tokens.push(DotToken::Symbol(c));
            }
            a if a.is_ascii_alphanumeric() || a == '_' => {
                let mut word = String::new();
                while let Some(&k) = chars.peek() {
                    if k.is_ascii_alphanumeric() || k == '_' {
                        word.push(k);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(DotToken::Keyword(word));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(tokens)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Plain Lloyd's k-means on 2D points, best of `restarts` seeded inits.
/// Returns the assignment of each point.
pub fn kmeans_2d(points: &[[f64; 2]], k: usize, restarts: usize, seed: u64) -> Vec<usize> {
    let n = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts {
        let mut centroids: Vec<[f64; 2]> = (0..k).map(|_| points[rng.gen_range(0..n)]).collect();
        let mut assignment = vec![0usize; n];
        for _ in 0..100 {
            for (i, p) in points.iter().enumerate() {
                assignment[i] = (0..k)
                    .min_by(|&a, &b| {
                        dist2(p, &centroids[a])
                            .partial_cmp(&dist2(p, &centroids[b]))
                            .unwrap()
                    })
                    .unwrap();
            }
            for (c, centroid) in centroids.iter_mut().enumerate() {
                let members: Vec<&[f64; 2]> = points
                    .iter()
                    .zip(&assignment)
                    .filter(|(_, &a)| a == c)
                    .map(|(p, _)| p)
                    .collect();
                if !members.is_empty() {
                    *centroid = [
                        members.iter().map(|p| p[0]).sum::<f64>() / members.len() as f64,
                        members.iter().map(|p| p[1]).sum::<f64>() / members.len() as f64,
                    ];
                }
            }
        }
        let sse: f64 = points
            .iter()
            .zip(&assignment)
            .map(|(p, &a)| dist2(p, &centroids[a]))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| sse < *b) {
            best = Some((sse, assignment));
        }
    }
    best.unwrap().1
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}
