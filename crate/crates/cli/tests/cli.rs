use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use monostereo::imgio::{read_image, write_image, write_pfm, DisparityMap, Image};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_monostereo"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scene(dir: &Path, name: &str, k: f32) -> (PathBuf, PathBuf) {
    let (w, h) = (96, 48);
    let img = Image::from_fn(w, h, |x, y| {
        let t = x as f32 * k + y as f32 * 0.13;
        [
            0.5 + 0.4 * t.sin(),
            0.5 + 0.4 * (0.7 * t).cos(),
            ((x / 6 + y / 6) % 2) as f32 * 0.6 + 0.2,
        ]
    });
    let depth = DisparityMap::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f32 - 40.0, y as f32 - 24.0);
        if dx * dx + dy * dy < 144.0 {
            1.0
        } else {
            2.0 + y as f32 / 24.0
        }
    })
    .unwrap();
    let (ip, dp) = (
        dir.join(format!("{name}.png")),
        dir.join(format!("{name}.pfm")),
    );
    write_image(&img, &ip).unwrap();
    write_pfm(&depth, &dp).unwrap();
    (ip, dp)
}

fn manifest(dir: &Path, n: usize) -> PathBuf {
    let mut text = String::from("left\tdepth\tsplit\n");
    for i in 0..n {
        let (ip, dp) = scene(dir, &format!("s{i}"), 0.2 + 0.05 * i as f32);
        text += &format!(
            "{}\t{}\ttrain\n",
            ip.file_name().unwrap().to_str().unwrap(),
            dp.file_name().unwrap().to_str().unwrap()
        );
    }
    let p = dir.join("m.tsv");
    fs::write(&p, text).unwrap();
    p
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if !p.ends_with("ledger.json") && !p.ends_with("config.toml") {
                out.push((
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("small.toml");
    fs::write(
        &p,
        "d_min = 2.0\nd_max = 8.0\ncrop_width = 64\ncrop_height = 32\nseed = 3\n",
    )
    .unwrap();
    p
}

#[test]
fn generate_writes_a_deterministic_tree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    manifest(d, 4);
    small_config(d);
    let a = run(
        &[
            "generate",
            "--manifest",
            "m.tsv",
            "--out",
            "a",
            "--config",
            "small.toml",
            "--seed",
            "7",
            "--workers",
            "1",
        ],
        d,
    );
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(
        &[
            "generate",
            "--manifest",
            "m.tsv",
            "--out",
            "b",
            "--config",
            "small.toml",
            "--seed",
            "7",
            "--workers",
            "8",
        ],
        d,
    );
    assert!(b.status.success());
    assert!(stdout(&a).contains("4 ok, 0 failed"));
    for sub in [
        "left/0.png",
        "right/3.png",
        "disp/2.pfm",
        "meta/1.json",
        "ledger.json",
        "config.json",
        "config.toml",
    ] {
        assert!(d.join("a").join(sub).is_file(), "{sub}");
    }
    assert_eq!(tree(&d.join("a")), tree(&d.join("b")));
    assert_eq!(read_image(d.join("a/left/0.png")).unwrap().dims(), (64, 32));

    // flags beat the config file, and the echo records the result
    let echo = fs::read_to_string(d.join("a/config.toml")).unwrap();
    assert!(echo.contains("seed = 7"), "{echo}");
    assert!(echo.contains("d_max = 8.0"));
    assert!(stdout(&a).contains("generator = \"mono\""));

    // the echoed settings reproduce the run on their own
    let c = run(
        &[
            "generate",
            "--manifest",
            "m.tsv",
            "--out",
            "c",
            "--config",
            "a/config.toml",
        ],
        d,
    );
    assert!(c.status.success());
    assert_eq!(tree(&d.join("a")), tree(&d.join("c")));
}

#[test]
fn every_generator_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    manifest(d, 3);
    small_config(d);
    fs::write(d.join("gen.toml"), "d_min = 2.0\nd_max = 8.0\ncrop_width = 64\ncrop_height = 32\naffine_d_max = 30.0\nshapes_base_d_max = 20.0\n").unwrap();
    for g in ["mono", "affine", "shapes", "superpixels", "svsm"] {
        let o = run(
            &[
                "generate",
                "--manifest",
                "m.tsv",
                "--out",
                g,
                "--generator",
                g,
                "--config",
                "gen.toml",
            ],
            d,
        );
        assert!(
            o.status.success(),
            "{g}: {}{}",
            stdout(&o),
            String::from_utf8_lossy(&o.stderr)
        );
        let meta = fs::read_to_string(d.join(g).join("meta/0.json")).unwrap();
        assert!(meta.contains(&format!("\"generator\": \"{g}\"")), "{meta}");
    }
}

#[test]
fn unknown_generator_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    manifest(dir.path(), 1);
    let o = run(
        &[
            "generate",
            "--manifest",
            "m.tsv",
            "--out",
            "x",
            "--generator",
            "stereo",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("Usage") && err.contains("mono, affine"),
        "{err}"
    );
}

#[test]
fn bad_manifest_and_config_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("empty.tsv"), "").unwrap();
    let o = run(&["generate", "--manifest", "empty.tsv", "--out", "x"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no rows"));
    manifest(d, 1);
    fs::write(d.join("bad.toml"), "sobel = 3\n").unwrap();
    let o = run(
        &[
            "generate",
            "--manifest",
            "m.tsv",
            "--out",
            "x",
            "--config",
            "bad.toml",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn row_failures_exit_two_unless_tolerated() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    manifest(d, 3);
    small_config(d);
    // a truncated PNG still passes the header probe but fails to decode
    let bytes = fs::read(d.join("s1.png")).unwrap();
    fs::write(d.join("s1.png"), &bytes[..bytes.len() / 2]).unwrap();
    let o = run(
        &[
            "generate",
            "--manifest",
            "m.tsv",
            "--out",
            "o",
            "--config",
            "small.toml",
        ],
        d,
    );
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("2 ok, 1 failed"));
    let o = run(
        &[
            "generate",
            "--manifest",
            "m.tsv",
            "--out",
            "o2",
            "--config",
            "small.toml",
            "--max-failures",
            "1",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn eval_reports_tables_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for sub in ["pred", "gt", "noc"] {
        fs::create_dir(d.join(sub)).unwrap();
    }
    let gt = DisparityMap::from_fn(10, 5, |x, _| x as f32).unwrap();
    write_pfm(&gt, d.join("gt/a.pfm")).unwrap();
    write_pfm(&gt, d.join("pred/a.pfm")).unwrap();
    let o = run(
        &[
            "eval", "--pred", "pred", "--gt", "gt", "--tau", "3", "--tau", "1", "--json", "r.json",
        ],
        d,
    );
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains(">3px") && out.contains(">1px"), "{out}");
    let mean = out.lines().find(|l| l.starts_with("mean")).unwrap();
    assert!(mean.contains("0.000"), "{mean}");
    assert!(fs::read_to_string(d.join("r.json"))
        .unwrap()
        .contains("\"epe\": 0.0"));

    let mask = Image::from_fn(10, 5, |x, _| if x < 5 { [1.0; 3] } else { [0.0; 3] });
    write_image(&mask, d.join("noc/a.png")).unwrap();
    let o = run(
        &[
            "eval", "--pred", "pred", "--gt", "gt", "--noc", "noc", "--json", "n.json",
        ],
        d,
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains(" 25"), "{}", stdout(&o));
    assert!(fs::read_to_string(d.join("n.json"))
        .unwrap()
        .contains("\"noc\""));

    let o = run(&["eval", "--pred", "noc", "--gt", "gt"], d);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn inspect_renders_panels_and_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    scene(d, "v", 0.3);
    let o = run(
        &[
            "inspect", "--image", "v.png", "--depth", "v.pfm", "--out", "p.png", "--scale", "10",
        ],
        d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        read_image(d.join("p.png")).unwrap().dims(),
        (4 * 96 + 12, 48)
    );

    let o = run(
        &[
            "inspect",
            "--image",
            "v.png",
            "--depth",
            "v.pfm",
            "--out",
            "q.png",
            "--no-sharpen",
            "--sweep-s",
            "20,50,75,100,125,150",
        ],
        d,
    );
    assert!(o.status.success());
    assert_eq!(
        read_image(d.join("q.png")).unwrap().dims(),
        (4 * 96 + 12, 2 * 48 + 4)
    );
    assert_eq!(
        read_image(d.join("q_sweep.png")).unwrap().dims(),
        (3 * 96 + 8, 2 * 48 + 4)
    );
    assert_eq!(stdout(&o).matches("holes").count(), 6);

    let o = run(
        &["inspect", "--image", "missing.png", "--depth", "v.pfm"],
        d,
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_lists_flags_with_defaults() {
    let o = bin().args(["generate", "--help"]).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    for flag in [
        "--manifest",
        "--generator",
        "--seed",
        "--workers",
        "--config",
        "--d-max",
        "--no-sharpen",
        "--max-failures",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
    assert!(text.contains("[default: 225]") && text.contains("[default: 0]"));
}
