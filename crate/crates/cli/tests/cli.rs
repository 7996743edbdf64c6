use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use keytrack::io::{save_volume_pngs, write_annotation_file, LabeledPolygon};
use keytrack::phantom::square_slice;
use keytrack::{GraySlice, Volume};

fn keytrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keytrack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn phantom(dir: &Path, slices: &str) {
    let o = keytrack(&[
        "phantom",
        "--out",
        p(dir),
        "--slices",
        slices,
        "--drift-x",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

fn write_volume(dir: &Path, frames: Vec<GraySlice<f64>>) {
    fs::create_dir_all(dir).unwrap();
    save_volume_pngs(&Volume::new(frames).unwrap(), dir).unwrap();
}

#[test]
fn detect_on_constant_volume_fails() {
    let tmp = tempfile::tempdir().unwrap();
    write_volume(tmp.path(), vec![GraySlice::filled(32, 32, 0.5); 3]);
    let o = keytrack(&["detect", "--volume", p(tmp.path()), "--roi", "0,0,32,32"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));
}

#[test]
fn detect_finds_square_corners() {
    let tmp = tempfile::tempdir().unwrap();
    write_volume(tmp.path(), vec![square_slice(64, 64, 20, 20, 24); 3]);
    let o = keytrack(&[
        "detect",
        "--volume",
        p(tmp.path()),
        "--roi",
        "7,7,48,48",
        "--slice",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows.len() >= 3, "{text}");
    assert!(rows.iter().all(|r| r.starts_with("1,")));
}

#[test]
fn missing_volume_directory_fails() {
    let o = keytrack(&[
        "detect",
        "--volume",
        "/nonexistent/volume",
        "--roi",
        "0,0,8,8",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn track_then_evaluate_and_reconstruct() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    phantom(&data, "8");
    let o = keytrack(&[
        "track",
        "--volume",
        p(&data),
        "--seeds",
        p(&data.join("seeds.txt")),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_dir(out.join("masks")).unwrap().count(), 8);

    let o = keytrack(&[
        "evaluate",
        "--result",
        p(&out),
        "--annotations",
        p(&data.join("annotations")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("mean 1.0000"), "{}", stdout(&o));

    let vox = tmp.path().join("vox");
    let o = keytrack(&[
        "reconstruct",
        "--result",
        p(&out),
        "--slice-spacing",
        "3",
        "--out",
        p(&vox),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let header: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(vox.join("voxels.json")).unwrap()).unwrap();
    assert_eq!(header["spacing_mm"][2], 3.0);
}

#[test]
fn automatic_seeding_tracks() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    phantom(&data, "6");
    let o = keytrack(&[
        "track",
        "--volume",
        p(&data),
        "--roi",
        "24,24,80,80",
        "--out",
        p(&tmp.path().join("out")),
        "--annotations",
        p(&data.join("annotations")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("start 3"), "{}", stdout(&o));
}

#[test]
fn two_point_seed_file_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    phantom(&data, "4");
    let seeds = tmp.path().join("two.txt");
    fs::write(&seeds, "slice 1\n60 60\n70 70\n").unwrap();
    let o = keytrack(&[
        "track",
        "--volume",
        p(&data),
        "--seeds",
        p(&seeds),
        "--out",
        p(&tmp.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    phantom(&data, "4");
    // a regular file where the output directory should go
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let o = keytrack(&[
        "track",
        "--volume",
        p(&data),
        "--seeds",
        p(&data.join("seeds.txt")),
        "--out",
        p(&blocker.join("out")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

fn square_annotation(dir: &Path, slice: &str, x0: f64) {
    write_annotation_file(
        &dir.join(slice.replace(".png", ".json")),
        slice,
        128,
        128,
        &[LabeledPolygon {
            label: "ring".into(),
            vertices: vec![(x0, 40.0), (x0 + 40.0, 40.0), (x0 + 40.0, 80.0), (x0, 80.0)],
        }],
    )
    .unwrap();
}

#[test]
fn evaluate_scores_half_overlap_and_rejects_label_miss() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    phantom(&data, "4");
    let o = keytrack(&[
        "track",
        "--volume",
        p(&data),
        "--seeds",
        p(&data.join("seeds.txt")),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    // predict the same square on every slice; slice 0's annotation matches
    // it and slice 1's is shifted by half its side
    let mask = keytrack::SliceMask::from_fn(128, 128, |x, y| {
        (40..80).contains(&x) && (40..80).contains(&y)
    });
    for i in 0..4 {
        keytrack::io::save_mask(
            &mask,
            &out.join("masks").join(keytrack::io::mask_file_name(i)),
        )
        .unwrap();
    }
    let ann = tmp.path().join("ann");
    fs::create_dir_all(&ann).unwrap();
    square_annotation(&ann, "slice_000.png", 40.0);
    square_annotation(&ann, "slice_001.png", 60.0);

    let o = keytrack(&["evaluate", "--result", p(&out), "--annotations", p(&ann)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("0,1.000000"), "{text}");
    assert!(text.contains("1,0.500000"), "{text}");
    assert!(text.contains("mean 0.7500"), "{text}");

    let o = keytrack(&[
        "evaluate",
        "--result",
        p(&out),
        "--annotations",
        p(&ann),
        "--label",
        "liver",
    ]);
    assert_eq!(o.status.code(), Some(1));
}
