//! Shared fixtures and independent oracles for the CLI test suites.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use castkit_core::synthetic::{self, CubeScene};
use castkit_core::{CameraParams, ImagePlane};

pub struct CmdOut {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_castkit_in(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> CmdOut {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_castkit"));
    cmd.args(args);
    cmd.current_dir(dir);
    cmd.env_remove("CASTKIT_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("castkit should spawn");
    CmdOut {
        status: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn run_castkit(args: &[&str], envs: &[(&str, &str)]) -> CmdOut {
    run_castkit_in(Path::new("."), args, envs)
}

/// Noise texture scaled into [0, 0.6] so a 1.0-valued block edit clears
/// the 0.1 difference threshold at every pixel.
pub fn textured_base(width: usize, height: usize, seed: u64) -> ImagePlane {
    let noise = synthetic::uniform_noise_image(width, height, 1, seed);
    ImagePlane::from_fn(width, height, 1, |x, y, _| 0.6 * noise.get(x, y, 0))
}

/// Removes every `timing`/`timings` field recursively, the documented
/// nondeterministic carve-out, and returns the canonical JSON string.
pub fn canonical_without_timing(raw: &str) -> String {
    let mut value: serde_json::Value = serde_json::from_str(raw).expect("manifest parses");
    strip_timing(&mut value);
    serde_json::to_string_pretty(&value).expect("canonical form serializes")
}

fn strip_timing(value: &mut serde_json::Value) {
    if let serde_json::Value::Object(map) = value {
        map.remove("timing");
        map.remove("timings");
        for (_, v) in map.iter_mut() {
            strip_timing(v);
        }
    } else if let serde_json::Value::Array(items) = value {
        for v in items {
            strip_timing(v);
        }
    }
}

/// One synthetic capture: shaded ray-cast views of the cube scene from an
/// orbital camera arc, plus the matching point maps and camera file.
pub struct SceneFixture {
    pub root: PathBuf,
    pub originals_dir: PathBuf,
    pub pointmaps_dir: PathBuf,
    pub rendered_dir: PathBuf,
    pub edited_dir: PathBuf,
    pub cameras_path: PathBuf,
    pub edited_first: PathBuf,
    pub frames: usize,
    pub cameras: Vec<CameraParams>,
    pub scene: CubeScene,
}

/// Depth-shaded view with a fixed per-frame texture so the frames carry
/// matchable detail.
fn shaded_view(scene: &CubeScene, cam: &CameraParams, seed: u64) -> ImagePlane {
    let pm = scene.raycast_pointmap(cam);
    let noise = synthetic::uniform_noise_image(cam.width, cam.height, 1, seed);
    let center = cam.center();
    ImagePlane::from_fn(cam.width, cam.height, 1, |x, y, _| {
        let p = pm.point(x, y).expect("fixture maps are dense");
        let d = ((p[0] - center[0]).powi(2)
            + (p[1] - center[1]).powi(2)
            + (p[2] - center[2]).powi(2))
        .sqrt();
        // Cube sits near the orbit radius; the backdrop is far.
        let shade = if d < 20.0 { 0.45 } else { 0.15 };
        (shade + 0.35 * noise.get(x, y, 0)) as f32
    })
}

pub fn build_scene_fixture(
    root: &Path,
    frames: usize,
    width: usize,
    height: usize,
    focal: f64,
) -> SceneFixture {
    let scene = CubeScene::default();
    let cameras = synthetic::orbit_cameras(
        frames, 6.0, 20.0, -60.0, 120.0, focal, width, height,
    );

    let originals_dir = root.join("originals");
    let pointmaps_dir = root.join("pointmaps");
    let rendered_dir = root.join("rendered");
    let edited_dir = root.join("edited");
    for dir in [&originals_dir, &pointmaps_dir, &rendered_dir, &edited_dir] {
        std::fs::create_dir_all(dir).unwrap();
    }

    let mut originals = Vec::with_capacity(frames);
    for (i, cam) in cameras.iter().enumerate() {
        let view = shaded_view(&scene, cam, 1000 + i as u64);
        view.save_png(originals_dir.join(format!("frame_{i:04}.png")))
            .unwrap();
        scene
            .raycast_pointmap(cam)
            .write_pmap(pointmaps_dir.join(format!("frame_{i:04}.pmap")))
            .unwrap();
        originals.push(view);
    }

    // Edited first frame: a bright block pasted over the cube region.
    let (bw, bh) = (width / 6, height / 6);
    let (bx, by) = (width / 2 - bw / 2, height / 2 - bh / 2);
    let edited_first_img = synthetic::block_edit(&originals[0], bx, by, bw, bh, 1.0);
    let edited_first = root.join("edited_first.png");
    edited_first_img.save_png(&edited_first).unwrap();

    // Edited video: original frames with the same block region tinted;
    // rendered views: edited frames plus mild reconstruction noise.
    for (i, view) in originals.iter().enumerate() {
        let edited = synthetic::block_edit(view, bx, by, bw, bh, 0.9);
        edited
            .save_png(edited_dir.join(format!("frame_{i:04}.png")))
            .unwrap();
        let rendered = synthetic::add_gaussian_noise(&edited, 0.01, 2000 + i as u64);
        rendered
            .save_png(rendered_dir.join(format!("frame_{i:04}.png")))
            .unwrap();
    }

    let cameras_path = root.join("cameras.json");
    std::fs::write(
        &cameras_path,
        serde_json::to_string_pretty(&cameras).unwrap(),
    )
    .unwrap();

    SceneFixture {
        root: root.to_path_buf(),
        originals_dir,
        pointmaps_dir,
        rendered_dir,
        edited_dir,
        cameras_path,
        edited_first,
        frames,
        cameras,
        scene,
    }
}

/// Runs the full five-stage chain into `out_dir` with a fixed worker
/// count; panics on any nonzero exit.
pub fn run_full_chain(fixture: &SceneFixture, out_dir: &Path, threads: &str) -> Vec<CmdOut> {
    let envs: &[(&str, &str)] = &[("CASTKIT_THREADS", threads)];
    let out = out_dir.to_str().unwrap();
    let frames = fixture.frames.to_string();
    let steps: Vec<Vec<String>> = vec![
        vec![
            "maskdiff".into(),
            fixture
                .originals_dir
                .join("frame_0000.png")
                .display()
                .to_string(),
            fixture.edited_first.display().to_string(),
            "--out-dir".into(),
            out.into(),
        ],
        vec![
            "propagate".into(),
            "--first-mask".into(),
            format!("{out}/m1_mask.png"),
            "--pointmaps".into(),
            fixture.pointmaps_dir.display().to_string(),
            "--cameras".into(),
            fixture.cameras_path.display().to_string(),
            "--frames".into(),
            frames,
            "--out-dir".into(),
            out.into(),
        ],
        vec![
            "select".into(),
            "--edited".into(),
            fixture.edited_dir.display().to_string(),
            "--rendered".into(),
            fixture.rendered_dir.display().to_string(),
            "--out-dir".into(),
            out.into(),
        ],
        vec![
            "match".into(),
            "--orig-a".into(),
            fixture.root.join("match_orig_a.png").display().to_string(),
            "--orig-b".into(),
            fixture.root.join("match_orig_b.png").display().to_string(),
            "--edit-a".into(),
            fixture.root.join("match_edit_a.png").display().to_string(),
            "--edit-b".into(),
            fixture.root.join("match_edit_b.png").display().to_string(),
            "--composite".into(),
            "--out-dir".into(),
            out.into(),
        ],
        vec![
            "report".into(),
            "--run".into(),
            out.into(),
        ],
    ];
    let mut outputs = Vec::new();
    for step in &steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        let result = run_castkit(&args, envs);
        assert_eq!(
            result.status, 0,
            "step {:?} failed:\nstdout: {}\nstderr: {}",
            step[0], result.stdout, result.stderr
        );
        outputs.push(result);
    }
    outputs
}

/// Writes the four images the chain's match step expects: an original
/// view pair (translated copy) and its edited counterpart.
pub fn write_match_inputs(fixture: &SceneFixture) {
    let a = ImagePlane::load_png(fixture.originals_dir.join("frame_0000.png")).unwrap();
    let b = synthetic::translate(&a, 2, 0);
    let ea = ImagePlane::load_png(fixture.edited_dir.join("frame_0000.png")).unwrap();
    let eb = synthetic::translate(&ea, 2, 0);
    a.save_png(fixture.root.join("match_orig_a.png")).unwrap();
    b.save_png(fixture.root.join("match_orig_b.png")).unwrap();
    ea.save_png(fixture.root.join("match_edit_a.png")).unwrap();
    eb.save_png(fixture.root.join("match_edit_b.png")).unwrap();
}
