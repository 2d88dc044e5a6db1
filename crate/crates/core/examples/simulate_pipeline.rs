//! Runs the file-based pipeline end to end in a temporary directory:
//! simulate, generate ground truth, evaluate the ground-truth masks as a
//! prediction, and post-process a density map.
//!
//! Run with `cargo run --example simulate_pipeline`.

use std::fs;

use vsd::config::{Overrides, PipelineConfig, SceneSettings};
use vsd::pipeline::{cmd_evaluate, cmd_gen_gt, cmd_postprocess, cmd_simulate, frame_dir, EvalEntry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::temp_dir().join(format!("vsd-example-{}", std::process::id()));
    let (sim, gt, eval, post) = (root.join("sim"), root.join("gt"), root.join("eval"), root.join("post"));

    let mut cfg = PipelineConfig::load(None, &Overrides::default())?;
    cfg.scene = SceneSettings {
        seed: 21,
        frames: 3,
        ..SceneSettings::default()
    };
    let truth = cmd_simulate(&cfg, &sim)?;
    for f in &truth.frames {
        println!("frame {}: {} NSDC, {} SDC", f.frame_id, f.n_nsdc, f.n_sdc);
    }

    let cfg = PipelineConfig::load(Some(&sim.join("config.json")), &Overrides::default())?;
    let summary = cmd_gen_gt(&cfg, &sim.join("annotations.csv"), None, &gt)?;
    println!("gen-gt counts (NSDC, SDC): {:?}", summary.counts);

    let entries: Vec<EvalEntry> = summary
        .frames
        .iter()
        .map(|&f| {
            let d = gt.join(frame_dir(f));
            EvalEntry {
                frame_id: f,
                pred: d.join("plane_mask.pgm"),
                d_n: d.join("plane_nsdc.vsdm"),
                d_c: d.join("plane_sdc.vsdm"),
                gt_mask: Some(d.join("plane_mask.pgm")),
            }
        })
        .collect();
    let report = cmd_evaluate(&cfg, &entries, &eval)?;
    print!("{}", report.to_table("ground truth"));

    let d_n = gt.join(frame_dir(0)).join("plane_nsdc.vsdm");
    cmd_postprocess(&cfg, &d_n, 0, &post)?;
    print!("{}", fs::read_to_string(post.join("regions.json"))?);

    fs::remove_dir_all(&root)?;
    Ok(())
}
