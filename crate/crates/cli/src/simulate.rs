use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use grouptrack::datacube::write_detections_jsonl;
use grouptrack::sim::{gen_point_cloud, gen_trajectories, write_truth_jsonl, Fidelity, ScenarioConfig, SignalSynthesizer};

use crate::config::{create_dir, run_name, RunConfig};
use crate::error::{CliError, CliResult};

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Ground truth and scenario settings, shared by datasets and run directories.
pub fn write_truth(dir: &Path, scn: &ScenarioConfig, truth: &[grouptrack::sim::TruthFrame]) -> CliResult<()> {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, scn.to_toml()).map_err(|e| CliError::io(&path, e))?;
    let path = dir.join("truth.jsonl");
    let mut w = create(&path)?;
    write_truth_jsonl(truth, &mut w)?;
    finish(w, &path)
}

/// Writes one dataset directory per scenario and seed under `data/`.
pub fn simulate(cfg: &RunConfig) -> CliResult<()> {
    let p = &cfg.pipeline;
    for scn in cfg.scenario_configs() {
        let dir = cfg.data_dir().join(run_name(&scn));
        create_dir(&dir)?;
        let truth = gen_trajectories(&scn, p.radar.frame_rate)?;
        write_truth(&dir, &scn, &truth.frames)?;
        let mut what = String::from("truth");
        match scn.fidelity {
            Fidelity::Signal if cfg.write_cubes => {
                let synth = SignalSynthesizer::new(&truth, p.radar, p.signal.clone(), scn.seed);
                let path = dir.join("cubes.bin");
                let mut w = create(&path)?;
                for i in 0..truth.frames.len() {
                    synth.synthesize_frame(i).write_to(&mut w)?;
                }
                finish(w, &path)?;
                what.push_str(" + cubes");
            }
            Fidelity::Signal => {}
            Fidelity::PointCloud => {
                let path = dir.join("detections.jsonl");
                let mut w = create(&path)?;
                for f in &truth.frames {
                    write_detections_jsonl(&mut w, &gen_point_cloud(f, &p.point_noise, &p.radar, &truth.room, scn.seed))?;
                }
                finish(w, &path)?;
                what.push_str(" + detections");
            }
        }
        println!(
            "{}: {} ({}), {} frames of {what} in {}",
            run_name(&scn),
            scn.description(),
            match scn.fidelity {
                Fidelity::Signal => "signal",
                Fidelity::PointCloud => "point cloud",
            },
            truth.frames.len(),
            dir.display()
        );
    }
    Ok(())
}
