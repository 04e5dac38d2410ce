use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use grouptrack::classify::CountingModel;
use grouptrack::datacube::{read_detections_jsonl, Detection, RadarCube};
use grouptrack::features::SPATIAL_NAMES;
use grouptrack::metrics::{write_frames_csv, write_prediction_jsonl, write_report_csv, ScenarioReport};
use grouptrack::pipeline::{run_frames, Branch, BranchOutput, FeatureSet, FrameInput, PipelineConfig};
use grouptrack::sim::{gen_point_cloud, gen_trajectories, read_truth_jsonl, Fidelity, GroundTruth, Room, ScenarioConfig, SignalSynthesizer, TruthFrame};
use grouptrack::track::write_track_log;

use crate::config::{create_dir, run_name, CounterKind, RunConfig};
use crate::error::{CliError, CliResult};
use crate::simulate::{create, finish, write_truth};

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn load_model(path: &Path) -> CliResult<CountingModel> {
    if !path.exists() {
        return Err(CliError::Data(format!(
            "no model at {}; run `train` first or set the model path",
            path.display()
        )));
    }
    Ok(CountingModel::load(open(path)?)?)
}

/// Checks that a model was trained on the columns the configuration selects.
fn check_model(model: &CountingModel, path: &Path, columns: &[usize], pca: bool, what: &str) -> CliResult<()> {
    if model.full.columns != columns || model.full.pca.is_some() != pca {
        return Err(CliError::Config(format!(
            "{} was trained on {} feature columns{}, but {what} needs {}{}",
            path.display(),
            model.full.columns.len(),
            if model.full.pca.is_some() { " with PCA" } else { "" },
            columns.len(),
            if pca { " with PCA" } else { "" },
        )));
    }
    Ok(())
}

/// Frames of one recording, simulated on the fly or read from a dataset.
struct Source {
    scn: ScenarioConfig,
    truth: Vec<TruthFrame>,
    room: Room,
    frames: Frames,
    gt: Option<Box<GroundTruth>>,
}

enum Frames {
    /// Synthesized from the ground truth held by the source.
    Simulated,
    PointCloud,
    Cubes(BufReader<File>, PathBuf),
    Detections(Vec<Vec<Detection>>),
}

impl Source {
    fn simulate(scn: &ScenarioConfig, p: &PipelineConfig) -> CliResult<Self> {
        let gt = gen_trajectories(scn, p.radar.frame_rate)?;
        let frames = match scn.fidelity {
            Fidelity::Signal => Frames::Simulated,
            Fidelity::PointCloud => Frames::PointCloud,
        };
        Ok(Self {
            scn: scn.clone(),
            room: gt.room,
            truth: gt.frames.clone(),
            frames,
            gt: Some(Box::new(gt)),
        })
    }

    fn read(dir: &Path, p: &PipelineConfig) -> CliResult<Self> {
        let path = dir.join("scenario.toml");
        let mut text = String::new();
        open(&path)?.read_to_string(&mut text).map_err(|e| CliError::io(&path, e))?;
        let scn = ScenarioConfig::from_toml(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let truth = read_truth_jsonl(open(&dir.join("truth.jsonl"))?, scn.grouping_radius_m())?;
        let cubes = dir.join("cubes.bin");
        let dets = dir.join("detections.jsonl");
        let frames = if cubes.exists() {
            Frames::Cubes(open(&cubes)?, cubes)
        } else if dets.exists() {
            let mut by_frame = vec![Vec::new(); truth.len()];
            for r in read_detections_jsonl(open(&dets)?)? {
                let slot = by_frame
                    .get_mut(r.frame as usize)
                    .ok_or_else(|| CliError::Data(format!("{}: detection at frame {} beyond the truth", dets.display(), r.frame)))?;
                slot.push(r.to_detection(&p.radar));
            }
            Frames::Detections(by_frame)
        } else {
            return Err(CliError::Data(format!("{} holds neither cubes.bin nor detections.jsonl", dir.display())));
        };
        Ok(Self {
            room: scn.room,
            scn,
            truth,
            frames,
            gt: None,
        })
    }

    fn is_signal(&self) -> bool {
        matches!(self.frames, Frames::Simulated | Frames::Cubes(..))
    }

    fn run(&mut self, p: &PipelineConfig, branches: &[Branch<'_>]) -> CliResult<Vec<BranchOutput>> {
        let (truth, room, seed) = (&self.truth, &self.room, self.scn.seed);
        let synth = self.gt.as_ref().map(|gt| SignalSynthesizer::new(gt, p.radar, p.signal.clone(), seed));
        let frames = &mut self.frames;
        let input = |i: usize| -> grouptrack::Result<FrameInput> {
            Ok(match frames {
                Frames::Simulated => FrameInput::Cube(synth.as_ref().expect("built above").synthesize_frame(i)),
                Frames::PointCloud => FrameInput::Detections(gen_point_cloud(&truth[i], &p.point_noise, &p.radar, room, seed)),
                Frames::Cubes(r, path) => {
                    let cube = RadarCube::read_from(r)?.ok_or_else(|| grouptrack::Error::Format(format!("{} ends before frame {i}", path.display())))?;
                    FrameInput::Cube(cube)
                }
                Frames::Detections(d) => FrameInput::Detections(std::mem::take(&mut d[i])),
            })
        };
        Ok(run_frames(truth, room, input, p, branches)?)
    }
}

/// Reports of one run: the configured branch, its CVD log and the
/// conventional comparison when they exist.
struct RunReports {
    main: ScenarioReport,
    cvd: Option<ScenarioReport>,
    conventional: Option<ScenarioReport>,
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let p = &cfg.pipeline;
    let model = match cfg.counter {
        CounterKind::Model => {
            let path = cfg.model_path(false);
            let m = load_model(&path)?;
            let cols = cfg.feature_select()?.columns(p.frequency.len())?;
            check_model(
                &m,
                &path,
                &cols,
                cfg.features == FeatureSet::Pca,
                &format!("features = \"{}\"", cfg.features.as_str()),
            )?;
            Some(m)
        }
        _ => None,
    };
    let cvd_model = match (&model, p.cvd_baseline) {
        (Some(_), true) => {
            let path = cfg.model_path(true);
            let m = load_model(&path)?;
            let cols: Vec<usize> = (0..SPATIAL_NAMES.len() + p.cvd_kind().len()).collect();
            check_model(&m, &path, &cols, false, "the CVD baseline")?;
            Some(m)
        }
        _ => None,
    };
    let mut reports = Vec::new();
    for scn in cfg.scenario_configs() {
        let name = run_name(&scn);
        let mut src = match &cfg.dataset_dir {
            Some(d) => Source::read(&d.join(&name), p)?,
            None => Source::simulate(&scn, p)?,
        };
        let collect = cfg.write_features && src.is_signal();
        let mut main = match (cfg.counter, &model) {
            (CounterKind::Off, _) => Branch::conventional(),
            (CounterKind::Oracle, _) => Branch::oracle(p),
            (CounterKind::Model, Some(m)) => Branch::model(p, m, cvd_model.as_ref()),
            (CounterKind::Model, None) => unreachable!("model loaded above"),
        };
        main.collect = collect;
        let mut branches = vec![main];
        let compare = cfg.compare_conventional && cfg.counter != CounterKind::Off;
        if compare {
            branches.push(Branch::conventional());
        }
        let outputs = src.run(p, &branches)?;
        let dir = cfg.runs_dir().join(&name);
        create_dir(&dir)?;
        write_truth(&dir, &src.scn, &src.truth)?;
        let out = &outputs[0];
        let main_report = out.report(&name, &src.truth, p)?;
        write_outputs(&dir, out, &main_report, cfg, collect, cvd_model.is_some())?;
        let r = RunReports {
            cvd: cvd_model.as_ref().map(|_| out.cvd_report(&name, &src.truth, p)).transpose()?,
            conventional: compare.then(|| outputs[1].report(&name, &src.truth, p)).transpose()?,
            main: main_report,
        };
        print_summary(&name, &r);
        reports.push(r);
    }
    let write = |file: &str, rows: Vec<ScenarioReport>| -> CliResult<()> {
        let path = cfg.output_dir.join(file);
        let mut w = create(&path)?;
        write_report_csv(&rows, &mut w)?;
        finish(w, &path)
    };
    write("report.csv", reports.iter().map(|r| r.main.clone()).collect())?;
    if cvd_model.is_some() {
        write("report_cvd.csv", reports.iter().filter_map(|r| r.cvd.clone()).collect())?;
    }
    if reports.iter().any(|r| r.conventional.is_some()) {
        write("report_conventional.csv", reports.iter().filter_map(|r| r.conventional.clone()).collect())?;
    }
    Ok(())
}

fn write_outputs(dir: &Path, out: &BranchOutput, report: &ScenarioReport, cfg: &RunConfig, collect: bool, cvd: bool) -> CliResult<()> {
    let path = dir.join("tracks.jsonl");
    let mut w = create(&path)?;
    for s in &out.snapshots {
        write_track_log(s, &mut w)?;
    }
    finish(w, &path)?;
    let mut logs = vec![("predictions.jsonl", &out.predictions)];
    if cvd {
        logs.push(("cvd_predictions.jsonl", &out.cvd_predictions));
    }
    for (file, log) in logs {
        let path = dir.join(file);
        let mut w = create(&path)?;
        write_prediction_jsonl(log, &mut w)?;
        finish(w, &path)?;
    }
    let path = dir.join("frames.csv");
    let mut w = create(&path)?;
    write_frames_csv(&report.frames, &mut w)?;
    finish(w, &path)?;
    if collect {
        let p = &cfg.pipeline;
        let mut sets = vec![("features.csv", p.frequency, false)];
        if p.cvd_baseline {
            sets.push(("features_cvd.csv", p.cvd_kind(), true));
        }
        for (file, kind, cvd) in sets {
            let path = dir.join(file);
            let mut w = create(&path)?;
            grouptrack::pipeline::write_samples_csv(&out.samples, &kind, cvd, &mut w)?;
            finish(w, &path)?;
        }
    }
    Ok(())
}

fn print_summary(name: &str, r: &RunReports) {
    let pct = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}%"));
    let mut line = format!(
        "{name}: OSPA {:.3}, accuracy {} before / {} after smoothing",
        r.main.mean_ospa,
        pct(r.main.acc_bm),
        pct(r.main.acc_am)
    );
    if let Some(c) = &r.cvd {
        line.push_str(&format!(", CVD {} / {}", pct(c.acc_bm), pct(c.acc_am)));
    }
    if let Some(c) = &r.conventional {
        line.push_str(&format!(", conventional OSPA {:.3}", c.mean_ospa));
    }
    println!("{line}");
}

/// Run directories under `runs/`, in name order.
pub fn run_dirs(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let root = cfg.runs_dir();
    let mut dirs: BTreeMap<String, PathBuf> = BTreeMap::new();
    for e in std::fs::read_dir(&root).map_err(|e| CliError::io(&root, e))? {
        let e = e.map_err(|e| CliError::io(&root, e))?;
        if e.path().is_dir() {
            dirs.insert(e.file_name().to_string_lossy().into_owned(), e.path());
        }
    }
    Ok(dirs.into_values().collect())
}
