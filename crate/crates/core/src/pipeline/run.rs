use std::collections::{HashMap, VecDeque};

use super::config::PipelineConfig;
use crate::classify::CountingModel;
use crate::cluster::{cluster_detections, to_cartesian};
use crate::datacube::{
    detect, mti_suppress, range_azimuth_from_profiles, range_doppler_from_profiles, range_profiles, Detection, RaMap, RadarCube, RangeProfiles,
    AZIMUTH_FFT_SIZE,
};
use crate::error::{Error, Result};
use crate::features::{build_feature_vector, frame_entry, FeatureMode, FeatureVector, TrackBuffer};
use crate::metrics::{nearest_group_count, scenario_report, smooth_prediction_log, PredictionRecord, ScenarioReport, TrackFrame, TrackPoint};
use crate::sim::{gen_point_cloud, gen_trajectories, Fidelity, GroundTruth, Room, ScenarioConfig, SignalSynthesizer, TruthFrame};
use crate::track::{Tracker, TrackerSnapshot};

/// Radar data for one frame.
#[derive(Debug, Clone)]
pub enum FrameInput {
    Cube(RadarCube),
    /// Detection-level data; no feature extraction is possible.
    Detections(Vec<Detection>),
}

/// Where a confirmed track's head count comes from.
#[derive(Debug, Clone, Copy)]
pub enum Counter<'a> {
    /// No classifier: every track counts as one person.
    Off,
    /// The size of the nearest true group. Used to generate training data.
    Oracle,
    Model(&'a CountingModel),
}

/// One tracker stream over the shared front end.
#[derive(Debug, Clone, Copy)]
pub struct Branch<'a> {
    pub counter: Counter<'a>,
    pub count_feedback: bool,
    /// Classifier for the parallel CVD prediction log.
    pub cvd_model: Option<&'a CountingModel>,
    /// Keep the feature vectors of confirmed tracks, labelled from the truth.
    pub collect: bool,
}

impl<'a> Branch<'a> {
    /// Tracking alone, as a conventional tracker would report it.
    pub fn conventional() -> Self {
        Self {
            counter: Counter::Off,
            count_feedback: false,
            cvd_model: None,
            collect: false,
        }
    }

    pub fn oracle(cfg: &PipelineConfig) -> Self {
        Self {
            counter: Counter::Oracle,
            count_feedback: cfg.count_feedback,
            cvd_model: None,
            collect: true,
        }
    }

    pub fn model(cfg: &PipelineConfig, model: &'a CountingModel, cvd_model: Option<&'a CountingModel>) -> Self {
        Self {
            counter: Counter::Model(model),
            count_feedback: cfg.count_feedback,
            cvd_model: if cfg.cvd_baseline { cvd_model } else { None },
            collect: false,
        }
    }

    fn needs_features(&self) -> bool {
        self.collect || matches!(self.counter, Counter::Model(_))
    }
}

/// A confirmed track's feature vector in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub vector: FeatureVector,
    /// CVD statistics from the same buffer, once it is full.
    pub cvd: Option<Vec<f64>>,
    /// Size of the nearest true group, if one is close enough.
    pub label: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct BranchOutput {
    pub snapshots: Vec<TrackerSnapshot>,
    /// Confirmed tracks per frame.
    pub track_frames: Vec<TrackFrame>,
    /// Smoothed once the run ends.
    pub predictions: Vec<PredictionRecord>,
    pub cvd_predictions: Vec<PredictionRecord>,
    pub samples: Vec<Sample>,
}

impl BranchOutput {
    pub fn report(&self, scenario: &str, truth: &[TruthFrame], cfg: &PipelineConfig) -> Result<ScenarioReport> {
        scenario_report(scenario, truth, &self.track_frames, &self.predictions, &cfg.report)
    }

    pub fn cvd_report(&self, scenario: &str, truth: &[TruthFrame], cfg: &PipelineConfig) -> Result<ScenarioReport> {
        scenario_report(scenario, truth, &self.track_frames, &self.cvd_predictions, &cfg.report)
    }
}

/// Per-frame products shared by all branches.
struct FrontEnd {
    detections: Vec<Detection>,
    signal: Option<(RangeProfiles, RaMap)>,
}

fn front_end(input: FrameInput, cfg: &PipelineConfig, room: &Room) -> Result<FrontEnd> {
    let (mut detections, signal) = match input {
        FrameInput::Cube(cube) => {
            let cube = if cfg.mti { mti_suppress(&cube) } else { cube };
            let profiles = range_profiles(&cube)?;
            let rd = range_doppler_from_profiles(&profiles, cfg.doppler_window);
            let dets = detect(&rd, &cfg.cfar, &cfg.azimuth)?;
            let ra = range_azimuth_from_profiles(&profiles, AZIMUTH_FFT_SIZE);
            (dets, Some((profiles, ra)))
        }
        FrameInput::Detections(d) => (d, None),
    };
    if cfg.roi_filter {
        detections.retain(|d| {
            let (x, y) = to_cartesian(d);
            room.contains_radar(x, y)
        });
    }
    Ok(FrontEnd { detections, signal })
}

/// Lower median of the last labels, the causal counterpart of the
/// smoothing applied to the log afterwards.
fn trailing_median(history: &VecDeque<usize>) -> usize {
    let mut v: Vec<usize> = history.iter().copied().collect();
    v.sort_unstable();
    v[(v.len() - 1) / 2]
}

struct BranchState<'a> {
    branch: Branch<'a>,
    tracker: Tracker,
    buffers: HashMap<u64, TrackBuffer>,
    history: HashMap<u64, VecDeque<usize>>,
    out: BranchOutput,
}

impl<'a> BranchState<'a> {
    fn step(&mut self, fe: &FrontEnd, truth: &TruthFrame, cfg: &PipelineConfig, clusters: &[(f64, f64)]) -> Result<()> {
        let meas: Vec<_> = clusters.iter().map(|&(x, y)| self.tracker.cfg.measurement(x, y)).collect();
        let snap = self.tracker.step(&meas, cfg.frame_dt())?;
        for id in &snap.deleted {
            self.buffers.remove(id);
            self.history.remove(id);
        }
        let frame = truth.frame;
        if self.branch.needs_features() {
            let (profiles, ra) = fe.signal.as_ref().ok_or_else(|| Error::Config("counting needs signal-level data".into()))?;
            for t in &snap.tracks {
                let entry = t.measurement.map(|_| frame_entry(profiles, ra, t.x, t.y, &cfg.extract));
                self.buffers
                    .entry(t.id)
                    .or_insert_with(|| TrackBuffer::new(t.id, cfg.observation_window))
                    .push(frame, entry)?;
            }
        }
        let mut points = Vec::new();
        for t in snap.confirmed_tracks() {
            points.push(TrackPoint { id: t.id, x: t.x, y: t.y });
            let truth_count = || nearest_group_count(truth, t.x, t.y, cfg.report.label_radius_m);
            let (vector, cvd) = if self.branch.needs_features() {
                let buf = &self.buffers[&t.id];
                let v = build_feature_vector(buf, true, &cfg.frequency)?;
                let cvd = if (self.branch.collect && cfg.cvd_baseline) || self.branch.cvd_model.is_some() {
                    Some(build_feature_vector(buf, true, &cfg.cvd_kind())?)
                } else {
                    None
                };
                (Some(v), cvd)
            } else {
                (None, None)
            };
            let pred = match self.branch.counter {
                Counter::Off => None,
                Counter::Oracle => Some((truth_count().unwrap_or(1), Vec::new())),
                Counter::Model(m) => {
                    let p = m.predict(vector.as_ref().expect("features computed"))?;
                    Some((p.label, p.scores))
                }
            };
            if let Some((label, scores)) = pred {
                let mode = vector.as_ref().map_or(FeatureMode::SpatialOnly, FeatureVector::mode);
                self.out.predictions.push(PredictionRecord {
                    frame,
                    track_id: t.id,
                    label_bm: label,
                    label_am: label,
                    scores,
                    mode,
                });
                let h = self.history.entry(t.id).or_default();
                h.push_back(label);
                if h.len() > cfg.median_window {
                    h.pop_front();
                }
                if self.branch.count_feedback {
                    self.tracker.set_count_estimate(t.id, trailing_median(h))?;
                }
            }
            if let (Some(m), Some(cv)) = (self.branch.cvd_model, &cvd) {
                let p = m.predict(cv)?;
                self.out.cvd_predictions.push(PredictionRecord {
                    frame,
                    track_id: t.id,
                    label_bm: p.label,
                    label_am: p.label,
                    scores: p.scores,
                    mode: cv.mode(),
                });
            }
            if self.branch.collect {
                self.out.samples.push(Sample {
                    vector: vector.expect("features computed"),
                    cvd: cvd.and_then(|c| c.frequency),
                    label: truth_count(),
                });
            }
        }
        self.out.track_frames.push(TrackFrame { frame, tracks: points });
        self.out.snapshots.push(snap);
        Ok(())
    }
}

/// Runs every branch over the same frames. `input(i)` supplies the radar
/// data of `truth[i]`.
pub fn run_frames<F>(truth: &[TruthFrame], room: &Room, mut input: F, cfg: &PipelineConfig, branches: &[Branch<'_>]) -> Result<Vec<BranchOutput>>
where
    F: FnMut(usize) -> Result<FrameInput>,
{
    cfg.validate()?;
    let mut states = branches
        .iter()
        .map(|&branch| {
            Ok(BranchState {
                branch,
                tracker: Tracker::new(cfg.tracker)?,
                buffers: HashMap::new(),
                history: HashMap::new(),
                out: BranchOutput::default(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for (i, tf) in truth.iter().enumerate() {
        let fe = front_end(input(i)?, cfg, room)?;
        let clusters: Vec<(f64, f64)> = cluster_detections(&fe.detections, &cfg.dbscan)?.clusters.iter().map(|c| c.centroid).collect();
        for s in &mut states {
            s.step(&fe, tf, cfg, &clusters)?;
        }
    }
    Ok(states
        .into_iter()
        .map(|mut s| {
            smooth_prediction_log(&mut s.out.predictions, cfg.median_window);
            smooth_prediction_log(&mut s.out.cvd_predictions, cfg.median_window);
            s.out
        })
        .collect())
}

/// A simulated scenario together with the outputs of each branch.
pub struct ScenarioRun {
    pub scenario: ScenarioConfig,
    pub truth: GroundTruth,
    pub outputs: Vec<BranchOutput>,
}

impl ScenarioRun {
    pub fn name(&self) -> String {
        self.scenario.scenario_id.to_string()
    }

    pub fn report(&self, branch: usize, cfg: &PipelineConfig) -> Result<ScenarioReport> {
        self.outputs[branch].report(&self.name(), &self.truth.frames, cfg)
    }
}

/// Simulates a scenario and runs the branches over it frame by frame.
pub fn run_scenario(scn: &ScenarioConfig, cfg: &PipelineConfig, branches: &[Branch<'_>]) -> Result<ScenarioRun> {
    let truth = gen_trajectories(scn, cfg.radar.frame_rate)?;
    let outputs = match scn.fidelity {
        Fidelity::Signal => {
            let synth = SignalSynthesizer::new(&truth, cfg.radar, cfg.signal.clone(), scn.seed);
            run_frames(&truth.frames, &truth.room, |i| Ok(FrameInput::Cube(synth.synthesize_frame(i))), cfg, branches)?
        }
        Fidelity::PointCloud => run_frames(
            &truth.frames,
            &truth.room,
            |i| {
                Ok(FrameInput::Detections(gen_point_cloud(
                    &truth.frames[i],
                    &cfg.point_noise,
                    &cfg.radar,
                    &truth.room,
                    scn.seed,
                )))
            },
            cfg,
            branches,
        )?,
    };
    Ok(ScenarioRun {
        scenario: scn.clone(),
        truth,
        outputs,
    })
}
