//! JSON run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qdcnot_core::experiment::{DetectionParams, GateExperiment, TimeBinSpec};
use qdcnot_core::gate::{build_cnot_with, AnalysisSetting, HadamardPlacement};
use qdcnot_core::source::{OverlapModel, PhotonStatistics, SourceParams};

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub gate: GateConfig,
    #[serde(default)]
    pub detection: DetectionConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    pub brightness_max: f64,
    pub decay_time_ps: f64,
    pub g2_zero: f64,
    pub rep_period_ns: f64,
    pub excitation_delay_ns: f64,
    pub overlap_model: OverlapConfig,
    pub photon_statistics: StatisticsConfig,
}

impl Default for SourceConfig {
    fn default() -> Self {
        let p = SourceParams::default();
        SourceConfig {
            brightness_max: p.brightness_max,
            decay_time_ps: p.decay_time_ps,
            g2_zero: p.g2_zero,
            rep_period_ns: p.rep_period_ns,
            excitation_delay_ns: p.excitation_delay_ns,
            overlap_model: OverlapConfig::Constant(0.5),
            photon_statistics: StatisticsConfig::SubPoissonian,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OverlapConfig {
    Constant(f64),
    Table(Vec<OverlapPoint>),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OverlapPoint {
    pub bin_ps: f64,
    pub overlap: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StatisticsConfig {
    SubPoissonian,
    Poissonian,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    #[serde(default)]
    pub hadamard_placement: PlacementConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlacementConfig {
    #[default]
    Target,
    Control,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    pub efficiency: f64,
    pub jitter_fwhm_ps: f64,
    pub dark_count_rate_hz: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        let d = DetectionParams::default();
        DetectionConfig {
            efficiency: d.efficiency,
            jitter_fwhm_ps: d.jitter_fwhm_ps,
            dark_count_rate_hz: d.dark_count_rate_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Analytic,
    Mc,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n_periods: u64,
    pub seed: u64,
    pub shards: u32,
    pub time_bins_ps: Vec<f64>,
    pub resolution_ps: f64,
    pub max_period_offset: u32,
    /// Logical input and analysis setting of the histogram command.
    pub input: String,
    pub analysis: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Analytic,
            n_periods: 1_000_000,
            seed: 1,
            shards: 8,
            time_bins_ps: vec![2300.0],
            resolution_ps: 50.0,
            max_period_offset: 100,
            input: "VH".into(),
            analysis: "VH".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    #[serde(rename = "M")]
    M,
    TimeBin,
    G2,
    Brightness,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub monte_carlo: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("parsing configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.source_params().validate()?;
        self.detection_params().validate()?;
        let e = &self.experiment;
        if e.n_periods == 0 {
            bail!("experiment.n_periods must be at least 1");
        }
        if e.shards == 0 {
            bail!("experiment.shards must be at least 1");
        }
        if e.time_bins_ps.is_empty() {
            bail!("experiment.time_bins_ps must not be empty");
        }
        for &b in &e.time_bins_ps {
            self.bin_spec(b)?;
        }
        if !(e.resolution_ps > 0.0) {
            bail!("experiment.resolution_ps must be positive");
        }
        if e.max_period_offset == 0 {
            bail!("experiment.max_period_offset must be at least 1");
        }
        self.input()?;
        self.analysis()?;
        if let Some(s) = &self.sweep {
            s.grid()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn source_params(&self) -> SourceParams {
        let s = &self.source;
        SourceParams {
            brightness_max: s.brightness_max,
            decay_time_ps: s.decay_time_ps,
            g2_zero: s.g2_zero,
            rep_period_ns: s.rep_period_ns,
            excitation_delay_ns: s.excitation_delay_ns,
            overlap_model: match &s.overlap_model {
                OverlapConfig::Constant(m) => OverlapModel::Constant(*m),
                OverlapConfig::Table(t) => {
                    OverlapModel::Table(t.iter().map(|p| (p.bin_ps, p.overlap)).collect())
                }
            },
            statistics: match s.photon_statistics {
                StatisticsConfig::SubPoissonian => PhotonStatistics::SubPoissonian,
                StatisticsConfig::Poissonian => PhotonStatistics::Poissonian,
            },
        }
    }

    pub fn detection_params(&self) -> DetectionParams {
        DetectionParams {
            efficiency: self.detection.efficiency,
            jitter_fwhm_ps: self.detection.jitter_fwhm_ps,
            dark_count_rate_hz: self.detection.dark_count_rate_hz,
        }
    }

    pub fn placement(&self) -> HadamardPlacement {
        match self.gate.hadamard_placement {
            PlacementConfig::Target => HadamardPlacement::Target,
            PlacementConfig::Control => HadamardPlacement::Control,
        }
    }

    pub fn bin_spec(&self, bin_ps: f64) -> Result<TimeBinSpec> {
        Ok(TimeBinSpec::new(bin_ps, self.source.excitation_delay_ns * 1e3)?)
    }

    pub fn input(&self) -> Result<AnalysisSetting> {
        parse_setting(&self.experiment.input, "experiment.input")
    }

    pub fn analysis(&self) -> Result<AnalysisSetting> {
        parse_setting(&self.experiment.analysis, "experiment.analysis")
    }

    /// Experiment for one setting at one time bin.
    pub fn gate_experiment(
        &self,
        input: AnalysisSetting,
        analysis: AnalysisSetting,
        bin_ps: f64,
    ) -> Result<GateExperiment> {
        Ok(GateExperiment {
            source: self.source_params(),
            circuit: build_cnot_with(self.placement()),
            input,
            analysis,
            detection: self.detection_params(),
            bin: self.bin_spec(bin_ps)?,
            resolution_ps: self.experiment.resolution_ps,
            max_period_offset: self.experiment.max_period_offset,
        })
    }
}

fn parse_setting(text: &str, key: &str) -> Result<AnalysisSetting> {
    text.parse()
        .map_err(|e| anyhow::anyhow!("{key}: {e}"))
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            bail!("sweep.points must be at least 1");
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            bail!("sweep range is empty");
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start + step * i as f64 })
            .collect())
    }
}
