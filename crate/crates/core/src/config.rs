//! Experiment configuration files (TOML).
//!
//! ```toml
//! [code]
//! fixture = 4                 # or exponent_matrix = "..." / exponent_matrix_path = "..."
//! lifting_size = 45
//! assignment = "sequential"   # or "random" with assignment_seed
//! [code.row_subcodes]         # 1-based rows; unlisted rows are SPC
//! 1 = "shortened_hamming_6_3"
//! 3 = "hamming_7_4"
//!
//! [channel]
//! type = "awgn"               # or "bec"
//! parameters = [1.0, 1.5]     # Eb/N0 in dB (awgn_parameter = "sigma" for σ), or ε
//!
//! [decoder]
//! mode = "layered"            # or "flooding"
//! schedules = ["hds", "1,2,3,4", "per_trial_random"]
//! max_iterations = 3
//! gc_rule = "min"
//!
//! [run]
//! trials = 10000
//! seed = 42
//! output = "out.csv"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::channel::{ebn0_to_sigma, ChannelModel};
use crate::code::{CodeSpec, LinearCode};
use crate::decoder::{DecodeOptions, GcRule, Schedule};
use crate::gf2::BitMatrix;
use crate::graph::{fixtures, generalize, lift, AssignmentPolicy, ExponentMatrix, GldpcCode};
use crate::schedule::{baseline_schedule, format_order, hds_rows, parse_order, Baseline, ChannelKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: &str, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    code: RawCode,
    channel: RawChannel,
    #[serde(default)]
    decoder: RawDecoder,
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCode {
    fixture: Option<usize>,
    exponent_matrix: Option<String>,
    exponent_matrix_path: Option<PathBuf>,
    lifting_size: usize,
    #[serde(default)]
    row_subcodes: BTreeMap<String, String>,
    assignment: Option<String>,
    assignment_seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    #[serde(rename = "type")]
    kind: String,
    parameters: Vec<f64>,
    awgn_parameter: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDecoder {
    mode: Option<String>,
    schedules: Option<Vec<String>>,
    max_iterations: Option<usize>,
    gc_rule: Option<String>,
    early_stop: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    trials: u64,
    min_block_errors: Option<u64>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    transmit: Option<String>,
}

/// How a BI-AWGN channel parameter is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwgnParameter {
    EbN0Db,
    Sigma,
}

#[derive(Debug, Clone)]
pub struct CodeConfig {
    pub exponent: ExponentMatrix,
    /// 0-based row to subcode; other rows are SPC.
    pub row_subcodes: BTreeMap<usize, Arc<LinearCode>>,
    pub assignment: AssignmentPolicy,
}

#[derive(Debug, Clone)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    pub parameters: Vec<f64>,
    pub awgn_parameter: AwgnParameter,
}

/// A schedule entry as written in the configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleSpec {
    /// Explicit 0-based row order.
    Rows(Vec<usize>),
    Hds,
    Natural,
    LowDegree,
    Random(u64),
    PerTrialRandom,
    Flooding,
}

/// A schedule resolved against a code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedSchedule {
    Fixed { label: String, schedule: Schedule },
    /// Fresh uniform row order for every decode.
    PerTrialRandom,
}

impl ResolvedSchedule {
    pub fn label(&self) -> &str {
        match self {
            ResolvedSchedule::Fixed { label, .. } => label,
            ResolvedSchedule::PerTrialRandom => "per_trial_random",
        }
    }
}

impl ScheduleSpec {
    fn parse(text: &str, rows: usize) -> Result<Self, ConfigError> {
        let t = text.trim();
        Ok(match t {
            "hds" => ScheduleSpec::Hds,
            "natural" => ScheduleSpec::Natural,
            "low_degree" => ScheduleSpec::LowDegree,
            "per_trial_random" => ScheduleSpec::PerTrialRandom,
            "flooding" => ScheduleSpec::Flooding,
            _ => {
                if let Some(seed) = t.strip_prefix("random:") {
                    let seed = seed
                        .trim()
                        .parse()
                        .map_err(|_| field_err("decoder.schedules", format!("bad seed in {t:?}")))?;
                    ScheduleSpec::Random(seed)
                } else {
                    ScheduleSpec::Rows(
                        parse_order(t, rows).map_err(|e| field_err("decoder.schedules", e))?,
                    )
                }
            }
        })
    }

    pub fn resolve(&self, code: &GldpcCode) -> ResolvedSchedule {
        let rows = match self {
            ScheduleSpec::Flooding => {
                return ResolvedSchedule::Fixed {
                    label: "flooding".into(),
                    schedule: Schedule::Flooding,
                }
            }
            ScheduleSpec::PerTrialRandom => return ResolvedSchedule::PerTrialRandom,
            ScheduleSpec::Rows(rows) => rows.clone(),
            ScheduleSpec::Hds => hds_rows(code),
            ScheduleSpec::Natural => baseline_schedule(Baseline::Natural, code),
            ScheduleSpec::LowDegree => baseline_schedule(Baseline::LowDegree, code),
            ScheduleSpec::Random(seed) => baseline_schedule(Baseline::Random(*seed), code),
        };
        ResolvedSchedule::Fixed {
            label: format_order(&rows),
            schedule: Schedule::from_rows(code, &rows),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecoderConfig {
    pub schedules: Vec<ScheduleSpec>,
    pub options: DecodeOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transmit {
    AllZero,
    RandomCodeword,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub trials: u64,
    pub min_block_errors: Option<u64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub transmit: Transmit,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub code: CodeConfig,
    pub channel: ChannelConfig,
    pub decoder: DecoderConfig,
    pub run: RunConfig,
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_subcode(value: &str, base: &Path) -> Result<LinearCode, ConfigError> {
    let field = "code.row_subcodes";
    if let Some(file) = value.strip_prefix("file:") {
        let path = base.join(file.trim());
        let h: BitMatrix = read(&path)?.parse().map_err(|e| field_err(field, e))?;
        return LinearCode::from_parity_check(file.trim(), &h).map_err(|e| field_err(field, e));
    }
    let spec: CodeSpec = value.parse().map_err(|e| field_err(field, e))?;
    LinearCode::make(&spec).map_err(|e| field_err(field, e))
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = read(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses configuration text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;

        let sources = [
            raw.code.fixture.is_some(),
            raw.code.exponent_matrix.is_some(),
            raw.code.exponent_matrix_path.is_some(),
        ];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(field_err(
                "code",
                "give exactly one of fixture, exponent_matrix, exponent_matrix_path",
            ));
        }
        let zc = raw.code.lifting_size;
        let exponent = if let Some(idx) = raw.code.fixture {
            fixtures::table(idx, zc).map_err(|e| field_err("code.fixture", e))?
        } else if let Some(text) = &raw.code.exponent_matrix {
            ExponentMatrix::parse(text, zc).map_err(|e| field_err("code.exponent_matrix", e))?
        } else {
            let path = base.join(raw.code.exponent_matrix_path.as_ref().expect("checked"));
            ExponentMatrix::parse(&read(&path)?, zc)
                .map_err(|e| field_err("code.exponent_matrix_path", e))?
        };

        let mut row_subcodes = BTreeMap::new();
        for (key, value) in &raw.code.row_subcodes {
            let row: usize = key
                .trim()
                .parse()
                .ok()
                .filter(|&r| r >= 1 && r <= exponent.rows())
                .ok_or_else(|| {
                    field_err(
                        "code.row_subcodes",
                        format!("row {key:?} is not in 1..={}", exponent.rows()),
                    )
                })?;
            row_subcodes.insert(row - 1, Arc::new(load_subcode(value, base)?));
        }
        let assignment = match raw.code.assignment.as_deref().unwrap_or("sequential") {
            "sequential" => AssignmentPolicy::Sequential,
            "random" => AssignmentPolicy::Random(raw.code.assignment_seed.unwrap_or(0)),
            other => {
                return Err(field_err(
                    "code.assignment",
                    format!("{other:?} (expected sequential or random)"),
                ))
            }
        };

        let kind = match raw.channel.kind.as_str() {
            "bec" => ChannelKind::Bec,
            "awgn" | "bi_awgn" => ChannelKind::Awgn,
            other => return Err(field_err("channel.type", format!("{other:?} (expected bec or awgn)"))),
        };
        if raw.channel.parameters.is_empty() {
            return Err(field_err("channel.parameters", "list is empty"));
        }
        let awgn_parameter = match raw.channel.awgn_parameter.as_deref().unwrap_or("ebn0_db") {
            "ebn0_db" => AwgnParameter::EbN0Db,
            "sigma" => AwgnParameter::Sigma,
            other => {
                return Err(field_err(
                    "channel.awgn_parameter",
                    format!("{other:?} (expected ebn0_db or sigma)"),
                ))
            }
        };
        for &p in &raw.channel.parameters {
            let ok = match (kind, awgn_parameter) {
                (ChannelKind::Bec, _) => (0.0..=1.0).contains(&p),
                (ChannelKind::Awgn, AwgnParameter::Sigma) => p > 0.0 && p.is_finite(),
                (ChannelKind::Awgn, AwgnParameter::EbN0Db) => p.is_finite(),
            };
            if !ok {
                return Err(field_err("channel.parameters", format!("value {p} out of range")));
            }
        }

        let dec = raw.decoder;
        let flooding = match dec.mode.as_deref().unwrap_or("layered") {
            "layered" => false,
            "flooding" => true,
            other => {
                return Err(field_err(
                    "decoder.mode",
                    format!("{other:?} (expected layered or flooding)"),
                ))
            }
        };
        let schedules = if flooding {
            if dec.schedules.is_some() {
                return Err(field_err("decoder.schedules", "not allowed with mode = \"flooding\""));
            }
            vec![ScheduleSpec::Flooding]
        } else {
            let list = dec.schedules.unwrap_or_else(|| vec!["hds".to_string()]);
            if list.is_empty() {
                return Err(field_err("decoder.schedules", "list is empty"));
            }
            list.iter()
                .map(|s| ScheduleSpec::parse(s, exponent.rows()))
                .collect::<Result<Vec<_>, _>>()?
        };
        let max_iterations = dec.max_iterations.unwrap_or(3);
        if max_iterations == 0 {
            return Err(field_err("decoder.max_iterations", "must be at least 1"));
        }
        let gc_rule: GcRule = dec
            .gc_rule
            .as_deref()
            .unwrap_or("min")
            .parse()
            .map_err(|e: String| field_err("decoder.gc_rule", e))?;

        if raw.run.trials == 0 {
            return Err(field_err("run.trials", "must be at least 1"));
        }
        let transmit = match raw.run.transmit.as_deref().unwrap_or("all_zero") {
            "all_zero" => Transmit::AllZero,
            "random_codeword" => Transmit::RandomCodeword,
            other => {
                return Err(field_err(
                    "run.transmit",
                    format!("{other:?} (expected all_zero or random_codeword)"),
                ))
            }
        };

        Ok(Self {
            code: CodeConfig {
                exponent,
                row_subcodes,
                assignment,
            },
            channel: ChannelConfig {
                kind,
                parameters: raw.channel.parameters,
                awgn_parameter,
            },
            decoder: DecoderConfig {
                schedules,
                options: DecodeOptions {
                    max_iterations,
                    gc_rule,
                    early_stop: dec.early_stop.unwrap_or(false),
                },
            },
            run: RunConfig {
                trials: raw.run.trials,
                min_block_errors: raw.run.min_block_errors,
                seed: raw.run.seed.unwrap_or(0),
                output: raw.run.output.map(|p| base.join(p)),
                transmit,
            },
        })
    }

    pub fn build_code(&self) -> Result<GldpcCode, ConfigError> {
        generalize(
            &lift(&self.code.exponent),
            &self.code.row_subcodes,
            self.code.assignment,
        )
        .map_err(|e| field_err("code.row_subcodes", e))
    }

    /// Channel for the configured parameter value; `rate` converts Eb/N0.
    pub fn channel_model(&self, parameter: f64, rate: f64) -> ChannelModel {
        match self.channel.kind {
            ChannelKind::Bec => ChannelModel::Bec { epsilon: parameter },
            ChannelKind::Awgn => ChannelModel::BiAwgn {
                sigma: match self.channel.awgn_parameter {
                    AwgnParameter::Sigma => parameter,
                    AwgnParameter::EbN0Db => ebn0_to_sigma(parameter, rate),
                },
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GR4: &str = r#"
[code]
fixture = 4
lifting_size = 45
[code.row_subcodes]
1 = "shortened_hamming_6_3"
3 = "hamming_7_4"

[channel]
type = "awgn"
parameters = [1.0, 2.0]

[decoder]
schedules = ["hds", "1,2,3,4", "4,2,3,1", "per_trial_random", "random:5"]
max_iterations = 5

[run]
trials = 10
seed = 3
output = "out.csv"
"#;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(text, Path::new("/tmp/base"))
    }

    #[test]
    fn parses_full_config() {
        let cfg = parse(GR4).unwrap();
        assert_eq!(cfg.code.exponent.rows(), 4);
        assert_eq!(cfg.code.row_subcodes.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(cfg.decoder.schedules[0], ScheduleSpec::Hds);
        assert_eq!(cfg.decoder.schedules[2], ScheduleSpec::Rows(vec![3, 1, 2, 0]));
        assert_eq!(cfg.decoder.options.gc_rule, GcRule::Min);
        assert_eq!(cfg.decoder.options.max_iterations, 5);
        assert_eq!(cfg.run.output.as_deref(), Some(Path::new("/tmp/base/out.csv")));
        let code = cfg.build_code().unwrap();
        assert_eq!(code.n_vars(), 540);
        let labels: Vec<String> = cfg
            .decoder
            .schedules
            .iter()
            .map(|s| s.resolve(&code).label().to_string())
            .collect();
        assert_eq!(&labels[..4], &["1,3,2,4", "1,2,3,4", "4,2,3,1", "per_trial_random"]);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = GR4.replace("max_iterations = 5", "max_iteration = 5");
        assert!(matches!(parse(&bad), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn field_errors_name_the_field() {
        let cases = [
            (GR4.replace("trials = 10", "trials = 0"), "run.trials"),
            (GR4.replace("parameters = [1.0, 2.0]", "parameters = []"), "channel.parameters"),
            (GR4.replace("\"4,2,3,1\"", "\"4,2,3\""), "decoder.schedules"),
            (GR4.replace("3 = \"hamming_7_4\"", "3 = \"golay\""), "code.row_subcodes"),
            (GR4.replace("3 = \"hamming_7_4\"", "9 = \"hamming_7_4\""), "code.row_subcodes"),
            (GR4.replace("type = \"awgn\"", "type = \"bsc\""), "channel.type"),
            (GR4.replace("fixture = 4", "fixture = 4\nexponent_matrix = \"0\""), "code"),
        ];
        for (text, field) in cases {
            match parse(&text) {
                Err(ConfigError::Field { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{field}: {other:?}"),
            }
        }
    }

    #[test]
    fn degree_mismatch_is_reported_when_building() {
        let cfg = parse(&GR4.replace("3 = \"hamming_7_4\"", "2 = \"hamming_7_4\"")).unwrap();
        assert!(cfg.build_code().is_err());
    }

    #[test]
    fn bec_parameters_must_be_probabilities() {
        let text = GR4.replace("type = \"awgn\"", "type = \"bec\"").replace("[1.0, 2.0]", "[0.3, 1.5]");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn flooding_mode() {
        let text = GR4
            .replace("schedules = [\"hds\", \"1,2,3,4\", \"4,2,3,1\", \"per_trial_random\", \"random:5\"]", "mode = \"flooding\"");
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.decoder.schedules, vec![ScheduleSpec::Flooding]);
    }

    #[test]
    fn loads_matrix_from_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("m.txt"), fixtures::TABLE_4).unwrap();
        std::fs::write(dir.path().join("h.txt"), "1 1 0\n0 1 1\n").unwrap();
        let text = GR4
            .replace("fixture = 4", "exponent_matrix_path = \"m.txt\"")
            .replace("1 = \"shortened_hamming_6_3\"\n3 = \"hamming_7_4\"", "");
        let cfg = ExperimentConfig::parse(&text, dir.path()).unwrap();
        assert_eq!(cfg.code.exponent, fixtures::table(4, 45).unwrap());
        let exp3 = "[code]\nexponent_matrix = \"0 0 0\"\nlifting_size = 2\n[code.row_subcodes]\n1 = \"file:h.txt\"\n[channel]\ntype = \"bec\"\nparameters = [0.1]\n[run]\ntrials = 1\n";
        let cfg = ExperimentConfig::parse(exp3, dir.path()).unwrap();
        assert_eq!(cfg.code.row_subcodes[&0].k(), 1);
    }
}
