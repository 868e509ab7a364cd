//! Seeded Monte Carlo BLER sweeps.
//!
//! Trials run in fixed chunks of [`CHUNK`] over a rayon pool; the early-stop
//! check happens only at chunk boundaries, so results do not depend on the
//! worker count. Trial `t` at channel index `c` draws its channel noise (and
//! codeword) from `ChaCha8Rng` seeded with a hash of `(seed, c, t)`, shared by
//! every schedule, so schedules are compared on identical channel
//! realizations. Per-trial random schedules draw from a separate stream keyed
//! additionally by the schedule index.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{transmit, ChannelModel, ReceivedWord};
use crate::config::{ConfigError, ExperimentConfig, ResolvedSchedule, Transmit};
use crate::decoder::{AwgnDecoder, BecDecoder, DecodeError, DecodeOptions, Schedule};
use crate::graph::GldpcCode;
use crate::schedule::random_order;

/// Trials per deterministic work unit.
pub const CHUNK: u64 = 512;

/// CSV header, in column order.
pub const CSV_HEADER: &str = "channel_param,schedule,iterations,trials,block_errors,bler,seed";

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("decoding failed: {0}")]
    Decode(#[from] DecodeError),
    #[error("cannot create worker pool: {0}")]
    Pool(String),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlerRecord {
    pub channel_param: f64,
    pub schedule: String,
    pub iterations: usize,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub seed: u64,
    pub wall_time: Duration,
}

impl BlerRecord {
    /// 95% Wilson score interval for the block error rate.
    pub fn wilson95(&self) -> (f64, f64) {
        wilson_interval(self.block_errors, self.trials, 1.959_963_984_540_054)
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive 64-bit hash of a tuple of counters.
pub fn stream_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6a09_e667_f3bc_c908, |h, &p| splitmix64(h ^ splitmix64(p)))
}

const SCHEDULE_STREAM: u64 = 0x5c4e_d01e;

struct TrialContext<'a> {
    code: &'a GldpcCode,
    channel: ChannelModel,
    schedule: &'a ResolvedSchedule,
    options: DecodeOptions,
    transmit: Transmit,
    seed: u64,
    channel_idx: u64,
    schedule_idx: u64,
}

enum Workspace {
    Bec(BecDecoder),
    Awgn(AwgnDecoder<f64>),
}

impl TrialContext<'_> {
    fn workspace(&self) -> Workspace {
        match self.channel {
            ChannelModel::Bec { .. } => Workspace::Bec(BecDecoder::new(self.code)),
            ChannelModel::BiAwgn { .. } => Workspace::Awgn(AwgnDecoder::new(self.code)),
        }
    }

    /// Returns true on a block error.
    fn run(&self, ws: &mut Workspace, trial: u64) -> Result<bool, DecodeError> {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(&[self.seed, self.channel_idx, trial]));
        let word = match self.transmit {
            Transmit::AllZero => vec![0u8; self.code.n_vars()],
            Transmit::RandomCodeword => self.code.random_codeword(&mut rng),
        };
        let received: ReceivedWord<f64> = transmit(&word, &self.channel, &mut rng);
        let per_trial;
        let schedule = match self.schedule {
            ResolvedSchedule::Fixed { schedule, .. } => schedule,
            ResolvedSchedule::PerTrialRandom => {
                let mut srng = ChaCha8Rng::seed_from_u64(stream_seed(&[
                    self.seed,
                    SCHEDULE_STREAM,
                    self.channel_idx,
                    self.schedule_idx,
                    trial,
                ]));
                let rows = random_order(self.code.row_count(), &mut srng);
                per_trial = Schedule::from_rows(self.code, &rows);
                &per_trial
            }
        };
        let result = match (ws, &received) {
            (Workspace::Bec(dec), ReceivedWord::Bec(rx)) => dec.decode(rx, &word, schedule, &self.options)?,
            (Workspace::Awgn(dec), ReceivedWord::Awgn(rx)) => dec.decode(rx, &word, schedule, &self.options)?,
            _ => unreachable!("workspace matches the channel"),
        };
        Ok(!result.success)
    }
}

/// Runs every (channel parameter, schedule) point of the configuration.
/// `workers = None` uses the available parallelism.
pub fn run_simulation(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<BlerRecord>, SimError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| SimError::Pool(e.to_string()))?;
    let code = cfg.build_code()?;
    let schedules: Vec<ResolvedSchedule> = cfg.decoder.schedules.iter().map(|s| s.resolve(&code)).collect();

    let mut records = Vec::new();
    for (ci, &param) in cfg.channel.parameters.iter().enumerate() {
        let channel = cfg.channel_model(param, code.rate());
        for (si, schedule) in schedules.iter().enumerate() {
            let ctx = TrialContext {
                code: &code,
                channel,
                schedule,
                options: cfg.decoder.options,
                transmit: cfg.run.transmit,
                seed: cfg.run.seed,
                channel_idx: ci as u64,
                schedule_idx: si as u64,
            };
            let start = Instant::now();
            let (trials, errors) = pool.install(|| run_point(&ctx, cfg.run.trials, cfg.run.min_block_errors))?;
            records.push(BlerRecord {
                channel_param: param,
                schedule: schedule.label().to_string(),
                iterations: cfg.decoder.options.max_iterations,
                trials,
                block_errors: errors,
                bler: errors as f64 / trials as f64,
                seed: cfg.run.seed,
                wall_time: start.elapsed(),
            });
        }
    }
    sort_records(&mut records);
    Ok(records)
}

fn run_point(ctx: &TrialContext<'_>, trials: u64, min_errors: Option<u64>) -> Result<(u64, u64), DecodeError> {
    let mut done = 0u64;
    let mut errors = 0u64;
    while done < trials {
        let end = (done + CHUNK).min(trials);
        let chunk_errors = (done..end)
            .into_par_iter()
            .map_init(|| ctx.workspace(), |ws, t| ctx.run(ws, t).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        errors += chunk_errors;
        done = end;
        if min_errors.is_some_and(|m| errors >= m) {
            break;
        }
    }
    Ok((done, errors))
}

fn sort_records(records: &mut [BlerRecord]) {
    records.sort_by(|a, b| {
        a.channel_param
            .total_cmp(&b.channel_param)
            .then_with(|| a.schedule.cmp(&b.schedule))
    });
}

/// Decimal notation with at most 10 significant digits and no exponent.
pub fn format_decimal(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.9e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = if exp >= 0 {
        let split = exp as usize + 1;
        if split >= digits.len() {
            format!("{digits}{}", "0".repeat(split - digits.len()))
        } else {
            format!("{}.{}", &digits[..split], &digits[split..])
        }
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    if out.contains('.') {
        out = out.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if x < 0.0 {
        out.insert(0, '-');
    }
    out
}

/// Writes records as CSV, sorted by channel parameter and then schedule label.
pub fn write_csv<W: std::io::Write>(records: &[BlerRecord], out: W) -> Result<(), csv::Error> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in &sorted {
        w.write_record([
            format_decimal(r.channel_param),
            r.schedule.clone(),
            r.iterations.to_string(),
            r.trials.to_string(),
            r.block_errors.to_string(),
            format_decimal(r.bler),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[BlerRecord], path: &Path) -> Result<(), SimError> {
    let out_err = |message: String| SimError::Output {
        path: path.display().to_string(),
        message,
    };
    let file = std::fs::File::create(path).map_err(|e| out_err(e.to_string()))?;
    write_csv(records, std::io::BufWriter::new(file)).map_err(|e| out_err(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(param: f64, label: &str, trials: u64, errors: u64) -> BlerRecord {
        BlerRecord {
            channel_param: param,
            schedule: label.into(),
            iterations: 3,
            trials,
            block_errors: errors,
            bler: errors as f64 / trials as f64,
            seed: 42,
            wall_time: Duration::ZERO,
        }
    }

    fn csv_string(records: &[BlerRecord]) -> String {
        let mut buf = Vec::new();
        write_csv(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn bec_config(params: &str, trials: u64, extra_run: &str) -> ExperimentConfig {
        let text = format!(
            "[code]\nfixture = 1\nlifting_size = 34\n[code.row_subcodes]\n1 = \"hamming_7_4\"\n2 = \"hamming_7_4\"\n3 = \"hamming_7_4\"\n\
             [channel]\ntype = \"bec\"\nparameters = [{params}]\n\
             [decoder]\nschedules = [\"1,2,3,4\", \"per_trial_random\"]\n\
             [run]\ntrials = {trials}\nseed = 7\n{extra_run}"
        );
        ExperimentConfig::parse(&text, Path::new(".")).unwrap()
    }

    #[test]
    fn header_only_for_no_records() {
        assert_eq!(csv_string(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn single_record_row() {
        let s = csv_string(&[record(0.3, "1,2,3,4", 1000, 17)]);
        assert_eq!(s, format!("{CSV_HEADER}\n0.3,\"1,2,3,4\",3,1000,17,0.017,42\n"));
    }

    #[test]
    fn rows_are_sorted() {
        let s = csv_string(&[record(0.4, "b", 10, 1), record(0.3, "b", 10, 1), record(0.3, "a", 10, 1)]);
        let labels: Vec<&str> = s.lines().skip(1).map(|l| &l[..5]).collect();
        assert_eq!(labels, vec!["0.3,a", "0.3,b", "0.4,b"]);
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(0.017), "0.017");
        assert_eq!(format_decimal(1000.0), "1000");
        assert_eq!(format_decimal(1.0 / 3.0), "0.3333333333");
        assert_eq!(format_decimal(2.5e-7), "0.00000025");
        assert_eq!(format_decimal(-1.25), "-1.25");
        assert_eq!(format_decimal(12345678901234.0), "12345678900000");
        assert_eq!(format_decimal(1.0), "1");
    }

    proptest! {
        #[test]
        fn decimal_round_trips_to_ten_digits(x in -1e6f64..1e6) {
            let s = format_decimal(x);
            prop_assert!(!s.contains('e'));
            let back: f64 = s.parse().unwrap();
            prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(1e-300));
        }

        #[test]
        fn wilson_contains_estimate(k in 0u64..1000, extra in 0u64..1000) {
            let n = k + extra + 1;
            let (lo, hi) = wilson_interval(k, n, 1.96);
            let p = k as f64 / n as f64;
            prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn stream_seeds_differ() {
        let a = stream_seed(&[1, 0, 0]);
        assert_ne!(a, stream_seed(&[1, 0, 1]));
        assert_ne!(a, stream_seed(&[1, 1, 0]));
        assert_ne!(stream_seed(&[0, 1]), stream_seed(&[1, 0]));
        assert_eq!(a, stream_seed(&[1, 0, 0]));
    }

    #[test]
    fn bec_extremes() {
        let recs = run_simulation(&bec_config("0.0, 1.0", 3, ""), Some(1)).unwrap();
        for r in &recs {
            let expected = if r.channel_param == 0.0 { 0 } else { r.trials };
            assert_eq!(r.block_errors, expected, "{r:?}");
            assert_eq!(r.trials, 3);
        }
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let cfg = bec_config("0.35, 0.4", 1100, "min_block_errors = 30\n");
        let a = run_simulation(&cfg, Some(1)).unwrap();
        let b = run_simulation(&cfg, Some(3)).unwrap();
        assert_eq!(csv_string(&a), csv_string(&b));
        assert!(a.iter().all(|r| r.trials % CHUNK == 0 || r.trials == 1100));
    }

    #[test]
    fn random_codewords_decode_like_all_zero() {
        let cfg = bec_config("0.3", 300, "transmit = \"random_codeword\"\n");
        let recs = run_simulation(&cfg, None).unwrap();
        assert!(recs.iter().all(|r| r.bler < 0.2));
    }

    #[test]
    fn emit_fails_on_missing_directory() {
        let err = emit_csv(&[], Path::new("/nonexistent-dir/x/out.csv"));
        assert!(matches!(err, Err(SimError::Output { .. })));
    }
}
