//! Monte Carlo symbol-error-rate engine.
//!
//! Every SNR point is simulated in fixed-size batches. Batch `b` of point
//! `i` draws from its own ChaCha8 stream `(i << 40) | b` of the master seed,
//! and batches are merged strictly in index order, so a curve depends only
//! on the plan, never on the number of workers. The draws of a block do not
//! depend on the codebooks either: two codebook sets simulated with the same
//! plan see identical symbols, fading and noise.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::{complex_gaussian, db_to_linear, ChannelSpec, FadingRealization};
use crate::detection::{MlDetector, MpaDetector, ReceivedBlock, DEFAULT_MPA_ITERATIONS};
use crate::error::{Error, Result};
use crate::error_analysis::{ser_union_bound, SuperimposedCodewordSet};
use crate::progressive_builder::Codebook;

/// Receiver used by the simulator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DetectorKind {
    Ml,
    Mpa { iterations: usize, damping: f64 },
}

impl DetectorKind {
    pub fn mpa() -> Self {
        DetectorKind::Mpa { iterations: DEFAULT_MPA_ITERATIONS, damping: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub snr_points_db: Vec<f64>,
    /// A point stops once this many symbol errors are counted ...
    pub min_errors: u64,
    /// ... or after this many blocks, whichever comes first.
    pub max_trials: u64,
    pub master_seed: u64,
    pub detector: DetectorKind,
    /// Threads used for batch evaluation. Does not affect results.
    pub workers: usize,
    pub batch_size: u64,
}

impl SimulationPlan {
    pub fn new(snr_points_db: Vec<f64>, detector: DetectorKind) -> Self {
        SimulationPlan {
            snr_points_db,
            min_errors: 400,
            max_trials: 10_000_000,
            master_seed: 0,
            detector,
            workers: 1,
            batch_size: 2000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if self.snr_points_db.is_empty() {
            return bad("SNR list is empty".into());
        }
        if self.snr_points_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR list contains a non-finite value".into());
        }
        if self.snr_points_db.windows(2).any(|w| w[1] <= w[0]) {
            return bad("SNR list must be strictly increasing".into());
        }
        if self.min_errors == 0 || self.max_trials == 0 || self.batch_size == 0 || self.workers == 0 {
            return bad("min_errors, max_trials, batch_size and workers must be positive".into());
        }
        if let DetectorKind::Mpa { iterations, damping } = self.detector {
            if iterations == 0 || !(0.0..1.0).contains(&damping) {
                return bad(format!("invalid MPA settings: {iterations} iterations, damping {damping}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerPoint {
    pub snr_db: f64,
    pub ser: f64,
    pub errors: u64,
    pub trials: u64,
    pub ci95_halfwidth: f64,
}

impl SerPoint {
    fn new(snr_db: f64, errors: u64, trials: u64, users: usize) -> Self {
        let symbols = (trials * users as u64) as f64;
        let ser = errors as f64 / symbols;
        SerPoint { snr_db, ser, errors, trials, ci95_halfwidth: 1.96 * (ser * (1.0 - ser) / symbols).sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub codebook_hash: String,
    pub channel: ChannelSpec,
    pub detector: DetectorKind,
    pub single_user: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerCurve {
    pub points: Vec<SerPoint>,
    /// Union bound at each point, when attached.
    pub bound: Option<Vec<f64>>,
    pub metadata: CurveMetadata,
}

impl SerCurve {
    /// Attaches the union bound of the codebooks at every SNR point.
    pub fn attach_union_bound(&mut self, codebooks: &[Codebook]) -> Result<()> {
        let set = SuperimposedCodewordSet::from_codebooks(codebooks)?;
        let bound = self
            .points
            .iter()
            .map(|p| ser_union_bound(&set, &self.metadata.channel, db_to_linear(p.snr_db)))
            .collect::<Result<Vec<_>>>()?;
        self.bound = Some(bound);
        Ok(())
    }

    /// CSV with columns `snr_db,ser,errors,trials,ci95,bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr_db,ser,errors,trials,ci95,bound\n");
        for (i, p) in self.points.iter().enumerate() {
            let bound = self.bound.as_ref().map(|b| b[i].to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.snr_db, p.ser, p.errors, p.trials, p.ci95_halfwidth, bound
            ));
        }
        out
    }

    /// SNR at which the curve crosses `target`, interpolating `log10(SER)`
    /// linearly between the two bracketing points.
    pub fn snr_at_ser(&self, target: f64) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if a.ser >= target && target >= b.ser && a.ser > b.ser && b.ser > 0.0 {
                let t = (a.ser.log10() - target.log10()) / (a.ser.log10() - b.ser.log10());
                Some(a.snr_db + t * (b.snr_db - a.snr_db))
            } else {
                None
            }
        })
    }
}

/// SHA-256 over the dimensions and the IEEE-754 bits of every codeword entry.
pub fn codebook_hash(codebooks: &[Codebook]) -> String {
    let mut h = Sha256::new();
    h.update((codebooks.len() as u64).to_le_bytes());
    for cb in codebooks {
        h.update((cb.size() as u64).to_le_bytes());
        h.update((cb.res() as u64).to_le_bytes());
        for x in cb.codewords.iter().flatten() {
            h.update(x.re.to_bits().to_le_bytes());
            h.update(x.im.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

enum Receiver {
    Joint(MlDetector),
    Mpa(MpaDetector),
    /// Each user detected alone by ML over its own codewords.
    SingleUser,
}

struct Engine<'a> {
    codebooks: &'a [Codebook],
    spec: ChannelSpec,
    receiver: Receiver,
    supports: Vec<Vec<usize>>,
    m: usize,
    res: usize,
}

impl Engine<'_> {
    /// Symbol errors over `blocks` blocks drawn from one generator stream.
    fn batch(&self, seed: u64, stream: u64, blocks: u64, noise_power: f64) -> Result<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let users = self.codebooks.len();
        let noise_scale = (noise_power / 2.0).sqrt();
        let mut symbols = vec![0usize; users];
        let mut errors = 0;
        for _ in 0..blocks {
            for s in symbols.iter_mut() {
                *s = rng.random_range(0..self.m);
            }
            let channel = self.spec.sample(self.res, &mut rng);
            let noise: Vec<Complex64> = (0..self.res).map(|_| complex_gaussian(&mut rng) * noise_scale).collect();
            errors += match &self.receiver {
                Receiver::SingleUser => self.single_user_errors(&symbols, &channel, &noise),
                joint => {
                    let mut y = noise;
                    for (k, yk) in y.iter_mut().enumerate() {
                        let x: Complex64 = (0..users).map(|l| self.codebooks[l].codewords[symbols[l]][k]).sum();
                        *yk += channel.coefficients[k] * x;
                    }
                    let block = ReceivedBlock { observations: y, channel, noise_power };
                    let decided = match joint {
                        Receiver::Joint(ml) => ml.detect_pruned(&block)?,
                        Receiver::Mpa(mpa) => mpa.detect(&block)?,
                        Receiver::SingleUser => unreachable!(),
                    };
                    decided.symbols.iter().zip(&symbols).filter(|(a, b)| a != b).count() as u64
                }
            };
        }
        Ok(errors)
    }

    fn single_user_errors(&self, symbols: &[usize], channel: &FadingRealization, noise: &[Complex64]) -> u64 {
        let h = &channel.coefficients;
        let mut errors = 0;
        for ((cb, support), &sent) in self.codebooks.iter().zip(&self.supports).zip(symbols) {
            let y: Vec<Complex64> =
                support.iter().map(|&k| h[k] * cb.codewords[sent][k] + noise[k]).collect();
            let decided = (0..self.m)
                .map(|n| {
                    let d: f64 = support.iter().zip(&y).map(|(&k, &yk)| (yk - h[k] * cb.codewords[n][k]).norm_sqr()).sum();
                    (d, n)
                })
                .fold((f64::INFINITY, 0), |best, c| if c.0 < best.0 { c } else { best })
                .1;
            errors += u64::from(decided != sent);
        }
        errors
    }
}

fn check_codebooks(codebooks: &[Codebook]) -> Result<(usize, usize)> {
    let first = codebooks.first().ok_or_else(|| Error::Validation("no codebooks".into()))?;
    let (m, res) = (first.size(), first.res());
    if codebooks.iter().any(|cb| cb.size() != m || cb.codewords.iter().any(|c| c.len() != res)) {
        return Err(Error::Validation("codebooks have inconsistent dimensions".into()));
    }
    Ok((m, res))
}

fn simulate(plan: &SimulationPlan, codebooks: &[Codebook], spec: &ChannelSpec, single_user: bool) -> Result<SerCurve> {
    plan.validate()?;
    let spec = spec.validated()?;
    let (m, res) = check_codebooks(codebooks)?;
    let receiver = if single_user {
        Receiver::SingleUser
    } else {
        match plan.detector {
            DetectorKind::Ml => Receiver::Joint(MlDetector::new(codebooks)?),
            DetectorKind::Mpa { iterations, damping } => {
                Receiver::Mpa(MpaDetector::with_damping(codebooks, iterations, damping)?)
            }
        }
    };
    let supports = codebooks.iter().map(Codebook::support).collect();
    let engine = Engine { codebooks, spec, receiver, supports, m, res };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start {} workers: {e}", plan.workers)))?;

    let mut points = Vec::with_capacity(plan.snr_points_db.len());
    for (i, &snr_db) in plan.snr_points_db.iter().enumerate() {
        let noise_power = 1.0 / db_to_linear(snr_db);
        let (mut errors, mut trials, mut batch) = (0u64, 0u64, 0u64);
        while errors < plan.min_errors && trials < plan.max_trials {
            // one wave of batches; anything past the stopping batch is dropped
            let wave: Vec<(u64, u64)> = (0..plan.workers as u64)
                .map(|w| batch + w)
                .scan(trials, |start, b| {
                    let size = plan.batch_size.min(plan.max_trials - *start);
                    *start += size;
                    (size > 0).then_some((b, size))
                })
                .collect();
            let counts = pool.install(|| {
                wave.par_iter()
                    .map(|&(b, size)| engine.batch(plan.master_seed, ((i as u64) << 40) | b, size, noise_power))
                    .collect::<Result<Vec<u64>>>()
            })?;
            for (&(_, size), count) in wave.iter().zip(counts) {
                errors += count;
                trials += size;
                batch += 1;
                if errors >= plan.min_errors {
                    break;
                }
            }
        }
        points.push(SerPoint::new(snr_db, errors, trials, codebooks.len()));
    }
    Ok(SerCurve {
        points,
        bound: None,
        metadata: CurveMetadata { codebook_hash: codebook_hash(codebooks), channel: spec, detector: plan.detector, single_user },
    })
}

/// Simulates the full multiuser system with the plan's detector.
pub fn run(plan: &SimulationPlan, codebooks: &[Codebook], spec: &ChannelSpec) -> Result<SerCurve> {
    simulate(plan, codebooks, spec, false)
}

/// Simulates every user alone on its occupied REs (ML over its `M`
/// codewords) and averages the SER over users.
pub fn single_user_bound_curve(codebooks: &[Codebook], spec: &ChannelSpec, plan: &SimulationPlan) -> Result<SerCurve> {
    simulate(plan, codebooks, spec, true)
}
