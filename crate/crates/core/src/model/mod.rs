//! Generator assembly: configuration, the canonical tensor manifest,
//! complexity and parameter accounting, and construction of the
//! immutable network that the engine runs.
//!
//! A [`Generator`] is conditioning-to-subband network plus filter bank:
//!
//! ```text
//! features ─ cond head (18→F) ──────────┐ (held to each block's rate)
//! pitch prior (embedding·corr) ─ block₀ ─ [↑ conv] block₁ … block₈ ─ head ─ tanh ─ PQMF⁻¹
//! ```
//!
//! Nine feature-modulated residual blocks run on a rising internal rate
//! schedule; where the rate increases, a sample-and-hold upsampler
//! followed by a learnable convolution bridges the gap. The generator
//! itself is immutable and shareable; all streaming state lives in
//! [`crate::engine::Session`].

mod layers;
mod weights;

pub use layers::{
    pitch_prior, tade_modulate, BlockScratch, ResBlockState, TadeLayer, TadeResBlock, TadeState,
    NORM_EPS,
};
pub use weights::{fnv1a64, Tensor, WeightStore, WEIGHTS_MAGIC, WEIGHTS_VERSION};

use crate::bitstream::CEPSTRUM_DIM;
use crate::dsp::{ConvSpec, PqmfBank, PQMF_DEFAULT_BANDS};
use crate::error::{Error, Result};

// --- Constants ---

/// Kernel width of the conditioning head (18-dim features → F channels).
pub const COND_KERNEL: usize = 3;

/// Default seed for [`random_weights`] fixtures.
pub const DEFAULT_WEIGHT_SEED: u64 = 0x5747_5300;

// --- Configuration ---

/// Structural hyper-parameters of the generator.
///
/// The default configuration is the shipped design: 64 hidden channels,
/// kernel 9, 80 conditioning channels, nine blocks rising from 100 Hz
/// to 4 kHz internal rate, four synthesis bands at 16 kHz output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    /// Content channel width `L` of every residual block.
    pub hidden: usize,
    /// Kernel width `K` of block, upsampler, and head convolutions.
    pub kernel: usize,
    /// Conditioning width `F` produced by the cond head.
    pub cond_channels: usize,
    /// Internal sample rate of each block, in Hz, non-decreasing.
    pub rate_schedule: Vec<u32>,
    /// Synthesis filter-bank band count `N`.
    pub bands: usize,
    /// Output sample rate in Hz.
    pub sample_rate: u32,
    /// Frame length in milliseconds (one conditioning vector per frame).
    pub frame_ms: u32,
    /// Pitch-lag vocabulary size (embedding rows).
    pub pitch_vocab: usize,
    /// Prior embedding width; must equal `hidden` so block 0 needs no
    /// input projection.
    pub prior_channels: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            hidden: 64,
            kernel: 9,
            cond_channels: 80,
            rate_schedule: vec![100, 200, 500, 1000, 2000, 4000, 4000, 4000, 4000],
            bands: 4,
            sample_rate: 16_000,
            frame_ms: 10,
            pitch_vocab: 64,
            prior_channels: 64,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.kernel == 0 || self.cond_channels == 0 {
            return Err(Error::validation("channel and kernel sizes must be nonzero"));
        }
        if self.prior_channels != self.hidden {
            return Err(Error::validation(
                "prior width must equal the hidden width (block 0 has no input projection)",
            ));
        }
        if self.pitch_vocab == 0 || self.pitch_vocab > 256 {
            return Err(Error::validation(
                "pitch vocabulary must fit an 8-bit lag index",
            ));
        }
        if self.bands != PQMF_DEFAULT_BANDS {
            return Err(Error::validation(
                "the synthesis filter-bank prototype is tuned for 4 bands",
            ));
        }
        if self.rate_schedule.is_empty() {
            return Err(Error::validation("rate schedule is empty"));
        }
        let mut prev = 0u32;
        for &rate in &self.rate_schedule {
            if rate == 0 || rate < prev {
                return Err(Error::validation(
                    "rate schedule must be positive and non-decreasing",
                ));
            }
            if (rate as u64 * self.frame_ms as u64) % 1000 != 0 {
                return Err(Error::validation(format!(
                    "rate {rate} Hz does not give a whole number of steps per {} ms frame",
                    self.frame_ms
                )));
            }
            prev = rate;
        }
        if self.rate_schedule[0] as u64 * self.frame_ms as u64 != 1000 {
            return Err(Error::validation(
                "the first block must run at one step per frame (the conditioning rate)",
            ));
        }
        let last = *self.rate_schedule.last().unwrap() as u64;
        if last * self.bands as u64 != self.sample_rate as u64 {
            return Err(Error::validation(
                "last block rate × band count must equal the output sample rate",
            ));
        }
        if (self.sample_rate as u64 * self.frame_ms as u64) % 1000 != 0 {
            return Err(Error::validation(
                "frame length is not a whole number of output samples",
            ));
        }
        Ok(())
    }

    /// Output samples per frame (160 for the default 10 ms at 16 kHz).
    pub fn frame_samples(&self) -> usize {
        (self.sample_rate as u64 * self.frame_ms as u64 / 1000) as usize
    }

    /// Internal steps block `i` advances per frame.
    pub fn steps_per_frame(&self, block: usize) -> usize {
        (self.rate_schedule[block] as u64 * self.frame_ms as u64 / 1000) as usize
    }

    /// Reduced upsampling ratio `(p, q)` applied before block `i`, or
    /// `None` where the rate carries over unchanged.
    pub fn upsampler_ratio(&self, block: usize) -> Option<(u32, u32)> {
        if block == 0 {
            return None;
        }
        let (from, to) = (self.rate_schedule[block - 1], self.rate_schedule[block]);
        if from == to {
            return None;
        }
        let g = gcd(to, from);
        Some((to / g, from / g))
    }

    /// Serializes to the `key = value` document embedded in weight
    /// containers. Line order is fixed, so equal configs produce equal
    /// documents (and equal fingerprints).
    pub fn to_doc(&self) -> String {
        let rates: Vec<String> = self.rate_schedule.iter().map(u32::to_string).collect();
        format!(
            "hidden = {}\nkernel = {}\ncond_channels = {}\nrate_schedule = {}\nbands = {}\nsample_rate = {}\nframe_ms = {}\npitch_vocab = {}\nprior_channels = {}\n",
            self.hidden,
            self.kernel,
            self.cond_channels,
            rates.join(","),
            self.bands,
            self.sample_rate,
            self.frame_ms,
            self.pitch_vocab,
            self.prior_channels,
        )
    }

    pub fn from_doc(doc: &str) -> Result<Self> {
        let mut cfg = GeneratorConfig::default();
        let mut seen = [false; 9];
        for (lineno, line) in doc.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::format(format!("config line {}: missing `=`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let parse_usize = || -> Result<usize> {
                value
                    .parse()
                    .map_err(|_| Error::format(format!("config key `{key}`: bad value `{value}`")))
            };
            let parse_u32 = || -> Result<u32> {
                value
                    .parse()
                    .map_err(|_| Error::format(format!("config key `{key}`: bad value `{value}`")))
            };
            let slot = match key {
                "hidden" => {
                    cfg.hidden = parse_usize()?;
                    0
                }
                "kernel" => {
                    cfg.kernel = parse_usize()?;
                    1
                }
                "cond_channels" => {
                    cfg.cond_channels = parse_usize()?;
                    2
                }
                "rate_schedule" => {
                    cfg.rate_schedule = value
                        .split(',')
                        .map(|s| {
                            s.trim().parse().map_err(|_| {
                                Error::format(format!("config rate_schedule: bad rate `{s}`"))
                            })
                        })
                        .collect::<Result<_>>()?;
                    3
                }
                "bands" => {
                    cfg.bands = parse_usize()?;
                    4
                }
                "sample_rate" => {
                    cfg.sample_rate = parse_u32()?;
                    5
                }
                "frame_ms" => {
                    cfg.frame_ms = parse_u32()?;
                    6
                }
                "pitch_vocab" => {
                    cfg.pitch_vocab = parse_usize()?;
                    7
                }
                "prior_channels" => {
                    cfg.prior_channels = parse_usize()?;
                    8
                }
                _ => return Err(Error::format(format!("config: unknown key `{key}`"))),
            };
            if seen[slot] {
                return Err(Error::format(format!("config: duplicate key `{key}`")));
            }
            seen[slot] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            const KEYS: [&str; 9] = [
                "hidden",
                "kernel",
                "cond_channels",
                "rate_schedule",
                "bands",
                "sample_rate",
                "frame_ms",
                "pitch_vocab",
                "prior_channels",
            ];
            return Err(Error::format(format!(
                "config: missing key `{}`",
                KEYS[missing]
            )));
        }
        Ok(cfg)
    }

    /// Fingerprint of the serialized config; weight containers carry it
    /// so a store can only build the network it was made for.
    pub fn fingerprint(&self) -> u64 {
        fnv1a64(self.to_doc().as_bytes())
    }

    /// Canonical tensor list `(name, shape)` in graph order. This is
    /// the complete weight contract: a store must hold exactly these.
    pub fn tensor_manifest(&self) -> Vec<(String, Vec<usize>)> {
        let (l, k, f) = (self.hidden, self.kernel, self.cond_channels);
        let mut m: Vec<(String, Vec<usize>)> = Vec::new();
        m.push(("prior.embedding".into(), vec![self.pitch_vocab, self.prior_channels]));
        m.push(("cond_head.conv.weight".into(), vec![f, CEPSTRUM_DIM, COND_KERNEL]));
        m.push(("cond_head.conv.bias".into(), vec![f]));
        for i in 0..self.rate_schedule.len() {
            if self.upsampler_ratio(i).is_some() {
                m.push((format!("upsample.{i}.conv.weight"), vec![l, l, k]));
                m.push((format!("upsample.{i}.conv.bias"), vec![l]));
            }
            m.push((format!("blocks.{i}.tade.aux.weight"), vec![l, f, k]));
            m.push((format!("blocks.{i}.tade.aux.bias"), vec![l]));
            m.push((format!("blocks.{i}.tade.mod.weight"), vec![2 * l, l, k]));
            m.push((format!("blocks.{i}.tade.mod.bias"), vec![2 * l]));
            m.push((format!("blocks.{i}.conv1.weight"), vec![2 * l, l, k]));
            m.push((format!("blocks.{i}.conv1.bias"), vec![2 * l]));
            m.push((format!("blocks.{i}.conv2.weight"), vec![2 * l, l, k]));
            m.push((format!("blocks.{i}.conv2.bias"), vec![2 * l]));
        }
        m.push(("head.conv.weight".into(), vec![self.bands, l, k]));
        m.push(("head.conv.bias".into(), vec![self.bands]));
        m
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// --- Complexity accounting ---

/// Multiply-accumulates per second attributed to one residual block at
/// `rate` Hz: `(F + 5L)·L·K` per output step.
///
/// This is the conventional complexity figure for the block: it counts
/// the weight multiplies of the four convolutions with the modulation
/// conv folded into the content term, and ignores bias adds,
/// normalization, and activations. The implemented block performs
/// `(F + 6L)·L·K` true multiplies per step; the quoted figure is the
/// accounting convention the complexity budget is stated in, kept here
/// so the total stays comparable with that budget.
pub fn block_macs_per_second(cond_channels: usize, hidden: usize, kernel: usize, rate: u32) -> u64 {
    ((cond_channels + 5 * hidden) * hidden * kernel) as u64 * rate as u64
}

/// Multiply-accumulates per second of one upsampling conv at its output
/// rate: `L²·K` per emitted step.
pub fn upsampler_macs_per_second(hidden: usize, kernel: usize, out_rate: u32) -> u64 {
    (hidden * hidden * kernel) as u64 * out_rate as u64
}

/// One line of the complexity report.
#[derive(Debug, Clone)]
pub struct MacEntry {
    pub name: String,
    pub rate_hz: u32,
    pub macs_per_second: u64,
}

/// Per-layer and total multiply-accumulate rate of a configuration.
#[derive(Debug, Clone)]
pub struct MacReport {
    pub entries: Vec<MacEntry>,
    pub total_macs_per_second: u64,
}

impl MacReport {
    pub fn total_gmacs(&self) -> f64 {
        self.total_macs_per_second as f64 / 1e9
    }
}

/// Closed-form complexity of a configuration, exact in integers.
///
/// Covers the dominant terms: the nine modulated blocks and the
/// upsampling convolutions. The conditioning head and output projection
/// are an order of magnitude smaller and excluded by convention.
pub fn mac_count(config: &GeneratorConfig) -> MacReport {
    let mut entries = Vec::new();
    let mut total = 0u64;
    for (i, &rate) in config.rate_schedule.iter().enumerate() {
        if config.upsampler_ratio(i).is_some() {
            let macs = upsampler_macs_per_second(config.hidden, config.kernel, rate);
            total += macs;
            entries.push(MacEntry {
                name: format!("upsample.{i}"),
                rate_hz: rate,
                macs_per_second: macs,
            });
        }
        let macs = block_macs_per_second(config.cond_channels, config.hidden, config.kernel, rate);
        total += macs;
        entries.push(MacEntry {
            name: format!("blocks.{i}"),
            rate_hz: rate,
            macs_per_second: macs,
        });
    }
    MacReport {
        entries,
        total_macs_per_second: total,
    }
}

// --- Parameter accounting ---

/// One line of the parameter report: a module and its scalar count.
#[derive(Debug, Clone)]
pub struct ParamGroup {
    pub name: String,
    pub parameters: u64,
}

/// Stored-scalar count of a weight store with a per-module breakdown.
#[derive(Debug, Clone)]
pub struct ParamReport {
    pub groups: Vec<ParamGroup>,
    pub total: u64,
}

/// Counts every stored scalar, grouped by module prefix
/// (`blocks.3.conv1.weight` → `blocks.3`, `head.conv.bias` → `head`).
pub fn param_count(store: &WeightStore) -> ParamReport {
    let mut groups: Vec<ParamGroup> = Vec::new();
    let mut total = 0u64;
    for tensor in store.tensors() {
        let mut parts = tensor.name.split('.');
        let first = parts.next().unwrap_or("");
        let group = match first {
            "blocks" | "upsample" => match parts.next() {
                Some(idx) => format!("{first}.{idx}"),
                None => first.to_string(),
            },
            _ => first.to_string(),
        };
        let n = tensor.element_count() as u64;
        total += n;
        match groups.iter_mut().find(|g| g.name == group) {
            Some(g) => g.parameters += n,
            None => groups.push(ParamGroup {
                name: group,
                parameters: n,
            }),
        }
    }
    ParamReport { groups, total }
}

// --- Weight fixtures ---

/// Deterministic seeded weights for the full manifest of `config`.
/// Same seed, same config → bit-identical store.
pub fn random_weights(config: &GeneratorConfig, seed: u64) -> WeightStore {
    let mut store = WeightStore::new(config.to_doc());
    weights::fill_random(&mut store, seed, &config.tensor_manifest());
    store
}

/// All-zero weights for the full manifest; the generator built from
/// them emits exactly zero PCM, which makes plumbing bugs loud.
pub fn zero_weights(config: &GeneratorConfig) -> WeightStore {
    let mut store = WeightStore::new(config.to_doc());
    for (name, shape) in config.tensor_manifest() {
        let elems = shape.iter().product();
        store
            .insert(&name, shape, vec![0.0; elems])
            .expect("manifest names are unique");
    }
    store
}

// --- Generator ---

/// Rate-bridging stage before a block: sample-and-hold by `p/q`, then a
/// learnable conv at the output rate.
#[derive(Debug, Clone)]
pub struct SignalUpsampler {
    ratio: (u32, u32),
    conv: ConvSpec,
}

impl SignalUpsampler {
    /// Reduced `(p, q)` hold ratio.
    pub fn ratio(&self) -> (u32, u32) {
        self.ratio
    }

    pub fn conv(&self) -> &ConvSpec {
        &self.conv
    }
}

/// The immutable generator network: weights bound to structure, plus
/// the synthesis filter bank. Shareable across threads; all per-stream
/// state lives in [`crate::engine::Session`].
#[derive(Debug)]
pub struct Generator {
    config: GeneratorConfig,
    embedding: Vec<f32>,
    cond_head: ConvSpec,
    upsamplers: Vec<Option<SignalUpsampler>>,
    blocks: Vec<TadeResBlock>,
    head: ConvSpec,
    pqmf: PqmfBank,
    weights_fingerprint: u64,
}

impl Generator {
    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    /// Pitch embedding table, `[pitch_vocab][prior_channels]` row-major.
    pub fn embedding(&self) -> &[f32] {
        &self.embedding
    }

    pub fn cond_head(&self) -> &ConvSpec {
        &self.cond_head
    }

    pub fn blocks(&self) -> &[TadeResBlock] {
        &self.blocks
    }

    pub fn upsampler(&self, block: usize) -> Option<&SignalUpsampler> {
        self.upsamplers[block].as_ref()
    }

    pub fn head(&self) -> &ConvSpec {
        &self.head
    }

    pub fn pqmf(&self) -> &PqmfBank {
        &self.pqmf
    }

    /// Content fingerprint of the weight store this generator was built
    /// from; two generators with equal fingerprints decode identically.
    pub fn weights_fingerprint(&self) -> u64 {
        self.weights_fingerprint
    }

    pub fn frame_samples(&self) -> usize {
        self.config.frame_samples()
    }
}

/// Binds a weight store to a configuration, validating completeness and
/// every shape. Errors name the offending tensor.
pub fn build_generator(config: &GeneratorConfig, store: &WeightStore) -> Result<Generator> {
    config.validate()?;
    if store.config_fingerprint() != config.fingerprint() {
        return Err(Error::validation(
            "weight store was built for a different configuration (fingerprint mismatch)",
        ));
    }

    let manifest = config.tensor_manifest();
    for (name, shape) in &manifest {
        let tensor = store
            .get(name)
            .ok_or_else(|| Error::validation(format!("missing tensor `{name}`")))?;
        if tensor.shape != *shape {
            return Err(Error::validation(format!(
                "tensor `{name}` has shape {:?}, expected {:?}",
                tensor.shape, shape
            )));
        }
    }
    for tensor in store.tensors() {
        if !manifest.iter().any(|(name, _)| *name == tensor.name) {
            return Err(Error::validation(format!(
                "unexpected tensor `{}` not in the manifest",
                tensor.name
            )));
        }
    }

    let data = |name: &str| &store.get(name).unwrap().data;
    let conv = |prefix: &str, ic: usize, oc: usize, k: usize, d: usize| -> Result<ConvSpec> {
        ConvSpec::new(
            ic,
            oc,
            k,
            d,
            data(&format!("{prefix}.weight")),
            data(&format!("{prefix}.bias")),
        )
    };

    let (l, k, f) = (config.hidden, config.kernel, config.cond_channels);
    let cond_head = conv("cond_head.conv", CEPSTRUM_DIM, f, COND_KERNEL, 1)?;
    let mut upsamplers = Vec::with_capacity(config.rate_schedule.len());
    let mut blocks = Vec::with_capacity(config.rate_schedule.len());
    for i in 0..config.rate_schedule.len() {
        upsamplers.push(match config.upsampler_ratio(i) {
            Some(ratio) => Some(SignalUpsampler {
                ratio,
                conv: conv(&format!("upsample.{i}.conv"), l, l, k, 1)?,
            }),
            None => None,
        });
        let tade = TadeLayer::new(
            conv(&format!("blocks.{i}.tade.aux"), f, l, k, 1)?,
            conv(&format!("blocks.{i}.tade.mod"), l, 2 * l, k, 1)?,
        )?;
        blocks.push(TadeResBlock::new(
            tade,
            conv(&format!("blocks.{i}.conv1"), l, 2 * l, k, 1)?,
            conv(&format!("blocks.{i}.conv2"), l, 2 * l, k, 2)?,
        )?);
    }
    let head = conv("head.conv", l, config.bands, k, 1)?;

    Ok(Generator {
        config: config.clone(),
        embedding: data("prior.embedding").clone(),
        cond_head,
        upsamplers,
        blocks,
        head,
        pqmf: PqmfBank::default_bank(),
        weights_fingerprint: store.content_fingerprint(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_complexity_is_exact() {
        let report = mac_count(&GeneratorConfig::default());
        assert_eq!(report.total_macs_per_second, 4_845_772_800);
        // blocks: (80+320)·64·9 per step over Σrates=19800; upsamplers:
        // 64²·9 per step over Σout_rates=7700
        assert_eq!(
            report.total_macs_per_second,
            400 * 64 * 9 * 19_800 + 4096 * 9 * 7_700
        );
        assert!((report.total_gmacs() - 4.8458).abs() < 1e-3);
        // entries sum to the total
        let sum: u64 = report.entries.iter().map(|e| e.macs_per_second).sum();
        assert_eq!(sum, report.total_macs_per_second);
        // 9 blocks + 5 upsamplers
        assert_eq!(report.entries.len(), 14);
    }

    #[test]
    fn block_macs_degenerate_case() {
        // no conditioning, 1 Hz → the formula collapses to 5L²K
        let (l, k) = (64usize, 9usize);
        assert_eq!(block_macs_per_second(0, l, k, 1), (5 * l * l * k) as u64);
    }

    #[test]
    fn default_parameter_count_is_within_budget() {
        let cfg = GeneratorConfig::default();
        let report = param_count(&random_weights(&cfg, 1));
        assert_eq!(report.total, 2_604_852);
        let target = 2.73e6;
        let delta = (report.total as f64 - target) / target;
        assert!(delta.abs() <= 0.10, "parameter delta {delta:+.3}");
        // breakdown sums to the total
        let sum: u64 = report.groups.iter().map(|g| g.parameters).sum();
        assert_eq!(sum, report.total);
        // every block costs the same
        let block: Vec<u64> = report
            .groups
            .iter()
            .filter(|g| g.name.starts_with("blocks."))
            .map(|g| g.parameters)
            .collect();
        assert_eq!(block.len(), 9);
        assert!(block.iter().all(|&p| p == 267_712));
    }

    #[test]
    fn empty_store_counts_zero() {
        let report = param_count(&WeightStore::new(String::new()));
        assert_eq!(report.total, 0);
        assert!(report.groups.is_empty());
    }

    #[test]
    fn doubling_hidden_roughly_quadruples_block_params() {
        let base = GeneratorConfig::default();
        let mut wide = base.clone();
        wide.hidden = 128;
        wide.prior_channels = 128;
        let block_total = |cfg: &GeneratorConfig| -> u64 {
            param_count(&random_weights(cfg, 1))
                .groups
                .iter()
                .filter(|g| g.name.starts_with("blocks."))
                .map(|g| g.parameters)
                .sum()
        };
        let ratio = block_total(&wide) as f64 / block_total(&base) as f64;
        // 3 of 4 convs are L→2L (quadratic in L); the aux conv is linear
        assert!((3.2..=4.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn seeded_weights_are_reproducible() {
        let cfg = GeneratorConfig::default();
        let a = random_weights(&cfg, 7);
        let b = random_weights(&cfg, 7);
        let c = random_weights(&cfg, 8);
        assert_eq!(a.content_fingerprint(), b.content_fingerprint());
        assert_ne!(a.content_fingerprint(), c.content_fingerprint());
    }

    #[test]
    fn seeded_store_builds_the_default_generator() {
        let cfg = GeneratorConfig::default();
        let gen = build_generator(&cfg, &random_weights(&cfg, 3)).unwrap();
        assert_eq!(gen.blocks().len(), 9);
        let ratios: Vec<Option<(u32, u32)>> = (0..9).map(|i| gen.upsampler(i).map(|u| u.ratio())).collect();
        assert_eq!(
            ratios,
            vec![
                None,
                Some((2, 1)),
                Some((5, 2)),
                Some((2, 1)),
                Some((2, 1)),
                Some((2, 1)),
                None,
                None,
                None,
            ]
        );
        assert_eq!(gen.frame_samples(), 160);
        assert_eq!(gen.pqmf().bands(), 4);
    }

    #[test]
    fn build_names_missing_tensor() {
        let cfg = GeneratorConfig::default();
        let mut store = WeightStore::new(cfg.to_doc());
        for (name, shape) in cfg.tensor_manifest() {
            if name == "blocks.4.conv1.weight" {
                continue;
            }
            let elems = shape.iter().product();
            store.insert(&name, shape, vec![0.0; elems]).unwrap();
        }
        let err = build_generator(&cfg, &store).unwrap_err().to_string();
        assert!(err.contains("blocks.4.conv1.weight"), "{err}");
    }

    #[test]
    fn build_names_misshaped_tensor() {
        let cfg = GeneratorConfig::default();
        let mut store = WeightStore::new(cfg.to_doc());
        for (name, mut shape) in cfg.tensor_manifest() {
            if name == "head.conv.weight" {
                shape = vec![4, 64, 7]; // wrong kernel width
            }
            let elems = shape.iter().product();
            store.insert(&name, shape, vec![0.0; elems]).unwrap();
        }
        let err = build_generator(&cfg, &store).unwrap_err().to_string();
        assert!(err.contains("head.conv.weight"), "{err}");
    }

    #[test]
    fn build_names_unexpected_tensor() {
        let cfg = GeneratorConfig::default();
        let mut store = zero_weights(&cfg);
        store.insert("debug.extra", vec![2], vec![0.0; 2]).unwrap();
        let err = build_generator(&cfg, &store).unwrap_err().to_string();
        assert!(err.contains("debug.extra"), "{err}");
    }

    #[test]
    fn build_rejects_foreign_config_store() {
        let cfg = GeneratorConfig::default();
        let mut other = cfg.clone();
        other.kernel = 7;
        let store = random_weights(&other, 1);
        let err = build_generator(&cfg, &store).unwrap_err().to_string();
        assert!(err.contains("fingerprint"), "{err}");
    }

    #[test]
    fn config_doc_round_trips() {
        let cfg = GeneratorConfig::default();
        let parsed = GeneratorConfig::from_doc(&cfg.to_doc()).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(parsed.fingerprint(), cfg.fingerprint());
    }

    #[test]
    fn config_doc_rejects_malformed_input() {
        assert!(GeneratorConfig::from_doc("hidden 64").is_err());
        assert!(GeneratorConfig::from_doc("mystery = 3").is_err());
        assert!(GeneratorConfig::from_doc("hidden = sixty-four").is_err());
        // missing keys
        assert!(GeneratorConfig::from_doc("hidden = 64").is_err());
        // duplicate key
        let doc = GeneratorConfig::default().to_doc() + "hidden = 64\n";
        assert!(GeneratorConfig::from_doc(&doc).is_err());
    }

    #[test]
    fn config_validation_rejects_bad_schedules() {
        let base = GeneratorConfig::default();
        assert!(base.validate().is_ok());

        let mut c = base.clone();
        c.rate_schedule[3] = 400; // decreasing after 500
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.sample_rate = 8000; // last rate × bands ≠ fs
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.rate_schedule[2] = 550; // 5.5 steps per 10 ms frame
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.prior_channels = 32; // block 0 would need a projection
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.rate_schedule[0] = 200; // two steps per conditioning vector
        assert!(c.validate().is_err());
    }

    #[test]
    fn manifest_matches_design_totals() {
        let cfg = GeneratorConfig::default();
        let manifest = cfg.tensor_manifest();
        let total: usize = manifest
            .iter()
            .map(|(_, shape)| shape.iter().product::<usize>())
            .sum();
        assert_eq!(total, 2_604_852);
        // prior 4096 + cond head 4400 + 9 blocks + 5 upsamplers + head
        assert_eq!(
            total,
            4096 + 4400 + 9 * 267_712 + 5 * 36_928 + 2308
        );
    }
}
