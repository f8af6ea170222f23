//! Deterministic codebooks and packet dequantization.
//!
//! The decoder ships its own codebook set rather than interoperating with
//! any particular encoder's tables: scalar fields (lag, correlation,
//! energy, interpolation weight) use fixed uniform grids, and the
//! multi-stage cepstrum codebooks are reproducible from a seed. Packet
//! *format* compatibility is the goal, table compatibility is not.
//!
//! Dequantization maps one 64-bit packet to four 10 ms conditioning
//! frames: the cepstrum field decodes two anchor frames (frame 1
//! absolute, frame 3 absolute + delta) and the remaining two frames are
//! interpolated, frame 0 against the previous packet's final anchor.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{CodedPacket, FeatureFrame, CEPSTRUM_DIM, FRAMES_PER_PACKET};
use crate::error::{Error, Result};

// --- Constants ---

/// Codebook file magic bytes.
pub const CODEBOOK_MAGIC: [u8; 4] = *b"SMGC";
/// Current codebook format version.
pub const CODEBOOK_VERSION: u16 = 1;
/// Seed of the default codebook set.
pub const DEFAULT_CODEBOOK_SEED: u64 = 0xC0DE_B00C;

/// The 30-bit absolute index splits into three 10-bit stage indices.
const ABS_STAGES: usize = 3;
const ABS_STAGE_SIZE: usize = 1 << 10;
/// Per-stage amplitude of the absolute codebook entries; later stages
/// refine with smaller steps.
const ABS_STAGE_AMPL: [f32; ABS_STAGES] = [0.5, 0.25, 0.125];

/// The 13-bit delta index splits into 7-bit and 6-bit stage indices.
const DELTA_STAGE_SIZES: [usize; 2] = [1 << 7, 1 << 6];
const DELTA_STAGE_AMPL: [f32; 2] = [0.25, 0.125];

/// One codebook per packet field. Scalar grids are stored inline; the
/// vector stages are flat row-major tables of 18-dim entries.
#[derive(Clone, PartialEq)]
pub struct CodebookSet {
    // Debug is implemented by hand below: dumping ~59k floats into a
    // panic message helps nobody.
    pub version: u16,
    /// Pitch lag in samples at 16 kHz for each 6-bit lag index
    /// (log-spaced 32..256, i.e. 500 Hz down to 62.5 Hz).
    pub lag_table: [f32; 64],
    /// Voicing strength for each 2-bit correlation index.
    pub corr_table: [f32; 4],
    /// Energy offset added to c0, for each 7-bit energy index.
    pub energy_table: [f32; 128],
    /// Interpolation weight for each 3-bit rule index. Index 0 copies
    /// the right anchor, 1 the left, 2 the midpoint; the rest are fixed
    /// convex blends.
    pub interp_table: [f32; 8],
    /// Per-frame pitch-lag offsets for each 3-bit modulation index.
    /// Pattern 0 is all zeros (constant pitch).
    pub mod_table: [[i8; FRAMES_PER_PACKET]; 8],
    /// `ABS_STAGES × ABS_STAGE_SIZE × CEPSTRUM_DIM`, stage-major.
    abs_stages: Vec<f32>,
    /// Both delta stages concatenated, stage-major. Entry 0 of each
    /// stage is pinned to zero so a delta index of 0 encodes "no change".
    delta_stages: Vec<f32>,
}

/// Uniform draw in `[-amplitude, amplitude)` from the top 24 bits.
fn uniform(rng: &mut ChaCha8Rng, amplitude: f32) -> f32 {
    let u = (rng.next_u32() >> 8) as f32 / (1u32 << 24) as f32;
    (2.0 * u - 1.0) * amplitude
}

impl CodebookSet {
    /// Builds the full set from a seed. Identical seeds give identical
    /// tables; the scalar grids do not depend on the seed at all.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut abs_stages = vec![0.0f32; ABS_STAGES * ABS_STAGE_SIZE * CEPSTRUM_DIM];
        for (stage, chunk) in abs_stages
            .chunks_exact_mut(ABS_STAGE_SIZE * CEPSTRUM_DIM)
            .enumerate()
        {
            for v in chunk {
                *v = uniform(&mut rng, ABS_STAGE_AMPL[stage]);
            }
        }

        let delta_len: usize = DELTA_STAGE_SIZES.iter().sum::<usize>() * CEPSTRUM_DIM;
        let mut delta_stages = vec![0.0f32; delta_len];
        let mut base = 0;
        for (size, ampl) in DELTA_STAGE_SIZES.iter().zip(DELTA_STAGE_AMPL) {
            for v in &mut delta_stages[base..base + size * CEPSTRUM_DIM] {
                *v = uniform(&mut rng, ampl);
            }
            // entry 0 stays the zero vector so stationary cepstra are
            // representable exactly
            delta_stages[base..base + CEPSTRUM_DIM].fill(0.0);
            base += size * CEPSTRUM_DIM;
        }

        let mut lag_table = [0.0f32; 64];
        for (i, lag) in lag_table.iter_mut().enumerate() {
            *lag = (32.0 * 8f64.powf(i as f64 / 63.0)) as f32;
        }
        let mut energy_table = [0.0f32; 128];
        for (i, e) in energy_table.iter_mut().enumerate() {
            *e = (-2.0 + 8.0 * i as f64 / 127.0) as f32;
        }

        CodebookSet {
            version: CODEBOOK_VERSION,
            lag_table,
            corr_table: [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            energy_table,
            interp_table: [1.0, 0.0, 0.5, 0.125, 0.25, 0.375, 0.625, 0.75],
            mod_table: [
                [0, 0, 0, 0],
                [0, 0, 0, 1],
                [0, 0, 1, 1],
                [0, 1, 1, 2],
                [0, 0, 0, -1],
                [0, 0, -1, -1],
                [0, -1, -1, -2],
                [0, 1, 2, 3],
            ],
            abs_stages,
            delta_stages,
        }
    }

    /// One entry of an absolute codebook stage.
    pub fn abs_entry(&self, stage: usize, index: usize) -> &[f32] {
        let base = (stage * ABS_STAGE_SIZE + index) * CEPSTRUM_DIM;
        &self.abs_stages[base..base + CEPSTRUM_DIM]
    }

    /// One entry of a delta codebook stage.
    pub fn delta_entry(&self, stage: usize, index: usize) -> &[f32] {
        let base = (DELTA_STAGE_SIZES[..stage].iter().sum::<usize>() + index) * CEPSTRUM_DIM;
        &self.delta_stages[base..base + CEPSTRUM_DIM]
    }

    /// Decodes the 30-bit absolute field: three 10-bit stage indices,
    /// most significant stage first, entries summed.
    pub fn decode_abs(&self, idx: u32) -> [f32; CEPSTRUM_DIM] {
        let mut out = [0.0f32; CEPSTRUM_DIM];
        for stage in 0..ABS_STAGES {
            let sub = ((idx >> (10 * (ABS_STAGES - 1 - stage))) & 0x3ff) as usize;
            for (o, e) in out.iter_mut().zip(self.abs_entry(stage, sub)) {
                *o += e;
            }
        }
        out
    }

    /// Decodes the 13-bit delta field: a 7-bit then a 6-bit stage index,
    /// entries summed.
    pub fn decode_delta(&self, idx: u16) -> [f32; CEPSTRUM_DIM] {
        let subs = [(idx >> 6) as usize, (idx & 0x3f) as usize];
        let mut out = [0.0f32; CEPSTRUM_DIM];
        for (stage, sub) in subs.into_iter().enumerate() {
            for (o, e) in out.iter_mut().zip(self.delta_entry(stage, sub)) {
                *o += e;
            }
        }
        out
    }

    /// Serializes to the flat "SMGC" file layout (little-endian).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::byte_len());
        out.extend_from_slice(&CODEBOOK_MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        let scalars = self
            .lag_table
            .iter()
            .chain(&self.corr_table)
            .chain(&self.energy_table)
            .chain(&self.interp_table);
        for v in scalars {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for pattern in &self.mod_table {
            out.extend_from_slice(&pattern.map(|o| o as u8));
        }
        for v in self.abs_stages.iter().chain(&self.delta_stages) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Exact serialized size in bytes.
    pub fn byte_len() -> usize {
        let scalars = 64 + 4 + 128 + 8;
        let vectors =
            (ABS_STAGES * ABS_STAGE_SIZE + DELTA_STAGE_SIZES.iter().sum::<usize>()) * CEPSTRUM_DIM;
        4 + 2 + scalars * 4 + 32 + vectors * 4
    }

    /// Parses and validates the flat file layout.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 6 {
            return Err(Error::format("codebook file truncated"));
        }
        if bytes[0..4] != CODEBOOK_MAGIC {
            return Err(Error::format("bad codebook magic"));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != CODEBOOK_VERSION {
            return Err(Error::format(format!(
                "unsupported codebook version {version}"
            )));
        }
        if bytes.len() != Self::byte_len() {
            return Err(Error::format(format!(
                "codebook file is {} bytes, expected {}",
                bytes.len(),
                Self::byte_len()
            )));
        }

        let mut pos = 6;
        let read_f32 = |bytes: &[u8], pos: &mut usize| {
            let v = f32::from_le_bytes(bytes[*pos..*pos + 4].try_into().unwrap());
            *pos += 4;
            v
        };

        let mut set = CodebookSet::seeded(0);
        for v in set
            .lag_table
            .iter_mut()
            .chain(&mut set.corr_table)
            .chain(&mut set.energy_table)
            .chain(&mut set.interp_table)
        {
            *v = read_f32(bytes, &mut pos);
        }
        for pattern in set.mod_table.iter_mut() {
            for o in pattern.iter_mut() {
                *o = bytes[pos] as i8;
                pos += 1;
            }
        }
        for v in set.abs_stages.iter_mut().chain(&mut set.delta_stages) {
            *v = read_f32(bytes, &mut pos);
        }
        set.version = version;
        set.validate()?;
        Ok(set)
    }

    /// Checks table invariants: finite values, and correlation and
    /// interpolation weights inside `[0, 1]` (frame invariants depend
    /// on both).
    pub fn validate(&self) -> Result<()> {
        let all = self
            .lag_table
            .iter()
            .chain(&self.corr_table)
            .chain(&self.energy_table)
            .chain(&self.interp_table)
            .chain(&self.abs_stages)
            .chain(&self.delta_stages);
        for v in all {
            if !v.is_finite() {
                return Err(Error::validation("codebook contains non-finite values"));
            }
        }
        for table in [&self.corr_table[..], &self.interp_table[..]] {
            if table.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::validation(
                    "correlation/interpolation tables must lie in [0, 1]",
                ));
            }
        }
        Ok(())
    }
}

impl Default for CodebookSet {
    fn default() -> Self {
        CodebookSet::seeded(DEFAULT_CODEBOOK_SEED)
    }
}

impl std::fmt::Debug for CodebookSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CodebookSet")
            .field("version", &self.version)
            .field("abs_stage_values", &self.abs_stages.len())
            .field("delta_stage_values", &self.delta_stages.len())
            .finish_non_exhaustive()
    }
}

/// Four conditioning frames plus the interpolation anchor to carry into
/// the next packet's dequantization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DequantizedPacket {
    pub frames: [FeatureFrame; FRAMES_PER_PACKET],
    /// The final anchor cepstrum *before* energy is applied; pass as
    /// `prev` when dequantizing the following packet.
    pub carry: [f32; CEPSTRUM_DIM],
}

fn lerp(a: &[f32; CEPSTRUM_DIM], b: &[f32; CEPSTRUM_DIM], w: f32) -> [f32; CEPSTRUM_DIM] {
    let mut out = [0.0f32; CEPSTRUM_DIM];
    for ((o, a), b) in out.iter_mut().zip(a).zip(b) {
        *o = a + w * (b - a);
    }
    out
}

/// Expands one packet into four 10 ms conditioning frames.
///
/// Frame 1 decodes the absolute cepstrum field, frame 3 absolute plus
/// delta. Frame 0 interpolates between `prev` (the previous packet's
/// carry) and frame 1, frame 2 between frames 1 and 3, both with the
/// packet's interpolation weight. Energy is then added to c0 of all
/// four frames, and the pitch lag takes a per-frame offset from the
/// modulation pattern, clamped to the index range.
///
/// Without `prev` (first packet after a reset) every frame uses the
/// absolute-decoded cepstrum.
pub fn dequantize_packet(
    pkt: &CodedPacket,
    prev: Option<&[f32; CEPSTRUM_DIM]>,
    books: &CodebookSet,
) -> Result<DequantizedPacket> {
    pkt.validate()?;
    let a1 = books.decode_abs(pkt.cepstrum_abs_idx);
    let w = books.interp_table[pkt.cepstrum_interp_idx as usize];

    let (cepstra, carry) = match prev {
        Some(p) => {
            let delta = books.decode_delta(pkt.cepstrum_delta_idx);
            let mut a3 = a1;
            for (a, d) in a3.iter_mut().zip(delta) {
                *a += d;
            }
            ([lerp(p, &a1, w), a1, lerp(&a1, &a3, w), a3], a3)
        }
        None => ([a1; FRAMES_PER_PACKET], a1),
    };

    let energy = books.energy_table[pkt.energy_idx as usize];
    let pattern = books.mod_table[pkt.pitch_mod_idx as usize];
    let corr = books.corr_table[pkt.pitch_corr_idx as usize];

    let mut frames = [FeatureFrame::zero(); FRAMES_PER_PACKET];
    for ((frame, cep), off) in frames.iter_mut().zip(cepstra).zip(pattern) {
        frame.cepstrum = cep;
        frame.cepstrum[0] += energy;
        frame.pitch_lag_idx = (pkt.pitch_lag_idx as i16 + off as i16).clamp(0, 63) as u8;
        frame.pitch_corr = corr;
    }
    Ok(DequantizedPacket { frames, carry })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::{pack_packet, parse_packet};

    fn books() -> CodebookSet {
        CodebookSet::default()
    }

    fn random_packet(rng: &mut ChaCha8Rng) -> CodedPacket {
        parse_packet(&rng.next_u64().to_be_bytes()).unwrap()
    }

    #[test]
    fn all_zero_packet_with_zero_prev_decodes_entry_zero() {
        let books = books();
        let pkt = CodedPacket::default();
        let out = dequantize_packet(&pkt, Some(&[0.0; CEPSTRUM_DIM]), &books).unwrap();

        // interp index 0 copies the right anchor, so every frame lands on
        // the absolute decode of index 0 (delta entry 0 is zero)
        let mut expected = books.decode_abs(0);
        expected[0] += books.energy_table[0];
        for frame in &out.frames {
            assert_eq!(frame.cepstrum, expected);
            assert_eq!(frame.pitch_lag_idx, 0);
            assert_eq!(frame.pitch_corr, books.corr_table[0]);
            frame.validate().unwrap();
        }
    }

    #[test]
    fn zero_delta_packet_is_stationary_from_the_start() {
        let books = books();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut pkt = random_packet(&mut rng);
            pkt.cepstrum_delta_idx = 0;
            let first = dequantize_packet(&pkt, None, &books).unwrap();
            let second = dequantize_packet(&pkt, Some(&first.carry), &books).unwrap();
            assert_eq!(second.frames, first.frames);
            assert_eq!(second.carry, first.carry);
        }
    }

    #[test]
    fn repeated_packets_reach_a_fixed_point() {
        // An arbitrary packet repeated indefinitely settles after one
        // repetition: from then on every packet decodes identically.
        let books = books();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let pkt = random_packet(&mut rng);
            let mut prev = None;
            let mut outputs = Vec::new();
            for _ in 0..5 {
                let out = dequantize_packet(&pkt, prev.as_ref(), &books).unwrap();
                prev = Some(out.carry);
                outputs.push(out);
            }
            for pair in outputs[2..].windows(2) {
                assert_eq!(pair[0], pair[1]);
            }
        }
    }

    #[test]
    fn energy_shifts_c0_of_all_four_frames() {
        let books = books();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut pkt = random_packet(&mut rng);
        let prev = [0.25f32; CEPSTRUM_DIM];

        pkt.energy_idx = 10;
        let lo = dequantize_packet(&pkt, Some(&prev), &books).unwrap();
        pkt.energy_idx = 90;
        let hi = dequantize_packet(&pkt, Some(&prev), &books).unwrap();

        let shift = books.energy_table[90] - books.energy_table[10];
        for (a, b) in lo.frames.iter().zip(&hi.frames) {
            assert!((b.cepstrum[0] - a.cepstrum[0] - shift).abs() < 1e-6);
            assert_eq!(a.cepstrum[1..], b.cepstrum[1..]);
        }
    }

    #[test]
    fn modulation_offsets_and_clamping() {
        let books = books();
        let mut pkt = CodedPacket {
            pitch_lag_idx: 30,
            pitch_mod_idx: 7, // pattern [0, 1, 2, 3]
            ..Default::default()
        };
        let out = dequantize_packet(&pkt, None, &books).unwrap();
        let lags: Vec<u8> = out.frames.iter().map(|f| f.pitch_lag_idx).collect();
        assert_eq!(lags, [30, 31, 32, 33]);

        // offsets clamp at both ends of the index range
        pkt.pitch_lag_idx = 63;
        let out = dequantize_packet(&pkt, None, &books).unwrap();
        assert!(out.frames.iter().all(|f| f.pitch_lag_idx == 63));

        pkt.pitch_lag_idx = 0;
        pkt.pitch_mod_idx = 6; // pattern [0, -1, -1, -2]
        let out = dequantize_packet(&pkt, None, &books).unwrap();
        assert!(out.frames.iter().all(|f| f.pitch_lag_idx == 0));
    }

    #[test]
    fn interpolation_weights_match_rule_table() {
        let books = books();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let prev = [0.5f32; CEPSTRUM_DIM];
        for interp in 0..8u8 {
            let mut pkt = random_packet(&mut rng);
            pkt.cepstrum_interp_idx = interp;
            let out = dequantize_packet(&pkt, Some(&prev), &books).unwrap();

            // recompose the expected frames from the public decode helpers
            let w = books.interp_table[interp as usize];
            let a1 = books.decode_abs(pkt.cepstrum_abs_idx);
            let delta = books.decode_delta(pkt.cepstrum_delta_idx);
            let mut a3 = a1;
            for (a, d) in a3.iter_mut().zip(delta) {
                *a += d;
            }
            let e = books.energy_table[pkt.energy_idx as usize];
            for (f, anchors) in [(0usize, (&prev, &a1)), (2, (&a1, &a3))] {
                for i in 0..CEPSTRUM_DIM {
                    let mut want = anchors.0[i] + w * (anchors.1[i] - anchors.0[i]);
                    if i == 0 {
                        want += e;
                    }
                    assert_eq!(out.frames[f].cepstrum[i], want);
                }
            }
            assert_eq!(out.carry, a3);
        }
    }

    #[test]
    fn first_packet_fallback_uses_absolute_everywhere() {
        let books = books();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let pkt = random_packet(&mut rng);
        let out = dequantize_packet(&pkt, None, &books).unwrap();
        let mut expected = books.decode_abs(pkt.cepstrum_abs_idx);
        expected[0] += books.energy_table[pkt.energy_idx as usize];
        for frame in &out.frames {
            assert_eq!(frame.cepstrum, expected);
        }
    }

    #[test]
    fn dequantize_rejects_out_of_range_fields() {
        let pkt = CodedPacket {
            pitch_mod_idx: 8,
            ..Default::default()
        };
        assert!(matches!(
            dequantize_packet(&pkt, None, &books()),
            Err(Error::Range { field: "pitch_mod_idx", .. })
        ));
    }

    #[test]
    fn frames_always_validate() {
        let books = books();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let mut prev = None;
        for _ in 0..200 {
            let pkt = random_packet(&mut rng);
            let out = dequantize_packet(&pkt, prev.as_ref(), &books).unwrap();
            for frame in &out.frames {
                frame.validate().unwrap();
            }
            prev = Some(out.carry);
        }
    }

    #[test]
    fn seeding_is_deterministic() {
        assert_eq!(CodebookSet::seeded(7), CodebookSet::seeded(7));
        assert_ne!(CodebookSet::seeded(7), CodebookSet::seeded(8));
    }

    #[test]
    fn delta_entry_zero_is_zero_vector() {
        let books = books();
        for stage in 0..2 {
            assert!(books.delta_entry(stage, 0).iter().all(|&v| v == 0.0));
        }
        assert_eq!(books.decode_delta(0), [0.0; CEPSTRUM_DIM]);
    }

    #[test]
    fn serialization_round_trips() {
        let books = books();
        let bytes = books.to_bytes();
        assert_eq!(bytes.len(), CodebookSet::byte_len());
        let back = CodebookSet::from_bytes(&bytes).unwrap();
        assert_eq!(back, books);
    }

    #[test]
    fn from_bytes_rejects_corruption() {
        let good = books().to_bytes();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            CodebookSet::from_bytes(&bad_magic),
            Err(Error::Format(_))
        ));

        let truncated = &good[..good.len() - 1];
        assert!(matches!(
            CodebookSet::from_bytes(truncated),
            Err(Error::Format(_))
        ));

        // a NaN inside a vector stage fails validation
        let mut nan = good.clone();
        let vector_base = 6 + (64 + 4 + 128 + 8) * 4 + 32;
        nan[vector_base..vector_base + 4].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            CodebookSet::from_bytes(&nan),
            Err(Error::Validation(_))
        ));

        // correlation outside [0, 1] fails validation
        let mut corr = good;
        let corr_base = 6 + 64 * 4;
        corr[corr_base..corr_base + 4].copy_from_slice(&2.0f32.to_le_bytes());
        assert!(matches!(
            CodebookSet::from_bytes(&corr),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn packet_field_split_covers_full_index_ranges() {
        // decode of the maximal indices touches the last entry of every
        // stage without panicking
        let books = books();
        books.decode_abs((1 << 30) - 1);
        books.decode_delta((1 << 13) - 1);
        let pkt = parse_packet(&[0xFF; 8]).unwrap();
        dequantize_packet(&pkt, None, &books).unwrap();
        let _ = pack_packet(&pkt).unwrap();
    }
}
