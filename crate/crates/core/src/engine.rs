//! Per-stream decoding sessions.
//!
//! A [`Session`] owns every piece of mutable inference state — conv
//! histories, upsampler phases, the filter-bank window, the previous
//! packet's cepstra — over an immutable, shareable [`Generator`]. It
//! decodes frame by frame (10 ms) or packet by packet (40 ms), and
//! [`decode_offline`] evaluates the same network over a whole utterance
//! in one shot as the equivalence oracle for the streaming path.
//!
//! After construction a session decodes without heap allocation: all
//! buffers are sized up front from the rate schedule. A failed call
//! leaves the session state untouched — inputs are validated before the
//! first state mutation.

use std::sync::Arc;
use std::time::Instant;

use crate::bitstream::{
    dequantize_packet, CodebookSet, CodedPacket, FeatureFrame, CEPSTRUM_DIM, FRAMES_PER_PACKET,
};
use crate::dsp::{
    causal_conv_offline, causal_conv_step, pqmf_synthesis, pqmf_synthesis_step, upsample_rational,
    ConvState, PqmfSynthState, Upsampler,
};
use crate::error::{Error, Result};
use crate::model::{fnv1a64, pitch_prior, BlockScratch, Generator, ResBlockState};

// --- Constants ---

/// Feature-extraction and packetization delay of the upstream encoder,
/// reported in the latency budget but never incurred by the decoder.
pub const ENCODER_LATENCY_MS: f64 = 45.0;

// --- Session ---

/// All mutable state for decoding one stream. Single-owner: calls must
/// be externally serialized. Distinct sessions over one shared
/// generator may run fully in parallel.
pub struct Session {
    gen: Arc<Generator>,
    cond_state: ConvState,
    up_states: Vec<Option<(Upsampler, ConvState)>>,
    block_states: Vec<ResBlockState>,
    head_state: ConvState,
    pqmf_state: PqmfSynthState,
    prev_cepstrum: Option<[f32; CEPSTRUM_DIM]>,
    frames_decoded: u64,
    // scratch, preallocated for the largest per-frame step count
    scratch: BlockScratch,
    cond_frame: Vec<f32>, // 1 × F
    cond_held: Vec<f32>,  // max_t × F
    sig_a: Vec<f32>,      // max_t × L
    sig_b: Vec<f32>,      // max_t × L
    band_frame: Vec<f32>, // band steps × N
    pcm_frame: Vec<f32>,  // one frame of PCM
    pcm_packet: Vec<f32>, // one packet of PCM
}

impl Session {
    pub fn new(gen: Arc<Generator>) -> Self {
        let cfg = gen.config();
        let (l, f) = (cfg.hidden, cfg.cond_channels);
        let n_blocks = cfg.rate_schedule.len();
        let max_t = cfg.steps_per_frame(n_blocks - 1);

        let mut up_states = Vec::with_capacity(n_blocks);
        let mut block_states = Vec::with_capacity(n_blocks);
        for i in 0..n_blocks {
            let t = cfg.steps_per_frame(i);
            up_states.push(gen.upsampler(i).map(|up| {
                let (p, q) = up.ratio();
                (
                    Upsampler::new(p as usize, q as usize).expect("validated ratio"),
                    ConvState::with_frame_capacity(up.conv(), t),
                )
            }));
            block_states.push(gen.blocks()[i].new_state(t));
        }

        let frame_samples = cfg.frame_samples();
        Session {
            cond_state: ConvState::with_frame_capacity(gen.cond_head(), 1),
            up_states,
            block_states,
            head_state: ConvState::with_frame_capacity(gen.head(), max_t),
            pqmf_state: PqmfSynthState::new(gen.pqmf()),
            prev_cepstrum: None,
            frames_decoded: 0,
            scratch: BlockScratch::with_capacity(max_t, l),
            cond_frame: vec![0.0; f],
            cond_held: vec![0.0; max_t * f],
            sig_a: vec![0.0; max_t * l],
            sig_b: vec![0.0; max_t * l],
            band_frame: vec![0.0; frame_samples],
            pcm_frame: vec![0.0; frame_samples],
            pcm_packet: vec![0.0; frame_samples * FRAMES_PER_PACKET],
            gen,
        }
    }

    pub fn generator(&self) -> &Arc<Generator> {
        &self.gen
    }

    /// Frames decoded since construction or the last [`reset`](Self::reset).
    pub fn frames_decoded(&self) -> u64 {
        self.frames_decoded
    }

    /// Decodes one 10 ms frame into PCM. The returned slice (one frame,
    /// 160 samples at the default configuration) is valid until the
    /// next call. Performs no heap allocation.
    pub fn decode_frame(&mut self, frame: &FeatureFrame) -> Result<&[f32]> {
        self.decode_frame_into(frame)?;
        Ok(&self.pcm_frame)
    }

    /// Decodes one 40 ms packet: dequantize against the previous
    /// packet's cepstra, then four frame decodes. The returned slice
    /// (640 samples at the default configuration) is valid until the
    /// next call.
    pub fn decode_packet(&mut self, pkt: &CodedPacket, books: &CodebookSet) -> Result<&[f32]> {
        let dq = dequantize_packet(pkt, self.prev_cepstrum.as_ref(), books)?;
        let n = self.pcm_frame.len();
        for (j, frame) in dq.frames.iter().enumerate() {
            self.decode_frame_into(frame)?;
            self.pcm_packet[j * n..(j + 1) * n].copy_from_slice(&self.pcm_frame);
        }
        self.prev_cepstrum = Some(dq.carry);
        Ok(&self.pcm_packet)
    }

    /// Returns the session to the exact cold-start state: decoding the
    /// same input after a reset reproduces the original output
    /// bit-exactly.
    pub fn reset(&mut self) {
        self.cond_state.reset();
        for up in self.up_states.iter_mut().flatten() {
            up.0.reset();
            up.1.reset();
        }
        for st in &mut self.block_states {
            crate::model::TadeResBlock::reset(st);
        }
        self.head_state.reset();
        self.pqmf_state.reset();
        self.prev_cepstrum = None;
        self.frames_decoded = 0;
    }

    /// Fingerprint of all semantic state (histories, phases, packet
    /// carry, frame counter). Two sessions with equal fingerprints over
    /// the same generator produce identical future output.
    pub fn state_fingerprint(&self) -> u64 {
        let mut buf: Vec<u8> = Vec::new();
        let push = |buf: &mut Vec<u8>, xs: &[f32]| {
            for x in xs {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        };
        push(&mut buf, self.cond_state.history());
        for (i, st) in self.block_states.iter().enumerate() {
            if let Some((up, cs)) = &self.up_states[i] {
                buf.extend_from_slice(&(up.phase() as u64).to_le_bytes());
                push(&mut buf, cs.history());
            }
            for cs in st.conv_states() {
                push(&mut buf, cs.history());
            }
        }
        push(&mut buf, self.head_state.history());
        push(&mut buf, self.pqmf_state.history());
        match &self.prev_cepstrum {
            Some(c) => {
                buf.push(1);
                push(&mut buf, c.as_slice());
            }
            None => buf.push(0),
        }
        buf.extend_from_slice(&self.frames_decoded.to_le_bytes());
        fnv1a64(&buf)
    }

    /// One frame through the whole stack. Validates before the first
    /// state mutation, so an error leaves the session untouched.
    fn decode_frame_into(&mut self, frame: &FeatureFrame) -> Result<()> {
        frame.validate()?;
        let cfg = self.gen.config();
        if (frame.pitch_lag_idx as usize) >= cfg.pitch_vocab {
            return Err(Error::Range {
                field: "pitch_lag_idx",
                value: frame.pitch_lag_idx as u64,
                max: cfg.pitch_vocab as u64 - 1,
            });
        }
        let (l, f) = (cfg.hidden, cfg.cond_channels);
        let n_blocks = cfg.rate_schedule.len();
        let max_t = cfg.steps_per_frame(n_blocks - 1);

        // conditioning: one 18-dim step through the cond head, then
        // held to each block's rate by repetition
        causal_conv_step(
            &mut self.cond_state,
            &frame.cepstrum,
            self.gen.cond_head(),
            &mut self.cond_frame,
        )?;
        for row in self.cond_held[..max_t * f].chunks_exact_mut(f) {
            row.copy_from_slice(&self.cond_frame);
        }

        // prior: one embedding row scaled by the voicing strength
        pitch_prior(
            self.gen.embedding(),
            cfg.pitch_vocab,
            l,
            &[frame.pitch_lag_idx],
            &[frame.pitch_corr],
            &mut self.sig_a[..l],
        )?;

        // blocks, rate-bridged where the schedule rises
        let mut t = cfg.steps_per_frame(0);
        for i in 0..n_blocks {
            let t_next = cfg.steps_per_frame(i);
            if let Some((up, up_state)) = &mut self.up_states[i] {
                let spec = self.gen.upsampler(i).expect("state implies spec").conv();
                up.step(&self.sig_a[..t * l], l, &mut self.sig_b[..t_next * l])?;
                causal_conv_step(up_state, &self.sig_b[..t_next * l], spec, &mut self.sig_a[..t_next * l])?;
            }
            t = t_next;
            self.gen.blocks()[i].step(
                &mut self.block_states[i],
                &self.cond_held[..t * f],
                &self.sig_a[..t * l],
                &mut self.scratch,
                &mut self.sig_b[..t * l],
            )?;
            std::mem::swap(&mut self.sig_a, &mut self.sig_b);
        }

        // output head: project to bands, bound, synthesize, clamp.
        // The filter bank can overshoot ±1 slightly on bounded input,
        // so the final PCM is hard-clamped to [-1, 1].
        causal_conv_step(
            &mut self.head_state,
            &self.sig_a[..t * l],
            self.gen.head(),
            &mut self.band_frame,
        )?;
        for v in &mut self.band_frame {
            *v = v.tanh();
        }
        pqmf_synthesis_step(
            &mut self.pqmf_state,
            &self.band_frame,
            self.gen.pqmf(),
            &mut self.pcm_frame,
        )?;
        for v in &mut self.pcm_frame {
            *v = v.clamp(-1.0, 1.0);
        }
        self.frames_decoded += 1;
        Ok(())
    }
}

// --- Offline oracle ---

/// Whole-utterance evaluation with offline causal ops: the equivalence
/// oracle the streaming path is tested against. Output is identical to
/// concatenating single-frame decodes on a fresh session.
pub fn decode_offline(gen: &Generator, frames: &[FeatureFrame]) -> Result<Vec<f32>> {
    if frames.is_empty() {
        return Err(Error::validation("offline decode needs at least one frame"));
    }
    let cfg = gen.config();
    for frame in frames {
        frame.validate()?;
        if (frame.pitch_lag_idx as usize) >= cfg.pitch_vocab {
            return Err(Error::Range {
                field: "pitch_lag_idx",
                value: frame.pitch_lag_idx as u64,
                max: cfg.pitch_vocab as u64 - 1,
            });
        }
    }
    let (l, f) = (cfg.hidden, cfg.cond_channels);
    let n = frames.len();

    // conditioning at 100 Hz, then held to each block's rate
    let mut cep = Vec::with_capacity(n * CEPSTRUM_DIM);
    for frame in frames {
        cep.extend_from_slice(&frame.cepstrum);
    }
    let cond = causal_conv_offline(&cep, gen.cond_head())?;

    // prior at one vector per frame
    let lags: Vec<u8> = frames.iter().map(|fr| fr.pitch_lag_idx).collect();
    let corrs: Vec<f32> = frames.iter().map(|fr| fr.pitch_corr).collect();
    let mut x = vec![0.0f32; n * l];
    pitch_prior(gen.embedding(), cfg.pitch_vocab, l, &lags, &corrs, &mut x)?;

    for i in 0..cfg.rate_schedule.len() {
        if let Some(up) = gen.upsampler(i) {
            let (p, q) = up.ratio();
            let held = upsample_rational(&x, l, p as usize, q as usize);
            x = causal_conv_offline(&held, up.conv())?;
        }
        let steps = cfg.steps_per_frame(i);
        let cond_i = upsample_rational(&cond, f, steps, 1);
        x = gen.blocks()[i].offline(&cond_i, &x)?;
    }

    let mut bands = causal_conv_offline(&x, gen.head())?;
    for v in &mut bands {
        *v = v.tanh();
    }
    let mut pcm = pqmf_synthesis(&bands, gen.pqmf())?;
    for v in &mut pcm {
        *v = v.clamp(-1.0, 1.0);
    }
    Ok(pcm)
}

// --- Latency accounting ---

/// Delay budget of the decode path. Only the filter-bank term is
/// incurred here; the encoder term is the upstream feature-extraction
/// and packetization budget, reported for the end-to-end picture.
#[derive(Debug, Clone, Copy)]
pub struct LatencyReport {
    /// Upstream feature extraction + packetization (reported, not incurred).
    pub encoder_ms: f64,
    /// Measured group delay of the synthesis filter bank.
    pub filter_bank_ms: f64,
    /// Algorithmic network delay: zero, every convolution is causal.
    pub network_ms: f64,
}

impl LatencyReport {
    pub fn total_ms(&self) -> f64 {
        self.encoder_ms + self.filter_bank_ms + self.network_ms
    }
}

pub fn latency_report(gen: &Generator) -> LatencyReport {
    LatencyReport {
        encoder_ms: ENCODER_LATENCY_MS,
        filter_bank_ms: gen.pqmf().delay() as f64 * 1000.0 / gen.config().sample_rate as f64,
        network_ms: 0.0,
    }
}

// --- Throughput ---

/// Wall-clock decode rate over a synthetic conditioning stream.
#[derive(Debug, Clone, Copy)]
pub struct Throughput {
    pub frames: u64,
    pub seconds: f64,
}

impl Throughput {
    pub fn frames_per_second(&self) -> f64 {
        self.frames as f64 / self.seconds
    }

    /// Decoded audio seconds per wall-clock second (>1 is faster than
    /// real time), for 10 ms frames.
    pub fn realtime_factor(&self, frame_ms: u32) -> f64 {
        self.frames as f64 * frame_ms as f64 / 1000.0 / self.seconds
    }
}

/// Decodes `frames` deterministic synthetic frames through `session`
/// and reports the wall-clock rate. Advances (then resets) the session.
pub fn measure_throughput(session: &mut Session, frames: usize) -> Result<Throughput> {
    let vocab = session.generator().config().pitch_vocab as u64;
    let start = Instant::now();
    for j in 0..frames {
        let mut frame = FeatureFrame::zero();
        for (c, v) in frame.cepstrum.iter_mut().enumerate() {
            *v = ((j * 7 + c * 3) % 13) as f32 / 13.0 - 0.5;
        }
        frame.pitch_lag_idx = (j as u64 % vocab) as u8;
        frame.pitch_corr = 0.5;
        session.decode_frame(&frame)?;
    }
    let seconds = start.elapsed().as_secs_f64().max(1e-9);
    session.reset();
    Ok(Throughput {
        frames: frames as u64,
        seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::pack_packet;
    use crate::model::{build_generator, random_weights, zero_weights, GeneratorConfig};
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn default_generator(seed: u64) -> Arc<Generator> {
        let cfg = GeneratorConfig::default();
        Arc::new(build_generator(&cfg, &random_weights(&cfg, seed)).unwrap())
    }

    fn random_frame(rng: &mut ChaCha8Rng) -> FeatureFrame {
        let mut frame = FeatureFrame::zero();
        for v in frame.cepstrum.iter_mut() {
            *v = (rng.next_u32() as f32 / u32::MAX as f32 * 2.0 - 1.0) * 0.8;
        }
        frame.pitch_lag_idx = (rng.next_u32() % 64) as u8;
        frame.pitch_corr = rng.next_u32() as f32 / u32::MAX as f32;
        frame
    }

    fn random_frames(seed: u64, n: usize) -> Vec<FeatureFrame> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| random_frame(&mut rng)).collect()
    }

    fn random_packet(rng: &mut ChaCha8Rng) -> CodedPacket {
        let mut bytes = [0u8; 8];
        rng.fill_bytes(&mut bytes);
        crate::bitstream::parse_packet(&bytes).unwrap()
    }

    #[test]
    fn frame_and_packet_lengths() {
        let gen = default_generator(1);
        let mut session = Session::new(gen);
        let books = CodebookSet::default();
        let frame = FeatureFrame::zero();
        assert_eq!(session.decode_frame(&frame).unwrap().len(), 160);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pkt = random_packet(&mut rng);
        assert_eq!(session.decode_packet(&pkt, &books).unwrap().len(), 640);
    }

    #[test]
    fn twenty_five_packets_make_one_second() {
        let gen = default_generator(2);
        let mut session = Session::new(gen);
        let books = CodebookSet::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut total = 0usize;
        for _ in 0..25 {
            let pkt = random_packet(&mut rng);
            total += session.decode_packet(&pkt, &books).unwrap().len();
        }
        assert_eq!(total, 16_000);
        assert_eq!(session.frames_decoded(), 100);
    }

    #[test]
    fn zero_weights_decode_to_silence() {
        let cfg = GeneratorConfig::default();
        let gen = Arc::new(build_generator(&cfg, &zero_weights(&cfg)).unwrap());
        let mut session = Session::new(gen);
        for frame in random_frames(4, 8) {
            let pcm = session.decode_frame(&frame).unwrap();
            assert!(pcm.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn streaming_matches_offline_bit_exactly() {
        let gen = default_generator(5);
        let frames = random_frames(6, 40);
        let offline = decode_offline(&gen, &frames).unwrap();
        let mut session = Session::new(gen);
        let mut streamed = Vec::new();
        for frame in &frames {
            streamed.extend_from_slice(session.decode_frame(frame).unwrap());
        }
        assert_eq!(streamed.len(), offline.len());
        // shared inner arithmetic makes the two paths identical, not
        // merely close
        assert_eq!(streamed, offline);
    }

    #[test]
    fn single_frame_offline_equals_fresh_session() {
        let gen = default_generator(7);
        let frames = random_frames(8, 1);
        let offline = decode_offline(&gen, &frames).unwrap();
        let mut session = Session::new(gen);
        let streamed = session.decode_frame(&frames[0]).unwrap();
        assert_eq!(streamed, &offline[..]);
    }

    #[test]
    fn packet_decode_is_dequantize_then_four_frames() {
        let gen = default_generator(9);
        let books = CodebookSet::default();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let packets: Vec<CodedPacket> = (0..6).map(|_| random_packet(&mut rng)).collect();

        let mut by_packet = Session::new(gen.clone());
        let mut by_frame = Session::new(gen);
        let mut prev: Option<[f32; CEPSTRUM_DIM]> = None;
        for pkt in &packets {
            let got = by_packet.decode_packet(pkt, &books).unwrap().to_vec();
            let dq = dequantize_packet(pkt, prev.as_ref(), &books).unwrap();
            let mut want = Vec::new();
            for frame in &dq.frames {
                want.extend_from_slice(by_frame.decode_frame(frame).unwrap());
            }
            prev = Some(dq.carry);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn reset_restores_cold_start_exactly() {
        let gen = default_generator(11);
        let books = CodebookSet::default();
        let mut session = Session::new(gen);
        let fresh_fp = session.state_fingerprint();

        // reset of a fresh session is a no-op
        session.reset();
        assert_eq!(session.state_fingerprint(), fresh_fp);

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let packets: Vec<CodedPacket> = (0..4).map(|_| random_packet(&mut rng)).collect();
        let mut first = Vec::new();
        for pkt in &packets {
            first.extend_from_slice(session.decode_packet(pkt, &books).unwrap());
        }
        let advanced_fp = session.state_fingerprint();
        assert_ne!(advanced_fp, fresh_fp);

        session.reset();
        assert_eq!(session.state_fingerprint(), fresh_fp);
        let mut second = Vec::new();
        for pkt in &packets {
            second.extend_from_slice(session.decode_packet(pkt, &books).unwrap());
        }
        assert_eq!(first, second);
        assert_eq!(session.state_fingerprint(), advanced_fp);
    }

    #[test]
    fn decoding_is_deterministic_across_sessions() {
        let gen = default_generator(13);
        let frames = random_frames(14, 12);
        let mut a = Session::new(gen.clone());
        let mut b = Session::new(gen);
        for frame in &frames {
            let pa = a.decode_frame(frame).unwrap().to_vec();
            let pb = b.decode_frame(frame).unwrap();
            assert_eq!(pa, pb);
        }
    }

    #[test]
    fn future_frames_cannot_reach_past_output() {
        let gen = default_generator(15);
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..10 {
            let frames = random_frames(rng.next_u64(), 10);
            let j = 1 + (rng.next_u32() as usize) % 9;
            let mut perturbed = frames.clone();
            perturbed[j] = random_frame(&mut rng);

            let base = decode_offline(&gen, &frames).unwrap();
            let poked = decode_offline(&gen, &perturbed).unwrap();
            // everything before frame j is bitwise unchanged
            assert_eq!(base[..j * 160], poked[..j * 160], "leak into frames < {j}");
        }
    }

    #[test]
    fn output_is_hard_bounded() {
        let gen = default_generator(17);
        let mut session = Session::new(gen.clone());
        // hot conditioning pushing tanh toward saturation
        let mut frame = FeatureFrame::zero();
        frame.cepstrum.fill(4.0);
        frame.pitch_corr = 1.0;
        frame.pitch_lag_idx = 30;
        for _ in 0..20 {
            let pcm = session.decode_frame(&frame).unwrap();
            assert!(pcm.iter().all(|&v| (-1.0..=1.0).contains(&v)));
        }
        let offline = decode_offline(&gen, &vec![frame; 20]).unwrap();
        assert!(offline.iter().all(|&v| (-1.0..=1.0).contains(&v)));
    }

    #[test]
    fn invalid_frames_leave_state_untouched() {
        let gen = default_generator(18);
        let mut session = Session::new(gen);
        let good = random_frames(19, 3);
        for frame in &good {
            session.decode_frame(frame).unwrap();
        }
        let fp = session.state_fingerprint();

        let mut bad = good[0];
        bad.cepstrum[5] = f32::NAN;
        assert!(session.decode_frame(&bad).is_err());
        let mut bad = good[0];
        bad.pitch_corr = 1.5;
        assert!(session.decode_frame(&bad).is_err());
        assert_eq!(session.state_fingerprint(), fp);
    }

    #[test]
    fn packet_errors_do_not_advance_state() {
        let gen = default_generator(20);
        let books = CodebookSet::default();
        let mut session = Session::new(gen);
        let fp = session.state_fingerprint();
        let bad = CodedPacket {
            pitch_lag_idx: 64, // one past the 6-bit field
            ..CodedPacket::default()
        };
        assert!(session.decode_packet(&bad, &books).is_err());
        assert_eq!(session.state_fingerprint(), fp);
    }

    #[test]
    fn latency_budget_matches_measured_filter_bank() {
        let gen = default_generator(21);
        let report = latency_report(&gen);
        assert_eq!(report.network_ms, 0.0);
        assert_eq!(report.encoder_ms, 45.0);
        let expect = gen.pqmf().delay() as f64 / 16.0;
        assert!((report.filter_bank_ms - expect).abs() < 1e-12);
        assert!((report.total_ms() - 45.0 - expect).abs() < 1e-12);
    }

    #[test]
    fn throughput_probe_reports_positive_rate() {
        let gen = default_generator(22);
        let mut session = Session::new(gen);
        let t = measure_throughput(&mut session, 10).unwrap();
        assert_eq!(t.frames, 10);
        assert!(t.frames_per_second() > 0.0);
        assert!(t.realtime_factor(10) > 0.0);
        // the probe resets the session afterwards
        assert_eq!(session.frames_decoded(), 0);
    }

    #[test]
    fn packets_round_trip_through_bytes_before_decode() {
        // decode consumes parsed packets identically whether they came
        // from the wire or were built in memory
        let gen = default_generator(23);
        let books = CodebookSet::default();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let mut a = Session::new(gen.clone());
        let mut b = Session::new(gen);
        for _ in 0..4 {
            let pkt = random_packet(&mut rng);
            let wire = crate::bitstream::parse_packet(&pack_packet(&pkt).unwrap()).unwrap();
            let pa = a.decode_packet(&pkt, &books).unwrap().to_vec();
            let pb = b.decode_packet(&wire, &books).unwrap();
            assert_eq!(pa, pb);
        }
    }
}
