//! Stateless and streaming DSP primitives.
//!
//! Everything here comes in two interchangeable forms: an offline form
//! that sees the whole signal, and a streaming form that sees one frame
//! at a time plus explicit state. Both forms share the same inner
//! arithmetic in the same order, so for any partition of a signal into
//! frames the concatenated streamed output is *bit-identical* to the
//! offline output — tests may therefore compare exactly, and tolerance
//! bounds in higher layers are spent on real numerical differences, not
//! on bookkeeping.
//!
//! Signals are time-major interleaved: `x[t * channels + c]`.

mod pqmf;

pub use pqmf::{
    design_pqmf, pqmf_analysis, pqmf_synthesis, pqmf_synthesis_step, PqmfBank, PqmfSynthState,
    PQMF_DEFAULT_BANDS, PQMF_DEFAULT_BETA, PQMF_DEFAULT_CUTOFF, PQMF_DEFAULT_TAPS,
};

use crate::error::{Error, Result};

// --- Causal convolution ---

/// A causal 1-D convolution: `out[t] = bias + Σ_k w[·][·][k] · in[t − k·dilation]`,
/// with tap 0 the newest sample and inputs before t=0 taken as zero.
///
/// Weights are accepted in `[out][in][K]` layout and stored transposed
/// (`[K][in][out]`) so the hot loop runs contiguously over output
/// channels.
#[derive(Debug, Clone)]
pub struct ConvSpec {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    dilation: usize,
    bias: Vec<f32>,
    /// `[K][in][out]` transposed tap matrix.
    taps: Vec<f32>,
}

impl ConvSpec {
    /// Builds a spec from `[out][in][K]`-layout weights and a bias.
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        dilation: usize,
        weights: &[f32],
        bias: &[f32],
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || kernel == 0 || dilation == 0 {
            return Err(Error::validation("conv dimensions must all be nonzero"));
        }
        if weights.len() != out_channels * in_channels * kernel {
            return Err(Error::validation(format!(
                "conv weights have {} values, expected {}×{}×{}",
                weights.len(),
                out_channels,
                in_channels,
                kernel
            )));
        }
        if bias.len() != out_channels {
            return Err(Error::validation(format!(
                "conv bias has {} values, expected {}",
                bias.len(),
                out_channels
            )));
        }
        let mut taps = vec![0.0f32; weights.len()];
        for o in 0..out_channels {
            for i in 0..in_channels {
                for k in 0..kernel {
                    taps[(k * in_channels + i) * out_channels + o] =
                        weights[(o * in_channels + i) * kernel + k];
                }
            }
        }
        Ok(ConvSpec {
            in_channels,
            out_channels,
            kernel,
            dilation,
            bias: bias.to_vec(),
            taps,
        })
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn dilation(&self) -> usize {
        self.dilation
    }

    /// Input vectors of history the convolution needs: `(K−1)·dilation`.
    pub fn history_len(&self) -> usize {
        (self.kernel - 1) * self.dilation
    }

    /// Multiply-accumulates per output time step: `in · out · K`.
    pub fn macs_per_step(&self) -> u64 {
        (self.in_channels * self.out_channels * self.kernel) as u64
    }

    /// Stored parameter count (weights + bias).
    pub fn param_count(&self) -> usize {
        self.taps.len() + self.bias.len()
    }

    /// The shared kernel: `buf` holds `history_len()` input vectors
    /// followed by the current input, `t_out` output vectors are written.
    /// Per output element the accumulation order is fixed — bias first,
    /// then taps newest to oldest, channels ascending — which is what
    /// makes streaming and offline runs bit-identical.
    fn run(&self, buf: &[f32], t_out: usize, out: &mut [f32]) {
        let (ic, oc) = (self.in_channels, self.out_channels);
        for j in 0..t_out {
            let row = &mut out[j * oc..(j + 1) * oc];
            row.copy_from_slice(&self.bias);
            let newest = j + self.history_len();
            for k in 0..self.kernel {
                let x = &buf[(newest - k * self.dilation) * ic..][..ic];
                let w_tap = &self.taps[k * ic * oc..];
                for (i, &xv) in x.iter().enumerate() {
                    let w = &w_tap[i * oc..][..oc];
                    for (r, wv) in row.iter_mut().zip(w) {
                        *r += wv * xv;
                    }
                }
            }
        }
    }
}

/// Streaming state for one [`ConvSpec`]: the trailing `(K−1)·dilation`
/// input vectors, plus a scratch area so steps never allocate once the
/// frame size has been seen.
#[derive(Debug, Clone)]
pub struct ConvState {
    hist: Vec<f32>,
    scratch: Vec<f32>,
}

impl ConvState {
    pub fn new(spec: &ConvSpec) -> Self {
        Self::with_frame_capacity(spec, 0)
    }

    /// Pre-sizes the scratch for frames up to `t_cap` steps so the first
    /// step is already allocation-free.
    pub fn with_frame_capacity(spec: &ConvSpec, t_cap: usize) -> Self {
        let hist_len = spec.history_len() * spec.in_channels;
        ConvState {
            hist: vec![0.0; hist_len],
            scratch: Vec::with_capacity(hist_len + t_cap * spec.in_channels),
        }
    }

    /// Zeroes the history: the next step behaves like a cold start.
    pub fn reset(&mut self) {
        self.hist.fill(0.0);
    }

    /// The retained input tail, oldest step first. Exposed so sessions
    /// can fingerprint their state; empty for kernel-1 convolutions.
    pub fn history(&self) -> &[f32] {
        &self.hist
    }
}

/// Runs the convolution over a whole signal with zero initial history.
pub fn causal_conv_offline(x: &[f32], spec: &ConvSpec) -> Result<Vec<f32>> {
    if x.len() % spec.in_channels != 0 {
        return Err(Error::validation(
            "input length is not a multiple of the channel count",
        ));
    }
    let t = x.len() / spec.in_channels;
    let mut buf = vec![0.0f32; spec.history_len() * spec.in_channels];
    buf.extend_from_slice(x);
    let mut out = vec![0.0f32; t * spec.out_channels];
    spec.run(&buf, t, &mut out);
    Ok(out)
}

/// Advances the convolution by one frame. Concatenating step outputs
/// over consecutive frames is bit-identical to [`causal_conv_offline`]
/// on the concatenated input.
pub fn causal_conv_step(
    state: &mut ConvState,
    frame: &[f32],
    spec: &ConvSpec,
    out: &mut [f32],
) -> Result<()> {
    let hist_len = spec.history_len() * spec.in_channels;
    if state.hist.len() != hist_len {
        return Err(Error::validation(
            "conv state was built for a different spec",
        ));
    }
    if frame.len() % spec.in_channels != 0 {
        return Err(Error::validation(
            "frame length is not a multiple of the channel count",
        ));
    }
    let t = frame.len() / spec.in_channels;
    if out.len() != t * spec.out_channels {
        return Err(Error::validation(format!(
            "output slice holds {} values, expected {}",
            out.len(),
            t * spec.out_channels
        )));
    }

    state.scratch.clear();
    state.scratch.extend_from_slice(&state.hist);
    state.scratch.extend_from_slice(frame);
    spec.run(&state.scratch, t, out);
    let tail = state.scratch.len() - hist_len;
    state.hist.copy_from_slice(&state.scratch[tail..]);
    Ok(())
}

// --- Channel normalization ---

/// Normalizes each time step across its channel vector to mean 0 and
/// (population) variance 1, guarded by `eps`. Depends only on the
/// current step, so it streams with no state at all.
pub fn channel_norm(x: &[f32], channels: usize, eps: f32, out: &mut [f32]) {
    debug_assert_eq!(x.len() % channels, 0);
    debug_assert_eq!(out.len(), x.len());
    let c = channels as f32;
    for (xs, os) in x.chunks_exact(channels).zip(out.chunks_exact_mut(channels)) {
        let mean = xs.iter().sum::<f32>() / c;
        let var = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f32>() / c;
        let inv = 1.0 / (var + eps).sqrt();
        for (o, v) in os.iter_mut().zip(xs) {
            *o = (v - mean) * inv;
        }
    }
}

// --- Gated activation ---

/// `out = tanh(a) ⊙ softmax(b)` with the softmax taken over the channel
/// dimension of each time step (max-subtracted for stability).
pub fn gated_activation(a: &[f32], b: &[f32], channels: usize, out: &mut [f32]) {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(out.len(), a.len());
    for ((av, bv), os) in a
        .chunks_exact(channels)
        .zip(b.chunks_exact(channels))
        .zip(out.chunks_exact_mut(channels))
    {
        let max = bv.iter().fold(f32::NEG_INFINITY, |m, &v| m.max(v));
        let mut sum = 0.0f32;
        for (o, &v) in os.iter_mut().zip(bv) {
            let e = (v - max).exp();
            *o = e;
            sum += e;
        }
        let inv = 1.0 / sum;
        for (o, &v) in os.iter_mut().zip(av) {
            *o = v.tanh() * (*o * inv);
        }
    }
}

// --- Rational upsampling ---

/// Sample-and-hold upsampling by `p/q`: conceptually repeat every input
/// vector `p` times, then keep every `q`-th of the expanded stream
/// (offset 0). Output length is `⌊T·p/q⌋` vectors. Causal, zero delay.
pub fn upsample_rational(x: &[f32], channels: usize, p: usize, q: usize) -> Vec<f32> {
    debug_assert!(p >= 1 && q >= 1);
    debug_assert_eq!(x.len() % channels, 0);
    let t = x.len() / channels;
    let out_t = t * p / q;
    let mut out = Vec::with_capacity(out_t * channels);
    for j in 0..out_t {
        let src = j * q / p;
        out.extend_from_slice(&x[src * channels..(src + 1) * channels]);
    }
    out
}

/// Streaming sample-and-hold upsampler. The phase of the virtual
/// `p`-times-expanded stream is carried across frames, so any frame
/// partition yields the same concatenated output as
/// [`upsample_rational`] on the whole signal.
#[derive(Debug, Clone)]
pub struct Upsampler {
    p: usize,
    q: usize,
    /// Position within the virtual expanded stream, modulo `q`.
    phase: usize,
}

impl Upsampler {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::validation("upsampling ratio must be nonzero"));
        }
        Ok(Upsampler { p, q, phase: 0 })
    }

    /// Output vectors the next step will produce for `t_in` input vectors.
    pub fn out_len(&self, t_in: usize) -> usize {
        // count of v in [0, t_in·p) with (phase + v) ≡ 0 (mod q)
        let first = (self.q - self.phase % self.q) % self.q;
        let virt = t_in * self.p;
        if first >= virt {
            0
        } else {
            1 + (virt - 1 - first) / self.q
        }
    }

    /// Advances by one frame, writing into `out`. `out` must hold
    /// exactly `out_len(t_in)` vectors.
    pub fn step(&mut self, x: &[f32], channels: usize, out: &mut [f32]) -> Result<()> {
        if x.len() % channels != 0 {
            return Err(Error::validation(
                "frame length is not a multiple of the channel count",
            ));
        }
        let t_in = x.len() / channels;
        let expect = self.out_len(t_in) * channels;
        if out.len() != expect {
            return Err(Error::validation(format!(
                "output slice holds {} values, expected {}",
                out.len(),
                expect
            )));
        }
        let mut w = 0;
        let first = (self.q - self.phase % self.q) % self.q;
        let mut v = first;
        while v < t_in * self.p {
            let src = v / self.p;
            out[w * channels..(w + 1) * channels]
                .copy_from_slice(&x[src * channels..(src + 1) * channels]);
            w += 1;
            v += self.q;
        }
        self.phase = (self.phase + t_in * self.p) % self.q;
        Ok(())
    }

    pub fn reset(&mut self) {
        self.phase = 0;
    }

    /// Current position within the virtual expanded stream, modulo `q`.
    pub fn phase(&self) -> usize {
        self.phase
    }
}
