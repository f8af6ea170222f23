//! Feature-conditioned layers: the adaptive modulation layer, the
//! residual block built on it, and the pitch prior that replaces latent
//! noise at the generator input.
//!
//! Every layer comes as an offline whole-signal form and a streaming
//! step form over explicit state. The convolutions inside share the
//! dsp kernel, and all the glue here (normalize, modulate, gate, add)
//! is stateless per time step, so streamed and offline evaluations are
//! bit-identical.

use crate::dsp::{
    causal_conv_offline, causal_conv_step, channel_norm, gated_activation, ConvSpec, ConvState,
};
use crate::error::{Error, Result};

/// Channel-normalization variance guard used throughout the generator.
pub const NORM_EPS: f32 = 1e-5;

/// Applies `out = γ ⊙ norm + β` per time step. `gamma_beta` rows hold
/// the `2L` modulation channels: γ first, β second.
fn modulate(norm: &[f32], gamma_beta: &[f32], channels: usize, out: &mut [f32]) {
    for ((n_row, gb_row), o_row) in norm
        .chunks_exact(channels)
        .zip(gamma_beta.chunks_exact(2 * channels))
        .zip(out.chunks_exact_mut(channels))
    {
        for c in 0..channels {
            o_row[c] = gb_row[c] * n_row[c] + gb_row[channels + c];
        }
    }
}

/// Splits each `2L` row into content and gate halves and applies the
/// gated activation.
fn gated_rows(packed: &[f32], channels: usize, out: &mut [f32]) {
    for (row, o_row) in packed
        .chunks_exact(2 * channels)
        .zip(out.chunks_exact_mut(channels))
    {
        gated_activation(&row[..channels], &row[channels..], channels, o_row);
    }
}

// --- Adaptive modulation layer ---

/// Computes per-step modulation parameters γ, β from conditioning
/// features and applies them to channel-normalized content.
///
/// Two causal convolutions: `aux` lifts the conditioning to the content
/// width, `modc` expands it to `2L` channels that split into γ and β.
#[derive(Debug, Clone)]
pub struct TadeLayer {
    pub(crate) aux: ConvSpec,
    pub(crate) modc: ConvSpec,
}

/// Streaming state for one [`TadeLayer`].
#[derive(Debug, Clone)]
pub struct TadeState {
    aux: ConvState,
    modc: ConvState,
}

impl TadeLayer {
    pub fn new(aux: ConvSpec, modc: ConvSpec) -> Result<Self> {
        if modc.in_channels() != aux.out_channels() {
            return Err(Error::validation(
                "modulation conv input width must match aux conv output width",
            ));
        }
        if modc.out_channels() != 2 * modc.in_channels() {
            return Err(Error::validation(
                "modulation conv must produce 2 channels (γ, β) per content channel",
            ));
        }
        Ok(TadeLayer { aux, modc })
    }

    /// Content channel count `L`.
    pub fn channels(&self) -> usize {
        self.modc.in_channels()
    }

    pub fn new_state(&self, t_cap: usize) -> TadeState {
        TadeState {
            aux: ConvState::with_frame_capacity(&self.aux, t_cap),
            modc: ConvState::with_frame_capacity(&self.modc, t_cap),
        }
    }

    pub fn reset(state: &mut TadeState) {
        state.aux.reset();
        state.modc.reset();
    }

    /// Offline γ‖β rows for a whole conditioning signal.
    pub fn gamma_beta_offline(&self, cond: &[f32]) -> Result<Vec<f32>> {
        let a = causal_conv_offline(cond, &self.aux)?;
        causal_conv_offline(&a, &self.modc)
    }

    /// Streaming γ‖β rows for one conditioning frame. `aux_buf` holds
    /// `t·L` intermediate values, `gamma_beta` receives `t·2L`.
    pub fn gamma_beta_step(
        &self,
        state: &mut TadeState,
        cond: &[f32],
        aux_buf: &mut [f32],
        gamma_beta: &mut [f32],
    ) -> Result<()> {
        causal_conv_step(&mut state.aux, cond, &self.aux, aux_buf)?;
        causal_conv_step(&mut state.modc, aux_buf, &self.modc, gamma_beta)
    }
}

/// One-shot modulation: normalizes `content`, computes γ, β from
/// `cond`, and returns `(styled, γ, β)` where `styled = γ⊙norm(content)+β`.
/// γ and β are returned so callers can reapply the identical values.
pub fn tade_modulate(
    layer: &TadeLayer,
    cond: &[f32],
    content: &[f32],
) -> Result<(Vec<f32>, Vec<f32>, Vec<f32>)> {
    let l = layer.channels();
    if content.len() % l != 0 {
        return Err(Error::validation(
            "content length is not a multiple of the channel count",
        ));
    }
    let t = content.len() / l;
    let gb = layer.gamma_beta_offline(cond)?;
    if gb.len() != t * 2 * l {
        return Err(Error::validation(
            "conditioning and content frame counts differ",
        ));
    }
    let mut norm = vec![0.0f32; content.len()];
    channel_norm(content, l, NORM_EPS, &mut norm);
    let mut styled = vec![0.0f32; content.len()];
    modulate(&norm, &gb, l, &mut styled);

    let mut gamma = vec![0.0f32; t * l];
    let mut beta = vec![0.0f32; t * l];
    for j in 0..t {
        gamma[j * l..(j + 1) * l].copy_from_slice(&gb[j * 2 * l..j * 2 * l + l]);
        beta[j * l..(j + 1) * l].copy_from_slice(&gb[j * 2 * l + l..(j + 1) * 2 * l]);
    }
    Ok((styled, gamma, beta))
}

// --- Residual block ---

/// Feature-modulated residual block. One modulation layer computes γ, β
/// once per step; the block applies them twice:
///
/// ```text
/// x ─ norm ─ γ,β ─ conv(L→2L, d=1) ─ gate ─ norm ─ γ,β ─ conv(L→2L, d=2) ─ gate ─(+x)─ y
/// ```
#[derive(Debug, Clone)]
pub struct TadeResBlock {
    pub(crate) tade: TadeLayer,
    pub(crate) conv1: ConvSpec,
    pub(crate) conv2: ConvSpec,
}

/// Streaming state for one [`TadeResBlock`].
#[derive(Debug, Clone)]
pub struct ResBlockState {
    tade: TadeState,
    conv1: ConvState,
    conv2: ConvState,
}

impl ResBlockState {
    /// The four conv states in fixed order (aux, mod, conv1, conv2),
    /// for state fingerprinting.
    pub fn conv_states(&self) -> [&ConvState; 4] {
        [
            &self.tade.aux,
            &self.tade.modc,
            &self.conv1,
            &self.conv2,
        ]
    }
}

/// Reusable step buffers sized for the largest frame a block will see.
/// Shared across blocks so a session allocates one set.
#[derive(Debug, Clone, Default)]
pub struct BlockScratch {
    aux: Vec<f32>,     // t×L
    gb: Vec<f32>,      // t×2L
    norm: Vec<f32>,    // t×L
    styled: Vec<f32>,  // t×L
    packed: Vec<f32>,  // t×2L
    gated: Vec<f32>,   // t×L
}

impl BlockScratch {
    /// Buffers for frames of up to `t_cap` steps of `l` channels.
    pub fn with_capacity(t_cap: usize, l: usize) -> Self {
        BlockScratch {
            aux: vec![0.0; t_cap * l],
            gb: vec![0.0; t_cap * 2 * l],
            norm: vec![0.0; t_cap * l],
            styled: vec![0.0; t_cap * l],
            packed: vec![0.0; t_cap * 2 * l],
            gated: vec![0.0; t_cap * l],
        }
    }

    fn ensure(&mut self, t: usize, l: usize) {
        if self.aux.len() < t * l {
            *self = BlockScratch::with_capacity(t, l);
        }
    }
}

impl TadeResBlock {
    pub fn new(tade: TadeLayer, conv1: ConvSpec, conv2: ConvSpec) -> Result<Self> {
        let l = tade.channels();
        for (name, conv) in [("first", &conv1), ("second", &conv2)] {
            if conv.in_channels() != l || conv.out_channels() != 2 * l {
                return Err(Error::validation(format!(
                    "{name} block conv must map {l}→{} channels",
                    2 * l
                )));
            }
        }
        Ok(TadeResBlock { tade, conv1, conv2 })
    }

    pub fn channels(&self) -> usize {
        self.tade.channels()
    }

    pub fn new_state(&self, t_cap: usize) -> ResBlockState {
        ResBlockState {
            tade: self.tade.new_state(t_cap),
            conv1: ConvState::with_frame_capacity(&self.conv1, t_cap),
            conv2: ConvState::with_frame_capacity(&self.conv2, t_cap),
        }
    }

    pub fn reset(state: &mut ResBlockState) {
        TadeLayer::reset(&mut state.tade);
        state.conv1.reset();
        state.conv2.reset();
    }

    /// Advances the block by one frame (`t` steps of `L` channels).
    pub fn step(
        &self,
        state: &mut ResBlockState,
        cond: &[f32],
        x: &[f32],
        scratch: &mut BlockScratch,
        out: &mut [f32],
    ) -> Result<()> {
        let l = self.channels();
        if x.len() % l != 0 || out.len() != x.len() {
            return Err(Error::validation("block frame sizes are inconsistent"));
        }
        let t = x.len() / l;
        scratch.ensure(t, l);
        let aux = &mut scratch.aux[..t * l];
        let gb = &mut scratch.gb[..t * 2 * l];
        let norm = &mut scratch.norm[..t * l];
        let styled = &mut scratch.styled[..t * l];
        let packed = &mut scratch.packed[..t * 2 * l];
        let gated = &mut scratch.gated[..t * l];

        // γ, β once per step...
        self.tade.gamma_beta_step(&mut state.tade, cond, aux, gb)?;

        // ...applied twice: first to the block input
        channel_norm(x, l, NORM_EPS, norm);
        modulate(norm, gb, l, styled);
        causal_conv_step(&mut state.conv1, styled, &self.conv1, packed)?;
        gated_rows(packed, l, gated);

        // ...then to the gated intermediate, with the identical values
        channel_norm(gated, l, NORM_EPS, norm);
        modulate(norm, gb, l, styled);
        causal_conv_step(&mut state.conv2, styled, &self.conv2, packed)?;
        gated_rows(packed, l, gated);

        for ((o, xv), gv) in out.iter_mut().zip(x).zip(gated.iter()) {
            *o = xv + gv;
        }
        Ok(())
    }

    /// Whole-signal evaluation with offline convolutions; the reference
    /// the streaming form is tested against.
    pub fn offline(&self, cond: &[f32], x: &[f32]) -> Result<Vec<f32>> {
        let l = self.channels();
        if x.len() % l != 0 {
            return Err(Error::validation(
                "content length is not a multiple of the channel count",
            ));
        }
        let gb = self.tade.gamma_beta_offline(cond)?;
        if gb.len() != 2 * x.len() {
            return Err(Error::validation(
                "conditioning and content frame counts differ",
            ));
        }

        let mut norm = vec![0.0f32; x.len()];
        let mut styled = vec![0.0f32; x.len()];
        let mut gated = vec![0.0f32; x.len()];

        channel_norm(x, l, NORM_EPS, &mut norm);
        modulate(&norm, &gb, l, &mut styled);
        let packed = causal_conv_offline(&styled, &self.conv1)?;
        gated_rows(&packed, l, &mut gated);

        channel_norm(&gated, l, NORM_EPS, &mut norm);
        modulate(&norm, &gb, l, &mut styled);
        let packed = causal_conv_offline(&styled, &self.conv2)?;
        gated_rows(&packed, l, &mut gated);

        Ok(x.iter().zip(&gated).map(|(xv, gv)| xv + gv).collect())
    }
}

// --- Pitch prior ---

/// Looks up a learned embedding row per pitch-lag index and scales it
/// by the voicing strength: `prior[i] = embedding[lag[i]] · corr[i]`.
/// This is the generator's input — there is no latent noise.
pub fn pitch_prior(
    embedding: &[f32],
    vocab: usize,
    channels: usize,
    lags: &[u8],
    corrs: &[f32],
    out: &mut [f32],
) -> Result<()> {
    debug_assert_eq!(embedding.len(), vocab * channels);
    if lags.len() != corrs.len() || out.len() != lags.len() * channels {
        return Err(Error::validation("pitch prior buffer sizes are inconsistent"));
    }
    for ((&lag, &corr), o_row) in lags
        .iter()
        .zip(corrs)
        .zip(out.chunks_exact_mut(channels))
    {
        if lag as usize >= vocab {
            return Err(Error::Range {
                field: "pitch_lag_idx",
                value: lag as u64,
                max: vocab as u64 - 1,
            });
        }
        let row = &embedding[lag as usize * channels..(lag as usize + 1) * channels];
        for (o, e) in o_row.iter_mut().zip(row) {
            *o = e * corr;
        }
    }
    Ok(())
}
