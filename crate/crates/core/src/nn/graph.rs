//! Forward passes that record what the backward pass needs, and the
//! matching reverse-mode gradient code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::array::{axpy, dot, Array};
use super::config::SimilarityMode;
use super::params::{Conv, ModelParams};
use super::vocab::{Vocab, PAD};
use super::Side;

/// Token ids after padding. `words.len() >= max(L)` and every real token's
/// character list has at least `max(char widths)` entries.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct EncodedText {
    pub words: Vec<usize>,
    pub chars: Vec<Vec<usize>>,
    pub char_lens: Vec<usize>,
    pub real_len: usize,
}

pub(crate) fn encode(vocab: &Vocab, tokens: &[String], params: &ModelParams) -> EncodedText {
    let cfg = &params.config;
    let len = tokens.len().max(cfg.max_sentence_width());
    let mut words = Vec::with_capacity(len);
    let mut chars = Vec::with_capacity(len);
    let mut char_lens = Vec::with_capacity(len);
    for t in tokens {
        words.push(vocab.word_id(t));
        let mut ids: Vec<usize> = t.chars().map(|c| vocab.char_id(c)).collect();
        char_lens.push(ids.len());
        if ids.len() < cfg.max_char_width() {
            ids.resize(cfg.max_char_width(), PAD);
        }
        chars.push(ids);
    }
    words.resize(len, PAD);
    chars.resize(len, Vec::new());
    char_lens.resize(len, 0);
    EncodedText {
        words,
        chars,
        char_lens,
        real_len: tokens.len(),
    }
}

/// Number of window start positions that overlap at least one real item.
/// A fully padded sequence still pools over its first window.
fn valid_windows(len: usize, real_len: usize, width: usize) -> usize {
    (len + 1 - width).min(real_len).max(1)
}

/// Convolution followed by max-over-time pooling. Returns pooled values and
/// the winning window start per filter; ties keep the lowest position.
fn conv_max(x: &[f64], dim: usize, conv: &Conv, n_windows: usize) -> (Vec<f64>, Vec<usize>) {
    let span = conv.width * dim;
    let mut best = vec![f64::NEG_INFINITY; conv.filters()];
    let mut winner = vec![0; conv.filters()];
    for f in 0..conv.filters() {
        let w = conv.weight.row(f);
        let b = conv.bias.data()[f];
        for p in 0..n_windows {
            let s = b + dot(&x[p * dim..p * dim + span], w);
            if s > best[f] {
                best[f] = s;
                winner[f] = p;
            }
        }
    }
    (best, winner)
}

fn conv_max_backward(
    x: &[f64],
    dim: usize,
    conv: &Conv,
    winners: &[usize],
    dout: &[f64],
    dconv: &mut Conv,
    mut dx: Option<&mut [f64]>,
) {
    let span = conv.width * dim;
    for f in 0..conv.filters() {
        let g = dout[f];
        if g == 0.0 {
            continue;
        }
        let p = winners[f];
        let window = p * dim..p * dim + span;
        axpy(g, &x[window.clone()], dconv.weight.row_mut(f));
        dconv.bias.data_mut()[f] += g;
        if let Some(dx) = dx.as_deref_mut() {
            axpy(g, conv.weight.row(f), &mut dx[window]);
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CharTrace {
    x: Vec<f64>,
    /// Per char width: pooled pre-activation and winners.
    pooled: Vec<(Vec<f64>, Vec<usize>)>,
}

/// Recorded forward pass of one sentence encoder.
#[derive(Debug, Clone)]
pub(crate) struct SentenceTrace {
    pub side: Side,
    enc: EncodedText,
    /// Token matrix, `len × token_dim`, row-major.
    pub x: Vec<f64>,
    chars: Vec<Option<CharTrace>>,
    winners: Vec<Vec<usize>>,
    pub embedding: Vec<f64>,
}

fn char_features(params: &ModelParams, ids: &[usize], real_chars: usize) -> CharTrace {
    let dc = params.config.char_dim;
    let mut x = Vec::with_capacity(ids.len() * dc);
    for &c in ids {
        x.extend_from_slice(params.char_emb.row(c));
    }
    let pooled = params
        .char_convs
        .iter()
        .map(|conv| conv_max(&x, dc, conv, valid_windows(ids.len(), real_chars, conv.width)))
        .collect();
    CharTrace { x, pooled }
}

/// Builds the token matrix. Padding tokens get a zero character part.
pub(crate) fn token_matrix(params: &ModelParams, enc: &EncodedText) -> (Vec<f64>, Vec<Option<CharTrace>>) {
    let cfg = &params.config;
    let dt = cfg.token_dim();
    let mut x = vec![0.0; enc.words.len() * dt];
    let mut traces = Vec::with_capacity(enc.words.len());
    for (t, &w) in enc.words.iter().enumerate() {
        let row = &mut x[t * dt..(t + 1) * dt];
        row[..cfg.word_dim].copy_from_slice(params.word_emb.row(w));
        if cfg.use_char && t < enc.real_len {
            let ct = char_features(params, &enc.chars[t], enc.char_lens[t]);
            for (i, (pre, _)) in ct.pooled.iter().enumerate() {
                let off = cfg.word_dim + i * cfg.char_filters;
                for (dst, &v) in row[off..off + cfg.char_filters].iter_mut().zip(pre) {
                    *dst = v.max(0.0);
                }
            }
            traces.push(Some(ct));
        } else {
            traces.push(None);
        }
    }
    (x, traces)
}

/// Sentence embedding of a token matrix with `real_len` non-pad rows.
pub(crate) fn pool_sentence(
    params: &ModelParams,
    side: Side,
    x: &[f64],
    len: usize,
    real_len: usize,
) -> (Vec<f64>, Vec<Vec<usize>>) {
    let dt = params.config.token_dim();
    let mut embedding = Vec::with_capacity(params.config.sentence_dim());
    let mut winners = Vec::new();
    for conv in params.encoder(side) {
        let (vals, win) = conv_max(x, dt, conv, valid_windows(len, real_len, conv.width));
        embedding.extend(vals);
        winners.push(win);
    }
    (embedding, winners)
}

pub(crate) fn forward_sentence(params: &ModelParams, side: Side, enc: EncodedText) -> SentenceTrace {
    let (x, chars) = token_matrix(params, &enc);
    let (embedding, winners) = pool_sentence(params, side, &x, enc.words.len(), enc.real_len);
    SentenceTrace {
        side,
        enc,
        x,
        chars,
        winners,
        embedding,
    }
}

pub(crate) fn backward_sentence(params: &ModelParams, trace: &SentenceTrace, dembedding: &[f64], grads: &mut ModelParams) {
    let cfg = &params.config;
    let dt = cfg.token_dim();
    let n = cfg.sentence_filters;
    let mut dx = vec![0.0; trace.x.len()];
    let convs = params.encoder(trace.side);
    let dconvs = grads.encoder_mut(trace.side);
    for (i, conv) in convs.iter().enumerate() {
        conv_max_backward(
            &trace.x,
            dt,
            conv,
            &trace.winners[i],
            &dembedding[i * n..(i + 1) * n],
            &mut dconvs[i],
            Some(&mut dx),
        );
    }
    let dc = cfg.char_dim;
    for (t, &w) in trace.enc.words.iter().enumerate() {
        let drow = &dx[t * dt..(t + 1) * dt];
        axpy(1.0, &drow[..cfg.word_dim], grads.word_emb.row_mut(w));
        let Some(ct) = &trace.chars[t] else { continue };
        let mut dcx = vec![0.0; ct.x.len()];
        for (i, (pre, win)) in ct.pooled.iter().enumerate() {
            let off = cfg.word_dim + i * cfg.char_filters;
            let dout: Vec<f64> = drow[off..off + cfg.char_filters]
                .iter()
                .zip(pre)
                .map(|(&g, &p)| if p > 0.0 { g } else { 0.0 })
                .collect();
            conv_max_backward(&ct.x, dc, &params.char_convs[i], win, &dout, &mut grads.char_convs[i], Some(&mut dcx));
        }
        for (k, &c) in trace.enc.chars[t].iter().enumerate() {
            axpy(1.0, &dcx[k * dc..(k + 1) * dc], grads.char_emb.row_mut(c));
        }
    }
}

fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

fn elu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

#[derive(Debug, Clone)]
struct FcTrace {
    input: Vec<f64>,
    pre_hidden: Vec<f64>,
    /// Dropout scale per hidden unit (0 or 1/keep), absent at inference.
    mask: Option<Vec<f64>>,
    hidden: Vec<f64>,
    pre_out: f64,
}

/// Recorded forward pass of a similarity head.
#[derive(Debug, Clone)]
pub(crate) struct SimTrace {
    sv: Option<Vec<f64>>,
    bilin: f64,
    fc: Option<FcTrace>,
    fc_out: f64,
    pub score: f64,
}

fn matvec(a: &Array, v: &[f64]) -> Vec<f64> {
    (0..a.rows()).map(|r| dot(a.row(r), v)).collect()
}

fn forward_fc(params: &ModelParams, u: &[f64], v: &[f64], dropout_seed: Option<u64>) -> FcTrace {
    let mut input = Vec::with_capacity(u.len() + v.len());
    input.extend_from_slice(u);
    input.extend_from_slice(v);
    let mut pre_hidden = matvec(&params.fc1_weight, &input);
    for (h, b) in pre_hidden.iter_mut().zip(params.fc1_bias.data()) {
        *h += b;
    }
    let keep = params.config.keep_prob;
    let mask = dropout_seed.filter(|_| keep < 1.0).map(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..pre_hidden.len())
            .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
            .collect::<Vec<_>>()
    });
    let mut hidden: Vec<f64> = pre_hidden.iter().map(|&a| elu(a)).collect();
    if let Some(m) = &mask {
        hidden.iter_mut().zip(m).for_each(|(h, s)| *h *= s);
    }
    let pre_out = dot(params.fc2_weight.data(), &hidden) + params.fc2_bias.data()[0];
    FcTrace {
        input,
        pre_hidden,
        mask,
        hidden,
        pre_out,
    }
}

/// Scores `u` (question side) against `v` (paraphrase side). A dropout seed
/// switches on training-mode dropout in the FC head.
pub(crate) fn forward_similarity(params: &ModelParams, u: &[f64], v: &[f64], dropout_seed: Option<u64>) -> SimTrace {
    let mode = params.config.mode;
    let mut trace = SimTrace {
        sv: None,
        bilin: 0.0,
        fc: None,
        fc_out: 0.0,
        score: 0.0,
    };
    if mode == SimilarityMode::DotProduct {
        trace.score = dot(u, v);
        return trace;
    }
    if mode.uses_bilinear() {
        let sv = matvec(&params.bilinear, v);
        trace.bilin = dot(u, &sv);
        trace.sv = Some(sv);
    }
    if mode.uses_fc() {
        let fc = forward_fc(params, u, v, dropout_seed);
        trace.fc_out = elu(fc.pre_out);
        trace.fc = Some(fc);
    }
    trace.score = match mode {
        SimilarityMode::Bilin => trace.bilin,
        SimilarityMode::Fc => trace.fc_out,
        SimilarityMode::FcBilin => {
            let a = params.alpha.data()[0];
            a * trace.bilin + (1.0 - a) * trace.fc_out
        }
        SimilarityMode::DotProduct => unreachable!(),
    };
    trace
}

/// Returns `(d score/du, d score/dv)` scaled by `g`, accumulating parameter
/// gradients into `grads`.
pub(crate) fn backward_similarity(
    params: &ModelParams,
    u: &[f64],
    v: &[f64],
    trace: &SimTrace,
    g: f64,
    grads: &mut ModelParams,
) -> (Vec<f64>, Vec<f64>) {
    let mode = params.config.mode;
    let mut du = vec![0.0; u.len()];
    let mut dv = vec![0.0; v.len()];
    if mode == SimilarityMode::DotProduct {
        axpy(g, v, &mut du);
        axpy(g, u, &mut dv);
        return (du, dv);
    }
    let (g_bilin, g_fc) = match mode {
        SimilarityMode::Bilin => (g, 0.0),
        SimilarityMode::Fc => (0.0, g),
        _ => {
            let a = params.alpha.data()[0];
            grads.alpha.data_mut()[0] += g * (trace.bilin - trace.fc_out);
            (g * a, g * (1.0 - a))
        }
    };
    if let Some(sv) = &trace.sv {
        axpy(g_bilin, sv, &mut du);
        for (r, &ur) in u.iter().enumerate() {
            let c = g_bilin * ur;
            if c != 0.0 {
                axpy(c, params.bilinear.row(r), &mut dv);
                axpy(c, v, grads.bilinear.row_mut(r));
            }
        }
    }
    if let Some(fc) = &trace.fc {
        let d_pre_out = g_fc * elu_grad(fc.pre_out);
        grads.fc2_bias.data_mut()[0] += d_pre_out;
        axpy(d_pre_out, &fc.hidden, grads.fc2_weight.data_mut());
        let mut dinput = vec![0.0; fc.input.len()];
        for (k, &a) in fc.pre_hidden.iter().enumerate() {
            let scale = fc.mask.as_ref().map_or(1.0, |m| m[k]);
            let da = d_pre_out * params.fc2_weight.data()[k] * scale * elu_grad(a);
            if da == 0.0 {
                continue;
            }
            grads.fc1_bias.data_mut()[k] += da;
            axpy(da, &fc.input, grads.fc1_weight.row_mut(k));
            axpy(da, params.fc1_weight.row(k), &mut dinput);
        }
        axpy(1.0, &dinput[..u.len()], &mut du);
        axpy(1.0, &dinput[u.len()..], &mut dv);
    }
    (du, dv)
}
