use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::array::Array;
use super::config::ModelConfig;

const INIT_RANGE: f64 = 0.05;

/// One bank of 1-D convolution filters of a single width.
///
/// `weight` is `filters × (width·input_dim)`: a filter row is laid out window
/// position first, so it lines up with a contiguous slice of row-major input.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv {
    pub width: usize,
    pub weight: Array,
    pub bias: Array,
}

impl Conv {
    fn zeros(width: usize, filters: usize, input_dim: usize) -> Conv {
        Conv {
            width,
            weight: Array::zeros(filters, width * input_dim),
            bias: Array::zeros(1, filters),
        }
    }

    pub fn filters(&self) -> usize {
        self.weight.rows()
    }
}

/// Every trainable array of the model. The same type doubles as a gradient
/// accumulator (see [`ModelParams::zeros_like`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub word_emb: Array,
    pub char_emb: Array,
    pub char_convs: Vec<Conv>,
    pub question_encoder: Vec<Conv>,
    pub paraphrase_encoder: Vec<Conv>,
    pub bilinear: Array,
    pub fc1_weight: Array,
    pub fc1_bias: Array,
    pub fc2_weight: Array,
    pub fc2_bias: Array,
    pub alpha: Array,
}

impl ModelParams {
    /// All-zero arrays with shapes derived from the config and vocabulary sizes.
    pub fn zeros(config: &ModelConfig, word_count: usize, char_count: usize) -> ModelParams {
        let dt = config.token_dim();
        let ds = config.sentence_dim();
        let encoder = || {
            config
                .sentence_widths
                .iter()
                .map(|&l| Conv::zeros(l, config.sentence_filters, dt))
                .collect::<Vec<_>>()
        };
        ModelParams {
            config: config.clone(),
            word_emb: Array::zeros(word_count, config.word_dim),
            char_emb: Array::zeros(char_count, config.char_dim),
            char_convs: config
                .char_widths
                .iter()
                .map(|&w| Conv::zeros(w, config.char_filters, config.char_dim))
                .collect(),
            question_encoder: encoder(),
            paraphrase_encoder: encoder(),
            bilinear: Array::zeros(ds, ds),
            fc1_weight: Array::zeros(config.hidden, 2 * ds),
            fc1_bias: Array::zeros(1, config.hidden),
            fc2_weight: Array::zeros(1, config.hidden),
            fc2_bias: Array::zeros(1, 1),
            alpha: Array::zeros(1, 1),
        }
    }

    /// Uniform(-0.05, 0.05) everywhere in [`ModelParams::named`] order;
    /// alpha starts at `config.alpha_init`.
    pub fn init(config: &ModelConfig, word_count: usize, char_count: usize, seed: u64) -> ModelParams {
        let mut p = ModelParams::zeros(config, word_count, char_count);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, array) in p.named_mut() {
            if name == "alpha" {
                continue;
            }
            for x in array.data_mut() {
                *x = rng.gen_range(-INIT_RANGE..INIT_RANGE);
            }
        }
        p.alpha.data_mut()[0] = config.alpha_init;
        p
    }

    pub fn zeros_like(&self) -> ModelParams {
        ModelParams::zeros(&self.config, self.word_emb.rows(), self.char_emb.rows())
    }

    pub fn encoder(&self, side: super::Side) -> &[Conv] {
        match side {
            super::Side::Question => &self.question_encoder,
            super::Side::Paraphrase => &self.paraphrase_encoder,
        }
    }

    pub(crate) fn encoder_mut(&mut self, side: super::Side) -> &mut [Conv] {
        match side {
            super::Side::Question => &mut self.question_encoder,
            super::Side::Paraphrase => &mut self.paraphrase_encoder,
        }
    }

    /// Arrays with stable names, in a fixed order.
    pub fn named(&self) -> Vec<(String, &Array)> {
        let mut out: Vec<(String, &Array)> = vec![
            ("word_emb".into(), &self.word_emb),
            ("char_emb".into(), &self.char_emb),
        ];
        for c in &self.char_convs {
            out.push((format!("char_conv.w{}.weight", c.width), &c.weight));
            out.push((format!("char_conv.w{}.bias", c.width), &c.bias));
        }
        for (prefix, enc) in [("question_encoder", &self.question_encoder), ("paraphrase_encoder", &self.paraphrase_encoder)] {
            for c in enc {
                out.push((format!("{prefix}.l{}.weight", c.width), &c.weight));
                out.push((format!("{prefix}.l{}.bias", c.width), &c.bias));
            }
        }
        out.push(("bilinear".into(), &self.bilinear));
        out.push(("fc1.weight".into(), &self.fc1_weight));
        out.push(("fc1.bias".into(), &self.fc1_bias));
        out.push(("fc2.weight".into(), &self.fc2_weight));
        out.push(("fc2.bias".into(), &self.fc2_bias));
        out.push(("alpha".into(), &self.alpha));
        out
    }

    /// Mutable counterpart of [`ModelParams::named`], same order.
    pub fn named_mut(&mut self) -> Vec<(String, &mut Array)> {
        let mut out: Vec<(String, &mut Array)> = vec![
            ("word_emb".into(), &mut self.word_emb),
            ("char_emb".into(), &mut self.char_emb),
        ];
        for c in &mut self.char_convs {
            out.push((format!("char_conv.w{}.weight", c.width), &mut c.weight));
            out.push((format!("char_conv.w{}.bias", c.width), &mut c.bias));
        }
        for (prefix, enc) in [
            ("question_encoder", &mut self.question_encoder),
            ("paraphrase_encoder", &mut self.paraphrase_encoder),
        ] {
            for c in enc {
                out.push((format!("{prefix}.l{}.weight", c.width), &mut c.weight));
                out.push((format!("{prefix}.l{}.bias", c.width), &mut c.bias));
            }
        }
        out.push(("bilinear".into(), &mut self.bilinear));
        out.push(("fc1.weight".into(), &mut self.fc1_weight));
        out.push(("fc1.bias".into(), &mut self.fc1_bias));
        out.push(("fc2.weight".into(), &mut self.fc2_weight));
        out.push(("fc2.bias".into(), &mut self.fc2_bias));
        out.push(("alpha".into(), &mut self.alpha));
        out
    }

    /// Elementwise `self += other`; shapes must agree.
    pub fn add_assign(&mut self, other: &ModelParams) {
        for ((_, a), (_, b)) in self.named_mut().into_iter().zip(other.named()) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, a) in self.named_mut() {
            a.data_mut().iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.named().iter().map(|(_, a)| a.len()).sum()
    }

    /// Name of the first array holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<String> {
        self.named().into_iter().find(|(_, a)| !a.is_finite()).map(|(n, _)| n)
    }
}
