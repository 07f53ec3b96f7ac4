use crate::numerics::{gaussian_init_with, Matrix, NumericsError, Rng};

/// Vocabulary size, embedding width and hidden width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub vocab: usize,
    pub embed: usize,
    pub hidden: usize,
}

impl ModelDims {
    /// `V·E + 2·(4H·(D+H) + 4H) + V·H + V` with `D = E` for the first layer
    /// and `D = H` for the second.
    pub fn parameter_count(&self) -> usize {
        let ModelDims { vocab, embed, hidden } = *self;
        let layer = |d: usize| 4 * hidden * (d + hidden) + 4 * hidden;
        vocab * embed + layer(embed) + layer(hidden) + vocab * hidden + vocab
    }
}

/// Weights of one LSTM layer. Gate blocks of `4H` rows are ordered
/// input, forget, cell candidate, output.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    /// Input-to-gates, `4H × D`.
    pub w: Matrix,
    /// Hidden-to-gates, `4H × H`.
    pub u: Matrix,
    /// Gate biases, `4H × 1`.
    pub b: Matrix,
}

impl LstmLayerParams {
    pub fn zeros(input: usize, hidden: usize) -> Result<Self, NumericsError> {
        Ok(Self {
            w: Matrix::zeros(4 * hidden, input)?,
            u: Matrix::zeros(4 * hidden, hidden)?,
            b: Matrix::zeros(4 * hidden, 1)?,
        })
    }

    pub fn input_size(&self) -> usize {
        self.w.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.u.cols()
    }
}

/// Number of tensors in [`ModelParams::tensors`].
pub const TENSOR_COUNT: usize = 9;

/// Embedding → LSTM → LSTM → dense projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// `V × E`
    pub embedding: Matrix,
    pub layer1: LstmLayerParams,
    pub layer2: LstmLayerParams,
    /// `V × H`
    pub proj_w: Matrix,
    /// `V × 1`
    pub proj_b: Matrix,
}

impl ModelParams {
    pub fn zeros(dims: ModelDims) -> Result<Self, NumericsError> {
        let ModelDims { vocab, embed, hidden } = dims;
        Ok(Self {
            embedding: Matrix::zeros(vocab, embed)?,
            layer1: LstmLayerParams::zeros(embed, hidden)?,
            layer2: LstmLayerParams::zeros(hidden, hidden)?,
            proj_w: Matrix::zeros(vocab, hidden)?,
            proj_b: Matrix::zeros(vocab, 1)?,
        })
    }

    /// Weight matrices drawn from `N(0, std²)` in declaration order from one
    /// stream seeded by `seed`; biases start at zero.
    pub fn init(dims: ModelDims, std: f64, seed: u64) -> Result<Self, NumericsError> {
        let ModelDims { vocab, embed, hidden } = dims;
        let mut rng = Rng::seed_from(seed);
        let mut draw = |r, c| gaussian_init_with(r, c, 0.0, std, &mut rng);
        let embedding = draw(vocab, embed)?;
        let layer1 = LstmLayerParams {
            w: draw(4 * hidden, embed)?,
            u: draw(4 * hidden, hidden)?,
            b: Matrix::zeros(4 * hidden, 1)?,
        };
        let layer2 = LstmLayerParams {
            w: draw(4 * hidden, hidden)?,
            u: draw(4 * hidden, hidden)?,
            b: Matrix::zeros(4 * hidden, 1)?,
        };
        let proj_w = draw(vocab, hidden)?;
        Ok(Self {
            embedding,
            layer1,
            layer2,
            proj_w,
            proj_b: Matrix::zeros(vocab, 1)?,
        })
    }

    pub fn dims(&self) -> ModelDims {
        ModelDims {
            vocab: self.embedding.rows(),
            embed: self.embedding.cols(),
            hidden: self.layer1.hidden_size(),
        }
    }

    /// All tensors in the fixed declaration order used by checkpoints and the
    /// optimizer.
    pub fn tensors(&self) -> [&Matrix; TENSOR_COUNT] {
        [
            &self.embedding,
            &self.layer1.w,
            &self.layer1.u,
            &self.layer1.b,
            &self.layer2.w,
            &self.layer2.u,
            &self.layer2.b,
            &self.proj_w,
            &self.proj_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Matrix; TENSOR_COUNT] {
        [
            &mut self.embedding,
            &mut self.layer1.w,
            &mut self.layer1.u,
            &mut self.layer1.b,
            &mut self.layer2.w,
            &mut self.layer2.u,
            &mut self.layer2.b,
            &mut self.proj_w,
            &mut self.proj_b,
        ]
    }

    pub fn tensor_names() -> [&'static str; TENSOR_COUNT] {
        [
            "embedding",
            "layer1.w",
            "layer1.u",
            "layer1.b",
            "layer2.w",
            "layer2.u",
            "layer2.b",
            "proj_w",
            "proj_b",
        ]
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.tensors().iter().map(|t| t.shape()).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Structural consistency of all shapes with `dims()`.
    pub fn shapes_consistent(&self) -> bool {
        let ModelDims { vocab, embed, hidden } = self.dims();
        let expected = [
            (vocab, embed),
            (4 * hidden, embed),
            (4 * hidden, hidden),
            (4 * hidden, 1),
            (4 * hidden, hidden),
            (4 * hidden, hidden),
            (4 * hidden, 1),
            (vocab, hidden),
            (vocab, 1),
        ];
        self.shapes() == expected
    }

    pub fn fill(&mut self, value: f64) {
        for t in self.tensors_mut() {
            t.fill(value);
        }
    }
}
