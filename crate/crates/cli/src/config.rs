use std::path::Path;

use lynwerk_core::generator::GenConfig;
use lynwerk_core::trainer::TrainConfig;
use serde::Deserialize;

use crate::{Failure, GenerateArgs, TrainArgs};

/// Contents of `--config`. Missing tables and fields keep their defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub train: TrainConfig,
    pub generate: GenConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Data(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

macro_rules! overlay {
    ($target:expr, $args:expr, $($field:ident => $flag:ident),* $(,)?) => {
        $(if let Some(v) = $args.$flag { $target.$field = v; })*
    };
}

pub fn train_config(file: &FileConfig, args: &TrainArgs, seed: Option<u64>) -> Result<TrainConfig, Failure> {
    let mut c = file.train.clone();
    overlay!(c, args,
        epochs => epochs, lr => lr, batch_size => batch, embedding_dim => embedding_dim,
        hidden => hidden, layers => layers, dropout => dropout, max_seq_len => max_seq_len,
        min_count => min_count, init_std => init_std, holdout_fraction => holdout,
    );
    if args.grad_clip.is_some() {
        c.grad_clip = args.grad_clip;
    }
    if let Some(s) = seed {
        c.seed = s;
    }
    c.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(c)
}

pub fn gen_config(file: &FileConfig, args: &GenerateArgs, seed: Option<u64>) -> Result<GenConfig, Failure> {
    let mut c = file.generate.clone();
    overlay!(c, args,
        count => count, temperature => temperature, max_ngram_overlap => max_overlap, max_tokens => max_tokens,
    );
    c.greedy |= args.greedy;
    c.allow_unk |= args.allow_unk;
    if let Some(s) = seed {
        c.seed = s;
    }
    c.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(c)
}
