use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::GnnModel;
use crate::error::{Error, Result};

const FORMAT: &str = "gnnstab-checkpoint";
const VERSION: u32 = 1;

/// JSON checkpoint: model dimensions and parameters plus an echo of the
/// configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub node_count: usize,
    pub dimensions: Vec<usize>,
    pub taps: Vec<usize>,
    pub model: GnnModel,
    pub config: serde_json::Value,
}

impl Checkpoint {
    pub fn new(model: GnnModel, node_count: usize, config: serde_json::Value) -> Self {
        let mut dimensions = vec![model.input_features()];
        dimensions.extend(model.layers().iter().map(|l| l.bank.f_out()));
        let taps = model.layers().iter().map(|l| l.bank.k()).collect();
        Checkpoint {
            format: FORMAT.into(),
            version: VERSION,
            node_count,
            dimensions,
            taps,
            model,
            config,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format != FORMAT || ck.version != VERSION {
            return Err(Error::Validation(format!(
                "unsupported checkpoint {} v{}",
                ck.format, ck.version
            )));
        }
        Ok(ck)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::model::{Activation, LayerShape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn save_and_load() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let shapes = [LayerShape {
            features: 3,
            taps: 4,
            activation: Activation::Relu,
        }];
        let model = GnnModel::init(1, &shapes, 7, &mut rng).unwrap();
        let ck = Checkpoint::new(model, 10, serde_json::json!({"mu": 0.5}));
        assert_eq!(ck.dimensions, vec![1, 3]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ck);
        // Parameters survive bit-for-bit.
        let a = ck.model.parameters();
        let b = back.model.parameters();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn rejects_foreign_format() {
        let text = r#"{"format":"other","version":1,"node_count":1,"dimensions":[],"taps":[],
            "model":{"layers":[],"readout":[],"bias":0.0,"node":0},"config":null}"#;
        assert!(Checkpoint::from_json(text).is_err());
    }
}
