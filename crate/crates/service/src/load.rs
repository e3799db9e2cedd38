use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use explainbot_core::dialogue::{Assets, Deps, DialogueError};
use explainbot_core::forest::{read_forest, ForestError};
use explainbot_core::nlu::{load_catalog, Lexicon, NluError};
use explainbot_core::tabular::{bundled_titanic, load_dataset, Schema, TabularError};
use explainbot_core::{Forest, BUNDLED_MODEL};
use sha2::{Digest, Sha256};

/// Files to load instead of the bundled ones.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub model: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub data: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Nlu(#[from] NluError),
    #[error(transparent)]
    Tabular(#[from] TabularError),
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
}

pub struct Loaded {
    pub deps: Arc<Deps>,
    /// SHA-256 of the model file bytes.
    pub fingerprint: String,
    pub catalog_size: usize,
}

pub fn fingerprint(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read(path: &Path) -> Result<Vec<u8>, LoadError> {
    std::fs::read(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}

pub fn load(opts: &LoadOptions) -> Result<Loaded, LoadError> {
    let schema = Arc::new(Schema::titanic());
    let bytes = match &opts.model {
        Some(p) => read(p)?,
        None => BUNDLED_MODEL.as_bytes().to_vec(),
    };
    let forest: Forest = read_forest(Cursor::new(&bytes), schema.clone())?;
    let data = match &opts.data {
        Some(p) => load_dataset(p, schema.clone())?,
        None => bundled_titanic(),
    };
    let mut assets = Assets::bundled(&schema);
    if let Some(p) = &opts.catalog {
        assets.nlu.catalog = load_catalog(p)?;
    }
    if let Some(p) = &opts.lexicon {
        let text = String::from_utf8_lossy(&read(p)?).into_owned();
        assets.nlu.lexicon = Lexicon::parse(&text, &schema)?;
    }
    let catalog_size = assets.nlu.catalog.len();
    let deps = Deps::for_forest(forest, data, assets)?;
    Ok(Loaded {
        deps: Arc::new(deps),
        fingerprint: fingerprint(&bytes),
        catalog_size,
    })
}
