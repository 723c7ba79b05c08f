use std::path::Path;

use imgseek_core::FeatureVector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::HarnessError;

/// Feature vectors paired with pseudo-images. Entry `i` is image `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub features: Vec<FeatureVector>,
    pub images: Vec<Vec<u8>>,
}

impl Fixture {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.features.first().map(FeatureVector::dim)
    }
}

fn check_range(value_range: f64, limit: f64) -> Result<(), HarnessError> {
    if !value_range.is_finite() || value_range < 0.0 {
        return Err(HarnessError::Config(format!("invalid value range {value_range}")));
    }
    if value_range >= limit {
        return Err(HarnessError::Config(format!(
            "value range {value_range} is not below the safe magnitude {limit:e}"
        )));
    }
    Ok(())
}

/// Components uniform in `[-value_range, value_range]`, images uniform
/// random bytes. Fails when `value_range` is not below `limit` (the safe
/// magnitude for the key and scale in use).
pub fn generate_fixture(
    seed: u64,
    count: usize,
    dim: usize,
    value_range: f64,
    image_bytes: usize,
    limit: f64,
) -> Result<Fixture, HarnessError> {
    check_range(value_range, limit)?;
    if dim == 0 && count > 0 {
        return Err(HarnessError::Config("feature dimension must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(count);
    let mut images = Vec::with_capacity(count);
    for _ in 0..count {
        let v = (0..dim).map(|_| rng.gen_range(-value_range..=value_range)).collect();
        features.push(FeatureVector::new(v).map_err(|e| HarnessError::Config(e.to_string()))?);
        let mut image = vec![0u8; image_bytes];
        rng.fill_bytes(&mut image);
        images.push(image);
    }
    Ok(Fixture { features, images })
}

/// Seeded pseudo-images for externally supplied features.
pub fn pseudo_images(seed: u64, count: usize, image_bytes: usize) -> Vec<Vec<u8>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x696d_6167_6573);
    (0..count)
        .map(|_| {
            let mut image = vec![0u8; image_bytes];
            rng.fill_bytes(&mut image);
            image
        })
        .collect()
}

/// A query near a randomly chosen stored vector: each component moved by
/// at most `noise` and clamped to `[-clamp, clamp]`. Returns the query and
/// the 1-based index it was derived from.
pub fn derive_query(
    fixture: &Fixture,
    seed: u64,
    noise: f64,
    clamp: f64,
) -> Option<(FeatureVector, u32)> {
    if fixture.is_empty() {
        return None;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(0x7175_6572_79));
    let i = rng.gen_range(0..fixture.len());
    let v = fixture.features[i]
        .components()
        .iter()
        .map(|x| {
            let d = if noise > 0.0 { rng.gen_range(-noise..=noise) } else { 0.0 };
            (x + d).clamp(-clamp, clamp)
        })
        .collect();
    Some((FeatureVector::new(v).ok()?, i as u32 + 1))
}

/// One feature vector per CSV row. Blank lines and `#` comments are
/// skipped; a first row that is not numeric is taken as a header.
pub fn read_features_csv(path: &Path) -> Result<Vec<FeatureVector>, HarnessError> {
    let err = |msg: String| HarnessError::Features(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let mut out: Vec<FeatureVector> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(e.to_string()))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if row == 0 => continue,
            Err(e) => return Err(err(format!("row {}: {e}", row + 1))),
        };
        let v = FeatureVector::new(values).map_err(|e| err(format!("row {}: {e}", row + 1)))?;
        if let Some(first) = out.first() {
            if first.dim() != v.dim() {
                return Err(err(format!(
                    "row {} has {} values, expected {}",
                    row + 1,
                    v.dim(),
                    first.dim()
                )));
            }
        }
        out.push(v);
    }
    Ok(out)
}
