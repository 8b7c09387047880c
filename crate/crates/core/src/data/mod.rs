//! Dataset ingestion, binarization, synthetic distribution generation,
//! experiment configuration and results serialization.

pub mod config;
pub mod csv;
pub mod idx;
pub mod synthetic;

use rand::Rng;
use thiserror::Error;

use crate::rbm::BitVector;
use crate::rng::Prng;
use idx::IdxTensor;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad IDX magic at byte {offset}: expected 0x00, got {byte:#04x}")]
    BadMagic { offset: usize, byte: u8 },
    #[error("unsupported IDX type code {code:#04x} at byte 2 (only 0x08 unsigned byte)")]
    UnsupportedType { code: u8 },
    #[error("unsupported IDX dimension count {dims} at byte 3 (expected 1 to 3)")]
    BadDimCount { dims: u8 },
    #[error("truncated IDX file: expected {expected} bytes, found {actual} (payload starts at byte {payload_offset})")]
    Truncated {
        expected: usize,
        actual: usize,
        payload_offset: usize,
    },
    #[error("IDX file has {extra} trailing bytes after byte {end}")]
    TrailingBytes { extra: usize, end: usize },
    #[error("config error in {path}: {message}")]
    Config { path: String, message: String },
    #[error("results file {path}: {message} (line {line})")]
    Csv {
        path: String,
        message: String,
        line: usize,
    },
    #[error("field {field} contains a character not allowed in CSV output: {value:?}")]
    CsvField { field: &'static str, value: String },
    #[error("{visible} visible units exceed the enumeration guard for synthetic tables")]
    SyntheticGuard { visible: usize },
    #[error("dataset error: {0}")]
    Invalid(String),
}

/// A binarized dataset ready for training.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    pub samples: Vec<BitVector>,
    pub labels: Option<Vec<usize>>,
    /// Where the data came from, for manifests.
    pub source: String,
}

impl BinaryDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_len(&self) -> usize {
        self.samples.first().map_or(0, BitVector::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinarizeMode {
    /// bit = 1 iff pixel/255 > t.
    Threshold(f64),
    /// bit ~ Bernoulli(pixel/255).
    Stochastic,
}

/// Binarize a byte tensor; the first dimension indexes samples, the rest
/// flatten into the sample vector.
pub fn binarize(images: &IdxTensor, mode: BinarizeMode, rng: &mut Prng) -> BinaryDataset {
    let count = images.dims.first().copied().unwrap_or(0);
    let sample_len: usize = images.dims.iter().skip(1).product::<usize>().max(1);
    let mut samples = Vec::with_capacity(count);
    for s in 0..count {
        let start = s * sample_len;
        let pixels = &images.elements[start..start + sample_len];
        let bits: Vec<u8> = pixels
            .iter()
            .map(|&px| {
                let p = px as f64 / 255.0;
                match mode {
                    BinarizeMode::Threshold(t) => u8::from(p > t),
                    BinarizeMode::Stochastic => u8::from(rng.random::<f64>() < p),
                }
            })
            .collect();
        samples.push(BitVector::new(bits).expect("bits are 0/1 by construction"));
    }
    BinaryDataset {
        samples,
        labels: None,
        source: format!("idx:{:?}", images.dims),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn tensor(dims: Vec<usize>, elements: Vec<u8>) -> IdxTensor {
        IdxTensor { dims, elements }
    }

    #[test]
    fn binarize_degenerate_pixels() {
        let t = tensor(vec![2, 3], vec![0, 0, 0, 255, 255, 255]);
        let mut r = rng::stream(1, 0);
        for mode in [BinarizeMode::Threshold(0.5), BinarizeMode::Stochastic] {
            let ds = binarize(&t, mode, &mut r);
            assert_eq!(ds.samples[0], BitVector::zeros(3));
            assert_eq!(ds.samples[1], BitVector::ones(3));
        }
    }

    #[test]
    fn stochastic_binarize_matches_pixel_level() {
        let n = 100_000;
        let t = tensor(vec![1, n], vec![128u8; n]);
        let mut r = rng::stream(2, 0);
        let ds = binarize(&t, BinarizeMode::Stochastic, &mut r);
        let mean = ds.samples[0].ones_iter().count() as f64 / n as f64;
        let p = 128.0 / 255.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (mean - p).abs() <= 3.0 * se,
            "mean {mean} vs expected {p} (se {se})"
        );
    }

    #[test]
    fn binarize_is_deterministic_per_seed() {
        let t = tensor(vec![4, 8], (0..32u8).map(|x| x * 8).collect());
        let mut r1 = rng::stream(3, 0);
        let mut r2 = rng::stream(3, 0);
        let a = binarize(&t, BinarizeMode::Stochastic, &mut r1);
        let b = binarize(&t, BinarizeMode::Stochastic, &mut r2);
        assert_eq!(a, b);
    }
}
