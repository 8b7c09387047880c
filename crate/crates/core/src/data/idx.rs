//! IDX tensor files: two zero bytes, a type code, a dimension count, that
//! many big-endian u32 sizes, then the row-major payload. Only the unsigned
//! byte type code (0x08) is supported and the byte count must match the
//! header exactly.

use std::fs;
use std::path::Path;

use super::DataError;

const TYPE_UNSIGNED_BYTE: u8 = 0x08;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxTensor {
    pub dims: Vec<usize>,
    pub elements: Vec<u8>,
}

impl IdxTensor {
    pub fn new(dims: Vec<usize>, elements: Vec<u8>) -> Result<Self, DataError> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(DataError::BadDimCount {
                dims: dims.len() as u8,
            });
        }
        let expected: usize = dims.iter().product();
        if elements.len() != expected {
            return Err(DataError::Invalid(format!(
                "{expected} elements expected for dims {dims:?}, got {}",
                elements.len()
            )));
        }
        Ok(Self { dims, elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<IdxTensor, DataError> {
    let need = |offset: usize, len: usize| -> Result<(), DataError> {
        if bytes.len() < offset + len {
            Err(DataError::Truncated {
                expected: offset + len,
                actual: bytes.len(),
                payload_offset: offset,
            })
        } else {
            Ok(())
        }
    };

    need(0, 4)?;
    for offset in 0..2 {
        if bytes[offset] != 0 {
            return Err(DataError::BadMagic {
                offset,
                byte: bytes[offset],
            });
        }
    }
    if bytes[2] != TYPE_UNSIGNED_BYTE {
        return Err(DataError::UnsupportedType { code: bytes[2] });
    }
    let dim_count = bytes[3];
    if dim_count == 0 || dim_count > 3 {
        return Err(DataError::BadDimCount { dims: dim_count });
    }

    let header_len = 4 + 4 * dim_count as usize;
    need(4, 4 * dim_count as usize)?;
    let mut dims = Vec::with_capacity(dim_count as usize);
    for d in 0..dim_count as usize {
        let at = 4 + 4 * d;
        let size = u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap());
        dims.push(size as usize);
    }

    let payload: usize = dims.iter().product();
    if bytes.len() < header_len + payload {
        return Err(DataError::Truncated {
            expected: header_len + payload,
            actual: bytes.len(),
            payload_offset: header_len,
        });
    }
    if bytes.len() > header_len + payload {
        return Err(DataError::TrailingBytes {
            extra: bytes.len() - header_len - payload,
            end: header_len + payload,
        });
    }
    Ok(IdxTensor {
        dims,
        elements: bytes[header_len..].to_vec(),
    })
}

pub fn to_bytes(tensor: &IdxTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 4 * tensor.dims.len() + tensor.elements.len());
    out.extend_from_slice(&[0, 0, TYPE_UNSIGNED_BYTE, tensor.dims.len() as u8]);
    for &d in &tensor.dims {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(&tensor.elements);
    out
}

pub fn read_idx(path: impl AsRef<Path>) -> Result<IdxTensor, DataError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_bytes(&bytes)
}

pub fn write_idx(path: impl AsRef<Path>, tensor: &IdxTensor) -> Result<(), DataError> {
    let path = path.as_ref();
    fs::write(path, to_bytes(tensor)).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_valid_file_parses() {
        let bytes = [0u8, 0, 0x08, 1, 0, 0, 0, 3, 1, 2, 3];
        let t = from_bytes(&bytes).unwrap();
        assert_eq!(t.dims, vec![3]);
        assert_eq!(t.elements, vec![1, 2, 3]);
    }

    #[test]
    fn three_dimensional_row_major_order_is_preserved() {
        let mut bytes = vec![0u8, 0, 0x08, 3];
        for _ in 0..3 {
            bytes.extend_from_slice(&2u32.to_be_bytes());
        }
        bytes.extend_from_slice(&[10, 11, 12, 13, 14, 15, 16, 17]);
        let t = from_bytes(&bytes).unwrap();
        assert_eq!(t.dims, vec![2, 2, 2]);
        assert_eq!(t.elements, vec![10, 11, 12, 13, 14, 15, 16, 17]);
        assert_eq!(to_bytes(&t), bytes);
    }

    #[test]
    fn bad_magic_names_offset() {
        let err = from_bytes(&[1, 0, 0x08, 1, 0, 0, 0, 0]).unwrap_err();
        assert!(matches!(err, DataError::BadMagic { offset: 0, byte: 1 }));
        let err = from_bytes(&[0, 7, 0x08, 1, 0, 0, 0, 0]).unwrap_err();
        assert!(matches!(err, DataError::BadMagic { offset: 1, byte: 7 }));
    }

    #[test]
    fn unsupported_type_code_is_rejected() {
        let err = from_bytes(&[0, 0, 0x07, 1, 0, 0, 0, 0]).unwrap_err();
        assert!(matches!(err, DataError::UnsupportedType { code: 0x07 }));
    }

    #[test]
    fn truncation_and_trailing_bytes_are_distinct_errors() {
        let short = [0u8, 0, 0x08, 1, 0, 0, 0, 5, 1, 2];
        assert!(matches!(
            from_bytes(&short).unwrap_err(),
            DataError::Truncated { expected: 13, actual: 10, .. }
        ));
        let long = [0u8, 0, 0x08, 1, 0, 0, 0, 1, 1, 99];
        assert!(matches!(
            from_bytes(&long).unwrap_err(),
            DataError::TrailingBytes { extra: 1, end: 9 }
        ));
    }

    #[test]
    fn dimension_count_is_bounded() {
        let err = from_bytes(&[0, 0, 0x08, 4]).unwrap_err();
        assert!(matches!(err, DataError::BadDimCount { dims: 4 }));
        let err = from_bytes(&[0, 0, 0x08, 0]).unwrap_err();
        assert!(matches!(err, DataError::BadDimCount { dims: 0 }));
    }

    #[test]
    fn file_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fixture.idx");
        let t = IdxTensor::new(vec![2, 3], vec![9, 8, 7, 6, 5, 4]).unwrap();
        write_idx(&path, &t).unwrap();
        let raw = std::fs::read(&path).unwrap();
        let reread = read_idx(&path).unwrap();
        assert_eq!(reread, t);
        assert_eq!(to_bytes(&reread), raw);
    }
}
