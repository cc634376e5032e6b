use crate::mask::Mask;

use super::{DatasetError, SamplePair};

/// One fixed-size record: the gather as little-endian f32, row-major,
/// followed by the target mask as one byte per cell.
pub fn encode_record(sample: &SamplePair) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 * sample.input.len() + sample.target.len());
    out.extend(sample.input.iter().flat_map(|v| v.to_le_bytes()));
    out.extend_from_slice(sample.target.as_bytes());
    out
}

/// Splits a record back into the gather and mask. `input_shape` is
/// `(rows, receivers)`, `target_shape` is `(rows, cols)`.
pub fn decode_record(
    bytes: &[u8],
    input_shape: (usize, usize),
    target_shape: (usize, usize),
) -> Result<(Vec<f32>, Mask), DatasetError> {
    let n_in = input_shape.0 * input_shape.1;
    let (h, w) = target_shape;
    if bytes.len() != 4 * n_in + h * w {
        return Err(DatasetError::Format(format!(
            "record is {} bytes, expected {}",
            bytes.len(),
            4 * n_in + h * w
        )));
    }
    let (head, tail) = bytes.split_at(4 * n_in);
    let input = head
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let target = Mask::from_bits(w, h, tail.to_vec()).map_err(DatasetError::Format)?;
    Ok((input, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SampleMeta;
    use crate::scenegen::SceneSpec;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn record_roundtrip(
            input in proptest::collection::vec(-50.0f32..=50.0, 6),
            bits in proptest::collection::vec(0u8..2, 12),
        ) {
            let sample = SamplePair {
                input: input.clone(),
                input_shape: (3, 2),
                target: Mask::from_bits(4, 3, bits).unwrap(),
                meta: SampleMeta {
                    seed: 1,
                    effective_seed: 1,
                    scene: SceneSpec::new(1, vec![]),
                    scale_factor: 1.0,
                },
            };
            let bytes = encode_record(&sample);
            prop_assert_eq!(bytes.len(), 6 * 4 + 12);
            let (i, t) = decode_record(&bytes, (3, 2), (3, 4)).unwrap();
            prop_assert_eq!(i.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            input.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(t, sample.target);
        }
    }

    #[test]
    fn rejects_wrong_length_and_non_binary_target() {
        assert!(decode_record(&[0; 10], (1, 2), (1, 1)).is_err());
        let mut bytes = vec![0u8; 8];
        bytes.push(2);
        assert!(decode_record(&bytes, (1, 2), (1, 1)).is_err());
    }
}
