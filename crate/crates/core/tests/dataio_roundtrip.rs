mod common;

use embedgeo::dataio::{
    self, decode_embeddings, decode_weight_stack, encode_embeddings, write_weight_stack, DataError, Dtype,
    EmbeddingFormat, EmbeddingSet, Matrix, WeightStack,
};
use proptest::prelude::*;

use common::{gaussian_set, random_matrix, rng};

const EMB1_F64: EmbeddingFormat = EmbeddingFormat::Emb1(Dtype::F64);

#[test]
fn seeded_100x16_round_trips_in_both_formats() {
    let set = gaussian_set(&mut rng(7), 100, 16);
    let bin = encode_embeddings(&set, EMB1_F64);
    assert_eq!(bin.len(), 24 + 100 * 16 * 8);
    assert_eq!(decode_embeddings(&bin, EMB1_F64).unwrap(), set);
    let text = encode_embeddings(&set, EmbeddingFormat::Csv);
    assert_eq!(decode_embeddings(&text, EmbeddingFormat::Csv).unwrap(), set);
}

#[test]
fn seeded_three_layer_stack_round_trips_bit_exact() {
    let mut r = rng(11);
    let stack = WeightStack::new(vec![
        random_matrix(&mut r, 8, 5),
        random_matrix(&mut r, 6, 8),
        random_matrix(&mut r, 3, 6),
    ])
    .unwrap();
    let bytes = write_weight_stack(&stack);
    let back = decode_weight_stack(&bytes).unwrap();
    for (a, b) in stack.layers().iter().zip(back.layers()) {
        let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a), bits(b));
    }
}

#[test]
fn files_on_disk_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let set = gaussian_set(&mut rng(3), 12, 4).with_label("layer3");
    let path = dir.path().join("x.emb1");
    dataio::write_embeddings_file(&path, &set, EMB1_F64).unwrap();
    let back = dataio::read_embeddings_file(&path, EmbeddingFormat::from_path(&path)).unwrap();
    assert_eq!(back.matrix(), set.matrix());

    let csv = dir.path().join("x.csv");
    dataio::write_embeddings_file(&csv, &set, EmbeddingFormat::Csv).unwrap();
    assert_eq!(EmbeddingFormat::from_path(&csv), EmbeddingFormat::Csv);
    assert_eq!(
        dataio::read_embeddings_file(&csv, EmbeddingFormat::Csv)
            .unwrap()
            .matrix(),
        set.matrix()
    );
}

#[test]
fn f32_files_upcast_exactly() {
    let set = EmbeddingSet::from_rows(&[[0.5, -1.25], [3.0, 1e-3]]).unwrap();
    let bytes = encode_embeddings(&set, EmbeddingFormat::Emb1(Dtype::F32));
    assert_eq!(bytes[6], 0);
    let back = decode_embeddings(&bytes, EMB1_F64).unwrap();
    assert_eq!(back.row(0), &[0.5, -1.25]);
    assert_eq!(back.row(1)[1], 1e-3f32 as f64);
}

#[test]
fn header_is_little_endian() {
    let set = EmbeddingSet::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
    let bytes = encode_embeddings(&set, EMB1_F64);
    assert_eq!(&bytes[..4], b"EMB1");
    assert_eq!(&bytes[4..8], &[1, 0, 1, 0]);
    assert_eq!(&bytes[8..16], &1u64.to_le_bytes());
    assert_eq!(&bytes[16..24], &3u64.to_le_bytes());
    assert_eq!(&bytes[24..32], &1.0f64.to_le_bytes());
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn embedding_set() -> impl Strategy<Value = EmbeddingSet> {
    (1usize..12, 1usize..6).prop_flat_map(|(n, d)| {
        prop::collection::vec(finite(), n * d)
            .prop_map(move |data| EmbeddingSet::new(Matrix::from_vec(n, d, data)).unwrap())
    })
}

fn weight_stack() -> impl Strategy<Value = WeightStack> {
    prop::collection::vec(1usize..6, 2..5).prop_flat_map(|widths| {
        let shapes: Vec<(usize, usize)> = widths.windows(2).map(|w| (w[1], w[0])).collect();
        let total: usize = shapes.iter().map(|(r, c)| r * c).sum();
        prop::collection::vec(finite(), total).prop_map(move |data| {
            let mut at = 0;
            let layers = shapes
                .iter()
                .map(|&(r, c)| {
                    let m = Matrix::from_vec(r, c, data[at..at + r * c].to_vec());
                    at += r * c;
                    m
                })
                .collect();
            WeightStack::new(layers).unwrap()
        })
    })
}

fn bits(set: &EmbeddingSet) -> Vec<u64> {
    set.matrix().as_slice().iter().map(|v| v.to_bits()).collect()
}

proptest! {
    #[test]
    fn emb1_round_trip_is_bit_exact(set in embedding_set()) {
        let back = decode_embeddings(&encode_embeddings(&set, EMB1_F64), EMB1_F64).unwrap();
        prop_assert_eq!(bits(&back), bits(&set));
    }

    #[test]
    fn csv_round_trip_is_exact(set in embedding_set()) {
        let text = encode_embeddings(&set, EmbeddingFormat::Csv);
        let back = decode_embeddings(&text, EmbeddingFormat::Csv).unwrap();
        prop_assert_eq!(back.matrix(), set.matrix());
    }

    #[test]
    fn wts1_round_trip_is_bit_exact(stack in weight_stack()) {
        let back = decode_weight_stack(&write_weight_stack(&stack)).unwrap();
        prop_assert_eq!(back.len(), stack.len());
        for (a, b) in stack.layers().iter().zip(back.layers()) {
            prop_assert_eq!(a.shape(), b.shape());
            let ab: Vec<u64> = a.as_slice().iter().map(|v| v.to_bits()).collect();
            let bb: Vec<u64> = b.as_slice().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(ab, bb);
        }
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..96)) {
        let _ = decode_embeddings(&bytes, EMB1_F64);
        let _ = decode_embeddings(&bytes, EmbeddingFormat::Csv);
        let _ = decode_weight_stack(&bytes);
    }

    #[test]
    fn corrupted_files_raise_a_declared_error(set in embedding_set(), cut in 0usize..200, flip in 0usize..200) {
        let good = encode_embeddings(&set, EMB1_F64);
        let truncated = &good[..cut.min(good.len() - 1)];
        let err = decode_embeddings(truncated, EMB1_F64).unwrap_err();
        let declared = matches!(
            err,
            DataError::TruncatedPayload { .. } | DataError::MalformedHeader(_) | DataError::BadMagic { .. }
        );
        prop_assert!(declared, "{:?}", err);

        let mut mutated = good.clone();
        let at = flip % mutated.len();
        mutated[at] ^= 0xFF;
        match decode_embeddings(&mutated, EMB1_F64) {
            Ok(s) => prop_assert!(at >= 24 && s.n() == set.n() && s.dim() == set.dim()),
            Err(e) => prop_assert!(!e.name().is_empty()),
        }
    }
}
