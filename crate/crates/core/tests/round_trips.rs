use litterscan_core::dataset::{read_samples, write_samples, Normalizer, SampleSet};
use litterscan_core::mlp::{forward, init_model, load_model, save_model};
use litterscan_core::raster_io::{
    load_stack, read_cube, read_float_raster, read_mask, save_stack, write_cube,
    write_float_raster, write_mask, Band, BandId, BandStack, LabelMask,
};
use litterscan_core::resample::AlignedCube;
use litterscan_core::rng::SplitMix64;
use proptest::prelude::*;

fn random_stack(seed: u64, base: usize) -> BandStack {
    let mut rng = SplitMix64::new(seed);
    let extent = (base * 60) as f64;
    let bands = BandId::ALL
        .iter()
        .rev()
        .map(|&id| {
            let spec = id.spec();
            let n = (extent / spec.native_gsd_m) as usize;
            let px = (0..n * n).map(|_| rng.next_below(65536) as u16).collect();
            Band::new(spec, n, n, px).unwrap()
        })
        .collect();
    BandStack::new(bands, extent).unwrap()
}

#[test]
fn stack_container_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let stack = random_stack(1, 2);
    let manifest = save_stack(&stack, dir.path()).unwrap();
    let back = load_stack(&manifest).unwrap();
    assert_eq!(back, stack);
    assert_eq!(back.band_ids(), BandId::ALL);
}

#[test]
fn stack_rejects_short_payload() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = save_stack(&random_stack(2, 1), dir.path()).unwrap();
    let b8 = dir.path().join("B8.u16");
    let bytes = std::fs::read(&b8).unwrap();
    std::fs::write(&b8, &bytes[..bytes.len() - 2]).unwrap();
    assert!(load_stack(&manifest).is_err());
    std::fs::remove_file(&b8).unwrap();
    assert!(load_stack(&manifest).is_err());
}

#[test]
fn manifest_order_does_not_matter() {
    let dir = tempfile::tempdir().unwrap();
    let b8 = Band::new(BandId::B8.spec(), 6, 6, (0..36).collect()).unwrap();
    let b4 = Band::new(
        litterscan_core::raster_io::BandSpec {
            native_gsd_m: 60.0,
            ..BandId::B4.spec()
        },
        1,
        1,
        vec![9],
    )
    .unwrap();
    let path = save_stack(&BandStack::new(vec![b8, b4], 60.0).unwrap(), dir.path()).unwrap();
    // rewrite the manifest with B8 listed first
    let mut doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    doc["bands"].as_array_mut().unwrap().reverse();
    std::fs::write(&path, serde_json::to_vec(&doc).unwrap()).unwrap();
    assert_eq!(
        load_stack(&path).unwrap().band_ids(),
        [BandId::B4, BandId::B8]
    );
}

#[test]
fn cube_container_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = SplitMix64::new(4);
    let planes = [BandId::B2, BandId::B8, BandId::B11]
        .iter()
        .map(|&id| {
            (
                id,
                (0..15)
                    .map(|_| (rng.next_f64() * 5000.0 - 10.0) as f32)
                    .collect(),
            )
        })
        .collect();
    let cube = AlignedCube::from_planes(3, 5, planes).unwrap();
    let path = dir.path().join("scene.json");
    write_cube(&cube, &path).unwrap();
    assert!(dir.path().join("scene.f32").exists());
    assert_eq!(read_cube(&path).unwrap(), cube);
}

#[test]
fn model_file_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    for seed in 0..5 {
        let model = init_model(seed, Normalizer::identity(), BandId::ALL.to_vec()).unwrap();
        save_model(&model, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back.params(), model.params());
        let mut rng = SplitMix64::new(seed + 100);
        for _ in 0..20 {
            let x = std::array::from_fn(|_| 2.0 * rng.next_f64() - 1.0);
            assert_eq!(forward(&back, &x).to_bits(), forward(&model, &x).to_bits());
        }
    }
}

#[test]
fn hand_written_model_fixture_loads() {
    let model = load_model(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/minimal_model.json"
    ))
    .unwrap();
    assert_eq!(model.param_count(), 151);
    // zero weights except the output bias of 0: logistic(0)
    assert_eq!(forward(&model, &[0.0; 13]), 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mask_round_trip(rows in 1usize..40, cols in 1usize..40, seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        let mut rng = SplitMix64::new(seed);
        let labels = (0..rows * cols).map(|_| rng.next_below(2) as u8).collect();
        let mask = LabelMask::new(rows, cols, labels).unwrap();
        write_mask(&mask, &path).unwrap();
        prop_assert_eq!(read_mask(&path).unwrap(), mask);
    }

    #[test]
    fn float_raster_round_trip(values in prop::collection::vec(-1e30f32..1e30, 1..200)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.f32");
        let wide: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        write_float_raster(&wide, 1, values.len(), &path).unwrap();
        let back = read_float_raster(&path).unwrap();
        prop_assert_eq!((back.rows, back.cols), (1, values.len()));
        prop_assert_eq!(back.values, values);
    }

    #[test]
    fn sample_table_round_trip(rows in prop::collection::vec((prop::array::uniform13(0.0f32..4096.0), 0u8..2), 0..50)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        // features originate from f32 cube values
        let (features, labels): (Vec<_>, Vec<_>) =
            rows.into_iter().map(|(f, l)| (f.map(f64::from), l)).unzip();
        let set = SampleSet::new(features, labels, BandId::ALL.to_vec()).unwrap();
        write_samples(&set, &path).unwrap();
        prop_assert_eq!(read_samples(&path).unwrap(), set);
    }
}
