mod common;

use std::path::{Path, PathBuf};

use dvic_core::datasets::{
    load_csv, load_dataset, load_envi, preprocess, read_labels, synth_moons, synth_triangle, write_csv, write_labels,
    DatasetSpec, MoonsParams, Source,
};
use dvic_core::PointCloud;
use proptest::prelude::*;

const LINES: usize = 2;
const SAMPLES: usize = 2;
const BANDS: usize = 3;

/// Distinct value per (line, sample, band).
fn cube_value(l: usize, s: usize, b: usize) -> f64 {
    100.0 * b as f64 + 10.0 * l as f64 + s as f64 + 0.5
}

/// Writes `name.hdr` and `name.img`, encoding the cube in the given
/// interleave with `encode` producing each value's bytes.
fn write_envi(dir: &Path, name: &str, interleave: &str, data_type: u8, big_endian: bool) -> PathBuf {
    let encode = |v: f64| -> Vec<u8> {
        match (data_type, big_endian) {
            (4, false) => (v as f32).to_le_bytes().to_vec(),
            (4, true) => (v as f32).to_be_bytes().to_vec(),
            (5, false) => v.to_le_bytes().to_vec(),
            (5, true) => v.to_be_bytes().to_vec(),
            (2, false) => (v as i16).to_le_bytes().to_vec(),
            (2, true) => (v as i16).to_be_bytes().to_vec(),
            _ => unreachable!(),
        }
    };
    let mut bytes = Vec::new();
    match interleave {
        "bsq" => {
            for b in 0..BANDS {
                for l in 0..LINES {
                    for s in 0..SAMPLES {
                        bytes.extend(encode(cube_value(l, s, b)));
                    }
                }
            }
        }
        "bil" => {
            for l in 0..LINES {
                for b in 0..BANDS {
                    for s in 0..SAMPLES {
                        bytes.extend(encode(cube_value(l, s, b)));
                    }
                }
            }
        }
        "bip" => {
            for l in 0..LINES {
                for s in 0..SAMPLES {
                    for b in 0..BANDS {
                        bytes.extend(encode(cube_value(l, s, b)));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    std::fs::write(dir.join(format!("{name}.img")), bytes).unwrap();
    let header = dir.join(format!("{name}.hdr"));
    std::fs::write(
        &header,
        format!(
            "ENVI\ndescription = {{test\n cube}}\nsamples = {SAMPLES}\nlines = {LINES}\nbands = {BANDS}\n\
             header offset = 0\nfile type = ENVI Standard\ndata type = {data_type}\ninterleave = {interleave}\n\
             byte order = {}\n",
            u8::from(big_endian)
        ),
    )
    .unwrap();
    header
}

#[test]
fn bsq_float32_matches_hand_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = load_envi(&write_envi(dir.path(), "c", "bsq", 4, false), None).unwrap();
    assert_eq!((cloud.len(), cloud.dim()), (4, 3));
    assert_eq!(cloud.shape(), Some((LINES, SAMPLES)));
    assert_eq!(cloud.row(0), &[0.5, 100.5, 200.5]);
    assert_eq!(cloud.row(1), &[1.5, 101.5, 201.5]);
    assert_eq!(cloud.row(2), &[10.5, 110.5, 210.5]);
    assert_eq!(cloud.row(3), &[11.5, 111.5, 211.5]);
}

#[test]
fn interleaves_and_encodings_agree() {
    let dir = tempfile::tempdir().unwrap();
    let reference = load_envi(&write_envi(dir.path(), "ref", "bsq", 4, false), None).unwrap();
    for (i, interleave) in ["bsq", "bil", "bip"].into_iter().enumerate() {
        for (j, (dt, be)) in [(4, false), (4, true), (5, false), (5, true)].into_iter().enumerate() {
            let h = write_envi(dir.path(), &format!("c{i}{j}"), interleave, dt, be);
            let c = load_envi(&h, None).unwrap();
            assert_eq!(c.data(), reference.data(), "{interleave} type {dt} big-endian {be}");
        }
    }
    // Integer cubes hold the truncated values.
    let ints = load_envi(&write_envi(dir.path(), "i", "bip", 2, true), None).unwrap();
    assert!(ints.data().iter().zip(reference.data()).all(|(a, b)| *a == b.trunc()));
}

#[test]
fn truncated_cube_names_both_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let h = write_envi(dir.path(), "t", "bsq", 4, false);
    let img = dir.path().join("t.img");
    let bytes = std::fs::read(&img).unwrap();
    std::fs::write(&img, &bytes[..bytes.len() - 5]).unwrap();
    let msg = load_envi(&h, None).unwrap_err().to_string();
    assert!(msg.contains("48") && msg.contains("43"), "{msg}");
}

#[test]
fn non_finite_value_reports_byte_offset() {
    let dir = tempfile::tempdir().unwrap();
    let h = write_envi(dir.path(), "n", "bsq", 4, false);
    let img = dir.path().join("n.img");
    let mut bytes = std::fs::read(&img).unwrap();
    bytes[8..12].copy_from_slice(&f32::NAN.to_le_bytes());
    std::fs::write(&img, bytes).unwrap();
    let msg = load_envi(&h, None).unwrap_err().to_string();
    assert!(msg.contains("byte offset 8"), "{msg}");
}

#[test]
fn label_raster_is_attached() {
    let dir = tempfile::tempdir().unwrap();
    let h = write_envi(dir.path(), "c", "bsq", 4, false);
    let labels: Vec<u8> = [0i16, 2, 1, 2].iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(dir.path().join("gt.img"), labels).unwrap();
    std::fs::write(
        dir.path().join("gt.hdr"),
        "ENVI\nsamples = 2\nlines = 2\nbands = 1\ndata type = 2\ninterleave = bsq\nbyte order = 0\n",
    )
    .unwrap();
    let c = load_envi(&h, Some(&dir.path().join("gt.hdr"))).unwrap();
    assert_eq!(c.labels(), Some(&[0, 2, 1, 2][..]));
}

#[test]
fn csv_with_labels_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.csv");
    std::fs::write(&p, "x,y,label\n1,2,1\n3,4,2\n5,6,1\n").unwrap();
    let c = load_csv(&p).unwrap();
    assert_eq!((c.len(), c.dim()), (3, 2));
    assert_eq!(c.labels(), Some(&[1, 2, 1][..]));
    assert_eq!(read_labels(&p).unwrap(), vec![1, 2, 1]);

    std::fs::write(&p, "").unwrap();
    assert!(load_csv(&p).is_err());
    std::fs::write(&p, "1,2\n3,oops\n").unwrap();
    let msg = load_csv(&p).unwrap_err().to_string();
    assert!(msg.contains("row 2") && msg.contains("column 2"), "{msg}");
}

#[test]
fn label_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("l.csv");
    write_labels(&p, &[3, 0, 1, 7]).unwrap();
    assert_eq!(read_labels(&p).unwrap(), vec![3, 0, 1, 7]);
}

fn spec_for(cloud: &PointCloud, dir: &Path) -> DatasetSpec {
    let path = dir.join("in.csv");
    write_csv(&path, cloud).unwrap();
    DatasetSpec::new(Source::Csv { path })
}

#[test]
fn standardization_centers_and_scales() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 * 3.0 + 1.0, 7.0, (i as f64).sin() * 100.0]).collect();
    let cloud = PointCloud::from_rows(&rows).unwrap();
    let (out, info) = preprocess(&cloud, &spec_for(&cloud, dir.path())).unwrap();
    assert_eq!(info.constant_bands, vec![1]);
    for b in 0..3 {
        let col: Vec<f64> = out.rows().map(|r| r[b]).collect();
        let mean = col.iter().sum::<f64>() / 50.0;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 50.0).sqrt();
        assert!(mean.abs() <= 1e-10);
        if b == 1 {
            assert!(col.iter().all(|&v| v == 0.0));
        } else {
            assert!((sd - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn jitter_separates_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = PointCloud::from_rows(&vec![vec![1.0, 2.0]; 20]).unwrap();
    let mut spec = spec_for(&cloud, dir.path());
    spec.standardize = false;
    spec.jitter_sigma = Some(1e-7);
    let (out, _) = preprocess(&cloud, &spec).unwrap();
    for i in 0..20 {
        for j in 0..i {
            assert_ne!(out.row(i), out.row(j));
        }
    }
    let (again, _) = preprocess(&cloud, &spec).unwrap();
    assert_eq!(out.data(), again.data());
}

#[test]
fn dataset_spec_loads_synthetic_sources() {
    let mut spec = DatasetSpec::new(Source::SyntheticTriangle);
    spec.standardize = false;
    let ds = load_dataset(&spec).unwrap();
    assert_eq!(ds.cloud.len(), 5000);
    assert!(ds.triangle_truth.is_some());
}

#[test]
fn moons_are_balanced_and_reproducible() {
    let p = MoonsParams::default();
    let a = synth_moons(&p, 0).unwrap();
    assert_eq!(a.len(), 1000);
    let ones = a.labels().unwrap().iter().filter(|&&l| l == 1).count();
    assert_eq!(ones, 500);
    assert_eq!(a.data(), synth_moons(&p, 0).unwrap().data());
    assert_ne!(a.data(), synth_moons(&p, 1).unwrap().data());
}

#[test]
fn triangle_truth_is_consistent() {
    let (cloud, truth) = synth_triangle(0).unwrap();
    assert_eq!(cloud.len(), 5000);
    let counts: Vec<usize> = (0..4).map(|b| truth.blob.iter().filter(|&&x| x == b).count()).collect();
    assert_eq!(counts, vec![1000, 1000, 1000, 2000]);
    let purity = truth.purity();
    let (mut vertex, mut center) = ((0.0, 0), (0.0, 0));
    for i in 0..5000 {
        let a = truth.abundance(i);
        assert!(a.iter().all(|&v| v >= 0.0));
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Reconstruct the point from its barycentric coordinates.
        for d in 0..2 {
            let x: f64 = (0..3).map(|j| a[j] * truth.endmembers[j * 2 + d]).sum();
            assert!((x - cloud.row(i)[d]).abs() < 1e-12);
        }
        let label = (0..3).fold(0, |b, j| if a[j] > a[b] { j } else { b }) as u32 + 1;
        assert_eq!(truth.labels[i], label);
        if cloud.row(i).iter().map(|v| v * v).sum::<f64>().sqrt() <= 0.05 {
            assert!(purity[i] <= 0.45);
        }
        if truth.blob[i] < 3 {
            vertex = (vertex.0 + purity[i], vertex.1 + 1);
        } else {
            center = (center.0 + purity[i], center.1 + 1);
        }
    }
    assert!(vertex.0 / vertex.1 as f64 > center.0 / center.1 as f64);
    assert_eq!(synth_triangle(0).unwrap().0.data(), cloud.data());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn csv_round_trip_is_bit_exact(
        rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 2..30),
        labeled in any::<bool>(),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let mut cloud = PointCloud::from_rows(&rows).unwrap();
        if labeled {
            cloud = cloud.with_labels((0..rows.len() as u32).collect()).unwrap();
        }
        let path = dir.path().join("r.csv");
        write_csv(&path, &cloud).unwrap();
        let back = load_csv(&path).unwrap();
        let bits = |c: &PointCloud| c.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&cloud));
        prop_assert_eq!(back.labels(), cloud.labels());
    }
}
