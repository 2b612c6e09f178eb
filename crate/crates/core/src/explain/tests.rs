use ndarray::{array, Array, Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cnn::{ConvLayerSpec, ConvNet, StageSpec};
use crate::gradcheck::relative_error;
use crate::hybrid::{HybridModel, ModelConfig};
use crate::quantum::PauliAxis;
use crate::vqc::{AnsatzSpec, Circuit, EncodingSpec, ObservableSet, PreGate, VqcParams};

fn trained_like(seed: u64) -> HybridModel {
    let mut m = HybridModel::new(&ModelConfig::default_for((1, 8, 8), 4, 2, 2).unwrap(), seed).unwrap();
    m.projection.mapv_inplace(|v| 4.0 * v);
    m
}

fn activation(rng: &mut impl Rng, shape: (usize, usize, usize)) -> Array3<f64> {
    Array::from_shape_simple_fn(shape, || rng.random_range(0.0..1.0))
}

/// 1-qubit head: `z = mean(A¹)` (identity 1×1 conv), no ansatz, readout `c`.
/// `f = c·cos(arctan z)`, so `∂f/∂A¹_ij = c·g'(z)/(W·H)` with
/// `g'(z) = −z/(1+z²)^{3/2}`.
fn mean_head(c: f64, side: usize) -> HybridModel {
    let spec = StageSpec { conv: ConvLayerSpec::new(1, 1, 1), pool: None };
    let mut cnn = ConvNet::seeded(&[spec], 0).unwrap();
    cnn.stages[0].kernels.fill(1.0);
    let circuit = Circuit::new(
        EncodingSpec::uniform(1, PauliAxis::Y, PreGate::Identity, true),
        AnsatzSpec::ring(1, 0, PauliAxis::Y),
        ObservableSet::z_on_first(1, 1).unwrap(),
    )
    .unwrap();
    let area = (side * side) as f64;
    HybridModel::from_parts(
        (1, side, side),
        cnn,
        Array2::from_elem((1, side * side), 1.0 / area),
        Array1::zeros(1),
        circuit,
        VqcParams(vec![]),
        Array2::from_elem((1, 1), c),
        Array1::zeros(1),
    )
    .unwrap()
}

#[test]
fn zero_readout_row_gives_zero_gradient() {
    let mut m = trained_like(1);
    m.readout.row_mut(1).fill(0.0);
    let a = activation(&mut ChaCha8Rng::seed_from_u64(2), m.activation_shape());
    let g = activation_gradient(&m, &a, 1, GradPath::Shift).unwrap();
    assert!(g.grad.iter().all(|v| *v == 0.0));
    assert!(activation_gradient(&m, &a, 0, GradPath::Shift).unwrap().grad.iter().any(|v| *v != 0.0));
}

#[test]
fn invalid_class_rejected() {
    let m = trained_like(1);
    let a = Array3::zeros(m.activation_shape());
    assert!(matches!(activation_gradient(&m, &a, 2, GradPath::Shift), Err(crate::Error::InvalidLabel { label: 2, classes: 2 })));
}

#[test]
fn mean_head_closed_form() {
    let (c, side) = (1.7, 4);
    let m = mean_head(c, side);
    let a = activation(&mut ChaCha8Rng::seed_from_u64(3), (1, side, side));
    let z = a.mean().unwrap();
    let expected = c * (-z / (1.0 + z * z).powf(1.5)) / (side * side) as f64;
    for path in [GradPath::Shift, GradPath::Analytic] {
        let g = activation_gradient(&m, &a, 0, path).unwrap();
        assert!(g.grad.iter().all(|v| (v - expected).abs() < 1e-14), "{path:?}");
        let w = channel_weights(&g);
        assert!((w.w[0] - expected).abs() < 1e-14);
        // heatmap closed form: ReLU(w·A)
        let h = heatmap(&a, &w).unwrap();
        let closed = a.slice(ndarray::s![0, .., ..]).mapv(|v| (expected * v).max(0.0));
        assert!(h.raw.iter().zip(&closed).all(|(x, y)| (x - y).abs() < 1e-14));
    }
}

#[test]
fn head_gradient_matches_finite_differences() {
    let m = trained_like(4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = activation(&mut rng, m.activation_shape());
    for class in 0..2 {
        let g = activation_gradient(&m, &a, class, GradPath::Shift).unwrap();
        for _ in 0..20 {
            let idx = rng.random_range(0..a.len());
            let bump = |d: f64| {
                let mut p = a.clone();
                p.as_slice_mut().unwrap()[idx] += d;
                m.head(&p).unwrap()[class]
            };
            let fd = (bump(1e-4) - bump(-1e-4)) / 2e-4;
            let err = relative_error(g.grad.as_slice().unwrap()[idx], fd);
            assert!(err < 1e-4, "class {class} entry {idx}: {err}");
        }
    }
}

#[test]
fn channel_weights_are_spatial_means() {
    let g = ActivationGradient { class: 0, grad: Array3::from_shape_fn((3, 2, 2), |(k, _, _)| k as f64 - 1.0) };
    assert_eq!(channel_weights(&g).w, array![-1.0, 0.0, 1.0]);
    let zero = ActivationGradient { class: 0, grad: Array3::zeros((2, 3, 3)) };
    assert!(channel_weights(&zero).w.iter().all(|v| *v == 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = ActivationGradient { class: 1, grad: Array::from_shape_simple_fn((32, 7, 7), || rng.random_range(-1.0..1.0)) };
    let w = channel_weights(&g);
    for k in 0..32 {
        let mut total = 0.0;
        for i in 0..7 {
            for j in 0..7 {
                total += g.grad[[k, i, j]];
            }
        }
        assert!((w.w[k] - total / 49.0).abs() < 1e-15);
    }
}

#[test]
fn heatmap_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = activation(&mut rng, (1, 4, 4));
    let one = ChannelWeights { class: 0, w: array![1.0] };
    assert_eq!(heatmap(&a, &one).unwrap().raw, a.slice(ndarray::s![0, .., ..]));
    let neg = ChannelWeights { class: 0, w: array![-1.0] };
    let h = heatmap(&(a.clone() + 0.1), &neg).unwrap();
    assert!(h.raw.iter().chain(h.normalized.iter()).all(|v| *v == 0.0));
    assert!(heatmap(&a, &ChannelWeights { class: 0, w: array![1.0, 2.0] }).is_err());

    let a = Array::from_shape_simple_fn((32, 5, 5), || rng.random_range(0.0..1.0));
    let w = ChannelWeights { class: 0, w: Array1::from_shape_simple_fn(32, || rng.random_range(-1.0..1.0)) };
    let h = heatmap(&a, &w).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let mut s = 0.0;
            for k in 0..32 {
                s += a[[k, i, j]] * w.w[k];
            }
            assert!((h.raw[(i, j)] - s.max(0.0)).abs() < 1e-12);
        }
    }
    let max = h.normalized.iter().copied().fold(0.0, f64::max);
    assert_eq!(max, 1.0);
    assert!(h.normalized.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn bilinear_upsampling() {
    let c = upsample_bilinear(&Array2::from_elem((3, 4), 0.37), 9, 13).unwrap();
    assert!(c.iter().all(|v| *v == 0.37));
    let one = upsample_bilinear(&array![[0.6]], 5, 7).unwrap();
    assert!(one.iter().all(|v| *v == 0.6));
    let x = upsample_bilinear(&array![[0.0, 1.0], [1.0, 0.0]], 3, 3).unwrap();
    assert_eq!(x[(1, 1)], 0.5);
    assert_eq!(x[(0, 0)], 0.0);
    assert_eq!(x[(0, 2)], 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let src = Array2::from_shape_simple_fn((4, 4), || rng.random_range(0.0..1.0));
    let up = upsample_bilinear(&src, 28, 28).unwrap();
    let (lo, hi) = src.iter().fold((1.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(up.iter().all(|v| *v >= lo - 1e-15 && *v <= hi + 1e-15));
    assert!(upsample_bilinear(&src, 3, 28).is_err());
    assert!(upsample_bilinear(&src, 0, 0).is_err());
}

#[test]
fn shift_and_analytic_paths_agree() {
    let m = trained_like(9);
    let x = activation(&mut ChaCha8Rng::seed_from_u64(10), (1, 8, 8));
    let a = explain(&m, &x, Some(0), GradPath::Shift).unwrap();
    let b = explain(&m, &x, Some(0), GradPath::Analytic).unwrap();
    assert!(a.heatmap.raw.iter().zip(&b.heatmap.raw).all(|(p, q)| (p - q).abs() < 1e-9));
    assert!(a.upsampled.iter().zip(&b.upsampled).all(|(p, q)| (p - q).abs() < 1e-9));
}

#[test]
fn readout_scaling_leaves_normalized_map_unchanged() {
    let m = trained_like(11);
    let x = activation(&mut ChaCha8Rng::seed_from_u64(12), (1, 8, 8));
    let base = explain(&m, &x, Some(1), GradPath::Shift).unwrap();
    let mut scaled = m.clone();
    scaled.readout.mapv_inplace(|v| 3.0 * v);
    let s = explain(&scaled, &x, Some(1), GradPath::Shift).unwrap();
    assert!(base.heatmap.raw.iter().zip(&s.heatmap.raw).all(|(p, q)| (3.0 * p - q).abs() < 1e-12));
    assert!(base.heatmap.normalized.iter().zip(&s.heatmap.normalized).all(|(p, q)| (p - q).abs() < 1e-12));
}

#[test]
fn colormap_stops() {
    assert_eq!(colormap(0.0), [0, 0, 0]);
    assert_eq!(colormap(0.25), [128, 0, 0]);
    assert_eq!(colormap(0.5), [255, 0, 0]);
    assert_eq!(colormap(0.75), [255, 255, 0]);
    assert_eq!(colormap(1.0), [255, 255, 255]);
    assert_eq!(colormap(0.125), [64, 0, 0]);
    assert_eq!(colormap(2.0), [255, 255, 255]);
}

#[test]
fn exported_files() {
    let dir = tempfile::tempdir().unwrap();
    let base = Array2::from_shape_fn((4, 5), |(i, j)| (i * 5 + j) as f64 / 19.0);
    let zero = Array2::zeros((4, 5));
    let (pgm, png) = export_overlay(&base, &zero, dir.path(), "digit", 1).unwrap();
    assert_eq!(pgm.file_name().unwrap(), "digit.class1.heatmap.pgm");
    assert_eq!(png.file_name().unwrap(), "digit.class1.overlay.png");
    let overlay = image::open(&png).unwrap().into_rgb8();
    let tint = colormap(0.0);
    for (x, y, p) in overlay.enumerate_pixels() {
        let g = to_gray_u8(base[(y as usize, x as usize)]) as u16;
        assert_eq!(p.0, std::array::from_fn(|k| ((g + tint[k] as u16 + 1) / 2) as u8));
    }

    let mut hot = Array2::zeros((4, 5));
    hot[(2, 3)] = 1.0;
    let (pgm, _) = export_overlay(&base, &hot, dir.path(), "hot", 2).unwrap();
    let bytes = std::fs::read(&pgm).unwrap();
    assert!(bytes.starts_with(b"P5"));
    let pixels = &bytes[bytes.len() - 20..];
    assert_eq!(pixels.iter().filter(|&&p| p == 255).count(), 1);
    assert_eq!(pixels[2 * 5 + 3], 255);
    assert_eq!(read_grayscale(&pgm).unwrap(), hot);

    let again = tempfile::tempdir().unwrap();
    let (pgm2, png2) = export_overlay(&base, &hot, again.path(), "hot", 2).unwrap();
    assert_eq!(std::fs::read(pgm2).unwrap(), bytes);
    assert_eq!(std::fs::read(png2).unwrap(), std::fs::read(dir.path().join("hot.class2.overlay.png")).unwrap());
}
