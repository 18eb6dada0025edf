//! Property tests over the public API.

use ndarray::{concatenate, Array2, Axis};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use skelhar::classifiers::{
    predict, train, BaggedTrees, ClassifierSpec, DecisionTree, Lda, ModelParams, ModelSpec,
};
use skelhar::config::PipelineConfig;
use skelhar::dataset::{generate_synthetic, read_dataset, write_dataset, SynthSpec};
use skelhar::eval::{
    compute_report, cross_validate_with_assignment, fold_assignment, split, SplitPlan, Stratify,
};
use skelhar::features::{normalize_posture, Dims, JointSubset};
use skelhar::pca::pca_fit;
use skelhar::skeleton::{JointId, JOINT_COUNT};

fn labeled_set() -> impl Strategy<Value = (Array2<f64>, Vec<u8>)> {
    (8usize..40, 1usize..4).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(-100.0f64..100.0, n * d),
            prop::collection::vec(1u8..=4, n),
        )
            .prop_map(move |(v, y)| (Array2::from_shape_vec((n, d), v).unwrap(), y))
    })
}

fn permutation() -> impl Strategy<Value = Vec<u8>> {
    Just((1u8..=9).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn predictions_follow_a_relabeling((x, y) in labeled_set(), perm in permutation()) {
        prop_assume!(y.iter().any(|&l| l != y[0]));
        let relabel = |l: u8| perm[usize::from(l) - 1];
        let y2: Vec<u8> = y.iter().map(|&l| relabel(l)).collect();
        let queries = x.mapv(|v| v * 0.97 + 0.5);
        let both = concatenate![Axis(0), x, queries];
        for model in [ModelSpec::FineTree { max_splits: 1000 }, ModelSpec::fine_knn(), ModelSpec::LinearDiscriminant] {
            let a = train(&ClassifierSpec::new(model.clone(), 3), x.view(), &y).unwrap();
            let b = train(&ClassifierSpec::new(model, 3), x.view(), &y2).unwrap();
            let pa: Vec<u8> = predict(&a, both.view()).unwrap().into_iter().map(relabel).collect();
            prop_assert_eq!(pa, predict(&b, both.view()).unwrap());
        }
    }

    #[test]
    fn skeleton_features_ignore_translation_and_scale(
        coords in prop::collection::vec(-2.0f64..2.0, JOINT_COUNT * 3),
        s in 0.1f64..10.0,
        t in prop::array::uniform3(-50.0f64..50.0),
        subset in prop::sample::select(vec![JointSubset::C9, JointSubset::C18, JointSubset::C28]),
        dims in prop::sample::select(vec![Dims::Two, Dims::Three]),
    ) {
        let mut j = [[0.0; 3]; JOINT_COUNT];
        for (i, p) in j.iter_mut().enumerate() {
            *p = [coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]];
        }
        let head = j[JointId::Head.index()];
        j[JointId::Neck.index()] = [head[0], head[1] - 0.2, head[2]];
        let moved = j.map(|p| [s * p[0] + t[0], s * p[1] + t[1], s * p[2] + t[2]]);
        let a = normalize_posture(&j, &subset, dims).unwrap();
        let b = normalize_posture(&moved, &subset, dims).unwrap();
        prop_assert_eq!(a.len(), subset.feature_dim(dims));
        for (p, q) in a.0.iter().zip(&b.0) {
            prop_assert!((p - q).abs() <= 1e-9);
        }
    }

    #[test]
    fn class_split_sizes(counts in prop::collection::vec(5usize..60, 1..9), seed in any::<u64>()) {
        let labels: Vec<u8> = counts.iter().enumerate().flat_map(|(c, &n)| vec![c as u8 + 1; n]).collect();
        let groups = vec![1; labels.len()];
        let plan = SplitPlan { seed, ..SplitPlan::default() };
        let s = split(&labels, &groups, &plan).unwrap();
        for (c, &n) in counts.iter().enumerate() {
            let count = |idx: &[usize]| idx.iter().filter(|&&i| labels[i] == c as u8 + 1).count();
            prop_assert_eq!(count(&s.test), n / 5);
            prop_assert_eq!(count(&s.validation), n / 5);
            prop_assert_eq!(count(&s.train), n - 2 * (n / 5));
        }
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).chain(&s.validation).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
    }

    #[test]
    fn confusion_rows_count_each_class(
        pairs in prop::collection::vec((1u8..=9, 1u8..=9), 1..300),
    ) {
        let (t, p): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let r = compute_report(&t, &p).unwrap();
        for c in 0..9 {
            let n = t.iter().filter(|&&l| usize::from(l) == c + 1).count() as u64;
            prop_assert_eq!(r.confusion[c].iter().sum::<u64>(), n);
            prop_assert_eq!(r.per_class[c].support, n);
        }
        let hits = t.iter().zip(&p).filter(|(a, b)| a == b).count();
        prop_assert!((r.overall_accuracy - hits as f64 / t.len() as f64).abs() < 1e-15);
    }

    #[test]
    fn pca_spectrum_is_sorted_and_k_monotone(
        v in prop::collection::vec(-5.0f64..5.0, 60),
        lo in 0.05f64..0.5,
        hi in 0.5f64..1.0,
    ) {
        let rows = Array2::from_shape_vec((15, 4), v).unwrap();
        prop_assume!(rows.var_axis(Axis(0), 1.0).sum() > 1e-9);
        let a = pca_fit(rows.view(), lo).unwrap();
        let b = pca_fit(rows.view(), hi).unwrap();
        prop_assert!(a.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(a.eigenvalues.iter().all(|&l| l >= 0.0));
        prop_assert!(1 <= a.retained_k && a.retained_k <= b.retained_k && b.retained_k <= 4);
    }

    #[test]
    fn config_text_round_trips(
        modality in prop::sample::select(vec!["coordinates", "velocity", "acceleration"]),
        joints in prop::sample::select(vec!["c9", "c18", "c28", "list:Neck,RHand,LFoot", "list:Chest"]),
        dims in prop::sample::select(vec!["2", "3"]),
        explicit_frames in any::<bool>(),
        pca in any::<bool>(),
        pca_var in 0.01f64..=1.0,
        family in 0usize..6,
        hyper in (1usize..500, 1usize..100, 1e-6f64..10.0),
        split in (0.0f64..0.5, 0.0f64..0.5),
        stratify in prop::sample::select(vec!["class", "participant"]),
        folds in 2usize..20,
        seeds in (any::<u64>(), any::<u64>(), any::<u64>()),
    ) {
        let mut cfg = PipelineConfig::default();
        let names = ["tree", "bagged", "knn", "svm-cubic", "lda", "mlp"];
        cfg.set("classifier", names[family]).unwrap();
        cfg.set("modality", modality).unwrap();
        cfg.set("joints", joints).unwrap();
        cfg.set("dims", dims).unwrap();
        if explicit_frames {
            let frames: Vec<String> = (0..51).map(|i| (3 * i + 1).to_string()).collect();
            cfg.set("frames", &frames.join(",")).unwrap();
        }
        cfg.set("pca", if pca { "on" } else { "off" }).unwrap();
        cfg.pca.variance_threshold = pca_var;
        let (count, small, real) = hyper;
        cfg.classifier.model = match cfg.classifier.model {
            ModelSpec::FineTree { .. } => ModelSpec::FineTree { max_splits: count },
            ModelSpec::BaggedTrees { .. } => ModelSpec::BaggedTrees { n_trees: small, max_splits: count },
            ModelSpec::FineKnn { .. } => ModelSpec::FineKnn { k: small },
            ModelSpec::CubicSvm { .. } => ModelSpec::CubicSvm { c: real, tolerance: real / 7.0 },
            ModelSpec::LinearDiscriminant => ModelSpec::LinearDiscriminant,
            ModelSpec::Mlp { .. } => ModelSpec::Mlp { hidden_width: count, epochs: small, learning_rate: real, batch_size: small },
        };
        cfg.split.test_frac = split.0;
        cfg.split.validation_frac = split.1;
        cfg.split.train_frac = 1.0 - split.0 - split.1;
        cfg.set("stratify", stratify).unwrap();
        cfg.folds = folds;
        cfg.seed = seeds.0;
        cfg.classifier.seed = seeds.1;
        cfg.split.seed = seeds.2;
        let text = cfg.to_text();
        prop_assert_eq!(PipelineConfig::parse_text(&text).unwrap(), cfg);
    }
}

#[test]
fn bagging_is_seeded_and_single_identity_bag_is_a_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = Array2::from_shape_fn((120, 4), |_| rng.random_range(-1.0..1.0));
    let y: Vec<u8> = (0..120)
        .map(|i| (x[[i, 0]] + x[[i, 1]] > 0.0) as u8 * 4 + (x[[i, 2]] > 0.3) as u8 + 1)
        .collect();
    let mut classes = y.clone();
    classes.sort_unstable();
    classes.dedup();

    let a = BaggedTrees::fit(x.view(), &y, &classes, 10, 100, 5);
    assert_eq!(a, BaggedTrees::fit(x.view(), &y, &classes, 10, 100, 5));
    assert_ne!(a, BaggedTrees::fit(x.view(), &y, &classes, 10, 100, 6));

    let identity: Vec<usize> = (0..120).collect();
    let bag =
        BaggedTrees::fit_with_samples(x.view(), &y, &classes, std::slice::from_ref(&identity), 100);
    let tree = DecisionTree::fit(x.view(), &y, &identity, &classes, 100);
    assert_eq!(bag.trees, vec![tree.clone()]);
    for r in x.outer_iter() {
        let r = r.to_slice().unwrap();
        assert_eq!(bag.predict_row(r), tree.predict_row(r));
    }
}

#[test]
fn nine_classes_train_thirty_six_machines() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let y: Vec<u8> = (0..90).map(|i| (i % 9 + 1) as u8).collect();
    let x = Array2::from_shape_fn((90, 2), |(i, j)| {
        y[i] as f64 * if j == 0 { 1.0 } else { -0.5 } + rng.random_range(-0.1..0.1)
    });
    let m = train(
        &ClassifierSpec::new(ModelSpec::cubic_svm(), 0),
        x.view(),
        &y,
    )
    .unwrap();
    let ModelParams::CubicSvm(svm) = &m.params else {
        panic!("wrong family")
    };
    assert_eq!(svm.machines.len(), 36);
    assert_eq!(predict(&m, x.view()).unwrap(), y);
}

#[test]
fn lda_boundary_matches_the_bayes_normal() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    // shared covariance A Aᵀ
    let a = nalgebra::Matrix3::new(1.0, 0.3, 0.0, 0.2, 0.8, 0.1, -0.4, 0.0, 0.6);
    let (mu_a, mu_b) = (
        nalgebra::Vector3::new(1.0, 0.0, 0.5),
        nalgebra::Vector3::new(-0.5, 1.0, 0.0),
    );
    let n = 2000;
    let mut x = Array2::zeros((n, 3));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let z = nalgebra::Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng));
        let (mu, label) = if i % 2 == 0 { (mu_a, 3) } else { (mu_b, 6) };
        let p = mu + a * z;
        for j in 0..3 {
            x[[i, j]] = p[j];
        }
        y.push(label);
    }
    let lda = Lda::fit(x.view(), &y, &[3, 6]).unwrap();
    let got = nalgebra::Vector3::from_vec(lda.boundary_normal(3, 6).unwrap());
    let want = (a * a.transpose()).try_inverse().unwrap() * (mu_a - mu_b);
    let angle = (got.dot(&want) / (got.norm() * want.norm()))
        .clamp(-1.0, 1.0)
        .acos()
        .to_degrees();
    assert!(angle < 5.0, "angle {angle}");
}

#[test]
fn synthetic_manifest_survives_csv() {
    let m = generate_synthetic(&SynthSpec::default()).unwrap();
    assert_eq!(m.len(), 16 * 9);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    write_dataset(&m, &path).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back.sequences(), m.sequences());
    assert_eq!(back.fingerprint(), m.fingerprint());
}

#[test]
fn duplicated_rows_in_other_folds_give_perfect_nearest_neighbor_cv() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = Array2::from_shape_fn((60, 3), |_| rng.random_range(-1.0..1.0));
    let y: Vec<u8> = (0..60).map(|_| rng.random_range(1..=9)).collect();
    let xx = concatenate![Axis(0), x, x];
    let yy: Vec<u8> = y.iter().chain(&y).copied().collect();
    let assignment: Vec<usize> = (0..120)
        .map(|i| if i < 60 { i % 5 } else { (i + 1) % 5 })
        .collect();
    let spec = ClassifierSpec::new(ModelSpec::fine_knn(), 0);
    let r = cross_validate_with_assignment(&spec, xx.view(), &yy, &assignment, 5, None).unwrap();
    assert_eq!(r.overall_accuracy, 1.0);
}

#[test]
fn five_folds_over_full_coordinate_matrix() {
    let labels: Vec<u8> = (0..7344).map(|i| (i / 816 + 1) as u8).collect();
    let groups = vec![1; 7344];
    let rows: Vec<usize> = (0..7344).collect();
    let a = fold_assignment(&rows, &labels, &groups, 5, Stratify::Class, 3).unwrap();
    let mut sizes = [0usize; 5];
    for f in a {
        sizes[f] += 1;
    }
    assert!(sizes.iter().all(|&s| s == 1468 || s == 1469), "{sizes:?}");
}
