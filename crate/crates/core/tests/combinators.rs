use ked_core::combinators::{change_of_measure, matrix_valued_embed};
use ked_core::kernels::ProductFactor;
use ked_core::oracle::{estimate_kpp, integrate};
use ked_core::{
    embed, embed_matrix, Budget, Error, Kernel, KernelSpec as K, Measure, MeasureSpec as M,
    Provenance, Transform,
};
use nalgebra::DMatrix;

fn compile(k: &K, m: &M) -> (Kernel, Measure) {
    let m = Measure::compile(m).unwrap();
    (Kernel::compile(k, Some(&m)).unwrap(), m)
}

fn product(factors: Vec<(K, Vec<usize>)>) -> K {
    K::Product {
        factors: factors
            .into_iter()
            .map(|(kernel, dims)| ProductFactor { kernel, dims })
            .collect(),
    }
}

#[test]
fn product_tensorizes() {
    let bounds = [(0.0, 1.0), (-1.0, 2.0)];
    let prod = product(vec![
        (K::gaussian(vec![0.4]), vec![0]),
        (K::gaussian(vec![1.7]), vec![1]),
    ]);
    let (k, m) = compile(&prod, &M::uniform(&bounds));
    let e = embed(&k, &m).unwrap();
    let (k2, m2) = compile(&K::gaussian(vec![0.4, 1.7]), &M::uniform(&bounds));
    let joint = embed(&k2, &m2).unwrap();
    assert!((e.kpp - joint.kpp).abs() <= 1e-13);
    for x in m.sample(20, 1).unwrap() {
        assert!((e.kp(&x).unwrap() - joint.kp(&x).unwrap()).abs() <= 1e-13);
    }
}

#[test]
fn product_of_different_families() {
    let prod = product(vec![
        (K::matern(1.5, 0.5), vec![1]),
        (K::wendland(0, 0.7), vec![0]),
    ]);
    let (k, m) = compile(&prod, &M::uniform(&[(0.0, 1.0), (0.0, 2.0)]));
    let e = embed(&k, &m).unwrap();
    assert_eq!(e.provenance(), Provenance::ClosedForm);
    let w = embed(
        &Kernel::compile(&K::wendland(0, 0.7), None).unwrap(),
        &Measure::compile(&M::uniform(&[(0.0, 1.0)])).unwrap(),
    )
    .unwrap();
    let mt = embed(
        &Kernel::compile(&K::matern(1.5, 0.5), None).unwrap(),
        &Measure::compile(&M::uniform(&[(0.0, 2.0)])).unwrap(),
    )
    .unwrap();
    assert!((e.kpp - w.kpp * mt.kpp).abs() <= 1e-13);
    let x = [0.3, 1.4];
    assert!((e.kp(&x).unwrap() - w.kp(&[0.3]).unwrap() * mt.kp(&[1.4]).unwrap()).abs() <= 1e-13);
    let o = estimate_kpp(&k, &m, Budget::default(), 0).unwrap();
    assert!((o.value - e.kpp).abs() < 1e-8, "{o:?} vs {}", e.kpp);
}

#[test]
fn sum_is_linear_in_kernel_weights() {
    let children = vec![K::gaussian(vec![0.5]), K::matern(0.5, 1.0)];
    let m = M::uniform(&[(0.0, 1.0)]);
    let (k1, p) = compile(
        &K::Sum {
            children: children.clone(),
            weights: vec![0.3, 1.2],
        },
        &m,
    );
    let (k2, _) = compile(
        &K::Sum {
            children,
            weights: vec![0.6, 2.4],
        },
        &m,
    );
    let (e1, e2) = (embed(&k1, &p).unwrap(), embed(&k2, &p).unwrap());
    assert_eq!(e2.kpp, 2.0 * e1.kpp);
    for x in [-0.5, 0.2, 0.9] {
        assert_eq!(e2.kp(&[x]).unwrap(), 2.0 * e1.kp(&[x]).unwrap());
    }
}

fn two_gaussians() -> M {
    M::Mixture {
        components: vec![
            M::gaussian_diag(vec![-1.0], vec![0.25]),
            M::gaussian_diag(vec![1.5], vec![0.64]),
        ],
        weights: vec![0.3, 0.7],
    }
}

#[test]
fn gaussian_mixture_kpp_against_monte_carlo() {
    let (k, m) = compile(&K::gaussian(vec![0.7]), &two_gaussians());
    let e = embed(&k, &m).unwrap();
    assert_eq!(e.provenance(), Provenance::ClosedForm);
    // Independent pairs: every term of the average is an unbiased draw.
    let n = 10_000_000;
    let xs = m.sample(n, 31).unwrap();
    let ys = m.sample(n, 32).unwrap();
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
        let v = k.eval(x, y).unwrap();
        let d = v - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (v - mean);
    }
    let stderr = (m2 / (n - 1) as f64 / n as f64).sqrt();
    assert!(
        (e.kpp - mean).abs() <= 3.0 * stderr,
        "{} vs {mean} ± {stderr}",
        e.kpp
    );
}

#[test]
fn mixture_kp_against_quadrature() {
    let (k, m) = compile(
        &K::matern(1.5, 0.6),
        &M::Mixture {
            components: vec![M::uniform(&[(0.0, 1.0)]), M::uniform(&[(0.5, 3.0)])],
            weights: vec![0.4, 0.6],
        },
    );
    let e = embed(&k, &m).unwrap();
    for x in [-1.0, 0.2, 0.7, 2.0, 4.0] {
        let o = ked_core::oracle::estimate_kp(&k, &m, &[x], Budget::default(), 0).unwrap();
        assert!((e.kp(&[x]).unwrap() - o.value).abs() < 1e-8);
    }
    let o = estimate_kpp(&k, &m, Budget::default(), 0).unwrap();
    assert!((e.kpp - o.value).abs() < 1e-8, "{} vs {o:?}", e.kpp);
}

#[test]
fn degenerate_mixture_is_the_component() {
    let comp = M::gaussian_diag(vec![0.2], vec![0.5]);
    let (k, single) = compile(&K::gaussian(vec![1.0]), &comp);
    let (_, mix) = compile(
        &K::gaussian(vec![1.0]),
        &M::Mixture {
            components: vec![comp.clone(), comp],
            weights: vec![0.5, 0.5],
        },
    );
    let (a, b) = (embed(&k, &single).unwrap(), embed(&k, &mix).unwrap());
    assert!((a.kpp - b.kpp).abs() < 1e-15);
    assert!((a.kp(&[0.4]).unwrap() - b.kp(&[0.4]).unwrap()).abs() < 1e-15);
}

#[test]
fn pushforward_keeps_kpp_exactly() {
    let base_k = K::gaussian(vec![0.5]);
    let base_m = M::uniform(&[(0.0, 1.0)]);
    let (k, m) = compile(&base_k, &base_m);
    let base = embed(&k, &m).unwrap();
    for map in [
        Transform::Affine {
            scale: vec![3.0],
            shift: vec![-1.0],
        },
        Transform::NormalInverseCdf {
            mean: 0.0,
            std: 2.0,
        },
        Transform::Exp,
    ] {
        let (pk, pm) = compile(
            &K::Composed {
                base: Box::new(base_k.clone()),
                map: map.clone(),
            },
            &M::Pushforward {
                base: Box::new(base_m.clone()),
                map: map.clone(),
            },
        );
        let e = embed(&pk, &pm).unwrap();
        assert_eq!(e.kpp.to_bits(), base.kpp.to_bits());
        assert_eq!(e.provenance(), Provenance::ClosedForm);
        let y = map.forward(&[0.3]);
        assert_eq!(e.kp(&y).unwrap(), base.kp(&map.inverse(&y)).unwrap());
        let o = estimate_kpp(&pk, &pm, Budget::new(200, 200_000), 1).unwrap();
        assert!((o.value - e.kpp).abs() <= 3.0 * o.stderr.max(1e-9), "{o:?}");
    }
}

#[test]
fn change_of_measure_preserves_integrals() {
    let p = Measure::compile(&M::gaussian_diag(vec![0.5], vec![0.3])).unwrap();
    let q = Measure::compile(&M::standard_normal(1)).unwrap();
    let f = |x: &[f64]| Ok((2.0 * x[0]).sin() + x[0] * x[0]);
    let g = change_of_measure(f, &p, &q);
    let under_p = integrate(&p, &|x| f(x), &[], false, Budget::default(), 0)
        .unwrap()
        .value;
    let under_q = integrate(&q, &|x| g(x), &[], false, Budget::default(), 0)
        .unwrap()
        .value;
    assert!((under_p - under_q).abs() < 1e-10, "{under_p} vs {under_q}");

    let narrow = Measure::compile(&M::uniform(&[(0.0, 1.0)])).unwrap();
    let h = change_of_measure(f, &q, &narrow);
    assert!(matches!(h(&[2.0]), Err(Error::OutsideDomain(_))));
    let h = change_of_measure(f, &narrow, &q);
    assert_eq!(h(&[2.0]).unwrap(), 0.0);
}

#[test]
fn matrix_valued_scales_the_scalar_embedding() {
    let b = vec![vec![2.0, 0.5], vec![0.5, 1.0]];
    let (k, m) = compile(
        &K::MatrixValued {
            base: Box::new(K::gaussian(vec![0.8])),
            matrix: b.clone(),
        },
        &M::standard_normal(1),
    );
    assert!(matches!(embed(&k, &m), Err(Error::Unsupported(_))));
    let e = embed_matrix(&k, &m).unwrap();
    let (sk, _) = compile(&K::gaussian(vec![0.8]), &M::standard_normal(1));
    let scalar = embed(&sk, &m).unwrap();
    let bm = DMatrix::from_fn(2, 2, |i, j| b[i][j]);
    assert_eq!(e.kpp(), &bm * scalar.kpp);
    assert_eq!(e.kp(&[0.4]).unwrap(), &bm * scalar.kp(&[0.4]).unwrap());

    let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(matches!(
        matrix_valued_embed(scalar, indefinite),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn mixture_components_sampled_in_proportion() {
    let m = Measure::compile(&two_gaussians()).unwrap();
    let xs = m.sample(100_000, 3).unwrap();
    let mean: f64 = xs.iter().map(|x| x[0]).sum::<f64>() / xs.len() as f64;
    // 0.3·(-1) + 0.7·1.5 = 0.75, sd of the mixture ≈ 1.2.
    assert!((mean - 0.75).abs() < 0.02, "{mean}");
}
