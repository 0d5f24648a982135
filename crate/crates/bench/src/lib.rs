//! Shared fixtures for the embedding benchmarks.

use ked_core::{embed, Embedding, Kernel, KernelSpec, Measure, MeasureSpec};

/// A compiled kernel, measure and embedding ready to evaluate.
pub struct Fixture {
    pub name: &'static str,
    pub kernel: Kernel,
    pub measure: Measure,
    pub embedding: Embedding,
}

impl Fixture {
    pub fn new(name: &'static str, kernel: KernelSpec, measure: MeasureSpec) -> Self {
        let measure = Measure::compile(&measure).expect("valid measure");
        let kernel = Kernel::compile(&kernel, Some(&measure)).expect("valid kernel");
        let embedding = embed(&kernel, &measure).expect("closed form exists");
        Fixture {
            name,
            kernel,
            measure,
            embedding,
        }
    }

    /// `n` evaluation points drawn from the measure.
    pub fn points(&self, n: usize) -> Vec<Vec<f64>> {
        self.measure.sample(n, 17).expect("sampleable")
    }
}

/// One pair per kernel family.
pub fn fixtures() -> Vec<Fixture> {
    use KernelSpec as K;
    use MeasureSpec as M;
    vec![
        Fixture::new(
            "gaussian/uniform-3d",
            K::gaussian(vec![0.5; 3]),
            M::uniform(&[(0.0, 1.0); 3]),
        ),
        Fixture::new(
            "gaussian/gaussian-3d",
            K::gaussian(vec![0.8; 3]),
            M::standard_normal(3),
        ),
        Fixture::new(
            "matern52/uniform",
            K::matern(2.5, 0.4),
            M::uniform(&[(0.0, 1.0)]),
        ),
        Fixture::new(
            "matern52/gaussian",
            K::matern(2.5, 0.4),
            M::standard_normal(1),
        ),
        Fixture::new(
            "wendland2/gaussian",
            K::wendland(2, 1.2),
            M::standard_normal(1),
        ),
        Fixture::new(
            "fbm/uniform",
            K::fbm(0.3, 0.0, 1.0),
            M::uniform(&[(0.0, 1.0)]),
        ),
        Fixture::new(
            "sphere-sobolev",
            K::SphereSobolev32,
            M::SphereUniform { dim: 2 },
        ),
        Fixture::new(
            "periodic-r2",
            K::PeriodicSobolev { r: 2 },
            M::uniform(&[(0.0, 1.0)]),
        ),
    ]
}
