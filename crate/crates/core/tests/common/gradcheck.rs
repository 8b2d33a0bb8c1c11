use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tstransfer::tensornet::{
    backward, build_model, forward, ArchConfig, Batch, BlockSpec, Head, Matrix, Model, Target,
};

const STEP: f64 = 1e-5;

fn with_target<R>(target: &Target<'_>, f: impl FnOnce(Target<'_>) -> R) -> R {
    match target {
        Target::Regression(m) => f(Target::Regression(m)),
        Target::Classes(c) => f(Target::Classes(c)),
    }
}

/// Loss and ReLU activation pattern at the given weights.
fn probe(model: &Model, batch: &Batch, target: &Target<'_>) -> (f64, Vec<bool>) {
    let out = forward(model, batch).unwrap();
    let pattern = out
        .cache
        .pre_activations()
        .iter()
        .flatten()
        .map(|&z| z > 0.0)
        .collect();
    let loss = with_target(target, |t| backward(model, &out.cache, t).unwrap().1);
    (loss, pattern)
}

pub struct GradCheck {
    pub max_relative_error: f64,
    pub checked: usize,
    /// Coordinates whose ±step perturbation flips a ReLU, where the loss is not
    /// differentiable inside the difference stencil.
    pub kinks: usize,
}

pub fn grad_check(model: &Model, batch: &Batch, target: Target<'_>) -> GradCheck {
    let out = forward(model, batch).unwrap();
    let (grads, _) = with_target(&target, |t| backward(model, &out.cache, t).unwrap());
    let mut report = GradCheck {
        max_relative_error: 0.0,
        checked: 0,
        kinks: 0,
    };
    let mut probe_model = model.clone();
    for (p, tensor) in model.params.iter().enumerate() {
        for i in 0..tensor.len() {
            let w = tensor.data[i];
            probe_model.params[p].data[i] = w + STEP;
            let (up, up_pattern) = probe(&probe_model, batch, &target);
            probe_model.params[p].data[i] = w - STEP;
            let (down, down_pattern) = probe(&probe_model, batch, &target);
            probe_model.params[p].data[i] = w;
            if up_pattern != down_pattern {
                report.kinks += 1;
                continue;
            }
            let numeric = (up - down) / (2.0 * STEP);
            let analytic = grads.0[p][i];
            let scale = analytic.abs().max(numeric.abs()).max(1e-6);
            report.max_relative_error = report.max_relative_error.max((analytic - numeric).abs() / scale);
            report.checked += 1;
        }
    }
    report
}

pub fn random_case(seed: u64) -> (Model, Batch, Head) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_blocks = rng.random_range(1..=3);
    let blocks = (0..n_blocks)
        .map(|_| BlockSpec {
            kernel_size: [3, 5, 7][rng.random_range(0..3)],
            channels: rng.random_range(1..=4),
        })
        .collect();
    let head = if seed % 2 == 0 {
        Head::Regression { outputs: 55 }
    } else {
        Head::Classification {
            classes: rng.random_range(2..=5),
        }
    };
    let arch = ArchConfig { blocks, head };
    let mut model = build_model(&arch, seed).unwrap();
    // non-zero biases so that every parameter path is exercised
    for t in model.params.iter_mut().filter(|t| t.name.ends_with("bias")) {
        t.data.iter_mut().for_each(|b| *b = rng.random_range(-0.1..0.1));
    }
    let size = [1, 4][rng.random_range(0..2)];
    let len = [16, 32][rng.random_range(0..2)];
    let batch = Batch {
        size,
        len,
        data: (0..size * len).map(|_| rng.random_range(-1.5..1.5)).collect(),
    };
    (model, batch, head)
}

pub fn check_case(seed: u64) -> GradCheck {
    let (model, batch, head) = random_case(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    match head {
        Head::Regression { outputs } => {
            let target = Matrix {
                rows: batch.size,
                cols: outputs,
                data: (0..batch.size * outputs).map(|_| rng.random_range(-1.0..1.0)).collect(),
            };
            grad_check(&model, &batch, Target::Regression(&target))
        }
        Head::Classification { classes } => {
            let labels: Vec<usize> = (0..batch.size).map(|_| rng.random_range(0..classes)).collect();
            grad_check(&model, &batch, Target::Classes(&labels))
        }
    }
}

