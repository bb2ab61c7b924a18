//! Shared helpers for the integration tests: an independent dense-matrix
//! quantum oracle, closed-form amplitude formulas, synthetic data fixtures,
//! and small statistics utilities. Everything here is deliberately written
//! from scratch so it cannot share a bug with the library code under test.
#![allow(dead_code)]
// index loops mirror the matrix formulas they implement
#![allow(clippy::needless_range_loop)]

use qgan::simulator::Gate;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ----- dense linear algebra (row-major Vec<Vec<f64>>) -----

pub type Dense = Vec<Vec<f64>>;

pub fn dense_identity(n: usize) -> Dense {
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn dense_mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let k = b.len();
    let p = b[0].len();
    let mut out = vec![vec![0.0; p]; n];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..p {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

pub fn dense_mul_vec(a: &Dense, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum()).collect()
}

/// Dense operator for one gate on an `n`-qubit register, under the
/// convention that qubit 0 owns the most significant amplitude-index bit.
pub fn dense_gate(gate: &Gate, n: usize, params: &[f64]) -> Dense {
    let dim = 1usize << n;
    let mut m = vec![vec![0.0; dim]; dim];
    match *gate {
        Gate::RotationY { target, slot } => {
            let half = params[slot] / 2.0;
            let (c, s) = (half.cos(), half.sin());
            let bit = n - 1 - target;
            for col in 0..dim {
                if (col >> bit) & 1 == 0 {
                    m[col][col] += c;
                    m[col | (1 << bit)][col] += s;
                } else {
                    m[col][col] += c;
                    m[col & !(1 << bit)][col] += -s;
                }
            }
        }
        Gate::ControlledNot { control, target } => {
            let cb = n - 1 - control;
            let tb = n - 1 - target;
            for col in 0..dim {
                let row = if (col >> cb) & 1 == 1 { col ^ (1 << tb) } else { col };
                m[row][col] = 1.0;
            }
        }
    }
    m
}

/// Full dense operator of a gate list (applied left to right in time).
pub fn dense_circuit(gates: &[Gate], n: usize, params: &[f64]) -> Dense {
    let mut op = dense_identity(1 << n);
    for g in gates {
        op = dense_mul(&dense_gate(g, n, params), &op);
    }
    op
}

/// Apply a gate list to the all-zeros state through dense algebra.
pub fn dense_run(gates: &[Gate], n: usize, params: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; 1 << n];
    v[0] = 1.0;
    for g in gates {
        v = dense_mul_vec(&dense_gate(g, n, params), &v);
    }
    v
}

/// Dense expectation of Z on one qubit: sum of |amp|^2 signed by that
/// qubit's bit.
pub fn dense_expect_z(state: &[f64], n: usize, qubit: usize) -> f64 {
    let bit = n - 1 - qubit;
    state
        .iter()
        .enumerate()
        .map(|(i, a)| if (i >> bit) & 1 == 0 { a * a } else { -(a * a) })
        .sum()
}

// ----- closed-form generator amplitudes -----

fn ch(t: f64) -> f64 {
    (t / 2.0).cos()
}

fn sh(t: f64) -> f64 {
    (t / 2.0).sin()
}

/// Two-qubit closed form. The textbook x3/x4 pair is transposed relative
/// to the circuit the same source defines; `transposed = true` gives the
/// circuit-consistent assignment, `false` the literal textbook one.
pub fn two_qubit_closed_form(theta: &[f64; 3], transposed: bool) -> [f64; 4] {
    let tp1 = theta[1] + theta[2];
    let tp2 = theta[1] - theta[2];
    let (x3, x4) = if transposed {
        (sh(theta[0]) * sh(tp2), sh(theta[0]) * ch(tp2))
    } else {
        (sh(theta[0]) * ch(tp2), sh(theta[0]) * sh(tp2))
    };
    [ch(theta[0]) * ch(tp1), ch(theta[0]) * sh(tp1), x3, x4]
}

/// Three-qubit closed form in the textbook convention.
pub fn three_qubit_closed_form(theta: &[f64; 7]) -> [f64; 8] {
    let tp1 = theta[1] + theta[2];
    let tp2 = theta[1] - theta[2];
    let tpp1 = theta[3] + theta[4] + theta[5] + theta[6];
    let tpp2 = theta[3] - theta[4] + theta[5] - theta[6];
    let tpp3 = theta[3] + theta[4] - theta[5] - theta[6];
    let tpp4 = theta[3] - theta[4] - theta[5] + theta[6];
    [
        ch(theta[0]) * ch(tp1) * ch(tpp1),
        ch(theta[0]) * ch(tp1) * sh(tpp1),
        ch(theta[0]) * sh(tp1) * ch(tpp4),
        ch(theta[0]) * sh(tp1) * sh(tpp4),
        sh(theta[0]) * sh(tp2) * sh(tpp2),
        sh(theta[0]) * sh(tp2) * ch(tpp2),
        sh(theta[0]) * ch(tp2) * sh(tpp3),
        sh(theta[0]) * ch(tp2) * ch(tpp3),
    ]
}

// ----- random draws -----

pub fn random_angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
}

pub fn random_angles(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| random_angle(rng)).collect()
}

/// Uniform-ish random unit vector (normalized box sample; rejects tiny
/// norms so the direction is well conditioned).
pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-2 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Distance up to a global sign flip.
pub fn max_abs_diff_up_to_sign(a: &[f64], b: &[f64]) -> f64 {
    max_abs_diff(a, b).min(
        a.iter().zip(b).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max),
    )
}

// ----- synthetic image fixtures (hand-rolled IDX writer) -----

pub const FIXTURE_SIDE: usize = 28;
pub const FIXTURE_PIXELS: usize = FIXTURE_SIDE * FIXTURE_SIDE;

/// Deterministic synthetic digit-like images: soft blobs whose center,
/// width, and intensity vary per sample, so a PCA on them has several
/// well-separated components.
pub fn blob_image(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let cx = 10.0 + 8.0 * rng.random_range(0.0..1.0);
    let cy = 10.0 + 8.0 * rng.random_range(0.0..1.0);
    let w = 3.0 + 2.5 * rng.random_range(0.0..1.0);
    let amp = 150.0 + 100.0 * rng.random_range(0.0..1.0);
    let mut img = vec![0u8; FIXTURE_PIXELS];
    for y in 0..FIXTURE_SIDE {
        for x in 0..FIXTURE_SIDE {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            let v = amp * (-d2 / (2.0 * w * w)).exp();
            img[y * FIXTURE_SIDE + x] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    img
}

/// Raw IDX bytes for an image file and a label file, written by hand.
pub fn idx_fixture_bytes(images: &[Vec<u8>], labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    assert_eq!(images.len(), labels.len());
    let mut img = Vec::new();
    img.extend_from_slice(&0x0000_0803u32.to_be_bytes());
    img.extend_from_slice(&(images.len() as u32).to_be_bytes());
    img.extend_from_slice(&(FIXTURE_SIDE as u32).to_be_bytes());
    img.extend_from_slice(&(FIXTURE_SIDE as u32).to_be_bytes());
    for image in images {
        assert_eq!(image.len(), FIXTURE_PIXELS);
        img.extend_from_slice(image);
    }
    let mut lab = Vec::new();
    lab.extend_from_slice(&0x0000_0801u32.to_be_bytes());
    lab.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    lab.extend_from_slice(labels);
    (img, lab)
}

/// Write a ready-to-train fixture dataset into `dir`: `count` blob images
/// of `digit` (plus a sprinkling of other labels), under the standard
/// MNIST file names. Returns the two paths.
pub fn write_fixture_dataset(
    dir: &std::path::Path,
    digit: u8,
    count: usize,
    seed: u64,
) -> (std::path::PathBuf, std::path::PathBuf) {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = count + count / 2 + 3;
    let mut images = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for k in 0..total {
        images.push(blob_image(&mut rng));
        labels.push(if k % 3 == 2 { (digit + 1 + (k % 9) as u8) % 10 } else { digit });
    }
    let (img, lab) = idx_fixture_bytes(&images, &labels);
    let images_path = dir.join("train-images-idx3-ubyte");
    let labels_path = dir.join("train-labels-idx1-ubyte");
    std::fs::write(&images_path, img).unwrap();
    std::fs::write(&labels_path, lab).unwrap();
    (images_path, labels_path)
}

// ----- independent symmetric eigensolver for PCA cross-checks -----

/// Plain cyclic Jacobi on a small symmetric matrix; returns eigenvalues in
/// descending order and matching eigenvector columns.
pub fn reference_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.len();
    let mut m: Dense = a.clone();
    let mut v = dense_identity(n);
    for _ in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let tau = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let mut vectors = vec![vec![0.0; n]; n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k][new_col] = v[k][old_col];
        }
    }
    (values, vectors)
}
