//! Multilayer perceptron with ELU hidden activations, a linear output, and
//! exact analytic backpropagation.

use rand::Rng;
use thiserror::Error;

use super::matrix::Mat;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("input has {got} columns, network expects {want}")]
    ShapeMismatch { got: usize, want: usize },
}

fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

fn elu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// One affine layer, weights stored `(out, in)` row-major.
#[derive(Debug, Clone)]
pub struct Linear {
    pub w: Mat,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Mlp {
    pub layers: Vec<Linear>,
}

/// Gradients aligned with [`Mlp::layers`].
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub layers: Vec<LinearGrad>,
}

#[derive(Debug, Clone)]
pub struct LinearGrad {
    pub dw: Mat,
    pub db: Vec<f64>,
}

/// Forward-pass intermediates needed by [`Mlp::backward`].
pub struct ForwardCache {
    /// Layer inputs: activations[0] is the network input.
    activations: Vec<Mat>,
    /// Pre-activation values of the hidden layers.
    pre_activations: Vec<Mat>,
}

/// Standard normal via Box-Muller, deterministic for a fixed rng stream.
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Orthogonal-style initialization: Gaussian matrix, modified Gram-Schmidt
/// over the shorter dimension, scaled by `gain`.
fn orthogonal_init<R: Rng>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for v in m.data.iter_mut() {
        *v = gaussian(rng);
    }
    let transpose = rows > cols;
    // orthonormalize the rows of the wide orientation
    let (r, c) = if transpose { (cols, rows) } else { (rows, cols) };
    let mut g = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            g[i * c + j] = if transpose { m.data[j * cols + i] } else { m.data[i * cols + j] };
        }
    }
    for i in 0..r {
        for p in 0..i {
            let mut dot = 0.0;
            for j in 0..c {
                dot += g[i * c + j] * g[p * c + j];
            }
            for j in 0..c {
                g[i * c + j] -= dot * g[p * c + j];
            }
        }
        let norm = (0..c).map(|j| g[i * c + j] * g[i * c + j]).sum::<f64>().sqrt().max(1e-12);
        for j in 0..c {
            g[i * c + j] /= norm;
        }
    }
    for i in 0..rows {
        for j in 0..cols {
            let v = if transpose { g[j * c + i] } else { g[i * c + j] };
            m.data[i * cols + j] = gain * v;
        }
    }
    m
}

impl Mlp {
    /// Build from `dims = [input, hidden..., output]`. Hidden layers get the
    /// sqrt(2) gain, the output layer `out_gain`.
    pub fn new<R: Rng>(dims: &[usize], out_gain: f64, rng: &mut R) -> Mlp {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for l in 0..dims.len() - 1 {
            let last = l == dims.len() - 2;
            let gain = if last { out_gain } else { std::f64::consts::SQRT_2 };
            layers.push(Linear {
                w: orthogonal_init(dims[l + 1], dims[l], gain, rng),
                b: vec![0.0; dims[l + 1]],
            });
        }
        Mlp { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").w.rows
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.data.len() + l.b.len()).sum()
    }

    pub fn zero_grads(&self) -> MlpGrads {
        MlpGrads {
            layers: self
                .layers
                .iter()
                .map(|l| LinearGrad { dw: Mat::zeros(l.w.rows, l.w.cols), db: vec![0.0; l.b.len()] })
                .collect(),
        }
    }

    fn affine(&self, l: usize, x: &Mat) -> Mat {
        let mut z = x.matmul_nt(&self.layers[l].w);
        for i in 0..z.rows {
            let row = z.row_mut(i);
            for (o, v) in row.iter_mut().enumerate() {
                *v += self.layers[l].b[o];
            }
        }
        z
    }

    /// Batched forward pass, rows are samples.
    pub fn forward(&self, x: &Mat) -> Result<Mat, NetError> {
        if x.cols != self.input_dim() {
            return Err(NetError::ShapeMismatch { got: x.cols, want: self.input_dim() });
        }
        let depth = self.layers.len();
        let mut a = x.clone();
        for l in 0..depth {
            let mut z = self.affine(l, &a);
            if l + 1 < depth {
                for v in z.data.iter_mut() {
                    *v = elu(*v);
                }
            }
            a = z;
        }
        Ok(a)
    }

    /// Forward pass retaining intermediates for [`Mlp::backward`].
    pub fn forward_cached(&self, x: &Mat) -> Result<(Mat, ForwardCache), NetError> {
        if x.cols != self.input_dim() {
            return Err(NetError::ShapeMismatch { got: x.cols, want: self.input_dim() });
        }
        let depth = self.layers.len();
        let mut activations = Vec::with_capacity(depth);
        let mut pre_activations = Vec::with_capacity(depth - 1);
        let mut a = x.clone();
        for l in 0..depth {
            activations.push(a.clone());
            let z = self.affine(l, &a);
            if l + 1 < depth {
                pre_activations.push(z.clone());
                let mut h = z;
                for v in h.data.iter_mut() {
                    *v = elu(*v);
                }
                a = h;
            } else {
                a = z;
            }
        }
        Ok((a, ForwardCache { activations, pre_activations }))
    }

    /// Exact gradients of a scalar loss with upstream gradient `grad_out`
    /// (one row per sample) with respect to every parameter. Also returns
    /// the gradient with respect to the network input.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Mat) -> (MlpGrads, Mat) {
        let depth = self.layers.len();
        let mut grads = self.zero_grads();
        let mut g = grad_out.clone();
        for l in (0..depth).rev() {
            grads.layers[l].dw = g.matmul_tn(&cache.activations[l]);
            grads.layers[l].db = g.col_sums();
            let mut gi = g.matmul_nn(&self.layers[l].w);
            if l > 0 {
                let z = &cache.pre_activations[l - 1];
                for (v, zv) in gi.data.iter_mut().zip(z.data.iter()) {
                    *v *= elu_grad(*zv);
                }
            }
            g = gi;
        }
        (grads, g)
    }
}

impl MlpGrads {
    pub fn scale(&mut self, s: f64) {
        for l in self.layers.iter_mut() {
            for v in l.dw.data.iter_mut() {
                *v *= s;
            }
            for v in l.db.iter_mut() {
                *v *= s;
            }
        }
    }

    pub fn norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for l in &self.layers {
            s += l.dw.data.iter().map(|v| v * v).sum::<f64>();
            s += l.db.iter().map(|v| v * v).sum::<f64>();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_pass_bias_through() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = Mlp::new(&[3, 4], 0.01, &mut rng);
        for v in net.layers[0].w.data.iter_mut() {
            *v = 0.0;
        }
        net.layers[0].b = vec![0.5, -0.25, 0.0, 2.0];
        let x = Mat::from_rows(vec![vec![1.0, -2.0, 3.0]]);
        let y = net.forward(&x).unwrap();
        assert_eq!(y.row(0), &[0.5, -0.25, 0.0, 2.0]);
    }

    #[test]
    fn elu_matches_definition() {
        assert_eq!(elu(0.0), 0.0);
        assert!((elu(-30.0) + 1.0).abs() < 1e-12);
        assert_eq!(elu(1.5), 1.5);
        assert!((elu(-1.0) - ((-1.0f64).exp() - 1.0)).abs() < 1e-15);
    }

    /// Independent scalar re-implementation of the forward pass: plain
    /// per-neuron loops, no matrix machinery.
    fn scalar_forward(net: &Mlp, x: &[f64]) -> Vec<f64> {
        let mut a: Vec<f64> = x.to_vec();
        for (l, layer) in net.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.w.rows];
            for (o, nv) in next.iter_mut().enumerate() {
                let mut acc = layer.b[o];
                for (i, av) in a.iter().enumerate() {
                    acc += layer.w.row(o)[i] * av;
                }
                *nv = if l + 1 < net.layers.len() { elu(acc) } else { acc };
            }
            a = next;
        }
        a
    }

    #[test]
    fn forward_matches_independent_scalar_implementation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let net = Mlp::new(&[8, 16, 8, 4], 0.5, &mut rng);
        for trial in 0..10 {
            let x: Vec<f64> = (0..8).map(|k| ((trial * 8 + k) as f64 * 0.7).sin()).collect();
            let batch = Mat::from_rows(vec![x.clone()]);
            let fast = net.forward(&batch).unwrap();
            let slow = scalar_forward(&net, &x);
            for (a, b) in fast.row(0).iter().zip(slow.iter()) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn forward_is_batch_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::new(&[5, 7, 2], 1.0, &mut rng);
        let rows: Vec<Vec<f64>> =
            (0..6).map(|i| (0..5).map(|j| ((i * 5 + j) as f64).cos()).collect()).collect();
        let batch = net.forward(&Mat::from_rows(rows.clone())).unwrap();
        for (i, row) in rows.iter().enumerate() {
            let single = net.forward(&Mat::from_rows(vec![row.clone()])).unwrap();
            for (a, b) in batch.row(i).iter().zip(single.row(0).iter()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn linear_net_gradient_is_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Mlp::new(&[3, 2], 1.0, &mut rng);
        let x = Mat::from_rows(vec![vec![0.5, -1.0, 2.0]]);
        let (_, cache) = net.forward_cached(&x).unwrap();
        let upstream = Mat::from_rows(vec![vec![1.0, -2.0]]);
        let (grads, _) = net.backward(&cache, &upstream);
        // dW[o][i] = upstream[o] * x[i]
        for o in 0..2 {
            for i in 0..3 {
                let expect = upstream.row(0)[o] * x.row(0)[i];
                assert_eq!(grads.layers[0].dw.row(o)[i], expect);
            }
        }
        assert_eq!(grads.layers[0].db, vec![1.0, -2.0]);
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = Mlp::new(&[4, 8, 3], 0.01, &mut rng);
        let x = Mat::from_rows(vec![vec![1.0, 2.0, 3.0, 4.0]]);
        let (_, cache) = net.forward_cached(&x).unwrap();
        let (grads, gi) = net.backward(&cache, &Mat::zeros(1, 3));
        assert_eq!(grads.norm_sq(), 0.0);
        assert!(gi.data.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shape_mismatch_is_hard_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::new(&[4, 2], 1.0, &mut rng);
        let x = Mat::from_rows(vec![vec![1.0, 2.0, 3.0]]);
        assert!(net.forward(&x).is_err());
    }

    #[test]
    fn orthogonal_init_rows_are_orthonormal_scaled() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = orthogonal_init(4, 16, std::f64::consts::SQRT_2, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..16).map(|k| m.row(i)[k] * m.row(j)[k]).sum();
                let expect = if i == j { 2.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-9, "({i},{j}) dot {dot}");
            }
        }
    }
}
