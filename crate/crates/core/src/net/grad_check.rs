//! Finite-difference verification of the analytic backward pass.

use rand::Rng;

use super::matrix::Mat;
use super::mlp::{gaussian, Mlp};

pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub params_checked: usize,
    pub tolerance: f64,
    pub pass: bool,
    /// `(layer, "w"|"b", flat index)` of the worst parameter.
    pub worst: (usize, &'static str, usize),
}

/// Scalar test loss: fixed random linear functional of the batched outputs.
/// Nonlinear in the parameters through the hidden ELU layers.
fn loss(net: &Mlp, x: &Mat, w_out: &Mat) -> f64 {
    let y = net.forward(x).expect("shapes fixed by caller");
    y.data.iter().zip(w_out.data.iter()).map(|(a, b)| a * b).sum()
}

fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-4)
}

/// Compare analytic gradients against central finite differences on every
/// parameter of `net`. Intended for small nets (<= 10^4 parameters).
pub fn grad_check<R: Rng>(net: &Mlp, batch: usize, tolerance: f64, rng: &mut R) -> GradCheckReport {
    let n_in = net.input_dim();
    let n_out = net.output_dim();
    let mut x = Mat::zeros(batch, n_in);
    for v in x.data.iter_mut() {
        *v = gaussian(rng);
    }
    let mut w_out = Mat::zeros(batch, n_out);
    for v in w_out.data.iter_mut() {
        *v = gaussian(rng);
    }

    let (_, cache) = net.forward_cached(&x).expect("shapes fixed above");
    let (analytic, _) = net.backward(&cache, &w_out);

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        params_checked: 0,
        tolerance,
        pass: true,
        worst: (0, "w", 0),
    };
    let mut probe = net.clone();
    for l in 0..net.layers.len() {
        for idx in 0..net.layers[l].w.data.len() {
            let orig = net.layers[l].w.data[idx];
            probe.layers[l].w.data[idx] = orig + FD_STEP;
            let up = loss(&probe, &x, &w_out);
            probe.layers[l].w.data[idx] = orig - FD_STEP;
            let down = loss(&probe, &x, &w_out);
            probe.layers[l].w.data[idx] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let err = rel_error(analytic.layers[l].dw.data[idx], numeric);
            if err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = (l, "w", idx);
            }
            report.params_checked += 1;
        }
        for idx in 0..net.layers[l].b.len() {
            let orig = net.layers[l].b[idx];
            probe.layers[l].b[idx] = orig + FD_STEP;
            let up = loss(&probe, &x, &w_out);
            probe.layers[l].b[idx] = orig - FD_STEP;
            let down = loss(&probe, &x, &w_out);
            probe.layers[l].b[idx] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let err = rel_error(analytic.layers[l].db[idx], numeric);
            if err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = (l, "b", idx);
            }
            report.params_checked += 1;
        }
    }
    report.pass = report.max_rel_error < tolerance;
    report
}
