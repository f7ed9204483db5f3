use num_complex::Complex64 as C64;

use super::GreenJets;

/// `dG/dn_y = -n_y . grad g` where `g` is differentiated in `x - y`.
pub fn normal_derivative_y(g: &GreenJets, n_y: [f64; 2], out: &mut [C64]) {
    let p = &g.parts;
    for (i, o) in out.iter_mut().enumerate() {
        *o = -(p[1][i] * n_y[0] + p[2][i] * n_y[1]);
    }
}

/// Burton–Miller kernel `dG/dn_y + alpha d2G/dn_x dn_y`, with `alpha` a jet.
pub fn kernel_value(g: &GreenJets, n_x: [f64; 2], n_y: [f64; 2], alpha: &[C64], out: &mut [C64]) {
    let p = &g.parts;
    let n1 = out.len();
    let c11 = n_x[0] * n_y[0];
    let c12 = n_x[0] * n_y[1] + n_x[1] * n_y[0];
    let c22 = n_x[1] * n_y[1];
    let mut h = [C64::new(0.0, 0.0); super::JL];
    for i in 0..n1 {
        h[i] = -(p[3][i] * c11 + p[4][i] * c12 + p[5][i] * c22);
    }
    normal_derivative_y(g, n_y, out);
    for k in 0..n1 {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..=k {
            s += alpha[j] * h[k - j];
        }
        out[k] += s;
    }
}
