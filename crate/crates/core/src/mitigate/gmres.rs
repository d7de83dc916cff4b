//! Right-preconditioned GMRES without restarts.

pub struct Outcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// 1-norm of the final residual `b - A x`.
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for the operator `apply` with preconditioner
/// `diag(precond)^-1`, starting from zero. Stops once the residual has
/// 1-norm below `tol` or after `max_iter` Arnoldi steps.
///
/// The minimised quantity is the 2-norm of the residual; the 1-norm is
/// checked once the 2-norm estimate drops below `tol`.
pub fn solve(apply: impl Fn(&[f64]) -> Vec<f64>, precond: &[f64], b: &[f64], tol: f64, max_iter: usize) -> Outcome {
    let m = b.len();
    let beta = norm(b);
    if beta == 0.0 {
        return Outcome { x: vec![0.0; m], iterations: 0, residual: 0.0, converged: true };
    }
    let mut v: Vec<Vec<f64>> = vec![b.iter().map(|x| x / beta).collect()];
    let mut h: Vec<Vec<f64>> = Vec::new(); // column j holds R[0..=j][j]
    let (mut cs, mut sn) = (Vec::<f64>::new(), Vec::<f64>::new());
    let mut g = vec![beta];
    let residual_of = |x: &[f64]| {
        let ax = apply(x);
        b.iter().zip(ax).map(|(bi, ai)| (bi - ai).abs()).sum::<f64>()
    };
    let mut best = (vec![0.0; m], b.iter().map(|x| x.abs()).sum::<f64>());
    let mut k = 0;
    while k < max_iter.min(m) {
        let z: Vec<f64> = v[k].iter().zip(precond).map(|(x, d)| x / d).collect();
        let mut w = apply(&z);
        let mut col = Vec::with_capacity(k + 2);
        for vi in &v {
            let hij = dot(&w, vi);
            w.iter_mut().zip(vi).for_each(|(a, b)| *a -= hij * b);
            col.push(hij);
        }
        let hn = norm(&w);
        col.push(hn);
        for i in 0..k {
            let (a, b) = (col[i], col[i + 1]);
            col[i] = cs[i] * a + sn[i] * b;
            col[i + 1] = -sn[i] * a + cs[i] * b;
        }
        let r = col[k].hypot(col[k + 1]);
        let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (col[k] / r, col[k + 1] / r) };
        col.truncate(k + 1);
        col[k] = r;
        cs.push(c);
        sn.push(s);
        g.push(-s * g[k]);
        g[k] *= c;
        h.push(col);
        k += 1;
        let breakdown = hn <= f64::EPSILON * beta;
        // the 1-norm is at least the 2-norm, so only check once the latter is small
        if g[k].abs() < tol || breakdown || k == max_iter.min(m) {
            let x = assemble(&h, &g, &v, precond);
            let res = residual_of(&x);
            best = (x, res);
            if res < tol || breakdown {
                break;
            }
        }
        v.push(w.iter().map(|x| x / hn).collect());
    }
    let (x, residual) = best;
    Outcome { x, iterations: k, residual, converged: residual < tol }
}

/// `x = M^-1 V y` with `y` from back substitution on the rotated Hessenberg
/// matrix.
fn assemble(h: &[Vec<f64>], g: &[f64], v: &[Vec<f64>], precond: &[f64]) -> Vec<f64> {
    let k = h.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| h[j][i] * y[j]).sum();
        y[i] = (g[i] - s) / h[i][i];
    }
    let mut x = vec![0.0; precond.len()];
    for (yi, vi) in y.iter().zip(v) {
        x.iter_mut().zip(vi).for_each(|(a, b)| *a += yi * b);
    }
    x.iter_mut().zip(precond).for_each(|(a, d)| *a /= d);
    x
}
