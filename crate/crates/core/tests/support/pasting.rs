//! Independent root-find of the smooth-pasting equations
//!
//! ```text
//! m + v + A e^{−ρv} = s̲,    1 − A ρ e^{−ρv} = 0
//! ```
//!
//! in the unknowns `(v, ln A)` by Newton's method with a finite-difference Jacobian.
//! Returns `(v̲, ln A)`.

pub fn solve_pasting_numerically(m: f64, rho: f64, barrier: f64) -> Option<(f64, f64)> {
    let residual = |v: f64, log_a: f64| {
        let tail = (log_a - rho * v).exp();
        [m + v + tail - barrier, 1.0 - rho * tail]
    };
    // crude start: the free-float position with a unit correction term
    let mut x = [barrier - m, rho * (barrier - m)];
    for _ in 0..500 {
        let f = residual(x[0], x[1]);
        if f[0] == 0.0 && f[1] == 0.0 {
            return Some((x[0], x[1]));
        }
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x;
            xp[j] += h;
            let mut xm = x;
            xm[j] -= h;
            let (fp, fm) = (residual(xp[0], xp[1]), residual(xm[0], xm[1]));
            for i in 0..2 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = [
            (f[0] * jac[1][1] - f[1] * jac[0][1]) / det,
            (jac[0][0] * f[1] - jac[1][0] * f[0]) / det,
        ];
        // damp steps that would overflow the exponential
        let scale = (5.0 / dx[1].abs().max(rho * dx[0].abs())).min(1.0);
        x[0] -= scale * dx[0];
        x[1] -= scale * dx[1];
        if dx[0].abs() < 1e-13 * (1.0 + x[0].abs()) && dx[1].abs() < 1e-13 * (1.0 + x[1].abs()) {
            return Some((x[0], x[1]));
        }
    }
    None
}
