//! Independent numerical oracles shared by the integration tests. Nothing in
//! here calls the library's own quadrature or special-function code.

#![allow(dead_code)]

/// 20-point Gauss–Legendre nodes on [-1, 1] (positive half) from Golub–Welsch
/// style tabulation; computed once by Newton iteration, independently of the
/// library implementation.
fn gl_rule(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut d = 1.0;
        for _ in 0..60 {
            let (mut p0, mut p1) = (1.0f64, x);
            for j in 2..=n {
                let j = j as f64;
                let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / d;
            x -= dx;
            if dx.abs() < 1e-17 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * d * d)));
    }
    out
}

/// Adaptive Gauss–Legendre: compares a 20-point and a 10-point estimate on
/// each panel and bisects until they agree.
pub fn adaptive_gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let hi = gl_rule(20);
    let lo = gl_rule(10);
    fn rule(f: &dyn Fn(f64) -> f64, r: &[(f64, f64)], a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        r.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        hi: &[(f64, f64)],
        lo: &[(f64, f64)],
        a: f64,
        b: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let v_hi = rule(f, hi, a, b);
        let v_lo = rule(f, lo, a, b);
        if (v_hi - v_lo).abs() <= tol || depth > 40 {
            return v_hi;
        }
        let m = 0.5 * (a + b);
        rec(f, hi, lo, a, m, 0.5 * tol, depth + 1) + rec(f, hi, lo, m, b, 0.5 * tol, depth + 1)
    }
    rec(f, &hi, &lo, a, b, tol, 0)
}

/// `(P/π) ∫_{σ_c}^{w} √(σ² − β/σ² + α) dσ` with caustics computed here from
/// scratch and the substitution `σ = σ_c + x²`.
pub fn oracle_action(w: f64, alpha: f64, beta: f64, p: f64) -> f64 {
    let delta = (alpha * alpha + 4.0 * beta).sqrt();
    // roots of x² + αx − β in x = σ²: σ_c² ≥ 0 and −τ_c² ≤ 0
    let sc2 = if alpha <= 0.0 {
        0.5 * (delta - alpha)
    } else {
        2.0 * beta / (delta + alpha)
    };
    let tc2 = if alpha >= 0.0 {
        0.5 * (delta + alpha)
    } else {
        2.0 * beta / (delta - alpha)
    };
    let sc = sc2.sqrt();
    if sc >= w {
        return 0.0;
    }
    let g = |x: f64| {
        let s = sc + x * x;
        if s == 0.0 {
            return 0.0;
        }
        2.0 * x * (((s * s - sc2).max(0.0)) * (s * s + tc2)).sqrt() / s
    };
    let xm = (w - sc).sqrt();
    // split at the curvature scale of the integrand
    let knee = sc.sqrt().min(xm);
    let v = if knee > 0.0 && knee < xm {
        adaptive_gl(&g, 0.0, knee, 1e-14) + adaptive_gl(&g, knee, xm, 1e-14)
    } else {
        adaptive_gl(&g, 0.0, xm, 1e-14)
    };
    p / std::f64::consts::PI * v
}

/// Five-point central difference.
pub fn derivative(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Grid of (α, β) over the closed admissible triangle of a cavity.
pub fn admissible_grid(sigma0: f64, tau0: f64, n: usize) -> Vec<(f64, f64)> {
    let (s2, t2) = (sigma0 * sigma0, tau0 * tau0);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let alpha = -s2 + (s2 + t2) * i as f64 / (n - 1) as f64;
        let bmax = (s2 * s2 + alpha * s2).min(t2 * t2 - alpha * t2).max(0.0);
        for j in 0..n {
            out.push((alpha, bmax * j as f64 / (n - 1) as f64));
        }
    }
    out
}

/// Regular solution of `S'' + S'/w + (k²w² + c − m²/w²) S = 0` with
/// `S ~ w^m` at the origin, by a Frobenius series up to `w = 0.25` followed
/// by classical RK4 in `steps` equal steps.
pub fn radial_rk(w_end: f64, c: f64, k: f64, m: u32, steps: usize) -> f64 {
    let mu = m as f64;
    let w_start = 0.25f64.min(w_end);
    // S = Σ b_j w^{j+m}, b_j = −(c b_{j−2} + k² b_{j−4}) / (j(j+2m))
    let mut b = vec![0.0f64; 80];
    b[0] = 1.0;
    for j in (2..80).step_by(2) {
        let jf = j as f64;
        let prev4 = if j >= 4 { b[j - 4] } else { 0.0 };
        b[j] = -(c * b[j - 2] + k * k * prev4) / (jf * (jf + 2.0 * mu));
    }
    let (mut s, mut ds) = (0.0, 0.0);
    for (j, &bj) in b.iter().enumerate() {
        let p = j as f64 + mu;
        s += bj * w_start.powf(p);
        if p > 0.0 {
            ds += bj * p * w_start.powf(p - 1.0);
        }
    }
    if w_end <= w_start {
        return s;
    }
    let rhs = |w: f64, y: f64, dy: f64| -dy / w - (k * k * w * w + c - mu * mu / (w * w)) * y;
    let h = (w_end - w_start) / steps as f64;
    let mut w = w_start;
    for _ in 0..steps {
        let (k1y, k1d) = (ds, rhs(w, s, ds));
        let (k2y, k2d) = (
            ds + 0.5 * h * k1d,
            rhs(w + 0.5 * h, s + 0.5 * h * k1y, ds + 0.5 * h * k1d),
        );
        let (k3y, k3d) = (
            ds + 0.5 * h * k2d,
            rhs(w + 0.5 * h, s + 0.5 * h * k2y, ds + 0.5 * h * k2d),
        );
        let (k4y, k4d) = (ds + h * k3d, rhs(w + h, s + h * k3y, ds + h * k3d));
        s += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        ds += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        w += h;
    }
    s
}
