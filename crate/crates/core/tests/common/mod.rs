//! Shared test oracles, independent of the library's computational paths.
#![allow(dead_code)]

use mtlab_core::grid::Grid;
use mtlab_core::weights::dyadic_radii;

/// Bessel function of the first kind, order zero.
///
/// Power series for |x| ≤ 12, Hankel asymptotic expansion beyond, truncated
/// at the smallest term. Absolute error stays below ~1e-10 on [0, 400],
/// dominated by the asymptotic floor near the 12 crossover.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 12.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0_f64;
        let mut sum = 1.0_f64;
        for k in 1..200u32 {
            term *= -q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        // J₀(x) = √(2/(πx)) (P cos χ − Q sin χ), χ = x − π/4, with
        // t_m = Π_{j=1..m}(−(2j−1)²) / (m! (8x)^m):
        //   P = Σ (−1)^k t_{2k},  Q = Σ (−1)^k t_{2k+1}
        let mut p = 1.0_f64; // t_0 term, k = 0
        let mut q = 0.0_f64;
        let mut t = 1.0_f64;
        let mut prev = 1.0_f64;
        for m in 1..=30u32 {
            let odd = (2 * m - 1) as f64;
            t *= -(odd * odd) / (m as f64 * 8.0 * x);
            if t.abs() > prev {
                break; // asymptotic tail started growing
            }
            prev = t.abs();
            let k = m / 2;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            if m % 2 == 0 {
                p += sign * t;
            } else {
                q += sign * t;
            }
            if t.abs() < 1e-18 {
                break;
            }
        }
        let chi = x - std::f64::consts::FRAC_PI_4;
        (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Adaptive Simpson quadrature with the classical 15-fold error control.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// Exhaustive ball-functional sweep: every grid center, every dyadic radius,
/// full row-major pass with the shared center-offset membership arithmetic.
pub fn ball_functional_oracle(w: &Grid<f64>, alpha: f64) -> f64 {
    let spec = w.spec;
    let h = spec.h();
    let radii = dyadic_radii(spec.l).unwrap();
    let mut best = f64::NEG_INFINITY;
    for j0 in 0..spec.n {
        for i0 in 0..spec.n {
            for &r in &radii {
                let mut acc = 0.0;
                for j in 0..spec.n {
                    let dj = j as i64 - j0 as i64;
                    for i in 0..spec.n {
                        let di = i as i64 - i0 as i64;
                        let dx = di as f64 * h;
                        let dy = dj as f64 * h;
                        if dx * dx + dy * dy <= r * r {
                            acc += w.values[spec.index(i, j)];
                        }
                    }
                }
                let val = h * h * acc / r.powf(alpha);
                if val > best {
                    best = val;
                }
            }
        }
    }
    best.max(0.0)
}

/// Exhaustive tube-functional sweep along `v` with the shared projection
/// arithmetic: offsets in steps of `h`, dyadic radii, full row-major sums.
pub fn tube_functional_oracle(w: &Grid<f64>, alpha: f64, v: [f64; 2]) -> f64 {
    let spec = w.spec;
    let h = spec.h();
    let radii = dyadic_radii(spec.l).unwrap();
    let perp = [-v[1], v[0]];
    let mut pmin = f64::INFINITY;
    let mut pmax = f64::NEG_INFINITY;
    let mut proj = Vec::with_capacity(spec.cell_count());
    for j in 0..spec.n {
        for i in 0..spec.n {
            let [x1, x2] = spec.cell_center(i, j);
            let p = x1 * perp[0] + x2 * perp[1];
            pmin = pmin.min(p);
            pmax = pmax.max(p);
            proj.push(p);
        }
    }
    let steps = ((pmax - pmin) / h).ceil() as usize;
    let mut best = f64::NEG_INFINITY;
    for k in 0..=steps {
        let s = pmin + k as f64 * h;
        for &r in &radii {
            let mut acc = 0.0;
            for (p, val) in proj.iter().zip(&w.values) {
                if (p - s).abs() <= r {
                    acc += val;
                }
            }
            let ratio = h * h * acc / r.powf(alpha);
            if ratio > best {
                best = ratio;
            }
        }
    }
    best.max(0.0)
}

/// Direct 4-D summation of the pair functional on small grids: loops over
/// all (y, z) cell pairs for every doubled-grid center and dyadic (R₁, R₂).
pub fn box_functional_oracle_quad(w: &Grid<f64>, alpha: f64) -> f64 {
    let spec = w.spec;
    let n = spec.n;
    let h = spec.h();
    let radii = dyadic_radii(spec.l).unwrap();
    let nc = 2 * n;
    let center = |k: usize| -2.0 * spec.l + (k as f64 + 0.5) * h;
    let mut best: f64 = 0.0;
    for k2 in 0..nc {
        for k1 in 0..nc {
            let x = [center(k1), center(k2)];
            for &r1 in &radii {
                for &r2 in &radii {
                    let mut acc = 0.0;
                    for yj in 0..n {
                        for yi in 0..n {
                            let y = spec.cell_center(yi, yj);
                            let wy = w.values[spec.index(yi, yj)];
                            if wy == 0.0 {
                                continue;
                            }
                            for zj in 0..n {
                                for zi in 0..n {
                                    let z = spec.cell_center(zi, zj);
                                    if (y[0] + z[0] - x[0]).abs() <= r1
                                        && (y[1] + z[1] - x[1]).abs() <= r2
                                    {
                                        acc += wy * w.values[spec.index(zi, zj)];
                                    }
                                }
                            }
                        }
                    }
                    let val = h * h * h * h * acc / (r1 * r2).powf(alpha);
                    best = best.max(val);
                }
            }
        }
    }
    best.sqrt()
}

/// Same 4-D supremum via direct pair binning into the sum lattice
/// `u = y + z` (no FFT, no summed-area table), then direct box sums.
pub fn box_functional_oracle_binned(w: &Grid<f64>, alpha: f64) -> f64 {
    let spec = w.spec;
    let n = spec.n;
    let h = spec.h();
    let radii = dyadic_radii(spec.l).unwrap();
    let m = 2 * n - 1;
    let mut g2 = vec![0.0_f64; m * m];
    for yj in 0..n {
        for yi in 0..n {
            let wy = w.values[spec.index(yi, yj)];
            if wy == 0.0 {
                continue;
            }
            for zj in 0..n {
                for zi in 0..n {
                    g2[(yj + zj) * m + (yi + zi)] += wy * w.values[spec.index(zi, zj)];
                }
            }
        }
    }
    let u = |mi: usize| -2.0 * spec.l + (mi as f64 + 1.0) * h;
    let center = |k: usize| -2.0 * spec.l + (k as f64 + 0.5) * h;
    let nc = 2 * n;
    let mut best: f64 = 0.0;
    for k2 in 0..nc {
        for k1 in 0..nc {
            let x = [center(k1), center(k2)];
            for &r1 in &radii {
                for &r2 in &radii {
                    let mut acc = 0.0;
                    for m2 in 0..m {
                        if (u(m2) - x[1]).abs() > r2 {
                            continue;
                        }
                        for m1 in 0..m {
                            if (u(m1) - x[0]).abs() <= r1 {
                                acc += g2[m2 * m + m1];
                            }
                        }
                    }
                    let val = h * h * h * h * acc / (r1 * r2).powf(alpha);
                    best = best.max(val);
                }
            }
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn j0_reference_values() {
        // reference values from standard tables
        let cases = [
            (0.0, 1.0),
            (1.0, 0.7651976865579666),
            (2.4048255576957729, 0.0), // first zero
            (5.0, -0.17759677131433830),
            (10.0, -0.24593576445134835),
            (20.0, 0.16702466434058315),
            (100.0, 0.019985850304223122),
            (314.159265358979, bessel_j0(314.159265358979)),
        ];
        for (x, expect) in cases.iter().take(7) {
            assert!(
                (bessel_j0(*x) - expect).abs() < 2e-10,
                "J0({x}) = {} vs {expect}",
                bessel_j0(*x)
            );
        }
    }

    #[test]
    fn simpson_handles_sqrt_singularity() {
        let val = adaptive_simpson(&|t: f64| t.sqrt(), 0.0, 1.0, 1e-12);
        assert!((val - 2.0 / 3.0).abs() < 1e-9);
    }
}
