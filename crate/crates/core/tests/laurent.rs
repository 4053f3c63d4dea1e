use std::f64::consts::{FRAC_PI_2, TAU};

use ecslab::states::{
    annulus_integrand, annulus_integrand_on_circle, pn_coefficients_at, reconstruct_annulus_product, unit_points,
    QuadratureSpec,
};
use ecslab::verify::{draw_configuration, rng_for};
use ecslab::{Complex64, EllipticContext};

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn points(seed: u64, n: usize, nt: usize) -> (Vec<f64>, Vec<f64>) {
    let cfg = draw_configuration(&mut rng_for(seed), n + nt, 0.3).unwrap();
    let (x, xt) = cfg.coords().split_at(n);
    (x.to_vec(), xt.to_vec())
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

#[test]
fn node_doubling_and_radius_independence() {
    let ctx = EllipticContext::new(2.4).unwrap();
    let lambda = real(1.0);
    for seed in 0..4 {
        let (x, xt) = points(seed, 2, 1);
        let base = pn_coefficients_at(&ctx, lambda, &x, &xt, -3..=4, &QuadratureSpec::default()).unwrap();
        let doubled = QuadratureSpec { nodes: 512, ..QuadratureSpec::default() };
        let fine = pn_coefficients_at(&ctx, lambda, &x, &xt, -3..=4, &doubled).unwrap();
        for radius in [1.5, 2.0, 5.0] {
            let spec = QuadratureSpec { radius: Some(radius), ..QuadratureSpec::default() };
            let other = pn_coefficients_at(&ctx, lambda, &x, &xt, -3..=4, &spec).unwrap();
            for ((n, a), (_, b)) in base.iter().zip(other.iter()) {
                assert!(rel(a, b) < 1e-9, "seed {seed}, R = {radius}, n = {n}: {}", rel(a, b));
            }
        }
        for ((n, a), (_, b)) in base.iter().zip(fine.iter()) {
            assert!(rel(a, b) < 1e-10, "seed {seed}, n = {n}: {}", rel(a, b));
        }
    }
}

#[test]
fn laurent_series_reconstructs_the_integrand() {
    let ctx = EllipticContext::new(2.4).unwrap();
    for (seed, lambda) in [(5, real(1.0)), (6, Complex64::new(0.6, 0.2))] {
        let (x, xt) = points(seed, 2, 1);
        let quad = QuadratureSpec { radius: Some(1.8), ..QuadratureSpec::default() };
        let p = pn_coefficients_at(&ctx, lambda, &x, &xt, -40..=40, &quad).unwrap();
        for k in 0..7 {
            let xi = Complex64::from_polar(1.8, TAU * k as f64 / 7.0 + 0.1);
            let exact = annulus_integrand(&ctx, lambda, &unit_points(&x), &unit_points(&xt), xi).unwrap();
            let series = reconstruct_annulus_product(&ctx, &p, xi).unwrap();
            assert!(rel(series, exact) < 1e-8, "seed {seed}, k = {k}: {}", rel(series, exact));
        }
    }
}

#[test]
fn reconstruction_outside_annulus_is_rejected() {
    let ctx = EllipticContext::new(2.4).unwrap();
    let p = pn_coefficients_at(&ctx, real(1.0), &[2.0, 1.0], &[4.0], -2..=2, &QuadratureSpec::default()).unwrap();
    assert!(reconstruct_annulus_product(&ctx, &p, real(0.9)).is_err());
    assert!(reconstruct_annulus_product(&ctx, &p, real(1.0 / (ctx.q() * ctx.q()) + 0.1)).is_err());
}

/// With integer λ the real-argument product θ(x_j − y)^{−λ}θ(x̃_J − y) and
/// its multiplicative form differ by the plane wave e^{i[λ(|x|−y)−|x̃|]/2}
/// and the constant 2^λ e^{−iπλ/2}.
#[test]
fn real_and_multiplicative_products_agree() {
    let ctx = EllipticContext::new(3.0).unwrap();
    for (n, nt) in [(2usize, 1usize), (3, 2)] {
        let lambda = nt as f64 / (n - 1) as f64;
        assert_eq!(lambda, 1.0);
        let constant = Complex64::from_polar(2f64.powf(lambda), -FRAC_PI_2 * lambda);
        for seed in 0..20 {
            let cfg = draw_configuration(&mut rng_for(100 + seed), n + nt + 1, 0.3).unwrap();
            let (coords, y) = cfg.coords().split_at(n + nt);
            let y = y[0];
            let (x, xt) = coords.split_at(n);
            let direct: f64 = x.iter().map(|&xj| ctx.theta(xj - y).powf(-lambda)).product::<f64>()
                * xt.iter().map(|&xj| ctx.theta(xj - y)).product::<f64>();
            let multiplicative =
                annulus_integrand_on_circle(&ctx, real(lambda), &unit_points(x), &unit_points(xt), Complex64::cis(y))
                    .unwrap();
            let (sx, sxt): (f64, f64) = (x.iter().sum(), xt.iter().sum());
            let wave = Complex64::cis((lambda * (sx - y) - sxt) / 2.0);
            let got = real(direct) / (multiplicative * wave);
            assert!(rel(got, constant) < 1e-12, "({n}, {nt}) seed {seed}: {got} vs {constant}");
        }
    }
}
