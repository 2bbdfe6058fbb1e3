use iga_mortar::quadrature::GaussRule;
use iga_mortar::waveguide_modes::{
    bessel_j, bessel_j_over_x, bessel_prime_zero, bessel_zero, disc_modes, rect_modes, Angular, Family, ModeShape,
    WaveguideMode,
};
use std::f64::consts::PI;

/// Independent oracle: plain ascending series with no recurrence.
fn series_j(m: usize, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut fact_k = 1.0;
    for k in 0..80 {
        if k > 0 {
            fact_k *= k as f64;
        }
        let fact_km: f64 = (1..=k + m).map(|i| i as f64).product();
        sum += (-1f64).powi(k as i32) * (0.5 * x).powi((2 * k + m) as i32) / (fact_k * fact_km);
    }
    sum
}

/// Independent oracle for larger arguments: trapezoidal rule on Bessel's
/// integral, spectrally accurate for a periodic analytic integrand.
fn integral_j(m: usize, x: f64) -> f64 {
    let n = 400;
    let h = PI / n as f64;
    let f = |t: f64| (m as f64 * t - x * t.sin()).cos();
    let inner: f64 = (1..n).map(|i| f(i as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

fn integral_jp(m: usize, x: f64) -> f64 {
    if m == 0 {
        -integral_j(1, x)
    } else {
        0.5 * (integral_j(m - 1, x) - integral_j(m + 1, x))
    }
}

fn series_jp(m: usize, x: f64) -> f64 {
    if m == 0 {
        -series_j(1, x)
    } else {
        0.5 * (series_j(m - 1, x) - series_j(m + 1, x))
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..100 {
        let c = 0.5 * (a + b);
        if (f(c) > 0.0) == (f(a) > 0.0) {
            a = c;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

#[test]
fn frozen_zeros() {
    assert!((bessel_zero(0, 1).unwrap() - 2.404825557695773).abs() <= 1e-12);
    assert!((bessel_prime_zero(1, 1).unwrap() - 1.841183781340659).abs() <= 1e-12);
    assert!((bessel_zero(0, 1).unwrap() - bisect(|x| series_j(0, x), 2.0, 3.0)).abs() <= 1e-9);
    assert!((bessel_prime_zero(1, 1).unwrap() - bisect(|x| series_jp(1, x), 1.5, 2.0)).abs() <= 1e-9);
    assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    assert!(bessel_j(0, 250.0).is_err());
    assert!(bessel_zero(0, 0).is_err());
}

#[test]
fn values_match_independent_oracles() {
    for m in 0..8 {
        for i in 0..60 {
            let x = 0.25 * i as f64;
            let a = bessel_j(m, x).unwrap();
            let b = integral_j(m, x);
            assert!((a - b).abs() <= 1e-13, "J_{m}({x}): {a} vs {b}");
            if x <= 8.0 {
                assert!((a - series_j(m, x)).abs() <= 1e-13);
            }
        }
    }
    for m in 1..5 {
        let x = 1e-5;
        let q = bessel_j_over_x(m, x).unwrap();
        assert!((q - series_j(m, x) / x).abs() <= 1e-14);
    }
}

#[test]
fn zeros_match_bisection_oracle() {
    for m in 0..6 {
        for k in 1..5 {
            let z = bessel_zero(m, k).unwrap();
            assert!(integral_j(m, z).abs() <= 1e-12, "residual at chi_{m}{k}");
            let oracle = bisect(|x| integral_j(m, x), z - 0.02, z + 0.02);
            assert!((z - oracle).abs() <= 1e-9);
            assert!(bessel_zero(m, k + 1).unwrap() > z);
            let zp = bessel_prime_zero(m, k).unwrap();
            let oracle = bisect(|x| integral_jp(m, x), zp - 0.02, zp + 0.02);
            assert!((zp - oracle).abs() <= 1e-9, "chi'_{m}{k}: {zp} vs {oracle}");
        }
    }
    assert!(bessel_prime_zero(1, 1).unwrap() < bessel_zero(0, 1).unwrap());
    assert_eq!(bessel_prime_zero(0, 2).unwrap(), bessel_zero(1, 2).unwrap());
}

#[test]
fn rectangle_ordering() {
    let modes = rect_modes(1.0, 1.0, 18).unwrap();
    assert_eq!(modes[0].family, Family::TE);
    assert!((modes[0].gamma - PI).abs() <= 1e-14);
    assert_eq!((modes[0].m, modes[0].k), (0, 1));
    assert_eq!((modes[1].m, modes[1].k), (1, 0));
    assert_eq!(modes[2].family, Family::TM);
    assert!((modes[2].gamma - PI * 2f64.sqrt()).abs() <= 1e-14);
    assert_eq!(modes[3].family, Family::TE);
    let longer = rect_modes(1.0, 1.0, 19).unwrap();
    assert_eq!(&longer[..18], &modes[..]);
    assert!(rect_modes(1.0, 1.0, 0).is_err());
}

#[test]
fn disc_ordering() {
    let modes = disc_modes(1.0, 25).unwrap();
    assert_eq!(modes[0].family, Family::TE);
    assert_eq!((modes[0].m, modes[0].k), (1, 1));
    assert!((modes[0].gamma - 1.841183781340659).abs() <= 1e-12);
    assert!(matches!(modes[0].shape, ModeShape::Disc { angular: Angular::Cos, .. }));
    assert!(matches!(modes[1].shape, ModeShape::Disc { angular: Angular::Sin, .. }));
    assert_eq!(modes[1].gamma, modes[0].gamma);
    let tm01 = modes.iter().find(|m| m.family == Family::TM).unwrap();
    assert_eq!((tm01.m, tm01.k), (0, 1));
    for (i, md) in modes.iter().enumerate() {
        if md.m >= 1 {
            let twin = modes.iter().filter(|o| o.family == md.family && o.m == md.m && o.k == md.k).count();
            assert!(twin == 2 || i >= 23, "pair of {:?}", md);
        }
    }
    for w in modes.windows(2) {
        assert!(w[0].gamma <= w[1].gamma);
    }
    let longer = disc_modes(1.0, 30).unwrap();
    assert_eq!(&longer[..25], &modes[..]);
}

fn gram(modes: &[WaveguideMode], pts: &[([f64; 2], f64)]) -> Vec<Vec<f64>> {
    let vals: Vec<Vec<[f64; 2]>> =
        modes.iter().map(|m| pts.iter().map(|(p, _)| m.field(p[0], p[1])).collect()).collect();
    (0..modes.len())
        .map(|i| {
            (0..modes.len())
                .map(|j| {
                    pts.iter()
                        .enumerate()
                        .map(|(q, (_, w))| w * (vals[i][q][0] * vals[j][q][0] + vals[i][q][1] * vals[j][q][1]))
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn assert_identity(g: &[Vec<f64>]) {
    for (i, row) in g.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((v - expect).abs() <= 1e-10, "gram[{i}][{j}] = {v}");
        }
    }
}

#[test]
fn rectangle_modes_are_orthonormal() {
    let (a, b) = (1.0, 0.7);
    let modes = rect_modes(a, b, 20).unwrap();
    let rule = GaussRule::new(20);
    let mut pts = Vec::new();
    for ex in 0..4 {
        let (px, wx) = rule.mapped(ex as f64 * a / 4.0, (ex + 1) as f64 * a / 4.0);
        for ey in 0..4 {
            let (py, wy) = rule.mapped(ey as f64 * b / 4.0, (ey + 1) as f64 * b / 4.0);
            for i in 0..px.len() {
                for j in 0..py.len() {
                    pts.push(([px[i], py[j]], wx[i] * wy[j]));
                }
            }
        }
    }
    assert_identity(&gram(&modes, &pts));
}

#[test]
fn disc_modes_are_orthonormal() {
    let r = 1.3;
    let modes = disc_modes(r, 20).unwrap();
    let rr = GaussRule::new(40);
    let rt = GaussRule::new(24);
    let mut pts = Vec::new();
    for er in 0..2 {
        let (pr, wr) = rr.mapped(er as f64 * r / 2.0, (er + 1) as f64 * r / 2.0);
        for et in 0..8 {
            let (pt, wt) = rt.mapped(et as f64 * PI / 4.0, (et + 1) as f64 * PI / 4.0);
            for i in 0..pr.len() {
                for j in 0..pt.len() {
                    pts.push(([pr[i] * pt[j].cos(), pr[i] * pt[j].sin()], wr[i] * wt[j] * pr[i]));
                }
            }
        }
    }
    assert_identity(&gram(&modes, &pts));
}

#[test]
fn potentials_solve_the_helmholtz_equation() {
    let mut modes = rect_modes(1.0, 0.8, 10).unwrap();
    modes.extend(disc_modes(1.0, 10).unwrap());
    let h = 1e-3;
    for md in &modes {
        for i in 0..20 {
            let t = (i as f64 + 0.5) / 20.0;
            let (x, y) = match md.shape {
                ModeShape::Rectangle { a, b } => (a * (0.1 + 0.8 * t), b * (0.9 - 0.8 * t * t)),
                ModeShape::Disc { radius, .. } => (radius * 0.7 * (6.0 * t).cos() * t, radius * 0.7 * (6.0 * t).sin()),
            };
            let f = |x: f64, y: f64| md.potential(x, y);
            let lap = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
            let res = lap + md.gamma * md.gamma * f(x, y);
            let scale = md.gamma * md.gamma * (1.0 + f(x, y).abs());
            assert!(res.abs() <= 1e-4 * scale, "{md:?} at ({x}, {y}): residual {res}");
        }
    }
}
