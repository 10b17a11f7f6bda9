use std::f64::consts::PI;

use super::*;
use crate::geometry::Word;
use crate::tensor::Boundary;

fn torus() -> FuchsianSurface {
    FuchsianSurface::punctured_torus()
}

fn chart(nr: usize, nt: usize) -> TensorGrid {
    TensorGrid::for_cusp(1.0, nr, nt, 6.0).unwrap()
}

fn classes(s: &FuchsianSurface) -> Vec<ClosedGeodesic> {
    s.enumerate_hyperbolic_classes(6).unwrap()
}

fn geodesic(s: &FuchsianSurface, w: &str) -> ClosedGeodesic {
    let w: Word = w.parse().unwrap();
    ClosedGeodesic::from_word(w.clone(), s.word_matrix(&w)).unwrap()
}

/// Highest chart point of a class, found by sampling.
fn apex(s: &FuchsianSurface, c: &ClosedGeodesic) -> ChartPoint {
    (0..4000)
        .map(|k| {
            let (z, v) = c.point_at(c.length * k as f64 / 4000.0);
            to_chart(s, z, v).unwrap()
        })
        .max_by(|a, b| a.r.total_cmp(&b.r))
        .unwrap()
}

#[test]
fn metric_gives_one_on_every_class() {
    let s = torus();
    let cs = classes(&s);
    assert!(cs.len() >= 50);
    for r in xray_classes(&Metric, &cs, 1e-12).unwrap() {
        assert!(
            (r.value - 1.0).abs() <= 1e-10,
            "{}: {}",
            r.class_word,
            r.value
        );
    }
}

#[test]
fn zero_tensor_gives_zero() {
    let s = torus();
    let zero = ChartField::new(
        &s,
        &SymTensorField::zeros(2, chart(64, 16)).unwrap(),
        Exterior::Strict,
    )
    .unwrap();
    for c in classes(&s).iter().take(10) {
        assert_eq!(xray_eval(&zero, c, 1e-12).unwrap().value, 0.0);
    }
}

#[test]
fn chart_lift_preserves_unit_tangents() {
    let s = torus();
    for c in classes(&s).iter().take(20) {
        for k in 0..25 {
            let (z, v) = c.point_at(c.length * k as f64 / 25.0);
            let p = to_chart(&s, z, v).unwrap();
            assert!((p.v[0].hypot(p.v[1]) - 1.0).abs() < 1e-10);
            assert!((0.0..6.0).contains(&p.theta));
        }
    }
}

#[test]
fn gaussian_bump_matches_trapezoid_oracle() {
    let s = torus();
    let c = classes(&s)
        .into_iter()
        .max_by(|a, b| apex(&s, a).r.total_cmp(&apex(&s, b).r))
        .unwrap();
    let top = apex(&s, &c);
    let (r0, sigma, t0) = (top.r - 0.1, 0.12, top.theta);
    let profile = move |r: f64, t: f64| {
        let d = (t - t0).rem_euclid(6.0);
        (-((r - r0) / sigma).powi(2)).exp() * (2.0 * ((2.0 * PI * d / 6.0).cos() - 1.0)).exp()
    };
    let weights = [1.0, 0.5, 0.2];
    let f = SymTensorField::from_fn(2, chart(512, 256), |r, t| {
        weights.iter().map(|w| w * profile(r, t)).collect()
    })
    .unwrap();
    let tol = 1e-7;
    let res = xray_eval(&ChartField::new(&s, &f, Exterior::Strict).unwrap(), &c, tol).unwrap();
    assert!(res.value > 1e-3);

    // trapezoid on the analytic field, 10x the quadrature's node count
    let n = 10 * GAUSS_ORDER * res.panels;
    let sum: f64 = (0..n)
        .map(|k| {
            let (z, v) = c.point_at(c.length * k as f64 / n as f64);
            let (w, g) = s.lift_to_cusp(z).unwrap();
            let dw = g.derivative(z) * v;
            let (vy, vt) = (dw.im / w.im, dw.re / w.im);
            let p = profile(w.im.ln(), w.re);
            p * (weights[0] * vy * vy + weights[1] * vt * vt + 2.0 * weights[2] * vy * vt)
        })
        .sum();
    let oracle = sum / n as f64;
    assert!(
        (res.value - oracle).abs() <= tol,
        "{} vs {oracle}",
        res.value
    );
    assert!(res.quadrature_error_estimate <= tol);
}

#[test]
fn linear_in_the_tensor() {
    let s = torus();
    let g = chart(128, 32);
    let f1 = SymTensorField::from_fn(2, g, |r, t| {
        let b = crate::mode0::bump(r, 1.0, 0.8);
        vec![b, b * (PI * t / 3.0).cos(), 0.3 * b]
    })
    .unwrap();
    let f2 = SymTensorField::from_fn(2, g, |r, t| {
        let b = crate::mode0::bump(r, 0.9, 0.6);
        vec![b * (PI * t / 3.0).sin(), -b, b]
    })
    .unwrap();
    let combo = f1.scale(2.5).add(&f2.scale(-0.75)).unwrap();
    let src = |f: &SymTensorField| ChartField::new(&s, f, Exterior::Strict).unwrap();
    for c in classes(&s).iter().take(12) {
        let (a, b, ab) = (
            xray_fixed(&src(&f1), c, 64).unwrap(),
            xray_fixed(&src(&f2), c, 64).unwrap(),
            xray_fixed(&src(&combo), c, 64).unwrap(),
        );
        assert!((ab - (2.5 * a - 0.75 * b)).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()));
    }
}

#[test]
fn orientation_parity() {
    let s = torus();
    let p = BumpOneForm::random(&s, 0.9, 0.8, 3, 5).unwrap();
    let f = p.to_field(chart(256, 32)).unwrap();
    let f2 = SymTensorField::from_fn(2, chart(256, 32), |r, t| {
        let b = crate::mode0::bump(r, 0.9, 0.8);
        vec![b * (PI * t / 3.0).cos(), b, 0.7 * b]
    })
    .unwrap();
    let one = OneForm(p);
    let two = ChartField::new(&s, &f2, Exterior::Strict).unwrap();
    assert!(f.sup() > 0.0);
    for c in classes(&s).iter().take(15) {
        let back = c.reversed();
        let (a, b) = (
            xray_eval(&one, c, 1e-11).unwrap().value,
            xray_eval(&one, &back, 1e-11).unwrap().value,
        );
        assert!((a + b).abs() <= 2e-11, "{}: {a} {b}", c.word);
        let (a, b) = (
            xray_eval(&two, c, 1e-11).unwrap().value,
            xray_eval(&two, &back, 1e-11).unwrap().value,
        );
        assert!((a - b).abs() <= 2e-11);
    }
}

#[test]
fn cyclic_rotation_of_the_word() {
    let s = torus();
    let p = OneForm(BumpOneForm::random(&s, 0.9, 0.8, 3, 8).unwrap());
    let tol = 1e-11;
    for word in ["abb", "aab", "abAbAB", "aaBAb"] {
        let base = xray_eval(&p, &geodesic(&s, word), tol).unwrap().value;
        let w: Word = word.parse().unwrap();
        for k in 1..w.len() {
            let rot = w.rotate(k);
            let g = ClosedGeodesic::from_word(rot.clone(), s.word_matrix(&rot));
            let Ok(g) = g else { continue };
            let v = xray_eval(&p, &g, tol).unwrap().value;
            assert!(
                (v - base).abs() <= 2.0 * tol,
                "{word} rotated by {k}: {v} vs {base}"
            );
        }
    }
}

#[test]
fn symbolic_potentials_are_annihilated() {
    let s = torus();
    let cs = classes(&s);
    let zero = BumpOneForm::new(&s, 0.9, 0.8, vec![[0.0; 4]]).unwrap();
    assert_eq!(
        potential_annihilation_suite(zero, 0.0, &cs, 1e-12)
            .unwrap()
            .max_abs,
        0.0
    );
    for seed in 0..3 {
        let p = BumpOneForm::random(&s, 0.9, 0.8, 3, seed).unwrap();
        let sup = p.to_field(chart(256, 64)).unwrap().sup();
        let rep = potential_annihilation_suite(p, sup, &cs, 1e-11).unwrap();
        assert!(rep.classes >= 50);
        assert!(rep.relative <= 1e-8, "seed {seed}: {:e}", rep.relative);
        // the integrals are not trivially zero class by class
        assert!(rep.results.iter().all(|r| r.value.is_finite()));
    }
}

#[test]
fn grid_potential_is_annihilated() {
    let s = torus();
    let cs = classes(&s);
    let p = BumpOneForm::random(&s, 0.9, 0.8, 3, 21).unwrap();
    let f = p.to_field(chart(512, 256)).unwrap();
    let rep = potential_annihilation_suite(
        GridOneForm::new(&s, &f).unwrap(),
        f.sup(),
        &cs,
        1e-7 * f.sup(),
    )
    .unwrap();
    assert!(rep.relative <= 1e-6, "{:e}", rep.relative);
}

#[test]
fn leaving_a_live_chart_is_a_coverage_error() {
    let s = torus();
    // geodesic `a` touches height 1 but never goes above 1.12
    let g = TensorGrid::for_cusp(1.05, 64, 16, 6.0).unwrap();
    let f = SymTensorField::from_fn(2, g, |r, _| vec![1.0 + r, 0.0, 0.0]).unwrap();
    let strict = ChartField::new(&s, &f, Exterior::Strict).unwrap();
    let c = geodesic(&s, "a");
    assert!(matches!(
        xray_eval(&strict, &c, 1e-8),
        Err(Error::Coverage(_))
    ));
    let cut = ChartField::new(&s, &f, Exterior::Truncate).unwrap();
    assert!(xray_fixed(&cut, &c, 16).unwrap().is_finite());
    let wrong = SymTensorField::zeros(2, TensorGrid::for_cusp(1.0, 64, 16, 1.0).unwrap()).unwrap();
    assert!(ChartField::new(&s, &wrong, Exterior::Strict).is_err());
}

#[test]
fn probe_flags_potentials_and_zero() {
    let s = torus();
    let cs: Vec<_> = classes(&s).into_iter().take(20).collect();
    let g = chart(128, 32);
    let p = BumpOneForm::random(&s, 1.0, 0.8, 2, 4)
        .unwrap()
        .to_field(g)
        .unwrap();
    let f = crate::tensor::dirichlet_sym_derivative(&p).unwrap();
    let rep = solenoidal_probe(&s, &f, &cs, 1e-9).unwrap();
    assert_eq!(rep.verdict, ProbeVerdict::Potential);
    assert!(rep.results.iter().all(|r| r.value.abs() <= 1e-8 * f.sup()));
    let zero = SymTensorField::zeros(2, g).unwrap();
    let rep = solenoidal_probe(&s, &zero, &cs, 1e-9).unwrap();
    assert!(rep.results.iter().all(|r| r.value == 0.0));
    let _ = Boundary::Dirichlet;
}

#[test]
fn probe_detects_a_bump_along_a_short_geodesic() {
    let s = torus();
    let cs = classes(&s);
    let c = cs.iter().find(|c| apex(&s, c).r > 1.0).unwrap().clone();
    let top = apex(&s, &c);
    // π_2^*(φ g) = φ ≥ 0, so the integrand of f is single-signed
    let g = chart(256, 64);
    let f = SymTensorField::from_fn(2, g, |r, t| {
        let d = (t - top.theta).rem_euclid(6.0);
        let phi =
            crate::mode0::bump(r, top.r - 0.3, 0.4) * (3.0 * ((PI * d / 3.0).cos() - 1.0)).exp();
        vec![phi, phi, 0.0]
    })
    .unwrap();
    let rep = solenoidal_probe(&s, &f, std::slice::from_ref(&c), 1e-8).unwrap();
    assert_eq!(rep.verdict, ProbeVerdict::Detected, "{rep:?}");
    assert!(rep.detection_ratio > DETECTION_FACTOR);
    assert_eq!(rep.best_class.as_deref(), Some(c.word.to_string().as_str()));
}

#[test]
fn results_csv() {
    let s = torus();
    let res = xray_classes(&Metric, &classes(&s)[..3], 1e-12).unwrap();
    let mut buf = Vec::new();
    write_results_csv(&res, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("word,length,value,error\n"));
    assert_eq!(text.lines().count(), 4);
}
