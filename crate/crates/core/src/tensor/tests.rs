use std::f64::consts::PI;

use super::*;
use crate::mode0::bump;

fn grid(nr: usize, nt: usize) -> TensorGrid {
    TensorGrid::new(0.0, 20f64.ln(), nr, nt, 1.0).unwrap()
}

fn model(g: TensorGrid, lambda: f64, a: f64, b: f64) -> SymTensorField {
    SymTensorField::from_fn(1, g, |r, _| {
        vec![a * (lambda * r).exp(), b * (lambda * r).exp()]
    })
    .unwrap()
}

fn sup_diff(x: &SymTensorField, y: &SymTensorField) -> f64 {
    x.sub(y).unwrap().sup_on(x.grid().interior_rows())
}

#[test]
fn d_of_model_forms() {
    let g = grid(65, 8);
    let dyy = sym_derivative(&model(g, 0.0, 1.0, 0.0)).unwrap();
    let expect = SymTensorField::from_fn(2, g, |_, _| vec![0.0, -1.0, 0.0]).unwrap();
    assert!(sup_diff(&dyy, &expect) < 1e-13);
    let dth = sym_derivative(&model(g, 1.0, 0.0, 1.0)).unwrap();
    let expect = SymTensorField::from_fn(2, g, |r, _| vec![0.0, 0.0, r.exp()]).unwrap();
    assert!(sym_derivative(&model(g, 1.0, 0.0, 0.0)).unwrap().sup() < 1e-14);
    assert!(sup_diff(&dth, &expect) < 1e-2);
}

#[test]
fn model_exactness_converges_at_second_order() {
    let lambda = 0.7;
    let (mut hs, mut ed, mut el) = (vec![], vec![], vec![]);
    for nr in [65, 129, 257] {
        let g = grid(nr, 8);
        let u = model(g, lambda, 1.0, -0.5);
        let d = sym_derivative(&u).unwrap();
        let d_exact = SymTensorField::from_fn(2, g, |r, _| {
            let e = (lambda * r).exp();
            vec![lambda * e, -e, 0.5 * (lambda + 1.0) * -0.5 * e]
        })
        .unwrap();
        let l = sym_laplacian(&u).unwrap();
        let l_exact = SymTensorField::from_fn(1, g, |r, _| {
            let e = (lambda * r).exp();
            vec![
                (lambda * lambda - lambda - 1.0) * e,
                -0.5 * 0.5 * (lambda + 1.0) * (lambda - 2.0) * e,
            ]
        })
        .unwrap();
        hs.push(g.hr());
        ed.push(sup_diff(&d, &d_exact));
        el.push(sup_diff(&l, &l_exact));
    }
    assert!(observed_order(&hs, &ed) >= 1.9, "{ed:?}");
    assert!(observed_order(&hs, &el) >= 1.9, "{el:?}");
}

fn test_pair(g: TensorGrid) -> (SymTensorField, SymTensorField) {
    let p = SymTensorField::from_fn(1, g, |r, t| {
        let b = bump(r, 1.4, 0.9);
        vec![b * (2.0 * PI * t).cos(), b * (0.3 + (4.0 * PI * t).sin())]
    })
    .unwrap();
    let f = SymTensorField::from_fn(2, g, |r, t| {
        let b = bump(r, 1.6, 0.8);
        vec![
            b * (2.0 * PI * t).sin(),
            b * r,
            b * (1.0 + (2.0 * PI * t).cos()),
        ]
    })
    .unwrap();
    (p, f)
}

#[test]
fn adjointness() {
    let (mut hs, mut errs) = (vec![], vec![]);
    for nr in [65, 129, 257] {
        let g = grid(nr, 16);
        let (p, f) = test_pair(g);
        let lhs = sym_derivative(&p).unwrap().inner(&f).unwrap();
        let rhs = p.inner(&divergence(&f).unwrap()).unwrap();
        hs.push(g.hr());
        errs.push((lhs + rhs).abs());
        let exact = p.inner(&adjoint_divergence(&f).unwrap()).unwrap();
        assert!((lhs + exact).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
    assert!(observed_order(&hs, &errs) >= 1.9, "{errs:?}");
}

#[test]
fn zero_in_zero_out_and_order_checks() {
    let g = grid(17, 8);
    let z1 = SymTensorField::zeros(1, g).unwrap();
    assert_eq!(sym_derivative(&z1).unwrap().sup(), 0.0);
    assert_eq!(sym_laplacian(&z1).unwrap().sup(), 0.0);
    assert!(divergence(&SymTensorField::zeros(0, g).unwrap()).is_err());
    assert!(sym_derivative(&SymTensorField::zeros(2, g).unwrap()).is_err());
}

#[test]
fn pure_potential_projects_to_zero() {
    let g = grid(129, 32);
    let (p, _) = test_pair(g);
    let f = sym_derivative(&p).unwrap();
    let dec = solenoidal_project(&f, Boundary::Dirichlet).unwrap();
    assert!(
        dec.solenoidal.norm() <= 1e-8 * f.norm(),
        "{}",
        dec.solenoidal.norm() / f.norm()
    );
    assert!(dec.potential.sub(&p).unwrap().sup() <= 1e-8 * p.sup());
}

#[test]
fn projection_is_idempotent_and_orthogonal() {
    let g = grid(129, 32);
    let (_, f) = test_pair(g);
    let dec = solenoidal_project(&f, Boundary::Dirichlet).unwrap();
    assert!(dec.report.decomposition_residual <= 1e-12);
    assert!(dec.report.orthogonality <= 1e-6);
    let again = project_unchecked(&dec.solenoidal, Boundary::Dirichlet).unwrap();
    assert!(again.potential.norm() <= 1e-6 * dec.solenoidal.norm());
    assert!(again.solenoidal.sub(&dec.solenoidal).unwrap().norm() <= 1e-6 * dec.solenoidal.norm());
}

#[test]
fn projection_divergence_converges() {
    let (mut hs, mut errs) = (vec![], vec![]);
    for (nr, nt) in [(65, 16), (129, 16), (257, 16)] {
        let g = grid(nr, nt);
        let (_, f) = test_pair(g);
        let dec = solenoidal_project(&f, Boundary::Dirichlet).unwrap();
        hs.push(g.hr());
        errs.push(dec.report.divergence_residual);
    }
    assert!(observed_order(&hs, &errs) >= 1.9, "{errs:?}");
}

#[test]
fn projection_rejects_boundary_support() {
    let g = grid(65, 8);
    let f = SymTensorField::from_fn(2, g, |_, _| vec![1.0, 0.0, 0.0]).unwrap();
    assert!(solenoidal_project(&f, Boundary::Dirichlet).is_err());
}

#[test]
fn pullback_examples() {
    let g = grid(33, 8);
    let metric = SymTensorField::metric(g).unwrap();
    let dyy = SymTensorField::from_fn(2, g, |_, _| vec![1.0, 0.0, 0.0]).unwrap();
    let s = [
        TangentSample {
            r: 1.0,
            theta: 0.3,
            v: [0.6, 0.8],
        },
        TangentSample {
            r: 2.2,
            theta: 0.77,
            v: [0.0, -1.0],
        },
    ];
    for x in pullback_pi_m(&metric, &s).unwrap() {
        assert!((x - 1.0).abs() < 1e-13);
    }
    assert!(pullback_pi_m(&dyy, &s[1..]).unwrap()[0].abs() < 1e-13);
    let bad = [TangentSample {
        r: 1.0,
        theta: 0.0,
        v: [1.0, 1.0],
    }];
    assert!(pullback_pi_m(&metric, &bad).is_err());
}

#[test]
fn pullback_intertwines_d_and_geodesic_flow() {
    // unit-speed semicircle x = x0 + R tanh t, y = R sech t
    let g = grid(513, 64);
    let (p, _) = test_pair(g);
    let dp = sym_derivative(&p).unwrap();
    let ip = FieldInterpolator::new(&p);
    let idp = FieldInterpolator::new(&dp);
    let mut rng_state = 12345u64;
    let mut next = || {
        rng_state = rng_state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (rng_state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..20 {
        let (x0, big_r, t) = (next(), 4.0 + 6.0 * next(), -0.8 + 1.6 * next());
        let state = |t: f64| {
            let (x, y) = (x0 + big_r * t.tanh(), big_r / t.cosh());
            (y.ln(), x.rem_euclid(1.0), [-t.tanh(), 1.0 / t.cosh()])
        };
        let along = |t: f64| {
            let (r, th, v) = state(t);
            contract(1, &ip.eval(r, th).unwrap(), v)
        };
        let dt = 2e-4;
        let flow = (8.0 * (along(t + dt) - along(t - dt))
            - (along(t + 2.0 * dt) - along(t - 2.0 * dt)))
            / (12.0 * dt);
        let (r, th, v) = state(t);
        let pulled = contract(2, &idp.eval(r, th).unwrap(), v);
        assert!(
            (flow - pulled).abs() <= 1e-3 * flow.abs().max(p.sup()),
            "{flow} vs {pulled}"
        );
    }
}

#[test]
fn interpolant_jet_matches_closed_form() {
    let g = grid(257, 32);
    let (p, _) = test_pair(g);
    let ip = FieldInterpolator::new(&p);
    for (r, t) in [(0.9, 0.13), (1.37, 0.5), (2.01, 0.871)] {
        let jet = ip.jet(r, t).unwrap();
        let b = bump(r, 1.4, 0.9);
        let db = {
            let s = (r - 1.4) / 0.9;
            b * (-2.0 * s / (1.0 - s * s).powi(2)) / 0.9
        };
        let want_dr = [db * (2.0 * PI * t).cos(), db * (0.3 + (4.0 * PI * t).sin())];
        let want_dt = [
            -2.0 * PI * b * (2.0 * PI * t).sin(),
            4.0 * PI * b * (4.0 * PI * t).cos(),
        ];
        for c in 0..2 {
            assert!(
                (jet.dr[c] - want_dr[c]).abs() < 1e-6,
                "{r}: {} vs {}",
                jet.dr[c],
                want_dr[c]
            );
            assert!((jet.dtheta[c] - want_dt[c]).abs() < 1e-6);
        }
        let d = sym_derivative_at(r.exp(), &jet);
        let y = r.exp();
        let (pp, q) = (b * (2.0 * PI * t).cos(), b * (0.3 + (4.0 * PI * t).sin()));
        let want = [
            want_dr[0],
            y * want_dt[1] - pp,
            0.5 * (want_dr[1] + y * want_dt[0] + q),
        ];
        for c in 0..3 {
            assert!((d[c] - want[c]).abs() < 1e-5);
        }
    }
}
