use proptest::prelude::*;

use super::*;

fn field(grid: RGrid, f: impl Fn(f64) -> f64) -> ModeZeroField {
    ModeZeroField::from_fn(grid, 0.0, 1, |r| vec![C64::new(f(r), 0.0)]).unwrap()
}

fn windowed(f: impl Fn(f64) -> f64) -> ModeZeroField {
    let g = RGrid::default();
    field(g, |r| g.window(r) * f(r))
}

#[test]
fn profiles_are_admissible() {
    for p in [Profile::Quintic, Profile::Smooth] {
        assert_eq!(p.psi(0.3), 1.0);
        assert_eq!(p.psi(-1.0), 1.0);
        assert_eq!(p.psi(2.0), 0.0);
        assert!((p.psi(1.5) - 0.5).abs() < 1e-15);
        let mut last = 1.0;
        for k in 0..=200 {
            let v = p.psi(1.0 + k as f64 / 200.0);
            assert!(v <= last);
            last = v;
        }
    }
}

#[test]
fn partition_of_unity_on_frequency_grid() {
    let g = RGrid::default();
    let top = max_block(&g);
    for p in [Profile::Quintic, Profile::Smooth] {
        for xi in angular_frequencies(g.points, g.step()) {
            let s: f64 = (0..=top)
                .map(|j| DyadicMultiplier::new(j, p).eval(xi))
                .sum();
            assert!((s - 1.0).abs() <= 1e-12, "ξ = {xi}: {s}");
        }
    }
}

#[test]
fn block_supports() {
    for j in 0..8 {
        let m = DyadicMultiplier::new(j, Profile::Quintic);
        for k in 0..4000 {
            let xi = k as f64 * 0.25;
            let b = bracket(xi);
            let v = m.eval(xi);
            assert!(v >= -1e-15);
            let lo = if j == 0 { 0.0 } else { 2f64.powi(j as i32 - 1) };
            if b < lo || b > 2f64.powi(j as i32 + 1) {
                assert_eq!(v, 0.0, "j = {j}, ξ = {xi}");
            }
        }
    }
}

#[test]
fn blocks_telescope() {
    let u = windowed(|r| (3.0 * r).sin() + (0.2 * r * r).cos() + (-r * r).exp());
    let blocks = lp_blocks(&u, Profile::Quintic).unwrap();
    let mut sum = ModeZeroField::zeros(*u.grid(), 0.0, 1).unwrap();
    for b in &blocks {
        sum = sum
            .sub(
                &ModeZeroField::zeros(*u.grid(), 0.0, 1)
                    .unwrap()
                    .sub(b)
                    .unwrap(),
            )
            .unwrap();
    }
    assert!(sum.sub(&u).unwrap().max_norm() <= 1e-10 * u.max_norm());
}

#[test]
fn narrow_spectrum_lives_in_one_block() {
    // ⟨ω⟩ = 2^6 sits where φ_6 = 1 and every other φ_j vanishes
    let g = RGrid::new(-50.0, 50.0, 16384).unwrap();
    let j = 6;
    let w = (4f64.powi(j) - 1.0).sqrt();
    let u = field(g, |r| g.window(r) * (w * r).cos());
    let blocks = lp_blocks(&u, Profile::Quintic).unwrap();
    for (k, b) in blocks.iter().enumerate() {
        let err = if k == j as usize {
            b.sub(&u).unwrap().max_norm()
        } else {
            b.max_norm()
        };
        assert!(err <= 1e-4, "block {k}: {err}");
    }
}

#[test]
fn constant_concentrates_in_block_zero() {
    let u = windowed(|_| 1.0);
    let n = block_norms(&u, Profile::Quintic).unwrap();
    assert!(n[0] > 3.0 * n[1..].iter().copied().fold(0.0, f64::max));
    // the window is C^∞, so block norms beat every power of 2^{-j}
    let fast = decay_exponent(&n, 3..=7, 1e-14).unwrap();
    assert!(fast >= 4.0, "decay exponent {fast}");
    assert!(n[3..].iter().all(|&b| b < 1e-2));
}

#[test]
fn beyond_nyquist_is_a_resolution_error() {
    let u = windowed(|r| r.sin());
    let top = max_block(u.grid());
    assert!(lp_block(&u, top).is_ok());
    assert!(matches!(lp_block(&u, top + 1), Err(Error::Resolution(_))));
    let unwindowed = field(RGrid::default(), |_| 1.0);
    assert!(lp_block(&unwindowed, 0).is_err());
}

#[test]
fn zygmund_basics() {
    let zero = windowed(|_| 0.0);
    assert_eq!(zygmund_norm(&zero, 0.5).unwrap(), 0.0);
    let u = windowed(|r| (2.0 * r).cos() * (-0.1 * r * r).exp());
    let z = zygmund_norm(&u, 0.5).unwrap();
    let scaled = ModeZeroField::from_fn(*u.grid(), 0.0, 1, |r| {
        let j = ((r - u.grid().r_min) / u.grid().step()).round() as usize;
        vec![u.weighted(j)[0] * -3.5]
    })
    .unwrap();
    assert!((zygmund_norm(&scaled, 0.5).unwrap() - 3.5 * z).abs() <= 1e-12 * z);
}

#[test]
fn half_power_cusp_block_decay() {
    // |r|^s has Fourier transform ∝ |ξ|^{-1-s}, so ‖Op(φ_j)u‖_∞ ∝ 2^{-js}
    for s in [0.3, 0.5, 0.7] {
        let u = windowed(|r| r.abs().powf(s));
        let n = block_norms(&u, Profile::Quintic).unwrap();
        let fit = decay_exponent(&n, 3..=6, 0.0).unwrap();
        assert!((fit - s).abs() < 0.1, "s = {s}: fitted {fit}");
    }
    let u = windowed(|r| r.abs().sqrt());
    let n = block_norms(&u, Profile::Quintic).unwrap();
    let weighted =
        |s: f64| -> Vec<f64> { (3..=6).map(|j| 2f64.powf(j as f64 * s) * n[j]).collect() };
    let at = weighted(0.5);
    assert!(
        at.iter().fold(0.0, |a: f64, b| a.max(*b))
            < 2.0 * at.iter().fold(f64::INFINITY, |a: f64, b| a.min(*b))
    );
    let above = weighted(1.0);
    assert!(above.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn holder_examples() {
    let g = RGrid::new(-12.0, 12.0, 4097).unwrap();
    let c = field(g, |_| 2.0);
    assert_eq!(holder_norm(&c, 0.5).unwrap(), 2.0);
    // a node sits at r = 0; |a^s − b^s| ≤ |a − b|^s with equality at b = 0
    for s in [0.25, 0.5, 0.75] {
        let u = field(g, |r| smooth_step((4.0 - r.abs()) / 3.0) * r.abs().powf(s));
        let semi = holder_seminorm(&u, s, 0.02).unwrap();
        assert!((semi - 1.0).abs() < 1e-12, "s = {s}: {semi}");
    }
    let lip = field(g, |r| g.window(r) * (1.0 - (r / 3.0).abs()).max(0.0));
    for s in [0.1, 0.5, 0.9] {
        let h = holder_norm(&lip, s).unwrap();
        assert!(h.is_finite() && h < 2.0);
    }
    assert!(holder_norm(&c, 1.0).is_err());
    assert!(holder_norm(&c, 0.0).is_err());
}

#[test]
fn equivalence_single_constant() {
    let rep = norm_equivalence_report(&[windowed(|_| 1.0)], 0.5).unwrap();
    assert!(rep.constant.is_finite() && rep.min_ratio > 0.0);
    assert!(norm_equivalence_report(&[], 0.5).is_err());
}

#[test]
fn equivalence_interval_is_stable_under_doubling() {
    let fam = band_limited_family(RGrid::default(), 100, 32, 40.0, 7).unwrap();
    let half = norm_equivalence_report(&fam[..50], 0.5).unwrap();
    let full = norm_equivalence_report(&fam, 0.5).unwrap();
    assert!(half.min_ratio > 0.0 && half.max_ratio.is_finite());
    assert!((full.min_ratio / half.min_ratio - 1.0).abs() <= 0.1);
    assert!((full.max_ratio / half.max_ratio - 1.0).abs() <= 0.1);
}

#[test]
fn cutoff_independence() {
    let fam = band_limited_family(RGrid::default(), 20, 32, 40.0, 11).unwrap();
    for u in &fam {
        let a = zygmund_norm_with(u, 0.5, Profile::Quintic).unwrap();
        let b = zygmund_norm_with(u, 0.5, Profile::Smooth).unwrap();
        // neighbouring blocks of one profile cover each block of the other
        assert!(
            a / b < 3.0 * 2f64.sqrt() && b / a < 3.0 * 2f64.sqrt(),
            "{a} vs {b}"
        );
    }
}

#[test]
fn separated_blocks_do_not_interact() {
    for u in band_limited_family(RGrid::default(), 3, 32, 200.0, 3).unwrap() {
        let rep = interaction_report(&u, Profile::Quintic).unwrap();
        assert!(!rep.pairs.is_empty());
        if let Some(n) = rep.exponent {
            assert!(n >= 4.0, "fitted exponent {n}");
        }
    }
}

#[test]
fn report_and_csv() {
    let u = windowed(|r| (-(r * r)).exp());
    let rep = lp_report(&u, 0.5, Profile::Quintic).unwrap();
    assert_eq!(rep.block_norms.len(), max_block(u.grid()) + 1);
    let json = serde_json::to_string(&rep).unwrap();
    assert!(json.contains("block_norms"));
    let blocks = lp_blocks(&u, Profile::Quintic).unwrap();
    let mut buf = Vec::new();
    write_blocks_csv(&blocks[..2], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("r,b0_re0,b0_im0,b1_re0,b1_im0"));
    assert_eq!(text.lines().count(), u.len() + 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn partition_holds_everywhere(xi in -1e4f64..1e4) {
        let top = (bracket(xi).log2().ceil() as usize).max(1);
        for p in [Profile::Quintic, Profile::Smooth] {
            let s: f64 = (0..=top).map(|j| DyadicMultiplier::new(j, p).eval(xi)).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn zygmund_is_monotone_in_s(seed in 0u64..1000, s in 0.0f64..2.0, ds in 0.0f64..1.0) {
        let g = RGrid::new(-8.0, 8.0, 512).unwrap();
        let u = &band_limited_family(g, 1, 4, 20.0, seed).unwrap()[0];
        prop_assert!(zygmund_norm(u, s).unwrap() <= zygmund_norm(u, s + ds).unwrap());
    }

    #[test]
    fn zygmund_is_homogeneous(seed in 0u64..1000, c in -5.0f64..5.0) {
        let g = RGrid::new(-8.0, 8.0, 512).unwrap();
        let u = &band_limited_family(g, 1, 4, 20.0, seed).unwrap()[0];
        let cu = ModeZeroField::new(g, 0.0, u.weighted_samples().iter().map(|v| vec![v[0] * c]).collect()).unwrap();
        let (a, b) = (zygmund_norm(&cu, 0.5).unwrap(), c.abs() * zygmund_norm(u, 0.5).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }
}
