use henon_core::domains::{
    choose_domain_config, classify_component, in_omega, in_upsilon, DomainContext, DomainOverrides, Membership,
};
use henon_core::dynamics::apply;
use henon_core::potentials::{green_1d, green_plus, preimage_table, EscapeControl, PreimageTable};
use henon_core::{DyadicString, HenonParameter, PhasePoint};
use num_complex::Complex64;
use proptest::prelude::*;

fn context(a: f64) -> DomainContext {
    let lam = HenonParameter::real(a, -6.0).unwrap();
    DomainContext::new(lam, choose_domain_config(lam.c, &DomainOverrides::default()).unwrap()).unwrap()
}

/// Real `x > 0` with `G₊(x, y) = level`, by bisection.
fn x_at_level(ctx: &DomainContext, y: f64, level: f64) -> f64 {
    let g = |x: f64| green_plus(&ctx.lambda, &PhasePoint::real(x, y), 1e-12, &ctx.ctl()).unwrap().value;
    let (mut lo, mut hi) = (3.0, 50.0);
    assert!(g(lo) < level && g(hi) > level);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Label of `x` in band `n` by walking the orbit of `p_c`: the image lies in the
/// piece of the parent label, and the last bit picks the nearer branch of `±√(ξ − c)`.
fn orbit_label(table: &PreimageTable, x: Complex64, n: usize) -> DyadicString {
    if n == 0 {
        return DyadicString::empty();
    }
    let parent = orbit_label(table, x * x + table.c, n - 1);
    let root = (table.get(&parent).unwrap() - table.c).sqrt();
    parent.child((x + root).norm() < (x - root).norm())
}

#[test]
fn default_radius_frozen() {
    let ctl = EscapeControl::default();
    let c = Complex64::new(-6.0, 0.0);
    let g0 = green_1d(Complex64::new(0.0, 0.0), c, 1e-12, &ctl).unwrap().value;
    let cfg = choose_domain_config(c, &DomainOverrides::default()).unwrap();
    assert!((cfg.r - 1.5 * g0).abs() < 1e-15);
    assert_eq!(cfg.y_bound, 4.0);
    let cfg = choose_domain_config(c, &DomainOverrides { r: Some(0.2), ..Default::default() }).unwrap();
    assert_eq!(cfg.r, 0.2);
}

#[test]
fn preimages_sit_inside_their_bands() {
    let ctx = context(1e-4);
    let ctl = ctx.ctl();
    for (alpha, xi) in ctx.table.iter().filter(|(a, _)| a.len() <= ctx.cfg.max_depth) {
        let g = green_1d(xi, ctx.lambda.c, 1e-12, &ctl).unwrap().value;
        let n = alpha.len() as f64;
        assert!(g > ctx.cfg.r / (n + 1.0).exp2() && g < ctx.cfg.r / n.exp2(), "{alpha}");
    }
}

#[test]
fn membership_examples() {
    let ctx = context(1e-4);
    let (r, yb) = (ctx.cfg.r, ctx.cfg.y_bound);
    let y = yb / 2.0;
    let p = PhasePoint::real(x_at_level(&ctx, y, r / 2.0), y);
    assert_eq!(in_omega(&ctx.lambda, &p, &ctx.cfg), Membership::Inside);
    let q = PhasePoint::real(x_at_level(&ctx, 0.5, 2.0 * r), 0.5);
    assert_eq!(in_upsilon(&ctx.lambda, &q, &ctx.cfg), Membership::Inside);
    assert_eq!(in_omega(&ctx.lambda, &q, &ctx.cfg), Membership::Outside);
}

#[test]
fn wall_itself_is_outside_omega() {
    // a = 2⁻¹³ and y = 1.5 keep |p_c(y) − x| = |a|·y_bound exact in binary.
    let ctx = context((-13f64).exp2());
    let y = 1.5;
    let x = y * y + ctx.lambda.c.re - ctx.lambda.a.re * ctx.cfg.y_bound;
    let p = PhasePoint::real(x, y);
    assert_eq!(in_omega(&ctx.lambda, &p, &ctx.cfg), Membership::Outside);
}

#[test]
fn point_over_first_preimage_is_labelled_zero() {
    let ctx = context(1e-4);
    let p = PhasePoint::new(ctx.xi(&"0".parse().unwrap()).unwrap() + 1e-3, Complex64::new(0.0, 0.0));
    let cl = classify_component(&ctx, &p).unwrap();
    assert_eq!(cl.id.band_index, 1);
    assert_eq!(cl.id.label, "0".parse().unwrap());
}

#[test]
fn degenerate_classifier_matches_orbit_labels() {
    let ctx = context(1e-8);
    let table = preimage_table(ctx.lambda.c, ctx.cfg.max_depth, &ctx.ctl()).unwrap();
    let mut checked = 0;
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    while checked < 1000 {
        let x = Complex64::new(6.0 * next() - 3.0, 2.0 * next() - 1.0);
        let y = Complex64::new(2.0 * next() - 1.0, 2.0 * next() - 1.0);
        let Ok(cl) = classify_component(&ctx, &PhasePoint::new(x, y)) else { continue };
        if cl.is_ambiguous() || cl.id.band_index > ctx.cfg.max_depth {
            continue;
        }
        assert_eq!(cl.id.label, orbit_label(&table, x, cl.id.band_index), "x = {x}");
        checked += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn band_drops_by_one_under_the_map(xr in -3.0..3.0f64, xi in -1.0..1.0f64, yr in -2.0..2.0f64) {
        let ctx = context(1e-4);
        let p = PhasePoint::new(Complex64::new(xr, xi), Complex64::new(yr, 0.0));
        if let (Ok(a), Ok(b)) = (classify_component(&ctx, &p), classify_component(&ctx, &apply(&ctx.lambda, &p))) {
            if a.id.band_index >= 1 {
                prop_assert_eq!(b.id.band_index, a.id.band_index - 1);
            }
        }
    }
}
