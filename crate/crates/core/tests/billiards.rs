use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use roughdisc::hollow::{hybrid_junctions, junction_design_ray};
use roughdisc::measure::{check_upsilon, estimate_eta, UpsilonTolerance};
use roughdisc::trace::{census, trace, trace_from, trace_path, Entry, Status};
use roughdisc::{
    make_amphora, make_hybrid, make_modified_amphora, make_mushroom, AmphoraParams, AngleInterval,
    HybridParams, MushroomParams, Vec2,
};

fn hybrid_params(h: f64) -> HybridParams {
    HybridParams {
        amphora: AmphoraParams::new(h),
        intervals: vec![
            AngleInterval { lo: 1.2, hi: 1.25 },
            AngleInterval { lo: 1.35, hi: 1.4 },
        ],
        mirrors: true,
    }
}

#[test]
fn raising_the_cap_never_loses_exits() {
    let m = make_modified_amphora(AmphoraParams::new(0.05)).unwrap();
    let exited: Vec<u64> = [16, 64, 256]
        .iter()
        .map(|&cap| {
            census(&m, 20_000, 3, cap, |_| true)
                .statuses
                .get("Exited")
                .copied()
                .unwrap_or(0)
        })
        .collect();
    assert!(exited.windows(2).all(|w| w[1] >= w[0]), "{exited:?}");
}

#[test]
fn design_rays_land_near_the_center() {
    let h = 0.05;
    let p = hybrid_params(h);
    let hollow = make_hybrid(p.clone()).unwrap();
    let tol = h.powf(17.0 / 16.0);
    for j in hybrid_junctions(&p).unwrap() {
        for side in [1.0, -1.0] {
            let (g, d) = junction_design_ray(&hollow, &j, side);
            let (out, _) = trace_from(&hollow, g, d, 16);
            let x = out.exit.expect("design ray exits");
            assert!(
                (x.xi - 0.5).abs() * hollow.opening.width() <= tol,
                "junction at {:?}: exit {x:?}",
                j.point
            );
        }
    }
}

#[test]
fn steep_central_entries_return_after_two_impacts() {
    for h in [0.1, 0.03] {
        let a = make_amphora(AmphoraParams::new(h)).unwrap();
        for phi in [-1.2f64, -0.7, -0.2, 0.05, 0.4, 1.1] {
            if 1.0 / phi.tan().abs() <= 2.0 * h {
                continue;
            }
            let out = trace(&a, Entry { phi, xi: 0.5 }, 64).unwrap();
            assert_eq!(
                (out.status, out.impacts),
                (Status::Exited, 2),
                "h {h} phi {phi}"
            );
            assert!((out.exit.unwrap().xi - 0.5).abs() < 1e-9);
        }
    }
}

#[test]
fn sampled_laws_pass_membership_checks() {
    for h in [0.1, 0.05] {
        for hollow in [
            make_mushroom(MushroomParams::new(h)).unwrap(),
            make_amphora(AmphoraParams::new(h)).unwrap(),
        ] {
            let m = estimate_eta(&hollow, 40_000, 1024, 11, 24).unwrap();
            let r = check_upsilon(&m.binned(), UpsilonTolerance::Binomial { sigmas: 3.0 });
            assert!(r.pass, "{} h {h}: {r:?}", hollow.label);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn speed_is_conserved(phi in -1.5f64..1.5, xi in 0.001f64..0.999, h in 0.02f64..0.15) {
        let m = make_mushroom(MushroomParams::new(h)).unwrap();
        let (_, path) = trace_path(&m, Entry { phi, xi }, 256).unwrap();
        for p in path {
            prop_assert!((p.velocity.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn short_amphora_traces_reverse(phi in -1.5f64..1.5, xi in 0.001f64..0.999) {
        let a = make_amphora(AmphoraParams::new(0.05)).unwrap();
        let out = trace(&a, Entry { phi, xi }, 30).unwrap();
        if let (Status::Exited, Some(x)) = (out.status, out.exit) {
            let back = trace(&a, Entry { phi: x.phi, xi: x.xi }, 30).unwrap();
            let y = back.exit.unwrap();
            prop_assert!((y.phi - phi).abs() < 1e-6 && (y.xi - xi).abs() < 1e-6, "{:?} -> {:?}", x, y);
            prop_assert!(x.phi.abs() < FRAC_PI_2);
        }
    }

    #[test]
    fn interior_starts_stay_unit_speed(ox in -0.2f64..0.2, oy in 0.05f64..0.3, a in -3.0f64..3.0) {
        let m = make_mushroom(MushroomParams::new(0.05)).unwrap();
        let (_, path) = trace_from(&m, Vec2::new(ox, oy), Vec2::from_angle(a), 64);
        prop_assert!(path.iter().all(|p| (p.velocity.norm() - 1.0).abs() < 1e-12));
    }
}
