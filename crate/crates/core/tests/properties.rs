//! Property tests for the structural invariants.

use proptest::prelude::*;

use driftscan::kernels::KernelId;
use driftscan::multiscale::minimal_intervals;
use driftscan::rng;

fn any_kernel() -> impl Strategy<Value = KernelId> {
    prop_oneof![
        Just(KernelId::QuarticSmooth),
        (0.05f64..=1.0).prop_map(|beta| KernelId::optimal_recovery(beta).unwrap()),
        ((0.05f64..=1.0), (2.0f64..=1e6))
            .prop_map(|(beta, t)| KernelId::truncated_recovery(beta, t).unwrap()),
    ]
}

proptest! {
    #[test]
    fn kernels_bounded_supported(kernel in any_kernel(), x in -3.0f64..3.0) {
        let v = kernel.eval(x);
        prop_assert!((0.0..=1.0).contains(&v));
        if x.abs() >= 1.0 {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn antiderivative_additive(
        kernel in prop_oneof![
            Just(KernelId::QuarticSmooth),
            (0.05f64..=1.0).prop_map(|b| KernelId::optimal_recovery(b).unwrap()),
        ],
        y in -1.0f64..1.0,
        h in 0.05f64..1.0,
        mut pts in proptest::array::uniform3(-2.0f64..2.0),
    ) {
        pts.sort_by(|u, v| u.partial_cmp(v).unwrap());
        let [a, b, c] = pts;
        let ab = kernel.antiderivative(y, h, a, b).unwrap();
        let bc = kernel.antiderivative(y, h, b, c).unwrap();
        let ac = kernel.antiderivative(y, h, a, c).unwrap();
        prop_assert!((ab + bc - ac).abs() < 1e-14);
        // antisymmetry
        let ba = kernel.antiderivative(y, h, b, a).unwrap();
        prop_assert!((ab + ba).abs() < 1e-15);
    }

    #[test]
    fn minimal_intervals_are_minimal_and_cover(
        raw in proptest::collection::vec(((-0.8f64..0.8), (0.05f64..0.5)), 1..12)
    ) {
        let detected: Vec<(f64, f64)> = raw;
        let minimal = minimal_intervals(&detected);
        let nested = |inner: &(f64, f64), outer: &(f64, f64)| {
            inner != outer
                && inner.0 - inner.1 >= outer.0 - outer.1 - 1e-12
                && inner.0 + inner.1 <= outer.0 + outer.1 + 1e-12
        };
        // no minimal interval strictly contains another detected interval
        for m in &minimal {
            for d in &detected {
                prop_assert!(!nested(d, m), "{d:?} nested in minimal {m:?}");
            }
        }
        // every detected interval contains some minimal interval
        for d in &detected {
            prop_assert!(minimal.iter().any(|m| m == d || nested(m, d)));
        }
    }

    #[test]
    fn seed_streams_deterministic(master in any::<u64>(), idx in 0u64..1000) {
        prop_assert_eq!(rng::mix(master, idx), rng::mix(master, idx));
        prop_assert_ne!(rng::mix(master, idx), rng::mix(master, idx + 1));
    }
}
