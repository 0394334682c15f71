use moment_space::coords::{Interval, Space, Transformer};
use moment_space::potential::PotentialSpec;
use moment_space::sampling::*;
use proptest::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF, Gamma, Normal};

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Coordinate laws with a textbook form: Beta for the compact case with
/// `V ≡ 0`, Gamma for `V(t) = t` on the half-line and for β, normal for α.
fn known_law(space: Space, n: usize, j: usize) -> Box<dyn Fn(f64) -> f64> {
    let nf = n as f64;
    match space {
        Space::Compact(_) => {
            let s = (n - j) as f64 + 1.0;
            let b = Beta::new(s, s).unwrap();
            Box::new(move |x| b.cdf(x))
        }
        Space::HalfLine => {
            let g = Gamma::new((n - j) as f64 + 1.0, nf).unwrap();
            Box::new(move |x| g.cdf(x))
        }
        Space::RealLine if j % 2 == 1 => {
            let g = Normal::new(0.0, (0.5 / nf).sqrt()).unwrap();
            Box::new(move |x| g.cdf(x))
        }
        Space::RealLine => {
            let g = Gamma::new((2 * n - 1 - j) as f64 + 1.0, nf).unwrap();
            Box::new(move |x| g.cdf(x))
        }
    }
}

fn canonical_case(space: Space, n: usize) -> MomentDistribution {
    let (v1, v2) = match space {
        Space::Compact(_) => (PotentialSpec::zero(), PotentialSpec::zero()),
        Space::HalfLine => {
            let v = PotentialSpec::polynomial(vec![0.0, 1.0]);
            (v.clone(), v)
        }
        Space::RealLine => (
            PotentialSpec::polynomial(vec![0.0, 0.0, 1.0]),
            PotentialSpec::polynomial(vec![0.0, 1.0]),
        ),
    };
    MomentDistribution::new(space, n, v1, v2).unwrap()
}

fn any_space() -> impl Strategy<Value = Space> {
    prop_oneof![
        Just(Space::Compact(Interval::UNIT)),
        Just(Space::HalfLine),
        Just(Space::RealLine)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tabulated_cdf_matches_closed_form(space in any_space(), n in 2usize..400, jf in 0.0f64..1.0) {
        let dist = canonical_case(space, n);
        let j = 1 + ((dist.order() - 1) as f64 * jf) as usize;
        let tab = dist.coordinate_density(j).unwrap().tabulate().unwrap();
        let exact = known_law(space, n, j);
        let (lo, hi) = tab.support();
        for i in 0..=200 {
            let t = lo + (hi - lo) * i as f64 / 200.0;
            prop_assert!((tab.cdf(t) - exact(t)).abs() < 1e-7, "j={j} t={t}: {} vs {}", tab.cdf(t), exact(t));
        }
    }

    #[test]
    fn leading_draws_are_prefixes_of_full_draws(space in any_space(), n in 2usize..8, seed in any::<u64>()) {
        let dist = canonical_case(space, n);
        let tr = Transformer::default();
        let full = sample_moment_vector(&dist, seed, 50, &tr).unwrap();
        let lead = sample_leading(&dist, 2, seed, 50, &tr).unwrap();
        for (f, l) in full.canonical.iter().zip(&lead.canonical) {
            prop_assert_eq!(&f.values[..2], &l.values[..]);
        }
        for (f, l) in full.vectors.iter().zip(&lead.vectors) {
            prop_assert_eq!(&f.values[..2], &l.values[..]);
        }
    }
}

#[test]
fn samples_pass_ks_against_closed_form() {
    // fixed seeds keep this deterministic; 1.63/√N is the 1% critical value
    let count = 100_000;
    let crit = 1.63 / (count as f64).sqrt();
    let mut seed = 11;
    for space in [Space::Compact(Interval::UNIT), Space::HalfLine, Space::RealLine] {
        for n in [2, 10, 200] {
            let dist = canonical_case(space, n);
            for j in [1, 2, dist.order()] {
                seed += 1;
                let xs = sample_coordinate(&dist.coordinate_density(j).unwrap(), seed, count).unwrap();
                let ks = ks_statistic(xs, known_law(space, n, j));
                assert!(ks < crit, "{space:?} n={n} j={j}: KS={ks}");
            }
        }
    }
}

#[test]
fn batches_do_not_depend_on_thread_count() {
    let dist = canonical_case(Space::HalfLine, 40);
    let tr = Transformer::default();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_leading(&dist, 3, 99, 5000, &tr).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn shorter_batches_are_prefixes() {
    let dist = canonical_case(Space::Compact(Interval::UNIT), 30);
    let tr = Transformer::default();
    let long = sample_leading(&dist, 3, 5, 3000, &tr).unwrap();
    let short = sample_leading(&dist, 3, 5, 1500, &tr).unwrap();
    assert_eq!(&long.vectors[..1500], &short.vectors[..]);
}
