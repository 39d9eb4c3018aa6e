//! Property tests over seeded random inputs.

use proptest::prelude::*;

use spectra::family::{build_crossing_lines, build_random_holder, default_line_offsets, pullback, random_unitary, uniform_grid, Mixer};
use spectra::hermitian::{eig_ordered, op_norm, weyl_check, HermitianMatrix};
use spectra::projector::{contour_projector_adaptive, default_contour, enclosed_count, project_block};
use spectra::regularity::{holder_constant, matrix_holder_constant, transfer_bound, PairPolicy};
use spectra::rng::SplitMix64;
use spectra::tracking::{continuous_selection, ordered_branches, sample_grid, Strategy};
use spectra::{Branch, SmoothCurve};

fn random(seed: u64, n: usize) -> HermitianMatrix {
    HermitianMatrix::random(&mut SplitMix64::new(seed), n).unwrap()
}

fn is_hermitian_exactly(a: &HermitianMatrix) -> bool {
    let n = a.dim();
    (0..n).all(|i| (0..n).all(|j| a.get(i, j) == a.get(j, i).conj()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eig_is_ascending_and_reconstructs(seed: u64, n in 1usize..=12, scale in 1e-3f64..1e3) {
        let a = random(seed, n).scale(scale);
        let e = eig_ordered(&a);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(e.reconstruction_error(&a) <= 1e-10 * (1.0 + op_norm(&a)));
        prop_assert!(e.orthonormality_error() <= 1e-12);
    }

    #[test]
    fn weyl_holds(seed: u64, n in 1usize..=8, eps in 1e-6f64..10.0) {
        let mut rng = SplitMix64::new(seed);
        let a = HermitianMatrix::random(&mut rng, n).unwrap();
        let b = a.add(&HermitianMatrix::random(&mut rng, n).unwrap().scale(eps)).unwrap();
        let r = weyl_check(&a, &b).unwrap();
        prop_assert!(r.holds, "gap {} bound {}", r.gap, r.bound);
    }

    #[test]
    fn op_norm_symmetric_and_homogeneous(seed: u64, n in 1usize..=8, c in -5.0f64..5.0) {
        let mut rng = SplitMix64::new(seed);
        let a = HermitianMatrix::random(&mut rng, n).unwrap();
        let b = HermitianMatrix::random(&mut rng, n).unwrap();
        let ab = op_norm(&a.sub(&b).unwrap());
        let ba = op_norm(&b.sub(&a).unwrap());
        prop_assert!((ab - ba).abs() <= 1e-10 * (1.0 + ab));
        let na = op_norm(&a);
        prop_assert!((op_norm(&a.scale(c)) - c.abs() * na).abs() <= 1e-10 * (1.0 + c.abs() * na));
    }

    #[test]
    fn eig_is_bitwise_deterministic(seed: u64, n in 1usize..=10) {
        let a = random(seed, n);
        let first = eig_ordered(&a);
        let again = eig_ordered(&random(seed, n));
        prop_assert_eq!(first.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                        again.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(first.vectors, again.vectors);
    }

    #[test]
    fn random_holder_is_hermitian_and_holder(seed: u64, n in 2usize..=5, terms in 1usize..=4, alpha in 0.1f64..=1.0,
                                             s in -1.0f64..=1.0, t in -1.0f64..=1.0) {
        let f = build_random_holder(seed, alpha, n, terms).unwrap();
        let (a, b) = (f.eval_at(s).unwrap(), f.eval_at(t).unwrap());
        prop_assert!(is_hermitian_exactly(&a) && is_hermitian_exactly(&b));
        prop_assume!(s != t);
        let q = op_norm(&a.sub(&b).unwrap()) / (s - t).abs().powf(alpha);
        prop_assert!(q <= f.holder_bound().unwrap() + 1e-9, "quotient {q}");
    }

    #[test]
    fn pullback_is_exact_composition(seed: u64, t in -1.0f64..=1.0, w in 0.1f64..3.0) {
        let f = build_random_holder(seed, 0.5, 3, 2).unwrap();
        let curve = SmoothCurve::new(1, (-1.0, 1.0), move |t| vec![(w * t).sin() * 0.9]);
        let g = pullback(&f, &curve).unwrap();
        prop_assert_eq!(g.eval_at(t).unwrap(), f.eval_at((w * t).sin() * 0.9).unwrap());
    }

    #[test]
    fn crossing_lines_spectrum_is_sorted_lines(seed: u64, slopes in prop::collection::vec(-3.0f64..3.0, 2..=6), t in -1.0f64..=1.0) {
        let f = build_crossing_lines(&slopes, Mixer::Seeded(seed)).unwrap();
        let a = f.eval_at(t).unwrap();
        prop_assert!(is_hermitian_exactly(&a));
        let offsets = default_line_offsets(&slopes);
        let mut lines: Vec<f64> = slopes.iter().zip(&offsets).map(|(s, o)| s * t + o).collect();
        lines.sort_by(f64::total_cmp);
        for (mu, l) in eig_ordered(&a).values.iter().zip(&lines) {
            prop_assert!((mu - l).abs() <= 1e-10, "{mu} vs {l}");
        }
    }

    #[test]
    fn projector_identities(seed: u64, n in 2usize..=7, lo in 0usize..7, len in 1usize..=7) {
        let mut rng = SplitMix64::new(seed);
        let mut values: Vec<f64> = (0..n).map(|_| rng.uniform(-3.0, 3.0)).collect();
        values.sort_by(f64::total_cmp);
        let start = lo % n;
        let end = (start + len).min(n);
        let w = random_unitary(&mut rng, n);
        let a = HermitianMatrix::from_diagonal(&values).unwrap().conjugate_by(&w).unwrap();
        // spectrum computed from the matrix, as a caller would
        let mu = eig_ordered(&a).values;
        let gaps_ok = mu.windows(2).all(|p| p[1] - p[0] > 1e-3);
        prop_assume!(gaps_ok);
        let gamma = default_contour(&mu, start..end).unwrap();
        // the trapezoid error decays like exp(-M·d/r); 2048 nodes resolve d/r ≥ 0.02
        let clearance = mu.iter().map(|&m| gamma.distance(m)).fold(f64::INFINITY, f64::min);
        prop_assume!(clearance >= 0.02 * gamma.radius);
        let p = contour_projector_adaptive(&a, &gamma).unwrap();
        prop_assert!(p.idempotency_defect() <= 1e-10);
        prop_assert!(p.hermiticity_defect() <= 1e-10);
        let tr = p.trace();
        prop_assert!((tr.re - tr.re.round()).abs() <= 1e-6 && tr.im.abs() <= 1e-6);
        prop_assert_eq!(p.rank, end - start);
        prop_assert_eq!(enclosed_count(&a, &gamma).unwrap(), end - start);
        let block = project_block(&a, &p).unwrap().eigenvalues();
        for (b, m) in block.iter().zip(&mu[start..end]) {
            prop_assert!((b - m).abs() <= 1e-8, "{b} vs {m}");
        }
    }

    #[test]
    fn selection_follows_lines(seed: u64, raw in prop::collection::vec(-3.0f64..3.0, 2..=5), start in 0usize..5) {
        // slopes at least 0.2 apart so crossings stay resolvable on the grid
        let mut slopes = raw.clone();
        slopes.sort_by(f64::total_cmp);
        prop_assume!(slopes.windows(2).all(|w| w[1] - w[0] >= 0.2));
        let n = slopes.len();
        let f = build_crossing_lines(&slopes, Mixer::Seeded(seed)).unwrap();
        let grid = uniform_grid(-1.0, 1.0, 401).unwrap();
        let samples = sample_grid(&f, &grid).unwrap();
        let sel = continuous_selection(&samples, start % n, Strategy::Secant, 1e-6 * 4.0).unwrap();
        for (j, s) in samples.iter().enumerate() {
            prop_assert_eq!(sel.values[j], s.values[sel.indices[j]]);
        }
        prop_assert!(sel.switch_points.len() < n);
        let ordered = ordered_branches(&samples).unwrap();
        let r = transfer_bound(&ordered, &sel, 1.0, PairPolicy::All).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }

    #[test]
    fn ordered_constant_below_matrix_constant(seed: u64, n in 2usize..=4, alpha in 0.2f64..=1.0) {
        let f = build_random_holder(seed, alpha, n, 3).unwrap();
        let grid = uniform_grid(-1.0, 1.0, 33).unwrap();
        let ordered = ordered_branches(&sample_grid(&f, &grid).unwrap()).unwrap();
        let m = matrix_holder_constant(&f, &grid, alpha, PairPolicy::All).unwrap();
        for b in &ordered {
            prop_assert!(holder_constant(b, alpha, PairPolicy::All).unwrap().constant <= m.constant + 1e-9);
        }
    }

    #[test]
    fn more_pairs_never_lower_the_constant(values in prop::collection::vec(-10.0f64..10.0, 3..80), alpha in 0.05f64..=1.0) {
        let grid = uniform_grid(0.0, 1.0, values.len()).unwrap();
        let b = Branch::from_samples(grid, values).unwrap();
        let dyadic = holder_constant(&b, alpha, PairPolicy::Dyadic).unwrap();
        let all = holder_constant(&b, alpha, PairPolicy::All).unwrap();
        prop_assert!(all.constant >= dyadic.constant);
    }
}
