//! Randomized property tests for the structural invariants the physics
//! rests on: lattice bipartiteness, canonical anticommutation bookkeeping,
//! Kronecker/CSR algebra, truncated-oscillator commutators, Hamiltonian
//! Hermiticity, configuration-graph path validity, and convexity of the
//! fiberwise-PSD cone.

use ndarray::Array2;
use proptest::prelude::*;

use pamlab::fock::{apply_mode_op, SpinfulBasis};
use pamlab::graph::{connect, enumerate_configs, simplify_path, validate_path};
use pamlab::ham::{build_deformed, build_model, Model, ModelParams};
use pamlab::lattice::{build_lattice, validate_assumptions, LatticeKind};
use pamlab::linalg::{max_abs_dense, znorm, CsrMatrix, C64};
use pamlab::phonon::{PhononSpace, PositionFrame};
use pamlab::positivity::{cone_membership, sample_cone_element};

fn kind_strategy() -> impl Strategy<Value = LatticeKind> {
    prop_oneof![
        (1usize..=6).prop_map(|n| LatticeKind::Chain { n }),
        prop_oneof![Just(4usize), Just(6), Just(8)].prop_map(|n| LatticeKind::Ring { n }),
    ]
}

fn small_dense(n: usize) -> impl Strategy<Value = Array2<C64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        Array2::from_shape_fn((n, n), |(i, j)| {
            let (re, im) = v[i * n + j];
            C64::new(re, im)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The hopping matrix is symmetric, every bond crosses the
    /// bipartition, and the standing assumptions validate.
    #[test]
    fn lattice_is_bipartite_with_symmetric_hopping(
        kind in kind_strategy(),
        t in 0.2f64..2.0,
    ) {
        let lat = build_lattice(&kind, t).unwrap();
        let n = lat.n_sites();
        for x in 0..n {
            for y in 0..n {
                prop_assert!((lat.t(x, y) - lat.t(y, x)).abs() < 1e-14);
            }
        }
        for (x, y) in lat.hopping_pairs() {
            prop_assert!(lat.sublattice(x) != lat.sublattice(y));
            prop_assert!((lat.sublattice_sign(x) * lat.sublattice_sign(y) + 1.0).abs() < 1e-14);
        }
        prop_assert!(validate_assumptions(&lat).all_hold());
    }

    /// Canonical anticommutation bookkeeping of the mask-level mode maps:
    /// `a a* + a* a = 1` on every basis state, double creation and double
    /// annihilation vanish, and distinct modes anticommute.
    #[test]
    fn mode_operators_satisfy_car(state in 0u64..256, m in 0usize..8, m2 in 0usize..8) {
        let occupied = (state >> m) & 1 == 1;
        if occupied {
            prop_assert!(apply_mode_op(state, m, true).is_none());
            let (s1, sg1) = apply_mode_op(state, m, false).unwrap();
            prop_assert!(apply_mode_op(s1, m, false).is_none());
            let (s2, sg2) = apply_mode_op(s1, m, true).unwrap();
            prop_assert_eq!(s2, state);
            prop_assert_eq!(sg1 * sg2, 1);
        } else {
            prop_assert!(apply_mode_op(state, m, false).is_none());
            let (s1, sg1) = apply_mode_op(state, m, true).unwrap();
            let (s2, sg2) = apply_mode_op(s1, m, false).unwrap();
            prop_assert_eq!(s2, state);
            prop_assert_eq!(sg1 * sg2, 1);
        }
        if m != m2 && (state >> m) & 1 == 1 && (state >> m2) & 1 == 1 {
            let (sa, ga) = apply_mode_op(state, m, false).unwrap();
            let (sab, gab) = apply_mode_op(sa, m2, false).unwrap();
            let (sb, gb) = apply_mode_op(state, m2, false).unwrap();
            let (sba, gba) = apply_mode_op(sb, m, false).unwrap();
            prop_assert_eq!(sab, sba);
            prop_assert_eq!(ga * gab, -(gb * gba));
        }
    }

    /// Mixed-product identity `(A (x) B)(C (x) D) = (AC) (x) (BD)` and
    /// adjoint anti-homomorphism on the sparse type.
    #[test]
    fn csr_kron_mixed_product(
        a in small_dense(2), b in small_dense(3),
        c in small_dense(2), d in small_dense(3),
    ) {
        let (sa, sb) = (CsrMatrix::from_dense(&a, 0.0), CsrMatrix::from_dense(&b, 0.0));
        let (sc, sd) = (CsrMatrix::from_dense(&c, 0.0), CsrMatrix::from_dense(&d, 0.0));
        let lhs = sa.kron(&sb).matmul(&sc.kron(&sd)).to_dense();
        let rhs = sa.matmul(&sc).kron(&sb.matmul(&sd)).to_dense();
        prop_assert!(max_abs_dense(&(&lhs - &rhs)) < 1e-12);
        let adj_lhs = sa.matmul(&sc).adjoint().to_dense();
        let adj_rhs = sc.adjoint().matmul(&sa.adjoint()).to_dense();
        prop_assert!(max_abs_dense(&(&adj_lhs - &adj_rhs)) < 1e-12);
    }

    /// The parallel and serial mat-vec kernels agree bitwise-tolerantly.
    #[test]
    fn matvec_parallel_matches_serial(
        a in small_dense(5),
        v in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5),
    ) {
        let m = CsrMatrix::from_dense(&a, 0.0);
        let x: Vec<C64> = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        let ys = m.matvec_serial(&x);
        let yp = m.matvec_parallel(&x);
        for (s, p) in ys.iter().zip(&yp) {
            prop_assert!((s - p).norm() < 1e-12);
        }
    }

    /// Truncated oscillator algebra: `N_p = b* b` exactly, and
    /// `[q, p] = i` away from the top occupancy level.
    #[test]
    fn phonon_commutators(n_max in 2usize..6) {
        let ph = PhononSpace::new(1, n_max).unwrap();
        let num = ph.b_dag(0).matmul(&ph.b(0)).to_dense();
        prop_assert!(max_abs_dense(&(&num - &ph.number_op().to_dense())) < 1e-13);
        let q = ph.q(0).to_dense();
        let p = ph.p(0).to_dense();
        let comm = q.dot(&p) - p.dot(&q);
        let eye = Array2::<C64>::eye(ph.dim()).mapv(|z| z * C64::new(0.0, 1.0));
        let diff = &comm - &eye;
        for i in 0..ph.dim() {
            for j in 0..ph.dim() {
                if ph.total_occupation(i) < n_max && ph.total_occupation(j) < n_max {
                    prop_assert!(diff[(i, j)].norm() < 1e-13);
                }
            }
        }
    }

    /// Every assembled Hamiltonian (coupled or bare, deformed or not) is
    /// Hermitian for arbitrary admissible couplings.
    #[test]
    fn hamiltonians_are_hermitian(
        u_f in 0.0f64..3.0,
        u_d in 0.0f64..2.0,
        v in 0.3f64..1.5,
        g in 0.0f64..0.6,
        omega0 in 0.5f64..2.0,
        model_pick in 0usize..3,
        symmetric in any::<bool>(),
    ) {
        let model = [Model::Pam, Model::DCoupled, Model::FCoupled][model_pick];
        let mut params = ModelParams {
            epsilon_f: -0.7,
            u_f,
            u_d,
            v,
            g,
            omega0,
            model,
        };
        if symmetric {
            params = params.with_symmetric_epsilon_f();
        }
        let lat = build_lattice(&LatticeKind::Chain { n: 2 }, 1.0).unwrap();
        let basis = SpinfulBasis::half_filled(2).unwrap();
        let ph = PhononSpace::new(2, 2).unwrap();
        let phonons = if model == Model::Pam { None } else { Some(&ph) };
        let h = build_model(&lat, &params, &basis, phonons).unwrap();
        prop_assert!(h.hermiticity_residual() < 1e-12 * h.max_abs().max(1.0));
        // The deformation is only defined at the symmetric level.
        if model != Model::Pam && symmetric {
            let set = build_deformed(&lat, &params, &basis, &ph).unwrap();
            for (m, what) in [(&set.h, "H"), (&set.h0, "H0")] {
                prop_assert!(
                    m.hermiticity_residual() < 1e-12 * m.max_abs().max(1.0),
                    "non-Hermitian {}", what
                );
            }
        }
    }

    /// Any two electron configurations are joined by a path of valid
    /// edges, and the simplification path has exactly `m + 1` entries.
    #[test]
    fn config_graph_paths_are_valid(n in 1usize..=3, ia in 0usize..20, ib in 0usize..20) {
        let lat = build_lattice(&LatticeKind::Chain { n }, 1.0).unwrap();
        let configs = enumerate_configs(n);
        let a = configs[ia % configs.len()];
        let b = configs[ib % configs.len()];
        let path = connect(&a, &b, &lat).unwrap();
        prop_assert_eq!(*path.first(), a);
        prop_assert_eq!(*path.last(), b);
        prop_assert!(validate_path(&path, &lat).unwrap().valid);
        let sp = simplify_path(&a, n).unwrap();
        let m = (a.xd & !a.xf).count_ones() as usize;
        prop_assert_eq!(sp.len(), m + 1);
    }

    /// Seeded cone samples are cone members, and the cone is convex:
    /// normalized convex combinations of members remain members.
    #[test]
    fn cone_samples_and_convexity(
        seed in 0u64..1000,
        rank in 1usize..4,
        lambda in 0.05f64..0.95,
        n_max in 2usize..5,
    ) {
        let basis = SpinfulBasis::half_filled(1).unwrap();
        let ph = PhononSpace::new(1, n_max).unwrap();
        let frame = PositionFrame::new(&ph).unwrap();
        let v1 = sample_cone_element(seed, rank, &basis, &frame).unwrap();
        let v2 = sample_cone_element(seed + 1_000_003, rank, &basis, &frame).unwrap();
        prop_assert!(cone_membership(&v1, &basis, &frame, 1e-10).unwrap().member);
        prop_assert!(cone_membership(&v2, &basis, &frame, 1e-10).unwrap().member);
        let mut mix: Vec<C64> = v1
            .iter()
            .zip(&v2)
            .map(|(x, y)| x * C64::new(lambda, 0.0) + y * C64::new(1.0 - lambda, 0.0))
            .collect();
        let nrm = znorm(&mix);
        prop_assert!(nrm > 1e-12);
        for z in &mut mix {
            *z /= nrm;
        }
        prop_assert!(cone_membership(&mix, &basis, &frame, 1e-10).unwrap().member);
    }
}
