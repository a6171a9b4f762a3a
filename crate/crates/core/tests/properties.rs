use llhmm::harness::csv::{emit, load, Record};
use llhmm::micro::{llg_rhs, step};
use llhmm::{
    CellCoefficient, Coefficient, DiffusionOperator, ExchangeOperator, Kernel, LLState, Model,
    PeriodicGrid, Scheme, StepControl, VectorField,
};
use proptest::prelude::*;

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

// 1 + b sin(2πy) + c cos(4πy) with |b| + |c| < 0.9 stays positive
fn coefficient(b: f64, c: f64, dim: usize) -> CellCoefficient {
    let src = if dim == 1 {
        format!("1.0 + {b} * sin(2.0 * pi * y) + {c} * cos(4.0 * pi * y)")
    } else {
        format!("1.0 + {b} * sin(2.0 * pi * y1) + {c} * cos(2.0 * pi * (y1 + y2))")
    };
    CellCoefficient::expression(dim, &src).unwrap()
}

fn unit_field(grid: PeriodicGrid, raw: &[[f64; 3]]) -> VectorField {
    let mut m = VectorField {
        grid,
        data: raw.to_vec(),
    };
    m.normalize();
    m
}

fn raw_vectors(len: usize) -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(
        [0.1f64..1.0, -1.0f64..1.0, -1.0f64..1.0].prop_map(|[a, b, c]| [a, b, c]),
        len,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_is_symmetric_and_nonpositive(
        b in -0.45f64..0.45,
        c in -0.4f64..0.4,
        u in raw_vectors(96),
        v in raw_vectors(96),
    ) {
        let grid = PeriodicGrid::unit_cell(1, 96).unwrap();
        let coef = Coefficient::new(coefficient(b, c, 1), 1.0 / 12.0).unwrap();
        let op = DiffusionOperator::new(grid, &coef).unwrap();
        let u = VectorField { grid, data: u };
        let v = VectorField { grid, data: v };
        let (lu, lv) = (op.apply(&u), op.apply(&v));
        let inner = |x: &VectorField, y: &VectorField| x.data.iter().zip(&y.data).map(|(p, q)| dot(*p, *q)).sum::<f64>();
        let scale = inner(&u, &u).sqrt() * inner(&lv, &lv).sqrt() + 1.0;
        prop_assert!((inner(&u, &lv) - inner(&lu, &v)).abs() <= 1e-12 * scale);
        prop_assert!(inner(&u, &lu) <= 1e-10 * scale);
    }

    #[test]
    fn rhs_is_tangent_to_the_sphere(
        b in -0.45f64..0.45,
        c in -0.4f64..0.4,
        alpha in 0.0f64..1.0,
        raw in raw_vectors(256),
    ) {
        let grid = PeriodicGrid::unit_cell(2, 16).unwrap();
        let coef = Coefficient::new(coefficient(b, c, 2), 1.0 / 2.0).unwrap();
        let op = DiffusionOperator::new(grid, &coef).unwrap();
        let m = unit_field(grid, &raw);
        let rhs = llg_rhs(&op, &m, alpha);
        let scale = rhs.max_abs() + 1.0;
        for (mi, ri) in m.data.iter().zip(&rhs.data) {
            prop_assert!(dot(*mi, *ri).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn steps_stay_on_the_sphere(
        b in -0.45f64..0.45,
        alpha in 0.0f64..1.0,
        midpoint in any::<bool>(),
        raw in raw_vectors(64),
    ) {
        let grid = PeriodicGrid::unit_cell(1, 64).unwrap();
        let coef = Coefficient::new(coefficient(b, 0.0, 1), 1.0 / 8.0).unwrap();
        let op = DiffusionOperator::new(grid, &coef).unwrap();
        let scheme = if midpoint { Scheme::ImexMidpoint } else { Scheme::Rk4Project };
        let ctl = StepControl::from_cfl(&op, 0.2, scheme).unwrap();
        let mut s = LLState::new(unit_field(grid, &raw), alpha).unwrap();
        for _ in 0..5 {
            s = step(&op, &s, &ctl).unwrap();
        }
        prop_assert!(s.m.max_norm_deviation() <= 1e-12);
    }

    #[test]
    fn symmetric_kernels_reproduce_polynomials(p in 0usize..10, q in 0usize..10) {
        let k = Kernel::build_symmetric(p, q).unwrap();
        prop_assert!(k.max_moment_residual() <= 1e-10);
        for r in 0..=p {
            let m = k.quadrature_moment(r);
            let want = if r == 0 { 1.0 } else { 0.0 };
            prop_assert!((m - want).abs() <= 1e-9, "({p},{q}) moment {r}: {m}");
        }
        // even about the origin
        for t in [0.1, 0.37, 0.8] {
            prop_assert!((k.eval(t) - k.eval(-t)).abs() <= 1e-12 * k.eval(t).abs().max(1.0));
        }
    }

    #[test]
    fn one_sided_kernels_within_the_gate_are_accurate(p in 0usize..7, q in 0usize..8) {
        if let Ok(k) = Kernel::build_one_sided(p, q) {
            prop_assert!(k.max_moment_residual() <= 1e-8);
            prop_assert!((k.quadrature_moment(0) - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn csv_round_trip_is_lossless(
        model in 0usize..3,
        eps_n in 2usize..500,
        mu in 1e-4f64..0.4,
        eta in 1e-8f64..1e-1,
        alpha in 0.0f64..1.0,
        orders in [0usize..12, 0usize..12, 0usize..12, 0usize..12],
        dt in 1e-12f64..1e-3,
        error in prop::num::f64::POSITIVE | prop::num::f64::ZERO,
        value in prop::collection::vec(prop::num::f64::NORMAL, 0..=6),
        unseparated in any::<bool>(),
    ) {
        let reference: Vec<f64> = value.iter().map(|v| -v / 3.0).collect();
        let row = Record {
            model: Model::ALL[model],
            epsilon: 1.0 / eps_n as f64,
            mu,
            eta,
            alpha,
            px: orders[0],
            qx: orders[1],
            pt: orders[2],
            qt: orders[3],
            n: 8 * eps_n,
            dt,
            error,
            value,
            reference,
            status: if unseparated { "unseparated".into() } else { "ok".into() },
        };
        let mut buf = vec![];
        emit(&mut buf, std::slice::from_ref(&row)).unwrap();
        let back = load(buf.as_slice()).unwrap();
        prop_assert_eq!(back, vec![row]);
    }
}
