//! Strategies shared by the property suites.
#![allow(dead_code)]

use bbmkdv::expr::{rational, DepVar, Param, Rational, Symbol};
use bbmkdv::{parse, Expr};
use proptest::prelude::*;

pub const PARAMS: [Param; 7] =
    [Param::A, Param::B, Param::C, Param::Eps, Param::Kappa, Param::Lambda, Param::Sigma];

pub fn leaf(max_order: u8) -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-6i64..7, 1i64..5).prop_map(|(n, d)| Expr::from_rational(rational(n, d))),
        (0usize..7).prop_map(|i| Expr::param(PARAMS[i])),
        Just(Expr::t()),
        Just(Expr::x()),
        (0usize..2, 0..=max_order, 0..=max_order).prop_map(move |(v, t, x)| {
            let var = [DepVar::U, DepVar::V][v];
            // keep the total order within the bound
            let t = t.min(max_order);
            let x = x.min(max_order - t);
            Expr::jet(var, t, x)
        }),
    ]
}

/// Rational functions of the leaves, with an occasional log atom.
pub fn expr(max_order: u8, atoms: bool) -> impl Strategy<Value = Expr> {
    leaf(max_order).prop_recursive(4, 24, 3, move |inner| {
        let mut ops = vec![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b).boxed(),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b).boxed(),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b).boxed(),
            (inner.clone(), 1u32..4).prop_map(|(a, k)| {
                // divide by a parameter polynomial that cannot vanish identically
                let d = parse(&format!("a*u + {k}*c")).unwrap();
                a.checked_div(&d).unwrap()
            })
            .boxed(),
        ];
        if atoms {
            ops.push(inner.clone().prop_map(|a| a * Expr::ln(&parse("a*u + c").unwrap()).unwrap()).boxed());
        }
        proptest::strategy::Union::new(ops)
    })
}

/// Functions of (t, x, u, v) only.
pub fn point_function() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-4i64..5).prop_map(Expr::int),
        Just(Expr::t()),
        Just(Expr::x()),
        Just(Expr::u()),
        Just(Expr::v()),
        (0usize..7).prop_map(|i| Expr::param(PARAMS[i])),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| a * Expr::ln(&parse("a*u + c").unwrap()).unwrap()),
        ]
    })
}

pub fn point(seed: &[i64]) -> impl Fn(&Symbol) -> Option<Rational> + '_ {
    move |s: &Symbol| {
        let h = s.to_string().bytes().fold(7i64, |acc, b| acc.wrapping_mul(31).wrapping_add(b as i64));
        let k = seed[(h.unsigned_abs() as usize) % seed.len()];
        Some(rational(k + (h % 5), 3 + (h.unsigned_abs() % 4) as i64))
    }
}
