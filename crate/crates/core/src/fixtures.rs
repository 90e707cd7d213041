//! Small hand-transcribed instances shared by unit tests.

use crate::model::{LinearConstraint, QipBuilder, QipInstance, Quantifier, Relation, Sense};

/// Five-variable game with one uncertainty row; optimum -1 at x1 = 1.
pub(crate) fn example_one() -> QipInstance {
    let mut b = QipBuilder::new();
    let x1 = b.var("x1", Quantifier::Exists, 0, 2);
    let x2 = b.binary("x2", Quantifier::Forall);
    let x3 = b.binary("x3", Quantifier::Exists);
    let x4 = b.binary("x4", Quantifier::Forall);
    let x5 = b.binary("x5", Quantifier::Exists);
    b.exist_row(LinearConstraint::from_ints(
        &[(2, x1), (1, x3), (-1, x5)],
        Relation::Le,
        4,
    ))
    .exist_row(LinearConstraint::from_ints(
        &[(1, x1), (-1, x2), (1, x3), (-1, x5)],
        Relation::Eq,
        1,
    ))
    .exist_row(LinearConstraint::from_ints(
        &[(1, x2), (1, x3), (-1, x4), (-1, x5)],
        Relation::Le,
        2,
    ))
    .exist_row(LinearConstraint::from_ints(
        &[(1, x1), (1, x2), (1, x3), (1, x4)],
        Relation::Le,
        3,
    ))
    .univ_row(LinearConstraint::from_ints(&[(1, x2), (1, x4)], Relation::Le, 1))
    .objective(
        Sense::Min,
        vec![(-1, x1), (2, x2), (-3, x3), (1, x4), (2, x5)],
    );
    b.build().unwrap()
}

/// `E x1 x2 A z1 z2 E t d : x1+x2+t-2d = 0, z1+z2+t >= 1, -z1-z2-t >= -2`, all binary.
#[allow(dead_code)]
pub(crate) fn parity_game() -> QipInstance {
    let mut b = QipBuilder::new();
    let x1 = b.binary("x1", Quantifier::Exists);
    let x2 = b.binary("x2", Quantifier::Exists);
    let z1 = b.binary("z1", Quantifier::Forall);
    let z2 = b.binary("z2", Quantifier::Forall);
    let t = b.binary("t", Quantifier::Exists);
    let d = b.binary("d", Quantifier::Exists);
    b.exist_row(LinearConstraint::from_ints(
        &[(1, x1), (1, x2), (1, t), (-2, d)],
        Relation::Eq,
        0,
    ))
    .exist_row(LinearConstraint::from_ints(
        &[(1, z1), (1, z2), (1, t)],
        Relation::Ge,
        1,
    ))
    .exist_row(LinearConstraint::from_ints(
        &[(-1, z1), (-1, z2), (-1, t)],
        Relation::Ge,
        -2,
    ));
    b.build().unwrap()
}
