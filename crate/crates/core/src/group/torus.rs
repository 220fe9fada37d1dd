//! Chart coordinates, optionally taken modulo the integer lattice.

use nalgebra::DVector;

use crate::Scalar;

/// Reduces `x` into the fundamental domain `[0, 1)` on each periodic axis.
///
/// Coordinates within `snap` of 1 are mapped to slightly negative values
/// rather than to something like `0.9999999999`, so near-integers end up next to 0.
pub fn wrap<T: Scalar>(x: &DVector<T>, lattice: bool, snap: T) -> DVector<T> {
    if !lattice {
        return x.clone();
    }
    x.map(|v| {
        let r = v - v.floor();
        if T::one() - r < snap {
            r - T::one()
        } else {
            r
        }
    })
}

/// The shortest representative of `a - b`.
pub fn displacement<T: Scalar>(a: &DVector<T>, b: &DVector<T>, lattice: bool) -> DVector<T> {
    let d = a - b;
    if lattice {
        d.map(|v| v - v.round())
    } else {
        d
    }
}

/// Flat distance, in the torus metric when `lattice` is set.
pub fn distance<T: Scalar>(a: &DVector<T>, b: &DVector<T>, lattice: bool) -> T {
    displacement(a, b, lattice).norm()
}

/// Lexicographic comparison used for canonical ordering of points.
pub fn lex_cmp<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}
