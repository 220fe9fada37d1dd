use std::collections::{HashMap, VecDeque};

use super::{AffineIsometry, GroupError};
use crate::Scalar;

pub const DEFAULT_MAX_ORDER: usize = 10_000;

/// Below this order a failed hash lookup falls back to a linear scan, which
/// protects float elements sitting on a rounding boundary of the hash grid.
const LINEAR_FALLBACK_LIMIT: usize = 4096;

/// A finite group of affine isometries with its multiplication table.
///
/// Element 0 is always the identity. `table[a][b]` is the index of `a ∘ b`.
#[derive(Clone, Debug)]
pub struct FiniteActionGroup<T: Scalar> {
    dim: usize,
    lattice: bool,
    elements: Vec<AffineIsometry<T>>,
    generators: Vec<usize>,
    table: Vec<Vec<usize>>,
    inverses: Vec<usize>,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

struct ElementIndex {
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl ElementIndex {
    fn new() -> Self {
        Self { buckets: HashMap::new() }
    }

    fn insert<T: Scalar>(&mut self, g: &AffineIsometry<T>, idx: usize) {
        self.buckets.entry(g.key()).or_default().push(idx);
    }

    fn find<T: Scalar>(&self, g: &AffineIsometry<T>, elements: &[AffineIsometry<T>], lattice: bool) -> Option<usize> {
        if let Some(bucket) = self.buckets.get(&g.key()) {
            if let Some(&i) = bucket.iter().find(|&&i| elements[i].same_as(g, lattice)) {
                return Some(i);
            }
        }
        if elements.len() <= LINEAR_FALLBACK_LIMIT && !g.is_exact() {
            return elements.iter().position(|e| e.same_as(g, lattice));
        }
        None
    }
}

/// Closure of `generators` under composition.
///
/// With `lattice` set the elements act on `Rⁿ/Zⁿ`, so translations are compared
/// modulo integers and every linear part must be an integer matrix.
pub fn generate_group<T: Scalar>(
    dim: usize,
    generators: &[AffineIsometry<T>],
    lattice: bool,
    max_order: usize,
) -> Result<FiniteActionGroup<T>, GroupError> {
    for (index, g) in generators.iter().enumerate() {
        if g.dim() != dim {
            return Err(GroupError::DimensionMismatch { expected: dim, found: g.dim() });
        }
        if !g.is_orthogonal() {
            return Err(GroupError::NotIsometry { index, defect: g.orthogonality_defect() });
        }
        if lattice && !g.preserves_integer_lattice() {
            return Err(GroupError::LatticeNotPreserved { index });
        }
    }
    let gens: Vec<AffineIsometry<T>> = generators.iter().map(|g| g.reduced(lattice)).collect();

    let mut elements = vec![AffineIsometry::identity(dim)];
    let mut index = ElementIndex::new();
    index.insert(&elements[0], 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for s in &gens {
            let p = s.compose(&elements[i]).reduced(lattice);
            if index.find(&p, &elements, lattice).is_none() {
                if elements.len() >= max_order {
                    return Err(GroupError::OrderExceeded { max_order });
                }
                let k = elements.len();
                index.insert(&p, k);
                elements.push(p);
                queue.push_back(k);
            }
        }
    }

    let generator_idx = gens
        .iter()
        .map(|g| index.find(g, &elements, lattice).ok_or(GroupError::NotClosed))
        .collect::<Result<Vec<_>, _>>()?;

    let n = elements.len();
    let mut table = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            let p = elements[a].compose(&elements[b]).reduced(lattice);
            table[a][b] = index.find(&p, &elements, lattice).ok_or(GroupError::NotClosed)?;
        }
    }
    FiniteActionGroup::from_parts(dim, lattice, elements, generator_idx, table)
}

impl<T: Scalar> FiniteActionGroup<T> {
    fn from_parts(
        dim: usize,
        lattice: bool,
        elements: Vec<AffineIsometry<T>>,
        generators: Vec<usize>,
        table: Vec<Vec<usize>>,
    ) -> Result<Self, GroupError> {
        let n = elements.len();
        let inverses = (0..n)
            .map(|a| (0..n).find(|&b| table[a][b] == 0).ok_or(GroupError::NotClosed))
            .collect::<Result<Vec<_>, _>>()?;

        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for g in 0..n {
            if class_of[g] != usize::MAX {
                continue;
            }
            let mut class: Vec<usize> = (0..n).map(|h| table[table[h][g]][inverses[h]]).collect();
            class.sort_unstable();
            class.dedup();
            for &c in &class {
                class_of[c] = classes.len();
            }
            classes.push(class);
        }
        Ok(Self { dim, lattice, elements, generators, table, inverses, classes, class_of })
    }

    pub fn trivial(dim: usize, lattice: bool) -> Self {
        generate_group(dim, &[], lattice, 1).expect("trivial group")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lattice(&self) -> bool {
        self.lattice
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn elements(&self) -> &[AffineIsometry<T>] {
        &self.elements
    }

    pub fn element(&self, g: usize) -> &AffineIsometry<T> {
        &self.elements[g]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn multiply(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn power(&self, g: usize, k: usize) -> usize {
        (0..k).fold(0, |acc, _| self.table[acc][g])
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut p = g;
        while p != 0 {
            p = self.table[p][g];
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..a).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Conjugacy classes, each sorted, in order of their smallest element.
    /// The first class is `{identity}`.
    pub fn conjugacy_classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    /// Indices (in this group) of all elements commuting with `g`.
    pub fn centralizer_members(&self, g: usize) -> Vec<usize> {
        (0..self.order()).filter(|&h| self.table[h][g] == self.table[g][h]).collect()
    }

    pub fn centralizer(&self, g: usize) -> Result<Self, GroupError> {
        if g >= self.order() {
            return Err(GroupError::NoSuchElement(g));
        }
        self.subgroup(&self.centralizer_members(g))
    }

    /// The subgroup on `members`, with the inherited multiplication.
    ///
    /// Elements keep their relative order, so the identity stays at index 0.
    pub fn subgroup(&self, members: &[usize]) -> Result<Self, GroupError> {
        let mut members = members.to_vec();
        members.push(0);
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&m| m >= self.order()) {
            return Err(GroupError::NoSuchElement(bad));
        }
        let mut local = vec![usize::MAX; self.order()];
        for (i, &m) in members.iter().enumerate() {
            local[m] = i;
        }
        let k = members.len();
        let mut table = vec![vec![0usize; k]; k];
        for (i, &a) in members.iter().enumerate() {
            for (j, &b) in members.iter().enumerate() {
                let p = local[self.table[a][b]];
                if p == usize::MAX {
                    return Err(GroupError::NotClosed);
                }
                table[i][j] = p;
            }
        }
        let generators = greedy_generators(&table);
        let elements = members.iter().map(|&m| self.elements[m].clone()).collect();
        Self::from_parts(self.dim, self.lattice, elements, generators, table)
    }
}

fn greedy_generators(table: &[Vec<usize>]) -> Vec<usize> {
    let n = table.len();
    let mut inside = vec![false; n];
    inside[0] = true;
    let mut gens = Vec::new();
    for cand in 1..n {
        if inside[cand] {
            continue;
        }
        gens.push(cand);
        // re-close under right multiplication by all generators
        let mut stack: Vec<usize> = (0..n).filter(|&i| inside[i]).collect();
        while let Some(x) = stack.pop() {
            for &s in &gens {
                let p = table[x][s];
                if !inside[p] {
                    inside[p] = true;
                    stack.push(p);
                }
            }
        }
    }
    gens
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use num_rational::Rational64;

    fn perm_matrix(p: [usize; 3]) -> AffineIsometry<f64> {
        let mut m = DMatrix::from_element(3, 3, Rational64::from_integer(0));
        for (col, &row) in p.iter().enumerate() {
            m[(row, col)] = Rational64::from_integer(1);
        }
        AffineIsometry::from_exact(m, DVector::from_element(3, Rational64::from_integer(0))).unwrap()
    }

    fn s3() -> FiniteActionGroup<f64> {
        generate_group(3, &[perm_matrix([1, 0, 2]), perm_matrix([1, 2, 0])], false, 100).unwrap()
    }

    fn rotation(theta: f64) -> AffineIsometry<f64> {
        let (s, c) = theta.sin_cos();
        AffineIsometry::linear_map(DMatrix::from_row_slice(2, 2, &[c, -s, s, c])).unwrap()
    }

    #[test]
    fn kummer_group_has_order_two() {
        let neg = AffineIsometry::<f64>::from_exact(
            -DMatrix::<Rational64>::identity(4, 4),
            DVector::from_element(4, Rational64::from_integer(0)),
        )
        .unwrap();
        let g = generate_group(4, &[neg], true, DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.conjugacy_classes(), &[vec![0], vec![1]]);
        assert_eq!(g.centralizer(1).unwrap().order(), 2);
    }

    #[test]
    fn empty_generator_set_gives_trivial_group() {
        let g = generate_group::<f64>(3, &[], false, 10).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.conjugacy_classes(), &[vec![0]]);
        assert!(g.generators().is_empty());
    }

    #[test]
    fn rotation_by_fifth_turn_generates_c5() {
        // oracle: apply the rotation repeatedly until it returns to the identity
        let r = rotation(2.0 * std::f64::consts::PI / 5.0);
        let mut p = r.clone();
        let mut brute = 1;
        while !p.same_as(&AffineIsometry::identity(2), false) {
            p = r.compose(&p);
            brute += 1;
        }
        assert_eq!(brute, 5);
        let g = generate_group(2, &[r], false, 100).unwrap();
        assert_eq!(g.order(), brute);
        assert!(g.is_abelian());
        assert_eq!(g.element_order(g.generators()[0]), 5);
    }

    #[test]
    fn s3_classes_and_centralizers_match_brute_force() {
        let g = s3();
        assert_eq!(g.order(), 6);
        let mut sizes: Vec<usize> = g.conjugacy_classes().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);

        // brute-force conjugation directly on the matrices
        for a in 0..6 {
            let mut class = Vec::new();
            for h in g.elements() {
                let c = h.compose(g.element(a)).compose(&h.inverse());
                let idx = g.elements().iter().position(|e| e.same_as(&c, false)).unwrap();
                class.push(idx);
            }
            class.sort_unstable();
            class.dedup();
            assert_eq!(class, g.conjugacy_classes()[g.class_of(a)]);
        }

        let transposition = (0..6).find(|&a| g.element(a).determinant() < 0.0).unwrap();
        let brute: Vec<usize> = (0..6)
            .filter(|&h| {
                let hg = g.element(h).compose(g.element(transposition));
                let gh = g.element(transposition).compose(g.element(h));
                hg.same_as(&gh, false)
            })
            .collect();
        let c = g.centralizer(transposition).unwrap();
        assert_eq!(c.order(), 2);
        assert_eq!(brute.len(), 2);
        for a in 0..6 {
            assert_eq!(g.conjugacy_classes()[g.class_of(a)].len() * g.centralizer(a).unwrap().order(), 6);
        }
    }

    #[test]
    fn infinite_group_hits_order_cap() {
        let r = rotation(1.0);
        assert_eq!(generate_group(2, &[r], false, 500).unwrap_err(), GroupError::OrderExceeded { max_order: 500 });
    }

    #[test]
    fn generator_errors() {
        let shear = AffineIsometry::<f64>::linear_map(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(matches!(generate_group(2, &[shear], false, 10), Err(GroupError::NotIsometry { index: 0, .. })));
        let r = rotation(2.0 * std::f64::consts::PI / 5.0);
        assert_eq!(generate_group(2, &[r], true, 10).unwrap_err(), GroupError::LatticeNotPreserved { index: 0 });
    }

    #[test]
    fn translations_mod_lattice_close_up() {
        // x ↦ x + 1/3 on the circle generates Z3
        let t = AffineIsometry::<f64>::from_exact(
            DMatrix::from_element(1, 1, Rational64::from_integer(1)),
            DVector::from_element(1, Rational64::new(1, 3)),
        )
        .unwrap();
        let g = generate_group(1, std::slice::from_ref(&t), true, 10).unwrap();
        assert_eq!(g.order(), 3);
        assert!(generate_group(1, &[t], false, 10).is_err());
    }
}
