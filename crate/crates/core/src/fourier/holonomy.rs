use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::torus::neg_log_det_real;
use crate::error::{Error, Result};
use crate::graph::{GraphModel, SpanningTreeFrame};
use crate::measure::total_mass;

const UNITARY_TOLERANCE: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn is_unitary(u: &DMatrix<Complex64>) -> bool {
    let d = u.nrows();
    if u.ncols() != d {
        return false;
    }
    let prod = u * u.adjoint();
    (prod - DMatrix::<Complex64>::identity(d, d)).iter().all(|z| z.norm() < UNITARY_TOLERANCE)
}

/// Unitary matrices on oriented edges with `U(y,x) = U(x,y)^†`; unlisted edges carry the identity.
#[derive(Debug, Clone)]
pub struct UnitaryConnection {
    dim: usize,
    blocks: BTreeMap<(usize, usize), DMatrix<Complex64>>,
}

impl UnitaryConnection {
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            blocks: BTreeMap::new(),
        }
    }

    pub fn new(g: &GraphModel, dim: usize, assignments: Vec<((usize, usize), DMatrix<Complex64>)>) -> Result<Self> {
        let mut blocks: BTreeMap<(usize, usize), DMatrix<Complex64>> = BTreeMap::new();
        for ((x, y), u) in assignments {
            if !g.is_edge(x, y) {
                return Err(Error::NotAnEdge(x, y));
            }
            if u.nrows() != dim || !is_unitary(&u) {
                return Err(Error::NonUnitary(x, y));
            }
            let back = u.adjoint();
            for (key, m) in [((x, y), u), ((y, x), back)] {
                if let Some(prev) = blocks.get(&key) {
                    if (prev - &m).iter().any(|z| z.norm() > UNITARY_TOLERANCE) {
                        return Err(Error::NonUnitary(key.0, key.1));
                    }
                }
                blocks.insert(key, m);
            }
        }
        Ok(Self { dim, blocks })
    }

    /// The one-dimensional connection `e^{2πi θ_i}` on cogenerator `e_i`.
    pub fn abelian(g: &GraphModel, frame: &SpanningTreeFrame, theta: &[f64]) -> Result<Self> {
        let assignments = frame
            .cogenerators()
            .iter()
            .zip(theta)
            .map(|(&e, &t)| (e, DMatrix::from_element(1, 1, Complex64::from_polar(1.0, 2.0 * PI * t))))
            .collect();
        Self::new(g, 1, assignments)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self, x: usize, y: usize) -> DMatrix<Complex64> {
        self.blocks
            .get(&(x, y))
            .cloned()
            .unwrap_or_else(|| DMatrix::identity(self.dim, self.dim))
    }

    /// True when every tree edge carries the identity.
    pub fn is_tree_normalized(&self, frame: &SpanningTreeFrame) -> bool {
        let id = DMatrix::<Complex64>::identity(self.dim, self.dim);
        frame.tree_edges().iter().all(|&(u, v)| {
            self.blocks
                .get(&(u, v))
                .is_none_or(|m| (m - &id).iter().all(|z| z.norm() < UNITARY_TOLERANCE))
        })
    }

    /// `P^{A,π}`: block `(x,y)` is `P_{x,y} U(x,y)`.
    pub fn extended_matrix(&self, g: &GraphModel) -> DMatrix<Complex64> {
        let n = g.vertex_count();
        let d = self.dim;
        let mut m = DMatrix::zeros(n * d, n * d);
        for x in 0..n {
            for &y in g.neighbors(x) {
                let b = self.block(x, y) * c(g.p(x, y));
                m.view_mut((x * d, y * d), (d, d)).copy_from(&b);
            }
        }
        m
    }
}

/// `Σ_l χ_π(H_A(l)) μ(l) = -(1/dim π) log det(I - P^{A,π})`, with `χ_π` the normalized trace.
pub fn holonomy_log_det(g: &GraphModel, conn: &UnitaryConnection) -> Result<f64> {
    total_mass(g)?;
    Ok(neg_log_det_real(&conn.extended_matrix(g))? / conn.dim() as f64)
}

/// A finite group with a complete set of irreducible unitary representations.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    mul: Vec<Vec<usize>>,
    classes: Vec<Vec<usize>>,
    irreps: Vec<Vec<DMatrix<Complex64>>>,
}

impl FiniteGroup {
    /// Builds from a multiplication table (element 0 the identity) and the
    /// irreducible representations as one matrix per element.
    pub fn new(mul: Vec<Vec<usize>>, irreps: Vec<Vec<DMatrix<Complex64>>>) -> Result<Self> {
        let n = mul.len();
        if n == 0 || mul.iter().any(|row| row.len() != n || row.iter().any(|&k| k >= n)) {
            return Err(Error::CharacterTable("malformed multiplication table".into()));
        }
        if (0..n).any(|a| mul[0][a] != a || mul[a][0] != a) {
            return Err(Error::CharacterTable("element 0 is not the identity".into()));
        }
        let inverse: Vec<usize> = (0..n)
            .map(|a| (0..n).find(|&b| mul[a][b] == 0))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::CharacterTable("element without inverse".into()))?;
        let mut class_of = vec![usize::MAX; n];
        let mut classes = Vec::new();
        for a in 0..n {
            if class_of[a] != usize::MAX {
                continue;
            }
            let mut members: Vec<usize> = (0..n).map(|g| mul[mul[g][a]][inverse[g]]).collect();
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                class_of[m] = classes.len();
            }
            classes.push(members);
        }
        let group = Self { mul, classes, irreps };
        group.check_table()?;
        Ok(group)
    }

    pub fn trivial() -> Self {
        Self::new(vec![vec![0]], vec![vec![DMatrix::identity(1, 1)]]).expect("trivial group")
    }

    /// `Z_n` with its `n` characters `k ↦ e^{2πi jk/n}`.
    pub fn cyclic(n: usize) -> Self {
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let irreps = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let t = 2.0 * PI * (j * k) as f64 / n as f64;
                        DMatrix::from_element(1, 1, Complex64::from_polar(1.0, t))
                    })
                    .collect()
            })
            .collect();
        Self::new(mul, irreps).expect("cyclic group")
    }

    /// `S_3` acting on `{0,1,2}`, with its trivial, sign and two-dimensional representations.
    ///
    /// Elements are listed as permutations in lexicographic order, so element 0 is the identity.
    pub fn symmetric3() -> Self {
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let index = |p: [usize; 3]| perms.iter().position(|&q| q == p).unwrap();
        // (a*b)(i) = a(b(i))
        let mul: Vec<Vec<usize>> = perms
            .iter()
            .map(|a| perms.iter().map(|b| index([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        let perm_matrix = |p: &[usize; 3]| DMatrix::from_fn(3, 3, |i, j| c(if p[j] == i { 1.0 } else { 0.0 }));
        let sign = |p: &[usize; 3]| {
            let inversions = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            if inversions % 2 == 0 { 1.0 } else { -1.0 }
        };
        // Orthonormal basis of the sum-zero plane.
        let s2 = 0.5f64.sqrt();
        let s6 = (1.0f64 / 6.0).sqrt();
        let basis = DMatrix::from_row_slice(3, 2, &[s2, s6, -s2, s6, 0.0, -2.0 * s6]).map(c);
        let standard = perms
            .iter()
            .map(|p| basis.adjoint() * perm_matrix(p) * &basis)
            .collect();
        let trivial = perms.iter().map(|_| DMatrix::identity(1, 1)).collect();
        let signs = perms.iter().map(|p| DMatrix::from_element(1, 1, c(sign(p)))).collect();
        Self::new(mul, vec![trivial, signs, standard]).expect("symmetric group")
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.order()).find(|&b| self.mul[a][b] == 0).unwrap()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn irreps(&self) -> &[Vec<DMatrix<Complex64>>] {
        &self.irreps
    }

    /// Unnormalized character `tr π(g)`.
    pub fn character(&self, irrep: usize, element: usize) -> Complex64 {
        self.irreps[irrep][element].trace()
    }

    fn check_table(&self) -> Result<()> {
        let n = self.order();
        let mut dims_sq = 0;
        for (k, rep) in self.irreps.iter().enumerate() {
            if rep.len() != n {
                return Err(Error::CharacterTable(format!("representation {k} has {} matrices", rep.len())));
            }
            let d = rep[0].nrows();
            dims_sq += d * d;
            if rep.iter().any(|m| m.nrows() != d || !is_unitary(m)) {
                return Err(Error::CharacterTable(format!("representation {k} is not unitary")));
            }
            for a in 0..n {
                for b in 0..n {
                    let lhs = &rep[a] * &rep[b];
                    if (lhs - &rep[self.mul[a][b]]).iter().any(|z| z.norm() > 1e-9) {
                        return Err(Error::CharacterTable(format!("representation {k} is not a homomorphism")));
                    }
                }
            }
        }
        if dims_sq != n || self.irreps.len() != self.classes.len() {
            return Err(Error::CharacterTable("representations are not a complete irreducible set".into()));
        }
        for i in 0..self.irreps.len() {
            for j in 0..self.irreps.len() {
                let inner: Complex64 = (0..n)
                    .map(|g| self.character(i, g) * self.character(j, g).conj())
                    .sum::<Complex64>()
                    / n as f64;
                let expect = if i == j { 1.0 } else { 0.0 };
                if (inner - c(expect)).norm() > 1e-9 {
                    return Err(Error::CharacterTable(format!("characters {i} and {j} fail orthogonality")));
                }
            }
        }
        Ok(())
    }
}

/// Group elements on oriented edges, inverse on the reversed edge.
#[derive(Debug, Clone)]
pub struct GroupConnection {
    elements: BTreeMap<(usize, usize), usize>,
}

impl GroupConnection {
    pub fn new(g: &GraphModel, group: &FiniteGroup, assignments: &[((usize, usize), usize)]) -> Result<Self> {
        let mut elements = BTreeMap::new();
        for &((x, y), a) in assignments {
            if !g.is_edge(x, y) {
                return Err(Error::NotAnEdge(x, y));
            }
            if a >= group.order() {
                return Err(Error::Precondition(format!("group element {a} out of range")));
            }
            for (key, e) in [((x, y), a), ((y, x), group.inverse(a))] {
                if elements.get(&key).is_some_and(|&prev| prev != e) {
                    return Err(Error::Precondition(format!("inconsistent assignment on {}-{}", key.0, key.1)));
                }
                elements.insert(key, e);
            }
        }
        Ok(Self { elements })
    }

    pub fn element(&self, x: usize, y: usize) -> usize {
        self.elements.get(&(x, y)).copied().unwrap_or(0)
    }

    /// Product of the edge elements along a closed walk.
    pub fn holonomy(&self, group: &FiniteGroup, walk: &[(usize, usize)]) -> usize {
        walk.iter().fold(0, |acc, &(x, y)| group.mul(acc, self.element(x, y)))
    }

    pub fn represent(&self, g: &GraphModel, group: &FiniteGroup, irrep: usize) -> Result<UnitaryConnection> {
        let rep = &group.irreps()[irrep];
        let assignments = self
            .elements
            .iter()
            .filter(|(&(x, y), _)| x < y)
            .map(|(&e, &a)| (e, rep[a].clone()))
            .collect();
        UnitaryConnection::new(g, rep[0].nrows(), assignments)
    }
}

/// μ-mass of loops whose holonomy lies in each conjugacy class, in [`FiniteGroup::classes`] order:
/// `(|C|/|G|) Σ_π conj(tr π(C)) (-log det(I - P^{A,π}))`.
pub fn holonomy_class_intensities(g: &GraphModel, conn: &GroupConnection, group: &FiniteGroup) -> Result<Vec<f64>> {
    let logs = (0..group.irreps().len())
        .map(|k| Ok(holonomy_log_det(g, &conn.represent(g, group, k)?)? * group.irreps()[k][0].nrows() as f64))
        .collect::<Result<Vec<f64>>>()?;
    let order = group.order() as f64;
    group
        .classes()
        .iter()
        .map(|class| {
            let rep = class[0];
            let v: Complex64 = logs
                .iter()
                .enumerate()
                .map(|(k, &l)| group.character(k, rep).conj() * l)
                .sum::<Complex64>()
                * (class.len() as f64 / order);
            if v.im.abs() > 1e-10 || v.re < -1e-10 {
                return Err(Error::Numeric(format!("class intensity {v} is not a nonnegative real")));
            }
            Ok(v.re.max(0.0))
        })
        .collect()
}
