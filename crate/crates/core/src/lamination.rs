//! Mapping classes acting on integral lamination coordinates.
//!
//! A surface is modeled by a fixed triangulation; a curve system by its vector
//! of edge intersection numbers, constrained by the triangle inequalities and
//! an even perimeter in every triangle. Mapping classes are words of edge
//! flips and edge relabelings. The flip update is the tropical Ptolemy
//! exchange, so the action is piecewise linear over the integers and every
//! size is exact.
//!
//! The shipped model is the once-punctured torus: slope (p, q) curves have
//! coordinates (|p|, |q|, |p - q|), and the two standard twist generators are
//! realized as one flip plus one relabel each. Their declared homology images
//! give an independent 2x2 integer oracle for every growth exponent, which is
//! how the flip words are certified. The closed higher-genus surfaces are out
//! of scope for the numerics; all algorithms here are surface-agnostic.
//!
//! Flips are restricted to edges whose quadrilateral reuses a side pair
//! (`p == r` or `q == s`): those flips glue the triangulation back to itself,
//! so a fixed edge labeling stays meaningful across a whole word. A flip at a
//! generic quadrilateral would change the triangulation mid-word, which this
//! representation does not track.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::cocycle::{displacement, CocycleTarget, Marking};
use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;

/// Triangulated surface with explicit quadrilateral data per edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangulation {
    num_edges: usize,
    triangles: Vec<[usize; 3]>,
    /// quads[e] = (p, q, r, s): sides of the two triangles at e in cyclic
    /// order, p and q opposite r and s. Repeats are meaningful.
    quads: Vec<[usize; 4]>,
}

impl Triangulation {
    pub fn new(
        num_edges: usize,
        triangles: Vec<[usize; 3]>,
        quads: Vec<[usize; 4]>,
    ) -> Result<Self> {
        if num_edges == 0 || triangles.is_empty() {
            return Err(Error::input("triangulation needs at least one edge and triangle"));
        }
        if quads.len() != num_edges {
            return Err(Error::input(format!(
                "expected one quadrilateral per edge ({num_edges}), got {}",
                quads.len()
            )));
        }
        let mut slot_count = vec![0usize; num_edges];
        for t in &triangles {
            for &e in t {
                if e >= num_edges {
                    return Err(Error::input(format!("triangle references edge {e} out of range")));
                }
                slot_count[e] += 1;
            }
        }
        for (e, &c) in slot_count.iter().enumerate() {
            if c != 2 {
                return Err(Error::input(format!(
                    "edge {e} fills {c} triangle slots; a closed surface needs exactly 2"
                )));
            }
        }
        let tri = Triangulation { num_edges, triangles, quads };
        for e in 0..num_edges {
            let [p, q, r, s] = tri.quads[e];
            for side in [p, q, r, s] {
                if side >= num_edges {
                    return Err(Error::input(format!(
                        "quadrilateral of edge {e} references edge {side} out of range"
                    )));
                }
            }
            if !tri.has_triangle(e, p, q) || !tri.has_triangle(e, r, s) {
                return Err(Error::input(format!(
                    "quadrilateral of edge {e} does not match the triangle list"
                )));
            }
        }
        Ok(tri)
    }

    fn has_triangle(&self, a: usize, b: usize, c: usize) -> bool {
        let mut want = [a, b, c];
        want.sort_unstable();
        self.triangles.iter().any(|t| {
            let mut got = *t;
            got.sort_unstable();
            got == want
        })
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn quad(&self, e: usize) -> [usize; 4] {
        self.quads[e]
    }

    /// A flip at `e` maps the triangulation to itself exactly when the quad
    /// repeats a side across the diagonal.
    pub fn flip_preserves_gluing(&self, e: usize) -> bool {
        let [p, q, r, s] = self.quads[e];
        p == r || q == s
    }

    /// Triangle inequalities and even perimeter in every triangle;
    /// non-negative entries of the right length.
    pub fn validate_coords(&self, values: &[BigInt]) -> Result<()> {
        if values.len() != self.num_edges {
            return Err(Error::input(format!(
                "expected {} coordinates, got {}",
                self.num_edges,
                values.len()
            )));
        }
        for v in values {
            if v.sign() == num_bigint::Sign::Minus {
                return Err(Error::input("lamination coordinates must be non-negative"));
            }
        }
        for (i, t) in self.triangles.iter().enumerate() {
            let a = &values[t[0]];
            let b = &values[t[1]];
            let c = &values[t[2]];
            let perimeter = a + b + c;
            if &perimeter % 2 != BigInt::zero() {
                return Err(Error::input(format!("odd perimeter in triangle {i}")));
            }
            if a > &(b + c) || b > &(a + c) || c > &(a + b) {
                return Err(Error::input(format!("triangle inequality fails in triangle {i}")));
            }
        }
        Ok(())
    }

    fn check_move(&self, mv: &Move) -> Result<()> {
        match mv {
            Move::Flip(e) => {
                if *e >= self.num_edges {
                    return Err(Error::input(format!("flip edge {e} out of range")));
                }
                if !self.flip_preserves_gluing(*e) {
                    return Err(Error::input(format!(
                        "flip at edge {e} changes the triangulation; its quadrilateral {:?} \
                         repeats no side",
                        self.quads[*e]
                    )));
                }
                Ok(())
            }
            Move::Relabel(sigma) => {
                if sigma.len() != self.num_edges {
                    return Err(Error::input(format!(
                        "relabel permutation has length {}, expected {}",
                        sigma.len(),
                        self.num_edges
                    )));
                }
                let mut seen = vec![false; self.num_edges];
                for &j in sigma {
                    if j >= self.num_edges || seen[j] {
                        return Err(Error::input("relabel is not a permutation of the edges"));
                    }
                    seen[j] = true;
                }
                for t in &self.triangles {
                    if !self.has_triangle(sigma[t[0]], sigma[t[1]], sigma[t[2]]) {
                        return Err(Error::input(format!(
                            "relabel does not preserve the triangulation: triangle {t:?} maps \
                             outside the triangle list"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn validate_class(&self, cls: &FlipWordClass) -> Result<()> {
        for mv in cls.moves() {
            self.check_move(mv)?;
        }
        Ok(())
    }
}

/// Edge intersection numbers of a curve system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LamCoords {
    values: Vec<BigInt>,
}

impl LamCoords {
    pub fn new(tri: &Triangulation, values: Vec<BigInt>) -> Result<Self> {
        tri.validate_coords(&values)?;
        Ok(LamCoords { values })
    }

    pub fn from_ints(tri: &Triangulation, values: &[i64]) -> Result<Self> {
        LamCoords::new(tri, values.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn l1_size(&self) -> BigInt {
        self.values.iter().sum()
    }

    pub fn max_size(&self) -> BigInt {
        self.values.iter().max().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }
}

/// One step of a mapping-class word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    Flip(usize),
    /// Coordinate at slot i moves to slot sigma[i].
    Relabel(Vec<usize>),
}

/// Mapping class as a move word, optionally with its homology image for
/// cross-checks.
#[derive(Clone, Debug, PartialEq)]
pub struct FlipWordClass {
    moves: Vec<Move>,
    homology: Option<RationalMatrix>,
}

impl FlipWordClass {
    pub fn new(moves: Vec<Move>, homology: Option<RationalMatrix>) -> Self {
        FlipWordClass { moves, homology }
    }

    pub fn identity(homology_dim: Option<usize>) -> Self {
        FlipWordClass { moves: Vec::new(), homology: homology_dim.map(RationalMatrix::identity) }
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn homology(&self) -> Option<&RationalMatrix> {
        self.homology.as_ref()
    }
}

fn apply_move_unchecked(tri: &Triangulation, mv: &Move, x: &LamCoords) -> LamCoords {
    let out = match mv {
        Move::Flip(e) => {
            let [p, q, r, s] = tri.quad(*e);
            let v = &x.values;
            let across = (&v[p] + &v[r]).max(&v[q] + &v[s]);
            let mut values = v.clone();
            values[*e] = across - &v[*e];
            LamCoords { values }
        }
        Move::Relabel(sigma) => {
            let mut values = vec![BigInt::zero(); x.values.len()];
            for (i, &j) in sigma.iter().enumerate() {
                values[j] = x.values[i].clone();
            }
            LamCoords { values }
        }
    };
    debug_assert!(
        tri.validate_coords(&out.values).is_ok(),
        "move {mv:?} broke the triangle invariants"
    );
    out
}

/// Single flip with full input validation.
pub fn flip(tri: &Triangulation, x: &LamCoords, e: usize) -> Result<LamCoords> {
    tri.validate_coords(&x.values)?;
    let mv = Move::Flip(e);
    tri.check_move(&mv)?;
    Ok(apply_move_unchecked(tri, &mv, x))
}

/// Applies the moves of `cls` left to right.
pub fn apply_class(tri: &Triangulation, cls: &FlipWordClass, x: &LamCoords) -> Result<LamCoords> {
    tri.validate_coords(&x.values)?;
    tri.validate_class(cls)?;
    let mut cur = x.clone();
    for mv in cls.moves() {
        cur = apply_move_unchecked(tri, mv, &cur);
    }
    Ok(cur)
}

/// Reverses the word; flips are involutions, relabels invert as permutations.
/// The homology image inverts when present.
pub fn inverse_class(cls: &FlipWordClass) -> Result<FlipWordClass> {
    let mut moves = Vec::with_capacity(cls.moves.len());
    for mv in cls.moves.iter().rev() {
        moves.push(match mv {
            Move::Flip(e) => Move::Flip(*e),
            Move::Relabel(sigma) => {
                let mut inv = vec![0usize; sigma.len()];
                for (i, &j) in sigma.iter().enumerate() {
                    inv[j] = i;
                }
                Move::Relabel(inv)
            }
        });
    }
    let homology = match &cls.homology {
        Some(h) => Some(h.inverse()?),
        None => None,
    };
    Ok(FlipWordClass { moves, homology })
}

/// How a curve's size is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeMode {
    /// Sum of all coordinates. The default.
    L1,
    /// Largest single coordinate. Same growth exponents; kept for robustness
    /// checks against the size convention.
    MaxCoord,
}

/// Cocycle target whose elements are flip-word mapping classes.
pub struct LaminationTarget {
    tri: Triangulation,
    generators: BTreeMap<String, FlipWordClass>,
    marking: Vec<LamCoords>,
    homology_dim: Option<usize>,
    slack: f64,
    size_mode: SizeMode,
}

impl LaminationTarget {
    /// Validates every generator against the triangulation and measures the
    /// subadditivity slack as twice the largest generator or inverse
    /// displacement over the marking.
    pub fn new(
        tri: Triangulation,
        generators: BTreeMap<String, FlipWordClass>,
        marking: Vec<LamCoords>,
    ) -> Result<Self> {
        Self::with_size_mode(tri, generators, marking, SizeMode::L1)
    }

    pub fn with_size_mode(
        tri: Triangulation,
        generators: BTreeMap<String, FlipWordClass>,
        marking: Vec<LamCoords>,
        size_mode: SizeMode,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::input("lamination target needs at least one generator"));
        }
        if marking.is_empty() {
            return Err(Error::input("lamination target needs a non-empty marking"));
        }
        for (name, cls) in &generators {
            tri.validate_class(cls)
                .map_err(|e| Error::input(format!("generator {name:?}: {e}")))?;
        }
        for x in &marking {
            tri.validate_coords(&x.values)?;
            if x.is_zero() {
                return Err(Error::input("marking curves must be nonzero"));
            }
        }
        // Homology is tracked only when every generator declares it in one
        // dimension; otherwise it is stripped so composition stays total.
        let dims: Vec<Option<usize>> =
            generators.values().map(|g| g.homology.as_ref().map(|h| h.dimension())).collect();
        let homology_dim = match dims.first().copied().flatten() {
            Some(d) if dims.iter().all(|x| *x == Some(d)) => Some(d),
            _ => None,
        };
        let generators = if homology_dim.is_some() {
            generators
        } else {
            generators
                .into_iter()
                .map(|(k, g)| (k, FlipWordClass { moves: g.moves, homology: None }))
                .collect()
        };
        let mut target = LaminationTarget {
            tri,
            generators,
            marking,
            homology_dim,
            slack: 0.0,
            size_mode,
        };
        let marking = Marking::default_for(&target)?;
        let mut max_disp = 0.0f64;
        for cls in target.generators.values() {
            let d = displacement(&target, cls, &marking)?.value;
            let di = displacement(&target, &inverse_class(cls)?, &marking)?.value;
            max_disp = max_disp.max(d).max(di);
        }
        target.slack = 2.0 * max_disp;
        Ok(target)
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.tri
    }

    pub fn size_mode(&self) -> SizeMode {
        self.size_mode
    }

    /// Same surface and generators with a replacement marking; the
    /// subadditivity slack is remeasured against the new curves.
    pub fn with_marking(&self, marking: Vec<LamCoords>) -> Result<LaminationTarget> {
        Self::with_size_mode(self.tri.clone(), self.generators.clone(), marking, self.size_mode)
    }
}

impl CocycleTarget for LaminationTarget {
    type Element = FlipWordClass;
    type Curve = LamCoords;

    fn identity(&self) -> FlipWordClass {
        FlipWordClass::identity(self.homology_dim)
    }

    fn compose(&self, a: &FlipWordClass, b: &FlipWordClass) -> FlipWordClass {
        // Moves run left to right on curves, so the right factor acts first.
        let mut moves = b.moves.clone();
        moves.extend(a.moves.iter().cloned());
        let homology = match (&a.homology, &b.homology) {
            (Some(ha), Some(hb)) if ha.dimension() == hb.dimension() => Some(ha.mul(hb)),
            _ => None,
        };
        FlipWordClass { moves, homology }
    }

    fn inverse(&self, a: &FlipWordClass) -> Result<FlipWordClass> {
        inverse_class(a)
    }

    fn act(&self, g: &FlipWordClass, c: &LamCoords) -> LamCoords {
        let mut cur = c.clone();
        for mv in g.moves() {
            cur = apply_move_unchecked(&self.tri, mv, &cur);
        }
        cur
    }

    fn curve_size(&self, c: &LamCoords) -> Result<BigRational> {
        let size = match self.size_mode {
            SizeMode::L1 => c.l1_size(),
            SizeMode::MaxCoord => c.max_size(),
        };
        if size.is_zero() {
            return Err(Error::input("zero curve has no size"));
        }
        Ok(BigRational::from_integer(size))
    }

    fn generator(&self, name: &str) -> Option<&FlipWordClass> {
        self.generators.get(name)
    }

    fn generator_names(&self) -> Vec<String> {
        self.generators.keys().cloned().collect()
    }

    fn default_marking_curves(&self) -> Vec<LamCoords> {
        self.marking.clone()
    }

    fn subadditivity_slack(&self) -> f64 {
        self.slack
    }
}

/// Once-punctured torus: three edges, two triangles on the same edge triple,
/// every quadrilateral self-glued. Slope (p, q) curves have coordinates
/// (|p|, |q|, |p - q|); the marking holds the slope (1, 0) and (0, 1) curves.
///
/// L and R are the twist generators with homology images [[1,1],[0,1]] and
/// [[1,0],[1,1]]. Each is one flip at edge 2 (trading |p - q| for |p + q|)
/// followed by the edge swap that restores the coordinate convention. Words
/// in L, R and their inverses then grow marking curves at exactly the log
/// spectral radius of the corresponding homology product, which the
/// acceptance oracle checks word by word.
pub fn preset_punctured_torus() -> LaminationTarget {
    let tri = Triangulation::new(
        3,
        vec![[0, 1, 2], [0, 1, 2]],
        vec![[1, 2, 1, 2], [2, 0, 2, 0], [0, 1, 0, 1]],
    )
    .expect("torus triangulation data is valid");
    let l_gen = FlipWordClass::new(
        vec![Move::Flip(2), Move::Relabel(vec![2, 1, 0])],
        Some(RationalMatrix::from_int_rows(&[vec![1, 1], vec![0, 1]]).expect("2x2 entries")),
    );
    let r_gen = FlipWordClass::new(
        vec![Move::Flip(2), Move::Relabel(vec![0, 2, 1])],
        Some(RationalMatrix::from_int_rows(&[vec![1, 0], vec![1, 1]]).expect("2x2 entries")),
    );
    let mut generators = BTreeMap::new();
    generators.insert("L".to_string(), l_gen);
    generators.insert("R".to_string(), r_gen);
    let marking = vec![
        LamCoords::from_ints(&tri, &[1, 0, 1]).expect("slope (1,0) curve"),
        LamCoords::from_ints(&tri, &[0, 1, 1]).expect("slope (0,1) curve"),
    ];
    LaminationTarget::new(tri, generators, marking).expect("preset data is valid")
}
