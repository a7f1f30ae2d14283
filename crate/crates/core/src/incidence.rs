//! Points, lines, collinear triples and incidence counts in ℚ².
//!
//! Collinear triples follow one convention throughout: `T(A, B, C)` counts
//! ordered triples `(p, q, r) ∈ (A×A) × (B×B) × (C×C)` whose orientation
//! determinant vanishes, so any triple with a repeated point is collinear.
//! This is the convention under which
//! `T(A, B, B) = Σ_{a₁,a₂∈A} E^×(B − a₁, B − a₂)` holds exactly.

use std::collections::{BTreeMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{budget, Error, Result};
use crate::lanes::{self, hash_q, inv_q, mul_q, IntVisitor, Lane, HASH_Q};
use crate::rational::Rational;
use crate::sets::{all_fibers, fiber, setop, RSet, SetOpKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: impl Into<Rational>, y: impl Into<Rational>) -> Self {
        Point { x: x.into(), y: y.into() }
    }
}

/// Deduplicated points in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Point>", into = "Vec<Point>")]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: impl IntoIterator<Item = Point>) -> Self {
        let mut points: Vec<Point> = points.into_iter().collect();
        points.sort_unstable();
        points.dedup();
        PointSet { points }
    }

    /// The grid `X × Y`.
    pub fn grid(xs: &RSet, ys: &RSet) -> Self {
        let points = xs.iter().flat_map(|x| ys.iter().map(move |y| Point { x: x.clone(), y: y.clone() })).collect();
        PointSet { points }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }
}

impl From<Vec<Point>> for PointSet {
    fn from(v: Vec<Point>) -> Self {
        PointSet::new(v)
    }
}

impl From<PointSet> for Vec<Point> {
    fn from(p: PointSet) -> Self {
        p.points
    }
}

/// The line `{(x, y) : x − λy = c}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Line {
    pub lambda: Rational,
    pub c: Rational,
}

/// Lines grouped by `λ`. Groups are combined as a disjoint union, so the size
/// of the family is the sum of the group sizes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Line>", into = "Vec<Line>")]
pub struct LineFamily {
    groups: BTreeMap<Rational, Vec<Rational>>,
}

impl LineFamily {
    pub fn new(lines: impl IntoIterator<Item = Line>) -> Self {
        let mut groups: BTreeMap<Rational, Vec<Rational>> = BTreeMap::new();
        for l in lines {
            groups.entry(l.lambda).or_default().push(l.c);
        }
        for cs in groups.values_mut() {
            cs.sort_unstable();
            cs.dedup();
        }
        LineFamily { groups }
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn group(&self, lambda: &Rational) -> &[Rational] {
        self.groups.get(lambda).map_or(&[], Vec::as_slice)
    }

    pub fn lambdas(&self) -> impl Iterator<Item = &Rational> {
        self.groups.keys()
    }

    pub fn lines(&self) -> impl Iterator<Item = Line> + '_ {
        self.groups.iter().flat_map(|(l, cs)| cs.iter().map(move |c| Line { lambda: l.clone(), c: c.clone() }))
    }
}

impl From<Vec<Line>> for LineFamily {
    fn from(v: Vec<Line>) -> Self {
        LineFamily::new(v)
    }
}

impl From<LineFamily> for Vec<Line> {
    fn from(f: LineFamily) -> Self {
        f.lines().collect()
    }
}

// ---------------------------------------------------------------------------
// Collinear triples
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripleAlgorithm {
    /// Slope sorting.
    Auto,
    /// `Σ_{a₁,a₂} #{(b₁−a₁)(c₂−a₂) = (c₁−a₁)(b₂−a₂)}`, `O(|A|²|B||C|)`.
    EnergyForm,
    /// Direction grouping around every point of `A×A`.
    SlopeSort,
    /// Orientation determinant over every triple; oracle only.
    Determinant,
}

impl std::str::FromStr for TripleAlgorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(TripleAlgorithm::Auto),
            "energy" | "energy-form" => Ok(TripleAlgorithm::EnergyForm),
            "slope" | "slope-sort" => Ok(TripleAlgorithm::SlopeSort),
            "determinant" | "brute" => Ok(TripleAlgorithm::Determinant),
            other => Err(Error::Invalid(format!("unknown triple algorithm {other:?}"))),
        }
    }
}

/// Default per-set size budget for triple counting.
pub const DEFAULT_TRIPLE_BUDGET: usize = 128;
const DETERMINANT_BUDGET: usize = 12;

pub fn collinear_triples(a: &RSet, b: &RSet, c: &RSet) -> Result<BigUint> {
    collinear_triples_with(a, b, c, TripleAlgorithm::Auto, DEFAULT_TRIPLE_BUDGET)
}

/// `T(A) = T(A, A, A)` by slope sorting.
pub fn collinear_triples_single(a: &RSet) -> Result<BigUint> {
    collinear_triples_with(a, a, a, TripleAlgorithm::SlopeSort, DEFAULT_TRIPLE_BUDGET)
}

pub fn collinear_triples_with(a: &RSet, b: &RSet, c: &RSet, algo: TripleAlgorithm, max_size: usize) -> Result<BigUint> {
    for s in [a, b, c] {
        s.require_nonempty()?;
    }
    let largest = a.len().max(b.len()).max(c.len());
    let algo = match algo {
        TripleAlgorithm::Auto => TripleAlgorithm::SlopeSort,
        other => other,
    };
    let limit = if algo == TripleAlgorithm::Determinant { DETERMINANT_BUDGET.min(max_size) } else { max_size };
    budget("collinear-triple set size", largest as u128, limit as u128)?;
    let sets = [a.elements(), b.elements(), c.elements()];
    Ok(match algo {
        TripleAlgorithm::EnergyForm => lanes::dispatch_int(&sets, EnergyForm),
        TripleAlgorithm::SlopeSort => slope_sort(a, b, c),
        TripleAlgorithm::Determinant => lanes::dispatch_int(&sets, Determinant),
        TripleAlgorithm::Auto => unreachable!(),
    })
}

struct EnergyForm;

impl IntVisitor for EnergyForm {
    type Out = BigUint;
    fn visit<T: Lane>(self, sets: Vec<Vec<T>>) -> BigUint {
        let (a, b, c) = (&sets[0], &sets[1], &sets[2]);
        let same = b == c;
        let products = |xs: &[T], x0: &T, ys: &[T], y0: &T| -> Vec<(T, u64)> {
            let mut keys = Vec::with_capacity(xs.len() * ys.len());
            for x in xs {
                let dx = x.clone() - x0.clone();
                for y in ys {
                    keys.push(dx.clone() * (y.clone() - y0.clone()));
                }
            }
            lanes::runs(&mut keys)
        };
        let pairs: Vec<(usize, usize)> = (0..a.len()).flat_map(|i| (0..a.len()).map(move |j| (i, j))).collect();
        let total: u128 = pairs
            .par_iter()
            .map(|&(i, j)| {
                let (a1, a2) = (&a[i], &a[j]);
                // (b₁−a₁)(c₂−a₂) = (c₁−a₁)(b₂−a₂)
                let left = products(b, a1, c, a2);
                if same {
                    left.iter().map(|(_, n)| (*n as u128) * (*n as u128)).sum::<u128>()
                } else {
                    let right = products(c, a1, b, a2);
                    merge_inner(&left, &right)
                }
            })
            .sum();
        BigUint::from(total)
    }
}

fn merge_inner<K: Ord>(x: &[(K, u64)], y: &[(K, u64)]) -> u128 {
    let (mut i, mut j, mut acc) = (0, 0, 0u128);
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += x[i].1 as u128 * y[j].1 as u128;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

// Slope sorting. Around each `p ∈ A×A` the other points are keyed by the
// slope `d₂/d₁` of `q − p`, hashed into `F_q` (see the lanes module) through
// the homomorphism `n/m ↦ n·m⁻¹`. Equal slopes share a
// hash; every run of equal hashes is then checked exactly, so collisions only
// cost a re-sort of the affected run.

/// Hash of the vertical direction, outside `[0, q)`.
const VERTICAL: u64 = HASH_Q;

/// Row-major table of `y − x` for `x ∈ X`, `y ∈ Y`.
struct Differences {
    cols: usize,
    exact: Vec<Rational>,
    /// Differences of the integer image when it fits; slopes compare by
    /// cross-multiplication.
    ints: Option<Vec<i128>>,
    small: Option<Vec<(i128, i128)>>,
    /// `h(d)`, or `NO_HASH` when `q` divides the denominator of `d`.
    hash: Vec<u64>,
    /// `h(d)⁻¹`, or `NO_HASH` when `h(d)` is not a unit.
    inv: Vec<u64>,
}

const NO_HASH: u64 = u64::MAX;

/// Key shared by the slopes whose reduced denominator is divisible by `q`.
const NON_UNIT: u64 = HASH_Q + 1;

impl Differences {
    fn new(xs: &RSet, ys: &RSet) -> Self {
        let exact: Vec<Rational> = xs.iter().flat_map(|x| ys.iter().map(move |y| y - x)).collect();
        let image = lanes::integer_image(&[xs.elements(), ys.elements()]);
        let ints = (image.iter().flatten().all(|v| v.bits() <= 126)).then(|| {
            let conv = |v: &[BigInt]| -> Vec<i128> { v.iter().map(|x| x.to_i128().expect("fits")).collect() };
            let (ix, iy) = (conv(&image[0]), conv(&image[1]));
            ix.iter().flat_map(|x| iy.iter().map(move |y| y - x)).collect()
        });
        let small = if ints.is_some() { None } else { lanes::small_parts(&exact) };
        let (mut hash, mut inv) = (Vec::with_capacity(exact.len()), Vec::with_capacity(exact.len()));
        for d in &exact {
            let h = hash_q(d);
            hash.push(h.unwrap_or(NO_HASH));
            inv.push(h.filter(|&h| h != 0).map_or(NO_HASH, inv_q));
        }
        Differences { cols: ys.len(), exact, ints, small, hash, inv }
    }

    /// `h(d₂/d₁)` for `d₁ ≠ 0`. When `h(d₁)` is a unit this is
    /// `h(d₂)·h(d₁)⁻¹`; otherwise the slope is hashed from its reduced form.
    fn slope_key(&self, i1: usize, i2: usize) -> u64 {
        match (self.inv[i1], self.hash[i2]) {
            (NO_HASH, _) | (_, NO_HASH) => hash_q(&(&self.exact[i2] / &self.exact[i1])).unwrap_or(NON_UNIT),
            (inv, h) => mul_q(h, inv),
        }
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }
}

/// A point `q` seen from `p`: indices of `d₁ = q.x − p.x`, `d₂ = q.y − p.y`.
#[derive(Clone, Copy)]
struct Ray {
    d1: u32,
    d2: u32,
    from_c: bool,
}

fn same_slope(diffs: &Differences, r: Ray, s: Ray) -> bool {
    if let Some(iv) = &diffs.ints {
        // d₂/d₁ = e₂/e₁  ⇔  d₂e₁ = e₂d₁ for non-zero d₁, e₁.
        let (d1, d2, e1, e2) = (iv[r.d1 as usize], iv[r.d2 as usize], iv[s.d1 as usize], iv[s.d2 as usize]);
        return lanes::cross_equal(d2, e1, e2, d1);
    }
    if let Some(sm) = &diffs.small {
        let ((n1, m1), (n2, m2)) = (sm[r.d1 as usize], sm[r.d2 as usize]);
        let ((o1, l1), (o2, l2)) = (sm[s.d1 as usize], sm[s.d2 as usize]);
        // n₂/m₂ · o₁/l₁ = o₂/l₂ · n₁/m₁
        if let Some(eq) = lanes::products_equal([n2, o1, l2, m1], [o2, n1, m2, l1]) {
            return eq;
        }
    }
    slope(diffs, r) == slope(diffs, s)
}

fn slope(diffs: &Differences, r: Ray) -> Option<Rational> {
    let d1 = &diffs.exact[r.d1 as usize];
    (!d1.is_zero()).then(|| &diffs.exact[r.d2 as usize] / d1)
}

/// `Σ_dir cnt_B(dir)·cnt_C(dir)` over the rays of one hash run.
fn count_run(diffs: &Differences, run: &mut [(u64, Ray)], same: bool) -> u128 {
    let tally = |rays: &[(u64, Ray)]| {
        let c = rays.iter().filter(|(_, r)| r.from_c).count() as u128;
        let b = rays.len() as u128 - c;
        if same {
            b * b
        } else {
            b * c
        }
    };
    let head = run[0].1;
    let vertical = diffs.exact[head.d1 as usize].is_zero();
    if vertical || run[1..].iter().all(|(_, r)| same_slope(diffs, head, *r)) {
        return tally(run);
    }
    run.sort_by_cached_key(|(_, r)| slope(diffs, *r));
    let mut total = 0;
    let mut i = 0;
    while i < run.len() {
        let key = slope(diffs, run[i].1);
        let mut j = i + 1;
        while j < run.len() && slope(diffs, run[j].1) == key {
            j += 1;
        }
        total += tally(&run[i..j]);
        i = j;
    }
    total
}

fn slope_sort(a: &RSet, b: &RSet, c: &RSet) -> BigUint {
    let same = b == c;
    let ys = b.union(c);
    let diffs = Differences::new(a, &ys);
    let index =
        |s: &RSet| -> Vec<usize> { s.iter().map(|v| ys.elements().binary_search(v).expect("member")).collect() };
    let grids: Vec<(Vec<usize>, bool)> =
        if same { vec![(index(b), false)] } else { vec![(index(b), false), (index(c), true)] };
    let n = a.len();
    let (nb, nc) = ((b.len() * b.len()) as u128, (c.len() * c.len()) as u128);
    let total: u128 = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (px, py) = (idx / n, idx % n);
            let mut keys: Vec<(u64, Ray)> = Vec::with_capacity((nb + if same { 0 } else { nc }) as usize);
            let mut coincident = [0u128; 2];
            for (cols, from_c) in &grids {
                for &qx in cols {
                    let i1 = diffs.at(px, qx);
                    let z1 = diffs.exact[i1].is_zero();
                    for &qy in cols {
                        let i2 = diffs.at(py, qy);
                        let h = match (z1, diffs.exact[i2].is_zero()) {
                            (true, true) => {
                                coincident[*from_c as usize] += 1;
                                continue;
                            }
                            (true, false) => VERTICAL,
                            _ => diffs.slope_key(i1, i2),
                        };
                        keys.push((h, Ray { d1: i1 as u32, d2: i2 as u32, from_c: *from_c }));
                    }
                }
            }
            keys.sort_unstable_by_key(|k| k.0);
            let mut through = 0u128;
            let mut i = 0;
            while i < keys.len() {
                let mut j = i + 1;
                while j < keys.len() && keys[j].0 == keys[i].0 {
                    j += 1;
                }
                through += if j - i == 1 { same as u128 } else { count_run(&diffs, &mut keys[i..j], same) };
                i = j;
            }
            let (zb, zc) = if same { (coincident[0], coincident[0]) } else { (coincident[0], coincident[1]) };
            through + zb * nc + zc * nb - zb * zc
        })
        .sum();
    BigUint::from(total)
}

struct Determinant;

impl IntVisitor for Determinant {
    type Out = BigUint;
    fn visit<T: Lane>(self, sets: Vec<Vec<T>>) -> BigUint {
        let grid =
            |s: &[T]| -> Vec<(T, T)> { s.iter().flat_map(|x| s.iter().map(move |y| (x.clone(), y.clone()))).collect() };
        let (pa, pb, pc) = (grid(&sets[0]), grid(&sets[1]), grid(&sets[2]));
        let mut count = 0u64;
        for p in &pa {
            for q in &pb {
                for r in &pc {
                    let det = (q.0.clone() - p.0.clone()) * (r.1.clone() - p.1.clone())
                        - (r.0.clone() - p.0.clone()) * (q.1.clone() - p.1.clone());
                    if det.is_zero() {
                        count += 1;
                    }
                }
            }
        }
        BigUint::from(count)
    }
}

/// `T(A, B, B)` through the energy identity with the energies computed by the
/// multiplicative-energy engine: `Σ_{a₁,a₂∈A} E^×(B − a₁, B − a₂)`, where
/// each energy counts solutions of `x₁y₁ = x₂y₂` so translates containing zero
/// are handled without special cases.
pub fn triples_via_energies(a: &RSet, b: &RSet) -> Result<BigUint> {
    a.require_nonempty()?;
    b.require_nonempty()?;
    let translates: Vec<RSet> =
        a.iter().map(|x| crate::sets::affine_image(b, &Rational::one(), &-x)).collect::<Result<_>>()?;
    let mut total = BigUint::zero();
    for x in &translates {
        for y in &translates {
            total += crate::energies::product_equation_count(x, y)?;
        }
    }
    Ok(total)
}

/// Number of `(a₁, a₂, b₁, b₂, c₁, c₂)` with
/// `(c₁−a₁)/(b₁−a₁) = (c₂−a₂)/(b₂−a₂)`, read as an equality of points of the
/// projective line (`x/0 = ∞` for `x ≠ 0`); a side of the form `0/0` is
/// undefined and never satisfies the equation.
pub fn cross_ratio_count(a: &RSet, b: &RSet, c: &RSet) -> Result<BigUint> {
    for s in [a, b, c] {
        s.require_nonempty()?;
    }
    budget("cross-ratio triples", (a.len() * b.len() * c.len()) as u128, 1 << 24)?;
    // Both sides range over the same (A, B, C) triples, so the count is Σ_v m(v)².
    let mut keys: Vec<(Rational, bool)> = Vec::new();
    for x in a {
        for y in b {
            let den = y - x;
            for z in c {
                let num = z - x;
                match (num.is_zero(), den.is_zero()) {
                    (true, true) => {}
                    (_, true) => keys.push((Rational::zero(), true)),
                    _ => keys.push((num / &den, false)),
                }
            }
        }
    }
    let counts = lanes::run_lengths(&mut keys);
    Ok(lanes::power_sum(&counts, 2))
}

/// The degenerate contribution in `T(A,B,C) = cross_ratio_count + correction`:
/// each side is `0/0` on `|A∩B∩C|·|A||B||C|` tuples, both on `|A∩B∩C|²`.
pub fn cross_ratio_correction(a: &RSet, b: &RSet, c: &RSet) -> BigUint {
    let i = a.intersection(b).intersection(c).len() as u128;
    let abc = (a.len() * b.len() * c.len()) as u128;
    BigUint::from(2 * i * abc - i * i)
}

// ---------------------------------------------------------------------------
// Incidences and the Q_λ construction
// ---------------------------------------------------------------------------

/// `{x − λy : (x, y) ∈ P}`.
pub fn project(lambda: &Rational, points: &PointSet) -> RSet {
    RSet::new(points.points().iter().map(|p| &p.x - &(lambda * &p.y)))
}

/// `𝓘(P, L)`: pairs `(p, l)` with `p ∈ l`, summed over the λ-groups.
pub fn incidences(points: &PointSet, lines: &LineFamily) -> Result<u128> {
    let mut total = 0u128;
    for lambda in lines.lambdas() {
        total += group_incidences(points, lambda, lines.group(lambda));
    }
    Ok(total)
}

fn group_incidences(points: &PointSet, lambda: &Rational, cs: &[Rational]) -> u128 {
    // Scaled by the lcm of all denominators: x − λy = c  ⇔  d·X − n·Y = d·C.
    let xs: Vec<Rational> = points.points().iter().map(|p| p.x.clone()).collect();
    let ys: Vec<Rational> = points.points().iter().map(|p| p.y.clone()).collect();
    let ints = lanes::integer_image(&[&xs, &ys, cs]);
    let (n, d) = (lambda.numer(), lambda.denom());
    let coord_bits = ints.iter().flatten().map(|v| v.bits()).max().unwrap_or(0);
    let lam_bits = n.bits().max(d.bits());
    if coord_bits + lam_bits + 2 <= 126 {
        let (n, d) = (n.to_i128().expect("fits"), d.to_i128().expect("fits"));
        let conv = |v: &[BigInt]| -> Vec<i128> { v.iter().map(|x| x.to_i128().expect("fits")).collect() };
        let (xs, ys, cs) = (conv(&ints[0]), conv(&ints[1]), conv(&ints[2]));
        let targets: HashSet<i128> = cs.iter().map(|c| d * c).collect();
        xs.iter().zip(&ys).filter(|(x, y)| targets.contains(&(d * *x - n * *y))).count() as u128
    } else {
        let targets: HashSet<BigInt> = ints[2].iter().map(|c| d * c).collect();
        ints[0].iter().zip(&ints[1]).filter(|(x, y)| targets.contains(&(d * *x - n * *y))).count() as u128
    }
}

/// `𝓘(X × Y, L)`. Along a line `x − λy = c` the values `c + λy` are monotone
/// in `y`, so each line costs one merge against `X`.
pub fn incidences_grid(xs: &RSet, ys: &RSet, lines: &LineFamily) -> u128 {
    let mut total = 0u128;
    for lambda in lines.lambdas() {
        let cs = lines.group(lambda);
        let ints = lanes::integer_image(&[xs.elements(), ys.elements(), cs]);
        let coord_bits = ints.iter().flatten().map(|v| v.bits()).max().unwrap_or(0);
        let bits = coord_bits + lambda.numer().bits().max(lambda.denom().bits()) + 2;
        total += if bits <= 63 {
            grid_group::<i64>(&ints, lambda)
        } else if bits <= 127 {
            grid_group::<i128>(&ints, lambda)
        } else {
            grid_group::<BigInt>(&ints, lambda)
        };
    }
    total
}

fn grid_group<T: Lane>(ints: &[Vec<BigInt>], lambda: &Rational) -> u128 {
    let conv = |v: &[BigInt]| -> Vec<T> { v.iter().map(T::from_big).collect() };
    let (n, d) = (T::from_big(lambda.numer()), T::from_big(lambda.denom()));
    // d > 0 keeps the order of X; the order of Y flips when n < 0.
    let targets: Vec<T> = conv(&ints[0]).into_iter().map(|x| x * d.clone()).collect();
    let mut ys: Vec<T> = conv(&ints[1]).into_iter().map(|y| y * n.clone()).collect();
    if n.is_negative() {
        ys.reverse();
    }
    let mut total = 0u128;
    if n.is_zero() {
        // Vertical lines x = c meet every row.
        let hits = conv(&ints[2]).into_iter().filter(|c| targets.binary_search(&(c.clone() * d.clone())).is_ok());
        return hits.count() as u128 * ys.len() as u128;
    }
    for c in conv(&ints[2]) {
        let base = c * d.clone();
        let (mut i, mut j) = (0, 0);
        while i < targets.len() && j < ys.len() {
            let v = base.clone() + ys[j].clone();
            match targets[i].cmp(&v) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    total += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QLambda {
    pub points: PointSet,
    /// False when `λ ∉ A/A`; the construction is still defined (and empty).
    pub lambda_in_quotient_set: bool,
}

/// `Q_λ = A × A_λ − Δ_λ(A_λ) = {(a − λt, s − t) : a ∈ A, s, t ∈ A_λ}`.
pub fn q_lambda(a: &RSet, lambda: &Rational) -> Result<QLambda> {
    a.require_nonempty()?;
    let fib = fiber(a, lambda)?;
    let mut pts = Vec::with_capacity(a.len() * fib.len() * fib.len());
    for t in &fib {
        let lt = lambda * t;
        for x in a {
            let px = x - &lt;
            for s in &fib {
                pts.push(Point { x: px.clone(), y: s - t });
            }
        }
    }
    Ok(QLambda { points: PointSet::new(pts), lambda_in_quotient_set: !fib.is_empty() })
}

/// For every `λ ∈ Λ`, one line `x − λy = c` per value `c` of the projection of
/// the λ-target.
pub fn build_line_family(lambdas: &RSet, targets: &BTreeMap<Rational, PointSet>) -> Result<LineFamily> {
    let mut lines = Vec::new();
    for l in lambdas {
        let target = targets.get(l).ok_or_else(|| Error::Invalid(format!("no target point set for λ = {l}")))?;
        lines.extend(project(l, target).iter().map(|c| Line { lambda: l.clone(), c: c.clone() }));
    }
    Ok(LineFamily::new(lines))
}

/// The point/line configuration built from a set `A` with `0 ∉ A`:
/// `P = D × D` for `D = A − A`, and `L = ⊔_{λ∈A/A} L_λ` where `L_λ` are the
/// lines `x − λy = c` meeting `Q_λ`.
#[derive(Debug, Clone)]
pub struct QuotientConfiguration {
    pub differences: RSet,
    pub lines: LineFamily,
    /// Σ_λ |Q_λ|, a lower bound for `𝓘(P, L)`.
    pub q_total: u128,
}

impl QuotientConfiguration {
    /// `P = D × D`, materialized.
    pub fn points(&self) -> PointSet {
        PointSet::grid(&self.differences, &self.differences)
    }

    pub fn point_count(&self) -> usize {
        self.differences.len().pow(2)
    }

    /// `𝓘(P, L)` without materializing `P`.
    pub fn incidences(&self) -> u128 {
        incidences_grid(&self.differences, &self.differences, &self.lines)
    }
}

pub fn quotient_configuration(a: &RSet) -> Result<QuotientConfiguration> {
    a.require_nonzero()?;
    let d = setop(SetOpKind::Difference, a, a)?;
    budget("difference grid points", (d.len() as u128).pow(2), 1 << 22)?;
    let mut targets = BTreeMap::new();
    let mut q_total = 0u128;
    for (lam, _) in all_fibers(a)? {
        let q = q_lambda(a, &lam)?;
        q_total += q.points.len() as u128;
        targets.insert(lam, q.points);
    }
    let lambdas = RSet::new(targets.keys().cloned());
    let lines = build_line_family(&lambdas, &targets)?;
    Ok(QuotientConfiguration { differences: d, lines, q_total })
}
