//! Coarse geometry on a group: finite subsets, r-boundaries, Følner
//! families and their growth tables.
//!
//! All ratios (σ, β, densities) are computed in exact rational arithmetic;
//! floats only appear when formatting output.

use crate::cayley::Cayley;
use crate::error::{Error, Result};
use crate::func::BoundedFunction;
use crate::group::{Element, GroupFamily, GroupSpec};
use crate::scalar::{count_ratio, csv_value, Scalar};
use num::rational::BigRational;
use serde_json::{json, Value};

/// Computations that scan "all of G" are restricted to the ball B_W(e).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Window {
    pub radius: u64,
}

impl Window {
    pub fn new(radius: u64) -> Window {
        Window { radius }
    }
}

/// A finite set of group elements, stored sorted in the canonical
/// (lexicographic) element order with duplicates removed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteSubset {
    spec: GroupSpec,
    elems: Vec<Element>,
}

impl FiniteSubset {
    pub fn new(spec: GroupSpec, mut elems: Vec<Element>) -> Result<FiniteSubset> {
        for e in &elems {
            spec.validate(e)?;
        }
        elems.sort();
        elems.dedup();
        Ok(FiniteSubset { spec, elems })
    }

    /// Elements must already be sorted and deduped; checked in debug builds.
    pub fn from_sorted(spec: GroupSpec, elems: Vec<Element>) -> FiniteSubset {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        FiniteSubset { spec, elems }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.elems.binary_search(g).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Element> {
        self.elems.iter()
    }

    pub fn as_slice(&self) -> &[Element] {
        &self.elems
    }

    pub fn union(&self, other: &FiniteSubset) -> FiniteSubset {
        let mut elems = self.elems.clone();
        elems.extend_from_slice(&other.elems);
        elems.sort();
        elems.dedup();
        FiniteSubset { spec: self.spec.clone(), elems }
    }

    pub fn difference(&self, other: &FiniteSubset) -> FiniteSubset {
        let elems = self.elems.iter().filter(|e| !other.contains(e)).copied().collect();
        FiniteSubset { spec: self.spec.clone(), elems }
    }

    pub fn intersection(&self, other: &FiniteSubset) -> FiniteSubset {
        let elems = self.elems.iter().filter(|e| other.contains(e)).copied().collect();
        FiniteSubset { spec: self.spec.clone(), elems }
    }

    pub fn is_subset_of(&self, other: &FiniteSubset) -> bool {
        self.elems.iter().all(|e| other.contains(e))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.elems.iter().map(|e| self.spec.element_to_json(e)).collect())
    }

    pub fn from_json(spec: &GroupSpec, v: &Value) -> Result<FiniteSubset> {
        let arr = v.as_array().ok_or_else(|| Error::Invalid("subset must be a JSON array".into()))?;
        let elems = arr.iter().map(|e| spec.element_from_json(e)).collect::<Result<Vec<_>>>()?;
        FiniteSubset::new(spec.clone(), elems)
    }
}

/// ∂_r(S) = { g : 0 < d(g, S) ≤ r }, computed exactly as (⋃_{s∈S} B_r(s)) ∖ S.
/// No window is involved: the union is finite data.
pub fn r_boundary(cayley: &mut Cayley, s: &FiniteSubset, r: u64) -> Result<FiniteSubset> {
    if s.is_empty() {
        return Err(Error::EmptySet("r_boundary needs a nonempty set"));
    }
    if r == 0 {
        return Ok(FiniteSubset::from_sorted(s.spec.clone(), Vec::new()));
    }
    let ball = cayley.ball(r)?;
    let mut out: Vec<Element> = Vec::with_capacity(s.len() * ball.len() / 2);
    let spec = s.spec.clone();
    for base in s.iter() {
        for g in &ball {
            out.push(spec.compose(base, g)?);
        }
    }
    out.sort();
    out.dedup();
    out.retain(|g| !s.contains(g));
    Ok(FiniteSubset::from_sorted(spec, out))
}

/// Preset Følner families.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FolnerKind {
    /// S_j = {0..j-1}^d on a lattice (j ≥ 1).
    Cubes,
    /// S_j = B_j(e) on any model.
    Balls,
    /// S_j = {(a,b,c) : |a|,|b| ≤ j, |c| ≤ j²} on Heis₃.
    HeisBoxes,
    /// S_j = B_{3^{j²}}(e), carrying star radii R(j) = 3^{(j-1)²}.
    SuperGeometricBalls,
}

impl FolnerKind {
    pub fn parse(s: &str) -> Result<FolnerKind> {
        match s {
            "cubes" => Ok(FolnerKind::Cubes),
            "balls" => Ok(FolnerKind::Balls),
            "heis_boxes" => Ok(FolnerKind::HeisBoxes),
            "supergeo" => Ok(FolnerKind::SuperGeometricBalls),
            other => Err(Error::Invalid(format!("unknown Følner family {other:?}"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FolnerKind::Cubes => "cubes",
            FolnerKind::Balls => "balls",
            FolnerKind::HeisBoxes => "heis_boxes",
            FolnerKind::SuperGeometricBalls => "supergeo",
        }
    }
}

/// A Følner family over a fixed group model.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FolnerFamily {
    spec: GroupSpec,
    pub kind: FolnerKind,
    /// S_{j-1} ⊆ S_j for all j.
    pub monotone: bool,
    /// ⋃_j S_j = G.
    pub exhausting: bool,
}

fn pow3_sq(j: u64) -> Result<u64> {
    let e = j.checked_mul(j).ok_or(Error::Overflow("exponent"))?;
    let e32 = u32::try_from(e).map_err(|_| Error::Overflow("exponent"))?;
    3u64.checked_pow(e32)
        .ok_or_else(|| Error::CapExceeded(format!("super-geometric radius 3^{e} overflows")))
}

impl FolnerFamily {
    pub fn new(spec: GroupSpec, kind: FolnerKind) -> Result<FolnerFamily> {
        match (kind, spec.family()) {
            (FolnerKind::Cubes, GroupFamily::IntLattice { .. }) => {}
            (FolnerKind::HeisBoxes, GroupFamily::Heisenberg3) => {}
            (FolnerKind::Balls | FolnerKind::SuperGeometricBalls, _) => {}
            _ => {
                return Err(Error::IncompatibleFamily(format!(
                    "{} family is not defined on {}",
                    kind.label(),
                    spec.label()
                )))
            }
        }
        let (monotone, exhausting) = match kind {
            FolnerKind::Cubes => (true, false),
            _ => (true, true),
        };
        Ok(FolnerFamily { spec, kind, monotone, exhausting })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn label(&self) -> String {
        format!("{}@{}", self.kind.label(), self.spec.label())
    }

    fn cubes_ok(&self, j: u64) -> Result<i64> {
        if j == 0 {
            return Err(Error::EmptySet("cube family starts at j = 1"));
        }
        i64::try_from(j).map_err(|_| Error::Overflow("index"))
    }

    /// |S_j|, exact and closed-form where possible.
    pub fn size(&self, cayley: &mut Cayley, j: u64) -> Result<u64> {
        match self.kind {
            FolnerKind::Cubes => {
                self.cubes_ok(j)?;
                let d = self.spec.lattice_dim().unwrap() as u32;
                j.checked_pow(d).ok_or(Error::Overflow("cube size"))
            }
            FolnerKind::Balls => cayley.ball_size(j),
            FolnerKind::HeisBoxes => {
                let side = 2 * j + 1;
                let height = 2 * j * j + 1;
                side.checked_mul(side)
                    .and_then(|s| s.checked_mul(height))
                    .ok_or(Error::Overflow("box size"))
            }
            FolnerKind::SuperGeometricBalls => cayley.ball_size(pow3_sq(j)?),
        }
    }

    /// Exact membership test, no enumeration.
    pub fn member(&self, cayley: &mut Cayley, j: u64, g: &Element) -> Result<bool> {
        self.spec.validate(g)?;
        match self.kind {
            FolnerKind::Cubes => {
                let j = self.cubes_ok(j)?;
                Ok(g.flat_coords().iter().all(|&c| 0 <= c && c < j))
            }
            FolnerKind::Balls => cayley.in_ball(g, j),
            FolnerKind::HeisBoxes => {
                let c = g.flat_coords();
                let j = i64::try_from(j).map_err(|_| Error::Overflow("index"))?;
                Ok(c[0].abs() <= j && c[1].abs() <= j && c[2].abs() <= j * j)
            }
            FolnerKind::SuperGeometricBalls => cayley.in_ball(g, pow3_sq(j)?),
        }
    }

    /// Streams the elements of S_j in canonical order.
    pub fn for_each(&self, cayley: &mut Cayley, j: u64, f: &mut dyn FnMut(&Element)) -> Result<()> {
        match self.kind {
            FolnerKind::Cubes => {
                let j = self.cubes_ok(j)?;
                let d = self.spec.lattice_dim().unwrap();
                let mut coords = vec![0i64; d];
                stream_cube(d, j, 0, &mut coords, f);
                Ok(())
            }
            FolnerKind::Balls => {
                for g in cayley.ball(j)? {
                    f(&g);
                }
                Ok(())
            }
            FolnerKind::HeisBoxes => {
                let j = i64::try_from(j).map_err(|_| Error::Overflow("index"))?;
                for a in -j..=j {
                    for b in -j..=j {
                        for c in -(j * j)..=(j * j) {
                            f(&Element::heis(a, b, c));
                        }
                    }
                }
                Ok(())
            }
            FolnerKind::SuperGeometricBalls => {
                for g in cayley.ball(pow3_sq(j)?)? {
                    f(&g);
                }
                Ok(())
            }
        }
    }

    /// S_j as an explicit subset.
    pub fn set(&self, cayley: &mut Cayley, j: u64) -> Result<FiniteSubset> {
        let mut elems = Vec::new();
        self.for_each(cayley, j, &mut |g| elems.push(*g))?;
        elems.sort();
        Ok(FiniteSubset::from_sorted(self.spec.clone(), elems))
    }

    /// |∂_1(S_j)|, exact. Metric families use sphere counts; cubes use the
    /// face count 2d·j^{d-1}; anything else falls back to the generic route.
    pub fn boundary_size(&self, cayley: &mut Cayley, j: u64) -> Result<u64> {
        match self.kind {
            FolnerKind::Balls => cayley.sphere_size(j + 1),
            FolnerKind::SuperGeometricBalls => cayley.sphere_size(pow3_sq(j)? + 1),
            FolnerKind::Cubes => {
                self.cubes_ok(j)?;
                let d = self.spec.lattice_dim().unwrap() as u32;
                let face = j.checked_pow(d - 1).ok_or(Error::Overflow("face count"))?;
                (2 * d as u64).checked_mul(face).ok_or(Error::Overflow("boundary size"))
            }
            FolnerKind::HeisBoxes => {
                let s = self.set(cayley, j)?;
                Ok(r_boundary(cayley, &s, 1)?.len() as u64)
            }
        }
    }

    /// σ_S(j) = |∂_1 S_j| / |S_j| as an exact rational.
    pub fn sigma(&self, cayley: &mut Cayley, j: u64) -> Result<BigRational> {
        Ok(count_ratio(self.boundary_size(cayley, j)?, self.size(cayley, j)?))
    }

    /// R(j) for condition (*); only the super-geometric family carries one.
    pub fn star_radius(&self, j: u64) -> Result<Option<u64>> {
        match self.kind {
            FolnerKind::SuperGeometricBalls => {
                if j == 0 {
                    return Ok(Some(0));
                }
                let e = (j - 1) * (j - 1);
                let e32 = u32::try_from(e).map_err(|_| Error::Overflow("exponent"))?;
                Ok(Some(3u64.checked_pow(e32).ok_or_else(|| {
                    Error::CapExceeded(format!("star radius 3^{e} overflows"))
                })?))
            }
            _ => Ok(None),
        }
    }

    /// A safe upper bound on max word length over S_j, for window sizing.
    pub fn radius_hint(&self, j: u64) -> Result<u64> {
        Ok(match self.kind {
            FolnerKind::Cubes => {
                let d = self.spec.lattice_dim().unwrap() as u64;
                j.saturating_sub(1) * d
            }
            FolnerKind::Balls => j,
            // |(a,b,c)| ≤ |a| + |b| + |z^c| and |z^{j²}| ≤ 4j via [x^j, y^j].
            FolnerKind::HeisBoxes => 10 * j + 8,
            FolnerKind::SuperGeometricBalls => pow3_sq(j)?,
        })
    }
}

fn stream_cube(d: usize, j: i64, idx: usize, coords: &mut Vec<i64>, f: &mut dyn FnMut(&Element)) {
    if idx == d {
        f(&Element::lattice(coords));
        return;
    }
    for v in 0..j {
        coords[idx] = v;
        stream_cube(d, j, idx + 1, coords, f);
    }
    coords[idx] = 0;
}

/// One row of a growth table. `sigma` and `beta` are ratios of exact counts;
/// the scalar type only matters for chain sums.
#[derive(Clone, Debug)]
pub struct GrowthRow<S> {
    pub j: u64,
    pub size: u64,
    pub boundary: u64,
    pub sigma: S,
    pub chain_sum: S,
    pub beta: S,
    pub beta_over_sigma: S,
}

#[derive(Clone, Debug)]
pub struct GrowthTable<S> {
    pub group: String,
    pub family: String,
    pub chain: Option<String>,
    pub rows: Vec<GrowthRow<S>>,
    /// Set when enumeration hit a cap before exhausting the index list.
    pub truncated_at: Option<u64>,
}

pub const GROWTH_CSV_HEADER: &str = "j,size,boundary,sigma,chain_sum,beta,beta_over_sigma";

impl<S: Scalar> GrowthTable<S> {
    pub fn sigma_values(&self) -> Vec<S> {
        self.rows.iter().map(|r| r.sigma.clone()).collect()
    }

    pub fn beta_values(&self) -> Vec<S> {
        self.rows.iter().map(|r| r.beta.clone()).collect()
    }

    pub fn indices(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.j).collect()
    }

    /// Indices where σ fails to decrease relative to the previous row.
    pub fn non_monotone_sigma(&self) -> Vec<u64> {
        self.rows
            .windows(2)
            .filter(|w| w[1].sigma >= w[0].sigma)
            .map(|w| w[1].j)
            .collect()
    }

    /// CSV body under the fixed header; comment lines are prefixed with '#'.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(GROWTH_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.j,
                r.size,
                r.boundary,
                csv_value(&r.sigma),
                csv_value(&r.chain_sum),
                csv_value(&r.beta),
                csv_value(&r.beta_over_sigma)
            ));
        }
        if let Some(t) = self.truncated_at {
            out.push_str(&format!("# truncated at j={t} (enumeration cap)\n"));
        }
        out
    }
}

/// Index grids for profiles.
pub mod indices {
    /// 1..=j_max.
    pub fn dense(j_max: u64) -> Vec<u64> {
        (1..=j_max).collect()
    }

    /// Geometric grid ending exactly at j_max (ratio ~2), ascending.
    pub fn geometric(j_max: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut j = j_max;
        while j >= 1 {
            out.push(j);
            if j == 1 {
                break;
            }
            j /= 2;
        }
        out.reverse();
        out.dedup();
        out
    }

    /// Dense below the cutoff, geometric above it.
    pub fn auto(j_max: u64, dense_cutoff: u64) -> Vec<u64> {
        if j_max <= dense_cutoff {
            dense(j_max)
        } else {
            geometric(j_max)
        }
    }
}

/// Growth table over the given indices: σ always, β for the optional chain.
/// Hitting an enumeration cap truncates the table and records where.
pub fn growth_table<S: Scalar>(
    cayley: &mut Cayley,
    family: &FolnerFamily,
    chain: Option<&BoundedFunction<S>>,
    idx: &[u64],
) -> Result<GrowthTable<S>> {
    let mut rows = Vec::with_capacity(idx.len());
    let mut truncated_at = None;
    for &j in idx {
        let step = (|| -> Result<GrowthRow<S>> {
            let size = family.size(cayley, j)?;
            let boundary = family.boundary_size(cayley, j)?;
            let sigma = ratio_scalar::<S>(boundary, size);
            let (chain_sum, beta) = match chain {
                None => (S::zero(), S::zero()),
                Some(c) => {
                    let mut sum = S::zero();
                    let spec = family.spec().clone();
                    let mut err = None;
                    family.for_each(cayley, j, &mut |g| {
                        if err.is_some() {
                            return;
                        }
                        match c.eval(&spec, g) {
                            Ok(v) => sum = sum.clone() + v,
                            Err(e) => err = Some(e),
                        }
                    })?;
                    if let Some(e) = err {
                        return Err(e);
                    }
                    let beta = sum.abs() / S::from_i64(size as i64);
                    (sum, beta)
                }
            };
            let beta_over_sigma = if sigma.is_zero() { S::zero() } else { beta.clone() / sigma.clone() };
            Ok(GrowthRow { j, size, boundary, sigma, chain_sum, beta, beta_over_sigma })
        })();
        match step {
            Ok(row) => rows.push(row),
            Err(Error::CapExceeded(_)) | Err(Error::BeyondWindow(_)) => {
                truncated_at = Some(j);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(GrowthTable {
        group: cayley.spec().label(),
        family: family.label(),
        chain: chain.map(|c| c.label()),
        rows,
        truncated_at,
    })
}

fn ratio_scalar<S: Scalar>(num: u64, den: u64) -> S {
    S::from_ratio(i64::try_from(num).unwrap_or(i64::MAX), den)
}

/// σ-profile: growth table without a chain column.
pub fn sigma_profile(
    cayley: &mut Cayley,
    family: &FolnerFamily,
    idx: &[u64],
) -> Result<GrowthTable<BigRational>> {
    growth_table::<BigRational>(cayley, family, None, idx)
}

#[derive(Clone, Debug)]
pub struct StarRow {
    pub j: u64,
    pub r_j: u64,
    /// S_{j-1} ⊆ B_{R(j)}(e).
    pub prev_in_inner: bool,
    /// B_{3R(j)}(e) ⊆ S_j.
    pub outer_in_set: bool,
    /// |S_{j-1}| / |S_j|.
    pub ratio: BigRational,
}

#[derive(Clone, Debug)]
pub struct StarReport {
    pub rows: Vec<StarRow>,
    pub first_violation: Option<(u64, String)>,
}

/// Checks condition (*) for 1 ≤ j ≤ j_max:
/// S_{j-1} ⊆ B_{R(j)}(e) ⊆ B_{3R(j)}(e) ⊆ S_j, with every inclusion decided
/// by exact scans.
pub fn check_star_condition(
    cayley: &mut Cayley,
    family: &FolnerFamily,
    j_max: u64,
) -> Result<StarReport> {
    let mut rows = Vec::new();
    let mut first_violation = None;
    for j in 1..=j_max {
        let r_j = family
            .star_radius(j)?
            .ok_or(Error::MissingStarRadii)?;
        // Collect S_{j-1} first: the membership check needs the same &mut
        // Cayley the streaming closure would hold.
        let mut prev_in_inner = true;
        let set_prev = family.set(cayley, j - 1)?;
        for g in set_prev.iter() {
            if cayley.word_length(g)? > r_j {
                prev_in_inner = false;
                break;
            }
        }
        let mut outer_in_set = true;
        let outer = cayley.ball(3 * r_j)?;
        for g in &outer {
            if !family.member(cayley, j, g)? {
                outer_in_set = false;
                break;
            }
        }
        let ratio = count_ratio(family.size(cayley, j - 1)?, family.size(cayley, j)?);
        if first_violation.is_none() {
            if !prev_in_inner {
                first_violation = Some((j, format!("S_{} ⊄ B_{}(e)", j - 1, r_j)));
            } else if !outer_in_set {
                first_violation = Some((j, format!("B_{}(e) ⊄ S_{}", 3 * r_j, j)));
            }
        }
        rows.push(StarRow { j, r_j, prev_in_inner, outer_in_set, ratio });
    }
    Ok(StarReport { rows, first_violation })
}

/// Like `check_star_condition` but fails loudly on the first violation.
pub fn ensure_star_condition(
    cayley: &mut Cayley,
    family: &FolnerFamily,
    j_max: u64,
) -> Result<StarReport> {
    let report = check_star_condition(cayley, family, j_max)?;
    if let Some((j, which)) = &report.first_violation {
        return Err(Error::StarViolation { j: *j, which: which.clone() });
    }
    Ok(report)
}

pub fn window_json(window: Window) -> Value {
    json!({"radius": window.radius})
}
