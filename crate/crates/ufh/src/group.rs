//! Finitely generated group models with exact normal forms.
//!
//! Three families are supported:
//! * `IntLattice(d)` — ℤ^d with the standard basis generators;
//! * `Heisenberg3` — integer triples with (a,b,c)·(a',b',c') = (a+a', b+b', c+c'+a·b');
//! * `LatticeSemidirect(A)` — ℤ² ⋊_A ℤ for A ∈ GL(2,ℤ), with
//!   (v,k)·(w,l) = (v + A^k w, k+l).
//!
//! Elements are plain integer tuples (the normal form *is* the element), so
//! equality, hashing and the canonical lexicographic order are all exact.

use crate::error::{Error, Result};
use serde_json::{json, Value};

/// Largest supported lattice rank. Higher ranks are outside the enumeration
/// regime this crate targets.
pub const MAX_LATTICE_DIM: usize = 4;

/// A group element in normal form. `Lattice` keeps unused trailing
/// coordinates at zero so the derived lexicographic order is the order on
/// the first `dim` coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Element {
    Lattice { dim: u8, coords: [i64; MAX_LATTICE_DIM] },
    Heis { a: i64, b: i64, c: i64 },
    Semi { v: [i64; 2], k: i64 },
}

impl Element {
    pub fn lattice(coords: &[i64]) -> Element {
        assert!(coords.len() <= MAX_LATTICE_DIM, "lattice rank too large");
        let mut c = [0i64; MAX_LATTICE_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Element::Lattice { dim: coords.len() as u8, coords: c }
    }

    pub fn heis(a: i64, b: i64, c: i64) -> Element {
        Element::Heis { a, b, c }
    }

    pub fn semi(v1: i64, v2: i64, k: i64) -> Element {
        Element::Semi { v: [v1, v2], k }
    }

    /// Coordinates as a flat vector (for display and serialization).
    pub fn flat_coords(&self) -> Vec<i64> {
        match self {
            Element::Lattice { dim, coords } => coords[..*dim as usize].to_vec(),
            Element::Heis { a, b, c } => vec![*a, *b, *c],
            Element::Semi { v, k } => vec![v[0], v[1], *k],
        }
    }

    /// Human-readable normal form, e.g. `(3, -2)`.
    pub fn format(&self) -> String {
        let coords = self.flat_coords();
        let inner = coords.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
        format!("({inner})")
    }
}

fn checked_add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow("addition"))
}

fn checked_mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow("multiplication"))
}

/// 2x2 integer matrix helpers for the semidirect factor.
fn mat_mul(a: &[[i64; 2]; 2], b: &[[i64; 2]; 2]) -> Result<[[i64; 2]; 2]> {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let x = checked_mul(a[i][0], b[0][j])?;
            let y = checked_mul(a[i][1], b[1][j])?;
            out[i][j] = checked_add(x, y)?;
        }
    }
    Ok(out)
}

fn mat_vec(a: &[[i64; 2]; 2], v: &[i64; 2]) -> Result<[i64; 2]> {
    Ok([
        checked_add(checked_mul(a[0][0], v[0])?, checked_mul(a[0][1], v[1])?)?,
        checked_add(checked_mul(a[1][0], v[0])?, checked_mul(a[1][1], v[1])?)?,
    ])
}

fn mat_det(a: &[[i64; 2]; 2]) -> i64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Inverse of a GL(2,ℤ) matrix (det ±1), exact over the integers.
fn mat_inv(a: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let d = mat_det(a);
    debug_assert!(d == 1 || d == -1);
    [[a[1][1] * d, -a[0][1] * d], [-a[1][0] * d, a[0][0] * d]]
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GroupFamily {
    IntLattice { d: u8 },
    Heisenberg3,
    LatticeSemidirect { a: [[i64; 2]; 2] },
}

/// A group model: the family plus its fixed standard generating set.
/// Generating sets are always closed under inverses.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupSpec {
    family: GroupFamily,
    /// Whether the generating set is symmetrized. Always true for the
    /// supported models; kept explicit because the word metric depends on it.
    pub symmetric_closure: bool,
}

impl GroupSpec {
    pub fn int_lattice(d: usize) -> Result<GroupSpec> {
        if d == 0 || d > MAX_LATTICE_DIM {
            return Err(Error::Invalid(format!(
                "lattice rank must be in 1..={MAX_LATTICE_DIM}, got {d}"
            )));
        }
        Ok(GroupSpec { family: GroupFamily::IntLattice { d: d as u8 }, symmetric_closure: true })
    }

    pub fn heisenberg3() -> GroupSpec {
        GroupSpec { family: GroupFamily::Heisenberg3, symmetric_closure: true }
    }

    pub fn lattice_semidirect(a: [[i64; 2]; 2]) -> Result<GroupSpec> {
        let det = mat_det(&a);
        if det != 1 && det != -1 {
            return Err(Error::Invalid(format!(
                "semidirect matrix must be invertible over ℤ (det ±1), got det {det}"
            )));
        }
        Ok(GroupSpec { family: GroupFamily::LatticeSemidirect { a }, symmetric_closure: true })
    }

    pub fn family(&self) -> &GroupFamily {
        &self.family
    }

    /// Short label used in reports and file headers.
    pub fn label(&self) -> String {
        match &self.family {
            GroupFamily::IntLattice { d } => format!("Z^{d}"),
            GroupFamily::Heisenberg3 => "Heis3".to_string(),
            GroupFamily::LatticeSemidirect { a } => {
                format!("Z2xA[{},{};{},{}]", a[0][0], a[0][1], a[1][0], a[1][1])
            }
        }
    }

    pub fn lattice_dim(&self) -> Option<usize> {
        match self.family {
            GroupFamily::IntLattice { d } => Some(d as usize),
            _ => None,
        }
    }

    pub fn identity(&self) -> Element {
        match &self.family {
            GroupFamily::IntLattice { d } => {
                Element::Lattice { dim: *d, coords: [0; MAX_LATTICE_DIM] }
            }
            GroupFamily::Heisenberg3 => Element::heis(0, 0, 0),
            GroupFamily::LatticeSemidirect { .. } => Element::semi(0, 0, 0),
        }
    }

    /// The standard generators (without inverses).
    pub fn generators(&self) -> Vec<Element> {
        match &self.family {
            GroupFamily::IntLattice { d } => (0..*d as usize)
                .map(|i| {
                    let mut coords = [0i64; MAX_LATTICE_DIM];
                    coords[i] = 1;
                    Element::Lattice { dim: *d, coords }
                })
                .collect(),
            GroupFamily::Heisenberg3 => vec![Element::heis(1, 0, 0), Element::heis(0, 1, 0)],
            GroupFamily::LatticeSemidirect { .. } => {
                vec![Element::semi(1, 0, 0), Element::semi(0, 1, 0), Element::semi(0, 0, 1)]
            }
        }
    }

    /// Generators together with their inverses, sorted canonically.
    pub fn symmetric_generators(&self) -> Vec<Element> {
        let mut out = Vec::new();
        for g in self.generators() {
            let inv = self.invert(&g).expect("generator inverts");
            out.push(g);
            if !out.contains(&inv) {
                out.push(inv);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Checks that an element belongs to this model.
    pub fn validate(&self, g: &Element) -> Result<()> {
        let ok = match (&self.family, g) {
            (GroupFamily::IntLattice { d }, Element::Lattice { dim, coords }) => {
                d == dim && coords[*dim as usize..].iter().all(|&c| c == 0)
            }
            (GroupFamily::Heisenberg3, Element::Heis { .. }) => true,
            (GroupFamily::LatticeSemidirect { .. }, Element::Semi { .. }) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ModelMismatch(format!("{:?} is not an element of {}", g, self.label())))
        }
    }

    /// Group multiplication in normal form.
    pub fn compose(&self, x: &Element, y: &Element) -> Result<Element> {
        self.validate(x)?;
        self.validate(y)?;
        match (&self.family, x, y) {
            (GroupFamily::IntLattice { d }, Element::Lattice { coords: a, .. }, Element::Lattice { coords: b, .. }) => {
                let mut coords = [0i64; MAX_LATTICE_DIM];
                for i in 0..*d as usize {
                    coords[i] = checked_add(a[i], b[i])?;
                }
                Ok(Element::Lattice { dim: *d, coords })
            }
            (GroupFamily::Heisenberg3, Element::Heis { a, b, c }, Element::Heis { a: a2, b: b2, c: c2 }) => {
                let twist = checked_mul(*a, *b2)?;
                Ok(Element::heis(
                    checked_add(*a, *a2)?,
                    checked_add(*b, *b2)?,
                    checked_add(checked_add(*c, *c2)?, twist)?,
                ))
            }
            (GroupFamily::LatticeSemidirect { a: mat }, Element::Semi { v, k }, Element::Semi { v: w, k: l }) => {
                let ak = self.mat_power(mat, *k)?;
                let akw = mat_vec(&ak, w)?;
                Ok(Element::Semi {
                    v: [checked_add(v[0], akw[0])?, checked_add(v[1], akw[1])?],
                    k: checked_add(*k, *l)?,
                })
            }
            _ => unreachable!("validated above"),
        }
    }

    /// Group inverse in normal form.
    pub fn invert(&self, g: &Element) -> Result<Element> {
        self.validate(g)?;
        match (&self.family, g) {
            (GroupFamily::IntLattice { d }, Element::Lattice { coords, .. }) => {
                let mut out = [0i64; MAX_LATTICE_DIM];
                for i in 0..*d as usize {
                    out[i] = coords[i].checked_neg().ok_or(Error::Overflow("negation"))?;
                }
                Ok(Element::Lattice { dim: *d, coords: out })
            }
            // (a,b,c)^{-1} = (-a,-b,ab-c): check (a,b,c)·(-a,-b,ab-c)
            // = (0, 0, c + ab - c + a·(-b)) = e.
            (GroupFamily::Heisenberg3, Element::Heis { a, b, c }) => {
                Ok(Element::heis(-a, -b, checked_mul(*a, *b)?.checked_sub(*c).ok_or(Error::Overflow("subtraction"))?))
            }
            // (v,k)^{-1} = (-A^{-k} v, -k).
            (GroupFamily::LatticeSemidirect { a: mat }, Element::Semi { v, k }) => {
                let a_negk = self.mat_power(mat, -*k)?;
                let w = mat_vec(&a_negk, v)?;
                Ok(Element::Semi { v: [-w[0], -w[1]], k: -*k })
            }
            _ => unreachable!("validated above"),
        }
    }

    fn mat_power(&self, a: &[[i64; 2]; 2], k: i64) -> Result<[[i64; 2]; 2]> {
        let base = if k >= 0 { *a } else { mat_inv(a) };
        let mut out = [[1, 0], [0, 1]];
        for _ in 0..k.unsigned_abs() {
            out = mat_mul(&out, &base)?;
        }
        Ok(out)
    }

    /// Word length in closed form where one exists (ℓ¹ norm on lattices).
    /// Other models need the BFS metric in `cayley`.
    pub fn closed_form_length(&self, g: &Element) -> Option<u64> {
        match (&self.family, g) {
            (GroupFamily::IntLattice { d }, Element::Lattice { coords, .. }) => {
                Some(coords[..*d as usize].iter().map(|c| c.unsigned_abs()).sum())
            }
            _ => None,
        }
    }

    /// Parses the output of `Element::format`.
    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Invalid(format!("malformed element literal: {s:?}")))?;
        let coords: Vec<i64> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|p| p.trim().parse::<i64>().map_err(|e| Error::Invalid(format!("bad coordinate {p:?}: {e}"))))
                .collect::<Result<_>>()?
        };
        self.element_from_coords(&coords)
    }

    pub fn element_from_coords(&self, coords: &[i64]) -> Result<Element> {
        let g = match &self.family {
            GroupFamily::IntLattice { d } => {
                if coords.len() != *d as usize {
                    return Err(Error::ModelMismatch(format!(
                        "expected {d} coordinates, got {}",
                        coords.len()
                    )));
                }
                Element::lattice(coords)
            }
            GroupFamily::Heisenberg3 => {
                if coords.len() != 3 {
                    return Err(Error::ModelMismatch("Heis3 elements have 3 coordinates".into()));
                }
                Element::heis(coords[0], coords[1], coords[2])
            }
            GroupFamily::LatticeSemidirect { .. } => {
                if coords.len() != 3 {
                    return Err(Error::ModelMismatch("semidirect elements have 3 coordinates".into()));
                }
                Element::semi(coords[0], coords[1], coords[2])
            }
        };
        Ok(g)
    }

    /// JSON form of an element: `[a,b]`, `[a,b,c]`, or `[[v1,v2],k]`.
    pub fn element_to_json(&self, g: &Element) -> Value {
        match g {
            Element::Lattice { dim, coords } => Value::Array(
                coords[..*dim as usize].iter().map(|&c| json!(c)).collect(),
            ),
            Element::Heis { a, b, c } => json!([a, b, c]),
            Element::Semi { v, k } => json!([[v[0], v[1]], k]),
        }
    }

    pub fn element_from_json(&self, v: &Value) -> Result<Element> {
        let arr = v.as_array().ok_or_else(|| Error::Invalid(format!("element must be a JSON array, got {v}")))?;
        match &self.family {
            GroupFamily::LatticeSemidirect { .. } => {
                if arr.len() != 2 {
                    return Err(Error::Invalid("semidirect element is [[v1,v2],k]".into()));
                }
                let pair = arr[0]
                    .as_array()
                    .ok_or_else(|| Error::Invalid("semidirect element is [[v1,v2],k]".into()))?;
                let v1 = pair.first().and_then(Value::as_i64);
                let v2 = pair.get(1).and_then(Value::as_i64);
                let k = arr[1].as_i64();
                match (v1, v2, k, pair.len()) {
                    (Some(v1), Some(v2), Some(k), 2) => Ok(Element::semi(v1, v2, k)),
                    _ => Err(Error::Invalid("semidirect element is [[v1,v2],k]".into())),
                }
            }
            _ => {
                let coords: Option<Vec<i64>> = arr.iter().map(Value::as_i64).collect();
                let coords = coords.ok_or_else(|| Error::Invalid("element coordinates must be integers".into()))?;
                self.element_from_coords(&coords)
            }
        }
    }

    /// JSON form of the model: `{"family": ..., "params": ...}`.
    pub fn to_json(&self) -> Value {
        match &self.family {
            GroupFamily::IntLattice { d } => json!({"family": "int_lattice", "params": {"d": d}}),
            GroupFamily::Heisenberg3 => json!({"family": "heisenberg3", "params": null}),
            GroupFamily::LatticeSemidirect { a } => {
                json!({"family": "lattice_semidirect", "params": {"matrix": a}})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<GroupSpec> {
        let family = v
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Invalid("group spec needs a \"family\" string".into()))?;
        match family {
            "int_lattice" => {
                let d = v
                    .get("params")
                    .and_then(|p| p.get("d"))
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Invalid("int_lattice needs params.d".into()))?;
                GroupSpec::int_lattice(d as usize)
            }
            "heisenberg3" => Ok(GroupSpec::heisenberg3()),
            "lattice_semidirect" => {
                let m = v
                    .get("params")
                    .and_then(|p| p.get("matrix"))
                    .ok_or_else(|| Error::Invalid("lattice_semidirect needs params.matrix".into()))?;
                let rows = m.as_array().ok_or_else(|| Error::Invalid("matrix must be 2x2".into()))?;
                if rows.len() != 2 {
                    return Err(Error::Invalid("matrix must be 2x2".into()));
                }
                let mut a = [[0i64; 2]; 2];
                for (i, row) in rows.iter().enumerate() {
                    let r = row.as_array().ok_or_else(|| Error::Invalid("matrix must be 2x2".into()))?;
                    if r.len() != 2 {
                        return Err(Error::Invalid("matrix must be 2x2".into()));
                    }
                    for (j, x) in r.iter().enumerate() {
                        a[i][j] = x.as_i64().ok_or_else(|| Error::Invalid("matrix entries must be integers".into()))?;
                    }
                }
                GroupSpec::lattice_semidirect(a)
            }
            other => Err(Error::Invalid(format!("unknown group family {other:?}"))),
        }
    }
}

/// Supported subgroup models. Both have infinite index and are normal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SubgroupKind {
    /// Subgroup of ℤ^d spanned by a proper subset of the axes (0-based).
    Coordinate { dim: u8, axes: Vec<u8> },
    /// The center {(0,0,c)} of Heis₃.
    HeisCenter,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubgroupSpec {
    pub kind: SubgroupKind,
    /// Both supported kinds are normal; the flag exists so consumers can
    /// refuse coset averaging on anything else.
    pub normal: bool,
}

impl SubgroupSpec {
    /// Axes are 0-based and must form a proper subset of {0..d-1} so that
    /// [G:H] is infinite.
    pub fn coordinate(spec: &GroupSpec, axes: &[usize]) -> Result<SubgroupSpec> {
        let d = spec
            .lattice_dim()
            .ok_or_else(|| Error::IncompatibleFamily("coordinate subgroups live in IntLattice".into()))?;
        let mut ax: Vec<u8> = axes.iter().map(|&a| a as u8).collect();
        ax.sort_unstable();
        ax.dedup();
        if ax.len() != axes.len() {
            return Err(Error::Invalid("duplicate axes".into()));
        }
        if ax.iter().any(|&a| a as usize >= d) {
            return Err(Error::Invalid(format!("axis out of range for Z^{d}")));
        }
        if ax.len() >= d {
            return Err(Error::Invalid("axes must be a proper subset (H must have infinite index)".into()));
        }
        Ok(SubgroupSpec { kind: SubgroupKind::Coordinate { dim: d as u8, axes: ax }, normal: true })
    }

    pub fn heis_center() -> SubgroupSpec {
        SubgroupSpec { kind: SubgroupKind::HeisCenter, normal: true }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            SubgroupKind::Coordinate { axes, .. } => {
                format!("axes{:?}", axes.iter().map(|&a| a as usize).collect::<Vec<_>>())
            }
            SubgroupKind::HeisCenter => "center".to_string(),
        }
    }

    /// Checks compatibility with a group model.
    pub fn validate(&self, spec: &GroupSpec) -> Result<()> {
        match (&self.kind, spec.family()) {
            (SubgroupKind::Coordinate { dim, .. }, GroupFamily::IntLattice { d }) if dim == d => Ok(()),
            (SubgroupKind::HeisCenter, GroupFamily::Heisenberg3) => Ok(()),
            _ => Err(Error::IncompatibleFamily(format!(
                "subgroup {} does not live in {}",
                self.label(),
                spec.label()
            ))),
        }
    }

    pub fn contains(&self, g: &Element) -> bool {
        match (&self.kind, g) {
            (SubgroupKind::Coordinate { dim, axes }, Element::Lattice { coords, .. }) => {
                (0..*dim as usize).all(|i| axes.contains(&(i as u8)) || coords[i] == 0)
            }
            (SubgroupKind::HeisCenter, Element::Heis { a, b, .. }) => *a == 0 && *b == 0,
            _ => false,
        }
    }

    /// Canonical representative of the left coset H·g. Constant on cosets and
    /// idempotent: rep(rep(g)) = rep(g).
    pub fn rep(&self, g: &Element) -> Element {
        match (&self.kind, g) {
            (SubgroupKind::Coordinate { dim, axes }, Element::Lattice { coords, .. }) => {
                let mut out = *coords;
                for &a in axes {
                    out[a as usize] = 0;
                }
                Element::Lattice { dim: *dim, coords: out }
            }
            // H·(a,b,c) = {(a,b,c+z)}, so dropping the center coordinate is
            // constant on left cosets.
            (SubgroupKind::HeisCenter, Element::Heis { a, b, .. }) => Element::heis(*a, *b, 0),
            _ => *g,
        }
    }

    /// A Følner set for H itself (box of radius j along the subgroup
    /// directions). Exact and closed-form; no metric needed.
    pub fn folner_set(&self, j: u64) -> Vec<Element> {
        let j = j as i64;
        match &self.kind {
            SubgroupKind::Coordinate { dim, axes } => {
                let mut out = vec![Element::Lattice { dim: *dim, coords: [0; MAX_LATTICE_DIM] }];
                for &a in axes {
                    let mut next = Vec::with_capacity(out.len() * (2 * j as usize + 1));
                    for e in &out {
                        if let Element::Lattice { dim, coords } = e {
                            for v in -j..=j {
                                let mut c = *coords;
                                c[a as usize] = v;
                                next.push(Element::Lattice { dim: *dim, coords: c });
                            }
                        }
                    }
                    out = next;
                }
                out.sort();
                out
            }
            SubgroupKind::HeisCenter => (-j..=j).map(|c| Element::heis(0, 0, c)).collect(),
        }
    }

    /// One generator of H used for template cycles (first axis / center step).
    pub fn step_generator(&self) -> Element {
        match &self.kind {
            SubgroupKind::Coordinate { dim, axes } => {
                let mut coords = [0i64; MAX_LATTICE_DIM];
                coords[axes[0] as usize] = 1;
                Element::Lattice { dim: *dim, coords }
            }
            SubgroupKind::HeisCenter => Element::heis(0, 0, 1),
        }
    }

    pub fn to_json(&self) -> Value {
        match &self.kind {
            SubgroupKind::Coordinate { dim, axes } => {
                json!({"kind": "coordinate", "dim": dim, "axes": axes, "normal": self.normal})
            }
            SubgroupKind::HeisCenter => json!({"kind": "heis_center", "normal": self.normal}),
        }
    }

    pub fn from_json(v: &Value) -> Result<SubgroupSpec> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Invalid("subgroup spec needs a \"kind\"".into()))?;
        let normal = v.get("normal").and_then(Value::as_bool).unwrap_or(true);
        match kind {
            "coordinate" => {
                let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| Error::Invalid("needs dim".into()))?;
                let axes: Vec<u8> = v
                    .get("axes")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Invalid("needs axes".into()))?
                    .iter()
                    .map(|x| x.as_u64().map(|a| a as u8).ok_or_else(|| Error::Invalid("bad axis".into())))
                    .collect::<Result<_>>()?;
                Ok(SubgroupSpec { kind: SubgroupKind::Coordinate { dim: dim as u8, axes }, normal })
            }
            "heis_center" => Ok(SubgroupSpec { kind: SubgroupKind::HeisCenter, normal }),
            other => Err(Error::Invalid(format!("unknown subgroup kind {other:?}"))),
        }
    }
}
