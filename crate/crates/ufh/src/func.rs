//! Procedural descriptions of (possibly infinite) subsets of G and of
//! bounded functions G → ℝ.
//!
//! A `SetRule` answers membership for any single element without enumerating
//! anything, and can list its members inside a metric ball when that is
//! feasible. A `BoundedFunction` is a small expression tree over set
//! indicators, closed under translation and linear combination, carrying a
//! sup-norm bound.

use crate::cayley::Cayley;
use crate::error::{Error, Result};
use crate::group::{Element, GroupSpec, SubgroupSpec};
use crate::scalar::Scalar;
use serde_json::{json, Value};

/// One ring of a sparse construction: the tile centers contributed at level j,
/// chosen with separation radius r.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparseRing {
    pub j: u64,
    pub r: u64,
    /// True when the level fell back to r = 1 because no radius satisfied
    /// the selection conditions.
    pub fallback: bool,
    /// Centers contributed by this level (already disjoint from lower rings).
    pub points: Vec<Element>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum RuleKind {
    /// Explicit finite set (sorted).
    Finite(Vec<Element>),
    /// {n^k : n ∈ ℤ} on the rank-1 lattice.
    Powers { k: u32 },
    /// coords[axis] ≡ one of `residues` (mod m) on a lattice.
    Modular { axis: u8, m: u64, residues: Vec<u64> },
    /// coords[axis] ≥ min on a lattice.
    HalfSpace { axis: u8, min: i64 },
    /// ⋃ H·x over stored coset representatives.
    CosetUnion { sub: SubgroupSpec, reps: Vec<Element> },
    /// Thick union ⋃_l H·A_l with A_l = B_l(e)·g_l; `footprint` stores
    /// rep(B_l(e)·g_l) for all tiles, which decides membership.
    ThickUnion { sub: SubgroupSpec, tiles: Vec<(u64, Element)>, footprint: Vec<Element> },
    /// Sparse construction output: union of per-level rings.
    Sparse { rings: Vec<SparseRing> },
    Union(Box<SetRule>, Box<SetRule>),
    Inter(Box<SetRule>, Box<SetRule>),
    Diff(Box<SetRule>, Box<SetRule>),
}

/// Membership-test description of a subset Γ ⊆ G.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SetRule {
    kind: RuleKind,
    /// Free-text origin note carried through serialization.
    pub provenance: String,
}

/// Floor of the k-th root of a nonnegative integer.
pub fn int_kth_root(x: u64, k: u32) -> u64 {
    if k == 0 || x <= 1 {
        return x;
    }
    if k == 1 {
        return x;
    }
    let mut r = (x as f64).powf(1.0 / k as f64).round() as u64;
    // Float seed, then exact fixup.
    while r > 0 && r.checked_pow(k).map_or(true, |p| p > x) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).map_or(false, |p| p <= x) {
        r += 1;
    }
    r
}

fn is_kth_power(x: i64, k: u32) -> bool {
    if k % 2 == 0 && x < 0 {
        return false;
    }
    let ax = x.unsigned_abs();
    let r = int_kth_root(ax, k);
    if r.checked_pow(k) != Some(ax) {
        return false;
    }
    // Odd k covers negatives via (-r)^k; even k only nonnegatives.
    true
}

impl SetRule {
    pub fn finite(spec: &GroupSpec, mut elems: Vec<Element>, provenance: &str) -> Result<SetRule> {
        for e in &elems {
            spec.validate(e)?;
        }
        elems.sort();
        elems.dedup();
        Ok(SetRule { kind: RuleKind::Finite(elems), provenance: provenance.to_string() })
    }

    pub fn powers(k: u32) -> Result<SetRule> {
        if k == 0 {
            return Err(Error::Invalid("power pattern needs k ≥ 1".into()));
        }
        Ok(SetRule { kind: RuleKind::Powers { k }, provenance: format!("{{n^{k}}}") })
    }

    pub fn modular(axis: u8, m: u64, mut residues: Vec<u64>) -> Result<SetRule> {
        if m == 0 {
            return Err(Error::Invalid("modulus must be positive".into()));
        }
        residues.iter_mut().for_each(|r| *r %= m);
        residues.sort_unstable();
        residues.dedup();
        if residues.is_empty() {
            return Err(Error::Invalid("no residues given".into()));
        }
        let provenance = format!("coord{axis} mod {m} in {residues:?}");
        Ok(SetRule { kind: RuleKind::Modular { axis, m, residues }, provenance })
    }

    /// 2ℤ ⊆ ℤ and friends.
    pub fn multiples(m: u64) -> Result<SetRule> {
        SetRule::modular(0, m, vec![0])
    }

    pub fn half_space(axis: u8, min: i64) -> SetRule {
        SetRule {
            kind: RuleKind::HalfSpace { axis, min },
            provenance: format!("coord{axis} >= {min}"),
        }
    }

    pub fn coset_union(spec: &GroupSpec, sub: SubgroupSpec, xs: &[Element]) -> Result<SetRule> {
        sub.validate(spec)?;
        for x in xs {
            spec.validate(x)?;
        }
        let mut reps: Vec<Element> = xs.iter().map(|x| sub.rep(x)).collect();
        reps.sort();
        reps.dedup();
        let provenance = format!("union of {} cosets of {}", reps.len(), sub.label());
        Ok(SetRule { kind: RuleKind::CosetUnion { sub, reps }, provenance })
    }

    /// Thick union from explicit tiles; `footprint` must already be the
    /// sorted rep-image of all tiles.
    pub fn thick_union(
        sub: SubgroupSpec,
        tiles: Vec<(u64, Element)>,
        footprint: Vec<Element>,
        provenance: &str,
    ) -> SetRule {
        SetRule {
            kind: RuleKind::ThickUnion { sub, tiles, footprint },
            provenance: provenance.to_string(),
        }
    }

    pub fn sparse(rings: Vec<SparseRing>, provenance: &str) -> SetRule {
        SetRule { kind: RuleKind::Sparse { rings }, provenance: provenance.to_string() }
    }

    pub fn union(a: SetRule, b: SetRule) -> SetRule {
        let provenance = format!("({}) ∪ ({})", a.provenance, b.provenance);
        SetRule { kind: RuleKind::Union(Box::new(a), Box::new(b)), provenance }
    }

    pub fn inter(a: SetRule, b: SetRule) -> SetRule {
        let provenance = format!("({}) ∩ ({})", a.provenance, b.provenance);
        SetRule { kind: RuleKind::Inter(Box::new(a), Box::new(b)), provenance }
    }

    pub fn diff(a: SetRule, b: SetRule) -> SetRule {
        let provenance = format!("({}) ∖ ({})", a.provenance, b.provenance);
        SetRule { kind: RuleKind::Diff(Box::new(a), Box::new(b)), provenance }
    }

    pub fn with_provenance(mut self, p: &str) -> SetRule {
        self.provenance = p.to_string();
        self
    }

    pub fn sparse_rings(&self) -> Option<&[SparseRing]> {
        match &self.kind {
            RuleKind::Sparse { rings } => Some(rings),
            _ => None,
        }
    }

    pub fn thick_tiles(&self) -> Option<(&SubgroupSpec, &[(u64, Element)])> {
        match &self.kind {
            RuleKind::ThickUnion { sub, tiles, .. } => Some((sub, tiles)),
            _ => None,
        }
    }

    fn lattice_coord(spec: &GroupSpec, g: &Element, axis: u8) -> Result<i64> {
        let d = spec
            .lattice_dim()
            .ok_or_else(|| Error::ModelMismatch("coordinate pattern needs a lattice".into()))?;
        if axis as usize >= d {
            return Err(Error::Invalid(format!("axis {axis} out of range for {}", spec.label())));
        }
        Ok(g.flat_coords()[axis as usize])
    }

    pub fn member(&self, spec: &GroupSpec, g: &Element) -> Result<bool> {
        spec.validate(g)?;
        match &self.kind {
            RuleKind::Finite(elems) => Ok(elems.binary_search(g).is_ok()),
            RuleKind::Powers { k } => {
                if spec.lattice_dim() != Some(1) {
                    return Err(Error::ModelMismatch("power pattern lives on ℤ".into()));
                }
                Ok(is_kth_power(g.flat_coords()[0], *k))
            }
            RuleKind::Modular { axis, m, residues } => {
                let c = Self::lattice_coord(spec, g, *axis)?;
                let r = c.rem_euclid(*m as i64) as u64;
                Ok(residues.binary_search(&r).is_ok())
            }
            RuleKind::HalfSpace { axis, min } => {
                Ok(Self::lattice_coord(spec, g, *axis)? >= *min)
            }
            RuleKind::CosetUnion { sub, reps } => {
                sub.validate(spec)?;
                Ok(reps.binary_search(&sub.rep(g)).is_ok())
            }
            RuleKind::ThickUnion { sub, footprint, .. } => {
                sub.validate(spec)?;
                Ok(footprint.binary_search(&sub.rep(g)).is_ok())
            }
            RuleKind::Sparse { rings } => {
                Ok(rings.iter().any(|ring| ring.points.binary_search(g).is_ok()))
            }
            RuleKind::Union(a, b) => Ok(a.member(spec, g)? || b.member(spec, g)?),
            RuleKind::Inter(a, b) => Ok(a.member(spec, g)? && b.member(spec, g)?),
            RuleKind::Diff(a, b) => Ok(a.member(spec, g)? && !b.member(spec, g)?),
        }
    }

    /// Γ ∩ B_radius(e), sorted. Pattern rules on ℤ enumerate arithmetically,
    /// so the radius may far exceed any ball the Cayley graph could hold;
    /// everything else filters an enumerated ball.
    pub fn support_in_ball(&self, cayley: &mut Cayley, radius: u64) -> Result<Vec<Element>> {
        let spec = cayley.spec().clone();
        match &self.kind {
            RuleKind::Finite(elems) => {
                let mut out = Vec::new();
                for e in elems {
                    if cayley.in_ball(e, radius)? {
                        out.push(*e);
                    }
                }
                Ok(out)
            }
            RuleKind::Powers { k } => {
                if spec.lattice_dim() != Some(1) {
                    return Err(Error::ModelMismatch("power pattern lives on ℤ".into()));
                }
                let mut out = Vec::new();
                let top = int_kth_root(radius, *k);
                let lo = if *k % 2 == 1 { -(top as i64) } else { 0 };
                for n in lo..=top as i64 {
                    let v = n
                        .checked_pow(*k)
                        .ok_or(Error::Overflow("power enumeration"))?;
                    out.push(Element::lattice(&[v]));
                }
                out.sort();
                out.dedup();
                Ok(out)
            }
            RuleKind::Modular { axis: 0, m, residues } if spec.lattice_dim() == Some(1) => {
                let w = radius as i64;
                let mut out = Vec::new();
                for x in -w..=w {
                    if residues.binary_search(&(x.rem_euclid(*m as i64) as u64)).is_ok() {
                        out.push(Element::lattice(&[x]));
                    }
                }
                Ok(out)
            }
            _ => {
                let mut out = Vec::new();
                for g in cayley.ball(radius)? {
                    if self.member(&spec, &g)? {
                        out.push(g);
                    }
                }
                Ok(out)
            }
        }
    }

    /// |Γ ∩ B_radius(e)| without materializing, where possible.
    pub fn count_in_ball(&self, cayley: &mut Cayley, radius: u64) -> Result<u64> {
        Ok(self.support_in_ball(cayley, radius)?.len() as u64)
    }

    pub fn to_json(&self, spec: &GroupSpec) -> Value {
        let body = match &self.kind {
            RuleKind::Finite(elems) => json!({
                "kind": "finite",
                "elements": elems.iter().map(|e| spec.element_to_json(e)).collect::<Vec<_>>(),
            }),
            RuleKind::Powers { k } => json!({"kind": "powers", "k": k}),
            RuleKind::Modular { axis, m, residues } => json!({
                "kind": "modular", "axis": axis, "m": m, "residues": residues,
            }),
            RuleKind::HalfSpace { axis, min } => json!({
                "kind": "half_space", "axis": axis, "min": min,
            }),
            RuleKind::CosetUnion { sub, reps } => json!({
                "kind": "coset_union",
                "subgroup": sub.to_json(),
                "reps": reps.iter().map(|e| spec.element_to_json(e)).collect::<Vec<_>>(),
            }),
            RuleKind::ThickUnion { sub, tiles, footprint } => json!({
                "kind": "thick_union",
                "subgroup": sub.to_json(),
                "tiles": tiles
                    .iter()
                    .map(|(l, g)| json!({"l": l, "translator": spec.element_to_json(g)}))
                    .collect::<Vec<_>>(),
                "footprint": footprint.iter().map(|e| spec.element_to_json(e)).collect::<Vec<_>>(),
            }),
            RuleKind::Sparse { rings } => json!({
                "kind": "sparse",
                "rings": rings
                    .iter()
                    .map(|ring| json!({
                        "j": ring.j,
                        "r": ring.r,
                        "fallback": ring.fallback,
                        "points": ring.points.iter().map(|e| spec.element_to_json(e)).collect::<Vec<_>>(),
                    }))
                    .collect::<Vec<_>>(),
            }),
            RuleKind::Union(a, b) => json!({
                "kind": "union", "a": a.to_json(spec), "b": b.to_json(spec),
            }),
            RuleKind::Inter(a, b) => json!({
                "kind": "inter", "a": a.to_json(spec), "b": b.to_json(spec),
            }),
            RuleKind::Diff(a, b) => json!({
                "kind": "diff", "a": a.to_json(spec), "b": b.to_json(spec),
            }),
        };
        let mut obj = body.as_object().cloned().unwrap_or_default();
        obj.insert("provenance".into(), json!(self.provenance));
        Value::Object(obj)
    }

    pub fn from_json(spec: &GroupSpec, v: &Value) -> Result<SetRule> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Invalid("set rule needs a \"kind\"".into()))?;
        let provenance = v.get("provenance").and_then(Value::as_str).unwrap_or("").to_string();
        let get_u64 = |k: &str| -> Result<u64> {
            v.get(k)
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Invalid(format!("set rule field {k:?} missing")))
        };
        let elems_of = |key: &str| -> Result<Vec<Element>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Invalid(format!("set rule field {key:?} missing")))?
                .iter()
                .map(|e| spec.element_from_json(e))
                .collect()
        };
        let rule = match kind {
            "finite" => SetRule::finite(spec, elems_of("elements")?, &provenance)?,
            "powers" => SetRule::powers(get_u64("k")? as u32)?,
            "modular" => {
                let residues = v
                    .get("residues")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Invalid("modular rule needs residues".into()))?
                    .iter()
                    .map(|r| r.as_u64().ok_or_else(|| Error::Invalid("bad residue".into())))
                    .collect::<Result<Vec<_>>>()?;
                SetRule::modular(get_u64("axis")? as u8, get_u64("m")?, residues)?
            }
            "half_space" => {
                let min = v
                    .get("min")
                    .and_then(Value::as_i64)
                    .ok_or_else(|| Error::Invalid("half_space needs min".into()))?;
                SetRule::half_space(get_u64("axis")? as u8, min)
            }
            "coset_union" => {
                let sub = SubgroupSpec::from_json(
                    v.get("subgroup").ok_or_else(|| Error::Invalid("missing subgroup".into()))?,
                )?;
                SetRule::coset_union(spec, sub, &elems_of("reps")?)?
            }
            "thick_union" => {
                let sub = SubgroupSpec::from_json(
                    v.get("subgroup").ok_or_else(|| Error::Invalid("missing subgroup".into()))?,
                )?;
                let tiles = v
                    .get("tiles")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Invalid("thick_union needs tiles".into()))?
                    .iter()
                    .map(|t| -> Result<(u64, Element)> {
                        let l = t
                            .get("l")
                            .and_then(Value::as_u64)
                            .ok_or_else(|| Error::Invalid("tile needs l".into()))?;
                        let g = spec.element_from_json(
                            t.get("translator")
                                .ok_or_else(|| Error::Invalid("tile needs translator".into()))?,
                        )?;
                        Ok((l, g))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut footprint = elems_of("footprint")?;
                footprint.sort();
                footprint.dedup();
                SetRule::thick_union(sub, tiles, footprint, &provenance)
            }
            "sparse" => {
                let rings = v
                    .get("rings")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Invalid("sparse rule needs rings".into()))?
                    .iter()
                    .map(|ring| -> Result<SparseRing> {
                        let j = ring
                            .get("j")
                            .and_then(Value::as_u64)
                            .ok_or_else(|| Error::Invalid("ring needs j".into()))?;
                        let r = ring
                            .get("r")
                            .and_then(Value::as_u64)
                            .ok_or_else(|| Error::Invalid("ring needs r".into()))?;
                        let fallback =
                            ring.get("fallback").and_then(Value::as_bool).unwrap_or(false);
                        let mut points = ring
                            .get("points")
                            .and_then(Value::as_array)
                            .ok_or_else(|| Error::Invalid("ring needs points".into()))?
                            .iter()
                            .map(|e| spec.element_from_json(e))
                            .collect::<Result<Vec<_>>>()?;
                        points.sort();
                        points.dedup();
                        Ok(SparseRing { j, r, fallback, points })
                    })
                    .collect::<Result<Vec<_>>>()?;
                SetRule::sparse(rings, &provenance)
            }
            "union" | "inter" | "diff" => {
                let a = SetRule::from_json(
                    spec,
                    v.get("a").ok_or_else(|| Error::Invalid("missing operand a".into()))?,
                )?;
                let b = SetRule::from_json(
                    spec,
                    v.get("b").ok_or_else(|| Error::Invalid("missing operand b".into()))?,
                )?;
                match kind {
                    "union" => SetRule::union(a, b),
                    "inter" => SetRule::inter(a, b),
                    _ => SetRule::diff(a, b),
                }
            }
            other => return Err(Error::Invalid(format!("unknown set rule kind {other:?}"))),
        };
        Ok(if provenance.is_empty() { rule } else { rule.with_provenance(&provenance) })
    }
}

#[derive(Clone, PartialEq, Debug)]
enum FuncNode<S> {
    Const(S),
    Indicator(SetRule),
    /// (g·φ)(x) = φ(g⁻¹x).
    LeftTranslate { g: Element, inner: Box<FuncNode<S>> },
    /// (φ∘R_g)(x) = φ(x·g).
    RightTranslate { g: Element, inner: Box<FuncNode<S>> },
    /// Σ coefᵢ · φᵢ.
    Linear(Vec<(S, FuncNode<S>)>),
    /// φ(rep_H(x)): pulls a rep-space function back to G.
    RepCompose { sub: SubgroupSpec, inner: Box<FuncNode<S>> },
}

/// Bounded φ: G → ℝ with a recorded sup-norm bound.
#[derive(Clone, PartialEq, Debug)]
pub struct BoundedFunction<S> {
    node: FuncNode<S>,
    label: String,
}

impl<S: Scalar> BoundedFunction<S> {
    pub fn constant(v: S) -> BoundedFunction<S> {
        let label = format!("const {v}");
        BoundedFunction { node: FuncNode::Const(v), label }
    }

    pub fn one() -> BoundedFunction<S> {
        BoundedFunction { node: FuncNode::Const(S::one()), label: "χ_G".into() }
    }

    pub fn indicator(rule: SetRule) -> BoundedFunction<S> {
        let label = format!("χ[{}]", rule.provenance);
        BoundedFunction { node: FuncNode::Indicator(rule), label }
    }

    pub fn delta(spec: &GroupSpec, g: Element) -> Result<BoundedFunction<S>> {
        let label = format!("δ_{}", g.format());
        let rule = SetRule::finite(spec, vec![g], &label)?;
        Ok(BoundedFunction { node: FuncNode::Indicator(rule), label })
    }

    pub fn left_translate(self, g: Element) -> BoundedFunction<S> {
        let label = format!("L[{g:?}]·{}", self.label);
        BoundedFunction {
            node: FuncNode::LeftTranslate { g, inner: Box::new(self.node) },
            label,
        }
    }

    pub fn right_translate(self, g: Element) -> BoundedFunction<S> {
        let label = format!("{}∘R[{g:?}]", self.label);
        BoundedFunction {
            node: FuncNode::RightTranslate { g, inner: Box::new(self.node) },
            label,
        }
    }

    pub fn linear(terms: Vec<(S, BoundedFunction<S>)>) -> BoundedFunction<S> {
        let label = terms
            .iter()
            .map(|(c, f)| format!("{c}·({})", f.label))
            .collect::<Vec<_>>()
            .join(" + ");
        BoundedFunction {
            node: FuncNode::Linear(terms.into_iter().map(|(c, f)| (c, f.node)).collect()),
            label,
        }
    }

    pub fn scale(self, c: S) -> BoundedFunction<S> {
        BoundedFunction::linear(vec![(c, self)])
    }

    pub fn rep_compose(self, sub: SubgroupSpec) -> BoundedFunction<S> {
        let label = format!("{}∘rep[{}]", self.label, sub.label());
        BoundedFunction {
            node: FuncNode::RepCompose { sub, inner: Box::new(self.node) },
            label,
        }
    }

    pub fn label(&self) -> String {
        self.label.clone()
    }

    pub fn with_label(mut self, label: &str) -> BoundedFunction<S> {
        self.label = label.to_string();
        self
    }

    pub fn eval(&self, spec: &GroupSpec, g: &Element) -> Result<S> {
        eval_node(&self.node, spec, g)
    }

    /// An upper bound on ‖φ‖_∞ (triangle inequality on linear nodes).
    pub fn sup_bound(&self) -> S {
        bound_node(&self.node)
    }

    /// The underlying rule when φ is exactly an indicator.
    pub fn as_indicator(&self) -> Option<&SetRule> {
        match &self.node {
            FuncNode::Indicator(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_json(&self, spec: &GroupSpec) -> Value {
        let mut v = node_to_json(&self.node, spec);
        if let Some(obj) = v.as_object_mut() {
            obj.insert("label".into(), json!(self.label));
        }
        v
    }

    pub fn from_json(spec: &GroupSpec, v: &Value) -> Result<BoundedFunction<S>> {
        let node = node_from_json(spec, v)?;
        let label = v
            .get("label")
            .and_then(Value::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| "φ".into());
        Ok(BoundedFunction { node, label })
    }
}

fn eval_node<S: Scalar>(node: &FuncNode<S>, spec: &GroupSpec, g: &Element) -> Result<S> {
    match node {
        FuncNode::Const(v) => Ok(v.clone()),
        FuncNode::Indicator(rule) => {
            Ok(if rule.member(spec, g)? { S::one() } else { S::zero() })
        }
        FuncNode::LeftTranslate { g: h, inner } => {
            let x = spec.compose(&spec.invert(h)?, g)?;
            eval_node(inner, spec, &x)
        }
        FuncNode::RightTranslate { g: h, inner } => {
            let x = spec.compose(g, h)?;
            eval_node(inner, spec, &x)
        }
        FuncNode::Linear(terms) => {
            let mut acc = S::zero();
            for (c, t) in terms {
                acc = acc + c.clone() * eval_node(t, spec, g)?;
            }
            Ok(acc)
        }
        FuncNode::RepCompose { sub, inner } => {
            sub.validate(spec)?;
            eval_node(inner, spec, &sub.rep(g))
        }
    }
}

fn bound_node<S: Scalar>(node: &FuncNode<S>) -> S {
    match node {
        FuncNode::Const(v) => v.abs(),
        FuncNode::Indicator(_) => S::one(),
        FuncNode::LeftTranslate { inner, .. } | FuncNode::RightTranslate { inner, .. } => {
            bound_node(inner)
        }
        FuncNode::Linear(terms) => {
            let mut acc = S::zero();
            for (c, t) in terms {
                acc = acc + c.abs() * bound_node(t);
            }
            acc
        }
        FuncNode::RepCompose { inner, .. } => bound_node(inner),
    }
}

fn node_to_json<S: Scalar>(node: &FuncNode<S>, spec: &GroupSpec) -> Value {
    match node {
        FuncNode::Const(v) => json!({"kind": "const", "value": v.to_json()}),
        FuncNode::Indicator(rule) => json!({"kind": "indicator", "set": rule.to_json(spec)}),
        FuncNode::LeftTranslate { g, inner } => json!({
            "kind": "left_translate",
            "g": spec.element_to_json(g),
            "of": node_to_json(inner, spec),
        }),
        FuncNode::RightTranslate { g, inner } => json!({
            "kind": "right_translate",
            "g": spec.element_to_json(g),
            "of": node_to_json(inner, spec),
        }),
        FuncNode::Linear(terms) => json!({
            "kind": "linear",
            "terms": terms
                .iter()
                .map(|(c, t)| json!({"coef": c.to_json(), "of": node_to_json(t, spec)}))
                .collect::<Vec<_>>(),
        }),
        FuncNode::RepCompose { sub, inner } => json!({
            "kind": "rep_compose",
            "subgroup": sub.to_json(),
            "of": node_to_json(inner, spec),
        }),
    }
}

fn node_from_json<S: Scalar>(spec: &GroupSpec, v: &Value) -> Result<FuncNode<S>> {
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Invalid("function needs a \"kind\"".into()))?;
    let of = |key: &str| -> Result<Box<FuncNode<S>>> {
        Ok(Box::new(node_from_json(
            spec,
            v.get(key).ok_or_else(|| Error::Invalid(format!("function field {key:?} missing")))?,
        )?))
    };
    match kind {
        "const" => Ok(FuncNode::Const(S::from_json(
            v.get("value").ok_or_else(|| Error::Invalid("const needs value".into()))?,
        )?)),
        "indicator" => Ok(FuncNode::Indicator(SetRule::from_json(
            spec,
            v.get("set").ok_or_else(|| Error::Invalid("indicator needs set".into()))?,
        )?)),
        "left_translate" | "right_translate" => {
            let g = spec.element_from_json(
                v.get("g").ok_or_else(|| Error::Invalid("translate needs g".into()))?,
            )?;
            let inner = of("of")?;
            Ok(if kind == "left_translate" {
                FuncNode::LeftTranslate { g, inner }
            } else {
                FuncNode::RightTranslate { g, inner }
            })
        }
        "linear" => {
            let terms = v
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Invalid("linear needs terms".into()))?
                .iter()
                .map(|t| -> Result<(S, FuncNode<S>)> {
                    let c = S::from_json(
                        t.get("coef").ok_or_else(|| Error::Invalid("term needs coef".into()))?,
                    )?;
                    let f = node_from_json(
                        spec,
                        t.get("of").ok_or_else(|| Error::Invalid("term needs of".into()))?,
                    )?;
                    Ok((c, f))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FuncNode::Linear(terms))
        }
        "rep_compose" => {
            let sub = SubgroupSpec::from_json(
                v.get("subgroup").ok_or_else(|| Error::Invalid("missing subgroup".into()))?,
            )?;
            Ok(FuncNode::RepCompose { sub, inner: of("of")? })
        }
        other => Err(Error::Invalid(format!("unknown function kind {other:?}"))),
    }
}
