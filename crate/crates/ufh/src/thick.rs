//! Thick families: unions T^k = ⋃_l H·A^k_l of subgroup-translated balls
//! A^k_l = B_l(e)·g, placed so that all tiles have pairwise disjoint images
//! under the coset projection. Every radius is realized inside each T^k
//! (that is what "thick" buys), while distinct T^k are separated coset-wise
//! — the density matrix of one family against another's tiles is exactly
//! the identity.

use crate::cayley::Cayley;
use crate::error::{Error, Result};
use crate::func::SetRule;
use crate::geometry::{FiniteSubset, Window};
use crate::group::{Element, GroupSpec, SubgroupSpec};
use crate::scalar::count_ratio;
use num::rational::BigRational;
use num::{One, Zero};
use serde_json::{json, Value};
use std::collections::HashSet;

fn footprint_of(
    cayley: &mut Cayley,
    sub: &SubgroupSpec,
    points: &FiniteSubset,
    g: &Element,
) -> Result<HashSet<Element>> {
    let spec = cayley.spec().clone();
    let mut out = HashSet::new();
    for t in points.iter() {
        out.insert(sub.rep(&spec.compose(t, g)?));
    }
    Ok(out)
}

/// First g in canonical BFS order with rep(T·g) disjoint from rep(T′).
/// An empty T′ is vacuously separated, so the identity comes back.
/// Existence is guaranteed for infinite-index H, so exhausting the budget
/// means the window was too small, not that no g exists.
pub fn separate_search(
    cayley: &mut Cayley,
    sub: &SubgroupSpec,
    t: &FiniteSubset,
    t_prime: &FiniteSubset,
    budget: usize,
) -> Result<Element> {
    let spec = cayley.spec().clone();
    sub.validate(&spec)?;
    if t_prime.is_empty() {
        return Ok(spec.identity());
    }
    let mut blocked = HashSet::new();
    for x in t_prime.iter() {
        blocked.insert(sub.rep(x));
    }
    let mut tried = 0usize;
    let mut radius = 0u64;
    let mut start = 0usize;
    while tried < budget {
        let order = cayley.bfs_order(radius)?;
        for g in &order[start..] {
            if tried >= budget {
                break;
            }
            tried += 1;
            let image = footprint_of(cayley, sub, t, g)?;
            if image.is_disjoint(&blocked) {
                return Ok(*g);
            }
        }
        start = order.len();
        radius += 1;
    }
    Err(Error::WindowTooSmall(format!(
        "no separating translate among the first {budget} candidates"
    )))
}

#[derive(Clone, Debug)]
pub struct ThickFamily {
    pub spec: GroupSpec,
    pub sub: SubgroupSpec,
    /// families[k] lists the tiles (l, translator) of T^{k+1}, l = 1..=depth.
    pub families: Vec<Vec<(u64, Element)>>,
    /// One line per placement, in construction order.
    pub log: Vec<String>,
}

impl ThickFamily {
    pub fn n_families(&self) -> usize {
        self.families.len()
    }

    pub fn depth(&self) -> u64 {
        self.families.first().map(|f| f.len() as u64).unwrap_or(0)
    }

    /// T^k as a membership rule (k is 1-based).
    pub fn union_rule(&self, cayley: &mut Cayley, k: usize) -> Result<SetRule> {
        let tiles = self
            .families
            .get(k - 1)
            .ok_or_else(|| Error::Invalid(format!("no family #{k}")))?
            .clone();
        let mut footprint = Vec::new();
        for (l, g) in &tiles {
            for b in cayley.ball(*l)? {
                footprint.push(self.sub.rep(&self.spec.compose(&b, g)?));
            }
        }
        footprint.sort();
        footprint.dedup();
        let provenance = format!(
            "thick union #{k}: {} tiles over {}",
            tiles.len(),
            self.sub.label()
        );
        Ok(SetRule::thick_union(self.sub.clone(), tiles, footprint, &provenance))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "group": self.spec.to_json(),
            "subgroup": self.sub.to_json(),
            "families": self
                .families
                .iter()
                .map(|tiles| {
                    tiles
                        .iter()
                        .map(|(l, g)| json!({"l": l, "translator": self.spec.element_to_json(g)}))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
            "log": self.log,
        })
    }
}

/// Builds n_families × l_depth tiles in (l, k)-lexicographic order, each
/// separated from the union of everything placed before it.
pub fn thick_construct(
    cayley: &mut Cayley,
    sub: &SubgroupSpec,
    n_families: usize,
    l_depth: u64,
    budget: usize,
) -> Result<ThickFamily> {
    let spec = cayley.spec().clone();
    sub.validate(&spec)?;
    if n_families == 0 || l_depth == 0 {
        return Err(Error::Invalid("need at least one family and one level".into()));
    }
    let mut families = vec![Vec::new(); n_families];
    let mut log = Vec::new();
    let mut placed = FiniteSubset::from_sorted(spec.clone(), Vec::new());
    for l in 1..=l_depth {
        let ball = FiniteSubset::from_sorted(spec.clone(), cayley.ball(l)?);
        for k in 1..=n_families {
            let g = separate_search(cayley, sub, &ball, &placed, budget)?;
            let mut tile_points = Vec::new();
            for b in ball.iter() {
                tile_points.push(spec.compose(b, &g)?);
            }
            placed = placed.union(&FiniteSubset::new(spec.clone(), tile_points)?);
            families[k - 1].push((l, g));
            log.push(format!("(l={l},k={k}) → {}", g.format()));
        }
    }
    Ok(ThickFamily { spec, sub: sub.clone(), families, log })
}

#[derive(Clone, Debug)]
pub struct ThickWitness {
    /// 1-based family index.
    pub k: usize,
    pub r: u64,
    /// Depth of the tile providing the witness.
    pub l: u64,
    pub g: Element,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct ThickReport {
    /// densities[j][k][l] = |T^{j+1} ∩ A^{k+1}_{l+1}| / |A^{k+1}_{l+1}|.
    pub densities: Vec<Vec<Vec<BigRational>>>,
    pub identity_ok: bool,
    pub footprints_disjoint: bool,
    pub invariance_samples: usize,
    pub invariance_ok: bool,
    pub witnesses: Vec<ThickWitness>,
    pub failures: Vec<String>,
}

impl ThickReport {
    pub fn all_ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "identity_ok": self.identity_ok,
            "footprints_disjoint": self.footprints_disjoint,
            "invariance_samples": self.invariance_samples,
            "invariance_ok": self.invariance_ok,
            "witnesses_ok": self.witnesses.iter().all(|w| w.ok),
            "failures": self.failures,
            "densities": self
                .densities
                .iter()
                .map(|per_k| {
                    per_k
                        .iter()
                        .map(|per_l| {
                            per_l.iter().map(|d| d.to_string()).collect::<Vec<_>>()
                        })
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        })
    }
}

/// Exhaustively re-checks a constructed family: per-tile densities form the
/// identity matrix, tile footprints are pairwise disjoint, χ_{T^k} is
/// left-H-invariant on sampled pairs, and each radius r ≤ depth has a
/// thickness witness B_r(e)·g ⊆ T^k. Failures are reported with witnesses
/// rather than raised — any failure means the construction is buggy.
pub fn thick_verify(
    cayley: &mut Cayley,
    tf: &ThickFamily,
    window: Window,
) -> Result<ThickReport> {
    let spec = cayley.spec().clone();
    let mut failures = Vec::new();
    for (ki, tiles) in tf.families.iter().enumerate() {
        for (l, g) in tiles {
            if l + cayley.word_length(g)? > window.radius {
                return Err(Error::WindowTooSmall(format!(
                    "tile (l={l}, k={}) reaches past radius {}",
                    ki + 1,
                    window.radius
                )));
            }
        }
    }

    let n = tf.families.len();
    let mut rules = Vec::new();
    for k in 1..=n {
        rules.push(tf.union_rule(cayley, k)?);
    }

    // Pairwise disjointness of all tile footprints.
    let mut tile_footprints: Vec<(usize, u64, HashSet<Element>)> = Vec::new();
    for (ki, tiles) in tf.families.iter().enumerate() {
        for (l, g) in tiles {
            let pts = FiniteSubset::from_sorted(spec.clone(), cayley.ball(*l)?);
            tile_footprints.push((ki, *l, footprint_of(cayley, &tf.sub, &pts, g)?));
        }
    }
    let mut footprints_disjoint = true;
    for (i, a) in tile_footprints.iter().enumerate() {
        for b in &tile_footprints[i + 1..] {
            if !a.2.is_disjoint(&b.2) {
                footprints_disjoint = false;
                let mut shared: Vec<&Element> = a.2.intersection(&b.2).collect();
                shared.sort();
                failures.push(format!(
                    "footprints of (k={},l={}) and (k={},l={}) overlap in coset {}H",
                    a.0 + 1,
                    a.1,
                    b.0 + 1,
                    b.1,
                    shared[0].format()
                ));
            }
        }
    }

    let mut densities = Vec::new();
    let mut identity_ok = true;
    for (ji, rule_j) in rules.iter().enumerate() {
        let mut per_k = Vec::new();
        for (ki, tiles) in tf.families.iter().enumerate() {
            let mut per_l = Vec::new();
            for (l, g) in tiles {
                let ball = cayley.ball(*l)?;
                let mut hit = 0u64;
                for b in &ball {
                    if rule_j.member(&spec, &spec.compose(b, g)?)? {
                        hit += 1;
                    }
                }
                let d = count_ratio(hit, ball.len() as u64);
                let expect = if ji == ki { BigRational::one() } else { BigRational::zero() };
                if d != expect {
                    identity_ok = false;
                    failures.push(format!(
                        "density of T^{} on tile (k={},l={}) is {d}, expected {expect}",
                        ji + 1,
                        ki + 1,
                        l
                    ));
                }
                per_l.push(d);
            }
            per_k.push(per_l);
        }
        densities.push(per_k);
    }

    // Left-H-invariance of χ_{T^k} on sampled pairs.
    let sample_radius = window.radius.min(3);
    let g_sample = cayley.ball(sample_radius)?;
    let h_sample = tf.sub.folner_set(2);
    let mut invariance_samples = 0usize;
    let mut invariance_ok = true;
    for (ki, rule) in rules.iter().enumerate() {
        for h in &h_sample {
            for g in &g_sample {
                invariance_samples += 1;
                let lhs = rule.member(&spec, &spec.compose(h, g)?)?;
                let rhs = rule.member(&spec, g)?;
                if lhs != rhs {
                    invariance_ok = false;
                    failures.push(format!(
                        "χ_T^{} differs at h={}, g={}",
                        ki + 1,
                        h.format(),
                        g.format()
                    ));
                }
            }
        }
    }

    let mut witnesses = Vec::new();
    for (ki, tiles) in tf.families.iter().enumerate() {
        let max_l = tiles.iter().map(|(l, _)| *l).max().unwrap_or(0);
        for r in 1..=max_l {
            let Some((l, g)) = tiles.iter().find(|(l, _)| *l >= r) else { continue };
            let mut ok = true;
            for b in cayley.ball(r)? {
                if !rules[ki].member(&spec, &spec.compose(&b, g)?)? {
                    ok = false;
                    break;
                }
            }
            if !ok {
                failures.push(format!(
                    "B_{r}(e)·{} escapes T^{} despite tile depth {l}",
                    g.format(),
                    ki + 1
                ));
            }
            witnesses.push(ThickWitness { k: ki + 1, r, l: *l, g: *g, ok });
        }
    }

    Ok(ThickReport {
        densities,
        identity_ok,
        footprints_disjoint,
        invariance_samples,
        invariance_ok,
        witnesses,
        failures,
    })
}
