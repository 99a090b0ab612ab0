//! Sparse-set construction, sparseness certificates, and the decay tables
//! showing sparse indicators become invisible to Følner averages.
//!
//! The construction lays ring j of tile centers on S_j ∖ S_{j-1}, with a
//! per-level separation radius r(j,c) chosen maximal subject to three
//! conditions (growth gap, decay margin, tiling onset); when no radius
//! qualifies the level falls back to r = 1, which keeps the output valid
//! but contributes nothing to the decay guarantee at that level.

use crate::cayley::Cayley;
use crate::compare::{compare, CompareOptions, Comparison, ComparisonVerdict};
use crate::error::{Error, Result};
use crate::func::{SetRule, SparseRing};
use crate::geometry::{
    ensure_star_condition, r_boundary, FiniteSubset, FolnerFamily, FolnerKind, Window,
};
use crate::scalar::{count_ratio, Scalar};
use crate::tiling::{greedy_tiling, tiles_in, tiling_index, Tiling};
use num::rational::BigRational;
use num::{One, Zero};
use serde_json::{json, Value};
use std::collections::HashMap;

/// Target decay sequence c(j) for the construction.
#[derive(Clone, Debug)]
pub enum CSequence {
    /// c(j) = σ_S(j)^p; p = 2 is the standard choice, p = 1 seeds the
    /// iterated chain.
    SigmaPower(u32),
    /// Explicit positive values for j = 1, 2, …
    Explicit(Vec<BigRational>),
}

impl CSequence {
    pub fn sigma_squared() -> CSequence {
        CSequence::SigmaPower(2)
    }

    pub fn label(&self) -> String {
        match self {
            CSequence::SigmaPower(1) => "σ".into(),
            CSequence::SigmaPower(p) => format!("σ^{p}"),
            CSequence::Explicit(v) => format!("explicit[{}]", v.len()),
        }
    }

    /// c(1), …, c(j_max). Every value must be strictly positive.
    pub fn values(
        &self,
        cayley: &mut Cayley,
        family: &FolnerFamily,
        j_max: u64,
    ) -> Result<Vec<BigRational>> {
        let vals = match self {
            CSequence::SigmaPower(p) => {
                let mut out = Vec::new();
                for j in 1..=j_max {
                    let s = family.sigma(cayley, j)?;
                    let mut v = BigRational::one();
                    for _ in 0..*p {
                        v *= s.clone();
                    }
                    out.push(v);
                }
                out
            }
            CSequence::Explicit(v) => {
                if (v.len() as u64) < j_max {
                    return Err(Error::Invalid(format!(
                        "explicit sequence has {} values, need {j_max}",
                        v.len()
                    )));
                }
                v[..j_max as usize].to_vec()
            }
        };
        if vals.iter().any(|v| *v <= BigRational::zero()) {
            return Err(Error::Invalid("decay sequence must be strictly positive".into()));
        }
        Ok(vals)
    }
}

#[derive(Clone, Debug)]
pub struct SparseLevel {
    pub j: u64,
    pub r: u64,
    pub fallback: bool,
    /// |B_r|/(4|B_2r|) ≥ |S_{j-1}|/|S_j| at the recorded r.
    pub growth_ok: bool,
    /// 1/(4|B_2r|) ≥ √c(j), checked in squared form.
    pub decay_ok: bool,
    /// Tiling density bounds hold from some l ≤ j onward.
    pub onset_ok: bool,
    /// Centers contributed by this level.
    pub ring_size: u64,
    /// |Γ ∩ S_j| once this level is placed.
    pub in_set: u64,
    pub density: BigRational,
    /// 1/(4|B_2r|): the proof-chain lower bound for the density.
    pub packing_bound: BigRational,
    pub c_value: BigRational,
}

#[derive(Clone, Debug)]
pub struct SparseDiagnostics {
    pub family: String,
    pub c_label: String,
    pub j_requested: u64,
    pub j_computed: u64,
    /// First level dropped because the enclosing window overflowed.
    pub truncated_at: Option<u64>,
    pub ring0_size: u64,
    pub levels: Vec<SparseLevel>,
}

impl SparseDiagnostics {
    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family,
            "c": self.c_label,
            "j_requested": self.j_requested,
            "j_computed": self.j_computed,
            "truncated_at": self.truncated_at,
            "ring0_size": self.ring0_size,
            "levels": self.levels.iter().map(|l| json!({
                "j": l.j,
                "r": l.r,
                "fallback": l.fallback,
                "growth_ok": l.growth_ok,
                "decay_ok": l.decay_ok,
                "onset_ok": l.onset_ok,
                "ring_size": l.ring_size,
                "in_set": l.in_set,
                "density": l.density.to_string(),
                "packing_bound": l.packing_bound.to_string(),
                "c": l.c_value.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

struct LevelChoice {
    r: u64,
    fallback: bool,
    growth_ok: bool,
    decay_ok: bool,
    onset_ok: bool,
}

struct Builder<'a> {
    cayley: &'a mut Cayley,
    family: &'a FolnerFamily,
    hint: u64,
    j_max: u64,
    tilings: HashMap<u64, Tiling>,
    onsets: HashMap<u64, Option<u64>>,
}

impl<'a> Builder<'a> {
    fn tiling(&mut self, r: u64) -> Result<&Tiling> {
        if !self.tilings.contains_key(&r) {
            let w = Window::new(self.hint + 2 * r);
            let t = greedy_tiling(self.cayley, r, w)?;
            self.tilings.insert(r, t);
        }
        Ok(&self.tilings[&r])
    }

    fn onset(&mut self, r: u64) -> Result<Option<u64>> {
        if let Some(l) = self.onsets.get(&r) {
            return Ok(*l);
        }
        self.tiling(r)?;
        let t = self.tilings[&r].clone();
        let idx = tiling_index(self.cayley, &t, self.family, self.j_max)?;
        self.onsets.insert(r, idx.l_estimate);
        Ok(idx.l_estimate)
    }

    /// growth condition: |B_r|·|S_j| ≥ 4·|B_2r|·|S_{j-1}|, cross-multiplied.
    fn growth_ok(&mut self, r: u64, size_prev: u64, size_j: u64) -> Result<bool> {
        let br = self.cayley.ball_size(r)? as u128;
        let b2r = self.cayley.ball_size(2 * r)? as u128;
        Ok(br * size_j as u128 >= 4 * b2r * size_prev as u128)
    }

    /// decay condition in squared form: 16·|B_2r|²·c(j) ≤ 1.
    fn decay_ok(&mut self, r: u64, c: &BigRational) -> Result<bool> {
        let b2r = self.cayley.ball_size(2 * r)? as i64;
        Ok(BigRational::from_ratio(16 * b2r * b2r, 1) * c.clone() <= BigRational::one())
    }

    fn choose(&mut self, j: u64, big_r: u64, c: &BigRational) -> Result<LevelChoice> {
        let size_prev = self.family.size(self.cayley, j - 1)?;
        let size_j = self.family.size(self.cayley, j)?;
        for r in (1..=big_r).rev() {
            if !self.growth_ok(r, size_prev, size_j)? {
                continue;
            }
            if !self.decay_ok(r, c)? {
                continue;
            }
            let onset = self.onset(r)?;
            if matches!(onset, Some(l) if l <= j) {
                return Ok(LevelChoice {
                    r,
                    fallback: false,
                    growth_ok: true,
                    decay_ok: true,
                    onset_ok: true,
                });
            }
        }
        // Fallback: record which conditions r = 1 actually satisfies.
        let growth_ok = self.growth_ok(1, size_prev, size_j)?;
        let decay_ok = self.decay_ok(1, c)?;
        let onset_ok = matches!(self.onset(1)?, Some(l) if l <= j);
        Ok(LevelChoice { r: 1, fallback: true, growth_ok, decay_ok, onset_ok })
    }
}

fn attempt(
    cayley: &mut Cayley,
    family: &FolnerFamily,
    c: &CSequence,
    j_max: u64,
) -> Result<(Vec<SparseRing>, u64, Vec<SparseLevel>)> {
    ensure_star_condition(cayley, family, j_max)?;
    let cvals = c.values(cayley, family, j_max)?;
    let hint = family.radius_hint(j_max)?;
    let mut b = Builder { cayley, family, hint, j_max, tilings: HashMap::new(), onsets: HashMap::new() };

    let mut choices: Vec<LevelChoice> = Vec::new();
    for j in 1..=j_max {
        let big_r = family
            .star_radius(j)?
            .ok_or(Error::MissingStarRadii)?;
        choices.push(b.choose(j, big_r, &cvals[(j - 1) as usize])?);
    }

    // Ring 0: no growth/decay conditions exist at j = 0; use r = 1.
    b.tiling(1)?;
    for choice in &choices {
        b.tiling(choice.r)?;
    }
    let Builder { cayley, tilings, .. } = b;

    let mut sets: Vec<FiniteSubset> = Vec::new();
    for j in 0..=j_max {
        sets.push(family.set(cayley, j)?);
    }

    let (ring0, _) = tiles_in(cayley, &tilings[&1], &sets[0])?;
    let mut seen = ring0.clone();
    let mut rings = vec![SparseRing {
        j: 0,
        r: 1,
        fallback: false,
        points: ring0.iter().copied().collect(),
    }];
    let mut levels = Vec::new();
    for (i, choice) in choices.iter().enumerate() {
        let j = (i + 1) as u64;
        let tiling = &tilings[&choice.r];
        let (t_j, _) = tiles_in(cayley, tiling, &sets[i + 1])?;
        let (t_prev, _) = tiles_in(cayley, tiling, &sets[i])?;
        let ring = t_j.difference(&t_prev).difference(&seen);
        seen = seen.union(&ring);
        let mut in_set = 0u64;
        for g in seen.iter() {
            if family.member(cayley, j, g)? {
                in_set += 1;
            }
        }
        let size_j = family.size(cayley, j)?;
        let b2r = cayley.ball_size(2 * choice.r)?;
        levels.push(SparseLevel {
            j,
            r: choice.r,
            fallback: choice.fallback,
            growth_ok: choice.growth_ok,
            decay_ok: choice.decay_ok,
            onset_ok: choice.onset_ok,
            ring_size: ring.len() as u64,
            in_set,
            density: count_ratio(in_set, size_j),
            packing_bound: count_ratio(1, 4 * b2r),
            c_value: cvals[i].clone(),
        });
        rings.push(SparseRing {
            j,
            r: choice.r,
            fallback: choice.fallback,
            points: ring.iter().copied().collect(),
        });
    }
    let ring0_size = rings[0].points.len() as u64;
    Ok((rings, ring0_size, levels))
}

/// Builds Γ_c = T_0 ∪ ⋃_j (T_j^{r(j,c)} ∖ T_{j-1}^{r(j,c)}) over a family
/// with star radii. Refuses when the nesting condition fails; when the
/// enclosing window overflows at some level the range is truncated and the
/// first dropped level is reported in the diagnostics.
pub fn sparse_construct(
    cayley: &mut Cayley,
    family: &FolnerFamily,
    c: &CSequence,
    j_max: u64,
) -> Result<(SetRule, SparseDiagnostics)> {
    if j_max == 0 {
        return Err(Error::Invalid("need at least one level".into()));
    }
    let mut eff = j_max;
    loop {
        match attempt(cayley, family, c, eff) {
            Ok((rings, ring0_size, levels)) => {
                let diagnostics = SparseDiagnostics {
                    family: family.label(),
                    c_label: c.label(),
                    j_requested: j_max,
                    j_computed: eff,
                    truncated_at: (eff < j_max).then_some(eff + 1),
                    ring0_size,
                    levels,
                };
                let provenance = format!(
                    "sparse rings over {} with c = {}, levels ≤ {eff}",
                    family.label(),
                    c.label()
                );
                return Ok((SetRule::sparse(rings, &provenance), diagnostics));
            }
            Err(Error::CapExceeded(_)) | Err(Error::Overflow(_)) if eff > 1 => eff -= 1,
            Err(e) => return Err(e),
        }
    }
}

/// One certified separation radius: beyond word length `threshold`, every
/// r-ball meets Γ in at most `c_obs` points (exhaustive on the window).
#[derive(Clone, Debug)]
pub struct SparseCertRow {
    pub r: u64,
    pub threshold: u64,
    pub c_obs: u64,
    /// Step profile of R ↦ max_{R < |g| ≤ W−r} |Γ ∩ B_r(g)|: pairs
    /// (R, value), nonincreasing in R, starting at R = 0.
    pub profile: Vec<(u64, u64)>,
}

impl SparseCertRow {
    /// The observed constant beyond an arbitrary threshold.
    pub fn c_obs_beyond(&self, threshold: u64) -> u64 {
        let mut v = self.profile.first().map(|p| p.1).unwrap_or(0);
        for (t, c) in &self.profile {
            if *t <= threshold {
                v = *c;
            }
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct SparseCertificate {
    pub window: Window,
    pub rows: Vec<SparseCertRow>,
    pub claimed: Option<u64>,
}

impl SparseCertificate {
    pub fn with_claim(mut self, c: u64) -> SparseCertificate {
        self.claimed = Some(c);
        self
    }

    /// Valid iff every row's observed constant is within the claim.
    pub fn valid(&self) -> Option<bool> {
        self.claimed.map(|c| self.rows.iter().all(|row| row.c_obs <= c))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "window": self.window.radius,
            "claimed": self.claimed,
            "valid": self.valid(),
            "rows": self.rows.iter().map(|r| json!({
                "r": r.r,
                "threshold": r.threshold,
                "c_obs": r.c_obs,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Exhaustive sparseness scan: for each r, counts |Γ ∩ B_r(g)| for every g
/// with |g| ≤ W − r, then reports the bulk-stabilized constant and the
/// least threshold beyond which it holds. Count collection walks Γ once
/// and increments over B_r(γ), so the cost scales with |Γ ∩ B_W|, not |B_W|.
pub fn sparse_verify(
    cayley: &mut Cayley,
    gamma: &SetRule,
    r_list: &[u64],
    window: Window,
) -> Result<SparseCertificate> {
    let spec = cayley.spec().clone();
    let support = gamma.support_in_ball(cayley, window.radius)?;
    let mut rows = Vec::new();
    for &r in r_list {
        if r == 0 || window.radius <= r {
            return Err(Error::Invalid(format!("radius {r} does not fit window {}", window.radius)));
        }
        let reach = window.radius - r;
        let ball_r = cayley.ball(r)?;
        let mut counts: HashMap<crate::group::Element, u64> = HashMap::new();
        for gamma_pt in &support {
            for b in &ball_r {
                let g = spec.compose(gamma_pt, b)?;
                if cayley.word_length(&g)? <= reach {
                    *counts.entry(g).or_insert(0) += 1;
                }
            }
        }
        // Suffix maxima of count over |g|, largest |g| first.
        let mut by_len: Vec<(u64, u64)> = Vec::new();
        for (g, n) in &counts {
            by_len.push((cayley.word_length(g)?, *n));
        }
        by_len.sort_by(|a, b| b.0.cmp(&a.0));
        let mut profile_rev: Vec<(u64, u64)> = Vec::new();
        let mut running = 0u64;
        let mut i = 0usize;
        while i < by_len.len() {
            let len = by_len[i].0;
            while i < by_len.len() && by_len[i].0 == len {
                running = running.max(by_len[i].1);
                i += 1;
            }
            // C_tail(R) for R = len − 1 includes everything at |g| ≥ len.
            profile_rev.push((len.saturating_sub(1), running));
        }
        let mut profile: Vec<(u64, u64)> = Vec::new();
        let tail_at_zero = profile_rev.last().map(|p| p.1).unwrap_or(0);
        profile.push((0, tail_at_zero));
        for (t, v) in profile_rev.iter().rev() {
            if *t > 0 && profile.last().map(|p| p.1) != Some(*v) {
                profile.push((*t, *v));
            }
        }
        // Beyond the farthest counted point everything is 0.
        if let Some(far) = by_len.first().map(|p| p.0) {
            if profile.last().map(|p| p.1) != Some(0) {
                profile.push((far, 0));
            }
        }
        // Bulk value: the constant at half reach, ignoring the empty rim.
        let bulk = {
            let mut v = profile.first().map(|p| p.1).unwrap_or(0);
            for (t, c) in &profile {
                if *t <= reach / 2 {
                    v = *c;
                }
            }
            v
        };
        let threshold = profile
            .iter()
            .find(|(_, c)| *c <= bulk)
            .map(|(t, _)| *t)
            .unwrap_or(0);
        rows.push(SparseCertRow { r, threshold, c_obs: bulk, profile });
    }
    Ok(SparseCertificate { window, rows, claimed: None })
}

#[derive(Clone, Debug)]
pub struct DecayBound {
    pub r: u64,
    pub c: u64,
    pub bound: BigRational,
    /// The certificate covers S_j and its r-rim inside the window.
    pub applicable: bool,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct DecayRow {
    pub j: u64,
    pub size: u64,
    pub count: u64,
    pub beta: BigRational,
    pub bounds: Vec<DecayBound>,
}

#[derive(Clone, Debug)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    pub all_ok: bool,
}

impl DecayTable {
    pub fn to_json(&self) -> Value {
        json!({
            "all_ok": self.all_ok,
            "rows": self.rows.iter().map(|row| json!({
                "j": row.j,
                "size": row.size,
                "count": row.count,
                "beta": row.beta.to_string(),
                "bounds": row.bounds.iter().map(|b| json!({
                    "r": b.r,
                    "c": b.c,
                    "bound": b.bound.to_string(),
                    "applicable": b.applicable,
                    "ok": b.ok,
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// β_{χ_Γ}(j) alongside the certified bound
/// C/|B_r| + C·|∂_r S_j|/(|B_r|·|S_j|) + |B_R|/|S_j| per certificate row:
/// double counting pairs (γ, g) with g ∈ B_r(γ) pins |Γ ∩ S_j|·|B_r| under
/// C per bulk point plus the near-origin and rim corrections. An empty
/// certificate yields the plain β table with no claims.
pub fn invisibility_decay(
    cayley: &mut Cayley,
    gamma: &SetRule,
    family: &FolnerFamily,
    cert: &SparseCertificate,
    idx: &[u64],
) -> Result<DecayTable> {
    let mut rows = Vec::new();
    let mut all_ok = true;
    for &j in idx {
        let hint = family.radius_hint(j)?;
        let support = gamma.support_in_ball(cayley, hint)?;
        let mut count = 0u64;
        for g in &support {
            if family.member(cayley, j, g)? {
                count += 1;
            }
        }
        let size = family.size(cayley, j)?;
        let beta = count_ratio(count, size);
        let mut bounds = Vec::new();
        for row in &cert.rows {
            let r = row.r;
            let rim = match family.kind {
                // Metric balls: the r-rim is an exact annulus.
                FolnerKind::Balls | FolnerKind::SuperGeometricBalls => {
                    cayley.ball_size(hint + r)? - cayley.ball_size(hint)?
                }
                _ => {
                    let set = family.set(cayley, j)?;
                    r_boundary(cayley, &set, r)?.len() as u64
                }
            };
            let applicable = hint + r <= cert.window.radius.saturating_sub(r)
                && row.threshold < hint;
            let ball_r = cayley.ball_size(r)?;
            let ball_thr = cayley.ball_size(row.threshold)?;
            let bound = count_ratio(row.c_obs, ball_r)
                + count_ratio(row.c_obs * rim, ball_r * size)
                + count_ratio(ball_thr, size);
            let ok = !applicable || beta <= bound;
            if !ok {
                all_ok = false;
            }
            bounds.push(DecayBound { r, c: row.c_obs, bound, applicable, ok });
        }
        rows.push(DecayRow { j, size, count, beta, bounds });
    }
    Ok(DecayTable { rows, all_ok })
}

/// x[,y[,z]],ring rows for lattice point clouds.
pub fn point_cloud_csv(spec: &crate::group::GroupSpec, rule: &SetRule) -> Result<String> {
    let dim = spec
        .lattice_dim()
        .ok_or_else(|| Error::ModelMismatch("point clouds need lattice coordinates".into()))?;
    let rings = rule
        .sparse_rings()
        .ok_or_else(|| Error::Invalid("rule carries no ring data".into()))?;
    let mut out = String::new();
    out.push_str(&["x", "y", "z"][..dim].join(","));
    out.push_str(",ring\n");
    for ring in rings {
        for p in &ring.points {
            let coords = p.flat_coords();
            let mut fields: Vec<String> =
                coords.iter().take(dim).map(|c| c.to_string()).collect();
            fields.push(ring.j.to_string());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SparseIteration {
    pub c_label: String,
    pub rule: SetRule,
    pub diagnostics: SparseDiagnostics,
    pub betas: Vec<BigRational>,
}

#[derive(Clone, Debug)]
pub struct IteratedSparse {
    pub iterations: Vec<SparseIteration>,
    /// compare(σ, β₀), compare(β₀, β₁), …
    pub chain: Vec<Comparison<BigRational>>,
    pub chain_all_prec: bool,
    /// True when a further iteration would reproduce the previous β.
    pub stalled: bool,
}

/// Iterates Γ₀ = Γ_σ, Γ_{n+1} = Γ_{β_{Γ_n}} until the requested depth, the
/// window gives out, or the β-profile stops moving.
pub fn iterate_sparse(
    cayley: &mut Cayley,
    family: &FolnerFamily,
    j_max: u64,
    max_depth: usize,
) -> Result<IteratedSparse> {
    let mut iterations: Vec<SparseIteration> = Vec::new();
    let mut stalled = false;
    let mut c = CSequence::SigmaPower(1);
    for _ in 0..max_depth {
        let c_label = c.label();
        let (rule, diagnostics) = sparse_construct(cayley, family, &c, j_max)?;
        let betas: Vec<BigRational> =
            diagnostics.levels.iter().map(|l| l.density.clone()).collect();
        if let Some(prev) = iterations.last() {
            if prev.betas == betas {
                stalled = true;
                break;
            }
        }
        c = CSequence::Explicit(betas.clone());
        iterations.push(SparseIteration { c_label, rule, diagnostics, betas });
    }
    let mut sigma = Vec::new();
    let top = iterations
        .first()
        .map(|it| it.diagnostics.j_computed)
        .unwrap_or(0);
    for j in 1..=top {
        sigma.push(family.sigma(cayley, j)?);
    }
    let opts = CompareOptions::default();
    let mut chain = Vec::new();
    let mut chain_all_prec = true;
    for (i, it) in iterations.iter().enumerate() {
        let lhs = if i == 0 { &sigma } else { &iterations[i - 1].betas };
        let cmp = compare(lhs, &it.betas, &opts)?;
        if !matches!(cmp.verdict, ComparisonVerdict::Prec) {
            chain_all_prec = false;
        }
        chain.push(cmp);
    }
    Ok(IteratedSparse { iterations, chain, chain_all_prec, stalled })
}
