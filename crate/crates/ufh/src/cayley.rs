//! Word metric and ball enumeration on a Cayley graph.
//!
//! Lattices use closed forms (word length = ℓ¹ norm, balls enumerated
//! directly in lexicographic order). The other models run a memoized BFS
//! over the symmetrized generating set, one sphere at a time, guarded by an
//! element cap: a question the enumeration cannot answer yields an error,
//! never a wrong value.
//!
//! Canonical orders: subsets are stored sorted lexicographically on
//! coordinates; search orders are (word length, lex), which makes greedy
//! constructions reproducible.

use crate::error::{Error, Result};
use crate::group::{Element, GroupSpec};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::PathBuf;

/// Default BFS element cap.
pub const DEFAULT_CAP: usize = 10_000_000;

/// Environment variable naming a directory for persisted BFS tables.
pub const CACHE_ENV: &str = "UFH_CACHE_DIR";

const MEMO_MAGIC: &[u8; 8] = b"UFHMEMO1";

pub struct Cayley {
    spec: GroupSpec,
    cap: usize,
    closed_form: bool,
    /// BFS state (unused for closed-form models).
    dist: HashMap<Element, u32>,
    spheres: Vec<Vec<Element>>,
    cache_dir: Option<PathBuf>,
    loaded_radius: u32,
}

impl Cayley {
    /// Production metric: closed forms where available, BFS otherwise.
    /// Honors `UFH_CACHE_DIR` for persisted BFS tables.
    pub fn new(spec: GroupSpec) -> Cayley {
        let cache_dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
        Self::build(spec, DEFAULT_CAP, true, cache_dir)
    }

    /// Forces BFS even for lattices. Used as an independent oracle against
    /// the closed forms.
    pub fn new_bfs_only(spec: GroupSpec) -> Cayley {
        Self::build(spec, DEFAULT_CAP, false, None)
    }

    pub fn with_cap(spec: GroupSpec, cap: usize) -> Cayley {
        Self::build(spec, cap, true, None)
    }

    pub fn with_cache_dir(spec: GroupSpec, dir: Option<PathBuf>) -> Cayley {
        Self::build(spec, DEFAULT_CAP, true, dir)
    }

    fn build(spec: GroupSpec, cap: usize, allow_closed_form: bool, cache_dir: Option<PathBuf>) -> Cayley {
        let closed_form = allow_closed_form && spec.lattice_dim().is_some();
        let mut c = Cayley {
            dist: HashMap::new(),
            spheres: vec![vec![spec.identity()]],
            spec,
            cap,
            closed_form,
            cache_dir,
            loaded_radius: 0,
        };
        c.dist.insert(c.spec.identity(), 0);
        if !c.closed_form {
            c.try_load_cache();
        }
        c
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Radius up to which spheres are currently enumerated.
    pub fn enumerated_radius(&self) -> u32 {
        self.spheres.len() as u32 - 1
    }

    fn expand_one_sphere(&mut self) -> Result<()> {
        let r = self.spheres.len() as u32 - 1;
        let gens = self.spec.symmetric_generators();
        let mut next = Vec::new();
        let frontier = std::mem::take(&mut self.spheres[r as usize]);
        for g in &frontier {
            for s in &gens {
                let n = self.spec.compose(g, s)?;
                if !self.dist.contains_key(&n) {
                    self.dist.insert(n, r + 1);
                    next.push(n);
                }
            }
        }
        self.spheres[r as usize] = frontier;
        if self.dist.len() > self.cap {
            return Err(Error::CapExceeded(format!(
                "BFS on {} exceeded the cap of {} elements at radius {}",
                self.spec.label(),
                self.cap,
                r + 1
            )));
        }
        next.sort();
        self.spheres.push(next);
        Ok(())
    }

    fn ensure_radius(&mut self, r: u32) -> Result<()> {
        debug_assert!(!self.closed_form);
        while self.enumerated_radius() < r {
            self.expand_one_sphere()?;
        }
        Ok(())
    }

    /// Exact word length over the symmetrized standard generators.
    pub fn word_length(&mut self, g: &Element) -> Result<u64> {
        self.spec.validate(g)?;
        if let Some(n) = self.spec.closed_form_length(g) {
            if self.closed_form {
                return Ok(n);
            }
        }
        loop {
            if let Some(&d) = self.dist.get(g) {
                return Ok(d as u64);
            }
            if self.dist.len() >= self.cap {
                return Err(Error::BeyondWindow(format!(
                    "word length of {} not determined within the {}-element cap",
                    g.format(),
                    self.cap
                )));
            }
            self.expand_one_sphere()?;
        }
    }

    /// Left-invariant word distance d(g,h) = |g⁻¹h|.
    pub fn distance(&mut self, g: &Element, h: &Element) -> Result<u64> {
        let gi = self.spec.invert(g)?;
        let gh = self.spec.compose(&gi, h)?;
        self.word_length(&gh)
    }

    /// |B_r(e)|, exact.
    pub fn ball_size(&mut self, r: u64) -> Result<u64> {
        if self.closed_form {
            let d = self.spec.lattice_dim().unwrap();
            return lattice_ball_size(d, r).ok_or(Error::Overflow("ball size"));
        }
        let r32 = fit_u32(r)?;
        self.ensure_radius(r32)?;
        Ok(self.spheres[..=r32 as usize].iter().map(|s| s.len() as u64).sum())
    }

    /// |B_r(e) \ B_{r-1}(e)|, exact.
    pub fn sphere_size(&mut self, r: u64) -> Result<u64> {
        if self.closed_form {
            let d = self.spec.lattice_dim().unwrap();
            return Ok(if r == 0 {
                1
            } else {
                let big = lattice_ball_size(d, r).ok_or(Error::Overflow("ball size"))?;
                big - lattice_ball_size(d, r - 1).unwrap()
            });
        }
        let r32 = fit_u32(r)?;
        self.ensure_radius(r32)?;
        Ok(self.spheres[r32 as usize].len() as u64)
    }

    /// B_r(e) sorted lexicographically.
    pub fn ball(&mut self, r: u64) -> Result<Vec<Element>> {
        if self.closed_form {
            let d = self.spec.lattice_dim().unwrap();
            let size = lattice_ball_size(d, r).ok_or(Error::Overflow("ball size"))?;
            if size > self.cap as u64 {
                return Err(Error::CapExceeded(format!(
                    "ball of radius {} on {} has {} elements, past the cap of {}",
                    r,
                    self.spec.label(),
                    size,
                    self.cap
                )));
            }
            let r = i64::try_from(r).map_err(|_| Error::Overflow("radius"))?;
            let mut out = Vec::with_capacity(size as usize);
            let mut coords = vec![0i64; d];
            enumerate_lattice_ball(d, r, 0, &mut coords, &mut out);
            return Ok(out);
        }
        let r32 = fit_u32(r)?;
        self.ensure_radius(r32)?;
        let mut out: Vec<Element> = self.spheres[..=r32 as usize].iter().flatten().copied().collect();
        out.sort();
        Ok(out)
    }

    /// B_r(center) = center·B_r(e), sorted lexicographically.
    pub fn ball_around(&mut self, center: &Element, r: u64) -> Result<Vec<Element>> {
        self.spec.validate(center)?;
        let ball = self.ball(r)?;
        let mut out = Vec::with_capacity(ball.len());
        for g in &ball {
            out.push(self.spec.compose(center, g)?);
        }
        out.sort();
        Ok(out)
    }

    /// Elements of B_r(e) in canonical search order: (word length, lex).
    pub fn bfs_order(&mut self, r: u64) -> Result<Vec<Element>> {
        if self.closed_form {
            let mut ball = self.ball(r)?;
            let spec = self.spec.clone();
            ball.sort_by_key(|g| (spec.closed_form_length(g).unwrap(), *g));
            return Ok(ball);
        }
        let r32 = fit_u32(r)?;
        self.ensure_radius(r32)?;
        Ok(self.spheres[..=r32 as usize].iter().flatten().copied().collect())
    }

    /// Membership in B_r(e) decided exactly.
    pub fn in_ball(&mut self, g: &Element, r: u64) -> Result<bool> {
        Ok(self.word_length(g)? <= r)
    }

    // ---- persisted BFS tables (opt-in via UFH_CACHE_DIR) ----

    fn cache_path(&self) -> Option<PathBuf> {
        let dir = self.cache_dir.as_ref()?;
        let label: String = self
            .spec
            .label()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        Some(dir.join(format!("{label}.memo")))
    }

    fn try_load_cache(&mut self) {
        let Some(path) = self.cache_path() else { return };
        let Ok(mut f) = std::fs::File::open(&path) else { return };
        let mut buf = Vec::new();
        if f.read_to_end(&mut buf).is_err() {
            return;
        }
        if let Some((spheres, dist)) = decode_memo(&self.spec, &buf) {
            self.loaded_radius = spheres.len() as u32 - 1;
            self.spheres = spheres;
            self.dist = dist;
        }
    }

    /// Writes the current BFS table to the cache directory, if one is set.
    pub fn persist_cache(&self) -> Result<()> {
        let Some(path) = self.cache_path() else { return Ok(()) };
        if self.closed_form || self.enumerated_radius() <= self.loaded_radius {
            return Ok(());
        }
        if let Some(dir) = self.cache_dir.as_ref() {
            std::fs::create_dir_all(dir)?;
        }
        let bytes = encode_memo(&self.spec, &self.spheres);
        let tmp = path.with_extension("memo.tmp");
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
        }
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }
}

impl Drop for Cayley {
    fn drop(&mut self) {
        if self.cache_dir.is_some() {
            let _ = self.persist_cache();
        }
    }
}

fn fit_u32(r: u64) -> Result<u32> {
    u32::try_from(r).map_err(|_| Error::CapExceeded(format!("radius {r} out of range")))
}

/// |B_r| in ℤ^d for the ℓ¹ metric, exact.
/// |B_r(e)| in ℤ^d under ℓ¹: Σ_{k≤d} 2^k·C(d,k)·C(r,k). None on u64 overflow.
pub fn lattice_ball_size(d: usize, r: u64) -> Option<u64> {
    debug_assert!((1..=4).contains(&d), "lattice rank validated at spec construction");
    let mut total: u128 = 0;
    for k in 0..=d as u32 {
        let term = (1u128 << k)
            .checked_mul(binom(d as u128, k)?)?
            .checked_mul(binom(r as u128, k)?)?;
        total = total.checked_add(term)?;
    }
    u64::try_from(total).ok()
}

fn binom(n: u128, k: u32) -> Option<u128> {
    let mut num: u128 = 1;
    for i in 0..k as u128 {
        if n <= i {
            return Some(0);
        }
        num = num.checked_mul(n - i)?;
    }
    for i in 2..=k.max(1) as u128 {
        num /= i;
    }
    Some(num)
}

fn enumerate_lattice_ball(d: usize, budget: i64, idx: usize, coords: &mut Vec<i64>, out: &mut Vec<Element>) {
    if idx == d {
        out.push(Element::lattice(coords));
        return;
    }
    for v in -budget..=budget {
        coords[idx] = v;
        enumerate_lattice_ball(d, budget - v.abs(), idx + 1, coords, out);
    }
    coords[idx] = 0;
}

// Memo file layout: magic, spec-label (len + bytes), sphere count, then per
// sphere the element count followed by flat i64 coordinates.
fn encode_memo(spec: &GroupSpec, spheres: &[Vec<Element>]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MEMO_MAGIC);
    let label = spec.label();
    out.extend_from_slice(&(label.len() as u32).to_le_bytes());
    out.extend_from_slice(label.as_bytes());
    out.extend_from_slice(&(spheres.len() as u32).to_le_bytes());
    for sphere in spheres {
        out.extend_from_slice(&(sphere.len() as u64).to_le_bytes());
        for g in sphere {
            let coords = g.flat_coords();
            out.push(coords.len() as u8);
            for c in coords {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    out
}

fn decode_memo(spec: &GroupSpec, buf: &[u8]) -> Option<(Vec<Vec<Element>>, HashMap<Element, u32>)> {
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Option<&[u8]> {
        let s = buf.get(*pos..*pos + n)?;
        *pos += n;
        Some(s)
    };
    if take(&mut pos, 8)? != MEMO_MAGIC {
        return None;
    }
    let label_len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().ok()?) as usize;
    let label = std::str::from_utf8(take(&mut pos, label_len)?).ok()?;
    if label != spec.label() {
        return None;
    }
    let sphere_count = u32::from_le_bytes(take(&mut pos, 4)?.try_into().ok()?) as usize;
    let mut spheres = Vec::with_capacity(sphere_count);
    let mut dist = HashMap::new();
    for r in 0..sphere_count {
        let n = u64::from_le_bytes(take(&mut pos, 8)?.try_into().ok()?) as usize;
        let mut sphere = Vec::with_capacity(n);
        for _ in 0..n {
            let k = take(&mut pos, 1)?[0] as usize;
            let mut coords = Vec::with_capacity(k);
            for _ in 0..k {
                coords.push(i64::from_le_bytes(take(&mut pos, 8)?.try_into().ok()?));
            }
            let g = spec.element_from_coords(&coords).ok()?;
            dist.insert(g, r as u32);
            sphere.push(g);
        }
        spheres.push(sphere);
    }
    if spheres.is_empty() {
        return None;
    }
    Some((spheres, dist))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(d: usize) -> GroupSpec {
        GroupSpec::int_lattice(d).unwrap()
    }

    #[test]
    fn lattice_ball_sizes_match_bfs_oracle() {
        for d in 1..=3 {
            let mut fast = Cayley::new(z(d));
            let mut slow = Cayley::new_bfs_only(z(d));
            for r in 0..=6u64 {
                assert_eq!(fast.ball_size(r).unwrap(), slow.ball_size(r).unwrap(), "d={d} r={r}");
                assert_eq!(fast.ball(r).unwrap(), slow.ball(r).unwrap(), "d={d} r={r}");
            }
        }
    }

    #[test]
    fn z_ball_closed_form() {
        let mut c = Cayley::new(z(1));
        for r in 0..=20u64 {
            assert_eq!(c.ball_size(r).unwrap(), 2 * r + 1);
        }
        assert_eq!(c.ball(4).unwrap().len(), 9);
    }

    #[test]
    fn z2_ball_closed_form() {
        let mut c = Cayley::new(z(2));
        for r in 0..=20u64 {
            assert_eq!(c.ball_size(r).unwrap(), 2 * r * r + 2 * r + 1);
        }
        assert_eq!(c.ball_size(2).unwrap(), 13);
    }

    #[test]
    fn heis_small_balls() {
        let mut c = Cayley::new(GroupSpec::heisenberg3());
        assert_eq!(c.ball_size(0).unwrap(), 1);
        assert_eq!(c.ball_size(1).unwrap(), 5);
        // Ball sizes for r <= 8 frozen from the first BFS enumeration.
        let sizes: Vec<u64> = (0..=8).map(|r| c.ball_size(r).unwrap()).collect();
        assert_eq!(sizes, vec![1, 5, 17, 53, 135, 299, 593, 1069, 1793]);
    }

    #[test]
    fn heis_word_lengths() {
        let mut c = Cayley::new(GroupSpec::heisenberg3());
        assert_eq!(c.word_length(&Element::heis(0, 0, 0)).unwrap(), 0);
        // The central generator is a commutator: 4 letters and no fewer.
        assert_eq!(c.word_length(&Element::heis(0, 0, 1)).unwrap(), 4);
        assert_eq!(c.word_length(&Element::heis(1, 1, 1)).unwrap(), 2);
        assert_eq!(c.word_length(&Element::heis(1, 1, 0)).unwrap(), 2);
    }

    #[test]
    fn word_length_is_l1_on_lattices() {
        let mut c = Cayley::new(z(2));
        assert_eq!(c.word_length(&Element::lattice(&[3, -2])).unwrap(), 5);
        assert_eq!(c.word_length(&c.spec().identity()).unwrap(), 0);
    }

    #[test]
    fn metric_is_left_invariant() {
        let mut c = Cayley::new(GroupSpec::heisenberg3());
        let spec = c.spec().clone();
        let g = Element::heis(1, -1, 2);
        let h = Element::heis(0, 2, 1);
        let k = Element::heis(2, 1, -1);
        let d = c.distance(&g, &h).unwrap();
        let kg = spec.compose(&k, &g).unwrap();
        let kh = spec.compose(&k, &h).unwrap();
        assert_eq!(c.distance(&kg, &kh).unwrap(), d);
    }

    #[test]
    fn ball_around_translates() {
        let mut c = Cayley::new(z(2));
        let b = c.ball_around(&Element::lattice(&[5, -3]), 2).unwrap();
        assert_eq!(b.len(), 13);
        assert!(b.contains(&Element::lattice(&[5, -3])));
        assert!(b.contains(&Element::lattice(&[7, -3])));
        assert!(!b.contains(&Element::lattice(&[8, -3])));
        assert!(b.windows(2).all(|w| w[0] < w[1]), "sorted and deduped");
    }

    #[test]
    fn bfs_order_is_by_length_then_lex() {
        let mut c = Cayley::new(z(2));
        let order = c.bfs_order(2).unwrap();
        assert_eq!(order[0], Element::lattice(&[0, 0]));
        assert_eq!(
            &order[1..5],
            &[
                Element::lattice(&[-1, 0]),
                Element::lattice(&[0, -1]),
                Element::lattice(&[0, 1]),
                Element::lattice(&[1, 0]),
            ]
        );
        let spec = c.spec().clone();
        let lengths: Vec<u64> = order.iter().map(|g| spec.closed_form_length(g).unwrap()).collect();
        assert!(lengths.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn cap_is_enforced() {
        let mut c = Cayley::with_cap(GroupSpec::heisenberg3(), 100);
        let err = c.ball(10).unwrap_err();
        assert!(matches!(err, Error::CapExceeded(_)));
        let mut c2 = Cayley::with_cap(GroupSpec::heisenberg3(), 100);
        let err2 = c2.word_length(&Element::heis(40, 0, 0)).unwrap_err();
        assert!(matches!(err2, Error::BeyondWindow(_) | Error::CapExceeded(_)));
    }

    #[test]
    fn semidirect_ball_grows() {
        let spec = GroupSpec::lattice_semidirect([[2, 1], [1, 1]]).unwrap();
        let mut c = Cayley::new(spec);
        let b1 = c.ball_size(1).unwrap();
        assert_eq!(b1, 7); // e, ±e1, ±e2, ±t
        let sizes: Vec<u64> = (0..=4).map(|r| c.ball_size(r).unwrap()).collect();
        assert!(sizes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn memo_cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("ufh-memo-test-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        {
            let mut c = Cayley::with_cache_dir(GroupSpec::heisenberg3(), Some(dir.clone()));
            c.ball(4).unwrap();
            c.persist_cache().unwrap();
        }
        let mut c2 = Cayley::with_cache_dir(GroupSpec::heisenberg3(), Some(dir.clone()));
        assert!(c2.enumerated_radius() >= 4, "table restored from disk");
        assert_eq!(c2.ball_size(4).unwrap(), 135);
        let mut fresh = Cayley::new_bfs_only(GroupSpec::heisenberg3());
        assert_eq!(c2.ball(3).unwrap(), fresh.ball(3).unwrap());
        let _ = std::fs::remove_dir_all(&dir);
    }
}
