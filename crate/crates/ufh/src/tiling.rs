//! Greedy r-tilings: maximal 2r-separated center sets in canonical BFS
//! order, the window-restricted T_j subsets, and the two-sided density
//! bounds with their onset index.

use crate::cayley::Cayley;
use crate::error::{Error, Result};
use crate::geometry::{FiniteSubset, FolnerFamily, Window};
use crate::group::Element;
use crate::scalar::count_ratio;
use num::rational::BigRational;
use serde_json::{json, Value};
use std::collections::HashSet;

/// Packing: distinct centers are > 2r apart. Covering: every element of
/// B_{W-2r}(e) is within 2r of a center (maximality gives it on the whole
/// window, but only the interior claim survives rim truncation).
#[derive(Clone, Debug)]
pub struct Tiling {
    pub r: u64,
    pub window: Window,
    pub centers: FiniteSubset,
    pub packing_ok: bool,
    pub covering_ok_on_interior: bool,
}

/// Greedy maximal 2r-separated subset of B_W(e), scanning in canonical
/// (word length, lex) order. Deterministic by construction.
pub fn greedy_tiling(cayley: &mut Cayley, r: u64, window: Window) -> Result<Tiling> {
    if r == 0 {
        return Err(Error::Invalid("tiling radius must be positive".into()));
    }
    if window.radius < 2 * r {
        return Err(Error::WindowTooSmall(format!(
            "window {} cannot hold a 2r = {} separation",
            window.radius,
            2 * r
        )));
    }
    let spec = cayley.spec().clone();
    let order = cayley.bfs_order(window.radius)?;
    let ball2r = cayley.ball(2 * r)?;
    let mut blocked: HashSet<Element> = HashSet::new();
    let mut centers = Vec::new();
    for g in &order {
        if blocked.contains(g) {
            continue;
        }
        centers.push(*g);
        for b in &ball2r {
            blocked.insert(spec.compose(g, b)?);
        }
    }
    centers.sort();
    let centers = FiniteSubset::from_sorted(spec.clone(), centers);

    // Independent re-checks of both tiling axioms.
    let mut packing_ok = true;
    'outer: for t in centers.iter() {
        for b in &ball2r {
            let x = spec.compose(t, b)?;
            if x != *t && centers.contains(&x) {
                packing_ok = false;
                break 'outer;
            }
        }
    }
    let mut covering_ok = true;
    let interior = cayley.ball(window.radius - 2 * r)?;
    for g in &interior {
        if !blocked.contains(g) {
            covering_ok = false;
            break;
        }
    }
    Ok(Tiling { r, window, centers, packing_ok, covering_ok_on_interior: covering_ok })
}

/// T_S = { t ∈ centers : B_r(t) ⊆ S }. The result is exact when S stays in
/// the window interior B_{W-r}(e); otherwise `exact` is false (centers past
/// the rim were never enumerated).
pub fn tiles_in(
    cayley: &mut Cayley,
    tiling: &Tiling,
    s: &FiniteSubset,
) -> Result<(FiniteSubset, bool)> {
    let spec = cayley.spec().clone();
    let ball_r = cayley.ball(tiling.r)?;
    let mut out = Vec::new();
    'next: for t in tiling.centers.iter() {
        for b in &ball_r {
            if !s.contains(&spec.compose(t, b)?) {
                continue 'next;
            }
        }
        out.push(*t);
    }
    let mut exact = true;
    let margin = tiling.window.radius.saturating_sub(tiling.r);
    for g in s.iter() {
        if cayley.word_length(g)? > margin {
            exact = false;
            break;
        }
    }
    out.sort();
    Ok((FiniteSubset::from_sorted(spec, out), exact))
}

#[derive(Clone, Debug)]
pub struct DensityRow {
    pub j: u64,
    pub tiles: u64,
    pub size: u64,
    pub density: BigRational,
    pub lower: BigRational,
    pub upper: BigRational,
    pub ok: bool,
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub struct TilingIndex {
    pub r: u64,
    pub rows: Vec<DensityRow>,
    /// Least computed l with the two-sided bound holding for every computed
    /// j ∈ [l, j_max]; None when not attained in range.
    pub l_estimate: Option<u64>,
}

pub const DENSITY_CSV_HEADER: &str = "j,tiles,size,density,lower,upper";

impl TilingIndex {
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(DENSITY_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.j,
                row.tiles,
                row.size,
                crate::scalar::Scalar::to_f64(&row.density),
                crate::scalar::Scalar::to_f64(&row.lower),
                crate::scalar::Scalar::to_f64(&row.upper),
            ));
        }
        out
    }
}

/// Density profile |T_j|/|S_j| against the bounds 1/(2|B_{2r}(e)|) and
/// 1/|B_r(e)|, with the least index from which the bounds hold on range.
/// The whole computation is exact.
pub fn tiling_index(
    cayley: &mut Cayley,
    tiling: &Tiling,
    family: &FolnerFamily,
    j_max: u64,
) -> Result<TilingIndex> {
    let r = tiling.r;
    let lower = {
        let b2r = cayley.ball_size(2 * r)?;
        count_ratio(1, 2 * b2r)
    };
    let upper = count_ratio(1, cayley.ball_size(r)?);
    let spec = cayley.spec().clone();
    let ball_r = cayley.ball(r)?;
    let mut rows = Vec::new();
    for j in 1..=j_max {
        if family.radius_hint(j)?.saturating_add(r) > tiling.window.radius {
            return Err(Error::WindowTooSmall(format!(
                "S_{j} plus a tiling margin of {r} does not fit in window {}",
                tiling.window.radius
            )));
        }
        let mut tiles = 0u64;
        'next: for t in tiling.centers.iter() {
            for b in &ball_r {
                if !family.member(cayley, j, &spec.compose(t, b)?)? {
                    continue 'next;
                }
            }
            tiles += 1;
        }
        let size = family.size(cayley, j)?;
        let density = count_ratio(tiles, size);
        let ok = lower <= density && density <= upper;
        rows.push(DensityRow {
            j,
            tiles,
            size,
            density,
            lower: lower.clone(),
            upper: upper.clone(),
            ok,
            exact: true,
        });
    }
    let l_estimate = estimate_onset(&rows);
    Ok(TilingIndex { r, rows, l_estimate })
}

/// Least l such that every computed row with j ≥ l passes.
fn estimate_onset(rows: &[DensityRow]) -> Option<u64> {
    let mut last_fail = None;
    for row in rows {
        if !row.ok {
            last_fail = Some(row.j);
        }
    }
    match last_fail {
        None => rows.first().map(|r| r.j),
        Some(jf) => {
            let next = rows.iter().find(|r| r.j > jf)?;
            Some(next.j)
        }
    }
}

pub fn tiling_to_json(t: &Tiling) -> Value {
    json!({
        "r": t.r,
        "window": t.window.radius,
        "packing_ok": t.packing_ok,
        "covering_ok_on_interior": t.covering_ok_on_interior,
        "centers": t.centers.to_json(),
    })
}
