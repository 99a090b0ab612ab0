//! Degree-0 witness search: find a finite set S with |Σ_{s∈S} c(s)| > n·|∂_1 S|,
//! and the companion bound that boundaries can never produce such growth.
//!
//! A found witness certifies non-triviality at level n on the window; a
//! not-found outcome is inconclusive, never a triviality proof. The search
//! space is the Følner family itself plus supp(c)∩S_j thickened by B_1 —
//! a searchable stand-in for "all finite sets".

use crate::cayley::Cayley;
use crate::chain::UfChain;
use crate::error::{Error, Result};
use crate::func::BoundedFunction;
use crate::geometry::{r_boundary, FiniteSubset, FolnerFamily};
use crate::scalar::Scalar;
use serde_json::{json, Value};

#[derive(Clone, Debug)]
pub struct WhyteWitness<S> {
    pub set: FiniteSubset,
    /// Σ_{s∈S} c(s), exact in rational mode.
    pub sum: S,
    pub boundary_size: u64,
    pub level: u64,
    /// Which candidate in the deterministic stream succeeded (0-based).
    pub candidate_index: usize,
    pub description: String,
}

#[derive(Clone, Debug)]
pub enum WhyteOutcome<S> {
    Found(WhyteWitness<S>),
    /// Budget or window exhausted without a witness. Inconclusive.
    NotFound { candidates_tried: usize },
}

impl<S: Scalar> WhyteOutcome<S> {
    pub fn found(&self) -> Option<&WhyteWitness<S>> {
        match self {
            WhyteOutcome::Found(w) => Some(w),
            WhyteOutcome::NotFound { .. } => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            WhyteOutcome::Found(w) => json!({
                "found": true,
                "level": w.level,
                "sum": w.sum.to_json(),
                "boundary": w.boundary_size,
                "candidate_index": w.candidate_index,
                "description": w.description,
                "set_size": w.set.len(),
            }),
            WhyteOutcome::NotFound { candidates_tried } => json!({
                "found": false,
                "candidates_tried": candidates_tried,
            }),
        }
    }
}

fn chain_sum_over<S: Scalar>(
    c: &BoundedFunction<S>,
    set: &FiniteSubset,
    spec: &crate::group::GroupSpec,
) -> Result<S> {
    let mut sum = S::zero();
    for g in set.iter() {
        sum = sum + c.eval(spec, g)?;
    }
    Ok(sum)
}

fn same_set(a: &FiniteSubset, b: &FiniteSubset) -> bool {
    a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x == y)
}

/// supp(c) ∩ S_j, thickened by B_1. Empty when c vanishes on S_j.
fn support_refinement<S: Scalar>(
    cayley: &mut Cayley,
    c: &BoundedFunction<S>,
    set: &FiniteSubset,
) -> Result<FiniteSubset> {
    let spec = cayley.spec().clone();
    let mut elems = Vec::new();
    for g in set.iter() {
        if !c.eval(&spec, g)?.is_negligible() {
            elems.extend(cayley.ball_around(g, 1)?);
        }
    }
    elems.sort();
    elems.dedup();
    Ok(FiniteSubset::from_sorted(spec, elems))
}

/// Searches for S with |Σ_S c| > n·|∂_1 S|. Deterministic: per j the
/// candidates are S_j, then the support refinement when it differs.
/// Running out of window is reported as not-found, not as an error.
pub fn whyte_witness<S: Scalar>(
    cayley: &mut Cayley,
    c: &BoundedFunction<S>,
    family: &FolnerFamily,
    level: u64,
    budget: usize,
) -> Result<WhyteOutcome<S>> {
    if level == 0 {
        return Err(Error::Invalid("witness level must be at least 1".into()));
    }
    let spec = cayley.spec().clone();
    let mut tried = 0usize;
    let mut j = 1u64;
    while tried < budget {
        let base = match family.set(cayley, j) {
            Ok(s) => s,
            Err(Error::CapExceeded(_)) | Err(Error::BeyondWindow(_)) => {
                return Ok(WhyteOutcome::NotFound { candidates_tried: tried })
            }
            Err(e) => return Err(e),
        };
        let refinement = support_refinement(cayley, c, &base)?;
        let mut candidates = vec![(base, format!("S_{j}"))];
        if !same_set(&candidates[0].0, &refinement) && refinement.len() > 0 {
            candidates.push((refinement, format!("B_1(supp ∩ S_{j})")));
        }
        for (set, description) in candidates {
            if tried >= budget {
                break;
            }
            let candidate_index = tried;
            tried += 1;
            let sum = chain_sum_over(c, &set, &spec)?;
            let boundary_size = r_boundary(cayley, &set, 1)?.len() as u64;
            let threshold = S::from_i64((level * boundary_size) as i64);
            if sum.abs() > threshold {
                return Ok(WhyteOutcome::Found(WhyteWitness {
                    set,
                    sum,
                    boundary_size,
                    level,
                    candidate_index,
                    description,
                }));
            }
        }
        j += 1;
    }
    Ok(WhyteOutcome::NotFound { candidates_tried: tried })
}

#[derive(Clone, Debug)]
pub struct BoundaryBoundRow<S> {
    pub set_index: usize,
    pub set_size: usize,
    /// |Σ_{s∈S} (∂b)(s)|
    pub lhs: S,
    /// 2·‖b‖_∞·|B_R|·|∂_R S|
    pub bound: S,
    pub rim_size: u64,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct BoundaryBoundReport<S> {
    pub span: u64,
    pub sup_norm: S,
    pub ball_size: u64,
    pub rows: Vec<BoundaryBoundRow<S>>,
    pub violations: Vec<usize>,
}

impl<S: Scalar> BoundaryBoundReport<S> {
    pub fn all_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks |Σ_S ∂b| ≤ 2·‖b‖_∞·|B_R|·|∂_R S| with R the span of b, for each
/// test set. Only boundary-crossing edges contribute to the sum, and each
/// has an endpoint in ∂_R S with at most |B_R| partners — so a violation
/// indicates a bug, and is reported with its witness rather than raised.
pub fn boundary_bound_check<S: Scalar>(
    cayley: &mut Cayley,
    b: &UfChain<S>,
    test_sets: &[FiniteSubset],
) -> Result<BoundaryBoundReport<S>> {
    if b.degree() != 1 {
        return Err(Error::Degree(format!(
            "boundary bound applies to degree-1 chains, got degree {}",
            b.degree()
        )));
    }
    let span = b.span(cayley)?;
    let sup_norm = b.sup_norm();
    let ball = cayley.ball_size(span)?;
    let d0 = b.boundary()?;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for (set_index, set) in test_sets.iter().enumerate() {
        let mut sum = S::zero();
        for (tuple, coeff) in d0.entries() {
            if set.contains(&tuple[0]) {
                sum = sum + coeff.clone();
            }
        }
        let lhs = sum.abs();
        let rim_size = r_boundary(cayley, set, span)?.len() as u64;
        let bound = S::from_i64(2)
            * sup_norm.clone()
            * S::from_i64(ball as i64)
            * S::from_i64(rim_size as i64);
        let ok = lhs <= bound;
        if !ok {
            violations.push(set_index);
        }
        rows.push(BoundaryBoundRow { set_index, set_size: set.len(), lhs, bound, rim_size, ok });
    }
    Ok(BoundaryBoundReport { span, sup_norm, ball_size: ball, rows, violations })
}
