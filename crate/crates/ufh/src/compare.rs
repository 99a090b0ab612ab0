//! Finite-range comparison of positive sequences (≺ / ∼ / ⪰ evidence),
//! β-profiles of bounded functions along a Følner family, and the
//! linear-independence report for families of degree-0 classes.
//!
//! Verdicts here are classifications of finite data, never proofs; every
//! report carries its index range.

use crate::cayley::Cayley;
use crate::error::{Error, Result};
use crate::func::BoundedFunction;
use crate::geometry::{growth_table, FolnerFamily, GrowthTable};
use crate::scalar::Scalar;
use serde_json::{json, Value};

#[derive(Clone, PartialEq, Debug)]
pub enum ComparisonVerdict<S> {
    /// Ratios α/β decay to ~0 over the tail.
    Prec,
    /// Ratios stabilize at the carried positive estimate.
    Sim(S),
    /// β/α decays: α dominates.
    Succ,
    Inconclusive,
}

impl<S: Scalar> ComparisonVerdict<S> {
    pub fn label(&self) -> String {
        match self {
            ComparisonVerdict::Prec => "prec".into(),
            ComparisonVerdict::Sim(l) => format!("sim({})", l.to_f64()),
            ComparisonVerdict::Succ => "succ".into(),
            ComparisonVerdict::Inconclusive => "inconclusive".into(),
        }
    }

    pub fn is_prec(&self) -> bool {
        matches!(self, ComparisonVerdict::Prec)
    }
}

#[derive(Clone, Debug)]
pub struct CompareOptions<S> {
    /// Relative tolerance for both the plateau test and the decay test.
    pub tol: S,
}

impl<S: Scalar> Default for CompareOptions<S> {
    fn default() -> Self {
        CompareOptions { tol: S::from_ratio(1, 20) }
    }
}

#[derive(Clone, Debug)]
pub struct Comparison<S> {
    pub verdict: ComparisonVerdict<S>,
    pub ratios: Vec<S>,
    /// Index into `ratios` where the K-point tail starts.
    pub tail_start: usize,
    pub tail_nonincreasing: bool,
    pub tail_nondecreasing: bool,
}

impl<S: Scalar> Comparison<S> {
    /// All verdicts are evidence over the computed range only.
    pub const EVIDENCE: &'static str = "finite-range evidence";

    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict.label(),
            "evidence": Self::EVIDENCE,
            "tail_start": self.tail_start,
            "tail_nonincreasing": self.tail_nonincreasing,
            "tail_nondecreasing": self.tail_nondecreasing,
            "ratios": self.ratios.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        })
    }
}

fn ratios_of<S: Scalar>(alpha: &[S], beta: &[S]) -> Result<Vec<S>> {
    if alpha.len() != beta.len() {
        return Err(Error::Invalid(format!(
            "mismatched ranges: {} vs {} values",
            alpha.len(),
            beta.len()
        )));
    }
    if alpha.len() < 2 {
        return Err(Error::Invalid("need at least two data points".into()));
    }
    for b in beta {
        if *b <= S::zero() {
            return Err(Error::Invalid("denominator sequence must be strictly positive".into()));
        }
    }
    Ok(alpha
        .iter()
        .zip(beta)
        .map(|(a, b)| a.clone() / b.clone())
        .collect())
}

/// Plateau test on the last half: mean L > 0 and every ratio within tol·L.
/// At least two points, so a lone endpoint can never fake a plateau.
fn plateau<S: Scalar>(ratios: &[S], tol: &S) -> Option<S> {
    let half = ratios.len().div_ceil(2).max(2).min(ratios.len());
    let tail = &ratios[ratios.len() - half..];
    let mut sum = S::zero();
    for r in tail {
        sum = sum + r.clone();
    }
    let level = sum / S::from_i64(tail.len() as i64);
    if level <= S::zero() {
        return None;
    }
    let slack = tol.clone() * level.clone();
    for r in tail {
        if (r.clone() - level.clone()).abs() > slack {
            return None;
        }
    }
    Some(level)
}

/// Decay test on the K-point tail: nonincreasing, and either already below
/// tol or dropped by at least the tol fraction across the tail.
fn decays<S: Scalar>(ratios: &[S], tail_start: usize, tol: &S) -> bool {
    let tail = &ratios[tail_start..];
    if tail.windows(2).any(|w| w[1] > w[0]) {
        return false;
    }
    let first = tail.first().cloned().unwrap_or_else(S::zero);
    let last = tail.last().cloned().unwrap_or_else(S::zero);
    if last <= *tol {
        return true;
    }
    last <= (S::one() - tol.clone()) * first
}

/// Classifies α against β from their common index range.
///
/// Order of tests: plateau (∼) first — a slowly drifting plateau must not
/// masquerade as decay — then α/β decay (≺), then β/α decay (⪰, skipped
/// when α has zeros), else inconclusive.
pub fn compare<S: Scalar>(
    alpha: &[S],
    beta: &[S],
    opts: &CompareOptions<S>,
) -> Result<Comparison<S>> {
    let ratios = ratios_of(alpha, beta)?;
    let k = (ratios.len() / 2).clamp(2, 10).min(ratios.len());
    let tail_start = ratios.len() - k;
    let tail = &ratios[tail_start..];
    let tail_nonincreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    let tail_nondecreasing = tail.windows(2).all(|w| w[1] >= w[0]);
    let mut cmp = Comparison {
        verdict: ComparisonVerdict::Inconclusive,
        ratios,
        tail_start,
        tail_nonincreasing,
        tail_nondecreasing,
    };
    if let Some(level) = plateau(&cmp.ratios, &opts.tol) {
        cmp.verdict = ComparisonVerdict::Sim(level);
        return Ok(cmp);
    }
    if decays(&cmp.ratios, tail_start, &opts.tol) {
        cmp.verdict = ComparisonVerdict::Prec;
        return Ok(cmp);
    }
    if alpha.iter().all(|a| *a > S::zero()) {
        let reciprocal = ratios_of(beta, alpha)?;
        if plateau(&reciprocal, &opts.tol).is_none() && decays(&reciprocal, tail_start, &opts.tol)
        {
            cmp.verdict = ComparisonVerdict::Succ;
            return Ok(cmp);
        }
    }
    Ok(cmp)
}

/// Growth table of β_c(j) = |Σ_{S_j} c| / |S_j| over the given indices.
pub fn beta_profile<S: Scalar>(
    cayley: &mut Cayley,
    c: &BoundedFunction<S>,
    family: &FolnerFamily,
    idx: &[u64],
) -> Result<GrowthTable<S>> {
    growth_table(cayley, family, Some(c), idx)
}

#[derive(Clone, Debug)]
pub struct IndependenceReport<S> {
    pub indices: Vec<u64>,
    pub sigma: Vec<S>,
    /// β-profiles per function, in input order.
    pub betas: Vec<Vec<S>>,
    /// M[i][k] = (Σ c_i)/(Σ c_k) over the top index.
    pub matrix: Vec<Vec<S>>,
    /// compare(σ, β_i) per function.
    pub sigma_comparisons: Vec<Comparison<S>>,
    /// compare(β_i, β_{i+1}) for consecutive functions.
    pub chain_comparisons: Vec<Comparison<S>>,
    /// σ ≺ β₁ and β_i ≺ β_{i+1} across the list (in the given order).
    pub ordered_chain: bool,
}

impl<S: Scalar> IndependenceReport<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "indices": self.indices,
            "evidence": Comparison::<S>::EVIDENCE,
            "ordered_chain": self.ordered_chain,
            "matrix": self
                .matrix
                .iter()
                .map(|row| row.iter().map(|v| v.to_json()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "sigma_verdicts": self
                .sigma_comparisons
                .iter()
                .map(|c| c.verdict.label())
                .collect::<Vec<_>>(),
            "chain_verdicts": self
                .chain_comparisons
                .iter()
                .map(|c| c.verdict.label())
                .collect::<Vec<_>>(),
        })
    }
}

/// β-profiles for every function over the index list, the ratio matrix at
/// the top index, and the ordered-chain verdict σ ≺ β₁ ≺ β₂ ≺ … for the
/// input order. Callers should pass functions from fastest-decaying β to
/// slowest.
pub fn independence_matrix<S: Scalar>(
    cayley: &mut Cayley,
    functions: &[BoundedFunction<S>],
    family: &FolnerFamily,
    idx: &[u64],
    opts: &CompareOptions<S>,
) -> Result<IndependenceReport<S>> {
    if functions.is_empty() {
        return Err(Error::EmptySet("no functions to compare"));
    }
    let mut betas: Vec<Vec<S>> = Vec::new();
    let mut sums_at_top: Vec<S> = Vec::new();
    let mut sigma: Vec<S> = Vec::new();
    let mut indices: Vec<u64> = Vec::new();
    for (fi, f) in functions.iter().enumerate() {
        let table = beta_profile(cayley, f, family, idx)?;
        if table.truncated_at.is_some() || table.rows.len() != idx.len() {
            return Err(Error::WindowTooSmall(format!(
                "β-profile truncated at {:?}; shrink the index range",
                table.truncated_at
            )));
        }
        if fi == 0 {
            sigma = table.sigma_values();
            indices = table.indices();
        }
        let top = table.rows.last().expect("nonempty checked above");
        if top.chain_sum.is_negligible() {
            return Err(Error::Invalid(format!(
                "function #{fi} sums to zero at the top index; ratios are undefined"
            )));
        }
        sums_at_top.push(top.chain_sum.abs());
        betas.push(table.beta_values());
    }
    let n = functions.len();
    let mut matrix = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            matrix[i][k] = sums_at_top[i].clone() / sums_at_top[k].clone();
        }
    }
    let mut sigma_comparisons = Vec::new();
    for beta in &betas {
        sigma_comparisons.push(compare(&sigma, beta, opts)?);
    }
    let mut chain_comparisons = Vec::new();
    for w in betas.windows(2) {
        chain_comparisons.push(compare(&w[0], &w[1], opts)?);
    }
    let ordered_chain = sigma_comparisons.first().map(|c| c.verdict.is_prec()).unwrap_or(false)
        && chain_comparisons.iter().all(|c| c.verdict.is_prec());
    Ok(IndependenceReport {
        indices,
        sigma,
        betas,
        matrix,
        sigma_comparisons,
        chain_comparisons,
        ordered_chain,
    })
}
