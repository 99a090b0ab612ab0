//! Finitely supported chains with bounded coefficients and bounded tuple
//! diameter, the boundary operator, and pushforwards along coarse maps.

use crate::cayley::Cayley;
use crate::error::{Error, Result};
use crate::group::{Element, GroupSpec};
use crate::scalar::Scalar;
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// A degree-n chain: finite support of (n+1)-tuples with scalar coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct UfChain<S> {
    spec: GroupSpec,
    degree: u32,
    support: BTreeMap<Vec<Element>, S>,
    /// Span bound claimed by a construction (e.g. λ·R + ε after a coarse
    /// pushforward); the exact span is always recomputable.
    pub claimed_span: Option<f64>,
}

impl<S: Scalar> UfChain<S> {
    pub fn zero(spec: GroupSpec, degree: u32) -> UfChain<S> {
        UfChain { spec, degree, support: BTreeMap::new(), claimed_span: None }
    }

    pub fn from_entries(
        spec: GroupSpec,
        degree: u32,
        entries: Vec<(Vec<Element>, S)>,
    ) -> Result<UfChain<S>> {
        let mut c = UfChain::zero(spec, degree);
        for (tuple, coeff) in entries {
            c.add_term(tuple, coeff)?;
        }
        Ok(c)
    }

    pub fn single(spec: GroupSpec, tuple: Vec<Element>, coeff: S) -> Result<UfChain<S>> {
        let degree = (tuple.len() as u32)
            .checked_sub(1)
            .ok_or_else(|| Error::Degree("a chain entry needs at least one vertex".into()))?;
        UfChain::from_entries(spec, degree, vec![(tuple, coeff)])
    }

    /// Adds coeff·tuple, summing with any existing coefficient and pruning
    /// exact/negligible zeros.
    pub fn add_term(&mut self, tuple: Vec<Element>, coeff: S) -> Result<()> {
        if tuple.len() != self.degree as usize + 1 {
            return Err(Error::Degree(format!(
                "degree-{} chain entries have {} vertices, got {}",
                self.degree,
                self.degree + 1,
                tuple.len()
            )));
        }
        for e in &tuple {
            self.spec.validate(e)?;
        }
        let new = match self.support.remove(&tuple) {
            Some(old) => old + coeff,
            None => coeff,
        };
        if !new.is_negligible() {
            self.support.insert(tuple, new);
        }
        Ok(())
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<Element>, &S)> {
        self.support.iter()
    }

    pub fn coeff(&self, tuple: &[Element]) -> S {
        self.support.get(tuple).cloned().unwrap_or_else(S::zero)
    }

    pub fn sup_norm(&self) -> S {
        let mut m = S::zero();
        for v in self.support.values() {
            let a = v.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Exact span: max over supported tuples of the max pairwise distance.
    pub fn span(&self, cayley: &mut Cayley) -> Result<u64> {
        let mut span = 0;
        for tuple in self.support.keys() {
            for i in 0..tuple.len() {
                for j in (i + 1)..tuple.len() {
                    span = span.max(cayley.distance(&tuple[i], &tuple[j])?);
                }
            }
        }
        Ok(span)
    }

    pub fn scaled(&self, factor: &S) -> UfChain<S> {
        let mut out = UfChain::zero(self.spec.clone(), self.degree);
        for (t, c) in &self.support {
            let v = factor.clone() * c.clone();
            if !v.is_negligible() {
                out.support.insert(t.clone(), v);
            }
        }
        out
    }

    pub fn plus(&self, other: &UfChain<S>) -> Result<UfChain<S>> {
        if self.degree != other.degree {
            return Err(Error::Degree("cannot add chains of different degree".into()));
        }
        let mut out = self.clone();
        for (t, c) in &other.support {
            out.add_term(t.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn minus(&self, other: &UfChain<S>) -> Result<UfChain<S>> {
        self.plus(&other.scaled(&(S::zero() - S::one())))
    }

    /// ∂_n: drop each vertex in turn with alternating signs.
    pub fn boundary(&self) -> Result<UfChain<S>> {
        if self.degree == 0 {
            return Err(Error::Degree("degree-0 chains have no boundary".into()));
        }
        let mut out = UfChain::zero(self.spec.clone(), self.degree - 1);
        for (tuple, coeff) in &self.support {
            for j in 0..tuple.len() {
                let mut face = tuple.clone();
                face.remove(j);
                let signed = if j % 2 == 0 {
                    coeff.clone()
                } else {
                    S::zero() - coeff.clone()
                };
                out.add_term(face, signed)?;
            }
        }
        Ok(out)
    }

    /// Pushforward along f: coefficients of colliding image tuples sum.
    /// (λ, ε) are the claimed coarse-Lipschitz constants of f; they are
    /// recorded into the output's claimed span, not verified globally.
    pub fn qi_push(
        &self,
        cayley: &mut Cayley,
        f: &dyn Fn(&Element) -> Result<Element>,
        lambda: f64,
        eps: f64,
    ) -> Result<UfChain<S>> {
        let span = self.span(cayley)? as f64;
        let mut out = UfChain::zero(self.spec.clone(), self.degree);
        for (tuple, coeff) in &self.support {
            let image = tuple.iter().map(f).collect::<Result<Vec<_>>>()?;
            out.add_term(image, coeff.clone())?;
        }
        out.claimed_span = Some(lambda * span + eps);
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "span": self.claimed_span,
            "entries": self
                .support
                .iter()
                .map(|(t, c)| json!({
                    "tuple": t.iter().map(|e| self.spec.element_to_json(e)).collect::<Vec<_>>(),
                    "coeff": c.to_json(),
                }))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(spec: &GroupSpec, v: &Value) -> Result<UfChain<S>> {
        let degree = v
            .get("degree")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Invalid("chain needs a degree".into()))? as u32;
        let mut c = UfChain::zero(spec.clone(), degree);
        for entry in v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Invalid("chain needs entries".into()))?
        {
            let tuple = entry
                .get("tuple")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Invalid("entry needs a tuple".into()))?
                .iter()
                .map(|e| spec.element_from_json(e))
                .collect::<Result<Vec<_>>>()?;
            let coeff = S::from_json(
                entry.get("coeff").ok_or_else(|| Error::Invalid("entry needs a coeff".into()))?,
            )?;
            c.add_term(tuple, coeff)?;
        }
        c.claimed_span = v.get("span").and_then(Value::as_f64);
        Ok(c)
    }
}

/// The fundamental interval 1-chain Σ_{k=lo..hi-1} 1·((k),(k+1)) on ℤ.
pub fn interval_chain<S: Scalar>(spec: &GroupSpec, lo: i64, hi: i64) -> Result<UfChain<S>> {
    if spec.lattice_dim() != Some(1) {
        return Err(Error::ModelMismatch("interval chains live on ℤ".into()));
    }
    let mut c = UfChain::zero(spec.clone(), 1);
    for k in lo..hi {
        c.add_term(vec![Element::lattice(&[k]), Element::lattice(&[k + 1])], S::one())?;
    }
    Ok(c)
}
