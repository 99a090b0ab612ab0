//! The ℓ∞-coefficient presentation of chains and everything that runs
//! through it: the ρ translation, Følner-approximate means, the transfer
//! back to real coefficients, invariant cycles built from templates, and
//! coset averaging for normal subgroups.
//!
//! Coefficient functions in ℓ∞ chains are kept in the
//! constant-plus-finitely-many-deltas subalgebra: it contains every ρ-image
//! and every i_star-image, it is closed under the translations the boundary
//! formula needs, and its supports stay decidable — so means and round
//! trips are exact.

use crate::cayley::Cayley;
use crate::chain::UfChain;
use crate::error::{Error, Result};
use crate::func::BoundedFunction;
use crate::geometry::{r_boundary, FiniteSubset, FolnerFamily};
use crate::group::{Element, GroupSpec, SubgroupSpec};
use crate::scalar::Scalar;
use std::collections::BTreeMap;

/// φ(g) = constant + Σ deltas[g]. Zero-weight deltas are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct CoeffFn<S> {
    pub constant: S,
    deltas: BTreeMap<Element, S>,
}

impl<S: Scalar> CoeffFn<S> {
    pub fn zero() -> CoeffFn<S> {
        CoeffFn { constant: S::zero(), deltas: BTreeMap::new() }
    }

    pub fn constant(v: S) -> CoeffFn<S> {
        CoeffFn { constant: v, deltas: BTreeMap::new() }
    }

    pub fn delta(at: Element, weight: S) -> CoeffFn<S> {
        let mut f = CoeffFn::zero();
        f.add_delta(at, weight);
        f
    }

    pub fn add_delta(&mut self, at: Element, weight: S) {
        let v = match self.deltas.remove(&at) {
            Some(old) => old + weight,
            None => weight,
        };
        if !v.is_negligible() {
            self.deltas.insert(at, v);
        }
    }

    pub fn deltas(&self) -> impl Iterator<Item = (&Element, &S)> {
        self.deltas.iter()
    }

    pub fn is_trivial(&self) -> bool {
        self.constant.is_negligible() && self.deltas.is_empty()
    }

    pub fn eval(&self, g: &Element) -> S {
        match self.deltas.get(g) {
            Some(w) => self.constant.clone() + w.clone(),
            None => self.constant.clone(),
        }
    }

    pub fn plus(&self, other: &CoeffFn<S>) -> CoeffFn<S> {
        let mut out = self.clone();
        out.constant = out.constant + other.constant.clone();
        for (x, w) in &other.deltas {
            out.add_delta(*x, w.clone());
        }
        out
    }

    pub fn scaled(&self, factor: &S) -> CoeffFn<S> {
        let mut out = CoeffFn::constant(self.constant.clone() * factor.clone());
        for (x, w) in &self.deltas {
            out.add_delta(*x, w.clone() * factor.clone());
        }
        out
    }

    /// (h·φ)(g) = φ(h⁻¹g): constant part fixed, delta at x moves to h·x.
    pub fn left_translated(&self, spec: &GroupSpec, h: &Element) -> Result<CoeffFn<S>> {
        let mut out = CoeffFn::constant(self.constant.clone());
        for (x, w) in &self.deltas {
            out.add_delta(spec.compose(h, x)?, w.clone());
        }
        Ok(out)
    }

    /// The same function as a generic rule tree (for interop with code that
    /// wants a `BoundedFunction`).
    pub fn to_bounded(&self, spec: &GroupSpec) -> Result<BoundedFunction<S>> {
        let mut terms =
            vec![(self.constant.clone(), BoundedFunction::one())];
        for (x, w) in &self.deltas {
            terms.push((w.clone(), BoundedFunction::delta(spec, *x)?));
        }
        Ok(BoundedFunction::linear(terms))
    }
}

/// Degree-n chain in ℓ∞ form: finitely many n-tuples with `CoeffFn`
/// coefficients. Degree 0 has the single empty tuple.
#[derive(Clone, PartialEq, Debug)]
pub struct LInftyChain<S> {
    spec: GroupSpec,
    degree: u32,
    coeffs: BTreeMap<Vec<Element>, CoeffFn<S>>,
}

impl<S: Scalar> LInftyChain<S> {
    pub fn zero(spec: GroupSpec, degree: u32) -> LInftyChain<S> {
        LInftyChain { spec, degree, coeffs: BTreeMap::new() }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn tuples(&self) -> impl Iterator<Item = (&Vec<Element>, &CoeffFn<S>)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, tuple: &[Element]) -> CoeffFn<S> {
        self.coeffs.get(tuple).cloned().unwrap_or_else(CoeffFn::zero)
    }

    pub fn add(&mut self, tuple: Vec<Element>, f: CoeffFn<S>) -> Result<()> {
        if tuple.len() != self.degree as usize {
            return Err(Error::Degree(format!(
                "ℓ∞ degree-{} entries have {} vertices, got {}",
                self.degree,
                self.degree,
                tuple.len()
            )));
        }
        for e in &tuple {
            self.spec.validate(e)?;
        }
        let combined = match self.coeffs.remove(&tuple) {
            Some(old) => old.plus(&f),
            None => f,
        };
        if !combined.is_trivial() {
            self.coeffs.insert(tuple, combined);
        }
        Ok(())
    }

    /// ∂(φ⊗(t₁,…,t_n)) = (t₁⁻¹·φ)⊗(t₁⁻¹t₂,…,t₁⁻¹t_n)
    ///                  + Σ_{j≥1} (−1)^j φ⊗(t₁,…,t̂_j,…,t_n).
    pub fn boundary(&self) -> Result<LInftyChain<S>> {
        if self.degree == 0 {
            return Err(Error::Degree("degree-0 chains have no boundary".into()));
        }
        let spec = self.spec.clone();
        let mut out = LInftyChain::zero(spec.clone(), self.degree - 1);
        for (tuple, phi) in &self.coeffs {
            let t1 = &tuple[0];
            let t1_inv = spec.invert(t1)?;
            let face0: Vec<Element> = tuple[1..]
                .iter()
                .map(|t| spec.compose(&t1_inv, t))
                .collect::<Result<Vec<_>>>()?;
            out.add(face0, phi.left_translated(&spec, &t1_inv)?)?;
            let minus_one = S::zero() - S::one();
            for j in 0..tuple.len() {
                // Dropping t_{j+1} from (e, t₁, …, t_n) carries sign (−1)^{j+1}.
                let mut face = tuple.clone();
                face.remove(j);
                let signed = if j % 2 == 1 { phi.clone() } else { phi.scaled(&minus_one) };
                out.add(face, signed)?;
            }
        }
        Ok(out)
    }
}

/// Reduced real chain: n-tuples (t₁,…,t_n) with scalar coefficients. This
/// is the ρ-coordinate form of a based chain; `to_based_uf` restores the
/// (e, t₁, …, t_n) presentation.
#[derive(Clone, PartialEq, Debug)]
pub struct GroupChain<S> {
    spec: GroupSpec,
    degree: u32,
    support: BTreeMap<Vec<Element>, S>,
}

impl<S: Scalar> GroupChain<S> {
    pub fn zero(spec: GroupSpec, degree: u32) -> GroupChain<S> {
        GroupChain { spec, degree, support: BTreeMap::new() }
    }

    pub fn from_entries(
        spec: GroupSpec,
        degree: u32,
        entries: Vec<(Vec<Element>, S)>,
    ) -> Result<GroupChain<S>> {
        let mut c = GroupChain::zero(spec, degree);
        for (t, v) in entries {
            c.add_term(t, v)?;
        }
        Ok(c)
    }

    pub fn add_term(&mut self, tuple: Vec<Element>, v: S) -> Result<()> {
        if tuple.len() != self.degree as usize {
            return Err(Error::Degree(format!(
                "reduced degree-{} entries have {} vertices, got {}",
                self.degree,
                self.degree,
                tuple.len()
            )));
        }
        for e in &tuple {
            self.spec.validate(e)?;
        }
        let combined = match self.support.remove(&tuple) {
            Some(old) => old + v,
            None => v,
        };
        if !combined.is_negligible() {
            self.support.insert(tuple, combined);
        }
        Ok(())
    }

    pub fn degree(&self) -> u32 {
        self.degree
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

    /// (t₁,…,t_n) ↦ (e, t₁, …, t_n).
    pub fn to_based_uf(&self) -> Result<UfChain<S>> {
        let mut out = UfChain::zero(self.spec.clone(), self.degree);
        let e = self.spec.identity();
        for (t, v) in &self.support {
            let mut tuple = Vec::with_capacity(t.len() + 1);
            tuple.push(e);
            tuple.extend_from_slice(t);
            out.add_term(tuple, v.clone())?;
        }
        Ok(out)
    }

    /// Inverse of `to_based_uf`: every entry must start at the identity.
    pub fn from_based_uf(c: &UfChain<S>) -> Result<GroupChain<S>> {
        let e = c.spec().identity();
        let mut out = GroupChain::zero(c.spec().clone(), c.degree());
        for (tuple, v) in c.entries() {
            if tuple[0] != e {
                return Err(Error::Invalid(format!(
                    "not a based chain: entry starts at {:?}",
                    tuple[0]
                )));
            }
            out.add_term(tuple[1..].to_vec(), v.clone())?;
        }
        Ok(out)
    }
}

/// ρ: tuple (x₀,…,x_n) with coefficient a contributes a·δ_{x₀⁻¹} to the
/// reduced tuple (x₀⁻¹x₁,…,x₀⁻¹x_n). In degree 0 this is the inversion
/// φ ↦ (g ↦ φ(g⁻¹)).
pub fn rho<S: Scalar>(c: &UfChain<S>) -> Result<LInftyChain<S>> {
    let spec = c.spec().clone();
    let mut out = LInftyChain::zero(spec.clone(), c.degree());
    for (tuple, a) in c.entries() {
        let x0_inv = spec.invert(&tuple[0])?;
        let reduced: Vec<Element> = tuple[1..]
            .iter()
            .map(|x| spec.compose(&x0_inv, x))
            .collect::<Result<Vec<_>>>()?;
        out.add(reduced, CoeffFn::delta(x0_inv, a.clone()))?;
    }
    Ok(out)
}

/// ρ⁻¹: demands pure-delta coefficients (a nonzero constant part would mean
/// infinite support on the uf side).
pub fn rho_inv<S: Scalar>(l: &LInftyChain<S>) -> Result<UfChain<S>> {
    let spec = l_spec(l).clone();
    let mut out = UfChain::zero(spec.clone(), l.degree());
    for (tuple, phi) in l.tuples() {
        if !phi.constant.is_negligible() {
            return Err(Error::Invalid(
                "coefficient has a constant part; the uf-side support would be infinite".into(),
            ));
        }
        for (g, w) in phi.deltas() {
            let g_inv = spec.invert(g)?;
            let mut uf_tuple = Vec::with_capacity(tuple.len() + 1);
            uf_tuple.push(g_inv);
            for t in tuple {
                uf_tuple.push(spec.compose(&g_inv, t)?);
            }
            out.add_term(uf_tuple, w.clone())?;
        }
    }
    Ok(out)
}

fn l_spec<S>(l: &LInftyChain<S>) -> &GroupSpec {
    &l.spec
}

/// m_j: averages over S_j of a fixed Følner family.
#[derive(Clone, Debug)]
pub struct ApproxMean {
    pub family: FolnerFamily,
    pub j: u64,
}

impl ApproxMean {
    pub fn new(family: FolnerFamily, j: u64) -> ApproxMean {
        ApproxMean { family, j }
    }

    /// m_j(φ) = (1/|S_j|)·Σ_{s∈S_j} φ(s).
    pub fn mean<S: Scalar>(
        &self,
        cayley: &mut Cayley,
        phi: &BoundedFunction<S>,
    ) -> Result<S> {
        let spec = self.family.spec().clone();
        let size = self.family.size(cayley, self.j)?;
        let mut sum = S::zero();
        let mut err = None;
        self.family.for_each(cayley, self.j, &mut |s| {
            if err.is_some() {
                return;
            }
            match phi.eval(&spec, s) {
                Ok(v) => sum = sum.clone() + v,
                Err(e) => err = Some(e),
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(sum / S::from_i64(size as i64))
    }

    /// Exact mean of a constant-plus-deltas coefficient: the constant passes
    /// through (m_j(χ_G) = 1) and each delta contributes weight/|S_j| iff its
    /// point lies in S_j. No enumeration of S_j.
    pub fn coeff_mean<S: Scalar>(&self, cayley: &mut Cayley, phi: &CoeffFn<S>) -> Result<S> {
        let size = self.family.size(cayley, self.j)?;
        let mut acc = phi.constant.clone();
        for (x, w) in phi.deltas() {
            if self.family.member(cayley, self.j, x)? {
                acc = acc + w.clone() / S::from_i64(size as i64);
            }
        }
        Ok(acc)
    }
}

/// Convenience wrapper matching the operation name used everywhere else.
pub fn folner_mean<S: Scalar>(
    cayley: &mut Cayley,
    phi: &BoundedFunction<S>,
    mean: &ApproxMean,
) -> Result<S> {
    mean.mean(cayley, phi)
}

/// Constant-coefficient inclusion ℝ → ℓ∞.
pub fn i_star<S: Scalar>(c: &GroupChain<S>) -> Result<LInftyChain<S>> {
    let mut out = LInftyChain::zero(c.spec.clone(), c.degree());
    for (tuple, a) in c.entries() {
        out.add(tuple.clone(), CoeffFn::constant(a.clone()))?;
    }
    Ok(out)
}

/// Coefficientwise mean: φ⊗T ↦ m_j(φ)·T. Exact, and a left inverse of
/// `i_star` at every index j.
pub fn transfer<S: Scalar>(
    cayley: &mut Cayley,
    l: &LInftyChain<S>,
    mean: &ApproxMean,
) -> Result<GroupChain<S>> {
    let mut out = GroupChain::zero(l_spec(l).clone(), l.degree());
    for (tuple, phi) in l.tuples() {
        out.add_term(tuple.clone(), mean.coeff_mean(cayley, phi)?)?;
    }
    Ok(out)
}

/// Checks that ∂c vanishes off the rim: any boundary term whose vertices all
/// have word length ≤ interior_radius is a violation, returned as a witness.
pub fn boundary_interior_violation<S: Scalar>(
    cayley: &mut Cayley,
    c: &UfChain<S>,
    interior_radius: u64,
) -> Result<Option<Vec<Element>>> {
    let b = c.boundary()?;
    for (tuple, _) in b.entries() {
        let mut inside = true;
        for e in tuple {
            if cayley.word_length(e)? > interior_radius {
                inside = false;
                break;
            }
        }
        if inside {
            return Ok(Some(tuple.clone()));
        }
    }
    Ok(None)
}

/// Σ_g φ(g)·(g·template), g over B_window(e).
///
/// Preconditions checked here: the template is a cycle of H up to its own
/// rim (interior boundary terms reject it), and φ is left-H-invariant
/// (spot-checked on H-box × window samples; a violation is returned with
/// its witness pair).
pub fn invariant_cycle<S: Scalar>(
    cayley: &mut Cayley,
    sub: &SubgroupSpec,
    template: &UfChain<S>,
    phi: &BoundedFunction<S>,
    window: u64,
) -> Result<UfChain<S>> {
    let spec = cayley.spec().clone();
    sub.validate(&spec)?;
    if template.is_zero() {
        return Err(Error::EmptySet("empty template"));
    }
    // All template vertices must lie in H.
    let mut max_len = 0u64;
    for (tuple, _) in template.entries() {
        for e in tuple {
            if !sub.contains(e) {
                return Err(Error::Invalid(format!(
                    "template vertex {:?} is outside the subgroup",
                    e
                )));
            }
            max_len = max_len.max(cayley.word_length(e)?);
        }
    }
    // Cycle-up-to-rim check: the template's boundary may only touch
    // vertices near its own extent.
    let span = template.span(cayley)?;
    let rim = max_len.saturating_sub(span.saturating_mul(2).max(1));
    if let Some(witness) = boundary_interior_violation(cayley, template, rim)? {
        return Err(Error::NotACycle(witness[0]));
    }
    // Invariance spot check: h from an H-box, g from the window ball.
    let h_samples = sub.folner_set(2);
    let g_samples = cayley.ball(window.min(3))?;
    for h in &h_samples {
        for g in &g_samples {
            let hg = spec.compose(h, g)?;
            let a = phi.eval(&spec, &hg)?;
            let b = phi.eval(&spec, g)?;
            if !a.approx_eq(&b) {
                return Err(Error::NotInvariant { h: *h, g: *g });
            }
        }
    }

    let mut out = UfChain::zero(spec.clone(), template.degree());
    for g in cayley.ball(window)? {
        let weight = phi.eval(&spec, &g)?;
        if weight.is_negligible() {
            continue;
        }
        for (tuple, a) in template.entries() {
            let translated: Vec<Element> = tuple
                .iter()
                .map(|t| spec.compose(&g, t))
                .collect::<Result<Vec<_>>>()?;
            out.add_term(translated, weight.clone() * a.clone())?;
        }
    }
    Ok(out)
}

/// ψ ↦ ψ∘π, realized as precomposition with the coset representative map.
pub fn pi_star<S: Scalar>(psi: BoundedFunction<S>, sub: SubgroupSpec) -> BoundedFunction<S> {
    psi.rep_compose(sub)
}

/// τ_j(φ): the function on G/H (evaluated at coset representatives) given
/// by averaging φ over an H-Følner box of index j.
#[derive(Clone, Debug)]
pub struct CosetAverage<S> {
    spec: GroupSpec,
    sub: SubgroupSpec,
    j: u64,
    phi: BoundedFunction<S>,
}

impl<S: Scalar> CosetAverage<S> {
    /// τ_j(φ)(gH) = (1/|F_j|)·Σ_{h∈F_j} φ(g·h), with F_j the H-box of
    /// radius j.
    pub fn eval(&self, g: &Element) -> Result<S> {
        let rep = self.sub.rep(g);
        let box_j = self.sub.folner_set(self.j);
        let mut sum = S::zero();
        for h in &box_j {
            let x = self.spec.compose(&rep, h)?;
            sum = sum + self.phi.eval(&self.spec, &x)?;
        }
        Ok(sum / S::from_i64(box_j.len() as i64))
    }
}

/// Builds τ_j(φ) for a normal subgroup; refuses anything not flagged normal.
pub fn coset_average<S: Scalar>(
    spec: &GroupSpec,
    sub: &SubgroupSpec,
    phi: BoundedFunction<S>,
    j: u64,
) -> Result<CosetAverage<S>> {
    sub.validate(spec)?;
    if !sub.normal {
        return Err(Error::NotNormal);
    }
    Ok(CosetAverage { spec: spec.clone(), sub: sub.clone(), j, phi })
}

/// |m_j(φ∘R_g) − m_j(φ)| ≤ 2·‖φ‖_∞·|∂_{|g|}(S_j)|/|S_j|: computes both
/// sides exactly and returns (difference, bound).
pub fn almost_invariance_gap<S: Scalar>(
    cayley: &mut Cayley,
    phi: &BoundedFunction<S>,
    mean: &ApproxMean,
    g: &Element,
) -> Result<(S, S)> {
    let shifted = phi.clone().right_translate(*g);
    let a = mean.mean(cayley, &shifted)?;
    let b = mean.mean(cayley, phi)?;
    let diff = (a - b).abs();
    let r = cayley.word_length(g)?;
    let s = mean.family.set(cayley, mean.j)?;
    let rim = r_boundary(cayley, &s, r)?.len() as u64;
    let size = s.len() as u64;
    let two = S::from_i64(2);
    let bound = two * phi.sup_bound() * S::from_ratio(rim as i64, size);
    Ok((diff, bound))
}

/// Restriction of a set rule to a window ball, as a finite subset (helper
/// for building invariant-cycle inputs out of thick unions).
pub fn rule_window_set(
    cayley: &mut Cayley,
    rule: &crate::func::SetRule,
    radius: u64,
) -> Result<FiniteSubset> {
    let spec = cayley.spec().clone();
    let elems = rule.support_in_ball(cayley, radius)?;
    Ok(FiniteSubset::from_sorted(spec, elems))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::interval_chain;
    use crate::func::SetRule;
    use crate::geometry::FolnerKind;
    use num::rational::BigRational;
    use num::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z() -> GroupSpec {
        GroupSpec::int_lattice(1).unwrap()
    }

    fn z2() -> GroupSpec {
        GroupSpec::int_lattice(2).unwrap()
    }

    fn el(x: i64) -> Element {
        Element::lattice(&[x])
    }

    fn rat(n: i64, d: u64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn rho_degree_zero_is_inversion() {
        let spec = z();
        let c = UfChain::<f64>::single(spec.clone(), vec![el(7)], 1.0).unwrap();
        let l = rho(&c).unwrap();
        assert_eq!(l.len(), 1);
        let phi = l.coeff(&[]);
        assert_eq!(phi.eval(&el(-7)), 1.0);
        assert_eq!(phi.eval(&el(7)), 0.0);
        assert_eq!(phi.constant, 0.0);
    }

    #[test]
    fn rho_degree_one_example() {
        // 1·(e, t) becomes δ_e on the reduced tuple (t).
        let spec = z();
        let t = el(4);
        let c = UfChain::<f64>::single(spec.clone(), vec![el(0), t], 1.0).unwrap();
        let l = rho(&c).unwrap();
        let phi = l.coeff(&[t]);
        assert_eq!(phi.eval(&el(0)), 1.0);
        assert_eq!(phi.eval(&el(1)), 0.0);
    }

    #[test]
    fn rho_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in [z2(), GroupSpec::heisenberg3()] {
            let mut cayley = Cayley::new(spec);
            for degree in 0..=2u32 {
                for _ in 0..25 {
                    let c = crate::chain::testutil::random_chain::<f64, _>(
                        &mut cayley,
                        degree,
                        2,
                        5,
                        &mut rng,
                    );
                    let back = rho_inv(&rho(&c).unwrap()).unwrap();
                    assert_eq!(back, c);
                }
            }
        }
    }

    #[test]
    fn rho_is_a_chain_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut cayley = Cayley::new(z2());
        for degree in 1..=2u32 {
            for _ in 0..20 {
                let c = crate::chain::testutil::random_chain::<BigRational, _>(
                    &mut cayley,
                    degree,
                    2,
                    5,
                    &mut rng,
                );
                let lhs = rho(&c.boundary().unwrap()).unwrap();
                let rhs = rho(&c).unwrap().boundary().unwrap();
                assert_eq!(lhs, rhs, "degree {degree}");
            }
        }
    }

    #[test]
    fn rho_inv_rejects_constant_part() {
        let spec = z();
        let mut l = LInftyChain::<f64>::zero(spec, 1);
        l.add(vec![el(1)], CoeffFn::constant(1.0)).unwrap();
        assert!(rho_inv(&l).is_err());
    }

    #[test]
    fn mean_of_chi_g_is_one() {
        for (spec, kind) in [
            (z(), FolnerKind::Balls),
            (z2(), FolnerKind::Cubes),
            (GroupSpec::heisenberg3(), FolnerKind::HeisBoxes),
        ] {
            let mut cayley = Cayley::new(spec.clone());
            let fam = FolnerFamily::new(spec, kind).unwrap();
            for j in 1..=3u64 {
                let mean = ApproxMean::new(fam.clone(), j);
                let one = BoundedFunction::<BigRational>::one();
                assert_eq!(mean.mean(&mut cayley, &one).unwrap(), rat(1, 1));
            }
        }
    }

    #[test]
    fn mean_of_even_integers() {
        let mut cayley = Cayley::new(z());
        let fam = FolnerFamily::new(z(), FolnerKind::Balls).unwrap();
        let mean = ApproxMean::new(fam, 2);
        let evens = BoundedFunction::<BigRational>::indicator(SetRule::multiples(2).unwrap());
        assert_eq!(mean.mean(&mut cayley, &evens).unwrap(), rat(3, 5));
    }

    #[test]
    fn mean_of_delta_is_inverse_ball_size() {
        let spec = z2();
        let mut cayley = Cayley::new(spec.clone());
        let fam = FolnerFamily::new(spec.clone(), FolnerKind::Balls).unwrap();
        for j in 1..=4u64 {
            let mean = ApproxMean::new(fam.clone(), j);
            let delta = BoundedFunction::<BigRational>::delta(&spec, spec.identity()).unwrap();
            let expected = rat(1, 2 * j * j + 2 * j + 1);
            assert_eq!(mean.mean(&mut cayley, &delta).unwrap(), expected);
        }
    }

    #[test]
    fn mean_positivity() {
        let mut cayley = Cayley::new(z());
        let fam = FolnerFamily::new(z(), FolnerKind::Balls).unwrap();
        let mean = ApproxMean::new(fam, 3);
        let f = BoundedFunction::<BigRational>::indicator(SetRule::powers(2).unwrap());
        assert!(mean.mean(&mut cayley, &f).unwrap() >= BigRational::zero());
    }

    #[test]
    fn transfer_inverts_i_star() {
        let spec = z();
        let mut cayley = Cayley::new(spec.clone());
        let c = GroupChain::<BigRational>::from_entries(
            spec.clone(),
            1,
            vec![
                (vec![el(4)], rat(2, 3)),
                (vec![el(-1)], rat(-5, 7)),
            ],
        )
        .unwrap();
        let fam = FolnerFamily::new(spec, FolnerKind::Balls).unwrap();
        for j in 1..=6u64 {
            let mean = ApproxMean::new(fam.clone(), j);
            let back = transfer(&mut cayley, &i_star(&c).unwrap(), &mean).unwrap();
            assert_eq!(back, c, "j={j}");
        }
    }

    #[test]
    fn transfer_left_inverse_on_based_edge() {
        // i_star(1·(e,t)) then transfer gives back 1·(e,t).
        let spec = z();
        let mut cayley = Cayley::new(spec.clone());
        let based = UfChain::<BigRational>::single(
            spec.clone(),
            vec![el(0), el(3)],
            rat(1, 1),
        )
        .unwrap();
        let reduced = GroupChain::from_based_uf(&based).unwrap();
        let fam = FolnerFamily::new(spec, FolnerKind::Balls).unwrap();
        let mean = ApproxMean::new(fam, 4);
        let out = transfer(&mut cayley, &i_star(&reduced).unwrap(), &mean).unwrap();
        assert_eq!(out.to_based_uf().unwrap(), based);
    }

    #[test]
    fn transfer_scales_by_density() {
        // c⊗χ_{2ℤ} with the mean over {−2..2} comes back as (3/5)·c.
        let spec = z();
        let mut cayley = Cayley::new(spec.clone());
        let evens = SetRule::multiples(2).unwrap();
        let mut l = LInftyChain::<BigRational>::zero(spec.clone(), 1);
        // Express χ_{2ℤ} within the window as deltas (the mean only sees S_j).
        let mut chi = CoeffFn::zero();
        for x in (-10..=10i64).filter(|x| x % 2 == 0) {
            chi.add_delta(el(x), rat(1, 1));
        }
        assert!(evens.member(&spec, &el(-2)).unwrap());
        l.add(vec![el(1)], chi).unwrap();
        let fam = FolnerFamily::new(spec, FolnerKind::Balls).unwrap();
        let mean = ApproxMean::new(fam, 2);
        let out = transfer(&mut cayley, &l, &mean).unwrap();
        assert_eq!(out.coeff(&[el(1)]), rat(3, 5));
    }

    #[test]
    fn transfer_of_zero_is_zero() {
        let spec = z();
        let mut cayley = Cayley::new(spec.clone());
        let l = LInftyChain::<BigRational>::zero(spec.clone(), 1);
        let fam = FolnerFamily::new(spec, FolnerKind::Balls).unwrap();
        let mean = ApproxMean::new(fam, 3);
        assert!(transfer(&mut cayley, &l, &mean).unwrap().is_zero());
    }

    #[test]
    fn transfer_is_linear() {
        let spec = z();
        let mut cayley = Cayley::new(spec.clone());
        let fam = FolnerFamily::new(spec.clone(), FolnerKind::Balls).unwrap();
        let mean = ApproxMean::new(fam, 3);
        let mut a = LInftyChain::<BigRational>::zero(spec.clone(), 1);
        a.add(vec![el(1)], CoeffFn::delta(el(0), rat(2, 1))).unwrap();
        let mut b = LInftyChain::<BigRational>::zero(spec.clone(), 1);
        b.add(vec![el(1)], CoeffFn::constant(rat(1, 2))).unwrap();
        let mut ab = a.clone();
        ab.add(vec![el(1)], b.coeff(&[el(1)])).unwrap();
        let ta = transfer(&mut cayley, &a, &mean).unwrap();
        let tb = transfer(&mut cayley, &b, &mean).unwrap();
        let tab = transfer(&mut cayley, &ab, &mean).unwrap();
        assert_eq!(
            tab.coeff(&[el(1)]),
            ta.coeff(&[el(1)]) + tb.coeff(&[el(1)])
        );
    }

    #[test]
    fn almost_invariance_bound_holds_exactly() {
        let mut cayley = Cayley::new(z());
        let fam = FolnerFamily::new(z(), FolnerKind::Balls).unwrap();
        let phi = BoundedFunction::<BigRational>::indicator(SetRule::multiples(3).unwrap());
        for j in 2..=6u64 {
            let mean = ApproxMean::new(fam.clone(), j);
            for g in [el(1), el(2), el(-3)] {
                let (diff, bound) =
                    almost_invariance_gap(&mut cayley, &phi, &mean, &g).unwrap();
                assert!(diff <= bound, "j={j} g={g:?}: {diff} > {bound}");
            }
        }
    }

    #[test]
    fn almost_invariance_bound_holds_on_z2() {
        let mut cayley = Cayley::new(z2());
        let fam = FolnerFamily::new(z2(), FolnerKind::Cubes).unwrap();
        let phi = BoundedFunction::<BigRational>::indicator(SetRule::half_space(0, 0));
        for j in 2..=5u64 {
            let mean = ApproxMean::new(fam.clone(), j);
            for g in [Element::lattice(&[1, 0]), Element::lattice(&[1, -1])] {
                let (diff, bound) =
                    almost_invariance_gap(&mut cayley, &phi, &mean, &g).unwrap();
                assert!(diff <= bound, "j={j} {g:?}");
            }
        }
    }

    #[test]
    fn invariant_cycle_from_row_template() {
        // H = ℤ×0 in ℤ², fundamental row 1-cycle, thick-union coefficient.
        let spec = z2();
        let mut cayley = Cayley::new(spec.clone());
        let sub = SubgroupSpec::coordinate(&spec, &[0]).unwrap();
        let mut template = UfChain::<BigRational>::zero(spec.clone(), 1);
        for k in -6..6i64 {
            template
                .add_term(
                    vec![Element::lattice(&[k, 0]), Element::lattice(&[k + 1, 0])],
                    rat(1, 1),
                )
                .unwrap();
        }
        let rows = SetRule::coset_union(
            &spec,
            sub.clone(),
            &[Element::lattice(&[0, 0]), Element::lattice(&[0, 2])],
        )
        .unwrap();
        let phi = BoundedFunction::<BigRational>::indicator(rows);
        let out = invariant_cycle(&mut cayley, &sub, &template, &phi, 3).unwrap();
        assert!(!out.is_zero());
        // ∂ vanishes strictly inside the window+template extent.
        let witness = boundary_interior_violation(&mut cayley, &out, 2).unwrap();
        assert_eq!(witness, None);
    }

    #[test]
    fn invariant_cycle_with_chi_g() {
        let spec = z2();
        let mut cayley = Cayley::new(spec.clone());
        let sub = SubgroupSpec::coordinate(&spec, &[0]).unwrap();
        let mut template = UfChain::<BigRational>::zero(spec.clone(), 1);
        for k in -5..5i64 {
            template
                .add_term(
                    vec![Element::lattice(&[k, 0]), Element::lattice(&[k + 1, 0])],
                    rat(1, 1),
                )
                .unwrap();
        }
        let out = invariant_cycle(
            &mut cayley,
            &sub,
            &template,
            &BoundedFunction::one(),
            2,
        )
        .unwrap();
        let witness = boundary_interior_violation(&mut cayley, &out, 1).unwrap();
        assert_eq!(witness, None);
    }

    #[test]
    fn invariant_cycle_rejects_non_invariant_coefficient() {
        let spec = z2();
        let mut cayley = Cayley::new(spec.clone());
        let sub = SubgroupSpec::coordinate(&spec, &[0]).unwrap();
        let mut template = UfChain::<BigRational>::zero(spec.clone(), 1);
        for k in -5..5i64 {
            template
                .add_term(
                    vec![Element::lattice(&[k, 0]), Element::lattice(&[k + 1, 0])],
                    rat(1, 1),
                )
                .unwrap();
        }
        // Single column x = 0: not invariant under the H-step e₁.
        let column = SetRule::finite(
            &spec,
            (-8..=8).map(|y| Element::lattice(&[0, y])).collect(),
            "single column",
        )
        .unwrap();
        let phi = BoundedFunction::<BigRational>::indicator(column);
        match invariant_cycle(&mut cayley, &sub, &template, &phi, 3) {
            Err(Error::NotInvariant { h, g }) => {
                let spec2 = z2();
                let hg = spec2.compose(&h, &g).unwrap();
                let a = phi.eval(&spec2, &hg).unwrap();
                let b = phi.eval(&spec2, &g).unwrap();
                assert_ne!(a, b, "witness must actually witness");
            }
            other => panic!("expected invariance rejection, got {other:?}"),
        }
    }

    #[test]
    fn invariant_cycle_rejects_non_cycle_template() {
        let spec = z2();
        let mut cayley = Cayley::new(spec.clone());
        let sub = SubgroupSpec::coordinate(&spec, &[0]).unwrap();
        // A single interior edge is not a cycle up to its rim.
        let template = UfChain::<BigRational>::single(
            spec.clone(),
            vec![Element::lattice(&[0, 0]), Element::lattice(&[1, 0])],
            rat(1, 1),
        )
        .unwrap();
        assert!(matches!(
            invariant_cycle(&mut cayley, &sub, &template, &BoundedFunction::one(), 2),
            Err(Error::NotACycle(_))
        ));
    }

    #[test]
    fn coset_average_recovers_pulled_back_functions() {
        // τ_j(π*ψ) = ψ exactly, for ψ = χ_{even second coordinate}.
        let spec = z2();
        let sub = SubgroupSpec::coordinate(&spec, &[0]).unwrap();
        let psi = BoundedFunction::<BigRational>::indicator(
            SetRule::modular(1, 2, vec![0]).unwrap(),
        );
        let pulled = pi_star(psi.clone(), sub.clone());
        for j in 1..=5u64 {
            let tau = coset_average(&spec, &sub, pulled.clone(), j).unwrap();
            for y in -4..=4i64 {
                let g = Element::lattice(&[3, y]);
                let expect = psi.eval(&spec, &sub.rep(&g)).unwrap();
                assert_eq!(tau.eval(&g).unwrap(), expect, "j={j} y={y}");
            }
        }
    }

    #[test]
    fn coset_average_of_half_plane() {
        // φ = χ_{x≥0}, H = ℤ×0, j=5: every coset averages to 6/11.
        let spec = z2();
        let sub = SubgroupSpec::coordinate(&spec, &[0]).unwrap();
        let phi = BoundedFunction::<BigRational>::indicator(SetRule::half_space(0, 0));
        let tau = coset_average(&spec, &sub, phi, 5).unwrap();
        for y in -3..=3i64 {
            assert_eq!(tau.eval(&Element::lattice(&[7, y])).unwrap(), rat(6, 11));
        }
    }

    #[test]
    fn coset_average_of_one_is_one() {
        let spec = z2();
        let sub = SubgroupSpec::coordinate(&spec, &[1]).unwrap();
        let tau = coset_average(&spec, &sub, BoundedFunction::<BigRational>::one(), 4).unwrap();
        assert_eq!(tau.eval(&Element::lattice(&[5, 5])).unwrap(), rat(1, 1));
    }

    #[test]
    fn coset_average_on_heis_center() {
        let spec = GroupSpec::heisenberg3();
        let sub = SubgroupSpec::heis_center();
        let tau = coset_average(&spec, &sub, BoundedFunction::<BigRational>::one(), 3).unwrap();
        assert_eq!(tau.eval(&Element::heis(1, 2, 5)).unwrap(), rat(1, 1));
    }

    #[test]
    fn non_normal_flag_is_refused() {
        let spec = z2();
        let mut sub = SubgroupSpec::coordinate(&spec, &[0]).unwrap();
        sub.normal = false;
        let res = coset_average(&spec, &sub, BoundedFunction::<f64>::one(), 2);
        assert!(matches!(res, Err(Error::NotNormal)));
    }

    #[test]
    fn interval_cycle_helper_sanity() {
        // Guards the example wiring used elsewhere: row templates come from
        // interval chains pushed into ℤ².
        let spec = z();
        let c = interval_chain::<f64>(&spec, -3, 3).unwrap();
        assert_eq!(c.len(), 6);
    }
}
