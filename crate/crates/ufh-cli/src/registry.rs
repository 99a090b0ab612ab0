//! Name → object resolution for everything a run can reference: group
//! models, subgroups, Følner families, functions, and decay sequences.

use num::rational::BigRational;
use std::str::FromStr;
use ufh::{
    BoundedFunction, CSequence, Error, FolnerFamily, FolnerKind, GroupSpec, Result, Scalar,
    SetRule, SubgroupSpec,
};

pub fn group(name: &str) -> Result<GroupSpec> {
    match name {
        "Z" | "z" => GroupSpec::int_lattice(1),
        "Z2" | "z2" => GroupSpec::int_lattice(2),
        "Z3" | "z3" => GroupSpec::int_lattice(3),
        "Z4" | "z4" => GroupSpec::int_lattice(4),
        "heis" | "Heis" | "heisenberg" => Ok(GroupSpec::heisenberg3()),
        other => {
            if let Some(rest) = other.strip_prefix("semidirect:") {
                let nums: Vec<i64> = rest
                    .split(',')
                    .map(|t| t.trim().parse::<i64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Invalid(format!("bad matrix entries in {other:?}")))?;
                if nums.len() != 4 {
                    return Err(Error::Invalid("semidirect needs 4 matrix entries".into()));
                }
                GroupSpec::lattice_semidirect([[nums[0], nums[1]], [nums[2], nums[3]]])
            } else {
                Err(Error::Invalid(format!(
                    "unknown group {other:?} (expected Z, Z2, Z3, Z4, heis, or semidirect:a,b,c,d)"
                )))
            }
        }
    }
}

pub fn subgroup(spec: &GroupSpec, name: &str) -> Result<SubgroupSpec> {
    if name == "center" {
        let sub = SubgroupSpec::heis_center();
        sub.validate(spec)?;
        return Ok(sub);
    }
    if let Some(rest) = name.strip_prefix("coordinate:") {
        let axes: Vec<usize> = rest
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Invalid(format!("bad axis list in {name:?}")))?;
        return SubgroupSpec::coordinate(spec, &axes);
    }
    Err(Error::Invalid(format!(
        "unknown subgroup {name:?} (expected coordinate:a[,b] or center)"
    )))
}

pub fn family(spec: &GroupSpec, name: &str) -> Result<FolnerFamily> {
    FolnerFamily::new(spec.clone(), FolnerKind::parse(name)?)
}

/// Function ids: one | chi_g, delta_e, chi_even_x, powers:K, multiples:M,
/// modular:AXIS:M:RES, half:AXIS:MIN.
pub fn function<S: Scalar>(spec: &GroupSpec, id: &str) -> Result<BoundedFunction<S>> {
    match id {
        "one" | "chi_g" => return Ok(BoundedFunction::one().with_label(id)),
        "delta_e" => return BoundedFunction::delta(spec, spec.identity()),
        "chi_even_x" => {
            return Ok(BoundedFunction::indicator(SetRule::modular(0, 2, vec![0])?))
        }
        _ => {}
    }
    let parts: Vec<&str> = id.split(':').collect();
    match parts.as_slice() {
        ["powers", k] => {
            let k: u32 = k.parse().map_err(|_| Error::Invalid(format!("bad exponent in {id:?}")))?;
            Ok(BoundedFunction::indicator(SetRule::powers(k)?))
        }
        ["multiples", m] => {
            let m: u64 = m.parse().map_err(|_| Error::Invalid(format!("bad modulus in {id:?}")))?;
            Ok(BoundedFunction::indicator(SetRule::multiples(m)?))
        }
        ["modular", axis, m, res] => {
            let axis: u8 =
                axis.parse().map_err(|_| Error::Invalid(format!("bad axis in {id:?}")))?;
            let m: u64 = m.parse().map_err(|_| Error::Invalid(format!("bad modulus in {id:?}")))?;
            let res: u64 =
                res.parse().map_err(|_| Error::Invalid(format!("bad residue in {id:?}")))?;
            Ok(BoundedFunction::indicator(SetRule::modular(axis, m, vec![res])?))
        }
        ["half", axis, min] => {
            let axis: u8 =
                axis.parse().map_err(|_| Error::Invalid(format!("bad axis in {id:?}")))?;
            let min: i64 =
                min.parse().map_err(|_| Error::Invalid(format!("bad threshold in {id:?}")))?;
            Ok(BoundedFunction::indicator(SetRule::half_space(axis, min)))
        }
        _ => Err(Error::Invalid(format!("unknown function id {id:?}"))),
    }
}

/// sigma_squared | power:P | explicit:p/q;p/q;…
pub fn c_sequence(id: &str) -> Result<CSequence> {
    if id == "sigma_squared" {
        return Ok(CSequence::sigma_squared());
    }
    if let Some(p) = id.strip_prefix("power:") {
        let p: u32 = p.parse().map_err(|_| Error::Invalid(format!("bad power in {id:?}")))?;
        if p == 0 {
            return Err(Error::Invalid("power must be at least 1".into()));
        }
        return Ok(CSequence::SigmaPower(p));
    }
    if let Some(list) = id.strip_prefix("explicit:") {
        let values: Vec<BigRational> = list
            .split(';')
            .map(|t| {
                BigRational::from_str(t.trim())
                    .map_err(|_| Error::Invalid(format!("bad rational {t:?} in {id:?}")))
            })
            .collect::<Result<_>>()?;
        if values.is_empty() {
            return Err(Error::Invalid("explicit sequence is empty".into()));
        }
        return Ok(CSequence::Explicit(values));
    }
    Err(Error::Invalid(format!(
        "unknown decay sequence {id:?} (expected sigma_squared, power:P, or explicit:…)"
    )))
}

/// Coordinate column names for point clouds, matching the model's layout.
pub fn coord_names(spec: &GroupSpec) -> Vec<&'static str> {
    match spec.lattice_dim() {
        Some(d) => ["x", "y", "z", "w"][..d].to_vec(),
        None => vec!["x", "y", "z"],
    }
}
