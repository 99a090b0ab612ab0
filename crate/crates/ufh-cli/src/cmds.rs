//! One handler per subcommand. Each writes `run_config.json` plus its own
//! CSV/JSON outputs and returns the process exit code: 0 on success, 2 when
//! a verification property failed (the report carries the witness). Usage
//! and configuration problems surface as `Err` and exit 1 upstream.

use crate::config::{CmdSpec, Resolved};
use crate::emit::{config_hash, header_comment, scalar_field, Csv, Out};
use crate::registry;
use num::rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::Path;
use ufh::linfty::boundary_interior_violation;
use ufh::scalar::csv_value;
use ufh::{
    boundary_bound_check, coset_average, greedy_tiling, indices, invariant_cycle, sparse_construct,
    sparse_verify, thick_construct, thick_verify, tiling_to_json, whyte_witness, BoundedFunction,
    Cayley, CompareOptions, Element, Error, FolnerFamily, GroupSpec, Result, Scalar, SetRule,
    SubgroupSpec, ThickFamily, UfChain, Window,
};

struct Ctx<'a> {
    res: &'a Resolved,
    spec: GroupSpec,
    hash: String,
    out: Out,
}

impl Ctx<'_> {
    fn header(&self, window: u64) -> String {
        header_comment(&self.hash, window)
    }
}

pub fn dispatch(res: &Resolved) -> Result<i32> {
    let spec = registry::group(&res.group)?;
    let hash = config_hash(&res.canonical);
    let out = Out::new(&res.out_dir)?;
    out.write_json("run_config.json", &res.canonical)?;
    let ctx = Ctx { res, spec, hash, out };
    match &res.cmd {
        CmdSpec::Ball { r } => ball(&ctx, *r),
        CmdSpec::Folner { family, jmax } => folner(&ctx, family, *jmax),
        CmdSpec::Growth { family, jmax, chain } => {
            if res.rational {
                growth::<BigRational>(&ctx, family, *jmax, chain.as_deref())
            } else {
                growth::<f64>(&ctx, family, *jmax, chain.as_deref())
            }
        }
        CmdSpec::Tile { r } => tile(&ctx, *r),
        CmdSpec::SparseBuild { family, jmax, c } => sparse_build(&ctx, family, *jmax, c),
        CmdSpec::SparseVerify { input, r, claim } => {
            sparse_verify_cmd(&ctx, input, r.as_deref(), *claim)
        }
        CmdSpec::ThickBuild { sub, n, depth, budget } => {
            thick_build(&ctx, sub, *n, *depth, *budget)
        }
        CmdSpec::ThickVerify { input } => thick_verify_cmd(&ctx, input),
        CmdSpec::Whyte { function, family, level, budget, bound_chains } => {
            if res.rational {
                whyte::<BigRational>(&ctx, function, family, *level, *budget, *bound_chains)
            } else {
                whyte::<f64>(&ctx, function, family, *level, *budget, *bound_chains)
            }
        }
        CmdSpec::Indep { functions, family, jmax } => {
            if res.rational {
                indep::<BigRational>(&ctx, functions, family, *jmax)
            } else {
                indep::<f64>(&ctx, functions, family, *jmax)
            }
        }
        CmdSpec::Cycle { input, k, half_len } => {
            if res.rational {
                cycle::<BigRational>(&ctx, input, *k, *half_len)
            } else {
                cycle::<f64>(&ctx, input, *k, *half_len)
            }
        }
        CmdSpec::CosetAvg { sub, function, j, probe } => {
            if res.rational {
                coset_avg::<BigRational>(&ctx, sub, function, *j, *probe)
            } else {
                coset_avg::<f64>(&ctx, sub, function, *j, *probe)
            }
        }
    }
}

fn coord_fields(g: &Element, dim: usize) -> Vec<String> {
    g.flat_coords().iter().take(dim).map(|c| c.to_string()).collect()
}

fn cloud_columns(spec: &GroupSpec) -> (Vec<&'static str>, usize) {
    let names = registry::coord_names(spec);
    let dim = names.len();
    (names, dim)
}

fn ball(ctx: &Ctx, r: u64) -> Result<i32> {
    let mut cayley = Cayley::new(ctx.spec.clone());
    let mut rows: Vec<(u64, Element)> = Vec::new();
    for g in cayley.ball(r)? {
        rows.push((cayley.word_length(&g)?, g));
    }
    rows.sort();
    let (names, dim) = cloud_columns(&ctx.spec);
    let mut columns = names;
    columns.push("ring");
    let mut csv = Csv::new(&ctx.header(r), &columns);
    for (ring, g) in &rows {
        let mut fields = coord_fields(g, dim);
        fields.push(ring.to_string());
        csv.row(&fields);
    }
    ctx.out.write("ball.csv", &csv.finish())?;
    let mut sphere_sizes = Vec::new();
    for k in 0..=r {
        sphere_sizes.push(cayley.sphere_size(k)?);
    }
    ctx.out.write_json(
        "ball.json",
        &json!({
            "group": ctx.spec.label(),
            "r": r,
            "size": rows.len(),
            "sphere_sizes": sphere_sizes,
        }),
    )?;
    Ok(0)
}

fn folner(ctx: &Ctx, family_id: &str, jmax: u64) -> Result<i32> {
    let family = registry::family(&ctx.spec, family_id)?;
    let mut cayley = Cayley::new(ctx.spec.clone());
    let hdr_window = ctx.res.window.unwrap_or(jmax);
    let mut csv = Csv::new(&ctx.header(hdr_window), &["j", "size", "boundary", "sigma"]);
    let mut truncated_at = None;
    let mut rows = 0u64;
    for j in 1..=jmax {
        let step = (|| -> Result<(u64, u64, BigRational)> {
            Ok((family.size(&mut cayley, j)?, family.boundary_size(&mut cayley, j)?, family.sigma(&mut cayley, j)?))
        })();
        match step {
            Ok((size, boundary, sigma)) => {
                let sigma_field = if ctx.res.rational {
                    sigma.to_string()
                } else {
                    csv_value(&sigma)
                };
                csv.row(&[j.to_string(), size.to_string(), boundary.to_string(), sigma_field]);
                rows += 1;
            }
            Err(Error::CapExceeded(_)) | Err(Error::Overflow(_)) | Err(Error::BeyondWindow(_)) => {
                truncated_at = Some(j);
                csv.comment(&format!("truncated at j={j} (enumeration cap)"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    ctx.out.write("folner.csv", &csv.finish())?;
    ctx.out.write_json(
        "folner.json",
        &json!({
            "group": ctx.spec.label(),
            "family": family.label(),
            "jmax": jmax,
            "rows": rows,
            "truncated_at": truncated_at,
        }),
    )?;
    Ok(0)
}

fn growth<S: Scalar>(ctx: &Ctx, family_id: &str, jmax: u64, chain: Option<&str>) -> Result<i32> {
    let family = registry::family(&ctx.spec, family_id)?;
    let func: Option<BoundedFunction<S>> = match chain {
        None => None,
        Some(id) => Some(registry::function(&ctx.spec, id)?),
    };
    let mut cayley = Cayley::new(ctx.spec.clone());
    let idx = indices::auto(jmax, 512);
    let table = ufh::growth_table(&mut cayley, &family, func.as_ref(), &idx)?;
    let hdr_window = ctx.res.window.unwrap_or(jmax);
    ctx.out.write("growth.csv", &table.to_csv(&[ctx.header(hdr_window)]))?;
    let last = table.rows.last().map(|r| {
        json!({
            "j": r.j,
            "size": r.size,
            "beta": r.beta.to_json(),
            "sigma": r.sigma.to_json(),
        })
    });
    ctx.out.write_json(
        "growth.json",
        &json!({
            "group": ctx.spec.label(),
            "family": family.label(),
            "chain": func.as_ref().map(|f| f.label()),
            "rows": table.rows.len(),
            "truncated_at": table.truncated_at,
            "last": last,
        }),
    )?;
    Ok(0)
}

fn tile(ctx: &Ctx, r: u64) -> Result<i32> {
    let window = Window::new(ctx.res.window.unwrap_or(30));
    let mut cayley = Cayley::new(ctx.spec.clone());
    let tiling = greedy_tiling(&mut cayley, r, window)?;
    let (names, dim) = cloud_columns(&ctx.spec);
    let mut columns = names;
    columns.push("ring");
    let mut csv = Csv::new(&ctx.header(window.radius), &columns);
    for g in tiling.centers.iter() {
        let mut fields = coord_fields(g, dim);
        fields.push(r.to_string());
        csv.row(&fields);
    }
    ctx.out.write("tile.csv", &csv.finish())?;
    ctx.out.write_json("tile.json", &tiling_to_json(&tiling))?;
    Ok(0)
}

fn sparse_build(ctx: &Ctx, family_id: &str, jmax: u64, c_id: &str) -> Result<i32> {
    let family = registry::family(&ctx.spec, family_id)?;
    let c = registry::c_sequence(c_id)?;
    let mut cayley = Cayley::new(ctx.spec.clone());
    let (rule, diag) = sparse_construct(&mut cayley, &family, &c, jmax)?;
    let window = family.radius_hint(diag.j_computed)?;
    let cloud = ufh::point_cloud_csv(&ctx.spec, &rule)?;
    let mut csv = String::new();
    csv.push_str("# ");
    csv.push_str(&ctx.header(window));
    csv.push('\n');
    csv.push_str(&cloud);
    ctx.out.write("sparse.csv", &csv)?;
    ctx.out.write_json(
        "sparse.json",
        &json!({
            "group": ctx.spec.to_json(),
            "family": family.kind.label(),
            "c": c_id,
            "jmax": jmax,
            "window": window,
            "diagnostics": diag.to_json(),
            "rule": rule.to_json(&ctx.spec),
        }),
    )?;
    Ok(0)
}

fn load_artifact(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Invalid(format!("invalid artifact {}: {e}", path.display())))
}

fn artifact_group(ctx: &Ctx, v: &Value) -> Result<GroupSpec> {
    let spec = GroupSpec::from_json(
        v.get("group").ok_or_else(|| Error::Invalid("artifact lacks a group".into()))?,
    )?;
    if spec.label() != ctx.spec.label() {
        return Err(Error::Invalid(format!(
            "artifact group {} does not match configured group {}",
            spec.label(),
            ctx.spec.label()
        )));
    }
    Ok(spec)
}

fn sparse_verify_cmd(ctx: &Ctx, input: &Path, r: Option<&[u64]>, claim: u64) -> Result<i32> {
    let artifact = load_artifact(input)?;
    let spec = artifact_group(ctx, &artifact)?;
    let rule = SetRule::from_json(
        &spec,
        artifact.get("rule").ok_or_else(|| Error::Invalid("artifact lacks a rule".into()))?,
    )?;
    let window = match ctx.res.window {
        Some(w) => w,
        None => artifact
            .get("window")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Invalid("artifact lacks a window; pass --window".into()))?,
    };
    // Default radii: every r with 2r strictly below the largest placed r(j).
    let r_list: Vec<u64> = match r {
        Some(list) => list.to_vec(),
        None => {
            let max_r = artifact
                .get("diagnostics")
                .and_then(|d| d.get("levels"))
                .and_then(Value::as_array)
                .map(|levels| {
                    levels.iter().filter_map(|l| l.get("r").and_then(Value::as_u64)).max()
                })
                .flatten()
                .unwrap_or(1);
            (1..=max_r.saturating_sub(1) / 2).collect()
        }
    };
    let mut cayley = Cayley::new(spec);
    let cert =
        sparse_verify(&mut cayley, &rule, &r_list, Window::new(window))?.with_claim(claim);
    ctx.out.write_json("sparse_verify.json", &cert.to_json())?;
    let mut csv = Csv::new(&ctx.header(window), &["r", "threshold", "c_obs"]);
    for row in &cert.rows {
        csv.row(&[row.r.to_string(), row.threshold.to_string(), row.c_obs.to_string()]);
    }
    ctx.out.write("sparse_verify.csv", &csv.finish())?;
    Ok(if cert.valid() == Some(false) { 2 } else { 0 })
}

fn thick_build(ctx: &Ctx, sub_id: &str, n: usize, depth: u64, budget: usize) -> Result<i32> {
    let sub = registry::subgroup(&ctx.spec, sub_id)?;
    let mut cayley = Cayley::new(ctx.spec.clone());
    let tf = thick_construct(&mut cayley, &sub, n, depth, budget)?;
    ctx.out.write_json("thick.json", &tf.to_json())?;
    Ok(0)
}

fn load_thick(ctx: &Ctx, path: &Path) -> Result<ThickFamily> {
    let artifact = load_artifact(path)?;
    let spec = artifact_group(ctx, &artifact)?;
    let sub = SubgroupSpec::from_json(
        artifact
            .get("subgroup")
            .ok_or_else(|| Error::Invalid("artifact lacks a subgroup".into()))?,
    )?;
    sub.validate(&spec)?;
    let mut families = Vec::new();
    for tiles in artifact
        .get("families")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Invalid("artifact lacks families".into()))?
    {
        let mut parsed = Vec::new();
        for tile in tiles.as_array().ok_or_else(|| Error::Invalid("malformed family".into()))? {
            let l = tile
                .get("l")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Invalid("tile lacks a depth".into()))?;
            let g = spec.element_from_json(
                tile.get("translator")
                    .ok_or_else(|| Error::Invalid("tile lacks a translator".into()))?,
            )?;
            parsed.push((l, g));
        }
        families.push(parsed);
    }
    let log = artifact
        .get("log")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(|x| x.as_str().map(String::from)).collect())
        .unwrap_or_default();
    Ok(ThickFamily { spec, sub, families, log })
}

fn thick_reach(cayley: &mut Cayley, tf: &ThickFamily) -> Result<u64> {
    let mut reach = 0;
    for tiles in &tf.families {
        for (l, g) in tiles {
            reach = reach.max(l + cayley.word_length(g)?);
        }
    }
    Ok(reach)
}

fn thick_verify_cmd(ctx: &Ctx, input: &Path) -> Result<i32> {
    let tf = load_thick(ctx, input)?;
    let mut cayley = Cayley::new(tf.spec.clone());
    let window = match ctx.res.window {
        Some(w) => w,
        None => thick_reach(&mut cayley, &tf)? + 2,
    };
    let report = thick_verify(&mut cayley, &tf, Window::new(window))?;
    ctx.out.write_json("thick_verify.json", &report.to_json())?;
    Ok(if report.all_ok() { 0 } else { 2 })
}

fn whyte<S: Scalar>(
    ctx: &Ctx,
    function: &str,
    family_id: &str,
    level: u64,
    budget: usize,
    bound_chains: usize,
) -> Result<i32> {
    let func: BoundedFunction<S> = registry::function(&ctx.spec, function)?;
    let family = registry::family(&ctx.spec, family_id)?;
    let mut cayley = Cayley::new(ctx.spec.clone());
    let outcome = whyte_witness(&mut cayley, &func, &family, level, budget)?;
    let bound_ok = if bound_chains > 0 {
        Some(random_bound_check::<S>(ctx, &mut cayley, &family, bound_chains)?)
    } else {
        None
    };
    ctx.out.write_json(
        "whyte.json",
        &json!({
            "group": ctx.spec.label(),
            "function": function,
            "family": family.label(),
            "level": level,
            "budget": budget,
            "outcome": outcome.to_json(),
            "bound_chains": bound_chains,
            "bound_ok": bound_ok,
        }),
    )?;
    let verified = outcome.found().is_some() && bound_ok != Some(false);
    Ok(if verified { 0 } else { 2 })
}

/// Seeded degree-1 chains vs the first four family sets:
/// |Σ_S ∂b| ≤ ‖b‖_∞·span·|∂_span S| each time.
fn random_bound_check<S: Scalar>(
    ctx: &Ctx,
    cayley: &mut Cayley,
    family: &FolnerFamily,
    chains: usize,
) -> Result<bool> {
    let spec = ctx.spec.clone();
    let mut sets = Vec::new();
    for j in 1..=4 {
        sets.push(family.set(cayley, j)?);
    }
    let pool = cayley.ball(3)?;
    let gens = spec.symmetric_generators();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.res.seed);
    let mut all_ok = true;
    for _ in 0..chains {
        let mut b = UfChain::<S>::zero(spec.clone(), 1);
        for _ in 0..rng.gen_range(1..=5) {
            let base = pool[rng.gen_range(0..pool.len())];
            let step = gens[rng.gen_range(0..gens.len())];
            let head = spec.compose(&base, &step)?;
            let mut coeff = 0i64;
            while coeff == 0 {
                coeff = rng.gen_range(-3..=3);
            }
            b.add_term(vec![base, head], S::from_i64(coeff))?;
        }
        if b.is_zero() {
            continue;
        }
        let report = boundary_bound_check(cayley, &b, &sets)?;
        all_ok &= report.all_ok();
    }
    Ok(all_ok)
}

fn indep<S: Scalar>(ctx: &Ctx, ids: &[String], family_id: &str, jmax: u64) -> Result<i32> {
    let family = registry::family(&ctx.spec, family_id)?;
    let mut funcs: Vec<BoundedFunction<S>> = Vec::new();
    for id in ids {
        funcs.push(registry::function(&ctx.spec, id)?);
    }
    let mut cayley = Cayley::new(ctx.spec.clone());
    let idx = indices::geometric(jmax);
    let report =
        ufh::independence_matrix(&mut cayley, &funcs, &family, &idx, &CompareOptions::default())?;
    let mut columns: Vec<String> = vec!["j".into(), "sigma".into()];
    for i in 1..=funcs.len() {
        columns.push(format!("beta_{i}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&ctx.header(jmax), &column_refs);
    for (row, &j) in report.indices.iter().enumerate() {
        let mut fields = vec![j.to_string(), scalar_field(&report.sigma[row])];
        for beta in &report.betas {
            fields.push(scalar_field(&beta[row]));
        }
        csv.row(&fields);
    }
    ctx.out.write("indep.csv", &csv.finish())?;
    let mut v = report.to_json();
    v["functions"] = json!(ids);
    ctx.out.write_json("indep.json", &v)?;
    Ok(if report.ordered_chain { 0 } else { 2 })
}

fn cycle<S: Scalar>(ctx: &Ctx, input: &Path, k: usize, half_len: i64) -> Result<i32> {
    if half_len < 1 {
        return Err(Error::Invalid("template half-length must be at least 1".into()));
    }
    let tf = load_thick(ctx, input)?;
    if k == 0 || k > tf.n_families() {
        return Err(Error::Invalid(format!(
            "family index {k} outside 1..={}",
            tf.n_families()
        )));
    }
    let spec = tf.spec.clone();
    let mut cayley = Cayley::new(spec.clone());
    let step = tf.sub.step_generator();
    // Row template h^{-m}, …, h^{m}: a cycle of H up to its endpoints.
    let mut template = UfChain::<S>::zero(spec.clone(), 1);
    let mut vertex = spec.identity();
    for _ in 0..half_len {
        vertex = spec.compose(&vertex, &spec.invert(&step)?)?;
    }
    for _ in 0..2 * half_len {
        let next = spec.compose(&vertex, &step)?;
        template.add_term(vec![vertex, next], S::one())?;
        vertex = next;
    }
    let m = half_len as u64;
    let reach = thick_reach(&mut cayley, &tf)?;
    let window = ctx.res.window.unwrap_or(reach + m + 4);
    let rule = tf.union_rule(&mut cayley, k)?;
    let phi: BoundedFunction<S> = BoundedFunction::indicator(rule);
    let chain = invariant_cycle(&mut cayley, &tf.sub, &template, &phi, window)?;
    let interior = window.saturating_sub(m);
    let violation = boundary_interior_violation(&mut cayley, &chain, interior)?;

    let (names, dim) = cloud_columns(&spec);
    let mut columns: Vec<String> = Vec::new();
    for i in 0..2 {
        for c in &names {
            columns.push(format!("{c}{i}"));
        }
    }
    columns.push("coeff".into());
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&ctx.header(window), &column_refs);
    for (tuple, coeff) in chain.entries() {
        let mut fields = Vec::new();
        for v in tuple {
            fields.extend(coord_fields(v, dim));
        }
        fields.push(scalar_field(coeff));
        csv.row(&fields);
    }
    ctx.out.write("cycle.csv", &csv.finish())?;
    ctx.out.write_json(
        "cycle.json",
        &json!({
            "group": spec.label(),
            "subgroup": tf.sub.label(),
            "k": k,
            "m": half_len,
            "window": window,
            "interior_radius": interior,
            "terms": chain.len(),
            "interior_ok": violation.is_none(),
            "violation": violation
                .as_ref()
                .map(|t| t.iter().map(Element::format).collect::<Vec<_>>()),
        }),
    )?;
    Ok(if violation.is_none() { 0 } else { 2 })
}

fn coset_avg<S: Scalar>(ctx: &Ctx, sub_id: &str, function: &str, j: u64, probe: u64) -> Result<i32> {
    let sub = registry::subgroup(&ctx.spec, sub_id)?;
    let func: BoundedFunction<S> = registry::function(&ctx.spec, function)?;
    let avg = coset_average(&ctx.spec, &sub, func, j)?;
    let mut cayley = Cayley::new(ctx.spec.clone());
    let (names, dim) = cloud_columns(&ctx.spec);
    let mut columns = names;
    columns.push("value");
    let mut csv = Csv::new(&ctx.header(probe), &columns);
    let points = cayley.ball(probe)?;
    for g in &points {
        let mut fields = coord_fields(g, dim);
        fields.push(scalar_field(&avg.eval(g)?));
        csv.row(&fields);
    }
    ctx.out.write("coset_avg.csv", &csv.finish())?;
    ctx.out.write_json(
        "coset_avg.json",
        &json!({
            "group": ctx.spec.label(),
            "subgroup": sub.label(),
            "function": function,
            "j": j,
            "probe": probe,
            "points": points.len(),
        }),
    )?;
    Ok(0)
}
