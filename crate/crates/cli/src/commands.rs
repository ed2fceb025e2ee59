use std::path::Path;

use anyhow::{bail, Context, Result};
use fairslice::bridges::{
    continuous_to_discrete, discrete_solution_to_continuous, discrete_to_continuous, round_and_check,
};
use fairslice::discrete::{
    brute_force_discrete_with, brute_force_size, check_discrete, disjoint_ef_stages, parse_criteria,
    DiscreteAllocation, DiscreteInstance, DiscreteReport, FairnessCriterion,
};
use fairslice::exact_solver::{decide_ef_with, exactify as exactify_alloc, grid_eps_ef_with, EfConstraint, GridSearch, GridStrategy};
use fairslice::gadgets::{
    gen_cake_from_3sat, gen_items_combined, gen_items_epsef, gen_items_equit_3part, gen_items_prop_3part, witness_cake,
    witness_items_combined, witness_items_epsef, witness_items_equit_3part, witness_items_prop_3part, GadgetCertificate,
    GadgetKind,
};
use fairslice::midpoint_protocol::run_alg2;
use fairslice::moving_knife::run_alg1;
use fairslice::valuations::parse_rational;
use fairslice::{envy_report, CakeInstance, ContiguousAllocation, Rational, SearchOptions};
use num_traits::Zero;
use serde_json::{json, Value};

use crate::io;
use crate::{Alg, BridgeCommand, DecideArgs, DiscreteArgs, DiscreteMethod, ExactifyArgs, GenArgs, Outcome, PipelineArgs,
    PipelineName, SolveArgs, Status, VerifyArgs};

fn max_envy(inst: &CakeInstance, a: &ContiguousAllocation) -> Result<Rational> {
    Ok(envy_report(inst, a)?.max_envy)
}

/// Writes `a` when `out` is set and returns the allocation plus its exact envy.
fn emit_allocation(inst: &CakeInstance, a: &ContiguousAllocation, out: Option<&Path>) -> Result<(Value, Value)> {
    if let Some(p) = out {
        io::write(p, &a.to_json())?;
    }
    Ok((io::alloc_value(a), io::rat(&max_envy(inst, a)?)))
}

fn discrete_report(rep: &DiscreteReport) -> Value {
    json!({
        "verdicts": rep.verdicts.iter().map(|(c, ok)| json!({"criterion": c.to_string(), "pass": ok})).collect::<Vec<_>>(),
        "own_values": rep.own.iter().map(io::rat).collect::<Vec<_>>(),
        "max_envy": io::rat(&rep.max_envy),
        "violations": rep.violations,
    })
}

pub fn solve(a: &SolveArgs, opts: &SearchOptions) -> Result<Outcome> {
    let src = io::read(&a.input)?;
    let inst = io::cake(&src.text)?;
    let mut extra = Vec::new();
    let alloc = match a.alg {
        Alg::Alg1 => Some(run_alg1(&inst)),
        Alg::Alg2 => {
            let (alloc, tags) = run_alg2(&inst)?;
            extra.push(("case_tags", serde_json::to_value(tags)?));
            Some(alloc)
        }
        Alg::Grid => {
            let eps = parse_rational(&a.eps)?;
            let gs = GridSearch { tolerance: eps.clone(), mesh: eps, strategy: GridStrategy::Exhaustive };
            grid_eps_ef_with(&inst, &gs, opts)?
        }
        Alg::Exact => {
            let d = decide_ef_with(&inst, &EfConstraint::None, opts)?;
            extra.push(("search_space", json!(d.search_space.to_string())));
            d.allocation
        }
    };
    let mut o = match alloc {
        Some(x) => {
            let (v, env) = emit_allocation(&inst, &x, a.out.as_deref())?;
            Outcome::new(Status::Found).with("allocation", v).with("max_envy", env)
        }
        None => Outcome::new(Status::None).with("allocation", Value::Null),
    };
    o = o.with("instance_sha256", json!(src.digest));
    for (k, v) in extra {
        o = o.with(k, v);
    }
    Ok(o)
}

pub fn decide(a: &DecideArgs, opts: &SearchOptions) -> Result<Outcome> {
    let src = io::read(&a.input)?;
    let inst = io::cake(&src.text)?;
    let constraint: EfConstraint = a.constraint.parse()?;
    let d = decide_ef_with(&inst, &constraint, opts)?;
    let o = match &d.allocation {
        Some(x) => {
            let (v, env) = emit_allocation(&inst, x, a.out.as_deref())?;
            Outcome::new(Status::Found).with("allocation", v).with("max_envy", env)
        }
        None => Outcome::new(Status::None).with("allocation", Value::Null),
    };
    Ok(o.with("instance_sha256", json!(src.digest))
        .with("constraint", json!(a.constraint))
        .with("search_space", json!(d.search_space.to_string())))
}

pub fn exactify(a: &ExactifyArgs) -> Result<Outcome> {
    let src = io::read(&a.input)?;
    let inst = io::cake(&src.text)?;
    let approx = io::allocation(&io::read(&a.alloc)?.text)?;
    let before = io::rat(&max_envy(&inst, &approx)?);
    let o = match exactify_alloc(&inst, &approx)? {
        Some(x) => {
            let (v, env) = emit_allocation(&inst, &x, a.out.as_deref())?;
            Outcome::new(Status::Found).with("allocation", v).with("max_envy", env)
        }
        None => Outcome::new(Status::None).with("allocation", Value::Null),
    };
    Ok(o.with("instance_sha256", json!(src.digest)).with("input_max_envy", before))
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let src = io::read(&a.input)?;
    let alloc_text = io::read(&a.alloc)?.text;
    let o = if io::is_discrete(&src.text)? {
        let inst = io::items(&src.text)?;
        let alloc = io::discrete_allocation(&alloc_text)?;
        let criteria = parse_criteria(&a.criteria)?;
        let rep = check_discrete(&inst, &alloc, &criteria)?;
        let status = if rep.all_pass() { Status::Pass } else { Status::Fail };
        Outcome::new(status).with("model", json!("items")).with("report", discrete_report(&rep))
    } else {
        let inst = io::cake(&src.text)?;
        let alloc = io::allocation(&alloc_text)?;
        let eps = parse_rational(&a.eps)?;
        let rep = envy_report(&inst, &alloc)?;
        let pairs: Vec<Value> = rep
            .envious_pairs()
            .into_iter()
            .filter(|&(i, j)| rep.matrix[i][j] > eps)
            .map(|(i, j)| json!({"agent": i + 1, "envies": j + 1, "by": io::rat(&rep.matrix[i][j])}))
            .collect();
        let own: Vec<Value> = (0..inst.n())
            .map(|i| {
                let (l, r) = alloc.piece_of(i);
                io::rat(&inst.valuation(i).mass(&l, &r))
            })
            .collect();
        let status = if rep.max_envy <= eps { Status::Pass } else { Status::Fail };
        Outcome::new(status)
            .with("model", json!("cake"))
            .with("eps", io::rat(&eps))
            .with("max_envy", io::rat(&rep.max_envy))
            .with("own_values", json!(own))
            .with("envy_above_eps", json!(pairs))
    };
    Ok(o.with("instance_sha256", json!(src.digest)))
}

pub fn discrete(a: &DiscreteArgs, opts: &SearchOptions) -> Result<Outcome> {
    let src = io::read(&a.input)?;
    let inst = io::items(&src.text)?;
    let criteria = parse_criteria(&a.criteria)?;
    let (found, space) = match a.method {
        DiscreteMethod::Brute => (
            brute_force_discrete_with(&inst, &criteria, opts)?,
            json!(brute_force_size(inst.m(), inst.n()).to_string()),
        ),
        DiscreteMethod::Disjoint => {
            if criteria != [FairnessCriterion::Ef] {
                bail!("--method disjoint only searches for ef");
            }
            (Some(disjoint_ef_stages(&inst, opts)?.allocation), Value::Null)
        }
    };
    let o = match found {
        Some(x) => {
            if let Some(p) = &a.out {
                io::write(p, &x.to_json())?;
            }
            let rep = check_discrete(&inst, &x, &criteria)?;
            Outcome::new(Status::Found).with("allocation", io::discrete_alloc_value(&x)).with("report", discrete_report(&rep))
        }
        None => Outcome::new(Status::None).with("allocation", Value::Null),
    };
    Ok(o.with("instance_sha256", json!(src.digest)).with("criteria", json!(a.criteria)).with("search_space", space))
}

pub fn bridge(b: &BridgeCommand) -> Result<Outcome> {
    match b {
        BridgeCommand::C2d { input, eps, out } => {
            let src = io::read(input)?;
            let inst = io::cake(&src.text)?;
            let eps = parse_rational(eps)?;
            let (items, map) = continuous_to_discrete(&inst, &eps)?;
            let digest = io::write(out, &io::items_json(&items))?;
            Ok(Outcome::new(Status::Generated)
                .with("instance_sha256", json!(src.digest))
                .with("output_sha256", json!(digest))
                .with("eps", io::rat(&eps))
                .with("delta", io::rat(&map.delta))
                .with("max_blocks", json!(map.m))
                .with("items", json!(items.m()))
                .with("retained_per_agent", json!(map.retained)))
        }
        BridgeCommand::D2c { input, out } => {
            let src = io::read(input)?;
            let inst = io::items(&src.text)?;
            let (cake, eps, map) = discrete_to_continuous(&inst)?;
            let digest = io::write(out, &cake.to_json())?;
            Ok(Outcome::new(Status::Generated)
                .with("instance_sha256", json!(src.digest))
                .with("output_sha256", json!(digest))
                .with("eps", io::rat(&eps))
                .with("valued_counts", json!(map.counts)))
        }
        BridgeCommand::Round { input, alloc, out } => {
            let src = io::read(input)?;
            let inst = io::items(&src.text)?;
            let (cake, eps, map) = discrete_to_continuous(&inst)?;
            let calloc = io::allocation(&io::read(alloc)?.text)?;
            let env = max_envy(&cake, &calloc)?;
            if env > eps {
                bail!("allocation has envy {env} on the embedded cake, above {eps}");
            }
            let d = round_and_check(&cake, &calloc, &map, &inst)?;
            if let Some(p) = out {
                io::write(p, &d.to_json())?;
            }
            let rep = check_discrete(&inst, &d, &[FairnessCriterion::Ef])?;
            Ok(Outcome::new(Status::Found)
                .with("instance_sha256", json!(src.digest))
                .with("allocation", io::discrete_alloc_value(&d))
                .with("report", discrete_report(&rep)))
        }
    }
}

fn check_items(inst: &DiscreteInstance, w: &DiscreteAllocation, crit: &[FairnessCriterion]) -> Result<(Status, Value)> {
    let rep = check_discrete(inst, w, crit)?;
    Ok((if rep.all_pass() { Status::Pass } else { Status::Fail }, discrete_report(&rep)))
}

pub fn gen(a: &GenArgs) -> Result<Outcome> {
    let src = io::read(&a.input)?;
    let witness_text = a.witness.as_ref().map(|p| io::read(p)).transpose()?.map(|l| l.text);
    let mut o = Outcome::new(Status::Generated);
    let cert: GadgetCertificate;
    let written: String;
    let mut witness: Option<(String, Value, Status, Value)> = None;
    match a.kind {
        GadgetKind::CakeSat | GadgetKind::ItemsSat | GadgetKind::ItemsEpsef => {
            let f = io::formula(&src.text)?;
            let assignment = witness_text.map(|t| io::assignment(&t, f.n)).transpose()?;
            if a.kind == GadgetKind::CakeSat {
                let (inst, c) = gen_cake_from_3sat(&f)?;
                written = io::write(&a.out, &inst.to_json())?;
                o = o.with("agents", json!(inst.n()));
                if let Some(asg) = assignment {
                    let w = witness_cake(&f, &asg)?;
                    let env = max_envy(&inst, &w)?;
                    let status = if env.is_zero() { Status::Pass } else { Status::Fail };
                    witness = Some((w.to_json(), io::alloc_value(&w), status, json!({"max_envy": io::rat(&env)})));
                }
                cert = c;
            } else {
                let combined = a.kind == GadgetKind::ItemsSat;
                let (inst, c) = if combined { gen_items_combined(&f)? } else { gen_items_epsef(&f)? };
                written = io::write(&a.out, &io::items_json(&inst))?;
                o = o.with("agents", json!(inst.n())).with("items", json!(inst.m()));
                if let Some(asg) = assignment {
                    let (w, crit) = if combined {
                        (witness_items_combined(&f, &asg)?, vec![FairnessCriterion::Ef, FairnessCriterion::Eq])
                    } else {
                        (witness_items_epsef(&f, &asg)?, vec![FairnessCriterion::Ef])
                    };
                    let (status, rep) = check_items(&inst, &w, &crit)?;
                    witness = Some((w.to_json(), io::discrete_alloc_value(&w), status, rep));
                }
                cert = c;
            }
        }
        GadgetKind::ItemsProp3p | GadgetKind::ItemsEq3p => {
            let mut x = io::numbers(&src.text)?;
            if a.scale {
                x = x.scaled_by_n();
            }
            let parts = witness_text.map(|t| io::parts(&t)).transpose()?;
            let prop = a.kind == GadgetKind::ItemsProp3p;
            let (inst, c) = if prop { gen_items_prop_3part(&x)? } else { gen_items_equit_3part(&x)? };
            written = io::write(&a.out, &io::items_json(&inst))?;
            o = o.with("agents", json!(inst.n())).with("items", json!(inst.m())).with("numbers", json!(x.x));
            if let Some(p) = parts {
                let (w, crit) = if prop {
                    (witness_items_prop_3part(&x, &p)?, vec![FairnessCriterion::Prop])
                } else {
                    let crit = vec![FairnessCriterion::Eq, FairnessCriterion::Prop, FairnessCriterion::PositiveValue];
                    (witness_items_equit_3part(&x, &p)?, crit)
                };
                let (status, rep) = check_items(&inst, &w, &crit)?;
                witness = Some((w.to_json(), io::discrete_alloc_value(&w), status, rep));
            }
            cert = c;
        }
    }
    if let Some(p) = &a.certificate {
        io::write(p, &cert.to_json())?;
    }
    if let Some((text, value, status, rep)) = witness {
        if let Some(p) = &a.witness_out {
            io::write(p, &text)?;
        }
        o.status = status;
        o = o.with("witness", value).with("witness_check", rep);
    } else if a.witness_out.is_some() {
        bail!("--witness-out needs --witness");
    }
    Ok(o.with("kind", json!(a.kind.to_string()))
        .with("input_sha256", json!(src.digest))
        .with("output_sha256", json!(written))
        .with("length", io::rat(&cert.length))
        .with("eps", cert.eps.as_ref().map(io::rat).unwrap_or(Value::Null))
        .with("regions", json!(cert.regions.len())))
}

pub fn pipeline(a: &PipelineArgs, opts: &SearchOptions) -> Result<Outcome> {
    let src = io::read(&a.input)?;
    let dir = &a.out_dir;
    let mut files = serde_json::Map::new();
    let mut keep = |name: &str, contents: &str| -> Result<()> {
        let digest = io::write(&dir.join(name), contents)?;
        files.insert(name.to_string(), json!(digest));
        Ok(())
    };
    let o = match a.name {
        PipelineName::DisjointEf => {
            let inst = io::items(&src.text).context("stage load")?;
            let run = disjoint_ef_stages(&inst, opts).context("stage grid")?;
            keep("embedded_cake.json", &run.cake.to_json())?;
            if let Some(g) = &run.grid_allocation {
                keep("grid_allocation.json", &g.to_json())?;
            }
            keep("allocation.json", &run.allocation.to_json())?;
            let (status, rep) = check_items(&inst, &run.allocation, &[FairnessCriterion::Ef]).context("stage verify")?;
            let status = if status == Status::Pass { Status::Found } else { Status::Fail };
            Outcome::new(status)
                .with("eps", io::rat(&run.eps))
                .with("mesh", io::rat(&run.mesh))
                .with("allocation", io::discrete_alloc_value(&run.allocation))
                .with("report", rep)
        }
        PipelineName::Exactify => {
            let inst = io::cake(&src.text).context("stage load")?;
            let gs = GridSearch::exactification(&inst);
            let approx = grid_eps_ef_with(&inst, &gs, opts)
                .context("stage grid")?
                .context("stage grid: no allocation within the precision bound")?;
            keep("approx_allocation.json", &approx.to_json())?;
            let approx_envy = io::rat(&max_envy(&inst, &approx)?);
            match exactify_alloc(&inst, &approx).context("stage exactify")? {
                Some(x) => {
                    keep("allocation.json", &x.to_json())?;
                    Outcome::new(Status::Found)
                        .with("allocation", io::alloc_value(&x))
                        .with("max_envy", io::rat(&max_envy(&inst, &x)?))
                        .with("approx_max_envy", approx_envy)
                        .with("tolerance", io::rat(&gs.tolerance))
                }
                None => Outcome::new(Status::None).with("approx_max_envy", approx_envy),
            }
        }
        PipelineName::C2dRoundtrip => {
            let inst = io::cake(&src.text).context("stage load")?;
            let eps = parse_rational(&a.eps)?;
            let (items, map) = continuous_to_discrete(&inst, &eps).context("stage c2d")?;
            keep("items.json", &io::items_json(&items))?;
            let found = brute_force_discrete_with(&items, &[FairnessCriterion::Ef], opts).context("stage brute")?;
            match found {
                Some(d) => {
                    keep("discrete_allocation.json", &d.to_json())?;
                    let c = discrete_solution_to_continuous(&map, &d).context("stage map-back")?;
                    keep("allocation.json", &c.to_json())?;
                    let env = max_envy(&inst, &c)?;
                    let budget = Rational::from_integer((map.m + 2).into()) * &map.delta;
                    let status = if env <= eps && env <= budget { Status::Pass } else { Status::Fail };
                    Outcome::new(status)
                        .with("allocation", io::alloc_value(&c))
                        .with("max_envy", io::rat(&env))
                        .with("eps", io::rat(&eps))
                        .with("delta", io::rat(&map.delta))
                        .with("budget", io::rat(&budget))
                }
                None => Outcome::new(Status::None).with("eps", io::rat(&eps)),
            }
        }
    };
    Ok(o.with("instance_sha256", json!(src.digest)).with("files", Value::Object(files)))
}
