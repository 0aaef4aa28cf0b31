use std::path::Path;

use serde_json::json;

use boundfix_core::automorphisms::{
    make_alpha, make_alpha_inverse, positivity_basis, verify_inverse, x0_basis_change, Automorphism,
};
use boundfix_core::blowup::{iwip_certificate, Verdict};
use boundfix_core::index::{
    check_4n_bound, check_gjll, classify_parageometric, render_ratio, ClassContribution, Classification, IndexReport,
    Side,
};
use boundfix_core::rays::{
    attracting_orbit_bound, build_inventory_for_power, n2_degenerate_relation, FixedPointInventory,
    OccurrenceConvention, Ray, RayRecord,
};
use boundfix_core::traintrack::{
    find_inps, fixed_subgroup_trivial, pf_data, primitivity_exponent, wielandt_bound, FixedSubgroupVerdict, InpMode,
    RoseTrainTrack, TransitionMatrix,
};
use boundfix_core::Error;

use crate::args::{ModeArg, RankArgs};
use crate::report::*;
use crate::CliError;

type Out = Result<Section, CliError>;

const DEGENERATE: &str = "n=2 degenerate: Y_0 relation detected";

/// `alpha_n^t`, or `alpha_n^{-t}` over `x0, a2, …, an` where it is positive.
fn target(n: usize, inverse: bool, power: u32) -> Result<Automorphism, Error> {
    let f = if inverse {
        make_alpha_inverse(n)?.0.in_basis(&x0_basis_change(n)?)?
    } else {
        make_alpha(n)?
    };
    f.power(power.max(1))
}

fn target_label(inverse: bool, power: u32) -> String {
    let base = if inverse { "alpha^-1" } else { "alpha" };
    if power > 1 {
        format!("({base})^{power}")
    } else {
        base.to_string()
    }
}

fn t_max_for(tt: &RoseTrainTrack, given: Option<u32>) -> u32 {
    given.unwrap_or_else(|| tt.dmap_period().max(2)).max(1)
}

fn fix_status(v: &FixedSubgroupVerdict) -> Status {
    if v.certified_trivial {
        Status::Certified
    } else if v.nielsen_cycle {
        Status::Failed
    } else {
        Status::Inconclusive
    }
}

fn degenerate_section(n: usize) -> Out {
    let r = n2_degenerate_relation()?;
    let mut s = Section::new();
    let detail = if r.holds() { DEGENERATE.to_string() } else { "n=2 relation check failed".to_string() };
    s.check("rank", Status::Failed, detail.clone());
    s.line(format!("n = {n}"));
    s.line(format!(
        "w = {} fixed by alpha_2: {}; Y_0 = w·Y to depth {}: {}",
        r.w.render(),
        r.fixed_by_alpha2,
        r.depth,
        r.prefix_consistent
    ));
    s.line(detail);
    s.json = json!({
        "n": n,
        "degenerate": {
            "w": r.w.render(),
            "fixed_by_alpha2": r.fixed_by_alpha2,
            "depth": r.depth,
            "prefix_consistent": r.prefix_consistent,
            "fixed_by_alpha3": r.fixed_by_alpha3,
        },
    });
    Ok(s.finish())
}

fn inventory_or_check(s: &mut Section, n: usize, power: u32, depth: usize) -> Option<FixedPointInventory> {
    match build_inventory_for_power(n, power, depth) {
        Ok(inv) => Some(inv),
        Err(e) => {
            let status =
                if matches!(e, Error::InconclusiveDistinctness(..)) { Status::Inconclusive } else { Status::Failed };
            s.check("fixed points", status, e.to_string());
            None
        }
    }
}

pub fn theorem(n: usize, a: &RankArgs) -> Out {
    if n == 2 {
        return degenerate_section(n);
    }
    let mut s = Section::new();
    let f = target(n, false, 1)?;
    let g = target(n, true, 1)?;
    let tf = RoseTrainTrack::build(&f)?;
    let tg = RoseTrainTrack::build(&g)?;
    let t_max = t_max_for(&tf, a.t_max).max(t_max_for(&tg, a.t_max));

    let inv = inventory_or_check(&mut s, n, 1, a.depth);
    let (att, rep) = inv.as_ref().map_or((0, 0), |i| (i.attracting.len(), i.repelling.len()));
    if let Some(inv) = &inv {
        let b = check_4n_bound(inv);
        s.check("fixed points", if b.ok { Status::Certified } else { Status::Failed }, b.diagnostic);
    }

    let fix_f = fixed_subgroup_trivial(&tf);
    let fix_g = fixed_subgroup_trivial(&tg);
    s.check("Fix(alpha) trivial", fix_status(&fix_f), fix_f.reason.clone());
    s.check("Fix(alpha^-1) trivial", fix_status(&fix_g), fix_g.reason.clone());

    let straight = find_inps(&tf, InpMode::Straight, a.max_len);
    let twisted = find_inps(&tf, InpMode::Twisted, a.max_len);
    for r in [&straight, &twisted] {
        let status = match inp_status(r) {
            Status::Certified if !r.paths.is_empty() => Status::Failed,
            st => st,
        };
        s.check(format!("no {} INP for alpha", format!("{:?}", r.mode).to_lowercase()), status, r.justification.clone());
    }

    let iwip_f = iwip_certificate(&f, Some(t_max))?;
    let iwip_g = iwip_certificate(&g, Some(t_max))?;
    s.check("iwip(alpha)", Status::of_verdict(iwip_f.verdict), iwip_f.reasoning.join("; "));
    s.check("iwip(alpha^-1)", Status::of_verdict(iwip_g.verdict), iwip_g.reasoning.join("; "));

    let para = classify_parageometric(n, t_max, a.depth)?;
    let base = &para.powers[0];
    for r in [&base.forward, &base.inverse] {
        let gj = check_gjll(r);
        let st = if !gj.ok {
            Status::Failed
        } else if r.is_complete() {
            Status::Certified
        } else {
            Status::Inconclusive
        };
        s.check(format!("index({})", if r.side == Side::Forward { "alpha" } else { "alpha^-1" }), st, gj.diagnostic);
    }
    let para_ok = para.powers.iter().all(|p| {
        p.forward_class == Classification::Neither && p.inverse_class == Classification::Parageometric
    });
    let para_status = if para_ok {
        Status::Certified
    } else if para.powers.iter().any(|p| p.forward_class == Classification::Unknown || p.inverse_class == Classification::Unknown) {
        Status::Inconclusive
    } else {
        Status::Failed
    };
    s.check("parageometric classification", para_status, format!("t = 1..{t_max}"));

    let iwip_word = |v: Verdict| match v {
        Verdict::Iwip => "certified",
        Verdict::Reducible => "failed",
        Verdict::Inconclusive => "inconclusive",
    };
    let both_iwip = if iwip_f.verdict == iwip_g.verdict { iwip_word(iwip_f.verdict) } else { "mixed" };
    let fix_word = if fix_f.certified_trivial && fix_g.certified_trivial { "Fix trivial" } else { "Fix not certified trivial" };
    s.line(format!("n = {n}"));
    s.line(format!(
        "4n-1 = {} fixed points: {att} attracting, {rep} repelling; {fix_word}; iwip: {both_iwip}; ind = {}; ind(inverse) = {}",
        4 * n - 1,
        render_ratio(&base.forward.total),
        render_ratio(&base.inverse.total)
    ));
    s.line(format!(
        "orbit bound on attracting points: {} (self-occurrence sum), {} (max self-occurrence)",
        attracting_orbit_bound(&f, OccurrenceConvention::SelfOccurrenceSum),
        attracting_orbit_bound(&f, OccurrenceConvention::MaxSelfOccurrence)
    ));
    s.line(inp_line("INPs of alpha, straight", &straight));
    s.line(inp_line("INPs of alpha, twisted", &twisted));
    s.line(format!("Fix(alpha^-1): {}", fix_g.reason));
    for p in &para.powers {
        s.line(format!(
            "t = {}: ind = {}, ind(inverse) = {}; alpha^t {}, alpha^-t {}",
            p.power,
            render_ratio(&p.forward.total),
            render_ratio(&p.inverse.total),
            classification_label(p.forward_class),
            classification_label(p.inverse_class)
        ));
    }
    for c in &s.checks.clone() {
        s.line(format!("  [{}] {}", c.status.label(), c.name));
    }

    let flags = |side: Side| -> Vec<(u32, Classification)> {
        para.powers
            .iter()
            .map(|p| (p.power, if side == Side::Forward { p.forward_class } else { p.inverse_class }))
            .collect()
    };
    s.json = json!({
        "n": n,
        "t_max": t_max,
        "fixed_points": { "attracting": att, "repelling": rep, "total": att + rep, "bound_4n": 4 * n },
        "fix_trivial": { "alpha": fix_f.certified_trivial, "alpha_inverse": fix_g.certified_trivial },
        "inps": { "straight": inp_json(&straight), "twisted": inp_json(&twisted) },
        "iwip": { "alpha": iwip_f.verdict, "alpha_inverse": iwip_g.verdict },
        "index": {
            "alpha": index_json(&base.forward, &flags(Side::Forward)),
            "alpha_inverse": index_json(&base.inverse, &flags(Side::Inverse)),
        },
    });
    Ok(s.finish())
}

fn record_json(r: &RayRecord, render: impl Fn(&RayRecord) -> (String, String)) -> serde_json::Value {
    let (seed, prefix) = render(r);
    json!({ "name": r.name, "seed": seed, "prefix": prefix })
}

pub fn fixed_points(n: usize, a: &RankArgs, power: u32, original_basis: bool) -> Out {
    if n == 2 {
        return degenerate_section(n);
    }
    let mut s = Section::new();
    let Some(inv) = inventory_or_check(&mut s, n, power, a.depth) else {
        s.json = json!({ "n": n, "power": power, "depth": a.depth });
        s.line(format!("n = {n}: fixed point inventory not certified"));
        return Ok(s.finish());
    };
    let change = x0_basis_change(n)?;
    let plain = |r: &RayRecord| (r.seed.render(), r.prefix.render());
    let back = |r: &RayRecord| {
        let conv = |w| change.revert(w).map(|w| w.render()).unwrap_or_default();
        (conv(&r.seed), conv(&r.prefix))
    };
    let rep_render: &dyn Fn(&RayRecord) -> (String, String) = if original_basis { &back } else { &plain };
    let b = check_4n_bound(&inv);
    s.check("fixed points", if b.ok { Status::Certified } else { Status::Failed }, b.diagnostic.clone());

    s.line(format!(
        "n = {n}, power {}: {} attracting, {} repelling, total {} (depth {})",
        inv.power,
        inv.attracting.len(),
        inv.repelling.len(),
        inv.total(),
        inv.depth
    ));
    let head = |w: String| w.split(' ').take(12).collect::<Vec<_>>().join(" ");
    for r in &inv.attracting {
        s.line(format!("  {:<5} seed {:<28} {} ...", r.name, r.seed.render(), head(r.prefix.render())));
    }
    for r in &inv.repelling {
        let (seed, prefix) = rep_render(r);
        s.line(format!("  {:<5} seed {:<28} {} ...", r.name, seed, head(prefix)));
    }
    s.line(format!(
        "attracting pairs diverge by letter {}, repelling by letter {}",
        inv.attracting_distinct.max_divergence().map_or("-".into(), |p| p.to_string()),
        inv.repelling_distinct.max_divergence().map_or("-".into(), |p| p.to_string())
    ));
    s.line(b.diagnostic);
    let f = target(n, false, power)?;
    s.json = json!({
        "n": n,
        "power": inv.power,
        "depth": inv.depth,
        "attracting": inv.attracting.iter().map(|r| record_json(r, plain)).collect::<Vec<_>>(),
        "repelling": inv.repelling.iter().map(|r| record_json(r, rep_render)).collect::<Vec<_>>(),
        "repelling_basis": if original_basis { change.source().names() } else { change.target().names() },
        "total": inv.total(),
        "attracting_divergence": inv.attracting_distinct,
        "repelling_divergence": inv.repelling_distinct,
        "orbit_bound": {
            "self_occurrence_sum": attracting_orbit_bound(&f, OccurrenceConvention::SelfOccurrenceSum),
            "max_self_occurrence": attracting_orbit_bound(&f, OccurrenceConvention::MaxSelfOccurrence),
        },
    });
    Ok(s.finish())
}

pub fn inps(n: usize, a: &RankArgs, mode: ModeArg, inverse: bool, power: u32) -> Out {
    let f = target(n, inverse, power)?;
    let tt = RoseTrainTrack::build(&f)?;
    let modes: &[InpMode] = match mode {
        ModeArg::Straight => &[InpMode::Straight],
        ModeArg::Twisted => &[InpMode::Twisted],
        ModeArg::Both => &[InpMode::Straight, InpMode::Twisted],
    };
    let mut s = Section::new();
    let label = target_label(inverse, power);
    s.line(format!("n = {n}, {label} over {}", tt.basis().names().join(", ")));
    let mut searches = serde_json::Map::new();
    for &m in modes {
        let r = find_inps(&tt, m, a.max_len);
        let name = format!("{m:?}").to_lowercase();
        s.check(format!("{name} search"), inp_status(&r), r.justification.clone());
        s.line(inp_line(&name, &r));
        for p in &r.paths {
            s.line(format!("  {}", p.render()));
        }
        searches.insert(name, inp_json(&r));
    }
    let fix = fixed_subgroup_trivial(&tt);
    s.line(format!("Fix: {}", fix.reason));
    s.json = json!({
        "n": n,
        "automorphism": label,
        "basis": tt.basis().names(),
        "searches": searches,
        "fix_trivial": fix.certified_trivial,
        "nielsen_cycle": fix.nielsen_cycle,
        "fix_reason": fix.reason,
    });
    Ok(s.finish())
}

pub fn iwip(n: usize, a: &RankArgs, inverse: bool, dot: bool) -> Out {
    let f = target(n, inverse, 1)?;
    let tt = RoseTrainTrack::build(&f)?;
    let t_max = t_max_for(&tt, a.t_max);
    let c = iwip_certificate(&f, Some(t_max))?;
    let mut s = Section::new();
    let label = target_label(inverse, 1);
    s.check(format!("iwip({label})"), Status::of_verdict(c.verdict), c.reasoning.join("; "));
    s.line(format!("n = {n}, {label}: {}", verdict_label(c.verdict)));
    for r in &c.reasoning {
        s.line(format!("  {r}"));
    }
    let germs = |after| {
        c.gamma2
            .germ_components(after)
            .iter()
            .map(|comp| format!("{{{}}}", comp.iter().map(|&d| tt.render_direction(d)).collect::<Vec<_>>().join(", ")))
            .collect::<Vec<_>>()
            .join(" ")
    };
    s.line(format!("  germ-level components before closure: {}", germs(false)));
    s.line(format!("  germ-level components after closure: {}", germs(true)));
    s.line(format!(
        "  gate-level simplex components: {} before closure, {} after",
        c.gamma2.pre_closure_components().len(),
        c.gamma2.simplex_components().len()
    ));
    if dot {
        s.line(c.gamma2.to_dot(&tt));
    }
    let mut v = iwip_json(&c, dot);
    v["n"] = json!(n);
    v["automorphism"] = json!(label);
    v["t_max"] = json!(t_max);
    s.json = v;
    Ok(s.finish())
}

pub fn index(n: usize, a: &RankArgs) -> Out {
    if n == 2 {
        return degenerate_section(n);
    }
    let tt = RoseTrainTrack::build(&target(n, false, 1)?)?;
    let t_max = t_max_for(&tt, a.t_max);
    let para = classify_parageometric(n, t_max, a.depth)?;
    let inv = build_inventory_for_power(n, 1, a.depth)?;
    let mut s = Section::new();
    let base = &para.powers[0];
    s.line(format!("n = {n}"));
    for (label, r, pick) in [("alpha", &base.forward, 0), ("alpha^-1", &base.inverse, 1)] {
        let gj = check_gjll(r);
        let st = match (gj.ok, r.is_complete()) {
            (false, _) => Status::Failed,
            (true, true) => Status::Certified,
            (true, false) => Status::Inconclusive,
        };
        s.check(format!("index({label})"), st, gj.diagnostic.clone());
        let flags: Vec<_> = para
            .powers
            .iter()
            .map(|p| format!("t={}: {}", p.power, classification_label(if pick == 0 { p.forward_class } else { p.inverse_class })))
            .collect();
        s.line(format!(
            "ind({label}) = {} ({}); {}; {}",
            render_ratio(&r.total),
            if r.is_complete() { "complete" } else { "lower bound on index" },
            gj.diagnostic,
            flags.join(", ")
        ));
    }
    let b = check_4n_bound(&inv);
    s.check("4n bound", if b.ok { Status::Certified } else { Status::Failed }, b.diagnostic.clone());
    s.line(&b.diagnostic);
    let unknown = para
        .powers
        .iter()
        .any(|p| p.forward_class == Classification::Unknown || p.inverse_class == Classification::Unknown);
    s.check(
        "parageometric classification",
        if unknown { Status::Inconclusive } else { Status::Certified },
        format!("t = 1..{t_max}"),
    );
    let flags = |fwd: bool| -> Vec<(u32, Classification)> {
        para.powers.iter().map(|p| (p.power, if fwd { p.forward_class } else { p.inverse_class })).collect()
    };
    let powers: Vec<_> = para
        .powers
        .iter()
        .map(|p| json!({ "t": p.power, "alpha": render_ratio(&p.forward.total), "alpha_inverse": render_ratio(&p.inverse.total) }))
        .collect();
    s.json = json!({
        "n": n,
        "t_max": t_max,
        "alpha": index_json(&base.forward, &flags(true)),
        "alpha_inverse": index_json(&base.inverse, &flags(false)),
        "powers": powers,
        "bound_4n": { "ok": b.ok, "diagnostic": b.diagnostic },
    });
    Ok(s.finish())
}

fn matrix_section(f: &Automorphism, s: &mut Section) -> serde_json::Value {
    let m = TransitionMatrix::of(f);
    let exponent = primitivity_exponent(&m).ok().flatten();
    let n = m.size();
    s.line("transition matrix (row i, column j: occurrences of generator i in the image of generator j):");
    for line in m.render().lines() {
        s.line(format!("  {line}"));
    }
    s.line(format!(
        "primitive: {} (Wielandt bound {})",
        exponent.map_or("no".to_string(), |k| format!("M^{k} > 0")),
        wielandt_bound(n)
    ));
    let pf = exponent.and_then(|_| pf_data(&m, 1e-13).ok());
    if let Some(pf) = &pf {
        s.line(format!("PF eigenvalue {:.12}, residual {:.1e}", pf.lambda, pf.residual));
        s.line(format!(
            "PF vector (sum 1): {}",
            pf.vector.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(" ")
        ));
    }
    json!({
        "basis": f.basis().names(),
        "rows": m.rows(),
        "column_sums": m.column_sums(),
        "primitivity_exponent": exponent,
        "wielandt_bound": wielandt_bound(n),
        "pf": pf.map(|p| json!({ "lambda": p.lambda, "vector": p.vector, "residual": p.residual, "iterations": p.iterations })),
    })
}

pub fn matrix(n: usize, inverse: bool, power: u32) -> Out {
    let f = target(n, inverse, power)?;
    let mut s = Section::new();
    let label = target_label(inverse, power);
    s.line(format!("n = {n}, {label}"));
    let mut v = matrix_section(&f, &mut s);
    let primitive = v["primitivity_exponent"].is_number();
    s.check("primitivity", if primitive { Status::Certified } else { Status::Failed }, String::new());
    let conv = |c| attracting_orbit_bound(&f, c);
    s.line(format!(
        "orbit bound on attracting points: {} (self-occurrence sum), {} (max self-occurrence)",
        conv(OccurrenceConvention::SelfOccurrenceSum),
        conv(OccurrenceConvention::MaxSelfOccurrence)
    ));
    v["n"] = json!(n);
    v["automorphism"] = json!(label);
    v["orbit_bound"] = json!({
        "self_occurrence_sum": conv(OccurrenceConvention::SelfOccurrenceSum),
        "max_self_occurrence": conv(OccurrenceConvention::MaxSelfOccurrence),
    });
    s.json = v;
    Ok(s.finish())
}

pub fn custom(path: &Path, max_len: Option<usize>, t_max: Option<u32>) -> Out {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read seed file {}: {e}", path.display())))?;
    let f = Automorphism::parse_table(&text).map_err(|e| CliError::Input(format!("seed file: {e}")))?;
    let n = f.rank();
    let mut s = Section::new();
    s.line(format!("custom automorphism of F_{n}:"));
    for line in f.render_table().lines() {
        s.line(format!("  {line}"));
    }
    let mut v = json!({ "n": n, "table": f.to_json() });

    if let Some(inv) = f.inverse() {
        let ok = verify_inverse(&f, &inv);
        s.check("inverse witness", if ok { Status::Certified } else { Status::Failed }, "");
        s.line(format!("inverse witness verified: {ok}"));
        v["inverse_verified"] = json!(ok);
    }

    let Some(change) = positivity_basis(&f) else {
        s.check("positivity", Status::Inconclusive, "no sign-flip basis makes every image positive");
        s.line("not positive under any generator sign flip: train-track analyses unknown");
        v["positive_basis"] = json!(null);
        s.json = v;
        return Ok(s.finish());
    };
    let g = f.in_basis(&change)?;
    let tt = RoseTrainTrack::build(&g)?;
    s.line(format!("positive over {}", g.basis().names().join(", ")));
    v["positive_basis"] = json!(g.basis().names());
    v["train_track"] = train_track_json(&tt);
    let sum = tt.summary();
    s.line(format!(
        "gates: {}",
        sum.gates.iter().map(|g| format!("{{{}}}", g.join(", "))).collect::<Vec<_>>().join(" ")
    ));
    s.line(format!(
        "illegal turns: {}",
        sum.illegal_turns.iter().map(|(a, b)| format!("({a}, {b})")).collect::<Vec<_>>().join(" ")
    ));
    v["matrix"] = matrix_section(&g, &mut s);

    let mut searches = serde_json::Map::new();
    for m in [InpMode::Straight, InpMode::Twisted] {
        let r = find_inps(&tt, m, max_len);
        let name = format!("{m:?}").to_lowercase();
        s.line(inp_line(&format!("INPs, {name}"), &r));
        for p in &r.paths {
            s.line(format!("  {}", p.render()));
        }
        searches.insert(name, inp_json(&r));
    }
    v["inps"] = json!(searches);
    let fix = fixed_subgroup_trivial(&tt);
    s.check("Fix trivial", fix_status(&fix), fix.reason.clone());
    s.line(format!("Fix: {}", fix.reason));

    let t_max = t_max_for(&tt, t_max);
    let c = iwip_certificate(&g, Some(t_max))?;
    s.check("iwip", Status::of_verdict(c.verdict), c.reasoning.join("; "));
    s.line(format!("iwip: {}", verdict_label(c.verdict)));
    for r in &c.reasoning {
        s.line(format!("  {r}"));
    }
    v["iwip"] = iwip_json(&c, false);

    // Expanding fixed directions seed attracting fixed words of the base
    // class; with Fix trivial they give a lower bound on the index.
    let auto = std::sync::Arc::new(g.clone());
    let seeds: Vec<String> = tt
        .fixed_directions()
        .into_iter()
        .filter_map(|d| {
            let w = boundfix_core::words::ReducedWord::reduce(g.basis(), [d]).ok()?;
            Ray::new(tt.render_direction(d), auto.clone(), w).ok().map(|r| r.name().to_string())
        })
        .collect();
    let index = if fix.certified_trivial {
        let r = IndexReport::from_classes(n, 1, Side::Forward, vec![ClassContribution::new("base", 0, seeds.len() as u32)]);
        s.line(format!(
            "index >= {} from {} attracting fixed directions ({}) (lower bound on index); parageometric: unknown",
            render_ratio(&r.total),
            seeds.len(),
            seeds.join(", ")
        ));
        index_json(&r, &[(1, Classification::Unknown)])
    } else {
        s.line("index: unknown (Fix not certified trivial); parageometric: unknown");
        serde_json::Value::Null
    };
    v["attracting_directions"] = json!(seeds);
    v["index"] = index;
    v["t_max"] = json!(t_max);
    s.json = v;
    Ok(s.finish())
}
