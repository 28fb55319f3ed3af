use std::path::Path;

use gelfand_cetlin::flagcombi::FlagType;
use gelfand_cetlin::gcpoly::{
    build_polytope, dual_volume, is_reflexive, lambda_from_ints, lattice_points, vertices, volume,
    volume_product_formula, weyl_leading_volume, Facet, GCPolytope,
};
use gelfand_cetlin::potential::{
    build_potential, cohomology_rank, critical_points, critical_valuation, positive_real_minimum,
    positive_real_valuation, CriticalPoint, LaurentPotential, DEDUPE_TOL,
};
use gelfand_cetlin::rational::{format_rational, to_f64, Q};
use gelfand_cetlin::toda::{identity_residual, level_set_check, phase_critical_points};
use gelfand_cetlin::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::Failure;

fn rationals(xs: &[Q]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

/// `ℓ(u) = ⟨v, u⟩ − τ` written out, e.g. `"u1 - u3"` or `"-u1 + 2"`.
fn facet_form(f: &Facet) -> String {
    let zero = Q::from_integer(0.into());
    let mut parts: Vec<(bool, String)> =
        f.v.iter()
            .enumerate()
            .filter(|(_, &a)| a != 0)
            .map(|(k, &a)| {
                let coeff = if a.abs() == 1 { String::new() } else { a.abs().to_string() };
                (a < 0, format!("{coeff}u{}", k + 1))
            })
            .collect();
    if f.tau != zero {
        let c = -f.tau.clone();
        parts.push((c < zero, format_rational(&if c < zero { -c } else { c })));
    }
    let mut out = String::new();
    for (i, (neg, body)) in parts.iter().enumerate() {
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn build(flag: &FlagType, lambda: &[Q]) -> Result<GCPolytope, Failure> {
    Ok(build_polytope(flag, lambda)?)
}

/// The JSON document and the lattice points, if `λ` is integral.
pub fn polytope(flag: &FlagType, lambda: &[Q]) -> Result<(Value, Option<Vec<Vec<i64>>>), Failure> {
    let poly = build(flag, lambda)?;
    let points = match lattice_points(&poly) {
        Ok(p) => Some(p),
        Err(Error::NonIntegral(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let facets: Vec<Value> = poly
        .facets
        .iter()
        .map(|f| json!({ "normal": f.v, "tau": format_rational(&f.tau), "form": facet_form(f) }))
        .collect();
    let verts: Vec<Vec<String>> = vertices(&poly).iter().map(|v| rationals(&v.point)).collect();
    let vol = match volume(&poly) {
        Ok(v) => Some(format_rational(&v)),
        Err(Error::Degenerate) => None,
        Err(e) => return Err(e.into()),
    };
    let (reflexive, interior) = is_reflexive(&poly);
    let dual = if reflexive { dual_volume(&poly).ok().map(|v| format_rational(&v)) } else { None };
    let coords: Vec<String> = poly.coords.iter().map(|b| format!("λ^({})_{}", b.k, b.i)).collect();
    let doc = json!({
        "flag": flag.to_string(),
        "lambda": rationals(lambda),
        "dim": poly.dim(),
        "coordinates": coords,
        "facets": facets,
        "vertices": verts,
        "lattice_points": points.as_ref().map(|p| p.len()),
        "volume": vol,
        "volume_product_formula": format_rational(&volume_product_formula(flag, lambda)),
        "volume_weyl_leading": format_rational(&weyl_leading_volume(lambda)),
        "reflexive": reflexive,
        "interior_point": interior,
        "dual_volume": dual,
    });
    Ok((doc, points))
}

pub fn write_lattice_csv(path: &Path, points: &Option<Vec<Vec<i64>>>) -> Result<(), Failure> {
    let points = points.as_ref().ok_or_else(|| Failure::Input("lattice points need an integral λ".into()))?;
    let io = |e: csv::Error| Failure::Internal(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    if let Some(first) = points.first() {
        w.write_record((1..=first.len()).map(|k| format!("u{k}"))).map_err(io)?;
    }
    for p in points {
        w.write_record(p.iter().map(i64::to_string)).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Internal(e.to_string()))
}

fn lambda_f64(lambda: &[Q]) -> Vec<f64> {
    lambda.iter().map(to_f64).collect()
}

fn potential_of(flag: &FlagType, lambda: &[Q]) -> Result<LaurentPotential, Failure> {
    Ok(build_potential(&build(flag, lambda)?))
}

/// Drops the sign of negative zero so equal values print alike.
fn unsigned_zero(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| x + 0.0).collect()
}

fn point_json(pot: &LaurentPotential, lambda: &[f64], t: f64, p: &CriticalPoint) -> Value {
    let val = critical_valuation(pot, lambda, t, &p.y).ok();
    json!({
        "y_re": p.y.iter().map(|z| z.re).collect::<Vec<_>>(),
        "y_im": p.y.iter().map(|z| z.im).collect::<Vec<_>>(),
        "valuation_at_T": unsigned_zero(&p.valuation),
        "valuation": val.as_ref().map(|v| unsigned_zero(&v.u)),
        "valuation_fit_residual": val.as_ref().map(|v| v.residual),
        "nondegenerate": p.nondegenerate,
        "residual": p.residual,
    })
}

pub fn critical(flag: &FlagType, lambda: &[Q], t: f64) -> Result<Value, Failure> {
    let pot = potential_of(flag, lambda)?;
    let lf = lambda_f64(lambda);
    let points = critical_points(&pot, &lf, t)?;
    let rank = cohomology_rank(flag);
    let min = positive_real_minimum(&pot, &lf, t)?;
    let index =
        points.iter().position(|p| p.y.iter().zip(&min.y).all(|(a, b)| (a - b).norm() <= 10.0 * DEDUPE_TOL * b.norm()));
    let val = positive_real_valuation(&pot, &lf)?;
    Ok(json!({
        "flag": flag.to_string(),
        "lambda": rationals(lambda),
        "T": t,
        "potential": pot.render(),
        "count": points.len(),
        "cohomology_rank": rank,
        "all_nondegenerate": points.iter().all(|p| p.nondegenerate),
        "points": points.iter().map(|p| point_json(&pot, &lf, t, p)).collect::<Vec<_>>(),
        "positive_real_minimum": {
            "y": min.y.iter().map(|z| z.re).collect::<Vec<_>>(),
            "residual": min.residual,
            "index": index,
            "valuation": unsigned_zero(&val.u),
            "valuation_fit_residual": val.residual,
            "facet_margin": pot.facet_margin(&lf, &val.u),
        },
    }))
}

pub fn potential(flag: &FlagType, lambda: &[Q]) -> Result<Value, Failure> {
    let pot = potential_of(flag, lambda)?;
    let terms: Vec<Value> = pot.terms.iter().map(|t| json!({ "v": t.v, "tau": format_rational(&t.tau) })).collect();
    Ok(json!({
        "flag": flag.to_string(),
        "lambda": rationals(lambda),
        "laurent": pot.render(),
        "terms": terms,
    }))
}

pub fn toda(lambda: &[f64], samples: usize, seed: u64) -> Result<Value, Failure> {
    let n = lambda.len();
    let flag = FlagType::full(n)?;
    let grid: Vec<i64> = (0..n as i64).rev().collect();
    let pot = build_potential(&build(&flag, &lambda_from_ints(&grid))?);
    let dim = pot.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (lambda[n - 1], lambda[0]);
    if !(lo < hi) {
        return Err(Failure::Input("λ must have distinct first and last entries".into()));
    }
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
        worst = worst.max(identity_residual(&pot, &x, &u, lambda)?);
    }
    let phase = phase_critical_points(lambda)?.len();
    let level = level_set_check(&pot, lambda)?;
    Ok(json!({
        "lambda": lambda,
        "identity_samples": samples,
        "identity_max_residual": worst,
        "phase_critical_points": phase,
        "level_set": serde_json::to_value(&level).map_err(|e| Failure::Internal(e.to_string()))?,
    }))
}
