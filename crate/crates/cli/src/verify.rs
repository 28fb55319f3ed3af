use gelfand_cetlin::degeneration::{
    check_binomial_relations, deformed_plucker, diagonal_monomial, random_complex_matrix, verify_family_equation,
    Relation,
};
use gelfand_cetlin::flagcombi::{all_flags, anticanonical_lambda, subsets, FlagType};
use gelfand_cetlin::gcpoly::{
    build_polytope, check_vertex_cones, contains_f64, lambda_from_ints, lattice_point_count, vertices, weyl_dimension,
    GCPolytope,
};
use gelfand_cetlin::gcsystem::{fiber_point, gc_map, random_orbit_point, sample_uniform};
use gelfand_cetlin::potential::build_potential;
use gelfand_cetlin::toda::identity_residual;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{Failure, Suite};

type C = Complex64;

pub const CONTAINMENT_TOL: f64 = 1e-9;
pub const ROUND_TRIP_TOL: f64 = 1e-8;
pub const ENDPOINT_TOL: f64 = 1e-12;
pub const FAMILY_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-12;

pub struct Config {
    pub n: usize,
    pub flag: Option<FlagType>,
    pub relation: Option<String>,
    pub samples: usize,
    pub seed: u64,
}

impl Config {
    fn flags(&self) -> Vec<FlagType> {
        match &self.flag {
            Some(f) => vec![f.clone()],
            None => all_flags(self.n),
        }
    }
}

fn poly(flag: &FlagType, lambda: &[i64]) -> Result<GCPolytope, Failure> {
    Ok(build_polytope(flag, &lambda_from_ints(lambda))?)
}

fn suite_doc(name: &str, pass: bool, fields: Value) -> Value {
    let mut doc = json!({ "suite": name, "pass": pass });
    if let (Some(d), Value::Object(f)) = (doc.as_object_mut(), fields) {
        d.extend(f);
    }
    doc
}

/// Lattice counts against the Weyl dimension at `λ` and `2λ`.
fn weyl_counts(cfg: &Config) -> Result<Value, Failure> {
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for flag in cfg.flags() {
        let base = anticanonical_lambda(&flag);
        for lambda in [base.clone(), base.iter().map(|x| 2 * x).collect()] {
            let count = lattice_point_count(&poly(&flag, &lambda)?)?;
            cases += 1;
            if BigInt::from(count) != weyl_dimension(&lambda) {
                mismatches.push(format!("{flag} {lambda:?}"));
            }
        }
    }
    Ok(suite_doc("polytope", mismatches.is_empty(), json!({ "cases": cases, "mismatches": mismatches })))
}

/// Every loop-free full-rank ray selection at every vertex has determinant ±1.
fn refinement(cfg: &Config) -> Result<Value, Failure> {
    let (mut unimodular, mut other) = (0, 0);
    for flag in cfg.flags() {
        let p = poly(&flag, &anticanonical_lambda(&flag))?;
        for v in vertices(&p) {
            let s = check_vertex_cones(&p, v);
            unimodular += s.unimodular;
            other += s.other_determinant;
        }
    }
    Ok(suite_doc("refinement", other == 0, json!({ "unimodular": unimodular, "other_determinant": other })))
}

/// Sampled orbit points land in `Δ_λ`; fibers over sampled `u` map back to `u`.
fn gcsystem(cfg: &Config) -> Result<Value, Failure> {
    let cases: Vec<FlagType> = match &cfg.flag {
        Some(f) => vec![f.clone()],
        None => {
            let mut v: Vec<FlagType> = (2..=cfg.n.max(2)).map(FlagType::full).collect::<Result<_, _>>()?;
            if cfg.n >= 4 {
                v.push(FlagType::grassmannian(2, 4)?);
            }
            v
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut outside, mut worst_trip, mut total) = (0, 0.0f64, 0);
    for flag in &cases {
        let lambda = anticanonical_lambda(flag);
        let p = poly(flag, &lambda)?;
        let lf: Vec<f64> = lambda.iter().map(|&x| x as f64).collect();
        for k in 0..cfg.samples {
            let x = random_orbit_point(&lf, cfg.seed.wrapping_add(k as u64))?;
            total += 1;
            if !contains_f64(&p, &gc_map(&x, flag)?, CONTAINMENT_TOL)? {
                outside += 1;
            }
            let u = sample_uniform(&p, &mut rng);
            let back = gc_map(&fiber_point(&p, &u)?, flag)?;
            worst_trip = worst_trip.max(back.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }
    Ok(suite_doc(
        "gcsystem",
        outside == 0 && worst_trip <= ROUND_TRIP_TOL,
        json!({ "samples": total, "outside": outside, "max_round_trip": worst_trip }),
    ))
}

/// Default relations along the family for the two worked examples.
fn default_relation(flag: &FlagType) -> Option<&'static str> {
    match flag.to_string().as_str() {
        "1,2|3" => Some("+Z[1]Z[2,3] -Z[2]Z[1,3] +t Z[3]Z[1,2]"),
        "2|4" => Some("t Z[1,2]Z[3,4] - Z[1,3]Z[2,4] + Z[1,4]Z[2,3]"),
        _ => None,
    }
}

/// `q_I(z,1) = det z_I`, `q_I(z,0)` diagonal, binomial relations, and the
/// relation residual along the family.
fn degeneration(cfg: &Config) -> Result<Value, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let flags = cfg.flags();
    let (mut worst_det, mut worst_diag) = (0.0f64, 0.0f64);
    let max_n = flags.iter().map(FlagType::n).max().unwrap_or(1);
    for n in 1..=max_n {
        for _ in 0..cfg.samples.min(100) {
            let z = random_complex_matrix(n, &mut rng);
            for size in 1..=n {
                for set in subsets(n, size) {
                    let rows = set.elements();
                    let sub = DMatrix::from_fn(size, size, |r, c| z[(rows[r] - 1, c)]);
                    let det = sub.determinant();
                    let one = deformed_plucker(&z, &set, C::new(1.0, 0.0));
                    worst_det = worst_det.max((one - det).norm() / det.norm().max(1.0));
                    let diag = diagonal_monomial(&z, &set);
                    let zero = deformed_plucker(&z, &set, C::new(0.0, 0.0));
                    worst_diag = worst_diag.max((zero - diag).norm() / diag.norm().max(1.0));
                }
            }
        }
    }
    let (mut pairs, mut failures) = (0, Vec::new());
    for flag in &flags {
        let rep = check_binomial_relations(flag)?;
        pairs += rep.pairs;
        failures.extend(rep.failures.into_iter().map(|(a, b)| format!("{flag}: {a} {b}")));
    }
    let mut family = Vec::new();
    for flag in &flags {
        let text = match (&cfg.relation, &cfg.flag) {
            (Some(r), Some(_)) => Some(r.as_str()),
            _ => default_relation(flag),
        };
        if let Some(text) = text {
            let rel: Relation = text.parse()?;
            let rep = verify_family_equation(flag, &rel, cfg.samples, cfg.seed, None)?;
            family.push(
                json!({ "flag": flag.to_string(), "relation": rep.relation, "max_rel_residual": rep.max_rel_residual }),
            );
        }
    }
    let worst_family = family.iter().filter_map(|f| f["max_rel_residual"].as_f64()).fold(0.0, f64::max);
    let pass =
        worst_det <= ENDPOINT_TOL && worst_diag <= ENDPOINT_TOL && failures.is_empty() && worst_family <= FAMILY_TOL;
    Ok(suite_doc(
        "degeneration",
        pass,
        json!({
            "endpoint_det_residual": worst_det,
            "endpoint_diagonal_residual": worst_diag,
            "binomial_pairs": pairs,
            "binomial_failures": failures,
            "family": family,
        }),
    ))
}

/// `PO(u, x) = f_q(T)` at random points for full flags up to `n ≤ 4`.
fn toda(cfg: &Config) -> Result<Value, Failure> {
    let mut worst = 0.0f64;
    let sizes: Vec<usize> = match &cfg.flag {
        Some(f) if f.is_full() => vec![f.n()],
        Some(_) => return Err(Failure::Input("the toda suite needs a full flag".into())),
        None => (2..=cfg.n.clamp(2, 4)).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for n in sizes.iter().copied() {
        let flag = FlagType::full(n)?;
        let grid: Vec<i64> = (0..n as i64).rev().collect();
        let pot = build_potential(&poly(&flag, &grid)?);
        for _ in 0..cfg.samples {
            let mut lambda: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            lambda.sort_by(|a, b| b.total_cmp(a));
            let x: Vec<f64> = (0..pot.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u: Vec<f64> = (0..pot.dim).map(|_| rng.random_range(lambda[n - 1]..lambda[0])).collect();
            worst = worst.max(identity_residual(&pot, &x, &u, &lambda)?);
        }
    }
    Ok(suite_doc(
        "toda",
        worst <= IDENTITY_TOL,
        json!({ "sizes": sizes, "samples": cfg.samples, "max_identity_residual": worst }),
    ))
}

pub fn run(suite: Suite, cfg: &Config) -> Result<(Value, bool), Failure> {
    let chosen: Vec<Suite> = match suite {
        Suite::All => vec![Suite::Polytope, Suite::Refinement, Suite::Gcsystem, Suite::Degeneration, Suite::Toda],
        s => vec![s],
    };
    let mut docs = Vec::new();
    for s in chosen {
        docs.push(match s {
            Suite::Polytope => weyl_counts(cfg)?,
            Suite::Refinement => refinement(cfg)?,
            Suite::Gcsystem => gcsystem(cfg)?,
            Suite::Degeneration => degeneration(cfg)?,
            Suite::Toda => toda(cfg)?,
            Suite::All => unreachable!(),
        });
    }
    let pass = docs.iter().all(|d| d["pass"] == json!(true));
    Ok((json!({ "pass": pass, "n": cfg.n, "seed": cfg.seed, "samples": cfg.samples, "suites": docs }), pass))
}
