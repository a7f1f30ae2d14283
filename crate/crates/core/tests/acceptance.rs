//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Oracles here are deliberately naive and
//! share no code with the library beyond the set types.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumprod::claims::{
    evaluate_claim, lookup, registry, results_json_lines, run_suite, trends_by_series, ClaimResult, EvalOptions,
    Exactness, FamilySpec, GenSet, Input, Job, SizeRange, Verdict,
};
use sumprod::energies::{energy, energy_forms, fp_energy_forms, gowers_norm, Group};
use sumprod::field::FpSet;
use sumprod::incidence::{collinear_triples_single, triples_via_energies};
use sumprod::rational::Rational;
use sumprod::sets::RSet;

const C1_LIMIT: Duration = Duration::from_secs(60);
const C2_LIMIT: Duration = Duration::from_secs(5 * 60);
const C3_LIMIT: Duration = Duration::from_secs(2 * 60);
const C4_LIMIT: Duration = Duration::from_secs(15 * 60);
const ENERGY_LIMIT: Duration = Duration::from_secs(5);
const TRIPLES_LIMIT: Duration = Duration::from_secs(30);
const GOWERS_LIMIT: Duration = Duration::from_secs(60);

const RANDOM_INPUTS: u64 = 500;
const MAX_RANDOM_SIZE: usize = 24;
const QUADRUPLE_ORACLE_MAX: usize = 12;
const DETERMINANT_ORACLE_MAX: usize = 6;
const PARALLELEPIPED_ORACLE_MAX: usize = 12;
const PRIMES: [u64; 4] = [101, 251, 1009, 10007];

const SEED: u64 = 1;
const FAMILIES: [&str; 7] =
    ["gp:1:2", "ap:1:1", "random", "gp-subset:2:2", "gp-ap:2:1", "fp-subgroup", "fp-random:10007"];
const CONSTANT_FAMILIES: [&str; 5] = ["gp:1:2", "ap:1:1", "random", "gp-subset:2:2", "fp-subgroup"];
const FLAGGED_FAMILIES: [&str; 2] = ["gp:1:2", "fp-subgroup"];
const CONSTANT_CLAIMS: [&str; 10] =
    ["e3_m", "triples_log", "rn_t", "szt", "elekes", "e_m_alpha", "three_fold", "k_fold", "fp_sum_prod", "fp_shift"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Result<String, String>) -> bool {
    let start = Instant::now();
    let res = f();
    let took = start.elapsed();
    let mut o = match res {
        Ok(detail) => Outcome { pass: true, detail },
        Err(detail) => Outcome { pass: false, detail },
    };
    if let Some(l) = limit {
        if took > l {
            o.pass = false;
            o.detail = format!("{}; over the {:?} limit", o.detail, l);
        }
    }
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id} ({name}, {:.1} s): {}", took.as_secs_f64(), o.detail);
    o.pass
}

// ---------------------------------------------------------------------------
// Random inputs and oracles
// ---------------------------------------------------------------------------

/// `(family label, A, B)`: rationals `±u/v` with `u ≤ 60`, `v ≤ 8`, or
/// residues modulo one of [`PRIMES`]. `A` avoids zero, `B` may contain it.
fn random_input(seed: u64) -> Input {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (na, nb) = (rng.gen_range(1..=MAX_RANDOM_SIZE), rng.gen_range(1..=MAX_RANDOM_SIZE));
    let (family, a, b) = if seed.is_multiple_of(2) {
        let mut draw = |n: usize, zero: bool| {
            let mut s = BTreeSet::new();
            if zero && rng.gen_bool(0.3) {
                s.insert(Rational::zero());
            }
            while s.len() < n {
                let u: i64 = rng.gen_range(1..=60);
                let v: i64 = rng.gen_range(1..=8);
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                s.insert(Rational::new(sign * u, v).unwrap());
            }
            GenSet::Rational(RSet::new(s))
        };
        let a = draw(na, false);
        let b = draw(nb, true);
        (FamilySpec::parse("random:60:8", seed).unwrap(), a, b)
    } else {
        let p = PRIMES[rng.gen_range(0..PRIMES.len())];
        let mut draw = |n: usize, lo: u64| {
            let mut s = BTreeSet::new();
            while s.len() < n {
                s.insert(rng.gen_range(lo..p));
            }
            GenSet::Fp(FpSet::new(p, s).unwrap())
        };
        let a = draw(na, 1);
        let b = draw(nb, 0);
        (FamilySpec::parse(&format!("fp-random:{p}"), seed).unwrap(), a, b)
    };
    Input { family, n: na, c: b.clone(), a, b }
}

fn count_quadruples<T>(a: &[T], b: &[T], eq: impl Fn(&T, &T, &T, &T) -> bool) -> BigUint {
    let mut n = 0u64;
    for a1 in a {
        for a2 in a {
            for b1 in b {
                for b2 in b {
                    n += eq(a1, b1, a2, b2) as u64;
                }
            }
        }
    }
    BigUint::from(n)
}

/// Ordered collinear triples of `A×A`, `B×B`, `B×B` by orientation determinants.
fn determinant_triples(a: &RSet, b: &RSet) -> BigUint {
    let grid = |s: &RSet| -> Vec<(Rational, Rational)> {
        s.iter().flat_map(|x| s.iter().map(move |y| (x.clone(), y.clone()))).collect()
    };
    let (pa, pb) = (grid(a), grid(b));
    let mut n = 0u64;
    for p in &pa {
        for q in &pb {
            for r in &pb {
                let det = (&q.0 - &p.0) * (&r.1 - &p.1) - (&r.0 - &p.0) * (&q.1 - &p.1);
                n += det.is_zero() as u64;
            }
        }
    }
    BigUint::from(n)
}

/// `#{(x, g₁, g₂, g₃) : x·∏_{i∈S} gᵢ ∈ A for every S}`; each `gᵢ` is forced
/// into `A/x` by the singleton corners.
fn parallelepipeds(a: &RSet) -> BigUint {
    let mut n = 0u64;
    for x in a {
        let g: Vec<Rational> = a.iter().map(|y| y / x).collect();
        for g1 in &g {
            for g2 in &g {
                for g3 in &g {
                    let corners = [g1 * g2, g1 * g3, g2 * g3, &(g1 * g2) * g3];
                    n += corners.iter().all(|c| a.contains(&(x * c))) as u64;
                }
            }
        }
    }
    BigUint::from(n)
}

fn check(ok: bool, what: impl FnOnce() -> String, errors: &mut Vec<String>) {
    if !ok && errors.len() < 5 {
        errors.push(what());
    }
}

fn verdict_ok(r: &ClaimResult, errors: &mut Vec<String>) -> bool {
    let ok = r.verdict != Verdict::Fails;
    check(ok, || format!("{} fails on {} seed {}: lhs {:?} rhs {:?}", r.claim, r.family, r.seed, r.lhs, r.rhs), errors);
    ok
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

fn exact_identities() -> Result<String, String> {
    let opts = EvalOptions::default();
    let claims = ["conv_identity", "fiber_identity", "t_energy"].map(|c| lookup(c).unwrap());
    let mut errors = Vec::new();
    let (mut holds, mut oracles) = (0usize, 0usize);
    for seed in 0..RANDOM_INPUTS {
        let input = random_input(seed);
        for c in claims {
            let r = evaluate_claim(c, &input, &opts);
            let expected_skip = c.id == "t_energy" && matches!(input.a, GenSet::Fp(_));
            let ok = if expected_skip { r.verdict == Verdict::Skipped } else { r.verdict == Verdict::Holds };
            check(ok, || format!("{} on seed {seed}: {:?} {:?}", c.id, r.verdict, r.reason), &mut errors);
            holds += (r.verdict == Verdict::Holds) as usize;
        }
        match (&input.a, &input.b) {
            (GenSet::Rational(a), GenSet::Rational(b)) => {
                let (ea, eb) = (a.elements(), b.elements());
                if a.len().max(b.len()) <= QUADRUPLE_ORACLE_MAX {
                    let add = count_quadruples(ea, eb, |a1, b1, a2, b2| a1 + b1 == a2 + b2);
                    let mul = count_quadruples(ea, eb, |a1, b1, a2, b2| a1 * b1 == a2 * b2);
                    let self_mul = count_quadruples(ea, ea, |a1, b1, a2, b2| a1 * b1 == a2 * b2);
                    check(
                        energy_forms(a, b, Group::Additive).unwrap().convolution == add,
                        || format!("E+ oracle, seed {seed}"),
                        &mut errors,
                    );
                    if !b.contains_zero() {
                        check(
                            energy_forms(a, b, Group::Multiplicative).unwrap().convolution == mul,
                            || format!("E× oracle, seed {seed}"),
                            &mut errors,
                        );
                    }
                    check(
                        energy(a, 2, Group::Multiplicative).unwrap().value == self_mul,
                        || format!("E×(A) oracle, seed {seed}"),
                        &mut errors,
                    );
                    oracles += 1;
                }
                if a.len().max(b.len()) <= DETERMINANT_ORACLE_MAX {
                    check(
                        triples_via_energies(a, b).unwrap() == determinant_triples(a, b),
                        || format!("T oracle, seed {seed}"),
                        &mut errors,
                    );
                    oracles += 1;
                }
                if a.len() <= PARALLELEPIPED_ORACLE_MAX {
                    check(
                        gowers_norm(a, 3).unwrap().value == parallelepipeds(a),
                        || format!("U³ oracle, seed {seed}"),
                        &mut errors,
                    );
                    oracles += 1;
                }
            }
            (GenSet::Fp(a), GenSet::Fp(b)) if a.len().max(b.len()) <= QUADRUPLE_ORACLE_MAX => {
                let p = a.modulus();
                let add = count_quadruples(a.elements(), b.elements(), |a1, b1, a2, b2| (a1 + b1) % p == (a2 + b2) % p);
                check(
                    fp_energy_forms(a, b, Group::Additive).unwrap().convolution == add,
                    || format!("F_p E+ oracle, seed {seed}"),
                    &mut errors,
                );
                if !b.contains_zero() {
                    let mul = count_quadruples(a.elements(), b.elements(), |a1, b1, a2, b2| a1 * b1 % p == a2 * b2 % p);
                    check(
                        fp_energy_forms(a, b, Group::Multiplicative).unwrap().convolution == mul,
                        || format!("F_p E× oracle, seed {seed}"),
                        &mut errors,
                    );
                }
                oracles += 1;
            }
            _ => {}
        }
    }
    if errors.is_empty() {
        Ok(format!("{RANDOM_INPUTS} inputs, {holds} identities hold, {oracles} oracle cross-checks agree"))
    } else {
        Err(errors.join("; "))
    }
}

fn family_jobs(claims: &[&str], families: &[&str]) -> Vec<Job> {
    let mut jobs = Vec::new();
    for c in claims {
        let spec = lookup(c).unwrap();
        let sizes: SizeRange = spec.default_sizes.parse().unwrap();
        for f in families {
            let family = FamilySpec::parse(f, SEED).unwrap();
            jobs.extend(sizes.sizes().iter().map(|&n| Job { claim: spec, family: family.clone(), n }));
        }
    }
    jobs
}

fn exact_inequalities() -> Result<String, String> {
    let opts = EvalOptions::default();
    let ids: Vec<&str> =
        registry().iter().filter(|c| c.exactness == Exactness::ExactInequality).map(|c| c.id).collect();
    let mut errors = Vec::new();
    let mut results = run_suite(&family_jobs(&ids, &FAMILIES), &opts);
    for seed in 0..RANDOM_INPUTS {
        let input = random_input(seed);
        let (na, nb) = (input.a.len(), input.b.len());
        for id in &ids {
            let fits = match *id {
                "plunnecke" => na.max(nb) <= 16,
                "plunnecke_x" => na <= 12 && nb <= 16,
                _ => true,
            };
            if fits {
                results.push(evaluate_claim(lookup(id).unwrap(), &input, &opts));
            }
        }
    }
    let ok = results.iter().filter(|r| verdict_ok(r, &mut errors)).count();
    let holds = results.iter().filter(|r| r.verdict == Verdict::Holds).count();
    if errors.is_empty() {
        Ok(format!("{} evaluations of {}: {holds} hold, {} skipped, 0 fail", ok, ids.join(", "), ok - holds))
    } else {
        Err(errors.join("; "))
    }
}

fn main_regime() -> Result<String, String> {
    // Powers of two up to 2^63 fit an i128, and every quotient is 2^k.
    for n in 1..=64u32 {
        let a: Vec<i128> = (0..n).map(|i| 1i128 << i).collect();
        let diffs: BTreeSet<i128> = a.iter().flat_map(|x| a.iter().map(move |y| x - y)).collect();
        let quots: BTreeSet<(i128, i128)> = a
            .iter()
            .flat_map(|x| {
                a.iter().map(move |y| {
                    let g = x.gcd(y);
                    (x / g, y / g)
                })
            })
            .collect();
        let n = n as usize;
        if diffs.len() != n * n - n + 1 || quots.len() != 2 * n - 1 {
            return Err(format!("n = {n}: |A-A| = {}, |A/A| = {}", diffs.len(), quots.len()));
        }
    }
    let spec = lookup("main_5_3").unwrap();
    let family = FamilySpec::parse("gp:1:2", SEED).unwrap();
    let mut prev: Option<Rational> = None;
    let mut shown = Vec::new();
    for n in [8usize, 16, 32, 64, 128] {
        let r = evaluate_claim(spec, &Input::build(&family, n).unwrap(), &EvalOptions::default());
        let ratio = r.ratio.ok_or_else(|| format!("n = {n}: no ratio ({:?})", r.reason))?;
        if !ratio.is_point() {
            return Err(format!("n = {n}: ratio is not exact"));
        }
        let ratio = ratio.lo().clone();
        if n <= 64 {
            let m = BigInt::from(n);
            let expect =
                Rational::from((&m * &m - &m + 1u8).pow(6) * (2u8 * &m - 1u8).pow(13)) / Rational::from(m.pow(23));
            if ratio != expect {
                return Err(format!("n = {n}: ratio {ratio} differs from the closed form {expect}"));
            }
        }
        if ratio <= Rational::one() || prev.as_ref().is_some_and(|p| ratio <= *p) {
            return Err(format!("n = {n}: ratio {ratio} is not > 1 and increasing"));
        }
        shown.push(format!("{n}: {:.3e}", ratio.to_f64()));
        prev = Some(ratio);
    }
    Ok(format!("|A-A| = n²-n+1 and |A/A| = 2n-1 for n ≤ 64; ratios {}", shown.join(", ")))
}

fn constant_bounded() -> Result<String, String> {
    let results = run_suite(&family_jobs(&CONSTANT_CLAIMS, &CONSTANT_FAMILIES), &EvalOptions::default());
    let trends = trends_by_series(&results).map_err(|e| e.to_string())?;
    let mut recorded = 0;
    let mut flagged = 0;
    let mut errors = Vec::new();
    for t in &trends {
        let valid = t.skipped < t.points.len();
        if valid && t.max_constant.is_none() {
            errors.push(format!("{} on {}: no constant recorded", t.claim, t.family));
        }
        recorded += t.max_constant.is_some() as usize;
        if !FLAGGED_FAMILIES.contains(&t.family.as_str()) || !valid {
            continue;
        }
        flagged += 1;
        if t.bounded != Some(true) {
            let cs: Vec<String> = t
                .points
                .iter()
                .map(|p| format!("{}:{}", p.n, p.constant.as_ref().map_or(0.0, |c| c.to_f64())))
                .collect();
            errors.push(format!("{} on {}: bounded = {:?} ({})", t.claim, t.family, t.bounded, cs.join(" ")));
        }
    }
    if errors.is_empty() {
        Ok(format!("{recorded} series with recorded constants, {flagged} GP/subgroup series bounded"))
    } else {
        Err(errors.join("; "))
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn performance() -> Result<String, String> {
    let rset = |family: &str, n: usize| match FamilySpec::parse(family, SEED).unwrap().generate(n).unwrap() {
        GenSet::Rational(s) => s,
        GenSet::Fp(_) => unreachable!(),
    };
    let big = rset("random", 4096);
    let (e, te) = timed(|| energy(&big, 2, Group::Multiplicative).unwrap().value);
    let mid = rset("random", 96);
    let (t, tt) = timed(|| collinear_triples_single(&mid).unwrap());
    let gp = rset("gp:1:2", 128);
    let (g, tg) = timed(|| gowers_norm(&gp, 4).unwrap().value);
    let detail = format!(
        "E×(|A|=4096) = {e} in {:.2} s, T(|A|=96) = {t} in {:.2} s, U⁴(GP-128) = {g} in {:.2} s",
        te.as_secs_f64(),
        tt.as_secs_f64(),
        tg.as_secs_f64()
    );
    if te < ENERGY_LIMIT && tt < TRIPLES_LIMIT && tg < GOWERS_LIMIT {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn full_suite(threads: usize) -> String {
    let ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
    let jobs = family_jobs(&ids, &FAMILIES);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    results_json_lines(&pool.install(|| run_suite(&jobs, &EvalOptions::default())))
}

fn determinism() -> Result<String, String> {
    let (first, second) = (full_suite(1), full_suite(4));
    let rows = first.lines().count();
    if first == second {
        Ok(format!("{rows} JSON lines, byte-identical across two runs (1 and 4 threads)"))
    } else {
        let line = first.lines().zip(second.lines()).position(|(x, y)| x != y);
        Err(format!("outputs differ (first differing line {line:?})"))
    }
}

fn main() -> ExitCode {
    let results = [
        criterion(1, "exact identities", Some(C1_LIMIT), exact_identities),
        criterion(2, "exact inequalities", Some(C2_LIMIT), exact_inequalities),
        criterion(3, "difference and quotient sets of geometric progressions", Some(C3_LIMIT), main_regime),
        criterion(4, "constant-bounded claims", Some(C4_LIMIT), constant_bounded),
        criterion(5, "performance", None, performance),
        criterion(6, "determinism", None, determinism),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
