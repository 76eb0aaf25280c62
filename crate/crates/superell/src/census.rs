//! Height-box census of a family of superelliptic equations: enumerate,
//! certify local solubility at the primes that can refuse, evaluate the two
//! sieve conditions, search for small primitive solutions, and persist one
//! JSONL record per form with a recomputable summary.

use crate::densities::{mu, mu_prime};
use crate::forms::{enumerate_box, BinaryForm};
use crate::kernel::perfect_sqrt;
use crate::localsolve::{
    condition_report, squarefree_part_primes, vanishes_on_projective_line, zp_soluble,
};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Slimmed per-prime solubility entry carried by a census record.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LocalEntry {
    pub p: u64,
    pub soluble: bool,
    pub depth: u32,
}

/// The two sieve conditions at one prime of the squarefree part.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CondEntry {
    pub p: u64,
    pub a: bool,
    pub b: bool,
}

/// Three-state classification; a bounded solution search never claims
/// global insolubility.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    InsolubleLocal,
    SolubleWitnessed,
    LocallySolubleUnknown,
}

/// One enumerated form with its certificates. Field order is the wire
/// format; one record per JSONL line.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CensusRecord {
    pub form: String,
    pub disc: String,
    pub separable: bool,
    pub local: Vec<LocalEntry>,
    pub cond: Vec<CondEntry>,
    pub solution: Option<[i64; 3]>,
    pub class: Classification,
}

/// Aggregate of one census run; always recomputed from records.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CensusSummary {
    pub n: usize,
    pub f0: String,
    pub x: String,
    pub total: u64,
    pub insoluble_local: u64,
    pub soluble_witnessed: u64,
    pub unknown: u64,
    pub mu: String,
    pub mu_prime: String,
    pub one_minus_mu: String,
    pub mu_prime_minus_mu: String,
}

impl CensusSummary {
    pub const CSV_HEADER: &'static str =
        "n,f0,X,total,insoluble_local,soluble_witnessed,unknown,mu,mu_prime";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.f0,
            self.x,
            self.total,
            self.insoluble_local,
            self.soluble_witnessed,
            self.unknown,
            self.mu,
            self.mu_prime
        )
    }
}

/// Run parameters. The census tests solubility at every prime of the
/// squarefree part of `f0` (the only primes that can refuse) plus all
/// primes up to `prime_budget`.
#[derive(Clone, Debug)]
pub struct CensusConfig {
    pub n: usize,
    pub f0: BigInt,
    pub height_bound: BigInt,
    pub search_bound: i64,
    pub prime_budget: u64,
    pub shards: usize,
    pub seed: u64,
}

impl CensusConfig {
    pub fn new(n: usize, f0: BigInt, height_bound: BigInt) -> Self {
        CensusConfig {
            n,
            f0,
            height_bound,
            search_bound: 8,
            prime_budget: 0,
            shards: 1,
            seed: 0,
        }
    }

    fn prime_set(&self) -> Vec<u64> {
        let mut primes = squarefree_part_primes(&self.f0);
        let mut p = 2u64;
        while p <= self.prime_budget {
            if crate::kernel::is_small_prime(&BigInt::from(p)) && !primes.contains(&p) {
                primes.push(p);
            }
            p += 1;
        }
        primes.sort_unstable();
        primes
    }
}

/// Builds the record of a single form.
pub fn classify_form(form: &BinaryForm, config: &CensusConfig) -> Result<CensusRecord> {
    let disc = form.disc();
    let separable = !disc.is_zero();
    let mut local = Vec::new();
    let mut cond = Vec::new();
    let mut insoluble = false;
    if separable {
        for p in config.prime_set() {
            let rep = zp_soluble(form, p)?;
            if !rep.soluble {
                insoluble = true;
            }
            local.push(LocalEntry {
                p,
                soluble: rep.soluble,
                depth: rep.depth_used,
            });
        }
        for p in squarefree_part_primes(&config.f0) {
            let c = condition_report(form, p)?;
            cond.push(CondEntry {
                p,
                a: c.cond_a,
                b: c.cond_b,
            });
        }
    }
    let solution = search_solution(form, config.search_bound)?;
    if insoluble && solution.is_some() {
        return Err(Error::Internal(format!(
            "classification conflict: local refusal with a global solution on {}",
            form.encode()
        )));
    }
    let class = if insoluble {
        Classification::InsolubleLocal
    } else if solution.is_some() {
        Classification::SolubleWitnessed
    } else {
        Classification::LocallySolubleUnknown
    };
    Ok(CensusRecord {
        form: form.encode(),
        disc: disc.to_string(),
        separable,
        local,
        cond,
        solution,
        class,
    })
}

/// First primitive solution with `max(|x₀|, |z₀|) ≤ bound`, scanning radii
/// outward and lexicographically inside a radius; `c ≥ 0`.
pub fn search_solution(form: &BinaryForm, bound: i64) -> Result<Option<[i64; 3]>> {
    for r in 0..=bound {
        for x0 in -r..=r {
            for z0 in -r..=r {
                if x0.abs().max(z0.abs()) != r {
                    continue;
                }
                if BigInt::from(x0).gcd(&BigInt::from(z0)) != BigInt::one() {
                    continue;
                }
                let v = form.eval(&BigInt::from(x0), &BigInt::from(z0));
                if v.is_negative() {
                    continue;
                }
                if let Some(c) = perfect_sqrt(&v) {
                    let c = c.to_i64().ok_or_else(|| {
                        Error::Internal("solution exceeds the record range".into())
                    })?;
                    return Ok(Some([x0, c, z0]));
                }
            }
        }
    }
    Ok(None)
}

/// Full in-memory run: enumerates the height box in canonical order,
/// classifying shards in parallel workers and merging deterministically.
pub fn run_census(config: &CensusConfig) -> Result<(Vec<CensusRecord>, CensusSummary)> {
    let records = run_records(config, 0)?;
    let summary = summarize(config, &records)?;
    Ok((records, summary))
}

fn worker_count(shards: usize) -> usize {
    let env = std::env::var("SUPERELL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0);
    let hw = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1);
    env.unwrap_or(hw).min(shards).max(1)
}

/// Records from enumeration index `skip` onward, in canonical order.
fn run_records(config: &CensusConfig, skip: usize) -> Result<Vec<CensusRecord>> {
    let shards = config.shards.max(1);
    let workers = worker_count(shards);
    let mut per_shard: Vec<Result<Vec<(usize, CensusRecord)>>> = Vec::new();
    if workers <= 1 || shards == 1 {
        for s in 0..shards {
            per_shard.push(shard_records(config, s, shards, skip));
        }
    } else {
        let results: Vec<Result<Vec<(usize, CensusRecord)>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..shards)
                .map(|s| scope.spawn(move || shard_records(config, s, shards, skip)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        per_shard = results;
    }
    let mut indexed = Vec::new();
    for shard in per_shard {
        indexed.extend(shard?);
    }
    indexed.sort_by_key(|(idx, _)| *idx);
    Ok(indexed.into_iter().map(|(_, r)| r).collect())
}

fn shard_records(
    config: &CensusConfig,
    shard: usize,
    shards: usize,
    skip: usize,
) -> Result<Vec<(usize, CensusRecord)>> {
    let mut out = Vec::new();
    let iter = enumerate_box(config.n, &config.f0, &config.height_bound)?;
    for (idx, form) in iter.enumerate() {
        if idx % shards != shard || idx < skip {
            continue;
        }
        out.push((idx, classify_form(&form, config)?));
    }
    Ok(out)
}

/// Summary recomputed from records only.
pub fn summarize(config: &CensusConfig, records: &[CensusRecord]) -> Result<CensusSummary> {
    let mut insoluble = 0;
    let mut witnessed = 0;
    let mut unknown = 0;
    for r in records {
        match r.class {
            Classification::InsolubleLocal => insoluble += 1,
            Classification::SolubleWitnessed => witnessed += 1,
            Classification::LocallySolubleUnknown => unknown += 1,
        }
    }
    let m = mu(&config.f0, config.n)?;
    let mp = mu_prime(&config.f0)?;
    Ok(CensusSummary {
        n: config.n,
        f0: config.f0.to_string(),
        x: config.height_bound.to_string(),
        total: records.len() as u64,
        insoluble_local: insoluble,
        soluble_witnessed: witnessed,
        unknown,
        mu: m.to_string(),
        mu_prime: mp.to_string(),
        one_minus_mu: (BigRational::one() - &m).to_string(),
        mu_prime_minus_mu: (&mp - &m).to_string(),
    })
}

/// Streamed run with checkpoint/resume semantics: the JSONL file is the
/// checkpoint. On resume, existing records are re-verified (witnessed
/// solutions re-checked exactly) and enumeration continues after them; the
/// summary is recomputed from the complete file.
pub fn run_census_to_path(
    config: &CensusConfig,
    path: &std::path::Path,
    resume: bool,
) -> Result<CensusSummary> {
    let mut done = 0usize;
    if resume && path.exists() {
        let existing = read_records(path)?;
        verify_records(config, &existing)?;
        done = existing.len();
    } else if path.exists() {
        return Err(Error::Precondition(format!(
            "{} exists; pass resume to continue it",
            path.display()
        )));
    }
    let fresh = run_records(config, done)?;
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    for r in &fresh {
        let line = serde_json::to_string(r).map_err(|e| Error::Internal(e.to_string()))?;
        writeln!(file, "{line}")?;
    }
    file.flush()?;
    let all = read_records(path)?;
    summarize(config, &all)
}

/// Parses a JSONL census file.
pub fn read_records(path: &std::path::Path) -> Result<Vec<CensusRecord>> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CensusRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Re-verifies loaded records: witnessed solutions must satisfy the
/// equation exactly with a primitive pair, and no record may combine a
/// local refusal with a solution.
pub fn verify_records(config: &CensusConfig, records: &[CensusRecord]) -> Result<()> {
    for r in records {
        let form = BinaryForm::decode(&r.form)?;
        if form.n() != config.n || form.leading() != &config.f0 {
            return Err(Error::Parse(format!(
                "record {} does not belong to this family",
                r.form
            )));
        }
        let has_refusal = r.local.iter().any(|l| !l.soluble);
        match (&r.class, &r.solution) {
            (Classification::SolubleWitnessed, Some([x0, c, z0])) => {
                let x0 = BigInt::from(*x0);
                let c = BigInt::from(*c);
                let z0 = BigInt::from(*z0);
                if x0.gcd(&z0) != BigInt::one() || &c * &c != form.eval(&x0, &z0) {
                    return Err(Error::Parse(format!(
                        "witnessed solution fails re-verification on {}",
                        r.form
                    )));
                }
                if has_refusal {
                    return Err(Error::Parse(format!(
                        "record {} is both refused and witnessed",
                        r.form
                    )));
                }
            }
            (Classification::SolubleWitnessed, None) => {
                return Err(Error::Parse(format!("{}: witnessed without witness", r.form)))
            }
            (Classification::InsolubleLocal, _) => {
                if !has_refusal {
                    return Err(Error::Parse(format!(
                        "{}: classified insoluble without a refusing prime",
                        r.form
                    )));
                }
                if r.solution.is_some() {
                    return Err(Error::Parse(format!(
                        "record {} is both refused and witnessed",
                        r.form
                    )));
                }
            }
            (Classification::LocallySolubleUnknown, Some(_)) => {
                return Err(Error::Parse(format!("{}: unknown with a solution", r.form)))
            }
            (Classification::LocallySolubleUnknown, None) => {}
        }
    }
    Ok(())
}

/// Exact density of coefficient classes `(f1, …, f_{2n+1})` mod `p` (with
/// `p | f0`) whose reduction vanishes at every point of the projective
/// line. For `p < 2n+1` this equals `p^(−p)`; for `p ≥ 2n+1` the value `0`
/// is returned directly following the convention that only a vanishing
/// **nonzero** reduction can occur there (the all-zero class alone is the
/// residual measure-`p^(−(2n+1))` event, reported as zero by fiat).
pub fn vanish_density_check(p: u64, n: usize) -> Result<BigRational> {
    if !crate::kernel::is_small_prime(&BigInt::from(p)) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if p as usize >= 2 * n + 1 {
        return Ok(BigRational::zero());
    }
    let slots = 2 * n + 1;
    let total = (p as u64).checked_pow(slots as u32).ok_or_else(|| {
        Error::Budget("vanishing-density enumeration too large".into())
    })?;
    if total > 20_000_000 {
        return Err(Error::Budget(
            "vanishing-density enumeration too large".into(),
        ));
    }
    let mut vanishing = 0u64;
    let mut coeffs = vec![0u64; slots];
    loop {
        // form with f0 ≡ 0: coefficients (0, f1..f_{2n+1})
        let mut full = vec![BigInt::zero()];
        full.extend(coeffs.iter().map(|&c| BigInt::from(c)));
        let form = BinaryForm::new(n, full)?;
        if vanishes_on_projective_line(&form, p) {
            vanishing += 1;
        }
        // odometer
        let mut idx = 0;
        loop {
            if idx == slots {
                break;
            }
            coeffs[idx] += 1;
            if coeffs[idx] == p {
                coeffs[idx] = 0;
                idx += 1;
            } else {
                break;
            }
        }
        if idx == slots {
            break;
        }
    }
    Ok(BigRational::new(BigInt::from(vanishing), BigInt::from(total)))
}
