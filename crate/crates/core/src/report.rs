//! Batch computations behind `hetstream reproduce` and `hetstream verify`.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::families::Family;
use crate::model::{DiffusionModel, Preset, StreamConfig};
use crate::oracle::exhaustive_min_delay;
use crate::single_chunk::greedy::{greedy_copies, many_to_one};
use crate::single_chunk::{delay_curve, evaluate_bounds};
use crate::stream::find_group_period;

/// Peers and initial copies of the reference scenarios.
pub const TABLE_PEERS: usize = 10_000;
pub const TABLE_N0: usize = 5;

/// Published single-chunk delays `(D_m, D_1, D_4)` per preset.
pub const PUBLISHED_DELAYS: [(Preset, [f64; 3]); 3] = [
    (Preset::H0, [7.70, 11.0, 20.0]),
    (Preset::H1, [3.72, 5.40, 9.00]),
    (Preset::H2, [2.70, 4.11, 6.86]),
];

/// Published stream delays at `s = 0.9` and `s = 0.5`, `None` where not given.
pub const PUBLISHED_STREAM: [(Preset, [[Option<f64>; 2]; 3]); 3] = [
    (
        Preset::H0,
        [[None, None], [Some(11.0), Some(11.0)], [Some(20.0), Some(20.0)]],
    ),
    (
        Preset::H1,
        [
            [Some(8.16), Some(9.72)],
            [Some(16.51), Some(11.40)],
            [Some(53.44), Some(19.0)],
        ],
    ),
    (
        Preset::H2,
        [
            [Some(6.04), Some(6.96)],
            [Some(14.88), Some(10.11)],
            [Some(51.30), Some(16.86)],
        ],
    ),
];

pub const TABLE_MODELS: [DiffusionModel; 3] = [
    DiffusionModel::ManyToOne,
    DiffusionModel::OneToOne,
    DiffusionModel::OneToSome(4),
];

pub const TABLE_RATES: [f64; 2] = [0.9, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Exact,
    Absolute(f64),
    Relative(f64),
}

impl Tolerance {
    pub fn accepts(&self, computed: f64, expected: f64) -> bool {
        match *self {
            Tolerance::Exact => computed == expected,
            Tolerance::Absolute(a) => (computed - expected).abs() <= a,
            Tolerance::Relative(r) => (computed - expected).abs() <= r * expected.abs(),
        }
    }

    fn label(&self) -> String {
        match *self {
            Tolerance::Exact => "exact".into(),
            Tolerance::Absolute(a) => format!("+-{a}"),
            Tolerance::Relative(r) => format!("+-{}%", r * 100.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayRow {
    pub profile: &'static str,
    pub model: DiffusionModel,
    pub computed: f64,
    pub published: f64,
    pub relative_error: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamRow {
    pub profile: &'static str,
    pub model: DiffusionModel,
    pub rate: f64,
    pub period: Option<usize>,
    /// `2E/s`.
    pub bound: Option<f64>,
    /// `D(N) + E/s`.
    pub alternative: Option<f64>,
    pub published: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproduction {
    pub delays: Vec<DelayRow>,
    pub stream: Vec<StreamRow>,
}

impl Reproduction {
    pub fn all_delays_pass(&self) -> bool {
        self.delays.iter().all(|r| r.pass)
    }
}

fn tolerance_for(preset: Preset, model: DiffusionModel) -> Tolerance {
    match (preset, model) {
        // Published with two decimals.
        (Preset::H0, DiffusionModel::ManyToOne) => Tolerance::Absolute(0.005),
        (Preset::H0, _) => Tolerance::Exact,
        _ => Tolerance::Relative(0.02),
    }
}

/// Single-chunk delays of the three presets at `N = 10^4`, `n0 = 5`.
pub fn reproduce_delays() -> Result<Vec<DelayRow>> {
    let mut rows = Vec::new();
    for (preset, published) in PUBLISHED_DELAYS {
        let profile = preset.profile(TABLE_PEERS)?;
        for (model, expected) in TABLE_MODELS.into_iter().zip(published) {
            let computed = delay_curve(&profile, model, TABLE_N0, TABLE_PEERS)?.last();
            let tolerance = tolerance_for(preset, model);
            rows.push(DelayRow {
                profile: preset.name(),
                model,
                computed,
                published: expected,
                relative_error: (computed - expected) / expected,
                tolerance,
                pass: tolerance.accepts(computed, expected),
            });
        }
    }
    Ok(rows)
}

/// Smallest group period per preset, model and rate, with both candidate bounds.
pub fn reproduce_stream() -> Result<Vec<StreamRow>> {
    let mut rows = Vec::new();
    for (preset, published) in PUBLISHED_STREAM {
        let profile = preset.profile(TABLE_PEERS)?;
        for (model, per_rate) in TABLE_MODELS.into_iter().zip(published) {
            for (rate, expected) in TABLE_RATES.into_iter().zip(per_rate) {
                let stream = StreamConfig::new(rate, TABLE_N0)?;
                let plan = find_group_period(&profile, &stream, model)?;
                rows.push(StreamRow {
                    profile: preset.name(),
                    model,
                    rate,
                    period: plan.as_ref().map(|p| p.period),
                    bound: plan.as_ref().map(|p| p.delay_bound),
                    alternative: plan.as_ref().map(|p| p.diagnostics.alternative_bound),
                    published: expected,
                });
            }
        }
    }
    Ok(rows)
}

pub fn reproduce() -> Result<Reproduction> {
    Ok(Reproduction {
        delays: reproduce_delays()?,
        stream: reproduce_stream()?,
    })
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.digits$}"))
}

impl Reproduction {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Single-chunk delay D(N), N = {TABLE_PEERS}, n0 = {TABLE_N0}"
        );
        let _ = writeln!(
            out,
            "{:<8}{:<9}{:>10}{:>10}{:>10}{:>11}  status",
            "profile", "model", "computed", "published", "rel.err", "tolerance"
        );
        for r in &self.delays {
            let _ = writeln!(
                out,
                "{:<8}{:<9}{:>10.4}{:>10.2}{:>9.2}%{:>11}  {}",
                r.profile,
                r.model.to_string(),
                r.computed,
                r.published,
                r.relative_error * 100.0,
                r.tolerance.label(),
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Stream delay bounds (group period E; 2E/s is proven, D(N)+E/s shown for comparison)"
        );
        let _ = writeln!(
            out,
            "{:<8}{:<9}{:>5}{:>6}{:>10}{:>10}{:>10}",
            "profile", "model", "s", "E", "2E/s", "D+E/s", "published"
        );
        for r in &self.stream {
            let _ = writeln!(
                out,
                "{:<8}{:<9}{:>5}{:>6}{:>10}{:>10}{:>10}",
                r.profile,
                r.model.to_string(),
                r.rate,
                r.period.map_or_else(|| "none".into(), |e| e.to_string()),
                opt(r.bound, 2),
                opt(r.alternative, 2),
                opt(r.published, 2)
            );
        }
        out
    }
}

/// A tiny single-chunk instance for the exhaustive oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCase {
    pub uploads: Vec<Rational64>,
    pub n0: usize,
    pub n: usize,
    pub c: usize,
}

/// Exact rational written as an integer or a `"p/q"` string.
#[derive(Deserialize)]
#[serde(untagged)]
enum RationalField {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
struct CaseFile {
    uploads: Vec<RationalField>,
    n0: usize,
    n: usize,
    #[serde(default = "one")]
    c: usize,
}

fn one() -> usize {
    1
}

impl OracleCase {
    /// Parses a JSON array of `{"uploads": [...], "n0", "n", "c"}` objects.
    /// Uploads may be given in any order.
    pub fn parse_list(text: &str) -> Result<Vec<OracleCase>> {
        let raw: Vec<CaseFile> =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("instances: {e}")))?;
        raw.into_iter()
            .map(|c| {
                let mut uploads = c
                    .uploads
                    .into_iter()
                    .map(|u| match u {
                        RationalField::Int(i) => Ok(Rational64::from_integer(i)),
                        RationalField::Text(s) => Rational64::from_str(s.trim())
                            .map_err(|_| Error::Parse(format!("not an exact rational: {s:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                uploads.sort_by(|a, b| b.cmp(a));
                Ok(OracleCase {
                    uploads,
                    n0: c.n0,
                    n: c.n,
                    c: c.c,
                })
            })
            .collect()
    }

    fn model(&self) -> Result<DiffusionModel> {
        DiffusionModel::one_to_some(self.c).map(DiffusionModel::normalized)
    }

    fn describe(&self) -> String {
        let u: Vec<String> = self.uploads.iter().map(|u| u.to_string()).collect();
        format!("({}) n0={} n={} c={}", u.join(","), self.n0, self.n, self.c)
    }
}

/// Draws a case with `N <= max_peers`, `n <= max_peers` and `c <= 3`.
pub fn random_case<R: Rng + ?Sized>(rng: &mut R, max_peers: usize) -> OracleCase {
    const DENOMS: [i64; 5] = [1, 2, 3, 4, 6];
    let peers = rng.random_range(1..=max_peers);
    let mut uploads: Vec<Rational64> = (0..peers)
        .map(|i| {
            let low = if i == 0 { 1 } else { 0 };
            let d = DENOMS[rng.random_range(0..DENOMS.len())];
            Rational64::new(rng.random_range(low..=12), d)
        })
        .collect();
    uploads.sort_by(|a, b| b.cmp(a));
    let n0 = rng.random_range(1..=peers.min(2));
    let n = rng.random_range(n0..=max_peers);
    let c = rng.random_range(1..=3);
    OracleCase { uploads, n0, n, c }
}

/// Hand-picked cases followed by `random` seeded ones.
pub fn oracle_battery(seed: u64, random: usize) -> Vec<OracleCase> {
    let r = Rational64::new;
    let i = Rational64::from_integer;
    let mut cases = vec![
        OracleCase { uploads: vec![i(2), i(1), i(1)], n0: 1, n: 3, c: 1 },
        OracleCase { uploads: vec![r(8, 5), r(4, 5), r(4, 5), r(4, 5)], n0: 2, n: 4, c: 1 },
        OracleCase { uploads: vec![i(1); 4], n0: 2, n: 4, c: 1 },
        OracleCase { uploads: vec![i(1); 5], n0: 1, n: 5, c: 2 },
        OracleCase { uploads: vec![i(3), i(1), i(0), i(0)], n0: 1, n: 4, c: 3 },
        OracleCase { uploads: vec![r(3, 4), r(1, 4)], n0: 1, n: 5, c: 1 },
        OracleCase { uploads: vec![i(4), i(2), i(1), r(1, 2), r(1, 4)], n0: 1, n: 5, c: 2 },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cases.extend((0..random).map(|_| random_case(&mut rng, 5)));
    cases
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub case: OracleCase,
    pub exhaustive: Rational64,
    pub greedy: Rational64,
    pub many_to_one: Rational64,
}

impl OracleOutcome {
    /// Greedy matches the exhaustive minimum and the pooled delay lies below it.
    pub fn pass(&self) -> bool {
        self.greedy == self.exhaustive && self.many_to_one <= self.exhaustive
    }
}

pub fn run_oracle(case: &OracleCase) -> Result<OracleOutcome> {
    let model = case.model()?;
    let exhaustive = exhaustive_min_delay(&case.uploads, case.n0, case.n, model)?;
    let events = greedy_copies(&case.uploads, case.n0, case.c, case.n);
    let greedy = events
        .get(case.n - 1)
        .map(|e| e.time)
        .ok_or_else(|| domain("greedy diffusion stalled"))?;
    let many = many_to_one(&case.uploads, case.n0, case.n)
        .ok_or_else(|| domain("no upload capacity"))?[case.n - 1];
    Ok(OracleOutcome {
        case: case.clone(),
        exhaustive,
        greedy,
        many_to_one: many,
    })
}

/// Inequalities that failed on one random profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileFinding {
    pub index: usize,
    pub family: &'static str,
    pub peers: usize,
    pub n0: usize,
    pub c: usize,
    pub failures: Vec<(usize, &'static str)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSweep {
    pub profiles: usize,
    pub proven: Vec<ProfileFinding>,
    pub conjectures: Vec<ProfileFinding>,
}

/// Evaluates every bound on `count` seeded profiles cycling through all families.
pub fn bound_sweep(seed: u64, count: usize) -> Result<BoundSweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut proven = Vec::new();
    let mut conjectures = Vec::new();
    for index in 0..count {
        let family = Family::ALL[index % Family::ALL.len()];
        let peers = rng.random_range(2..=300);
        let profile = family.sample(&mut rng, peers)?;
        let n0 = rng.random_range(1..=peers.min(5));
        let c = rng.random_range(2..=4);
        let report = evaluate_bounds(&profile, n0, c, peers)?;
        let finding = |failures| ProfileFinding {
            index,
            family: family.name(),
            peers,
            n0,
            c,
            failures,
        };
        let p = report.proven_violations();
        if !p.is_empty() {
            proven.push(finding(p));
        }
        let q = report.conjecture_violations();
        if !q.is_empty() {
            conjectures.push(finding(q));
        }
    }
    Ok(BoundSweep {
        profiles: count,
        proven,
        conjectures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub oracle: Vec<OracleOutcome>,
    pub bounds: BoundSweep,
}

impl VerifyReport {
    /// Oracle agreement and every proven bound; conjectures never fail a run.
    pub fn passed(&self) -> bool {
        self.oracle.iter().all(OracleOutcome::pass) && self.bounds.proven.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "oracle cases: {}", self.oracle.len());
        for o in &self.oracle {
            let _ = writeln!(
                out,
                "  {:<48} exhaustive={:<8} greedy={:<8} many_to_one={:<10} {}",
                o.case.describe(),
                o.exhaustive.to_string(),
                o.greedy.to_string(),
                o.many_to_one.to_string(),
                if o.pass() { "ok" } else { "MISMATCH" }
            );
        }
        let mismatches = self.oracle.iter().filter(|o| !o.pass()).count();
        let _ = writeln!(out, "oracle mismatches: {mismatches}");
        let b = &self.bounds;
        let _ = writeln!(out, "bound profiles: {}", b.profiles);
        let _ = writeln!(out, "proven-bound failures: {}", b.proven.len());
        for f in &b.proven {
            let _ = writeln!(out, "  {}", describe_finding(f));
        }
        let _ = writeln!(out, "conjecture findings: {}", b.conjectures.len());
        for f in &b.conjectures {
            let _ = writeln!(out, "  {}", describe_finding(f));
        }
        let _ = writeln!(out, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

fn describe_finding(f: &ProfileFinding) -> String {
    let shown: Vec<String> = f
        .failures
        .iter()
        .take(5)
        .map(|(n, name)| format!("{name}@n={n}"))
        .collect();
    format!(
        "#{} {} N={} n0={} c={}: {}{}",
        f.index,
        f.family,
        f.peers,
        f.n0,
        f.c,
        shown.join(" "),
        if f.failures.len() > 5 {
            format!(" (+{} more)", f.failures.len() - 5)
        } else {
            String::new()
        }
    )
}

/// Default oracle battery size and profile count of `hetstream verify`.
pub const DEFAULT_RANDOM_CASES: usize = 60;
pub const DEFAULT_PROFILES: usize = 1000;

pub fn verify(seed: u64, cases: Option<Vec<OracleCase>>, profiles: usize) -> Result<VerifyReport> {
    let cases = cases.unwrap_or_else(|| oracle_battery(seed, DEFAULT_RANDOM_CASES));
    let oracle = cases.iter().map(run_oracle).collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        seed,
        oracle,
        bounds: bound_sweep(seed, profiles)?,
    })
}
