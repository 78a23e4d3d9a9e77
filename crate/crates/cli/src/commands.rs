//! Command implementations. Each writes one CSV table to `out`.

use std::io::Write;

use gauss_means::sample::{grid, random_points};
use gauss_means::{
    check_internality, check_strict, check_symmetry, classify_strictness, c_contraction_index,
    complementary_value, diag_contractive_at, diagonal_contractivity_on, extremal_invariant_estimates,
    gauss_limit, in_diagonal_basin, invariance_residual, orbit, prop1_applies, prop2_applies,
    weak_contractivity_index, weak_contractivity_on, BasinVerdict, Claim, ComputedInvariantMean,
    ContractivityVerdict, Interval, LimitResult, LimitStatus, Mean, MeanError, MeanPair, MeanSpec,
    MeanTypeMapping, OneSided, ProbePlan, Region, SampleVerdict, StrictnessVerdict, WeakIndex,
};
use rayon::prelude::*;

use crate::{
    resolve_mean, Analysis, CliError, Command, ContractArgs, ExtremalArgs, LimitArgs, PairArgs,
    SampleArgs, EXIT_NUMERICAL, EXIT_OK,
};

type Mapping = MeanTypeMapping<MeanSpec, MeanSpec>;
type Row = Vec<String>;

/// Exit code plus lines for standard error.
pub(crate) struct Outcome {
    pub code: i32,
    pub diagnostics: Vec<String>,
}

impl Outcome {
    fn ok() -> Self {
        Outcome {
            code: EXIT_OK,
            diagnostics: Vec::new(),
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_table(out: &mut dyn Write, header: &[&str], rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn mapping(pair: &PairArgs) -> Result<Mapping, CliError> {
    Ok(MeanTypeMapping::new(resolve_mean(&pair.m)?, resolve_mean(&pair.n)?)?)
}

fn default_region(domain: &Interval) -> Region {
    let (a, b) = domain.sampling_box();
    Region::square(a, b)
}

fn region_inside(region: &Region, domain: &Interval) -> bool {
    [region.x0, region.x1, region.y0, region.y1]
        .iter()
        .all(|&v| domain.contains(v))
}

/// Sample points from `--seed`/`--res`, or `None` when neither was given.
fn sample_points(args: &SampleArgs, domain: &Interval) -> Result<Option<Vec<(f64, f64)>>, CliError> {
    let region = args.region.unwrap_or_else(|| default_region(domain));
    let points = match (args.seed, args.res) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("--seed and --res are mutually exclusive".into()));
        }
        (Some(seed), None) => random_points(seed, args.samples, region),
        (None, Some((nx, ny))) => grid(region, nx, ny),
        (None, None) => return Ok(None),
    };
    if points.is_empty() {
        return Err(MeanError::EmptySample.into());
    }
    Ok(Some(points))
}

pub(crate) fn execute(command: Command, out: &mut dyn Write) -> Result<Outcome, CliError> {
    match command {
        Command::Iterate { pair, point, count } => {
            let map = mapping(&pair)?;
            let o = orbit(&map, point.x, point.y, count)?;
            let rows: Vec<Row> = o
                .points
                .iter()
                .enumerate()
                .map(|(k, &(u, v))| vec![(k + 1).to_string(), num(u), num(v), num((u - v).abs())])
                .collect();
            write_table(out, &["n", "Mn", "Nn", "gap"], &rows)?;
            Ok(Outcome::ok())
        }
        Command::Limit { pair, point, limit } => {
            let map = mapping(&pair)?;
            let r = gauss_limit(&map, point.x, point.y, limit.tol, limit.max_iter)?;
            write_table(out, &LIMIT_HEADER, &[limit_columns(&r)])?;
            if r.converged() {
                Ok(Outcome::ok())
            } else {
                Ok(Outcome {
                    code: EXIT_NUMERICAL,
                    diagnostics: vec![limit_diagnostic(&r)],
                })
            }
        }
        Command::Basin { pair, point, limit } => {
            let map = mapping(&pair)?;
            let mut row = vec![num(point.x), num(point.y)];
            row.extend(basin_columns(&map, point.x, point.y, &limit)?);
            write_table(out, &BASIN_HEADER, &[row])?;
            Ok(Outcome::ok())
        }
        Command::Contract {
            pair,
            point,
            sample,
            contract,
        } => {
            let map = mapping(&pair)?;
            let points = match (point.x.zip(point.y), sample_points(&sample, &map.domain())?) {
                (Some(p), None) => vec![p],
                (None, Some(points)) => points,
                (Some(_), Some(_)) => {
                    return Err(CliError::Usage("give either -x/-y or --seed/--res, not both".into()));
                }
                (None, None) => {
                    return Err(CliError::Usage("give -x and -y, --seed, or --res".into()));
                }
            };
            let rows = points
                .iter()
                .map(|&(x, y)| {
                    let mut row = vec![num(x), num(y)];
                    row.extend(contract_columns(&map, x, y, &contract)?);
                    Ok(row)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            write_table(out, &CONTRACT_HEADER, &rows)?;
            Ok(Outcome::ok())
        }
        Command::Classify {
            m,
            n,
            seed,
            samples,
            region,
            nmax,
        } => classify(out, &m, n.as_deref(), seed, samples, region, nmax),
        Command::Residual {
            k,
            pair,
            sample,
            limit,
        } => {
            let map = mapping(&pair)?;
            let points = match sample_points(&sample, &map.domain())? {
                Some(points) => points,
                None => grid(
                    sample.region.unwrap_or_else(|| default_region(&map.domain())),
                    10,
                    10,
                ),
            };
            let r = if k == "gauss" {
                let km = ComputedInvariantMean::new(map.clone(), limit.tol, limit.max_iter)?;
                invariance_residual(&km, &map, &points)?
            } else {
                invariance_residual(&resolve_mean(&k)?, &map, &points)?
            };
            write_table(
                out,
                &["k", "max_residual", "x", "y", "points"],
                &[vec![k, num(r.max), num(r.at.0), num(r.at.1), r.points.to_string()]],
            )?;
            Ok(Outcome::ok())
        }
        Command::Complement { k, m, point, tol } => {
            let (km, mm) = (resolve_mean(&k)?, resolve_mean(&m)?);
            let (x, y) = (point.x, point.y);
            let t = complementary_value(&km, &mm, x, y, tol)?;
            let residual = (km.eval(mm.eval(x, y)?, t)? - km.eval(x, y)?).abs();
            write_table(
                out,
                &["x", "y", "t", "residual"],
                &[vec![num(x), num(y), num(t), num(residual)]],
            )?;
            Ok(Outcome::ok())
        }
        Command::Extremal {
            pair,
            point,
            extremal,
        } => {
            let map = mapping(&pair)?;
            let e = extremal_invariant_estimates(&map, point.x, point.y, extremal.n_max, extremal.tail)?;
            write_table(
                out,
                &["l_est", "u_est", "spread", "tail"],
                &[vec![num(e.l_est), num(e.u_est), num(e.spread()), e.tail_length.to_string()]],
            )?;
            Ok(Outcome::ok())
        }
        Command::Sweep {
            analysis,
            pair,
            region,
            res,
            limit,
            contract,
            extremal,
            steps,
        } => {
            let config = SweepConfig {
                analysis,
                mapping: mapping(&pair)?,
                region,
                nx: res.0,
                ny: res.1,
                limit,
                contract,
                extremal,
                steps,
            };
            config.run(out)?;
            Ok(Outcome::ok())
        }
    }
}

const LIMIT_HEADER: [&str; 4] = ["status", "value", "final_gap", "iterations"];
const BASIN_HEADER: [&str; 6] = ["x", "y", "verdict", "iterations", "gap", "period"];
const CONTRACT_HEADER: [&str; 7] = [
    "x",
    "y",
    "diag_contractive",
    "weak_index",
    "weak_certificate",
    "second_iterate_contractive",
    "c_index",
];

fn status_name(s: LimitStatus) -> &'static str {
    match s {
        LimitStatus::Converged => "converged",
        LimitStatus::NonConvergent { .. } => "non-convergent",
        LimitStatus::Stalled { .. } => "stalled",
        LimitStatus::BudgetExhausted => "iteration-budget-exhausted",
    }
}

fn limit_columns(r: &LimitResult) -> Row {
    vec![
        status_name(r.status).to_string(),
        r.value.map(num).unwrap_or_default(),
        num(r.final_gap),
        r.iterations_used.to_string(),
    ]
}

fn limit_diagnostic(r: &LimitResult) -> String {
    match r.status {
        LimitStatus::NonConvergent { period } => {
            format!("non-convergent, gap={} (period {period})", r.final_gap)
        }
        LimitStatus::Stalled { period } => format!(
            "stalled at rounding resolution, gap={} (period {period})",
            r.final_gap
        ),
        LimitStatus::BudgetExhausted => format!(
            "budget exhausted after {} iterations, gap={}",
            r.iterations_used, r.final_gap
        ),
        LimitStatus::Converged => String::new(),
    }
}

/// verdict,iterations,gap,period
fn basin_columns(map: &Mapping, x: f64, y: f64, limit: &LimitArgs) -> Result<Row, CliError> {
    Ok(match in_diagonal_basin(map, x, y, limit.tol, limit.max_iter)? {
        BasinVerdict::Inside { iterations } => {
            vec!["inside".into(), iterations.to_string(), String::new(), String::new()]
        }
        BasinVerdict::Outside { period, gap } => {
            vec!["outside".into(), String::new(), num(gap), period.to_string()]
        }
        BasinVerdict::Undecided { gap, iterations } => {
            vec!["undecided".into(), iterations.to_string(), num(gap), String::new()]
        }
    })
}

/// diag_contractive,weak_index,weak_certificate,second_iterate_contractive,c_index;
/// all empty on the diagonal, where none of them is defined.
fn contract_columns(map: &Mapping, x: f64, y: f64, args: &ContractArgs) -> Result<Row, CliError> {
    if x == y {
        return Ok(vec![String::new(); 5]);
    }
    let diag = diag_contractive_at(map, x, y)?;
    let weak = weak_contractivity_index(map, x, y, args.nmax)?;
    let certificate = match weak {
        WeakIndex::Found(_) => String::new(),
        WeakIndex::Never(c) => c.to_string(),
        WeakIndex::NotWithin(_) => "budget".into(),
    };
    let second = diag_contractive_at(&map.iterated(2), x, y)?;
    let c_index = match args.c {
        Some(c) => opt(c_contraction_index(map, x, y, c, args.nmax)?),
        None => String::new(),
    };
    Ok(vec![
        diag.to_string(),
        opt(weak.index()),
        certificate,
        second.to_string(),
        c_index,
    ])
}

fn sample_row(mean: &str, property: &str, v: SampleVerdict) -> Row {
    match v {
        SampleVerdict::Holds { checked } => vec![
            mean.into(),
            property.into(),
            "holds".into(),
            checked.to_string(),
            String::new(),
            String::new(),
            String::new(),
        ],
        SampleVerdict::Violated { x, y, value } => vec![
            mean.into(),
            property.into(),
            "violated".into(),
            String::new(),
            num(x),
            num(y),
            num(value),
        ],
    }
}

fn strictness_row(mean: &str, property: &str, v: StrictnessVerdict) -> Row {
    let blank = || String::new();
    match v {
        StrictnessVerdict::HoldsOnSample { checked } => vec![
            mean.into(),
            property.into(),
            "holds".into(),
            checked.to_string(),
            blank(),
            blank(),
            blank(),
        ],
        // witness (anchor, t) as the point (x, y)
        StrictnessVerdict::Violated { anchor, t, value } => vec![
            mean.into(),
            property.into(),
            "violated".into(),
            blank(),
            num(anchor),
            num(t),
            num(value),
        ],
        StrictnessVerdict::Untestable => vec![
            mean.into(),
            property.into(),
            "untestable".into(),
            blank(),
            blank(),
            blank(),
            blank(),
        ],
    }
}

fn claim_name(c: Claim) -> &'static str {
    match c {
        Claim::Holds => "holds",
        Claim::Fails => "violated",
        Claim::Untestable => "untestable",
    }
}

fn contractivity_row(mean: &str, property: &str, v: &ContractivityVerdict) -> Row {
    let (wx, wy) = v.witness.map_or((String::new(), String::new()), |(x, y)| (num(x), num(y)));
    vec![
        mean.into(),
        property.into(),
        if v.holds() { "holds" } else { "violated" }.into(),
        v.checked.to_string(),
        wx,
        wy,
        String::new(),
    ]
}

fn classify(
    out: &mut dyn Write,
    m: &str,
    n: Option<&str>,
    seed: u64,
    samples: usize,
    region: Option<Region>,
    nmax: usize,
) -> Result<Outcome, CliError> {
    let mut means = vec![resolve_mean(m)?];
    if let Some(n) = n {
        means.push(resolve_mean(n)?);
    }
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for spec in &means {
        let domain = spec.domain();
        let region = region.unwrap_or_else(|| default_region(&domain));
        if !region_inside(&region, &domain) {
            return Err(CliError::Usage(format!("region lies outside the domain {domain} of {spec}")));
        }
        let sample = random_points(seed, samples, region);
        if sample.is_empty() {
            return Err(MeanError::EmptySample.into());
        }
        let name = spec.to_string();
        rows.push(sample_row(&name, "internal", check_internality(spec, &sample)?));
        rows.push(sample_row(&name, "symmetric", check_symmetry(spec, &sample)?));
        rows.push(sample_row(&name, "strict", check_strict(spec, &sample)?));
        let report = classify_strictness(spec, &ProbePlan::default_for(&domain))?;
        for side in OneSided::ALL {
            rows.push(strictness_row(&name, side.name(), report.verdict(side)));
        }
        for (property, claim) in [
            ("left_strict", report.left_strict()),
            ("right_strict", report.right_strict()),
        ] {
            rows.push(vec![
                name.clone(),
                property.into(),
                claim_name(claim).into(),
                report.tests.to_string(),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
        reports.push(report);
    }
    if let [mr, nr] = &reports[..] {
        let map = MeanTypeMapping::new(means[0].clone(), means[1].clone())?;
        let pair = format!("({},{})", means[0], means[1]);
        for (property, outcome) in [("prop1", prop1_applies(mr, nr)), ("prop2", prop2_applies(mr, nr))] {
            rows.push(vec![
                pair.clone(),
                property.into(),
                outcome.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
        let domain = map.domain();
        let region = region.unwrap_or_else(|| default_region(&domain));
        let sample = random_points(seed, samples, region);
        rows.push(contractivity_row(
            &pair,
            "diagonally_contractive",
            &diagonal_contractivity_on(&map, &sample)?,
        ));
        rows.push(contractivity_row(
            &pair,
            "weakly_contractive",
            &weak_contractivity_on(&map, &sample, nmax)?,
        ));
    }
    write_table(
        out,
        &["mean", "property", "verdict", "checked", "witness_x", "witness_y", "witness_value"],
        &rows,
    )?;
    Ok(Outcome::ok())
}

/// A validated grid sweep of one analysis over a mapping.
#[derive(Debug)]
pub struct SweepConfig {
    pub analysis: Analysis,
    pub mapping: Mapping,
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub limit: LimitArgs,
    pub contract: ContractArgs,
    pub extremal: ExtremalArgs,
    pub steps: usize,
}

impl SweepConfig {
    /// Rejects grids with fewer than two nodes per axis and regions outside
    /// the mapping's domain.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(CliError::Usage(format!(
                "resolution must be at least 2x2, got {}x{}",
                self.nx, self.ny
            )));
        }
        let domain = self.mapping.domain();
        if !region_inside(&self.region, &domain) {
            return Err(CliError::Usage(format!(
                "region [{}, {}] x [{}, {}] is not inside {domain} squared",
                self.region.x0, self.region.x1, self.region.y0, self.region.y1
            )));
        }
        Ok(())
    }

    fn header(&self) -> Vec<&'static str> {
        match self.analysis {
            Analysis::Limit => vec!["x", "y", "status", "value", "final_gap", "iterations"],
            Analysis::Basin => BASIN_HEADER.to_vec(),
            Analysis::Contract => CONTRACT_HEADER.to_vec(),
            Analysis::Envelope => vec!["x", "y", "steps", "min_env", "max_env", "gap", "monotone"],
            Analysis::Extremal => vec!["x", "y", "l_est", "u_est", "spread"],
        }
    }

    fn row(&self, x: f64, y: f64) -> Result<Row, CliError> {
        let map = &self.mapping;
        let mut row = vec![num(x), num(y)];
        match self.analysis {
            Analysis::Limit => {
                let r = gauss_limit(map, x, y, self.limit.tol, self.limit.max_iter)?;
                row.extend(limit_columns(&r));
            }
            Analysis::Basin => row.extend(basin_columns(map, x, y, &self.limit)?),
            Analysis::Contract => row.extend(contract_columns(map, x, y, &self.contract)?),
            Analysis::Envelope => {
                let o = orbit(map, x, y, self.steps)?;
                let (lo, hi) = match (o.min_env.last(), o.max_env.last()) {
                    (Some(&lo), Some(&hi)) => (lo, hi),
                    _ => (x.min(y), x.max(y)),
                };
                row.extend([
                    self.steps.to_string(),
                    num(lo),
                    num(hi),
                    num(hi - lo),
                    o.envelope_violation().is_none().to_string(),
                ]);
            }
            Analysis::Extremal => {
                let e = extremal_invariant_estimates(map, x, y, self.extremal.n_max, self.extremal.tail)?;
                row.extend([num(e.l_est), num(e.u_est), num(e.spread())]);
            }
        }
        Ok(row)
    }

    /// Evaluates every grid point in parallel and writes rows in row-major order.
    pub fn run(&self, out: &mut dyn Write) -> Result<(), CliError> {
        self.validate()?;
        let points = grid(self.region, self.nx, self.ny);
        let rows = points
            .par_iter()
            .map(|&(x, y)| self.row(x, y))
            .collect::<Result<Vec<_>, _>>()?;
        write_table(out, &self.header(), &rows)
    }
}
