//! One function per subcommand. Each returns a table plus a JSON summary.

use clap::{Args, ValueEnum};
use serde::Serialize;

use loopkit::lattice::{connectivity_of, enumerate_patterns, trace_loops, Dims};
use loopkit::matchings::{
    canonical_pattern, count_allowed, entropy_scaling, enumerate_matchings, forbidden_witness, paper_closed_forms,
    ConnectivityPattern, Strategy,
};
use loopkit::moves::{class_reports, full_graph_components, winding_sector};
use loopkit::potts::{
    correlation_estimate, euler_partition_check, exact_fk_expectations, sw_sample, LinkRule, PottsParams,
};
use loopkit::quantum::entropy::schmidt_values;
use loopkit::quantum::hamiltonian::{assemble_h, kernel, BoundaryCondition, KERNEL_TOL};
use loopkit::quantum::strings::{torus_ground_space, winding_overlap_check};
use loopkit::quantum::{psi_torus, schmidt_rank, schmidt_rank_exact, Region, TensorParams, C64, SCHMIDT_TOL};
use loopkit::selftest::run_criteria;
use loopkit::LoopError;

use crate::output::{CliError, CliResult, Report, Table};

/// A list of integers given as `3`, `1..4` (inclusive), `1..=4` or `2,4,6`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct IntList(pub Vec<usize>);

pub fn parse_range(s: &str) -> Result<IntList, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("not a non-negative integer: {:?}", t));
    let mut out = Vec::new();
    for part in s.split(',') {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty range {}", part));
            }
            out.extend(a..=b);
        } else {
            out.push(num(part)?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(IntList(out))
}

/// `row,col,width,height`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionArg(pub [usize; 4]);

fn parse_region(s: &str) -> Result<RegionArg, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad region component {:?}", t)))
        .collect::<Result<_, _>>()?;
    if v.len() != 4 {
        return Err("region is row,col,width,height".into());
    }
    Ok(RegionArg([v[0], v[1], v[2], v[3]]))
}

fn open(h: usize, v: usize) -> CliResult<Dims> {
    Ok(Dims::open(h, v)?)
}

fn torus(h: usize, v: usize) -> CliResult<Dims> {
    Ok(Dims::torus(h, v)?)
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountStrategy {
    Brute,
    Dp,
    PaperClosedForms,
}

impl From<CountStrategy> for Strategy {
    fn from(s: CountStrategy) -> Self {
        match s {
            CountStrategy::Brute => Strategy::Brute,
            CountStrategy::Dp => Strategy::Dp,
            CountStrategy::PaperClosedForms => Strategy::PaperClosedForms,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    /// Horizontal extents: `3`, `1..4` or `2,4`.
    #[arg(long, value_parser = parse_range)]
    pub nh: IntList,
    /// Vertical extents.
    #[arg(long, value_parser = parse_range)]
    pub nv: IntList,
    #[arg(long, value_enum, default_value_t = CountStrategy::Dp)]
    pub strategy: CountStrategy,
    /// Tabulate every closed form against the exact counts instead.
    #[arg(long)]
    pub report: bool,
}

pub fn count(a: &CountArgs) -> CliResult<Report> {
    let (hs, vs) = (&a.nh.0, &a.nv.0);
    if a.report {
        let mut t = Table::new(&[
            "n_h",
            "n_v",
            "total_dp",
            "total_brute",
            "global_height",
            "cut_vertical",
            "cut_horizontal",
            "catalan",
            "total_global_height",
            "binomial_printed",
            "trig_printed",
            "trig_squared",
            "fraction_coefficient",
            "fraction_derivative",
        ]);
        for &h in hs {
            for &v in vs {
                let r = paper_closed_forms(open(h, v)?)?;
                t.push(vec![
                    h.to_string(),
                    v.to_string(),
                    r.total_dp,
                    r.total_brute.unwrap_or_default(),
                    r.global_height,
                    r.cut_criterion_vertical,
                    r.cut_criterion_horizontal,
                    r.catalan,
                    r.total_global_height,
                    r.binomial_printed,
                    format!("{:.12e}", r.trig_printed),
                    format!("{:.12e}", r.trig_squared),
                    r.fraction_coefficient,
                    r.fraction_derivative,
                ]);
            }
        }
        return Ok(Report::new(t));
    }
    let mut t = Table::new(&["n_h", "n_v", "strategy", "value"]);
    for &h in hs {
        for &v in vs {
            let r = count_allowed(open(h, v)?, a.strategy.into())?;
            t.push(vec![h.to_string(), v.to_string(), r.strategy.name().into(), r.value.to_string()]);
        }
    }
    Ok(Report::new(t))
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Filter {
    All,
    Allowed,
    Forbidden,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum What {
    Matchings,
    Patterns,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TopologyArg {
    Open,
    Torus,
}

#[derive(Debug, Args, Serialize)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub nh: usize,
    #[arg(long)]
    pub nv: usize,
    #[arg(long, value_enum, default_value_t = What::Matchings)]
    pub what: What,
    /// Keep allowed or forbidden matchings only.
    #[arg(long, value_enum, default_value_t = Filter::All)]
    pub filter: Filter,
    #[arg(long, value_enum, default_value_t = TopologyArg::Open)]
    pub topology: TopologyArg,
}

pub fn enumerate(a: &EnumerateArgs) -> CliResult<Report> {
    match a.what {
        What::Matchings => {
            if a.topology == TopologyArg::Torus {
                return Err(CliError::Usage("boundary matchings exist on open patches only".into()));
            }
            let d = open(a.nh, a.nv)?;
            let mut t = Table::new(&["matching", "allowed", "witness"]);
            for p in enumerate_matchings(d.half_perimeter())? {
                let witness = forbidden_witness(&p, d)?;
                let allowed = witness.is_none();
                let keep = match a.filter {
                    Filter::All => true,
                    Filter::Allowed => allowed,
                    Filter::Forbidden => !allowed,
                };
                if keep {
                    t.push(vec![p.to_text(), allowed.to_string(), witness.map(|w| w.to_string()).unwrap_or_default()]);
                }
            }
            let n = t.rows.len();
            Ok(Report::new(t).with_summary(serde_json::json!({ "rows": n })))
        }
        What::Patterns => {
            if a.filter != Filter::All {
                return Err(CliError::Usage("--filter applies to matchings".into()));
            }
            let d = match a.topology {
                TopologyArg::Open => open(a.nh, a.nv)?,
                TopologyArg::Torus => torus(a.nh, a.nv)?,
            };
            let last = if d.is_torus() { "winding_sector" } else { "matching" };
            let mut t = Table::new(&["index", "tiles", "closed_loops", "contractible_loops", "zero_tiles", last]);
            for l in enumerate_patterns(d)? {
                let tr = trace_loops(&l);
                let extra = if d.is_torus() {
                    winding_sector(&l).map(|w| w.to_string()).unwrap_or_default()
                } else {
                    connectivity_of(&l)?.to_text()
                };
                t.push(vec![
                    l.basis_index().to_string(),
                    l.rows().join("/"),
                    tr.closed_loops.len().to_string(),
                    tr.closed_loops.iter().filter(|c| c.contractible()).count().to_string(),
                    l.zero_tiles().to_string(),
                    extra,
                ]);
            }
            Ok(Report::new(t))
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CanonicalArgs {
    /// Matching as `a-b,c-d,...` with boundary points numbered from 1.
    #[arg(long)]
    pub matching: String,
    #[arg(long)]
    pub nh: usize,
    #[arg(long)]
    pub nv: usize,
}

pub fn canonical(a: &CanonicalArgs) -> CliResult<Report> {
    let d = open(a.nh, a.nv)?;
    let p = ConnectivityPattern::from_text(&a.matching)?;
    let l = canonical_pattern(&p, d)?;
    let traced = connectivity_of(&l)?;
    let mut t = Table::new(&["row", "tiles"]);
    for (r, row) in l.rows().into_iter().enumerate() {
        t.push(vec![r.to_string(), row]);
    }
    let round_trip = traced == p;
    let mut rep = Report::new(t).with_summary(serde_json::json!({
        "matching": p.to_text(),
        "traced": traced.to_text(),
        "round_trip": round_trip,
        "closed_loops": trace_loops(&l).closed_loops.len(),
    }));
    if !round_trip {
        rep.failure = Some(format!("canonical pattern traces to {} instead of {}", traced, p));
    }
    Ok(rep)
}

#[derive(Debug, Args, Serialize)]
pub struct DimsArgs {
    #[arg(long)]
    pub nh: usize,
    #[arg(long)]
    pub nv: usize,
}

pub fn ergodicity(a: &DimsArgs) -> CliResult<Report> {
    let d = open(a.nh, a.nv)?;
    let reports = class_reports(d)?;
    let mut t = Table::new(&["matching", "size", "components", "connected"]);
    for r in &reports {
        t.push(vec![r.matching.clone(), r.size.to_string(), r.components.to_string(), r.connected.to_string()]);
    }
    let all = reports.iter().all(|r| r.connected);
    let full = if d.n_h % 2 == 0 && d.n_v % 2 == 0 { Some(full_graph_components(d)?) } else { None };
    let mut rep = Report::new(t).with_summary(serde_json::json!({
        "classes": reports.len(),
        "all_class_graphs_connected": all,
        "full_graph_components": full,
    }));
    if !all || full.is_some_and(|c| c != 1) {
        rep.failure = Some(format!("move graph disconnected (classes connected: {}, full components: {:?})", all, full));
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BcArg {
    Obc,
    Gapped,
    Torus,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    A,
    ATilde,
}

#[derive(Debug, Args, Serialize)]
pub struct GroundspaceArgs {
    #[arg(long)]
    pub nh: usize,
    #[arg(long)]
    pub nv: usize,
    #[arg(long, value_enum, default_value_t = BcArg::Obc)]
    pub bc: BcArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::A)]
    pub variant: VariantArg,
}

fn params(variant: VariantArg, lambda: f64) -> TensorParams {
    match variant {
        VariantArg::A => TensorParams::a(lambda),
        VariantArg::ATilde => TensorParams::a_tilde(lambda),
    }
}

pub fn groundspace(a: &GroundspaceArgs) -> CliResult<Report> {
    let (d, bc) = match a.bc {
        BcArg::Obc => (open(a.nh, a.nv)?, BoundaryCondition::Obc),
        BcArg::Gapped => (open(a.nh, a.nv)?, BoundaryCondition::ObcGapped),
        BcArg::Torus => (torus(a.nh, a.nv)?, BoundaryCondition::Torus),
    };
    let h = assemble_h(d, bc, params(a.variant, a.lambda))?;
    let k = kernel(&h.op, KERNEL_TOL, false)?;
    let allowed = match a.bc {
        BcArg::Obc => count_allowed(d, Strategy::Dp)?.value.to_string(),
        _ => String::new(),
    };
    let mut t = Table::new(&["n_h", "n_v", "bc", "variant", "lambda", "terms", "kernel_dim", "gap", "allowed_matchings"]);
    t.push(vec![
        a.nh.to_string(),
        a.nv.to_string(),
        bc.name().into(),
        format!("{:?}", a.variant).to_lowercase(),
        a.lambda.to_string(),
        h.terms.len().to_string(),
        k.dimension.to_string(),
        k.gap.map(|g| format!("{:.6e}", g)).unwrap_or_default(),
        allowed,
    ]);
    Ok(Report::new(t).with_summary(serde_json::json!({
        "kernel_dim": k.dimension,
        "norm_estimate": k.norm,
        "threshold": k.threshold,
        "largest_block": k.largest_block,
    })))
}

#[derive(Debug, Args, Serialize)]
pub struct EntropyArgs {
    /// Torus extents (omit with --scaling).
    #[arg(long)]
    pub nh: Option<usize>,
    #[arg(long)]
    pub nv: Option<usize>,
    /// `row,col,width,height`; default: every rectangle anchored at the origin.
    #[arg(long, value_parser = parse_region)]
    pub region: Option<RegionArg>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Boundary-entropy table of square patches up to this side instead.
    #[arg(long)]
    pub scaling: Option<usize>,
    /// First side used in the scaling fit.
    #[arg(long, default_value_t = 16)]
    pub fit_from: usize,
}

pub fn entropy(a: &EntropyArgs) -> CliResult<Report> {
    if let Some(max) = a.scaling {
        let s = entropy_scaling(max, a.fit_from)?;
        let mut t = Table::new(&["side", "perimeter", "log2_count", "corrected", "increment"]);
        for r in &s.rows {
            t.push(vec![
                r.side.to_string(),
                r.perimeter.to_string(),
                format!("{:.12}", r.log2_count),
                format!("{:.12}", r.corrected),
                format!("{:.6e}", r.increment),
            ]);
        }
        return Ok(Report::new(t).with_summary(serde_json::json!({
            "exponent": s.exponent,
            "offset": s.offset,
            "correction": s.correction,
            "fit_from": s.fit_from,
            "final_increment": s.final_increment,
            "increments_shrinking": s.increments_shrinking,
        })));
    }
    let (Some(nh), Some(nv)) = (a.nh, a.nv) else {
        return Err(CliError::Usage("entropy needs --nh and --nv, or --scaling".into()));
    };
    let d = torus(nh, nv)?;
    let psi = psi_torus(d, C64::new(a.lambda, 0.0), None)?;
    let regions: Vec<Region> = match &a.region {
        Some(RegionArg([row, col, w, h])) => vec![Region::new(*row, *col, *w, *h)],
        None => (1..=nv)
            .flat_map(|h| (1..=nh).map(move |w| Region::new(0, 0, w, h)))
            .filter(|r| (r.width, r.height) != (nh, nv))
            .collect(),
    };
    let mut t = Table::new(&["row", "col", "width", "height", "rank_svd", "rank_exact", "entropy_bits"]);
    for r in regions {
        let sv = schmidt_values(&psi, &r)?;
        let total: f64 = sv.iter().map(|s| s * s).sum();
        let ent: f64 = sv
            .iter()
            .map(|s| s * s / total)
            .filter(|&p| p > 1e-300)
            .map(|p| -p * p.log2())
            .sum();
        let exact = match schmidt_rank_exact(&psi, &r) {
            Ok(k) => k.to_string(),
            Err(LoopError::Precondition(_)) => String::new(),
            Err(e) => return Err(e.into()),
        };
        t.push(vec![
            r.row.to_string(),
            r.col.to_string(),
            r.width.to_string(),
            r.height.to_string(),
            schmidt_rank(&psi, &r, SCHMIDT_TOL)?.to_string(),
            exact,
            format!("{:.12}", ent),
        ]);
    }
    Ok(Report::new(t))
}

#[derive(Debug, Args, Serialize)]
pub struct StringsArgs {
    #[arg(long)]
    pub nh: usize,
    #[arg(long)]
    pub nv: usize,
}

pub fn strings(a: &StringsArgs) -> CliResult<Report> {
    let d = torus(a.nh, a.nv)?;
    let g = torus_ground_space(d, TensorParams::default())?;
    let w = winding_overlap_check(d)?;
    let mut t = Table::new(&["l", "m", "j", "k", "extracted_re", "extracted_im", "predicted"]);
    for r in &w.rows {
        t.push(vec![
            r.l.to_string(),
            r.m.to_string(),
            r.j.to_string(),
            r.k.to_string(),
            format!("{:.12e}", r.extracted_re),
            format!("{:.12e}", r.extracted_im),
            format!("{:.12e}", r.predicted),
        ]);
    }
    let ok = w.max_deviation < 1e-9 && g.string_rank == g.string_formula;
    let mut rep = Report::new(t).with_summary(serde_json::json!({
        "ground_space": g,
        "sectors": w.sectors,
        "grid_points": w.grid_points,
        "max_deviation": w.max_deviation,
        "max_residual": w.max_residual,
        "max_cross_overlap": w.max_cross_overlap,
    }));
    if !ok {
        rep.failure = Some(format!(
            "string rank {} vs formula {}, max overlap deviation {:.3e}",
            g.string_rank, g.string_formula, w.max_deviation
        ));
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PottsMode {
    /// Swendsen-Wang estimates per tile, next to exact values when enumerable.
    Sample,
    /// Row correlator and fitted correlation length.
    Correlator,
    /// Bijection, Euler relation and partition identity by enumeration.
    Identities,
}

#[derive(Debug, Args, Serialize)]
pub struct PottsArgs {
    #[arg(long)]
    pub nh: usize,
    #[arg(long)]
    pub nv: usize,
    #[arg(long, default_value_t = 16)]
    pub q: u32,
    /// Inverse temperature; defaults to the self-dual point.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: usize,
    #[arg(long, value_enum, default_value_t = PottsMode::Sample)]
    pub mode: PottsMode,
}

pub fn potts(a: &PottsArgs, seed: u64) -> CliResult<Report> {
    let d = torus(a.nh, a.nv)?;
    let p = match a.beta {
        Some(b) => PottsParams::new(a.q, b)?,
        None => PottsParams::self_dual(a.q)?,
    };
    match a.mode {
        PottsMode::Sample => {
            let s = sw_sample(d, p, a.sweeps, a.burn_in, seed)?;
            let exact = |rule| match exact_fk_expectations(d, p, rule) {
                Ok(e) => Ok(Some(e.one_point)),
                Err(LoopError::Guard { .. }) => Ok(None),
                Err(e) => Err(CliError::from(e)),
            };
            let (link, cluster) = (exact(LinkRule::Link)?, exact(LinkRule::Cluster)?);
            let fmt = |v: &Option<Vec<f64>>, x: usize| v.as_ref().map(|v| format!("{:.12e}", v[x])).unwrap_or_default();
            let mut t = Table::new(&[
                "tile",
                "spin_mean",
                "spin_stderr",
                "bond_mean",
                "bond_stderr",
                "exact_link_rule",
                "exact_cluster_rule",
            ]);
            for x in 0..d.sites() {
                t.push(vec![
                    x.to_string(),
                    format!("{:.12e}", s.one_point[x].mean),
                    format!("{:.12e}", s.one_point[x].stderr),
                    format!("{:.12e}", s.link_one_point[x].mean),
                    format!("{:.12e}", s.link_one_point[x].stderr),
                    fmt(&link, x),
                    fmt(&cluster, x),
                ]);
            }
            Ok(Report::new(t).with_summary(serde_json::json!({
                "q": p.q,
                "beta": p.beta,
                "sweeps": s.sweeps,
                "burn_in": s.burn_in,
                "mean_one_point": s.mean_one_point,
            })))
        }
        PottsMode::Correlator => {
            let c = correlation_estimate(d, p, a.sweeps, seed)?;
            let mut t = Table::new(&["distance", "C", "stderr"]);
            for ((x, m), e) in c.distances.iter().zip(&c.means).zip(&c.stderrs) {
                t.push(vec![x.to_string(), format!("{:.10e}", m), format!("{:.10e}", e)]);
            }
            Ok(Report::new(t).with_summary(serde_json::json!({
                "fit_window": c.fit_window,
                "slope": c.slope,
                "slope_stderr": c.slope_stderr,
                "xi": c.xi,
                "xi_finite": c.xi_finite(),
                "chi2_per_dof": c.chi2_per_dof,
            })))
        }
        PottsMode::Identities => {
            let r = euler_partition_check(d, a.q as u64)?;
            let mut t = Table::new(&["quantity", "value"]);
            let rows: Vec<(&str, String)> = vec![
                ("convention", format!("{:?}", r.convention)),
                ("configurations", r.euler.configurations.to_string()),
                ("bijective", r.euler.bijective.to_string()),
                ("euler_violations", r.euler.violations.to_string()),
                ("cross_cluster_configurations", r.euler.cross_configurations.to_string()),
                ("unexplained_violations", r.euler.unexplained.to_string()),
                ("other_convention_violations", r.other.violations.to_string()),
                ("fk_sum", r.partition.fk_sum.clone()),
                ("loop_side", r.partition.loop_side.clone()),
                ("loop_sum", r.partition.loop_sum.clone()),
                ("partition_equal", r.partition.equal.to_string()),
            ];
            for (k, v) in rows {
                t.push(vec![k.into(), v]);
            }
            let ok = r.euler.bijective && r.euler.violations == 0 && r.partition.equal;
            let mut rep = Report::new(t).with_summary(&r);
            if !ok {
                rep.failure = Some(format!(
                    "identities fail: bijective {}, Euler violations {}, partition equal {}",
                    r.euler.bijective, r.euler.violations, r.partition.equal
                ));
            }
            Ok(rep)
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SelftestArgs {
    /// Run only these criteria, e.g. `1,2,12` or `1..5`.
    #[arg(long, value_parser = parse_range)]
    pub only: Option<IntList>,
}

pub fn selftest(a: &SelftestArgs, seed: u64) -> CliResult<Report> {
    let only: Vec<u32> = a.only.clone().map(|l| l.0).unwrap_or_default().into_iter().map(|n| n as u32).collect();
    if let Some(bad) = only.iter().find(|&&n| !(1..=14).contains(&n)) {
        return Err(CliError::Usage(format!("no criterion {}", bad)));
    }
    let results = run_criteria(&only, seed);
    let mut t = Table::new(&["criterion", "name", "status", "detail"]);
    for r in &results {
        eprintln!("{}", r.line());
        t.push(vec![r.number.to_string(), r.name.into(), if r.passed { "PASS" } else { "FAIL" }.into(), r.detail.clone()]);
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.number).collect();
    let seconds: Vec<(u32, f64)> = results.iter().map(|r| (r.number, r.seconds)).collect();
    let mut rep = Report::new(t).with_summary(serde_json::json!({
        "passed": results.len() - failed.len(),
        "failed": failed,
        "seconds": seconds,
    }));
    if !failed.is_empty() {
        rep.failure = Some(format!("criteria failed: {:?}", failed));
    }
    Ok(rep)
}
