//! The Potts model on the net lattice of a torus: the bond/loop bijection,
//! the Euler and partition-function identities, exact expectations by
//! enumeration, and a Swendsen-Wang sampler.
//!
//! Tile corners `(x, y)` with `x + y` odd carry the spins. Every tile holds
//! the diagonal joining its two odd corners, so a tile with `row + col`
//! even carries the edge from its top-right to its bottom-left corner and
//! an odd tile the edge from top-left to bottom-right.

use std::collections::HashMap;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LoopError, Result};
use crate::guard;
use crate::lattice::{trace_loops, Dims, LoopPattern};
use crate::moves::UnionFind;

/// Number of batches for standard errors.
pub const BATCHES: usize = 32;

/// Net lattice of an even torus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetLattice {
    pub dims: Dims,
    /// Corner `(x, y)` of every vertex.
    pub vertices: Vec<(usize, usize)>,
    /// Endpoints of the edge carried by each tile, indexed by site.
    pub edges: Vec<(usize, usize)>,
}

impl NetLattice {
    pub fn new(dims: Dims) -> Result<Self> {
        if !dims.is_torus() {
            return Err(LoopError::Topology("torus"));
        }
        if dims.n_h % 2 != 0 || dims.n_v % 2 != 0 {
            return Err(LoopError::InvalidDims { n_h: dims.n_h, n_v: dims.n_v, reason: "the net lattice needs even extents" });
        }
        let mut index = HashMap::new();
        let mut vertices = Vec::new();
        for y in 0..dims.n_v {
            for x in 0..dims.n_h {
                if (x + y) % 2 == 1 {
                    index.insert((x, y), vertices.len());
                    vertices.push((x, y));
                }
            }
        }
        let corner = |x: usize, y: usize| index[&(x % dims.n_h, y % dims.n_v)];
        let edges = (0..dims.sites())
            .map(|s| {
                let (r, c) = dims.row_col(s);
                if (r + c) % 2 == 0 {
                    (corner(c + 1, r), corner(c, r + 1))
                } else {
                    (corner(c, r), corner(c + 1, r + 1))
                }
            })
            .collect();
        Ok(NetLattice { dims, vertices, edges })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_vertices()];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }
}

/// How a bond maps to a tile value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BondConvention {
    /// Bond on an even tile is tile 0, on an odd tile tile 1.
    EvenZero,
    /// Bond on an even tile is tile 1, on an odd tile tile 0.
    EvenOne,
}

impl BondConvention {
    fn bond_tile(self, dims: Dims, site: usize) -> u8 {
        let (r, c) = dims.row_col(site);
        let even = (r + c) % 2 == 0;
        match (self, even) {
            (BondConvention::EvenZero, true) | (BondConvention::EvenOne, false) => 0,
            _ => 1,
        }
    }
}

/// Bond subset as a bitset indexed by site.
pub type BondConfig = u64;

/// Loop pattern `L(G')` of a bond configuration.
pub fn bonds_to_loops(dims: Dims, bonds: BondConfig, convention: BondConvention) -> LoopPattern {
    let tiles = (0..dims.sites())
        .map(|s| {
            let t = convention.bond_tile(dims, s);
            if (bonds >> s) & 1 == 1 {
                t
            } else {
                1 - t
            }
        })
        .collect();
    LoopPattern::new(dims, tiles).expect("one tile per site")
}

pub fn loops_to_bonds(pattern: &LoopPattern, convention: BondConvention) -> BondConfig {
    let dims = pattern.dims();
    (0..dims.sites())
        .filter(|&s| pattern.tiles()[s] == convention.bond_tile(dims, s))
        .fold(0, |acc, s| acc | (1 << s))
}

/// Cluster data of a bond configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterCount {
    /// Connected components, isolated vertices included.
    pub components: usize,
    pub bonds: usize,
    /// `b - V + n`.
    pub cycles: usize,
}

fn clusters(net: &NetLattice, bonds: BondConfig) -> (UnionFind, ClusterCount) {
    let mut uf = UnionFind::new(net.n_vertices());
    let mut b = 0;
    for (s, &(x, y)) in net.edges.iter().enumerate() {
        if (bonds >> s) & 1 == 1 {
            uf.union(x, y);
            b += 1;
        }
    }
    let n = (0..net.n_vertices()).filter(|&v| uf.find(v) == v).count();
    (uf, ClusterCount { components: n, bonds: b, cycles: b + n - net.n_vertices() })
}

pub fn cluster_count(net: &NetLattice, bonds: BondConfig) -> ClusterCount {
    clusters(net, bonds).1
}

/// Whether some cluster of `bonds` winds around both torus directions.
///
/// Clusters are unwrapped by breadth-first search; every closed walk that
/// returns with a net displacement contributes a winding vector.
pub fn has_cross_cluster(net: &NetLattice, bonds: BondConfig) -> bool {
    let dims = net.dims;
    let nv = net.n_vertices();
    let mut adj: Vec<Vec<(usize, (i64, i64))>> = vec![Vec::new(); nv];
    for (s, &(a, b)) in net.edges.iter().enumerate() {
        if (bonds >> s) & 1 == 1 {
            let (r, c) = dims.row_col(s);
            let d = if (r + c) % 2 == 0 { (-1, 1) } else { (1, 1) };
            adj[a].push((b, d));
            adj[b].push((a, (-d.0, -d.1)));
        }
    }
    let mut pos: Vec<Option<(i64, i64)>> = vec![None; nv];
    for start in 0..nv {
        if pos[start].is_some() {
            continue;
        }
        pos[start] = Some((0, 0));
        let mut windings: Vec<(i64, i64)> = Vec::new();
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let pv = pos[v].expect("visited");
            for &(w, d) in &adj[v] {
                let want = (pv.0 + d.0, pv.1 + d.1);
                match pos[w] {
                    None => {
                        pos[w] = Some(want);
                        queue.push_back(w);
                    }
                    Some(pw) if pw != want => windings.push((want.0 - pw.0, want.1 - pw.1)),
                    _ => {}
                }
            }
        }
        let cross = windings.iter().enumerate().any(|(i, a)| windings[i + 1..].iter().any(|b| a.0 * b.1 - a.1 * b.0 != 0));
        if cross {
            return true;
        }
    }
    false
}

fn check_enumerable(net: &NetLattice) -> Result<()> {
    guard::check("bond enumeration", net.n_edges(), 20.min(guard::PATTERN_BITS))?;
    if net.n_edges() > 63 {
        return Err(LoopError::Guard { what: "bond enumeration", needed: net.n_edges(), cap: 63 });
    }
    Ok(())
}

/// Euler and bijection statistics of one convention.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EulerStats {
    pub convention: BondConvention,
    pub configurations: u64,
    pub bijective: bool,
    /// Configurations with `n_L != n + c`.
    pub violations: u64,
    /// `(n_L - n - c, count)` over all configurations.
    pub defect_histogram: Vec<(i64, u64)>,
    /// First violating configuration, if any.
    pub first_violation: Option<BondConfig>,
    /// Configurations with a cluster winding both ways.
    pub cross_configurations: u64,
    /// Configurations where `n_L = n + c - 2 [cross cluster]` fails.
    pub unexplained: u64,
}

pub fn euler_stats(dims: Dims, convention: BondConvention) -> Result<EulerStats> {
    let net = NetLattice::new(dims)?;
    check_enumerable(&net)?;
    let total = 1u64 << net.n_edges();
    let mut seen = vec![false; total as usize];
    let mut bijective = true;
    let mut hist: HashMap<i64, u64> = HashMap::new();
    let mut first = None;
    let mut violations = 0;
    let mut cross_configurations = 0;
    let mut unexplained = 0;
    for g in 0..total {
        let l = bonds_to_loops(dims, g, convention);
        let k = l.basis_index() as usize;
        bijective &= !seen[k] && loops_to_bonds(&l, convention) == g;
        seen[k] = true;
        let n_l = trace_loops(&l).closed_loops.len() as i64;
        let cc = cluster_count(&net, g);
        let defect = n_l - (cc.components + cc.cycles) as i64;
        *hist.entry(defect).or_default() += 1;
        let cross = has_cross_cluster(&net, g);
        cross_configurations += cross as u64;
        if defect != if cross { -2 } else { 0 } {
            unexplained += 1;
        }
        if defect != 0 {
            violations += 1;
            first.get_or_insert(g);
        }
    }
    let mut defect_histogram: Vec<(i64, u64)> = hist.into_iter().collect();
    defect_histogram.sort();
    Ok(EulerStats {
        convention,
        configurations: total,
        bijective: bijective && seen.iter().all(|&s| s),
        violations,
        defect_histogram,
        first_violation: first,
        cross_configurations,
        unexplained,
    })
}

/// The convention with fewer Euler violations, ties going to `EvenZero`.
pub fn calibrate_convention(dims: Dims) -> Result<(BondConvention, EulerStats, EulerStats)> {
    let a = euler_stats(dims, BondConvention::EvenZero)?;
    let b = euler_stats(dims, BondConvention::EvenOne)?;
    let pick = if b.violations < a.violations { BondConvention::EvenOne } else { BondConvention::EvenZero };
    Ok((pick, a, b))
}

/// Exact check of `sum Q^n v^b = sqrt(Q)^V sum_L sqrt(Q)^{n_L}` at
/// `v = sqrt(Q)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionReport {
    pub q: u64,
    pub sqrt_q: u64,
    pub vertices: usize,
    /// `sum_G' Q^n sqrt(Q)^b`.
    pub fk_sum: String,
    /// `sqrt(Q)^V sum_L sqrt(Q)^{n_L}`.
    pub loop_side: String,
    /// `sum_L sqrt(Q)^{n_L}`.
    pub loop_sum: String,
    pub equal: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EulerPartitionReport {
    pub convention: BondConvention,
    pub euler: EulerStats,
    pub other: EulerStats,
    pub partition: PartitionReport,
}

fn isqrt_exact(q: u64) -> Option<u64> {
    let r = (q as f64).sqrt().round() as u64;
    (r * r == q).then_some(r)
}

pub fn euler_partition_check(dims: Dims, q: u64) -> Result<EulerPartitionReport> {
    let sqrt_q = isqrt_exact(q).ok_or_else(|| LoopError::Precondition(format!("Q = {} is not a perfect square", q)))?;
    if q < 2 {
        return Err(LoopError::OutOfRange { what: "Q", value: q as i64, min: 2, max: i64::MAX });
    }
    let (convention, a, b) = calibrate_convention(dims)?;
    let (euler, other) = if convention == BondConvention::EvenZero { (a, b) } else { (b, a) };
    let net = NetLattice::new(dims)?;
    let big_q = BigUint::from(q);
    let big_s = BigUint::from(sqrt_q);
    let mut fk = BigUint::from(0u32);
    for g in 0..(1u64 << net.n_edges()) {
        let cc = cluster_count(&net, g);
        fk += big_q.pow(cc.components as u32) * big_s.pow(cc.bonds as u32);
    }
    let mut loops = BigUint::from(0u32);
    for k in 0..(1u64 << dims.sites()) {
        let l = LoopPattern::from_index(dims, k);
        loops += big_s.pow(trace_loops(&l).closed_loops.len() as u32);
    }
    let rhs = big_s.pow(net.n_vertices() as u32) * &loops;
    Ok(EulerPartitionReport {
        convention,
        euler,
        other,
        partition: PartitionReport {
            q,
            sqrt_q,
            vertices: net.n_vertices(),
            equal: fk == rhs,
            fk_sum: fk.to_string(),
            loop_side: rhs.to_string(),
            loop_sum: loops.to_string(),
        },
    })
}

/// Potts parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PottsParams {
    pub q: u32,
    pub beta: f64,
}

impl PottsParams {
    pub fn new(q: u32, beta: f64) -> Result<Self> {
        if q < 2 {
            return Err(LoopError::OutOfRange { what: "Q", value: q as i64, min: 2, max: u32::MAX as i64 });
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(LoopError::Precondition(format!("inverse temperature {} must be finite and non-negative", beta)));
        }
        Ok(PottsParams { q, beta })
    }

    /// `beta = log(1 + sqrt(Q))`.
    pub fn self_dual(q: u32) -> Result<Self> {
        Self::new(q, (1.0 + (q as f64).sqrt()).ln())
    }

    /// `v = e^beta - 1`.
    pub fn v(&self) -> f64 {
        self.beta.exp_m1()
    }

    pub fn is_self_dual(&self) -> bool {
        (self.beta - (1.0 + (self.q as f64).sqrt()).ln()).abs() < 1e-12
    }

    /// Value of the link observable on unequal spins, `(1 + Q) / (1 - Q)`.
    pub fn unequal_value(&self) -> f64 {
        (1.0 + self.q as f64) / (1.0 - self.q as f64)
    }
}

/// Which conditional value of the link observable is used under the FK measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkRule {
    /// `+1` if the bond is present, `-1` otherwise.
    Link,
    /// `+1` if the endpoints share a cluster, `-1` otherwise.
    Cluster,
}

/// Exact FK expectations on an enumerable torus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FkExpectations {
    pub rule: LinkRule,
    /// `<O_x>` per tile.
    pub one_point: Vec<f64>,
    /// `<O_x O_y>` per pair of tiles.
    pub two_point: Vec<Vec<f64>>,
}

/// `<O_x>` and `<O_x O_y>` for every tile pair under `Q^n v^b` weights.
pub fn exact_fk_expectations(dims: Dims, params: PottsParams, rule: LinkRule) -> Result<FkExpectations> {
    let net = NetLattice::new(dims)?;
    check_enumerable(&net)?;
    let e = net.n_edges();
    let (lq, lv) = ((params.q as f64).ln(), params.v().ln());
    let mut weights = Vec::with_capacity(1 << e);
    let mut signs: Vec<u64> = Vec::with_capacity(1 << e);
    let mut log_max = f64::NEG_INFINITY;
    for g in 0..(1u64 << e) {
        let (mut uf, cc) = clusters(&net, g);
        let lw = cc.components as f64 * lq + if cc.bonds == 0 { 0.0 } else { cc.bonds as f64 * lv };
        log_max = log_max.max(lw);
        weights.push(lw);
        let plus = match rule {
            LinkRule::Link => g,
            LinkRule::Cluster => net
                .edges
                .iter()
                .enumerate()
                .filter(|(_, &(a, b))| uf.find(a) == uf.find(b))
                .fold(0, |acc, (s, _)| acc | (1 << s)),
        };
        signs.push(plus);
    }
    let mut z = 0.0;
    let mut one = vec![0.0; e];
    let mut two = vec![vec![0.0; e]; e];
    for (w, &plus) in weights.iter().zip(&signs) {
        let w = (w - log_max).exp();
        z += w;
        let s: Vec<f64> = (0..e).map(|x| if (plus >> x) & 1 == 1 { 1.0 } else { -1.0 }).collect();
        for x in 0..e {
            one[x] += w * s[x];
            for y in x..e {
                two[x][y] += w * s[x] * s[y];
            }
        }
    }
    for x in 0..e {
        one[x] /= z;
        for y in x..e {
            two[x][y] /= z;
            two[y][x] = two[x][y];
        }
    }
    Ok(FkExpectations { rule, one_point: one, two_point: two })
}

/// `<O_x>` (and `<O_x O_y>` when `y` is given) under the link rule.
pub fn exact_fk_expectation(dims: Dims, params: PottsParams, x: usize, y: Option<usize>) -> Result<f64> {
    let ex = exact_fk_expectations(dims, params, LinkRule::Link)?;
    let check = |s: usize| {
        if s >= dims.sites() {
            Err(LoopError::OutOfRange { what: "tile", value: s as i64, min: 0, max: dims.sites() as i64 - 1 })
        } else {
            Ok(s)
        }
    };
    let x = check(x)?;
    Ok(match y {
        None => ex.one_point[x],
        Some(y) => ex.two_point[x][check(y)?],
    })
}

/// Mean and batched standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

fn batch_estimate(batches: &[f64]) -> Estimate {
    let n = batches.len() as f64;
    let mean = batches.iter().sum::<f64>() / n;
    let var = if batches.len() > 1 { batches.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Estimate { mean, stderr: (var / n).sqrt() }
}

/// Swendsen-Wang chain state.
pub struct SwChain {
    net: NetLattice,
    params: PottsParams,
    spins: Vec<u32>,
    bonds: Vec<bool>,
    rng: ChaCha8Rng,
}

impl SwChain {
    /// Starts from uniformly random spins.
    pub fn new(dims: Dims, params: PottsParams, seed: u64) -> Result<Self> {
        let net = NetLattice::new(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spins = (0..net.n_vertices()).map(|_| rng.random_range(0..params.q)).collect();
        let bonds = vec![false; net.n_edges()];
        Ok(SwChain { net, params, spins, bonds, rng })
    }

    pub fn net(&self) -> &NetLattice {
        &self.net
    }

    pub fn spins(&self) -> &[u32] {
        &self.spins
    }

    /// Bonds of the last percolation step.
    pub fn bonds(&self) -> &[bool] {
        &self.bonds
    }

    /// One update: percolate equal-spin edges with `1 - e^{-beta}`, then
    /// recolour every cluster uniformly.
    pub fn sweep(&mut self) {
        let p = -(-self.params.beta).exp_m1();
        let mut uf = UnionFind::new(self.net.n_vertices());
        for (s, &(a, b)) in self.net.edges.iter().enumerate() {
            let on = self.spins[a] == self.spins[b] && self.rng.random::<f64>() < p;
            self.bonds[s] = on;
            if on {
                uf.union(a, b);
            }
        }
        let mut colour: HashMap<usize, u32> = HashMap::new();
        for v in 0..self.net.n_vertices() {
            let root = uf.find(v);
            let q = self.params.q;
            let rng = &mut self.rng;
            self.spins[v] = *colour.entry(root).or_insert_with(|| rng.random_range(0..q));
        }
    }

    /// Spin value of the link observable on tile `x`.
    pub fn link_value(&self, x: usize) -> f64 {
        let (a, b) = self.net.edges[x];
        if self.spins[a] == self.spins[b] {
            1.0
        } else {
            self.params.unequal_value()
        }
    }
}

/// Monte Carlo estimates on a small torus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SwSummary {
    pub params: PottsParams,
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// `<O_x>` from spins, per tile.
    pub one_point: Vec<Estimate>,
    /// `<O_x>` from spins averaged over all tiles.
    pub mean_one_point: Estimate,
    /// `<Õ_x>` under the link rule from the percolation bonds, per tile.
    pub link_one_point: Vec<Estimate>,
    /// `<O_0 O_y>` from spins.
    pub two_point: Vec<Estimate>,
    /// `<O_0 O_y> - <O_0><O_y>` from spins.
    pub connected: Vec<Estimate>,
}

pub fn sw_sample(dims: Dims, params: PottsParams, sweeps: usize, burn_in: usize, seed: u64) -> Result<SwSummary> {
    if sweeps < BATCHES {
        return Err(LoopError::Precondition(format!("need at least {} sweeps", BATCHES)));
    }
    let mut chain = SwChain::new(dims, params, seed)?;
    for _ in 0..burn_in {
        chain.sweep();
    }
    let e = chain.net.n_edges();
    let per = sweeps / BATCHES;
    let mut one = vec![Vec::with_capacity(BATCHES); e];
    let mut link = vec![Vec::with_capacity(BATCHES); e];
    let mut two = vec![Vec::with_capacity(BATCHES); e];
    let mut conn = vec![Vec::with_capacity(BATCHES); e];
    let mut avg = Vec::with_capacity(BATCHES);
    for _ in 0..BATCHES {
        let (mut s1, mut sl, mut s2) = (vec![0.0; e], vec![0.0; e], vec![0.0; e]);
        for _ in 0..per {
            chain.sweep();
            let o: Vec<f64> = (0..e).map(|x| chain.link_value(x)).collect();
            for x in 0..e {
                s1[x] += o[x];
                sl[x] += if chain.bonds[x] { 1.0 } else { -1.0 };
                s2[x] += o[0] * o[x];
            }
        }
        let k = per as f64;
        avg.push(s1.iter().sum::<f64>() / (k * e as f64));
        for x in 0..e {
            one[x].push(s1[x] / k);
            link[x].push(sl[x] / k);
            two[x].push(s2[x] / k);
            conn[x].push(s2[x] / k - (s1[0] / k) * (s1[x] / k));
        }
    }
    Ok(SwSummary {
        params,
        sweeps: per * BATCHES,
        burn_in,
        seed,
        one_point: one.iter().map(|b| batch_estimate(b)).collect(),
        mean_one_point: batch_estimate(&avg),
        link_one_point: link.iter().map(|b| batch_estimate(b)).collect(),
        two_point: two.iter().map(|b| batch_estimate(b)).collect(),
        connected: conn.iter().map(|b| batch_estimate(b)).collect(),
    })
}

/// Connected correlator against distance along a row, with a fitted
/// correlation length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelatorEstimate {
    pub params: PottsParams,
    pub sweeps: usize,
    pub seed: u64,
    pub distances: Vec<usize>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Distances used in the fit.
    pub fit_window: (usize, usize),
    pub slope: f64,
    pub slope_stderr: f64,
    pub xi: f64,
    /// Reduced chi-square of the fit.
    pub chi2_per_dof: f64,
}

impl CorrelatorEstimate {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("distance,C,stderr\n");
        for ((d, m), e) in self.distances.iter().zip(&self.means).zip(&self.stderrs) {
            s.push_str(&format!("{},{:.10e},{:.10e}\n", d, m, e));
        }
        s
    }

    /// Slope strictly negative at three standard errors.
    pub fn xi_finite(&self) -> bool {
        self.slope + 3.0 * self.slope_stderr < 0.0
    }
}

/// `C(d)` averaged over all tiles `x` and `y = x + d` along the row.
pub fn correlation_estimate(dims: Dims, params: PottsParams, sweeps: usize, seed: u64) -> Result<CorrelatorEstimate> {
    if dims.n_h > 32 || dims.n_v > 32 {
        return Err(LoopError::Guard { what: "correlator lattice side", needed: dims.n_h.max(dims.n_v), cap: 32 });
    }
    if sweeps < BATCHES {
        return Err(LoopError::Precondition(format!("need at least {} sweeps", BATCHES)));
    }
    let mut chain = SwChain::new(dims, params, seed)?;
    let burn_in = (sweeps / 10).max(100);
    for _ in 0..burn_in {
        chain.sweep();
    }
    let dmax = dims.n_h / 2;
    let per = sweeps / BATCHES;
    let sites = dims.sites() as f64;
    let mut batches: Vec<Vec<f64>> = vec![Vec::with_capacity(BATCHES); dmax + 1];
    for _ in 0..BATCHES {
        let mut mean_o = 0.0;
        let mut pair = vec![0.0; dmax + 1];
        for _ in 0..per {
            chain.sweep();
            let o: Vec<f64> = (0..dims.sites()).map(|x| chain.link_value(x)).collect();
            mean_o += o.iter().sum::<f64>() / sites;
            for (d, p) in pair.iter_mut().enumerate() {
                let mut acc = 0.0;
                for r in 0..dims.n_v {
                    for c in 0..dims.n_h {
                        acc += o[dims.site(r, c)] * o[dims.site(r, (c + d) % dims.n_h)];
                    }
                }
                *p += acc / sites;
            }
        }
        let k = per as f64;
        let m = mean_o / k;
        for d in 0..=dmax {
            batches[d].push(pair[d] / k - m * m);
        }
    }
    let est: Vec<Estimate> = batches.iter().map(|b| batch_estimate(b)).collect();
    let means: Vec<f64> = est.iter().map(|e| e.mean).collect();
    let stderrs: Vec<f64> = est.iter().map(|e| e.stderr).collect();
    // Fit log|C| on the decaying window: from distance 1 until the signal
    // drops below twice its error.
    let mut hi = 1;
    while hi < dmax && means[hi + 1].abs() > 2.0 * stderrs[hi + 1] && means[hi + 1].abs() < means[hi].abs() {
        hi += 1;
    }
    let (slope, slope_stderr, chi2) = weighted_log_fit(&means, &stderrs, 1, hi);
    Ok(CorrelatorEstimate {
        params,
        sweeps: per * BATCHES,
        seed,
        distances: (0..=dmax).collect(),
        means,
        stderrs,
        fit_window: (1, hi),
        slope,
        slope_stderr,
        xi: if slope < 0.0 { -1.0 / slope } else { f64::INFINITY },
        chi2_per_dof: chi2,
    })
}

/// Weighted least squares of `ln|C(d)|` against `d` over `lo..=hi`.
fn weighted_log_fit(means: &[f64], errs: &[f64], lo: usize, hi: usize) -> (f64, f64, f64) {
    if hi <= lo {
        return (f64::NAN, f64::INFINITY, f64::NAN);
    }
    let pts: Vec<(f64, f64, f64)> = (lo..=hi)
        .map(|d| {
            let y = means[d].abs().ln();
            let s = (errs[d] / means[d].abs()).max(1e-12);
            (d as f64, y, 1.0 / (s * s))
        })
        .collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let sx: f64 = pts.iter().map(|p| p.2 * p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.2 * p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.2 * p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * p.0 * p.1).sum();
    let det = sw * sxx - sx * sx;
    let slope = (sw * sxy - sx * sy) / det;
    let icpt = (sy - slope * sx) / sw;
    let chi2: f64 = pts.iter().map(|p| p.2 * (p.1 - icpt - slope * p.0).powi(2)).sum();
    let dof = pts.len().saturating_sub(2).max(1) as f64;
    (slope, (sw / det).sqrt(), chi2 / dof)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn net_lattice_is_four_regular() {
        let net = NetLattice::new(Dims::torus(4, 4).unwrap()).unwrap();
        assert_eq!(net.n_vertices(), 8);
        assert_eq!(net.n_edges(), 16);
        assert!(net.degrees().iter().all(|&d| d == 4));
        assert!(NetLattice::new(Dims::open(4, 4).unwrap()).is_err());
    }

    #[test]
    fn empty_and_full_bond_sets() {
        let d = Dims::torus(4, 2).unwrap();
        let net = NetLattice::new(d).unwrap();
        let empty = bonds_to_loops(d, 0, BondConvention::EvenZero);
        let full = bonds_to_loops(d, (1 << 8) - 1, BondConvention::EvenZero);
        for s in 0..8 {
            assert_eq!(empty.tiles()[s] + full.tiles()[s], 1);
        }
        let cc = cluster_count(&net, 0);
        assert_eq!((cc.components, cc.cycles), (4, 0));
        assert_eq!(trace_loops(&empty).closed_loops.len(), 4);
    }

    #[test]
    fn self_dual_point() {
        let p = PottsParams::self_dual(16).unwrap();
        assert!((p.v() - 4.0).abs() < 1e-12);
        assert!(p.is_self_dual());
        assert!(PottsParams::new(1, 0.3).is_err());
    }

    #[test]
    fn infinite_temperature_gives_minus_one() {
        let d = Dims::torus(4, 4).unwrap();
        let p = PottsParams::new(16, 0.0).unwrap();
        let s = sw_sample(d, p, 3200, 10, 1).unwrap();
        let e = s.mean_one_point;
        assert!((e.mean + 1.0).abs() < 3.0 * e.stderr, "{:?}", e);
    }

    #[test]
    fn sampler_is_deterministic() {
        let d = Dims::torus(4, 4).unwrap();
        let p = PottsParams::self_dual(16).unwrap();
        let a = serde_json::to_string(&sw_sample(d, p, 64, 4, 9).unwrap()).unwrap();
        let b = serde_json::to_string(&sw_sample(d, p, 64, 4, 9).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
