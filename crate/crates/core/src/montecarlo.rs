//! Monte Carlo estimators over independent trajectories.
//!
//! Trajectory r uses RNG stream r under the plan seed, and per-run
//! observations are collected in index order, so results do not depend on
//! the worker count.

use crate::asymptotics::{density, green, omega, wick_moment, MacroPoint};
use crate::dynamics::{run_observed, SimState};
use crate::error::{Error, Result};
use crate::lattice::{count_of, LozengePattern};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_BATCHES: usize = 20;
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LevelConvention {
    /// ℓ = 2⌊Nη⌋ − 1: level with ⌊Nη⌋ particles and a = −1/2.
    #[default]
    Paired,
    /// ℓ = ⌊Nη⌋ on the sequential level index.
    Sequential,
}

impl LevelConvention {
    pub fn level(self, n_scale: usize, eta: f64) -> usize {
        let n = (n_scale as f64 * eta).floor() as usize;
        match self {
            LevelConvention::Paired => (2 * n).saturating_sub(1).max(1),
            LevelConvention::Sequential => n.max(1),
        }
    }

    /// Level count per unit η, echoed in manifests.
    pub fn scale_factor(self) -> f64 {
        match self {
            LevelConvention::Paired => 2.0,
            LevelConvention::Sequential => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationPlan {
    pub n_scale: usize,
    pub tau: f64,
    /// (ν, η) pairs.
    pub probes: Vec<(f64, f64)>,
    pub runs: usize,
    pub seed: u64,
    #[serde(default = "default_batches")]
    pub batches: usize,
}

fn default_batches() -> usize {
    DEFAULT_BATCHES
}

impl ObservationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_scale == 0 {
            return Err(Error::InvalidArgument("N must be >= 1".into()));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {}", self.tau)));
        }
        if self.runs < 100 {
            return Err(Error::InsufficientRuns(format!("need at least 100 runs, got {}", self.runs)));
        }
        if self.batches < DEFAULT_BATCHES || self.runs < 2 * self.batches {
            return Err(Error::InsufficientRuns(format!(
                "need >= {DEFAULT_BATCHES} batches of >= 2 runs (runs {}, batches {})",
                self.runs, self.batches
            )));
        }
        for &(nu, eta) in &self.probes {
            let p = MacroPoint::new(nu, eta, self.tau);
            if !p.in_domain() {
                return Err(Error::OutOfDomain(format!("probe (nu={nu}, eta={eta}) at tau={}", self.tau)));
            }
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.n_scale as f64 * self.tau
    }

    pub fn lattice_probes(&self, conv: LevelConvention) -> Vec<(i64, usize)> {
        self.probes
            .iter()
            .map(|&(nu, eta)| ((self.n_scale as f64 * nu).floor() as i64, conv.level(self.n_scale, eta)))
            .collect()
    }

    pub fn cutoff(&self) -> usize {
        [LevelConvention::Paired, LevelConvention::Sequential]
            .iter()
            .flat_map(|&c| self.lattice_probes(c))
            .map(|p| p.1)
            .max()
            .unwrap_or(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
    pub runs: usize,
    pub order: usize,
}

/// Mean of `xs` with a batch-means standard error over contiguous batches.
pub fn batch_mean(xs: &[f64], batches: usize) -> Result<(f64, f64)> {
    if batches < 2 || xs.len() < 2 * batches {
        return Err(Error::InsufficientRuns(format!("{} samples for {batches} batches", xs.len())));
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let size = xs.len() / batches;
    let bm: Vec<f64> = (0..batches)
        .map(|b| {
            let hi = if b + 1 == batches { xs.len() } else { (b + 1) * size };
            let chunk = &xs[b * size..hi];
            chunk.iter().sum::<f64>() / chunk.len() as f64
        })
        .collect();
    let bbar = bm.iter().sum::<f64>() / batches as f64;
    let var = bm.iter().map(|v| (v - bbar) * (v - bbar)).sum::<f64>() / (batches - 1) as f64;
    Ok((mean, (var / batches as f64).sqrt()))
}

/// Per-run observation matrix, rows in trajectory order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub columns: usize,
    pub rows: Vec<Vec<f64>>,
}

impl Samples {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.columns).map(|j| self.rows.iter().map(|r| r[j]).sum::<f64>() / self.rows.len() as f64).collect()
    }
}

/// Runs `runs` trajectories of the cutoff-M system to time `t` in parallel
/// and records `observe` at time `t`.
pub fn sample_trajectories<F>(m_max: usize, t: f64, runs: usize, seed: u64, observe: F) -> Result<Samples>
where
    F: Fn(&SimState) -> Vec<f64> + Sync,
{
    let rows = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut out = Vec::new();
            run_observed(m_max, seed, r, &[t], t, |_, st| out = observe(st))?;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let columns = rows.first().map_or(0, |r| r.len());
    Ok(Samples { columns, rows })
}

/// Heights at the plan probes under both level conventions: columns
/// 0..p are paired, p..2p sequential.
pub fn sample_heights(plan: &ObservationPlan) -> Result<Samples> {
    plan.validate()?;
    let mut probes = plan.lattice_probes(LevelConvention::Paired);
    probes.extend(plan.lattice_probes(LevelConvention::Sequential));
    sample_trajectories(plan.cutoff(), plan.time(), plan.runs, plan.seed, |st| {
        probes.iter().map(|&(x, l)| st.height(x, l) as f64).collect()
    })
}

/// Sample-centered cross-moment E[Π (h_j − h̄_j)] over the listed columns.
pub fn central_moment(samples: &Samples, cols: &[usize], batches: usize) -> Result<MomentEstimate> {
    if cols.is_empty() {
        return Err(Error::InvalidArgument("moment of order 0".into()));
    }
    let means = samples.means();
    let prods: Vec<f64> = samples.rows.iter().map(|r| cols.iter().map(|&j| r[j] - means[j]).product()).collect();
    let (value, std_error) = batch_mean(&prods, batches)?;
    Ok(MomentEstimate { value, std_error, runs: prods.len(), order: cols.len() })
}

pub fn estimate_central_moments(plan: &ObservationPlan, tuples: &[Vec<usize>]) -> Result<Vec<MomentEstimate>> {
    let s = sample_heights(plan)?;
    tuples.iter().map(|c| central_moment(&s, c, plan.batches)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub x: i64,
    pub nu: f64,
    pub frequency: f64,
    pub std_error: f64,
    /// arg Ω/π at (x/N, n/N, τ) when inside the liquid region.
    pub predicted: Option<f64>,
}

pub fn estimate_density_profile(
    n_scale: usize,
    tau: f64,
    level: usize,
    xs: std::ops::RangeInclusive<i64>,
    runs: usize,
    seed: u64,
) -> Result<Vec<DensityRow>> {
    if level == 0 {
        return Err(Error::InvalidArgument("levels start at 1".into()));
    }
    let xs: Vec<i64> = xs.collect();
    let t = n_scale as f64 * tau;
    let s = sample_trajectories(level, t, runs, seed, |st| {
        xs.iter().map(|&x| st.occupied(x, level) as u8 as f64).collect()
    })?;
    let eta = count_of(level) as f64 / n_scale as f64;
    xs.iter()
        .enumerate()
        .map(|(j, &x)| {
            let (frequency, std_error) = batch_mean(&s.column(j), DEFAULT_BATCHES)?;
            let nu = x as f64 / n_scale as f64;
            // wall column uses the ν → 0⁺ limit
            let p = MacroPoint::new(nu.max(1e-9), eta, tau);
            let predicted = if p.in_domain() { density(&p).ok() } else { None };
            Ok(DensityRow { x, nu, frequency, std_error, predicted })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    /// All listed (position, level) sites occupied.
    Occupied(Vec<(i64, usize)>),
    Lozenges(LozengePattern),
}

impl Observable {
    pub fn max_level(&self) -> usize {
        match self {
            Observable::Occupied(v) => v.iter().map(|p| p.1).max().unwrap_or(1),
            Observable::Lozenges(p) => p.max_level(),
        }
    }

    fn holds(&self, st: &SimState) -> bool {
        match self {
            Observable::Occupied(v) => v.iter().all(|&(x, l)| st.occupied(x, l)),
            Observable::Lozenges(p) => p.occurs_in(&st.configuration()).unwrap_or(false),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub frequency: f64,
    pub std_error: f64,
    pub runs: usize,
}

pub fn estimate_frequencies(
    observables: &[Observable],
    t: f64,
    runs: usize,
    seed: u64,
) -> Result<Vec<FrequencyEstimate>> {
    let m = observables.iter().map(|o| o.max_level()).max().unwrap_or(1);
    let s = sample_trajectories(m, t, runs, seed, |st| observables.iter().map(|o| o.holds(st) as u8 as f64).collect())?;
    (0..observables.len())
        .map(|j| {
            let (frequency, std_error) = batch_mean(&s.column(j), DEFAULT_BATCHES)?;
            Ok(FrequencyEstimate { frequency, std_error, runs })
        })
        .collect()
}

pub fn estimate_lozenge_frequencies(
    patterns: &[LozengePattern],
    t: f64,
    runs: usize,
    seed: u64,
) -> Result<Vec<FrequencyEstimate>> {
    let obs: Vec<Observable> = patterns.iter().cloned().map(Observable::Lozenges).collect();
    estimate_frequencies(&obs, t, runs, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub nu: f64,
    pub eta: f64,
    pub x: i64,
    pub level: usize,
    pub alt_level: usize,
    pub omega: Complex64,
    pub density: f64,
    /// One-point variance; diagnostic only.
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub i: usize,
    pub j: usize,
    pub nu1: f64,
    pub eta1: f64,
    pub nu2: f64,
    pub eta2: f64,
    pub cov_hat: f64,
    pub se: f64,
    pub prediction: f64,
    pub zscore: f64,
    pub ratio: f64,
    pub alt_cov_hat: f64,
    pub alt_se: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub probes: Vec<usize>,
    pub value: f64,
    pub se: f64,
    pub prediction: f64,
    /// Pairing sum built from the empirical covariances.
    pub empirical_pairing: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GffReport {
    pub plan: ObservationPlan,
    pub cutoff: usize,
    pub level_scale_factor: f64,
    pub alt_level_scale_factor: f64,
    pub probes: Vec<ProbeRow>,
    pub pairs: Vec<PairRow>,
    pub odd: Vec<MomentRow>,
    pub fourth: Option<MomentRow>,
    /// Least-squares ratio Σ Ĉov·𝒢 / Σ 𝒢² over all pairs.
    pub fitted_ratio: f64,
}

pub const COV_REL_TOL: f64 = 0.3;
pub const FOURTH_REL_TOL: f64 = 0.35;

pub fn gff_comparison_report(plan: &ObservationPlan) -> Result<GffReport> {
    plan.validate()?;
    let p = plan.probes.len();
    if p < 2 {
        return Err(Error::InvalidArgument("need at least two probes".into()));
    }
    let s = sample_heights(plan)?;
    gff_report_from_samples(plan, &s)
}

pub fn gff_report_from_samples(plan: &ObservationPlan, s: &Samples) -> Result<GffReport> {
    let p = plan.probes.len();
    let b = plan.batches;
    let oms: Vec<Complex64> =
        plan.probes.iter().map(|&(nu, eta)| omega(&MacroPoint::new(nu, eta, plan.tau))).collect::<Result<_>>()?;
    let lat = plan.lattice_probes(LevelConvention::Paired);
    let alt = plan.lattice_probes(LevelConvention::Sequential);
    let probes = (0..p)
        .map(|i| {
            Ok(ProbeRow {
                nu: plan.probes[i].0,
                eta: plan.probes[i].1,
                x: lat[i].0,
                level: lat[i].1,
                alt_level: alt[i].1,
                omega: oms[i],
                density: oms[i].arg() / std::f64::consts::PI,
                variance: central_moment(s, &[i, i], b)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    let mut cov = vec![vec![0.0; p]; p];
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..p {
        for j in i + 1..p {
            let m = central_moment(s, &[i, j], b)?;
            let a = central_moment(s, &[p + i, p + j], b)?;
            let pred = green(oms[i], oms[j])?;
            cov[i][j] = m.value;
            cov[j][i] = m.value;
            num += m.value * pred;
            den += pred * pred;
            let diff = (m.value - pred).abs();
            pairs.push(PairRow {
                i,
                j,
                nu1: plan.probes[i].0,
                eta1: plan.probes[i].1,
                nu2: plan.probes[j].0,
                eta2: plan.probes[j].1,
                cov_hat: m.value,
                se: m.std_error,
                prediction: pred,
                zscore: (m.value - pred) / m.std_error,
                ratio: m.value / pred,
                alt_cov_hat: a.value,
                alt_se: a.std_error,
                pass: diff <= (Z_THRESHOLD * m.std_error).max(COV_REL_TOL * pred.abs()),
            });
        }
    }
    let mut odd = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            for k in j + 1..p {
                let m = central_moment(s, &[i, j, k], b)?;
                odd.push(MomentRow {
                    probes: vec![i, j, k],
                    value: m.value,
                    se: m.std_error,
                    prediction: 0.0,
                    empirical_pairing: 0.0,
                    pass: m.value.abs() <= Z_THRESHOLD * m.std_error,
                });
            }
        }
    }
    let fourth = if p >= 4 {
        let m = central_moment(s, &[0, 1, 2, 3], b)?;
        let pred = wick_moment(&oms[..4])?;
        let emp = cov[0][1] * cov[2][3] + cov[0][2] * cov[1][3] + cov[0][3] * cov[1][2];
        Some(MomentRow {
            probes: vec![0, 1, 2, 3],
            value: m.value,
            se: m.std_error,
            prediction: pred,
            empirical_pairing: emp,
            pass: (m.value - pred).abs() <= (Z_THRESHOLD * m.std_error).max(FOURTH_REL_TOL * pred.abs()),
        })
    } else {
        None
    };
    Ok(GffReport {
        plan: plan.clone(),
        cutoff: plan.cutoff(),
        level_scale_factor: LevelConvention::Paired.scale_factor(),
        alt_level_scale_factor: LevelConvention::Sequential.scale_factor(),
        probes,
        pairs,
        odd,
        fourth,
        fitted_ratio: num / den,
    })
}
