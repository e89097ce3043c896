//! Random block circuits: layer sampling, Schrodinger and Heisenberg
//! evolution, and deterministic ensemble averaging.
//!
//! Realization `i` draws its layers from a ChaCha8 stream keyed by the master
//! seed with stream number `i`. The state and the operator of a realization
//! consume the same layers. Ensemble sums are integers, so the result does not
//! depend on how realizations are scheduled across threads.

use crate::analysis::{self, EntropyFitPolicy, FrontFitPolicy, OtocField};
use crate::gate::{window_sites, Boundary, EntropyUnit, Gate};
use crate::graph::GraphSpec;
use crate::pauli::{Letter, PauliString};
use crate::tableau::{Region, StabilizerTableau};
use crate::{Error, Result};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementPolicy {
    /// Exactly uniform over all sets of disjoint windows.
    #[default]
    Uniform,
    /// Sequential uniform starts with rejection of overlaps, restarting the
    /// layer after `1000 r` consecutive rejections.
    Rejection,
}

impl FromStr for PlacementPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "rejection" => Ok(Self::Rejection),
            other => Err(format!("unknown placement policy '{other}'")),
        }
    }
}

impl fmt::Display for PlacementPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Rejection => "rejection",
        })
    }
}

/// Initial operator `initial` on `site`, probed by `probe` on every site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtocProbe {
    pub site: usize,
    pub initial: Letter,
    pub probe: Letter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub chain_length: usize,
    pub block: GraphSpec,
    pub alpha: f64,
    pub boundary: Boundary,
    /// `None` picks the depth automatically.
    pub layers: Option<usize>,
    pub realizations: usize,
    pub master_seed: u64,
    pub log_base: EntropyUnit,
    pub otoc_probe: OtocProbe,
    pub entropy_region: Region,
    pub placement: PlacementPolicy,
}

/// `round(alpha * floor(N / n))`, halves rounded up.
pub fn blocks_per_layer(chain_length: usize, width: usize, alpha: f64) -> usize {
    (alpha * (chain_length / width) as f64).round() as usize
}

/// Site `ceil(N/2)` in 1-indexed terms.
pub fn default_probe_site(chain_length: usize) -> usize {
    chain_length.div_ceil(2) - 1
}

impl EnsembleConfig {
    pub fn new(block: GraphSpec, chain_length: usize) -> Self {
        Self {
            chain_length,
            block,
            alpha: 0.5,
            boundary: Boundary::Periodic,
            layers: None,
            realizations: 200,
            master_seed: 0,
            log_base: EntropyUnit::Bits,
            otoc_probe: OtocProbe {
                site: default_probe_site(chain_length.max(1)),
                initial: Letter::X,
                probe: Letter::Y,
            },
            entropy_region: Region::half_chain(chain_length),
            placement: PlacementPolicy::Uniform,
        }
    }

    pub fn blocks_per_layer(&self) -> usize {
        blocks_per_layer(self.chain_length, self.block.n_vertices(), self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        let n_sites = self.chain_length;
        let width = self.block.n_vertices();
        let bad = |field: &'static str, reason: String| Err(Error::Config { field, reason });
        if n_sites < 2 {
            return bad("chain_length", format!("need at least 2 sites, got {n_sites}"));
        }
        if width > n_sites {
            return bad("block", format!("{width}-vertex block does not fit {n_sites} sites"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha", format!("must lie in (0, 1], got {}", self.alpha));
        }
        let r = self.blocks_per_layer();
        if r == 0 {
            return bad("alpha", format!("alpha={} leaves no block per layer", self.alpha));
        }
        if r * width > n_sites {
            return Err(Error::ImpossiblePlacement { blocks: r, width, n: n_sites });
        }
        if self.realizations == 0 {
            return bad("realizations", "must be at least 1".into());
        }
        let p = self.otoc_probe;
        if p.site >= n_sites {
            return bad("otoc_site", format!("site {} outside the chain", p.site + 1));
        }
        if p.initial == Letter::I || p.probe == Letter::I {
            return bad("otoc_letters", "initial and probe letters must be non-identity".into());
        }
        let region = self.entropy_region;
        if region.len == 0 || region.len >= n_sites || region.start >= n_sites {
            return bad("region", format!("invalid region of length {} on {n_sites} sites", region.len));
        }
        if self.boundary == Boundary::Open && region.start + region.len > n_sites {
            return bad("region", "cannot wrap with open boundaries".into());
        }
        Ok(())
    }
}

/// Start sites (0-indexed) of the disjoint windows of one layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerPlacement {
    pub starts: Vec<usize>,
}

pub fn realization_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

const MAX_REJECTION_RESTARTS: usize = 10_000;

pub fn sample_layer(cfg: &EnsembleConfig, rng: &mut impl Rng) -> Result<LayerPlacement> {
    let n_sites = cfg.chain_length;
    let width = cfg.block.n_vertices();
    let r = cfg.blocks_per_layer();
    if r * width > n_sites {
        return Err(Error::ImpossiblePlacement { blocks: r, width, n: n_sites });
    }
    match cfg.placement {
        PlacementPolicy::Uniform => Ok(sample_uniform(n_sites, width, r, cfg.boundary, rng)),
        PlacementPolicy::Rejection => sample_rejection(n_sites, width, r, cfg.boundary, rng),
    }
}

// A configuration is a sequence of r blocks and f = N - r n free sites. On a
// line every sequence is one configuration. On a ring, fixing the first window
// at a uniform offset and ordering the rest behind it covers each
// configuration exactly r times.
fn sample_uniform(n_sites: usize, width: usize, r: usize, boundary: Boundary, rng: &mut impl Rng) -> LayerPlacement {
    let free = n_sites - r * width;
    let (mut cursor, rest, mut starts) = match boundary {
        Boundary::Open => (0, r, Vec::with_capacity(r)),
        Boundary::Periodic => {
            let offset = rng.random_range(0..n_sites);
            (offset + width, r - 1, vec![offset])
        }
    };
    let mut slots = index::sample(rng, rest + free, rest).into_vec();
    slots.sort_unstable();
    let mut next = slots.iter().peekable();
    for item in 0..rest + free {
        if next.peek() == Some(&&item) {
            next.next();
            starts.push(cursor % n_sites);
            cursor += width;
        } else {
            cursor += 1;
        }
    }
    LayerPlacement { starts }
}

fn sample_rejection(
    n_sites: usize,
    width: usize,
    r: usize,
    boundary: Boundary,
    rng: &mut impl Rng,
) -> Result<LayerPlacement> {
    let span = match boundary {
        Boundary::Periodic => n_sites,
        Boundary::Open => n_sites - width + 1,
    };
    let mut occupied = vec![false; n_sites];
    for _ in 0..MAX_REJECTION_RESTARTS {
        occupied.iter_mut().for_each(|o| *o = false);
        let mut starts = Vec::with_capacity(r);
        let mut rejections = 0;
        while starts.len() < r && rejections < 1000 * r {
            let s = rng.random_range(0..span);
            if (0..width).any(|k| occupied[(s + k) % n_sites]) {
                rejections += 1;
                continue;
            }
            (0..width).for_each(|k| occupied[(s + k) % n_sites] = true);
            starts.push(s);
            rejections = 0;
        }
        if starts.len() == r {
            return Ok(LayerPlacement { starts });
        }
    }
    Err(Error::ImpossiblePlacement { blocks: r, width, n: n_sites })
}

pub fn evolve_state(cfg: &EnsembleConfig, state: &mut StabilizerTableau, layer: &LayerPlacement) -> Result<()> {
    layer.starts.iter().try_for_each(|&s| state.apply_block(&cfg.block, s, cfg.boundary))
}

/// `W -> L† W L` for the layer unitary `L`.
pub fn evolve_operator(cfg: &EnsembleConfig, w: &mut PauliString, layer: &LayerPlacement) -> Result<()> {
    layer.starts.iter().try_for_each(|&s| w.conjugate_block(&cfg.block, s, cfg.boundary))
}

pub fn initial_operator(cfg: &EnsembleConfig) -> Result<PauliString> {
    PauliString::single(cfg.chain_length, cfg.otoc_probe.site, cfg.otoc_probe.initial)
}

/// Distance along the chain, wrapping when periodic.
pub fn site_distance(a: usize, b: usize, n_sites: usize, boundary: Boundary) -> usize {
    let d = a.abs_diff(b);
    match boundary {
        Boundary::Periodic => d.min(n_sites - d),
        Boundary::Open => d,
    }
}

fn check_light_cone(cfg: &EnsembleConfig, w: &PauliString, t: usize) -> Result<()> {
    let radius = t * (cfg.block.n_vertices() - 1);
    let n_sites = cfg.chain_length;
    if 2 * radius >= n_sites {
        return Ok(());
    }
    for (k, mut word) in w.support_mask().enumerate() {
        while word != 0 {
            let q = k * 64 + word.trailing_zeros() as usize;
            word &= word - 1;
            let d = site_distance(q, cfg.otoc_probe.site, n_sites, cfg.boundary);
            if d > radius {
                return Err(Error::Invariant(format!(
                    "operator support at site {} is {d} sites from the probe after {t} layers (cone radius {radius})",
                    q + 1
                )));
            }
        }
    }
    Ok(())
}

/// Half-chain (or configured region) entropy in bits after each layer,
/// starting with `t = 0`.
pub fn run_entropy_realization(cfg: &EnsembleConfig, layers: usize, index: u64) -> Result<Vec<usize>> {
    let mut rng = realization_rng(cfg.master_seed, index);
    let mut state = StabilizerTableau::new_zero_state(cfg.chain_length)?;
    let mut series = Vec::with_capacity(layers + 1);
    series.push(state.entropy_bits(cfg.entropy_region)?);
    for _ in 0..layers {
        let layer = sample_layer(cfg, &mut rng)?;
        evolve_state(cfg, &mut state, &layer)?;
        series.push(state.entropy_bits(cfg.entropy_region)?);
    }
    Ok(series)
}

/// Binary OTOC rows `C(x, t)` for `t = 0..=layers`. Layer `t` of the stream is
/// conjugated outermost-last, i.e. `W(t) = L_t† W(t-1) L_t`; since layers are
/// i.i.d. this has the law of the forward circuit.
pub fn run_otoc_realization(cfg: &EnsembleConfig, layers: usize, index: u64) -> Result<Vec<Vec<u8>>> {
    let mut rng = realization_rng(cfg.master_seed, index);
    let mut w = initial_operator(cfg)?;
    let row = |w: &PauliString| (0..cfg.chain_length).map(|x| w.otoc_indicator(x, cfg.otoc_probe.probe)).collect();
    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(layers + 1);
    rows.push(row(&w));
    for t in 1..=layers {
        let layer = sample_layer(cfg, &mut rng)?;
        evolve_operator(cfg, &mut w, &layer)?;
        check_light_cone(cfg, &w, t)?;
        rows.push(row(&w));
    }
    Ok(rows)
}

/// Integer sums over realizations.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Sums {
    entropy: Vec<u64>,
    entropy_sq: Vec<u64>,
    otoc: Vec<u64>,
}

impl Sums {
    fn zeros(layers: usize, n_sites: usize) -> Self {
        Self { entropy: vec![0; layers + 1], entropy_sq: vec![0; layers + 1], otoc: vec![0; (layers + 1) * n_sites] }
    }

    fn merge(mut self, other: Sums) -> Sums {
        let add = |a: &mut Vec<u64>, b: Vec<u64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.entropy, other.entropy);
        add(&mut self.entropy_sq, other.entropy_sq);
        add(&mut self.otoc, other.otoc);
        self
    }
}

fn accumulate_realization(cfg: &EnsembleConfig, layers: usize, index: u64, sums: &mut Sums) -> Result<()> {
    let n_sites = cfg.chain_length;
    let mut rng = realization_rng(cfg.master_seed, index);
    let mut state = StabilizerTableau::new_zero_state(n_sites)?;
    let mut w = initial_operator(cfg)?;
    let record = |t: usize, state: &StabilizerTableau, w: &PauliString, sums: &mut Sums| -> Result<()> {
        let s = state.entropy_bits(cfg.entropy_region)? as u64;
        sums.entropy[t] += s;
        sums.entropy_sq[t] += s * s;
        let row = &mut sums.otoc[t * n_sites..(t + 1) * n_sites];
        for (k, mut word) in w.anticommutation_mask(cfg.otoc_probe.probe).enumerate() {
            while word != 0 {
                row[k * 64 + word.trailing_zeros() as usize] += 1;
                word &= word - 1;
            }
        }
        Ok(())
    };
    record(0, &state, &w, sums)?;
    for t in 1..=layers {
        let layer = sample_layer(cfg, &mut rng)?;
        evolve_state(cfg, &mut state, &layer)?;
        evolve_operator(cfg, &mut w, &layer)?;
        check_light_cone(cfg, &w, t)?;
        record(t, &state, &w, sums)?;
    }
    Ok(())
}

fn run_fixed(cfg: &EnsembleConfig, layers: usize, realizations: usize) -> Result<Sums> {
    let n_sites = cfg.chain_length;
    (0..realizations as u64)
        .into_par_iter()
        .try_fold(
            || Sums::zeros(layers, n_sites),
            |mut sums, i| accumulate_realization(cfg, layers, i, &mut sums).map(|_| sums),
        )
        .try_reduce(|| Sums::zeros(layers, n_sites), |a, b| Ok(a.merge(b)))
}

/// Averaged diagnostics of an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub config: EnsembleConfig,
    pub layers: usize,
    pub realizations: usize,
    /// False when automatic depth selection hit its cap first.
    pub depth_converged: bool,
    entropy_sum: Vec<u64>,
    entropy_sq_sum: Vec<u64>,
    otoc_sum: Vec<u64>,
}

impl RunResult {
    /// Mean entropy per layer in the configured units.
    pub fn entropy_mean(&self) -> Vec<f64> {
        let r = self.realizations as f64;
        let unit = self.config.log_base.per_bit();
        self.entropy_sum.iter().map(|&s| s as f64 / r * unit).collect()
    }

    pub fn entropy_mean_bits(&self) -> Vec<f64> {
        let r = self.realizations as f64;
        self.entropy_sum.iter().map(|&s| s as f64 / r).collect()
    }

    /// Sample variance across realizations, in squared units.
    pub fn entropy_variance(&self) -> Vec<f64> {
        let r = self.realizations as f64;
        let unit = self.config.log_base.per_bit();
        self.entropy_sum
            .iter()
            .zip(&self.entropy_sq_sum)
            .map(|(&s, &sq)| {
                if self.realizations < 2 {
                    return 0.0;
                }
                let (s, sq) = (s as f64, sq as f64);
                ((sq - s * s / r) / (r - 1.0)).max(0.0) * unit * unit
            })
            .collect()
    }

    pub fn otoc_mean(&self, t: usize, x: usize) -> f64 {
        self.otoc_sum[t * self.config.chain_length + x] as f64 / self.realizations as f64
    }

    pub fn otoc_field(&self) -> OtocField {
        let n = self.config.chain_length;
        let r = self.realizations as f64;
        let rows = self.otoc_sum.chunks_exact(n).map(|row| row.iter().map(|&c| c as f64 / r).collect()).collect();
        OtocField { n_sites: n, rows }
    }

    /// Raw integer sums, exposed for exact comparisons.
    pub fn entropy_sums(&self) -> &[u64] {
        &self.entropy_sum
    }

    pub fn otoc_sums(&self) -> &[u64] {
        &self.otoc_sum
    }

    pub fn entropy_csv(&self) -> String {
        let mut out = String::from("t,S_mean,S_var,R\n");
        for (t, (m, v)) in self.entropy_mean().iter().zip(self.entropy_variance()).enumerate() {
            out.push_str(&format!("{t},{m},{v},{}\n", self.realizations));
        }
        out
    }

    pub fn otoc_csv(&self) -> String {
        let n = self.config.chain_length;
        let mut out = String::from("t,x,C_mean\n");
        for t in 0..=self.layers {
            for x in 0..n {
                out.push_str(&format!("{t},{},{}\n", x + 1, self.otoc_mean(t, x)));
            }
        }
        out
    }
}

/// Cap for automatic depth selection, in units of the chain length.
const AUTO_DEPTH_CAP: usize = 40;
const PILOT_REALIZATIONS: usize = 16;
const SATURATION_MARGIN: usize = 20;

/// Both stopping rules for automatic depth: the entropy tail is a plateau
/// reached at least 20 layers before the tail window, and the OTOC front has
/// reached `0.4 N`.
pub fn depth_sufficient(
    entropy_bits: &[f64],
    field: &OtocField,
    center: usize,
    boundary: Boundary,
    n_sites: usize,
) -> bool {
    let policy = EntropyFitPolicy::default();
    if !analysis::plateau_reached(entropy_bits, EntropyUnit::Bits, &policy, SATURATION_MARGIN) {
        return false;
    }
    let front_policy = FrontFitPolicy::default();
    let target = front_policy.max_fraction * n_sites as f64;
    match analysis::extract_front(field, center, boundary, front_policy.threshold) {
        Ok(d) => d.iter().any(|&x| x >= target),
        Err(_) => false,
    }
}

fn result_from(cfg: &EnsembleConfig, layers: usize, realizations: usize, sums: Sums, converged: bool) -> RunResult {
    RunResult {
        config: cfg.clone(),
        layers,
        realizations,
        depth_converged: converged,
        entropy_sum: sums.entropy,
        entropy_sq_sum: sums.entropy_sq,
        otoc_sum: sums.otoc,
    }
}

fn sufficient(result: &RunResult) -> bool {
    let cfg = &result.config;
    depth_sufficient(
        &result.entropy_mean_bits(),
        &result.otoc_field(),
        cfg.otoc_probe.site,
        cfg.boundary,
        cfg.chain_length,
    )
}

/// Average over `cfg.realizations` realizations. With `layers = None` a pilot
/// over the first realizations grows the depth by half until both stopping
/// rules hold, then the full ensemble runs at that depth (and grows further if
/// the full average still falls short).
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<RunResult> {
    cfg.validate()?;
    if let Some(layers) = cfg.layers {
        let sums = run_fixed(cfg, layers, cfg.realizations)?;
        return Ok(result_from(cfg, layers, cfg.realizations, sums, true));
    }
    let cap = AUTO_DEPTH_CAP * cfg.chain_length;
    let grow = |t: usize| (t + t / 2).min(cap);
    let pilot_r = cfg.realizations.min(PILOT_REALIZATIONS);
    let mut layers = cfg.chain_length.max(10);
    loop {
        let pilot = result_from(cfg, layers, pilot_r, run_fixed(cfg, layers, pilot_r)?, true);
        if sufficient(&pilot) || layers >= cap {
            break;
        }
        layers = grow(layers);
    }
    loop {
        let sums = run_fixed(cfg, layers, cfg.realizations)?;
        let mut result = result_from(cfg, layers, cfg.realizations, sums, true);
        if sufficient(&result) {
            return Ok(result);
        }
        if layers >= cap {
            result.depth_converged = false;
            return Ok(result);
        }
        layers = grow(layers);
    }
}

/// `run_ensemble` on a dedicated pool of `jobs` threads.
pub fn run_ensemble_with_jobs(cfg: &EnsembleConfig, jobs: usize) -> Result<RunResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config { field: "jobs", reason: e.to_string() })?;
    pool.install(|| run_ensemble(cfg))
}

/// Gates of one layer in application order.
pub fn layer_gates(cfg: &EnsembleConfig, layer: &LayerPlacement) -> Result<Vec<Gate>> {
    let prep = cfg.block.preparation_circuit();
    let mut gates = Vec::with_capacity(prep.len() * layer.starts.len());
    for sites in layer_sites(cfg, layer)? {
        gates.extend(prep.iter().map(|g| g.map_sites(|k| sites[k])));
    }
    Ok(gates)
}

/// Window sites of every block in a layer, for inspection and tests.
pub fn layer_sites(cfg: &EnsembleConfig, layer: &LayerPlacement) -> Result<Vec<Vec<usize>>> {
    layer.starts.iter().map(|&s| window_sites(s, cfg.block.n_vertices(), cfg.chain_length, cfg.boundary)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(block: GraphSpec, n_sites: usize, alpha: f64) -> EnsembleConfig {
        EnsembleConfig { alpha, ..EnsembleConfig::new(block, n_sites) }
    }

    fn assert_disjoint(c: &EnsembleConfig, layer: &LayerPlacement) {
        let mut seen = vec![false; c.chain_length];
        for sites in layer_sites(c, layer).unwrap() {
            for q in sites {
                assert!(!seen[q], "overlap at {q}");
                seen[q] = true;
            }
        }
    }

    #[test]
    fn block_counts() {
        assert_eq!(blocks_per_layer(200, 5, 1.0), 40);
        assert_eq!(blocks_per_layer(200, 4, 0.5), 25);
        assert_eq!(blocks_per_layer(200, 6, 0.5), 17);
        assert_eq!(blocks_per_layer(500, 7, 0.5), 36);
        assert_eq!(blocks_per_layer(200, 5, 0.01), 0);
    }

    #[test]
    fn validation_names_fields() {
        let ring = GraphSpec::ring(5).unwrap();
        let err = |c: EnsembleConfig| match c.validate() {
            Err(Error::Config { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(err(cfg(ring.clone(), 200, 0.0)), "alpha");
        assert_eq!(err(cfg(ring.clone(), 200, 1.5)), "alpha");
        assert_eq!(err(cfg(ring.clone(), 200, 0.001)), "alpha");
        assert_eq!(err(cfg(ring.clone(), 4, 0.5)), "block");
        assert_eq!(err(EnsembleConfig { realizations: 0, ..cfg(ring.clone(), 200, 0.5) }), "realizations");
        assert!(cfg(ring, 200, 0.5).validate().is_ok());
    }

    #[test]
    fn full_packing_tiles_the_ring() {
        let c = cfg(GraphSpec::ring(5).unwrap(), 10, 1.0);
        let mut rng = realization_rng(3, 0);
        for policy in [PlacementPolicy::Uniform, PlacementPolicy::Rejection] {
            let c = EnsembleConfig { placement: policy, ..c.clone() };
            for _ in 0..200 {
                let layer = sample_layer(&c, &mut rng).unwrap();
                assert_eq!(layer.starts.len(), 2);
                let mut s = layer.starts.clone();
                s.sort();
                assert_eq!(s[1] - s[0], 5);
            }
        }
        // uniform sampling handles dense tilings at realistic sizes
        let big = cfg(GraphSpec::star(5, 1).unwrap(), 200, 1.0);
        let layer = sample_layer(&big, &mut rng).unwrap();
        assert_eq!(layer.starts.len(), 40);
        assert_disjoint(&big, &layer);
    }

    #[test]
    fn open_boundary_keeps_windows_inside() {
        let mut c = cfg(GraphSpec::ring(5).unwrap(), 6, 0.5);
        c.boundary = Boundary::Open;
        c.entropy_region = Region::half_chain(6);
        let mut rng = realization_rng(1, 0);
        for policy in [PlacementPolicy::Uniform, PlacementPolicy::Rejection] {
            c.placement = policy;
            for _ in 0..500 {
                let layer = sample_layer(&c, &mut rng).unwrap();
                assert!(layer.starts.iter().all(|&s| s <= 1));
            }
        }
        let mut c = cfg(GraphSpec::path(4).unwrap(), 40, 0.5);
        c.boundary = Boundary::Open;
        for _ in 0..500 {
            let layer = sample_layer(&c, &mut rng).unwrap();
            assert_disjoint(&c, &layer);
            assert!(layer.starts.iter().all(|&s| s + 4 <= 40));
        }
    }

    #[test]
    fn random_layers_are_disjoint() {
        let mut rng = realization_rng(9, 4);
        for (n_sites, alpha) in [(200, 0.5), (37, 0.75), (23, 1.0)] {
            for policy in [PlacementPolicy::Uniform, PlacementPolicy::Rejection] {
                let c = EnsembleConfig { placement: policy, ..cfg(GraphSpec::star(4, 1).unwrap(), n_sites, alpha) };
                for _ in 0..100 {
                    let layer = sample_layer(&c, &mut rng).unwrap();
                    assert_eq!(layer.starts.len(), c.blocks_per_layer());
                    assert_disjoint(&c, &layer);
                }
            }
        }
    }

    fn chi_square_uniform(counts: &[usize]) -> f64 {
        let total: usize = counts.iter().sum();
        let expected = total as f64 / counts.len() as f64;
        counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
    }

    #[test]
    fn single_block_start_is_uniform() {
        // r = 1 at alpha = 0.05 with 20 sites and n = 4 would round to 0; use
        // 40 sites and alpha 0.1
        for policy in [PlacementPolicy::Uniform, PlacementPolicy::Rejection] {
            let c = EnsembleConfig { placement: policy, ..cfg(GraphSpec::path(4).unwrap(), 40, 0.1) };
            assert_eq!(c.blocks_per_layer(), 1);
            let mut rng = realization_rng(5, 0);
            let mut counts = vec![0usize; 40];
            for _ in 0..100_000 {
                counts[sample_layer(&c, &mut rng).unwrap().starts[0]] += 1;
            }
            // 39 degrees of freedom: mean 39, sd ~8.8
            assert!(chi_square_uniform(&counts) < 39.0 + 4.0 * 8.83, "{policy}");
        }
    }

    #[test]
    fn covered_sites_are_translation_symmetric() {
        for policy in [PlacementPolicy::Uniform, PlacementPolicy::Rejection] {
            let c = EnsembleConfig { placement: policy, ..cfg(GraphSpec::ring(5).unwrap(), 30, 0.5) };
            let mut rng = realization_rng(8, 1);
            let mut counts = vec![0usize; 30];
            for _ in 0..20_000 {
                let layer = sample_layer(&c, &mut rng).unwrap();
                counts[layer.starts[0]] += 1;
            }
            assert!(chi_square_uniform(&counts) < 29.0 + 4.0 * (58f64).sqrt(), "{policy}");
        }
    }

    #[test]
    fn disjoint_blocks_commute() {
        let c = cfg(GraphSpec::ring(5).unwrap(), 20, 0.5);
        let layer = LayerPlacement { starts: vec![0, 7] };
        let reversed = LayerPlacement { starts: vec![7, 0] };
        let mut a = StabilizerTableau::new_zero_state(20).unwrap();
        let mut b = a.clone();
        evolve_state(&c, &mut a, &layer).unwrap();
        evolve_state(&c, &mut b, &reversed).unwrap();
        assert_eq!(a, b);
        let mut empty = StabilizerTableau::new_zero_state(20).unwrap();
        evolve_state(&c, &mut empty, &LayerPlacement { starts: vec![] }).unwrap();
        assert_eq!(empty, StabilizerTableau::new_zero_state(20).unwrap());
    }

    #[test]
    fn star_block_cuts_one_bit() {
        let c = cfg(GraphSpec::star(4, 1).unwrap(), 12, 0.25);
        let mut s = StabilizerTableau::new_zero_state(12).unwrap();
        evolve_state(&c, &mut s, &LayerPlacement { starts: vec![4] }).unwrap();
        for len in 5..8 {
            assert_eq!(s.entropy_bits(Region::new(0, len)).unwrap(), 1);
        }
        assert_eq!(s.entropy_bits(Region::new(0, 4)).unwrap(), 0);
    }

    #[test]
    fn realization_series_bounds() {
        let c = cfg(GraphSpec::ring(5).unwrap(), 40, 0.5);
        assert_eq!(run_entropy_realization(&c, 0, 0).unwrap(), vec![0]);
        let s = run_entropy_realization(&c, 60, 2).unwrap();
        assert_eq!(s.len(), 61);
        assert!(s.iter().all(|&v| v <= 20));
        let rows = run_otoc_realization(&c, 60, 2).unwrap();
        let probe = c.otoc_probe.site;
        assert_eq!(probe, 19);
        assert!(rows[0].iter().enumerate().all(|(x, &v)| v == u8::from(x == probe)));
        for (t, row) in rows.iter().enumerate() {
            for (x, &v) in row.iter().enumerate() {
                if v == 1 {
                    assert!(site_distance(x, probe, 40, Boundary::Periodic) <= 4 * t);
                }
            }
        }
    }

    #[test]
    fn ensemble_matches_single_realizations() {
        let mut c = cfg(GraphSpec::star(4, 1).unwrap(), 24, 0.5);
        c.layers = Some(15);
        c.realizations = 1;
        let one = run_ensemble(&c).unwrap();
        let series = run_entropy_realization(&c, 15, 0).unwrap();
        assert_eq!(one.entropy_mean(), series.iter().map(|&s| s as f64).collect::<Vec<_>>());
        let rows = run_otoc_realization(&c, 15, 0).unwrap();
        for (t, row) in rows.iter().enumerate() {
            for (x, &v) in row.iter().enumerate() {
                assert_eq!(one.otoc_mean(t, x), f64::from(v));
            }
        }
        c.realizations = 5;
        let five = run_ensemble(&c).unwrap();
        let total: Vec<u64> = (0..5u64)
            .map(|i| run_entropy_realization(&c, 15, i).unwrap())
            .fold(vec![0; 16], |acc, s| acc.iter().zip(s).map(|(a, b)| a + b as u64).collect());
        assert_eq!(five.entropy_sums(), &total[..]);
    }

    #[test]
    fn ensemble_is_deterministic_across_pools() {
        let mut c = cfg(GraphSpec::ring(5).unwrap(), 30, 0.5);
        c.layers = Some(20);
        c.realizations = 12;
        c.master_seed = 77;
        let a = run_ensemble_with_jobs(&c, 1).unwrap();
        let b = run_ensemble_with_jobs(&c, 3).unwrap();
        assert_eq!(a.entropy_csv(), b.entropy_csv());
        assert_eq!(a.otoc_csv(), b.otoc_csv());
    }

    #[test]
    fn auto_depth_saturates() {
        let mut c = cfg(GraphSpec::ring(5).unwrap(), 40, 0.5);
        c.realizations = 20;
        let r = run_ensemble(&c).unwrap();
        assert!(r.depth_converged);
        let s = r.entropy_mean();
        assert!(*s.last().unwrap() > 18.0 && *s.last().unwrap() <= 20.0);
    }

    #[test]
    fn csv_layout() {
        let mut c = cfg(GraphSpec::path(4).unwrap(), 8, 0.5);
        c.layers = Some(2);
        c.realizations = 3;
        let r = run_ensemble(&c).unwrap();
        let e = r.entropy_csv();
        assert!(e.starts_with("t,S_mean,S_var,R\n0,0,0,3\n"));
        assert_eq!(e.lines().count(), 4);
        let o = r.otoc_csv();
        assert_eq!(o.lines().count(), 1 + 3 * 8);
        assert!(o.lines().nth(4).unwrap().starts_with("0,4,1"));
    }
}
