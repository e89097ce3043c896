use graphblock::analysis::{
    extract_front, fit_butterfly_velocity, fit_entanglement_velocity, threshold_sensitivity, EntropyFitPolicy,
    FrontFitPolicy, ReportRow, VelocityFit, SENSITIVITY_THRESHOLDS,
};
use graphblock::engine::run_ensemble_with_jobs;
use graphblock::graph::format_ratio;
use graphblock::{EnsembleConfig, RunResult};
use serde::Serialize;

pub struct Measured {
    pub result: RunResult,
    pub v_e: Result<VelocityFit, String>,
    pub v_b: Result<VelocityFit, String>,
    pub sensitivity: Vec<(f64, Result<VelocityFit, String>)>,
}

/// Run the ensemble and fit both velocities.
pub fn measure(cfg: &EnsembleConfig, threshold: f64, jobs: usize) -> graphblock::Result<Measured> {
    let result = run_ensemble_with_jobs(cfg, jobs)?;
    let v_e = fit_entanglement_velocity(&result.entropy_mean(), cfg.log_base, &EntropyFitPolicy::default())
        .map_err(|e| e.to_string());
    let field = result.otoc_field();
    let policy = FrontFitPolicy { threshold, ..FrontFitPolicy::default() };
    let v_b = extract_front(&field, cfg.otoc_probe.site, cfg.boundary, threshold)
        .and_then(|d| fit_butterfly_velocity(&d, cfg.chain_length, &policy))
        .map_err(|e| e.to_string());
    let sensitivity =
        threshold_sensitivity(&field, cfg.otoc_probe.site, cfg.boundary, &policy, &SENSITIVITY_THRESHOLDS)
            .into_iter()
            .map(|(c, f)| (c, f.map_err(|e| e.to_string())))
            .collect();
    Ok(Measured { result, v_e, v_b, sensitivity })
}

#[derive(Serialize)]
pub struct Sensitivity {
    pub threshold: f64,
    pub v_b: Option<f64>,
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct Velocities {
    pub manifest_hash: String,
    pub block: String,
    pub edges: String,
    pub n: usize,
    pub gamma: String,
    pub wp: usize,
    pub blocks_per_layer: usize,
    pub layers: usize,
    pub realizations: usize,
    pub depth_converged: bool,
    pub log_base: String,
    pub v_e: Option<VelocityFit>,
    pub v_e_error: Option<String>,
    pub v_b: Option<VelocityFit>,
    pub v_b_error: Option<String>,
    pub v_b_sensitivity: Vec<Sensitivity>,
}

impl Measured {
    pub fn velocities(&self, manifest_hash: &str) -> graphblock::Result<Velocities> {
        let cfg = &self.result.config;
        let d = cfg.block.descriptors()?;
        Ok(Velocities {
            manifest_hash: manifest_hash.to_string(),
            block: cfg.block.name().to_string(),
            edges: cfg.block.edge_list_string(),
            n: cfg.block.n_vertices(),
            gamma: format_ratio(&d.gamma),
            wp: d.wp,
            blocks_per_layer: cfg.blocks_per_layer(),
            layers: self.result.layers,
            realizations: self.result.realizations,
            depth_converged: self.result.depth_converged,
            log_base: cfg.log_base.to_string(),
            v_e: self.v_e.as_ref().ok().cloned(),
            v_e_error: self.v_e.as_ref().err().cloned(),
            v_b: self.v_b.as_ref().ok().cloned(),
            v_b_error: self.v_b.as_ref().err().cloned(),
            v_b_sensitivity: self
                .sensitivity
                .iter()
                .map(|(c, f)| Sensitivity {
                    threshold: *c,
                    v_b: f.as_ref().ok().map(|f| f.velocity),
                    error: f.as_ref().err().cloned(),
                })
                .collect(),
        })
    }

    pub fn report_row(&self, name: String) -> graphblock::Result<ReportRow> {
        let block = &self.result.config.block;
        let d = block.descriptors()?;
        Ok(ReportRow {
            block_name: name,
            n: block.n_vertices(),
            gamma: *d.gamma.numer() as f64 / *d.gamma.denom() as f64,
            wp: d.wp,
            v_e: self.v_e.as_ref().ok().cloned(),
            v_b: self.v_b.as_ref().ok().cloned(),
        })
    }
}
