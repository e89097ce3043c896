mod block;
mod config;
mod manifest;
mod pipeline;
mod validate;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{ConfigError, Resolved, Settings};
use graphblock::analysis::descriptor_correlation_report;
use graphblock::catalog::{build_catalog, parse_fingerprints, published_rows, write_catalog, CatalogIssue};
use graphblock::graph::format_ratio;
use graphblock::lc::{enumerate_lc_classes, lc_equivalent, lc_equivalent_labeled, lc_orbit};
use graphblock::oracle::{verify_realization, MAX_STATE_QUBITS};
use manifest::{manifest_hash, out_dir, unix_now, write_csv, write_json, RunManifest};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "graphblock", version, about = "Random Clifford circuits built from graph-state blocks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct the block catalog for n vertices and write it to a file.
    Catalog(CatalogArgs),
    /// Run one ensemble and fit both velocities.
    Simulate(SimulateArgs),
    /// Run the simulate pipeline over one axis and write a combined report.
    Sweep(SweepArgs),
    /// Height function, gamma and wp of a block.
    Descriptors(DescriptorArgs),
    /// Local complementation orbits and equivalence queries.
    Lc {
        #[command(subcommand)]
        query: LcQuery,
    },
    /// Check CSV outputs against their schemas.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long)]
    n: usize,
    /// Fingerprint table (table n graph gamma wp ame v_E v_B) to use instead of the built-in rows.
    #[arg(long)]
    fingerprints: Option<PathBuf>,
    /// Catalog file path (default `<out>/catalog-n<N>.tsv`).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, env = "GRAPHBLOCK_OUT")]
    out: Option<PathBuf>,
    /// Fail when any row is not reproduced exactly.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    block: Option<String>,
    #[arg(long)]
    n_sites: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    boundary: Option<String>,
    /// Depth T, or `auto`.
    #[arg(long)]
    layers: Option<String>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    log_base: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Any other config key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, env = "GRAPHBLOCK_OUT")]
    out: Option<PathBuf>,
    /// File name prefix.
    #[arg(long, default_value = "run")]
    name: String,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings, ConfigError> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let mut flags = Settings::default();
        for pair in &self.set {
            flags.set_pair(pair)?;
        }
        let typed = [
            ("block", self.block.clone()),
            ("n_sites", self.n_sites.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("boundary", self.boundary.clone()),
            ("layers", self.layers.clone()),
            ("realizations", self.realizations.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("log_base", self.log_base.clone()),
            ("threshold", self.threshold.map(|v| v.to_string())),
        ];
        for (k, v) in typed {
            if let Some(v) = v {
                flags.set(k, &v)?;
            }
        }
        s.merge(&flags);
        Ok(s)
    }

    fn jobs(&self) -> usize {
        if self.jobs == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            self.jobs
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Replay realizations densely and fail on any disagreement (N <= 10).
    #[arg(long)]
    oracle_check: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Axis {
    Alpha,
    Block,
    N,
    Boundary,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum)]
    axis: Axis,
    /// Comma-separated axis values. Block values accept `catalog:N`.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    /// Blocks swept at every alpha or boundary value (default: the config block).
    #[arg(long)]
    blocks: Option<String>,
}

#[derive(Args)]
struct DescriptorArgs {
    /// Block name or `N:u-v,...` edge list.
    block: String,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum LcQuery {
    /// Labeled LC orbit of a graph.
    Orbit {
        block: String,
        #[arg(long, default_value_t = 1_000_000)]
        limit: usize,
        #[arg(long)]
        list: bool,
    },
    /// Whether two graphs are LC equivalent (up to relabeling unless --labeled).
    Equiv {
        a: String,
        b: String,
        #[arg(long)]
        labeled: bool,
    },
    /// Connected LC classes on n vertices.
    Classes {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Catalog(a) => cmd_catalog(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Descriptors(a) => cmd_descriptors(a),
        Command::Lc { query } => cmd_lc(query),
        Command::Validate { files } => cmd_validate(files),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for configuration problems, 3 for physics-invariant violations.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<graphblock::Error>() {
            return match e {
                graphblock::Error::Config { .. } | graphblock::Error::ImpossiblePlacement { .. } => 2,
                graphblock::Error::Invariant(_) => 3,
                _ => 1,
            };
        }
    }
    1
}

fn cmd_catalog(a: CatalogArgs) -> Result<()> {
    let rows = match &a.fingerprints {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_fingerprints(&text)?.into_iter().filter(|r| r.n == a.n).collect()
        }
        None => published_rows(a.n),
    };
    let build = build_catalog(a.n, &rows)?;
    println!("n={}: {} connected LC classes, {} table rows", a.n, build.class_count, rows.len());
    if rows.is_empty() {
        println!("n={} lies outside the published tables; every class is listed as unlisted", a.n);
    }
    for e in &build.entries {
        let height: Vec<String> = e.height.iter().map(|h| h.to_string()).collect();
        println!(
            "  {:<10} {:<8} gamma={:<5} wp={:<3} h=[{}] {}",
            e.name(),
            e.source,
            format_ratio(&e.gamma),
            e.wp,
            height.join(","),
            e.graph.edge_list_string()
        );
    }
    for (res, entry) in build.rows.iter().zip(&build.entries) {
        for alt in &res.alternates {
            println!("  alternate for {}: {}", entry.name(), alt.edge_list_string());
        }
    }
    for issue in &build.issues {
        match issue {
            CatalogIssue::NoExactMatch { .. } => eprintln!("warning: fingerprint mismatch: {issue}"),
            CatalogIssue::Ambiguous { .. } => eprintln!("note: {issue}"),
        }
    }
    let path = match a.output {
        Some(p) => p,
        None => out_dir(a.out)?.join(format!("catalog-n{}.tsv", a.n)),
    };
    std::fs::write(&path, write_catalog(&build.entries)).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    if a.strict {
        build.strict()?;
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let started = unix_now();
    let Resolved { config: cfg, threshold, seed_generated } = a.run.settings()?.resolve()?;
    cfg.validate()?;
    if a.oracle_check && cfg.chain_length > MAX_STATE_QUBITS {
        return Err(ConfigError {
            field: "n_sites".into(),
            reason: format!("--oracle-check needs at most {MAX_STATE_QUBITS} sites"),
        }
        .into());
    }
    println!("block {} on N={} ({}), alpha={}", cfg.block, cfg.chain_length, cfg.boundary, cfg.alpha);
    println!("r = {} blocks per layer", cfg.blocks_per_layer());
    println!("seed {}{}", cfg.master_seed, if seed_generated { " (generated)" } else { "" });
    let hash = manifest_hash("simulate", &cfg, threshold);
    let measured = pipeline::measure(&cfg, threshold, a.run.jobs())?;
    let run = &measured.result;
    println!(
        "T = {} layers, R = {}{}",
        run.layers,
        run.realizations,
        if run.depth_converged { "" } else { " (depth cap hit)" }
    );

    if a.oracle_check {
        let replays = cfg.realizations.min(8) as u64;
        let mut points = (0, 0);
        for i in 0..replays {
            let check = verify_realization(&cfg, run.layers, i)?;
            points.0 += check.entropy_points;
            points.1 += check.otoc_points;
        }
        println!("oracle check: {replays} realizations agree ({} entropy, {} OTOC values)", points.0, points.1);
    }

    let dir = out_dir(a.run.out.clone())?;
    let name = &a.run.name;
    let files = [
        format!("{name}.entropy.csv"),
        format!("{name}.otoc.csv"),
        format!("{name}.velocities.json"),
        format!("{name}.manifest.json"),
    ];
    write_csv(&dir.join(&files[0]), &hash, &run.entropy_csv())?;
    write_csv(&dir.join(&files[1]), &hash, &run.otoc_csv())?;
    write_json(&dir.join(&files[2]), &measured.velocities(&hash)?)?;
    let manifest = RunManifest {
        manifest_hash: hash.clone(),
        command: "simulate".into(),
        code_version: manifest::CODE_VERSION.into(),
        catalog_version: manifest::catalog_version(),
        config: cfg.clone(),
        threshold,
        seed_generated,
        outputs: files.to_vec(),
        started_unix: started,
        finished_unix: unix_now(),
    };
    write_json(&dir.join(&files[3]), &manifest)?;

    let show = |f: &Result<graphblock::VelocityFit, String>| match f {
        Ok(f) => format!("{:.4} +- {:.4}", f.velocity, f.stderr),
        Err(e) => format!("fit failed ({e})"),
    };
    println!(
        "v_E = {} ({} per layer)",
        show(&measured.v_e),
        if cfg.log_base == graphblock::EntropyUnit::Bits { "bits" } else { "nats" }
    );
    println!("v_B = {} (c* = {threshold})", show(&measured.v_b));
    println!("wrote {} ({hash})", dir.join(format!("{name}.*")).display());
    Ok(())
}

#[derive(Serialize)]
struct SweepCell {
    axis_value: String,
    block: String,
    manifest_hash: Option<String>,
    config: Option<graphblock::EnsembleConfig>,
    status: String,
}

#[derive(Serialize)]
struct SweepManifest {
    manifest_hash: String,
    command: String,
    axis: String,
    code_version: String,
    catalog_version: String,
    seed_generated: bool,
    cells: Vec<SweepCell>,
    outputs: Vec<String>,
    started_unix: u64,
    finished_unix: u64,
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let started = unix_now();
    let mut base = a.run.settings()?;
    let seed_generated = base.get("seed").is_none();
    if seed_generated {
        let seed = base.resolve_with(Some(graphblock::GraphSpec::path(2)?))?.config.master_seed;
        base.set("seed", &seed.to_string())?;
    }
    let axis_name = format!("{:?}", a.axis).to_lowercase();
    let fixed_blocks = match (&a.blocks, base.get("block")) {
        (Some(spec), _) => Some(block::expand_blocks(spec)?),
        (None, Some(spec)) if matches!(a.axis, Axis::Alpha | Axis::Boundary) => Some(block::expand_blocks(spec)?),
        _ => None,
    };
    if fixed_blocks.is_none() && matches!(a.axis, Axis::Alpha | Axis::Boundary) {
        return Err(ConfigError { field: "block".into(), reason: "required for this axis".into() }.into());
    }

    let mut csv = format!("{}\n", validate::SWEEP_HEADER);
    let mut cells = Vec::new();
    let mut report_rows = Vec::new();
    let mut failures = 0;
    for value in &a.values {
        let mut settings = base.clone();
        let blocks = match a.axis {
            Axis::Alpha => {
                settings.set("alpha", value).map(|_| fixed_blocks.clone().unwrap_or_default()).map_err(Into::into)
            }
            Axis::Boundary => {
                settings.set("boundary", value).map(|_| fixed_blocks.clone().unwrap_or_default()).map_err(Into::into)
            }
            Axis::Block => block::expand_blocks(value),
            Axis::N => block::expand_blocks(&format!("catalog:{value}")),
        };
        let blocks = match blocks {
            Ok(b) => b,
            Err(e) => {
                failures += 1;
                let status = format!("{e:#}").replace(',', ";");
                eprintln!("{axis_name}={value}: {status}");
                csv.push_str(&format!("{axis_name},{value},,0,0,0,,,,,,{status}\n"));
                cells.push(SweepCell {
                    axis_value: value.clone(),
                    block: String::new(),
                    manifest_hash: None,
                    config: None,
                    status,
                });
                continue;
            }
        };
        let mut line_ve = Vec::new();
        for g in blocks {
            let d = g.descriptors()?;
            let gamma = *d.gamma.numer() as f64 / *d.gamma.denom() as f64;
            let prefix = format!("{axis_name},{value},{},{},{gamma},{}", g.name(), g.n_vertices(), d.wp);
            let block_name = g.name().to_string();
            let outcome = settings.resolve_with(Some(g)).map_err(anyhow::Error::from).and_then(|r| {
                r.config.validate()?;
                let hash = manifest_hash("simulate", &r.config, r.threshold);
                let m = pipeline::measure(&r.config, r.threshold, a.run.jobs())?;
                Ok((r, hash, m))
            });
            match outcome {
                Ok((r, hash, m)) => {
                    let status = match (&m.v_e, &m.v_b) {
                        (Ok(_), Ok(_)) => "ok".to_string(),
                        (Err(e), _) | (_, Err(e)) => format!("fit failed: {}", e.replace(',', ";")),
                    };
                    let fmt = |f: &Result<graphblock::VelocityFit, String>| match f {
                        Ok(f) => (f.velocity.to_string(), f.stderr.to_string()),
                        Err(_) => (String::new(), String::new()),
                    };
                    let ((ve, ves), (vb, vbs)) = (fmt(&m.v_e), fmt(&m.v_b));
                    csv.push_str(&format!("{prefix},{},{ve},{ves},{vb},{vbs},{status}\n", m.result.layers));
                    if status != "ok" {
                        failures += 1;
                    }
                    println!(
                        "{axis_name}={value} {block_name}: T={} v_E={} v_B={}",
                        m.result.layers,
                        if ve.is_empty() { "-" } else { &ve[..ve.len().min(6)] },
                        if vb.is_empty() { "-" } else { &vb[..vb.len().min(6)] }
                    );
                    line_ve.push((block_name.clone(), m.v_e.as_ref().map_or(f64::NAN, |f| f.velocity)));
                    report_rows.push(m.report_row(format!("{block_name}@{axis_name}={value}"))?);
                    cells.push(SweepCell {
                        axis_value: value.clone(),
                        block: block_name,
                        manifest_hash: Some(hash),
                        config: Some(r.config),
                        status,
                    });
                }
                Err(e) => {
                    failures += 1;
                    let status = format!("{e:#}").replace(',', ";");
                    eprintln!("{axis_name}={value} {block_name}: {status}");
                    csv.push_str(&format!("{prefix},,,,,,{status}\n"));
                    cells.push(SweepCell {
                        axis_value: value.clone(),
                        block: block_name,
                        manifest_hash: None,
                        config: None,
                        status,
                    });
                }
            }
        }
        if line_ve.len() > 1 {
            line_ve.sort_by(|x, y| y.1.total_cmp(&x.1));
            let order: Vec<&str> = line_ve.iter().map(|(n, _)| n.as_str()).collect();
            println!("{axis_name}={value}: v_E order {}", order.join(" > "));
        }
    }

    let hashes: Vec<&str> = cells.iter().filter_map(|c| c.manifest_hash.as_deref()).collect();
    let hash = format!("sha256:{}", manifest::sha256_hex(format!("sweep:{axis_name}:{}", hashes.join(",")).as_bytes()));
    let report = descriptor_correlation_report(&report_rows);
    let dir = out_dir(a.run.out.clone())?;
    let name = &a.run.name;
    let files = [
        format!("{name}.sweep.csv"),
        format!("{name}.velocities.csv"),
        format!("{name}.ve_gamma.csv"),
        format!("{name}.vb_wp.csv"),
        format!("{name}.manifest.json"),
    ];
    write_csv(&dir.join(&files[0]), &hash, &csv)?;
    write_csv(&dir.join(&files[1]), &hash, &report.velocities_csv)?;
    write_csv(&dir.join(&files[2]), &hash, &report.ve_gamma_csv)?;
    write_csv(&dir.join(&files[3]), &hash, &report.vb_wp_csv)?;
    write_json(
        &dir.join(&files[4]),
        &SweepManifest {
            manifest_hash: hash.clone(),
            command: "sweep".into(),
            axis: axis_name,
            code_version: manifest::CODE_VERSION.into(),
            catalog_version: manifest::catalog_version(),
            seed_generated,
            cells,
            outputs: files.to_vec(),
            started_unix: started,
            finished_unix: unix_now(),
        },
    )?;
    for (x, y) in &report.inversions {
        println!("inversion: v_E({x}) < v_E({y}) but v_B({x}) > v_B({y})");
    }
    println!("wrote {} ({hash}); {failures} failed cells", dir.join(format!("{name}.*")).display());
    Ok(())
}

#[derive(Serialize)]
struct DescriptorReport {
    block: String,
    n: usize,
    edges: String,
    height: Vec<usize>,
    gamma: String,
    wp: usize,
    connected: bool,
    ame: bool,
}

fn cmd_descriptors(a: DescriptorArgs) -> Result<()> {
    let g = block::resolve_block(&a.block)?;
    let d = g.descriptors()?;
    let report = DescriptorReport {
        block: g.name().into(),
        n: g.n_vertices(),
        edges: g.edge_list_string(),
        height: d.height,
        gamma: format_ratio(&d.gamma),
        wp: d.wp,
        connected: d.connected,
        ame: g.is_ame(),
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        let h: Vec<String> = report.height.iter().map(|x| x.to_string()).collect();
        println!("{} (n={}): {}", report.block, report.n, report.edges);
        println!("height  {}", h.join(" "));
        println!("gamma   {}", report.gamma);
        println!("wp      {}", report.wp);
        println!("ame     {}", report.ame);
    }
    Ok(())
}

fn cmd_lc(query: LcQuery) -> Result<()> {
    match query {
        LcQuery::Orbit { block, limit, list } => {
            let g = block::resolve_block(&block)?;
            let orbit = lc_orbit(&g, limit)?;
            println!("labeled LC orbit of {}: {} graphs", g.name(), orbit.len());
            if list {
                for h in &orbit {
                    println!("  {}", h.edge_list_string());
                }
            }
        }
        LcQuery::Equiv { a, b, labeled } => {
            let (g, h) = (block::resolve_block(&a)?, block::resolve_block(&b)?);
            let eq = if labeled { lc_equivalent_labeled(&g, &h)? } else { lc_equivalent(&g, &h)? };
            println!("{}", if eq { "equivalent" } else { "inequivalent" });
        }
        LcQuery::Classes { n, list } => {
            let classes = enumerate_lc_classes(n)?;
            println!("n={n}: {} connected LC classes", classes.len());
            if list {
                for (i, c) in classes.iter().enumerate() {
                    println!(
                        "  class {i:<3} {:>6} labeled graphs  {}",
                        c.len(),
                        c.simplest_member().edge_list_string()
                    );
                }
            }
        }
    }
    Ok(())
}

fn cmd_validate(files: Vec<PathBuf>) -> Result<()> {
    let mut bad = 0;
    for f in &files {
        match validate::validate_file(f) {
            Ok(s) => println!(
                "{}: {:?}, {} rows, manifest {}",
                f.display(),
                s.schema,
                s.rows,
                s.manifest.as_deref().unwrap_or("none")
            ),
            Err(e) => {
                bad += 1;
                eprintln!("{e:#}");
            }
        }
    }
    if bad > 0 {
        bail!("{bad} of {} files failed validation", files.len());
    }
    Ok(())
}
