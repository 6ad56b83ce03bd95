//! Command-line surface for the realization engine.
//!
//! Exit codes: 0 success / valid, 1 invalid but well-formed, 2 malformed
//! input or usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use realizer::io::{
    export_mesh, parse_catalog, read_certificate, write_certificate, CatalogEntry, Certificate,
    MeshFormat, Provenance,
};
use realizer::realize::Realization;
use realizer::search::anneal::{anneal_schedule, AnnealConfig};
use realizer::search::{
    config_hash, shard, Checkpoint, Enumerator, FoundRealization, RunOutcome, SearchConfig,
};
use realizer::surface::{validate_closed_surface, Triangulation};

#[derive(Parser)]
#[command(name = "realizer", version, about = "Search for grid realizations of triangulated surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CatalogArg {
    /// Catalog file of triangulations.
    #[arg(long, env = "REALIZER_CATALOG", default_value = "data/surfaces.cat", global = false)]
    catalog: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Print a topology report for each catalog entry.
    Topology {
        #[command(flatten)]
        catalog: CatalogArg,
        /// Restrict to the named entries.
        names: Vec<String>,
        /// Load entries without the closed-surface validation.
        #[arg(long)]
        raw: bool,
    },
    /// Verify a realization certificate; exit 0 iff it is a valid embedding.
    Verify {
        #[command(flatten)]
        catalog: CatalogArg,
        cert: PathBuf,
    },
    /// Exhaustively enumerate canonical realizations on a grid.
    Search {
        #[command(flatten)]
        catalog: CatalogArg,
        #[arg(long)]
        surface: String,
        #[arg(long)]
        extent: i32,
        /// Directory receiving one certificate file per realization.
        #[arg(long, default_value = "certs")]
        out: PathBuf,
        /// Shard config file (JSON) restricting the prefix range.
        #[arg(long)]
        shard: Option<PathBuf>,
        /// Directory of shard config files to run (possibly in parallel).
        #[arg(long)]
        shard_dir: Option<PathBuf>,
        /// Worker threads for --shard-dir.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write a resumable checkpoint here on budget exhaustion.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Node budget before stopping with a checkpoint.
        #[arg(long)]
        max_nodes: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        report_interval: u64,
        /// Run extents start..=end until a realization is found.
        #[arg(long)]
        sweep_to: Option<i32>,
    },
    /// Resume an interrupted search from a checkpoint file.
    Resume {
        #[command(flatten)]
        catalog: CatalogArg,
        #[arg(long)]
        surface: String,
        #[arg(long)]
        extent: i32,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "certs")]
        out: PathBuf,
        #[arg(long)]
        max_nodes: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        report_interval: u64,
    },
    /// Write shard config files partitioning a search.
    Shard {
        #[command(flatten)]
        catalog: CatalogArg,
        #[arg(long)]
        surface: String,
        #[arg(long)]
        extent: i32,
        /// Prefix depth to partition at.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value = "shards")]
        out: PathBuf,
    },
    /// Simulated annealing for a realization.
    Anneal {
        #[command(flatten)]
        catalog: CatalogArg,
        #[arg(long)]
        surface: String,
        #[arg(long)]
        extent: i32,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3.0)]
        t0: f64,
        #[arg(long, default_value_t = 0.999)]
        cooling: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_moves: u64,
        /// Degeneracy penalty weight (default: disjoint-pair count + 1).
        #[arg(long)]
        lambda: Option<u64>,
        /// Restart after this many non-improving moves (default: 50·V·extent³).
        #[arg(long)]
        restart_interval: Option<u64>,
        /// Probability of a local (Chebyshev-ball) move proposal.
        #[arg(long, default_value_t = 0.0)]
        local_prob: f64,
        /// Radius of local move proposals.
        #[arg(long, default_value_t = 1)]
        local_radius: i32,
        /// Weight of a crossing pair in the energy.
        #[arg(long, default_value_t = 1)]
        conflict_weight: u64,
        /// Exhaustive 1/2-vertex repair when within this many violations.
        #[arg(long, default_value_t = 0)]
        polish_threshold: u64,
        /// Anneal first in this larger cube, then clamp and re-anneal down
        /// to --extent.
        #[arg(long)]
        start_extent: Option<i32>,
        /// Node budget for the exact completion DFS after each clamp of the
        /// multi-extent schedule (0 disables).
        #[arg(long, default_value_t = 0)]
        completion_budget: u64,
        /// Energy weight per coordinate unit a vertex sticks out of the
        /// target (--extent) box; pushes larger-box phases toward placements
        /// that already fit (0 disables).
        #[arg(long, default_value_t = 0)]
        pressure: u64,
        /// Drift-and-retry rounds per larger-extent phase: after a failed
        /// completion, re-anneal from the phase best and try again.
        #[arg(long, default_value_t = 0)]
        slide_rounds: u64,
        /// Moves per slide round.
        #[arg(long, default_value_t = 1_000_000)]
        slide_moves: u64,
        /// Start from the placement of this certificate instead of random.
        #[arg(long)]
        initial_cert: Option<PathBuf>,
        /// Write the best-seen placement here even when energy 0 is not
        /// reached (the certificate then does not verify).
        #[arg(long)]
        out_best: Option<PathBuf>,
        /// Certificate output path on success.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a certificate as an OFF or OBJ mesh.
    Export {
        #[command(flatten)]
        catalog: CatalogArg,
        cert: PathBuf,
        #[arg(long)]
        highlight: Option<usize>,
        #[arg(long, default_value = "off")]
        format: String,
        /// Export even if the certificate does not verify.
        #[arg(long)]
        force: bool,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn load_catalog(path: &Path, validate: bool) -> Result<Vec<CatalogEntry>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("catalog {}: {e}", path.display()))?;
    parse_catalog(&text, validate).map_err(|e| format!("catalog {}: {e}", path.display()))
}

fn find_entry<'a>(entries: &'a [CatalogEntry], name: &str) -> Result<&'a CatalogEntry, String> {
    entries
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| format!("no catalog entry named {name:?}"))
}

fn certificate_of(
    found: &FoundRealization,
    surface: &str,
    extent: i32,
    shard_id: Option<String>,
) -> Certificate {
    Certificate {
        surface: surface.to_string(),
        extent,
        provenance: Provenance::Search,
        seed: None,
        shard: shard_id,
        placement: found.placement.iter().copied().collect(),
    }
}

fn run_search_once(
    tri: &Triangulation,
    config: SearchConfig,
    out_dir: &Path,
    checkpoint_path: Option<&Path>,
    counter: &AtomicUsize,
    shard_id: Option<String>,
) -> Result<(bool, realizer::search::SearchStats), String> {
    std::fs::create_dir_all(out_dir).map_err(|e| e.to_string())?;
    let extent = config.extent;
    let mut enumerator = Enumerator::new(tri, config);
    run_enumerator(&mut enumerator, tri, extent, out_dir, checkpoint_path, counter, shard_id)
}

fn run_enumerator(
    enumerator: &mut Enumerator,
    tri: &Triangulation,
    extent: i32,
    out_dir: &Path,
    checkpoint_path: Option<&Path>,
    counter: &AtomicUsize,
    shard_id: Option<String>,
) -> Result<(bool, realizer::search::SearchStats), String> {
    let writer = Mutex::new(());
    let outcome = enumerator.run(|found| {
        let _guard = writer.lock().unwrap();
        let index = counter.fetch_add(1, Ordering::SeqCst);
        let cert = certificate_of(found, tri.name(), extent, shard_id.clone());
        let path = out_dir.join(format!("{}_{:06}.cert", tri.name().replace('#', "_"), index));
        std::fs::write(&path, write_certificate(&cert)).expect("write certificate");
        eprintln!("found: {}", path.display());
    });
    match outcome {
        RunOutcome::Completed(stats) => {
            eprintln!(
                "stats: nodes={} gp={} lexmin={} frontier_peak={} canonical={} found={}",
                stats.nodes_expanded,
                stats.gp_prefixes,
                stats.lexmin_survivors,
                stats.labeling_frontier_peak,
                stats.canonical_sets_tested,
                stats.realizations_found
            );
            Ok((true, stats))
        }
        RunOutcome::BudgetExhausted(cp) => {
            let path = checkpoint_path.ok_or("budget exhausted and no --checkpoint path given")?;
            let json = serde_json::to_string(&cp).map_err(|e| e.to_string())?;
            std::fs::write(path, json).map_err(|e| e.to_string())?;
            eprintln!("budget exhausted; checkpoint written to {}", path.display());
            Ok((false, cp.stats))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Topology { catalog, names, raw } => {
            let entries = match load_catalog(&catalog.catalog, !raw) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            for entry in &entries {
                if !names.is_empty() && !names.contains(&entry.name) {
                    continue;
                }
                let report = validate_closed_surface(&entry.triangulation);
                let genus = report
                    .genus
                    .map(|g| g.to_string())
                    .unwrap_or_else(|| "-".into());
                println!(
                    "{}: V={} E={} F={} chi={} closed={} orientable={} genus={}",
                    entry.name,
                    report.vertices,
                    report.edges,
                    report.facets,
                    report.euler_characteristic,
                    report.is_closed_surface,
                    report.is_orientable,
                    genus
                );
                for defect in &report.defects {
                    println!("  defect: {defect}");
                }
            }
            ExitCode::SUCCESS
        }
        Command::Verify { catalog, cert } => {
            let text = match std::fs::read_to_string(&cert) {
                Ok(t) => t,
                Err(e) => return fail(2, format!("{}: {e}", cert.display())),
            };
            let cert = match read_certificate(&text) {
                Ok(c) => c,
                Err(e) => return fail(2, e),
            };
            let entries = match load_catalog(&catalog.catalog, true) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            let entry = match find_entry(&entries, &cert.surface) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            let realization = match Realization::with_placement(
                &entry.triangulation,
                cert.placement.iter().map(|(&l, &p)| (l, p)),
            ) {
                Ok(r) => r,
                Err(e) => return fail(2, e),
            };
            match realization.verify() {
                Ok(report) => {
                    println!(
                        "general_position={} conflicts={} valid={}",
                        report.general_position_ok,
                        report.conflicts.len(),
                        report.is_valid_embedding
                    );
                    for ((a, b), f) in &report.conflicts {
                        println!("conflict: edge ({a},{b}) x facet ({},{},{})", f[0], f[1], f[2]);
                    }
                    if report.is_valid_embedding {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(2, e),
            }
        }
        Command::Search {
            catalog,
            surface,
            extent,
            out,
            shard: shard_file,
            shard_dir,
            jobs,
            checkpoint,
            max_nodes,
            report_interval,
            sweep_to,
        } => {
            let entries = match load_catalog(&catalog.catalog, true) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            let entry = match find_entry(&entries, &surface) {
                Ok(e) => e.clone(),
                Err(e) => return fail(2, e),
            };
            let counter = AtomicUsize::new(0);
            if let Some(dir) = shard_dir {
                return run_shard_dir(&entry.triangulation, &dir, &out, jobs, report_interval);
            }
            let mut extents = vec![extent];
            if let Some(end) = sweep_to {
                extents = (extent..=end).collect();
            }
            for ext in extents {
                let mut config = SearchConfig::new(ext);
                config.max_nodes = max_nodes;
                config.report_interval = report_interval;
                if let Some(path) = &shard_file {
                    let text = match std::fs::read_to_string(path) {
                        Ok(t) => t,
                        Err(e) => return fail(2, format!("{}: {e}", path.display())),
                    };
                    config = match serde_json::from_str(&text) {
                        Ok(c) => c,
                        Err(e) => return fail(2, format!("shard config: {e}")),
                    };
                }
                eprintln!("searching {} at extent {}", entry.name, ext);
                match run_search_once(
                    &entry.triangulation,
                    config,
                    &out,
                    checkpoint.as_deref(),
                    &counter,
                    None,
                ) {
                    Ok((completed, stats)) => {
                        if !completed {
                            return ExitCode::from(1);
                        }
                        if stats.realizations_found > 0 {
                            break;
                        }
                    }
                    Err(e) => return fail(2, e),
                }
            }
            ExitCode::SUCCESS
        }
        Command::Resume {
            catalog,
            surface,
            extent,
            checkpoint,
            out,
            max_nodes,
            report_interval,
        } => {
            let entries = match load_catalog(&catalog.catalog, true) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            let entry = match find_entry(&entries, &surface) {
                Ok(e) => e.clone(),
                Err(e) => return fail(2, e),
            };
            let text = match std::fs::read_to_string(&checkpoint) {
                Ok(t) => t,
                Err(e) => return fail(2, format!("{}: {e}", checkpoint.display())),
            };
            let cp: Checkpoint = match serde_json::from_str(&text) {
                Ok(c) => c,
                Err(e) => return fail(2, format!("checkpoint: {e}")),
            };
            let mut config = SearchConfig::new(extent);
            config.max_nodes = max_nodes;
            config.report_interval = report_interval;
            let mut enumerator = match Enumerator::resume(&entry.triangulation, config, cp) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            if let Err(e) = std::fs::create_dir_all(&out) {
                return fail(2, e);
            }
            let counter = AtomicUsize::new(count_existing_certs(&out));
            match run_enumerator(
                &mut enumerator,
                &entry.triangulation,
                extent,
                &out,
                Some(&checkpoint),
                &counter,
                None,
            ) {
                Ok((completed, _)) => {
                    if completed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(2, e),
            }
        }
        Command::Shard {
            catalog,
            surface,
            extent,
            depth,
            out,
        } => {
            let entries = match load_catalog(&catalog.catalog, true) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            let entry = match find_entry(&entries, &surface) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            let config = SearchConfig::new(extent);
            let shards = shard(&entry.triangulation, &config, depth);
            if let Err(e) = std::fs::create_dir_all(&out) {
                return fail(2, e);
            }
            for (i, cfg) in shards.iter().enumerate() {
                let path = out.join(format!("shard_{i:05}.json"));
                let json = serde_json::to_string_pretty(cfg).expect("serialize shard");
                if let Err(e) = std::fs::write(&path, json) {
                    return fail(2, e);
                }
            }
            eprintln!(
                "wrote {} shard configs (hash {:#x}) to {}",
                shards.len(),
                config_hash(&entry.triangulation, &config),
                out.display()
            );
            ExitCode::SUCCESS
        }
        Command::Anneal {
            catalog,
            surface,
            extent,
            seed,
            t0,
            cooling,
            max_moves,
            lambda,
            restart_interval,
            local_prob,
            local_radius,
            conflict_weight,
            polish_threshold,
            start_extent,
            completion_budget,
            pressure,
            slide_rounds,
            slide_moves,
            initial_cert,
            out_best,
            out,
        } => {
            let entries = match load_catalog(&catalog.catalog, true) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            let entry = match find_entry(&entries, &surface) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            let mut config = AnnealConfig::new(extent);
            config.t0 = t0;
            config.cooling = cooling;
            config.max_moves = max_moves;
            config.lambda = lambda;
            config.restart_interval = restart_interval;
            config.local_prob = local_prob;
            config.local_radius = local_radius;
            config.conflict_weight = conflict_weight;
            config.polish_threshold = polish_threshold;
            config.start_extent = start_extent;
            config.completion_budget = completion_budget;
            config.pressure = pressure;
            config.slide_rounds = slide_rounds;
            config.slide_moves = slide_moves;
            if let Some(path) = initial_cert {
                let text = match std::fs::read_to_string(&path) {
                    Ok(t) => t,
                    Err(e) => return fail(2, format!("{}: {e}", path.display())),
                };
                let cert = match read_certificate(&text) {
                    Ok(c) => c,
                    Err(e) => return fail(2, format!("{}: {e}", path.display())),
                };
                let n = entry.triangulation.vertex_count();
                if cert.placement.len() != n {
                    return fail(2, "initial certificate does not place every vertex");
                }
                let mut initial = vec![realizer::GridPoint::new(0, 0, 0); n + 1];
                for (&label, &point) in &cert.placement {
                    initial[label] = point;
                }
                config.initial = Some(initial);
            }
            let outcome = anneal_schedule(&entry.triangulation, &config, seed);
            if let Some(path) = out_best {
                let cert = Certificate {
                    surface: entry.name.clone(),
                    extent,
                    provenance: Provenance::Anneal,
                    seed: Some(seed),
                    shard: None,
                    placement: (1..=entry.triangulation.vertex_count())
                        .map(|l| (l, outcome.best_placement[l]))
                        .collect(),
                };
                if let Err(e) = std::fs::write(&path, write_certificate(&cert)) {
                    return fail(2, e);
                }
            }
            eprintln!(
                "anneal: best_energy={} (conflicts={} degenerate={}) moves={} restarts={} success={}",
                outcome.best_energy,
                outcome.best_split.0,
                outcome.best_split.1,
                outcome.moves,
                outcome.restarts,
                outcome.success
            );
            for tp in &outcome.trace {
                eprintln!("  move {:>9}  energy {:>6}  T {:.4}", tp.mv, tp.energy, tp.temperature);
            }
            if outcome.success {
                let cert = Certificate {
                    surface: entry.name.clone(),
                    extent,
                    provenance: Provenance::Anneal,
                    seed: Some(seed),
                    shard: None,
                    placement: (1..=entry.triangulation.vertex_count())
                        .map(|l| (l, outcome.best_placement[l]))
                        .collect(),
                };
                let text = write_certificate(&cert);
                match out {
                    Some(path) => {
                        if let Err(e) = std::fs::write(&path, text) {
                            return fail(2, e);
                        }
                        eprintln!("certificate written to {}", path.display());
                    }
                    None => print!("{text}"),
                }
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Export {
            catalog,
            cert,
            highlight,
            format,
            force,
            out,
        } => {
            let text = match std::fs::read_to_string(&cert) {
                Ok(t) => t,
                Err(e) => return fail(2, format!("{}: {e}", cert.display())),
            };
            let cert = match read_certificate(&text) {
                Ok(c) => c,
                Err(e) => return fail(2, e),
            };
            let entries = match load_catalog(&catalog.catalog, true) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            let entry = match find_entry(&entries, &cert.surface) {
                Ok(e) => e,
                Err(e) => return fail(2, e),
            };
            if !force {
                let realization = match Realization::with_placement(
                    &entry.triangulation,
                    cert.placement.iter().map(|(&l, &p)| (l, p)),
                ) {
                    Ok(r) => r,
                    Err(e) => return fail(2, e),
                };
                match realization.verify() {
                    Ok(report) if report.is_valid_embedding => {}
                    Ok(_) => return fail(1, "certificate is not a valid embedding (use --force to export anyway)"),
                    Err(e) => return fail(2, e),
                }
            }
            let fmt = match format.as_str() {
                "off" => MeshFormat::Off,
                "obj" => MeshFormat::Obj,
                other => return fail(2, format!("unknown format {other:?}")),
            };
            match export_mesh(&cert, &entry.triangulation, fmt, highlight) {
                Ok(mesh) => {
                    match out {
                        Some(path) => {
                            if let Err(e) = std::fs::write(&path, mesh) {
                                return fail(2, e);
                            }
                        }
                        None => print!("{mesh}"),
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(1, e),
            }
        }
    }
}

fn count_existing_certs(dir: &Path) -> usize {
    std::fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .filter(|e| e.path().extension().map_or(false, |x| x == "cert"))
                .count()
        })
        .unwrap_or(0)
}

fn run_shard_dir(
    tri: &Triangulation,
    dir: &Path,
    out: &Path,
    jobs: usize,
    report_interval: u64,
) -> ExitCode {
    let mut paths: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().map_or(false, |x| x == "json"))
            .collect(),
        Err(e) => return fail(2, format!("{}: {e}", dir.display())),
    };
    paths.sort();
    if let Err(e) = std::fs::create_dir_all(out) {
        return fail(2, e);
    }
    let next = AtomicUsize::new(0);
    let failures = AtomicUsize::new(0);
    let counter = AtomicUsize::new(count_existing_certs(out));
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= paths.len() {
                    break;
                }
                let path = &paths[i];
                let run = || -> Result<(), String> {
                    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
                    let mut config: SearchConfig =
                        serde_json::from_str(&text).map_err(|e| e.to_string())?;
                    config.report_interval = report_interval;
                    let shard_id = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned());
                    run_search_once(tri, config, out, None, &counter, shard_id).map(|_| ())
                };
                if let Err(e) = run() {
                    eprintln!("error: shard {}: {e}", path.display());
                    failures.fetch_add(1, Ordering::SeqCst);
                }
            });
        }
    });
    if failures.load(Ordering::SeqCst) == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
