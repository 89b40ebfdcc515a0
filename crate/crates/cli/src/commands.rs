use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use cotroute::harness::{
    build_mixed_stream, csv_line_chart, default_thresholds, load_manifests, run_stream, seed_pool_from_dir,
    sweep_threshold, write_batch_csv, write_histogram_csv, write_outcomes_jsonl, write_sweep_csv, write_updates_jsonl,
    ExecutionMode, LabeledQuestion, StreamSpec,
};
use cotroute::providers::{EncoderSpec, LlmSpec};
use cotroute::router::Query;
use cotroute::store::{load_cache, load_pool, save_cache, save_pool};
use cotroute::updater::{force_update, maybe_update};
use cotroute::{DataCache, DemoPool, Embedder, Router, RouterConfig, RouterState, StrategyRunner};
use serde::Deserialize;

use crate::args::{Cli, Command, Global, PlotArgs, PoolCommand, RouteArgs, StreamArgs, SweepArgs, UpdateArgs};

pub fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Route(a) => route(g, a),
        Command::Stream(a) => stream(g, a),
        Command::Update(a) => update(g, a),
        Command::Sweep(a) => sweep(g, a),
        Command::Pool(c) => pool(g, c),
        Command::Plot(a) => plot(a),
    }
}

fn config(g: &Global) -> Result<RouterConfig> {
    let mut cfg = match &g.config {
        Some(path) => RouterConfig::from_json_file(path)?,
        None => RouterConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.rng_seed = seed;
    }
    Ok(cfg.validate()?)
}

fn embedder(g: &Global, cfg: &RouterConfig) -> Result<Embedder> {
    let spec = EncoderSpec::resolve(g.encoder.as_deref())?;
    log::info!("encoder: {spec}");
    Ok(Embedder::with_batch_size(spec.build()?, cfg.encode_batch_size))
}

fn router(g: &Global, cfg: RouterConfig) -> Result<Router> {
    let embedder = embedder(g, &cfg)?;
    let spec = LlmSpec::resolve(g.llm.as_deref())?;
    log::info!("llm: {spec}");
    Ok(Router::new(cfg, embedder, spec.build()?))
}

/// A missing store file is an empty store.
fn read_pool(path: &Path) -> Result<DemoPool> {
    if !path.exists() {
        log::info!("{} not found; starting with an empty pool", path.display());
        return Ok(DemoPool::new());
    }
    Ok(load_pool(path)?)
}

fn read_cache(path: &Path) -> Result<DataCache> {
    if !path.exists() {
        return Ok(DataCache::new());
    }
    Ok(load_cache(path)?)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn route(g: &Global, a: RouteArgs) -> Result<()> {
    let cfg = config(g)?;
    let pool = read_pool(&g.pool)?;
    let cache = read_cache(&g.cache)?;
    let runner = StrategyRunner::new(router(g, cfg)?, a.strategy, &pool);
    let query = Query {
        question: &a.question,
        format: &a.format,
        gold_type: a.gold_type.as_deref(),
    };
    let routed = runner.run(&query, &RouterState::new(pool, cache))?;
    print_json(&routed.outcome)?;
    if let Some(report) = &routed.update {
        log::info!("update: {}", serde_json::to_string(report)?);
    }
    if !a.dry_run {
        save_pool(&routed.state.pool, &g.pool)?;
        save_cache(&routed.state.cache, &g.cache)?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn stream(g: &Global, a: StreamArgs) -> Result<()> {
    let cfg = config(g)?;
    let spec = StreamSpec {
        batches: a.batches,
        batch_size: a.batch_size,
        shuffle_seed: a.shuffle_seed.or(g.seed).unwrap_or(0),
    };
    let manifests = load_manifests(&a.manifest)?;
    let batches = build_mixed_stream(&manifests, spec)?;
    let pool = match &a.seed_dir {
        Some(dir) => seed_pool_from_dir(dir)?,
        None => read_pool(&g.pool)?,
    };
    let cache = read_cache(&g.cache)?;
    let runner = StrategyRunner::new(router(g, cfg)?, a.strategy, &pool);
    let mode = match a.parallel {
        Some(window) if window > 0 => ExecutionMode::Parallel { window },
        Some(_) => bail!("--parallel needs a window of at least 1"),
        None => ExecutionMode::Sequential,
    };
    let run = run_stream(&runner, &batches, RouterState::new(pool, cache), mode);

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_batch_csv(create(&a.out.join("batches.csv"))?, &run.batches)?;
    write_outcomes_jsonl(create(&a.out.join("outcomes.jsonl"))?, &run.outcomes)?;
    write_updates_jsonl(create(&a.out.join("updates.jsonl"))?, &run.updates)?;
    save_pool(&run.state.pool, a.out.join("pool.jsonl"))?;
    save_cache(&run.state.cache, a.out.join("cache.jsonl"))?;

    let mut out = io::stdout().lock();
    write_batch_csv(&mut out, &run.batches)?;
    Ok(())
}

fn update(g: &Global, a: UpdateArgs) -> Result<()> {
    let cfg = config(g)?;
    let pool = read_pool(&g.pool)?;
    let cache = read_cache(&g.cache)?;
    let embedder = embedder(g, &cfg)?;
    let outcome = if a.force {
        force_update(&pool, &cache, &cfg, &embedder)?
    } else {
        maybe_update(&pool, &cache, &cfg, &embedder)?
    };
    print_json(&outcome.report)?;
    if !a.dry_run && outcome.report.triggered {
        save_pool(&outcome.pool, &g.pool)?;
        save_cache(&outcome.cache, &g.cache)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct LabeledLine {
    question: String,
    gold_type: String,
}

fn read_labeled(path: &Path) -> Result<Vec<LabeledQuestion>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line: LabeledLine =
                serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), i + 1))?;
            Ok(LabeledQuestion {
                question: line.question,
                gold_type: line.gold_type,
            })
        })
        .collect()
}

fn sweep(g: &Global, a: SweepArgs) -> Result<()> {
    let cfg = config(g)?;
    let pool = read_pool(&g.pool)?;
    if pool.is_empty() {
        bail!("the pool at {} is empty", g.pool.display());
    }
    let labeled = match (&a.labeled, a.self_match) {
        (Some(path), _) => read_labeled(path)?,
        (None, true) => pool
            .iter()
            .map(|d| LabeledQuestion {
                question: d.question.clone(),
                gold_type: d.type_label.clone(),
            })
            .collect(),
        (None, false) => bail!("give --labeled FILE or --self-match"),
    };
    if let Some(missing) = labeled.iter().find(|q| !pool.has_type(&q.gold_type)) {
        bail!("gold type `{}` has no demos in the pool", missing.gold_type);
    }
    let thresholds = default_thresholds(a.lo, a.hi, a.points);
    let result = sweep_threshold(&pool, &labeled, &embedder(g, &cfg)?, &thresholds)?;
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_sweep_csv(create(&dir.join("sweep.csv"))?, &result.points)?;
            write_histogram_csv(create(&dir.join("histogram.csv"))?, &result.histogram)?;
            let mut scores = create(&dir.join("scores.jsonl"))?;
            for s in &result.scores {
                serde_json::to_writer(&mut scores, s)?;
                writeln!(scores)?;
            }
            scores.flush()?;
            let best = result
                .points
                .iter()
                .max_by(|x, y| x.f1.total_cmp(&y.f1).then(y.threshold.total_cmp(&x.threshold)));
            if let Some(best) = best {
                println!("best F1 {:.4} at threshold {:.4}", best.f1, best.threshold);
            }
        }
        None => write_sweep_csv(io::stdout().lock(), &result.points)?,
    }
    Ok(())
}

fn pool(g: &Global, c: PoolCommand) -> Result<()> {
    match c {
        PoolCommand::Show { full } => {
            let pool = load_pool(&g.pool)?;
            let mut out = io::stdout().lock();
            if full {
                for d in pool.iter() {
                    serde_json::to_writer(&mut out, d)?;
                    writeln!(out)?;
                }
            } else {
                for t in pool.type_labels() {
                    writeln!(out, "{t}\t{}", pool.demos_of_type(t).len())?;
                }
                writeln!(out, "total\t{}", pool.len())?;
            }
        }
        PoolCommand::Seed { from_dir, force } => {
            if g.pool.exists() && !force {
                bail!("{} exists; pass --force to overwrite it", g.pool.display());
            }
            let pool = seed_pool_from_dir(&from_dir)?;
            save_pool(&pool, &g.pool)?;
            println!("wrote {} demos of {} types to {}", pool.len(), pool.type_labels().len(), g.pool.display());
        }
    }
    Ok(())
}

fn plot(a: PlotArgs) -> Result<()> {
    let text = fs::read_to_string(&a.csv).with_context(|| format!("reading {}", a.csv.display()))?;
    let y: Vec<&str> = a.y.iter().map(String::as_str).collect();
    let title = a.title.unwrap_or_else(|| a.csv.display().to_string());
    let svg = csv_line_chart(&text, &a.x, &y, &title)?;
    fs::write(&a.out, svg).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}
