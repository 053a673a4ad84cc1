//! Subcommands. Each writes its files under `--out` and refreshes
//! `manifest.json` there.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use accessplan::io::{
    access_properties, allocation_properties, blocks_to_geojson, load_site, lots_to_geojson, network_to_geojson,
    read_records_csv, read_text, write_clusters_csv, write_construction_csv, write_geojson, write_json,
    write_records_csv, write_sensitivity_csv, write_shares_csv, write_spearman_csv, RunConfig, RunManifest,
};
use accessplan::pipeline::{evaluate_batch, evaluate_policy, site_access, site_clusters, Evaluation, Site};
use accessplan::policy::{
    knee_of_records, pareto_records, rank_correlations, sample_policies, sensitivity_groups, Knee, ObjectiveRecord,
    Policy, SensitivityParam,
};
use accessplan::synth::make_synthetic_grid;
use accessplan::{Error, Result};
use clap::{Args, Parser, Subcommand};
use geojson::JsonObject;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "accessplan", version, about = "Accessibility-driven land-use allocation and FAR assignment")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration (JSON). Defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `sampling.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Street network GeoJSON; overrides the config.
    #[arg(long, global = true)]
    pub network: Option<PathBuf>,
    /// Block polygon GeoJSON; overrides the config.
    #[arg(long, global = true)]
    pub blocks: Option<PathBuf>,
    /// Policy JSON; overrides the config's policy.
    #[arg(long, global = true)]
    pub policy: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment scores and block accessibility per tier.
    Access,
    /// Service basins per tier.
    Cluster,
    /// Land-use allocation and share diagnostics.
    Allocate,
    /// FAR, heights and construction diagnostics.
    Far,
    /// Full chain for one policy, including its objective record.
    Evaluate,
    /// Latin hypercube sample of policies, evaluated into records.csv.
    Sample {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Pareto front and knee of a records file.
    Pareto {
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Sensitivity groups and rank correlations of a records file.
    Report {
        #[arg(long)]
        records: Option<PathBuf>,
        /// Radius parameters to group by, e.g. `district_radius`. All tiers when omitted.
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// HTTP API over the configured site and the run directories under `--out`.
    Serve {
        #[arg(long, default_value_t = 8787)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Orthogonal grid fixture plus a config pointing at it.
    Synth {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 100.0)]
        block_size: f64,
    },
}

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
}

impl Context {
    pub fn new(g: &GlobalArgs) -> Result<Self> {
        let mut cfg = match &g.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = g.seed {
            cfg.sampling.seed = s;
        }
        if g.network.is_some() {
            cfg.network.clone_from(&g.network);
        }
        if g.blocks.is_some() {
            cfg.blocks.clone_from(&g.blocks);
        }
        if let Some(p) = &g.policy {
            cfg.policy = serde_json::from_str(&read_text(p)?).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        cfg.validate()?;
        Ok(Context { cfg, out: g.out.clone() })
    }

    pub fn site(&self) -> Result<Site> {
        let (Some(net), Some(blocks)) = (&self.cfg.network, &self.cfg.blocks) else {
            return Err(Error::InvalidConfig(
                "no site configured: set `network` and `blocks` or pass --network/--blocks".into(),
            ));
        };
        let e = &self.cfg.eval;
        let (network, blocks) = load_site(net, blocks, e.snap_tolerance)?;
        Site::new(network, blocks, e.buffer, e.snap_tolerance)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    /// Writes `manifest.json`, keeping outputs listed by earlier commands.
    fn finish(&self, command: &str, outputs: &[&str]) -> Result<()> {
        let mut all: Vec<String> = std::fs::read_to_string(self.path("manifest.json"))
            .ok()
            .and_then(|t| serde_json::from_str::<RunManifest>(&t).ok())
            .map(|m| m.outputs)
            .unwrap_or_default();
        all.extend(outputs.iter().map(|s| s.to_string()));
        all.sort();
        all.dedup();
        let manifest = RunManifest::new(&self.cfg, command, all)?;
        write_json(&self.path("manifest.json"), &manifest)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = Context::new(&cli.global)?;
    std::fs::create_dir_all(&ctx.out)?;
    match cli.command {
        Command::Access => access(&ctx),
        Command::Cluster => cluster(&ctx),
        Command::Allocate => allocate(&ctx),
        Command::Far => far(&ctx),
        Command::Evaluate => evaluate(&ctx),
        Command::Sample { n } => sample(&ctx, n),
        Command::Pareto { records } => pareto(&ctx, records),
        Command::Report { records, params } => report(&ctx, records, &params),
        Command::Serve { port, host } => serve(&ctx, &host, port),
        Command::Synth { n, block_size } => synth(&ctx, n, block_size),
    }
}

fn segment_properties(scores: &[accessplan::netgraph::SegmentScoreMix], count: usize) -> Vec<JsonObject> {
    (0..count)
        .map(|k| scores.iter().enumerate().map(|(t, s)| (format!("S_t{t}"), s.scores[k].into())).collect())
        .collect()
}

fn access(ctx: &Context) -> Result<()> {
    let site = ctx.site()?;
    let (scores, tensor) = site_access(&site, &ctx.cfg.policy, &ctx.cfg.eval, None)?;
    let segs = segment_properties(&scores, site.network.segments.len());
    write_geojson(&ctx.path("segments.geojson"), &network_to_geojson(&site.network, Some(&segs)))?;
    write_geojson(&ctx.path("blocks.geojson"), &blocks_to_geojson(&site.blocks, &access_properties(&tensor)))?;
    ctx.finish("access", &["segments.geojson", "blocks.geojson"])
}

fn cluster(ctx: &Context) -> Result<()> {
    let site = ctx.site()?;
    let (_, tensor) = site_access(&site, &ctx.cfg.policy, &ctx.cfg.eval, None)?;
    let h = site_clusters(&site, &ctx.cfg.policy, &ctx.cfg.eval, &tensor)?;
    write_clusters_csv(ctx.create("clusters.csv")?, &site.blocks, &h, &ctx.cfg.policy.tiers)?;
    ctx.finish("cluster", &["clusters.csv"])
}

fn write_allocation(ctx: &Context, site: &Site, ev: &Evaluation, prefix: &str) -> Result<Vec<String>> {
    let mut props = access_properties(&ev.tensor);
    for (p, a) in props.iter_mut().zip(allocation_properties(&ev.allocation)) {
        p.extend(a);
    }
    let names = [format!("{prefix}allocation.geojson"), format!("{prefix}shares.csv"), format!("{prefix}clusters.csv")];
    write_geojson(&ctx.path(&names[0]), &blocks_to_geojson(&site.blocks, &props))?;
    write_shares_csv(ctx.create(&names[1])?, &ev.policy.target_shares, &ev.shares)?;
    write_clusters_csv(ctx.create(&names[2])?, &site.blocks, &ev.hierarchy, &ev.policy.tiers)?;
    Ok(names.to_vec())
}

fn write_intensity(ctx: &Context, site: &Site, ev: &Evaluation, prefix: &str) -> Result<Vec<String>> {
    let names = [format!("{prefix}lots.geojson"), format!("{prefix}construction.csv")];
    write_geojson(&ctx.path(&names[0]), &lots_to_geojson(&site.blocks, &ev.intensity)?)?;
    write_construction_csv(ctx.create(&names[1])?, &ev.intensity.report, &ctx.cfg.eval.construction_shares)?;
    Ok(names.to_vec())
}

fn finish_owned(ctx: &Context, command: &str, names: &[String]) -> Result<()> {
    ctx.finish(command, &names.iter().map(String::as_str).collect::<Vec<_>>())
}

fn allocate(ctx: &Context) -> Result<()> {
    let site = ctx.site()?;
    let ev = evaluate_policy(&site, &ctx.cfg.policy, &ctx.cfg.eval, None)?;
    finish_owned(ctx, "allocate", &write_allocation(ctx, &site, &ev, "")?)
}

fn far(ctx: &Context) -> Result<()> {
    let site = ctx.site()?;
    let ev = evaluate_policy(&site, &ctx.cfg.policy, &ctx.cfg.eval, None)?;
    finish_owned(ctx, "far", &write_intensity(ctx, &site, &ev, "")?)
}

fn evaluate(ctx: &Context) -> Result<()> {
    let site = ctx.site()?;
    let ev = evaluate_policy(&site, &ctx.cfg.policy, &ctx.cfg.eval, None)?;
    let mut names = write_allocation(ctx, &site, &ev, "")?;
    names.extend(write_intensity(ctx, &site, &ev, "")?);
    write_json(&ctx.path("record.json"), &ObjectiveRecord::ok(ev.policy.clone(), ev.raw))?;
    names.push("record.json".into());
    finish_owned(ctx, "evaluate", &names)
}

fn sample(ctx: &Context, n: Option<usize>) -> Result<()> {
    let site = ctx.site()?;
    let s = &ctx.cfg.sampling;
    let policies = sample_policies(&s.space, n.unwrap_or(s.n), s.seed)?;
    let records = evaluate_batch(&site, &policies, &ctx.cfg.eval);
    let valid = records.iter().filter(|r| r.valid).count();
    log::info!("{valid}/{} policies valid", records.len());
    write_records_csv(ctx.create("records.csv")?, &records)?;
    ctx.finish("sample", &["records.csv"])
}

fn records_path(ctx: &Context, given: Option<PathBuf>) -> PathBuf {
    given.unwrap_or_else(|| ctx.path("records.csv"))
}

fn load_records(path: &Path) -> Result<Vec<ObjectiveRecord>> {
    let file = File::open(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    read_records_csv(file)
}

#[derive(Debug, Serialize)]
struct KneeFile<'a> {
    id: usize,
    distance: f64,
    policy: &'a Policy,
    raw: Option<accessplan::policy::RawObjectives>,
    norm: Option<accessplan::policy::NormObjectives>,
    /// Spatial outputs of the knee, when a site is configured.
    outputs: Vec<String>,
}

fn pareto(ctx: &Context, records: Option<PathBuf>) -> Result<()> {
    let records = load_records(&records_path(ctx, records))?;
    let front = pareto_records(&records);
    if front.is_empty() {
        return Err(Error::Infeasible("no valid records, the front is empty".into()));
    }
    let on_front: Vec<ObjectiveRecord> = records.iter().filter(|r| front.contains(&r.id())).cloned().collect();
    write_records_csv(ctx.create("pareto.csv")?, &on_front)?;
    let Knee { id, distance } = knee_of_records(&records, &front).expect("front is nonempty");
    let rec = records.iter().find(|r| r.id() == id).expect("knee is a record");

    let mut outputs = Vec::new();
    if ctx.cfg.network.is_some() && ctx.cfg.blocks.is_some() {
        let site = ctx.site()?;
        let ev = evaluate_policy(&site, &rec.policy, &ctx.cfg.eval, None)?;
        outputs.extend(write_allocation(ctx, &site, &ev, "knee_")?);
        outputs.extend(write_intensity(ctx, &site, &ev, "knee_")?);
    }
    let knee = KneeFile { id, distance, policy: &rec.policy, raw: rec.raw, norm: rec.norm, outputs: outputs.clone() };
    write_json(&ctx.path("knee.json"), &knee)?;
    outputs.extend(["pareto.csv".to_string(), "knee.json".to_string()]);
    finish_owned(ctx, "pareto", &outputs)
}

fn report(ctx: &Context, records: Option<PathBuf>, params: &[String]) -> Result<()> {
    let records = load_records(&records_path(ctx, records))?;
    let front = pareto_records(&records);
    let valid: Vec<&ObjectiveRecord> = records.iter().filter(|r| r.norm.is_some()).collect();
    let on_front: Vec<&ObjectiveRecord> = valid.iter().copied().filter(|r| front.contains(&r.id())).collect();
    let params: Vec<SensitivityParam> = if params.is_empty() {
        valid.first().map(|r| r.policy.tiers.iter().map(|&t| SensitivityParam(t)).collect()).unwrap_or_default()
    } else {
        params.iter().map(|p| p.parse()).collect::<Result<_>>()?
    };
    let mut names = Vec::new();
    for p in params {
        let groups = sensitivity_groups(&on_front, p);
        let name = format!("sensitivity_{p}.csv");
        write_sensitivity_csv(ctx.create(&name)?, &groups)?;
        names.push(name);
    }
    for (scope, set) in [("all", &valid), ("pareto", &on_front)] {
        match rank_correlations(set) {
            Ok(m) => {
                let name = format!("spearman_{scope}.csv");
                write_spearman_csv(ctx.create(&name)?, &m)?;
                names.push(name);
            }
            Err(e) => log::warn!("spearman_{scope} skipped: {e}"),
        }
    }
    finish_owned(ctx, "report", &names)
}

fn serve(ctx: &Context, host: &str, port: u16) -> Result<()> {
    let site = match ctx.site() {
        Ok(s) => Some(s),
        Err(e) if ctx.cfg.network.is_none() || ctx.cfg.blocks.is_none() => {
            log::warn!("{e}; /site and /evaluate will answer 409");
            None
        }
        Err(e) => return Err(e),
    };
    let state = crate::service::AppState::new(site, ctx.cfg.clone(), ctx.out.clone())?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port)).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, crate::service::router(state)).await
    })?;
    Ok(())
}

fn synth(ctx: &Context, n: usize, block_size: f64) -> Result<()> {
    if n < 2 || !(block_size > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "synth needs n >= 2 and a positive block size, got {n} and {block_size}"
        )));
    }
    let (net, blocks) = make_synthetic_grid(n, block_size)?;
    write_geojson(&ctx.path("network.geojson"), &network_to_geojson(&net, None))?;
    write_geojson(&ctx.path("blocks.geojson"), &blocks_to_geojson(&blocks, &[]))?;
    let mut cfg = ctx.cfg.clone();
    cfg.network = Some("network.geojson".into());
    cfg.blocks = Some("blocks.geojson".into());
    write_json(&ctx.path("config.json"), &cfg)?;
    let resolved = RunConfig::load(&ctx.path("config.json"))?;
    let ctx = Context { cfg: resolved, out: ctx.out.clone() };
    ctx.finish("synth", &["network.geojson", "blocks.geojson", "config.json"])
}
