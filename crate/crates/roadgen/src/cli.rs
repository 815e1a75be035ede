//! Command-line surface: one subcommand per pipeline plus the interactive
//! chat mode. On success every command prints only the produced file paths
//! on stdout, one per line; all prose goes to stderr. Exit codes: 0 success,
//! 1 usage error, 2 runtime failure.

use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::agent::tools::{default_registry, ToolContext};
use crate::agent::{
    compute_metrics, run_session, HttpModel, ModelClient, ScriptedModel, SessionLog, SessionOutcome,
    TrialSpec,
};
use crate::geo::{GeoPoint, Projection};
use crate::gmns::{emit_gmns, parse_gmns};
use crate::grid::{generate_grid, GridSpec, DEFAULT_MAX_CELLS};
use crate::osm::{self, Geocoder, HttpGeocoder, HighwayFilter};
use crate::raster::{
    extract_network_stages, preprocess_sketch, BinaryMask, ConnectParams, CornerParams,
};
use crate::sumo::{export_sumo_plain_with, run_netconvert, write_sumo_plain, CoordinateMode};
use crate::svg::{render_svg, RenderStyle};

/// Runtime configuration. Precedence: built-in defaults, then the config
/// file, then command-line flags, then environment variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub anchor_lat: f64,
    pub anchor_lon: f64,
    pub scale: f64,
    pub geocoder_url: Option<String>,
    pub geocoder_key: Option<String>,
    pub osm_url: Option<String>,
    pub model_url: Option<String>,
    pub model_name: Option<String>,
    pub api_key: Option<String>,
    pub out_dir: PathBuf,
    pub max_grid_cells: u64,
    pub fetch_cap_bytes: u64,
    pub radius_m: f64,
    pub timeout_secs: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            anchor_lat: crate::geo::DEFAULT_ANCHOR_LAT,
            anchor_lon: crate::geo::DEFAULT_ANCHOR_LON,
            scale: crate::geo::DEFAULT_SCALE_DEG,
            geocoder_url: None,
            geocoder_key: None,
            osm_url: None,
            model_url: None,
            model_name: None,
            api_key: None,
            out_dir: PathBuf::from("out"),
            max_grid_cells: DEFAULT_MAX_CELLS,
            fetch_cap_bytes: osm::DEFAULT_FETCH_CAP_BYTES,
            radius_m: osm::DEFAULT_RADIUS_M,
            timeout_secs: 30,
        }
    }
}

const CONFIG_FILE_NAME: &str = "roadgen.conf";

impl Config {
    /// Loads defaults, then the config file (explicit path, `$ROADGEN_CONFIG`,
    /// or `./roadgen.conf` when present).
    pub fn load(explicit: Option<&Path>) -> Result<Self> {
        let mut config = Config::default();
        let path = explicit
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os("ROADGEN_CONFIG").map(PathBuf::from))
            .or_else(|| {
                let conventional = PathBuf::from(CONFIG_FILE_NAME);
                conventional.is_file().then_some(conventional)
            });
        if let Some(path) = path {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            config.apply_file(&text, &path)?;
        }
        Ok(config)
    }

    fn apply_file(&mut self, text: &str, path: &Path) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let parse_num = |what: &str| -> Result<f64> {
                value
                    .parse()
                    .with_context(|| format!("{}:{}: bad {what} {value:?}", path.display(), lineno + 1))
            };
            match key {
                "anchor_lat" => self.anchor_lat = parse_num("anchor_lat")?,
                "anchor_lon" => self.anchor_lon = parse_num("anchor_lon")?,
                "scale" => self.scale = parse_num("scale")?,
                "geocoder_url" => self.geocoder_url = Some(value.to_string()),
                "geocoder_key" => self.geocoder_key = Some(value.to_string()),
                "osm_url" => self.osm_url = Some(value.to_string()),
                "model_url" => self.model_url = Some(value.to_string()),
                "model_name" => self.model_name = Some(value.to_string()),
                "api_key" => self.api_key = Some(value.to_string()),
                "out_dir" => self.out_dir = PathBuf::from(value),
                "max_grid_cells" => self.max_grid_cells = parse_num("max_grid_cells")? as u64,
                "fetch_cap_bytes" => self.fetch_cap_bytes = parse_num("fetch_cap_bytes")? as u64,
                "radius_m" => self.radius_m = parse_num("radius_m")?,
                "timeout_secs" => self.timeout_secs = parse_num("timeout_secs")? as u64,
                other => bail!("{}:{}: unknown config key {other:?}", path.display(), lineno + 1),
            }
        }
        Ok(())
    }

    /// Applies environment overrides; these take precedence over flags.
    pub fn apply_env(&mut self) {
        let var = |name: &str| std::env::var(name).ok().filter(|v| !v.is_empty());
        if let Some(v) = var("ROADGEN_GEOCODER_URL") {
            self.geocoder_url = Some(v);
        }
        if let Some(v) = var("ROADGEN_GEOCODER_KEY") {
            self.geocoder_key = Some(v);
        }
        if let Some(v) = var("ROADGEN_OSM_URL") {
            self.osm_url = Some(v);
        }
        if let Some(v) = var("ROADGEN_MODEL_URL") {
            self.model_url = Some(v);
        }
        if let Some(v) = var("ROADGEN_MODEL_NAME") {
            self.model_name = Some(v);
        }
        if let Some(v) = var("ROADGEN_API_KEY") {
            self.api_key = Some(v);
        }
    }

    pub fn projection(&self) -> Result<Projection> {
        let anchor = GeoPoint::new(self.anchor_lon, self.anchor_lat)?;
        Ok(Projection::new(anchor, self.scale)?)
    }
}

#[derive(Parser, Debug)]
#[command(name = "roadgen", version, about = "Road network generation toolkit")]
struct Cli {
    /// Config file path (default: $ROADGEN_CONFIG or ./roadgen.conf).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ProjectionArgs {
    /// Anchor latitude in degrees.
    #[arg(long)]
    lat: Option<f64>,
    /// Anchor longitude in degrees.
    #[arg(long)]
    lon: Option<f64>,
    /// Degrees per planar unit.
    #[arg(long)]
    scale: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a regular grid network.
    Grid {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        rows: u32,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        cols: u32,
        #[command(flatten)]
        projection: ProjectionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the network around a named location from OSM data.
    Place {
        #[arg(long)]
        name: String,
        /// Search radius in meters.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Convert a local .osm file instead of fetching over HTTP.
        #[arg(long)]
        osm_file: Option<PathBuf>,
    },
    /// Extract a network from a binary road-mask image.
    FromImage {
        #[arg(long)]
        mask: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        m_per_px: f64,
        #[arg(long)]
        out: PathBuf,
        /// Write intermediate rasters (mask, corners, first-round canvas).
        #[arg(long)]
        dump_stages: Option<PathBuf>,
    },
    /// Extract a network from a hand-drawn sketch image.
    FromSketch {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dump_stages: Option<PathBuf>,
    },
    /// Render GMNS files as an SVG overview.
    Render {
        /// Directory containing Node.csv and Link.csv.
        #[arg(long)]
        gmns: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert GMNS files to SUMO plain node/edge XML.
    ExportSumo {
        #[arg(long)]
        gmns: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write lon/lat instead of planar coordinates.
        #[arg(long)]
        geo: bool,
        /// Also combine the plain files with the external netconvert tool.
        #[arg(long)]
        netconvert: bool,
    },
    /// Run routing trials and write the metrics table.
    EvalRouter {
        /// JSON-lines trial file: {"prompt", "expected_tool", "language", "form"}.
        #[arg(long)]
        trials: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON-lines scripted replies, one JSON array of strings per trial.
        #[arg(long)]
        mock: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        max_steps: usize,
    },
    /// Interactive mode: type a request, watch the tools run.
    Chat {
        /// Scripted replies (one per line) instead of a live model.
        #[arg(long)]
        mock: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        max_steps: usize,
    },
}

/// Parses `argv` and runs the requested command, returning the process exit
/// code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(paths) => {
            for path in paths {
                println!("{}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("roadgen: {e:#}");
            2
        }
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let mut config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Grid { rows, cols, projection, out } => {
            apply_projection_flags(&mut config, &projection);
            config.apply_env();
            let spec = GridSpec {
                rows,
                cols,
                projection: config.projection()?,
                max_cells: config.max_grid_cells,
            };
            let graph = generate_grid(&spec)?;
            emit_graph_outputs(&graph, &out)
        }
        Command::Place { name, radius, out, osm_file } => {
            if let Some(radius) = radius {
                config.radius_m = radius;
            }
            config.apply_env();
            run_place(&config, &name, &out, osm_file.as_deref())
        }
        Command::FromImage { mask, m_per_px, out, dump_stages } => {
            config.apply_env();
            let img = image::open(&mask)
                .with_context(|| format!("cannot open mask image {}", mask.display()))?
                .to_luma8();
            let binary = BinaryMask::from_gray(&img);
            extract_and_emit(&config, &binary, m_per_px, &out, dump_stages.as_deref())
        }
        Command::FromSketch { image: image_path, out, dump_stages } => {
            config.apply_env();
            let img = image::open(&image_path)
                .with_context(|| format!("cannot open sketch image {}", image_path.display()))?
                .to_luma8();
            let binary = preprocess_sketch(&img)?;
            extract_and_emit(&config, &binary, 1.0, &out, dump_stages.as_deref())
        }
        Command::Render { gmns, out } => {
            config.apply_env();
            let graph = parse_gmns(&gmns.join("Node.csv"), &gmns.join("Link.csv"), config.projection()?)?;
            let svg = render_svg(&graph, &RenderStyle::default())?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&out, svg).with_context(|| format!("cannot write {}", out.display()))?;
            Ok(vec![absolute(&out)?])
        }
        Command::ExportSumo { gmns, out, geo, netconvert } => {
            config.apply_env();
            let graph = parse_gmns(&gmns.join("Node.csv"), &gmns.join("Link.csv"), config.projection()?)?;
            let mode = if geo { CoordinateMode::Geographic } else { CoordinateMode::Planar };
            let files = export_sumo_plain_with(&graph, mode);
            let (nod, edg) = write_sumo_plain(&files, &out)?;
            let mut paths = vec![nod, edg];
            if netconvert {
                paths.push(run_netconvert(&files, &out)?);
            }
            Ok(paths)
        }
        Command::EvalRouter { trials, out, mock, max_steps } => {
            config.apply_env();
            run_eval(&config, &trials, &out, mock.as_deref(), max_steps)
        }
        Command::Chat { mock, out, max_steps } => {
            config.apply_env();
            if let Some(out) = out {
                config.out_dir = out;
            }
            run_chat(&config, mock.as_deref(), max_steps)?;
            Ok(Vec::new())
        }
    }
}

fn apply_projection_flags(config: &mut Config, flags: &ProjectionArgs) {
    if let Some(lat) = flags.lat {
        config.anchor_lat = lat;
    }
    if let Some(lon) = flags.lon {
        config.anchor_lon = lon;
    }
    if let Some(scale) = flags.scale {
        config.scale = scale;
    }
}

fn absolute(path: &Path) -> Result<PathBuf> {
    Ok(std::fs::canonicalize(path)?)
}

fn emit_graph_outputs(graph: &crate::geo::NetworkGraph, out: &Path) -> Result<Vec<PathBuf>> {
    let (node_path, link_path) = emit_gmns(graph, out)?;
    let svg = render_svg(graph, &RenderStyle::default())?;
    let svg_path = node_path.with_file_name("network.svg");
    std::fs::write(&svg_path, svg).with_context(|| format!("cannot write {}", svg_path.display()))?;
    Ok(vec![node_path, link_path, svg_path])
}

fn run_place(config: &Config, name: &str, out: &Path, osm_file: Option<&Path>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let timeout = Duration::from_secs(config.timeout_secs);

    let (bytes, anchor) = match osm_file {
        Some(path) => {
            let bytes =
                std::fs::read(path).with_context(|| format!("cannot read OSM file {}", path.display()))?;
            (bytes, None)
        }
        None => {
            let geocoder_url = config
                .geocoder_url
                .as_deref()
                .ok_or_else(|| anyhow!("no geocoder endpoint configured (set ROADGEN_GEOCODER_URL)"))?;
            let osm_url = config
                .osm_url
                .as_deref()
                .ok_or_else(|| anyhow!("no OSM endpoint configured (set ROADGEN_OSM_URL)"))?;
            let provider = HttpGeocoder {
                endpoint: geocoder_url.to_string(),
                api_key: config.geocoder_key.clone(),
                timeout,
            };
            let located = osm::geocode(name, &provider)?;
            eprintln!(
                "geocoded {:?} to lat {:.6}, lon {:.6}",
                name, located.point.lat, located.point.lon
            );
            let bbox = osm::bbox_around(located.point, config.radius_m)?;
            let bytes = osm::fetch_osm(&bbox, osm_url, timeout, config.fetch_cap_bytes)?;
            (bytes, Some(located.point))
        }
    };

    // Keep the raw download beside the outputs for provenance.
    let raw_path = out.join("source.osm");
    std::fs::write(&raw_path, &bytes)?;

    let doc = osm::parse_osm(&bytes)?;
    let graph = match anchor {
        Some(center) => {
            let projection = Projection::new(center, config.scale)?;
            osm::osm_to_network_with(&doc, &HighwayFilter::default(), projection)?
        }
        None => osm::osm_to_network(&doc, &HighwayFilter::default())?,
    };
    eprintln!("converted {} nodes, {} links", graph.nodes.len(), graph.links.len());

    let mut paths = vec![absolute(&raw_path)?];
    paths.extend(emit_graph_outputs(&graph, out)?);
    Ok(paths)
}

fn extract_and_emit(
    config: &Config,
    mask: &BinaryMask,
    m_per_px: f64,
    out: &Path,
    dump_stages: Option<&Path>,
) -> Result<Vec<PathBuf>> {
    let (graph, stages) = extract_network_stages(
        mask,
        &CornerParams::default(),
        &ConnectParams::default(),
        config.projection()?,
        m_per_px,
    )?;
    eprintln!(
        "extracted {} corners -> {} nodes, {} links",
        stages.corners.len(),
        graph.nodes.len(),
        graph.links.len()
    );
    let mut paths = emit_graph_outputs(&graph, out)?;
    if let Some(dir) = dump_stages {
        std::fs::create_dir_all(dir)?;
        let mask_path = dir.join("binary_mask.png");
        mask.to_gray().save(&mask_path)?;
        let mut overlay = mask.to_gray();
        for p in overlay.pixels_mut() {
            p[0] /= 2;
        }
        for c in &stages.corners {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let x = c.x.round() as i64 + dx;
                    let y = c.y.round() as i64 + dy;
                    if x >= 0 && y >= 0 && (x as u32) < overlay.width() && (y as u32) < overlay.height() {
                        overlay.put_pixel(x as u32, y as u32, image::Luma([255]));
                    }
                }
            }
        }
        let corners_path = dir.join("corners.png");
        overlay.save(&corners_path)?;
        let first_path = dir.join("first_round.png");
        stages.first_round_canvas.to_gray().save(&first_path)?;
        paths.extend([absolute(&mask_path)?, absolute(&corners_path)?, absolute(&first_path)?]);
    }
    Ok(paths)
}

fn read_trials(path: &Path) -> Result<Vec<TrialSpec>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read trials file {}", path.display()))?;
    let mut trials = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let spec: TrialSpec = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: bad trial record", path.display(), lineno + 1))?;
        trials.push(spec);
    }
    if trials.is_empty() {
        bail!("trials file {} contains no records", path.display());
    }
    Ok(trials)
}

fn read_mock_scripts(path: &Path, expected: usize) -> Result<Vec<Vec<String>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read mock file {}", path.display()))?;
    let mut scripts = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let replies: Vec<String> = serde_json::from_str(line).with_context(|| {
            format!("{}:{}: expected a JSON array of reply strings", path.display(), lineno + 1)
        })?;
        scripts.push(replies);
    }
    if scripts.len() != expected {
        bail!(
            "mock file {} has {} scripts but there are {} trials",
            path.display(),
            scripts.len(),
            expected
        );
    }
    Ok(scripts)
}

fn http_model(config: &Config) -> Result<HttpModel> {
    let base_url = config
        .model_url
        .as_deref()
        .ok_or_else(|| anyhow!("no model endpoint configured (set ROADGEN_MODEL_URL or use --mock)"))?;
    let model_name = config
        .model_name
        .as_deref()
        .ok_or_else(|| anyhow!("no model name configured (set ROADGEN_MODEL_NAME)"))?;
    let mut model = HttpModel::new(base_url, model_name);
    model.api_key = config.api_key.clone();
    model.timeout = Duration::from_secs(config.timeout_secs.max(60));
    Ok(model)
}

fn build_tool_context(config: &Config, out_dir: PathBuf) -> Result<ToolContext> {
    let mut ctx = ToolContext::new(out_dir);
    ctx.projection = config.projection()?;
    ctx.fetch_timeout = Duration::from_secs(config.timeout_secs);
    ctx.fetch_cap_bytes = config.fetch_cap_bytes;
    ctx.osm_endpoint = config.osm_url.clone();
    if let Some(url) = &config.geocoder_url {
        let provider: Box<dyn Geocoder + Send + Sync> = Box::new(HttpGeocoder {
            endpoint: url.clone(),
            api_key: config.geocoder_key.clone(),
            timeout: Duration::from_secs(config.timeout_secs),
        });
        ctx.geocoder = Some(provider);
    }
    Ok(ctx)
}

fn run_eval(
    config: &Config,
    trials_path: &Path,
    out: &Path,
    mock: Option<&Path>,
    max_steps: usize,
) -> Result<Vec<PathBuf>> {
    let trials = read_trials(trials_path)?;
    let work_dir = out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(|p| p.join("eval-work"))
        .unwrap_or_else(|| PathBuf::from("eval-work"));
    let registry = default_registry(build_tool_context(config, work_dir)?)?;

    let mut logs: Vec<SessionLog> = Vec::new();
    match mock {
        Some(mock_path) => {
            let scripts = read_mock_scripts(mock_path, trials.len())?;
            for (trial, script) in trials.iter().zip(scripts) {
                let model = ScriptedModel::new(script);
                logs.push(run_session(&trial.prompt, &registry, &model, max_steps)?);
            }
        }
        None => {
            let model = http_model(config)?;
            for trial in &trials {
                logs.push(run_session(&trial.prompt, &registry, &model, max_steps)?);
            }
        }
    }

    for (log, trial) in logs.iter().zip(trials.iter()) {
        let verdict = match log.call_names().first() {
            Some(first) if *first == trial.expected_tool => "ok".to_string(),
            Some(first) => format!("expected {}, got {first}", trial.expected_tool),
            None => "no tool called".to_string(),
        };
        eprintln!(
            "[{}/{}] {} calls, {verdict}",
            trial.language,
            trial.form.as_str(),
            log.step_count()
        );
    }

    let table = compute_metrics(&logs, &trials)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(out, table.to_csv()).with_context(|| format!("cannot write {}", out.display()))?;
    Ok(vec![absolute(out)?])
}

fn run_chat(config: &Config, mock: Option<&Path>, max_steps: usize) -> Result<()> {
    let registry = default_registry(build_tool_context(config, config.out_dir.clone())?)?;
    let model: Box<dyn ModelClient> = match mock {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read mock file {}", path.display()))?;
            Box::new(ScriptedModel::new(text.lines().filter(|l| !l.trim().is_empty()).map(String::from)))
        }
        None => Box::new(http_model(config)?),
    };

    eprintln!("roadgen chat; describe the road network you need (Ctrl-D to quit)");
    let stdin = std::io::stdin();
    for line in stdin.lock().lines() {
        let request = line?;
        if request.trim().is_empty() {
            continue;
        }
        let log = run_session(&request, &registry, model.as_ref(), max_steps)?;
        for step in &log.steps {
            eprintln!("> {}({})", step.call_name, serde_json::Value::Object(step.call_args.clone()));
            // Observations listing produced files go to stdout, prose to stderr.
            for obs_line in step.observation.lines() {
                if Path::new(obs_line).is_file() {
                    println!("{obs_line}");
                } else {
                    eprintln!("  {obs_line}");
                }
            }
        }
        match &log.outcome {
            SessionOutcome::Final(answer) => eprintln!("{answer}"),
            SessionOutcome::MaxStepsReached => eprintln!("(stopped: step budget exhausted)"),
            SessionOutcome::UnparseableReplies => eprintln!("(stopped: model replies were unparseable)"),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_flag_env_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roadgen.conf");
        std::fs::write(&path, "anchor_lat = 10.5\nscale = 0.01\nosm_url = http://file.example/api\n").unwrap();
        let config = Config::load(Some(&path)).unwrap();
        assert_eq!(config.anchor_lat, 10.5);
        assert_eq!(config.scale, 0.01);
        assert_eq!(config.osm_url.as_deref(), Some("http://file.example/api"));
        // Defaults survive for unset keys.
        assert_eq!(config.anchor_lon, crate::geo::DEFAULT_ANCHOR_LON);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roadgen.conf");
        std::fs::write(&path, "anchor_latitude = 1\n").unwrap();
        assert!(Config::load(Some(&path)).is_err());
    }

    #[test]
    fn config_ignores_comments_and_sections() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roadgen.conf");
        std::fs::write(&path, "# comment\n[projection]\nanchor_lat = 1.25\n; other\n").unwrap();
        let config = Config::load(Some(&path)).unwrap();
        assert_eq!(config.anchor_lat, 1.25);
    }
}
