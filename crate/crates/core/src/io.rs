//! GeoJSON and CSV persistence, run configuration and manifests.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use geo::{LineString, MultiLineString, MultiPolygon, Polygon};
use geojson::{Feature, FeatureCollection, GeoJson, Geometry, GeometryValue, JsonObject, JsonValue};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::allocator::{split_geometry, AllocationResult, ShareReport};
use crate::basins::ClusterHierarchy;
use crate::blockmap::{AccessibilityTensor, Block};
use crate::error::{Error, FeatureError, Result};
use crate::intensity::{ConstructionReport, IntensityResult};
use crate::landuse::{LandUse, PriorityOrder, UseMap};
use crate::netgraph::StreetNetwork;
use crate::pipeline::EvalConfig;
use crate::policy::{
    GroupSummary, NormObjectives, ObjectiveRecord, Policy, PolicySpace, RawObjectives, SpearmanMatrix,
};
use crate::tier::Tier;

pub fn parse_feature_collection(text: &str) -> Result<FeatureCollection> {
    let fc = match text.parse::<GeoJson>()? {
        GeoJson::FeatureCollection(fc) => fc,
        other => return Err(Error::Parse(format!("expected a FeatureCollection, got {}", kind(&other)))),
    };
    if fc.features.is_empty() {
        return Err(Error::EmptyCollection);
    }
    Ok(fc)
}

fn kind(g: &GeoJson) -> &'static str {
    match g {
        GeoJson::Geometry(_) => "Geometry",
        GeoJson::Feature(_) => "Feature",
        GeoJson::FeatureCollection(_) => "FeatureCollection",
    }
}

fn feature_id(f: &Feature, index: usize) -> String {
    let from_props = f.properties.as_ref().and_then(|p| p.get("id")).and_then(|v| match v {
        JsonValue::String(s) => Some(s.clone()),
        JsonValue::Number(n) => Some(n.to_string()),
        _ => None,
    });
    from_props
        .or_else(|| {
            f.id.as_ref().map(|id| match id {
                geojson::feature::Id::String(s) => s.clone(),
                geojson::feature::Id::Number(n) => n.to_string(),
            })
        })
        .unwrap_or_else(|| index.to_string())
}

/// Rejects data where every coordinate fits in lon/lat ranges.
fn check_projected<'a>(coords: impl IntoIterator<Item = &'a geo::Coord<f64>>) -> Result<()> {
    let mut any = false;
    for c in coords {
        any = true;
        if c.x.abs() > 180.0 || c.y.abs() > 90.0 {
            return Ok(());
        }
    }
    if any {
        Err(Error::GeographicCrs)
    } else {
        Ok(())
    }
}

fn geometry_of(f: &Feature) -> std::result::Result<&GeometryValue, String> {
    f.geometry.as_ref().map(|g| &g.value).ok_or_else(|| "missing geometry".to_string())
}

pub fn network_from_geojson(text: &str, snap_tolerance: f64) -> Result<StreetNetwork> {
    let fc = parse_feature_collection(text)?;
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    for (index, f) in fc.features.iter().enumerate() {
        let id = feature_id(f, index);
        let parsed: std::result::Result<Vec<LineString<f64>>, String> = geometry_of(f).and_then(|g| match g {
            GeometryValue::LineString { .. } => LineString::try_from(g).map(|l| vec![l]).map_err(|e| e.to_string()),
            GeometryValue::MultiLineString { .. } => {
                MultiLineString::try_from(g).map(|m| m.0).map_err(|e| e.to_string())
            }
            other => Err(format!("expected LineString, got {}", other.type_name())),
        });
        match parsed {
            Ok(parts) if parts.len() == 1 => lines.push((id, parts.into_iter().next().unwrap())),
            Ok(parts) => lines.extend(parts.into_iter().enumerate().map(|(k, l)| (format!("{id}#{k}"), l))),
            Err(message) => errors.push(FeatureError { index, message }),
        }
    }
    if !errors.is_empty() {
        return Err(Error::Features(errors));
    }
    check_projected(lines.iter().flat_map(|(_, l)| l.0.iter()))?;
    StreetNetwork::from_polylines(lines, snap_tolerance)
}

pub fn blocks_from_geojson(text: &str) -> Result<Vec<Block>> {
    let fc = parse_feature_collection(text)?;
    let mut polys = Vec::new();
    let mut errors = Vec::new();
    for (index, f) in fc.features.iter().enumerate() {
        let parsed: std::result::Result<Polygon<f64>, String> = geometry_of(f).and_then(|g| match g {
            GeometryValue::Polygon { .. } => Polygon::try_from(g).map_err(|e| e.to_string()),
            GeometryValue::MultiPolygon { .. } => match MultiPolygon::try_from(g) {
                Ok(mut m) if m.0.len() == 1 => Ok(m.0.remove(0)),
                Ok(m) => Err(format!("MultiPolygon with {} parts; split it into blocks", m.0.len())),
                Err(e) => Err(e.to_string()),
            },
            other => Err(format!("expected Polygon, got {}", other.type_name())),
        });
        match parsed {
            Ok(p) => polys.push((index, feature_id(f, index), p, f.property("lot_area").and_then(JsonValue::as_f64))),
            Err(message) => errors.push(FeatureError { index, message }),
        }
    }
    if errors.is_empty() {
        check_projected(polys.iter().flat_map(|(_, _, p, _)| p.exterior().0.iter()))?;
    }
    let mut blocks = Vec::new();
    for (index, id, poly, declared) in polys {
        let built = match declared {
            Some(a) => Block::with_declared_area(id, poly, a),
            None => Block::new(id, poly),
        };
        match built {
            Ok(b) => blocks.push(b),
            Err(e) => errors.push(FeatureError { index, message: e.to_string() }),
        }
    }
    if !errors.is_empty() {
        return Err(Error::Features(errors));
    }
    Ok(blocks)
}

pub fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    std::fs::File::open(path)?.read_to_string(&mut s)?;
    Ok(s)
}

pub fn load_site(network: &Path, blocks: &Path, snap_tolerance: f64) -> Result<(StreetNetwork, Vec<Block>)> {
    Ok((network_from_geojson(&read_text(network)?, snap_tolerance)?, blocks_from_geojson(&read_text(blocks)?)?))
}

fn feature(geometry: GeometryValue, properties: JsonObject) -> Feature {
    Feature {
        bbox: None,
        geometry: Some(Geometry::new(geometry)),
        id: None,
        properties: Some(properties),
        foreign_members: None,
    }
}

/// Street segments with `id` plus any extra per-segment properties.
pub fn network_to_geojson(network: &StreetNetwork, extra: Option<&[JsonObject]>) -> FeatureCollection {
    FeatureCollection::new(network.segments.iter().enumerate().map(|(k, s)| {
        let mut props = extra.and_then(|e| e.get(k)).cloned().unwrap_or_default();
        props.insert("id".into(), s.id.clone().into());
        feature(GeometryValue::from(&s.geometry), props)
    }))
}

/// Blocks with `id`, `lot_area` and extra per-block properties.
pub fn blocks_to_geojson(blocks: &[Block], extra: &[JsonObject]) -> FeatureCollection {
    FeatureCollection::new(blocks.iter().enumerate().map(|(k, b)| {
        let mut props = extra.get(k).cloned().unwrap_or_default();
        props.insert("id".into(), b.id.clone().into());
        props.insert("lot_area".into(), b.lot_area.into());
        feature(GeometryValue::from(&b.polygon), props)
    }))
}

pub fn access_properties(tensor: &AccessibilityTensor) -> Vec<JsonObject> {
    tensor
        .values
        .iter()
        .map(|row| row.iter().enumerate().map(|(t, v)| (format!("A_t{t}"), JsonValue::from(*v))).collect())
        .collect()
}

pub fn allocation_properties(result: &AllocationResult) -> Vec<JsonObject> {
    result
        .x
        .iter()
        .zip(&result.dominant)
        .map(|(row, u)| {
            let mut p = JsonObject::new();
            p.insert("use".into(), u.to_string().into());
            for (lu, v) in row.iter() {
                p.insert(format!("x_{lu}"), v.into());
            }
            p
        })
        .collect()
}

/// One feature per lot; mixed blocks are cut into strips by their use ratios.
pub fn lots_to_geojson(blocks: &[Block], intensity: &IntensityResult) -> Result<FeatureCollection> {
    let mut by_block: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, lot) in intensity.lots.iter().enumerate() {
        by_block.entry(lot.block).or_default().push(k);
    }
    let mut features = Vec::with_capacity(intensity.lots.len());
    for (block, lots) in by_block {
        let b = &blocks[block];
        let ratios: Vec<f64> = lots.iter().map(|&k| intensity.lots[k].area / b.lot_area).collect();
        let sum: f64 = ratios.iter().sum();
        let ratios: Vec<f64> = ratios.iter().map(|r| r / sum).collect();
        let pieces = split_geometry(&b.polygon, &ratios)?;
        for (&k, piece) in lots.iter().zip(pieces) {
            let lot = &intensity.lots[k];
            let mut p = JsonObject::new();
            p.insert("block_id".into(), b.id.clone().into());
            p.insert("use".into(), lot.land_use.to_string().into());
            p.insert("area".into(), lot.area.into());
            p.insert("far".into(), intensity.far[k].into());
            p.insert("height_m".into(), intensity.height[k].into());
            features.push(feature(GeometryValue::from(&piece), p));
        }
    }
    Ok(FeatureCollection::new(features))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn write_geojson(path: &Path, fc: &FeatureCollection) -> Result<()> {
    std::fs::write(path, GeoJson::from(fc.clone()).to_string())?;
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("{what}: not a number: {s:?}")))
}

pub fn write_clusters_csv<W: Write>(
    w: W,
    blocks: &[Block],
    hierarchy: &ClusterHierarchy,
    tiers: &[Tier],
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["block_id", "tier", "cluster_id", "is_center"])?;
    for (t, tc) in hierarchy.tiers.iter().enumerate() {
        let name = tiers.get(t).map_or_else(|| t.to_string(), |x| x.name().to_string());
        for (i, b) in blocks.iter().enumerate() {
            let c = tc.cluster_of[i];
            let center = tc.clusters[c].center == i;
            out.write_record([b.id.as_str(), &name, &c.to_string(), if center { "true" } else { "false" }])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_shares_csv<W: Write>(w: W, target: &UseMap<f64>, report: &ShareReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["use", "target_share", "achieved_share"])?;
    for &u in &LandUse::ALL {
        out.write_record([u.to_string(), num(target[u]), num(report.achieved[u])])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_construction_csv<W: Write>(w: W, report: &ConstructionReport, target: &UseMap<f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["use", "B_hat", "gamma_hat", "gamma_target"])?;
    for &u in &LandUse::ALL {
        out.write_record([u.to_string(), num(report.built[u]), num(report.shares[u]), num(target[u])])?;
    }
    out.flush()?;
    Ok(())
}

const RAW_COLS: [&str; 5] = ["au", "d_b", "d_lu", "d_cs", "jh"];
const NORM_COLS: [&str; 6] = ["n_one_minus_au", "n_d_b", "n_d_lu", "n_d_cs", "n_d_total", "n_jh"];

fn record_header(tiers: &[Tier]) -> Vec<String> {
    let mut h: Vec<String> = vec!["id".into(), "valid".into(), "error".into(), "tiers".into()];
    for prefix in ["radius", "sigma", "rho"] {
        h.extend(tiers.iter().map(|t| format!("{prefix}_{}", t.name())));
    }
    h.push("priority".into());
    h.extend(LandUse::ALL.iter().map(|u| format!("s_{u}")));
    h.extend(RAW_COLS.iter().map(|s| s.to_string()));
    h.extend(NORM_COLS.iter().map(|s| s.to_string()));
    h
}

/// One row per record. All records must share the tier list of the first.
pub fn write_records_csv<W: Write>(w: W, records: &[ObjectiveRecord]) -> Result<()> {
    let tiers = records.first().map(|r| r.policy.tiers.clone()).unwrap_or_default();
    let mut out = csv::Writer::from_writer(w);
    out.write_record(record_header(&tiers))?;
    for r in records {
        let p = &r.policy;
        if p.tiers != tiers {
            return Err(Error::InvalidConfig("records mix different tier sets".into()));
        }
        let mut row = vec![
            p.id.to_string(),
            r.valid.to_string(),
            r.error.clone().unwrap_or_default(),
            p.tiers.iter().map(|t| t.name()).collect::<Vec<_>>().join("|"),
        ];
        for v in [&p.radii, &p.sigma, &p.rho] {
            row.extend(v.iter().map(|x| num(*x)));
        }
        row.push(p.priority.to_string());
        row.extend(LandUse::ALL.iter().map(|&u| num(p.target_shares[u])));
        match r.raw {
            Some(x) => row.extend([x.au, x.d_b, x.d_lu, x.d_cs, x.jh].map(num)),
            None => row.extend(std::iter::repeat_n(String::new(), RAW_COLS.len())),
        }
        match r.norm {
            Some(n) => row.extend([n.one_minus_au, n.d_b, n.d_lu, n.d_cs, n.d_total, n.jh].map(num)),
            None => row.extend(std::iter::repeat_n(String::new(), NORM_COLS.len())),
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(r: R) -> Result<Vec<ObjectiveRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse(format!("missing column {name}")))
    };
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let get = |name: &str| -> Result<&str> { Ok(row.get(col(name)?).unwrap_or("")) };
        let tiers: Vec<Tier> =
            get("tiers")?.split('|').filter(|s| !s.is_empty()).map(str::parse).collect::<Result<_>>()?;
        let vec_of = |prefix: &str| -> Result<Vec<f64>> {
            tiers.iter().map(|t| parse_num(get(&format!("{prefix}_{}", t.name()))?, prefix)).collect()
        };
        let mut shares = UseMap([0.0; 8]);
        for &u in &LandUse::ALL {
            shares[u] = parse_num(get(&format!("s_{u}"))?, "share")?;
        }
        let policy = Policy {
            id: get("id")?.parse().map_err(|_| Error::Parse("id".into()))?,
            radii: vec_of("radius")?,
            sigma: vec_of("sigma")?,
            rho: vec_of("rho")?,
            tiers,
            target_shares: shares,
            priority: get("priority")?.parse::<PriorityOrder>()?,
        };
        let opt = |names: &[&str]| -> Result<Option<Vec<f64>>> {
            let vals: Vec<&str> = names.iter().map(|n| get(n)).collect::<Result<_>>()?;
            if vals.iter().all(|v| v.is_empty()) {
                return Ok(None);
            }
            Ok(Some(vals.iter().map(|v| parse_num(v, "objective")).collect::<Result<_>>()?))
        };
        let raw = opt(&RAW_COLS)?.map(|v| RawObjectives { au: v[0], d_b: v[1], d_lu: v[2], d_cs: v[3], jh: v[4] });
        let norm = opt(&NORM_COLS)?.map(|v| NormObjectives {
            one_minus_au: v[0],
            d_b: v[1],
            d_lu: v[2],
            d_cs: v[3],
            d_total: v[4],
            jh: v[5],
        });
        let error = Some(get("error")?.to_string()).filter(|s| !s.is_empty());
        let valid = get("valid")?.parse().map_err(|_| Error::Parse("valid".into()))?;
        out.push(ObjectiveRecord { policy, valid, error, raw, norm });
    }
    Ok(out)
}

pub fn write_sensitivity_csv<W: Write>(w: W, groups: &[GroupSummary]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["value".to_string(), "count".to_string()];
    for m in ["one_minus_au", "d_total", "jh"] {
        header.extend(["q1", "median", "q3"].iter().map(|q| format!("{m}_{q}")));
    }
    out.write_record(&header)?;
    for g in groups {
        let mut row = vec![num(g.value), g.count.to_string()];
        for q in [g.one_minus_au, g.d_total, g.jh] {
            row.extend([q.q1, q.median, q.q3].map(num));
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_spearman_csv<W: Write>(w: W, m: &SpearmanMatrix) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["metric".to_string()];
    header.extend(m.names.iter().cloned());
    out.write_record(&header)?;
    for (name, row) in m.names.iter().zip(&m.values) {
        let mut r = vec![name.clone()];
        r.extend(row.iter().map(|v| v.map(num).unwrap_or_default()));
        out.write_record(&r)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub n: usize,
    pub seed: u64,
    pub space: PolicySpace,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { n: 200, seed: 0, space: PolicySpace::default() }
    }
}

/// The whole run in one JSON document. An empty object gives every default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub network: Option<PathBuf>,
    pub blocks: Option<PathBuf>,
    pub policy: Policy,
    pub eval: EvalConfig,
    pub sampling: SamplingConfig,
}

impl RunConfig {
    /// Reads a config; relative input paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            serde_json::from_str(&read_text(path)?).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.network, &mut cfg.blocks].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        self.sampling.space.validate()?;
        for p in [&self.network, &self.blocks].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::InvalidConfig(format!("input file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// sha256 of the JSON serialization without the input paths; the
    /// manifest hashes input contents separately.
    pub fn hash(&self) -> String {
        let semantic = RunConfig { network: None, blocks: None, ..self.clone() };
        let bytes = serde_json::to_vec(&semantic).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

pub fn file_sha256(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub created_unix: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(cfg: &RunConfig, command: &str, outputs: Vec<String>) -> Result<Self> {
        let config_hash = cfg.hash();
        let mut inputs = BTreeMap::new();
        for p in [&cfg.network, &cfg.blocks].into_iter().flatten() {
            inputs.insert(p.display().to_string(), file_sha256(p)?);
        }
        let created_unix =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(RunManifest {
            run_id: format!("{command}-{}", &config_hash[..12]),
            config_hash,
            inputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix,
            outputs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::make_synthetic_grid;

    fn site_text() -> (String, String) {
        let (net, blocks) = make_synthetic_grid(6, 100.0).unwrap();
        let net = network_to_geojson(&net, None);
        let blk = blocks_to_geojson(&blocks, &[]);
        (GeoJson::from(net).to_string(), GeoJson::from(blk).to_string())
    }

    #[test]
    fn grid_round_trip() {
        let (n, b) = site_text();
        let (net0, blocks0) = make_synthetic_grid(6, 100.0).unwrap();
        let net = network_from_geojson(&n, 0.5).unwrap();
        let blocks = blocks_from_geojson(&b).unwrap();
        assert_eq!(blocks.len(), 25);
        assert_eq!(blocks, blocks0);
        assert_eq!(net, net0);
    }

    #[test]
    fn empty_collection_is_an_error() {
        let e = blocks_from_geojson(r#"{"type":"FeatureCollection","features":[]}"#).unwrap_err();
        assert!(matches!(e, Error::EmptyCollection));
    }

    #[test]
    fn lon_lat_is_rejected() {
        let text = r#"{"type":"FeatureCollection","features":[{"type":"Feature","properties":{},
            "geometry":{"type":"LineString","coordinates":[[-122.29,37.81],[-122.28,37.81]]}}]}"#;
        assert!(matches!(network_from_geojson(text, 0.5), Err(Error::GeographicCrs)));
    }

    #[test]
    fn per_feature_errors_are_collected() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{},"geometry":{"type":"Point","coordinates":[1000,1000]}},
            {"type":"Feature","properties":{},"geometry":{"type":"Polygon","coordinates":[[[1000,1000],[1100,1000],[1100,1100],[1000,1100],[1000,1000]]]}},
            {"type":"Feature","properties":{},"geometry":null}]}"#;
        match blocks_from_geojson(text) {
            Err(Error::Features(errs)) => assert_eq!(errs.iter().map(|e| e.index).collect::<Vec<_>>(), vec![0, 2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn declared_lot_area_is_checked() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"id":"a","lot_area":5},"geometry":{"type":"Polygon","coordinates":[[[1000,1000],[1100,1000],[1100,1100],[1000,1100],[1000,1000]]]}}]}"#;
        assert!(matches!(blocks_from_geojson(text), Err(Error::Features(_))));
    }

    #[test]
    fn records_round_trip() {
        let mut recs = vec![
            ObjectiveRecord::ok(
                Policy::knee_preset(),
                RawObjectives { au: 0.1, d_b: 1e12, d_lu: 0.3, d_cs: 1.0 / 3.0, jh: 0.5 },
            ),
            ObjectiveRecord::invalid(Policy { id: 1, ..Policy::knee_preset() }, &Error::ZeroHousing),
        ];
        recs[0].norm = Some(NormObjectives { one_minus_au: 0.25, d_total: 0.1, ..NormObjectives::default() });
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &recs).unwrap();
        let back = read_records_csv(buf.as_slice()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn config_defaults_and_hash() {
        let empty: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(empty, RunConfig::default());
        assert_eq!(empty.policy.radii, vec![1200.0, 900.0, 350.0]);
        assert_eq!(empty.eval.tau_int, 0.6);
        let mut other = empty.clone();
        assert_eq!(other.hash(), empty.hash());
        other.eval.far_anchor = 0.9;
        assert_ne!(other.hash(), empty.hash());
        let text = serde_json::to_string(&empty).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.hash(), empty.hash());
    }
}
