//! Device models: coupling graphs, per-qubit coherence, gate and readout
//! errors. Snapshots either load from calibration JSON files or are
//! synthesized from a seeded noise profile over a chosen topology.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive, str_salt};

/// Default gate durations used for synthesized devices, in microseconds.
pub const DEFAULT_SQ_DURATION_US: f64 = 0.035;
pub const DEFAULT_TQ_DURATION_US: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitProps {
    pub t1_us: f64,
    pub t2_us: f64,
    pub readout_error: f64,
    pub sq_error: f64,
    pub sq_duration_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeProps {
    pub tq_error: f64,
    pub tq_duration_us: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EdgePropsEntry {
    u: usize,
    v: usize,
    tq_error: f64,
    tq_duration_us: f64,
}

/// Wire format of a snapshot file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SnapshotFile {
    name: String,
    num_qubits: usize,
    calibration_date: String,
    edges: Vec<(usize, usize)>,
    qubits: Vec<QubitProps>,
    edge_props: Vec<EdgePropsEntry>,
}

/// Immutable calibration snapshot of one device.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSnapshot {
    name: String,
    num_qubits: usize,
    calibration_date: String,
    edges: Vec<(usize, usize)>,
    qubits: Vec<QubitProps>,
    edge_props: BTreeMap<(usize, usize), EdgeProps>,
    adjacency: Vec<Vec<usize>>,
}

fn norm_edge(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

fn check_prob(field: &str, p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::validation(field, format!("{p} not in [0, 1)")));
    }
    Ok(())
}

fn check_positive(field: &str, x: f64) -> Result<()> {
    if !(x > 0.0) {
        return Err(Error::validation(field, format!("{x} must be > 0")));
    }
    Ok(())
}

impl DeviceSnapshot {
    /// Validates all invariants and builds the adjacency index.
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        calibration_date: impl Into<String>,
        edges: Vec<(usize, usize)>,
        qubits: Vec<QubitProps>,
        edge_props: BTreeMap<(usize, usize), EdgeProps>,
    ) -> Result<Self> {
        if qubits.len() != num_qubits {
            return Err(Error::validation(
                "qubits",
                format!("{} entries for {num_qubits} qubits", qubits.len()),
            ));
        }
        for (q, props) in qubits.iter().enumerate() {
            check_positive(&format!("qubits[{q}].t1_us"), props.t1_us)?;
            check_positive(&format!("qubits[{q}].t2_us"), props.t2_us)?;
            check_prob(&format!("qubits[{q}].readout_error"), props.readout_error)?;
            check_prob(&format!("qubits[{q}].sq_error"), props.sq_error)?;
            if props.sq_duration_us < 0.0 {
                return Err(Error::validation(
                    format!("qubits[{q}].sq_duration_us"),
                    "negative duration",
                ));
            }
        }
        let mut normalized = Vec::with_capacity(edges.len());
        let mut seen = std::collections::BTreeSet::new();
        for &(u, v) in &edges {
            if u == v {
                return Err(Error::validation("edges", format!("self-loop on {u}")));
            }
            if u >= num_qubits || v >= num_qubits {
                return Err(Error::validation(
                    "edges",
                    format!("edge ({u}, {v}) references qubit >= {num_qubits}"),
                ));
            }
            let e = norm_edge(u, v);
            if !seen.insert(e) {
                return Err(Error::validation(
                    "edges",
                    format!("duplicate edge ({}, {})", e.0, e.1),
                ));
            }
            normalized.push(e);
        }
        normalized.sort_unstable();
        for e in &normalized {
            let props = edge_props.get(e).ok_or_else(|| {
                Error::validation("edge_props", format!("missing entry for ({}, {})", e.0, e.1))
            })?;
            check_prob(&format!("edge_props[({}, {})].tq_error", e.0, e.1), props.tq_error)?;
            if props.tq_duration_us < 0.0 {
                return Err(Error::validation(
                    format!("edge_props[({}, {})].tq_duration_us", e.0, e.1),
                    "negative duration",
                ));
            }
        }
        for e in edge_props.keys() {
            if !seen.contains(e) {
                return Err(Error::validation(
                    "edge_props",
                    format!("entry ({}, {}) has no matching edge", e.0, e.1),
                ));
            }
        }
        let mut adjacency = vec![Vec::new(); num_qubits];
        for &(u, v) in &normalized {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            name: name.into(),
            num_qubits,
            calibration_date: calibration_date.into(),
            edges: normalized,
            qubits,
            edge_props,
            adjacency,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn calibration_date(&self) -> &str {
        &self.calibration_date
    }

    /// Normalized (u < v), sorted edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn qubit(&self, q: usize) -> Result<&QubitProps> {
        self.qubits.get(q).ok_or(Error::IndexOutOfRange {
            index: q,
            limit: self.num_qubits,
        })
    }

    pub fn qubits(&self) -> &[QubitProps] {
        &self.qubits
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_props.contains_key(&norm_edge(u, v))
    }

    pub fn edge_props(&self, u: usize, v: usize) -> Option<&EdgeProps> {
        self.edge_props.get(&norm_edge(u, v))
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    /// Device-wide mean single-qubit error.
    pub fn mean_sq_error(&self) -> f64 {
        mean(self.qubits.iter().map(|p| p.sq_error))
    }

    /// Device-wide mean two-qubit error over edges.
    pub fn mean_tq_error(&self) -> f64 {
        mean(self.edge_props.values().map(|p| p.tq_error))
    }

    pub fn mean_readout_error(&self) -> f64 {
        mean(self.qubits.iter().map(|p| p.readout_error))
    }

    /// Shortest-path hop count between two physical qubits; `None` when
    /// they sit in different connected components.
    pub fn coupling_distance(&self, u: usize, v: usize) -> Result<Option<usize>> {
        for q in [u, v] {
            if q >= self.num_qubits {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    limit: self.num_qubits,
                });
            }
        }
        if u == v {
            return Ok(Some(0));
        }
        let mut dist = vec![usize::MAX; self.num_qubits];
        dist[u] = 0;
        let mut queue = std::collections::VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            for &y in &self.adjacency[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    if y == v {
                        return Ok(Some(dist[y]));
                    }
                    queue.push_back(y);
                }
            }
        }
        Ok(None)
    }

    fn to_file(&self) -> SnapshotFile {
        SnapshotFile {
            name: self.name.clone(),
            num_qubits: self.num_qubits,
            calibration_date: self.calibration_date.clone(),
            edges: self.edges.clone(),
            qubits: self.qubits.clone(),
            edge_props: self
                .edge_props
                .iter()
                .map(|(&(u, v), p)| EdgePropsEntry {
                    u,
                    v,
                    tq_error: p.tq_error,
                    tq_duration_us: p.tq_duration_us,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("snapshot serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let file: SnapshotFile = serde_json::from_str(text).map_err(|e| Error::Json {
            context: context.to_string(),
            source: e,
        })?;
        let edge_props = file
            .edge_props
            .iter()
            .map(|e| {
                (
                    norm_edge(e.u, e.v),
                    EdgeProps {
                        tq_error: e.tq_error,
                        tq_duration_us: e.tq_duration_us,
                    },
                )
            })
            .collect();
        DeviceSnapshot::new(
            file.name,
            file.num_qubits,
            file.calibration_date,
            file.edges,
            file.qubits,
            edge_props,
        )
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<DeviceSnapshot> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    DeviceSnapshot::from_json(&text, &path.display().to_string())
}

/// Root of the bundled data files. `NEST_DATA_DIR` overrides the
/// workspace-relative default.
pub fn data_dir() -> PathBuf {
    if let Ok(dir) = std::env::var("NEST_DATA_DIR") {
        return PathBuf::from(dir);
    }
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
}

// ---------------------------------------------------------------------------
// Topologies
// ---------------------------------------------------------------------------

/// Coupling-graph choice for a synthesized device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    EdgeListFile(PathBuf),
    HeavyHex27,
    HeavyHex127,
    Path(usize),
    Ring(usize),
}

/// Parses a whitespace-separated "u v" edge list; `#` starts a comment.
pub fn parse_edge_list(text: &str, context: &str) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut edges = Vec::new();
    let mut max_q = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.ok_or_else(|| Error::parse(context, format!("line {}: expected two indices", lineno + 1)))?
                .parse::<usize>()
                .map_err(|e| Error::parse(context, format!("line {}: {e}", lineno + 1)))
        };
        let u = parse(it.next())?;
        let v = parse(it.next())?;
        if it.next().is_some() {
            return Err(Error::parse(
                context,
                format!("line {}: trailing tokens", lineno + 1),
            ));
        }
        max_q = max_q.max(u).max(v);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(Error::parse(context, "no edges"));
    }
    Ok((max_q + 1, edges))
}

impl Topology {
    pub fn resolve(&self) -> Result<(usize, Vec<(usize, usize)>, String)> {
        match self {
            Topology::EdgeListFile(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
                let (q, edges) = parse_edge_list(&text, &path.display().to_string())?;
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "edge-list".to_string());
                Ok((q, edges, stem))
            }
            Topology::HeavyHex27 => {
                let path = data_dir().join("topologies/heavy_hex_27.txt");
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
                let (q, edges) = parse_edge_list(&text, "heavy_hex_27")?;
                Ok((q, edges, "heavy-hex-27".to_string()))
            }
            Topology::HeavyHex127 => {
                let path = data_dir().join("topologies/heavy_hex_127.txt");
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
                let (q, edges) = parse_edge_list(&text, "heavy_hex_127")?;
                Ok((q, edges, "heavy-hex-127".to_string()))
            }
            Topology::Path(q) => {
                if *q < 1 {
                    return Err(Error::InvalidSpec("path topology needs >= 1 qubit".into()));
                }
                let edges = (0..q.saturating_sub(1)).map(|i| (i, i + 1)).collect();
                Ok((*q, edges, format!("path{q}")))
            }
            Topology::Ring(q) => {
                if *q < 3 {
                    return Err(Error::InvalidSpec("ring topology needs >= 3 qubits".into()));
                }
                let edges = (0..*q).map(|i| (i, (i + 1) % q)).collect();
                Ok((*q, edges, format!("ring{q}")))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

/// Seeded noise profile; all ranges are inclusive (lo, hi) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub seed: u64,
    pub sq_error_range: (f64, f64),
    pub tq_error_range: (f64, f64),
    pub readout_range: (f64, f64),
    pub t1_range_us: (f64, f64),
    pub t2_range_us: (f64, f64),
    /// 0 = independent draws, 1 = smoothly varying over graph distance.
    pub spatial_correlation: f64,
}

impl Default for NoiseProfile {
    fn default() -> Self {
        Self {
            seed: 0,
            sq_error_range: (2e-4, 2e-3),
            tq_error_range: (4e-3, 4e-2),
            readout_range: (5e-3, 5e-2),
            t1_range_us: (80.0, 300.0),
            t2_range_us: (60.0, 250.0),
            spatial_correlation: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDeviceSpec {
    pub topology: Topology,
    pub noise_profile: NoiseProfile,
}

fn check_range(name: &str, (lo, hi): (f64, f64), prob: bool) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidSpec(format!("{name}: bad range ({lo}, {hi})")));
    }
    if prob {
        if lo < 0.0 || hi >= 1.0 {
            return Err(Error::InvalidSpec(format!(
                "{name}: range ({lo}, {hi}) must lie in [0, 1)"
            )));
        }
    } else if lo <= 0.0 {
        return Err(Error::InvalidSpec(format!("{name}: must be positive")));
    }
    Ok(())
}

/// One latent value per site, iid U(0,1).
fn latents(seed: u64, stream: &str, count: usize) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(derive(seed, &[str_salt(stream)]));
    (0..count).map(|_| rng.random::<f64>()).collect()
}

/// Blends iid site noise with a neighbor-smoothed field, then rescales to
/// [0, 1]. `neighbors(i)` enumerates adjacent sites.
fn correlated_field(
    latent: &[f64],
    smooth_basis: &[f64],
    neighbors: impl Fn(usize) -> Vec<usize>,
    correlation: f64,
) -> Vec<f64> {
    let n = latent.len();
    let mut field = smooth_basis.to_vec();
    for _ in 0..4 {
        let prev = field.clone();
        for (i, slot) in field.iter_mut().enumerate() {
            let mut sum = prev[i];
            let mut count = 1.0;
            for j in neighbors(i) {
                sum += prev[j];
                count += 1.0;
            }
            *slot = sum / count;
        }
    }
    let mut blended: Vec<f64> = (0..n)
        .map(|i| (1.0 - correlation) * latent[i] + correlation * field[i])
        .collect();
    let lo = blended.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = blended.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-15 {
        blended.iter_mut().for_each(|x| *x = 0.5);
    } else {
        blended.iter_mut().for_each(|x| *x = (*x - lo) / (hi - lo));
    }
    blended
}

fn scale(range: (f64, f64), x: f64) -> f64 {
    range.0 + x * (range.1 - range.0)
}

/// Deterministically synthesizes a snapshot from a spec; the same spec
/// (seed included) always yields a byte-identical snapshot.
pub fn synthesize_device(spec: &SyntheticDeviceSpec) -> Result<DeviceSnapshot> {
    let p = &spec.noise_profile;
    check_range("sq_error_range", p.sq_error_range, true)?;
    check_range("tq_error_range", p.tq_error_range, true)?;
    check_range("readout_range", p.readout_range, true)?;
    check_range("t1_range_us", p.t1_range_us, false)?;
    check_range("t2_range_us", p.t2_range_us, false)?;
    if !(0.0..=1.0).contains(&p.spatial_correlation) {
        return Err(Error::InvalidSpec(format!(
            "spatial_correlation {} not in [0, 1]",
            p.spatial_correlation
        )));
    }

    let (num_qubits, raw_edges, topo_name) = spec.topology.resolve()?;
    let mut edges: Vec<(usize, usize)> = raw_edges.iter().map(|&(u, v)| norm_edge(u, v)).collect();
    edges.sort_unstable();
    edges.dedup();

    let mut adjacency = vec![Vec::new(); num_qubits];
    for (idx, &(u, v)) in edges.iter().enumerate() {
        adjacency[u].push((v, idx));
        adjacency[v].push((u, idx));
    }

    let corr = p.spatial_correlation;
    let node_neighbors = |i: usize| -> Vec<usize> { adjacency[i].iter().map(|&(q, _)| q).collect() };

    // Qubit-valued fields share one smoothing basis per field kind.
    let mut node_field = |stream: &str| -> Vec<f64> {
        let latent = latents(p.seed, stream, num_qubits);
        correlated_field(&latent, &latent, node_neighbors, corr)
    };
    let sq = node_field("sq_error");
    let readout = node_field("readout");
    let t1 = node_field("t1");
    let t2 = node_field("t2");

    // Edge field: iid edge latents blended with the mean of a smoothed
    // node field, so correlation couples adjacent edges through shared
    // endpoints while correlation = 0 stays fully independent.
    let edge_latent = latents(p.seed, "tq_edge", edges.len());
    let tq_node_latent = latents(p.seed, "tq_node", num_qubits);
    let tq_node = correlated_field(&tq_node_latent, &tq_node_latent, node_neighbors, corr);
    let edge_basis: Vec<f64> = edges
        .iter()
        .map(|&(u, v)| 0.5 * (tq_node[u] + tq_node[v]))
        .collect();
    let tq: Vec<f64> = {
        let blended: Vec<f64> = (0..edges.len())
            .map(|i| (1.0 - corr) * edge_latent[i] + corr * edge_basis[i])
            .collect();
        let lo = blended.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = blended.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-15 {
            vec![0.5; edges.len()]
        } else {
            blended.iter().map(|x| (x - lo) / (hi - lo)).collect()
        }
    };

    let qubits: Vec<QubitProps> = (0..num_qubits)
        .map(|q| QubitProps {
            t1_us: scale(p.t1_range_us, t1[q]),
            t2_us: scale(p.t2_range_us, t2[q]),
            readout_error: scale(p.readout_range, readout[q]),
            sq_error: scale(p.sq_error_range, sq[q]),
            sq_duration_us: DEFAULT_SQ_DURATION_US,
        })
        .collect();
    let edge_props: BTreeMap<(usize, usize), EdgeProps> = edges
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            (
                e,
                EdgeProps {
                    tq_error: scale(p.tq_error_range, tq[i]),
                    tq_duration_us: DEFAULT_TQ_DURATION_US,
                },
            )
        })
        .collect();

    DeviceSnapshot::new(
        format!("{topo_name}-seed{}", p.seed),
        num_qubits,
        "2026-01-01T00:00:00Z",
        edges,
        qubits,
        edge_props,
    )
}
