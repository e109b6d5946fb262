//! Model and data containers: pairwise binary Markov networks with
//! external fields, seeded random graph generation, CSV-backed binary
//! datasets, and column-copy plans that induce exact collinearity.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise Markov network over p binary nodes taking values in {0,1}.
///
/// `fields[s]` is the external field of node s and `interactions` is a
/// symmetric p-by-p matrix with zero diagonal holding the edge weights.
/// The joint probability of a configuration x is proportional to
/// `exp(sum_s fields[s] x_s + sum_{s<t} interactions[(s,t)] x_s x_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    fields: Vec<f64>,
    interactions: Array2<f64>,
}

impl IsingModel {
    /// Builds a model from explicit fields and a full interaction matrix.
    ///
    /// The matrix must be square with side `fields.len()`, exactly
    /// symmetric, zero on the diagonal, and finite everywhere.
    pub fn new(fields: Vec<f64>, interactions: Array2<f64>) -> Result<Self> {
        let p = fields.len();
        if p == 0 {
            return Err(Error::InvalidParameter("model needs at least one node".into()));
        }
        if interactions.nrows() != p || interactions.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "interaction matrix is {}x{}, expected {p}x{p}",
                interactions.nrows(),
                interactions.ncols()
            )));
        }
        if fields.iter().any(|v| !v.is_finite()) || interactions.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        for s in 0..p {
            if interactions[[s, s]] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "interaction diagonal must be zero, node {s} has {}",
                    interactions[[s, s]]
                )));
            }
            for t in (s + 1)..p {
                if interactions[[s, t]] != interactions[[t, s]] {
                    return Err(Error::InvalidParameter(format!(
                        "interactions must be symmetric, pair ({s},{t}) differs"
                    )));
                }
            }
        }
        Ok(Self { fields, interactions })
    }

    /// Builds a model from an edge list; absent pairs get weight zero.
    pub fn from_edges(p: usize, fields: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if fields.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} fields for {p} nodes",
                fields.len()
            )));
        }
        let mut interactions = Array2::<f64>::zeros((p, p));
        let mut seen = std::collections::BTreeSet::new();
        for &(s, t, w) in edges {
            if s >= p || t >= p {
                return Err(Error::InvalidData(format!("edge ({s},{t}) out of range for p={p}")));
            }
            if s == t {
                return Err(Error::InvalidData(format!("self edge on node {s}")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidData(format!("edge ({s},{t}) has non-finite weight")));
            }
            let key = (s.min(t), s.max(t));
            if !seen.insert(key) {
                return Err(Error::InvalidData(format!(
                    "duplicate edge ({},{})",
                    key.0, key.1
                )));
            }
            interactions[[s, t]] = w;
            interactions[[t, s]] = w;
        }
        Self::new(fields, interactions)
    }

    /// Number of nodes.
    pub fn p(&self) -> usize {
        self.fields.len()
    }

    pub fn field(&self, s: usize) -> f64 {
        self.fields[s]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn interaction(&self, s: usize, t: usize) -> f64 {
        self.interactions[[s, t]]
    }

    pub fn interactions(&self) -> &Array2<f64> {
        &self.interactions
    }

    /// Nodes t with a nonzero interaction with s, ascending.
    pub fn neighbors(&self, s: usize) -> Vec<usize> {
        (0..self.p()).filter(|&t| t != s && self.interactions[[s, t]] != 0.0).collect()
    }

    /// Edges (s, t, weight) with s < t and nonzero weight, ascending in (s, t).
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let p = self.p();
        let mut out = Vec::new();
        for s in 0..p {
            for t in (s + 1)..p {
                let w = self.interactions[[s, t]];
                if w != 0.0 {
                    out.push((s, t, w));
                }
            }
        }
        out
    }

    /// Linear predictor of the conditional law of node s given the rest:
    /// `fields[s] + sum_{t != s} interactions[(s,t)] x_t`.
    pub fn log_odds(&self, s: usize, x: &[u8]) -> f64 {
        let p = self.p();
        assert!(s < p, "node index {s} out of range");
        assert_eq!(x.len(), p, "configuration length must equal p");
        let mut z = self.fields[s];
        for t in 0..p {
            if x[t] == 1 {
                // Diagonal is zero, so including t == s is harmless.
                z += self.interactions[[s, t]];
            }
        }
        z
    }

    pub fn write_json_file(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read_json_file(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }
}

/// On-disk form: node count, fields, and the sparse upper-triangle edge list.
#[derive(Serialize, Deserialize)]
struct ModelJson {
    p: usize,
    m: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

impl Serialize for IsingModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let json = ModelJson { p: self.p(), m: self.fields.clone(), edges: self.edges() };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IsingModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = ModelJson::deserialize(deserializer)?;
        IsingModel::from_edges(json.p, json.m, &json.edges).map_err(serde::de::Error::custom)
    }
}

/// An n-by-p matrix of {0,1} observations, one configuration per row.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    x: Array2<u8>,
}

impl BinaryDataset {
    pub fn new(x: Array2<u8>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidData("dataset must have at least one row and column".into()));
        }
        if x.iter().any(|&v| v > 1) {
            return Err(Error::InvalidData("dataset entries must be 0 or 1".into()));
        }
        Ok(Self { x })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn get(&self, i: usize, s: usize) -> u8 {
        self.x[[i, s]]
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, u8> {
        self.x.row(i)
    }

    /// Row i as a contiguous slice (rows are stored contiguously).
    pub fn row_slice(&self, i: usize) -> &[u8] {
        self.x.row(i).to_slice().expect("rows are contiguous")
    }

    pub fn column(&self, s: usize) -> ArrayView1<'_, u8> {
        self.x.column(s)
    }

    /// True when every row has the same value in column s.
    pub fn column_is_constant(&self, s: usize) -> bool {
        let first = self.x[[0, s]];
        self.x.column(s).iter().all(|&v| v == first)
    }

    pub fn matrix(&self) -> &Array2<u8> {
        &self.x
    }

    /// Writes the matrix as headerless CSV, one row per line.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for i in 0..self.n() {
            let record: Vec<&str> =
                self.row(i).iter().map(|&v| if v == 1 { "1" } else { "0" }).collect();
            w.write_record(record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a headerless CSV of 0/1 entries; rows must all have the same
    /// width.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for record in r.records() {
            let record = record?;
            let mut row = Vec::with_capacity(record.len());
            for field in record.iter() {
                match field.trim() {
                    "0" => row.push(0),
                    "1" => row.push(1),
                    other => {
                        return Err(Error::InvalidData(format!(
                            "expected 0 or 1, found {other:?}"
                        )))
                    }
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::InvalidData("empty dataset".into()));
        }
        let p = rows[0].len();
        let n = rows.len();
        let flat: Vec<u8> = rows.into_iter().flatten().collect();
        let x = Array2::from_shape_vec((n, p), flat)
            .map_err(|e| Error::InvalidData(e.to_string()))?;
        Self::new(x)
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        self.to_csv(BufWriter::new(file))
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Self::from_csv(BufReader::new(file))
    }
}

/// Distribution of edge weights for random graph generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EdgeWeightDist {
    /// Uniform on [lo, hi).
    Uniform { lo: f64, hi: f64 },
    Constant(f64),
}

/// How external fields are assigned after the edges are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldDist {
    /// `fields[s] = -(sum of weights incident to s) / 2`, which keeps node
    /// marginals near one half regardless of degree.
    Centering,
    Constant(f64),
    /// Uniform on [lo, hi), drawn per node after all edges.
    Uniform { lo: f64, hi: f64 },
}

/// Edge-weight and field distributions used by [`generate_erdos_renyi`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSampler {
    pub edge_weights: EdgeWeightDist,
    pub field: FieldDist,
}

impl Default for WeightSampler {
    /// Weights uniform on [0.5, 2.0), fields centering. All-positive
    /// weights of this size give conditionals that are informative but not
    /// saturated at the sample sizes this crate targets.
    fn default() -> Self {
        Self { edge_weights: EdgeWeightDist::Uniform { lo: 0.5, hi: 2.0 }, field: FieldDist::Centering }
    }
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::InvalidParameter(format!("invalid range [{lo}, {hi})")));
    }
    Ok(())
}

/// Draws a G(p, edge_prob) graph, then edge weights and fields, all from a
/// single ChaCha8 stream seeded by `seed`.
///
/// Pairs are visited in ascending (s, t) order with the weight drawn
/// immediately after a successful presence draw, so output is a pure
/// function of (p, edge_prob, sampler, seed).
pub fn generate_erdos_renyi(
    p: usize,
    edge_prob: f64,
    sampler: &WeightSampler,
    seed: u64,
) -> Result<IsingModel> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidParameter(format!("edge_prob {edge_prob} outside [0, 1]")));
    }
    match sampler.edge_weights {
        EdgeWeightDist::Uniform { lo, hi } => check_range(lo, hi)?,
        EdgeWeightDist::Constant(c) => {
            if !c.is_finite() {
                return Err(Error::InvalidParameter("constant weight must be finite".into()));
            }
        }
    }
    if let FieldDist::Uniform { lo, hi } = sampler.field {
        check_range(lo, hi)?;
    }
    if let FieldDist::Constant(c) = sampler.field {
        if !c.is_finite() {
            return Err(Error::InvalidParameter("constant field must be finite".into()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut interactions = Array2::<f64>::zeros((p, p));
    for s in 0..p {
        for t in (s + 1)..p {
            if rand::Rng::random::<f64>(&mut rng) < edge_prob {
                let w = match sampler.edge_weights {
                    EdgeWeightDist::Uniform { lo, hi } => {
                        lo + (hi - lo) * rand::Rng::random::<f64>(&mut rng)
                    }
                    EdgeWeightDist::Constant(c) => c,
                };
                interactions[[s, t]] = w;
                interactions[[t, s]] = w;
            }
        }
    }

    let fields: Vec<f64> = match sampler.field {
        FieldDist::Centering => {
            (0..p).map(|s| -0.5 * interactions.row(s).sum()).collect()
        }
        FieldDist::Constant(c) => vec![c; p],
        FieldDist::Uniform { lo, hi } => {
            (0..p).map(|_| lo + (hi - lo) * rand::Rng::random::<f64>(&mut rng)).collect()
        }
    };

    IsingModel::new(fields, interactions)
}

/// A set of (source, target) column copies derived from a model's edges.
///
/// Applying the plan overwrites each target column with its source column,
/// making the pair exactly collinear in the data while the generating
/// model stays untouched. Targets are never reused as sources or targets
/// of other pairs and sources are never themselves targets, so copies form
/// star-shaped classes rooted at their source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyPlan {
    /// Accepted (source, target) pairs, ascending.
    pub pairs: Vec<(usize, usize)>,
    /// Requested fraction of edges to convert.
    pub alpha: f64,
    /// Number of edges in the model the plan was drawn from.
    pub edge_count: usize,
}

impl CopyPlan {
    /// Fraction of the model's edges actually converted to copies.
    pub fn realized_fraction(&self) -> f64 {
        if self.edge_count == 0 {
            0.0
        } else {
            self.pairs.len() as f64 / self.edge_count as f64
        }
    }

    /// Copy classes as (source, sorted targets), ascending by source.
    pub fn classes(&self) -> Vec<(usize, Vec<usize>)> {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(s, t) in &self.pairs {
            map.entry(s).or_default().push(t);
        }
        map.into_iter()
            .map(|(s, mut ts)| {
                ts.sort_unstable();
                (s, ts)
            })
            .collect()
    }

    /// All nodes appearing in the plan, either side, ascending.
    pub fn involved_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> =
            self.pairs.iter().flat_map(|&(s, t)| [s, t]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

/// Chooses `round(alpha * |E|)` edges of the model to convert into column
/// copies.
///
/// Edges are shuffled with a ChaCha8 stream seeded by `seed` and scanned
/// greedily; an edge (s, t) is accepted if t is still unused on either
/// side and s is not already a target. Because acceptance does not depend
/// on the quota, plans drawn with the same seed are nested across alpha:
/// a smaller quota yields a prefix of the larger plan's accepted pairs.
pub fn plan_connected_copies(model: &IsingModel, alpha: f64, seed: u64) -> Result<CopyPlan> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, 1]")));
    }
    let mut edges: Vec<(usize, usize)> = model.edges().iter().map(|&(s, t, _)| (s, t)).collect();
    let edge_count = edges.len();
    let quota = (alpha * edge_count as f64).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);

    let p = model.p();
    let mut is_source = vec![false; p];
    let mut is_target = vec![false; p];
    let mut pairs = Vec::new();
    for (s, t) in edges {
        if pairs.len() == quota {
            break;
        }
        if is_target[t] || is_source[t] || is_target[s] {
            continue;
        }
        pairs.push((s, t));
        is_source[s] = true;
        is_target[t] = true;
    }
    pairs.sort_unstable();
    Ok(CopyPlan { pairs, alpha, edge_count })
}

/// Overwrites each plan target column with its source column.
pub fn apply_connected_copies(data: &BinaryDataset, plan: &CopyPlan) -> Result<BinaryDataset> {
    let p = data.p();
    let mut x = data.matrix().clone();
    for &(s, t) in &plan.pairs {
        if s >= p || t >= p {
            return Err(Error::DimensionMismatch(format!(
                "copy pair ({s},{t}) out of range for p={p}"
            )));
        }
        for i in 0..data.n() {
            x[[i, t]] = x[[i, s]];
        }
    }
    BinaryDataset::new(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn triangle() -> IsingModel {
        IsingModel::from_edges(3, vec![0.1, -0.2, 0.3], &[(0, 1, 0.8), (1, 2, -0.5)]).unwrap()
    }

    #[test]
    fn from_edges_builds_symmetric_matrix() {
        let m = triangle();
        assert_eq!(m.interaction(0, 1), 0.8);
        assert_eq!(m.interaction(1, 0), 0.8);
        assert_eq!(m.interaction(0, 2), 0.0);
        assert_eq!(m.neighbors(1), vec![0, 2]);
        assert_eq!(m.edges(), vec![(0, 1, 0.8), (1, 2, -0.5)]);
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(IsingModel::from_edges(3, vec![0.0; 3], &[(0, 0, 1.0)]).is_err());
        assert!(IsingModel::from_edges(3, vec![0.0; 3], &[(0, 3, 1.0)]).is_err());
        assert!(IsingModel::from_edges(3, vec![0.0; 3], &[(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(IsingModel::from_edges(2, vec![0.0; 3], &[]).is_err());
        assert!(IsingModel::from_edges(2, vec![0.0; 2], &[(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn new_rejects_asymmetry_and_nonzero_diagonal() {
        let a = array![[0.0, 1.0], [0.5, 0.0]];
        assert!(IsingModel::new(vec![0.0; 2], a).is_err());
        let b = array![[0.1, 0.0], [0.0, 0.0]];
        assert!(IsingModel::new(vec![0.0; 2], b).is_err());
    }

    #[test]
    fn log_odds_sums_active_interactions() {
        let m = triangle();
        // Node 1 with x = (1, _, 1): field + both edge weights.
        let z = m.log_odds(1, &[1, 0, 1]);
        assert!((z - (-0.2 + 0.8 - 0.5)).abs() < 1e-15);
        // Own coordinate is ignored.
        assert_eq!(m.log_odds(1, &[1, 0, 1]), m.log_odds(1, &[1, 1, 1]));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = triangle();
        let text = serde_json::to_string(&m).unwrap();
        let back: IsingModel = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
        assert!(text.contains("\"p\""));
        assert!(text.contains("\"m\""));
        assert!(text.contains("\"edges\""));
    }

    #[test]
    fn json_rejects_inconsistent_payload() {
        let bad = r#"{"p": 2, "m": [0.0, 0.0], "edges": [[0, 5, 1.0]]}"#;
        assert!(serde_json::from_str::<IsingModel>(bad).is_err());
    }

    #[test]
    fn dataset_round_trips_through_csv() {
        let d = BinaryDataset::new(array![[0, 1, 1], [1, 0, 0]]).unwrap();
        let mut buf = Vec::new();
        d.to_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0,1,1\n1,0,0\n");
        let back = BinaryDataset::from_csv(buf.as_slice()).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn dataset_rejects_bad_csv() {
        assert!(BinaryDataset::from_csv("0,1\n1".as_bytes()).is_err());
        assert!(BinaryDataset::from_csv("0,2\n1,0".as_bytes()).is_err());
        assert!(BinaryDataset::from_csv("".as_bytes()).is_err());
    }

    #[test]
    fn constant_column_detection() {
        let d = BinaryDataset::new(array![[0, 1], [0, 0]]).unwrap();
        assert!(d.column_is_constant(0));
        assert!(!d.column_is_constant(1));
    }

    #[test]
    fn erdos_renyi_extremes_and_determinism() {
        let sampler = WeightSampler::default();
        let full = generate_erdos_renyi(4, 1.0, &sampler, 7).unwrap();
        assert_eq!(full.edges().len(), 6);
        let empty = generate_erdos_renyi(4, 0.0, &sampler, 7).unwrap();
        assert_eq!(empty.edges().len(), 0);
        let a = generate_erdos_renyi(20, 0.2, &sampler, 42).unwrap();
        let b = generate_erdos_renyi(20, 0.2, &sampler, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_erdos_renyi(20, 0.2, &sampler, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn erdos_renyi_weights_and_centering_fields() {
        let m = generate_erdos_renyi(15, 0.4, &WeightSampler::default(), 3).unwrap();
        for (_, _, w) in m.edges() {
            assert!((0.5..2.0).contains(&w));
        }
        for s in 0..15 {
            let incident: f64 = m.interactions().row(s).sum();
            assert!((m.field(s) + 0.5 * incident).abs() < 1e-15);
        }
    }

    #[test]
    fn erdos_renyi_constant_edge_and_field_dists() {
        let sampler = WeightSampler {
            edge_weights: EdgeWeightDist::Constant(1.5),
            field: FieldDist::Constant(-0.25),
        };
        let m = generate_erdos_renyi(6, 1.0, &sampler, 0).unwrap();
        assert!(m.edges().iter().all(|&(_, _, w)| w == 1.5));
        assert!(m.fields().iter().all(|&f| f == -0.25));
    }

    #[test]
    fn copy_plan_respects_quota_and_constraints() {
        // Path graph 0-1-2: at most one copy can ever be accepted because
        // the shared node 1 blocks the second edge either way round.
        let path = IsingModel::from_edges(3, vec![0.0; 3], &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        for seed in 0..10 {
            let plan = plan_connected_copies(&path, 1.0, seed).unwrap();
            assert_eq!(plan.pairs.len(), 1);
            assert_eq!(plan.edge_count, 2);
        }
        // Two disjoint edges: quota 2 is achievable.
        let disjoint =
            IsingModel::from_edges(4, vec![0.0; 4], &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let plan = plan_connected_copies(&disjoint, 1.0, 5).unwrap();
        assert_eq!(plan.pairs.len(), 2);
        // Rounding: alpha = 0.5 of 2 edges rounds to 1.
        let half = plan_connected_copies(&disjoint, 0.5, 5).unwrap();
        assert_eq!(half.pairs.len(), 1);
        assert!((half.realized_fraction() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn copy_plan_invariants_on_dense_graph() {
        let m = generate_erdos_renyi(30, 0.2, &WeightSampler::default(), 11).unwrap();
        let plan = plan_connected_copies(&m, 0.6, 99).unwrap();
        let mut sources = std::collections::BTreeSet::new();
        let mut targets = std::collections::BTreeSet::new();
        for &(s, t) in &plan.pairs {
            assert!(m.interaction(s, t) != 0.0, "pairs must be edges");
            assert!(targets.insert(t), "target reused");
            sources.insert(s);
        }
        assert!(sources.is_disjoint(&targets), "no chains of copies");
    }

    #[test]
    fn copy_plans_are_nested_across_alpha() {
        let m = generate_erdos_renyi(30, 0.2, &WeightSampler::default(), 11).unwrap();
        let small = plan_connected_copies(&m, 0.2, 7).unwrap();
        let large = plan_connected_copies(&m, 0.7, 7).unwrap();
        let large_set: std::collections::BTreeSet<_> = large.pairs.iter().collect();
        assert!(small.pairs.len() < large.pairs.len());
        assert!(small.pairs.iter().all(|pair| large_set.contains(pair)));
    }

    #[test]
    fn classes_group_targets_by_source() {
        let plan = CopyPlan { pairs: vec![(0, 2), (0, 4), (1, 3)], alpha: 0.5, edge_count: 6 };
        assert_eq!(plan.classes(), vec![(0, vec![2, 4]), (1, vec![3])]);
        assert_eq!(plan.involved_nodes(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn apply_copies_overwrites_target_columns() {
        let d = BinaryDataset::new(array![[0, 1, 1], [1, 0, 1], [0, 0, 0]]).unwrap();
        let plan = CopyPlan { pairs: vec![(0, 2)], alpha: 1.0, edge_count: 1 };
        let copied = apply_connected_copies(&d, &plan).unwrap();
        assert_eq!(copied.column(2).to_vec(), copied.column(0).to_vec());
        assert_eq!(copied.column(1).to_vec(), d.column(1).to_vec());
        let again = apply_connected_copies(&copied, &plan).unwrap();
        assert_eq!(copied, again);
    }
}
