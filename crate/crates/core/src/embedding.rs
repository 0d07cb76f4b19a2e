//! Translational embeddings: every entity and relation gets a vector in
//! R^dim, trained so that `subject + relation ≈ object` for true facts. The
//! score of a triple is the Euclidean residual `‖u_s + u_r − u_o‖₂`; smaller
//! is more plausible.

use std::collections::HashMap;
use std::fmt::Write as _;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fact::{Fact, TripleKey};
use crate::ident::{EntityId, RelationId};
use crate::kg::KnowledgeGraph;

/// Loss minimized per (positive, negative) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossVariant {
    /// `max(0, margin + d(pos) − d(neg))`.
    #[default]
    Hinge,
    /// `d(pos) − d(neg)` with no clamping. Unbounded below; kept selectable
    /// for experiments.
    Raw,
}

impl LossVariant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hinge" => Ok(LossVariant::Hinge),
            "raw" => Ok(LossVariant::Raw),
            other => Err(Error::invalid(format!(
                "unknown loss variant `{other}` (expected `hinge` or `raw`)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossVariant::Hinge => "hinge",
            LossVariant::Raw => "raw",
        }
    }
}

/// Training hyperparameters. All randomness (shuffles and corruptions)
/// flows from one generator seeded with `seed`, so sequential runs are fully
/// reproducible; corruptions are redrawn every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub margin: f64,
    pub batch_size: usize,
    pub negatives_per_positive: usize,
    pub seed: u64,
    pub loss: LossVariant,
    /// Train on closure-derived facts as well as asserted ones.
    pub include_derived: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            learning_rate: 0.01,
            margin: 1.0,
            batch_size: 32,
            negatives_per_positive: 4,
            seed: 7,
            loss: LossVariant::Hinge,
            include_derived: false,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        if self.negatives_per_positive == 0 {
            return Err(Error::invalid("negatives per positive must be positive"));
        }
        if self.learning_rate.is_nan() || self.learning_rate < 0.0 {
            return Err(Error::invalid("learning rate must be nonnegative"));
        }
        if self.margin.is_nan() || self.margin < 0.0 {
            return Err(Error::invalid("margin must be nonnegative"));
        }
        Ok(())
    }
}

/// One vector per entity and per relation, in graph insertion order.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    dim: usize,
    entity_vecs: IndexMap<EntityId, Vec<f64>>,
    relation_vecs: IndexMap<RelationId, Vec<f64>>,
    pub config: TrainConfig,
}

impl EmbeddingModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entity_count(&self) -> usize {
        self.entity_vecs.len()
    }

    pub fn entities(&self) -> impl ExactSizeIterator<Item = (&EntityId, &Vec<f64>)> {
        self.entity_vecs.iter()
    }

    pub fn relations(&self) -> impl ExactSizeIterator<Item = (&RelationId, &Vec<f64>)> {
        self.relation_vecs.iter()
    }

    pub fn entity_vec(&self, e: &EntityId) -> Result<&[f64]> {
        self.entity_vecs
            .get(e)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownEntity(e.to_string()))
    }

    pub fn relation_vec(&self, r: &RelationId) -> Result<&[f64]> {
        self.relation_vecs
            .get(r)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownRelation(r.to_string()))
    }

    /// Build a model from explicit vectors (for hand-constructed setups).
    pub fn from_vectors(
        dim: usize,
        entities: Vec<(EntityId, Vec<f64>)>,
        relations: Vec<(RelationId, Vec<f64>)>,
    ) -> Result<Self> {
        for (label, v) in entities
            .iter()
            .map(|(e, v)| (e.as_str(), v))
            .chain(relations.iter().map(|(r, v)| (r.as_str(), v)))
        {
            if v.len() != dim {
                return Err(Error::invalid(format!(
                    "vector for `{label}` has length {}, expected {dim}",
                    v.len()
                )));
            }
        }
        Ok(EmbeddingModel {
            dim,
            entity_vecs: entities.into_iter().collect(),
            relation_vecs: relations.into_iter().collect(),
            config: TrainConfig::default(),
        })
    }

    pub fn set_entity_vec(&mut self, e: &EntityId, v: Vec<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::invalid("wrong vector length"));
        }
        match self.entity_vecs.get_mut(e) {
            Some(slot) => {
                *slot = v;
                Ok(())
            }
            None => Err(Error::UnknownEntity(e.to_string())),
        }
    }

    pub fn set_relation_vec(&mut self, r: &RelationId, v: Vec<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::invalid("wrong vector length"));
        }
        match self.relation_vecs.get_mut(r) {
            Some(slot) => {
                *slot = v;
                Ok(())
            }
            None => Err(Error::UnknownRelation(r.to_string())),
        }
    }

    /// `‖u_s + u_r − u_o‖₂`; zero exactly when the triple is an exact
    /// translation.
    pub fn score_triple(&self, s: &EntityId, r: &RelationId, o: &EntityId) -> Result<f64> {
        let h = self.entity_vec(s)?;
        let rel = self.relation_vec(r)?;
        let t = self.entity_vec(o)?;
        let mut sum = 0.0;
        for i in 0..self.dim {
            let d = h[i] + rel[i] - t[i];
            sum += d * d;
        }
        Ok(sum.sqrt())
    }

    pub fn score_key(&self, key: &TripleKey) -> Result<f64> {
        self.score_triple(&key.subject, &key.predicate, &key.object)
    }

    /// Raw CSV: `label,kind,c1..cdim`. Values use Rust's shortest
    /// round-trip float formatting, so `from_csv` recovers them exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,kind");
        for i in 1..=self.dim {
            write!(out, ",c{i}").unwrap();
        }
        out.push('\n');
        for (label, vec) in &self.entity_vecs {
            write!(out, "{label},entity").unwrap();
            for value in vec {
                write!(out, ",{value}").unwrap();
            }
            out.push('\n');
        }
        for (label, vec) in &self.relation_vecs {
            write!(out, "{label},relation").unwrap();
            for value in vec {
                write!(out, ",{value}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parse the raw CSV written by `to_csv`. Leading `#` comment lines are
    /// skipped; the training config is not persisted and resets to defaults.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::invalid("empty embedding CSV"))?;
        let columns = header.split(',').count();
        if columns < 3 || !header.starts_with("label,kind,") {
            return Err(Error::invalid("bad embedding CSV header"));
        }
        let dim = columns - 2;

        let mut entities = Vec::new();
        let mut relations = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns {
                return Err(Error::parse(line_no, "wrong number of fields"));
            }
            let vec: Vec<f64> = fields[2..]
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            match fields[1] {
                "entity" => entities.push((
                    EntityId::new(fields[0]).map_err(|e| Error::parse(line_no, e.to_string()))?,
                    vec,
                )),
                "relation" => relations.push((
                    RelationId::new(fields[0]).map_err(|e| Error::parse(line_no, e.to_string()))?,
                    vec,
                )),
                other => return Err(Error::parse(line_no, format!("unknown kind `{other}`"))),
            }
        }
        EmbeddingModel::from_vectors(dim, entities, relations)
    }
}

/// Projection CSV: `label,kind,x,y`.
pub fn projection_csv(rows: &[(String, &str)], points: &[[f64; 2]]) -> String {
    let mut out = String::from("label,kind,x,y\n");
    for ((label, kind), point) in rows.iter().zip(points) {
        writeln!(out, "{label},{kind},{},{}", point[0], point[1]).unwrap();
    }
    out
}

/// Initialize a model over the graph's entities and relations: coordinates
/// uniform on `[−6/√dim, +6/√dim]`, entity vectors normalized to unit norm.
pub fn init_model(kg: &KnowledgeGraph, dim: usize, seed: u64) -> Result<EmbeddingModel> {
    if dim == 0 {
        return Err(Error::invalid("embedding dimension must be positive"));
    }
    if kg.entities().len() == 0 {
        return Err(Error::invalid("cannot embed an empty graph"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 6.0 / (dim as f64).sqrt();
    let mut sample = |normalize: bool| -> Vec<f64> {
        let mut v: Vec<f64> = (0..dim)
            .map(|_| rng.gen::<f64>() * 2.0 * bound - bound)
            .collect();
        if normalize {
            normalize_in_place(&mut v);
        }
        v
    };
    let entity_vecs = kg.entities().map(|e| (e.clone(), sample(true))).collect();
    let relation_vecs = kg.relations().map(|r| (r.clone(), sample(false))).collect();
    Ok(EmbeddingModel {
        dim,
        entity_vecs,
        relation_vecs,
        config: TrainConfig::default(),
    })
}

fn normalize_in_place(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    // Skip when already unit so a no-op epoch really is a no-op.
    if norm > 0.0 && (norm - 1.0).abs() > 1e-12 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Corrupt head or tail (fair coin) with a uniformly random different
/// entity, retrying while the corrupted triple is already a fact. After 100
/// rejected draws the membership check is relaxed. Panics if the graph has
/// fewer than two entities.
pub fn negative_sample(fact: &Fact, kg: &KnowledgeGraph, rng: &mut impl Rng) -> Fact {
    let n = kg.entities().len();
    assert!(n >= 2, "negative sampling needs at least two entities");
    let corrupt_head = rng.gen_bool(0.5);
    let original = if corrupt_head {
        &fact.subject
    } else {
        &fact.object
    };
    let corrupted_key = |candidate: &EntityId| {
        if corrupt_head {
            TripleKey {
                subject: candidate.clone(),
                predicate: fact.predicate.clone(),
                object: fact.object.clone(),
            }
        } else {
            TripleKey {
                subject: fact.subject.clone(),
                predicate: fact.predicate.clone(),
                object: candidate.clone(),
            }
        }
    };

    let mut last_rejected = None;
    for _ in 0..100 {
        let candidate = kg.entity_at(rng.gen_range(0..n)).unwrap();
        if candidate == original {
            continue;
        }
        let corrupted = corrupted_key(candidate);
        if !kg.contains_triple(&corrupted) {
            return Fact::new(corrupted.subject, corrupted.predicate, corrupted.object);
        }
        last_rejected = Some(corrupted);
    }
    // Relax the membership check; keep the "different entity" requirement.
    let key = last_rejected.unwrap_or_else(|| {
        let candidate = kg
            .entities()
            .find(|e| *e != original)
            .expect("at least two entities");
        corrupted_key(candidate)
    });
    Fact::new(key.subject, key.predicate, key.object)
}

/// Loss of one (positive, negative) pair under the configured variant.
pub fn pair_loss(
    model: &EmbeddingModel,
    positive: &TripleKey,
    negative: &TripleKey,
    margin: f64,
    variant: LossVariant,
) -> Result<f64> {
    let d_pos = model.score_key(positive)?;
    let d_neg = model.score_key(negative)?;
    Ok(match variant {
        LossVariant::Hinge => (margin + d_pos - d_neg).max(0.0),
        LossVariant::Raw => d_pos - d_neg,
    })
}

/// Accumulates gradients per embedded vector.
#[derive(Debug, Default)]
pub struct GradientSet {
    pub entities: HashMap<EntityId, Vec<f64>>,
    pub relations: HashMap<RelationId, Vec<f64>>,
}

impl GradientSet {
    fn accumulate_entity(&mut self, e: &EntityId, direction: &[f64], scale: f64) {
        let slot = self
            .entities
            .entry(e.clone())
            .or_insert_with(|| vec![0.0; direction.len()]);
        for (g, d) in slot.iter_mut().zip(direction) {
            *g += scale * d;
        }
    }

    fn accumulate_relation(&mut self, r: &RelationId, direction: &[f64], scale: f64) {
        let slot = self
            .relations
            .entry(r.clone())
            .or_insert_with(|| vec![0.0; direction.len()]);
        for (g, d) in slot.iter_mut().zip(direction) {
            *g += scale * d;
        }
    }
}

/// Analytic gradient of `pair_loss` with respect to every involved vector,
/// accumulated into `grads`. Returns the pair loss.
pub fn pair_loss_gradients(
    model: &EmbeddingModel,
    positive: &TripleKey,
    negative: &TripleKey,
    margin: f64,
    variant: LossVariant,
    grads: &mut GradientSet,
) -> Result<f64> {
    let (d_pos, unit_pos) = residual_direction(model, positive)?;
    let (d_neg, unit_neg) = residual_direction(model, negative)?;
    let loss = match variant {
        LossVariant::Hinge => margin + d_pos - d_neg,
        LossVariant::Raw => d_pos - d_neg,
    };
    if variant == LossVariant::Hinge && loss <= 0.0 {
        return Ok(0.0);
    }
    // d‖h + r − t‖/dh = (h + r − t)/‖·‖ (and its negation for t).
    grads.accumulate_entity(&positive.subject, &unit_pos, 1.0);
    grads.accumulate_relation(&positive.predicate, &unit_pos, 1.0);
    grads.accumulate_entity(&positive.object, &unit_pos, -1.0);
    grads.accumulate_entity(&negative.subject, &unit_neg, -1.0);
    grads.accumulate_relation(&negative.predicate, &unit_neg, -1.0);
    grads.accumulate_entity(&negative.object, &unit_neg, 1.0);
    Ok(loss)
}

fn residual_direction(model: &EmbeddingModel, key: &TripleKey) -> Result<(f64, Vec<f64>)> {
    let h = model.entity_vec(&key.subject)?;
    let r = model.relation_vec(&key.predicate)?;
    let t = model.entity_vec(&key.object)?;
    let mut diff: Vec<f64> = (0..model.dim).map(|i| h[i] + r[i] - t[i]).collect();
    let norm = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in diff.iter_mut() {
            *x /= norm;
        }
    } else {
        diff.iter_mut().for_each(|x| *x = 0.0);
    }
    Ok((norm, diff))
}

/// Mini-batch SGD over (positive, corrupted) pairs. Entity vectors are
/// renormalized to unit norm after each epoch. Returns the mean pair loss
/// per epoch.
pub fn train(
    model: &mut EmbeddingModel,
    kg: &KnowledgeGraph,
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    let positives: Vec<Fact> = kg
        .facts()
        .iter()
        .filter(|sf| config.include_derived || !sf.derived)
        .map(|sf| sf.fact.clone())
        .collect();
    if positives.is_empty() {
        return Err(Error::invalid("no facts to train on"));
    }
    if kg.entities().len() < 2 {
        return Err(Error::invalid("training needs at least two entities"));
    }
    model.config = config.clone();

    let pair_count = (positives.len() * config.negatives_per_positive) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let mut order: Vec<usize> = (0..positives.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = GradientSet::default();
            for &idx in batch {
                let positive = &positives[idx];
                for _ in 0..config.negatives_per_positive {
                    let negative = negative_sample(positive, kg, &mut rng);
                    epoch_loss += pair_loss_gradients(
                        model,
                        &positive.key(),
                        &negative.key(),
                        config.margin,
                        config.loss,
                        &mut grads,
                    )?;
                }
            }
            apply_gradients(model, &grads, config.learning_rate);
        }
        for vec in model.entity_vecs.values_mut() {
            normalize_in_place(vec);
        }
        history.push(epoch_loss / pair_count);
    }
    Ok(history)
}

fn apply_gradients(model: &mut EmbeddingModel, grads: &GradientSet, learning_rate: f64) {
    if learning_rate == 0.0 {
        return;
    }
    for (entity, grad) in &grads.entities {
        if let Some(vec) = model.entity_vecs.get_mut(entity) {
            for (x, g) in vec.iter_mut().zip(grad) {
                *x -= learning_rate * g;
            }
        }
    }
    for (relation, grad) in &grads.relations {
        if let Some(vec) = model.relation_vecs.get_mut(relation) {
            for (x, g) in vec.iter_mut().zip(grad) {
                *x -= learning_rate * g;
            }
        }
    }
}

/// Mean score of the graph's facts under the model (asserted only unless
/// `include_derived`).
pub fn mean_positive_score(
    model: &EmbeddingModel,
    kg: &KnowledgeGraph,
    include_derived: bool,
) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for sf in kg.facts() {
        if sf.derived && !include_derived {
            continue;
        }
        total += model.score_key(&sf.fact.key())?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::invalid("no facts to score"));
    }
    Ok(total / count as f64)
}
