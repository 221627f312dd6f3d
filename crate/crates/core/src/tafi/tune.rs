use std::borrow::Borrow;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample::{augment, sample_triplets, Triplet};
use super::TafiError;
use crate::interp::{interpolate, Blend, InterpParams, Mode, Obmc, BLOCK_SIZES};
use crate::media::Clip;
use crate::metrics::mean_abs_error;
use crate::texgen::mix_seed;

/// Candidate values per [`InterpParams`] field, searched in declaration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub block_size: Vec<usize>,
    pub search_range: Vec<usize>,
    pub smoothness_lambda: Vec<f64>,
    pub obmc: Vec<Obmc>,
    pub blend: Vec<Blend>,
    pub mode: Vec<Mode>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            block_size: BLOCK_SIZES.to_vec(),
            search_range: vec![2, 4, 8, 12, 16],
            smoothness_lambda: vec![0.0, 4.0, 16.0, 64.0, 256.0],
            obmc: vec![Obmc::Off, Obmc::RaisedCosine],
            blend: vec![Blend::Average, Blend::SadWeighted],
            mode: vec![Mode::Mci, Mode::FrameAverage],
        }
    }
}

impl SearchSpace {
    /// The space containing exactly `params`.
    pub fn singleton(params: &InterpParams) -> Self {
        Self {
            block_size: vec![params.block_size],
            search_range: vec![params.search_range],
            smoothness_lambda: vec![params.smoothness_lambda],
            obmc: vec![params.obmc],
            blend: vec![params.blend],
            mode: vec![params.mode],
        }
    }

    pub fn contains(&self, params: &InterpParams) -> bool {
        self.block_size.contains(&params.block_size)
            && self.search_range.contains(&params.search_range)
            && self.smoothness_lambda.contains(&params.smoothness_lambda)
            && self.obmc.contains(&params.obmc)
            && self.blend.contains(&params.blend)
            && self.mode.contains(&params.mode)
    }

    fn validate(&self) -> Result<(), TafiError> {
        let lens = [
            ("block_size", self.block_size.len()),
            ("search_range", self.search_range.len()),
            ("smoothness_lambda", self.smoothness_lambda.len()),
            ("obmc", self.obmc.len()),
            ("blend", self.blend.len()),
            ("mode", self.mode.len()),
        ];
        if let Some((name, _)) = lens.iter().find(|(_, n)| *n == 0) {
            return Err(TafiError::InvalidSpec(format!(
                "empty candidate list for {name}"
            )));
        }
        let mut probe = InterpParams::default();
        for &b in &self.block_size {
            probe.block_size = b;
            probe
                .validate()
                .map_err(|e| TafiError::InvalidSpec(e.to_string()))?;
        }
        probe = InterpParams::default();
        for &s in &self.search_range {
            probe.search_range = s;
            probe
                .validate()
                .map_err(|e| TafiError::InvalidSpec(e.to_string()))?;
        }
        probe = InterpParams::default();
        for &l in &self.smoothness_lambda {
            probe.smoothness_lambda = l;
            probe
                .validate()
                .map_err(|e| TafiError::InvalidSpec(e.to_string()))?;
        }
        Ok(())
    }

    /// Starting point: `params` with every field snapped into the space
    /// (nearest value for numeric fields, first candidate otherwise).
    fn project(&self, params: &InterpParams) -> InterpParams {
        fn nearest<T: Copy>(list: &[T], value: T, dist: impl Fn(T, T) -> f64) -> T {
            let mut best = list[0];
            for &c in &list[1..] {
                if dist(c, value) < dist(best, value) {
                    best = c;
                }
            }
            best
        }
        fn member<T: Copy + PartialEq>(list: &[T], value: T) -> T {
            if list.contains(&value) {
                value
            } else {
                list[0]
            }
        }
        InterpParams {
            block_size: nearest(&self.block_size, params.block_size, |a, b| {
                a.abs_diff(b) as f64
            }),
            search_range: nearest(&self.search_range, params.search_range, |a, b| {
                a.abs_diff(b) as f64
            }),
            smoothness_lambda: nearest(
                &self.smoothness_lambda,
                params.smoothness_lambda,
                |a, b| (a - b).abs(),
            ),
            obmc: member(&self.obmc, params.obmc),
            blend: member(&self.blend, params.blend),
            mode: member(&self.mode, params.mode),
        }
    }

    /// Keeps only the winner and its immediate neighbors in each list.
    fn shrink_around(&mut self, winner: &InterpParams) {
        fn around<T: Copy + PartialEq>(list: &mut Vec<T>, value: T) {
            if let Some(i) = list.iter().position(|&v| v == value) {
                let lo = i.saturating_sub(1);
                let hi = (i + 2).min(list.len());
                *list = list[lo..hi].to_vec();
            }
        }
        around(&mut self.block_size, winner.block_size);
        around(&mut self.search_range, winner.search_range);
        around(&mut self.smoothness_lambda, winner.smoothness_lambda);
        around(&mut self.obmc, winner.obmc);
        around(&mut self.blend, winner.blend);
        around(&mut self.mode, winner.mode);
    }

    /// Candidates for field `field` with all other fields taken from `at`.
    fn candidates(&self, field: usize, at: &InterpParams) -> Vec<InterpParams> {
        let with = |f: &dyn Fn(&mut InterpParams)| {
            let mut p = at.clone();
            f(&mut p);
            p
        };
        match field {
            0 => self
                .block_size
                .iter()
                .map(|&v| with(&|p| p.block_size = v))
                .collect(),
            1 => self
                .search_range
                .iter()
                .map(|&v| with(&|p| p.search_range = v))
                .collect(),
            2 => self
                .smoothness_lambda
                .iter()
                .map(|&v| with(&|p| p.smoothness_lambda = v))
                .collect(),
            3 => self.obmc.iter().map(|&v| with(&|p| p.obmc = v)).collect(),
            4 => self.blend.iter().map(|&v| with(&|p| p.blend = v)).collect(),
            5 => self.mode.iter().map(|&v| with(&|p| p.mode = v)).collect(),
            _ => unreachable!(),
        }
    }
}

const FIELDS: usize = 6;

/// Schedule and search space of [`tune_profile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuningSpec {
    pub search_space: SearchSpace,
    pub triplets_per_round: usize,
    /// Square patch side in pixels; must be even.
    pub patch: usize,
    pub rounds: usize,
    /// Candidate lists shrink to the incumbent's neighbors after every `decay_rounds` rounds.
    pub decay_rounds: usize,
    pub seed: u64,
}

impl Default for TuningSpec {
    fn default() -> Self {
        Self {
            search_space: SearchSpace::default(),
            triplets_per_round: 200,
            patch: 96,
            rounds: 10,
            decay_rounds: 4,
            seed: 0,
        }
    }
}

impl TuningSpec {
    pub fn validate(&self) -> Result<(), TafiError> {
        self.search_space.validate()?;
        if self.rounds == 0 {
            return Err(TafiError::InvalidSpec("rounds must be >= 1".into()));
        }
        if self.triplets_per_round == 0 {
            return Err(TafiError::InvalidSpec(
                "triplets_per_round must be >= 1".into(),
            ));
        }
        if self.decay_rounds == 0 {
            return Err(TafiError::InvalidSpec("decay_rounds must be >= 1".into()));
        }
        if self.patch == 0 || !self.patch.is_multiple_of(2) {
            return Err(TafiError::InvalidSpec(format!(
                "patch {} must be even and nonzero",
                self.patch
            )));
        }
        Ok(())
    }
}

/// Result of [`tune_profile`].
#[derive(Clone, Debug, PartialEq)]
pub struct TuneOutcome {
    pub params: InterpParams,
    /// Mean absolute luma error of `params` on the final round's batch.
    pub final_loss: f64,
    /// Loss of the default configuration on the same batch.
    pub baseline_loss: f64,
    /// Total triplets drawn over all rounds.
    pub triplets: usize,
}

/// Mean absolute luma error of `params` over `batch`, summed in batch order.
pub fn batch_loss(batch: &[Triplet], params: &InterpParams) -> Result<f64, TafiError> {
    let mut sum = 0.0;
    for tr in batch {
        let out = interpolate(&tr.prev, &tr.next, params)?;
        sum += mean_abs_error(&tr.mid, &out)?;
    }
    Ok(sum / batch.len() as f64)
}

fn round_batch<C: Borrow<Clip>>(
    clips: &[C],
    spec: &TuningSpec,
    round: usize,
) -> Result<Vec<Triplet>, TafiError> {
    let round_seed = mix_seed(spec.seed ^ mix_seed(round as u64));
    let raw = sample_triplets(clips, spec.triplets_per_round, spec.patch, round_seed)?;
    Ok(raw
        .iter()
        .enumerate()
        .map(|(i, tr)| augment(tr, mix_seed(round_seed ^ (i as u64 + 1))))
        .collect())
}

/// Loss lookups for one batch; configurations producing identical output share an entry.
struct LossCache<'a> {
    batch: &'a [Triplet],
    losses: HashMap<String, f64>,
}

impl<'a> LossCache<'a> {
    fn new(batch: &'a [Triplet]) -> Self {
        Self {
            batch,
            losses: HashMap::new(),
        }
    }

    fn get_all(&mut self, candidates: &[InterpParams]) -> Result<Vec<f64>, TafiError> {
        let mut missing: Vec<(String, &InterpParams)> = Vec::new();
        for c in candidates {
            let key = c.summary();
            if !self.losses.contains_key(&key) && !missing.iter().any(|(k, _)| *k == key) {
                missing.push((key, c));
            }
        }
        let batch = self.batch;
        let fresh: Vec<(String, Result<f64, TafiError>)> = missing
            .into_par_iter()
            .map(|(key, c)| (key, batch_loss(batch, c)))
            .collect();
        for (key, loss) in fresh {
            self.losses.insert(key, loss?);
        }
        Ok(candidates
            .iter()
            .map(|c| self.losses[&c.summary()])
            .collect())
    }
}

/// Coordinate-descent search for the configuration minimizing the mean
/// absolute luma error on triplets drawn from `clips`.
///
/// Each round draws a fresh augmented batch and sweeps the fields once in
/// declaration order; ties keep the incumbent. If the default configuration
/// is a member of the search space and beats the result on the final batch,
/// the default is returned instead.
pub fn tune_profile<C: Borrow<Clip>>(
    clips: &[C],
    spec: &TuningSpec,
) -> Result<TuneOutcome, TafiError> {
    if clips.is_empty() {
        return Err(TafiError::EmptyClipList);
    }
    spec.validate()?;

    let baseline = InterpParams::default();
    let mut space = spec.search_space.clone();
    let mut best = space.project(&baseline);
    let mut last_batch = Vec::new();

    for round in 0..spec.rounds {
        let batch = round_batch(clips, spec, round)?;
        let mut cache = LossCache::new(&batch);
        for field in 0..FIELDS {
            let candidates = space.candidates(field, &best);
            let losses = cache.get_all(&candidates)?;
            let incumbent = cache.get_all(std::slice::from_ref(&best))?[0];
            let mut winner = (incumbent, best.clone());
            for (c, loss) in candidates.into_iter().zip(losses) {
                if loss < winner.0 {
                    winner = (loss, c);
                }
            }
            best = winner.1;
        }
        log::debug!("round {round}: {}", best.summary());
        if (round + 1) % spec.decay_rounds == 0 && round + 1 < spec.rounds {
            space.shrink_around(&best);
        }
        drop(cache);
        last_batch = batch;
    }

    let mut cache = LossCache::new(&last_batch);
    let final_loss = cache.get_all(std::slice::from_ref(&best))?[0];
    let baseline_loss = cache.get_all(std::slice::from_ref(&baseline))?[0];
    let (params, final_loss) =
        if spec.search_space.contains(&baseline) && baseline_loss < final_loss {
            (baseline, baseline_loss)
        } else {
            (best, final_loss)
        };
    Ok(TuneOutcome {
        params,
        final_loss,
        baseline_loss,
        triplets: spec.rounds * spec.triplets_per_round,
    })
}

/// How class clip lists are combined into the training set of the mixed profile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingPolicy {
    /// Every clip once; classes contribute in proportion to their clip counts.
    #[default]
    Proportional,
    /// Smaller classes are cycled so every class contributes equally.
    Balanced,
}

/// Interleaves the class lists round-robin according to `policy`.
pub fn mixed_training_set<'a>(classes: &[&'a [Clip]], policy: MixingPolicy) -> Vec<&'a Clip> {
    let longest = classes.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut out = Vec::new();
    for i in 0..longest {
        for class in classes {
            if class.is_empty() {
                continue;
            }
            match policy {
                MixingPolicy::Proportional if i < class.len() => out.push(&class[i]),
                MixingPolicy::Proportional => {}
                MixingPolicy::Balanced => out.push(&class[i % class.len()]),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{Frame, FrameRate, Plane};

    fn noise_plane(w: usize, h: usize, seed: u64) -> Plane {
        Plane::from_fn(w, h, |x, y| {
            (mix_seed(seed ^ ((y * 4096 + x) as u64)) >> 56) as u8
        })
    }

    /// A random texture translating by (2, 1) pixels per frame.
    fn translating_clip(name: &str, seed: u64) -> Clip {
        let base = noise_plane(96, 96, seed);
        let frames = (0..5)
            .map(|t| {
                let luma = Plane::from_fn(48, 48, |x, y| base.get(x + 2 * t + 8, y + t + 8));
                Frame::from_luma(luma).unwrap()
            })
            .collect();
        Clip::new(name, frames, FrameRate::new(25, 1).unwrap()).unwrap()
    }

    fn small_spec(space: SearchSpace) -> TuningSpec {
        TuningSpec {
            search_space: space,
            triplets_per_round: 6,
            patch: 32,
            rounds: 2,
            decay_rounds: 1,
            seed: 17,
        }
    }

    #[test]
    fn singleton_space_returns_its_member() {
        let clips = [translating_clip("a", 1)];
        let member = InterpParams {
            block_size: 8,
            search_range: 4,
            smoothness_lambda: 0.0,
            obmc: Obmc::RaisedCosine,
            blend: Blend::SadWeighted,
            mode: Mode::Mci,
        };
        let out = tune_profile(&clips, &small_spec(SearchSpace::singleton(&member))).unwrap();
        assert_eq!(out.params, member);
        assert!(out.final_loss.is_finite() && out.final_loss >= 0.0);
        assert_eq!(out.triplets, 12);
    }

    #[test]
    fn prefers_motion_compensation_on_translation() {
        let clips = [translating_clip("a", 1), translating_clip("b", 2)];
        let space = SearchSpace {
            mode: vec![Mode::FrameAverage, Mode::Mci],
            ..SearchSpace::singleton(&InterpParams::default())
        };
        let spec = small_spec(space);
        let out = tune_profile(&clips, &spec).unwrap();
        assert_eq!(out.params.mode, Mode::Mci);

        let batch = round_batch(&clips, &spec, spec.rounds - 1).unwrap();
        let mci = batch_loss(&batch, &InterpParams::default()).unwrap();
        let avg = batch_loss(
            &batch,
            &InterpParams {
                mode: Mode::FrameAverage,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(mci < avg, "{mci} vs {avg}");
        assert_eq!(out.final_loss, mci);
    }

    #[test]
    fn deterministic() {
        let clips = [translating_clip("a", 1), translating_clip("b", 2)];
        let spec = TuningSpec {
            search_space: SearchSpace {
                block_size: vec![8, 16],
                search_range: vec![2, 4],
                ..SearchSpace::default()
            },
            ..small_spec(SearchSpace::default())
        };
        let a = tune_profile(&clips, &spec).unwrap();
        let b = tune_profile(&clips, &spec).unwrap();
        assert_eq!(a, b);
        assert!(a.final_loss <= a.baseline_loss);
    }

    #[test]
    fn invalid_specs() {
        let clips = [translating_clip("a", 1)];
        let none: [Clip; 0] = [];
        assert!(matches!(
            tune_profile(&none, &TuningSpec::default()),
            Err(TafiError::EmptyClipList)
        ));
        let mut spec = small_spec(SearchSpace::default());
        spec.rounds = 0;
        assert!(matches!(
            tune_profile(&clips, &spec),
            Err(TafiError::InvalidSpec(_))
        ));
        let mut spec = small_spec(SearchSpace::default());
        spec.search_space.obmc.clear();
        assert!(matches!(
            tune_profile(&clips, &spec),
            Err(TafiError::InvalidSpec(_))
        ));
        let mut spec = small_spec(SearchSpace::default());
        spec.search_space.block_size = vec![12];
        assert!(matches!(
            tune_profile(&clips, &spec),
            Err(TafiError::InvalidSpec(_))
        ));
    }

    #[test]
    fn shrink_keeps_neighbors() {
        let mut space = SearchSpace::default();
        let winner = InterpParams {
            search_range: 2,
            smoothness_lambda: 64.0,
            ..Default::default()
        };
        space.shrink_around(&winner);
        assert_eq!(space.search_range, vec![2, 4]);
        assert_eq!(space.smoothness_lambda, vec![16.0, 64.0, 256.0]);
        assert_eq!(space.block_size, vec![8, 16, 32]);
        assert_eq!(space.mode, vec![Mode::Mci, Mode::FrameAverage]);
    }

    #[test]
    fn projection_snaps_to_nearest() {
        let space = SearchSpace {
            search_range: vec![3, 12],
            smoothness_lambda: vec![0.0, 10.0],
            obmc: vec![Obmc::RaisedCosine],
            ..SearchSpace::default()
        };
        let p = space.project(&InterpParams::default());
        assert_eq!(p.search_range, 12);
        assert_eq!(p.smoothness_lambda, 10.0);
        assert_eq!(p.obmc, Obmc::RaisedCosine);
        assert_eq!(p.block_size, 16);
    }

    #[test]
    fn mixing_policies() {
        let mk = |n: &str| translating_clip(n, 0);
        let a = vec![mk("a0"), mk("a1"), mk("a2")];
        let b = vec![mk("b0")];
        let names = |v: Vec<&Clip>| v.iter().map(|c| c.name().to_string()).collect::<Vec<_>>();
        assert_eq!(
            names(mixed_training_set(&[&a, &b], MixingPolicy::Proportional)),
            ["a0", "b0", "a1", "a2"]
        );
        assert_eq!(
            names(mixed_training_set(&[&a, &b], MixingPolicy::Balanced)),
            ["a0", "b0", "a1", "b0", "a2", "b0"]
        );
    }
}
