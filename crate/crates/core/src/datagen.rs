//! Seeded synthetic q-sequence databases.
//!
//! Sequence and element sizes are Poisson around the configured means
//! (clamped to at least one), item ids follow a Zipf law so a few items are
//! frequent and most are rare, and quantities and external utilities are
//! uniform. ChaCha8 keeps the stream identical across platforms.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsdb::{ItemId, QElement, QSequence, Qsdb, UtilityTable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// `D`: number of sequences.
    pub sequences: usize,
    /// `C`: mean elements per sequence.
    pub avg_elements: f64,
    /// `T`: mean items per element.
    pub avg_items: f64,
    /// `N`: distinct item ids, `1..=N`.
    pub items: u32,
    pub max_quantity: u32,
    /// Inclusive range of external utilities.
    pub utility_range: (u64, u64),
    /// Zipf exponent of the item distribution.
    pub skew: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            sequences: 1000,
            avg_elements: 6.0,
            avg_items: 4.0,
            items: 1000,
            max_quantity: 5,
            utility_range: (1, 10),
            skew: 1.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid generator parameter: {0}")]
    Invalid(&'static str),
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |ok: bool, what| {
            if ok {
                Ok(())
            } else {
                Err(GenError::Invalid(what))
            }
        };
        bad(self.sequences >= 1, "sequence count must be positive")?;
        bad(
            self.avg_elements.is_finite() && self.avg_elements > 0.0,
            "mean elements per sequence must be positive",
        )?;
        bad(
            self.avg_items.is_finite() && self.avg_items > 0.0,
            "mean items per element must be positive",
        )?;
        bad(self.items >= 1, "distinct item count must be positive")?;
        bad(
            self.max_quantity >= 1,
            "maximum quantity must be at least 1",
        )?;
        let (lo, hi) = self.utility_range;
        bad(
            lo >= 1 && lo <= hi,
            "external utility range must be 1 <= lo <= hi",
        )?;
        bad(
            self.skew.is_finite() && self.skew >= 0.0,
            "skew must be non-negative",
        )
    }
}

fn poisson_at_least_one(d: &Poisson<f64>, rng: &mut ChaCha8Rng) -> usize {
    (d.sample(rng) as usize).max(1)
}

pub fn generate(params: &GenParams) -> Result<Qsdb, GenError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (lo, hi) = params.utility_range;
    let table: UtilityTable = (1..=params.items)
        .map(|i| (ItemId::new(i).unwrap(), rng.random_range(lo..=hi)))
        .collect();
    let n_elem = Poisson::new(params.avg_elements).expect("validated mean");
    let n_item = Poisson::new(params.avg_items).expect("validated mean");
    let zipf = Zipf::new(params.items as f64, params.skew).expect("validated skew");

    let mut sequences = Vec::with_capacity(params.sequences);
    let mut picked: Vec<u32> = Vec::new();
    for sid in 0..params.sequences {
        let len = poisson_at_least_one(&n_elem, &mut rng);
        let mut elements = Vec::with_capacity(len);
        for _ in 0..len {
            let size = poisson_at_least_one(&n_item, &mut rng).min(params.items as usize);
            picked.clear();
            // rejection keeps the skew; fall back to uniform when it stalls
            let mut tries = 0;
            while picked.len() < size && tries < 16 * size {
                let it = zipf.sample(&mut rng) as u32;
                if !picked.contains(&it) {
                    picked.push(it);
                }
                tries += 1;
            }
            if picked.len() < size {
                for k in index::sample(&mut rng, params.items as usize, size).into_iter() {
                    let it = k as u32 + 1;
                    if picked.len() < size && !picked.contains(&it) {
                        picked.push(it);
                    }
                }
            }
            picked.sort_unstable();
            let entries = picked
                .iter()
                .map(|&i| {
                    (
                        ItemId::new(i).unwrap(),
                        rng.random_range(1..=params.max_quantity),
                    )
                })
                .collect();
            elements.push(QElement::new(entries).expect("distinct sorted items"));
        }
        sequences.push(QSequence::new(sid as u64, elements).expect("non-empty sequence"));
    }
    Ok(Qsdb::new(sequences, table).expect("generated database is valid"))
}

/// Shape of the small random databases used for oracle comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmallShape {
    pub max_sequences: usize,
    /// Items per sequence.
    pub max_length: usize,
    pub items: u32,
    pub max_quantity: u32,
    pub max_utility: u64,
}

impl Default for SmallShape {
    fn default() -> Self {
        SmallShape {
            max_sequences: 8,
            max_length: 10,
            items: 8,
            max_quantity: 5,
            max_utility: 10,
        }
    }
}

/// A database of 1 to `max_sequences` sequences, each 1 to `max_length`
/// items long, split into elements of random size.
pub fn small_random(seed: u64, shape: &SmallShape) -> Qsdb {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table: UtilityTable = (1..=shape.items)
        .map(|i| {
            (
                ItemId::new(i).unwrap(),
                rng.random_range(1..=shape.max_utility),
            )
        })
        .collect();
    let count = rng.random_range(1..=shape.max_sequences);
    let mut sequences = Vec::with_capacity(count);
    for sid in 0..count {
        let mut left = rng.random_range(1..=shape.max_length);
        let mut elements = Vec::new();
        while left > 0 {
            let size = rng.random_range(1..=left.min(shape.items as usize));
            let mut ids: Vec<u32> = index::sample(&mut rng, shape.items as usize, size)
                .into_iter()
                .map(|k| k as u32 + 1)
                .collect();
            ids.sort_unstable();
            let entries = ids
                .into_iter()
                .map(|i| {
                    (
                        ItemId::new(i).unwrap(),
                        rng.random_range(1..=shape.max_quantity),
                    )
                })
                .collect();
            elements.push(QElement::new(entries).expect("distinct sorted items"));
            left -= size;
        }
        sequences.push(QSequence::new(sid as u64, elements).expect("non-empty sequence"));
    }
    Qsdb::new(sequences, table).expect("generated database is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsdb::sequences_to_string;

    fn params(d: usize, c: f64, t: f64, n: u32, seed: u64) -> GenParams {
        GenParams {
            sequences: d,
            avg_elements: c,
            avg_items: t,
            items: n,
            seed,
            ..GenParams::default()
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let p = params(4, 3.0, 2.0, 6, 42);
        let a = generate(&p).unwrap();
        let b = generate(&p).unwrap();
        assert_eq!(sequences_to_string(&a), sequences_to_string(&b));
        assert_eq!(a, b);
        let c = generate(&GenParams { seed: 43, ..p }).unwrap();
        assert_ne!(sequences_to_string(&a), sequences_to_string(&c));
    }

    #[test]
    fn element_size_tracks_t() {
        let db = generate(&params(10_000, 6.0, 4.0, 7600, 1)).unwrap();
        assert_eq!(db.len(), 10_000);
        let (mut elems, mut items) = (0usize, 0usize);
        for s in db.sequences() {
            elems += s.elements().len();
            items += s.items().count();
        }
        let t = items as f64 / elems as f64;
        assert!((t - 4.0).abs() <= 0.15 * 4.0, "avg items per element {t}");
        let c = elems as f64 / db.len() as f64;
        assert!(
            (c - 6.0).abs() <= 0.15 * 6.0,
            "avg elements per sequence {c}"
        );
    }

    #[test]
    fn unit_quantities() {
        let p = GenParams {
            max_quantity: 1,
            ..params(50, 4.0, 3.0, 20, 7)
        };
        let db = generate(&p).unwrap();
        assert!(db
            .sequences()
            .iter()
            .flat_map(|s| s.elements())
            .flat_map(|e| e.entries())
            .all(|&(_, q)| q == 1));
    }

    #[test]
    fn utilities_within_range() {
        let p = GenParams {
            utility_range: (3, 4),
            ..params(10, 2.0, 2.0, 30, 9)
        };
        let db = generate(&p).unwrap();
        assert!(db.utilities().iter().all(|(_, u)| (3..=4).contains(&u)));
        assert_eq!(db.utilities().len(), 30);
    }

    #[test]
    fn skew_favours_small_ids() {
        let db = generate(&params(2000, 4.0, 3.0, 500, 5)).unwrap();
        let mut freq = vec![0usize; 501];
        for s in db.sequences() {
            for i in s.items() {
                freq[i.index()] += 1;
            }
        }
        let head: usize = freq[1..=10].iter().sum();
        let tail: usize = freq[491..=500].iter().sum();
        assert!(head > 10 * tail.max(1), "head {head} tail {tail}");
    }

    #[test]
    fn dense_when_n_is_small() {
        // element sizes are capped by N, so T > N still terminates
        let db = generate(&params(20, 3.0, 9.0, 3, 11)).unwrap();
        assert!(db
            .sequences()
            .iter()
            .flat_map(|s| s.elements())
            .all(|e| e.len() <= 3));
    }

    #[test]
    fn rejects_bad_params() {
        let ok = params(1, 1.0, 1.0, 1, 0);
        assert!(ok.validate().is_ok());
        for bad in [
            GenParams {
                sequences: 0,
                ..ok.clone()
            },
            GenParams {
                avg_elements: 0.0,
                ..ok.clone()
            },
            GenParams {
                avg_items: f64::NAN,
                ..ok.clone()
            },
            GenParams {
                items: 0,
                ..ok.clone()
            },
            GenParams {
                max_quantity: 0,
                ..ok.clone()
            },
            GenParams {
                utility_range: (5, 2),
                ..ok.clone()
            },
            GenParams {
                utility_range: (0, 2),
                ..ok.clone()
            },
        ] {
            assert!(generate(&bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn small_random_respects_shape() {
        let shape = SmallShape::default();
        for seed in 0..50 {
            let db = small_random(seed, &shape);
            assert!((1..=8).contains(&db.len()));
            for s in db.sequences() {
                assert!((1..=10).contains(&s.items().count()));
                assert!(s.items().all(|i| i.get() <= 8));
            }
            assert!(db.utilities().iter().all(|(_, u)| (1..=10).contains(&u)));
            assert_eq!(db, small_random(seed, &shape));
        }
    }
}
