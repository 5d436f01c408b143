//! Memoized evaluation of canonical designs.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::CanonicalDesign;
use crate::fitness::FitnessBreakdown;
use crate::thermal::SimulationResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub design: CanonicalDesign,
    pub sim: SimulationResult,
    pub fitness: FitnessBreakdown,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
}

type Slot = Arc<OnceLock<Result<Arc<Evaluation>, String>>>;

/// Key → evaluation map shared by concurrent workers. The first caller of a
/// key evaluates it; concurrent callers of the same key wait for that result.
#[derive(Debug, Default)]
pub struct EvalCache {
    slots: Mutex<HashMap<String, Slot>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the cached evaluation of `key`, running `eval` only if no
    /// caller has evaluated it before. Failures are cached too and reported
    /// with the key.
    pub fn get_or_eval(
        &self,
        key: &str,
        eval: impl FnOnce() -> Result<Evaluation, String>,
    ) -> Result<Arc<Evaluation>, String> {
        let slot = {
            let mut map = self.slots.lock().expect("cache lock poisoned");
            Arc::clone(map.entry(key.to_string()).or_default())
        };
        let mut ran = false;
        let r = slot.get_or_init(|| {
            ran = true;
            self.misses.fetch_add(1, Ordering::Relaxed);
            eval().map(Arc::new).map_err(|e| format!("{key}: {e}"))
        });
        if !ran {
            self.hits.fetch_add(1, Ordering::Relaxed);
        }
        r.clone()
    }

    pub fn get(&self, key: &str) -> Option<Arc<Evaluation>> {
        let slot = self.slots.lock().expect("cache lock poisoned").get(key).cloned()?;
        slot.get().and_then(|r| r.as_ref().ok().cloned())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.slots.lock().expect("cache lock poisoned").contains_key(key)
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats { hits: self.hits.load(Ordering::Relaxed), misses: self.misses.load(Ordering::Relaxed) }
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Successful evaluations, sorted by key.
    pub fn evaluations(&self) -> Vec<Arc<Evaluation>> {
        let map = self.slots.lock().expect("cache lock poisoned");
        let mut keys: Vec<&String> = map.keys().collect();
        keys.sort();
        keys.into_iter()
            .filter_map(|k| map[k].get().and_then(|r| r.as_ref().ok().cloned()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::FitnessBreakdown;
    use rayon::prelude::*;

    fn dummy(key: &str) -> Evaluation {
        Evaluation {
            design: CanonicalDesign {
                scenario: Default::default(),
                frame: crate::catalog::FrameSpec {
                    id: "f".into(),
                    material: crate::catalog::FrameMaterial::WoodHigh,
                    u_value: 1.0,
                    width_m: 0.07,
                },
                reflectance: 0.5,
                facades: vec![],
                windows: vec![],
                key: key.into(),
            },
            sim: SimulationResult { edh: 1.0, edc: 1.0, nct: 1.0, q_sol_jul: 1.0, balance: None, traces: None },
            fitness: FitnessBreakdown { qualities: vec![], penalties: vec![], alpha_p: 1000.0, total: 0.5 },
        }
    }

    #[test]
    fn repeat_key_is_a_hit() {
        let c = EvalCache::new();
        let calls = AtomicUsize::new(0);
        for _ in 0..2 {
            let r = c
                .get_or_eval("a", || {
                    calls.fetch_add(1, Ordering::SeqCst);
                    Ok(dummy("a"))
                })
                .unwrap();
            assert_eq!(r.fitness.total, 0.5);
        }
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        assert_eq!(c.stats(), CacheStats { hits: 1, misses: 1 });
    }

    #[test]
    fn distinct_keys_are_misses() {
        let c = EvalCache::new();
        for k in ["a", "b", "c"] {
            c.get_or_eval(k, || Ok(dummy(k))).unwrap();
        }
        assert_eq!(c.stats(), CacheStats { hits: 0, misses: 3 });
    }

    #[test]
    fn errors_carry_the_key() {
        let c = EvalCache::new();
        let e = c.get_or_eval("bad", || Err("boom".into())).unwrap_err();
        assert!(e.contains("bad") && e.contains("boom"));
        assert!(c.get("bad").is_none());
    }

    #[test]
    fn concurrent_callers_share_one_evaluation() {
        let c = EvalCache::new();
        let calls = AtomicUsize::new(0);
        (0..64).into_par_iter().for_each(|i| {
            let k = format!("k{}", i % 4);
            c.get_or_eval(&k, || {
                calls.fetch_add(1, Ordering::SeqCst);
                std::thread::sleep(std::time::Duration::from_millis(5));
                Ok(dummy(&k))
            })
            .unwrap();
        });
        assert_eq!(calls.load(Ordering::SeqCst), 4);
        assert_eq!(c.stats(), CacheStats { hits: 60, misses: 4 });
    }
}
