use serde::Serialize;

use crate::HarnessError;

/// Deterministic 64-bit generator (splitmix64). Hand-rolled so generated
/// corpora stay byte-identical across toolchain updates.
#[derive(Debug, Clone)]
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform draw below `n` (`n > 0`).
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }
}

/// Size caps for the generator. Hard bounds: at most 6 locations, 2 clocks,
/// 2 parameters and integer constants up to 5.
#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub max_locations: u64,
    pub max_clocks: u64,
    pub max_params: u64,
    pub max_const: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_locations: 6,
            max_clocks: 2,
            max_params: 2,
            max_const: 5,
        }
    }
}

#[derive(Serialize)]
struct Doc {
    name: String,
    clocks: Vec<String>,
    parameters: Vec<String>,
    initial: String,
    locations: Vec<LocDoc>,
    edges: Vec<EdgeDoc>,
    goal: Vec<String>,
}

#[derive(Serialize)]
struct LocDoc {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    invariant: Option<Vec<String>>,
}

#[derive(Serialize)]
struct EdgeDoc {
    from: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    guard: Option<Vec<String>>,
    action: String,
    resets: Vec<String>,
    to: String,
}

/// Generates a random model document, deterministic in the seed.
///
/// The shape is a forward path from the initial location to the goal plus a
/// few extra edges (backward ones reset every clock). Guards and invariants
/// are conjunctions of bounds comparing a clock against a parameter or an
/// integer constant; at least one edge resets a clock.
pub fn gen_random_pta(seed: u64, sizes: &GenParams) -> Result<String, HarnessError> {
    if sizes.max_locations == 0 {
        return Err(HarnessError::BadGenParams("zero locations".to_string()));
    }
    if sizes.max_locations > 6
        || sizes.max_clocks > 2
        || sizes.max_params > 2
        || sizes.max_const > 5
        || sizes.max_const == 0
    {
        return Err(HarnessError::BadGenParams(format!(
            "caps out of range: {sizes:?}"
        )));
    }
    let mut rng = SplitMix64::new(seed.wrapping_mul(0x5851f42d4c957f2d).wrapping_add(seed));

    let n_loc = if sizes.max_locations == 1 {
        1
    } else {
        2 + rng.below(sizes.max_locations - 1)
    } as usize;
    let n_clocks = if sizes.max_clocks == 0 {
        0
    } else {
        1 + rng.below(sizes.max_clocks)
    } as usize;
    let n_params = if sizes.max_params == 0 {
        0
    } else {
        1 + rng.below(sizes.max_params)
    } as usize;

    let clocks: Vec<String> = (0..n_clocks).map(|i| format!("x{i}")).collect();
    let parameters: Vec<String> = (0..n_params).map(|i| format!("p{i}")).collect();
    let loc_names: Vec<String> = (0..n_loc).map(|i| format!("l{i}")).collect();

    let bound_atom = |rng: &mut SplitMix64| -> Option<String> {
        if clocks.is_empty() {
            return None;
        }
        let clock = &clocks[rng.below(clocks.len() as u64) as usize];
        let op = if rng.chance(1, 2) { "<=" } else { ">=" };
        let rhs = if !parameters.is_empty() && rng.chance(1, 2) {
            parameters[rng.below(parameters.len() as u64) as usize].clone()
        } else {
            format!("{}", 1 + rng.below(sizes.max_const))
        };
        Some(format!("{clock} {op} {rhs}"))
    };

    let mut locations = Vec::new();
    for name in &loc_names {
        // upper-bound invariants keep zones bounded
        let invariant = if !clocks.is_empty() && rng.chance(1, 2) {
            let clock = &clocks[rng.below(clocks.len() as u64) as usize];
            let rhs = if !parameters.is_empty() && rng.chance(1, 3) {
                parameters[rng.below(parameters.len() as u64) as usize].clone()
            } else {
                format!("{}", 1 + rng.below(sizes.max_const))
            };
            Some(vec![format!("{clock} <= {rhs}")])
        } else {
            None
        };
        locations.push(LocDoc {
            name: name.clone(),
            invariant,
        });
    }

    let mut edges = Vec::new();
    let mut action = 0usize;
    let mut push_edge = |rng: &mut SplitMix64, edges: &mut Vec<EdgeDoc>, from: usize, to: usize| {
        let n_guard = rng.below(3);
        let mut guard = Vec::new();
        for _ in 0..n_guard {
            if let Some(atom) = bound_atom(rng) {
                guard.push(atom);
            }
        }
        let mut resets: Vec<String> = clocks
            .iter()
            .filter(|_| rng.chance(1, 2))
            .cloned()
            .collect();
        if to <= from {
            // backward and self edges reset everything
            resets = clocks.clone();
        }
        if edges.is_empty() && !clocks.is_empty() && resets.is_empty() {
            resets.push(clocks[0].clone());
        }
        edges.push(EdgeDoc {
            from: loc_names[from].clone(),
            guard: if guard.is_empty() { None } else { Some(guard) },
            action: format!("a{action}"),
            resets,
            to: loc_names[to].clone(),
        });
        action += 1;
    };

    for i in 0..n_loc.saturating_sub(1) {
        push_edge(&mut rng, &mut edges, i, i + 1);
    }
    let extras = rng.below(n_loc as u64 + 1);
    for _ in 0..extras {
        let from = rng.below(n_loc as u64) as usize;
        let to = rng.below(n_loc as u64) as usize;
        push_edge(&mut rng, &mut edges, from, to);
    }

    let doc = Doc {
        name: format!("gen{seed}"),
        clocks,
        parameters,
        initial: loc_names[0].clone(),
        locations,
        edges,
        goal: vec![loc_names[n_loc - 1].clone()],
    };
    Ok(serde_json::to_string_pretty(&doc).expect("document serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use zonemerge_core::model::parse_model_document;

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let sizes = GenParams::default();
        let a = gen_random_pta(17, &sizes).unwrap();
        let b = gen_random_pta(17, &sizes).unwrap();
        assert_eq!(a, b);
        let c = gen_random_pta(18, &sizes).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_documents_parse_and_validate() {
        let sizes = GenParams::default();
        for seed in 0..50 {
            let text = gen_random_pta(seed, &sizes).unwrap();
            let (pta, goals) = parse_model_document(&text).unwrap();
            assert!(!goals.is_empty(), "seed {seed}");
            assert!(
                zonemerge_core::model::validate(&pta).is_empty(),
                "seed {seed}"
            );
            // some edge carries a reset whenever clocks exist
            if pta.space().num_clocks() > 0 {
                assert!(
                    pta.edges().iter().any(|e| !e.resets.is_empty()),
                    "seed {seed}"
                );
            }
        }
    }

    #[test]
    fn zero_locations_is_rejected() {
        let sizes = GenParams {
            max_locations: 0,
            ..Default::default()
        };
        assert!(matches!(
            gen_random_pta(1, &sizes),
            Err(HarnessError::BadGenParams(_))
        ));
    }
}
