//! Circuit-map search: seed-map enumeration, best-map and target-ESP
//! selection, the one-qubit-at-a-time walk, and disjoint-zone allocation
//! for multi-programmed jobs.

use std::collections::BTreeSet;

use crate::circuits::{route, ParamCircuit};
use crate::device::DeviceSnapshot;
use crate::error::{Error, Result};
use crate::fidelity::{esp, profile_circuit};
use crate::par;

/// Injective assignment of logical qubits onto a connected physical set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitMap {
    assignment: Vec<usize>,
    sorted_physical: Vec<usize>,
}

impl CircuitMap {
    pub fn new(assignment: Vec<usize>, snapshot: &DeviceSnapshot) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::EmptyInput("map assignment".into()));
        }
        let mut sorted = assignment.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation {
                field: "assignment".into(),
                message: "not injective".into(),
            });
        }
        for &p in &sorted {
            if p >= snapshot.num_qubits() {
                return Err(Error::IndexOutOfRange {
                    index: p,
                    limit: snapshot.num_qubits(),
                });
            }
        }
        if !set_is_connected(&sorted, snapshot) {
            return Err(Error::Validation {
                field: "physical_set".into(),
                message: format!("{sorted:?} is not connected"),
            });
        }
        Ok(CircuitMap {
            assignment,
            sorted_physical: sorted,
        })
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// logical qubit -> physical qubit
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn physical(&self, logical: usize) -> Result<usize> {
        self.assignment
            .get(logical)
            .copied()
            .ok_or(Error::UnmappedQubit(logical))
    }

    pub fn sorted_physical(&self) -> &[usize] {
        &self.sorted_physical
    }

    pub fn contains(&self, physical: usize) -> bool {
        self.sorted_physical.binary_search(&physical).is_ok()
    }

    pub fn overlaps(&self, set: &BTreeSet<usize>) -> bool {
        self.sorted_physical.iter().any(|p| set.contains(p))
    }
}

fn set_is_connected(sorted: &[usize], snapshot: &DeviceSnapshot) -> bool {
    if sorted.len() <= 1 {
        return true;
    }
    let in_set = |q: usize| sorted.binary_search(&q).is_ok();
    let mut seen = BTreeSet::from([sorted[0]]);
    let mut stack = vec![sorted[0]];
    while let Some(q) = stack.pop() {
        for &n in snapshot.neighbors(q) {
            if in_set(n) && seen.insert(n) {
                stack.push(n);
            }
        }
    }
    seen.len() == sorted.len()
}

/// A map together with the ESP of the target circuit routed onto it.
#[derive(Debug, Clone)]
pub struct ScoredMap {
    pub map: CircuitMap,
    pub esp: f64,
}

/// Grows one BFS candidate from every non-excluded physical qubit, with
/// layer ties broken by ascending index; candidates that cannot reach `n`
/// qubits are dropped and duplicate physical sets are deduplicated
/// (keeping the lowest starting qubit). Logical order is BFS visit order.
pub fn enumerate_seed_maps(
    snapshot: &DeviceSnapshot,
    n: usize,
    exclude: &BTreeSet<usize>,
) -> Result<Vec<CircuitMap>> {
    if n == 0 {
        return Err(Error::EmptyInput("requested zero-qubit maps".into()));
    }
    let mut seen_sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut maps = Vec::new();
    for start in 0..snapshot.num_qubits() {
        if exclude.contains(&start) {
            continue;
        }
        let Some(order) = bfs_collect(snapshot, start, n, exclude) else {
            continue;
        };
        let mut set = order.clone();
        set.sort_unstable();
        if seen_sets.insert(set) {
            maps.push(CircuitMap::new(order, snapshot)?);
        }
    }
    if maps.is_empty() {
        return Err(Error::NoFeasibleMap(format!(
            "no connected {n}-qubit region outside the {} excluded qubits",
            exclude.len()
        )));
    }
    Ok(maps)
}

fn bfs_collect(
    snapshot: &DeviceSnapshot,
    start: usize,
    n: usize,
    exclude: &BTreeSet<usize>,
) -> Option<Vec<usize>> {
    let mut order = vec![start];
    let mut visited = BTreeSet::from([start]);
    let mut frontier = vec![start];
    while order.len() < n && !frontier.is_empty() {
        let mut next: BTreeSet<usize> = BTreeSet::new();
        for &q in &frontier {
            for &nb in snapshot.neighbors(q) {
                if !visited.contains(&nb) && !exclude.contains(&nb) {
                    next.insert(nb);
                }
            }
        }
        frontier.clear();
        for q in next {
            if order.len() == n {
                break;
            }
            visited.insert(q);
            order.push(q);
            frontier.push(q);
        }
    }
    (order.len() == n).then_some(order)
}

/// Routes the circuit onto every candidate and attaches its ESP.
pub fn score_maps(
    candidates: Vec<CircuitMap>,
    circuit: &ParamCircuit,
    snapshot: &DeviceSnapshot,
) -> Result<Vec<ScoredMap>> {
    let scored: Vec<Result<ScoredMap>> = par::map_indexed(candidates.len(), |i| {
        let map = candidates[i].clone();
        let routed = route(circuit, &map, snapshot)?;
        let profile = profile_circuit(&routed, &map, snapshot)?;
        Ok(ScoredMap {
            map,
            esp: esp(&profile)?.value(),
        })
    });
    scored.into_iter().collect()
}

fn lex_set(m: &ScoredMap) -> &[usize] {
    m.map.sorted_physical()
}

/// Highest-ESP candidate; ties broken by lexicographically smallest
/// sorted physical set.
pub fn best_map(scored: &[ScoredMap]) -> Result<&ScoredMap> {
    scored
        .iter()
        .reduce(|best, cand| {
            if cand.esp > best.esp || (cand.esp == best.esp && lex_set(cand) < lex_set(best)) {
                cand
            } else {
                best
            }
        })
        .ok_or(Error::EmptyCandidates)
}

/// Candidate whose ESP is closest to `target`; ties break toward higher
/// ESP, then lexicographically smallest physical set.
pub fn jump_to_target(scored: &[ScoredMap], target: f64) -> Result<&ScoredMap> {
    scored
        .iter()
        .reduce(|best, cand| {
            let (db, dc) = ((best.esp - target).abs(), (cand.esp - target).abs());
            let better = dc < db
                || (dc == db && cand.esp > best.esp)
                || (dc == db && cand.esp == best.esp && lex_set(cand) < lex_set(best));
            if better {
                cand
            } else {
                best
            }
        })
        .ok_or(Error::EmptyCandidates)
}

/// All maps reachable by retiring exactly one physical qubit and claiming
/// one adjacent non-excluded qubit while keeping the set connected. The
/// departing logical qubit moves to the new physical qubit.
pub fn walk_neighbors(
    map: &CircuitMap,
    snapshot: &DeviceSnapshot,
    exclude: &BTreeSet<usize>,
) -> Vec<CircuitMap> {
    let mut result = Vec::new();
    for (logical, &leaving) in map.assignment().iter().enumerate() {
        let kept: Vec<usize> = map
            .sorted_physical()
            .iter()
            .copied()
            .filter(|&p| p != leaving)
            .collect();
        let mut arrivals: BTreeSet<usize> = BTreeSet::new();
        for &p in &kept {
            for &nb in snapshot.neighbors(p) {
                if !map.contains(nb) && !exclude.contains(&nb) {
                    arrivals.insert(nb);
                }
            }
        }
        // single-qubit maps may walk through any neighbor of the leaver
        if kept.is_empty() {
            for &nb in snapshot.neighbors(leaving) {
                if !exclude.contains(&nb) {
                    arrivals.insert(nb);
                }
            }
        }
        for arriving in arrivals {
            let mut set = kept.clone();
            set.push(arriving);
            set.sort_unstable();
            if !set_is_connected(&set, snapshot) {
                continue;
            }
            let mut assignment = map.assignment().to_vec();
            assignment[logical] = arriving;
            result.push(CircuitMap {
                assignment,
                sorted_physical: set,
            });
        }
    }
    result
}

/// Greedy one-qubit step toward a target ESP over (neighbors + stay).
/// Ties break toward staying, then higher ESP, then lexicographic set;
/// the returned map is never farther from the target than the input.
pub fn walk_step(
    current: &ScoredMap,
    target: f64,
    circuit: &ParamCircuit,
    snapshot: &DeviceSnapshot,
    exclude: &BTreeSet<usize>,
) -> Result<ScoredMap> {
    let neighbors = walk_neighbors(&current.map, snapshot, exclude);
    let scored = score_maps(neighbors, circuit, snapshot)?;
    let mut best = current.clone();
    let mut best_dist = (current.esp - target).abs();
    let mut best_is_current = true;
    for cand in scored {
        let dist = (cand.esp - target).abs();
        let beats = if dist != best_dist {
            dist < best_dist
        } else if best_is_current {
            false // staying wins ties
        } else if cand.esp != best.esp {
            cand.esp > best.esp
        } else {
            lex_set(&cand) < lex_set(&best)
        };
        if beats {
            best = cand;
            best_dist = dist;
            best_is_current = false;
        }
    }
    Ok(best)
}

/// A job's claim on physical qubits.
#[derive(Debug, Clone)]
pub struct Zone {
    pub owner: usize,
    pub claimed: BTreeSet<usize>,
}

#[derive(Debug, Clone)]
pub struct JobRequest<'a> {
    pub n: usize,
    pub circuit: &'a ParamCircuit,
}

#[derive(Debug)]
pub struct JobAllocation {
    pub zone: Zone,
    pub candidates: Vec<ScoredMap>,
    pub initial: ScoredMap,
    pub sigma_bounds: (f64, f64),
}

/// First-come-first-served disjoint allocation: job j's seed maps are
/// enumerated excluding earlier jobs' claims, and its initial map is the
/// jump toward `select(j, sigma_bounds)`.
pub fn allocate_zones_with(
    jobs: &[JobRequest<'_>],
    snapshot: &DeviceSnapshot,
    select: impl Fn(usize, (f64, f64)) -> f64,
) -> Result<Vec<JobAllocation>> {
    let total: usize = jobs.iter().map(|j| j.n).sum();
    if total > snapshot.num_qubits() {
        return Err(Error::AllocationFailure {
            job: jobs.len().saturating_sub(1),
            message: format!(
                "{total} qubits requested on a {}-qubit device",
                snapshot.num_qubits()
            ),
        });
    }
    let mut claimed: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::with_capacity(jobs.len());
    for (j, job) in jobs.iter().enumerate() {
        let wrap = |e: Error| Error::AllocationFailure {
            job: j,
            message: e.to_string(),
        };
        let candidates = enumerate_seed_maps(snapshot, job.n, &claimed).map_err(wrap)?;
        let scored = score_maps(candidates, job.circuit, snapshot).map_err(wrap)?;
        let bounds = crate::schedule::default_sigma_bounds(&scored).map_err(wrap)?;
        let initial = jump_to_target(&scored, select(j, bounds))
            .map_err(wrap)?
            .clone();
        claimed.extend(initial.map.sorted_physical().iter().copied());
        out.push(JobAllocation {
            zone: Zone {
                owner: j,
                claimed: initial.map.sorted_physical().iter().copied().collect(),
            },
            candidates: scored,
            initial,
            sigma_bounds: bounds,
        });
    }
    Ok(out)
}

/// FCFS allocation with explicit per-job target ESPs (1.0 selects each
/// job's best available map).
pub fn allocate_zones(
    jobs: &[JobRequest<'_>],
    snapshot: &DeviceSnapshot,
    targets: &[f64],
) -> Result<Vec<JobAllocation>> {
    if targets.len() != jobs.len() {
        return Err(Error::LengthMismatch(format!(
            "{} targets for {} jobs",
            targets.len(),
            jobs.len()
        )));
    }
    allocate_zones_with(jobs, snapshot, |j, _| targets[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{Gate, GateOp, ParamCircuit};
    use crate::device::{data_dir, load_snapshot};

    fn line5() -> DeviceSnapshot {
        load_snapshot(data_dir().join("devices/line5.json")).unwrap()
    }

    /// One CX on logical (0, 1): the canonical two-qubit probe circuit.
    fn probe2() -> ParamCircuit {
        ParamCircuit::new(
            2,
            vec![Gate {
                op: GateOp::Cx,
                qubits: vec![0, 1],
                angle: None,
            }],
            0,
        )
        .unwrap()
    }

    fn scored_line5() -> Vec<ScoredMap> {
        let snap = line5();
        let maps = enumerate_seed_maps(&snap, 2, &BTreeSet::new()).unwrap();
        score_maps(maps, &probe2(), &snap).unwrap()
    }

    #[test]
    fn seed_maps_on_line5() {
        let snap = line5();
        let maps = enumerate_seed_maps(&snap, 2, &BTreeSet::new()).unwrap();
        let sets: Vec<Vec<usize>> = maps.iter().map(|m| m.sorted_physical().to_vec()).collect();
        assert_eq!(sets, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4]]);
    }

    #[test]
    fn whole_device_yields_single_map() {
        let snap = line5();
        let maps = enumerate_seed_maps(&snap, 5, &BTreeSet::new()).unwrap();
        assert_eq!(maps.len(), 1);
        assert_eq!(maps[0].sorted_physical(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn exclusion_can_make_mapping_infeasible() {
        let snap = line5();
        let err = enumerate_seed_maps(&snap, 3, &BTreeSet::from([2])).unwrap_err();
        assert!(matches!(err, Error::NoFeasibleMap(_)));
    }

    #[test]
    fn best_map_prefers_low_error_edge_then_lex() {
        let scored = scored_line5();
        let best = best_map(&scored).unwrap();
        assert_eq!(best.map.sorted_physical(), &[1, 2]);
        assert!((best.esp - 0.99).abs() < 1e-9);
    }

    #[test]
    fn best_map_on_homogeneous_device_is_lexicographic() {
        let spec = crate::device::SyntheticDeviceSpec {
            topology: crate::device::Topology::Path(5),
            noise_profile: crate::device::NoiseProfile {
                seed: 1,
                sq_error_range: (1e-3, 1e-3),
                tq_error_range: (1e-2, 1e-2),
                readout_range: (0.0, 0.0),
                t1_range_us: (100.0, 100.0),
                t2_range_us: (100.0, 100.0),
                spatial_correlation: 0.0,
            },
        };
        let snap = crate::device::synthesize_device(&spec).unwrap();
        let maps = enumerate_seed_maps(&snap, 2, &BTreeSet::new()).unwrap();
        let scored = score_maps(maps, &probe2(), &snap).unwrap();
        assert_eq!(best_map(&scored).unwrap().map.sorted_physical(), &[0, 1]);
    }

    #[test]
    fn jump_tie_breaking() {
        let scored = scored_line5();
        assert_eq!(
            jump_to_target(&scored, 1.0).unwrap().map.sorted_physical(),
            &[1, 2]
        );
        assert_eq!(
            jump_to_target(&scored, 0.0).unwrap().map.sorted_physical(),
            &[0, 1]
        );
        assert_eq!(
            jump_to_target(&scored, 0.95).unwrap().map.sorted_physical(),
            &[0, 1]
        );
    }

    #[test]
    fn walk_neighbors_on_line5() {
        let snap = line5();
        let map = CircuitMap::new(vec![1, 2], &snap).unwrap();
        let sets: Vec<Vec<usize>> = walk_neighbors(&map, &snap, &BTreeSet::new())
            .iter()
            .map(|m| m.sorted_physical().to_vec())
            .collect();
        assert_eq!(sets.len(), 2);
        assert!(sets.contains(&vec![0, 1]));
        assert!(sets.contains(&vec![2, 3]));

        let whole = CircuitMap::new(vec![0, 1, 2, 3, 4], &snap).unwrap();
        assert!(walk_neighbors(&whole, &snap, &BTreeSet::new()).is_empty());

        let sets: Vec<Vec<usize>> = walk_neighbors(&map, &snap, &BTreeSet::from([0]))
            .iter()
            .map(|m| m.sorted_physical().to_vec())
            .collect();
        assert_eq!(sets, vec![vec![2, 3]]);
    }

    #[test]
    fn walk_step_moves_toward_target() {
        let snap = line5();
        let circuit = probe2();
        let start = score_maps(
            vec![CircuitMap::new(vec![0, 1], &snap).unwrap()],
            &circuit,
            &snap,
        )
        .unwrap()
        .remove(0);
        let stepped = walk_step(&start, 0.99, &circuit, &snap, &BTreeSet::new()).unwrap();
        assert_eq!(stepped.map.sorted_physical(), &[1, 2]);

        // staying is preferred when the current map already matches
        let stay = walk_step(&start, start.esp, &circuit, &snap, &BTreeSet::new()).unwrap();
        assert_eq!(stay.map, start.map);
    }

    #[test]
    fn walk_step_never_moves_farther() {
        let snap = line5();
        let circuit = probe2();
        for target in [0.0, 0.9, 0.95, 0.97, 0.99, 1.0] {
            for scored in scored_line5() {
                let stepped = walk_step(&scored, target, &circuit, &snap, &BTreeSet::new()).unwrap();
                assert!(
                    (stepped.esp - target).abs() <= (scored.esp - target).abs() + 1e-15,
                    "target {target}"
                );
            }
        }
    }

    #[test]
    fn zone_allocation_on_line5() {
        let snap = line5();
        let circuit = probe2();
        let jobs = vec![
            JobRequest { n: 2, circuit: &circuit },
            JobRequest { n: 2, circuit: &circuit },
        ];
        let alloc = allocate_zones(&jobs, &snap, &[1.0, 1.0]).unwrap();
        assert_eq!(alloc[0].initial.map.sorted_physical(), &[1, 2]);
        assert_eq!(alloc[1].initial.map.sorted_physical(), &[3, 4]);

        let three = vec![
            JobRequest { n: 2, circuit: &circuit },
            JobRequest { n: 2, circuit: &circuit },
            JobRequest { n: 2, circuit: &circuit },
        ];
        match allocate_zones(&three, &snap, &[1.0, 1.0, 1.0]) {
            Err(Error::AllocationFailure { job, .. }) => assert_eq!(job, 2),
            other => panic!("expected allocation failure, got {other:?}"),
        }
    }

    #[test]
    fn single_job_can_take_whole_device() {
        let snap = line5();
        let circuit = efficient_line_circuit(5);
        let jobs = vec![JobRequest { n: 5, circuit: &circuit }];
        let alloc = allocate_zones(&jobs, &snap, &[1.0]).unwrap();
        assert_eq!(alloc[0].zone.claimed.len(), 5);
    }

    fn efficient_line_circuit(n: usize) -> ParamCircuit {
        crate::circuits::efficient_su2(n, 1).unwrap()
    }
}
