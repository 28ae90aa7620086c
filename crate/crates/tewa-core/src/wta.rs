//! Weapon-allocation integer program: maximize target-value-destroyed
//! `TVD = sum_ws y_ws * C_ws` subject to per-weapon inventory
//! (`sum_s y_ws * N_ws <= NI_w`), per-target-type capacity
//! (`sum_w y_ws <= NT_s`) and non-negativity. Three solvers: exhaustive
//! exact search, a ratio-greedy heuristic, and a greedy-seeded genetic
//! algorithm with either a generation or a wall-clock budget.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WtaError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("search space of {candidates} candidate matrices exceeds the cap of {cap}")]
    InstanceTooLarge { candidates: u128, cap: u128 },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

/// A weapon type: available inventory, per-target-type salvo size
/// (`N_ws`, weapons expended per engagement) and kill probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeaponType {
    pub id: String,
    pub inventory: u32,
    pub salvo: Vec<u32>,
    pub kill_prob: Vec<f64>,
}

/// A target type: how many are present and the military value of one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetTypeSpec {
    pub id: String,
    pub count: u32,
    pub value: f64,
}

/// Non-negative engagement counts, weapons (rows) by target types (cols).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationMatrix {
    pub y: Vec<Vec<u32>>,
}

impl AllocationMatrix {
    pub fn zeros(weapons: usize, targets: usize) -> Self {
        Self {
            y: vec![vec![0; targets]; weapons],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.y.len(), self.y.first().map_or(0, Vec::len))
    }

    pub fn total_units(&self) -> u64 {
        self.y.iter().flatten().map(|&v| v as u64).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WtaInstance {
    pub weapons: Vec<WeaponType>,
    pub targets: Vec<TargetTypeSpec>,
    /// Payoff matrix `C_ws`, derived from values and kill probabilities.
    pub payoff: Vec<Vec<f64>>,
}

/// `C_ws = V_s * P_ws`: expected value destroyed by one engagement.
pub fn build_cws(
    weapons: &[WeaponType],
    targets: &[TargetTypeSpec],
) -> Result<Vec<Vec<f64>>, WtaError> {
    let s = targets.len();
    let mut payoff = Vec::with_capacity(weapons.len());
    for w in weapons {
        if w.salvo.len() != s || w.kill_prob.len() != s {
            return Err(WtaError::DimensionMismatch(format!(
                "weapon '{}' has {} salvo / {} kill-prob entries for {} target types",
                w.id,
                w.salvo.len(),
                w.kill_prob.len(),
                s
            )));
        }
        payoff.push(
            w.kill_prob
                .iter()
                .zip(targets)
                .map(|(&p, t)| t.value * p)
                .collect(),
        );
    }
    Ok(payoff)
}

impl WtaInstance {
    pub fn new(weapons: Vec<WeaponType>, targets: Vec<TargetTypeSpec>) -> Result<Self, WtaError> {
        for w in &weapons {
            if w.salvo.iter().any(|&n| n == 0) {
                return Err(WtaError::InvalidInstance(format!(
                    "weapon '{}' has a zero salvo size",
                    w.id
                )));
            }
            if w.kill_prob.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(WtaError::InvalidInstance(format!(
                    "weapon '{}' has a kill probability outside [0, 1]",
                    w.id
                )));
            }
        }
        for t in &targets {
            if !(t.value.is_finite() && t.value > 0.0) {
                return Err(WtaError::InvalidInstance(format!(
                    "target type '{}' needs a positive finite value",
                    t.id
                )));
            }
        }
        let payoff = build_cws(&weapons, &targets)?;
        Ok(Self {
            weapons,
            targets,
            payoff,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.weapons.len(), self.targets.len())
    }

    fn check_shape(&self, y: &AllocationMatrix) -> Result<(), WtaError> {
        let (w, s) = self.shape();
        if y.y.len() != w || y.y.iter().any(|row| row.len() != s) {
            return Err(WtaError::DimensionMismatch(format!(
                "allocation shape {:?} does not match instance {w}x{s}",
                y.shape()
            )));
        }
        Ok(())
    }

    /// Static per-cell upper bound `min(NI_w / N_ws, NT_s)`.
    fn cell_bound(&self, w: usize, s: usize) -> u32 {
        let by_inventory = self.weapons[w].inventory / self.weapons[w].salvo[s];
        by_inventory.min(self.targets[s].count)
    }
}

/// Target value destroyed by an allocation.
pub fn evaluate_tvd(instance: &WtaInstance, y: &AllocationMatrix) -> Result<f64, WtaError> {
    instance.check_shape(y)?;
    let mut tvd = 0.0;
    for (row, crow) in y.y.iter().zip(&instance.payoff) {
        for (&units, &c) in row.iter().zip(crow) {
            tvd += units as f64 * c;
        }
    }
    Ok(tvd)
}

/// A violated constraint, named.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstraintViolation {
    Inventory {
        weapon: String,
        consumed: u64,
        available: u32,
    },
    TargetCount {
        target: String,
        engaged: u64,
        present: u32,
    },
}

/// Checks inventory, target-count and non-negativity constraints.
/// Non-negativity holds by construction of the unsigned matrix.
pub fn feasible(
    instance: &WtaInstance,
    y: &AllocationMatrix,
) -> Result<(bool, Vec<ConstraintViolation>), WtaError> {
    instance.check_shape(y)?;
    let mut violations = Vec::new();
    for (w, weapon) in instance.weapons.iter().enumerate() {
        let consumed: u64 = y.y[w]
            .iter()
            .zip(&weapon.salvo)
            .map(|(&units, &n)| units as u64 * n as u64)
            .sum();
        if consumed > weapon.inventory as u64 {
            violations.push(ConstraintViolation::Inventory {
                weapon: weapon.id.clone(),
                consumed,
                available: weapon.inventory,
            });
        }
    }
    for (s, target) in instance.targets.iter().enumerate() {
        let engaged: u64 = y.y.iter().map(|row| row[s] as u64).sum();
        if engaged > target.count as u64 {
            violations.push(ConstraintViolation::TargetCount {
                target: target.id.clone(),
                engaged,
                present: target.count,
            });
        }
    }
    Ok((violations.is_empty(), violations))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub allocation: AllocationMatrix,
    pub tvd: f64,
}

/// Default cap on the number of candidate matrices the exact solver will
/// consider before refusing the instance.
pub const EXACT_SEARCH_CAP: u128 = 10_000_000;

/// Exhaustive search for the TVD-maximal feasible allocation. Ties break
/// toward the lexicographically smallest flattened matrix. Refuses
/// instances whose candidate count exceeds `cap`.
pub fn solve_exact_with_cap(instance: &WtaInstance, cap: u128) -> Result<Solution, WtaError> {
    let (w, s) = instance.shape();
    let mut candidates: u128 = 1;
    for wi in 0..w {
        for si in 0..s {
            candidates = candidates.saturating_mul(instance.cell_bound(wi, si) as u128 + 1);
            if candidates > cap {
                return Err(WtaError::InstanceTooLarge { candidates, cap });
            }
        }
    }

    let mut rem_inventory: Vec<u64> = instance.weapons.iter().map(|x| x.inventory as u64).collect();
    let mut rem_count: Vec<u64> = instance.targets.iter().map(|t| t.count as u64).collect();
    let mut current = AllocationMatrix::zeros(w, s);
    let mut best: Option<(f64, AllocationMatrix)> = None;

    // Depth-first over cells in row-major order, values ascending, so the
    // first optimum encountered is the lexicographically smallest one.
    fn descend(
        instance: &WtaInstance,
        cell: usize,
        tvd: f64,
        current: &mut AllocationMatrix,
        rem_inventory: &mut [u64],
        rem_count: &mut [u64],
        best: &mut Option<(f64, AllocationMatrix)>,
    ) {
        let (w_total, s_total) = instance.shape();
        if cell == w_total * s_total {
            match best {
                Some((best_tvd, _)) if tvd <= *best_tvd => {}
                _ => *best = Some((tvd, current.clone())),
            }
            return;
        }
        let (w, s) = (cell / s_total, cell % s_total);
        let salvo = instance.weapons[w].salvo[s] as u64;
        let ub = (rem_inventory[w] / salvo).min(rem_count[s]);
        let payoff = instance.payoff[w][s];
        for units in 0..=ub {
            current.y[w][s] = units as u32;
            rem_inventory[w] -= units * salvo;
            rem_count[s] -= units;
            descend(
                instance,
                cell + 1,
                tvd + units as f64 * payoff,
                current,
                rem_inventory,
                rem_count,
                best,
            );
            rem_inventory[w] += units * salvo;
            rem_count[s] += units;
        }
        current.y[w][s] = 0;
    }

    descend(
        instance,
        0,
        0.0,
        &mut current,
        &mut rem_inventory,
        &mut rem_count,
        &mut best,
    );
    let (_, allocation) = best.expect("the zero allocation is always feasible");
    let tvd = evaluate_tvd(instance, &allocation)?;
    Ok(Solution { allocation, tvd })
}

pub fn solve_exact(instance: &WtaInstance) -> Result<Solution, WtaError> {
    solve_exact_with_cap(instance, EXACT_SEARCH_CAP)
}

/// Ratio greedy: repeatedly assign one engagement to the feasible cell
/// with the highest payoff per consumed weapon (`C_ws / N_ws`), ties
/// toward the smaller (weapon, target) index pair, until no cell with
/// positive payoff remains feasible.
pub fn solve_greedy(instance: &WtaInstance) -> Solution {
    let (w_total, s_total) = instance.shape();
    let mut rem_inventory: Vec<u64> = instance.weapons.iter().map(|x| x.inventory as u64).collect();
    let mut rem_count: Vec<u64> = instance.targets.iter().map(|t| t.count as u64).collect();
    let mut allocation = AllocationMatrix::zeros(w_total, s_total);
    loop {
        let mut pick: Option<(usize, usize, f64)> = None;
        for w in 0..w_total {
            for s in 0..s_total {
                let salvo = instance.weapons[w].salvo[s] as u64;
                if rem_inventory[w] < salvo || rem_count[s] == 0 {
                    continue;
                }
                let ratio = instance.payoff[w][s] / salvo as f64;
                if ratio <= 0.0 {
                    continue;
                }
                match pick {
                    Some((_, _, best)) if ratio <= best => {}
                    _ => pick = Some((w, s, ratio)),
                }
            }
        }
        let Some((w, s, _)) = pick else { break };
        allocation.y[w][s] += 1;
        rem_inventory[w] -= instance.weapons[w].salvo[s] as u64;
        rem_count[s] -= 1;
    }
    let tvd = evaluate_tvd(instance, &allocation).expect("matching shape");
    Solution { allocation, tvd }
}

/// Search budget for the genetic solver. Generation budgets are
/// deterministic for a fixed seed; wall-clock budgets are not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GaBudget {
    Generations(u32),
    WallClockSecs(f64),
}

impl Default for GaBudget {
    fn default() -> Self {
        GaBudget::Generations(200)
    }
}

const GA_POPULATION: usize = 50;
const GA_TOURNAMENT: usize = 3;
const GA_MUTATION_PROB: f64 = 0.1;

struct Individual {
    genes: Vec<u32>, // flattened row-major allocation
    tvd: f64,
}

/// Genetic solver: population 50, tournament selection (k = 3), uniform
/// crossover on the flattened matrix, single-cell ±1 mutation with
/// probability 0.1 per individual, infeasible offspring repaired by
/// decrementing lowest-ratio cells, greedy solution injected into
/// generation 0, one-elite survival. Returns the best individual ever
/// seen, so its TVD never falls below the greedy seed's.
pub fn solve_ga(instance: &WtaInstance, budget: GaBudget, seed: u64) -> Solution {
    let (w_total, s_total) = instance.shape();
    let cells = w_total * s_total;
    if cells == 0 {
        return Solution {
            allocation: AllocationMatrix::zeros(w_total, s_total),
            tvd: 0.0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let flatten = |m: &AllocationMatrix| -> Vec<u32> { m.y.iter().flatten().copied().collect() };
    let unflatten = |genes: &[u32]| -> AllocationMatrix {
        AllocationMatrix {
            y: genes.chunks(s_total).map(|row| row.to_vec()).collect(),
        }
    };
    let fitness = |genes: &[u32]| -> f64 {
        genes
            .iter()
            .enumerate()
            .map(|(i, &units)| units as f64 * instance.payoff[i / s_total][i % s_total])
            .sum()
    };

    let bounds: Vec<u32> = (0..cells)
        .map(|i| instance.cell_bound(i / s_total, i % s_total))
        .collect();

    let greedy = solve_greedy(instance);
    let mut population: Vec<Individual> = Vec::with_capacity(GA_POPULATION);
    let seed_genes = flatten(&greedy.allocation);
    population.push(Individual {
        tvd: fitness(&seed_genes),
        genes: seed_genes,
    });
    while population.len() < GA_POPULATION {
        let mut genes: Vec<u32> = bounds
            .iter()
            .map(|&ub| if ub == 0 { 0 } else { rng.random_range(0..=ub) })
            .collect();
        repair(instance, &mut genes);
        population.push(Individual {
            tvd: fitness(&genes),
            genes,
        });
    }

    let best_index = |pop: &[Individual]| -> usize {
        let mut best = 0;
        for (i, ind) in pop.iter().enumerate().skip(1) {
            if ind.tvd > pop[best].tvd {
                best = i;
            }
        }
        best
    };

    let mut champion_genes = population[best_index(&population)].genes.clone();
    let mut champion_tvd = fitness(&champion_genes);

    let start = Instant::now();
    let mut generation: u32 = 0;
    loop {
        match budget {
            GaBudget::Generations(limit) => {
                if generation >= limit {
                    break;
                }
            }
            GaBudget::WallClockSecs(secs) => {
                if start.elapsed() >= Duration::from_secs_f64(secs) {
                    break;
                }
            }
        }
        generation += 1;

        let tournament = |rng: &mut ChaCha8Rng, pop: &[Individual]| -> usize {
            let mut winner = rng.random_range(0..pop.len());
            for _ in 1..GA_TOURNAMENT {
                let challenger = rng.random_range(0..pop.len());
                if pop[challenger].tvd > pop[winner].tvd {
                    winner = challenger;
                }
            }
            winner
        };

        let elite = population[best_index(&population)].genes.clone();
        let mut next: Vec<Individual> = Vec::with_capacity(GA_POPULATION);
        next.push(Individual {
            tvd: fitness(&elite),
            genes: elite,
        });
        while next.len() < GA_POPULATION {
            let pa = tournament(&mut rng, &population);
            let pb = tournament(&mut rng, &population);
            let mut child: Vec<u32> = (0..cells)
                .map(|i| {
                    if rng.random::<bool>() {
                        population[pa].genes[i]
                    } else {
                        population[pb].genes[i]
                    }
                })
                .collect();
            if rng.random::<f64>() < GA_MUTATION_PROB {
                let cell = rng.random_range(0..cells);
                if rng.random::<bool>() {
                    child[cell] = child[cell].saturating_add(1).min(bounds[cell]);
                } else {
                    child[cell] = child[cell].saturating_sub(1);
                }
            }
            repair(instance, &mut child);
            let tvd = fitness(&child);
            next.push(Individual { genes: child, tvd });
        }
        population = next;

        let gen_best = best_index(&population);
        if population[gen_best].tvd > champion_tvd {
            champion_tvd = population[gen_best].tvd;
            champion_genes = population[gen_best].genes.clone();
        }
    }

    let allocation = unflatten(&champion_genes);
    let tvd = evaluate_tvd(instance, &allocation).expect("matching shape");
    Solution { allocation, tvd }
}

/// Drops units from the lowest `C_ws / N_ws` cells of each violated
/// constraint until the genome is feasible.
fn repair(instance: &WtaInstance, genes: &mut [u32]) {
    let (w_total, s_total) = instance.shape();
    for w in 0..w_total {
        loop {
            let consumed: u64 = (0..s_total)
                .map(|s| genes[w * s_total + s] as u64 * instance.weapons[w].salvo[s] as u64)
                .sum();
            if consumed <= instance.weapons[w].inventory as u64 {
                break;
            }
            let cell = lowest_ratio_cell(instance, genes, (0..s_total).map(|s| (w, s)));
            genes[cell] -= 1;
        }
    }
    for s in 0..s_total {
        loop {
            let engaged: u64 = (0..w_total).map(|w| genes[w * s_total + s] as u64).sum();
            if engaged <= instance.targets[s].count as u64 {
                break;
            }
            let cell = lowest_ratio_cell(instance, genes, (0..w_total).map(|w| (w, s)));
            genes[cell] -= 1;
        }
    }
}

fn lowest_ratio_cell(
    instance: &WtaInstance,
    genes: &[u32],
    cells: impl Iterator<Item = (usize, usize)>,
) -> usize {
    let (_, s_total) = instance.shape();
    let mut pick: Option<(usize, f64)> = None;
    for (w, s) in cells {
        let idx = w * s_total + s;
        if genes[idx] == 0 {
            continue;
        }
        let ratio = instance.payoff[w][s] / instance.weapons[w].salvo[s] as f64;
        match pick {
            Some((_, best)) if ratio >= best => {}
            _ => pick = Some((idx, ratio)),
        }
    }
    pick.expect("a violated constraint has a positive cell").0
}
