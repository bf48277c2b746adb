mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use termite_nav_core::grid::Grid;
use termite_nav_core::swarm::{run_swarm, step_agent, Agent, NestMap, SwarmParams};

fn sound(nests: &NestMap, ranks: &Grid<u8>, threshold: u8) -> Result<(), TestCaseError> {
    let mut seen = BTreeSet::new();
    for cells in nests.nests().values() {
        for &c in cells {
            prop_assert!(ranks[c] >= threshold);
            prop_assert!(seen.insert(c), "cell {:?} in two nests", c);
        }
        let labels = components(ranks.rows(), ranks.cols(), |c| cells.contains(&c));
        let distinct: BTreeSet<_> = labels.as_slice().iter().flatten().collect();
        prop_assert_eq!(distinct.len(), 1);
    }
    Ok(())
}

#[test]
fn nothing_qualifies_nothing_nests() {
    let grid = coarse_from(&[&[2, 3, 6], &[6, 5, 4], &[3, 3, 3]]);
    let run = run_swarm(&grid, &SwarmParams::default()).unwrap();
    assert!(run.nests.is_empty());
    assert!(run.pellets.as_slice().iter().all(|&p| p == 0));
}

#[test]
fn uniform_swathe_becomes_one_nest() {
    let ranks = Grid::filled(12, 12, 10u8);
    let grid = coarse_grid(&ranks, &Grid::filled(12, 12, true));
    let params = SwarmParams {
        max_iterations: 500 * 144 / 10,
        ..SwarmParams::default()
    };
    let run = run_swarm(&grid, &params).unwrap();
    assert_eq!(run.nests.len(), 1);
    // every cell can be a focal here, so the nest spans the whole component
    assert_eq!(run.nests.cell_count(), 144);
    assert_eq!(run, run_swarm(&grid, &params).unwrap());
}

#[test]
fn two_regions_two_nests() {
    let mut ranks = Grid::filled(10, 21, 3u8);
    for r in 1..9 {
        for c in (1..8).chain(13..20) {
            ranks[(r, c)] = 9;
        }
    }
    let grid = coarse_grid(&ranks, &Grid::filled(10, 21, true));
    let params = SwarmParams {
        max_iterations: 20_000,
        seed: 5,
        ..SwarmParams::default()
    };
    let run = run_swarm(&grid, &params).unwrap();
    let labels = components(10, 21, |c| ranks[c] >= 7);
    let hit: BTreeSet<_> = run.nests.cells().map(|c| labels[c].unwrap()).collect();
    assert_eq!(run.nests.len(), 2);
    assert_eq!(hit.len(), 2);
}

#[test]
fn pellets_never_decrease() {
    let ranks = Grid::from_fn(16, 16, |r, c| if (r / 4 + c / 4) % 2 == 0 { 9 } else { 4 });
    let grid = coarse_grid(&ranks, &Grid::filled(16, 16, true));
    let params = SwarmParams::default();
    let swathe: Vec<_> = grid.swathe_cells().collect();
    let mut agents: Vec<Agent> = (0..params.n_agents).map(|id| Agent::spawn(id, &swathe, 3)).collect();
    let mut pellets = Grid::filled(16, 16, 0u32);
    let mut nests = NestMap::for_grid(&grid);
    for _ in 0..2000 {
        for agent in &mut agents {
            let before = pellets.clone();
            step_agent(agent, &grid, &mut pellets, &mut nests, &params);
            assert!(grid.in_swathe(agent.position));
            assert!(before.as_slice().iter().zip(pellets.as_slice()).all(|(a, b)| b >= a));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nests_are_sound(
        cells in proptest::collection::vec(2u8..=10, 20 * 20),
        band in 2usize..10,
        seed: u64,
        threshold in 5u8..=9,
    ) {
        let ranks = Grid::from_vec(20, 20, cells).unwrap();
        let swathe = Grid::from_fn(20, 20, |r, _| r.abs_diff(10) <= band);
        let grid = coarse_grid(&ranks, &swathe);
        let params = SwarmParams { seed, rank_threshold: threshold, max_iterations: 1500, ..SwarmParams::default() };
        let run = run_swarm(&grid, &params).unwrap();
        sound(&run.nests, &ranks, threshold)?;
        for c in run.nests.cells() {
            prop_assert!(swathe[c]);
        }
        prop_assert_eq!(run, run_swarm(&grid, &params).unwrap());
    }
}
