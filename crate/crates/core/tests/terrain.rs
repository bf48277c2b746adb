mod common;

use proptest::prelude::*;
use termite_nav_core::grid::Grid;
use termite_nav_core::terrain::{
    build_terrain_grid, gradient_goodness, soil_goodness, subsample, HeightMap, SoilCategory, TerrainParams,
};

fn band(d: i32) -> u8 {
    match d.unsigned_abs() {
        0 => 5,
        1..=66 => 4,
        67..=129 => 3,
        130..=192 => 2,
        _ => 1,
    }
}

#[test]
fn gradient_bands_partition_the_range() {
    for d in -255..=255 {
        assert_eq!(gradient_goodness(d), Ok(band(d)), "d = {d}");
        assert_eq!(gradient_goodness(d), gradient_goodness(-d));
    }
    assert!(gradient_goodness(256).is_err());
    assert!(gradient_goodness(-256).is_err());
}

#[test]
fn flat_terrains_rank_uniformly() {
    let hm = HeightMap::constant(32, 16, 77).unwrap();
    for (cat, rank) in [(SoilCategory::Gravel, 10), (SoilCategory::Rock, 6)] {
        let g = build_terrain_grid(&hm, &Grid::filled(8, 8, cat), &TerrainParams::default()).unwrap();
        assert!(g.cells().as_slice().iter().all(|c| c.rank == rank));
    }
}

#[test]
fn random_instance_matches_cellwise_recomputation() {
    // 16×16 output cells from a 64×32 image; heights follow a simple hash
    let (w, h) = (64, 32);
    let px: Vec<u8> = (0..w * h).map(|i: usize| (i.wrapping_mul(2_654_435_761) >> 7) as u8).collect();
    let hm = HeightMap::new(w, h, px).unwrap();
    let soil = Grid::from_fn(16, 16, |r, c| SoilCategory::ALL[(r * 7 + c * 3) % 5]);
    let g = build_terrain_grid(&hm, &soil, &TerrainParams::default()).unwrap();
    let heights = subsample(&hm, 4, 2).unwrap();
    for r in 0..16 {
        for c in 0..16 {
            let here = i32::from(heights[(r, c)]);
            let mut grad = 5;
            for (nr, nc) in heights.moore_neighbors(r, c) {
                grad = grad.min(band(i32::from(heights[(nr, nc)]) - here));
            }
            let cell = g.cell((r, c));
            assert_eq!(cell.gradient_goodness, grad);
            assert_eq!(cell.soil_goodness, soil_goodness(soil[(r, c)]));
            assert_eq!(cell.rank, grad + cell.soil_goodness);
        }
    }
}

proptest! {
    #[test]
    fn constant_images_subsample_to_themselves(
        w in 1usize..40, h in 1usize..40, v: u8, bw in 1usize..6, bh in 1usize..6,
    ) {
        let hm = HeightMap::constant(w, h, v).unwrap();
        let s = subsample(&hm, bw, bh).unwrap();
        prop_assert_eq!((s.rows(), s.cols()), (h.div_ceil(bh), w.div_ceil(bw)));
        prop_assert!(s.as_slice().iter().all(|&x| x == v));
    }

    #[test]
    fn ranks_stay_in_range_and_are_deterministic(
        (w, h, px) in (4usize..48, 2usize..24).prop_flat_map(|(w, h)| {
            (Just(w), Just(h), proptest::collection::vec(any::<u8>(), w * h))
        }),
        soil_seed: u64,
    ) {
        let hm = HeightMap::new(w, h, px).unwrap();
        let (rows, cols) = (h.div_ceil(2), w.div_ceil(4));
        let soil = Grid::from_fn(rows, cols, |r, c| {
            SoilCategory::ALL[((soil_seed >> ((r * cols + c) % 60)) % 5) as usize]
        });
        let a = build_terrain_grid(&hm, &soil, &TerrainParams::default()).unwrap();
        let b = build_terrain_grid(&hm, &soil, &TerrainParams::default()).unwrap();
        prop_assert_eq!(&a, &b);
        for cell in a.cells().as_slice() {
            prop_assert!((2..=10).contains(&cell.rank));
            prop_assert!((1..=5).contains(&cell.gradient_goodness));
            prop_assert!((1..=5).contains(&cell.soil_goodness));
            prop_assert_eq!(cell.rank, cell.gradient_goodness + cell.soil_goodness);
        }
    }
}
