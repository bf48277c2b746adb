#![allow(clippy::needless_range_loop)]

mod common;

use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use termite_nav_core::corridor::{build_dual_grids, build_swathe};
use termite_nav_core::geometry::Point;
use termite_nav_core::grid::Grid;
use termite_nav_core::local_planner::{
    apply_soil_reading, build_polar, build_polar_raw, select_direction, update_histogram, HistogramGrid, NavState,
    PenetrometerReading, PolarHistogram, RangeScan, SoilVetoParams, VfhParams,
};
use termite_nav_core::swarm::NestMap;
use termite_nav_core::terrain::SoilCategory;

fn scan(ranges: &[(f64, f64)]) -> RangeScan {
    RangeScan {
        bearings: ranges.iter().map(|r| r.0).collect(),
        ranges: ranges.iter().map(|r| r.1).collect(),
        max_range: 8.0,
    }
}

#[test]
fn repeated_hits_saturate() {
    let params = VfhParams::default();
    let pose = Point::new(20.05, 20.05);
    let mut g = HistogramGrid::new(&params, pose);
    for _ in 0..params.c_max as usize + 5 {
        update_histogram(&mut g, pose, 0.3, &scan(&[(0.0, 3.0)]));
    }
    assert_eq!(g.certainty_at(pose.offset(0.3, 3.0)), params.c_max);
    assert_eq!(g.total_certainty(), u64::from(params.c_max));
}

#[test]
fn empty_grid_has_no_density() {
    let params = VfhParams::default();
    let g = HistogramGrid::new(&params, Point::new(5.0, 5.0));
    assert!(build_polar(&g, Point::new(5.0, 5.0), &params).densities().iter().all(|&d| d == 0.0));
}

#[test]
fn a_cell_at_the_window_edge_contributes_nothing() {
    let params = VfhParams::default();
    let pose = Point::new(20.05, 20.05);
    let mut g = HistogramGrid::new(&params, pose);
    let at = g.lattice_index(Point::new(20.05 + params.half_width, 20.05));
    for _ in 0..params.c_max {
        g.increment(at);
    }
    assert!(build_polar_raw(&g, pose, &params).densities().iter().all(|&d| d.abs() < 1e-9));
}

#[test]
fn one_cell_at_half_range_spreads_over_five_sectors() {
    let params = VfhParams::default();
    let pose = Point::new(20.05, 20.05);
    let mut g = HistogramGrid::new(&params, pose);
    let at = g.lattice_index(Point::new(20.05, 20.05 + params.half_width / 2.0));
    g.increment(at);
    g.increment(at);
    let raw = build_polar_raw(&g, pose, &params);
    let k = raw.sector_of(FRAC_PI_2);
    assert!((raw.densities()[k] - 2.0).abs() < 1e-9);
    assert!((raw.densities().iter().sum::<f64>() - 2.0).abs() < 1e-9);
    let smooth = build_polar(&g, pose, &params);
    let n = params.n_sectors;
    for off in 0..n {
        let d = smooth.densities()[(k + off) % n];
        let near = off <= 2 || off >= n - 2;
        assert!((d - if near { 0.4 } else { 0.0 }).abs() < 1e-9, "sector offset {off}: {d}");
    }
}

#[test]
fn mirrored_valleys_resolve_counterclockwise() {
    let params = VfhParams::default();
    let n = params.n_sectors;
    let mut d = vec![1e6; n];
    for k in (10..15).chain(58..63) {
        d[k] = 0.0;
    }
    let polar = PolarHistogram::from_densities(d);
    let target = polar.sector_center(0);
    let a = select_direction(&polar, target, params.threshold, &params).unwrap();
    assert_eq!(a.heading, polar.sector_center(11));
    for _ in 0..5 {
        assert_eq!(select_direction(&polar, target, params.threshold, &params).unwrap(), a);
    }

    let mut d = vec![0.0; n];
    for k in (0..6).chain(67..72) {
        d[k] = 1e6;
    }
    let polar = PolarHistogram::from_densities(d);
    let cmd = select_direction(&polar, polar.sector_center(0), params.threshold, &params).unwrap();
    assert_eq!(cmd.heading, polar.sector_center(7));
}

#[test]
fn all_blocked_is_no_free_sector() {
    let params = VfhParams::default();
    let polar = PolarHistogram::from_densities(vec![params.threshold; params.n_sectors]);
    assert!(select_direction(&polar, 1.0, params.threshold, &params).is_err());
    let free = select_direction(&PolarHistogram::zeros(params.n_sectors), 1.0, params.threshold, &params).unwrap();
    assert_eq!((free.heading, free.speed), (1.0, params.v_max));
}

fn nav_state() -> NavState {
    let t = common::terrain_from_ranks(&Grid::filled(40, 40, 10), 0.5);
    let s = build_swathe(&t, Point::new(1.0, 1.0), Point::new(19.0, 19.0), 100.0).unwrap();
    let dual = build_dual_grids(&t, &s, 0.5).unwrap();
    let mut nests = [NestMap::for_grid(dual.grid_a()), NestMap::for_grid(dual.grid_b())];
    for g in 0..2 {
        let cells: Vec<_> = dual.grids()[g].swathe_cells().collect();
        nests[g].insert_nest(cells);
    }
    NavState { dual, nests }
}

#[test]
fn soil_readings() {
    let params = SoilVetoParams::default();
    let vfh = VfhParams::default();
    let mut nav = nav_state();
    let p = Point::new(9.3, 9.7);
    let mut hist = HistogramGrid::new(&vfh, p);
    let before = nav.clone();

    let gravel = PenetrometerReading { position: p, category: SoilCategory::Gravel };
    let v = apply_soil_reading(&gravel, &mut nav, &mut hist, &params).unwrap();
    assert!(!v.vetoed && !v.replan);
    assert_eq!(nav, before);

    let rock = PenetrometerReading { position: p, category: SoilCategory::Rock };
    let v = apply_soil_reading(&rock, &mut nav, &mut hist, &params).unwrap();
    assert!(v.vetoed && v.replan && v.histogram_changed);
    assert_eq!(v.removed, 2);
    for g in 0..2 {
        let cell = nav.dual.grids()[g].cell_at(p).unwrap();
        assert!(!nav.nests[g].contains(cell));
        assert!(before.nests[g].is_superset_of(&nav.nests[g]));
    }
    assert_eq!(hist.certainty_at(p), vfh.c_max);

    let (nav_once, hist_once) = (nav.clone(), hist.clone());
    let v = apply_soil_reading(&rock, &mut nav, &mut hist, &params).unwrap();
    assert!(!v.replan && !v.histogram_changed);
    assert_eq!((nav, hist), (nav_once, hist_once));

    let outside = PenetrometerReading { position: Point::new(-1.0, 3.0), category: SoilCategory::Rock };
    assert!(apply_soil_reading(&outside, &mut nav_state(), &mut HistogramGrid::new(&vfh, p), &params).is_err());
}

proptest! {
    #[test]
    fn polar_is_additive_over_disjoint_cells(
        cells in proptest::collection::btree_map((-40i64..40, -40i64..40), (1u8..=15, any::<bool>()), 0..60),
    ) {
        let params = VfhParams::default();
        let pose = Point::new(30.05, 30.05);
        let mut a = HistogramGrid::new(&params, pose);
        let mut b = a.clone();
        let mut both = a.clone();
        let base = a.lattice_index(pose);
        for (&(dx, dy), &(c, first)) in &cells {
            let idx = (base.0 + dx, base.1 + dy);
            for _ in 0..c {
                if first { a.increment(idx); } else { b.increment(idx); }
                both.increment(idx);
            }
        }
        let (pa, pb, pboth) = (build_polar(&a, pose, &params), build_polar(&b, pose, &params), build_polar(&both, pose, &params));
        for k in 0..params.n_sectors {
            let sum = pa.densities()[k] + pb.densities()[k];
            prop_assert!((pboth.densities()[k] - sum).abs() <= 1e-9 * (1.0 + sum));
        }
    }

    #[test]
    fn speed_is_bounded(densities in proptest::collection::vec(0.0..400.0f64, 72), target in -7.0..7.0f64) {
        let params = VfhParams::default();
        let polar = PolarHistogram::from_densities(densities);
        if let Ok(cmd) = select_direction(&polar, target, params.threshold, &params) {
            prop_assert!(cmd.speed <= params.v_max && cmd.speed >= params.v_min);
            prop_assert!(polar.densities()[polar.sector_of(cmd.heading)] < params.threshold);
        }
    }

    #[test]
    fn certainty_stays_in_range(hits in proptest::collection::vec((-3.0..3.0f64, 0.0..9.0f64), 0..400)) {
        let params = VfhParams::default();
        let pose = Point::new(10.0, 10.0);
        let mut g = HistogramGrid::new(&params, pose);
        for chunk in hits.chunks(20) {
            update_histogram(&mut g, pose, 0.0, &scan(chunk));
        }
        prop_assert!(g.occupied().all(|(_, c)| (1..=params.c_max).contains(&c)));
    }
}
