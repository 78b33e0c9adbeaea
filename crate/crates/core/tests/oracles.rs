//! Closed-form oracles through the public API.

use morrey::grid::sample_catalog;
use morrey::norms::{morrey_norm, weak_morrey_norm};
use morrey::operators::{fractional_integral, riesz_transform};
use morrey::verify::{self, Aggregation, Member, NormPair};
use morrey::{CatalogSpec, CubePolicy, Grid, GridFunction, WeightFunction};

#[test]
fn half_order_potential_of_interval() {
    // ∫_{-R}^{R} |x−y|^{-1/2} dy = 2√(R−x) + 2√(R+x)
    let g = Grid::new(1, 2.0, 512).unwrap();
    let r = 1.0;
    let chi = sample_catalog(&CatalogSpec::IndicatorCube { center: 0.0, r }, &g).unwrap();
    let out = fractional_integral(&chi, &WeightFunction::power(0.5)).unwrap();
    for x in [-0.7, -0.3, 0.0, 0.4, 0.8] {
        let i = g.nearest(x);
        let c = g.center(i)[0];
        let want = 2.0 * (r - c).sqrt() + 2.0 * (r + c).sqrt();
        assert!((out.values()[i] / want - 1.0).abs() < 0.01, "x={c}: {} vs {want}", out.values()[i]);
    }
}

#[test]
fn hilbert_kernel_outside_support() {
    // ∫_a^b dy/(x−y) = ln|x−a| − ln|x−b| for x outside [a, b]
    let g = Grid::new(1, 8.0, 1024).unwrap();
    let (a, b) = (1.0, 3.0);
    let f = GridFunction::from_fn(g, |x| (x[0] > a && x[0] < b) as u8 as f64).unwrap();
    let rf = riesz_transform(&f, 1, g.h()).unwrap();
    for x in [-4.0, -1.0, 0.0, 5.0, 7.0] {
        let i = g.nearest(x);
        let c = g.center(i)[0];
        let want = (c - a).abs().ln() - (c - b).abs().ln();
        assert!((rf.values()[i] - want).abs() < 1e-3 * want.abs().max(0.1), "x={c}: {} vs {want}", rf.values()[i]);
    }
}

#[test]
fn indicator_norm_in_two_dimensions() {
    let g = Grid::new(2, 2.0, 64).unwrap();
    let policy = CubePolicy::dyadic(&g);
    for (phi, r0) in [(WeightFunction::power(1.0), 0.5), (WeightFunction::power(2.0), 1.0)] {
        let f = sample_catalog(&CatalogSpec::IndicatorCube { center: 0.0, r: r0 }, &g).unwrap();
        let v = morrey_norm(&f, &phi, 1.0, &policy).unwrap().value;
        assert!((v / phi.value(r0) - 1.0).abs() < 1e-12, "{phi}: {v}");
        let w = weak_morrey_norm(&f, &phi, 1.0, &policy).unwrap().value;
        assert_eq!(v, w);
    }
}

#[test]
fn ratio_csv_round_trip() {
    let g = Grid::new(1, 4.0, 128).unwrap();
    let fam: Vec<Member> = verify::function_corpus(4.0).unwrap().into_iter().map(Member::from).collect();
    let r = verify::boundedness_ratio(
        &"maximal".parse().unwrap(),
        &NormPair::same(WeightFunction::power(0.5), 1.0),
        &fam,
        Aggregation::Lu { u: 2.0, j_max: 3 },
        &g,
        1,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratios.csv");
    verify::write_csv(&r.instances, std::fs::File::create(&path).unwrap()).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    let head: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(head, ["family_id", "m_or_k", "N", "in_norm", "out_norm", "ratio"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), r.instances.len());
    for (row, inst) in rows.iter().zip(&r.instances) {
        assert_eq!(row[5].parse::<f64>().unwrap(), inst.ratio);
    }
}
