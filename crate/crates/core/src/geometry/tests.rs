use super::*;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn square() -> Polytope {
    Polytope::from_vertices(&[v(&[1.0, 1.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0]), v(&[1.0, -1.0])]).unwrap()
}

fn facet_with_normal<'a>(p: &'a Polytope, h: &[f64]) -> Option<&'a Facet> {
    p.facets().iter().find(|f| (&f.normal - v(h)).amax() < 1e-9)
}

fn cube(n: usize) -> Polytope {
    Polytope::from_box(&vec![-1.0; n], &vec![1.0; n]).unwrap()
}

fn unit_simplex(n: usize) -> Polytope {
    let mut pts = vec![Vector::zeros(n)];
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        pts.push(e);
    }
    Polytope::from_vertices(&pts).unwrap()
}

#[test]
fn square_has_four_axis_facets() {
    let p = square();
    assert_eq!(p.facets().len(), 4);
    for h in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
        let f = facet_with_normal(&p, &h).expect("axis facet");
        assert_relative_eq!(f.offset, 1.0, epsilon = 1e-12);
        assert_eq!(f.vertices.len(), 2);
    }
}

#[test]
fn triangle_has_three_facets() {
    assert_eq!(unit_simplex(2).facets().len(), 3);
}

#[test]
fn rectangle_facets() {
    let p = Polytope::from_vertices(&[v(&[-2.0, -1.0]), v(&[2.0, -1.0]), v(&[2.0, 1.0]), v(&[-2.0, 1.0])]).unwrap();
    assert_relative_eq!(facet_with_normal(&p, &[1.0, 0.0]).unwrap().offset, 2.0, epsilon = 1e-12);
    assert_relative_eq!(facet_with_normal(&p, &[-1.0, 0.0]).unwrap().offset, 2.0, epsilon = 1e-12);
    assert_relative_eq!(facet_with_normal(&p, &[0.0, 1.0]).unwrap().offset, 1.0, epsilon = 1e-12);
    assert_relative_eq!(facet_with_normal(&p, &[0.0, -1.0]).unwrap().offset, 1.0, epsilon = 1e-12);
}

#[test]
fn degenerate_input_is_rejected() {
    let err = Polytope::from_vertices(&[v(&[0.0, 0.0]), v(&[1.0, 1.0]), v(&[2.0, 2.0])]).unwrap_err();
    assert!(matches!(err, Error::Dimension(_)));
    assert!(matches!(Polytope::from_vertices(&[]), Err(Error::Dimension(_))));
}

#[test]
fn redundant_points_are_dropped() {
    let p = Polytope::from_vertices(&[
        v(&[1.0, 1.0]),
        v(&[0.0, 0.0]),
        v(&[-1.0, 1.0]),
        v(&[1.0, 0.0]),
        v(&[-1.0, -1.0]),
        v(&[1.0, -1.0]),
        v(&[1.0, 1.0]),
    ])
    .unwrap();
    assert_eq!(p.vertices().len(), 4);
    assert_eq!(p.facets().len(), 4);
}

#[test]
fn tangent_cone_examples() {
    let p = square();
    let cone = p.tangent_cone(&v(&[1.0, -1.0])).unwrap();
    assert_eq!(cone.normals.len(), 2);
    assert!(cone.normals.iter().any(|h| (h - v(&[1.0, 0.0])).amax() < 1e-12));
    assert!(cone.normals.iter().any(|h| (h - v(&[0.0, -1.0])).amax() < 1e-12));
    assert!(p.tangent_cone(&p.centroid()).unwrap().is_interior());
    let mid = p.tangent_cone(&v(&[1.0, 0.0])).unwrap();
    assert_eq!(mid.normals.len(), 1);
    assert!((&mid.normals[0] - v(&[1.0, 0.0])).amax() < 1e-12);
    assert!(matches!(p.tangent_cone(&v(&[1.5, 0.0])), Err(Error::Domain(_))));
}

#[test]
fn containment_modes() {
    let b3 = cube(3);
    assert!(!b3.contains(&v(&[2.015, -0.5005, -0.0531]), Containment::Open));
    assert!(b3.contains(&b3.centroid(), Containment::Open));
    let p = square();
    assert!(p.contains(&v(&[0.9, -0.9]), Containment::Open));
    assert!(p.contains(&v(&[1.0, 0.0]), Containment::Closed));
    assert!(!p.contains(&v(&[1.0, 0.0]), Containment::Open));
    assert!(p.contains(&v(&[0.5, 0.0]), Containment::Margin(0.5)));
    assert!(!p.contains(&v(&[0.5001, 0.0]), Containment::Margin(0.5)));
    assert!(!p.contains(&v(&[0.0, 0.0, 0.0]), Containment::Closed));
}

#[test]
fn scale_examples() {
    let p = square().scale(2.5).unwrap();
    for w in p.vertices() {
        assert_relative_eq!(w.amax(), 2.5, epsilon = 1e-12);
        assert_relative_eq!(w.amin(), 2.5, epsilon = 1e-12);
    }
    assert!(p.facets().iter().all(|f| (f.offset - 2.5).abs() < 1e-12));
    assert_eq!(square().scale(1.0).unwrap(), square());
    let r = Polytope::from_vertices(&[v(&[-2.0, -1.0]), v(&[2.0, -1.0]), v(&[2.0, 1.0]), v(&[-2.0, 1.0])]).unwrap();
    let half = r.scale(0.5).unwrap();
    for w in half.vertices() {
        assert_relative_eq!(w[0].abs(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(w[1].abs(), 0.5, epsilon = 1e-12);
    }
    assert!(matches!(square().scale(0.0), Err(Error::Input(_))));
    assert!(matches!(square().scale(-1.0), Err(Error::Input(_))));
}

#[test]
fn translate_moves_offsets() {
    let p = square().translate(&v(&[2.0, 0.0]));
    assert!(p.contains(&v(&[2.9, 0.0]), Containment::Open));
    assert!(!p.contains(&v(&[0.9, 0.0]), Containment::Closed));
}

#[test]
fn simpliciality() {
    assert!(square().is_simplicial());
    let hex = hexagon();
    assert!(hex.is_simplicial());
    assert!(!cube(3).is_simplicial());
    assert!(unit_simplex(3).is_simplicial());
}

fn hexagon() -> Polytope {
    Polytope::from_vertices(&[
        v(&[1.0, 1.0]),
        v(&[-1.0, 1.0]),
        v(&[-1.0, -1.0]),
        v(&[1.0, -1.0]),
        v(&[2.25, 0.0]),
        v(&[-2.25, 0.0]),
    ])
    .unwrap()
}

#[test]
fn star_triangulation_counts_and_area() {
    let sq = square();
    let cells = sq.star_triangulate(&Vector::zeros(2)).unwrap();
    assert_eq!(cells.len(), 4);
    assert_relative_eq!(cells.iter().map(|s| s.volume()).sum::<f64>(), 4.0, epsilon = 1e-12);
    let tri = unit_simplex(3);
    assert_eq!(tri.star_triangulate(&tri.centroid()).unwrap().len(), 4);
    let hex = hexagon();
    let cells = hex.star_triangulate(&Vector::zeros(2)).unwrap();
    assert_eq!(cells.len(), 6);
    assert!(cells.iter().all(|s| s.vertices().iter().any(|w| w.amax() < 1e-15 && w.amin() < 1e-15 && w.norm() < 1e-15)));
    assert!(matches!(sq.star_triangulate(&v(&[1.0, 0.0])), Err(Error::Domain(_))));
}

#[test]
fn star_triangulation_of_cube_fans_facets() {
    let c = cube(3);
    let cells = c.star_triangulate(&Vector::zeros(3)).unwrap();
    assert_eq!(cells.len(), 12);
    assert_relative_eq!(cells.iter().map(|s| s.volume()).sum::<f64>(), 8.0, epsilon = 1e-12);
    assert_relative_eq!(c.volume(), 8.0, epsilon = 1e-12);
}

#[test]
fn affine_intersection_examples() {
    let axis = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
    let hit = square().intersects_affine_open(&Vector::zeros(2), &axis).unwrap();
    assert!(hit.intersects);
    assert!(hit.witness.norm() < 1e-9);
    let unit = Polytope::from_vertices(&[v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0]), v(&[0.0, 1.0])]).unwrap();
    let miss = unit.intersects_affine_open(&Vector::zeros(2), &axis).unwrap();
    assert!(!miss.intersects);
    assert!(miss.slack.abs() < 1e-9);
    let point = square().intersects_affine_open(&Vector::zeros(2), &Matrix::zeros(2, 0)).unwrap();
    assert!(point.intersects);
}

#[test]
fn gauge_of_square() {
    let p = square();
    assert_relative_eq!(p.gauge(&v(&[0.5, -0.25])).unwrap(), 0.5, epsilon = 1e-12);
    assert_relative_eq!(p.gauge(&Vector::zeros(2)).unwrap(), 0.0, epsilon = 1e-12);
    let shifted = p.translate(&v(&[1.0, 0.0]));
    assert!(shifted.gauge(&Vector::zeros(2)).is_err());
}

#[test]
fn simplex_barycentric() {
    let s = Simplex::new(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]);
    let l = s.barycentric(&v(&[0.25, 0.5])).unwrap();
    assert_relative_eq!(l, v(&[0.25, 0.25, 0.5]), epsilon = 1e-12);
    assert!(s.contains(&v(&[0.25, 0.5]), 0.0));
    assert!(!s.contains(&v(&[0.75, 0.5]), 1e-12));
    assert_relative_eq!(s.volume(), 0.5, epsilon = 1e-12);
}

fn sorted_facets(raw: Vec<hull::RawFacet>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = raw.into_iter().map(|f| f.incident).collect();
    out.sort();
    out
}

fn cross_polytope(n: usize) -> Vec<Vector> {
    let mut pts = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = Vector::zeros(n);
            e[i] = s;
            pts.push(e);
        }
    }
    pts
}

#[test]
fn gift_wrap_agrees_with_brute_force() {
    for n in 2..=5 {
        for pts in [cube(n).vertices().to_vec(), cross_polytope(n), unit_simplex(n).vertices().to_vec()] {
            let brute = sorted_facets(hull::enumerate_facets_brute(&pts));
            let wrap = sorted_facets(hull::enumerate_facets_wrap(&pts).unwrap());
            assert_eq!(brute, wrap, "dimension {n}");
        }
    }
}

#[test]
fn five_dimensional_cube() {
    let c = cube(5);
    assert_eq!(c.vertices().len(), 32);
    assert_eq!(c.facets().len(), 10);
    assert!(c.facets().iter().all(|f| f.vertices.len() == 16));
    assert_relative_eq!(c.volume(), 32.0, epsilon = 1e-9);
    let cp = Polytope::from_vertices(&cross_polytope(5)).unwrap();
    assert_eq!(cp.facets().len(), 32);
    assert!(cp.is_simplicial());
}

fn point_cloud(dim: usize) -> impl Strategy<Value = Vec<Vector>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), dim + 3..dim + 10)
        .prop_map(|rows| rows.into_iter().map(Vector::from_vec).collect())
}

fn in_hull(kept: &[Vector], x: &Vector) -> bool {
    let k = kept.len();
    let n = x.len();
    let mut g = Matrix::zeros(k + 2 * (n + 1), k);
    let mut b = Vector::zeros(k + 2 * (n + 1));
    for j in 0..k {
        g[(j, j)] = -1.0;
    }
    for c in 0..n {
        for j in 0..k {
            g[(k + 2 * c, j)] = kept[j][c];
            g[(k + 2 * c + 1, j)] = -kept[j][c];
        }
        b[k + 2 * c] = x[c] + 1e-9;
        b[k + 2 * c + 1] = -x[c] + 1e-9;
    }
    for j in 0..k {
        g[(k + 2 * n, j)] = 1.0;
        g[(k + 2 * n + 1, j)] = -1.0;
    }
    b[k + 2 * n] = 1.0;
    b[k + 2 * n + 1] = -1.0;
    lp_solve(&LpProblem::feasibility(g, b).unwrap()).unwrap().is_feasible()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hull_round_trip(pts in point_cloud(2)) {
        let Ok(p) = Polytope::from_vertices(&pts) else { return Ok(()) };
        for w in p.vertices() {
            prop_assert!(pts.iter().any(|q| (q - w).amax() < 1e-12));
        }
        for q in &pts {
            prop_assert!(in_hull(p.vertices(), q));
            prop_assert!(p.contains(q, Containment::Closed));
        }
        for f in p.facets() {
            prop_assert!((f.normal.norm() - 1.0).abs() < 1e-12);
            prop_assert!(f.vertices.len() >= 2);
        }
    }

    #[test]
    fn facets_match_brute_force_3d(pts in point_cloud(3)) {
        let Ok(p) = Polytope::from_vertices(&pts) else { return Ok(()) };
        let brute = sorted_facets(hull::enumerate_facets_brute(p.vertices()));
        let wrap = sorted_facets(hull::enumerate_facets_wrap(p.vertices()).unwrap());
        prop_assert_eq!(brute, wrap);
    }

    #[test]
    fn scale_round_trip(pts in point_cloud(3), lambda in 0.1f64..5.0) {
        let Ok(p) = Polytope::from_vertices(&pts) else { return Ok(()) };
        let back = p.scale(lambda).unwrap().scale(1.0 / lambda).unwrap();
        for (a, b) in p.vertices().iter().zip(back.vertices()) {
            prop_assert!((a - b).amax() < 1e-9);
        }
    }

    #[test]
    fn star_volume_matches_pulling(pts in point_cloud(3)) {
        let Ok(p) = Polytope::from_vertices(&pts) else { return Ok(()) };
        let apex = p.centroid();
        let star: f64 = p.star_triangulate(&apex).unwrap().iter().map(|s| s.volume()).sum();
        let vol = p.volume();
        prop_assert!((star - vol).abs() <= 1e-9 * vol.max(1.0));
    }

    #[test]
    fn tangent_cone_points_inward(pts in point_cloud(3)) {
        let Ok(p) = Polytope::from_vertices(&pts) else { return Ok(()) };
        for w in p.vertices() {
            let cone = p.tangent_cone(w).unwrap();
            prop_assert!(cone.normals.len() >= 3);
            for q in p.vertices() {
                prop_assert!(cone.contains(&(q - w), GEOM_TOL));
            }
        }
    }
}
