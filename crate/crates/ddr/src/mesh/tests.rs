use super::*;
use crate::scalar::rat;

fn tri(level: usize) -> Mesh {
    build_family(FamilySpec::new(Family::Triangular, 2, level)).unwrap()
}

#[test]
fn family_sizes() {
    let m = tri(0);
    assert_eq!((m.num_cells(0), m.num_cells(1), m.num_cells(2)), (4, 5, 2));
    let q = build_family(FamilySpec::new(Family::CartesianPolygonal, 2, 1)).unwrap();
    assert_eq!(q.num_cells(2), 4);
    assert!(q.cells[2].iter().all(|c| c.submesh.len() == 2 && c.verts.len() == 4));
    let k = build_family(FamilySpec::new(Family::Triangular, 3, 0)).unwrap();
    assert_eq!(k.num_cells(3), 6);
    let vol: f64 = (0..6).map(|i| k.volume(3, i)).sum();
    assert!((vol - 1.0).abs() < 1e-14);
    assert_eq!(build_family(FamilySpec::new(Family::Triangular, 3, 1)).unwrap().num_cells(3), 48);
    assert!(build_family(FamilySpec::new(Family::CartesianPolygonal, 3, 0)).is_err());
}

#[test]
fn hexagons_have_six_triangles() {
    let m = build_family(FamilySpec::new(Family::HexagonalDominant, 2, 1)).unwrap();
    let mut hexes = 0;
    for i in 0..m.num_cells(2) {
        let c = m.cell(2, i);
        assert_eq!(c.submesh.len(), c.verts.len());
        if c.verts.len() == 6 {
            hexes += 1;
            let area: f64 = c.submesh.iter().map(|s| m.simplex_volume(s)).sum();
            assert!((area - 2.0 / 16.0).abs() < 1e-14);
        }
    }
    assert!(hexes > m.num_cells(2) / 2);
    let total: f64 = (0..m.num_cells(2)).map(|i| m.volume(2, i)).sum();
    assert!((total - 1.0).abs() < 1e-13);
}

#[test]
fn fan_of_unit_square() {
    let pts = vec![vec![rint(0), rint(0)], vec![rint(1), rint(0)], vec![rint(1), rint(1)], vec![rint(0), rint(1)]];
    let m = polygonal(pts, vec![(vec![0, 1, 2, 3], SubmeshPolicy::Fan)]).unwrap();
    assert_eq!(m.simplicial_submesh(2, 0).len(), 4);
    assert_eq!(m.points[4], vec![rat(1, 2), rat(1, 2)]);
}

#[test]
fn boundary_of_boundary_and_volumes() {
    for spec in [
        FamilySpec::new(Family::Triangular, 2, 2),
        FamilySpec::new(Family::Triangular, 3, 1),
        FamilySpec::new(Family::CartesianPolygonal, 2, 2),
        FamilySpec::new(Family::HexagonalDominant, 2, 1),
    ] {
        let m = build_family(spec).unwrap();
        for d in 1..=m.n {
            for i in 0..m.num_cells(d) {
                let v = m.volume(d, i);
                assert!((v - m.volume_from_boundary(d, i)).abs() < 1e-12 * v.max(1.0), "{spec:?} ({d}, {i})");
                assert!(m.cell(d, i).h >= m.cell(d, i).submesh.iter().map(|s| m.simplex_diameter(s)).fold(0.0, f64::max) - 1e-15);
            }
        }
    }
}

#[test]
fn edge_orientation_signs() {
    let m = tri(0);
    // a counterclockwise traversal of triangle (0, 1, 3): edges oriented from low to high id
    for i in 0..m.num_cells(2) {
        let c = m.cell(2, i);
        let mut sum = vec![rint(0), rint(0)];
        for &(e, s) in &c.boundary {
            let ed = m.cell(1, e);
            let v = sub(&m.points[ed.verts[1]], &m.points[ed.verts[0]]);
            for a in 0..2 {
                sum[a] = &sum[a] + rint(s as i64) * &v[a];
            }
        }
        assert_eq!(sum, vec![rint(0), rint(0)]);
    }
    let flipped = m.with_reversed_cell(1, 0);
    let t = m.cofaces(1, 0, 2)[0];
    assert_eq!(flipped.relative_orientation(2, t, 0).unwrap(), -m.relative_orientation(2, t, 0).unwrap());
    assert!(m.relative_orientation(2, 0, 99).is_err());
}

#[test]
fn regularity_is_level_independent() {
    let r: Vec<Regularity> = (0..4)
        .map(|l| build_family(FamilySpec::new(Family::CartesianPolygonal, 2, l)).unwrap().regularity_report())
        .collect();
    for x in &r[1..] {
        assert!((x.inradius_ratio - r[0].inradius_ratio).abs() < 1e-12);
        assert!((x.diameter_ratio - r[0].diameter_ratio).abs() < 1e-12);
    }
    let eq = simplicial(
        2,
        vec![vec![rint(0), rint(0)], vec![rint(2), rint(0)], vec![rint(1), rint(1)]],
        vec![vec![0, 1, 2]],
    )
    .unwrap();
    let ratio = eq.regularity_report().inradius_ratio;
    // right isosceles triangle: r = 2A/P = sqrt 2 - 1, diameter 2
    assert!((ratio - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-14);
}

#[test]
fn json_round_trip() {
    let m = tri(1);
    let a = serde_json::to_string_pretty(&mesh_to_json(&m)).unwrap();
    let back = mesh_from_json(&serde_json::from_str(&a).unwrap()).unwrap();
    assert_eq!(back, m);
    assert_eq!(serde_json::to_string_pretty(&mesh_to_json(&back)).unwrap(), a);
    assert_eq!(back.regularity_report(), m.regularity_report());
}

#[test]
fn json_schema_paths() {
    let m = tri(0);
    let mut v = mesh_to_json(&m);
    v["cells"]["2"][0].as_object_mut().unwrap().remove("orientation");
    match mesh_from_json(&v) {
        Err(Error::Schema { path, .. }) => assert_eq!(path, "cells[2][0].orientation"),
        other => panic!("unexpected {other:?}"),
    }
    let mut v = mesh_to_json(&m);
    let s = v["cells"]["2"][1]["boundary"][0]["sign"].as_i64().unwrap();
    v["cells"]["2"][1]["boundary"][0]["sign"] = (-s).into();
    match mesh_from_json(&v) {
        Err(Error::Schema { path, .. }) => assert_eq!(path, "cells[2][1].boundary[0].sign"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn reversed_orientation_survives_json() {
    let m = tri(0).with_reversed_cell(1, 2);
    let back = mesh_from_json(&mesh_to_json(&m)).unwrap();
    assert_eq!(back, m);
}
