use hypcurv_core::{DomainSpec, Grid};

#[test]
fn boundary_through_lattice_points() {
    // Edges and vertices of these domains pass exactly through lattice
    // points, where rounding decides the side.
    for (domain, h) in [
        ("polygon 1,0; 0,1; -1,0; 0,-1", 1.0 / 24.0),
        ("polygon 1,0; 0,1; -1,0; 0,-1", 0.1),
        ("superellipse a=1 b=0.8 p=4", 1.0 / 24.0),
        ("polygon -1,-0.5; 1,-0.5; 0,1", 1.0 / 24.0),
        ("ball r=1", 0.2),
    ] {
        let d: DomainSpec = domain.parse().unwrap();
        let g = Grid::new(d.clone(), h).unwrap_or_else(|e| panic!("{domain} h={h}: {e}"));
        for k in 0..g.len() {
            assert!(d.level(g.coord(k)) < 0.0, "{domain} node {k}");
        }
        for arm in g.boundary_arms() {
            assert!(d.sdf(arm.point).abs() < 1e-9, "{domain} {arm:?}");
        }
    }
}
