use capfilm::cap::cap_for_volume;
use capfilm::foliation::check_symmetry;
use capfilm::geometry::{Tube, WireCurve};
use capfilm::mesh::{area_and_gradient, cap_mesh, column_volume_and_gradient, enclosed_volume, SolveParams, TriSurface};
use capfilm::Execution;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_tube(delta: f64) -> Tube {
    Tube::new(WireCurve::circle(1.0).unwrap(), delta).unwrap()
}

fn fd_check(mesh: &TriSurface, f: impl Fn(&TriSurface) -> (f64, Vec<capfilm::geometry::V3>)) {
    let (_, g) = f(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let interior: Vec<usize> = (0..mesh.vertex_count()).filter(|&i| !mesh.boundary_flags[i]).collect();
    let step = 1e-6;
    for _ in 0..20 {
        let i = interior[rng.random_range(0..interior.len())];
        for (axis, an) in g[i].iter().enumerate() {
            let at = |t: f64| {
                let mut m = mesh.clone();
                m.vertices[i][axis] += t;
                f(&m).0
            };
            let fd = (at(step) - at(-step)) / (2.0 * step);
            assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "vertex {i} axis {axis}: fd {fd} vs {an}");
        }
    }
}

#[test]
fn area_and_volume_gradients_match_finite_differences() {
    let tube = unit_tube(0.1);
    let cap = cap_for_volume(0.1, 0.05).unwrap();
    let mesh = cap_mesh(&tube, &cap, 0.05).unwrap();
    fd_check(&mesh, |m| area_and_gradient(m, Execution::Sequential));
    fd_check(&mesh, |m| column_volume_and_gradient(m, Execution::Sequential));
}

#[test]
fn parallel_and_sequential_gradients_agree() {
    let tube = unit_tube(0.1);
    let cap = cap_for_volume(0.1, 0.05).unwrap();
    let mesh = cap_mesh(&tube, &cap, 0.03).unwrap();
    let (a, ga) = area_and_gradient(&mesh, Execution::Sequential);
    let (b, gb) = area_and_gradient(&mesh, Execution::Parallel);
    assert!((a - b).abs() <= 1e-13 * a);
    for (x, y) in ga.iter().zip(&gb) {
        assert!((x - y).norm() <= 1e-13);
    }
}

#[test]
fn sampled_cap_encloses_half_its_volume() {
    let tube = unit_tube(0.1);
    let cap = cap_for_volume(0.1, 0.05).unwrap();
    let mut prev = f64::INFINITY;
    for h in [0.05, 0.025] {
        let mesh = cap_mesh(&tube, &cap, h).unwrap();
        let err = (enclosed_volume(&mesh, &tube).unwrap() - 0.5 * cap.volume).abs() / (0.5 * cap.volume);
        assert!(err < 2e-2, "h {h}: relative error {err}");
        assert!(err < prev);
        prev = err;
    }
}

#[test]
fn symmetric_start_stays_symmetric() {
    let tube = unit_tube(0.1);
    let params = SolveParams {
        target_edge: 0.05,
        ..Default::default()
    };
    let rep = check_symmetry(&tube, 0.05, &params, 0.0).unwrap();
    assert!(rep.asymmetry <= 1e-10, "asymmetry {}", rep.asymmetry);
    assert!(rep.ok);
}
