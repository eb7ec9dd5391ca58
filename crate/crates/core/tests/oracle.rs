use num_complex::Complex64;
use qshutter::oracle::{
    free_shutter_solution, initialize_shutter_state, relative_l2_error, validity_horizon, CrankNicolson, GridSpec,
    GridState,
};
use qshutter::resonances::PoleFamily;
use qshutter::transient::{IncidenceSpec, TransientSeries};
use qshutter::units::{canonical_double_barrier, wavenumber_from_energy, PotentialProfile};

const MU: f64 = 0.067;
const E_INC: f64 = 74.97;

fn run(grid: &GridSpec, profile: &PotentialProfile, k: f64) -> GridState {
    let mut s = initialize_shutter_state(grid, k);
    CrankNicolson::new(grid, profile).unwrap().advance(&mut s, grid.steps());
    s
}

#[test]
fn free_shutter_matches_exact_profile() {
    let k = wavenumber_from_energy(E_INC, MU).unwrap();
    let grid = GridSpec::snapped(-400.0, 400.0, 0.02, 0.05, 50.0, k);
    let free = PotentialProfile::free(15.0, MU).unwrap();
    let s = run(&grid, &free, k);
    assert!((s.t - 50.0).abs() < 1e-9);
    let err = relative_l2_error(&s, (-100.0, 100.0), |x| free_shutter_solution(x, k, s.t, MU)).unwrap();
    println!("free shutter L2 error {err:.3e}");
    assert!(err < 0.01, "free-particle oracle error {err}");
}

#[test]
fn time_step_convergence_is_second_order() {
    // smooth packet so every grid mode sits in the asymptotic regime of the scheme
    let profile = canonical_double_barrier();
    let base = |dt: f64| {
        let grid = GridSpec::new(-300.0, 300.0, 0.05, dt, 40.0).unwrap();
        let k0 = 0.3;
        let psi = (0..grid.nodes())
            .map(|i| {
                let x = grid.x(i) + 60.0;
                Complex64::from_polar((-x * x / 200.0).exp(), k0 * x)
            })
            .collect();
        let mut s = GridState { grid, t: 0.0, psi };
        CrankNicolson::new(&grid, &profile).unwrap().advance(&mut s, grid.steps());
        s
    };
    let reference = base(0.0125);
    let diff = |s: &GridState| {
        s.psi.iter().zip(&reference.psi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    };
    let coarse = diff(&base(0.2));
    let fine = diff(&base(0.1));
    let order = (coarse / fine).log2();
    println!("dt convergence exponent {order:.3}");
    assert!((1.8..=2.2).contains(&order), "exponent {order}");
}

#[test]
fn canonical_barrier_agrees_with_analytic_at_one_ps() {
    let profile = canonical_double_barrier();
    let family = PoleFamily::build(&profile, 10).unwrap();
    let inc = IncidenceSpec::absolute(E_INC, MU, 1).unwrap();
    let series = TransientSeries::new(&profile, &family, inc).unwrap();
    let grid = GridSpec::default_for(inc.k, 1000.0);
    let region = (0.0, profile.length() + 300.0);
    assert!(validity_horizon(&grid, E_INC, MU, region).unwrap() > grid.t_end);
    let s = run(&grid, &profile, inc.k);
    let err = relative_l2_error(&s, region, |x| series.psi(x, s.t)).unwrap();
    println!("double barrier L2 error at 1 ps {err:.3e}");
    assert!(err < 0.02, "oracle disagreement {err}");
}
