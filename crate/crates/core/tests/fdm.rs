use mbwave::analysis::{example_solution, ExampleKind};
use mbwave::data::{History, InitialData};
use mbwave::delay::{DelayOptions, DelayParams, DelayProfile};
use mbwave::error::Error;
use mbwave::fdm::{mapped_operator_residual, solve_fdm, FdmGrid, FdmProblem};
use mbwave::geometry::DomainGeometry;

#[test]
fn zero_data_stay_zero() {
    let grid = FdmGrid::new(0.5, 64, 2.0, 0.5).unwrap();
    let sol = solve_fdm(0.5, &FdmProblem::Neumann { a: 1.0 }, &InitialData::zero(), grid).unwrap();
    assert!(sol.u.iter().all(|&v| v == 0.0));
    assert!(sol.energy.iter().all(|&e| e == 0.0));
    let problem =
        FdmProblem::Delay { params: DelayParams { mu1: 1.0, mu2: 0.5, tau: 0.5, xi: 1.0 }, history: History::zero() };
    let sol = solve_fdm(0.5, &problem, &InitialData::zero(), grid).unwrap();
    assert!(sol.u.iter().all(|&v| v == 0.0));
}

#[test]
fn first_example_energy_halves_by_t_two() {
    let ex = example_solution(ExampleKind::Ex1, 0.5).unwrap();
    let grid = FdmGrid::new(0.5, 256, 2.0, 0.5).unwrap();
    let sol = solve_fdm(0.5, &FdmProblem::Neumann { a: 0.5 }, &ex.data, grid).unwrap();
    assert_eq!(*sol.times.last().unwrap(), 2.0);
    let e = *sol.energy.last().unwrap();
    assert!((e - 1.0 / 3.0).abs() < 1e-3, "E(2) = {e}");
    assert!((sol.energy[0] - 2.0 / 3.0).abs() < 1e-3);
}

#[test]
fn neumann_field_converges_at_second_order() {
    let k = 0.5;
    let ex = example_solution(ExampleKind::Ex2, k).unwrap();
    let a = ex.a;
    let errors: Vec<f64> = [64, 128, 256]
        .into_iter()
        .map(|ny| {
            let grid = FdmGrid::new(k, ny, 1.5, 0.5).unwrap();
            let sol = solve_fdm(k, &FdmProblem::Neumann { a }, &ex.data, grid).unwrap();
            sol.relative_l2_error(|x| Ok(ex.profile.f(1.5 + x) + ex.profile.f(1.5 - x))).unwrap()
        })
        .collect();
    for w in errors.windows(2) {
        assert!((w[0] / w[1]).log2() > 1.8, "{errors:?}");
    }
}

#[test]
fn delay_field_tracks_the_characteristic_solution() {
    let k = 0.5;
    let params = DelayParams { mu1: 1.5, mu2: 0.5, tau: 0.5, xi: 1.0 };
    let data = InitialData::sine(1.0, 0.5);
    let history = History::zero();
    let exact = DelayProfile::build(
        DomainGeometry::new(k).unwrap(),
        params,
        data.clone(),
        history.clone(),
        DelayOptions::default(),
    )
    .unwrap();
    let grid = FdmGrid::new(k, 256, 0.4, 0.5).unwrap();
    let sol = solve_fdm(k, &FdmProblem::Delay { params, history }, &data, grid).unwrap();
    let err = sol.relative_l2_error(|x| Ok(exact.state(x, 0.4)?.u)).unwrap();
    assert!(err < 1e-3, "{err}");
}

#[test]
fn manufactured_residual_is_second_order() {
    let r1 = mapped_operator_residual(0.5, 1e-2, 1.0).unwrap();
    let r2 = mapped_operator_residual(0.5, 5e-3, 1.0).unwrap();
    assert!((r1 / r2).log2() > 1.9, "{r1} {r2}");
}

#[test]
fn grid_and_problem_validation() {
    assert!(matches!(FdmGrid::new(0.5, 8, 1.0, 0.5), Err(Error::Config(_))));
    assert!(matches!(FdmGrid::new(0.5, 64, 1.0, 1.5), Err(Error::Config(_))));
    assert!(FdmGrid::new(1.5, 64, 1.0, 0.5).is_err());
    let grid = FdmGrid::new(0.5, 64, 1.0, 0.5).unwrap().align_to_delay(0.3);
    let steps = 0.3 / grid.dt;
    assert!((steps - steps.round()).abs() < 1e-9 && grid.cfl <= 0.5);
    let problem =
        FdmProblem::Delay { params: DelayParams { mu1: -1.0, mu2: 1.0, tau: 0.5, xi: 1.0 }, history: History::zero() };
    assert!(matches!(solve_fdm(0.5, &problem, &InitialData::zero(), grid), Err(Error::Unsupported(_))));
}
