use isolab::convergence::{check_ladder, observed_orders, OrderStatus};
use isolab::experiments::poisson_constant_error;
use isolab::wente::PlaneGrid;
use isolab::Tolerances;

#[test]
fn ladders_need_three_increasing_sizes() {
    assert!(check_ladder(&[64, 128, 256]).is_ok());
    assert!(check_ladder(&[64, 128]).is_err());
    assert!(check_ladder(&[64, 64, 128]).is_err());
    assert!(check_ladder(&[128, 64, 256]).is_err());
}

#[test]
fn orders_from_synthetic_power_laws() {
    let h = [0.1, 0.05, 0.025];
    let e: Vec<f64> = h.iter().map(|h| 3.0 * h * h).collect();
    let row = observed_orders("quadratic", &h, &e).unwrap();
    assert_eq!(row.status, OrderStatus::Converging);
    assert_eq!(row.orders.len(), 2);
    for p in &row.orders {
        assert!((p - 2.0).abs() < 1e-12);
    }
    assert!(row.meets(1.5) && !row.meets(2.5));
}

#[test]
fn exact_zero_residuals_are_reported_as_exact() {
    let row = observed_orders("cylinder", &[0.1, 0.05, 0.025], &[0.0, 1e-16, 0.0]).unwrap();
    assert_eq!(row.status, OrderStatus::Exact);
    assert_eq!(row.order(), None);
    assert!(row.meets(1.5));
}

#[test]
fn non_decreasing_residuals_are_flagged() {
    let row = observed_orders("stalled", &[0.1, 0.05, 0.025], &[1e-3, 2.5e-4, 3e-4]).unwrap();
    assert_eq!(row.status, OrderStatus::NonDecreasing);
    assert!(!row.meets(0.0));
}

#[test]
fn poisson_constant_source_converges_at_second_order() {
    let ladder = [64, 128, 256];
    let tol = Tolerances::default();
    let h: Vec<f64> = ladder.iter().map(|&n| PlaneGrid::unit(n).unwrap().h()).collect();
    let e: Vec<f64> = ladder
        .iter()
        .map(|&n| poisson_constant_error(n, &tol).unwrap())
        .collect();
    let row = observed_orders("poisson", &h, &e).unwrap();
    assert_eq!(row.status, OrderStatus::Converging);
    assert!(row.orders.iter().all(|p| (p - 2.0).abs() < 0.3), "{row:?}");
}
