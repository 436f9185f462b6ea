use pcs_barrier::harness::{run_convergence_table, Experiment, TableRow};
use pcs_barrier::models::Model1D;
use pcs_barrier::symmetry::BarrierContract;

fn bs_table(vol: f64, rate: f64) -> Vec<TableRow<f64>> {
    let exp = Experiment::new(
        Model1D::black_scholes(100.0, rate, vol).unwrap().into(),
        BarrierContract::down_and_out(95.0, 90.0, 1.0),
    );
    run_convergence_table(&exp).unwrap()
}

#[test]
fn symmetrization_beats_pathwise_from_thirty_steps() {
    for (vol, rate) in [(0.2, 0.0), (0.2, 0.02), (0.5, 0.0), (0.5, 0.02)] {
        let rows = bs_table(vol, rate);
        assert_eq!(rows.len(), 10);
        assert_eq!((rows[0].trials, rows[0].steps), (1_000, 10));
        assert_eq!((rows[9].trials, rows[9].steps), (1_000_000, 100));
        for r in rows.iter().filter(|r| r.steps >= 30) {
            assert!(
                r.pcm_err_pct < r.em_err_pct,
                "sigma={vol} r={rate} n={}: pcm {} em {}",
                r.steps,
                r.pcm_err_pct,
                r.em_err_pct
            );
        }
        if vol == 0.5 {
            assert!(rows[9].em_err_pct < rows[0].em_err_pct);
        }
    }
}
