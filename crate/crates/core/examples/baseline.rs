use omnicrawl::design::variant_report;
use omnicrawl::oracle::{compare_with_lp, OracleSettings};
use omnicrawl::{PipeScenario, RobotParams};

fn main() {
    let params = RobotParams::table_i();
    let scenario = PipeScenario::new(0.075, 0.7);
    let report = variant_report(&params, &scenario).expect("geometry");
    for o in &report.outcomes {
        if let Some(s) = &o.solution {
            println!(
                "{:>20}: tau = {:?}  sum = {:.6}  max rel err = {:.3}",
                o.variant.as_str(),
                s.joint_torques,
                s.objective,
                o.max_relative_error.unwrap_or(f64::NAN)
            );
        }
    }
    let cmp = compare_with_lp(&params, &scenario, &OracleSettings::default()).expect("oracle");
    println!(
        "oracle: lp {:.6} grid {:.6} tol {:.6} agree {} ({:.2}s)",
        cmp.lp_objective, cmp.oracle_objective, cmp.tolerance, cmp.agree, cmp.elapsed_seconds
    );
}
