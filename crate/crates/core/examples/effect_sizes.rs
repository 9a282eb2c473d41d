//! Welch's t-test, Cohen's d and percent change on two small samples.
//!
//! cargo run --example effect_sizes

use crowdnav::experiment::stats::{cohens_d, welch_t};
use crowdnav::experiment::MetricComparison;

fn main() {
    let astar = [412.0, 398.5, 441.7, 405.2, 420.9];
    let csastar = [351.3, 366.0, 342.8, 371.5, 358.1];
    let m = MetricComparison::new(&astar, &csastar);
    let w = welch_t(&astar, &csastar).expect("both samples vary");
    println!("means        {:.1} vs {:.1}", m.mean_a, m.mean_b);
    println!("change       {:+.1}%", m.percent_change.unwrap_or(f64::NAN));
    println!("Welch t      {:.3} on {:.2} df, p = {:.2e} ({})", w.t, w.df, w.p, m.significance.as_str());
    println!("Cohen's d    {:.2}", cohens_d(&astar, &csastar).unwrap_or(f64::NAN));
    println!("textbook d   {{2,4}} vs {{1,3}} = {:.6}", cohens_d(&[2.0, 4.0], &[1.0, 3.0]).unwrap_or(f64::NAN));
}
