use descentlab::chain::{exact_joint_pmf, marginal_upper_tail, quadrant_tail};
use descentlab::limits::qsl_statistic;
use descentlab::sldp::{dependence_factor, sldp_joint, sldp_marginal, Quadrant};

fn main() {
    // QSL pilot: 10 seeds at n = 1e6
    let mut inside = 0;
    for seed in 0..10u64 {
        let stat = qsl_statistic(1_000_000, seed);
        let ok = stat.qsl_value >= 0.10 && stat.qsl_value <= 0.24;
        if ok { inside += 1; }
        println!("seed {seed}: qsl = {:.5} lil = {:.5} in-band: {ok}", stat.qsl_value, stat.lil_value);
    }
    println!("inside band: {inside}/10\n");

    // SLDP trend pilot at x = y = 0.7
    for n in [32u64, 64, 128, 256, 512] {
        let pmf = exact_joint_pmf(n as usize).unwrap();
        let exact = quadrant_tail(&pmf, 0.7, 0.7, Quadrant::UpperUpper).unwrap();
        let est = sldp_joint(n, 0.7, 0.7, Quadrant::UpperUpper).unwrap();
        let ratio = (exact.ln() - est.log_estimate).exp();
        let me = marginal_upper_tail(&pmf, 0.7).unwrap();
        let mest = sldp_marginal(n, 0.7).unwrap();
        let mratio = (me.ln() - mest.log_estimate).exp();
        println!("n={n:4}  joint ratio {:.5} |r-1|={:.4}   marginal ratio {:.5} |r-1|={:.4}",
            ratio, (ratio - 1.0f64).abs(), mratio, (mratio - 1.0f64).abs());
    }

    // dependence factor pilot at n = 512
    let pmf = exact_joint_pmf(512).unwrap();
    let pp = quadrant_tail(&pmf, 0.7, 0.7, Quadrant::UpperUpper).unwrap();
    let mp = quadrant_tail(&pmf, 0.7, 0.7, Quadrant::LowerUpper).unwrap();
    let m = marginal_upper_tail(&pmf, 0.7).unwrap();
    let ratio_pp = (pp.ln() - 2.0 * m.ln()).exp();
    let ratio_mp = (mp.ln() - 2.0 * m.ln()).exp();
    let f_pp = dependence_factor(0.7, 0.7, Quadrant::UpperUpper).unwrap();
    let f_mp = dependence_factor(0.7, 0.7, Quadrant::LowerUpper).unwrap();
    println!("\nPP/(m*m) = {ratio_pp:.4} vs factor {f_pp:.4}  rel dev {:.4}", (ratio_pp / f_pp - 1.0f64).abs());
    println!("MP/(m*m) = {ratio_mp:.6} vs factor {f_mp:.6}  rel dev {:.4}", (ratio_mp / f_mp - 1.0f64).abs());
}
