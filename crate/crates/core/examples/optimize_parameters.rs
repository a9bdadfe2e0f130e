//! Optimal load factors and the efficiency they buy.

use rfid_mti::analysis::{
    arrangement_cost_per_tag, ismti_efficiency, ismti_p_opt, ssmti_efficiency, ssmti_p_opt,
    ssmti_predicted_time, TimingModel,
};

fn main() -> rfid_mti::Result<()> {
    let timing = TimingModel::default();
    let p = ssmti_p_opt(&timing);
    println!(
        "serial numbers: p_opt {p:.4}, {:.3} tags/ms, {:.4} ms per tag",
        ssmti_efficiency(p, &timing)?,
        arrangement_cost_per_tag(&timing)
    );
    for n in [1_000, 10_000, 100_000] {
        println!(
            "  predicted total for N={n}: {:.1} ms",
            ssmti_predicted_time(n, 96, &timing)?
        );
    }

    println!("interactive:");
    for i in 0..=10 {
        let q = i as f64 / 10.0;
        let p = ismti_p_opt(q)?;
        println!(
            "  q={q:.1} p_opt {p:>7.4} efficiency {:.4}",
            ismti_efficiency(p, q, &timing)?
        );
    }
    Ok(())
}
