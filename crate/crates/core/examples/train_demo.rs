//! Train the three heads on the synthetic covariance task.
//!
//! cargo run --release --example train_demo [seed]

use isqrt_cov::train::{generate_task, train, Head, TaskConfig, TrainConfig};

fn main() -> isqrt_cov::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(3, |s| s.parse().expect("seed"));
    let task = generate_task(&TaskConfig {
        seed,
        ..TaskConfig::default()
    })?;
    println!(
        "{} classes, {} train / {} test samples of {} × {} features",
        task.classes(),
        task.train.len(),
        task.test.len(),
        task.config.n,
        task.p()
    );
    for head in [Head::Isqrt, Head::Plain, Head::Avg] {
        let out = train(&task, &TrainConfig { head, seed, ..TrainConfig::default() })?;
        let last = out.final_log();
        let reach90 = out.log.iter().find(|l| l.test_acc >= 0.9).map(|l| l.epoch);
        println!(
            "{head:>5}: final train loss {:.3e}, train acc {:.3}, test acc {:.3}, first epoch with test acc ≥ 0.9: {}",
            last.train_loss,
            last.train_acc,
            last.test_acc,
            reach90.map_or_else(|| "-".to_string(), |e| e.to_string())
        );
    }
    Ok(())
}
