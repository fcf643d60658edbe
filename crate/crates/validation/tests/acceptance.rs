use nilfourier_validation::{run, CRITERIA};

fn main() {
    let mut failed = Vec::new();
    for (id, name, budget, check) in CRITERIA {
        let o = run(id, name, budget, check);
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict}: {} [{:.2}s of {}s] {}",
            o.id,
            o.name,
            o.elapsed.as_secs_f64(),
            o.budget.as_secs(),
            o.detail
        );
        if !o.passed {
            failed.push(o.id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
