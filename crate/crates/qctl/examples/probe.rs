fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "nominal-toolkit".into());
    let report = qctl::verify::run_suite(&name).expect("known suite");
    println!("{}", report.line());
    for d in &report.details {
        println!("  {d}");
    }
}
