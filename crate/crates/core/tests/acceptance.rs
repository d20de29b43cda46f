use gffi_core::acceptance::{AcceptanceConfig, Runner, IDS};
use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let mut runner = Runner::new(AcceptanceConfig::default());
    // GFFI_ACCEPT_ONLY=3,5 restricts the run to those criteria
    let only: Option<Vec<u8>> =
        std::env::var("GFFI_ACCEPT_ONLY").ok().map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let ids: Vec<u8> = IDS.into_iter().filter(|i| only.as_ref().is_none_or(|o| o.contains(i))).collect();
    let mut failed = 0;
    for &id in &ids {
        let start = Instant::now();
        let (status, title, summary) = match runner.run(id) {
            Ok(o) => (if o.pass { "PASS" } else { "FAIL" }, o.title, o.summary),
            Err(e) => ("FAIL", gffi_core::acceptance::title(id), format!("error: {e}")),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} criterion {id:>2} ({title}): {summary} [{:.1}s]", start.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", ids.len() - failed, ids.len());
    // GFFI_ACCEPT_STRICT=1 turns any FAIL line into a failing exit status
    let strict = std::env::var("GFFI_ACCEPT_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
