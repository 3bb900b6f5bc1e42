//! Particle swarm on the 10-D sphere function; prints the trace CSV.

use automix::pso::{optimize, Evaluation, PsoConfig};
use automix::report::write_trace_csv;

fn main() -> automix::Result<()> {
    let cfg = PsoConfig {
        rng_seed: 42,
        stall_tolerance: 0.0,
        ..PsoConfig::default()
    };
    let out = optimize(
        |x| Evaluation::scalar(x.iter().map(|v| v * v).sum()),
        &[(-1.0, 1.0); 10],
        &cfg,
    )?;
    write_trace_csv(&out.trace, std::io::stdout().lock())?;
    eprintln!(
        "best f {:.3e} after {} iterations ({})",
        out.best_eval.f,
        out.trace.iterations(),
        out.trace.stop_reason
    );
    Ok(())
}
