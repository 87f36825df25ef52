//! Shared fixtures for the benchmarks in `benches/`.

use homog_core::{ClassSpec, Schedule};

/// Max-3-XOR classes at n = 20 whose cost sets have 16, 32, 64 and 128 entries.
pub fn kxor_sizes() -> Vec<ClassSpec> {
    [15, 31, 63, 127]
        .into_iter()
        .map(|m| ClassSpec::max_kxor(20, m, 3).expect("valid class"))
        .collect()
}

pub fn fixed_schedule(p: usize) -> Schedule {
    Schedule::constant(p, 0.2, 0.3).expect("valid schedule")
}
