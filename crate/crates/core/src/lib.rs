//! Exact digit-restricted mean values of the k-fold divisor function `τ_k`,
//! and numerical checks of the exponential-sum estimates behind their
//! asymptotics.
//!
//! * [`digits`]: base-`q` expansions, digit sums, digit-DP class counts.
//! * [`divisor`]: `τ_k` pointwise, by sieve, and its summatory function.
//! * [`expsum`]: `S_Q(α, z)`, its sup norm, its L¹ norm, and the large-sieve
//!   inequality on sampled functions.
//! * [`asymptotics`]: restricted sums, error terms and exponent fits.

pub mod asymptotics;
pub mod digits;
pub mod divisor;
pub mod expsum;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "GELFOND_TAU_THREADS";

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}
