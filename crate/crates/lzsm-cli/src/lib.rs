//! Command-line front end for the level-crossing simulator: single
//! evolutions, parameter sweeps with CSV output, and the verification
//! subcommands.

pub mod checks;
pub mod config;
pub mod output;
pub mod sweep;

/// Process exit codes: 0 success, 1 physics-bound violation, 2 usage or
/// configuration error, 3 integrator failure.
pub mod exit_code {
    pub const OK: u8 = 0;
    pub const BOUND_VIOLATION: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const INTEGRATOR: u8 = 3;
}
