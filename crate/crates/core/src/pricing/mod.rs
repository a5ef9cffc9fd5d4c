//! Black–Scholes put prices, implied volatility and Monte Carlo puts.
//!
//! Prices are normalized by spot throughout: a put with log-moneyness `k`
//! (strike `K = S e^k`) and maturity `θ` is quoted as `P / S`.

mod black_scholes;
mod implied;
mod monte_carlo;

pub use black_scholes::{bs_put, bs_vega};
pub use implied::{implied_vol, IvPoint, PutQuote, IV_MAX, IV_MIN, MAX_IV_ITERATIONS};
pub use monte_carlo::{mc_put, simulate_terminals, McParams, PathOutcome, TerminalSet, MIN_PATHS};
