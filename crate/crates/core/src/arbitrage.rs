//! Profit-maximizing arbitrage between the pool and an external market.
//!
//! An arbitrageur acts once the external price `p_m` leaves the band
//! `[spot * (1 - fee - tau), spot / (1 - fee - tau)]`. The optimal size comes
//! from equating the market price with the marginal cost of buying from the
//! pool, `(1/gamma) R_A R_B / (R_A - delta_a)^2`, which has the closed form
//!
//! ```text
//! delta_a* = R_A (1 - sqrt(p_amm / (gamma p_m)))
//! delta_b* = R_B (sqrt(gamma p_m / p_amm) - 1) / gamma
//! ```
//!
//! for buying A, and the mirrored expression for selling A into the pool.

use crate::amm::PoolState;
use crate::error::{ensure_positive, ensure_rate, Error, Result};

/// Divergences smaller than this relative amount are treated as rounding
/// noise. Without it a fee-free pool that sits exactly at `p_m` can trigger
/// a second, sub-ulp trade.
pub const PRICE_NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArbDirection {
    /// Pool underprices A: send B, take A out, sell A externally.
    BuyA,
    /// Pool overprices A: buy A externally, sell it into the pool for B.
    BuyB,
    None,
}

/// How the arbitrageur's transaction cost enters the trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TauMode {
    /// `tau` is charged on the external leg's notional: it widens the trigger
    /// band, reduces realized profit, and shrinks the optimal size.
    #[default]
    Subtract,
    /// `tau` only widens the trigger band; sizing and profit ignore it.
    TriggerOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArbParams {
    /// Transaction cost rate, a proxy for arbitrage competition.
    pub tau: f64,
    pub enabled: bool,
    pub tau_mode: TauMode,
}

impl Default for ArbParams {
    fn default() -> Self {
        Self {
            tau: 0.0,
            enabled: true,
            tau_mode: TauMode::Subtract,
        }
    }
}

impl ArbParams {
    pub fn with_tau(tau: f64) -> Self {
        Self { tau, ..Self::default() }
    }

    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    /// `tau` must be a rate and leave `1 - fee - tau` strictly positive.
    pub fn validate(&self, fee: f64) -> Result<()> {
        ensure_rate("tau", self.tau)?;
        if fee + self.tau >= 1.0 {
            return Err(Error::invalid(
                "tau",
                format!("fee + tau must be < 1, got {fee} + {}", self.tau),
            ));
        }
        Ok(())
    }
}

/// An arbitrage decision. All profits are in units of B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArbOutcome {
    pub direction: ArbDirection,
    /// Units of A taken out (`BuyA`) or sent in (`BuyB`).
    pub delta_a: f64,
    /// Units of B sent in (`BuyA`) or taken out (`BuyB`).
    pub delta_b: f64,
    pub gross_profit: f64,
    pub net_profit: f64,
    /// Pool fee, in units of the asset sent to the pool.
    pub fee_paid: f64,
}

impl ArbOutcome {
    pub const NONE: ArbOutcome = ArbOutcome {
        direction: ArbDirection::None,
        delta_a: 0.0,
        delta_b: 0.0,
        gross_profit: 0.0,
        net_profit: 0.0,
        fee_paid: 0.0,
    };

    pub fn executed(&self) -> bool {
        self.direction != ArbDirection::None
    }

    /// Fee paid, valued in B at market price `p_m`.
    pub fn fee_value_b(&self, p_m: f64) -> f64 {
        match self.direction {
            ArbDirection::BuyA => self.fee_paid,
            ArbDirection::BuyB => self.fee_paid * p_m,
            ArbDirection::None => 0.0,
        }
    }
}

/// Compares `p_m` against the no-arbitrage band around the fee-free spot.
pub fn detect_opportunity(pool: &PoolState, p_m: f64, params: &ArbParams) -> Result<ArbDirection> {
    ensure_positive("p_m", p_m)?;
    params.validate(pool.fee())?;
    let keep = 1.0 - pool.fee() - params.tau;
    let spot = pool.spot_price();
    if p_m > spot / keep * (1.0 + PRICE_NOISE_FLOOR) {
        Ok(ArbDirection::BuyA)
    } else if p_m * (1.0 + PRICE_NOISE_FLOOR) < spot * keep {
        Ok(ArbDirection::BuyB)
    } else {
        Ok(ArbDirection::None)
    }
}

/// Profit-maximizing `(delta_a, delta_b)` against a market price `p_m`,
/// net of the pool fee. Quantities clamp to zero when no trade in the given
/// direction is profitable.
pub fn optimal_trade(pool: &PoolState, p_m: f64, direction: ArbDirection) -> Result<(f64, f64)> {
    ensure_positive("p_m", p_m)?;
    let gamma = pool.gamma();
    let spot = pool.spot_price();
    let (ra, rb) = (pool.reserve_a(), pool.reserve_b());
    match direction {
        ArbDirection::BuyA => {
            let s = (gamma * p_m / spot).sqrt();
            if s <= 1.0 {
                return Ok((0.0, 0.0));
            }
            Ok((ra * (1.0 - 1.0 / s), rb * (s - 1.0) / gamma))
        }
        ArbDirection::BuyB => {
            let s = (gamma * spot / p_m).sqrt();
            if s <= 1.0 {
                return Ok((0.0, 0.0));
            }
            Ok((ra * (s - 1.0) / gamma, rb * (1.0 - 1.0 / s)))
        }
        ArbDirection::None => Err(Error::invalid("direction", "no trade direction given")),
    }
}

/// Runs one arbitrage check and, if profitable, the trade.
///
/// Returns the pool after the trade (or unchanged) together with the outcome.
pub fn execute_arbitrage(pool: &PoolState, p_m: f64, params: &ArbParams) -> Result<(PoolState, ArbOutcome)> {
    if !params.enabled {
        ensure_positive("p_m", p_m)?;
        return Ok((*pool, ArbOutcome::NONE));
    }
    let direction = detect_opportunity(pool, p_m, params)?;
    let charged = match params.tau_mode {
        TauMode::Subtract => params.tau,
        TauMode::TriggerOnly => 0.0,
    };
    // With tau charged on the external leg, the arbitrageur effectively sells
    // A at p_m (1 - tau) or buys it at p_m (1 + tau); the fee-only closed form
    // at that price is then the exact optimum.
    let sizing_price = match direction {
        ArbDirection::BuyA => p_m * (1.0 - charged),
        ArbDirection::BuyB => p_m * (1.0 + charged),
        ArbDirection::None => return Ok((*pool, ArbOutcome::NONE)),
    };
    let (delta_a, delta_b) = optimal_trade(pool, sizing_price, direction)?;
    if delta_a <= 0.0 || delta_b <= 0.0 {
        return Ok((*pool, ArbOutcome::NONE));
    }

    let (swap, delta_a, delta_b, gross) = match direction {
        ArbDirection::BuyA => {
            let swap = pool.quote_b_for_a(delta_b)?;
            let gross = p_m * swap.amount_out - delta_b;
            (swap, swap.amount_out, delta_b, gross)
        }
        _ => {
            let swap = pool.quote_a_for_b(delta_a)?;
            let gross = swap.amount_out - p_m * delta_a;
            (swap, delta_a, swap.amount_out, gross)
        }
    };
    let net = gross - charged * p_m * delta_a;
    if net.is_nan() || net <= 0.0 {
        return Ok((*pool, ArbOutcome::NONE));
    }
    Ok((
        swap.pool_after,
        ArbOutcome {
            direction,
            delta_a,
            delta_b,
            gross_profit: gross,
            net_profit: net,
            fee_paid: swap.fee_paid,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pool(a: f64, b: f64, fee: f64) -> PoolState {
        PoolState::new(a, b, fee).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    fn params(tau: f64) -> ArbParams {
        ArbParams::with_tau(tau)
    }

    /// Gross profit of buying `da` units of A, cost taken from the invariant.
    fn buy_a_profit(p: &PoolState, p_m: f64, da: f64) -> f64 {
        let (ra, rb) = (p.reserve_a(), p.reserve_b());
        p_m * da - (ra * rb / (ra - da) - rb) / p.gamma()
    }

    #[test]
    fn trigger_band() {
        let p = pool(50.0, 100.0, 0.003);
        assert_eq!(
            detect_opportunity(&p, 2.05, &params(0.002)).unwrap(),
            ArbDirection::BuyA
        );
        assert_eq!(detect_opportunity(&p, 2.0, &params(0.002)).unwrap(), ArbDirection::None);
        assert_eq!(
            detect_opportunity(&p, 1.98, &params(0.002)).unwrap(),
            ArbDirection::BuyB
        );
        // Band edges: 2 / 0.995 and 2 * 0.995.
        assert_eq!(
            detect_opportunity(&p, 2.0100, &params(0.002)).unwrap(),
            ArbDirection::None
        );
        assert_eq!(
            detect_opportunity(&p, 2.0101, &params(0.002)).unwrap(),
            ArbDirection::BuyA
        );
        assert_eq!(
            detect_opportunity(&p, 1.9901, &params(0.002)).unwrap(),
            ArbDirection::None
        );
        assert_eq!(
            detect_opportunity(&p, 1.9899, &params(0.002)).unwrap(),
            ArbDirection::BuyB
        );
        for fee in [0.0, 0.003, 0.3] {
            assert_eq!(
                detect_opportunity(&pool(50.0, 100.0, fee), 2.0, &params(0.01)).unwrap(),
                ArbDirection::None
            );
        }
    }

    #[test]
    fn trigger_rejects_invalid_costs() {
        let p = pool(50.0, 100.0, 0.5);
        assert!(detect_opportunity(&p, 2.0, &params(0.5)).is_err());
        assert!(detect_opportunity(&p, 2.0, &params(-0.1)).is_err());
        assert!(detect_opportunity(&p, 0.0, &params(0.0)).is_err());
        assert!(execute_arbitrage(&p, 2.0, &params(0.6)).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let (da, db) = optimal_trade(&pool(50.0, 100.0, 0.0), 8.0, ArbDirection::BuyA).unwrap();
        assert!(close(da, 25.0, 1e-14) && close(db, 100.0, 1e-14));
        assert!(close(8.0 * da - db, 100.0, 1e-14));

        let (da, db) = optimal_trade(&pool(50.0, 100.0, 0.0), 2.0, ArbDirection::BuyA).unwrap();
        assert_eq!((da, db), (0.0, 0.0));

        let (da, db) = optimal_trade(&pool(50.0, 100.0, 0.5), 16.0, ArbDirection::BuyA).unwrap();
        assert!(close(da, 25.0, 1e-14) && close(db, 200.0, 1e-14));
        assert!(close((50.0 - da) * (100.0 + 0.5 * db), 5000.0, 1e-14));

        assert!(optimal_trade(&pool(50.0, 100.0, 0.0), 2.0, ArbDirection::None).is_err());
    }

    #[test]
    fn mirrored_closed_form() {
        // Selling A into a pool priced at 8 when the market says 2 takes it
        // back to (50, 100), the reverse of the buy example.
        let (da, db) = optimal_trade(&pool(25.0, 200.0, 0.0), 2.0, ArbDirection::BuyB).unwrap();
        assert!(close(da, 25.0, 1e-14) && close(db, 100.0, 1e-14));
        let (da, db) = optimal_trade(&pool(25.0, 200.0, 0.0), 9.0, ArbDirection::BuyB).unwrap();
        assert_eq!((da, db), (0.0, 0.0));
    }

    #[test]
    fn execution_examples() {
        let p = pool(50.0, 100.0, 0.0);
        let (after, out) = execute_arbitrage(&p, 8.0, &params(0.0)).unwrap();
        assert_eq!(out.direction, ArbDirection::BuyA);
        assert!(close(after.reserve_a(), 25.0, 1e-14));
        assert!(close(after.reserve_b(), 200.0, 1e-14));
        assert!(close(after.spot_price(), 8.0, 1e-14));
        assert!(close(out.gross_profit, 100.0, 1e-12));
        assert_eq!(out.gross_profit, out.net_profit);

        let (after, out) = execute_arbitrage(&p, 2.0, &params(0.01)).unwrap();
        assert_eq!(after, p);
        assert!(!out.executed());

        let p = pool(50.0, 100.0, 0.003);
        let (after, out) = execute_arbitrage(&p, 2.005, &params(0.002)).unwrap();
        assert_eq!(after, p);
        assert_eq!(out, ArbOutcome::NONE);
    }

    #[test]
    fn disabled_arbitrage_is_inert() {
        let p = pool(50.0, 100.0, 0.0);
        let (after, out) = execute_arbitrage(&p, 8.0, &ArbParams::disabled()).unwrap();
        assert_eq!(after, p);
        assert!(!out.executed());
    }

    #[test]
    fn tau_reduces_profit_and_size() {
        let p = pool(50.0, 100.0, 0.003);
        let (_, free) = execute_arbitrage(&p, 3.0, &params(0.0)).unwrap();
        let (_, costly) = execute_arbitrage(&p, 3.0, &params(0.02)).unwrap();
        assert!(costly.delta_a < free.delta_a);
        assert!(costly.net_profit < costly.gross_profit);
        assert!(close(
            costly.gross_profit - costly.net_profit,
            0.02 * 3.0 * costly.delta_a,
            1e-12
        ));

        let trigger_only = ArbParams {
            tau_mode: TauMode::TriggerOnly,
            ..params(0.02)
        };
        let (_, out) = execute_arbitrage(&p, 3.0, &trigger_only).unwrap();
        assert!(close(out.delta_a, free.delta_a, 1e-14));
        assert_eq!(out.gross_profit, out.net_profit);
    }

    #[test]
    fn just_outside_the_band_still_trades_profitably() {
        // Marginal profitability of the first unit is what the trigger tests;
        // sizing at the tau-adjusted price keeps the realized net positive.
        let p = pool(1e4, 2e4, 0.003);
        let edge = 2.0 / (1.0 - 0.003 - 0.02);
        let (after, out) = execute_arbitrage(&p, edge * 1.0001, &params(0.02)).unwrap();
        assert_eq!(out.direction, ArbDirection::BuyA);
        assert!(out.net_profit > 0.0);
        assert_eq!(
            detect_opportunity(&after, edge * 1.0001, &params(0.02)).unwrap(),
            ArbDirection::None
        );
    }

    #[test]
    fn fee_value_follows_input_asset() {
        let p = pool(50.0, 100.0, 0.01);
        let (_, buy_a) = execute_arbitrage(&p, 4.0, &params(0.0)).unwrap();
        assert_eq!(buy_a.fee_value_b(4.0), buy_a.fee_paid);
        let (_, buy_b) = execute_arbitrage(&p, 1.0, &params(0.0)).unwrap();
        assert_eq!(buy_b.direction, ArbDirection::BuyB);
        assert_eq!(buy_b.fee_value_b(1.0), buy_b.fee_paid);
        assert!(close(buy_b.fee_paid, 0.01 * buy_b.delta_a, 1e-15));
    }

    fn instance() -> impl Strategy<Value = (PoolState, f64)> {
        (
            2f64..8.0,
            2f64..8.0,
            -1f64..1.0,
            prop_oneof![Just(0.0), Just(0.003), Just(0.01)],
        )
            .prop_map(|(la, lb, lm, fee)| {
                let p = pool(10f64.powf(la), 10f64.powf(lb), fee);
                let p_m = p.spot_price() * 10f64.powf(lm);
                (p, p_m)
            })
    }

    proptest! {
        #[test]
        fn beats_a_coarse_grid((p, p_m) in instance()) {
            let (da, _) = optimal_trade(&p, p_m, ArbDirection::BuyA).unwrap();
            let best = buy_a_profit(&p, p_m, da);
            let scale = p_m * p.reserve_a();
            for i in 0..500 {
                let x = p.reserve_a() * i as f64 / 500.0;
                prop_assert!(best >= buy_a_profit(&p, p_m, x) - 1e-12 * scale);
            }
        }

        #[test]
        fn marginal_revenue_equals_marginal_cost((p, p_m) in instance()) {
            let (da, _) = optimal_trade(&p, p_m, ArbDirection::BuyA).unwrap();
            prop_assume!(da > 0.0);
            let (ra, rb) = (p.reserve_a(), p.reserve_b());
            let mc = ra * rb / ((ra - da) * (ra - da)) / p.gamma();
            prop_assert!(close(mc, p_m, 1e-9));
        }

        #[test]
        fn second_pass_is_a_no_op((p, p_m) in instance(), tau in prop_oneof![Just(0.0), 0.0f64..0.05]) {
            let params = params(tau);
            let (once, _) = execute_arbitrage(&p, p_m, &params).unwrap();
            let (twice, out) = execute_arbitrage(&once, p_m, &params).unwrap();
            prop_assert_eq!(once, twice);
            prop_assert!(!out.executed());
        }

        #[test]
        fn executed_trades_are_profitable((p, p_m) in instance(), tau in 0.0f64..0.05) {
            let (_, out) = execute_arbitrage(&p, p_m, &params(tau)).unwrap();
            if out.executed() {
                prop_assert!(out.net_profit > 0.0);
            }
        }

        #[test]
        fn fee_free_arbitrage_lands_on_market_price(la in 2f64..8.0, lb in 2f64..8.0, lm in -1f64..1.0) {
            let p = pool(10f64.powf(la), 10f64.powf(lb), 0.0);
            let p_m = p.spot_price() * 10f64.powf(lm);
            let (after, _) = execute_arbitrage(&p, p_m, &params(0.0)).unwrap();
            prop_assert!(close(after.spot_price(), p_m, 1e-9));
        }

        #[test]
        fn spot_ends_inside_band((p, p_m) in instance(), tau in 0.0f64..0.05) {
            let (after, _) = execute_arbitrage(&p, p_m, &params(tau)).unwrap();
            let keep = 1.0 - p.fee() - tau;
            let spot = after.spot_price();
            prop_assert!(spot >= p_m * keep * (1.0 - 1e-9));
            prop_assert!(spot <= p_m / keep * (1.0 + 1e-9));
        }

        #[test]
        fn scale_covariance((p, p_m) in instance(), lambda in 0.01f64..100.0) {
            let q = p.scaled(lambda).unwrap();
            for dir in [ArbDirection::BuyA, ArbDirection::BuyB] {
                let (a1, b1) = optimal_trade(&p, p_m, dir).unwrap();
                let (a2, b2) = optimal_trade(&q, p_m, dir).unwrap();
                prop_assert!(close(a2, lambda * a1, 1e-9) && close(b2, lambda * b1, 1e-9));
            }
            let (p1, _) = execute_arbitrage(&p, p_m, &params(0.0)).unwrap();
            let (q1, _) = execute_arbitrage(&q, p_m, &params(0.0)).unwrap();
            prop_assert!(close(p1.spot_price(), q1.spot_price(), 1e-9));
        }
    }
}
