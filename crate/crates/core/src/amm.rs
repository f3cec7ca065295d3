//! Constant-product swap math for a two-asset pool.
//!
//! Asset A is the risky asset (e.g. WETH) and asset B the numeraire (e.g.
//! USDC). Prices are always quoted as units of B per unit of A. A swap credits
//! only `gamma = 1 - fee` of the input against the invariant, but the full
//! input stays in the pool, so `k` grows with every fee-paying trade.

use crate::error::{ensure_positive, ensure_rate, Error, Result};

/// Reserves and fee of a constant-product pool.
///
/// `PoolState` is an immutable value: swaps return a new state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolState {
    reserve_a: f64,
    reserve_b: f64,
    fee: f64,
    k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwapDirection {
    /// Trader sends B and receives A.
    BInAOut,
    /// Trader sends A and receives B.
    AInBOut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapResult {
    pub direction: SwapDirection,
    /// Units of the input asset sent to the pool, fee included.
    pub amount_in: f64,
    /// Units of the output asset paid out by the pool.
    pub amount_out: f64,
    /// `fee * amount_in`, in units of the input asset.
    pub fee_paid: f64,
    pub pool_after: PoolState,
}

impl PoolState {
    pub fn new(reserve_a: f64, reserve_b: f64, fee: f64) -> Result<Self> {
        ensure_positive("reserve_a", reserve_a)?;
        ensure_positive("reserve_b", reserve_b)?;
        ensure_rate("fee", fee)?;
        Ok(Self::from_parts(reserve_a, reserve_b, fee))
    }

    /// Opens a pool worth `total_value_b` split 50/50 by value at
    /// `initial_price`, so that the spot price starts at the market price.
    pub fn init(total_value_b: f64, initial_price: f64, fee: f64) -> Result<Self> {
        ensure_positive("total_value_b", total_value_b)?;
        ensure_positive("initial_price", initial_price)?;
        let reserve_b = total_value_b / 2.0;
        Self::new(reserve_b / initial_price, reserve_b, fee)
    }

    fn from_parts(reserve_a: f64, reserve_b: f64, fee: f64) -> Self {
        Self {
            reserve_a,
            reserve_b,
            fee,
            k: reserve_a * reserve_b,
        }
    }

    pub fn reserve_a(&self) -> f64 {
        self.reserve_a
    }

    pub fn reserve_b(&self) -> f64 {
        self.reserve_b
    }

    pub fn fee(&self) -> f64 {
        self.fee
    }

    pub fn gamma(&self) -> f64 {
        1.0 - self.fee
    }

    /// Invariant constant; equal to `reserve_a * reserve_b` after every update.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// The same pool with both reserves multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.reserve_a * factor, self.reserve_b * factor, self.fee)
    }

    /// Sends `delta_b` units of B and receives A.
    pub fn quote_b_for_a(&self, delta_b: f64) -> Result<SwapResult> {
        ensure_positive("delta_b", delta_b)?;
        let (out, reserve_b, reserve_a) = swap_out(self.reserve_b, self.reserve_a, self.gamma(), delta_b);
        self.finish(SwapDirection::BInAOut, delta_b, out, reserve_a, reserve_b)
    }

    /// Sends `delta_a` units of A and receives B.
    pub fn quote_a_for_b(&self, delta_a: f64) -> Result<SwapResult> {
        ensure_positive("delta_a", delta_a)?;
        let (out, reserve_a, reserve_b) = swap_out(self.reserve_a, self.reserve_b, self.gamma(), delta_a);
        self.finish(SwapDirection::AInBOut, delta_a, out, reserve_a, reserve_b)
    }

    fn finish(
        &self,
        direction: SwapDirection,
        amount_in: f64,
        amount_out: f64,
        reserve_a: f64,
        reserve_b: f64,
    ) -> Result<SwapResult> {
        // Underflow to a zero output or an emptied reserve can only happen for
        // absurd magnitudes; refuse rather than hand back a broken pool.
        if !(amount_out.is_finite()
            && reserve_a > 0.0
            && reserve_b > 0.0
            && reserve_a.is_finite()
            && reserve_b.is_finite())
        {
            return Err(Error::invalid(
                "swap",
                format!("input {amount_in} produces an invalid pool state"),
            ));
        }
        Ok(SwapResult {
            direction,
            amount_in,
            amount_out,
            fee_paid: self.fee * amount_in,
            pool_after: Self::from_parts(reserve_a, reserve_b, self.fee),
        })
    }

    /// Mid price of A in B, `R_B / R_A`, ignoring fees.
    pub fn spot_price(&self) -> f64 {
        self.reserve_b / self.reserve_a
    }

    /// Marginal price paid by an infinitesimal buyer of A, `(1/gamma) R_B / R_A`.
    pub fn effective_ask_price(&self) -> f64 {
        self.spot_price() / self.gamma()
    }

    /// Marginal price received by an infinitesimal seller of A, `gamma R_B / R_A`.
    pub fn effective_bid_price(&self) -> f64 {
        self.spot_price() * self.gamma()
    }

    /// Pool holdings valued in B at market price `p_m`.
    pub fn value_at(&self, p_m: f64) -> f64 {
        self.reserve_a * p_m + self.reserve_b
    }
}

/// Returns `(amount_out, new_in_reserve, new_out_reserve)`.
fn swap_out(reserve_in: f64, reserve_out: f64, gamma: f64, amount_in: f64) -> (f64, f64, f64) {
    let credited = gamma * amount_in;
    let amount_out = reserve_out * credited / (reserve_in + credited);
    // Computing the new out-reserve directly keeps it strictly positive even
    // when `amount_out` rounds to `reserve_out`.
    let new_out = reserve_out * reserve_in / (reserve_in + credited);
    (amount_out, reserve_in + amount_in, new_out)
}

pub fn init_pool(total_value_b: f64, initial_price: f64, fee: f64) -> Result<PoolState> {
    PoolState::init(total_value_b, initial_price, fee)
}

pub fn spot_price(pool: &PoolState) -> f64 {
    pool.spot_price()
}

pub fn effective_ask_price(pool: &PoolState) -> f64 {
    pool.effective_ask_price()
}

pub fn pool_value(pool: &PoolState, p_m: f64) -> f64 {
    pool.value_at(p_m)
}
