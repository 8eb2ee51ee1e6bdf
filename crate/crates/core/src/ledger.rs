//! Internal capital accounts for ESOPs, worker cooperatives and partnerships.
//!
//! A [`FirmBook`] holds one account per member plus a non-individuated
//! collective account. Value-denominated books (cooperatives, partnerships)
//! keep `sum(balances) + collective == nav` to the cent after every event.
//! Share-denominated books (classic ESOPs) track share counts at a common
//! internal price, and their `nav` is the backing `total_shares·share_price
//! + collective`.
//!
//! Patronage, losses and ESOP principal releases are divided by labor
//! weight; share revaluations are divided by shares held. Exits pay out at
//! book value ([`ExitRule::Nav`]) or at a market value of the firm
//! ([`ExitRule::Market`]); the gap between the two is the departing
//! member's slice of goodwill.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod apportion;
pub mod events;
pub mod money;

pub use events::{EventLog, EventRecord, LedgerEvent};
pub use money::Money;

use apportion::largest_remainder;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MemberId(pub String);

impl MemberId {
    pub fn new(id: impl Into<String>) -> Self {
        MemberId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MemberId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MemberId {
    fn from(s: &str) -> Self {
        MemberId::new(s)
    }
}

/// Labor (patronage) weights by member.
pub type Weights = BTreeMap<MemberId, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denomination {
    Value,
    Shares,
}

impl Denomination {
    fn as_str(self) -> &'static str {
        match self {
            Denomination::Value => "value",
            Denomination::Shares => "shares",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberAccount {
    pub member_id: MemberId,
    /// Account value; zero on share-denominated books.
    pub balance: Money,
    /// Shares held; zero on value-denominated books.
    pub share_count: u64,
    /// Weight used in the most recent labor-based allocation.
    pub labor_weight: f64,
    pub active: bool,
}

impl MemberAccount {
    fn new(member_id: MemberId, balance: Money) -> Self {
        MemberAccount {
            member_id,
            balance,
            share_count: 0,
            labor_weight: 0.0,
            active: true,
        }
    }
}

/// How an exiting member's stake is priced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ExitRule {
    /// Book value: the account balance, or shares at the internal price.
    Nav,
    /// Pro-rata slice of a market value of the whole firm.
    Market { market_value: Money },
}

/// Conditions worth reporting that are not errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum Flag {
    NegativeBalance { member: MemberId, balance: Money },
    NegativeCollective { collective: Money },
    /// Market pricing applied to a value-denominated book. Such books should
    /// never be market-valued; the figure is a diagnostic only.
    MarketRuleOnValueBook,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevaluationReport {
    pub old_price: Money,
    pub new_price: Money,
    pub changes: BTreeMap<MemberId, Money>,
}

/// Result of applying one event.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EventOutcome {
    /// Amount paid out by an exit.
    pub payout: Option<Money>,
    /// Per-member changes produced by a share revaluation.
    pub revaluation: Option<RevaluationReport>,
    /// Flags standing on the book after the event.
    pub flags: Vec<Flag>,
}

/// Per-member and aggregate gap between market-rule and NAV-rule payouts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncentiveReport {
    pub market_value: Money,
    /// Net asset value the members' stakes are marked against.
    pub company_nav: Money,
    /// `market_value - company_nav`.
    pub goodwill: Money,
    pub nav_payouts: BTreeMap<MemberId, Money>,
    pub market_payouts: BTreeMap<MemberId, Money>,
    pub deltas: BTreeMap<MemberId, Money>,
    pub aggregate_delta: Money,
    /// Set when the book is value-denominated and the market figures are a
    /// diagnostic only.
    pub diagnostic_only: bool,
}

impl IncentiveReport {
    pub fn all_members_gain(&self) -> bool {
        !self.deltas.is_empty() && self.deltas.values().all(|d| *d > Money::ZERO)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmBook {
    pub denomination: Denomination,
    pub nav: Money,
    pub collective: Money,
    pub accounts: BTreeMap<MemberId, MemberAccount>,
    pub share_price: Money,
    pub total_shares: u64,
    pub ica_interest_rate: f64,
}

impl FirmBook {
    /// Empty value-denominated book.
    pub fn value_book(ica_interest_rate: f64) -> Result<Self> {
        Self::new(Denomination::Value, Money::ZERO, ica_interest_rate)
    }

    /// Empty share-denominated book at the given internal price.
    pub fn share_book(share_price: Money, ica_interest_rate: f64) -> Result<Self> {
        Self::new(Denomination::Shares, share_price, ica_interest_rate)
    }

    fn new(denomination: Denomination, share_price: Money, ica_interest_rate: f64) -> Result<Self> {
        if !(ica_interest_rate.is_finite() && ica_interest_rate >= 0.0) {
            return Err(Error::validation("ica_interest_rate", "must be finite and >= 0"));
        }
        if share_price.is_negative() {
            return Err(Error::validation("share_price", "must be >= 0"));
        }
        Ok(FirmBook {
            denomination,
            nav: Money::ZERO,
            collective: Money::ZERO,
            accounts: BTreeMap::new(),
            share_price,
            total_shares: 0,
            ica_interest_rate,
        })
    }

    /// Seed the collective account (and `nav` with it).
    pub fn with_collective(mut self, collective: Money) -> Self {
        self.nav += collective - self.collective;
        self.collective = collective;
        self
    }

    pub fn account(&self, id: &MemberId) -> Option<&MemberAccount> {
        self.accounts.get(id)
    }

    pub fn balance(&self, id: &MemberId) -> Option<Money> {
        self.accounts.get(id).map(|a| a.balance)
    }

    pub fn balances_total(&self) -> Money {
        self.accounts.values().map(|a| a.balance).sum()
    }

    pub fn active_members(&self) -> impl Iterator<Item = &MemberAccount> {
        self.accounts.values().filter(|a| a.active)
    }

    /// Net asset value the members' claims are measured against: `nav` for
    /// a value book, `total_shares·share_price` for a share book.
    pub fn company_nav(&self) -> Money {
        match self.denomination {
            Denomination::Value => self.nav,
            Denomination::Shares => self.share_price.times(self.total_shares),
        }
    }

    /// Check the accounting identity for this book's denomination.
    pub fn check_invariants(&self) -> Result<()> {
        match self.denomination {
            Denomination::Value => {
                let lhs = self.balances_total() + self.collective;
                if lhs != self.nav {
                    return Err(Error::validation(
                        "nav",
                        format!("balances + collective = {lhs}, nav = {}", self.nav),
                    ));
                }
            }
            Denomination::Shares => {
                let held: u64 = self.accounts.values().map(|a| a.share_count).sum();
                if held != self.total_shares {
                    return Err(Error::validation(
                        "total_shares",
                        format!("accounts hold {held}, total_shares = {}", self.total_shares),
                    ));
                }
                let backing = self.company_nav() + self.collective;
                if backing != self.nav {
                    return Err(Error::validation(
                        "nav",
                        format!("shares·price + collective = {backing}, nav = {}", self.nav),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Negative balances and a negative collective, if any.
    pub fn flags(&self) -> Vec<Flag> {
        let mut flags: Vec<Flag> = self
            .accounts
            .values()
            .filter(|a| a.balance.is_negative())
            .map(|a| Flag::NegativeBalance {
                member: a.member_id.clone(),
                balance: a.balance,
            })
            .collect();
        if self.collective.is_negative() {
            flags.push(Flag::NegativeCollective {
                collective: self.collective,
            });
        }
        flags
    }

    fn require(&self, op: &'static str, denomination: Denomination) -> Result<()> {
        if self.denomination == denomination {
            Ok(())
        } else {
            Err(Error::WrongDenomination {
                op,
                expected: denomination.as_str(),
            })
        }
    }

    fn active_account(&self, id: &MemberId) -> Result<&MemberAccount> {
        let acct = self
            .accounts
            .get(id)
            .ok_or_else(|| Error::UnknownMember(id.to_string()))?;
        if !acct.active {
            return Err(Error::InactiveMember(id.to_string()));
        }
        Ok(acct)
    }

    fn nonnegative(field: &str, amount: Money) -> Result<()> {
        if amount.is_negative() {
            Err(Error::validation(field, "must be >= 0"))
        } else {
            Ok(())
        }
    }

    /// Every weighted member must exist and be active.
    fn check_weights(&self, weights: &Weights) -> Result<()> {
        for id in weights.keys() {
            self.active_account(id)?;
        }
        Ok(())
    }

    /// Divide `amount` (>= 0) across `weights` in cents.
    fn split(&self, amount: Money, weights: &Weights) -> Result<Vec<(MemberId, Money)>> {
        self.check_weights(weights)?;
        let w: Vec<f64> = weights.values().copied().collect();
        let parts = largest_remainder(amount.cents() as u64, &w)?;
        Ok(weights
            .keys()
            .cloned()
            .zip(parts.into_iter().map(|c| Money::from_cents(c as i64)))
            .collect())
    }

    fn record_weights(&mut self, weights: &Weights) {
        for (id, w) in weights {
            if let Some(a) = self.accounts.get_mut(id) {
                a.labor_weight = *w;
            }
        }
    }

    /// Admit a member with an opening contribution.
    ///
    /// On a share-denominated book members are admitted with no shares, so
    /// the contribution must be zero.
    pub fn open_account(&mut self, id: MemberId, contribution: Money) -> Result<()> {
        if self.accounts.contains_key(&id) {
            return Err(Error::DuplicateMember(id.to_string()));
        }
        Self::nonnegative("amount", contribution)?;
        if self.denomination == Denomination::Shares && contribution != Money::ZERO {
            return Err(Error::WrongDenomination {
                op: "open_account with a contribution",
                expected: "value",
            });
        }
        self.nav += contribution;
        self.accounts
            .insert(id.clone(), MemberAccount::new(id, contribution));
        Ok(())
    }

    /// Add a further contribution to an existing active account.
    pub fn contribute(&mut self, id: &MemberId, amount: Money) -> Result<()> {
        self.require("contribution", Denomination::Value)?;
        Self::nonnegative("amount", amount)?;
        self.active_account(id)?;
        let acct = self.accounts.get_mut(id).expect("checked above");
        acct.balance += amount;
        self.nav += amount;
        Ok(())
    }

    /// Cash withdrawal from an account. Cannot overdraw.
    pub fn withdraw(&mut self, id: &MemberId, amount: Money) -> Result<()> {
        self.require("withdrawal", Denomination::Value)?;
        Self::nonnegative("amount", amount)?;
        let acct = self.active_account(id)?;
        if amount > acct.balance {
            return Err(Error::validation(
                "amount",
                format!("withdrawal {amount} exceeds balance {}", acct.balance),
            ));
        }
        self.accounts.get_mut(id).expect("checked above").balance -= amount;
        self.nav -= amount;
        Ok(())
    }

    /// Credit retained profit to the accounts in proportion to labor.
    pub fn allocate_patronage(&mut self, retained_profit: Money, weights: &Weights) -> Result<()> {
        self.require("patronage allocation", Denomination::Value)?;
        Self::nonnegative("amount", retained_profit)?;
        let parts = self.split(retained_profit, weights)?;
        for (id, part) in parts {
            self.accounts.get_mut(&id).expect("checked in split").balance += part;
        }
        self.nav += retained_profit;
        self.record_weights(weights);
        Ok(())
    }

    /// Debit a loss from the accounts in proportion to labor. Balances may
    /// go negative; they are flagged, not clamped.
    pub fn allocate_loss(&mut self, loss: Money, weights: &Weights) -> Result<()> {
        self.require("loss allocation", Denomination::Value)?;
        Self::nonnegative("amount", loss)?;
        let parts = self.split(loss, weights)?;
        for (id, part) in parts {
            self.accounts.get_mut(&id).expect("checked in split").balance -= part;
        }
        self.nav -= loss;
        self.record_weights(weights);
        Ok(())
    }

    /// Accrue interest on every account, funded from the collective account.
    /// `nav` is unchanged; the collective may go negative.
    pub fn credit_interest(&mut self) -> Result<()> {
        self.require("interest credit", Denomination::Value)?;
        let r = self.ica_interest_rate;
        let mut credited = Money::ZERO;
        let mut updates = Vec::new();
        for (id, acct) in &self.accounts {
            let interest = acct.balance.scale(r)?;
            if interest != Money::ZERO {
                updates.push((id.clone(), interest));
                credited += interest;
            }
        }
        for (id, interest) in updates {
            self.accounts.get_mut(&id).expect("iterated above").balance += interest;
        }
        self.collective -= credited;
        Ok(())
    }

    /// Release `paid_shares` into the accounts in proportion to labor. The
    /// new shares enter at the current internal price.
    pub fn esop_principal_allocation(&mut self, paid_shares: u64, weights: &Weights) -> Result<()> {
        self.require("ESOP principal allocation", Denomination::Shares)?;
        self.check_weights(weights)?;
        let w: Vec<f64> = weights.values().copied().collect();
        let parts = largest_remainder(paid_shares, &w)?;
        for (id, n) in weights.keys().zip(parts) {
            self.accounts.get_mut(id).expect("checked above").share_count += n;
        }
        self.total_shares += paid_shares;
        self.nav += self.share_price.times(paid_shares);
        self.record_weights(weights);
        Ok(())
    }

    /// Reprice every share. Each member's value changes by shares held times
    /// the price change, whatever their labor.
    pub fn revalue_shares(&mut self, new_price: Money) -> Result<RevaluationReport> {
        self.require("share revaluation", Denomination::Shares)?;
        Self::nonnegative("new_price", new_price)?;
        let old_price = self.share_price;
        let step = new_price - old_price;
        let changes = self
            .accounts
            .iter()
            .map(|(id, a)| (id.clone(), step.times(a.share_count)))
            .collect();
        self.share_price = new_price;
        self.nav += step.times(self.total_shares);
        Ok(RevaluationReport {
            old_price,
            new_price,
            changes,
        })
    }

    /// Set the internal price to `company_nav / total_shares` (to the cent)
    /// and charge the aggregate write-down, or credit the write-up, to the
    /// collective account.
    pub fn mark_to_nav(&mut self, company_nav: Money) -> Result<()> {
        self.require("mark to NAV", Denomination::Shares)?;
        Self::nonnegative("company_nav", company_nav)?;
        if self.total_shares == 0 {
            return Err(Error::validation("total_shares", "must be > 0 to mark to NAV"));
        }
        let new_price = company_nav.mul_div(1, self.total_shares as i64)?;
        let adjustment = (new_price - self.share_price).times(self.total_shares);
        self.collective += adjustment;
        self.share_price = new_price;
        self.nav = self.company_nav() + self.collective;
        Ok(())
    }

    /// What `id` would be paid on exit under `rule`, without exiting.
    pub fn quote_exit(&self, id: &MemberId, rule: ExitRule) -> Result<Money> {
        let acct = self.active_account(id)?;
        self.payout_for_stake(acct.balance, acct.share_count, rule)
    }

    /// Payout for a stake of `balance` (value books) or `shares` (share books).
    fn payout_for_stake(&self, balance: Money, shares: u64, rule: ExitRule) -> Result<Money> {
        match (self.denomination, rule) {
            (Denomination::Value, ExitRule::Nav) => Ok(balance.max(Money::ZERO)),
            (Denomination::Value, ExitRule::Market { market_value }) => {
                Self::nonnegative("market_value", market_value)?;
                if self.nav <= Money::ZERO {
                    return Err(Error::validation("nav", "must be > 0 to scale by market value"));
                }
                balance
                    .max(Money::ZERO)
                    .mul_div(market_value.cents(), self.nav.cents())
            }
            (Denomination::Shares, ExitRule::Nav) => Ok(self.share_price.times(shares)),
            (Denomination::Shares, ExitRule::Market { market_value }) => {
                Self::nonnegative("market_value", market_value)?;
                if self.total_shares == 0 {
                    return Err(Error::validation(
                        "total_shares",
                        "must be > 0 to price by market value",
                    ));
                }
                market_value.mul_div(shares as i64, self.total_shares as i64)
            }
        }
    }

    /// Pay out and deactivate a member. The account is zeroed and `nav`
    /// falls by the payout; any gap between the payout and the book value
    /// of the stake is charged to the collective account. Exited shares are
    /// retired.
    pub fn exit(&mut self, id: &MemberId, rule: ExitRule) -> Result<Money> {
        let payout = self.quote_exit(id, rule)?;
        let acct = self.accounts.get_mut(id).expect("checked by quote_exit");
        let book_value = match self.denomination {
            Denomination::Value => acct.balance,
            Denomination::Shares => self.share_price.times(acct.share_count),
        };
        self.total_shares -= acct.share_count;
        acct.share_count = 0;
        acct.balance = Money::ZERO;
        acct.active = false;
        self.nav -= payout;
        self.collective -= payout - book_value;
        Ok(payout)
    }

    /// Payouts to every active member under `rule`, computed jointly: the
    /// aggregate is rounded once and divided by largest remainder over the
    /// members' stakes, so the parts add up to the rounded aggregate.
    pub fn joint_payouts(&self, rule: ExitRule) -> Result<BTreeMap<MemberId, Money>> {
        let active: Vec<&MemberAccount> = self.active_members().collect();
        if matches!(rule, ExitRule::Nav) {
            // book value needs no rounding
            return active
                .iter()
                .map(|a| Ok((a.member_id.clone(), self.payout_for_stake(a.balance, a.share_count, rule)?)))
                .collect();
        }
        let stakes: Vec<f64> = active
            .iter()
            .map(|a| match self.denomination {
                Denomination::Value => a.balance.max(Money::ZERO).cents() as f64,
                Denomination::Shares => a.share_count as f64,
            })
            .collect();
        let aggregate = match self.denomination {
            Denomination::Value => {
                let total: Money = active.iter().map(|a| a.balance.max(Money::ZERO)).sum();
                self.payout_for_stake(total, 0, rule)?
            }
            Denomination::Shares => {
                let held: u64 = active.iter().map(|a| a.share_count).sum();
                self.payout_for_stake(Money::ZERO, held, rule)?
            }
        };
        if stakes.iter().all(|s| *s == 0.0) {
            return Ok(active
                .iter()
                .map(|a| (a.member_id.clone(), Money::ZERO))
                .collect());
        }
        let parts = largest_remainder(aggregate.cents().max(0) as u64, &stakes)?;
        Ok(active
            .iter()
            .zip(parts)
            .map(|(a, c)| (a.member_id.clone(), Money::from_cents(c as i64)))
            .collect())
    }

    /// Total the firm would owe if every active member exited under `rule`.
    pub fn repurchase_liability(&self, rule: ExitRule) -> Result<Money> {
        Ok(self.joint_payouts(rule)?.values().sum())
    }

    /// Compare market-rule and NAV-rule payouts member by member.
    pub fn sellout_incentive(&self, market_value: Money) -> Result<IncentiveReport> {
        let nav_payouts = self.joint_payouts(ExitRule::Nav)?;
        let market_payouts = self.joint_payouts(ExitRule::Market { market_value })?;
        let deltas: BTreeMap<MemberId, Money> = market_payouts
            .iter()
            .map(|(id, m)| (id.clone(), *m - nav_payouts[id]))
            .collect();
        let aggregate_delta = deltas.values().sum();
        let company_nav = self.company_nav();
        Ok(IncentiveReport {
            market_value,
            company_nav,
            goodwill: market_value - company_nav,
            nav_payouts,
            market_payouts,
            deltas,
            aggregate_delta,
            diagnostic_only: self.denomination == Denomination::Value,
        })
    }

    /// Apply one event. On error the book is left unchanged.
    pub fn apply(&mut self, event: &LedgerEvent) -> Result<EventOutcome> {
        let mut outcome = EventOutcome::default();
        let mut next = self.clone();
        match event {
            LedgerEvent::Contribution { member, amount } => {
                if next.accounts.contains_key(member) {
                    next.contribute(member, *amount)?;
                } else {
                    next.open_account(member.clone(), *amount)?;
                }
            }
            LedgerEvent::PatronageAllocation { amount, weights } => {
                next.allocate_patronage(*amount, weights)?;
            }
            LedgerEvent::LossAllocation { amount, weights } => {
                next.allocate_loss(*amount, weights)?;
            }
            LedgerEvent::InterestCredit {} => next.credit_interest()?,
            LedgerEvent::Withdrawal { member, amount } => next.withdraw(member, *amount)?,
            LedgerEvent::EsopPrincipalAllocation { shares, weights } => {
                next.esop_principal_allocation(*shares, weights)?;
            }
            LedgerEvent::ShareRevaluation { new_price } => {
                outcome.revaluation = Some(next.revalue_shares(*new_price)?);
            }
            LedgerEvent::MarkToNav { company_nav } => next.mark_to_nav(*company_nav)?,
            LedgerEvent::Exit { member, rule } => {
                outcome.payout = Some(next.exit(member, *rule)?);
                if self.denomination == Denomination::Value && matches!(rule, ExitRule::Market { .. }) {
                    outcome.flags.push(Flag::MarketRuleOnValueBook);
                }
            }
        }
        next.check_invariants()?;
        outcome.flags.extend(next.flags());
        *self = next;
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Money {
        s.parse().unwrap()
    }

    fn id(s: &str) -> MemberId {
        MemberId::new(s)
    }

    fn weights(pairs: &[(&str, f64)]) -> Weights {
        pairs.iter().map(|(k, w)| (id(k), *w)).collect()
    }

    fn coop(members: &[(&str, &str)]) -> FirmBook {
        let mut b = FirmBook::value_book(0.05).unwrap();
        for (k, amt) in members {
            b.open_account(id(k), m(amt)).unwrap();
        }
        b
    }

    #[test]
    fn open_account_examples() {
        let mut b = FirmBook::value_book(0.0).unwrap();
        b.open_account(id("m1"), m("1000")).unwrap();
        assert_eq!(b.nav, m("1000"));
        assert_eq!(b.balance(&id("m1")), Some(m("1000")));
        assert_eq!(b.collective, Money::ZERO);

        let mut b = FirmBook::value_book(0.0).unwrap().with_collective(m("500"));
        b.open_account(id("m2"), Money::ZERO).unwrap();
        assert_eq!(b.nav, m("500"));
        assert_eq!(b.balance(&id("m2")), Some(Money::ZERO));
        assert_eq!(
            b.open_account(id("m2"), m("1")),
            Err(Error::DuplicateMember("m2".into()))
        );
        b.check_invariants().unwrap();
    }

    #[test]
    fn patronage_examples() {
        let mut b = coop(&[("a", "0"), ("b", "0")]);
        b.allocate_patronage(m("110.00"), &weights(&[("a", 60.0), ("b", 40.0)]))
            .unwrap();
        assert_eq!(b.balance(&id("a")), Some(m("66.00")));
        assert_eq!(b.balance(&id("b")), Some(m("44.00")));
        assert_eq!(b.nav, m("110.00"));

        let mut b = coop(&[("a", "0"), ("b", "0"), ("c", "0")]);
        b.allocate_patronage(m("100.00"), &weights(&[("a", 1.), ("b", 1.), ("c", 1.)]))
            .unwrap();
        assert_eq!(b.balance(&id("a")), Some(m("33.34")));
        assert_eq!(b.balance(&id("b")), Some(m("33.33")));
        assert_eq!(b.balance(&id("c")), Some(m("33.33")));

        let before = b.clone();
        b.allocate_patronage(Money::ZERO, &weights(&[("a", 1.), ("b", 1.), ("c", 1.)]))
            .unwrap();
        assert_eq!(b.nav, before.nav);
        assert_eq!(b.balances_total(), before.balances_total());
    }

    #[test]
    fn patronage_errors() {
        let mut b = coop(&[("a", "0")]);
        assert_eq!(
            b.allocate_patronage(m("1"), &weights(&[("a", 0.0)])),
            Err(Error::NoActiveMembers)
        );
        assert_eq!(
            b.allocate_patronage(m("1"), &weights(&[("z", 1.0)])),
            Err(Error::UnknownMember("z".into()))
        );
        b.exit(&id("a"), ExitRule::Nav).unwrap();
        assert_eq!(
            b.allocate_patronage(m("1"), &weights(&[("a", 1.0)])),
            Err(Error::InactiveMember("a".into()))
        );
    }

    #[test]
    fn loss_examples() {
        let mut b = coop(&[("a", "100"), ("b", "100")]);
        b.allocate_loss(m("110.00"), &weights(&[("a", 60.0), ("b", 40.0)]))
            .unwrap();
        assert_eq!(b.balance(&id("a")), Some(m("34.00")));
        assert_eq!(b.balance(&id("b")), Some(m("56.00")));

        let mut b = coop(&[("a", "10"), ("b", "100")]);
        let out = b
            .apply(&LedgerEvent::LossAllocation {
                amount: m("60"),
                weights: weights(&[("a", 1.0), ("b", 1.0)]),
            })
            .unwrap();
        assert_eq!(b.balance(&id("a")), Some(m("-20.00")));
        assert!(out.flags.contains(&Flag::NegativeBalance {
            member: id("a"),
            balance: m("-20.00")
        }));
        b.check_invariants().unwrap();
    }

    #[test]
    fn interest_examples() {
        let mut b = coop(&[("a", "1000")]).with_collective(m("500"));
        let nav = b.nav;
        b.credit_interest().unwrap();
        assert_eq!(b.balance(&id("a")), Some(m("1050")));
        assert_eq!(b.collective, m("450"));
        assert_eq!(b.nav, nav);

        let mut b = coop(&[("a", "1000")]);
        b.ica_interest_rate = 0.0;
        b.credit_interest().unwrap();
        assert_eq!(b.balance(&id("a")), Some(m("1000")));

        let mut b = coop(&[("a", "100"), ("b", "100")]).with_collective(m("5"));
        let out = b.apply(&LedgerEvent::InterestCredit {}).unwrap();
        assert_eq!(b.collective, m("-5"));
        assert!(out.flags.contains(&Flag::NegativeCollective { collective: m("-5") }));
    }

    #[test]
    fn withdrawals() {
        let mut b = coop(&[("a", "100")]);
        b.withdraw(&id("a"), m("40")).unwrap();
        assert_eq!(b.balance(&id("a")), Some(m("60")));
        assert_eq!(b.nav, m("60"));
        assert!(b.withdraw(&id("a"), m("61")).is_err());
        assert_eq!(b.withdraw(&id("q"), m("1")), Err(Error::UnknownMember("q".into())));
    }

    fn esop(holdings: &[(&str, u64)], price: &str) -> FirmBook {
        let mut b = FirmBook::share_book(m(price), 0.0).unwrap();
        for (k, n) in holdings {
            b.open_account(id(k), Money::ZERO).unwrap();
            if *n > 0 {
                b.esop_principal_allocation(*n, &weights(&[(k, 1.0)])).unwrap();
            }
        }
        b
    }

    #[test]
    fn principal_allocation_examples() {
        let mut b = esop(&[("a", 0), ("b", 0)], "10");
        b.esop_principal_allocation(100, &weights(&[("a", 3.), ("b", 1.)]))
            .unwrap();
        assert_eq!(b.account(&id("a")).unwrap().share_count, 75);
        assert_eq!(b.account(&id("b")).unwrap().share_count, 25);
        assert_eq!(b.total_shares, 100);

        let mut b = esop(&[("a", 0), ("b", 0), ("c", 0)], "10");
        b.esop_principal_allocation(10, &weights(&[("a", 1.), ("b", 1.), ("c", 1.)]))
            .unwrap();
        let counts: Vec<u64> = b.accounts.values().map(|a| a.share_count).collect();
        assert_eq!(counts, vec![4, 3, 3]);

        let before = b.clone();
        b.esop_principal_allocation(0, &weights(&[("a", 1.)])).unwrap();
        assert_eq!(b.total_shares, before.total_shares);
        b.check_invariants().unwrap();
    }

    #[test]
    fn revaluation_follows_shares_not_labor() {
        let mut b = esop(&[("a", 100), ("b", 0)], "10");
        let rep = b.revalue_shares(m("12")).unwrap();
        assert_eq!(rep.changes[&id("a")], m("200"));
        assert_eq!(rep.changes[&id("b")], Money::ZERO);

        let rep = b.revalue_shares(m("12")).unwrap();
        assert!(rep.changes.values().all(|c| *c == Money::ZERO));

        let mut b = esop(&[("a", 60), ("b", 40)], "10");
        b.accounts.get_mut(&id("a")).unwrap().labor_weight = 1.0;
        b.accounts.get_mut(&id("b")).unwrap().labor_weight = 1.0;
        let rep = b.revalue_shares(m("11")).unwrap();
        assert_eq!(rep.changes[&id("a")], m("60"));
        assert_eq!(rep.changes[&id("b")], m("40"));
        b.check_invariants().unwrap();
    }

    #[test]
    fn mark_to_nav_examples() {
        let mut b = esop(&[("a", 100)], "15");
        let coll = b.collective;
        b.mark_to_nav(m("1000")).unwrap();
        assert_eq!(b.share_price, m("10"));
        assert_eq!(b.collective, coll - m("500"));
        b.check_invariants().unwrap();

        let snapshot = b.clone();
        b.mark_to_nav(m("1000")).unwrap();
        assert_eq!(b, snapshot);

        b.mark_to_nav(m("1200")).unwrap();
        assert_eq!(b.share_price, m("12"));
        assert_eq!(b.collective, coll - m("500") + m("200"));

        let mut empty = FirmBook::share_book(m("1"), 0.0).unwrap();
        assert!(empty.mark_to_nav(m("1")).is_err());
    }

    #[test]
    fn exit_examples() {
        let mut b = coop(&[("p", "1200"), ("q", "300")]);
        let paid = b.exit(&id("p"), ExitRule::Nav).unwrap();
        assert_eq!(paid, m("1200"));
        assert!(!b.account(&id("p")).unwrap().active);
        assert_eq!(b.nav, m("300"));
        b.check_invariants().unwrap();
        assert_eq!(b.exit(&id("p"), ExitRule::Nav), Err(Error::InactiveMember("p".into())));
        assert_eq!(b.exit(&id("zz"), ExitRule::Nav), Err(Error::UnknownMember("zz".into())));

        let mut b = esop(&[("a", 10), ("b", 90)], "10");
        assert_eq!(b.quote_exit(&id("a"), ExitRule::Nav).unwrap(), m("100.00"));
        let market = ExitRule::Market { market_value: m("1086.78") };
        assert_eq!(b.quote_exit(&id("a"), market).unwrap(), m("108.68"));
        let paid = b.exit(&id("a"), market).unwrap();
        assert_eq!(paid, m("108.68"));
        assert_eq!(b.total_shares, 90);
        assert_eq!(b.collective, m("-8.68"));
        b.check_invariants().unwrap();
    }

    #[test]
    fn market_rule_on_value_book_is_flagged() {
        let mut b = coop(&[("a", "600"), ("b", "400")]);
        let out = b
            .apply(&LedgerEvent::Exit {
                member: id("a"),
                rule: ExitRule::Market { market_value: m("1500") },
            })
            .unwrap();
        assert_eq!(out.payout, Some(m("900")));
        assert!(out.flags.contains(&Flag::MarketRuleOnValueBook));
        b.check_invariants().unwrap();
    }

    #[test]
    fn repurchase_liability_examples() {
        let b = esop(&[("a", 10), ("b", 90)], "10").with_collective(m("50"));
        assert_eq!(b.nav, m("1050"));
        assert_eq!(b.repurchase_liability(ExitRule::Nav).unwrap(), b.nav - b.collective);
        let market = ExitRule::Market { market_value: m("1086.78") };
        assert_eq!(b.repurchase_liability(market).unwrap(), m("1086.78"));
        let empty = FirmBook::share_book(m("10"), 0.0).unwrap();
        assert_eq!(empty.repurchase_liability(ExitRule::Nav).unwrap(), Money::ZERO);
        let empty = FirmBook::value_book(0.0).unwrap();
        assert_eq!(empty.repurchase_liability(ExitRule::Nav).unwrap(), Money::ZERO);
    }

    #[test]
    fn sellout_examples() {
        let b = esop(&[("a", 10), ("b", 90)], "10");
        let at_nav = b.sellout_incentive(m("1000")).unwrap();
        assert!(at_nav.deltas.values().all(|d| *d == Money::ZERO));

        let rep = b.sellout_incentive(m("1086.78")).unwrap();
        assert_eq!(rep.deltas[&id("a")], m("8.68"));
        assert_eq!(rep.aggregate_delta, m("86.78"));
        assert!(rep.all_members_gain());
        assert!(!rep.diagnostic_only);

        let below = b.sellout_incentive(m("900")).unwrap();
        assert!(below.deltas.values().all(|d| *d < Money::ZERO));
    }

    #[test]
    fn share_ops_rejected_on_value_book() {
        let mut b = coop(&[("a", "1")]);
        assert!(matches!(
            b.revalue_shares(m("1")),
            Err(Error::WrongDenomination { .. })
        ));
        let mut s = esop(&[("a", 1)], "1");
        assert!(matches!(
            s.allocate_patronage(m("1"), &weights(&[("a", 1.0)])),
            Err(Error::WrongDenomination { .. })
        ));
    }

    #[test]
    fn failed_event_leaves_book_untouched() {
        let mut b = coop(&[("a", "10")]);
        let before = b.clone();
        assert!(b
            .apply(&LedgerEvent::Withdrawal {
                member: id("a"),
                amount: m("11")
            })
            .is_err());
        assert_eq!(b, before);
    }
}
