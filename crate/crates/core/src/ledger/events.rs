//! Ledger events and their line-delimited JSON log.
//!
//! One record per line: `{"seq":1,"kind":"Contribution","payload":{...}}`.
//! Records are applied in `seq` order starting from 1; replaying the same
//! log on the same opening book always yields the same book.

use serde::{Deserialize, Serialize};

use super::{EventOutcome, ExitRule, FirmBook, MemberId, Money, Weights};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", deny_unknown_fields)]
pub enum LedgerEvent {
    /// Opens the account if the member is new, otherwise adds to it.
    Contribution { member: MemberId, amount: Money },
    PatronageAllocation { amount: Money, weights: Weights },
    LossAllocation { amount: Money, weights: Weights },
    InterestCredit {},
    Withdrawal { member: MemberId, amount: Money },
    EsopPrincipalAllocation { shares: u64, weights: Weights },
    ShareRevaluation { new_price: Money },
    #[serde(rename = "MarkToNAV")]
    MarkToNav { company_nav: Money },
    Exit { member: MemberId, rule: ExitRule },
}

impl LedgerEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            LedgerEvent::Contribution { .. } => "Contribution",
            LedgerEvent::PatronageAllocation { .. } => "PatronageAllocation",
            LedgerEvent::LossAllocation { .. } => "LossAllocation",
            LedgerEvent::InterestCredit {} => "InterestCredit",
            LedgerEvent::Withdrawal { .. } => "Withdrawal",
            LedgerEvent::EsopPrincipalAllocation { .. } => "EsopPrincipalAllocation",
            LedgerEvent::ShareRevaluation { .. } => "ShareRevaluation",
            LedgerEvent::MarkToNav { .. } => "MarkToNAV",
            LedgerEvent::Exit { .. } => "Exit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    #[serde(flatten)]
    pub event: LedgerEvent,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    records: Vec<EventRecord>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number the events 1, 2, ... in order.
    pub fn from_events(events: impl IntoIterator<Item = LedgerEvent>) -> Self {
        let mut log = EventLog::new();
        for e in events {
            log.push(e);
        }
        log
    }

    pub fn push(&mut self, event: LedgerEvent) -> u64 {
        let seq = self.records.len() as u64 + 1;
        self.records.push(EventRecord { seq, event });
        seq
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("events always serialize"));
            out.push('\n');
        }
        out
    }

    /// Parse a log; blank lines are skipped, `seq` must run 1, 2, 3, ...
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: EventRecord = serde_json::from_str(line)
                .map_err(|e| Error::validation(format!("line {}", i + 1), e.to_string()))?;
            let expected = records.len() as u64 + 1;
            if rec.seq != expected {
                return Err(Error::validation(
                    format!("line {}.seq", i + 1),
                    format!("expected {expected}, got {}", rec.seq),
                ));
            }
            records.push(rec);
        }
        Ok(EventLog { records })
    }

    /// Apply every event to a copy of `opening`; stops at the first error.
    pub fn replay(&self, opening: &FirmBook) -> Result<(FirmBook, Vec<EventOutcome>)> {
        let mut book = opening.clone();
        let mut outcomes = Vec::with_capacity(self.records.len());
        for r in &self.records {
            outcomes.push(book.apply(&r.event)?);
        }
        Ok((book, outcomes))
    }
}

/// Canonical JSON snapshot of a book, used to compare replays byte for byte.
pub fn snapshot(book: &FirmBook) -> String {
    serde_json::to_string(book).expect("books always serialize")
}
