//! Scenario files and the runs behind the `coopval` binary.
//!
//! A scenario is a TOML document with a `kind` discriminator and a
//! `schema_version`. Unknown fields are rejected. Every parameter in effect,
//! including defaults and command-line overrides, is echoed into the report
//! header.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::asset_model::{self, AssetSpec};
use crate::error::Error as EngineError;
use crate::fincore::{annuity_pv, Rate};
use crate::ledger::events::snapshot;
use crate::ledger::{Denomination, EventLog, ExitRule, FirmBook, LedgerEvent, Money};
use crate::mm_engine::random::FuzzRanges;
use crate::mm_engine::{FirmPrimitives, FirmTrajectory, TerminalCondition};

pub mod fuzz;
pub mod report;

pub use fuzz::{fuzz_equivalence, FuzzCase, FuzzSummary};
pub use report::{col, Cell, Column, Format, Report, Table};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Failures that stop a run before a report is produced.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl ScenarioError {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioError::Io { .. } => "IoError",
            ScenarioError::Parse(_) => "ParseError",
            ScenarioError::Engine(e) => e.kind(),
        }
    }

    /// Field path for validation errors.
    pub fn path(&self) -> Option<&str> {
        match self {
            ScenarioError::Engine(EngineError::Validation { path, .. }) => Some(path),
            _ => None,
        }
    }

    /// One-line JSON description for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "path": self.path(),
        })
        .to_string()
    }
}

pub type ScenarioResult<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Asset,
    MmTrajectory,
    MmFuzz,
    Ledger,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Asset => "asset",
            ScenarioKind::MmTrajectory => "mm_trajectory",
            ScenarioKind::MmFuzz => "mm_fuzz",
            ScenarioKind::Ledger => "ledger",
        }
    }

    fn tables(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::Asset => &["asset_valuation"],
            ScenarioKind::MmTrajectory => &["trajectory", "equivalence", "telescoping"],
            ScenarioKind::MmFuzz => &["fuzz_summary", "fuzz_cases", "fuzz_failures"],
            ScenarioKind::Ledger => &["ledger_trace", "accounts", "sellout", "repurchase"],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSelection {
    /// Tables to emit; all tables of the scenario kind when absent.
    #[serde(default)]
    pub tables: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetScenario {
    pub schema_version: u32,
    pub kind: ScenarioKind,
    pub rate: f64,
    pub asset: AssetSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub output: OutputSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryScenario {
    pub schema_version: u32,
    pub kind: ScenarioKind,
    pub firm: FirmPrimitives,
    #[serde(default)]
    pub terminal: TerminalCondition,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub output: OutputSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzScenario {
    pub schema_version: u32,
    pub kind: ScenarioKind,
    pub count: u64,
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub ranges: FuzzRanges,
    #[serde(default)]
    pub output: OutputSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BookSpec {
    pub denomination: Denomination,
    #[serde(default)]
    pub ica_interest_rate: f64,
    #[serde(default)]
    pub share_price: Money,
    #[serde(default)]
    pub collective: Money,
}

impl BookSpec {
    pub fn open(&self) -> Result<FirmBook, EngineError> {
        let book = match self.denomination {
            Denomination::Value => {
                if self.share_price != Money::ZERO {
                    return Err(EngineError::validation(
                        "book.share_price",
                        "only meaningful for share-denominated books",
                    ));
                }
                FirmBook::value_book(self.ica_interest_rate)?
            }
            Denomination::Shares => FirmBook::share_book(self.share_price, self.ica_interest_rate)?,
        };
        Ok(book.with_collective(self.collective))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerAnalysis {
    /// Market value of the whole firm for the sellout and repurchase tables.
    pub market_value: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerScenario {
    pub schema_version: u32,
    pub kind: ScenarioKind,
    pub book: BookSpec,
    #[serde(default)]
    pub events: Vec<LedgerEvent>,
    #[serde(default)]
    pub analysis: Option<LedgerAnalysis>,
    #[serde(default)]
    pub output: OutputSelection,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Asset(AssetScenario),
    MmTrajectory(TrajectoryScenario),
    MmFuzz(FuzzScenario),
    Ledger(LedgerScenario),
}

#[derive(Deserialize)]
struct Envelope {
    schema_version: Option<toml::Value>,
    kind: Option<toml::Value>,
}

impl Scenario {
    pub fn parse(text: &str) -> ScenarioResult<Self> {
        let env: Envelope = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        let version = env
            .schema_version
            .ok_or_else(|| EngineError::validation("schema_version", "missing"))?;
        if version.as_integer() != Some(SCHEMA_VERSION as i64) {
            return Err(EngineError::validation(
                "schema_version",
                format!("unsupported version {version}, expected {SCHEMA_VERSION}"),
            )
            .into());
        }
        let kind = env
            .kind
            .ok_or_else(|| EngineError::validation("kind", "missing"))?;
        let kind: ScenarioKind = kind.try_into().map_err(|_| {
            EngineError::validation("kind", "must be one of asset, mm_trajectory, mm_fuzz, ledger")
        })?;
        let parse_err = |e: toml::de::Error| ScenarioError::Parse(e.to_string());
        let scenario = match kind {
            ScenarioKind::Asset => Scenario::Asset(toml::from_str(text).map_err(parse_err)?),
            ScenarioKind::MmTrajectory => {
                let mut s: TrajectoryScenario = toml::from_str(text).map_err(parse_err)?;
                // zero-filled optional series are echoed in the header
                s.firm = s.firm.normalized().map_err(|e| match e {
                    EngineError::Validation { path, message } => {
                        EngineError::validation(format!("firm.{path}"), message)
                    }
                    other => other,
                })?;
                Scenario::MmTrajectory(s)
            }
            ScenarioKind::MmFuzz => Scenario::MmFuzz(toml::from_str(text).map_err(parse_err)?),
            ScenarioKind::Ledger => Scenario::Ledger(toml::from_str(text).map_err(parse_err)?),
        };
        scenario.validate_output()?;
        Ok(scenario)
    }

    pub fn kind(&self) -> ScenarioKind {
        match self {
            Scenario::Asset(_) => ScenarioKind::Asset,
            Scenario::MmTrajectory(_) => ScenarioKind::MmTrajectory,
            Scenario::MmFuzz(_) => ScenarioKind::MmFuzz,
            Scenario::Ledger(_) => ScenarioKind::Ledger,
        }
    }

    fn output(&self) -> &OutputSelection {
        match self {
            Scenario::Asset(s) => &s.output,
            Scenario::MmTrajectory(s) => &s.output,
            Scenario::MmFuzz(s) => &s.output,
            Scenario::Ledger(s) => &s.output,
        }
    }

    fn validate_output(&self) -> ScenarioResult<()> {
        let known = self.kind().tables();
        if let Some(tables) = &self.output().tables {
            for t in tables {
                if !known.contains(&t.as_str()) {
                    return Err(EngineError::validation(
                        "output.tables",
                        format!("unknown table `{t}` for kind {}", self.kind().as_str()),
                    )
                    .into());
                }
            }
        }
        Ok(())
    }

    fn wants(&self, table: &str) -> bool {
        match &self.output().tables {
            Some(list) => list.iter().any(|t| t == table),
            None => true,
        }
    }

    /// The scenario with every default filled in, as JSON.
    fn effective_config(&self) -> String {
        let v = match self {
            Scenario::Asset(s) => serde_json::to_value(s),
            Scenario::MmTrajectory(s) => serde_json::to_value(s),
            Scenario::MmFuzz(s) => serde_json::to_value(s),
            Scenario::Ledger(s) => serde_json::to_value(s),
        };
        v.expect("scenarios serialize").to_string()
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    /// An equivalence or invariant check failed; the report says which.
    pub check_failed: bool,
}

pub fn run_file(path: &Path, overrides: Overrides, format: Format) -> ScenarioResult<RunOutcome> {
    let bytes = fs::read(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| ScenarioError::Parse("scenario file is not UTF-8".into()))?;
    let digest = format!("{:x}", Sha256::digest(&bytes));
    run_text(&text, &digest, overrides, format)
}

/// Run a scenario given as text; `digest` identifies it in the header.
pub fn run_text(text: &str, digest: &str, overrides: Overrides, format: Format) -> ScenarioResult<RunOutcome> {
    let mut scenario = Scenario::parse(text)?;
    let applied = apply_overrides(&mut scenario, overrides)?;

    let mut report = Report::default();
    report.set("tool", env!("CARGO_PKG_NAME"));
    report.set("version", env!("CARGO_PKG_VERSION"));
    report.set("schema_version", SCHEMA_VERSION.to_string());
    report.set("kind", scenario.kind().as_str());
    report.set("scenario_sha256", digest);
    report.set("format", format.extension());
    report.set("overrides", if applied.is_empty() { "none".to_string() } else { applied.join(";") });

    let check_failed = match &scenario {
        Scenario::Asset(s) => run_asset(s, &scenario, &mut report)?,
        Scenario::MmTrajectory(s) => run_trajectory(s, &scenario, &mut report)?,
        Scenario::MmFuzz(s) => run_fuzz(s, &scenario, &mut report)?,
        Scenario::Ledger(s) => run_ledger(s, &scenario, &mut report)?,
    };
    report.set("config", scenario.effective_config());
    report.set("status", if check_failed { "check_failed" } else { "ok" });
    Ok(RunOutcome { report, check_failed })
}

fn apply_overrides(scenario: &mut Scenario, o: Overrides) -> ScenarioResult<Vec<String>> {
    let mut applied = Vec::new();
    if let Some(seed) = o.seed {
        match scenario {
            Scenario::MmFuzz(s) => s.seed = seed,
            _ => {
                return Err(EngineError::validation("--seed", "only mm_fuzz scenarios take a seed").into())
            }
        }
        applied.push(format!("seed={seed}"));
    }
    if let Some(tol) = o.tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(EngineError::validation("--tol", "must be finite and >= 0").into());
        }
        match scenario {
            Scenario::Asset(s) => s.tol = tol,
            Scenario::MmTrajectory(s) => s.tol = tol,
            Scenario::MmFuzz(s) => s.tol = tol,
            Scenario::Ledger(_) => {
                return Err(EngineError::validation("--tol", "ledger scenarios take no tolerance").into())
            }
        }
        applied.push(format!("tol={tol:e}"));
    }
    Ok(applied)
}

fn check_tol(tol: f64) -> Result<(), EngineError> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(EngineError::validation("tol", "must be finite and >= 0"))
    }
}

fn run_asset(s: &AssetScenario, sc: &Scenario, report: &mut Report) -> ScenarioResult<bool> {
    check_tol(s.tol)?;
    let r = Rate::new(s.rate).map_err(|e| EngineError::validation("rate", e.to_string()))?;
    let v = asset_model::decompose(&s.asset, r)?;
    let residual = v.active_value - v.passive_value - v.goodwill_simple;
    let scale = v.active_value.abs().max(v.passive_value.abs()).max(1.0);
    let failed = residual.abs() > s.tol * scale;
    report.set("tol", format!("{:e}", s.tol));

    if sc.wants("asset_valuation") {
        let mut t = Table::new(
            "asset_valuation",
            vec![
                col("rate", "input"),
                col("lifetime", "input"),
                col("annuity_factor", "fincore::annuity_pv"),
                col("passive_value", "asset_model::passive_value"),
                col("active_value", "asset_model::active_value"),
                col("pure_profit_per_year", "asset_model::pure_profit"),
                col("goodwill_simple", "asset_model::decompose"),
                col("arbitrage_gap", "asset_model::decompose"),
                col("decomposition_residual", "asset_model::decompose"),
                col("passed", "asset_model::decompose"),
            ],
        );
        t.push(vec![
            s.rate.into(),
            s.asset.lifetime.into(),
            annuity_pv(s.asset.lifetime, r).into(),
            v.passive_value.into(),
            v.active_value.into(),
            v.pure_profit_per_year.into(),
            v.goodwill_simple.into(),
            v.arbitrage_gap.into(),
            residual.into(),
            (!failed).into(),
        ]);
        report.tables.push(t);
    }
    Ok(failed)
}

fn run_trajectory(s: &TrajectoryScenario, sc: &Scenario, report: &mut Report) -> ScenarioResult<bool> {
    check_tol(s.tol)?;
    report.set("tol", format!("{:e}", s.tol));
    let traj = FirmTrajectory::build(s.firm.clone(), s.terminal)?;
    let horizon = traj.horizon();
    let pi = traj.pure_profit_series();
    let arb = traj.arbitrage_residuals();

    if sc.wants("trajectory") {
        let mut t = Table::new(
            "trajectory",
            vec![
                col("t", "index"),
                col("nav", "mm_engine::build_trajectory"),
                col("value", "mm_engine::build_trajectory"),
                col("shares", "mm_engine::build_trajectory"),
                col("price", "mm_engine::build_trajectory"),
                col("subscription", "mm_engine::build_trajectory"),
                col("new_shares", "mm_engine::build_trajectory"),
                col("div_per_share", "mm_engine::build_trajectory"),
                col("receipts", "mm_engine::build_trajectory"),
                col("outlays", "mm_engine::build_trajectory"),
                col("pure_profit", "mm_engine::pure_profit_series"),
                col("goodwill", "mm_engine::goodwill"),
                col("arbitrage_residual", "mm_engine::build_trajectory"),
            ],
        );
        for i in 0..=horizon {
            let flow = |v: &[f64]| -> Cell { v.get(i).copied().into() };
            let issue = |v: &[f64]| -> Cell { if i == 0 { Cell::Empty } else { v[i].into() } };
            t.push(vec![
                i.into(),
                traj.nav()[i].into(),
                traj.value()[i].into(),
                traj.shares()[i].into(),
                traj.price()[i].into(),
                issue(traj.subscription()),
                issue(traj.new_shares()),
                flow(traj.div_per_share()),
                flow(traj.receipts()),
                flow(traj.outlays()),
                flow(&pi),
                traj.goodwill(i)?.into(),
                flow(&arb),
            ]);
        }
        report.tables.push(t);
    }

    let mut failed = false;
    let mut eq = Table::new(
        "equivalence",
        vec![
            col("t", "index"),
            col("dividend_stream", "mm_engine::value_dividend_stream"),
            col("discounted_cashflow", "mm_engine::value_discounted_cashflow"),
            col("earnings_recursion", "mm_engine::value_earnings_recursion"),
            col("nav_plus_goodwill", "mm_engine::value_nav_plus_goodwill"),
            col("backward_recursion", "mm_engine::build_trajectory"),
            col("max_rel_deviation", "mm_engine::check_equivalence"),
            col("passed", "mm_engine::check_equivalence"),
        ],
    );
    for i in 0..=horizon {
        let rep = traj.check_equivalence(i, s.tol)?;
        failed |= !rep.passed;
        let mut row: Vec<Cell> = vec![i.into()];
        row.extend(rep.values().iter().map(|v| Cell::from(*v)));
        row.push(rep.max_rel_deviation.into());
        row.push(rep.passed.into());
        eq.push(row);
    }
    if sc.wants("equivalence") {
        report.tables.push(eq);
    }

    if sc.wants("telescoping") {
        let mut t = Table::new(
            "telescoping",
            vec![
                col("t", "index"),
                col("double_sum", "mm_engine::telescoping_check"),
                col("terminal_correction", "mm_engine::telescoping_check"),
                col("discounted_investment", "mm_engine::telescoping_check"),
                col("max_term_deviation", "mm_engine::telescoping_check"),
            ],
        );
        for i in 0..=horizon {
            let tc = traj.telescoping_check(i)?;
            t.push(vec![
                i.into(),
                tc.double_sum.into(),
                tc.terminal_correction.into(),
                tc.discounted_investment.into(),
                tc.max_term_deviation().into(),
            ]);
        }
        report.tables.push(t);
    }
    Ok(failed)
}

fn run_fuzz(s: &FuzzScenario, sc: &Scenario, report: &mut Report) -> ScenarioResult<bool> {
    report.set("seed", s.seed.to_string());
    report.set("tol", format!("{:e}", s.tol));
    let summary = fuzz_equivalence(s.count, s.seed, s.tol, &s.ranges)?;

    if sc.wants("fuzz_summary") {
        let mut t = Table::new(
            "fuzz_summary",
            vec![
                col("count", "input"),
                col("seed", "input"),
                col("tol", "input"),
                col("failures", "scenario::fuzz_equivalence"),
                col("max_deviation", "scenario::fuzz_equivalence"),
                col("rejected", "scenario::fuzz_equivalence"),
                col("rejection_rate", "scenario::fuzz_equivalence"),
            ],
        );
        t.push(vec![
            summary.count.into(),
            Cell::Text(summary.seed.to_string()),
            summary.tol.into(),
            (summary.failures.len() as u64).into(),
            summary.max_deviation.into(),
            summary.rejected.into(),
            summary.rejection_rate.into(),
        ]);
        report.tables.push(t);
    }
    let case_columns = || {
        vec![
            col("index", "scenario::fuzz_equivalence"),
            col("horizon", "mm_engine::random"),
            col("rate", "mm_engine::random"),
            col("interior_t", "mm_engine::random"),
            col("deviation_t0", "mm_engine::check_equivalence"),
            col("deviation_interior", "mm_engine::check_equivalence"),
            col("rejected", "mm_engine::random"),
            col("passed", "mm_engine::check_equivalence"),
        ]
    };
    let case_row = |c: &FuzzCase| -> Vec<Cell> {
        vec![
            c.index.into(),
            c.horizon.into(),
            c.rate.into(),
            c.interior_t.into(),
            c.deviation_t0.into(),
            c.deviation_interior.into(),
            c.rejected.into(),
            c.passed.into(),
        ]
    };
    if sc.wants("fuzz_cases") {
        let mut t = Table::new("fuzz_cases", case_columns());
        for c in &summary.cases {
            t.push(case_row(c));
        }
        report.tables.push(t);
    }
    if sc.wants("fuzz_failures") {
        let mut t = Table::new("fuzz_failures", case_columns());
        for c in summary.cases.iter().filter(|c| !c.passed) {
            t.push(case_row(c));
        }
        report.tables.push(t);
    }
    Ok(!summary.failures.is_empty())
}

fn run_ledger(s: &LedgerScenario, sc: &Scenario, report: &mut Report) -> ScenarioResult<bool> {
    let opening = s.book.open()?;
    let log = EventLog::from_events(s.events.iter().cloned());

    let mut trace = Table::new(
        "ledger_trace",
        vec![
            col("seq", "ledger::EventLog"),
            col("kind", "ledger::LedgerEvent"),
            col("nav", "ledger::FirmBook::apply"),
            col("collective", "ledger::FirmBook::apply"),
            col("balances_total", "ledger::FirmBook::apply"),
            col("total_shares", "ledger::FirmBook::apply"),
            col("share_price", "ledger::FirmBook::apply"),
            col("payout", "ledger::exit_payout"),
            col("flags", "ledger::FirmBook::apply"),
        ],
    );
    let mut book = opening.clone();
    for rec in log.records() {
        let out = book.apply(&rec.event).map_err(|e| match e {
            EngineError::Validation { path, message } => {
                EngineError::validation(format!("events[{}].{path}", rec.seq - 1), message)
            }
            other => EngineError::validation(format!("events[{}]", rec.seq - 1), other.to_string()),
        })?;
        let flags: Vec<String> = out
            .flags
            .iter()
            .map(|f| serde_json::to_string(f).expect("flags serialize"))
            .collect();
        trace.push(vec![
            rec.seq.into(),
            rec.event.kind().into(),
            book.nav.into(),
            book.collective.into(),
            book.balances_total().into(),
            book.total_shares.into(),
            book.share_price.into(),
            out.payout.into(),
            flags.join(" ").into(),
        ]);
    }
    // replaying the serialized log must reproduce the book exactly
    let jsonl = log.to_jsonl();
    let (replayed, _) = EventLog::from_jsonl(&jsonl)?.replay(&opening)?;
    let replay_ok = snapshot(&replayed) == snapshot(&book);
    report.set("replay_identical", replay_ok.to_string());
    report.attachments.push(("events.jsonl".into(), jsonl));
    report
        .attachments
        .push(("final_book.json".into(), format!("{}\n", snapshot(&book))));

    if sc.wants("ledger_trace") {
        report.tables.push(trace);
    }
    if sc.wants("accounts") {
        let mut t = Table::new(
            "accounts",
            vec![
                col("member", "ledger::MemberAccount"),
                col("active", "ledger::MemberAccount"),
                col("balance", "ledger::MemberAccount"),
                col("share_count", "ledger::MemberAccount"),
                col("labor_weight", "ledger::MemberAccount"),
            ],
        );
        for a in book.accounts.values() {
            t.push(vec![
                a.member_id.as_str().into(),
                a.active.into(),
                a.balance.into(),
                a.share_count.into(),
                a.labor_weight.into(),
            ]);
        }
        report.tables.push(t);
    }
    if let Some(analysis) = &s.analysis {
        let market = ExitRule::Market {
            market_value: analysis.market_value,
        };
        let incentive = book.sellout_incentive(analysis.market_value)?;
        if sc.wants("sellout") {
            let mut t = Table::new(
                "sellout",
                vec![
                    col("member", "ledger::sellout_incentive"),
                    col("nav_payout", "ledger::sellout_incentive"),
                    col("market_payout", "ledger::sellout_incentive"),
                    col("delta", "ledger::sellout_incentive"),
                ],
            );
            for (id, delta) in &incentive.deltas {
                t.push(vec![
                    id.as_str().into(),
                    incentive.nav_payouts[id].into(),
                    incentive.market_payouts[id].into(),
                    (*delta).into(),
                ]);
            }
            t.push(vec![
                "*total*".into(),
                incentive.nav_payouts.values().sum::<Money>().into(),
                incentive.market_payouts.values().sum::<Money>().into(),
                incentive.aggregate_delta.into(),
            ]);
            report.tables.push(t);
        }
        if sc.wants("repurchase") {
            let mut t = Table::new(
                "repurchase",
                vec![
                    col("rule", "input"),
                    col("liability", "ledger::repurchase_liability"),
                    col("note", "ledger::sellout_incentive"),
                ],
            );
            let note = if incentive.diagnostic_only {
                "market value applied to value-denominated accounts: inappropriate, diagnostic only"
            } else {
                ""
            };
            t.push(vec!["nav".into(), book.repurchase_liability(ExitRule::Nav)?.into(), "".into()]);
            t.push(vec!["market".into(), book.repurchase_liability(market)?.into(), note.into()]);
            report.tables.push(t);
        }
        report.set("market_value", analysis.market_value.to_string());
        report.set("goodwill", incentive.goodwill.to_string());
    }
    Ok(!replay_ok)
}
