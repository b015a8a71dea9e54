//! A verifying kernel for multirole logic (MRL) and its linear variant (LMRL).
//!
//! * [`roles`]: finite role sets, endomorphisms, principal (ultra)filters.
//! * [`syntax`]: terms, formulas, i-formulas `[R]A` and sequents.
//! * [`checker`]: derivation trees and the rule checker.
//! * [`transform`]: constructive admissibility transformations, up to
//!   multiparty cut-elimination.
//! * [`search`]: bounded backward proof search used as an independent oracle.
//! * [`admissible`]: the admissible rules as a named strategy registry.
//! * [`sexpr`]: the s-expression surface syntax and session files.

pub mod admissible;
pub mod checker;
pub mod roles;
pub mod search;
pub mod sexpr;
pub mod syntax;
pub mod transform;

pub use checker::{check, Calculus, CheckReport, Derivation, LogicMode, Reason, Rejection, Rule, RuleTag};
pub use transform::{CutMetric, Engine, Trace, TransformError};
pub use roles::{PrincipalFilter, RoleSet, Ultrafilter, Universe};
pub use syntax::{Formula, IFormula, Sequent, Term};
