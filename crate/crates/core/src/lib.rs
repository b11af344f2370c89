pub mod algebra;
pub mod auth;
pub mod harness;
pub mod identity;
pub mod kzg;
pub mod ledger;
pub mod ops;
