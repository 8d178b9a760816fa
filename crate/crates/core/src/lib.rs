//! Privacy-preserving reputation feedback for online auctions.

pub mod crypto;
pub mod escrow;
pub mod game;
pub mod protocol;
pub mod sampling;
pub mod transport;
pub mod zkp;
