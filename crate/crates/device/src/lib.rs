//! Contact-tracing device layer.
//!
//! Every contact that both devices record produces two fresh random tokens,
//! one per side. Each device keeps a local log of `(day, own token, peer
//! token, distance, duration)` records and reacts only to requests that
//! name one of its own tokens. Nothing here knows which person carries a
//! device: the simulator keeps that mapping on its side of the
//! [`DeviceHandle`] boundary.

mod network;
mod store;
mod token;

pub use network::{apply_app_usage, update_dev_data, DeviceHandle, DeviceNetwork, TokenRouter};
pub use store::{ContactObservation, DeviceRecord, DeviceStore};
pub use token::{Pseudonym, TokenId};
