//! JSON-lines bridge to an external scorer worker (neural duration predictor and QE model).

mod client;
pub mod conformance;
pub mod mock;
mod protocol;

pub use client::{BridgeClient, BridgeError, BRIDGE_ENV};
pub use protocol::{BridgeRequest, BridgeResponse, Capabilities, ErrorBody, ErrorCode, RequestBody};
