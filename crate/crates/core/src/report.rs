//! Serialization helpers shared by the report emitters.

use num_bigint::{BigInt, BigUint};
use serde::Serializer;

/// Big integers are emitted as decimal strings so no JSON consumer rounds them.
pub(crate) fn ser_biguint<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[allow(dead_code)]
pub(crate) fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}
