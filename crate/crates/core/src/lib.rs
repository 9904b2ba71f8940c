//! Core cryptography: the Type-A pairing group, the LSSS policy compiler, and
//! the relay-coordinated traceable CP-ABE scheme with keyword search.

pub mod codec;
pub mod lsss;
pub mod pairing;
pub mod scheme;
