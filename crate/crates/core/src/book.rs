#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}

#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}

#[doc = include_str!("../../../book/src/elliptic.md")]
pub mod elliptic {}

#[doc = include_str!("../../../book/src/welding.md")]
pub mod welding {}

#[doc = include_str!("../../../book/src/moduli.md")]
pub mod moduli {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
