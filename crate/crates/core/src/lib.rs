//! Two resonantly coupled cavity modes excited by a vibrating wall.

pub mod cavity;
pub mod error;
pub mod gaussian;
pub mod oracle;
pub mod resmap;
pub mod slowamp;
pub mod validation;

pub use cavity::{Mode, ModelParams};
pub use error::{Error, Result};
