mod field;
pub mod ode;
pub mod solve;
mod ideal;
mod space;

pub use field::*;
pub use ideal::*;
pub use space::*;
