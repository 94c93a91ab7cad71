pub mod cli;
pub mod inference;
pub mod io;
pub mod roots;
pub mod sim;
pub mod stats;
pub mod validate;
