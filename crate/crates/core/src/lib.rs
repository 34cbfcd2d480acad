pub mod algebra;
pub mod error;
pub mod field;
pub mod group;
pub mod matrix;
pub mod local;
pub mod symfun;
pub mod modular;
pub mod decide;
pub mod builder;
pub mod io;
pub mod selftest;
