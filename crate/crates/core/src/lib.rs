pub mod cli;
pub mod engine;
pub mod evp;
pub mod geometry;
pub mod io;
pub mod model;
pub mod product;
pub mod scalarization;
