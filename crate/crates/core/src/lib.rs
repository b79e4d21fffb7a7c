pub mod geometry;
pub mod placement;
pub mod specfun;
pub mod lstsq;
pub mod basis;
pub mod exprlang;
pub mod solver;
