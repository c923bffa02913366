pub mod exactpoly;
pub mod wittcore;
pub mod localfield;
pub mod cohomlab;
