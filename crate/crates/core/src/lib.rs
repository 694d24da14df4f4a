pub mod corpus;
pub mod extension;
pub mod folog;
pub mod gamma;
pub mod group;
pub mod interp;
pub mod report;
