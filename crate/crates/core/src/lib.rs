pub mod flows;
pub mod fmux;
pub mod graph;
pub mod lp;
pub mod nodeset;
pub mod sim;
pub mod wireline;
pub mod wireless;
pub mod harness;
