pub mod backreach;
pub mod cli;
pub mod dynamics;
pub mod exec;
pub mod fixtures;
pub mod geometry;
pub mod lp;
pub mod nnet;
pub mod partition;
pub mod quant;
pub mod sim;
pub mod synthetic;
