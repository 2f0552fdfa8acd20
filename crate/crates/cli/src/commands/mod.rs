pub mod budget;
pub mod chevron;
pub mod fit;
pub mod g0;
pub mod synth;
pub mod transduce;
pub mod vernier;
