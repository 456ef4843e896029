pub mod bits;
pub mod decomposition;
pub mod experiment;
pub mod flow;
pub mod graph;
pub mod impl_a;
pub mod impl_b;
pub mod oracle;
pub mod routing;
