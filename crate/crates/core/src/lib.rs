pub mod bundle;
pub mod catalog;
pub mod groupoid;
pub mod homology;
pub mod matrix;
pub mod model;
pub mod planar;
pub mod rewrite;
pub mod snf;
pub mod word;
