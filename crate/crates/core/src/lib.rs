pub mod cluster;
pub mod error;
pub mod intersect;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod mp;
pub mod pipeline;
pub mod poly;
pub mod resultant;
pub mod roots;
pub mod covariant;
