pub mod condenser;
pub mod exponents;
pub mod expr;
pub mod geometry;
pub mod weight;

pub use condenser::Condenser;
pub use exponents::{unit_ball_volume, unit_sphere_area, Exponents};
pub use expr::{parse_expr, BinOp, Expr, ExprError, Func, Limit, ParseError};
pub use geometry::{dist, dot, norm, Ball, BallSequence, BoundaryExtent, Endpoint, RadialSet, SetDescriptor};
pub use weight::{weight_ball_mass, Weight, WeightValue};
