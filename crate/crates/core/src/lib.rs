//! Billiards in cavities, their scattering laws, the resistance they induce
//! on a slowly rotating rough disc, and a planner steering the disc along a
//! prescribed broken line.

pub mod decimal;
pub mod dynamics;
pub mod error;
pub mod geom2d;
pub mod hollow;
pub mod measure;
pub mod numerics;
pub mod planner;
pub mod resistance;
pub mod svg;
pub mod trace;

pub use error::{Error, Result};
pub use geom2d::{reflect, Primitive, Ray, Vec2};
pub use hollow::{
    make_amphora, make_flat_mirror, make_hybrid, make_modified_amphora, make_mushroom,
    make_v_groove, AmphoraParams, AngleInterval, Hollow, HybridParams, MushroomParams,
};
