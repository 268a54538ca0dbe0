//! Standard test cones, also shipped as JSON files under `zoo/`.

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::numerics::Rational;

pub const NAMES: &[&str] = &[
    "orthant2",
    "orthant3",
    "orthant4",
    "ray2",
    "ray3",
    "halfplane2",
    "halfspace3",
    "line2",
    "subspace2in3",
    "quadrant2_rot",
    "wedge3",
    "squarecone3",
    "squarecone_x_ray",
];

fn q(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::integer(x)).collect()
}

pub fn square_cone() -> Cone<Rational> {
    Cone::from_i64_generators(3, &[&[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]]).expect("valid generators")
}

/// Cone of the zoo by name.
pub fn get(name: &str) -> Result<Cone<Rational>> {
    Ok(match name {
        "orthant2" => Cone::orthant(2),
        "orthant3" => Cone::orthant(3),
        "orthant4" => Cone::orthant(4),
        "ray2" => Cone::ray(2, q(&[1, 0]))?,
        "ray3" => Cone::ray(3, q(&[0, 0, 1]))?,
        "halfplane2" => Cone::half_space(2, q(&[0, -1]))?,
        "halfspace3" => Cone::half_space(3, q(&[0, 0, -1]))?,
        "line2" => Cone::subspace(2, &[q(&[1, 0])])?,
        "subspace2in3" => Cone::subspace(3, &[q(&[1, 0, 0]), q(&[0, 1, 0])])?,
        "quadrant2_rot" => Cone::from_i64_generators(2, &[&[1, 1], &[-1, 1]])?,
        "wedge3" => Cone::from_i64_rows(3, &[&[-1, 0, 0], &[0, -1, 0]])?,
        "squarecone3" => square_cone(),
        "squarecone_x_ray" => square_cone().product(&Cone::orthant(1)),
        _ => return Err(Error::InvalidConfig(format!("unknown zoo cone {name:?}"))),
    })
}

/// Every zoo cone with its name.
pub fn all() -> Vec<(&'static str, Cone<Rational>)> {
    NAMES.iter().map(|&n| (n, get(n).expect("zoo cones are valid"))).collect()
}
