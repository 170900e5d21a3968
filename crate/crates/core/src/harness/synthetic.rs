use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::instance::TransportInstance;
use crate::matrix::Matrix;

/// Units of mass per unit of total supply.
pub const MASS_UNITS: u32 = 1024;
/// Denominator of the dyadic cost grid.
pub const COST_UNITS: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MassProfile {
    /// Both sides split [`MASS_UNITS`] units at random, so `Σd = Σs = 1`.
    Random,
    /// Every node on a side gets the same share of total mass 1.
    Uniform,
    /// Supply as in `Random`, demand carries half again as much mass.
    Surplus,
    /// All supply on a single node.
    Concentrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CostProfile {
    /// Independent multiples of `1/256` in `[0, 1]`.
    Random,
    Zero,
    /// A single value shared by every edge.
    Constant,
    /// Only the values 0, 1/2 and 1, so ties are everywhere.
    Duplicate,
}

macro_rules! named_enum {
    ($ty:ident { $($variant:ident => $name:literal),* $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$variant),*];

            pub fn name(self) -> &'static str {
                match self {
                    $($ty::$variant => $name),*
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Error> {
                match s {
                    $($name => Ok($ty::$variant),)*
                    other => Err(Error::InvalidParameter(format!(
                        concat!("unknown ", stringify!($ty), " {:?}"),
                        other
                    ))),
                }
            }
        }
    };
}

named_enum!(MassProfile {
    Random => "random",
    Uniform => "uniform",
    Surplus => "surplus",
    Concentrated => "concentrated",
});

named_enum!(CostProfile {
    Random => "random",
    Zero => "zero",
    Constant => "constant",
    Duplicate => "duplicate",
});

fn split_units(rng: &mut ChaCha8Rng, bins: usize, units: u32) -> Vec<f64> {
    let mut counts = vec![0u32; bins];
    for _ in 0..units {
        counts[rng.gen_range(0..bins)] += 1;
    }
    counts.into_iter().map(|c| c as f64 / MASS_UNITS as f64).collect()
}

/// Deterministic pseudo-random instance with total supply 1.
///
/// Random masses are multiples of `1/1024` and costs multiples of `1/256`, so
/// they are exact in binary floating point.
///
/// # Panics
///
/// If either side is empty.
pub fn synthetic_instance(
    n_a: usize,
    n_b: usize,
    seed: u64,
    mass: MassProfile,
    cost: CostProfile,
) -> TransportInstance {
    assert!(n_a >= 1 && n_b >= 1, "both sides need at least one node");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (demands, supplies) = match mass {
        MassProfile::Random => (
            split_units(&mut rng, n_a, MASS_UNITS),
            split_units(&mut rng, n_b, MASS_UNITS),
        ),
        MassProfile::Uniform => (vec![1.0 / n_a as f64; n_a], vec![1.0 / n_b as f64; n_b]),
        MassProfile::Surplus => (
            split_units(&mut rng, n_a, MASS_UNITS * 3 / 2),
            split_units(&mut rng, n_b, MASS_UNITS),
        ),
        MassProfile::Concentrated => {
            let mut s = vec![0.0; n_b];
            s[rng.gen_range(0..n_b)] = 1.0;
            (split_units(&mut rng, n_a, MASS_UNITS), s)
        }
    };
    let grid = COST_UNITS as f64;
    let costs = match cost {
        CostProfile::Random => Matrix::from_fn(n_a, n_b, |_, _| rng.gen_range(0..=COST_UNITS) as f64 / grid),
        CostProfile::Zero => Matrix::filled(n_a, n_b, 0.0),
        CostProfile::Constant => Matrix::filled(n_a, n_b, rng.gen_range(1..=COST_UNITS) as f64 / grid),
        CostProfile::Duplicate => Matrix::from_fn(n_a, n_b, |_, _| rng.gen_range(0..=2) as f64 / 2.0),
    };
    TransportInstance::new(demands, supplies, costs)
        .expect("generated masses and costs are valid by construction")
}
