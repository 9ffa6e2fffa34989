//! Serde adapter rendering a `Ratio<u128>` as `{"num": .., "den": ..}`.

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Repr {
    num: u128,
    den: u128,
}

pub fn serialize<S: Serializer>(x: &Ratio<u128>, s: S) -> Result<S::Ok, S::Error> {
    Repr {
        num: *x.numer(),
        den: *x.denom(),
    }
    .serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<u128>, D::Error> {
    let r = Repr::deserialize(d)?;
    if r.den == 0 {
        return Err(serde::de::Error::custom("zero denominator"));
    }
    Ok(Ratio::new(r.num, r.den))
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Ratio<u128>], s: S) -> Result<S::Ok, S::Error> {
        xs.iter()
            .map(|v| Repr {
                num: *v.numer(),
                den: *v.denom(),
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Ratio<u128>>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| {
                if r.den == 0 {
                    Err(serde::de::Error::custom("zero denominator"))
                } else {
                    Ok(Ratio::new(r.num, r.den))
                }
            })
            .collect()
    }
}
