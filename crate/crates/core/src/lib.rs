//! Root systems, affine Weyl groups and the Chebyshev-like polynomial maps
//! `T_{Phi,d}` they define, together with two independent computations of the
//! iterated monodromy action of those maps: numerical loop lifting and the exact
//! coset action of the affine Weyl group on the tree of preimages.

pub mod chebmap;
pub mod continuation;
pub mod critical;
pub mod error;
pub mod gencos;
pub mod linalg;
pub mod monodromy;
pub mod mpeval;
pub mod rootsys;
pub mod selfsim;

pub use error::{Error, Result};

pub(crate) mod serde_q {
    use crate::linalg::Q;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn fmt_q(q: &Q) -> String {
        if q.is_integer() {
            q.numer().to_string()
        } else {
            format!("{}/{}", q.numer(), q.denom())
        }
    }

    pub fn parse_q(s: &str) -> Option<Q> {
        match s.split_once('/') {
            Some((a, b)) => {
                let n: i64 = a.trim().parse().ok()?;
                let d: i64 = b.trim().parse().ok()?;
                (d != 0).then(|| Q::new(n, d))
            }
            None => s.trim().parse().ok().map(Q::from_integer),
        }
    }

    pub fn serialize<S: Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`")))
    }
}
