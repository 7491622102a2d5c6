//! Type strings and the standard Cartan matrices (Bourbaki numbering).
//!
//! Entry `(i, j)` of a Cartan matrix is the pairing of the simple coroot
//! `alpha_i^v` with the simple root `alpha_j`, so column `j` lists the
//! fundamental-weight coordinates of `alpha_j`.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Irreducible {
    pub family: char,
    pub rank: usize,
}

impl Irreducible {
    pub fn label(&self) -> String {
        format!("{}{}", self.family, self.rank)
    }

    /// Order of the Weyl group.
    pub fn weyl_order(&self) -> u128 {
        let n = self.rank as u128;
        let fact = |k: u128| (1..=k).product::<u128>();
        match self.family {
            'A' => fact(n + 1),
            'B' | 'C' => (1u128 << n) * fact(n),
            'D' => (1u128 << (n - 1)) * fact(n),
            'E' => match n {
                6 => 51_840,
                7 => 2_903_040,
                _ => 696_729_600,
            },
            'F' => 1152,
            'G' => 12,
            _ => unreachable!(),
        }
    }

    pub fn cartan(&self) -> Vec<Vec<i64>> {
        let n = self.rank;
        let mut c = vec![vec![0i64; n]; n];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 2;
        }
        let mut link = |i: usize, j: usize| {
            c[i][j] = -1;
            c[j][i] = -1;
        };
        match self.family {
            'A' | 'B' | 'C' => {
                for i in 0..n.saturating_sub(1) {
                    link(i, i + 1);
                }
            }
            'D' => {
                for i in 0..n - 2 {
                    link(i, i + 1);
                }
                link(n - 3, n - 1);
            }
            'E' => {
                // 1-3-4-5-6(-7-8), 2 hangs off 4
                link(0, 2);
                link(1, 3);
                for i in 2..n - 1 {
                    link(i, i + 1);
                }
            }
            'F' => {
                link(0, 1);
                link(1, 2);
                link(2, 3);
            }
            'G' => link(0, 1),
            _ => unreachable!(),
        }
        match self.family {
            // alpha_n short
            'B' => c[n - 1][n - 2] = -2,
            // alpha_n long
            'C' => c[n - 2][n - 1] = -2,
            // alpha_3, alpha_4 short
            'F' => c[2][1] = -2,
            // alpha_1 short, alpha_2 long
            'G' => c[0][1] = -3,
            _ => {}
        }
        c
    }
}

/// Parses `IRRED ("x" IRRED)*` where `IRRED` is a family letter followed by a rank.
pub fn parse_type_spec(spec: &str) -> Result<Vec<Irreducible>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::Parse(spec.to_string()));
    }
    spec.split('x').map(|part| parse_irreducible(part, spec)).collect()
}

fn parse_irreducible(part: &str, whole: &str) -> Result<Irreducible> {
    let mut chars = part.chars();
    let family = chars.next().ok_or_else(|| Error::Parse(whole.to_string()))?;
    if !matches!(family, 'A'..='G') {
        return Err(Error::Parse(whole.to_string()));
    }
    let digits = chars.as_str();
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) || digits.len() > 3 {
        return Err(Error::Parse(whole.to_string()));
    }
    let rank: usize = digits.parse().map_err(|_| Error::Parse(whole.to_string()))?;
    let ok = match family {
        'A' => rank >= 1,
        'B' | 'C' => rank >= 2,
        'D' => rank >= 3,
        'E' => (6..=8).contains(&rank),
        'F' => rank == 4,
        'G' => rank == 2,
        _ => false,
    };
    if !ok {
        return Err(Error::UnsupportedRank { family, rank });
    }
    Ok(Irreducible { family, rank })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_products() {
        let p = parse_type_spec("B3xA1").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0], Irreducible { family: 'B', rank: 3 });
        assert_eq!(p[1], Irreducible { family: 'A', rank: 1 });
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_type_spec("Z9"), Err(Error::Parse(_))));
        assert!(matches!(parse_type_spec("A"), Err(Error::Parse(_))));
        assert!(matches!(parse_type_spec("A2x"), Err(Error::Parse(_))));
        assert!(matches!(parse_type_spec("a2"), Err(Error::Parse(_))));
        assert!(matches!(parse_type_spec(""), Err(Error::Parse(_))));
    }

    #[test]
    fn rank_restrictions() {
        assert!(matches!(
            parse_type_spec("B1"),
            Err(Error::UnsupportedRank { family: 'B', rank: 1 })
        ));
        assert!(parse_type_spec("D2").is_err());
        assert!(parse_type_spec("E5").is_err());
        assert!(parse_type_spec("E9").is_err());
        assert!(parse_type_spec("F3").is_err());
        assert!(parse_type_spec("G3").is_err());
        assert!(parse_type_spec("A0").is_err());
        assert!(parse_type_spec("E8").is_ok());
    }

    #[test]
    fn weyl_orders() {
        let order = |s: &str| parse_type_spec(s).unwrap()[0].weyl_order();
        assert_eq!(order("A2"), 6);
        assert_eq!(order("B2"), 8);
        assert_eq!(order("G2"), 12);
        assert_eq!(order("F4"), 1152);
        assert_eq!(order("D4"), 192);
        assert_eq!(order("E6"), 51840);
    }

    #[test]
    fn g2_cartan() {
        let c = Irreducible { family: 'G', rank: 2 }.cartan();
        assert_eq!(c, vec![vec![2, -3], vec![-1, 2]]);
    }
}
